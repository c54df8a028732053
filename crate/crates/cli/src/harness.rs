//! Run driver and grid-convergence study.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use wbmhd_core::imex::{Solver, SolverConfig, SolverState, Totals};
use wbmhd_core::problems::ProblemSpec;
use wbmhd_core::state::cons_to_prim;
use wbmhd_core::FieldSet;

use crate::config::RunConfig;
use crate::output::{
    fmt_f64, kinetic_energy_series, write_diagnostics, write_kinetic_energy, write_snapshot, DiagnosticsRecord,
};

/// Names of the primitive variables compared in an error table.
pub fn error_variables(dim: usize) -> Vec<&'static str> {
    let mut v = vec!["rho", "u"];
    if dim >= 2 {
        v.push("v");
    }
    if dim >= 3 {
        v.push("w");
    }
    v.push("p");
    v
}

/// L1 norms `sum |w - w0| vol` of the primitive variables against the
/// initial condition, in the order of [`error_variables`].
pub fn l1_errors_vs_initial(spec: &ProblemSpec, q: &FieldSet) -> Result<Vec<f64>> {
    let g = q.grid();
    let dim = g.dim();
    let mut e = vec![0.0; dim + 2];
    for c in g.interior() {
        let w = cons_to_prim(&q.get(c), &spec.eos)?;
        let w0 = spec.initial_primitive(g.cell_center(c));
        e[0] += (w.rho - w0.rho).abs();
        for a in 0..dim {
            e[1 + a] += (w.vel[a] - w0.vel[a]).abs();
        }
        e[dim + 1] += (w.p - w0.p).abs();
    }
    let vol = g.cell_volume();
    Ok(e.into_iter().map(|x| x * vol).collect())
}

/// `log2(coarse / fine)`; `None` when either error is zero or not finite.
pub fn eoc(coarse: f64, fine: f64) -> Option<f64> {
    let r = (coarse / fine).log2();
    (coarse > 0.0 && fine > 0.0 && r.is_finite()).then_some(r)
}

/// Outcome of one grid level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelResult {
    pub n: usize,
    pub errors: Vec<f64>,
    /// EOC against the previous (coarser) level.
    pub eoc: Vec<Option<f64>>,
    pub steps: usize,
    pub krylov_iterations: usize,
    pub max_div_b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub problem: String,
    pub variables: Vec<&'static str>,
    pub rows: Vec<LevelResult>,
}

/// Printed in place of an undefined order of convergence (an em dash).
pub const UNDEFINED: &str = "\u{2014}";

/// Mantissa with four decimals and a signed two-digit exponent.
pub fn sci(x: f64) -> String {
    if x == 0.0 {
        return "0.0000E+00".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.4E}");
    let (m, e) = s.split_once('E').unwrap();
    let e: i32 = e.parse().unwrap();
    format!("{m}E{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
}

impl fmt::Display for ConvergenceTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>6}", "N")?;
        for v in &self.variables {
            write!(f, " {:>12} {:>6}", format!("L1({v})"), "EOC")?;
        }
        writeln!(f, " {:>8} {:>7}", "iters", "steps")?;
        for r in &self.rows {
            write!(f, "{:>6}", r.n)?;
            for (e, o) in r.errors.iter().zip(&r.eoc) {
                let o = o.map_or(UNDEFINED.to_string(), |o| format!("{o:.2}"));
                write!(f, " {:>12} {:>6}", sci(*e), o)?;
            }
            writeln!(f, " {:>8} {:>7}", r.krylov_iterations, r.steps)?;
        }
        Ok(())
    }
}

impl ConvergenceTable {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
        let mut head = vec!["N".to_string()];
        for v in &self.variables {
            head.push(format!("L1_{v}"));
            head.push(format!("EOC_{v}"));
        }
        head.extend(["krylov_iterations".into(), "steps".into(), "max_div_b".into()]);
        w.write_record(&head)?;
        for r in &self.rows {
            let mut rec = vec![r.n.to_string()];
            for (e, o) in r.errors.iter().zip(&r.eoc) {
                rec.push(fmt_f64(*e));
                rec.push(o.map_or(String::new(), fmt_f64));
            }
            rec.extend([r.krylov_iterations.to_string(), r.steps.to_string(), fmt_f64(r.max_div_b)]);
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn run_level(spec: &ProblemSpec, n: usize, config: SolverConfig) -> Result<LevelResult> {
    let spec = spec.clone().with_cells(n);
    let solver = Solver::new(&spec, config)?;
    let (mut steps, mut iters, mut div) = (0, 0, 0.0f64);
    let end = solver.run(solver.initial_state(), spec.t_end, |r, _| {
        steps += 1;
        iters += r.krylov_iterations;
        div = div.max(r.max_div_b);
    })?;
    let errors = l1_errors_vs_initial(&spec, &solver.physical(&end))?;
    let eoc = vec![None; errors.len()];
    Ok(LevelResult { n, errors, eoc, steps, krylov_iterations: iters, max_div_b: div })
}

/// Runs `spec` on each grid (cells per active axis) to its end time and
/// tabulates L1 errors against the initial condition. Levels run on
/// separate threads.
pub fn convergence_study(spec: &ProblemSpec, grids: &[usize], config: SolverConfig) -> Result<ConvergenceTable> {
    if grids.is_empty() {
        bail!("no grids given");
    }
    let results: Vec<Result<LevelResult>> = std::thread::scope(|s| {
        let handles: Vec<_> = grids.iter().map(|&n| s.spawn(move || run_level(spec, n, config))).collect();
        handles.into_iter().map(|h| h.join().expect("grid level panicked")).collect()
    });
    let mut rows = Vec::with_capacity(results.len());
    for (r, n) in results.into_iter().zip(grids) {
        rows.push(r.with_context(|| format!("grid {n}"))?);
    }
    for i in 1..rows.len() {
        let eocs = rows[i - 1].errors.iter().zip(&rows[i].errors).map(|(&c, &f)| eoc(c, f)).collect();
        rows[i].eoc = eocs;
    }
    Ok(ConvergenceTable { problem: spec.name.clone(), variables: error_variables(spec.dim), rows })
}

/// What a finished run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub t: f64,
    pub max_div_b: f64,
    pub krylov_iterations: usize,
    pub initial: Totals,
    pub totals: Totals,
    pub snapshots: Vec<PathBuf>,
    pub diagnostics: PathBuf,
    pub kinetic_energy: PathBuf,
}

fn snapshot(solver: &Solver, spec: &ProblemSpec, state: &SolverState, step: usize, dir: &Path) -> Result<PathBuf> {
    let path = dir.join(format!("snapshot_{step:06}.csv"));
    write_snapshot(&solver.physical(state), &spec.eos, state.t, &path)?;
    Ok(path)
}

/// Runs a configured problem, writing its CSV files into the output
/// directory.
pub fn execute(config: &RunConfig) -> Result<RunSummary> {
    let spec = config.problem_spec()?;
    let solver = Solver::new(&spec, config.solver_config())?;
    let dir = &config.out;
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;

    let state = solver.initial_state();
    let initial = solver.totals(&state);
    let mut snapshots = vec![snapshot(&solver, &spec, &state, 0, dir)?];
    let mut diag = Vec::new();
    let mut ke = vec![(0.0, initial.kinetic_energy)];
    let mut write_err = None;
    let mut last_written = 0;
    let end = solver.run(state, spec.t_end, |r, s| {
        diag.push(DiagnosticsRecord::from(r));
        ke.push((r.t, r.totals.kinetic_energy));
        if config.snapshot_every.is_some_and(|k| r.step % k == 0) && write_err.is_none() {
            match snapshot(&solver, &spec, s, r.step, dir) {
                Ok(p) => {
                    snapshots.push(p);
                    last_written = r.step;
                }
                Err(e) => write_err = Some(e),
            }
        }
    });
    // Partial diagnostics are still useful after a solver failure.
    let diagnostics = dir.join("diagnostics.csv");
    write_diagnostics(&diag, &diagnostics)?;
    let kinetic_energy = dir.join("kinetic_energy.csv");
    write_kinetic_energy(&kinetic_energy_series(&ke), &kinetic_energy)?;
    let end = end.with_context(|| format!("{} failed", spec.name))?;
    if let Some(e) = write_err {
        return Err(e);
    }
    if last_written != diag.len() {
        snapshots.push(snapshot(&solver, &spec, &end, diag.len(), dir)?);
    }
    Ok(RunSummary {
        steps: diag.len(),
        t: end.t,
        max_div_b: diag.iter().map(|d| d.max_div_b).fold(0.0, f64::max),
        krylov_iterations: diag.iter().map(|d| d.krylov_iterations).sum(),
        initial,
        totals: solver.totals(&end),
        snapshots,
        diagnostics,
        kinetic_energy,
    })
}
