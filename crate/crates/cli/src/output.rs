//! CSV writers, plus a reader for snapshots.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use wbmhd_core::imex::StepRecord;
use wbmhd_core::physics::wave_speeds;
use wbmhd_core::state::{cons_to_prim, PrimitiveState};
use wbmhd_core::{Eos, FieldSet};

pub const SNAPSHOT_COLUMNS: [&str; 12] = ["x", "y", "z", "rho", "u", "v", "w", "p", "Bx", "By", "Bz", "mach"];

pub const DIAGNOSTICS_COLUMNS: [&str; 8] =
    ["t", "dt", "max_div_b", "krylov_iterations", "krylov_residual", "mass", "energy", "kinetic_energy"];

pub const KINETIC_ENERGY_COLUMNS: [&str; 3] = ["t", "E_kin", "E_kin/E_kin0"];

/// 17 significant digits, enough to restore every `f64` exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse().with_context(|| format!("not a number: `{s}`"))
}

/// One cell of a snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotRow {
    pub x: [f64; 3],
    pub prim: PrimitiveState,
    pub mach: f64,
}

/// A snapshot read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub dim: usize,
    pub cells: [usize; 3],
    pub bounds: [(f64, f64); 3],
    pub t: f64,
    pub eos: Eos,
    pub rows: Vec<SnapshotRow>,
}

/// Local Mach number `|v| / c`; NaN for an inadmissible state.
pub fn local_mach(prim: &PrimitiveState, eos: &Eos) -> f64 {
    let q = wbmhd_core::state::prim_to_cons(prim, eos);
    match wave_speeds(&q, 0, eos) {
        Ok(w) => prim.vel.iter().map(|v| v * v).sum::<f64>().sqrt() / w.c,
        Err(_) => f64::NAN,
    }
}

/// Writes the interior of a physical (not deviation) field. Rows run with
/// x fastest.
pub fn write_snapshot(q: &FieldSet, eos: &Eos, t: f64, path: &Path) -> Result<()> {
    let grid = q.grid();
    let mut out = create(path)?;
    let counts = grid.counts();
    writeln!(out, "# dim={}", grid.dim())?;
    writeln!(out, "# cells={} {} {}", counts[0], counts[1], counts[2])?;
    let b: Vec<String> = (0..3).flat_map(|a| [fmt_f64(grid.lo(a)), fmt_f64(grid.hi(a))]).collect();
    writeln!(out, "# bounds={}", b.join(" "))?;
    writeln!(out, "# t={}", fmt_f64(t))?;
    writeln!(out, "# gamma={}", fmt_f64(eos.gamma))?;
    writeln!(out, "# mu={}", fmt_f64(eos.mu))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SNAPSHOT_COLUMNS)?;
    for c in grid.interior() {
        let x = grid.cell_center(c);
        let s = q.get(c);
        let prim = cons_to_prim(&s, eos).unwrap_or(PrimitiveState {
            rho: s.rho(),
            vel: s.momentum().map(|m| m / s.rho()),
            p: s.pressure(eos),
            b: s.b(),
        });
        let mach = local_mach(&prim, eos);
        let row = [
            x[0], x[1], x[2], prim.rho, prim.vel[0], prim.vel[1], prim.vel[2], prim.p, prim.b[0], prim.b[1],
            prim.b[2], mach,
        ];
        w.write_record(row.map(fmt_f64))?;
    }
    w.flush()?;
    Ok(())
}

fn header_value<'a>(headers: &'a [(String, String)], key: &str) -> Result<&'a str> {
    headers
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| anyhow!("snapshot header lacks `{key}`"))
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let headers: Vec<(String, String)> = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .filter_map(|l| l[1..].trim().split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect();
    let dim: usize = header_value(&headers, "dim")?.parse()?;
    let cells: Vec<usize> =
        header_value(&headers, "cells")?.split_whitespace().map(str::parse).collect::<Result<_, _>>()?;
    let b: Vec<f64> = header_value(&headers, "bounds")?.split_whitespace().map(parse_f64).collect::<Result<_>>()?;
    if cells.len() != 3 || b.len() != 6 {
        bail!("malformed snapshot header");
    }
    let t = parse_f64(header_value(&headers, "t")?)?;
    let eos = Eos::new(parse_f64(header_value(&headers, "gamma")?)?, parse_f64(header_value(&headers, "mu")?)?)?;

    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let cols: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if cols != SNAPSHOT_COLUMNS {
        bail!("unexpected snapshot columns {cols:?}");
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let v: Vec<f64> = rec.iter().map(parse_f64).collect::<Result<_>>()?;
        rows.push(SnapshotRow {
            x: [v[0], v[1], v[2]],
            prim: PrimitiveState { rho: v[3], vel: [v[4], v[5], v[6]], p: v[7], b: [v[8], v[9], v[10]] },
            mach: v[11],
        });
    }
    if rows.len() != cells.iter().product::<usize>() {
        bail!("snapshot has {} rows for {cells:?} cells", rows.len());
    }
    Ok(Snapshot {
        dim,
        cells: [cells[0], cells[1], cells[2]],
        bounds: [(b[0], b[1]), (b[2], b[3]), (b[4], b[5])],
        t,
        eos,
        rows,
    })
}

/// One row of the per-step diagnostics file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub dt: f64,
    pub max_div_b: f64,
    pub krylov_iterations: usize,
    pub krylov_residual: f64,
    pub mass: f64,
    pub energy: f64,
    pub kinetic_energy: f64,
}

impl From<&StepRecord> for DiagnosticsRecord {
    fn from(r: &StepRecord) -> Self {
        Self {
            t: r.t,
            dt: r.dt,
            max_div_b: r.max_div_b,
            krylov_iterations: r.krylov_iterations,
            krylov_residual: r.krylov_residual,
            mass: r.totals.mass,
            energy: r.totals.energy,
            kinetic_energy: r.totals.kinetic_energy,
        }
    }
}

pub fn write_diagnostics(rows: &[DiagnosticsRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(DIAGNOSTICS_COLUMNS)?;
    for r in rows {
        w.write_record([
            fmt_f64(r.t),
            fmt_f64(r.dt),
            fmt_f64(r.max_div_b),
            r.krylov_iterations.to_string(),
            fmt_f64(r.krylov_residual),
            fmt_f64(r.mass),
            fmt_f64(r.energy),
            fmt_f64(r.kinetic_energy),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Total kinetic energy `sum |m|^2 / (2 rho) * vol` over the interior of a
/// physical field.
pub fn kinetic_energy(q: &FieldSet) -> f64 {
    let g = q.grid();
    g.interior().map(|c| q.get(c).kinetic_energy()).sum::<f64>() * g.cell_volume()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KineticEnergySample {
    pub t: f64,
    pub e_kin: f64,
    /// `e_kin / e_kin(0)`; NaN when the initial energy is zero.
    pub ratio: f64,
}

/// Normalises `(t, E_kin)` samples by the first one.
pub fn kinetic_energy_series(samples: &[(f64, f64)]) -> Vec<KineticEnergySample> {
    let e0 = samples.first().map_or(0.0, |s| s.1);
    samples
        .iter()
        .map(|&(t, e)| KineticEnergySample { t, e_kin: e, ratio: if e0 != 0.0 { e / e0 } else { f64::NAN } })
        .collect()
}

pub fn write_kinetic_energy(series: &[KineticEnergySample], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(KINETIC_ENERGY_COLUMNS)?;
    for s in series {
        w.write_record([fmt_f64(s.t), fmt_f64(s.e_kin), fmt_f64(s.ratio)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use wbmhd_core::state::{prim_to_cons, ConservedState};
    use wbmhd_core::Grid;

    fn two_cells() -> (FieldSet, Eos) {
        let eos = Eos::default();
        let g = Grid::unit(1, 2, 2).unwrap();
        let q = FieldSet::from_fn(&g, |c| {
            let w = PrimitiveState {
                rho: 1.0 + 0.1 * c[0] as f64,
                vel: [0.3, -0.1 / 3.0, 0.0],
                p: 2.0 / 3.0,
                b: [0.0, 1e-7, 0.5],
            };
            prim_to_cons(&w, &eos)
        });
        (q, eos)
    }

    #[test]
    fn two_cell_snapshot_layout() {
        let (q, eos) = two_cells();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        write_snapshot(&q, &eos, 0.25, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data.len(), 3);
        assert_eq!(data[0], SNAPSHOT_COLUMNS.join(","));
        assert!(text.starts_with("# dim=1\n# cells=2 1 1\n"));
    }

    #[test]
    fn snapshot_roundtrip() {
        let (q, eos) = two_cells();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        write_snapshot(&q, &eos, 0.25, &path).unwrap();
        let s = read_snapshot(&path).unwrap();
        assert_eq!((s.dim, s.cells, s.t, s.eos), (1, [2, 1, 1], 0.25, eos));
        assert_eq!(s.bounds[0], (0.0, 1.0));
        for (row, c) in s.rows.iter().zip(q.grid().interior()) {
            let back = prim_to_cons(&row.prim, &s.eos);
            let orig = q.get(c);
            for v in 0..8 {
                assert!((back[v] - orig[v]).abs() <= 1e-15 * orig[v].abs().max(1.0), "{v}");
            }
            assert_eq!(row.x, q.grid().cell_center(c));
        }
    }

    #[test]
    fn x_runs_fastest() {
        let eos = Eos::default();
        let g = Grid::unit(2, 3, 2).unwrap();
        let q = FieldSet::filled(&g, ConservedState::new(1.0, [0.0; 3], 2.5, [0.0; 3]));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        write_snapshot(&q, &eos, 0.0, &path).unwrap();
        let s = read_snapshot(&path).unwrap();
        assert_eq!(s.rows.len(), 9);
        assert!(s.rows[0].x[0] < s.rows[1].x[0]);
        assert_eq!(s.rows[0].x[1], s.rows[1].x[1]);
        assert!(s.rows[3].x[1] > s.rows[2].x[1]);
    }

    #[test]
    fn mach_column() {
        let (q, eos) = two_cells();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        write_snapshot(&q, &eos, 0.0, &path).unwrap();
        for (row, c) in read_snapshot(&path).unwrap().rows.iter().zip(q.grid().interior()) {
            let c_s = wave_speeds(&q.get(c), 0, &eos).unwrap().c;
            let speed = row.prim.vel.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((row.mach - speed / c_s).abs() < 1e-14);
        }
    }

    #[test]
    fn unwritable_path() {
        let (q, eos) = two_cells();
        assert!(write_snapshot(&q, &eos, 0.0, Path::new("/nonexistent-dir/x/s.csv")).is_err());
    }

    #[test]
    fn kinetic_energy_single_cell() {
        let g = Grid::unit(1, 1, 1).unwrap();
        let q = FieldSet::filled(&g, ConservedState::new(2.0, [6.0, 0.0, 0.0], 20.0, [0.0; 3]));
        assert_eq!(kinetic_energy(&q), 9.0);
        let still = FieldSet::filled(&g, ConservedState::new(2.0, [0.0; 3], 20.0, [0.0; 3]));
        assert_eq!(kinetic_energy(&still), 0.0);
    }

    #[test]
    fn series_normalisation() {
        let s = kinetic_energy_series(&[(0.0, 4.0), (0.5, 3.0), (1.0, 2.0)]);
        assert_eq!(s[0].ratio, 1.0);
        assert_eq!(s[2].ratio, 0.5);
        let z = kinetic_energy_series(&[(0.0, 0.0), (1.0, 0.0)]);
        assert!(z.iter().all(|s| s.e_kin == 0.0));
    }

    #[test]
    fn diagnostics_file() {
        let rows = [
            DiagnosticsRecord { t: 0.1, dt: 0.1, max_div_b: 0.0, krylov_iterations: 3, krylov_residual: 1e-13, mass: 1.0, energy: 2.5, kinetic_energy: 0.0 },
            DiagnosticsRecord { t: 0.2, dt: 0.1, max_div_b: 0.0, krylov_iterations: 4, krylov_residual: 1e-13, mass: 1.0, energy: 2.5, kinetic_energy: 0.0 },
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        write_diagnostics(&rows, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], DIAGNOSTICS_COLUMNS.join(","));
        assert_eq!(lines.len(), 3);
        assert!(lines[1].split(',').nth(3) == Some("3"));
    }
}
