//! Run configuration: a TOML file layered with environment and
//! command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use wbmhd_core::explicit::Order;
use wbmhd_core::imex::SolverConfig;
use wbmhd_core::krylov::KrylovSettings;
use wbmhd_core::problems::{by_name, ProblemSpec};
use wbmhd_core::Eos;

/// Environment variable that overrides the output directory of the file.
pub const OUT_DIR_ENV: &str = "WBMHD_OUT_DIR";

/// One layer of settings. Every key is optional so that layers can be
/// merged; unknown keys are rejected when parsing a file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub problem: Option<String>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub cfl: Option<f64>,
    pub order: Option<u8>,
    pub wb: Option<bool>,
    pub tolerance: Option<f64>,
    pub restart: Option<usize>,
    pub max_iterations: Option<usize>,
    pub t_end: Option<f64>,
    pub dt_max: Option<f64>,
    pub out: Option<PathBuf>,
    /// Write a snapshot every this many steps (initial and final always).
    pub snapshot_every: Option<usize>,
    pub mu: Option<f64>,
    pub eta: Option<f64>,
    pub mach_max: Option<f64>,
}

macro_rules! merge_fields {
    ($base:ident, $over:ident; $($f:ident),*) => {
        ConfigLayer { $($f: $over.$f.or($base.$f)),* }
    };
}

impl ConfigLayer {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).context("malformed configuration")
    }

    /// Values set in `over` win.
    pub fn merge(self, over: ConfigLayer) -> ConfigLayer {
        let base = self;
        merge_fields!(base, over; problem, nx, ny, cfl, order, wb, tolerance, restart,
            max_iterations, t_end, dt_max, out, snapshot_every, mu, eta, mach_max)
    }
}

/// Validated settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: String,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub cfl: f64,
    pub order: Order,
    pub wb: bool,
    pub krylov: KrylovSettings,
    pub t_end: Option<f64>,
    pub dt_max: Option<f64>,
    pub out: PathBuf,
    pub snapshot_every: Option<usize>,
    pub mu: Option<f64>,
    pub eta: Option<f64>,
    pub mach_max: Option<f64>,
}

impl RunConfig {
    pub fn from_layer(layer: ConfigLayer) -> Result<Self> {
        let Some(problem) = layer.problem else { bail!("configuration has no `problem`") };
        let cfl = layer.cfl.unwrap_or(0.9);
        if !(cfl > 0.0 && cfl <= 1.0) {
            bail!("cfl must lie in (0, 1], got {cfl}");
        }
        let order = match layer.order.unwrap_or(2) {
            1 => Order::First,
            2 => Order::Second,
            o => bail!("order must be 1 or 2, got {o}"),
        };
        let mut krylov = KrylovSettings::default();
        if let Some(t) = layer.tolerance {
            if !(t > 0.0 && t < 1.0) {
                bail!("tolerance must lie in (0, 1), got {t}");
            }
            krylov.tolerance = t;
        }
        if let Some(r) = layer.restart {
            if r == 0 {
                bail!("restart must be positive");
            }
            krylov.restart = r;
        }
        if let Some(m) = layer.max_iterations {
            krylov.max_iterations = m;
        }
        for (name, v) in [("nx", layer.nx), ("ny", layer.ny)] {
            if v == Some(0) {
                bail!("{name} must be positive");
            }
        }
        for (name, v) in [("t_end", layer.t_end), ("dt_max", layer.dt_max), ("mu", layer.mu)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    bail!("{name} must be positive, got {v}");
                }
            }
        }
        if layer.snapshot_every == Some(0) {
            bail!("snapshot_every must be positive");
        }
        Ok(Self {
            problem,
            nx: layer.nx,
            ny: layer.ny,
            cfl,
            order,
            wb: layer.wb.unwrap_or(true),
            krylov,
            t_end: layer.t_end,
            dt_max: layer.dt_max,
            out: layer.out.unwrap_or_else(|| PathBuf::from("output")),
            snapshot_every: layer.snapshot_every,
            mu: layer.mu,
            eta: layer.eta,
            mach_max: layer.mach_max,
        })
    }

    /// Parses file text and applies `flags` on top.
    pub fn parse(text: &str, flags: ConfigLayer) -> Result<Self> {
        Self::from_layer(ConfigLayer::from_toml(text)?.merge(flags))
    }

    /// Reads a configuration file. Precedence, lowest first: file,
    /// [`OUT_DIR_ENV`], `flags`.
    pub fn load(path: &Path, flags: ConfigLayer) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let env = ConfigLayer { out: std::env::var_os(OUT_DIR_ENV).map(PathBuf::from), ..Default::default() };
        Self::from_layer(ConfigLayer::from_toml(&text)?.merge(env).merge(flags))
    }

    /// The named problem with every override applied. Non-trivial equilibria
    /// are checked before they are returned.
    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        let mut spec = by_name(&self.problem, self.eta, self.mach_max)?;
        if !self.wb {
            spec = spec.without_well_balancing();
        }
        if let Some(nx) = self.nx {
            spec.cells[0] = nx;
        }
        if spec.dim >= 2 {
            if let Some(ny) = self.ny.or(self.nx) {
                spec.cells[1] = ny;
            }
        }
        if let Some(t) = self.t_end {
            spec.t_end = t;
        }
        if let Some(d) = self.dt_max {
            spec.dt_max = d;
        }
        if let Some(mu) = self.mu {
            spec.eos = Eos::new(spec.eos.gamma, mu)?;
        }
        spec.check_equilibrium()?;
        Ok(spec)
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig { cfl: self.cfl, order: self.order, krylov: self.krylov, ..SolverConfig::default() }
    }
}
