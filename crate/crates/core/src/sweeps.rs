//! Control optimization and figure tables.
//!
//! A point is fixed by optical depth, loss, beam angle and scheme. Its free
//! controls are the decay `eta_tilde` (equivalently the photon number) and,
//! for the triple pass with precession, the waveplate angles and Larmor
//! rate. `eta_tilde` is searched on a log grid followed by golden-section
//! refinement; the inner controls by coordinate cycling around their ideal
//! values. Points that cannot be evaluated count as `+inf`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::continuous::{assemble_with, continuum_limit, propagate_covariance, LossModel};
use crate::discrete::{simulate_converged, simulate_with, tat_larmor_rate, Controls, SchemeConfig};
use crate::metrics::{xi_squared, SqueezingResult};
use crate::optimize::{coordinate_descent, grid_then_golden, linspace, logspace, Window};
use crate::params::{derive_coupling_with, CouplingConvention, PhysicalParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Dp,
    Oat,
    Tat,
    /// Ring of `N` passes with the Larmor rate matched to its shear.
    Ring(usize),
}

impl Scheme {
    pub fn n_passes(self) -> usize {
        match self {
            Scheme::Dp => 2,
            Scheme::Oat | Scheme::Tat => 3,
            Scheme::Ring(n) => n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Continuous,
    /// Slice simulator with a fixed segment count, or doubling from
    /// [`AUTO_M_START`] until converged when `None`.
    Discrete(Option<usize>),
}

pub const AUTO_M_START: usize = 250;
pub const AUTO_M_MAX: usize = 64_000;
pub const AUTO_M_TOL: f64 = 1e-4;

/// Everything that stays fixed while a point is optimized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSpec {
    pub alpha0: f64,
    pub zeta: f64,
    pub phi: f64,
    pub scheme: Scheme,
    pub model: Model,
    pub loss: LossModel,
    pub convention: CouplingConvention,
}

impl PointSpec {
    pub fn new(scheme: Scheme, alpha0: f64, zeta: f64, phi: f64) -> Self {
        PointSpec {
            alpha0,
            zeta,
            phi,
            scheme,
            model: Model::Continuous,
            loss: LossModel::Compound,
            convention: CouplingConvention::Calibrated,
        }
    }

    pub fn params(&self, eta_tilde: f64) -> PhysicalParams {
        PhysicalParams {
            optical_depth: self.alpha0,
            eta_tilde,
            beam_angle: self.phi,
            ..PhysicalParams::default()
        }
    }

    pub fn kappa2(&self, eta_tilde: f64) -> Result<f64> {
        Ok(derive_coupling_with(&self.params(eta_tilde), self.scheme.n_passes(), self.convention)?.kappa2)
    }

    /// Controls the scheme uses before any optimization.
    pub fn default_controls(&self, kappa2: f64) -> Controls {
        match self.scheme {
            Scheme::Dp => Controls {
                alpha: PI / 2.0,
                beta: PI / 2.0,
                omega: 0.0,
            },
            Scheme::Oat => Controls::ideal_oat(),
            Scheme::Tat => Controls::ideal_tat(kappa2),
            Scheme::Ring(n) => Controls {
                alpha: -2.0 * PI / n as f64,
                beta: -4.0 * PI / n as f64,
                omega: tat_larmor_rate(n, kappa2),
            },
        }
    }

    fn config(&self, controls: Controls) -> Result<SchemeConfig> {
        match self.scheme {
            Scheme::Dp => SchemeConfig::double_pass(self.zeta),
            Scheme::Oat => SchemeConfig::triple_pass(Controls { omega: 0.0, ..controls }, self.phi, self.zeta),
            Scheme::Tat => SchemeConfig::triple_pass(controls, self.phi, self.zeta),
            Scheme::Ring(n) => SchemeConfig::ring(n, self.zeta, controls.omega),
        }
    }
}

/// Squeezing of one fully specified point.
pub fn evaluate(spec: &PointSpec, eta_tilde: f64, controls: Controls) -> Result<SqueezingResult> {
    let kappa2 = spec.kappa2(eta_tilde)?;
    let config = spec.config(controls)?;
    let cov: Matrix2<f64> = match spec.model {
        Model::Continuous if spec.scheme == Scheme::Tat || spec.scheme == Scheme::Oat => {
            let c = Controls {
                omega: config.larmor,
                ..controls
            };
            propagate_covariance(&assemble_with(kappa2, eta_tilde, spec.phi, c, spec.zeta, spec.loss)?.model())?
        }
        Model::Continuous => propagate_covariance(&continuum_limit(kappa2, eta_tilde, &config)?)?,
        Model::Discrete(Some(m)) => simulate_with(kappa2, eta_tilde, &config, m)?.spin_state.spin_cov(),
        Model::Discrete(None) => {
            simulate_converged(kappa2, eta_tilde, &config, AUTO_M_START, AUTO_M_MAX, AUTO_M_TOL)?
                .0
                .spin_state
                .spin_cov()
        }
    };
    xi_squared(&cov, 1.0 - eta_tilde, 1.0)
}

/// Search grids and tolerances. The defaults are what the figure tables use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSettings {
    pub eta_lo: f64,
    pub eta_hi: f64,
    pub eta_grid: usize,
    pub eta_tol: f64,
    /// Half-width of the waveplate-angle windows around `pi/3`.
    pub angle_halfwidth: f64,
    /// Larmor window as a fraction of the matched rate, `[1 - w, 1 + w]`.
    pub omega_halfwidth: f64,
    pub control_grid: usize,
    pub control_tol: f64,
    /// Stop cycling once a full cycle changes `xi^2` by less than this.
    pub ftol: f64,
    pub max_cycles: usize,
}

impl Default for SearchSettings {
    fn default() -> Self {
        SearchSettings {
            eta_lo: 0.01,
            eta_hi: 0.6,
            eta_grid: 24,
            eta_tol: 1e-5,
            angle_halfwidth: 0.4,
            omega_halfwidth: 0.8,
            control_grid: 7,
            control_tol: 1e-6,
            ftol: 1e-6,
            max_cycles: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizedPoint {
    pub eta_tilde: f64,
    pub kappa2: f64,
    pub controls: Controls,
    pub result: SqueezingResult,
}

fn objective(r: Result<SqueezingResult>) -> f64 {
    r.map(|r| r.xi2).unwrap_or(f64::INFINITY)
}

/// Best controls at fixed `eta_tilde`. Only the precessing triple pass has
/// free inner controls: `alpha`, the second waveplate angle `beta - alpha`,
/// and `Omega` relative to the matched rate.
pub fn optimize_controls(spec: &PointSpec, eta_tilde: f64, s: &SearchSettings) -> Result<OptimizedPoint> {
    let kappa2 = spec.kappa2(eta_tilde)?;
    let start = spec.default_controls(kappa2);
    let controls = if spec.scheme == Scheme::Tat {
        let omega0 = start.omega;
        let unpack = |x: &[f64]| Controls {
            alpha: x[0],
            beta: x[0] + x[1],
            omega: x[2] * omega0,
        };
        let angle = Window {
            lo: PI / 3.0 - s.angle_halfwidth,
            hi: PI / 3.0 + s.angle_halfwidth,
            grid_points: s.control_grid,
            tol: s.control_tol,
        };
        let ratio = Window {
            lo: 1.0 - s.omega_halfwidth,
            hi: 1.0 + s.omega_halfwidth,
            ..angle
        };
        let best = coordinate_descent(
            |x| objective(evaluate(spec, eta_tilde, unpack(x))),
            &[PI / 3.0, PI / 3.0, 1.0],
            &[angle, angle, ratio],
            s.ftol,
            s.max_cycles,
        )?;
        unpack(&best.x)
    } else {
        start
    };
    let result = evaluate(spec, eta_tilde, controls)?;
    Ok(OptimizedPoint {
        eta_tilde,
        kappa2,
        controls,
        result,
    })
}

/// Best point over `eta_tilde` and the inner controls.
pub fn optimize_point(spec: &PointSpec, s: &SearchSettings) -> Result<OptimizedPoint> {
    let grid = logspace(s.eta_lo, s.eta_hi, s.eta_grid);
    let inner = |eta: f64| match optimize_controls(spec, eta, s) {
        Ok(p) => p.result.xi2,
        Err(Error::NotConverged { best, .. }) => best,
        Err(_) => f64::INFINITY,
    };
    let best = grid_then_golden(inner, &grid, s.eta_tol);
    if !best.f.is_finite() {
        return Err(Error::ModelViolation(format!(
            "no evaluable point for eta_tilde in [{}, {}]",
            s.eta_lo, s.eta_hi
        )));
    }
    optimize_controls(spec, best.x, s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub x: f64,
    pub controls: BTreeMap<String, f64>,
    pub xi2: f64,
    pub db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub fixed: BTreeMap<String, f64>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub name: String,
    pub independent: String,
    pub grid: Vec<f64>,
    pub series: Vec<Series>,
}

impl SweepTable {
    pub fn series(&self, label: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.label == label)
    }
}

impl Series {
    pub fn db(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.db).collect()
    }

    pub fn xi2(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.xi2).collect()
    }
}

fn row(x: f64, p: &OptimizedPoint, with_eta: bool) -> Row {
    let mut controls = BTreeMap::new();
    if with_eta {
        controls.insert("eta".to_string(), p.eta_tilde);
    }
    controls.insert("alpha".to_string(), p.controls.alpha);
    controls.insert("beta".to_string(), p.controls.beta);
    controls.insert("omega".to_string(), p.controls.omega);
    Row {
        x,
        controls,
        xi2: p.result.xi2,
        db: p.result.xi2_db,
    }
}

fn fixed(spec: &PointSpec) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    m.insert("alpha0".to_string(), spec.alpha0);
    m.insert("zeta".to_string(), spec.zeta);
    m.insert("phi".to_string(), spec.phi);
    m.insert("n_passes".to_string(), spec.scheme.n_passes() as f64);
    m
}

/// What a sweep varies at each grid point.
#[derive(Debug, Clone, Copy)]
enum Axis {
    /// `eta_tilde` fixed to the grid value, inner controls optimized.
    Eta,
    /// optical depth
    Alpha0,
    /// number of ring passes
    Passes,
}

/// Evaluate every (series, grid point) job in parallel and assemble rows
/// by index.
fn sweep(
    name: &str,
    independent: &str,
    axis: Axis,
    grid: &[f64],
    specs: &[(String, PointSpec)],
    s: &SearchSettings,
) -> Result<SweepTable> {
    let jobs: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|i| (0..grid.len()).map(move |j| (i, j)))
        .collect();
    let points: Vec<Result<OptimizedPoint>> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let mut spec = specs[i].1;
            let x = grid[j];
            match axis {
                Axis::Eta => optimize_controls(&spec, x, s),
                Axis::Alpha0 => {
                    spec.alpha0 = x;
                    optimize_point(&spec, s)
                }
                Axis::Passes => {
                    spec.scheme = Scheme::Ring(x as usize);
                    optimize_point(&spec, s)
                }
            }
        })
        .collect();
    let mut points = points.into_iter();
    let mut series = Vec::with_capacity(specs.len());
    for (label, spec) in specs {
        let mut rows = Vec::with_capacity(grid.len());
        let mut fixed = fixed(spec);
        match axis {
            Axis::Eta => {}
            Axis::Alpha0 => {
                fixed.remove("alpha0");
            }
            Axis::Passes => {
                fixed.remove("n_passes");
            }
        }
        for &x in grid {
            let p = points.next().expect("one result per job")?;
            rows.push(row(x, &p, !matches!(axis, Axis::Eta)));
        }
        series.push(Series {
            label: label.clone(),
            fixed,
            rows,
        });
    }
    Ok(SweepTable {
        name: name.to_string(),
        independent: independent.to_string(),
        grid: grid.to_vec(),
        series,
    })
}

fn label_zeta(prefix: &str, zeta: f64) -> String {
    format!("{prefix}_z{zeta}")
}

pub const FIG3_LOSSES: [f64; 3] = [0.0, 0.02, 0.06];
pub const FIG4_LOSSES: [f64; 3] = [0.0, 0.005, 0.01];

/// Optimal squeezing against `eta_tilde` (photon number) at `alpha0 = 50`,
/// `phi = 0.05`, one series per loss.
pub fn figure3a(model: Model, s: &SearchSettings) -> Result<SweepTable> {
    let grid: Vec<f64> = (1..=30).map(|i| 0.02 * i as f64).collect();
    let specs: Vec<(String, PointSpec)> = FIG3_LOSSES
        .iter()
        .map(|&z| {
            let mut spec = PointSpec::new(Scheme::Tat, 50.0, z, 0.05);
            spec.model = model;
            (label_zeta("tat", z), spec)
        })
        .collect();
    sweep("fig3a", "eta", Axis::Eta, &grid, &specs, s)
}

pub fn figure3b_grid() -> Vec<f64> {
    logspace(10.0, 500.0, 12)
}

/// Peak squeezing against optical depth. Besides the lossy series at
/// `phi = 0.05` there is a lossless `phi = 0` reference and, with only spin
/// decay, the double pass, the triple pass without precession and the
/// triple pass with precession, each at its own optimal `eta_tilde`.
pub fn figure3b(model: Model, s: &SearchSettings) -> Result<SweepTable> {
    let mut specs: Vec<(String, PointSpec)> = FIG3_LOSSES
        .iter()
        .map(|&z| (label_zeta("tat", z), PointSpec::new(Scheme::Tat, 50.0, z, 0.05)))
        .collect();
    specs.push(("tat_ideal".into(), PointSpec::new(Scheme::Tat, 50.0, 0.0, 0.0)));
    specs.push(("oat_ideal".into(), PointSpec::new(Scheme::Oat, 50.0, 0.0, 0.0)));
    specs.push(("dp_ideal".into(), PointSpec::new(Scheme::Dp, 50.0, 0.0, 0.0)));
    for (_, spec) in &mut specs {
        spec.model = model;
    }
    sweep("fig3b", "alpha0", Axis::Alpha0, &figure3b_grid(), &specs, s)
}

pub fn figure4b_grid() -> Vec<f64> {
    logspace(10.0, 500.0, 12)
}

/// Ring schemes with `N = 3, 4, 7` against optical depth, lossless, `phi = 0`.
pub fn figure4b(model: Model, s: &SearchSettings) -> Result<SweepTable> {
    let specs: Vec<(String, PointSpec)> = [3usize, 4, 7]
        .iter()
        .map(|&n| {
            let mut spec = PointSpec::new(Scheme::Ring(n), 50.0, 0.0, 0.0);
            spec.model = model;
            (format!("ring_n{n}"), spec)
        })
        .collect();
    sweep("fig4b", "alpha0", Axis::Alpha0, &figure4b_grid(), &specs, s)
}

pub fn figure4c_grid() -> Vec<f64> {
    linspace(3.0, 40.0, 38)
}

/// Ring schemes at `alpha0 = 50` against the number of passes, one series
/// per re-entry loss.
pub fn figure4c(model: Model, s: &SearchSettings) -> Result<SweepTable> {
    let specs: Vec<(String, PointSpec)> = FIG4_LOSSES
        .iter()
        .map(|&z| {
            let mut spec = PointSpec::new(Scheme::Ring(3), 50.0, z, 0.0);
            spec.model = model;
            (label_zeta("ring", z), spec)
        })
        .collect();
    sweep("fig4c", "n_passes", Axis::Passes, &figure4c_grid(), &specs, s)
}
