//! Continuum limit of the slice model as a linear Langevin equation for the
//! spin quadratures,
//!
//! `d/dt (X, P) = C1 (X, P) + C2 (x_in, p_in) + C3 (F_1, F_2) + decay noise`,
//!
//! whose covariance obeys the Lyapunov equation
//! `dS/dt = C1 S + S C1^T + D` from `S(0) = I/2` over the unit pulse.
//!
//! [`assemble`] gives the triple-pass matrices in closed form.
//! [`continuum_limit`] derives drift and diffusion for an arbitrary
//! [`SchemeConfig`]; the two agree for three passes.

use nalgebra::{DMatrix, Matrix2, Matrix4, Vector2};
use serde::{Deserialize, Serialize};

use crate::discrete::{Controls, SchemeConfig};
use crate::params::{derive_coupling, PhysicalParams};
use crate::{Error, Result};

/// Agreement required between the two integrators.
pub const CROSS_CHECK_TOL: f64 = 1e-9;

/// How transmission accumulates over re-entries.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossModel {
    /// `t_k = (1 - zeta)^(k-1)`, consistent with the slice simulator.
    #[default]
    Compound,
    /// Linearized `t_3 = 1 - 2 zeta` with two independent loss ports
    /// feeding the third pass.
    Printed,
}

/// Drift and diffusion of the spin covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovModel {
    pub drift: Matrix2<f64>,
    pub diffusion: Matrix2<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripleInputs {
    pub alpha: f64,
    pub beta: f64,
    pub omega: f64,
    pub phi: f64,
    pub zeta: f64,
    pub eta_tilde: f64,
    pub kappa: f64,
}

/// Triple-pass Langevin coefficients in normalized units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftNoiseMatrices {
    pub c1: Matrix2<f64>,
    /// Coupling to the input light quadratures.
    pub c2: Matrix2<f64>,
    /// Coupling to the two collective loss-port noises.
    pub c3: Matrix2<f64>,
    /// Symmetrized spectral matrix of the loss-port noises.
    pub ncross: Matrix2<f64>,
    pub d: Matrix2<f64>,
    pub controls: TripleInputs,
}

impl DriftNoiseMatrices {
    pub fn model(&self) -> LyapunovModel {
        LyapunovModel {
            drift: self.c1,
            diffusion: self.d,
        }
    }
}

/// Closed-form triple-pass coefficients for the coupling derived from `p`
/// (beam angle and decay also taken from `p`).
pub fn assemble(p: &PhysicalParams, controls: Controls, zeta: f64, loss: LossModel) -> Result<DriftNoiseMatrices> {
    let kappa2 = derive_coupling(p, 3)?.kappa2;
    assemble_with(kappa2, p.eta_tilde, p.beam_angle, controls, zeta, loss)
}

/// Closed-form triple-pass coefficients.
///
/// With `t2 = 1 - zeta`, `t3` the transmission to the third pass,
/// `S+- = t2 sin(a) +- t3 sin(b)` and `C+- = t2 cos(a) +- t3 cos(b)`.
pub fn assemble_with(
    kappa2: f64,
    eta_tilde: f64,
    phi: f64,
    controls: Controls,
    zeta: f64,
    loss: LossModel,
) -> Result<DriftNoiseMatrices> {
    if !(kappa2 >= 0.0) {
        return Err(Error::invalid("kappa2", kappa2, "kappa2 >= 0"));
    }
    if !(0.0..1.0).contains(&eta_tilde) {
        return Err(Error::invalid("eta_tilde", eta_tilde, "0 <= eta_tilde < 1"));
    }
    let zeta_max = match loss {
        LossModel::Compound => 1.0,
        LossModel::Printed => 0.5,
    };
    if !(0.0..=zeta_max).contains(&zeta) {
        return Err(Error::invalid("zeta", zeta, "0 <= zeta <= 1 (1/2 for the linearized loss law)"));
    }
    let Controls { alpha, beta, omega } = controls;
    let k = kappa2.sqrt();
    let t2 = 1.0 - zeta;
    let t3 = match loss {
        LossModel::Compound => t2 * t2,
        LossModel::Printed => 1.0 - 2.0 * zeta,
    };
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let s_plus = t2 * sa + t3 * sb;
    let s_minus = t2 * sa - t3 * sb;
    let c_plus = t2 * ca + t3 * cb;
    let c_minus = t2 * ca - t3 * cb;
    let sab = (alpha - beta).sin();

    let c1 = -Matrix2::new(
        0.5 * eta_tilde - 0.5 * kappa2 * t3 * (2.0 * phi).sin() * sab,
        omega - cp * kappa2 * (s_minus - t3 * cp * sab),
        -omega + kappa2 * t3 * sp * sp * sab,
        0.5 * eta_tilde - sp * kappa2 * (s_plus + t3 * cp * sab),
    );
    let c2 = -k * Matrix2::new(-cp * s_minus, -1.0 + cp * c_minus, -sp * s_plus, sp * c_plus);

    // Port 1 enters before pass 2 and reaches pass 3 too; the second column
    // collects everything that reaches pass 3 only.
    let (w1, w2, rho) = match loss {
        LossModel::Compound => (
            (t2 * zeta).sqrt(),
            (t3 * zeta * (2.0 - zeta)).sqrt(),
            ((1.0 - zeta) / (2.0 - zeta)).sqrt(),
        ),
        LossModel::Printed => ((t2 * zeta).sqrt(), (t3 * 2.0 * zeta).sqrt(), 0.5f64.sqrt()),
    };
    let c3 = -k * Matrix2::new(cp * w1, -cp * w2, sp * w1, sp * w2);
    let off = 0.5 * rho * (alpha - beta).cos();
    let ncross = Matrix2::new(0.5, off, off, 0.5);

    let d = 0.5 * c2 * c2.transpose() + c3 * ncross * c3.transpose() + Matrix2::identity() * (0.5 * eta_tilde);
    Ok(DriftNoiseMatrices {
        c1,
        c2,
        c3,
        ncross,
        d: symmetrize(d),
        controls: TripleInputs {
            alpha,
            beta,
            omega,
            phi,
            zeta,
            eta_tilde,
            kappa: k,
        },
    })
}

/// Drift and diffusion of the `M -> infinity` limit of the slice simulator
/// for any pass geometry.
///
/// Segment light picks up spin information at pass `j` in direction `w_j`
/// and hands it to the spin at a later pass `k` along `u_k`, attenuated and
/// rotated on the way. Summing over ordered pass pairs gives the drift;
/// the input vacuum and each loss port give the diffusion.
pub fn continuum_limit(kappa2: f64, eta_tilde: f64, c: &SchemeConfig) -> Result<LyapunovModel> {
    c.validate()?;
    if !(kappa2 >= 0.0) {
        return Err(Error::invalid("kappa2", kappa2, "kappa2 >= 0"));
    }
    if !(0.0..1.0).contains(&eta_tilde) {
        return Err(Error::invalid("eta_tilde", eta_tilde, "0 <= eta_tilde < 1"));
    }
    let n = c.n_passes;
    let zeta = c.loss_per_crossing;
    let k = kappa2.sqrt();
    let t = c.transmissions();
    let a = c.cumulative_rotations();
    let g: Vec<f64> = t.iter().map(|tk| k * tk.sqrt()).collect();
    let u: Vec<Vector2<f64>> = c.pass_axes.iter().map(|th| Vector2::new(th.cos(), th.sin())).collect();
    let w: Vec<Vector2<f64>> = c.pass_axes.iter().map(|th| Vector2::new(-th.sin(), th.cos())).collect();

    let mut drift = Matrix2::new(-0.5 * eta_tilde, -c.larmor, c.larmor, -0.5 * eta_tilde);
    for kk in 0..n {
        for j in 0..kk {
            if t[j] == 0.0 {
                continue;
            }
            let amp = g[kk] * g[j] * (t[kk] / t[j]).sqrt() * (a[kk] - a[j]).sin();
            drift -= amp * u[kk] * w[j].transpose();
        }
    }

    // columns: input light (x, p), then one (x, p) pair per loss port
    let mut b = DMatrix::zeros(2, 2 * n);
    for kk in 0..n {
        let input = g[kk] * t[kk].sqrt();
        let (s, co) = a[kk].sin_cos();
        let mut col = b.columns_mut(0, 2);
        col += u[kk] * nalgebra::RowVector2::new(-s * input, co * input);
        for j in 1..=kk {
            if t[j] == 0.0 {
                continue;
            }
            let amp = g[kk] * (zeta * t[kk] / t[j]).sqrt();
            let (s, co) = (a[kk] - a[j]).sin_cos();
            let mut col = b.columns_mut(2 * j, 2);
            col += u[kk] * nalgebra::RowVector2::new(-s * amp, co * amp);
        }
    }
    let bbt = &b * b.transpose();
    let diffusion = Matrix2::new(bbt[(0, 0)], bbt[(0, 1)], bbt[(1, 0)], bbt[(1, 1)]) * 0.5
        + Matrix2::identity() * (0.5 * eta_tilde);
    Ok(LyapunovModel {
        drift,
        diffusion: symmetrize(diffusion),
    })
}

fn symmetrize(m: Matrix2<f64>) -> Matrix2<f64> {
    0.5 * (m + m.transpose())
}

/// `S(1)` from `S(0) = I/2` by the block matrix exponential
/// `exp([[-C1, D], [0, C1^T]])`.
pub fn propagate_covariance(m: &LyapunovModel) -> Result<Matrix2<f64>> {
    let mut block = Matrix4::zeros();
    block.fixed_view_mut::<2, 2>(0, 0).copy_from(&(-m.drift));
    block.fixed_view_mut::<2, 2>(0, 2).copy_from(&m.diffusion);
    block.fixed_view_mut::<2, 2>(2, 2).copy_from(&m.drift.transpose());
    let e = block.exp();
    let phi: Matrix2<f64> = e.fixed_view::<2, 2>(2, 2).transpose();
    let e12: Matrix2<f64> = e.fixed_view::<2, 2>(0, 2).into_owned();
    let sigma = symmetrize(phi * phi.transpose() * 0.5 + phi * e12);
    if sigma.iter().any(|x| !x.is_finite()) {
        return Err(Error::ModelViolation("non-finite covariance from matrix exponential".into()));
    }
    Ok(sigma)
}

/// `S(1)` by classical fourth-order Runge-Kutta with `steps` equal steps.
pub fn propagate_rk4(m: &LyapunovModel, steps: usize) -> Result<Matrix2<f64>> {
    if steps == 0 {
        return Err(Error::invalid("steps", 0.0, "steps >= 1"));
    }
    let f = |s: &Matrix2<f64>| m.drift * s + s * m.drift.transpose() + m.diffusion;
    let h = 1.0 / steps as f64;
    let mut s = Matrix2::identity() * 0.5;
    for _ in 0..steps {
        let k1 = f(&s);
        let k2 = f(&(s + k1 * (0.5 * h)));
        let k3 = f(&(s + k2 * (0.5 * h)));
        let k4 = f(&(s + k3 * h));
        s += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
    }
    Ok(symmetrize(s))
}

/// Propagate with both integrators and require agreement to
/// [`CROSS_CHECK_TOL`] relative to the largest entry. The Runge-Kutta step
/// count doubles until it settles.
pub fn cross_check(m: &LyapunovModel) -> Result<Matrix2<f64>> {
    let exact = propagate_covariance(m)?;
    let scale = exact.amax().max(1.0);
    let mut deviation = f64::INFINITY;
    let mut steps = 64;
    while steps <= 1 << 16 {
        deviation = (propagate_rk4(m, steps)? - exact).amax() / scale;
        if deviation < CROSS_CHECK_TOL {
            return Ok(exact);
        }
        steps *= 2;
    }
    Err(Error::Inconsistent {
        deviation,
        tolerance: CROSS_CHECK_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousOutput {
    pub cov: Matrix2<f64>,
    /// Output spin length relative to the input, `1 - eta_tilde`.
    pub mean_jx_ratio: f64,
}

/// Propagate the triple-pass model for `p` and return the final spin covariance.
pub fn run_triple(p: &PhysicalParams, controls: Controls, zeta: f64, loss: LossModel) -> Result<ContinuousOutput> {
    let m = assemble(p, controls, zeta, loss)?;
    Ok(ContinuousOutput {
        cov: propagate_covariance(&m.model())?,
        mean_jx_ratio: 1.0 - p.eta_tilde,
    })
}

/// Propagate the continuum limit of any scheme.
pub fn run_scheme(kappa2: f64, eta_tilde: f64, c: &SchemeConfig) -> Result<ContinuousOutput> {
    let m = continuum_limit(kappa2, eta_tilde, c)?;
    Ok(ContinuousOutput {
        cov: propagate_covariance(&m)?,
        mean_jx_ratio: 1.0 - eta_tilde,
    })
}
