//! Slice simulator for `N`-pass schemes.
//!
//! The pulse is cut into `M` segments. Each segment meets the spin `N` times
//! in a row (loop delays are taken as zero), with a waveplate rotation and a
//! re-entry loss before every pass after the first. After its last pass the
//! segment is traced out. Larmor precession and spin decay act between
//! segments, split symmetrically around the segment's passes.
//!
//! Each pass is a beam splitter of transmission `1 - zeta` followed by a
//! Faraday pass whose coupling is scaled by the square root of the
//! cumulative transmission, since the classical carrier that sets the
//! coupling is depleted by the same loss.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::gaussian::{GaussianState, Mode};
use crate::params::{derive_coupling, PhysicalParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    /// Two passes, no erasure.
    Dp,
    /// Triple pass without Larmor precession.
    Oat,
    /// Triple pass with Larmor precession.
    Tat,
    /// Ring of `N` passes with equal waveplate rotations.
    NPass,
}

/// Free controls of a triple-pass run: waveplate angles and Larmor rate.
///
/// `alpha` is the rotation before the second pass and `beta` the cumulative
/// rotation before the third, so the second waveplate turns by `beta - alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Controls {
    pub alpha: f64,
    pub beta: f64,
    pub omega: f64,
}

impl Controls {
    /// Erasing angles `(pi/3, 2pi/3)` with the Larmor rate that cancels the
    /// shear rotation.
    pub fn ideal_tat(kappa2: f64) -> Self {
        Controls {
            alpha: PI / 3.0,
            beta: 2.0 * PI / 3.0,
            omega: tat_larmor_rate(3, kappa2),
        }
    }

    pub fn ideal_oat() -> Self {
        Controls {
            alpha: PI / 3.0,
            beta: 2.0 * PI / 3.0,
            omega: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub n_passes: usize,
    /// Waveplate rotation applied before passes `2..=N`.
    pub rotation_angles: Vec<f64>,
    /// Spin axis `theta` probed by each pass; reversed propagation adds `pi`.
    pub pass_axes: Vec<f64>,
    /// Larmor rate `Omega` in radians per pulse duration.
    pub larmor: f64,
    /// Loss `zeta` before every re-entry.
    pub loss_per_crossing: f64,
    pub kind: SchemeKind,
}

impl SchemeConfig {
    /// Forward, backward, forward passes with the backward beam tilted by
    /// `phi`: axes `[0, pi + phi, 2pi - phi]`.
    pub fn triple_pass(controls: Controls, phi: f64, zeta: f64) -> Result<Self> {
        let kind = if controls.omega == 0.0 { SchemeKind::Oat } else { SchemeKind::Tat };
        let c = SchemeConfig {
            n_passes: 3,
            rotation_angles: vec![controls.alpha, controls.beta - controls.alpha],
            pass_axes: vec![0.0, PI + phi, 2.0 * PI - phi],
            larmor: controls.omega,
            loss_per_crossing: zeta,
            kind,
        };
        c.validate()?;
        Ok(c)
    }

    /// Forward and backward pass with a quarter-wave rotation in between.
    pub fn double_pass(zeta: f64) -> Result<Self> {
        let c = SchemeConfig {
            n_passes: 2,
            rotation_angles: vec![PI / 2.0],
            pass_axes: vec![0.0, PI],
            larmor: 0.0,
            loss_per_crossing: zeta,
            kind: SchemeKind::Dp,
        };
        c.validate()?;
        Ok(c)
    }

    /// `N` co-propagating passes through a ring with a rotation of `-2pi/N`
    /// between them. This sign makes the accumulated shear `+Lambda kappa^2`,
    /// the same sense as the triple pass, so `Omega > 0` converts it to
    /// two-axis twisting.
    pub fn ring(n_passes: usize, zeta: f64, omega: f64) -> Result<Self> {
        if n_passes < 3 {
            return Err(Error::invalid("n_passes", n_passes as f64, "n_passes >= 3 for a ring"));
        }
        let c = SchemeConfig {
            n_passes,
            rotation_angles: vec![-2.0 * PI / n_passes as f64; n_passes - 1],
            pass_axes: vec![0.0; n_passes],
            larmor: omega,
            loss_per_crossing: zeta,
            kind: SchemeKind::NPass,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_passes;
        if n < 2 {
            return Err(Error::invalid("n_passes", n as f64, "n_passes >= 2"));
        }
        if self.rotation_angles.len() != n - 1 || self.pass_axes.len() != n {
            return Err(Error::InvalidOperation(format!(
                "{} passes need {} rotation angles and {} axes, got {} and {}",
                n,
                n - 1,
                n,
                self.rotation_angles.len(),
                self.pass_axes.len()
            )));
        }
        if let Some(&a) = self.rotation_angles.iter().chain(&self.pass_axes).find(|a| !a.is_finite()) {
            return Err(Error::invalid("angle", a, "finite"));
        }
        if !(0.0..=1.0).contains(&self.loss_per_crossing) {
            return Err(Error::invalid("zeta", self.loss_per_crossing, "0 <= zeta <= 1"));
        }
        if !self.larmor.is_finite() {
            return Err(Error::invalid("omega", self.larmor, "finite"));
        }
        match self.kind {
            SchemeKind::Tat if self.larmor <= 0.0 => Err(Error::invalid("omega", self.larmor, "omega > 0 for TAT")),
            SchemeKind::Oat | SchemeKind::Dp if self.larmor != 0.0 => {
                Err(Error::invalid("omega", self.larmor, "omega = 0 for OAT and DP"))
            }
            _ => Ok(()),
        }
    }

    /// Cumulative waveplate rotation before each pass (0 for the first).
    pub fn cumulative_rotations(&self) -> Vec<f64> {
        std::iter::once(0.0)
            .chain(self.rotation_angles.iter().scan(0.0, |acc, &a| {
                *acc += a;
                Some(*acc)
            }))
            .collect()
    }

    /// Light transmission reaching each pass.
    pub fn transmissions(&self) -> Vec<f64> {
        let t = 1.0 - self.loss_per_crossing;
        (0..self.n_passes).map(|k| t.powi(k as i32)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    /// Spin mode after all segments.
    pub spin_state: GaussianState,
    pub mean_jx_out: f64,
    /// Largest `|Cov(light, spin)|` entry of any segment as it leaves.
    pub light_spin_leak: f64,
}

/// Simulate a scheme with the coupling derived from `p`.
pub fn simulate(p: &PhysicalParams, c: &SchemeConfig, m_segments: usize) -> Result<SimOutput> {
    let coupling = derive_coupling(p, c.n_passes)?;
    let mut out = simulate_with(coupling.kappa2, p.eta_tilde, c, m_segments)?;
    out.mean_jx_out = coupling.mean_jx_in * (1.0 - p.eta_tilde);
    Ok(out)
}

/// Simulate with an explicit pulse coupling `kappa^2` and decay `eta_tilde`.
/// `mean_jx_out` is reported relative to an input length of 1.
pub fn simulate_with(kappa2: f64, eta_tilde: f64, c: &SchemeConfig, m_segments: usize) -> Result<SimOutput> {
    c.validate()?;
    if m_segments == 0 {
        return Err(Error::invalid("segments", 0.0, "segments >= 1"));
    }
    if !(kappa2 >= 0.0) {
        return Err(Error::invalid("kappa2", kappa2, "kappa2 >= 0"));
    }
    if !(0.0..1.0).contains(&eta_tilde) {
        return Err(Error::invalid("eta_tilde", eta_tilde, "0 <= eta_tilde < 1"));
    }
    let dt = 1.0 / m_segments as f64;
    let kappa_seg = (kappa2 * dt).sqrt();
    let gains: Vec<f64> = c.transmissions().iter().map(|t| kappa_seg * t.sqrt()).collect();
    let light = Mode::Light(0);

    let half_step = |s: GaussianState| -> Result<GaussianState> {
        let s = s.quadrature_rotation(Mode::Spin, -0.5 * c.larmor * dt)?;
        if eta_tilde > 0.0 {
            s.spin_decay_step(eta_tilde, 0.5 * dt)
        } else {
            Ok(s)
        }
    };

    let mut spin = GaussianState::coherent_spin();
    let mut leak = 0.0f64;
    for _ in 0..m_segments {
        let mut s = half_step(spin)?.with_vacuum(light)?;
        s = s.faraday_pass(Mode::Spin, light, gains[0], c.pass_axes[0])?;
        for ((&g, &axis), &rot) in gains[1..].iter().zip(&c.pass_axes[1..]).zip(&c.rotation_angles) {
            s = s
                .quadrature_rotation(light, rot)?
                .loss_channel(light, c.loss_per_crossing)?
                .faraday_pass(Mode::Spin, light, g, axis)?;
        }
        leak = leak.max(s.cross(Mode::Spin, light)?.amax());
        spin = half_step(s.partial_trace(light)?)?;
        spin.check_physical()?;
    }
    Ok(SimOutput {
        spin_state: spin,
        mean_jx_out: 1.0 - eta_tilde,
        light_spin_leak: leak,
    })
}

/// Double `M` from `m_start` until no spin covariance entry changes by more
/// than `rel_tol` relative to the largest entry. Returns the result and the
/// `M` that produced it.
pub fn simulate_converged(
    kappa2: f64,
    eta_tilde: f64,
    c: &SchemeConfig,
    m_start: usize,
    m_max: usize,
    rel_tol: f64,
) -> Result<(SimOutput, usize)> {
    let mut m = m_start.max(1);
    let mut prev = simulate_with(kappa2, eta_tilde, c, m)?;
    let mut doublings = 0;
    while 2 * m <= m_max {
        m *= 2;
        doublings += 1;
        let next = simulate_with(kappa2, eta_tilde, c, m)?;
        let a: Matrix2<f64> = prev.spin_state.spin_cov();
        let b: Matrix2<f64> = next.spin_state.spin_cov();
        if (b - a).amax() <= rel_tol * b.amax() {
            return Ok((next, m));
        }
        prev = next;
    }
    Err(Error::NotConverged {
        iterations: doublings,
        best: prev.spin_state.spin_cov().symmetric_eigenvalues().min(),
    })
}

/// Accumulated shear coefficient of an `N`-pass ring,
/// `sum_{n=1}^{N-1} (N - n) sin(2 pi n / N)`. Equals `(N/2) cot(pi/N)`.
pub fn lambda_coefficient(n_passes: usize) -> f64 {
    let n = n_passes as f64;
    (1..n_passes)
        .map(|k| (n - k as f64) * (2.0 * PI * k as f64 / n).sin())
        .sum()
}

/// Larmor rate that turns the `N`-pass shear into two-axis twisting.
pub fn tat_larmor_rate(n_passes: usize, kappa2: f64) -> f64 {
    0.5 * lambda_coefficient(n_passes) * kappa2
}
