//! Physical inputs and the dimensionless couplings derived from them.
//!
//! Pulse time is normalized to `T = 1` everywhere in the dynamics; the
//! physical duration only enters [`tat_magnetic_field`].

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::{Error, Result};

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Bohr magneton, J/T.
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Atom number `N_at`.
    pub n_atoms: f64,
    /// Resonant optical depth `alpha_0`.
    pub optical_depth: f64,
    /// Total spin-decay probability per pulse, summed over all passes.
    pub eta_tilde: f64,
    /// Reflectivity `r_0` of one cell window.
    pub wall_reflectivity: f64,
    /// Angle `phi` between counter-propagating passes, radians.
    pub beam_angle: f64,
    /// Pulse duration `T` in seconds.
    pub pulse_duration: f64,
    pub detuning_ratio: Option<f64>,
    pub linewidth: Option<f64>,
    pub cross_section: Option<f64>,
    pub beam_area: Option<f64>,
}

impl Default for PhysicalParams {
    /// Warm-vapor operating point: 2e12 atoms, `alpha_0 = 50`, 5 ms pulse.
    fn default() -> Self {
        PhysicalParams {
            n_atoms: 2.0e12,
            optical_depth: 50.0,
            eta_tilde: 0.26,
            wall_reflectivity: 0.0,
            beam_angle: 0.0,
            pulse_duration: 5.0e-3,
            detuning_ratio: None,
            linewidth: None,
            cross_section: None,
            beam_area: None,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.n_atoms > 0.0) {
            return Err(Error::invalid("n_atoms", self.n_atoms, "n_atoms > 0"));
        }
        if !(self.optical_depth > 0.0) {
            return Err(Error::invalid("alpha0", self.optical_depth, "alpha0 > 0"));
        }
        if !(0.0..1.0).contains(&self.eta_tilde) {
            return Err(Error::invalid("eta", self.eta_tilde, "0 <= eta < 1"));
        }
        if !(0.0..0.5).contains(&self.wall_reflectivity) {
            return Err(Error::invalid("r0", self.wall_reflectivity, "0 <= r0 < 0.5"));
        }
        if !(0.0..FRAC_PI_2).contains(&self.beam_angle) {
            return Err(Error::invalid("phi", self.beam_angle, "0 <= phi < pi/2"));
        }
        if !(self.pulse_duration > 0.0) {
            return Err(Error::invalid("pulse_duration", self.pulse_duration, "T > 0"));
        }
        Ok(())
    }

    /// Mean spin length `<J_x> = N_at / 2` of the input coherent spin state.
    pub fn mean_jx(&self) -> f64 {
        self.n_atoms / 2.0
    }

    /// Per-pass decay parameter `eta = eta_tilde / N`.
    pub fn eta_per_pass(&self, n_passes: usize) -> f64 {
        self.eta_tilde / n_passes as f64
    }
}

/// How `kappa^2` is obtained from `eta` and `alpha_0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingConvention {
    /// `kappa^2 = eta * alpha_0` with `eta = eta_tilde / N`. Reproduces the
    /// quoted `kappa = 2.08` at `eta_tilde = 0.26`, `alpha_0 = 50`.
    #[default]
    Calibrated,
    /// `chi^2 = eta * alpha_0 / (2 N_at)` and `kappa^2 = chi^2 <J_x>`, i.e.
    /// `kappa^2 = eta * alpha_0 / 4`. Kept for sensitivity checks.
    Microscopic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    /// Single-pass coupling `chi^2`.
    pub chi2: f64,
    /// Pulse-level coupling `kappa^2 = chi^2 <J_x>`.
    pub kappa2: f64,
    pub mean_jx_in: f64,
}

impl Coupling {
    pub fn kappa(&self) -> f64 {
        self.kappa2.sqrt()
    }
}

pub fn derive_coupling(p: &PhysicalParams, n_passes: usize) -> Result<Coupling> {
    derive_coupling_with(p, n_passes, CouplingConvention::Calibrated)
}

pub fn derive_coupling_with(
    p: &PhysicalParams,
    n_passes: usize,
    convention: CouplingConvention,
) -> Result<Coupling> {
    if n_passes < 2 {
        return Err(Error::invalid("n_passes", n_passes as f64, "n_passes >= 2"));
    }
    p.validate()?;
    let eta = p.eta_per_pass(n_passes);
    let kappa2 = match convention {
        CouplingConvention::Calibrated => eta * p.optical_depth,
        CouplingConvention::Microscopic => eta * p.optical_depth / 4.0,
    };
    let mean_jx_in = p.mean_jx();
    Ok(Coupling {
        chi2: kappa2 / mean_jx_in,
        kappa2,
        mean_jx_in,
    })
}

/// Fraction of probe photons lost to spontaneous scattering,
/// `epsilon = N_at * eta / N_ph`.
pub fn scattering_loss(p: &PhysicalParams, n_photons: f64, n_passes: usize) -> Result<f64> {
    if !(n_photons > 0.0) {
        return Err(Error::invalid("n_photons", n_photons, "n_photons > 0"));
    }
    if n_passes == 0 {
        return Err(Error::invalid("n_passes", 0.0, "n_passes >= 1"));
    }
    Ok(p.n_atoms * p.eta_per_pass(n_passes) / n_photons)
}

/// Light loss per cell re-entry: scattering plus two window reflections.
pub fn total_crossing_loss(epsilon: f64, wall_reflectivity: f64) -> Result<f64> {
    if !(epsilon >= 0.0) {
        return Err(Error::invalid("epsilon", epsilon, "epsilon >= 0"));
    }
    if !(wall_reflectivity >= 0.0) {
        return Err(Error::invalid("r0", wall_reflectivity, "r0 >= 0"));
    }
    let zeta = epsilon + 2.0 * wall_reflectivity;
    if zeta >= 1.0 {
        return Err(Error::invalid("zeta", zeta, "zeta = epsilon + 2 r0 < 1"));
    }
    Ok(zeta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagneticFieldReport {
    /// Field strength in tesla.
    pub field_tesla: f64,
    /// Larmor angular frequency in rad/s.
    pub larmor_angular: f64,
    /// Larmor frequency in Hz.
    pub larmor_hz: f64,
}

/// Bias field that cancels the light-induced rotation of the triple-pass
/// scheme, `B = sqrt(3) hbar kappa^2 / (4 g_F mu_B T)`.
///
/// Reporting only; the simulator takes the normalized Larmor rate directly.
pub fn tat_magnetic_field(kappa2: f64, pulse_duration: f64, g_factor: f64) -> Result<MagneticFieldReport> {
    larmor_field(3f64.sqrt() * kappa2 / 4.0, pulse_duration, g_factor)
}

/// Field and frequency for a Larmor rate `omega` given in radians per pulse.
pub fn larmor_field(omega: f64, pulse_duration: f64, g_factor: f64) -> Result<MagneticFieldReport> {
    if !(pulse_duration > 0.0) {
        return Err(Error::invalid("pulse_duration", pulse_duration, "T > 0"));
    }
    if g_factor == 0.0 || !g_factor.is_finite() {
        return Err(Error::invalid("g_factor", g_factor, "g_F != 0"));
    }
    let larmor_angular = omega / pulse_duration;
    let field_tesla = HBAR * larmor_angular / (g_factor.abs() * BOHR_MAGNETON);
    Ok(MagneticFieldReport {
        field_tesla,
        larmor_angular,
        larmor_hz: larmor_angular / (2.0 * std::f64::consts::PI),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn with_eta(eta_tilde: f64, optical_depth: f64) -> PhysicalParams {
        PhysicalParams {
            eta_tilde,
            optical_depth,
            ..Default::default()
        }
    }

    #[test]
    fn calibrated_coupling_matches_quoted_kappa() {
        let c = derive_coupling(&with_eta(0.26, 50.0), 3).unwrap();
        assert_relative_eq!(c.kappa2, 0.26 / 3.0 * 50.0, max_relative = 1e-15);
        assert!((c.kappa2 - 4.333).abs() < 1e-3);
        assert!((c.kappa() - 2.08).abs() < 5e-3);
        assert_relative_eq!(c.kappa2, c.chi2 * c.mean_jx_in, max_relative = 1e-15);
    }

    #[test]
    fn coupling_edge_cases() {
        assert_eq!(derive_coupling(&with_eta(0.0, 50.0), 3).unwrap().kappa2, 0.0);
        assert_relative_eq!(
            derive_coupling(&with_eta(0.12, 100.0), 4).unwrap().kappa2,
            3.0,
            max_relative = 1e-14
        );
        assert!(derive_coupling(&with_eta(1.0, 50.0), 3).is_err());
        assert!(derive_coupling(&with_eta(0.2, 50.0), 1).is_err());
    }

    #[test]
    fn microscopic_convention_is_a_quarter() {
        let p = with_eta(0.3, 40.0);
        let a = derive_coupling_with(&p, 3, CouplingConvention::Calibrated).unwrap();
        let b = derive_coupling_with(&p, 3, CouplingConvention::Microscopic).unwrap();
        assert_relative_eq!(b.kappa2 * 4.0, a.kappa2, max_relative = 1e-15);
    }

    #[test]
    fn scattering_loss_values() {
        let p = PhysicalParams {
            n_atoms: 2.0e12,
            ..with_eta(0.26, 50.0)
        };
        let eps = scattering_loss(&p, 1.0e14, 3).unwrap();
        assert!((eps - 1.733e-3).abs() < 1e-6 && eps < 2.0e-3);

        let p = PhysicalParams {
            n_atoms: 1.0e12,
            ..with_eta(0.3, 50.0)
        };
        assert_relative_eq!(scattering_loss(&p, 1.0e14, 3).unwrap(), 1.0e-3, max_relative = 1e-12);
        assert_eq!(scattering_loss(&with_eta(0.0, 50.0), 1e14, 3).unwrap(), 0.0);
        assert!(scattering_loss(&p, 0.0, 3).is_err());
    }

    #[test]
    fn crossing_loss_values() {
        assert_relative_eq!(total_crossing_loss(0.0, 0.01).unwrap(), 0.02);
        assert_eq!(total_crossing_loss(0.0, 0.0).unwrap(), 0.0);
        assert_relative_eq!(total_crossing_loss(0.002, 0.029).unwrap(), 0.06, max_relative = 1e-12);
        assert!(total_crossing_loss(0.5, 0.25).is_err());
    }

    #[test]
    fn magnetic_field_formula() {
        let zero = tat_magnetic_field(0.0, 5e-3, 0.5).unwrap();
        assert_eq!(zero.field_tesla, 0.0);

        let r = tat_magnetic_field(2.0, 1e-3, 0.5).unwrap();
        let expected = 3f64.sqrt() * HBAR * 2.0 / (4.0 * 0.5 * BOHR_MAGNETON * 1e-3);
        assert_relative_eq!(r.field_tesla, expected, max_relative = 1e-14);
        assert_relative_eq!(r.larmor_angular, 3f64.sqrt() * 2.0 / 4.0 / 1e-3, max_relative = 1e-14);

        // kappa = 2.08, T = 5 ms: the formula gives ~60 Hz, not the 270 Hz
        // sometimes quoted alongside it.
        let r = tat_magnetic_field(2.08 * 2.08, 5e-3, 0.5).unwrap();
        assert!((r.larmor_hz - 59.6).abs() < 0.1, "{}", r.larmor_hz);
    }

    #[test]
    fn validation_rejects_out_of_range() {
        let mut p = PhysicalParams {
            beam_angle: 2.0,
            ..PhysicalParams::default()
        };
        assert!(p.validate().is_err());
        p.beam_angle = 0.05;
        p.n_atoms = 0.0;
        assert!(p.validate().is_err());
    }

    proptest::proptest! {
        #[test]
        fn coupling_is_homogeneous_in_eta(eta in 0.0f64..0.45, od in 1.0f64..500.0, n in 2usize..40) {
            let a = derive_coupling(&with_eta(eta, od), n).unwrap();
            let b = derive_coupling(&with_eta(2.0 * eta, od), n).unwrap();
            proptest::prop_assert!((b.kappa2 - 2.0 * a.kappa2).abs() <= 1e-12 * b.kappa2.max(1.0));
        }

        #[test]
        fn coupling_times_passes_is_invariant(eta in 0.0f64..0.9, od in 1.0f64..500.0, n in 2usize..40) {
            let a = derive_coupling(&with_eta(eta, od), n).unwrap();
            let b = derive_coupling(&with_eta(eta, od), 2).unwrap();
            proptest::prop_assert!((a.kappa2 * n as f64 - b.kappa2 * 2.0).abs() <= 1e-12 * (1.0 + b.kappa2));
        }

        #[test]
        fn crossing_loss_is_monotone(e in 0.0f64..0.3, r in 0.0f64..0.2, de in 0.0f64..0.05, dr in 0.0f64..0.05) {
            let z = total_crossing_loss(e, r).unwrap();
            proptest::prop_assert!(total_crossing_loss(e + de, r).unwrap() >= z);
            proptest::prop_assert!(total_crossing_loss(e, r + dr).unwrap() >= z);
        }
    }
}
