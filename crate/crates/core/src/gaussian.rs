//! Gaussian states over one spin mode and any number of light modes.
//!
//! Quadratures are stored as `[X_A, P_A, x_1, p_1, x_2, p_2, ...]` with
//! `X_A = J_y / sqrt(<J_x>)` and `P_A = J_z / sqrt(<J_x>)`. Covariances are
//! symmetrized second central moments, so vacuum and the coherent spin state
//! are both `I/2`.
//!
//! Every operation returns a new state.

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::{Error, Result};

/// Tolerance used when checking that symplectic eigenvalues are `>= 1/2`.
pub const PHYSICALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Spin,
    Light(u32),
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Spin => write!(f, "spin"),
            Mode::Light(id) => write!(f, "light[{id}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    modes: Vec<Mode>,
}

impl GaussianState {
    /// Coherent spin state polarized along `x`, no light modes.
    pub fn coherent_spin() -> Self {
        GaussianState {
            mean: DVector::zeros(2),
            cov: DMatrix::identity(2, 2) * 0.5,
            modes: vec![Mode::Spin],
        }
    }

    /// Build a state from explicit moments. The covariance must be symmetric
    /// and the first mode must be the spin.
    pub fn from_moments(mean: DVector<f64>, cov: DMatrix<f64>, modes: Vec<Mode>) -> Result<Self> {
        let n = 2 * modes.len();
        if mean.len() != n || cov.nrows() != n || cov.ncols() != n {
            return Err(Error::InvalidOperation(format!(
                "moment dimensions ({}, {}x{}) do not match {} modes",
                mean.len(),
                cov.nrows(),
                cov.ncols(),
                modes.len()
            )));
        }
        if modes.first() != Some(&Mode::Spin) || modes[1..].contains(&Mode::Spin) {
            return Err(Error::InvalidOperation("exactly one spin mode, stored first".into()));
        }
        let asym = (&cov - cov.transpose()).amax();
        if asym > 1e-12 * cov.amax().max(1.0) {
            return Err(Error::ModelViolation(format!("covariance not symmetric (|C - C^T| = {asym:.2e})")));
        }
        Ok(GaussianState { mean, cov, modes })
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn dim(&self) -> usize {
        self.cov.nrows()
    }

    /// Index of the `x` quadrature of `mode`; `p` sits right after it.
    pub fn index_of(&self, mode: Mode) -> Result<usize> {
        self.modes
            .iter()
            .position(|&m| m == mode)
            .map(|i| 2 * i)
            .ok_or_else(|| Error::UnknownMode(mode.to_string()))
    }

    /// 2x2 covariance block of a single mode.
    pub fn block(&self, mode: Mode) -> Result<Matrix2<f64>> {
        let i = self.index_of(mode)?;
        Ok(self.cov.fixed_view::<2, 2>(i, i).into_owned())
    }

    /// Cross covariance `Cov(row quadratures of a, column quadratures of b)`.
    pub fn cross(&self, a: Mode, b: Mode) -> Result<Matrix2<f64>> {
        let i = self.index_of(a)?;
        let j = self.index_of(b)?;
        Ok(self.cov.fixed_view::<2, 2>(i, j).into_owned())
    }

    pub fn spin_cov(&self) -> Matrix2<f64> {
        self.cov.fixed_view::<2, 2>(0, 0).into_owned()
    }

    /// Append a light mode in the vacuum state.
    pub fn with_vacuum(&self, mode: Mode) -> Result<Self> {
        if self.modes.contains(&mode) {
            return Err(Error::InvalidOperation(format!("mode {mode} already present")));
        }
        if mode == Mode::Spin {
            return Err(Error::InvalidOperation("only light modes can be appended".into()));
        }
        let n = self.dim();
        let mut cov = DMatrix::zeros(n + 2, n + 2);
        cov.view_mut((0, 0), (n, n)).copy_from(&self.cov);
        cov[(n, n)] = 0.5;
        cov[(n + 1, n + 1)] = 0.5;
        let mut mean = DVector::zeros(n + 2);
        mean.rows_mut(0, n).copy_from(&self.mean);
        let mut modes = self.modes.clone();
        modes.push(mode);
        Ok(GaussianState { mean, cov, modes })
    }

    /// Apply a linear map that acts as `t` on the quadratures `idx` and as
    /// the identity elsewhere: `mean -> T mean`, `cov -> T cov T^T`.
    fn apply_linear(&self, idx: &[usize], t: &DMatrix<f64>) -> Self {
        let k = idx.len();
        let n = self.dim();
        let mut out = self.clone();

        let mut rows = DMatrix::zeros(k, n);
        for (r, &i) in idx.iter().enumerate() {
            rows.row_mut(r).copy_from(&self.cov.row(i));
        }
        let new_rows = t * rows;
        for (r, &i) in idx.iter().enumerate() {
            out.cov.row_mut(i).copy_from(&new_rows.row(r));
        }
        let mut cols = DMatrix::zeros(n, k);
        for (c, &j) in idx.iter().enumerate() {
            cols.column_mut(c).copy_from(&out.cov.column(j));
        }
        let new_cols = cols * t.transpose();
        for (c, &j) in idx.iter().enumerate() {
            out.cov.column_mut(j).copy_from(&new_cols.column(c));
        }
        // restore exact symmetry lost to rounding
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a..] {
                let s = 0.5 * (out.cov[(i, j)] + out.cov[(j, i)]);
                out.cov[(i, j)] = s;
                out.cov[(j, i)] = s;
            }
        }

        let sub = DVector::from_iterator(k, idx.iter().map(|&i| self.mean[i]));
        let new_sub = t * sub;
        for (r, &i) in idx.iter().enumerate() {
            out.mean[i] = new_sub[r];
        }
        out
    }

    /// One Faraday pass generated by `kappa (P_A cos(theta) - X_A sin(theta)) p_L`.
    ///
    /// `x_L += kappa (P_A cos(theta) - X_A sin(theta))`,
    /// `X_A += kappa p_L cos(theta)`, `P_A += kappa p_L sin(theta)`.
    /// The spin operator seen by the light commutes with `p_L`, so the map
    /// is exact for any `kappa`.
    pub fn faraday_pass(&self, spin: Mode, light: Mode, kappa: f64, theta: f64) -> Result<Self> {
        if spin != Mode::Spin {
            return Err(Error::UnknownMode(format!("{spin} is not the spin mode")));
        }
        if !(kappa >= 0.0) {
            return Err(Error::invalid("kappa_step", kappa, "kappa_step >= 0"));
        }
        let s_idx = self.index_of(spin)?;
        let l_idx = self.index_of(light)?;
        if l_idx == s_idx {
            return Err(Error::InvalidOperation("light and spin modes must differ".into()));
        }
        let (sin, cos) = theta.sin_cos();
        #[rustfmt::skip]
        let t = DMatrix::from_row_slice(4, 4, &[
            1.0,          0.0,         0.0, kappa * cos,
            0.0,          1.0,         0.0, kappa * sin,
            -kappa * sin, kappa * cos, 1.0, 0.0,
            0.0,          0.0,         0.0, 1.0,
        ]);
        Ok(self.apply_linear(&[s_idx, s_idx + 1, l_idx, l_idx + 1], &t))
    }

    /// Phase-space rotation `x -> x cos(a) + p sin(a)`, `p -> p cos(a) - x sin(a)`.
    pub fn quadrature_rotation(&self, mode: Mode, angle: f64) -> Result<Self> {
        let i = self.index_of(mode)?;
        let (s, c) = angle.sin_cos();
        let t = DMatrix::from_row_slice(2, 2, &[c, s, -s, c]);
        Ok(self.apply_linear(&[i, i + 1], &t))
    }

    /// Beam-splitter admixture of vacuum with transmission `1 - zeta`.
    pub fn loss_channel(&self, mode: Mode, zeta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&zeta) {
            return Err(Error::invalid("zeta_step", zeta, "0 <= zeta_step <= 1"));
        }
        let i = self.index_of(mode)?;
        let amp = (1.0 - zeta).sqrt();
        let mut out = self.scale_mode(i, amp);
        out.mean[i] *= amp;
        out.mean[i + 1] *= amp;
        out.cov[(i, i)] += 0.5 * zeta;
        out.cov[(i + 1, i + 1)] += 0.5 * zeta;
        Ok(out)
    }

    /// Spin damping at rate `eta_tilde` with Langevin noise over a step `dt`
    /// (pulse time normalized to 1). The coherent-spin covariance is a fixed
    /// point.
    pub fn spin_decay_step(&self, eta_tilde: f64, dt: f64) -> Result<Self> {
        let g = eta_tilde * dt;
        if !(g >= 0.0) {
            return Err(Error::invalid("eta_tilde*dt", g, "eta_tilde*dt >= 0"));
        }
        if g > 0.5 {
            return Err(Error::invalid("eta_tilde*dt", g, "eta_tilde*dt <= 0.5 (step too coarse)"));
        }
        let i = self.index_of(Mode::Spin)?;
        let mut out = self.scale_mode(i, (1.0 - g).sqrt());
        out.mean[i] = self.mean[i] * (1.0 - 0.5 * g);
        out.mean[i + 1] = self.mean[i + 1] * (1.0 - 0.5 * g);
        out.cov[(i, i)] += 0.5 * g;
        out.cov[(i + 1, i + 1)] += 0.5 * g;
        Ok(out)
    }

    /// Scale the rows and columns of one mode's covariance by `amp`
    /// (block by `amp^2`, cross terms by `amp`). Means are left alone.
    fn scale_mode(&self, i: usize, amp: f64) -> Self {
        let mut out = self.clone();
        for r in [i, i + 1] {
            out.cov.row_mut(r).scale_mut(amp);
            out.cov.column_mut(r).scale_mut(amp);
        }
        out
    }

    /// Discard a light mode.
    pub fn partial_trace(&self, mode: Mode) -> Result<Self> {
        if mode == Mode::Spin {
            return Err(Error::InvalidOperation("cannot trace out the spin mode".into()));
        }
        let i = self.index_of(mode)?;
        let cov = self.cov.clone().remove_rows(i, 2).remove_columns(i, 2);
        let mean = self.mean.clone().remove_rows(i, 2);
        let mut modes = self.modes.clone();
        modes.remove(i / 2);
        Ok(GaussianState { mean, cov, modes })
    }

    /// Symplectic spectrum, ascending. The state is pure iff every value is 1/2.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        symplectic_eigenvalues(&self.cov)
    }

    /// Check positivity of the covariance and the uncertainty relation.
    pub fn check_physical(&self) -> Result<()> {
        let nu = self.symplectic_eigenvalues()?;
        match nu.first() {
            Some(&v) if v < 0.5 - PHYSICALITY_TOL => Err(Error::ModelViolation(format!(
                "symplectic eigenvalue {v:.12} below 1/2"
            ))),
            _ => Ok(()),
        }
    }
}

/// Block-diagonal symplectic form `J = diag([[0, 1], [-1, 0]], ...)`.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        j[(2 * k, 2 * k + 1)] = 1.0;
        j[(2 * k + 1, 2 * k)] = -1.0;
    }
    j
}

/// Symplectic eigenvalues of a covariance matrix.
///
/// `nu^2` are the eigenvalues of `S^{1/2} J^T S J S^{1/2}`, which is
/// symmetric, each appearing twice.
pub fn symplectic_eigenvalues(cov: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = cov.nrows();
    if n == 0 || !n.is_multiple_of(2) || cov.ncols() != n {
        return Err(Error::InvalidOperation(format!("covariance shape {}x{}", n, cov.ncols())));
    }
    let eig = SymmetricEigen::new(cov.clone());
    let min_ev = eig.eigenvalues.min();
    if !(min_ev > 0.0) {
        return Err(Error::ModelViolation(format!(
            "covariance not positive definite (eigenvalue {min_ev:.3e})"
        )));
    }
    let sqrt = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
        * eig.eigenvectors.transpose();
    let j = symplectic_form(n / 2);
    let mut k = &sqrt * j.transpose() * cov * &j * &sqrt;
    k = 0.5 * (&k + k.transpose());
    let mut nu2: Vec<f64> = SymmetricEigen::new(k).eigenvalues.iter().copied().collect();
    nu2.sort_by(f64::total_cmp);
    Ok(nu2.chunks(2).map(|pair| pair[0].max(0.0).sqrt()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const L0: Mode = Mode::Light(0);
    const L1: Mode = Mode::Light(1);

    fn spin_light() -> GaussianState {
        GaussianState::coherent_spin().with_vacuum(L0).unwrap()
    }

    /// Assemble the full 2n x 2n matrix of a Faraday pass for the oracle check.
    fn faraday_matrix(n: usize, s: usize, l: usize, kappa: f64, theta: f64) -> DMatrix<f64> {
        let mut m = DMatrix::identity(n, n);
        m[(s, l + 1)] = kappa * theta.cos();
        m[(s + 1, l + 1)] = kappa * theta.sin();
        m[(l, s)] = -kappa * theta.sin();
        m[(l, s + 1)] = kappa * theta.cos();
        m
    }

    #[test]
    fn single_pass_moments() {
        let k = 0.8;
        let out = spin_light().faraday_pass(Mode::Spin, L0, k, 0.0).unwrap();
        let c = out.cov();
        assert_relative_eq!(c[(2, 2)], (1.0 + k * k) / 2.0, epsilon = 1e-15);
        assert_relative_eq!(c[(2, 1)], k / 2.0, epsilon = 1e-15);
        assert_relative_eq!(c[(0, 0)], (1.0 + k * k) / 2.0, epsilon = 1e-15);
        assert_relative_eq!(c[(1, 1)], 0.5, epsilon = 1e-15);
        assert_relative_eq!(c[(3, 3)], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn zero_coupling_is_identity() {
        let s = spin_light().quadrature_rotation(L0, 0.3).unwrap();
        let out = s.faraday_pass(Mode::Spin, L0, 0.0, 1.1).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn reversed_pass_flips_signs() {
        // x_L -= k P_A and X_A -= k p_L; P_A untouched.
        let k = 0.7;
        let n = 4;
        let mut mean = DVector::zeros(n);
        mean[0] = 0.3;
        mean[1] = -0.2;
        mean[2] = 0.1;
        mean[3] = 0.5;
        let s = GaussianState::from_moments(mean, DMatrix::identity(n, n) * 0.5, vec![Mode::Spin, L0]).unwrap();
        let out = s.faraday_pass(Mode::Spin, L0, k, PI).unwrap();
        let m = out.mean();
        assert_relative_eq!(m[2], 0.1 - k * (-0.2), epsilon = 1e-15);
        assert_relative_eq!(m[0], 0.3 - k * 0.5, epsilon = 1e-15);
        assert_relative_eq!(m[1], -0.2, epsilon = 1e-15);
        assert_relative_eq!(m[3], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn rotation_by_quarter_turn_swaps_quadratures() {
        let mut cov = DMatrix::identity(4, 4) * 0.5;
        cov[(2, 2)] = 2.0;
        cov[(3, 3)] = 0.125;
        cov[(2, 3)] = 0.1;
        cov[(3, 2)] = 0.1;
        cov[(0, 2)] = 0.05;
        cov[(2, 0)] = 0.05;
        let s = GaussianState::from_moments(DVector::zeros(4), cov, vec![Mode::Spin, L0]).unwrap();
        let r = s.quadrature_rotation(L0, PI / 2.0).unwrap();
        // x -> p, p -> -x
        assert_relative_eq!(r.cov()[(2, 2)], 0.125, epsilon = 1e-15);
        assert_relative_eq!(r.cov()[(3, 3)], 2.0, epsilon = 1e-15);
        assert_relative_eq!(r.cov()[(2, 3)], -0.1, epsilon = 1e-15);
        assert_relative_eq!(r.cov()[(0, 2)], 0.0, epsilon = 1e-15);
        assert_relative_eq!(r.cov()[(0, 3)], -0.05, epsilon = 1e-15);
    }

    #[test]
    fn rotation_composes() {
        let s = spin_light().faraday_pass(Mode::Spin, L0, 1.3, 0.2).unwrap();
        let twice = s
            .quadrature_rotation(L0, PI / 3.0)
            .and_then(|s| s.quadrature_rotation(L0, PI / 3.0))
            .unwrap();
        let once = s.quadrature_rotation(L0, 2.0 * PI / 3.0).unwrap();
        assert!((twice.cov() - once.cov()).amax() < 1e-14);
        assert_eq!(s.quadrature_rotation(L0, 0.0).unwrap(), s);
    }

    #[test]
    fn loss_channel_values() {
        let mut cov = DMatrix::identity(4, 4) * 0.5;
        cov[(2, 2)] = 1.5;
        cov[(1, 2)] = 0.3;
        cov[(2, 1)] = 0.3;
        let s = GaussianState::from_moments(DVector::zeros(4), cov, vec![Mode::Spin, L0]).unwrap();
        let out = s.loss_channel(L0, 0.02).unwrap();
        assert_relative_eq!(out.cov()[(2, 2)], 1.48, epsilon = 1e-14);
        assert_relative_eq!(out.cov()[(1, 2)], 0.3 * 0.98f64.sqrt(), epsilon = 1e-15);

        assert_eq!(s.loss_channel(L0, 0.0).unwrap(), s);
        let full = s.loss_channel(L0, 1.0).unwrap();
        assert_eq!(full.block(L0).unwrap(), Matrix2::identity() * 0.5);
        assert_eq!(full.cross(Mode::Spin, L0).unwrap(), Matrix2::zeros());
        assert!(s.loss_channel(L0, 1.5).is_err());
    }

    #[test]
    fn decay_step_values() {
        let css = GaussianState::coherent_spin();
        assert_eq!(css.spin_decay_step(0.0, 0.1).unwrap(), css);
        let fixed = css.spin_decay_step(0.26, 0.5).unwrap();
        assert!((fixed.spin_cov() - Matrix2::identity() * 0.5).amax() < 1e-15);

        let mut cov = DMatrix::identity(2, 2) * 0.5;
        cov[(0, 0)] = 0.2;
        let s = GaussianState::from_moments(DVector::zeros(2), cov, vec![Mode::Spin]).unwrap();
        let out = s.spin_decay_step(1.0, 0.1).unwrap();
        assert_relative_eq!(out.cov()[(0, 0)], 0.23, epsilon = 1e-15);
        assert!(s.spin_decay_step(1.0, 0.6).is_err());
    }

    #[test]
    fn tracing() {
        let s = GaussianState::coherent_spin()
            .with_vacuum(L0)
            .and_then(|s| s.with_vacuum(L1))
            .unwrap();
        assert_eq!(s.partial_trace(L1).unwrap().spin_cov(), s.spin_cov());

        let k = 1.7;
        let out = s.faraday_pass(Mode::Spin, L0, k, 0.0).unwrap();
        let traced = out.partial_trace(L0).unwrap();
        assert_relative_eq!(traced.cov()[(0, 0)], (1.0 + k * k) / 2.0, epsilon = 1e-14);
        assert_eq!(traced.modes(), &[Mode::Spin, L1]);

        let out = out.faraday_pass(Mode::Spin, L1, 0.4, 1.0).unwrap();
        let a = out.partial_trace(L0).and_then(|s| s.partial_trace(L1)).unwrap();
        let b = out.partial_trace(L1).and_then(|s| s.partial_trace(L0)).unwrap();
        assert_eq!(a, b);

        assert!(out.partial_trace(Mode::Spin).is_err());
        assert!(matches!(out.partial_trace(Mode::Light(9)), Err(Error::UnknownMode(_))));
    }

    #[test]
    fn unknown_modes_are_rejected() {
        let s = spin_light();
        assert!(matches!(s.quadrature_rotation(L1, 0.2), Err(Error::UnknownMode(_))));
        assert!(matches!(s.faraday_pass(Mode::Spin, L1, 0.2, 0.0), Err(Error::UnknownMode(_))));
        assert!(matches!(s.loss_channel(L1, 0.2), Err(Error::UnknownMode(_))));
    }

    #[test]
    fn vacuum_spectrum_and_mixedness() {
        let s = spin_light();
        for nu in s.symplectic_eigenvalues().unwrap() {
            assert_relative_eq!(nu, 0.5, epsilon = 1e-14);
        }
        // spin alone after an entangling pass is mixed
        let traced = s.faraday_pass(Mode::Spin, L0, 1.0, 0.0).unwrap().partial_trace(L0).unwrap();
        let nu = traced.symplectic_eigenvalues().unwrap()[0];
        assert_relative_eq!(nu, 0.5 * 2f64.sqrt(), epsilon = 1e-12);

        let mut bad = DMatrix::identity(2, 2) * 0.5;
        bad[(0, 0)] = -0.1;
        assert!(matches!(symplectic_eigenvalues(&bad), Err(Error::ModelViolation(_))));
        let mut unphysical = DMatrix::identity(2, 2) * 0.5;
        unphysical[(0, 0)] = 0.1;
        let s = GaussianState::from_moments(DVector::zeros(2), unphysical, vec![Mode::Spin]).unwrap();
        assert!(matches!(s.check_physical(), Err(Error::ModelViolation(_))));
    }

    #[derive(Debug, Clone)]
    enum Op {
        Pass(f64, f64),
        Rotate(bool, f64),
        Loss(f64),
        Decay(f64),
    }

    fn op() -> impl Strategy<Value = Op> {
        prop_oneof![
            (0.0f64..2.0, 0.0f64..(2.0 * PI)).prop_map(|(k, t)| Op::Pass(k, t)),
            (any::<bool>(), -PI..PI).prop_map(|(b, a)| Op::Rotate(b, a)),
            (0.0f64..1.0).prop_map(Op::Loss),
            (0.0f64..0.5).prop_map(Op::Decay),
        ]
    }

    fn apply(s: &GaussianState, op: &Op) -> GaussianState {
        match *op {
            Op::Pass(k, t) => s.faraday_pass(Mode::Spin, L0, k, t).unwrap(),
            Op::Rotate(spin, a) => s.quadrature_rotation(if spin { Mode::Spin } else { L0 }, a).unwrap(),
            Op::Loss(z) => s.loss_channel(L0, z).unwrap(),
            Op::Decay(g) => s.spin_decay_step(g, 1.0).unwrap(),
        }
    }

    proptest! {
        #[test]
        fn lossless_ops_preserve_spectrum_and_det(
            ops in proptest::collection::vec((0.0f64..1.5, 0.0f64..(2.0 * PI), -PI..PI), 1..6)
        ) {
            let mut s = spin_light();
            let det0 = s.cov().determinant();
            for (k, t, a) in ops {
                s = s.faraday_pass(Mode::Spin, L0, k, t).unwrap().quadrature_rotation(L0, a).unwrap();
            }
            prop_assert!((s.cov().determinant() - det0).abs() < 1e-9 * det0.max(1.0));
            for nu in s.symplectic_eigenvalues().unwrap() {
                prop_assert!((nu - 0.5).abs() < 1e-8, "nu = {}", nu);
            }
        }

        #[test]
        fn every_op_keeps_state_physical(ops in proptest::collection::vec(op(), 1..10)) {
            let mut s = spin_light();
            for o in &ops {
                s = apply(&s, o);
                prop_assert!((s.cov() - s.cov().transpose()).amax() == 0.0);
                prop_assert!(s.check_physical().is_ok());
            }
        }

        #[test]
        fn loss_composes(z1 in 0.0f64..1.0, z2 in 0.0f64..1.0, k in 0.0f64..2.0, m in -1.0f64..1.0) {
            let mut mean = DVector::zeros(4);
            mean[2] = m;
            mean[3] = -0.5 * m;
            let s = GaussianState::from_moments(mean, DMatrix::identity(4, 4) * 0.5, vec![Mode::Spin, L0])
                .unwrap()
                .faraday_pass(Mode::Spin, L0, k, 0.4)
                .unwrap();
            let a = s.loss_channel(L0, z1).and_then(|s| s.loss_channel(L0, z2)).unwrap();
            let b = s.loss_channel(L0, 1.0 - (1.0 - z1) * (1.0 - z2)).unwrap();
            prop_assert!((a.mean() - b.mean()).amax() < 1e-12);
            prop_assert!((a.cov() - b.cov()).amax() < 1e-12);
        }

        #[test]
        fn pass_matches_assembled_matrix(k in 0.0f64..2.0, t in 0.0f64..(2.0 * PI), a in -PI..PI, x in -1.0f64..1.0) {
            let mut mean = DVector::zeros(6);
            mean[0] = x;
            mean[3] = 0.3;
            mean[4] = -x;
            let s = GaussianState::from_moments(mean, DMatrix::identity(6, 6) * 0.5, vec![Mode::Spin, L0, L1])
                .unwrap()
                .faraday_pass(Mode::Spin, L1, 0.9, 0.3)
                .unwrap()
                .quadrature_rotation(L1, a)
                .unwrap();
            let out = s.faraday_pass(Mode::Spin, L1, k, t).unwrap();
            let m = faraday_matrix(6, 0, 4, k, t);
            let cov = &m * s.cov() * m.transpose();
            prop_assert!((out.cov() - cov).amax() < 1e-12);
            prop_assert!((out.mean() - &m * s.mean()).amax() < 1e-12);
            // and the map is symplectic
            let j = symplectic_form(3);
            prop_assert!((&m * &j * m.transpose() - j).amax() < 1e-12);
        }
    }
}
