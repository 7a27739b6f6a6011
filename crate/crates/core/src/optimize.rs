//! Deterministic one-dimensional searches and coordinate cycling.
//!
//! Objectives may return `+inf` for points that cannot be evaluated.

use crate::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub f: f64,
}

/// Golden-section search on `[a, b]` until the bracket is shorter than `tol`.
pub fn golden_section(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Minimum {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        Minimum { x: c, f: fc }
    } else {
        Minimum { x: d, f: fd }
    }
}

/// Evaluate `f` on `grid` (ascending), then refine by golden section between
/// the neighbours of the best grid point. The grid point itself is kept if
/// refinement does no better.
pub fn grid_then_golden(mut f: impl FnMut(f64) -> f64, grid: &[f64], tol: f64) -> Minimum {
    assert!(!grid.is_empty(), "empty search grid");
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let best = (0..grid.len())
        .min_by(|&i, &j| values[i].total_cmp(&values[j]))
        .unwrap_or(0);
    let coarse = Minimum {
        x: grid[best],
        f: values[best],
    };
    if grid.len() < 2 {
        return coarse;
    }
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let fine = golden_section(&mut f, lo, hi, tol);
    if fine.f < coarse.f {
        fine
    } else {
        coarse
    }
}

/// `n` points from `lo` to `hi` inclusive, evenly spaced.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// `n` points from `lo` to `hi` inclusive, evenly spaced in log.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), n).into_iter().map(f64::exp).collect()
}

/// Search window for one coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
    pub grid_points: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub cycles: usize,
}

/// Minimize over a box by cycling grid-then-golden searches over each
/// coordinate until one full cycle improves the objective by less than
/// `ftol`.
pub fn coordinate_descent(
    mut f: impl FnMut(&[f64]) -> f64,
    start: &[f64],
    windows: &[Window],
    ftol: f64,
    max_cycles: usize,
) -> Result<CoordinateResult> {
    assert_eq!(start.len(), windows.len());
    let mut x = start.to_vec();
    let mut fx = f(&x);
    for cycle in 1..=max_cycles {
        let before = fx;
        for (i, w) in windows.iter().enumerate() {
            let grid = linspace(w.lo, w.hi, w.grid_points);
            let mut probe = x.clone();
            let m = grid_then_golden(
                |v| {
                    probe[i] = v;
                    f(&probe)
                },
                &grid,
                w.tol,
            );
            if m.f < fx {
                x[i] = m.x;
                fx = m.f;
            }
        }
        if before.is_finite() && (before - fx).abs() < ftol {
            return Ok(CoordinateResult { x, f: fx, cycles: cycle });
        }
    }
    Err(Error::NotConverged {
        iterations: max_cycles,
        best: fx,
    })
}
