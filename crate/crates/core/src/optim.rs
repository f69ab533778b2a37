//! Scalar root finding and minimization used by the accountant's solvers.

use crate::error::{Error, Result};

/// Convergence controls for the bracketed solvers.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    /// Absolute tolerance on the abscissa.
    pub abs: f64,
    /// Relative tolerance on the abscissa. The effective tolerance is
    /// `min(abs, rel * |x|)`, so small roots are resolved relatively.
    pub rel: f64,
    pub max_iter: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-9, rel: 1e-13, max_iter: 200 }
    }
}

impl Tolerance {
    fn at(&self, x: f64) -> f64 {
        self.abs.min(self.rel * x.abs()).max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

/// Finds a root of `f` in `[lo, hi]`, which must bracket a sign change.
///
/// Each step tries a secant (regula falsi with the Illinois modification)
/// and falls back to bisection whenever the secant point would not shrink
/// the bracket by at least half over two steps.
pub fn find_root<F>(mut f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<Root>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(Root { x: a, fx: fa, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, fx: fb, iterations: 0 });
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(Error::Numerical(format!(
            "interval [{a}, {b}] does not bracket a root (f = {fa}, {fb})"
        )));
    }

    let mut side = 0i8;
    let mut prev_width = b - a;
    for iter in 1..=tol.max_iter {
        let width = b - a;
        let secant = (a * fb - b * fa) / (fb - fa);
        let use_bisect = !(secant > a && secant < b) || width > 0.5 * prev_width;
        let x = if use_bisect { 0.5 * (a + b) } else { secant };
        prev_width = width;

        let fx = f(x);
        if fx == 0.0 || fx.is_nan() {
            return Ok(Root { x, fx, iterations: iter });
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        let mid = 0.5 * (a + b);
        if b - a <= 2.0 * tol.at(mid) || mid <= a || mid >= b {
            // Report whichever endpoint is closer to zero.
            let x = if fa.abs() <= fb.abs() { a } else { b };
            return Ok(Root { x, fx: f(x), iterations: iter });
        }
    }
    Err(Error::Numerical(format!(
        "root finder did not converge in {} iterations (bracket [{a}, {b}])",
        tol.max_iter
    )))
}

#[derive(Debug, Clone, Copy)]
pub struct Minimum {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
pub fn golden_section<F>(mut f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<Minimum>
where
    F: FnMut(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0;
    while b - a > tol.at(0.5 * (a + b)) {
        iter += 1;
        if iter > tol.max_iter {
            return Err(Error::Numerical(format!(
                "golden-section search did not converge in {} iterations",
                tol.max_iter
            )));
        }
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
    let (x, fx) = if fc <= fd { (c, fc) } else { (d, fd) };
    Ok(Minimum { x, fx, iterations: iter })
}
