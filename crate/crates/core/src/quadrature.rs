//! Quadrature support: Gauss-Legendre nodes/weights, composite panels for
//! semi-infinite radial integrals, and a small adaptive Simpson fallback.

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre polynomial. Nodes are returned in increasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 1..n {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Integrate f over [a, b] with an n-node Gauss-Legendre rule.
pub fn integrate_gl<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut total = 0.0;
    for (t, w) in nodes.iter().zip(&weights) {
        total += w * f(mid + half * t);
    }
    total * half
}

/// Composite Gauss-Legendre on geometrically growing panels
/// [0, s], [s, 2s], [2s, 4s], ... up to r_max; suited to smooth integrands
/// decaying exponentially on a scale of order s.
pub fn integrate_radial<F: Fn(f64) -> f64>(f: &F, scale: f64, r_max: f64, nodes: usize) -> f64 {
    let mut total = 0.0;
    let mut a = 0.0;
    let mut b = scale;
    while a < r_max {
        total += integrate_gl(f, a, b.min(r_max), nodes);
        a = b;
        b *= 2.0;
    }
    total
}

/// Adaptive Simpson with absolute tolerance. Used as an independent check
/// on the fixed-rule integrals in tests.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(Error::QuadratureNotConverged {
                err: delta.abs(),
                tol,
            });
        }
        Ok(recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)?
            + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)?)
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 48)
}
