//! Scattering observables: partial-wave S-matrix elements, the
//! Abel-regularized partial-wave amplitude, the all-barriers-off sign-sum
//! closed form, the Coulomb reference amplitude, and the n-fold integral
//! representation evaluated by tensor Gauss-Legendre quadrature.
//!
//! Directions live in the closed positive octant (the boundary condition
//! kills flux through the coordinate planes); inputs outside it are
//! rejected rather than symmetrized. The forward direction is excluded
//! everywhere: the amplitudes are defined off-forward only.

use crate::bound::{angular_Y, polyspherical};
use crate::error::{Error, Result};
use crate::qnum::{states_with_l, ModelParams};
use crate::quadrature::gauss_legendre;
use crate::specfun::{gamma_phase_ratio, legendre, log_gamma};
use num_complex::Complex64;

/// Forward-direction exclusion threshold on dir_in . dir_out.
pub const FORWARD_COS_LIMIT: f64 = 1.0 - 1e-9;

/// Abel regularization schedule used by default: decreasing eta, halving.
pub const DEFAULT_ETA_SCHEDULE: [f64; 5] = [0.4, 0.2, 0.1, 0.05, 0.025];

/// Default Gauss-Legendre nodes per axis for the integral representation.
pub const DEFAULT_NODES_PER_AXIS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplitudeMethod {
    PartialWave,
    ClosedK0,
    Coulomb,
    Integral,
}

impl std::fmt::Display for AmplitudeMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            AmplitudeMethod::PartialWave => "partial_wave",
            AmplitudeMethod::ClosedK0 => "closed_k0",
            AmplitudeMethod::Coulomb => "coulomb",
            AmplitudeMethod::Integral => "integral",
        };
        f.write_str(s)
    }
}

/// Complex amplitude value with its method tag and numerical-error estimate.
#[derive(Debug, Clone)]
pub struct AmplitudeResult {
    pub value: Complex64,
    pub method: AmplitudeMethod,
    pub err_estimate: f64,
}

/// One scattering configuration: momentum magnitude, the Sommerfeld-like
/// parameter rho = gamma/p, and unit directions in the closed octant.
#[derive(Debug, Clone)]
pub struct ScatterConfig {
    pub params: ModelParams,
    pub p: f64,
    pub rho: f64,
    pub dir_in: Vec<f64>,
    pub dir_out: Vec<f64>,
}

impl ScatterConfig {
    pub fn new(params: ModelParams, p: f64, dir_in: Vec<f64>, dir_out: Vec<f64>) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::Domain(format!("momentum must be positive, got {}", p)));
        }
        for (name, d) in [("dir_in", &dir_in), ("dir_out", &dir_out)] {
            if d.len() != params.n {
                return Err(Error::Domain(format!(
                    "{} has {} components for dimension {}",
                    name,
                    d.len(),
                    params.n
                )));
            }
            let mut norm2 = 0.0;
            for &c in d.iter() {
                if !c.is_finite() || c < 0.0 {
                    return Err(Error::Domain(format!(
                        "{} component {} outside the closed octant",
                        name, c
                    )));
                }
                norm2 += c * c;
            }
            if (norm2.sqrt() - 1.0).abs() > 1e-12 {
                return Err(Error::Domain(format!(
                    "{} is not a unit vector (norm {})",
                    name,
                    norm2.sqrt()
                )));
            }
        }
        let rho = params.gamma / p;
        Ok(ScatterConfig {
            params,
            p,
            rho,
            dir_in,
            dir_out,
        })
    }

    pub fn cos_separation(&self) -> f64 {
        self.dir_in
            .iter()
            .zip(&self.dir_out)
            .map(|(a, b)| a * b)
            .sum()
    }

    fn forward_guard(&self) -> Result<()> {
        let c = self.cos_separation();
        if c > FORWARD_COS_LIMIT {
            Err(Error::ForwardSingularity { cosine: c })
        } else {
            Ok(())
        }
    }
}

/// Sommerfeld-like parameter rho = gamma / p.
pub fn rho_of(params: &ModelParams, p: f64) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Domain(format!("momentum must be positive, got {}", p)));
    }
    Ok(params.gamma / p)
}

/// Partial-wave S-matrix phase Gamma((3n-1)/2 + l + i rho) / Gamma((3n-1)/2 + l - i rho)
/// without the angular-label validity check; used where the identity is
/// needed for arbitrary integer l.
pub(crate) fn al_phase(n: usize, rho: f64, l: u32) -> Result<Complex64> {
    gamma_phase_ratio(1.5 * n as f64 - 0.5 + f64::from(l), rho)
}

/// Partial-wave S-matrix element A_l; unit modulus. Requires l to be an
/// admissible angular label: l - sum(kappa) even and nonnegative.
pub fn partial_wave_al(params: &ModelParams, rho: f64, l: u32) -> Result<Complex64> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("rho must be positive, got {}", rho)));
    }
    let ks = params.kappa_sum();
    if l < ks || (l - ks) % 2 != 0 {
        return Err(Error::Domain(format!(
            "l = {} is not an admissible angular label (l - {} must be even nonnegative)",
            l, ks
        )));
    }
    al_phase(params.n, rho, l)
}

/// f = -i (2 pi / p)^{(n-1)/2} prefactor common to the amplitude formulas,
/// times the given reduced sum.
fn pw_prefactor(n: usize, p: f64) -> Complex64 {
    Complex64::new(0.0, -1.0) * (2.0 * std::f64::consts::PI / p).powf(0.5 * (n as f64 - 1.0))
}

/// Gamma(a + i rho)/Gamma(-i rho) via log-gamma differences.
fn gamma_prefactor(a: f64, rho: f64) -> Result<Complex64> {
    let num = log_gamma(Complex64::new(a, rho))?;
    let den = log_gamma(Complex64::new(0.0, -rho))?;
    Ok((num - den).exp())
}

/// 2^{i rho} Gamma(a + i rho)/Gamma(-i rho) / (i p^{(n-1)/2}).
fn kernel_prefactor(n: usize, p: f64, rho: f64, a: f64) -> Result<Complex64> {
    let two_pow = Complex64::new(0.0, rho * 2.0f64.ln()).exp();
    Ok(Complex64::new(0.0, -1.0) * p.powf(-0.5 * (n as f64 - 1.0)) * two_pow
        * gamma_prefactor(a, rho)?)
}

/// Neville extrapolation of (eta_i, value_i) to eta = 0; returns the final
/// extrapolant and the difference of the last two diagonal entries.
fn extrapolate_to_zero(etas: &[f64], values: &[Complex64]) -> (Complex64, f64) {
    let m = values.len();
    let mut table = values.to_vec();
    let mut prev_diag = table[0];
    let mut last_delta = f64::INFINITY;
    for j in 1..m {
        for i in 0..m - j {
            // polynomial through (eta_i .. eta_{i+j}) evaluated at 0
            table[i] = (table[i + 1] * etas[i] - table[i] * etas[i + j]) / (etas[i] - etas[i + j]);
        }
        last_delta = (table[0] - prev_diag).norm();
        prev_diag = table[0];
    }
    (table[0], last_delta)
}

/// Abel-regularized partial-wave amplitude: terms weighted e^{-eta l},
/// evaluated on the decreasing eta schedule and extrapolated to eta -> 0.
/// `err_estimate` is the difference of the last two extrapolants, floored
/// by the truncation tail of the slowest-damped sum.
pub fn amplitude_pw(
    config: &ScatterConfig,
    l_max: u32,
    eta_schedule: &[f64],
) -> Result<AmplitudeResult> {
    config.forward_guard()?;
    let params = &config.params;
    let ks = params.kappa_sum();
    if l_max < ks {
        return Err(Error::Domain(format!(
            "l_max = {} below the minimum angular label {}",
            l_max, ks
        )));
    }
    if eta_schedule.len() < 2 || eta_schedule.windows(2).any(|w| w[1] >= w[0] || w[1] <= 0.0) {
        return Err(Error::Domain(
            "eta schedule must be strictly decreasing and positive".into(),
        ));
    }

    let (_, theta_in) = polyspherical(&config.dir_in);
    let (_, theta_out) = polyspherical(&config.dir_out);

    // T_l = sum_M Y_{lM}(in) Y_{lM}(out): real, computed once per l
    let mut terms: Vec<(u32, Complex64, f64)> = Vec::new(); // (l, A_l, T_l)
    let mut l = ks;
    let mut tail = 0.0;
    while l <= l_max {
        let mut t_l = 0.0;
        for labels in states_with_l(params, l, l) {
            let yi = angular_Y(params, &labels, &theta_in)?;
            let yo = angular_Y(params, &labels, &theta_out)?;
            t_l += yi * yo;
        }
        if t_l != 0.0 {
            let al = al_phase(params.n, config.rho, l)?;
            terms.push((l, al, t_l));
            tail = t_l.abs();
        }
        l += 2;
    }

    let mut sums = Vec::with_capacity(eta_schedule.len());
    for &eta in eta_schedule {
        let mut s = Complex64::new(0.0, 0.0);
        for &(l, al, t_l) in &terms {
            s += al * (t_l * (-eta * f64::from(l)).exp());
        }
        sums.push(s);
    }
    let (extrap, delta) = extrapolate_to_zero(eta_schedule, &sums);
    let pref = pw_prefactor(params.n, config.p);
    let eta_min = *eta_schedule.last().unwrap();
    let truncation = tail * (-eta_min * f64::from(l_max)).exp();
    Ok(AmplitudeResult {
        value: pref * extrap,
        method: AmplitudeMethod::PartialWave,
        err_estimate: pref.norm() * (delta + truncation),
    })
}

/// Sign-sum closed form, valid when every kappa_i = 0:
/// f = pref * sum_{eps in {+-1}^n} (prod eps_i) (1 - sum_i eps_i c_i)^{-(n-1)/2 - i rho},
/// c_i = dir_in_i * dir_out_i.
pub fn amplitude_closed_k0(config: &ScatterConfig) -> Result<AmplitudeResult> {
    if config.params.kappa.iter().any(|&k| k != 0) {
        return Err(Error::KappaNotZero);
    }
    config.forward_guard()?;
    let n = config.params.n;
    let rho = config.rho;
    let s_re = 0.5 * (n as f64 - 1.0);
    let c: Vec<f64> = config
        .dir_in
        .iter()
        .zip(&config.dir_out)
        .map(|(a, b)| a * b)
        .collect();
    let mut sum = Complex64::new(0.0, 0.0);
    for mask in 0..(1u32 << n) {
        let mut sign = 1.0;
        let mut base = 1.0;
        for (i, &ci) in c.iter().enumerate() {
            if mask >> i & 1 == 1 {
                base -= ci;
            } else {
                sign = -sign;
                base += ci;
            }
        }
        // base > 0 off-forward; principal power of a positive real
        let ln_base = base.ln();
        let power = (-s_re * ln_base) * 1.0;
        let phase = -rho * ln_base;
        sum += sign * power.exp() * Complex64::new(phase.cos(), phase.sin());
    }
    let pref = kernel_prefactor(n, config.p, rho, s_re)?;
    let value = pref * sum;
    Ok(AmplitudeResult {
        value,
        method: AmplitudeMethod::ClosedK0,
        err_estimate: 1e-14 * value.norm().max(pref.norm()),
    })
}

/// The n-dimensional Coulomb reference amplitude with kernel
/// (1 - dir_in . dir_out)^{-(n-1)/2 - i rho}; not equal to the sign-sum
/// closed form (the octant boundary condition changes the amplitude).
pub fn amplitude_coulomb(config: &ScatterConfig) -> Result<AmplitudeResult> {
    config.forward_guard()?;
    let n = config.params.n;
    let rho = config.rho;
    let s_re = 0.5 * (n as f64 - 1.0);
    let base = 1.0 - config.cos_separation();
    let ln_base = base.ln();
    let kernel = (-s_re * ln_base).exp()
        * Complex64::new((-rho * ln_base).cos(), (-rho * ln_base).sin());
    let pref = kernel_prefactor(n, config.p, rho, s_re)?;
    let value = pref * kernel;
    Ok(AmplitudeResult {
        value,
        method: AmplitudeMethod::Coulomb,
        err_estimate: 1e-14 * value.norm(),
    })
}

/// Tensor Gauss-Legendre evaluation of the n-fold kernel integral in
/// t_i = cos(alpha_i).
fn kernel_integral(config: &ScatterConfig, nodes_per_axis: usize) -> Result<Complex64> {
    let n = config.params.n;
    let rho = config.rho;
    let s_re = 1.5 * n as f64 - 0.5;
    let (nodes, weights) = gauss_legendre(nodes_per_axis);
    // per-axis tables: c_i t_k, w_k P_{kappa_i}(t_k)
    let mut ct = vec![vec![0.0; nodes_per_axis]; n];
    let mut wp = vec![vec![0.0; nodes_per_axis]; n];
    for i in 0..n {
        let ci = config.dir_in[i] * config.dir_out[i];
        for k in 0..nodes_per_axis {
            ct[i][k] = ci * nodes[k];
            wp[i][k] = weights[k] * legendre(config.params.kappa[i], nodes[k])?;
        }
    }
    let mut idx = vec![0usize; n];
    let mut total = Complex64::new(0.0, 0.0);
    loop {
        let mut base = 1.0;
        let mut w = 1.0;
        for i in 0..n {
            base -= ct[i][idx[i]];
            w *= wp[i][idx[i]];
        }
        let ln_base = base.ln();
        total += w
            * (-s_re * ln_base).exp()
            * Complex64::new((-rho * ln_base).cos(), (-rho * ln_base).sin());
        // odometer
        let mut axis = 0;
        loop {
            idx[axis] += 1;
            if idx[axis] < nodes_per_axis {
                break;
            }
            idx[axis] = 0;
            axis += 1;
            if axis == n {
                return Ok(total);
            }
        }
    }
}

/// Integral-representation amplitude via tensor Gauss-Legendre quadrature,
/// with node-count doubling for the error estimate.
pub fn amplitude_integral(
    config: &ScatterConfig,
    nodes_per_axis: usize,
    tol: f64,
) -> Result<AmplitudeResult> {
    config.forward_guard()?;
    if nodes_per_axis < 2 {
        return Err(Error::Domain("need at least 2 quadrature nodes per axis".into()));
    }
    let n = config.params.n;
    let lambda_pair: f64 = config
        .dir_in
        .iter()
        .chain(&config.dir_out)
        .product();
    let pref = kernel_prefactor(n, config.p, config.rho, 1.5 * n as f64 - 0.5)?;
    let coarse = kernel_integral(config, nodes_per_axis)?;
    let fine = kernel_integral(config, 2 * nodes_per_axis)?;
    let value = pref * lambda_pair * fine;
    let err = (pref * lambda_pair * (fine - coarse)).norm();
    if err > tol * value.norm().max(1e-300) {
        return Err(Error::QuadratureNotConverged {
            err,
            tol: tol * value.norm(),
        });
    }
    Ok(AmplitudeResult {
        value,
        method: AmplitudeMethod::Integral,
        err_estimate: err,
    })
}

/// Differential cross-section |f|^2 for the chosen method, using the
/// default numerical knobs (l_max and eta schedule for the partial-wave
/// sum, node counts for the quadrature).
pub fn cross_section(config: &ScatterConfig, method: AmplitudeMethod) -> Result<f64> {
    let result = match method {
        AmplitudeMethod::PartialWave => {
            amplitude_pw(config, default_l_max(config.params.n), &DEFAULT_ETA_SCHEDULE)?
        }
        AmplitudeMethod::ClosedK0 => amplitude_closed_k0(config)?,
        AmplitudeMethod::Coulomb => amplitude_coulomb(config)?,
        AmplitudeMethod::Integral => {
            amplitude_integral(config, DEFAULT_NODES_PER_AXIS, 1e-6)?
        }
    };
    Ok(result.value.norm_sqr())
}

/// Default partial-wave cutoff: large enough that the slowest Abel factor
/// damps the tail below the extrapolation error, kept tractable in higher
/// dimensions where the M-degeneracy grows.
pub fn default_l_max(n: usize) -> u32 {
    match n {
        0..=2 => 1200,
        3 => 600,
        _ => 200,
    }
}
