//! Model parameters and the quantum-number lattice: branching-rule
//! validation and bound-state enumeration.
//!
//! Conventions. `kappa[i]` is the barrier integer attached to coordinate
//! x_{i+1} in the potential. The subgroup chain that labels the bound basis
//! splits coordinates off starting from the *last* one, so the chain-side
//! formulas (branching steps, angular factors) see the barrier integers in
//! reverse coordinate order; this module owns that bookkeeping.

use crate::error::{Error, Result, Violation};

/// One physical system: dimension, Coulomb strength, barrier integers and
/// magnetic labels.
///
/// The magnetic labels `sigma` are carried and validated (|sigma_i| <=
/// kappa_i) but do not affect energies, S-matrix elements or the octant
/// wavefunctions; they only label the 2-sphere harmonics of the embedding
/// space.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub n: usize,
    pub gamma: f64,
    pub kappa: Vec<u32>,
    pub sigma: Vec<i32>,
}

impl ModelParams {
    /// System with all magnetic labels zero.
    pub fn new(gamma: f64, kappa: Vec<u32>) -> Result<Self> {
        let sigma = vec![0; kappa.len()];
        Self::with_sigma(gamma, kappa, sigma)
    }

    pub fn with_sigma(gamma: f64, kappa: Vec<u32>, sigma: Vec<i32>) -> Result<Self> {
        let n = kappa.len();
        if n == 0 {
            return Err(Error::Domain("dimension n must be at least 1".into()));
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::Domain(format!("gamma must be positive, got {}", gamma)));
        }
        if sigma.len() != n {
            return Err(Error::Domain(format!(
                "sigma has {} entries for dimension {}",
                sigma.len(),
                n
            )));
        }
        for (i, (&k, &s)) in kappa.iter().zip(&sigma).enumerate() {
            if s.unsigned_abs() > k {
                return Err(Error::Domain(format!(
                    "|sigma_{}| = {} exceeds kappa_{} = {}",
                    i + 1,
                    s,
                    i + 1,
                    k
                )));
            }
        }
        Ok(ModelParams { n, gamma, kappa, sigma })
    }

    /// Sum of the barrier integers; the minimum admissible principal label j.
    pub fn kappa_sum(&self) -> u32 {
        self.kappa.iter().sum()
    }

    /// Barrier integer seen by chain node `c` (1-based): the chain strips
    /// coordinates from the back, so node c pairs with kappa[n - c].
    pub(crate) fn chain_kappa(&self, c: usize) -> u32 {
        self.kappa[self.n - c]
    }
}

/// Quantum numbers (j, l, m_1..m_{n-2}) of one bound basis state; `m` is
/// empty for n <= 2.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BoundLabels {
    pub j: u32,
    pub l: u32,
    pub m: Vec<u32>,
}

impl BoundLabels {
    pub fn new(j: u32, l: u32, m: Vec<u32>) -> Self {
        BoundLabels { j, l, m }
    }

    /// Chain label m_p with m_0 = l.
    pub fn chain_label(&self, p: usize) -> u32 {
        if p == 0 {
            self.l
        } else {
            self.m[p - 1]
        }
    }
}

fn even_nonneg(value: i64) -> bool {
    value >= 0 && value % 2 == 0
}

/// Check all branching constraints; returns the complete list of violations
/// (empty means the labels are valid for these parameters).
pub fn validate(params: &ModelParams, labels: &BoundLabels) -> Vec<Violation> {
    let n = params.n;
    let mut violations = Vec::new();

    let expected_m = n.saturating_sub(2);
    if labels.m.len() != expected_m {
        violations.push(Violation::LabelLength {
            expected: expected_m,
            got: labels.m.len(),
        });
        return violations;
    }

    if labels.j < labels.l {
        violations.push(Violation::RadialCountNegative {
            j: labels.j,
            l: labels.l,
        });
    }

    if n == 1 {
        if labels.l != params.kappa[0] {
            violations.push(Violation::OneDimLabel {
                l: labels.l,
                kappa: params.kappa[0],
            });
        }
        return violations;
    }

    // chain steps: (m_{i-1} - m_i - kappa_chain(i)) even nonnegative, i = 1..n-2
    for i in 1..=n.saturating_sub(2) {
        let diff = i64::from(labels.chain_label(i - 1))
            - i64::from(labels.chain_label(i))
            - i64::from(params.chain_kappa(i));
        if !even_nonneg(diff) {
            violations.push(Violation::ChainStep { node: i, value: diff });
        }
    }
    // final step: (m_{n-2} - kappa_chain(n-1) - kappa_chain(n)) even nonnegative;
    // for n = 2 this reads (l - kappa_1 - kappa_2).
    let last = i64::from(labels.chain_label(n - 2))
        - i64::from(params.kappa[0])
        - i64::from(params.kappa[1]);
    if !even_nonneg(last) {
        violations.push(Violation::ChainStep {
            node: n - 1,
            value: last,
        });
    }
    violations
}

/// All valid (l, m) label sets for the given principal label j, in
/// lexicographic order on (l, m_1, ..., m_{n-2}).
pub fn enumerate_states(params: &ModelParams, j: u32) -> Result<Vec<BoundLabels>> {
    let min = params.kappa_sum();
    if j < min {
        return Err(Error::EmptySpectrum { j, min });
    }
    let mut out = Vec::new();
    for l in 0..=j {
        out.extend(states_with_l(params, j, l));
    }
    Ok(out)
}

/// Valid label sets with a fixed angular label l, lexicographic in m.
pub(crate) fn states_with_l(params: &ModelParams, j: u32, l: u32) -> Vec<BoundLabels> {
    let n = params.n;
    if j < l {
        return Vec::new();
    }
    if n == 1 {
        return if l == params.kappa[0] {
            vec![BoundLabels::new(j, l, Vec::new())]
        } else {
            Vec::new()
        };
    }
    let mut out = Vec::new();
    let mut m = Vec::with_capacity(n - 2);
    extend_chain(params, j, l, 1, &mut m, &mut out);
    out
}

/// Depth-first extension of the chain labels m_1..m_{n-2} under the parity
/// and ordering constraints; pushes completed label sets onto `out`.
fn extend_chain(
    params: &ModelParams,
    j: u32,
    l: u32,
    node: usize,
    m: &mut Vec<u32>,
    out: &mut Vec<BoundLabels>,
) {
    let n = params.n;
    if node == n - 1 {
        let labels = BoundLabels::new(j, l, m.clone());
        if validate(params, &labels).is_empty() {
            out.push(labels);
        }
        return;
    }
    let prev = if node == 1 { l } else { m[node - 2] };
    let kc = params.chain_kappa(node);
    if prev < kc {
        return;
    }
    let max = prev - kc;
    // m_node runs over max, max-2, ..., >= 0 -- ascending for lexicographic order
    let mut candidates: Vec<u32> = (0..=max).filter(|v| (max - v) % 2 == 0).collect();
    candidates.sort_unstable();
    for cand in candidates {
        m.push(cand);
        extend_chain(params, j, l, node + 1, m, out);
        m.pop();
    }
}

/// Barrier strength produced by a rank-q construction with integer label k:
/// beta = (k + (q-2)/2)^2 - 1/4. For q = 3 this reduces to k(k+1).
pub fn potential_strength(q: u32, k: u32) -> Result<f64> {
    if q < 2 {
        return Err(Error::Domain(format!("potential_strength needs q >= 2, got {}", q)));
    }
    let half = f64::from(q - 2) / 2.0;
    let base = f64::from(k) + half;
    Ok(base * base - 0.25)
}
