//! Grid-based application of the Hamiltonian and the 2n-1 conserved
//! operators via centered finite-difference stencils, plus commutator- and
//! eigen-residual measurement.
//!
//! Operators are built from small symbolic term lists (coefficient-times-
//! derivative) compiled against a rectangular octant grid. Every stencil
//! pass consumes one footprint radius of boundary cells; compositions track
//! the invalid border so residual norms run over certified-interior points
//! only. All coefficients are real: the quartic invariant's complex
//! first-derivative piece becomes a real coefficient once the momentum
//! operators are expanded, so real fields map to real fields exactly.

use crate::bound::{energy, psi, OctantPoint};
use crate::error::{Error, Result};
use crate::qnum::{BoundLabels, ModelParams};

/// Samples closer to a coordinate plane than this many grid spacings are
/// rejected; the inverse-square terms are evaluated analytically at nodes
/// and need clearance from the singularity.
pub const SINGULAR_MARGIN_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StencilOrder {
    Two,
    Four,
    Six,
}

impl StencilOrder {
    pub fn order(self) -> usize {
        match self {
            StencilOrder::Two => 2,
            StencilOrder::Four => 4,
            StencilOrder::Six => 6,
        }
    }

    pub fn radius(self) -> usize {
        self.order() / 2
    }

    fn d1_coeffs(self) -> &'static [f64] {
        match self {
            StencilOrder::Two => &[-0.5, 0.0, 0.5],
            StencilOrder::Four => &[1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0],
            StencilOrder::Six => &[
                -1.0 / 60.0,
                3.0 / 20.0,
                -0.75,
                0.0,
                0.75,
                -3.0 / 20.0,
                1.0 / 60.0,
            ],
        }
    }

    fn d2_coeffs(self) -> &'static [f64] {
        match self {
            StencilOrder::Two => &[1.0, -2.0, 1.0],
            StencilOrder::Four => &[-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0],
            StencilOrder::Six => &[
                1.0 / 90.0,
                -3.0 / 20.0,
                1.5,
                -49.0 / 18.0,
                1.5,
                -3.0 / 20.0,
                1.0 / 90.0,
            ],
        }
    }
}

impl std::str::FromStr for StencilOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2" => Ok(StencilOrder::Two),
            "4" => Ok(StencilOrder::Four),
            "6" => Ok(StencilOrder::Six),
            _ => Err(Error::Domain(format!("stencil order {} not in {{2,4,6}}", s))),
        }
    }
}

/// Rectangular grid on the open octant: axis i samples
/// mins[i], mins[i]+h_i, ..., maxs[i] with shape[i] points.
#[derive(Debug, Clone)]
pub struct OctantGrid {
    mins: Vec<f64>,
    spacing: Vec<f64>,
    shape: Vec<usize>,
    strides: Vec<usize>,
}

impl OctantGrid {
    pub fn new(mins: Vec<f64>, maxs: Vec<f64>, shape: Vec<usize>) -> Result<Self> {
        let n = mins.len();
        if n == 0 || maxs.len() != n || shape.len() != n {
            return Err(Error::Domain("grid extent/shape arrays disagree".into()));
        }
        let mut spacing = Vec::with_capacity(n);
        for i in 0..n {
            if shape[i] < 2 {
                return Err(Error::Domain(format!("axis {} needs at least 2 points", i)));
            }
            if !(mins[i] > 0.0) || !(maxs[i] > mins[i]) {
                return Err(Error::Domain(format!(
                    "axis {} extent [{}, {}] must sit inside the open octant",
                    i, mins[i], maxs[i]
                )));
            }
            let h = (maxs[i] - mins[i]) / (shape[i] - 1) as f64;
            if mins[i] < SINGULAR_MARGIN_FACTOR * h {
                return Err(Error::SingularMargin {
                    axis: i,
                    min: mins[i],
                    margin: SINGULAR_MARGIN_FACTOR * h,
                });
            }
            spacing.push(h);
        }
        let mut strides = vec![0usize; n];
        let mut acc = 1usize;
        for i in (0..n).rev() {
            strides[i] = acc;
            acc *= shape[i];
        }
        Ok(OctantGrid {
            mins,
            spacing,
            shape,
            strides,
        })
    }

    pub fn ndim(&self) -> usize {
        self.mins.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn coord(&self, axis: usize, idx: usize) -> f64 {
        self.mins[axis] + self.spacing[axis] * idx as f64
    }
}

/// Scalar field on an [`OctantGrid`]. `border` counts boundary cells (per
/// side, all axes) whose samples are not certified; stencil passes widen it.
#[derive(Debug, Clone)]
pub struct GridField {
    pub grid: OctantGrid,
    pub samples: Vec<f64>,
    pub border: usize,
    pub order: StencilOrder,
}

impl GridField {
    /// Sample an analytic function on every grid node.
    pub fn sample<F: Fn(&[f64]) -> f64>(grid: &OctantGrid, order: StencilOrder, f: F) -> Self {
        let n = grid.ndim();
        let mut samples = vec![0.0; grid.len()];
        let mut idx = vec![0usize; n];
        let mut x = vec![0.0; n];
        for ax in 0..n {
            x[ax] = grid.coord(ax, 0);
        }
        for (flat, slot) in samples.iter_mut().enumerate() {
            *slot = f(&x);
            let _ = flat;
            // advance odometer (last axis fastest)
            let mut ax = n;
            while ax > 0 {
                ax -= 1;
                idx[ax] += 1;
                if idx[ax] < grid.shape[ax] {
                    x[ax] = grid.coord(ax, idx[ax]);
                    break;
                }
                idx[ax] = 0;
                x[ax] = grid.coord(ax, 0);
            }
        }
        GridField {
            grid: grid.clone(),
            samples,
            border: 0,
            order,
        }
    }

    fn interior_fold<A, F: FnMut(A, f64, usize) -> A>(&self, border: usize, init: A, mut f: F) -> A {
        let n = self.grid.ndim();
        let mut acc = init;
        let mut idx = vec![border; n];
        if self.grid.shape.iter().any(|&s| s < 2 * border + 1) {
            return acc;
        }
        let mut flat = 0usize;
        for ax in 0..n {
            flat += border * self.grid.strides[ax];
        }
        loop {
            acc = f(acc, self.samples[flat], flat);
            let mut ax = n;
            let mut done = true;
            while ax > 0 {
                ax -= 1;
                if idx[ax] + 1 < self.grid.shape[ax] - border {
                    idx[ax] += 1;
                    flat += self.grid.strides[ax];
                    done = false;
                    break;
                }
                flat -= (idx[ax] - border) * self.grid.strides[ax];
                idx[ax] = border;
            }
            if done {
                return acc;
            }
        }
    }

    /// L2 norm over the interior excluding `border` cells per side.
    pub fn interior_l2(&self, border: usize) -> f64 {
        self.interior_fold(border, 0.0, |a, v, _| a + v * v).sqrt()
    }

    /// Max-abs norm over the interior excluding `border` cells per side.
    pub fn interior_max(&self, border: usize) -> f64 {
        self.interior_fold(border, 0.0f64, |a, v, _| a.max(v.abs()))
    }
}

type Coef = Box<dyn Fn(&[f64]) -> f64 + Sync + Send>;

enum Term {
    /// coef(x) * d/dx_axis
    D1(usize, Coef),
    /// coef(x) * d^2/dx_axis^2
    D2(usize, Coef),
    /// coef(x) * d^2/(dx_a dx_b), a != b
    Mixed(usize, usize, Coef),
    /// coef(x) * identity
    Mul(Coef),
}

struct TermOp {
    terms: Vec<Term>,
}

impl TermOp {
    fn radius(&self, order: StencilOrder) -> usize {
        if self.terms.iter().all(|t| matches!(t, Term::Mul(_))) {
            0
        } else {
            order.radius()
        }
    }
}

enum OpNode {
    Pass(TermOp),
    Compose(Box<OpNode>, Box<OpNode>), // Compose(a, b): a(b(f))
    Sum(Vec<(f64, OpNode)>),
}

impl OpNode {
    fn border_cost(&self, order: StencilOrder) -> usize {
        match self {
            OpNode::Pass(t) => t.radius(order),
            OpNode::Compose(a, b) => a.border_cost(order) + b.border_cost(order),
            OpNode::Sum(items) => items
                .iter()
                .map(|(_, n)| n.border_cost(order))
                .max()
                .unwrap_or(0),
        }
    }
}

/// Which conserved operator a [`DiffOperator`] realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// H = -(1/2) Laplacian - gamma/r + sum kappa_i(kappa_i+1)/(2 x_i^2)
    Hamiltonian,
    /// Rotor Casimir plus barriers over the leading coordinate block
    /// x_1..x_{n-p} (p = 0..n-2); diagonal on the bound basis.
    LeadingCasimir(usize),
    /// Same structure over the trailing block x_{q+1}..x_n (q = 1..n-2).
    TrailingCasimir(usize),
    /// The quartic invariant built from the squared accelerated-dilation
    /// generator on axis 1.
    QuarticInvariant,
    /// Multiplication by x_1: a deliberate non-invariant used as the
    /// negative control of the commutator harness.
    CoordinateMultiplier,
}

impl std::fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OperatorKind::Hamiltonian => write!(f, "H"),
            OperatorKind::LeadingCasimir(p) => write!(f, "I_{}", p),
            OperatorKind::TrailingCasimir(q) => write!(f, "J_{}", q),
            OperatorKind::QuarticInvariant => write!(f, "J_quartic"),
            OperatorKind::CoordinateMultiplier => write!(f, "x_1*"),
        }
    }
}

/// A differential operator compiled to stencil plans for a fixed model.
pub struct DiffOperator {
    pub kind: OperatorKind,
    node: OpNode,
}

fn barrier_coefs(params: &ModelParams) -> Vec<f64> {
    params
        .kappa
        .iter()
        .map(|&k| f64::from(k) * f64::from(k + 1))
        .collect()
}

fn radius2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

impl DiffOperator {
    pub fn hamiltonian(params: &ModelParams) -> Self {
        let n = params.n;
        let q = barrier_coefs(params);
        let gamma = params.gamma;
        let mut terms: Vec<Term> = (0..n)
            .map(|ax| Term::D2(ax, Box::new(|_: &[f64]| -0.5) as Coef))
            .collect();
        terms.push(Term::Mul(Box::new(move |x: &[f64]| {
            let mut v = -gamma / radius2(x).sqrt();
            for (i, qi) in q.iter().enumerate() {
                if *qi != 0.0 {
                    v += 0.5 * qi / (x[i] * x[i]);
                }
            }
            v
        })));
        DiffOperator {
            kind: OperatorKind::Hamiltonian,
            node: OpNode::Pass(TermOp { terms }),
        }
    }

    /// Shared builder for the quadratic block invariants: rotor Casimir over
    /// the index set plus (sum_S x_i^2)(sum_S q_j / x_j^2).
    fn block_casimir(params: &ModelParams, set: Vec<usize>, kind: OperatorKind) -> Self {
        let q = barrier_coefs(params);
        let mut terms: Vec<Term> = Vec::new();
        let count = set.len();
        for (a, &i) in set.iter().enumerate() {
            // merged second-derivative coefficient: -(sum_{j in S, j != i} x_j^2)
            let others: Vec<usize> = set
                .iter()
                .copied()
                .filter(|&j| j != i)
                .collect();
            terms.push(Term::D2(
                i,
                Box::new(move |x: &[f64]| -others.iter().map(|&j| x[j] * x[j]).sum::<f64>()),
            ));
            // merged first-derivative: (|S|-1) x_i d_i
            let fac = (count - 1) as f64;
            terms.push(Term::D1(i, Box::new(move |x: &[f64]| fac * x[i])));
            for &jx in set.iter().skip(a + 1) {
                terms.push(Term::Mixed(
                    i,
                    jx,
                    Box::new(move |x: &[f64]| 2.0 * x[i] * x[jx]),
                ));
            }
        }
        let set_mul = set.clone();
        let qs = q;
        terms.push(Term::Mul(Box::new(move |x: &[f64]| {
            let r2: f64 = set_mul.iter().map(|&i| x[i] * x[i]).sum();
            let mut w = 0.0;
            for &jx in &set_mul {
                if qs[jx] != 0.0 {
                    w += qs[jx] / (x[jx] * x[jx]);
                }
            }
            r2 * w
        })));
        DiffOperator {
            kind,
            node: OpNode::Pass(TermOp { terms }),
        }
    }

    /// I_p over the leading block x_1..x_{n-p}; valid for p in [0, n-2].
    pub fn leading_casimir(params: &ModelParams, p: usize) -> Result<Self> {
        if params.n < 2 || p > params.n - 2 {
            return Err(Error::Domain(format!(
                "leading block index p = {} outside [0, {}]",
                p,
                params.n.saturating_sub(2)
            )));
        }
        Ok(Self::block_casimir(
            params,
            (0..params.n - p).collect(),
            OperatorKind::LeadingCasimir(p),
        ))
    }

    /// J_q over the trailing block x_{q+1}..x_n; valid for q in [1, n-2].
    pub fn trailing_casimir(params: &ModelParams, q: usize) -> Result<Self> {
        if params.n < 3 || q == 0 || q > params.n - 2 {
            return Err(Error::Domain(format!(
                "trailing block index q = {} outside [1, {}]",
                q,
                params.n.saturating_sub(2)
            )));
        }
        Ok(Self::block_casimir(
            params,
            (q..params.n).collect(),
            OperatorKind::TrailingCasimir(q),
        ))
    }

    /// The accelerated-dilation generator on axis 1 with the barrier terms
    /// folded in: sum_{k>0} x_1 d_k^2 - sum_{k>0} x_k d_k d_1 - ((n-1)/2) d_1
    /// + gamma x_1 / r - x_1 sum_i q_i / x_i^2. (The x_1 d_1^2 pieces of the
    /// two second-derivative groups cancel exactly.)
    fn accel_dilation(params: &ModelParams) -> TermOp {
        let n = params.n;
        let gamma = params.gamma;
        let q = barrier_coefs(params);
        let mut terms: Vec<Term> = Vec::new();
        for k in 1..n {
            terms.push(Term::D2(k, Box::new(|x: &[f64]| x[0])));
            terms.push(Term::Mixed(0, k, Box::new(move |x: &[f64]| -x[k])));
        }
        let half = 0.5 * (n as f64 - 1.0);
        terms.push(Term::D1(0, Box::new(move |_: &[f64]| -half)));
        terms.push(Term::Mul(Box::new(move |x: &[f64]| {
            let mut v = gamma * x[0] / radius2(x).sqrt();
            for (i, qi) in q.iter().enumerate() {
                if *qi != 0.0 {
                    v -= x[0] * qi / (x[i] * x[i]);
                }
            }
            v
        })));
        TermOp { terms }
    }

    /// Radial-momentum sandwich (p.x)(1/x_1^2)(x.p), expanded as
    /// f -> -(n + sum_j x_j d_j)[(1/x_1^2)(sum_k x_k d_k f)].
    fn radial_sandwich(params: &ModelParams) -> OpNode {
        let n = params.n;
        let dilation = TermOp {
            terms: (0..n)
                .map(|k| Term::D1(k, Box::new(move |x: &[f64]| x[k])) )
                .collect(),
        };
        let weight = TermOp {
            terms: vec![Term::Mul(Box::new(|x: &[f64]| 1.0 / (x[0] * x[0])))],
        };
        let mut outer_terms: Vec<Term> = (0..n)
            .map(|k| Term::D1(k, Box::new(move |x: &[f64]| -x[k])) )
            .collect();
        let nf = n as f64;
        outer_terms.push(Term::Mul(Box::new(move |_: &[f64]| -nf)));
        OpNode::Compose(
            Box::new(OpNode::Pass(TermOp { terms: outer_terms })),
            Box::new(OpNode::Compose(
                Box::new(OpNode::Pass(weight)),
                Box::new(OpNode::Pass(dilation)),
            )),
        )
    }

    fn quartic_with_tail(params: &ModelParams, tail_coef: f64) -> Result<Self> {
        if params.n < 2 {
            return Err(Error::Domain(
                "quartic invariant needs n >= 2 (for n = 1 the suite degenerates to {H})".into(),
            ));
        }
        let q1 = f64::from(params.kappa[0]) * f64::from(params.kappa[0] + 1);
        let a_sq = OpNode::Compose(
            Box::new(OpNode::Pass(Self::accel_dilation(params))),
            Box::new(OpNode::Pass(Self::accel_dilation(params))),
        );
        let mut items = vec![(1.0, a_sq)];
        if q1 != 0.0 {
            items.push((q1, Self::radial_sandwich(params)));
        }
        if tail_coef != 0.0 {
            items.push((
                tail_coef,
                OpNode::Pass(TermOp {
                    terms: vec![Term::Mul(Box::new(|x: &[f64]| 1.0 / (x[0] * x[0])))],
                }),
            ));
        }
        Ok(DiffOperator {
            kind: OperatorKind::QuarticInvariant,
            node: OpNode::Sum(items),
        })
    }

    /// The quartic invariant. The inverse-square tail carries the barrier
    /// factor kappa_1(kappa_1+1): J = A^2 + q_1 [(p.x)(1/x_1^2)(x.p)
    /// - (n-1)(n-3)/(4 x_1^2)]. With this coefficient the commutator with H
    /// vanishes identically (verified symbolically for n = 2..5); see
    /// [`DiffOperator::quartic_published`] for the printed variant.
    pub fn quartic(params: &ModelParams) -> Result<Self> {
        let n = params.n as f64;
        let q1 = f64::from(params.kappa[0]) * f64::from(params.kappa[0] + 1);
        Self::quartic_with_tail(params, -0.25 * (n - 1.0) * (n - 3.0) * q1)
    }

    /// The quartic operator with the inverse-square tail exactly as
    /// published, -(n-1)(n-3)/(4 x_1^2) without the barrier factor. For
    /// n != 3 (and kappa_1 such that q_1 != 1) this differs from
    /// [`DiffOperator::quartic`] by a multiple of 1/x_1^2 and does NOT
    /// commute with H; it is kept so the verification report can show the
    /// discrepancy pattern.
    pub fn quartic_published(params: &ModelParams) -> Result<Self> {
        let n = params.n as f64;
        Self::quartic_with_tail(params, -0.25 * (n - 1.0) * (n - 3.0))
    }

    /// Multiplication by x_1 -- the negative control.
    pub fn coordinate_multiplier() -> Self {
        DiffOperator {
            kind: OperatorKind::CoordinateMultiplier,
            node: OpNode::Pass(TermOp {
                terms: vec![Term::Mul(Box::new(|x: &[f64]| x[0]))],
            }),
        }
    }

    /// Boundary cells consumed by one application at the given order.
    pub fn border_cost(&self, order: StencilOrder) -> usize {
        self.node.border_cost(order)
    }
}

/// The full operator suite for the model: H, I_0..I_{n-2}, J_1..J_{n-2},
/// and the quartic invariant -- exactly 2n-1 operators in deterministic
/// order. For n = 1 the suite degenerates to {H} and is rejected.
pub fn suite(params: &ModelParams) -> Result<Vec<DiffOperator>> {
    if params.n < 2 {
        return Err(Error::Domain(
            "operator suite needs n >= 2; for n = 1 it degenerates to {H}".into(),
        ));
    }
    let mut ops = vec![DiffOperator::hamiltonian(params)];
    for p in 0..=params.n - 2 {
        ops.push(DiffOperator::leading_casimir(params, p)?);
    }
    for q in 1..=params.n.saturating_sub(2) {
        if q >= 1 && params.n >= 3 {
            ops.push(DiffOperator::trailing_casimir(params, q)?);
        }
    }
    ops.push(DiffOperator::quartic(params)?);
    debug_assert_eq!(ops.len(), 2 * params.n - 1);
    Ok(ops)
}

fn apply_pass(pass: &TermOp, field: &GridField) -> Result<GridField> {
    let grid = &field.grid;
    let n = grid.ndim();
    let r = pass.radius(field.order);
    let out_border = field.border + r;
    for ax in 0..n {
        if grid.shape[ax] < 2 * out_border + 1 {
            return Err(Error::Footprint {
                axis: ax,
                needed: 2 * out_border + 1,
                available: grid.shape[ax],
            });
        }
        if grid.mins[ax] < SINGULAR_MARGIN_FACTOR * grid.spacing[ax] {
            return Err(Error::SingularMargin {
                axis: ax,
                min: grid.mins[ax],
                margin: SINGULAR_MARGIN_FACTOR * grid.spacing[ax],
            });
        }
    }
    let sr = field.order.radius() as isize; // stencil table half-width
    let d1 = field.order.d1_coeffs();
    let d2 = field.order.d2_coeffs();
    let mut out = vec![0.0; field.samples.len()];
    let samples = &field.samples;

    let mut idx = vec![out_border; n];
    let mut x = vec![0.0; n];
    for ax in 0..n {
        x[ax] = grid.coord(ax, out_border);
    }
    let mut flat: usize = (0..n).map(|ax| out_border * grid.strides[ax]).sum();
    loop {
        let mut acc = 0.0;
        for term in &pass.terms {
            match term {
                Term::Mul(c) => acc += c(&x) * samples[flat],
                Term::D1(ax, c) => {
                    let coef = c(&x);
                    if coef != 0.0 {
                        let stride = grid.strides[*ax] as isize;
                        let mut s = 0.0;
                        for (k, w) in d1.iter().enumerate() {
                            if *w != 0.0 {
                                let off = (k as isize - sr) * stride;
                                s += w * samples[(flat as isize + off) as usize];
                            }
                        }
                        acc += coef * s / grid.spacing[*ax];
                    }
                }
                Term::D2(ax, c) => {
                    let coef = c(&x);
                    if coef != 0.0 {
                        let stride = grid.strides[*ax] as isize;
                        let mut s = 0.0;
                        for (k, w) in d2.iter().enumerate() {
                            let off = (k as isize - sr) * stride;
                            s += w * samples[(flat as isize + off) as usize];
                        }
                        acc += coef * s / (grid.spacing[*ax] * grid.spacing[*ax]);
                    }
                }
                Term::Mixed(ax_a, ax_b, c) => {
                    let coef = c(&x);
                    if coef != 0.0 {
                        let sa = grid.strides[*ax_a] as isize;
                        let sb = grid.strides[*ax_b] as isize;
                        let mut s = 0.0;
                        for (ka, wa) in d1.iter().enumerate() {
                            if *wa == 0.0 {
                                continue;
                            }
                            let base = flat as isize + (ka as isize - sr) * sa;
                            for (kb, wb) in d1.iter().enumerate() {
                                if *wb != 0.0 {
                                    s += wa * wb
                                        * samples[(base + (kb as isize - sr) * sb) as usize];
                                }
                            }
                        }
                        acc += coef * s / (grid.spacing[*ax_a] * grid.spacing[*ax_b]);
                    }
                }
            }
        }
        out[flat] = acc;

        let mut ax = n;
        let mut done = true;
        while ax > 0 {
            ax -= 1;
            if idx[ax] + 1 < grid.shape[ax] - out_border {
                idx[ax] += 1;
                flat += grid.strides[ax];
                x[ax] = grid.coord(ax, idx[ax]);
                done = false;
                break;
            }
            flat -= (idx[ax] - out_border) * grid.strides[ax];
            idx[ax] = out_border;
            x[ax] = grid.coord(ax, out_border);
        }
        if done {
            break;
        }
    }
    Ok(GridField {
        grid: grid.clone(),
        samples: out,
        border: out_border,
        order: field.order,
    })
}

fn apply_node(node: &OpNode, field: &GridField) -> Result<GridField> {
    match node {
        OpNode::Pass(p) => apply_pass(p, field),
        OpNode::Compose(a, b) => apply_node(a, &apply_node(b, field)?),
        OpNode::Sum(items) => {
            let mut acc: Option<GridField> = None;
            for (w, child) in items {
                let part = apply_node(child, field)?;
                match &mut acc {
                    None => {
                        let mut part = part;
                        if *w != 1.0 {
                            for v in &mut part.samples {
                                *v *= w;
                            }
                        }
                        acc = Some(part);
                    }
                    Some(total) => {
                        total.border = total.border.max(part.border);
                        for (t, s) in total.samples.iter_mut().zip(&part.samples) {
                            *t += w * s;
                        }
                    }
                }
            }
            acc.ok_or_else(|| Error::Domain("empty operator sum".into()))
        }
    }
}

/// Apply `op` to `f`; the returned field's `border` marks the boundary layer
/// where the composed stencil footprint did not fit.
pub fn apply(op: &DiffOperator, f: &GridField) -> Result<GridField> {
    apply_node(&op.node, f)
}

/// Relative commutator residual ||A(Bf) - B(Af)||_2 / ||A(Bf)||_2 over the
/// common valid interior.
pub fn commutator_residual(a: &DiffOperator, b: &DiffOperator, f: &GridField) -> Result<f64> {
    let ab = apply(a, &apply(b, f)?)?;
    let ba = apply(b, &apply(a, f)?)?;
    commutator_norms(ab, ba)
}

/// Same as [`commutator_residual`] but evaluating the two composition orders
/// on two threads; bit-identical results.
pub fn commutator_residual_threaded(
    a: &DiffOperator,
    b: &DiffOperator,
    f: &GridField,
) -> Result<f64> {
    let (ab, ba) = std::thread::scope(|scope| {
        let h1 = scope.spawn(|| apply(a, &apply(b, f)?));
        let h2 = scope.spawn(|| apply(b, &apply(a, f)?));
        (h1.join().expect("apply thread panic"), h2.join().expect("apply thread panic"))
    });
    commutator_norms(ab?, ba?)
}

fn commutator_norms(ab: GridField, ba: GridField) -> Result<f64> {
    let border = ab.border.max(ba.border);
    let mut diff = ab.clone();
    for (d, s) in diff.samples.iter_mut().zip(&ba.samples) {
        *d -= s;
    }
    let denom = ab.interior_l2(border);
    let num = diff.interior_l2(border);
    if denom == 0.0 {
        return Ok(if num == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(num / denom)
}

/// Max-norm eigen-residual ||Op psi - ev psi||_inf / ||psi||_inf on the
/// valid interior, for a bound state sampled on the grid.
pub fn eigen_residual(
    op: &DiffOperator,
    eigenvalue: f64,
    params: &ModelParams,
    labels: &BoundLabels,
    grid: &OctantGrid,
    order: StencilOrder,
) -> Result<f64> {
    let field = GridField::sample(grid, order, |x| {
        psi(params, labels, &OctantPoint::new(x.to_vec()).expect("grid point in octant"))
            .expect("valid state")
    });
    let mut out = apply(op, &field)?;
    for (o, s) in out.samples.iter_mut().zip(&field.samples) {
        *o -= eigenvalue * s;
    }
    let border = out.border;
    let denom = field.interior_max(border);
    if denom == 0.0 {
        return Err(Error::Domain(
            "state vanishes on the grid interior; residual undefined".into(),
        ));
    }
    Ok(out.interior_max(border) / denom)
}

/// Hamiltonian eigen-residual ||H psi - E psi||_inf / ||psi||_inf.
pub fn hamiltonian_residual(
    params: &ModelParams,
    labels: &BoundLabels,
    grid: &OctantGrid,
    order: StencilOrder,
) -> Result<f64> {
    let h = DiffOperator::hamiltonian(params);
    let e = energy(params, labels.j)?;
    eigen_residual(&h, e, params, labels, grid, order)
}

/// Eigenvalue of the leading-block Casimir I_p on a bound state:
/// m_p (m_p + 3n - 3p - 2) + 2 (n-p)(n-p-1), with m_0 = l.
pub fn leading_casimir_eigenvalue(params: &ModelParams, labels: &BoundLabels, p: usize) -> f64 {
    let m = f64::from(labels.chain_label(p));
    let n = params.n as f64;
    let pf = p as f64;
    m * (m + 3.0 * n - 3.0 * pf - 2.0) + 2.0 * (n - pf) * (n - pf - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(gamma: f64, kappa: &[u32]) -> ModelParams {
        ModelParams::new(gamma, kappa.to_vec()).unwrap()
    }

    fn grid2(min: f64, max: f64, m: usize) -> OctantGrid {
        OctantGrid::new(vec![min, min], vec![max, max], vec![m, m]).unwrap()
    }

    #[test]
    fn suite_counts() {
        assert_eq!(suite(&params(1.0, &[0, 0])).unwrap().len(), 3);
        assert_eq!(suite(&params(1.0, &[0, 0, 0])).unwrap().len(), 5);
        assert_eq!(suite(&params(1.0, &[1, 0, 2, 1])).unwrap().len(), 7);
        assert!(suite(&params(1.0, &[1])).is_err());
    }

    #[test]
    fn suite_kind_order_is_deterministic() {
        let kinds: Vec<String> = suite(&params(1.0, &[0, 0, 0]))
            .unwrap()
            .iter()
            .map(|o| o.kind.to_string())
            .collect();
        assert_eq!(kinds, ["H", "I_0", "I_1", "J_1", "J_quartic"]);
    }

    /// Stencil engine against analytic derivatives of a smooth product
    /// function, term type by term type.
    #[test]
    fn term_engine_matches_analytic_derivatives() {
        let f = |x: &[f64]| (0.7 * x[0]).sin() * (0.3 * x[1]).exp();
        let fx = |x: &[f64]| 0.7 * (0.7 * x[0]).cos() * (0.3 * x[1]).exp();
        let fxx = |x: &[f64]| -0.49 * (0.7 * x[0]).sin() * (0.3 * x[1]).exp();
        let fxy = |x: &[f64]| 0.21 * (0.7 * x[0]).cos() * (0.3 * x[1]).exp();

        for (order, tol) in [
            (StencilOrder::Two, 5e-4),
            (StencilOrder::Four, 5e-7),
            (StencilOrder::Six, 5e-10),
        ] {
            let g = grid2(2.0, 4.0, 81);
            let field = GridField::sample(&g, order, f);
            let center = vec![3.0, 3.0];

            let checks: Vec<(TermOp, f64)> = vec![
                (
                    TermOp { terms: vec![Term::D1(0, Box::new(|_: &[f64]| 1.0))] },
                    fx(&center),
                ),
                (
                    TermOp { terms: vec![Term::D2(0, Box::new(|_: &[f64]| 1.0))] },
                    fxx(&center),
                ),
                (
                    TermOp { terms: vec![Term::Mixed(0, 1, Box::new(|_: &[f64]| 1.0))] },
                    fxy(&center),
                ),
                (
                    TermOp { terms: vec![Term::Mul(Box::new(|x: &[f64]| x[0] * x[1]))] },
                    9.0 * f(&center),
                ),
            ];
            for (op, expected) in checks {
                let out = apply_pass(&op, &field).unwrap();
                // center of the 81-point grid on [2,4] is index 40 on both axes
                let flat = 40 * g.strides[0] + 40;
                let got = out.samples[flat];
                assert!(
                    (got - expected).abs() <= tol * expected.abs().max(1.0),
                    "order {:?}: got {} expected {}",
                    order,
                    got,
                    expected
                );
            }
        }
    }

    #[test]
    fn hamiltonian_eigen_residual_six_order() {
        // spec-level target: <= 1e-6 with 6th-order stencils, tuned grid
        let p = params(1.0, &[1, 1]);
        let labels = BoundLabels::new(3, 2, vec![]);
        let grid = grid2(2.0, 14.0, 121);
        let res = hamiltonian_residual(&p, &labels, &grid, StencilOrder::Six).unwrap();
        assert!(res <= 1e-6, "residual {}", res);
    }

    #[test]
    fn leading_casimir_annihilates_radial_field() {
        // kappa = 0 and a rotation-invariant field: I_0 f = 0 analytically,
        // so the applied result is pure stencil truncation and must both be
        // small and shrink at the stencil order under refinement
        let p = params(1.0, &[0, 0]);
        let i0 = DiffOperator::leading_casimir(&p, 0).unwrap();
        let mut rels = Vec::new();
        for m in [81usize, 161] {
            let grid = grid2(2.0, 6.0, m);
            let f = GridField::sample(&grid, StencilOrder::Six, |x| {
                (-(radius2(x).sqrt() - 4.0).powi(2)).exp()
            });
            let out = apply(&i0, &f).unwrap();
            rels.push(out.interior_max(out.border) / f.interior_max(out.border));
        }
        assert!(rels[0] <= 1e-4, "rel = {}", rels[0]);
        assert!(
            rels[0] / rels[1] > 2.0f64.powi(5),
            "no sixth-order decay: {:?}",
            rels
        );
    }

    #[test]
    fn leading_casimir_eigen_relations() {
        // n=2, kappa=(0,0), l=0: eigenvalue 4
        let p = params(1.0, &[0, 0]);
        let labels = BoundLabels::new(0, 0, vec![]);
        assert_eq!(leading_casimir_eigenvalue(&p, &labels, 0), 4.0);
        let grid = grid2(3.0, 12.0, 121);
        let i0 = DiffOperator::leading_casimir(&p, 0).unwrap();
        let res = eigen_residual(&i0, 4.0, &p, &labels, &grid, StencilOrder::Six).unwrap();
        assert!(res <= 1e-4, "I_0 residual {}", res);

        // n=2, kappa=(1,1), l=2: eigenvalue l(l+4-2^...)+4 = 2*6+... = 16
        let p = params(1.0, &[1, 1]);
        let labels = BoundLabels::new(2, 2, vec![]);
        assert_eq!(leading_casimir_eigenvalue(&p, &labels, 0), 16.0);
        let res = eigen_residual(
            &DiffOperator::leading_casimir(&p, 0).unwrap(),
            16.0,
            &p,
            &labels,
            &grid,
            StencilOrder::Six,
        )
        .unwrap();
        assert!(res <= 1e-4, "I_0 residual {}", res);
    }

    #[test]
    fn casimir_eigen_relations_three_dim() {
        let p = params(1.0, &[1, 1, 0]);
        let labels = BoundLabels::new(2, 2, vec![2]);
        // I_0: l(l+3n-2)+2n(n-1) = 2*9+12 = 30; I_1: m(m+3n-5)+2(n-1)(n-2) = 2*6+4 = 16
        assert_eq!(leading_casimir_eigenvalue(&p, &labels, 0), 30.0);
        assert_eq!(leading_casimir_eigenvalue(&p, &labels, 1), 16.0);
        let grid = OctantGrid::new(vec![2.5; 3], vec![10.0; 3], vec![61; 3]).unwrap();
        for pp in [0usize, 1] {
            let op = DiffOperator::leading_casimir(&p, pp).unwrap();
            let ev = leading_casimir_eigenvalue(&p, &labels, pp);
            let res = eigen_residual(&op, ev, &p, &labels, &grid, StencilOrder::Six).unwrap();
            assert!(res <= 1e-4, "I_{} residual {}", pp, res);
        }
    }

    fn bump(params: &ModelParams, center: f64, width: f64) -> impl Fn(&[f64]) -> f64 + '_ {
        let q: Vec<i32> = params.kappa.iter().map(|&k| k as i32 + 1).collect();
        move |x: &[f64]| {
            let mut v = (-x.iter().map(|xi| (xi - center) * (xi - center)).sum::<f64>()
                / (2.0 * width * width))
                .exp();
            for (xi, e) in x.iter().zip(&q) {
                v *= xi.powi(*e);
            }
            v
        }
    }

    #[test]
    fn commutator_with_self_is_zero() {
        let p = params(1.0, &[1, 1]);
        let h = DiffOperator::hamiltonian(&p);
        let grid = grid2(2.0, 6.0, 49);
        let f = GridField::sample(&grid, StencilOrder::Four, bump(&p, 4.0, 0.8));
        assert_eq!(commutator_residual(&h, &h, &f).unwrap(), 0.0);
    }

    #[test]
    fn commutator_converges_and_negative_control_does_not() {
        let p = params(1.0, &[1, 1]);
        let h = DiffOperator::hamiltonian(&p);
        let i0 = DiffOperator::leading_casimir(&p, 0).unwrap();
        let ctrl = DiffOperator::coordinate_multiplier();
        let order = StencilOrder::Four;

        let mut residuals = Vec::new();
        for m in [41usize, 81, 161] {
            let grid = grid2(2.0, 6.0, m);
            let f = GridField::sample(&grid, order, bump(&p, 4.0, 0.8));
            residuals.push(commutator_residual(&h, &i0, &f).unwrap());
            let control = commutator_residual(&h, &ctrl, &f).unwrap();
            assert!(control >= 0.1, "negative control residual {}", control);
        }
        let order1 = (residuals[0] / residuals[1]).log2();
        let order2 = (residuals[1] / residuals[2]).log2();
        assert!(
            order1 >= order.order() as f64 - 1.0 && order2 >= order.order() as f64 - 1.0,
            "observed orders {:.2}, {:.2} (residuals {:?})",
            order1,
            order2,
            residuals
        );
        assert!(residuals[2] <= 1e-3, "finest residual {}", residuals[2]);
    }

    #[test]
    fn quartic_commutes_but_published_variant_does_not() {
        // kappa_1 = 3 gives the printed tail a large defect (the missing
        // barrier factor is 12): the corrected operator's commutator
        // residual is pure stencil error and decays at the stencil order,
        // while the printed variant stalls on its genuine commutator floor.
        let p = params(1.0, &[3, 1]);
        let h = DiffOperator::hamiltonian(&p);
        let good = DiffOperator::quartic(&p).unwrap();
        let printed = DiffOperator::quartic_published(&p).unwrap();

        let mut good_res = Vec::new();
        let mut printed_res = Vec::new();
        for m in [61usize, 121] {
            let grid = grid2(2.0, 6.0, m);
            let f = GridField::sample(&grid, StencilOrder::Four, bump(&p, 4.0, 0.7));
            good_res.push(commutator_residual(&h, &good, &f).unwrap());
            printed_res.push(commutator_residual(&h, &printed, &f).unwrap());
        }
        let order_good = (good_res[0] / good_res[1]).log2();
        let order_printed = (printed_res[0] / printed_res[1]).log2();
        assert!(
            order_good > 3.0,
            "corrected quartic order {:.2} (residuals {:?})",
            order_good,
            good_res
        );
        assert!(
            order_printed < 1.0 && printed_res[1] > 20.0 * good_res[1],
            "printed residuals {:?} (order {:.2}) vs corrected {:?}",
            printed_res,
            order_printed,
            good_res
        );
    }

    #[test]
    fn threaded_commutator_matches_serial() {
        let p = params(1.0, &[1, 1]);
        let h = DiffOperator::hamiltonian(&p);
        let q = DiffOperator::quartic(&p).unwrap();
        let grid = grid2(2.0, 6.0, 61);
        let f = GridField::sample(&grid, StencilOrder::Four, bump(&p, 4.0, 0.8));
        let a = commutator_residual(&h, &q, &f).unwrap();
        let b = commutator_residual_threaded(&h, &q, &f).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn footprint_and_margin_errors() {
        let p = params(1.0, &[0, 0]);
        let h = DiffOperator::hamiltonian(&p);
        // grid too small for a quartic composition at order six
        let grid = grid2(3.0, 4.0, 13);
        let f = GridField::sample(&grid, StencilOrder::Six, |x| x[0] + x[1]);
        let q = DiffOperator::quartic(&p).unwrap();
        assert!(matches!(
            commutator_residual(&h, &q, &f),
            Err(Error::Footprint { .. })
        ));
        // margin violation caught at grid construction
        assert!(matches!(
            OctantGrid::new(vec![0.05, 1.0], vec![2.0, 3.0], vec![41, 41]),
            Err(Error::SingularMargin { .. })
        ));
    }

    #[test]
    fn border_costs() {
        let p = params(1.0, &[1, 1]);
        assert_eq!(
            DiffOperator::hamiltonian(&p).border_cost(StencilOrder::Six),
            3
        );
        assert_eq!(
            DiffOperator::quartic(&p).unwrap().border_cost(StencilOrder::Six),
            6
        );
        assert_eq!(
            DiffOperator::coordinate_multiplier().border_cost(StencilOrder::Six),
            0
        );
    }
}
