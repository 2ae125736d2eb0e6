//! Implementations of the CLI subcommands.

use crate::report::{Cell, RunReport, Table};
use crspectra::bound::{
    angular_norm_constant, angular_norm_published, angular_Y, energy, radial_R,
    radial_constant_published, radial_norm_constant, scaled_u, BoundState,
};
use crspectra::operators::{
    commutator_residual, commutator_residual_threaded, hamiltonian_residual, suite, DiffOperator,
    GridField, OctantGrid, StencilOrder,
};
use crspectra::oracle::{
    bound_energy, degeneracy_clusters, grid_eigen_2d, mod_pi, phase_shift, Eigen2dOptions,
    RadialProblem,
};
use crspectra::qnum::{enumerate_states, BoundLabels, ModelParams};
use crspectra::quadrature::{gauss_legendre, integrate_radial};
use crspectra::scatter::{
    amplitude_closed_k0, amplitude_coulomb, amplitude_integral, amplitude_pw, default_l_max,
    AmplitudeResult, ScatterConfig, DEFAULT_ETA_SCHEDULE,
};
use crspectra::specfun::gamma_phase_ratio;

/// Errors mapped onto process exit codes: usage/validation -> 1; a
/// tolerance failure is not an error (the report carries it, exit 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl From<crspectra::Error> for UsageError {
    fn from(e: crspectra::Error) -> Self {
        UsageError(e.to_string())
    }
}

pub type CmdResult<T> = Result<T, UsageError>;

pub fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> CmdResult<Vec<T>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| UsageError(format!("cannot parse {} entry '{}'", what, s)))
        })
        .collect()
}

pub fn build_params(
    n: Option<usize>,
    gamma: f64,
    kappa: &str,
    sigma: Option<&str>,
) -> CmdResult<ModelParams> {
    let kappa: Vec<u32> = parse_list(kappa, "kappa")?;
    if let Some(n) = n {
        if n != kappa.len() {
            return Err(UsageError(format!(
                "--n {} disagrees with {} kappa entries",
                n,
                kappa.len()
            )));
        }
    }
    let params = match sigma {
        Some(s) => ModelParams::with_sigma(gamma, kappa, parse_list(s, "sigma")?)?,
        None => ModelParams::new(gamma, kappa)?,
    };
    Ok(params)
}

// ---------------------------------------------------------------- spectrum

pub fn spectrum(params: &ModelParams, jmax: u32) -> CmdResult<Table> {
    let jmin = params.kappa_sum();
    if jmax < jmin {
        return Err(UsageError(format!(
            "jmax = {} below the minimum principal label {}",
            jmax, jmin
        )));
    }
    let mut table = Table::new(&["j", "energy", "degeneracy", "method"]);
    for j in jmin..=jmax {
        let e = energy(params, j)?;
        let deg = enumerate_states(params, j)?.len();
        table.push(vec![
            Cell::Int(i64::from(j)),
            Cell::Num(e),
            Cell::Int(deg as i64),
            Cell::Text("formula".into()),
        ]);
    }
    Ok(table)
}

pub fn spectrum_plot(table: &Table) -> Table {
    let mut plot = Table::new(&["j", "energy"]);
    for row in &table.rows {
        plot.push(vec![row[0].clone(), row[1].clone()]);
    }
    plot
}

// ---------------------------------------------------------------- states

pub fn states(params: &ModelParams, j: u32) -> CmdResult<Table> {
    let mut columns: Vec<String> = vec!["l".into()];
    for i in 1..=params.n.saturating_sub(2) {
        columns.push(format!("m{}", i));
    }
    columns.push("energy".into());
    columns.push("method".into());
    let cols: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
    let mut table = Table::new(&cols);
    let e = energy(params, j)?;
    for s in enumerate_states(params, j)? {
        let mut row = vec![Cell::Int(i64::from(s.l))];
        row.extend(s.m.iter().map(|&m| Cell::Int(i64::from(m))));
        row.push(Cell::Num(e));
        row.push(Cell::Text("formula".into()));
        table.push(row);
    }
    Ok(table)
}

// ---------------------------------------------------------------- wavefn

#[allow(clippy::too_many_arguments)]
pub fn wavefn(
    params: &ModelParams,
    j: u32,
    l: u32,
    m: &[u32],
    r_max: f64,
    samples: usize,
    theta: Option<&[f64]>,
) -> CmdResult<Table> {
    if samples < 2 || !(r_max > 0.0) {
        return Err(UsageError("need r_max > 0 and at least 2 samples".into()));
    }
    let labels = BoundLabels::new(j, l, m.to_vec());
    let state = BoundState::new(params.clone(), labels.clone())?;
    let angular = match theta {
        Some(t) if params.n >= 2 => Some(angular_Y(params, &labels, t)?),
        Some(_) => Some(1.0),
        None => None,
    };
    let mut cols = vec!["r", "u", "R"];
    if angular.is_some() {
        cols.push("psi");
    }
    let mut table = Table::new(&cols);
    for k in 0..samples {
        let r = r_max * k as f64 / (samples - 1) as f64;
        let radial = state.radial(r)?;
        let mut row = vec![
            Cell::Num(r),
            Cell::Num(scaled_u(params, j, r)),
            Cell::Num(radial),
        ];
        if let Some(y) = angular {
            row.push(Cell::Num(radial * y));
        }
        table.push(row);
    }
    Ok(table)
}

pub fn wavefn_plot(table: &Table) -> Table {
    let mut plot = Table::new(&["r", "R"]);
    for row in &table.rows {
        plot.push(vec![row[0].clone(), row[2].clone()]);
    }
    plot
}

// ---------------------------------------------------------------- scatter

pub struct ScatterKnobs {
    pub l_max: Option<u32>,
    pub nodes: usize,
    pub tol: f64,
}

pub struct ScatterOutput {
    pub table: Table,
    pub checks: Vec<crate::report::Check>,
    pub pass: bool,
}

fn amplitude_row(table: &mut Table, r: &AmplitudeResult) {
    table.push(vec![
        Cell::Text(r.method.to_string()),
        Cell::Num(r.value.re),
        Cell::Num(r.value.im),
        Cell::Num(r.value.norm_sqr()),
        Cell::Num(r.err_estimate),
    ]);
}

pub fn scatter(
    params: &ModelParams,
    p: f64,
    dir_in: Vec<f64>,
    dir_out: Vec<f64>,
    method: &str,
    knobs: &ScatterKnobs,
) -> CmdResult<ScatterOutput> {
    let config = ScatterConfig::new(params.clone(), p, dir_in, dir_out)?;
    let l_max = knobs.l_max.unwrap_or_else(|| default_l_max(params.n));
    let mut table = Table::new(&["method", "re", "im", "cross_section", "err_estimate"]);
    let mut checks = Vec::new();
    let kappa_zero = params.kappa.iter().all(|&k| k == 0);

    let run_pw = || amplitude_pw(&config, l_max, &DEFAULT_ETA_SCHEDULE);
    let run_int = || amplitude_integral(&config, knobs.nodes, knobs.tol.max(1e-12));

    match method {
        "pw" => amplitude_row(&mut table, &run_pw()?),
        "closed" => amplitude_row(&mut table, &amplitude_closed_k0(&config)?),
        "coulomb" => amplitude_row(&mut table, &amplitude_coulomb(&config)?),
        "integral" => amplitude_row(&mut table, &run_int()?),
        "all" => {
            let pw = run_pw()?;
            let integral = run_int()?;
            let closed = if kappa_zero {
                Some(amplitude_closed_k0(&config)?)
            } else {
                None
            };
            amplitude_row(&mut table, &pw);
            if let Some(c) = &closed {
                amplitude_row(&mut table, c);
            }
            amplitude_row(&mut table, &integral);
            let reference = closed.as_ref().unwrap_or(&integral);
            let ref_norm = reference.value.norm().max(1e-300);
            let dev_pw = (pw.value - reference.value).norm() / ref_norm;
            checks.push(crate::report::Check {
                name: format!("partial_wave vs {} relative deviation", reference.method),
                method: "cross-method".into(),
                measured: dev_pw,
                expected: 0.0,
                tol: knobs.tol,
                pass: dev_pw <= knobs.tol,
            });
            if let Some(c) = &closed {
                let dev_int = (integral.value - c.value).norm() / ref_norm;
                checks.push(crate::report::Check {
                    name: "integral vs closed_k0 relative deviation".into(),
                    method: "cross-method".into(),
                    measured: dev_int,
                    expected: 0.0,
                    tol: knobs.tol,
                    pass: dev_int <= knobs.tol,
                });
            }
        }
        other => {
            return Err(UsageError(format!(
                "unknown method '{}' (pw|closed|coulomb|integral|all)",
                other
            )))
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(ScatterOutput { table, checks, pass })
}

/// Cross-section sweep over the outgoing angle (n = 2 only): columns
/// angle, dsigma/dOmega.
pub fn scatter_sweep(
    params: &ModelParams,
    p: f64,
    dir_in: Vec<f64>,
    points: usize,
) -> CmdResult<Table> {
    if params.n != 2 {
        return Err(UsageError("the sweep is parametrized by one angle (n = 2 only)".into()));
    }
    let mut table = Table::new(&["angle", "cross_section"]);
    for k in 0..points {
        let phi = 0.05 + (std::f64::consts::FRAC_PI_2 - 0.1) * k as f64 / (points.max(2) - 1) as f64;
        let dir_out = vec![phi.sin(), phi.cos()];
        let config = ScatterConfig::new(params.clone(), p, dir_in.clone(), dir_out)?;
        match amplitude_integral(&config, 64, 1e-6) {
            Ok(a) => table.push(vec![Cell::Num(phi), Cell::Num(a.value.norm_sqr())]),
            Err(crspectra::Error::ForwardSingularity { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(table)
}

// ---------------------------------------------------------------- verify

pub fn params_json(params: &ModelParams) -> serde_json::Value {
    serde_json::json!({
        "n": params.n,
        "gamma": params.gamma,
        "kappa": params.kappa,
        "sigma": params.sigma,
    })
}

fn default_residual_grid(n: usize) -> CmdResult<OctantGrid> {
    let (min, max, pts) = match n {
        1 => (2.0, 18.0, 401),
        2 => (2.0, 14.0, 121),
        3 => (2.5, 13.0, 71),
        4 => (2.5, 10.0, 41),
        _ => return Err(UsageError(format!("no default residual grid for n = {}", n))),
    };
    Ok(OctantGrid::new(vec![min; n], vec![max; n], vec![pts; n])?)
}

pub fn verify_residuals(
    params: &ModelParams,
    jmax: u32,
    order: StencilOrder,
    tol: f64,
) -> CmdResult<RunReport> {
    let mut report = RunReport::new("verify residuals", params_json(params));
    let grid = default_residual_grid(params.n)?;
    let jmin = params.kappa_sum();
    if jmax < jmin {
        return Err(UsageError(format!(
            "jmax = {} below the minimum principal label {}",
            jmax, jmin
        )));
    }
    for j in jmin..=jmax {
        for labels in enumerate_states(params, j)? {
            let r = hamiltonian_residual(params, &labels, &grid, order)?;
            report.check(
                &format!("|H psi - E psi| / |psi| (j={} l={} m={:?})", j, labels.l, labels.m),
                "stencil",
                r,
                0.0,
                tol,
            );
        }
    }
    Ok(report)
}

fn default_commutator_shapes(n: usize) -> Vec<usize> {
    if n == 2 {
        vec![31, 61, 121]
    } else {
        vec![25, 49, 97]
    }
}

pub fn verify_commutators(
    params: &ModelParams,
    orders: &[StencilOrder],
    shapes: Option<Vec<usize>>,
    tol: f64,
    threads: usize,
) -> CmdResult<RunReport> {
    let mut report = RunReport::new("verify commutators", params_json(params));
    let n = params.n;
    let shapes = shapes.unwrap_or_else(|| default_commutator_shapes(n));
    if shapes.len() < 2 {
        return Err(UsageError("need at least two grid refinements".into()));
    }
    let ops = suite(params)?;
    report.note(format!(
        "suite size {} = 2n-1 operators: {}",
        ops.len(),
        ops.iter().map(|o| o.kind.to_string()).collect::<Vec<_>>().join(", ")
    ));
    report.note(
        "quartic inverse-square tail carries the barrier factor kappa_1(kappa_1+1); the \
         published tail (without it) fails to commute and is reported by `verify commutators \
         --published-quartic`"
            .into(),
    );
    let control = DiffOperator::coordinate_multiplier();
    let residual = |a: &DiffOperator, b: &DiffOperator, f: &GridField| {
        if threads >= 2 {
            commutator_residual_threaded(a, b, f)
        } else {
            commutator_residual(a, b, f)
        }
    };
    for &order in orders {
        let mut per_op: Vec<Vec<f64>> = vec![Vec::new(); ops.len() - 1];
        for &m in &shapes {
            let grid = OctantGrid::new(vec![2.0; n], vec![6.0; n], vec![m; n])?;
            let field = GridField::sample(&grid, order, |x: &[f64]| {
                let mut v = (-x.iter().map(|xi| (xi - 4.0) * (xi - 4.0)).sum::<f64>() / 0.98).exp();
                for (xi, k) in x.iter().zip(&params.kappa) {
                    v *= xi.powi(*k as i32 + 1);
                }
                v
            });
            for (i, op) in ops.iter().skip(1).enumerate() {
                per_op[i].push(residual(&ops[0], op, &field)?);
            }
            let ctrl = residual(&ops[0], &control, &field)?;
            report.check_at_least(
                &format!("negative control [H, x_1] (order {}, {} pts)", order.order(), m),
                "stencil",
                ctrl,
                0.1,
            );
        }
        // Below this residual the composed stencils sit on the floating-
        // point floor (eps/h^4 amplification) and a convergence order is no
        // longer measurable; reaching the floor counts as converged.
        let roundoff_floor = 1e-7;
        for (i, op) in ops.iter().skip(1).enumerate() {
            let r = &per_op[i];
            let last = *r.last().unwrap();
            report.check(
                &format!("[H, {}] final residual (order {})", op.kind, order.order()),
                "stencil",
                last,
                0.0,
                tol,
            );
            if last <= roundoff_floor {
                report.check(
                    &format!(
                        "[H, {}] converged to the roundoff floor (order {})",
                        op.kind,
                        order.order()
                    ),
                    "refinement",
                    last,
                    0.0,
                    roundoff_floor,
                );
            } else {
                let observed = (r[r.len() - 2] / r[r.len() - 1]).log2();
                report.check_at_least(
                    &format!("[H, {}] observed order (order {})", op.kind, order.order()),
                    "refinement",
                    observed,
                    order.order() as f64 - 1.0,
                );
            }
            report.note(format!(
                "[H, {}] order-{} ladder: {}",
                op.kind,
                order.order(),
                r.iter().map(|v| format!("{:.3e}", v)).collect::<Vec<_>>().join(" -> ")
            ));
        }
    }
    Ok(report)
}

/// Refinement study of the quartic variant with the inverse-square tail
/// exactly as published; expected to stall (the discrepancy pattern).
pub fn verify_published_quartic(params: &ModelParams, tol: f64) -> CmdResult<RunReport> {
    let mut report = RunReport::new("verify commutators --published-quartic", params_json(params));
    let n = params.n;
    let h = DiffOperator::hamiltonian(params);
    let printed = DiffOperator::quartic_published(params)?;
    let corrected = DiffOperator::quartic(params)?;
    let mut printed_res = Vec::new();
    let mut corrected_res = Vec::new();
    for &m in &default_commutator_shapes(n) {
        let grid = OctantGrid::new(vec![2.0; n], vec![6.0; n], vec![m; n])?;
        let field = GridField::sample(&grid, StencilOrder::Four, |x: &[f64]| {
            let mut v = (-x.iter().map(|xi| (xi - 4.0) * (xi - 4.0)).sum::<f64>() / 0.98).exp();
            for (xi, k) in x.iter().zip(&params.kappa) {
                v *= xi.powi(*k as i32 + 1);
            }
            v
        });
        printed_res.push(commutator_residual(&h, &printed, &field)?);
        corrected_res.push(commutator_residual(&h, &corrected, &field)?);
    }
    let q1 = f64::from(params.kappa[0]) * f64::from(params.kappa[0] + 1);
    let defect = 0.25 * (n as f64 - 1.0) * (n as f64 - 3.0) * (q1 - 1.0);
    report.note(format!(
        "published ladder: {}; corrected ladder: {}",
        printed_res.iter().map(|v| format!("{:.3e}", v)).collect::<Vec<_>>().join(" -> "),
        corrected_res.iter().map(|v| format!("{:.3e}", v)).collect::<Vec<_>>().join(" -> "),
    ));
    report.note(format!(
        "published minus corrected = {:.6} / x_1^2: the published tail -(n-1)(n-3)/(4 x_1^2) \
         lacks the barrier factor kappa_1(kappa_1+1)",
        defect
    ));
    let corrected_final = *corrected_res.last().unwrap();
    let printed_final = *printed_res.last().unwrap();
    report.check("corrected quartic final residual", "stencil", corrected_final, 0.0, tol);
    if defect != 0.0 {
        // the published variant has a genuine nonzero commutator: its
        // residual stalls well above the corrected one
        report.check_at_least(
            "published quartic residual floor (vs 20x corrected)",
            "stencil",
            printed_final,
            20.0 * corrected_final,
        );
        let stall = (printed_res[printed_res.len() - 2] / printed_final).log2();
        report.check(
            "published quartic refinement stalls (observed order within 0..2)",
            "refinement",
            stall,
            0.0,
            2.0,
        );
    } else {
        report.note("for n = 3 the published and corrected tails coincide (coefficient 0)".into());
    }
    Ok(report)
}

pub fn verify_orthonormality(params: &ModelParams, lmax: u32, tol: f64) -> CmdResult<RunReport> {
    let mut report = RunReport::new("verify orthonormality", params_json(params));
    let n = params.n;
    let gamma = params.gamma;
    let ks = params.kappa_sum();

    // radial norms and j-orthogonality at fixed l
    for j in ks..=(ks + 4) {
        for l in (ks..=j.min(lmax)).step_by(2) {
            let f = |r: f64| {
                let v = radial_R(params, j, l, r).unwrap();
                v * v * r.powi(n as i32 - 1)
            };
            let lam = f64::from(j) + 1.5 * n as f64 - 0.5;
            let norm = integrate_radial(&f, lam / gamma, 80.0 * lam / gamma, 48);
            report.check(
                &format!("radial norm (j={}, l={})", j, l),
                "quadrature",
                norm,
                1.0,
                tol,
            );
        }
    }
    let l0 = ks;
    for j1 in (l0..=l0 + 4).step_by(2) {
        for j2 in (j1 + 2..=l0 + 4).step_by(2) {
            let f = |r: f64| {
                radial_R(params, j1, l0, r).unwrap()
                    * radial_R(params, j2, l0, r).unwrap()
                    * r.powi(n as i32 - 1)
            };
            let lam = f64::from(j2) + 1.5 * n as f64 - 0.5;
            let v = integrate_radial(&f, lam / gamma, 90.0 * lam / gamma, 48);
            report.check(
                &format!("radial orthogonality (j={} vs j={}, l={})", j1, j2, l0),
                "quadrature",
                v,
                0.0,
                tol,
            );
        }
    }
    report.note(format!(
        "published radial constant / unit-norm constant = {:.12} = (2 gamma)^-n",
        radial_constant_published(params, ks, ks)? / radial_norm_constant(params, ks, ks)?
    ));

    // angular Gram matrix over all states with l <= lmax
    if n >= 2 {
        let mut states: Vec<BoundLabels> = Vec::new();
        for j in ks..=lmax {
            for s in enumerate_states(params, j)? {
                if s.l == j {
                    states.push(s);
                }
            }
        }
        let (nodes, weights) = gauss_legendre(64);
        let map = |t: f64| std::f64::consts::FRAC_PI_4 * (t + 1.0);
        let inner = |a: &BoundLabels, b: &BoundLabels| -> CmdResult<f64> {
            let mut val = 0.0;
            if n == 2 {
                for (t, w) in nodes.iter().zip(&weights) {
                    let th = map(*t);
                    val += w
                        * angular_Y(params, a, &[th])?
                        * angular_Y(params, b, &[th])?
                        * std::f64::consts::FRAC_PI_4;
                }
            } else if n == 3 {
                for (t1, w1) in nodes.iter().zip(&weights) {
                    let th1 = map(*t1);
                    for (t2, w2) in nodes.iter().zip(&weights) {
                        let th2 = map(*t2);
                        val += w1
                            * w2
                            * angular_Y(params, a, &[th1, th2])?
                            * angular_Y(params, b, &[th1, th2])?
                            * th2.sin()
                            * std::f64::consts::FRAC_PI_4
                            * std::f64::consts::FRAC_PI_4;
                    }
                }
            } else {
                return Err(UsageError(
                    "angular Gram quadrature is implemented for n = 2, 3".into(),
                ));
            }
            Ok(val)
        };
        for a in 0..states.len() {
            for b in a..states.len() {
                let v = inner(&states[a], &states[b])?;
                let expect = if a == b { 1.0 } else { 0.0 };
                report.check(
                    &format!(
                        "angular Gram (l={} m={:?} | l={} m={:?})",
                        states[a].l, states[a].m, states[b].l, states[b].m
                    ),
                    "quadrature",
                    v,
                    expect,
                    tol,
                );
            }
        }
        for s in &states {
            let unit = angular_norm_constant(params, s)?;
            match angular_norm_published(params, s) {
                Ok(publ) => report.note(format!(
                    "published chi / unit-norm chi (l={} m={:?}) = {:.12}",
                    s.l,
                    s.m,
                    publ / unit
                )),
                Err(e) => report.note(format!(
                    "published chi undefined for (l={} m={:?}): {}",
                    s.l, s.m, e
                )),
            }
        }
    }
    Ok(report)
}

pub fn verify_oracle(quick: bool) -> CmdResult<RunReport> {
    let mut report = RunReport::new("verify oracle", serde_json::json!({"quick": quick}));

    // spectrum formula vs radial shooting over the fixed 36-case matrix
    let cases: [(usize, u32); 4] = [(1, 0), (2, 0), (3, 0), (2, 3)];
    let mut worst: f64 = 0.0;
    for (n, l) in cases {
        for gamma in [0.5, 1.0, 2.0] {
            for n_r in [0u32, 1, 2] {
                let params = ModelParams::new(gamma, vec![0; n]).unwrap();
                let e_formula = energy(&params, l + n_r)?;
                let l_eff = f64::from(l) + 1.5 * (n as f64 - 1.0);
                let e_oracle = bound_energy(&RadialProblem::bound(l_eff, gamma, n_r))?;
                worst = worst.max(((e_formula - e_oracle) / e_formula).abs());
            }
        }
    }
    report.check(
        "spectrum formula vs shooting oracle, worst relative error (36 cases)",
        "oracle",
        worst,
        0.0,
        1e-8,
    );

    // phase shifts vs the S-matrix element argument
    let mut worst_phase: f64 = 0.0;
    for l in [0u32, 1, 2] {
        let l_eff = f64::from(l) + 3.0;
        for rho in [0.5, 1.0, 2.0] {
            let delta = phase_shift(&RadialProblem::scatter(l_eff, 1.0, 1.0 / rho))?;
            let arg = gamma_phase_ratio(4.0 + f64::from(l), rho)?.arg();
            worst_phase = worst_phase.max(mod_pi(delta + 0.5 * arg).abs());
        }
    }
    report.check(
        "radial phase shift vs -arg(A_l)/2 mod pi, worst mismatch (n=3, l<=2)",
        "oracle",
        worst_phase,
        0.0,
        1e-3,
    );
    report.note(
        "resolved sign convention: the outgoing-wave phase shift equals -arg(A_l)/2; the \
         tabulated S-matrix element is the conjugate of e^{2 i delta}"
            .into(),
    );

    if !quick {
        let params = ModelParams::new(2.0, vec![1, 1]).unwrap();
        let opts = Eigen2dOptions {
            box_size: 40.0,
            resolutions: vec![99, 199, 399],
            count: 1,
        };
        let res = grid_eigen_2d(&params, &opts)?;
        let expect = -4.0 / 40.5;
        report.check(
            "2-D octant ground state, extrapolated (gamma=2, kappa=(1,1))",
            "oracle",
            res.extrapolated[0],
            expect,
            0.02 * expect.abs(),
        );
        report.note(format!(
            "resolution ladder {:?} -> {:?}, observed order {:.2}",
            opts.resolutions, res.levels, res.observed_order[0]
        ));

        let params0 = ModelParams::new(2.0, vec![0, 0]).unwrap();
        let res0 = grid_eigen_2d(
            &params0,
            &Eigen2dOptions {
                box_size: 40.0,
                resolutions: vec![99, 199, 399],
                count: 4,
            },
        )?;
        let clusters = degeneracy_clusters(res0.levels.last().unwrap(), 1e-3);
        let e0 = enumerate_states(&params0, 0)?.len();
        let e1 = enumerate_states(&params0, 1)?.len();
        report.check(
            "degeneracy of the lowest kappa=(0,0) level",
            "oracle",
            clusters.first().map_or(0.0, |c| c.1 as f64),
            e0 as f64,
            0.0,
        );
        report.check(
            "degeneracy of the second kappa=(0,0) level",
            "oracle",
            clusters.get(1).map_or(0.0, |c| c.1 as f64),
            e1 as f64,
            0.0,
        );
        report.note(format!("kappa=(0,0) level clusters: {:?}", clusters));
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
pub fn verify_all(
    params: &ModelParams,
    jmax: u32,
    order: StencilOrder,
    residual_tol: f64,
    commutator_tol: f64,
    norm_tol: f64,
    threads: usize,
    quick: bool,
) -> CmdResult<RunReport> {
    let mut report = RunReport::new("verify all", params_json(params));
    report.merge("residuals", verify_residuals(params, jmax, order, residual_tol)?);
    report.merge(
        "commutators",
        verify_commutators(params, &[StencilOrder::Four], None, commutator_tol, threads)?,
    );
    report.merge("orthonormality", verify_orthonormality(params, 6, norm_tol)?);
    report.merge("oracle", verify_oracle(quick)?);
    Ok(report)
}
