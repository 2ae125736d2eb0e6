//! Acceptance suite: one test per numbered criterion, each printing a
//! PASS line with the measured figures (run with --nocapture to see them
//! for passing tests). Tolerances are pinned here, not configurable.

use crspectra::bound::{
    angular_norm_constant, angular_norm_published, angular_Y, energy, radial_R,
    radial_constant_published, radial_norm_constant,
};
use crspectra::operators::{
    commutator_residual, hamiltonian_residual, suite, DiffOperator, GridField, OctantGrid,
    StencilOrder,
};
use crspectra::oracle::{
    bound_energy, degeneracy_clusters, grid_eigen_2d, mod_pi, phase_shift, Eigen2dOptions,
    RadialProblem,
};
use crspectra::qnum::{enumerate_states, BoundLabels, ModelParams};
use crspectra::quadrature::{gauss_legendre, integrate_gl, integrate_radial};
use crspectra::scatter::{
    amplitude_closed_k0, amplitude_integral, amplitude_pw, partial_wave_al, ScatterConfig,
    DEFAULT_ETA_SCHEDULE,
};
use crspectra::specfun::gamma_phase_ratio;
use std::time::Instant;

fn kappa0(n: usize) -> ModelParams {
    ModelParams::new(1.0, vec![0; n]).unwrap()
}

/// criterion 1: the closed-form spectrum matches the radial shooting oracle
/// to 1e-8 relative over the 36-case matrix, in under 10 s.
#[test]
fn criterion_1_spectrum_exactness() {
    let t0 = Instant::now();
    // effective momenta 0, 1.5, 3, 4.5 realize (n, l) = (1,0), (2,0), (3,0), (2,3)
    let cases: [(usize, u32); 4] = [(1, 0), (2, 0), (3, 0), (2, 3)];
    let mut worst = 0.0f64;
    let mut checked = 0;
    for (n, l) in cases {
        for gamma in [0.5, 1.0, 2.0] {
            for n_r in [0u32, 1, 2] {
                let params = ModelParams::new(gamma, vec![0; n]).unwrap();
                let e_formula = energy(&params, l + n_r).unwrap();
                let l_eff = f64::from(l) + 1.5 * (n as f64 - 1.0);
                let e_oracle = bound_energy(&RadialProblem::bound(l_eff, gamma, n_r)).unwrap();
                let rel = ((e_formula - e_oracle) / e_formula).abs();
                assert!(
                    rel <= 1e-8,
                    "n={} l={} gamma={} n_r={}: formula {} vs oracle {} (rel {:e})",
                    n,
                    l,
                    gamma,
                    n_r,
                    e_formula,
                    e_oracle,
                    rel
                );
                worst = worst.max(rel);
                checked += 1;
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    assert_eq!(checked, 36);
    assert!(secs < 10.0, "runtime {:.1}s exceeds 10s", secs);
    println!(
        "criterion 1 (spectrum exactness): PASS - 36 cases, worst rel err {:.2e}, {:.1}s",
        worst, secs
    );
}

/// criterion 2: extrapolated 2-D octant ground state within 2% for
/// gamma=2, kappa=(1,1); degeneracy multiplicities of the two lowest
/// kappa=(0,0) levels match the enumeration; under 2 min.
#[test]
fn criterion_2_grid_eigensolver() {
    let t0 = Instant::now();
    let params = ModelParams::new(2.0, vec![1, 1]).unwrap();
    let opts = Eigen2dOptions {
        box_size: 40.0,
        resolutions: vec![99, 199, 399],
        count: 1,
    };
    let res = grid_eigen_2d(&params, &opts).unwrap();
    let expect = -4.0 / 40.5;
    let rel = ((res.extrapolated[0] - expect) / expect).abs();
    assert!(
        rel <= 0.02,
        "extrapolated {} vs {} (rel {:.3})",
        res.extrapolated[0],
        expect,
        rel
    );
    // one-sided monotone approach toward the extrapolated limit
    let dists: Vec<f64> = res.levels.iter().map(|l| (l[0] - res.extrapolated[0]).abs()).collect();
    assert!(
        dists[0] > dists[1] && dists[1] > dists[2],
        "no monotone approach: {:?}",
        dists
    );

    let params0 = ModelParams::new(2.0, vec![0, 0]).unwrap();
    let opts0 = Eigen2dOptions {
        box_size: 40.0,
        resolutions: vec![99, 199, 399],
        count: 4,
    };
    let res0 = grid_eigen_2d(&params0, &opts0).unwrap();
    let finest = res0.levels.last().unwrap();
    let clusters = degeneracy_clusters(finest, 1e-3);
    let expected0 = enumerate_states(&params0, 0).unwrap().len();
    let expected1 = enumerate_states(&params0, 1).unwrap().len();
    assert!(
        clusters.len() >= 2 && clusters[0].1 == expected0 && clusters[1].1 == expected1,
        "clusters {:?} vs enumerated multiplicities ({}, {})",
        clusters,
        expected0,
        expected1
    );
    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 120.0, "runtime {:.1}s exceeds 2 min", secs);
    println!(
        "criterion 2 (2-D eigensolver): PASS - ground {} (rel {:.2e}), lowest clusters {:?}, {:.1}s",
        res.extrapolated[0],
        rel,
        &clusters[..2.min(clusters.len())],
        secs
    );
}

/// criterion 3: ||H psi - E psi||_inf / ||psi||_inf <= 1e-6 for every state
/// with j <= 4 at n = 2, 3 (6th-order stencils), under 1 min.
#[test]
fn criterion_3_eigenfunction_residual() {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    let mut states = 0;
    // barrier systems and barrier-free systems at both dimensions
    let runs: [(ModelParams, OctantGrid); 4] = [
        (
            ModelParams::new(1.0, vec![1, 1]).unwrap(),
            OctantGrid::new(vec![2.0; 2], vec![14.0; 2], vec![121; 2]).unwrap(),
        ),
        (
            ModelParams::new(1.0, vec![0, 0]).unwrap(),
            OctantGrid::new(vec![2.0; 2], vec![14.0; 2], vec![121; 2]).unwrap(),
        ),
        (
            ModelParams::new(1.0, vec![1, 1, 0]).unwrap(),
            OctantGrid::new(vec![2.5; 3], vec![13.0; 3], vec![71; 3]).unwrap(),
        ),
        (
            ModelParams::new(1.0, vec![0, 0, 0]).unwrap(),
            OctantGrid::new(vec![2.5; 3], vec![13.0; 3], vec![71; 3]).unwrap(),
        ),
    ];
    for (params, grid) in runs {
        for j in params.kappa_sum()..=4 {
            for labels in enumerate_states(&params, j).unwrap() {
                let r = hamiltonian_residual(&params, &labels, &grid, StencilOrder::Six).unwrap();
                assert!(
                    r <= 1e-6,
                    "n={} kappa={:?} j={} l={} m={:?}: residual {:e}",
                    params.n,
                    params.kappa,
                    j,
                    labels.l,
                    labels.m,
                    r
                );
                worst = worst.max(r);
                states += 1;
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 60.0, "runtime {:.1}s exceeds 1 min", secs);
    println!(
        "criterion 3 (eigenfunction residual): PASS - {} states, worst {:.2e}, {:.1}s",
        states, worst, secs
    );
}

/// criterion 4: radial norm 1 +- 1e-8, angular Gram identity +- 1e-8 for
/// l <= 6 at n = 2, 3; the published-constant deviations are reported.
#[test]
fn criterion_4_normalization_orthonormality() {
    let t0 = Instant::now();
    // radial norms across dimensions, strengths, and labels
    let mut worst_norm = 0.0f64;
    for (n, kappa) in [(1usize, vec![0u32]), (2, vec![1, 0]), (3, vec![1, 1, 0])] {
        for gamma in [0.5, 1.0, 2.0] {
            let params = ModelParams::new(gamma, kappa.clone()).unwrap();
            let ks = params.kappa_sum();
            for j in ks..=(ks + 4) {
                for l in (ks..=j).step_by(2) {
                    let f = |r: f64| {
                        let v = radial_R(&params, j, l, r).unwrap();
                        v * v * r.powi(n as i32 - 1)
                    };
                    let lam = f64::from(j) + 1.5 * n as f64 - 0.5;
                    let norm = integrate_radial(&f, lam / gamma, 80.0 * lam / gamma, 48);
                    assert!(
                        (norm - 1.0).abs() <= 1e-8,
                        "radial norm n={} gamma={} j={} l={}: {}",
                        n,
                        gamma,
                        j,
                        l,
                        norm
                    );
                    worst_norm = worst_norm.max((norm - 1.0).abs());
                }
            }
        }
    }

    // radial orthonormality within a column of fixed l
    let params = ModelParams::new(1.0, vec![0, 0]).unwrap();
    for j1 in (0..=6u32).step_by(2) {
        for j2 in (0..=6u32).step_by(2) {
            let f = |r: f64| {
                radial_R(&params, j1, 0, r).unwrap() * radial_R(&params, j2, 0, r).unwrap() * r
            };
            let lam = f64::from(j1.max(j2)) + 2.5;
            let v = integrate_radial(&f, lam, 90.0 * lam, 48);
            let expect = if j1 == j2 { 1.0 } else { 0.0 };
            assert!(
                (v - expect).abs() <= 1e-8,
                "radial <{}|{}> = {}",
                j1,
                j2,
                v
            );
        }
    }

    // angular Gram matrices
    let mut worst_gram = 0.0f64;
    let mut gram_dim = 0;
    for kappa in [vec![0u32, 0], vec![1, 0], vec![0u32, 0, 0], vec![1, 1, 0]] {
        let params = ModelParams::new(1.0, kappa).unwrap();
        let mut states: Vec<BoundLabels> = Vec::new();
        for j in params.kappa_sum()..=6 {
            for s in enumerate_states(&params, j).unwrap() {
                if s.l == j {
                    states.push(s);
                }
            }
        }
        gram_dim += states.len();
        let (nodes, weights) = gauss_legendre(64);
        let map = |t: f64| std::f64::consts::FRAC_PI_4 * (t + 1.0);
        for a in 0..states.len() {
            for b in a..states.len() {
                let mut val = 0.0;
                if params.n == 2 {
                    for (t, w) in nodes.iter().zip(&weights) {
                        let th = map(*t);
                        val += w
                            * angular_Y(&params, &states[a], &[th]).unwrap()
                            * angular_Y(&params, &states[b], &[th]).unwrap()
                            * std::f64::consts::FRAC_PI_4;
                    }
                } else {
                    for (t1, w1) in nodes.iter().zip(&weights) {
                        let th1 = map(*t1);
                        let mut inner = 0.0;
                        for (t2, w2) in nodes.iter().zip(&weights) {
                            let th2 = map(*t2);
                            inner += w2
                                * angular_Y(&params, &states[a], &[th1, th2]).unwrap()
                                * angular_Y(&params, &states[b], &[th1, th2]).unwrap()
                                * th2.sin()
                                * std::f64::consts::FRAC_PI_4;
                        }
                        val += w1 * inner * std::f64::consts::FRAC_PI_4;
                    }
                }
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!(
                    (val - expect).abs() <= 1e-8,
                    "kappa={:?} <{:?}|{:?}> = {}",
                    params.kappa,
                    states[a],
                    states[b],
                    val
                );
                worst_gram = worst_gram.max((val - expect).abs());
            }
        }
    }

    // published-constant deviations, reported with measured ratios
    let params = ModelParams::new(1.0, vec![1, 0]).unwrap();
    let c_ratio = radial_constant_published(&params, 3, 1).unwrap()
        / radial_norm_constant(&params, 3, 1).unwrap();
    let p3 = ModelParams::new(1.0, vec![1, 1, 0]).unwrap();
    let lab3 = BoundLabels::new(2, 2, vec![2]);
    let chi_ratio =
        angular_norm_published(&p3, &lab3).unwrap() / angular_norm_constant(&p3, &lab3).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    println!(
        "criterion 4 (normalization): PASS - worst radial dev {:.2e}, worst Gram dev {:.2e} over {} states; \
         published-c/unit-c = {:.6} (= (2 gamma)^-n), published-chi/unit-chi = {:.6} for n=3 kappa=(1,1,0) l=2 m=(2); {:.1}s",
        worst_norm, worst_gram, gram_dim, c_ratio, chi_ratio, secs
    );
}

/// criterion 5: |A_l| = 1 +- 1e-14 for l <= 100, rho in {0.1, 1, 10}, n <= 4.
#[test]
fn criterion_5_unitarity() {
    let mut worst = 0.0f64;
    for n in 1..=4usize {
        let params = kappa0(n);
        for rho in [0.1, 1.0, 10.0] {
            for l in (0..=100u32).step_by(2) {
                let a = partial_wave_al(&params, rho, l).unwrap();
                let dev = (a.norm() - 1.0).abs();
                assert!(dev <= 1e-14, "n={} rho={} l={}: | |A_l| - 1 | = {:e}", n, rho, l, dev);
                worst = worst.max(dev);
            }
        }
    }
    println!("criterion 5 (unitarity): PASS - worst | |A_l| - 1 | = {:.2e}", worst);
}

/// criterion 6: arg(A_l)/2 matches the radial phase-shift oracle mod pi
/// within 1e-3 for n=3, l in {0,1,2}, rho in {0.5,1,2}; the resolved sign
/// convention is recorded.
#[test]
fn criterion_6_phase_shifts() {
    let t0 = Instant::now();
    let n = 3usize;
    let gamma = 1.0;
    let mut worst = 0.0f64;
    for l in [0u32, 1, 2] {
        for rho in [0.5, 1.0, 2.0] {
            let p = gamma / rho;
            let l_eff = f64::from(l) + 1.5 * (n as f64 - 1.0);
            let delta = phase_shift(&RadialProblem::scatter(l_eff, gamma, p)).unwrap();
            // same Gamma ratio as A_l, available at either parity of l
            let al_arg = gamma_phase_ratio(1.5 * n as f64 - 0.5 + f64::from(l), rho)
                .unwrap()
                .arg();
            let mismatch = mod_pi(delta + 0.5 * al_arg).abs();
            assert!(
                mismatch <= 1e-3,
                "l={} rho={}: delta={} vs -arg(A_l)/2={} (mismatch {:e})",
                l,
                rho,
                delta,
                -0.5 * al_arg,
                mismatch
            );
            worst = worst.max(mismatch);
        }
    }
    println!(
        "criterion 6 (phase shifts): PASS - worst mismatch {:.2e}; resolved sign convention: \
         the radial outgoing-wave phase equals MINUS arg(A_l)/2 (the tabulated element is the \
         conjugate of e^{{2 i delta}}); {:.1}s",
        worst,
        t0.elapsed().as_secs_f64()
    );
}

fn bump_field(
    params: &ModelParams,
    center: f64,
    width: f64,
) -> impl Fn(&[f64]) -> f64 + '_ {
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

/// criterion 7: every operator of the 2n-1 suite commutes with H under grid
/// refinement (observed order >= stencil_order - 1, final residual <= 1e-3)
/// for n = 2, 3 and three independent test fields, while the negative
/// control stays >= 0.1; under 5 min at n = 3.
#[test]
fn criterion_7_superintegrability_certificate() {
    let order = StencilOrder::Four;
    // field widths kept comfortably above the coarsest spacing (so the
    // coarse grid sits in the asymptotic regime) and the ladders kept off
    // the eps/h^4 roundoff floor of the composed quartic
    let fields = [(4.0, 0.7), (3.6, 0.8), (4.4, 0.95)];
    for (params, shapes) in [
        (
            ModelParams::new(1.0, vec![1, 1]).unwrap(),
            vec![31usize, 61, 121],
        ),
        (
            ModelParams::new(1.0, vec![1, 1, 0]).unwrap(),
            vec![25, 49, 97],
        ),
    ] {
        let t0 = Instant::now();
        let n = params.n;
        let ops = suite(&params).unwrap();
        assert_eq!(ops.len(), 2 * n - 1);
        let hamiltonian = &ops[0];
        let control = DiffOperator::coordinate_multiplier();
        let mut finest_worst = 0.0f64;
        let mut order_worst = f64::INFINITY;
        for (center, width) in fields {
            let mut residuals: Vec<Vec<f64>> = vec![Vec::new(); ops.len() - 1];
            for &m in &shapes {
                let grid =
                    OctantGrid::new(vec![2.0; n], vec![6.0; n], vec![m; n]).unwrap();
                let f = GridField::sample(&grid, order, bump_field(&params, center, width));
                for (i, op) in ops.iter().skip(1).enumerate() {
                    residuals[i].push(commutator_residual(hamiltonian, op, &f).unwrap());
                }
                let ctrl = commutator_residual(hamiltonian, &control, &f).unwrap();
                assert!(
                    ctrl >= 0.1,
                    "negative control residual {} below 0.1 (n={}, m={})",
                    ctrl,
                    n,
                    m
                );
            }
            for (i, op) in ops.iter().skip(1).enumerate() {
                let r = &residuals[i];
                let obs1 = (r[0] / r[1]).log2();
                let obs2 = (r[1] / r[2]).log2();
                let min_order = order.order() as f64 - 1.0;
                assert!(
                    obs1 >= min_order && obs2 >= min_order,
                    "n={} [H,{}] field ({},{}) residuals {:?}: observed orders {:.2}, {:.2}",
                    n,
                    op.kind,
                    center,
                    width,
                    r,
                    obs1,
                    obs2
                );
                let last = *r.last().unwrap();
                assert!(
                    last <= 1e-3,
                    "n={} [H,{}] final residual {:e}",
                    n,
                    op.kind,
                    last
                );
                finest_worst = finest_worst.max(last);
                order_worst = order_worst.min(obs1.min(obs2));
            }
        }
        let secs = t0.elapsed().as_secs_f64();
        if n == 3 {
            assert!(secs < 300.0, "n=3 certificate took {:.1}s", secs);
        }
        println!(
            "criterion 7 (superintegrability, n={}): PASS - {} operators x 3 fields, worst final \
             residual {:.2e}, worst observed order {:.2}, control pinned >= 0.1; {:.1}s \
             (quartic uses the barrier-scaled inverse-square tail; the printed tail does not commute)",
            n,
            2 * n - 1,
            finest_worst,
            order_worst,
            secs
        );
    }
}

fn splitmix(state: &mut u64) -> f64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64
}

/// criterion 8: partial-wave amplitude agrees with the closed form to 1e-3;
/// the integral representation agrees with the closed form up to a single
/// configuration-independent constant to 1e-6 across >= 10 direction pairs,
/// and the constant is 1 within quadrature accuracy.
#[test]
fn criterion_8_amplitude_cross_validation() {
    let t0 = Instant::now();
    let gamma = 1.0;

    // Abel-regularized partial-wave sum vs closed form
    let mut worst_pw = 0.0f64;
    for (th_in, th_out) in [(0.9, 0.28), (0.39, 1.12), (0.1, 0.7754)] {
        let (din, dout) = (
            vec![f64::sin(th_in), f64::cos(th_in)],
            vec![f64::sin(th_out), f64::cos(th_out)],
        );
        let cfg = ScatterConfig::new(kappa0(2), 1.0, din.to_vec(), dout.to_vec()).unwrap();
        let pw = amplitude_pw(&cfg, 1200, &DEFAULT_ETA_SCHEDULE).unwrap();
        let closed = amplitude_closed_k0(&cfg).unwrap();
        let rel = (pw.value - closed.value).norm() / closed.value.norm();
        assert!(
            rel <= 1e-3,
            "pw vs closed rel {:e} at angles ({}, {})",
            rel,
            th_in,
            th_out
        );
        worst_pw = worst_pw.max(rel);
    }

    // integral representation vs closed form over deterministic pairs
    let mut rng = 0xc0ffee_u64;
    let mut ratios: Vec<f64> = Vec::new();
    let mut pairs = 0;
    while pairs < 12 {
        let th_in = 0.15 + 1.27 * splitmix(&mut rng);
        let th_out = 0.15 + 1.27 * splitmix(&mut rng);
        let din = vec![th_in.sin(), th_in.cos()];
        let dout = vec![th_out.sin(), th_out.cos()];
        let dot: f64 = din.iter().zip(&dout).map(|(a, b)| a * b).sum();
        if dot > 0.93 {
            continue;
        }
        for rho in [0.5, 1.0, 2.0] {
            let p = gamma / rho;
            let cfg = ScatterConfig::new(kappa0(2), p, din.clone(), dout.clone()).unwrap();
            let integral = amplitude_integral(&cfg, 96, 1e-7).unwrap();
            let closed = amplitude_closed_k0(&cfg).unwrap();
            ratios.push((integral.value / closed.value).norm());
        }
        pairs += 1;
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let max_dev = ratios
        .iter()
        .map(|r| (r - mean).abs() / mean)
        .fold(0.0f64, f64::max);
    assert!(
        max_dev <= 1e-6,
        "integral/closed ratio not constant: mean {} max rel dev {:e}",
        mean,
        max_dev
    );
    assert!(
        (mean - 1.0).abs() <= 1e-5,
        "integral/closed constant {} differs from 1",
        mean
    );
    println!(
        "criterion 8 (amplitude cross-validation): PASS - pw vs closed worst rel {:.2e}; \
         integral/closed constant = {:.9} (max rel dev {:.2e} over {} configs; the two displays \
         are mutually consistent); {:.1}s",
        worst_pw,
        mean,
        max_dev,
        ratios.len(),
        t0.elapsed().as_secs_f64()
    );
}

/// criterion 9: the 1-D kernel building block integrates to 2/3 +- 1e-12.
#[test]
fn criterion_9_quadrature_sanity() {
    // int_0^pi (2 - cos a)^{-2} sin a da = 2/3 via t = cos a
    let val = integrate_gl(&|t: f64| (2.0 - t).powi(-2), -1.0, 1.0, 64);
    let err = (val - 2.0 / 3.0).abs();
    assert!(err <= 1e-12, "quadrature value {} (err {:e})", val, err);
    println!("criterion 9 (quadrature sanity): PASS - err {:.2e}", err);
}
