//! Acceptance suite: every release criterion as one test printing a
//! pass/fail line (run with `--nocapture` to see the measured values).

use std::time::Instant;

use nalgebra::DVector;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use liesys::algebra;
use liesys::control::{
    self, curve_matrices, reduce_gbar, reduce_se2, verify_fundamental_fields, HomogeneousCase,
};
use liesys::matgroups::{self, compose, eps_trig, EpsTrig, Group, GroupElement};
use liesys::models::{
    self, bracket_growth_probe, poisson_bracket, ControlSystemDef, FactorOrdering, HamiltonianSet,
    LinearPotential, SystemKey, WaveFunctionGrid,
};
use liesys::ode::{self, uniform_grid, IvpProblem};
use liesys::weinorman::{Channel, ControlSignal, FactorizationOrder, WnSystem};

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "{} criterion {criterion}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_1_registry_sweep() {
    let reg = algebra::registry();
    let mut ok = reg.len() >= 8;
    let mut detail = format!("{} registry entries", reg.len());
    for entry in reg {
        if !entry.constants.check_consistency().is_clean() {
            ok = false;
            detail = format!("{} fails consistency", entry.key);
        }
    }
    let solvable = ["h3", "se2", "h3-ext"];
    for key in solvable {
        let (s, _) = algebra::lookup(key).unwrap().constants.is_solvable();
        if !s {
            ok = false;
            detail = format!("{key} should be solvable");
        }
    }
    let sub = algebra::lookup("g5")
        .unwrap()
        .constants
        .restrict(&[0, 3, 4])
        .unwrap();
    if !sub.is_solvable().0 {
        ok = false;
        detail = "linear-potential subalgebra should be solvable".into();
    }
    for key in ["sl2", "geps1", "geps-1"] {
        let (s, _) = algebra::lookup(key).unwrap().constants.is_solvable();
        if s {
            ok = false;
            detail = format!("{key} should not be solvable");
        }
    }
    report(
        "1 (registry sweep)",
        ok,
        &format!("{detail}; antisymmetry+Jacobi clean at 1e-12, solvability verdicts as expected"),
    );
}

type HandSystem = fn(&DVector<f64>, &DVector<f64>) -> Vec<f64>;

fn hand_systems() -> Vec<(&'static str, Vec<usize>, HandSystem)> {
    vec![
        ("se2", vec![0, 1, 2], |v, b| {
            vec![
                b[0],
                b[1] * v[0].cos() - b[2] * v[0].sin(),
                b[1] * v[0].sin() + b[2] * v[0].cos(),
            ]
        }),
        ("h3", vec![0, 1, 2], |v, b| {
            vec![b[0], b[1], b[2] + b[1] * v[0]]
        }),
        ("g5", vec![3, 4, 0, 1, 2], |v, b| {
            vec![
                b[0] + b[1] * v[0] + b[2] * v[0] * v[0],
                b[1] + 2.0 * b[2] * v[0],
                v[1].exp() * b[2],
                b[3] + 0.5 * b[1] * v[3] + b[0] * v[4],
                b[4] - b[2] * v[3] - 0.5 * b[1] * v[4],
            ]
        }),
        ("hsp2", vec![3, 4, 5, 0, 1, 2], |v, b| {
            vec![
                b[0] + b[1] * v[0] + b[2] * v[0] * v[0],
                b[1] + 2.0 * b[2] * v[0],
                v[1].exp() * b[2],
                b[3] + 0.5 * b[1] * v[3] + b[0] * v[4],
                b[4] - b[2] * v[3] - 0.5 * b[1] * v[4],
                b[5] + b[4] * v[3] - 0.5 * b[2] * v[3] * v[3] + 0.5 * b[0] * v[4] * v[4],
            ]
        }),
        ("geps-1", vec![0, 1, 2], geps_hand::<-1>),
        ("geps0", vec![0, 1, 2], geps_hand::<0>),
        ("geps1", vec![0, 1, 2], geps_hand::<1>),
    ]
}

fn geps_hand<const E: i8>(v: &DVector<f64>, b: &DVector<f64>) -> Vec<f64> {
    let tr = EpsTrig::new(E).unwrap();
    let e = E as f64;
    let mix = b[2] * v[0].cos() + b[1] * v[0].sin();
    vec![
        b[0] + e * tr.t(v[1]).unwrap() * mix,
        b[1] * v[0].cos() - b[2] * v[0].sin(),
        mix / tr.c(v[1]),
    ]
}

#[test]
fn criterion_2_wei_norman_derivation_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0002);
    let mut worst: f64 = 0.0;
    for (key, order, hand) in hand_systems() {
        let sc = &algebra::lookup(key).unwrap().constants;
        let sys = WnSystem::new(sc, FactorizationOrder::new(order, sc.dim()).unwrap()).unwrap();
        for _ in 0..200 {
            let v = DVector::from_fn(sc.dim(), |_, _| rng.gen_range(-1.0..1.0));
            let b = DVector::from_fn(sc.dim(), |_, _| rng.gen_range(-1.0..1.0));
            let got = sys.rhs(&v, &b).unwrap();
            let expect = hand(&v, &b);
            for (g, e) in got.iter().zip(&expect) {
                worst = worst.max((g - e).abs());
            }
        }
    }
    report(
        "2 (derivation oracle)",
        worst < 1e-10,
        &format!("engine vs hand-written coordinate systems, worst residual {worst:.3e} (< 1e-10)"),
    );
}

struct EquivalenceRun {
    label: String,
    state_error: f64,
    residual: f64,
}

fn equivalence_runs() -> (Vec<EquivalenceRun>, f64) {
    let span = (0.0, 5.0);
    // The residual's central differences are second order in this sampling
    // step; 5e-4 puts the truncation floor near 3e-7 for the stiffest
    // bundled controls.
    let grid = uniform_grid(span.0, span.1, 10001);
    let tol = 1e-10;
    let keys = [
        SystemKey::UnicycleX,
        SystemKey::UnicycleY,
        SystemKey::Brockett,
        SystemKey::HopperLinear,
        SystemKey::ElasticEuler(-1),
        SystemKey::ElasticEuler(0),
        SystemKey::ElasticEuler(1),
    ];
    let start = Instant::now();
    let mut runs = Vec::new();
    for key in keys {
        let def = ControlSystemDef::new(key);
        let x0 = models::standard_initial_state(key);
        let scenario = def.lie_scenario().unwrap();
        let sc = &algebra::lookup(scenario.algebra_key).unwrap().constants;
        let sys = WnSystem::new(sc, scenario.order.clone()).unwrap();
        let rep = matgroups::rep(scenario.algebra_key).unwrap();
        for (name, controls) in models::standard_test_controls(&def) {
            let direct = def
                .direct_integrate(&controls, &x0, span, tol, &grid)
                .unwrap();
            let b = def.embed_controls(&controls).unwrap();
            let wn = sys.integrate(&b, span, tol, &grid).unwrap();
            let recon = matgroups::reconstruct_state(&wn, &x0, &scenario.reconstruction).unwrap();
            let state_error = direct.max_distance(&recon);
            let residual = sys.residual(rep, &wn, &b).unwrap();
            runs.push(EquivalenceRun {
                label: format!("{}/{name}", key.name()),
                state_error,
                residual,
            });
        }
    }
    (runs, start.elapsed().as_secs_f64())
}

#[test]
fn criteria_3_and_4_equivalence_and_residual() {
    let (runs, elapsed) = equivalence_runs();
    let worst_state = runs
        .iter()
        .max_by(|a, b| a.state_error.total_cmp(&b.state_error))
        .unwrap();
    let worst_res = runs
        .iter()
        .max_by(|a, b| a.residual.total_cmp(&b.residual))
        .unwrap();
    report(
        "3 (equivalence suite)",
        worst_state.state_error < 1e-6 && elapsed < 10.0,
        &format!(
            "{} scenarios, worst state error {:.3e} at {} (< 1e-6), runtime {elapsed:.2}s (< 10s)",
            runs.len(),
            worst_state.state_error,
            worst_state.label
        ),
    );
    report(
        "4 (residual suite)",
        worst_res.residual < 1e-6,
        &format!(
            "worst right-invariant residual {:.3e} at {} (< 1e-6)",
            worst_res.residual, worst_res.label
        ),
    );
}

#[test]
fn criterion_5_linear_potential_closed_forms() {
    let m = 1.3;
    let forces = [
        ("constant", Channel::Constant(0.7)),
        (
            "sinusoid",
            Channel::Sin {
                amp: 0.8,
                omega: 1.9,
                phase: 0.3,
            },
        ),
        (
            "biased field",
            Channel::Poly(vec![0.4, 0.0]), // E0 part
        ),
    ];

    // (a) closed-form flow vs direct integration, 1e-9
    let mut worst_flow: f64 = 0.0;
    for (_, force) in &forces {
        let lp = LinearPotential::new(m, force.clone()).unwrap();
        let (q0, p0) = (0.4, -0.6);
        let f = force.clone();
        let rhs = move |t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1] / m;
            dy[1] = -f.eval(t);
        };
        let grid = uniform_grid(0.0, 5.0, 26);
        let p = IvpProblem::new(&rhs, (0.0, 5.0), vec![q0, p0], 1e-12, grid.clone())
            .with_max_step(ode::dense_step_cap((0.0, 5.0)));
        let sol = ode::solve_ivp(&p).unwrap();
        for (t, s) in sol.times.iter().zip(&sol.states).skip(1) {
            let x = lp.classical_state(q0, p0, *t).unwrap();
            worst_flow = worst_flow.max((x.q - s[0]).abs()).max((x.p - s[1]).abs());
        }
    }

    // (b) constants of motion drift over [0, 10], 1e-8
    let mut worst_drift: f64 = 0.0;
    for (_, force) in &forces {
        let lp = LinearPotential::new(m, force.clone()).unwrap();
        let (q0, p0) = (0.4, -0.6);
        for i in 1..=20 {
            let t = 0.5 * i as f64;
            let x = lp.classical_state(q0, p0, t).unwrap();
            let (i1, i2) = lp.constants_of_motion(x, t).unwrap();
            worst_drift = worst_drift.max((i1 - p0).abs()).max((i2 - q0).abs());
        }
    }

    // (c) quadrature vectors satisfy their coordinate systems under central
    // differencing, 1e-7
    let mut worst_ode: f64 = 0.0;
    let force = Channel::Sin {
        amp: 0.9,
        omega: 1.7,
        phase: 0.0,
    };
    let lp = LinearPotential::new(m, force.clone()).unwrap();
    let h = 2e-4;
    for i in 1..=8 {
        let t = 0.25 * i as f64;
        let (up, um, u) = (
            lp.quantum_u(t + h).unwrap(),
            lp.quantum_u(t - h).unwrap(),
            lp.quantum_u(t).unwrap(),
        );
        let f = force.eval(t);
        let d = |a: f64, b: f64| (a - b) / (2.0 * h);
        worst_ode = worst_ode
            .max((d(up[0], um[0]) - 1.0 / m).abs())
            .max((d(up[1], um[1]) + f).abs())
            .max((d(up[2], um[2]) + u[1] / m).abs())
            .max((d(up[3], um[3]) - (f * u[2] + u[1] * u[1] / (2.0 * m))).abs());
        let (vp, vm, v) = (
            lp.quantum_v(t + h).unwrap(),
            lp.quantum_v(t - h).unwrap(),
            lp.quantum_v(t).unwrap(),
        );
        worst_ode = worst_ode
            .max((d(vp[2], vm[2]) + v[1] / m).abs())
            .max((d(vp[3], vm[3]) + v[1] * v[1] / (2.0 * m)).abs());
    }

    // (d) the two factor orderings agree on a 2048-point Gaussian grid, 1e-8
    let phi0 = WaveFunctionGrid::gaussian(2048, 20.0, 0.4, 1.0);
    let t = 1.7;
    let a = lp.apply_evolution(&phi0, t, FactorOrdering::U).unwrap();
    let b = lp.apply_evolution(&phi0, t, FactorOrdering::V).unwrap();
    let ordering_gap = a.grid.max_difference(&b.grid);

    // (e) norm drift of the evolved wavefunction, 1e-6
    let norm_drift = (b.grid.norm() - phi0.norm()).abs();

    let ok = worst_flow < 1e-9
        && worst_drift < 1e-8
        && worst_ode < 1e-7
        && ordering_gap < 1e-8
        && norm_drift <= 1e-6;
    report(
        "5 (linear potential closed forms)",
        ok,
        &format!(
            "flow vs direct {worst_flow:.3e} (<1e-9), invariant drift {worst_drift:.3e} (<1e-8), \
             quadrature-vector equations {worst_ode:.3e} (<1e-7), ordering agreement \
             {ordering_gap:.3e} (<1e-8), norm drift {norm_drift:.3e} (<=1e-6)"
        ),
    );
}

#[test]
fn criterion_6_controllability_and_probe() {
    let se2 = &algebra::lookup("se2").unwrap().constants;
    let h3 = &algebra::lookup("h3").unwrap().constants;
    let unicycle = control::controllability_by_indices(se2, &[0, 1]).unwrap();
    let brockett = control::controllability_by_indices(h3, &[0, 1]).unwrap();
    let single = control::controllability_by_indices(h3, &[0]).unwrap();

    let exact = bracket_growth_probe(
        &ControlSystemDef::new(SystemKey::HopperExact),
        3,
        &[0.0, 0.1, 0.0],
    )
    .unwrap();
    let linear = bracket_growth_probe(
        &ControlSystemDef::new(SystemKey::HopperLinear),
        3,
        &[0.0, 0.1, 0.0],
    )
    .unwrap();
    let growing = exact.ranks.windows(2).all(|w| w[1] > w[0]);

    let ok = unicycle.controllable
        && brockett.controllable
        && !single.controllable
        && single.generated_dim == 1
        && growing
        && linear.ranks == vec![2, 3, 3, 3];
    report(
        "6 (controllability)",
        ok,
        &format!(
            "unicycle {unicycle}, brockett {brockett}, single-input {single}; \
             exact-hopper ranks {:?} keep growing, linearized ranks {:?} saturate",
            exact.ranks, linear.ranks
        ),
    );
}

#[test]
fn criterion_7_reduction() {
    let span = (0.0, 4.0);
    let grid = uniform_grid(span.0, span.1, 41);
    let tol = 1e-11;

    // planar case against the direct group-level solve
    let b1 = Channel::Sin {
        amp: 0.6,
        omega: 1.0,
        phase: 0.2,
    };
    let b2 = Channel::Cos {
        amp: 0.8,
        omega: 2.5,
    };
    let out = reduce_se2(&b1, &b2, span, tol, &grid).unwrap();
    let se2 = &algebra::lookup("se2").unwrap().constants;
    let sys = WnSystem::new(se2, FactorizationOrder::ascending(3)).unwrap();
    let controls = ControlSignal::new(vec![b1.clone(), b2.clone(), Channel::Zero]);
    let wn = sys.integrate(&controls, span, tol, &grid).unwrap();
    let rep = matgroups::rep("se2").unwrap();
    let wn_curve = sys.group_curve(rep, &wn).unwrap();
    let mut se2_gap: f64 = 0.0;
    for (a, b) in curve_matrices(&out).iter().zip(&wn_curve) {
        se2_gap = se2_gap.max((a - b).amax());
    }
    let mut tau_gap: f64 = 0.0;
    for (g, z) in out.curve.iter().zip(&out.homogeneous) {
        let tau = control::project(g).unwrap();
        tau_gap = tau_gap.max((tau[0] - z[0]).abs()).max((tau[1] - z[1]).abs());
    }

    // signature family at eps = +/-1 against the group-level solve
    let c1 = Channel::Constant(0.7);
    let c2 = Channel::Sin {
        amp: 0.25,
        omega: 1.3,
        phase: 0.0,
    };
    let c3 = Channel::Cos {
        amp: 0.2,
        omega: 1.0,
    };
    let mut gbar_gap: f64 = 0.0;
    for eps in [-1i8, 1] {
        let out = reduce_gbar(eps, &c1, &c2, &c3, span, tol, &grid).unwrap();
        let key = if eps == 1 { "geps1" } else { "geps-1" };
        let sc = &algebra::lookup(key).unwrap().constants;
        let sys = WnSystem::new(sc, FactorizationOrder::ascending(3)).unwrap();
        let controls = ControlSignal::new(vec![c1.clone(), c2.clone(), c3.clone()]);
        let wn = sys.integrate(&controls, span, tol, &grid).unwrap();
        let rep = matgroups::rep(if eps == 1 { "gbar1" } else { "gbar-1" }).unwrap();
        let wn_curve = sys.group_curve(rep, &wn).unwrap();
        for (a, b) in curve_matrices(&out).iter().zip(&wn_curve) {
            gbar_gap = gbar_gap.max((a - b).amax());
        }
        for (g, z) in out.curve.iter().zip(&out.homogeneous) {
            let tau = control::project(g).unwrap();
            tau_gap = tau_gap.max((tau[0] - z[0]).abs()).max((tau[1] - z[1]).abs());
        }
    }

    // eps = 0 matches the planar reduction through the common representation
    let se2_out = reduce_se2(&b1, &b2, span, tol, &grid).unwrap();
    let gbar_out = reduce_gbar(0, &b1, &b2, &Channel::Zero, span, tol, &grid).unwrap();
    let rep0 = matgroups::rep("gbar0").unwrap();
    let mut eps0_gap: f64 = 0.0;
    for (sg, gg) in se2_out.curve.iter().zip(&gbar_out.curve) {
        let a = rep0.exp_generator(-sg.coords[0], 0)
            * rep0.exp_generator(-sg.coords[1], 1)
            * rep0.exp_generator(-sg.coords[2], 2);
        eps0_gap = eps0_gap.max((a - gg.to_matrix()).amax());
    }

    let ok = se2_gap < 1e-6 && gbar_gap < 1e-6 && tau_gap < 1e-8 && eps0_gap < 1e-7;
    report(
        "7 (reduction)",
        ok,
        &format!(
            "curve vs group solve: planar {se2_gap:.3e}, signature {gbar_gap:.3e} (<1e-6); \
             projection consistency {tau_gap:.3e} (<1e-8); eps=0 match {eps0_gap:.3e} (<1e-7)"
        ),
    );
}

#[test]
fn criterion_8_structural_checks() {
    // Poisson tables with their central charges, exactly
    let mut poisson_ok = true;
    let q45 = poisson_bracket(HamiltonianSet::Quadratic, "h4", "h5").unwrap();
    poisson_ok &= q45.central_charge == 1.0 && q45.coefficients.iter().all(|&c| c == 0.0);
    let l23 = poisson_bracket(HamiltonianSet::LinearPotential, "h2", "h3").unwrap();
    poisson_ok &= l23.central_charge == -1.0 && l23.coefficients.iter().all(|&c| c == 0.0);
    let l12 = poisson_bracket(HamiltonianSet::LinearPotential, "h1", "h2").unwrap();
    poisson_ok &= l12.central_charge == 0.0 && l12.coefficients == vec![0.0, 0.0, -1.0];
    let l13 = poisson_bracket(HamiltonianSet::LinearPotential, "h1", "h3").unwrap();
    poisson_ok &= l13.central_charge == 0.0 && l13.coefficients.iter().all(|&c| c == 0.0);

    // signature-trig identities and addition formulas on a grid
    let mut trig_worst: f64 = 0.0;
    for eps in [-1i8, 0, 1] {
        let tr = EpsTrig::new(eps).unwrap();
        let e = eps as f64;
        for i in -15..=15 {
            let x = 0.11 * i as f64;
            trig_worst = trig_worst.max((tr.c(x).powi(2) + e * tr.s(x).powi(2) - 1.0).abs());
            for j in -6..=6 {
                let y = 0.17 * j as f64;
                let c_sum = tr.c(x) * tr.c(y) - e * tr.s(x) * tr.s(y);
                let s_sum = tr.c(x) * tr.s(y) + tr.s(x) * tr.c(y);
                trig_worst = trig_worst
                    .max((tr.c(x + y) - c_sum).abs())
                    .max((tr.s(x + y) - s_sum).abs());
            }
        }
    }
    let case_table_ok = eps_trig(0, 7.0).unwrap().0 == 1.0
        && eps_trig(-1, 1.0).unwrap() == (1.0f64.cosh(), 1.0f64.sinh(), 1.0f64.tanh());

    // group-law associativity and constraint preservation on random inputs
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0008);
    let mut assoc_worst: f64 = 0.0;
    let mut constraint_worst: f64 = 0.0;
    for _ in 0..200 {
        for group in [Group::Se2, Group::H3, Group::H3Upper] {
            let g = random_element(group, &mut rng);
            let h = random_element(group, &mut rng);
            let k = random_element(group, &mut rng);
            let l = compose(&compose(&g, &h).unwrap(), &k).unwrap();
            let r = compose(&g, &compose(&h, &k).unwrap()).unwrap();
            assoc_worst = assoc_worst.max((l.coords - r.coords).amax());
        }
        for eps in [-1i8, 1] {
            let g = random_element(Group::GBar(eps), &mut rng);
            let h = random_element(Group::GBar(eps), &mut rng);
            let k = random_element(Group::GBar(eps), &mut rng);
            let gh = compose(&g, &h).unwrap();
            constraint_worst = constraint_worst.max(gh.constraint_residual());
            let l = compose(&gh, &k).unwrap();
            let r = compose(&g, &compose(&h, &k).unwrap()).unwrap();
            assoc_worst = assoc_worst.max((l.coords - r.coords).amax());
        }
    }

    // commutator tables of the homogeneous-space fields
    let points: Vec<[f64; 2]> = (0..16)
        .map(|k| [0.2 * (k % 4) as f64 - 0.3, 0.25 * (k / 4) as f64 - 0.4])
        .collect();
    let mut fields_worst: f64 = 0.0;
    for case in [
        HomogeneousCase::Se2,
        HomogeneousCase::Gbar(-1),
        HomogeneousCase::Gbar(0),
        HomogeneousCase::Gbar(1),
    ] {
        for check in verify_fundamental_fields(case, &points) {
            fields_worst = fields_worst.max(check.residual);
        }
    }

    let ok = poisson_ok
        && case_table_ok
        && trig_worst < 1e-12
        && assoc_worst < 1e-10
        && constraint_worst < 1e-10
        && fields_worst < 1e-12;
    report(
        "8 (structural checks)",
        ok,
        &format!(
            "Poisson tables exact: {poisson_ok}; trig identities {trig_worst:.3e} (<1e-12); \
             associativity {assoc_worst:.3e}, constraint preservation {constraint_worst:.3e} \
             (<1e-10); field tables {fields_worst:.3e}"
        ),
    );
}

fn random_element(group: Group, rng: &mut impl Rng) -> GroupElement {
    match group {
        Group::GBar(eps) => loop {
            let raw: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let k = raw[0] * raw[0] + raw[1] * raw[1]
                + eps as f64 * (raw[2] * raw[2] + raw[3] * raw[3]);
            if k <= 1e-3 {
                continue;
            }
            let s = k.sqrt();
            let coords: Vec<f64> = raw.iter().map(|v| v / s).collect();
            return GroupElement::new(group, &coords).unwrap();
        },
        _ => {
            let coords: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect();
            GroupElement::new(group, &coords).unwrap()
        }
    }
}

/// The engine reproduces the full quadratic-Hamiltonian dynamics: group path
/// with the affine plane action against direct integration of the field, and
/// the central extension's first five coordinates against the base algebra.
#[test]
fn quadratic_hamiltonian_cross_checks() {
    use liesys::matgroups::Reconstruction;
    use liesys::models::{classical_quadratic_field, QuadraticCoeffs};

    let coeffs = QuadraticCoeffs::classical(
        Channel::Sin {
            amp: 0.15,
            omega: 1.0,
            phase: 0.0,
        },
        Channel::Constant(0.1),
        Channel::Cos {
            amp: 0.12,
            omega: 2.5,
        },
        Channel::Constant(0.2),
        Channel::Poly(vec![0.1, 0.02]),
    );
    let b = coeffs.control_signal();
    let span = (0.0, 5.0);
    let grid = uniform_grid(span.0, span.1, 501);

    // direct phase-plane integration
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let (qd, pd) = classical_quadratic_field(&coeffs, t, y[0], y[1]);
        dy[0] = qd;
        dy[1] = pd;
    };
    let (q0, p0) = (0.3, -0.4);
    let p = IvpProblem::new(&rhs, span, vec![q0, p0], 1e-11, grid.clone())
        .with_max_step(ode::dense_step_cap(span));
    let direct = ode::solve_ivp(&p).unwrap();

    // group path
    let entry = algebra::lookup("g5").unwrap();
    let sys = WnSystem::new(
        &entry.constants,
        FactorizationOrder::new(entry.default_order.clone(), 5).unwrap(),
    )
    .unwrap();
    let wn = sys.integrate(&b, span, 1e-11, &grid).unwrap();
    let recon = matgroups::reconstruct_state(
        &wn,
        &[q0, p0],
        &Reconstruction::ViaAffineRep {
            rep_key: "g5".into(),
        },
    )
    .unwrap();
    let mut worst: f64 = 0.0;
    for (a, b) in direct.states.iter().zip(&recon.states) {
        worst = worst.max((a[0] - b[0]).abs()).max((a[1] - b[1]).abs());
    }
    assert!(worst < 1e-6, "affine reconstruction error {worst:e}");

    // the quantum extension is central: first five coordinates match
    let hsp = algebra::lookup("hsp2").unwrap();
    let sys6 = WnSystem::new(
        &hsp.constants,
        FactorizationOrder::new(hsp.default_order.clone(), 6).unwrap(),
    )
    .unwrap();
    let b6 = b.padded_to(6);
    let wn6 = sys6.integrate(&b6, span, 1e-11, &grid).unwrap();
    let mut worst: f64 = 0.0;
    for (v5, v6) in wn.coords.iter().zip(&wn6.coords) {
        for i in 0..5 {
            worst = worst.max((v5[i] - v6[i]).abs());
        }
    }
    assert!(worst < 1e-9, "central extension changed base coordinates: {worst:e}");
}

/// Chart consistency: evolving the unicycle in its native coordinates and
/// mapping through the straightening change of variables matches evolving
/// the straightened system directly.
#[test]
fn unicycle_chart_consistency() {
    let span = (0.0, 5.0);
    let grid = uniform_grid(span.0, span.1, 501);
    let defx = ControlSystemDef::new(SystemKey::UnicycleX);
    let defy = ControlSystemDef::new(SystemKey::UnicycleY);
    let controls = ControlSignal::new(vec![
        Channel::Sin {
            amp: 0.8,
            omega: 1.0,
            phase: 0.1,
        },
        Channel::Cos {
            amp: 0.7,
            omega: 2.5,
        },
    ]);
    let x0: [f64; 3] = [0.2, -0.1, 0.3];
    let y0 = [
        x0[2],
        x0[0] * x0[2].sin() + x0[1] * x0[2].cos(),
        x0[0] * x0[2].cos() - x0[1] * x0[2].sin(),
    ];
    let xs = defx
        .direct_integrate(&controls, &x0, span, 1e-11, &grid)
        .unwrap();
    let ys = defy
        .direct_integrate(&controls, &y0, span, 1e-11, &grid)
        .unwrap();
    let mut worst: f64 = 0.0;
    for (x, y) in xs.states.iter().zip(&ys.states) {
        let mapped = [
            x[2],
            x[0] * x[2].sin() + x[1] * x[2].cos(),
            x[0] * x[2].cos() - x[1] * x[2].sin(),
        ];
        for (m, yv) in mapped.iter().zip(y) {
            worst = worst.max((m - yv).abs());
        }
    }
    assert!(worst < 1e-7, "chart change mismatch {worst:e}");
}

/// Wavefunction evolution preserves the momentum density pointwise for a
/// force-free system, and the residual of the solved trajectory converges at
/// second order in the sampling step.
#[test]
fn supporting_invariants() {
    // force-free momentum density is time-invariant
    let lp = LinearPotential::new(1.7, Channel::Zero).unwrap();
    let phi0 = WaveFunctionGrid::gaussian(1024, 12.0, 0.5, 0.9);
    let out = lp.evolve_wavefunction(&phi0, 2.3).unwrap();
    for (a, b) in out.grid.values.iter().zip(&phi0.values) {
        assert!((a.norm_sqr() - b.norm_sqr()).abs() < 1e-14);
    }

    // residual falls by ~4x when the sample grid is refined by 2x
    let sc = &algebra::lookup("h3").unwrap().constants;
    let sys = WnSystem::new(sc, FactorizationOrder::ascending(3)).unwrap();
    let controls = ControlSignal::new(vec![
        Channel::Sin {
            amp: 1.0,
            omega: 1.0,
            phase: 0.0,
        },
        Channel::Constant(1.0),
        Channel::Zero,
    ]);
    let rep = matgroups::rep("h3").unwrap();
    let mut residuals = Vec::new();
    for n in [501, 1001] {
        let grid = uniform_grid(0.0, 2.0, n);
        let wn = sys.integrate(&controls, (0.0, 2.0), 1e-12, &grid).unwrap();
        residuals.push(sys.residual(rep, &wn, &controls).unwrap());
    }
    let ratio = residuals[0] / residuals[1];
    assert!(
        (2.5..8.0).contains(&ratio),
        "expected ~4x residual drop, got {residuals:?}"
    );
}
