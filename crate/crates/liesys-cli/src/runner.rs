//! Executes the tasks of one scenario config and assembles the run report.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Result};

use liesys::algebra;
use liesys::control::{self, curve_matrices, reduce_gbar, reduce_se2};
use liesys::matgroups::{self, wrap_angle, Chart, Reconstruction, StateTrajectory};
use liesys::models::{
    ControlSystemDef, FactorOrdering, LinearPotential, PhasePoint, SystemKey, WaveFunctionGrid,
};
use liesys::ode::{self, uniform_grid, IvpProblem, Method};
use liesys::weinorman::{Channel, ControlSignal, FactorizationOrder, WnSystem};

use crate::config::{ModelKind, ScenarioConfig, Task};
use crate::io::{self, Table};
use crate::report::RunReport;

pub struct RunOptions {
    pub tol_override: Option<f64>,
    pub fixed_step: Option<f64>,
    pub out_dir_override: Option<String>,
    pub seed: u64,
}

fn method(opts: &RunOptions) -> Method {
    match opts.fixed_step {
        Some(h) => Method::FixedRk4 { h },
        None => Method::AdaptiveRk45,
    }
}

struct Paths {
    dir: PathBuf,
    prefix: String,
}

impl Paths {
    fn file(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}-{suffix}", self.prefix))
    }
}

pub fn run(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<RunReport> {
    let start = Instant::now();
    let tol = opts.tol_override.unwrap_or(cfg.tol);
    let out_dir = opts.out_dir_override.clone().unwrap_or(cfg.out_dir.clone());
    let paths = Paths {
        dir: PathBuf::from(&out_dir),
        prefix: cfg.prefix.clone(),
    };
    std::fs::create_dir_all(&paths.dir)?;

    let mut report = RunReport {
        scenario: cfg.model.name(),
        wall_seconds: 0.0,
        ..Default::default()
    };
    report.config_echo = vec![
        ("model".into(), cfg.model.name()),
        ("t-end".into(), format!("{}", cfg.t_end)),
        ("samples".into(), format!("{}", cfg.samples)),
        ("tol".into(), format!("{tol:e}")),
        (
            "method".into(),
            match opts.fixed_step {
                Some(h) => format!("fixed-step rk4, h = {h}"),
                None => "adaptive rk45".into(),
            },
        ),
        ("threshold.compare".into(), format!("{:e}", cfg.thresholds.compare)),
        ("threshold.residual".into(), format!("{:e}", cfg.thresholds.residual)),
        ("threshold.drift".into(), format!("{:e}", cfg.thresholds.drift)),
        ("seed".into(), format!("{}", opts.seed)),
        ("out-dir".into(), out_dir.clone()),
    ];

    match cfg.model {
        ModelKind::Control(key) => run_control_model(cfg, opts, key, tol, &paths, &mut report)?,
        ModelKind::LinearPotentialClassical => {
            run_classical_potential(cfg, opts, tol, &paths, &mut report)?
        }
        ModelKind::LinearPotentialQuantum => run_quantum_potential(cfg, &paths, &mut report)?,
    }

    report.wall_seconds = start.elapsed().as_secs_f64();
    let report_path = paths.file("report.txt");
    std::fs::write(&report_path, report.render())?;
    report.outputs.push(report_path.display().to_string());
    Ok(report)
}

fn wants(cfg: &ScenarioConfig, task: Task) -> bool {
    cfg.tasks.contains(&task)
}

fn wrap_outputs(states: &mut [Vec<f64>], angular: &[usize], enabled: bool) {
    if !enabled {
        return;
    }
    for s in states.iter_mut() {
        for &i in angular {
            s[i] = wrap_angle(s[i]);
        }
    }
}

fn write_states(
    path: &Path,
    tr: &StateTrajectory,
    angular: &[usize],
    wrap: bool,
    report: &mut RunReport,
) -> Result<()> {
    let mut states = tr.states.clone();
    wrap_outputs(&mut states, angular, wrap);
    io::write_table(path, &io::state_table(&tr.times, &states, None))?;
    report.outputs.push(path.display().to_string());
    Ok(())
}

fn run_control_model(
    cfg: &ScenarioConfig,
    opts: &RunOptions,
    key: SystemKey,
    tol: f64,
    paths: &Paths,
    report: &mut RunReport,
) -> Result<()> {
    let def = ControlSystemDef::with_leg_mass(key, cfg.leg_mass);
    if !cfg.initial.is_empty() && cfg.initial.len() != def.state_dim() {
        bail!(
            "model `{}` has state dimension {}, [scenario] initial has {} values",
            key.name(),
            def.state_dim(),
            cfg.initial.len()
        );
    }
    let x0 = if cfg.initial.is_empty() {
        liesys::models::standard_initial_state(key)
    } else {
        cfg.initial.clone()
    };
    let span = (0.0, cfg.t_end);
    let grid = uniform_grid(span.0, span.1, cfg.samples);
    let angular = def.angular_components();

    let mut direct: Option<StateTrajectory> = None;
    if wants(cfg, Task::Direct) || wants(cfg, Task::Compare) {
        let tr = def.direct_integrate_with(&cfg.controls, &x0, span, tol, &grid, method(opts))?;
        write_states(&paths.file("direct.csv"), &tr, angular, cfg.wrap_angles, report)?;
        report.push_ran("direct", format!("{} samples on [0, {}]", tr.times.len(), cfg.t_end));
        direct = Some(tr);
    }

    let mut recon: Option<StateTrajectory> = None;
    if wants(cfg, Task::WeiNorman) || wants(cfg, Task::Compare) {
        match def.lie_scenario() {
            Ok(scenario) => {
                let sc = &algebra::lookup(scenario.algebra_key)?.constants;
                let sys = WnSystem::new(sc, scenario.order.clone())?;
                let b = def.embed_controls(&cfg.controls)?;
                let wn = sys.integrate_with(&b, span, tol, &grid, method(opts))?;
                let wn_table = Table {
                    header: std::iter::once("t".to_string())
                        .chain((1..=wn.dim()).map(|i| format!("v{i}")))
                        .collect(),
                    rows: wn
                        .times
                        .iter()
                        .zip(&wn.coords)
                        .map(|(t, v)| {
                            let mut row = vec![*t];
                            row.extend(v.iter().copied());
                            row
                        })
                        .collect(),
                };
                let wn_path = paths.file("wn-coords.csv");
                io::write_table(&wn_path, &wn_table)?;
                report.outputs.push(wn_path.display().to_string());

                let tr = matgroups::reconstruct_state(&wn, &x0, &scenario.reconstruction)?;
                write_states(
                    &paths.file("weinorman.csv"),
                    &tr,
                    angular,
                    cfg.wrap_angles,
                    report,
                )?;
                // the residual's central differences are second order in the
                // sample step, so it gets its own fine grid
                let res_grid = uniform_grid(span.0, span.1, 10001);
                let wn_res = sys.integrate_with(&b, span, tol, &res_grid, method(opts))?;
                let rep = matgroups::rep(scenario.algebra_key)?;
                let residual = sys.residual(rep, &wn_res, &b)?;
                report.push_checked(
                    "weinorman",
                    residual,
                    cfg.thresholds.residual,
                    "right-invariant residual".into(),
                );
                recon = Some(tr);
            }
            Err(e) => {
                report.push_failed("weinorman", format!("{e}"));
            }
        }
    }

    if wants(cfg, Task::Compare) {
        if let (Some(d), Some(r)) = (&direct, &recon) {
            report.push_checked(
                "compare",
                d.max_distance(r),
                cfg.thresholds.compare,
                "max state deviation, group path vs direct".into(),
            );
        } else {
            report.push_failed("compare", "needs both solution paths".into());
        }
    }

    if wants(cfg, Task::Controllability) {
        match def.lie_scenario() {
            Ok(scenario) => {
                let sc = &algebra::lookup(scenario.algebra_key)?.constants;
                let verdict = control::controllability_by_indices(sc, &cfg.generators)?;
                report.push_ran(
                    "controllability",
                    format!("{verdict} on algebra {}", scenario.algebra_key),
                );
            }
            Err(e) => report.push_failed("controllability", format!("{e}")),
        }
    }

    if wants(cfg, Task::Reduce) {
        run_reduction(cfg, key, tol, &grid, paths, report)?;
    }

    if wants(cfg, Task::QuantumEvolve) {
        report.push_failed(
            "quantum-evolve",
            format!("model `{}` has no quantum evolution", key.name()),
        );
    }
    Ok(())
}

fn channel(cfg: &ScenarioConfig, idx: usize) -> Channel {
    cfg.controls.channels()[idx].clone()
}

fn run_reduction(
    cfg: &ScenarioConfig,
    key: SystemKey,
    tol: f64,
    grid: &[f64],
    paths: &Paths,
    report: &mut RunReport,
) -> Result<()> {
    let span = (0.0, cfg.t_end);
    let out = match key {
        SystemKey::UnicycleX | SystemKey::UnicycleY => {
            reduce_se2(&channel(cfg, 0), &channel(cfg, 1), span, tol, grid)?
        }
        SystemKey::ElasticEuler(eps) => reduce_gbar(
            eps,
            &channel(cfg, 0),
            &channel(cfg, 1),
            &channel(cfg, 2),
            span,
            tol,
            grid,
        )?,
        _ => {
            report.push_failed(
                "reduce",
                format!("no subgroup reduction is implemented for `{}`", key.name()),
            );
            return Ok(());
        }
    };

    let table = Table {
        header: vec!["t".into(), "z1".into(), "z2".into(), "h".into()],
        rows: out
            .times
            .iter()
            .zip(out.homogeneous.iter().zip(&out.subgroup))
            .map(|(t, (z, h))| vec![*t, z[0], z[1], *h])
            .collect(),
    };
    let path = paths.file("reduce.csv");
    io::write_table(&path, &table)?;
    report.outputs.push(path.display().to_string());

    // cross-check the reconstructed curve against the direct group solve
    let (alg_key, rep_key, b) = match key {
        SystemKey::ElasticEuler(eps) => {
            let (a, r) = match eps {
                -1 => ("geps-1", "gbar-1"),
                0 => ("geps0", "gbar0"),
                _ => ("geps1", "gbar1"),
            };
            (a, r, cfg.controls.padded_to(3))
        }
        _ => ("se2", "se2", cfg.controls.padded_to(3)),
    };
    let sc = &algebra::lookup(alg_key)?.constants;
    let sys = WnSystem::new(sc, FactorizationOrder::ascending(3))?;
    let wn = sys.integrate(&b, span, tol, grid)?;
    let rep = matgroups::rep(rep_key)?;
    let wn_curve = sys.group_curve(rep, &wn)?;
    let mut gap: f64 = 0.0;
    for (a, bm) in curve_matrices(&out).iter().zip(&wn_curve) {
        gap = gap.max((a - bm).amax());
    }
    report.push_checked(
        "reduce",
        gap,
        cfg.thresholds.compare,
        "reconstructed curve vs direct group solve".into(),
    );
    Ok(())
}

fn run_classical_potential(
    cfg: &ScenarioConfig,
    opts: &RunOptions,
    tol: f64,
    paths: &Paths,
    report: &mut RunReport,
) -> Result<()> {
    let force = channel(cfg, 0);
    let lp = LinearPotential::new(cfg.mass, force.clone())?;
    let (q0, p0) = match cfg.initial.as_slice() {
        [] => (0.0, 0.0),
        [q, p] => (*q, *p),
        other => bail!("phase-plane initial state needs 2 values, got {}", other.len()),
    };
    let span = (0.0, cfg.t_end);
    let grid = uniform_grid(span.0, span.1, cfg.samples);

    let mut direct: Option<StateTrajectory> = None;
    if wants(cfg, Task::Direct) || wants(cfg, Task::Compare) {
        let m = cfg.mass;
        let f = force.clone();
        let rhs = move |t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1] / m;
            dy[1] = -f.eval(t);
        };
        let p = IvpProblem {
            method: method(opts),
            max_step: Some(ode::dense_step_cap(span)),
            ..IvpProblem::new(&rhs, span, vec![q0, p0], tol, grid.clone())
        };
        let sol = ode::solve_ivp(&p)?;
        let tr = StateTrajectory {
            times: sol.times,
            states: sol.states,
        };
        let path = paths.file("direct.csv");
        io::write_table(&path, &io::state_table(&tr.times, &tr.states, Some(&["q", "p"])))?;
        report.outputs.push(path.display().to_string());
        report.push_ran("direct", format!("{} samples on [0, {}]", tr.times.len(), cfg.t_end));

        // constants of motion along the integrated flow
        let mut drift: f64 = 0.0;
        for (t, s) in tr.times.iter().zip(&tr.states).skip(1) {
            let (i1, i2) = lp.constants_of_motion(PhasePoint { q: s[0], p: s[1] }, *t)?;
            drift = drift.max((i1 - p0).abs()).max((i2 - q0).abs());
        }
        report.push_checked(
            "direct",
            drift,
            cfg.thresholds.drift,
            "constants-of-motion drift".into(),
        );
        direct = Some(tr);
    }

    let mut recon: Option<StateTrajectory> = None;
    if wants(cfg, Task::WeiNorman) || wants(cfg, Task::Compare) {
        let entry = algebra::lookup("h3-classical")?;
        let sys = WnSystem::new(
            &entry.constants,
            FactorizationOrder::new(entry.default_order.clone(), 3).unwrap(),
        )?;
        let b = ControlSignal::new(vec![
            Channel::Constant(1.0 / cfg.mass),
            force.scaled(-1.0),
            Channel::Zero,
        ]);
        let wn = sys.integrate_with(&b, span, tol, &grid, method(opts))?;
        let tr = matgroups::reconstruct_state(
            &wn,
            &[q0, p0],
            &Reconstruction::ViaChart {
                chart: Chart::AffinePlane,
            },
        )?;
        let path = paths.file("weinorman.csv");
        io::write_table(&path, &io::state_table(&tr.times, &tr.states, Some(&["q", "p"])))?;
        report.outputs.push(path.display().to_string());
        let res_grid = uniform_grid(span.0, span.1, 10001);
        let wn_res = sys.integrate_with(&b, span, tol, &res_grid, method(opts))?;
        let rep = matgroups::rep("h3-classical")?;
        let residual = sys.residual(rep, &wn_res, &b)?;
        report.push_checked(
            "weinorman",
            residual,
            cfg.thresholds.residual,
            "right-invariant residual".into(),
        );
        recon = Some(tr);
    }

    if wants(cfg, Task::Compare) {
        if let (Some(d), Some(r)) = (&direct, &recon) {
            report.push_checked(
                "compare",
                d.max_distance(r),
                cfg.thresholds.compare,
                "max state deviation, group path vs direct".into(),
            );
        }
    }

    if wants(cfg, Task::Controllability) {
        let sc = &algebra::lookup("h3-classical")?.constants;
        let verdict = control::controllability_by_indices(sc, &cfg.generators)?;
        report.push_ran("controllability", format!("{verdict} on algebra h3-classical"));
    }
    Ok(())
}

fn run_quantum_potential(
    cfg: &ScenarioConfig,
    paths: &Paths,
    report: &mut RunReport,
) -> Result<()> {
    if !wants(cfg, Task::QuantumEvolve) {
        bail!("model `linear-potential-quantum` supports exactly the quantum-evolve task");
    }
    let force = channel(cfg, 0);
    let lp = LinearPotential::new(cfg.mass, force)?;
    let q = &cfg.quantum;
    let phi0 = WaveFunctionGrid::gaussian(q.grid_points, q.p_max, q.mean, q.sigma);

    let out = lp.apply_evolution(&phi0, cfg.t_end, FactorOrdering::V)?;
    let other = lp.apply_evolution(&phi0, cfg.t_end, FactorOrdering::U)?;
    let ordering_gap = out.grid.max_difference(&other.grid);
    let norm_drift = (out.grid.norm() - phi0.norm()).abs();

    let table = Table {
        header: vec!["p".into(), "re".into(), "im".into()],
        rows: (0..out.grid.len())
            .map(|i| vec![out.grid.p_at(i), out.grid.values[i].re, out.grid.values[i].im])
            .collect(),
    };
    let path = paths.file("wavefunction.csv");
    io::write_table(&path, &table)?;
    report.outputs.push(path.display().to_string());

    let factors = lp.evolution_operator_factors(cfg.t_end)?;
    report.push_ran(
        "quantum-evolve",
        format!(
            "{} grid points, evolution operator {factors}, lost mass {:.3e}",
            out.grid.len(),
            out.lost_mass
        ),
    );
    report.push_checked(
        "quantum-evolve",
        norm_drift,
        cfg.thresholds.compare,
        "wavefunction norm drift".into(),
    );
    report.push_checked(
        "quantum-evolve",
        ordering_gap,
        cfg.thresholds.compare,
        "factor-ordering agreement".into(),
    );
    Ok(())
}

/// The `list-models` catalog.
pub fn catalog() -> String {
    let mut out = String::new();
    out.push_str("model                        state  controls  algebra        notes\n");
    let rows = [
        ("unicycle-x", "3", "2", "se2", "planar driving kinematics"),
        ("unicycle-y", "3", "2", "se2", "straightened input fields"),
        ("brockett", "3", "2", "h3", "nonholonomic integrator"),
        (
            "hopper-exact",
            "3",
            "2",
            "-",
            "not a Lie system: input brackets keep growing",
        ),
        (
            "hopper-linear",
            "3",
            "2",
            "h3",
            "small-elongation approximation of the hopper",
        ),
        (
            "elastic-euler(-1)",
            "3",
            "3",
            "geps-1",
            "rod kinematics, hyperbolic signature",
        ),
        (
            "elastic-euler(0)",
            "3",
            "3",
            "geps0",
            "rod kinematics, flat signature",
        ),
        (
            "elastic-euler(1)",
            "3",
            "3",
            "geps1",
            "rod kinematics, spherical signature",
        ),
        (
            "linear-potential-classical",
            "2",
            "1",
            "h3-classical",
            "phase-plane flow with closed-form invariants",
        ),
        (
            "linear-potential-quantum",
            "-",
            "1",
            "h3-ext",
            "momentum-space evolution operator",
        ),
    ];
    for (model, state, controls, alg, notes) in rows {
        out.push_str(&format!(
            "{model:<28} {state:<6} {controls:<9} {alg:<14} {notes}\n"
        ));
    }
    out
}

/// Consistency sweep over the compiled-in registry plus an optional
/// definition file, with seeded randomized group-law checks.
pub fn check_algebras(extra_file: Option<&Path>, seed: u64) -> Result<(String, bool)> {
    use liesys::matgroups::{compose, Group, GroupElement};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    let mut out = String::new();
    let mut all_ok = true;
    out.push_str("algebra         dim  consistency   solvable  derived dims\n");
    let mut check = |sc: &liesys::algebra::StructureConstants| {
        let rep_result = sc.check_consistency();
        let (solvable, dims) = sc.is_solvable();
        let ok = rep_result.is_clean();
        all_ok &= ok;
        out.push_str(&format!(
            "{:<15} {:<4} {:<13} {:<9} {:?}\n",
            sc.name(),
            sc.dim(),
            if ok { "clean" } else { "VIOLATED" },
            solvable,
            dims
        ));
        if !ok {
            out.push_str(&format!("{rep_result}\n"));
        }
    };
    for entry in algebra::registry() {
        check(&entry.constants);
    }
    if let Some(path) = extra_file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow!("cannot read `{}`: {e}", path.display()))?;
        for sc in algebra::parse_definitions(&text)? {
            check(&sc);
        }
    }

    // representation homomorphism residuals
    out.push_str("\nrepresentations:\n");
    for (rep_key, alg_key) in [
        ("h3", "h3"),
        ("h3-classical", "h3-classical"),
        ("h3-ext", "h3-ext"),
        ("se2", "se2"),
        ("g5", "g5"),
        ("hsp2", "hsp2"),
        ("geps-1", "geps-1"),
        ("geps0", "geps0"),
        ("geps1", "geps1"),
        ("gbar-1", "geps-1"),
        ("gbar0", "geps0"),
        ("gbar1", "geps1"),
    ] {
        let rep = matgroups::rep(rep_key)?;
        let sc = &algebra::lookup(alg_key)?.constants;
        let res = rep.homomorphism_residual(sc);
        let ok = res < 1e-12;
        all_ok &= ok;
        out.push_str(&format!(
            "  {rep_key:<14} vs {alg_key:<12} residual {res:.3e} {}\n",
            if ok { "" } else { "VIOLATED" }
        ));
    }

    // seeded randomized group-law checks
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assoc_worst: f64 = 0.0;
    let mut constraint_worst: f64 = 0.0;
    for _ in 0..200 {
        for eps in [-1i8, 0, 1] {
            let sample = |rng: &mut ChaCha8Rng| loop {
                let raw: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let k = raw[0] * raw[0]
                    + raw[1] * raw[1]
                    + eps as f64 * (raw[2] * raw[2] + raw[3] * raw[3]);
                if k > 1e-3 {
                    let s = k.sqrt();
                    let coords: Vec<f64> = raw.iter().map(|v| v / s).collect();
                    return GroupElement::new(Group::GBar(eps), &coords).unwrap();
                }
            };
            let g = sample(&mut rng);
            let h = sample(&mut rng);
            let k = sample(&mut rng);
            let gh = compose(&g, &h).unwrap();
            constraint_worst = constraint_worst.max(gh.constraint_residual());
            let l = compose(&gh, &k).unwrap();
            let r = compose(&g, &compose(&h, &k).unwrap()).unwrap();
            assoc_worst = assoc_worst.max((l.coords - r.coords).amax());
        }
    }
    let laws_ok = assoc_worst < 1e-10 && constraint_worst < 1e-10;
    all_ok &= laws_ok;
    out.push_str(&format!(
        "\ngroup laws (seed {seed}): associativity {assoc_worst:.3e}, constraint preservation \
         {constraint_worst:.3e} {}\n",
        if laws_ok { "" } else { "VIOLATED" }
    ));
    out.push_str(&format!("\nstatus: {}\n", if all_ok { "PASS" } else { "FAIL" }));
    Ok((out, all_ok))
}
