//! Acceptance criteria A1 to A8. Prints one PASS/FAIL line per criterion.
//!
//! Criteria listed in `EXPECTED_FAILURES` are known not to hold in this
//! model (see the README). They still print FAIL; the run only fails when
//! the outcome of some criterion differs from what is listed here.

use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use knot_descent::dynamics::min_clearance;
use knot_descent::energy::{repulsion_potential, spring_energy, total_forces};
use knot_descent::experiments::{Bound, ExperimentConfig, ExperimentKind, ExperimentResult};
use knot_descent::prelude::*;
use knot_descent::ropelength::DEFAULT_SKIP;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXPECTED_FAILURES: &[&str] = &["A6"];

struct Verdict {
    id: &'static str,
    passed: bool,
    detail: String,
}

fn verdict(id: &'static str, checks: &[(bool, String)]) -> Verdict {
    let passed = checks.iter().all(|(ok, _)| *ok);
    let detail = checks
        .iter()
        .map(|(ok, d)| if *ok { d.clone() } else { format!("{d} [x]") })
        .collect::<Vec<_>>()
        .join("; ");
    Verdict { id, passed, detail }
}

fn expect(res: &ExperimentResult, name: &str) -> (bool, String) {
    let e = res.expectation(name).unwrap_or_else(|| panic!("{} declares {name}", res.name));
    let bound = match e.bound {
        Bound::Within { lo, hi } => format!("in [{lo:.4}, {hi:.4}]"),
        Bound::Above { min } => format!("> {min}"),
        Bound::AtLeast { min } => format!(">= {min}"),
        Bound::Equals { target } => format!("= {target}"),
    };
    (e.passed, format!("{name} = {:.6} {bound}", e.value))
}

fn run(kind: ExperimentKind, n: usize) -> ExperimentResult {
    let res = kind.run(&ExperimentConfig::new(n)).unwrap_or_else(|e| panic!("{} at n = {n}: {e}", kind.name()));
    assert!(
        res.runs.iter().all(|r| r.trace.records().iter().all(|rec| rec.min_clearance > 0.0)),
        "{}: a recorded clearance is not positive",
        res.name
    );
    res
}

fn energy(res: &ExperimentResult, label: &str) -> f64 {
    res.snapshot(label).expect("snapshot taken").energy.simon_energy
}

fn jittered(seed: u64) -> PolyKnot {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (p, q) = [(2, 3), (3, 2), (2, 5), (4, 2), (1, 0)][seed as usize % 5];
    let base = generate_torus(&TorusKnotSpec::new(p, q, 20)).unwrap();
    let mut jitter = || rng.gen_range(-0.05..0.05);
    let comps = base
        .components()
        .map(|c| c.iter().map(|&v| v + Vec3::new(jitter(), jitter(), jitter())).collect())
        .collect();
    PolyKnot::new(comps, base.rest_edge_length() * 1.05).unwrap()
}

fn scaled(k: &PolyKnot, s: f64) -> PolyKnot {
    let comps = k.components().map(|c| c.iter().map(|&v| v * s).collect()).collect();
    PolyKnot::new(comps, k.rest_edge_length() * s).unwrap()
}

fn with_shift(k: &PolyKnot, i: usize, axis: usize, h: f64) -> PolyKnot {
    let mut comps = k.to_components();
    let c = k.component_of(i);
    let v = &mut comps[c][i - k.component_range(c).start];
    match axis {
        0 => v.x += h,
        1 => v.y += h,
        _ => v.z += h,
    }
    PolyKnot::new(comps, k.rest_edge_length()).unwrap()
}

fn worst_gradient_error() -> f64 {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for d in [2.0, 3.5, 6.0] {
        let ff = ForceField::with_exponent(d).unwrap();
        let total = |k: &PolyKnot| repulsion_potential(k, &ff).unwrap() + spring_energy(k, &ff);
        for seed in 0..20 {
            let k = jittered(seed);
            let f = total_forces(&k, &ff).unwrap();
            let (mut err2, mut norm2) = (0.0, 0.0);
            for (i, fi) in f.iter().enumerate() {
                let mut fd = [0.0; 3];
                for (axis, slot) in fd.iter_mut().enumerate() {
                    *slot = -(total(&with_shift(&k, i, axis, h)) - total(&with_shift(&k, i, axis, -h))) / (2.0 * h);
                }
                err2 += (*fi - Vec3::new(fd[0], fd[1], fd[2])).norm2();
                norm2 += fi.norm2();
            }
            worst = worst.max((err2 / norm2).sqrt());
        }
    }
    worst
}

fn a7() -> Verdict {
    let grad = worst_gradient_error();

    let mut homogeneity: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for seed in 0..10 {
        let k = jittered(seed);
        let e = simon_energy(&k).unwrap();
        let rl = thickness(&k, DEFAULT_SKIP).unwrap().ropelength;
        for s in [0.1, 2.5, 37.0] {
            let ks = scaled(&k, s);
            homogeneity = homogeneity.max((simon_energy(&ks).unwrap() * s / e - 1.0).abs());
            scale = scale.max((thickness(&ks, DEFAULT_SKIP).unwrap().ropelength / rl - 1.0).abs());
        }
    }

    let circle: Vec<Vec3> = (0..256).map(|k| TAU * k as f64 / 256.0).map(|t| Vec3::new(t.cos(), t.sin(), 0.0)).collect();
    let round = thickness(&PolyKnot::new(vec![circle], 1.0).unwrap(), DEFAULT_SKIP).unwrap().ropelength;

    let mut min_gap = f64::INFINITY;
    let mut traces = vec![];
    for _ in 0..2 {
        let params = SimParams { force_field: ForceField::with_exponent(2.0).unwrap(), ..SimParams::default() };
        let mut s = SimState::new(generate_torus(&TorusKnotSpec::new(3, 2, 40)).unwrap(), params).unwrap();
        s.perturb(0.1, 11).unwrap();
        s.set_mode(Mode::Undamped).unwrap();
        let mut trace = EnergyTrace::new();
        for _ in 0..3000 {
            s.step().unwrap();
            min_gap = min_gap.min(min_clearance(s.knot()));
            if s.step_index().is_multiple_of(s.params().record_interval) {
                trace.push(s.record().unwrap());
            }
        }
        traces.push(trace);
    }
    let identical = traces[0] == traces[1]
        && traces[0].records().iter().zip(traces[1].records()).all(|(a, b)| a.simon_energy.to_bits() == b.simon_energy.to_bits());

    verdict(
        "A7",
        &[
            (grad <= 1e-6, format!("force vs -grad {grad:.1e}")),
            (homogeneity <= 1e-10, format!("homogeneity {homogeneity:.1e}")),
            (scale <= 1e-9, format!("ropelength scale {scale:.1e}")),
            ((round - TAU).abs() <= 0.01 * TAU, format!("256-gon ropelength {round:.5}")),
            (min_gap > 0.0, format!("min clearance {min_gap:.3e}")),
            (identical, format!("bit-identical traces {identical}")),
        ],
    )
}

fn main() -> ExitCode {
    let clock = Instant::now();
    let mut verdicts = vec![];

    let trefoil = run(ExperimentKind::Trefoil, 80);
    let budget = Duration::from_secs(300);
    verdicts.push(verdict(
        "A1",
        &[
            expect(&trefoil, "e32/e23"),
            (trefoil.runtime < budget, format!("runtime {:.1} s", trefoil.runtime.as_secs_f64())),
        ],
    ));
    verdicts.push(verdict("A2", &[expect(&trefoil, "e32u/e23"), expect(&trefoil, "undamped_max_rise")]));

    let link = run(ExperimentKind::TorusLink, 80);
    verdicts.push(verdict(
        "A3",
        &[
            expect(&link, "e42/e42u"),
            expect(&link, "e42u/e24"),
            expect(&link, "linking_start"),
            expect(&link, "linking_local"),
            expect(&link, "linking_final"),
        ],
    ));

    let erl = run(ExperimentKind::Erl, 80);
    verdicts.push(verdict("A4", &[expect(&erl, "erl_d6"), expect(&erl, "erl_d3.5")]));
    let values: Vec<String> =
        ["erl_d2", "erl_d3.5", "erl_d6"].iter().map(|k| format!("{k} = {:.3}", erl.ratios[*k])).collect();
    verdicts.push(verdict("A5", &[expect(&erl, "min_erl_drop"), (true, values.join(", "))]));

    let torus34 = run(ExperimentKind::ThreeFour, 84);
    verdicts.push(verdict("A6", &[expect(&torus34, "e_sym/e_pert"), expect(&torus34, "erl6_pert/erl6_sym")]));

    verdicts.push(a7());

    let trefoil40 = run(ExperimentKind::Trefoil, 40);
    let torus40 = run(ExperimentKind::ThreeFour, 40);
    let (e32, e23) = (energy(&trefoil40, "e32"), energy(&trefoil40, "e23"));
    let (e_sym, e_pert) = (energy(&torus40, "sym"), energy(&torus40, "pert"));
    verdicts.push(verdict(
        "A8",
        &[
            (e32 > e23, format!("n = 40: E_32 = {e32:.6} > E_23 = {e23:.6}")),
            (e_sym > e_pert, format!("n = 40: E_sym = {e_sym:.6} > E_pert = {e_pert:.6}")),
        ],
    ));

    let mut unexpected = 0;
    for v in &verdicts {
        let known = EXPECTED_FAILURES.contains(&v.id);
        let note = match (v.passed, known) {
            (false, true) => " (expected failure)",
            (true, true) => " (listed as expected failure but passed)",
            _ => "",
        };
        if v.passed == known {
            unexpected += 1;
        }
        println!("{} {}: {}{note}", if v.passed { "PASS" } else { "FAIL" }, v.id, v.detail);
    }
    println!("acceptance finished in {:.1} s", clock.elapsed().as_secs_f64());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
