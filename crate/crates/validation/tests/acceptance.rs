//! Acceptance criteria. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

use edusim_validation as support;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use edusim::experiments::{
    monte_carlo, oat_sensitivity, Metric, RunSummary, ScenarioSpec, SweepSpec,
};
use edusim::stats::welch_t;
use edusim::{SimRng, SimulationParams};
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

const SEED: u64 = 0;
const TIME_LIMIT: Duration = Duration::from_secs(300);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn completion(s: &RunSummary) -> f64 {
    s.metric(Metric::CompletionRate).mean
}

fn loans(s: &RunSummary) -> (f64, f64) {
    (
        s.metric(Metric::LoanEdufam).mean,
        s.metric(Metric::LoanFirstgen).mean,
    )
}

struct Scenarios {
    baseline: RunSummary,
    baseline_elapsed: Duration,
    s1: RunSummary,
    s2: RunSummary,
    s3: RunSummary,
}

fn run_scenarios(params: &SimulationParams) -> Scenarios {
    let reps = params.experiments.reps;
    let start = Instant::now();
    let baseline = monte_carlo(params, &ScenarioSpec::baseline(), reps, SEED, 0)
        .unwrap()
        .summary;
    let baseline_elapsed = start.elapsed();
    let run = |s: ScenarioSpec| monte_carlo(params, &s, reps, SEED, 0).unwrap().summary;
    Scenarios {
        baseline,
        baseline_elapsed,
        s1: run(ScenarioSpec::scenario1()),
        s2: run(ScenarioSpec::scenario2()),
        s3: run(ScenarioSpec::scenario3()),
    }
}

fn criterion_1(s: &Scenarios) -> Outcome {
    let c = completion(&s.baseline);
    let (edu, first) = loans(&s.baseline);
    let t = s.baseline_elapsed;
    let pass = t <= TIME_LIMIT && (c * 100.0 - 74.0).abs() <= 5.0 && edu - first >= 60.0;
    outcome(
        pass,
        format!(
            "baseline {} reps in {:.1}s (<= 300s); completion {:.2}% (74 +/- 5); loan gap {:.2} (>= 60)",
            s.baseline.n_reps,
            t.as_secs_f64(),
            c * 100.0,
            edu - first
        ),
    )
}

fn criterion_2(s: &Scenarios) -> Outcome {
    let (edu, first) = loans(&s.s1);
    let dc = (completion(&s.s1) - completion(&s.baseline)) * 100.0;
    let pass = (edu - first).abs() <= 30.0 && dc.abs() <= 2.0;
    outcome(
        pass,
        format!(
            "scenario 1 loan gap {:.2} (|gap| <= 30); completion change {:+.2} pp (within 2)",
            edu - first,
            dc
        ),
    )
}

fn criterion_3(s: &Scenarios) -> Outcome {
    let drop = (completion(&s.baseline) - completion(&s.s2)) * 100.0;
    let (e0, f0) = loans(&s.baseline);
    let (e2, f2) = loans(&s.s2);
    let (re, rf) = (e2 / e0 - 1.0, f2 / f0 - 1.0);
    let pass = drop >= 1.0 && re >= 0.25 && rf >= 0.25;
    outcome(
        pass,
        format!(
            "scenario 2 completion drop {:.2} pp (>= 1); loan rise edu-family {:.1}%, first-gen {:.1}% (>= 25%)",
            drop,
            re * 100.0,
            rf * 100.0
        ),
    )
}

fn criterion_4(s: &Scenarios) -> Outcome {
    let c3 = completion(&s.s3) * 100.0;
    let drop = completion(&s.baseline) * 100.0 - c3;
    let pass = (c3 - 54.0).abs() <= 6.0 && drop >= 15.0;
    outcome(
        pass,
        format!("scenario 3 completion {c3:.2}% (54 +/- 6); drop {drop:.2} pp (>= 15)"),
    )
}

fn sweep(params: &SimulationParams, name: &str, values: &[f64]) -> Vec<f64> {
    let cells = oat_sensitivity(
        params,
        &[SweepSpec::new(name, values.to_vec())],
        params.experiments.reps,
        SEED,
        0,
    )
    .unwrap();
    cells
        .iter()
        .map(|c| completion(&c.summary) * 100.0)
        .collect()
}

fn fmt(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| format!("{x:.2}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn criterion_5(params: &SimulationParams) -> Outcome {
    let kappa = sweep(params, "kappa", &[0.5, 1.0, 1.8, 2.0]);
    let omega = sweep(params, "omega_econ", &[0.25, 0.5, 0.75, 1.0]);
    let seg = sweep(params, "segregation", &[0.25, 0.5, 0.75]);

    let kappa_ok = kappa.windows(2).all(|w| w[1] <= w[0]);
    let omega_up = omega.windows(2).all(|w| w[1] >= w[0]);
    let second = (omega[3] - omega[2]) - (omega[2] - omega[1]);
    let omega_ok = omega_up && second < 0.0;
    let spread =
        seg.iter().cloned().fold(f64::MIN, f64::max) - seg.iter().cloned().fold(f64::MAX, f64::min);
    let seg_ok = spread < 2.0;
    outcome(
        kappa_ok && omega_ok && seg_ok,
        format!(
            "kappa [{}] non-increasing: {}; omega [{}] non-decreasing and concave (2nd diff {:+.2}): {}; \
             segregation [{}] spread {:.2} pp (< 2): {}",
            fmt(&kappa),
            kappa_ok,
            fmt(&omega),
            second,
            omega_ok,
            fmt(&seg),
            spread,
            seg_ok
        ),
    )
}

fn criterion_6() -> Outcome {
    let checks: Vec<_> = support::derived_checks()
        .into_iter()
        .chain(support::calibration_constants())
        .collect();
    let failed: Vec<String> = checks
        .iter()
        .filter_map(|c| c.result.as_ref().err().map(|e| format!("{}: {e}", c.name)))
        .collect();
    outcome(
        failed.is_empty(),
        if failed.is_empty() {
            format!("{} oracle and constant checks", checks.len())
        } else {
            failed.join("; ")
        },
    )
}

fn criterion_7() -> Outcome {
    let props: [(&str, Result<(), String>); 6] = [
        ("grant grid", support::grant_grid()),
        ("logistic", support::logistic_grid()),
        ("budget identity", support::budget_identity_full_run(71)),
        ("reciprocity", support::classmate_reciprocity(1000, 72)),
        ("determinism", support::seeded_determinism()),
        ("conservation", support::conservation_full_run(73)),
    ];
    let failed: Vec<String> = props
        .iter()
        .filter_map(|(n, r)| r.as_ref().err().map(|e| format!("{n}: {e}")))
        .collect();
    outcome(
        failed.is_empty(),
        if failed.is_empty() {
            props.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
        } else {
            failed.join("; ")
        },
    )
}

fn criterion_8() -> Outcome {
    let mut rng = SimRng::seed_from_u64(8);
    let trials = 10_000;
    let n = 1000;
    let mut rejected = 0usize;
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    for _ in 0..trials {
        for x in a.iter_mut().chain(b.iter_mut()) {
            *x = StandardNormal.sample(&mut rng);
        }
        if welch_t(&a, &b).unwrap().p < 0.05 {
            rejected += 1;
        }
    }
    let rate = rejected as f64 / trials as f64 * 100.0;
    outcome(
        (rate - 5.0).abs() <= 1.5,
        format!("Welch rejection rate {rate:.2}% (5 +/- 1.5)"),
    )
}

fn main() -> ExitCode {
    let params = SimulationParams::default();
    let mut results: Vec<(u32, Outcome)> = Vec::new();
    let mut report = |n: u32, o: Outcome| {
        println!(
            "criterion {n}: {} - {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((n, o));
    };

    report(6, criterion_6());
    report(7, criterion_7());
    report(8, criterion_8());
    let scenarios = run_scenarios(&params);
    report(1, criterion_1(&scenarios));
    report(2, criterion_2(&scenarios));
    report(3, criterion_3(&scenarios));
    report(4, criterion_4(&scenarios));
    report(5, criterion_5(&params));

    results.sort_by_key(|(n, _)| *n);
    let failed: Vec<String> = results
        .iter()
        .filter(|(_, o)| !o.pass)
        .map(|(n, _)| n.to_string())
        .collect();
    println!(
        "acceptance: {} of {} criteria passed{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failing: {}", failed.join(", "))
        }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
