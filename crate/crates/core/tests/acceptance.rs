//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the verdicts are always printed.
//!
//! A criterion listed in `KNOWN_UNATTAINABLE` may print FAIL without failing
//! the run; any other FAIL exits nonzero.

use std::collections::HashMap;
use std::process::{Command, ExitCode};
use std::time::Instant;

use probest::epidemic::{
    chain_complement_prob, chain_event_classes, chain_pi_2f1, chain_pi_analytic,
    enumerate_chain_outcomes, simulate, ChainOutcome, ChainParams, ResidualMode, SIModel,
};
use probest::estimators::{
    pi0, pi1, pi2, v0_exact, v1_exact, v1_exact_classes, v1_hat, v2_exact, v2_jackknife,
    JackknifeForm, ProbabilityClass,
};
use probest::harness::{
    chain_sweep, design_report, replication_rng, run_oracle_suite, CellStatus, OracleCell,
    OracleSuiteReport, SWEEP_P1, SWEEP_P2,
};
use probest::importance::{pi0_is, pi1_is, pi2_is, v1_is_hat, v2_is_jackknife, ISSample};
use probest::oracle::EnumerationBudget;
use probest::{DiscreteDistribution, Event, OutcomeId, ProbabilitySample};
use rand::Rng;
use rand_distr::{Binomial, Distribution};

type Criterion<'a> = (u32, &'static str, Box<dyn Fn() -> Verdict + 'a>);

const KNOWN_UNATTAINABLE: &[u32] = &[1];

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn max_discrepancy<'a>(cells: impl Iterator<Item = &'a OracleCell>) -> (usize, f64) {
    cells.fold((0, 0.0), |(count, worst), c| {
        (count + 1, worst.max(c.discrepancy.unwrap_or(f64::INFINITY)))
    })
}

fn claims_within(
    report: &OracleSuiteReport,
    claims: &[&str],
    tol: f64,
    keep: impl Fn(&OracleCell) -> bool,
) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for claim in claims {
        let (count, worst) = max_discrepancy(report.cells_for(claim).filter(|c| keep(c)));
        ok &= count > 0 && worst < tol;
        parts.push(format!("{claim}: {count} cells, max {worst:.1e}"));
    }
    (ok, parts.join("; "))
}

fn criterion_1(report: &OracleSuiteReport) -> Verdict {
    let claims = [
        "pi1_unbiased",
        "pi1_dual_unbiased",
        "mu1_unbiased_xi0",
        "mu1_unbiased_xi1",
        "v1_hat_unbiased",
        "sum_p2qn_unbiased",
    ];
    let expected_cells = 6 * (2 + 6 + 14) * 4;
    let counts_ok = claims
        .iter()
        .all(|c| report.cells_for(c).count() == expected_cells);
    let (all_ok, detail) = claims_within(report, &claims, 1e-12, |_| true);
    let (multi_ok, _) = claims_within(report, &claims, 1e-12, |c| c.n >= 2);
    let (single_ok, _) = claims_within(report, &claims[..4], 1e-12, |_| true);
    let (v1_single_count, v1_single_worst) =
        max_discrepancy(report.cells_for("v1_hat_unbiased").filter(|c| c.n == 1));
    let mut detail = format!("{detail}; {expected_cells} cells per claim: {counts_ok}");
    if !all_ok {
        detail.push_str(&format!(
            "; v1_hat at n=1 ({v1_single_count} cells) misses by up to {v1_single_worst:.3}: \
             no unbiased estimator of v1 exists from a single draw; all n>=2 cells pass: {multi_ok}"
        ));
    }
    // only the single-draw variance cells may miss
    assert!(counts_ok && multi_ok && single_ok, "{detail}");
    Verdict::new(all_ok && counts_ok, detail)
}

fn criterion_2(report: &OracleSuiteReport) -> Verdict {
    let (ok, detail) = claims_within(
        report,
        &[
            "pi1_variance",
            "v1_equal_mass",
            "pi1_is_variance",
            "pi1_is_unbiased",
        ],
        1e-12,
        |_| true,
    );
    Verdict::new(ok, detail)
}

fn criterion_3(report: &OracleSuiteReport) -> Verdict {
    let (ok, detail) = claims_within(report, &["pi0_variance"], 1e-12, |_| true);
    Verdict::new(ok, detail)
}

fn criterion_4() -> Verdict {
    let dist = DiscreteDistribution::from_weights(&[0.5, 0.3, 0.2]).unwrap();
    let event = Event::new([0, 1].map(OutcomeId));
    let pi = 0.8;
    let p_min = 0.3;
    let n_max = 400u64;
    let v1: Vec<f64> = (1..=n_max).map(|n| v1_exact(&dist, &event, n)).collect();
    let below: Vec<bool> = (1..=n_max)
        .map(|n| v1[n as usize - 1] < v0_exact(pi, n))
        .collect();
    let n0 = (1..=n_max)
        .find(|&n| below[n as usize - 1..].iter().all(|&b| b))
        .unwrap_or(u64::MAX);
    let decreasing_from = (1..n_max)
        .rev()
        .take_while(|&n| v1[n as usize] < v1[n as usize - 1])
        .last()
        .unwrap_or(n_max);
    let ratio = v1[199] / v1[198];
    let target = 1.0 - p_min;
    let rel = (ratio - target).abs() / target;
    let ok = n0 <= n_max && decreasing_from <= n0.max(1) && rel < 0.02;
    Verdict::new(
        ok,
        format!(
            "n0 = {n0} (v1 < v0 for n0..={n_max}); v1 strictly decreasing from n = {decreasing_from}; \
             v1(200)/v1(199) = {ratio:.6} vs 1 - p_min = {target} (rel {rel:.2e})"
        ),
    )
}

fn criterion_5() -> Verdict {
    let start = Instant::now();
    let params = ChainParams::new(10, 20, 0.1, 0.5).unwrap();
    let n = 10;
    let outcomes =
        enumerate_chain_outcomes(&params, params.horizon, ResidualMode::Lumped, 10_000_000)
            .unwrap();
    let mut hit: HashMap<u64, ProbabilityClass> = HashMap::new();
    let mut mass = 0.0;
    for (o, p) in &outcomes {
        if o.reaches_end_by(&params, params.horizon) {
            mass += p;
            hit.entry(p.to_bits())
                .or_insert(ProbabilityClass::plain(*p, 0))
                .count += 1;
        }
    }
    let mut classes: Vec<ProbabilityClass> = hit.into_values().collect();
    classes.sort_by(|a, b| a.weight.total_cmp(&b.weight));
    let m: u64 = classes.iter().map(|c| c.count).sum();
    let v1_enum = v1_exact_classes(&classes, n);
    let v1_analytic = v1_exact_classes(&chain_event_classes(&params), n);
    let pi = chain_pi_analytic(&params);
    let v0 = v0_exact(pi, n);
    let sweep = chain_sweep(10, 20, n, &SWEEP_P1, &SWEEP_P2).unwrap();
    let holds = sweep.iter().filter(|p| p.v1_below_v0).count();
    let fails: Vec<String> = sweep
        .iter()
        .filter(|p| !p.v1_below_v0)
        .map(|p| format!("({}, {})", p.p1, p.p2))
        .collect();
    let elapsed = start.elapsed().as_secs_f64();
    let ok = v1_enum < v0
        && (v1_enum - v1_analytic).abs() <= 1e-12 * v1_analytic
        && (mass - pi).abs() < 1e-12
        && m == 184_756
        && elapsed < 300.0;
    Verdict::new(
        ok,
        format!(
            "L=10 T=20 p1=0.1 p2=0.5 n=10: {m} enumerated outcomes, v1 = {v1_enum:.9e} < v0 = {v0:.9e} \
             (ratio {:.6}); sweep holds at {holds}/{} points, fails at {}; {elapsed:.1}s",
            v1_enum / v0,
            sweep.len(),
            fails.join(" ")
        ),
    )
}

fn criterion_6() -> Verdict {
    let mut worst_2f1: f64 = 0.0;
    let mut worst_complement: f64 = 0.0;
    let mut points = 0;
    for i in 0..100u32 {
        let length = 1 + i % 12;
        let span = 31 - length;
        let horizon = length + (i * 7) % span;
        let p2 = 0.05 + 0.9 * f64::from(i) / 99.0;
        let p1 = 0.05 + 0.9 * f64::from((i * 37) % 100) / 99.0;
        let params = ChainParams::new(length, horizon, p1, p2).unwrap();
        let series = chain_pi_analytic(&params);
        let closed = chain_pi_2f1(&params).unwrap();
        worst_2f1 = worst_2f1.max((series - closed).abs());
        worst_complement =
            worst_complement.max((series + chain_complement_prob(&params) - 1.0).abs());
        points += 1;
    }
    Verdict::new(
        worst_2f1 <= 1e-10 && worst_complement <= 1e-12,
        format!(
            "{points} points: max |2F1 - series| = {worst_2f1:.1e}, max |pi + complement - 1| = {worst_complement:.1e}"
        ),
    )
}

fn criterion_7() -> Verdict {
    let params = ChainParams::new(2, 3, 0.3, 0.4).unwrap();
    let expected = enumerate_chain_outcomes(&params, 3, ResidualMode::Expanded, 1_000).unwrap();
    let model = SIModel::chain(&params);
    let runs = 1_000_000u64;
    let mut rng = replication_rng(2024, 0, 0);
    let mut counts: HashMap<ChainOutcome, u64> = HashMap::new();
    let mut worst_logp: f64 = 0.0;
    for _ in 0..runs {
        let t = simulate(&model, &mut rng);
        let o = ChainOutcome::from_trajectory(&t);
        let exact = o.probability(&params, 3).unwrap();
        worst_logp = worst_logp.max((t.probability() - exact).abs());
        *counts.entry(o).or_default() += 1;
    }
    let mut worst_z: f64 = 0.0;
    let mut unexpected = counts.len();
    for (o, p) in &expected {
        let f = counts.get(o).copied().unwrap_or(0) as f64 / runs as f64;
        let se = (p * (1.0 - p) / runs as f64).sqrt();
        worst_z = worst_z.max((f - p).abs() / se);
        if counts.contains_key(o) {
            unexpected -= 1;
        }
    }
    Verdict::new(
        worst_z <= 4.0 && worst_logp <= 1e-12 && unexpected == 0,
        format!(
            "{runs} runs over {} outcomes: max |f - p| = {worst_z:.2} SE, max |exp(logp) - p| = {worst_logp:.1e}, \
             unseen-in-enumeration outcomes: {unexpected}",
            expected.len()
        ),
    )
}

fn criterion_8(report: &OracleSuiteReport) -> Verdict {
    // equal probabilities inside A
    let flat = DiscreteDistribution::from_weights(&[0.25, 0.25, 0.5]).unwrap();
    let a = Event::new([0, 1].map(OutcomeId));
    let mut rng = replication_rng(8, 0, 0);
    let mut zero_ok = true;
    for n in [5, 20, 100] {
        let s = flat.sample(n, &mut rng).unwrap();
        if let Ok(v) = v2_jackknife(&s, &a, JackknifeForm::Exact) {
            zero_ok &= v == 0.0;
        }
        if let Ok(v) = v2_jackknife(&s, &a, JackknifeForm::LargeK) {
            zero_ok &= v == 0.0;
        }
    }

    // p = (0.5, 0.3, 0.2), A = {0, 2}: Var(1/p | A) = 90/49, so k v2 = 0.7^4 (90/49) / 4
    let dist = DiscreteDistribution::from_weights(&[0.5, 0.3, 0.2]).unwrap();
    let event = Event::new([0, 2].map(OutcomeId));
    let k = 100_000u64;
    let v2 = v2_exact(&dist, &event, k).unwrap();
    let frozen_ok = (v2 * k as f64 - 0.11025).abs() < 1e-12;

    // pi2 depends only on the k draws inside A; outcome 0 has conditional weight 5/7
    let harmonic = |c0: u64| 2.0 * k as f64 / (c0 as f64 / 0.5 + (k - c0) as f64 / 0.2);
    let check = ProbabilitySample::new(
        [(0u64, 0.5), (0, 0.5), (2, 0.2), (1, 0.3)]
            .map(|(id, p)| probest::Draw::new(OutcomeId(id), p))
            .to_vec(),
    )
    .unwrap();
    let formula_ok =
        (pi2(&check, &event).unwrap().estimate - 2.0 * 3.0 / (2.0 / 0.5 + 1.0 / 0.2)).abs() < 1e-15;
    let binomial = Binomial::new(k, 5.0 / 7.0).unwrap();
    let reps = 20_000usize;
    let mut rng = replication_rng(8, 1, 0);
    let draws: Vec<f64> = (0..reps)
        .map(|_| harmonic(binomial.sample(&mut rng)))
        .collect();
    let mean = draws.iter().sum::<f64>() / reps as f64;
    let m2 = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    let m4 = draws.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / reps as f64;
    let var = m2 / (reps - 1) as f64;
    let biased = m2 / reps as f64;
    let se = ((m4 - biased * biased) / reps as f64).sqrt();
    let z = (var - v2).abs() / se;

    let (bias_cells, bias_worst) = report
        .cells_for("pi2_bias")
        .fold((0, 0.0f64), |(c, w), cell| {
            (c + 1, w.max(cell.measured.abs()))
        });
    let bias_reported = bias_cells > 0
        && report
            .cells_for("pi2_bias")
            .all(|c| c.status == CellStatus::Report && c.measured.is_finite());
    Verdict::new(
        zero_ok && frozen_ok && formula_ok && z <= 3.0 && bias_reported,
        format!(
            "jackknife zero on equal-probability events: {zero_ok}; k={k}: MC variance {var:.4e} vs v2 {v2:.4e} \
             ({z:.2} SE over {reps} reps); finite-k bias reported in {bias_cells} cells, max |bias| {bias_worst:.4}"
        ),
    )
}

fn same(a: probest::Result<f64>, b: probest::Result<f64>, tol: f64) -> bool {
    match (a, b) {
        (Ok(x), Ok(y)) => (x - y).abs() <= tol,
        (Err(x), Err(y)) => std::mem::discriminant(&x) == std::mem::discriminant(&y),
        _ => false,
    }
}

fn criterion_9() -> Verdict {
    let tol = 1e-14;
    let mut rng = replication_rng(9, 0, 0);
    let mut samples = 0;
    let mut agree = true;
    for weights in [
        &[0.5, 0.3, 0.2][..],
        &[0.1, 0.2, 0.3, 0.4],
        &[0.97, 0.01, 0.01, 0.01],
        &[0.3, 0.2, 0.15, 0.1, 0.1, 0.08, 0.05, 0.02],
    ] {
        let dist = DiscreteDistribution::from_weights(weights).unwrap();
        let events = [
            Event::new([0].map(OutcomeId)),
            Event::new([1, 2].map(OutcomeId)),
            Event::new((0..weights.len() as u64 - 1).map(OutcomeId)),
        ];
        for _ in 0..100 {
            let n = rng.random_range(1..=25);
            let s = dist.sample(n, &mut rng).unwrap();
            let is = ISSample::from_target_sample(&s);
            for a in &events {
                let est = |r: probest::Result<probest::EstimateReport>| r.map(|r| r.estimate);
                agree &= same(est(pi0_is(&is, a)), est(pi0(&s, a)), tol);
                agree &= same(est(pi1_is(&is, a, None)), est(pi1(&s, a)), tol);
                agree &= same(est(pi2_is(&is, a)), est(pi2(&s, a)), tol);
                agree &= same(v1_is_hat(&is, a), v1_hat(&s, a), tol);
                agree &= same(
                    v2_is_jackknife(&is, a),
                    v2_jackknife(&s, a, JackknifeForm::Exact),
                    tol,
                );
            }
            samples += 1;
        }
    }

    let budget = EnumerationBudget::default();
    let step = 0.05;
    let mut design_ok = true;
    let mut gaps = Vec::new();
    for (weights, members) in [
        (&[0.4, 0.3, 0.2, 0.1][..], &[0u64, 1, 2, 3][..]),
        (&[0.3, 0.2, 0.15, 0.1, 0.1, 0.08, 0.05, 0.02], &[0, 2, 4, 6]),
        (&[0.01, 0.02, 0.05, 0.12, 0.8], &[0, 1, 2, 3]),
    ] {
        let dist = DiscreteDistribution::from_weights(weights).unwrap();
        let event = Event::new(members.iter().map(|&i| OutcomeId(i)));
        let r = design_report(&dist, &event, 10, Some(step), &budget).unwrap();
        let grid = r.grid.unwrap();
        design_ok &= r.design.objective <= grid.objective + 1e-12;
        gaps.push(format!("{:.3e}", grid.objective - r.design.objective));
    }
    Verdict::new(
        agree && design_ok,
        format!(
            "IS with p'=p matches plain estimators on {samples} samples x 3 events at {tol:e}: {agree}; \
             |A|=4, n=10, step {step}: grid best - design = [{}]",
            gaps.join(", ")
        ),
    )
}

fn run_cli(args: &[&str]) -> (Vec<u8>, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_probest"))
        .args(args)
        .output()
        .expect("probest runs");
    (out.stdout, out.status.code().unwrap_or(-1))
}

fn criterion_10() -> Verdict {
    let runs: [&[&str]; 6] = [
        &["compare", "--seed", "17", "--reps", "1", "--n", "10"],
        &[
            "compare",
            "--seed",
            "17",
            "--reps",
            "300",
            "--n",
            "5,20",
            "--L",
            "3",
            "--T",
            "6",
            "--p1",
            "0.3",
            "--p2",
            "0.6",
            "--estimators",
            "pi0,pi1,pi1_dual,pi2",
        ],
        &[
            "hyptest", "--seed", "4", "--n", "200", "--L", "3", "--T", "6", "--p1", "0.3", "--p2",
            "0.6",
        ],
        &["chain", "--n", "10"],
        &["oracle"],
        &["design", "--grid-step", "0.1"],
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for args in runs {
        let (a, code_a) = run_cli(args);
        let (b, code_b) = run_cli(args);
        let same = a == b && code_a == 0 && code_b == 0 && !a.is_empty();
        ok &= same;
        parts.push(format!(
            "{}: {}",
            args[0],
            if same { "identical" } else { "DIFFERS" }
        ));
    }
    let (a, _) = run_cli(&["compare", "--seed", "17", "--reps", "50"]);
    let (b, _) = run_cli(&["compare", "--seed", "18", "--reps", "50"]);
    let seed_matters = a != b;
    let (_, usage) = run_cli(&["compare", "--no-such-flag"]);
    ok &= seed_matters && usage == 1;
    Verdict::new(
        ok,
        format!(
            "{}; other seed changes output: {seed_matters}; usage error exit code {usage}",
            parts.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    let report = run_oracle_suite(&EnumerationBudget::default()).expect("oracle suite runs");
    let criteria: Vec<Criterion<'_>> = vec![
        (1, "exact unbiasedness", Box::new(|| criterion_1(&report))),
        (2, "variance formulas", Box::new(|| criterion_2(&report))),
        (3, "engine self-test", Box::new(|| criterion_3(&report))),
        (4, "exponential decay", Box::new(criterion_4)),
        (5, "chain toy example", Box::new(criterion_5)),
        (6, "closed form", Box::new(criterion_6)),
        (7, "simulator fidelity", Box::new(criterion_7)),
        (8, "harmonic mean", Box::new(|| criterion_8(&report))),
        (9, "importance sampling and design", Box::new(criterion_9)),
        (10, "determinism", Box::new(criterion_10)),
    ];
    let mut unexpected = 0;
    for (id, name, run) in &criteria {
        let v = run();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} ({name}): {status}  {}", v.detail);
        if !v.pass && !KNOWN_UNATTAINABLE.contains(id) {
            unexpected += 1;
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} criteria failed");
        ExitCode::FAILURE
    }
}
