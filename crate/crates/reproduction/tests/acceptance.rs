//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.

use std::fs;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use groupfair::config::{ConfigDocument, ExperimentConfig};
use groupfair::data::{load_dataset, DatasetSchema};
use groupfair::presets::figure_preset;
use groupfair::sweep::{run_sweep, SweepOutput};
use groupfair_core::env::Environment;
use groupfair_core::numerics::{normal_quantile, ols_fit, DesignMatrix, RewardVector};
use groupfair_core::policy::argmax_lowest;
use groupfair_core::{
    cumulative_regret, run_trial, BanditInstance, GroupPartition, Policy, PolicyConfig, PolicyKind, Purpose,
    RegretKind, RngStream, Slate, StreamId, SyntheticConfig,
};
use statrs::function::erf::erfc;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn config(preset: Option<&str>, sets: &[&str]) -> ExperimentConfig {
    let mut doc = ConfigDocument::default();
    if let Some(p) = preset {
        figure_preset(p).unwrap().apply(&mut doc).unwrap();
    }
    for s in sets {
        doc.set_assignment(s).unwrap();
    }
    doc.resolve().unwrap()
}

fn mean_metric(out: &SweepOutput, point: usize, policy: PolicyKind, metric: &str) -> f64 {
    out.metric(point, policy, metric).unwrap_or_else(|| panic!("missing {metric}")).mean
}

fn stream(seed: u64, i: u64, purpose: Purpose) -> RngStream {
    RngStream::new(seed, StreamId::new(i, purpose))
}

/// Gaussian elimination with partial pivoting on `XᵀX β = XᵀY`.
fn normal_equations(rows: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let d = rows[0].len();
    let mut a = vec![vec![0.0; d + 1]; d];
    for (r, &yi) in rows.iter().zip(y) {
        for i in 0..d {
            for j in 0..d {
                a[i][j] += r[i] * r[j];
            }
            a[i][d] += r[i] * yi;
        }
    }
    for c in 0..d {
        let piv = (c..d).max_by(|&p, &q| a[p][c].abs().total_cmp(&a[q][c].abs())).unwrap();
        a.swap(c, piv);
        for r in 0..d {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..=d {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    (0..d).map(|i| a[i][d] / a[i][i]).collect()
}

fn numerics_oracles() -> Outcome {
    let mut worst_fit: f64 = 0.0;
    for case in 0..100u64 {
        let mut rng = stream(case, 0, Purpose::Instance);
        let d = 1 + rng.index(6);
        let rows: Vec<Vec<f64>> = (0..d)
            .map(|i| (0..d).map(|j| 2.0 * rng.uniform() - 1.0 + if i == j { 2.0 } else { 0.0 }).collect())
            .collect();
        let beta: Vec<f64> = (0..d).map(|_| 20.0 * rng.uniform() - 10.0).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.iter().zip(&beta).map(|(a, b)| a * b).sum()).collect();
        let fit = ols_fit(&DesignMatrix::from_rows(d, &rows).unwrap(), &RewardVector(y.clone()), 0.0).unwrap();
        let oracle = normal_equations(&rows, &y);
        for k in 0..d {
            worst_fit = worst_fit.max((fit[k] - oracle[k]).abs());
        }
    }
    let phi = |z: f64| 0.5 * erfc(-z / std::f64::consts::SQRT_2);
    let mut worst_q: f64 = 0.0;
    for k in 0..=1000 {
        let p = 10f64.powf(-6.0 + 5.7 * k as f64 / 1000.0);
        for q in [p, 1.0 - p] {
            if (1e-6..=1.0 - 1e-6).contains(&q) {
                worst_q = worst_q.max((phi(normal_quantile(q).unwrap()) - q).abs());
            }
        }
    }
    outcome(
        worst_fit <= 1e-8 && worst_q <= 1e-8,
        format!("max OLS deviation {worst_fit:.2e} (≤ 1e-8), max |Φ(Q(p)) − p| {worst_q:.2e} (≤ 1e-8)"),
    )
}

fn half_sensitive() -> Outcome {
    let cfg = config(Some("pulls_T"), &["sweep.values=[1000]", "policies=[\"group_fair\"]", "seeds=20"]);
    let out = run_sweep(&cfg, None).unwrap();
    let f = mean_metric(&out, 0, PolicyKind::GroupFair, "sensitive_fraction_trailing");
    outcome((0.40..=0.60).contains(&f), format!("group_fair trailing sensitive fraction {f:.4} ∈ [0.40, 0.60]"))
}

fn proportionality() -> Outcome {
    let cfg = config(Some("pulls_ratio"), &["sweep.values=[2, 5, 8]", "policies=[\"group_fair\"]", "seeds=20"]);
    let out = run_sweep(&cfg, None).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, k) in [2.0, 5.0, 8.0].into_iter().enumerate() {
        let f = mean_metric(&out, i, PolicyKind::GroupFair, "sensitive_fraction_trailing");
        pass &= (f - k / 10.0).abs() <= 0.12;
        parts.push(format!("k={k}: {f:.4}"));
    }
    outcome(pass, format!("{} (each within k/10 ± 0.12)", parts.join(", ")))
}

fn baseline_unfairness() -> Outcome {
    let cfg = config(
        Some("pulls_error"),
        &["sweep.values=[20]", "policies=[\"top_interval\", \"group_fair\"]", "seeds=20"],
    );
    let out = run_sweep(&cfg, None).unwrap();
    let ti = mean_metric(&out, 0, PolicyKind::TopInterval, "sensitive_fraction_trailing");
    let gf = mean_metric(&out, 0, PolicyKind::GroupFair, "sensitive_fraction_trailing");
    outcome(
        ti <= 0.25 && (0.40..=0.60).contains(&gf),
        format!("μ=20: top_interval {ti:.4} (≤ 0.25), group_fair {gf:.4} ∈ [0.40, 0.60]"),
    )
}

fn linear_regret() -> Outcome {
    let cfg = config(
        None,
        &[
            "synthetic.layout=\"dominated\"",
            "sweep.param=\"horizon\"",
            "sweep.values=[1000, 2000]",
            "policies=[\"naive_group_fair\", \"group_fair\"]",
            "seeds=20",
        ],
    );
    let out = run_sweep(&cfg, None).unwrap();
    let ratio = |k| mean_metric(&out, 1, k, "true_regret_cum") / mean_metric(&out, 0, k, "true_regret_cum");
    let (naive, gf) = (ratio(PolicyKind::NaiveGroupFair), ratio(PolicyKind::GroupFair));
    outcome(
        naive >= 1.8 && gf <= 1.6,
        format!("R(2000)/R(1000): naive_group_fair {naive:.3} (≥ 1.8), group_fair {gf:.3} (≤ 1.6)"),
    )
}

/// Fixed from the pilot sweep at the pulls_T defaults (observed ratio 0.766).
const RELATIVE_REGRET_MAX: f64 = 0.8;

fn relative_regret() -> Outcome {
    let cfg = config(
        Some("regret_T"),
        &["sweep.values=[1000]", "policies=[\"top_interval\", \"group_fair\"]", "seeds=20"],
    );
    let out = run_sweep(&cfg, None).unwrap();
    let ti = mean_metric(&out, 0, PolicyKind::TopInterval, "true_regret_cum");
    let gf = mean_metric(&out, 0, PolicyKind::GroupFair, "true_regret_cum");
    outcome(
        gf < ti && gf / ti <= RELATIVE_REGRET_MAX,
        format!("true regret at T=1000: group_fair {gf:.1}, top_interval {ti:.1}, ratio {:.3} (≤ {RELATIVE_REGRET_MAX})", gf / ti),
    )
}

fn sublinearity() -> Outcome {
    let cfg = config(Some("regret_T"), &["sweep.values=[1000, 8000]", "policies=[\"group_fair\"]", "seeds=20"]);
    let out = run_sweep(&cfg, None).unwrap();
    let short = mean_metric(&out, 0, PolicyKind::GroupFair, "true_regret_tail_rate");
    let long = mean_metric(&out, 1, PolicyKind::GroupFair, "true_regret_tail_rate");
    outcome(long < short, format!("per-round true regret over the last 10%: T=8000 {long:.4} < T=1000 {short:.4}"))
}

fn instance(sensitive: usize, bias_mean: f64, seed: u64) -> BanditInstance {
    let cfg = SyntheticConfig { group_sizes: vec![sensitive, 10 - sensitive], bias_mean, ..Default::default() };
    BanditInstance::generate(&cfg, &mut stream(seed, 0, Purpose::Instance)).unwrap()
}

fn reachable_from_top(lower: &[f64], upper: &[f64]) -> Vec<bool> {
    let n = lower.len();
    let top = (0..n).fold(0, |b, i| if upper[i] > upper[b] { i } else { b });
    let mut seen = vec![false; n];
    seen[top] = true;
    let mut stack = vec![top];
    while let Some(a) = stack.pop() {
        for b in 0..n {
            if !seen[b] && lower[a] <= upper[b] && lower[b] <= upper[a] {
                seen[b] = true;
                stack.push(b);
            }
        }
    }
    seen
}

fn policy_properties() -> Outcome {
    let mut failures = Vec::new();

    // exact ties resolve to the lowest index
    let p = GroupPartition::two_group(3, 1).unwrap();
    let cfg = PolicyConfig { horizon: 100, exploration_exponent: 60.0, ..Default::default() };
    let mut pol = Policy::new(PolicyKind::TopInterval, cfg, p, 1).unwrap();
    for k in 1..=5 {
        for arm in 0..3 {
            pol.update(arm, &[0.2 * k as f64], 0.5 * k as f64).unwrap();
        }
    }
    let slate = Slate::new(10, vec![vec![0.5]; 3]);
    let tie_ok = argmax_lowest(&[2.0, 5.0, 5.0]) == Some(1)
        && (2..50).all(|t| pol.select(&slate, t, &mut stream(t, t, Purpose::Policy)).unwrap().arm == 0);
    if !tie_ok {
        failures.push("tie-break");
    }

    // chained pulls connect to the top interval
    let inst = instance(5, 10.0, 31);
    let mut ic = Policy::new(PolicyKind::IntervalChaining, PolicyConfig::default(), inst.partition().clone(), 2).unwrap();
    let mut chain_ok = true;
    for t in 1..=2000 {
        let slate = inst.sample_slate(t, &mut stream(31, t, Purpose::Slate));
        let d = ic.select(&slate, t, &mut stream(31, t, Purpose::Policy)).unwrap();
        if let (false, Some(ub), Some(w)) = (d.explored, &d.upper_bounds, &d.widths) {
            if w.iter().all(|w| w.is_finite()) {
                let lb: Vec<f64> = ub.iter().zip(w).map(|(u, w)| u - 2.0 * w).collect();
                chain_ok &= reachable_from_top(&lb, ub)[d.arm];
            }
        }
        let r = inst.observed_reward(d.arm, slate.context(d.arm), &mut stream(31, t, Purpose::Noise));
        ic.update(d.arm, slate.context(d.arm), r).unwrap();
    }
    if !chain_ok {
        failures.push("chain validity");
    }

    // uniform group draw
    let rounds = 100_000u64;
    let mut naive =
        Policy::new(PolicyKind::NaiveGroupFair, PolicyConfig { horizon: rounds, ..Default::default() }, inst.partition().clone(), 2)
            .unwrap();
    let mut hits = 0u64;
    for t in 1..=rounds {
        let slate = inst.sample_slate(t, &mut stream(32, t, Purpose::Slate));
        let d = naive.select(&slate, t, &mut stream(32, t, Purpose::Policy)).unwrap();
        hits += inst.partition().is_sensitive(d.arm) as u64;
        let r = inst.observed_reward(d.arm, slate.context(d.arm), &mut stream(32, t, Purpose::Noise));
        naive.update(d.arm, slate.context(d.arm), r).unwrap();
    }
    let freq = hits as f64 / rounds as f64;
    if (freq - 0.5).abs() > 3.0 * (0.25 / rounds as f64).sqrt() || !(0.495..=0.505).contains(&freq) {
        failures.push("group frequency");
    }

    // explore-round count
    let horizon = 10_000u64;
    let mut ti = Policy::new(PolicyKind::TopInterval, PolicyConfig { horizon, ..Default::default() }, inst.partition().clone(), 2).unwrap();
    let traj = run_trial(&inst, &mut ti, horizon, 33).unwrap();
    let explored = traj.outcomes.iter().filter(|o| o.explored).count() as f64;
    let probs: Vec<f64> = (1..=horizon).map(|t| (t as f64).powf(-1.0 / 3.0)).collect();
    let expected: f64 = probs.iter().sum();
    let sd = probs.iter().map(|p| p * (1.0 - p)).sum::<f64>().sqrt();
    if (explored - expected).abs() > 3.0 * sd {
        failures.push("explore count");
    }

    // zero bias: both regrets coincide
    let unbiased = instance(5, 0.0, 34);
    for kind in PolicyKind::ALL {
        let mut pol = Policy::new(kind, PolicyConfig { horizon: 300, ..Default::default() }, unbiased.partition().clone(), 2).unwrap();
        let traj = run_trial(&unbiased, &mut pol, 300, 34).unwrap();
        if cumulative_regret(&traj, RegretKind::True).unwrap() != cumulative_regret(&traj, RegretKind::Biased).unwrap() {
            failures.push("zero-bias equivalence");
            break;
        }
    }

    outcome(
        failures.is_empty(),
        format!(
            "tie-break, chain validity, group frequency {freq:.4}, explore count {explored} vs {expected:.1} ± 3·{sd:.1}, zero-bias equivalence{}",
            if failures.is_empty() { String::new() } else { format!("; failed: {}", failures.join(", ")) }
        ),
    )
}

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let go = |jobs: &str| -> PathBuf {
        let out = dir.path().join(format!("jobs{jobs}"));
        let args = ["groupfair", "replicate", "pulls_T", "--jobs", jobs, "--out", out.to_str().unwrap()];
        assert_eq!(groupfair::cli::main_with_args(args), 0);
        out
    };
    let (a, b) = (go("1"), go("8"));
    let mut names: Vec<String> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    let same = names.iter().all(|n| fs::read(a.join(n)).unwrap() == fs::read(b.join(n)).ok().unwrap_or_default());
    let count_b = fs::read_dir(&b).unwrap().count();
    outcome(same && count_b == names.len(), format!("`replicate pulls_T` with --jobs 1 and --jobs 8: {} files byte-identical", names.len()))
}

fn dataset_adapter() -> Outcome {
    let assets = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../groupfair/assets");
    let schema = DatasetSchema::load(&assets.join("schemas/family_income.toml")).unwrap();
    let env = load_dataset(&assets.join("fixtures/family_income.csv"), &schema).unwrap();
    let arms = env.arms();
    let max_norm = (0..arms)
        .flat_map(|a| env.pool(a).iter().map(|&r| env.row_context(r).iter().map(|v| v * v).sum::<f64>().sqrt()))
        .fold(0.0, f64::max);

    let draws = 100_000u64;
    let mut counts: Vec<Vec<u64>> = (0..arms).map(|a| vec![0; env.pool(a).len()]).collect();
    let position = |arm: usize, row: usize| env.pool(arm).iter().position(|&r| r == row).unwrap();
    for t in 0..draws {
        for (arm, row) in env.draw_rows(&mut stream(41, t, Purpose::Slate)).into_iter().enumerate() {
            counts[arm][position(arm, row)] += 1;
        }
    }
    let worst = counts
        .iter()
        .flat_map(|c| c.iter().map(move |&k| (k as f64 / draws as f64 - 1.0 / c.len() as f64).abs()))
        .fold(0.0, f64::max);

    let cfg = config(None, &["horizon=500", "seeds=3"]);
    let out = run_sweep(&cfg, Some(&env)).unwrap();
    let biased_only = out.summary.iter().all(|r| !r.metric.starts_with("true_regret"))
        && out.summary.iter().any(|r| r.metric.starts_with("biased_regret_cum@"))
        && out.cells.iter().all(|c| c.trajectory.len() == 500 && c.trajectory.outcomes.iter().all(|o| o.true_regret.is_none()));
    outcome(
        arms == 10 && max_norm <= 1.0 && worst <= 0.01 && biased_only,
        format!(
            "arms {arms}, max ‖x‖ {max_norm:.4}, worst row-frequency deviation {worst:.4} (≤ 0.01), T=500 run biased-regret only: {biased_only}"
        ),
    )
}

fn main() {
    type Check = (u32, &'static str, u64, fn() -> Outcome);
    let checks: [Check; 10] = [
        (1, "numerics oracle equivalence", 5, numerics_oracles),
        (2, "sensitive arms pulled about half the time", 120, half_sensitive),
        (3, "pull share proportional to sensitive count", 300, proportionality),
        (4, "baselines under-pull the sensitive group", 120, baseline_unfairness),
        (5, "naive group fairness has linear regret", 180, linear_regret),
        (6, "lower true regret than TopInterval", 120, relative_regret),
        (7, "per-round true regret shrinks with T", 600, sublinearity),
        (8, "policy property suite", 120, policy_properties),
        (9, "thread count does not change outputs", 240, reproducibility),
        (10, "dataset adapter", 60, dataset_adapter),
    ];
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    // optional criterion numbers select a subset
    let filter: Vec<u32> = args.iter().filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, limit, check) in checks {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let pass = result.pass && in_time;
        failed += !pass as u32;
        println!(
            "{} criterion {id:>2}: {name}: {} [{:.1} s, limit {limit} s{}]",
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", over time" }
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
