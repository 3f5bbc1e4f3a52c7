//! Acceptance suite on the desk profile. Prints one PASS/FAIL line per
//! criterion and exits non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use common::{build, desk};
use flwbc::analysis::{
    aep_reports, convergence_bound, exact_aep, phi_diagnostic, phi_series, robustness_bound, robustness_check, AepRuns,
    TheoryParams,
};
use flwbc::attack::AttackPolicy;
use flwbc::data::Dataset;
use flwbc::defense::{cdp_clipped_mean, cma_aggregate, ctma_aggregate, ldp_apply, DefensePolicy};
use flwbc::engine::{AttackMode, LearningRate, Trajectory};
use flwbc::nn::{clip_to_norm, hvp, loss, loss_and_grad, Activation, Batch, HvpMethod, Loss, ModelSpec, ParamVec};
use flwbc::rng::{derive_rng, Purpose, RngStream};
use flwbc::scenario::{median_mitigation, mitigation_report, ExperimentConfig, ModelConfig};
use rand::Rng;

type Check = fn() -> Result<String, String>;

const SEEDS: [u64; 3] = [27, 28, 29];
const S_GRID: [f64; 3] = [0.1, 0.4, 1.0];

fn main() -> ExitCode {
    let checks: [(&str, Check); 10] = [
        ("zero-noise identity", c1_zero_noise_identity),
        ("AEP nullity", c2_aep_nullity),
        ("estimator exact on quadratics", c3_estimator_quadratic),
        ("HVP and gradient oracles", c4_hvp_gradient),
        ("aggregation algebra", c5_aggregation),
        ("clipping bound", c6_clipping),
        ("kernel diagnostic", c7_kernel_phi),
        ("defense comparison", c8_defenses),
        ("bound calculators", c9_bounds),
        ("determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s(e: flwbc::Error) -> String {
    e.to_string()
}

fn with_defense(mut cfg: ExperimentConfig, defense: DefensePolicy) -> ExperimentConfig {
    cfg.federation.defense = defense;
    cfg
}

fn c1_zero_noise_identity() -> Result<String, String> {
    let cfg = desk();
    let plain = build(&cfg).run(AttackMode::Configured, false).map_err(e2s)?;
    let wbc = build(&with_defense(cfg, DefensePolicy::Flwbc { s: 0.0 }))
        .run(AttackMode::Configured, false)
        .map_err(e2s)?;
    ensure(
        common::log_bits(&plain.records) == common::log_bits(&wbc.records),
        || "round logs differ".into(),
    )?;
    let same_params = plain
        .final_params()
        .values()
        .iter()
        .zip(wbc.final_params().values())
        .all(|(a, b)| a.to_bits() == b.to_bits());
    ensure(same_params, || "final parameters differ".into())?;
    Ok(format!("{} rounds bit-identical", plain.records.len()))
}

fn c2_aep_nullity() -> Result<String, String> {
    let mut honest = desk();
    honest.federation.attack = AttackPolicy {
        alpha: 1.0,
        ..honest.federation.attack
    };
    let mut absent = desk();
    absent.federation.attacker_ids.clear();
    absent.federation.adversarial_prob = 0.0;
    absent.federation.adversaries_per_round = 0;
    let mut worst: f64 = 0.0;
    for cfg in [honest, absent] {
        let reports = exact_aep(&build(&cfg), cfg.federation.rounds).map_err(e2s)?;
        worst = reports.iter().map(|r| r.delta_norm).fold(worst, f64::max);
    }
    ensure(worst <= 1e-12, || format!("max |delta| = {worst:e}"))?;
    Ok(format!("max |delta| = {worst:e} over alpha=1 and no-attacker runs"))
}

fn c3_estimator_quadratic() -> Result<String, String> {
    let mut cfg = desk();
    cfg.model = ModelConfig {
        hidden: vec![],
        activation: Activation::Identity,
        loss: Loss::MeanSquaredError,
    };
    cfg.federation.learning_rate = LearningRate::Constant(0.05);
    cfg.federation.capture_trajectories = true;
    let sim = build(&cfg);
    let reports = aep_reports(&sim, true).map_err(e2s)?;
    ensure(reports.iter().any(|r| r.delta_norm > 1e-6), || {
        "attack left no effect".into()
    })?;
    let mut worst: f64 = 0.0;
    for r in &reports {
        let err = r.estimate_rel_error.ok_or("missing estimate")?;
        ensure(err <= 1e-6, || format!("round {}: relative error {err:e}", r.round))?;
        worst = worst.max(err);
    }
    Ok(format!("{} rounds, max relative error {worst:e}", reports.len()))
}

fn random_vec(rng: &mut RngStream, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

fn rel_err(a: &ParamVec, b: &ParamVec) -> f64 {
    let diff = (a - b).norm();
    if b.norm() == 0.0 {
        diff
    } else {
        diff / b.norm()
    }
}

fn c4_hvp_gradient() -> Result<String, String> {
    let mut worst_hvp: f64 = 0.0;
    for case in 0..100 {
        let mut rng = derive_rng(4, case, 0, Purpose::Data);
        let (d, o, b) = (rng.random_range(1..8), rng.random_range(1..5), rng.random_range(1..10));
        let spec = Arc::new(ModelSpec::linear_regression(d, o).map_err(e2s)?);
        let p = spec.param_count();
        let w = ParamVec::from_values(&spec, random_vec(&mut rng, p, 2.0)).map_err(e2s)?;
        let v = ParamVec::from_values(&spec, random_vec(&mut rng, p, 1.0)).map_err(e2s)?;
        let batch =
            Batch::regression(random_vec(&mut rng, b * d, 3.0), d, random_vec(&mut rng, b * o, 1.0)).map_err(e2s)?;
        let fd = hvp(&w, &batch, &v, HvpMethod::FiniteDiff { eps: None }).map_err(e2s)?;
        let exact = hvp(&w, &batch, &v, HvpMethod::AnalyticQuadratic).map_err(e2s)?;
        let err = rel_err(&fd, &exact);
        ensure(err <= 1e-6, || format!("HVP instance {case}: relative error {err:e}"))?;
        worst_hvp = worst_hvp.max(err);
    }

    let mut worst_grad: f64 = 0.0;
    for case in 0..20 {
        let mut rng = derive_rng(4, case, 1, Purpose::Data);
        let (d, h, c, b) = (
            rng.random_range(2..7),
            rng.random_range(2..9),
            rng.random_range(2..5),
            rng.random_range(1..8),
        );
        let (activation, loss_kind) = if case % 2 == 0 {
            (Activation::Relu, Loss::SoftmaxCrossEntropy)
        } else {
            (Activation::Identity, Loss::MeanSquaredError)
        };
        let spec = Arc::new(ModelSpec::new(vec![d, h, c], activation, loss_kind).map_err(e2s)?);
        let w = ParamVec::from_values(&spec, random_vec(&mut rng, spec.param_count(), 1.0)).map_err(e2s)?;
        let inputs = random_vec(&mut rng, b * d, 2.0);
        let batch = match loss_kind {
            Loss::SoftmaxCrossEntropy => {
                Batch::classification(inputs, d, (0..b).map(|_| rng.random_range(0..c)).collect())
            }
            Loss::MeanSquaredError => Batch::regression(inputs, d, random_vec(&mut rng, b * c, 1.0)),
        }
        .map_err(e2s)?;
        let (_, g) = loss_and_grad(&w, &batch).map_err(e2s)?;
        let step = 1e-6;
        let mut numeric = Vec::with_capacity(w.len());
        for j in 0..w.len() {
            let mut plus = w.values().to_vec();
            let mut minus = plus.clone();
            plus[j] += step;
            minus[j] -= step;
            let lp = loss(&ParamVec::from_values(&spec, plus).map_err(e2s)?, &batch).map_err(e2s)?;
            let lm = loss(&ParamVec::from_values(&spec, minus).map_err(e2s)?, &batch).map_err(e2s)?;
            numeric.push((lp - lm) / (2.0 * step));
        }
        let numeric = ParamVec::from_values(&spec, numeric).map_err(e2s)?;
        let err = rel_err(&numeric, &g);
        ensure(err <= 1e-5, || {
            format!("gradient instance {case}: relative error {err:e}")
        })?;
        worst_grad = worst_grad.max(err);
    }
    Ok(format!(
        "HVP max rel err {worst_hvp:e} (100 cases), gradient max rel err {worst_grad:e} (20 MLPs)"
    ))
}

/// Median by counting ranks instead of sorting the column.
fn rank_median(column: &[f64]) -> f64 {
    let k = column.len();
    let kth = |r: usize| {
        *column
            .iter()
            .find(|&&x| {
                let below = column.iter().filter(|&&y| y < x).count();
                let equal = column.iter().filter(|&&y| y == x).count();
                below <= r && r < below + equal
            })
            .expect("every rank is held by some value")
    };
    if k % 2 == 1 {
        kth(k / 2)
    } else {
        (kth(k / 2 - 1) + kth(k / 2)) / 2.0
    }
}

fn c5_aggregation() -> Result<String, String> {
    for case in 0..1000 {
        let mut rng = derive_rng(5, case, 0, Purpose::Data);
        let k = rng.random_range(1..10);
        let n = rng.random_range(1..12);
        let spec = Arc::new(ModelSpec::linear_regression(n, 1).map_err(e2s)?);
        let ties = case % 3 == 0;
        let models: Vec<ParamVec> = (0..k)
            .map(|_| {
                let mut v = random_vec(&mut rng, spec.param_count(), 10.0);
                if ties {
                    v.iter_mut().for_each(|x| *x = x.round());
                }
                ParamVec::from_values(&spec, v).unwrap()
            })
            .collect();
        let refs: Vec<&ParamVec> = models.iter().collect();
        let cma = cma_aggregate(&refs).map_err(e2s)?;
        for j in 0..spec.param_count() {
            let column: Vec<f64> = models.iter().map(|m| m.values()[j]).collect();
            let want = rank_median(&column);
            ensure(cma.values()[j] == want, || {
                format!("fixture {case} coord {j}: CMA {} vs median {want}", cma.values()[j])
            })?;
            let mean = column.iter().sum::<f64>() / k as f64;
            let ctma0 = ctma_aggregate(&refs, 0.0).map_err(e2s)?.values()[j];
            ensure((ctma0 - mean).abs() <= 1e-12, || {
                format!("fixture {case} coord {j}: CTMA(0) {ctma0} vs mean {mean}")
            })?;
        }
        if k == 5 {
            ensure(ctma_aggregate(&refs, 0.4).map_err(e2s)? == cma, || {
                format!("fixture {case}: CTMA(K=5, 0.4) differs from CMA")
            })?;
        }
    }
    // a K=5 case is not guaranteed above, so pin one down explicitly
    let mut rng = derive_rng(5, 0, 1, Purpose::Data);
    let spec = Arc::new(ModelSpec::linear_regression(30, 1).map_err(e2s)?);
    let five: Vec<ParamVec> = (0..5)
        .map(|_| ParamVec::from_values(&spec, random_vec(&mut rng, 31, 5.0)).unwrap())
        .collect();
    let refs: Vec<&ParamVec> = five.iter().collect();
    ensure(
        ctma_aggregate(&refs, 0.4).map_err(e2s)? == cma_aggregate(&refs).map_err(e2s)?,
        || "CTMA(K=5, 0.4) differs from CMA".into(),
    )?;
    Ok("1000 fixtures: CMA equals rank median, CTMA(0) equals mean, CTMA(K=5, 0.4) equals CMA".into())
}

fn c6_clipping() -> Result<String, String> {
    let mut checked = 0usize;
    let mut check = |norm: f64, clip: f64, what: &str| {
        checked += 1;
        ensure(norm <= clip, || format!("{what}: norm {norm:e} > clip {clip:e}"))
    };
    for case in 0..500 {
        let mut rng = derive_rng(6, case, 0, Purpose::Data);
        let n = rng.random_range(1..40);
        let spec = Arc::new(ModelSpec::linear_regression(n, 1).map_err(e2s)?);
        let clip = 10f64.powf(rng.random_range(-3.0..1.0));
        let scale = 10f64.powf(rng.random_range(-3.0..3.0));
        let prev = ParamVec::from_values(&spec, random_vec(&mut rng, n + 1, scale)).map_err(e2s)?;
        let k = rng.random_range(1..8);
        let models: Vec<ParamVec> = (0..k)
            .map(|_| ParamVec::from_values(&spec, random_vec(&mut rng, n + 1, scale)).unwrap())
            .collect();
        let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
        let refs: Vec<&ParamVec> = models.iter().collect();
        check(clip_to_norm(&(&models[0] - &prev), clip).norm(), clip, "clip_to_norm")?;
        check(
            cdp_clipped_mean(&refs, &weights, &prev, clip).map_err(e2s)?.norm(),
            clip,
            "CDP mean",
        )?;
        let mut noise = derive_rng(6, case, 1, Purpose::Noise);
        check(
            ldp_apply(&(&models[0] - &prev), clip, 0.0, &mut noise)
                .map_err(e2s)?
                .norm(),
            clip,
            "LDP",
        )?;
    }

    // real local updates from the desk run, at a clip that binds
    let cfg = desk();
    let sim = build(&cfg);
    let run = sim.run(AttackMode::Configured, false).map_err(e2s)?;
    let clip = 0.5;
    for (t, r) in run.rounds.iter().enumerate() {
        let prev = run.global_before(t);
        let models: Vec<&ParamVec> = r.updates.iter().map(|u| &u.final_params).collect();
        let weights: Vec<f64> = r.updates.iter().map(|u| u.weight).collect();
        check(
            cdp_clipped_mean(&models, &weights, prev, clip).map_err(e2s)?.norm(),
            clip,
            "desk CDP mean",
        )?;
        for u in &r.updates {
            let mut noise = derive_rng(cfg.federation.seed, t, u.client_id, Purpose::Noise);
            let update = &u.final_params - prev;
            check(
                ldp_apply(&update, clip, 0.0, &mut noise).map_err(e2s)?.norm(),
                clip,
                "desk LDP",
            )?;
        }
    }
    Ok(format!("{checked} clipped updates within bound"))
}

/// Least squares whose second input column is always zero, so the weights on
/// that column span the Hessian kernel.
fn rank_deficient() -> Result<(Arc<ModelSpec>, Dataset, Trajectory), String> {
    let spec = Arc::new(ModelSpec::linear_regression(2, 2).map_err(e2s)?);
    let train = Dataset::new(vec![1.0, 0.0, -0.5, 0.0, 2.0, 0.0, 0.3, 0.0], 2, vec![0, 1, 1, 0], 2).map_err(e2s)?;
    let w = ParamVec::from_values(&spec, vec![0.1, -0.2, 0.3, 0.4, 0.05, -0.05]).map_err(e2s)?;
    let traj = Trajectory {
        snapshots: vec![w.clone(), w.clone(), w],
        batches: vec![vec![0, 1], vec![2, 3]],
        etas: vec![0.1, 0.1],
    };
    Ok((spec, train, traj))
}

fn c7_kernel_phi() -> Result<String, String> {
    let (spec, train, traj) = rank_deficient()?;
    // row-major out × in: entries 1 and 3 multiply the zero column
    let mut kernel = vec![0.0; spec.param_count()];
    kernel[1] = 1.0;
    kernel[3] = -2.0;
    let kernel = ParamVec::from_values(&spec, kernel).map_err(e2s)?;
    let k = phi_diagnostic(0, &kernel, &[&traj], &train).map_err(e2s)?;
    ensure(k.phi_vector_norm <= 1e-10, || {
        format!("kernel |phi| = {:e}", k.phi_vector_norm)
    })?;

    let cfg = desk();
    let sim = build(&cfg);
    let run = sim.run(AttackMode::Configured, true).map_err(e2s)?;
    let phis = phi_series(&sim, &run).map_err(e2s)?;
    let first = phis.first().ok_or("no adversarial round with a following round")?;
    let conf = |t: usize| run.records[t].misclassification_confidence;
    let persistent: Vec<_> = phis
        .iter()
        .filter(|p| {
            let t = p.adversarial_round;
            t + 3 < run.records.len() && (t + 1..=t + 3).all(|u| conf(u) > 0.9)
        })
        .collect();
    ensure(!persistent.is_empty(), || "no persistent adversarial round".into())?;
    let mean = persistent.iter().map(|p| p.mean_abs_phi).sum::<f64>() / persistent.len() as f64;
    let ratio = mean / first.mean_abs_phi;
    let rounds: Vec<usize> = persistent.iter().map(|p| p.adversarial_round).collect();
    ensure(ratio <= 0.1, || {
        format!(
            "persistent rounds {rounds:?}: mean |phi| {mean:e} is {ratio:.3} of first {:e}",
            first.mean_abs_phi
        )
    })?;
    Ok(format!(
        "kernel |phi| {:e}; first round {} |phi| {:e}, persistent {rounds:?} mean {mean:e}, ratio {ratio:.4}",
        k.phi_vector_norm, first.adversarial_round, first.mean_abs_phi
    ))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Median mitigation over the run's adversarial rounds (not mitigated counts
/// as horizon + 1) and final benign accuracy.
fn defense_outcome(seed: u64, defense: DefensePolicy) -> Result<(f64, f64), String> {
    let mut cfg = with_defense(desk(), defense);
    cfg.federation.seed = seed;
    cfg.federation.capture_trajectories = false;
    let run = build(&cfg).run(AttackMode::Configured, false).map_err(e2s)?;
    let outcomes = mitigation_report(&run.records, cfg.malicious_samples, cfg.horizon);
    let med = median_mitigation(&outcomes).ok_or_else(|| format!("seed {seed}: no uncensored adversarial round"))?;
    let acc = run.records.last().map_or(0.0, |r| r.benign_accuracy);
    Ok((med, acc))
}

fn c8_defenses() -> Result<String, String> {
    let cfg = desk();
    let horizon = cfg.horizon as f64;
    let mut lines = Vec::new();
    let mut table = |name: String, defense: DefensePolicy| -> Result<(f64, Vec<f64>), String> {
        let per_seed: Vec<(f64, f64)> = SEEDS
            .iter()
            .map(|&s| defense_outcome(s, defense))
            .collect::<Result<_, _>>()?;
        let meds: Vec<f64> = per_seed.iter().map(|p| p.0).collect();
        let accs: Vec<f64> = per_seed.iter().map(|p| p.1).collect();
        let m = median(meds.clone());
        println!("    {name:<14} mitigation per seed {meds:?} median {m}  accuracy {accs:?}");
        lines.push(format!("{name}={m}"));
        Ok((m, accs))
    };
    let (none_m, none_acc) = table("none".into(), DefensePolicy::None)?;
    let mut baselines = vec![("none".to_string(), none_m)];
    let (cma_m, _) = table("cma".into(), DefensePolicy::Cma)?;
    baselines.push(("cma".into(), cma_m));
    for beta in [0.1, 0.2, 0.4] {
        let name = format!("ctma({beta})");
        let (m, _) = table(name.clone(), DefensePolicy::Ctma { beta })?;
        baselines.push((name, m));
    }
    let mut best: Option<(f64, f64, f64)> = None;
    for s in S_GRID {
        let (m, accs) = table(format!("fl-wbc({s})"), DefensePolicy::Flwbc { s })?;
        let gap = median(none_acc.iter().zip(&accs).map(|(n, a)| n - a).collect());
        println!("    {:<14} median accuracy gap {gap:.3}", format!("fl-wbc({s})"));
        if gap <= 0.05 && best.is_none_or(|b| m < b.1) {
            best = Some((s, m, gap));
        }
    }
    let failing: Vec<&String> = baselines
        .iter()
        .filter(|(_, m)| *m <= horizon)
        .map(|(n, _)| n)
        .collect();
    ensure(failing.is_empty(), || {
        format!("baselines mitigating within the horizon: {failing:?}")
    })?;
    let (s, m, gap) = best.ok_or("no FL-WBC s keeps accuracy within 5 points")?;
    ensure(m <= 5.0, || format!("best FL-WBC s={s} median mitigation {m} > 5"))?;
    Ok(format!(
        "seeds {SEEDS:?}; {}; best FL-WBC s={s}: median {m}, accuracy gap {gap:.3}",
        lines.join(", ")
    ))
}

fn c9_bounds() -> Result<String, String> {
    let fixture = TheoryParams {
        p: 100,
        iterations: 4,
        k: 10,
        s: 0.01,
        learning_rate: LearningRate::Constant(0.01),
        lambda: vec![1.0],
        l: 1.0,
        mu: 1.0,
        g: 1.0,
        sigma: vec![0.5; 10],
        heterogeneity: 0.1,
        weights: vec![0.1; 10],
        init_dist_sq: 1.0,
    };
    // 100·4·0.01/10 · 0.01² · 1
    let r = robustness_bound(&fixture, 0, 1).map_err(e2s)?;
    ensure((r - 4e-5).abs() <= 1e-20, || {
        format!("robustness fixture {r:e} != 4e-5")
    })?;
    let decaying = TheoryParams {
        learning_rate: LearningRate::Decaying {
            mu: 1.0,
            smoothness: 1.0,
        },
        ..fixture
    };
    let c = convergence_bound(&decaying, 10).map_err(e2s)?;
    ensure((c.kappa, c.gamma, c.eta0) == (1.0, 8.0, 0.25), || {
        format!(
            "convergence fixture kappa {} gamma {} eta0 {}",
            c.kappa, c.gamma, c.eta0
        )
    })?;

    let mut notes = Vec::new();
    let mut all_hold = true;
    for s in S_GRID {
        let mut cfg = with_defense(desk(), DefensePolicy::Flwbc { s });
        cfg.federation.capture_trajectories = true;
        let sim = build(&cfg);
        let runs = AepRuns::compute(&sim, cfg.federation.rounds, true).map_err(e2s)?;
        let check = robustness_check(&sim, &runs).map_err(e2s)?;
        let holds = check.holds(0.1);
        all_hold &= holds;
        notes.push(format!(
            "s={s} window {}..{} measured {:.4e} bound {:.4e} ratio {:.2e} {}",
            check.t_adv,
            check.t_end,
            check.measured,
            check.bound,
            check.measured / check.bound,
            if holds { "holds" } else { "violated" }
        ));
    }
    let detail = format!("fixtures exact; {}", notes.join("; "));
    ensure(all_hold, || detail.clone())?;
    Ok(detail)
}

fn run_binary(config: &Path, out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_flwbc"))
        .args(["run", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(status.status.success(), || {
        String::from_utf8_lossy(&status.stderr).into_owned()
    })
}

fn c10_determinism() -> Result<String, String> {
    let config = common::repo_root().join("configs/desk.json");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_binary(&config, &a)?;
    run_binary(&config, &b)?;
    for file in ["rounds.csv", "summary.json"] {
        let x = std::fs::read(a.join(file)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.join(file)).map_err(|e| e.to_string())?;
        ensure(x == y, || format!("{file} differs between runs"))?;
    }
    let sim = build(&desk());
    let runs = AepRuns::compute(&sim, sim.cfg().rounds, false).map_err(e2s)?;
    let (attacked, shadow) = (runs.attacked.draw_log(), runs.shadow.draw_log());
    ensure(attacked == shadow, || "shadow run drew different batches".into())?;
    Ok(format!(
        "rounds.csv and summary.json byte-identical; {} local sessions share batch draws",
        attacked.len()
    ))
}
