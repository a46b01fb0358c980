//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every line is printed even when all
//! criteria pass. A name filter given on the command line (anything not
//! starting with `-`) restricts the run to matching criteria, e.g.
//! `cargo test --test acceptance -- c09`.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use privforge::corpus::{corpus_entropy, load_dataset, PromptCodePair};
use privforge::evaluation::{
    inject_canaries, load_canaries, measure_leakage, CanarySpec, EvalReport, PiiCategory, TaskOutcome, TaskStatus,
};
use privforge::filters::{classify_execution, round_trip_validate, ExecutionOutcome, OtherKind, RoundTripConfig};
use privforge::lm::{
    init_params, kl_divergence, per_sample_gradient, sequence_nll, structural_kl, train_plain, LmConfig, LmParams,
    PlainTrainConfig, ProbDist,
};
use privforge::minilang::{extract_structural_tokens, ExecBudget, StructuralSpan};
use privforge::pipeline::{run_pipeline, Mode, PipelineConfig};
use privforge::privacy::{calibrate_sigma, clip_in_place, epsilon_for, l2_norm, Conversion};
use privforge::privsa::{lambda_at, LambdaSchedule};
use privforge::synth::{batch_generate, SamplingConfig, Strategy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Pretrained checkpoints are shared between criteria and between runs.
fn pretrain_cache() -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance-pretrain-cache")
}

// ---------------------------------------------------------------- 1, 2

/// Published (q, sigma, T, epsilon) settings at delta = 1e-5.
const GOLDEN: [(f64, f64, usize, f64); 3] = [(0.0131, 0.63, 100, 3.97), (0.0083, 0.77, 2000, 3.98), (0.0262, 0.69, 1000, 3.97)];

fn c01_accountant_golden() -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut any_conversion_ok = false;
    for conv in [Conversion::Classic, Conversion::Improved] {
        let mut all = true;
        let mut eps = Vec::new();
        for (q, sigma, t, want) in GOLDEN {
            let e = epsilon_for(q, sigma, t, 1e-5, conv).unwrap().epsilon;
            all &= (e - want).abs() <= 0.10;
            eps.push(format!("{e:.3} (want {want})"));
        }
        any_conversion_ok |= all;
        lines.push(format!("{conv:?}: {}", eps.join(", ")));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(any_conversion_ok && secs < 1.0, format!("{}; {secs:.3}s", lines.join("; ")))
}

fn c02_calibrate_sigma() -> Outcome {
    let start = Instant::now();
    let (q, _, t, _) = GOLDEN[0];
    let mut ok = false;
    let mut parts = Vec::new();
    for conv in [Conversion::Classic, Conversion::Improved] {
        let s = calibrate_sigma(q, t, 1e-5, 4.0, conv).unwrap();
        ok |= (s - 0.63).abs() <= 0.03;
        parts.push(format!("{conv:?} sigma={s:.4}"));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(ok && secs < 5.0, format!("{} (want 0.63 +- 0.03); {secs:.2}s", parts.join(", ")))
}

// ---------------------------------------------------------------- 3

fn total_loss(pj: &LmParams, prf: &LmParams, cfg: &LmConfig, pair: &PromptCodePair, spans: &[StructuralSpan], lambda: f64) -> f64 {
    let (ce, _) = sequence_nll(pj, cfg, pair).unwrap();
    if lambda == 0.0 {
        return ce;
    }
    ce + lambda * structural_kl(pj, prf, cfg, pair, spans).unwrap()
}

/// Per draw, the relative error of the whole gradient vector; also the
/// worst single coordinate, with a small floor on the denominator.
fn c03_gradient_fd() -> Outcome {
    let start = Instant::now();
    let corpus = load_dataset(data("sensitive.jsonl")).unwrap();
    let mut short: Vec<&PromptCodePair> = corpus.iter().filter(|p| p.code().len() <= 40).collect();
    short.sort_by_key(|p| p.code().len());
    let lambdas = [0.0, 1.0, 10.0, 1000.0];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_vector: f64 = 0.0;
    let mut worst_coord: f64 = 0.0;
    let mut draws = 0;
    let mut params_max = 0;
    for draw in 0..20u64 {
        let lambda = lambdas[draw as usize % lambdas.len()];
        let cfg = LmConfig::byte_level(rng.random_range(2..=3), rng.random_range(2..=4), rng.random_range(3..=5), draw);
        params_max = params_max.max(cfg.num_params());
        let pair = short[rng.random_range(0..short.len())];
        let spans = extract_structural_tokens(pair.code()).unwrap();
        let scale = rng.random_range(2.0..10.0);
        let mut pj = init_params(&cfg);
        pj.values.iter_mut().for_each(|v| *v *= scale);
        // the reference sits near the model being trained, as in fine-tuning
        let mut prf = init_params(&LmConfig { seed: draw + 1000, ..cfg });
        prf.values.iter_mut().zip(&pj.values).for_each(|(r, j)| *r = j + 2.0 * *r);
        let (grad, _) = per_sample_gradient(&pj, &prf, &cfg, pair, &spans, lambda).unwrap();
        let step = 1e-5;
        let mut probe = pj.clone();
        let mut fd = vec![0.0; cfg.num_params()];
        for (i, slot) in fd.iter_mut().enumerate() {
            let orig = probe.values[i];
            probe.values[i] = orig + step;
            let up = total_loss(&probe, &prf, &cfg, pair, &spans, lambda);
            probe.values[i] = orig - step;
            let down = total_loss(&probe, &prf, &cfg, pair, &spans, lambda);
            probe.values[i] = orig;
            *slot = (up - down) / (2.0 * step);
            let denom = grad[i].abs().max(slot.abs()).max(1e-5);
            worst_coord = worst_coord.max((grad[i] - *slot).abs() / denom);
        }
        let diff: Vec<f64> = grad.iter().zip(&fd).map(|(a, b)| a - b).collect();
        worst_vector = worst_vector.max(l2_norm(&diff) / l2_norm(&grad).max(l2_norm(&fd)));
        draws += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst_vector <= 1e-4 && params_max <= 5000 && secs < 60.0,
        format!(
            "{draws} draws, lambda in {lambdas:?}, <= {params_max} params, max relative error {worst_vector:.2e} \
             (worst coordinate {worst_coord:.2e}); {secs:.1}s"
        ),
    )
}

// ---------------------------------------------------------------- 4

fn c04_clipping() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let c = 1.0;
    let mut worst: f64 = 0.0;
    let mut untouched_ok = true;
    let mut inside = 0;
    for _ in 0..1000 {
        let dim = rng.random_range(1..200);
        let scale = 10f64.powf(rng.random_range(-3.0..3.0));
        let g: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0) * scale).collect();
        let mut clipped = g.clone();
        let norm = clip_in_place(&mut clipped, c).unwrap();
        worst = worst.max(l2_norm(&clipped));
        if norm <= c {
            inside += 1;
            untouched_ok &= g.iter().zip(&clipped).all(|(a, b)| a.to_bits() == b.to_bits());
        }
    }
    outcome(
        worst <= c + 1e-12 && untouched_ok && inside > 0,
        format!("max post-clip norm {worst:.15}, {inside} vectors within C unchanged bitwise: {untouched_ok}"),
    )
}

// ---------------------------------------------------------------- 5

/// lambda_min + (lambda_max - lambda_min) * exp(-0.2), computed with
/// 50-digit decimal arithmetic.
const LAMBDA_20_ORACLE: f64 = 818.732_565_770_451_1;

fn c05_lambda_schedule() -> Outcome {
    let s = LambdaSchedule::default();
    let at0 = lambda_at(0, &s) == s.lambda_max;
    let plateau = (0..2000).all(|t| lambda_at(t, &s) == lambda_at(t / s.step_interval * s.step_interval, &s));
    let l20 = lambda_at(20, &s);
    let limit = lambda_at(100_000, &s);
    outcome(
        at0 && plateau && (l20 - LAMBDA_20_ORACLE).abs() <= 1e-6 && (limit - s.lambda_min).abs() <= 1e-9,
        format!(
            "lambda(0)=max: {at0}, plateaus of {}: {plateau}, lambda(20)={l20}, lambda(1e5)-min={:.1e}",
            s.step_interval,
            limit - s.lambda_min
        ),
    )
}

// ---------------------------------------------------------------- 6

fn random_dist(rng: &mut ChaCha8Rng, n: usize) -> ProbDist {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0f64).powi(3) + 1e-12).collect();
    let z: f64 = raw.iter().sum();
    ProbDist::new(raw.into_iter().map(|x| x / z).collect()).unwrap()
}

fn c06_kl() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut min_kl = f64::INFINITY;
    let mut max_self: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(2..300);
        let p = random_dist(&mut rng, n);
        let q = random_dist(&mut rng, n);
        min_kl = min_kl.min(kl_divergence(&p, &q));
        max_self = max_self.max(kl_divergence(&p, &p).abs());
    }
    let fixture = kl_divergence(&ProbDist::new(vec![0.5, 0.5]).unwrap(), &ProbDist::new(vec![0.25, 0.75]).unwrap());
    // 0.5 ln 2 + 0.5 ln(2/3)
    let analytic = 0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
    outcome(
        min_kl >= 0.0 && max_self == 0.0 && (fixture - 0.1438).abs() <= 1e-4 && (fixture - analytic).abs() <= 1e-6,
        format!("min KL over 1000 pairs {min_kl:.3e}, max KL(p,p) {max_self:.1e}, fixture {fixture:.10}"),
    )
}

// ---------------------------------------------------------------- 7

fn label(o: ExecutionOutcome) -> &'static str {
    match o {
        ExecutionOutcome::Pass => "pass",
        ExecutionOutcome::EnvironmentError => "environment_error",
        ExecutionOutcome::CompileError => "compile_error",
        ExecutionOutcome::RuntimeError => "runtime_error",
        ExecutionOutcome::LanguageMismatch => "language_mismatch",
        ExecutionOutcome::Other(OtherKind::Empty) => "other_empty",
        ExecutionOutcome::Other(OtherKind::Timeout) => "other_timeout",
        ExecutionOutcome::Other(OtherKind::Unspecified) => "other_unspecified",
    }
}

fn c07_taxonomy() -> Outcome {
    let ds = load_dataset(data("taxonomy.jsonl")).unwrap();
    let mut per_cat = std::collections::BTreeMap::<String, usize>::new();
    let mut correct = 0;
    for p in ds.iter() {
        let want = p.extra["expected"].as_str().unwrap();
        let cat = want.split('_').next().unwrap();
        let cat = if cat == "other" { "other" } else { want };
        *per_cat.entry(cat.to_string()).or_default() += 1;
        if label(classify_execution(&p.snippet, ExecBudget::default())) == want {
            correct += 1;
        }
    }
    let ten_each = per_cat.len() == 5 && per_cat.values().all(|&n| n == 10);
    outcome(
        correct == ds.len() && ten_each,
        format!("{correct}/{} correct; fixtures per category {per_cat:?}", ds.len()),
    )
}

// ---------------------------------------------------------------- 8

fn c08_round_trip_chain() -> Outcome {
    let ds = load_dataset(data("sensitive.jsonl")).unwrap();
    let kept: Vec<Vec<String>> = [0.95, 0.88, 0.75, 0.60]
        .iter()
        .map(|&tau| {
            let (d, _) = round_trip_validate(
                &ds,
                &RoundTripConfig {
                    threshold: tau,
                    ..Default::default()
                },
            );
            d.pairs.iter().map(|p| format!("{}\u{0}{}", p.prompt, p.code())).collect()
        })
        .collect();
    let chain = kept.windows(2).all(|w| w[0].iter().all(|x| w[1].contains(x)));
    let sizes: Vec<usize> = kept.iter().map(Vec::len).collect();
    outcome(chain, format!("|D_f| at tau 0.95/0.88/0.75/0.60 = {sizes:?} of {}", ds.len()))
}

// ---------------------------------------------------------------- 9

const CANARY_REPETITION: usize = 100;
const AUDIT_GENERATIONS: usize = 500;
const AUDIT_MAX_TOKENS: usize = 96;

fn audit_canary() -> CanarySpec {
    let mut spec = load_canaries(data("canaries.json"))
        .unwrap()
        .into_iter()
        .find(|c| c.category == PiiCategory::Email)
        .unwrap();
    spec.repetition_rate = CANARY_REPETITION;
    spec
}

fn overfit_leaks(seed: u64, spec: &CanarySpec) -> usize {
    let mini = load_dataset(data("audit_mini.jsonl")).unwrap();
    let ds = inject_canaries(&mini, std::slice::from_ref(spec), seed).unwrap();
    let cfg = LmConfig::byte_level(8, 8, 16, seed);
    let mut params = init_params(&cfg);
    let tc = PlainTrainConfig {
        epochs: 200,
        batch_size: 16,
        learning_rate: 1.0,
        seed,
    };
    train_plain(&mut params, &cfg, &ds, &tc).unwrap();
    let sampling = SamplingConfig {
        strategy: Strategy::Temperature { temperature: 1.0 },
        max_tokens: AUDIT_MAX_TOKENS,
        seed,
    };
    let gens = batch_generate(&params, &cfg, &[spec.sample.prompt.clone()], &sampling, AUDIT_GENERATIONS).unwrap();
    measure_leakage(&gens, std::slice::from_ref(spec)).count(spec.category)
}

fn audit_config(dir: &Path, seed: u64) -> PipelineConfig {
    let text = format!(
        r#"
mode = "privcode"
seed = {seed}
model_seed = 1
dataset = "{mini}"
tasks = "{tasks}"
public_corpus = "{public}"
canaries = "{canaries}"
inject_canaries = true
junior_embed_dim = 8
junior_context_window = 8
junior_hidden_dim = 16
premium_embed_dim = 8
premium_context_window = 8
premium_hidden_dim = 32
pretrain_epochs = 20
pretrain_learning_rate = 1.0
dp_target_epsilon = 4.0
dp_steps = 100
dp_expected_batch = 4
dp_learning_rate = 0.5
sampling = "temperature"
temperature = 1.0
max_tokens = {AUDIT_MAX_TOKENS}
eval_max_tokens = 64
audit_samples = {AUDIT_GENERATIONS}
audit_temperature = 1.0
"#,
        mini = data("audit_mini.jsonl").display(),
        tasks = data("tasks.jsonl").display(),
        public = data("public.jsonl").display(),
        canaries = dir.join("canary.json").display(),
    );
    let mut cfg = PipelineConfig::from_toml_str(&text).unwrap();
    cfg.pretrain_cache = Some(pretrain_cache());
    cfg
}

fn c09_canary_audit() -> Outcome {
    let start = Instant::now();
    let spec = audit_canary();
    let overfit: Vec<usize> = (0..10).map(|s| overfit_leaks(s, &spec)).collect();
    let overfit_hits = overfit.iter().filter(|&&c| c >= 1).count();

    let dir = scratch("c09");
    std::fs::write(dir.join("canary.json"), serde_json::to_string_pretty(&[&spec]).unwrap()).unwrap();
    let mut private = Vec::new();
    let mut eps = 0.0;
    for seed in 0..10 {
        let cfg = audit_config(&dir, seed);
        let report = run_pipeline(&cfg, &dir.join(format!("seed{seed}"))).unwrap();
        eps = report.privacy[0].report.epsilon;
        let premium = report.leakage.as_ref().map_or(0, |l| l.count(spec.category));
        let junior = report.junior_leakage.as_ref().map_or(0, |l| l.count(spec.category));
        private.push((premium, junior));
    }
    let private_hits = private.iter().filter(|(p, j)| p + j >= 1).count();
    outcome(
        overfit_hits >= 8 && private_hits == 0,
        format!(
            "(a) non-private leaks in {overfit_hits}/10 seeds, counts {overfit:?}; (b) PrivCode at eps={eps:.2} leaks in \
             {private_hits}/10 seeds, (premium, junior) counts {private:?}; {:.0}s",
            start.elapsed().as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------- 10

fn recount(outcomes: &[TaskOutcome]) -> (f64, f64, f64) {
    // status rules restated on raw fields
    let n = outcomes.len() as f64;
    let compiled = outcomes
        .iter()
        .filter(|o| !(o.status == TaskStatus::Fail && o.fail_tests.is_empty()))
        .count() as f64;
    let passed = outcomes.iter().filter(|o| o.status == TaskStatus::Pass).count() as f64;
    let rate = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a / b };
    (rate(passed, n), rate(compiled, n), rate(passed, compiled))
}

fn identities_hold(r: &EvalReport) -> bool {
    r.pass_at_1 <= r.compile_pass_rate
        && (r.compile_pass_rate == 0.0 || (r.execution_pass_rate - r.pass_at_1 / r.compile_pass_rate).abs() < 1e-12)
}

fn c10_metric_arithmetic() -> Outcome {
    let task = |id: usize, status, fail: Vec<usize>| TaskOutcome {
        task_id: format!("t{id}"),
        status,
        fail_tests: fail,
        code: String::new(),
    };
    let crafted = EvalReport::from_outcomes(vec![
        task(0, TaskStatus::Pass, vec![]),
        task(1, TaskStatus::Pass, vec![]),
        task(2, TaskStatus::Fail, vec![]),
    ]);
    let crafted_ok = (crafted.pass_at_1 - 2.0 / 3.0).abs() < 1e-12
        && (crafted.compile_pass_rate - 2.0 / 3.0).abs() < 1e-12
        && crafted.execution_pass_rate == 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut random_ok = 0;
    for _ in 0..100 {
        let n = rng.random_range(1..40);
        let outs: Vec<TaskOutcome> = (0..n)
            .map(|i| match rng.random_range(0..3) {
                0 => task(i, TaskStatus::Pass, vec![]),
                1 => task(i, TaskStatus::Fail, vec![]),
                _ => task(i, TaskStatus::Fail, vec![0, rng.random_range(1..4)]),
            })
            .collect();
        let expect = recount(&outs);
        let r = EvalReport::from_outcomes(outs);
        if identities_hold(&r) && (r.pass_at_1, r.compile_pass_rate, r.execution_pass_rate) == expect {
            random_ok += 1;
        }
    }
    outcome(
        crafted_ok && identities_hold(&crafted) && random_ok == 100,
        format!("crafted fixture ok: {crafted_ok}; random vectors matching recount and identities: {random_ok}/100"),
    )
}

// ---------------------------------------------------------------- 11

fn c11_entropy() -> Outcome {
    let code = corpus_entropy(&load_dataset(data("sensitive.jsonl")).unwrap()).unwrap();
    let prose = corpus_entropy(&load_dataset(data("prose.jsonl")).unwrap()).unwrap();
    outcome(code < prose, format!("code {code:.4} bits/token, prose {prose:.4} bits/token"))
}

// ---------------------------------------------------------------- 12

const ARTIFACTS: &[&str] = &[
    "prompts.jsonl",
    "D.jsonl",
    "D_e.jsonl",
    "D_f.jsonl",
    "junior.ckpt",
    "premium.ckpt",
    "stage1_trace.json",
    "exec_stats.json",
    "round_trip_log.json",
    "run_report.json",
];

fn c12_determinism() -> Outcome {
    let dir = scratch("c12");
    let mut secs = Vec::new();
    let mut codes = Vec::new();
    for run in ["a", "b"] {
        let start = Instant::now();
        let status = Command::new(env!("CARGO_BIN_EXE_privforge"))
            .args(["pipeline", "--mode", "privcode", "--config"])
            .arg(data("privcode.toml"))
            .arg("--out")
            .arg(dir.join(run))
            .arg("--pretrain-cache")
            .arg(pretrain_cache())
            .env_remove("PRIVFORGE_REPORT_DIR")
            .output()
            .unwrap();
        secs.push(start.elapsed().as_secs_f64());
        codes.push(status.status.code());
    }
    let differing: Vec<&str> = ARTIFACTS
        .iter()
        .copied()
        .filter(|f| std::fs::read(dir.join("a").join(f)).ok() != std::fs::read(dir.join("b").join(f)).ok())
        .collect();
    let present = ARTIFACTS.iter().all(|f| dir.join("a").join(f).exists());
    outcome(
        present && differing.is_empty() && codes == [Some(0), Some(0)] && secs.iter().all(|&s| s < 600.0),
        format!(
            "{} artifacts compared, differing: {differing:?}; exit codes {codes:?}; run times {:.0}s / {:.0}s",
            ARTIFACTS.len(),
            secs[0],
            secs[1]
        ),
    )
}

// ---------------------------------------------------------------- 13

fn c13_utility_comparison() -> Outcome {
    let dir = scratch("c13");
    let mut rows = Vec::new();
    let mut at_least = 0;
    for seed in 1..=5 {
        let mut pass = Vec::new();
        for mode in [Mode::PrivCode, Mode::Dpft] {
            let mut cfg = PipelineConfig::load(data("privcode.toml")).unwrap();
            cfg.mode = mode;
            cfg.seed = seed;
            cfg.model_seed = Some(7);
            cfg.pretrain_cache = Some(pretrain_cache());
            let report = run_pipeline(&cfg, &dir.join(format!("{}-{seed}", mode.name()))).unwrap();
            pass.push(report.eval.pass_at_1);
        }
        if pass[0] >= pass[1] {
            at_least += 1;
        }
        rows.push(format!("seed {seed}: privcode {:.3} vs dpft {:.3}", pass[0], pass[1]));
    }
    // reported, not gating
    outcome(true, format!("privcode >= dpft in {at_least}/5 seeds ({})", rows.join("; ")))
}

fn main() {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("c01 accountant golden values", c01_accountant_golden),
        ("c02 calibrate_sigma inverts row 1", c02_calibrate_sigma),
        ("c03 gradient vs finite differences", c03_gradient_fd),
        ("c04 clipping invariant", c04_clipping),
        ("c05 lambda schedule", c05_lambda_schedule),
        ("c06 KL properties", c06_kl),
        ("c07 execution taxonomy fixtures", c07_taxonomy),
        ("c08 round-trip threshold containment", c08_round_trip_chain),
        ("c09 canary audit property", c09_canary_audit),
        ("c10 metric arithmetic", c10_metric_arithmetic),
        ("c11 entropy direction", c11_entropy),
        ("c12 end-to-end determinism", c12_determinism),
        ("c13 utility comparison (reported only)", c13_utility_comparison),
    ];
    let mut failed = 0;
    let mut ran = 0;
    for (name, f) in criteria {
        if !filters.is_empty() && !filters.iter().any(|flt| name.contains(flt.as_str())) {
            continue;
        }
        ran += 1;
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {}/{ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
