use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{derive_seed, hex, Mode, PipelineConfig};
use super::secret::SecretDetector;
use super::PipelineError;
use crate::corpus::{load_dataset, save_dataset, Dataset, PromptCodePair};
use crate::evaluation::{
    inject_canaries, load_canaries, load_tasks, measure_leakage, run_benchmark, CanarySpec, EvalReport, LeakageReport,
};
use crate::filters::{execution_validate, round_trip_validate, ValidationStats};
use crate::lm::{
    init_params, load_checkpoint, save_checkpoint, train_plain, Checkpoint, CheckpointStamp, LmConfig, LmParams,
};
use crate::privacy::{calibrate_sigma, DpConfig, PrivacyReport};
use crate::privsa::{privsa_train_from, sampling_rate_for, LambdaSchedule, TrainConfig};
use crate::synth::{batch_generate, SamplingConfig, Strategy};

pub const FILE_JUNIOR: &str = "junior.ckpt";
pub const FILE_PREMIUM: &str = "premium.ckpt";
pub const FILE_PROMPTS: &str = "prompts.jsonl";
pub const FILE_D: &str = "D.jsonl";
pub const FILE_D_E: &str = "D_e.jsonl";
pub const FILE_D_F: &str = "D_f.jsonl";
pub const FILE_REPORT: &str = "run_report.json";
pub const FILE_TIMINGS: &str = "timings.json";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetSizes {
    pub sensitive: usize,
    pub generated: Option<usize>,
    pub executed: Option<usize>,
    pub filtered: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StagePrivacy {
    pub stage: String,
    pub checkpoint: String,
    pub noise_scale: f64,
    pub sampling_rate: f64,
    pub steps: usize,
    pub report: PrivacyReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRecord {
    pub file: String,
    pub stamp: CheckpointStamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Postcondition {
    pub name: String,
    pub holds: bool,
}

/// Everything a run produced except wall-clock timings, which go to a
/// separate file so that reports of identical runs are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub mode: Mode,
    pub seed: u64,
    pub config_hash: String,
    pub config: PipelineConfig,
    pub sampling: SamplingConfig,
    pub sizes: DatasetSizes,
    pub exec_stats: Option<ValidationStats>,
    pub privacy: Vec<StagePrivacy>,
    pub checkpoints: Vec<CheckpointRecord>,
    pub eval: EvalReport,
    pub leakage: Option<LeakageReport>,
    pub junior_leakage: Option<LeakageReport>,
    /// Detector matches left in the masked phase-one corpus (JFT only).
    pub masked_matches: Option<usize>,
    pub postconditions: Vec<Postcondition>,
}

impl RunReport {
    pub fn ok(&self) -> bool {
        self.postconditions.iter().all(|p| p.holds)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

struct Run<'a> {
    cfg: &'a PipelineConfig,
    out: PathBuf,
    hash: String,
    timings: Vec<StageTiming>,
    checkpoints: Vec<CheckpointRecord>,
    privacy: Vec<StagePrivacy>,
}

fn write_json<T: Serialize>(path: &Path, value: &T, stage: &'static str) -> Result<(), PipelineError> {
    let mut text = serde_json::to_string_pretty(value).map_err(PipelineError::stage(stage))?;
    text.push('\n');
    std::fs::write(path, text).map_err(PipelineError::stage(stage))
}

impl<'a> Run<'a> {
    fn new(cfg: &'a PipelineConfig, out: &Path) -> Result<Self, PipelineError> {
        cfg.validate()?;
        std::fs::create_dir_all(out).map_err(PipelineError::stage("setup"))?;
        Ok(Self {
            cfg,
            out: out.to_path_buf(),
            hash: cfg.hash(),
            timings: Vec::new(),
            checkpoints: Vec::new(),
            privacy: Vec::new(),
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn timed<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> Result<T, PipelineError>) -> Result<T, PipelineError> {
        let start = Instant::now();
        let r = f(self);
        self.timings.push(StageTiming {
            stage: stage.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        r
    }

    fn canaries(&self) -> Result<Vec<CanarySpec>, PipelineError> {
        match &self.cfg.canaries {
            Some(p) => load_canaries(p).map_err(PipelineError::stage("load")),
            None => Ok(Vec::new()),
        }
    }

    /// The sensitive dataset, with canaries injected when configured.
    fn sensitive(&self) -> Result<Dataset, PipelineError> {
        let ds = load_dataset(&self.cfg.dataset).map_err(PipelineError::stage("load"))?;
        if self.cfg.inject_canaries {
            let specs = self.canaries()?;
            inject_canaries(&ds, &specs, derive_seed(self.cfg.seed, "inject")).map_err(PipelineError::stage("load"))
        } else {
            Ok(ds)
        }
    }

    /// Weights trained on the public corpus, or a fresh init when there is
    /// none. Cached by content when a cache directory is configured.
    fn pretrained(&mut self, lm: &LmConfig, label: &'static str) -> Result<LmParams, PipelineError> {
        let cfg = self.cfg;
        let Some(corpus_path) = cfg.public_corpus.clone().filter(|_| cfg.pretrain_epochs > 0) else {
            return Ok(init_params(lm));
        };
        let tc = cfg.pretrain(label);
        let corpus_bytes = std::fs::read(&corpus_path).map_err(PipelineError::stage("pretrain"))?;
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&(lm, &tc)).expect("serializable"));
        h.update(&corpus_bytes);
        let key = hex(&h.finalize());
        let cached = cfg.pretrain_cache.as_ref().map(|d| d.join(format!("{label}-{key}.ckpt")));
        if let Some(path) = &cached {
            if let Ok(ck) = load_checkpoint(path) {
                if ck.config == *lm && ck.stamp.config_hash == key {
                    return Ok(ck.params);
                }
            }
        }
        let params = self.timed(label, |_| {
            let corpus = load_dataset(&corpus_path).map_err(PipelineError::stage("pretrain"))?;
            let mut params = init_params(lm);
            train_plain(&mut params, lm, &corpus, &tc).map_err(PipelineError::stage("pretrain"))?;
            Ok(params)
        })?;
        if let Some(path) = cached {
            let ck = Checkpoint {
                config: *lm,
                params: params.clone(),
                stamp: CheckpointStamp::non_private(key),
            };
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir).map_err(PipelineError::stage("pretrain"))?;
            }
            // write then rename so concurrent runs never see a partial file
            let tmp = path.with_extension(format!("tmp{}", std::process::id()));
            save_checkpoint(&ck, &tmp).map_err(PipelineError::stage("pretrain"))?;
            std::fs::rename(&tmp, &path).map_err(PipelineError::stage("pretrain"))?;
        }
        Ok(params)
    }

    fn save_model(
        &mut self,
        file: &str,
        lm: &LmConfig,
        params: &LmParams,
        privacy: Option<&PrivacyReport>,
    ) -> Result<(), PipelineError> {
        let stamp = match privacy {
            Some(r) => CheckpointStamp {
                config_hash: self.hash.clone(),
                epsilon: r.epsilon,
                delta: r.delta,
            },
            None => CheckpointStamp::non_private(self.hash.clone()),
        };
        let ck = Checkpoint {
            config: *lm,
            params: params.clone(),
            stamp: stamp.clone(),
        };
        save_checkpoint(&ck, self.path(file)).map_err(PipelineError::stage("save"))?;
        self.checkpoints.push(CheckpointRecord {
            file: file.to_string(),
            stamp,
        });
        Ok(())
    }

    /// DP-SGD over `ds` from `start`; records the privacy report.
    fn dp_train(
        &mut self,
        stage: &'static str,
        checkpoint: &str,
        ds: &Dataset,
        lm: &LmConfig,
        start: LmParams,
        schedule: LambdaSchedule,
    ) -> Result<LmParams, PipelineError> {
        let cfg = self.cfg;
        let q = sampling_rate_for(cfg.dp_expected_batch, ds.len());
        let sigma = match cfg.dp_noise_scale {
            Some(s) => s,
            None => calibrate_sigma(q, cfg.dp_steps, cfg.dp_delta, cfg.dp_target_epsilon, cfg.conversion)
                .map_err(PipelineError::stage(stage))?,
        };
        let tc = TrainConfig {
            schedule,
            dp: DpConfig {
                clip_norm: cfg.dp_clip_norm,
                noise_scale: sigma,
                sampling_rate: q,
                max_steps: cfg.dp_steps,
                delta: cfg.dp_delta,
                rng_seed: derive_seed(cfg.seed, stage),
            },
            learning_rate: cfg.dp_learning_rate,
            conversion: cfg.conversion,
        };
        let (params, trace) = privsa_train_from(ds, &tc, lm, start).map_err(PipelineError::stage(stage))?;
        write_json(&self.path(&format!("{stage}_trace.json")), &trace, stage)?;
        self.privacy.push(StagePrivacy {
            stage: stage.to_string(),
            checkpoint: checkpoint.to_string(),
            noise_scale: sigma,
            sampling_rate: q,
            steps: cfg.dp_steps,
            report: trace.privacy,
        });
        Ok(params)
    }

    fn evaluate(&mut self, lm: &LmConfig, params: &LmParams) -> Result<EvalReport, PipelineError> {
        let cfg = self.cfg;
        self.timed("evaluate", |_| {
            let tasks = load_tasks(&cfg.tasks).map_err(PipelineError::stage("evaluate"))?;
            run_benchmark(params, lm, &tasks, cfg.eval_max_tokens, cfg.exec_budget())
                .map_err(PipelineError::stage("evaluate"))
        })
    }

    /// Samples `audit_samples` completions of every canary prompt.
    fn audit(&mut self, lm: &LmConfig, params: &LmParams, label: &str) -> Result<Option<LeakageReport>, PipelineError> {
        let specs = self.canaries()?;
        if specs.is_empty() || self.cfg.audit_samples == 0 {
            return Ok(None);
        }
        let cfg = self.cfg;
        self.timed("audit", |_| {
            let prompts: Vec<String> = specs.iter().map(|s| s.sample.prompt.clone()).collect();
            let sampling = SamplingConfig {
                strategy: Strategy::Temperature {
                    temperature: cfg.audit_temperature,
                },
                max_tokens: cfg.max_tokens,
                seed: derive_seed(cfg.seed, &format!("audit-{label}")),
            };
            let gens = batch_generate(params, lm, &prompts, &sampling, cfg.audit_samples)
                .map_err(PipelineError::stage("audit"))?;
            Ok(Some(measure_leakage(&gens, &specs)))
        })
    }

    fn finish(self, mut report: RunReport) -> Result<RunReport, PipelineError> {
        report.checkpoints = self.checkpoints;
        report.privacy = self.privacy;
        let privacy_ok = report
            .checkpoints
            .iter()
            .filter(|c| c.stamp.epsilon.is_finite())
            .all(|c| report.privacy.iter().filter(|p| p.checkpoint == c.file).count() == 1);
        report.postconditions.push(Postcondition {
            name: "every DP checkpoint carries one privacy report".into(),
            holds: privacy_ok,
        });
        let e = &report.eval;
        let identities = e.pass_at_1 <= e.compile_pass_rate
            && (e.compile_pass_rate == 0.0 || (e.execution_pass_rate - e.pass_at_1 / e.compile_pass_rate).abs() < 1e-12);
        report.postconditions.push(Postcondition {
            name: "evaluation metric identities".into(),
            holds: identities,
        });
        write_json(&self.out.join(FILE_REPORT), &report, "report")?;
        write_json(&self.out.join(FILE_TIMINGS), &self.timings, "report")?;
        Ok(report)
    }
}

fn blank_report(cfg: &PipelineConfig, hash: String, sensitive: usize) -> RunReport {
    RunReport {
        mode: cfg.mode,
        seed: cfg.seed,
        config_hash: hash,
        config: cfg.clone(),
        sampling: cfg.sampling(),
        sizes: DatasetSizes {
            sensitive,
            ..Default::default()
        },
        exec_stats: None,
        privacy: Vec::new(),
        checkpoints: Vec::new(),
        eval: EvalReport::from_outcomes(Vec::new()),
        leakage: None,
        junior_leakage: None,
        masked_matches: None,
        postconditions: Vec::new(),
    }
}

/// Runs whichever workflow `cfg.mode` names and writes all artifacts into
/// `out`.
pub fn run_pipeline(cfg: &PipelineConfig, out: &Path) -> Result<RunReport, PipelineError> {
    match cfg.mode {
        Mode::PrivCode => run_privcode(cfg, out),
        _ => run_baseline(cfg, out),
    }
}

fn write_prompts(path: &Path, ds: &Dataset) -> Result<(), PipelineError> {
    let mut text = String::new();
    for p in &ds.pairs {
        text.push_str(&serde_json::to_string(&p.prompt).expect("string serializes"));
        text.push('\n');
    }
    std::fs::write(path, text).map_err(PipelineError::stage("stage1"))
}

fn read_prompts(path: &Path) -> Result<Vec<String>, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(PipelineError::stage("generate"))?;
    text.lines()
        .map(|l| serde_json::from_str(l).map_err(PipelineError::stage("generate")))
        .collect()
}

/// DP training of the junior model. Returns the size of the sensitive set;
/// the set itself is dropped before returning.
fn stage_one(run: &mut Run) -> Result<usize, PipelineError> {
    let cfg = run.cfg;
    let junior = cfg.junior();
    let ds = run.sensitive()?;
    let start = run.pretrained(&junior, "pretrain-junior")?;
    let params = run.timed("stage1", |r| r.dp_train("stage1", FILE_JUNIOR, &ds, &junior, start, cfg.schedule()))?;
    let report = run.privacy.last().expect("just pushed").report;
    run.save_model(FILE_JUNIOR, &junior, &params, Some(&report))?;
    write_prompts(&run.path(FILE_PROMPTS), &ds)?;
    Ok(ds.len())
}

/// Runs only stage one, leaving `junior.ckpt`, its trace and the prompt
/// file in `out`.
pub fn train_junior(cfg: &PipelineConfig, out: &Path) -> Result<StagePrivacy, PipelineError> {
    let mut run = Run::new(cfg, out)?;
    stage_one(&mut run)?;
    write_json(&run.path(FILE_TIMINGS), &run.timings, "report")?;
    Ok(run.privacy.remove(0))
}

/// Stage one trains the junior model with DP on the sensitive data and
/// leaves only its checkpoint and the public prompts behind. Everything
/// after it reads those files, never the sensitive snippets.
pub fn run_privcode(cfg: &PipelineConfig, out: &Path) -> Result<RunReport, PipelineError> {
    if cfg.mode != Mode::PrivCode {
        return Err(PipelineError::Config("run_privcode needs mode = \"privcode\"".into()));
    }
    let mut run = Run::new(cfg, out)?;
    let premium = cfg.premium();

    let sensitive_len = stage_one(&mut run)?;

    let junior_ck = load_checkpoint(run.path(FILE_JUNIOR)).map_err(PipelineError::stage("generate"))?;
    let d = run.timed("generate", |r| {
        let prompts = read_prompts(&r.path(FILE_PROMPTS))?;
        let gens = batch_generate(&junior_ck.params, &junior_ck.config, &prompts, &cfg.sampling(), cfg.samples_per_prompt)
            .map_err(PipelineError::stage("generate"))?;
        let d = Dataset::new("D", gens.into_iter().map(|g| PromptCodePair::new(g.prompt, g.snippet.source)).collect());
        save_dataset(&d, r.path(FILE_D)).map_err(PipelineError::stage("generate"))?;
        Ok(d)
    })?;

    let (d_e, stats) = run.timed("execution_filter", |r| {
        let d = load_dataset(r.path(FILE_D)).map_err(PipelineError::stage("execution_filter"))?;
        let (d_e, stats) = execution_validate(&d, cfg.exec_budget());
        save_dataset(&d_e, r.path(FILE_D_E)).map_err(PipelineError::stage("execution_filter"))?;
        write_json(&r.path("exec_stats.json"), &stats, "execution_filter")?;
        Ok((d_e, stats))
    })?;

    let d_f = run.timed("round_trip_filter", |r| {
        let d_e = load_dataset(r.path(FILE_D_E)).map_err(PipelineError::stage("round_trip_filter"))?;
        let (d_f, log) = round_trip_validate(&d_e, &cfg.round_trip());
        save_dataset(&d_f, r.path(FILE_D_F)).map_err(PipelineError::stage("round_trip_filter"))?;
        write_json(&r.path("round_trip_log.json"), &log, "round_trip_filter")?;
        Ok(d_f)
    })?;

    let start = run.pretrained(&premium, "pretrain-premium")?;
    let params = run.timed("stage2", |r| {
        let d_f = load_dataset(r.path(FILE_D_F)).map_err(PipelineError::stage("stage2"))?;
        let mut params = start;
        train_plain(&mut params, &premium, &d_f, &cfg.finetune("stage2")).map_err(PipelineError::stage("stage2"))?;
        Ok(params)
    })?;
    // the premium model is a post-processing of the junior's output, so it
    // carries the junior's guarantee
    let junior_privacy = run.privacy[0].report;
    run.save_model(FILE_PREMIUM, &premium, &params, Some(&junior_privacy))?;

    let eval = run.evaluate(&premium, &params)?;
    let leakage = run.audit(&premium, &params, "premium")?;
    let junior_leakage = run.audit(&junior_ck.config, &junior_ck.params, "junior")?;

    let mut report = blank_report(cfg, run.hash.clone(), sensitive_len);
    report.sizes.generated = Some(d.len());
    report.sizes.executed = Some(d_e.len());
    report.sizes.filtered = Some(d_f.len());
    report.exec_stats = Some(stats);
    report.eval = eval;
    report.leakage = leakage;
    report.junior_leakage = junior_leakage;
    report.postconditions.push(Postcondition {
        name: "|D_f| <= |D_e| <= |D|".into(),
        holds: d_f.len() <= d_e.len() && d_e.len() <= d.len(),
    });
    report.postconditions.push(Postcondition {
        name: "D_f is non-empty".into(),
        holds: !d_f.is_empty(),
    });
    // the premium checkpoint shares the junior's report rather than adding one
    let mut report = run.finish(report)?;
    report.postconditions.retain(|p| !p.name.starts_with("every DP checkpoint"));
    let stamped_once = report.privacy.len() == 1
        && report.checkpoints.iter().all(|c| c.stamp.epsilon == report.privacy[0].report.epsilon);
    report.postconditions.insert(
        2,
        Postcondition {
            name: "every DP checkpoint carries one privacy report".into(),
            holds: stamped_once,
        },
    );
    write_json(&out.join(FILE_REPORT), &report, "report")?;
    Ok(report)
}

/// DPFT, JFT and NonDPFT: the premium model trained directly on the
/// sensitive data.
pub fn run_baseline(cfg: &PipelineConfig, out: &Path) -> Result<RunReport, PipelineError> {
    if cfg.mode == Mode::PrivCode {
        return Err(PipelineError::Config("run_baseline does not handle privcode".into()));
    }
    let mut run = Run::new(cfg, out)?;
    let premium = cfg.premium();
    let ds = run.sensitive()?;
    let start = run.pretrained(&premium, "pretrain-premium")?;
    let mut report = blank_report(cfg, run.hash.clone(), ds.len());

    let params = match cfg.mode {
        Mode::NonDpft => {
            let params = run.timed("finetune", |_| {
                let mut p = start;
                train_plain(&mut p, &premium, &ds, &cfg.finetune("finetune")).map_err(PipelineError::stage("finetune"))?;
                Ok(p)
            })?;
            run.save_model(FILE_PREMIUM, &premium, &params, None)?;
            params
        }
        Mode::Dpft => {
            let params = run.timed("dp_finetune", |r| {
                r.dp_train("dp_finetune", FILE_PREMIUM, &ds, &premium, start, LambdaSchedule::disabled())
            })?;
            let privacy = run.privacy[0].report;
            run.save_model(FILE_PREMIUM, &premium, &params, Some(&privacy))?;
            params
        }
        Mode::Jft => {
            let det = SecretDetector::default();
            let masked = Dataset::new(
                "masked",
                ds.pairs
                    .iter()
                    .map(|p| {
                        let mut m = p.clone();
                        m.snippet.source = det.mask(p.code());
                        m
                    })
                    .collect(),
            );
            save_dataset(&masked, run.path("D_masked.jsonl")).map_err(PipelineError::stage("jft_phase1"))?;
            let matches: usize = masked.pairs.iter().map(|p| det.find(p.code()).len()).sum();
            report.masked_matches = Some(matches);
            report.postconditions.push(Postcondition {
                name: "masked phase-one corpus has no detector matches".into(),
                holds: matches == 0,
            });
            let phase1 = run.timed("jft_phase1", |_| {
                let mut p = start;
                train_plain(&mut p, &premium, &masked, &cfg.finetune("jft_phase1"))
                    .map_err(PipelineError::stage("jft_phase1"))?;
                Ok(p)
            })?;
            let params = run.timed("jft_phase2", |r| {
                r.dp_train("jft_phase2", FILE_PREMIUM, &ds, &premium, phase1, LambdaSchedule::disabled())
            })?;
            let privacy = run.privacy[0].report;
            run.save_model(FILE_PREMIUM, &premium, &params, Some(&privacy))?;
            params
        }
        Mode::PrivCode => unreachable!("rejected above"),
    };

    report.eval = run.evaluate(&premium, &params)?;
    report.leakage = run.audit(&premium, &params, "premium")?;
    if cfg.mode == Mode::NonDpft {
        report.postconditions.push(Postcondition {
            name: "non-private run reports no finite epsilon".into(),
            holds: run.privacy.is_empty() && run.checkpoints.iter().all(|c| c.stamp.epsilon.is_infinite()),
        });
    }
    run.finish(report)
}
