//! End-to-end reproduction of the two network-size ladders: corpus
//! generation, seeded sweep, and test-log analysis with the largest network.

use std::fmt;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::evaluation::{
    evaluate_log, median, median_zone_summary, sweep_with_progress, EvalReport, SweepResult,
    ZoneSummary,
};
use crate::neuralnet::{Network, NetworkSpec};
use crate::synthgen::{gen_case1, gen_case1_testlog, gen_case2, gen_case2_testlog, Dataset, LabeledLog};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseId {
    /// RHG hydrate corpus, one target.
    One,
    /// Seven-lithology corpus, two targets.
    Two,
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseId::One => f.write_str("case1"),
            CaseId::Two => f.write_str("case2"),
        }
    }
}

/// Optional knobs layered over a [`Config`].
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seeds: Option<Vec<u64>>,
    pub epochs: Option<usize>,
    /// Rows (Case I) or rows per lithology (Case II).
    pub n: Option<usize>,
    pub corpus_seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Reproduction {
    pub case: CaseId,
    pub seeds: Vec<u64>,
    pub corpus: Dataset,
    pub sweep: SweepResult,
    pub testlog: LabeledLog,
    /// Test-log reports of the largest network, one per converged seed.
    pub test_reports: Vec<(u64, EvalReport)>,
    /// Per-zone median (over seeds) of the first target's mean |error|.
    pub zone_median: ZoneSummary<String>,
}

impl Reproduction {
    /// The largest-network run whose first-target test ε is the median.
    pub fn representative(&self) -> Option<(u64, &EvalReport, &Network)> {
        let eps: Vec<f64> = self.test_reports.iter().map(|(_, r)| r.epsilon[0]).collect();
        let m = median(&eps);
        let (seed, report) = self
            .test_reports
            .iter()
            .min_by(|a, b| (a.1.epsilon[0] - m).abs().total_cmp(&(b.1.epsilon[0] - m).abs()))?;
        let row = self.sweep.rows.last()?;
        let net = row.runs.iter().find(|r| r.seed == *seed)?.network()?;
        Some((*seed, report, net))
    }
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage: name,
        source: Box::new(e),
    })
}

/// Runs one full ladder reproduction. `progress` sees every finished run.
pub fn reproduce<F>(case: CaseId, cfg: &Config, ov: &Overrides, progress: F) -> Result<Reproduction>
where
    F: FnMut(&NetworkSpec, u64, &crate::evaluation::SweepRun),
{
    let seeds = ov.seeds.clone().unwrap_or_else(|| cfg.reproduce.seeds.clone());
    let corpus_seed = ov.corpus_seed.unwrap_or(cfg.reproduce.corpus_seed);
    let test_seed = cfg.reproduce.testlog_seed;
    let mut train_cfg = cfg.train_config(0);
    if let Some(e) = ov.epochs {
        train_cfg.epochs = e;
    }

    let (corpus, testlog, specs) = match case {
        CaseId::One => {
            let mut spec = cfg.case1_spec();
            if let Some(n) = ov.n {
                spec.n = n;
            }
            let corpus = stage("corpus generation", gen_case1(&spec, corpus_seed))?;
            let log_spec = crate::synthgen::Case1Spec {
                n: cfg.case1.testlog_n,
                noise_sigma: 0.0,
                ..spec
            };
            let log = stage(
                "test-log generation",
                gen_case1_testlog(&log_spec, &cfg.case1_walk(), test_seed),
            )?;
            (corpus, log, stage("ladder", cfg.case1_ladder(0))?)
        }
        CaseId::Two => {
            let mode = stage("config", cfg.case2_mode())?;
            let n = ov.n.unwrap_or(cfg.case2.n_per_lith);
            let corpus = stage("corpus generation", gen_case2(n, mode, corpus_seed))?;
            let log = stage(
                "test-log generation",
                gen_case2_testlog(cfg.case2.block_len, test_seed, mode),
            )?;
            (corpus, log, stage("ladder", cfg.case2_ladder(0))?)
        }
    };

    let sweep = stage(
        "ladder sweep",
        sweep_with_progress(&specs, &corpus, &train_cfg, &seeds, progress),
    )?;
    let largest = sweep
        .rows
        .last()
        .ok_or_else(|| Error::Empty("ladder".into()))?;
    let test_reports = stage(
        "test-log evaluation",
        largest
            .runs
            .iter()
            .filter_map(|r| r.network().map(|n| (r.seed, n)))
            .map(|(seed, net)| evaluate_log(net, &testlog).map(|rep| (seed, rep)))
            .collect::<Result<Vec<_>>>(),
    )?;
    if test_reports.is_empty() {
        return Err(Error::Stage {
            stage: "test-log evaluation",
            source: Box::new(Error::Diverged {
                epoch: 0,
                loss: f64::NAN,
            }),
        });
    }
    let summaries: Vec<ZoneSummary<String>> = test_reports
        .iter()
        .filter_map(|(_, r)| r.zone_summary.as_ref().map(|z| z[0].clone()))
        .collect();
    let zone_median = stage("zone analysis", median_zone_summary(&summaries))?;
    Ok(Reproduction {
        case,
        seeds,
        corpus,
        sweep,
        testlog,
        test_reports,
        zone_median,
    })
}
