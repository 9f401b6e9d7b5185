//! Normalized-RMSE scoring, per-sample error traces, zone attribution and
//! the network-size sweep harness.
//!
//! Errors are normalized by the largest target magnitude in the evaluated set,
//! so ε = 0.01 means an RMS miss of 1% of the peak target value.

use crate::error::{Error, Result};
use crate::neuralnet::{init_network, train, Network, NetworkSpec, TrainConfig, TrainReport};
use crate::synthgen::{Dataset, LabeledLog};

fn check_pair(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::dim("prediction/target length", target.len(), pred.len()));
    }
    if target.is_empty() {
        return Err(Error::Empty("prediction/target vectors".into()));
    }
    let scale = target.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidArgument(
            "target set has no nonzero finite magnitude to normalize by".into(),
        ));
    }
    Ok(scale)
}

/// `sqrt(mean((pred - target)²)) / max|target|`.
pub fn normalized_rmse(pred: &[f64], target: &[f64]) -> Result<f64> {
    let scale = check_pair(pred, target)?;
    let mse = pred
        .iter()
        .zip(target)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / pred.len() as f64;
    Ok(mse.sqrt() / scale)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub target: f64,
    pub predicted: f64,
    /// Signed `(predicted - target) / max|target|`.
    pub error: f64,
}

pub fn per_sample_trace(pred: &[f64], target: &[f64]) -> Result<Vec<TraceRow>> {
    let scale = check_pair(pred, target)?;
    Ok(pred
        .iter()
        .zip(target)
        .map(|(&p, &t)| TraceRow {
            target: t,
            predicted: p,
            error: (p - t) / scale,
        })
        .collect())
}

/// Mean absolute normalized error per zone, zones in order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneSummary<L> {
    pub zones: Vec<ZoneStat<L>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZoneStat<L> {
    pub label: L,
    pub mean_abs_error: f64,
    pub count: usize,
}

impl<L: Clone + PartialEq> ZoneSummary<L> {
    /// Zone with the largest mean |error|; ties go to the earlier zone.
    pub fn argmax(&self) -> Option<&L> {
        self.zones
            .iter()
            .fold(None::<&ZoneStat<L>>, |best, z| match best {
                Some(b) if b.mean_abs_error >= z.mean_abs_error => Some(b),
                _ => Some(z),
            })
            .map(|z| &z.label)
    }

    pub fn mean_for(&self, label: &L) -> Option<f64> {
        self.zones
            .iter()
            .find(|z| &z.label == label)
            .map(|z| z.mean_abs_error)
    }
}

pub fn zone_summary<L: Clone + PartialEq>(errors: &[f64], labels: &[L]) -> Result<ZoneSummary<L>> {
    if errors.len() != labels.len() {
        return Err(Error::dim("zone labels", errors.len(), labels.len()));
    }
    let mut zones: Vec<ZoneStat<L>> = Vec::new();
    for (e, l) in errors.iter().zip(labels) {
        match zones.iter_mut().find(|z| &z.label == l) {
            Some(z) => {
                z.mean_abs_error += e.abs();
                z.count += 1;
            }
            None => zones.push(ZoneStat {
                label: l.clone(),
                mean_abs_error: e.abs(),
                count: 1,
            }),
        }
    }
    for z in &mut zones {
        z.mean_abs_error /= z.count as f64;
    }
    Ok(ZoneSummary { zones })
}

/// Median of each zone's mean |error| across several summaries of the same
/// zoning (e.g. one per training seed).
pub fn median_zone_summary<L: Clone + PartialEq>(runs: &[ZoneSummary<L>]) -> Result<ZoneSummary<L>> {
    let first = runs
        .first()
        .ok_or_else(|| Error::Empty("zone summaries".into()))?;
    let zones = first
        .zones
        .iter()
        .map(|z| {
            let values = runs
                .iter()
                .map(|r| {
                    r.mean_for(&z.label).ok_or_else(|| {
                        Error::InvalidArgument("zone summaries cover different zones".into())
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ZoneStat {
                label: z.label.clone(),
                mean_abs_error: median(&values),
                count: z.count,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ZoneSummary { zones })
}

/// Median of a non-empty slice; even lengths average the middle pair.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub target_names: Vec<String>,
    pub epsilon: Vec<f64>,
    /// One trace per target column.
    pub traces: Vec<Vec<TraceRow>>,
    /// One summary per target column when zone labels were supplied.
    pub zone_summary: Option<Vec<ZoneSummary<String>>>,
}

/// Scores `net` on every row of `data`, which must carry target columns.
pub fn evaluate(net: &Network, data: &Dataset) -> Result<EvalReport> {
    let spec = net.spec();
    if data.input_dim() != spec.input_dim {
        return Err(Error::dim("evaluation inputs", spec.input_dim, data.input_dim()));
    }
    if data.target_dim() != spec.output_dim {
        return Err(Error::dim("evaluation targets", spec.output_dim, data.target_dim()));
    }
    let pred = net.predict_dataset(data)?;
    let k = spec.output_dim;
    let mut epsilon = Vec::with_capacity(k);
    let mut traces = Vec::with_capacity(k);
    for j in 0..k {
        let p: Vec<f64> = pred.chunks_exact(k).map(|r| r[j]).collect();
        let t = data.target_column(j);
        epsilon.push(normalized_rmse(&p, &t)?);
        traces.push(per_sample_trace(&p, &t)?);
    }
    Ok(EvalReport {
        target_names: data.target_names().to_vec(),
        epsilon,
        traces,
        zone_summary: None,
    })
}

/// [`evaluate`] plus per-zone error attribution.
pub fn evaluate_log(net: &Network, log: &LabeledLog) -> Result<EvalReport> {
    let mut report = evaluate(net, &log.dataset)?;
    let labels: Vec<String> = (0..log.zones.len()).map(|i| log.zones.token(i)).collect();
    report.zone_summary = Some(
        report
            .traces
            .iter()
            .map(|trace| {
                let errors: Vec<f64> = trace.iter().map(|r| r.error).collect();
                zone_summary(&errors, &labels)
            })
            .collect::<Result<_>>()?,
    );
    Ok(report)
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidArgument(format!("csv encoding: {e}"))
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidArgument(format!("csv encoding: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// Trace table in the plotting layout: `sno,Vtarget,Vobserved,normerror` for
/// one target, `sno,Vpt,Vpo,Vst,Vso,Vperror,Vserror` for two. `sno` is 1-based.
pub fn trace_csv(report: &EvalReport) -> Result<String> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    match report.traces.as_slice() {
        [vp] => {
            w.write_record(["sno", "Vtarget", "Vobserved", "normerror"])
                .map_err(csv_err)?;
            for (i, r) in vp.iter().enumerate() {
                w.write_record([
                    (i + 1).to_string(),
                    format!("{:?}", r.target),
                    format!("{:?}", r.predicted),
                    format!("{:?}", r.error),
                ])
                .map_err(csv_err)?;
            }
        }
        [vp, vs] => {
            w.write_record(["sno", "Vpt", "Vpo", "Vst", "Vso", "Vperror", "Vserror"])
                .map_err(csv_err)?;
            for (i, (p, s)) in vp.iter().zip(vs).enumerate() {
                w.write_record([
                    (i + 1).to_string(),
                    format!("{:?}", p.target),
                    format!("{:?}", p.predicted),
                    format!("{:?}", s.target),
                    format!("{:?}", s.predicted),
                    format!("{:?}", p.error),
                    format!("{:?}", s.error),
                ])
                .map_err(csv_err)?;
            }
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "trace layout supports one or two targets, got {}",
                other.len()
            )))
        }
    }
    finish_csv(w)
}

/// `target,zone,mean_abs_error,count` for every target's zone summary.
pub fn zone_summary_csv(report: &EvalReport) -> Result<String> {
    let summaries = report
        .zone_summary
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("report has no zone labels".into()))?;
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(["target", "zone", "mean_abs_error", "count"])
        .map_err(csv_err)?;
    for (name, s) in report.target_names.iter().zip(summaries) {
        for z in &s.zones {
            w.write_record([
                name.clone(),
                z.label.clone(),
                format!("{:?}", z.mean_abs_error),
                z.count.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    finish_csv(w)
}

/// `eps_Vp` for target `vp`, and so on.
pub fn epsilon_column(target: &str) -> String {
    let mut chars = target.chars();
    match chars.next() {
        Some(c) => format!("eps_{}{}", c.to_uppercase(), chars.as_str()),
        None => "eps_".into(),
    }
}

#[derive(Debug, Clone)]
pub struct SweepRun {
    pub seed: u64,
    /// Trained network and report, or the divergence message.
    pub outcome: std::result::Result<(Network, TrainReport), String>,
}

impl SweepRun {
    pub fn network(&self) -> Option<&Network> {
        self.outcome.as_ref().ok().map(|(n, _)| n)
    }

    pub fn report(&self) -> Option<&TrainReport> {
        self.outcome.as_ref().ok().map(|(_, r)| r)
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub hidden: Vec<usize>,
    /// Median validation ε per target over converged runs (NaN if none converged).
    pub epsilon: Vec<f64>,
    /// Number of converged runs entering the median.
    pub n_seeds: usize,
    /// Whether `epsilon` is a median over more than one run.
    pub median: bool,
    pub runs: Vec<SweepRun>,
}

impl SweepRow {
    pub fn spec_string(&self) -> String {
        self.hidden
            .iter()
            .map(|w| w.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub target_names: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// `spec,eps_Vp[,eps_Vs],n_seeds`; a row with no converged run prints `diverged`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        let mut header = vec!["spec".to_string()];
        header.extend(self.target_names.iter().map(|t| epsilon_column(t)));
        header.push("n_seeds".into());
        w.write_record(&header).map_err(csv_err)?;
        for row in &self.rows {
            let mut rec = vec![row.spec_string()];
            for e in &row.epsilon {
                rec.push(if e.is_nan() {
                    "diverged".into()
                } else {
                    format!("{e:?}")
                });
            }
            rec.push(row.n_seeds.to_string());
            w.write_record(&rec).map_err(csv_err)?;
        }
        finish_csv(w)
    }
}

/// Trains every spec once per seed (seed used for both initialization and
/// shuffling) and reports the median validation ε per target.
///
/// Diverged runs are kept in [`SweepRow::runs`] but excluded from the median;
/// any other training error aborts the sweep.
pub fn sweep(specs: &[NetworkSpec], data: &Dataset, cfg: &TrainConfig, seeds: &[u64]) -> Result<SweepResult> {
    sweep_with_progress(specs, data, cfg, seeds, |_, _, _| {})
}

/// [`sweep`] with a callback invoked after each finished run.
pub fn sweep_with_progress<F>(
    specs: &[NetworkSpec],
    data: &Dataset,
    cfg: &TrainConfig,
    seeds: &[u64],
    mut progress: F,
) -> Result<SweepResult>
where
    F: FnMut(&NetworkSpec, u64, &SweepRun),
{
    if specs.is_empty() {
        return Err(Error::Empty("sweep specs".into()));
    }
    if seeds.is_empty() {
        return Err(Error::Empty("sweep seeds".into()));
    }
    let k = data.target_dim();
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let mut runs = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let run_spec = NetworkSpec {
                init_seed: seed,
                ..spec.clone()
            };
            let run_cfg = TrainConfig {
                shuffle_seed: seed,
                ..cfg.clone()
            };
            let net = init_network(&run_spec)?;
            let outcome = match train(&net, data, &run_cfg) {
                Ok(done) => Ok(done),
                Err(e @ Error::Diverged { .. }) => Err(e.to_string()),
                Err(e) => return Err(e),
            };
            let run = SweepRun { seed, outcome };
            progress(&run_spec, seed, &run);
            runs.push(run);
        }
        let converged: Vec<&TrainReport> = runs.iter().filter_map(SweepRun::report).collect();
        let epsilon = (0..k)
            .map(|j| {
                let v: Vec<f64> = converged.iter().map(|r| r.val_epsilon[j]).collect();
                median(&v)
            })
            .collect();
        rows.push(SweepRow {
            hidden: spec.hidden.clone(),
            epsilon,
            n_seeds: converged.len(),
            median: converged.len() > 1,
            runs,
        });
    }
    Ok(SweepResult {
        target_names: data.target_names().to_vec(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rmse_examples() {
        assert_eq!(normalized_rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        let e = normalized_rmse(&[1.0, 2.0, 5.0], &[1.0, 2.0, 4.0]).unwrap();
        assert!((e - (1.0f64 / 3.0).sqrt() / 4.0).abs() < 1e-15);
        assert!((e - 0.144338).abs() < 1e-6);
        assert_eq!(normalized_rmse(&[0.0; 4], &[2.5; 4]).unwrap(), 1.0);
    }

    #[test]
    fn rmse_errors() {
        assert!(normalized_rmse(&[0.0, 0.0], &[0.0, 0.0]).is_err());
        assert!(normalized_rmse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(normalized_rmse(&[], &[]).is_err());
    }

    #[test]
    fn trace_examples() {
        let t = per_sample_trace(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert!(t.iter().all(|r| r.error == 0.0));
        let t = per_sample_trace(&[1.0, 0.0, 3.0], &[1.0, 4.0, 3.0]).unwrap();
        assert_eq!(t[1].error, -1.0);
        let t = per_sample_trace(&[1.0, 8.0], &[1.0, 4.0]).unwrap();
        assert_eq!(t[1].error, 1.0);
    }

    #[test]
    fn zone_examples() {
        let s = zone_summary(&[0.1, -0.1, 0.1, -0.1], &["a", "a", "b", "b"]).unwrap();
        assert_eq!(s.zones[0].mean_abs_error, s.zones[1].mean_abs_error);
        let s = zone_summary(&[0.5, -0.3, 0.0, 0.0], &["chalks", "chalks", "dolomite", "dolomite"])
            .unwrap();
        assert_eq!(s.argmax(), Some(&"chalks"));
        assert!((s.mean_for(&"chalks").unwrap() - 0.4).abs() < 1e-15);
        assert!(zone_summary(&[0.1], &["a", "b"]).is_err());
    }

    #[test]
    fn median_and_zone_median() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
        let a = zone_summary(&[1.0, 0.0], &["x", "y"]).unwrap();
        let b = zone_summary(&[3.0, 5.0], &["x", "y"]).unwrap();
        let c = zone_summary(&[2.0, 1.0], &["x", "y"]).unwrap();
        let m = median_zone_summary(&[a, b, c]).unwrap();
        assert_eq!(m.mean_for(&"x"), Some(2.0));
        assert_eq!(m.mean_for(&"y"), Some(1.0));
    }

    #[test]
    fn epsilon_column_names() {
        assert_eq!(epsilon_column("vp"), "eps_Vp");
        assert_eq!(epsilon_column("vs"), "eps_Vs");
    }
}
