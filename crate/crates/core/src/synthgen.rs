//! Deterministic synthetic corpora and test logs.
//!
//! All generators are single-threaded and draw from one [`SeededStream`] per
//! dataset. Training corpora use stream [`stream::TRAINING_CORPUS`], test logs
//! use [`stream::TEST_LOG`], so a test log never replays the training draws
//! even when both are built from the same seed.

use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::rng::{stream, SeededStream};
use crate::transforms::{
    bulk_density, lith_rho, lith_vp, lith_vs, rhg_hydrate_vp, Lithology, LithologyTransform, Range,
    RhgParams, RhoLawMode,
};

pub const CASE1_INPUTS: [&str; 3] = ["phi", "sh", "rho"];
pub const CASE1_TARGETS: [&str; 1] = ["vp"];
pub const CASE2_INPUTS: [&str; 2] = ["phi", "rho"];
pub const CASE2_TARGETS: [&str; 2] = ["vp", "vs"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Case1,
    Case2,
    ExternalCsv,
}

impl Provenance {
    pub fn token(self) -> &'static str {
        match self {
            Provenance::Case1 => "case1",
            Provenance::Case2 => "case2",
            Provenance::ExternalCsv => "external_csv",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "case1" => Ok(Provenance::Case1),
            "case2" => Ok(Provenance::Case2),
            "external_csv" => Ok(Provenance::ExternalCsv),
            other => Err(Error::parse(format!("unknown provenance `{other}`"))),
        }
    }
}

/// Ordered samples of named input and target columns, stored row-major.
///
/// A dataset read from a log without target columns has `target_dim() == 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    input_names: Vec<String>,
    target_names: Vec<String>,
    depth: Option<Vec<f64>>,
    inputs: Vec<f64>,
    targets: Vec<f64>,
    pub seed: Option<u64>,
    pub provenance: Provenance,
    /// Generation parameters, recorded in the `.meta` sidecar.
    pub params: Vec<(String, String)>,
}

impl Dataset {
    pub fn new<S: AsRef<str>>(input_names: &[S], target_names: &[S], provenance: Provenance) -> Self {
        Dataset {
            input_names: input_names.iter().map(|s| s.as_ref().to_string()).collect(),
            target_names: target_names.iter().map(|s| s.as_ref().to_string()).collect(),
            depth: None,
            inputs: Vec::new(),
            targets: Vec::new(),
            seed: None,
            provenance,
            params: Vec::new(),
        }
    }

    pub fn push_row(&mut self, input: &[f64], target: &[f64]) -> Result<()> {
        if input.len() != self.input_dim() {
            return Err(Error::dim("dataset input row", self.input_dim(), input.len()));
        }
        if target.len() != self.target_dim() {
            return Err(Error::dim("dataset target row", self.target_dim(), target.len()));
        }
        if self.depth.is_some() {
            return Err(Error::InvalidArgument(
                "dataset carries depth; use push_row_at".into(),
            ));
        }
        if let Some(bad) = input.iter().chain(target).find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("dataset row {} ({bad})", self.len())));
        }
        self.inputs.extend_from_slice(input);
        self.targets.extend_from_slice(target);
        Ok(())
    }

    /// Appends a row with a depth value. The first call switches the dataset
    /// to depth-indexed mode; it must be used for every row after that.
    pub fn push_row_at(&mut self, depth: f64, input: &[f64], target: &[f64]) -> Result<()> {
        if self.depth.is_none() {
            if !self.is_empty() {
                return Err(Error::InvalidArgument(
                    "cannot add depth to a dataset without depth".into(),
                ));
            }
            self.depth = Some(Vec::new());
        }
        if !depth.is_finite() {
            return Err(Error::NonFinite(format!("depth at row {}", self.len())));
        }
        let depths = self.depth.take().unwrap_or_default();
        let pushed = self.push_row(input, target);
        let mut depths = depths;
        if pushed.is_ok() {
            depths.push(depth);
        }
        self.depth = Some(depths);
        pushed
    }

    pub fn input_names(&self) -> &[String] {
        &self.input_names
    }

    pub fn target_names(&self) -> &[String] {
        &self.target_names
    }

    pub fn input_dim(&self) -> usize {
        self.input_names.len()
    }

    pub fn target_dim(&self) -> usize {
        self.target_names.len()
    }

    pub fn len(&self) -> usize {
        if self.input_dim() == 0 {
            0
        } else {
            self.inputs.len() / self.input_dim()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn depth(&self) -> Option<&[f64]> {
        self.depth.as_deref()
    }

    pub fn input(&self, row: usize) -> &[f64] {
        let d = self.input_dim();
        &self.inputs[row * d..(row + 1) * d]
    }

    pub fn target(&self, row: usize) -> &[f64] {
        let d = self.target_dim();
        &self.targets[row * d..(row + 1) * d]
    }

    /// Row-major input matrix.
    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    /// Row-major target matrix.
    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn input_column(&self, col: usize) -> Vec<f64> {
        self.inputs.chunks(self.input_dim()).map(|r| r[col]).collect()
    }

    pub fn target_column(&self, col: usize) -> Vec<f64> {
        self.targets.chunks(self.target_dim()).map(|r| r[col]).collect()
    }

    /// New dataset holding the given rows, in the given order.
    pub fn select(&self, rows: &[usize]) -> Dataset {
        let mut out = Dataset {
            input_names: self.input_names.clone(),
            target_names: self.target_names.clone(),
            depth: self.depth.as_ref().map(|_| Vec::with_capacity(rows.len())),
            inputs: Vec::with_capacity(rows.len() * self.input_dim()),
            targets: Vec::with_capacity(rows.len() * self.target_dim()),
            seed: self.seed,
            provenance: self.provenance,
            params: self.params.clone(),
        };
        for &r in rows {
            out.inputs.extend_from_slice(self.input(r));
            out.targets.extend_from_slice(self.target(r));
            if let (Some(dst), Some(src)) = (out.depth.as_mut(), self.depth.as_ref()) {
                dst.push(src[r]);
            }
        }
        out
    }

    pub fn param(&self, key: &str) -> Option<&str> {
        self.params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn set_param(&mut self, key: &str, value: impl ToString) {
        self.params.push((key.to_string(), value.to_string()));
    }
}

/// Per-row zone labels of a synthetic log.
#[derive(Debug, Clone, PartialEq)]
pub enum ZoneLabels {
    Lithology(Vec<Lithology>),
    DepthIndex(Vec<usize>),
}

impl ZoneLabels {
    pub fn len(&self) -> usize {
        match self {
            ZoneLabels::Lithology(v) => v.len(),
            ZoneLabels::DepthIndex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn token(&self, row: usize) -> String {
        match self {
            ZoneLabels::Lithology(v) => v[row].token().to_string(),
            ZoneLabels::DepthIndex(v) => v[row].to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledLog {
    pub dataset: Dataset,
    pub zones: ZoneLabels,
}

/// Recipe for the RHG hydrate corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct Case1Spec {
    pub n: usize,
    pub phi_range: Range,
    pub sh_range: Range,
    pub rhg: RhgParams,
    /// Standard deviation of additive Gaussian noise on the inputs (absolute
    /// units of each column). Zero disables noise.
    pub noise_sigma: f64,
}

impl Case1Spec {
    pub fn new(n: usize, phi_range: Range, sh_range: Range, rhg: RhgParams) -> Self {
        Case1Spec {
            n,
            phi_range,
            sh_range,
            rhg,
            noise_sigma: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("sample count must be at least 1".into()));
        }
        for (name, r) in [("phi_range", self.phi_range), ("sh_range", self.sh_range)] {
            if !(0.0 <= r.lo && r.lo <= r.hi && r.hi <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} [{}, {}] must satisfy 0 <= lo <= hi <= 1",
                    r.lo, r.hi
                )));
            }
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "noise sigma must be finite and non-negative, got {}",
                self.noise_sigma
            )));
        }
        self.rhg.validate()
    }

    fn record(&self, ds: &mut Dataset) {
        let p = &self.rhg;
        ds.set_param("n", self.n);
        ds.set_param("phi_range", format!("{:?}..{:?}", self.phi_range.lo, self.phi_range.hi));
        ds.set_param("sh_range", format!("{:?}..{:?}", self.sh_range.lo, self.sh_range.hi));
        ds.set_param(
            "rhg",
            format!(
                "v_ma={:?};v_f={:?};rho_ma={:?};rho_f={:?};v_h={:?};rho_h={:?}",
                p.v_ma, p.v_f, p.rho_ma, p.rho_f, p.v_h, p.rho_h
            ),
        );
        ds.set_param("noise_sigma", format!("{:?}", self.noise_sigma));
    }
}

fn case1_row(phi: f64, sh: f64, p: &RhgParams) -> Result<([f64; 3], f64)> {
    let rho = bulk_density(phi, sh, p)?;
    let vp = rhg_hydrate_vp(phi, sh, p)?;
    Ok(([phi, sh, rho], vp))
}

fn add_noise(input: &mut [f64], noise: &mut Option<(SeededStream, Normal<f64>)>) {
    if let Some((rng, normal)) = noise {
        for v in input.iter_mut() {
            *v += normal.sample(rng.rng());
        }
    }
}

fn noise_source(sigma: f64, seed: u64) -> Result<Option<(SeededStream, Normal<f64>)>> {
    if sigma == 0.0 {
        return Ok(None);
    }
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| Error::InvalidArgument(format!("noise sigma: {e}")))?;
    Ok(Some((SeededStream::new(seed, stream::INPUT_NOISE), normal)))
}

/// RHG hydrate corpus: inputs `(phi, sh, rho)`, target `vp` in m/s.
///
/// Porosity and saturation are independent uniform draws; density and velocity
/// follow from [`bulk_density`] and [`rhg_hydrate_vp`].
pub fn gen_case1(spec: &Case1Spec, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = SeededStream::new(seed, stream::TRAINING_CORPUS);
    let mut noise = noise_source(spec.noise_sigma, seed)?;
    let mut ds = Dataset::new(&CASE1_INPUTS, &CASE1_TARGETS, Provenance::Case1);
    ds.seed = Some(seed);
    spec.record(&mut ds);
    for _ in 0..spec.n {
        let phi = rng.uniform(spec.phi_range.lo, spec.phi_range.hi);
        let sh = rng.uniform(spec.sh_range.lo, spec.sh_range.hi);
        let (mut input, vp) = case1_row(phi, sh, &spec.rhg)?;
        add_noise(&mut input, &mut noise);
        ds.push_row(&input, &[vp])?;
    }
    Ok(ds)
}

/// Depth sampling and step bounds of a synthetic Case I log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomWalk {
    pub phi_step: f64,
    pub sh_step: f64,
    pub depth_start: f64,
    pub depth_step: f64,
}

impl Default for RandomWalk {
    fn default() -> Self {
        RandomWalk {
            phi_step: 0.01,
            sh_step: 0.02,
            depth_start: 0.0,
            depth_step: 0.1524,
        }
    }
}

/// Synthetic stand-in for a hydrate well log.
///
/// `phi` and `sh` follow bounded random walks (each step uniform in
/// `±step`, clipped to the configured ranges) so the log has smooth, depth-correlated
/// character. Labels are depth indices.
pub fn gen_case1_testlog(spec: &Case1Spec, walk: &RandomWalk, seed: u64) -> Result<LabeledLog> {
    spec.validate()?;
    if !(walk.phi_step >= 0.0 && walk.sh_step >= 0.0 && walk.depth_step > 0.0) {
        return Err(Error::InvalidArgument(
            "random-walk steps must be non-negative and depth step positive".into(),
        ));
    }
    let mut rng = SeededStream::new(seed, stream::TEST_LOG);
    let mut ds = Dataset::new(&CASE1_INPUTS, &CASE1_TARGETS, Provenance::Case1);
    ds.seed = Some(seed);
    spec.record(&mut ds);
    ds.set_param("phi_step", format!("{:?}", walk.phi_step));
    ds.set_param("sh_step", format!("{:?}", walk.sh_step));
    let (pr, sr) = (spec.phi_range, spec.sh_range);
    let mut phi = rng.uniform(pr.lo, pr.hi);
    let mut sh = rng.uniform(sr.lo, sr.hi);
    let mut labels = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        if i > 0 {
            phi = (phi + walk.phi_step * (2.0 * rng.unit() - 1.0)).clamp(pr.lo, pr.hi);
            sh = (sh + walk.sh_step * (2.0 * rng.unit() - 1.0)).clamp(sr.lo, sr.hi);
        }
        let (input, vp) = case1_row(phi, sh, &spec.rhg)?;
        ds.push_row_at(walk.depth_start + i as f64 * walk.depth_step, &input, &[vp])?;
        labels.push(i);
    }
    Ok(LabeledLog {
        dataset: ds,
        zones: ZoneLabels::DepthIndex(labels),
    })
}

fn case2_row(t: &LithologyTransform, rng: &mut SeededStream) -> Result<([f64; 2], [f64; 2])> {
    let phi = rng.uniform(t.validity.phi.lo, t.validity.phi.hi);
    let vp = lith_vp(t, phi)?;
    let vs = lith_vs(t, phi)?;
    let rho = lith_rho(t, vp)?;
    Ok(([phi, rho], [vp, vs]))
}

/// Seven-lithology corpus: inputs `(phi, rho)`, targets `(vp, vs)` in km/s.
///
/// Rows come in lithology blocks of `n_per_lith`, table order; porosity is
/// uniform over each lithology's published range.
pub fn gen_case2(n_per_lith: usize, mode: RhoLawMode, seed: u64) -> Result<Dataset> {
    if n_per_lith == 0 {
        return Err(Error::InvalidArgument("n_per_lith must be at least 1".into()));
    }
    let mut rng = SeededStream::new(seed, stream::TRAINING_CORPUS);
    let mut ds = Dataset::new(&CASE2_INPUTS, &CASE2_TARGETS, Provenance::Case2);
    ds.seed = Some(seed);
    ds.set_param("n_per_lith", n_per_lith);
    ds.set_param("mode", mode);
    for t in LithologyTransform::table(mode) {
        for _ in 0..n_per_lith {
            let (input, target) = case2_row(&t, &mut rng)?;
            ds.push_row(&input, &target)?;
        }
    }
    Ok(ds)
}

/// Synthetic seven-zone log, one contiguous block per lithology in table order.
pub fn gen_case2_testlog(block_len: usize, seed: u64, mode: RhoLawMode) -> Result<LabeledLog> {
    if block_len == 0 {
        return Err(Error::InvalidArgument("block_len must be at least 1".into()));
    }
    let mut rng = SeededStream::new(seed, stream::TEST_LOG);
    let mut ds = Dataset::new(&CASE2_INPUTS, &CASE2_TARGETS, Provenance::Case2);
    ds.seed = Some(seed);
    ds.set_param("block_len", block_len);
    ds.set_param("mode", mode);
    let walk = RandomWalk::default();
    let mut labels = Vec::with_capacity(7 * block_len);
    for t in LithologyTransform::table(mode) {
        for _ in 0..block_len {
            let (input, target) = case2_row(&t, &mut rng)?;
            let depth = walk.depth_start + labels.len() as f64 * walk.depth_step;
            ds.push_row_at(depth, &input, &target)?;
            labels.push(t.lith);
        }
    }
    Ok(LabeledLog {
        dataset: ds,
        zones: ZoneLabels::Lithology(labels),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::rhg_vp;

    fn rhg() -> RhgParams {
        RhgParams::new(5000.0, 1500.0, 2.65, 1.03, 3650.0, 0.92).unwrap()
    }

    fn spec(n: usize) -> Case1Spec {
        Case1Spec::new(n, Range::new(0.30, 0.75), Range::new(0.0, 0.8), rhg())
    }

    #[test]
    fn case1_shape_and_oracle() {
        let ds = gen_case1(&spec(500), 9).unwrap();
        assert_eq!(ds.len(), 500);
        assert_eq!(ds.input_names(), ["phi", "sh", "rho"]);
        for i in 0..ds.len() {
            let x = ds.input(i);
            assert!((0.30..0.75).contains(&x[0]) && (0.0..0.8).contains(&x[1]));
            assert_eq!(x[2], bulk_density(x[0], x[1], &rhg()).unwrap());
            assert_eq!(ds.target(i)[0], rhg_hydrate_vp(x[0], x[1], &rhg()).unwrap());
        }
    }

    #[test]
    fn case1_zero_saturation_is_plain_rhg() {
        let mut s = spec(200);
        s.sh_range = Range::new(0.0, 0.0);
        let ds = gen_case1(&s, 3).unwrap();
        for i in 0..ds.len() {
            assert_eq!(ds.target(i)[0], rhg_vp(ds.input(i)[0], &rhg()).unwrap());
        }
    }

    #[test]
    fn case1_rejects_bad_arguments() {
        assert!(gen_case1(&spec(0), 1).is_err());
        let mut s = spec(10);
        s.phi_range = Range::new(0.5, 1.2);
        assert!(gen_case1(&s, 1).is_err());
        s.phi_range = Range::new(0.6, 0.5);
        assert!(gen_case1(&s, 1).is_err());
    }

    #[test]
    fn case1_noise_only_touches_inputs() {
        let mut s = spec(50);
        let clean = gen_case1(&s, 4).unwrap();
        s.noise_sigma = 0.01;
        let noisy = gen_case1(&s, 4).unwrap();
        assert_eq!(clean.targets(), noisy.targets());
        assert_ne!(clean.inputs(), noisy.inputs());
    }

    #[test]
    fn case2_blocks_and_identities() {
        let n = 300;
        let ds = gen_case2(n, RhoLawMode::DolomiteSignCorrected, 5).unwrap();
        assert_eq!(ds.len(), 7 * n);
        for (b, lith) in Lithology::ALL.into_iter().enumerate() {
            let t = LithologyTransform::builtin(lith, RhoLawMode::DolomiteSignCorrected);
            for i in b * n..(b + 1) * n {
                let (x, y) = (ds.input(i), ds.target(i));
                assert!(t.validity.phi.contains(x[0]));
                assert_eq!(y[0], lith_vp(&t, x[0]).unwrap());
                assert_eq!(y[1], lith_vs(&t, x[0]).unwrap());
                assert_eq!(x[1], lith_rho(&t, y[0]).unwrap());
                if lith == Lithology::Chalks {
                    assert_eq!(x[1], 1.045 + 0.373 * y[0]);
                }
            }
        }
        assert!(gen_case2(0, RhoLawMode::AsPrinted, 1).is_err());
    }

    #[test]
    fn case2_testlog_layout() {
        let log = gen_case2_testlog(100, 11, RhoLawMode::default()).unwrap();
        assert_eq!(log.dataset.len(), 700);
        let ZoneLabels::Lithology(labels) = &log.zones else {
            panic!("expected lithology labels");
        };
        for (b, lith) in Lithology::ALL.into_iter().enumerate() {
            assert!(labels[b * 100..(b + 1) * 100].iter().all(|&l| l == lith));
        }
        assert!(gen_case2_testlog(0, 1, RhoLawMode::default()).is_err());
    }

    #[test]
    fn testlog_draws_differ_from_training() {
        let train = gen_case2(1000, RhoLawMode::default(), 7).unwrap();
        let log = gen_case2_testlog(1000, 7, RhoLawMode::default()).unwrap();
        let mut seen: Vec<u64> = train.input_column(0).iter().map(|v| v.to_bits()).collect();
        seen.sort_unstable();
        let collisions = log
            .dataset
            .input_column(0)
            .iter()
            .filter(|v| seen.binary_search(&v.to_bits()).is_ok())
            .count();
        assert!(collisions as f64 <= 0.001 * log.dataset.len() as f64, "{collisions}");
    }

    #[test]
    fn case1_testlog_walk() {
        let walk = RandomWalk::default();
        let log = gen_case1_testlog(&spec(400), &walk, 2).unwrap();
        let ds = &log.dataset;
        assert_eq!(ds.len(), 400);
        assert_eq!(log.zones, ZoneLabels::DepthIndex((0..400).collect()));
        for i in 1..ds.len() {
            assert!((ds.input(i)[0] - ds.input(i - 1)[0]).abs() <= walk.phi_step + 1e-15);
            assert!((ds.input(i)[1] - ds.input(i - 1)[1]).abs() <= walk.sh_step + 1e-15);
        }
        for i in 0..ds.len() {
            let x = ds.input(i);
            assert_eq!(ds.target(i)[0], rhg_hydrate_vp(x[0], x[1], &rhg()).unwrap());
        }
        assert!(gen_case1_testlog(&spec(0), &walk, 2).is_err());
    }

    #[test]
    fn push_row_validates() {
        let mut ds = Dataset::new(&["a", "b"], &["y"], Provenance::ExternalCsv);
        assert!(ds.push_row(&[1.0], &[1.0]).is_err());
        assert!(ds.push_row(&[1.0, 2.0], &[]).is_err());
        assert!(ds.push_row(&[1.0, f64::NAN], &[1.0]).is_err());
        ds.push_row(&[1.0, 2.0], &[3.0]).unwrap();
        assert!(ds.push_row_at(0.0, &[1.0, 2.0], &[3.0]).is_err());
        assert_eq!(ds.len(), 1);
    }
}
