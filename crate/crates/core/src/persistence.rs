//! On-disk formats: dataset CSV + `.meta` sidecar, well-log CSV ingestion and
//! the text model file.
//!
//! Floats are always written in Rust's shortest round-trip form (`{:?}`, e.g.
//! `0.1`, `1.0`, `1e-7`), rows end with LF, and CSV quoting follows RFC 4180.
//! Re-writing a file that was read back therefore reproduces it byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::neuralnet::{Activation, Network, NetworkSpec, Normalizer, TrainingProvenance};
use crate::synthgen::{
    Dataset, LabeledLog, Provenance, ZoneLabels, CASE1_INPUTS, CASE1_TARGETS, CASE2_INPUTS,
    CASE2_TARGETS,
};
use crate::transforms::Lithology;

pub const MODEL_FORMAT_VERSION: u32 = 1;
const MODEL_MAGIC: &str = "vps-model";
const META_FORMAT: &str = "vps-dataset-meta/1";

/// Canonical float text.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::parse(format!("csv: {e}"))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Hex SHA-256 of arbitrary bytes.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hex SHA-256 of a file's contents.
pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Log-file column layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogSchema {
    /// `depth,phi,sh,rho[,vp]`
    Case1,
    /// `depth,phi,rho[,vp,vs]`
    Case2,
}

impl LogSchema {
    pub fn inputs(self) -> &'static [&'static str] {
        match self {
            LogSchema::Case1 => &CASE1_INPUTS,
            LogSchema::Case2 => &CASE2_INPUTS,
        }
    }

    pub fn targets(self) -> &'static [&'static str] {
        match self {
            LogSchema::Case1 => &CASE1_TARGETS,
            LogSchema::Case2 => &CASE2_TARGETS,
        }
    }

    /// Case I if the header has an `sh` column, Case II otherwise.
    pub fn detect(header: &[String]) -> LogSchema {
        if header.iter().any(|h| h == "sh") {
            LogSchema::Case1
        } else {
            LogSchema::Case2
        }
    }
}

fn dataset_csv_with_zones(ds: &Dataset, zones: Option<&ZoneLabels>) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header: Vec<&str> = Vec::new();
    if ds.depth().is_some() {
        header.push("depth");
    }
    header.extend(ds.input_names().iter().map(String::as_str));
    header.extend(ds.target_names().iter().map(String::as_str));
    if zones.is_some() {
        header.push("zone");
    }
    w.write_record(&header).map_err(csv_err)?;
    let mut rec: Vec<String> = Vec::with_capacity(header.len());
    for i in 0..ds.len() {
        rec.clear();
        if let Some(d) = ds.depth() {
            rec.push(fmt_f64(d[i]));
        }
        rec.extend(ds.input(i).iter().map(|&v| fmt_f64(v)));
        rec.extend(ds.target(i).iter().map(|&v| fmt_f64(v)));
        if let Some(z) = zones {
            rec.push(z.token(i));
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidArgument(format!("csv encoding: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// Canonical CSV text of a dataset: `[depth,]inputs..,targets..`.
pub fn dataset_to_csv(ds: &Dataset) -> Result<String> {
    dataset_csv_with_zones(ds, None)
}

/// SHA-256 of the canonical dataset CSV bytes.
pub fn dataset_digest(ds: &Dataset) -> String {
    match dataset_to_csv(ds) {
        Ok(text) => sha256_hex(text.as_bytes()),
        // Only reachable if the CSV writer itself fails on in-memory data.
        Err(_) => String::from("unavailable"),
    }
}

/// Sidecar path: same stem, `.meta` extension.
pub fn meta_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta")
}

/// `key = value` sidecar text recording how a dataset was produced.
pub fn dataset_meta(ds: &Dataset, digest: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "format = {META_FORMAT}");
    let _ = writeln!(out, "provenance = {}", ds.provenance);
    if let Some(seed) = ds.seed {
        let _ = writeln!(out, "seed = {seed}");
    }
    let _ = writeln!(out, "rows = {}", ds.len());
    let _ = writeln!(out, "inputs = {}", ds.input_names().join(","));
    let _ = writeln!(out, "targets = {}", ds.target_names().join(","));
    let _ = writeln!(out, "sha256 = {digest}");
    for (k, v) in &ds.params {
        let _ = writeln!(out, "param.{k} = {v}");
    }
    out
}

/// Writes `path` (CSV) and its `.meta` sidecar.
pub fn write_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    let text = dataset_to_csv(ds)?;
    write_file(path, text.as_bytes())?;
    let meta = dataset_meta(ds, &sha256_hex(text.as_bytes()));
    write_file(&meta_path(path), meta.as_bytes())
}

/// Writes a labeled log as CSV with a trailing `zone` column, plus sidecar.
pub fn write_labeled_log(log: &LabeledLog, path: &Path) -> Result<()> {
    let text = dataset_csv_with_zones(&log.dataset, Some(&log.zones))?;
    write_file(path, text.as_bytes())?;
    let meta = dataset_meta(&log.dataset, &sha256_hex(text.as_bytes()));
    write_file(&meta_path(path), meta.as_bytes())
}

fn apply_meta(ds: &mut Dataset, meta: &str) -> Result<()> {
    for (n, line) in meta.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            row: Some(n + 1),
            column: None,
            message: format!("meta line `{line}` is not key = value"),
        })?;
        let (k, v) = (k.trim(), v.trim());
        match k {
            "provenance" => ds.provenance = v.parse()?,
            "seed" => {
                ds.seed = Some(v.parse().map_err(|_| Error::parse(format!("bad seed `{v}`")))?)
            }
            _ => {
                if let Some(key) = k.strip_prefix("param.") {
                    ds.params.push((key.to_string(), v.to_string()));
                }
            }
        }
    }
    Ok(())
}

struct ParsedCsv {
    header: Vec<String>,
    rows: Vec<csv::StringRecord>,
}

fn parse_csv(path: &Path) -> Result<ParsedCsv> {
    let text = read_file(path)?;
    if text.trim().is_empty() {
        return Err(Error::Empty(format!("{} has no header", path.display())));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_string)
        .collect();
    let rows = rdr
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(csv_err)?;
    if rows.is_empty() {
        return Err(Error::Empty(format!("{} has no data rows", path.display())));
    }
    Ok(ParsedCsv { header, rows })
}

fn column(header: &[String], name: &str) -> Option<usize> {
    header.iter().position(|h| h == name)
}

fn cell(rec: &csv::StringRecord, idx: usize, row: usize, name: &str) -> Result<f64> {
    let raw = rec.get(idx).unwrap_or("");
    let v: f64 = raw.parse().map_err(|_| Error::Parse {
        row: Some(row),
        column: Some(name.to_string()),
        message: format!("`{raw}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            row: Some(row),
            column: Some(name.to_string()),
            message: format!("`{raw}` is not finite"),
        });
    }
    Ok(v)
}

/// Column positions of a schema within a header. Targets are all-or-nothing:
/// having some but not all target columns is a missing-column error.
fn locate(header: &[String], schema: LogSchema, need_depth: bool) -> Result<(Option<usize>, Vec<usize>, Vec<usize>)> {
    let depth = column(header, "depth");
    if need_depth && depth.is_none() {
        return Err(Error::MissingColumn("depth".into()));
    }
    let inputs = schema
        .inputs()
        .iter()
        .map(|n| column(header, n).ok_or_else(|| Error::MissingColumn(n.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let present: Vec<Option<usize>> = schema.targets().iter().map(|n| column(header, n)).collect();
    let targets = if present.iter().all(Option::is_none) {
        Vec::new()
    } else {
        present
            .iter()
            .zip(schema.targets())
            .map(|(p, n)| p.ok_or_else(|| Error::MissingColumn(n.to_string())))
            .collect::<Result<Vec<_>>>()?
    };
    Ok((depth, inputs, targets))
}

fn build_dataset(parsed: &ParsedCsv, schema: LogSchema, need_depth: bool) -> Result<Dataset> {
    let (depth, inputs, targets) = locate(&parsed.header, schema, need_depth)?;
    let target_names: Vec<&str> = if targets.is_empty() {
        Vec::new()
    } else {
        schema.targets().to_vec()
    };
    let mut ds = Dataset::new(schema.inputs(), &target_names, Provenance::ExternalCsv);
    let mut x = vec![0.0; inputs.len()];
    let mut y = vec![0.0; targets.len()];
    for (i, rec) in parsed.rows.iter().enumerate() {
        let row = i + 1;
        for (slot, (&idx, name)) in x.iter_mut().zip(inputs.iter().zip(schema.inputs())) {
            *slot = cell(rec, idx, row, name)?;
        }
        for (slot, (&idx, name)) in y.iter_mut().zip(targets.iter().zip(schema.targets())) {
            *slot = cell(rec, idx, row, name)?;
        }
        match depth {
            Some(d) => ds.push_row_at(cell(rec, d, row, "depth")?, &x, &y)?,
            None => ds.push_row(&x, &y)?,
        }
    }
    Ok(ds)
}

/// Reads a user-supplied well log. Columns may appear in any order; extra
/// columns are ignored. Row numbers in errors count data rows from 1.
pub fn read_log_csv(path: &Path, schema: LogSchema) -> Result<Dataset> {
    let parsed = parse_csv(path)?;
    build_dataset(&parsed, schema, true)
}

/// Reads any dataset CSV written by this crate (schema inferred from the
/// header, depth optional) and restores seed/provenance from the sidecar.
pub fn read_dataset_csv(path: &Path) -> Result<Dataset> {
    let parsed = parse_csv(path)?;
    let schema = LogSchema::detect(&parsed.header);
    let mut ds = build_dataset(&parsed, schema, false)?;
    let meta = meta_path(path);
    if meta.exists() {
        apply_meta(&mut ds, &read_file(&meta)?)?;
    }
    Ok(ds)
}

/// Reads a log with a `zone` column: lithology tokens for Case II, depth
/// indices for Case I.
pub fn read_labeled_log(path: &Path, schema: LogSchema) -> Result<LabeledLog> {
    let parsed = parse_csv(path)?;
    let mut ds = build_dataset(&parsed, schema, true)?;
    let meta = meta_path(path);
    if meta.exists() {
        apply_meta(&mut ds, &read_file(&meta)?)?;
    }
    let zc = column(&parsed.header, "zone").ok_or_else(|| Error::MissingColumn("zone".into()))?;
    let raw = parsed.rows.iter().map(|r| r.get(zc).unwrap_or(""));
    let zones = match schema {
        LogSchema::Case2 => ZoneLabels::Lithology(
            raw.enumerate()
                .map(|(i, s)| {
                    s.parse::<Lithology>().map_err(|_| Error::Parse {
                        row: Some(i + 1),
                        column: Some("zone".into()),
                        message: format!("unknown lithology `{s}`"),
                    })
                })
                .collect::<Result<_>>()?,
        ),
        LogSchema::Case1 => ZoneLabels::DepthIndex(
            raw.enumerate()
                .map(|(i, s)| {
                    s.parse::<usize>().map_err(|_| Error::Parse {
                        row: Some(i + 1),
                        column: Some("zone".into()),
                        message: format!("`{s}` is not a depth index"),
                    })
                })
                .collect::<Result<_>>()?,
        ),
    };
    Ok(LabeledLog { dataset: ds, zones })
}

fn join_floats(v: &[f64]) -> String {
    v.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(" ")
}

/// Text model file.
///
/// ```text
/// format = vps-model
/// format_version = 1
/// hidden = 9,15,9
/// input_dim = 3
/// output_dim = 1
/// activation = tanh
/// init_seed = 1
/// shuffle_seed = 1            (provenance, optional)
/// dataset_digest = <sha256>   (provenance, optional)
/// train_config = <summary>    (provenance, optional)
/// [input_norm]
/// min = ..
/// max = ..
/// [output_norm]
/// min = ..
/// max = ..
/// [layer 0]
/// shape = <fan_out> <fan_in>
/// w = <fan_in values>         (one line per output unit)
/// b = <fan_out values>
/// ...
/// [end]
/// ```
pub fn model_to_string(net: &Network) -> Result<String> {
    let (inorm, onorm) = match (net.input_norm(), net.output_norm()) {
        (Some(i), Some(o)) => (i, o),
        _ => return Err(Error::Untrained),
    };
    let spec = net.spec();
    let mut out = String::new();
    let _ = writeln!(out, "format = {MODEL_MAGIC}");
    let _ = writeln!(out, "format_version = {MODEL_FORMAT_VERSION}");
    let _ = writeln!(out, "hidden = {}", spec.hidden_string());
    let _ = writeln!(out, "input_dim = {}", spec.input_dim);
    let _ = writeln!(out, "output_dim = {}", spec.output_dim);
    let _ = writeln!(out, "activation = {}", spec.activation);
    let _ = writeln!(out, "init_seed = {}", spec.init_seed);
    if let Some(p) = &net.provenance {
        let _ = writeln!(out, "shuffle_seed = {}", p.shuffle_seed);
        let _ = writeln!(out, "dataset_digest = {}", p.dataset_digest);
        let _ = writeln!(out, "train_config = {}", p.config);
    }
    for (name, n) in [("input_norm", inorm), ("output_norm", onorm)] {
        let _ = writeln!(out, "[{name}]");
        let _ = writeln!(out, "min = {}", join_floats(n.min()));
        let _ = writeln!(out, "max = {}", join_floats(n.max()));
    }
    for layer in 0..net.num_layers() {
        let (fan_out, fan_in) = net.layer_shape(layer);
        let _ = writeln!(out, "[layer {layer}]");
        let _ = writeln!(out, "shape = {fan_out} {fan_in}");
        for row in net.layer_weights(layer).chunks(fan_in) {
            let _ = writeln!(out, "w = {}", join_floats(row));
        }
        let _ = writeln!(out, "b = {}", join_floats(net.layer_biases(layer)));
    }
    out.push_str("[end]\n");
    Ok(out)
}

pub fn save_model(net: &Network, path: &Path) -> Result<()> {
    let text = model_to_string(net)?;
    write_file(path, text.as_bytes())
}

pub fn load_model(path: &Path) -> Result<Network> {
    model_from_str(&read_file(path)?)
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Lines<'a> {
    fn peek_section(&mut self) -> Option<&'a str> {
        self.inner.peek().and_then(|(_, l)| {
            let l = l.trim();
            l.strip_prefix('[').and_then(|s| s.strip_suffix(']'))
        })
    }

    fn expect_section(&mut self, name: &str) -> Result<()> {
        match self.peek_section() {
            Some(s) if s == name => {
                self.inner.next();
                Ok(())
            }
            _ => Err(Error::MissingSection(format!("[{name}]"))),
        }
    }

    /// Next `key = value` inside the current section.
    fn entry(&mut self, key: &str, section: &str) -> Result<(usize, &'a str)> {
        match self.inner.peek() {
            Some((n, line)) if !line.trim_start().starts_with('[') => {
                let (n, line) = (*n, *line);
                self.inner.next();
                let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                    row: Some(n + 1),
                    column: None,
                    message: format!("expected `{key} = ...`"),
                })?;
                if k.trim() != key {
                    return Err(Error::Parse {
                        row: Some(n + 1),
                        column: None,
                        message: format!("expected `{key}` in [{section}], found `{}`", k.trim()),
                    });
                }
                Ok((n + 1, v.trim()))
            }
            _ => Err(Error::MissingSection(format!("[{section}] entry `{key}`"))),
        }
    }
}

fn parse_floats(text: &str, line: usize, what: &str) -> Result<Vec<f64>> {
    let values = text
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>().map_err(|_| Error::Parse {
                row: Some(line),
                column: None,
                message: format!("`{t}` in {what} is not a number"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("{what} (line {line})")));
    }
    Ok(values)
}

fn parse_usize(text: &str, what: &str) -> Result<usize> {
    text.parse()
        .map_err(|_| Error::parse(format!("`{text}` is not a valid {what}")))
}

pub fn model_from_str(text: &str) -> Result<Network> {
    let mut header: Vec<(String, String)> = Vec::new();
    let mut lines = Lines {
        inner: text.lines().enumerate().peekable(),
    };
    while let Some((n, line)) = lines.inner.peek().copied() {
        let t = line.trim();
        if t.starts_with('[') {
            break;
        }
        lines.inner.next();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (k, v) = t.split_once('=').ok_or_else(|| Error::Parse {
            row: Some(n + 1),
            column: None,
            message: format!("header line `{t}` is not key = value"),
        })?;
        header.push((k.trim().to_string(), v.trim().to_string()));
    }
    let get = |key: &str| -> Result<&str> {
        header
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| Error::MissingSection(format!("header key `{key}`")))
    };
    if get("format")? != MODEL_MAGIC {
        return Err(Error::parse(format!("not a {MODEL_MAGIC} file")));
    }
    let version: u32 = get("format_version")?
        .parse()
        .map_err(|_| Error::parse("format_version is not an integer"))?;
    if version != MODEL_FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            supported: MODEL_FORMAT_VERSION,
        });
    }
    let spec = NetworkSpec {
        input_dim: parse_usize(get("input_dim")?, "input_dim")?,
        hidden: NetworkSpec::parse_hidden(get("hidden")?)?,
        output_dim: parse_usize(get("output_dim")?, "output_dim")?,
        activation: get("activation")?.parse::<Activation>()?,
        init_seed: get("init_seed")?
            .parse()
            .map_err(|_| Error::parse("init_seed is not an integer"))?,
    };
    spec.validate()?;
    let provenance = match get("shuffle_seed") {
        Ok(seed) => Some(TrainingProvenance {
            shuffle_seed: seed
                .parse()
                .map_err(|_| Error::parse("shuffle_seed is not an integer"))?,
            dataset_digest: get("dataset_digest")?.to_string(),
            config: get("train_config")?.to_string(),
        }),
        Err(_) => None,
    };

    let mut norms = Vec::with_capacity(2);
    for name in ["input_norm", "output_norm"] {
        lines.expect_section(name)?;
        let (ln, min) = lines.entry("min", name)?;
        let min = parse_floats(min, ln, name)?;
        let (ln, max) = lines.entry("max", name)?;
        let max = parse_floats(max, ln, name)?;
        norms.push(Normalizer::new(min, max)?);
    }
    let output_norm = norms.pop();
    let input_norm = norms.pop();

    let widths = spec.layer_widths();
    let mut layers = Vec::with_capacity(widths.len() - 1);
    for (i, pair) in widths.windows(2).enumerate() {
        let section = format!("layer {i}");
        lines.expect_section(&section)?;
        let (_, shape) = lines.entry("shape", &section)?;
        let dims: Vec<usize> = shape
            .split_whitespace()
            .map(|s| parse_usize(s, "layer shape"))
            .collect::<Result<_>>()?;
        let (fan_in, fan_out) = (pair[0], pair[1]);
        if dims.len() != 2 {
            return Err(Error::parse(format!("[{section}] shape needs two integers")));
        }
        if dims[0] != fan_out {
            return Err(Error::dim(format!("[{section}] output width"), fan_out, dims[0]));
        }
        if dims[1] != fan_in {
            return Err(Error::dim(format!("[{section}] input width"), fan_in, dims[1]));
        }
        let mut weights = Vec::with_capacity(fan_in * fan_out);
        for _ in 0..fan_out {
            let (ln, row) = lines.entry("w", &section)?;
            let row = parse_floats(row, ln, &section)?;
            if row.len() != fan_in {
                return Err(Error::dim(format!("[{section}] weight row"), fan_in, row.len()));
            }
            weights.extend(row);
        }
        let (ln, b) = lines.entry("b", &section)?;
        let biases = parse_floats(b, ln, &section)?;
        if biases.len() != fan_out {
            return Err(Error::dim(format!("[{section}] biases"), fan_out, biases.len()));
        }
        layers.push((weights, biases));
    }
    if lines.peek_section().is_some_and(|s| s.starts_with("layer")) {
        return Err(Error::parse(
            "model file has more layers than its hidden list declares",
        ));
    }
    lines.expect_section("end")?;
    let mut net = Network::from_parts(spec, layers, input_norm, output_norm)?;
    net.provenance = provenance;
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuralnet::init_network;
    use crate::synthgen::gen_case2_testlog;
    use crate::transforms::RhoLawMode;

    fn toy_net() -> Network {
        let spec = NetworkSpec::new(2, vec![3, 2], 1, 9).unwrap();
        let mut net = init_network(&spec).unwrap();
        net.set_normalization(
            Normalizer::new(vec![0.0, 1.0], vec![1.0, 3.0]).unwrap(),
            Normalizer::new(vec![1000.0], vec![5000.0]).unwrap(),
        )
        .unwrap();
        net
    }

    #[test]
    fn model_text_round_trip() {
        let net = toy_net();
        let text = model_to_string(&net).unwrap();
        let back = model_from_str(&text).unwrap();
        assert_eq!(back, net);
        assert_eq!(back.spec().hidden_string(), "3,2");
        assert_eq!(model_to_string(&back).unwrap(), text);
    }

    #[test]
    fn untrained_model_is_not_saved() {
        let net = init_network(&NetworkSpec::new(2, vec![3], 1, 0).unwrap()).unwrap();
        assert!(matches!(model_to_string(&net), Err(Error::Untrained)));
    }

    #[test]
    fn truncated_model_names_missing_section() {
        let text = model_to_string(&toy_net()).unwrap();
        let cut = &text[..text.find("[layer 2]").unwrap()];
        match model_from_str(cut) {
            Err(Error::MissingSection(s)) => assert!(s.contains("layer 2"), "{s}"),
            other => panic!("expected missing section, got {other:?}"),
        }
        let no_end = text.replace("[end]\n", "");
        assert!(matches!(model_from_str(&no_end), Err(Error::MissingSection(s)) if s.contains("end")));
    }

    #[test]
    fn version_nan_and_shape_checks() {
        let text = model_to_string(&toy_net()).unwrap();
        let v2 = text.replace("format_version = 1", "format_version = 2");
        assert!(matches!(
            model_from_str(&v2),
            Err(Error::UnsupportedVersion { found: 2, .. })
        ));
        let first_w = text.lines().find(|l| l.starts_with("w = ")).unwrap();
        let nan = text.replacen(first_w, "w = NaN 0.5", 1);
        assert!(matches!(model_from_str(&nan), Err(Error::NonFinite(_))));
        let bad_shape = text.replacen("shape = 3 2", "shape = 4 2", 1);
        assert!(matches!(model_from_str(&bad_shape), Err(Error::Dimension { .. })));
        let bad_hidden = text.replacen("hidden = 3,2", "hidden = 3,3", 1);
        assert!(model_from_str(&bad_hidden).is_err());
    }

    #[test]
    fn log_csv_reading() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("log.csv");
        fs::write(&p, "rho,depth,vp,phi,sh\n2.1,10.0,2000.0,0.4,0.1\n2.2,10.5,2100.0,0.35,0.2\n2.0,11.0,1900.0,0.45,0.0\n").unwrap();
        let ds = read_log_csv(&p, LogSchema::Case1).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.input_names(), ["phi", "sh", "rho"]);
        assert_eq!(ds.input(1), &[0.35, 0.2, 2.2]);
        assert_eq!(ds.target(2), &[1900.0]);
        assert_eq!(ds.depth().unwrap(), &[10.0, 10.5, 11.0]);

        fs::write(&p, "depth,phi,sh\n1.0,0.3,0.1\n").unwrap();
        assert!(matches!(read_log_csv(&p, LogSchema::Case1), Err(Error::MissingColumn(c)) if c == "rho"));

        let mut text = String::from("depth,phi,rho\n");
        for i in 1..=9 {
            let phi = if i == 7 { "abc".to_string() } else { "0.2".to_string() };
            text.push_str(&format!("{i}.0,{phi},2.3\n"));
        }
        fs::write(&p, text).unwrap();
        match read_log_csv(&p, LogSchema::Case2) {
            Err(e @ Error::Parse { row: Some(7), .. }) => assert!(e.to_string().contains("row 7")),
            other => panic!("expected parse error at row 7, got {other:?}"),
        }

        fs::write(&p, "").unwrap();
        assert!(matches!(read_log_csv(&p, LogSchema::Case2), Err(Error::Empty(_))));
        fs::write(&p, "depth,phi,rho,vp\n1.0,0.2,2.3,3.0\n").unwrap();
        assert!(matches!(read_log_csv(&p, LogSchema::Case2), Err(Error::MissingColumn(c)) if c == "vs"));
    }

    #[test]
    fn labeled_log_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("test.csv");
        let log = gen_case2_testlog(5, 3, RhoLawMode::default()).unwrap();
        write_labeled_log(&log, &p).unwrap();
        let back = read_labeled_log(&p, LogSchema::Case2).unwrap();
        assert_eq!(back.zones, log.zones);
        assert_eq!(back.dataset.inputs(), log.dataset.inputs());
        assert_eq!(back.dataset.seed, Some(3));
        let p2 = dir.path().join("again.csv");
        write_labeled_log(&back, &p2).unwrap();
        assert_eq!(fs::read(&p).unwrap(), fs::read(&p2).unwrap());
    }
}
