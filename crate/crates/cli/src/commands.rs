use std::fs;
use std::path::{Path, PathBuf};

use vps::config::Config;
use vps::evaluation::{evaluate, evaluate_log, trace_csv, zone_summary_csv, EvalReport};
use vps::experiment::{reproduce, CaseId, Overrides, Reproduction};
use vps::neuralnet::{init_network, train, NetworkSpec};
use vps::persistence::{
    dataset_digest, load_model, read_dataset_csv, read_labeled_log, save_model, write_dataset,
    write_labeled_log, LogSchema,
};
use vps::synthgen::{gen_case1, gen_case1_testlog, gen_case2, gen_case2_testlog};
use vps::transforms::coefficient_table_csv;
use vps::{Error, Result};

use crate::manifest::Manifest;
use crate::{Case, Cli, Command};

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn argv() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => Config::from_path(p)?,
        None => Config::embedded(),
    };
    match &cli.command {
        Command::Table { mode } => {
            print!("{}", coefficient_table_csv((*mode).into()));
            Ok(())
        }
        Command::Gen {
            case,
            n,
            mode,
            testlog,
        } => cmd_gen(cli, &cfg, *case, *n, mode.map(Into::into), *testlog),
        Command::Train {
            data,
            net,
            epochs,
            lr,
            batch,
            patience,
            val_fraction,
            model_out,
        } => {
            let mut tc = cfg.train_config(cli.seed.unwrap_or(0));
            if let Some(v) = epochs {
                tc.epochs = *v;
            }
            if let Some(v) = lr {
                tc.learning_rate = *v;
            }
            if let Some(v) = batch {
                tc.batch_size = *v;
            }
            if let Some(v) = patience {
                tc.patience = *v;
            }
            if let Some(v) = val_fraction {
                tc.val_fraction = *v;
            }
            cmd_train(cli, &cfg, data, net, &tc, model_out.as_deref())
        }
        Command::Eval {
            model,
            data,
            trace_out,
        } => cmd_eval(cli, model, data, trace_out.as_deref()),
        Command::Reproduce {
            case,
            seeds,
            epochs,
            n,
        } => {
            let ov = Overrides {
                seeds: seeds.clone(),
                epochs: *epochs,
                n: *n,
                corpus_seed: cli.seed,
            };
            cmd_reproduce(cli, &cfg, *case, &ov)
        }
    }
}

fn cmd_gen(
    cli: &Cli,
    cfg: &Config,
    case: Case,
    n: Option<usize>,
    mode: Option<vps::transforms::RhoLawMode>,
    testlog: bool,
) -> Result<()> {
    ensure_dir(&cli.out)?;
    let mode = match mode {
        Some(m) => m,
        None => cfg.case2_mode()?,
    };
    let mut manifest = Manifest::new("gen");
    manifest.set("argv", argv());
    manifest.config(cfg);
    let (name, seed) = match (case, testlog) {
        (Case::One, false) => ("case1.csv", cli.seed.unwrap_or(cfg.reproduce.corpus_seed)),
        (Case::Two, false) => ("case2.csv", cli.seed.unwrap_or(cfg.reproduce.corpus_seed)),
        (Case::One, true) => ("case1_testlog.csv", cli.seed.unwrap_or(cfg.reproduce.testlog_seed)),
        (Case::Two, true) => ("case2_testlog.csv", cli.seed.unwrap_or(cfg.reproduce.testlog_seed)),
    };
    let path = cli.out.join(name);
    let rows = match (case, testlog) {
        (Case::One, false) => {
            let mut spec = cfg.case1_spec();
            spec.n = n.unwrap_or(spec.n);
            let ds = gen_case1(&spec, seed)?;
            write_dataset(&ds, &path)?;
            ds.len()
        }
        (Case::Two, false) => {
            let ds = gen_case2(n.unwrap_or(cfg.case2.n_per_lith), mode, seed)?;
            write_dataset(&ds, &path)?;
            ds.len()
        }
        (Case::One, true) => {
            let mut spec = cfg.case1_spec();
            spec.n = n.unwrap_or(cfg.case1.testlog_n);
            spec.noise_sigma = 0.0;
            let log = gen_case1_testlog(&spec, &cfg.case1_walk(), seed)?;
            write_labeled_log(&log, &path)?;
            log.dataset.len()
        }
        (Case::Two, true) => {
            let log = gen_case2_testlog(n.unwrap_or(cfg.case2.block_len), seed, mode)?;
            write_labeled_log(&log, &path)?;
            log.dataset.len()
        }
    };
    manifest.set("seed", seed);
    manifest.set("mode", mode);
    manifest.set("rows", rows);
    manifest.artifact(&path);
    manifest.artifact(&path.with_extension("meta"));
    manifest.write(&cli.out.join("gen_manifest.txt"))?;
    println!("wrote {} rows to {}", rows, path.display());
    Ok(())
}

fn cmd_train(
    cli: &Cli,
    cfg: &Config,
    data: &Path,
    net: &str,
    tc: &vps::neuralnet::TrainConfig,
    model_out: Option<&Path>,
) -> Result<()> {
    ensure_dir(&cli.out)?;
    let hidden = NetworkSpec::parse_hidden(net)?;
    let ds = read_dataset_csv(data)?;
    let seed = cli.seed.unwrap_or(0);
    let spec = NetworkSpec::new(ds.input_dim(), hidden, ds.target_dim(), seed)?;
    let (trained, report) = train(&init_network(&spec)?, &ds, tc)?;

    let model_path = model_out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cli.out.join("model.vpsm"));
    save_model(&trained, &model_path)?;
    let report_path = cli.out.join("train_report.csv");
    write(&report_path, &report.to_csv())?;

    let mut manifest = Manifest::new("train");
    manifest.set("argv", argv());
    manifest.config(cfg);
    manifest.set("data", data.display());
    manifest.set("data_sha256", dataset_digest(&ds));
    manifest.set("hidden", spec.hidden_string());
    manifest.set("seed", seed);
    manifest.set("train_config", tc.summary());
    manifest.set("epochs_run", report.epochs_run());
    manifest.set("best_epoch", report.best_epoch);
    for (name, e) in ds.target_names().iter().zip(&report.val_epsilon) {
        manifest.set(&format!("val_epsilon.{name}"), format!("{e:?}"));
    }
    manifest.artifact(&model_path);
    manifest.artifact(&report_path);
    manifest.write(&cli.out.join("train_manifest.txt"))?;

    println!(
        "trained {} for {} epochs (best {}), validation epsilon {}",
        spec,
        report.epochs_run(),
        report.best_epoch,
        eps_text(ds.target_names(), &report.val_epsilon)
    );
    Ok(())
}

fn eps_text(names: &[String], eps: &[f64]) -> String {
    names
        .iter()
        .zip(eps)
        .map(|(n, e)| format!("{n}={e:.5}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn epsilon_csv(report: &EvalReport) -> String {
    let mut out = String::from("target,epsilon\n");
    for (n, e) in report.target_names.iter().zip(&report.epsilon) {
        out.push_str(&format!("{n},{e:?}\n"));
    }
    out
}

fn has_zone_column(path: &Path) -> Result<bool> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(text
        .lines()
        .next()
        .is_some_and(|h| h.split(',').any(|c| c.trim() == "zone")))
}

fn cmd_eval(cli: &Cli, model: &Path, data: &Path, trace_out: Option<&Path>) -> Result<()> {
    ensure_dir(&cli.out)?;
    let net = load_model(model)?;
    let report = if has_zone_column(data)? {
        let schema = if net.spec().input_dim == 3 {
            LogSchema::Case1
        } else {
            LogSchema::Case2
        };
        let ds = read_dataset_csv(data)?;
        check_dims(&net, &ds)?;
        evaluate_log(&net, &read_labeled_log(data, schema)?)?
    } else {
        let ds = read_dataset_csv(data)?;
        check_dims(&net, &ds)?;
        evaluate(&net, &ds)?
    };
    let trace_path = trace_out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cli.out.join("trace.csv"));
    write(&trace_path, &trace_csv(&report)?)?;
    let eps_path = cli.out.join("epsilon.csv");
    write(&eps_path, &epsilon_csv(&report))?;

    let mut manifest = Manifest::new("eval");
    manifest.set("argv", argv());
    manifest.set("model", model.display());
    manifest.set("data", data.display());
    manifest.artifact(&trace_path);
    manifest.artifact(&eps_path);
    if report.zone_summary.is_some() {
        let zpath = cli.out.join("zone_summary.csv");
        write(&zpath, &zone_summary_csv(&report)?)?;
        manifest.artifact(&zpath);
    }
    manifest.write(&cli.out.join("eval_manifest.txt"))?;
    println!("epsilon {}", eps_text(&report.target_names, &report.epsilon));
    Ok(())
}

fn check_dims(net: &vps::neuralnet::Network, ds: &vps::synthgen::Dataset) -> Result<()> {
    let spec = net.spec();
    if ds.input_dim() != spec.input_dim {
        return Err(Error::Dimension {
            context: "model inputs vs data columns".into(),
            expected: spec.input_dim,
            found: ds.input_dim(),
        });
    }
    if ds.target_dim() != spec.output_dim {
        return Err(Error::Dimension {
            context: "model outputs vs data target columns".into(),
            expected: spec.output_dim,
            found: ds.target_dim(),
        });
    }
    Ok(())
}

fn cmd_reproduce(cli: &Cli, cfg: &Config, case: Case, ov: &Overrides) -> Result<()> {
    let case_id = match case {
        Case::One => CaseId::One,
        Case::Two => CaseId::Two,
    };
    let dir: PathBuf = cli.out.join(case_id.to_string());
    ensure_dir(&dir)?;
    let rep = reproduce(case_id, cfg, ov, |spec, seed, run| match run.report() {
        Some(r) => eprintln!(
            "  [{}] seed {seed}: {} epochs, validation epsilon {:?}",
            spec.hidden_string(),
            r.epochs_run(),
            r.val_epsilon
        ),
        None => eprintln!("  [{}] seed {seed}: diverged", spec.hidden_string()),
    })?;
    write_reproduction(cli, cfg, ov, &dir, &rep)
}

fn write_reproduction(cli: &Cli, cfg: &Config, ov: &Overrides, dir: &Path, rep: &Reproduction) -> Result<()> {
    let mut manifest = Manifest::new("reproduce");
    manifest.set("argv", argv());
    manifest.set("case", rep.case);
    manifest.config(cfg);
    manifest.set(
        "seeds",
        rep.seeds
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    manifest.set(
        "corpus_seed",
        ov.corpus_seed.unwrap_or(cfg.reproduce.corpus_seed),
    );
    if let Some(e) = ov.epochs {
        manifest.set("epochs_override", e);
    }
    if let Some(n) = ov.n {
        manifest.set("n_override", n);
    }

    let corpus = dir.join("corpus.csv");
    write_dataset(&rep.corpus, &corpus)?;
    let sweep = dir.join("sweep.csv");
    write(&sweep, &rep.sweep.to_csv()?)?;
    let testlog = dir.join("testlog.csv");
    write_labeled_log(&rep.testlog, &testlog)?;
    for p in [&corpus, &corpus.with_extension("meta"), &sweep, &testlog] {
        manifest.artifact(p);
    }

    if let Some(row) = rep.sweep.rows.last() {
        for run in &row.runs {
            if let Some(net) = run.network() {
                let p = dir.join(format!("model_{}_seed{}.vpsm", row.spec_string().replace(',', "_"), run.seed));
                save_model(net, &p)?;
                manifest.artifact(&p);
            }
        }
    }
    if let Some((seed, report, _)) = rep.representative() {
        let trace = dir.join("trace.csv");
        write(&trace, &trace_csv(report)?)?;
        manifest.set("trace_seed", seed);
        manifest.artifact(&trace);
    }
    let zones = dir.join("zone_summary.csv");
    let mut text = String::from("zone,median_mean_abs_error\n");
    for z in &rep.zone_median.zones {
        text.push_str(&format!("{},{:?}\n", z.label, z.mean_abs_error));
    }
    write(&zones, &text)?;
    manifest.artifact(&zones);
    if let Some(arg) = rep.zone_median.argmax() {
        manifest.set("zone_argmax", arg);
    }
    manifest.write(&dir.join("manifest.txt"))?;

    print!("{}", rep.sweep.to_csv()?);
    if rep.case == CaseId::Two {
        if let Some(arg) = rep.zone_median.argmax() {
            println!("largest mean |error| zone: {arg}");
        }
    }
    println!("outputs in {}", cli.out.join(rep.case.to_string()).display());
    Ok(())
}
