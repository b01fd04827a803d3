use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use creditworks::cds::price_batch;
use creditworks::dataset::{
    class_balance, default_column_spec, drop_columns, encode, encode_features, filter_terminal,
    handle_missing, load_csv, read_column_spec, split, ClassBalance, DesignMatrix, EncodeReport,
    RawLoanTable, SplitPair, TerminalReport, DEFAULT_DROP_COLUMNS,
};
use creditworks::exposure::{ead, loan_records, recovery_rates, ExposureQuote};
use creditworks::features::{correlation_report, count_above, Scaler, ThresholdCount};
use creditworks::forest::{fit_forest, TreeStats};
use creditworks::logreg;
use creditworks::metrics::{report, roc, ClassificationReport};
use creditworks::model::TrainedModel;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ModelConfig, PipelineConfig};
use crate::error::{CliError, Context};

/// Environment variable that removes timestamps from every output.
pub const CANONICAL_ENV: &str = "CREDITWORKS_CANONICAL";

/// Resolved run settings shared by all commands.
pub struct Run {
    pub config: PipelineConfig,
    pub out_dir: PathBuf,
    pub model_path: PathBuf,
    pub canonical: bool,
}

impl Run {
    pub fn new(
        config: PipelineConfig,
        config_path: &Path,
        model: Option<PathBuf>,
        out: Option<PathBuf>,
    ) -> Self {
        let base = config_path.parent().unwrap_or(Path::new("."));
        let out_dir = out
            .or_else(|| config.output_dir.clone())
            .unwrap_or_else(|| base.join("out"));
        let model_path = model.unwrap_or_else(|| out_dir.join("model.json"));
        let canonical = std::env::var(CANONICAL_ENV).is_ok_and(|v| v == "1");
        Run {
            config,
            out_dir,
            model_path,
            canonical,
        }
    }

    fn output(&self, name: &str) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(&self.out_dir).map_err(|e| CliError::io(&self.out_dir, e))?;
        Ok(self.out_dir.join(name))
    }

    fn write_text(&self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        let path = self.output(name)?;
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    /// Pretty JSON with a `generated_at` stamp outside canonical mode.
    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut v = serde_json::to_value(value).expect("serializable report");
        if let (false, Value::Object(map)) = (self.canonical, &mut v) {
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs());
            map.insert("generated_at".into(), json!(secs));
        }
        let mut text = serde_json::to_string_pretty(&v).expect("serializable report");
        text.push('\n');
        self.write_text(name, &text)
    }

    fn csv_writer(&self, name: &str) -> Result<(csv::Writer<File>, PathBuf), CliError> {
        let path = self.output(name)?;
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        Ok((csv::Writer::from_writer(file), path))
    }

    fn load_model(&self) -> Result<TrainedModel, CliError> {
        let text = std::fs::read_to_string(&self.model_path)
            .map_err(|e| CliError::io(&self.model_path, e))?;
        TrainedModel::from_json(&text).map_err(|e| match e {
            creditworks::Error::Json(_) => CliError::Usage(format!(
                "{}: not a recognised model file: {e}",
                self.model_path.display()
            )),
            other => CliError::Core {
                context: self.model_path.display().to_string(),
                source: other,
            },
        })
    }
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::io(path, std::io::Error::other(e))
}

fn load_table(cfg: &PipelineConfig) -> Result<RawLoanTable, CliError> {
    let spec = match &cfg.column_spec {
        Some(p) => {
            let f = File::open(p).map_err(|e| CliError::io(p, e))?;
            read_column_spec(f).context(p.display())?
        }
        None => default_column_spec(),
    };
    let f = File::open(&cfg.input).map_err(|e| CliError::io(&cfg.input, e))?;
    load_csv(f, &spec).context(cfg.input.display())
}

fn drop_configured(cfg: &PipelineConfig, t: &RawLoanTable) -> Result<RawLoanTable, CliError> {
    let names: Vec<&str> = match &cfg.drop_columns {
        Some(list) => list.iter().map(String::as_str).collect(),
        None => DEFAULT_DROP_COLUMNS
            .iter()
            .copied()
            .filter(|c| t.column_index(c).is_some())
            .collect(),
    };
    drop_columns(t, &names).context("drop columns")
}

/// Terminal loans, cleaned and encoded.
struct Encoded {
    matrix: DesignMatrix,
    encode_report: EncodeReport,
    terminal: TerminalReport,
    balance: ClassBalance,
}

fn encoded(cfg: &PipelineConfig, table: &RawLoanTable) -> Result<Encoded, CliError> {
    let (t, terminal) = filter_terminal(table).context(cfg.input.display())?;
    let t = drop_configured(cfg, &t)?;
    let t = handle_missing(&t, cfg.missing_policy).context("missing values")?;
    let (matrix, encode_report) = encode(&t).context("encoding")?;
    let balance = class_balance(&matrix.y).context("class balance")?;
    Ok(Encoded {
        matrix,
        encode_report,
        terminal,
        balance,
    })
}

fn prepared(cfg: &PipelineConfig) -> Result<(Encoded, SplitPair), CliError> {
    let e = encoded(cfg, &load_table(cfg)?)?;
    let halves = split(&e.matrix, cfg.test_fraction, cfg.seed).context("train/test split")?;
    Ok((e, halves))
}

pub fn explore(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let cfg = &run.config;
    let table = load_table(cfg)?;
    let thresholds = cfg
        .thresholds
        .iter()
        .map(|t| count_above(&table, &t.column, t.above).context("threshold counts"))
        .collect::<Result<Vec<ThresholdCount>, _>>()?;
    let e = encoded(cfg, &table)?;
    let corr = correlation_report(&e.matrix).context("correlation")?;
    let summary = json!({
        "rows_loaded": table.row_count(),
        "missing_cells": table.missing_count(),
        "terminal": e.terminal,
        "class_balance": e.balance,
        "threshold_counts": thresholds,
        "encoded_columns": e.matrix.n_cols,
    });
    Ok(vec![
        run.write_text("correlation.csv", &corr.to_csv())?,
        run.write_json("summary.json", &summary)?,
    ])
}

fn write_matrix(run: &Run, name: &str, m: &DesignMatrix) -> Result<PathBuf, CliError> {
    let (mut w, path) = run.csv_writer(name)?;
    let mut header = m.columns.clone();
    header.push("target".into());
    w.write_record(&header).map_err(|e| csv_error(&path, e))?;
    for (row, y) in m.rows().zip(&m.y) {
        let mut rec: Vec<String> = row.iter().map(f64::to_string).collect();
        rec.push(y.to_string());
        w.write_record(&rec).map_err(|e| csv_error(&path, e))?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

pub fn prepare(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let (e, halves) = prepared(&run.config)?;
    let report = json!({
        "encoding": e.encode_report,
        "terminal": e.terminal,
        "class_balance": e.balance,
        "split": {
            "seed": halves.seed,
            "test_fraction": halves.test_fraction,
            "train_rows": halves.train.n_rows,
            "test_rows": halves.test.n_rows,
        },
    });
    Ok(vec![
        write_matrix(run, "train.csv", &halves.train)?,
        write_matrix(run, "test.csv", &halves.test)?,
        run.write_json("encode_report.json", &report)?,
    ])
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum TrainingLog {
    Logreg {
        iterations: usize,
        final_loss: f64,
        loss_history: Vec<(usize, f64)>,
    },
    Forest {
        n_trees: usize,
        trees: Vec<TreeStats>,
    },
}

pub fn train(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let cfg = &run.config;
    let (_, halves) = prepared(cfg)?;
    let columns = halves.train.columns.clone();
    let (model, log) = match &cfg.model {
        ModelConfig::Logreg(c) => {
            let c = logreg::LogisticConfig {
                seed: cfg.seed,
                ..c.clone()
            };
            let scaler = Scaler::fit(&halves.train);
            let scaled = scaler.apply(&halves.train).context("scaling")?;
            let model = logreg::fit(&scaled, &c).context("logistic regression")?;
            let log = TrainingLog::Logreg {
                iterations: model.training_history.last().map_or(0, |h| h.0),
                final_loss: model.training_history.last().map_or(f64::NAN, |h| h.1),
                loss_history: model.training_history.clone(),
            };
            (
                TrainedModel::Logistic {
                    columns,
                    model,
                    scaler,
                },
                log,
            )
        }
        ModelConfig::Forest(f) => {
            let forest =
                fit_forest(&halves.train, &f.to_config(cfg.seed)).context("random forest")?;
            let log = TrainingLog::Forest {
                n_trees: forest.n_trees(),
                trees: forest.tree_stats(),
            };
            (
                TrainedModel::Forest {
                    columns,
                    forest,
                    threshold: f.threshold,
                },
                log,
            )
        }
    };
    let log_name = format!("training_log_{}.json", model.kind());
    let text = model.to_json().context("model serialization")?;
    if let Some(dir) = run
        .model_path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
    {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(&run.model_path, text).map_err(|e| CliError::io(&run.model_path, e))?;
    Ok(vec![
        run.model_path.clone(),
        run.write_json(&log_name, &log)?,
    ])
}

#[derive(Serialize)]
struct EvaluationReport<'a> {
    model: &'a str,
    split: &'a str,
    threshold: f64,
    auc: f64,
    report: ClassificationReport,
}

pub fn evaluate(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let model = run.load_model()?;
    let (_, halves) = prepared(&run.config)?;
    let kind = model.kind();
    let mut written = Vec::new();
    let mut test_auc = f64::NAN;
    for (name, m) in [("train", &halves.train), ("test", &halves.test)] {
        let probs = model
            .predict_proba(m)
            .context(format!("{name} predictions"))?;
        let preds = model.classify(&probs);
        let rep = report(&m.y, &preds).context(format!("{name} report"))?;
        let curve = roc(&m.y, &probs).context(format!("{name} ROC"))?;
        let text = format!(
            "{kind} model, {name} split\n\n{}\nAUC: {:.4}\n\n{}",
            rep.render_text(),
            curve.auc,
            rep.confusion.render()
        );
        written.push(run.write_text(&format!("report_{kind}_{name}.txt"), &text)?);
        let full = EvaluationReport {
            model: kind,
            split: name,
            threshold: model.threshold(),
            auc: curve.auc,
            report: rep,
        };
        written.push(run.write_json(&format!("report_{kind}_{name}.json"), &full)?);
        if name == "test" {
            written.push(run.write_text(&format!("roc_{kind}.csv"), &curve.to_csv())?);
            test_auc = curve.auc;
        }
    }

    let path = run.output("comparison.json")?;
    let mut comparison: BTreeMap<String, f64> = match std::fs::read_to_string(&path) {
        Ok(s) => serde_json::from_str(&s).map_err(|e| {
            CliError::Usage(format!("{}: not a comparison file: {e}", path.display()))
        })?,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
        Err(e) => return Err(CliError::io(&path, e)),
    };
    comparison.insert(kind.to_string(), test_auc);
    let mut text = serde_json::to_string_pretty(&comparison).expect("map of floats");
    text.push('\n');
    written.push(run.write_text("comparison.json", &text)?);
    Ok(written)
}

/// Every labelled loan in the input with its model PD, in file order.
struct Scored {
    table: RawLoanTable,
    pds: Vec<f64>,
}

fn score_table(run: &Run, model: &TrainedModel) -> Result<Scored, CliError> {
    let cfg = &run.config;
    let table = handle_missing(&load_table(cfg)?, cfg.missing_policy).context("missing values")?;
    let features = encode_features(&drop_configured(cfg, &table)?).context("encoding")?;
    let aligned = features
        .align(model.columns())
        .context("aligning features to the model")?;
    let pds = model.predict_proba_aligned(aligned).context("scoring")?;
    Ok(Scored { table, pds })
}

fn row_ids(table: &RawLoanTable, id_column: &str) -> Vec<String> {
    let j = table.column_index(id_column);
    table
        .rows()
        .iter()
        .enumerate()
        .map(|(i, row)| match j.map(|j| &row[j]) {
            Some(creditworks::dataset::Cell::Text(s)) => s.clone(),
            Some(creditworks::dataset::Cell::Number(v)) => v.to_string(),
            _ => i.to_string(),
        })
        .collect()
}

pub fn score(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let model = run.load_model()?;
    let scored = score_table(run, &model)?;
    let ids = row_ids(&scored.table, &run.config.exposure.id);
    let classes = model.classify(&scored.pds);
    let (mut w, path) = run.csv_writer("scores.csv")?;
    w.write_record(["id", "pd", "prediction"])
        .map_err(|e| csv_error(&path, e))?;
    for ((id, pd), c) in ids.iter().zip(&scored.pds).zip(&classes) {
        w.write_record([id.clone(), pd.to_string(), c.to_string()])
            .map_err(|e| csv_error(&path, e))?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    Ok(vec![path])
}

/// Fails with a missing-exposure-column error before any other parsing.
fn check_exposure_header(cfg: &PipelineConfig) -> Result<(), CliError> {
    let mut reader = csv::Reader::from_path(&cfg.input).map_err(|e| csv_error(&cfg.input, e))?;
    let header = reader.headers().map_err(|e| csv_error(&cfg.input, e))?;
    let c = &cfg.exposure;
    for name in [
        &c.purpose,
        &c.status,
        &c.funded_amount,
        &c.principal_received,
        &c.interest_rate,
        &c.term,
        &c.recoveries,
    ] {
        if !header.iter().any(|h| h.trim() == name) {
            return Err(CliError::Core {
                context: cfg.input.display().to_string(),
                source: creditworks::Error::MissingExposureColumn(name.clone()),
            });
        }
    }
    Ok(())
}

pub fn price(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let cfg = &run.config;
    check_exposure_header(cfg)?;
    let model = run.load_model()?;
    let scored = score_table(run, &model)?;
    let records = loan_records(&scored.table, &cfg.exposure).context("exposure columns")?;
    let recovery = recovery_rates(&records).context("recovery rates")?;

    let quotes = records
        .iter()
        .zip(&scored.pds)
        .map(|(r, &pd)| {
            ExposureQuote::new(pd, ead(r).amount, recovery.rate_for(&r.purpose))
                .context(format!("loan {}", r.id))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let maturities: Vec<f64> = records
        .iter()
        .map(|r| r.remaining_months() / 12.0)
        .collect();
    let live: Vec<(ExposureQuote, f64)> = quotes
        .iter()
        .zip(&maturities)
        .filter(|(_, &t)| t > 0.0)
        .map(|(q, &t)| (*q, t))
        .collect();
    let mut spreads = price_batch(&live, cfg.risk_free_rate).into_iter();

    let (mut w, path) = run.csv_writer("pricing.csv")?;
    w.write_record([
        "id",
        "pd",
        "ead",
        "recovery_rate",
        "lgd",
        "el",
        "spread_bps",
    ])
    .map_err(|e| csv_error(&path, e))?;
    for ((r, q), &t) in records.iter().zip(&quotes).zip(&maturities) {
        let spread = if t > 0.0 {
            let quote = spreads
                .next()
                .expect("one quote per live loan")
                .context(format!("loan {}", r.id))?;
            quote.spread_bps.to_string()
        } else {
            String::new()
        };
        w.write_record([
            r.id.clone(),
            q.pd.to_string(),
            q.ead.to_string(),
            q.recovery_rate.to_string(),
            q.lgd_amount.to_string(),
            q.el.to_string(),
            spread,
        ])
        .map_err(|e| csv_error(&path, e))?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;

    let summary = json!({
        "charged_off_loans": records.iter().filter(|r| r.target == Some(1)).count(),
        "overall_rate": recovery.overall_rate,
        "by_purpose": recovery.entries,
        "risk_free_rate": cfg.risk_free_rate,
    });
    Ok(vec![path, run.write_json("recovery.json", &summary)?])
}
