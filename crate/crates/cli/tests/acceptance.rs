//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero when any
//! criterion fails.

use std::collections::HashMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use creditworks::cds::{fair_spread, CdsTerms};
use creditworks::dataset::{split, DesignMatrix};
use creditworks::exposure::{expected_loss, lgd, recovery_rates, LoanRecord};
use creditworks::features::Scaler;
use creditworks::forest::{fit_cart, fit_forest, ForestConfig, TreeParams};
use creditworks::logreg::{self, bce_loss, gradient, LogisticConfig, LogisticModel};
use creditworks::metrics::{harmonic_f1, report, roc};
use creditworks::{rng, synth};
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

/// (pd, EAD, LGD amount, EL)
const REFERENCE_LOANS: [(f64, f64, f64, f64); 4] = [
    (0.09, 18330.0, 16727.9, 1505.52),
    (0.41, 11222.7, 10241.8, 4199.14),
    (0.82, 20403.9, 18620.6, 15268.9),
    (0.97, 37936.2, 34620.6, 33581.9),
];

/// A charged-off loan whose EAD is `exposure` and whose recoveries leave
/// `loss` unrecovered.
fn charged_off(id: usize, exposure: f64, loss: f64) -> LoanRecord {
    LoanRecord {
        id: id.to_string(),
        purpose: "illustrative".into(),
        target: Some(1),
        funded_amount: exposure,
        principal_received: 0.0,
        note_rate: 0.0,
        term_months: 36.0,
        elapsed_months: 36.0,
        recoveries: exposure - loss,
    }
}

fn el_identity() -> Outcome {
    // the four rows share one department, so one pooled recovery rate
    let records: Vec<LoanRecord> = REFERENCE_LOANS
        .iter()
        .enumerate()
        .map(|(i, r)| charged_off(i, r.1, r.2))
        .collect();
    let rate = recovery_rates(&records).unwrap().rate_for("illustrative");
    let mut worst_el: f64 = 0.0;
    let mut worst_lgd: f64 = 0.0;
    for &(pd, ead, loss, el) in &REFERENCE_LOANS {
        worst_el = worst_el.max((expected_loss(pd, ead, rate) - el).abs());
        worst_lgd = worst_lgd.max((lgd(ead, rate) - loss).abs());
    }
    outcome(
        worst_el <= 0.05,
        format!("R = {rate:.7}, max |EL - reference| = {worst_el:.4} (tol 0.05), max |LGD - reference| = {worst_lgd:.4}"),
    )
}

fn recovery_consistency() -> Outcome {
    let mut ratios = Vec::new();
    for (i, &(_, ead, loss, _)) in REFERENCE_LOANS.iter().enumerate() {
        let rate = recovery_rates(&[charged_off(i, ead, loss)])
            .unwrap()
            .overall_rate;
        ratios.push(lgd(ead, rate) / ead);
    }
    let worst = ratios
        .iter()
        .map(|r| (r - 0.9126).abs())
        .fold(0.0, f64::max);
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.5}")).collect();
    outcome(
        worst <= 0.0005,
        format!(
            "LGD/EAD = [{}], max |. - 0.9126| = {worst:.5} (tol 0.0005)",
            shown.join(", ")
        ),
    )
}

fn f1_reproduction() -> Outcome {
    let f = harmonic_f1(0.65, 0.95).value;
    let rounded = (f * 100.0).round() / 100.0;
    outcome(
        rounded == 0.77 && !harmonic_f1(0.65, 0.95).degenerate,
        format!("f1(0.65, 0.95) = {f:.6} -> {rounded:.2}"),
    )
}

fn mann_whitney(y: &[u8], s: &[f64]) -> f64 {
    let (mut wins, mut pairs) = (0u64, 0u64);
    for (i, &yi) in y.iter().enumerate() {
        for (j, &yj) in y.iter().enumerate() {
            if yi == 1 && yj == 0 {
                pairs += 2;
                wins += match s[i].partial_cmp(&s[j]).unwrap() {
                    std::cmp::Ordering::Greater => 2,
                    std::cmp::Ordering::Equal => 1,
                    std::cmp::Ordering::Less => 0,
                };
            }
        }
    }
    wins as f64 / pairs as f64
}

fn uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng::index(r, 1 << 30) as f64 / (1u64 << 30) as f64
}

fn auc_oracle() -> Outcome {
    let mut r = rng::stream(2024, 4);
    let mut worst: f64 = 0.0;
    let mut tied = 0;
    for _ in 0..1000 {
        let n = 2 + rng::index(&mut r, 199);
        // a coarse score grid guarantees ties
        let levels = 1 + rng::index(&mut r, 20);
        let mut y: Vec<u8> = (0..n).map(|_| rng::index(&mut r, 2) as u8).collect();
        y[0] = 0;
        y[n - 1] = 1;
        let s: Vec<f64> = (0..n)
            .map(|_| rng::index(&mut r, levels + 1) as f64 / levels as f64)
            .collect();
        let mut sorted = s.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        tied += usize::from(sorted.len() < n);
        let auc = roc(&y, &s).unwrap().auc;
        worst = worst.max((auc - mann_whitney(&y, &s)).abs());
    }
    outcome(worst <= 1e-12, format!("1000 fixtures ({tied} with ties), max |trapezoid - Mann-Whitney| = {worst:.2e} (tol 1e-12)"))
}

fn gradient_check() -> Outcome {
    let mut r = rng::stream(2024, 5);
    let mut worst: f64 = 0.0;
    let h = 1e-5;
    for _ in 0..100 {
        let d = 1 + rng::index(&mut r, 10);
        let n = 2 + rng::index(&mut r, 49);
        let x = (0..n * d).map(|_| uniform(&mut r, -2.0, 2.0)).collect();
        let y = (0..n).map(|_| rng::index(&mut r, 2) as u8).collect();
        let m = DesignMatrix::new((0..d).map(|j| format!("x{j}")).collect(), x, y).unwrap();
        let mut model = LogisticModel::zeros(d);
        model.weights = (0..d).map(|_| uniform(&mut r, -1.0, 1.0)).collect();
        model.bias = uniform(&mut r, -1.0, 1.0);
        let (gw, gb) = gradient(&model, &m).unwrap();
        let analytic: Vec<f64> = gw.iter().copied().chain([gb]).collect();
        for (k, &analytic) in analytic.iter().enumerate() {
            let shifted = |delta: f64| {
                let mut p = model.clone();
                if k < d {
                    p.weights[k] += delta
                } else {
                    p.bias += delta
                }
                bce_loss(&p, &m).unwrap()
            };
            let numeric = (shifted(h) - shifted(-h)) / (2.0 * h);
            let rel = (analytic - numeric).abs()
                / analytic.abs().max(numeric.abs()).max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
        }
    }
    outcome(
        worst < 1e-5,
        format!("100 instances, max relative error = {worst:.2e} (tol 1e-5)"),
    )
}

/// Drops rows whose feature vector already appeared, so no two identical
/// inputs carry different labels.
fn without_duplicates(m: &DesignMatrix) -> DesignMatrix {
    let mut seen = HashMap::new();
    let keep: Vec<usize> = (0..m.n_rows)
        .filter(|&i| {
            let key: Vec<u64> = m.row(i).iter().map(|v| v.to_bits()).collect();
            seen.insert(key, ()).is_none()
        })
        .collect();
    m.select_rows(&keep)
}

fn cart_train_fit() -> Outcome {
    let mut fixtures = vec![
        DesignMatrix::new(
            vec!["a".into(), "b".into()],
            vec![0., 0., 0., 1., 1., 0., 1., 1.],
            vec![0, 1, 1, 0],
        )
        .unwrap(),
        synth::noisy_xor(500, 0.1, 6),
        synth::gaussian_blobs(500, 1.0, 6),
    ];
    let mut r = rng::stream(2024, 6);
    for _ in 0..20 {
        let n = 20 + rng::index(&mut r, 80);
        let x = (0..n * 3).map(|_| rng::index(&mut r, 5) as f64).collect();
        let mut y: Vec<u8> = (0..n).map(|_| rng::index(&mut r, 2) as u8).collect();
        y[0] = 0;
        y[1] = 1;
        fixtures.push(without_duplicates(
            &DesignMatrix::new(vec!["a".into(), "b".into(), "c".into()], x, y).unwrap(),
        ));
    }
    let mut all_perfect = true;
    let mut grid_ok = true;
    for (i, m) in fixtures.iter().enumerate() {
        if m.y.iter().all(|&v| v == m.y[0]) {
            continue;
        }
        let tree = fit_cart(m, &TreeParams::default(), &mut rng::stream(6, i as u64)).unwrap();
        let preds: Vec<u8> = m
            .rows()
            .map(|row| u8::from(tree.predict_proba(row).unwrap() >= 0.5))
            .collect();
        let rep = report(&m.y, &preds).unwrap();
        all_perfect &= rep.accuracy == 1.0;
        grid_ok &= rep.rounded_grid().iter().flatten().all(|&v| v == 1.0)
            && rep.render_text().contains("1.00");
    }
    outcome(
        all_perfect && grid_ok,
        format!(
            "{} fixtures, training accuracy 100%: {all_perfect}, report all 1.00: {grid_ok}",
            fixtures.len()
        ),
    )
}

fn logistic_auc(train: &DesignMatrix, test: &DesignMatrix) -> f64 {
    let scaler = Scaler::fit(train);
    let model = logreg::fit(&scaler.apply(train).unwrap(), &LogisticConfig::default()).unwrap();
    roc(
        &test.y,
        &model
            .predict_proba_matrix(&scaler.apply(test).unwrap())
            .unwrap(),
    )
    .unwrap()
    .auc
}

fn model_ordering() -> Outcome {
    let data = synth::noisy_xor(2000, 0.1, 7);
    let halves = split(&data, 0.3, 7).unwrap();
    let forest = fit_forest(
        &halves.train,
        &ForestConfig {
            seed: 7,
            ..Default::default()
        },
    )
    .unwrap();
    let rf = roc(
        &halves.test.y,
        &forest.predict_proba_matrix(&halves.test).unwrap(),
    )
    .unwrap()
    .auc;
    let lr = logistic_auc(&halves.train, &halves.test);
    outcome(
        rf - lr >= 0.05,
        format!(
            "forest AUC {rf:.4}, logistic AUC {lr:.4}, gap {:.4} (need >= 0.05)",
            rf - lr
        ),
    )
}

fn logistic_sanity() -> Outcome {
    let data = synth::gaussian_blobs(2000, 4.0, 8);
    let halves = split(&data, 0.3, 8).unwrap();
    let model = logreg::fit(&halves.train, &LogisticConfig::default()).unwrap();
    let probs = model.predict_proba_matrix(&halves.test).unwrap();
    let correct = probs
        .iter()
        .zip(&halves.test.y)
        .filter(|(&p, &y)| logreg::classify(p, 0.5) == y)
        .count();
    let acc = correct as f64 / halves.test.n_rows as f64;
    outcome(
        acc >= 0.99 && logreg::classify(0.5, 0.5) == 1,
        format!(
            "test accuracy {acc:.4} on {} points (need >= 0.99); p = 0.5 -> 1",
            halves.test.n_rows
        ),
    )
}

fn cds_properties() -> Outcome {
    let base = CdsTerms {
        notional: 1.0,
        maturity_years: 3.0,
        risk_free_rate: 0.03,
        pd: 0.3,
        recovery_rate: 0.4,
    };
    let spread = |t: CdsTerms| fair_spread(&t).unwrap();
    let zero_pd = spread(CdsTerms { pd: 0.0, ..base }).spread_per_annum;
    let full_recovery = spread(CdsTerms {
        recovery_rate: 1.0,
        ..base
    })
    .spread_per_annum;
    let grid: Vec<f64> = (1..=99)
        .map(|i| {
            spread(CdsTerms {
                pd: i as f64 / 100.0,
                ..base
            })
            .spread_per_annum
        })
        .collect();
    let increasing = grid.windows(2).all(|w| w[1] > w[0]);
    let mut worst_leg: f64 = 0.0;
    for i in 1..=99 {
        let q = spread(CdsTerms {
            pd: i as f64 / 100.0,
            notional: 25_000.0,
            ..base
        });
        worst_leg = worst_leg
            .max((q.premium_leg_value - q.protection_leg_value).abs() / q.protection_leg_value);
    }
    let short = spread(CdsTerms {
        maturity_years: 1.0,
        ..base
    })
    .spread_bps;
    let long = spread(CdsTerms {
        maturity_years: 3.0,
        ..base
    })
    .spread_bps;
    outcome(
        zero_pd == 0.0 && full_recovery == 0.0 && increasing && worst_leg <= 1e-9 && short > long,
        format!(
            "s(pd=0) = {zero_pd}, s(R=1) = {full_recovery}, increasing on 99-point grid: {increasing}, \
             max leg mismatch {worst_leg:.1e} (tol 1e-9), 1y {short:.2} bps > 3y {long:.2} bps"
        ),
    )
}

fn cli(dir: &Path, args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_creditworks"))
        .args(args)
        .current_dir(dir)
        .env("CREDITWORKS_CANONICAL", "1")
        .output()
        .is_ok_and(|o| o.status.success())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("loans.csv"), synth::loan_book_csv(600, 10)).unwrap();
    std::fs::write(d.join("logreg.json"), r#"{"input":"loans.csv","seed":10}"#).unwrap();
    std::fs::write(
        d.join("forest.json"),
        r#"{"input":"loans.csv","seed":10,"model":{"kind":"forest","n_trees":30}}"#,
    )
    .unwrap();
    let mut ran = true;
    for run in ["run1", "run2"] {
        for cfg in ["logreg.json", "forest.json"] {
            let model = format!("{run}/{cfg}");
            for cmd in ["train", "evaluate"] {
                ran &= cli(d, &[cmd, "--config", cfg, "--model", &model, "--out", run]);
            }
        }
    }
    let files = [
        "logreg.json",
        "forest.json",
        "training_log_logreg.json",
        "training_log_forest.json",
        "report_logreg_train.txt",
        "report_logreg_test.txt",
        "report_logreg_train.json",
        "report_logreg_test.json",
        "report_forest_train.txt",
        "report_forest_test.txt",
        "report_forest_train.json",
        "report_forest_test.json",
        "roc_logreg.csv",
        "roc_forest.csv",
        "comparison.json",
    ];
    let identical = files.iter().all(|f| {
        let a = std::fs::read(d.join("run1").join(f));
        let b = std::fs::read(d.join("run2").join(f));
        matches!((a, b), (Ok(a), Ok(b)) if a == b)
    });
    outcome(
        ran && identical,
        format!(
            "commands succeeded: {ran}, {} files byte-identical: {identical}",
            files.len()
        ),
    )
}

/// Informational: runs `explore` on a user-supplied accepted-loans file.
fn threshold_counts() -> Option<String> {
    let csv = std::env::var("CREDITWORKS_LENDING_CLUB_CSV").ok()?;
    let dir = tempfile::tempdir().ok()?;
    let csv = std::fs::canonicalize(csv).ok()?;
    let cfg = serde_json::json!({ "input": csv, "seed": 0 });
    std::fs::write(dir.path().join("config.json"), cfg.to_string()).ok()?;
    if !cli(dir.path(), &["explore", "--config", "config.json"]) {
        return Some("explore failed on the supplied file".into());
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/summary.json")).ok()?)
            .ok()?;
    let counts: Vec<String> = summary["threshold_counts"]
        .as_array()?
        .iter()
        .map(|c| {
            format!(
                "{} > {}: {}",
                c["column"].as_str().unwrap_or("?"),
                c["above"],
                c["count"]
            )
        })
        .collect();
    Some(format!(
        "{} (reference version: 339, 1211, 1299)",
        counts.join(", ")
    ))
}

fn main() {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check, u64); 10] = [
        ("reference loans: expected-loss identity", el_identity, 1),
        (
            "reference loans: shared recovery rate",
            recovery_consistency,
            1,
        ),
        ("f1 from precision 0.65 and recall 0.95", f1_reproduction, 1),
        ("trapezoid AUC equals Mann-Whitney", auc_oracle, 30),
        (
            "analytic gradient matches finite differences",
            gradient_check,
            30,
        ),
        (
            "unrestricted CART fits training data exactly",
            cart_train_fit,
            5,
        ),
        ("forest beats logistic on noisy XOR", model_ordering, 60),
        ("logistic separates Gaussian blobs", logistic_sanity, 30),
        ("CDS spread properties", cds_properties, 5),
        (
            "train and evaluate are byte-identical across runs",
            determinism,
            60,
        ),
    ];
    let mut failures = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(*limit);
        let pass = o.pass && in_time;
        failures += usize::from(!pass);
        println!(
            "{} {:>2}. {name}: {} [{:.2}s, limit {limit}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            elapsed.as_secs_f64()
        );
    }
    match threshold_counts() {
        Some(counts) => println!("INFO 11. accepted-loans threshold counts: {counts}"),
        None => println!("INFO 11. accepted-loans threshold counts: skipped (set CREDITWORKS_LENDING_CLUB_CSV to a Lending Club file)"),
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
