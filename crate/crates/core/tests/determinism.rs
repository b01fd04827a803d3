//! The same seed gives bit-identical results whatever the thread count.

use creditworks::dataset::split;
use creditworks::features::correlation_report;
use creditworks::forest::{fit_forest, ForestConfig};
use creditworks::logreg::{fit, LogisticConfig};
use creditworks::model::TrainedModel;
use creditworks::synth;

fn run_pipeline() -> (String, String, Vec<f64>, String) {
    let data = synth::noisy_xor(1500, 0.2, 3);
    let halves = split(&data, 0.3, 3).unwrap();
    let forest = fit_forest(
        &halves.train,
        &ForestConfig {
            n_trees: 20,
            seed: 3,
            ..Default::default()
        },
    )
    .unwrap();
    let probs = forest.predict_proba_matrix(&halves.test).unwrap();
    let forest_json = TrainedModel::Forest {
        columns: data.columns.clone(),
        forest,
        threshold: 0.5,
    }
    .to_json()
    .unwrap();
    let logit = fit(
        &halves.train,
        &LogisticConfig {
            max_iters: 200,
            ..Default::default()
        },
    )
    .unwrap();
    let logit_json = serde_json::to_string(&logit).unwrap();
    let corr = correlation_report(&data).unwrap().to_csv();
    (forest_json, logit_json, probs, corr)
}

#[test]
fn repeated_runs_are_identical() {
    assert_eq!(run_pipeline(), run_pipeline());
}

#[cfg(feature = "parallel")]
#[test]
fn one_thread_matches_many_threads() {
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let many = rayon::ThreadPoolBuilder::new()
        .num_threads(8)
        .build()
        .unwrap();
    let a = single.install(run_pipeline);
    let b = many.install(run_pipeline);
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
    assert!(a
        .2
        .iter()
        .zip(&b.2)
        .all(|(x, y)| x.to_bits() == y.to_bits()));
    assert_eq!(a.3, b.3);
}
