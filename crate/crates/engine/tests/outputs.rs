use std::fs;

use abc_engine::{parse_config, run, run_to_dir, verify_manifest, RunConfig};

const JOINT: &str = r#"
algorithm = "smc-joint"
n = 200
seed = 12
schedule = [2.0, 1.0, 0.5]

[data]
times = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0]
synthetic = { model = 0, theta = [1.0], seed = 2024 }

[[models]]
name = "slow"
simulator = "decay"
prior = [{ uniform = [0.0, 1.5] }]
kernel_sd = [0.1]
options = { step = 0.01 }

[[models]]
name = "fast"
simulator = "decay"
prior = [{ uniform = [0.5, 5.0] }]
kernel_sd = [0.1]
options = { step = 0.01 }
"#;

fn joint() -> RunConfig {
    parse_config(JOINT).unwrap()
}

#[test]
fn joint_bundle_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let (bundle, manifest) = run_to_dir(&joint(), tmp.path()).unwrap();
    let names: Vec<&str> = manifest.entries.iter().map(|e| e.0.as_str()).collect();
    assert_eq!(
        names,
        [
            "population_1.csv",
            "population_2.csv",
            "population_3.csv",
            "marginals.csv",
            "histograms.csv",
            "summary.json"
        ]
    );
    assert_eq!(verify_manifest(tmp.path()).unwrap(), manifest);

    let pop = fs::read_to_string(tmp.path().join("population_3.csv")).unwrap();
    let mut lines = pop.lines();
    assert_eq!(
        lines.next(),
        Some("generation,model,theta_1,weight,distance")
    );
    let mut total = 0.0;
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[0], "3");
        assert!(cols[1] == "slow" || cols[1] == "fast");
        assert!(cols[4].parse::<f64>().unwrap() <= 0.5);
        total += cols[3].parse::<f64>().unwrap();
    }
    assert!((total - 1.0).abs() < 1e-9);

    let marginals = bundle.marginals.unwrap();
    for m in &marginals.per_generation {
        assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
    let table = fs::read_to_string(tmp.path().join("marginals.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 3 * 2);

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["algorithm"], "smc-joint");
    assert_eq!(summary["model_names"], serde_json::json!(["slow", "fast"]));
    assert_eq!(
        summary["total_simulations"].as_u64().unwrap(),
        bundle.metadata.simulations.iter().sum::<u64>()
    );
}

#[test]
fn histograms_sum_to_one_per_model_and_generation() {
    let tmp = tempfile::tempdir().unwrap();
    let (bundle, _) = run_to_dir(&joint(), tmp.path()).unwrap();
    let text = fs::read_to_string(tmp.path().join("histograms.csv")).unwrap();
    let mut sums = std::collections::BTreeMap::<(String, String), f64>::new();
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        *sums.entry((cols[0].into(), cols[1].into())).or_default() +=
            cols[6].parse::<f64>().unwrap();
    }
    assert!(!sums.is_empty());
    for ((generation, model), s) in sums {
        assert!(
            (s - 1.0).abs() < 1e-9,
            "generation {generation} model {model}: {s}"
        );
    }
    assert_eq!(bundle.bins, 10);
}

#[test]
fn same_config_same_bytes_different_seed_differs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let config = joint();
    let (_, ma) = run_to_dir(&config, a.path()).unwrap();
    let (_, mb) = run_to_dir(&config, b.path()).unwrap();
    let population = |m: &abc_engine::Manifest| {
        m.entries
            .iter()
            .filter(|e| e.0.starts_with("population_"))
            .cloned()
            .collect::<Vec<_>>()
    };
    assert_eq!(population(&ma), population(&mb));

    let mut other = config.clone();
    other.seed += 1;
    let (_, mc) = run_to_dir(&other, c.path()).unwrap();
    assert_ne!(population(&ma), population(&mc));
}

#[test]
fn six_particle_joint_rejection_marginals() {
    let mut config = joint();
    config.algorithm = abc_engine::Algorithm::RejectJoint;
    config.schedule = None;
    config.epsilon = Some(1.0);
    config.n = 6;
    let bundle = run(&config).unwrap();
    let pop = &bundle.populations[0];
    let marginals = bundle.marginals.unwrap();
    for m in 0..2 {
        let count = pop.particles.iter().filter(|p| p.model == Some(m)).count();
        assert_eq!(marginals.per_generation[0][m], count as f64 / 6.0);
    }
    assert!(pop.particles.iter().all(|p| p.weight == 1.0 / 6.0));
}

#[test]
fn rejection_at_infinite_tolerance_accepts_everything() {
    let mut config = joint();
    config.algorithm = abc_engine::Algorithm::Reject;
    config.schedule = None;
    config.models.truncate(1);
    config.epsilon = Some(f64::INFINITY);
    config.n = 50;
    let bundle = run(&config).unwrap();
    assert_eq!(bundle.metadata.attempts, vec![50]);
    assert_eq!(bundle.metadata.epsilons, vec![f64::INFINITY]);

    let tmp = tempfile::tempdir().unwrap();
    abc_engine::emit_outputs(&bundle, tmp.path()).unwrap();
    let summary = fs::read_to_string(tmp.path().join("summary.json")).unwrap();
    assert!(summary.contains("\"inf\""));
}

#[test]
fn unnormalized_bundle_is_refused() {
    let mut bundle = run(&joint()).unwrap();
    bundle.populations[1].particles[0].weight += 0.5;
    let tmp = tempfile::tempdir().unwrap();
    assert!(abc_engine::emit_outputs(&bundle, tmp.path()).is_err());
    assert!(!tmp.path().join("manifest.sha256").exists());
}
