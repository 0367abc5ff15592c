//! Result files and their manifest.
//!
//! A run directory holds:
//!
//! * `population_<t>.csv`: `generation,[model,]theta_1..theta_k,weight,distance`
//! * `marginals.csv` (joint algorithms): `generation,model,probability`
//! * `histograms.csv`: weighted bin fractions per generation, model and parameter
//! * `summary.json`: run metadata
//! * `manifest.sha256`: `sha256sum`-compatible hashes of all of the above
//!
//! Every file is written to a temporary name and renamed into place.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::EngineError;
use crate::runner::ResultBundle;

pub const MANIFEST: &str = "manifest.sha256";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    /// `(file name, hex sha256)` in write order.
    pub entries: Vec<(String, String)>,
}

impl fmt::Display for Manifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, hash) in &self.entries {
            writeln!(f, "{hash}  {name}")?;
        }
        Ok(())
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), EngineError> {
    let tmp = dir.join(format!(".{name}.tmp"));
    let dest = dir.join(name);
    fs::write(&tmp, bytes).map_err(|e| EngineError::io(&tmp, e))?;
    fs::rename(&tmp, &dest).map_err(|e| EngineError::io(&dest, e))
}

/// Weighted fraction of mass in each of `bins` equal bins over `[lo, hi]`.
/// Values at `hi` fall in the last bin; values outside are clamped.
pub fn histogram(samples: &[(f64, f64)], lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let mut mass = vec![0.0; bins.max(1)];
    let width = (hi - lo) / mass.len() as f64;
    let total: f64 = samples.iter().map(|s| s.1).sum();
    for &(x, w) in samples {
        let k = if width > 0.0 {
            (((x - lo) / width).floor().max(0.0) as usize).min(mass.len() - 1)
        } else {
            0
        };
        mass[k] += w;
    }
    if total > 0.0 {
        mass.iter_mut().for_each(|m| *m /= total);
    }
    mass
}

fn csv_bytes(header: Vec<String>, rows: Vec<Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn check_bundle(bundle: &ResultBundle) -> Result<(), EngineError> {
    if bundle.populations.is_empty() {
        return Err(EngineError::InvalidBundle("no populations".into()));
    }
    for pop in &bundle.populations {
        if !pop.is_normalized() {
            return Err(EngineError::InvalidBundle(format!(
                "population {} is empty or its weights do not sum to 1",
                pop.index
            )));
        }
    }
    if bundle.metadata.total_simulations != bundle.metadata.simulations.iter().sum::<u64>() {
        return Err(EngineError::InvalidBundle(
            "simulation totals disagree".into(),
        ));
    }
    Ok(())
}

fn model_label(bundle: &ResultBundle, model: Option<usize>) -> String {
    let m = model.unwrap_or(0);
    bundle
        .model_names
        .get(m)
        .cloned()
        .unwrap_or_else(|| m.to_string())
}

fn population_csv(bundle: &ResultBundle, t: usize) -> Vec<u8> {
    let pop = &bundle.populations[t];
    let k = bundle.param_ranges.iter().map(Vec::len).max().unwrap_or(0);
    let mut header = vec!["generation".to_string()];
    if bundle.joint {
        header.push("model".into());
    }
    header.extend((1..=k).map(|i| format!("theta_{i}")));
    header.extend(["weight".into(), "distance".into()]);
    let rows = pop
        .particles
        .iter()
        .map(|p| {
            let mut row = vec![pop.index.to_string()];
            if bundle.joint {
                row.push(model_label(bundle, p.model));
            }
            row.extend((0..k).map(|i| p.theta.get(i).map_or(String::new(), f64::to_string)));
            row.push(p.weight.to_string());
            row.push(p.distance.to_string());
            row
        })
        .collect();
    csv_bytes(header, rows)
}

fn marginals_csv(bundle: &ResultBundle) -> Option<Vec<u8>> {
    let marginals = bundle.marginals.as_ref()?;
    let header = ["generation", "model", "probability"]
        .map(String::from)
        .to_vec();
    let mut rows = Vec::new();
    for (pop, probs) in bundle.populations.iter().zip(&marginals.per_generation) {
        for (m, p) in probs.iter().enumerate() {
            rows.push(vec![
                pop.index.to_string(),
                model_label(bundle, Some(m)),
                p.to_string(),
            ]);
        }
    }
    Some(csv_bytes(header, rows))
}

fn histograms_csv(bundle: &ResultBundle) -> Vec<u8> {
    let header = [
        "generation",
        "model",
        "parameter",
        "bin",
        "lo",
        "hi",
        "fraction",
    ]
    .map(String::from)
    .to_vec();
    let mut rows = Vec::new();
    for pop in &bundle.populations {
        for (m, ranges) in bundle.param_ranges.iter().enumerate() {
            let members: Vec<_> = pop
                .particles
                .iter()
                .filter(|p| p.model.unwrap_or(0) == m)
                .collect();
            if members.is_empty() {
                continue;
            }
            for (j, &(lo, hi)) in ranges.iter().enumerate() {
                let samples: Vec<(f64, f64)> =
                    members.iter().map(|p| (p.theta[j], p.weight)).collect();
                let fractions = histogram(&samples, lo, hi, bundle.bins);
                let width = (hi - lo) / fractions.len() as f64;
                for (b, f) in fractions.iter().enumerate() {
                    rows.push(vec![
                        pop.index.to_string(),
                        model_label(bundle, Some(m)),
                        format!("theta_{}", j + 1),
                        b.to_string(),
                        (lo + b as f64 * width).to_string(),
                        (lo + (b + 1) as f64 * width).to_string(),
                        f.to_string(),
                    ]);
                }
            }
        }
    }
    csv_bytes(header, rows)
}

/// JSON has no infinity; non-finite numbers become strings.
fn number(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

fn summary_json(bundle: &ResultBundle) -> Vec<u8> {
    let m = &bundle.metadata;
    let mut value = serde_json::to_value(m).expect("metadata serializes");
    value["epsilons"] = Value::Array(m.epsilons.iter().map(|&e| number(e)).collect());
    value["model_names"] = json!(bundle.model_names);
    if let Some(marginals) = &bundle.marginals {
        value["final_marginals"] = json!(marginals.last());
    }
    let mut bytes = serde_json::to_vec_pretty(&value).expect("summary serializes");
    bytes.push(b'\n');
    bytes
}

/// Writes every result file plus the manifest into `dir`, creating it if needed.
pub fn emit_outputs(bundle: &ResultBundle, dir: &Path) -> Result<Manifest, EngineError> {
    check_bundle(bundle)?;
    fs::create_dir_all(dir).map_err(|e| EngineError::io(dir, e))?;
    let mut files: Vec<(String, Vec<u8>)> = (0..bundle.populations.len())
        .map(|t| {
            (
                format!("population_{}.csv", bundle.populations[t].index),
                population_csv(bundle, t),
            )
        })
        .collect();
    if let Some(bytes) = marginals_csv(bundle) {
        files.push(("marginals.csv".into(), bytes));
    }
    files.push(("histograms.csv".into(), histograms_csv(bundle)));
    files.push(("summary.json".into(), summary_json(bundle)));

    let mut entries = Vec::with_capacity(files.len());
    for (name, bytes) in &files {
        write_atomic(dir, name, bytes)?;
        entries.push((name.clone(), sha256_hex(bytes)));
    }
    let manifest = Manifest { entries };
    write_atomic(dir, MANIFEST, manifest.to_string().as_bytes())?;
    Ok(manifest)
}

/// Re-hashes every file listed in `dir/manifest.sha256`.
pub fn verify_manifest(dir: &Path) -> Result<Manifest, EngineError> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| EngineError::io(&path, e))?;
    let mut entries = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let (hash, name) = line
            .split_once("  ")
            .ok_or_else(|| EngineError::Manifest(format!("malformed line `{line}`")))?;
        let file: PathBuf = dir.join(name);
        let bytes = fs::read(&file).map_err(|e| EngineError::io(&file, e))?;
        if sha256_hex(&bytes) != hash {
            return Err(EngineError::Manifest(format!(
                "{name} does not match its hash"
            )));
        }
        entries.push((name.to_string(), hash.to_string()));
    }
    Ok(Manifest { entries })
}

/// Persists what is known about a failed run next to where outputs would go.
pub fn write_failure(dir: &Path, error: &EngineError) -> Result<(), EngineError> {
    fs::create_dir_all(dir).map_err(|e| EngineError::io(dir, e))?;
    let mut detail = json!({
        "error": error.to_string(),
        "exit_code": error.exit_code(),
    });
    if let EngineError::Sampler(abc_core::Error::BudgetExhausted {
        generation,
        accepted,
        target,
        attempts,
    }) = error
    {
        detail["budget_exhausted"] = json!({
            "generation": generation,
            "accepted": accepted,
            "target": target,
            "attempts": attempts,
        });
    }
    let mut bytes = serde_json::to_vec_pretty(&detail).expect("failure serializes");
    bytes.push(b'\n');
    write_atomic(dir, "error.json", &bytes)
}
