//! Storage unit: trained parameter records as JSON, written atomically, and
//! checksummed archives of record sets.
//!
//! Every float is stored as the shortest decimal string that parses back to
//! the same `f64`, so a load returns bit-identical values.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{QbmError, Result};
use crate::ising::{self, IsingModel};
use crate::qaoa::{CostHamiltonian, QaoaParams};
use crate::qsim::NoiseModel;

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// Optimal parameters of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamRecord {
    pub n_qubits: usize,
    pub p: usize,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub b: Vec<f64>,
    /// Upper-triangular couplings in pair order.
    pub w: Vec<Coupling>,
    pub noise: NoiseModel,
    pub seed: u64,
    pub final_loss: f64,
    pub created_at: String,
}

impl ParamRecord {
    pub fn new(
        h1: &CostHamiltonian,
        params: &QaoaParams,
        noise: NoiseModel,
        seed: u64,
        final_loss: f64,
        created_at: impl Into<String>,
    ) -> Self {
        let model = h1.model();
        Self {
            n_qubits: model.n(),
            p: params.p(),
            beta: params.beta().to_vec(),
            gamma: params.gamma().to_vec(),
            b: model.biases().to_vec(),
            w: ising::pairs(model.n())
                .zip(model.couplings())
                .map(|((i, j), &value)| Coupling { i, j, value })
                .collect(),
            noise,
            seed,
            final_loss,
            created_at: created_at.into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dim = |expected: usize, got: usize| {
            if expected == got {
                Ok(())
            } else {
                Err(QbmError::DimensionMismatch { expected, got })
            }
        };
        if self.p == 0 {
            return Err(QbmError::Config("p must be at least 1".into()));
        }
        dim(self.p, self.beta.len())?;
        dim(self.p, self.gamma.len())?;
        dim(self.n_qubits, self.b.len())?;
        dim(ising::pair_count(self.n_qubits), self.w.len())?;
        for (c, (i, j)) in self.w.iter().zip(ising::pairs(self.n_qubits)) {
            if (c.i, c.j) != (i, j) {
                return Err(QbmError::Config(format!(
                    "coupling ({}, {}) out of order, expected ({i}, {j})",
                    c.i, c.j
                )));
            }
        }
        if !(self.final_loss >= 0.0 && self.final_loss.is_finite()) {
            return Err(QbmError::Config(format!(
                "final loss {} is not a finite nonnegative number",
                self.final_loss
            )));
        }
        NoiseModel::new(self.noise.p1, self.noise.p2)?;
        Ok(())
    }

    pub fn hamiltonian(&self) -> Result<CostHamiltonian> {
        let model = IsingModel::new(self.b.clone(), self.w.iter().map(|c| c.value).collect())?;
        CostHamiltonian::new(model)
    }

    pub fn params(&self) -> Result<QaoaParams> {
        QaoaParams::new(self.beta.clone(), self.gamma.clone())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&Wire::from(self)).expect("wire form serializes");
        s.push('\n');
        s
    }

    /// Parses a record; `path` only labels errors.
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let malformed = |reason: String| QbmError::MalformedRecord {
            path: path.to_path_buf(),
            reason,
        };
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
        let version = value
            .get("schema_version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| malformed("missing schema_version".into()))?;
        if version != u64::from(SCHEMA_VERSION) {
            return Err(QbmError::SchemaVersion {
                found: u32::try_from(version).unwrap_or(u32::MAX),
                expected: SCHEMA_VERSION,
            });
        }
        let wire: Wire = serde_json::from_value(value).map_err(|e| malformed(e.to_string()))?;
        let record = wire.into_record().map_err(malformed)?;
        record.validate()?;
        Ok(record)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Wire {
    schema_version: u32,
    n_qubits: usize,
    p: usize,
    beta: Vec<String>,
    gamma: Vec<String>,
    b: Vec<String>,
    w: Vec<WireCoupling>,
    noise: WireNoise,
    seed: String,
    final_loss: String,
    created_at: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireCoupling {
    i: usize,
    j: usize,
    value: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireNoise {
    p1: String,
    p2: String,
}

/// Shortest round-trip decimal form.
pub fn encode_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn decode_f64(s: &str) -> std::result::Result<f64, String> {
    s.parse::<f64>().map_err(|e| format!("{s:?}: {e}"))
}

fn encode_all(xs: &[f64]) -> Vec<String> {
    xs.iter().map(|&x| encode_f64(x)).collect()
}

fn decode_all(xs: &[String]) -> std::result::Result<Vec<f64>, String> {
    xs.iter().map(|s| decode_f64(s)).collect()
}

impl From<&ParamRecord> for Wire {
    fn from(r: &ParamRecord) -> Self {
        Wire {
            schema_version: SCHEMA_VERSION,
            n_qubits: r.n_qubits,
            p: r.p,
            beta: encode_all(&r.beta),
            gamma: encode_all(&r.gamma),
            b: encode_all(&r.b),
            w: r
                .w
                .iter()
                .map(|c| WireCoupling {
                    i: c.i,
                    j: c.j,
                    value: encode_f64(c.value),
                })
                .collect(),
            noise: WireNoise {
                p1: encode_f64(r.noise.p1),
                p2: encode_f64(r.noise.p2),
            },
            seed: r.seed.to_string(),
            final_loss: encode_f64(r.final_loss),
            created_at: r.created_at.clone(),
        }
    }
}

impl Wire {
    fn into_record(self) -> std::result::Result<ParamRecord, String> {
        Ok(ParamRecord {
            n_qubits: self.n_qubits,
            p: self.p,
            beta: decode_all(&self.beta)?,
            gamma: decode_all(&self.gamma)?,
            b: decode_all(&self.b)?,
            w: self
                .w
                .into_iter()
                .map(|c| {
                    Ok(Coupling {
                        i: c.i,
                        j: c.j,
                        value: decode_f64(&c.value)?,
                    })
                })
                .collect::<std::result::Result<_, String>>()?,
            noise: NoiseModel {
                p1: decode_f64(&self.noise.p1)?,
                p2: decode_f64(&self.noise.p2)?,
            },
            seed: self
                .seed
                .parse()
                .map_err(|e| format!("seed {:?}: {e}", self.seed))?,
            final_loss: decode_f64(&self.final_loss)?,
            created_at: self.created_at,
        })
    }
}

/// Writes `bytes` to a sibling temp file, syncs it, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| QbmError::Config(format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

pub fn save(record: &ParamRecord, path: &Path) -> Result<()> {
    record.validate()?;
    write_atomic(path, record.to_json().as_bytes())
}

pub fn load(path: &Path) -> Result<ParamRecord> {
    let text = fs::read_to_string(path)?;
    ParamRecord::from_json(&text, path)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema_version: u32,
    pub records: Vec<ManifestEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// File name of the `k`-th record in an archive.
pub fn record_file_name(k: usize) -> String {
    format!("record_{k:03}.json")
}

/// Saves every record into `dir` and writes a manifest of their checksums.
pub fn archive_set(records: &[ParamRecord], dir: &Path) -> Result<Manifest> {
    if records.is_empty() {
        return Err(QbmError::EmptyArchive);
    }
    fs::create_dir_all(dir)?;
    let mut entries = Vec::with_capacity(records.len());
    for (k, record) in records.iter().enumerate() {
        record.validate()?;
        let file = record_file_name(k);
        let bytes = record.to_json();
        write_atomic(&dir.join(&file), bytes.as_bytes())?;
        entries.push(ManifestEntry {
            file,
            sha256: sha256_hex(bytes.as_bytes()),
        });
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        records: entries,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())?;
    Ok(manifest)
}

/// Recomputes every checksum listed in the manifest of `dir`; the first
/// mismatch is reported with its path.
pub fn verify_archive(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let manifest: Manifest =
        serde_json::from_str(&fs::read_to_string(&path)?).map_err(|e| QbmError::MalformedRecord {
            path: path.clone(),
            reason: e.to_string(),
        })?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(QbmError::SchemaVersion {
            found: manifest.schema_version,
            expected: SCHEMA_VERSION,
        });
    }
    if manifest.records.is_empty() {
        return Err(QbmError::EmptyArchive);
    }
    for entry in &manifest.records {
        let file = dir.join(&entry.file);
        let bytes = fs::read(&file)?;
        if sha256_hex(&bytes) != entry.sha256 {
            return Err(QbmError::ChecksumMismatch(file));
        }
    }
    Ok(manifest)
}

/// Loads every record of a verified archive, in manifest order.
pub fn load_archive(dir: &Path) -> Result<Vec<ParamRecord>> {
    verify_archive(dir)?
        .records
        .iter()
        .map(|e| load(&dir.join(&e.file)))
        .collect()
}
