//! Function records and the ortho-derivative deduplication store.
//!
//! Records are stored one JSON object per line. A record's `id` is the
//! SHA-256 of its canonical representation string, so identical functions
//! always get the same id.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::orthoderiv::{od_signature, ODSignature};
use crate::quadspace::QuadForm;
use crate::vecfun::{QuadSpace, VectorialFunction};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Representation {
    ValueTable { values: Vec<u64> },
    QuadBasis { basis: Vec<String> },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labels {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub od: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub od_signature: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub j2: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub profile: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    BentPipeline,
    InputPipeline,
    Imported,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stage: Option<String>,
}

impl Provenance {
    pub fn imported() -> Self {
        Provenance {
            method: Method::Imported,
            seed: None,
            stage: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionRecord {
    pub id: String,
    pub n: usize,
    pub m: usize,
    pub representation: Representation,
    pub labels: Labels,
    pub provenance: Provenance,
}

fn canonical_string(n: usize, m: usize, repr: &Representation) -> String {
    let mut s = String::new();
    match repr {
        Representation::ValueTable { values } => {
            write!(s, "vt:{n}:{m}:").unwrap();
            for (i, v) in values.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                write!(s, "{v}").unwrap();
            }
        }
        Representation::QuadBasis { basis } => {
            write!(s, "qb:{n}:{}", basis.join(",")).unwrap();
        }
    }
    s
}

impl FunctionRecord {
    pub fn from_function(f: &VectorialFunction, provenance: Provenance) -> Self {
        let representation = Representation::ValueTable {
            values: f.values().to_vec(),
        };
        FunctionRecord {
            id: hex::encode(Sha256::digest(
                canonical_string(f.n(), f.m(), &representation).as_bytes(),
            )),
            n: f.n(),
            m: f.m(),
            representation,
            labels: Labels::default(),
            provenance,
        }
    }

    pub fn from_space(s: &QuadSpace, provenance: Provenance) -> Self {
        let representation = Representation::QuadBasis {
            basis: s.to_hex_lines(),
        };
        FunctionRecord {
            id: hex::encode(Sha256::digest(
                canonical_string(s.n(), s.dim(), &representation).as_bytes(),
            )),
            n: s.n(),
            m: s.dim(),
            representation,
            labels: Labels::default(),
            provenance,
        }
    }

    /// Recomputes the id from the representation.
    pub fn expected_id(&self) -> String {
        hex::encode(Sha256::digest(
            canonical_string(self.n, self.m, &self.representation).as_bytes(),
        ))
    }

    pub fn function(&self) -> Result<VectorialFunction> {
        match &self.representation {
            Representation::ValueTable { values } => {
                VectorialFunction::new(self.n, self.m, values.clone())
            }
            Representation::QuadBasis { basis } => {
                let forms = basis
                    .iter()
                    .map(|h| {
                        let c = u64::from_str_radix(h, 16)
                            .map_err(|_| Error::Invalid(format!("bad hex mask {h:?}")))?;
                        QuadForm::new(self.n, c)
                    })
                    .collect::<Result<Vec<_>>>()?;
                QuadSpace::new(self.n, &forms)?.to_function()
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }

    pub fn from_json(line: &str) -> Result<Self> {
        serde_json::from_str(line).map_err(|e| Error::Invalid(e.to_string()))
    }
}

/// Reads a JSON-lines record file; errors name the line.
pub fn read_records(path: &Path) -> Result<Vec<FunctionRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_records(BufReader::new(file), 0)
}

pub(crate) fn parse_records(
    reader: impl BufRead,
    first_line: usize,
) -> Result<Vec<FunctionRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Invalid(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = FunctionRecord::from_json(&line).map_err(|e| Error::Parse {
            line: first_line + i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn append_records(path: &Path, records: &[FunctionRecord]) -> Result<()> {
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut text = String::new();
    for r in records {
        text.push_str(&r.to_json());
        text.push('\n');
    }
    file.write_all(text.as_bytes())
        .map_err(|e| Error::io(path, e))
}

#[derive(Clone, Debug)]
struct Entry {
    signature: ODSignature,
    record: FunctionRecord,
}

/// Records keyed by ortho-derivative label, one per distinct full
/// signature. Inserts are atomic and idempotent.
#[derive(Debug, Default)]
pub struct DedupStore {
    inner: Mutex<BTreeMap<String, Vec<Entry>>>,
}

impl DedupStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts `f` unless its signature is already present. Returns whether
    /// a new class was created.
    pub fn insert(&self, f: &VectorialFunction, provenance: Provenance) -> Result<bool> {
        let sig = od_signature(f)?;
        let mut record = FunctionRecord::from_function(f, provenance);
        record.labels.od = Some(sig.label());
        record.labels.od_signature = Some(sig.canonical_string());
        Ok(self.insert_signed(sig, record))
    }

    /// Inserts a record whose signature is already known.
    pub fn insert_signed(&self, signature: ODSignature, record: FunctionRecord) -> bool {
        let label = signature.label();
        let mut map = self.inner.lock().expect("store lock");
        let bucket = map.entry(label).or_default();
        if bucket.iter().any(|e| e.signature == signature) {
            return false;
        }
        bucket.push(Entry { signature, record });
        true
    }

    pub fn contains(&self, signature: &ODSignature) -> bool {
        let map = self.inner.lock().expect("store lock");
        map.get(&signature.label())
            .is_some_and(|b| b.iter().any(|e| &e.signature == signature))
    }

    pub fn len(&self) -> usize {
        self.inner
            .lock()
            .expect("store lock")
            .values()
            .map(Vec::len)
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Records in label order.
    pub fn records(&self) -> Vec<FunctionRecord> {
        let map = self.inner.lock().expect("store lock");
        map.values().flatten().map(|e| e.record.clone()).collect()
    }

    pub fn signatures(&self) -> Vec<ODSignature> {
        let map = self.inner.lock().expect("store lock");
        map.values()
            .flatten()
            .map(|e| e.signature.clone())
            .collect()
    }

    /// Adds records carrying an `od_signature` label; others are
    /// recomputed from their representation.
    pub fn extend_from_records(&self, records: Vec<FunctionRecord>) -> Result<usize> {
        let mut added = 0;
        for mut r in records {
            let sig = match &r.labels.od_signature {
                Some(s) => ODSignature::parse(s)?,
                None => {
                    let sig = od_signature(&r.function()?)?;
                    r.labels.od = Some(sig.label());
                    r.labels.od_signature = Some(sig.canonical_string());
                    sig
                }
            };
            if self.insert_signed(sig, r) {
                added += 1;
            }
        }
        Ok(added)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let store = DedupStore::new();
        if path.exists() {
            store.extend_from_records(read_records(path)?)?;
        }
        Ok(store)
    }

    /// Rewrites `path` with exactly the current records.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = String::new();
        self.write_jsonl(&mut text);
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub(crate) fn write_jsonl(&self, out: &mut String) {
        for r in self.records() {
            out.push_str(&r.to_json());
            out.push('\n');
        }
    }
}
