//! Resumable pipeline state: a stage header, the pending spaces as
//! quad-basis blocks, and a snapshot of the store as JSON lines.

use std::path::Path;

use crate::error::{Error, Result};
use crate::io;
use crate::store::{parse_records, FunctionRecord};
use crate::vecfun::QuadSpace;

const RECORDS_MARKER: &str = "#records";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Checkpoint {
    /// Dimension of the pending spaces; `n - 1` once the run is finished.
    pub stage: usize,
    pub n: usize,
    pub pending: Vec<QuadSpace>,
    pub records: Vec<FunctionRecord>,
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "#checkpoint stage={} n={} pending={}\n",
            self.stage,
            self.n,
            self.pending.len()
        );
        out.push_str(&io::write_quad_bases(&self.pending));
        out.push_str(RECORDS_MARKER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.to_json());
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        let bad = |message: String| Error::Parse { line: 1, message };
        let mut fields = [None; 3];
        if !header.starts_with("#checkpoint") {
            return Err(bad("missing #checkpoint header".into()));
        }
        for tok in header.split_whitespace().skip(1) {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| bad(format!("bad field {tok:?}")))?;
            let v: usize = v.parse().map_err(|_| bad(format!("bad number {v:?}")))?;
            match k {
                "stage" => fields[0] = Some(v),
                "n" => fields[1] = Some(v),
                "pending" => fields[2] = Some(v),
                _ => return Err(bad(format!("unknown field {k:?}"))),
            }
        }
        let [Some(stage), Some(n), Some(count)] = fields else {
            return Err(bad("header needs stage, n and pending".into()));
        };
        let body: Vec<&str> = text.lines().skip(1).collect();
        let split = body
            .iter()
            .position(|l| l.trim() == RECORDS_MARKER)
            .ok_or_else(|| bad("missing #records section".into()))?;
        let spaces_text = body[..split].join("\n");
        let pending = io::parse(&spaces_text)
            .map_err(|e| match e {
                Error::Parse { line, message } => Error::Parse {
                    line: line + 1,
                    message,
                },
                e => e,
            })?
            .into_iter()
            .map(io::Item::into_space)
            .collect::<Result<Vec<_>>>()?;
        if pending.len() != count {
            return Err(bad(format!(
                "expected {count} pending spaces, found {}",
                pending.len()
            )));
        }
        let records_text = body[split + 1..].join("\n");
        let records = parse_records(records_text.as_bytes(), split + 2)?;
        Ok(Checkpoint {
            stage,
            n,
            pending,
            records,
        })
    }

    /// Writes atomically through a sibling temporary file.
    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, self.to_text()).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}
