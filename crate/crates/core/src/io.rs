//! Text formats for functions and spaces of forms.
//!
//! Value tables: a header `#vt n=<n> m=<m>` followed by one function per
//! line, `2^n` whitespace-separated decimal values with `x` in increasing
//! integer order. Quad bases: a header `#qb n=<n> dim=<d>` followed by `d`
//! lines, each a hexadecimal mask over the colex monomial order. Blank lines
//! are ignored; a file may mix any number of blocks of either kind.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::quadspace::{num_monomials, QuadForm};
use crate::vecfun::{comp_space, QuadSpace, VectorialFunction};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    Table(VectorialFunction),
    Space(QuadSpace),
}

impl Item {
    /// The function itself, or the homogeneous function of a space.
    pub fn into_function(self) -> Result<VectorialFunction> {
        match self {
            Item::Table(f) => Ok(f),
            Item::Space(s) => s.to_function(),
        }
    }

    /// The component space; value tables must be quadratic.
    pub fn into_space(self) -> Result<QuadSpace> {
        match self {
            Item::Table(f) => comp_space(&f),
            Item::Space(s) => Ok(s),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    ValueTable,
    QuadBasis,
}

enum Block {
    None,
    Table {
        n: usize,
        m: usize,
    },
    Space {
        n: usize,
        left: usize,
        forms: Vec<QuadForm>,
    },
}

fn parse_header(line: &str, lineno: usize, keys: [&str; 2]) -> Result<[usize; 2]> {
    let err = |message: String| Error::Parse {
        line: lineno,
        message,
    };
    let mut out = [None, None];
    for tok in line.split_whitespace().skip(1) {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| err(format!("expected key=value, got {tok:?}")))?;
        let v: usize = v.parse().map_err(|_| err(format!("bad number {v:?}")))?;
        match keys.iter().position(|&x| x == k) {
            Some(i) => out[i] = Some(v),
            None => return Err(err(format!("unknown header key {k:?}"))),
        }
    }
    match out {
        [Some(a), Some(b)] => Ok([a, b]),
        _ => Err(err(format!("header needs {} and {}", keys[0], keys[1]))),
    }
}

/// Parses every block in `text`, in order.
pub fn parse(text: &str) -> Result<Vec<Item>> {
    let mut items = Vec::new();
    let mut block = Block::None;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: lineno,
            message,
        };
        if let Block::Space { n, left: 0, forms } = &block {
            items.push(Item::Space(QuadSpace::new(*n, forms)?));
            block = Block::None;
        }
        if line.starts_with("#vt") {
            if matches!(block, Block::Space { .. }) {
                return Err(err("quad basis block ended early".into()));
            }
            let [n, m] = parse_header(line, lineno, ["n", "m"])?;
            if n > crate::vecfun::MAX_INPUT_BITS || m > crate::vecfun::MAX_OUTPUT_BITS || m == 0 {
                return Err(err(format!("unsupported sizes n={n} m={m}")));
            }
            block = Block::Table { n, m };
        } else if line.starts_with("#qb") {
            if matches!(block, Block::Space { .. }) {
                return Err(err("quad basis block ended early".into()));
            }
            let [n, d] = parse_header(line, lineno, ["n", "dim"])?;
            if n > crate::quadspace::MAX_VARS || d > num_monomials(n) {
                return Err(err(format!("unsupported sizes n={n} dim={d}")));
            }
            block = Block::Space {
                n,
                left: d,
                forms: Vec::with_capacity(d),
            };
        } else if line.starts_with('#') {
            return Err(err(format!("unknown header {line:?}")));
        } else {
            match &mut block {
                Block::None => return Err(err("data before any header".into())),
                Block::Table { n, m } => {
                    let values: Vec<u64> = line
                        .split_whitespace()
                        .map(|t| {
                            t.parse::<u64>()
                                .map_err(|_| err(format!("bad value {t:?}")))
                        })
                        .collect::<Result<_>>()?;
                    if values.len() != 1 << *n {
                        return Err(err(format!(
                            "expected 2^{n} = {} values, got {}",
                            1u64 << *n,
                            values.len()
                        )));
                    }
                    let f =
                        VectorialFunction::new(*n, *m, values).map_err(|e| err(e.to_string()))?;
                    items.push(Item::Table(f));
                }
                Block::Space { n, left, forms } => {
                    let c = u64::from_str_radix(line.trim_start_matches("0x"), 16)
                        .map_err(|_| err(format!("bad hex mask {line:?}")))?;
                    forms.push(QuadForm::new(*n, c).map_err(|e| err(e.to_string()))?);
                    *left -= 1;
                }
            }
        }
    }
    match block {
        Block::Space { n, left: 0, forms } => items.push(Item::Space(QuadSpace::new(n, &forms)?)),
        Block::Space { left, .. } => {
            return Err(Error::Parse {
                line: text.lines().count(),
                message: format!("quad basis block is missing {left} line(s)"),
            })
        }
        _ => {}
    }
    Ok(items)
}

pub fn write_value_tables(functions: &[VectorialFunction]) -> String {
    let mut out = String::new();
    let mut current = None;
    for f in functions {
        if current != Some((f.n(), f.m())) {
            writeln!(out, "#vt n={} m={}", f.n(), f.m()).unwrap();
            current = Some((f.n(), f.m()));
        }
        let line: Vec<String> = f.values().iter().map(u64::to_string).collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    out
}

pub fn write_quad_bases(spaces: &[QuadSpace]) -> String {
    let mut out = String::new();
    for s in spaces {
        writeln!(out, "#qb n={} dim={}", s.n(), s.dim()).unwrap();
        for line in s.to_hex_lines() {
            writeln!(out, "{line}").unwrap();
        }
    }
    out
}

pub fn read_file(path: &Path) -> Result<Vec<Item>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text)
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads `path` and returns functions, rejecting blocks of the other format.
pub fn import_functions(path: &Path, format: Format) -> Result<Vec<VectorialFunction>> {
    read_file(path)?
        .into_iter()
        .map(|item| match (format, item) {
            (Format::ValueTable, Item::Table(f)) => Ok(f),
            (Format::QuadBasis, Item::Space(s)) => s.to_function(),
            (f, _) => Err(Error::Invalid(format!(
                "{}: expected {f:?} blocks only",
                path.display()
            ))),
        })
        .collect()
}
