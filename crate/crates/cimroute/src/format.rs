//! Line-oriented text formats.
//!
//! Instance files:
//!
//! ```text
//! nodes 3 edges 2 source 0 dest 2
//! n 0 10.5 20 1e-12
//! n 1 30 40.25 3.1e-13
//! n 2 60 40 1e-12
//! e 0 1
//! e 1 2
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Numbers are written
//! in Rust's shortest round-trip form, so save followed by load reproduces
//! every field exactly.
//!
//! QUBO exports hold `q <k> <v>` for every variable, `Q <k> <l> <v>` for
//! each stored pair with `k < l`, and one `offset <v>` line. Ising exports
//! use `h` and `J` in the same layout; the energy convention is
//! `E = -sum J s_k s_l - sum h s_k + offset`.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use cimroute_core::network::{Edge, Node};
use cimroute_core::qubo::QuboBuilder;
use cimroute_core::{IsingModel, NetworkInstance, QuboModel};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Invalid(#[from] cimroute_core::Error),
    /// The message omits the path; callers add it as context.
    #[error("{error}")]
    Io { path: String, error: std::io::Error },
}

fn parse_err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse {
        line,
        message: message.into(),
    }
}

/// Formats a float so that parsing it back gives the same bits.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

struct Fields<'a> {
    line: usize,
    tokens: std::str::SplitWhitespace<'a>,
}

impl<'a> Fields<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str, FormatError> {
        self.tokens
            .next()
            .ok_or_else(|| parse_err(self.line, format!("missing {what}")))
    }

    fn keyword(&mut self, kw: &str) -> Result<(), FormatError> {
        let t = self.next(kw)?;
        if t != kw {
            return Err(parse_err(
                self.line,
                format!("expected `{kw}`, found `{t}`"),
            ));
        }
        Ok(())
    }

    fn int(&mut self, what: &str) -> Result<usize, FormatError> {
        let t = self.next(what)?;
        t.parse()
            .map_err(|_| parse_err(self.line, format!("invalid {what} `{t}`")))
    }

    fn float(&mut self, what: &str) -> Result<f64, FormatError> {
        let t = self.next(what)?;
        t.parse()
            .map_err(|_| parse_err(self.line, format!("invalid {what} `{t}`")))
    }

    fn end(&mut self) -> Result<(), FormatError> {
        match self.tokens.next() {
            None => Ok(()),
            Some(t) => Err(parse_err(self.line, format!("unexpected trailing `{t}`"))),
        }
    }
}

/// Non-blank, non-comment lines with their 1-based line numbers.
fn records(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Parses and validates an instance, including reachability of the
/// destination.
pub fn parse_instance(text: &str) -> Result<NetworkInstance, FormatError> {
    let mut lines = records(text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty instance file"))?;
    let mut h = Fields {
        line: hline,
        tokens: header.split_whitespace(),
    };
    h.keyword("nodes")?;
    let n = h.int("node count")?;
    h.keyword("edges")?;
    let m = h.int("edge count")?;
    h.keyword("source")?;
    let source = h.int("source")?;
    h.keyword("dest")?;
    let destination = h.int("destination")?;
    h.end()?;
    for id in [source, destination] {
        if id >= n {
            return Err(parse_err(hline, format!("unknown node id {id}")));
        }
    }

    let mut nodes: Vec<Option<Node>> = vec![None; n];
    let mut edges = Vec::with_capacity(m);
    let mut seen = HashSet::with_capacity(m);
    let mut last_line = hline;
    for (line, rec) in lines {
        last_line = line;
        let mut f = Fields {
            line,
            tokens: rec.split_whitespace(),
        };
        match f.next("record tag")? {
            "n" => {
                let id = f.int("node id")?;
                let x = f.float("x coordinate")?;
                let y = f.float("y coordinate")?;
                let noise_power = f.float("noise power")?;
                f.end()?;
                let slot = nodes
                    .get_mut(id)
                    .ok_or_else(|| parse_err(line, format!("unknown node id {id}")))?;
                if slot.is_some() {
                    return Err(parse_err(line, format!("duplicate node id {id}")));
                }
                *slot = Some(Node {
                    id,
                    position: [x, y],
                    noise_power,
                });
            }
            "e" => {
                let from = f.int("edge source")?;
                let to = f.int("edge target")?;
                f.end()?;
                for id in [from, to] {
                    if id >= n {
                        return Err(parse_err(line, format!("unknown node id {id}")));
                    }
                }
                if !seen.insert((from, to)) {
                    return Err(parse_err(line, format!("duplicate edge {from} -> {to}")));
                }
                edges.push(Edge { from, to });
            }
            t => return Err(parse_err(line, format!("unknown record `{t}`"))),
        }
    }
    if edges.len() != m {
        return Err(parse_err(
            last_line,
            format!("header declares {m} edges, found {}", edges.len()),
        ));
    }
    let nodes = nodes
        .into_iter()
        .enumerate()
        .map(|(id, node)| node.ok_or_else(|| parse_err(last_line, format!("node {id} missing"))))
        .collect::<Result<Vec<_>, _>>()?;
    let instance = NetworkInstance::new(nodes, edges, source, destination)?;
    instance.ensure_routable()?;
    Ok(instance)
}

pub fn write_instance(instance: &NetworkInstance) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "nodes {} edges {} source {} dest {}",
        instance.node_count(),
        instance.edge_count(),
        instance.source(),
        instance.destination()
    );
    for n in instance.nodes() {
        let _ = writeln!(
            s,
            "n {} {} {} {}",
            n.id,
            num(n.position[0]),
            num(n.position[1]),
            num(n.noise_power)
        );
    }
    for e in instance.edges() {
        let _ = writeln!(s, "e {} {}", e.from, e.to);
    }
    s
}

fn read(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|error| FormatError::Io {
        path: path.display().to_string(),
        error,
    })
}

fn write(path: &Path, text: &str) -> Result<(), FormatError> {
    fs::write(path, text).map_err(|error| FormatError::Io {
        path: path.display().to_string(),
        error,
    })
}

pub fn load_instance(path: &Path) -> Result<NetworkInstance, FormatError> {
    parse_instance(&read(path)?)
}

pub fn save_instance(instance: &NetworkInstance, path: &Path) -> Result<(), FormatError> {
    write(path, &write_instance(instance))
}

pub fn write_qubo(model: &QuboModel) -> String {
    let mut s = String::new();
    for (k, v) in model.linear().iter().enumerate() {
        let _ = writeln!(s, "q {k} {}", num(*v));
    }
    for &(k, l, v) in model.quadratic() {
        let _ = writeln!(s, "Q {k} {l} {}", num(v));
    }
    let _ = writeln!(s, "offset {}", num(model.offset()));
    s
}

pub fn write_ising(model: &IsingModel) -> String {
    let mut s = String::new();
    for (k, v) in model.field().iter().enumerate() {
        let _ = writeln!(s, "h {k} {}", num(*v));
    }
    for &(k, l, v) in model.couplings() {
        let _ = writeln!(s, "J {k} {l} {}", num(v));
    }
    let _ = writeln!(s, "offset {}", num(model.offset()));
    s
}

/// Reads a QUBO export. The dimension is one more than the largest index
/// mentioned.
pub fn parse_qubo(text: &str) -> Result<QuboModel, FormatError> {
    let mut linear = Vec::new();
    let mut pairs = Vec::new();
    let mut offset = 0.0;
    let mut dim = 0;
    for (line, rec) in records(text) {
        let mut f = Fields {
            line,
            tokens: rec.split_whitespace(),
        };
        match f.next("record tag")? {
            "q" => {
                let k = f.int("index")?;
                linear.push((k, f.float("value")?));
                dim = dim.max(k + 1);
            }
            "Q" => {
                let k = f.int("index")?;
                let l = f.int("index")?;
                if k == l {
                    return Err(parse_err(line, "diagonal entries belong on `q` lines"));
                }
                pairs.push((k, l, f.float("value")?));
                dim = dim.max(k.max(l) + 1);
            }
            "offset" => offset += f.float("offset")?,
            t => return Err(parse_err(line, format!("unknown record `{t}`"))),
        }
        f.end()?;
    }
    let mut b = QuboBuilder::new(dim);
    for (k, v) in linear {
        b.add_linear(k, v);
    }
    for (k, l, v) in pairs {
        b.add_pair(k, l, v);
    }
    b.add_offset(offset);
    Ok(b.build())
}

/// Reads an Ising export.
pub fn parse_ising(text: &str) -> Result<IsingModel, FormatError> {
    let mut field = Vec::new();
    let mut couplings = Vec::new();
    let mut offset = 0.0;
    for (line, rec) in records(text) {
        let mut f = Fields {
            line,
            tokens: rec.split_whitespace(),
        };
        match f.next("record tag")? {
            "h" => {
                let k = f.int("index")?;
                let v = f.float("value")?;
                if field.len() <= k {
                    field.resize(k + 1, 0.0);
                }
                field[k] += v;
            }
            "J" => {
                let k = f.int("index")?;
                let l = f.int("index")?;
                couplings.push((k, l, f.float("value")?));
            }
            "offset" => offset += f.float("offset")?,
            t => return Err(parse_err(line, format!("unknown record `{t}`"))),
        }
        f.end()?;
    }
    let dim = couplings
        .iter()
        .map(|c| c.0.max(c.1) + 1)
        .max()
        .unwrap_or(0)
        .max(field.len());
    field.resize(dim, 0.0);
    Ok(IsingModel::new(dim, &couplings, field, offset)?)
}
