//! Text traces: `N <n>` header, `I <u> <v>`, `D <u> <v>`, and `B` closing a
//! batch. Batch 0 is the initial graph. `#` starts a comment line.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{canonicalize, Edge, Graph, UpdateBatch, WeightedEdge};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub n: usize,
    pub batches: Vec<UpdateBatch>,
}

impl Trace {
    pub fn new(n: usize) -> Self {
        Trace {
            n,
            batches: Vec::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Trace> {
        let mut n: Option<usize> = None;
        let mut batches = Vec::new();
        let mut cur = UpdateBatch::new();
        let mut open = false;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let bad = |msg: String| Error::Parse { line, msg };
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            let mut parts = s.split_whitespace();
            let tag = parts.next().unwrap();
            let mut num = |what: &str| -> Result<u64> {
                parts
                    .next()
                    .ok_or_else(|| bad(format!("missing {what}")))?
                    .parse::<u64>()
                    .map_err(|e| bad(format!("bad {what}: {e}")))
            };
            match tag {
                "N" => {
                    if n.is_some() {
                        return Err(bad("second header".into()));
                    }
                    n = Some(num("vertex count")? as usize);
                }
                "I" | "D" => {
                    let nv = n.ok_or_else(|| bad("record before header".into()))?;
                    let (u, v) = (num("endpoint")?, num("endpoint")?);
                    if u >= nv as u64 || v >= nv as u64 {
                        return Err(bad(format!("vertex out of range for n = {nv}")));
                    }
                    let e = canonicalize(u as u32, v as u32).map_err(|e| bad(e.to_string()))?;
                    let (this, other) = if tag == "I" {
                        (&mut cur.inserts, &cur.deletes)
                    } else {
                        (&mut cur.deletes, &cur.inserts)
                    };
                    if other.contains(&e) {
                        return Err(bad(format!("{e} inserted and deleted in one batch")));
                    }
                    this.insert(e);
                    open = true;
                }
                "B" => {
                    if n.is_none() {
                        return Err(bad("record before header".into()));
                    }
                    batches.push(std::mem::take(&mut cur));
                    open = false;
                }
                _ => return Err(bad(format!("unknown record {tag:?}"))),
            }
            if parts.next().is_some() {
                return Err(bad("trailing fields".into()));
            }
        }
        if open {
            batches.push(cur);
        }
        let n = n.ok_or(Error::Parse {
            line: 0,
            msg: "missing header".into(),
        })?;
        Ok(Trace { n, batches })
    }

    pub fn read(path: &Path) -> Result<Trace> {
        Trace::parse(&std::fs::read_to_string(path)?)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        writeln!(s, "N {}", self.n).unwrap();
        for b in &self.batches {
            for e in &b.deletes {
                writeln!(s, "D {} {}", e.u, e.v).unwrap();
            }
            for e in &b.inserts {
                writeln!(s, "I {} {}", e.u, e.v).unwrap();
            }
            s.push_str("B\n");
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }

    /// Graph after batch 0.
    pub fn initial_graph(&self) -> Result<Graph> {
        let mut g = Graph::new(self.n);
        if let Some(b) = self.batches.first() {
            g.apply_batch(b)?;
        }
        Ok(g)
    }

    /// Graph after every batch.
    pub fn final_graph(&self) -> Result<Graph> {
        let mut g = Graph::new(self.n);
        for b in &self.batches {
            g.apply_batch(b)?;
        }
        Ok(g)
    }

    pub fn has_inserts_after_init(&self) -> bool {
        self.batches.iter().skip(1).any(|b| !b.inserts.is_empty())
    }
}

/// Structure files: `H <u> <v>` for spanners, `S <u> <v> <w>` for
/// sparsifiers. An optional `N` line is ignored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StructureFile {
    Spanner(Vec<Edge>),
    Sparsifier(Vec<WeightedEdge>),
}

impl StructureFile {
    pub fn parse(text: &str) -> Result<StructureFile> {
        let mut plain = Vec::new();
        let mut weighted = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let bad = |msg: String| Error::Parse { line, msg };
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = s.split_whitespace().collect();
            let num = |x: &str| x.parse::<u64>().map_err(|e| bad(format!("{x:?}: {e}")));
            match (f[0], f.len()) {
                ("N", 2) => {}
                ("H", 3) => {
                    let e = canonicalize(num(f[1])? as u32, num(f[2])? as u32)
                        .map_err(|e| bad(e.to_string()))?;
                    plain.push(e);
                }
                ("S", 4) => {
                    let edge = canonicalize(num(f[1])? as u32, num(f[2])? as u32)
                        .map_err(|e| bad(e.to_string()))?;
                    let weight = num(f[3])?;
                    if weight == 0 {
                        return Err(bad("zero weight".into()));
                    }
                    weighted.push(WeightedEdge { edge, weight });
                }
                _ => return Err(bad(format!("unexpected record {s:?}"))),
            }
        }
        match (plain.is_empty(), weighted.is_empty()) {
            (_, true) => Ok(StructureFile::Spanner(plain)),
            (true, false) => Ok(StructureFile::Sparsifier(weighted)),
            _ => Err(Error::Parse {
                line: 0,
                msg: "mixed H and S records".into(),
            }),
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        match self {
            StructureFile::Spanner(v) => {
                for e in v {
                    writeln!(s, "H {} {}", e.u, e.v).unwrap();
                }
            }
            StructureFile::Sparsifier(v) => {
                for w in v {
                    writeln!(s, "S {} {} {}", w.edge.u, w.edge.v, w.weight).unwrap();
                }
            }
        }
        s
    }
}
