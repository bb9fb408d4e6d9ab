//! Dense point sets of F_p^n and the `ffpointset v1` text format.
//!
//! ```text
//! ffpointset 1 p=3 n=2
//! 0,0
//! 1,1
//! ```
//!
//! Points are written in index order, one per line, coordinates in base 10.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::field::{AmbientSpace, FpVector, PointIndex};

const WORD: u64 = 64;

/// An immutable subset of F_p^n stored as one bit per point.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    space: AmbientSpace,
    bits: Vec<u64>,
    cardinality: u64,
}

impl PointSet {
    pub fn empty(space: AmbientSpace) -> Self {
        PointSetBuilder::new(space).build()
    }

    pub fn full(space: AmbientSpace) -> Self {
        let mut b = PointSetBuilder::new(space);
        for i in 0..space.point_count() {
            b.insert_index(PointIndex(i));
        }
        b.build()
    }

    /// Collects points, collapsing duplicates.
    pub fn from_points<'a, I>(space: AmbientSpace, points: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a FpVector>,
    {
        let mut b = PointSetBuilder::new(space);
        for v in points {
            b.insert(v)?;
        }
        Ok(b.build())
    }

    pub fn from_indices<I>(space: AmbientSpace, indices: I) -> Result<Self>
    where
        I: IntoIterator<Item = PointIndex>,
    {
        let mut b = PointSetBuilder::new(space);
        for idx in indices {
            if idx.0 >= space.point_count() {
                return Err(Error::InvalidArgument(format!(
                    "point index {} outside {space}",
                    idx.0
                )));
            }
            b.insert_index(idx);
        }
        Ok(b.build())
    }

    pub fn space(&self) -> &AmbientSpace {
        &self.space
    }

    pub fn len(&self) -> u64 {
        self.cardinality
    }

    pub fn is_empty(&self) -> bool {
        self.cardinality == 0
    }

    pub fn is_full(&self) -> bool {
        self.cardinality == self.space.point_count()
    }

    pub fn contains_index(&self, idx: PointIndex) -> bool {
        idx.0 < self.space.point_count() && self.bits[(idx.0 / WORD) as usize] >> (idx.0 % WORD) & 1 == 1
    }

    pub fn contains(&self, v: &FpVector) -> bool {
        self.space
            .encode(v)
            .map(|idx| self.contains_index(idx))
            .unwrap_or(false)
    }

    /// Member indices in increasing order.
    pub fn indices(&self) -> impl Iterator<Item = PointIndex> + '_ {
        self.bits.iter().enumerate().flat_map(|(w, &word)| {
            let base = w as u64 * WORD;
            SetBits(word).map(move |b| PointIndex(base + u64::from(b)))
        })
    }

    pub fn points(&self) -> impl Iterator<Item = FpVector> + '_ {
        self.indices().map(|i| self.space.decode(i))
    }

    /// Membership as 0/1 per point index.
    pub fn indicator(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.space.point_count() as usize];
        for i in self.indices() {
            out[i.0 as usize] = 1;
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        String::from_utf8(out).expect("ascii output")
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "ffpointset 1 p={} n={}", self.space.p(), self.space.n())?;
        for v in self.points() {
            let line: Vec<String> = v.coords().iter().map(|c| c.to_string()).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = fs::File::open(path)?;
        Self::read_from(f, path)
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        Self::read_from(text.as_bytes(), Path::new("<text>"))
    }

    /// Parses `ffpointset v1`. `origin` only labels error messages.
    pub fn read_from<R: Read>(reader: R, origin: &Path) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: PathBuf::from(origin),
            line,
            message,
        };
        let mut lines = BufReader::new(reader).lines();
        let header = match lines.next() {
            Some(h) => h?,
            None => return Err(parse_err(1, "missing header".into())),
        };
        let (p, n) = parse_header(&header).map_err(|m| parse_err(1, m))?;
        let space = AmbientSpace::new(p, n).map_err(|e| parse_err(1, e.to_string()))?;
        let mut b = PointSetBuilder::new(space);
        let mut coords = Vec::with_capacity(n);
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            coords.clear();
            for tok in line.split(',') {
                let c: u64 = tok
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("bad coordinate {tok:?}")))?;
                coords.push(c);
            }
            let v = space
                .vector(&coords)
                .map_err(|e| parse_err(lineno, e.to_string()))?;
            b.insert(&v)?;
        }
        Ok(b.build())
    }
}

fn parse_header(header: &str) -> std::result::Result<(u64, usize), String> {
    let mut toks = header.split_whitespace();
    if toks.next() != Some("ffpointset") || toks.next() != Some("1") {
        return Err(format!("expected `ffpointset 1 p=<p> n=<n>`, got {header:?}"));
    }
    let mut p = None;
    let mut n = None;
    for tok in toks {
        match tok.split_once('=') {
            Some(("p", v)) => p = v.parse::<u64>().ok(),
            Some(("n", v)) => n = v.parse::<usize>().ok(),
            _ => return Err(format!("unexpected header field {tok:?}")),
        }
    }
    match (p, n) {
        (Some(p), Some(n)) => Ok((p, n)),
        _ => Err("header needs numeric p= and n=".into()),
    }
}

/// Mutable assembly of a [`PointSet`].
#[derive(Debug, Clone)]
pub struct PointSetBuilder {
    space: AmbientSpace,
    bits: Vec<u64>,
}

impl PointSetBuilder {
    pub fn new(space: AmbientSpace) -> Self {
        let words = space.point_count().div_ceil(WORD) as usize;
        PointSetBuilder {
            space,
            bits: vec![0; words],
        }
    }

    pub fn insert(&mut self, v: &FpVector) -> Result<()> {
        let idx = self.space.encode(v)?;
        self.insert_index(idx);
        Ok(())
    }

    /// Panics when `idx` lies outside the space.
    pub fn insert_index(&mut self, idx: PointIndex) {
        assert!(idx.0 < self.space.point_count());
        self.bits[(idx.0 / WORD) as usize] |= 1 << (idx.0 % WORD);
    }

    pub fn build(self) -> PointSet {
        let cardinality = self.bits.iter().map(|w| u64::from(w.count_ones())).sum();
        PointSet {
            space: self.space,
            bits: self.bits,
            cardinality,
        }
    }
}

struct SetBits(u64);

impl Iterator for SetBits {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(b)
    }
}
