pub mod census;
pub mod energy;
pub mod enumerate;
pub mod percolate;
pub mod project;
pub mod spectrum;
pub mod verify;

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use ffproj_core::{PointSet, Subspace};

pub fn load_set(path: &Path) -> Result<PointSet> {
    PointSet::load(path).with_context(|| format!("loading point set {}", path.display()))
}

/// Basis rows as `a,b;c,d`.
pub fn basis_text(w: &Subspace) -> String {
    let rows: Vec<String> = w
        .rows()
        .map(|r| r.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","))
        .collect();
    rows.join(";")
}

/// `direction,size,basis` for every direction.
pub fn write_sizes_csv(path: &Path, directions: &[std::sync::Arc<Subspace>], sizes: &[u64]) -> Result<()> {
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    writeln!(out, "direction,size,basis")?;
    for (i, (w, s)) in directions.iter().zip(sizes).enumerate() {
        writeln!(out, "{i},{s},\"{}\"", basis_text(w))?;
    }
    out.flush()?;
    Ok(())
}
