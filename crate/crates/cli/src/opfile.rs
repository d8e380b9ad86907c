//! Operator files: each block opens with `dim=<n>` followed by one `re,im` entry per line.
//!
//! Matrices are listed row-major (`n²` entries), vectors have `n` entries.
//! Blank lines and lines starting with `#` are skipped.

use std::fs;
use std::path::Path;

use qcert::qcore::{CMatrix, CVector, C64};

struct Block {
    dim: usize,
    entries: Vec<C64>,
}

pub fn parse_complex(s: &str) -> Result<C64, String> {
    let (re, im) = s.split_once(',').ok_or_else(|| format!("expected 're,im', got '{s}'"))?;
    let re = re.trim().parse::<f64>().map_err(|e| format!("bad real part '{re}': {e}"))?;
    let im = im.trim().parse::<f64>().map_err(|e| format!("bad imaginary part '{im}': {e}"))?;
    Ok(C64::new(re, im))
}

fn parse_blocks(text: &str) -> Result<Vec<Block>, String> {
    let mut blocks: Vec<Block> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(dim) = line.strip_prefix("dim=") {
            let dim = dim.trim().parse::<usize>().map_err(|e| format!("line {}: bad dimension: {e}", no + 1))?;
            if dim == 0 {
                return Err(format!("line {}: dimension must be positive", no + 1));
            }
            blocks.push(Block { dim, entries: Vec::new() });
        } else {
            let block = blocks.last_mut().ok_or_else(|| format!("line {}: entry before 'dim=' header", no + 1))?;
            block.entries.push(parse_complex(line).map_err(|e| format!("line {}: {e}", no + 1))?);
        }
    }
    if blocks.is_empty() {
        return Err("no 'dim=' header found".into());
    }
    Ok(blocks)
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

pub fn parse_matrices(text: &str) -> Result<Vec<CMatrix>, String> {
    parse_blocks(text)?
        .into_iter()
        .enumerate()
        .map(|(i, b)| {
            if b.entries.len() != b.dim * b.dim {
                return Err(format!("operator {i}: expected {} entries, found {}", b.dim * b.dim, b.entries.len()));
            }
            Ok(CMatrix::from_row_slice(b.dim, b.dim, &b.entries))
        })
        .collect()
}

pub fn parse_vector(text: &str) -> Result<CVector, String> {
    let mut blocks = parse_blocks(text)?;
    if blocks.len() != 1 {
        return Err(format!("expected a single vector, found {} blocks", blocks.len()));
    }
    let b = blocks.remove(0);
    if b.entries.len() != b.dim {
        return Err(format!("vector: expected {} entries, found {}", b.dim, b.entries.len()));
    }
    Ok(CVector::from_vec(b.entries))
}

pub fn read_matrices(path: &Path) -> Result<Vec<CMatrix>, String> {
    parse_matrices(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn read_vector(path: &Path) -> Result<CVector, String> {
    parse_vector(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

/// Inverse of [`parse_matrices`].
pub fn format_matrices(ms: &[CMatrix]) -> String {
    let mut out = String::new();
    for m in ms {
        out.push_str(&format!("dim={}\n", m.nrows()));
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                out.push_str(&format!("{:e},{:e}\n", m[(r, c)].re, m[(r, c)].im));
            }
        }
    }
    out
}
