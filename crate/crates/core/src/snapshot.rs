//! Binary field snapshots and plain-text key=value sidecars.
//!
//! Snapshot layout (all integers and floats little-endian):
//! magic `MVLB`, format version `u32`, grid size `n: u32`, box side
//! `d: f64`, component count `ncomp: u32`, then `ncomp · n²` samples as
//! `f64` in row-major order per component.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

use crate::field::VectorField;
use crate::grid::Grid;

pub const MAGIC: [u8; 4] = *b"MVLB";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad magic {0:?}; not a snapshot file")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {0}")]
    BadVersion(u32),
    #[error("corrupt header: {0}")]
    BadHeader(String),
    #[error("sidecar line {line}: expected key=value, got {text:?}")]
    BadSidecarLine { line: usize, text: String },
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
    #[error(transparent)]
    Field(#[from] crate::field::FieldError),
}

/// An on-disk snapshot: real-valued components on an n×n periodic box.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub n: usize,
    pub d: f64,
    pub components: Vec<Array2<f64>>,
}

impl Snapshot {
    /// Pack a vector field: two components when it is real to roundoff,
    /// otherwise four (re u₁, re u₂, im u₁, im u₂).
    pub fn from_vector(field: &VectorField) -> Snapshot {
        let grid = field.grid();
        let re1 = field.u1().mapv(|z| z.re);
        let re2 = field.u2().mapv(|z| z.re);
        let mut components = vec![re1, re2];
        if !field.is_real(1e-12) {
            components.push(field.u1().mapv(|z| z.im));
            components.push(field.u2().mapv(|z| z.im));
        }
        Snapshot {
            n: grid.n(),
            d: grid.d(),
            components,
        }
    }

    /// Rebuild a vector field from a 2-component (real) or 4-component
    /// (complex) snapshot.
    pub fn to_vector(&self) -> Result<VectorField, SnapshotError> {
        let grid = Grid::new(self.n, self.d)?;
        match self.components.len() {
            2 => {
                let u1 = self.components[0].mapv(|x| Complex64::new(x, 0.0));
                let u2 = self.components[1].mapv(|x| Complex64::new(x, 0.0));
                Ok(VectorField::from_components(grid, u1, u2)?)
            }
            4 => {
                let mut u1 = self.components[0].mapv(|x| Complex64::new(x, 0.0));
                let mut u2 = self.components[1].mapv(|x| Complex64::new(x, 0.0));
                u1.zip_mut_with(&self.components[2], |a, b| a.im = *b);
                u2.zip_mut_with(&self.components[3], |a, b| a.im = *b);
                Ok(VectorField::from_components(grid, u1, u2)?)
            }
            k => Err(SnapshotError::BadHeader(format!(
                "expected 2 or 4 components for a vector field, found {k}"
            ))),
        }
    }

    /// Write the snapshot to `path`.
    pub fn save(&self, path: &Path) -> Result<(), SnapshotError> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(&MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.n as u32).to_le_bytes())?;
        w.write_all(&self.d.to_le_bytes())?;
        w.write_all(&(self.components.len() as u32).to_le_bytes())?;
        for comp in &self.components {
            debug_assert_eq!(comp.dim(), (self.n, self.n));
            for row in comp.rows() {
                for x in row {
                    w.write_all(&x.to_le_bytes())?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Read a snapshot from `path`.
    pub fn load(path: &Path) -> Result<Snapshot, SnapshotError> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if magic != MAGIC {
            return Err(SnapshotError::BadMagic(magic));
        }
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(SnapshotError::BadVersion(version));
        }
        let n = read_u32(&mut r)? as usize;
        let d = read_f64(&mut r)?;
        let ncomp = read_u32(&mut r)? as usize;
        if n == 0 || !d.is_finite() || d <= 0.0 {
            return Err(SnapshotError::BadHeader(format!("n = {n}, d = {d}")));
        }
        let mut components = Vec::with_capacity(ncomp);
        for _ in 0..ncomp {
            let mut data = Vec::with_capacity(n * n);
            for _ in 0..n * n {
                data.push(read_f64(&mut r)?);
            }
            components.push(
                Array2::from_shape_vec((n, n), data)
                    .expect("length matches the declared shape"),
            );
        }
        Ok(Snapshot { n, d, components })
    }
}

fn read_u32(r: &mut impl Read) -> Result<u32, std::io::Error> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64, std::io::Error> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Write a key=value sidecar; keys are emitted in the map's order.
pub fn write_kv(path: &Path, pairs: &BTreeMap<String, String>) -> Result<(), SnapshotError> {
    let mut w = BufWriter::new(File::create(path)?);
    for (k, v) in pairs {
        writeln!(w, "{k}={v}")?;
    }
    w.flush()?;
    Ok(())
}

/// Read a key=value file: one pair per line, `#` starts a comment, blank
/// lines are skipped, whitespace around keys and values is trimmed.
pub fn read_kv(path: &Path) -> Result<BTreeMap<String, String>, SnapshotError> {
    let text = std::fs::read_to_string(path)?;
    parse_kv(&text)
}

/// Parse key=value text (see [`read_kv`] for the grammar).
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, SnapshotError> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(SnapshotError::BadSidecarLine {
                line: idx + 1,
                text: raw.to_string(),
            });
        };
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn snapshot_round_trips_complex_field() {
        let grid = Grid::new(32, 4.0).unwrap();
        let mut f = VectorField::from_fns(grid, |x, y| (x + 2.0 * y).sin(), |x, _| x.cos());
        f.scale(Complex64::new(1.0, 0.25));
        let dir = tempdir().unwrap();
        let path = dir.path().join("field.mvlb");
        Snapshot::from_vector(&f).save(&path).unwrap();
        let back = Snapshot::load(&path).unwrap().to_vector().unwrap();
        let mut diff = back.clone();
        diff.axpy(Complex64::new(-1.0, 0.0), &f);
        assert!(diff.max_abs() < 1e-15);
    }

    #[test]
    fn real_field_packs_two_components() {
        let grid = Grid::new(32, 1.0).unwrap();
        let f = VectorField::from_fns(grid, |x, _| x, |_, y| y);
        assert_eq!(Snapshot::from_vector(&f).components.len(), 2);
    }

    #[test]
    fn header_layout_is_stable() {
        let grid = Grid::new(32, 2.5).unwrap();
        let f = VectorField::from_fns(grid, |_, _| 1.0, |_, _| 0.0);
        let dir = tempdir().unwrap();
        let path = dir.path().join("h.mvlb");
        Snapshot::from_vector(&f).save(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[0..4], b"MVLB");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), VERSION);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 32);
        assert_eq!(f64::from_le_bytes(bytes[12..20].try_into().unwrap()), 2.5);
        assert_eq!(u32::from_le_bytes(bytes[20..24].try_into().unwrap()), 2);
        assert_eq!(bytes.len(), 24 + 2 * 32 * 32 * 8);
    }

    #[test]
    fn bad_magic_is_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("junk.mvlb");
        std::fs::write(&path, b"NOPE\x01\x00\x00\x00").unwrap();
        assert!(matches!(
            Snapshot::load(&path),
            Err(SnapshotError::BadMagic(_))
        ));
    }

    #[test]
    fn kv_round_trip_and_comments() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        let mut kv = BTreeMap::new();
        kv.insert("n".to_string(), "64".to_string());
        kv.insert("nu".to_string(), "0.05".to_string());
        write_kv(&path, &kv).unwrap();
        let back = read_kv(&path).unwrap();
        assert_eq!(back, kv);
        let parsed = parse_kv("# comment\n a = 1 # trailing\n\nb=two\n").unwrap();
        assert_eq!(parsed.get("a").unwrap(), "1");
        assert_eq!(parsed.get("b").unwrap(), "two");
        assert!(parse_kv("oops").is_err());
    }
}
