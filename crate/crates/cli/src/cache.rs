//! On-disk cache of spectra.
//!
//! Entries are named `f64` matrices stored as little-endian bytes, so a
//! reload is bit-identical to what was computed. An entry is trusted only
//! when the previous run's manifest lists its key with a matching checksum.

use std::collections::BTreeMap;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use sha2::{Digest, Sha256};

use qcrit_core::{QcritError, Result};

use crate::models::{ModelPoint, SpectrumKind};

const MAGIC: &[u8; 8] = b"QCSPEC1\n";

/// Named real matrices; vectors are stored as one column.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Spectrum {
    arrays: BTreeMap<String, Array2<f64>>,
}

impl Spectrum {
    pub fn insert_matrix(&mut self, name: &str, m: Array2<f64>) {
        self.arrays.insert(name.to_string(), m.as_standard_layout().into_owned());
    }

    pub fn insert_vector(&mut self, name: &str, v: &[f64]) {
        let m = Array2::from_shape_vec((v.len(), 1), v.to_vec()).expect("column shape matches length");
        self.arrays.insert(name.to_string(), m);
    }

    fn get(&self, name: &str) -> Result<&Array2<f64>> {
        self.arrays.get(name).ok_or_else(|| QcritError::Validation(format!("spectrum has no '{name}' entry")))
    }

    pub fn matrix(&self, name: &str) -> Result<Array2<f64>> {
        self.get(name).cloned()
    }

    pub fn vector(&self, name: &str) -> Result<Vec<f64>> {
        Ok(self.get(name)?.iter().copied().collect())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = MAGIC.to_vec();
        out.extend((self.arrays.len() as u64).to_le_bytes());
        for (name, m) in &self.arrays {
            out.extend((name.len() as u64).to_le_bytes());
            out.extend(name.as_bytes());
            out.extend((m.nrows() as u64).to_le_bytes());
            out.extend((m.ncols() as u64).to_le_bytes());
            for x in m.iter() {
                out.extend(x.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(mut bytes: &[u8]) -> io::Result<Self> {
        let bad = |what: &str| io::Error::new(io::ErrorKind::InvalidData, what.to_string());
        let mut magic = [0u8; 8];
        bytes.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(bad("not a spectrum file"));
        }
        let count = read_word(&mut bytes)?;
        let mut spectrum = Spectrum::default();
        for _ in 0..count {
            let len = read_word(&mut bytes)? as usize;
            let mut name = vec![0u8; len];
            bytes.read_exact(&mut name)?;
            let name = String::from_utf8(name).map_err(|_| bad("entry name is not UTF-8"))?;
            let rows = read_word(&mut bytes)? as usize;
            let cols = read_word(&mut bytes)? as usize;
            let total = rows.checked_mul(cols).ok_or_else(|| bad("entry too large"))?;
            let mut data = Vec::with_capacity(total);
            for _ in 0..total {
                data.push(f64::from_bits(read_word(&mut bytes)?));
            }
            let m = Array2::from_shape_vec((rows, cols), data).map_err(|_| bad("inconsistent entry shape"))?;
            spectrum.arrays.insert(name, m);
        }
        if !bytes.is_empty() {
            return Err(bad("trailing bytes"));
        }
        Ok(spectrum)
    }
}

fn read_word(bytes: &mut &[u8]) -> io::Result<u64> {
    let mut b = [0u8; 8];
    bytes.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Key of one spectrum: model, exact parameter bits, size, spectrum kind
/// and tool version.
pub fn cache_key(point: &ModelPoint, kind: SpectrumKind, version: &str) -> String {
    let mut text = format!("{}|{}|{}|{}", point.model, point.size, kind.tag(), version);
    for (name, value) in &point.params {
        text.push_str(&format!("|{name}={:016x}", value.to_bits()));
    }
    sha256_hex(text.as_bytes())
}

/// A cache directory plus the entries a previous manifest vouches for.
#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
    trusted: BTreeMap<String, String>,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>, trusted: BTreeMap<String, String>) -> Self {
        Cache { dir: dir.into(), trusted }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.spec"))
    }

    /// A trusted entry whose checksum still matches, or `None`.
    pub fn load(&self, key: &str) -> Option<(Spectrum, String)> {
        let expected = self.trusted.get(key)?;
        let bytes = std::fs::read(self.path(key)).ok()?;
        let sum = sha256_hex(&bytes);
        if &sum != expected {
            return None;
        }
        Spectrum::from_bytes(&bytes).ok().map(|s| (s, sum))
    }

    /// Writes an entry atomically and returns its checksum.
    pub fn store(&self, key: &str, spectrum: &Spectrum) -> io::Result<String> {
        std::fs::create_dir_all(&self.dir)?;
        let bytes = spectrum.to_bytes();
        let tmp = self.dir.join(format!("{key}.tmp"));
        std::fs::File::create(&tmp)?.write_all(&bytes)?;
        std::fs::rename(&tmp, self.path(key))?;
        Ok(sha256_hex(&bytes))
    }
}
