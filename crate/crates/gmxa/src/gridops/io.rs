use std::io::{Read, Write};
use std::path::Path;

use super::GridFunction;
use crate::error::{ensure, Error, Result};

pub const MAGIC: &[u8; 5] = b"GMXA1";

impl GridFunction {
    /// magic, u8 n, u32 shape[n], f64 origin[n], f64 h, f64 values; little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.n();
        let mut out = Vec::with_capacity(6 + 12 * n + 8 + 8 * self.len());
        out.extend_from_slice(MAGIC);
        out.push(n as u8);
        for &s in &self.shape {
            out.extend_from_slice(&(s as u32).to_le_bytes());
        }
        for &o in &self.origin {
            out.extend_from_slice(&o.to_le_bytes());
        }
        out.extend_from_slice(&self.h.to_le_bytes());
        for &v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(mut bytes: &[u8]) -> Result<Self> {
        let mut magic = [0u8; 5];
        read_exact(&mut bytes, &mut magic)?;
        ensure!(&magic == MAGIC, Format, "bad magic {magic:?}");
        let mut b1 = [0u8; 1];
        read_exact(&mut bytes, &mut b1)?;
        let n = b1[0] as usize;
        ensure!(n >= 1, Format, "dimension must be positive");
        let mut shape = Vec::with_capacity(n);
        for _ in 0..n {
            let mut b = [0u8; 4];
            read_exact(&mut bytes, &mut b)?;
            shape.push(u32::from_le_bytes(b) as usize);
        }
        let mut origin = Vec::with_capacity(n);
        for _ in 0..n {
            origin.push(read_f64(&mut bytes)?);
        }
        let h = read_f64(&mut bytes)?;
        let len = shape.iter().try_fold(1usize, |a, &s| a.checked_mul(s));
        let len = len.ok_or_else(|| Error::Format("shape overflows".into()))?;
        ensure!(bytes.len() == 8 * len, Format, "expected {} value bytes, found {}", 8 * len, bytes.len());
        let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        GridFunction::new(shape, origin, h, values)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut buf = Vec::new();
        std::fs::File::open(path).and_then(|mut f| f.read_to_end(&mut buf)).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&buf)
    }

    /// CSV rows `i_1,…,i_n,value` (no header). Unlisted nodes are 0.
    pub fn from_csv(text: &str, shape: Vec<usize>, origin: Vec<f64>, h: f64) -> Result<Self> {
        let mut g = GridFunction::zeros(shape, origin, h)?;
        let n = g.n();
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
            ensure!(rec.len() == n + 1, Format, "row {} has {} fields, expected {}", line + 1, rec.len(), n + 1);
            let mut idx = Vec::with_capacity(n);
            for k in 0..n {
                let i: usize = rec[k].parse().map_err(|_| Error::Format(format!("row {}: bad index {:?}", line + 1, &rec[k])))?;
                ensure!(i < g.shape[k], Format, "row {}: index {i} out of range on axis {k}", line + 1);
                idx.push(i);
            }
            let v: f64 = rec[n].parse().map_err(|_| Error::Format(format!("row {}: bad value {:?}", line + 1, &rec[n])))?;
            ensure!(v.is_finite(), Format, "row {}: value must be finite", line + 1);
            let flat = g.flat_index(&idx);
            g.values[flat] = v;
        }
        Ok(g)
    }

    pub fn load_csv(path: &Path, shape: Vec<usize>, origin: Vec<f64>, h: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text, shape, origin, h)
    }
}

fn read_exact(src: &mut &[u8], buf: &mut [u8]) -> Result<()> {
    src.read_exact(buf).map_err(|_| Error::Format("truncated grid file".into()))
}

fn read_f64(src: &mut &[u8]) -> Result<f64> {
    let mut b = [0u8; 8];
    read_exact(src, &mut b)?;
    Ok(f64::from_le_bytes(b))
}
