//! The `.qglf` function file: magic `QGLF`, version 1, n, flags, then either
//! 2ⁿ packed bits (value (−1)^bit) or 2ⁿ little-endian (re, im) f64 pairs.

use std::io::{Read, Write};

use anyhow::{bail, ensure, Context, Result};
use qgl_core::funcspace::{TableFn, C64};

pub const MAGIC: &[u8; 4] = b"QGLF";
pub const VERSION: u8 = 1;
pub const FLAG_BOOLEAN: u8 = 1;
pub const FLAG_COMPLEX: u8 = 2;

/// Contents of a function file.
#[derive(Clone, Debug, PartialEq)]
pub enum FunctionFile {
    /// Bit x is fb(x); the function is (−1)^{fb}.
    Boolean { n: usize, bits: Vec<bool> },
    Values(TableFn),
}

impl FunctionFile {
    pub fn dim(&self) -> usize {
        match self {
            Self::Boolean { n, .. } => *n,
            Self::Values(t) => t.dim(),
        }
    }

    pub fn table(&self) -> TableFn {
        match self {
            Self::Boolean { n, bits } => {
                TableFn::from_fn(*n, |x| C64::new(if bits[x as usize] { -1.0 } else { 1.0 }, 0.0))
            }
            Self::Values(t) => t.clone(),
        }
    }

    pub fn bits(&self) -> Option<&[bool]> {
        match self {
            Self::Boolean { bits, .. } => Some(bits),
            Self::Values(_) => None,
        }
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let n = self.dim();
        match self {
            Self::Boolean { bits, .. } => {
                w.write_all(MAGIC)?;
                w.write_all(&[VERSION, n as u8, FLAG_BOOLEAN])?;
                let mut bytes = vec![0u8; bits.len().div_ceil(8)];
                for (x, &b) in bits.iter().enumerate() {
                    bytes[x / 8] |= (b as u8) << (x % 8);
                }
                w.write_all(&bytes)?;
            }
            Self::Values(t) => {
                let complex = t.values().iter().any(|v| v.im != 0.0);
                w.write_all(MAGIC)?;
                w.write_all(&[VERSION, n as u8, if complex { FLAG_COMPLEX } else { 0 }])?;
                for v in t.values() {
                    w.write_all(&v.re.to_le_bytes())?;
                    w.write_all(&v.im.to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut head = [0u8; 7];
        r.read_exact(&mut head).context("truncated header")?;
        ensure!(&head[..4] == MAGIC, "not a QGLF file");
        ensure!(head[4] == VERSION, "unsupported QGLF version {}", head[4]);
        let n = head[5] as usize;
        ensure!((1..=24).contains(&n), "dimension {n} outside 1..=24");
        let flags = head[6];
        ensure!(flags & !(FLAG_BOOLEAN | FLAG_COMPLEX) == 0, "unknown flag bits {flags:#x}");
        let size = 1usize << n;
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        if flags & FLAG_BOOLEAN != 0 {
            ensure!(flags & FLAG_COMPLEX == 0, "boolean and complex flags are exclusive");
            ensure!(body.len() == size.div_ceil(8), "expected {} bytes of bits, got {}", size.div_ceil(8), body.len());
            let bits = (0..size).map(|x| body[x / 8] >> (x % 8) & 1 == 1).collect();
            return Ok(Self::Boolean { n, bits });
        }
        ensure!(body.len() == 16 * size, "expected {} bytes of values, got {}", 16 * size, body.len());
        let f = |c: &[u8]| f64::from_le_bytes(c.try_into().expect("8 bytes"));
        let values: Vec<C64> = body.chunks_exact(16).map(|c| C64::new(f(&c[..8]), f(&c[8..]))).collect();
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            bail!("non-finite value in function file");
        }
        Ok(Self::Values(TableFn::new(n, values)?))
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        std::fs::write(path, buf).with_context(|| format!("writing {}", path.display()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        Self::read_from(&mut bytes.as_slice()).with_context(|| format!("parsing {}", path.display()))
    }
}
