//! Binary checkpoints.
//!
//! Layout, little-endian throughout:
//!
//! | field            | type        |
//! |------------------|-------------|
//! | magic `CCH1`     | 4 bytes     |
//! | version (= 1)    | u32         |
//! | dim, n           | u32, u32    |
//! | L, t             | f64, f64    |
//! | step             | u64         |
//! | dt               | f64         |
//! | scheme id        | u32         |
//! | a, b, gamma      | 3 × f64     |
//! | beta (zero pad)  | 3 × f64     |
//! | flags            | u32         |
//! | rng seed         | u64         |
//! | rng word pos     | u128        |
//! | coefficient count| u64         |
//! | coefficients     | count × (f64 re, f64 im), row-major |
//! | config length    | u64         |
//! | config text      | UTF-8       |
//!
//! Flag bit 0 marks a valid RNG state.

use std::path::{Path, PathBuf};

use cch_core::{GridSpec, ModelParams, Scheme, SpectralField, StepperState};
use num_complex::Complex;

use crate::error::{CliError, Result};
use crate::initial::RngState;

pub const MAGIC: &[u8; 4] = b"CCH1";
pub const VERSION: u32 = 1;
const FLAG_RNG: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub step: u64,
    pub dt: f64,
    pub scheme: Scheme,
    pub params: ModelParams,
    pub rng: Option<RngState>,
    pub state: StepperState,
    pub config_text: String,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let grid = self.state.u_hat.grid();
        let coeffs = self.state.u_hat.coeffs();
        let mut b = Vec::with_capacity(160 + 16 * coeffs.len() + self.config_text.len());
        b.extend_from_slice(MAGIC);
        b.extend_from_slice(&VERSION.to_le_bytes());
        b.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
        b.extend_from_slice(&(grid.n() as u32).to_le_bytes());
        b.extend_from_slice(&grid.box_length().to_le_bytes());
        b.extend_from_slice(&self.state.t.to_le_bytes());
        b.extend_from_slice(&self.step.to_le_bytes());
        b.extend_from_slice(&self.dt.to_le_bytes());
        b.extend_from_slice(&self.scheme.id().to_le_bytes());
        for v in [self.params.cubic_coeff, self.params.linear_pot_coeff, self.params.gamma] {
            b.extend_from_slice(&v.to_le_bytes());
        }
        for j in 0..3 {
            b.extend_from_slice(&self.params.drift.get(j).copied().unwrap_or(0.0).to_le_bytes());
        }
        let flags = if self.rng.is_some() { FLAG_RNG } else { 0 };
        b.extend_from_slice(&flags.to_le_bytes());
        let rng = self.rng.unwrap_or(RngState { seed: 0, word_pos: 0 });
        b.extend_from_slice(&rng.seed.to_le_bytes());
        b.extend_from_slice(&rng.word_pos.to_le_bytes());
        b.extend_from_slice(&(coeffs.len() as u64).to_le_bytes());
        for c in coeffs {
            b.extend_from_slice(&c.re.to_le_bytes());
            b.extend_from_slice(&c.im.to_le_bytes());
        }
        b.extend_from_slice(&(self.config_text.len() as u64).to_le_bytes());
        b.extend_from_slice(self.config_text.as_bytes());
        b
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(CliError::Checkpoint("bad magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(CliError::Checkpoint(format!("unsupported version {version}")));
        }
        let dim = r.u32()? as usize;
        let n = r.u32()? as usize;
        let box_length = r.f64()?;
        let t = r.f64()?;
        let step = r.u64()?;
        let dt = r.f64()?;
        let scheme_id = r.u32()?;
        let scheme = Scheme::from_id(scheme_id)
            .ok_or_else(|| CliError::Checkpoint(format!("unknown scheme id {scheme_id}")))?;
        let (a, b, gamma) = (r.f64()?, r.f64()?, r.f64()?);
        let beta = [r.f64()?, r.f64()?, r.f64()?];
        let flags = r.u32()?;
        let seed = r.u64()?;
        let word_pos = u128::from_le_bytes(r.take(16)?.try_into().unwrap());
        let count = r.u64()? as usize;
        let grid = GridSpec::new(dim, n, box_length)
            .map_err(|e| CliError::Checkpoint(format!("bad grid: {e}")))?;
        if count != grid.len() {
            return Err(CliError::Checkpoint(format!("{count} coefficients for a grid of {}", grid.len())));
        }
        let mut coeffs = Vec::with_capacity(count);
        for _ in 0..count {
            coeffs.push(Complex::new(r.f64()?, r.f64()?));
        }
        let text_len = r.u64()? as usize;
        let config_text = String::from_utf8(r.take(text_len)?.to_vec())
            .map_err(|_| CliError::Checkpoint("config text is not UTF-8".into()))?;
        if r.pos != bytes.len() {
            return Err(CliError::Checkpoint("trailing bytes".into()));
        }
        let u_hat = SpectralField::new(grid, coeffs)
            .map_err(|e| CliError::Checkpoint(format!("bad payload: {e}")))?;
        Ok(Self {
            step,
            dt,
            scheme,
            params: ModelParams { cubic_coeff: a, linear_pot_coeff: b, drift: beta[..dim].to_vec(), gamma },
            rng: (flags & FLAG_RNG != 0).then_some(RngState { seed, word_pos }),
            state: StepperState::new(t, u_hat),
            config_text,
        })
    }

    /// Writes through a temporary file and a rename.
    pub fn write(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("cch.tmp");
        std::fs::write(&tmp, self.to_bytes())?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

/// `<dir>/<stem>_<step:09>.cch`
pub fn checkpoint_path(dir: &Path, stem: &str, step: usize) -> PathBuf {
    dir.join(format!("{stem}_{step:09}.cch"))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| CliError::Checkpoint("file is truncated".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
