//! Versioned binary cache of sector eigen-data.
//!
//! Layout, little endian: magic `XXZSPEC\0`, `u32` version, `u32` sector
//! count, then per sector `u32` particle number, `u32` dimension, the
//! energies and the eigenvectors column-major as `(re, im)` pairs.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use faer::{c64, Mat};

use super::SectorSpectrum;
use crate::error::Result;
use crate::model::{hex_digest, FockSector, ModelParams};

pub const CACHE_ENV: &str = "XXZLAB_CACHE_DIR";
pub const CACHE_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"XXZSPEC\0";

pub fn cache_key(params: &ModelParams, sectors: &[FockSector]) -> String {
    let ns: Vec<String> = sectors.iter().map(|s| s.particles().to_string()).collect();
    let text = format!("v{CACHE_VERSION}|{}|{}", params.hash(), ns.join(","));
    hex_digest(text.as_bytes())
}

pub(super) fn load(
    dir: &Path,
    params: &ModelParams,
    sectors: &[FockSector],
) -> Result<Option<Vec<SectorSpectrum>>> {
    let path = dir.join(format!("{}.spec", cache_key(params, sectors)));
    let Ok(mut f) = fs::File::open(&path) else {
        return Ok(None);
    };
    let mut bytes = Vec::new();
    f.read_to_end(&mut bytes)?;
    Ok(decode(&bytes, sectors))
}

pub(super) fn store(dir: &Path, params: &ModelParams, spectra: &[SectorSpectrum]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let sectors: Vec<FockSector> = spectra.iter().map(|s| s.sector.clone()).collect();
    let key = cache_key(params, &sectors);
    let tmp = dir.join(format!("{key}.spec.tmp"));
    let mut f = fs::File::create(&tmp)?;
    f.write_all(&encode(spectra))?;
    f.sync_all()?;
    fs::rename(tmp, dir.join(format!("{key}.spec")))?;
    Ok(())
}

fn encode(spectra: &[SectorSpectrum]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    out.extend_from_slice(&(spectra.len() as u32).to_le_bytes());
    for s in spectra {
        let d = s.energies.len();
        out.extend_from_slice(&(s.sector.particles() as u32).to_le_bytes());
        out.extend_from_slice(&(d as u32).to_le_bytes());
        for e in &s.energies {
            out.extend_from_slice(&e.to_le_bytes());
        }
        for j in 0..d {
            for i in 0..d {
                let v = s.vectors[(i, j)];
                out.extend_from_slice(&v.re.to_le_bytes());
                out.extend_from_slice(&v.im.to_le_bytes());
            }
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Option<&[u8]> {
        let s = self.bytes.get(self.pos..self.pos + n)?;
        self.pos += n;
        Some(s)
    }

    fn u32(&mut self) -> Option<u32> {
        Some(u32::from_le_bytes(self.take(4)?.try_into().ok()?))
    }

    fn f64(&mut self) -> Option<f64> {
        Some(f64::from_le_bytes(self.take(8)?.try_into().ok()?))
    }
}

fn decode(bytes: &[u8], sectors: &[FockSector]) -> Option<Vec<SectorSpectrum>> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(8)? != MAGIC || c.u32()? != CACHE_VERSION {
        return None;
    }
    let count = c.u32()? as usize;
    if count != sectors.len() {
        return None;
    }
    let mut out = Vec::with_capacity(count);
    for sector in sectors {
        let n = c.u32()? as usize;
        let d = c.u32()? as usize;
        if n != sector.particles() || d != sector.dim() {
            return None;
        }
        let energies = (0..d).map(|_| c.f64()).collect::<Option<Vec<_>>>()?;
        let mut vectors = Mat::<c64>::zeros(d, d);
        for j in 0..d {
            for i in 0..d {
                let re = c.f64()?;
                let im = c.f64()?;
                vectors[(i, j)] = c64::new(re, im);
            }
        }
        out.push(SectorSpectrum {
            sector: sector.clone(),
            energies,
            vectors,
        });
    }
    (c.pos == bytes.len()).then_some(out)
}
