//! Binary signature cache.
//!
//! All integers little-endian.
//!
//! ```text
//! full (64-bit slots):  "MHSG" | version u32 = 1 | k u64 | master_seed u64
//!                       | set_count u64 | { set_id u64 | k x u64 }*
//! b-bit slots:          "MHSG" | version u32 = 2 | k u64 | master_seed u64 | b u32
//!                       | set_count u64 | { set_id u64 | k x ceil(b/8) bytes }*
//! ```

use std::io::{Read, Write};

use super::{validate_bits, FamilyId, Signature, FULL_BITS};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"MHSG";
pub const VERSION_FULL: u32 = 1;
pub const VERSION_B_BIT: u32 = 2;

fn io_err(e: std::io::Error) -> Error {
    Error::Cache(e.to_string())
}

fn slot_bytes(bits: u32) -> usize {
    bits.div_ceil(8) as usize
}

/// Writes `entries` (all from one family) to `out`.
pub fn write_cache<W: Write>(
    mut out: W,
    family: FamilyId,
    entries: &[(u64, &Signature)],
) -> Result<()> {
    validate_bits(family.bits)?;
    if let Some((id, _)) = entries.iter().find(|(_, s)| s.family() != family) {
        return Err(Error::Cache(format!(
            "set {id} was signed by a different family"
        )));
    }
    let mut header = Vec::with_capacity(40);
    header.extend_from_slice(MAGIC);
    let b_bit = family.bits != FULL_BITS;
    header.extend_from_slice(&if b_bit { VERSION_B_BIT } else { VERSION_FULL }.to_le_bytes());
    header.extend_from_slice(&(family.k as u64).to_le_bytes());
    header.extend_from_slice(&family.master_seed.to_le_bytes());
    if b_bit {
        header.extend_from_slice(&family.bits.to_le_bytes());
    }
    header.extend_from_slice(&(entries.len() as u64).to_le_bytes());
    out.write_all(&header).map_err(io_err)?;

    let width = slot_bytes(family.bits);
    let mut buf = Vec::with_capacity(8 + family.k * width);
    for (id, sig) in entries {
        buf.clear();
        buf.extend_from_slice(&id.to_le_bytes());
        for v in sig.values() {
            buf.extend_from_slice(&v.to_le_bytes()[..width]);
        }
        out.write_all(&buf).map_err(io_err)?;
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(io_err)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(io_err)?;
    Ok(u64::from_le_bytes(b))
}

/// Reads a cache written by [`write_cache`].
pub fn read_cache<R: Read>(mut input: R) -> Result<(FamilyId, Vec<(u64, Signature)>)> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic).map_err(io_err)?;
    if &magic != MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let version = read_u32(&mut input)?;
    let k = read_u64(&mut input)? as usize;
    let master_seed = read_u64(&mut input)?;
    let bits = match version {
        VERSION_FULL => FULL_BITS,
        VERSION_B_BIT => read_u32(&mut input)?,
        v => return Err(Error::Cache(format!("unsupported version {v}"))),
    };
    validate_bits(bits)?;
    if k == 0 {
        return Err(Error::Cache("k = 0".into()));
    }
    let family = FamilyId {
        master_seed,
        k,
        bits,
    };
    let count = read_u64(&mut input)?;

    let width = slot_bytes(bits);
    let mut row = vec![0u8; k * width];
    let mut entries = Vec::new();
    for _ in 0..count {
        let id = read_u64(&mut input)?;
        input.read_exact(&mut row).map_err(io_err)?;
        let values = row
            .chunks_exact(width)
            .map(|c| {
                let mut b = [0u8; 8];
                b[..width].copy_from_slice(c);
                u64::from_le_bytes(b)
            })
            .collect();
        entries.push((id, Signature::from_parts(family, values)?));
    }
    let mut trailing = [0u8; 1];
    if input.read(&mut trailing).map_err(io_err)? != 0 {
        return Err(Error::Cache("trailing bytes after last set".into()));
    }
    Ok((family, entries))
}
