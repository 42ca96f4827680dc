//! Frame files: a plain concatenation of `u32` big-endian length-prefixed
//! frames, and a classic pcap export with one record per frame.

use std::io::{self, Read, Write};

/// pcap link type for private use; dissectors treat the record as raw bytes.
pub const LINKTYPE_USER0: u32 = 147;

pub fn write_frames_file<W: Write>(mut w: W, frames: &[Vec<u8>]) -> io::Result<()> {
    for f in frames {
        w.write_all(&(f.len() as u32).to_be_bytes())?;
        w.write_all(f)?;
    }
    w.flush()
}

pub fn read_frames_file<R: Read>(mut r: R) -> io::Result<Vec<Vec<u8>>> {
    let mut all = Vec::new();
    r.read_to_end(&mut all)?;
    let mut frames = Vec::new();
    let mut rest = all.as_slice();
    while !rest.is_empty() {
        let bad = || io::Error::new(io::ErrorKind::InvalidData, "truncated frames file");
        let len = u32::from_be_bytes(rest.get(..4).ok_or_else(bad)?.try_into().expect("4 bytes"))
            as usize;
        let frame = rest.get(4..4 + len).ok_or_else(bad)?;
        frames.push(frame.to_vec());
        rest = &rest[4 + len..];
    }
    Ok(frames)
}

/// Little-endian pcap 2.4 with microsecond timestamps. `times` holds the
/// emission time of each frame in microseconds.
pub fn write_pcap<W: Write>(mut w: W, frames: &[Vec<u8>], times: &[u64]) -> io::Result<()> {
    w.write_all(&0xa1b2c3d4u32.to_le_bytes())?;
    w.write_all(&2u16.to_le_bytes())?;
    w.write_all(&4u16.to_le_bytes())?;
    w.write_all(&0i32.to_le_bytes())?;
    w.write_all(&0u32.to_le_bytes())?;
    w.write_all(&65535u32.to_le_bytes())?;
    w.write_all(&LINKTYPE_USER0.to_le_bytes())?;
    for (i, f) in frames.iter().enumerate() {
        let t = times.get(i).copied().unwrap_or(0);
        w.write_all(&((t / 1_000_000) as u32).to_le_bytes())?;
        w.write_all(&((t % 1_000_000) as u32).to_le_bytes())?;
        w.write_all(&(f.len() as u32).to_le_bytes())?;
        w.write_all(&(f.len() as u32).to_le_bytes())?;
        w.write_all(f)?;
    }
    w.flush()
}
