//! On-disk permutation formats.
//!
//! Text: one permutation per line, values separated by single spaces.
//! Binary: per permutation a little-endian `u32` length followed by that
//! many little-endian `u32` values.

use std::io::{self, BufRead, Read, Write};

use super::Permutation;
use crate::error::{Error, Result};

pub fn write_text<W: Write>(out: &mut W, perms: &[Permutation]) -> io::Result<()> {
    for p in perms {
        writeln!(out, "{p}")?;
    }
    Ok(())
}

pub fn read_text<R: BufRead>(input: R) -> Result<Vec<Permutation>> {
    let mut perms = Vec::new();
    for line in input.lines() {
        let line = line.map_err(|e| Error::Parse(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        perms.push(line.parse()?);
    }
    Ok(perms)
}

pub fn write_binary<W: Write>(out: &mut W, perms: &[Permutation]) -> io::Result<()> {
    for p in perms {
        out.write_all(&(p.n() as u32).to_le_bytes())?;
        for &v in p.values() {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> Result<Vec<Permutation>> {
    let mut bytes = Vec::new();
    input
        .read_to_end(&mut bytes)
        .map_err(|e| Error::Parse(e.to_string()))?;
    let mut words = bytes.chunks_exact(4);
    if !words.remainder().is_empty() {
        return Err(Error::Parse("trailing bytes in binary stream".into()));
    }
    let mut perms = Vec::new();
    while let Some(len) = words.next() {
        let n = u32::from_le_bytes(len.try_into().unwrap()) as usize;
        let values = (0..n)
            .map(|_| {
                words
                    .next()
                    .map(|w| u32::from_le_bytes(w.try_into().unwrap()))
                    .ok_or_else(|| Error::Parse("truncated permutation".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        perms.push(Permutation::from_one_line(values)?);
    }
    Ok(perms)
}
