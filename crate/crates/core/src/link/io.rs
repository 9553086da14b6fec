//! Text interchange for detected waveforms and bit streams.
//!
//! Sliced signals are CSV: a `#`-prefixed metadata line
//! (`n_slices`, `sps`, `sample_rate`, `alignment`), a column header, then one
//! row per sample. Floats use the shortest round-trip representation so a
//! write/read cycle is lossless.

use super::SlicedSignal;
use crate::dsp::RealSequence;
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};

pub fn write_sliced<W: Write>(signal: &SlicedSignal, mut out: W) -> Result<()> {
    let n = signal.n_slices();
    let mut text = format!(
        "# n_slices={} sps={} sample_rate={} alignment={}\n",
        n,
        signal.sps(),
        signal.sample_rate(),
        signal.symbol_alignment()
    );
    let header: Vec<String> = (0..n).map(|i| format!("slice{i}")).collect();
    text.push_str(&header.join(","));
    text.push('\n');
    for i in 0..signal.len() {
        for (j, s) in signal.slices().iter().enumerate() {
            if j > 0 {
                text.push(',');
            }
            write!(text, "{}", s.samples()[i]).expect("writing to a String");
        }
        text.push('\n');
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn meta_value<T: std::str::FromStr>(line: &str, key: &str) -> Result<T> {
    line.split_whitespace()
        .filter_map(|kv| kv.split_once('='))
        .find(|(k, _)| *k == key)
        .and_then(|(_, v)| v.parse().ok())
        .ok_or_else(|| Error::format("sliced signal", format!("missing or invalid `{key}`")))
}

pub fn read_sliced<R: Read>(input: R) -> Result<SlicedSignal> {
    let mut lines = BufReader::new(input).lines();
    let meta = lines
        .next()
        .transpose()?
        .filter(|l| l.starts_with('#'))
        .ok_or_else(|| Error::format("sliced signal", "missing metadata line"))?;
    let n: usize = meta_value(&meta, "n_slices")?;
    let sps: usize = meta_value(&meta, "sps")?;
    let rate: f64 = meta_value(&meta, "sample_rate")?;
    let alignment: usize = meta_value(&meta, "alignment")?;
    lines
        .next()
        .transpose()?
        .ok_or_else(|| Error::format("sliced signal", "missing column header"))?;
    let mut columns = vec![Vec::new(); n];
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != n {
            return Err(Error::format(
                "sliced signal",
                format!("row {} has {} columns, expected {n}", row + 1, fields.len()),
            ));
        }
        for (col, f) in columns.iter_mut().zip(fields) {
            col.push(f.trim().parse::<f64>().map_err(|e| {
                Error::format("sliced signal", format!("row {}: {e}", row + 1))
            })?);
        }
    }
    let slices = columns
        .into_iter()
        .map(|c| RealSequence::new(c, rate))
        .collect::<Result<Vec<_>>>()?;
    SlicedSignal::new(slices, sps, alignment)
}

/// Bits as a single line of `0`/`1` characters.
pub fn write_bits<W: Write>(bits: &[u8], mut out: W) -> Result<()> {
    let mut s: String = bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect();
    s.push('\n');
    out.write_all(s.as_bytes())?;
    Ok(())
}

pub fn read_bits<R: Read>(mut input: R) -> Result<Vec<u8>> {
    let mut s = String::new();
    input.read_to_string(&mut s)?;
    s.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(Error::format("bits", format!("unexpected character {other:?}"))),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{generate_bits, make_prng};
    use crate::link::{simulate_link, LinkConfig};

    #[test]
    fn sliced_round_trip_is_exact() {
        let cfg = LinkConfig {
            fiber_length_km: 20.0,
            snr_db: 12.0,
            ..LinkConfig::default()
        };
        let bits = generate_bits(&mut make_prng(1), 64).unwrap();
        let s = simulate_link(&bits, &cfg, &mut make_prng(2)).unwrap();
        let mut buf = Vec::new();
        write_sliced(&s, &mut buf).unwrap();
        let back = read_sliced(buf.as_slice()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(read_sliced("".as_bytes()).is_err());
        assert!(read_sliced("# n_slices=2 sps=8 sample_rate=1 alignment=0\na,b\n1.0\n".as_bytes()).is_err());
        assert!(read_sliced("# n_slices=1 sps=8 alignment=0\na\n1\n".as_bytes()).is_err());
        assert!(read_bits("0102".as_bytes()).is_err());
    }

    #[test]
    fn bits_round_trip() {
        let bits = generate_bits(&mut make_prng(3), 1000).unwrap();
        let mut buf = Vec::new();
        write_bits(&bits, &mut buf).unwrap();
        assert_eq!(read_bits(buf.as_slice()).unwrap(), bits);
    }
}
