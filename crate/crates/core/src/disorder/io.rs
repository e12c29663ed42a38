//! Plain-text coefficient tables and binary line-potential dumps.

use std::io::{BufRead, Write};

use num_complex::Complex;

use super::LinePotential;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::series::HarmonicSeries;

/// Writes `k Re Im` rows, one per retained harmonic, after a `#` header.
pub fn write_coefficients<T: Real, W: Write>(series: &HarmonicSeries<T>, label: &str, mut out: W) -> Result<()> {
    writeln!(out, "# {label}")?;
    writeln!(out, "# k re im")?;
    for (k, z) in series.iter() {
        writeln!(out, "{k} {:e} {:e}", z.re, z.im)?;
    }
    Ok(())
}

/// Reads a table produced by [`write_coefficients`].
pub fn read_coefficients<T: Real, R: BufRead>(input: R) -> Result<HarmonicSeries<T>> {
    let mut rows = Vec::new();
    for line in input.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let mut field = |name: &str| {
            it.next().ok_or_else(|| Error::Format(format!("missing {name} in `{line}`")))
        };
        let k: i64 = field("k")?.parse().map_err(|e| Error::Format(format!("k: {e}")))?;
        let re: f64 = field("re")?.parse().map_err(|e| Error::Format(format!("re: {e}")))?;
        let im: f64 = field("im")?.parse().map_err(|e| Error::Format(format!("im: {e}")))?;
        rows.push((k, Complex::new(T::lit(re), T::lit(im))));
    }
    let cutoff = rows.iter().map(|(k, _)| k.unsigned_abs() as usize).max().unwrap_or(0);
    let mut series = HarmonicSeries::zeros(cutoff);
    for (k, z) in rows {
        series.set(k, z);
    }
    Ok(series)
}

const MAGIC: &str = "# timeloc line-potential v1";

impl LinePotential<f64> {
    /// Text header (`key value` lines closed by `end`) followed by the
    /// samples as little-endian `f64`.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{MAGIC}")?;
        writeln!(out, "h {:e}", self.h)?;
        writeln!(out, "length {:e}", self.length)?;
        writeln!(out, "v {:e}", self.v)?;
        writeln!(out, "k0 {:e}", self.k0)?;
        writeln!(out, "seed {}", self.seed)?;
        writeln!(out, "count {}", self.samples.len())?;
        writeln!(out, "end")?;
        for x in &self.samples {
            out.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: BufRead>(mut input: R) -> Result<Self> {
        let mut line = String::new();
        input.read_line(&mut line)?;
        if line.trim_end() != MAGIC {
            return Err(Error::Format("not a line-potential file".into()));
        }
        let (mut h, mut length, mut v, mut k0, mut seed, mut count) = (None, None, None, None, None, None);
        loop {
            line.clear();
            if input.read_line(&mut line)? == 0 {
                return Err(Error::Format("header not terminated".into()));
            }
            let l = line.trim_end();
            if l == "end" {
                break;
            }
            let (key, value) = l.split_once(' ').ok_or_else(|| Error::Format(format!("bad header line `{l}`")))?;
            let num = || value.parse::<f64>().map_err(|e| Error::Format(format!("{key}: {e}")));
            match key {
                "h" => h = Some(num()?),
                "length" => length = Some(num()?),
                "v" => v = Some(num()?),
                "k0" => k0 = Some(num()?),
                "seed" => seed = Some(value.parse::<u64>().map_err(|e| Error::Format(format!("seed: {e}")))?),
                "count" => count = Some(value.parse::<usize>().map_err(|e| Error::Format(format!("count: {e}")))?),
                _ => return Err(Error::Format(format!("unknown header key `{key}`"))),
            }
        }
        let missing = |k: &str| Error::Format(format!("header lacks `{k}`"));
        let count = count.ok_or_else(|| missing("count"))?;
        let mut bytes = vec![0u8; count * 8];
        input.read_exact(&mut bytes)?;
        let samples = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok(Self {
            samples,
            h: h.ok_or_else(|| missing("h"))?,
            length: length.ok_or_else(|| missing("length"))?,
            v: v.ok_or_else(|| missing("v"))?,
            k0: k0.ok_or_else(|| missing("k0"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::{synthesize_drive, synthesize_line_potential, DriveSpec};

    #[test]
    fn coefficient_table_round_trip() {
        let drive = synthesize_drive(&DriveSpec::new(5.0_f64, 2)).unwrap();
        let mut buf = Vec::new();
        write_coefficients(&drive.f, "drive", &mut buf).unwrap();
        let back: HarmonicSeries<f64> = read_coefficients(&buf[..]).unwrap();
        assert_eq!(back, drive.f);
    }

    #[test]
    fn line_binary_round_trip() {
        let p = synthesize_line_potential(10.0_f64, 2.0, 15.0, 0.01, 3).unwrap();
        let mut buf = Vec::new();
        p.write_binary(&mut buf).unwrap();
        assert_eq!(LinePotential::read_binary(&buf[..]).unwrap(), p);
        assert!(LinePotential::read_binary(&b"garbage\n"[..]).is_err());
    }
}
