//! Output formatting: CSV tables and flat key-value report files.
//!
//! Numbers are printed with 12 significant digits, decimal where the
//! magnitude permits and scientific otherwise, with trailing zeros trimmed
//! so identical inputs yield byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;

const SIG_DIGITS: usize = 12;

/// Format with 12 significant digits, `%g`-style.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let formatted = format!("{:.*e}", SIG_DIGITS - 1, x);
    // Split "d.dddddddddddde±XX" into mantissa digits and exponent.
    let (mantissa, exp) = formatted.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("exponent");
    let neg = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let sign = if neg { "-" } else { "" };

    let body = if (-4..SIG_DIGITS as i32).contains(&exp) {
        // Decimal notation.
        let point = exp + 1; // digits before the decimal point
        let mut s = String::new();
        if point <= 0 {
            s.push_str("0.");
            for _ in 0..(-point) {
                s.push('0');
            }
            s.push_str(&digits);
        } else if (point as usize) >= digits.len() {
            s.push_str(&digits);
            for _ in 0..(point as usize - digits.len()) {
                s.push('0');
            }
        } else {
            s.push_str(&digits[..point as usize]);
            s.push('.');
            s.push_str(&digits[point as usize..]);
        }
        trim_fraction(s)
    } else {
        let mut mant = String::new();
        mant.push_str(&digits[..1]);
        mant.push('.');
        mant.push_str(&digits[1..]);
        format!("{}e{}", trim_fraction(mant), exp)
    };
    format!("{sign}{body}")
}

fn trim_fraction(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

/// Write a CSV with a header row and numeric cells.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| fmt_sig(v)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Write a flat `key = value` report file.
pub fn write_kv(path: &Path, pairs: &[(&str, String)]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for (k, v) in pairs {
        writeln!(out, "{k} = {v}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_plain_decimals() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(0.25), "0.25");
        assert_eq!(fmt_sig(-0.5), "-0.5");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(500.0), "500");
        assert_eq!(fmt_sig(123456.789), "123456.789");
    }

    #[test]
    fn formats_extremes_scientifically() {
        assert_eq!(fmt_sig(1e-7), "1e-7");
        assert_eq!(fmt_sig(3.25e14), "3.25e14");
        assert_eq!(fmt_sig(-2e-12), "-2e-12");
    }

    #[test]
    fn keeps_twelve_significant_digits() {
        assert_eq!(fmt_sig(0.783712345678), "0.783712345678");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
    }

    #[test]
    fn round_trips_after_one_quantization() {
        let mut seed = 17u64;
        for _ in 0..200 {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let x = ((seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 1e3;
            let once: f64 = fmt_sig(x).parse().unwrap();
            let twice: f64 = fmt_sig(once).parse().unwrap();
            assert_eq!(once, twice);
        }
    }
}
