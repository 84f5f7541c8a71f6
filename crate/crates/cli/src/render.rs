//! Text rendering shared by the human report format.

use num_bigint::BigInt;
use num_traits::Signed;
use thetalab::arith::factor;
use thetalab::exactnum::{decimal_string, eval_interval, format_rational, Interval, LogValue, Rational};

/// Significant digits of the `≈` midpoint.
pub const APPROX_DIGITS: usize = 12;

/// The exact value followed by its interval midpoint.
pub fn log_value(v: &LogValue, bits: u32) -> String {
    let iv = eval_interval(v, bits);
    format!("{v}  ≈ {}", decimal_string(&iv.midpoint(), APPROX_DIGITS))
}

/// Outward-rounded decimal enclosure with `places` fractional digits.
pub fn enclosure(iv: &Interval, places: u32) -> String {
    let scale = Rational::from_integer(BigInt::from(10u32).pow(places));
    let fixed = |n: BigInt| {
        let neg = n.is_negative();
        let s = format!("{:0>w$}", n.abs().to_string(), w = places as usize + 1);
        let (a, b) = s.split_at(s.len() - places as usize);
        format!("{}{a}.{b}", if neg { "-" } else { "" })
    };
    let lo = (iv.lower() * &scale).floor().to_integer();
    let hi = (iv.upper() * &scale).ceil().to_integer();
    format!("[{}, {}]", fixed(lo), fixed(hi))
}

/// `d0.d1,d2,…`, least significant digit first.
pub fn digit_line(digits: &[u64]) -> String {
    let s: Vec<String> = digits.iter().map(u64::to_string).collect();
    match s.split_first() {
        None => String::new(),
        Some((d0, rest)) => format!("{d0}.{}", rest.join(",")),
    }
}

fn factored_int(n: &BigInt) -> String {
    if n.abs() <= BigInt::from(1) {
        return n.to_string();
    }
    let parts: Vec<String> = factor(&n.abs())
        .into_iter()
        .map(|(p, e)| if e == 1 { p.to_string() } else { format!("{p}^{e}") })
        .collect();
    let body = parts.join("·");
    if n.is_negative() {
        format!("-{body}")
    } else {
        body
    }
}

/// `-2^12·31^3/11^5`; plain fraction when a factor would be too large.
pub fn factored(r: &Rational) -> String {
    if r.numer().bits() > 128 || r.denom().bits() > 128 {
        return format_rational(r);
    }
    let n = factored_int(r.numer());
    if r.denom() == &BigInt::from(1) {
        n
    } else {
        format!("{n}/{}", factored_int(r.denom()))
    }
}

/// Left-aligned columns separated by two spaces.
pub fn table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, s)| format!("{s:<w$}", w = widths[c]))
            .collect();
        out += "  ";
        out += line.join("  ").trim_end();
        out += "\n";
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use thetalab::exactnum::rat;

    #[test]
    fn formats() {
        assert_eq!(digit_line(&[0, 0, 10, 2]), "0.0,10,2");
        let j = Rational::new(BigInt::from(-(1i64 << 12) * 31 * 31 * 31), BigInt::from(161051));
        assert_eq!(factored(&j), "-2^12·31^3/11^5");
        assert_eq!(factored(&rat(7, 1)), "7");
        let v = LogValue::ln_scaled(11, rat(-5, 26));
        assert_eq!(log_value(&v, 64), "(-5/26)·ln 11  ≈ -0.461133706307");
        let iv = eval_interval(&v, 64);
        assert_eq!(enclosure(&iv, 15), "[-0.461133706307379, -0.461133706307378]");
        assert_eq!(enclosure(&Interval::new(rat(1, 3), rat(1, 2)), 2), "[0.33, 0.50]");
    }
}
