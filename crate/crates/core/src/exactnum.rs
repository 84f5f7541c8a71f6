//! Exact rationals and formal logarithm values.
//!
//! A [`LogValue`] is a finite formal sum `Σ c_p·ln p + a` with rational
//! `c_p` and rational archimedean part `a`. Degrees of Arakelov divisors and
//! normalized log-volumes both land here, so identities between them are
//! decided exactly. Ordering of non-equal values goes through rational
//! interval enclosures of `ln p`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer as _;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Integer = BigInt;
pub type Rational = BigRational;

/// Default cap on the number of binary digits used by [`compare`].
pub const DEFAULT_PRECISION_CAP: u32 = 256;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseRationalError {
    #[error("malformed rational `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Shorthand for the rational `n/d`. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"n"` or `"n/d"` (surrounding whitespace allowed).
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let t = s.trim();
    let bad = || ParseRationalError::Malformed(s.to_string());
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(ParseRationalError::ZeroDenominator(s.to_string()));
    }
    Ok(Rational::new(n, d))
}

/// Sum of `±x` terms, reduced once at the end instead of after every
/// addition. `Sum` for `Rational` reduces at each step.
pub fn sum_signed<'a>(terms: impl IntoIterator<Item = (bool, &'a Rational)>) -> Rational {
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for (negate, x) in terms {
        let n = if negate { -x.numer() } else { x.numer().clone() };
        if x.denom() == &den {
            num += n;
        } else if x.denom().is_one() {
            num += n * &den;
        } else {
            num = num * x.denom() + n * &den;
            den *= x.denom();
        }
    }
    Rational::new(num, den)
}

/// `"n/d"` in lowest terms, or `"n"` when the denominator is 1.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Serde adapter storing a [`Rational`] as a `"num/den"` string.
pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Same as [`rational_str`] for sequences.
pub mod rational_vec_str {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Closed interval with rational endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    lower: Rational,
    upper: Rational,
}

impl Interval {
    pub fn new(lower: Rational, upper: Rational) -> Self {
        assert!(lower <= upper, "interval endpoints out of order");
        Interval { lower, upper }
    }

    pub fn point(x: Rational) -> Self {
        Interval {
            lower: x.clone(),
            upper: x,
        }
    }

    pub fn lower(&self) -> &Rational {
        &self.lower
    }

    pub fn upper(&self) -> &Rational {
        &self.upper
    }

    pub fn width(&self) -> Rational {
        &self.upper - &self.lower
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lower + &self.upper) / int(2)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lower <= x && x <= &self.upper
    }

    /// True when `other` lies inside `self`.
    pub fn encloses(&self, other: &Interval) -> bool {
        self.lower <= other.lower && other.upper <= self.upper
    }

    pub fn scale(&self, c: &Rational) -> Interval {
        let a = &self.lower * c;
        let b = &self.upper * c;
        if a <= b {
            Interval { lower: a, upper: b }
        } else {
            Interval { lower: b, upper: a }
        }
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Interval", 2)?;
        st.serialize_field("lower", &format_rational(&self.lower))?;
        st.serialize_field("upper", &format_rational(&self.upper))?;
        st.end()
    }
}

impl Add for &Interval {
    type Output = Interval;
    fn add(self, o: &Interval) -> Interval {
        Interval {
            lower: &self.lower + &o.lower,
            upper: &self.upper + &o.upper,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}]",
            format_rational(&self.lower),
            format_rational(&self.upper)
        )
    }
}

/// Formal `Σ c_p·ln p + arch`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LogValue {
    terms: BTreeMap<u64, Rational>,
    arch: Rational,
}

impl LogValue {
    pub fn zero() -> Self {
        LogValue::default()
    }

    /// `ln p`. The caller is responsible for `p` being prime.
    pub fn ln(p: u64) -> Self {
        LogValue::ln_scaled(p, Rational::one())
    }

    /// `c·ln p`.
    pub fn ln_scaled(p: u64, c: Rational) -> Self {
        let mut v = LogValue::zero();
        v.add_term(p, c);
        v
    }

    /// A purely archimedean value.
    pub fn arch(a: Rational) -> Self {
        LogValue {
            terms: BTreeMap::new(),
            arch: a,
        }
    }

    pub fn from_parts(terms: impl IntoIterator<Item = (u64, Rational)>, arch: Rational) -> Self {
        let mut v = LogValue::arch(arch);
        for (p, c) in terms {
            v.add_term(p, c);
        }
        v
    }

    fn add_term(&mut self, p: u64, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(p).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&p);
        }
    }

    /// Coefficient of `ln p` (zero when absent).
    pub fn coeff(&self, p: u64) -> Rational {
        self.terms.get(&p).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> &BTreeMap<u64, Rational> {
        &self.terms
    }

    pub fn archimedean(&self) -> &Rational {
        &self.arch
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.arch.is_zero()
    }

    /// Primes carrying a nonzero coefficient.
    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.terms.keys().copied()
    }

    pub fn scale(&self, c: &Rational) -> LogValue {
        logvalue_combine(&LogValue::zero(), c, self)
    }
}

/// `a + c·b`, with zero coefficients dropped.
pub fn logvalue_combine(a: &LogValue, c: &Rational, b: &LogValue) -> LogValue {
    let mut out = a.clone();
    if c.is_zero() {
        return out;
    }
    for (p, x) in &b.terms {
        out.add_term(*p, x * c);
    }
    out.arch += &b.arch * c;
    out
}

impl Add for &LogValue {
    type Output = LogValue;
    fn add(self, o: &LogValue) -> LogValue {
        logvalue_combine(self, &Rational::one(), o)
    }
}

impl Add for LogValue {
    type Output = LogValue;
    fn add(self, o: LogValue) -> LogValue {
        &self + &o
    }
}

impl Sub for &LogValue {
    type Output = LogValue;
    fn sub(self, o: &LogValue) -> LogValue {
        logvalue_combine(self, &-Rational::one(), o)
    }
}

impl Sub for LogValue {
    type Output = LogValue;
    fn sub(self, o: LogValue) -> LogValue {
        &self - &o
    }
}

impl Neg for &LogValue {
    type Output = LogValue;
    fn neg(self) -> LogValue {
        self.scale(&-Rational::one())
    }
}

impl Neg for LogValue {
    type Output = LogValue;
    fn neg(self) -> LogValue {
        -&self
    }
}

impl Mul<&Rational> for &LogValue {
    type Output = LogValue;
    fn mul(self, c: &Rational) -> LogValue {
        self.scale(c)
    }
}

impl std::iter::Sum for LogValue {
    fn sum<I: Iterator<Item = LogValue>>(iter: I) -> LogValue {
        iter.fold(LogValue::zero(), |acc, x| &acc + &x)
    }
}

impl fmt::Display for LogValue {
    /// `(5/26)·ln 11 + ln 2 + 3`; zero prints as `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (p, c) in &self.terms {
            if c.is_one() {
                parts.push(format!("ln {p}"));
            } else if *c == -Rational::one() {
                parts.push(format!("-ln {p}"));
            } else {
                parts.push(format!("({})·ln {p}", format_rational(c)));
            }
        }
        if !self.arch.is_zero() || parts.is_empty() {
            parts.push(format_rational(&self.arch));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LogValueRepr {
    ln_terms: BTreeMap<String, String>,
    arch: String,
}

impl Serialize for LogValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        LogValueRepr {
            ln_terms: self
                .terms
                .iter()
                .map(|(p, c)| (p.to_string(), format_rational(c)))
                .collect(),
            arch: format_rational(&self.arch),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LogValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let r = LogValueRepr::deserialize(d)?;
        let arch = parse_rational(&r.arch).map_err(D::Error::custom)?;
        let mut terms = Vec::new();
        for (p, c) in &r.ln_terms {
            let p: u64 = p
                .parse()
                .map_err(|_| D::Error::custom(format!("bad prime key `{p}`")))?;
            if !crate::arith::is_prime(p) {
                return Err(D::Error::custom(format!("ln_terms key {p} is not prime")));
            }
            terms.push((p, parse_rational(c).map_err(D::Error::custom)?));
        }
        Ok(LogValue::from_parts(terms, arch))
    }
}

fn pow2(k: u32) -> BigInt {
    BigInt::one() << k
}

/// `2·atanh(num/den)` enclosed to absolute error below `2^-bits`, as an
/// approximation plus error bound. Requires `0 ≤ num/den ≤ 1/3`.
fn two_atanh(num: &BigInt, den: &BigInt, bits: u32) -> (Rational, Rational) {
    let y = Rational::new(num.clone(), den.clone());
    let y2 = &y * &y;
    let eps = Rational::new(BigInt::one(), pow2(bits));
    let mut sum = Rational::zero();
    let mut power = y.clone();
    let mut k: u64 = 0;
    // Tail after the term y^(2k+1)/(2k+1) is bounded by
    // 2·y^(2k+3)/(2k+3)/(1-y²); with y ≤ 1/3 the factor 1/(1-y²) ≤ 9/8.
    loop {
        sum += &power / int(2 * k as i64 + 1);
        power = &power * &y2;
        let tail = &power * rat(9, 4) / int(2 * k as i64 + 3);
        k += 1;
        if tail < eps || power.is_zero() {
            return (sum * int(2), tail);
        }
    }
}

/// Rational enclosure of `ln p` of width `3·2^-(precision+2)`.
///
/// The interval is `[m/2^s − 2^-s, m/2^s + 2^-s·2]` where `s = precision+2`
/// and `m/2^s` is `ln p` rounded down from an approximation accurate to
/// `2^-(s+2)`; widths therefore halve exactly with each extra bit.
pub fn ln_prime_interval(p: u64, precision: u32) -> Interval {
    assert!(p >= 2, "ln of {p}");
    let s = precision + 2;
    let k = 63 - p.leading_zeros();
    let work = s + 4 + (32 - k.max(1).leading_zeros());
    let (ln2, e2) = two_atanh(&BigInt::one(), &BigInt::from(3), work);
    let pb = BigInt::from(p);
    let base = pow2(k);
    let (lnx, ex) = two_atanh(&(&pb - &base), &(&pb + &base), work);
    let approx = ln2 * int(k as i64) + lnx;
    let err = e2 * int(k as i64) + ex;
    debug_assert!(err < Rational::new(BigInt::one(), pow2(s + 2)));
    let scaled = approx * Rational::from_integer(pow2(s));
    let m = scaled.floor().to_integer();
    let unit = Rational::new(BigInt::one(), pow2(s));
    let center = Rational::new(m, pow2(s));
    Interval::new(&center - &unit, center + unit * int(2))
}

/// Enclosure of `v` using [`ln_prime_interval`] at the given precision.
pub fn eval_interval(v: &LogValue, precision: u32) -> Interval {
    assert!(precision >= 1, "precision must be positive");
    let mut acc = Interval::point(v.arch.clone());
    for (p, c) in &v.terms {
        acc = &acc + &ln_prime_interval(*p, precision).scale(c);
    }
    acc
}

/// Outcome of [`compare`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogOrdering {
    Less,
    Equal,
    Greater,
    /// Intervals still overlapped at the carried precision cap.
    Unresolved(u32),
}

impl LogOrdering {
    pub fn reverse(self) -> Self {
        match self {
            LogOrdering::Less => LogOrdering::Greater,
            LogOrdering::Greater => LogOrdering::Less,
            o => o,
        }
    }

    fn from_ord(o: Ordering) -> Self {
        match o {
            Ordering::Less => LogOrdering::Less,
            Ordering::Equal => LogOrdering::Equal,
            Ordering::Greater => LogOrdering::Greater,
        }
    }
}

/// [`compare_with_cap`] at [`DEFAULT_PRECISION_CAP`].
pub fn compare(a: &LogValue, b: &LogValue) -> LogOrdering {
    compare_with_cap(a, b, DEFAULT_PRECISION_CAP)
}

/// Orders two log values. Formally equal values are `Equal`; otherwise the
/// difference is evaluated at 16, 32, 64, … bits up to `cap`.
pub fn compare_with_cap(a: &LogValue, b: &LogValue, cap: u32) -> LogOrdering {
    let d = a - b;
    if d.terms.is_empty() {
        return LogOrdering::from_ord(d.arch.cmp(&Rational::zero()));
    }
    if d.terms.len() == 1 && d.arch.is_zero() {
        let c = d.terms.values().next().unwrap();
        return LogOrdering::from_ord(c.cmp(&Rational::zero()));
    }
    let cap = cap.max(1);
    let mut prec = 16.min(cap);
    loop {
        let iv = eval_interval(&d, prec);
        if iv.lower().is_positive() {
            return LogOrdering::Greater;
        }
        if iv.upper().is_negative() {
            return LogOrdering::Less;
        }
        if prec >= cap {
            return LogOrdering::Unresolved(cap);
        }
        prec = (prec * 2).min(cap);
    }
}

/// Decimal rendering of `x` with `digits` significant digits (truncated
/// toward zero), e.g. `-0.461133706311` for `-(5/26)·ln 11`.
pub fn decimal_string(x: &Rational, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let neg = x.is_negative();
    let a = x.abs();
    let mut exp10: i64 = 0;
    let ten = int(10);
    let mut m = a.clone();
    while m >= ten {
        m /= &ten;
        exp10 += 1;
    }
    while m < Rational::one() {
        m *= &ten;
        exp10 -= 1;
    }
    let scale = BigInt::from(10u32).pow(digits.saturating_sub(1) as u32);
    let mant = (m * Rational::from_integer(scale)).floor().to_integer();
    let mut ds = mant.to_string();
    while ds.len() < digits {
        ds.push('0');
    }
    let point = exp10 + 1;
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), ds)
    } else if point as usize >= ds.len() {
        format!("{}{}", ds, "0".repeat(point as usize - ds.len()))
    } else {
        format!("{}.{}", &ds[..point as usize], &ds[point as usize..])
    };
    let body = if body.contains('.') {
        body.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        body
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

/// Nearest `f64` to a rational (for display only).
pub fn to_f64(x: &Rational) -> f64 {
    let (n, d) = (x.numer(), x.denom());
    match (n.to_f64(), d.to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
        _ => {
            let shift = n.bits().max(d.bits()).saturating_sub(900);
            let n2: BigInt = n >> shift;
            let d2: BigInt = d >> shift;
            n2.to_f64().unwrap_or(0.0) / d2.to_f64().unwrap_or(1.0)
        }
    }
}

/// `p`-adic valuation of a nonzero integer.
pub fn int_valuation(n: &BigInt, p: u64) -> u32 {
    assert!(!n.is_zero(), "valuation of zero");
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

/// `p`-adic valuation of a nonzero rational.
pub fn rat_valuation(x: &Rational, p: u64) -> i64 {
    int_valuation(x.numer(), p) as i64 - int_valuation(x.denom(), p) as i64
}

pub fn sign_of(x: &BigInt) -> i32 {
    match x.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Oracle: ln 2 = Σ 1/(k·2^k), tail after n terms ≤ 1/(n·2^n).
    fn ln2_oracle(n: u32) -> (Rational, Rational) {
        let mut s = Rational::zero();
        for k in 1..=n {
            s += Rational::new(BigInt::one(), BigInt::from(k) * pow2(k));
        }
        let tail = Rational::new(BigInt::one(), BigInt::from(n) * pow2(n));
        (s, tail)
    }

    #[test]
    fn combine_examples() {
        let z = LogValue::zero();
        assert_eq!(logvalue_combine(&z, &int(1), &z), z);
        let l2 = LogValue::ln(2);
        assert_eq!(logvalue_combine(&l2, &int(1), &l2), LogValue::ln_scaled(2, int(2)));
        let q = LogValue::ln_scaled(11, rat(5, 26));
        let c = logvalue_combine(&q, &int(-1), &q);
        assert!(c.is_zero());
        assert!(c.terms().is_empty());
    }

    #[test]
    fn ln2_interval_contains_oracle() {
        let iv = eval_interval(&LogValue::ln(2), 10);
        let (s, t) = ln2_oracle(80);
        assert!(iv.lower() <= &s && &(&s + &t) <= iv.upper());
        assert!(iv.contains(&rat(693147, 1_000_000)));
        assert!(iv.width() < rat(1, 1024));
    }

    #[test]
    fn ln11_scaled_interval() {
        let v = LogValue::ln_scaled(11, rat(-5, 26));
        let iv = eval_interval(&v, 20);
        // ln 11 = 2.397895272798...; times 5/26 = 0.461133706...
        assert!(iv.contains(&rat(-461133706, 1_000_000_000)));
        assert!(iv.width() < rat(1, 1 << 19));
    }

    #[test]
    fn ln_primes_against_float() {
        for p in [2u64, 3, 5, 7, 11, 13, 97, 65537, 1_000_000_007] {
            let iv = ln_prime_interval(p, 40);
            let m = to_f64(&iv.midpoint());
            assert!((m - (p as f64).ln()).abs() < 1e-9, "p = {p}");
        }
    }

    #[test]
    fn width_halves_exactly() {
        let v = LogValue::from_parts([(2, rat(3, 7)), (13, rat(-2, 5))], rat(1, 3));
        for prec in 1..40 {
            let a = eval_interval(&v, prec).width();
            let b = eval_interval(&v, prec + 1).width();
            assert_eq!(a, b * int(2));
        }
    }

    #[test]
    fn compare_examples() {
        assert_eq!(compare(&LogValue::zero(), &LogValue::zero()), LogOrdering::Equal);
        assert_eq!(compare(&LogValue::ln(2), &LogValue::ln(3)), LogOrdering::Less);
        assert_eq!(
            compare(
                &LogValue::ln_scaled(11, rat(5, 26)),
                &LogValue::ln_scaled(11, rat(35, 12))
            ),
            LogOrdering::Less
        );
        // 2 ln 2 vs ln 3 + tiny archimedean part
        let a = LogValue::ln_scaled(2, int(2));
        let b = &LogValue::ln(3) + &LogValue::arch(rat(1, 4));
        // ln 4 - ln 3 = 0.2877 > 0.25
        assert_eq!(compare(&a, &b), LogOrdering::Greater);
    }

    #[test]
    fn compare_unresolved_at_tiny_cap() {
        // 5 ln 2 - 3 ln 3 = ln(32/27) ≈ 0.17 needs a few bits; 65 ln 2 - 41 ln 3
        // is ≈ 0.0120 and at a 2-bit cap the intervals overlap.
        let a = LogValue::ln_scaled(2, int(65));
        let b = LogValue::ln_scaled(3, int(41));
        assert_eq!(compare_with_cap(&a, &b, 2), LogOrdering::Unresolved(2));
        assert_eq!(compare(&a, &b), LogOrdering::Greater);
    }

    #[test]
    fn json_shape() {
        let v = LogValue::ln_scaled(11, rat(5, 26));
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"{"ln_terms":{"11":"5/26"},"arch":"0"}"#);
        let back: LogValue = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<LogValue>(r#"{"ln_terms":{"12":"1"},"arch":"0"}"#).is_err());
    }

    #[test]
    fn display_and_decimal() {
        let v = LogValue::ln_scaled(11, rat(-5, 26));
        assert_eq!(v.to_string(), "(-5/26)·ln 11");
        assert_eq!(LogValue::zero().to_string(), "0");
        assert_eq!(decimal_string(&rat(-1, 3), 5), "-0.33333");
        assert_eq!(decimal_string(&rat(12345, 10), 3), "1230");
        assert_eq!(decimal_string(&rat(7, 2), 12), "3.5");
    }

    #[test]
    fn parse_roundtrip() {
        assert_eq!(parse_rational(" -10/4 ").unwrap(), rat(-5, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&rat(6, 3)), "2");
    }

    fn arb_logvalue() -> impl Strategy<Value = LogValue> {
        let primes = [2u64, 3, 5, 7, 11, 13, 17, 19, 23];
        (
            prop::collection::vec((0usize..9, -50i64..50, 1i64..30), 0..=5),
            -40i64..40,
            1i64..20,
        )
            .prop_map(move |(ts, an, ad)| {
                LogValue::from_parts(ts.into_iter().map(|(i, n, d)| (primes[i], rat(n, d))), rat(an, ad))
            })
    }

    proptest! {
        #[test]
        fn signed_sum_matches_reduced_sum(xs in prop::collection::vec((any::<bool>(), -50i64..50, 1i64..12), 0..12)) {
            let rs: Vec<(bool, Rational)> = xs.iter().map(|&(s, n, d)| (s, rat(n, d))).collect();
            let want = rs.iter().fold(Rational::zero(), |a, (s, x)| if *s { a - x } else { a + x });
            prop_assert_eq!(sum_signed(rs.iter().map(|(s, x)| (*s, x))), want);
        }

        #[test]
        fn combine_sound(a in arb_logvalue(), b in arb_logvalue(), cn in -9i64..9, cd in 1i64..9, prec in 4u32..64) {
            let c = rat(cn, cd);
            let lhs = eval_interval(&logvalue_combine(&a, &c, &b), prec);
            let rhs = &eval_interval(&a, prec) + &eval_interval(&b, prec).scale(&c);
            prop_assert!(rhs.encloses(&lhs));
        }

        #[test]
        fn compare_antisymmetric(a in arb_logvalue(), b in arb_logvalue()) {
            let ab = compare(&a, &b);
            prop_assert_eq!(ab, compare(&b, &a).reverse());
            prop_assert_eq!(ab == LogOrdering::Equal, a == b);
        }

        #[test]
        fn width_halves_on_doubling(a in arb_logvalue(), prec in 1u32..64) {
            let w1 = eval_interval(&a, prec).width();
            let w2 = eval_interval(&a, 2 * prec).width();
            prop_assert!(w2 * int(2) <= w1);
        }
    }
}
