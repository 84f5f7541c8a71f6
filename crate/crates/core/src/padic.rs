//! Truncated `p`-adic integers and integer Laurent series.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::inv_mod;
use crate::exactnum::{int_valuation, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PadicError {
    #[error("operands live over different primes ({0} and {1})")]
    PrimeMismatch(u64, u64),
    #[error("division by a non-unit")]
    NonUnitDivisor,
    #[error("rational {0} is not {1}-integral")]
    NotIntegral(String, u64),
    #[error("requested {requested} digits but only {precision} are known")]
    DigitsBeyondPrecision { requested: u32, precision: u32 },
    #[error("leading coefficient {0} is not ±1")]
    NonUnitLeadingCoefficient(String),
    #[error("series must start q + c2·q^2 + …")]
    BadLeadingTerm,
    #[error("truncation order certifies only {certified} of {requested} digits")]
    InsufficientOrder { certified: u32, requested: u32 },
    #[error("cannot evaluate a Laurent tail (lead exponent {0}) at a p-adic integer")]
    NegativeExponent(i64),
}

/// Element of `Z_p / p^N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PadicInt {
    prime: u64,
    precision: u32,
    residue: BigInt,
}

impl PadicInt {
    pub fn new(prime: u64, precision: u32, value: &BigInt) -> Self {
        assert!(prime >= 2 && precision >= 1);
        let m = BigInt::from(prime).pow(precision);
        PadicInt {
            prime,
            precision,
            residue: value.mod_floor(&m),
        }
    }

    pub fn from_i64(prime: u64, precision: u32, v: i64) -> Self {
        PadicInt::new(prime, precision, &BigInt::from(v))
    }

    pub fn zero(prime: u64, precision: u32) -> Self {
        PadicInt::from_i64(prime, precision, 0)
    }

    /// Image of a `p`-integral rational.
    pub fn from_rational(prime: u64, precision: u32, x: &Rational) -> Result<Self, PadicError> {
        if x.denom() % prime == BigInt::zero() {
            return Err(PadicError::NotIntegral(x.to_string(), prime));
        }
        let m = BigInt::from(prime).pow(precision);
        let inv = inv_mod(x.denom(), &m).expect("denominator is a unit");
        Ok(PadicInt::new(prime, precision, &(x.numer() * inv)))
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn residue(&self) -> &BigInt {
        &self.residue
    }

    pub fn modulus(&self) -> BigInt {
        BigInt::from(self.prime).pow(self.precision)
    }

    /// `None` when the residue is zero (valuation at least the precision).
    pub fn valuation(&self) -> Option<u32> {
        (!self.residue.is_zero()).then(|| int_valuation(&self.residue, self.prime))
    }

    /// Valuation, reading zero as "at least the precision".
    pub fn valuation_lower_bound(&self) -> u32 {
        self.valuation().unwrap_or(self.precision)
    }

    pub fn is_unit(&self) -> bool {
        self.valuation() == Some(0)
    }

    /// Reduces to a lower precision (no-op if `n ≥` current precision).
    pub fn truncate(&self, n: u32) -> Self {
        if n >= self.precision {
            return self.clone();
        }
        PadicInt::new(self.prime, n, &self.residue)
    }

    fn check(&self, o: &PadicInt) -> Result<u32, PadicError> {
        if self.prime != o.prime {
            return Err(PadicError::PrimeMismatch(self.prime, o.prime));
        }
        Ok(self.precision.min(o.precision))
    }

    pub fn add(&self, o: &PadicInt) -> Result<Self, PadicError> {
        let n = self.check(o)?;
        Ok(PadicInt::new(self.prime, n, &(&self.residue + &o.residue)))
    }

    pub fn sub(&self, o: &PadicInt) -> Result<Self, PadicError> {
        let n = self.check(o)?;
        Ok(PadicInt::new(self.prime, n, &(&self.residue - &o.residue)))
    }

    pub fn mul(&self, o: &PadicInt) -> Result<Self, PadicError> {
        let n = self.check(o)?;
        Ok(PadicInt::new(self.prime, n, &(&self.residue * &o.residue)))
    }

    pub fn neg(&self) -> Self {
        PadicInt::new(self.prime, self.precision, &-&self.residue)
    }

    /// Division by a unit; no precision is lost.
    pub fn div_unit(&self, o: &PadicInt) -> Result<Self, PadicError> {
        let n = self.check(o)?;
        if !o.is_unit() {
            return Err(PadicError::NonUnitDivisor);
        }
        let m = BigInt::from(self.prime).pow(n);
        let inv = inv_mod(&o.residue, &m).ok_or(PadicError::NonUnitDivisor)?;
        Ok(PadicInt::new(self.prime, n, &(&self.residue * inv)))
    }

    /// Base-`p` digits at positions `0..count`, least significant first.
    pub fn digits(&self, count: u32) -> Result<Vec<u64>, PadicError> {
        padic_digits(self, count)
    }
}

impl fmt::Display for PadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + O({}^{})", self.residue, self.prime, self.precision)
    }
}

/// Base-`p` digits of `x` at absolute positions `0..count`.
pub fn padic_digits(x: &PadicInt, count: u32) -> Result<Vec<u64>, PadicError> {
    if count > x.precision {
        return Err(PadicError::DigitsBeyondPrecision {
            requested: count,
            precision: x.precision,
        });
    }
    let p = BigInt::from(x.prime);
    let mut r = x.residue.clone();
    let mut out = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let (q, d) = r.div_rem(&p);
        out.push(d.to_u64().unwrap());
        r = q;
    }
    Ok(out)
}

/// Truncated Laurent series `Σ_{lead ≤ n < order} c_n q^n + O(q^order)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntSeries {
    lead: i64,
    coeffs: Vec<BigInt>,
}

impl IntSeries {
    /// Coefficients start at exponent `lead`; the truncation order is
    /// `lead + coeffs.len()`.
    pub fn new(lead: i64, coeffs: Vec<BigInt>) -> Self {
        IntSeries { lead, coeffs }
    }

    pub fn from_i64(lead: i64, coeffs: &[i64]) -> Self {
        IntSeries::new(lead, coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// `0 + O(q^order)`.
    pub fn zero(order: i64) -> Self {
        IntSeries::new(order, Vec::new())
    }

    /// `1 + O(q^order)`.
    pub fn one(order: i64) -> Self {
        let mut s = IntSeries::zero(0);
        s.coeffs = vec![BigInt::zero(); order.max(0) as usize];
        if order > 0 {
            s.coeffs[0] = BigInt::one();
        }
        s
    }

    /// `q + O(q^order)`.
    pub fn variable(order: i64) -> Self {
        let mut c = vec![BigInt::zero(); (order - 1).max(0) as usize];
        if !c.is_empty() {
            c[0] = BigInt::one();
        }
        IntSeries::new(1, c)
    }

    pub fn lead_exponent(&self) -> i64 {
        self.lead
    }

    /// Exclusive truncation order.
    pub fn order(&self) -> i64 {
        self.lead + self.coeffs.len() as i64
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Coefficient of `q^n`; zero below the lead exponent.
    ///
    /// Panics when `n` is at or beyond the truncation order.
    pub fn coeff(&self, n: i64) -> BigInt {
        assert!(n < self.order(), "coefficient {n} beyond order {}", self.order());
        if n < self.lead {
            BigInt::zero()
        } else {
            self.coeffs[(n - self.lead) as usize].clone()
        }
    }

    /// Exponent of the first nonzero coefficient, if any.
    pub fn valuation(&self) -> Option<i64> {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .map(|i| self.lead + i as i64)
    }

    /// Drops leading zero coefficients.
    pub fn normalized(&self) -> Self {
        match self.valuation() {
            Some(v) => IntSeries::new(v, self.coeffs[(v - self.lead) as usize..].to_vec()),
            None => IntSeries::zero(self.order()),
        }
    }

    pub fn truncate(&self, order: i64) -> Self {
        if order >= self.order() {
            return self.clone();
        }
        if order <= self.lead {
            return IntSeries::zero(order);
        }
        IntSeries::new(self.lead, self.coeffs[..(order - self.lead) as usize].to_vec())
    }

    /// Multiplies by `q^k`.
    pub fn shift(&self, k: i64) -> Self {
        IntSeries::new(self.lead + k, self.coeffs.clone())
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        IntSeries::new(self.lead, self.coeffs.iter().map(|x| x * c).collect())
    }

    fn combine(&self, o: &IntSeries, sign: i32) -> Self {
        let lead = self.lead.min(o.lead);
        let order = self.order().min(o.order());
        let coeffs = (lead..order)
            .map(|n| {
                let a = if n >= self.lead { self.coeff(n) } else { BigInt::zero() };
                let b = if n >= o.lead { o.coeff(n) } else { BigInt::zero() };
                if sign > 0 {
                    a + b
                } else {
                    a - b
                }
            })
            .collect();
        IntSeries::new(lead, coeffs)
    }

    pub fn add(&self, o: &IntSeries) -> Self {
        self.combine(o, 1)
    }

    pub fn sub(&self, o: &IntSeries) -> Self {
        self.combine(o, -1)
    }

    pub fn mul(&self, o: &IntSeries) -> Self {
        series_mul(self, o)
    }

    /// Substitutes `b` (valuation ≥ 1) for `q` in `self` (lead ≥ 0).
    ///
    /// The result is exact up to `min(self.order·v(b), b.order)`.
    pub fn compose(&self, b: &IntSeries) -> Self {
        assert!(self.lead >= 0, "compose needs a power series");
        let vb = b.valuation().unwrap_or(b.order());
        assert!(vb >= 1, "inner series must have positive valuation");
        let order = self.order().saturating_mul(vb).min(b.order()).max(0);
        IntSeries::new(0, compose_dense(self, b, order as usize))
    }
}

fn dense(b: &IntSeries, len: usize) -> Vec<BigInt> {
    (0..len as i64)
        .map(|n| if n < b.lead { BigInt::zero() } else { b.coeff(n) })
        .collect()
}

fn mul_dense(a: &[BigInt], b: &[BigInt], len: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

/// Horner evaluation of `a(b)` modulo `q^len`; caller guarantees validity.
fn compose_dense(a: &IntSeries, b: &IntSeries, len: usize) -> Vec<BigInt> {
    let bd = dense(b, len);
    let mut acc = vec![BigInt::zero(); len];
    for n in (a.lead..a.order()).rev() {
        acc = mul_dense(&acc, &bd, len);
        if len > 0 {
            acc[0] += &a.coeffs[(n - a.lead) as usize];
        }
    }
    for _ in 0..a.lead {
        acc = mul_dense(&acc, &bd, len);
    }
    acc
}

impl fmt::Display for IntSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let n = self.lead + i as i64;
            parts.push(match n {
                0 => c.to_string(),
                1 => format!("{c}*q"),
                _ => format!("{c}*q^{n}"),
            });
        }
        parts.push(format!("O(q^{})", self.order()));
        write!(f, "{}", parts.join(" + "))
    }
}

/// Product truncated to `min(a.lead + b.order, b.lead + a.order)`.
pub fn series_mul(a: &IntSeries, b: &IntSeries) -> IntSeries {
    let lead = a.lead + b.lead;
    let order = (a.lead + b.order()).min(b.lead + a.order());
    let len = (order - lead).max(0) as usize;
    let mut out = vec![BigInt::zero(); len];
    for (i, x) in a.coeffs.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.coeffs.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    IntSeries::new(lead, out)
}

/// Multiplicative inverse; the first nonzero coefficient must be `±1`.
pub fn series_invert(a: &IntSeries) -> Result<IntSeries, PadicError> {
    let a = a.normalized();
    if a.coeffs.is_empty() {
        return Err(PadicError::NonUnitLeadingCoefficient("0".into()));
    }
    let u = a.coeffs[0].clone();
    if !(u.is_one() || (-&u).is_one()) {
        return Err(PadicError::NonUnitLeadingCoefficient(u.to_string()));
    }
    let n = a.coeffs.len();
    let mut inv: Vec<BigInt> = Vec::with_capacity(n);
    for k in 0..n {
        let mut s = if k == 0 { BigInt::one() } else { BigInt::zero() };
        for i in 1..=k {
            s -= &a.coeffs[i] * &inv[k - i];
        }
        inv.push(s * &u);
    }
    Ok(IntSeries::new(-a.lead, inv))
}

/// Compositional inverse of `q + c2·q^2 + …` by successive substitution.
pub fn series_reversion(a: &IntSeries) -> Result<IntSeries, PadicError> {
    let order = a.order();
    if order < 2 || a.lead > 1 || a.coeff(1) != BigInt::one() {
        return Err(PadicError::BadLeadingTerm);
    }
    if (a.lead..1).any(|n| !a.coeff(n).is_zero()) {
        return Err(PadicError::BadLeadingTerm);
    }
    // a(q) = q + h(q); iterate b <- t - h(b). Step k fixes the coefficient
    // of t^k, so it only needs to be carried to order k + 1.
    let h = IntSeries::new(2, (2..order).map(|n| a.coeff(n)).collect());
    let mut b = vec![BigInt::zero(), BigInt::one()];
    for k in 2..order as usize {
        b.push(BigInt::zero());
        let bs = IntSeries::new(0, b.clone());
        let hb = compose_dense(&h.truncate(k as i64 + 1), &bs, k + 1);
        b[k] = -&hb[k];
    }
    Ok(IntSeries::new(1, b[1..order as usize].to_vec()))
}

/// Evaluates a power series at `x`, certifying `min(N, order·v(x))` digits.
pub fn evaluate_at_padic(a: &IntSeries, x: &PadicInt) -> Result<PadicInt, PadicError> {
    if a.lead < 0 && a.coeffs[..(-a.lead) as usize].iter().any(|c| !c.is_zero()) {
        return Err(PadicError::NegativeExponent(a.lead));
    }
    let v = x.valuation_lower_bound() as i64;
    let certified = (a.order().max(0)).saturating_mul(v).min(x.precision() as i64) as u32;
    if certified == 0 {
        return Err(PadicError::InsufficientOrder {
            certified: 0,
            requested: x.precision(),
        });
    }
    let m = BigInt::from(x.prime()).pow(certified);
    let xr = x.residue() % &m;
    let mut acc = BigInt::zero();
    for n in (0..a.order()).rev() {
        acc = (acc * &xr + a.coeff(n)).mod_floor(&m);
    }
    Ok(PadicInt::new(x.prime(), certified, &acc))
}

/// As [`evaluate_at_padic`], failing unless `target` digits are certified.
pub fn evaluate_at_padic_to(a: &IntSeries, x: &PadicInt, target: u32) -> Result<PadicInt, PadicError> {
    let r = evaluate_at_padic(a, x)?;
    if r.precision() < target {
        return Err(PadicError::InsufficientOrder {
            certified: r.precision(),
            requested: target,
        });
    }
    Ok(r.truncate(target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(lead: i64, c: &[i64]) -> IntSeries {
        IntSeries::from_i64(lead, c)
    }

    #[test]
    fn mul_examples() {
        assert_eq!(
            series_mul(&s(0, &[1, 1, 0, 0]), &s(0, &[1, -1, 0, 0])),
            s(0, &[1, 0, -1, 0])
        );
        let p = series_mul(&s(-1, &[1, 0, 0]), &s(1, &[1, 0, 0]));
        assert_eq!(p.lead_exponent(), 0);
        assert_eq!(p.coeff(0), BigInt::one());
        assert_eq!(p.order(), 3);
    }

    #[test]
    fn invert_examples() {
        let g = series_invert(&s(0, &[1, -1, 0, 0, 0])).unwrap();
        assert_eq!(g, s(0, &[1, 1, 1, 1, 1]));
        let g = series_invert(&s(0, &[1, 744, 0, 0])).unwrap();
        assert_eq!(g, s(0, &[1, -744, 744 * 744, -744 * 744 * 744]));
        assert!(matches!(
            series_invert(&s(0, &[2, 1])),
            Err(PadicError::NonUnitLeadingCoefficient(_))
        ));
        let g = series_invert(&s(1, &[-1, 3, 0])).unwrap();
        assert_eq!(g.lead_exponent(), -1);
        assert_eq!(series_mul(&g, &s(1, &[-1, 3, 0])), s(0, &[1, 0, 0]));
    }

    #[test]
    fn reversion_examples() {
        assert_eq!(series_reversion(&s(1, &[1, 0, 0, 0])).unwrap(), s(1, &[1, 0, 0, 0]));
        // Lagrange oracle for t = q + q^2: q = Σ (-1)^(n-1) C(n-1) t^n (Catalan).
        let r = series_reversion(&s(1, &[1, 1, 0, 0, 0])).unwrap();
        assert_eq!(r, s(1, &[1, -1, 2, -5, 14]));
        assert!(matches!(
            series_reversion(&s(1, &[2, 1])),
            Err(PadicError::BadLeadingTerm)
        ));
        assert!(matches!(
            series_reversion(&s(0, &[1, 1, 0])),
            Err(PadicError::BadLeadingTerm)
        ));
    }

    #[test]
    fn digits_examples() {
        let z = PadicInt::zero(11, 6);
        assert_eq!(padic_digits(&z, 6).unwrap(), vec![0; 6]);
        let x = PadicInt::new(11, 6, &BigInt::from(121 + 3 * 1331));
        assert_eq!(padic_digits(&x, 5).unwrap(), vec![0, 0, 1, 3, 0]);
        assert!(padic_digits(&x, 7).is_err());
        assert_eq!(x.valuation(), Some(2));
    }

    #[test]
    fn evaluate_examples() {
        let f = s(0, &[1, 1, 1]);
        let r = evaluate_at_padic(&f, &PadicInt::zero(7, 5)).unwrap();
        assert_eq!(r, PadicInt::from_i64(7, 5, 1));
        // geometric series at p: 1/(1-p) mod p^N
        let n = 10u32;
        let geo = s(0, &[1; 12]);
        let x = PadicInt::from_i64(5, n, 5);
        let r = evaluate_at_padic(&geo, &x).unwrap();
        let m = BigInt::from(5).pow(n);
        let oracle = inv_mod(&BigInt::from(-4), &m).unwrap();
        assert_eq!(r.residue(), &oracle);
        assert_eq!(r.precision(), n);
        // positive lead exponent: q^2 + q^3 at x = 5
        let r = evaluate_at_padic(&s(2, &[1, 1, 0]), &x).unwrap();
        assert_eq!(r.residue(), &BigInt::from(25 + 125));
        // too short a series for the requested precision
        let short = s(0, &[1; 3]);
        assert!(matches!(
            evaluate_at_padic_to(&short, &x, 10),
            Err(PadicError::InsufficientOrder {
                certified: 3,
                requested: 10
            })
        ));
    }

    #[test]
    fn rational_embedding() {
        let x = PadicInt::from_rational(11, 4, &Rational::new(BigInt::from(1), BigInt::from(3))).unwrap();
        assert_eq!(
            x.mul(&PadicInt::from_i64(11, 4, 3)).unwrap(),
            PadicInt::from_i64(11, 4, 1)
        );
        assert!(PadicInt::from_rational(11, 4, &Rational::new(BigInt::from(1), BigInt::from(11))).is_err());
        let u = PadicInt::from_i64(11, 4, 5);
        assert_eq!(
            PadicInt::from_i64(11, 4, 10).div_unit(&u).unwrap(),
            PadicInt::from_i64(11, 4, 2)
        );
        assert!(u.div_unit(&PadicInt::from_i64(11, 4, 22)).is_err());
    }

    fn arb_series(max_order: usize) -> impl Strategy<Value = Vec<i64>> {
        prop::collection::vec(-30i64..30, 1..max_order)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn invert_multiplies_back(mut c in arb_series(20), neg in any::<bool>()) {
            c[0] = if neg { -1 } else { 1 };
            let a = s(0, &c);
            let inv = series_invert(&a).unwrap();
            prop_assert_eq!(series_mul(&a, &inv), IntSeries::one(c.len() as i64));
        }

        #[test]
        fn reversion_composes_back(c in arb_series(19)) {
            let mut coeffs = vec![1i64];
            coeffs.extend(c);
            let a = s(1, &coeffs);
            let b = series_reversion(&a).unwrap();
            prop_assert_eq!(b.order(), a.order());
            prop_assert_eq!(a.compose(&b).normalized(), IntSeries::variable(a.order()));
            prop_assert_eq!(b.compose(&a).normalized(), IntSeries::variable(a.order()));
        }

        #[test]
        fn horner_matches_naive(c in arb_series(25), x in 0i64..1_000_000, pi in 0usize..4, n in 1u32..12) {
            let p = [3u64, 5, 7, 11][pi];
            let xv = PadicInt::new(p, n, &(BigInt::from(x) * p));
            let a = s(0, &c);
            let r = evaluate_at_padic(&a, &xv).unwrap();
            let m = BigInt::from(p).pow(r.precision());
            let naive: BigInt = c.iter().enumerate().map(|(k, ci)| BigInt::from(*ci) * xv.residue().pow(k as u32)).sum();
            prop_assert_eq!(r.residue(), &naive.mod_floor(&m));
        }

        #[test]
        fn more_precision_keeps_digits(c in arb_series(40), x in 1i64..1000, n in 2u32..10) {
            let a = s(0, &c);
            let lo = evaluate_at_padic(&a, &PadicInt::new(7, n, &BigInt::from(7 * x))).unwrap();
            let hi = evaluate_at_padic(&a, &PadicInt::new(7, n + 5, &BigInt::from(7 * x))).unwrap();
            prop_assert!(hi.precision() >= lo.precision());
            prop_assert_eq!(hi.truncate(lo.precision()), lo);
        }
    }
}
