//! Modular `q`-expansions, the Tate parameter and Tate-curve coefficients.
//!
//! At a place of potentially multiplicative reduction `ord_p(1/j) > 0`, and
//! the Tate parameter `q` is recovered from `1/j` by reverting the integral
//! series `t(q) = 1/j(q) = q − 744q^2 + …`.

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, mult_order};
use crate::exactnum::{rat_valuation, Rational};
use crate::gl2::Mat2;
use crate::padic::{evaluate_at_padic, series_invert, series_mul, series_reversion, IntSeries, PadicError, PadicInt};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TateError {
    #[error("ord_p(1/j) = {0} ≤ 0: not potentially multiplicative")]
    NotPotentiallyMultiplicative(i64),
    #[error("gcd({n}, {p}) ≠ 1")]
    NotCoprime { n: u64, p: u64 },
    #[error("transvection hypothesis violated: {0}")]
    HypothesisViolation(Hypothesis),
    #[error(transparent)]
    Padic(#[from] PadicError),
}

/// The three hypotheses of the transvection construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    /// `l` must be a prime `≥ 3`.
    LAtLeastThree,
    /// `l ≠ p`.
    LEqualsResidueCharacteristic,
    /// `l ∤ ord(q)`.
    LDividesOrdQ,
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Hypothesis::LAtLeastThree => "l must be an odd prime",
            Hypothesis::LEqualsResidueCharacteristic => "l equals the residue characteristic",
            Hypothesis::LDividesOrdQ => "l divides ord(q)",
        })
    }
}

/// Local data at a multiplicative place.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TateLocalData {
    pub prime: u64,
    /// `ord_v(q_v)`, equal to the minimal discriminant valuation.
    pub ord_q: u64,
    pub split: bool,
}

fn sigma(k: u32, n: u64) -> BigInt {
    let mut s = BigInt::zero();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            s += BigInt::from(d).pow(k);
            let e = n / d;
            if e != d {
                s += BigInt::from(e).pow(k);
            }
        }
        d += 1;
    }
    s
}

/// `∏_{n≥1} (1 − q^n)^24` modulo `q^len`.
pub fn delta_over_q(len: usize) -> IntSeries {
    let mut eta = vec![BigInt::zero(); len];
    if len > 0 {
        eta[0] = BigInt::one();
    }
    for n in 1..len {
        for k in (n..len).rev() {
            let t = eta[k - n].clone();
            eta[k] -= t;
        }
    }
    let e = IntSeries::new(0, eta);
    let e2 = series_mul(&e, &e);
    let e4 = series_mul(&e2, &e2);
    let e8 = series_mul(&e4, &e4);
    let e16 = series_mul(&e8, &e8);
    series_mul(&e16, &e8)
}

/// `E_4 = 1 + 240 Σ σ_3(n) q^n` modulo `q^len`.
pub fn eisenstein_e4(len: usize) -> IntSeries {
    let c = (0..len as u64)
        .map(|n| if n == 0 { BigInt::one() } else { sigma(3, n) * 240 })
        .collect();
    IntSeries::new(0, c)
}

/// `j(q) = E_4^3/Δ` with coefficients at exponents `−1 .. order−1`.
pub fn j_series(order: i64) -> IntSeries {
    assert!(order >= 2, "j_series needs order ≥ 2");
    let len = (order + 1) as usize;
    let e4 = eisenstein_e4(len);
    let e4_3 = series_mul(&series_mul(&e4, &e4), &e4);
    let inv = series_invert(&delta_over_q(len)).expect("Δ/q has unit constant term");
    series_mul(&e4_3, &inv).shift(-1)
}

/// `t(q) = 1/j(q) = q·(Δ/q)/E_4^3`, truncated at `q^order`.
pub fn t_series(order: i64) -> IntSeries {
    assert!(order >= 2);
    let len = (order - 1) as usize;
    let e4 = eisenstein_e4(len);
    let e4_3 = series_mul(&series_mul(&e4, &e4), &e4);
    let inv = series_invert(&e4_3).expect("E_4 has unit constant term");
    series_mul(&delta_over_q(len), &inv).shift(1)
}

/// `q(t)`, the reversion of [`t_series`], truncated at `t^order`.
pub fn q_of_t_series(order: i64) -> IntSeries {
    series_reversion(&t_series(order)).expect("t = q + O(q^2)")
}

/// Smallest truncation order `k` with `k·v > precision + 2`.
pub fn required_order(valuation: u32, precision: u32) -> i64 {
    assert!(valuation >= 1);
    ((precision + 2) / valuation + 1).max(2) as i64
}

fn inv_j_valuation(inv_j: &PadicInt) -> Result<u32, TateError> {
    let v = inv_j.valuation_lower_bound();
    if v == 0 {
        return Err(TateError::NotPotentiallyMultiplicative(0));
    }
    Ok(v)
}

/// The Tate parameter `q` with `j(q) = j`, given `1/j` as a `p`-adic integer.
///
/// The result carries `min(precision, inv_j.precision())` digits.
pub fn tate_parameter(inv_j: &PadicInt, precision: u32) -> Result<PadicInt, TateError> {
    let v = inv_j_valuation(inv_j)?;
    let series = q_of_t_series(required_order(v, precision));
    tate_parameter_from_series(&series, inv_j, precision)
}

/// [`tate_parameter`] with a caller-supplied (e.g. cached) `q(t)` series.
pub fn tate_parameter_from_series(series: &IntSeries, inv_j: &PadicInt, precision: u32) -> Result<PadicInt, TateError> {
    let v = inv_j_valuation(inv_j)?;
    let need = required_order(v, precision);
    let series = series.truncate(need);
    let target = precision.min(inv_j.precision());
    let q = evaluate_at_padic(&series, inv_j)?;
    if q.precision() < target {
        return Err(PadicError::InsufficientOrder {
            certified: q.precision(),
            requested: target,
        }
        .into());
    }
    Ok(q.truncate(target))
}

/// Convenience wrapper taking `j` as an exact rational.
pub fn tate_parameter_from_j(j: &Rational, p: u64, precision: u32) -> Result<PadicInt, TateError> {
    if j.is_zero() {
        return Err(TateError::NotPotentiallyMultiplicative(0));
    }
    let inv = j.recip();
    let v = rat_valuation(&inv, p);
    if v <= 0 {
        return Err(TateError::NotPotentiallyMultiplicative(v));
    }
    let x = PadicInt::from_rational(p, precision, &inv)?;
    tate_parameter(&x, precision)
}

/// Tate-curve coefficient series `(a_4, a_6)` truncated at `q^order`:
/// `a_4 = −5 Σ σ_3(n) q^n`, `a_6 = −Σ (5σ_3(n) + 7σ_5(n))/12 · q^n`.
pub fn tate_coefficient_series(order: i64) -> (IntSeries, IntSeries) {
    let len = order.max(1) as usize;
    let mut s4 = vec![BigInt::zero(); len];
    let mut s6 = vec![BigInt::zero(); len];
    for n in 1..len as u64 {
        let s3 = sigma(3, n);
        let s5 = sigma(5, n);
        s4[n as usize] = -&s3 * 5;
        let num: BigInt = s3 * 5 + s5 * 7;
        let (q, r) = num.div_rem(&BigInt::from(12));
        debug_assert!(r.is_zero());
        s6[n as usize] = -q;
    }
    (IntSeries::new(0, s4), IntSeries::new(0, s6))
}

/// Smallest order `k` with `k·v ≥ precision` for the coefficient series.
pub fn coefficient_order(valuation: u32, precision: u32) -> i64 {
    (precision.div_ceil(valuation.max(1)) as i64).max(1)
}

/// `(s_4, s_6)` evaluated at `q`.
pub fn tate_coefficients(q: &PadicInt, precision: u32) -> Result<(PadicInt, PadicInt), TateError> {
    let v = q.valuation_lower_bound();
    if v == 0 {
        return Err(TateError::NotPotentiallyMultiplicative(0));
    }
    let (a4, a6) = tate_coefficient_series(coefficient_order(v, precision));
    tate_coefficients_from_series(&a4, &a6, q, precision)
}

/// [`tate_coefficients`] with caller-supplied series.
pub fn tate_coefficients_from_series(
    a4: &IntSeries,
    a6: &IntSeries,
    q: &PadicInt,
    precision: u32,
) -> Result<(PadicInt, PadicInt), TateError> {
    let target = precision.min(q.precision());
    let ev = |s: &IntSeries| -> Result<PadicInt, TateError> {
        let r = evaluate_at_padic(s, q)?;
        if r.precision() < target {
            return Err(PadicError::InsufficientOrder {
                certified: r.precision(),
                requested: target,
            }
            .into());
        }
        Ok(r.truncate(target))
    };
    Ok((ev(a4)?, ev(a6)?))
}

/// Ramification and residue degree of `Q_p(ζ_n, q^{1/n})/Q_p`.
pub fn local_torsion_degrees(p: u64, ord_q: u64, n: u64) -> Result<(u64, u64), TateError> {
    if n.gcd(&p) != 1 {
        return Err(TateError::NotCoprime { n, p });
    }
    let f = mult_order(p % n.max(1), n);
    let e = n / n.gcd(&ord_q);
    Ok((e, f))
}

/// A unipotent element of the decomposition group acting on `E[l]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transvection {
    pub matrix: Mat2,
    pub basis_labels: [String; 2],
}

/// The transvection at a multiplicative place.
///
/// `σ` fixes `ζ_l` and sends `Q = q^{1/l}` to `ζ_l·Q`; on exponent vectors
/// `(a, b)` of `ζ_l^a Q^b` it acts as `(a, b) ↦ (a + b, b)`.
pub fn transvection(p: u64, ord_q: u64, l: u64) -> Result<Transvection, TateError> {
    if l < 3 || !is_prime(l) {
        return Err(TateError::HypothesisViolation(Hypothesis::LAtLeastThree));
    }
    if l == p {
        return Err(TateError::HypothesisViolation(Hypothesis::LEqualsResidueCharacteristic));
    }
    if ord_q.is_multiple_of(l) {
        return Err(TateError::HypothesisViolation(Hypothesis::LDividesOrdQ));
    }
    // Columns are the images of the basis vectors ζ = (1, 0) and Q = (0, 1).
    let sigma = |(a, b): (i64, i64)| (a + b, b);
    let c0 = sigma((1, 0));
    let c1 = sigma((0, 1));
    Ok(Transvection {
        matrix: Mat2::new(l, c0.0, c1.0, c0.1, c1.1),
        basis_labels: [format!("phi(zeta_{l})"), format!("phi(q^(1/{l}))")],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;
    use crate::gl2::Mat2;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    // Oracle: expand E4^3 and q∏(1−q^n)^24 with plain i128 arithmetic and do
    // long division by hand.
    fn j_oracle(n: usize) -> Vec<i128> {
        let mut e4 = vec![0i128; n];
        e4[0] = 1;
        for (k, c) in e4.iter_mut().enumerate().skip(1) {
            let s: i128 = (1..=k).filter(|d| k % d == 0).map(|d| (d as i128).pow(3)).sum();
            *c = 240 * s;
        }
        let mul = |a: &[i128], b: &[i128]| {
            let mut o = vec![0i128; n];
            for i in 0..n {
                for j in 0..n - i {
                    o[i + j] += a[i] * b[j];
                }
            }
            o
        };
        let e43 = mul(&mul(&e4, &e4), &e4);
        let mut d = vec![0i128; n];
        d[0] = 1;
        for k in 1..n {
            for _ in 0..24 {
                for i in (k..n).rev() {
                    d[i] -= d[i - k];
                }
            }
        }
        // (q^{-1})·e43/d by long division (d[0] = 1)
        let mut quo = vec![0i128; n];
        let mut rem = e43;
        for i in 0..n {
            quo[i] = rem[i];
            for j in i..n {
                rem[j] -= quo[i] * d[j - i];
            }
        }
        quo
    }

    #[test]
    fn j_series_leading_coefficients() {
        let j = j_series(4);
        assert_eq!(j.lead_exponent(), -1);
        assert_eq!(&j.coeffs()[..4], &big(&[1, 744, 196884, 21493760])[..]);
        let oracle = j_oracle(6);
        let j = j_series(5);
        for (i, o) in oracle.iter().enumerate() {
            assert_eq!(j.coeff(i as i64 - 1), BigInt::from(*o));
        }
    }

    #[test]
    fn delta_times_inverse_is_one() {
        let d = delta_over_q(15);
        let inv = series_invert(&d).unwrap();
        assert_eq!(series_mul(&d, &inv), IntSeries::one(15));
        // τ(2) = −24, τ(3) = 252
        assert_eq!(&d.coeffs()[..3], &big(&[1, -24, 252])[..]);
    }

    #[test]
    fn q_of_t_coefficients() {
        let q = q_of_t_series(5);
        assert_eq!(q.coeffs(), &big(&[1, 744, 750420, 872769632])[..]);
        // substitute back: t(q(t)) = t and j(q(t))·t = 1
        let t = t_series(8);
        let q = q_of_t_series(8);
        assert_eq!(t.compose(&q).normalized(), IntSeries::variable(8));
        let big_j = j_series(8).shift(1);
        let jt = series_mul(&big_j.compose(&q), &series_invert(&q.shift(-1)).unwrap());
        assert_eq!(jt.truncate(6), IntSeries::one(6));
    }

    #[test]
    fn e11a1_tate_parameter_digits() {
        let j = Rational::new(BigInt::from(-(1i64 << 12) * 31 * 31 * 31), BigInt::from(161051));
        let q = tate_parameter_from_j(&j, 11, 24).unwrap();
        assert_eq!(
            q.digits(24).unwrap(),
            vec![0, 0, 0, 0, 0, 10, 2, 6, 6, 5, 4, 4, 1, 4, 1, 0, 5, 9, 9, 3, 3, 1, 3, 4]
        );
        assert_eq!(q.valuation(), Some(5));
        let (s4, s6) = tate_coefficients(&q, 24).unwrap();
        assert_eq!(
            s4.digits(24).unwrap()[1..],
            [0, 0, 0, 0, 5, 7, 1, 0, 5, 9, 1, 9, 2, 10, 2, 0, 1, 6, 2, 6, 4, 10, 10]
        );
        assert_eq!(
            s6.digits(24).unwrap()[1..],
            [0, 0, 0, 0, 1, 8, 4, 4, 5, 5, 10, 2, 1, 8, 2, 7, 10, 9, 6, 3, 3, 8, 5]
        );
        // compose back: t(q) = 1/j
        let back = evaluate_at_padic(&t_series(8), &q).unwrap();
        assert_eq!(back, PadicInt::from_rational(11, 24, &j.recip()).unwrap());
    }

    #[test]
    fn coefficients_at_zero() {
        let z = PadicInt::zero(11, 10);
        let (s4, s6) = tate_coefficients(&z, 10).unwrap();
        assert_eq!(s4, z);
        assert_eq!(s6, z);
    }

    #[test]
    fn not_potentially_multiplicative() {
        assert!(matches!(
            tate_parameter_from_j(&rat(1728, 1), 11, 10),
            Err(TateError::NotPotentiallyMultiplicative(0))
        ));
        assert!(tate_parameter(&PadicInt::from_i64(7, 5, 3), 5).is_err());
    }

    #[test]
    fn torsion_degrees() {
        assert_eq!(local_torsion_degrees(11, 5, 13).unwrap(), (13, 12));
        assert_eq!(local_torsion_degrees(11, 5, 1).unwrap(), (1, 1));
        assert_eq!(local_torsion_degrees(11, 5, 6).unwrap(), (6, 2));
        assert_eq!(
            local_torsion_degrees(7, 14, 7),
            Err(TateError::NotCoprime { n: 7, p: 7 })
        );
        assert_eq!(local_torsion_degrees(11, 10, 5).unwrap(), (1, 1));
    }

    #[test]
    fn transvection_cases() {
        let t = transvection(11, 5, 13).unwrap();
        assert_eq!(t.matrix, Mat2::new(13, 1, 1, 0, 1));
        assert_eq!(t.matrix.pow(13), Mat2::identity(13));
        assert_eq!(t.matrix.order(), 13);
        assert_eq!(
            transvection(11, 5, 5),
            Err(TateError::HypothesisViolation(Hypothesis::LDividesOrdQ))
        );
        assert_eq!(
            transvection(11, 5, 11),
            Err(TateError::HypothesisViolation(Hypothesis::LEqualsResidueCharacteristic))
        );
        assert_eq!(
            transvection(11, 5, 2),
            Err(TateError::HypothesisViolation(Hypothesis::LAtLeastThree))
        );
    }
}
