//! Weierstrass models over `Q`: invariants, minimal models, reduction types,
//! traces of Frobenius and a one-sided test for a large mod-`l` image.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{is_prime, legendre, pow_mod, prime_divisors_u64, primes_up_to};
use crate::exactnum::{int_valuation, Rational};

/// Default `prime_bound` for [`mod_l_image_contains_sl2`].
pub const DEFAULT_PRIME_BOUND: u64 = 10_000;

/// Largest `p` for which [`ap_trace`] will count points.
pub const AP_COUNT_LIMIT: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CurveError {
    #[error("singular model: discriminant is zero")]
    SingularModel,
    #[error("additive reduction at {0}: only the coarse type is available")]
    AdditiveUnsupportedDetail(u64),
    #[error("bad reduction at {0}")]
    BadReduction(u64),
    #[error("model is not minimal at {0}")]
    NotMinimalAt(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("point counting limited to p ≤ {AP_COUNT_LIMIT}, got {0}")]
    PrimeTooLarge(u64),
}

/// `y^2 + a1·xy + a3·y = x^3 + a2·x^2 + a4·x + a6` with integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeierstrassModel {
    pub a1: BigInt,
    pub a2: BigInt,
    pub a3: BigInt,
    pub a4: BigInt,
    pub a6: BigInt,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelRepr {
    a1: String,
    a2: String,
    a3: String,
    a4: String,
    a6: String,
}

impl Serialize for WeierstrassModel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ModelRepr {
            a1: self.a1.to_string(),
            a2: self.a2.to_string(),
            a3: self.a3.to_string(),
            a4: self.a4.to_string(),
            a6: self.a6.to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for WeierstrassModel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let r = ModelRepr::deserialize(d)?;
        let p = |name: &str, v: &str| -> Result<BigInt, D::Error> {
            v.trim()
                .parse()
                .map_err(|_| D::Error::custom(format!("{name}: `{v}` is not an integer")))
        };
        Ok(WeierstrassModel {
            a1: p("a1", &r.a1)?,
            a2: p("a2", &r.a2)?,
            a3: p("a3", &r.a3)?,
            a4: p("a4", &r.a4)?,
            a6: p("a6", &r.a6)?,
        })
    }
}

impl WeierstrassModel {
    pub fn new(a: [i64; 5]) -> Self {
        WeierstrassModel {
            a1: a[0].into(),
            a2: a[1].into(),
            a3: a[2].into(),
            a4: a[3].into(),
            a6: a[4].into(),
        }
    }

    /// Integral model of a rational one via `(x, y) ↦ (u^2 x, u^3 y)`, where
    /// `u` is the lcm of the denominators.
    pub fn from_rational(a: [Rational; 5]) -> Self {
        let u = a.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let w = [1u32, 2, 3, 4, 6];
        let c: Vec<BigInt> = a
            .iter()
            .zip(w)
            .map(|(x, k)| (x * Rational::from_integer(u.pow(k))).to_integer())
            .collect();
        WeierstrassModel {
            a1: c[0].clone(),
            a2: c[1].clone(),
            a3: c[2].clone(),
            a4: c[3].clone(),
            a6: c[4].clone(),
        }
    }

    pub fn coefficients(&self) -> [BigInt; 5] {
        [
            self.a1.clone(),
            self.a2.clone(),
            self.a3.clone(),
            self.a4.clone(),
            self.a6.clone(),
        ]
    }

    /// The model obtained by `x = u^2 X + r`, `y = u^3 Y + s u^2 X + t`.
    pub fn transform(&self, u: &BigInt, r: &BigInt, s: &BigInt, t: &BigInt) -> Option<Self> {
        let (a1, a2, a3, a4, a6) = (&self.a1, &self.a2, &self.a3, &self.a4, &self.a6);
        let a1n = a1 + s * 2;
        let a2n = a2 - s * a1 + r * 3 - s * s;
        let a3n = a3 + r * a1 + t * 2;
        let a4n = a4 - s * a3 + r * a2 * 2 - (t + r * s) * a1 + r * r * 3 - s * t * 2;
        let a6n = a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1;
        let div = |x: BigInt, k: u32| -> Option<BigInt> {
            let (q, rem) = x.div_rem(&u.pow(k));
            rem.is_zero().then_some(q)
        };
        Some(WeierstrassModel {
            a1: div(a1n, 1)?,
            a2: div(a2n, 2)?,
            a3: div(a3n, 3)?,
            a4: div(a4n, 4)?,
            a6: div(a6n, 6)?,
        })
    }
}

impl fmt::Display for WeierstrassModel {
    /// Cremona-style coefficient list `[a1,a2,a3,a4,a6]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{},{},{}]", self.a1, self.a2, self.a3, self.a4, self.a6)
    }
}

impl WeierstrassModel {
    /// `y^2 + y = x^3 - x^2 - 10x - 20` style rendering.
    pub fn equation(&self) -> String {
        fn term(c: &BigInt, mon: &str, first: bool) -> String {
            if c.is_zero() {
                return String::new();
            }
            let sign = if c.is_negative() {
                " - "
            } else if first {
                ""
            } else {
                " + "
            };
            let sign = if first && c.is_negative() { "-" } else { sign };
            let a = c.abs();
            if mon.is_empty() {
                format!("{sign}{a}")
            } else if a.is_one() {
                format!("{sign}{mon}")
            } else {
                format!("{sign}{a}{mon}")
            }
        }
        let mut lhs = "y^2".to_string();
        lhs += &term(&self.a1, "xy", false);
        lhs += &term(&self.a3, "y", false);
        let mut rhs = "x^3".to_string();
        rhs += &term(&self.a2, "x^2", false);
        rhs += &term(&self.a4, "x", false);
        rhs += &term(&self.a6, "", false);
        format!("{lhs} = {rhs}")
    }
}

/// Standard invariants of a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invariants {
    pub b2: BigInt,
    pub b4: BigInt,
    pub b6: BigInt,
    pub b8: BigInt,
    pub c4: BigInt,
    pub c6: BigInt,
    pub disc: BigInt,
    pub j: Rational,
}

fn raw_invariants(m: &WeierstrassModel) -> Invariants {
    let (a1, a2, a3, a4, a6) = (&m.a1, &m.a2, &m.a3, &m.a4, &m.a6);
    let b2 = a1 * a1 + a2 * 4;
    let b4 = a4 * 2 + a1 * a3;
    let b6 = a3 * a3 + a6 * 4;
    let b8 = a1 * a1 * a6 + a2 * a6 * 4 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
    let c4 = &b2 * &b2 - &b4 * 24;
    let b2cube: BigInt = &b2 * &b2 * &b2;
    let c6 = -b2cube + &b2 * &b4 * 36 - &b6 * 216;
    let b2b2b8: BigInt = &b2 * &b2 * &b8;
    let disc: BigInt = -b2b2b8 - &b4 * &b4 * &b4 * 8 - &b6 * &b6 * 27 + &b2 * &b4 * &b6 * 9;
    let j = if disc.is_zero() {
        Rational::zero()
    } else {
        Rational::new(&c4 * &c4 * &c4, disc.clone())
    };
    Invariants {
        b2,
        b4,
        b6,
        b8,
        c4,
        c6,
        disc,
        j,
    }
}

/// `(b2, b4, b6, b8, c4, c6, Δ, j)`.
pub fn invariants(m: &WeierstrassModel) -> Result<Invariants, CurveError> {
    let inv = raw_invariants(m);
    if inv.disc.is_zero() {
        return Err(CurveError::SingularModel);
    }
    Ok(inv)
}

fn val_or_inf(n: &BigInt, p: u64) -> u32 {
    if n.is_zero() {
        u32::MAX
    } else {
        int_valuation(n, p)
    }
}

/// Kraus's local condition at `p ∈ {2, 3}` for `(c4, c6)` to come from an
/// integral model; always true for `p ≥ 5`.
fn kraus_ok(c4: &BigInt, c6: &BigInt, p: u64) -> bool {
    match p {
        3 => val_or_inf(c6, 3) != 2,
        2 => {
            let m4 = c6.mod_floor(&BigInt::from(4));
            if m4 == BigInt::from(3) {
                return true;
            }
            let m32 = c6.mod_floor(&BigInt::from(32));
            val_or_inf(c4, 2) >= 4 && (m32.is_zero() || m32 == BigInt::from(8))
        }
        _ => true,
    }
}

/// Exponent `k` such that scaling by `p^k` reaches a model minimal at `p`.
fn minimal_scaling_exponent(c4: &BigInt, c6: &BigInt, disc: &BigInt, p: u64) -> u32 {
    let v4 = val_or_inf(c4, p);
    let v6 = val_or_inf(c6, p);
    let vd = int_valuation(disc, p);
    let mut k = (v4 / 4).min(v6 / 6).min(vd / 12);
    let pb = BigInt::from(p);
    while k > 0 {
        let c4s = c4 / pb.pow(4 * k);
        let c6s = c6 / pb.pow(6 * k);
        if kraus_ok(&c4s, &c6s, p) {
            break;
        }
        k -= 1;
    }
    k
}

/// Reduced model with the given `c4`, `c6` (which must satisfy Kraus's
/// conditions).
fn model_from_c4c6(c4: &BigInt, c6: &BigInt) -> Option<WeierstrassModel> {
    let twelve = BigInt::from(12);
    let mut b2 = (-c6).mod_floor(&twelve);
    if b2 > BigInt::from(6) {
        b2 -= &twelve;
    }
    let (b4, r) = (&b2 * &b2 - c4).div_rem(&BigInt::from(24));
    if !r.is_zero() {
        return None;
    }
    let b2cube: BigInt = &b2 * &b2 * &b2;
    let num: BigInt = -b2cube + &b2 * &b4 * 36 - c6;
    let (b6, r) = num.div_rem(&BigInt::from(216));
    if !r.is_zero() {
        return None;
    }
    let two = BigInt::from(2);
    let a1 = b2.mod_floor(&two);
    let a3 = b6.mod_floor(&two);
    let a2 = (&b2 - &a1) / 4;
    let a4 = (&b4 - &a1 * &a3) / 2;
    let a6 = (&b6 - &a3) / 4;
    let m = WeierstrassModel { a1, a2, a3, a4, a6 };
    let inv = raw_invariants(&m);
    (inv.c4 == *c4 && inv.c6 == *c6).then_some(m)
}

fn scaling_primes(c4: &BigInt, c6: &BigInt) -> Vec<u64> {
    let g = c4.gcd(c6);
    if g.is_one() {
        return Vec::new();
    }
    prime_divisors_u64(&g)
}

/// Global minimal model, reduced so that `a1, a3 ∈ {0, 1}`, `a2 ∈ {−1, 0, 1}`.
pub fn minimal_model(m: &WeierstrassModel) -> Result<WeierstrassModel, CurveError> {
    let inv = invariants(m)?;
    let mut u = BigInt::one();
    for p in scaling_primes(&inv.c4, &inv.c6) {
        let k = minimal_scaling_exponent(&inv.c4, &inv.c6, &inv.disc, p);
        u *= BigInt::from(p).pow(k);
    }
    let c4 = &inv.c4 / u.pow(4);
    let c6 = &inv.c6 / u.pow(6);
    Ok(model_from_c4c6(&c4, &c6).expect("Kraus conditions hold after scaling"))
}

/// True when no change of variables lowers `ord_p(Δ)`.
pub fn is_minimal_at(m: &WeierstrassModel, p: u64) -> Result<bool, CurveError> {
    let inv = invariants(m)?;
    Ok(minimal_scaling_exponent(&inv.c4, &inv.c6, &inv.disc, p) == 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReductionKind {
    Good,
    SplitMultiplicative,
    NonsplitMultiplicative,
    Additive,
}

impl ReductionKind {
    pub fn is_multiplicative(self) -> bool {
        matches!(
            self,
            ReductionKind::SplitMultiplicative | ReductionKind::NonsplitMultiplicative
        )
    }
}

impl fmt::Display for ReductionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReductionKind::Good => "good",
            ReductionKind::SplitMultiplicative => "split multiplicative",
            ReductionKind::NonsplitMultiplicative => "nonsplit multiplicative",
            ReductionKind::Additive => "additive",
        })
    }
}

/// Kodaira symbol; additive fibres are not classified further.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kodaira {
    I(u32),
    Additive,
}

impl fmt::Display for Kodaira {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kodaira::I(n) => write!(f, "I{n}"),
            Kodaira::Additive => f.write_str("additive"),
        }
    }
}

impl Serialize for Kodaira {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Kodaira {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "additive" {
            return Ok(Kodaira::Additive);
        }
        s.strip_prefix('I')
            .and_then(|n| n.parse().ok())
            .map(Kodaira::I)
            .ok_or_else(|| serde::de::Error::custom(format!("bad Kodaira symbol `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub prime: u64,
    pub kind: ReductionKind,
    pub kodaira: Kodaira,
    /// `None` for additive reduction.
    pub tamagawa: Option<u32>,
    pub disc_valuation: u32,
    /// `None` for additive reduction at 2 or 3.
    pub conductor_exponent: Option<u32>,
}

/// Split iff the tangent directions at the node are `F_p`-rational.
fn node_is_split(m: &WeierstrassModel, inv: &Invariants, p: u64) -> bool {
    if p != 2 {
        return legendre(&-&inv.c6, p) == 1;
    }
    let r = |x: &BigInt| x.mod_floor(&BigInt::from(2)).to_u64().unwrap();
    let (a1, a2, a3, a4, a6) = (r(&m.a1), r(&m.a2), r(&m.a3), r(&m.a4), r(&m.a6));
    for x in 0..2u64 {
        for y in 0..2u64 {
            let f = y * y + a1 * x * y + a3 * y + x * x * x + a2 * x * x + a4 * x + a6;
            let fx = a1 * y + x * x + a4; // 3x^2 ≡ x^2, 2a2x ≡ 0
            let fy = a1 * x + a3; // 2y ≡ 0
            if f % 2 == 0 && fx % 2 == 0 && fy % 2 == 0 {
                // translate the node to the origin; the tangent cone is
                // Y^2 + a1·XY − a2'·X^2 with a2' = a2 + 3x
                let a2t = (a2 + 3 * x) % 2;
                return (0..2u64).any(|t| (t * t + a1 * t + a2t) % 2 == 0);
            }
        }
    }
    unreachable!("multiplicative reduction has a singular point")
}

/// Reduction data of a model that is minimal at `p`.
pub fn reduction_type(m: &WeierstrassModel, p: u64) -> Result<ReductionReport, CurveError> {
    if !is_prime(p) {
        return Err(CurveError::NotPrime(p));
    }
    let inv = invariants(m)?;
    if !is_minimal_at(m, p)? {
        return Err(CurveError::NotMinimalAt(p));
    }
    let v = int_valuation(&inv.disc, p);
    let pb = BigInt::from(p);
    let report = if v == 0 {
        ReductionReport {
            prime: p,
            kind: ReductionKind::Good,
            kodaira: Kodaira::I(0),
            tamagawa: Some(1),
            disc_valuation: 0,
            conductor_exponent: Some(0),
        }
    } else if !(&inv.c4 % &pb).is_zero() {
        let split = node_is_split(m, &inv, p);
        ReductionReport {
            prime: p,
            kind: if split {
                ReductionKind::SplitMultiplicative
            } else {
                ReductionKind::NonsplitMultiplicative
            },
            kodaira: Kodaira::I(v),
            tamagawa: Some(if split {
                v
            } else if v.is_multiple_of(2) {
                2
            } else {
                1
            }),
            disc_valuation: v,
            conductor_exponent: Some(1),
        }
    } else {
        ReductionReport {
            prime: p,
            kind: ReductionKind::Additive,
            kodaira: Kodaira::Additive,
            tamagawa: None,
            disc_valuation: v,
            conductor_exponent: (p >= 5).then_some(2),
        }
    };
    Ok(report)
}

/// Kodaira symbol at `p`; additive fibres are refused.
pub fn kodaira_symbol(m: &WeierstrassModel, p: u64) -> Result<Kodaira, CurveError> {
    let r = reduction_type(m, p)?;
    match r.kodaira {
        Kodaira::Additive => Err(CurveError::AdditiveUnsupportedDetail(p)),
        k => Ok(k),
    }
}

/// Primes dividing the discriminant, ascending.
pub fn bad_primes(m: &WeierstrassModel) -> Result<Vec<u64>, CurveError> {
    Ok(prime_divisors_u64(&invariants(m)?.disc))
}

/// Reduction report at every bad prime of the minimal model.
pub fn reduction_table(m: &WeierstrassModel) -> Result<Vec<ReductionReport>, CurveError> {
    let min = minimal_model(m)?;
    bad_primes(&min)?.into_iter().map(|p| reduction_type(&min, p)).collect()
}

/// `a_p = p + 1 − #E(F_p)` at a prime of good reduction for this model.
pub fn ap_trace(m: &WeierstrassModel, p: u64) -> Result<i64, CurveError> {
    if !is_prime(p) {
        return Err(CurveError::NotPrime(p));
    }
    if p > AP_COUNT_LIMIT {
        return Err(CurveError::PrimeTooLarge(p));
    }
    let inv = invariants(m)?;
    if (&inv.disc % p).is_zero() {
        return Err(CurveError::BadReduction(p));
    }
    if p == 2 {
        return Ok(3 - count_points_naive(m, 2) as i64);
    }
    // (2y + a1x + a3)^2 = 4x^3 + b2x^2 + 2b4x + b6
    let red = |x: &BigInt| x.mod_floor(&BigInt::from(p)).to_u64().unwrap() as u128;
    let (b2, b4, b6) = (red(&inv.b2), red(&inv.b4), red(&inv.b6));
    let pp = p as u128;
    let mut is_sq = vec![false; p as usize];
    for y in 1..=(p / 2) {
        is_sq[((y as u128 * y as u128) % pp) as usize] = true;
    }
    let mut sum: i64 = 0;
    for x in 0..pp {
        let g = ((4 * x % pp * x % pp * x) + b2 * x % pp * x + 2 * b4 * x + b6) % pp;
        if g != 0 {
            sum += if is_sq[g as usize] { 1 } else { -1 };
        }
    }
    Ok(-sum)
}

/// Projective point count by enumerating all `(x, y) ∈ F_p^2` (O(p^2)).
pub fn count_points_naive(m: &WeierstrassModel, p: u64) -> u64 {
    let r = |x: &BigInt| x.mod_floor(&BigInt::from(p)).to_u64().unwrap() as u128;
    let (a1, a2, a3, a4, a6) = (r(&m.a1), r(&m.a2), r(&m.a3), r(&m.a4), r(&m.a6));
    let pp = p as u128;
    let mut n = 1;
    for x in 0..pp {
        let rhs = (x * x % pp * x + a2 * x % pp * x + a4 * x + a6) % pp;
        for y in 0..pp {
            let lhs = (y * y + a1 * x % pp * y + a3 * y) % pp;
            if lhs == rhs {
                n += 1;
            }
        }
    }
    n
}

/// What a witness prime rules out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// Irreducible characteristic polynomial, nonzero trace: not Borel and
    /// not in the normalizer of a split Cartan.
    IrreducibleNonzeroTrace,
    /// Distinct rational eigenvalues, nonzero trace: not in the normalizer of
    /// a nonsplit Cartan.
    SplitNonzeroTrace,
    /// `a_p^2/p` avoids the values forced by an exceptional projective image.
    NotExceptional,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub prime: u64,
    pub ap: i64,
    pub kind: WitnessKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ImageCheck {
    Verified { witnesses: Vec<Witness> },
    Inconclusive { primes_tested: usize },
}

impl ImageCheck {
    pub fn is_verified(&self) -> bool {
        matches!(self, ImageCheck::Verified { .. })
    }
}

/// Witness kinds produced by the Frobenius class with trace `a` and
/// determinant `d` in `GL_2(F_l)`.
pub fn classify_frobenius(a: u64, d: u64, l: u64) -> Vec<WitnessKind> {
    let mut out = Vec::new();
    if a.is_multiple_of(l) {
        return out;
    }
    let disc = (a * a % l + l * l - 4 * d % l) % l;
    match legendre(&BigInt::from(disc), l) {
        -1 => out.push(WitnessKind::IrreducibleNonzeroTrace),
        1 => out.push(WitnessKind::SplitNonzeroTrace),
        _ => {}
    }
    let u = a * a % l * pow_mod(d, l - 2, l) % l;
    if ![0, 1, 2, 4].contains(&u) && !(u * u + l * l - 3 * u + 1).is_multiple_of(l) {
        out.push(WitnessKind::NotExceptional);
    }
    out
}

/// Looks for Frobenius elements ruling out every maximal subgroup of
/// `GL_2(F_l)` not containing `SL_2`. Never claims the image is small.
pub fn mod_l_image_contains_sl2(m: &WeierstrassModel, l: u64, prime_bound: u64) -> Result<ImageCheck, CurveError> {
    if !is_prime(l) {
        return Err(CurveError::NotPrime(l));
    }
    assert!(l >= 5, "mod-l image test needs l ≥ 5");
    let inv = invariants(m)?;
    let mut found: Vec<Witness> = Vec::new();
    let mut tested = 0;
    for p in primes_up_to(prime_bound.min(AP_COUNT_LIMIT)) {
        if p == l || (&inv.disc % p).is_zero() {
            continue;
        }
        tested += 1;
        let ap = ap_trace(m, p)?;
        let a = ap.rem_euclid(l as i64) as u64;
        for kind in classify_frobenius(a, p % l, l) {
            if !found.iter().any(|w| w.kind == kind) {
                found.push(Witness { prime: p, ap, kind });
            }
        }
        if found.len() == 3 {
            found.sort_by_key(|w| w.kind);
            return Ok(ImageCheck::Verified { witnesses: found });
        }
    }
    Ok(ImageCheck::Inconclusive { primes_tested: tested })
}
