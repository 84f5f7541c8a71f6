//! Fake adeles, region descriptors and their expected normalized
//! log-volumes.
//!
//! A region is never a point set. Each summand `K_{v0} ⊗ ... ⊗ K_{vj}` of a
//! tensor level carries a [`LocalRegion`], which records valuation data only.
//! All local volumes are rationals in units of `ln p` for the prime under
//! the summand; [`RegionDescriptor::ln_nu`] weights and sums them into a
//! [`LogValue`].
//!
//! Scalars act through one tensor factor, but an element `a ∈ K_v` has the
//! same `|·|_p` in every component of the product ring, so `a·O` is the
//! polydisc of valuation radius `ord_p(a)` whichever factor it acts through.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arakelov::{BasePlace, Divisor, LgpDivisor};
use crate::exactnum::{int, rational_str, rational_vec_str, sum_signed, LogValue, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AdelicError {
    #[error("no lifted place configured for {0}")]
    UnknownPlace(BasePlace),
    #[error("places over {prime} have Σ d_v = {total}, expected [F0:Q] = {base_degree}")]
    IncompleteFiber { prime: u64, total: u32, base_degree: u32 },
    #[error("invalid lifted place: {0}")]
    InvalidLift(String),
    #[error("malformed label `{0}`")]
    BadLabel(String),
    #[error("tensor index has length {got}, level {level} needs {}", level + 1)]
    LevelMismatch { level: usize, got: usize },
    #[error("peel index {index} out of range for level {level}")]
    PeelIndex { index: usize, level: usize },
    #[error("tensor index mixes primes")]
    MixedPrimes,
    #[error("divisor has an archimedean entry at {0}; regions model finite places only")]
    ArchimedeanEntry(BasePlace),
    #[error("region only admits an upper bound, ln ν ≤ {upper}")]
    InexactRegion { upper: LogValue },
    #[error("log-shell volume at {0} needs configuration (e ≥ p − 1 or p = 2)")]
    WildRamification(LiftedPlace),
    #[error("base degree mismatch: {0} vs {1}")]
    BaseDegreeMismatch(u32, u32),
    #[error("monoid step must be ≥ 0")]
    NegativeStep,
    #[error("lattice defect must be ≤ 0")]
    PositiveDefect,
}

/// The chosen place `v̲` of `K` above a base place `v`, with `e`, `f` of
/// `K_v̲/Q_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LiftedPlace {
    base: BasePlace,
    e: u32,
    f: u32,
}

impl LiftedPlace {
    pub fn new(base: BasePlace, e: u32, f: u32) -> Result<Self, AdelicError> {
        let bad = |m: String| AdelicError::InvalidLift(format!("{base}: {m}"));
        if !base.is_finite() {
            return Err(bad("archimedean".into()));
        }
        if e == 0 || f == 0 {
            return Err(bad("e, f must be ≥ 1".into()));
        }
        if !e.is_multiple_of(base.ramification()) || !f.is_multiple_of(base.residue_degree()) {
            return Err(bad(format!(
                "e={e}, f={f} not multiples of the base e={}, f={}",
                base.ramification(),
                base.residue_degree()
            )));
        }
        Ok(LiftedPlace { base, e, f })
    }

    /// `K = F0` at this place.
    pub fn trivial(base: BasePlace) -> Self {
        LiftedPlace::new(base, base.ramification(), base.residue_degree()).expect("finite base place")
    }

    pub fn base(&self) -> BasePlace {
        self.base
    }

    pub fn prime(&self) -> u64 {
        self.base.prime().expect("finite")
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn f(&self) -> u32 {
        self.f
    }

    /// `p=11/e=13,f=12`, or `p=5,d=2/e=2,f=1` when the base place is not
    /// the degree-1 place of `Q`.
    pub fn label(&self) -> String {
        let base = if self.base == BasePlace::rational(self.prime()) {
            format!("p={}", self.prime())
        } else {
            self.base.label()
        };
        format!("{base}/e={},f={}", self.e, self.f)
    }
}

impl fmt::Display for LiftedPlace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for LiftedPlace {
    type Err = AdelicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AdelicError::BadLabel(s.to_string());
        let (base, ef) = s.split_once('/').ok_or_else(bad)?;
        let base: BasePlace = if base.contains(',') {
            base.parse().map_err(|_| bad())?
        } else {
            let p = base.strip_prefix("p=").ok_or_else(bad)?;
            let p: u64 = p.parse().map_err(|_| bad())?;
            BasePlace::finite_with(p, 1, 1, 0).map_err(|_| bad())?
        };
        let (e, f) = ef.split_once(',').ok_or_else(bad)?;
        let e: u32 = e.strip_prefix("e=").ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let f: u32 = f.strip_prefix("f=").ok_or_else(bad)?.parse().map_err(|_| bad())?;
        LiftedPlace::new(base, e, f)
    }
}

impl Serialize for LiftedPlace {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for LiftedPlace {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// `(v̲_0, ..., v̲_j)`, all over one rational prime.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(into = "Vec<LiftedPlace>")]
pub struct TensorIndex(Vec<LiftedPlace>);

impl From<TensorIndex> for Vec<LiftedPlace> {
    fn from(t: TensorIndex) -> Self {
        t.0
    }
}

impl<'de> Deserialize<'de> for TensorIndex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        TensorIndex::new(Vec::<LiftedPlace>::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

impl TensorIndex {
    pub fn new(places: Vec<LiftedPlace>) -> Result<Self, AdelicError> {
        let first = places.first().ok_or(AdelicError::LevelMismatch { level: 0, got: 0 })?;
        if places.iter().any(|w| w.prime() != first.prime()) {
            return Err(AdelicError::MixedPrimes);
        }
        Ok(TensorIndex(places))
    }

    pub fn places(&self) -> &[LiftedPlace] {
        &self.0
    }

    pub fn prime(&self) -> u64 {
        self.0[0].prime()
    }

    pub fn level(&self) -> usize {
        self.0.len() - 1
    }

    /// Product of the factor weights `d_v/[F0:Q]`.
    pub fn weight(&self, base_degree: u32) -> Rational {
        let num: u64 = self.0.iter().map(|w| w.base.local_degree() as u64).product();
        let den = (base_degree as u64).pow(self.0.len() as u32);
        Rational::new(num.into(), den.into())
    }

    /// Number of factors that are ramified over `Q_p`.
    pub fn ramified_factors(&self) -> usize {
        self.0.iter().filter(|w| w.e > 1).count()
    }
}

impl fmt::Display for TensorIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(LiftedPlace::label).collect();
        write!(f, "({})", parts.join(" ⊗ "))
    }
}

/// `[F0_v : Q_p]/[F0 : Q]`.
pub fn place_weight(v: &BasePlace, base_degree: u32) -> Rational {
    Rational::new(v.local_degree().into(), base_degree.into())
}

/// The field extension data `(F0, V̲)`: one lifted place per base place,
/// with complete fibers over every configured prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FakeAdeles {
    base_degree: u32,
    lifted: BTreeMap<BasePlace, LiftedPlace>,
}

impl FakeAdeles {
    pub fn new(base_degree: u32, lifted: impl IntoIterator<Item = LiftedPlace>) -> Result<Self, AdelicError> {
        let lifted: BTreeMap<BasePlace, LiftedPlace> = lifted.into_iter().map(|w| (w.base, w)).collect();
        let mut totals: BTreeMap<u64, u32> = BTreeMap::new();
        for v in lifted.keys() {
            *totals.entry(v.prime().expect("finite")).or_insert(0) += v.local_degree();
        }
        for (prime, total) in totals {
            if total != base_degree {
                return Err(AdelicError::IncompleteFiber {
                    prime,
                    total,
                    base_degree,
                });
            }
        }
        Ok(FakeAdeles { base_degree, lifted })
    }

    /// `F0 = Q`, each prime with the given `(e, f)` of `K_v̲/Q_p`.
    pub fn over_q(data: impl IntoIterator<Item = (u64, u32, u32)>) -> Result<Self, AdelicError> {
        let lifts = data
            .into_iter()
            .map(|(p, e, f)| LiftedPlace::new(BasePlace::rational(p), e, f))
            .collect::<Result<Vec<_>, _>>()?;
        FakeAdeles::new(1, lifts)
    }

    /// Adds `K = F0` lifts for places of `d` that are not configured yet.
    /// Only sound when that completes every fiber, e.g. over `Q`.
    pub fn with_trivial_lifts(&self, d: &Divisor) -> Result<Self, AdelicError> {
        if d.base_degree() != self.base_degree {
            return Err(AdelicError::BaseDegreeMismatch(d.base_degree(), self.base_degree));
        }
        let mut lifted = self.lifted.clone();
        for v in d.entries().keys() {
            if !v.is_finite() {
                return Err(AdelicError::ArchimedeanEntry(*v));
            }
            lifted.entry(*v).or_insert_with(|| LiftedPlace::trivial(*v));
        }
        FakeAdeles::new(self.base_degree, lifted.into_values())
    }

    pub fn base_degree(&self) -> u32 {
        self.base_degree
    }

    pub fn lifted(&self) -> &BTreeMap<BasePlace, LiftedPlace> {
        &self.lifted
    }

    pub fn lift(&self, v: &BasePlace) -> Result<LiftedPlace, AdelicError> {
        self.lifted.get(v).copied().ok_or(AdelicError::UnknownPlace(*v))
    }

    pub fn primes(&self) -> BTreeSet<u64> {
        self.lifted.values().map(LiftedPlace::prime).collect()
    }

    /// Lifted places over `p`, in base-place order.
    pub fn fiber(&self, p: u64) -> Vec<LiftedPlace> {
        self.lifted.values().filter(|w| w.prime() == p).copied().collect()
    }

    /// Every tensor index of length `level + 1` over `p`.
    pub fn indices(&self, p: u64, level: usize) -> Vec<TensorIndex> {
        let fiber = self.fiber(p);
        let mut out: Vec<Vec<LiftedPlace>> = vec![Vec::new()];
        for _ in 0..=level {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    fiber.iter().map(move |w| {
                        let mut v = prefix.clone();
                        v.push(*w);
                        v
                    })
                })
                .collect();
        }
        out.into_iter().map(TensorIndex).collect()
    }
}

/// A measurable subset of one summand `K_{v⃗}`. Shifts and radii are
/// `ord_p` valuations of scalars; volumes are in units of `ln p`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LocalRegion {
    /// `a·O_{v⃗}` with `ord_p(a) = shift`.
    ScaledIntegerRing {
        #[serde(with = "rational_str")]
        shift: Rational,
    },
    /// `a·(I_{v0} ⊗ ... ⊗ I_{vj})`. `shells[i]` is the normalized
    /// log-volume of the log-shell of factor `i`, and `defect ≤ 0` that of
    /// `O_{v0} ⊗ ... ⊗ O_{vj}` inside `O_{v⃗}`.
    ScaledLogShellLattice {
        #[serde(with = "rational_str")]
        shift: Rational,
        #[serde(with = "rational_vec_str")]
        shells: Vec<Rational>,
        #[serde(with = "rational_str")]
        defect: Rational,
    },
    /// Polydisc `{x : |x|_p ≤ p^-radius}` in every component.
    Polydisc {
        #[serde(with = "rational_str")]
        radius: Rational,
    },
    /// `⋃_{N ≥ start} a^N·base` with `ord_p(a) = step ≥ 0`.
    MonoidOrbit {
        base: Box<LocalRegion>,
        #[serde(with = "rational_str")]
        step: Rational,
        start: u32,
    },
    UnionOf {
        members: Vec<LocalRegion>,
    },
}

/// Shape of a region up to scaling: unions of same-shape regions are the
/// largest member.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape<'a> {
    Disc,
    Lattice(&'a [Rational], &'a Rational),
}

impl LocalRegion {
    pub fn integral() -> Self {
        LocalRegion::ScaledIntegerRing {
            shift: Rational::zero(),
        }
    }

    pub fn ring(shift: Rational) -> Self {
        LocalRegion::ScaledIntegerRing { shift }
    }

    pub fn polydisc(radius: Rational) -> Self {
        LocalRegion::Polydisc { radius }
    }

    pub fn lattice(shift: Rational, shells: Vec<Rational>, defect: Rational) -> Result<Self, AdelicError> {
        if defect.is_positive() {
            return Err(AdelicError::PositiveDefect);
        }
        Ok(LocalRegion::ScaledLogShellLattice { shift, shells, defect })
    }

    pub fn orbit(base: LocalRegion, step: Rational, start: u32) -> Result<Self, AdelicError> {
        if step.is_negative() {
            return Err(AdelicError::NegativeStep);
        }
        Ok(LocalRegion::MonoidOrbit {
            base: Box::new(base),
            step,
            start,
        })
    }

    /// Flattened, sorted, deduplicated union; a single member is returned
    /// as itself.
    pub fn union(members: impl IntoIterator<Item = LocalRegion>) -> Self {
        let mut flat = BTreeSet::new();
        for m in members {
            match m {
                LocalRegion::UnionOf { members } => flat.extend(members),
                other => {
                    flat.insert(other);
                }
            }
        }
        let mut v: Vec<LocalRegion> = flat.into_iter().collect();
        if v.len() == 1 {
            v.pop().unwrap()
        } else {
            LocalRegion::UnionOf { members: v }
        }
    }

    /// The region scaled by an element of valuation `k`.
    pub fn scaled(&self, k: &Rational) -> LocalRegion {
        match self {
            LocalRegion::ScaledIntegerRing { shift } => LocalRegion::ring(shift + k),
            LocalRegion::Polydisc { radius } => LocalRegion::polydisc(radius + k),
            LocalRegion::ScaledLogShellLattice { shift, shells, defect } => LocalRegion::ScaledLogShellLattice {
                shift: shift + k,
                shells: shells.clone(),
                defect: defect.clone(),
            },
            LocalRegion::MonoidOrbit { base, step, start } => LocalRegion::MonoidOrbit {
                base: Box::new(base.scaled(k)),
                step: step.clone(),
                start: *start,
            },
            LocalRegion::UnionOf { members } => LocalRegion::UnionOf {
                members: members.iter().map(|m| m.scaled(k)).collect(),
            },
        }
    }

    /// Permutes per-factor data: factor `i` moves to position `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> LocalRegion {
        match self {
            LocalRegion::ScaledLogShellLattice { shift, shells, defect } => {
                let mut s = shells.clone();
                for (i, &t) in perm.iter().enumerate() {
                    s[t] = shells[i].clone();
                }
                LocalRegion::ScaledLogShellLattice {
                    shift: shift.clone(),
                    shells: s,
                    defect: defect.clone(),
                }
            }
            LocalRegion::MonoidOrbit { base, step, start } => LocalRegion::MonoidOrbit {
                base: Box::new(base.permuted(perm)),
                step: step.clone(),
                start: *start,
            },
            LocalRegion::UnionOf { members } => LocalRegion::union(members.iter().map(|m| m.permuted(perm))),
            other => other.clone(),
        }
    }

    /// `(shape, shift)` when the region is a single scaled shape. An orbit
    /// is its first term; every later term is contained in it.
    fn shape(&self) -> Option<(Shape<'_>, Rational)> {
        match self {
            LocalRegion::ScaledIntegerRing { shift } => Some((Shape::Disc, shift.clone())),
            LocalRegion::Polydisc { radius } => Some((Shape::Disc, radius.clone())),
            LocalRegion::ScaledLogShellLattice { shift, shells, defect } => {
                Some((Shape::Lattice(shells, defect), shift.clone()))
            }
            LocalRegion::MonoidOrbit { base, step, start } => {
                let (shape, k) = base.shape()?;
                Some((shape, k + step * int(*start as i64)))
            }
            LocalRegion::UnionOf { members } => {
                let mut it = members.iter().map(LocalRegion::shape);
                let (shape, mut best) = it.next()??;
                for m in it {
                    let (s, k) = m?;
                    if s != shape {
                        return None;
                    }
                    if k < best {
                        best = k;
                    }
                }
                Some((shape, best))
            }
        }
    }

    /// Exact normalized log-volume in units of `ln p`, or `Err(upper)`.
    pub fn volume(&self) -> Result<Rational, Rational> {
        match self.shape() {
            Some((Shape::Disc, k)) => Ok(-k),
            Some((Shape::Lattice(shells, defect), k)) => {
                let pos = std::iter::once(defect).chain(shells).map(|x| (false, x));
                Ok(sum_signed(pos.chain([(true, &k)])))
            }
            None => Err(-self.hull_radius()),
        }
    }

    /// Valuation radius of the smallest polydisc containing the region.
    pub fn hull_radius(&self) -> Rational {
        match self {
            LocalRegion::ScaledIntegerRing { shift } => shift.clone(),
            LocalRegion::Polydisc { radius } => radius.clone(),
            LocalRegion::ScaledLogShellLattice { shift, shells, .. } => shells.iter().fold(shift.clone(), |a, s| a - s),
            LocalRegion::MonoidOrbit { base, step, start } => base.hull_radius() + step * int(*start as i64),
            LocalRegion::UnionOf { members } => members
                .iter()
                .map(LocalRegion::hull_radius)
                .min()
                .expect("nonempty union"),
        }
    }

    pub fn hull(&self) -> LocalRegion {
        LocalRegion::polydisc(self.hull_radius())
    }

    pub fn is_disc(&self) -> bool {
        matches!(
            self,
            LocalRegion::ScaledIntegerRing { .. } | LocalRegion::Polydisc { .. }
        )
    }

    /// True when every piece is expressed through the log-shell lattice.
    pub fn is_lattice_aligned(&self) -> bool {
        match self {
            LocalRegion::ScaledLogShellLattice { .. } => true,
            LocalRegion::MonoidOrbit { base, .. } => base.is_lattice_aligned(),
            LocalRegion::UnionOf { members } => members.iter().all(LocalRegion::is_lattice_aligned),
            _ => false,
        }
    }
}

/// A random measurable set at one tensor level `j` (power `j+1`).
/// Indices without a summand are the full integral summand.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RegionDescriptor {
    level: usize,
    base_degree: u32,
    summands: BTreeMap<TensorIndex, LocalRegion>,
    ind2_closed: bool,
}

impl RegionDescriptor {
    pub fn full(level: usize, base_degree: u32) -> Self {
        RegionDescriptor {
            level,
            base_degree,
            summands: BTreeMap::new(),
            ind2_closed: false,
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn base_degree(&self) -> u32 {
        self.base_degree
    }

    pub fn summands(&self) -> &BTreeMap<TensorIndex, LocalRegion> {
        &self.summands
    }

    pub fn ind2_closed(&self) -> bool {
        self.ind2_closed
    }

    pub fn set_ind2_closed(&mut self, closed: bool) {
        self.ind2_closed = closed;
    }

    /// The region at `index`, the integral ring when absent.
    pub fn region(&self, index: &TensorIndex) -> LocalRegion {
        self.summands.get(index).cloned().unwrap_or_else(LocalRegion::integral)
    }

    pub fn insert(&mut self, index: TensorIndex, region: LocalRegion) -> Result<(), AdelicError> {
        if index.places().len() != self.level + 1 {
            return Err(AdelicError::LevelMismatch {
                level: self.level,
                got: index.places().len(),
            });
        }
        if region == LocalRegion::integral() {
            self.summands.remove(&index);
        } else {
            self.summands.insert(index, region);
        }
        Ok(())
    }

    pub fn prime_support(&self) -> BTreeSet<u64> {
        self.summands.keys().map(TensorIndex::prime).collect()
    }

    fn weighted(&self, exact: bool) -> Result<LogValue, LogValue> {
        // every index has level + 1 factors, so the weights share the
        // denominator base_degree^(level + 1)
        let mut per_prime: BTreeMap<u64, Vec<Rational>> = BTreeMap::new();
        let mut is_exact = true;
        for (idx, r) in &self.summands {
            let vol = match r.volume() {
                Ok(v) => v,
                Err(upper) => {
                    is_exact = false;
                    upper
                }
            };
            let num: u64 = idx.places().iter().map(|w| w.base.local_degree() as u64).product();
            let term = Rational::new_raw(vol.numer() * BigInt::from(num), vol.denom().clone());
            per_prime.entry(idx.prime()).or_default().push(term);
        }
        let den = int((self.base_degree as i64).pow(self.level as u32 + 1));
        let total = LogValue::from_parts(
            per_prime
                .into_iter()
                .map(|(p, terms)| (p, sum_signed(terms.iter().map(|x| (false, x))) / &den)),
            Rational::zero(),
        );
        if exact && !is_exact {
            Err(total)
        } else {
            Ok(total)
        }
    }

    /// Expected normalized log-volume `ln ν̄`.
    pub fn ln_nu(&self) -> Result<LogValue, AdelicError> {
        self.weighted(true)
            .map_err(|upper| AdelicError::InexactRegion { upper })
    }

    /// `ln ν̄` where exact, otherwise the hull-based upper bound.
    pub fn ln_nu_upper(&self) -> LogValue {
        self.weighted(false).expect("upper bound always available")
    }

    /// Summand-wise smallest polydisc.
    pub fn hull(&self) -> RegionDescriptor {
        RegionDescriptor {
            level: self.level,
            base_degree: self.base_degree,
            summands: self
                .summands
                .iter()
                .map(|(k, r)| (k.clone(), r.hull()))
                .filter(|(_, r)| *r != LocalRegion::polydisc(Rational::zero()))
                .collect(),
            ind2_closed: false,
        }
    }

    /// Replaces every summand by `f(index, region)`.
    pub fn map_summands(&self, mut f: impl FnMut(&TensorIndex, &LocalRegion) -> LocalRegion) -> RegionDescriptor {
        let mut out = RegionDescriptor::full(self.level, self.base_degree);
        for (k, r) in &self.summands {
            out.insert(k.clone(), f(k, r)).expect("same level");
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SummandRepr {
    index: TensorIndex,
    region: LocalRegion,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DescriptorRepr {
    level: usize,
    #[serde(default = "one")]
    base_degree: u32,
    summands: Vec<SummandRepr>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    ind2_closed: bool,
}

fn one() -> u32 {
    1
}

impl Serialize for RegionDescriptor {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        DescriptorRepr {
            level: self.level,
            base_degree: self.base_degree,
            summands: self
                .summands
                .iter()
                .map(|(k, r)| SummandRepr {
                    index: k.clone(),
                    region: r.clone(),
                })
                .collect(),
            ind2_closed: self.ind2_closed,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RegionDescriptor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let r = DescriptorRepr::deserialize(d)?;
        if r.base_degree == 0 {
            return Err(D::Error::custom("base_degree must be ≥ 1"));
        }
        let mut out = RegionDescriptor::full(r.level, r.base_degree);
        out.ind2_closed = r.ind2_closed;
        for s in r.summands {
            for w in s.index.places() {
                if w.base().local_degree() > r.base_degree {
                    return Err(D::Error::custom(format!("{w}: local degree exceeds base_degree")));
                }
            }
            if let LocalRegion::ScaledLogShellLattice { shells, defect, .. } = &s.region {
                if shells.len() != r.level + 1 {
                    return Err(D::Error::custom("lattice needs one shell per tensor factor"));
                }
                if defect.is_positive() {
                    return Err(D::Error::custom("lattice defect must be ≤ 0"));
                }
            }
            out.insert(s.index, s.region).map_err(D::Error::custom)?;
        }
        Ok(out)
    }
}

/// `O(−D)` at tensor level `level`, scaled through factor `peel_index` by an
/// adele with `ord_v = ord_v(D)`.
pub fn region_of_divisor(
    d: &Divisor,
    level: usize,
    peel_index: usize,
    ctx: &FakeAdeles,
) -> Result<RegionDescriptor, AdelicError> {
    if peel_index > level {
        return Err(AdelicError::PeelIndex {
            index: peel_index,
            level,
        });
    }
    if d.base_degree() != ctx.base_degree {
        return Err(AdelicError::BaseDegreeMismatch(d.base_degree(), ctx.base_degree));
    }
    let mut primes = BTreeSet::new();
    for v in d.entries().keys() {
        if !v.is_finite() {
            return Err(AdelicError::ArchimedeanEntry(*v));
        }
        ctx.lift(v)?;
        primes.insert(v.prime().unwrap());
    }
    let mut out = RegionDescriptor::full(level, ctx.base_degree);
    for p in primes {
        for idx in ctx.indices(p, level) {
            let w = idx.places()[peel_index].base();
            let a = d.coeff(&w);
            if !a.is_zero() {
                let shift = a / int(w.ramification() as i64);
                out.insert(idx, LocalRegion::ring(shift))?;
            }
        }
    }
    Ok(out)
}

/// `O_L(−P)`: component `j` at level `j` through the default peel index `j`.
pub fn region_of_lgp(p: &LgpDivisor, ctx: &FakeAdeles) -> Result<Vec<RegionDescriptor>, AdelicError> {
    p.components()
        .iter()
        .enumerate()
        .map(|(k, d)| region_of_divisor(d, k + 1, k + 1, ctx))
        .collect()
}

/// Uniform average of `ln ν̄` over the components.
pub fn ln_nu_average(regions: &[RegionDescriptor]) -> Result<LogValue, AdelicError> {
    let mut total = LogValue::zero();
    for r in regions {
        total = &total + &r.ln_nu()?;
    }
    Ok(total.scale(&Rational::new(1.into(), (regions.len() as i64).into())))
}

/// Acts by an element with `ord_p = a_ord` at every place over `p`, through
/// tensor factor `i`.
pub fn peel_act(
    a_ord: &Rational,
    p: u64,
    i: usize,
    r: &RegionDescriptor,
    ctx: &FakeAdeles,
) -> Result<RegionDescriptor, AdelicError> {
    peel_act_where(a_ord, i, r, ctx, p, |_| true)
}

/// As [`peel_act`], restricted to summands whose factor `i` is `v`.
pub fn peel_act_place(
    a_ord: &Rational,
    v: &BasePlace,
    i: usize,
    r: &RegionDescriptor,
    ctx: &FakeAdeles,
) -> Result<RegionDescriptor, AdelicError> {
    ctx.lift(v)?;
    let p = v.prime().unwrap();
    peel_act_where(a_ord, i, r, ctx, p, |w| w.base() == *v)
}

fn peel_act_where(
    a_ord: &Rational,
    i: usize,
    r: &RegionDescriptor,
    ctx: &FakeAdeles,
    p: u64,
    hit: impl Fn(&LiftedPlace) -> bool,
) -> Result<RegionDescriptor, AdelicError> {
    if i > r.level {
        return Err(AdelicError::PeelIndex {
            index: i,
            level: r.level,
        });
    }
    let mut out = r.clone();
    if a_ord.is_zero() {
        return Ok(out);
    }
    for idx in ctx.indices(p, r.level) {
        if hit(&idx.places()[i]) {
            let reg = r.region(&idx).scaled(a_ord);
            out.insert(idx, reg)?;
        }
    }
    Ok(out)
}

/// Normalized log-volume of the log-shell `(1/2p)·log(O^×)` of `K_v̲`, in
/// units of `ln p`: `(e−1)/e` when `p` is odd and `e < p − 1`.
pub fn logshell_volume(w: &LiftedPlace) -> Result<Rational, AdelicError> {
    let p = w.prime();
    if p == 2 || w.e as u64 >= p - 1 {
        return Err(AdelicError::WildRamification(*w));
    }
    Ok(Rational::new((w.e as i64 - 1).into(), (w.e as i64).into()))
}
