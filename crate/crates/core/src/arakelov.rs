//! Places, Arakelov divisors with rational coefficients, lgp divisors and
//! the q- and theta-pilot divisors.
//!
//! Sign convention: for an adele `t`, `div(t) = Σ ord_v(t_v)[v] −
//! Σ_{v|∞} ln‖t_v‖_v [v]`. With this choice `ln μ_v(t_v·O_v) = ln‖t_v‖_v =
//! −deg(ord_v(t_v)[v])` at every finite place, which is the identity the
//! region code in [`crate::adelic`] relies on.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::is_prime;
use crate::exactnum::{format_rational, int, parse_rational, LogValue, Rational};
use crate::tate::TateLocalData;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArakelovError {
    #[error("no places of bad multiplicative reduction given")]
    EmptyBadSet,
    #[error("malformed place label `{0}`")]
    BadLabel(String),
    #[error("invalid place: {0}")]
    InvalidPlace(String),
    #[error("places over {prime} have local degrees summing to {total} > [F0:Q] = {base_degree}")]
    InconsistentPlaces {
        prime: String,
        total: u32,
        base_degree: u32,
    },
    #[error("base field degrees differ: {0} vs {1}")]
    BaseDegreeMismatch(u32, u32),
    #[error("pilot needs odd residue characteristic, got {0}")]
    EvenResidue(BasePlace),
    #[error("Tate data at {place} is for p = {data}")]
    PrimeMismatch { place: BasePlace, data: u64 },
    #[error("lgp divisor needs at least one component")]
    EmptyLgp,
    #[error("{0} is not a prime ≥ 3")]
    BadL(u64),
    #[error("decomposition of {place} has Σ e·f = {got}, expected {expected}")]
    BadDecomposition { place: BasePlace, got: u32, expected: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PlaceKind {
    Finite(u64),
    Archimedean,
}

/// A place of the base field `F0`, described by its completion data.
///
/// Finite places carry `d = [F0_v : Q_p]` and the residue degree `f`, so
/// `e = d/f`. `index` separates places with equal data over one prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasePlace {
    kind: PlaceKind,
    local_degree: u32,
    residue_degree: u32,
    index: u32,
}

impl BasePlace {
    /// The place of `Q` (or an unramified degree-`d` place) over `p`.
    pub fn finite(p: u64, local_degree: u32) -> Self {
        BasePlace::finite_with(p, local_degree, local_degree, 0).expect("valid finite place")
    }

    pub fn rational(p: u64) -> Self {
        BasePlace::finite(p, 1)
    }

    pub fn finite_with(p: u64, local_degree: u32, residue_degree: u32, index: u32) -> Result<Self, ArakelovError> {
        if !is_prime(p) {
            return Err(ArakelovError::InvalidPlace(format!("{p} is not prime")));
        }
        if local_degree == 0 || residue_degree == 0 || !local_degree.is_multiple_of(residue_degree) {
            return Err(ArakelovError::InvalidPlace(format!(
                "p={p}: residue degree {residue_degree} must divide local degree {local_degree}"
            )));
        }
        Ok(BasePlace {
            kind: PlaceKind::Finite(p),
            local_degree,
            residue_degree,
            index,
        })
    }

    pub fn archimedean(local_degree: u32, index: u32) -> Result<Self, ArakelovError> {
        if !(1..=2).contains(&local_degree) {
            return Err(ArakelovError::InvalidPlace(format!(
                "archimedean local degree {local_degree}"
            )));
        }
        Ok(BasePlace {
            kind: PlaceKind::Archimedean,
            local_degree,
            residue_degree: 1,
            index,
        })
    }

    pub fn kind(&self) -> PlaceKind {
        self.kind
    }

    pub fn prime(&self) -> Option<u64> {
        match self.kind {
            PlaceKind::Finite(p) => Some(p),
            PlaceKind::Archimedean => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.prime().is_some()
    }

    /// `d_v = [F0_v : Q_p]`.
    pub fn local_degree(&self) -> u32 {
        self.local_degree
    }

    pub fn residue_degree(&self) -> u32 {
        self.residue_degree
    }

    pub fn ramification(&self) -> u32 {
        self.local_degree / self.residue_degree
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    /// `p=11,d=1`, `p=5,d=2,f=1`, `p=7,d=1,i=1`, `inf,d=2`.
    pub fn label(&self) -> String {
        let mut s = match self.kind {
            PlaceKind::Finite(p) => format!("p={p},d={}", self.local_degree),
            PlaceKind::Archimedean => format!("inf,d={}", self.local_degree),
        };
        if self.is_finite() && self.residue_degree != self.local_degree {
            s += &format!(",f={}", self.residue_degree);
        }
        if self.index != 0 {
            s += &format!(",i={}", self.index);
        }
        s
    }
}

impl fmt::Display for BasePlace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for BasePlace {
    type Err = ArakelovError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ArakelovError::BadLabel(s.to_string());
        let mut prime = None;
        let mut arch = false;
        let (mut d, mut f, mut i) = (None, None, 0u32);
        for (k, part) in s.split(',').map(str::trim).enumerate() {
            if k == 0 && part == "inf" {
                arch = true;
                continue;
            }
            let (key, val) = part.split_once('=').ok_or_else(bad)?;
            let n: u64 = val.trim().parse().map_err(|_| bad())?;
            let n32 = || u32::try_from(n).map_err(|_| bad());
            match (k, key.trim()) {
                (0, "p") => prime = Some(n),
                (_, "d") if d.is_none() => d = Some(n32()?),
                (_, "f") if f.is_none() && !arch => f = Some(n32()?),
                (_, "i") => i = n32()?,
                _ => return Err(bad()),
            }
        }
        let d = d.ok_or_else(bad)?;
        match (prime, arch) {
            (Some(p), false) => BasePlace::finite_with(p, d, f.unwrap_or(d), i),
            (None, true) => BasePlace::archimedean(d, i),
            _ => Err(bad()),
        }
    }
}

impl Serialize for BasePlace {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for BasePlace {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// `Σ a_v [v]` over a base field of degree `base_degree`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Divisor {
    base_degree: u32,
    entries: BTreeMap<BasePlace, Rational>,
}

impl Divisor {
    pub fn zero(base_degree: u32) -> Self {
        assert!(base_degree >= 1);
        Divisor {
            base_degree,
            entries: BTreeMap::new(),
        }
    }

    /// Builds a divisor, merging repeated places and dropping zeros.
    pub fn from_entries(
        base_degree: u32,
        entries: impl IntoIterator<Item = (BasePlace, Rational)>,
    ) -> Result<Self, ArakelovError> {
        let mut d = Divisor::zero(base_degree);
        for (v, c) in entries {
            d.add_entry(v, c);
        }
        d.check_places()?;
        Ok(d)
    }

    /// `c·[v]`.
    pub fn single(base_degree: u32, v: BasePlace, c: Rational) -> Result<Self, ArakelovError> {
        Divisor::from_entries(base_degree, [(v, c)])
    }

    fn add_entry(&mut self, v: BasePlace, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.entries.entry(v).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.entries.remove(&v);
        }
    }

    fn check_places(&self) -> Result<(), ArakelovError> {
        let mut totals: BTreeMap<Option<u64>, u32> = BTreeMap::new();
        for v in self.entries.keys() {
            *totals.entry(v.prime()).or_insert(0) += v.local_degree();
        }
        for (p, total) in totals {
            if total > self.base_degree {
                return Err(ArakelovError::InconsistentPlaces {
                    prime: p.map_or("inf".to_string(), |p| p.to_string()),
                    total,
                    base_degree: self.base_degree,
                });
            }
        }
        Ok(())
    }

    pub fn base_degree(&self) -> u32 {
        self.base_degree
    }

    pub fn entries(&self) -> &BTreeMap<BasePlace, Rational> {
        &self.entries
    }

    pub fn coeff(&self, v: &BasePlace) -> Rational {
        self.entries.get(v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_finite_supported(&self) -> bool {
        self.entries.keys().all(BasePlace::is_finite)
    }

    pub fn add(&self, o: &Divisor) -> Result<Divisor, ArakelovError> {
        if self.base_degree != o.base_degree {
            return Err(ArakelovError::BaseDegreeMismatch(self.base_degree, o.base_degree));
        }
        let mut d = self.clone();
        for (v, c) in &o.entries {
            d.add_entry(*v, c.clone());
        }
        d.check_places()?;
        Ok(d)
    }

    pub fn scale(&self, c: &Rational) -> Divisor {
        let mut d = Divisor::zero(self.base_degree);
        for (v, a) in &self.entries {
            d.add_entry(*v, a * c);
        }
        d
    }

    /// `Σ_{v∤∞} a_v·f_v·ln p + Σ_{v|∞} a_v`.
    pub fn degree(&self) -> LogValue {
        let mut out = LogValue::zero();
        for (v, a) in &self.entries {
            let term = match v.prime() {
                Some(p) => LogValue::ln_scaled(p, a * int(v.residue_degree() as i64)),
                None => LogValue::arch(a.clone()),
            };
            out = &out + &term;
        }
        out
    }

    /// `degree / [F0 : Q]`.
    pub fn normalized_degree(&self) -> LogValue {
        self.degree().scale(&Rational::new(1.into(), self.base_degree.into()))
    }

    /// Pullback to an extension of degree `degree`. `decomposition[v]` lists
    /// `(e(w/v), f(w/v))` for the places `w` above each finite `v`; a finite
    /// place missing from the map is taken to be inert. Each `w` gets
    /// coefficient `e(w/v)·a_v`; an archimedean `v` is sent to
    /// `Σ (d_w/d_v)·a_v [w]` with complex places absorbing pairs.
    pub fn pullback(
        &self,
        degree: u32,
        decomposition: &BTreeMap<BasePlace, Vec<(u32, u32)>>,
    ) -> Result<Divisor, ArakelovError> {
        let mut out = Divisor::zero(self.base_degree * degree);
        let mut next_index: BTreeMap<(PlaceKind, u32, u32), u32> = BTreeMap::new();
        let mut fresh = |kind, d, f| {
            let k = next_index.entry((kind, d, f)).or_insert(0);
            *k += 1;
            *k - 1
        };
        for (v, a) in &self.entries {
            match v.prime() {
                Some(p) => {
                    let parts = decomposition.get(v).cloned().unwrap_or_else(|| vec![(1, degree)]);
                    let got: u32 = parts.iter().map(|(e, f)| e * f).sum();
                    if got != degree {
                        return Err(ArakelovError::BadDecomposition {
                            place: *v,
                            got,
                            expected: degree,
                        });
                    }
                    for (e, f) in parts {
                        let d = v.local_degree() * e * f;
                        let fw = v.residue_degree() * f;
                        let i = fresh(v.kind(), d, fw);
                        let w = BasePlace::finite_with(p, d, fw, i)?;
                        out.add_entry(w, a * int(e as i64));
                    }
                }
                None => {
                    // (1, 1) is a real place above a real v, (1, 2) a complex one
                    let default = if v.local_degree() == 2 {
                        vec![(1, 2); degree as usize]
                    } else {
                        vec![(1, 1); degree as usize]
                    };
                    let parts = decomposition.get(v).cloned().unwrap_or(default);
                    let got: u32 = parts.iter().map(|(_, f)| (*f).max(v.local_degree())).sum();
                    if got != degree * v.local_degree() {
                        return Err(ArakelovError::BadDecomposition {
                            place: *v,
                            got,
                            expected: degree * v.local_degree(),
                        });
                    }
                    for (_, f) in parts {
                        let d = f.max(v.local_degree());
                        let i = fresh(PlaceKind::Archimedean, d, 1);
                        let w = BasePlace::archimedean(d, i)?;
                        out.add_entry(w, a * Rational::new(d.into(), v.local_degree().into()));
                    }
                }
            }
        }
        out.check_places()?;
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryRepr {
    place: BasePlace,
    coeff: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DivisorRepr {
    base_degree: u32,
    entries: Vec<EntryRepr>,
}

impl Serialize for Divisor {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        DivisorRepr {
            base_degree: self.base_degree,
            entries: self
                .entries
                .iter()
                .map(|(v, c)| EntryRepr {
                    place: *v,
                    coeff: format_rational(c),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Divisor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let r = DivisorRepr::deserialize(d)?;
        if r.base_degree == 0 {
            return Err(D::Error::custom("base_degree must be ≥ 1"));
        }
        let mut entries = Vec::new();
        for e in r.entries {
            entries.push((e.place, parse_rational(&e.coeff).map_err(D::Error::custom)?));
        }
        Divisor::from_entries(r.base_degree, entries).map_err(D::Error::custom)
    }
}

impl fmt::Display for Divisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(v, c)| format!("({})·[{v}]", format_rational(c)))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// A tuple `(P_1, ..., P_r)` of divisors over one base field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Divisor>", into = "Vec<Divisor>")]
pub struct LgpDivisor {
    components: Vec<Divisor>,
}

impl TryFrom<Vec<Divisor>> for LgpDivisor {
    type Error = ArakelovError;
    fn try_from(v: Vec<Divisor>) -> Result<Self, Self::Error> {
        LgpDivisor::new(v)
    }
}

impl From<LgpDivisor> for Vec<Divisor> {
    fn from(p: LgpDivisor) -> Self {
        p.components
    }
}

impl LgpDivisor {
    pub fn new(components: Vec<Divisor>) -> Result<Self, ArakelovError> {
        let first = components.first().ok_or(ArakelovError::EmptyLgp)?;
        if let Some(d) = components.iter().find(|d| d.base_degree != first.base_degree) {
            return Err(ArakelovError::BaseDegreeMismatch(first.base_degree, d.base_degree));
        }
        Ok(LgpDivisor { components })
    }

    pub fn components(&self) -> &[Divisor] {
        &self.components
    }

    /// Component `j`, counted from 1.
    pub fn component(&self, j: usize) -> &Divisor {
        &self.components[j - 1]
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn base_degree(&self) -> u32 {
        self.components[0].base_degree
    }
}

/// `(1/r)·Σ_j normalized_degree(P_j)`.
pub fn degree_lgp(p: &LgpDivisor) -> LogValue {
    let r = Rational::new(1.into(), (p.len() as i64).into());
    let total: LogValue = p.components.iter().map(Divisor::normalized_degree).sum();
    total.scale(&r)
}

/// Tate data at the chosen bad places of the base field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TateTable {
    pub base_degree: u32,
    pub places: BTreeMap<BasePlace, TateLocalData>,
}

impl TateTable {
    /// `F0 = Q`, with the given primes and `ord_p(q)`.
    pub fn over_q(data: impl IntoIterator<Item = TateLocalData>) -> Self {
        TateTable {
            base_degree: 1,
            places: data.into_iter().map(|t| (BasePlace::rational(t.prime), t)).collect(),
        }
    }

    fn validated(&self) -> Result<(), ArakelovError> {
        if self.places.is_empty() {
            return Err(ArakelovError::EmptyBadSet);
        }
        for (v, t) in &self.places {
            if v.prime() != Some(t.prime) {
                return Err(ArakelovError::PrimeMismatch {
                    place: *v,
                    data: t.prime,
                });
            }
            if t.prime == 2 {
                return Err(ArakelovError::EvenResidue(*v));
            }
        }
        Ok(())
    }
}

fn check_l(l: u64) -> Result<(), ArakelovError> {
    if l < 3 || !is_prime(l) {
        return Err(ArakelovError::BadL(l));
    }
    Ok(())
}

fn pilot_component(tate: &TateTable, l: u64, j: u64) -> Result<Divisor, ArakelovError> {
    let two_l = Rational::from_integer((2 * l).into());
    Divisor::from_entries(
        tate.base_degree,
        tate.places.iter().map(|(v, t)| {
            let ord = Rational::from_integer((t.ord_q * j * j).into());
            (*v, ord / &two_l)
        }),
    )
}

/// `P_q = Σ_{v∈S} (ord_v(q_v)/2l)·[v]`.
pub fn q_pilot(tate: &TateTable, l: u64) -> Result<Divisor, ArakelovError> {
    tate.validated()?;
    check_l(l)?;
    pilot_component(tate, l, 1)
}

/// `P_Θ = (P_{Θ,j})_{j=1..(l−1)/2}` with `P_{Θ,j} = Σ (j²·ord_v(q_v)/2l)·[v]`.
pub fn theta_pilot(tate: &TateTable, l: u64) -> Result<LgpDivisor, ArakelovError> {
    tate.validated()?;
    check_l(l)?;
    let comps = (1..=(l - 1) / 2)
        .map(|j| pilot_component(tate, l, j))
        .collect::<Result<Vec<_>, _>>()?;
    LgpDivisor::new(comps)
}

/// Mean of `j²` over `j = 1..(l−1)/2`.
pub fn mean_j_squared(l: u64) -> Rational {
    let r = (l - 1) / 2;
    let s: u64 = (1..=r).map(|j| j * j).sum();
    Rational::new((s as i64).into(), (r as i64).into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;
    use proptest::prelude::*;

    fn e11a1_tate() -> TateTable {
        TateTable::over_q([TateLocalData {
            prime: 11,
            ord_q: 5,
            split: true,
        }])
    }

    #[test]
    fn labels_round_trip() {
        for s in [
            "p=11,d=1",
            "p=5,d=2,f=1",
            "p=7,d=1,i=1",
            "inf,d=1",
            "inf,d=2,i=3",
            "p=3,d=4,f=2,i=1",
        ] {
            let v: BasePlace = s.parse().unwrap();
            assert_eq!(v.label(), s);
        }
        assert_eq!("p=5,d=2,f=1".parse::<BasePlace>().unwrap().ramification(), 2);
        for bad in [
            "p=4,d=1",
            "p=5",
            "q=5,d=1",
            "p=5,d=2,f=3",
            "inf,d=3",
            "d=1,p=5",
            "p=5,d=1,d=2",
        ] {
            assert!(bad.parse::<BasePlace>().is_err(), "{bad}");
        }
    }

    #[test]
    fn degree_examples() {
        assert!(Divisor::zero(1).degree().is_zero());
        let d = Divisor::single(1, BasePlace::rational(11), rat(5, 26)).unwrap();
        assert_eq!(d.degree(), LogValue::ln_scaled(11, rat(5, 26)));
        let inf = Divisor::single(1, BasePlace::archimedean(1, 0).unwrap(), int(1)).unwrap();
        assert_eq!(inf.degree(), LogValue::arch(int(1)));
        assert_eq!(d.normalized_degree(), d.degree());
        // residue degree 2 counts ln |κ(v)| = 2·ln 3
        let v = BasePlace::finite(3, 2);
        let d = Divisor::single(2, v, int(1)).unwrap();
        assert_eq!(d.degree(), LogValue::ln_scaled(3, int(2)));
        assert_eq!(d.normalized_degree(), LogValue::ln(3));
    }

    #[test]
    fn inconsistent_places_rejected() {
        let a = BasePlace::finite_with(5, 1, 1, 0).unwrap();
        let b = BasePlace::finite_with(5, 1, 1, 1).unwrap();
        assert!(Divisor::from_entries(1, [(a, int(1)), (b, int(1))]).is_err());
        assert!(Divisor::from_entries(2, [(a, int(1)), (b, int(1))]).is_ok());
    }

    #[test]
    fn pullback_preserves_normalized_degree() {
        let v11 = BasePlace::rational(11);
        let v3 = BasePlace::rational(3);
        let v5 = BasePlace::rational(5);
        let inf = BasePlace::archimedean(1, 0).unwrap();
        let d =
            Divisor::from_entries(1, [(v11, rat(5, 26)), (v3, rat(-2, 3)), (v5, int(4)), (inf, rat(1, 7))]).unwrap();
        // 11 split, 3 inert (default), 5 ramified
        let dec = BTreeMap::from([(v11, vec![(1, 1), (1, 1)]), (v5, vec![(2, 1)])]);
        let up = d.pullback(2, &dec).unwrap();
        assert_eq!(up.base_degree(), 2);
        assert_eq!(up.entries().len(), 6);
        assert_eq!(up.normalized_degree(), d.normalized_degree());
        // degree itself doubles
        assert_eq!(up.degree(), d.degree().scale(&int(2)));
        let bad = BTreeMap::from([(v11, vec![(1, 1)])]);
        assert!(d.pullback(2, &bad).is_err());
    }

    #[test]
    fn lgp_degree() {
        let d = Divisor::single(1, BasePlace::rational(7), rat(3, 4)).unwrap();
        let p = LgpDivisor::new(vec![d.clone()]).unwrap();
        assert_eq!(degree_lgp(&p), d.normalized_degree());
        let z = LgpDivisor::new(vec![Divisor::zero(1); 4]).unwrap();
        assert!(degree_lgp(&z).is_zero());
        assert_eq!(LgpDivisor::new(vec![]), Err(ArakelovError::EmptyLgp));
    }

    #[test]
    fn e11a1_pilots() {
        let t = e11a1_tate();
        let pq = q_pilot(&t, 13).unwrap();
        assert_eq!(pq.coeff(&BasePlace::rational(11)), rat(5, 26));
        assert_eq!(-pq.degree(), LogValue::ln_scaled(11, rat(-5, 26)));
        let pt = theta_pilot(&t, 13).unwrap();
        assert_eq!(pt.len(), 6);
        for j in 1..=6i64 {
            assert_eq!(
                pt.component(j as usize).coeff(&BasePlace::rational(11)),
                rat(5 * j * j, 26)
            );
        }
        assert_eq!(pt.component(1), &pq);
        // brute force: (1/6)·Σ j²·5/26
        let mut s = Rational::zero();
        for j in 1..=6i64 {
            s += rat(j * j * 5, 26);
        }
        s /= int(6);
        assert_eq!(s, rat(35, 12));
        assert_eq!(degree_lgp(&pt), LogValue::ln_scaled(11, s));
    }

    #[test]
    fn pilot_fixtures_and_errors() {
        let t = TateTable::over_q([
            TateLocalData {
                prime: 3,
                ord_q: 3,
                split: true,
            },
            TateLocalData {
                prime: 7,
                ord_q: 7,
                split: false,
            },
        ]);
        let p = q_pilot(&t, 5).unwrap();
        assert_eq!(p.coeff(&BasePlace::rational(3)), rat(3, 10));
        assert_eq!(p.coeff(&BasePlace::rational(7)), rat(7, 10));
        let empty = TateTable {
            base_degree: 1,
            places: BTreeMap::new(),
        };
        assert_eq!(q_pilot(&empty, 13), Err(ArakelovError::EmptyBadSet));
        assert!(theta_pilot(&empty, 13).is_err());
        let even = TateTable::over_q([TateLocalData {
            prime: 2,
            ord_q: 1,
            split: true,
        }]);
        assert!(matches!(q_pilot(&even, 13), Err(ArakelovError::EvenResidue(_))));
    }

    #[test]
    fn json_shape() {
        let d = Divisor::single(1, BasePlace::rational(11), rat(5, 26)).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(
            s,
            r#"{"base_degree":1,"entries":[{"place":"p=11,d=1","coeff":"5/26"}]}"#
        );
        assert_eq!(serde_json::from_str::<Divisor>(&s).unwrap(), d);
        assert!(serde_json::from_str::<Divisor>(r#"{"base_degree":1,"entries":[],"x":1}"#).is_err());
    }

    fn arb_divisor() -> impl Strategy<Value = Divisor> {
        let primes = [3u64, 5, 7, 11, 13, 17];
        prop::collection::vec((0..primes.len(), -50i64..50, 1i64..60), 0..6).prop_map(move |v| {
            Divisor::from_entries(
                1,
                v.into_iter()
                    .map(|(i, n, d)| (BasePlace::rational(primes[i]), rat(n, d))),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn degree_additive(a in arb_divisor(), b in arb_divisor()) {
            prop_assert_eq!(a.add(&b).unwrap().degree(), &a.degree() + &b.degree());
        }

        #[test]
        fn repetition_degree(a in arb_divisor(), r in 1usize..8) {
            let p = LgpDivisor::new(vec![a.clone(); r]).unwrap();
            prop_assert_eq!(degree_lgp(&p), a.normalized_degree());
        }

        #[test]
        fn theta_is_mean_square_multiple(
            ords in prop::collection::btree_map(prop::sample::select(vec![3u64, 5, 7, 11, 13, 19]), 1u64..40, 1..4),
            l in prop::sample::select(vec![3u64, 5, 7, 11, 13, 17]),
        ) {
            let t = TateTable::over_q(ords.into_iter().map(|(p, o)| TateLocalData { prime: p, ord_q: o, split: true }));
            let lhs = degree_lgp(&theta_pilot(&t, l).unwrap());
            let rhs = q_pilot(&t, l).unwrap().normalized_degree().scale(&mean_j_squared(l));
            prop_assert_eq!(lhs, rhs);
        }
    }
}
