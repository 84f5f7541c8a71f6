//! Capsules, processions and the three indeterminacies acting on region
//! descriptors, and the evaluator for the final inequality.
//!
//! Ind1 acts through the underlying index permutations only; the local
//! component maps are volume preserving and are not represented. Ind2 is a
//! contract on lattice-aligned regions plus a tag. Ind3 is taken as the
//! stated bound `(q^{j²/2l})^N · Peel^j 𝓘^{⊗ j+1}`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::adelic::{logshell_volume, AdelicError, FakeAdeles, LocalRegion, RegionDescriptor, TensorIndex};
use crate::arakelov::{q_pilot, theta_pilot, ArakelovError, BasePlace, LgpDivisor, TateTable};
use crate::arith::is_prime;
use crate::exactnum::{
    compare_with_cap, eval_interval, format_rational, int, parse_rational, Interval, LogOrdering, LogValue, Rational,
    DEFAULT_PRECISION_CAP,
};

/// Largest procession length that is enumerated.
pub const MAX_PROCESSION: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IndetError {
    #[error("n = {n} exceeds the enumeration cap {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("region at level {level} is outside capsules 1..={n}")]
    LevelMismatch { level: usize, n: usize },
    #[error("summand {0} is not expressed relative to the log-shell lattice")]
    UnalignedRegion(TensorIndex),
    #[error("missing log-shell data: {0}")]
    MissingLogshellData(String),
    #[error("component j = {j} outside 1..={max}")]
    BadComponent { j: usize, max: usize },
    #[error("l = {0} must be a prime ≥ 5")]
    BadL(u64),
    #[error("starting exponent n0 = {0} must be 0 or 1")]
    BadStart(u32),
    #[error("lgp divisor has {got} components, l = {l} needs {}", (l - 1) / 2)]
    ComponentCount { l: u64, got: usize },
    #[error("incomplete scenario, missing: {}", .0.join("; "))]
    IncompleteScenario(Vec<String>),
    #[error(transparent)]
    Adelic(#[from] AdelicError),
    #[error(transparent)]
    Arakelov(#[from] ArakelovError),
}

/// A collection of objects indexed by a finite ordered set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Capsule {
    index_set: Vec<usize>,
    slot_labels: BTreeMap<usize, String>,
}

impl Capsule {
    /// The capsule on `{0..=j}` with every slot tagged `tag`.
    pub fn uniform(j: usize, tag: &str) -> Self {
        Capsule {
            index_set: (0..=j).collect(),
            slot_labels: (0..=j).map(|i| (i, tag.to_string())).collect(),
        }
    }

    pub fn index_set(&self) -> &[usize] {
        &self.index_set
    }

    pub fn slot_labels(&self) -> &BTreeMap<usize, String> {
        &self.slot_labels
    }

    pub fn len(&self) -> usize {
        self.index_set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_set.is_empty()
    }
}

/// Capsules of sizes `2, 3, ..., n+1` with order-preserving inclusions
/// between consecutive index sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Procession {
    capsules: Vec<Capsule>,
    inclusions: Vec<Vec<usize>>,
}

impl Procession {
    /// Inclusions `i ↦ i + 1`, as in `X_{j,i} → X_{j+1,i+1}`.
    pub fn standard(n: usize) -> Result<Self, IndetError> {
        if n == 0 || n > MAX_PROCESSION {
            return Err(IndetError::CapExceeded { n, cap: MAX_PROCESSION });
        }
        Ok(Procession {
            capsules: (1..=n).map(|j| Capsule::uniform(j, "X")).collect(),
            inclusions: (1..n).map(|j| (0..=j).map(|i| i + 1).collect()).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.capsules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.capsules.is_empty()
    }

    /// Capsule `j`, 1-based.
    pub fn capsule(&self, j: usize) -> &Capsule {
        &self.capsules[j - 1]
    }

    /// Inclusion of capsule `j` into capsule `j + 1`.
    pub fn inclusion(&self, j: usize) -> &[usize] {
        &self.inclusions[j - 1]
    }

    /// Whether every `g_{j+1} ∘ ι_j = ι_j ∘ g_j`.
    pub fn is_coherent(&self, g: &ProcessionAutomorphism) -> bool {
        (1..self.len()).all(|j| {
            let inc = self.inclusion(j);
            (0..=j).all(|i| g.capsule(j + 1)[inc[i]] == inc[g.capsule(j)[i]])
        })
    }
}

/// Per-capsule bijections `g_j` of `{0..=j}` for `j = 1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProcessionAutomorphism {
    perms: Vec<Vec<usize>>,
}

impl ProcessionAutomorphism {
    pub fn identity(n: usize) -> Self {
        ProcessionAutomorphism {
            perms: (1..=n).map(|j| (0..=j).collect()).collect(),
        }
    }

    /// Builds from explicit permutations; `None` unless `perms[k]` is a
    /// bijection of `{0..=k+1}`.
    pub fn from_perms(perms: Vec<Vec<usize>>) -> Option<Self> {
        for (k, g) in perms.iter().enumerate() {
            if g.len() != k + 2 || g.iter().collect::<BTreeSet<_>>().len() != g.len() || g.iter().any(|&x| x > k + 1) {
                return None;
            }
        }
        Some(ProcessionAutomorphism { perms })
    }

    pub fn n(&self) -> usize {
        self.perms.len()
    }

    /// `g_j`, 1-based.
    pub fn capsule(&self, j: usize) -> &[usize] {
        &self.perms[j - 1]
    }

    pub fn is_identity(&self) -> bool {
        self.perms.iter().all(|g| g.iter().enumerate().all(|(i, &x)| i == x))
    }
}

/// Whether automorphisms must commute with the procession inclusions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coherence {
    #[default]
    NonStrict,
    Strict,
}

/// All permutations of `{0..k}` in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (0..k).collect();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (1..k).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let jx = (i..k).rev().find(|&jx| cur[jx] > cur[i - 1]).unwrap();
        cur.swap(i - 1, jx);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

/// `∏_{j=1..n} (j+1)!` non-strict, `2` strict.
pub fn automorphism_count(n: usize, coherence: Coherence) -> u128 {
    match coherence {
        Coherence::NonStrict => (1..=n).map(|j| (1..=(j as u128 + 1)).product::<u128>()).product(),
        Coherence::Strict => 2,
    }
}

/// Lazy enumeration of procession automorphisms.
#[derive(Debug, Clone)]
pub enum Automorphisms {
    /// Every tuple of per-capsule permutations, as an odometer.
    Product {
        levels: Vec<Vec<Vec<usize>>>,
        odometer: Vec<usize>,
        done: bool,
    },
    List(std::vec::IntoIter<ProcessionAutomorphism>),
}

impl Iterator for Automorphisms {
    type Item = ProcessionAutomorphism;

    fn next(&mut self) -> Option<Self::Item> {
        let (levels, odometer, done) = match self {
            Automorphisms::List(it) => return it.next(),
            Automorphisms::Product { levels, odometer, done } => (levels, odometer, done),
        };
        if *done {
            return None;
        }
        let item = ProcessionAutomorphism {
            perms: odometer.iter().zip(levels.iter()).map(|(&k, l)| l[k].clone()).collect(),
        };
        let mut pos = odometer.len();
        loop {
            if pos == 0 {
                *done = true;
                break;
            }
            pos -= 1;
            odometer[pos] += 1;
            if odometer[pos] < levels[pos].len() {
                break;
            }
            odometer[pos] = 0;
        }
        Some(item)
    }
}

/// Every automorphism of the standard `n`-procession, identity first.
pub fn enumerate_procession_automorphisms(n: usize) -> Result<Automorphisms, IndetError> {
    enumerate_with(n, Coherence::NonStrict)
}

pub fn enumerate_with(n: usize, coherence: Coherence) -> Result<Automorphisms, IndetError> {
    Procession::standard(n)?;
    Ok(match coherence {
        Coherence::NonStrict => Automorphisms::Product {
            levels: (1..=n).map(|j| permutations(j + 1)).collect(),
            odometer: vec![0; n],
            done: false,
        },
        Coherence::Strict => {
            // g_1 is free; g_{j+1} fixes 0 and is g_j shifted up by one
            let chains: Vec<ProcessionAutomorphism> = permutations(2)
                .into_iter()
                .map(|g1| {
                    let mut perms = vec![g1];
                    while perms.len() < n {
                        let last = perms.last().unwrap();
                        let next = std::iter::once(0).chain(last.iter().map(|x| x + 1)).collect();
                        perms.push(next);
                    }
                    ProcessionAutomorphism { perms }
                })
                .collect();
            Automorphisms::List(chains.into_iter())
        }
    })
}

/// The permutations `g_j` occurring in automorphisms of a procession of
/// length `j`.
pub fn capsule_permutations(j: usize, coherence: Coherence) -> Result<Vec<Vec<usize>>, IndetError> {
    match coherence {
        Coherence::NonStrict => {
            Procession::standard(j)?;
            Ok(permutations(j + 1))
        }
        Coherence::Strict => {
            let set: BTreeSet<Vec<usize>> = enumerate_with(j, coherence)?.map(|g| g.capsule(j).to_vec()).collect();
            Ok(set.into_iter().collect())
        }
    }
}

/// Transports the summand at `(v_0..v_j)` to `(v_{g⁻¹(0)}..v_{g⁻¹(j)})`:
/// factor `i` moves to position `perm[i]`.
pub fn ind1_permute(perm: &[usize], r: &RegionDescriptor) -> Result<RegionDescriptor, IndetError> {
    if perm.len() != r.level() + 1 {
        return Err(IndetError::LevelMismatch {
            level: r.level(),
            n: perm.len().saturating_sub(1),
        });
    }
    let mut out = RegionDescriptor::full(r.level(), r.base_degree());
    for (idx, reg) in r.summands() {
        out.insert(permute_index(perm, idx), reg.permuted(perm))?;
    }
    Ok(out)
}

fn permute_index(perm: &[usize], idx: &TensorIndex) -> TensorIndex {
    let places = idx.places();
    let mut moved = places.to_vec();
    for (i, &t) in perm.iter().enumerate() {
        moved[t] = places[i];
    }
    TensorIndex::new(moved).expect("same prime")
}

/// Ind1 action of `g` on a region at level `j`, through `g_j`.
pub fn ind1_act(g: &ProcessionAutomorphism, r: &RegionDescriptor) -> Result<RegionDescriptor, IndetError> {
    let j = r.level();
    if j == 0 || j > g.n() {
        return Err(IndetError::LevelMismatch { level: j, n: g.n() });
    }
    ind1_permute(g.capsule(j), r)
}

/// Summand-wise union of all Ind1 images.
pub fn ind1_orbit_union(r: &RegionDescriptor) -> Result<RegionDescriptor, IndetError> {
    ind1_orbit_union_with(r, Coherence::NonStrict)
}

pub fn ind1_orbit_union_with(r: &RegionDescriptor, coherence: Coherence) -> Result<RegionDescriptor, IndetError> {
    let j = r.level();
    if j == 0 || j > MAX_PROCESSION {
        return Err(IndetError::CapExceeded {
            n: j,
            cap: MAX_PROCESSION,
        });
    }
    let perms = capsule_permutations(j, coherence)?;
    let targets: BTreeSet<TensorIndex> = perms
        .iter()
        .flat_map(|g| r.summands().keys().map(move |idx| permute_index(g, idx)))
        .collect();
    let inverses: Vec<Vec<usize>> = perms
        .iter()
        .map(|g| {
            let mut inv = vec![0; g.len()];
            for (i, &t) in g.iter().enumerate() {
                inv[t] = i;
            }
            inv
        })
        .collect();
    let mut out = RegionDescriptor::full(j, r.base_degree());
    for t in targets {
        let members: Vec<LocalRegion> = perms
            .iter()
            .zip(&inverses)
            .map(|(g, inv)| r.region(&permute_index(inv, &t)).permuted(g))
            .collect();
        out.insert(t, LocalRegion::union(members))?;
    }
    Ok(out)
}

/// Tags `r` as closed under lattice isometries. Volumes and lattice bounds
/// are unchanged; every summand must be expressed through the log-shell
/// lattice.
pub fn ind2_saturate(r: &RegionDescriptor) -> Result<RegionDescriptor, IndetError> {
    if let Some((idx, _)) = r.summands().iter().find(|(_, reg)| !reg.is_lattice_aligned()) {
        return Err(IndetError::UnalignedRegion(idx.clone()));
    }
    let mut out = r.clone();
    out.set_ind2_closed(true);
    Ok(out)
}

/// Log-shell volumes and tensor defects, in units of `ln p`.
///
/// Lookup order for a tensor index: an index override (split evenly over
/// the factors, defect 0), then per-factor place overrides or the tame
/// formula, with the defect from `defects`, then `default_defect`, and 0
/// when at most one factor is ramified.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LogShellConfig {
    pub place_volumes: BTreeMap<BasePlace, Rational>,
    pub index_volumes: BTreeMap<TensorIndex, Rational>,
    pub defects: BTreeMap<TensorIndex, Rational>,
    pub default_defect: Option<Rational>,
}

impl LogShellConfig {
    /// `𝓘_{v⃗}` as an unscaled lattice region.
    pub fn lattice(&self, idx: &TensorIndex) -> Result<LocalRegion, IndetError> {
        let k = idx.places().len();
        if let Some(v) = self.index_volumes.get(idx) {
            let share = v / int(k as i64);
            return Ok(LocalRegion::lattice(
                Rational::zero(),
                vec![share; k],
                Rational::zero(),
            )?);
        }
        let shells = idx
            .places()
            .iter()
            .map(|w| match self.place_volumes.get(&w.base()) {
                Some(v) => Ok(v.clone()),
                None => logshell_volume(w)
                    .map_err(|_| IndetError::MissingLogshellData(format!("log-shell volume at {}", w.base()))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let defect = match (self.defects.get(idx), &self.default_defect) {
            (Some(d), _) => d.clone(),
            _ if idx.ramified_factors() <= 1 => Rational::zero(),
            (None, Some(d)) => d.clone(),
            (None, None) => return Err(IndetError::MissingLogshellData(format!("tensor defect at {idx}"))),
        };
        Ok(LocalRegion::lattice(Rational::zero(), shells, defect)?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IndexValue {
    index: TensorIndex,
    value: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LogShellRepr {
    #[serde(default)]
    place_volumes: BTreeMap<BasePlace, String>,
    #[serde(default)]
    index_volumes: Vec<IndexValue>,
    #[serde(default)]
    defects: Vec<IndexValue>,
    #[serde(default)]
    default_defect: Option<String>,
}

impl Serialize for LogShellConfig {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let iv = |m: &BTreeMap<TensorIndex, Rational>| {
            m.iter()
                .map(|(k, v)| IndexValue {
                    index: k.clone(),
                    value: format_rational(v),
                })
                .collect()
        };
        LogShellRepr {
            place_volumes: self
                .place_volumes
                .iter()
                .map(|(k, v)| (*k, format_rational(v)))
                .collect(),
            index_volumes: iv(&self.index_volumes),
            defects: iv(&self.defects),
            default_defect: self.default_defect.as_ref().map(format_rational),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LogShellConfig {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let r = LogShellRepr::deserialize(d)?;
        let p = |s: &str| parse_rational(s).map_err(D::Error::custom);
        let iv = |v: Vec<IndexValue>| -> Result<BTreeMap<TensorIndex, Rational>, D::Error> {
            v.into_iter().map(|e| Ok((e.index, p(&e.value)?))).collect()
        };
        let cfg = LogShellConfig {
            place_volumes: r
                .place_volumes
                .iter()
                .map(|(k, v)| Ok((*k, p(v)?)))
                .collect::<Result<_, D::Error>>()?,
            index_volumes: iv(r.index_volumes)?,
            defects: iv(r.defects)?,
            default_defect: r.default_defect.as_deref().map(p).transpose()?,
        };
        if cfg
            .defects
            .values()
            .chain(cfg.default_defect.iter())
            .any(|d| *d > Rational::zero())
        {
            return Err(D::Error::custom("tensor defects must be ≤ 0"));
        }
        Ok(cfg)
    }
}

/// Inputs of the Ind3 bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ind3Params {
    l: u64,
    tate: TateTable,
    n0: u32,
    logshell: LogShellConfig,
}

impl Ind3Params {
    pub fn new(l: u64, tate: TateTable, n0: u32, logshell: LogShellConfig) -> Result<Self, IndetError> {
        if l < 5 || !is_prime(l) {
            return Err(IndetError::BadL(l));
        }
        if n0 > 1 {
            return Err(IndetError::BadStart(n0));
        }
        Ok(Ind3Params { l, tate, n0, logshell })
    }

    pub fn l(&self) -> u64 {
        self.l
    }

    pub fn tate(&self) -> &TateTable {
        &self.tate
    }

    pub fn n0(&self) -> u32 {
        self.n0
    }

    pub fn logshell(&self) -> &LogShellConfig {
        &self.logshell
    }

    /// `(l − 1)/2`.
    pub fn components(&self) -> usize {
        ((self.l - 1) / 2) as usize
    }
}

/// `⋃_{N ≥ n0} q^{N·j²/2l} · Peel^j 𝓘^{⊗ j+1}` over every configured prime.
/// Summands whose peel factor is not a bad place carry the plain lattice.
pub fn ind3_bound_region(params: &Ind3Params, j: usize, ctx: &FakeAdeles) -> Result<RegionDescriptor, IndetError> {
    let max = params.components();
    if j == 0 || j > max {
        return Err(IndetError::BadComponent { j, max });
    }
    if params.tate.base_degree != ctx.base_degree() {
        return Err(AdelicError::BaseDegreeMismatch(params.tate.base_degree, ctx.base_degree()).into());
    }
    for v in params.tate.places.keys() {
        ctx.lift(v)?;
    }
    let two_l = int(2 * params.l as i64);
    let mut out = RegionDescriptor::full(j, ctx.base_degree());
    for p in ctx.primes() {
        for idx in ctx.indices(p, j) {
            let lattice = params.logshell.lattice(&idx)?;
            let peel = idx.places()[j].base();
            let region = match params.tate.places.get(&peel) {
                Some(t) => {
                    let step = int((t.ord_q * (j * j) as u64) as i64) / &two_l / int(peel.ramification() as i64);
                    LocalRegion::orbit(lattice, step, params.n0)?
                }
                None => lattice,
            };
            out.insert(idx, region)?;
        }
    }
    Ok(out)
}

/// Which indeterminacies [`multiradial_bound`] applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MultiradialOptions {
    pub apply_ind1: bool,
    pub apply_ind2: bool,
    pub coherence: Coherence,
    /// Compute components on separate threads; output is identical.
    pub parallel: bool,
}

impl Default for MultiradialOptions {
    fn default() -> Self {
        MultiradialOptions {
            apply_ind1: true,
            apply_ind2: true,
            coherence: Coherence::NonStrict,
            parallel: false,
        }
    }
}

/// `Ind2(Ind1(Ind3 bound))` per component `j`.
pub fn multiradial_bound(
    p_theta: &LgpDivisor,
    params: &Ind3Params,
    ctx: &FakeAdeles,
    opts: &MultiradialOptions,
) -> Result<BTreeMap<usize, RegionDescriptor>, IndetError> {
    if p_theta.len() != params.components() {
        return Err(IndetError::ComponentCount {
            l: params.l,
            got: p_theta.len(),
        });
    }
    let one = |j: usize| -> Result<RegionDescriptor, IndetError> {
        let mut r = ind3_bound_region(params, j, ctx)?;
        if opts.apply_ind1 {
            r = ind1_orbit_union_with(&r, opts.coherence)?;
        }
        if opts.apply_ind2 {
            r = ind2_saturate(&r)?;
        }
        Ok(r)
    };
    let js: Vec<usize> = (1..=params.components()).collect();
    let results: Vec<Result<RegionDescriptor, IndetError>> = if opts.parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = js.iter().map(|&j| s.spawn(move || one(j))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("component worker"))
                .collect()
        })
    } else {
        js.iter().map(|&j| one(j)).collect()
    };
    js.into_iter().zip(results).map(|(j, r)| Ok((j, r?))).collect()
}

/// Everything the inequality evaluator needs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InequalityInput {
    pub l: u64,
    pub tate: TateTable,
    pub lifted: FakeAdeles,
    pub logshell: LogShellConfig,
    pub n0: u32,
    pub options: MultiradialOptions,
    /// Bits for the reported enclosures.
    pub interval_precision: u32,
    /// Precision cap for deciding the verdict.
    pub compare_cap: u32,
}

/// Default bits for reported enclosures.
pub const DEFAULT_INTERVAL_PRECISION: u32 = 64;

impl InequalityInput {
    /// Defaults: `n0 = 1`, all indeterminacies, non-strict processions.
    pub fn new(l: u64, tate: TateTable, lifted: FakeAdeles, logshell: LogShellConfig) -> Self {
        InequalityInput {
            l,
            tate,
            lifted,
            logshell,
            n0: 1,
            options: MultiradialOptions::default(),
            interval_precision: DEFAULT_INTERVAL_PRECISION,
            compare_cap: DEFAULT_PRECISION_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Intervals {
    pub lhs: Interval,
    pub rhs: Interval,
    pub precision_bits: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentReport {
    pub j: usize,
    /// `ln ν̄` of the hull of the multiradial bound.
    pub hull_ln_nu: LogValue,
    /// `ln ν̄` of the bound itself when exact.
    pub ln_nu: Option<LogValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BadPlaceEcho {
    pub place: BasePlace,
    pub ord_q: u64,
    pub split: bool,
}

/// Every input and defaulted choice behind a report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfigEcho {
    pub l: u64,
    pub base_degree: u32,
    pub bad_places: Vec<BadPlaceEcho>,
    pub lifted_places: Vec<String>,
    pub n0: u32,
    pub peel_index: &'static str,
    pub average: &'static str,
    pub options: MultiradialOptions,
    pub logshell: LogShellConfig,
    pub interval_precision: u32,
    pub compare_cap: u32,
}

/// Result of [`evaluate_inequality`]: `lhs ≤ rhs` is what is tested.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InequalityReport {
    pub lhs: LogValue,
    pub rhs: LogValue,
    pub verdict: Verdict,
    pub intervals: Intervals,
    pub components: Vec<ComponentReport>,
    pub config_echo: ConfigEcho,
}

/// `lhs = −deg(P_q)`, `rhs` = average over `j` of `ln ν̄(hull(U_j))`.
pub fn evaluate_inequality(input: &InequalityInput) -> Result<InequalityReport, IndetError> {
    let mut missing = Vec::new();
    if input.tate.places.is_empty() {
        missing.push("bad places S".to_string());
    }
    for v in input.tate.places.keys() {
        if input.lifted.lift(v).is_err() {
            missing.push(format!("lifted place over {v}"));
        }
    }
    if !missing.is_empty() {
        return Err(IndetError::IncompleteScenario(missing));
    }
    let params = Ind3Params::new(input.l, input.tate.clone(), input.n0, input.logshell.clone())?;
    let lhs = -q_pilot(&input.tate, input.l)?.normalized_degree();
    let p_theta = theta_pilot(&input.tate, input.l)?;
    let bounds = multiradial_bound(&p_theta, &params, &input.lifted, &input.options).map_err(|e| match e {
        IndetError::MissingLogshellData(m) => IndetError::IncompleteScenario(vec![m]),
        other => other,
    })?;
    let components: Vec<ComponentReport> = bounds
        .iter()
        .map(|(&j, r)| ComponentReport {
            j,
            hull_ln_nu: r.hull().ln_nu().expect("polydiscs are exact"),
            ln_nu: r.ln_nu().ok(),
        })
        .collect();
    let total: LogValue = components.iter().map(|c| c.hull_ln_nu.clone()).sum();
    let rhs = total.scale(&Rational::new(1.into(), (components.len() as i64).into()));
    let verdict = match compare_with_cap(&lhs, &rhs, input.compare_cap) {
        LogOrdering::Less | LogOrdering::Equal => Verdict::Holds,
        LogOrdering::Greater => Verdict::Fails,
        LogOrdering::Unresolved(_) => Verdict::Unresolved,
    };
    let intervals = Intervals {
        lhs: eval_interval(&lhs, input.interval_precision),
        rhs: eval_interval(&rhs, input.interval_precision),
        precision_bits: input.interval_precision,
    };
    let config_echo = ConfigEcho {
        l: input.l,
        base_degree: input.tate.base_degree,
        bad_places: input
            .tate
            .places
            .iter()
            .map(|(v, t)| BadPlaceEcho {
                place: *v,
                ord_q: t.ord_q,
                split: t.split,
            })
            .collect(),
        lifted_places: input.lifted.lifted().values().map(|w| w.label()).collect(),
        n0: input.n0,
        peel_index: "j",
        average: "uniform over j = 1..(l-1)/2",
        options: input.options,
        logshell: input.logshell.clone(),
        interval_precision: input.interval_precision,
        compare_cap: input.compare_cap,
    };
    Ok(InequalityReport {
        lhs,
        rhs,
        verdict,
        intervals,
        components,
        config_echo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adelic::LiftedPlace;
    use crate::exactnum::rat;
    use crate::tate::TateLocalData;

    fn e11a1_tate() -> TateTable {
        TateTable::over_q([TateLocalData {
            prime: 11,
            ord_q: 5,
            split: true,
        }])
    }

    fn toy_logshell() -> LogShellConfig {
        LogShellConfig {
            place_volumes: [(BasePlace::rational(11), Rational::zero())].into(),
            default_defect: Some(Rational::zero()),
            ..Default::default()
        }
    }

    fn e11a1_input(logshell: LogShellConfig) -> InequalityInput {
        let ctx = FakeAdeles::over_q([(11, 13, 12)]).unwrap();
        InequalityInput::new(13, e11a1_tate(), ctx, logshell)
    }

    fn three_places(p: u64) -> FakeAdeles {
        let lifts = (0..3).map(|i| LiftedPlace::trivial(BasePlace::finite_with(p, 1, 1, i).unwrap()));
        FakeAdeles::new(3, lifts).unwrap()
    }

    #[test]
    fn automorphism_counts() {
        for (n, want) in [(1, 2u128), (2, 12), (3, 288), (4, 34_560)] {
            let all: Vec<_> = enumerate_procession_automorphisms(n).unwrap().collect();
            assert_eq!(all.len() as u128, want);
            assert_eq!(automorphism_count(n, Coherence::NonStrict), want);
            assert!(all[0].is_identity());
            assert_eq!(all.iter().collect::<BTreeSet<_>>().len(), all.len());
        }
        assert_eq!(
            automorphism_count(6, Coherence::NonStrict),
            2 * 6 * 24 * 120 * 720 * 5040
        );
        assert!(matches!(
            enumerate_procession_automorphisms(7),
            Err(IndetError::CapExceeded { .. })
        ));
        assert!(matches!(
            enumerate_procession_automorphisms(0),
            Err(IndetError::CapExceeded { .. })
        ));
    }

    #[test]
    fn strict_processions() {
        let proc3 = Procession::standard(3).unwrap();
        let strict: BTreeSet<_> = enumerate_with(3, Coherence::Strict).unwrap().collect();
        let filtered: BTreeSet<_> = enumerate_procession_automorphisms(3)
            .unwrap()
            .filter(|g| proc3.is_coherent(g))
            .collect();
        assert_eq!(strict, filtered);
        assert_eq!(strict.len(), 2);
        // the cyclic choice made in every capsule is not coherent
        let cyclic = ProcessionAutomorphism::from_perms(vec![vec![1, 0], vec![1, 2, 0], vec![1, 2, 3, 0]]).unwrap();
        assert!(!proc3.is_coherent(&cyclic));
        assert!(ProcessionAutomorphism::from_perms(vec![vec![0, 0]]).is_none());
    }

    #[test]
    fn explicit_permutation() {
        let ctx = three_places(7);
        let f = ctx.fiber(7);
        let (a, b, c) = (f[0], f[1], f[2]);
        let idx = TensorIndex::new(vec![a, b, c]).unwrap();
        let shells = vec![int(1), int(2), int(3)];
        let mut r = RegionDescriptor::full(2, 3);
        r.insert(idx, LocalRegion::lattice(int(1), shells, rat(-1, 2)).unwrap())
            .unwrap();
        // α⊗β⊗γ ↦ γ⊗α⊗β on the summand (a, b, c) lands in (c, a, b)
        let g = [1, 2, 0];
        let moved = ind1_permute(&g, &r).unwrap();
        let (k, reg) = moved.summands().iter().next().unwrap();
        assert_eq!(k.places(), &[c, a, b]);
        assert_eq!(
            *reg,
            LocalRegion::lattice(int(1), vec![int(3), int(1), int(2)], rat(-1, 2)).unwrap()
        );
        assert_eq!(moved.ln_nu(), r.ln_nu());
        assert_eq!(ind1_permute(&[0, 1, 2], &r).unwrap(), r);
    }

    #[test]
    fn ln_nu_invariance_small() {
        let ctx = three_places(5);
        let f = ctx.fiber(5);
        for n in 1..=3 {
            let mut r = RegionDescriptor::full(n, 3);
            r.insert(TensorIndex::new(vec![f[0]; n + 1]).unwrap(), LocalRegion::ring(int(2)))
                .unwrap();
            let mut asym = vec![f[1]; n + 1];
            asym[0] = f[2];
            let shells: Vec<Rational> = (0..=n).map(|i| rat(i as i64, 3)).collect();
            r.insert(
                TensorIndex::new(asym).unwrap(),
                LocalRegion::lattice(int(1), shells, int(-1)).unwrap(),
            )
            .unwrap();
            let base = r.ln_nu().unwrap();
            for g in enumerate_procession_automorphisms(n).unwrap() {
                assert_eq!(ind1_act(&g, &r).unwrap().ln_nu().unwrap(), base);
            }
        }
        let g = ProcessionAutomorphism::identity(1);
        assert!(matches!(
            ind1_act(&g, &RegionDescriptor::full(2, 3)),
            Err(IndetError::LevelMismatch { .. })
        ));
    }

    #[test]
    fn orbit_unions() {
        let ctx = three_places(5);
        let f = ctx.fiber(5);
        let mut r = RegionDescriptor::full(1, 3);
        r.insert(TensorIndex::new(vec![f[0], f[1]]).unwrap(), LocalRegion::ring(int(1)))
            .unwrap();
        let u = ind1_orbit_union(&r).unwrap();
        assert_eq!(u.summands().len(), 2);
        for reg in u.summands().values() {
            assert_eq!(
                *reg,
                LocalRegion::union([LocalRegion::ring(int(1)), LocalRegion::integral()])
            );
        }
        assert_eq!(ind1_orbit_union(&u).unwrap(), u);
        for g in enumerate_procession_automorphisms(2).unwrap() {
            assert_eq!(ind1_act(&g, &u).unwrap(), u);
        }
        // symmetric input is fixed
        let mut s = RegionDescriptor::full(1, 3);
        s.insert(TensorIndex::new(vec![f[2], f[2]]).unwrap(), LocalRegion::ring(int(4)))
            .unwrap();
        assert_eq!(ind1_orbit_union(&s).unwrap(), s);
        assert!(matches!(
            ind1_orbit_union(&RegionDescriptor::full(7, 3)),
            Err(IndetError::CapExceeded { .. })
        ));
    }

    #[test]
    fn ind2_contract() {
        let ctx = three_places(5);
        let idx = ctx.indices(5, 1)[0].clone();
        let mut r = RegionDescriptor::full(1, 3);
        r.insert(
            idx.clone(),
            LocalRegion::lattice(int(1), vec![int(0), int(0)], int(0)).unwrap(),
        )
        .unwrap();
        let s = ind2_saturate(&r).unwrap();
        assert!(s.ind2_closed());
        assert_eq!(s.ln_nu(), r.ln_nu());
        assert_eq!(ind2_saturate(&s).unwrap(), s);
        let mut bad = RegionDescriptor::full(1, 3);
        bad.insert(idx, LocalRegion::ring(int(1))).unwrap();
        assert!(matches!(ind2_saturate(&bad), Err(IndetError::UnalignedRegion(_))));
    }

    #[test]
    fn ind3_region() {
        let ctx = FakeAdeles::over_q([(11, 13, 12)]).unwrap();
        let params = Ind3Params::new(13, e11a1_tate(), 1, toy_logshell()).unwrap();
        let r = ind3_bound_region(&params, 2, &ctx).unwrap();
        assert_eq!(r.hull().ln_nu().unwrap(), LogValue::ln_scaled(11, rat(-20, 26)));
        assert_eq!(r.ln_nu().unwrap(), LogValue::ln_scaled(11, rat(-20, 26)));
        let p0 = Ind3Params::new(13, e11a1_tate(), 0, toy_logshell()).unwrap();
        assert!(ind3_bound_region(&p0, 2, &ctx)
            .unwrap()
            .hull()
            .ln_nu()
            .unwrap()
            .is_zero());
        assert!(matches!(
            ind3_bound_region(&params, 7, &ctx),
            Err(IndetError::BadComponent { .. })
        ));
        let missing = Ind3Params::new(13, e11a1_tate(), 1, LogShellConfig::default()).unwrap();
        assert!(matches!(
            ind3_bound_region(&missing, 1, &ctx),
            Err(IndetError::MissingLogshellData(_))
        ));
        assert!(matches!(
            Ind3Params::new(3, e11a1_tate(), 1, toy_logshell()),
            Err(IndetError::BadL(3))
        ));
        assert!(matches!(
            Ind3Params::new(13, e11a1_tate(), 2, toy_logshell()),
            Err(IndetError::BadStart(2))
        ));
    }

    #[test]
    fn tame_logshells_feed_ind3() {
        // unramified at 7 gives log-shell volume 0 without configuration
        let tate = TateTable::over_q([TateLocalData {
            prime: 7,
            ord_q: 3,
            split: false,
        }]);
        let ctx = FakeAdeles::over_q([(7, 1, 2)]).unwrap();
        let params = Ind3Params::new(5, tate, 1, LogShellConfig::default()).unwrap();
        let r = ind3_bound_region(&params, 2, &ctx).unwrap();
        assert_eq!(r.hull().ln_nu().unwrap(), LogValue::ln_scaled(7, rat(-12, 10)));
        // e = 2: two ramified factors need a defect
        let ctx = FakeAdeles::over_q([(7, 2, 1)]).unwrap();
        assert!(matches!(
            ind3_bound_region(&params, 1, &ctx),
            Err(IndetError::MissingLogshellData(_))
        ));
        let cfg = LogShellConfig {
            default_defect: Some(rat(-1, 4)),
            ..Default::default()
        };
        let params = Ind3Params::new(5, params.tate().clone(), 1, cfg).unwrap();
        let r = ind3_bound_region(&params, 1, &ctx).unwrap();
        // shells (e−1)/e = 1/2 each, defect −1/4, scaling 3/10
        assert_eq!(r.ln_nu().unwrap(), LogValue::ln_scaled(7, rat(9, 20)));
        assert_eq!(r.hull().ln_nu().unwrap(), LogValue::ln_scaled(7, rat(7, 10)));
    }

    #[test]
    fn e11a1_toy_inequality() {
        let report = evaluate_inequality(&e11a1_input(toy_logshell())).unwrap();
        assert_eq!(report.lhs, LogValue::ln_scaled(11, rat(-5, 26)));
        assert_eq!(report.rhs, LogValue::ln_scaled(11, rat(-35, 12)));
        assert_eq!(report.verdict, Verdict::Fails);
        assert_eq!(report.components.len(), 6);
        // −(5/26)·ln 11 = −0.46113370…
        assert!(report.intervals.lhs.lower() > &rat(-4612, 10000));
        assert!(report.intervals.lhs.upper() < &rat(-4611, 10000));
        assert_eq!(report.config_echo.n0, 1);
    }

    #[test]
    fn logshell_overrides_shift_rhs() {
        let base = evaluate_inequality(&e11a1_input(toy_logshell())).unwrap();
        let ctx = FakeAdeles::over_q([(11, 13, 12)]).unwrap();
        let mut by_index = toy_logshell();
        for j in 1..=6 {
            by_index.index_volumes.insert(ctx.indices(11, j)[0].clone(), int(3));
        }
        let r = evaluate_inequality(&e11a1_input(by_index)).unwrap();
        assert_eq!(&r.rhs - &base.rhs, LogValue::ln_scaled(11, int(3)));
        assert_eq!(r.verdict, Verdict::Holds);
        // a per-place volume s enters every one of the j+1 factors
        let mut by_place = toy_logshell();
        by_place.place_volumes.insert(BasePlace::rational(11), int(3));
        let r = evaluate_inequality(&e11a1_input(by_place)).unwrap();
        assert_eq!(&r.rhs - &base.rhs, LogValue::ln_scaled(11, rat(27, 2)));
    }

    #[test]
    fn incomplete_scenarios() {
        let mut input = e11a1_input(toy_logshell());
        input.tate = TateTable::over_q([]);
        assert!(matches!(
            evaluate_inequality(&input),
            Err(IndetError::IncompleteScenario(_))
        ));
        let input = e11a1_input(LogShellConfig::default());
        match evaluate_inequality(&input) {
            Err(IndetError::IncompleteScenario(m)) => assert!(m[0].contains("p=11,d=1"), "{m:?}"),
            other => panic!("{other:?}"),
        }
        let mut input = e11a1_input(toy_logshell());
        input.lifted = FakeAdeles::over_q([(13, 1, 1)]).unwrap();
        assert!(matches!(
            evaluate_inequality(&input),
            Err(IndetError::IncompleteScenario(_))
        ));
    }

    #[test]
    fn options_and_determinism() {
        let mut input = e11a1_input(toy_logshell());
        let a = serde_json::to_string(&evaluate_inequality(&input).unwrap()).unwrap();
        input.options.parallel = true;
        let b = evaluate_inequality(&input).unwrap();
        assert_eq!(b.rhs, LogValue::ln_scaled(11, rat(-35, 12)));
        input.options.parallel = false;
        assert_eq!(serde_json::to_string(&evaluate_inequality(&input).unwrap()).unwrap(), a);
        input.options.apply_ind1 = false;
        assert_eq!(evaluate_inequality(&input).unwrap().rhs, b.rhs);
        input.options.coherence = Coherence::Strict;
        input.options.apply_ind1 = true;
        assert_eq!(evaluate_inequality(&input).unwrap().rhs, b.rhs);
    }

    #[test]
    fn logshell_json() {
        let ctx = FakeAdeles::over_q([(11, 13, 12)]).unwrap();
        let mut cfg = toy_logshell();
        cfg.defects.insert(ctx.indices(11, 1)[0].clone(), rat(-1, 2));
        let s = serde_json::to_string(&cfg).unwrap();
        let back: LogShellConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, cfg);
        assert!(serde_json::from_str::<LogShellConfig>(r#"{"default_defect":"1"}"#).is_err());
        assert!(serde_json::from_str::<LogShellConfig>(r#"{"bogus":1}"#).is_err());
    }
}
