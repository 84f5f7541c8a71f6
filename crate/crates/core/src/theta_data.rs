//! Pre-theta and initial theta data over a symbolic `(Z/l)^2` Galois model.
//!
//! `G(K/F)` is an explicit matrix group. The places of `K` over a base
//! place `v` are the cosets `G/D_v` of a decomposition group, with `μ_l(w)`
//! and the class of `q^{1/l}` transported along coset representatives. In
//! the Tate-aligned basis at the root place, `P1 = φ(ζ_l) = (1, 0)` spans
//! `μ_l` and `P2 = φ(q^{1/l}) = (0, 1)` is the canonical generator.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::adelic::{FakeAdeles, LiftedPlace};
use crate::arakelov::{BasePlace, TateTable};
use crate::curve::{minimal_model, mod_l_image_contains_sl2, reduction_type, CurveError, ImageCheck, WeierstrassModel};
use crate::exactnum::Rational;
use crate::gl2::{group_closure, inv_mod_small, Line, Mat2, Vec2};
use crate::indet::LogShellConfig;
use crate::tate::{local_torsion_degrees, transvection, TateLocalData};

/// `2·|GL2(F2)|·|GL2(F3)|·|GL2(F5)|`, a multiple of `[Q(√−1, E[30]) : Q]`.
pub const FIELD_DEGREE_BOUND: u64 = 2 * 6 * 48 * 480;

/// Primes tested by the mod-`l` image heuristic in pre-theta checks.
pub const IMAGE_PRIME_BOUND: u64 = 2000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ThetaError {
    #[error("the set S of bad places is empty")]
    EmptyBadSet,
    #[error("condition {condition} fails: {detail}")]
    ConditionFailure { condition: String, detail: String },
    #[error("unknown place `{0}`")]
    UnknownPlace(String),
    #[error("no group element moves μ_l of the root place over {0} onto M")]
    Unreachable(BasePlace),
    #[error("M is not the multiplicative subspace at {0}")]
    SubspaceNotMultiplicative(String),
    #[error("ε is not a canonical generator at {0}")]
    NotCanonical(String),
    #[error("invalid Galois model: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Places of `K` over one base place.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fiber {
    labels: Vec<String>,
    /// `actions[g][k]`: index of `generator_g · w_k`.
    actions: Vec<Vec<usize>>,
    /// `μ_l(w_k)`.
    mu: Vec<Line>,
    /// A representative of the canonical generator class at `w_k`.
    canonical: Vec<Vec2>,
}

impl Fiber {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn mu(&self, k: usize) -> Line {
        self.mu[k]
    }

    pub fn canonical(&self, k: usize) -> Vec2 {
        self.canonical[k]
    }

    pub fn action(&self, g: usize, k: usize) -> usize {
        self.actions[g][k]
    }
}

/// A modeled image of `ρ_l` with its action on the places of `K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaloisModel {
    l: u64,
    generators: Vec<Mat2>,
    fibers: BTreeMap<BasePlace, Fiber>,
}

/// Label of the `k`-th place of `K` over `v`.
pub fn place_label(v: &BasePlace, k: usize) -> String {
    format!("{v}/w{k}")
}

fn parse_label(s: &str) -> Option<(BasePlace, usize)> {
    let (v, k) = s.rsplit_once("/w")?;
    Some((v.parse().ok()?, k.parse().ok()?))
}

/// Coordinates `(a, b)` of `x = a·m + b·c` for a basis `{m, c}`.
fn coordinates(x: Vec2, m: Vec2, c: Vec2, l: u64) -> (u64, u64) {
    let det = (m.0 * c.1 + l * l - c.0 * m.1 % l) % l;
    let inv = inv_mod_small(det, l);
    let a = (x.0 * c.1 + l * l - c.0 * x.1 % l) % l * inv % l;
    let b = (m.0 * x.1 + l * l - x.0 * m.1 % l) % l * inv % l;
    (a, b)
}

impl GaloisModel {
    /// Explicit fibers. Checks invertibility, that each action is a
    /// permutation, and that `μ_l` and the canonical class are transported
    /// by the action.
    pub fn new(l: u64, generators: Vec<Mat2>, fibers: BTreeMap<BasePlace, Fiber>) -> Result<Self, ThetaError> {
        let bad = |m: String| Err(ThetaError::InvalidModel(m));
        for g in &generators {
            if g.modulus() != l || !g.is_invertible() {
                return bad(format!("generator {g} is not in GL2(F_{l})"));
            }
        }
        for (v, f) in &fibers {
            let n = f.labels.len();
            if n == 0 {
                return bad(format!("empty fiber over {v}"));
            }
            if f.mu.len() != n || f.canonical.len() != n || f.actions.len() != generators.len() {
                return bad(format!("fiber over {v} has inconsistent sizes"));
            }
            for (k, c) in f.canonical.iter().enumerate() {
                if f.mu[k].contains(*c, l) {
                    return bad(format!("canonical class at {} lies in μ_l", f.labels[k]));
                }
            }
            for (gi, act) in f.actions.iter().enumerate() {
                if act.len() != n || act.iter().collect::<BTreeSet<_>>().len() != n || act.iter().any(|&t| t >= n) {
                    return bad(format!("generator {gi} does not permute the fiber over {v}"));
                }
                let g = generators[gi];
                for (k, &t) in act.iter().enumerate() {
                    if g.apply_line(f.mu[k]) != f.mu[t] {
                        return bad(format!(
                            "μ_l is not transported from {} to {}",
                            f.labels[k], f.labels[t]
                        ));
                    }
                    let (_, b) = coordinates(g.apply(f.canonical[k]), f.mu[t].generator(), f.canonical[t], l);
                    if b != 1 && b != l - 1 {
                        return bad(format!("canonical class is not transported from {}", f.labels[k]));
                    }
                }
            }
        }
        Ok(GaloisModel { l, generators, fibers })
    }

    /// Fibers as coset spaces `G/D_v`, rooted at a place where `μ_l` is
    /// `mu` and the canonical class is that of `canonical`. `D_v` must fix
    /// both (the latter up to sign and `μ_l`).
    pub fn from_decompositions(
        l: u64,
        generators: Vec<Mat2>,
        places: BTreeMap<BasePlace, (Vec<Mat2>, Line, Vec2)>,
    ) -> Result<Self, ThetaError> {
        let mut fibers = BTreeMap::new();
        for (v, (dgens, mu0, can0)) in places {
            let d: BTreeSet<Mat2> = group_closure(l, &dgens).into_iter().collect();
            for x in &d {
                let (_, b) = coordinates(x.apply(can0), mu0.generator(), can0, l);
                if x.apply_line(mu0) != mu0 || (b != 1 && b != l - 1) {
                    return Err(ThetaError::InvalidModel(format!(
                        "decomposition element {x} over {v} moves μ_l or the canonical class"
                    )));
                }
            }
            let same_coset = |a: &Mat2, b: &Mat2| d.contains(&a.inverse().expect("invertible").mul(b));
            let mut reps = vec![Mat2::identity(l)];
            let mut queue = VecDeque::from([0usize]);
            let mut actions = vec![BTreeMap::new(); generators.len()];
            while let Some(k) = queue.pop_front() {
                for (gi, g) in generators.iter().enumerate() {
                    let y = g.mul(&reps[k]);
                    let t = match reps.iter().position(|r| same_coset(r, &y)) {
                        Some(t) => t,
                        None => {
                            reps.push(y);
                            queue.push_back(reps.len() - 1);
                            reps.len() - 1
                        }
                    };
                    actions[gi].insert(k, t);
                }
            }
            let fiber = Fiber {
                labels: (0..reps.len()).map(|k| place_label(&v, k)).collect(),
                actions: actions.into_iter().map(|m| m.into_values().collect()).collect(),
                mu: reps.iter().map(|r| r.apply_line(mu0)).collect(),
                canonical: reps.iter().map(|r| r.apply(can0)).collect(),
            };
            fibers.insert(v, fiber);
        }
        GaloisModel::new(l, generators, fibers)
    }

    pub fn l(&self) -> u64 {
        self.l
    }

    pub fn generators(&self) -> &[Mat2] {
        &self.generators
    }

    pub fn fibers(&self) -> &BTreeMap<BasePlace, Fiber> {
        &self.fibers
    }

    pub fn fiber(&self, v: &BasePlace) -> Option<&Fiber> {
        self.fibers.get(v)
    }

    fn locate(&self, w: &str) -> Result<(&Fiber, usize), ThetaError> {
        let unknown = || ThetaError::UnknownPlace(w.to_string());
        let (v, k) = parse_label(w).ok_or_else(unknown)?;
        let f = self.fibers.get(&v).ok_or_else(unknown)?;
        (k < f.len() && f.labels[k] == w).then_some((f, k)).ok_or_else(unknown)
    }

    /// `σ_g · w` for generator index `g`.
    pub fn act(&self, g: usize, w: &str) -> Result<String, ThetaError> {
        let (f, k) = self.locate(w)?;
        Ok(f.labels[f.actions[g][k]].clone())
    }
}

/// Whether `M` is a global multiplicative subspace for `w`, i.e.
/// `M_w = μ_l(w)`.
pub fn local_mult_subspace_test(m: Line, w: &str, gm: &GaloisModel) -> Result<bool, ThetaError> {
    let (f, k) = gm.locate(w)?;
    Ok(f.mu[k] == m)
}

/// A section `v ↦ v̲` with `M_{v̲} = μ_l(v̲)` at every modeled place, by
/// breadth-first search from the root place of each fiber.
pub fn build_underline_v(gm: &GaloisModel, m: Line) -> Result<BTreeMap<BasePlace, String>, ThetaError> {
    let mut out = BTreeMap::new();
    for (v, f) in &gm.fibers {
        let mut seen = vec![false; f.len()];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        let mut found = None;
        while let Some(k) = queue.pop_front() {
            if f.mu[k] == m {
                found = Some(k);
                break;
            }
            for act in &f.actions {
                let t = act[k];
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        let k = found.ok_or(ThetaError::Unreachable(*v))?;
        out.insert(*v, f.labels[k].clone());
    }
    Ok(out)
}

/// Whether `eps`, read in `E[l]/M`, is `±` the canonical generator at `w`.
pub fn canonical_generator_check(eps: Vec2, m: Line, w: &str, gm: &GaloisModel) -> Result<bool, ThetaError> {
    if !local_mult_subspace_test(m, w, gm)? {
        return Err(ThetaError::SubspaceNotMultiplicative(w.to_string()));
    }
    let (f, k) = gm.locate(w)?;
    let l = gm.l;
    let (_, b) = coordinates(eps.reduce(l), m.generator(), f.canonical[k], l);
    Ok(b == 1 || b == l - 1)
}

/// A pair `(E, M)` or its Fricke involute `(E/M, E[l]/M)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "curve", rename_all = "snake_case")]
pub enum LevelStructure {
    Base { line: Line },
    Quotient { kernel: Line },
}

/// `(E, M) ↦ (E/M, E[l]/M)`; on the quotient side `(E/M)/(E[l]/M) = E`
/// with `(E/M)[l]/(E[l]/M) ≅ M`.
pub fn fricke(x: LevelStructure) -> LevelStructure {
    match x {
        LevelStructure::Base { line } => LevelStructure::Quotient { kernel: line },
        LevelStructure::Quotient { kernel } => LevelStructure::Base { line: kernel },
    }
}

/// Basis vector whose image generates `E[l]/M`.
pub fn quotient_generator(m: Line) -> Vec2 {
    if m.generator() == Vec2(0, 1) {
        Vec2(1, 0)
    } else {
        Vec2(0, 1)
    }
}

/// Outcome of one condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConditionStatus {
    #[serde(rename = "computed-pass")]
    Pass,
    #[serde(rename = "computed-fail")]
    Fail,
    #[serde(rename = "attested")]
    Attested,
    #[serde(rename = "unresolved")]
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionResult {
    pub condition: &'static str,
    pub status: ConditionStatus,
    pub detail: String,
}

/// Conditions without a decision procedure, supplied by the user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Attestations {
    pub non_shimura: bool,
    /// `√−1 ∈ F` and `E[30] ⊂ E(F)`, with `F/Q(j)` Galois.
    pub torsion_conditions: bool,
    /// Used only when the image heuristic is inconclusive.
    pub large_image: bool,
}

impl Attestations {
    /// `F = Q(√−1, E[30])` and a non-Shimura curve.
    pub fn standard() -> Self {
        Attestations {
            non_shimura: true,
            torsion_conditions: true,
            large_image: false,
        }
    }
}

pub const NON_SHIMURA: &str = "non-shimura";
pub const NON_ISOTRIVIAL: &str = "non-isotrivial";
pub const TORSION: &str = "torsion-conditions";
pub const MULTIPLICATIVE: &str = "multiplicative-reduction";
pub const CONGRUENCE_CHAR: &str = "congruence/l-not-residue-characteristic";
pub const CONGRUENCE_ORD_Q: &str = "congruence/l-not-dividing-ord-q";
pub const CONGRUENCE_L: &str = "congruence/l-at-least-5";
pub const CONGRUENCE_DEGREE: &str = "congruence/l-not-dividing-field-degree";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PreThetaReport {
    pub l: u64,
    pub conditions: Vec<ConditionResult>,
    /// Tate data at each place of `S` with multiplicative reduction.
    #[serde(serialize_with = "tate_table_ser")]
    pub tate: TateTable,
}

fn tate_table_ser<S: serde::Serializer>(t: &TateTable, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(t.places.values())
}

impl PreThetaReport {
    pub fn status(&self, condition: &str) -> Option<ConditionStatus> {
        self.conditions
            .iter()
            .find(|c| c.condition == condition)
            .map(|c| c.status)
    }

    /// Every condition passed or was attested.
    pub fn is_pre_theta(&self) -> bool {
        self.first_failure().is_none()
    }

    /// A computed failure if any, else an unresolved condition.
    fn first_failure(&self) -> Option<&ConditionResult> {
        let find = |s| self.conditions.iter().find(|c| c.status == s);
        find(ConditionStatus::Fail).or_else(|| find(ConditionStatus::Unresolved))
    }

    pub fn ensure(&self) -> Result<(), ThetaError> {
        match self.first_failure() {
            None => Ok(()),
            Some(c) => Err(ThetaError::ConditionFailure {
                condition: c.condition.to_string(),
                detail: c.detail.clone(),
            }),
        }
    }
}

/// Pre-theta conditions for a curve over `Q` and bad places `S ⊂ V(Q)`.
pub fn check_pre_theta(
    curve: &WeierstrassModel,
    l: u64,
    s: &BTreeSet<u64>,
    att: &Attestations,
) -> Result<PreThetaReport, ThetaError> {
    if s.is_empty() {
        return Err(ThetaError::EmptyBadSet);
    }
    let model = minimal_model(curve)?;
    let mut out = Vec::new();
    let mut push = |condition, status, detail: String| {
        out.push(ConditionResult {
            condition,
            status,
            detail,
        })
    };
    let attested = |a: bool| {
        if a {
            ConditionStatus::Attested
        } else {
            ConditionStatus::Unresolved
        }
    };

    push(
        NON_SHIMURA,
        attested(att.non_shimura),
        "no decision procedure; attestation".into(),
    );

    let degree_ok = !FIELD_DEGREE_BOUND.is_multiple_of(l);
    let image = if l >= 5 && crate::arith::is_prime(l) {
        Some(mod_l_image_contains_sl2(&model, l, IMAGE_PRIME_BOUND)?)
    } else {
        None
    };
    let (status, detail) = match &image {
        Some(ImageCheck::Verified { witnesses }) if degree_ok => (
            ConditionStatus::Pass,
            format!(
                "Frobenius witnesses at p = {} rule out every maximal subgroup; [F:Q] is prime to l",
                witnesses
                    .iter()
                    .map(|w| w.prime)
                    .collect::<BTreeSet<_>>()
                    .iter()
                    .map(u64::to_string)
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        ),
        Some(ImageCheck::Verified { .. }) => (
            attested(att.large_image),
            format!("image over Q contains SL2(F_{l}) but l divides {FIELD_DEGREE_BOUND}"),
        ),
        Some(ImageCheck::Inconclusive { primes_tested }) => (
            attested(att.large_image),
            format!("heuristic inconclusive after {primes_tested} primes"),
        ),
        None => (
            attested(att.large_image),
            format!("l = {l} is outside the heuristic's range"),
        ),
    };
    push(NON_ISOTRIVIAL, status, detail);

    push(
        TORSION,
        attested(att.torsion_conditions),
        "F ⊇ Q(√−1, E[30]); attestation".into(),
    );

    let mut tate = TateTable {
        base_degree: 1,
        places: BTreeMap::new(),
    };
    let mut mult_fail = Vec::new();
    let mut char_fail = Vec::new();
    let mut ord_fail = Vec::new();
    for &p in s {
        let r = reduction_type(&model, p)?;
        if p == 2 {
            mult_fail.push("p = 2 has even residue characteristic".to_string());
        } else if !r.kind.is_multiplicative() {
            mult_fail.push(format!("reduction at {p} is {:?}", r.kind));
        } else {
            let split = r.kind == crate::curve::ReductionKind::SplitMultiplicative;
            let data = TateLocalData {
                prime: p,
                ord_q: r.disc_valuation as u64,
                split,
            };
            tate.places.insert(BasePlace::rational(p), data);
            if (r.disc_valuation as u64).is_multiple_of(l) {
                ord_fail.push(format!("l | ord_{p}(q) = {}", r.disc_valuation));
            }
        }
        if p == l {
            char_fail.push(format!("l = char(v) = {p}"));
        }
    }
    let verdict = |fails: Vec<String>, ok: String| {
        if fails.is_empty() {
            (ConditionStatus::Pass, ok)
        } else {
            (ConditionStatus::Fail, fails.join("; "))
        }
    };
    let (st, d) = verdict(
        mult_fail,
        "odd residue characteristic and multiplicative reduction at every v ∈ S".into(),
    );
    push(MULTIPLICATIVE, st, d);
    let (st, d) = verdict(char_fail, format!("l = {l} differs from every residue characteristic"));
    push(CONGRUENCE_CHAR, st, d);
    let ords: Vec<String> = tate
        .places
        .values()
        .map(|t| format!("ord_{}(q) = {}", t.prime, t.ord_q))
        .collect();
    let (st, d) = verdict(ord_fail, format!("l ∤ {}", ords.join(", ")));
    push(CONGRUENCE_ORD_Q, st, d);
    let (st, d) = verdict(
        if l >= 5 { vec![] } else { vec![format!("l = {l} < 5")] },
        format!("l = {l} ≥ 5"),
    );
    push(CONGRUENCE_L, st, d);
    let (st, d) = verdict(
        if degree_ok {
            vec![]
        } else {
            vec![format!(
                "l divides the bound {FIELD_DEGREE_BOUND} on [F:Q]; not certified"
            )]
        },
        format!("[F:Q] divides {FIELD_DEGREE_BOUND} = 2·6·48·480, prime to l"),
    );
    push(CONGRUENCE_DEGREE, st, d);
    Ok(PreThetaReport {
        l,
        conditions: out,
        tate,
    })
}

/// `(F, l, E, S, V̲, M̲, ε̲)` with `M̲ = E[l]/M` and `ε` stored up to sign.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InitialThetaData {
    pub pre: PreThetaReport,
    pub v_section: BTreeMap<BasePlace, String>,
    pub m: Line,
    pub epsilon: Vec2,
}

impl InitialThetaData {
    /// Verifies pre-theta data, then at each place of `S` that `M` is
    /// multiplicative and `ε` canonical.
    pub fn new(
        pre: PreThetaReport,
        gm: &GaloisModel,
        v_section: BTreeMap<BasePlace, String>,
        m: Line,
        epsilon: Vec2,
    ) -> Result<Self, ThetaError> {
        pre.ensure()?;
        for v in pre.tate.places.keys() {
            let w = v_section
                .get(v)
                .ok_or_else(|| ThetaError::UnknownPlace(format!("no section value over {v}")))?;
            if parse_label(w).map(|(b, _)| b) != Some(*v) {
                return Err(ThetaError::UnknownPlace(w.clone()));
            }
            if !canonical_generator_check(epsilon, m, w, gm)? {
                return Err(ThetaError::NotCanonical(w.clone()));
            }
        }
        Ok(InitialThetaData {
            pre,
            v_section,
            m,
            epsilon: epsilon.up_to_sign(gm.l),
        })
    }
}

/// The E11a1 example with `l = 13`, `S = {11}`.
#[derive(Debug, Clone)]
pub struct E11a1Scenario {
    pub curve: WeierstrassModel,
    pub l: u64,
    pub s: BTreeSet<u64>,
    pub attestations: Attestations,
    pub galois: GaloisModel,
    pub initial: InitialThetaData,
    /// `(e, f)` of `Q_11(ζ_13, q^{1/13})/Q_11`.
    pub local_degrees: (u64, u64),
    pub lifted: FakeAdeles,
    /// Toy log-shells: volume 0 at 11, zero defects.
    pub logshell: LogShellConfig,
    pub n0: u32,
}

/// Generators of the E11a1 model: the transvection at 11, a complement
/// generating `SL2` with it, and a Frobenius at 11 of determinant 11.
pub fn e11a1_generators(l: u64) -> Vec<Mat2> {
    vec![
        Mat2::new(l, 1, 1, 0, 1),
        Mat2::new(l, 0, -1, 1, 0),
        Mat2::new(l, 11, 0, 0, 1),
    ]
}

pub fn e11a1_scenario() -> E11a1Scenario {
    let l = 13;
    let curve = WeierstrassModel::new([0, -1, 1, -10, -20]);
    let s: BTreeSet<u64> = [11].into();
    let attestations = Attestations::standard();
    let pre = check_pre_theta(&curve, l, &s, &attestations).expect("E11a1 inputs are valid");
    let t = transvection(11, 5, l).expect("l ∤ ord_q").matrix;
    let gens = e11a1_generators(l);
    debug_assert_eq!(gens[0], t);
    let v = BasePlace::rational(11);
    let mu0 = Line::span(Vec2(1, 0), l).unwrap();
    let galois = GaloisModel::from_decompositions(
        l,
        gens,
        [(v, (vec![t, Mat2::new(l, 11, 0, 0, 1)], mu0, Vec2(0, 1)))].into(),
    )
    .expect("E11a1 model is consistent");
    let m = mu0;
    let v_section = build_underline_v(&galois, m).expect("SL2 acts transitively");
    let initial = InitialThetaData::new(pre, &galois, v_section, m, Vec2(0, 1)).expect("E11a1 initial theta data");
    let (e, f) = local_torsion_degrees(11, 5, l).expect("13 ≠ 11");
    let lifted =
        FakeAdeles::new(1, [LiftedPlace::new(v, e as u32, f as u32).expect("valid degrees")]).expect("complete fiber");
    let logshell = LogShellConfig {
        place_volumes: [(v, Rational::from_integer(0.into()))].into(),
        default_defect: Some(Rational::from_integer(0.into())),
        ..Default::default()
    };
    E11a1Scenario {
        curve,
        l,
        s,
        attestations,
        galois,
        initial,
        local_degrees: (e, f),
        lifted,
        logshell,
        n0: 1,
    }
}
