//! Scenario files: one JSON document describing a curve, a prime `l`, the
//! bad places and whatever the later pipeline stages need.
//!
//! Parsing is strict (unknown keys are rejected, `"schema": 1` is required)
//! and reports the JSON path of the first offending value. Resolution into
//! pipeline inputs happens lazily, so `curve-info` works on a scenario that
//! lacks a Galois model.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::adelic::{AdelicError, FakeAdeles, LiftedPlace};
use crate::arakelov::{ArakelovError, BasePlace, TateTable};
use crate::curve::{CurveError, WeierstrassModel};
use crate::exactnum::{parse_rational, DEFAULT_PRECISION_CAP};
use crate::gl2::{Line, Mat2, Vec2};
use crate::indet::{IndetError, InequalityInput, LogShellConfig, MultiradialOptions, DEFAULT_INTERVAL_PRECISION};
use crate::padic::PadicError;
use crate::tate::TateError;
use crate::theta_data::{
    build_underline_v, check_pre_theta, Attestations, GaloisModel, InitialThetaData, PreThetaReport, ThetaError,
};

pub const SCHEMA_VERSION: u32 = 1;

/// The E11a1 scenario as shipped in `scenarios/e11a1.json`.
pub const E11A1_JSON: &str = include_str!("../scenarios/e11a1.json");

/// How a failure should be reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed input; the message carries a schema location.
    Usage,
    /// Well-formed input describing data that fails a check.
    Validation,
    /// A computation could not finish within its limits.
    Computation,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("scenario has no `{0}` section")]
    Missing(&'static str),
    #[error(transparent)]
    Theta(#[from] ThetaError),
    #[error(transparent)]
    Indet(#[from] IndetError),
    #[error(transparent)]
    Adelic(#[from] AdelicError),
    #[error(transparent)]
    Arakelov(#[from] ArakelovError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Tate(#[from] TateError),
}

fn curve_class(e: &CurveError) -> ErrorClass {
    match e {
        CurveError::PrimeTooLarge(_) | CurveError::AdditiveUnsupportedDetail(_) => ErrorClass::Computation,
        _ => ErrorClass::Validation,
    }
}

impl ScenarioError {
    pub fn class(&self) -> ErrorClass {
        match self {
            ScenarioError::Schema { .. } => ErrorClass::Usage,
            ScenarioError::Theta(ThetaError::Curve(e)) | ScenarioError::Curve(e) => curve_class(e),
            ScenarioError::Indet(IndetError::CapExceeded { .. }) => ErrorClass::Computation,
            ScenarioError::Indet(IndetError::Adelic(AdelicError::InexactRegion { .. }))
            | ScenarioError::Adelic(AdelicError::InexactRegion { .. }) => ErrorClass::Computation,
            ScenarioError::Tate(TateError::Padic(PadicError::InsufficientOrder { .. })) => ErrorClass::Computation,
            _ => ErrorClass::Validation,
        }
    }

    fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        ScenarioError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

type Matrix = [[i64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberSpec {
    pub place: BasePlace,
    /// Generators of the decomposition group at the root place.
    pub decomposition: Vec<Matrix>,
    /// Generator of `μ_l` at the root place.
    pub mu: Vec2,
    /// Representative of the canonical class at the root place.
    pub canonical: Vec2,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaloisModelSpec {
    pub generators: Vec<Matrix>,
    pub fibers: Vec<FiberSpec>,
    /// Generator of the subspace `M`.
    pub m: Vec2,
    pub epsilon: Vec2,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftedPlaceSpec {
    pub place: BasePlace,
    pub e: u32,
    pub f: u32,
    /// Log-shell volume override at this place, a rational string.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logshell: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ind3Spec {
    #[serde(default = "default_n0")]
    pub n0: u32,
}

fn default_n0() -> u32 {
    1
}

impl Default for Ind3Spec {
    fn default() -> Self {
        Ind3Spec { n0: default_n0() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrecisionSpec {
    /// `p`-adic digits printed by `tate`.
    pub digits: u32,
    /// Bits of the reported interval enclosures.
    pub interval_bits: u32,
    /// Precision cap when deciding comparisons.
    pub compare_cap: u32,
}

impl Default for PrecisionSpec {
    fn default() -> Self {
        PrecisionSpec {
            digits: 24,
            interval_bits: DEFAULT_INTERVAL_PRECISION,
            compare_cap: DEFAULT_PRECISION_CAP,
        }
    }
}

/// A parsed scenario file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub curve: WeierstrassModel,
    pub l: u64,
    #[serde(rename = "S")]
    pub s: BTreeSet<u64>,
    #[serde(default)]
    pub attestations: Attestations,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub galois_model: Option<GaloisModelSpec>,
    #[serde(default)]
    pub lifted_places: Vec<LiftedPlaceSpec>,
    /// Index overrides and defects; place volumes go on `lifted_places`.
    #[serde(default)]
    pub logshell: LogShellConfig,
    #[serde(default)]
    pub ind3: Ind3Spec,
    #[serde(default)]
    pub indeterminacies: MultiradialOptions,
    #[serde(default)]
    pub precision: PrecisionSpec,
}

impl Scenario {
    /// Parses and schema-checks a scenario without computing anything.
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let sc: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ScenarioError::schema(path, e.into_inner().to_string())
        })?;
        sc.check_schema()?;
        Ok(sc)
    }

    pub fn e11a1() -> Self {
        Scenario::from_json(E11A1_JSON).expect("shipped scenario is valid")
    }

    fn check_schema(&self) -> Result<(), ScenarioError> {
        if self.schema != SCHEMA_VERSION {
            return Err(ScenarioError::schema(
                "schema",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema),
            ));
        }
        let mut seen = BTreeSet::new();
        for (i, w) in self.lifted_places.iter().enumerate() {
            if !seen.insert(w.place) {
                return Err(ScenarioError::schema(
                    format!("lifted_places[{i}].place"),
                    format!("{} listed twice", w.place),
                ));
            }
            if let Some(v) = &w.logshell {
                parse_rational(v)
                    .map_err(|e| ScenarioError::schema(format!("lifted_places[{i}].logshell"), e.to_string()))?;
                if self.logshell.place_volumes.contains_key(&w.place) {
                    return Err(ScenarioError::schema(
                        format!("lifted_places[{i}].logshell"),
                        format!("volume at {} also set under logshell.place_volumes", w.place),
                    ));
                }
            }
        }
        if let Some(g) = &self.galois_model {
            let mut seen = BTreeSet::new();
            for (i, f) in g.fibers.iter().enumerate() {
                if !seen.insert(f.place) {
                    return Err(ScenarioError::schema(
                        format!("galois_model.fibers[{i}].place"),
                        format!("{} listed twice", f.place),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn pre_theta(&self) -> Result<PreThetaReport, ScenarioError> {
        Ok(check_pre_theta(&self.curve, self.l, &self.s, &self.attestations)?)
    }

    pub fn galois_model(&self) -> Result<GaloisModel, ScenarioError> {
        let spec = self
            .galois_model
            .as_ref()
            .ok_or(ScenarioError::Missing("galois_model"))?;
        let l = self.l;
        let mat = |m: &Matrix| Mat2::from_rows(l, *m);
        let mut places = BTreeMap::new();
        for f in &spec.fibers {
            let mu = Line::span(f.mu, l)
                .ok_or_else(|| ThetaError::InvalidModel(format!("μ_l generator at {} is zero", f.place)))?;
            places.insert(
                f.place,
                (f.decomposition.iter().map(mat).collect(), mu, f.canonical.reduce(l)),
            );
        }
        Ok(GaloisModel::from_decompositions(
            l,
            spec.generators.iter().map(mat).collect(),
            places,
        )?)
    }

    /// Pre-theta checks, the section `V̲` and the checks on `M` and `ε`.
    pub fn initial_theta_data(&self, pre: PreThetaReport) -> Result<InitialThetaData, ScenarioError> {
        let spec = self
            .galois_model
            .as_ref()
            .ok_or(ScenarioError::Missing("galois_model"))?;
        pre.ensure()?;
        let gm = self.galois_model()?;
        let m = Line::span(spec.m, self.l).ok_or_else(|| ThetaError::InvalidModel("M is spanned by zero".into()))?;
        let v_section = build_underline_v(&gm, m)?;
        Ok(InitialThetaData::new(
            pre,
            &gm,
            v_section,
            m,
            spec.epsilon.reduce(self.l),
        )?)
    }

    pub fn fake_adeles(&self) -> Result<FakeAdeles, ScenarioError> {
        let lifts = self
            .lifted_places
            .iter()
            .map(|w| LiftedPlace::new(w.place, w.e, w.f))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FakeAdeles::new(1, lifts)?)
    }

    /// The `logshell` section with the per-place overrides merged in.
    pub fn logshell_config(&self) -> LogShellConfig {
        let mut cfg = self.logshell.clone();
        for w in &self.lifted_places {
            if let Some(v) = &w.logshell {
                cfg.place_volumes
                    .insert(w.place, parse_rational(v).expect("checked when parsed"));
            }
        }
        cfg
    }

    /// Places of `S` with no lifted place configured.
    pub fn missing_lifts(&self) -> Vec<String> {
        let have: BTreeSet<BasePlace> = self.lifted_places.iter().map(|w| w.place).collect();
        self.s
            .iter()
            .map(|&p| BasePlace::rational(p))
            .filter(|v| !have.contains(v))
            .map(|v| format!("lifted place over {v}"))
            .collect()
    }

    /// Tate data at `S`, after the pre-theta conditions pass.
    pub fn tate_table(&self) -> Result<TateTable, ScenarioError> {
        let pre = self.pre_theta()?;
        pre.ensure()?;
        Ok(pre.tate)
    }

    pub fn inequality_input(&self) -> Result<InequalityInput, ScenarioError> {
        let mut missing = Vec::new();
        if self.s.is_empty() {
            missing.push("bad places S".to_string());
        }
        missing.extend(self.missing_lifts());
        if !missing.is_empty() {
            return Err(IndetError::IncompleteScenario(missing).into());
        }
        let lifted = self.fake_adeles()?;
        let tate = self.tate_table()?;
        Ok(InequalityInput {
            n0: self.ind3.n0,
            options: self.indeterminacies,
            interval_precision: self.precision.interval_bits,
            compare_cap: self.precision.compare_cap,
            ..InequalityInput::new(self.l, tate, lifted, self.logshell_config())
        })
    }
}
