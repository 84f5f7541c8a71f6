use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;
use serde_json::{json, Value};
use thetalab::adelic::RegionDescriptor;
use thetalab::arakelov::{degree_lgp, q_pilot, theta_pilot};
use thetalab::curve::{invariants, minimal_model, reduction_table};
use thetalab::exactnum::DEFAULT_PRECISION_CAP;
use thetalab::exactnum::{eval_interval, format_rational, rat_valuation, Interval, LogValue};
use thetalab::indet::{
    automorphism_count, evaluate_inequality, ind1_orbit_union_with, ind2_saturate, ind3_bound_region, Coherence,
    Ind3Params, MultiradialOptions, DEFAULT_INTERVAL_PRECISION,
};
use thetalab::padic::PadicInt;
use thetalab::scenario::{ErrorClass, Scenario, ScenarioError};
use thetalab::tate::{
    coefficient_order, q_of_t_series, required_order, tate_coefficient_series, tate_coefficients_from_series,
    tate_parameter_from_series, TateError,
};
use thetalab::theta_data::{FIELD_DEGREE_BOUND, IMAGE_PRIME_BOUND};

use crate::cache::SeriesCache;
use crate::render::{digit_line, enclosure, factored, log_value, table};
use crate::{Cli, Command, Format};

pub struct Report {
    command: &'static str,
    settings: Settings,
    body: Value,
    human: String,
}

pub struct Failure {
    class: ErrorClass,
    message: String,
    report: Option<Box<Report>>,
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure {
            class: e.class(),
            message: e.to_string(),
            report: None,
        }
    }
}

impl From<TateError> for Failure {
    fn from(e: TateError) -> Self {
        ScenarioError::from(e).into()
    }
}

fn usage(message: String) -> Failure {
    Failure {
        class: ErrorClass::Usage,
        message,
        report: None,
    }
}

/// Every defaulted choice, echoed into each report.
#[derive(Debug, Clone, Serialize)]
struct Settings {
    scenario: Option<String>,
    l: Option<u64>,
    n0: u32,
    peel_index: &'static str,
    options: MultiradialOptions,
    digits: u32,
    interval_bits: u32,
    compare_cap: u32,
    image_prime_bound: u64,
    field_degree_bound: u64,
}

impl Settings {
    fn of(sc: Option<&Scenario>, cli: &Cli) -> Self {
        let mut s = Settings {
            scenario: None,
            l: None,
            n0: 1,
            peel_index: "j",
            options: MultiradialOptions::default(),
            digits: 24,
            interval_bits: DEFAULT_INTERVAL_PRECISION,
            compare_cap: DEFAULT_PRECISION_CAP,
            image_prime_bound: IMAGE_PRIME_BOUND,
            field_degree_bound: FIELD_DEGREE_BOUND,
        };
        if let Some(sc) = sc {
            s.scenario = sc.name.clone();
            s.l = Some(sc.l);
            s.n0 = sc.ind3.n0;
            s.options = sc.indeterminacies;
            s.digits = sc.precision.digits;
            s.interval_bits = sc.precision.interval_bits;
            s.compare_cap = sc.precision.compare_cap;
        } else {
            s.digits = cli.digits.unwrap_or(s.digits);
            s.interval_bits = cli.precision.unwrap_or(s.interval_bits);
        }
        s
    }

    fn human(&self) -> String {
        let mut parts = Vec::new();
        if let Some(n) = &self.scenario {
            parts.push(format!("scenario = {n}"));
        }
        if let Some(l) = self.l {
            parts.push(format!("l = {l}"));
        }
        parts.push(format!("n0 = {}", self.n0));
        parts.push(format!("peel index = {}", self.peel_index));
        parts.push(format!(
            "processions = {}",
            match self.options.coherence {
                Coherence::NonStrict => "non-strict",
                Coherence::Strict => "strict",
            }
        ));
        parts.push(format!(
            "ind1 = {}, ind2 = {}",
            self.options.apply_ind1, self.options.apply_ind2
        ));
        parts.push(format!("digits = {}", self.digits));
        parts.push(format!("interval bits = {}", self.interval_bits));
        parts.push(format!("compare cap = {}", self.compare_cap));
        format!("settings: {}\n", parts.join(", "))
    }
}

fn exit_code(c: ErrorClass) -> u8 {
    match c {
        ErrorClass::Usage => 64,
        ErrorClass::Validation => 2,
        ErrorClass::Computation => 1,
    }
}

fn class_name(c: ErrorClass) -> &'static str {
    match c {
        ErrorClass::Usage => "usage",
        ErrorClass::Validation => "validation",
        ErrorClass::Computation => "computation",
    }
}

fn emit(format: Format, r: &Report, err: Option<&Failure>) {
    match format {
        Format::Json => {
            let mut obj = json!({
                "schema": 1,
                "command": r.command,
                "settings": r.settings,
            });
            let map = obj.as_object_mut().expect("object");
            if let Value::Object(body) = &r.body {
                map.extend(body.clone());
            }
            if let Some(f) = err {
                map.insert(
                    "error".into(),
                    json!({"class": class_name(f.class), "message": f.message}),
                );
            }
            println!("{}", serde_json::to_string_pretty(&obj).expect("serializable"));
        }
        Format::Human => {
            print!("thetalab {}\n{}{}", r.command, r.settings.human(), r.human);
        }
    }
}

pub fn run(cli: &Cli) -> u8 {
    match dispatch(cli) {
        Ok(r) => {
            emit(cli.format, &r, None);
            0
        }
        Err(f) => {
            match (&f.report, cli.format) {
                (Some(r), fmt) => emit(fmt, r, Some(&f)),
                (None, Format::Json) => println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "schema": 1,
                        "error": {"class": class_name(f.class), "message": f.message},
                    }))
                    .expect("serializable")
                ),
                (None, Format::Human) => {}
            }
            eprintln!("error: {}", f.message);
            exit_code(f.class)
        }
    }
}

fn load_scenario(cli: &Cli) -> Result<Scenario, Failure> {
    let path = cli
        .scenario
        .as_ref()
        .ok_or_else(|| usage("this command needs --scenario PATH".into()))?;
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let mut sc = Scenario::from_json(&text).map_err(|e| Failure {
        class: e.class(),
        message: format!("{}: {e}", path.display()),
        report: None,
    })?;
    if let Some(d) = cli.digits {
        sc.precision.digits = d;
    }
    if let Some(p) = cli.precision {
        sc.precision.interval_bits = p;
    }
    if let Some(n0) = cli.n0 {
        sc.ind3.n0 = n0;
    }
    if cli.strict_processions {
        sc.indeterminacies.coherence = Coherence::Strict;
    }
    Ok(sc)
}

fn cache_dir(cli: &Cli) -> Option<PathBuf> {
    if let Some(d) = &cli.cache {
        return Some(d.clone());
    }
    match std::env::var_os("THETALAB_CACHE") {
        Some(d) if d.is_empty() => None,
        Some(d) => Some(PathBuf::from(d)),
        None => Some(std::env::temp_dir().join("thetalab-cache")),
    }
}

fn dispatch(cli: &Cli) -> Result<Report, Failure> {
    if let Command::Volume { region } = &cli.command {
        let sc = match &cli.scenario {
            Some(_) => Some(load_scenario(cli)?),
            None => None,
        };
        return volume(Settings::of(sc.as_ref(), cli), region);
    }
    let sc = load_scenario(cli)?;
    let settings = Settings::of(Some(&sc), cli);
    match &cli.command {
        Command::CurveInfo => curve_info(&sc, settings),
        Command::Tate => tate(&sc, settings, &SeriesCache::new(cache_dir(cli))),
        Command::ThetaData => theta_data(&sc, settings),
        Command::Pilots => pilots(&sc, settings),
        Command::Indet => indet(&sc, settings),
        Command::Inequality => inequality(&sc, settings),
        Command::Volume { .. } => unreachable!("handled above"),
    }
}

fn interval_json(iv: &Interval) -> Value {
    serde_json::to_value(iv).expect("serializable")
}

const ENCLOSURE_PLACES: u32 = 15;

fn enc(v: &LogValue, bits: u32) -> String {
    enclosure(&eval_interval(v, bits), ENCLOSURE_PLACES)
}

fn valued(v: &LogValue, bits: u32) -> Value {
    json!({"exact": v, "interval": interval_json(&eval_interval(v, bits))})
}

fn curve_info(sc: &Scenario, settings: Settings) -> Result<Report, Failure> {
    let min = minimal_model(&sc.curve).map_err(ScenarioError::from)?;
    let inv = invariants(&min).map_err(ScenarioError::from)?;
    let rows = reduction_table(&min).map_err(ScenarioError::from)?;
    let conductor = rows.iter().try_fold(BigInt::one(), |acc, r| {
        r.conductor_exponent.map(|f| acc * BigInt::from(r.prime).pow(f))
    });
    let body = json!({
        "input_model": sc.curve,
        "minimal_model": min,
        "equation": min.equation(),
        "invariants": {
            "b2": inv.b2.to_string(),
            "b4": inv.b4.to_string(),
            "b6": inv.b6.to_string(),
            "b8": inv.b8.to_string(),
            "c4": inv.c4.to_string(),
            "c6": inv.c6.to_string(),
            "disc": inv.disc.to_string(),
            "j": format_rational(&inv.j),
        },
        "reduction_table": rows,
        "conductor": conductor.as_ref().map(BigInt::to_string),
    });
    let mut h = String::new();
    h += &format!("minimal model: {}  {}\n", min.equation(), min);
    h += &format!(
        "c4 = {}, c6 = {}, Δ = {}\n",
        inv.c4,
        inv.c6,
        factored(&inv.disc.clone().into())
    );
    h += &format!("j = {} = {}\n", format_rational(&inv.j), factored(&inv.j));
    h += "reduction:\n";
    let mut t = vec![["p", "type", "Kodaira", "Tamagawa", "ord(Δ)", "f"]
        .map(String::from)
        .to_vec()];
    let opt = |o: Option<u32>| o.map_or("-".to_string(), |v| v.to_string());
    for r in &rows {
        t.push(vec![
            r.prime.to_string(),
            r.kind.to_string(),
            r.kodaira.to_string(),
            opt(r.tamagawa),
            r.disc_valuation.to_string(),
            opt(r.conductor_exponent),
        ]);
    }
    h += &table(&t);
    h += &format!(
        "conductor: {}\n",
        conductor.map_or("unknown (additive at 2 or 3)".into(), |c| c.to_string())
    );
    Ok(Report {
        command: "curve-info",
        settings,
        body,
        human: h,
    })
}

fn tate(sc: &Scenario, settings: Settings, cache: &SeriesCache) -> Result<Report, Failure> {
    let digits = sc.precision.digits;
    if digits == 0 {
        return Err(usage("--digits must be ≥ 1".into()));
    }
    let min = minimal_model(&sc.curve).map_err(ScenarioError::from)?;
    let j = invariants(&min).map_err(ScenarioError::from)?.j;
    let mut places = Vec::new();
    let mut h = String::new();
    for &p in &sc.s {
        let ord_j = rat_valuation(&j, p);
        if ord_j >= 0 {
            return Err(TateError::NotPotentiallyMultiplicative(-ord_j).into());
        }
        let inv_j = PadicInt::from_rational(p, digits, &j.recip()).map_err(TateError::from)?;
        let v = inv_j.valuation_lower_bound();
        let order = required_order(v, digits);
        let (series, st) = cache.series("q_of_t", order, q_of_t_series);
        eprintln!("cache q_of_t (order {order}): {st}");
        let q = tate_parameter_from_series(&series, &inv_j, digits)?;
        let corder = coefficient_order(q.valuation_lower_bound(), digits);
        let (a4, st4) = cache.series("tate_a4", corder, |o| tate_coefficient_series(o).0);
        let (a6, st6) = cache.series("tate_a6", corder, |o| tate_coefficient_series(o).1);
        eprintln!("cache tate_a4 (order {corder}): {st4}");
        eprintln!("cache tate_a6 (order {corder}): {st6}");
        let (s4, s6) = tate_coefficients_from_series(&a4, &a6, &q, digits)?;
        let dq = q.digits(digits).map_err(TateError::from)?;
        let d4 = s4.digits(digits).map_err(TateError::from)?;
        let d6 = s6.digits(digits).map_err(TateError::from)?;
        places.push(json!({
            "prime": p,
            "ord_q": q.valuation(),
            "q": {"digits": dq, "line": digit_line(&dq)},
            "s4": {"digits": d4, "line": digit_line(&d4)},
            "s6": {"digits": d6, "line": digit_line(&d6)},
            "series_orders": {"q_of_t": order, "coefficients": corder},
        }));
        let ord = q.valuation().map_or("≥ precision".to_string(), |o| o.to_string());
        h += &format!("p = {p}: ord(q) = {ord}, {digits} digits (least significant first)\n");
        h += &format!("  q_{p} = {}\n", digit_line(&dq));
        h += &format!("  s4   = {}\n", digit_line(&d4));
        h += &format!("  s6   = {}\n", digit_line(&d6));
    }
    Ok(Report {
        command: "tate",
        settings,
        body: json!({ "places": places }),
        human: h,
    })
}

const THETA_NOTES: [&str; 2] = [
    "multiplicative reduction is checked on the given model over Q; quadratic twists over Q(j) are not examined",
    "the line spanned by P1 is treated as exactly the cyclotomic line mu_l",
];

fn theta_data(sc: &Scenario, settings: Settings) -> Result<Report, Failure> {
    let pre = sc.pre_theta()?;
    let mut h = String::new();
    h += "pre-theta conditions:\n";
    let rows: Vec<Vec<String>> = pre
        .conditions
        .iter()
        .map(|c| {
            let st = serde_json::to_value(c.status).expect("serializable");
            vec![
                c.condition.to_string(),
                st.as_str().unwrap_or_default().to_string(),
                c.detail.clone(),
            ]
        })
        .collect();
    h += &table(&rows);
    for n in THETA_NOTES {
        h += &format!("note: {n}\n");
    }
    let mut body = json!({ "pre_theta": pre, "notes": THETA_NOTES });
    let outcome = sc
        .initial_theta_data(pre.clone())
        .and_then(|init| Ok((init, sc.galois_model()?)));
    match outcome {
        Ok((init, gm)) => {
            let fibers: Vec<Value> = gm
                .fibers()
                .iter()
                .map(|(v, f)| json!({"place": v, "places_of_K": f.len()}))
                .collect();
            body["initial_theta"] = json!({
                "m": init.m,
                "epsilon": init.epsilon,
                "v_section": init.v_section,
                "fibers": fibers,
            });
            h += "initial theta data: valid\n";
            let g = init.m.generator();
            h += &format!(
                "  M = <({}, {})>, epsilon = ±({}, {})\n",
                g.0, g.1, init.epsilon.0, init.epsilon.1
            );
            for (v, f) in gm.fibers() {
                let w = &init.v_section[v];
                h += &format!("  {v}: {} places of K, section value {w}\n", f.len());
            }
            Ok(Report {
                command: "theta-data",
                settings,
                body,
                human: h,
            })
        }
        Err(e) => {
            h += &format!("initial theta data: invalid ({e})\n");
            Err(Failure {
                report: Some(Box::new(Report {
                    command: "theta-data",
                    settings,
                    body,
                    human: h,
                })),
                ..Failure::from(e)
            })
        }
    }
}

fn pilots(sc: &Scenario, settings: Settings) -> Result<Report, Failure> {
    let tate = sc.tate_table()?;
    let bits = settings.interval_bits;
    let pq = q_pilot(&tate, sc.l).map_err(ScenarioError::from)?;
    let pt = theta_pilot(&tate, sc.l).map_err(ScenarioError::from)?;
    let lhs = -pq.normalized_degree();
    let rhs = -degree_lgp(&pt);
    let body = json!({
        "q_pilot": pq,
        "theta_pilot": pt,
        "neg_deg_q_pilot": valued(&lhs, bits),
        "neg_deg_lgp_theta_pilot": valued(&rhs, bits),
    });
    let mut h = String::new();
    h += &format!("P_q = {pq}\n");
    h += "P_Θ components:\n";
    for (j, c) in pt.components().iter().enumerate() {
        h += &format!("  j = {}: {c}\n", j + 1);
    }
    h += &format!("-deg(P_q)       = {}\n", log_value(&lhs, bits));
    h += &format!("-deg_lgp(P_Θ)   = {}\n", log_value(&rhs, bits));
    h += &format!("  enclosures: {} and {}\n", enc(&lhs, bits), enc(&rhs, bits));
    Ok(Report {
        command: "pilots",
        settings,
        body,
        human: h,
    })
}

fn volume(settings: Settings, path: &Path) -> Result<Report, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let schema_err = |loc: &str, m: String| usage(format!("{}: schema error at `{loc}`: {m}", path.display()));
    let mut v: Value = serde_json::from_str(&text).map_err(|e| schema_err(".", e.to_string()))?;
    let obj = v
        .as_object_mut()
        .ok_or_else(|| schema_err(".", "expected an object".into()))?;
    match obj.remove("schema") {
        Some(Value::Number(n)) if n.as_u64() == Some(1) => {}
        Some(other) => return Err(schema_err("schema", format!("unsupported version {other}, expected 1"))),
        None => return Err(schema_err("schema", "missing field `schema`".into())),
    }
    let r: RegionDescriptor =
        serde_path_to_error::deserialize(v).map_err(|e| schema_err(&e.path().to_string(), e.inner().to_string()))?;
    let bits = settings.interval_bits;
    let hull = r.hull().ln_nu().map_err(ScenarioError::from)?;
    let (exact, value) = match r.ln_nu() {
        Ok(x) => (true, x),
        Err(_) => (false, r.ln_nu_upper()),
    };
    let body = json!({
        "level": r.level(),
        "base_degree": r.base_degree(),
        "summands": r.summands().len(),
        "exact": exact,
        "ln_nu": valued(&value, bits),
        "hull_ln_nu": valued(&hull, bits),
    });
    let mut h = String::new();
    h += &format!(
        "level {}, base degree {}, {} summands\n",
        r.level(),
        r.base_degree(),
        r.summands().len()
    );
    let rel = if exact { "=" } else { "≤" };
    h += &format!("ln ν̄ {rel} {}\n", log_value(&value, bits));
    h += &format!("ln ν̄(hull) = {}\n", log_value(&hull, bits));
    Ok(Report {
        command: "volume",
        settings,
        body,
        human: h,
    })
}

fn indet(sc: &Scenario, settings: Settings) -> Result<Report, Failure> {
    let input = sc.inequality_input()?;
    let params =
        Ind3Params::new(input.l, input.tate.clone(), input.n0, input.logshell.clone()).map_err(ScenarioError::from)?;
    let bits = settings.interval_bits;
    let coherence = input.options.coherence;
    let n = params.components();
    let mut counts = Vec::new();
    let mut h = String::new();
    h += "procession automorphisms:\n";
    let mut t = vec![vec!["n".to_string(), "non-strict".into(), "strict".into()]];
    for k in 1..=n {
        let ns = automorphism_count(k, Coherence::NonStrict);
        let st = automorphism_count(k, Coherence::Strict);
        counts.push(json!({"n": k, "non_strict": ns.to_string(), "strict": st.to_string()}));
        t.push(vec![k.to_string(), ns.to_string(), st.to_string()]);
    }
    h += &table(&t);
    h += "bound regions per component:\n";
    let mut comps = Vec::new();
    let mut t = vec![["j", "summands", "ln ν̄(Ind3)", "ln ν̄(U_j)", "ln ν̄(hull U_j)"]
        .map(String::from)
        .to_vec()];
    let show = |v: &Option<LogValue>| v.as_ref().map_or("inexact".to_string(), |v| v.to_string());
    for j in 1..=n {
        let r3 = ind3_bound_region(&params, j, &input.lifted).map_err(ScenarioError::from)?;
        let mut u = r3.clone();
        if input.options.apply_ind1 {
            u = ind1_orbit_union_with(&u, coherence).map_err(ScenarioError::from)?;
        }
        if input.options.apply_ind2 {
            u = ind2_saturate(&u).map_err(ScenarioError::from)?;
        }
        let l3 = r3.ln_nu().ok();
        let lu = u.ln_nu().ok();
        let lh = u.hull().ln_nu().map_err(ScenarioError::from)?;
        comps.push(json!({
            "j": j,
            "summands": u.summands().len(),
            "ind3_ln_nu": l3,
            "ln_nu": lu,
            "hull_ln_nu": valued(&lh, bits),
        }));
        t.push(vec![
            j.to_string(),
            u.summands().len().to_string(),
            show(&l3),
            show(&lu),
            lh.to_string(),
        ]);
    }
    h += &table(&t);
    Ok(Report {
        command: "indet",
        settings,
        body: json!({"automorphism_counts": counts, "components": comps}),
        human: h,
    })
}

fn inequality(sc: &Scenario, settings: Settings) -> Result<Report, Failure> {
    let input = sc.inequality_input()?;
    let report = evaluate_inequality(&input).map_err(ScenarioError::from)?;
    let bits = settings.interval_bits;
    let mut h = String::new();
    h += &format!("lhs = -deg(P_q)             = {}\n", log_value(&report.lhs, bits));
    h += &format!("rhs = mean ln ν̄(hull U_j)   = {}\n", log_value(&report.rhs, bits));
    h += &format!(
        "verdict (lhs ≤ rhs): {}\n",
        serde_json::to_value(report.verdict)
            .expect("serializable")
            .as_str()
            .unwrap_or_default()
    );
    h += &format!(
        "  lhs ∈ {}\n  rhs ∈ {}\n",
        enclosure(&report.intervals.lhs, ENCLOSURE_PLACES),
        enclosure(&report.intervals.rhs, ENCLOSURE_PLACES)
    );
    h += "components:\n";
    let mut t = vec![vec!["j".to_string(), "ln ν̄(hull U_j)".into(), "ln ν̄(U_j)".into()]];
    for c in &report.components {
        t.push(vec![
            c.j.to_string(),
            c.hull_ln_nu.to_string(),
            c.ln_nu.as_ref().map_or("inexact".into(), LogValue::to_string),
        ]);
    }
    h += &table(&t);
    let e = &report.config_echo;
    h += "configuration:\n";
    for b in &e.bad_places {
        h += &format!("  bad place {}: ord(q) = {}, split = {}\n", b.place, b.ord_q, b.split);
    }
    h += &format!("  lifted places: {}\n", e.lifted_places.join(", "));
    h += &format!("  average: {}\n", e.average);
    h += &format!(
        "  log-shells: {}\n",
        serde_json::to_string(&e.logshell).expect("serializable")
    );
    let body = serde_json::to_value(&report).expect("serializable");
    Ok(Report {
        command: "inequality",
        settings,
        body,
        human: h,
    })
}
