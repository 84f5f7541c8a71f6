use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use thetalab::exactnum::{rat, LogValue};

const Q_LINE: &str = "0.0,0,0,0,10,2,6,6,5,4,4,1,4,1,0,5,9,9,3,3,1,3,4";
const S4_LINE: &str = "0.0,0,0,0,5,7,1,0,5,9,1,9,2,10,2,0,1,6,2,6,4,10,10";
const S6_LINE: &str = "0.0,0,0,0,1,8,4,4,5,5,10,2,1,8,2,7,10,9,6,3,3,8,5";

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/scenarios")
        .join(name)
}

fn run(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thetalab"))
        .args(args)
        .env("THETALAB_CACHE", cache)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn e11a1() -> String {
    scenario("e11a1.json").to_str().unwrap().to_string()
}

fn write_variant(dir: &Path, name: &str, edit: impl FnOnce(&mut Value)) -> String {
    let mut v: Value = serde_json::from_str(&fs::read_to_string(scenario("e11a1.json")).unwrap()).unwrap();
    edit(&mut v);
    let p = dir.join(name);
    fs::write(&p, v.to_string()).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn tate_digit_lines_and_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let sc = e11a1();
    let cold = run(&["tate", "--scenario", &sc, "--digits", "24"], &cache);
    assert_eq!(cold.status.code(), Some(0), "{}", stderr(&cold));
    let out = stdout(&cold);
    assert!(out.contains(&format!("q_11 = {Q_LINE}\n")), "{out}");
    assert!(out.contains(&format!("s4   = {S4_LINE}\n")), "{out}");
    assert!(out.contains(&format!("s6   = {S6_LINE}\n")), "{out}");
    assert!(stderr(&cold).contains("q_of_t (order 6): miss"));

    let warm = run(&["tate", "--scenario", &sc, "--digits", "24"], &cache);
    assert_eq!(warm.stdout, cold.stdout);
    assert!(stderr(&warm).contains("q_of_t (order 6): hit"), "{}", stderr(&warm));

    let longer = run(&["tate", "--scenario", &sc, "--digits", "40"], &cache);
    assert!(stderr(&longer).contains("superseded"), "{}", stderr(&longer));
    assert!(stdout(&longer).contains(&format!("q_11 = {Q_LINE},")));

    // a shorter request is served from the longer entry
    let again = run(&["tate", "--scenario", &sc, "--digits", "24"], &cache);
    assert_eq!(again.stdout, cold.stdout);
    assert!(stderr(&again).contains("q_of_t (order 6): hit"));

    let entry = cache.join("q_of_t.json");
    let text = fs::read_to_string(&entry).unwrap();
    fs::write(&entry, text.replacen("744", "743", 1)).unwrap();
    let tampered = run(&["tate", "--scenario", &sc, "--digits", "24"], &cache);
    assert!(stderr(&tampered).contains("checksum failure"), "{}", stderr(&tampered));
    assert_eq!(tampered.stdout, cold.stdout);
}

#[test]
fn tate_json_is_independent_of_cache() {
    let dir = tempfile::tempdir().unwrap();
    let sc = e11a1();
    let a = run(&["tate", "--scenario", &sc, "--format", "json"], &dir.path().join("a"));
    let b = run(&["tate", "--scenario", &sc, "--format", "json"], &dir.path().join("a"));
    let c = run(
        &[
            "tate",
            "--scenario",
            &sc,
            "--format",
            "json",
            "--cache",
            dir.path().join("c").to_str().unwrap(),
        ],
        &dir.path().join("a"),
    );
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["places"][0]["q"]["line"], Q_LINE);
    assert_eq!(v["places"][0]["ord_q"], 5);
}

#[test]
fn curve_info_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["curve-info", "--scenario", &e11a1(), "--format", "json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["equation"], "y^2 + y = x^3 - x^2 - 10x - 20");
    assert_eq!(v["invariants"]["c4"], "496");
    assert_eq!(v["invariants"]["c6"], "20008");
    assert_eq!(v["invariants"]["j"], "-122023936/161051");
    let r = &v["reduction_table"][0];
    assert_eq!(r["kind"], "split-multiplicative");
    assert_eq!(r["kodaira"], "I5");
    assert_eq!(r["tamagawa"], 5);
    assert_eq!(r["conductor_exponent"], 1);
    assert_eq!(v["conductor"], "11");
    let h = stdout(&run(&["curve-info", "--scenario", &e11a1()], dir.path()));
    assert!(h.contains("j = -122023936/161051 = -2^12·31^3/11^5"), "{h}");
}

#[test]
fn pilots_exact_and_interval() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["pilots", "--scenario", &e11a1()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let h = stdout(&o);
    assert!(h.contains("-deg(P_q)       = (-5/26)·ln 11  ≈ -0.461133706307"), "{h}");
    assert!(h.contains("-deg_lgp(P_Θ)   = (-35/12)·ln 11  ≈ -6.99386121232"), "{h}");

    let o = run(&["pilots", "--scenario", &e11a1(), "--format", "json"], dir.path());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let lhs: LogValue = serde_json::from_value(v["neg_deg_q_pilot"]["exact"].clone()).unwrap();
    assert_eq!(lhs, LogValue::ln_scaled(11, rat(-5, 26)));
    let rhs: LogValue = serde_json::from_value(v["neg_deg_lgp_theta_pilot"]["exact"].clone()).unwrap();
    assert_eq!(rhs, LogValue::ln_scaled(11, rat(-35, 12)));
    assert!(v["neg_deg_q_pilot"]["interval"]["lower"].is_string());
}

#[test]
fn inequality_reports() {
    let dir = tempfile::tempdir().unwrap();
    let sc = e11a1();
    let a = run(&["inequality", "--scenario", &sc, "--format", "json"], dir.path());
    let b = run(&["inequality", "--scenario", &sc, "--format", "json"], dir.path());
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    let lhs: LogValue = serde_json::from_value(v["lhs"].clone()).unwrap();
    let rhs: LogValue = serde_json::from_value(v["rhs"].clone()).unwrap();
    assert_eq!(lhs, LogValue::ln_scaled(11, rat(-5, 26)));
    assert_eq!(rhs, LogValue::ln_scaled(11, rat(-35, 12)));
    assert_eq!(v["verdict"], "fails");
    assert_eq!(v["config_echo"]["n0"], 1);
    assert_eq!(v["config_echo"]["peel_index"], "j");
    assert_eq!(v["settings"]["options"]["coherence"], "non-strict");

    let s = run(
        &[
            "inequality",
            "--scenario",
            &sc,
            "--format",
            "json",
            "--strict-processions",
            "--n0",
            "0",
        ],
        dir.path(),
    );
    let v: Value = serde_json::from_slice(&s.stdout).unwrap();
    assert_eq!(v["settings"]["options"]["coherence"], "strict");
    assert_eq!(v["config_echo"]["n0"], 0);
    let rhs0: LogValue = serde_json::from_value(v["rhs"].clone()).unwrap();
    assert!(rhs0.is_zero());

    let shifted = write_variant(dir.path(), "shift.json", |v| {
        v["lifted_places"][0]["logshell"] = "3".into()
    });
    let o = run(&["inequality", "--scenario", &shifted, "--format", "json"], dir.path());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let r: LogValue = serde_json::from_value(v["rhs"].clone()).unwrap();
    assert_eq!(&r - &rhs, LogValue::ln_scaled(11, rat(27, 2)));
}

#[test]
fn missing_places_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = scenario("missing-places.json");
    let o = run(&["inequality", "--scenario", p.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("incomplete scenario"), "{}", stderr(&o));
    let o = run(&["theta-data", "--scenario", p.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("galois_model"));
    // stages that need no lifted places still run
    let o = run(&["pilots", "--scenario", p.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_variant(dir.path(), "bad.json", |v| v["ind3"]["start"] = 1.into());
    let o = run(&["inequality", "--scenario", &bad], dir.path());
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("schema error at `ind3.start`"), "{}", stderr(&o));

    let o = run(&["inequality"], dir.path());
    assert_eq!(o.status.code(), Some(64));
    let o = run(&["no-such-command"], dir.path());
    assert_eq!(o.status.code(), Some(64));
    let o = run(&["inequality", "--scenario", &e11a1(), "--n0", "2"], dir.path());
    assert_eq!(o.status.code(), Some(64));
    let o = run(&["--help"], dir.path());
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn theta_data_variants() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["theta-data", "--scenario", &e11a1(), "--format", "json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["initial_theta"]["fibers"][0]["places_of_K"], 168);
    assert_eq!(v["initial_theta"]["v_section"]["p=11,d=1"], "p=11,d=1/w0");

    for (l, failing) in [
        (5, "congruence/l-not-dividing-ord-q"),
        (11, "congruence/l-not-residue-characteristic"),
    ] {
        let p = write_variant(dir.path(), &format!("l{l}.json"), |v| v["l"] = l.into());
        let o = run(&["theta-data", "--scenario", &p, "--format", "json"], dir.path());
        assert_eq!(o.status.code(), Some(2));
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        let conds = v["pre_theta"]["conditions"].as_array().unwrap();
        let c = conds.iter().find(|c| c["condition"] == failing).unwrap();
        assert_eq!(c["status"], "computed-fail");
        assert_eq!(v["error"]["class"], "validation");
    }
}

#[test]
fn indet_counts() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["indet", "--scenario", &e11a1(), "--format", "json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let counts: Vec<&str> = v["automorphism_counts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["non_strict"].as_str().unwrap())
        .collect();
    assert_eq!(counts[..4], ["2", "12", "288", "34560"]);
    assert_eq!(v["components"].as_array().unwrap().len(), 6);
}

#[test]
fn volume_of_region_file() {
    let dir = tempfile::tempdir().unwrap();
    let region = r#"{"schema": 1, "level": 1, "summands": [
        {"index": ["p=11/e=1,f=1", "p=11/e=1,f=1"], "region": {"kind": "polydisc", "radius": "1/2"}},
        {"index": ["p=7/e=1,f=1", "p=7/e=1,f=1"], "region": {"kind": "union_of", "members": [
            {"kind": "polydisc", "radius": "1"},
            {"kind": "scaled_integer_ring", "shift": "2"}]}}]}"#;
    let p = dir.path().join("r.json");
    fs::write(&p, region).unwrap();
    let o = run(
        &["volume", "--region", p.to_str().unwrap(), "--format", "json"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let ln: LogValue = serde_json::from_value(v["ln_nu"]["exact"].clone()).unwrap();
    assert_eq!(ln, LogValue::from_parts([(11, rat(-1, 2)), (7, rat(-1, 1))], rat(0, 1)));

    fs::write(&p, region.replace("\"schema\": 1", "\"schema\": 3")).unwrap();
    let o = run(&["volume", "--region", p.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(64));
    fs::write(&p, region.replace("radius\": \"1/2", "radios\": \"1/2")).unwrap();
    let o = run(&["volume", "--region", p.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("summands[0]"), "{}", stderr(&o));
}
