use lagnerve::cli::files::*;
use lagnerve::cli::run;
use lagnerve::cli::suites::{dg_case, planar_bases};
use lagnerve::cube_model::CollaredCube;
use lagnerve::xi_functor::build_xi_simplex;
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::Command;

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{}", env!("CARGO_MANIFEST_DIR"), name)
}

fn lagnerve(args: &[&str]) -> i32 {
    let mut all = vec!["lagnerve"];
    all.extend(args);
    run(all)
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn out_dir() -> (tempfile::TempDir, String) {
    let d = tempfile::tempdir().unwrap();
    let s = d.path().display().to_string();
    (d, s)
}

fn ids(report: &Value) -> Vec<String> {
    report["checks"].as_array().unwrap().iter().map(|c| c["id"].as_str().unwrap().to_string()).collect()
}

#[test]
fn b_faces_on_the_bundled_cube() {
    let (_d, out) = out_dir();
    assert_eq!(lagnerve(&["verify", "b-faces", "--cube", &fixture("cube3.json"), "--out", &out]), 0);
    let r = read(&PathBuf::from(&out).join("report.json"));
    assert_eq!(r["schema"], 1);
    assert_eq!(r["summary"]["failed"], 0);
    assert_eq!(ids(&r), vec!["b.commutation.input", "b.faces.input", "b.surgery.input"]);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["anchor"].as_str().unwrap().starts_with("b-construction/")));
}

#[test]
fn goal_suite_for_two_simplices() {
    let (_d, out) = out_dir();
    assert_eq!(lagnerve(&["verify", "goal", "--n-max", "2", "--d-max", "3", "--out", &out]), 0);
    let r = read(&PathBuf::from(&out).join("report.json"));
    let ids = ids(&r);
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    assert!(ids.contains(&"xi.goal.planar.N2".to_string()));
    assert!(!ids.iter().any(|i| i.ends_with("N3")));
}

#[test]
fn corrupted_fixture_fails_with_a_residual() {
    let (_d, out) = out_dir();
    let code = lagnerve(&["verify", "goal", "--cube", &fixture("corrupted_triangle.json"), "--base", &fixture("planar_base.json"), "--out", &out]);
    assert_eq!(code, 1);
    let r = read(&PathBuf::from(&out).join("report.json"));
    let goal = r["checks"].as_array().unwrap().iter().find(|c| c["id"] == "input.goal").unwrap();
    assert_eq!(goal["status"], "fail");
    assert!(!goal["residual"].as_array().unwrap().is_empty());
    assert_eq!(goal["minimal"]["n"], 2);
    assert_eq!(goal["minimal"]["d"], 1);
    // the uncorrupted triangle passes
    assert_eq!(lagnerve(&["verify", "goal", "--cube", &fixture("triangle.json"), "--base", &fixture("planar_base.json"), "--out", &out]), 0);
}

#[test]
fn reports_are_byte_identical() {
    let (_a, a) = out_dir();
    let report = PathBuf::from(&a).join("report.json");
    let mut runs = Vec::new();
    for _ in 0..2 {
        assert_eq!(lagnerve(&["verify", "ainf", "--d-max", "2", "--seed", "5", "--out", &a]), 0);
        runs.push(std::fs::read(&report).unwrap());
    }
    assert_eq!(runs[0], runs[1]);
    let x = &runs[0];
    let r: Value = serde_json::from_slice(x).unwrap();
    assert_eq!(r["seed"], 5);
    assert!(r["checks"][0].get("wall_ms").is_none());
    assert_eq!(lagnerve(&["verify", "ainf", "--d-max", "2", "--timings", "--out", &a]), 0);
    assert!(read(&PathBuf::from(&a).join("report.json"))["checks"][0]["wall_ms"].is_u64());
}

#[test]
fn mod_two_mode() {
    let (_d, out) = out_dir();
    assert_eq!(lagnerve(&["verify", "nerve", "--mode", "z2", "--n-max", "3", "--out", &out]), 0);
    assert_eq!(read(&PathBuf::from(&out).join("report.json"))["config"]["mode"], "z2");
}

#[test]
fn staircase_count_with_figure() {
    let (_d, out) = out_dir();
    let svg = PathBuf::from(&out).join("fig").join("d4.svg");
    assert_eq!(lagnerve(&["count", &fixture("staircase_d4.json"), "--svg", svg.to_str().unwrap(), "--out", &out]), 0);
    let t = read(&PathBuf::from(&out).join("count.json"));
    assert_eq!(t["curves"], 5);
    let corners: Vec<(String, u64)> = t["corner_types"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["corner_type"].as_str().unwrap().to_string(), c["polygons"].as_u64().unwrap()))
        .collect();
    assert_eq!(corners, vec![("Type1".into(), 1), ("Type2".into(), 1), ("Type3".into(), 0)]);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg"));
    assert!(text.contains("fill=\"#f5e663\""), "shaded boxes");
    // the bundled base category is this table's category
    let base: BaseFile = serde_json::from_value(t["base"].clone()).unwrap();
    let bundled: BaseFile = load_json(Path::new(&fixture("planar_base.json"))).unwrap();
    assert_eq!(base, bundled);
}

#[test]
fn single_staircase_count_is_the_identity() {
    let (_d, out) = out_dir();
    assert_eq!(lagnerve(&["count", &fixture("staircase_d1.json"), "--out", &out]), 0);
    let t = read(&PathBuf::from(&out).join("count.json"));
    let gens: Vec<i64> = t["generators"].as_array().unwrap().iter().map(|g| g["degree"].as_i64().unwrap()).collect();
    assert_eq!(gens, vec![0, 1]);
    let mu = t["base"]["mu"].as_array().unwrap();
    assert_eq!(mu.len(), 1);
    assert_eq!(mu[0]["inputs"][0], "x0.1#0");
    assert_eq!(mu[0]["output"], "x0.1#1");
    assert_eq!(mu[0]["value"], 1);
}

#[test]
fn empty_configuration_gives_an_empty_table() {
    let (_d, out) = out_dir();
    assert_eq!(lagnerve(&["count", &fixture("empty.json"), "--out", &out]), 0);
    let t = read(&PathBuf::from(&out).join("count.json"));
    assert_eq!(t["curves"], 0);
    assert!(t["generators"].as_array().unwrap().is_empty());
    assert!(t["base"]["mu"].as_array().unwrap().is_empty());
}

#[test]
fn build_xi_writes_a_simplex_that_round_trips() {
    let (_d, out) = out_dir();
    assert_eq!(lagnerve(&["build-xi", &fixture("triangle.json"), &fixture("planar_base.json"), "--out", &out]), 0);
    let path = PathBuf::from(&out).join("simplex.json");
    let s: XiSimplexFile = load_json(&path).unwrap();
    assert_eq!(s.n, 2);
    assert_eq!(s.vertices, vec!["L1", "L2", "L3"]);
    let faces: Vec<Vec<usize>> = s.faces.iter().map(|f| f.face.clone()).collect();
    assert_eq!(faces, vec![vec![0, 1], vec![0, 1, 2], vec![0, 2], vec![1, 2]]);
    assert!(s.faces.iter().all(|f| f.degree == 2 - f.face.len() as i32));
    let again: XiSimplexFile = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
    assert_eq!(again, s);
    assert_eq!(read(&PathBuf::from(&out).join("report.json"))["summary"]["failed"], 0);
}

#[test]
fn mismatched_objects_are_an_input_error() {
    assert_eq!(lagnerve(&["build-xi", &fixture("mismatched.json"), &fixture("planar_base.json")]), 2);
    let err = CubeFile::simplex(&load_json(Path::new(&fixture("mismatched.json"))).unwrap(), "m", &planar_bases(1).unwrap()[0].1).unwrap_err();
    assert_eq!(err.location, "m: cube.face_data");
}

#[test]
fn bad_inputs_exit_with_two() {
    let (d, out) = out_dir();
    let bad = d.path().join("bad.json");
    std::fs::write(&bad, "{\"schema\": 1, \"staircase\": {\"d\": 1,}}").unwrap();
    assert_eq!(lagnerve(&["count", bad.to_str().unwrap()]), 2);
    let err = load_json::<PlanarFile>(&bad).unwrap_err();
    assert!(err.location.ends_with(":1:36"), "{}", err.location);
    assert_eq!(lagnerve(&["verify", "nerve", "--n-max", "0", "--out", &out]), 2);
    assert_eq!(lagnerve(&["verify", "nerve", "--d-max", "5", "--out", &out]), 2);
    assert_eq!(lagnerve(&["verify", "ainf", "--cube", &fixture("cube3.json"), "--out", &out]), 2);
    assert_eq!(lagnerve(&["count", "/no/such/file.json"]), 2);
    assert_eq!(lagnerve(&["verify", "everything"]), 2);
}

#[test]
fn environment_overrides_flags() {
    let (_d, out) = out_dir();
    let status = Command::new(env!("CARGO_BIN_EXE_lagnerve"))
        .args(["verify", "nerve"])
        .env("LAGNERVE_SEED", "11")
        .env("LAGNERVE_N_MAX", "2")
        .env("LAGNERVE_OUT", &out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let r = read(&PathBuf::from(&out).join("report.json"));
    assert_eq!(r["seed"], 11);
    assert_eq!(ids(&r), vec!["nerve.expansion.N2", "nerve.simplicial.N1", "nerve.simplicial.N2"]);
    let status = Command::new(env!("CARGO_BIN_EXE_lagnerve")).args(["verify", "nerve"]).env("LAGNERVE_MODE", "z3").status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn base_file_round_trip() {
    for (_, cat) in planar_bases(3).unwrap() {
        let f = BaseFile::from_category(&cat);
        let back = f.to_category("base").unwrap();
        assert_eq!(BaseFile::from_category(&back), f);
    }
    let (cat, _) = dg_case(4, vec![0, 1], 3);
    let f = BaseFile::from_category(&cat);
    assert_eq!(BaseFile::from_category(&f.to_category("dg").unwrap()), f);
    // a structure constant of the wrong degree is located
    let mut bad = f.clone();
    let e = bad.mu.iter_mut().find(|e| e.objects.len() == 2).unwrap();
    let hom = bad.homs.iter().find(|h| h.source == e.objects[0] && h.target == e.objects[1]).unwrap();
    let wrong = hom.basis.iter().find(|(_, d)| *d != hom.basis.iter().find(|(n, _)| *n == e.output).unwrap().1).map(|(n, _)| n.clone());
    if let Some(w) = wrong {
        e.output = w;
        let err = bad.to_category("dg").unwrap_err();
        assert!(err.location.starts_with("dg: mu["), "{}", err);
    }
}

#[test]
fn cube_file_round_trip() {
    let (cat, s) = dg_case(2, vec![0, 1, 0], 2);
    let mut cube = CollaredCube::simplex(2);
    for (k, o) in s.objects.iter().enumerate() {
        cube.face_data.insert(vec![k], cat.objects[*o].clone());
    }
    let file = CubeFile::from_simplex(cube, &s, &cat);
    let text = serde_json::to_string(&file).unwrap();
    let back: CubeFile = parse_json("cube", &text).unwrap();
    assert_eq!(back, file);
    let t = back.simplex("cube", &cat).unwrap();
    assert_eq!(build_xi_simplex(&cat, &t, 2).maps, build_xi_simplex(&cat, &s, 2).maps);
}
