use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn fanforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fanforge"))
        .args(args)
        .env_remove("FANFORGE_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write_temp(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn corpus_prints_builtin_coordinates() {
    let o = fanforge(&["corpus", "ex21"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["dim"], 3);
    assert_eq!(v["rays"], serde_json::json!([[0, 0, -1], [1, 1, 1], [1, -1, 1], [-1, -1, 1], [-1, 1, 1]]));
    assert_eq!(v["max_cones"].as_array().unwrap().len(), 6);

    let fulton: Value = serde_json::from_str(&stdout(&fanforge(&["corpus", "fulton"]))).unwrap();
    assert_eq!(fulton["rays"].as_array().unwrap().len(), 7);
    assert_eq!(fulton["max_cones"].as_array().unwrap().len(), 10);

    let hex: Value = serde_json::from_str(&stdout(&fanforge(&["corpus", "ex22(6)"]))).unwrap();
    assert_eq!(hex["rays"].as_array().unwrap().len(), 6);

    assert_eq!(code(&fanforge(&["corpus", "ex99"])), 4);
    assert_eq!(code(&fanforge(&["corpus", "ex22(3)"])), 4);
}

#[test]
fn corpus_output_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["ex21", "ex31", "fulton", "ex22(5)"] {
        let text = stdout(&fanforge(&["corpus", name]));
        let path = write_temp(&dir, "f.json", &text);
        let o = fanforge(&["validate", "--fan", &path, "--json"]);
        assert_eq!(code(&o), 0);
        let a: Value = serde_json::from_str(&text).unwrap();
        let b: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(a, b, "{name}");
        let via_file = stdout(&fanforge(&["prim", "--fan", &path]));
        let builtin = stdout(&fanforge(&["prim", "--fan", &format!("corpus:{name}")]));
        assert_eq!(via_file, builtin);
    }
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    let swapped = write_temp(&dir, "bad.json", r#"{"dim": 2, "rays": [[1,0],[0,1],[-1,0]], "max_cones": [[0,1],[0,2]]}"#);
    let o = fanforge(&["validate", "--fan", &swapped]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid fan"));
    assert_eq!(code(&fanforge(&["verify", "--fan", &swapped])), 2);

    let garbage = write_temp(&dir, "garbage.json", "{\"dim\": 2, \"rays\": ");
    assert_eq!(code(&fanforge(&["nef", "--fan", &garbage])), 3);

    assert_eq!(code(&fanforge(&["nef", "--fan", "corpus:nope"])), 4);
    assert_eq!(code(&fanforge(&["frobnicate"])), 4);
    assert_eq!(code(&fanforge(&["verify", "--theorem", "no-such-theorem", "--fan", "corpus:ex21"])), 4);
    assert_eq!(code(&fanforge(&["--help"])), 0);
}

#[test]
fn nef_prints_reduced_systems() {
    let ex21 = stdout(&fanforge(&["nef", "--fan", "corpus:ex21"]));
    assert!(ex21.contains("a1+a3-a2-a4 >= 0"), "{ex21}");
    assert!(ex21.contains("2a0+a2+a4 >= 0"), "{ex21}");

    let fulton = stdout(&fanforge(&["nef", "--fan", "corpus:fulton"]));
    assert!(fulton.contains("3 of them hold with equality"), "{fulton}");
    assert!(fulton.contains("normalization: a0 = 0, a1 = 0, a2 = 0"), "{fulton}");
    assert!(fulton.contains("  a3-a4 >= 0"), "{fulton}");
    assert!(fulton.contains("  3a4-2a3 >= 0"), "{fulton}");

    let ex31 = stdout(&fanforge(&["nef", "--fan", "corpus:ex31"]));
    assert_eq!(ex31.matches(" >= 0    (from").count(), 1, "{ex31}");
    assert!(ex31.contains("P1 {0,1,3} alone cuts out the cone: yes"), "{ex31}");
    assert!(ex31.contains("P2 {0,2,4} alone cuts out the cone: yes"), "{ex31}");
}

#[test]
fn text_and_json_views_agree() {
    let prim: Value = serde_json::from_str(&stdout(&fanforge(&["prim", "--fan", "corpus:ex21", "--json"]))).unwrap();
    assert_eq!(prim, serde_json::json!([[0, 2, 4], [1, 3]]));

    let rel = stdout(&fanforge(&["relations", "--fan", "corpus:ex21"]));
    assert!(rel.contains("r1+r3 = r2+r4"), "{rel}");
    assert!(rel.contains("r0+r2+r4 = 1/2r2+1/2r4"), "{rel}");

    let walls: Value = serde_json::from_str(&stdout(&fanforge(&["walls", "--fan", "corpus:ex21", "--json"]))).unwrap();
    assert_eq!(walls.as_array().unwrap().len(), 9);

    let mori = stdout(&fanforge(&["mori", "--fan", "corpus:ex21"]));
    assert!(mori.contains("pointed, 2 extremal rays"), "{mori}");
    let mori = stdout(&fanforge(&["mori", "--fan", "corpus:fulton"]));
    assert!(mori.contains("not pointed"), "{mori}");

    let qp: Value = serde_json::from_str(&stdout(&fanforge(&["qp", "--fan", "corpus:ex21", "--json"]))).unwrap();
    assert_eq!(qp["quasi_projective"], true);
    assert!(qp["witness"]["ray_values"].is_object());
    let qp: Value = serde_json::from_str(&stdout(&fanforge(&["qp", "--fan", "corpus:fulton", "--json"]))).unwrap();
    assert_eq!(qp["quasi_projective"], false);
}

#[test]
fn refine_writes_fan_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let side = dir.path().join("side.json");
    let o = fanforge(&["refine", "--fan", "corpus:ex31", "--support", "2,4", "--seed", "3", "--sidecar", side.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let fine: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let ex21: Value = serde_json::from_str(&stdout(&fanforge(&["corpus", "ex21"]))).unwrap();
    let sorted = |v: &Value| {
        let mut c: Vec<Vec<u64>> = serde_json::from_value(v["max_cones"].clone()).unwrap();
        c.sort();
        c
    };
    assert_eq!(fine["rays"], ex21["rays"]);
    assert_eq!(sorted(&fine), sorted(&ex21));

    let side: Value = serde_json::from_str(&fs::read_to_string(&side).unwrap()).unwrap();
    assert_eq!(side["weights"].as_object().unwrap().len(), 5);
    assert_eq!(side["cone_map"].as_array().unwrap().len(), 6);

    let path = write_temp(&dir, "fine.json", &stdout(&o));
    assert_eq!(code(&fanforge(&["validate", "--fan", &path])), 0);

    let qp: Value =
        serde_json::from_str(&stdout(&fanforge(&["refine", "--fan", "corpus:ex31", "--qp", "--json"]))).unwrap();
    assert!(qp["sidecar"]["witness"].is_object());
    assert_eq!(code(&fanforge(&["refine", "--fan", "corpus:fulton", "--qp"])), 1);
    assert_eq!(code(&fanforge(&["refine", "--fan", "corpus:ex21", "--support", "9"])), 4);
}

#[test]
fn seed_comes_from_the_environment() {
    let run = |env: Option<&str>, args: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_fanforge"));
        c.args(args).env_remove("FANFORGE_SEED");
        if let Some(s) = env {
            c.env("FANFORGE_SEED", s);
        }
        c.output().unwrap().stdout
    };
    let base = ["refine", "--fan", "corpus:ex22(5)", "--json"];
    let from_env = run(Some("11"), &base);
    let mut flagged = base.to_vec();
    flagged.extend(["--seed", "11"]);
    assert_eq!(from_env, run(None, &flagged));
}

#[test]
fn verify_single_fan_and_theorem() {
    let o = fanforge(&["verify", "--fan", "corpus:ex31", "--theorem", "main-theorem"]);
    assert_eq!(code(&o), 0);
    let table = stdout(&o);
    assert!(table.contains("main-theorem"), "{table}");
    assert!(table.ends_with("1 reports, 0 failed\n"), "{table}");

    let o = fanforge(&["verify", "--fan", "corpus:fulton", "--json"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    let main = v["reports"].as_array().unwrap().iter().find(|r| r["theorem"] == "main-theorem").unwrap();
    assert_eq!(main["verdict"], "evidence");
}

#[test]
fn verify_suite_is_deterministic() {
    let args = ["verify", "--all", "--seed", "7", "--random-fans", "25", "--json"];
    let a = fanforge(&args);
    assert_eq!(code(&a), 0, "{}", stdout(&a));
    let b = fanforge(&args);
    assert_eq!(a.stdout, b.stdout);
}
