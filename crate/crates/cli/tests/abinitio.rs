use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use abinitio::{parse_structure, SStructure};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abinitio")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

struct Scratch(PathBuf);

impl Scratch {
    fn new(name: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("abinitio-cli-{name}-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn file(&self, name: &str, text: &str) -> String {
        let p = self.0.join(name);
        fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    }

    fn path(&self, name: &str) -> String {
        self.0.join(name).to_string_lossy().into_owned()
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

const K4: &str = "sstructure 1\narity 3\nvertices 1 2 3 4\nedge 1 2 3\nedge 1 2 4\nedge 1 3 4\nedge 2 3 4\n";
const TWO: &str = "sstructure 1\narity 3\nvertices 1 2 3 4\nedge 1 2 3\nedge 1 2 4\n";
const THREE: &str = "sstructure 1\narity 3\nedge 1 2 3\nedge 1 2 4\nedge 1 3 4\n";

fn clique(vs: &[u8]) -> String {
    SStructure::clique(3, vs).map(|a| abinitio::serialize_structure(&a)).unwrap()
}

fn read(p: &str) -> SStructure {
    parse_structure(&fs::read_to_string(Path::new(p)).unwrap()).unwrap()
}

#[test]
fn delta_of_the_four_clique() {
    let s = Scratch::new("delta");
    let k4 = s.file("k4.doc", K4);
    let o = run(&["delta", "--in", &k4]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "2\n");
    assert_eq!(stdout(&run(&["delta", "--in", &k4, "--subset", "1,2,3"])), "2\n");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["delta"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--suite", "NOT_A_PROPERTY"]).status.code(), Some(2));
    let s = Scratch::new("usage");
    let bad = s.file("bad.doc", "sstructure 1\narity 3\nedge 1 1 2\n");
    let o = run(&["cliques", "--in", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("validation"));
    let broken = s.file("broken.doc", "sstructure 1\narity three\n");
    let o = run(&["cliques", "--in", &broken]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn single_shot_queries() {
    let s = Scratch::new("queries");
    let k4 = s.file("k4.doc", K4);
    let two = s.file("two.doc", TWO);
    let three = s.file("three.doc", THREE);
    assert_eq!(stdout(&run(&["cliques", "--in", &two])), "{1,2,3}\n{1,2,4}\n");
    assert_eq!(stdout(&run(&["strong", "--in", &two, "--subset", "1,2"])), "true\n");
    assert_eq!(stdout(&run(&["strong", "--in", &three, "--subset", "1,2"])), "false witness {1,2,3,4}\n");
    assert_eq!(stdout(&run(&["scl", "--in", &three, "--subset", "1,2"])), "{1,2,3,4}\n");
    assert_eq!(stdout(&run(&["scl", "--in", &three, "--subset", "1"])), "{1}\n");
    let class = stdout(&run(&["class", "--in", &k4]));
    assert!(class.contains("GEO true"));
    assert!(class.contains("SYM false witness {1,2,3,4}"));
    let geo = stdout(&run(&["geometry", "--in", &k4]));
    assert!(geo.contains("rank 2\npurity 2\n"), "{geo}");
    let hat = stdout(&run(&["hat", "--in", &two]));
    assert_eq!(hat, clique(&[1, 2, 3, 4]));
    assert_eq!(stdout(&run(&["geo-op", "--in", &k4])), K4);
    let dot = stdout(&run(&["export-dot", "--in", &k4]));
    assert!(dot.starts_with("graph \"k4\" {"));
    assert_eq!(dot.matches(" -- ").count(), 4);
}

#[test]
fn amalgams() {
    let s = Scratch::new("amalgam");
    let a1 = s.file("a1.doc", &clique(&[1, 2, 3, 4]));
    let a2 = s.file("a2.doc", &clique(&[1, 2, 3, 5]));
    let o = run(&["amalgam", "--kind", "standard", "--in", &a1, "--in", &a2]);
    assert_eq!(stdout(&o), clique(&[1, 2, 3, 4, 5]));
    let b1 = s.file("b1.doc", &clique(&[1, 2, 3]));
    let b2 = s.file("b2.doc", &clique(&[1, 2, 4]));
    let std = run(&["amalgam", "--kind", "standard", "--in", &b1, "--in", &b2]);
    assert_eq!(
        stdout(&std),
        "sstructure 1\narity 3\nvertices 1 2 3 4\nedge 1 2 3\nedge 1 2 4\n"
    );
    let geo = run(&["amalgam", "--kind", "geometric", "--in", &b1, "--in", &b2]);
    assert_eq!(stdout(&geo), clique(&[1, 2, 3, 4]));
    assert_eq!(run(&["amalgam", "--in", &b1]).status.code(), Some(2));
}

#[test]
fn generation_is_reproducible_and_in_class() {
    let s = Scratch::new("gen");
    let out = s.path("g.doc");
    let o = run(&["gen", "--class", "GEO", "--size", "6", "--seed", "11", "--out", &out]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("seed 11\nclass GEO\n"));
    assert_eq!(stdout(&run(&["gen", "--class", "GEO", "--size", "6", "--seed", "11"])), text);
    assert!(read(&out).class_member(abinitio::ClassId::Geo));
}

#[test]
fn generic_chain_and_extension_report() {
    let s = Scratch::new("chain");
    let last = s.path("last.doc");
    let o = run(&[
        "build-generic", "--class", "SYM", "--steps", "4", "--seed", "3", "--max-size", "9", "--a-cap", "2", "--d-cap", "4",
        "--format", "doc", "--out", &last,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let m = read(&last);
    assert!(m.class_member(abinitio::ClassId::Sym));
    assert!(m.len() <= 9);
    let json = stdout(&run(&["build-generic", "--class", "SYM", "--steps", "2", "--seed", "3", "--max-size", "9"]));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["stages"].as_array().unwrap().len(), 3);

    let empty = s.file("empty.doc", "sstructure 1\narity 3\n");
    let o = run(&["extension-report", "--in", &empty, "--class", "SYM", "--a-cap", "0", "--d-cap", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = run(&["extension-report", "--in", &empty, "--class", "SYM", "--a-cap", "0", "--d-cap", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("FAIL EXTENSION_PROPERTY"));
}

#[test]
fn verify_with_a_config_file() {
    let s = Scratch::new("verify");
    let cfg = s.file(
        "small.toml",
        "seed = 9\nrandom_instances = 20\nproblem_instances = 20\n\n[chain]\nsteps = 2\nstage_cap = 8\n",
    );
    let out = s.path("report.json");
    let o = run(&["verify", "--suite", "amalgam_predim", "--config", &cfg, "--format", "json", "--out", &out]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v[0]["property"], "AMALGAM_PREDIM");
    assert_eq!(v[0]["instances"], 20);
    assert_eq!(v[0]["config"]["seed"], 9);
    assert_eq!(v[0]["config"]["chain"]["stage_cap"], 8);
    let bad = s.file("bad.toml", "no_such_field = 1\n");
    assert_eq!(run(&["verify", "--config", &bad]).status.code(), Some(2));
}

#[test]
fn verify_all_on_the_default_config() {
    let o = run(&["verify", "--suite", "all"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS ")).count(), 14, "{text}");
}
