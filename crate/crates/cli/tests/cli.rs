use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn unitcheck(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unitcheck"))
        .args(args)
        .current_dir(dir)
        .env_remove("UNITCHECK_INCLUDE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn setup(files: &[(&str, &str)]) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for (from, to) in files {
        std::fs::copy(fixture(from), dir.path().join(to)).unwrap();
    }
    dir
}

#[test]
fn infer_prints_listing_layout() {
    let d = setup(&[("ballistics_annotated.f90", "ballistics.f90")]);
    let o = unitcheck(d.path(), &["infer", "ballistics.f90"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "ballistics.f90:\n  3:22 unit metre :: x0\n  5:22 unit metre / sec :: v0\n  7:22 unit metre / (sec**2) :: a\n  9:11 unit metre :: x\n  9:14 unit sec :: t\n"
    );
}

#[test]
fn suggest_prints_listing_layout() {
    let d = setup(&[("ballistics_bare.f90", "ballistics.f90")]);
    let o = unitcheck(d.path(), &["suggest", "ballistics.f90"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "ballistics.f90: 3 variable declarations\n   suggested to be given a specification:\n    (4:22)    v0\n    (5:22)    a\n    (6:11)    x\n"
    );
}

#[test]
fn check_is_silent_on_success_and_exits_1_on_inconsistency() {
    let d = setup(&[("ballistics_annotated.f90", "ok.f90"), ("ballistics_bad_sum.f90", "bad.f90")]);
    let ok = unitcheck(d.path(), &["check", "ok.f90"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).is_empty() && stderr(&ok).is_empty());
    let bad = unitcheck(d.path(), &["check", "bad.f90"]);
    assert_eq!(bad.status.code(), Some(1));
    let e = stderr(&bad);
    assert!(e.starts_with("bad.f90:12:7: error: inconsistent units"), "{e}");
    assert!(e.contains("bad.f90:5:26 (annotation): v0 ≃ metre / sec"), "{e}");
}

#[test]
fn errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("broken.f90"), "program p\n  x = = 1\nend program p\n").unwrap();
    std::fs::write(d.path().join("uses.f90"), "program p\n  use missing\nend program p\n").unwrap();
    std::fs::write(d.path().join("calls.f90"), "program p\n  real :: x\n  x = g(x)\nend program p\n").unwrap();
    assert_eq!(unitcheck(d.path(), &["check", "broken.f90"]).status.code(), Some(2));
    assert_eq!(unitcheck(d.path(), &["check", "absent.f90"]).status.code(), Some(2));
    let o = unitcheck(d.path(), &["infer", "uses.f90"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing"));
    assert_eq!(unitcheck(d.path(), &["check", "calls.f90"]).status.code(), Some(2));
    assert_eq!(unitcheck(d.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(unitcheck(d.path(), &["infer"]).status.code(), Some(2));
}

#[test]
fn compile_then_infer_uses_the_summary() {
    let d = setup(&[("helper.f90", "helper.f90"), ("ballistics_mod.f90", "ballistics.f90")]);
    let o = unitcheck(d.path(), &["compile", "helper.f90"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "Compiling units for 'helper.f90'\n");
    let first = std::fs::read(d.path().join("helper.fsmod")).unwrap();
    unitcheck(d.path(), &["compile", "helper.f90"]);
    assert_eq!(std::fs::read(d.path().join("helper.fsmod")).unwrap(), first);
    std::fs::remove_file(d.path().join("helper.f90")).unwrap();
    let o = unitcheck(d.path(), &["infer", "ballistics.f90"]);
    assert_eq!(
        stdout(&o),
        "helper.fsmod: parsed precompiled file.\nballistics.f90:\n  5:11 unit sec :: t1\n  5:21 unit sec :: t2\n  6:11 unit metre :: xsum\n  8:3 unit metre :: x\n  9:13 unit sec :: t\n"
    );
}

#[test]
fn include_flag_and_environment_variable() {
    let d = setup(&[("helper.f90", "helper.f90"), ("ballistics_mod.f90", "ballistics.f90")]);
    std::fs::create_dir(d.path().join("lib")).unwrap();
    let o = unitcheck(d.path(), &["compile", "helper.f90", "--out", "lib"]);
    assert_eq!(o.status.code(), Some(0));
    std::fs::remove_file(d.path().join("helper.f90")).unwrap();
    assert_eq!(unitcheck(d.path(), &["infer", "ballistics.f90"]).status.code(), Some(2));
    let o = unitcheck(d.path(), &["infer", "-I", "lib", "ballistics.f90"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("lib/helper.fsmod: parsed precompiled file."));
    let o = Command::new(env!("CARGO_BIN_EXE_unitcheck"))
        .args(["infer", "ballistics.f90"])
        .current_dir(d.path())
        .env("UNITCHECK_INCLUDE", "lib")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn synth_writes_output_file_only_on_success() {
    let d = setup(&[("helper.f90", "helper.f90"), ("ballistics_bad_sum.f90", "bad.f90")]);
    let o = unitcheck(d.path(), &["synth", "helper.f90", "--out", "annotated.f90"]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(d.path().join("annotated.f90")).unwrap();
    assert!(text.contains("!= unit ('a)**2 :: square"));
    assert_eq!(unitcheck(d.path(), &["check", "annotated.f90"]).status.code(), Some(0));
    let again = unitcheck(d.path(), &["synth", "annotated.f90"]);
    assert_eq!(stdout(&again), text);

    let o = unitcheck(d.path(), &["synth", "bad.f90", "--out", "nope.f90"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!d.path().join("nope.f90").exists());
}

#[test]
fn generate_writes_corpus() {
    let d = tempfile::tempdir().unwrap();
    let o = unitcheck(d.path(), &["generate", "-n", "5", "-l", "5", "-a", "2", "--fmt", "mult", "--out", "corpus"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).is_empty());
    let c = d.path().join("corpus");
    assert!(c.join("mod_f5.f90").exists() && c.join("main.f90").exists());
    let o = unitcheck(&c, &["infer", "mod_f1.f90"]);
    assert!(stdout(&o).contains("unit ('a)**2 ('b)**3 :: f1"));

    let o = unitcheck(d.path(), &["generate", "-n", "2", "-l", "5", "--fmt", "single", "--out", "one"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("warning: n = 2"));
    assert!(d.path().join("one/single.f90").exists());
}
