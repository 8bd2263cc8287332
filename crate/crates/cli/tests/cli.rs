use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nijenhuis")).args(args).env_remove("NIJ_CATALOG_DIR").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn statuses_text(s: &str) -> Vec<String> {
    s.lines()
        .filter_map(|l| l.split_whitespace().next())
        .filter(|w| matches!(*w, "PASS" | "FAIL" | "FINDING"))
        .map(str::to_string)
        .collect()
}

fn statuses_machine(s: &str) -> Vec<String> {
    s.lines()
        .filter(|l| !l.starts_with("summary") && !l.starts_with("command="))
        .filter_map(|l| l.split(' ').find_map(|f| f.strip_prefix("status=")))
        .map(str::to_string)
        .collect()
}

#[test]
fn passing_check_exits_zero() {
    let o = run(&["check-algebra", "A4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS    pre-lie"));
}

#[test]
fn failing_family_exits_one_with_witness() {
    let o = run(&["--format", "machine", "nijenhuis-check", "C5", "N_C5^8"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("status=FAIL"));
    assert!(out.contains("witness="));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["verify-paper", "--prime", "6"]).status.code(), Some(2));
    assert_eq!(run(&["check-algebra", "no_such_algebra"]).status.code(), Some(2));
    assert_eq!(run(&["verify-paper", "--section", "bogus"]).status.code(), Some(2));
    assert_eq!(run(&["--format", "xml", "check-algebra", "A4"]).status.code(), Some(2));
}

#[test]
fn text_and_machine_agree_on_statuses() {
    let args = ["nijenhuis-check", "C5", "N_C5^8", "N_C5^8minus", "N_C5^1"];
    let text = run(&args);
    let machine = run(&[&["--format", "machine"][..], &args[..]].concat());
    assert_eq!(text.status.code(), machine.status.code());
    let (t, m) = (statuses_text(&stdout(&text)), statuses_machine(&stdout(&machine)));
    assert!(!t.is_empty());
    assert_eq!(t, m);
}

#[test]
fn file_inputs_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let alg = dir.path().join("x.alg");
    fs::write(&alg, "algebra X\ndim 2\ne1 * e1 = e2\nend\n").unwrap();
    let fam = dir.path().join("x.fam");
    fs::write(&fam, "family N_X on X\nparams a b\nN e1 = a e1 + b e2\nN e2 = a e2\nend\n").unwrap();
    let o = run(&["nijenhuis-check", alg.to_str().unwrap(), fam.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let bad = dir.path().join("bad.fam");
    fs::write(&bad, "family N_Y on X\nparams a\nN e1 = a e2\nN e2 = a e1\nend\n").unwrap();
    let o = run(&["nijenhuis-check", alg.to_str().unwrap(), bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

#[test]
fn enumerate_counts_match() {
    let o = run(&["--format", "machine", "enumerate", "--prime", "5", "A5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("25 Nijenhuis operators over F_5"));
}

#[test]
fn verify_paper_filters_sections() {
    let o = run(&["--format", "machine", "verify-paper", "--section", "catalog", "--section", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let sections: std::collections::BTreeSet<&str> =
        out.lines().filter_map(|l| l.split(' ').find_map(|f| f.strip_prefix("section="))).collect();
    assert_eq!(sections.into_iter().collect::<Vec<_>>(), ["algebras", "catalog"]);
}

#[test]
fn verify_paper_writes_all_formats() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify-paper", "--section", "algebras", "--write", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    for f in ["report.txt", "report.machine", "report.json"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let json = fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(json.contains("\"status\": \"PASS\"") || json.contains("\"status\":\"PASS\""));
}

fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for e in fs::read_dir(from).unwrap() {
        let e = e.unwrap();
        let target = to.join(e.file_name());
        if e.file_type().unwrap().is_dir() {
            copy_dir(&e.path(), &target);
        } else {
            fs::copy(e.path(), target).unwrap();
        }
    }
}

#[test]
fn catalog_dir_override_is_used() {
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/catalog");
    let dir = tempfile::tempdir().unwrap();
    copy_dir(&src, dir.path());
    let a = dir.path().join("algebras/A.alg");
    let text = fs::read_to_string(&a).unwrap();
    fs::write(&a, text.replace("algebra A4\ndim 2\nend", "algebra A4\ndim 2\ne1 * e1 = e2\ne2 * e1 = e1\nend")).unwrap();

    let o = Command::new(env!("CARGO_BIN_EXE_nijenhuis"))
        .args(["--format", "machine", "verify-paper", "--section", "algebras"])
        .env("NIJ_CATALOG_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("subject=A4 status=FAIL"));
}
