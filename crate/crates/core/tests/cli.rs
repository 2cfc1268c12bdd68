use std::path::Path;
use std::process::{Command, Output};

use ktcy::cli::RunReport;
use ktcy::field::ScalarField;

fn ktcy(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ktcy"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "status {:?}\nstdout {}\nstderr {}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn zero_datum_solve_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ktcy(&["solve", "--datum", "builtin:zero", "--grid", "8,8,8", "--out", "run"], tmp.path());
    ok(&out);
    let r = RunReport::read(tmp.path().join("run/report.txt")).unwrap();
    assert_eq!(r.get("converged"), Some("true"));
    assert_eq!(r.get_real("residual.sup"), Some(0.0));
    assert_eq!(r.get("grid.samples"), Some("8,8,8"));
    assert!(r.get("grid.checksum").unwrap().len() == 64);
    assert!(r.get("tool.version").unwrap().starts_with("kt-calabi-yau"));
    let u = ScalarField::read_dump(tmp.path().join("run/solution.field")).unwrap();
    assert_eq!(u.sup_norm(), 0.0);
}

#[test]
fn manufactured_run_reports_ten_named_checks_and_verify_reproduces_margins() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&ktcy(&["manufacture", "--datum", "builtin:mild-manufactured", "--grid", "16,16,16", "--out", "m"], tmp.path()));
    ok(&ktcy(&["solve", "--datum", "dump:m/datum.field", "--out", "run"], tmp.path()));
    let solved = RunReport::read(tmp.path().join("run/report.txt")).unwrap();
    let names: Vec<_> = solved.section("estimate.").filter(|(k, _)| k.ends_with(".name")).collect();
    assert_eq!(names.len(), 10);
    assert_eq!(solved.get("estimate.all_pass"), Some("true"));

    let u = ScalarField::read_dump(tmp.path().join("run/solution.field")).unwrap();
    let u_star = ScalarField::read_dump(tmp.path().join("m/u_star.field")).unwrap();
    assert!((&u - &u_star).sup_norm() < 1e-9);

    ok(&ktcy(&["verify", "--out", "run"], tmp.path()));
    let verified = RunReport::read(tmp.path().join("run/verify_report.txt")).unwrap();
    for id in "abcdefghij".chars() {
        let key = format!("estimate.{id}.margin");
        let a = solved.get_real(&key).unwrap();
        let b = verified.get_real(&key).unwrap();
        assert!((a - b).abs() <= 1e-14, "{key}: {a} vs {b}");
    }
    assert_eq!(solved.get("solution.checksum"), verified.get("solution.checksum"));
}

#[test]
fn renormalize_flag_matches_prenormalized_datum() {
    let tmp = tempfile::tempdir().unwrap();
    let raw = "expr:0.5*sin(2*pi*x)*cos(2*pi*t) + 0.2";
    let unnormalized = ktcy(&["solve", "--datum", raw, "--grid", "16,16,16", "--out", "a"], tmp.path());
    assert_eq!(unnormalized.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unnormalized.stderr).contains("integral of e^F"));

    ok(&ktcy(&["solve", "--datum", raw, "--grid", "16,16,16", "--renormalize", "--out", "a"], tmp.path()));
    let f = ScalarField::read_dump(tmp.path().join("a/datum.field")).unwrap();
    let pre = ktcy::cli::renormalize(&f);
    pre.write_dump(tmp.path().join("pre.field")).unwrap();
    ok(&ktcy(&["solve", "--datum", "dump:pre.field", "--out", "b"], tmp.path()));
    let ua = ScalarField::read_dump(tmp.path().join("a/solution.field")).unwrap();
    let ub = ScalarField::read_dump(tmp.path().join("b/solution.field")).unwrap();
    assert!((&ua - &ub).sup_norm() <= 1e-14);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| ktcy(args, tmp.path()).status.code();
    assert_eq!(code(&["manufacture", "--datum", "expr:sin(2*pi*x)", "--grid", "8,8,8"]), Some(4));
    assert_eq!(code(&["solve", "--datum", "dump:missing.field"]), Some(5));
    assert_eq!(code(&["solve", "--datum", "expr:0.5*sin(2*pi*x)", "--grid", "8,8,8"]), Some(2));
    let stalled = [
        "solve",
        "--datum",
        "expr:0.9*sin(2*pi*x)*cos(2*pi*y)",
        "--renormalize",
        "--grid",
        "8,8,8",
        "--set",
        "newton_max_iters=1",
        "--set",
        "tau_min_step=0.25",
    ];
    assert_eq!(code(&stalled), Some(3));
    assert_eq!(code(&["solve", "--datum", "builtin:zero", "--angle", "1,1"]), Some(1));
    assert_eq!(code(&["solve"]), Some(1));
    assert_eq!(code(&["solve", "--datum", "builtin:zero", "--grid", "8,8,8", "--out", "z"]), Some(0));
}

#[test]
fn config_file_with_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("run.cfg"),
        "# rotated run\ndatum = builtin:mild-manufactured\ngrid = 4,4,4\nangle = 1,1\nout = rot\n",
    )
    .unwrap();
    ok(&ktcy(&["manufacture", "--datum", "builtin:mild-manufactured", "--grid", "16,16,16", "--out", "m"], tmp.path()));
    let out = ktcy(
        &["rotate", "--config", "run.cfg", "--grid", "16,16,16", "--datum", "dump:m/datum.field"],
        tmp.path(),
    );
    ok(&out);
    let r = RunReport::read(tmp.path().join("rot/report.txt")).unwrap();
    assert_eq!(r.get("rotation.cell_grid.samples"), Some("32,32,16"));
    assert_eq!(r.get("rotation.vp_bound_ok"), Some("true"));
    let l2 = r.get_real("rotation.cell_normalization").unwrap();
    assert!((l2 - 2.0).abs() < 1e-10);
    assert!(tmp.path().join("rot/cell_solution.field").exists());
}

#[test]
fn export_formats() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&ktcy(&["solve", "--datum", "builtin:zero", "--grid", "8,8,4", "--out", "run"], tmp.path()));
    ok(&ktcy(&["export", "--out", "run", "--set", "export.slice=2"], tmp.path()));
    let csv = std::fs::read_to_string(tmp.path().join("run/solution.slice_t2.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 64);
    assert!(rows.iter().all(|r| r.split(',').nth(2).unwrap().parse::<f64>().unwrap() == 0.0));

    ok(&ktcy(&["export", "--out", "run", "--set", "export.format=field-dump"], tmp.path()));
    let a = std::fs::read_to_string(tmp.path().join("run/solution.field")).unwrap();
    let b = std::fs::read_to_string(tmp.path().join("run/solution.export.field")).unwrap();
    assert_eq!(a, b);

    ok(&ktcy(
        &["export", "--out", "run", "--set", "export.format=report-text", "--datum", "builtin:zero"],
        tmp.path(),
    ));
    let r = RunReport::read(tmp.path().join("run/solution.report.txt")).unwrap();
    assert_eq!(r.get_real("field.sup"), Some(0.0));
    assert_eq!(r.get("estimate.count"), Some("10"));

    let bad = ktcy(&["export", "--out", "run", "--set", "export.slice=9"], tmp.path());
    assert_eq!(bad.status.code(), Some(1));
}
