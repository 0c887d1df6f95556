use std::process::{Command, Output};

fn gammak(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gammak"))
        .args(args)
        .env_remove("GAMMAK_CACHE_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn gamma_outside_support_is_zero() {
    let o = gammak(&["gamma", "--k", "2", "--c", "5", "--format", "plain"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "0");
}

#[test]
fn aliquot_two_is_four_thirds() {
    let o = gammak(&["aliquot", "--d", "2", "--digits", "50", "--format", "plain"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), format!("1.{}", "3".repeat(49)));
    let o = gammak(&["aliquot", "--d", "2", "--digits", "50", "--cf"]);
    let v = json(&o);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["digits"], 50);
    assert_eq!(v["method_agreement"]["pass"], true);
    assert_eq!(v["convergents"]["terminated"], false);
}

#[test]
fn gamma_table_latex_rows() {
    let o = gammak(&["gamma-table", "--k", "3", "--format", "latex"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("$ c^{8}$"));
    assert!(s.contains(
        "-2 c^{8}+24 c^{7}-252 c^{6}+1512 c^{5}-4830 c^{4}+8568 c^{3}-8484 c^{2}+4392 c-927"
    ));
    assert!(s.contains("$ (3-c)^{8}$"));
    assert_eq!(
        s,
        stdout(&gammak(&["gamma-exact", "--k", "3", "--format", "latex"]))
    );
}

#[test]
fn json_output_is_byte_identical_across_runs() {
    for args in [
        &["gamma", "--k", "3", "--c", "7/5", "--threads", "3"][..],
        &[
            "painleve-check",
            "--k",
            "2",
            "--t-grid",
            "1/2,3",
            "--digits",
            "40",
        ][..],
        &["toda-coeffs", "--max-m", "8", "--k", "4"][..],
    ] {
        let a = gammak(args);
        let b = gammak(args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(gammak(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(gammak(&["gamma", "--k", "2"]).status.code(), Some(1));
    assert_eq!(gammak(&["--help"]).status.code(), Some(0));
    assert_eq!(
        gammak(&["gamma", "--k", "2", "--c", "1", "--digits", "5"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        gammak(&[
            "toda-coeffs",
            "--max-m",
            "3",
            "--k",
            "2",
            "--format",
            "latex"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        gammak(&[
            "divisor-variance",
            "--k",
            "2",
            "--X",
            "1000",
            "--alpha",
            "1/2"
        ])
        .status
        .code(),
        Some(1)
    );
    // D_6(300) underflows the trust threshold at 10 digits
    assert_eq!(
        gammak(&[
            "painleve-check",
            "--k",
            "6",
            "--t-grid",
            "300",
            "--digits",
            "10"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn reports_carry_anchors() {
    let v = json(&gammak(&["gamma-exact", "--k", "4"]));
    assert_eq!(v["pass"], true);
    assert_eq!(v["anchor"], v["mass"]);
    let v = json(&gammak(&["toda-coeffs", "--max-m", "6", "--k", "5"]));
    assert_eq!(v["pass"], true);
    assert!(v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["pass"] == true));
    let v = json(&gammak(&["a-k", "--k", "2", "--prime-limit", "1000"]));
    assert_eq!(v["pass"], true);
    let o = gammak(&[
        "toda-check",
        "--k",
        "3",
        "--format",
        "csv",
        "--digits",
        "40",
    ]);
    let s = stdout(&o);
    assert_eq!(s.lines().count(), 7);
    assert!(s.lines().skip(1).all(|l| l.contains(",true,")));
}

#[test]
fn cache_dir_precedence_and_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let env_dir = tmp.path().join("env");
    let flag_dir = tmp.path().join("flag");
    let cfg = tmp.path().join("gammak.conf");
    std::fs::write(
        &cfg,
        format!(
            "digits = 12\ncache_dir = {}\n",
            tmp.path().join("file").display()
        ),
    )
    .unwrap();
    let base = [
        "divisor-variance",
        "--k",
        "2",
        "--X",
        "2000",
        "--alpha",
        "3/10",
        "--config",
        cfg.to_str().unwrap(),
    ];

    let run = |extra: &[&str], env: Option<&std::path::Path>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_gammak"));
        c.args(base).args(extra).env_remove("GAMMAK_CACHE_DIR");
        if let Some(e) = env {
            c.env("GAMMAK_CACHE_DIR", e);
        }
        c.output().unwrap()
    };
    let o = run(&[], None);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(json(&o)["digits"], 12);
    assert!(tmp.path().join("file").read_dir().unwrap().count() == 1);

    run(&[], Some(&env_dir));
    assert!(env_dir.read_dir().unwrap().count() == 1);

    run(&["--cache-dir", flag_dir.to_str().unwrap()], Some(&env_dir));
    assert!(flag_dir.read_dir().unwrap().count() == 1);

    // a second run reads the cache and reports the same numbers
    let a = run(&[], Some(&env_dir));
    let b = run(&[], Some(&env_dir));
    assert_eq!(a.stdout, b.stdout);
}
