// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use edgesim::cli::{run, EXIT_INPUT, EXIT_OK, EXIT_USAGE, EXIT_VIOLATION};

fn kit(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../kit")
        .join(name)
        .display()
        .to_string()
}

fn edgesim(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(
        std::iter::once("edgesim").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn check_accepts_the_kit() {
    for f in [
        "fig1_pair.net",
        "adder4_conventional.net",
        "adder4_switchable.net",
    ] {
        let (code, _, err) = edgesim(&["check", &kit(f)]);
        assert_eq!(code, EXIT_OK, "{f}: {err}");
        assert!(err.is_empty());
    }
}

#[test]
fn check_reports_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "bad.net",
        "module bad\ninput a\noutput y\ngate AND y a nowhere\nend\n",
    );
    let (code, _, err) = edgesim(&["check", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("bad.net:4:"), "{err}");
    assert!(err.contains("undeclared-net"), "{err}");

    let p = write(
        dir.path(),
        "cyc.net",
        "module c\ninput a\noutput y\ngate XOR y y a\nend\n",
    );
    let (code, _, err) = edgesim(&["check", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("cycle"), "{err}");

    let (code, _, err) = edgesim(&["check", "/nonexistent/x.net"]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("/nonexistent/x.net"));
}

#[test]
fn sta_prints_t_min() {
    let (code, out, _) = edgesim(&[
        "sta",
        &kit("fig1_pair.net"),
        "--delays",
        &kit("default.json"),
        "--mode",
        "1",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("t_min = 960 ps"), "{out}");
    let (_, out, _) = edgesim(&[
        "sta",
        &kit("fig1_pair.net"),
        "--delays",
        &kit("default.json"),
        "--mode",
        "0",
    ]);
    assert!(out.contains("t_min = 480 ps"), "{out}");
}

#[test]
fn sta_report_is_json() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("sta.json");
    let (code, _, _) = edgesim(&[
        "sta",
        &kit("adder4_switchable.net"),
        "--delays",
        &kit("default.json"),
        "--mode",
        "1",
        "--report",
        rep.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(rep).unwrap()).unwrap();
    assert_eq!(v["t_min"], 500);
    assert_eq!(v["mode"], 1);
    assert!(v["paths"].as_array().unwrap().len() > 10);
}

#[test]
fn bench_both_modes_halves_latency() {
    let (code, out, err) = edgesim(&[
        "bench",
        "--width",
        "4",
        "--mode",
        "both",
        "--period",
        "2000",
        "--delays",
        &kit("default.json"),
        "--vectors",
        "exhaustive",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("latency ratio (M=1/M=0):        0.5"), "{out}");
    assert!(
        out.lines().filter(|l| l.ends_with("pass")).count() == 2,
        "{out}"
    );
}

#[test]
fn bench_on_a_netlist_file_and_vector_list() {
    let dir = tempfile::tempdir().unwrap();
    let v = write(dir.path(), "v.json", r#"[{"a":3,"b":4},{"a":15,"b":1}]"#);
    let rep = dir.path().join("r.json");
    let (code, out, err) = edgesim(&[
        "bench",
        &kit("adder4_conventional.net"),
        "--mode",
        "0",
        "--period",
        "1000",
        "--delays",
        &kit("default.json"),
        "--vectors",
        v.to_str().unwrap(),
        "--report",
        rep.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("latency 2 periods"), "{out}");
    let j: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(rep).unwrap()).unwrap();
    assert_eq!(j["correctness"], "pass");
    assert_eq!(j["latency_periods"], "2");
    assert_eq!(j["results"], 2);
}

#[test]
fn usage_errors() {
    let d = kit("default.json");
    let cases: &[&[&str]] = &[
        &[],
        &["frobnicate"],
        &["sta", "x.net", "--delays", &d, "--mode", "2"],
        &[
            "bench",
            "--width",
            "4",
            "--mode",
            "both",
            "--period",
            "2001",
            "--delays",
            &d,
            "--vectors",
            "exhaustive",
        ],
        &[
            "bench",
            "--width",
            "3",
            "--mode",
            "0",
            "--period",
            "2000",
            "--delays",
            &d,
            "--vectors",
            "exhaustive",
        ],
        &[
            "bench",
            "--width",
            "4",
            "--mode",
            "1",
            "--period",
            "300",
            "--delays",
            &d,
            "--vectors",
            "exhaustive",
        ],
        &[
            "bench",
            "--mode",
            "1",
            "--period",
            "300",
            "--delays",
            &d,
            "--vectors",
            "exhaustive",
        ],
    ];
    for args in cases {
        let (code, _, err) = edgesim(args);
        assert_eq!(code, EXIT_USAGE, "{args:?}: {err}");
        assert!(!err.is_empty());
    }
    let (code, out, _) = edgesim(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("bench"));
}

#[test]
fn bench_violation_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(
        dir.path(),
        "slowhold.json",
        r#"{"gates":{"XOR":20,"AND":15,"OR":15},"register":{"t_c2q":100,"t_setup":50,"t_hold":150}}"#,
    );
    let (code, _, err) = edgesim(&[
        "bench",
        "--width",
        "4",
        "--mode",
        "0",
        "--period",
        "2000",
        "--delays",
        m.to_str().unwrap(),
        "--vectors",
        "exhaustive",
    ]);
    assert_eq!(code, EXIT_VIOLATION, "{err}");
    assert!(err.contains("Hold"), "{err}");
}

#[test]
fn bad_delay_model_names_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(
        dir.path(),
        "m.json",
        r#"{"gates":{},"register":{"t_c2q":0,"t_setup":1,"t_hold":1}}"#,
    );
    let (code, _, err) = edgesim(&[
        "sta",
        &kit("fig1_pair.net"),
        "--delays",
        m.to_str().unwrap(),
        "--mode",
        "0",
    ]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("m.json"), "{err}");
    let m = write(dir.path(), "broken.json", "{\n\"gates\": ");
    let (code, _, err) = edgesim(&[
        "sta",
        &kit("fig1_pair.net"),
        "--delays",
        m.to_str().unwrap(),
        "--mode",
        "0",
    ]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("broken.json:2:"), "{err}");
}

#[test]
fn sim_writes_vcd_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let stim = write(
        dir.path(),
        "s.json",
        r#"{"clocks":[{"net":"clk","period":2000,"duty":0.5,"start_high":false}],
            "drives":[{"net":"M","time":0,"value":1},{"net":"en","time":0,"value":1},
                      {"net":"D","time":1030,"value":1}],
            "watch":["Q1","Q"]}"#,
    );
    let vcd = dir.path().join("w.vcd");
    let rep = dir.path().join("r.json");
    let (code, out, err) = edgesim(&[
        "sim",
        &kit("fig1_pair.net"),
        "--delays",
        &kit("default.json"),
        "--stimulus",
        stim.to_str().unwrap(),
        "--until",
        "8000",
        "--vcd",
        vcd.to_str().unwrap(),
        "--report",
        rep.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("0 violation(s)"), "{out}");
    let text = std::fs::read_to_string(vcd).unwrap();
    // Q1 at rise 3000 + c2q; Q at fall 4000 + XOR + c2q
    assert!(text.contains("#3100\n1!"), "{text}");
    assert!(text.contains("#4120\n1\""), "{text}");
    let j: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(rep).unwrap()).unwrap();
    assert_eq!(j["toggles"]["clk"], 8);
    assert_eq!(j["final_values"]["Q"], 1);

    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"drives":[{"net":"Q1","time":5,"value":1}]}"#,
    );
    let (code, _, err) = edgesim(&[
        "sim",
        &kit("fig1_pair.net"),
        "--delays",
        &kit("default.json"),
        "--stimulus",
        bad.to_str().unwrap(),
        "--until",
        "10",
    ]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("not a module input"), "{err}");
}
