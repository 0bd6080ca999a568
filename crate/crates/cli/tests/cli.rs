use std::fs;
use std::path::Path;

use obs_cli::run;

fn obs(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("obs").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn simulate(dir: &Path, seed: &str) {
    let (code, out, err) = obs(&[
        "simulate",
        "--scenario",
        "pn",
        "--seed",
        seed,
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("1326 presses stored"), "{out}");
}

#[test]
fn usage_errors_exit_1() {
    for args in [
        vec!["frobnicate"],
        vec!["report"],
        vec!["simulate", "--scenario", "other", "--out", "x"],
        vec!["decode"],
        vec!["decode", "--data", "a", "--input", "b"],
        vec!["report", "compare", "--a", "1:2"],
        vec!["simulate", "--out", "x", "--drop-probability", "1.0"],
    ] {
        let (code, out, err) = obs(&args);
        assert_eq!(code, 1, "{args:?}: {out}{err}");
        assert!(!err.is_empty());
    }
    let (code, out, _) = obs(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("simulate"));
}

#[test]
fn data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing");
    let (code, _, err) = obs(&["report", "hourly", "--data", missing.to_str().unwrap()]);
    assert_eq!(code, 2, "{err}");
    let bad = dir.path().join("bad.csv");
    fs::write(
        &bad,
        "device_id,seq,boot_id,t_utc_ms,quality\nd,x,0,0,anchored\n",
    )
    .unwrap();
    let (code, _, err) = obs(&["decode", "--input", bad.to_str().unwrap()]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn decode_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.csv");
    let output = dir.path().join("obs.csv");
    fs::write(&input, "").unwrap();
    let (code, _, err) = obs(&[
        "decode",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(
        fs::read_to_string(&output).unwrap(),
        "t_utc_ms,local_date,local_time,press_count,irregular\n"
    );
}

#[test]
fn decode_press_files() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("p.csv");
    fs::write(
        &input,
        "device_id,seq,boot_id,t_utc_ms,quality\nd,0,0,1000,anchored\nd,1,0,1400,anchored\nd,2,0,9000,receipt\n",
    )
    .unwrap();
    let (code, out, _) = obs(&[
        "decode",
        "--input",
        input.to_str().unwrap(),
        "--utc-offset",
        "60",
    ]);
    assert_eq!(code, 0);
    assert_eq!(
        out.lines().nth(1).unwrap(),
        "1000,1970-01-01,01:00:01,2,false"
    );
    let (_, out, _) = obs(&[
        "decode",
        "--input",
        input.to_str().unwrap(),
        "--burst-gap-ms",
        "10000",
    ]);
    assert_eq!(
        out.lines().nth(1).unwrap(),
        "1000,1970-01-01,00:00:01,3,true"
    );
}

#[test]
fn compare_on_the_case() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "42");
    let data = dir.path().to_str().unwrap();
    let (code, out, err) = obs(&[
        "report", "compare", "--data", data, "--a", "15:42", "--b", "43:72",
    ]);
    assert_eq!(code, 0, "{err}");
    let ratio: f64 = out
        .lines()
        .last()
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(ratio > 1.0 && ratio <= 1.5, "{ratio}");
    let (code, _, _) = obs(&[
        "report", "compare", "--data", data, "--a", "8:14", "--b", "43:72",
    ]);
    assert_eq!(code, 1);
}

#[test]
fn ranges_narrow_reports() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "42");
    let data = dir.path().to_str().unwrap();
    let (_, out, _) = obs(&[
        "report",
        "daily",
        "--data",
        data,
        "--from",
        "2016-02-15",
        "--to",
        "2016-02-21",
    ]);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 7);
    assert!(rows[0].starts_with("1,2016-02-15,"));
    let (_, out, _) = obs(&["report", "hourly", "--data", data, "--utc-offset", "0"]);
    assert!(out.lines().nth(1).unwrap().starts_with("0,3,"), "{out}");
    let (code, _, _) = obs(&["report", "daily", "--data", data, "--from", "2020-01-01"]);
    assert_eq!(code, 1);
    let (code, _, _) = obs(&["report", "daily", "--data", data, "--from", "yesterday"]);
    assert_eq!(code, 1);
}

#[test]
fn export_import_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src");
    simulate(&src, "5");
    let s = src.to_str().unwrap();
    let presses = dir.path().join("presses.jsonl");
    let notes = dir.path().join("notes.jsonl");
    assert_eq!(
        obs(&[
            "export",
            "presses",
            "--data",
            s,
            "--format",
            "jsonl",
            "--output",
            presses.to_str().unwrap()
        ])
        .0,
        0
    );
    assert_eq!(
        obs(&[
            "export",
            "annotations",
            "--data",
            s,
            "--output",
            notes.to_str().unwrap()
        ])
        .0,
        0
    );

    let dst = dir.path().join("dst");
    let d = dst.to_str().unwrap();
    let (code, _, err) = obs(&[
        "import",
        "presses",
        "--data",
        d,
        "--input",
        presses.to_str().unwrap(),
    ]);
    assert_eq!(code, 1, "needs a calendar first: {err}");
    let args = [
        "--start-date",
        "2016-02-01",
        "--days",
        "100",
        "--utc-offset",
        "60",
    ];
    let mut cmd = vec![
        "import",
        "presses",
        "--data",
        d,
        "--input",
        presses.to_str().unwrap(),
    ];
    cmd.extend(args);
    let (code, out, _) = obs(&cmd);
    assert_eq!((code, out.trim()), (0, "imported 1326 new presses"));
    let (_, out, _) = obs(&cmd);
    assert_eq!(out.trim(), "imported 0 new presses");
    assert_eq!(
        obs(&[
            "import",
            "annotations",
            "--data",
            d,
            "--input",
            notes.to_str().unwrap()
        ])
        .0,
        0
    );
    let (code, _, err) = obs(&[
        "import",
        "annotations",
        "--data",
        d,
        "--input",
        notes.to_str().unwrap(),
    ]);
    assert_eq!(code, 2, "second gap must clash: {err}");

    for what in ["presses", "observations"] {
        let a = obs(&["export", what, "--data", s]).1;
        let b = obs(&["export", what, "--data", d]).1;
        assert_eq!(a, b, "{what}");
    }
    assert_eq!(
        obs(&["report", "weekday", "--data", s]).1,
        obs(&["report", "weekday", "--data", d]).1
    );
    assert_eq!(
        obs(&["export", "annotations", "--data", s, "--format", "csv"]).0,
        1
    );
}

#[test]
fn report_from_observation_file() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "42");
    let data = dir.path().to_str().unwrap();
    let obs_file = dir.path().join("observations.csv");
    assert_eq!(
        obs(&[
            "decode",
            "--data",
            data,
            "--output",
            obs_file.to_str().unwrap()
        ])
        .0,
        0
    );
    let direct = obs(&["report", "hourly", "--data", data]).1;
    let via_file = obs(&[
        "report",
        "hourly",
        "--data",
        data,
        "--observations",
        obs_file.to_str().unwrap(),
    ])
    .1;
    assert_eq!(direct, via_file);
}
