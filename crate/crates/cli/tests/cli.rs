// SPDX-License-Identifier: Apache-2.0

use std::process::{Command, Output};

use hamming_cutoff::profile::{Profile, CSV_HEADER};

fn hcutoff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcutoff"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn profile_csv_rows() {
    let o = hcutoff(&["profile", "--n", "2", "--q", "3", "--k-max", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let row2: Vec<&str> = lines.nth(2).unwrap().split(',').collect();
    assert_eq!(row2[0], "2");
    assert_eq!(row2[2], "0.19444444444444445");
    assert!(!text.contains('\r'));

    let o = hcutoff(&["profile", "--n", "1", "--q", "3", "--k-max", "1"]);
    let text = stdout(&o);
    let row0: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row0[2], "0.66666666666666663");
}

#[test]
fn profile_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    let o = hcutoff(&[
        "profile",
        "--n",
        "6",
        "--q",
        "4",
        "--k-max",
        "30",
        "--k-step",
        "3",
        "--b",
        "1",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let parsed: Profile = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed.rows.len(), 11);
    assert_eq!(serde_json::to_string_pretty(&parsed).unwrap() + "\n", text);
    let again: Profile = serde_json::from_str(&serde_json::to_string(&parsed).unwrap()).unwrap();
    assert_eq!(again, parsed);
}

#[test]
fn profile_errors() {
    let o = hcutoff(&["profile", "--n", "0", "--q", "3", "--k-max", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = hcutoff(&[
        "profile", "--n", "3", "--q", "3", "--k-min", "5", "--k-max", "3",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = hcutoff(&["profile", "--q", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = hcutoff(&[
        "profile",
        "--n",
        "60",
        "--q",
        "7",
        "--k-max",
        "5000",
        "--backend",
        "exact",
        "--bit-cap",
        "20000",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_suites() {
    let o = hcutoff(&[
        "verify", "upper", "--n-max", "10", "--q", "3", "--k-max", "50",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("failures=0"));

    let o = hcutoff(&["verify", "majorant", "--q", "2"]);
    assert_eq!(o.status.code(), Some(2));

    let o = hcutoff(&[
        "verify", "majorant", "--n-max", "12", "--q", "3,5", "--c", "1,2.5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("n,q,k,c,tv_exact,bound,satisfied,vacuous,which\n"));
    assert!(text.contains(",thm-q5\n"));

    let o = hcutoff(&[
        "verify",
        "lemmas",
        "--exp-points",
        "2000",
        "--ratio-m-max",
        "30",
        "--identity-n-max",
        "8",
        "--expectation-n-max",
        "5",
        "--expectation-k-max",
        "10",
        "--variance-n-max",
        "8",
        "--variance-k-max",
        "30",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn verify_minorant_reports_threshold() {
    let o = hcutoff(&[
        "verify", "minorant", "--c", "1", "--c0", "1", "--n-min", "2", "--n-max", "300",
        "--n-step", "7",
    ]);
    let err = String::from_utf8(o.stderr.clone()).unwrap();
    assert!(err.contains("n_star="), "{err}");
    assert!(stdout(&o).starts_with("n,k,tv_exact,bound"));
}

#[test]
fn simulate_output() {
    let o = hcutoff(&[
        "simulate", "--n", "2", "--q", "3", "--k", "1", "--walks", "1000",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("l,count,estimate,stderr,exact"));
    assert_eq!(text.lines().nth(2), Some("1,1000,1,0,1"));

    let o = hcutoff(&[
        "simulate", "--n", "40", "--q", "3", "--k", "5", "--walks", "10",
    ]);
    assert!(stdout(&o).lines().nth(1).unwrap().ends_with(','));

    let o = hcutoff(&[
        "simulate",
        "--n",
        "3",
        "--q",
        "3",
        "--k",
        "1000",
        "--walks",
        "1000",
        "--step-cap",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (path, streams) in [(&a, "1"), (&b, "3")] {
        let o = hcutoff(&[
            "simulate",
            "--n",
            "9",
            "--q",
            "5",
            "--k",
            "25",
            "--walks",
            "30000",
            "--seed",
            "11",
            "--streams",
            streams,
            "--format",
            "json",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let v: serde_json::Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(v["counts"].as_array().unwrap().len(), 10);
    assert!(v["exact"].is_array());
}

#[test]
fn table_dump() {
    let o = hcutoff(&["table", "--n", "2", "--q", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("j,l,value\n"));
    assert!(text.contains("\n1,2,-0.5\n"));
}
