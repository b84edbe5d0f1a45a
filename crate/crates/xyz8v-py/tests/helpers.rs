use xyz8v::report::Command;
use xyz8v_py::{matrix_rows, parse_command, run_json};

#[test]
fn commands_parse() {
    assert_eq!(parse_command("verify").unwrap(), Command::Verify);
    assert_eq!(parse_command("all").unwrap(), Command::All);
    assert!(parse_command("solve").is_err());
}

#[test]
fn matrix_rows_keep_layout() {
    let m = xyz8v::CMat::from_fn(2, 3, |i, j| xyz8v::c(i as f64, j as f64));
    let rows = matrix_rows(&m);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][2], xyz8v::c(1.0, 2.0));
}

#[test]
fn run_json_spectrum() {
    let (report, csv, bethe) = run_json("spectrum", r#"{"n": 2, "twist": [1, 1]}"#).unwrap();
    assert!(report.contains("\"command\": \"spectrum\""));
    assert!(report.contains("\"failed\": 0"));
    assert_eq!(csv.unwrap().lines().count(), 5);
    assert!(bethe.is_none());
}

#[test]
fn run_json_rejects_bad_config() {
    assert!(run_json("verify", r#"{"n": 0, "twist": [1, 0]}"#).is_err());
    assert!(run_json("verify", r#"{"n": 2, "twist": [2, 0]}"#).is_err());
}
