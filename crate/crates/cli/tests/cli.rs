//! End-to-end checks of the binary: determinism, config solving, failures.

use std::fs;
use std::process::Command;

fn vbqc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vbqc"))
}

#[test]
fn identical_invocations_write_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    for out in [&out1, &out2] {
        let status = vbqc()
            .args([
                "verify",
                "--n",
                "6",
                "--nt",
                "2",
                "--adversary",
                "single_x",
                "--trials",
                "2000",
                "--seed",
                "7",
                "--out",
            ])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = fs::read(out1.join("stats.json")).unwrap();
    let b = fs::read(out2.join("stats.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn missing_pprime_is_solved_and_echoed() {
    let output = vbqc()
        .args([
            "compose", "--n", "6", "--nd", "3", "--p", "0.45", "--trials", "50", "--seed", "2",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let pp = doc["config_echo"]["p_prime"].as_f64().unwrap();
    let relation = 1.0 - 4.0 * 0.45 * 0.45 * (1.0 - pp);
    assert!((relation - 0.5).abs() < 1e-9);
    assert!((doc["metrics"]["p_prime_solved"].as_f64().unwrap() - pp).abs() < 1e-12);
}

#[test]
fn gadget_matches_the_parameter_relation() {
    let output = vbqc()
        .args([
            "gadget", "--p", "0.25", "--pprime", "0.5", "--trials", "30000", "--seed", "11",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&String::from_utf8(output.stdout).unwrap()).unwrap();
    let z = doc["metrics"]["pr_z_given_accept"]["estimate"].as_f64().unwrap();
    assert!((z - 0.875).abs() < 0.02, "Pr[Z|accept] = {z}");
}

#[test]
fn invalid_config_exits_nonzero_with_message() {
    let output = vbqc()
        .args([
            "compose", "--n", "6", "--nd", "3", "--p", "0.25", "--pprime", "0.5", "--trials",
            "10",
        ])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let err = String::from_utf8(output.stderr).unwrap();
    assert!(err.contains("error"), "stderr: {err}");
}

#[test]
fn transcripts_separate_client_and_server_views() {
    let dir = tempfile::tempdir().unwrap();
    let status = vbqc()
        .args([
            "gadget", "--p", "0.25", "--pprime", "0.5", "--trials", "200", "--seed", "5",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let alice = fs::read_to_string(dir.path().join("alice.jsonl")).unwrap();
    let bob = fs::read_to_string(dir.path().join("bob.jsonl")).unwrap();
    assert_eq!(alice.lines().count(), 200);
    assert_eq!(bob.lines().count(), 200);
    // the server view must not carry the secrets
    let first_bob: serde_json::Value = serde_json::from_str(bob.lines().next().unwrap()).unwrap();
    assert!(first_bob.get("c").is_none() && first_bob.get("a").is_none());
    let first_alice: serde_json::Value =
        serde_json::from_str(alice.lines().next().unwrap()).unwrap();
    assert!(first_alice.get("c").is_some() && first_alice.get("label").is_some());
}
