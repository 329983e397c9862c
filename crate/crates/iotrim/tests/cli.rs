//! End-to-end runs of the `iotrim` binary: flags, exit codes, output
//! formats, and ledger round-trips.

use std::process::{Command, Output};

fn iotrim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iotrim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn sweep_prints_the_duration_table() {
    let out = iotrim(&["sweep", "--device", "tplink-bulb", "--scale", "0"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.matches('\n').count(), 11); // header + rule + 8 rows + min line
    for line in text.lines().skip(2).take(8) {
        assert!(line.trim_end().ends_with('5'), "{line:?}");
    }
    assert!(text.contains("minimum off duration for the full query set: 2s"));
}

#[test]
fn sweep_json_is_machine_readable() {
    let out = iotrim(&["sweep", "--device", "yi-cam", "--scale", "0", "--json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["device"], "yi-cam");
    assert_eq!(doc["counts"].as_array().unwrap().len(), 8);
    assert!(doc["counts"].as_array().unwrap().iter().all(|pair| pair[1] == 2));
}

#[test]
fn sweep_unknown_device_is_usage_error() {
    let out = iotrim(&["sweep", "--device", "toaster", "--scale", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown device"));
}

#[test]
fn trim_without_devices_is_usage_error() {
    let out = iotrim(&["trim", "--scale", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--all"));
}

#[test]
fn trim_single_device_writes_ledger_and_report_rereads_it() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = iotrim(&[
        "trim",
        "--device",
        "yi-cam",
        "--scale",
        "0",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    // The camera's verdict rows.
    assert!(text.contains("LAN watch"), "{text}");
    assert!(text.contains("log.us.xiaoyi.com"));
    assert!(text.contains("2 destinations, 1 blockable"));

    // Ledger files exist in the documented layout.
    let epoch = out_dir.join("ledger").join("epoch-0");
    for name in ["yi-cam.experiments.jsonl", "yi-cam.flows.jsonl", "yi-cam.classification.json"] {
        assert!(epoch.join(name).exists(), "missing {name}");
    }
    assert!(out_dir.join("reports").join("epoch-0").join("traffic.txt").exists());
    assert!(out_dir.join("alerts.log").exists());

    // Reports re-render from the ledger without re-running, byte-identical.
    let report = |kind: &str| {
        let out = iotrim(&["report", "--kind", kind, "--ledger", out_dir.to_str().unwrap()]);
        assert!(out.status.success(), "{kind}: {}", stderr(&out));
        stdout(&out)
    };
    let traffic_a = report("traffic");
    assert!(traffic_a.contains("log.us.xiaoyi.com"));
    assert!(traffic_a.contains("2.80"));
    assert_eq!(traffic_a, report("traffic"));
    assert!(report("destinations").contains("Yi Camera"));
    assert!(report("blockable").contains("✓"));
    assert!(report("generalize").contains("SECOND_LEVEL"));

    // Diff needs two epochs.
    let out = iotrim(&["report", "--kind", "diff", "--ledger", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("need two epochs"));
}

#[test]
fn trim_epochs_diff_is_empty_for_identical_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = iotrim(&[
        "trim",
        "--device",
        "yi-cam",
        "--scale",
        "0",
        "--epochs",
        "2",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("no differences"), "{}", stdout(&out));

    let out = iotrim(&["report", "--kind", "diff", "--ledger", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("no differences"));
}

#[test]
fn trim_is_reproducible_for_a_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = iotrim(&[
            "trim",
            "--device",
            "bosiwo-cam",
            "--scale",
            "0",
            "--seed",
            "9",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        let epoch = out_dir.join("ledger").join("epoch-0");
        (
            std::fs::read_to_string(epoch.join("bosiwo-cam.experiments.jsonl")).unwrap(),
            std::fs::read_to_string(epoch.join("bosiwo-cam.flows.jsonl")).unwrap(),
            std::fs::read_to_string(epoch.join("bosiwo-cam.classification.json")).unwrap(),
        )
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn corrupt_classification_reports_parse_location() {
    let dir = tempfile::tempdir().unwrap();
    let epoch = dir.path().join("out").join("ledger").join("epoch-0");
    std::fs::create_dir_all(&epoch).unwrap();
    std::fs::write(epoch.join("x.classification.json"), "{\n  \"device\": \"x\",\n  broken\n}\n")
        .unwrap();
    let out = iotrim(&[
        "report",
        "--kind",
        "traffic",
        "--ledger",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn config_file_paths_are_validated_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("lab.json");
    std::fs::write(&config, r#"{ "devices": ["missing-device.json"] }"#).unwrap();
    let out = iotrim(&["--config", config.to_str().unwrap(), "sweep", "--device", "x"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("missing-device.json"));
}

#[test]
fn dns_admin_round_trip_over_files_and_wire() {
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("rules.json");
    let add = iotrim(&[
        "dns",
        "block",
        "--rules",
        rules.to_str().unwrap(),
        "--name",
        "ntp.org",
        "--device",
        "tplink-bulb",
    ]);
    assert!(add.status.success(), "{}", stderr(&add));

    // The blocked device resolves to loopback, others see the zone.
    let resolve = |device: Option<&str>| {
        let mut args = vec![
            "dns",
            "resolve",
            "--rules",
            rules.to_str().unwrap(),
            "--name",
            "ntp.org",
        ];
        if let Some(d) = device {
            args.extend(["--device", d]);
        }
        let out = iotrim(&args);
        assert!(out.status.success(), "{}", stderr(&out));
        stdout(&out)
    };
    assert!(resolve(Some("tplink-bulb")).contains("127.0.0.1 (override, ttl 0)"));
    assert!(resolve(Some("yi-cam")).contains("162.159.200."));

    // Unblock restores zone answers; removing again is a usage error.
    let un = iotrim(&[
        "dns", "unblock", "--rules", rules.to_str().unwrap(), "--name", "ntp.org",
        "--device", "tplink-bulb",
    ]);
    assert!(un.status.success());
    assert!(resolve(Some("tplink-bulb")).contains("162.159.200."));
    let un = iotrim(&[
        "dns", "unblock", "--rules", rules.to_str().unwrap(), "--name", "ntp.org",
        "--device", "tplink-bulb",
    ]);
    assert_eq!(un.status.code(), Some(1));
}

#[test]
fn dns_serve_answers_real_datagrams() {
    use std::net::UdpSocket;
    // Pick a free port by binding and releasing it.
    let probe = UdpSocket::bind("127.0.0.1:0").unwrap();
    let port = probe.local_addr().unwrap().port();
    drop(probe);

    let mut child = Command::new(env!("CARGO_BIN_EXE_iotrim"))
        .args(["dns", "serve", "--dns-port", &port.to_string()])
        .stderr(std::process::Stdio::piped())
        .spawn()
        .unwrap();

    let client = UdpSocket::bind("127.0.0.1:0").unwrap();
    client.set_read_timeout(Some(std::time::Duration::from_millis(250))).unwrap();
    let query = iotrim_lib_query(7, "vimtag.com");
    let mut answer = None;
    for _ in 0..40 {
        client.send_to(&query, ("127.0.0.1", port)).unwrap();
        let mut buf = [0u8; 512];
        if let Ok((len, _)) = client.recv_from(&mut buf) {
            answer = Some(buf[..len].to_vec());
            break;
        }
    }
    child.kill().unwrap();
    let _ = child.wait();
    let answer = answer.expect("server answered within the retry budget");
    let msg = iotrim::dnsctl::wire::Message::decode(&answer).unwrap();
    assert_eq!(msg.id, 7);
    assert_eq!(
        msg.answers[0].rdata,
        iotrim::dnsctl::wire::RData::A("120.24.115.9".parse().unwrap())
    );
}

fn iotrim_lib_query(id: u16, name: &str) -> Vec<u8> {
    iotrim::dnsctl::wire::Message::a_query(id, name).encode().unwrap()
}
