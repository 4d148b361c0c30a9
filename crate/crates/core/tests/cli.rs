use std::path::Path;
use std::process::{Command, Output};

fn anisotv(dir: &Path, args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_anisotv"));
    cmd.current_dir(dir).args(args);
    match threads {
        Some(t) => cmd.env("ANISOTV_THREADS", t),
        None => cmd.env_remove("ANISOTV_THREADS"),
    };
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn image(dir: &Path) {
    let rows: Vec<String> = (0..6)
        .map(|r| {
            (0..7)
                .map(|c| format!("{}", ((r * 7 + c) * 37 % 11) as f64 / 10.0))
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    std::fs::write(dir.join("im.csv"), rows.join("\n") + "\n").unwrap();
}

#[test]
fn denoise_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    image(dir.path());
    let o = anisotv(
        dir.path(),
        &["denoise", "--alpha", "0.2", "--out", "o", "im.csv"],
        None,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("o/im.denoised.json")).unwrap())
            .unwrap();
    assert!(json["relative_gap"].as_f64().unwrap() <= 1e-9);
    let csv = std::fs::read_to_string(dir.path().join("o/im.denoised.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn every_command_runs() {
    let dir = tempfile::tempdir().unwrap();
    image(dir.path());
    std::fs::write(dir.path().join("seg.csv"), "0,0\n1,-1\n-1,1\n").unwrap();
    std::fs::write(dir.path().join("sig.csv"), "0\n1\n1\n0\n3\n2\n2\n2\n").unwrap();
    for args in [
        &["audit", "--samples", "20", "im.csv"][..],
        &["refine-study", "--alpha", "0.1", "sig.csv"][..],
        &["cone-check", "--samples", "5", "seg.csv"][..],
    ] {
        let o = anisotv(dir.path(), args, Some("2"));
        assert_eq!(
            code(&o),
            0,
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(!o.stdout.is_empty());
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    image(dir.path());
    assert_eq!(
        code(&anisotv(dir.path(), &["denoise", "missing.csv"], None)),
        1
    );

    std::fs::write(dir.path().join("bad.cfg"), "alpha = 0.1\nbogus = 1\n").unwrap();
    let o = anisotv(
        dir.path(),
        &["denoise", "--config", "bad.cfg", "im.csv"],
        None,
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.cfg:2"));
    assert_eq!(
        code(&anisotv(
            dir.path(),
            &["denoise", "--alpha", "-1", "im.csv"],
            None
        )),
        2
    );
    assert_eq!(
        code(&anisotv(dir.path(), &["denoise", "im.csv"], Some("zero"))),
        2
    );
    assert_eq!(code(&anisotv(dir.path(), &["frobnicate"], None)), 2);

    let o = anisotv(
        dir.path(),
        &[
            "denoise",
            "--alpha",
            "5",
            "--tol",
            "1e-15",
            "--max-iter",
            "2",
            "--out",
            "nc",
            "im.csv",
        ],
        None,
    );
    assert_eq!(code(&o), 3);
    assert!(!dir.path().join("nc/im.denoised.csv").exists());

    std::fs::write(dir.path().join("tight.cfg"), "audit_tol = 0\n").unwrap();
    let o = anisotv(
        dir.path(),
        &[
            "audit",
            "--config",
            "tight.cfg",
            "--samples",
            "50",
            "--out",
            "a",
            "im.csv",
        ],
        None,
    );
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("a/im.audit.json")).unwrap())
            .unwrap();
    assert_eq!(report["pass"], false);

    std::fs::write(dir.path().join("g.graph"), "3 2\n1\n1\n1\n0 1 1\n1 2 1\n").unwrap();
    std::fs::write(dir.path().join("d.csv"), "1\n2\n").unwrap();
    let o = anisotv(
        dir.path(),
        &["denoise", "--datum", "d.csv", "g.graph"],
        None,
    );
    assert_eq!(code(&o), 5, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn reports_are_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    image(dir.path());
    let mut reports = Vec::new();
    for (out, threads) in [("r1", "1"), ("r2", "4"), ("r3", "4")] {
        let o = anisotv(
            dir.path(),
            &[
                "audit",
                "--seed",
                "9",
                "--samples",
                "40",
                "--out",
                out,
                "im.csv",
            ],
            Some(threads),
        );
        assert_eq!(code(&o), 0);
        reports.push((
            std::fs::read(dir.path().join(out).join("im.audit.json")).unwrap(),
            std::fs::read(dir.path().join(out).join("im.audit.csv")).unwrap(),
        ));
    }
    assert!(reports.windows(2).all(|w| w[0] == w[1]));
}
