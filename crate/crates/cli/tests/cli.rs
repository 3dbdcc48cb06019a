use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn ifsnet(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ifsnet"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn cantor() -> String {
    fixture("cantor.ifs").to_string_lossy().into_owned()
}

#[test]
fn validate_accepts_the_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["cantor.ifs", "sierpinski.ifs", "koch.ifs"] {
        let path = fixture(name);
        let o = ifsnet(dir.path(), &["validate", path.to_str().unwrap()]);
        assert!(
            o.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let o = ifsnet(dir.path(), &["validate", &cantor()]);
    let text = stdout(&o);
    assert!(text.contains("mode: compact, J=2, d=1"), "{text}");
    assert!(text.contains("inverse bounds: [3, 2]"), "{text}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = ifsnet(dir.path(), &["validate", "missing.ifs"]);
    assert_eq!(missing.status.code(), Some(1));

    // the two images [0, 1/2] and [1/4, 3/4] overlap
    let overlapping = dir.path().join("overlap.ifs");
    let text = std::fs::read_to_string(fixture("cantor.ifs"))
        .unwrap()
        .replace("0.3333333333333333", "0.5")
        .replace("0.6666666666666666", "0.25");
    std::fs::write(&overlapping, text).unwrap();
    let o = ifsnet(dir.path(), &["validate", overlapping.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = ifsnet(
        dir.path(),
        &["build", overlapping.to_str().unwrap(), "-k", "2"],
    );
    assert_eq!(o.status.code(), Some(2));

    let bad_flag = ifsnet(
        dir.path(),
        &["build", &cantor(), "-k", "2", "--delta", "0.1"],
    );
    assert_eq!(bad_flag.status.code(), Some(1));
    let no_k = ifsnet(dir.path(), &["build", &cantor()]);
    assert_eq!(no_k.status.code(), Some(1));
}

#[test]
fn literal_build_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = ifsnet(dir.path(), &["build", &cantor(), "-k", "3", "--literal"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("(width 10, depth 12, params 500)"), "{text}");
    assert!(text.contains("W0=10 L0=4"), "{text}");
    assert!(text.contains("0 mismatches"), "{text}");
    assert!(dir.path().join("cantor.k3.json").exists());
    let report = std::fs::read_to_string(dir.path().join("cantor.k3.report.json")).unwrap();
    assert!(report.starts_with("{\"W0\":10,\"L0\":4,"), "{report}");
}

fn cell_params(dir: &Path, k: &str) -> String {
    let out = format!("c{k}.json");
    let o = ifsnet(
        dir,
        &["build", &cantor(), "-k", k, "--recurrent", "-o", &out],
    );
    assert!(o.status.success());
    let text = stdout(&o);
    let line = text.lines().next().unwrap();
    line.split("width ")
        .nth(1)
        .unwrap()
        .split(';')
        .next()
        .unwrap()
        .to_string()
}

#[test]
fn recurrent_cell_does_not_grow_with_k() {
    let dir = tempfile::tempdir().unwrap();
    let five = cell_params(dir.path(), "5");
    assert_eq!(five, "10, 175 params");
    assert_eq!(five, cell_params(dir.path(), "9"));

    let o = ifsnet(
        dir.path(),
        &["eval", "c5.json", "--recurrent", "-k", "5", "--x", "0.25"],
    );
    let v: f64 = stdout(&o).trim().parse().unwrap();
    // 1/4 = 0.0202…₃ sits 1/12 from the edge of its level-5 interval
    assert!((v - 1.0 / 12.0).abs() < 1e-9, "{v}");
}

#[test]
fn eval_prints_one_line_per_point() {
    let dir = tempfile::tempdir().unwrap();
    assert!(ifsnet(dir.path(), &["build", &cantor(), "-k", "2"])
        .status
        .success());
    let o = ifsnet(
        dir.path(),
        &[
            "eval",
            "cantor.k2.json",
            "--x",
            "0.25",
            "--x",
            "0.5",
            "--x",
            "-0.1",
        ],
    );
    assert!(o.status.success());
    let vals: Vec<f64> = stdout(&o).lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(vals.len(), 3);
    assert!((vals[0] - 1.0 / 12.0).abs() < 1e-9);
    assert!(vals[1] < 0.0 && vals[2] < 0.0);
    let wrong_dim = ifsnet(dir.path(), &["eval", "cantor.k2.json", "--x", "0.1,0.2"]);
    assert_eq!(wrong_dim.status.code(), Some(1));
}

#[test]
fn oracle_rasters_match_the_goldens() {
    let dir = tempfile::tempdir().unwrap();
    let s = fixture("sierpinski.ifs");
    let args = [
        "raster",
        s.to_str().unwrap(),
        "-k",
        "0..4",
        "--res",
        "64x56",
        "--source",
        "oracle",
        "-o",
        "s",
    ];
    assert!(ifsnet(dir.path(), &args).status.success());
    for k in 0..=4 {
        let got = std::fs::read(dir.path().join(format!("s.k{k}.oracle.pbm"))).unwrap();
        let want = std::fs::read(fixture(&format!("golden/sierpinski.k{k}.oracle.pbm"))).unwrap();
        assert_eq!(got, want, "k = {k}");
    }
}

#[test]
fn outputs_do_not_depend_on_the_thread_count() {
    let s = fixture("sierpinski.ifs");
    let mut seen = Vec::new();
    for threads in ["1", "4"] {
        let dir = tempfile::tempdir().unwrap();
        let raster = [
            "--threads",
            threads,
            "raster",
            s.to_str().unwrap(),
            "-k",
            "3",
            "--res",
            "48x40",
            "--compare",
            "-o",
            "s",
        ];
        assert!(ifsnet(dir.path(), &raster).status.success());
        let build = [
            "--threads",
            threads,
            "build",
            s.to_str().unwrap(),
            "-k",
            "2",
            "--delta",
            "0.01",
        ];
        let o = ifsnet(dir.path(), &build);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let files: Vec<Vec<u8>> = [
            "s.k3.net.pgm",
            "s.k3.oracle.pbm",
            "s.k3.compare.json",
            "sierpinski.k2.json",
        ]
        .iter()
        .map(|f| std::fs::read(dir.path().join(f)).unwrap())
        .collect();
        seen.push((files, stdout(&o)));
    }
    assert_eq!(seen[0], seen[1]);
}
