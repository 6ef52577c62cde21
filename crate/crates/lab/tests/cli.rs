use std::path::Path;
use std::process::{Command, Output};

fn wavegauge(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavegauge"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawn wavegauge")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const FLAT: &str = r#"
command = "evolve"
[grid]
n = 10
extent = 4.0
[evolution]
t_final = 0.5
output_dt = 0.25
[data]
epsilon = 0.0
"#;

#[test]
fn flat_evolution_stays_flat() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "flat.toml", FLAT);
    let out = dir.path().join("out");
    let o = wavegauge(&["run", "--config", &cfg], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let text = std::fs::read_to_string(out.join("series.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("# wavegauge-csv/1 config_sha256="));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[0], "t");
    let mut rows = 0;
    for line in lines {
        rows += 1;
        for (name, cell) in header.iter().zip(line.split(',')).skip(1) {
            if cell.is_empty() || name.contains("ratio") {
                continue;
            }
            assert_eq!(cell.parse::<f64>().unwrap(), 0.0, "{name} in {line}");
        }
    }
    assert!(rows >= 2);
}

#[test]
fn reruns_are_bit_identical_and_hash_tagged() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "flat.toml",
        &format!("{FLAT}[output]\nsnapshot = true\n"),
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(wavegauge(&["run", "-c", &cfg], &a).status.success());
    assert!(wavegauge(&["run", "-c", &cfg], &b).status.success());

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    let hash = summary["config_sha256"].as_str().unwrap().to_string();
    assert_eq!(hash.len(), 64);
    for f in ["series.csv", "summary.json", "final.grid"] {
        let x = std::fs::read(a.join(f)).unwrap();
        assert_eq!(x, std::fs::read(b.join(f)).unwrap(), "{f}");
        assert!(String::from_utf8_lossy(&x).contains(&hash), "{f}");
    }
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");

    let cfg = write(
        dir.path(),
        "typo.toml",
        "command = \"evolve\"\n[grid]\nn = 8\nnn = 3\n",
    );
    let o = wavegauge(&["run", "--config", &cfg], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nn"));

    let cfg = write(
        dir.path(),
        "cfl.toml",
        "command = \"evolve\"\n[evolution]\ncfl = 0.9\n",
    );
    let o = wavegauge(&["run", "--config", &cfg], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("CFL"));

    let o = wavegauge(&["recipe", "no-such-recipe"], &out);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn classify_reports_blow_up_for_dt_squared() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "dt2.sys",
        "unknowns phi\nterm phi 1.0 phi 0 phi 0\n",
    );
    let cfg = write(
        dir.path(),
        "classify.toml",
        "command = \"classify\"\n[asymptotic]\nsystem = \"dt2.sys\"\nepsilons = [0.05, 0.1]\nl_max = 200.0\nnq = 51\n",
    );
    let out = dir.path().join("out");
    let o = wavegauge(&["run", "--config", &cfg], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["verdict"], "blow-up");
    assert!(out.join("blowup.csv").exists());
}

#[test]
fn oracle_compare_writes_convergence_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "oracle.toml",
        "command = \"oracle-compare\"\n[grid]\nn = 8\nextent = 6.0\n[evolution]\nmode = \"linear\"\nt_final = 0.5\n[oracle]\nn_polar = 16\n",
    );
    let out = dir.path().join("out");
    let o = wavegauge(&["run", "--config", &cfg], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert_eq!(text.lines().count(), 2 + 3);
}

#[test]
fn recipe_emits_loadable_configs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("zoo");
    let o = wavegauge(&["recipe", "weak-null-zoo"], &out);
    assert!(o.status.success());
    let listed = String::from_utf8(o.stdout).unwrap();
    assert_eq!(listed.lines().count(), 6);
    assert!(out.join("zoo-dt-squared.toml").exists());
    assert!(out.join("dt_squared.sys").exists());
}
