use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn qcrit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcrit")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn data_rows(table: &str) -> Vec<Vec<String>> {
    table
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split('\t').map(String::from).collect())
        .collect()
}

const ISING: &str = r#"
model = "ising_ed"
observables = ["fq_optimal", "gap"]
sizes = [6, 8]

[fixed]
alpha = 1.5

[[axes]]
name = "theta"
min = 0.2
max = 1.4
count = 4
"#;

fn sweep(config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["sweep", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    qcrit(&args)
}

#[test]
fn tables_do_not_depend_on_job_count() {
    let dir = TempDir::new().unwrap();
    let config = write(dir.path(), "ising.toml", ISING);
    let (one, two) = (dir.path().join("one"), dir.path().join("two"));
    assert_eq!(code(&sweep(&config, &one, &["--jobs", "1", "--no-cache"])), 0);
    assert_eq!(code(&sweep(&config, &two, &["--jobs", "2", "--no-cache"])), 0);
    for name in ["fq_optimal.tsv", "gap.tsv"] {
        let a = fs::read(one.join(name)).unwrap();
        assert_eq!(a, fs::read(two.join(name)).unwrap(), "{name} differs");
    }
    let rows = data_rows(&fs::read_to_string(one.join("gap.tsv")).unwrap());
    assert_eq!(rows.len(), 8);
    assert_eq!((rows[0][1].as_str(), rows[1][1].as_str()), ("6", "8"));
}

#[test]
fn cached_rerun_reuses_every_spectrum() {
    let dir = TempDir::new().unwrap();
    let config = write(dir.path(), "ising.toml", ISING);
    let out = dir.path().join("out");
    assert_eq!(code(&sweep(&config, &out, &[])), 0);
    let first = fs::read(out.join("fq_optimal.tsv")).unwrap();
    assert_eq!(manifest(&out)["cache_hits"], 0);

    assert_eq!(code(&sweep(&config, &out, &[])), 0);
    let m = manifest(&out);
    assert_eq!(m["cache_hits"], 8);
    assert_eq!(m["state"], "complete");
    assert_eq!(fs::read(out.join("fq_optimal.tsv")).unwrap(), first);
}

#[test]
fn deleting_the_manifest_forces_recomputation() {
    let dir = TempDir::new().unwrap();
    let config = write(dir.path(), "ising.toml", ISING);
    let out = dir.path().join("out");
    assert_eq!(code(&sweep(&config, &out, &[])), 0);
    let first = fs::read(out.join("gap.tsv")).unwrap();
    fs::remove_file(out.join("manifest.json")).unwrap();
    assert_eq!(code(&sweep(&config, &out, &[])), 0);
    assert_eq!(manifest(&out)["cache_hits"], 0);
    assert_eq!(fs::read(out.join("gap.tsv")).unwrap(), first);
}

#[test]
fn tampered_cache_entries_are_recomputed() {
    let dir = TempDir::new().unwrap();
    let config = write(dir.path(), "ising.toml", ISING);
    let out = dir.path().join("out");
    assert_eq!(code(&sweep(&config, &out, &[])), 0);
    let first = fs::read(out.join("fq_optimal.tsv")).unwrap();
    for entry in fs::read_dir(out.join("cache")).unwrap() {
        let path = entry.unwrap().path();
        let mut bytes = fs::read(&path).unwrap();
        let last = bytes.len() - 1;
        bytes[last] ^= 1;
        fs::write(&path, bytes).unwrap();
    }
    assert_eq!(code(&sweep(&config, &out, &[])), 0);
    assert_eq!(manifest(&out)["cache_hits"], 0);
    assert_eq!(fs::read(out.join("fq_optimal.tsv")).unwrap(), first);
}

#[test]
fn manifest_records_the_run() {
    let dir = TempDir::new().unwrap();
    let config = write(dir.path(), "ising.toml", ISING);
    let out = dir.path().join("out");
    assert_eq!(code(&sweep(&config, &out, &["--no-cache"])), 0);
    let m = manifest(&out);
    assert_eq!(m["config"], ISING);
    assert_eq!(m["model"], "ising_ed");
    assert_eq!(m["cache_enabled"], false);
    assert_eq!(m["points"].as_array().unwrap().len(), 8);
    assert!(m["points"].as_array().unwrap().iter().all(|p| p["status"] == "ok"));
    assert!(m["tables"]["gap.tsv"].as_str().unwrap().len() == 64);
    assert!(!out.join("cache").exists());
}

#[test]
fn config_errors_name_line_and_field() {
    let dir = TempDir::new().unwrap();
    let text = ISING.replace("count = 4", "count = 4\nspacing = \"log\"").replace("min = 0.2", "min = -0.2");
    let config = write(dir.path(), "bad.toml", &text);
    let out = sweep(&config, &dir.path().join("out"), &[]);
    assert_eq!(code(&out), 1);
    let err = stderr(&out);
    assert!(err.contains("bad.toml:9: axes[0]:"), "{err}");
    assert!(err.contains("log"), "{err}");

    let config = write(dir.path(), "typo.toml", &ISING.replace("\"gap\"", "\"gapp\""));
    let err = stderr(&sweep(&config, &dir.path().join("out"), &[]));
    assert!(err.contains("typo.toml:3: observables[1]: unknown observable 'gapp'"), "{err}");
    assert!(err.contains("fq_optimal, fq_x"), "{err}");

    let config = write(dir.path(), "size.toml", &ISING.replace("[6, 8]", "[6, 40]"));
    let out = sweep(&config, &dir.path().join("out"), &[]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("size.toml:4: sizes[1]:"), "{}", stderr(&out));

    let missing = qcrit(&["sweep", dir.path().join("absent.toml").to_str().unwrap()]);
    assert_eq!(code(&missing), 1);
}

#[test]
fn single_point_axis_gives_one_row() {
    let dir = TempDir::new().unwrap();
    let config = write(
        dir.path(),
        "one.toml",
        "model = \"kitaev\"\nobservables = [\"fq_nonlocal\"]\nsizes = [32]\n\n[[axes]]\nname = \"mu\"\nmin = 0.5\nmax = 0.5\ncount = 1\n",
    );
    let out = dir.path().join("out");
    assert_eq!(code(&sweep(&config, &out, &[])), 0);
    let rows = data_rows(&fs::read_to_string(out.join("fq_nonlocal.tsv")).unwrap());
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "5.0000000000000000e-1");

    let spread = write(dir.path(), "spread.toml", &fs::read_to_string(&config).unwrap().replace("max = 0.5", "max = 0.7"));
    assert_eq!(code(&sweep(&spread, &out, &[])), 1);
}

#[test]
fn failing_points_are_flagged_and_the_run_continues() {
    let dir = TempDir::new().unwrap();
    let config = write(
        dir.path(),
        "w.toml",
        "model = \"kitaev\"\nobservables = [\"winding\", \"gap\"]\nsizes = [16]\n\n[[axes]]\nname = \"mu\"\nmin = 0.0\nmax = 2.0\ncount = 5\n",
    );
    let out = dir.path().join("out");
    assert_eq!(code(&sweep(&config, &out, &[])), 2);
    let rows = data_rows(&fs::read_to_string(out.join("winding.tsv")).unwrap());
    let status: Vec<&str> = rows.iter().map(|r| r[3].as_str()).collect();
    assert_eq!(status, ["ok", "ok", "failed", "ok", "ok"]);
    assert_eq!(rows[2][2], "nan");
    assert!(rows[2][4].contains("criticality"));
    assert!(data_rows(&fs::read_to_string(out.join("gap.tsv")).unwrap()).iter().all(|r| r[3] == "ok"));
    let m = manifest(&out);
    assert_eq!(m["points"][2]["status"], "failed");
    assert_eq!(m["state"], "complete");
}

#[test]
fn thermal_observables_add_a_temperature_column() {
    let dir = TempDir::new().unwrap();
    let config = write(
        dir.path(),
        "t.toml",
        "model = \"lmg\"\nobservables = [\"thermal_fq_density\", \"gap1\"]\nsizes = [20]\n\n[fixed]\nlambda = 0.5\n\n[temperature]\nmin = 0.1\nmax = 1.0\ncount = 3\nspacing = \"log\"\n",
    );
    let out = dir.path().join("out");
    assert_eq!(code(&sweep(&config, &out, &[])), 0);
    let text = fs::read_to_string(out.join("thermal_fq_density.tsv")).unwrap();
    assert!(text.contains("\nsize\tT\tvalue\tstatus\tinfo\n"), "{text}");
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 3);
    let values: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(values[0] > values[1] && values[1] > values[2], "{values:?}");
    assert_eq!(data_rows(&fs::read_to_string(out.join("gap1.tsv")).unwrap()).len(), 1);

    let no_t = write(dir.path(), "no_t.toml", "model = \"lmg\"\nobservables = [\"thermal_fq_density\"]\nsizes = [20]\n\n[fixed]\nlambda = 0.5\n");
    assert_eq!(code(&sweep(&no_t, &out, &[])), 1);
}

#[test]
fn floats_are_written_with_seventeen_digits() {
    let dir = TempDir::new().unwrap();
    let config = write(dir.path(), "ising.toml", ISING);
    let out = dir.path().join("out");
    assert_eq!(code(&sweep(&config, &out, &["--no-cache"])), 0);
    for row in data_rows(&fs::read_to_string(out.join("fq_optimal.tsv")).unwrap()) {
        let value = &row[2];
        let mantissa = value.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{value}");
    }
}

#[test]
fn fit_recovers_linear_growth_in_the_topological_phase() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "k.toml",
        "model = \"kitaev\"\nobservables = [\"fq_nonlocal\"]\nsizes = [64, 96, 128, 192, 256, 384]\noutput = \"out\"\n\n[[axes]]\nname = \"mu\"\nmin = 0.5\nmax = 0.5\ncount = 1\n",
    );
    let fit = write(dir.path(), "fit.toml", "sweep = \"k.toml\"\nlaw = \"power\"\n");
    let out = qcrit(&["fit", fit.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("out/fq_nonlocal.fit.tsv")).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 1);
    let header: Vec<&str> = text.lines().find(|l| !l.starts_with('#')).unwrap().split('\t').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let b: f64 = rows[0][col("exponent")].parse().unwrap();
    assert!((b - 1.0).abs() < 0.02, "b = {b}");
    assert_eq!(rows[0][col("samples")], "6");
    assert_eq!(rows[0][col("flag")], "ok");
}

#[test]
fn fit_flags_poor_fits() {
    let dir = TempDir::new().unwrap();
    let mut table = String::from("# model: synthetic\ngroup\tsize\tvalue\tstatus\tinfo\n");
    for (i, n) in [8, 16, 32, 64, 128, 256].iter().enumerate() {
        let smooth = 2.0 * (*n as f64).powf(0.5);
        let jagged = if i % 2 == 0 { 1.0 } else { 40.0 };
        table.push_str(&format!("1\t{n}\t{smooth:.17e}\tok\t-\n2\t{n}\t{jagged:.17e}\tok\t-\n"));
    }
    table.push_str("3\t8\t1.0\tok\t-\n");
    write(dir.path(), "data.tsv", &table);
    let fit = write(dir.path(), "fit.toml", "table = \"data.tsv\"\nlaw = \"power\"\n");
    let out = qcrit(&["fit", fit.to_str().unwrap()]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    let rows = data_rows(&fs::read_to_string(dir.path().join("data.fit.tsv")).unwrap());
    let flags: Vec<&str> = rows.iter().map(|r| r.last().unwrap().as_str()).collect();
    assert_eq!(flags[0], "ok");
    assert_eq!(flags[1], "poor_fit");
    assert!(flags[2].starts_with("failed:"), "{}", flags[2]);
    let b: f64 = rows[0][4].parse().unwrap();
    assert!((b - 0.5).abs() < 1e-10);
}

#[test]
fn plot_scripts_sit_next_to_the_table() {
    let dir = TempDir::new().unwrap();
    let config = write(dir.path(), "ising.toml", ISING);
    let out = dir.path().join("out");
    assert_eq!(code(&sweep(&config, &out, &[])), 0);
    let spec = write(dir.path(), "lines.toml", "table = \"out/gap.tsv\"\nkind = \"lines\"\nx = \"theta\"\nlogy = true\n");
    let res = qcrit(&["plot", spec.to_str().unwrap()]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let script = fs::read_to_string(out.join("gap.lines.py")).unwrap();
    assert!(script.contains("TABLE = \"gap.tsv\""));
    assert!(script.contains("X = \"theta\""));
    assert!(script.contains("gap.lines.png"));

    let heat = write(dir.path(), "heat.toml", "table = \"out/gap.tsv\"\nkind = \"heatmap\"\nx = \"theta\"\ny = \"size\"\n");
    assert_eq!(code(&qcrit(&["plot", heat.to_str().unwrap()])), 0);
    assert!(out.join("gap.heatmap.py").exists());
}

#[test]
fn unknown_plot_columns_list_the_available_ones() {
    let dir = TempDir::new().unwrap();
    let config = write(dir.path(), "ising.toml", ISING);
    assert_eq!(code(&sweep(&config, &dir.path().join("out"), &[])), 0);
    let spec = write(dir.path(), "p.toml", "table = \"out/gap.tsv\"\nkind = \"lines\"\nx = \"alpha\"\n");
    let out = qcrit(&["plot", spec.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let err = stderr(&out);
    assert!(err.contains("unknown column 'alpha'"), "{err}");
    assert!(err.contains("available columns: theta, size, value, status, info"), "{err}");
}

#[test]
fn usage_errors_exit_with_config_status() {
    assert_eq!(code(&qcrit(&["--help"])), 0);
    assert_eq!(code(&qcrit(&["sweep"])), 1);
    assert_eq!(code(&qcrit(&["frobnicate"])), 1);
    assert_eq!(code(&qcrit(&["sweep", "x.toml", "--jobs", "0"])), 1);
    assert_eq!(code(&qcrit(&["verify", "99"])), 1);
}

#[test]
fn verify_runs_selected_criteria() {
    let out = qcrit(&["verify", "5"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("criterion  5 PASS"), "{text}");
    assert_eq!(code(&out), 0);
}
