use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn vqsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vqsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn data_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(str::to_string)
        .collect()
}

const PAPER_FITS: &str = r#"[
  {"method": "vqs", "a": 1.587, "b": 0.997, "c": 0.743},
  {"method": "trotter", "a": 3.469, "b": 0.451, "c": 1.287}
]"#;

#[test]
fn gen_writes_deterministic_instance() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = vqsim(&["gen", "--nq", "4", "--seed", "7", "--out", path_str(out)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["a"].as_array().unwrap().len(), 4);
    assert_eq!(v["b"].as_array().unwrap().len(), 3);
    assert_eq!(v["initial_layer_params"].as_array().unwrap().len(), 7);
}

#[test]
fn gen_rejects_single_qubit() {
    let dir = TempDir::new().unwrap();
    let o = vqsim(&["gen", "--nq", "1", "--out", path_str(&dir.path().join("x.json"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--nq"));
}

#[test]
fn missing_arguments_are_usage_errors() {
    assert_eq!(vqsim(&["run"]).status.code(), Some(2));
    assert_eq!(vqsim(&["bogus"]).status.code(), Some(2));
}

#[test]
fn run_minimal_config_gives_two_rows() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"n_qubits_range": [3], "t_final_values": [1.0], "n_instances": 1}"#,
    )
    .unwrap();
    let out = dir.path().join("res.csv");
    let o = vqsim(&["run", "--config", path_str(&cfg), "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_lines(&out);
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("vqs,3,1,0,"));
    assert!(rows[1].starts_with("trotter,3,1,0,"));
    assert!(dir.path().join("res.provenance.json").exists());
    assert!(dir.path().join("res.summary.csv").exists());
    assert!(stderr(&o).contains("0 unsolved"));

    let prov: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("res.provenance.json")).unwrap())
            .unwrap();
    assert_eq!(prov["conventions"]["rotation"], "exp(-i*theta*P/2)");
    assert_eq!(prov["conventions"]["initial_layer_in_depth"], false);
}

#[test]
fn run_methods_filter() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("res.csv");
    let o = vqsim(&[
        "run", "--nq", "2,3", "--tf", "1", "--instances", "2", "--methods", "vqs", "--out",
        path_str(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_lines(&out);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.starts_with("vqs,")));
}

#[test]
fn run_reports_failing_config_field() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"vqs_config": {"ode_rel_tol": "tight"}}"#).unwrap();
    let o = vqsim(&["run", "--config", path_str(&cfg), "--out", "unused.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("vqs_config.ode_rel_tol"), "{}", stderr(&o));

    fs::write(&cfg, r#"{"n_instancez": 3}"#).unwrap();
    let o = vqsim(&["run", "--config", path_str(&cfg), "--out", "unused.csv"]);
    assert_eq!(o.status.code(), Some(2));

    fs::write(&cfg, r#"{"fidelity_threshold": 1.5}"#).unwrap();
    let o = vqsim(&["run", "--config", path_str(&cfg), "--out", "unused.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn run_desk_scale_rows_meet_threshold() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("res.csv");
    let o = vqsim(&[
        "run", "--nq", "2-4", "--tf", "1-3", "--instances", "3", "--out", path_str(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_lines(&out);
    assert_eq!(rows.len(), 2 * 3 * 3 * 3);
    for r in &rows {
        let f: Vec<&str> = r.split(',').collect();
        if f[4] == "success" {
            assert!(f[7].parse::<f64>().unwrap() >= 0.95, "{r}");
        }
    }
}

fn synthetic_csv(path: &Path) {
    let mut text = String::from(
        "method,n_qubits,t_final,instance_seed,status,min_depth,structural_count,final_fidelity,mclachlan_final,rhs_evaluations,wall_time_s\n",
    );
    for (method, a, b, c) in [("vqs", 2.0, 1.0, 0.75), ("trotter", 3.0, 0.5, 1.25)] {
        for n in 2..=10 {
            for t in 1..=14 {
                let d: f64 = a * f64::from(n).powf(b) * f64::from(t).powf(c);
                text.push_str(&format!("{method},{n},{t},0,success,{d},1,0.99,,,\n"));
            }
        }
    }
    fs::write(path, text).unwrap();
}

#[test]
fn fit_recovers_synthetic_exponents() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("syn.csv");
    synthetic_csv(&csv);
    let fits = dir.path().join("fits.json");
    let o = vqsim(&["fit", "--input", path_str(&csv), "--out", path_str(&fits)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&fits).unwrap()).unwrap();
    // Depths are rounded to whole moments on read, so allow a little slack.
    assert_eq!(v[0]["method"], "vqs");
    assert!((v[0]["b"].as_f64().unwrap() - 1.0).abs() < 0.03);
    assert!((v[0]["c"].as_f64().unwrap() - 0.75).abs() < 0.03);
    assert_eq!(v[1]["method"], "trotter");
    assert!((v[1]["b"].as_f64().unwrap() - 0.5).abs() < 0.03);
    assert!((v[1]["c"].as_f64().unwrap() - 1.25).abs() < 0.03);
}

#[test]
fn fit_with_too_few_rows_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("few.csv");
    fs::write(
        &csv,
        "method,n_qubits,t_final,instance_seed,status,min_depth,structural_count,final_fidelity,mclachlan_final,rhs_evaluations,wall_time_s\n\
         vqs,2,1,0,success,3,1,0.99,,,\n\
         vqs,3,2,0,success,6,2,0.99,,,\n",
    )
    .unwrap();
    let o = vqsim(&[
        "fit", "--input", path_str(&csv), "--out",
        path_str(&dir.path().join("f.json")), "--methods", "vqs",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("2 usable rows"), "{}", stderr(&o));
}

#[test]
fn malformed_results_file_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("bad.csv");
    fs::write(&csv, "method,n_qubits\nvqs,two\n").unwrap();
    let o = vqsim(&["fit", "--input", path_str(&csv), "--out", path_str(&dir.path().join("f.json"))]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let o = vqsim(&[
        "fit", "--input", path_str(&dir.path().join("nope.csv")), "--out",
        path_str(&dir.path().join("f.json")),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn boundary_from_published_fits_is_linear() {
    let dir = TempDir::new().unwrap();
    let fits = dir.path().join("fits.json");
    fs::write(&fits, PAPER_FITS).unwrap();
    let out = dir.path().join("boundary.csv");
    let o = vqsim(&["boundary", "--fits", path_str(&fits), "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("above the boundary"));
    let rows = data_lines(&out);
    assert_eq!(rows.len(), 39);
    for r in rows {
        let (n, t) = r.split_once(',').unwrap();
        let ratio = t.parse::<f64>().unwrap() / n.parse::<f64>().unwrap();
        assert!((0.22..0.26).contains(&ratio), "{r}");
    }
}

#[test]
fn boundary_with_equal_exponents_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let fits = dir.path().join("fits.json");
    fs::write(
        &fits,
        r#"[{"method":"vqs","a":1,"b":1,"c":1},{"method":"trotter","a":2,"b":0.5,"c":1}]"#,
    )
    .unwrap();
    let o = vqsim(&["boundary", "--fits", path_str(&fits), "--out", path_str(&dir.path().join("b.csv"))]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn threshold_curve_is_monotone() {
    let dir = TempDir::new().unwrap();
    let fits = dir.path().join("fits.json");
    fs::write(&fits, PAPER_FITS).unwrap();
    let out = dir.path().join("thr.csv");
    let o = vqsim(&["threshold", "--fits", path_str(&fits), "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_lines(&out);
    assert_eq!(rows.len(), 50);
    let mut last = 0usize;
    for r in rows {
        let (_, n) = r.split_once(',').unwrap();
        let n = if n.is_empty() { usize::MAX } else { n.parse().unwrap() };
        assert!(n >= last, "{r}");
        last = n;
    }
}

#[test]
fn plot_data_files_and_idempotence() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("syn.csv");
    synthetic_csv(&csv);
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = vqsim(&["plot-data", "--input", path_str(&csv), "--out", path_str(&out)]);
        assert!(o.status.success(), "{}", stderr(&o));
        out
    };
    let a = run("a");
    let b = run("b");
    let mut names: Vec<_> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 4);
    for name in &names {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
    // 2 methods x 9 sizes x 14 times simulated cells; 9 diagonal cells per method.
    assert_eq!(data_lines(&a.join("depth_vs_tfinal.csv")).len(), 2 * 9 * 14);
    assert_eq!(data_lines(&a.join("depth_vs_nqubits.csv")).len(), 2 * 9);
    let dots = data_lines(&a.join("advantage_boundary.csv"))
        .into_iter()
        .filter(|l| l.starts_with("simulated"))
        .count();
    assert_eq!(dots, 9 * 14);
}

#[test]
fn plot_data_on_empty_results_writes_headers() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("empty.csv");
    fs::write(
        &csv,
        "method,n_qubits,t_final,instance_seed,status,min_depth,structural_count,final_fidelity,mclachlan_final,rhs_evaluations,wall_time_s\n",
    )
    .unwrap();
    let out = dir.path().join("plots");
    let o = vqsim(&["plot-data", "--input", path_str(&csv), "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    for entry in fs::read_dir(&out).unwrap() {
        assert_eq!(data_lines(&entry.unwrap().path()).len(), 0);
    }
}
