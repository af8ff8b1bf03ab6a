use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hyperpbc(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperpbc"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn read_csv(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|t| t.parse().unwrap()).collect())
        .collect()
}

#[test]
fn minpoly_prints_table_entries() {
    let dir = tempfile::tempdir().unwrap();
    let o = hyperpbc(dir.path(), &["minpoly", "--pq", "5", "4"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next().unwrap(), "x^8 - 8x^6 + 19x^4 - 12x^2 + 1");
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("minpoly.json")).unwrap()).unwrap();
    assert_eq!(json["n"], 40);
    assert!(dir.path().join("config.json").exists());
    assert_eq!(stdout(&hyperpbc(dir.path(), &["minpoly", "-n", "8"])).lines().next().unwrap(), "x^2 - 2");
    assert_eq!(stdout(&hyperpbc(dir.path(), &["minpoly", "-n", "1"])).lines().next().unwrap(), "x - 2");
}

#[test]
fn group_orders_and_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let cache_arg = cache.to_str().unwrap();
    let o = hyperpbc(dir.path(), &["--cache-dir", cache_arg, "group", "5", "4", "--s", "2", "--k", "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("order 160\n"));
    assert!(cache.join("quotient_p5_q4_s2_k1.json").exists());
    // second run loads from the cache and agrees
    let again = hyperpbc(dir.path(), &["--cache-dir", cache_arg, "group", "5", "4", "--s", "2", "--k", "1"]);
    assert_eq!(stdout(&again), stdout(&o));
    assert!(stdout(&hyperpbc(dir.path(), &["group", "6", "6", "--s", "2", "--k", "1"])).starts_with("order 12\n"));
    let o = hyperpbc(dir.path(), &["group", "5", "4", "--s", "2", "--k", "2"]);
    let order: usize = stdout(&o).lines().next().unwrap().trim_start_matches("order ").parse().unwrap();
    assert_eq!(order % 160, 0);
}

#[test]
fn spectrum_reports_gap() {
    let dir = tempfile::tempdir().unwrap();
    let o = hyperpbc(dir.path(), &["spectrum", "5", "4", "--k", "1", "--model", "h", "1", "1", "--eps", "0.8"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let gaps: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("gaps_k1.json")).unwrap()).unwrap();
    let gaps = gaps["gaps"].as_array().unwrap();
    assert!(!gaps.is_empty());
    assert!(gaps.iter().any(|g| g["states_below"] == 32));
    let spectrum = read_csv(&dir.path().join("spectrum_k1.csv"));
    assert_eq!(spectrum.len(), 160);
    let idos = read_csv(&dir.path().join("idos_k1.csv"));
    assert!(idos.windows(2).all(|w| w[1][1] >= w[0][1]));
}

#[test]
fn spectrum_mse_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = hyperpbc(dir.path(), &["spectrum", "5", "4", "--k", "1,2,3", "--method", "kpm", "--seed", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("mse.csv")).unwrap();
    let mse: Vec<f64> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(mse.len(), 2);
    assert!(mse[0] > mse[1]);
}

#[test]
fn kpm_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["spectrum", "5", "4", "--k", "1", "--method", "kpm", "--seed", "7"];
    assert!(hyperpbc(a.path(), &args).status.success());
    assert!(hyperpbc(b.path(), &args).status.success());
    for name in ["dos_k1.csv", "dos_k1.json", "idos_k1.csv", "config.json"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.path().join("dos_k1.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 7);
    assert_eq!(meta["moments"], 500);
}

#[test]
fn flow_vertex_spectra_and_crossings() {
    let dir = tempfile::tempdir().unwrap();
    let o = hyperpbc(dir.path(), &["flow", "5", "4", "--k", "1", "--samples", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("flow.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    // three vertices plus the repeated starting vertex, 160 levels each
    assert_eq!(rows.len(), 4 * 160);
    let level = |point: &str| rows.iter().filter(|r| r[0] == point).map(|r| r[5].to_string()).collect::<Vec<_>>();
    assert_eq!(level("0"), level("3"));
    let crossings: Vec<serde_json::Value> = serde_json::from_str(&fs::read_to_string(dir.path().join("crossings.json")).unwrap()).unwrap();
    assert_eq!(crossings.len(), 3);
}

#[test]
fn junction_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    fs::write(&config, r#"{"radius": 6, "ldos": [[0.0, 0.05], [0.5, 0.1]]}"#).unwrap();
    let out = dir.path().join("out");
    let o = hyperpbc(&out, &["junction", config.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let chi = read_csv(&out.join("chi.csv"));
    assert_eq!(chi.len(), 161);
    assert!(chi.iter().all(|r| (r[1] + r[2] + r[3] - 1.0).abs() < 1e-12));
    assert_eq!(read_csv(&out.join("sites.csv")).len(), 161);
    assert!(out.join("ldos_1.csv").exists());
    assert!(fs::read_to_string(out.join("hamiltonian.mtx")).unwrap().starts_with("%%MatrixMarket matrix coordinate complex hermitian"));
    let resolved: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert!((resolved["run"]["junction"]["phi_y"].as_f64().unwrap() - std::f64::consts::PI / 10.0).abs() < 1e-15);
}

#[test]
fn junction_with_identical_models_matches_open_lattice() {
    use hyperpbc::operators::{model_hamiltonian, represent_open};
    use hyperpbc::spectral::{exact_spectrum, ldos};
    use hyperpbc::triangle_group::{ball_enumerate, TriangleGroup};

    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    let spec = r#"{"alpha": 2, "kidx": 1}"#;
    fs::write(&config, format!(r#"{{"radius": 5, "junction": {{"models": [{spec}, {spec}, {spec}]}}, "ldos": [[0.0, 0.1]]}}"#)).unwrap();
    let out = dir.path().join("out");
    assert!(hyperpbc(&out, &["junction", config.to_str().unwrap()]).status.success());
    let from_cli: Vec<f64> = read_csv(&out.join("ldos_0.csv")).into_iter().map(|r| r[1]).collect();

    let group = TriangleGroup::from_pq(5, 4).unwrap();
    let ball = ball_enumerate(&group, 5);
    let h = represent_open(&model_hamiltonian(2, 1, 0.8, group.params()).unwrap(), &ball, &group);
    let direct = ldos(&exact_spectrum(&h, true).unwrap(), 0.0, 0.1).unwrap();
    assert_eq!(from_cli.len(), direct.len());
    for (a, b) in from_cli.iter().zip(&direct) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hyperpbc(dir.path(), &["group", "4", "4"]).status.code(), Some(2));
    assert_eq!(hyperpbc(dir.path(), &["spectrum", "5", "4", "--model", "h", "1"]).status.code(), Some(2));
    assert_eq!(hyperpbc(dir.path(), &["group", "5", "4", "--k", "2", "--cap", "1000"]).status.code(), Some(3));
    assert_eq!(hyperpbc(dir.path(), &["spectrum", "5", "4", "--k", "3"]).status.code(), Some(3));
    // A has order 3 instead of 6 in the {6,6} quotient mod 2
    assert_eq!(hyperpbc(dir.path(), &["spectrum", "6", "6", "--model", "p", "1", "1"]).status.code(), Some(4));
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"junction": {"ell": -1.0}}"#).unwrap();
    assert_eq!(hyperpbc(dir.path(), &["junction", bad.to_str().unwrap()]).status.code(), Some(2));
}
