use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use tenkit::cpd::{kruskal_to_coo, KruskalModel};
use tenkit::frostt::to_frostt_string;
use tenkit::kernels::FactorMatrix;
use tenkit_cli::commands::convert::ConvertSummary;
use tenkit_cli::commands::cpd::CpdReport;
use tenkit_cli::commands::gen::GenSummary;
use tenkit_cli::commands::inspect::InspectReport;
use tenkit_cli::commands::simulate::SimulateReport;
use tenkit_cli::BenchRecord;

const STO: &str = "# three slices: one nonzero, three singleton fibers, one long fiber\n\
1 1 1 1.0\n2 1 2 2.0\n2 2 3 3.0\n2 4 1 4.0\n3 3 1 5.0\n3 3 2 6.0\n3 3 4 7.0\n3 3 5 8.0\n";

fn tenkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tenkit"))
        .args(args)
        .env_remove("TENKIT_SEED")
        .output()
        .expect("run tenkit")
}

fn ok_stdout(args: &[&str]) -> String {
    let out = tenkit(args);
    assert!(
        out.status.success(),
        "tenkit {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json<T: serde::de::DeserializeOwned>(args: &[&str]) -> T {
    let mut full = args.to_vec();
    full.push("--json");
    serde_json::from_str(&ok_stdout(&full)).expect("JSON matches the report schema")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &TempDir, name: &str, shape: &str, nnz: usize, skew: f64, seed: u64) -> PathBuf {
    let p = dir.path().join(name);
    ok_stdout(&[
        "gen", "--shape", shape, "--nnz", &nnz.to_string(), "--skew", &skew.to_string(), "--seed",
        &seed.to_string(), "--out", s(&p),
    ]);
    p
}

/// Rank-2 tensor whose factor columns have disjoint supports.
fn separated_rank2(dir: &TempDir) -> PathBuf {
    let factor = |d: usize| {
        let rows: Vec<Vec<f64>> = (0..d)
            .map(|i| if i < d / 2 { vec![1.0 + 0.1 * i as f64, 0.0] } else { vec![0.0, 2.0 - 0.05 * i as f64] })
            .collect();
        FactorMatrix::from_rows(&rows).unwrap()
    };
    let model = KruskalModel { lambda: vec![1.0, 1.0], factors: vec![factor(10), factor(12), factor(14)] };
    write(dir, "rank2.tns", &to_frostt_string(&kruskal_to_coo(&model).unwrap()))
}

#[test]
fn inspect_reports_worked_example() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "sto.tns", STO);
    let r: InspectReport = json(&["inspect", s(&p), "--mode-order", "0,1,2"]);
    assert_eq!(r.sections.len(), 1);
    let sec = &r.sections[0];
    assert_eq!((sec.stats.slice_count, sec.stats.fiber_count, sec.stats.nnz), (3, 5, 8));
    let words: Vec<usize> = sec.storage.iter().map(|x| x.index_words).collect();
    assert_eq!(words, vec![24, 24, 19]);
    assert_eq!((sec.census.coo, sec.census.csl, sec.census.csf), (1, 1, 1));
    let text = ok_stdout(&["inspect", s(&p)]);
    assert!(text.contains("S=3 F=5 M=8"));
}

#[test]
fn inspect_emits_one_section_per_mode() {
    let dir = TempDir::new().unwrap();
    let p = gen(&dir, "o4.tns", "6x7x8x9", 300, 1.0, 3);
    let r: InspectReport = json(&["inspect", s(&p)]);
    assert_eq!(r.sections.len(), 4);
    let roots: Vec<usize> = r.sections.iter().map(|x| x.mode_order[0]).collect();
    assert_eq!(roots, vec![0, 1, 2, 3]);
}

#[test]
fn data_errors_exit_3() {
    let dir = TempDir::new().unwrap();
    let empty = write(&dir, "empty.tns", "");
    assert_eq!(tenkit(&["inspect", s(&empty)]).status.code(), Some(3));
    let ragged = write(&dir, "ragged.tns", "1 1 1 1.0\n1 2 3\n");
    let out = tenkit(&["inspect", s(&ragged)]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("ragged.tns") && err.contains("line 2"), "{err}");
    assert_eq!(tenkit(&["inspect", s(&dir.path().join("missing.tns"))]).status.code(), Some(3));
}

#[test]
fn argument_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "sto.tns", STO);
    assert_eq!(tenkit(&["mttkrp", s(&p), "--format", "dense"]).status.code(), Some(2));
    assert_eq!(tenkit(&["mttkrp", s(&p), "--mode", "3"]).status.code(), Some(2));
    assert_eq!(tenkit(&["mttkrp", s(&p), "--fiber-threshold", "0", "--format", "bcsf"]).status.code(), Some(2));
    assert_eq!(tenkit(&["gen", "--shape", "2x2x2", "--nnz", "9"]).status.code(), Some(2));
    assert_eq!(tenkit(&["simulate", s(&p), "--thresholds", "inf,0"]).status.code(), Some(2));
}

#[test]
fn mttkrp_check_and_record_consistency() {
    let dir = TempDir::new().unwrap();
    let p = gen(&dir, "t.tns", "40x50x60", 3000, 1.5, 9);
    for format in ["coo", "csf", "bcsf", "hbcsf"] {
        let r: BenchRecord = json(&["mttkrp", s(&p), "--format", format, "--check", "--fiber-threshold", "4", "--reps", "3"]);
        assert_eq!(r.rank, 32);
        assert!(r.check_deviation.unwrap() <= 1e-10, "{format}: {:?}", r.check_deviation);
        let recomputed = r.op_count as f64 / r.wall_seconds / 1e9;
        assert!((r.gflops - recomputed).abs() <= 1e-9 * recomputed.max(1e-300));
        assert_eq!(r.op_count, r.muls + r.adds);
        assert!(r.iterations_to_amortize.is_none() && r.baseline.is_none());
    }
    let r: BenchRecord = json(&["mttkrp", s(&p), "--format", "csf", "--rank", "4", "--mode", "2"]);
    // 2(S+M)R differs from the traversal count (2M+F+S)R by (S-F)R <= 0.
    let closed = r.csf_closed_form_ops.unwrap();
    assert!(closed <= r.op_count && closed >= r.op_count / 2);
}

#[test]
fn mttkrp_baseline_fills_amortization() {
    let dir = TempDir::new().unwrap();
    let p = gen(&dir, "t.tns", "30x30x400", 2000, 1.0, 2);
    let r: BenchRecord = json(&["mttkrp", s(&p), "--format", "hbcsf", "--baseline", "coo", "--rank", "8"]);
    let b = r.baseline.as_ref().unwrap();
    assert_eq!(b.format, tenkit::Format::Coo);
    let extra = r.preprocessing_seconds - b.preprocessing_seconds;
    let gain = b.wall_seconds - r.wall_seconds;
    match r.iterations_to_amortize {
        Some(0) => assert!(extra <= 0.0),
        Some(n) => assert_eq!(n, (extra / gain).ceil() as u64),
        None => assert!(gain <= 0.0),
    }
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "sto.tns", STO);
    let with_flag: BenchRecord = json(&["mttkrp", s(&p), "--seed", "5", "--sequential"]);
    let out = Command::new(env!("CARGO_BIN_EXE_tenkit"))
        .args(["mttkrp", s(&p), "--sequential", "--json"])
        .env("TENKIT_SEED", "5")
        .output()
        .unwrap();
    let from_env: BenchRecord = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(with_flag.checksum, from_env.checksum);
    let default: BenchRecord = json(&["mttkrp", s(&p), "--sequential"]);
    assert_ne!(default.checksum, from_env.checksum);
}

#[test]
fn cpd_converges_and_backends_agree() {
    let dir = TempDir::new().unwrap();
    let p = separated_rank2(&dir);
    let coo: CpdReport = json(&["cpd", s(&p), "--rank", "2", "--format", "coo", "--tol", "1e-12"]);
    let hb: CpdReport = json(&["cpd", s(&p), "--rank", "2", "--format", "hbcsf", "--tol", "1e-12"]);
    assert!(coo.final_fit > 0.9999, "fit {}", coo.final_fit);
    assert!(coo.iterations <= 50);
    assert_eq!(coo.history.len(), hb.history.len());
    for (a, b) in coo.history.iter().zip(&hb.history) {
        assert!((a.fit - b.fit).abs() <= 1e-7);
    }
    let csv = ok_stdout(&["cpd", s(&p), "--rank", "2", "--iters", "4", "--tol", "0"]);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "iteration,fit,delta,mttkrp_s_mode0,mttkrp_s_mode1,mttkrp_s_mode2,muls,adds,ops"
    );
    assert_eq!(lines.count(), 5);
}

#[test]
fn cpd_zero_iterations_reports_initial_fit() {
    let dir = TempDir::new().unwrap();
    let p = separated_rank2(&dir);
    let r: CpdReport = json(&["cpd", s(&p), "--rank", "2", "--iters", "0"]);
    assert_eq!(r.iterations, 0);
    assert_eq!(r.history.len(), 1);
    let csv_path = dir.path().join("fit.csv");
    ok_stdout(&["cpd", s(&p), "--rank", "2", "--iters", "0", "--out", s(&csv_path)]);
    assert_eq!(fs::read_to_string(csv_path).unwrap().lines().count(), 2);
}

#[test]
fn simulate_sweeps() {
    let dir = TempDir::new().unwrap();
    let skewed = gen(&dir, "skewed.tns", "300x300x20000", 30_000, 2.0, 4);
    let r: SimulateReport = json(&["simulate", s(&skewed)]);
    let m: Vec<u64> = r.rows.iter().map(|x| x.report.makespan_cycles).collect();
    assert_eq!(m.len(), 4);
    assert!(m[0] > m[1] && m[1] > m[2], "{m:?}");

    let flat = gen(&dir, "flat.tns", "100x100x100", 5000, 0.0, 4);
    let r: SimulateReport = json(&["simulate", s(&flat)]);
    assert!(r.rows.iter().all(|x| x.report.makespan_cycles == r.rows[0].report.makespan_cycles));

    let csv = ok_stdout(&["simulate", s(&flat), "--thresholds", "inf,8", "--sms", "4"]);
    assert!(csv.starts_with("threshold,makespan,sm_efficiency_proxy,occupancy_proxy,stddev_fbr,stddev_slc\ninf,"));
}

#[test]
fn one_dominant_slice_gains_most() {
    let dir = TempDir::new().unwrap();
    let gain = |p: &Path| {
        let r: SimulateReport = json(&["simulate", s(p)]);
        r.rows[0].report.makespan_cycles as f64 / r.rows.last().unwrap().report.makespan_cycles as f64
    };
    let dominant = gen(&dir, "dom.tns", "300x300x20000", 30_000, 3.0, 5);
    let mild = gen(&dir, "mild.tns", "300x300x20000", 30_000, 0.8, 5);
    let (a, b) = (gain(&dominant), gain(&mild));
    assert!(a > b, "dominant {a} vs mild {b}");
}

#[test]
fn gen_distribution_and_determinism() {
    let dir = TempDir::new().unwrap();
    let slice_counts = |p: &Path| {
        let t = tenkit::frostt::parse_frostt_str(&fs::read_to_string(p).unwrap()).unwrap();
        let mut c = vec![0usize; 200];
        for (i, _) in t.entries() {
            c[i[0] as usize] += 1;
        }
        c.sort_unstable();
        c
    };
    let uniform = gen(&dir, "u.tns", "200x200x200", 20_000, 0.0, 1);
    let c = slice_counts(&uniform);
    assert!(c[199] < 2 * c[100], "max {} median {}", c[199], c[100]);
    let steep = gen(&dir, "s.tns", "200x200x200", 20_000, 2.0, 1);
    let c = slice_counts(&steep);
    assert!(c[199] >= 10 * c[100].max(1), "max {} median {}", c[199], c[100]);

    let again = gen(&dir, "s2.tns", "200x200x200", 20_000, 2.0, 1);
    assert_eq!(fs::read(&steep).unwrap(), fs::read(&again).unwrap());
    let summary: GenSummary = json(&[
        "gen", "--shape", "10x10x10", "--nnz", "50", "--out", s(&dir.path().join("j.tns")),
    ]);
    assert_eq!(summary.nnz, 50);
    assert_eq!(ok_stdout(&["gen", "--shape", "3x3x3", "--nnz", "4"]).lines().count(), 4);
}

#[test]
fn convert_merges_and_sorts() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "dup.tns", "2 1 1 1.5\n1 2 1 1.0\n2 1 1 0.5\n1 1 1 3.0\n1 1 2 -3.0\n1 1 2 3.0\n");
    let out = dir.path().join("clean.tns");
    let summary: ConvertSummary = json(&["convert", s(&p), "--out", s(&out), "--mode-order", "1,0,2"]);
    assert_eq!((summary.input_entries, summary.output_nnz), (6, 3));
    let t = tenkit::frostt::parse_frostt_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let got: Vec<(Vec<u32>, f64)> = t.entries().map(|(i, v)| (i.to_vec(), v)).collect();
    assert_eq!(
        got,
        vec![(vec![0, 0, 0], 3.0), (vec![1, 0, 0], 2.0), (vec![0, 1, 0], 1.0)]
    );
    let piped = ok_stdout(&["convert", s(&p)]);
    assert_eq!(piped.lines().count(), 3);
    assert_eq!(tenkit(&["convert", s(&p), "--json"]).status.code(), Some(2));
}
