use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde::{Deserialize, Serialize};

fn efie(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_efie"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = efie(args);
    assert!(
        out.status.success(),
        "efie {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Vec<T> {
    csv::Reader::from_path(path)
        .unwrap()
        .deserialize()
        .collect::<Result<_, _>>()
        .unwrap()
}

#[derive(Debug, PartialEq, Serialize, Deserialize)]
struct FrequencyRow {
    f_hz: f64,
    cond_plain: Option<f64>,
    cond_precond: Option<f64>,
    gmres_iters_plain: Option<usize>,
    gmres_iters_precond: Option<usize>,
    residual_plain: Option<f64>,
    residual_precond: Option<f64>,
    scaling_c: Option<f64>,
    error: String,
}

#[derive(Debug, Deserialize)]
struct RcsRow {
    angle_deg: f64,
    sigma_dbsm_computed: f64,
    sigma_dbsm_mie: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct CellRow {
    j_db_plain: Option<f64>,
    j_db_precond: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct DofRow {
    magnitude_plain: Option<f64>,
    magnitude_precond: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct MeshInfoRow {
    order: usize,
    genus: i64,
    n_dofs: usize,
    n_charge: usize,
    star_rank: Option<usize>,
    global_cycles: Option<usize>,
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.log10()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.log10()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn mesh_info_counts_torus_cycles() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&[
        "mesh-info",
        "--torus",
        "16,8",
        "--order",
        "0,1",
        "--out",
        out,
    ]);
    let r: Vec<MeshInfoRow> = rows(&dir.path().join("mesh_info.csv"));
    assert_eq!(r.len(), 2);
    assert_eq!(
        (r[0].order, r[0].genus, r[0].n_dofs, r[0].n_charge),
        (0, 1, 384, 256)
    );
    assert_eq!(r[0].star_rank, Some(255));
    assert_eq!(r[0].global_cycles, Some(2));
    assert_eq!(r[1].n_dofs, 2 * 384 + 2 * 256);
    assert_eq!(r[1].global_cycles, None);
}

#[test]
fn frequency_sweep_shows_breakdown_and_its_cure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&[
        "sweep-frequency",
        "--sphere",
        "1",
        "--order",
        "0",
        "--freq",
        "1e-2:1e6:5",
        "--out",
        out,
    ]);
    let r: Vec<FrequencyRow> = rows(&dir.path().join("sweep_frequency_p0.csv"));
    assert_eq!(r.len(), 5);
    assert!(r.iter().all(|row| row.error.is_empty()));
    let f: Vec<f64> = r.iter().map(|row| row.f_hz).collect();
    let plain: Vec<f64> = r.iter().map(|row| row.cond_plain.unwrap()).collect();
    let stab: Vec<f64> = r.iter().map(|row| row.cond_precond.unwrap()).collect();
    assert!((slope(&f, &plain) + 2.0).abs() < 0.1);
    let (lo, hi) = stab
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
    assert!(hi / lo < 1.1, "{stab:?}");
}

#[test]
fn csv_and_manifest_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&[
        "sweep-frequency",
        "--sphere",
        "0",
        "--order",
        "1",
        "--freq",
        "1e3",
        "--out",
        out,
    ]);
    let path = dir.path().join("sweep_frequency_p1.csv");
    let text = fs::read_to_string(&path).unwrap();
    let r: Vec<FrequencyRow> = rows(&path);
    assert_eq!(r.len(), 1);
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &r {
        w.serialize(row).unwrap();
    }
    assert_eq!(String::from_utf8(w.into_inner().unwrap()).unwrap(), text);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "sweep-frequency");
    assert_eq!(manifest["config"]["mesh"]["kind"], "sphere");
    assert_eq!(manifest["config"]["frequencies_hz"][0], 1e3);
    assert_eq!(manifest["config"]["cg_tol"], 1e-10);
    assert!(manifest["versions"]["efie_core"].is_string());
    assert!(manifest["seeds"]["norm_start_vector"].is_u64());
    assert_eq!(manifest["outputs"][0], "sweep_frequency_p1.csv");
}

#[test]
fn reruns_are_bit_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        ok(&[
            "rcs",
            "--sphere",
            "0",
            "--order",
            "1",
            "--freq",
            "1e8",
            "--theta-step",
            "10",
            "--out",
            d.path().to_str().unwrap(),
        ]);
    }
    for name in [
        "rcs_p1_f1e8_plain.csv",
        "rcs_p1_f1e8_precond.csv",
        "rcs_summary.csv",
    ] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn rcs_on_a_torus_has_no_oracle_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&[
        "rcs",
        "--torus",
        "8,4",
        "--order",
        "0",
        "--freq",
        "1",
        "--precond",
        "on",
        "--theta-step",
        "30",
        "--out",
        out,
    ]);
    let r: Vec<RcsRow> = rows(&dir.path().join("rcs_p0_f1e0_precond.csv"));
    assert_eq!(r.len(), 7);
    assert_eq!(r[6].angle_deg, 180.0);
    assert!(r
        .iter()
        .all(|row| row.sigma_dbsm_mie.is_none() && row.sigma_dbsm_computed.is_finite()));
    assert!(!dir.path().join("rcs_p0_f1e0_plain.csv").exists());
}

#[test]
fn zero_excitation_gives_zero_current() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&[
        "surface-current",
        "--sphere",
        "0",
        "--order",
        "1",
        "--amplitude",
        "0",
        "--out",
        out,
    ]);
    let d: Vec<DofRow> = rows(&dir.path().join("current_dofs_p1_f1e1.csv"));
    assert!(d
        .iter()
        .all(|r| r.magnitude_plain == Some(0.0) && r.magnitude_precond == Some(0.0)));
    let c: Vec<CellRow> = rows(&dir.path().join("current_cells_p1_f1e1.csv"));
    assert!(c.iter().all(|r| r.j_db_plain == Some(f64::NEG_INFINITY)));
}

#[test]
fn moderate_frequency_currents_agree() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&[
        "surface-current",
        "--sphere",
        "1",
        "--order",
        "1",
        "--freq",
        "1e7",
        "--solver",
        "lu",
        "--out",
        out,
    ]);
    let d: Vec<DofRow> = rows(&dir.path().join("current_dofs_p1_f1e7.csv"));
    let (mut num, mut den) = (0.0, 0.0);
    for r in &d {
        let (a, b) = (r.magnitude_plain.unwrap(), r.magnitude_precond.unwrap());
        num += (a - b).powi(2);
        den += a * a;
    }
    assert!((num / den).sqrt() < 0.01);
}

#[test]
fn low_frequency_torus_current_shows_breakdown() {
    // Thresholds from the first validated run: the unpreconditioned GMRES
    // iterate is off by more than 20 dB on some cells.
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&[
        "surface-current",
        "--torus",
        "8,4",
        "--order",
        "2",
        "--freq",
        "10",
        "--out",
        out,
    ]);
    let c: Vec<CellRow> = rows(&dir.path().join("current_cells_p2_f1e1.csv"));
    let precond: Vec<f64> = c.iter().map(|r| r.j_db_precond.unwrap()).collect();
    assert!(precond.iter().all(|v| v.is_finite()));
    let spread = precond.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - precond.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread < 20.0, "precond spread {spread}");
    let worst = c
        .iter()
        .map(|r| (r.j_db_plain.unwrap() - r.j_db_precond.unwrap()).abs())
        .fold(0.0, f64::max);
    assert!(worst > 20.0, "largest plain/precond difference {worst} dB");
}

#[test]
fn refinement_sweep_runs_on_a_torus() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&[
        "sweep-h", "--torus", "4,3", "--levels", "2", "--order", "0", "--out", out,
    ]);
    let text = fs::read_to_string(dir.path().join("sweep_h_p0.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("level,h_avg,n_dofs,cond_plain,cond_precond,error"));
}

#[test]
fn single_level_refinement_sweep_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["sweep-h", "--sphere", "0", "--levels", "1", "--out", out]);
    let text = fs::read_to_string(dir.path().join("sweep_h_p1.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn invalid_input_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for args in [
        vec!["rcs", "--out", out],
        vec!["rcs", "--sphere", "0", "--torus", "8,4", "--out", out],
        vec!["rcs", "--sphere", "0", "--freq", "0", "--out", out],
        vec![
            "sweep-frequency",
            "--sphere",
            "0",
            "--order",
            "7",
            "--out",
            out,
        ],
        vec!["sweep-h", "--mesh", "missing.msh", "--out", out],
        vec!["sweep-h", "--sphere", "0", "--freq", "1,2", "--out", out],
    ] {
        let o = efie(&args);
        assert!(!o.status.success(), "{args:?} should fail");
    }
}

#[test]
fn reads_gmsh_files() {
    let dir = tempfile::tempdir().unwrap();
    let msh = dir.path().join("tetra.msh");
    fs::write(
        &msh,
        "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n$EndNodes\n\
         $Elements\n4\n1 2 2 0 1 1 3 2\n2 2 2 0 1 1 2 4\n3 2 2 0 1 2 3 4\n4 2 2 0 1 1 4 3\n$EndElements\n",
    )
    .unwrap();
    let out = dir.path().join("o");
    let stdout = ok(&[
        "mesh-info",
        "--mesh",
        msh.to_str().unwrap(),
        "--order",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(stdout.contains("4 cells, 6 internal edges"), "{stdout}");
    let r: Vec<MeshInfoRow> = rows(&out.join("mesh_info.csv"));
    assert_eq!(r[0].n_dofs, 3 * 6 + 6 * 4);
}
