use std::fs;
use std::path::Path;

use vlasov_dg::driver::{parse_config, run, Manifest};
use vlasov_dg::RunConfig;

fn config(dir: &Path, extra: &str) -> RunConfig {
    let text = format!(
        "scenario = weibel-choice1\nmesh = 20\nk = 1\nt_end = 1\ndiagnostics_every = 2\nthreads = 1\nsnapshot_times = 0, 0.5, 1\nslice_resolution = 16\noutput_dir = {}\n{extra}",
        dir.display()
    );
    parse_config(&text).unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(2)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn smoke_run_writes_every_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "");
    let summary = run(&cfg).unwrap();

    let csv = fs::read_to_string(tmp.path().join("timeseries.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# vlasov-dg timeseries schema_version=1"));
    assert!(lines.next().unwrap().starts_with("t,mass,K1,K2,Ee1,Ee2,Em,Etot,P1,P2,L2f,theta1,theta2,theta3,logFM_E1_1"));
    let rows = data_rows(&csv);
    assert!(rows.len() >= 2);
    assert_eq!(rows.len(), summary.steps / 2 + 2);
    assert!(rows.windows(2).all(|w| w[0][0] <= w[1][0]));
    assert!(rows.iter().all(|r| r.len() == 26 && r.iter().all(|v| v.is_finite())));
    assert_eq!(rows.last().unwrap()[0], 1.0);

    for t in ["0.000", "0.500", "1.000"] {
        let fields = fs::read_to_string(tmp.path().join(format!("fields_t{t}.csv"))).unwrap();
        // 20 cells times 2 nodes plus two header lines
        assert_eq!(fields.lines().count(), 42);
        let slice = fs::read_to_string(tmp.path().join(format!("slice_x0.157_t{t}.csv"))).unwrap();
        assert_eq!(slice.lines().count(), 2 + 16 * 16);
    }

    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(tmp.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(manifest.config, cfg);
    assert_eq!(manifest.steps, Some(summary.steps));
    assert_eq!(parse_config(&manifest.config_text).unwrap(), cfg);
    let json = fs::read_to_string(tmp.path().join("run.json")).unwrap();
    assert_eq!(RunConfig::from_manifest(&json).unwrap(), cfg);
}

#[test]
fn single_thread_reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(&config(a.path(), "")).unwrap();
    run(&config(b.path(), "")).unwrap();
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 7);
    for name in names {
        if name == "run.json" {
            continue; // records the output directory
        }
        let x = fs::read(a.path().join(&name)).unwrap();
        let y = fs::read(b.path().join(&name)).unwrap();
        assert!(x == y, "{name:?} differs between reruns");
    }
}

#[test]
fn runaway_step_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!(
        "scenario = vacuum-maxwell\nmesh = 2\nn_x = 8\nk = 1\ndt = 50\nt_end = 100000\noutput_dir = {}\n",
        tmp.path().display()
    );
    let err = run(&parse_config(&text).unwrap()).unwrap_err();
    assert!(err.to_string().contains("non-finite"), "{err}");
    // rows written before the failure survive
    let csv = fs::read_to_string(tmp.path().join("timeseries.csv")).unwrap();
    assert!(!data_rows(&csv).is_empty());
}
