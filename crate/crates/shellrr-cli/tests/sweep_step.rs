//! Step sweep: the aggregate must carry a Richardson order estimate.

use std::path::Path;
use std::process::Command;

#[test]
fn step_sweep_reports_convergence_order() {
    let tmp = tempfile::tempdir().unwrap();
    let base = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/gyration_short.toml");
    let text = std::fs::read_to_string(base)
        .unwrap()
        .replace("s_end = 100.0", "s_end = 20.0");
    let scenario = tmp.path().join("scenario.toml");
    std::fs::write(&scenario, text).unwrap();

    let out = Command::new(env!("CARGO_BIN_EXE_shellrr"))
        .args([
            "--quiet",
            "sweep",
            "--scenario",
            scenario.to_str().unwrap(),
            "--out",
            "sweep",
            "--parameter",
            "step",
            "--values",
            "0.05,0.025,0.0125",
        ])
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let agg = std::fs::read_to_string(tmp.path().join("sweep/aggregate.csv")).unwrap();
    let order_line = agg
        .lines()
        .find(|l| l.starts_with("# step convergence order estimate"))
        .expect("order footer present");
    let order: f64 = order_line
        .rsplit('=')
        .next()
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(order > 3.0, "estimated order {order} from: {order_line}");
}
