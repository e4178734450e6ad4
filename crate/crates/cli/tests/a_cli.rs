use std::path::Path;
use std::process::{Command, Output};

const HEADER: &str = "workload_id,ref_size,query_size,num_queries,num_crossbars,rd_lat,wr_lat,rd_energy,wr_energy,time_ns,energy_pJ,mean_writes_per_cell,max_writes_per_cell";

fn pumdtw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pumdtw"))
        .args(args)
        .env_remove("PUMDTW_PRESET_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(pumdtw(&["--help"]).status.code(), Some(0));
    assert_eq!(pumdtw(&["--version"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(pumdtw(&["run", "--bogus"]).status.code(), Some(1));
    assert_eq!(pumdtw(&["run", "--metric", "cosine"]).status.code(), Some(1));
    assert_eq!(pumdtw(&["run", "--rd-lat", "-1"]).status.code(), Some(1));
    assert_eq!(pumdtw(&["sweep", "--dtype", "fp32"]).status.code(), Some(1));
    assert_eq!(pumdtw(&["run", "--preset", "nope"]).status.code(), Some(1));
}

#[test]
fn missing_input_exits_two() {
    let o = pumdtw(&["run", "--ref", "/nonexistent/ref.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/ref.csv"));
}

#[test]
fn saturating_input_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let r = dir.path().join("r.csv");
    let q = dir.path().join("q.csv");
    let big: Vec<String> = (0..64).map(|i| if i % 2 == 0 { "127" } else { "-128" }.to_string()).collect();
    std::fs::write(&r, big.join("\n")).unwrap();
    std::fs::write(&q, big.iter().rev().cloned().collect::<Vec<_>>().join("\n")).unwrap();
    let o = pumdtw(&[
        "run", "--dtype", "int8", "--metric", "square_diff", "--ref", p(&r), "--queries", p(&q),
        "--query-size", "64", "--num-queries", "1", "--crossbars", "1",
    ]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn run_reports_one_row() {
    let o = pumdtw(&[
        "run", "--ref-size", "300", "--query-size", "24", "--num-queries", "5", "--crossbars", "1",
        "--dtype", "int16", "--metric", "square_diff", "--seed", "3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], HEADER);
    assert!(lines[1].starts_with("run,300,24,5,1,5,10,50,70,"));
}

#[test]
fn files_config_and_distances() {
    let dir = tempfile::tempdir().unwrap();
    let r = dir.path().join("r.bin");
    let q = dir.path().join("q.csv");
    assert!(pumdtw(&["gen", "--len", "200", "--dtype", "int16", "--seed", "1", "--out", p(&r)]).status.success());
    assert!(pumdtw(&["gen", "--len", "100", "--dtype", "int16", "--seed", "2", "--out", p(&q)]).status.success());
    let cfg = dir.path().join("run.conf");
    std::fs::write(
        &cfg,
        format!(
            "# test run\ndtype = int16\nref = {}\nqueries = {}\nquery-size = 20\nnum-queries = 4\nstride = 20\ncrossbars = 1\nthreshold = 100000\n",
            p(&r),
            p(&q)
        ),
    )
    .unwrap();
    let d = dir.path().join("d.csv");
    let out = dir.path().join("report.csv");
    let o = pumdtw(&["run", "--config", p(&cfg), "--distances", p(&d), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let dist = std::fs::read_to_string(&d).unwrap();
    let rows: Vec<&str> = dist.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f[1], f[2], "oracle and crossbar agree");
        assert_eq!(f[3], "false");
    }
    assert!(std::fs::read_to_string(&out).unwrap().starts_with(HEADER));
    // explicit flags override the config file
    let o = pumdtw(&["run", "--config", p(&cfg), "--num-queries", "2"]);
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("run,200,20,2,"));
}

#[test]
fn preset_directory() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("lab.conf"), "crossbars = 3\nwr-lat = 7\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_pumdtw"))
        .args(["run", "--preset", "lab", "--ref-size", "100", "--query-size", "10", "--num-queries", "2"])
        .env("PUMDTW_PRESET_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("run,100,10,2,3,5,7,"));
}

#[test]
fn float_run_is_oracle_only() {
    let o = pumdtw(&["run", "--dtype", "fp64", "--ref-size", "64", "--query-size", "8", "--num-queries", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("query,oracle,crossbar,anomaly\n"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("reference path only"));
}

#[test]
fn self_join_run() {
    let o = pumdtw(&[
        "run", "--mode", "self_join", "--ref-size", "48", "--query-size", "8", "--crossbars", "1", "--dtype", "int16",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("run,48,8,41,1,"));
}

#[test]
fn trace_lines_on_stderr() {
    let o = pumdtw(&["run", "--ref-size", "16", "--query-size", "4", "--num-queries", "1", "--crossbars", "1", "--trace"]);
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(err.lines().filter(|l| l.starts_with("{\"replica\"")).count(), 4 + 16 - 1);
}

#[test]
fn sweep_grid_and_determinism() {
    let args = [
        "sweep", "--workloads", "256:16:8", "--tech-grid", "latency", "--crossbars", "1,2", "--engine", "simulate",
    ];
    let a = pumdtw(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let text = stdout(&a);
    assert_eq!(text.lines().next(), Some(HEADER));
    assert_eq!(text.lines().count(), 1 + 2 * 25);
    assert_eq!(text, stdout(&pumdtw(&args)));
    assert_eq!(pumdtw(&["sweep", "--workloads", "1:2"]).status.code(), Some(1));
}
