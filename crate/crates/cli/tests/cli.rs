use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn revmc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_revmc"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const DIPEPTIDE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/data/dipeptide_counts.tsv");

fn write_configs(dir: &Path) {
    fs::write(
        dir.join("second.cfg"),
        "name = second order\norder = 2\nalphabet = 5\nhistories = none\nweights = uniform:2\nc = 1\nv0 = data\n",
    )
    .unwrap();
    fs::write(
        dir.join("first.cfg"),
        "name = first order\norder = 2\nalphabet = 5\nhistories = 0,1,2,3,4\nweights = uniform:2\nc = 1\nv0 = data\n",
    )
    .unwrap();
    fs::write(
        dir.join("two.cfg"),
        "order = 1\nalphabet = a,b\nweights = uniform:0.25\nc = 0.05\nv0 = a\n",
    )
    .unwrap();
}

#[test]
fn evidence_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    write_configs(dir.path());
    let o = revmc(&["evidence", "--model", "second.cfg", "--counts", DIPEPTIDE], dir.path());
    assert!(o.status.success(), "{o:?}");
    assert_eq!(stdout(&o).trim(), "second order\t-1762.518652");

    let o = revmc(
        &["compare", "--model", "first.cfg", "second.cfg", "--counts", DIPEPTIDE],
        dir.path(),
    );
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("second order\t-1762.518652\t0.000000"));
    let cols: Vec<&str> = lines[2].split('\t').collect();
    assert_eq!(cols[0], "first order");
    let bf: f64 = cols[2].parse().unwrap();
    assert!((bf - (-1778.335843 + 1762.518652)).abs() < 2e-6, "{bf}");
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    write_configs(dir.path());
    let o = revmc(&["evidence", "--model", "missing.cfg", "--counts", DIPEPTIDE], dir.path());
    assert_eq!(o.status.code(), Some(2));
    // named alphabet against an integer count table
    let o = revmc(&["evidence", "--model", "two.cfg", "--counts", DIPEPTIDE], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = revmc(&["simulate", "--model", "two.cfg", "--steps", "5"], dir.path());
    assert_eq!(o.status.code(), Some(2), "seed is required");
    let o = revmc(&["example1", "--replications", "2"], dir.path());
    assert_eq!(o.status.code(), Some(2), "seed is required");
}

#[test]
fn cycle_expectation_and_precondition() {
    let dir = tempfile::tempdir().unwrap();
    write_configs(dir.path());
    let o = revmc(&["cycle-expectation", "--model", "two.cfg", "--cycle", "a b a"], dir.path());
    assert!(o.status.success());
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 3.0 / 11.0).abs() < 1e-12, "{v}");

    fs::write(
        dir.path().join("strong.cfg"),
        "order = 1\nalphabet = a,b\nweights = uniform:0.25\nc = 0.1\nv0 = a\n",
    )
    .unwrap();
    let o = revmc(&["cycle-expectation", "--model", "strong.cfg", "--cycle", "a b a"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("3c"));
}

#[test]
fn simulate_counts_realize_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    write_configs(dir.path());
    let sim = revmc(&["simulate", "--model", "two.cfg", "--steps", "60", "--seed", "4"], dir.path());
    assert!(sim.status.success());
    assert_eq!(
        stdout(&sim),
        stdout(&revmc(&["simulate", "--model", "two.cfg", "--steps", "60", "--seed", "4"], dir.path()))
    );
    fs::write(dir.path().join("t.txt"), stdout(&sim)).unwrap();
    let counts = revmc(&["counts", "--data", "t.txt", "--order", "1"], dir.path());
    assert!(counts.status.success());
    fs::write(dir.path().join("c.tsv"), stdout(&counts)).unwrap();
    let real = revmc(&["realize", "--counts", "c.tsv"], dir.path());
    assert!(real.status.success());
    fs::write(dir.path().join("r.txt"), stdout(&real)).unwrap();
    let again = revmc(&["counts", "--data", "r.txt", "--order", "1"], dir.path());
    assert_eq!(stdout(&again), stdout(&counts));

    // both paths have the same evidence
    let e1 = revmc(&["evidence", "--model", "two.cfg", "--data", "t.txt"], dir.path());
    let e2 = revmc(&["evidence", "--model", "two.cfg", "--data", "r.txt"], dir.path());
    assert!(e1.status.success());
    assert_eq!(stdout(&e1), stdout(&e2));
}

#[test]
fn reversibility_and_spectra() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("cyc.tsv"),
        "from\tto\tp\n0\t1\t0.9\n0\t2\t0.1\n1\t2\t0.9\n1\t0\t0.1\n2\t0\t0.9\n2\t1\t0.1\n",
    )
    .unwrap();
    fs::write(
        dir.path().join("sym.tsv"),
        "0\t0\t0.5\n0\t1\t0.5\n1\t0\t0.25\n1\t1\t0.75\n",
    )
    .unwrap();
    let o = revmc(&["check-reversible", "--chain", "cyc.tsv"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("NOT reversible (cycle length 3 witness: 0 1 2 0)"), "{}", stdout(&o));
    let o = revmc(&["check-reversible", "--chain", "sym.tsv"], dir.path());
    assert!(stdout(&o).starts_with("reversible"));

    let o = revmc(&["spectra", "--chain", "sym.tsv", "--tau-lag", "1"], dir.path());
    assert!(o.status.success());
    let out = stdout(&o);
    let second: Vec<&str> = out.lines().nth(2).unwrap().split('\t').collect();
    // eigenvalues 1 and 0.25
    assert!((second[1].parse::<f64>().unwrap() - 0.25).abs() < 1e-9);
    let t: f64 = second[4].parse().unwrap();
    assert!((t + 1.0 / 0.25f64.ln()).abs() < 1e-5);
}

#[test]
fn sample_posterior_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    write_configs(dir.path());
    fs::write(dir.path().join("t.txt"), "# alphabet: a,b\na b b a a a b b b a b\n").unwrap();
    let args = [
        "sample-posterior", "--model", "two.cfg", "--data", "t.txt", "--samples", "6", "--steps", "500", "--seed",
        "9", "--out", "post", "--tau-lag", "2", "--gnuplot",
    ];
    let o = revmc(&args, dir.path());
    assert!(o.status.success(), "{o:?}");
    let post = dir.path().join("post");
    for i in 0..6 {
        let s = fs::read_to_string(post.join(format!("sample_{i:04}.tsv"))).unwrap();
        let total: f64 = s.lines().skip(1).map(|l| l.split('\t').nth(1).unwrap().parse::<f64>().unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
    let summary = fs::read_to_string(post.join("summary.tsv")).unwrap();
    assert_eq!(summary.lines().count(), 7);
    assert!(summary.lines().next().unwrap().contains("timescale_1"));
    assert!(post.join("eigenvalues.gp").exists() && post.join("eigenvalues.dat").exists());

    // same seed, same draws
    let first = fs::read_to_string(post.join("sample_0003.tsv")).unwrap();
    let o = revmc(&args, dir.path());
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(post.join("sample_0003.tsv")).unwrap(), first);
}

#[test]
fn example1_reports_winners() {
    let dir = tempfile::tempdir().unwrap();
    let o = revmc(&["example1", "--seed", "2"], dir.path());
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("replication\tfirst order\tmemory on 0\tmemory on 1\tmemory on 2\tsecond order\twinner"));
    let wins: usize = out
        .lines()
        .skip_while(|l| !l.starts_with("model\twins"))
        .skip(1)
        .map(|l| l.split('\t').nth(1).unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(wins, 30);
    let slow: usize = out
        .lines()
        .find(|l| l.starts_with("memory on 1\t"))
        .and_then(|l| l.split('\t').nth(1))
        .unwrap()
        .parse()
        .unwrap();
    assert!(slow > 15, "memory on the slow macrostate should win most replications:\n{out}");
}
