use std::fs;

use revmc::formats::{Alphabet, CountTable, FormatError, ModelConfig, Trajectory, WeightSpec};
use revmc::{simulate, uniform_model, HistorySet, Seq, TransitionCounts};

fn seq(s: &[u32]) -> Seq {
    Seq::new(s.to_vec()).unwrap()
}

#[test]
fn config_with_weight_file() {
    let dir = tempfile::tempdir().unwrap();
    // reversible weights on 2-grams over {a, b}
    fs::write(dir.path().join("w.tsv"), "# gram\tweight\na a\t1\na b\t0.5\nb a\t0.5\nb b\t2\n").unwrap();
    let cfg_path = dir.path().join("model.cfg");
    fs::write(
        &cfg_path,
        "order = 1\nalphabet = a,b\nweights = file:w.tsv\nc = 0.25  # reinforcement\nv0 = b\n",
    )
    .unwrap();
    let cfg = ModelConfig::load(&cfg_path).unwrap();
    assert_eq!(cfg.name, "model");
    assert_eq!(cfg.weights, WeightSpec::File(dir.path().join("w.tsv")));
    let model = cfg.build(None).unwrap();
    assert_eq!(model.v0(), &seq(&[1]));
    assert_eq!(model.weights().get(&seq(&[1, 1])), 2.0);

    // unbalanced weights are not a valid prior
    fs::write(dir.path().join("w.tsv"), "a a\t1\na b\t0.5\nb a\t0.25\nb b\t2\n").unwrap();
    let err = ModelConfig::load(&cfg_path).unwrap().build(None).unwrap_err();
    assert!(matches!(err, FormatError::File { .. } | FormatError::Model(_)), "{err}");
}

#[test]
fn config_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.cfg");
    fs::write(&p, "order = 2\nalphabet = 3\nweights = gaussian\nc = 1\nv0 = 0 0\n").unwrap();
    let err = ModelConfig::load(&p).unwrap_err().to_string();
    assert!(err.contains("line 3"), "{err}");
    fs::write(&p, "order = 2\nalphabet = 3\nweights = uniform:1\nc = 1\n").unwrap();
    assert!(ModelConfig::load(&p).unwrap_err().to_string().contains("v0"));
    let missing = ModelConfig::load(&dir.path().join("nope.cfg")).unwrap_err();
    assert!(matches!(missing, FormatError::Io { .. }), "{missing}");
}

#[test]
fn counts_of_a_simulated_path_realize_to_an_equivalent_path() {
    let model = uniform_model(3, 2, HistorySet::all_singletons(3), seq(&[0, 2]), 1.0, 0.5).unwrap();
    let path = simulate(&model, 400, 8);
    let table = CountTable {
        alphabet: Alphabet::sized(3),
        counts: TransitionCounts::from_path(&path),
    };
    let reread = CountTable::parse(&table.render(), "counts").unwrap();
    assert_eq!(reread.counts, table.counts);
    let realized = reread.realize().unwrap();
    assert_eq!(realized.steps(), path.steps());
    assert_eq!(realized.final_state(), path.final_state());
    assert_eq!(TransitionCounts::from_path(&realized), table.counts);
    assert!(
        (revmc::log_evidence(&model, &realized).unwrap() - revmc::log_evidence(&model, &path).unwrap()).abs() < 1e-9
    );
}

#[test]
fn trajectory_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.txt");
    fs::write(&p, "# alphabet: x,y,z\nx y z\nz\n").unwrap();
    let t = Trajectory::load(&p).unwrap();
    assert_eq!(t.symbols, vec![0, 1, 2, 2]);
    assert_eq!(t.path(2).unwrap().steps(), 2);
    fs::write(&p, "# alphabet: x,y\nx w\n").unwrap();
    assert!(Trajectory::load(&p).unwrap_err().to_string().contains("line 2"));
}
