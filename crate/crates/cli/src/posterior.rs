//! The `sample-posterior` command.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path as FsPath, PathBuf};

use num_complex::Complex64;
use revmc::inference::{histogram, sample_posterior_stationary, stationary_to_transition, timescale};
use revmc::WalkState;

use crate::input::{load_model, DataArgs};
use crate::CliError;

/// Non-trivial eigenvalues reported per draw.
const TOP: usize = 5;

pub struct Options {
    pub model: PathBuf,
    pub data: DataArgs,
    pub samples: usize,
    pub steps: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub tau_lag: Option<f64>,
    pub gnuplot: bool,
    pub bins: usize,
}

fn write(path: &FsPath, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn run(opts: Options) -> Result<(), CliError> {
    if opts.samples == 0 || opts.steps == 0 {
        return Err(CliError::Input("--samples and --steps must be positive".into()));
    }
    if opts.tau_lag.is_some_and(|t| !(t > 0.0)) {
        return Err(CliError::Input("--tau-lag must be positive".into()));
    }
    let data = opts.data.load()?;
    let loaded = load_model(&opts.model, Some(&data))?;
    let model = &loaded.model;
    let alphabet = &loaded.config.alphabet;
    let path = data.path(model.order())?;
    let posterior = WalkState::after(model, &path).map_err(|e| CliError::Input(format!("data: {e}")))?;

    fs::create_dir_all(&opts.out).map_err(|source| CliError::Io {
        path: opts.out.clone(),
        source,
    })?;
    let samples = sample_posterior_stationary(&posterior, opts.steps, opts.samples, opts.seed);

    let m = model.alphabet_size();
    let mut summary = String::from("sample");
    for s in 0..m as u32 {
        write!(summary, "\tmarginal_{}", alphabet.name(s)).unwrap();
    }
    for k in 1..=TOP {
        write!(summary, "\tlambda_{k}").unwrap();
    }
    if opts.tau_lag.is_some() {
        for k in 1..=TOP {
            write!(summary, "\ttimescale_{k}").unwrap();
        }
    }
    summary.push('\n');

    let mut moduli: Vec<Vec<f64>> = vec![Vec::new(); TOP];
    for s in &samples {
        let mut table = String::from("gram\tprobability\n");
        for (code, p) in s.values().iter().enumerate() {
            writeln!(table, "{}\t{p:.12e}", alphabet.format(s.gram(code).symbols())).unwrap();
        }
        write(&opts.out.join(format!("sample_{:04}.tsv", s.index)), &table)?;

        write!(summary, "{}", s.index).unwrap();
        for p in s.lumped_marginal(0) {
            write!(summary, "\t{p:.8}").unwrap();
        }
        let eig = stationary_to_transition(s)
            .map_err(|e| CliError::Input(e.to_string()))?
            .eigenvalues()
            .map_err(|e| CliError::Input(e.to_string()))?;
        let top: Vec<f64> = eig.iter().skip(1).take(TOP).map(|l| l.norm()).collect();
        for k in 0..TOP {
            match top.get(k) {
                Some(x) => {
                    moduli[k].push(*x);
                    write!(summary, "\t{x:.8}").unwrap();
                }
                None => summary.push_str("\tNA"),
            }
        }
        if let Some(tau) = opts.tau_lag {
            for k in 0..TOP {
                match top.get(k).map(|&x| timescale(Complex64::new(x, 0.0), tau)) {
                    Some(Ok(t)) => write!(summary, "\t{t:.6}").unwrap(),
                    _ => summary.push_str("\tNA"),
                }
            }
        }
        summary.push('\n');
    }
    write(&opts.out.join("summary.tsv"), &summary)?;

    if opts.gnuplot {
        let hists: Vec<Vec<(f64, usize)>> = moduli
            .iter()
            .map(|v| histogram(v, opts.bins.max(1), 0.0, 1.0))
            .collect();
        let mut dat = String::from("# bin_centre");
        for k in 1..=TOP {
            write!(dat, "\tlambda_{k}").unwrap();
        }
        dat.push('\n');
        for b in 0..opts.bins.max(1) {
            write!(dat, "{:.6}", hists[0][b].0).unwrap();
            for h in &hists {
                write!(dat, "\t{}", h[b].1).unwrap();
            }
            dat.push('\n');
        }
        write(&opts.out.join("eigenvalues.dat"), &dat)?;
        let mut gp = String::from(
            "set terminal pngcairo size 900,600\nset output 'eigenvalues.png'\n\
             set xlabel '|lambda|'\nset ylabel 'draws'\nset style fill transparent solid 0.5\n",
        );
        gp.push_str("plot ");
        let series: Vec<String> = (1..=TOP)
            .map(|k| format!("'eigenvalues.dat' using 1:{} with boxes title 'lambda_{k}'", k + 1))
            .collect();
        gp.push_str(&series.join(", \\\n     "));
        gp.push('\n');
        write(&opts.out.join("eigenvalues.gp"), &gp)?;
    }

    println!(
        "wrote {} draws of {} steps to {}",
        samples.len(),
        opts.steps,
        opts.out.display()
    );
    Ok(())
}
