use std::path::{Path as FsPath, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use revmc::formats::{CountTable, Trajectory};
use revmc::inference::{eigenvalues, expected_cycle_probability, timescale, InferenceError};
use revmc::markov::{check_reversible_stationary, default_cycle_cap, kolmogorov_witness};
use revmc::metastable::{run_example1, winner, Example1Config};
use revmc::{log_evidence, Path, TransitionCounts};

use crate::input::{load_chain, load_model, DataArgs};
use crate::CliError;

fn inference_error(e: InferenceError) -> CliError {
    if e.is_precondition() {
        CliError::Precondition(e.to_string())
    } else {
        CliError::Input(e.to_string())
    }
}

fn scale(x: f64, log10: bool) -> f64 {
    if log10 {
        x / std::f64::consts::LN_10
    } else {
        x
    }
}

fn evidences(models: &[PathBuf], data: &DataArgs) -> Result<Vec<(String, f64)>, CliError> {
    let data = data.load()?;
    let loaded = models
        .iter()
        .map(|m| load_model(m, Some(&data)))
        .collect::<Result<Vec<_>, _>>()?;
    loaded
        .par_iter()
        .map(|l| {
            let path = data.path(l.model.order())?;
            let ev = log_evidence(&l.model, &path)
                .map_err(|e| CliError::Input(format!("{}: {e}", l.config.file)))?;
            Ok((l.config.name.clone(), ev))
        })
        .collect()
}

pub fn evidence(model: &FsPath, data: &DataArgs, log10: bool) -> Result<(), CliError> {
    let (name, ev) = evidences(&[model.to_path_buf()], data)?.remove(0);
    println!("{name}\t{:.6}", scale(ev, log10));
    Ok(())
}

pub fn compare(models: &[PathBuf], data: &DataArgs, log10: bool) -> Result<(), CliError> {
    let mut evs = evidences(models, data)?;
    evs.sort_by(|a, b| b.1.total_cmp(&a.1));
    let best = evs[0].1;
    let unit = if log10 { "log10" } else { "ln" };
    println!("model\t{unit}_evidence\t{unit}_bayes_factor_vs_best");
    for (name, ev) in &evs {
        println!("{name}\t{:.6}\t{:.6}", scale(*ev, log10), scale(ev - best, log10));
    }
    Ok(())
}

pub fn simulate(model: &FsPath, steps: usize, seed: u64) -> Result<(), CliError> {
    let l = load_model(model, None)?;
    let path = revmc::simulate(&l.model, steps, seed);
    print!(
        "{}",
        Trajectory {
            alphabet: l.config.alphabet,
            symbols: path.symbols().to_vec(),
        }
        .render()
    );
    Ok(())
}

pub fn simulate_chain(chain: &FsPath, v0: &str, steps: usize, seed: u64) -> Result<(), CliError> {
    let file = load_chain(chain)?;
    let v0 = file.alphabet.seq(v0).map_err(CliError::Input)?;
    let path = file
        .chain
        .simulate(&v0, steps, seed)
        .map_err(|e| CliError::Input(e.to_string()))?;
    print!(
        "{}",
        Trajectory {
            alphabet: file.alphabet,
            symbols: path.symbols().to_vec(),
        }
        .render()
    );
    Ok(())
}

pub fn counts(data: &FsPath, order: usize) -> Result<(), CliError> {
    let t = Trajectory::load(data)?;
    let path = t.path(order).map_err(CliError::Input)?;
    let table = CountTable {
        alphabet: t.alphabet,
        counts: TransitionCounts::from_path(&path),
    };
    print!("{}", table.render());
    Ok(())
}

pub fn realize(counts: &FsPath) -> Result<(), CliError> {
    let table = CountTable::load(counts)?;
    let path = table
        .realize()
        .map_err(|e| CliError::Input(format!("{}: {e}", counts.display())))?;
    print!(
        "{}",
        Trajectory {
            alphabet: table.alphabet,
            symbols: path.symbols().to_vec(),
        }
        .render()
    );
    Ok(())
}

pub fn check_reversible(chain: &FsPath, max_len: Option<usize>) -> Result<(), CliError> {
    let file = load_chain(chain)?;
    let c = &file.chain;
    let cap = max_len.unwrap_or_else(|| default_cycle_cap(c.order()));
    match kolmogorov_witness(c, cap) {
        None => println!("reversible (all closed paths up to length {cap})"),
        Some(w) => println!(
            "NOT reversible (cycle length {} witness: {})",
            w.steps(),
            file.alphabet.format(w.symbols())
        ),
    }
    match check_reversible_stationary(c) {
        Ok(ok) => println!(
            "stationary law: {}",
            if ok { "detailed balance holds" } else { "detailed balance fails" }
        ),
        Err(e) => println!("stationary law: not checked ({e})"),
    }
    Ok(())
}

fn print_timescale(lambda: Complex64, tau_lag: Option<f64>) -> String {
    match tau_lag {
        None => String::new(),
        Some(tau) => {
            let modulus = lambda.norm();
            match timescale(Complex64::new(modulus, 0.0), tau) {
                Ok(t) => format!("\t{t:.6}"),
                Err(_) => "\tNA".to_string(),
            }
        }
    }
}

pub fn spectra(chain: &FsPath, tau_lag: Option<f64>) -> Result<(), CliError> {
    let file = load_chain(chain)?;
    let eig = eigenvalues(&file.chain.dense()).map_err(|e| CliError::Input(e.to_string()))?;
    println!(
        "index\tre\tim\tmodulus{}",
        if tau_lag.is_some() { "\ttimescale" } else { "" }
    );
    for (i, l) in eig.iter().enumerate() {
        println!(
            "{i}\t{:.10}\t{:.10}\t{:.10}{}",
            l.re,
            l.im,
            l.norm(),
            if i == 0 { tau_lag.map_or(String::new(), |_| "\tinf".into()) } else { print_timescale(*l, tau_lag) }
        );
    }
    Ok(())
}

pub fn cycle_expectation(model: &FsPath, cycle: &str) -> Result<(), CliError> {
    let l = load_model(model, None)?;
    let symbols = l.config.alphabet.seq(cycle).map_err(CliError::Input)?;
    let path = Path::from_symbols(l.model.order(), symbols.into_symbols())
        .map_err(|e| CliError::Input(e.to_string()))?;
    let e = expected_cycle_probability(&l.model, &path).map_err(inference_error)?;
    println!("{e:.12}");
    Ok(())
}

pub fn example1(replications: usize, seed: u64, length: usize) -> Result<(), CliError> {
    let config = Example1Config {
        replications,
        length,
        ..Example1Config::default()
    };
    let results = run_example1(&config, seed).map_err(|e| CliError::Input(e.to_string()))?;
    let Some(first) = results.first() else {
        return Ok(());
    };
    let names: Vec<&str> = first.iter().map(|(n, _)| n.as_str()).collect();
    println!("replication\t{}\twinner", names.join("\t"));
    let mut wins = vec![0usize; names.len()];
    for (i, rep) in results.iter().enumerate() {
        let w = winner(rep);
        wins[w] += 1;
        let evs: Vec<String> = rep.iter().map(|(_, e)| format!("{e:.3}")).collect();
        println!("{}\t{}\t{}", seed.wrapping_add(i as u64), evs.join("\t"), names[w]);
    }
    println!();
    println!("model\twins");
    for (n, w) in names.iter().zip(wins) {
        println!("{n}\t{w}");
    }
    Ok(())
}
