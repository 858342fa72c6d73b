//! Loading models and data from the command line.

use std::path::{Path as FsPath, PathBuf};

use clap::Args;
use revmc::formats::{Alphabet, ChainFile, CountTable, ModelConfig, Trajectory};
use revmc::{Path, PriorModel};

use crate::CliError;

/// Observed data: a trajectory or a transition-count table.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct DataArgs {
    /// Trajectory file (whitespace-separated symbols)
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Transition-count table (TSV with a `# v0:` line)
    #[arg(long)]
    pub counts: Option<PathBuf>,
}

pub struct Data {
    pub alphabet: Alphabet,
    /// Symbols of the observed path, before an order is imposed.
    pub symbols: Vec<revmc::Symbol>,
    /// Order fixed by a count table.
    pub order: Option<usize>,
}

impl DataArgs {
    pub fn load(&self) -> Result<Data, CliError> {
        if let Some(p) = &self.data {
            let t = Trajectory::load(p)?;
            return Ok(Data {
                alphabet: t.alphabet,
                symbols: t.symbols,
                order: None,
            });
        }
        let p = self.counts.as_ref().expect("clap enforces one data source");
        let table = CountTable::load(p)?;
        let path = table
            .realize()
            .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
        Ok(Data {
            alphabet: table.alphabet,
            symbols: path.symbols().to_vec(),
            order: Some(path.order()),
        })
    }
}

impl Data {
    pub fn path(&self, order: usize) -> Result<Path, CliError> {
        if let Some(r) = self.order {
            if r != order {
                return Err(CliError::Input(format!(
                    "count table has order {r}, model has order {order}"
                )));
            }
        }
        Path::from_symbols(order, self.symbols.clone())
            .map_err(|e| CliError::Input(format!("data: {e}")))
    }
}

pub struct LoadedModel {
    pub config: ModelConfig,
    pub model: PriorModel,
}

/// Loads a model config, taking `v0` from `data` when the config says so.
pub fn load_model(path: &FsPath, data: Option<&Data>) -> Result<LoadedModel, CliError> {
    let config = ModelConfig::load(path)?;
    let data_v0 = match data {
        Some(d) => {
            if !config.alphabet.compatible(&d.alphabet) {
                return Err(CliError::Input(format!(
                    "{}: alphabet does not match the data",
                    path.display()
                )));
            }
            Some(d.path(config.order)?.initial_state())
        }
        None => None,
    };
    let model = config.build(data_v0.as_ref())?;
    Ok(LoadedModel { config, model })
}

pub fn load_chain(path: &FsPath) -> Result<ChainFile, CliError> {
    Ok(ChainFile::load(path)?)
}
