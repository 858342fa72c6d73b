//! Plain-text input formats.
//!
//! * Trajectory: whitespace-separated symbol tokens; `#` starts a comment
//!   line; an optional `# alphabet: a,b,c` line maps names to symbols.
//! * Count table: tab-separated `u_1 … u_r <TAB> v_1 … v_r <TAB> count`
//!   rows after a header row, with a `# v0: …` line naming the initial state.
//! * Chain: the same layout with transition probabilities instead of counts.
//! * Model config: `key = value` lines (see [`ModelConfig`]).

use std::fmt;
use std::fs;
use std::path::{Path as FsPath, PathBuf};

use thiserror::Error;

use crate::counts::{CountsError, TransitionCounts};
use crate::gram::GramSpace;
use crate::markov::{ChainError, OrderRChain};
use crate::path::Path;
use crate::prior::{ModelError, ModelParams, PriorModel, StationaryWeights};
use crate::sequence::{HistorySet, Seq, Symbol};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{file}: {source}")]
    Io {
        file: String,
        source: std::io::Error,
    },
    #[error("{file}: line {line}: {message}")]
    Line {
        file: String,
        line: usize,
        message: String,
    },
    #[error("{file}: {message}")]
    File { file: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn line_err(file: &str, line: usize, message: impl fmt::Display) -> FormatError {
    FormatError::Line {
        file: file.to_string(),
        line,
        message: message.to_string(),
    }
}

fn file_err(file: &str, message: impl fmt::Display) -> FormatError {
    FormatError::File {
        file: file.to_string(),
        message: message.to_string(),
    }
}

fn read(path: &FsPath) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        file: path.display().to_string(),
        source,
    })
}

/// Symbol names, or plain integers when no names are given.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Alphabet {
    names: Option<Vec<String>>,
    size: Option<usize>,
}

impl Alphabet {
    pub fn integers() -> Self {
        Alphabet::default()
    }

    pub fn sized(size: usize) -> Self {
        Alphabet {
            names: None,
            size: Some(size),
        }
    }

    pub fn named(names: Vec<String>) -> Self {
        let size = Some(names.len());
        Alphabet {
            names: Some(names),
            size,
        }
    }

    /// `"5"` gives five integer symbols, `"a,b,c"` three named ones.
    pub fn parse(spec: &str) -> Result<Self, String> {
        let spec = spec.trim();
        if let Ok(n) = spec.parse::<usize>() {
            if n == 0 {
                return Err("alphabet size must be positive".into());
            }
            return Ok(Alphabet::sized(n));
        }
        let names: Vec<String> = spec.split(',').map(|s| s.trim().to_string()).collect();
        if names.iter().any(String::is_empty) {
            return Err(format!("empty symbol name in alphabet {spec:?}"));
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(format!("duplicate symbol name {n:?}"));
            }
        }
        Ok(Alphabet::named(names))
    }

    pub fn size(&self) -> Option<usize> {
        self.size
    }

    pub fn symbol(&self, token: &str) -> Result<Symbol, String> {
        match &self.names {
            Some(names) => names
                .iter()
                .position(|n| n == token)
                .map(|i| i as Symbol)
                .ok_or_else(|| format!("unknown symbol {token:?}")),
            None => {
                let s: Symbol = token
                    .parse()
                    .map_err(|_| format!("expected an integer symbol, got {token:?}"))?;
                match self.size {
                    Some(n) if s as usize >= n => {
                        Err(format!("symbol {s} outside the alphabet of size {n}"))
                    }
                    _ => Ok(s),
                }
            }
        }
    }

    pub fn name(&self, s: Symbol) -> String {
        match &self.names {
            Some(names) => names[s as usize].clone(),
            None => s.to_string(),
        }
    }

    pub fn format(&self, symbols: &[Symbol]) -> String {
        symbols
            .iter()
            .map(|&s| self.name(s))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn seq(&self, text: &str) -> Result<Seq, String> {
        let symbols = text
            .split_whitespace()
            .map(|t| self.symbol(t))
            .collect::<Result<Vec<_>, _>>()?;
        Seq::new(symbols).map_err(|_| format!("empty sequence {text:?}"))
    }

    /// The `# alphabet: …` header line, if names are set.
    pub fn header(&self) -> Option<String> {
        self.names.as_ref().map(|n| format!("# alphabet: {}", n.join(",")))
    }

    /// Checks that `other` (e.g. from a data file) agrees with this one.
    pub fn compatible(&self, other: &Alphabet) -> bool {
        match (&self.names, &other.names) {
            (Some(a), Some(b)) => a == b,
            (None, None) => true,
            _ => false,
        }
    }
}

fn header_value<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let rest = line.strip_prefix('#')?.trim_start();
    let rest = rest.strip_prefix(key)?.trim_start();
    Some(rest.strip_prefix(':')?.trim())
}

/// A symbol trajectory with its alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub alphabet: Alphabet,
    pub symbols: Vec<Symbol>,
}

impl Trajectory {
    pub fn parse(text: &str, file: &str) -> Result<Self, FormatError> {
        let mut alphabet = Alphabet::integers();
        let mut symbols = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.starts_with('#') {
                if let Some(spec) = header_value(line, "alphabet") {
                    if !symbols.is_empty() {
                        return Err(line_err(file, i + 1, "alphabet header after data"));
                    }
                    alphabet = Alphabet::parse(spec).map_err(|e| line_err(file, i + 1, e))?;
                }
                continue;
            }
            for token in line.split_whitespace() {
                symbols.push(alphabet.symbol(token).map_err(|e| line_err(file, i + 1, e))?);
            }
        }
        if symbols.is_empty() {
            return Err(file_err(file, "trajectory has no symbols"));
        }
        Ok(Trajectory { alphabet, symbols })
    }

    pub fn load(path: &FsPath) -> Result<Self, FormatError> {
        Trajectory::parse(&read(path)?, &path.display().to_string())
    }

    pub fn path(&self, order: usize) -> Result<Path, String> {
        Path::from_symbols(order, self.symbols.clone()).map_err(|e| e.to_string())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(h) = self.alphabet.header() {
            out.push_str(&h);
            out.push('\n');
        }
        for chunk in self.symbols.chunks(30) {
            out.push_str(&self.alphabet.format(chunk));
            out.push('\n');
        }
        out
    }
}

/// Rows `(u, v, value)` of a count or chain table.
struct Table {
    alphabet: Alphabet,
    v0: Option<Seq>,
    rows: Vec<(usize, Seq, Seq, String)>,
}

fn parse_table(text: &str, file: &str) -> Result<Table, FormatError> {
    let mut alphabet = Alphabet::integers();
    let mut v0_text = None;
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        if line.trim_start().starts_with('#') {
            let t = line.trim();
            if let Some(spec) = header_value(t, "alphabet") {
                alphabet = Alphabet::parse(spec).map_err(|e| line_err(file, lineno, e))?;
            } else if let Some(v) = header_value(t, "v0") {
                v0_text = Some((lineno, v.to_string()));
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(line_err(
                file,
                lineno,
                format!("expected 3 tab-separated fields, got {}", fields.len()),
            ));
        }
        if !seen_header {
            seen_header = true;
            if fields[2].trim().parse::<f64>().is_err() {
                continue;
            }
        }
        let u = alphabet.seq(fields[0]).map_err(|e| line_err(file, lineno, e))?;
        let v = alphabet.seq(fields[1]).map_err(|e| line_err(file, lineno, e))?;
        rows.push((lineno, u, v, fields[2].trim().to_string()));
    }
    let v0 = match v0_text {
        Some((lineno, text)) => Some(alphabet.seq(&text).map_err(|e| line_err(file, lineno, e))?),
        None => None,
    };
    Ok(Table { alphabet, v0, rows })
}

/// A transition-count table with its initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    pub alphabet: Alphabet,
    pub counts: TransitionCounts,
}

impl CountTable {
    pub fn parse(text: &str, file: &str) -> Result<Self, FormatError> {
        let table = parse_table(text, file)?;
        let v0 = table
            .v0
            .ok_or_else(|| file_err(file, "missing \"# v0: …\" line"))?;
        let mut counts = TransitionCounts::new(v0);
        for (lineno, u, v, value) in table.rows {
            let n: u64 = value
                .parse()
                .map_err(|_| line_err(file, lineno, format!("count {value:?} is not a nonnegative integer")))?;
            counts.add(u, v, n).map_err(|e| line_err(file, lineno, e))?;
        }
        Ok(CountTable {
            alphabet: table.alphabet,
            counts,
        })
    }

    pub fn load(path: &FsPath) -> Result<Self, FormatError> {
        CountTable::parse(&read(path)?, &path.display().to_string())
    }

    pub fn render(&self) -> String {
        let a = &self.alphabet;
        let mut out = String::new();
        if let Some(h) = a.header() {
            out.push_str(&h);
            out.push('\n');
        }
        out.push_str(&format!("# v0: {}\n", a.format(self.counts.v0().symbols())));
        out.push_str("from\tto\tcount\n");
        for (u, v, n) in self.counts.iter() {
            out.push_str(&format!("{}\t{}\t{n}\n", a.format(u.symbols()), a.format(v.symbols())));
        }
        out
    }

    pub fn realize(&self) -> Result<Path, CountsError> {
        self.counts.realize()
    }
}

/// An order-`r` chain given as `u <TAB> v <TAB> p(v|u)` rows; missing rows
/// are zero. The alphabet size comes from a `# alphabet:` line or from the
/// largest symbol used.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainFile {
    pub alphabet: Alphabet,
    pub chain: OrderRChain,
}

impl ChainFile {
    pub fn parse(text: &str, file: &str) -> Result<Self, FormatError> {
        let table = parse_table(text, file)?;
        let Some(first) = table.rows.first() else {
            return Err(file_err(file, "chain has no transitions"));
        };
        let order = first.1.len();
        let m = match table.alphabet.size() {
            Some(m) => m,
            None => {
                table
                    .rows
                    .iter()
                    .flat_map(|(_, u, v, _)| u.symbols().iter().chain(v.symbols()))
                    .copied()
                    .max()
                    .unwrap_or(0) as usize
                    + 1
            }
        };
        let space = GramSpace::new(m, order).ok_or_else(|| file_err(file, "chain too large"))?;
        let mut probs = vec![0.0; space.count(order + 1)];
        for (lineno, u, v, value) in &table.rows {
            if u.len() != order || v.len() != order {
                return Err(line_err(file, *lineno, format!("states must have length {order}")));
            }
            if u.symbols()[1..] != v.symbols()[..order - 1] {
                return Err(line_err(file, *lineno, format!("{u} -> {v} is not an admissible transition")));
            }
            let p: f64 = value
                .parse()
                .map_err(|_| line_err(file, *lineno, format!("probability {value:?} is not a number")))?;
            let g = space.encode(u.symbols()) * m + v.last() as usize;
            probs[g] += p;
        }
        let chain = OrderRChain::new(m, order, probs).map_err(|e: ChainError| file_err(file, e))?;
        Ok(ChainFile {
            alphabet: table.alphabet,
            chain,
        })
    }

    pub fn load(path: &FsPath) -> Result<Self, FormatError> {
        ChainFile::parse(&read(path)?, &path.display().to_string())
    }
}

/// How the stationary weights `w` are given.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    Uniform(f64),
    /// TSV rows `x_1 … x_{r+1} <TAB> weight`; missing grams get zero.
    File(PathBuf),
}

/// A prior model description.
///
/// ```text
/// name = variable order 1
/// order = 2
/// alphabet = 5                  # or: alphabet = a,b,c
/// histories = 0, 2, 3, 4        # comma-separated sequences, or: none
/// weights = uniform:2           # or: weights = file:weights.tsv
/// c = 1
/// v0 = 0 4                      # or: v0 = data
/// beta = 0 4 0                  # optional
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub name: String,
    pub order: usize,
    pub alphabet: Alphabet,
    pub histories: Vec<Seq>,
    pub weights: WeightSpec,
    pub c: f64,
    /// `None` means "take the initial state from the data".
    pub v0: Option<Seq>,
    pub beta: Option<Seq>,
    pub file: String,
}

impl ModelConfig {
    pub fn parse(text: &str, file: &str, base_dir: &FsPath) -> Result<Self, FormatError> {
        let mut kv: Vec<(usize, String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| line_err(file, i + 1, "expected key = value"))?;
            let key = k.trim().to_ascii_lowercase();
            if kv.iter().any(|(_, k2, _)| *k2 == key) {
                return Err(line_err(file, i + 1, format!("duplicate key {key:?}")));
            }
            kv.push((i + 1, key, v.trim().to_string()));
        }
        let get = |key: &str| kv.iter().find(|(_, k, _)| k == key);
        let need = |key: &str| get(key).ok_or_else(|| file_err(file, format!("missing key {key:?}")));
        for (line, key, _) in &kv {
            if !["name", "order", "alphabet", "histories", "weights", "c", "v0", "beta"].contains(&key.as_str()) {
                return Err(line_err(file, *line, format!("unknown key {key:?}")));
            }
        }

        let (line, _, v) = need("order")?;
        let order: usize = v
            .parse()
            .ok()
            .filter(|&r| r >= 1)
            .ok_or_else(|| line_err(file, *line, "order must be a positive integer"))?;
        let (line, _, v) = need("alphabet")?;
        let alphabet = Alphabet::parse(v).map_err(|e| line_err(file, *line, e))?;
        let histories = match get("histories") {
            None => Vec::new(),
            Some((_, _, v)) if v.eq_ignore_ascii_case("none") || v.is_empty() => Vec::new(),
            Some((line, _, v)) => v
                .split(',')
                .map(|h| alphabet.seq(h).map_err(|e| line_err(file, *line, e)))
                .collect::<Result<_, _>>()?,
        };
        let (line, _, v) = need("weights")?;
        let weights = if let Some(x) = v.strip_prefix("uniform:") {
            WeightSpec::Uniform(
                x.trim()
                    .parse()
                    .map_err(|_| line_err(file, *line, format!("bad uniform weight {x:?}")))?,
            )
        } else if let Some(p) = v.strip_prefix("file:") {
            WeightSpec::File(base_dir.join(p.trim()))
        } else {
            return Err(line_err(file, *line, "weights must be uniform:<value> or file:<path>"));
        };
        let (line, _, v) = need("c")?;
        let c: f64 = v
            .parse()
            .map_err(|_| line_err(file, *line, format!("bad c {v:?}")))?;
        let v0 = match need("v0")? {
            (_, _, v) if v == "data" => None,
            (line, _, v) => Some(alphabet.seq(v).map_err(|e| line_err(file, *line, e))?),
        };
        let beta = match get("beta") {
            None => None,
            Some((line, _, v)) => Some(alphabet.seq(v).map_err(|e| line_err(file, *line, e))?),
        };
        let name = get("name")
            .map(|(_, _, v)| v.clone())
            .unwrap_or_else(|| {
                FsPath::new(file)
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| file.to_string())
            });
        Ok(ModelConfig {
            name,
            order,
            alphabet,
            histories,
            weights,
            c,
            v0,
            beta,
            file: file.to_string(),
        })
    }

    pub fn load(path: &FsPath) -> Result<Self, FormatError> {
        let base = path.parent().unwrap_or(FsPath::new("."));
        ModelConfig::parse(&read(path)?, &path.display().to_string(), base)
    }

    pub fn alphabet_size(&self) -> Result<usize, FormatError> {
        self.alphabet
            .size()
            .ok_or_else(|| file_err(&self.file, "alphabet size unknown"))
    }

    fn load_weights(&self, m: usize) -> Result<StationaryWeights, FormatError> {
        match &self.weights {
            WeightSpec::Uniform(x) => Ok(StationaryWeights::uniform(m, self.order, *x)),
            WeightSpec::File(path) => {
                let file = path.display().to_string();
                let text = read(path)?;
                let space = GramSpace::new(m, self.order)
                    .ok_or_else(|| file_err(&file, "weight table too large"))?;
                let top = self.order + 1;
                let mut values = vec![0.0; space.count(top)];
                for (i, raw) in text.lines().enumerate() {
                    let line = raw.trim();
                    if line.is_empty() || line.starts_with('#') {
                        continue;
                    }
                    let (g, w) = line
                        .split_once('\t')
                        .ok_or_else(|| line_err(&file, i + 1, "expected gram <TAB> weight"))?;
                    let gram = self.alphabet.seq(g).map_err(|e| line_err(&file, i + 1, e))?;
                    if gram.len() != top {
                        return Err(line_err(&file, i + 1, format!("gram must have length {top}")));
                    }
                    let w: f64 = w
                        .trim()
                        .parse()
                        .map_err(|_| line_err(&file, i + 1, format!("bad weight {w:?}")))?;
                    values[space.encode(gram.symbols())] = w;
                }
                Ok(StationaryWeights::from_values(m, self.order, values)?)
            }
        }
    }

    /// Builds the prior; `data_v0` supplies the initial state when the
    /// config says `v0 = data`.
    pub fn build(&self, data_v0: Option<&Seq>) -> Result<PriorModel, FormatError> {
        let m = self.alphabet_size()?;
        let v0 = match (&self.v0, data_v0) {
            (Some(v), _) => v.clone(),
            (None, Some(v)) => {
                if v.len() < self.order {
                    return Err(file_err(&self.file, format!("data is shorter than the order {}", self.order)));
                }
                v.prefix(self.order)
            }
            (None, None) => {
                return Err(file_err(&self.file, "v0 = data but no data was given"));
            }
        };
        let weights = self.load_weights(m)?;
        let mut params = ModelParams::new(HistorySet::new(self.histories.clone()), weights, self.c, v0);
        if let Some(b) = &self.beta {
            params = params.with_beta(b.clone());
        }
        params.build().map_err(|e| file_err(&self.file, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq;

    #[test]
    fn trajectory_with_names() {
        let t = Trajectory::parse("# alphabet: a,b\na b\nb a # not a comment\n", "t").unwrap_err();
        assert!(t.to_string().contains("line 3"), "{t}");
        let t = Trajectory::parse("# alphabet: a,b\na b\n\nb a\n", "t").unwrap();
        assert_eq!(t.symbols, vec![0, 1, 1, 0]);
        assert_eq!(Trajectory::parse(&t.render(), "t").unwrap(), t);
    }

    #[test]
    fn count_table_roundtrip() {
        let text = "# v0: 0 1\nfrom\tto\tcount\n0 1\t1 1\t2\n1 1\t1 1\t3\n1 1\t1 0\t1\n";
        let mut ct = CountTable::parse(text, "c").unwrap();
        assert_eq!(ct.counts.get(&seq![1, 1], &seq![1, 1]), 3);
        assert_eq!(CountTable::parse(&ct.render(), "c").unwrap(), ct);
        ct.counts.add(seq![1, 0], seq![0, 1], 1).unwrap();
        assert!(CountTable::parse("# v0: 0\nfrom\tto\tcount\n0\t1\tx\n", "c")
            .unwrap_err()
            .to_string()
            .contains("line 3"));
        assert!(CountTable::parse("from\tto\tcount\n0 1\t0 0\t1\n# v0: 0 1\n", "c")
            .unwrap_err()
            .to_string()
            .contains("not overlap"));
    }

    #[test]
    fn model_config() {
        let text = "name = vo\norder = 2\nalphabet = 3\nhistories = 0, 2\nweights = uniform:2\nc = 1\nv0 = data\n";
        let cfg = ModelConfig::parse(text, "m.cfg", FsPath::new(".")).unwrap();
        assert_eq!(cfg.histories, vec![seq![0], seq![2]]);
        let model = cfg.build(Some(&seq![1, 1, 0])).unwrap();
        assert_eq!(model.v0(), &seq![1, 1]);
        let bad = ModelConfig::parse("order = 2\nfoo = 1\n", "m.cfg", FsPath::new(".")).unwrap_err();
        assert!(bad.to_string().contains("line 2"));
    }

    #[test]
    fn chain_file() {
        let text = "from\tto\tp\n0\t0\t0.7\n0\t1\t0.3\n1\t0\t0.3\n1\t1\t0.7\n";
        let c = ChainFile::parse(text, "c").unwrap();
        assert_eq!(c.chain.alphabet_size(), 2);
        assert_eq!(c.chain.transition(&seq![0], &seq![1]), 0.3);
    }
}
