//! Dataset, chain and summary files; the TOML run configuration; the run
//! manifest.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{GalorError, Result};
use crate::evaluation::FitSummary;
use crate::mcmc::{ChainOutput, Draw, ModelKind, ProposalCovariances};
use crate::model::{OrdinalDataset, PriorConfig};

/// Decimal text with 17 significant digits; parses back to the same `f64`.
pub fn format_f64(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return v.to_string();
    }
    format!("{v:.16e}")
}

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("output");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Datasets

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetOptions {
    /// Name of the response column.
    pub response: String,
    /// Prepend a column of ones named `intercept`.
    pub intercept: bool,
}

impl Default for DatasetOptions {
    fn default() -> Self {
        Self {
            response: "y".into(),
            intercept: false,
        }
    }
}

pub fn load_dataset(path: &Path, options: &DatasetOptions) -> Result<OrdinalDataset> {
    let file = fs::File::open(path).map_err(|e| GalorError::Data(format!("cannot open {}: {e}", path.display())))?;
    read_dataset(file, options)
}

/// Reads a headed CSV: the response column holds integers `1..J`, every
/// other column is a numeric covariate.
pub fn read_dataset<R: Read>(reader: R, options: &DatasetOptions) -> Result<OrdinalDataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let y_col = headers
        .iter()
        .position(|h| *h == options.response)
        .ok_or_else(|| GalorError::Data(format!("no `{}` column in header {headers:?}", options.response)))?;
    let mut names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != y_col)
        .map(|(_, h)| h.clone())
        .collect();
    let prepend = options.intercept && !names.iter().any(|n| n == "intercept");
    if options.intercept && !prepend {
        log::warn!("data already contain an `intercept` column; not adding another");
    }
    let mut y = Vec::new();
    let mut values = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        let line = idx + 2;
        if record.len() != headers.len() {
            return Err(GalorError::Data(format!(
                "line {line}: expected {} fields, found {}",
                headers.len(),
                record.len()
            )));
        }
        let raw = &record[y_col];
        let v: f64 = raw
            .parse()
            .map_err(|_| GalorError::Data(format!("line {line}: response `{raw}` is not an integer")))?;
        if v.fract() != 0.0 || !v.is_finite() {
            return Err(GalorError::Data(format!("line {line}: response `{raw}` is not an integer")));
        }
        if v < 1.0 {
            return Err(GalorError::Data(format!(
                "line {line}: categories must start at 1 (found {raw})"
            )));
        }
        y.push(v as usize);
        if prepend {
            values.push(1.0);
        }
        for (c, field) in record.iter().enumerate() {
            if c == y_col {
                continue;
            }
            let x: f64 = field.parse().map_err(|_| {
                GalorError::Data(format!("line {line}, column `{}`: `{field}` is not a number", headers[c]))
            })?;
            if !x.is_finite() {
                return Err(GalorError::Data(format!(
                    "line {line}, column `{}`: missing or non-finite value",
                    headers[c]
                )));
            }
            values.push(x);
        }
    }
    if prepend {
        names.insert(0, "intercept".into());
    }
    let x = DMatrix::from_row_slice(y.len(), names.len(), &values);
    OrdinalDataset::new(x, y, names)
}

pub fn save_dataset(path: &Path, data: &OrdinalDataset) -> Result<()> {
    let mut buf = Vec::new();
    write_dataset(&mut buf, data)?;
    write_atomic(path, &buf)
}

/// Writes `y` followed by the covariates.
pub fn write_dataset<W: Write>(writer: W, data: &OrdinalDataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["y".to_string()];
    header.extend(data.names().iter().cloned());
    w.write_record(&header)?;
    for i in 0..data.n() {
        let mut row = vec![data.y()[i].to_string()];
        row.extend(data.x().row(i).iter().map(|&v| format_f64(v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Chains

pub fn chain_header(k: usize, m: usize) -> Vec<String> {
    let mut h = vec!["iter".to_string()];
    h.extend(crate::mcmc::parameter_names(k, m));
    h.push("loglik".into());
    h
}

/// One row per retained draw: `iter, β, σ, γ, δ, loglik`. `first_iter` is
/// the iteration number of the first retained draw.
pub fn write_chain<W: Write>(writer: W, chain: &ChainOutput, first_iter: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(chain_header(chain.k(), chain.delta_len()))?;
    for (i, d) in chain.draws.iter().enumerate() {
        let mut row = vec![(first_iter + i).to_string()];
        row.extend(d.values().into_iter().map(format_f64));
        row.push(format_f64(d.loglik));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_chain(path: &Path, chain: &ChainOutput, first_iter: usize) -> Result<()> {
    let mut buf = Vec::new();
    write_chain(&mut buf, chain, first_iter)?;
    write_atomic(path, &buf)
}

/// Reads draws written by [`write_chain`] for a model with `k` covariates.
pub fn read_chain_draws<R: Read>(reader: R, k: usize) -> Result<Vec<Draw>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    let width = header.len();
    if width < k + 4 || &header[0] != "iter" || &header[width - 1] != "loglik" {
        return Err(GalorError::Data(format!("not a chain file for k = {k}: header {header:?}")));
    }
    let m = width - k - 4;
    let mut draws = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let v: Vec<f64> = rec
            .iter()
            .skip(1)
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| GalorError::Data(format!("chain line {}: {e}", idx + 2)))?;
        if v.len() != width - 1 {
            return Err(GalorError::Data(format!("chain line {}: wrong field count", idx + 2)));
        }
        draws.push(Draw {
            beta: v[..k].to_vec(),
            sigma: v[k],
            gamma: v[k + 1],
            delta: v[k + 2..k + 2 + m].to_vec(),
            loglik: v[width - 2],
        });
    }
    Ok(draws)
}

// ---------------------------------------------------------------------------
// Fit records

/// Everything needed to interpret a saved chain, plus its summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub summary: FitSummary,
    pub cut2: f64,
    pub covariate_names: Vec<String>,
    pub seed: u64,
    pub latent_update: String,
    pub iota1: f64,
    pub iota2: f64,
    pub draws: usize,
    pub burnin: usize,
    pub acceptance_sigma_gamma: f64,
    pub acceptance_delta: Option<f64>,
    pub seconds: f64,
    pub proposal_sigma_gamma: Vec<Vec<f64>>,
    pub proposal_delta: Vec<Vec<f64>>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(r: &[Vec<f64>]) -> DMatrix<f64> {
    let n = r.len();
    DMatrix::from_fn(n, n, |i, j| r[i][j])
}

impl FitRecord {
    pub fn new(summary: FitSummary, chain: &ChainOutput, config: &crate::mcmc::ModelConfig) -> Self {
        Self {
            summary,
            cut2: chain.cut2,
            covariate_names: chain.covariate_names.clone(),
            seed: chain.seed,
            latent_update: config.latent_update.to_string(),
            iota1: config.tuning.iota1,
            iota2: config.tuning.iota2,
            draws: config.tuning.draws,
            burnin: config.tuning.burnin,
            acceptance_sigma_gamma: chain.acceptance_sigma_gamma,
            acceptance_delta: chain.acceptance_delta,
            seconds: chain.seconds,
            proposal_sigma_gamma: rows(&chain.proposal.sigma_gamma),
            proposal_delta: rows(&chain.proposal.delta),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| GalorError::Data(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| GalorError::Data(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, serde_json::to_string_pretty(self)?.as_bytes())
    }

    /// Rebuilds a chain from this record and its draws.
    pub fn chain(&self, draws: Vec<Draw>) -> ChainOutput {
        let s = &self.summary;
        ChainOutput {
            model: s.model,
            quantile: s.quantile,
            cut2: self.cut2,
            lock_gamma: s.lock_gamma,
            covariate_names: self.covariate_names.clone(),
            draws,
            acceptance_sigma_gamma: self.acceptance_sigma_gamma,
            acceptance_delta: self.acceptance_delta,
            inefficiency: s
                .parameter_names
                .iter()
                .zip(&s.inefficiency)
                .filter_map(|(n, v)| v.map(|v| (n.clone(), v)))
                .collect(),
            seconds: self.seconds,
            proposal: ProposalCovariances {
                sigma_gamma: from_rows(&self.proposal_sigma_gamma),
                delta: from_rows(&self.proposal_delta),
            },
            seed: self.seed,
        }
    }

    /// Parameter table at two decimals followed by fit statistics.
    pub fn to_text(&self) -> String {
        let s = &self.summary;
        let mut out = format!(
            "model {}{}  quantile {}  n {}  draws {} after {} burn-in\n\n",
            s.model,
            if s.lock_gamma { " (gamma locked at 0)" } else { "" },
            s.quantile,
            s.n,
            self.draws,
            self.burnin
        );
        let _ = writeln!(out, "{:<12} {:>10} {:>10} {:>8}", "parameter", "mean", "std", "if");
        for i in 0..s.parameter_names.len() {
            let ineff = s.inefficiency[i].map_or("-".to_string(), |v| format!("{v:.2}"));
            let _ = writeln!(
                out,
                "{:<12} {:>10.2} {:>10.2} {:>8}",
                s.parameter_names[i], s.mean[i], s.sd[i], ineff
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "lnL {:.2}  AIC {:.2}  BIC {:.2}  (k = {})", s.loglik, s.aic, s.bic, s.k_params);
        let k = self.covariate_names.len();
        let skew = crate::gal::QuantileGalParams::new(0.0, s.mean[k], s.mean[k + 1], s.quantile).map(|q| q.moments().skewness);
        if let Ok(sk) = skew {
            let _ = writeln!(out, "skewness at posterior means {sk:.2}");
        }
        let _ = write!(out, "acceptance: sigma/gamma {:.3}", self.acceptance_sigma_gamma);
        if let Some(a) = self.acceptance_delta {
            let _ = write!(out, ", delta {a:.3}");
        }
        let _ = writeln!(out, "\nwall-clock {:.1} s", self.seconds);
        out
    }

    /// `parameter,mean,sd,inefficiency` at full precision.
    pub fn to_csv(&self) -> String {
        let s = &self.summary;
        let mut out = String::from("parameter,mean,sd,inefficiency\n");
        for i in 0..s.parameter_names.len() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                s.parameter_names[i],
                format_f64(s.mean[i]),
                format_f64(s.sd[i]),
                s.inefficiency[i].map(format_f64).unwrap_or_default()
            );
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Configuration file

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum ScalarOrList {
    Scalar(f64),
    List(Vec<f64>),
}

impl ScalarOrList {
    fn expand(&self, len: usize, key: &str) -> Result<DVector<f64>> {
        match self {
            ScalarOrList::Scalar(v) => Ok(DVector::from_element(len, *v)),
            ScalarOrList::List(v) if v.len() == len => Ok(DVector::from_column_slice(v)),
            ScalarOrList::List(v) => Err(GalorError::Config(format!(
                "`{key}` has {} entries but {len} are needed",
                v.len()
            ))),
        }
    }
}

/// `[priors]` table; variances are a scalar (times the identity) or a
/// diagonal.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PriorFile {
    pub beta_mean: Option<ScalarOrList>,
    pub beta_variance: Option<ScalarOrList>,
    pub n0: Option<f64>,
    pub d0: Option<f64>,
    pub gamma_a: Option<f64>,
    pub gamma_b: Option<f64>,
    pub delta_mean: Option<ScalarOrList>,
    pub delta_variance: Option<ScalarOrList>,
}

impl PriorFile {
    pub fn apply(&self, priors: &mut PriorConfig) -> Result<()> {
        let k = priors.beta0.len();
        let m = priors.delta0.len();
        if let Some(v) = &self.beta_mean {
            priors.beta0 = v.expand(k, "beta_mean")?;
        }
        if let Some(v) = &self.beta_variance {
            priors.beta_cov = DMatrix::from_diagonal(&v.expand(k, "beta_variance")?);
        }
        if let Some(v) = &self.delta_mean {
            priors.delta0 = v.expand(m, "delta_mean")?;
        }
        if let Some(v) = &self.delta_variance {
            priors.delta_cov = DMatrix::from_diagonal(&v.expand(m, "delta_variance")?);
        }
        priors.n0 = self.n0.unwrap_or(priors.n0);
        priors.d0 = self.d0.unwrap_or(priors.d0);
        priors.sb_a = self.gamma_a.unwrap_or(priors.sb_a);
        priors.sb_b = self.gamma_b.unwrap_or(priors.sb_b);
        Ok(())
    }
}

/// TOML run configuration. Every key is optional; command-line flags take
/// precedence over values given here.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub quantiles: Option<Vec<f64>>,
    pub model: Option<String>,
    pub draws: Option<usize>,
    pub burnin: Option<usize>,
    pub cut2: Option<f64>,
    pub iota1: Option<f64>,
    pub iota2: Option<f64>,
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub latent_update: Option<String>,
    pub lock_gamma: Option<bool>,
    pub intercept: Option<bool>,
    pub priors: Option<PriorFile>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| GalorError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| GalorError::Config(format!("configuration file: {e}")))
    }
}

// ---------------------------------------------------------------------------
// Manifest

/// Record of one CLI invocation, written next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub arguments: Vec<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub outputs: Vec<PathBuf>,
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

impl RunManifest {
    pub fn new(command: &str, arguments: Vec<String>, config: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            command: command.into(),
            arguments,
            config,
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
            started_unix: unix_now(),
            finished_unix: f64::NAN,
            outputs: Vec::new(),
        }
    }

    /// Stamps the finish time and writes `manifest.json` into `dir`.
    pub fn finish(mut self, dir: &Path) -> Result<PathBuf> {
        self.finished_unix = unix_now();
        let path = dir.join("manifest.json");
        write_atomic(&path, serde_json::to_string_pretty(&self)?.as_bytes())?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// File stem for one fit, e.g. `fbqror_q0.25`.
pub fn fit_stem(model: ModelKind, quantile: f64, lock_gamma: bool) -> String {
    format!("{}{}_q{}", model, if lock_gamma { "_locked" } else { "" }, quantile)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digit_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 123_456_789.123_456_79, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(format_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn toy_dataset_reports_categories() {
        let csv = "y,a,b\n1,0.5,1\n2,0.1,0\n3,2.0,1\n2,1.5,0\n";
        let d = read_dataset(csv.as_bytes(), &DatasetOptions::default()).unwrap();
        assert_eq!(d.categories(), 3);
        assert_eq!(d.category_counts(), vec![1, 2, 1]);
        assert_eq!(d.names(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn intercept_is_prepended() {
        let csv = "a,y\n0.5,1\n0.1,2\n2.0,3\n";
        let opts = DatasetOptions {
            intercept: true,
            ..Default::default()
        };
        let d = read_dataset(csv.as_bytes(), &opts).unwrap();
        assert_eq!(d.names()[0], "intercept");
        assert_eq!(d.x().column(0).iter().copied().collect::<Vec<_>>(), vec![1.0; 3]);
        assert_eq!(d.x()[(2, 1)], 2.0);
    }

    #[test]
    fn bad_files_name_the_line() {
        let err = |csv: &str| read_dataset(csv.as_bytes(), &DatasetOptions::default()).unwrap_err().to_string();
        assert!(err("y,a\n1,0\n0,1\n2,3\n").contains("categories must start at 1"));
        assert!(err("y,a\n1,0\n2.5,1\n").contains("line 3"));
        assert!(err("y,a\n1,0\n2,NaN\n3,1\n").contains("line 3"));
        assert!(err("y,a\n1,0\n2,\n3,1\n").contains("line 3"));
        assert!(err("a\n1\n").contains("no `y` column"));
    }

    #[test]
    fn config_file_parses() {
        let c = FileConfig::parse(
            "quantiles = [0.25, 0.5]\nmodel = \"bqror\"\ndraws = 100\n[priors]\nbeta_variance = 4.0\ndelta_mean = [0.5]\n",
        )
        .unwrap();
        assert_eq!(c.quantiles, Some(vec![0.25, 0.5]));
        let mut p = PriorConfig::default_for(2, 4);
        c.priors.unwrap().apply(&mut p).unwrap();
        assert_eq!(p.beta_cov[(1, 1)], 4.0);
        assert_eq!(p.delta0[0], 0.5);
        assert!(FileConfig::parse("unknown_key = 1").is_err());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
