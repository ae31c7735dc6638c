//! Synthetic Gaussian-mixture data, CSV ingestion and validation splits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::{Distribution, Uniform};
use rand::seq::SliceRandom;
use rand_distr::{Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{Centers, Dataset};
use crate::rng;

/// Mixture of `k_true` spherical Gaussians with Dirichlet mixture weights and
/// means drawn uniformly from `[box_lo, box_hi]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub k_true: usize,
    pub box_lo: f64,
    pub box_hi: f64,
    pub sigma2: f64,
    pub dirichlet_alpha: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Defaults of the SYNTHETIC benchmark recipe: 100 components in
    /// `[0,100]^100`, `Σ = 5I`, Dirichlet concentration 1/20.
    pub fn new(n: usize, d: usize, k_true: usize) -> Self {
        Self { n, d, k_true, box_lo: 0.0, box_hi: 100.0, sigma2: 5.0, dirichlet_alpha: 0.05, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 || self.k_true == 0 {
            return Err(Error::param("n, d and k_true must be >= 1"));
        }
        if !(self.box_hi > self.box_lo) || !self.box_lo.is_finite() || !self.box_hi.is_finite() {
            return Err(Error::param("box must satisfy lo < hi"));
        }
        if !(self.sigma2 >= 0.0 && self.sigma2.is_finite()) {
            return Err(Error::param("sigma2 must be >= 0"));
        }
        if !(self.dirichlet_alpha > 0.0 && self.dirichlet_alpha.is_finite()) {
            return Err(Error::param("dirichlet_alpha must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub dataset: Dataset,
    pub means: Centers,
    pub weights: Vec<f64>,
    /// Component index of each point.
    pub labels: Vec<usize>,
}

/// Exchangeable Dirichlet draw via normalized Gamma(α, 1) variates.
fn dirichlet<R: rand::Rng + ?Sized>(k: usize, alpha: f64, rng: &mut R) -> Result<Vec<f64>> {
    let gamma = Gamma::new(alpha, 1.0).map_err(|e| Error::param(format!("gamma: {e}")))?;
    loop {
        let draws: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        // tiny alpha can underflow every draw to zero; redraw
        if total > 0.0 && total.is_finite() {
            return Ok(draws.into_iter().map(|g| g / total).collect());
        }
    }
}

pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let mut rng = rng::stream(spec.seed, &[rng::name_tag("synthetic")]);
    let weights = dirichlet(spec.k_true, spec.dirichlet_alpha, &mut rng)?;
    let unif = Uniform::new_inclusive(spec.box_lo, spec.box_hi).map_err(|e| Error::param(e.to_string()))?;
    let means: Vec<f64> = (0..spec.k_true * spec.d).map(|_| unif.sample(&mut rng)).collect();
    let means = Centers::new(spec.d, means)?;
    let pick = WeightedIndex::new(&weights).map_err(|e| Error::InvalidWeights(e.to_string()))?;
    let sd = spec.sigma2.sqrt();
    let mut coords = Vec::with_capacity(spec.n * spec.d);
    let mut labels = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let j = pick.sample(&mut rng);
        labels.push(j);
        for &mu in means.center(j) {
            let z: f64 = StandardNormal.sample(&mut rng);
            coords.push(mu + sd * z);
        }
    }
    Ok(SyntheticData { dataset: Dataset::new(spec.d, coords)?, means, weights, labels })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

/// Parse a rectangular numeric CSV into a dataset. Rows are numbered from 1,
/// counting data rows only.
pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    read_csv(file, has_header)
}

pub fn read_csv<R: std::io::Read>(reader: R, has_header: bool) -> Result<Dataset> {
    let mut rdr =
        csv::ReaderBuilder::new().has_headers(has_header).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut dim = None;
    let mut coords = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Csv { row, message: e.to_string() })?;
        let expected = *dim.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::Csv { row, message: format!("expected {expected} fields, found {}", record.len()) });
        }
        for field in record.iter() {
            let v: f64 =
                field.parse().map_err(|_| Error::Csv { row, message: format!("non-numeric field {field:?}") })?;
            if !v.is_finite() {
                return Err(Error::Csv { row, message: format!("non-finite value {field:?}") });
            }
            coords.push(v);
        }
    }
    match dim {
        None => Err(Error::Csv { row: 0, message: "empty file".into() }),
        Some(0) => Err(Error::Csv { row: 1, message: "row has no fields".into() }),
        Some(d) => Dataset::new(d, coords),
    }
}

/// Write a dataset as CSV with an `x0,x1,...` header. Values use the
/// shortest round-trip representation, so `load_csv` restores them exactly.
pub fn save_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    write_rows(BufWriter::new(file), &header_names("x", data.dim()), data.points().iter()).map_err(io_err(path))
}

fn header_names(prefix: &str, d: usize) -> Vec<String> {
    (0..d).map(|i| format!("{prefix}{i}")).collect()
}

pub(crate) fn write_rows<'a, W: Write>(
    mut w: W,
    header: &[String],
    rows: impl Iterator<Item = &'a [f64]>,
) -> std::io::Result<()> {
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let line: Vec<String> = row.iter().map(f64::to_string).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()
}

/// Ground-truth sidecar: one row per component with its weight and mean.
pub fn save_truth_csv(data: &SyntheticData, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    let mut header = vec!["component".to_string(), "weight".to_string()];
    header.extend(header_names("mean", data.means.dim()));
    let rows: Vec<Vec<f64>> = data
        .means
        .iter()
        .enumerate()
        .map(|(j, m)| {
            let mut r = vec![j as f64, data.weights[j]];
            r.extend_from_slice(m);
            r
        })
        .collect();
    write_rows(BufWriter::new(file), &header, rows.iter().map(Vec::as_slice)).map_err(io_err(path))
}

/// Random disjoint split into `(train, validation)` with
/// `|validation| = floor(fraction · n)`.
pub fn split_validation(data: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::param(format!("fraction must lie in (0, 1), got {fraction}")));
    }
    let n = data.n();
    let n_val = (fraction * n as f64).floor() as usize;
    if n_val == 0 || n_val == n {
        return Err(Error::param(format!("fraction {fraction} of {n} points leaves an empty part")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::named(seed, "split"));
    let (val, train) = idx.split_at(n_val);
    Ok((data.subset(train)?, data.subset(val)?))
}
