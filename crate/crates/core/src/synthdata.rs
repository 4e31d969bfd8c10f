//! Synthetic regression task `y = a(k · x[informative])`.
//!
//! Inputs are i.i.d. standard normal (Box-Muller over the clamped uniform of
//! [`Rng`]). Only one column carries signal; the rest are distractors.
//! Labels are noise-free.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::activations::{ActivationKind, Catalog};
use crate::numkit::{Matrix, Rng, Vector};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub truth: ActivationKind,
    pub scale: f64,
    pub n_samples: usize,
    pub d_in: usize,
    pub informative_index: usize,
    pub seed: u64,
    #[serde(default)]
    pub catalog: Catalog,
}

impl DatasetSpec {
    /// Defaults: `k = 5`, four inputs, column 0 informative.
    pub fn new(truth: ActivationKind, n_samples: usize, seed: u64) -> Self {
        Self {
            truth,
            scale: 5.0,
            n_samples,
            d_in: 4,
            informative_index: 0,
            seed,
            catalog: Catalog::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidConfig("n_samples must be >= 1".into()));
        }
        if self.informative_index >= self.d_in {
            return Err(Error::InvalidConfig(format!(
                "informative index {} out of range for d_in = {}",
                self.informative_index, self.d_in
            )));
        }
        if !self.scale.is_finite() {
            return Err(Error::InvalidConfig("scale must be finite".into()));
        }
        Ok(())
    }

    /// The noise-free label for one informative input value.
    #[inline]
    pub fn label(&self, x_informative: f64) -> f64 {
        self.catalog.value(self.truth, self.scale * x_informative)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Vector,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vector) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::Dimension { expected: x.rows(), found: y.len() });
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn d_in(&self) -> usize {
        self.x.cols()
    }

    pub fn select(&self, idx: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_rows(idx),
            y: Vector::from_fn(idx.len(), |i| self.y[idx[i]]),
        }
    }

    /// Writes `x0,..,x{d-1},y` with a header row. Values use Rust's
    /// shortest round-trip formatting.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> = (0..self.d_in()).map(|c| format!("x{c}")).chain(["y".into()]).collect();
        writeln!(w, "{}", header.join(","))?;
        for r in 0..self.len() {
            for v in self.x.row(r) {
                write!(w, "{v},")?;
            }
            writeln!(w, "{}", self.y[r])?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f)).map_err(|e| Error::io(path, e))
    }
}

pub fn generate(spec: &DatasetSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = Rng::new(spec.seed);
    let mut data = Vec::with_capacity(spec.n_samples * spec.d_in);
    for _ in 0..spec.n_samples * spec.d_in {
        data.push(rng.standard_normal());
    }
    let x = Matrix::new(spec.n_samples, spec.d_in, data)?;
    let y = Vector::from_fn(spec.n_samples, |r| spec.label(x.get(r, spec.informative_index)));
    Dataset::new(x, y)
}

/// Seeded shuffle, then the first `round(n · fraction)` rows become the
/// training half.
pub fn split(data: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!("train fraction must lie in (0, 1), got {train_fraction}")));
    }
    let n = data.len();
    let n_train = (n as f64 * train_fraction).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::InvalidConfig(format!(
            "split of {n} rows at {train_fraction} leaves an empty half"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    Rng::new(seed).shuffle(&mut idx);
    Ok((data.select(&idx[..n_train]), data.select(&idx[n_train..])))
}
