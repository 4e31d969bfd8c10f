//! The candidate activation catalog.
//!
//! Catalog order is fixed: `[ReLU, Sigmoid, Tanh, LeakyReLU, Identity]`.
//! Every probability vector in the crate is indexed in this order.
//!
//! Derivatives at the ReLU/LeakyReLU kink use the left limit:
//! `ReLU'(0) = 0` and `LeakyReLU'(0) = slope`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::numkit::Vector;
use crate::{Error, Result};

/// Number of candidates in the catalog.
pub const NUM_CANDIDATES: usize = 5;

pub const DEFAULT_LEAKY_SLOPE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    Relu,
    Sigmoid,
    Tanh,
    #[serde(rename = "lrelu")]
    LeakyRelu,
    Identity,
}

impl ActivationKind {
    /// All candidates in catalog order.
    pub const ALL: [ActivationKind; NUM_CANDIDATES] = [
        ActivationKind::Relu,
        ActivationKind::Sigmoid,
        ActivationKind::Tanh,
        ActivationKind::LeakyRelu,
        ActivationKind::Identity,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Short lowercase name used in file names, CSV headers and the CLI.
    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Relu => "relu",
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::Tanh => "tanh",
            ActivationKind::LeakyRelu => "lrelu",
            ActivationKind::Identity => "identity",
        }
    }

    /// Display name used in tables and plot legends.
    pub fn label(self) -> &'static str {
        match self {
            ActivationKind::Relu => "ReLU",
            ActivationKind::Sigmoid => "Sigmoid",
            ActivationKind::Tanh => "Tanh",
            ActivationKind::LeakyRelu => "LeakyReLU",
            ActivationKind::Identity => "Identity",
        }
    }

    /// True for the candidates whose output is unbounded above.
    pub fn is_unbounded(self) -> bool {
        matches!(self, ActivationKind::Relu | ActivationKind::LeakyRelu | ActivationKind::Identity)
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ActivationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "relu" => Ok(ActivationKind::Relu),
            "sigmoid" => Ok(ActivationKind::Sigmoid),
            "tanh" => Ok(ActivationKind::Tanh),
            "lrelu" | "leakyrelu" | "leaky_relu" | "leaky-relu" => Ok(ActivationKind::LeakyRelu),
            "identity" | "linear" => Ok(ActivationKind::Identity),
            _ => Err(Error::usage(s, "unknown activation")),
        }
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Candidate functions parameterized by the LeakyReLU slope.
///
/// The same catalog must be used for the routed layer and for the data
/// generator, otherwise "recovering" LeakyReLU is ill-posed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    leaky_slope: f64,
}

impl Default for Catalog {
    fn default() -> Self {
        Self { leaky_slope: DEFAULT_LEAKY_SLOPE }
    }
}

impl Catalog {
    pub fn new(leaky_slope: f64) -> Result<Self> {
        if !(leaky_slope > 0.0 && leaky_slope < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "leaky slope must lie in (0, 1), got {leaky_slope}"
            )));
        }
        Ok(Self { leaky_slope })
    }

    pub fn leaky_slope(&self) -> f64 {
        self.leaky_slope
    }

    #[inline]
    pub fn value(&self, kind: ActivationKind, x: f64) -> f64 {
        match kind {
            ActivationKind::Relu => x.max(0.0),
            ActivationKind::Sigmoid => sigmoid(x),
            ActivationKind::Tanh => x.tanh(),
            ActivationKind::LeakyRelu => {
                if x > 0.0 {
                    x
                } else {
                    self.leaky_slope * x
                }
            }
            ActivationKind::Identity => x,
        }
    }

    #[inline]
    pub fn derivative(&self, kind: ActivationKind, x: f64) -> f64 {
        match kind {
            ActivationKind::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationKind::Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s)
            }
            ActivationKind::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
            ActivationKind::LeakyRelu => {
                if x > 0.0 {
                    1.0
                } else {
                    self.leaky_slope
                }
            }
            ActivationKind::Identity => 1.0,
        }
    }

    /// All five candidate values at `x`, in catalog order.
    #[inline]
    pub fn values_all(&self, x: f64) -> [f64; NUM_CANDIDATES] {
        ActivationKind::ALL.map(|k| self.value(k, x))
    }

    #[inline]
    pub fn derivatives_all(&self, x: f64) -> [f64; NUM_CANDIDATES] {
        ActivationKind::ALL.map(|k| self.derivative(k, x))
    }

    pub fn apply(&self, kind: ActivationKind, h: &Vector) -> Vector {
        h.map(|x| self.value(kind, x))
    }

    pub fn derivative_vec(&self, kind: ActivationKind, h: &Vector) -> Vector {
        h.map(|x| self.derivative(kind, x))
    }
}

/// Element-wise `kind(h)` with the default LeakyReLU slope.
pub fn apply(kind: ActivationKind, h: &Vector) -> Vector {
    Catalog::default().apply(kind, h)
}

/// Element-wise derivative with the default LeakyReLU slope.
pub fn derivative(kind: ActivationKind, h: &Vector) -> Vector {
    Catalog::default().derivative_vec(kind, h)
}
