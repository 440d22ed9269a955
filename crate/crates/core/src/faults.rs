//! Artificial diagonal defects injected into assembled Galerkin matrices.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::galerkin::{GalerkinMatrix, MatrixData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaultKind {
    /// Diagonal replaced by uniform draws from `[0, 10)`.
    A,
    /// Diagonal halved.
    B,
    /// Diagonal scaled by `10³`.
    C,
    /// First `⌈N/2⌉` diagonal entries scaled by `10³`.
    D,
    /// Diagonal scaled by `1/h`.
    E,
    None,
}

impl FaultKind {
    pub const ALL: [FaultKind; 5] = [FaultKind::A, FaultKind::B, FaultKind::C, FaultKind::D, FaultKind::E];

    pub fn label(&self) -> &'static str {
        match self {
            FaultKind::A => "A",
            FaultKind::B => "B",
            FaultKind::C => "C",
            FaultKind::D => "D",
            FaultKind::E => "E",
            FaultKind::None => "none",
        }
    }
}

impl fmt::Display for FaultKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for FaultKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(FaultKind::A),
            "B" | "b" => Ok(FaultKind::B),
            "C" | "c" => Ok(FaultKind::C),
            "D" | "d" => Ok(FaultKind::D),
            "E" | "e" => Ok(FaultKind::E),
            "none" | "None" => Ok(FaultKind::None),
            _ => Err(Error::Config(format!("unknown fault {s:?} (expected A-E or none)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultSpec {
    pub kind: FaultKind,
    /// Seed of the generator used by fault A.
    pub seed: u64,
    /// Meshwidth used by fault E.
    pub h: f64,
}

impl FaultSpec {
    pub fn none() -> Self {
        Self { kind: FaultKind::None, seed: 0, h: 1.0 }
    }

    pub fn new(kind: FaultKind, seed: u64, h: f64) -> Self {
        Self { kind, seed, h }
    }
}

/// Replacement value for diagonal entry `i` of `n`, given the original.
fn diagonal_map(spec: &FaultSpec, n: usize) -> Result<Box<dyn FnMut(usize, f64) -> f64>> {
    Ok(match spec.kind {
        FaultKind::None => Box::new(|_, v| v),
        FaultKind::A => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            Box::new(move |_, _| rng.gen_range(0.0..10.0))
        }
        FaultKind::B => Box::new(|_, v| 0.5 * v),
        FaultKind::C => Box::new(|_, v| 1e3 * v),
        FaultKind::D => {
            let half = n.div_ceil(2);
            Box::new(move |i, v| if i < half { 1e3 * v } else { v })
        }
        FaultKind::E => {
            if !(spec.h > 0.0) {
                return Err(Error::Config(format!("fault E needs a positive meshwidth, got {}", spec.h)));
            }
            let s = 1.0 / spec.h;
            Box::new(move |_, v| s * v)
        }
    })
}

/// Returns a copy of `m` with the fault applied to its diagonal. For complex
/// matrices fault A replaces the diagonal with real draws and the scaling
/// faults scale the complex entries.
pub fn apply_fault(m: &GalerkinMatrix, spec: &FaultSpec) -> Result<GalerkinMatrix> {
    if spec.kind != FaultKind::None && !m.is_square() {
        return Err(Error::Dimension(format!(
            "diagonal fault on a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows().min(m.ncols());
    let mut f = diagonal_map(spec, n)?;
    let data = match &m.data {
        MatrixData::Real(d) => {
            let mut out: DMatrix<f64> = d.clone();
            if spec.kind != FaultKind::None {
                for i in 0..n {
                    out[(i, i)] = f(i, d[(i, i)]);
                }
            }
            MatrixData::Real(out)
        }
        MatrixData::Complex(d) => {
            let mut out: DMatrix<Complex64> = d.clone();
            if spec.kind != FaultKind::None {
                for i in 0..n {
                    out[(i, i)] = match spec.kind {
                        FaultKind::A => Complex64::new(f(i, 0.0), 0.0),
                        // the scaling faults are linear: apply the factor
                        _ => d[(i, i)] * f(i, 1.0),
                    };
                }
            }
            MatrixData::Complex(out)
        }
    };
    Ok(GalerkinMatrix { data, ..m.clone() })
}
