//! Symbolic pressure through weighted transition matrices.
//!
//! A subshift of finite type with an edge-locally-constant weight has
//! pressure `log rho(M)` where `M_ij = B_ij * exp(phi(i,j))`. At the matrix
//! sizes handled here the spectral radius is computed to machine precision,
//! so this route serves as the exact oracle the smooth-map estimators are
//! cross-checked against.

use nalgebra::DMatrix;
use thiserror::Error;

use super::{BoundKind, Method, PressureEstimate, SeriesPoint};

/// Largest supported alphabet; dense eigenvalue work stays trivial below it.
const MAX_SYMBOLS: usize = 128;
/// Horizon for the normalized log-trace diagnostic series.
const TRACE_SERIES_LEN: u32 = 12;

#[derive(Debug, Error, PartialEq)]
pub enum SftError {
    #[error("alphabet size must be in 1..={MAX_SYMBOLS}")]
    BadAlphabet,
    #[error("transition entries must be 0 or 1 (row {row}, column {col})")]
    BadEntry { row: usize, col: usize },
    #[error("transition rows must all have the alphabet's length")]
    RaggedMatrix,
    #[error("symbol {index} has no {role}; every symbol must be extendable")]
    DeadSymbol { index: usize, role: &'static str },
    #[error("potential table must be finite and match the alphabet")]
    BadPotential,
}

/// A subshift of finite type together with an edge weight table.
///
/// The weight is locally constant on two symbols: `phi(i, j)` is read on the
/// transition `i -> j`. One-symbol potentials embed as row-constant tables.
#[derive(Debug, Clone, PartialEq)]
pub struct SftModel {
    symbols: usize,
    allowed: Vec<bool>,
    phi: Vec<f64>,
}

impl SftModel {
    /// Build a model from 0/1 transition rows with zero potential.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self, SftError> {
        let n = rows.len();
        if n == 0 || n > MAX_SYMBOLS {
            return Err(SftError::BadAlphabet);
        }
        let mut allowed = vec![false; n * n];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(SftError::RaggedMatrix);
            }
            for (j, &e) in row.iter().enumerate() {
                match e {
                    0 => {}
                    1 => allowed[i * n + j] = true,
                    _ => return Err(SftError::BadEntry { row: i, col: j }),
                }
            }
        }
        for i in 0..n {
            if !(0..n).any(|j| allowed[i * n + j]) {
                return Err(SftError::DeadSymbol { index: i, role: "successor" });
            }
            if !(0..n).any(|j| allowed[j * n + i]) {
                return Err(SftError::DeadSymbol { index: i, role: "predecessor" });
            }
        }
        Ok(SftModel { symbols: n, allowed, phi: vec![0.0; n * n] })
    }

    /// The full shift on `n` symbols.
    pub fn full_shift(n: usize) -> Result<Self, SftError> {
        Self::from_rows(&vec![vec![1; n]; n])
    }

    /// The shift forbidding the word `11`.
    pub fn golden_mean() -> Self {
        Self::from_rows(&[vec![1, 1], vec![1, 0]]).expect("static matrix is valid")
    }

    /// Attach a two-symbol potential: `table[i][j]` weights the edge `i->j`.
    pub fn with_edge_potential(mut self, table: &[Vec<f64>]) -> Result<Self, SftError> {
        let n = self.symbols;
        if table.len() != n || table.iter().any(|r| r.len() != n) {
            return Err(SftError::BadPotential);
        }
        for (i, row) in table.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(SftError::BadPotential);
                }
                self.phi[i * n + j] = v;
            }
        }
        Ok(self)
    }

    /// Attach a one-symbol potential: `weights[i]` is read on every edge
    /// leaving symbol `i`.
    pub fn with_symbol_potential(self, weights: &[f64]) -> Result<Self, SftError> {
        if weights.len() != self.symbols || weights.iter().any(|v| !v.is_finite()) {
            return Err(SftError::BadPotential);
        }
        let table: Vec<Vec<f64>> =
            weights.iter().map(|&w| vec![w; self.symbols]).collect();
        self.with_edge_potential(&table)
    }

    pub fn symbols(&self) -> usize {
        self.symbols
    }

    pub fn is_allowed(&self, i: usize, j: usize) -> bool {
        self.allowed[i * self.symbols + j]
    }

    pub fn edge_count(&self) -> usize {
        self.allowed.iter().filter(|&&a| a).count()
    }

    fn weighted_matrix(&self) -> DMatrix<f64> {
        let n = self.symbols;
        DMatrix::from_fn(n, n, |i, j| {
            if self.allowed[i * n + j] {
                self.phi[i * n + j].exp()
            } else {
                0.0
            }
        })
    }

    /// Strong connectivity of the transition graph: reachability from and to
    /// symbol 0 suffices because every symbol has in- and out-edges.
    fn is_irreducible(&self) -> bool {
        let n = self.symbols;
        let reach = |transpose: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for (j, reached) in seen.iter_mut().enumerate() {
                    let edge = if transpose { self.allowed[j * n + i] } else { self.allowed[i * n + j] };
                    if edge && !*reached {
                        *reached = true;
                        stack.push(j);
                    }
                }
            }
            seen.iter().all(|&s| s)
        };
        reach(false) && reach(true)
    }
}

/// Pressure of the weighted shift: `log` of the spectral radius of the
/// weighted transition matrix, exact to dense-eigenvalue tolerance. The
/// diagnostic series records `(1/n) log trace(M^n)`, which converges to the
/// same value for irreducible aperiodic models.
pub fn sft_pressure(model: &SftModel) -> Result<PressureEstimate, SftError> {
    let m = model.weighted_matrix();
    let rho = m
        .complex_eigenvalues()
        .iter()
        .map(|c| c.norm())
        .fold(0.0f64, f64::max);
    // No dead symbols means the graph contains a cycle, so rho > 0.
    let value = rho.ln();

    let mut series = Vec::new();
    let mut power = m.clone();
    let mut log_scale = 0.0f64;
    for n in 1..=TRACE_SERIES_LEN {
        if n > 1 {
            power = &power * &m;
            let peak = power.amax();
            if peak > 1e100 {
                power.unscale_mut(peak);
                log_scale += peak.ln();
            }
        }
        let trace = power.trace();
        if trace > 0.0 {
            series.push(SeriesPoint { n, value: (log_scale + trace.ln()) / n as f64 });
        }
    }

    let mut flags = Vec::new();
    if !model.is_irreducible() {
        flags.push(
            "reducible transition matrix; pressure is the maximum over communicating classes"
                .to_string(),
        );
    }
    Ok(PressureEstimate {
        value,
        method: Method::Sft,
        bound: BoundKind::TwoSided,
        series,
        params: format!("symbols={} edges={}", model.symbols(), model.edge_count()),
        flags,
        witness: None,
    })
}

/// Entropy of the shift: pressure with the zero potential.
pub fn sft_entropy(model: &SftModel) -> Result<f64, SftError> {
    let zeroed = SftModel { phi: vec![0.0; model.phi.len()], ..model.clone() };
    Ok(sft_pressure(&zeroed)?.value)
}
