//! Markov chains over the mode set.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::model::{Mode, ModeSpace};

const ROW_SUM_TOL: f64 = 1e-12;

fn check_stochastic(rows: &Matrix, what: &str) -> Result<()> {
    if !rows.is_square() || rows.nrows() == 0 {
        return Err(Error::dim(what, "non-empty square", format!("{:?}", rows.shape())));
    }
    for (i, row) in rows.row_iter().enumerate() {
        if let Some(x) = row.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::Domain(format!(
                "{what} row {} has entry {x} outside [0, 1]",
                i + 1
            )));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::Domain(format!("{what} row {} sums to {sum}, not 1", i + 1)));
        }
    }
    Ok(())
}

/// Row-stochastic `s × s` matrix, entry `(i, j) = Pr(θ_k = j | θ_{k−1} = i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    p: Matrix,
}

impl TransitionMatrix {
    pub fn new(p: Matrix) -> Result<Self> {
        check_stochastic(&p, "transition matrix")?;
        Ok(Self { p })
    }

    pub fn identity(s: usize) -> Self {
        Self {
            p: Matrix::identity(s, s),
        }
    }

    pub fn size(&self) -> usize {
        self.p.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.p
    }

    pub fn prob(&self, from: Mode, to: Mode) -> f64 {
        self.p[(from.index(), to.index())]
    }

    /// Stationary distribution `π = π P`, solved directly with `Σ π = 1`
    /// replacing one balance equation. Falls back to the uniform vector when the
    /// chain has several closed classes and the system is singular.
    pub fn stationary(&self) -> Vector {
        let s = self.size();
        let mut system = self.p.transpose() - Matrix::identity(s, s);
        system.row_mut(s - 1).fill(1.0);
        let mut rhs = Vector::zeros(s);
        rhs[s - 1] = 1.0;
        match system.lu().solve(&rhs) {
            Some(pi) if pi.iter().all(|x| x.is_finite() && *x >= -1e-12) => {
                let pi = pi.map(|x| x.max(0.0));
                let total = pi.sum();
                pi / total
            }
            _ => Vector::from_element(s, 1.0 / s as f64),
        }
    }
}

/// Two-state chain of a single link over `{α = 0, α = 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkChain {
    p: [[f64; 2]; 2],
}

impl LinkChain {
    pub fn new(p: [[f64; 2]; 2]) -> Result<Self> {
        check_stochastic(&Matrix::from_fn(2, 2, |i, j| p[i][j]), "link chain")?;
        Ok(Self { p })
    }

    /// `Pr(α_k = to | α_{k−1} = from)`.
    pub fn prob(&self, from: bool, to: bool) -> f64 {
        self.p[from as usize][to as usize]
    }

    pub fn rows(&self) -> [[f64; 2]; 2] {
        self.p
    }
}

/// Joint chain of independent links: the transition probability between two
/// modes is the product of the per-link transition probabilities, with link
/// `i` read from bit `i − 1` of the mode index.
pub fn kron_compose(links: &[LinkChain], space: &ModeSpace) -> Result<TransitionMatrix> {
    if links.is_empty() {
        return Err(Error::Domain("at least one link chain is required".into()));
    }
    if links.len() != space.links() {
        return Err(Error::dim("link chains", space.links(), links.len()));
    }
    let s = space.size();
    let p = Matrix::from_fn(s, s, |from, to| {
        links
            .iter()
            .enumerate()
            .map(|(i, link)| link.prob(from >> i & 1 == 1, to >> i & 1 == 1))
            .product()
    });
    TransitionMatrix::new(p)
}

/// Probability vector over the modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModePosterior {
    probs: Vector,
}

impl ModePosterior {
    pub const TOLERANCE: f64 = 1e-12;

    pub fn new(probs: Vector) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Domain("mode distribution must be non-empty".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Domain("mode probabilities must be finite and nonnegative".into()));
        }
        let sum = probs.sum();
        if (sum - 1.0).abs() > Self::TOLERANCE {
            return Err(Error::Domain(format!("mode probabilities sum to {sum}, not 1")));
        }
        Ok(Self { probs })
    }

    pub fn uniform(s: usize) -> Self {
        Self {
            probs: Vector::from_element(s, 1.0 / s as f64),
        }
    }

    pub fn point_mass(s: usize, mode: Mode) -> Self {
        let mut probs = Vector::zeros(s);
        probs[mode.index()] = 1.0;
        Self { probs }
    }

    /// Normalizes a nonnegative weight vector with a positive total.
    pub(crate) fn from_weights(weights: Vector) -> Self {
        let total = weights.sum();
        Self {
            probs: weights / total,
        }
    }

    pub fn probs(&self) -> &Vector {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Most probable mode; ties go to the lowest index.
    pub fn argmax(&self) -> Mode {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        Mode::from_index(best)
    }
}

/// One-step prediction `E_h = Σ_l P[l, h] · posterior_l`.
pub fn predict_prior(posterior: &ModePosterior, p: &TransitionMatrix) -> Result<Vector> {
    if posterior.len() != p.size() {
        return Err(Error::dim("mode distribution", p.size(), posterior.len()));
    }
    Ok(p.matrix().tr_mul(posterior.probs()))
}

/// Draws the next mode by inverse CDF over row `current` with one uniform draw.
pub fn sample_next<R: Rng + ?Sized>(p: &TransitionMatrix, current: Mode, rng: &mut R) -> Mode {
    sample_from(p.matrix().row(current.index()).iter().copied(), rng)
}

/// Inverse-CDF draw from a probability vector; a draw exactly on a bin
/// boundary resolves to the lower index.
pub fn sample_from<R: Rng + ?Sized>(probs: impl IntoIterator<Item = f64>, rng: &mut R) -> Mode {
    let draw: f64 = rng.random();
    let mut cdf = 0.0;
    let mut last_positive = 0;
    for (j, pj) in probs.into_iter().enumerate() {
        if pj > 0.0 {
            last_positive = j;
            cdf += pj;
            if draw <= cdf {
                return Mode::from_index(j);
            }
        }
    }
    // rounding left the cumulative sum just under the draw
    Mode::from_index(last_positive)
}
