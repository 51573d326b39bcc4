//! Plant representations and the packet-loss mode algebra.
//!
//! A plant `x_{k+1} = A x_k + B û_k + w_k`, `y_k = C x_k + v_k` receives its
//! input `û_k` over `r` lossy links. Link `i` either delivers (`α_i = 1`) or
//! drops (`α_i = 0`) its packet, and the joint delivery pattern is the mode
//! `θ_k`. Two actuator behaviours are modelled:
//!
//! * [`LossStrategy::Zero`]: a dropped channel applies zero,
//!   `û_k = Γ(θ_k) u_k`.
//! * [`LossStrategy::Hold`]: a dropped channel re-applies its last value,
//!   `û_k = Γ(θ_k) u_k + (I − Γ(θ_k)) û_{k−1}`. The held values are appended
//!   to the state, see [`AugmentedModel`].
//!
//! The same plant also has an input-output (ARMA) form with scalar AR
//! coefficients, produced by [`ss_to_arma`] and evaluated by [`io_predict`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

const COV_TOL: f64 = 1e-10;

/// Linear time-invariant plant with Gaussian process and measurement noise.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantModel {
    a: Matrix,
    b: Matrix,
    c: Matrix,
    q: Matrix,
    r: Matrix,
}

impl PlantModel {
    pub fn new(a: Matrix, b: Matrix, c: Matrix, q: Matrix, r: Matrix) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || !a.is_square() {
            return Err(Error::dim("A", "non-empty square", format!("{:?}", a.shape())));
        }
        if b.nrows() != n || b.ncols() == 0 {
            return Err(Error::dim("B", format!("{n}×r"), format!("{:?}", b.shape())));
        }
        let m = c.nrows();
        if m == 0 || c.ncols() != n {
            return Err(Error::dim("C", format!("m×{n}"), format!("{:?}", c.shape())));
        }
        if q.shape() != (n, n) {
            return Err(Error::dim("Q", format!("{n}×{n}"), format!("{:?}", q.shape())));
        }
        if r.shape() != (m, m) {
            return Err(Error::dim("R", format!("{m}×{m}"), format!("{:?}", r.shape())));
        }
        for (name, mat) in [("A", &a), ("B", &b), ("C", &c), ("Q", &q), ("R", &r)] {
            if !linalg::is_finite(mat) {
                return Err(Error::Numerical(format!("{name} contains non-finite entries")));
            }
        }
        if !linalg::is_symmetric_psd(&q, COV_TOL) {
            return Err(Error::Domain("Q must be symmetric positive semi-definite".into()));
        }
        // R = 0 is allowed for noiseless simulation; estimators that need an
        // invertible output covariance report a numerical error instead.
        if !linalg::is_symmetric_psd(&r, COV_TOL) {
            return Err(Error::Domain("R must be symmetric positive semi-definite".into()));
        }
        Ok(Self { a, b, c, q, r })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }
    pub fn b(&self) -> &Matrix {
        &self.b
    }
    pub fn c(&self) -> &Matrix {
        &self.c
    }
    pub fn q(&self) -> &Matrix {
        &self.q
    }
    pub fn r(&self) -> &Matrix {
        &self.r
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }
    /// Output dimension.
    pub fn m(&self) -> usize {
        self.c.nrows()
    }
    /// Number of input links.
    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    /// Same plant with the measurement noise covariance multiplied by `factor`.
    pub fn with_scaled_r(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.a.clone(),
            self.b.clone(),
            self.c.clone(),
            self.q.clone(),
            &self.r * factor,
        )
    }
}

/// Input-output form
/// `y_k + Σ a_i y_{k−i} = Σ b_j û_{k−j} + e_k + Σ c_m e_{k−m}`, `E[e eᵀ] = Λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmaModel {
    a: Vec<f64>,
    b: Vec<Matrix>,
    c: Vec<f64>,
    lambda: Matrix,
}

impl ArmaModel {
    pub fn new(a: Vec<f64>, b: Vec<Matrix>, c: Vec<f64>, lambda: Matrix) -> Result<Self> {
        let m = lambda.nrows();
        if m == 0 || !lambda.is_square() {
            return Err(Error::dim("Λ", "non-empty square", format!("{:?}", lambda.shape())));
        }
        let Some(first) = b.first() else {
            return Err(Error::Domain("ARMA model needs at least one input coefficient".into()));
        };
        let shape = first.shape();
        if shape.0 != m || shape.1 == 0 {
            return Err(Error::dim("b_1", format!("{m}×r"), format!("{shape:?}")));
        }
        if let Some((j, bj)) = b.iter().enumerate().find(|(_, bj)| bj.shape() != shape) {
            return Err(Error::dim(
                format!("b_{}", j + 1),
                format!("{shape:?}"),
                format!("{:?}", bj.shape()),
            ));
        }
        let finite = a.iter().chain(&c).all(|v| v.is_finite())
            && b.iter().all(linalg::is_finite)
            && linalg::is_finite(&lambda);
        if !finite {
            return Err(Error::Numerical("ARMA coefficients must be finite".into()));
        }
        if !linalg::is_symmetric_psd(&lambda, COV_TOL) {
            return Err(Error::Domain("Λ must be symmetric positive semi-definite".into()));
        }
        Ok(Self { a, b, c, lambda })
    }

    /// AR coefficients `a_1..a_n`.
    pub fn ar(&self) -> &[f64] {
        &self.a
    }
    /// Input coefficients `b_1..b_p`.
    pub fn input_coeffs(&self) -> &[Matrix] {
        &self.b
    }
    /// MA coefficients `c_1..c_h`.
    pub fn ma(&self) -> &[f64] {
        &self.c
    }
    pub fn lambda(&self) -> &Matrix {
        &self.lambda
    }
    pub fn ar_order(&self) -> usize {
        self.a.len()
    }
    pub fn input_order(&self) -> usize {
        self.b.len()
    }
    pub fn outputs(&self) -> usize {
        self.lambda.nrows()
    }
    pub fn inputs(&self) -> usize {
        self.b[0].ncols()
    }
}

/// A packet-delivery pattern, stored as a zero-based index.
///
/// The bijection with delivery vectors is `index = Σ α_i 2^{i−1}`, so index 0
/// is "every link dropped" and index `s − 1` is "every link delivered".
/// Displayed and serialized 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mode(usize);

impl Mode {
    pub fn from_index(index: usize) -> Self {
        Mode(index)
    }
    pub fn index(self) -> usize {
        self.0
    }
    /// 1-based mode number.
    pub fn number(self) -> usize {
        self.0 + 1
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// The `s = 2^r` modes of an `r`-link network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeSpace {
    links: usize,
}

impl ModeSpace {
    pub const MAX_LINKS: usize = 16;

    pub fn new(links: usize) -> Result<Self> {
        if links == 0 || links > Self::MAX_LINKS {
            return Err(Error::Domain(format!(
                "number of links must be in 1..={}, got {links}",
                Self::MAX_LINKS
            )));
        }
        Ok(Self { links })
    }

    pub fn links(&self) -> usize {
        self.links
    }

    /// Number of modes `s`.
    pub fn size(&self) -> usize {
        1 << self.links
    }

    /// Mode from its 1-based number `j ∈ 1..=s`.
    pub fn mode(&self, number: usize) -> Result<Mode> {
        if number == 0 || number > self.size() {
            return Err(Error::Domain(format!(
                "mode number {number} outside 1..={}",
                self.size()
            )));
        }
        Ok(Mode(number - 1))
    }

    pub fn check(&self, mode: Mode) -> Result<Mode> {
        if mode.0 >= self.size() {
            return Err(Error::Domain(format!(
                "mode number {} outside 1..={}",
                mode.number(),
                self.size()
            )));
        }
        Ok(mode)
    }

    pub fn all_lost(&self) -> Mode {
        Mode(0)
    }

    pub fn all_delivered(&self) -> Mode {
        Mode(self.size() - 1)
    }

    pub fn modes(&self) -> impl Iterator<Item = Mode> {
        (0..self.size()).map(Mode)
    }

    /// Delivery vector `(α_1, .., α_r)`.
    pub fn decode(&self, mode: Mode) -> Result<Vec<bool>> {
        let mode = self.check(mode)?;
        Ok((0..self.links).map(|i| mode.0 >> i & 1 == 1).collect())
    }

    pub fn encode(&self, delivered: &[bool]) -> Result<Mode> {
        if delivered.len() != self.links {
            return Err(Error::dim("delivery vector", self.links, delivered.len()));
        }
        Ok(Mode(
            delivered
                .iter()
                .enumerate()
                .filter(|(_, &d)| d)
                .map(|(i, _)| 1 << i)
                .sum(),
        ))
    }

    /// `Γ(θ) = diag(α_1, .., α_r)`.
    pub fn gamma(&self, mode: Mode) -> Result<Matrix> {
        let alpha = self.decode(mode)?;
        Ok(Matrix::from_diagonal(&Vector::from_iterator(
            self.links,
            alpha.iter().map(|&d| if d { 1.0 } else { 0.0 }),
        )))
    }
}

/// What the actuator applies on a channel whose packet was dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossStrategy {
    Zero,
    Hold,
}

impl fmt::Display for LossStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossStrategy::Zero => "zero",
            LossStrategy::Hold => "hold",
        })
    }
}

impl std::str::FromStr for LossStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero" => Ok(LossStrategy::Zero),
            "hold" => Ok(LossStrategy::Hold),
            other => Err(Error::Domain(format!("unknown loss strategy `{other}`"))),
        }
    }
}

/// Actuator signal `û` given the sent input `u` and the previously applied `û_prev`.
pub fn apply_loss(
    strategy: LossStrategy,
    space: &ModeSpace,
    mode: Mode,
    u: &Vector,
    u_prev_applied: &Vector,
) -> Result<Vector> {
    let r = space.links();
    if u.len() != r {
        return Err(Error::dim("u", r, u.len()));
    }
    if u_prev_applied.len() != r {
        return Err(Error::dim("previous applied input", r, u_prev_applied.len()));
    }
    let alpha = space.decode(mode)?;
    Ok(Vector::from_fn(r, |i, _| match (alpha[i], strategy) {
        (true, _) => u[i],
        (false, LossStrategy::Zero) => 0.0,
        (false, LossStrategy::Hold) => u_prev_applied[i],
    }))
}

/// Mode-dependent state-space model seen by the estimators.
///
/// For `Zero` the state is the plant state and only the input matrix depends
/// on the mode. For `Hold` the state is `(x_k, û_{k−1})` of dimension `n + r`:
///
/// ```text
/// A(θ) = [ A  B(I − Γ) ]    B(θ) = [ BΓ ]    C̃ = [ C  0 ]    Q̃ = [ Q  0 ]
///        [ 0   I − Γ   ]           [ Γ  ]                          [ 0  0 ]
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedModel {
    base: PlantModel,
    strategy: LossStrategy,
    space: ModeSpace,
    c: Matrix,
    q: Matrix,
}

impl AugmentedModel {
    pub fn new(base: PlantModel, strategy: LossStrategy) -> Result<Self> {
        let space = ModeSpace::new(base.inputs())?;
        let (n, m, r) = (base.n(), base.m(), base.inputs());
        let (c, q) = match strategy {
            LossStrategy::Zero => (base.c.clone(), base.q.clone()),
            LossStrategy::Hold => {
                let mut c = Matrix::zeros(m, n + r);
                c.view_mut((0, 0), (m, n)).copy_from(&base.c);
                let mut q = Matrix::zeros(n + r, n + r);
                q.view_mut((0, 0), (n, n)).copy_from(&base.q);
                (c, q)
            }
        };
        Ok(Self {
            base,
            strategy,
            space,
            c,
            q,
        })
    }

    pub fn base(&self) -> &PlantModel {
        &self.base
    }
    pub fn strategy(&self) -> LossStrategy {
        self.strategy
    }
    pub fn space(&self) -> &ModeSpace {
        &self.space
    }

    pub fn state_dim(&self) -> usize {
        match self.strategy {
            LossStrategy::Zero => self.base.n(),
            LossStrategy::Hold => self.base.n() + self.base.inputs(),
        }
    }

    /// `A(θ)`.
    pub fn transition(&self, mode: Mode) -> Result<Matrix> {
        match self.strategy {
            LossStrategy::Zero => {
                self.space.check(mode)?;
                Ok(self.base.a.clone())
            }
            LossStrategy::Hold => {
                let r = self.base.inputs();
                let held = Matrix::identity(r, r) - self.space.gamma(mode)?;
                Ok(linalg::block2(
                    &self.base.a,
                    &(&self.base.b * &held),
                    &Matrix::zeros(r, self.base.n()),
                    &held,
                ))
            }
        }
    }

    /// `B(θ)`.
    pub fn input(&self, mode: Mode) -> Result<Matrix> {
        let gamma = self.space.gamma(mode)?;
        let bg = &self.base.b * &gamma;
        Ok(match self.strategy {
            LossStrategy::Zero => bg,
            LossStrategy::Hold => linalg::vstack(&bg, &gamma),
        })
    }

    /// Output matrix on the (possibly augmented) state.
    pub fn output(&self) -> &Matrix {
        &self.c
    }

    /// Process noise covariance on the (possibly augmented) state; singular for `Hold`.
    pub fn process_noise(&self) -> &Matrix {
        &self.q
    }

    pub fn measurement_noise(&self) -> &Matrix {
        &self.base.r
    }

    /// Assembles a model-dimension state from a plant state and the held inputs.
    /// `held` is ignored for `Zero`.
    pub fn compose_state(&self, x: &Vector, held: &Vector) -> Result<Vector> {
        let (n, r) = (self.base.n(), self.base.inputs());
        if x.len() != n {
            return Err(Error::dim("plant state", n, x.len()));
        }
        match self.strategy {
            LossStrategy::Zero => Ok(x.clone()),
            LossStrategy::Hold => {
                if held.len() != r {
                    return Err(Error::dim("held input", r, held.len()));
                }
                Ok(Vector::from_iterator(n + r, x.iter().chain(held.iter()).copied()))
            }
        }
    }
}

/// Characteristic polynomial coefficients `det(zI − A) = z^n + a_1 z^{n−1} + … + a_n`
/// together with the Faddeev–LeVerrier matrices `M_0 = I, …, M_{n−1}`
/// (`M_j = A M_{j−1} + a_j I`), which satisfy `adj(zI − A) = Σ M_{j−1} z^{n−j}`.
pub fn faddeev_leverrier(a: &Matrix) -> Result<(Vec<f64>, Vec<Matrix>)> {
    if !a.is_square() || a.nrows() == 0 {
        return Err(Error::dim("A", "non-empty square", format!("{:?}", a.shape())));
    }
    let n = a.nrows();
    let eye = Matrix::identity(n, n);
    let mut coeffs = Vec::with_capacity(n);
    let mut resolvent = Vec::with_capacity(n);
    let mut m = eye.clone();
    for k in 1..=n {
        let am = a * &m;
        let ak = -am.trace() / k as f64;
        resolvent.push(m);
        m = am + &eye * ak;
        coeffs.push(ak);
    }
    Ok((coeffs, resolvent))
}

/// Input-output form of a noise-free-process plant.
///
/// Requires `Q = 0` and square invertible `C`. Then `e_k = v_k`, the MA
/// coefficients repeat the AR coefficients and `Λ = R`.
pub fn ss_to_arma(plant: &PlantModel) -> Result<ArmaModel> {
    if !plant.c.is_square() || plant.c.clone().try_inverse().is_none() {
        return Err(Error::UnsupportedConversion(
            "output matrix C must be square and invertible".into(),
        ));
    }
    if plant.q.amax() != 0.0 {
        return Err(Error::UnsupportedConversion(
            "process noise Q must be zero; supply an ArmaModel explicitly for plants with Q ≠ 0"
                .into(),
        ));
    }
    let (ar, resolvent) = faddeev_leverrier(&plant.a)?;
    let b = resolvent
        .iter()
        .map(|mj| &plant.c * mj * &plant.b)
        .collect();
    ArmaModel::new(ar.clone(), b, ar, plant.r.clone())
}

/// Regressors of the input-output model at time `k`, most recent first.
///
/// Missing history (a slice shorter than the model order) is treated as zero.
#[derive(Debug, Clone, Copy)]
pub struct IoRegressors<'a> {
    /// `y_{k−1}, y_{k−2}, …`
    pub outputs: &'a [Vector],
    /// `u_{k−1}, u_{k−2}, …` (inputs as sent)
    pub inputs: &'a [Vector],
    /// `û_{k−2}, û_{k−3}, …` (applied inputs one step further back; `Hold` only)
    pub applied: &'a [Vector],
    /// `θ_{k−1}, θ_{k−2}, …`; must cover the input order.
    pub modes: &'a [Mode],
}

/// Noise-free part of the input-output model:
///
/// `−Σ a_i y_{k−i} + Σ_l b_l Γ(θ_{k−l}) u_{k−l}`, plus
/// `Σ_l b_l (I − Γ(θ_{k−l})) û_{k−l−1}` under `Hold`.
pub fn io_predict(
    arma: &ArmaModel,
    space: &ModeSpace,
    strategy: LossStrategy,
    reg: IoRegressors<'_>,
) -> Result<Vector> {
    let (m, r) = (arma.outputs(), arma.inputs());
    if space.links() != r {
        return Err(Error::dim("mode space links", r, space.links()));
    }
    if reg.modes.len() < arma.input_order() {
        return Err(Error::dim("mode history", arma.input_order(), reg.modes.len()));
    }
    let mut y = Vector::zeros(m);
    for (ai, yi) in arma.ar().iter().zip(reg.outputs) {
        if yi.len() != m {
            return Err(Error::dim("output history entry", m, yi.len()));
        }
        y.axpy(-ai, yi, 1.0);
    }
    let eye = Matrix::identity(r, r);
    for (l, bl) in arma.input_coeffs().iter().enumerate() {
        let gamma = space.gamma(reg.modes[l])?;
        if let Some(ul) = reg.inputs.get(l) {
            if ul.len() != r {
                return Err(Error::dim("input history entry", r, ul.len()));
            }
            y += bl * (&gamma * ul);
        }
        if strategy == LossStrategy::Hold {
            if let Some(hl) = reg.applied.get(l) {
                if hl.len() != r {
                    return Err(Error::dim("applied input history entry", r, hl.len()));
                }
                y += bl * ((&eye - &gamma) * hl);
            }
        }
    }
    Ok(y)
}
