//! Multimode Gaussian inputs and the moments of transformed outputs.
//!
//! Quadratures follow the convention `a = (X + iP)/2` with `[X, P] = 2i`, so a
//! vacuum or coherent mode has unit variance in both quadratures and two
//! uncorrelated vacua have `Var(X1 + X2) = 2`. Every formula in
//! [`crate::fidelity`] assumes this normalization; other references often use
//! `[X, P] = i` and a vacuum variance of 1/2, which rescales all variances.
//!
//! Quadrature vectors are interleaved `(X1, P1, X2, P2, ...)`, so the two
//! entries belonging to mode `k` sit at `2k` and `2k + 1`.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::transform::QuadratureTransform;

/// What a registry mode was declared as.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    Vacuum,
    Coherent { conjugate: bool },
    Epr { partner: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeDescriptor<T> {
    pub kind: ModeKind,
    pub label: String,
    pub mean: [T; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum NoiseBlock<T> {
    Unit(usize),
    /// Two adjacent modes `first`, `first + 1`.
    Epr { first: usize, grow: T, shrink: T },
}

/// Declared input modes with their first and second moments.
///
/// The covariance is block diagonal: a 2x2 identity for every vacuum or
/// coherent mode and a 4x4 two-mode squeezed block for every EPR pair.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InputRegistry<T> {
    modes: Vec<ModeDescriptor<T>>,
    blocks: Vec<NoiseBlock<T>>,
}

impl<T: Scalar> InputRegistry<T> {
    pub fn new() -> Self {
        Self {
            modes: Vec::new(),
            blocks: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn mode(&self, index: usize) -> Option<&ModeDescriptor<T>> {
        self.modes.get(index)
    }

    pub fn modes(&self) -> &[ModeDescriptor<T>] {
        &self.modes
    }

    pub fn add_vacuum(&mut self) -> usize {
        let index = self.modes.len();
        self.modes.push(ModeDescriptor {
            kind: ModeKind::Vacuum,
            label: format!("v{index}"),
            mean: [T::zero(); 2],
        });
        self.blocks.push(NoiseBlock::Unit(index));
        index
    }

    /// Adds the coherent state `|(x + ip)/2>`, or its phase conjugate
    /// `|(x - ip)/2>` when `conjugate` is set.
    pub fn add_coherent(&mut self, x: T, p: T, conjugate: bool) -> Result<usize> {
        check_finite("coherent amplitude x", x)?;
        check_finite("coherent amplitude p", p)?;
        let index = self.modes.len();
        let mean_p = if conjugate { -p } else { p };
        self.modes.push(ModeDescriptor {
            kind: ModeKind::Coherent { conjugate },
            label: if conjugate {
                format!("in*{index}")
            } else {
                format!("in{index}")
            },
            mean: [x, mean_p],
        });
        self.blocks.push(NoiseBlock::Unit(index));
        Ok(index)
    }

    /// Adds a two-mode squeezed vacuum with `Var(X1 + X2) = Var(P1 - P2) = 2e^{-2r}`.
    pub fn add_epr_pair(&mut self, r: T) -> Result<(usize, usize)> {
        check_finite("squeezing", r)?;
        if r < T::zero() {
            return Err(Error::NegativeSqueezing(r.as_f64()));
        }
        let first = self.modes.len();
        let second = first + 1;
        for (index, partner) in [(first, second), (second, first)] {
            self.modes.push(ModeDescriptor {
                kind: ModeKind::Epr { partner },
                label: format!("epr{index}"),
                mean: [T::zero(); 2],
            });
        }
        let two_r = r + r;
        self.blocks.push(NoiseBlock::Epr {
            first,
            grow: two_r.exp(),
            shrink: (-two_r).exp(),
        });
        Ok((first, second))
    }

    pub fn set_label(&mut self, index: usize, label: impl Into<String>) -> Result<()> {
        let mode = self.modes.get_mut(index).ok_or(Error::UnknownMode(index))?;
        mode.label = label.into();
        Ok(())
    }

    /// Interleaved mean vector of length `2n`.
    pub fn mean_vector(&self) -> Vec<T> {
        self.modes.iter().flat_map(|m| m.mean).collect()
    }

    /// Dense `2n x 2n` covariance.
    pub fn covariance(&self) -> Array2<T> {
        let dim = 2 * self.len();
        let mut cov = Array2::zeros((dim, dim));
        for block in &self.blocks {
            match *block {
                NoiseBlock::Unit(k) => {
                    cov[[2 * k, 2 * k]] = T::one();
                    cov[[2 * k + 1, 2 * k + 1]] = T::one();
                }
                NoiseBlock::Epr { first, grow, shrink } => {
                    let (x1, p1, x2, p2) = (2 * first, 2 * first + 1, 2 * first + 2, 2 * first + 3);
                    let half = T::lit(0.5);
                    let (cosh, sinh) = (half * (grow + shrink), half * (grow - shrink));
                    for q in [x1, p1, x2, p2] {
                        cov[[q, q]] = cosh;
                    }
                    cov[[x1, x2]] = -sinh;
                    cov[[x2, x1]] = -sinh;
                    cov[[p1, p2]] = sinh;
                    cov[[p2, p1]] = sinh;
                }
            }
        }
        cov
    }

    /// `uᵀ V w` evaluated block by block in `O(n)`.
    pub fn quadratic_form(&self, u: &[T], w: &[T]) -> T {
        debug_assert_eq!(u.len(), 2 * self.len());
        debug_assert_eq!(w.len(), 2 * self.len());
        let mut acc = T::zero();
        for block in &self.blocks {
            match *block {
                NoiseBlock::Unit(k) => {
                    acc = acc + u[2 * k] * w[2 * k] + u[2 * k + 1] * w[2 * k + 1];
                }
                NoiseBlock::Epr { first, grow, shrink } => {
                    // In the rotated basis X1 ± X2, P1 ± P2 the block is
                    // diagonal with entries e^{±2r}. Evaluating it there keeps
                    // the large cosh and sinh terms from cancelling.
                    let (x1, p1, x2, p2) = (2 * first, 2 * first + 1, 2 * first + 2, 2 * first + 3);
                    let half = T::lit(0.5);
                    let x_anti = (u[x1] - u[x2]) * (w[x1] - w[x2]);
                    let x_sym = (u[x1] + u[x2]) * (w[x1] + w[x2]);
                    let p_sym = (u[p1] + u[p2]) * (w[p1] + w[p2]);
                    let p_anti = (u[p1] - u[p2]) * (w[p1] - w[p2]);
                    acc = acc + half * (grow * (x_anti + p_sym) + shrink * (x_sym + p_anti));
                }
            }
        }
        acc
    }

    /// Expectation value of the linear combination `row · (X1, P1, ...)`.
    pub fn expectation(&self, row: &[T]) -> T {
        self.modes
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (k, m)| acc + row[2 * k] * m.mean[0] + row[2 * k + 1] * m.mean[1])
    }
}

fn check_finite<T: Scalar>(what: &'static str, value: T) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite {
            what,
            value: value.as_f64(),
        })
    }
}

/// First and second moments of a single output mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeState<T> {
    pub mean_x: T,
    pub mean_p: T,
    pub cov: [[T; 2]; 2],
}

impl<T: Scalar> ModeState<T> {
    pub fn new(mean_x: T, mean_p: T, cov: [[T; 2]; 2]) -> Self {
        Self { mean_x, mean_p, cov }
    }

    pub fn coherent(x: T, p: T) -> Self {
        Self::new(x, p, [[T::one(), T::zero()], [T::zero(), T::one()]])
    }

    pub fn var_x(&self) -> T {
        self.cov[0][0]
    }

    pub fn var_p(&self) -> T {
        self.cov[1][1]
    }

    pub fn det(&self) -> T {
        self.cov[0][0] * self.cov[1][1] - self.cov[0][1] * self.cov[1][0]
    }

    /// Uncertainty bound `det(cov) >= 1` and positive definiteness, up to `tol`.
    pub fn is_physical(&self, tol: T) -> bool {
        self.cov[0][0] > T::zero()
            && (self.cov[0][1] - self.cov[1][0]).abs() <= tol
            && self.det() >= T::one() - tol
    }

    /// Largest absolute entrywise difference of means and covariances.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut worst = (self.mean_x - other.mean_x)
            .abs()
            .max((self.mean_p - other.mean_p).abs());
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.cov[i][j] - other.cov[i][j]).abs());
            }
        }
        worst
    }
}

/// Symplectic form for `modes` modes: block diagonal `[[0, 2], [-2, 0]]`,
/// encoding `[X, P] = 2i`.
pub fn symplectic_form<T: Scalar>(modes: usize) -> Array2<T> {
    let two = T::lit(2.0);
    let mut omega = Array2::zeros((2 * modes, 2 * modes));
    for k in 0..modes {
        omega[[2 * k, 2 * k + 1]] = two;
        omega[[2 * k + 1, 2 * k]] = -two;
    }
    omega
}

/// `uᵀ Ω w` without materializing Ω; the commutator `[u·q, w·q] = i uᵀΩw`.
pub fn omega_product<T: Scalar>(u: &[T], w: &[T]) -> T {
    let two = T::lit(2.0);
    u.chunks_exact(2)
        .zip(w.chunks_exact(2))
        .fold(T::zero(), |acc, (a, b)| acc + two * (a[0] * b[1] - a[1] * b[0]))
}

/// Exact moments of one retained output mode: mean `S·μ`, covariance `S·V·Sᵀ`
/// restricted to the mode.
pub fn output_state<T: Scalar>(
    reg: &InputRegistry<T>,
    transform: &QuadratureTransform<T>,
    mode: usize,
) -> Result<ModeState<T>> {
    check_dimensions(reg, transform)?;
    transform.require_retained(mode)?;
    let (rx, rp) = transform.mode_rows(mode);
    let xp = reg.quadratic_form(&rx, &rp);
    Ok(ModeState::new(
        reg.expectation(&rx),
        reg.expectation(&rp),
        [
            [reg.quadratic_form(&rx, &rx), xp],
            [xp, reg.quadratic_form(&rp, &rp)],
        ],
    ))
}

/// `2k x 2k` covariance of the listed retained output modes, in list order.
pub fn joint_covariance<T: Scalar>(
    reg: &InputRegistry<T>,
    transform: &QuadratureTransform<T>,
    modes: &[usize],
) -> Result<Array2<T>> {
    check_dimensions(reg, transform)?;
    let mut rows = Vec::with_capacity(2 * modes.len());
    for &mode in modes {
        transform.require_retained(mode)?;
        let (rx, rp) = transform.mode_rows(mode);
        rows.push(rx);
        rows.push(rp);
    }
    let dim = rows.len();
    let mut cov = Array2::zeros((dim, dim));
    for i in 0..dim {
        for j in i..dim {
            let v = reg.quadratic_form(&rows[i], &rows[j]);
            cov[[i, j]] = v;
            cov[[j, i]] = v;
        }
    }
    Ok(cov)
}

fn check_dimensions<T: Scalar>(reg: &InputRegistry<T>, transform: &QuadratureTransform<T>) -> Result<()> {
    if reg.len() != transform.modes() {
        return Err(Error::InvalidSpec(format!(
            "registry has {} modes but transform acts on {}",
            reg.len(),
            transform.modes()
        )));
    }
    Ok(())
}
