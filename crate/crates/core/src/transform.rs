//! Linear Heisenberg-picture maps on quadrature vectors.
//!
//! A [`QuadratureTransform`] is stored in factored form: an ordered list of
//! sparse elementary maps acting on `2n` interleaved quadratures. Two kinds
//! exist. A mix applies the same real 2x2 matrix to the X and the P entries of
//! two modes (every beam splitter here is of that type). A shear adds a
//! multiple of one quadrature to another, which is how a measured,
//! now-classical quadrature feeds a displacement.
//!
//! Output mode `k` lives in slot `k`; operations never create or delete slots,
//! so the full transform is square. Row `q` of the materialized matrix is
//! obtained by pulling the unit vector `e_q` back through the op list, which
//! costs `O(n + ops)` and never needs the `O(n^2)` dense matrix. Networks with
//! tens of thousands of modes stay cheap as long as only a few rows are read.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::gaussian::omega_product;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Op<T> {
    /// `(q_a, q_b) <- m · (q_a, q_b)` for `q ∈ {X, P}`.
    Mix { a: usize, b: usize, m: [[T; 2]; 2] },
    /// `q[target] <- q[target] + gain · q[source]`, on quadrature indices.
    Shear { target: usize, source: usize, gain: T },
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureTransform<T> {
    modes: usize,
    ops: Vec<Op<T>>,
    consumed: Vec<bool>,
}

impl<T: Scalar> QuadratureTransform<T> {
    pub fn identity(modes: usize) -> Self {
        Self {
            modes,
            ops: Vec::new(),
            consumed: vec![false; modes],
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn op_count(&self) -> usize {
        self.ops.len()
    }

    /// Appends `count` untouched modes, returning the index of the first.
    pub fn extend(&mut self, count: usize) -> usize {
        let first = self.modes;
        self.modes += count;
        self.consumed.resize(self.modes, false);
        first
    }

    pub fn is_retained(&self, mode: usize) -> bool {
        mode < self.modes && !self.consumed[mode]
    }

    pub fn retained_modes(&self) -> Vec<usize> {
        (0..self.modes).filter(|&k| !self.consumed[k]).collect()
    }

    pub fn consumed_modes(&self) -> Vec<usize> {
        (0..self.modes).filter(|&k| self.consumed[k]).collect()
    }

    pub fn require_retained(&self, mode: usize) -> Result<()> {
        if mode >= self.modes {
            Err(Error::UnknownMode(mode))
        } else if self.consumed[mode] {
            Err(Error::ModeConsumed(mode))
        } else {
            Ok(())
        }
    }

    pub(crate) fn push(&mut self, op: Op<T>) {
        self.ops.push(op);
    }

    pub(crate) fn consume(&mut self, mode: usize) {
        self.consumed[mode] = true;
    }

    /// Row `quadrature` of the full matrix: output quadrature as a linear
    /// combination of input quadratures.
    pub fn row(&self, quadrature: usize) -> Vec<T> {
        let mut v = vec![T::zero(); 2 * self.modes];
        v[quadrature] = T::one();
        for op in self.ops.iter().rev() {
            match *op {
                Op::Mix { a, b, m } => {
                    for q in 0..2 {
                        let (ia, ib) = (2 * a + q, 2 * b + q);
                        let (va, vb) = (v[ia], v[ib]);
                        v[ia] = va * m[0][0] + vb * m[1][0];
                        v[ib] = va * m[0][1] + vb * m[1][1];
                    }
                }
                Op::Shear { target, source, gain } => {
                    v[source] = v[source] + gain * v[target];
                }
            }
        }
        v
    }

    /// X and P rows of one output mode.
    pub fn mode_rows(&self, mode: usize) -> (Vec<T>, Vec<T>) {
        (self.row(2 * mode), self.row(2 * mode + 1))
    }

    /// Applies the transform to a concrete quadrature vector in place.
    pub fn apply(&self, quadratures: &mut [T]) {
        assert_eq!(quadratures.len(), 2 * self.modes, "quadrature vector length");
        for op in &self.ops {
            match *op {
                Op::Mix { a, b, m } => {
                    for q in 0..2 {
                        let (ia, ib) = (2 * a + q, 2 * b + q);
                        let (xa, xb) = (quadratures[ia], quadratures[ib]);
                        quadratures[ia] = m[0][0] * xa + m[0][1] * xb;
                        quadratures[ib] = m[1][0] * xa + m[1][1] * xb;
                    }
                }
                Op::Shear { target, source, gain } => {
                    quadratures[target] = quadratures[target] + gain * quadratures[source];
                }
            }
        }
    }

    /// Dense `2n x 2n` matrix. Quadratic in the mode count; meant for small
    /// networks and tests.
    pub fn matrix(&self) -> Array2<T> {
        let dim = 2 * self.modes;
        let mut out = Array2::zeros((dim, dim));
        for q in 0..dim {
            for (j, value) in self.row(q).into_iter().enumerate() {
                out[[q, j]] = value;
            }
        }
        out
    }

    /// Largest deviation from canonical commutators among the rows of
    /// `modes` (which must be retained), and from zero between those rows and
    /// each of `classical_rows` and among the classical rows themselves.
    pub fn commutator_defect(&self, modes: &[usize], classical_rows: &[Vec<T>]) -> Result<T> {
        let mut rows = Vec::with_capacity(2 * modes.len());
        for &mode in modes {
            self.require_retained(mode)?;
            let (rx, rp) = self.mode_rows(mode);
            rows.push(rx);
            rows.push(rp);
        }
        let two = T::lit(2.0);
        let mut worst = T::zero();
        for i in 0..rows.len() {
            for j in i..rows.len() {
                let expected = if i % 2 == 0 && j == i + 1 { two } else { T::zero() };
                worst = worst.max((omega_product(&rows[i], &rows[j]) - expected).abs());
            }
            for classical in classical_rows {
                worst = worst.max(omega_product(&rows[i], classical).abs());
            }
        }
        for i in 0..classical_rows.len() {
            for j in i + 1..classical_rows.len() {
                worst = worst.max(omega_product(&classical_rows[i], &classical_rows[j]).abs());
            }
        }
        Ok(worst)
    }

    /// [`Self::commutator_defect`] over every retained mode.
    pub fn symplectic_defect(&self, classical_rows: &[Vec<T>]) -> T {
        self.commutator_defect(&self.retained_modes(), classical_rows)
            .expect("retained modes are retained")
    }
}
