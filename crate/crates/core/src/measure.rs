//! Dual-homodyne measurement and classical feedforward.
//!
//! Measuring a mode pair mixes it on a 50/50 splitter and reads X on one
//! output and P on the other. The two measured quadratures commute with each
//! other and with every mode that is still physical. That is what allows the
//! Heisenberg-picture treatment: a displacement driven by the outcome just
//! adds the measured operator, scaled by the gain, to the target quadrature.
//!
//! Gain normalization: a feedforward with gains `(g_x, g_p)` performs
//! `X_t += g_x·X_m` and `P_t += g_p·P_m` on each receiving mode, where
//! `X_m = (X_a + X_b)/√2` and `P_m = (P_a - P_b)/√2` carry the 1/√2 of the
//! measurement splitter. Applied to all `M` outputs of a cascade this is the
//! same as displacing the cascade input by `g·√(M/2)` times the un-normalized
//! signal `X_a + X_b`, which is the coefficient the protocols need.

use crate::error::{Error, Result};
use crate::gaussian::omega_product;
use crate::network::{Network, SplitterSpec};
use crate::scalar::Scalar;
use crate::transform::Op;

/// Above this many modes the numeric commutator check in
/// [`Network::feedforward`] is skipped; the structural checks always run.
const NUMERIC_CHECK_LIMIT: usize = 256;

/// Classical outcome of one or more dual-homodyne measurements, kept as
/// operators over the input quadratures.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord<T> {
    pub x_row: Vec<T>,
    pub p_row: Vec<T>,
    pub source_modes: Vec<usize>,
    /// `(consumed quadrature index, weight)` pairs whose sum is the X signal.
    x_terms: Vec<(usize, T)>,
    p_terms: Vec<(usize, T)>,
}

impl<T: Scalar> MeasurementRecord<T> {
    pub fn x_terms(&self) -> &[(usize, T)] {
        &self.x_terms
    }

    pub fn p_terms(&self) -> &[(usize, T)] {
        &self.p_terms
    }
}

/// Linear combination of two records from disjoint measurements:
/// `x = g1x·x1 + g2x·x2`, `p = g1p·p1 + g2p·p2`.
pub fn combine_records<T: Scalar>(
    first: &MeasurementRecord<T>,
    second: &MeasurementRecord<T>,
    g1x: T,
    g1p: T,
    g2x: T,
    g2p: T,
) -> Result<MeasurementRecord<T>> {
    if let Some(&shared) = first
        .source_modes
        .iter()
        .find(|m| second.source_modes.contains(m))
    {
        return Err(Error::OverlappingRecords(shared));
    }
    if first.x_row.len() != second.x_row.len() {
        return Err(Error::InvalidSpec("records come from different networks".into()));
    }
    let mix = |a: &[T], ga: T, b: &[T], gb: T| -> Vec<T> {
        a.iter().zip(b).map(|(&u, &w)| ga * u + gb * w).collect()
    };
    Ok(MeasurementRecord {
        x_row: mix(&first.x_row, g1x, &second.x_row, g2x),
        p_row: mix(&first.p_row, g1p, &second.p_row, g2p),
        source_modes: first
            .source_modes
            .iter()
            .chain(&second.source_modes)
            .copied()
            .collect(),
        x_terms: scaled(&first.x_terms, g1x, &second.x_terms, g2x),
        p_terms: scaled(&first.p_terms, g1p, &second.p_terms, g2p),
    })
}

fn scaled<T: Scalar>(a: &[(usize, T)], ga: T, b: &[(usize, T)], gb: T) -> Vec<(usize, T)> {
    let a = a.iter().map(|&(q, w)| (q, ga * w));
    a.chain(b.iter().map(|&(q, w)| (q, gb * w))).collect()
}

impl<T: Scalar> Network<T> {
    /// Mixes `mode_a` and `mode_b` on a 50/50 splitter and measures
    /// `X_m = (X_a + X_b)/√2` and `P_m = (P_a - P_b)/√2`. Both modes are
    /// consumed.
    pub fn dual_homodyne(&mut self, mode_a: usize, mode_b: usize) -> Result<MeasurementRecord<T>> {
        self.require_pair(mode_a, mode_b)?;
        self.beam_splitter(SplitterSpec::generic(mode_a, mode_b, T::lit(0.5)))?;
        self.transform.consume(mode_a);
        self.transform.consume(mode_b);
        let (x_source, p_source) = (2 * mode_a, 2 * mode_b + 1);
        let record = MeasurementRecord {
            x_row: self.transform.row(x_source),
            p_row: self.transform.row(p_source),
            source_modes: vec![mode_a, mode_b],
            x_terms: vec![(x_source, T::one())],
            p_terms: vec![(p_source, T::one())],
        };
        let defect = omega_product(&record.x_row, &record.p_row).abs();
        if defect > T::tolerance() {
            return Err(Error::NonCommuting(defect.as_f64()));
        }
        Ok(record)
    }

    /// Displaces `target` by the measured signal: `X += g_x·x`, `P += g_p·p`.
    pub fn feedforward(&mut self, record: &MeasurementRecord<T>, target: usize, g_x: T, g_p: T) -> Result<()> {
        self.transform.require_retained(target)?;
        for (what, g) in [("feedforward gain g_x", g_x), ("feedforward gain g_p", g_p)] {
            if !g.is_finite() {
                return Err(Error::NonFinite { what, value: g.as_f64() });
            }
        }
        for &(q, _) in record.x_terms.iter().chain(&record.p_terms) {
            if self.transform.is_retained(q / 2) {
                return Err(Error::NonCommuting(f64::NAN));
            }
        }
        if self.transform.modes() <= NUMERIC_CHECK_LIMIT && record.x_row.len() == 2 * self.transform.modes() {
            let (tx, tp) = self.transform.mode_rows(target);
            let defect = [&tx, &tp]
                .iter()
                .flat_map(|t| [omega_product(t, &record.x_row), omega_product(t, &record.p_row)])
                .fold(T::zero(), |acc, v| acc.max(v.abs()));
            if defect > T::tolerance() {
                return Err(Error::NonCommuting(defect.as_f64()));
            }
        }
        for &(source, w) in &record.x_terms {
            self.transform.push(Op::Shear {
                target: 2 * target,
                source,
                gain: g_x * w,
            });
        }
        for &(source, w) in &record.p_terms {
            self.transform.push(Op::Shear {
                target: 2 * target + 1,
                source,
                gain: g_p * w,
            });
        }
        Ok(())
    }
}
