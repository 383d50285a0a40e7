//! Passive linear-optics networks: beam splitters, the 1→M splitter cascade
//! and N-copy concentration.

use crate::error::{Error, Result};
use crate::gaussian::{InputRegistry, ModeState};
use crate::scalar::Scalar;
use crate::transform::{Op, QuadratureTransform};

/// Sign placement of a beam splitter's 2x2 matrix.
///
/// `Generic` and `Cascade` are the reflecting form
/// `out_a = √t·a + √(1-t)·b`, `out_b = √(1-t)·a - √t·b`; the cascade tag only
/// records where the splitter came from. `Bs0` is the rotating form
/// `out_a = √t·a - √(1-t)·b`, `out_b = √(1-t)·a + √t·b`, and `Bs0Reversed`
/// flips the sign of its reflection amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitterConvention {
    Generic,
    Cascade,
    Bs0,
    Bs0Reversed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitterSpec<T> {
    pub mode_a: usize,
    pub mode_b: usize,
    pub transmissivity: T,
    pub convention: SplitterConvention,
}

impl<T: Scalar> SplitterSpec<T> {
    pub fn new(mode_a: usize, mode_b: usize, transmissivity: T, convention: SplitterConvention) -> Self {
        Self {
            mode_a,
            mode_b,
            transmissivity,
            convention,
        }
    }

    pub fn generic(mode_a: usize, mode_b: usize, transmissivity: T) -> Self {
        Self::new(mode_a, mode_b, transmissivity, SplitterConvention::Generic)
    }

    /// Orthogonal 2x2 matrix acting on `(in_a, in_b)`.
    pub fn matrix(&self) -> Result<[[T; 2]; 2]> {
        let t = self.transmissivity;
        if !(t >= T::zero() && t <= T::one()) {
            return Err(Error::InvalidTransmissivity(t.as_f64()));
        }
        let tau = t.sqrt();
        let rho = (T::one() - t).sqrt();
        Ok(match self.convention {
            SplitterConvention::Generic | SplitterConvention::Cascade => [[tau, rho], [rho, -tau]],
            SplitterConvention::Bs0 => [[tau, -rho], [rho, tau]],
            SplitterConvention::Bs0Reversed => [[tau, rho], [-rho, tau]],
        })
    }
}

/// Input registry and transform grown together, so that every ancilla added
/// to the registry is also a slot of the transform.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    pub(crate) registry: InputRegistry<T>,
    pub(crate) transform: QuadratureTransform<T>,
}

impl<T: Scalar> Default for Network<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> Network<T> {
    pub fn new() -> Self {
        Self {
            registry: InputRegistry::new(),
            transform: QuadratureTransform::identity(0),
        }
    }

    pub fn registry(&self) -> &InputRegistry<T> {
        &self.registry
    }

    pub fn transform(&self) -> &QuadratureTransform<T> {
        &self.transform
    }

    pub fn into_parts(self) -> (InputRegistry<T>, QuadratureTransform<T>) {
        (self.registry, self.transform)
    }

    pub fn add_vacuum(&mut self) -> usize {
        let index = self.registry.add_vacuum();
        self.transform.extend(1);
        index
    }

    pub fn add_coherent(&mut self, x: T, p: T, conjugate: bool) -> Result<usize> {
        let index = self.registry.add_coherent(x, p, conjugate)?;
        self.transform.extend(1);
        Ok(index)
    }

    pub fn add_epr_pair(&mut self, r: T) -> Result<(usize, usize)> {
        let pair = self.registry.add_epr_pair(r)?;
        self.transform.extend(2);
        Ok(pair)
    }

    pub fn set_label(&mut self, mode: usize, label: impl Into<String>) -> Result<()> {
        self.registry.set_label(mode, label)
    }

    pub fn output_state(&self, mode: usize) -> Result<ModeState<T>> {
        crate::gaussian::output_state(&self.registry, &self.transform, mode)
    }

    pub(crate) fn require_pair(&self, a: usize, b: usize) -> Result<()> {
        self.transform.require_retained(a)?;
        self.transform.require_retained(b)?;
        if a == b {
            return Err(Error::DuplicateMode(a));
        }
        Ok(())
    }

    /// Composes one beam splitter onto the transform. The outputs replace the
    /// inputs in slots `mode_a` and `mode_b`.
    pub fn beam_splitter(&mut self, spec: SplitterSpec<T>) -> Result<()> {
        let m = spec.matrix()?;
        self.require_pair(spec.mode_a, spec.mode_b)?;
        self.transform.push(Op::Mix {
            a: spec.mode_a,
            b: spec.mode_b,
            m,
        });
        Ok(())
    }

    /// Distributes `source` over `m` outputs with `m - 1` splitters and fresh
    /// vacuum ancillas. Splitter `j` has transmissivity `1/(m - j + 1)`; its
    /// transmitted port is output `j` and its reflected port feeds splitter
    /// `j + 1`. Returns the output slots in order, starting with `source`.
    pub fn splitter_cascade(&mut self, source: usize, m: usize) -> Result<Vec<usize>> {
        if m < 1 {
            return Err(Error::InvalidCount { what: "cascade outputs", value: m });
        }
        self.transform.require_retained(source)?;
        let mut outputs = Vec::with_capacity(m);
        let mut carry = source;
        for j in 1..m {
            let vacuum = self.add_vacuum();
            let t = T::one() / T::from_count(m - j + 1);
            self.beam_splitter(SplitterSpec::new(carry, vacuum, t, SplitterConvention::Cascade))?;
            outputs.push(carry);
            carry = vacuum;
        }
        outputs.push(carry);
        Ok(outputs)
    }

    /// Interferes the sources on `N - 1` splitters into the uniform
    /// superposition `(1/√N) Σ sources`, left in the first source's slot.
    /// The orthogonal remainders stay in the other slots as retained modes.
    pub fn concentrate(&mut self, sources: &[usize]) -> Result<usize> {
        let (&first, rest) = sources.split_first().ok_or(Error::EmptySources)?;
        self.transform.require_retained(first)?;
        for (k, &next) in rest.iter().enumerate() {
            let merged = T::from_count(k + 1);
            let t = merged / (merged + T::one());
            self.beam_splitter(SplitterSpec::generic(first, next, t))?;
        }
        Ok(first)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn assert_rows_orthogonal(net: &Network<f64>) {
        let s = net.transform().matrix();
        let product = s.dot(&s.t());
        for i in 0..product.nrows() {
            for j in 0..product.ncols() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(product[[i, j]], expected, epsilon = 1e-12);
            }
        }
        assert!(net.transform().symplectic_defect(&[]) < 1e-12);
    }

    #[test]
    fn full_transmission_is_identity_up_to_sign() {
        let mut net = Network::<f64>::new();
        let a = net.add_coherent(1.0, -2.0, false).unwrap();
        let b = net.add_coherent(3.0, 0.5, false).unwrap();
        net.beam_splitter(SplitterSpec::generic(a, b, 1.0)).unwrap();
        let out_a = net.output_state(a).unwrap();
        let out_b = net.output_state(b).unwrap();
        assert_eq!((out_a.mean_x, out_a.mean_p), (1.0, -2.0));
        assert_eq!((out_b.mean_x, out_b.mean_p), (-3.0, -0.5));
    }

    #[test]
    fn balanced_split_of_coherent_state() {
        let mut net = Network::<f64>::new();
        let a = net.add_coherent(2.0, 0.0, false).unwrap();
        let v = net.add_vacuum();
        net.beam_splitter(SplitterSpec::generic(a, v, 0.5)).unwrap();
        let out = net.output_state(a).unwrap();
        assert_abs_diff_eq!(out.mean_x, 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(out.mean_p, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn balanced_split_hand_computed() {
        // out_a = (a + v)/√2: mean (2, 4)/√2 = (√2, 2√2), covariance I.
        let mut net = Network::<f64>::new();
        let a = net.add_coherent(2.0, 4.0, false).unwrap();
        let v = net.add_vacuum();
        net.beam_splitter(SplitterSpec::generic(a, v, 0.5)).unwrap();
        let out = net.output_state(a).unwrap();
        let expected = ModeState::coherent(2f64.sqrt(), 2.0 * 2f64.sqrt());
        assert!(out.max_abs_diff(&expected) < 1e-14);
        let other = net.output_state(v).unwrap();
        assert!(other.max_abs_diff(&ModeState::coherent(2f64.sqrt(), 2.0 * 2f64.sqrt())) < 1e-14);
    }

    #[test]
    fn bs0_rows_for_two_clones() {
        // R = 1/9: reflected port = (1/3)·c* + (√8/3)·a_EPR1.
        let mut net = Network::<f64>::new();
        let conj = net.add_coherent(1.0, 1.0, true).unwrap();
        let (epr1, _) = net.add_epr_pair(1.0).unwrap();
        let t = 8.0 / 9.0;
        net.beam_splitter(SplitterSpec::new(conj, epr1, t, SplitterConvention::Bs0))
            .unwrap();
        let (reflected_x, reflected_p) = net.transform().mode_rows(epr1);
        assert_abs_diff_eq!(reflected_x[2 * conj], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(reflected_x[2 * epr1], 8f64.sqrt() / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(reflected_p[2 * conj + 1], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(reflected_p[2 * epr1 + 1], 8f64.sqrt() / 3.0, epsilon = 1e-15);
        let (transmitted_x, _) = net.transform().mode_rows(conj);
        assert_abs_diff_eq!(transmitted_x[2 * conj], 8f64.sqrt() / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(transmitted_x[2 * epr1], -1.0 / 3.0, epsilon = 1e-15);
        assert_rows_orthogonal(&net);
    }

    #[test]
    fn reversed_bs0_negates_reflection() {
        let forward = SplitterSpec::new(0, 1, 0.25f64, SplitterConvention::Bs0).matrix().unwrap();
        let reversed = SplitterSpec::new(0, 1, 0.25f64, SplitterConvention::Bs0Reversed)
            .matrix()
            .unwrap();
        assert_eq!(forward[0][0], reversed[0][0]);
        assert_eq!(forward[0][1], -reversed[0][1]);
        assert_eq!(forward[1][0], -reversed[1][0]);
    }

    #[test]
    fn splitter_rejects_bad_arguments() {
        let mut net = Network::<f64>::new();
        let a = net.add_vacuum();
        let b = net.add_vacuum();
        assert_eq!(
            net.beam_splitter(SplitterSpec::generic(a, b, 1.5)),
            Err(Error::InvalidTransmissivity(1.5))
        );
        assert!(net.beam_splitter(SplitterSpec::generic(a, b, -0.1)).is_err());
        assert!(net.beam_splitter(SplitterSpec::generic(a, b, f64::NAN)).is_err());
        assert_eq!(
            net.beam_splitter(SplitterSpec::generic(a, a, 0.5)),
            Err(Error::DuplicateMode(a))
        );
        assert_eq!(
            net.beam_splitter(SplitterSpec::generic(a, 7, 0.5)),
            Err(Error::UnknownMode(7))
        );
        net.transform.consume(b);
        assert_eq!(
            net.beam_splitter(SplitterSpec::generic(a, b, 0.5)),
            Err(Error::ModeConsumed(b))
        );
    }

    #[test]
    fn cascade_of_one_is_identity() {
        let mut net = Network::<f64>::new();
        let s = net.add_coherent(1.0, 2.0, false).unwrap();
        assert_eq!(net.splitter_cascade(s, 1).unwrap(), vec![s]);
        assert_eq!(net.transform().op_count(), 0);
        assert_eq!(net.registry().len(), 1);
    }

    #[test]
    fn cascade_rejects_zero_outputs() {
        let mut net = Network::<f64>::new();
        let s = net.add_vacuum();
        assert!(matches!(net.splitter_cascade(s, 0), Err(Error::InvalidCount { .. })));
    }

    #[test]
    fn cascade_of_two_is_balanced() {
        let mut net = Network::<f64>::new();
        let s = net.add_coherent(1.0, 0.0, false).unwrap();
        let outs = net.splitter_cascade(s, 2).unwrap();
        assert_eq!(outs.len(), 2);
        for &o in &outs {
            assert_abs_diff_eq!(net.transform().row(2 * o)[2 * s], 0.5f64.sqrt(), epsilon = 1e-15);
        }
    }

    /// Explicit product of the three splitters for M = 4 written out by hand,
    /// compared with the cascade builder; checks 1/√M weights and that the
    /// outputs are exchangeable.
    #[test]
    fn cascade_matches_explicit_splitter_product() {
        for m in [3usize, 4] {
            let mut net = Network::<f64>::new();
            let s = net.add_coherent(0.7, -1.3, false).unwrap();
            let outs = net.splitter_cascade(s, m).unwrap();
            // Brute force: X-amplitude vector over (source, v1, ..., v_{m-1}),
            // splitter j mixing the carried amplitude with v_j.
            let mut carried = vec![0.0; m];
            carried[0] = 1.0;
            let mut expected = Vec::new();
            for j in 1..m {
                let t = 1.0 / (m - j + 1) as f64;
                let mut out_j = carried.clone();
                let mut next = carried.clone();
                for k in 0..m {
                    out_j[k] = t.sqrt() * carried[k];
                    next[k] = (1.0 - t).sqrt() * carried[k];
                }
                out_j[j] += (1.0 - t).sqrt();
                next[j] -= t.sqrt();
                expected.push(out_j);
                carried = next;
            }
            expected.push(carried);
            for (o, want) in outs.iter().zip(&expected) {
                let row = net.transform().row(2 * o);
                let got: Vec<f64> = (0..m).map(|k| row[2 * k]).collect();
                for (g, w) in got.iter().zip(want) {
                    assert_abs_diff_eq!(g, w, epsilon = 1e-14);
                }
                assert_abs_diff_eq!(got[0], 1.0 / (m as f64).sqrt(), epsilon = 1e-14);
            }
            let first = net.output_state(outs[0]).unwrap();
            for &o in &outs[1..] {
                assert!(net.output_state(o).unwrap().max_abs_diff(&first) < 1e-14);
            }
            assert_rows_orthogonal(&net);
        }
    }

    #[test]
    fn concentrate_single_is_identity() {
        let mut net = Network::<f64>::new();
        let s = net.add_coherent(1.0, 1.0, false).unwrap();
        assert_eq!(net.concentrate(&[s]).unwrap(), s);
        assert_eq!(net.transform().op_count(), 0);
        assert_eq!(net.concentrate(&[]), Err(Error::EmptySources));
    }

    #[test]
    fn concentrate_four_copies() {
        let mut net = Network::<f64>::new();
        let sources: Vec<usize> = (0..4).map(|_| net.add_coherent(1.0, 1.0, false).unwrap()).collect();
        let c = net.concentrate(&sources).unwrap();
        let out = net.output_state(c).unwrap();
        assert!(out.max_abs_diff(&ModeState::coherent(2.0, 2.0)) < 1e-14);
        let row = net.transform().row(2 * c);
        for &s in &sources {
            assert_abs_diff_eq!(row[2 * s], 0.5, epsilon = 1e-15);
        }
        for &rest in &sources[1..] {
            assert!(net.output_state(rest).unwrap().max_abs_diff(&ModeState::coherent(0.0, 0.0)) < 1e-14);
        }
        assert_rows_orthogonal(&net);
    }

    #[test]
    fn concentrate_conjugate_copies() {
        let (x, p) = (1.5, 0.75);
        let mut net = Network::<f64>::new();
        let a = net.add_coherent(x, p, true).unwrap();
        let b = net.add_coherent(x, p, true).unwrap();
        let c = net.concentrate(&[a, b]).unwrap();
        let out = net.output_state(c).unwrap();
        let root2 = 2f64.sqrt();
        assert!(out.max_abs_diff(&ModeState::coherent(root2 * x, -root2 * p)) < 1e-14);
    }

    #[test]
    fn concentrate_then_cascade_round_trip() {
        for n in 1..=4usize {
            let mut net = Network::<f64>::new();
            let sources: Vec<usize> = (0..n).map(|_| net.add_coherent(0.3, 0.9, false).unwrap()).collect();
            let c = net.concentrate(&sources).unwrap();
            let outs = net.splitter_cascade(c, n).unwrap();
            let expected = 1.0 / n as f64;
            for &o in &outs {
                let row = net.transform().row(2 * o);
                for &s in &sources {
                    assert_abs_diff_eq!(row[2 * s], expected, epsilon = 1e-14);
                }
            }
        }
    }
}
