//! End-to-end builders for the phase-conjugate-input telecloning networks.
//!
//! Every builder assembles the full optical network (EPR sources, splitter
//! cascades, the variable splitter BS0, dual-homodyne measurement and
//! feedforward) in the Heisenberg picture. It then reads the exact output
//! moments and compares them with the closed forms in [`crate::fidelity`].
//!
//! * [`Variant::A`]: one input pair, clones at the remote receivers,
//!   anticlones local to the sender.
//! * [`Variant::ASwapped`]: the coherent input and its conjugate trade
//!   places, giving local clones and remote anticlones.
//! * [`Variant::AGeneralized`]: `N` copies of each input concentrated into one
//!   mode before entering the variant-A network.
//! * [`Variant::B`]: two EPR pairs and two senders; clones and anticlones are
//!   both remote.
//! * [`Variant::Baseline`]: the standard telecloner from identical replicas,
//!   available only through its closed-form fidelities.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fidelity::{closed_form, closed_form_variance, fidelity_vs_coherent, FormulaParams, Output};
use crate::gaussian::ModeState;
use crate::measure::{combine_records, MeasurementRecord};
use crate::network::{Network, SplitterConvention, SplitterSpec};
use crate::scalar::{Multiplicity, Scalar, Squeezing};

pub use crate::fidelity::baseline_standard_fidelity;

/// Reports for more clones than this evaluate a fixed sample of output modes.
pub const FULL_REPORT_LIMIT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    A,
    ASwapped,
    AGeneralized,
    B,
    Baseline,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::A,
        Variant::ASwapped,
        Variant::AGeneralized,
        Variant::B,
        Variant::Baseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::A => "a",
            Variant::ASwapped => "a-swapped",
            Variant::AGeneralized => "a-generalized",
            Variant::B => "b",
            Variant::Baseline => "baseline",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidSpec(format!("unknown variant `{s}`")))
    }
}

/// Protocol parameters: `M` clones and anticlones from `N` copies of the
/// coherent input `(x, p)` and `N` copies of its conjugate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolSpec<T> {
    pub variant: Variant,
    pub clones: usize,
    pub copies: usize,
    pub squeezing: Squeezing<T>,
    /// Squeezing of the second EPR pair; only variant B reads it.
    pub squeezing2: Squeezing<T>,
    pub input: (T, T),
}

impl<T: Scalar> ProtocolSpec<T> {
    pub fn new(
        variant: Variant,
        clones: usize,
        copies: usize,
        squeezing: Squeezing<T>,
        squeezing2: Squeezing<T>,
        input: (T, T),
    ) -> Result<Self> {
        let spec = Self {
            variant,
            clones,
            copies,
            squeezing,
            squeezing2,
            input,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Single-pair spec with both EPR sources at squeezing `r`.
    pub fn single(variant: Variant, clones: usize, r: T, input: (T, T)) -> Result<Self> {
        Self::new(variant, clones, 1, Squeezing::Finite(r), Squeezing::Finite(r), input)
    }

    pub fn validate(&self) -> Result<()> {
        if self.clones < 1 {
            return Err(Error::InvalidCount { what: "clones", value: self.clones });
        }
        if self.copies < 1 {
            return Err(Error::InvalidCount { what: "copies", value: self.copies });
        }
        for r in [self.squeezing, self.squeezing2] {
            if let Squeezing::Finite(v) = r {
                if !v.is_finite() {
                    return Err(Error::NonFinite { what: "squeezing", value: v.as_f64() });
                }
                if v < T::zero() {
                    return Err(Error::NegativeSqueezing(v.as_f64()));
                }
            }
        }
        for (what, v) in [("input x", self.input.0), ("input p", self.input.1)] {
            if !v.is_finite() {
                return Err(Error::NonFinite { what, value: v.as_f64() });
            }
        }
        if matches!(self.variant, Variant::A | Variant::B) && self.copies != 1 {
            return Err(Error::InvalidSpec(format!(
                "variant {} takes a single input pair (N = 1), got N = {}",
                self.variant, self.copies
            )));
        }
        Ok(())
    }

    /// Signed reflection amplitude of BS0, `(M - N)/(M + N)`.
    pub fn reflection_amplitude(&self) -> T {
        let m = T::from_count(self.clones);
        let n = T::from_count(self.copies);
        (m - n) / (m + n)
    }

    /// BS0 reflectivity `R = (M - N)²/(M + N)²`.
    pub fn reflectivity(&self) -> T {
        self.reflection_amplitude().powi(2)
    }

    /// Clone-side gain `√(2/(M(1-R)))`.
    pub fn g1(&self) -> T {
        let m = T::from_count(self.clones);
        (T::lit(2.0) / (m * (T::one() - self.reflectivity()))).sqrt()
    }

    /// Anticlone-side gain `√R·g1`, carrying the sign of the reflection
    /// amplitude.
    pub fn g2(&self) -> T {
        self.reflection_amplitude() * self.g1()
    }

    /// Gains `(g_x1, g_p1, g_x2, g_p2)` the clone receivers of variant B apply
    /// to the two senders' outcomes.
    pub fn two_sender_clone_gains(&self) -> [T; 4] {
        let g = self.g1();
        let root_r = self.reflection_amplitude();
        [g, -g, root_r * g, root_r * g]
    }

    /// Gains `(g_x1, g_p1, g_x2, g_p2)` for the anticlone receivers of variant B.
    pub fn two_sender_anticlone_gains(&self) -> [T; 4] {
        let g = self.g1();
        let root_r = self.reflection_amplitude();
        [root_r * g, root_r * g, g, -g]
    }

    pub fn formula_params(&self) -> FormulaParams<T> {
        FormulaParams::new(self.clones, self.copies, self.squeezing, self.squeezing2)
    }

    /// The same parameters with infinite squeezing replaced by the value the
    /// network was actually built with.
    pub fn proxy_formula_params(&self) -> FormulaParams<T> {
        FormulaParams::new(
            self.clones,
            self.copies,
            Squeezing::Finite(self.squeezing.proxy()),
            Squeezing::Finite(self.squeezing2.proxy()),
        )
    }

    pub fn clone_target(&self) -> (T, T) {
        self.input
    }

    pub fn anticlone_target(&self) -> (T, T) {
        (self.input.0, -self.input.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityPair<T> {
    pub simulated: T,
    /// Exact closed form, with `r = ∞` kept symbolic.
    pub closed_form: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantSummary<T> {
    /// Worst commutator deviation among the checked retained rows and the
    /// measurement rows.
    pub symplectic_defect: T,
    pub min_det: T,
    /// Largest `|mean - target|` over all evaluated outputs.
    pub mean_transfer_error: T,
    /// Largest entrywise difference between outputs of the same kind.
    pub spread: T,
}

impl<T: Scalar> InvariantSummary<T> {
    pub fn holds(&self, tol: T) -> bool {
        self.symplectic_defect <= tol
            && self.min_det >= T::one() - tol
            && self.mean_transfer_error <= tol
            && self.spread <= tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CloneReport<T> {
    /// `(output slot, state)` for every evaluated clone.
    pub clone_states: Vec<(usize, ModeState<T>)>,
    pub anticlone_states: Vec<(usize, ModeState<T>)>,
    pub predicted_clone_var: T,
    pub predicted_anticlone_var: T,
    pub fidelity_clone: FidelityPair<T>,
    pub fidelity_anticlone: FidelityPair<T>,
    /// Worst `|simulated - closed form|` over variances, X/P correlations and
    /// fidelities, with the closed forms evaluated at the squeezing the
    /// network was built with.
    pub max_discrepancy: T,
    pub invariants: InvariantSummary<T>,
    /// True when only a sample of the outputs was evaluated.
    pub sampled: bool,
    pub flags: Vec<String>,
}

/// A built protocol: the network, which slots hold the outputs, the
/// measurement records and the report.
#[derive(Debug, Clone)]
pub struct Build<T> {
    pub spec: ProtocolSpec<T>,
    pub network: Network<T>,
    pub clone_modes: Vec<usize>,
    pub anticlone_modes: Vec<usize>,
    pub records: Vec<MeasurementRecord<T>>,
    pub report: CloneReport<T>,
}

/// Builds whichever network `spec.variant` names.
pub fn build<T: Scalar>(spec: &ProtocolSpec<T>) -> Result<Build<T>> {
    match spec.variant {
        Variant::A => build_variant_a(spec),
        Variant::ASwapped => build_variant_a_swapped(spec),
        Variant::AGeneralized => build_variant_a_generalized(spec),
        Variant::B => build_variant_b(spec),
        Variant::Baseline => Err(Error::InvalidSpec(
            "the standard telecloner has closed-form fidelities only".into(),
        )),
    }
}

pub fn build_variant_a<T: Scalar>(spec: &ProtocolSpec<T>) -> Result<Build<T>> {
    expect_variant(spec, Variant::A)?;
    build_single_pair(spec, false)
}

pub fn build_variant_a_swapped<T: Scalar>(spec: &ProtocolSpec<T>) -> Result<Build<T>> {
    expect_variant(spec, Variant::ASwapped)?;
    build_single_pair(spec, true)
}

pub fn build_variant_a_generalized<T: Scalar>(spec: &ProtocolSpec<T>) -> Result<Build<T>> {
    expect_variant(spec, Variant::AGeneralized)?;
    build_single_pair(spec, false)
}

fn expect_variant<T: Scalar>(spec: &ProtocolSpec<T>, variant: Variant) -> Result<()> {
    spec.validate()?;
    if spec.variant != variant {
        return Err(Error::InvalidSpec(format!(
            "spec is for variant {}, builder is for {variant}",
            spec.variant
        )));
    }
    Ok(())
}

fn add_inputs<T: Scalar>(net: &mut Network<T>, spec: &ProtocolSpec<T>, conjugate: bool) -> Result<Vec<usize>> {
    let (x, p) = spec.input;
    (0..spec.copies)
        .map(|l| {
            let mode = net.add_coherent(x, p, conjugate)?;
            let name = if conjugate { "c_in*" } else { "c_in" };
            net.set_label(mode, format!("{name}[{l}]"))?;
            Ok(mode)
        })
        .collect()
}

/// One EPR pair: the remote half is split over `M` receivers, the local half
/// is mixed with one input on BS0, and the reflected port is jointly measured
/// with the other input.
fn build_single_pair<T: Scalar>(spec: &ProtocolSpec<T>, swapped: bool) -> Result<Build<T>> {
    let mut net = Network::new();
    let inputs = add_inputs(&mut net, spec, false)?;
    let conjugates = add_inputs(&mut net, spec, true)?;
    let (epr1, epr2) = net.add_epr_pair(spec.squeezing.proxy())?;
    net.set_label(epr1, "a_EPR1")?;
    net.set_label(epr2, "a_EPR2")?;

    let signal = net.concentrate(&inputs)?;
    let conjugate = net.concentrate(&conjugates)?;
    let (into_bs0, into_homodyne) = if swapped {
        (signal, conjugate)
    } else {
        (conjugate, signal)
    };

    // BS0 leaves the transmitted port in `into_bs0` and the reflected port in
    // `epr1`.
    let rho = spec.reflection_amplitude();
    let convention = if rho < T::zero() {
        SplitterConvention::Bs0Reversed
    } else {
        SplitterConvention::Bs0
    };
    net.beam_splitter(SplitterSpec::new(into_bs0, epr1, T::one() - rho * rho, convention))?;

    let remote = net.splitter_cascade(epr2, spec.clones)?;
    let local = net.splitter_cascade(into_bs0, spec.clones)?;
    let record = net.dual_homodyne(epr1, into_homodyne)?;

    let (g1, g2) = (spec.g1(), spec.g2());
    for &mode in &remote {
        net.feedforward(&record, mode, g1, -g1)?;
    }
    for &mode in &local {
        net.feedforward(&record, mode, g2, g2)?;
    }

    let (clone_modes, anticlone_modes) = if swapped { (local, remote) } else { (remote, local) };
    finish(spec, net, clone_modes, anticlone_modes, vec![record])
}

/// Two EPR pairs: `a_EPR2` feeds the clone receivers, BS0 mixes `b_EPR1` with
/// `a_EPR1` and its transmitted port feeds the anticlone receivers. Sender 1
/// measures the reflected port with the input, sender 2 measures `b_EPR2`
/// with the conjugate input.
pub fn build_variant_b<T: Scalar>(spec: &ProtocolSpec<T>) -> Result<Build<T>> {
    expect_variant(spec, Variant::B)?;
    let (x, p) = spec.input;
    let mut net = Network::new();
    let input = net.add_coherent(x, p, false)?;
    let conjugate = net.add_coherent(x, p, true)?;
    let (a1, a2) = net.add_epr_pair(spec.squeezing.proxy())?;
    let (b1, b2) = net.add_epr_pair(spec.squeezing2.proxy())?;
    for (mode, label) in [
        (input, "c_in"),
        (conjugate, "c_in*"),
        (a1, "a_EPR1"),
        (a2, "a_EPR2"),
        (b1, "b_EPR1"),
        (b2, "b_EPR2"),
    ] {
        net.set_label(mode, label)?;
    }

    let rho = spec.reflection_amplitude();
    net.beam_splitter(SplitterSpec::new(b1, a1, T::one() - rho * rho, SplitterConvention::Bs0))?;

    let clones = net.splitter_cascade(a2, spec.clones)?;
    let anticlones = net.splitter_cascade(b1, spec.clones)?;
    let sender1 = net.dual_homodyne(a1, input)?;
    let sender2 = net.dual_homodyne(b2, conjugate)?;

    let [cx1, cp1, cx2, cp2] = spec.two_sender_clone_gains();
    let clone_signal = combine_records(&sender1, &sender2, cx1, cp1, cx2, cp2)?;
    let [ax1, ap1, ax2, ap2] = spec.two_sender_anticlone_gains();
    let anticlone_signal = combine_records(&sender1, &sender2, ax1, ap1, ax2, ap2)?;
    for &mode in &clones {
        net.feedforward(&clone_signal, mode, T::one(), T::one())?;
    }
    for &mode in &anticlones {
        net.feedforward(&anticlone_signal, mode, T::one(), T::one())?;
    }
    finish(spec, net, clones, anticlones, vec![sender1, sender2])
}

/// Output indices a report evaluates: all of them up to
/// [`FULL_REPORT_LIMIT`], otherwise the first three, the middle one and the
/// last three.
pub fn report_indices(m: usize) -> Vec<usize> {
    if m <= FULL_REPORT_LIMIT {
        return (0..m).collect();
    }
    let mut picked = vec![0, 1, 2, m / 2, m - 3, m - 2, m - 1];
    picked.dedup();
    picked
}

fn finish<T: Scalar>(
    spec: &ProtocolSpec<T>,
    network: Network<T>,
    clone_modes: Vec<usize>,
    anticlone_modes: Vec<usize>,
    records: Vec<MeasurementRecord<T>>,
) -> Result<Build<T>> {
    let indices = report_indices(spec.clones);
    let sampled = indices.len() < spec.clones;
    let evaluate = |modes: &[usize]| -> Result<Vec<(usize, ModeState<T>)>> {
        indices
            .iter()
            .map(|&i| Ok((modes[i], network.output_state(modes[i])?)))
            .collect()
    };
    let clone_states = evaluate(&clone_modes)?;
    let anticlone_states = evaluate(&anticlone_modes)?;

    let variant = spec.variant;
    let exact = spec.formula_params();
    let proxy = spec.proxy_formula_params();
    let predicted_clone_var = closed_form_variance(variant, proxy, Output::Clone)?;
    let predicted_anticlone_var = closed_form_variance(variant, proxy, Output::Anticlone)?;
    let proxy_clone_f = closed_form(variant, proxy, Output::Clone)?;
    let proxy_anti_f = closed_form(variant, proxy, Output::Anticlone)?;

    let mut discrepancy = T::zero();
    let mut mean_error = T::zero();
    let mut min_det = T::infinity();
    let mut spread = T::zero();
    let mut fidelities = [T::zero(); 2];
    let groups = [
        (&clone_states, spec.clone_target(), predicted_clone_var, proxy_clone_f),
        (&anticlone_states, spec.anticlone_target(), predicted_anticlone_var, proxy_anti_f),
    ];
    for (slot, (states, target, var, fid)) in groups.into_iter().enumerate() {
        for (k, (_, state)) in states.iter().enumerate() {
            let f = fidelity_vs_coherent(state, target)?;
            if k == 0 {
                fidelities[slot] = f.value;
            }
            discrepancy = discrepancy
                .max((state.var_x() - var).abs())
                .max((state.var_p() - var).abs())
                .max(state.cov[0][1].abs())
                .max((f.value - fid).abs());
            mean_error = mean_error
                .max((state.mean_x - target.0).abs())
                .max((state.mean_p - target.1).abs());
            min_det = min_det.min(state.det());
            spread = spread.max(state.max_abs_diff(&states[0].1));
        }
    }

    let checked: Vec<usize> = if sampled {
        clone_states.iter().chain(&anticlone_states).map(|&(m, _)| m).collect()
    } else {
        network.transform().retained_modes()
    };
    let classical: Vec<Vec<T>> = records
        .iter()
        .flat_map(|r| [r.x_row.clone(), r.p_row.clone()])
        .collect();
    let symplectic_defect = network.transform().commutator_defect(&checked, &classical)?;

    let mut flags = Vec::new();
    if spec.clones < spec.copies {
        flags.push("clones-below-copies: BS0 reflection amplitude negated to keep unity gain".to_string());
    }
    if spec.squeezing.is_infinite() || (variant == Variant::B && spec.squeezing2.is_infinite()) {
        flags.push(format!(
            "infinite squeezing simulated at r = {}",
            T::lit(crate::scalar::INFINITE_SQUEEZING_PROXY)
        ));
    }
    if sampled {
        flags.push(format!("{} of {} outputs per side evaluated", indices.len(), spec.clones));
    }

    let report = CloneReport {
        clone_states,
        anticlone_states,
        predicted_clone_var,
        predicted_anticlone_var,
        fidelity_clone: FidelityPair {
            simulated: fidelities[0],
            closed_form: closed_form(variant, exact, Output::Clone)?,
        },
        fidelity_anticlone: FidelityPair {
            simulated: fidelities[1],
            closed_form: closed_form(variant, exact, Output::Anticlone)?,
        },
        max_discrepancy: discrepancy,
        invariants: InvariantSummary {
            symplectic_defect,
            min_det,
            mean_transfer_error: mean_error,
            spread,
        },
        sampled,
        flags,
    };
    Ok(Build {
        spec: *spec,
        network,
        clone_modes,
        anticlone_modes,
        records,
        report,
    })
}

/// Closed-form fidelities `(clone, anticlone)` for any variant at the exact
/// (possibly infinite) parameters.
pub fn closed_form_pair<T: Scalar>(variant: Variant, params: FormulaParams<T>) -> Result<(T, T)> {
    Ok((
        closed_form(variant, params, Output::Clone)?,
        closed_form(variant, params, Output::Anticlone)?,
    ))
}

/// Asymptotic (`M → ∞`) closed-form fidelities.
pub fn asymptotic_pair<T: Scalar>(variant: Variant, copies: usize, r: Squeezing<T>, r2: Squeezing<T>) -> Result<(T, T)> {
    closed_form_pair(variant, FormulaParams::new(Multiplicity::Unbounded, copies, r, r2))
}
