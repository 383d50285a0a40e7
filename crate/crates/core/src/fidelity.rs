//! Overlap of Gaussian outputs with coherent targets, and the closed-form
//! clone/anticlone variances and fidelities of every protocol.
//!
//! All variances are in units where the vacuum variance is 1.

use crate::error::{Error, Result};
use crate::gaussian::ModeState;
use crate::protocols::Variant;
use crate::scalar::{Multiplicity, Scalar, Squeezing};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityResult<T> {
    pub value: T,
    /// Mean mismatch `(x_state - x_target, p_state - p_target)`.
    pub gain_deficit: (T, T),
    pub unity_gain: bool,
}

/// `⟨α|ρ|α⟩` for a Gaussian `ρ` with covariance `V` and a coherent `|α⟩`:
/// `2/√det(V+I) · exp(-½ δᵀ(V+I)⁻¹δ)`. For diagonal `V` this is the familiar
/// `2/√((1+ΔX²)(1+ΔP²))` times the Gaussian mean penalty.
pub fn fidelity_vs_coherent<T: Scalar>(state: &ModeState<T>, target: (T, T)) -> Result<FidelityResult<T>> {
    let one = T::one();
    let a = state.cov[0][0] + one;
    let b = (state.cov[0][1] + state.cov[1][0]) / T::lit(2.0);
    let d = state.cov[1][1] + one;
    let det = a * d - b * b;
    if det.is_nan() || det <= T::zero() {
        return Err(Error::SingularCovariance);
    }
    let dx = state.mean_x - target.0;
    let dp = state.mean_p - target.1;
    let quad = (d * dx * dx - (b + b) * dx * dp + a * dp * dp) / det;
    let value = (T::lit(2.0) / det.sqrt() * (-quad / T::lit(2.0)).exp()).min(one);
    let tol = T::tolerance();
    Ok(FidelityResult {
        value,
        gain_deficit: (dx, dp),
        unity_gain: dx.abs() <= tol && dp.abs() <= tol,
    })
}

/// Fidelity at unity gain: `2/√((1+var_x)(1+var_p))`.
pub fn fidelity_unity_gain<T: Scalar>(var_x: T, var_p: T) -> Result<T> {
    for v in [var_x, var_p] {
        if v.is_nan() || v <= T::zero() {
            return Err(Error::NonPositiveVariance(v.as_f64()));
        }
    }
    Ok(T::lit(2.0) / ((T::one() + var_x) * (T::one() + var_p)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Output {
    Clone,
    Anticlone,
}

/// Parameters a closed form is evaluated at. `r2` is only read by variant B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormulaParams<T> {
    pub clones: Multiplicity,
    pub copies: usize,
    pub r: Squeezing<T>,
    pub r2: Squeezing<T>,
}

impl<T: Scalar> FormulaParams<T> {
    pub fn new(clones: impl Into<Multiplicity>, copies: usize, r: Squeezing<T>, r2: Squeezing<T>) -> Self {
        Self {
            clones: clones.into(),
            copies,
            r,
            r2,
        }
    }
}

fn require_single_copy(variant: Variant, copies: usize) -> Result<()> {
    if copies == 1 {
        Ok(())
    } else {
        Err(Error::NoClosedForm(format!(
            "variant {} is defined for a single input pair, got N = {copies}",
            variant.name()
        )))
    }
}

fn require_valid<T: Scalar>(params: &FormulaParams<T>) -> Result<()> {
    if params.copies == 0 {
        return Err(Error::InvalidCount { what: "copies", value: 0 });
    }
    if params.clones == Multiplicity::Finite(0) {
        return Err(Error::InvalidCount { what: "clones", value: 0 });
    }
    for r in [params.r, params.r2] {
        if let Squeezing::Finite(v) = r {
            if v.is_nan() || v < T::zero() {
                return Err(Error::NegativeSqueezing(v.as_f64()));
            }
        }
    }
    Ok(())
}

/// Closed-form quadrature variance (equal for X and P) of a clone or anticlone.
pub fn closed_form_variance<T: Scalar>(variant: Variant, params: FormulaParams<T>, which: Output) -> Result<T> {
    require_valid(&params)?;
    let one = T::one();
    let two = T::lit(2.0);
    let n = T::from_count(params.copies);
    let e1 = params.r.noise();
    let e2 = params.r2.noise();
    match variant {
        Variant::A | Variant::AGeneralized | Variant::ASwapped => {
            if variant == Variant::A {
                require_single_copy(variant, params.copies)?;
            }
            let nonlocal = match (variant, which) {
                (Variant::ASwapped, Output::Anticlone) => true,
                (Variant::ASwapped, Output::Clone) => false,
                (_, Output::Clone) => true,
                (_, Output::Anticlone) => false,
            };
            Ok(match params.clones {
                Multiplicity::Finite(m) => {
                    let m = T::from_count(m);
                    let base = one + (m - n).powi(2) / (two * m * m * n);
                    if nonlocal {
                        base + two * e1 / m
                    } else {
                        base
                    }
                }
                Multiplicity::Unbounded => one + one / (two * n),
            })
        }
        Variant::B => {
            require_single_copy(variant, params.copies)?;
            Ok(match (params.clones, which) {
                (Multiplicity::Finite(m), Output::Clone) => {
                    let m = T::from_count(m);
                    one + (m - one).powi(2) / (two * m * m) * (one + e2) + two * e1 / m
                }
                (Multiplicity::Finite(m), Output::Anticlone) => {
                    let m = T::from_count(m);
                    one + (m - one).powi(2) / (two * m * m) + (m + one).powi(2) / (two * m * m) * e2
                }
                (Multiplicity::Unbounded, _) => one + (one + e2) / two,
            })
        }
        Variant::Baseline => Err(Error::NoClosedForm(
            "the standard telecloner is only characterized by its fidelities".into(),
        )),
    }
}

/// Closed-form fidelity, written out as explicit rational expressions
/// (not derived from [`closed_form_variance`], so the two can be checked
/// against each other).
pub fn closed_form<T: Scalar>(variant: Variant, params: FormulaParams<T>, which: Output) -> Result<T> {
    require_valid(&params)?;
    let one = T::one();
    let four = T::lit(4.0);
    let n = T::from_count(params.copies);
    let e1 = params.r.noise();
    let e2 = params.r2.noise();
    let m = match params.clones {
        Multiplicity::Finite(m) => T::from_count(m),
        Multiplicity::Unbounded => {
            return match variant {
                Variant::A | Variant::AGeneralized | Variant::ASwapped => {
                    if variant == Variant::A {
                        require_single_copy(variant, params.copies)?;
                    }
                    Ok(four * n / (four * n + one))
                }
                Variant::B => {
                    require_single_copy(variant, params.copies)?;
                    Ok(four / (T::lit(5.0) + e2))
                }
                Variant::Baseline => baseline_limit(params.copies, params.r),
            };
        }
    };
    match variant {
        Variant::A => {
            require_single_copy(variant, params.copies)?;
            let clone = four * m * m / (four * m * m + (m - one).powi(2) + four * m * e1);
            let anti = four * m * m / (four * m * m + (m - one).powi(2));
            Ok(pick(which, clone, anti))
        }
        Variant::AGeneralized | Variant::ASwapped => {
            let top = four * m * m * n;
            let nonlocal = top / (top + (m - n).powi(2) + four * m * n * e1);
            let local = top / (top + (m - n).powi(2));
            Ok(match variant {
                Variant::ASwapped => pick(which, local, nonlocal),
                _ => pick(which, nonlocal, local),
            })
        }
        Variant::B => {
            require_single_copy(variant, params.copies)?;
            let top = four * m * m;
            let clone = top / (top + (m - one).powi(2) * (one + e2) + four * m * e1);
            let anti = top / (top + (m - one).powi(2) + (m + one).powi(2) * e2);
            Ok(pick(which, clone, anti))
        }
        Variant::Baseline => {
            let (clone, anti) = baseline_standard_fidelity(params.clones, params.copies, params.r)?;
            Ok(pick(which, clone, anti))
        }
    }
}

fn pick<T>(which: Output, clone: T, anti: T) -> T {
    match which {
        Output::Clone => clone,
        Output::Anticlone => anti,
    }
}

/// Fidelities `(clone, anticlone)` of the standard 2 → M + (M−2) telecloner
/// built from two identical replicas. Finite `M` is available for a single
/// replica pair; for `N` pairs only the `M → ∞`, `r → ∞` value
/// `2N/(2N+1)` is known.
pub fn baseline_standard_fidelity<T: Scalar>(clones: Multiplicity, copies: usize, r: Squeezing<T>) -> Result<(T, T)> {
    if copies == 0 {
        return Err(Error::InvalidCount { what: "copies", value: 0 });
    }
    let two = T::lit(2.0);
    match clones {
        Multiplicity::Finite(0) => Err(Error::InvalidCount { what: "clones", value: 0 }),
        Multiplicity::Finite(1) => Err(Error::NoClosedForm(
            "the standard 2 → M + (M−2) telecloner needs M ≥ 2".into(),
        )),
        Multiplicity::Finite(m) => {
            require_single_copy(Variant::Baseline, copies)?;
            let m = T::from_count(m);
            let clone = two * m / (T::lit(3.0) * m - two + two * r.noise());
            Ok((clone, two / T::lit(3.0)))
        }
        Multiplicity::Unbounded => {
            let f = baseline_limit(copies, r)?;
            Ok((f, f))
        }
    }
}

fn baseline_limit<T: Scalar>(copies: usize, r: Squeezing<T>) -> Result<T> {
    if copies != 1 && !r.is_infinite() {
        return Err(Error::NoClosedForm(format!(
            "standard telecloning with N = {copies} is only known for r → ∞"
        )));
    }
    let two_n = T::from_count(2 * copies);
    Ok(two_n / (two_n + T::one()))
}
