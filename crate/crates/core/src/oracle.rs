//! Monte Carlo cross-check of the analytic pipeline.
//!
//! Every state in these protocols is Gaussian, so its Wigner function is a
//! positive probability density over the quadratures. Beam splitters act on it
//! as linear maps of the quadrature variables, and a homodyne outcome is just
//! a sample of the measured quadrature's marginal. Drawing classical
//! quadrature samples, pushing them through the network shot by shot and
//! applying the displacement with the measured numbers therefore reproduces
//! every output moment exactly, up to sampling error. None of this depends on
//! the symplectic op list: the shot pipelines below are written out directly
//! from the protocol description.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`), seeded with
//! `seed_from_u64(seed)`. Shots are processed in chunks of [`CHUNK_SHOTS`],
//! chunk `k` drawing from stream `k` of that generator. Chunk statistics are
//! merged in chunk order, so results are bit-identical whatever the thread
//! count.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fidelity::{closed_form_variance, Output};
use crate::gaussian::ModeState;
use crate::protocols::{ProtocolSpec, Variant};

/// Smallest accepted sample count.
pub const MIN_SAMPLES: usize = 1000;
/// Shots per independent random stream.
pub const CHUNK_SHOTS: usize = 1 << 14;
/// A quantity fails when its z-score exceeds this.
pub const Z_THRESHOLD: f64 = 5.0;

/// Something that produces one joint sample of a set of output quadratures,
/// interleaved `(X0, P0, X1, P1, ...)`.
pub trait ShotModel: Sync {
    fn output_modes(&self) -> usize;
    fn shot(&self, rng: &mut ChaCha8Rng, out: &mut [f64]);
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Independent vacuum modes.
#[derive(Debug, Clone, Copy)]
pub struct VacuumModel {
    pub modes: usize,
}

impl ShotModel for VacuumModel {
    fn output_modes(&self) -> usize {
        self.modes
    }

    fn shot(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        for q in out.iter_mut() {
            *q = normal(rng);
        }
    }
}

/// Two-mode squeezed vacuum sampler using the lower-triangular factor of the
/// EPR covariance block. The X and P pairs decouple, so the factor is known in
/// closed form and stays exact at large squeezing where a numeric
/// factorization would cancel catastrophically.
#[derive(Debug, Clone, Copy)]
pub struct EprSource {
    /// `(√cosh 2r, sinh 2r/√cosh 2r, 1/√cosh 2r)`.
    diag: f64,
    off: f64,
    tail: f64,
}

impl EprSource {
    pub fn new(r: f64) -> Self {
        let c = (2.0 * r).cosh();
        let s = (2.0 * r).sinh();
        let root = c.sqrt();
        Self {
            diag: root,
            off: s / root,
            tail: 1.0 / root,
        }
    }

    /// Lower-triangular `L` with `L·Lᵀ` the EPR block, in `(X1, P1, X2, P2)`.
    pub fn factor(&self) -> Array2<f64> {
        let mut l = Array2::zeros((4, 4));
        l[[0, 0]] = self.diag;
        l[[1, 1]] = self.diag;
        l[[2, 0]] = -self.off;
        l[[2, 2]] = self.tail;
        l[[3, 1]] = self.off;
        l[[3, 3]] = self.tail;
        l
    }

    /// `(X1, P1, X2, P2)`.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> [f64; 4] {
        let z = [normal(rng), normal(rng), normal(rng), normal(rng)];
        [
            self.diag * z[0],
            self.diag * z[1],
            -self.off * z[0] + self.tail * z[2],
            self.off * z[1] + self.tail * z[3],
        ]
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky(cov: &Array2<f64>) -> Result<Array2<f64>> {
    let n = cov.nrows();
    if cov.ncols() != n {
        return Err(Error::InvalidSpec("covariance must be square".into()));
    }
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let partial: f64 = (0..j).map(|k| l[[i, k]] * l[[j, k]]).sum();
            if i == j {
                let d = cov[[i, i]] - partial;
                if d <= 0.0 || !d.is_finite() {
                    return Err(Error::SingularCovariance);
                }
                l[[i, i]] = d.sqrt();
            } else {
                l[[i, j]] = (cov[[i, j]] - partial) / l[[j, j]];
            }
        }
    }
    Ok(l)
}

/// Samples a fixed Gaussian `mean + L·z`.
#[derive(Debug, Clone)]
pub struct GaussianModel {
    mean: Vec<f64>,
    factor: Array2<f64>,
}

impl GaussianModel {
    pub fn new(mean: Vec<f64>, cov: &Array2<f64>) -> Result<Self> {
        if mean.len() != cov.nrows() || !mean.len().is_multiple_of(2) {
            return Err(Error::InvalidSpec("mean and covariance sizes disagree".into()));
        }
        Ok(Self {
            mean,
            factor: cholesky(cov)?,
        })
    }
}

impl ShotModel for GaussianModel {
    fn output_modes(&self) -> usize {
        self.mean.len() / 2
    }

    fn shot(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let z: Vec<f64> = (0..self.mean.len()).map(|_| normal(rng)).collect();
        for (i, q) in out.iter_mut().enumerate() {
            *q = self.mean[i] + (0..=i).map(|k| self.factor[[i, k]] * z[k]).sum::<f64>();
        }
    }
}

/// Running means and co-moments of a vector of quadratures.
#[derive(Debug, Clone)]
struct Moments {
    count: usize,
    mean: Vec<f64>,
    /// Full co-moment matrix when `joint`, otherwise just the diagonal.
    m2: Vec<f64>,
    joint: bool,
}

impl Moments {
    fn new(dim: usize, joint: bool) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; dim],
            m2: vec![0.0; if joint { dim * dim } else { dim }],
            joint,
        }
    }

    fn push(&mut self, sample: &[f64], delta: &mut [f64]) {
        self.count += 1;
        let inv = 1.0 / self.count as f64;
        let dim = self.mean.len();
        for i in 0..dim {
            delta[i] = sample[i] - self.mean[i];
            self.mean[i] += delta[i] * inv;
        }
        if self.joint {
            for (i, row) in self.m2.chunks_exact_mut(dim).enumerate() {
                let after = sample[i] - self.mean[i];
                for (m, d) in row.iter_mut().zip(delta.iter()) {
                    *m += after * d;
                }
            }
        } else {
            for i in 0..dim {
                self.m2[i] += delta[i] * (sample[i] - self.mean[i]);
            }
        }
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        let n = (self.count + other.count) as f64;
        let w = self.count as f64 * other.count as f64 / n;
        let dim = self.mean.len();
        let delta: Vec<f64> = (0..dim).map(|i| other.mean[i] - self.mean[i]).collect();
        if self.joint {
            for (k, m) in self.m2.iter_mut().enumerate() {
                *m += other.m2[k] + delta[k / dim] * delta[k % dim] * w;
            }
        } else {
            for (k, m) in self.m2.iter_mut().enumerate() {
                *m += other.m2[k] + delta[k] * delta[k] * w;
            }
        }
        let share = other.count as f64 / n;
        for (mean, d) in self.mean.iter_mut().zip(&delta) {
            *mean += d * share;
        }
        self.count += other.count;
    }

    fn variance(&self, i: usize) -> f64 {
        let k = if self.joint { i * self.mean.len() + i } else { i };
        self.m2[k] / (self.count as f64 - 1.0)
    }
}

fn accumulate<M: ShotModel>(model: &M, n: usize, seed: u64, joint: bool) -> Moments {
    let dim = 2 * model.output_modes();
    let chunks = n.div_ceil(CHUNK_SHOTS);
    let partial: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let shots = CHUNK_SHOTS.min(n - chunk * CHUNK_SHOTS);
            let mut moments = Moments::new(dim, joint);
            let mut sample = vec![0.0; dim];
            let mut delta = vec![0.0; dim];
            for _ in 0..shots {
                model.shot(&mut rng, &mut sample);
                moments.push(&sample, &mut delta);
            }
            moments
        })
        .collect();
    let mut total = Moments::new(dim, joint);
    for part in &partial {
        total.merge(part);
    }
    total
}

/// Sample mean and covariance of a model's output quadratures.
pub fn empirical_moments<M: ShotModel>(model: &M, n: usize, seed: u64) -> Result<(Vec<f64>, Array2<f64>)> {
    check_samples(n)?;
    let total = accumulate(model, n, seed, true);
    let dim = total.mean.len();
    let cov = Array2::from_shape_fn((dim, dim), |(i, j)| total.m2[i * dim + j] / (n as f64 - 1.0));
    Ok((total.mean, cov))
}

fn check_samples(n: usize) -> Result<()> {
    if n < MIN_SAMPLES {
        Err(Error::TooFewSamples { min: MIN_SAMPLES, got: n })
    } else {
        Ok(())
    }
}

/// A sample mean or unbiased sample variance with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub mean_se: f64,
    pub var: f64,
    pub var_se: f64,
}

impl Estimate {
    fn from_moments(mean: f64, var: f64, n: usize) -> Self {
        let n = n as f64;
        Self {
            mean,
            mean_se: (var / n).sqrt(),
            var,
            var_se: var * (2.0 / (n - 1.0)).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeEstimate {
    pub label: String,
    pub x: Estimate,
    pub p: Estimate,
    /// Analytic state this mode should reproduce.
    pub target: ModeState<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRun {
    pub n_samples: usize,
    pub seed: u64,
    pub modes: Vec<ModeEstimate>,
}

/// Runs any shot model against per-mode analytic targets.
pub fn run_model<M: ShotModel>(
    model: &M,
    targets: Vec<(String, ModeState<f64>)>,
    n: usize,
    seed: u64,
) -> Result<SampleRun> {
    check_samples(n)?;
    if targets.len() != model.output_modes() {
        return Err(Error::InvalidSpec(format!(
            "{} targets for {} sampled modes",
            targets.len(),
            model.output_modes()
        )));
    }
    let total = accumulate(model, n, seed, false);
    let modes = targets
        .into_iter()
        .enumerate()
        .map(|(k, (label, target))| ModeEstimate {
            label,
            x: Estimate::from_moments(total.mean[2 * k], total.variance(2 * k), n),
            p: Estimate::from_moments(total.mean[2 * k + 1], total.variance(2 * k + 1), n),
            target,
        })
        .collect();
    Ok(SampleRun {
        n_samples: n,
        seed,
        modes,
    })
}

/// Samples all `M` clones and `M` anticlones of a protocol and pairs them with
/// their closed-form states.
pub fn run_oracle(spec: &ProtocolSpec<f64>, n: usize, seed: u64) -> Result<SampleRun> {
    check_samples(n)?;
    let model = ProtocolModel::new(spec)?;
    let params = spec.proxy_formula_params();
    let clone_var = closed_form_variance(spec.variant, params, Output::Clone)?;
    let anti_var = closed_form_variance(spec.variant, params, Output::Anticlone)?;
    let state = |(x, p): (f64, f64), v: f64| ModeState::new(x, p, [[v, 0.0], [0.0, v]]);
    let mut targets = Vec::with_capacity(2 * spec.clones);
    for j in 0..spec.clones {
        targets.push((format!("clone[{j}]"), state(spec.clone_target(), clone_var)));
    }
    for j in 0..spec.clones {
        targets.push((format!("anticlone[{j}]"), state(spec.anticlone_target(), anti_var)));
    }
    run_model(&model, targets, n, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    /// Conjugate input on BS0, remote clones.
    Direct,
    /// Coherent input on BS0, local clones.
    Swapped,
    TwoSender,
}

/// Shot-by-shot simulation of a telecloning network.
#[derive(Debug, Clone)]
pub struct ProtocolModel {
    layout: Layout,
    clones: usize,
    copies: usize,
    input: (f64, f64),
    rho: f64,
    tau: f64,
    g1: f64,
    g2: f64,
    epr_a: EprSource,
    epr_b: EprSource,
}

impl ProtocolModel {
    pub fn new(spec: &ProtocolSpec<f64>) -> Result<Self> {
        spec.validate()?;
        let layout = match spec.variant {
            Variant::A | Variant::AGeneralized => Layout::Direct,
            Variant::ASwapped => Layout::Swapped,
            Variant::B => Layout::TwoSender,
            Variant::Baseline => {
                return Err(Error::InvalidSpec("the standard telecloner has no shot model".into()))
            }
        };
        let rho = spec.reflection_amplitude();
        let g1 = (2.0 / (spec.clones as f64 * (1.0 - rho * rho))).sqrt();
        Ok(Self {
            layout,
            clones: spec.clones,
            copies: spec.copies,
            input: spec.input,
            rho,
            tau: (1.0 - rho * rho).sqrt(),
            g1,
            g2: rho * g1,
            epr_a: EprSource::new(spec.squeezing.proxy()),
            epr_b: EprSource::new(spec.squeezing2.proxy()),
        })
    }
}

type Mode = [f64; 2];

fn coherent(rng: &mut ChaCha8Rng, x: f64, p: f64) -> Mode {
    [x + normal(rng), p + normal(rng)]
}

/// `N` copies combined into one mode of amplitude `√N` times the input.
fn concentrated(rng: &mut ChaCha8Rng, copies: usize, x: f64, p: f64) -> Mode {
    let mut sum = [0.0, 0.0];
    for _ in 0..copies {
        let c = coherent(rng, x, p);
        sum[0] += c[0];
        sum[1] += c[1];
    }
    let k = 1.0 / (copies as f64).sqrt();
    [sum[0] * k, sum[1] * k]
}

/// Splits `source` into `m` equal outputs with `m - 1` fresh vacua, writing
/// them to `out[..2m]`.
fn split(rng: &mut ChaCha8Rng, source: Mode, m: usize, out: &mut [f64]) {
    let mut rest = source;
    for j in 0..m - 1 {
        let t = 1.0 / (m - j) as f64;
        let (a, b) = (t.sqrt(), (1.0 - t).sqrt());
        let v = coherent(rng, 0.0, 0.0);
        for q in 0..2 {
            out[2 * j + q] = a * rest[q] + b * v[q];
            rest[q] = b * rest[q] - a * v[q];
        }
    }
    out[2 * (m - 1)] = rest[0];
    out[2 * (m - 1) + 1] = rest[1];
}

/// Measured `(X, P)` after mixing `a` and `b` on a balanced splitter.
fn joint_measurement(a: Mode, b: Mode) -> (f64, f64) {
    let k = std::f64::consts::FRAC_1_SQRT_2;
    ((a[0] + b[0]) * k, (a[1] - b[1]) * k)
}

fn displace(out: &mut [f64], dx: f64, dp: f64) {
    for pair in out.chunks_exact_mut(2) {
        pair[0] += dx;
        pair[1] += dp;
    }
}

impl ShotModel for ProtocolModel {
    fn output_modes(&self) -> usize {
        2 * self.clones
    }

    fn shot(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let (x, p) = self.input;
        let m = self.clones;
        let (clones, anticlones) = out.split_at_mut(2 * m);
        let (rho, tau) = (self.rho, self.tau);
        match self.layout {
            Layout::Direct | Layout::Swapped => {
                let signal = concentrated(rng, self.copies, x, p);
                let conjugate = concentrated(rng, self.copies, x, -p);
                let [x1, p1, x2, p2] = self.epr_a.sample(rng);
                let (onto_bs0, measured_with) = if self.layout == Layout::Direct {
                    (conjugate, signal)
                } else {
                    (signal, conjugate)
                };
                let transmitted = [tau * onto_bs0[0] - rho * x1, tau * onto_bs0[1] - rho * p1];
                let reflected = [rho * onto_bs0[0] + tau * x1, rho * onto_bs0[1] + tau * p1];
                let (remote, local) = if self.layout == Layout::Direct {
                    (&mut *clones, &mut *anticlones)
                } else {
                    (&mut *anticlones, &mut *clones)
                };
                split(rng, [x2, p2], m, remote);
                split(rng, transmitted, m, local);
                let (xm, pm) = joint_measurement(reflected, measured_with);
                displace(remote, self.g1 * xm, -self.g1 * pm);
                displace(local, self.g2 * xm, self.g2 * pm);
            }
            Layout::TwoSender => {
                let signal = coherent(rng, x, p);
                let conjugate = coherent(rng, x, -p);
                let [ax1, ap1, ax2, ap2] = self.epr_a.sample(rng);
                let [bx1, bp1, bx2, bp2] = self.epr_b.sample(rng);
                let transmitted = [tau * bx1 - rho * ax1, tau * bp1 - rho * ap1];
                let reflected = [rho * bx1 + tau * ax1, rho * bp1 + tau * ap1];
                split(rng, [ax2, ap2], m, clones);
                split(rng, transmitted, m, anticlones);
                let (xs1, ps1) = joint_measurement(reflected, signal);
                let (xs2, ps2) = joint_measurement([bx2, bp2], conjugate);
                let (g, h) = (self.g1, rho * self.g1);
                displace(clones, g * xs1 + h * xs2, -g * ps1 + h * ps2);
                displace(anticlones, h * xs1 + g * xs2, h * ps1 - g * ps2);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZScore {
    pub label: String,
    pub quantity: &'static str,
    pub estimate: f64,
    pub target: f64,
    pub standard_error: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancyReport {
    pub entries: Vec<ZScore>,
    pub max_abs_z: f64,
    pub passed: bool,
}

impl DiscrepancyReport {
    pub fn failures(&self) -> impl Iterator<Item = &ZScore> {
        self.entries.iter().filter(|e| e.z.is_nan() || e.z.abs() > Z_THRESHOLD)
    }
}

fn z_score(estimate: f64, target: f64, se: f64) -> f64 {
    let diff = estimate - target;
    if diff == 0.0 {
        0.0
    } else if se > 0.0 {
        diff / se
    } else {
        f64::INFINITY.copysign(diff)
    }
}

/// z-scores of every mean and variance against its analytic target.
pub fn compare(run: &SampleRun) -> DiscrepancyReport {
    let mut entries = Vec::with_capacity(4 * run.modes.len());
    for mode in &run.modes {
        let t = &mode.target;
        for (quantity, estimate, target, se) in [
            ("mean_x", mode.x.mean, t.mean_x, mode.x.mean_se),
            ("mean_p", mode.p.mean, t.mean_p, mode.p.mean_se),
            ("var_x", mode.x.var, t.var_x(), mode.x.var_se),
            ("var_p", mode.p.var, t.var_p(), mode.p.var_se),
        ] {
            entries.push(ZScore {
                label: mode.label.clone(),
                quantity,
                estimate,
                target,
                standard_error: se,
                z: z_score(estimate, target, se),
            });
        }
    }
    // NaN compares false, so a NaN z-score fails.
    let passed = entries.iter().all(|e| e.z.abs() <= Z_THRESHOLD);
    let max_abs_z = entries.iter().map(|e| e.z.abs()).fold(0.0, f64::max);
    DiscrepancyReport {
        entries,
        max_abs_z,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::InputRegistry;
    use crate::scalar::Squeezing;
    use approx::assert_abs_diff_eq;

    fn vacuum_targets(k: usize) -> Vec<(String, ModeState<f64>)> {
        (0..k).map(|i| (format!("v{i}"), ModeState::coherent(0.0, 0.0))).collect()
    }

    #[test]
    fn vacuum_statistics() {
        let run = run_model(&VacuumModel { modes: 2 }, vacuum_targets(2), 1_000_000, 3).unwrap();
        for mode in &run.modes {
            for e in [mode.x, mode.p] {
                assert!(e.mean.abs() < 0.003 + 5.0 * e.mean_se, "{e:?}");
                assert!((e.var - 1.0).abs() < 0.005 + 5.0 * e.var_se, "{e:?}");
            }
        }
        assert!(compare(&run).passed);
    }

    #[test]
    fn too_few_samples() {
        let spec = ProtocolSpec::single(Variant::A, 2, 1.0, (0.0, 0.0)).unwrap();
        assert_eq!(
            run_oracle(&spec, 100, 0),
            Err(Error::TooFewSamples { min: 1000, got: 100 })
        );
        let base = ProtocolSpec::single(Variant::Baseline, 2, 1.0, (0.0, 0.0)).unwrap();
        assert!(matches!(run_oracle(&base, 5000, 0), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn epr_factor_reproduces_block() {
        for r in [0.0, 0.3, 1.0] {
            let l = EprSource::new(r).factor();
            let block = l.dot(&l.t());
            let mut reg = InputRegistry::<f64>::new();
            reg.add_epr_pair(r).unwrap();
            let expected = reg.covariance();
            for (a, b) in block.iter().zip(expected.iter()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
            let generic = cholesky(&expected).unwrap();
            for (a, b) in generic.iter().zip(l.iter()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
        // Stays finite and exact where the generic factorization gives up.
        let l = EprSource::new(10.0).factor();
        assert!(l.iter().all(|v| v.is_finite()));
        assert_abs_diff_eq!(l[[2, 2]] * l[[0, 0]], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = ndarray::arr2(&[[1.0, 2.0], [2.0, 1.0]]);
        assert_eq!(cholesky(&m), Err(Error::SingularCovariance));
    }

    struct SplitModel {
        m: usize,
    }

    impl ShotModel for SplitModel {
        fn output_modes(&self) -> usize {
            self.m
        }

        fn shot(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
            let source = coherent(rng, 3.0, -6.0);
            split(rng, source, self.m, out);
        }
    }

    #[test]
    fn split_is_balanced() {
        let m = 3;
        let k = (m as f64).sqrt();
        let targets = (0..m)
            .map(|j| (format!("out{j}"), ModeState::coherent(3.0 / k, -6.0 / k)))
            .collect();
        let run = run_model(&SplitModel { m }, targets, 200_000, 2).unwrap();
        assert!(compare(&run).passed);
        let (_, cov) = empirical_moments(&SplitModel { m }, 200_000, 2).unwrap();
        // Distinct outputs are uncorrelated vacuum-level modes.
        assert!(cov[[0, 2]].abs() < 0.02 && cov[[1, 5]].abs() < 0.02);
    }

    #[test]
    fn variant_a_clone_variance() {
        let spec = ProtocolSpec::single(Variant::A, 2, 1.0, (2.0, 4.0)).unwrap();
        let run = run_oracle(&spec, 1_000_000, 11).unwrap();
        let target = 1.125 + (-2.0f64).exp();
        let clone = &run.modes[0];
        assert_abs_diff_eq!(clone.target.var_x(), target, epsilon = 1e-12);
        assert!(((clone.x.var - target) / clone.x.var_se).abs() <= Z_THRESHOLD);
        assert!(compare(&run).passed, "{:?}", compare(&run).max_abs_z);
    }

    #[test]
    fn variant_b_three_clones() {
        let spec = ProtocolSpec::new(
            Variant::B,
            3,
            1,
            Squeezing::Finite(0.5),
            Squeezing::Finite(0.5),
            (2.0, 4.0),
        )
        .unwrap();
        let run = run_oracle(&spec, 1_000_000, 5).unwrap();
        assert_eq!(run.modes.len(), 6);
        let report = compare(&run);
        assert!(report.passed, "max |z| = {}", report.max_abs_z);
    }

    #[test]
    fn deterministic_replay() {
        let spec = ProtocolSpec::single(Variant::ASwapped, 3, 1.0, (-3.0, 1.5)).unwrap();
        let a = run_oracle(&spec, 40_000, 42).unwrap();
        let b = run_oracle(&spec, 40_000, 42).unwrap();
        assert_eq!(a, b);
        let c = run_oracle(&spec, 40_000, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn parallel_and_serial_agree() {
        let spec = ProtocolSpec::single(Variant::A, 2, 0.5, (1.0, 1.0)).unwrap();
        let parallel = run_oracle(&spec, 3 * CHUNK_SHOTS + 17, 9).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let serial = pool.install(|| run_oracle(&spec, 3 * CHUNK_SHOTS + 17, 9)).unwrap();
        assert_eq!(parallel, serial);
    }

    #[test]
    fn standard_errors_shrink_as_root_n() {
        let small = run_model(&VacuumModel { modes: 1 }, vacuum_targets(1), 4_000, 1).unwrap();
        let large = run_model(&VacuumModel { modes: 1 }, vacuum_targets(1), 16_000, 1).unwrap();
        let ratio = small.modes[0].x.mean_se / large.modes[0].x.mean_se;
        assert!((1.0..=4.0).contains(&ratio), "ratio {ratio}");
        let ratio = small.modes[0].p.var_se / large.modes[0].p.var_se;
        assert!((1.0..=4.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn compare_detects_shift() {
        let estimate = Estimate { mean: 0.0, mean_se: 0.01, var: 1.0, var_se: 0.01 };
        let mut run = SampleRun {
            n_samples: 10_000,
            seed: 0,
            modes: vec![ModeEstimate {
                label: "synthetic".into(),
                x: estimate,
                p: estimate,
                target: ModeState::coherent(0.0, 0.0),
            }],
        };
        let exact = compare(&run);
        assert!(exact.passed);
        assert!(exact.entries.iter().all(|e| e.z == 0.0));
        run.modes[0].x.mean += 10.0 * 0.01;
        let shifted = compare(&run);
        assert!(!shifted.passed);
        assert_eq!(shifted.failures().count(), 1);
        assert_abs_diff_eq!(shifted.max_abs_z, 10.0, epsilon = 1e-9);
    }

    #[test]
    fn gaussian_model_moments() {
        let cov = ndarray::arr2(&[[2.0, 0.5], [0.5, 1.0]]);
        let model = GaussianModel::new(vec![1.0, -1.0], &cov).unwrap();
        let (mean, est) = empirical_moments(&model, 200_000, 8).unwrap();
        assert!((mean[0] - 1.0).abs() < 0.02 && (mean[1] + 1.0).abs() < 0.02);
        assert!((est[[0, 1]] - 0.5).abs() < 0.03);
        assert!((est[[0, 0]] - 2.0).abs() < 0.05);
    }
}
