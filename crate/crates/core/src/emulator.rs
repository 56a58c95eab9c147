//! Emulation of the photonic experiment: waveplate miscalibration,
//! interferometer phase drift, reduced interference visibility, detector
//! efficiencies, and Poissonian counting statistics.
//!
//! The per-setting outcome model works on two-dimensional polarization
//! amplitudes. With `X = U K_a ψ` and `Y = K_a U ψ`,
//!
//! ```text
//! p(a, d) = [ ‖X‖² + ‖Y‖² ± 2 v Re(e^{iφ} ⟨X|Y⟩) ] / 4
//! ```
//!
//! where `v` is the interference visibility, `φ` the interferometer phase
//! error, and the sign is `+` for `d = 0`. At `v = 1`, `φ = 0` this equals
//! the process-matrix contraction of the dephased switch, which the tests
//! assert.

use crate::born::ProbabilityTable;
use crate::catalog::{self, compile_sequence, ket_h, ket_v, WaveplateSetting};
use crate::{C64, CMat, CVec, Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal, Poisson};

/// Relative detector efficiencies. Outcome index `m` is Alice's result,
/// port index `n` the final control measurement; `η_0` and `η_0^m` are the
/// reference detectors and fixed at 1.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct EfficiencyModel {
    /// Efficiency of Alice's `m = 1` detector relative to `m = 0`.
    pub eta_outcome: f64,
    /// Efficiency of the `n = 1` port relative to `n = 0`, per outcome `m`.
    pub eta_port: [f64; 2],
}

impl EfficiencyModel {
    pub fn ideal() -> Self {
        Self { eta_outcome: 1.0, eta_port: [1.0, 1.0] }
    }

    /// Joint detection weight of outcome pair `(m, n)`.
    pub fn weight(&self, m: usize, n: usize) -> f64 {
        let em = if m == 0 { 1.0 } else { self.eta_outcome };
        let en = if n == 0 { 1.0 } else { self.eta_port[m] };
        em * en
    }

    fn validate(&self) -> Result<()> {
        for (v, what) in [
            (self.eta_outcome, "eta_outcome"),
            (self.eta_port[0], "eta_port[0]"),
            (self.eta_port[1], "eta_port[1]"),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::OutOfRange { what, value: v, range: "(0, inf)" });
            }
        }
        Ok(())
    }
}

/// Interferometer phase drift between periodic re-calibrations.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct DriftModel {
    /// Linear drift rate in radians per minute.
    pub drift_rad_per_min: f64,
    /// Number of settings measured between phase resets.
    pub reset_period: usize,
    /// Residual phase jitter after a reset, radians (one sigma).
    pub residual_sigma_rad: f64,
    /// Wall-clock time spent on one setting, seconds.
    pub setting_duration_s: f64,
}

impl Default for DriftModel {
    fn default() -> Self {
        Self {
            drift_rad_per_min: 0.01,
            reset_period: 20,
            residual_sigma_rad: 0.04,
            setting_duration_s: 2.0,
        }
    }
}

impl DriftModel {
    /// No drift and no jitter.
    pub fn none() -> Self {
        Self {
            drift_rad_per_min: 0.0,
            reset_period: usize::MAX,
            residual_sigma_rad: 0.0,
            setting_duration_s: 0.0,
        }
    }

    fn phase(&self, setting_index: usize, rng: &mut impl Rng) -> f64 {
        let since_reset = if self.reset_period == usize::MAX {
            setting_index
        } else {
            setting_index % self.reset_period
        };
        let minutes = since_reset as f64 * self.setting_duration_s / 60.0;
        let jitter = if self.residual_sigma_rad > 0.0 {
            Normal::new(0.0, self.residual_sigma_rad).unwrap().sample(rng)
        } else {
            0.0
        };
        self.drift_rad_per_min * minutes + jitter
    }
}

/// Stochastic imperfections of a single emulated run.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct NoiseConfig {
    /// Interference visibility of the superposition of orders, in [0, 1].
    pub visibility: f64,
    /// Waveplate angle miscalibration, degrees (one sigma per plate,
    /// redrawn for every setting).
    pub wp_sigma_deg: f64,
    /// Expected coincidence counts per setting before efficiency losses.
    pub counts_per_setting: f64,
    /// Seed for the run's random stream.
    pub seed: u64,
}

impl NoiseConfig {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.visibility) {
            return Err(Error::OutOfRange {
                what: "visibility",
                value: self.visibility,
                range: "[0, 1]",
            });
        }
        if self.wp_sigma_deg < 0.0 {
            return Err(Error::OutOfRange {
                what: "wp_sigma_deg",
                value: self.wp_sigma_deg,
                range: "[0, inf)",
            });
        }
        if self.counts_per_setting.is_nan() || self.counts_per_setting <= 0.0 {
            return Err(Error::OutOfRange {
                what: "counts_per_setting",
                value: self.counts_per_setting,
                range: "(0, inf)",
            });
        }
        Ok(())
    }
}

/// Raw coincidence counts of one setting, indexed `m * 2 + n`.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct CountRecord {
    pub counts: [u64; 4],
}

fn perturbed(seq: &[WaveplateSetting], sigma_deg: f64, rng: &mut impl Rng) -> Result<CMat> {
    if sigma_deg == 0.0 {
        return compile_sequence(seq);
    }
    let normal = Normal::new(0.0, sigma_deg).unwrap();
    let jittered: Vec<WaveplateSetting> = seq
        .iter()
        .map(|s| WaveplateSetting { kind: s.kind, angle_deg: s.angle_deg + normal.sample(rng) })
        .collect();
    compile_sequence(&jittered)
}

// Alice's Kraus operators for combined setting x, built from (possibly
// perturbed) measurement and repreparation optics. Outcome 0 transmits H
// and re-prepares through the second stage; outcome 1 reflects into V.
fn alice_kraus_from_optics(meas: &CMat, reprep: &CMat) -> [CMat; 2] {
    let h = ket_h();
    let v = ket_v();
    let effect0 = meas.adjoint() * &h;
    let effect1 = meas.adjoint() * &v;
    let prepared = reprep * &h;
    [&prepared * effect0.adjoint(), &v * effect1.adjoint()]
}

fn overlap(x: &CVec, y: &CVec) -> C64 {
    x.dotc(y)
}

/// The amplitude-model probabilities of the four outcome pairs of one
/// setting, plus `|⟨X|Y⟩|` per Alice outcome for phase-error propagation.
fn setting_probabilities(
    psi: &CVec,
    kraus: &[CMat; 2],
    bob: &CMat,
    visibility: f64,
    phase: f64,
) -> ([f64; 4], [f64; 2]) {
    let rot = C64::from_polar(1.0, phase);
    let mut p = [0.0f64; 4];
    let mut coherence = [0.0f64; 2];
    for (a, k) in kraus.iter().enumerate() {
        let x = bob * k * psi;
        let y = k * bob * psi;
        let base = x.norm_squared() + y.norm_squared();
        let inter = 2.0 * visibility * (rot * overlap(&x, &y)).re;
        p[a * 2] = (base + inter) / 4.0;
        p[a * 2 + 1] = (base - inter) / 4.0;
        coherence[a] = overlap(&x, &y).norm();
    }
    (p, coherence)
}

// Probabilities at nominal angles, with one plate (indexed across the
// concatenated meas/reprep/bob sequences) shifted by `delta` degrees.
fn probabilities_with_shift(
    psi: &CVec,
    seqs: [&[WaveplateSetting]; 3],
    shift: Option<(usize, f64)>,
    visibility: f64,
) -> Result<[f64; 4]> {
    let mut compiled = Vec::with_capacity(3);
    let mut offset = 0;
    for seq in seqs {
        let mut owned: Vec<WaveplateSetting> = seq.to_vec();
        if let Some((idx, delta)) = shift {
            if idx >= offset && idx < offset + seq.len() {
                owned[idx - offset].angle_deg += delta;
            }
        }
        offset += seq.len();
        compiled.push(compile_sequence(&owned)?);
    }
    let kraus = alice_kraus_from_optics(&compiled[0], &compiled[1]);
    let (p, _) = setting_probabilities(psi, &kraus, &compiled[2], visibility, 0.0);
    Ok(p)
}

// One-sigma systematic deviation of each outcome probability caused by
// independent Gaussian angle errors, by linear propagation at the nominal
// angles.
fn systematic_sigma(
    psi: &CVec,
    seqs: [&[WaveplateSetting]; 3],
    sigma_deg: f64,
    visibility: f64,
) -> Result<[f64; 4]> {
    let mut var = [0.0f64; 4];
    if sigma_deg > 0.0 {
        let n_plates = seqs.iter().map(|s| s.len()).sum::<usize>();
        let h = 0.05f64;
        for i in 0..n_plates {
            let plus = probabilities_with_shift(psi, seqs, Some((i, h)), visibility)?;
            let minus = probabilities_with_shift(psi, seqs, Some((i, -h)), visibility)?;
            for k in 0..4 {
                let grad = (plus[k] - minus[k]) / (2.0 * h);
                var[k] += (grad * sigma_deg).powi(2);
            }
        }
    }
    Ok(var.map(f64::sqrt))
}

/// Draw Poissonian coincidence counts for one setting.
pub fn sample_counts(
    p: &[f64; 4],
    eff: &EfficiencyModel,
    expected_counts: f64,
    rng: &mut impl Rng,
) -> Result<CountRecord> {
    eff.validate()?;
    let w: Vec<f64> = (0..4).map(|i| (p[i].max(0.0)) * eff.weight(i / 2, i % 2)).collect();
    let total: f64 = w.iter().sum();
    let mut counts = [0u64; 4];
    if total <= 0.0 {
        return Ok(CountRecord { counts });
    }
    let lambda = expected_counts * total;
    let n = Poisson::new(lambda)
        .map_err(|_| Error::OutOfRange { what: "counts", value: lambda, range: "(0, inf)" })?
        .sample(rng) as u64;
    // multinomial split via sequential binomials
    let mut remaining = n;
    let mut mass = total;
    for i in 0..3 {
        if remaining == 0 || mass <= 0.0 {
            break;
        }
        let q = (w[i] / mass).clamp(0.0, 1.0);
        let draw = Binomial::new(remaining, q).unwrap().sample(rng);
        counts[i] = draw;
        remaining -= draw;
        mass -= w[i];
    }
    counts[3] = remaining;
    Ok(CountRecord { counts })
}

/// Efficiency-corrected probabilities and their Poissonian standard
/// errors from one setting's counts.
pub fn estimate_probabilities(
    record: &CountRecord,
    eff: &EfficiencyModel,
) -> Result<([f64; 4], [f64; 4])> {
    eff.validate()?;
    let corrected: Vec<f64> =
        (0..4).map(|i| record.counts[i] as f64 / eff.weight(i / 2, i % 2)).collect();
    let total: f64 = corrected.iter().sum();
    if total <= 0.0 {
        return Err(Error::Degenerate("no counts in any outcome".into()));
    }
    let mut p = [0.0f64; 4];
    let mut sigma = [0.0f64; 4];
    for i in 0..4 {
        p[i] = corrected[i] / total;
        sigma[i] = (p[i] * (1.0 - p[i]) / total).sqrt();
    }
    Ok((p, sigma))
}

/// Recover the relative detector efficiencies from complementary fringe
/// scans. Over a scan that varies only the interferometer phase, the pair
/// `(C_{m0}, C_{m1})` moves along a line of slope `−η_1^m`, and the
/// efficiency-corrected singles rates `K_m` are phase-independent, so
/// their ratio gives `η_1`.
pub fn estimate_efficiencies(records: &[CountRecord]) -> Result<EfficiencyModel> {
    if records.len() < 3 {
        return Err(Error::Degenerate("need at least 3 scan points".into()));
    }
    let mut eta_port = [0.0f64; 2];
    for (m, eta) in eta_port.iter_mut().enumerate() {
        let xs: Vec<f64> = records.iter().map(|r| r.counts[m * 2] as f64).collect();
        let ys: Vec<f64> = records.iter().map(|r| r.counts[m * 2 + 1] as f64).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        if sxx <= f64::EPSILON * n * mx * mx {
            return Err(Error::Degenerate(format!("fringe scan for outcome {m} has no contrast")));
        }
        let slope = sxy / sxx;
        if slope >= 0.0 {
            return Err(Error::Degenerate(format!(
                "fringes for outcome {m} are not complementary (slope {slope})"
            )));
        }
        *eta = -slope;
    }
    let mut k = [0.0f64; 2];
    for r in records {
        for m in 0..2 {
            k[m] += r.counts[m * 2] as f64 + r.counts[m * 2 + 1] as f64 / eta_port[m];
        }
    }
    if k[0] <= 0.0 {
        return Err(Error::Degenerate("reference outcome has no counts".into()));
    }
    Ok(EfficiencyModel { eta_outcome: k[1] / k[0], eta_port })
}

/// Generate a synthetic phase-fringe calibration scan with `points`
/// settings of the interferometer phase over a full turn.
pub fn fringe_scan(
    eff: &EfficiencyModel,
    expected_counts: f64,
    points: usize,
    seed: u64,
) -> Result<Vec<CountRecord>> {
    eff.validate()?;
    if points < 3 {
        return Err(Error::Degenerate("need at least 3 scan points".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(points);
    for i in 0..points {
        let phi = 2.0 * std::f64::consts::PI * i as f64 / points as f64;
        let fringe = (1.0 + phi.cos()) / 2.0;
        let p = [0.5 * fringe, 0.5 * (1.0 - fringe), 0.5 * fringe, 0.5 * (1.0 - fringe)];
        out.push(sample_counts(&p, eff, expected_counts, &mut rng)?);
    }
    Ok(out)
}

/// One emulated pass over the full measurement grid.
#[derive(Debug, Clone)]
pub struct EmulationResult {
    /// The witness combination `−Σ α p̂`.
    pub value: f64,
    /// `max(0, value)`.
    pub cns: f64,
    /// Propagated one-sigma error on `value`.
    pub error: f64,
    /// Efficiency-corrected probability estimates over the full grid.
    pub table: ProbabilityTable,
    /// Per-term standard errors, same order as the table.
    pub sigma: Vec<f64>,
}

/// Run the emulated experiment: walk the setting grid in order, apply
/// drift, miscalibration, visibility and efficiency effects, draw counts,
/// and recombine the corrected estimates with the witness coefficients.
pub fn run_emulated_experiment(
    alpha: &[f64],
    noise: &NoiseConfig,
    drift: &DriftModel,
    eff: &EfficiencyModel,
) -> Result<EmulationResult> {
    noise.validate()?;
    eff.validate()?;
    if alpha.len() != catalog::N_TERMS {
        return Err(Error::GridMismatch(format!(
            "coefficient tensor has {} entries, expected {}",
            alpha.len(),
            catalog::N_TERMS
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let inputs = catalog::input_kets();
    let meas_wp = catalog::alice_meas_waveplates();
    let reprep_wp = catalog::alice_reprep_waveplates();
    let bob_wp = catalog::bob_waveplates();

    let mut p_hat = vec![0.0f64; catalog::N_TERMS];
    let mut sigma = vec![0.0f64; catalog::N_TERMS];
    let mut setting = 0usize;
    for (z, input) in inputs.iter().enumerate() {
        for x in 0..catalog::N_ALICE_SETTINGS {
            for (y, bob_nominal) in bob_wp.iter().enumerate() {
                let phase = drift.phase(setting, &mut rng);
                let meas = perturbed(&meas_wp[x / 3], noise.wp_sigma_deg, &mut rng)?;
                let reprep = perturbed(&reprep_wp[x % 3], noise.wp_sigma_deg, &mut rng)?;
                let bob = perturbed(bob_nominal, noise.wp_sigma_deg, &mut rng)?;
                let kraus = alice_kraus_from_optics(&meas, &reprep);
                let (p, coherence) =
                    setting_probabilities(input, &kraus, &bob, noise.visibility, phase);
                let record = sample_counts(&p, eff, noise.counts_per_setting, &mut rng)?;
                let (est, err) = estimate_probabilities(&record, eff)?;
                let sys = systematic_sigma(
                    input,
                    [&meas_wp[x / 3], &reprep_wp[x % 3], bob_nominal],
                    noise.wp_sigma_deg,
                    noise.visibility,
                )?;
                for a in 0..2 {
                    // residual phase jitter feeds through the interference
                    // term with gain at most v|<X|Y>|/2
                    let phase_err =
                        noise.visibility * coherence[a] / 2.0 * drift.residual_sigma_rad;
                    for d in 0..2 {
                        let t = catalog::term_index(z, x, y, a, d);
                        p_hat[t] = est[a * 2 + d];
                        sigma[t] = (err[a * 2 + d].powi(2)
                            + phase_err.powi(2)
                            + sys[a * 2 + d].powi(2))
                        .sqrt();
                    }
                }
                setting += 1;
            }
        }
    }
    let value = -alpha.iter().zip(&p_hat).map(|(a, p)| a * p).sum::<f64>();
    let error = alpha
        .iter()
        .zip(&sigma)
        .map(|(a, s)| (a * s).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(EmulationResult {
        value,
        cns: value.max(0.0),
        error,
        table: ProbabilityTable::from_vec(p_hat)?,
        sigma,
    })
}

/// Noiseless amplitude-model table at the given visibility.
pub fn ideal_table(visibility: f64) -> Result<ProbabilityTable> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::OutOfRange { what: "visibility", value: visibility, range: "[0, 1]" });
    }
    let inputs = catalog::input_kets();
    let bobs = catalog::bob_unitaries();
    let mut p = vec![0.0f64; catalog::N_TERMS];
    for z in 0..catalog::N_INPUTS {
        for x in 0..catalog::N_ALICE_SETTINGS {
            let kraus = [catalog::alice_kraus(0, x), catalog::alice_kraus(1, x)];
            for (y, bob) in bobs.iter().enumerate() {
                let (ps, _) = setting_probabilities(&inputs[z], &kraus, bob, visibility, 0.0);
                for a in 0..2 {
                    for d in 0..2 {
                        p[catalog::term_index(z, x, y, a, d)] = ps[a * 2 + d];
                    }
                }
            }
        }
    }
    ProbabilityTable::from_vec(p)
}

/// One point of a visibility sweep.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct SweepPoint {
    pub visibility: f64,
    pub value: f64,
    pub error: f64,
}

/// Least-squares line through a sweep with its zero crossing.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Visibility at which the fitted line crosses zero, if the line has
    /// nonzero slope.
    pub crossing: Option<f64>,
}

fn fit_sweep(points: Vec<SweepPoint>) -> Result<SweepResult> {
    if points.len() < 2 {
        return Err(Error::Degenerate("sweep needs at least 2 points".into()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.visibility).sum::<f64>() / n;
    let my = points.iter().map(|p| p.value).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.visibility - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.visibility - mx) * (p.value - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::Degenerate("sweep points share one visibility".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = points.iter().map(|p| (p.value - my).powi(2)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.value - slope * p.visibility - intercept).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    let crossing = if slope.abs() > 1e-12 { Some(-intercept / slope) } else { None };
    Ok(SweepResult { points, slope, intercept, r_squared, crossing })
}

/// Sweep the witness value over visibilities with the noiseless model.
pub fn visibility_sweep_ideal(alpha: &[f64], visibilities: &[f64]) -> Result<SweepResult> {
    let mut points = Vec::with_capacity(visibilities.len());
    for &v in visibilities {
        let table = ideal_table(v)?;
        let value = crate::witness::evaluate_witness(alpha, &table)?;
        points.push(SweepPoint { visibility: v, value, error: 0.0 });
    }
    fit_sweep(points)
}

/// Sweep over visibilities with the full emulation; each point uses a
/// seed derived from the template's.
pub fn visibility_sweep_emulated(
    alpha: &[f64],
    visibilities: &[f64],
    noise: &NoiseConfig,
    drift: &DriftModel,
    eff: &EfficiencyModel,
) -> Result<SweepResult> {
    let mut points = Vec::with_capacity(visibilities.len());
    for (i, &v) in visibilities.iter().enumerate() {
        let cfg = NoiseConfig {
            visibility: v,
            seed: noise.seed.wrapping_add(i as u64),
            ..*noise
        };
        let run = run_emulated_experiment(alpha, &cfg, drift, eff)?;
        points.push(SweepPoint { visibility: v, value: run.value, error: run.error });
    }
    fit_sweep(points)
}

/// Average drop of the witness value caused by waveplate miscalibration
/// alone (unit visibility, no drift, no counting noise).
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct MiscalibrationReport {
    pub mean_drop: f64,
    pub std_dev: f64,
    pub trials: usize,
}

pub fn miscalibration_monte_carlo(
    alpha: &[f64],
    sigma_deg: f64,
    trials: usize,
    seed: u64,
) -> Result<MiscalibrationReport> {
    if sigma_deg < 0.0 {
        return Err(Error::OutOfRange {
            what: "sigma_deg",
            value: sigma_deg,
            range: "[0, inf)",
        });
    }
    if trials == 0 {
        return Err(Error::Degenerate("need at least 1 trial".into()));
    }
    if alpha.len() != catalog::N_TERMS {
        return Err(Error::GridMismatch(format!(
            "coefficient tensor has {} entries, expected {}",
            alpha.len(),
            catalog::N_TERMS
        )));
    }
    let ideal = crate::witness::evaluate_witness(alpha, &ideal_table(1.0)?)?;
    let inputs = catalog::input_kets();
    let meas_wp = catalog::alice_meas_waveplates();
    let reprep_wp = catalog::alice_reprep_waveplates();
    let bob_wp = catalog::bob_waveplates();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut drops = Vec::with_capacity(trials);
    for _ in 0..trials {
        let mut value = 0.0f64;
        for z in 0..catalog::N_INPUTS {
            for x in 0..catalog::N_ALICE_SETTINGS {
                for y in 0..catalog::N_BOB_SETTINGS {
                    let meas = perturbed(&meas_wp[x / 3], sigma_deg, &mut rng)?;
                    let reprep = perturbed(&reprep_wp[x % 3], sigma_deg, &mut rng)?;
                    let bob = perturbed(&bob_wp[y], sigma_deg, &mut rng)?;
                    let kraus = alice_kraus_from_optics(&meas, &reprep);
                    let (p, _) = setting_probabilities(&inputs[z], &kraus, &bob, 1.0, 0.0);
                    for a in 0..2 {
                        for d in 0..2 {
                            value -=
                                alpha[catalog::term_index(z, x, y, a, d)] * p[a * 2 + d];
                        }
                    }
                }
            }
        }
        drops.push(ideal - value);
    }
    let n = drops.len() as f64;
    let mean = drops.iter().sum::<f64>() / n;
    let var = drops.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
    Ok(MiscalibrationReport { mean_drop: mean, std_dev: var.sqrt(), trials })
}
