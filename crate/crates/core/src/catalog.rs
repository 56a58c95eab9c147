//! The finite instrument sets of the experiment: Alice's measure-reprepare
//! operations, Bob's unitaries, the input states and the final control
//! projectors, together with their waveplate compilations in Jones calculus.
//!
//! Alice's combined setting index `x ∈ 0..12` encodes a measurement basis
//! `b = x / 3` and a repreparation `r = x % 3`. Her outcome `a = 0` measures
//! `|H⟩` after the pre-measurement unitary and reprepares state `r`; outcome
//! `a = 1` passes the `|V⟩` branch through unchanged.

use crate::choi::{cj_of_measure_reprepare, cj_of_unitary};
use crate::{C64, CMat, CVec, Error, Result};

pub const N_INPUTS: usize = 3;
pub const N_ALICE_SETTINGS: usize = 12;
pub const N_BOB_SETTINGS: usize = 10;
pub const N_SETTINGS: usize = N_INPUTS * N_ALICE_SETTINGS * N_BOB_SETTINGS;
pub const N_TERMS: usize = N_SETTINGS * 4;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn m2(rows: [[C64; 2]; 2]) -> CMat {
    CMat::from_row_slice(2, 2, &[rows[0][0], rows[0][1], rows[1][0], rows[1][1]])
}

const S2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Alice's four pre-measurement unitaries.
pub fn alice_meas_unitaries() -> Vec<CMat> {
    vec![
        m2([[c(1., 0.), c(0., 0.)], [c(0., 0.), c(0., 1.)]]),
        m2([[c(S2, 0.), c(S2, 0.)], [c(0., -S2), c(0., S2)]]),
        m2([[c(S2, 0.), c(0., -S2)], [c(0., S2), c(-S2, 0.)]]),
        m2([[c(0., 0.), c(0., -1.)], [c(1., 0.), c(0., 0.)]]),
    ]
}

/// Alice's three repreparation unitaries (applied to `|H⟩`).
pub fn alice_reprep_unitaries() -> Vec<CMat> {
    vec![
        m2([[c(1., 0.), c(0., 0.)], [c(0., 0.), c(0., 1.)]]),
        m2([[c(S2, 0.), c(0., -S2)], [c(S2, 0.), c(0., S2)]]),
        m2([[c(S2, 0.), c(0., -S2)], [c(0., S2), c(-S2, 0.)]]),
    ]
}

/// Bob's ten unitaries.
pub fn bob_unitaries() -> Vec<CMat> {
    vec![
        m2([[c(1., 0.), c(0., 0.)], [c(0., 0.), c(1., 0.)]]),
        m2([[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]]),
        m2([[c(0., 0.), c(-1., 0.)], [c(1., 0.), c(0., 0.)]]),
        m2([[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]]),
        m2([[c(0., S2), c(-S2, 0.)], [c(0., S2), c(S2, 0.)]]),
        m2([[c(0., -S2), c(-S2, 0.)], [c(0., -S2), c(S2, 0.)]]),
        m2([[c(0., -S2), c(S2, 0.)], [c(0., S2), c(S2, 0.)]]),
        m2([[c(0., S2), c(0., S2)], [c(-S2, 0.), c(S2, 0.)]]),
        m2([[c(0., -S2), c(0., -S2)], [c(-S2, 0.), c(S2, 0.)]]),
        m2([[c(0., -S2), c(0., S2)], [c(S2, 0.), c(S2, 0.)]]),
    ]
}

pub fn ket_h() -> CVec {
    CVec::from_vec(vec![c(1., 0.), c(0., 0.)])
}

pub fn ket_v() -> CVec {
    CVec::from_vec(vec![c(0., 0.), c(1., 0.)])
}

pub fn ket_plus() -> CVec {
    CVec::from_vec(vec![c(S2, 0.), c(S2, 0.)])
}

/// Input states `|H⟩, |V⟩, |+⟩`.
pub fn input_kets() -> Vec<CVec> {
    vec![ket_h(), ket_v(), ket_plus()]
}

/// Final projectors onto `|+⟩` and `|−⟩` of the control.
pub fn final_projectors() -> Vec<CMat> {
    let plus = ket_plus();
    let minus = CVec::from_vec(vec![c(S2, 0.), c(-S2, 0.)]);
    vec![&plus * plus.adjoint(), &minus * minus.adjoint()]
}

/// The Kraus operator of Alice's outcome `a` at combined setting `x`.
pub fn alice_kraus(a: usize, x: usize) -> CMat {
    let basis = x / 3;
    let reprep = x % 3;
    let v = &alice_meas_unitaries()[basis];
    if a == 0 {
        let prepared = &alice_reprep_unitaries()[reprep] * ket_h();
        let effect = v.adjoint() * ket_h();
        &prepared * effect.adjoint()
    } else {
        let effect = v.adjoint() * ket_v();
        &ket_v() * effect.adjoint()
    }
}

// ---------------------------------------------------------------------------
// Jones calculus

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum WaveplateKind {
    Quarter,
    Half,
}

/// A waveplate with its fast-axis angle from horizontal, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WaveplateSetting {
    pub kind: WaveplateKind,
    pub angle_deg: f64,
}

impl WaveplateSetting {
    pub fn quarter(angle_deg: f64) -> Self {
        Self { kind: WaveplateKind::Quarter, angle_deg }
    }

    pub fn half(angle_deg: f64) -> Self {
        Self { kind: WaveplateKind::Half, angle_deg }
    }

    pub fn jones(&self) -> CMat {
        match self.kind {
            WaveplateKind::Quarter => jones_qwp(self.angle_deg),
            WaveplateKind::Half => jones_hwp(self.angle_deg),
        }
    }
}

fn rotation(deg: f64) -> CMat {
    let t = deg.to_radians();
    m2([
        [c(t.cos(), 0.), c(-t.sin(), 0.)],
        [c(t.sin(), 0.), c(t.cos(), 0.)],
    ])
}

/// Quarter-wave plate at fast-axis angle `theta` (degrees).
pub fn jones_qwp(theta_deg: f64) -> CMat {
    let ret = m2([[c(1., 0.), c(0., 0.)], [c(0., 0.), c(0., -1.)]]);
    rotation(theta_deg) * ret * rotation(-theta_deg)
}

/// Half-wave plate at fast-axis angle `theta` (degrees).
pub fn jones_hwp(theta_deg: f64) -> CMat {
    let ret = m2([[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]]);
    rotation(theta_deg) * ret * rotation(-theta_deg)
}

/// Product of the Jones matrices in listed order (the last listed plate is
/// applied to the state first).
pub fn compile_sequence(settings: &[WaveplateSetting]) -> Result<CMat> {
    if settings.is_empty() {
        return Err(Error::Degenerate("empty waveplate sequence".into()));
    }
    let mut out = CMat::identity(2, 2);
    for s in settings {
        out *= s.jones();
    }
    Ok(out)
}

/// Frobenius distance after aligning the global phase of `a` to `b`.
pub fn phase_aligned_distance(a: &CMat, b: &CMat) -> f64 {
    let overlap = (a.adjoint() * b).trace();
    let phase = if overlap.norm() > 1e-14 { overlap / overlap.norm() } else { c(1., 0.) };
    (a * phase - b).norm()
}

/// Waveplate settings for Alice's four pre-measurement unitaries.
pub fn alice_meas_waveplates() -> Vec<Vec<WaveplateSetting>> {
    use WaveplateSetting as W;
    vec![
        vec![W::half(0.0), W::quarter(0.0)],
        vec![W::half(22.5), W::quarter(45.0)],
        vec![W::half(0.0), W::quarter(-45.0)],
        vec![W::half(45.0), W::quarter(0.0)],
    ]
}

/// Waveplate settings for Alice's three repreparations.
pub fn alice_reprep_waveplates() -> Vec<Vec<WaveplateSetting>> {
    use WaveplateSetting as W;
    vec![
        vec![W::half(0.0), W::quarter(0.0)],
        vec![W::half(22.5), W::quarter(0.0)],
        vec![W::half(0.0), W::quarter(-45.0)],
    ]
}

/// Waveplate settings for Bob's ten unitaries.
pub fn bob_waveplates() -> Vec<Vec<WaveplateSetting>> {
    use WaveplateSetting as W;
    vec![
        vec![W::quarter(0.0), W::half(0.0), W::quarter(0.0)],
        vec![W::quarter(0.0), W::half(45.0), W::quarter(0.0)],
        vec![W::quarter(90.0), W::half(45.0), W::quarter(0.0)],
        vec![W::quarter(90.0), W::half(0.0), W::quarter(0.0)],
        vec![W::quarter(90.0), W::half(0.0), W::quarter(45.0)],
        vec![W::quarter(90.0), W::half(45.0), W::quarter(45.0)],
        vec![W::quarter(0.0), W::half(0.0), W::quarter(45.0)],
        vec![W::quarter(45.0), W::half(0.0), W::quarter(90.0)],
        vec![W::quarter(45.0), W::half(45.0), W::quarter(90.0)],
        vec![W::quarter(45.0), W::half(0.0), W::quarter(0.0)],
    ]
}

// ---------------------------------------------------------------------------
// Catalog

/// The full instrument catalog, built once and shared read-only.
#[derive(Debug, Clone)]
pub struct Catalog {
    /// Input kets, `z ∈ 0..3`.
    pub inputs: Vec<CVec>,
    /// Input density matrices.
    pub input_states: Vec<CMat>,
    /// Alice outcome CJ matrices, indexed `[x][a]`.
    pub mr_cj: Vec<[CMat; 2]>,
    /// Bob unitary CJ projectors, `y ∈ 0..10`.
    pub bob_cj: Vec<CMat>,
    /// Final control projectors, `d ∈ 0..2`.
    pub final_projectors: Vec<CMat>,
}

impl Catalog {
    pub fn build() -> Result<Self> {
        let inputs = input_kets();
        let input_states: Vec<CMat> = inputs.iter().map(|k| k * k.adjoint()).collect();
        let meas = alice_meas_unitaries();
        let reprep = alice_reprep_unitaries();
        let mut mr_cj = Vec::with_capacity(N_ALICE_SETTINGS);
        for x in 0..N_ALICE_SETTINGS {
            let v = &meas[x / 3];
            let m0 = cj_of_measure_reprepare(&(v.adjoint() * ket_h()), &(&reprep[x % 3] * ket_h()))?;
            let m1 = cj_of_measure_reprepare(&(v.adjoint() * ket_v()), &ket_v())?;
            mr_cj.push([m0, m1]);
        }
        let mut bob_cj = Vec::with_capacity(N_BOB_SETTINGS);
        for u in bob_unitaries() {
            let v = cj_of_unitary(&u)?;
            bob_cj.push(&v * v.adjoint());
        }
        Ok(Self { inputs, input_states, mr_cj, bob_cj, final_projectors: final_projectors() })
    }

    /// Number of distinct measure-reprepare channels (the `a = 1` branch
    /// depends only on the basis, not on the repreparation).
    pub fn mr_channel_count(&self) -> usize {
        N_ALICE_SETTINGS + 4
    }

    /// Rank of the 24 outcome-CJ matrices as a set of vectors.
    pub fn mr_rank(&self) -> usize {
        let flat: Vec<&CMat> = self.mr_cj.iter().flatten().collect();
        gram_rank(&flat)
    }

    /// Rank of the 10 unitary-CJ projectors.
    pub fn bob_rank(&self) -> usize {
        gram_rank(&self.bob_cj.iter().collect::<Vec<_>>())
    }
}

fn gram_rank(mats: &[&CMat]) -> usize {
    let n = mats.len();
    let mut gram = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            gram[(i, j)] = (mats[i].adjoint() * mats[j]).trace().re;
        }
    }
    let eig = gram.symmetric_eigen();
    let max = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
    eig.eigenvalues.iter().filter(|&&v| v > 1e-8 * max).count()
}

/// Term index within the flat `(z, x, y, a, d)` grid.
#[inline]
pub fn term_index(z: usize, x: usize, y: usize, a: usize, d: usize) -> usize {
    (((z * N_ALICE_SETTINGS + x) * N_BOB_SETTINGS + y) * 2 + a) * 2 + d
}

/// Setting index within the flat `(z, x, y)` grid.
#[inline]
pub fn setting_index(z: usize, x: usize, y: usize) -> usize {
    (z * N_ALICE_SETTINGS + x) * N_BOB_SETTINGS + y
}

/// The experimental setting grid with optional skip flags from a witness
/// coefficient tensor.
#[derive(Debug, Clone)]
pub struct SettingGrid {
    pub n_settings: usize,
    pub n_terms: usize,
    /// Settings whose four coefficients all vanish can be skipped.
    pub skippable: Vec<bool>,
}

pub fn setting_enumeration(alpha: Option<&[f64]>) -> Result<SettingGrid> {
    if let Some(a) = alpha {
        if a.len() != N_TERMS {
            return Err(Error::GridMismatch(format!(
                "coefficient tensor has {} entries, expected {N_TERMS}",
                a.len()
            )));
        }
    }
    let mut skippable = vec![false; N_SETTINGS];
    if let Some(alpha) = alpha {
        for z in 0..N_INPUTS {
            for x in 0..N_ALICE_SETTINGS {
                for y in 0..N_BOB_SETTINGS {
                    let all_zero = (0..4)
                        .all(|ad| alpha[term_index(z, x, y, ad / 2, ad % 2)].abs() <= 1e-7);
                    skippable[setting_index(z, x, y)] = all_zero;
                }
            }
        }
    }
    Ok(SettingGrid { n_settings: N_SETTINGS, n_terms: N_TERMS, skippable })
}
