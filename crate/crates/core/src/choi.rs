//! Choi–Jamiołkowski representations of unitaries, Kraus channels and
//! measure-reprepare instruments.
//!
//! One convention is used everywhere: a channel maps to
//! `M = [Σ_k (1 ⊗ K_k)|1⟩⟩⟨⟨1|(1 ⊗ K_k)†]ᵀ`, so a unitary conjugation maps
//! to the rank-1 projector onto `(1 ⊗ U*)|1⟩⟩`. The Born-rule contraction
//! in [`crate::born`] assumes exactly this convention.

use crate::{C64, CMat, CVec, Error, Result};

/// A channel (or instrument element) given by its Kraus operators.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    kraus: Vec<CMat>,
    trace_preserving: bool,
}

impl KrausChannel {
    /// `trace_preserving` asserts `Σ K†K = I`; otherwise only
    /// `Σ K†K ≼ I` is required (instrument element).
    pub fn new(kraus: Vec<CMat>, trace_preserving: bool) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::EmptyKraus);
        }
        let d_in = kraus[0].ncols();
        let mut sum = CMat::zeros(d_in, d_in);
        for k in &kraus {
            if k.ncols() != d_in {
                return Err(Error::GridMismatch("Kraus input dimensions differ".into()));
            }
            sum += k.adjoint() * k;
        }
        let eye = CMat::identity(d_in, d_in);
        if trace_preserving {
            let res = (&sum - &eye).norm();
            if res > 1e-10 {
                return Err(Error::InvalidProcess { check: "trace preservation", residual: res });
            }
        } else {
            let gap = &eye - &sum;
            let min = crate::tensor::eigh(&gap).0[0];
            if min < -1e-10 {
                return Err(Error::InvalidProcess {
                    check: "trace non-increase",
                    residual: -min,
                });
            }
        }
        Ok(Self { kraus, trace_preserving })
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    pub fn input_dim(&self) -> usize {
        self.kraus[0].ncols()
    }

    /// Apply the channel to a density matrix.
    pub fn apply(&self, rho: &CMat) -> CMat {
        let mut out = CMat::zeros(self.kraus[0].nrows(), self.kraus[0].nrows());
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        out
    }
}

/// The unnormalized maximally entangled vector `Σ_j |j⟩⊗|j⟩`.
pub fn double_ket(d: usize) -> CVec {
    let mut v = CVec::zeros(d * d);
    for j in 0..d {
        v[j * d + j] = C64::new(1.0, 0.0);
    }
    v
}

/// CJ vector `(1 ⊗ U*)|1⟩⟩` of a unitary. Components indexed `(in, out)`.
pub fn cj_of_unitary(u: &CMat) -> Result<CVec> {
    let d = u.nrows();
    let res = (u.adjoint() * u - CMat::identity(d, d)).norm();
    if res > 1e-10 {
        return Err(Error::NotUnitary(res));
    }
    let mut v = CVec::zeros(d * d);
    for j in 0..d {
        for k in 0..d {
            v[j * d + k] = u[(k, j)].conj();
        }
    }
    Ok(v)
}

// (1 (x) K)|1>> as a vector over (in, out)
fn lifted_kraus(k: &CMat) -> CVec {
    let (d_out, d_in) = (k.nrows(), k.ncols());
    let mut v = CVec::zeros(d_in * d_out);
    for j in 0..d_in {
        for m in 0..d_out {
            v[j * d_out + m] = k[(m, j)];
        }
    }
    v
}

/// CJ matrix of a channel under the global (transposed) convention.
pub fn cj_of_channel(ch: &KrausChannel) -> CMat {
    link_of_kraus(ch.kraus()).transpose()
}

/// `Σ_k (1 ⊗ K_k)|1⟩⟩⟨⟨1|(1 ⊗ K_k)†` without the final transpose. This is
/// the form a channel contributes as a tensor factor of a causally ordered
/// process matrix.
pub fn link_of_kraus(kraus: &[CMat]) -> CMat {
    let d = kraus[0].ncols() * kraus[0].nrows();
    let mut out = CMat::zeros(d, d);
    for k in kraus {
        let v = lifted_kraus(k);
        out += &v * v.adjoint();
    }
    out
}

/// CJ matrix of the instrument element with Kraus `|reprep⟩⟨measure|`.
pub fn cj_of_measure_reprepare(measure: &CVec, reprep: &CVec) -> Result<CMat> {
    for (v, what) in [(measure, "measurement bra"), (reprep, "repreparation ket")] {
        let n = v.norm();
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::Degenerate(format!("{what} has norm {n}")));
        }
    }
    let k = reprep * measure.adjoint();
    let ch = KrausChannel::new(vec![k], false)?;
    Ok(cj_of_channel(&ch))
}
