//! Process matrices: the quantum SWITCH, causally ordered processes, noisy
//! variants, and membership tests for the validity and order cones.
//!
//! Process matrices live on six qubits in the canonical order
//! `(in, A_in, A_out, B_in, B_out, C)`. The target output system is already
//! traced out; the `C` label carries the control qubit read out at the end.

use crate::choi::link_of_kraus;
use crate::pauli::{self, Subspace};
use crate::tensor::{eigh, LabeledOperator};
use crate::{C64, CMat, CVec, Error, Result};
use rand::Rng;

pub const CANONICAL_LABELS: [&str; 6] = ["in", "A_in", "A_out", "B_in", "B_out", "C"];
const VECTOR_LABELS: [&str; 7] = ["in", "A_in", "A_out", "B_in", "B_out", "out", "C"];

pub const PROCESS_DIM: usize = 64;
/// Product of the output-slot dimensions, the trace of every valid process.
pub const OUTPUT_DIM: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CausalOrder {
    AThenB,
    BThenA,
}

impl CausalOrder {
    pub fn swapped(self) -> Self {
        match self {
            CausalOrder::AThenB => CausalOrder::BThenA,
            CausalOrder::BThenA => CausalOrder::AThenB,
        }
    }
}

/// A PSD, trace-8 operator over the canonical six-qubit space.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessMatrix {
    op: LabeledOperator,
}

impl ProcessMatrix {
    /// Wrap an operator, checking Hermiticity, positivity and normalization.
    pub fn new(op: LabeledOperator) -> Result<Self> {
        let names: Vec<&str> = op.space().iter().map(|l| l.name.as_str()).collect();
        if names != CANONICAL_LABELS || op.space().iter().any(|l| l.dim != 2) {
            return Err(Error::GridMismatch(format!(
                "expected qubit labels {CANONICAL_LABELS:?}, got {names:?}"
            )));
        }
        let herm = op.hermiticity_residual();
        if herm > 1e-12 {
            return Err(Error::NotHermitian(herm));
        }
        let min = eigh(op.matrix()).0[0];
        if min < -1e-10 {
            return Err(Error::InvalidProcess { check: "positivity", residual: -min });
        }
        let tr = (op.trace().re - OUTPUT_DIM).abs();
        if tr > 1e-9 {
            return Err(Error::InvalidProcess { check: "trace normalization", residual: tr });
        }
        Ok(Self { op })
    }

    pub fn from_matrix(m: CMat) -> Result<Self> {
        Self::new(LabeledOperator::qubits(&CANONICAL_LABELS, m)?)
    }

    pub fn operator(&self) -> &LabeledOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMat {
        self.op.matrix()
    }

    pub fn into_operator(self) -> LabeledOperator {
        self.op
    }
}

fn bit(i: usize, k: usize, n: usize) -> usize {
    (i >> (n - 1 - k)) & 1
}

/// Process vector of a fixed-order identity-link chain over
/// `(in, A_in, A_out, B_in, B_out, out)`. Squared norm 8.
pub fn identity_link_vector(order: CausalOrder) -> CVec {
    let mut v = CVec::zeros(64);
    for i in 0..64 {
        let (inp, ai, ao, bi, bo, out) = (
            bit(i, 0, 6),
            bit(i, 1, 6),
            bit(i, 2, 6),
            bit(i, 3, 6),
            bit(i, 4, 6),
            bit(i, 5, 6),
        );
        let linked = match order {
            CausalOrder::AThenB => inp == ai && ao == bi && bo == out,
            CausalOrder::BThenA => inp == bi && bo == ai && ao == out,
        };
        if linked {
            v[i] = C64::new(1.0, 0.0);
        }
    }
    v
}

/// Process vector of the quantum SWITCH over
/// `(in, A_in, A_out, B_in, B_out, out, C)`. Squared norm 8.
pub fn switch_vector() -> CVec {
    let mut v = CVec::zeros(128);
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    for (order, ctl) in [(CausalOrder::AThenB, 0usize), (CausalOrder::BThenA, 1)] {
        let branch = identity_link_vector(order);
        for i in 0..64 {
            v[i * 2 + ctl] += s * branch[i];
        }
    }
    v
}

fn traced_projector(v128: &CVec) -> Result<ProcessMatrix> {
    let proj = v128 * v128.adjoint();
    let op = LabeledOperator::qubits(&VECTOR_LABELS, proj)?;
    let reduced = op.partial_trace(&["out"])?;
    ProcessMatrix::new(reduced)
}

/// The SWITCH process matrix: trace 8, PSD, rank 2.
pub fn switch_matrix() -> ProcessMatrix {
    traced_projector(&switch_vector()).expect("switch construction is exact")
}

/// The fixed-order branch of the SWITCH with the control collapsed to the
/// corresponding basis state.
pub fn fixed_order_switch(order: CausalOrder) -> ProcessMatrix {
    let branch = identity_link_vector(order);
    let ctl = match order {
        CausalOrder::AThenB => 0usize,
        CausalOrder::BThenA => 1,
    };
    let mut v = CVec::zeros(128);
    for i in 0..64 {
        v[i * 2 + ctl] = branch[i];
    }
    traced_projector(&v).expect("fixed-order construction is exact")
}

/// `p·w1 + (1−p)·w2` with `w1` compatible with A before B and `w2` with the
/// opposite order.
pub fn separable_mixture(
    w1: &ProcessMatrix,
    w2: &ProcessMatrix,
    p: f64,
) -> Result<ProcessMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange { what: "mixing probability", value: p, range: "[0, 1]" });
    }
    let r1 = is_order_compatible(w1, CausalOrder::AThenB);
    if !r1.compatible {
        return Err(Error::InvalidProcess {
            check: "first component order A then B",
            residual: r1.worst_residual(),
        });
    }
    let r2 = is_order_compatible(w2, CausalOrder::BThenA);
    if !r2.compatible {
        return Err(Error::InvalidProcess {
            check: "second component order B then A",
            residual: r2.worst_residual(),
        });
    }
    ProcessMatrix::from_matrix(w1.matrix().scale(p) + w2.matrix().scale(1.0 - p))
}

/// Scale the control-coherence blocks by `v`. `v = 1` is the identity,
/// `v = 0` the even classical mixture of the two orders.
pub fn dephase_control(w: &ProcessMatrix, v: f64) -> Result<ProcessMatrix> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::OutOfRange { what: "visibility", value: v, range: "[0, 1]" });
    }
    let mut m = w.matrix().clone();
    for r in 0..PROCESS_DIM {
        for c in 0..PROCESS_DIM {
            if (r & 1) != (c & 1) {
                m[(r, c)] *= C64::new(v, 0.0);
            }
        }
    }
    ProcessMatrix::from_matrix(m)
}

/// Diagnostics from the validity test.
#[derive(Debug, Clone, Copy)]
pub struct ValidityReport {
    pub valid: bool,
    pub negativity: f64,
    pub trace_residual: f64,
    pub subspace_residual: f64,
}

/// True iff PSD, trace 8 and supported on the span of the two order
/// subspaces.
pub fn is_valid_process(w: &LabeledOperator) -> ValidityReport {
    let negativity = (-eigh(w.matrix()).0[0]).max(0.0);
    let trace_residual = (w.trace().re - OUTPUT_DIM).abs();
    let subspace_residual = pauli::residual_outside(w.matrix(), Subspace::Valid);
    ValidityReport {
        valid: negativity <= 1e-10 && trace_residual <= 1e-9 && subspace_residual <= 1e-9,
        negativity,
        trace_residual,
        subspace_residual,
    }
}

/// Diagnostics from the order-compatibility test.
#[derive(Debug, Clone, Copy)]
pub struct OrderReport {
    pub compatible: bool,
    pub negativity: f64,
    /// Residuals of the three nested comb conditions, outermost first.
    pub comb_residuals: [f64; 3],
}

impl OrderReport {
    pub fn worst_residual(&self) -> f64 {
        self.comb_residuals
            .iter()
            .fold(self.negativity, |a, &b| a.max(b))
    }
}

/// Nested comb test: tracing out the systems from the future end, each stage
/// must leave the most recent output slot maximally mixed.
pub fn is_order_compatible(w: &ProcessMatrix, order: CausalOrder) -> OrderReport {
    let (first_out, mid_pair, last_out) = match order {
        CausalOrder::AThenB => ("B_out", ["B_in", "B_out"], "A_out"),
        CausalOrder::BThenA => ("A_out", ["A_in", "A_out"], "B_out"),
    };
    let op = w.operator();
    let negativity = (-eigh(op.matrix()).0[0]).max(0.0);

    let w4 = op.partial_trace(&["C"]).expect("label present");
    let r1 = (w4.matrix() - w4.trace_and_replace(&[first_out]).expect("label").matrix()).norm();
    let w2 = w4
        .partial_trace(&[mid_pair[0], mid_pair[1]])
        .expect("labels present");
    let r2 = (w2.matrix() - w2.trace_and_replace(&[last_out]).expect("label").matrix()).norm();
    let w1 = w2
        .partial_trace(&[if order == CausalOrder::AThenB { "A_in" } else { "B_in" }, last_out])
        .expect("labels present");
    let r3 = (w1.matrix() - w1.trace_and_replace(&["in"]).expect("label").matrix()).norm();

    let comb_residuals = [r1, r2, r3];
    OrderReport {
        compatible: negativity <= 1e-10 && comb_residuals.iter().all(|&r| r <= 1e-9),
        negativity,
        comb_residuals,
    }
}

/// `(w + λ·omega) / (1 + λ)`.
pub fn worst_case_mix(
    w: &ProcessMatrix,
    omega: &ProcessMatrix,
    lambda: f64,
) -> Result<ProcessMatrix> {
    if lambda < 0.0 {
        return Err(Error::OutOfRange { what: "lambda", value: lambda, range: "[0, inf)" });
    }
    for (p, name) in [(w, "process"), (omega, "noise process")] {
        let rep = is_valid_process(p.operator());
        if !rep.valid {
            return Err(Error::InvalidProcess {
                check: if name == "process" { "mixed process validity" } else { "noise validity" },
                residual: rep.negativity.max(rep.trace_residual).max(rep.subspace_residual),
            });
        }
    }
    ProcessMatrix::from_matrix(
        (w.matrix() + omega.matrix().scale(lambda)).scale(1.0 / (1.0 + lambda)),
    )
}

// ---------------------------------------------------------------------------
// Random causally ordered circuits

fn random_cptp_kraus<R: Rng>(rng: &mut R) -> Vec<CMat> {
    use rand_distr::StandardNormal;
    let g = CMat::from_fn(4, 2, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let q = g.qr().q();
    vec![
        q.view((0, 0), (2, 2)).into_owned(),
        q.view((2, 0), (2, 2)).into_owned(),
    ]
}

/// Process matrix of a random circuit with the given fixed order: three
/// independent CPTP channels linking input → first party → second party →
/// control slot.
pub fn random_ordered_process<R: Rng>(rng: &mut R, order: CausalOrder) -> ProcessMatrix {
    let links: Vec<CMat> = (0..3).map(|_| link_of_kraus(&random_cptp_kraus(rng))).collect();
    let labels: [[&str; 2]; 3] = match order {
        CausalOrder::AThenB => [["in", "A_in"], ["A_out", "B_in"], ["B_out", "C"]],
        CausalOrder::BThenA => [["in", "B_in"], ["B_out", "A_in"], ["A_out", "C"]],
    };
    let mut op: Option<LabeledOperator> = None;
    for (link, names) in links.into_iter().zip(labels) {
        let factor = LabeledOperator::qubits(&names, link).expect("fresh labels");
        op = Some(match op {
            None => factor,
            Some(acc) => acc.tensor(&factor).expect("disjoint labels"),
        });
    }
    let op = op.unwrap().permute(&CANONICAL_LABELS).expect("full label set");
    ProcessMatrix::new(op).expect("ordered circuits are valid processes")
}

/// Random convex mixture of two random fixed-order processes.
pub fn random_separable_process<R: Rng>(rng: &mut R) -> ProcessMatrix {
    let w_ab = random_ordered_process(rng, CausalOrder::AThenB);
    let w_ba = random_ordered_process(rng, CausalOrder::BThenA);
    let p: f64 = rng.random();
    ProcessMatrix::from_matrix(w_ab.matrix().scale(p) + w_ba.matrix().scale(1.0 - p))
        .expect("mixture of valid processes")
}
