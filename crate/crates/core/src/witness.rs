//! Causal-witness semidefinite programs.
//!
//! The witness problem `min tr(S·W)` over witnesses `S` (nonnegative on
//! every causally ordered process, normalized so that `I/8 − S` pairs
//! nonnegatively with every valid process) is solved through its conic
//! dual:
//!
//! ```text
//! min tr(Ω)/8   s.t.  Ω ∈ PSD ∩ V,  W_A ∈ PSD ∩ V_A,  W_B ∈ PSD ∩ V_B,
//!                     P_C(W_A + W_B − Ω − W) = 0
//! ```
//!
//! where `V_A`, `V_B` are the two order subspaces, `V` their span, and
//! `P_C` restricts the balance constraint to the experimentally reachable
//! witness span (identity for the unrestricted problem). The optimal value
//! equals the causal non-separability of `W`, the multiplier of the
//! balance constraint is the witness itself, and the optimal `Ω`
//! (normalized to trace 8) is the most damaging valid noise process.
//!
//! The solver is Douglas–Rachford splitting with over-relaxation: the
//! affine constraint is projected in closed form in the product-Pauli
//! basis, where all four subspaces are diagonal; the PSD projections use
//! eigenvalue clipping. Fully deterministic.

use crate::born::{ProbabilityTable, ProductBasis};
use crate::catalog::{self, Catalog};
use crate::pauli::{self, from_pauli, mask, to_pauli, Subspace, N_TERMS};
use crate::process::{ProcessMatrix, CANONICAL_LABELS};
use crate::tensor::{psd_project_mat, LabeledOperator};
use crate::{C64, CMat, Error, Result};

const STEP: f64 = 1.0;
const RELAXATION: f64 = 1.8;
const TOLERANCE: f64 = 1e-9;
const MAX_ITERATIONS: usize = 200_000;

/// Output of a witness optimization.
pub struct WitnessResult {
    /// The witness operator `S` over the canonical six-qubit space.
    pub witness: LabeledOperator,
    /// Coefficients over the `(z, x, y, a, d)` product-operator grid
    /// (restricted problem only).
    pub alpha: Option<Vec<f64>>,
    /// `tr(S·W)`, unclipped.
    pub raw_value: f64,
    /// `max(0, −tr(S·W))`.
    pub cns: f64,
    /// The most damaging valid noise process, when the optimum is nonzero.
    pub worst_case_noise: Option<ProcessMatrix>,
    pub iterations: usize,
    /// Douglas–Rachford fixed-point residual at termination.
    pub primal_residual: f64,
    /// Balance-constraint residual of the final iterate.
    pub dual_residual: f64,
    /// `|objective − (−tr(S·W))|`.
    pub gap: f64,
    /// `‖Σ α·G − S‖` for the restricted problem.
    pub alpha_residual: Option<f64>,
}

struct Coeffs(Box<[C64; N_TERMS]>);

impl Coeffs {
    fn masked(m: &CMat, which: Subspace) -> Self {
        let mut c = to_pauli(m);
        let msk = mask(which);
        for t in 0..N_TERMS {
            if !msk[t] {
                c[t] = C64::new(0.0, 0.0);
            }
        }
        Coeffs(c)
    }
}

fn solve(w: &ProcessMatrix, restricted: bool) -> Result<(WitnessResult, CMat)> {
    let mask_a = mask(Subspace::OrderAB);
    let mask_b = mask(Subspace::OrderBA);
    let mask_v = mask(Subspace::Valid);
    let full = [true; N_TERMS];
    let mask_c: &[bool; N_TERMS] = if restricted { mask(Subspace::Restricted) } else { &full };

    let mut pinv = vec![0.0f64; N_TERMS];
    for t in 0..N_TERMS {
        if !mask_c[t] {
            continue;
        }
        pinv[t] = match (mask_a[t], mask_b[t]) {
            (true, true) => 1.0 / 3.0,
            (true, false) | (false, true) => 0.5,
            (false, false) => 0.0,
        };
    }
    let cw = to_pauli(w.matrix());

    let obj = CMat::identity(64, 64).scale(1.0 / 8.0);
    let mut u_o = CMat::zeros(64, 64);
    let mut u_a = CMat::zeros(64, 64);
    let mut u_b = CMat::zeros(64, 64);

    let mut mu = Box::new([C64::new(0.0, 0.0); N_TERMS]);
    let mut x_o = CMat::zeros(64, 64);
    let mut x_a = CMat::zeros(64, 64);
    let mut x_b = CMat::zeros(64, 64);
    let mut residual = f64::INFINITY;
    let mut iterations = 0;

    for it in 0..MAX_ITERATIONS {
        // affine projection, diagonal in the Pauli basis
        let c_o = Coeffs::masked(&(&u_o - obj.scale(STEP)), Subspace::Valid);
        let c_a = Coeffs::masked(&u_a, Subspace::OrderAB);
        let c_b = Coeffs::masked(&u_b, Subspace::OrderBA);
        let mut co = c_o.0;
        let ca = c_a.0;
        let cb = c_b.0;
        let mut ca_out = ca.clone();
        let mut cb_out = cb.clone();
        for t in 0..N_TERMS {
            let rhs = if mask_c[t] { ca[t] + cb[t] - co[t] - cw[t] } else { C64::new(0.0, 0.0) };
            mu[t] = rhs * C64::new(pinv[t], 0.0);
            if mask_v[t] {
                co[t] += mu[t];
            }
            if mask_a[t] {
                ca_out[t] -= mu[t];
            }
            if mask_b[t] {
                cb_out[t] -= mu[t];
            }
        }
        x_o = from_pauli(&co);
        x_a = from_pauli(&ca_out);
        x_b = from_pauli(&cb_out);

        let y_o = psd_project_mat(&(x_o.scale(2.0) - &u_o));
        let y_a = psd_project_mat(&(x_a.scale(2.0) - &u_a));
        let y_b = psd_project_mat(&(x_b.scale(2.0) - &u_b));

        let d_o = &y_o - &x_o;
        let d_a = &y_a - &x_a;
        let d_b = &y_b - &x_b;
        residual =
            (d_o.norm_squared() + d_a.norm_squared() + d_b.norm_squared()).sqrt();
        u_o += d_o.scale(RELAXATION);
        u_a += d_a.scale(RELAXATION);
        u_b += d_b.scale(RELAXATION);
        iterations = it + 1;
        if residual < TOLERANCE && it > 10 {
            break;
        }
    }
    if residual >= TOLERANCE {
        return Err(Error::SolverStalled { iterations, residual });
    }

    let objective = x_o.trace().re / 8.0;
    let s_mat = from_pauli(&mu).scale(1.0 / STEP);
    let raw_value = crate::born::trace_product(&s_mat, w.matrix()).re;
    let cns = (-raw_value).max(0.0);

    // balance residual of the PSD-projected final iterate, restricted to
    // the constraint span (the affine-projected x satisfies it exactly)
    let p_a = to_pauli(&psd_project_mat(&x_a));
    let p_b = to_pauli(&psd_project_mat(&x_b));
    let p_o = to_pauli(&psd_project_mat(&x_o));
    let mut dual_residual = 0.0f64;
    for t in 0..N_TERMS {
        if mask_c[t] {
            let r = p_a[t] + p_b[t] - p_o[t] - cw[t];
            dual_residual += r.norm_sqr();
        }
    }
    let dual_residual = (64.0 * dual_residual).sqrt();

    let worst_case_noise = if objective > 1e-8 {
        let normalized = psd_project_mat(&x_o);
        let normalized = normalized.scale(8.0 / normalized.trace().re);
        ProcessMatrix::from_matrix(normalized).ok()
    } else {
        None
    };

    let witness = LabeledOperator::qubits(&CANONICAL_LABELS, s_mat)?;
    let result = WitnessResult {
        witness,
        alpha: None,
        raw_value,
        cns,
        worst_case_noise,
        iterations,
        primal_residual: residual,
        dual_residual,
        gap: (objective - cns).abs(),
        alpha_residual: None,
    };
    Ok((result, x_o))
}

/// Optimal (unrestricted) causal witness for `w`.
pub fn optimal_witness(w: &ProcessMatrix) -> Result<WitnessResult> {
    Ok(solve(w, false)?.0)
}

/// Witness restricted to the span of the experiment's product operators,
/// with its coefficient tensor over the `(z, x, y, a, d)` grid.
pub fn restricted_witness(w: &ProcessMatrix, cat: &Catalog) -> Result<WitnessResult> {
    let (mut result, _) = solve(w, true)?;
    let basis = ProductBasis::new(cat)?;
    let rhs = basis.inner_products(result.witness.matrix());
    let alpha = basis.min_norm_solve(&rhs);
    let rebuilt = basis.assemble(&alpha);
    result.alpha_residual = Some((&rebuilt - result.witness.matrix()).norm());
    result.alpha = Some(alpha);
    Ok(result)
}

/// `−Σ_t α_t · p_t`.
pub fn evaluate_witness(alpha: &[f64], table: &ProbabilityTable) -> Result<f64> {
    if alpha.len() != catalog::N_TERMS {
        return Err(Error::GridMismatch(format!(
            "coefficient tensor has {} entries, expected {}",
            alpha.len(),
            catalog::N_TERMS
        )));
    }
    Ok(-alpha
        .iter()
        .zip(table.values())
        .map(|(a, p)| a * p)
        .sum::<f64>())
}

/// Worst-case noise probability `cns / (1 + cns)`.
pub fn worst_case_probability(cns: f64) -> Result<f64> {
    if cns < 0.0 {
        return Err(Error::OutOfRange { what: "cns", value: cns, range: "[0, inf)" });
    }
    Ok(cns / (1.0 + cns))
}

/// A process is causally separable iff the optimal witness certifies
/// nothing.
pub fn is_causally_separable(w: &ProcessMatrix) -> Result<bool> {
    Ok(optimal_witness(w)?.cns < 1e-6)
}

/// Outcome of a dual-cone membership test for the cone
/// `C = {X ⪰ 0, X ∈ subspace}`.
pub enum DualMembership {
    /// `s − q ⪰ 0` with `q` orthogonal to the subspace.
    Inside { q: CMat, residual: f64 },
    /// A cone element pairing negatively with `s`.
    Outside { certificate: CMat, value: f64 },
}

/// Decide whether `s` pairs nonnegatively with every element of
/// `PSD ∩ subspace`, returning either the feasibility witness or a
/// violating cone element.
pub fn dual_membership(s: &LabeledOperator, subspace: Subspace) -> Result<DualMembership> {
    let herm = s.hermiticity_residual();
    if herm > 1e-12 {
        return Err(Error::NotHermitian(herm));
    }
    let target = pauli::project(s.matrix(), subspace);

    // s in C* iff some PSD X has the same subspace component as s;
    // alternate projections between that affine set and the PSD cone
    let mut x = target.clone();
    let mut feasibility = f64::INFINITY;
    for _ in 0..2000 {
        let p = psd_project_mat(&x);
        feasibility = (&p - &x).norm();
        if feasibility < 1e-8 {
            x = p;
            break;
        }
        x = &p - pauli::project(&p, subspace) + &target;
    }
    if feasibility < 1e-7 {
        let q = s.matrix() - &x;
        return Ok(DualMembership::Inside { q, residual: feasibility });
    }

    // look for a violating element by projected descent on tr(s·X)
    let mut cert = pauli::project(&CMat::identity(64, 64), subspace);
    let mut value = f64::INFINITY;
    for _ in 0..500 {
        let step = &cert - s.matrix().scale(4.0);
        let mut next = psd_project_mat(&pauli::project(&step, subspace));
        let tr = next.trace().re;
        if tr > 1e-12 {
            next = next.scale(8.0 / tr);
        }
        cert = next;
        value = crate::born::trace_product(&cert, s.matrix()).re;
        if value < -1e-9 {
            return Ok(DualMembership::Outside { certificate: cert, value });
        }
    }
    Err(Error::SolverStalled { iterations: 2500, residual: value.max(feasibility) })
}
