//! Outcome probabilities from process-matrix contraction, an independent
//! state-vector oracle for cross-validation, and restricted causal
//! tomography over the experimentally accessible operator span.

use crate::catalog::{self, Catalog, term_index};
use crate::process::ProcessMatrix;
use crate::tensor::LabeledOperator;
use crate::{C64, CMat, CVec, Error, Result};

/// `tr(A·B)` without forming the product.
pub(crate) fn trace_product(a: &CMat, b: &CMat) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// The product operator `ρᵀ ⊗ M ⊗ U ⊗ D` paired with a process matrix in
/// the Born rule.
pub fn product_operator(rho: &CMat, mr: &CMat, bob: &CMat, proj: &CMat) -> Result<CMat> {
    for (m, d, what) in [
        (rho, 2, "input state"),
        (mr, 4, "measure-reprepare CJ"),
        (bob, 4, "Bob CJ"),
        (proj, 2, "final projector"),
    ] {
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::GridMismatch(format!(
                "{what} must be {d}x{d}, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
    }
    Ok(rho.transpose().kronecker(mr).kronecker(bob).kronecker(proj))
}

/// Outcome probability `tr[(ρᵀ ⊗ M ⊗ U ⊗ D)·W]`.
pub fn contract(rho: &CMat, mr: &CMat, bob: &CMat, proj: &CMat, w: &ProcessMatrix) -> Result<f64> {
    let op = product_operator(rho, mr, bob, proj)?;
    let val = trace_product(&op, w.matrix());
    if val.im.abs() > 1e-10 {
        return Err(Error::Degenerate(format!(
            "contraction has imaginary residue {:.3e}",
            val.im
        )));
    }
    Ok(val.re)
}

/// Direct simulation of the SWITCH circuit: control prepared in `|+⟩`, the
/// two orderings applied in superposition, control read out in `|±⟩`.
/// `d = 0` is the `+` port. No CJ machinery is involved.
pub fn circuit_oracle(psi: &CVec, kraus: &CMat, u: &CMat, d: usize) -> f64 {
    let sign = if d == 0 { 1.0 } else { -1.0 };
    let v = u * kraus * psi + (kraus * u * psi).scale(sign);
    v.norm_squared() / 4.0
}

/// Probabilities over the full `(z, x, y, a, d)` grid, flat in term order.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    p: Vec<f64>,
}

impl ProbabilityTable {
    pub fn from_vec(p: Vec<f64>) -> Result<Self> {
        if p.len() != catalog::N_TERMS {
            return Err(Error::GridMismatch(format!(
                "table has {} entries, expected {}",
                p.len(),
                catalog::N_TERMS
            )));
        }
        Ok(Self { p })
    }

    pub fn entry(&self, z: usize, x: usize, y: usize, a: usize, d: usize) -> f64 {
        self.p[term_index(z, x, y, a, d)]
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }

    /// Largest deviation of any setting's four outcomes from summing to 1.
    pub fn normalization_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for z in 0..catalog::N_INPUTS {
            for x in 0..catalog::N_ALICE_SETTINGS {
                for y in 0..catalog::N_BOB_SETTINGS {
                    let sum: f64 = (0..4)
                        .map(|ad| self.entry(z, x, y, ad / 2, ad % 2))
                        .sum();
                    worst = worst.max((sum - 1.0).abs());
                }
            }
        }
        worst
    }
}

/// Evaluate the full table by contraction against `w`.
pub fn probability_table(cat: &Catalog, w: &ProcessMatrix) -> Result<ProbabilityTable> {
    let mut p = vec![0.0; catalog::N_TERMS];
    for z in 0..catalog::N_INPUTS {
        for x in 0..catalog::N_ALICE_SETTINGS {
            for y in 0..catalog::N_BOB_SETTINGS {
                for a in 0..2 {
                    for d in 0..2 {
                        let val = contract(
                            &cat.input_states[z],
                            &cat.mr_cj[x][a],
                            &cat.bob_cj[y],
                            &cat.final_projectors[d],
                            w,
                        )?;
                        p[term_index(z, x, y, a, d)] = val.clamp(-1e-12, 1.0 + 1e-12);
                    }
                }
            }
        }
    }
    ProbabilityTable::from_vec(p)
}

// ---------------------------------------------------------------------------
// Least squares over the span of implementable product operators.
//
// The Gram matrix of the 1440 product operators factorizes over the four
// tensor slots, so its pseudo-inverse is applied through four small
// eigendecompositions instead of one 1440x1440 solve.

pub struct ProductBasis {
    ops: Vec<CMat>,
    factors: [FactorEig; 4],
    /// kept eigen-directions of the Gram matrix
    pub rank: usize,
}

struct FactorEig {
    dim: usize,
    vals: Vec<f64>,
    vecs: nalgebra::DMatrix<f64>,
}

fn factor_eig(mats: &[&CMat]) -> FactorEig {
    let n = mats.len();
    let mut gram = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            gram[(i, j)] = trace_product(&mats[i].adjoint(), mats[j]).re;
        }
    }
    let eig = gram.symmetric_eigen();
    FactorEig { dim: n, vals: eig.eigenvalues.iter().copied().collect(), vecs: eig.eigenvectors }
}

const PINV_RTOL: f64 = 1e-12;

impl ProductBasis {
    pub fn new(cat: &Catalog) -> Result<Self> {
        let mut ops = Vec::with_capacity(catalog::N_TERMS);
        for z in 0..catalog::N_INPUTS {
            for x in 0..catalog::N_ALICE_SETTINGS {
                for y in 0..catalog::N_BOB_SETTINGS {
                    for a in 0..2 {
                        for d in 0..2 {
                            ops.push(product_operator(
                                &cat.input_states[z],
                                &cat.mr_cj[x][a],
                                &cat.bob_cj[y],
                                &cat.final_projectors[d],
                            )?);
                        }
                    }
                }
            }
        }
        let rho_t: Vec<CMat> = cat.input_states.iter().map(|r| r.transpose()).collect();
        let alice: Vec<&CMat> = cat.mr_cj.iter().flatten().collect();
        let factors = [
            factor_eig(&rho_t.iter().collect::<Vec<_>>()),
            factor_eig(&alice),
            factor_eig(&cat.bob_cj.iter().collect::<Vec<_>>()),
            factor_eig(&cat.final_projectors.iter().collect::<Vec<_>>()),
        ];
        let max: f64 = factors
            .iter()
            .map(|f| f.vals.iter().fold(0.0f64, |a, &b| a.max(b)))
            .product();
        let mut rank = 0;
        for iz in 0..factors[0].dim {
            for ia in 0..factors[1].dim {
                for iy in 0..factors[2].dim {
                    for id in 0..factors[3].dim {
                        let lam = factors[0].vals[iz]
                            * factors[1].vals[ia]
                            * factors[2].vals[iy]
                            * factors[3].vals[id];
                        if lam > PINV_RTOL * max {
                            rank += 1;
                        }
                    }
                }
            }
        }
        Ok(Self { ops, factors, rank })
    }

    pub fn operator(&self, t: usize) -> &CMat {
        &self.ops[t]
    }

    /// `b_t = tr(G_t · s)` for Hermitian `s` (real by Hermiticity).
    pub fn inner_products(&self, s: &CMat) -> Vec<f64> {
        self.ops.iter().map(|g| trace_product(g, s).re).collect()
    }

    /// `Σ_t c_t G_t`.
    pub fn assemble(&self, coeffs: &[f64]) -> CMat {
        let mut out = CMat::zeros(64, 64);
        for (c, g) in coeffs.iter().zip(&self.ops) {
            if *c != 0.0 {
                out += g.scale(*c);
            }
        }
        out
    }

    // grouped layout: ((z * 24 + (x*2 + a)) * 10 + y) * 2 + d
    fn to_grouped(&self, term_order: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; catalog::N_TERMS];
        for z in 0..catalog::N_INPUTS {
            for x in 0..catalog::N_ALICE_SETTINGS {
                for y in 0..catalog::N_BOB_SETTINGS {
                    for a in 0..2 {
                        for d in 0..2 {
                            out[((z * 24 + (x * 2 + a)) * 10 + y) * 2 + d] =
                                term_order[term_index(z, x, y, a, d)];
                        }
                    }
                }
            }
        }
        out
    }

    fn ungroup(&self, grouped: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; catalog::N_TERMS];
        for z in 0..catalog::N_INPUTS {
            for x in 0..catalog::N_ALICE_SETTINGS {
                for y in 0..catalog::N_BOB_SETTINGS {
                    for a in 0..2 {
                        for d in 0..2 {
                            out[term_index(z, x, y, a, d)] =
                                grouped[((z * 24 + (x * 2 + a)) * 10 + y) * 2 + d];
                        }
                    }
                }
            }
        }
        out
    }

    fn apply_axis(&self, data: &mut [f64], axis: usize, transpose: bool) {
        let dims = [3usize, 24, 10, 2];
        let n = dims[axis];
        let inner: usize = dims[axis + 1..].iter().product();
        let outer: usize = dims[..axis].iter().product();
        let m = &self.factors[axis].vecs;
        let mut buf = vec![0.0; n];
        for o in 0..outer {
            for i in 0..inner {
                for k in 0..n {
                    buf[k] = data[(o * n + k) * inner + i];
                }
                for k in 0..n {
                    let mut acc = 0.0;
                    for j in 0..n {
                        acc += if transpose { m[(j, k)] } else { m[(k, j)] } * buf[j];
                    }
                    data[(o * n + k) * inner + i] = acc;
                }
            }
        }
    }

    /// Minimum-norm solution of `Gram · c = rhs` via the factorized
    /// pseudo-inverse with relative eigenvalue threshold `1e-12`.
    pub fn min_norm_solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut data = self.to_grouped(rhs);
        for axis in 0..4 {
            self.apply_axis(&mut data, axis, true);
        }
        let f = &self.factors;
        let max: f64 = f
            .iter()
            .map(|x| x.vals.iter().fold(0.0f64, |a, &b| a.max(b)))
            .product();
        let mut idx = 0;
        for iz in 0..f[0].dim {
            for ia in 0..f[1].dim {
                for iy in 0..f[2].dim {
                    for id in 0..f[3].dim {
                        let lam =
                            f[0].vals[iz] * f[1].vals[ia] * f[2].vals[iy] * f[3].vals[id];
                        data[idx] = if lam > PINV_RTOL * max { data[idx] / lam } else { 0.0 };
                        idx += 1;
                    }
                }
            }
        }
        for axis in 0..4 {
            self.apply_axis(&mut data, axis, false);
        }
        self.ungroup(&data)
    }
}

/// Result of restricted causal tomography.
pub struct TomographyResult {
    /// Projection of the process onto the accessible operator span.
    pub reconstruction: LabeledOperator,
    /// Coefficients of the reconstruction over the product-operator grid.
    pub coefficients: Vec<f64>,
    /// `‖Gram·c − p‖`, the inconsistency of the data with the span.
    pub residual: f64,
    /// Dimension of the accessible span.
    pub rank: usize,
}

/// Least-squares reconstruction of the projection of a process matrix onto
/// the span of the implementable product operators, from its probability
/// table.
pub fn causal_tomography(cat: &Catalog, table: &ProbabilityTable) -> Result<TomographyResult> {
    let norm = table.normalization_residual();
    if norm > 1e-6 {
        return Err(Error::Degenerate(format!(
            "probability columns do not sum to 1 (residual {norm:.3e})"
        )));
    }
    let basis = ProductBasis::new(cat)?;
    let coefficients = basis.min_norm_solve(table.values());
    let reconstruction = basis.assemble(&coefficients);
    // residual of the normal equations, evaluated against the data
    let achieved = basis.inner_products(&reconstruction);
    let residual = achieved
        .iter()
        .zip(table.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(TomographyResult {
        reconstruction: LabeledOperator::qubits(&crate::process::CANONICAL_LABELS, reconstruction)?,
        coefficients,
        residual,
        rank: basis.rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{alice_kraus, bob_unitaries, Catalog};
    use crate::process::{dephase_control, fixed_order_switch, switch_matrix, CausalOrder};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn oracle_trivial_cases() {
        let psi = CVec::from_vec(vec![c(1., 0.), c(0., 0.)]);
        let eye = CMat::identity(2, 2);
        assert!((circuit_oracle(&psi, &eye, &eye, 0) - 1.0).abs() < 1e-14);
        assert!(circuit_oracle(&psi, &eye, &eye, 1).abs() < 1e-14);

        // anticommuting unitaries land entirely in the minus port
        let x = CMat::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let z = CMat::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);
        for psi in [
            CVec::from_vec(vec![c(1., 0.), c(0., 0.)]),
            CVec::from_vec(vec![c(0.6, 0.), c(0., 0.8)]),
        ] {
            assert!(circuit_oracle(&psi, &x, &z, 0).abs() < 1e-14);
            assert!((circuit_oracle(&psi, &x, &z, 1) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn contract_quarter_split() {
        // computational-basis measure with same-state repreparation against
        // Bob's bit flip on input |0>: all four outcomes at 1/4
        let cat = Catalog::build().unwrap();
        let w = switch_matrix();
        for a in 0..2 {
            for d in 0..2 {
                let p = contract(
                    &cat.input_states[0],
                    &cat.mr_cj[0][a],
                    &cat.bob_cj[1],
                    &cat.final_projectors[d],
                    &w,
                )
                .unwrap();
                assert!((p - 0.25).abs() < 1e-10, "a={a} d={d} p={p}");
                let q = circuit_oracle(&cat.inputs[0], &alice_kraus(a, 0), &bob_unitaries()[1], d);
                assert!((p - q).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_bob_collapses_to_plus_port() {
        let cat = Catalog::build().unwrap();
        let w = switch_matrix();
        for z in 0..3 {
            for x in 0..12 {
                let mut plus = 0.0;
                let mut minus = 0.0;
                for a in 0..2 {
                    plus += contract(
                        &cat.input_states[z],
                        &cat.mr_cj[x][a],
                        &cat.bob_cj[0],
                        &cat.final_projectors[0],
                        &w,
                    )
                    .unwrap();
                    minus += contract(
                        &cat.input_states[z],
                        &cat.mr_cj[x][a],
                        &cat.bob_cj[0],
                        &cat.final_projectors[1],
                        &w,
                    )
                    .unwrap();
                }
                assert!((plus - 1.0).abs() < 1e-10);
                assert!(minus.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn table_normalization_and_oracle_agreement() {
        let cat = Catalog::build().unwrap();
        let w = switch_matrix();
        let table = probability_table(&cat, &w).unwrap();
        assert!(table.normalization_residual() < 1e-9);

        let mut worst = 0.0f64;
        for z in 0..3 {
            for x in 0..12 {
                for y in 0..10 {
                    for a in 0..2 {
                        for d in 0..2 {
                            let q = circuit_oracle(
                                &cat.inputs[z],
                                &alice_kraus(a, x),
                                &bob_unitaries()[y],
                                d,
                            );
                            worst = worst.max((table.entry(z, x, y, a, d) - q).abs());
                        }
                    }
                }
            }
        }
        assert!(worst < 1e-10, "worst oracle gap {worst}");
    }

    #[test]
    fn dephased_table_is_average_of_fixed_orders() {
        let cat = Catalog::build().unwrap();
        let w0 = dephase_control(&switch_matrix(), 0.0).unwrap();
        let t0 = probability_table(&cat, &w0).unwrap();
        let tab = probability_table(&cat, &fixed_order_switch(CausalOrder::AThenB)).unwrap();
        let tba = probability_table(&cat, &fixed_order_switch(CausalOrder::BThenA)).unwrap();
        for (i, v) in t0.values().iter().enumerate() {
            let avg = 0.5 * (tab.values()[i] + tba.values()[i]);
            assert!((v - avg).abs() < 1e-10);
        }
    }

    #[test]
    fn swap_symmetry_of_the_switch() {
        // A <-> B swap combined with a control bit flip fixes the SWITCH
        let w = switch_matrix();
        let swapped = w
            .operator()
            .permute(&["in", "B_in", "B_out", "A_in", "A_out", "C"])
            .unwrap();
        let mut m = CMat::zeros(64, 64);
        for r in 0..64 {
            for col in 0..64 {
                m[(r ^ 1, col ^ 1)] = swapped.matrix()[(r, col)];
            }
        }
        assert!((&m - w.matrix()).norm() < 1e-12);
    }

    #[test]
    fn tomography_projection_consistency() {
        let cat = Catalog::build().unwrap();
        let w = switch_matrix();
        let table = probability_table(&cat, &w).unwrap();
        let rec = causal_tomography(&cat, &table).unwrap();
        assert_eq!(rec.rank, 960);
        assert!(rec.residual < 1e-8, "residual {}", rec.residual);
        assert!(rec.reconstruction.hermiticity_residual() < 1e-10);
        // the reconstruction reproduces every accessible expectation value
        let basis = ProductBasis::new(&cat).unwrap();
        let back = basis.inner_products(rec.reconstruction.matrix());
        for (a, b) in back.iter().zip(table.values()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn tomography_rejects_inconsistent_data() {
        let cat = Catalog::build().unwrap();
        let bad = ProbabilityTable::from_vec(vec![0.5; catalog::N_TERMS]).unwrap();
        assert!(causal_tomography(&cat, &bad).is_err());
    }

    #[test]
    fn tomography_noise_stability() {
        // white measurement noise of 1e-3 moves accessible expectations by
        // at most a few 1e-3
        let cat = Catalog::build().unwrap();
        let w = switch_matrix();
        let table = probability_table(&cat, &w).unwrap();
        let mut noisy: Vec<f64> = table.values().to_vec();
        // deterministic +-eps pattern that keeps each column summing to 1
        for chunk in noisy.chunks_mut(4) {
            chunk[0] += 1e-3;
            chunk[1] -= 1e-3;
            chunk[2] += 1e-3;
            chunk[3] -= 1e-3;
        }
        let rec0 = causal_tomography(&cat, &table).unwrap();
        let rec1 =
            causal_tomography(&cat, &ProbabilityTable::from_vec(noisy).unwrap()).unwrap();
        let shift = (rec1.reconstruction.matrix() - rec0.reconstruction.matrix()).norm();
        assert!(shift < 0.5, "reconstruction moved by {shift}");
    }
}
