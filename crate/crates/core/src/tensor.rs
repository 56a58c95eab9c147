//! Dense complex linear algebra over labeled tensor-product spaces.
//!
//! A [`LabeledOperator`] is a square matrix together with an ordered list of
//! named subsystems. The ordering convention is row-major Kronecker: the
//! leftmost label is the most significant index. All cross-module exchange
//! of process matrices uses the canonical order
//! `(in, A_in, A_out, B_in, B_out, C)`.

use crate::{C64, CMat, Error, Result};

/// A named tensor factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemLabel {
    pub name: String,
    pub dim: usize,
}

impl SubsystemLabel {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        Self { name: name.into(), dim }
    }

    pub fn qubit(name: impl Into<String>) -> Self {
        Self::new(name, 2)
    }
}

/// A complex square matrix over an ordered list of labeled subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledOperator {
    space: Vec<SubsystemLabel>,
    mat: CMat,
}

fn index_parts(mut i: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = i % dims[k];
        i /= dims[k];
    }
    out
}

fn index_compose(parts: &[usize], dims: &[usize]) -> usize {
    parts.iter().zip(dims).fold(0, |acc, (p, d)| acc * d + p)
}

impl LabeledOperator {
    pub fn new(space: Vec<SubsystemLabel>, mat: CMat) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for l in &space {
            if l.dim == 0 {
                return Err(Error::Degenerate(format!("label `{}` has dim 0", l.name)));
            }
            if !seen.insert(l.name.clone()) {
                return Err(Error::DuplicateLabel(l.name.clone()));
            }
        }
        let d: usize = space.iter().map(|l| l.dim).product();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::Degenerate(format!(
                "matrix is {}x{} but labels give dimension {}",
                mat.nrows(),
                mat.ncols(),
                d
            )));
        }
        Ok(Self { space, mat })
    }

    /// Operator over a list of qubit labels.
    pub fn qubits(names: &[&str], mat: CMat) -> Result<Self> {
        Self::new(names.iter().map(|n| SubsystemLabel::qubit(*n)).collect(), mat)
    }

    pub fn identity(space: Vec<SubsystemLabel>) -> Result<Self> {
        let d: usize = space.iter().map(|l| l.dim).product();
        Self::new(space, CMat::identity(d, d))
    }

    pub fn space(&self) -> &[SubsystemLabel] {
        &self.space
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn matrix_mut(&mut self) -> &mut CMat {
        &mut self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    fn dims(&self) -> Vec<usize> {
        self.space.iter().map(|l| l.dim).collect()
    }

    fn position(&self, name: &str) -> Result<usize> {
        self.space
            .iter()
            .position(|l| l.name == name)
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }

    /// Kronecker product with concatenated label lists.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        for l in &other.space {
            if self.space.iter().any(|m| m.name == l.name) {
                return Err(Error::DuplicateLabel(l.name.clone()));
            }
        }
        let mut space = self.space.clone();
        space.extend(other.space.iter().cloned());
        Ok(Self { space, mat: self.mat.kronecker(&other.mat) })
    }

    /// Trace out the named subsystems.
    pub fn partial_trace(&self, over: &[&str]) -> Result<Self> {
        let traced: Vec<usize> = over
            .iter()
            .map(|n| self.position(n))
            .collect::<Result<_>>()?;
        let dims = self.dims();
        let kept: Vec<usize> = (0..dims.len()).filter(|k| !traced.contains(k)).collect();
        let kept_dims: Vec<usize> = kept.iter().map(|&k| dims[k]).collect();
        let tr_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
        let d_keep: usize = kept_dims.iter().product();
        let d_tr: usize = tr_dims.iter().product();

        let mut out = CMat::zeros(d_keep.max(1), d_keep.max(1));
        let mut full = vec![0usize; dims.len()];
        for rk in 0..d_keep {
            let rp = index_parts(rk, &kept_dims);
            for ck in 0..d_keep {
                let cp = index_parts(ck, &kept_dims);
                let mut acc = C64::new(0.0, 0.0);
                for t in 0..d_tr {
                    let tp = index_parts(t, &tr_dims);
                    for (i, &k) in kept.iter().enumerate() {
                        full[k] = rp[i];
                    }
                    for (i, &k) in traced.iter().enumerate() {
                        full[k] = tp[i];
                    }
                    let r = index_compose(&full, &dims);
                    for (i, &k) in kept.iter().enumerate() {
                        full[k] = cp[i];
                    }
                    let c = index_compose(&full, &dims);
                    acc += self.mat[(r, c)];
                }
                out[(rk, ck)] = acc;
            }
        }
        let space = kept.iter().map(|&k| self.space[k].clone()).collect();
        Self::new(space, out)
    }

    /// Replace the named subsystems with the normalized identity:
    /// `(1_X / d_X) ⊗ tr_X(w)`, reinserted at X's original positions.
    /// Linear, idempotent and trace-preserving.
    pub fn trace_and_replace(&self, over: &[&str]) -> Result<Self> {
        let traced: Vec<usize> = over
            .iter()
            .map(|n| self.position(n))
            .collect::<Result<_>>()?;
        let dims = self.dims();
        let kept: Vec<usize> = (0..dims.len()).filter(|k| !traced.contains(k)).collect();
        let kept_dims: Vec<usize> = kept.iter().map(|&k| dims[k]).collect();
        let d_x: usize = traced.iter().map(|&k| dims[k]).product();
        let pt = self.partial_trace(over)?;
        let scale = C64::new(1.0 / d_x as f64, 0.0);

        let d = self.dim();
        let mut out = CMat::zeros(d, d);
        for r in 0..d {
            let rp = index_parts(r, &dims);
            for c in 0..d {
                let cp = index_parts(c, &dims);
                if traced.iter().any(|&k| rp[k] != cp[k]) {
                    continue;
                }
                let rk: Vec<usize> = kept.iter().map(|&k| rp[k]).collect();
                let ck: Vec<usize> = kept.iter().map(|&k| cp[k]).collect();
                out[(r, c)] = scale
                    * pt.mat[(index_compose(&rk, &kept_dims), index_compose(&ck, &kept_dims))];
            }
        }
        Self::new(self.space.clone(), out)
    }

    /// Reorder the subsystems to the given label order.
    pub fn permute(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.space.len() {
            return Err(Error::GridMismatch(format!(
                "permutation names {} labels, operator has {}",
                order.len(),
                self.space.len()
            )));
        }
        let perm: Vec<usize> = order
            .iter()
            .map(|n| self.position(n))
            .collect::<Result<_>>()?;
        {
            let mut seen = std::collections::HashSet::new();
            for &p in &perm {
                if !seen.insert(p) {
                    return Err(Error::DuplicateLabel(order[p].to_string()));
                }
            }
        }
        let dims = self.dims();
        let new_dims: Vec<usize> = perm.iter().map(|&k| dims[k]).collect();
        let d = self.dim();
        let mut out = CMat::zeros(d, d);
        for r in 0..d {
            let rp = index_parts(r, &dims);
            let rn: Vec<usize> = perm.iter().map(|&k| rp[k]).collect();
            let rr = index_compose(&rn, &new_dims);
            for c in 0..d {
                let cp = index_parts(c, &dims);
                let cn: Vec<usize> = perm.iter().map(|&k| cp[k]).collect();
                out[(rr, index_compose(&cn, &new_dims))] = self.mat[(r, c)];
            }
        }
        let space = perm.iter().map(|&k| self.space[k].clone()).collect();
        Self::new(space, out)
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.mat.norm();
        if n == 0.0 {
            return 0.0;
        }
        (&self.mat - self.mat.adjoint()).norm() / n
    }

    fn require_hermitian(&self) -> Result<()> {
        let res = self.hermiticity_residual();
        if res > 1e-12 {
            return Err(Error::NotHermitian(res));
        }
        Ok(())
    }

    /// Eigendecomposition of a Hermitian operator. Eigenvalues ascending;
    /// the matrix is symmetrized before decomposition.
    pub fn eig_hermitian(&self) -> Result<(Vec<f64>, CMat)> {
        self.require_hermitian()?;
        Ok(eigh(&self.mat))
    }

    /// Nearest PSD operator in Frobenius norm (eigenvalue clipping).
    pub fn psd_project(&self) -> Result<Self> {
        self.require_hermitian()?;
        Ok(Self { space: self.space.clone(), mat: psd_project_mat(&self.mat) })
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eig_hermitian()?.0[0])
    }
}

/// Sorted Hermitian eigendecomposition of a raw matrix (symmetrized first).
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let h = (m + m.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (j, &i) in order.iter().enumerate() {
        vecs.set_column(j, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Clip negative eigenvalues of a (nearly) Hermitian matrix.
pub fn psd_project_mat(m: &CMat) -> CMat {
    let (vals, vecs) = eigh(m);
    let n = vals.len();
    let mut scaled = vecs.clone();
    for j in 0..n {
        let w = vals[j].max(0.0);
        for i in 0..n {
            scaled[(i, j)] *= C64::new(w, 0.0);
        }
    }
    scaled * vecs.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rand_hermitian(n: usize, seed: u64) -> CMat {
        // small deterministic LCG, test-only
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let a = CMat::from_fn(n, n, |_, _| c(next(), next()));
        (&a + a.adjoint()).scale(0.5)
    }

    #[test]
    fn tensor_identity_and_trace() {
        let i2 = LabeledOperator::qubits(&["a"], CMat::identity(2, 2)).unwrap();
        let j2 = LabeledOperator::qubits(&["b"], CMat::identity(2, 2)).unwrap();
        let t = i2.tensor(&j2).unwrap();
        assert_eq!(t.matrix(), &CMat::identity(4, 4));

        let a = LabeledOperator::qubits(&["a"], rand_hermitian(2, 1)).unwrap();
        let b = LabeledOperator::qubits(&["b"], rand_hermitian(2, 2)).unwrap();
        let prod = a.tensor(&b).unwrap();
        let lhs = prod.trace();
        let rhs = a.trace() * b.trace();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn tensor_basis_bookkeeping() {
        // |0><0| x |1><1| has its single 1 at index |01>
        let p0 = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]));
        let p1 = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]));
        let a = LabeledOperator::qubits(&["a"], p0).unwrap();
        let b = LabeledOperator::qubits(&["b"], p1).unwrap();
        let t = a.tensor(&b).unwrap();
        for i in 0..4 {
            let want = if i == 1 { 1.0 } else { 0.0 };
            assert_eq!(t.matrix()[(i, i)].re, want);
        }
    }

    #[test]
    fn tensor_rejects_duplicate_label() {
        let a = LabeledOperator::qubits(&["a"], CMat::identity(2, 2)).unwrap();
        assert!(matches!(a.tensor(&a), Err(Error::DuplicateLabel(_))));
    }

    #[test]
    fn partial_trace_product_factorization() {
        let a = LabeledOperator::qubits(&["a"], rand_hermitian(2, 3)).unwrap();
        let b = LabeledOperator::qubits(&["b"], rand_hermitian(2, 4)).unwrap();
        let t = a.tensor(&b).unwrap();
        let red = t.partial_trace(&["b"]).unwrap();
        let want = a.matrix() * b.trace();
        assert!((red.matrix() - want).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_everything_gives_trace() {
        let a = LabeledOperator::qubits(&["a", "b"], rand_hermitian(4, 5)).unwrap();
        let all = a.partial_trace(&["a", "b"]).unwrap();
        assert_eq!(all.dim(), 1);
        assert!((all.matrix()[(0, 0)] - a.trace()).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_bell_marginal() {
        // |1>><<1|/2 over either side -> I/2
        let mut bell = CMat::zeros(4, 4);
        for (r, s) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            bell[(r, s)] = c(0.5, 0.0);
        }
        let op = LabeledOperator::qubits(&["x", "y"], bell).unwrap();
        for side in ["x", "y"] {
            let red = op.partial_trace(&[side]).unwrap();
            assert!((red.matrix() - CMat::identity(2, 2).scale(0.5)).norm() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_unknown_label() {
        let a = LabeledOperator::qubits(&["a"], CMat::identity(2, 2)).unwrap();
        assert!(matches!(a.partial_trace(&["zz"]), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn trace_and_replace_identity_fixed_point() {
        let a = LabeledOperator::qubits(&["a", "b"], CMat::identity(4, 4)).unwrap();
        for l in ["a", "b"] {
            let r = a.trace_and_replace(&[l]).unwrap();
            assert!((r.matrix() - a.matrix()).norm() < 1e-12);
        }
    }

    #[test]
    fn trace_and_replace_idempotent_and_trace_preserving() {
        let a = LabeledOperator::qubits(&["a", "b", "c"], rand_hermitian(8, 6)).unwrap();
        let once = a.trace_and_replace(&["b"]).unwrap();
        let twice = once.trace_and_replace(&["b"]).unwrap();
        assert!((once.matrix() - twice.matrix()).norm() < 1e-12);
        assert!((once.trace() - a.trace()).norm() < 1e-12);
    }

    #[test]
    fn trace_and_replace_bell() {
        let mut bell = CMat::zeros(4, 4);
        for (r, s) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            bell[(r, s)] = c(1.0, 0.0);
        }
        let op = LabeledOperator::qubits(&["x", "y"], bell).unwrap();
        let r = op.trace_and_replace(&["x"]).unwrap();
        // tr_x |1>><<1| = I(2), so the result is I(2)/2 (x) I(2), trace 2
        assert!((r.matrix() - CMat::identity(4, 4).scale(0.5)).norm() < 1e-12);
        assert!((r.trace() - op.trace()).norm() < 1e-12);
    }

    #[test]
    fn permute_involution() {
        let a = LabeledOperator::qubits(&["a", "b", "c"], rand_hermitian(8, 7)).unwrap();
        let p = a.permute(&["c", "a", "b"]).unwrap();
        let back = p.permute(&["a", "b", "c"]).unwrap();
        assert!((back.matrix() - a.matrix()).norm() < 1e-14);
    }

    #[test]
    fn eig_pauli_z() {
        let z = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        let op = LabeledOperator::qubits(&["a"], z).unwrap();
        let (vals, _) = op.eig_hermitian().unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_identity_64() {
        let op = LabeledOperator::new(
            vec![SubsystemLabel::new("big", 64)],
            CMat::identity(64, 64),
        )
        .unwrap();
        let (vals, _) = op.eig_hermitian().unwrap();
        assert!(vals.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn eig_matches_two_by_two_closed_form() {
        for seed in 0..20 {
            let h = rand_hermitian(2, 100 + seed);
            let a = h[(0, 0)].re;
            let d = h[(1, 1)].re;
            let b = h[(0, 1)];
            let mid = (a + d) / 2.0;
            let rad = (((a - d) / 2.0).powi(2) + b.norm_sqr()).sqrt();
            let (vals, vecs) = eigh(&h);
            assert!((vals[0] - (mid - rad)).abs() < 1e-12);
            assert!((vals[1] - (mid + rad)).abs() < 1e-12);
            let lam = CMat::from_diagonal(&nalgebra::DVector::from_vec(
                vals.iter().map(|&v| c(v, 0.0)).collect(),
            ));
            assert!((&vecs * lam * vecs.adjoint() - &h).norm() < 1e-10);
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let mut m = CMat::identity(2, 2);
        m[(0, 1)] = c(1.0, 0.0);
        let op = LabeledOperator::qubits(&["a"], m).unwrap();
        assert!(matches!(op.eig_hermitian(), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn psd_project_examples() {
        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        let p = psd_project_mat(&d);
        assert!((p[(0, 0)].re - 1.0).abs() < 1e-14 && p[(1, 1)].norm() < 1e-14);

        // PSD fixed point
        let h = rand_hermitian(4, 9);
        let pos = psd_project_mat(&h);
        let again = psd_project_mat(&pos);
        assert!((&again - &pos).norm() < 1e-10);
    }

    #[test]
    fn psd_project_variational_inequality() {
        // <H - P, Q - P> <= 0 for PSD Q
        let h = rand_hermitian(4, 11);
        let p = psd_project_mat(&h);
        for seed in 0..20 {
            let q = psd_project_mat(&rand_hermitian(4, 200 + seed));
            let diff1 = &h - &p;
            let diff2 = &q - &p;
            let inner = (diff1.adjoint() * diff2).trace().re;
            assert!(inner <= 1e-10, "inner = {inner}");
        }
    }
}
