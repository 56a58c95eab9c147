//! Product-Pauli coefficient transform on six qubits, and the subspace masks
//! used by the process cones and the witness solver.
//!
//! A 64×64 operator `W` is expanded as `W = Σ_t c_t P_t` with
//! `c_t = tr(P_t W)/64`, where `t` runs over the 4096 products of
//! `{I, X, Y, Z}` on the six subsystems `(in, A_in, A_out, B_in, B_out, C)`.
//! The subspaces relevant here are all diagonal in this basis, so they are
//! represented as boolean masks over `t`.

use crate::{C64, CMat};
use std::sync::OnceLock;

pub const N_QUBITS: usize = 6;
pub const N_TERMS: usize = 4096;

/// Subsystem positions within a Pauli index.
pub const POS_IN: usize = 0;
pub const POS_A_IN: usize = 1;
pub const POS_A_OUT: usize = 2;
pub const POS_B_IN: usize = 3;
pub const POS_B_OUT: usize = 4;
pub const POS_CONTROL: usize = 5;

/// Base-4 digit of term `t` at subsystem `k` (0 = identity, 1..3 = X,Y,Z).
#[inline]
pub fn digit(t: usize, k: usize) -> usize {
    (t >> (2 * (N_QUBITS - 1 - k))) & 3
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

// coeff_s = tr(sigma_s A) / 2 acting on the flattened 2x2 block (a00,a01,a10,a11)
fn fwd_rows() -> [[C64; 4]; 4] {
    [
        [c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)],
        [c(0.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(0.0, 0.5), c(0.0, -0.5), c(0.0, 0.0)],
        [c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)],
    ]
}

// A = sum_s coeff_s sigma_s; rows indexed by flattened entry, columns by s
fn inv_rows() -> [[C64; 4]; 4] {
    [
        [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        [c(0.0, 0.0), c(1.0, 0.0), c(0.0, -1.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)],
        [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
    ]
}

fn apply_axis(t: &mut [C64; N_TERMS], k: usize, m: &[[C64; 4]; 4]) {
    let stride = 1usize << (2 * (N_QUBITS - 1 - k));
    let mut i = 0;
    while i < N_TERMS {
        if (i / stride).is_multiple_of(4) {
            let idx = [i, i + stride, i + 2 * stride, i + 3 * stride];
            let v = [t[idx[0]], t[idx[1]], t[idx[2]], t[idx[3]]];
            for r in 0..4 {
                t[idx[r]] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
            }
        }
        i += 1;
    }
}

// matrix entry (r, c) <-> interleaved index with per-qubit digit 2*r_k + c_k
#[inline]
fn interleaved_index(r: usize, c: usize) -> usize {
    let mut idx = 0;
    for k in 0..N_QUBITS {
        let rk = (r >> (N_QUBITS - 1 - k)) & 1;
        let ck = (c >> (N_QUBITS - 1 - k)) & 1;
        idx = idx * 4 + (2 * rk + ck);
    }
    idx
}

/// Pauli coefficients `c_t = tr(P_t W)/64` of a 64×64 operator.
pub fn to_pauli(m: &CMat) -> Box<[C64; N_TERMS]> {
    assert_eq!(m.nrows(), 64);
    let mut t = Box::new([C64::new(0.0, 0.0); N_TERMS]);
    for r in 0..64 {
        for col in 0..64 {
            t[interleaved_index(r, col)] = m[(r, col)];
        }
    }
    let f = fwd_rows();
    for k in 0..N_QUBITS {
        apply_axis(&mut t, k, &f);
    }
    t
}

/// Reassemble `W = Σ_t c_t P_t` from Pauli coefficients.
pub fn from_pauli(coeffs: &[C64; N_TERMS]) -> CMat {
    let mut t = Box::new(*coeffs);
    let g = inv_rows();
    for k in 0..N_QUBITS {
        apply_axis(&mut t, k, &g);
    }
    let mut m = CMat::zeros(64, 64);
    for r in 0..64 {
        for col in 0..64 {
            m[(r, col)] = t[interleaved_index(r, col)];
        }
    }
    m
}

/// The subspaces that are diagonal in the product-Pauli basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subspace {
    /// Processes compatible with Alice acting before Bob (comb span).
    OrderAB,
    /// Processes compatible with Bob acting before Alice.
    OrderBA,
    /// Valid processes: the span of the two order subspaces.
    Valid,
    /// Witness operators reachable with the experiment's instrument sets.
    Restricted,
}

/// Terms allowed in a process compatible with A before B.
pub fn allowed_order_ab(t: usize) -> bool {
    let (i, ai, ao, bi, bo, ctl) = (
        digit(t, POS_IN),
        digit(t, POS_A_IN),
        digit(t, POS_A_OUT),
        digit(t, POS_B_IN),
        digit(t, POS_B_OUT),
        digit(t, POS_CONTROL),
    );
    if i != 0 && (ai, ao, bi, bo, ctl) == (0, 0, 0, 0, 0) {
        return false;
    }
    if ao != 0 && (bi, bo, ctl) == (0, 0, 0) {
        return false;
    }
    if bo != 0 && ctl == 0 {
        return false;
    }
    true
}

/// Terms allowed in a process compatible with B before A.
pub fn allowed_order_ba(t: usize) -> bool {
    let (i, ai, ao, bi, bo, ctl) = (
        digit(t, POS_IN),
        digit(t, POS_A_IN),
        digit(t, POS_A_OUT),
        digit(t, POS_B_IN),
        digit(t, POS_B_OUT),
        digit(t, POS_CONTROL),
    );
    if i != 0 && (ai, ao, bi, bo, ctl) == (0, 0, 0, 0, 0) {
        return false;
    }
    if bo != 0 && (ai, ao, ctl) == (0, 0, 0) {
        return false;
    }
    if ao != 0 && ctl == 0 {
        return false;
    }
    true
}

pub fn allowed_valid(t: usize) -> bool {
    allowed_order_ab(t) || allowed_order_ba(t)
}

/// Terms spanned by the product operators `ρ_z ⊗ M_{a,x} ⊗ U_y ⊗ D_d`:
/// no Y on the input factor, only I or X on the control, Bob's pair either
/// identity on both slots or traceless on both.
pub fn allowed_restricted(t: usize) -> bool {
    if digit(t, POS_IN) == 2 {
        return false;
    }
    if digit(t, POS_CONTROL) > 1 {
        return false;
    }
    let (bi, bo) = (digit(t, POS_B_IN), digit(t, POS_B_OUT));
    (bi == 0) == (bo == 0)
}

pub fn mask(which: Subspace) -> &'static [bool; N_TERMS] {
    static AB: OnceLock<Box<[bool; N_TERMS]>> = OnceLock::new();
    static BA: OnceLock<Box<[bool; N_TERMS]>> = OnceLock::new();
    static VALID: OnceLock<Box<[bool; N_TERMS]>> = OnceLock::new();
    static RESTR: OnceLock<Box<[bool; N_TERMS]>> = OnceLock::new();
    fn build(f: fn(usize) -> bool) -> Box<[bool; N_TERMS]> {
        let mut m = Box::new([false; N_TERMS]);
        for t in 0..N_TERMS {
            m[t] = f(t);
        }
        m
    }
    match which {
        Subspace::OrderAB => AB.get_or_init(|| build(allowed_order_ab)),
        Subspace::OrderBA => BA.get_or_init(|| build(allowed_order_ba)),
        Subspace::Valid => VALID.get_or_init(|| build(allowed_valid)),
        Subspace::Restricted => RESTR.get_or_init(|| build(allowed_restricted)),
    }
}

/// Orthogonal projection of an operator onto a masked Pauli subspace.
pub fn project(m: &CMat, which: Subspace) -> CMat {
    let mut coeffs = to_pauli(m);
    let msk = mask(which);
    for t in 0..N_TERMS {
        if !msk[t] {
            coeffs[t] = C64::new(0.0, 0.0);
        }
    }
    from_pauli(&coeffs)
}

/// Frobenius norm of the component outside a masked subspace.
pub fn residual_outside(m: &CMat, which: Subspace) -> f64 {
    let coeffs = to_pauli(m);
    let msk = mask(which);
    let mut acc = 0.0;
    for t in 0..N_TERMS {
        if !msk[t] {
            acc += coeffs[t].norm_sqr();
        }
    }
    // coefficients are in the normalized basis P_t/8, |W|_F^2 = 64 sum |c_t|^2
    (64.0 * acc).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rand_mat(seed: u64) -> CMat {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        CMat::from_fn(64, 64, |_, _| C64::new(next(), next()))
    }

    fn pauli_matrix(t: usize) -> CMat {
        let p: [CMat; 4] = [
            CMat::identity(2, 2),
            CMat::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
            CMat::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
            CMat::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
        ];
        let mut m = CMat::identity(1, 1);
        for k in 0..N_QUBITS {
            m = m.kronecker(&p[digit(t, k)]);
        }
        m
    }

    #[test]
    fn round_trip() {
        let m = rand_mat(1);
        let back = from_pauli(&to_pauli(&m));
        assert!((&back - &m).norm() < 1e-12);
    }

    #[test]
    fn basis_elements_are_diagonal_in_coefficients() {
        for &t in &[0usize, 1, 2, 3, 4, 77, 1023, 4095, 2048] {
            let coeffs = to_pauli(&pauli_matrix(t));
            for u in 0..N_TERMS {
                let want = if u == t { 1.0 } else { 0.0 };
                assert!(
                    (coeffs[u] - C64::new(want, 0.0)).norm() < 1e-12,
                    "t={t} u={u} got {}",
                    coeffs[u]
                );
            }
        }
    }

    #[test]
    fn hermitian_gives_real_coefficients() {
        let m = rand_mat(2);
        let h = (&m + m.adjoint()).scale(0.5);
        let coeffs = to_pauli(&h);
        let imag: f64 = coeffs.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        assert!(imag < 1e-12);
    }

    #[test]
    fn trace_is_identity_coefficient() {
        let m = rand_mat(3);
        let coeffs = to_pauli(&m);
        assert!((coeffs[0] * C64::new(64.0, 0.0) - m.trace()).norm() < 1e-10);
    }

    #[test]
    fn projection_is_idempotent() {
        let m = rand_mat(4);
        let h = (&m + m.adjoint()).scale(0.5);
        let p = project(&h, Subspace::Valid);
        let pp = project(&p, Subspace::Valid);
        assert!((&pp - &p).norm() < 1e-11);
        assert!(residual_outside(&p, Subspace::Valid) < 1e-11);
    }

    #[test]
    fn restricted_mask_size() {
        let n = (0..N_TERMS).filter(|&t| allowed_restricted(t)).count();
        // 3 (input: I,X,Z) * 16 (Alice unrestricted) * (1 + 9) (Bob) * 2 (control I,X)
        assert_eq!(n, 960);
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }
}
