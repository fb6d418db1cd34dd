//! Clock-and-shift matrices, the sine-algebra basis `T_alpha` of `gl(N)` and
//! the permutation operator on `C^N (x) C^N`.
//!
//! Mode labels are stored canonically in `[0, N)^2`. The basis matrices are
//! not periodic in the labels for all `N`:
//! `T_(b + N e) = (-1)^(e1 b2 + e2 b1 + N e1 e2) T_b`, so products are written
//! against canonical labels through [`product_coeff`], which folds that sign
//! into `kappa`. Inverses are taken as adjoints (`T_alpha` is unitary), which
//! equals `T` at the unreduced label `-alpha`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::CMatrix;

const I: C64 = C64::new(0.0, 1.0);

/// Index `alpha = (alpha_1, alpha_2)` in `Z_N x Z_N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex {
    a1: usize,
    a2: usize,
    n: usize,
}

impl ModeIndex {
    /// Canonical label for arbitrary integers `(a1, a2)` modulo `n`.
    pub fn new(a1: i64, a2: i64, n: usize) -> Self {
        assert!(n >= 1, "mode index modulus must be positive");
        let m = n as i64;
        Self {
            a1: a1.rem_euclid(m) as usize,
            a2: a2.rem_euclid(m) as usize,
            n,
        }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(0, 0, n)
    }

    pub fn a1(self) -> usize {
        self.a1
    }

    pub fn a2(self) -> usize {
        self.a2
    }

    pub fn n(self) -> usize {
        self.n
    }

    pub fn is_zero(self) -> bool {
        self.a1 == 0 && self.a2 == 0
    }

    /// Position in the row-major `N x N` table of labels.
    pub fn flat(self) -> usize {
        self.a1 * self.n + self.a2
    }

    pub fn from_flat(k: usize, n: usize) -> Self {
        Self {
            a1: k / n,
            a2: k % n,
            n,
        }
    }

    pub fn neg(self) -> Self {
        Self::new(-(self.a1 as i64), -(self.a2 as i64), self.n)
    }

    pub fn add(self, other: Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        Self::new(
            (self.a1 + other.a1) as i64,
            (self.a2 + other.a2) as i64,
            self.n,
        )
    }

    /// All `N^2` labels in row-major order; `(0, 0)` comes first.
    pub fn all(n: usize) -> impl Iterator<Item = ModeIndex> {
        (0..n * n).map(move |k| Self::from_flat(k, n))
    }

    /// All labels except the scalar one.
    pub fn nonzero(n: usize) -> impl Iterator<Item = ModeIndex> {
        Self::all(n).skip(1)
    }
}

impl std::fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.a1, self.a2)
    }
}

/// Components `S_alpha` of an `N x N` matrix in the `T_alpha` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentMap {
    n: usize,
    entries: Vec<C64>,
}

impl ComponentMap {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(ModeIndex) -> C64) -> Self {
        Self {
            n,
            entries: ModeIndex::all(n).map(&mut f).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, alpha: ModeIndex) -> C64 {
        self.entries[alpha.flat()]
    }

    pub fn set(&mut self, alpha: ModeIndex, value: C64) {
        self.entries[alpha.flat()] = value;
    }

    pub fn iter(&self) -> impl Iterator<Item = (ModeIndex, C64)> + '_ {
        let n = self.n;
        self.entries
            .iter()
            .enumerate()
            .map(move |(k, &v)| (ModeIndex::from_flat(k, n), v))
    }

    /// Component-wise product with a coefficient table.
    pub fn hadamard(&self, coeffs: &ComponentMap) -> ComponentMap {
        assert_eq!(self.n, coeffs.n);
        ComponentMap {
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&coeffs.entries)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    pub fn max_norm(&self) -> f64 {
        self.entries.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

fn root_of_unity(k: i64, n: usize) -> C64 {
    let r = k.rem_euclid(n as i64) as f64;
    (2.0 * I * PI * r / n as f64).exp()
}

/// Phase `exp(pi i a1 a2 / N)` of the basis element at raw labels.
fn basis_phase(a1: i64, a2: i64, n: usize) -> C64 {
    let m = (a1 * a2).rem_euclid(2 * n as i64) as f64;
    (I * PI * m / n as f64).exp()
}

/// Clock matrix `Q = diag(exp(2 pi i k / N))`, `k = 1..N`, and shift matrix
/// `Lambda` with `Lambda_kl = 1` iff `k - l + 1 = 0 mod N`.
pub fn clock_shift(n: usize) -> (CMatrix, CMatrix) {
    let q = CMatrix::from_fn(n, n, |k, l| {
        if k == l {
            root_of_unity(k as i64 + 1, n)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let lambda = CMatrix::from_fn(n, n, |k, l| {
        if (k + 1) % n == l {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    (q, lambda)
}

/// `exp(pi i a1 a2 / N) Q^a1 Lambda^a2` at arbitrary integer labels.
pub fn t_basis_raw(a1: i64, a2: i64, n: usize) -> CMatrix {
    let phase = basis_phase(a1, a2, n);
    let shift = a2.rem_euclid(n as i64) as usize;
    let mut t = CMatrix::zeros(n, n);
    for k in 0..n {
        t[(k, (k + shift) % n)] = phase * root_of_unity((k as i64 + 1) * a1, n);
    }
    t
}

/// `T_alpha` at its canonical label; `T_(0,0)` is the identity.
pub fn t_basis(alpha: ModeIndex) -> CMatrix {
    t_basis_raw(alpha.a1 as i64, alpha.a2 as i64, alpha.n)
}

/// `kappa_{alpha,beta} = exp(pi i (beta_1 alpha_2 - beta_2 alpha_1) / N)`
/// from canonical representatives.
pub fn kappa(alpha: ModeIndex, beta: ModeIndex) -> C64 {
    let m = beta.a1 as i64 * alpha.a2 as i64 - beta.a2 as i64 * alpha.a1 as i64;
    basis_phase(m, 1, alpha.n)
}

/// `C_{alpha,beta} = kappa_{alpha,beta} - kappa_{beta,alpha}`, so that
/// `[T_alpha, T_beta] = C_{alpha,beta} T` at the unreduced label
/// `alpha + beta`.
pub fn structure_c(alpha: ModeIndex, beta: ModeIndex) -> C64 {
    kappa(alpha, beta) - kappa(beta, alpha)
}

/// Sign `s` with `T_(b1,b2) = s T_(b1 mod N, b2 mod N)`.
pub fn wrap_sign(b1: i64, b2: i64, n: usize) -> f64 {
    let m = n as i64;
    let (c1, c2) = (b1.rem_euclid(m), b2.rem_euclid(m));
    let (e1, e2) = ((b1 - c1) / m, (b2 - c2) / m);
    if (e1 * c2 + e2 * c1 + m * e1 * e2).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Coefficient `c` with `T_alpha T_beta = c T_(alpha+beta)` where the sum is
/// reduced to its canonical label.
pub fn product_coeff(alpha: ModeIndex, beta: ModeIndex) -> C64 {
    let s = wrap_sign(
        (alpha.a1 + beta.a1) as i64,
        (alpha.a2 + beta.a2) as i64,
        alpha.n,
    );
    kappa(alpha, beta) * s
}

/// Components `S_alpha = tr(T_alpha^dagger S) / N`.
pub fn decompose(s: &CMatrix) -> Result<ComponentMap> {
    let n = s.nrows();
    if n == 0 || s.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "decompose expects a square matrix, got {}x{}",
            s.nrows(),
            s.ncols()
        )));
    }
    Ok(ComponentMap::from_fn(n, |alpha| {
        let (a1, a2) = (alpha.a1 as i64, alpha.a2 as i64);
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..n {
            acc += root_of_unity((k as i64 + 1) * a1, n).conj() * s[(k, (k + alpha.a2) % n)];
        }
        basis_phase(a1, a2, n).conj() * acc / n as f64
    }))
}

/// `S = sum_alpha T_alpha S_alpha`.
pub fn compose(c: &ComponentMap) -> CMatrix {
    let n = c.n;
    let mut s = CMatrix::zeros(n, n);
    for (alpha, v) in c.iter() {
        let (a1, a2) = (alpha.a1 as i64, alpha.a2 as i64);
        let phase = basis_phase(a1, a2, n) * v;
        for k in 0..n {
            s[(k, (k + alpha.a2) % n)] += phase * root_of_unity((k as i64 + 1) * a1, n);
        }
    }
    s
}

/// Permutation operator `sum_ab e_ab (x) e_ba` on `C^N (x) C^N`, with the
/// Kronecker layout `(A (x) B)_{(i,k),(j,l)} = A_ij B_kl`.
pub fn permutation(n: usize) -> CMatrix {
    let mut p = CMatrix::zeros(n * n, n * n);
    for a in 0..n {
        for b in 0..n {
            p[(a * n + b, b * n + a)] = C64::new(1.0, 0.0);
        }
    }
    p
}

/// `(1/N) sum_alpha T_alpha (x) T_(-alpha)`, the basis form of the
/// permutation operator.
pub fn permutation_via_basis(n: usize) -> CMatrix {
    let mut p = CMatrix::zeros(n * n, n * n);
    for alpha in ModeIndex::all(n) {
        let (a1, a2) = (alpha.a1 as i64, alpha.a2 as i64);
        p += t_basis(alpha).kronecker(&t_basis_raw(-a1, -a2, n));
    }
    p / C64::new(n as f64, 0.0)
}

/// `S (x) 1` and `1 (x) S`.
pub fn embed_first(s: &CMatrix) -> CMatrix {
    s.kronecker(&CMatrix::identity(s.nrows(), s.nrows()))
}

pub fn embed_second(s: &CMatrix) -> CMatrix {
    CMatrix::identity(s.nrows(), s.nrows()).kronecker(s)
}

/// Trace over the second tensor factor of an `N^2 x N^2` matrix.
pub fn partial_trace_second(x: &CMatrix, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| (0..n).map(|k| x[(i * n + k, j * n + k)]).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, rng: &mut impl Rng) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        (a - b).norm() <= tol * a.norm().max(1.0)
    }

    fn mat_pow(m: &CMatrix, k: i64) -> CMatrix {
        let n = m.nrows();
        let base = if k < 0 { m.adjoint() } else { m.clone() };
        (0..k.unsigned_abs()).fold(CMatrix::identity(n, n), |acc, _| acc * &base)
    }

    #[test]
    fn mode_index_is_canonical() {
        let a = ModeIndex::new(-1, 5, 3);
        assert_eq!((a.a1(), a.a2()), (2, 2));
        assert_eq!(a.add(a.neg()), ModeIndex::zero(3));
        assert_eq!(ModeIndex::all(3).count(), 9);
        assert!(ModeIndex::all(3).next().unwrap().is_zero());
    }

    #[test]
    fn clock_shift_n2() {
        let (q, l) = clock_shift(2);
        let expected_q = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(-1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
            ],
        );
        let expected_l = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
            ],
        );
        assert!(close(&q, &expected_q, 1e-15));
        assert_eq!(l, expected_l);
    }

    #[test]
    fn clock_shift_orders_and_heisenberg_relation() {
        for n in 1..=6 {
            let (q, l) = clock_shift(n);
            let id = CMatrix::identity(n, n);
            assert!(close(&mat_pow(&q, n as i64), &id, 1e-13));
            assert!(close(&mat_pow(&l, n as i64), &id, 1e-13));
        }
        let n = 3;
        let (q, l) = clock_shift(n);
        for a1 in 0..3 {
            for a2 in 0..3 {
                let lhs = mat_pow(&l, a2) * mat_pow(&q, a1);
                let rhs = mat_pow(&q, a1) * mat_pow(&l, a2) * root_of_unity(a1 * a2, n);
                assert!(close(&lhs, &rhs, 1e-13));
            }
        }
    }

    #[test]
    fn basis_matches_matrix_powers() {
        for n in 1..=4 {
            let (q, l) = clock_shift(n);
            for a1 in -3i64..4 {
                for a2 in -3i64..4 {
                    let direct = mat_pow(&q, a1) * mat_pow(&l, a2) * basis_phase(a1, a2, n);
                    assert!(close(&t_basis_raw(a1, a2, n), &direct, 1e-13));
                }
            }
        }
        assert_eq!(t_basis(ModeIndex::zero(4)), CMatrix::identity(4, 4));
    }

    #[test]
    fn trace_pairing() {
        let n = 3;
        for alpha in ModeIndex::all(n) {
            for beta in ModeIndex::all(n) {
                // Unreduced negation: T_(-alpha) is the inverse of T_alpha.
                let neg = t_basis_raw(-(beta.a1() as i64), -(beta.a2() as i64), n);
                let tr = (t_basis(alpha) * neg).trace();
                let expected = if alpha == beta { n as f64 } else { 0.0 };
                assert!((tr - expected).norm() < 1e-13);
                let tr_adj = (t_basis(beta).adjoint() * t_basis(alpha)).trace();
                assert!((tr_adj - expected).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn product_rule() {
        for n in [2, 3, 4] {
            for alpha in ModeIndex::all(n) {
                for beta in ModeIndex::all(n) {
                    let lhs = t_basis(alpha) * t_basis(beta);
                    let raw = t_basis_raw(
                        (alpha.a1() + beta.a1()) as i64,
                        (alpha.a2() + beta.a2()) as i64,
                        n,
                    ) * kappa(alpha, beta);
                    assert!(close(&lhs, &raw, 1e-13));
                    let canon = t_basis(alpha.add(beta)) * product_coeff(alpha, beta);
                    assert!(close(&lhs, &canon, 1e-13));
                }
            }
        }
    }

    #[test]
    fn kappa_and_structure_constants() {
        for n in [2, 3] {
            for alpha in ModeIndex::all(n) {
                assert!((kappa(alpha, alpha) - 1.0).norm() < 1e-15);
                assert!(structure_c(alpha, alpha).norm() < 1e-15);
                for beta in ModeIndex::all(n) {
                    assert!((kappa(alpha, beta) * kappa(beta, alpha) - 1.0).norm() < 1e-14);
                    assert!((structure_c(alpha, beta) + structure_c(beta, alpha)).norm() < 1e-14);
                    let (ta, tb) = (t_basis(alpha), t_basis(beta));
                    let comm = &ta * &tb - &tb * &ta;
                    let raw = t_basis_raw(
                        (alpha.a1() + beta.a1()) as i64,
                        (alpha.a2() + beta.a2()) as i64,
                        n,
                    );
                    assert!(close(&comm, &(raw * structure_c(alpha, beta)), 1e-13));
                }
            }
        }
    }

    #[test]
    fn decompose_identity_and_basis() {
        let n = 3;
        let c = decompose(&CMatrix::identity(n, n)).unwrap();
        for (alpha, v) in c.iter() {
            let expected = if alpha.is_zero() { 1.0 } else { 0.0 };
            assert!((v - expected).norm() < 1e-15);
        }
        for gamma in ModeIndex::all(n) {
            let c = decompose(&t_basis(gamma)).unwrap();
            for (alpha, v) in c.iter() {
                let expected = if alpha == gamma { 1.0 } else { 0.0 };
                assert!((v - expected).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn decompose_rejects_rectangular() {
        assert!(matches!(
            decompose(&CMatrix::zeros(2, 3)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn compose_decompose_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=5 {
            let s = random_matrix(n, &mut rng);
            let back = compose(&decompose(&s).unwrap());
            assert!((&back - &s).norm() < 1e-14 * s.norm());
            // The fast compose agrees with summing basis matrices.
            let c = decompose(&s).unwrap();
            let slow = c
                .iter()
                .fold(CMatrix::zeros(n, n), |acc, (a, v)| acc + t_basis(a) * v);
            assert!((&slow - &s).norm() < 1e-13 * s.norm());
        }
    }

    #[test]
    fn permutation_formulas_agree() {
        assert_eq!(permutation(1), CMatrix::identity(1, 1));
        for n in [2, 3, 4] {
            let direct = permutation(n);
            let basis = permutation_via_basis(n);
            assert!((&direct - &basis).camax() < 1e-13);
            assert!(close(
                &(&direct * &direct),
                &CMatrix::identity(n * n, n * n),
                1e-14
            ));
        }
    }

    #[test]
    fn permutation_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2, 3] {
            let p = permutation(n);
            let s = random_matrix(n, &mut rng);
            let b = random_matrix(n, &mut rng);
            // tr_2(P S_2) = S_1; the N-scaled variant cannot hold since tr_2(P) = 1.
            let lhs = partial_trace_second(&(&p * embed_second(&s)), n);
            assert!(close(&lhs, &s, 1e-13));
            assert!(!close(&lhs, &(&s * C64::new(n as f64, 0.0)), 1e-3));
            assert!(close(
                &partial_trace_second(&p, n),
                &CMatrix::identity(n, n),
                1e-15
            ));
            assert!(close(
                &(embed_second(&s) * &p),
                &(&p * embed_first(&s)),
                1e-13
            ));
            assert!(close(
                &(s.kronecker(&b) * &p),
                &(&p * b.kronecker(&s)),
                1e-13
            ));
        }
    }

    #[test]
    fn rank_one_permutation_identity() {
        // S1^{ik} P S1^{ki} = S1^{ii} S2^{kk} for S^{ij} = xi^i rho^j.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [2, 3] {
            let vec = |rng: &mut ChaCha8Rng| {
                CMatrix::from_fn(n, 1, |_, _| {
                    C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>())
                })
            };
            let (xi_i, xi_k) = (vec(&mut rng), vec(&mut rng));
            let (rho_i, rho_k) = (vec(&mut rng).transpose(), vec(&mut rng).transpose());
            let s = |xi: &CMatrix, rho: &CMatrix| xi * rho;
            let p = permutation(n);
            let lhs = embed_first(&s(&xi_i, &rho_k)) * &p * embed_first(&s(&xi_k, &rho_i));
            let rhs = embed_first(&s(&xi_i, &rho_i)) * embed_second(&s(&xi_k, &rho_k));
            assert!(close(&lhs, &rhs, 1e-12));
        }
    }
}
