//! Algebraic curvature tensors and forms on an m-dimensional inner-product
//! space, the identification Λ²V ≅ so(m), Kulkarni–Nomizu products, and
//! complexified 2-vectors with their rank.
//!
//! Conventions, used everywhere downstream:
//! * The Λ² basis is {e_i ∧ e_j : i < j}, lexicographic.
//! * A curvature form matrix satisfies R(e_i∧e_j, e_k∧e_l) = T_ijkl.
//! * The inner product on Λ² is ⟨X, Y⟩ = ½ tr(Xᵀ Y) under the matrix
//!   identification [e_i∧e_j]_kl = δ_ik δ_jl − δ_il δ_jk, which makes the
//!   basis orthonormal.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{complex_rank, lambda2_dim, lex_pairs, pair_index};
use crate::tol;

/// An m-dimensional real vector space with a symmetric bilinear form,
/// possibly only weakly positive definite when flagged degenerate.
#[derive(Debug, Clone)]
pub struct InnerSpace {
    dim: usize,
    metric: DMatrix<f64>,
    degenerate: bool,
}

impl InnerSpace {
    pub fn new(metric: DMatrix<f64>, degenerate: bool) -> Result<Self> {
        let dim = metric.nrows();
        if metric.ncols() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                got: metric.ncols(),
            });
        }
        let asym = (&metric - metric.transpose()).amax();
        if asym > tol::EXACT_ALGEBRA * (1.0 + metric.amax()) {
            return Err(Error::SymmetryViolation {
                residual: asym,
                tol: tol::EXACT_ALGEBRA,
            });
        }
        if !degenerate && metric.clone().cholesky().is_none() {
            return Err(Error::SingularMetric);
        }
        Ok(Self {
            dim,
            metric,
            degenerate,
        })
    }

    pub fn euclidean(dim: usize) -> Self {
        Self {
            dim,
            metric: DMatrix::identity(dim, dim),
            degenerate: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Inverse metric; refused for degenerate spaces, whose contractions
    /// must be supplied explicitly instead.
    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        if self.degenerate {
            return Err(Error::SingularMetric);
        }
        self.metric.clone().try_inverse().ok_or(Error::SingularMetric)
    }
}

/// A symmetric 2-tensor (Ricci tensors, metrics, perturbations).
#[derive(Debug, Clone)]
pub struct SymmetricTwoTensor {
    dim: usize,
    mat: DMatrix<f64>,
}

impl SymmetricTwoTensor {
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        let dim = mat.nrows();
        let asym = (&mat - mat.transpose()).amax();
        if mat.ncols() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                got: mat.ncols(),
            });
        }
        if asym > tol::EXACT_ALGEBRA * (1.0 + mat.amax()) {
            return Err(Error::SymmetryViolation {
                residual: asym,
                tol: tol::EXACT_ALGEBRA,
            });
        }
        Ok(Self { dim, mat })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mat(&self) -> &DMatrix<f64> {
        &self.mat
    }
}

/// A (0,4) tensor with the symmetries of a Riemannian curvature tensor.
#[derive(Debug, Clone)]
pub struct CurvatureTensor {
    dim: usize,
    comp: Vec<f64>,
}

impl CurvatureTensor {
    #[inline]
    fn idx(&self, a: usize, b: usize, c: usize, d: usize) -> usize {
        ((a * self.dim + b) * self.dim + c) * self.dim + d
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            comp: vec![0.0; dim * dim * dim * dim],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(dim);
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    for d in 0..dim {
                        let i = t.idx(a, b, c, d);
                        t.comp[i] = f(a, b, c, d);
                    }
                }
            }
        }
        t
    }

    /// T_ijkl = K (g_ik g_jl − g_il g_jk), the tensor of constant curvature K.
    pub fn constant_curvature(dim: usize, k: f64, g: &DMatrix<f64>) -> Self {
        Self::from_fn(dim, |i, j, kk, l| {
            k * (g[(i, kk)] * g[(j, l)] - g[(i, l)] * g[(j, kk)])
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.comp[self.idx(a, b, c, d)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: f64) {
        let i = self.idx(a, b, c, d);
        self.comp[i] = v;
    }

    pub fn components(&self) -> &[f64] {
        &self.comp
    }

    pub fn max_abs(&self) -> f64 {
        self.comp.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            comp: self.comp.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            dim: self.dim,
            comp: self
                .comp
                .iter()
                .zip(other.comp.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Largest violation of the curvature symmetries (both antisymmetries,
    /// pair symmetry, first Bianchi), relative to the largest component.
    pub fn symmetry_residual(&self) -> f64 {
        let m = self.dim;
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    for d in 0..m {
                        let t = self.get(a, b, c, d);
                        worst = worst.max((t + self.get(b, a, c, d)).abs());
                        worst = worst.max((t + self.get(a, b, d, c)).abs());
                        worst = worst.max((t - self.get(c, d, a, b)).abs());
                        let bianchi =
                            t + self.get(a, c, d, b) + self.get(a, d, b, c);
                        worst = worst.max(bianchi.abs());
                    }
                }
            }
        }
        worst / scale
    }

    /// Pullback through all four slots: (T_A)_{ijkl} = T(Ae_i, Ae_j, Ae_k, Ae_l).
    pub fn pullback(&self, a: &DMatrix<f64>) -> Self {
        let m = self.dim;
        // contract one slot at a time
        let mut cur = self.comp.clone();
        for slot in 0..4 {
            let mut next = vec![0.0; cur.len()];
            for i0 in 0..m {
                for i1 in 0..m {
                    for i2 in 0..m {
                        for i3 in 0..m {
                            let idx = ((i0 * m + i1) * m + i2) * m + i3;
                            let free = [i0, i1, i2, i3][slot];
                            let mut s = 0.0;
                            for p in 0..m {
                                let mut src = [i0, i1, i2, i3];
                                src[slot] = p;
                                let sidx = ((src[0] * m + src[1]) * m + src[2]) * m + src[3];
                                s += a[(p, free)] * cur[sidx];
                            }
                            next[idx] = s;
                        }
                    }
                }
            }
            cur = next;
        }
        Self { dim: m, comp: cur }
    }

    /// Derivative of the four-slot pullback family α ↦ T_{I+αA} at α = 0:
    /// the sum of single-slot insertions of the endomorphism A.
    pub fn four_slot_derivative(&self, a: &DMatrix<f64>) -> Self {
        let m = self.dim;
        Self::from_fn(m, |i, j, k, l| {
            let mut s = 0.0;
            for p in 0..m {
                s += a[(p, i)] * self.get(p, j, k, l)
                    + a[(p, j)] * self.get(i, p, k, l)
                    + a[(p, k)] * self.get(i, j, p, l)
                    + a[(p, l)] * self.get(i, j, k, p);
            }
            s
        })
    }
}

/// A curvature form: symmetric matrix on the lexicographic Λ² basis whose
/// induced (0,4) tensor satisfies the first Bianchi identity.
#[derive(Debug, Clone)]
pub struct CurvatureForm {
    dim: usize,
    matrix: DMatrix<f64>,
}

impl CurvatureForm {
    pub fn from_matrix(dim: usize, matrix: DMatrix<f64>) -> Result<Self> {
        let l = lambda2_dim(dim);
        if matrix.nrows() != l || matrix.ncols() != l {
            return Err(Error::DimMismatch {
                expected: l,
                got: matrix.nrows(),
            });
        }
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > tol::EXACT_ALGEBRA * (1.0 + matrix.amax()) {
            return Err(Error::SymmetryViolation {
                residual: asym,
                tol: tol::EXACT_ALGEBRA,
            });
        }
        Ok(Self { dim, matrix })
    }

    pub fn zeros(dim: usize) -> Self {
        let l = lambda2_dim(dim);
        Self {
            dim,
            matrix: DMatrix::zeros(l, l),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let l = lambda2_dim(dim);
        Self {
            dim,
            matrix: DMatrix::identity(l, l),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            matrix: &self.matrix * s,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            dim: self.dim,
            matrix: &self.matrix + &other.matrix,
        }
    }

    /// A random curvature form: Bianchi projection of a Gaussian symmetric
    /// Λ² matrix, giving uniform coverage of the constraint subspace.
    pub fn random_bianchi<R: Rng>(dim: usize, rng: &mut R) -> Self {
        let l = lambda2_dim(dim);
        let mut m = DMatrix::zeros(l, l);
        for r in 0..l {
            for c in r..l {
                let x: f64 = sample_normal(rng);
                m[(r, c)] = x;
                m[(c, r)] = x;
            }
        }
        bianchi_project(dim, &m)
    }
}

fn sample_normal<R: Rng>(rng: &mut R) -> f64 {
    // Box–Muller; avoids pulling in a distributions crate for one call site.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Convert a curvature tensor to its Λ² form matrix.  Rejects inputs whose
/// symmetry residual exceeds the construction tolerance.
pub fn form_from_tensor(t: &CurvatureTensor) -> Result<CurvatureForm> {
    let res = t.symmetry_residual();
    if res > tol::EXACT_ALGEBRA {
        return Err(Error::SymmetryViolation {
            residual: res,
            tol: tol::EXACT_ALGEBRA,
        });
    }
    Ok(form_from_tensor_unchecked(t))
}

pub fn form_from_tensor_unchecked(t: &CurvatureTensor) -> CurvatureForm {
    let m = t.dim();
    let pairs = lex_pairs(m);
    let l = pairs.len();
    let mut mat = DMatrix::zeros(l, l);
    for (r, &(i, j)) in pairs.iter().enumerate() {
        for (c, &(k, lq)) in pairs.iter().enumerate() {
            mat[(r, c)] = t.get(i, j, k, lq);
        }
    }
    CurvatureForm { dim: m, matrix: mat }
}

/// Rebuild the (0,4) tensor from a symmetric Λ² matrix, extending by the
/// pair antisymmetries.  Exact inverse of `form_from_tensor` on the
/// Bianchi subspace.
pub fn tensor_from_form(f: &CurvatureForm) -> CurvatureTensor {
    let m = f.dim;
    CurvatureTensor::from_fn(m, |a, b, c, d| {
        if a == b || c == d {
            return 0.0;
        }
        let (i, j, s1) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        let (k, l, s2) = if c < d { (c, d, 1.0) } else { (d, c, -1.0) };
        s1 * s2 * f.matrix[(pair_index(m, i, j), pair_index(m, k, l))]
    })
}

/// Orthogonal projection of a symmetric Λ² matrix onto the subspace of
/// curvature forms (first Bianchi identity).  The complement is the image
/// of Λ⁴, reached by total antisymmetrisation.
pub fn bianchi_project(dim: usize, matrix: &DMatrix<f64>) -> CurvatureForm {
    let f = CurvatureForm {
        dim,
        matrix: (matrix + matrix.transpose()) * 0.5,
    };
    let t = tensor_from_form(&f);
    let proj = CurvatureTensor::from_fn(dim, |i, j, k, l| {
        let b = (t.get(i, j, k, l) + t.get(i, k, l, j) + t.get(i, l, j, k)) / 3.0;
        t.get(i, j, k, l) - b
    });
    form_from_tensor_unchecked(&proj)
}

/// Kulkarni–Nomizu product:
/// (A ⊙ B)_ijkl = A_ik B_jl + A_jl B_ik − A_il B_jk − A_jk B_il.
pub fn kulkarni_nomizu(a: &SymmetricTwoTensor, b: &SymmetricTwoTensor) -> Result<CurvatureTensor> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let (am, bm) = (a.mat(), b.mat());
    Ok(CurvatureTensor::from_fn(a.dim(), |i, j, k, l| {
        am[(i, k)] * bm[(j, l)] + am[(j, l)] * bm[(i, k)]
            - am[(i, l)] * bm[(j, k)]
            - am[(j, k)] * bm[(i, l)]
    }))
}

/// An element of Λ²(V^ℂ) in lexicographic coordinates.
#[derive(Debug, Clone)]
pub struct ComplexTwoVector {
    dim: usize,
    coeffs: DVector<Complex64>,
}

impl ComplexTwoVector {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            coeffs: DVector::zeros(lambda2_dim(dim)),
        }
    }

    pub fn from_coeffs(dim: usize, coeffs: DVector<Complex64>) -> Result<Self> {
        if coeffs.len() != lambda2_dim(dim) {
            return Err(Error::DimMismatch {
                expected: lambda2_dim(dim),
                got: coeffs.len(),
            });
        }
        Ok(Self { dim, coeffs })
    }

    /// The basis 2-vector e_i ∧ e_j (i < j).
    pub fn basis(dim: usize, i: usize, j: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.coeffs[pair_index(dim, i, j)] = Complex64::new(1.0, 0.0);
        v
    }

    /// The simple 2-vector u ∧ v.
    pub fn wedge(u: &DVector<Complex64>, v: &DVector<Complex64>) -> Self {
        let dim = u.len();
        let pairs = lex_pairs(dim);
        let coeffs = DVector::from_fn(pairs.len(), |p, _| {
            let (i, j) = pairs[p];
            u[i] * v[j] - u[j] * v[i]
        });
        Self { dim, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &DVector<Complex64> {
        &self.coeffs
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            dim: self.dim,
            coeffs: &self.coeffs + &other.coeffs,
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            coeffs: &self.coeffs * s,
        }
    }

    /// Hermitian squared norm ⟨ω, ω̄⟩ = Σ |ω^{ij}|².
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// The antisymmetric matrix A(ω) with A_ij = ω^{ij} for i < j.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let m = self.dim;
        let mut a = DMatrix::zeros(m, m);
        for (p, &(i, j)) in lex_pairs(m).iter().enumerate() {
            a[(i, j)] = self.coeffs[p];
            a[(j, i)] = -self.coeffs[p];
        }
        a
    }

    pub fn from_matrix(a: &DMatrix<Complex64>) -> Self {
        let m = a.nrows();
        let pairs = lex_pairs(m);
        let coeffs = DVector::from_fn(pairs.len(), |p, _| {
            let (i, j) = pairs[p];
            a[(i, j)]
        });
        Self { dim: m, coeffs }
    }

    /// Image under an invertible (or any) real/complex endomorphism:
    /// u ∧ v ↦ Au ∧ Av, i.e. A(ω) ↦ A · A(ω) · Aᵀ.
    pub fn push_forward(&self, a: &DMatrix<Complex64>) -> Self {
        Self::from_matrix(&(a * self.matrix() * a.transpose()))
    }

    /// Complex conjugate 2-vector.
    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            coeffs: self.coeffs.map(|c| c.conj()),
        }
    }

    /// Random 2-vector with standard complex normal coefficients.
    pub fn random<R: Rng>(dim: usize, rng: &mut R) -> Self {
        let l = lambda2_dim(dim);
        let coeffs = DVector::from_fn(l, |_, _| {
            Complex64::new(sample_normal(rng), sample_normal(rng))
        });
        Self { dim, coeffs }
    }

    /// Least number of simple summands: half the numerical rank of A(ω).
    pub fn rank(&self) -> usize {
        complex_rank(&self.matrix(), tol::RANK_CUTOFF) / 2
    }
}

/// Evaluate R(ω, ω̄).  Always real for a real symmetric form matrix.
pub fn evaluate(r: &CurvatureForm, omega: &ComplexTwoVector) -> Result<f64> {
    if r.dim() != omega.dim() {
        return Err(Error::DimMismatch {
            expected: r.dim(),
            got: omega.dim(),
        });
    }
    let c = omega.coeffs();
    let mut acc = 0.0;
    for row in 0..c.len() {
        for col in 0..c.len() {
            // ω^{row} M_{row,col} conj(ω^{col}); imaginary parts cancel by symmetry
            acc += r.matrix()[(row, col)] * (c[row] * c[col].conj()).re;
        }
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// JSON wire formats
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct CurvatureFormWire {
    dim: usize,
    basis: String,
    matrix: Vec<Vec<f64>>,
}

impl Serialize for CurvatureForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let l = lambda2_dim(self.dim);
        let matrix = (0..l)
            .map(|r| (0..l).map(|c| self.matrix[(r, c)]).collect())
            .collect();
        CurvatureFormWire {
            dim: self.dim,
            basis: "lex".to_string(),
            matrix,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CurvatureForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = CurvatureFormWire::deserialize(d)?;
        if wire.basis != "lex" {
            return Err(serde::de::Error::custom(format!(
                "unsupported basis '{}' (expected \"lex\")",
                wire.basis
            )));
        }
        let l = lambda2_dim(wire.dim);
        if wire.matrix.len() != l || wire.matrix.iter().any(|row| row.len() != l) {
            return Err(serde::de::Error::custom(format!(
                "matrix must be {l}×{l} for dim {}",
                wire.dim
            )));
        }
        let mat = DMatrix::from_fn(l, l, |r, c| wire.matrix[r][c]);
        CurvatureForm::from_matrix(wire.dim, mat).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct TwoVectorWire {
    dim: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for ComplexTwoVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TwoVectorWire {
            dim: self.dim,
            re: self.coeffs.iter().map(|c| c.re).collect(),
            im: self.coeffs.iter().map(|c| c.im).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexTwoVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = TwoVectorWire::deserialize(d)?;
        let l = lambda2_dim(wire.dim);
        if wire.re.len() != l || wire.im.len() != l {
            return Err(serde::de::Error::custom(format!(
                "coefficient arrays must have length {l} for dim {}",
                wire.dim
            )));
        }
        let coeffs = DVector::from_fn(l, |p, _| Complex64::new(wire.re[p], wire.im[p]));
        Ok(ComplexTwoVector {
            dim: wire.dim,
            coeffs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::SymmetricEigen;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Brute-force evaluation oracle: full four-index contraction
    /// T_ijkl A(ω)^ij conj(A(ω))^kl equals 4·R(ω, ω̄).
    fn evaluate_oracle(t: &CurvatureTensor, omega: &ComplexTwoVector) -> f64 {
        let m = t.dim();
        let a = omega.matrix();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        acc += Complex64::new(t.get(i, j, k, l), 0.0) * a[(i, j)] * a[(k, l)].conj();
                    }
                }
            }
        }
        acc.re / 4.0
    }

    /// Independent rank oracle: count eigenvalues of A^H A above cutoff.
    fn matrix_rank_oracle(a: &DMatrix<Complex64>) -> usize {
        let gram = a.adjoint() * a;
        let (vals, _) = crate::linalg::hermitian_eigen(&gram);
        let max = vals.iter().cloned().fold(0.0f64, f64::max);
        if max <= 0.0 {
            return 0;
        }
        vals.iter().filter(|&&v| v.sqrt() > 1e-10 * max.sqrt()).count()
    }

    #[test]
    fn constant_curvature_dim3_form_is_identity() {
        let g = DMatrix::identity(3, 3);
        let t = CurvatureTensor::constant_curvature(3, 1.0, &g);
        let f = form_from_tensor(&t).unwrap();
        assert!((f.matrix() - DMatrix::identity(3, 3)).amax() < 1e-15);
    }

    #[test]
    fn zero_tensor_gives_zero_form() {
        let f = form_from_tensor(&CurvatureTensor::zeros(4)).unwrap();
        assert_eq!(f.frobenius_norm(), 0.0);
    }

    #[test]
    fn form_tensor_round_trip_on_bianchi_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in [3usize, 4, 5] {
            for _ in 0..34 {
                let f = CurvatureForm::random_bianchi(dim, &mut rng);
                let t = tensor_from_form(&f);
                assert!(t.symmetry_residual() < tol::EXACT_ALGEBRA);
                let back = form_from_tensor(&t).unwrap();
                assert!((back.matrix() - f.matrix()).amax() < 1e-14);
            }
        }
    }

    #[test]
    fn form_from_tensor_rejects_asymmetric_input() {
        let mut t = CurvatureTensor::zeros(3);
        t.set(0, 1, 0, 1, 1.0); // missing the partner components
        assert!(matches!(
            form_from_tensor(&t),
            Err(Error::SymmetryViolation { .. })
        ));
    }

    #[test]
    fn bianchi_projection_is_identity_in_dim3() {
        // Λ⁴ℝ³ = 0, so Sym²(Λ²ℝ³) (dim 6) is exactly the curvature space.
        assert_eq!(lambda2_dim(3) * (lambda2_dim(3) + 1) / 2, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let mut m = DMatrix::zeros(3, 3);
            for r in 0..3 {
                for c in r..3 {
                    let x: f64 = rng.gen_range(-1.0..1.0);
                    m[(r, c)] = x;
                    m[(c, r)] = x;
                }
            }
            let p = bianchi_project(3, &m);
            assert!((p.matrix() - &m).amax() < 1e-14);
        }
    }

    #[test]
    fn bianchi_projection_idempotent_and_self_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in [4usize, 5] {
            let l = lambda2_dim(dim);
            for _ in 0..10 {
                let mut m = DMatrix::zeros(l, l);
                let mut n = DMatrix::zeros(l, l);
                for r in 0..l {
                    for c in r..l {
                        let x: f64 = rng.gen_range(-1.0..1.0);
                        let y: f64 = rng.gen_range(-1.0..1.0);
                        m[(r, c)] = x;
                        m[(c, r)] = x;
                        n[(r, c)] = y;
                        n[(c, r)] = y;
                    }
                }
                let pm = bianchi_project(dim, &m);
                let ppm = bianchi_project(dim, pm.matrix());
                assert!((ppm.matrix() - pm.matrix()).amax() < tol::BIANCHI_IDEMPOTENCE);
                // self-adjointness w.r.t. the Frobenius pairing
                let pn = bianchi_project(dim, &n);
                let lhs = (pm.matrix().transpose() * &n).trace();
                let rhs = (m.transpose() * pn.matrix()).trace();
                assert_relative_eq!(lhs, rhs, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn bianchi_kernel_has_dimension_one_in_dim4() {
        // Brute force: rank of (I − P) acting on the 21-dim space of
        // symmetric Λ² matrices.
        let l = lambda2_dim(4); // 6
        let sym_dim = l * (l + 1) / 2; // 21
        let mut ops = DMatrix::zeros(sym_dim, sym_dim);
        let mut basis_idx = Vec::new();
        for r in 0..l {
            for c in r..l {
                basis_idx.push((r, c));
            }
        }
        for (col, &(r, c)) in basis_idx.iter().enumerate() {
            let mut e = DMatrix::zeros(l, l);
            e[(r, c)] = 1.0;
            e[(c, r)] = 1.0;
            let residual = &e - bianchi_project(4, &e).matrix();
            for (row, &(rr, cc)) in basis_idx.iter().enumerate() {
                ops[(row, col)] = residual[(rr, cc)];
            }
        }
        let svd = ops.svd(false, false);
        let max = svd.singular_values.max();
        let rank = svd.singular_values.iter().filter(|&&s| s > 1e-10 * max).count();
        assert_eq!(rank, 1); // 21 − 20
    }

    #[test]
    fn kulkarni_nomizu_normalization() {
        let id = SymmetricTwoTensor::new(DMatrix::identity(4, 4)).unwrap();
        let kn = kulkarni_nomizu(&id, &id).unwrap();
        assert_relative_eq!(kn.get(0, 1, 0, 1), 2.0);
        // ½ K (g ⊙ g) is the constant-curvature tensor
        let k = 1.7;
        let g = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.0, 0.3, 1.5, 0.1, 0.0, 0.1, 1.1]);
        let gt = SymmetricTwoTensor::new(g.clone()).unwrap();
        let half_kgg = kulkarni_nomizu(&gt, &gt).unwrap().scale(0.5 * k);
        let cc = CurvatureTensor::constant_curvature(3, k, &g);
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for d in 0..3 {
                        assert_relative_eq!(
                            half_kgg.get(a, b, c, d),
                            cc.get(a, b, c, d),
                            epsilon = 1e-12
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn kulkarni_nomizu_output_satisfies_curvature_symmetries() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for dim in [3usize, 4, 5] {
            for _ in 0..10 {
                let mut a = DMatrix::zeros(dim, dim);
                let mut b = DMatrix::zeros(dim, dim);
                for r in 0..dim {
                    for c in r..dim {
                        let x: f64 = rng.gen_range(-1.0..1.0);
                        let y: f64 = rng.gen_range(-1.0..1.0);
                        a[(r, c)] = x;
                        a[(c, r)] = x;
                        b[(r, c)] = y;
                        b[(c, r)] = y;
                    }
                }
                let kn = kulkarni_nomizu(
                    &SymmetricTwoTensor::new(a).unwrap(),
                    &SymmetricTwoTensor::new(b).unwrap(),
                )
                .unwrap();
                assert!(kn.symmetry_residual() < tol::EXACT_ALGEBRA);
            }
        }
    }

    #[test]
    fn kulkarni_nomizu_dim_mismatch_rejected() {
        let a = SymmetricTwoTensor::new(DMatrix::identity(3, 3)).unwrap();
        let b = SymmetricTwoTensor::new(DMatrix::identity(4, 4)).unwrap();
        assert!(matches!(
            kulkarni_nomizu(&a, &b),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn rank_of_simple_and_composite_vectors() {
        let e12 = ComplexTwoVector::basis(5, 0, 1);
        assert_eq!(e12.rank(), 1);
        let w = ComplexTwoVector::basis(5, 0, 1).add(&ComplexTwoVector::basis(5, 2, 3));
        assert_eq!(w.rank(), 2);
        // e1∧e2 + e1∧e3 = e1∧(e2+e3)
        let w = ComplexTwoVector::basis(5, 0, 1).add(&ComplexTwoVector::basis(5, 0, 2));
        assert_eq!(w.rank(), 1);
        assert_eq!(ComplexTwoVector::zeros(4).rank(), 0);
    }

    #[test]
    fn rank_matches_independent_oracle_on_random_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..1000 {
            let dim = rng.gen_range(3..=7);
            let w = ComplexTwoVector::random(dim, &mut rng);
            assert_eq!(w.rank(), matrix_rank_oracle(&w.matrix()) / 2);
        }
    }

    #[test]
    fn evaluate_identity_form() {
        let r = CurvatureForm::identity(5);
        let mut w = ComplexTwoVector::basis(5, 0, 1);
        let i34 = ComplexTwoVector::basis(5, 2, 3).scale(Complex64::new(0.0, 1.0));
        w = w.add(&i34);
        assert_relative_eq!(evaluate(&r, &w).unwrap(), 2.0);
        assert_eq!(evaluate(&r, &ComplexTwoVector::zeros(5)).unwrap(), 0.0);
    }

    #[test]
    fn evaluate_matches_four_index_contraction_oracle() {
        let g = DMatrix::identity(4, 4);
        let t = CurvatureTensor::constant_curvature(4, 1.0, &g);
        let f = form_from_tensor(&t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let w = ComplexTwoVector::random(4, &mut rng);
            let direct = evaluate(&f, &w).unwrap();
            assert_relative_eq!(direct, evaluate_oracle(&t, &w), epsilon = 1e-10);
        }
    }

    #[test]
    fn evaluate_and_rank_invariant_under_orthogonal_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let dim = 4;
            let f = CurvatureForm::random_bianchi(dim, &mut rng);
            let t = tensor_from_form(&f);
            // random orthogonal matrix from QR of a Gaussian matrix
            let gauss = DMatrix::from_fn(dim, dim, |_, _| sample_normal(&mut rng));
            let q = gauss.qr().q();
            let t_q = t.pullback(&q);
            let f_q = form_from_tensor(&t_q).unwrap();
            let w = ComplexTwoVector::random(dim, &mut rng);
            let qc = q.map(|x| Complex64::new(x, 0.0));
            let pushed = w.push_forward(&qc);
            assert_relative_eq!(
                evaluate(&f_q, &w).unwrap(),
                evaluate(&f, &pushed).unwrap(),
                epsilon = 1e-10,
            );
            assert_eq!(w.rank(), pushed.rank());
            assert_relative_eq!(w.norm_sq(), pushed.norm_sq(), epsilon = 1e-10);
        }
    }

    #[test]
    fn form_json_round_trip_and_schema() {
        let f = CurvatureForm::identity(3);
        let json = serde_json::to_value(&f).unwrap();
        assert_eq!(json["dim"], 3);
        assert_eq!(json["basis"], "lex");
        assert_eq!(json["matrix"].as_array().unwrap().len(), 3);
        let back: CurvatureForm = serde_json::from_value(json).unwrap();
        assert!((back.matrix() - f.matrix()).amax() == 0.0);

        let w = ComplexTwoVector::basis(4, 1, 3).scale(Complex64::new(0.5, -2.0));
        let json = serde_json::to_value(&w).unwrap();
        assert_eq!(json["dim"], 4);
        let back: ComplexTwoVector = serde_json::from_value(json).unwrap();
        assert!((back.coeffs() - w.coeffs()).norm() == 0.0);
    }

    #[test]
    fn degenerate_inner_space_refuses_inversion() {
        let mut m = DMatrix::zeros(3, 3);
        m[(0, 0)] = 1.0;
        let space = InnerSpace::new(m, true).unwrap();
        assert!(space.inverse().is_err());
        assert!(InnerSpace::new(DMatrix::zeros(2, 2), false).is_err());
    }

    #[test]
    fn random_bianchi_matrix_is_symmetric_psd_projection_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = CurvatureForm::random_bianchi(5, &mut rng);
        let eig = SymmetricEigen::new(f.matrix().clone());
        // nothing PSD about it; only finiteness and symmetry are contractual
        assert!(eig.eigenvalues.iter().all(|v| v.is_finite()));
        let again = bianchi_project(5, f.matrix());
        assert!((again.matrix() - f.matrix()).amax() < tol::BIANCHI_IDEMPOTENCE);
    }
}
