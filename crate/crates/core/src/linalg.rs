//! Shared linear-algebra helpers: the lexicographic Λ² basis, Hermitian
//! eigenproblems via real embedding, rank of complex matrices, and the
//! log-log slope fit used by the convergence suites.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

/// Dimension of Λ²(ℝ^m).
pub fn lambda2_dim(m: usize) -> usize {
    m * (m - 1) / 2
}

/// Index pairs (i, j) with i < j in lexicographic order.
pub fn lex_pairs(m: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(lambda2_dim(m));
    for i in 0..m {
        for j in (i + 1)..m {
            pairs.push((i, j));
        }
    }
    pairs
}

/// Position of the pair (i, j), i < j, in the lexicographic basis.
pub fn pair_index(m: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < m);
    // pairs starting at i' < i: sum_{i'<i} (m-1-i'), then offset j-i-1
    i * (2 * m - i - 1) / 2 + (j - i - 1)
}

/// Real embedding of a complex matrix: A ↦ [[Re A, −Im A], [Im A, Re A]].
/// For Hermitian input the embedding is symmetric with every eigenvalue
/// doubled; for general input every singular value is doubled.
pub fn real_embedding(h: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = h.nrows();
    let mut e = DMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            let z = h[(r, c)];
            e[(r, c)] = z.re;
            e[(r, c + n)] = -z.im;
            e[(r + n, c)] = z.im;
            e[(r + n, c + n)] = z.re;
        }
    }
    e
}

/// Eigenvalues (ascending) and eigenvectors of a complex Hermitian matrix.
pub fn hermitian_eigen(h: &DMatrix<Complex64>) -> (Vec<f64>, Vec<DVector<Complex64>>) {
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    let eig = SymmetricEigen::new(real_embedding(h));
    // The embedding doubles every eigenvalue; (x, y) ↔ x + iy.  Sort and
    // keep every second one together with a representative eigenvector.
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for (pos, &idx) in order.iter().enumerate() {
        if pos % 2 != 0 {
            continue;
        }
        values.push(eig.eigenvalues[idx]);
        let col = eig.eigenvectors.column(idx);
        let v = DVector::from_fn(n, |r, _| Complex64::new(col[r], col[r + n]));
        vectors.push(v);
    }
    (values, vectors)
}

/// Smallest eigenvalue and eigenvector of a complex Hermitian matrix.
pub fn hermitian_smallest(h: &DMatrix<Complex64>) -> (f64, DVector<Complex64>) {
    let (values, vectors) = hermitian_eigen(h);
    (values[0], vectors.into_iter().next().unwrap())
}

/// Singular values of a complex matrix through its real embedding
/// (each singular value of the complex matrix appears twice).
pub fn complex_singular_values(a: &DMatrix<Complex64>) -> Vec<f64> {
    let n = a.nrows();
    if n == 0 {
        return Vec::new();
    }
    let emb = real_embedding(a);
    let svd = emb.svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv.into_iter().step_by(2).collect()
}

/// Numerical rank of a complex matrix with a scale-invariant cutoff.
pub fn complex_rank(a: &DMatrix<Complex64>, rel_cutoff: f64) -> usize {
    let sv = complex_singular_values(a);
    let max = sv.first().copied().unwrap_or(0.0);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_cutoff * max).count()
}

/// Smallest generalized eigenvalue of the symmetric pencil (A, B) with B
/// positive definite, solved through a Cholesky factor of B.
pub fn smallest_generalized_eigenvalue(a: &DMatrix<f64>, b: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let chol = b
        .clone()
        .cholesky()
        .expect("reference metric must be positive definite");
    let l_inv = chol
        .l()
        .try_inverse()
        .expect("Cholesky factor is invertible");
    let reduced = &l_inv * a * l_inv.transpose();
    let eig = SymmetricEigen::new((reduced.clone() + reduced.transpose()) * 0.5);
    let mut idx = 0;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i] < eig.eigenvalues[idx] {
            idx = i;
        }
    }
    let v = l_inv.transpose() * eig.eigenvectors.column(idx);
    (eig.eigenvalues[idx], v)
}

/// Decompose a real antisymmetric matrix A into canonical planes:
/// A = Σ σ_p (y_p x_pᵀ − x_p y_pᵀ) with {x_p, y_p} orthonormal, σ_p > 0.
pub fn antisymmetric_planes(a: &DMatrix<f64>, rel_cutoff: f64) -> Vec<(f64, DVector<f64>, DVector<f64>)> {
    let m = a.nrows();
    let s = a.transpose() * a; // = −A², symmetric PSD
    let eig = SymmetricEigen::new((s.clone() + s.transpose()) * 0.5);
    let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let cutoff = rel_cutoff * max.sqrt();
    // Collect eigenvectors by descending σ; deflate two directions per plane.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&p, &q| eig.eigenvalues[q].total_cmp(&eig.eigenvalues[p]));
    let mut planes = Vec::new();
    let mut used: Vec<DVector<f64>> = Vec::new();
    for &i in &order {
        let sigma = eig.eigenvalues[i].max(0.0).sqrt();
        if sigma <= cutoff {
            break;
        }
        let mut x: DVector<f64> = eig.eigenvectors.column(i).into();
        // Project out planes already extracted (degenerate σ shares eigenspace).
        for u in &used {
            let c = u.dot(&x);
            x -= u * c;
        }
        let norm = x.norm();
        if norm < 1e-10 {
            continue;
        }
        x /= norm;
        let y = a * &x / sigma;
        planes.push((sigma, x.clone(), y.clone()));
        used.push(x);
        used.push(y);
    }
    planes
}

/// Least-squares slope of ln(y) against ln(x).
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in lx.iter().zip(ly.iter()) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Derive a stream seed from a base seed and an index, for reproducible
/// per-task RNGs under concurrent execution.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    // splitmix64 step keeps derived streams well separated
    let mut z = base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
