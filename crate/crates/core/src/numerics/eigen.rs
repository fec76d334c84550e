//! Eigenpairs of small dense real 4×4 matrices.
//!
//! Eigenvalues come from a real Schur decomposition. Eigenvectors are the
//! right singular vectors of `A − λI` belonging to the smallest singular
//! values; a cluster of (numerically) equal eigenvalues receives as many
//! orthonormal null vectors as its size, so semisimple degeneracies yield
//! independent eigenvectors.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

pub type Mat4 = [[f64; 4]; 4];

/// Eigenvalues closer than this, relative to `max(‖A‖, 1)`, are one cluster.
const CLUSTER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub value: Complex64,
    /// Unit 2-norm eigenvector.
    pub vector: [Complex64; 4],
}

fn to_nalgebra(a: &Mat4) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| a[i][j])
}

/// Frobenius norm.
pub fn frobenius(a: &Mat4) -> f64 {
    a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

/// `‖A v − λ v‖₂`.
pub fn residual(a: &Mat4, pair: &EigenPair) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        let mut s = -pair.value * pair.vector[i];
        for j in 0..4 {
            s += a[i][j] * pair.vector[j];
        }
        acc += s.norm_sqr();
    }
    acc.sqrt()
}

/// Coefficients `[c0, c1, c2, c3, c4]` of `det(zI − A) = Σ c_k z^k`
/// (Faddeev-LeVerrier). Useful as an independent check of the eigenvalues;
/// the coefficients lose relative accuracy when eigenvalues are small.
pub fn characteristic_polynomial(a: &Mat4) -> [f64; 5] {
    let am = to_nalgebra(a);
    let mut c = [0.0; 5];
    c[4] = 1.0;
    let mut m = Matrix4::<f64>::zeros();
    for k in 1..=4 {
        m = am * m + Matrix4::identity() * c[5 - k];
        c[4 - k] = -(am * m).trace() / k as f64;
    }
    c
}

fn null_vectors(a: &Mat4, value: Complex64, count: usize) -> Vec<[Complex64; 4]> {
    let scale = frobenius(a).max(1.0);
    if value.im.abs() <= CLUSTER_TOL * scale {
        let shifted = to_nalgebra(a) - Matrix4::identity() * value.re;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.expect("requested V");
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
        order
            .into_iter()
            .take(count)
            .map(|r| {
                let row: Vector4<f64> = v_t.row(r).transpose();
                [0, 1, 2, 3].map(|i| Complex64::new(row[i], 0.0))
            })
            .collect()
    } else {
        let shifted = to_nalgebra(a).map(|x| Complex64::new(x, 0.0)) - Matrix4::identity() * value;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.expect("requested V");
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
        order
            .into_iter()
            .take(count)
            .map(|r| [0, 1, 2, 3].map(|i| v_t[(r, i)].conj()))
            .collect()
    }
}

/// All four eigenpairs, ordered by (real part, imaginary part).
///
/// Complex eigenvalues are legitimate output; for Bogoliubov matrices they
/// signal dynamical instability.
pub fn eigen_4x4(a: &Mat4) -> Vec<EigenPair> {
    let mut values: Vec<Complex64> = to_nalgebra(a)
        .complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect();
    values.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));

    let scale = frobenius(a).max(1.0);
    let mut pairs = Vec::with_capacity(4);
    let mut i = 0;
    while i < values.len() {
        let mut j = i + 1;
        while j < values.len() && (values[j] - values[i]).norm() <= CLUSTER_TOL * scale {
            j += 1;
        }
        let cluster = &values[i..j];
        let mean = cluster.iter().sum::<Complex64>() / cluster.len() as f64;
        let vectors = null_vectors(a, mean, cluster.len());
        for (value, vector) in cluster.iter().zip(vectors) {
            pairs.push(EigenPair { value: *value, vector });
        }
        i = j;
    }
    pairs
}
