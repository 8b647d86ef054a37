//! Small dense complex linear algebra on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<Complex64>;

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Row-major flattening into a column vector: entry `(i, j)` lands at `i * ncols + j`.
pub fn vec_row_major(c: &CMatrix) -> CMatrix {
    let (r, k) = c.shape();
    CMatrix::from_fn(r * k, 1, |idx, _| c[(idx / k, idx % k)])
}

/// Singular values in ascending order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(f64::total_cmp);
    s
}

/// Operator norm (largest singular value); zero for empty matrices.
pub fn op_norm(a: &CMatrix) -> f64 {
    singular_values(a).last().copied().unwrap_or(0.0)
}

pub fn frobenius_sq(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Largest entrywise modulus of `a - b`; infinite when the shapes differ.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `‖U*U − 1‖` in operator norm; infinite for non-square input.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    op_norm(&(u.adjoint() * u - identity(u.nrows())))
}

pub fn random_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases
/// of `R`'s diagonal pushed back into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    if n == 0 {
        return identity(0);
    }
    let qr = random_gaussian(n, n, rng).qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        for i in 0..n {
            u[(i, j)] *= phase;
        }
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..6 {
            let u = random_unitary(n, &mut rng);
            assert!(unitarity_defect(&u) < 1e-12);
        }
    }

    #[test]
    fn svd_by_hand() {
        let s2 = 2f64.sqrt();
        let a = CMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(s2, 0.0), c64(1.0 / s2, 0.0), c64(0.0, 0.0)]);
        let s = singular_values(&a);
        assert!((s[0] - 1.0 / s2).abs() < 1e-14);
        assert!((s[1] - s2).abs() < 1e-14);
        assert!((op_norm(&a) - s2).abs() < 1e-14);
    }

    #[test]
    fn row_major_vec() {
        let a = CMatrix::from_row_slice(2, 3, &(0..6).map(|k| c64(k as f64, 0.0)).collect::<Vec<_>>());
        let v = vec_row_major(&a);
        for k in 0..6 {
            assert_eq!(v[(k, 0)].re, k as f64);
        }
    }

    #[test]
    fn kron_shape() {
        let a = identity(2);
        let b = CMatrix::from_element(3, 1, c64(1.0, 0.0));
        assert_eq!(kron(&a, &b).shape(), (6, 2));
    }
}
