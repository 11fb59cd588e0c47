use nalgebra::DMatrix;

use super::sparse::CsrMatrix;

/// Kronecker product of a small dense (temporal) matrix with a sparse (spatial)
/// matrix: block `(i, j)` of the result is `a[(i, j)] * b`.
pub fn kron(a: &DMatrix<f64>, b: &CsrMatrix) -> CsrMatrix {
    let (p, q) = b.shape();
    let mut t = Vec::with_capacity(a.iter().filter(|v| **v != 0.0).count() * b.nnz());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let s = a[(i, j)];
            if s == 0.0 {
                continue;
            }
            for (bi, bj, v) in b.iter() {
                t.push((i * p + bi, j * q + bj, s * v));
            }
        }
    }
    CsrMatrix::from_triplets(a.nrows() * p, a.ncols() * q, t)
}
