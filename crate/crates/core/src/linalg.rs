//! Thin wrappers over LAPACK plus the determinant kernels used by the
//! correlator pipelines.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use ndarray_linalg::{Eigh, JobSvd, UPLO, SVDDC};
use num_complex::Complex64;
use std::os::raw::{c_char, c_int};

use crate::error::{QcritError, Result};

/// Which eigenpairs to request, by ascending position (0-based, inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigRange {
    All,
    Index { lo: usize, hi: usize },
}

impl EigRange {
    pub fn lowest(count: usize) -> Self {
        EigRange::Index {
            lo: 0,
            hi: count.saturating_sub(1),
        }
    }

    fn lapack_args(self, n: usize) -> Result<(c_char, c_int, c_int)> {
        match self {
            EigRange::All => Ok((b'A' as c_char, 1, n as c_int)),
            EigRange::Index { lo, hi } => {
                if lo > hi || hi >= n {
                    return Err(QcritError::Validation(format!(
                        "eigen index range {lo}..={hi} invalid for dimension {n}"
                    )));
                }
                Ok((b'I' as c_char, lo as c_int + 1, hi as c_int + 1))
            }
        }
    }
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Array1<f64>,
    pub vectors: Array2<f64>,
}

fn column_major_to_array(buf: Vec<f64>, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_vec((cols, rows), buf)
        .expect("buffer length matches shape")
        .reversed_axes()
        .as_standard_layout()
        .into_owned()
}

/// Selected eigenpairs of a dense real symmetric matrix.
///
/// Full spectra use divide and conquer; index ranges use bisection with
/// inverse iteration, which reorthogonalizes clustered eigenvectors.
pub fn sym_eigh(matrix: ArrayView2<f64>, range: EigRange) -> Result<SymEigen> {
    let (values, vectors) = dense_eigen(matrix, range, true)?;
    Ok(SymEigen {
        values,
        vectors: vectors.expect("vectors requested"),
    })
}

/// Full spectrum of a dense complex Hermitian matrix, eigenvalues ascending.
pub fn herm_eigh(matrix: ArrayView2<Complex64>) -> Result<(Array1<f64>, Array2<Complex64>)> {
    if matrix.nrows() != matrix.ncols() {
        return Err(QcritError::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
    }
    matrix.to_owned().eigh(UPLO::Lower).map_err(|e| QcritError::Decomposition(format!("Hermitian eigensolver: {e}")))
}

/// Selected eigenvalues of a dense real symmetric matrix.
pub fn sym_eigvals(matrix: ArrayView2<f64>, range: EigRange) -> Result<Array1<f64>> {
    Ok(dense_eigen(matrix, range, false)?.0)
}

/// Most accurate absolute tolerance for bisection, `2·safe_min`.
const BISECTION_ABSTOL: f64 = 2.0 * f64::MIN_POSITIVE;

type EigenParts = (Array1<f64>, Option<Array2<f64>>);

fn dense_eigen(matrix: ArrayView2<f64>, range: EigRange, vectors: bool) -> Result<EigenParts> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(QcritError::DimensionMismatch {
            expected: n,
            found: matrix.ncols(),
        });
    }
    if n == 0 {
        return Ok((Array1::zeros(0), vectors.then(|| Array2::zeros((0, 0)))));
    }
    let (range_flag, il, iu) = range.lapack_args(n)?;
    // Symmetric input: the row-major buffer is also a valid column-major one.
    let mut a: Vec<f64> = matrix.iter().copied().collect();
    let jobz = if vectors { b'V' } else { b'N' } as c_char;
    let uplo = b'U' as c_char;
    let nn = n as c_int;
    let mut info: c_int = 0;
    let query: c_int = -1;
    let mut w = vec![0.0f64; n];

    if range == EigRange::All {
        let mut work_query = 0.0f64;
        let mut iwork_query: c_int = 0;
        unsafe {
            lapack_sys::dsyevd_(
                &jobz, &uplo, &nn, a.as_mut_ptr(), &nn, w.as_mut_ptr(), &mut work_query, &query,
                &mut iwork_query, &query, &mut info,
            );
        }
        if info != 0 {
            return Err(QcritError::Lapack { routine: "dsyevd", info });
        }
        let lwork = work_query as c_int;
        let mut work = vec![0.0f64; lwork.max(1) as usize];
        let mut iwork = vec![0 as c_int; iwork_query.max(1) as usize];
        unsafe {
            lapack_sys::dsyevd_(
                &jobz, &uplo, &nn, a.as_mut_ptr(), &nn, w.as_mut_ptr(), work.as_mut_ptr(), &lwork,
                iwork.as_mut_ptr(), &iwork_query, &mut info,
            );
        }
        if info != 0 {
            return Err(QcritError::Lapack { routine: "dsyevd", info });
        }
        let vecs = vectors.then(|| column_major_to_array(a, n, n));
        return Ok((Array1::from(w), vecs));
    }

    let (vl, vu) = (0.0f64, 0.0f64);
    let mut m: c_int = 0;
    let zcols = (iu - il + 1) as usize;
    let mut z = vec![0.0f64; if vectors { n * zcols } else { 1 }];
    let ldz: c_int = if vectors { nn } else { 1 };
    let mut iwork = vec![0 as c_int; 5 * n];
    let mut ifail = vec![0 as c_int; n];
    let mut work_query = 0.0f64;
    unsafe {
        lapack_sys::dsyevx_(
            &jobz, &range_flag, &uplo, &nn, a.as_mut_ptr(), &nn, &vl, &vu, &il, &iu,
            &BISECTION_ABSTOL, &mut m, w.as_mut_ptr(), z.as_mut_ptr(), &ldz, &mut work_query,
            &query, iwork.as_mut_ptr(), ifail.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(QcritError::Lapack { routine: "dsyevx", info });
    }
    let lwork = (work_query as c_int).max(8 * nn);
    let mut work = vec![0.0f64; lwork as usize];
    unsafe {
        lapack_sys::dsyevx_(
            &jobz, &range_flag, &uplo, &nn, a.as_mut_ptr(), &nn, &vl, &vu, &il, &iu,
            &BISECTION_ABSTOL, &mut m, w.as_mut_ptr(), z.as_mut_ptr(), &ldz, work.as_mut_ptr(),
            &lwork, iwork.as_mut_ptr(), ifail.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(QcritError::Lapack { routine: "dsyevx", info });
    }
    let m = m as usize;
    let values = Array1::from(w[..m].to_vec());
    let vecs = vectors.then(|| {
        z.truncate(n * m);
        column_major_to_array(z, n, m)
    });
    Ok((values, vecs))
}

/// Eigenpairs of the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off` (length `diag.len() - 1`).
pub fn tridiag_eigh(
    diag: ArrayView1<f64>,
    off: ArrayView1<f64>,
    range: EigRange,
) -> Result<SymEigen> {
    let (values, vectors) = tridiag_eigen(diag, off, range, true)?;
    Ok(SymEigen {
        values,
        vectors: vectors.expect("vectors requested"),
    })
}

pub fn tridiag_eigvals(
    diag: ArrayView1<f64>,
    off: ArrayView1<f64>,
    range: EigRange,
) -> Result<Array1<f64>> {
    Ok(tridiag_eigen(diag, off, range, false)?.0)
}

fn tridiag_eigen(
    diag: ArrayView1<f64>,
    off: ArrayView1<f64>,
    range: EigRange,
    vectors: bool,
) -> Result<EigenParts> {
    let n = diag.len();
    if n == 0 {
        return Ok((Array1::zeros(0), vectors.then(|| Array2::zeros((0, 0)))));
    }
    if off.len() + 1 != n {
        return Err(QcritError::DimensionMismatch {
            expected: n - 1,
            found: off.len(),
        });
    }
    let (range_flag, il, iu) = range.lapack_args(n)?;
    let mut d: Vec<f64> = diag.to_vec();
    let mut e: Vec<f64> = off.to_vec();
    e.push(0.0);
    let jobz = if vectors { b'V' } else { b'N' } as c_char;
    let nn = n as c_int;
    let mut info: c_int = 0;

    if range == EigRange::All {
        let mut z = vec![0.0f64; if vectors { n * n } else { 1 }];
        let ldz: c_int = if vectors { nn } else { 1 };
        let lwork: c_int = if vectors { 1 + 4 * nn + nn * nn } else { 1 };
        let liwork: c_int = if vectors { 3 + 5 * nn } else { 1 };
        let mut work = vec![0.0f64; lwork as usize];
        let mut iwork = vec![0 as c_int; liwork as usize];
        unsafe {
            lapack_sys::dstevd_(
                &jobz, &nn, d.as_mut_ptr(), e.as_mut_ptr(), z.as_mut_ptr(), &ldz, work.as_mut_ptr(),
                &lwork, iwork.as_mut_ptr(), &liwork, &mut info,
            );
        }
        if info != 0 {
            return Err(QcritError::Lapack { routine: "dstevd", info });
        }
        let vecs = vectors.then(|| column_major_to_array(z, n, n));
        return Ok((Array1::from(d), vecs));
    }

    let (vl, vu) = (0.0f64, 0.0f64);
    let mut m: c_int = 0;
    let mut w = vec![0.0f64; n];
    let zcols = (iu - il + 1) as usize;
    let mut z = vec![0.0f64; if vectors { n * zcols } else { 1 }];
    let ldz: c_int = if vectors { nn } else { 1 };
    let mut work = vec![0.0f64; 5 * n];
    let mut iwork = vec![0 as c_int; 5 * n];
    let mut ifail = vec![0 as c_int; n];
    unsafe {
        lapack_sys::dstevx_(
            &jobz, &range_flag, &nn, d.as_mut_ptr(), e.as_mut_ptr(), &vl, &vu, &il, &iu,
            &BISECTION_ABSTOL, &mut m, w.as_mut_ptr(), z.as_mut_ptr(), &ldz, work.as_mut_ptr(),
            iwork.as_mut_ptr(), ifail.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(QcritError::Lapack { routine: "dstevx", info });
    }
    let m = m as usize;
    let values = Array1::from(w[..m].to_vec());
    let vecs = vectors.then(|| {
        z.truncate(n * m);
        column_major_to_array(z, n, m)
    });
    Ok((values, vecs))
}

/// Full singular value decomposition `a = u · diag(s) · vt`, singular values descending.
pub fn svd(a: &Array2<f64>) -> Result<(Array2<f64>, Array1<f64>, Array2<f64>)> {
    let (u, s, vt) = a
        .svddc(JobSvd::All)
        .map_err(|e| QcritError::Decomposition(e.to_string()))?;
    match (u, vt) {
        (Some(u), Some(vt)) => Ok((u, s, vt)),
        _ => Err(QcritError::Decomposition(
            "singular vectors missing from SVD output".into(),
        )),
    }
}

/// Determinant by LU factorization with partial pivoting; the sign follows
/// the permutation parity.
pub fn det(a: ArrayView2<f64>) -> f64 {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "determinant of a non-square matrix");
    if n == 0 {
        return 1.0;
    }
    let mut m: Vec<f64> = a.iter().copied().collect();
    let mut det = 1.0;
    for k in 0..n {
        let mut piv = k;
        let mut best = m[k * n + k].abs();
        for i in k + 1..n {
            let v = m[i * n + k].abs();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != k {
            for j in 0..n {
                m.swap(k * n + j, piv * n + j);
            }
            det = -det;
        }
        let p = m[k * n + k];
        det *= p;
        let (head, tail) = m.split_at_mut((k + 1) * n);
        let pivot_row = &head[k * n + k + 1..k * n + n];
        for row in tail.chunks_exact_mut(n) {
            let l = row[k] / p;
            if l != 0.0 {
                for (x, &y) in row[k + 1..].iter_mut().zip(pivot_row) {
                    *x -= l * y;
                }
            }
        }
    }
    det
}

/// Relative pivot size below which elimination without pivoting is abandoned.
const MINOR_PIVOT_TOL: f64 = 1e-6;

/// All leading principal minors `det a[..m, ..m]` for `m = 1..=n`.
///
/// A single elimination without pivoting yields every minor as a running
/// product of pivots. When a pivot becomes small relative to the matrix
/// scale the remaining minors are recomputed one by one with pivoting.
pub fn leading_minors(a: ArrayView2<f64>) -> Vec<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "leading minors of a non-square matrix");
    let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let mut minors = Vec::with_capacity(n);
    if n == 0 {
        return minors;
    }
    if scale == 0.0 {
        minors.resize(n, 0.0);
        return minors;
    }
    let mut m: Vec<f64> = a.iter().copied().collect();
    let mut running = 1.0;
    for k in 0..n {
        let p = m[k * n + k];
        if p.abs() < MINOR_PIVOT_TOL * scale {
            for size in k + 1..=n {
                minors.push(det(a.slice(ndarray::s![..size, ..size])));
            }
            return minors;
        }
        running *= p;
        minors.push(running);
        let (head, tail) = m.split_at_mut((k + 1) * n);
        let pivot_row = &head[k * n + k + 1..k * n + n];
        for row in tail.chunks_exact_mut(n) {
            let l = row[k] / p;
            if l != 0.0 {
                for (x, &y) in row[k + 1..].iter_mut().zip(pivot_row) {
                    *x -= l * y;
                }
            }
        }
    }
    minors
}

/// Frobenius-norm distance of `vᵀv` from the identity, per entry maximum.
pub fn orthonormality_defect(v: ArrayView2<f64>) -> f64 {
    let gram = v.t().dot(&v);
    gram.indexed_iter().fold(0.0f64, |acc, ((i, j), &g)| {
        let target = if i == j { 1.0 } else { 0.0 };
        acc.max((g - target).abs())
    })
}
