//! Thin safe wrappers around the system LAPACK routines used by this crate.
//!
//! Everything here works on column-major scratch buffers copied out of
//! `ndarray` views, so callers never see Fortran layout. Only the handful of
//! routines the crate actually needs are bound.

use ndarray::{Array1, Array2, ArrayView2, ShapeBuilder};
use num_complex::Complex64;

use crate::error::{GspError, Result};

#[link(name = "lapack")]
#[allow(clippy::too_many_arguments)]
extern "C" {
    fn dsyevd_(
        jobz: *const u8, uplo: *const u8, n: *const i32, a: *mut f64, lda: *const i32,
        w: *mut f64, work: *mut f64, lwork: *const i32, iwork: *mut i32, liwork: *const i32,
        info: *mut i32,
    );
    fn dgeev_(
        jobvl: *const u8, jobvr: *const u8, n: *const i32, a: *mut f64, lda: *const i32,
        wr: *mut f64, wi: *mut f64, vl: *mut f64, ldvl: *const i32, vr: *mut f64,
        ldvr: *const i32, work: *mut f64, lwork: *const i32, info: *mut i32,
    );
    fn dgesv_(
        n: *const i32, nrhs: *const i32, a: *mut f64, lda: *const i32, ipiv: *mut i32,
        b: *mut f64, ldb: *const i32, info: *mut i32,
    );
    fn zgesv_(
        n: *const i32, nrhs: *const i32, a: *mut Complex64, lda: *const i32, ipiv: *mut i32,
        b: *mut Complex64, ldb: *const i32, info: *mut i32,
    );
    fn dgesvd_(
        jobu: *const u8, jobvt: *const u8, m: *const i32, n: *const i32, a: *mut f64,
        lda: *const i32, s: *mut f64, u: *mut f64, ldu: *const i32, vt: *mut f64,
        ldvt: *const i32, work: *mut f64, lwork: *const i32, info: *mut i32,
    );
    fn dgelsd_(
        m: *const i32, n: *const i32, nrhs: *const i32, a: *mut f64, lda: *const i32,
        b: *mut f64, ldb: *const i32, s: *mut f64, rcond: *const f64, rank: *mut i32,
        work: *mut f64, lwork: *const i32, iwork: *mut i32, info: *mut i32,
    );
}

/// Copy a view into a column-major buffer (Fortran order).
fn colmajor(a: &ArrayView2<f64>) -> Vec<f64> {
    a.t().iter().copied().collect()
}

fn colmajor_c(a: &ArrayView2<Complex64>) -> Vec<Complex64> {
    a.t().iter().copied().collect()
}

/// Eigendecomposition of a real symmetric matrix.
///
/// Returns eigenvalues in ascending order and the matrix whose columns are the
/// corresponding orthonormal eigenvectors.
pub fn eigh(a: &ArrayView2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = square_dim(a)?;
    let ni = n as i32;
    // Symmetric input: row-major and column-major buffers coincide.
    let mut buf: Vec<f64> = a.iter().copied().collect();
    let mut w = vec![0.0f64; n];
    let mut info = 0i32;

    // Workspace query.
    let (mut wkopt, mut iwkopt) = (0.0f64, 0i32);
    let query = -1i32;
    unsafe {
        dsyevd_(
            b"V".as_ptr(), b"L".as_ptr(), &ni, buf.as_mut_ptr(), &ni, w.as_mut_ptr(),
            &mut wkopt, &query, &mut iwkopt, &query, &mut info,
        );
    }
    if info != 0 {
        return Err(GspError::Lapack { routine: "dsyevd", info });
    }
    let lwork = wkopt as i32;
    let liwork = iwkopt;
    let mut work = vec![0.0f64; lwork as usize];
    let mut iwork = vec![0i32; liwork as usize];
    unsafe {
        dsyevd_(
            b"V".as_ptr(), b"L".as_ptr(), &ni, buf.as_mut_ptr(), &ni, w.as_mut_ptr(),
            work.as_mut_ptr(), &lwork, iwork.as_mut_ptr(), &liwork, &mut info,
        );
    }
    if info != 0 {
        return Err(GspError::Lapack { routine: "dsyevd", info });
    }
    // buf is column-major: column k holds eigenvector k.
    let u = Array2::from_shape_vec((n, n).f(), buf).expect("dsyevd output shape");
    Ok((Array1::from_vec(w), u))
}

/// Eigendecomposition of a general real matrix.
///
/// Returns complex eigenvalues and the matrix whose columns are the right
/// eigenvectors, with conjugate pairs assembled from LAPACK's packed storage.
pub fn eig(a: &ArrayView2<f64>) -> Result<(Array1<Complex64>, Array2<Complex64>)> {
    let n = square_dim(a)?;
    let ni = n as i32;
    let mut buf = colmajor(a);
    let mut wr = vec![0.0f64; n];
    let mut wi = vec![0.0f64; n];
    let mut vr = vec![0.0f64; n * n];
    let mut info = 0i32;

    let mut wkopt = 0.0f64;
    let query = -1i32;
    unsafe {
        dgeev_(
            b"N".as_ptr(), b"V".as_ptr(), &ni, buf.as_mut_ptr(), &ni, wr.as_mut_ptr(),
            wi.as_mut_ptr(), std::ptr::null_mut(), &ni, vr.as_mut_ptr(), &ni,
            &mut wkopt, &query, &mut info,
        );
    }
    if info != 0 {
        return Err(GspError::Lapack { routine: "dgeev", info });
    }
    let lwork = wkopt as i32;
    let mut work = vec![0.0f64; lwork as usize];
    unsafe {
        dgeev_(
            b"N".as_ptr(), b"V".as_ptr(), &ni, buf.as_mut_ptr(), &ni, wr.as_mut_ptr(),
            wi.as_mut_ptr(), std::ptr::null_mut(), &ni, vr.as_mut_ptr(), &ni,
            work.as_mut_ptr(), &lwork, &mut info,
        );
    }
    if info != 0 {
        return Err(GspError::Lapack { routine: "dgeev", info });
    }

    let values = Array1::from_iter((0..n).map(|k| Complex64::new(wr[k], wi[k])));
    let mut vectors = Array2::<Complex64>::zeros((n, n));
    let mut j = 0;
    while j < n {
        if wi[j] == 0.0 {
            for i in 0..n {
                vectors[(i, j)] = Complex64::new(vr[i + j * n], 0.0);
            }
            j += 1;
        } else {
            // Conjugate pair: column j holds the real part, column j+1 the
            // imaginary part of the eigenvector for eigenvalue wr + i*wi.
            for i in 0..n {
                let re = vr[i + j * n];
                let im = vr[i + (j + 1) * n];
                vectors[(i, j)] = Complex64::new(re, im);
                vectors[(i, j + 1)] = Complex64::new(re, -im);
            }
            j += 2;
        }
    }
    Ok((values, vectors))
}

/// Solve the linear system `a x = b` for each column of `b`.
pub fn solve(a: &ArrayView2<f64>, b: &ArrayView2<f64>) -> Result<Array2<f64>> {
    let n = square_dim(a)?;
    if b.nrows() != n {
        return Err(GspError::DimensionMismatch { expected: n, got: b.nrows() });
    }
    let nrhs = b.ncols();
    let (ni, nrhsi) = (n as i32, nrhs as i32);
    let mut abuf = colmajor(a);
    let mut bbuf = colmajor(b);
    let mut ipiv = vec![0i32; n];
    let mut info = 0i32;
    unsafe {
        dgesv_(&ni, &nrhsi, abuf.as_mut_ptr(), &ni, ipiv.as_mut_ptr(), bbuf.as_mut_ptr(), &ni, &mut info);
    }
    if info != 0 {
        return Err(GspError::Lapack { routine: "dgesv", info });
    }
    Ok(Array2::from_shape_vec((n, nrhs).f(), bbuf).expect("dgesv output shape"))
}

/// Solve `a x = b` for a single right-hand side.
pub fn solve_vec(a: &ArrayView2<f64>, b: &Array1<f64>) -> Result<Array1<f64>> {
    let b2 = b.view().insert_axis(ndarray::Axis(1));
    let x = solve(a, &b2.view())?;
    Ok(x.column(0).to_owned())
}

/// Solve the complex linear system `a x = b` for each column of `b`.
pub fn solve_complex(a: &ArrayView2<Complex64>, b: &ArrayView2<Complex64>) -> Result<Array2<Complex64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(GspError::DimensionMismatch { expected: n, got: a.ncols() });
    }
    if b.nrows() != n {
        return Err(GspError::DimensionMismatch { expected: n, got: b.nrows() });
    }
    let nrhs = b.ncols();
    let (ni, nrhsi) = (n as i32, nrhs as i32);
    let mut abuf = colmajor_c(a);
    let mut bbuf = colmajor_c(b);
    let mut ipiv = vec![0i32; n];
    let mut info = 0i32;
    unsafe {
        zgesv_(&ni, &nrhsi, abuf.as_mut_ptr(), &ni, ipiv.as_mut_ptr(), bbuf.as_mut_ptr(), &ni, &mut info);
    }
    if info != 0 {
        return Err(GspError::Lapack { routine: "zgesv", info });
    }
    Ok(Array2::from_shape_vec((n, nrhs).f(), bbuf).expect("zgesv output shape"))
}

/// Inverse of a complex matrix, via `zgesv` against the identity.
pub fn inv_complex(a: &ArrayView2<Complex64>) -> Result<Array2<Complex64>> {
    let n = a.nrows();
    let eye = Array2::from_diag(&Array1::from_elem(n, Complex64::new(1.0, 0.0)));
    solve_complex(a, &eye.view())
}

/// Singular values of a general real matrix, descending.
pub fn singular_values(a: &ArrayView2<f64>) -> Result<Array1<f64>> {
    let (m, n) = (a.nrows(), a.ncols());
    // Passing the row-major buffer with swapped dimensions hands LAPACK the
    // transpose, which has the same singular values.
    let mut buf: Vec<f64> = a.iter().copied().collect();
    let (mf, nf) = (n as i32, m as i32);
    let mut s = vec![0.0f64; m.min(n)];
    let mut info = 0i32;
    let mut wkopt = 0.0f64;
    let query = -1i32;
    unsafe {
        dgesvd_(
            b"N".as_ptr(), b"N".as_ptr(), &mf, &nf, buf.as_mut_ptr(), &mf, s.as_mut_ptr(),
            std::ptr::null_mut(), &1, std::ptr::null_mut(), &1, &mut wkopt, &query, &mut info,
        );
    }
    if info != 0 {
        return Err(GspError::Lapack { routine: "dgesvd", info });
    }
    let lwork = wkopt as i32;
    let mut work = vec![0.0f64; lwork as usize];
    unsafe {
        dgesvd_(
            b"N".as_ptr(), b"N".as_ptr(), &mf, &nf, buf.as_mut_ptr(), &mf, s.as_mut_ptr(),
            std::ptr::null_mut(), &1, std::ptr::null_mut(), &1, work.as_mut_ptr(), &lwork, &mut info,
        );
    }
    if info != 0 {
        return Err(GspError::Lapack { routine: "dgesvd", info });
    }
    Ok(Array1::from_vec(s))
}

/// 2-norm condition number of a real matrix.
pub fn cond_2(a: &ArrayView2<f64>) -> Result<f64> {
    let s = singular_values(a)?;
    let smax = s[0];
    let smin = s[s.len() - 1];
    Ok(if smin == 0.0 { f64::INFINITY } else { smax / smin })
}

/// 2-norm condition number of a complex matrix, via the real embedding
/// [[Re, -Im], [Im, Re]] which shares its singular values (each doubled).
pub fn cond_2_complex(a: &ArrayView2<Complex64>) -> Result<f64> {
    let n = a.nrows();
    let mut emb = Array2::<f64>::zeros((2 * n, 2 * n));
    for i in 0..n {
        for j in 0..a.ncols() {
            let z = a[(i, j)];
            emb[(i, j)] = z.re;
            emb[(i, j + n)] = -z.im;
            emb[(i + n, j)] = z.im;
            emb[(i + n, j + n)] = z.re;
        }
    }
    cond_2(&emb.view())
}

/// Result of a least-squares solve.
pub struct Lstsq {
    pub x: Array1<f64>,
    /// Squared 2-norm of the residual `a x - b`.
    pub residual_sq: f64,
    /// Numerical rank at the given `rcond`.
    pub rank: usize,
}

/// Minimum-norm least-squares solution of `a x = b` via SVD (dgelsd).
///
/// Singular values below `rcond * s_max` are treated as zero, which makes the
/// solve a truncated-spectrum pseudo-inverse for rank-deficient systems.
pub fn lstsq(a: &ArrayView2<f64>, b: &Array1<f64>, rcond: f64) -> Result<Lstsq> {
    let (m, n) = (a.nrows(), a.ncols());
    if b.len() != m {
        return Err(GspError::DimensionMismatch { expected: m, got: b.len() });
    }
    let (mi, ni) = (m as i32, n as i32);
    let mut abuf = colmajor(a);
    let ldb = m.max(n);
    let mut bbuf = vec![0.0f64; ldb];
    bbuf[..m].copy_from_slice(b.as_slice().expect("contiguous rhs"));
    let mut s = vec![0.0f64; m.min(n)];
    let mut rank = 0i32;
    let mut info = 0i32;
    let nrhs = 1i32;
    let ldbi = ldb as i32;

    let mut wkopt = 0.0f64;
    let mut iwkopt = 0i32;
    let query = -1i32;
    unsafe {
        dgelsd_(
            &mi, &ni, &nrhs, abuf.as_mut_ptr(), &mi, bbuf.as_mut_ptr(), &ldbi, s.as_mut_ptr(),
            &rcond, &mut rank, &mut wkopt, &query, &mut iwkopt, &mut info,
        );
    }
    if info != 0 {
        return Err(GspError::Lapack { routine: "dgelsd", info });
    }
    let lwork = wkopt as i32;
    let mut work = vec![0.0f64; lwork as usize];
    let mut iwork = vec![0i32; iwkopt.max(1) as usize];
    unsafe {
        dgelsd_(
            &mi, &ni, &nrhs, abuf.as_mut_ptr(), &mi, bbuf.as_mut_ptr(), &ldbi, s.as_mut_ptr(),
            &rcond, &mut rank, work.as_mut_ptr(), &lwork, iwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(GspError::Lapack { routine: "dgelsd", info });
    }
    let x = Array1::from_iter(bbuf[..n].iter().copied());
    let resid = a.dot(&x) - b;
    Ok(Lstsq { x, residual_sq: resid.dot(&resid), rank: rank as usize })
}

/// Frobenius norm of a real matrix.
pub fn fro_norm(a: &ArrayView2<f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest absolute entry difference between two matrices.
pub fn max_abs_diff(a: &ArrayView2<f64>, b: &ArrayView2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn square_dim(a: &ArrayView2<f64>) -> Result<usize> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(GspError::DimensionMismatch { expected: n, got: a.ncols() });
    }
    Ok(n)
}
