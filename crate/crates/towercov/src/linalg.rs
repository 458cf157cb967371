//! Hot-path complex matrix products.
//!
//! nalgebra routes `f32`/`f64` matrix multiplication through SIMD kernels
//! but falls back to a generic loop for complex scalars, which is ~3x slower
//! on the K×M products that dominate each Monte-Carlo drop. These wrappers
//! call matrixmultiply's `zgemm` directly on nalgebra's column-major storage
//! (`Complex64` is `repr(C)` `[re, im]`, layout-compatible with the kernel's
//! `[f64; 2]`). The kernel ignores conjugation flags, so adjoints are done
//! with one explicit conjugated copy plus stride-transposition.

use matrixmultiply::{zgemm, CGemmOption};
use nalgebra::DMatrix;
use num_complex::Complex64;

const _: () = assert!(std::mem::size_of::<Complex64>() == std::mem::size_of::<[f64; 2]>());

/// `A^H * B` for column-major `A` (n×p) and `B` (n×q), yielding p×q.
pub(crate) fn adjoint_mul(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    assert_eq!(a.nrows(), b.nrows(), "inner dimensions must agree");
    let (n, p) = a.shape();
    let q = b.ncols();
    let ac = a.conjugate();
    let mut c = DMatrix::<Complex64>::zeros(p, q);
    if n == 0 || p == 0 || q == 0 {
        return c;
    }
    // A^H viewed through strides: entry (i, j) of conj(A)^T sits at column i,
    // row j of `ac`, i.e. row stride = ac's column stride, column stride = 1.
    unsafe {
        zgemm(
            CGemmOption::Standard,
            CGemmOption::Standard,
            p,
            n,
            q,
            [1.0, 0.0],
            ac.as_ptr() as *const [f64; 2],
            n as isize,
            1,
            b.as_ptr() as *const [f64; 2],
            1,
            n as isize,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            1,
            p as isize,
        );
    }
    c
}

/// Plain `A * B` for column-major `A` (m×k) and `B` (k×n).
pub(crate) fn mul(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions must agree");
    let (m, k) = a.shape();
    let n = b.ncols();
    let mut c = DMatrix::<Complex64>::zeros(m, n);
    if m == 0 || k == 0 || n == 0 {
        return c;
    }
    unsafe {
        zgemm(
            CGemmOption::Standard,
            CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    c
}
