//! Small dense second-order tensors for `D = 2` or `D = 3`.
//!
//! Row index is the first tensor index: `a[i][j] = A_ij`.

pub type Mat<const D: usize> = [[f64; D]; D];

#[inline]
pub fn zero<const D: usize>() -> Mat<D> {
    [[0.0; D]; D]
}

#[inline]
pub fn identity<const D: usize>() -> Mat<D> {
    let mut m = zero::<D>();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

#[inline]
pub fn det<const D: usize>(a: &Mat<D>) -> f64 {
    match D {
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        3 => {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        }
        _ => unreachable!("tensors are 1, 2 or 3 dimensional"),
    }
}

/// Inverse via the adjugate. The caller checks the determinant.
#[inline]
pub fn inverse<const D: usize>(a: &Mat<D>) -> Mat<D> {
    let d = det(a);
    let inv_d = 1.0 / d;
    let mut r = zero::<D>();
    match D {
        1 => r[0][0] = inv_d,
        2 => {
            r[0][0] = a[1][1] * inv_d;
            r[0][1] = -a[0][1] * inv_d;
            r[1][0] = -a[1][0] * inv_d;
            r[1][1] = a[0][0] * inv_d;
        }
        3 => {
            r[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) * inv_d;
            r[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) * inv_d;
            r[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) * inv_d;
            r[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) * inv_d;
            r[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) * inv_d;
            r[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) * inv_d;
            r[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) * inv_d;
            r[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) * inv_d;
            r[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) * inv_d;
        }
        _ => unreachable!("tensors are 1, 2 or 3 dimensional"),
    }
    r
}

#[inline]
pub fn transpose<const D: usize>(a: &Mat<D>) -> Mat<D> {
    let mut r = zero::<D>();
    for i in 0..D {
        for j in 0..D {
            r[i][j] = a[j][i];
        }
    }
    r
}

/// `a · b`
#[inline]
pub fn mul<const D: usize>(a: &Mat<D>, b: &Mat<D>) -> Mat<D> {
    let mut r = zero::<D>();
    for i in 0..D {
        for k in 0..D {
            let aik = a[i][k];
            for j in 0..D {
                r[i][j] += aik * b[k][j];
            }
        }
    }
    r
}

/// `a · bᵀ`
#[inline]
pub fn mul_bt<const D: usize>(a: &Mat<D>, b: &Mat<D>) -> Mat<D> {
    let mut r = zero::<D>();
    for i in 0..D {
        for j in 0..D {
            let mut s = 0.0;
            for k in 0..D {
                s += a[i][k] * b[j][k];
            }
            r[i][j] = s;
        }
    }
    r
}

/// `aᵀ · b`
#[inline]
pub fn mul_at<const D: usize>(a: &Mat<D>, b: &Mat<D>) -> Mat<D> {
    let mut r = zero::<D>();
    for k in 0..D {
        for i in 0..D {
            let aki = a[k][i];
            for j in 0..D {
                r[i][j] += aki * b[k][j];
            }
        }
    }
    r
}

#[inline]
pub fn trace<const D: usize>(a: &Mat<D>) -> f64 {
    (0..D).map(|i| a[i][i]).sum()
}

/// Symmetric part `½(a + aᵀ)`.
#[inline]
pub fn sym<const D: usize>(a: &Mat<D>) -> Mat<D> {
    let mut r = zero::<D>();
    for i in 0..D {
        for j in 0..D {
            r[i][j] = 0.5 * (a[i][j] + a[j][i]);
        }
    }
    r
}

#[inline]
pub fn add<const D: usize>(a: &Mat<D>, b: &Mat<D>) -> Mat<D> {
    let mut r = *a;
    for i in 0..D {
        for j in 0..D {
            r[i][j] += b[i][j];
        }
    }
    r
}

#[inline]
pub fn scale<const D: usize>(a: &Mat<D>, s: f64) -> Mat<D> {
    let mut r = *a;
    for row in r.iter_mut() {
        for v in row.iter_mut() {
            *v *= s;
        }
    }
    r
}

/// Double contraction `a : b`.
#[inline]
pub fn ddot<const D: usize>(a: &Mat<D>, b: &Mat<D>) -> f64 {
    let mut s = 0.0;
    for i in 0..D {
        for j in 0..D {
            s += a[i][j] * b[i][j];
        }
    }
    s
}

/// Largest absolute entry.
pub fn max_abs<const D: usize>(a: &Mat<D>) -> f64 {
    a.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Number of independent entries of a symmetric `dim × dim` tensor.
pub const fn sym_len(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

/// Index pairs of the symmetric storage order: diagonal first, then
/// `23, 13, 12` in 3D and `12` in 2D.
pub const fn sym_pairs(dim: usize) -> &'static [(usize, usize)] {
    match dim {
        2 => &[(0, 0), (1, 1), (0, 1)],
        _ => &[(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)],
    }
}

/// Pack the upper triangle of a symmetric tensor into `out`.
#[inline]
pub fn pack_sym<const D: usize>(a: &Mat<D>, out: &mut [f64]) {
    for (k, &(i, j)) in sym_pairs(D).iter().enumerate() {
        out[k] = a[i][j];
    }
}

#[inline]
pub fn unpack_sym<const D: usize>(packed: &[f64]) -> Mat<D> {
    let mut r = zero::<D>();
    for (k, &(i, j)) in sym_pairs(D).iter().enumerate() {
        r[i][j] = packed[k];
        r[j][i] = packed[k];
    }
    r
}
