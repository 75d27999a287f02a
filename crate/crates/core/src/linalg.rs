//! Small dense matrix helpers for metric tensors.
//!
//! Everything here works on row-major `Vec<f64>` buffers of dimension at most
//! eight; the charts in this crate never go beyond dimension four. No external
//! linear algebra is pulled in for matrices this small.

/// Row-major square matrix access.
#[inline]
pub fn at(m: &[f64], n: usize, i: usize, j: usize) -> f64 {
    m[i * n + j]
}

/// Maximum absolute asymmetry |m_ij - m_ji|.
pub fn asymmetry(m: &[f64], n: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((at(m, n, i, j) - at(m, n, j, i)).abs());
        }
    }
    worst
}

/// Cholesky factorization of a symmetric positive-definite matrix.
///
/// Returns the lower factor L with m = L Lᵀ, or `None` when a pivot is not
/// strictly positive (the matrix is not positive definite).
pub fn cholesky(m: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = at(m, n, i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Determinant of a symmetric positive-definite matrix via Cholesky.
pub fn spd_det(m: &[f64], n: usize) -> Option<f64> {
    let l = cholesky(m, n)?;
    let mut d = 1.0;
    for i in 0..n {
        d *= l[i * n + i];
    }
    Some(d * d)
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn inverse(m: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut a = m.to_vec();
    let mut inv = identity(n);
    for col in 0..n {
        let mut pivot = col;
        for r in (col + 1)..n {
            if a[r * n + col].abs() > a[pivot * n + col].abs() {
                pivot = r;
            }
        }
        if a[pivot * n + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for c in 0..n {
                a.swap(col * n + c, pivot * n + c);
                inv.swap(col * n + c, pivot * n + c);
            }
        }
        let d = a[col * n + col];
        for c in 0..n {
            a[col * n + c] /= d;
            inv[col * n + c] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = a[r * n + col];
                if f != 0.0 {
                    for c in 0..n {
                        a[r * n + c] -= f * a[col * n + c];
                        inv[r * n + c] -= f * inv[col * n + c];
                    }
                }
            }
        }
    }
    Some(inv)
}

pub fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

/// Matrix product c = a b for n×n row-major buffers.
pub fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik != 0.0 {
                for j in 0..n {
                    c[i * n + j] += aik * b[k * n + j];
                }
            }
        }
    }
    c
}

/// Solve the k×k system a x = b in place; `a` is clobbered.
pub fn solve(a: &mut [f64], b: &mut [f64], k: usize) -> Option<()> {
    for col in 0..k {
        let mut pivot = col;
        for r in (col + 1)..k {
            if a[r * k + col].abs() > a[pivot * k + col].abs() {
                pivot = r;
            }
        }
        if a[pivot * k + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for c in 0..k {
                a.swap(col * k + c, pivot * k + c);
            }
            b.swap(col, pivot);
        }
        let d = a[col * k + col];
        for c in col..k {
            a[col * k + c] /= d;
        }
        b[col] /= d;
        for r in 0..k {
            if r != col {
                let f = a[r * k + col];
                if f != 0.0 {
                    for c in col..k {
                        a[r * k + c] -= f * a[col * k + c];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some(())
}

/// g-inner product xᵀ g y.
pub fn g_dot(g: &[f64], n: usize, x: &[f64], y: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += x[i] * at(g, n, i, j) * y[j];
        }
    }
    s
}

/// Gram-Schmidt on the coordinate basis in fixed axis order.
///
/// Returns E (columns are the frame vectors) with Eᵀ g E = identity.
pub fn gram_schmidt_frame(g: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    for a in 0..n {
        let mut v = vec![0.0; n];
        v[a] = 1.0;
        for e in &cols {
            let c = g_dot(g, n, &v, e);
            for i in 0..n {
                v[i] -= c * e[i];
            }
        }
        let norm2 = g_dot(g, n, &v, &v);
        if norm2 <= 0.0 {
            return None;
        }
        let norm = norm2.sqrt();
        for x in v.iter_mut() {
            *x /= norm;
        }
        cols.push(v);
    }
    let mut e = vec![0.0; n * n];
    for (a, col) in cols.iter().enumerate() {
        for i in 0..n {
            e[i * n + a] = col[i];
        }
    }
    Some(e)
}
