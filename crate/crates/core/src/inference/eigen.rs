//! Eigenvalues of small dense nonsymmetric matrices.
//!
//! Balancing, Householder reduction to upper Hessenberg form, then the
//! Francis double-shift QR iteration on the Hessenberg matrix (eigenvalues
//! only). Transition matrices here are at most a few thousand states.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

const RADIX: f64 = 2.0;
const MAX_ITERATIONS: usize = 60;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigenError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("QR iteration did not converge for eigenvalue {index}")]
    NoConvergence { index: usize },
    #[error("timescale is only defined for real eigenvalues in (0, 1), got {0}")]
    Timescale(Complex64),
}

/// All eigenvalues of `t`, sorted by decreasing modulus (ties: larger real
/// part first, then larger imaginary part).
pub fn eigenvalues(t: &DMatrix<f64>) -> Result<Vec<Complex64>, EigenError> {
    let n = t.nrows();
    if t.ncols() != n {
        return Err(EigenError::NotSquare {
            rows: n,
            cols: t.ncols(),
        });
    }
    if t.iter().any(|x| !x.is_finite()) {
        return Err(EigenError::NonFinite);
    }
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| t[(i, j)]).collect()).collect();
    balance(&mut a);
    hessenberg(&mut a);
    let mut out = hqr(&mut a)?;
    out.sort_by(|x, y| {
        y.norm()
            .total_cmp(&x.norm())
            .then(y.re.total_cmp(&x.re))
            .then(y.im.total_cmp(&x.im))
    });
    Ok(out)
}

/// Implied timescale `-τ / ln λ` of a real eigenvalue in `(0, 1)`.
pub fn timescale(lambda: Complex64, tau_lag: f64) -> Result<f64, EigenError> {
    if lambda.im != 0.0 || !(lambda.re > 0.0 && lambda.re < 1.0) {
        return Err(EigenError::Timescale(lambda));
    }
    Ok(-tau_lag / lambda.re.ln())
}

/// Diagonal similarity by powers of two so rows and columns have comparable
/// norms.
fn balance(a: &mut [Vec<f64>]) {
    let n = a.len();
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for x in a[i].iter_mut() {
                    *x *= g;
                }
                for row in a.iter_mut() {
                    row[i] *= f;
                }
            }
        }
    }
}

/// Orthogonal reduction to upper Hessenberg form; entries below the
/// subdiagonal are zeroed.
fn hessenberg(a: &mut [Vec<f64>]) {
    let n = a.len();
    if n < 3 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![0.0; n];
    for m in 1..high {
        let scale: f64 = (m..=high).map(|i| a[i][m - 1].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut h = 0.0;
        for i in (m..=high).rev() {
            ort[i] = a[i][m - 1] / scale;
            h += ort[i] * ort[i];
        }
        let mut g = h.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        h -= ort[m] * g;
        ort[m] -= g;
        for j in m..n {
            let f: f64 = (m..=high).rev().map(|i| ort[i] * a[i][j]).sum::<f64>() / h;
            for i in m..=high {
                a[i][j] -= f * ort[i];
            }
        }
        for row in a.iter_mut() {
            let f: f64 = (m..=high).rev().map(|j| ort[j] * row[j]).sum::<f64>() / h;
            for j in m..=high {
                row[j] -= f * ort[j];
            }
        }
        ort[m] *= scale;
        a[m][m - 1] = scale * g;
    }
    for (i, row) in a.iter_mut().enumerate() {
        for x in row.iter_mut().take(i.saturating_sub(1)) {
            *x = 0.0;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (destroys `a`).
fn hqr(a: &mut [Vec<f64>]) -> Result<Vec<Complex64>, EigenError> {
    let n = a.len();
    let mut wr = vec![Complex64::new(0.0, 0.0); n];
    if n == 0 {
        return Ok(wr);
    }
    let eps = f64::EPSILON;
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            // look for a single small subdiagonal element
            let mut l = nu;
            while l > 0 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() <= eps * s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[nu][nu];
            if l == nu {
                wr[nu] = Complex64::new(x + t, 0.0);
                nn -= 1;
                break;
            }
            let mut y = a[nu - 1][nu - 1];
            let mut w = a[nu][nu - 1] * a[nu - 1][nu];
            if l == nu - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    let z = p + z.copysign(p);
                    wr[nu - 1] = Complex64::new(x + z, 0.0);
                    wr[nu] = Complex64::new(if z != 0.0 { x - w / z } else { x + z }, 0.0);
                } else {
                    wr[nu] = Complex64::new(x + p, -z);
                    wr[nu - 1] = wr[nu].conj();
                }
                nn -= 2;
                break;
            }
            if its == MAX_ITERATIONS {
                return Err(EigenError::NoConvergence { index: nu });
            }
            if its > 0 && its % 10 == 0 {
                // exceptional shift
                t += x;
                for (i, row) in a.iter_mut().enumerate().take(nu + 1) {
                    row[i] -= x;
                }
                let s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            // look for two consecutive small subdiagonal elements
            let mut m = nu - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[m][m];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - rr - ss;
                r = a[m + 2][m + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in m..nu - 1 {
                a[i + 2][i] = 0.0;
                if i != m {
                    a[i + 2][i - 1] = 0.0;
                }
            }
            // double QR step on rows l..=nn and columns m..=nn
            for k in m..nu {
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = if k + 1 != nu { a[k + 2][k - 1] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m {
                        a[k][k - 1] = -a[k][k - 1];
                    }
                } else {
                    a[k][k - 1] = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;
                for j in k..=nu {
                    let mut pp = a[k][j] + q * a[k + 1][j];
                    if k + 1 != nu {
                        pp += r * a[k + 2][j];
                        a[k + 2][j] -= pp * z;
                    }
                    a[k + 1][j] -= pp * y;
                    a[k][j] -= pp * x;
                }
                let mmin = nu.min(k + 3);
                for row in a.iter_mut().take(mmin + 1).skip(l) {
                    let mut pp = x * row[k] + y * row[k + 1];
                    if k + 1 != nu {
                        pp += z * row[k + 2];
                        row[k + 2] -= pp * r;
                    }
                    row[k + 1] -= pp * q;
                    row[k] -= pp;
                }
            }
            if l + 1 >= nu {
                break;
            }
        }
    }
    Ok(wr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn small_cases() {
        let id = DMatrix::identity(2, 2);
        assert_eq!(eigenvalues(&id).unwrap(), vec![Complex64::new(1.0, 0.0); 2]);
        let t = DMatrix::from_row_slice(2, 2, &[0.7, 0.3, 0.3, 0.7]);
        let ev = eigenvalues(&t).unwrap();
        assert!(close(ev[0], Complex64::new(1.0, 0.0), 1e-14));
        assert!(close(ev[1], Complex64::new(0.4, 0.0), 1e-14));
        assert!(eigenvalues(&DMatrix::<f64>::zeros(0, 0)).unwrap().is_empty());
    }

    #[test]
    fn rotation_has_complex_pair() {
        // cyclic permutation of 3 states: cube roots of unity
        let t = DMatrix::from_row_slice(3, 3, &[0., 1., 0., 0., 0., 1., 1., 0., 0.]);
        let ev = eigenvalues(&t).unwrap();
        assert!(close(ev[0], Complex64::new(1.0, 0.0), 1e-12));
        let h = 3f64.sqrt() / 2.0;
        assert!(close(ev[1], Complex64::new(-0.5, h), 1e-12));
        assert!(close(ev[2], Complex64::new(-0.5, -h), 1e-12));
    }

    #[test]
    fn timescale_formula() {
        let lam = Complex64::new((-1.0f64).exp(), 0.0);
        assert_eq!(timescale(lam, 500.0).unwrap(), 500.0);
        assert!(timescale(Complex64::new(1.0, 0.0), 1.0).is_err());
        assert!(timescale(Complex64::new(0.5, 0.1), 1.0).is_err());
    }
}
