//! Dense linear algebra used by the ensemble and equilibrium solvers:
//! Hermitian Cholesky (f64 and double-double), triangular inversion, a
//! partial-pivot LU solve, and a complex Hessenberg QR eigensolver for
//! companion matrices.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::num::{CDd, Dd};

/// Row-major square complex matrix.
#[derive(Clone, Debug)]
pub struct CMat {
    pub n: usize,
    pub a: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(n: usize) -> CMat {
        CMat {
            n,
            a: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.a[i * self.n + j] = v;
    }
}

/// Upper Cholesky factor U with G = U^H U, for a Hermitian positive-definite G.
/// Returns the factor and the number of successful pivots on failure.
pub fn cholesky_upper(g: &CMat) -> Result<CMat> {
    let n = g.n;
    let mut u = CMat::zeros(n);
    for j in 0..n {
        let mut s = g.at(j, j).re;
        for k in 0..j {
            s -= u.at(k, j).norm_sqr();
        }
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::NotPositiveDefinite { rank: j, dim: n });
        }
        let d = s.sqrt();
        u.set(j, j, Complex64::new(d, 0.0));
        for i in j + 1..n {
            let mut v = g.at(j, i);
            for k in 0..j {
                v -= u.at(k, j).conj() * u.at(k, i);
            }
            u.set(j, i, v / d);
        }
    }
    Ok(u)
}

/// Double-double upper Cholesky for the extended-precision path.
pub fn cholesky_upper_dd(g: &[CDd], n: usize) -> Result<Vec<CDd>> {
    let mut u = vec![CDd::ZERO; n * n];
    for j in 0..n {
        let mut s = g[j * n + j].re;
        for k in 0..j {
            s = s.sub(u[k * n + j].norm_sqr());
        }
        if s.hi <= 0.0 || !s.hi.is_finite() {
            return Err(Error::NotPositiveDefinite { rank: j, dim: n });
        }
        let d = s.sqrt();
        u[j * n + j] = CDd { re: d, im: Dd::ZERO };
        for i in j + 1..n {
            let mut v = g[j * n + i];
            for k in 0..j {
                v = v.sub(u[k * n + j].conj().mul(u[k * n + i]));
            }
            let dn = d.mul(d); // divide by real d: v / d
            let _ = dn;
            u[j * n + i] = CDd {
                re: v.re.div(d),
                im: v.im.div(d),
            };
        }
    }
    Ok(u)
}

/// Inverse of an upper-triangular matrix (also upper triangular).
pub fn invert_upper(u: &CMat) -> CMat {
    let n = u.n;
    let mut t = CMat::zeros(n);
    for j in 0..n {
        t.set(j, j, u.at(j, j).inv());
        for i in (0..j).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for k in i + 1..=j {
                s += u.at(i, k) * t.at(k, j);
            }
            t.set(i, j, -s / u.at(i, i));
        }
    }
    t
}

/// Solve A x = b for dense real A by partial-pivot LU; A is consumed.
/// Elimination updates run in parallel by row.
pub fn lu_solve(mut a: Vec<f64>, n: usize, mut b: Vec<f64>) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    for col in 0..n {
        // pivot
        let mut p = col;
        let mut best = a[col * n + col].abs();
        for r in col + 1..n {
            let v = a[r * n + col].abs();
            if v > best {
                best = v;
                p = r;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return Err(Error::NotPositiveDefinite { rank: col, dim: n });
        }
        if p != col {
            for k in 0..n {
                a.swap(col * n + k, p * n + k);
            }
            b.swap(col, p);
        }
        let piv = a[col * n + col];
        let (top, rest) = a.split_at_mut((col + 1) * n);
        let pivot_row = &top[col * n..col * n + n];
        let b_col = b[col];
        let b_rest = &mut b[col + 1..];
        rest.par_chunks_mut(n)
            .zip(b_rest.par_iter_mut())
            .for_each(|(row, bi)| {
                let f = row[col] / piv;
                if f != 0.0 {
                    for k in col..n {
                        row[k] -= f * pivot_row[k];
                    }
                    *bi -= f * b_col;
                }
            });
    }
    // back substitution
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[i * n + k] * x[k];
        }
        x[i] = s / a[i * n + i];
    }
    Ok(x)
}

/// Eigenvalues of a complex upper-Hessenberg matrix by shifted QR with Givens
/// rotations. Used on balanced companion matrices as the root-finder fallback
/// and as an independent oracle in tests.
pub fn hessenberg_eigenvalues(mut h: CMat, max_sweeps: usize) -> Result<Vec<Complex64>> {
    let n = h.n;
    let mut eigs = Vec::with_capacity(n);
    let mut hi = n; // active block is 0..hi
    let mut sweeps = 0;
    while hi > 0 {
        if hi == 1 {
            eigs.push(h.at(0, 0));
            hi = 0;
            continue;
        }
        // deflate
        let mut deflated = false;
        for k in (1..hi).rev() {
            let sub = h.at(k, k - 1).norm();
            let scale = h.at(k, k).norm() + h.at(k - 1, k - 1).norm();
            if sub <= 1e-14 * scale.max(1e-300) {
                if k == hi - 1 {
                    eigs.push(h.at(hi - 1, hi - 1));
                    hi -= 1;
                } else {
                    // split: handle the trailing block recursively by zeroing
                    h.set(k, k - 1, Complex64::new(0.0, 0.0));
                }
                deflated = true;
                break;
            }
        }
        if deflated {
            continue;
        }
        sweeps += 1;
        if sweeps > max_sweeps {
            return Err(Error::RootFinding(format!(
                "QR did not deflate after {max_sweeps} sweeps (block {hi})"
            )));
        }
        // Wilkinson shift from the trailing 2x2 of the active block
        let a = h.at(hi - 2, hi - 2);
        let b = h.at(hi - 2, hi - 1);
        let c = h.at(hi - 1, hi - 2);
        let d = h.at(hi - 1, hi - 1);
        let tr = a + d;
        let det = a * d - b * c;
        let disc = (tr * tr - 4.0 * det).sqrt();
        let l1 = (tr + disc) / 2.0;
        let l2 = (tr - disc) / 2.0;
        let shift = if (l1 - d).norm() < (l2 - d).norm() { l1 } else { l2 };
        for i in 0..hi {
            h.set(i, i, h.at(i, i) - shift);
        }
        // forward sweep: R = G_{hi-2} ... G_0 (H - shift I), with
        // G_k = [[c, s], [-conj(s), c]] acting on rows (k, k+1), c real.
        let mut rots: Vec<(f64, Complex64)> = Vec::with_capacity(hi - 1);
        for k in 0..hi - 1 {
            let f = h.at(k, k);
            let g = h.at(k + 1, k);
            let r = (f.norm_sqr() + g.norm_sqr()).sqrt();
            let (cs, sn) = if r < 1e-300 {
                (1.0, Complex64::new(0.0, 0.0))
            } else if f.norm() < 1e-300 {
                (0.0, g.conj() / g.norm())
            } else {
                ((f.norm()) / r, (f / f.norm()) * g.conj() / r)
            };
            for j in k..hi {
                let hk = h.at(k, j);
                let hk1 = h.at(k + 1, j);
                h.set(k, j, cs * hk + sn * hk1);
                h.set(k + 1, j, -sn.conj() * hk + cs * hk1);
            }
            rots.push((cs, sn));
        }
        // H' = R Q^H... right-multiply columns (k, k+1) by G_k^H, then re-add shift
        for (k, &(cs, sn)) in rots.iter().enumerate() {
            let top = (k + 2).min(hi);
            for i in 0..top {
                let ck = h.at(i, k);
                let ck1 = h.at(i, k + 1);
                h.set(i, k, cs * ck + sn.conj() * ck1);
                h.set(i, k + 1, -sn * ck + cs * ck1);
            }
        }
        for i in 0..hi {
            h.set(i, i, h.at(i, i) + shift);
        }
    }
    Ok(eigs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cholesky_and_inverse_roundtrip() {
        // G = A^H A for a small random-ish A
        let n = 5;
        let mut a = CMat::zeros(n);
        let mut st = 1u64;
        let mut rnd = || {
            st = st.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((st >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for i in 0..n {
            for j in 0..n {
                a.set(i, j, Complex64::new(rnd(), rnd()));
            }
            a.set(i, i, a.at(i, i) + 3.0);
        }
        let mut g = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    s += a.at(k, i).conj() * a.at(k, j);
                }
                g.set(i, j, s);
            }
        }
        let u = cholesky_upper(&g).unwrap();
        // U^H U = G
        for i in 0..n {
            for j in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    s += u.at(k, i).conj() * u.at(k, j);
                }
                assert_abs_diff_eq!((s - g.at(i, j)).norm(), 0.0, epsilon = 1e-12);
            }
        }
        // T = U^{-1}: T^H G T = I
        let t = invert_upper(&u);
        for i in 0..n {
            for j in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    for l in 0..n {
                        s += t.at(k, i).conj() * g.at(k, l) * t.at(l, j);
                    }
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!((s - expect).norm(), 0.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn lu_solves_small_system() {
        let a = vec![2.0, 1.0, -1.0, -3.0, -1.0, 2.0, -2.0, 1.0, 2.0];
        let b = vec![8.0, -11.0, -3.0];
        let x = lu_solve(a, 3, b).unwrap();
        assert_abs_diff_eq!(x[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[2], -1.0, epsilon = 1e-12);
    }
}
