//! Complex QZ algorithm for the pencil `μ·A − λ·B`.
//!
//! Hessenberg-triangular reduction followed by single-shift implicit QZ
//! sweeps built from Givens rotations. Infinite eigenvalues are deflated by
//! chasing zero diagonal entries of the triangular factor to the bottom of
//! the active block.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::dense::{givens, householder_qr, re, Matrix, C64, EPS};
use crate::error::{Error, Result};

/// `Q^* A Z = S`, `Q^* B Z = T` with `S`, `T` upper triangular.
#[derive(Clone, Debug)]
pub struct GeneralizedSchur {
    pub s: Matrix,
    pub t: Matrix,
    pub q: Matrix,
    pub z: Matrix,
}

impl GeneralizedSchur {
    /// Eigenvalue pairs `(λ, μ) = (S_kk, T_kk)`, unnormalized.
    pub fn pairs(&self) -> Vec<(C64, C64)> {
        (0..self.s.rows()).map(|k| (self.s[(k, k)], self.t[(k, k)])).collect()
    }

    /// Right eigenvector of the original pencil for the `k`-th diagonal pair.
    pub fn right_vector(&self, k: usize) -> Vec<C64> {
        let m = self.shifted_triangle(k);
        let tiny = self.tiny(&m);
        let mut v = vec![C64::zero(); m.rows()];
        v[k] = re(1.0);
        for j in (0..k).rev() {
            let s: C64 = (j + 1..=k).map(|l| m[(j, l)] * v[l]).sum();
            let mut piv = m[(j, j)];
            if piv.norm() < tiny {
                piv = re(tiny);
            }
            v[j] = -s / piv;
            rescale(&mut v);
        }
        self.z.mul_vec(&v)
    }

    /// Left eigenvector `y` (so that `y^* (μA − λB) = 0`).
    pub fn left_vector(&self, k: usize) -> Vec<C64> {
        let m = self.shifted_triangle(k);
        let tiny = self.tiny(&m);
        let nn = m.rows();
        // wc holds conj(w).
        let mut wc = vec![C64::zero(); nn];
        wc[k] = re(1.0);
        for j in k + 1..nn {
            let s: C64 = (k..j).map(|l| wc[l] * m[(l, j)]).sum();
            let mut piv = m[(j, j)];
            if piv.norm() < tiny {
                piv = re(tiny);
            }
            wc[j] = -s / piv;
            rescale(&mut wc);
        }
        let w: Vec<C64> = wc.iter().map(|x| x.conj()).collect();
        self.q.mul_vec(&w)
    }

    fn shifted_triangle(&self, k: usize) -> Matrix {
        let (a, b) = (self.s[(k, k)], self.t[(k, k)]);
        let nrm = a.norm().hypot(b.norm());
        let (a, b) = if nrm > 0.0 { (a / nrm, b / nrm) } else { (a, b) };
        &self.s.scale(b) - &self.t.scale(a)
    }

    fn tiny(&self, m: &Matrix) -> f64 {
        (EPS * m.norm_fro()).max(f64::MIN_POSITIVE)
    }
}

fn rescale(v: &mut [C64]) {
    let big = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if big > 1e100 {
        for x in v.iter_mut() {
            *x /= big;
        }
    }
}

/// Computes the generalized Schur form of `(A, B)`.
pub fn qz(a: &Matrix, b: &Matrix) -> Result<GeneralizedSchur> {
    let n = a.rows();
    assert!(a.is_square() && b.is_square() && b.rows() == n);
    // B = Q R
    let (q0, r) = householder_qr(b);
    let mut s = &q0.adjoint() * a;
    let mut t = r;
    let mut q = q0;
    let mut z = Matrix::identity(n);

    // Hessenberg-triangular reduction.
    for j in 0..n.saturating_sub(2) {
        for i in (j + 2..n).rev() {
            let (cs, sn) = givens(s[(i - 1, j)], s[(i, j)]);
            s.rot_rows(i - 1, i, cs, sn);
            t.rot_rows(i - 1, i, cs, sn);
            q.rot_cols(i - 1, i, cs, sn.conj());
            s[(i, j)] = C64::zero();
            let (cs, sn) = givens(t[(i, i)], t[(i, i - 1)]);
            t.rot_cols(i, i - 1, cs, sn);
            s.rot_cols(i, i - 1, cs, sn);
            z.rot_cols(i, i - 1, cs, sn);
            t[(i, i - 1)] = C64::zero();
        }
    }

    let anorm = s.norm_fro().max(f64::MIN_POSITIVE);
    let bnorm = t.norm_fro().max(f64::MIN_POSITIVE);
    let max_iter = 60 * n.max(1);
    let mut iter = 0;
    let mut since_deflation = 0;
    let mut ihi = n;
    while ihi > 0 {
        let hi = ihi - 1;
        if hi == 0 {
            break;
        }
        // Find the top of the active unreduced block.
        let mut ilo = hi;
        while ilo > 0 {
            let sub = s[(ilo, ilo - 1)].norm();
            let diag = s[(ilo, ilo)].norm() + s[(ilo - 1, ilo - 1)].norm();
            if sub <= EPS * diag.max(EPS * anorm) || sub <= EPS * EPS * anorm {
                s[(ilo, ilo - 1)] = C64::zero();
                break;
            }
            ilo -= 1;
        }
        if ilo == hi {
            ihi -= 1;
            since_deflation = 0;
            continue;
        }
        // Zero on the diagonal of T: infinite eigenvalue, chase it down.
        if let Some(j) = (ilo..=hi).find(|&j| t[(j, j)].norm() <= EPS * bnorm) {
            t[(j, j)] = C64::zero();
            for k in j..hi {
                let (cs, sn) = givens(t[(k, k + 1)], t[(k + 1, k + 1)]);
                t.rot_rows(k, k + 1, cs, sn);
                s.rot_rows(k, k + 1, cs, sn);
                q.rot_cols(k, k + 1, cs, sn.conj());
                t[(k + 1, k + 1)] = C64::zero();
                if k > ilo {
                    let (cs, sn) = givens(s[(k + 1, k)], s[(k + 1, k - 1)]);
                    s.rot_cols(k, k - 1, cs, sn);
                    t.rot_cols(k, k - 1, cs, sn);
                    z.rot_cols(k, k - 1, cs, sn);
                    s[(k + 1, k - 1)] = C64::zero();
                }
            }
            let (cs, sn) = givens(s[(hi, hi)], s[(hi, hi - 1)]);
            s.rot_cols(hi, hi - 1, cs, sn);
            t.rot_cols(hi, hi - 1, cs, sn);
            z.rot_cols(hi, hi - 1, cs, sn);
            s[(hi, hi - 1)] = C64::zero();
            ihi -= 1;
            since_deflation = 0;
            continue;
        }

        iter += 1;
        since_deflation += 1;
        if iter > max_iter {
            return Err(Error::NoConvergence(iter));
        }
        let shift = if since_deflation % 11 == 10 {
            // Exceptional shift.
            s[(hi, hi)] / t[(hi, hi)] + s[(hi, hi - 1)].norm() / t[(hi - 1, hi - 1)].norm().max(EPS)
        } else {
            wilkinson_shift(&s, &t, hi)
        };
        // First column of (S − σT) restricted to the active block.
        let mut x = s[(ilo, ilo)] - shift * t[(ilo, ilo)];
        let mut y = s[(ilo + 1, ilo)];
        for k in ilo..hi {
            let (cs, sn) = givens(x, y);
            s.rot_rows(k, k + 1, cs, sn);
            t.rot_rows(k, k + 1, cs, sn);
            q.rot_cols(k, k + 1, cs, sn.conj());
            if k > ilo {
                s[(k + 1, k - 1)] = C64::zero();
            }
            let (cs, sn) = givens(t[(k + 1, k + 1)], t[(k + 1, k)]);
            t.rot_cols(k + 1, k, cs, sn);
            s.rot_cols(k + 1, k, cs, sn);
            z.rot_cols(k + 1, k, cs, sn);
            t[(k + 1, k)] = C64::zero();
            if k + 1 < hi {
                x = s[(k + 1, k)];
                y = s[(k + 2, k)];
            }
        }
    }
    // Clean the strictly lower parts.
    for i in 0..n {
        for j in 0..i {
            s[(i, j)] = C64::zero();
            t[(i, j)] = C64::zero();
        }
    }
    Ok(GeneralizedSchur { s, t, q, z })
}

/// Eigenvalue of the trailing 2×2 pencil closest to `S_hh / T_hh`.
fn wilkinson_shift(s: &Matrix, t: &Matrix, hi: usize) -> C64 {
    let l = hi - 1;
    let (a11, a12, a21, a22) = (s[(l, l)], s[(l, hi)], s[(hi, l)], s[(hi, hi)]);
    let (b11, b12, b22) = (t[(l, l)], t[(l, hi)], t[(hi, hi)]);
    // det([a11 − σb11, a12 − σb12; a21, a22 − σb22]) = 0
    let qa = b11 * b22;
    let qb = -(a11 * b22 + a22 * b11) + a21 * b12;
    let qc = a11 * a22 - a12 * a21;
    let target = a22 / b22;
    if qa.norm() == 0.0 {
        return target;
    }
    let disc = (qb * qb - qa * qc * 4.0).sqrt();
    let d1 = -qb + disc;
    let d2 = -qb - disc;
    let den = if d1.norm() >= d2.norm() { d1 } else { d2 };
    let r1 = den / (qa * 2.0);
    let r2 = if den.norm() > 0.0 { qc * 2.0 / den } else { r1 };
    let pick = if (r1 - target).norm() <= (r2 - target).norm() { r1 } else { r2 };
    if pick.re.is_finite() && pick.im.is_finite() {
        pick
    } else {
        target
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::c;

    fn check_decomposition(a: &Matrix, b: &Matrix) -> GeneralizedSchur {
        let f = qz(a, b).unwrap();
        let ra = &(&(&f.q * &f.s) * &f.z.adjoint()) - a;
        let rb = &(&(&f.q * &f.t) * &f.z.adjoint()) - b;
        assert!(ra.norm_fro() < 1e-12 * (1.0 + a.norm_fro()), "{}", ra.norm_fro());
        assert!(rb.norm_fro() < 1e-12 * (1.0 + b.norm_fro()), "{}", rb.norm_fro());
        f
    }

    fn pseudo_random(n: usize, seed: u64) -> Matrix {
        let mut st = seed;
        Matrix::from_fn(n, n, |_, _| {
            st = st.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = ((st >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            st = st.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let b = ((st >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            c(a, b)
        })
    }

    #[test]
    fn random_pencils_decompose() {
        for (n, seed) in [(1, 1), (2, 2), (5, 3), (12, 4), (30, 5)] {
            let a = pseudo_random(n, seed);
            let b = pseudo_random(n, seed + 100);
            let f = check_decomposition(&a, &b);
            for k in 0..n {
                let (l, m) = f.pairs()[k];
                let x = f.right_vector(k);
                let y = f.left_vector(k);
                let p = &a.scale(m) - &b.scale(l);
                let sc = a.norm_fro() + b.norm_fro();
                let rx = crate::dense::vec_norm(&p.mul_vec(&x)) / crate::dense::vec_norm(&x);
                let ry = crate::dense::vec_norm(&p.left_mul_adjoint(&y)) / crate::dense::vec_norm(&y);
                assert!(rx < 1e-12 * sc && ry < 1e-12 * sc, "n={n} k={k} {rx} {ry}");
            }
        }
    }

    #[test]
    fn singular_b_gives_infinite_eigenvalue() {
        let a = Matrix::identity(2);
        let b = Matrix::from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]]);
        let f = check_decomposition(&a, &b);
        let inf = f.pairs().iter().filter(|(_, m)| m.norm() == 0.0).count();
        assert_eq!(inf, 1);
    }

    #[test]
    fn chase_zero_from_top() {
        let a = pseudo_random(6, 9);
        let mut b = pseudo_random(6, 10);
        for j in 0..6 {
            b[(0, j)] = C64::zero();
            b[(3, j)] = C64::zero();
        }
        let f = check_decomposition(&a, &b);
        let inf = f.pairs().iter().filter(|(_, m)| m.norm() < 1e-13).count();
        assert_eq!(inf, 2);
    }
}
