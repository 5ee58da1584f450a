//! Dense Hermitian positive-definite solves, generic over the float type.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<F> {
    pub n: usize,
    pub data: Vec<Complex<F>>,
}

impl<F: Real> CMatrix<F> {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![Complex::zero(); n * n],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<F> {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn at(&mut self, i: usize, j: usize) -> &mut Complex<F> {
        &mut self.data[i * self.n + j]
    }

    pub fn trace_re(&self) -> F {
        (0..self.n).map(|i| self.get(i, i).re).sum()
    }

    pub fn add_diagonal(&mut self, v: F) {
        for i in 0..self.n {
            self.data[i * self.n + i].re += v;
        }
    }

    pub fn mul_vec(&self, x: &[Complex<F>]) -> Vec<Complex<F>> {
        (0..self.n)
            .map(|i| {
                let row = &self.data[i * self.n..(i + 1) * self.n];
                row.iter().zip(x).fold(Complex::zero(), |acc, (a, b)| acc + *a * *b)
            })
            .collect()
    }
}

/// `Σ_k a_k conj(b_k)` on split real/imaginary slices, with independent
/// partial sums so the loop vectorizes.
#[inline]
fn dot_conj<F: Real>(ar: &[F], ai: &[F], br: &[F], bi: &[F]) -> (F, F) {
    const LANES: usize = 8;
    let n = ar.len();
    let (ar, ai, br, bi) = (&ar[..n], &ai[..n], &br[..n], &bi[..n]);
    let mut re = [F::zero(); LANES];
    let mut im = [F::zero(); LANES];
    let full = n - n % LANES;
    let mut k = 0;
    while k < full {
        for l in 0..LANES {
            re[l] += ar[k + l] * br[k + l] + ai[k + l] * bi[k + l];
            im[l] += ai[k + l] * br[k + l] - ar[k + l] * bi[k + l];
        }
        k += LANES;
    }
    let (mut sr, mut si) = (F::zero(), F::zero());
    for l in 0..LANES {
        sr += re[l];
        si += im[l];
    }
    for k in full..n {
        sr += ar[k] * br[k] + ai[k] * bi[k];
        si += ai[k] * br[k] - ar[k] * bi[k];
    }
    (sr, si)
}

/// Four conjugate dot products `a_p · conj(b_q)` for `p, q ∈ {0, 1}` sharing
/// their loads. Slices are `[re0, im0, re1, im1]` rows.
#[inline]
fn dot_conj_2x2<F: Real>(a: [&[F]; 4], b: [&[F]; 4]) -> [(F, F); 4] {
    let n = a[0].len();
    let (a0r, a0i, a1r, a1i) = (&a[0][..n], &a[1][..n], &a[2][..n], &a[3][..n]);
    let (b0r, b0i, b1r, b1i) = (&b[0][..n], &b[1][..n], &b[2][..n], &b[3][..n]);
    const LANES: usize = 2;
    let z = [F::zero(); LANES];
    let (mut r00, mut i00, mut r01, mut i01) = (z, z, z, z);
    let (mut r10, mut i10, mut r11, mut i11) = (z, z, z, z);
    let full = n - n % LANES;
    let mut k = 0;
    while k < full {
        for l in 0..LANES {
            let (xr, xi, yr, yi) = (a0r[k + l], a0i[k + l], a1r[k + l], a1i[k + l]);
            let (ur, ui, vr, vi) = (b0r[k + l], b0i[k + l], b1r[k + l], b1i[k + l]);
            r00[l] += xr * ur + xi * ui;
            i00[l] += xi * ur - xr * ui;
            r01[l] += xr * vr + xi * vi;
            i01[l] += xi * vr - xr * vi;
            r10[l] += yr * ur + yi * ui;
            i10[l] += yi * ur - yr * ui;
            r11[l] += yr * vr + yi * vi;
            i11[l] += yi * vr - yr * vi;
        }
        k += LANES;
    }
    let sum = |v: [F; LANES]| v.iter().fold(F::zero(), |a, &b| a + b);
    let mut out = [
        (sum(r00), sum(i00)),
        (sum(r01), sum(i01)),
        (sum(r10), sum(i10)),
        (sum(r11), sum(i11)),
    ];
    for k in full..n {
        let (xr, xi, yr, yi) = (a0r[k], a0i[k], a1r[k], a1i[k]);
        let (ur, ui, vr, vi) = (b0r[k], b0i[k], b1r[k], b1i[k]);
        out[0].0 += xr * ur + xi * ui;
        out[0].1 += xi * ur - xr * ui;
        out[1].0 += xr * vr + xi * vi;
        out[1].1 += xi * vr - xr * vi;
        out[2].0 += yr * ur + yi * ui;
        out[2].1 += yi * ur - yr * ui;
        out[3].0 += yr * vr + yi * vi;
        out[3].1 += yi * vr - yr * vi;
    }
    out
}

/// Lower-triangular Cholesky factor `L` with `A = L Lᴴ`.
#[derive(Clone, Debug)]
pub struct Cholesky<F> {
    l: CMatrix<F>,
}

impl<F: Real> Cholesky<F> {
    /// Blocked left-looking factorization. Fails with a conditioning error
    /// when a pivot is not positive.
    pub fn factor(a: &CMatrix<F>) -> Result<Self> {
        const BLOCK: usize = 128;
        let n = a.n;
        let mut lr: Vec<F> = a.data.iter().map(|v| v.re).collect();
        let mut li: Vec<F> = a.data.iter().map(|v| v.im).collect();
        let dot = |lr: &[F], li: &[F], i: usize, j: usize, k0: usize, k1: usize| {
            dot_conj(
                &lr[i * n + k0..i * n + k1],
                &li[i * n + k0..i * n + k1],
                &lr[j * n + k0..j * n + k1],
                &li[j * n + k0..j * n + k1],
            )
        };
        for j0 in (0..n).step_by(BLOCK) {
            let j1 = (j0 + BLOCK).min(n);
            // contributions of finished block columns
            for k0 in (0..j0).step_by(BLOCK) {
                let k1 = k0 + BLOCK;
                let mut i = j0;
                while i < n {
                    let mut j = j0;
                    // paired rows and columns where the whole 2×2 tile is needed
                    while i + 1 < n && j + 1 < j1 && j + 1 <= i {
                        let row = |r: usize| (r * n + k0, r * n + k1);
                        let ((a0, a1), (b0, b1), (c0, c1), (d0, d1)) = (row(i), row(i + 1), row(j), row(j + 1));
                        let out = dot_conj_2x2(
                            [&lr[a0..a1], &li[a0..a1], &lr[b0..b1], &li[b0..b1]],
                            [&lr[c0..c1], &li[c0..c1], &lr[d0..d1], &li[d0..d1]],
                        );
                        for (slot, (p, q)) in [(i, j), (i, j + 1), (i + 1, j), (i + 1, j + 1)].into_iter().enumerate() {
                            lr[p * n + q] -= out[slot].0;
                            li[p * n + q] -= out[slot].1;
                        }
                        j += 2;
                    }
                    for r in i..(i + 2).min(n) {
                        for c in j..j1.min(r + 1) {
                            let (dr, di) = dot(&lr, &li, r, c, k0, k1);
                            lr[r * n + c] -= dr;
                            li[r * n + c] -= di;
                        }
                    }
                    i += 2;
                }
            }
            // factor the panel
            for j in j0..j1 {
                let (dr, _) = dot(&lr, &li, j, j, j0, j);
                let diag = lr[j * n + j] - dr;
                if !(diag > F::zero()) || !diag.is_finite() {
                    return Err(Error::Conditioning(format!(
                        "matrix is not numerically positive definite (pivot {j} of {n})"
                    )));
                }
                let ljj = diag.sqrt();
                lr[j * n + j] = ljj;
                li[j * n + j] = F::zero();
                for i in j + 1..n {
                    let (dr, di) = dot(&lr, &li, i, j, j0, j);
                    lr[i * n + j] = (lr[i * n + j] - dr) / ljj;
                    li[i * n + j] = (li[i * n + j] - di) / ljj;
                }
            }
        }
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(if j <= i {
                    Complex::new(lr[i * n + j], li[i * n + j])
                } else {
                    Complex::zero()
                });
            }
        }
        Ok(Cholesky {
            l: CMatrix { n, data },
        })
    }

    pub fn solve(&self, b: &[Complex<F>]) -> Vec<Complex<F>> {
        let n = self.l.n;
        let l = &self.l.data;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i].re;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l[k * n + i].conj() * y[k];
            }
            y[i] = s / l[i * n + i].re;
        }
        y
    }
}

/// Solves `A x = b` for Hermitian positive-definite `A`, with one step of
/// iterative refinement.
pub fn solve_hpd<F: Real>(a: &CMatrix<F>, b: &[Complex<F>]) -> Result<Vec<Complex<F>>> {
    if b.len() != a.n {
        return Err(Error::DimensionMismatch {
            what: "right-hand side",
            expected: a.n,
            got: b.len(),
        });
    }
    let chol = Cholesky::factor(a)?;
    let mut x = chol.solve(b);
    let ax = a.mul_vec(&x);
    let r: Vec<Complex<F>> = b.iter().zip(&ax).map(|(bi, ai)| *bi - *ai).collect();
    let dx = chol.solve(&r);
    for (xi, di) in x.iter_mut().zip(dx) {
        *xi += di;
    }
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Conditioning("solution is not finite".into()));
    }
    Ok(x)
}
