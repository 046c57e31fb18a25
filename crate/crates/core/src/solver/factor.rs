//! Hermitian `P T Pᵀ = L D L^H` with diagonal pivoting.
//!
//! At every step the largest remaining diagonal entry is moved to the pivot
//! position. For a positive-definite matrix this is the natural choice: pivots
//! then come out non-increasing, their ratio is a cheap condition proxy, and a
//! non-positive pivot can only mean the matrix is indefinite at this precision.

use rug::Float;

use super::gram::GramMatrix;
use crate::mp::{log2_abs, MpComplex};

#[derive(Debug, Clone, PartialEq)]
pub struct NonPositivePivot {
    pub step: usize,
    pub pivot: f64,
}

#[derive(Debug, Clone)]
pub struct Ldl {
    n: usize,
    prec: u32,
    perm: Vec<usize>,
    // unit lower triangle, row-major, diagonal unused
    l: Vec<MpComplex>,
    d: Vec<Float>,
}

impl Ldl {
    pub fn factor(gram: &GramMatrix) -> Result<Self, NonPositivePivot> {
        let n = gram.dim();
        let prec = gram.prec_bits();
        let mut a: Vec<MpComplex> = (0..n * n).map(|i| gram.get(i / n, i % n).clone()).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut d: Vec<Float> = Vec::with_capacity(n);
        let mut threshold = None;

        for j in 0..n {
            let q = (j..n)
                .max_by(|&x, &y| a[x * n + x].re.total_cmp(&a[y * n + y].re))
                .expect("nonempty range");
            if q != j {
                swap_sym(&mut a, n, j, q);
                perm.swap(j, q);
            }
            let pivot = a[j * n + j].re.clone();
            // pivots below this are rounding noise relative to the first one
            let floor = threshold.get_or_insert_with(|| {
                let scale = log2_abs(&pivot) - prec as f64 + 8.0 + (n as f64).log2();
                Float::with_val(prec, Float::i_exp(1, scale.floor() as i32))
            });
            if !(pivot.is_finite() && pivot > *floor) {
                return Err(NonPositivePivot {
                    step: j,
                    pivot: pivot.to_f64(),
                });
            }
            for i in j + 1..n {
                let lij = a[i * n + j].div_real(&pivot);
                a[i * n + j] = lij;
            }
            // the full trailing block is kept because later symmetric swaps
            // move entries across the diagonal
            for k in j + 1..n {
                // A[i][k] -= L[i][j] d_j conj(L[k][j])
                let akj = a[k * n + j].scale(&pivot).conj();
                for i in j + 1..n {
                    let upd = &a[i * n + j] * &akj;
                    a[i * n + k] -= &upd;
                }
                a[k * n + k].im = Float::new(prec);
            }
            d.push(pivot);
        }
        Ok(Ldl { n, prec, perm, l: a, d })
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn pivots(&self) -> &[Float] {
        &self.d
    }

    /// Largest over smallest pivot.
    pub fn pivot_ratio(&self) -> f64 {
        let max = self.d.iter().map(log2_abs).fold(f64::NEG_INFINITY, f64::max);
        let min = self.d.iter().map(log2_abs).fold(f64::INFINITY, f64::min);
        (max - min).exp2()
    }

    /// Solve `T x = b`.
    pub fn solve(&self, b: &[MpComplex]) -> Vec<MpComplex> {
        let n = self.n;
        let mut y: Vec<MpComplex> = self.perm.iter().map(|&p| b[p].with_prec(self.prec)).collect();
        for i in 0..n {
            for j in 0..i {
                let t = &self.l[i * n + j] * &y[j];
                y[i] -= &t;
            }
        }
        for (yi, di) in y.iter_mut().zip(&self.d) {
            *yi = yi.div_real(di);
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = self.l[j * n + i].conj_mul(&y[j]);
                y[i] -= &t;
            }
        }
        let mut x = vec![MpComplex::zero(self.prec); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i].clone();
        }
        x
    }
}

fn swap_sym(a: &mut [MpComplex], n: usize, i: usize, j: usize) {
    for k in 0..n {
        a.swap(i * n + k, j * n + k);
    }
    for k in 0..n {
        a.swap(k * n + i, k * n + j);
    }
}
