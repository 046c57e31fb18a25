use num_complex::Complex64;
use rayon::prelude::*;
use rug::Float;

use crate::constraints::{kernel_inner_mp, ConstraintError, ConstraintFamily, ConstraintSet, Kernel, PhysicalConfig};
use crate::mp::{bits_to_digits, digits_to_bits, MpComplex};

/// Hermitian Gram matrix `T_kr = (1/2πħ) ∫ conj(χ_k) χ_r dp` at a fixed
/// binary precision, with the kernels it was built from.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    n: usize,
    prec: u32,
    entries: Vec<MpComplex>,
    cfg: PhysicalConfig,
    kernels: Vec<Kernel>,
    family: Option<ConstraintFamily>,
}

impl GramMatrix {
    /// Assemble from a validated constraint set at `digits` decimal digits.
    pub fn assemble(cfg: &PhysicalConfig, cs: &ConstraintSet, digits: u32) -> Result<Self, ConstraintError> {
        cs.validate(cfg)?;
        let mut g = Self::from_kernels(cfg, &cs.kernels()?, digits_to_bits(digits));
        g.family = Some(cs.family);
        Ok(g)
    }

    /// Assemble from an arbitrary kernel list at `prec` bits. The upper
    /// triangle is computed in parallel and mirrored, so the result is
    /// Hermitian by construction.
    pub fn from_kernels(cfg: &PhysicalConfig, kernels: &[Kernel], prec: u32) -> Self {
        let n = kernels.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|k| (k..n).map(move |r| (k, r))).collect();
        let upper: Vec<MpComplex> = pairs
            .par_iter()
            .map(|&(k, r)| {
                let mut v = kernel_inner_mp(cfg, &kernels[k], &kernels[r], prec);
                if k == r {
                    v.im = Float::new(prec);
                }
                v
            })
            .collect();
        let mut entries = vec![MpComplex::zero(prec); n * n];
        for (&(k, r), v) in pairs.iter().zip(upper) {
            entries[r * n + k] = v.conj();
            entries[k * n + r] = v;
        }
        GramMatrix {
            n,
            prec,
            entries,
            cfg: *cfg,
            kernels: kernels.to_vec(),
            family: None,
        }
    }

    /// The same matrix re-assembled from its kernels at `prec` bits.
    pub fn at_precision(&self, prec: u32) -> Self {
        if prec == self.prec {
            return self.clone();
        }
        let mut g = Self::from_kernels(&self.cfg, &self.kernels, prec);
        g.family = self.family;
        g
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn prec_bits(&self) -> u32 {
        self.prec
    }

    pub fn precision_digits(&self) -> u32 {
        bits_to_digits(self.prec)
    }

    pub fn cfg(&self) -> &PhysicalConfig {
        &self.cfg
    }

    pub fn kernels(&self) -> &[Kernel] {
        &self.kernels
    }

    pub fn family(&self) -> Option<ConstraintFamily> {
        self.family
    }

    pub fn get(&self, k: usize, r: usize) -> &MpComplex {
        &self.entries[k * self.n + r]
    }

    pub fn to_c64(&self) -> Vec<Vec<Complex64>> {
        (0..self.n)
            .map(|k| (0..self.n).map(|r| self.get(k, r).to_c64()).collect())
            .collect()
    }

    /// `T v` at the matrix precision.
    pub fn mul_vec(&self, v: &[MpComplex]) -> Vec<MpComplex> {
        (0..self.n)
            .map(|k| {
                let mut acc = MpComplex::zero(self.prec);
                for (r, vr) in v.iter().enumerate() {
                    acc += &(self.get(k, r) * vr);
                }
                acc
            })
            .collect()
    }

    /// Frobenius norm, in double precision.
    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.to_c64().norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Gram matrix of `cs` at `digits` decimal digits.
pub fn assemble_gram(cfg: &PhysicalConfig, cs: &ConstraintSet, digits: u32) -> Result<GramMatrix, ConstraintError> {
    GramMatrix::assemble(cfg, cs, digits)
}
