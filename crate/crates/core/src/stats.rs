//! Small numerical statistics helpers: compensated sums, running moments,
//! least-squares lines and batch-means standard errors.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::linalg::{c64, ComplexMatrix, ComplexVector};

/// Neumaier's improved Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Componentwise compensated sum of complex arrays.
#[derive(Debug, Clone)]
pub struct CompensatedArray {
    re: Vec<NeumaierSum>,
    im: Vec<NeumaierSum>,
    count: u64,
}

impl CompensatedArray {
    pub fn new(len: usize) -> Self {
        Self {
            re: vec![NeumaierSum::new(); len],
            im: vec![NeumaierSum::new(); len],
            count: 0,
        }
    }

    pub fn add(&mut self, xs: &[c64]) {
        debug_assert_eq!(xs.len(), self.re.len());
        for (k, z) in xs.iter().enumerate() {
            self.re[k].add(z.re);
            self.im[k].add(z.im);
        }
        self.count += 1;
    }

    pub fn merge(&mut self, other: &Self) {
        for k in 0..self.re.len() {
            self.re[k].merge(&other.re[k]);
            self.im[k].merge(&other.im[k]);
        }
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn total(&self) -> Vec<c64> {
        self.re
            .iter()
            .zip(&self.im)
            .map(|(r, i)| c64::new(r.value(), i.value()))
            .collect()
    }

    pub fn mean(&self) -> Vec<c64> {
        let n = self.count.max(1) as f64;
        self.re
            .iter()
            .zip(&self.im)
            .map(|(r, i)| c64::new(r.value() / n, i.value() / n))
            .collect()
    }

    pub fn mean_vector(&self) -> ComplexVector {
        ComplexVector::from_raw(self.mean())
    }

    /// Mean reshaped as a square matrix (row-major).
    pub fn mean_matrix(&self) -> ComplexMatrix {
        let d = (self.re.len() as f64).sqrt().round() as usize;
        ComplexMatrix::from_raw(d, self.mean())
    }
}

/// Welford running mean and variance.
#[derive(Debug, Clone, Copy, Default)]
pub struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Chan et al. pairwise merge.
    pub fn merge(&mut self, other: &Self) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64) * (other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ intercept + slope·x`. Zero variance in `y`
/// gives `r_squared = 0`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        0.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Some(LineFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Standard error of the mean of a correlated series by non-overlapping batch
/// means.
pub fn batch_means_std_error(xs: &[f64], batches: usize) -> f64 {
    let b = batches.max(2);
    let len = xs.len() / b;
    if len == 0 {
        let mut w = Welford::new();
        xs.iter().for_each(|&x| w.add(x));
        return w.std_error();
    }
    let mut w = Welford::new();
    for chunk in xs.chunks_exact(len).take(b) {
        w.add(chunk.iter().sum::<f64>() / len as f64);
    }
    w.std_error()
}
