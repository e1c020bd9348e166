//! Small numeric helpers shared by the modules.

use num_complex::Complex64;

/// Largest `n` for which `n!` is finite in binary64.
pub const MAX_FACTORIAL_ARG: usize = 170;

/// Absolute floor used by [`rel_diff`].
pub const REL_FLOOR: f64 = 1e-14;

/// `ln(n!)`. Exact product below 31, log-sum above.
pub fn ln_factorial(n: usize) -> f64 {
    if n <= 30 {
        factorial(n).ln()
    } else {
        factorial(30).ln() + (31..=n).map(|k| (k as f64).ln()).sum::<f64>()
    }
}

/// `n!` as a float; overflows to infinity above 170.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Relative difference `|a - b| / max(|a|, |b|, REL_FLOOR)`.
pub fn rel_diff(a: Complex64, b: Complex64) -> f64 {
    let scale = a.norm().max(b.norm()).max(REL_FLOOR);
    (a - b).norm() / scale
}

/// Neumaier-compensated complex accumulator. Summation order is the order of
/// `add` calls, so results are reproducible for a fixed node ordering.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    re: Neumaier,
    im: Neumaier,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: Complex64) {
        self.re.add(value.re);
        self.im.add(value.im);
    }

    pub fn total(&self) -> Complex64 {
        Complex64::new(self.re.total(), self.im.total())
    }
}

impl FromIterator<Complex64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of a sequence of complex numbers.
pub fn compensated_sum<I: IntoIterator<Item = Complex64>>(values: I) -> Complex64 {
    values.into_iter().collect::<CompensatedSum>().total()
}
