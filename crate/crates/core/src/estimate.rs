//! Monte Carlo estimates, order-insensitive reductions and per-sample seeding.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A scalar estimate with its standard error.
///
/// Closed-form and quadrature values carry `samples == 0`; their
/// `std_error` is either zero or a deterministic error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            std_error: 0.0,
            samples: 0,
        }
    }

    pub fn with_bound(value: f64, bound: f64) -> Self {
        Self {
            value,
            std_error: bound.abs(),
            samples: 0,
        }
    }

    /// Sample mean with standard error `s / √n`.
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self::exact(f64::NAN);
        }
        let mean = compensated_sum(values.iter().copied()) / n as f64;
        if n == 1 {
            return Self {
                value: mean,
                std_error: f64::INFINITY,
                samples: 1,
            };
        }
        let ss = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean)));
        let sd = (ss / (n - 1) as f64).sqrt();
        Self {
            value: mean,
            std_error: sd / (n as f64).sqrt(),
            samples: n,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.std_error == 0.0
    }

    pub fn relative_error(&self) -> f64 {
        self.std_error / self.value.abs()
    }

    pub fn scale(self, k: f64) -> Self {
        Self {
            value: self.value * k,
            std_error: self.std_error * k.abs(),
            samples: self.samples,
        }
    }

    pub fn shift(self, k: f64) -> Self {
        Self {
            value: self.value + k,
            ..self
        }
    }

    /// Sum of two independent estimates.
    pub fn plus(self, other: Self) -> Self {
        Self {
            value: self.value + other.value,
            std_error: self.std_error.hypot(other.std_error),
            samples: self.samples.max(other.samples),
        }
    }

    pub fn minus(self, other: Self) -> Self {
        self.plus(other.scale(-1.0))
    }

    /// Product of two independent estimates, first-order error propagation.
    pub fn times(self, other: Self) -> Self {
        let value = self.value * other.value;
        let std_error = (other.value * self.std_error).hypot(self.value * other.std_error);
        Self {
            value,
            std_error,
            samples: self.samples.max(other.samples),
        }
    }

    pub fn divided_by(self, other: Self) -> Self {
        let value = self.value / other.value;
        let rel = (self.std_error / self.value).hypot(other.std_error / other.value);
        let std_error = if self.value == 0.0 {
            self.std_error / other.value.abs()
        } else {
            (value * rel).abs()
        };
        Self {
            value,
            std_error,
            samples: self.samples.max(other.samples),
        }
    }

    pub fn powi(self, k: i32) -> Self {
        let value = self.value.powi(k);
        let std_error = (k as f64 * self.value.powi(k - 1)).abs() * self.std_error;
        Self {
            value,
            std_error,
            samples: self.samples,
        }
    }

    pub fn sqrt(self) -> Self {
        let value = self.value.sqrt();
        Self {
            value,
            std_error: self.std_error / (2.0 * value),
            samples: self.samples,
        }
    }

    /// Number of combined standard errors separating two independent estimates.
    pub fn z_score(&self, other: &Self) -> f64 {
        let err = self.std_error.hypot(other.std_error);
        let diff = self.value - other.value;
        if err == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY.copysign(diff)
            }
        } else {
            diff / err
        }
    }

    /// True when `|self − target| ≤ k·σ` (exact values compare to a relative
    /// floor of `1e-12`).
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        let floor = 1e-12 * target.abs().max(self.value.abs());
        (self.value - target).abs() <= k * self.std_error + floor
    }
}

/// Neumaier-compensated summation. The result depends only on the order of
/// the iterator, never on how the terms were produced.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            c += (sum - s) + t;
        } else {
            c += (t - s) + sum;
        }
        sum = s;
    }
    sum + c
}

/// Independent random streams used by the estimators. Distinct estimators
/// draw from distinct streams so that, e.g., the two sides of an identity are
/// statistically independent even under the same user seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Boundary = 1,
    Interior = 2,
    Pairs = 3,
    BundleUniform = 4,
    BundleCosine = 5,
    SphereBundle = 6,
    Potential = 7,
    Probe = 8,
    Gradient = 9,
    Jacobian = 10,
    Perturbation = 11,
}

/// Factory for per-sample generators: sample `i` of stream `s` under seed
/// `seed` always sees the same random sequence.
#[derive(Clone)]
pub struct SampleRng {
    base: ChaCha8Rng,
}

impl SampleRng {
    pub fn new(seed: u64, stream: Stream) -> Self {
        let key = splitmix64(seed ^ splitmix64(stream as u64 ^ 0x6a09_e667_f3bc_c908));
        Self {
            base: ChaCha8Rng::seed_from_u64(key),
        }
    }

    pub fn at(&self, index: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(index);
        rng
    }
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed, e.g. one seed per probe point.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0x3c6e_f372_fe94_f82b)))
}

/// Evaluates `f(rng_i)` for `i in 0..count` in parallel and returns the
/// results in index order.
pub fn par_samples<T, F>(count: usize, seed: u64, stream: Stream, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync + Send,
{
    let factory = SampleRng::new(seed, stream);
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = factory.at(i);
            f(&mut rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut terms = vec![1.0e16, 1.0, -1.0e16];
        terms.extend(std::iter::repeat_n(1.0, 10));
        assert_eq!(compensated_sum(terms), 11.0);
    }

    #[test]
    fn sample_streams_are_reproducible_and_distinct() {
        let a = SampleRng::new(7, Stream::Interior);
        let b = SampleRng::new(7, Stream::Interior);
        let c = SampleRng::new(7, Stream::Boundary);
        let xa: f64 = a.at(3).random();
        let xb: f64 = b.at(3).random();
        let xc: f64 = c.at(3).random();
        let xd: f64 = a.at(4).random();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
        assert_ne!(xa, xd);
    }

    #[test]
    fn results_do_not_depend_on_worker_count() {
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                let v = par_samples(10_000, 11, Stream::Pairs, |rng| rng.random::<f64>());
                Estimate::from_samples(&v)
            })
        };
        let one = run(1);
        let four = run(4);
        assert_eq!(one.value.to_bits(), four.value.to_bits());
        assert_eq!(one.std_error.to_bits(), four.std_error.to_bits());
    }

    #[test]
    fn error_propagation_for_products() {
        let a = Estimate {
            value: 2.0,
            std_error: 0.1,
            samples: 10,
        };
        let b = Estimate::exact(3.0);
        let p = a.times(b);
        assert!((p.value - 6.0).abs() < 1e-15);
        assert!((p.std_error - 0.3).abs() < 1e-15);
        let q = a.powi(3);
        assert!((q.std_error - 3.0 * 4.0 * 0.1).abs() < 1e-12);
    }
}
