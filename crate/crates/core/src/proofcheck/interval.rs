//! Closed intervals of `f64` with outward rounding.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

fn widen(lo: f64, hi: f64) -> Interval {
    Interval {
        lo: lo.next_down(),
        hi: hi.next_up(),
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    /// Interval containing the real number nearest to `x`.
    pub fn point(x: f64) -> Self {
        widen(x, x)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn recip(self) -> Self {
        assert!(self.lo > 0.0 || self.hi < 0.0, "reciprocal of an interval containing 0");
        widen(1.0 / self.hi, 1.0 / self.lo)
    }

    /// Requires `lo ≥ 0`.
    pub fn sqrt(self) -> Self {
        assert!(self.lo >= 0.0);
        widen(self.lo.sqrt(), self.hi.sqrt())
    }

    pub fn powi(self, k: i32) -> Self {
        match k {
            0 => Self::point(1.0),
            k if k < 0 => self.powi(-k).recip(),
            _ => (1..k).fold(self, |acc, _| acc * self),
        }
    }

    pub fn scale(self, k: Interval) -> Self {
        self * k
    }
}

impl Add for Interval {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        widen(self.lo + o.lo, self.hi + o.hi)
    }
}

impl Sub for Interval {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        widen(self.lo - o.hi, self.hi - o.lo)
    }
}

impl Neg for Interval {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Mul for Interval {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let p = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        widen(lo, hi)
    }
}
