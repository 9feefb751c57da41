//! The initial profile `s(r)`: zero below `r_lo`, linear with unit slope above
//! `r_hi`, and `C^1` in between with `s'' = 1 / (r log(r_hi / r_lo))`.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    pub r_lo: f64,
    pub r_hi: f64,
    log_ratio: f64,
}

impl Cutoff {
    pub fn new(r_lo: f64, r_hi: f64) -> Self {
        assert!(0.0 < r_lo && r_lo < r_hi, "cutoff radii must satisfy 0 < r_lo < r_hi");
        Self { r_lo, r_hi, log_ratio: (r_hi / r_lo).ln() }
    }

    /// `log(r_hi / r_lo)`.
    pub fn log_ratio(&self) -> f64 {
        self.log_ratio
    }

    /// The constant in `S = rho - (r_hi - r_lo) / log(r_hi / r_lo)` on `D2`.
    pub fn offset(&self) -> f64 {
        (self.r_hi - self.r_lo) / self.log_ratio
    }

    pub fn s(&self, r: f64) -> f64 {
        if r < self.r_lo {
            0.0
        } else if r < self.r_hi {
            (r * (r / self.r_lo).ln() - (r - self.r_lo)) / self.log_ratio
        } else {
            r - self.offset()
        }
    }

    pub fn ds(&self, r: f64) -> f64 {
        if r < self.r_lo {
            0.0
        } else if r < self.r_hi {
            (r / self.r_lo).ln() / self.log_ratio
        } else {
            1.0
        }
    }

    /// Second derivative; jumps at both knots.
    pub fn d2s(&self, r: f64) -> f64 {
        if r <= self.r_lo || r >= self.r_hi {
            0.0
        } else {
            1.0 / (r * self.log_ratio)
        }
    }

    /// Absolutely continuous part of the third derivative.
    pub fn d3s(&self, r: f64) -> f64 {
        if r <= self.r_lo || r >= self.r_hi {
            0.0
        } else {
            -1.0 / (r * r * self.log_ratio)
        }
    }

    /// Point masses of the third derivative: `(position, weight)`.
    pub fn d3s_masses(&self) -> [(f64, f64); 2] {
        [(self.r_lo, 1.0 / (self.r_lo * self.log_ratio)), (self.r_hi, -1.0 / (self.r_hi * self.log_ratio))]
    }
}

/// `(s(r), s'(r))` for the profile with knots `r_lo < r_hi`.
pub fn cutoff_profile(r_lo: f64, r_hi: f64, r: f64) -> (f64, f64) {
    let c = Cutoff::new(r_lo, r_hi);
    (c.s(r), c.ds(r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn knots_are_c1() {
        let c = Cutoff::new(0.3, 2.0);
        for r in [c.r_lo, c.r_hi] {
            let (a, b) = (c.s(r * (1.0 - 1e-9)), c.s(r * (1.0 + 1e-9)));
            assert!((a - b).abs() < 1e-8);
            let (a, b) = (c.ds(r * (1.0 - 1e-9)), c.ds(r * (1.0 + 1e-9)));
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let c = Cutoff::new(0.5, 4.0);
        let h = 1e-5;
        for r in [0.7, 1.3, 3.1] {
            assert!(((c.s(r + h) - c.s(r - h)) / (2.0 * h) - c.ds(r)).abs() < 1e-8);
            assert!(((c.ds(r + h) - c.ds(r - h)) / (2.0 * h) - c.d2s(r)).abs() < 1e-8);
            assert!(((c.d2s(r + h) - c.d2s(r - h)) / (2.0 * h) - c.d3s(r)).abs() < 1e-6);
        }
        // The masses are the jumps of s''.
        let [(a, ma), (b, mb)] = c.d3s_masses();
        assert!((c.d2s(a * (1.0 + 1e-12)) - ma).abs() < 1e-9);
        assert!((-c.d2s(b * (1.0 - 1e-12)) - mb).abs() < 1e-9);
    }
}
