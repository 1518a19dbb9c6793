use crate::error::{Error, Result};

/// Hurst exponent restricted to the rough regime `0 < h < 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct HurstParam(f64);

impl HurstParam {
    pub fn new(h: f64) -> Result<Self> {
        if h.is_finite() && h > 0.0 && h < 0.5 {
            Ok(Self(h))
        } else {
            Err(Error::InvalidHurst(h))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `h < 1/(2(d+2))`: strong solutions exist and the delta representation holds a.e.
    pub fn strong_solution_valid(self, d: usize) -> bool {
        self.0 < strong_threshold(d)
    }

    /// `h < 1/(2(d+3))`: the representation admits a version continuous in the initial point.
    pub fn continuous_version_valid(self, d: usize) -> bool {
        self.0 < continuous_threshold(d)
    }
}

pub fn strong_threshold(d: usize) -> f64 {
    1.0 / (2.0 * (d as f64 + 2.0))
}

pub fn continuous_threshold(d: usize) -> f64 {
    1.0 / (2.0 * (d as f64 + 3.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_outside_rough_regime() {
        for h in [0.0, -0.1, 0.5, 0.7, f64::NAN] {
            assert!(HurstParam::new(h).is_err(), "{h}");
        }
        assert!(HurstParam::new(0.49).is_ok());
    }

    #[test]
    fn validity_flags() {
        // d = 1: thresholds 1/6 and 1/8
        let h = HurstParam::new(0.1).unwrap();
        assert!(h.strong_solution_valid(1));
        assert!(h.continuous_version_valid(1));
        let h = HurstParam::new(0.15).unwrap();
        assert!(h.strong_solution_valid(1));
        assert!(!h.continuous_version_valid(1));
        let h = HurstParam::new(0.3).unwrap();
        assert!(!h.strong_solution_valid(1));
        // d = 2: thresholds 1/8 and 1/10
        let h = HurstParam::new(0.11).unwrap();
        assert!(h.strong_solution_valid(2));
        assert!(!h.continuous_version_valid(2));
    }
}
