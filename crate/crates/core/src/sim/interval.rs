use crate::curve::TimeshareSolution;

/// Backlog interval relative to the thresholds V/ω_{b+1} < V/ω_b < V/ω_{b−1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Interval {
    /// [0, V/ω_{b+1}): transmits on a subset of {ω ≥ ω_{b+1}}.
    I1,
    /// [V/ω_{b+1}, V/ω_b): behaves like threshold b+1.
    I2,
    /// [V/ω_b, V/ω_{b−1}): behaves like threshold b.
    I3,
    /// [V/ω_{b−1}, ∞): transmits on a superset of {ω ≥ ω_b}.
    I4,
}

impl Interval {
    pub const ALL: [Interval; 4] = [Interval::I1, Interval::I2, Interval::I3, Interval::I4];

    /// 1-based interval number.
    pub fn number(self) -> usize {
        self.slot() + 1
    }

    /// 0-based position, for indexing occupancy arrays.
    pub fn slot(self) -> usize {
        match self {
            Interval::I1 => 0,
            Interval::I2 => 1,
            Interval::I3 => 2,
            Interval::I4 => 3,
        }
    }
}

/// Interval boundaries for a given V and timeshare solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intervals {
    /// V/ω_{b+1}; zero when b = M, which empties I1.
    pub lower: f64,
    /// V/ω_b, the drift switch point.
    pub mid: f64,
    /// V/ω_{b−1}; infinite when b = 1, which empties I4.
    pub upper: f64,
}

impl Intervals {
    pub fn new(v: f64, ts: &TimeshareSolution) -> Self {
        let lower = if ts.omega_b_plus_1.is_infinite() {
            0.0
        } else {
            v / ts.omega_b_plus_1
        };
        let upper = if ts.omega_b_minus_1 == 0.0 {
            f64::INFINITY
        } else {
            v / ts.omega_b_minus_1
        };
        Self {
            lower,
            mid: v / ts.omega_b,
            upper,
        }
    }

    /// Left-closed, right-open classification.
    #[inline]
    pub fn classify(&self, q: f64) -> Interval {
        if q < self.lower {
            Interval::I1
        } else if q < self.mid {
            Interval::I2
        } else if q < self.upper {
            Interval::I3
        } else {
            Interval::I4
        }
    }
}

/// Interval containing backlog `q` under parameter `v`.
pub fn classify_interval(q: f64, v: f64, ts: &TimeshareSolution) -> Interval {
    Intervals::new(v, ts).classify(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::RatePowerCurve;
    use crate::presets;

    #[test]
    fn nine_channel_boundaries() {
        let ts = RatePowerCurve::new(&presets::nine_channel())
            .locate_segment(11.6)
            .unwrap();
        let iv = Intervals::new(1000.0, &ts);
        assert!((iv.lower - 45.4545).abs() < 1e-3);
        assert!((iv.mid - 55.5556).abs() < 1e-3);
        assert!((iv.upper - 90.9091).abs() < 1e-3);
        assert_eq!(classify_interval(0.0, 1000.0, &ts), Interval::I1);
        assert_eq!(classify_interval(50.0, 1000.0, &ts), Interval::I2);
        assert_eq!(classify_interval(100.0, 1000.0, &ts), Interval::I4);
        assert_eq!(classify_interval(1000.0 / 18.0, 1000.0, &ts), Interval::I3);
    }

    #[test]
    fn two_channel_has_no_fourth_interval() {
        let ts = RatePowerCurve::new(&presets::two_channel())
            .locate_segment(1.0)
            .unwrap();
        for v in [0.0, 1.0, 40.0, 1e6] {
            assert_eq!(classify_interval(1e6, v, &ts), Interval::I3);
        }
        assert_eq!(classify_interval(40.0, 40.0, &ts), Interval::I3);
        assert_eq!(classify_interval(39.9, 40.0, &ts), Interval::I2);
    }

    #[test]
    fn last_segment_has_no_first_interval() {
        let ts = RatePowerCurve::new(&presets::two_channel())
            .locate_segment(0.3)
            .unwrap();
        assert_eq!(classify_interval(0.0, 10.0, &ts), Interval::I2);
    }
}
