/// Delivered data amounts indexed by delay in slots.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DelayHistogram {
    bins: Vec<f64>,
}

impl DelayHistogram {
    pub fn record(&mut self, delay: u64, amount: f64) {
        let i = delay as usize;
        if i >= self.bins.len() {
            self.bins.resize(i + 1, 0.0);
        }
        self.bins[i] += amount;
    }

    /// `bins()[d]` is the amount of data delivered with delay `d`.
    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn total(&self) -> f64 {
        self.bins.iter().sum()
    }
}

/// Per-unit delay statistics of a finished run.
///
/// Delays are weighted by data amount. Data still queued at the horizon is
/// treated as having infinite delay.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayStats {
    histogram: DelayHistogram,
    arrived: f64,
    undelivered: f64,
}

impl DelayStats {
    pub fn new(histogram: DelayHistogram, arrived: f64, undelivered: f64) -> Self {
        Self {
            histogram,
            arrived,
            undelivered,
        }
    }

    pub fn histogram(&self) -> &DelayHistogram {
        &self.histogram
    }

    pub fn arrived(&self) -> f64 {
        self.arrived
    }

    pub fn delivered(&self) -> f64 {
        self.histogram.total()
    }

    pub fn undelivered(&self) -> f64 {
        self.undelivered
    }

    /// Mean delay of delivered data.
    pub fn mean(&self) -> Option<f64> {
        let total = self.delivered();
        (total > 0.0).then(|| weighted_sum(self.histogram.bins()) / total)
    }

    /// Mean delay over the `fraction` of all arrived data with the smallest
    /// delay. `None` when that share reaches into undelivered data.
    pub fn trimmed_mean(&self, fraction: f64) -> Option<f64> {
        if !(fraction > 0.0 && fraction <= 1.0) || self.arrived <= 0.0 {
            return None;
        }
        let wanted = fraction * self.arrived;
        let delivered = self.delivered();
        if wanted > delivered * (1.0 + 1e-12) {
            return None;
        }
        let mut remaining = wanted.min(delivered);
        let mut acc = 0.0;
        for (d, &amount) in self.histogram.bins().iter().enumerate() {
            if remaining <= 0.0 {
                break;
            }
            let take = amount.min(remaining);
            acc += take * d as f64;
            remaining -= take;
        }
        Some(acc / wanted.min(delivered))
    }
}

fn weighted_sum(bins: &[f64]) -> f64 {
    bins.iter().enumerate().map(|(d, a)| d as f64 * a).sum()
}
