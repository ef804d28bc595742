use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::PhaseSchedule;
use crate::policy::Policy;

use super::engine::{Plan, SlotEngine};
use super::queue::Discipline;
use super::sum::CompensatedSum;

/// Runs simulated by one worker task before its partial sums are merged.
pub const BLOCK_RUNS: u64 = 256;

/// Settings of an ensemble of independent runs. Run `i` uses seed
/// `base_seed + i` (wrapping).
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub horizon: u64,
    pub n_runs: u64,
    pub base_seed: u64,
    /// Initial real backlog of every run.
    pub q0: f64,
    pub discipline: Discipline,
    /// Exponents r for which E[e^{rQ(t)}] is estimated.
    pub exp_rates: Vec<f64>,
    /// Levels ℓ for which Pr[Q(t) ≥ ℓ] and its running average are estimated.
    pub tail_levels: Vec<f64>,
}

impl EnsembleConfig {
    pub fn new(horizon: u64, n_runs: u64, base_seed: u64) -> Self {
        Self {
            horizon,
            n_runs,
            base_seed,
            q0: 0.0,
            discipline: Discipline::Fifo,
            exp_rates: Vec::new(),
            tail_levels: Vec::new(),
        }
    }
}

/// Across-run mean and standard error of a per-slot quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
}

/// Across-run mean and standard error of a scalar, with its sample count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarEstimate {
    pub count: u64,
    pub mean: f64,
    pub se: f64,
}

/// Ensemble statistics.
///
/// Pointwise series are indexed by slot: `mu`, `p` over 0..horizon, `q`,
/// `occupancy`, `exp_moments`, `tail` over 0..=horizon. Running series
/// (`*_bar`) are indexed by t in 0..=horizon and hold the per-run average
/// over slots 0..t−1; index 0 is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub horizon: u64,
    pub n_runs: u64,
    /// Q(0) of every run, place-holder included.
    pub q_initial: f64,
    pub occupancy_defined: bool,
    pub mu: Series,
    pub p: Series,
    pub q: Series,
    pub mu_bar: Series,
    pub p_bar: Series,
    pub q_bar: Series,
    pub occupancy: [Series; 4],
    pub occupancy_bar: [Series; 4],
    pub exp_rates: Vec<f64>,
    pub exp_moments: Vec<Series>,
    pub tail_levels: Vec<f64>,
    pub tail: Vec<Series>,
    pub tail_bar: Vec<Series>,
    /// One-slot change Q(t+1) − Q(t) over slots with Q(t) < V/ω_b.
    pub drift_below: ScalarEstimate,
    /// One-slot change over slots with Q(t) ≥ V/ω_b.
    pub drift_above: ScalarEstimate,
}

/// Ensemble time averages at one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsemblePoint {
    pub t: u64,
    pub mu_bar: f64,
    pub p_bar: f64,
    pub q_bar: f64,
    pub occupancy: [f64; 4],
}

impl EnsembleResult {
    /// ψ(t) = E[Q(t) − Q(0)]/t.
    pub fn psi(&self, t: u64) -> f64 {
        (self.q.mean[t as usize] - self.q_initial) / t as f64
    }

    pub fn point(&self, t: u64) -> Result<EnsemblePoint> {
        if t == 0 || t > self.horizon {
            return Err(Error::HorizonExceeded {
                t,
                horizon: self.horizon,
            });
        }
        let i = t as usize;
        Ok(EnsemblePoint {
            t,
            mu_bar: self.mu_bar.mean[i],
            p_bar: self.p_bar.mean[i],
            q_bar: self.q_bar.mean[i],
            occupancy: std::array::from_fn(|k| self.occupancy_bar[k].mean[i]),
        })
    }
}

#[derive(Debug, Clone)]
struct Acc {
    sum: Vec<f64>,
    sq: Vec<f64>,
}

impl Acc {
    fn new(len: usize) -> Self {
        Self {
            sum: vec![0.0; len],
            sq: vec![0.0; len],
        }
    }

    #[inline]
    fn add(&mut self, i: usize, x: f64) {
        self.sum[i] += x;
        self.sq[i] += x * x;
    }

    fn merge(&mut self, other: &Acc) {
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sq.iter_mut().zip(&other.sq) {
            *a += b;
        }
    }

    fn finish(&self, n: u64) -> Series {
        let (mean, se) = self
            .sum
            .iter()
            .zip(&self.sq)
            .map(|(&s, &sq)| mean_se(n, s, sq))
            .unzip();
        Series { mean, se }
    }
}

fn mean_se(n: u64, sum: f64, sq: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 0.0);
    }
    let nf = n as f64;
    let mean = sum / nf;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = ((sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

#[derive(Debug, Clone, Copy, Default)]
struct ScalarAcc {
    n: u64,
    sum: f64,
    sq: f64,
}

impl ScalarAcc {
    #[inline]
    fn add(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sq += x * x;
    }

    fn merge(&mut self, o: &ScalarAcc) {
        self.n += o.n;
        self.sum += o.sum;
        self.sq += o.sq;
    }

    fn finish(&self) -> ScalarEstimate {
        let (mean, se) = mean_se(self.n, self.sum, self.sq);
        ScalarEstimate {
            count: self.n,
            mean,
            se,
        }
    }
}

#[derive(Debug, Clone)]
struct Block {
    runs: u64,
    mu: Acc,
    p: Acc,
    q: Acc,
    mu_bar: Acc,
    p_bar: Acc,
    q_bar: Acc,
    occ: [Acc; 4],
    occ_bar: [Acc; 4],
    exp: Vec<Acc>,
    tail: Vec<Acc>,
    tail_bar: Vec<Acc>,
    below: ScalarAcc,
    above: ScalarAcc,
}

impl Block {
    fn new(h: usize, n_exp: usize, n_tail: usize) -> Self {
        Self {
            runs: 0,
            mu: Acc::new(h),
            p: Acc::new(h),
            q: Acc::new(h + 1),
            mu_bar: Acc::new(h + 1),
            p_bar: Acc::new(h + 1),
            q_bar: Acc::new(h + 1),
            occ: std::array::from_fn(|_| Acc::new(h + 1)),
            occ_bar: std::array::from_fn(|_| Acc::new(h + 1)),
            exp: (0..n_exp).map(|_| Acc::new(h + 1)).collect(),
            tail: (0..n_tail).map(|_| Acc::new(h + 1)).collect(),
            tail_bar: (0..n_tail).map(|_| Acc::new(h + 1)).collect(),
            below: ScalarAcc::default(),
            above: ScalarAcc::default(),
        }
    }

    fn merge(&mut self, o: &Block) {
        self.runs += o.runs;
        self.mu.merge(&o.mu);
        self.p.merge(&o.p);
        self.q.merge(&o.q);
        self.mu_bar.merge(&o.mu_bar);
        self.p_bar.merge(&o.p_bar);
        self.q_bar.merge(&o.q_bar);
        for k in 0..4 {
            self.occ[k].merge(&o.occ[k]);
            self.occ_bar[k].merge(&o.occ_bar[k]);
        }
        for (a, b) in self.exp.iter_mut().zip(&o.exp) {
            a.merge(b);
        }
        for (a, b) in self.tail.iter_mut().zip(&o.tail) {
            a.merge(b);
        }
        for (a, b) in self.tail_bar.iter_mut().zip(&o.tail_bar) {
            a.merge(b);
        }
        self.below.merge(&o.below);
        self.above.merge(&o.above);
    }
}

/// Pointwise and running statistics over `config.n_runs` independent runs.
///
/// Blocks of runs execute in parallel; their sums are merged in block order,
/// so results do not depend on thread count or scheduling.
pub fn ensemble(
    schedule: &PhaseSchedule,
    policy: &Policy,
    config: &EnsembleConfig,
) -> Result<EnsembleResult> {
    if config.n_runs == 0 {
        return Err(Error::InvalidParameter("n_runs must be at least 1".into()));
    }
    if config.horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    if let Some(end) = schedule.end() {
        if config.horizon > end {
            return Err(Error::SlotBeyondSchedule {
                slot: end,
                end,
            });
        }
    }
    let plan = Plan::new(schedule, policy)?;
    let occupancy_defined = (0..schedule.phases().len()).all(|i| plan.intervals(i).is_some());
    let n_blocks = config.n_runs.div_ceil(BLOCK_RUNS);
    let batch = (rayon::current_num_threads() as u64 * 4).max(1);
    let h = config.horizon as usize;
    let mut total = Block::new(h, config.exp_rates.len(), config.tail_levels.len());

    let mut start = 0;
    while start < n_blocks {
        let end = (start + batch).min(n_blocks);
        let blocks: Vec<Result<Block>> = (start..end)
            .into_par_iter()
            .map(|b| {
                let first = b * BLOCK_RUNS;
                let last = (first + BLOCK_RUNS).min(config.n_runs);
                simulate_block(schedule, &plan, config, first..last)
            })
            .collect();
        for block in blocks {
            total.merge(&block?);
        }
        start = end;
    }

    let n = total.runs;
    let fin = |accs: &[Acc]| accs.iter().map(|a| a.finish(n)).collect::<Vec<_>>();
    Ok(EnsembleResult {
        horizon: config.horizon,
        n_runs: n,
        q_initial: plan.q_place() + config.q0,
        occupancy_defined,
        mu: total.mu.finish(n),
        p: total.p.finish(n),
        q: total.q.finish(n),
        mu_bar: total.mu_bar.finish(n),
        p_bar: total.p_bar.finish(n),
        q_bar: total.q_bar.finish(n),
        occupancy: std::array::from_fn(|k| total.occ[k].finish(n)),
        occupancy_bar: std::array::from_fn(|k| total.occ_bar[k].finish(n)),
        exp_rates: config.exp_rates.clone(),
        exp_moments: fin(&total.exp),
        tail_levels: config.tail_levels.clone(),
        tail: fin(&total.tail),
        tail_bar: fin(&total.tail_bar),
        drift_below: total.below.finish(),
        drift_above: total.above.finish(),
    })
}

fn simulate_block(
    schedule: &PhaseSchedule,
    plan: &Plan,
    config: &EnsembleConfig,
    runs: std::ops::Range<u64>,
) -> Result<Block> {
    let h = config.horizon as usize;
    let n_tail = config.tail_levels.len();
    let mut block = Block::new(h, config.exp_rates.len(), n_tail);
    let mut tail_count = vec![0u64; n_tail];
    for run in runs {
        let seed = config.base_seed.wrapping_add(run);
        let mut engine = SlotEngine::new(schedule, plan, config.discipline, config.q0, seed, false)?;
        let (mut cum_mu, mut cum_q) = (CompensatedSum::default(), CompensatedSum::default());
        let mut cum_p = 0u64;
        let mut occ_count = [0u64; 4];
        tail_count.iter_mut().for_each(|c| *c = 0);
        let mut q = engine.queue().q_total();
        for t in 0..=h {
            // Pointwise statistics of Q(t).
            block.q.add(t, q);
            for (acc, &r) in block.exp.iter_mut().zip(&config.exp_rates) {
                acc.add(t, (r * q).exp());
            }
            for (j, &level) in config.tail_levels.iter().enumerate() {
                block.tail[j].add(t, (q >= level) as u64 as f64);
            }
            if t > 0 {
                let tf = t as f64;
                block.mu_bar.add(t, cum_mu.value() / tf);
                block.p_bar.add(t, cum_p as f64 / tf);
                block.q_bar.add(t, cum_q.value() / tf);
                for (acc, &n) in block.occ_bar.iter_mut().zip(&occ_count) {
                    acc.add(t, n as f64 / tf);
                }
                for (acc, &n) in block.tail_bar.iter_mut().zip(&tail_count) {
                    acc.add(t, n as f64 / tf);
                }
            }
            if t == h {
                // Occupancy of the final state, for completeness of the pointwise series.
                if let Some(iv) = engine.intervals() {
                    block.occ[iv.classify(q).slot()].add(t, 1.0);
                }
                break;
            }
            let mid = engine.intervals().map(|iv| iv.mid);
            let rec = engine.step(None)?;
            block.mu.add(t, rec.mu_offered);
            block.p.add(t, rec.p as u64 as f64);
            if let Some(i) = rec.interval {
                block.occ[i.slot()].add(t, 1.0);
                occ_count[i.slot()] += 1;
            }
            if let Some(mid) = mid {
                let d = rec.q_after - rec.q_before;
                if rec.q_before >= mid {
                    block.above.add(d);
                } else {
                    block.below.add(d);
                }
            }
            for (j, &level) in config.tail_levels.iter().enumerate() {
                tail_count[j] += (q >= level) as u64;
            }
            cum_mu.add(rec.mu_offered);
            cum_p += rec.p as u64;
            cum_q.add(q);
            q = rec.q_after;
        }
        block.runs += 1;
    }
    // Squares of indicators equal the indicators; the generic accumulator already covers them.
    Ok(block)
}
