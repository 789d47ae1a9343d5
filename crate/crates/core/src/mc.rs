//! Monte Carlo estimates of predicate tail probabilities and filter rates.
//!
//! Trial `i` draws its points from its own ChaCha8 stream (`seed`, stream
//! `i`), and per-trial results are merged through integer counters, so the
//! output depends only on the seed and the configuration, never on how the
//! trials were split across worker threads.

use std::cmp::Ordering;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bounds::{insphere_tail, Domain};
use crate::dim::{Dim, PredicateKind, Precision};
use crate::predicates::{Certificate, Sign, StaticFilter};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment configuration: {0}")]
    Config(String),
    #[error("could not start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Parameters of one experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub dim: Dim,
    pub domain: Domain,
    pub samples: u64,
    pub v_grid: Vec<f64>,
    pub seed: u64,
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn new(dim: Dim, domain: Domain, samples: u64, seed: u64) -> Self {
        ExperimentConfig { dim, domain, samples, v_grid: default_v_grid(), seed, workers: 1 }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.samples == 0 {
            return Err(HarnessError::Config("samples must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(HarnessError::Config("workers must be at least 1".into()));
        }
        if self.v_grid.is_empty() {
            return Err(HarnessError::Config("V grid is empty".into()));
        }
        if let Some(v) = self.v_grid.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
            return Err(HarnessError::Config(format!("V grid value {v} is outside (0, 1)")));
        }
        Ok(())
    }
}

/// 24 logarithmically spaced values per decade, `10^(-8 + k/24)` for
/// `k = 0 .. 168`.
pub fn default_v_grid() -> Vec<f64> {
    (0..168).map(|k| 10f64.powf(-8.0 + k as f64 / 24.0)).collect()
}

/// The random stream of trial `index`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Writes one uniform point of `domain` into `out` (`out.len()` is the
/// dimension). Ball points are drawn by rejection from the cube.
pub fn sample_point<R: Rng + ?Sized>(domain: Domain, rng: &mut R, out: &mut [f64]) {
    loop {
        for x in out.iter_mut() {
            *x = rng.random_range(-1.0..=1.0);
        }
        if domain == Domain::Cube || out.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            return;
        }
    }
}

fn sample_tuple(cfg: &ExperimentConfig, points: usize, index: u64, out: &mut Vec<f64>) {
    let d = cfg.dim.get();
    out.clear();
    out.resize(points * d, 0.0);
    let mut rng = trial_rng(cfg.seed, index);
    for p in out.chunks_mut(d) {
        sample_point(cfg.domain, &mut rng, p);
    }
}

/// Runs `trial` for every index on a pool of `cfg.workers` threads and sums
/// the per-trial counter vectors.
fn run_counted<F>(cfg: &ExperimentConfig, width: usize, trial: F) -> Result<Vec<u64>, HarnessError>
where
    F: Fn(u64, &mut Vec<f64>, &mut [u64]) + Sync,
{
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build()?;
    let counts = pool.install(|| {
        (0..cfg.samples)
            .into_par_iter()
            .fold(
                || (Vec::new(), vec![0u64; width]),
                |(mut buf, mut acc), i| {
                    trial(i, &mut buf, &mut acc);
                    (buf, acc)
                },
            )
            .map(|(_, acc)| acc)
            .reduce(
                || vec![0u64; width],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    });
    Ok(counts)
}

/// One V of the empirical tail curve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRow {
    #[serde(rename = "V")]
    pub v: f64,
    /// Fraction of trials with `|insphere| <= V`.
    pub empirical: f64,
    /// Binomial standard error `sqrt(p (1 - p) / n)`.
    pub stderr: f64,
    pub analytic_ball: f64,
    pub analytic_cube: f64,
    pub samples: u64,
}

/// Samples `dim + 1` points per trial, computes the exact insphere value and
/// counts, for every V of the grid, how often `|value| <= V`.
pub fn run_tail_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>, HarnessError> {
    let filter = StaticFilter::new(PredicateKind::Insphere, cfg.dim, Precision::Double);
    let mut order: Vec<usize> = (0..cfg.v_grid.len()).collect();
    order.sort_by(|&a, &b| cfg.v_grid[a].total_cmp(&cfg.v_grid[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| cfg.v_grid[i]).collect();
    let points = PredicateKind::Insphere.arity(cfg.dim);
    let hist = run_counted(cfg, sorted.len(), |i, buf, acc| {
        sample_tuple(cfg, points, i, buf);
        let value = filter.eval_exact(buf).expect("sampled coordinates are in range");
        let approx = value.to_f64().abs();
        // Rounding is monotone, so only an exact tie needs the exact compare.
        let mut k = sorted.partition_point(|&v| v < approx);
        if k < sorted.len() && sorted[k] == approx && value.cmp_abs_f64(approx) == Ordering::Greater {
            k += 1;
        }
        if k < sorted.len() {
            acc[k] += 1;
        }
    })?;
    let n = cfg.samples as f64;
    let mut cumulative = vec![0u64; sorted.len()];
    let mut running = 0;
    for (c, h) in cumulative.iter_mut().zip(&hist) {
        running += h;
        *c = running;
    }
    let mut rows = vec![None; cfg.v_grid.len()];
    for (rank, &orig) in order.iter().enumerate() {
        let v = sorted[rank];
        let p = cumulative[rank] as f64 / n;
        rows[orig] = Some(ExperimentRow {
            v,
            empirical: p,
            stderr: (p * (1.0 - p) / n).sqrt(),
            analytic_ball: insphere_tail(cfg.dim, v, Domain::Ball),
            analytic_cube: insphere_tail(cfg.dim, v, Domain::Cube),
            samples: cfg.samples,
        });
    }
    Ok(rows.into_iter().map(|r| r.expect("every grid value filled")).collect())
}

/// Summary of a filter experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FilterOutcome {
    pub dim: Dim,
    pub domain: Domain,
    pub precision: Precision,
    pub threshold: f64,
    pub samples: u64,
    pub fallbacks: u64,
    pub fallback_rate: f64,
    /// Binomial standard error of the fallback rate.
    pub stderr: f64,
    /// Certified results whose sign disagreed with the exact sign.
    pub certified_wrong: u64,
}

/// Classifies random insphere instances with the static filter and checks
/// every certified sign against the exact sign.
pub fn run_filter_experiment(cfg: &ExperimentConfig, precision: Precision) -> Result<FilterOutcome, HarnessError> {
    let filter = StaticFilter::new(PredicateKind::Insphere, cfg.dim, precision);
    let points = PredicateKind::Insphere.arity(cfg.dim);
    let counts = run_counted(cfg, 2, |i, buf, acc| {
        sample_tuple(cfg, points, i, buf);
        let r = filter.classify(buf).expect("sampled coordinates are in range");
        match r.certificate {
            Certificate::ExactFallback => acc[0] += 1,
            Certificate::FloatCertified => {
                let exact = filter.eval_exact(buf).expect("sampled coordinates are in range");
                if Sign::of_exact(&exact) != r.sign {
                    acc[1] += 1;
                }
            }
        }
    })?;
    let n = cfg.samples as f64;
    let rate = counts[0] as f64 / n;
    Ok(FilterOutcome {
        dim: cfg.dim,
        domain: cfg.domain,
        precision,
        threshold: filter.threshold(),
        samples: cfg.samples,
        fallbacks: counts[0],
        fallback_rate: rate,
        stderr: (rate * (1.0 - rate) / n).sqrt(),
        certified_wrong: counts[1],
    })
}

/// Least-squares slope of `ln(empirical)` against `ln(V)` over rows with
/// `lo <= V <= hi` and a non-zero count.
pub fn log_log_slope(rows: &[ExperimentRow], lo: f64, hi: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.v >= lo && r.v <= hi && r.empirical > 0.0)
        .map(|r| (r.v.ln(), r.empirical.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

pub const TAIL_SCHEMA: &str = "certpred.tail.v1";
pub const FILTER_SCHEMA: &str = "certpred.filter.v1";

fn write_preamble<W: Write>(cfg: &ExperimentConfig, schema: &str, w: &mut W) -> io::Result<()> {
    writeln!(w, "# schema: {schema}")?;
    writeln!(w, "# dim={} domain={} samples={} seed={}", cfg.dim, cfg.domain, cfg.samples, cfg.seed)
}

/// CSV with two comment lines (schema, configuration), then
/// `V,empirical,stderr,analytic_ball,analytic_cube,samples`. The worker
/// count is left out so that runs differing only in it are byte-identical.
pub fn write_tail_csv<W: Write>(cfg: &ExperimentConfig, rows: &[ExperimentRow], mut w: W) -> io::Result<()> {
    write_preamble(cfg, TAIL_SCHEMA, &mut w)?;
    writeln!(w, "V,empirical,stderr,analytic_ball,analytic_cube,samples")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{},{}", r.v, r.empirical, r.stderr, r.analytic_ball, r.analytic_cube, r.samples)?;
    }
    Ok(())
}

/// JSON document with the configuration echoed next to the rows.
pub fn tail_json(cfg: &ExperimentConfig, rows: &[ExperimentRow]) -> serde_json::Value {
    serde_json::json!({ "schema": TAIL_SCHEMA, "config": cfg, "rows": rows })
}

pub fn write_filter_csv<W: Write>(cfg: &ExperimentConfig, o: &FilterOutcome, mut w: W) -> io::Result<()> {
    write_preamble(cfg, FILTER_SCHEMA, &mut w)?;
    writeln!(w, "dim,domain,precision,threshold,samples,fallbacks,fallback_rate,stderr,certified_wrong")?;
    writeln!(
        w,
        "{},{},{},{},{},{},{},{},{}",
        o.dim, o.domain, o.precision, o.threshold, o.samples, o.fallbacks, o.fallback_rate, o.stderr, o.certified_wrong
    )
}

pub fn filter_json(cfg: &ExperimentConfig, o: &FilterOutcome) -> serde_json::Value {
    serde_json::json!({ "schema": FILTER_SCHEMA, "config": cfg, "summary": o })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(d: usize, domain: Domain, samples: u64) -> ExperimentConfig {
        ExperimentConfig::new(Dim::new(d).unwrap(), domain, samples, 7)
    }

    #[test]
    fn default_grid_shape() {
        let g = default_v_grid();
        assert_eq!(g.len(), 168);
        assert_eq!(g[0], 1e-8);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(*g.last().unwrap() < 0.1);
    }

    #[test]
    fn sampled_points_stay_in_domain() {
        let mut rng = trial_rng(3, 0);
        let mut p = [0.0; 3];
        for _ in 0..10_000 {
            sample_point(Domain::Cube, &mut rng, &mut p);
            assert!(p.iter().all(|x| x.abs() <= 1.0));
            sample_point(Domain::Ball, &mut rng, &mut p);
            assert!(p.iter().map(|x| x * x).sum::<f64>() <= 1.0);
        }
    }

    #[test]
    fn ball_second_moment() {
        // E|p|^2 = d / (d + 2) for the uniform ball.
        let mut rng = trial_rng(11, 0);
        let mut p = [0.0; 2];
        let n = 1_000_000;
        let mut sum = 0.0;
        for _ in 0..n {
            sample_point(Domain::Ball, &mut rng, &mut p);
            sum += p[0] * p[0] + p[1] * p[1];
        }
        assert!((sum / n as f64 - 0.5).abs() < 0.002);
    }

    #[test]
    fn streams_are_independent_of_order() {
        let a: f64 = trial_rng(5, 42).random();
        let _ = trial_rng(5, 41).random::<f64>();
        let b: f64 = trial_rng(5, 42).random();
        assert_eq!(a, b);
        assert_ne!(a, trial_rng(5, 43).random::<f64>());
    }

    #[test]
    fn single_sample_run() {
        let rows = run_tail_experiment(&cfg(2, Domain::Ball, 1)).unwrap();
        assert_eq!(rows.len(), 168);
        assert!(rows.iter().all(|r| r.empirical == 0.0 || r.empirical == 1.0));
    }

    #[test]
    fn rows_are_monotone_with_stderr() {
        let rows = run_tail_experiment(&cfg(2, Domain::Cube, 20_000)).unwrap();
        assert!(rows.windows(2).all(|w| w[0].empirical <= w[1].empirical));
        for r in &rows {
            let expected = (r.empirical * (1.0 - r.empirical) / 20_000.0).sqrt();
            assert_eq!(r.stderr, expected);
        }
        assert!(rows.last().unwrap().empirical > 0.0);
    }

    #[test]
    fn unsorted_grid_keeps_caller_order() {
        let mut c = cfg(2, Domain::Ball, 5_000);
        c.v_grid = vec![0.05, 0.001, 0.01];
        let rows = run_tail_experiment(&c).unwrap();
        assert_eq!(rows.iter().map(|r| r.v).collect::<Vec<_>>(), c.v_grid);
        assert!(rows[1].empirical <= rows[2].empirical && rows[2].empirical <= rows[0].empirical);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut c = cfg(3, Domain::Cube, 3_000);
        let one = run_tail_experiment(&c).unwrap();
        c.workers = 4;
        assert_eq!(one, run_tail_experiment(&c).unwrap());
        let f1 = run_filter_experiment(&c, Precision::Single).unwrap();
        c.workers = 1;
        assert_eq!(f1, run_filter_experiment(&c, Precision::Single).unwrap());
    }

    #[test]
    fn invalid_configs() {
        assert!(run_tail_experiment(&cfg(2, Domain::Ball, 0)).is_err());
        let mut c = cfg(2, Domain::Ball, 10);
        c.v_grid = vec![1.5];
        assert!(c.validate().is_err());
        c.v_grid = vec![];
        assert!(c.validate().is_err());
        c.v_grid = vec![0.5];
        c.workers = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn slope_of_a_power_law() {
        let rows: Vec<ExperimentRow> = default_v_grid()
            .into_iter()
            .map(|v| ExperimentRow { v, empirical: 3.0 * v.powf(0.75), stderr: 0.0, analytic_ball: 0.0, analytic_cube: 0.0, samples: 1 })
            .collect();
        let s = log_log_slope(&rows, 1e-6, 1e-2).unwrap();
        assert!((s - 0.75).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let c = cfg(1, Domain::Ball, 100);
        let rows = run_tail_experiment(&c).unwrap();
        let mut out = Vec::new();
        write_tail_csv(&c, &rows, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# schema: certpred.tail.v1"));
        assert_eq!(lines.next(), Some("# dim=1 domain=ball samples=100 seed=7"));
        assert_eq!(lines.next(), Some("V,empirical,stderr,analytic_ball,analytic_cube,samples"));
        assert_eq!(lines.count(), 168);
    }
}
