//! Fitting `q̄(m) = A pᵐ + B` and turning fits into code-property estimates.

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logical::{ProbTriple, RecoveryMode};
use crate::rb::{RunDescriptor, SurvivalDataset, SurvivalRow};
use crate::rng::bootstrap_rng;

const MAX_ITERATIONS: usize = 200;
const STEP_TOLERANCE: f64 = 1e-12;
const FLAT_TOLERANCE: f64 = 1e-12;
const EXTRA_STARTS: [f64; 5] = [0.1, 0.5, 0.9, 0.99, 0.999];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Each length weighted by its number of sequences times shots.
    #[default]
    Homoscedastic,
    /// Additionally divided by the binomial variance `q̄(1 − q̄)`.
    Binomial,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions {
    pub n_bootstrap: usize,
    pub weighting: Weighting,
    /// Seeds the bootstrap resampling.
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> FitOptions {
        FitOptions { n_bootstrap: 1000, weighting: Weighting::Homoscedastic, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn point(x: f64) -> Interval {
        Interval { lo: x, hi: x }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// 16th/84th percentiles of `samples`, widened to include `center`.
    fn percentile68(samples: &mut [f64], center: f64) -> Interval {
        if samples.is_empty() {
            return Interval::point(center);
        }
        samples.sort_by(f64::total_cmp);
        let q = |f: f64| samples[((f * (samples.len() - 1) as f64).round() as usize).min(samples.len() - 1)];
        Interval { lo: q(0.16).min(center), hi: q(0.84).max(center) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamIntervals {
    pub a: Interval,
    pub p: Interval,
    pub b: Interval,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamErrors {
    pub a: f64,
    pub p: f64,
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub a: f64,
    pub p: f64,
    pub b: f64,
    pub ci68: ParamIntervals,
    /// Bootstrap standard deviations.
    pub std_err: ParamErrors,
    pub fidelity: f64,
    pub residual_norm: f64,
    pub n_bootstrap: usize,
    pub flat_decay: bool,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub descriptor: Option<RunDescriptor>,
    #[serde(skip)]
    p_replicates: Vec<f64>,
}

impl DecayFit {
    /// A fit with known parameters and no uncertainty.
    pub fn from_point(a: f64, p: f64, b: f64) -> DecayFit {
        DecayFit {
            a,
            p,
            b,
            ci68: ParamIntervals { a: Interval::point(a), p: Interval::point(p), b: Interval::point(b) },
            std_err: ParamErrors { a: 0.0, p: 0.0, b: 0.0 },
            fidelity: fidelity_from_p(p),
            residual_norm: 0.0,
            n_bootstrap: 0,
            flat_decay: false,
            iterations: 0,
            descriptor: None,
            p_replicates: Vec::new(),
        }
    }

    pub fn with_descriptor(mut self, d: Option<RunDescriptor>) -> DecayFit {
        self.descriptor = d;
        self
    }

    /// Bootstrap replicates of `p`, in replicate order.
    pub fn p_replicates(&self) -> &[f64] {
        &self.p_replicates
    }

    pub fn fidelity_interval(&self) -> Interval {
        Interval { lo: fidelity_from_p(self.ci68.p.lo), hi: fidelity_from_p(self.ci68.p.hi) }
    }
}

/// Average fidelity of a one-qubit channel with depolarizing parameter `p`.
pub fn fidelity_from_p(p: f64) -> f64 {
    (p + 1.0) / 2.0
}

/// Result of fitting one curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveFit {
    pub a: f64,
    pub p: f64,
    pub b: f64,
    pub residual_norm: f64,
    pub iterations: usize,
}

fn model(theta: &Vector3<f64>, m: f64) -> f64 {
    theta[0] * theta[1].powf(m) + theta[2]
}

fn clamp(theta: Vector3<f64>) -> Vector3<f64> {
    Vector3::new(theta[0].clamp(-1.0, 1.0), theta[1].clamp(0.0, 1.0), theta[2].clamp(-1.0, 1.0))
}

fn cost(theta: &Vector3<f64>, ms: &[f64], ys: &[f64], ws: &[f64]) -> f64 {
    ms.iter().zip(ys).zip(ws).map(|((&m, &y), &w)| w * (model(theta, m) - y).powi(2)).sum()
}

/// Damped Gauss–Newton with box projection.
fn levenberg_marquardt(start: Vector3<f64>, ms: &[f64], ys: &[f64], ws: &[f64]) -> (Vector3<f64>, f64, usize) {
    let mut theta = clamp(start);
    let mut current = cost(&theta, ms, ys, ws);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for ((&m, &y), &w) in ms.iter().zip(ys).zip(ws) {
            let pm = theta[1].powf(m);
            let dp = if m == 0.0 { 0.0 } else { theta[0] * m * theta[1].powf(m - 1.0) };
            let j = Vector3::new(pm, dp, 1.0);
            let r = model(&theta, m) - y;
            jtj += w * j * j.transpose();
            jtr += w * r * j;
        }
        let mut accepted = false;
        while lambda < 1e16 {
            let mut damped = jtj;
            for k in 0..3 {
                damped[(k, k)] += lambda * (jtj[(k, k)] + 1e-12);
            }
            let Some(step) = damped.lu().solve(&(-jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let candidate = clamp(theta + step);
            let c = cost(&candidate, ms, ys, ws);
            if c <= current {
                let moved = (candidate - theta).norm();
                theta = candidate;
                current = c;
                lambda = (lambda / 10.0).max(1e-15);
                accepted = true;
                if moved < STEP_TOLERANCE {
                    return (theta, current, iterations);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            break;
        }
    }
    (theta, current, iterations)
}

/// Starting point from the tail value and a log-linear fit of the rest.
fn initial_guess(ms: &[f64], ys: &[f64]) -> Vector3<f64> {
    let last = ms.iter().zip(ys).max_by(|a, b| a.0.total_cmp(b.0)).map(|(_, &y)| y).unwrap_or(0.0);
    let first = ms.iter().zip(ys).min_by(|a, b| a.0.total_cmp(b.0)).map(|(&m, &y)| (m, y)).unwrap_or((1.0, 1.0));
    let b0 = last;
    let sign = if first.1 >= b0 { 1.0 } else { -1.0 };
    let scale = ys.iter().map(|y| y.abs()).fold(1.0, f64::max);
    let pts: Vec<(f64, f64)> = ms
        .iter()
        .zip(ys)
        .filter(|(_, &y)| sign * (y - b0) > 1e-10 * scale)
        .map(|(&m, &y)| (m, (sign * (y - b0)).ln()))
        .collect();
    let p0 = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / n, sy / n);
        let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
        if sxx > 0.0 { (sxy / sxx).exp() } else { 0.9 }
    } else {
        0.9
    };
    let p0 = p0.clamp(1e-6, 1.0);
    let a0 = (first.1 - b0) / p0.powf(first.0);
    clamp(Vector3::new(a0, p0, b0))
}

/// Least-squares fit of `A pᵐ + B` to `(m, q̄)` points with the box
/// `p ∈ [0, 1]`, `A, B ∈ [−1, 1]`. Several starts are tried and the lowest
/// cost kept.
pub fn fit_curve(points: &[(usize, f64)], weights: &[f64]) -> Result<CurveFit> {
    let mut distinct: Vec<usize> = points.iter().map(|&(m, _)| m).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InsufficientDesign(format!(
            "{} distinct sequence lengths, at least 3 needed",
            distinct.len()
        )));
    }
    if weights.len() != points.len() || weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::Domain("weights must be positive, one per point".into()));
    }
    let ms: Vec<f64> = points.iter().map(|&(m, _)| m as f64).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, y)| y).collect();
    let total: f64 = weights.iter().sum();
    let ws: Vec<f64> = weights.iter().map(|w| w / total).collect();

    let guess = initial_guess(&ms, &ys);
    let mut best = levenberg_marquardt(guess, &ms, &ys, &ws);
    for p0 in EXTRA_STARTS {
        let start = Vector3::new(guess[0], p0, guess[2]);
        let cand = levenberg_marquardt(start, &ms, &ys, &ws);
        if cand.1 < best.1 {
            best = cand;
        }
    }
    let (theta, _, iterations) = best;
    let residual_norm = ms.iter().zip(&ys).map(|(&m, &y)| (model(&theta, m) - y).powi(2)).sum::<f64>().sqrt();
    Ok(CurveFit { a: theta[0], p: theta[1], b: theta[2], residual_norm, iterations })
}

fn curve_from_rows(by_m: &[(usize, Vec<SurvivalRow>)], weighting: Weighting) -> (Vec<(usize, f64)>, Vec<f64>) {
    let mut points = Vec::with_capacity(by_m.len());
    let mut weights = Vec::with_capacity(by_m.len());
    for (m, rows) in by_m {
        let qbar = rows.iter().map(SurvivalRow::fraction).sum::<f64>() / rows.len() as f64;
        let n: f64 = rows.iter().map(|r| r.shots as f64).sum();
        let w = match weighting {
            Weighting::Homoscedastic => n,
            Weighting::Binomial => {
                let floor = 0.5 / n;
                let q = qbar.clamp(floor, 1.0 - floor);
                n / (q * (1.0 - q))
            }
        };
        points.push((*m, qbar));
        weights.push(w);
    }
    (points, weights)
}

fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Fits a dataset, with sequence-level bootstrap intervals.
pub fn fit_decay(dataset: &SurvivalDataset, options: &FitOptions) -> Result<DecayFit> {
    let by_m: Vec<(usize, Vec<SurvivalRow>)> = dataset.by_length().into_iter().collect();
    if by_m.len() < 3 {
        return Err(Error::InsufficientDesign(format!(
            "dataset has {} distinct sequence lengths, at least 3 needed",
            by_m.len()
        )));
    }
    let (points, weights) = curve_from_rows(&by_m, options.weighting);
    let descriptor = dataset.descriptor().cloned();

    let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, y)| (lo.min(y), hi.max(y)));
    if hi - lo <= FLAT_TOLERANCE {
        let b = points.iter().map(|&(_, y)| y).sum::<f64>() / points.len() as f64;
        let mut fit = DecayFit::from_point(0.0, 1.0, b);
        fit.ci68.p = Interval { lo: 0.0, hi: 1.0 };
        fit.flat_decay = true;
        fit.residual_norm = points.iter().map(|&(_, y)| (y - b).powi(2)).sum::<f64>().sqrt();
        return Ok(fit.with_descriptor(descriptor));
    }

    let point = fit_curve(&points, &weights)?;
    let replicates: Vec<CurveFit> = (0..options.n_bootstrap)
        .into_par_iter()
        .map(|k| {
            let mut rng = bootstrap_rng(options.seed, k);
            let resampled: Vec<(usize, Vec<SurvivalRow>)> = by_m
                .iter()
                .map(|(m, rows)| (*m, (0..rows.len()).map(|_| rows[rng.gen_range(0..rows.len())]).collect()))
                .collect();
            let (pts, ws) = curve_from_rows(&resampled, options.weighting);
            fit_curve(&pts, &ws)
        })
        .collect::<Result<Vec<_>>>()?;

    let column = |f: fn(&CurveFit) -> f64| replicates.iter().map(f).collect::<Vec<f64>>();
    let (mut ra, mut rp, mut rb) = (column(|c| c.a), column(|c| c.p), column(|c| c.b));
    let std_err = ParamErrors { a: std_dev(&ra), p: std_dev(&rp), b: std_dev(&rb) };
    let p_replicates = rp.clone();
    let ci68 = ParamIntervals {
        a: Interval::percentile68(&mut ra, point.a),
        p: Interval::percentile68(&mut rp, point.p),
        b: Interval::percentile68(&mut rb, point.b),
    };
    Ok(DecayFit {
        a: point.a,
        p: point.p,
        b: point.b,
        ci68,
        std_err,
        fidelity: fidelity_from_p(point.p),
        residual_norm: point.residual_norm,
        n_bootstrap: options.n_bootstrap,
        flat_decay: false,
        iterations: point.iterations,
        descriptor,
        p_replicates,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodePropertyEstimate {
    pub pr_no: f64,
    pub pr_co: f64,
    pub pr_un: f64,
    pub pr_no_ci68: Interval,
    pub pr_co_ci68: Interval,
    pub pr_un_ci68: Interval,
    /// Standard deviations over paired bootstrap replicates, or from the
    /// fits' standard errors when replicates cannot be paired.
    pub std_err: ProbTriple,
}

impl CodePropertyEstimate {
    pub fn point(&self) -> ProbTriple {
        ProbTriple { pr_no: self.pr_no, pr_co: self.pr_co, pr_un: self.pr_un }
    }
}

/// Code properties from a lookup-recovery fit and a no-recovery fit of the
/// same experiment. Intervals pair the bootstrap replicates of the two fits
/// when both have the same number; otherwise they combine the endpoints.
pub fn estimate_code_properties(fit_rec: &DecayFit, fit_norec: &DecayFit) -> Result<CodePropertyEstimate> {
    if let (Some(r), Some(n)) = (&fit_rec.descriptor, &fit_norec.descriptor) {
        if !r.same_experiment(n) {
            return Err(Error::Mismatch("fits come from different codes, noise or SPAM".into()));
        }
        if r.recovery != RecoveryMode::Lookup || n.recovery != RecoveryMode::Trivial {
            return Err(Error::Mismatch(format!(
                "expected lookup and trivial recovery fits, got {:?} and {:?}",
                r.recovery, n.recovery
            )));
        }
    }
    let triple = |p_rec: f64, p_norec: f64| ProbTriple::from_fidelities(fidelity_from_p(p_rec), fidelity_from_p(p_norec));
    let point = triple(fit_rec.p, fit_norec.p);

    let (rr, rn) = (fit_rec.p_replicates(), fit_norec.p_replicates());
    let (no, co, un, std_err) = if !rr.is_empty() && rr.len() == rn.len() {
        let samples: Vec<ProbTriple> = rr.iter().zip(rn).map(|(&a, &b)| triple(a, b)).collect();
        let values = |f: fn(&ProbTriple) -> f64| samples.iter().map(f).collect::<Vec<_>>();
        let (mut vno, mut vco, mut vun) = (values(|t| t.pr_no), values(|t| t.pr_co), values(|t| t.pr_un));
        let std_err = ProbTriple { pr_no: std_dev(&vno), pr_co: std_dev(&vco), pr_un: std_dev(&vun) };
        (
            Interval::percentile68(&mut vno, point.pr_no),
            Interval::percentile68(&mut vco, point.pr_co),
            Interval::percentile68(&mut vun, point.pr_un),
            std_err,
        )
    } else {
        let (fr, fnr) = (fit_rec.fidelity_interval(), fit_norec.fidelity_interval());
        let (sr, sn) = (fit_rec.std_err.p / 2.0, fit_norec.std_err.p / 2.0);
        (
            fnr,
            Interval { lo: fr.lo - fnr.hi, hi: fr.hi - fnr.lo },
            Interval { lo: 1.0 - fr.hi, hi: 1.0 - fr.lo },
            ProbTriple { pr_no: sn, pr_co: sr.hypot(sn), pr_un: sr },
        )
    };
    Ok(CodePropertyEstimate {
        pr_no: point.pr_no,
        pr_co: point.pr_co,
        pr_un: point.pr_un,
        pr_no_ci68: no,
        pr_co_ci68: co,
        pr_un_ci68: un,
        std_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lengths() -> Vec<usize> {
        (0..10).map(|k| 1usize << k).collect()
    }

    #[test]
    fn recovers_exact_model() {
        let (a, p, b): (f64, f64, f64) = (0.5, 0.9626666666666667, 0.5);
        let pts: Vec<(usize, f64)> = lengths().into_iter().map(|m| (m, a * p.powi(m as i32) + b)).collect();
        let fit = fit_curve(&pts, &vec![1.0; pts.len()]).unwrap();
        assert!((fit.a - a).abs() < 1e-9 && (fit.p - p).abs() < 1e-9 && (fit.b - b).abs() < 1e-9, "{fit:?}");
    }

    #[test]
    fn too_few_lengths() {
        let pts = [(1, 0.9), (2, 0.8), (1, 0.91)];
        assert!(matches!(fit_curve(&pts, &[1.0; 3]), Err(Error::InsufficientDesign(_))));
    }

    #[test]
    fn flat_dataset_is_flagged() {
        let rows = [1, 2, 4]
            .iter()
            .flat_map(|&m| (0..3).map(move |i| SurvivalRow { m, sequence_index: i, survivals: 10, shots: 10 }))
            .collect();
        let data = SurvivalDataset::new(rows, None).unwrap();
        let fit = fit_decay(&data, &FitOptions::default()).unwrap();
        assert!(fit.flat_decay);
        assert_eq!((fit.b, fit.ci68.p), (1.0, Interval { lo: 0.0, hi: 1.0 }));
    }

    #[test]
    fn properties_from_exact_fits() {
        let est = estimate_code_properties(
            &DecayFit::from_point(0.5, 0.9626666666666667, 0.5),
            &DecayFit::from_point(0.5, 0.6386666666666667, 0.5),
        )
        .unwrap();
        assert!((est.pr_no - 0.8193333333333334).abs() < 1e-12);
        assert!((est.pr_co - 0.162).abs() < 1e-12);
        assert!((est.pr_un - 0.0186666666666667).abs() < 1e-12);
        let same = estimate_code_properties(&DecayFit::from_point(0.5, 0.9, 0.5), &DecayFit::from_point(0.5, 0.9, 0.5)).unwrap();
        assert_eq!(same.pr_co, 0.0);
        let perfect = estimate_code_properties(&DecayFit::from_point(0.5, 1.0, 0.5), &DecayFit::from_point(0.5, 0.7, 0.5)).unwrap();
        assert_eq!(perfect.pr_un, 0.0);
    }

    #[test]
    fn percentile_interval_contains_center() {
        let mut xs = vec![1.0, 2.0, 3.0];
        let i = Interval::percentile68(&mut xs, 10.0);
        assert!(i.contains(10.0));
    }
}
