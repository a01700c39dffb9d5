//! One trial of each experiment. A trial draws everything it needs from
//! streams keyed by `(seed, trial, experiment tag)`, so its result does not
//! depend on which thread runs it or in what order.

use onebit_core::nets::{
    cap_witness_set, greedy_packing, is_covering, is_separated, packing_sandwich, shatter_check,
    vc_entropy_check, NetReport, Sandwich, SetClass,
};
use onebit_core::onebit::{hamming_distance, one_bit_map};
use onebit_core::processes::{
    compare_chain, estimate_gaussian_width, estimate_hemisphere_width_cholesky, sudakov_check,
    ProcessMetric,
};
use onebit_core::rng::{derive_seed, stream, StreamRng};
use onebit_core::sphere::{geodesic_distance, in_wedge, sample_uniform_sphere, transversal_probability};
use onebit_core::stats::binomial_sigma;
use onebit_core::verify::{
    finite_embedding, linear_rip, metric_ratio_check, one_bit_rip, sign_product_rip,
    small_cells_check,
};
use onebit_core::{EnsembleKind, Geodesic, MeasurementEnsemble, PointSet, SparseSpec};

use crate::config::{Experiment, ExperimentConfig, MSetting};
use crate::error::HarnessError;

/// Near-duplicate points appended to every sparse net.
pub const PERTURBATIONS: usize = 10;

/// Acceptance band for `ω² / (s ln(n/s))`.
pub const WIDTH_RATIO_BAND: (f64, f64) = (0.2, 5.0);

/// Bound on the Sudakov ratios and constant in the entropy comparison chain.
pub const SUDAKOV_CONSTANT: f64 = 3.0;

/// Scale grid used by the Sudakov experiment.
pub const SUDAKOV_DELTAS: [f64; 10] = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5];

/// Monte Carlo tolerance, in binomial standard deviations, for frequencies.
pub const FREQUENCY_SIGMAS: f64 = 3.0;

const ENSEMBLE_TAG: u64 = 0x0065_6e73;

/// Values of one trial, in the order of [`statistics`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub values: Vec<f64>,
    pub pass: bool,
    /// The experiment's headline discrepancy, summarized as a maximum.
    pub discrepancy: f64,
}

/// Names of the statistics each trial reports, in output order.
pub fn statistics(exp: Experiment) -> &'static [&'static str] {
    match exp {
        Experiment::Crofton | Experiment::Transversal => &["abs_error"],
        Experiment::SmallCells => &["max_cell_diameter", "num_cells"],
        Experiment::Rip | Experiment::SignProduct | Experiment::LinearRip => &["sup_discrepancy"],
        Experiment::Widths => &["gaussian_width", "hemisphere_width", "width_ratio"],
        Experiment::Sudakov => &[
            "gaussian_width",
            "hemisphere_width",
            "gaussian_ratio",
            "hemisphere_ratio",
            "compare_violations",
        ],
        Experiment::Vc => &[
            "shattered_n2",
            "shattered_n3",
            "shattered_n4",
            "shattered_n5",
            "realized_dichotomies",
            "sauer_bound",
            "entropy_max_ratio",
        ],
        Experiment::Nets => &["packing_double", "covering", "packing"],
        Experiment::MetricRatio => &["sup_ratio", "centers"],
        Experiment::Embed => &["sup_discrepancy", "m"],
        Experiment::All => &[],
    }
}

fn outcome(values: Vec<f64>, pass: bool, discrepancy: f64) -> TrialOutcome {
    TrialOutcome {
        values,
        pass,
        discrepancy,
    }
}

/// Runs trial `trial` of `cfg`.
pub fn run_trial(cfg: &ExperimentConfig, trial: u64) -> Result<TrialOutcome, HarnessError> {
    let exp = cfg.experiment;
    let mut rng = stream(cfg.seed, trial, exp.tag());
    let ens_seed = derive_seed(cfg.seed, trial, exp.tag() ^ ENSEMBLE_TAG);
    let out = match exp {
        Experiment::Crofton => crofton(cfg, ens_seed, &mut rng)?,
        Experiment::Transversal => transversal(cfg, ens_seed, &mut rng)?,
        Experiment::SmallCells => {
            let points = sparse_net(cfg, &mut rng)?;
            let ens = MeasurementEnsemble::draw(EnsembleKind::UniformSphere, cfg.n, cfg.m, ens_seed)?;
            let r = small_cells_check(&points, &ens, cfg.delta)?;
            outcome(
                vec![r.max_cell_diameter, r.num_cells as f64],
                r.pass(),
                r.max_cell_diameter,
            )
        }
        Experiment::Rip | Experiment::SignProduct | Experiment::LinearRip => {
            let points = sparse_net(cfg, &mut rng)?;
            let kind = if exp == Experiment::Rip {
                EnsembleKind::UniformSphere
            } else {
                EnsembleKind::Gaussian
            };
            let ens = MeasurementEnsemble::draw(kind, cfg.n, cfg.m, ens_seed)?;
            let r = match exp {
                Experiment::Rip => one_bit_rip(&points, &ens, cfg.delta)?,
                Experiment::SignProduct => sign_product_rip(&points, &ens, cfg.delta)?,
                _ => linear_rip(&points, &ens, cfg.delta)?,
            };
            outcome(vec![r.sup_discrepancy], r.pass, r.sup_discrepancy)
        }
        Experiment::Widths => widths(cfg, &mut rng)?,
        Experiment::Sudakov => sudakov(cfg, &mut rng)?,
        Experiment::Vc => vc(cfg, &mut rng)?,
        Experiment::Nets => {
            let points = sparse_net(cfg, &mut rng)?;
            let (_, sw) = checked_net(&points, cfg.delta, &mut rng)?;
            outcome(
                vec![sw.packing_double as f64, sw.covering as f64, sw.packing as f64],
                sw.holds(),
                0.0,
            )
        }
        Experiment::MetricRatio => {
            let points = sparse_net(cfg, &mut rng)?;
            let min_sep = cfg.delta / 4.0;
            let (net, _) = checked_net(&points, min_sep, &mut rng)?;
            let ens = MeasurementEnsemble::draw(EnsembleKind::UniformSphere, cfg.n, cfg.m, ens_seed)?;
            let r = metric_ratio_check(&net.centers, &ens, min_sep)?;
            outcome(vec![r.sup_ratio, net.packing_size as f64], r.pass, r.sup_ratio)
        }
        Experiment::Embed => {
            let points = PointSet::uniform(cfg.n, cfg.net_size, &mut rng)?;
            let (m, r) = match cfg.m_setting {
                MSetting::Auto => {
                    let (ens, r) = finite_embedding(&points, cfg.delta, cfg.safety, &mut rng)?;
                    (ens.m(), r)
                }
                MSetting::Fixed(m) => {
                    let ens = MeasurementEnsemble::draw(EnsembleKind::UniformSphere, cfg.n, m, ens_seed)?;
                    (m, one_bit_rip(&points, &ens, cfg.delta)?)
                }
            };
            outcome(vec![r.sup_discrepancy, m as f64], r.pass, r.sup_discrepancy)
        }
        Experiment::All => return Err(HarnessError::Usage("`all` is not a single experiment".into())),
    };
    debug_assert_eq!(out.values.len(), statistics(exp).len());
    Ok(out)
}

/// `net_size` sparse samples plus [`PERTURBATIONS`] near-copies.
pub fn sparse_net(cfg: &ExperimentConfig, rng: &mut StreamRng) -> Result<PointSet, HarnessError> {
    let spec = SparseSpec::new(cfg.n, cfg.s)?;
    Ok(PointSet::sparse_net(
        spec,
        cfg.net_size + PERTURBATIONS,
        PERTURBATIONS,
        rng,
    )?)
}

/// Greedy packing with its separation, covering and capacity sandwich
/// verified exhaustively; any violation aborts the run.
pub fn checked_net(
    points: &PointSet,
    delta: f64,
    rng: &mut StreamRng,
) -> Result<(NetReport, Sandwich), HarnessError> {
    let net = greedy_packing(points, delta, rng)?;
    if !is_separated(&net.centers, delta) {
        return Err(HarnessError::Invariant(format!("packing at {delta} is not separated")));
    }
    if !is_covering(points, &net.centers, delta) {
        return Err(HarnessError::Invariant(format!("packing at {delta} is not a covering")));
    }
    let sw = packing_sandwich(points, delta, rng)?;
    if !sw.holds() {
        return Err(HarnessError::Invariant(format!("capacity sandwich fails: {sw:?}")));
    }
    Ok((net, sw))
}

fn frequency_outcome(freq: f64, p: f64, m: usize) -> TrialOutcome {
    let err = (freq - p).abs();
    outcome(vec![err], err <= FREQUENCY_SIGMAS * binomial_sigma(p, m), err)
}

fn crofton(cfg: &ExperimentConfig, ens_seed: u64, rng: &mut StreamRng) -> Result<TrialOutcome, HarnessError> {
    let x = sample_uniform_sphere(cfg.n, rng)?;
    let y = sample_uniform_sphere(cfg.n, rng)?;
    let d = geodesic_distance(&x, &y)?;
    let ens = MeasurementEnsemble::draw(EnsembleKind::UniformSphere, cfg.n, cfg.m, ens_seed)?;
    let freq = hamming_distance(&one_bit_map(&ens, &x)?, &one_bit_map(&ens, &y)?)?;
    Ok(frequency_outcome(freq, d, cfg.m))
}

fn transversal(cfg: &ExperimentConfig, ens_seed: u64, rng: &mut StreamRng) -> Result<TrialOutcome, HarnessError> {
    let x = sample_uniform_sphere(cfg.n, rng)?;
    let y = sample_uniform_sphere(cfg.n, rng)?;
    let d = geodesic_distance(&x, &y)?;
    let geo = Geodesic::new(x.clone(), y.clone())?;
    let mut theta_rng = stream(ens_seed, 0, 0);
    let mut hits = 0usize;
    for _ in 0..cfg.m {
        let theta = sample_uniform_sphere(cfg.n, &mut theta_rng)?;
        if in_wedge(&theta, &x, &y)? && geo.transversal(&theta)? {
            hits += 1;
        }
    }
    let p = transversal_probability(cfg.n, d);
    Ok(frequency_outcome(hits as f64 / cfg.m as f64, p, cfg.m))
}

fn widths(cfg: &ExperimentConfig, rng: &mut StreamRng) -> Result<TrialOutcome, HarnessError> {
    let spec = SparseSpec::new(cfg.n, cfg.s)?;
    let points = PointSet::sparse(spec, cfg.net_size, rng)?;
    let omega = estimate_gaussian_width(&points, cfg.inner_trials, rng)?;
    let h = estimate_hemisphere_width_cholesky(&points, cfg.inner_trials, rng)?;
    let ratio = omega.value * omega.value / spec.complexity();
    let (lo, hi) = WIDTH_RATIO_BAND;
    Ok(outcome(
        vec![omega.value, h.value, ratio],
        (lo..=hi).contains(&ratio),
        ratio,
    ))
}

/// Sudakov ratios in both process metrics and violations of the entropy
/// comparison chain, for one sparse net.
pub fn sudakov_on(
    points: &PointSet,
    omega: f64,
    hemisphere: f64,
) -> Result<(f64, f64, usize), HarnessError> {
    let w = |value| onebit_core::processes::WidthEstimate {
        value,
        std_error: 0.0,
        trials: 0,
        method: onebit_core::processes::WidthMethod::GaussianWidth,
    };
    let g = sudakov_check(points, ProcessMetric::Gaussian, &SUDAKOV_DELTAS, &w(omega))?;
    // N(K, √d, √δ) = N(K, d, δ): the hemisphere metric is probed at radius √δ.
    let radii: Vec<f64> = SUDAKOV_DELTAS.iter().map(|d| d.sqrt()).collect();
    let h = sudakov_check(points, ProcessMetric::Hemisphere, &radii, &w(hemisphere))?;
    let chain = compare_chain(points, &SUDAKOV_DELTAS, omega, hemisphere, SUDAKOV_CONSTANT)?;
    let violations = chain.iter().filter(|row| !row.holds()).count();
    Ok((g.max_ratio, h.max_ratio, violations))
}

fn sudakov(cfg: &ExperimentConfig, rng: &mut StreamRng) -> Result<TrialOutcome, HarnessError> {
    let points = sparse_net(cfg, rng)?;
    let omega = estimate_gaussian_width(&points, cfg.inner_trials, rng)?;
    let h = estimate_hemisphere_width_cholesky(&points, cfg.inner_trials, rng)?;
    let (g_ratio, h_ratio, violations) = sudakov_on(&points, omega.value, h.value)?;
    let pass = g_ratio <= SUDAKOV_CONSTANT && h_ratio <= SUDAKOV_CONSTANT && violations == 0;
    Ok(outcome(
        vec![omega.value, h.value, g_ratio, h_ratio, violations as f64],
        pass,
        g_ratio.max(h_ratio),
    ))
}

fn vc(cfg: &ExperimentConfig, rng: &mut StreamRng) -> Result<TrialOutcome, HarnessError> {
    let mut values = Vec::with_capacity(7);
    let mut pass = true;
    for n in 2..=5 {
        let r = shatter_check(&cap_witness_set(n)?, rng, cfg.inner_trials)?;
        pass &= r.shattered;
        values.push(if r.shattered { 1.0 } else { 0.0 });
    }
    let points = PointSet::uniform(cfg.n, cfg.net_size, rng)?;
    let r = shatter_check(&points, rng, cfg.inner_trials)?;
    let bound = r.sauer_bound.unwrap_or(f64::INFINITY);
    pass &= (r.dichotomies_realized as f64) <= bound;
    values.push(r.dichotomies_realized as f64);
    values.push(bound);

    let sample = PointSet::uniform(cfg.n, 30, rng)?;
    let entropy = vc_entropy_check(
        cfg.n + 1,
        &[0.1, 0.2, 0.4],
        &sample,
        SetClass::Hemispheres,
        onebit_core::nets::DEFAULT_ENTROPY_DRAWS,
        rng,
    )?;
    let max_ratio = entropy.rows.iter().map(|row| row.ratio).fold(0.0, f64::max);
    pass &= max_ratio <= 1.0;
    values.push(max_ratio);
    Ok(outcome(values, pass, max_ratio))
}
