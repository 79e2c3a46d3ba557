//! Monte Carlo entropy rates over seeded environments, the rate table and
//! its extrapolation in `1/n`.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;

use crate::entropy::info::entropy_of_masses;
use crate::entropy::measure::{compensated_sum, EmpiricalFiberMeasure, FiberMeasure};
use crate::entropy::partition::{join_labels, PartitionKind, PartitionSpec};
use crate::error::{Error, Result};
use crate::group::{folner_box, FolnerWindow};
use crate::rds::{
    check_window, shift_environment, EnvironmentPath, FiberMetric, PointId,
    RandomDynamicalSystem, ENUMERATION_CAP,
};
use crate::separated::{
    max_separated_exact, max_separated_greedy, separated_count, SolverMethod, DEFAULT_EXACT_CAP,
};

/// Fixed CSV header of an [`EntropyTable`].
pub const CSV_HEADER: [&str; 7] = [
    "system",
    "n",
    "eps",
    "omega_samples",
    "method",
    "mean_rate",
    "std_error",
];

/// One `(n, ε, method)` cell of an entropy table. Fiber-entropy rows have no
/// scale and carry `fiber:<partition>` as their method.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyRow {
    pub n: usize,
    pub eps: Option<f64>,
    pub omega_samples: usize,
    pub method: String,
    pub mean_rate: f64,
    pub std_error: f64,
}

impl EntropyRow {
    fn key(&self) -> (usize, Option<u64>, &str) {
        (self.n, self.eps.map(f64::to_bits), self.method.as_str())
    }
}

/// Rows of rate estimates for one system, unique by `(n, ε, method)` and kept
/// in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyTable {
    system: String,
    rows: Vec<EntropyRow>,
}

impl EntropyTable {
    pub fn new(system: impl Into<String>) -> Self {
        Self {
            system: system.into(),
            rows: Vec::new(),
        }
    }

    pub fn system(&self) -> &str {
        &self.system
    }

    pub fn rows(&self) -> &[EntropyRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, row: EntropyRow) -> Result<()> {
        if !row.mean_rate.is_finite() || row.mean_rate < 0.0 {
            return Err(Error::param("mean_rate", format!("{} is not a finite nonnegative rate", row.mean_rate)));
        }
        if self.rows.iter().any(|r| r.key() == row.key()) {
            return Err(Error::param(
                "row",
                format!("duplicate key (n={}, eps={:?}, method={})", row.n, row.eps, row.method),
            ));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn extend(&mut self, other: EntropyTable) -> Result<()> {
        other.rows.into_iter().try_for_each(|r| self.push(r))
    }

    pub fn find(&self, n: usize, eps: Option<f64>, method: &str) -> Option<&EntropyRow> {
        self.rows
            .iter()
            .find(|r| r.n == n && r.eps.map(f64::to_bits) == eps.map(f64::to_bits) && r.method == method)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::ResourceCap(format!("csv output: {e}"));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER).map_err(io)?;
        for r in &self.rows {
            w.write_record([
                self.system.clone(),
                r.n.to_string(),
                r.eps.map_or_else(String::new, |e| e.to_string()),
                r.omega_samples.to_string(),
                r.method.clone(),
                r.mean_rate.to_string(),
                r.std_error.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::ResourceCap(format!("csv output: {e}")))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// How the headline value was obtained from the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extrapolation {
    None,
    LinearInverseN,
}

/// An entropy value with its Monte Carlo uncertainty.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyEstimate {
    pub value: f64,
    /// Scale of the headline rows; `None` for fiber entropy.
    pub epsilon_used: Option<f64>,
    pub ci_halfwidth: f64,
    pub extrapolation: Extrapolation,
    /// Extrapolations of the greedy counts at `ε` and `ε/2`, smaller first.
    pub bracket: Option<(f64, f64)>,
    /// Fitted coefficient `c` of `rate ≈ h + c/n`.
    pub slope: f64,
    pub n_max: usize,
}

impl EntropyEstimate {
    /// Largest value consistent with the estimate before uncertainty.
    pub fn upper(&self) -> f64 {
        self.bracket.map_or(self.value, |(_, hi)| hi)
    }

    /// `|c| / n_max`, the size of the leading finite-`n` correction.
    pub fn finite_n_slack(&self) -> f64 {
        self.slope.abs() / self.n_max as f64
    }
}

/// Mean and standard error; bit-identical samples give exactly zero spread.
pub(crate) fn mean_and_error(xs: &[f64]) -> (f64, f64) {
    if xs.iter().all(|x| x.to_bits() == xs[0].to_bits()) {
        return (xs[0], 0.0);
    }
    let n = xs.len() as f64;
    let mean = compensated_sum(xs.iter().copied()) / n;
    let var = compensated_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs `f` on `samples` i.i.d. environments. Results come back in sample
/// order whatever the worker count; a degenerate law has a single environment
/// and is evaluated once.
pub(crate) fn over_environments<S, T, F>(system: &S, samples: usize, master_seed: u64, f: F) -> Result<Vec<T>>
where
    S: RandomDynamicalSystem + ?Sized,
    T: Clone + Send,
    F: Fn(&EnvironmentPath) -> Result<T> + Sync,
{
    if samples == 0 {
        return Err(Error::param("omega_samples", "must be at least 1"));
    }
    if system.law().is_degenerate() {
        let one = f(&system.sample(master_seed, 0))?;
        return Ok(vec![one; samples]);
    }
    let results: Vec<Result<T>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| f(&system.sample(master_seed, i)))
        .collect();
    results.into_iter().collect()
}

fn window_for<S: RandomDynamicalSystem + ?Sized>(system: &S, n: usize) -> Result<FolnerWindow> {
    let w = folner_box(system.group_dim(), n)?;
    check_window(system, &w)?;
    Ok(w)
}

/// `(1/|F|) log Sep(ω, F, ε)` for one environment.
pub fn sample_sep_rate<S: RandomDynamicalSystem + ?Sized>(
    system: &S,
    omega: &EnvironmentPath,
    window: &FolnerWindow,
    eps: f64,
    method: SolverMethod,
    exact_cap: usize,
) -> Result<f64> {
    let count = separated_count(system, omega, window, eps, method, exact_cap)?;
    Ok(count.log_cardinality / window.len() as f64)
}

/// Mean over environments of `(1/|F_n|) log Sep(ω, F_n, ε)`.
pub fn sep_entropy_rate<S: RandomDynamicalSystem + ?Sized>(
    system: &S,
    n: usize,
    eps: f64,
    omega_samples: usize,
    master_seed: u64,
    method: SolverMethod,
    exact_cap: usize,
) -> Result<EntropyRow> {
    let window = window_for(system, n)?;
    let rates = over_environments(system, omega_samples, master_seed, |w| {
        sample_sep_rate(system, w, &window, eps, method, exact_cap)
    })?;
    let (mean_rate, std_error) = mean_and_error(&rates);
    Ok(EntropyRow {
        n,
        eps: Some(eps),
        omega_samples,
        method: method.to_string(),
        mean_rate,
        std_error,
    })
}

/// Least-squares line `y = a + b x`; returns `(a, b)`.
fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return (my, 0.0);
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

/// Extrapolates `rate(n) ≈ h + c/n` over the three largest `n`. `per_sample`
/// holds one rate vector per environment, aligned with `ns`. The interval is
/// 1.96 standard errors of the per-sample intercepts plus the largest fit
/// residual of the mean rates.
pub fn extrapolate_inverse_n(ns: &[usize], per_sample: &[Vec<f64>]) -> (f64, f64, f64, Extrapolation) {
    let k = ns.len().min(3);
    let start = ns.len() - k;
    let xs: Vec<f64> = ns[start..].iter().map(|&n| 1.0 / n as f64).collect();
    let means: Vec<f64> = (start..ns.len())
        .map(|j| mean_and_error(&per_sample.iter().map(|s| s[j]).collect::<Vec<_>>()).0)
        .collect();
    if k == 1 {
        let (_, se) = mean_and_error(&per_sample.iter().map(|s| s[start]).collect::<Vec<_>>());
        return (means[0], 1.96 * se, 0.0, Extrapolation::None);
    }
    let intercepts: Vec<f64> = per_sample.iter().map(|s| fit_line(&xs, &s[start..]).0).collect();
    let (value, se) = mean_and_error(&intercepts);
    let (a, b) = fit_line(&xs, &means);
    let residual = xs
        .iter()
        .zip(&means)
        .map(|(x, y)| (y - (a + b * x)).abs())
        .fold(0.0, f64::max);
    (value, 1.96 * se + residual, b, Extrapolation::LinearInverseN)
}

/// Inputs of [`estimate_h_top`].
#[derive(Debug, Clone, PartialEq)]
pub struct TopEntropyConfig {
    pub n_list: Vec<usize>,
    pub eps_list: Vec<f64>,
    pub omega_samples: usize,
    pub master_seed: u64,
    pub method: SolverMethod,
    pub exact_cap: usize,
}

impl TopEntropyConfig {
    pub fn new(n_list: Vec<usize>, eps_list: Vec<f64>, omega_samples: usize, master_seed: u64, method: SolverMethod) -> Self {
        Self {
            n_list,
            eps_list,
            omega_samples,
            master_seed,
            method,
            exact_cap: DEFAULT_EXACT_CAP,
        }
    }
}

pub(crate) fn check_n_list(n_list: &[usize]) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::param("n_list", "must not be empty"));
    }
    if n_list[0] == 0 {
        return Err(Error::param("n_list", "window indices must be positive"));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("n_list", "must be strictly increasing"));
    }
    Ok(())
}

/// Checks a scale list against a fiber: strictly decreasing, positive and
/// above four grid spacings.
pub fn check_eps_list(eps_list: &[f64], grid_spacing: Option<f64>) -> Result<()> {
    if eps_list.is_empty() {
        return Err(Error::param("eps_list", "must not be empty"));
    }
    if eps_list.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::param("eps_list", "scales must be positive reals"));
    }
    if eps_list.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::param("eps_list", "must be strictly decreasing"));
    }
    if let Some(h) = grid_spacing {
        if let Some(bad) = eps_list.iter().find(|&&e| e <= 4.0 * h) {
            return Err(Error::param(
                "eps_list",
                format!("scale {bad} is not above 4 x grid spacing {h}"),
            ));
        }
    }
    Ok(())
}

/// Fills the `(n, ε)` table and extrapolates the rows at the smallest `ε`.
/// Greedy runs also count at `ε/2` at that scale to bracket the value.
pub fn estimate_h_top<S: RandomDynamicalSystem + ?Sized>(
    system: &S,
    config: &TopEntropyConfig,
) -> Result<(EntropyEstimate, EntropyTable)> {
    check_n_list(&config.n_list)?;
    let probe = system.sample(config.master_seed, 0);
    check_eps_list(&config.eps_list, system.fiber(&probe).grid_spacing())?;
    let windows: Vec<FolnerWindow> = config
        .n_list
        .iter()
        .map(|&n| window_for(system, n))
        .collect::<Result<_>>()?;
    let eps_min = *config.eps_list.last().expect("nonempty");
    let greedy = config.method == SolverMethod::Greedy;
    let mut scales = config.eps_list.clone();
    if greedy {
        scales.push(eps_min / 2.0);
    }

    // per_sample[i][e][j]: environment i, scale e, window j
    let per_sample: Vec<Vec<Vec<f64>>> =
        over_environments(system, config.omega_samples, config.master_seed, |w| {
            scales
                .iter()
                .map(|&eps| {
                    windows
                        .iter()
                        .map(|win| sample_sep_rate(system, w, win, eps, config.method, config.exact_cap))
                        .collect::<Result<Vec<f64>>>()
                })
                .collect()
        })?;

    let mut table = EntropyTable::new(system.name());
    for (e, &eps) in config.eps_list.iter().enumerate() {
        for (j, &n) in config.n_list.iter().enumerate() {
            let rates: Vec<f64> = per_sample.iter().map(|s| s[e][j]).collect();
            let (mean_rate, std_error) = mean_and_error(&rates);
            table.push(EntropyRow {
                n,
                eps: Some(eps),
                omega_samples: config.omega_samples,
                method: config.method.to_string(),
                mean_rate,
                std_error,
            })?;
        }
    }

    let at = |e: usize| -> Vec<Vec<f64>> { per_sample.iter().map(|s| s[e].clone()).collect() };
    let head = config.eps_list.len() - 1;
    let (value, ci, slope, extrapolation) = extrapolate_inverse_n(&config.n_list, &at(head));
    // The two extrapolations can cross even though the rates at each n are
    // ordered, so the bracket is stored sorted.
    let bracket = greedy.then(|| {
        let (other, _, _, _) = extrapolate_inverse_n(&config.n_list, &at(head + 1));
        (value.min(other), value.max(other))
    });
    Ok((
        EntropyEstimate {
            value,
            epsilon_used: Some(eps_min),
            ci_halfwidth: ci,
            extrapolation,
            bracket,
            slope,
            n_max: *config.n_list.last().expect("nonempty"),
        },
        table,
    ))
}

/// `H_{μ_ω}(C_F(ω))` for one environment.
///
/// Bernoulli measures on shift systems are handled in closed form: the joined
/// symbol partition reads the coded symbols on `F mod P`, which are
/// independent under the product measure.
pub fn joined_entropy<S: RandomDynamicalSystem + ?Sized>(
    system: &S,
    omega: &EnvironmentPath,
    window: &FolnerWindow,
    partition: &PartitionSpec,
    measure: &FiberMeasure,
) -> Result<f64> {
    check_window(system, window)?;
    let fiber = system.fiber(omega);
    partition.validate(fiber)?;
    if let PartitionKind::Trivial = partition.kind() {
        return Ok(0.0);
    }
    if let (FiberMeasure::Bernoulli { marginal }, true) = (measure, system.is_word_shift()) {
        if let (PartitionKind::SymbolCoding { coding, cells }, FiberMetric::PeriodicWords { period, .. }) =
            (partition.kind(), fiber.metric())
        {
            if window.dim() != 1 {
                return Err(Error::UnsupportedDimension(window.dim()));
            }
            let mut coded = vec![0.0; *cells];
            for (s, &w) in marginal.iter().enumerate() {
                coded[coding[s]] += w;
            }
            let mut sites: Vec<i64> = window
                .iter()
                .map(|g| g.coords()[0].rem_euclid(*period as i64))
                .collect();
            sites.sort_unstable();
            sites.dedup();
            return Ok(sites.len() as f64 * entropy_of_masses(coded));
        }
    }
    let mu = measure.to_empirical(fiber)?;
    let points: Vec<_> = mu.support().collect();
    let (labels, itineraries) = join_labels(system, omega, window, partition, &points)?;
    let mut masses = vec![0.0; itineraries.len()];
    for (&l, &(_, w)) in labels.iter().zip(mu.weights()) {
        masses[l as usize] += w;
    }
    Ok(entropy_of_masses(masses))
}

/// Mean over environments of `(1/|F_n|) H_{μ_ω}(C_{F_n}(ω))`, with `μ_ω`
/// supplied by `sampler`.
pub fn fiber_partition_entropy_rate<S, M>(
    system: &S,
    sampler: M,
    partition: &PartitionSpec,
    n: usize,
    omega_samples: usize,
    master_seed: u64,
) -> Result<EntropyRow>
where
    S: RandomDynamicalSystem + ?Sized,
    M: Fn(&EnvironmentPath) -> Result<FiberMeasure> + Sync,
{
    let window = window_for(system, n)?;
    let rates = over_environments(system, omega_samples, master_seed, |w| {
        Ok(joined_entropy(system, w, &window, partition, &sampler(w)?)? / window.len() as f64)
    })?;
    let (mean_rate, std_error) = mean_and_error(&rates);
    Ok(EntropyRow {
        n,
        eps: None,
        omega_samples,
        method: format!("fiber:{}", partition.name()),
        mean_rate,
        std_error,
    })
}

/// Fiber entropy rates of one partition over `n_list`, extrapolated in `1/n`.
pub fn estimate_fiber_entropy<S, M>(
    system: &S,
    sampler: M,
    partition: &PartitionSpec,
    n_list: &[usize],
    omega_samples: usize,
    master_seed: u64,
) -> Result<(EntropyEstimate, EntropyTable)>
where
    S: RandomDynamicalSystem + ?Sized,
    M: Fn(&EnvironmentPath) -> Result<FiberMeasure> + Sync,
{
    check_n_list(n_list)?;
    let windows: Vec<FolnerWindow> = n_list.iter().map(|&n| window_for(system, n)).collect::<Result<_>>()?;
    let per_sample: Vec<Vec<f64>> = over_environments(system, omega_samples, master_seed, |w| {
        let mu = sampler(w)?;
        windows
            .iter()
            .map(|win| Ok(joined_entropy(system, w, win, partition, &mu)? / win.len() as f64))
            .collect()
    })?;
    let mut table = EntropyTable::new(system.name());
    for (j, &n) in n_list.iter().enumerate() {
        let (mean_rate, std_error) = mean_and_error(&per_sample.iter().map(|s| s[j]).collect::<Vec<_>>());
        table.push(EntropyRow {
            n,
            eps: None,
            omega_samples,
            method: format!("fiber:{}", partition.name()),
            mean_rate,
            std_error,
        })?;
    }
    let (value, ci, slope, extrapolation) = extrapolate_inverse_n(n_list, &per_sample);
    Ok((
        EntropyEstimate {
            value,
            epsilon_used: None,
            ci_halfwidth: ci,
            extrapolation,
            bracket: None,
            slope,
            n_max: *n_list.last().expect("nonempty"),
        },
        table,
    ))
}

/// `ν = ` uniform measure on the solver's maximal separated set.
pub fn empirical_nu<S: RandomDynamicalSystem + ?Sized>(
    system: &S,
    omega: &EnvironmentPath,
    window: &FolnerWindow,
    eps: f64,
    method: SolverMethod,
    exact_cap: usize,
) -> Result<EmpiricalFiberMeasure> {
    if system.fiber(omega).size() > ENUMERATION_CAP {
        return Err(Error::ResourceCap(format!(
            "fiber of {} points exceeds the enumeration cap",
            system.fiber(omega).size()
        )));
    }
    let result = match method {
        SolverMethod::Exact => max_separated_exact(system, omega, window, eps, exact_cap)?,
        SolverMethod::Greedy => max_separated_greedy(system, omega, window, eps)?,
    };
    EmpiricalFiberMeasure::uniform_on(&result.witness)
}

/// A fiber measure over a shifted environment with its mixture weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedFiberMeasure {
    pub environment: EnvironmentPath,
    pub measure: EmpiricalFiberMeasure,
    pub weight: f64,
}

/// `μ = (1/|F|) Σ_{g ∈ F} Θ_g ν`, one component per window element in window
/// order.
pub fn empirical_mu<S: RandomDynamicalSystem + ?Sized>(
    system: &S,
    nu: &EmpiricalFiberMeasure,
    omega: &EnvironmentPath,
    window: &FolnerWindow,
) -> Result<Vec<WeightedFiberMeasure>> {
    check_window(system, window)?;
    for x in nu.support() {
        system.fiber(omega).check_point(x)?;
    }
    let weight = 1.0 / window.len() as f64;
    window
        .iter()
        .map(|g| {
            let points: Vec<_> = nu.support().collect();
            let images: BTreeMap<_, _> = points
                .iter()
                .copied()
                .zip(system.evaluate_many(g, omega, &points))
                .collect();
            Ok(WeightedFiberMeasure {
                environment: shift_environment(g, omega)?,
                measure: nu.pushforward(|x| images[&x]),
                weight,
            })
        })
        .collect()
}

/// True iff every atom of `C_F(ω)` holds at most one point of `witness`.
pub fn atom_injectivity_check<S: RandomDynamicalSystem + ?Sized>(
    system: &S,
    omega: &EnvironmentPath,
    window: &FolnerWindow,
    partition: &PartitionSpec,
    witness: &[PointId],
) -> Result<bool> {
    for &x in witness {
        system.fiber(omega).check_point(x)?;
    }
    let (labels, itineraries) = join_labels(system, omega, window, partition, witness)?;
    let mut seen = vec![false; itineraries.len()];
    for l in labels {
        if std::mem::replace(&mut seen[l as usize], true) {
            return Ok(false);
        }
    }
    Ok(true)
}
