//! The four subcommands. Each returns its results and writes them under
//! `cfg.output_path`.

use awva_core::optimize::golden_section_max;
use awva_core::{
    error_limit, fisher_closed_imag, fisher_numeric, optimal_imag_weak_value, run_adaptive,
    run_swva, states_for_weak_value, AdaptiveTrace, CouplingConfig, Error, MeasurementModel,
    RandomStream, StopReason, WeakValue,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{header, num, opt_num, write_summary, write_table, Table, TOOL_VERSION};

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses rayon's default.
    pub workers: Option<usize>,
}

impl RunOptions {
    fn install<T: Send>(&self, work: impl FnOnce() -> T + Send) -> Result<T, CliError> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.workers {
            builder = builder.num_threads(n);
        }
        let pool = builder
            .build()
            .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
        Ok(pool.install(work))
    }
}

#[derive(Debug, Clone, Serialize)]
struct Provenance {
    tool: &'static str,
    command: &'static str,
    config_sha256: String,
    master_seed: u64,
}

impl Provenance {
    fn new(command: &'static str, cfg: &RunConfig) -> Self {
        Self {
            tool: TOOL_VERSION,
            command,
            config_sha256: cfg.hash(),
            master_seed: cfg.master_seed,
        }
    }
}

fn flags_cell<T: std::fmt::Display>(flags: &[T]) -> String {
    flags.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("|")
}

#[derive(Debug, Clone, Serialize)]
pub struct FisherPoint {
    pub g: f64,
    pub b: f64,
    pub i_numeric: f64,
    pub i_closed: f64,
    pub flags: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FisherArgmax {
    pub g: f64,
    pub b_argmax: f64,
    pub i_max_numeric: f64,
    /// Maximiser refined between the neighbours of `b_argmax`.
    pub b_refined: f64,
    pub i_refined: f64,
    pub b_opt: f64,
    pub four_second_moment: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FisherSurface {
    pub points: Vec<FisherPoint>,
    pub argmax: Vec<FisherArgmax>,
}

fn model_for(pointer: awva_core::GaussianPointer, g: f64, b: f64) -> awva_core::Result<MeasurementModel> {
    let (pre, post) = states_for_weak_value(WeakValue::imaginary(b)?)?;
    MeasurementModel::new(pointer, pre, post, CouplingConfig::new(g)?)
}

/// Fisher information about `g` over a grid of `(g, Im A_w)`.
pub fn fisher_surface(cfg: &RunConfig, opts: &RunOptions) -> Result<FisherSurface, CliError> {
    cfg.validate()?;
    let pointer = cfg.scenario()?.pointer();
    let gs = cfg.fisher_g.points();
    let bs = cfg.fisher_b.points();
    let cells: Vec<(f64, f64)> = gs.iter().flat_map(|&g| bs.iter().map(move |&b| (g, b))).collect();

    let points = opts.install(|| {
        cells
            .par_iter()
            .map(|&(g, b)| -> awva_core::Result<FisherPoint> {
                let numeric = fisher_numeric(&model_for(pointer, g, b)?)?;
                let closed = fisher_closed_imag(&pointer, g, b)?;
                let mut flags = numeric.validity_flags.clone();
                flags.extend(closed.validity_flags.iter().filter(|f| !numeric.validity_flags.contains(f)));
                Ok(FisherPoint {
                    g,
                    b,
                    i_numeric: numeric.value,
                    i_closed: closed.value,
                    flags: flags_cell(&flags),
                })
            })
            .collect::<awva_core::Result<Vec<_>>>()
    })??;

    let mut argmax = Vec::new();
    for (k, &g) in gs.iter().enumerate() {
        let row = &points[k * bs.len()..(k + 1) * bs.len()];
        let (j, best) = row
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.i_numeric.total_cmp(&b.1.i_numeric))
            .expect("b grid is nonempty");
        let lo = row[j.saturating_sub(1)].b;
        let hi = row[(j + 1).min(row.len() - 1)].b;
        let info = |b: f64| {
            model_for(pointer, g, b)
                .and_then(|m| fisher_numeric(&m))
                .map_or(f64::NEG_INFINITY, |r| r.value)
        };
        let (b_refined, i_refined) = if lo < hi {
            golden_section_max(info, lo, hi, 1e-6 * best.b.abs().max(1.0))
        } else {
            (best.b, best.i_numeric)
        };
        argmax.push(FisherArgmax {
            g,
            b_argmax: best.b,
            i_max_numeric: best.i_numeric,
            b_refined,
            i_refined,
            b_opt: optimal_imag_weak_value(&pointer, g)?.im,
            four_second_moment: 4.0 * pointer.second_moment(),
        });
    }

    let head = header("fisher-surface", cfg)?;
    let mut table = Table::new(vec!["g", "b", "i_numeric", "i_closed", "flags"]);
    for p in &points {
        table.push(vec![num(p.g), num(p.b), num(p.i_numeric), num(p.i_closed), p.flags.clone()]);
    }
    write_table(&cfg.output_path, "fisher_surface.csv", &head, &table)?;
    let mut table = Table::new(vec![
        "g",
        "b_argmax",
        "i_max_numeric",
        "b_refined",
        "i_refined",
        "b_opt",
        "four_second_moment",
    ]);
    for a in &argmax {
        table.push(vec![
            num(a.g),
            num(a.b_argmax),
            num(a.i_max_numeric),
            num(a.b_refined),
            num(a.i_refined),
            num(a.b_opt),
            num(a.four_second_moment),
        ]);
    }
    write_table(&cfg.output_path, "fisher_argmax.csv", &head, &table)?;

    #[derive(Serialize)]
    struct Summary<'a> {
        #[serde(flatten)]
        provenance: Provenance,
        argmax: &'a [FisherArgmax],
    }
    write_summary(
        &cfg.output_path,
        "fisher_surface_summary.json",
        &Summary {
            provenance: Provenance::new("fisher-surface", cfg),
            argmax: &argmax,
        },
    )?;
    Ok(FisherSurface { points, argmax })
}

#[derive(Debug, Clone, Serialize)]
pub struct ShiftPoint {
    pub epsilon: f64,
    pub tau_fs: f64,
    pub delta_omega: f64,
}

/// Where the shift changes sign along one delay row.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroCrossing {
    pub tau_fs: f64,
    pub zero_point: f64,
    pub epsilon_below: Option<f64>,
    pub epsilon_above: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShiftSurface {
    pub points: Vec<ShiftPoint>,
    pub crossings: Vec<ZeroCrossing>,
}

/// Closed-form spectrum shift over a grid of `(ε, τ)`.
pub fn shift_surface(cfg: &RunConfig, opts: &RunOptions) -> Result<ShiftSurface, CliError> {
    cfg.validate()?;
    let base = cfg.scenario()?;
    let eps = cfg.shift_epsilon.points();
    let taus: Vec<f64> = cfg
        .shift_tau_as
        .points()
        .into_iter()
        .map(awva_core::units::as_to_fs)
        .collect();
    let cells: Vec<(f64, f64)> = taus.iter().flat_map(|&t| eps.iter().map(move |&e| (e, t))).collect();

    let points = opts.install(|| {
        cells
            .par_iter()
            .map(|&(epsilon, tau_fs)| -> awva_core::Result<ShiftPoint> {
                let s = base.with_tau(tau_fs)?.with_epsilon(epsilon)?;
                Ok(ShiftPoint {
                    epsilon,
                    tau_fs,
                    delta_omega: s.spectrum_shift()?,
                })
            })
            .collect::<awva_core::Result<Vec<_>>>()
    })??;

    let crossings = taus
        .iter()
        .enumerate()
        .map(|(k, &tau_fs)| {
            let row = &points[k * eps.len()..(k + 1) * eps.len()];
            let cross = row
                .windows(2)
                .find(|w| (w[0].delta_omega > 0.0) != (w[1].delta_omega > 0.0));
            ZeroCrossing {
                tau_fs,
                zero_point: base.omega0() * tau_fs,
                epsilon_below: cross.map(|w| w[0].epsilon),
                epsilon_above: cross.map(|w| w[1].epsilon),
            }
        })
        .collect::<Vec<_>>();

    let head = header("shift-surface", cfg)?;
    let mut table = Table::new(vec!["epsilon", "tau_fs", "delta_omega"]);
    for p in &points {
        table.push(vec![num(p.epsilon), num(p.tau_fs), num(p.delta_omega)]);
    }
    write_table(&cfg.output_path, "shift_surface.csv", &head, &table)?;
    let mut table = Table::new(vec!["tau_fs", "zero_point", "epsilon_below", "epsilon_above"]);
    for c in &crossings {
        table.push(vec![
            num(c.tau_fs),
            num(c.zero_point),
            opt_num(c.epsilon_below),
            opt_num(c.epsilon_above),
        ]);
    }
    write_table(&cfg.output_path, "shift_zero_crossing.csv", &head, &table)?;

    #[derive(Serialize)]
    struct Summary<'a> {
        #[serde(flatten)]
        provenance: Provenance,
        crossings: &'a [ZeroCrossing],
    }
    write_summary(
        &cfg.output_path,
        "shift_surface_summary.json",
        &Summary {
            provenance: Provenance::new("shift-surface", cfg),
            crossings: &crossings,
        },
    )?;
    Ok(ShiftSurface { points, crossings })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Awva,
    Swva,
}

impl Scheme {
    fn label(self) -> &'static str {
        match self {
            Scheme::Awva => "awva",
            Scheme::Swva => "swva",
        }
    }
}

/// One repetition of one scheme at one photon count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub scheme: Scheme,
    pub n: u64,
    pub trial: usize,
    /// `ok`, or the reason no estimate was produced.
    pub status: String,
    pub tau_hat_fs: Option<f64>,
    pub abs_error_fs: Option<f64>,
    pub iterations: usize,
    pub photons_used: u64,
}

fn error_status(e: &Error) -> String {
    match e {
        Error::InsufficientStatistics { .. } => "insufficient-statistics".into(),
        Error::MaxIterations { .. } => "max-iterations".into(),
        Error::FlatLikelihood { .. } => "flat-likelihood".into(),
        other => format!("error: {other}").replace(',', ";"),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorStats {
    pub ok: usize,
    pub failed: usize,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub rms: Option<f64>,
}

impl ErrorStats {
    fn from_trials<'a>(trials: impl Iterator<Item = &'a TrialOutcome>) -> Self {
        let mut errors = Vec::new();
        let mut failed = 0;
        for t in trials {
            match t.abs_error_fs {
                Some(e) => errors.push(e),
                None => failed += 1,
            }
        }
        errors.sort_by(f64::total_cmp);
        let n = errors.len();
        let (mean, median, rms) = if n == 0 {
            (None, None, None)
        } else {
            let mean = errors.iter().sum::<f64>() / n as f64;
            let median = if n % 2 == 1 {
                errors[n / 2]
            } else {
                0.5 * (errors[n / 2 - 1] + errors[n / 2])
            };
            let rms = (errors.iter().map(|e| e * e).sum::<f64>() / n as f64).sqrt();
            (Some(mean), Some(median), Some(rms))
        };
        Self {
            ok: n,
            failed,
            mean,
            median,
            rms,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub n: u64,
    pub awva: ErrorStats,
    pub swva: ErrorStats,
    /// `1/√(N⟨ω²⟩₀)`, the best achievable delay error.
    pub limit_awva: f64,
    /// `1/√(N Δ²)`, the balanced-pointer delay error.
    pub limit_swva: f64,
    /// Cramér–Rao delay error at the fixed baseline angle.
    pub crb_swva_angle: f64,
    pub awva_photons_mean: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    pub trials: Vec<TrialOutcome>,
    pub limit_ratio: f64,
}

/// Repeated adaptive and fixed-angle runs at each photon count.
///
/// Trial `r` at photon count `N` of scheme `k` draws from the stream
/// `master / k / N / r`.
pub fn sweep_n(cfg: &RunConfig, opts: &RunOptions) -> Result<Sweep, CliError> {
    cfg.validate()?;
    let s = cfg.scenario()?;
    let tau0 = s.tau();
    let search = cfg.swva_search_fs();
    let root = RandomStream::new(cfg.master_seed);
    let jobs: Vec<(Scheme, u64, usize)> = cfg
        .n_values
        .iter()
        .flat_map(|&n| {
            [Scheme::Awva, Scheme::Swva]
                .into_iter()
                .flat_map(move |k| (0..cfg.repetitions).map(move |r| (k, n, r)))
        })
        .collect();

    let trials = opts.install(|| {
        jobs.par_iter()
            .map(|&(scheme, n, trial)| -> Result<TrialOutcome, CliError> {
                let mut stream = root.named(scheme.label()).child(n).child(trial as u64);
                let (result, iterations, photons_used) = match scheme {
                    Scheme::Awva => {
                        let acfg = awva_core::AdaptiveConfig {
                            n_per_iteration: n,
                            ..cfg.adaptive.clone()
                        };
                        let trace = run_adaptive(&s, &acfg, &mut stream)?;
                        (trace.tau_hat(), trace.iterations.len(), trace.total_photons_used)
                    }
                    Scheme::Swva => {
                        let r = run_swva(&s, n, &mut stream, search).map(|e| e.tau);
                        (r, 1, n)
                    }
                };
                let (status, tau_hat_fs) = match result {
                    Ok(t) => ("ok".to_string(), Some(t)),
                    Err(e) => (error_status(&e), None),
                };
                Ok(TrialOutcome {
                    scheme,
                    n,
                    trial,
                    status,
                    tau_hat_fs,
                    abs_error_fs: tau_hat_fs.map(|t| (t - tau0).abs()),
                    iterations,
                    photons_used,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()
    })??;

    let crb_info = s.fisher_tau()?.value;
    let mut rows = Vec::new();
    for &n in &cfg.n_values {
        let of = |k: Scheme| trials.iter().filter(move |t| t.n == n && t.scheme == k);
        let awva_photons: Vec<f64> = of(Scheme::Awva).map(|t| t.photons_used as f64).collect();
        rows.push(SweepRow {
            n,
            awva: ErrorStats::from_trials(of(Scheme::Awva)),
            swva: ErrorStats::from_trials(of(Scheme::Swva)),
            limit_awva: error_limit(s.max_information_tau(), n)?,
            limit_swva: error_limit(s.swva_information_tau(), n)?,
            crb_swva_angle: error_limit(crb_info, n)?,
            awva_photons_mean: awva_photons.iter().sum::<f64>() / awva_photons.len() as f64,
        });
    }
    let limit_ratio = (s.max_information_tau() / s.swva_information_tau()).sqrt();

    let head = header("sweep-n", cfg)?;
    let mut table = Table::new(vec![
        "n",
        "awva_ok",
        "awva_failed",
        "awva_err_mean",
        "awva_err_median",
        "awva_err_rms",
        "swva_ok",
        "swva_failed",
        "swva_err_mean",
        "swva_err_median",
        "swva_err_rms",
        "limit_awva",
        "limit_swva",
        "limit_ratio",
        "crb_swva_angle",
        "awva_photons_mean",
    ]);
    for r in &rows {
        table.push(vec![
            r.n.to_string(),
            r.awva.ok.to_string(),
            r.awva.failed.to_string(),
            opt_num(r.awva.mean),
            opt_num(r.awva.median),
            opt_num(r.awva.rms),
            r.swva.ok.to_string(),
            r.swva.failed.to_string(),
            opt_num(r.swva.mean),
            opt_num(r.swva.median),
            opt_num(r.swva.rms),
            num(r.limit_awva),
            num(r.limit_swva),
            num(limit_ratio),
            num(r.crb_swva_angle),
            num(r.awva_photons_mean),
        ]);
    }
    write_table(&cfg.output_path, "sweep_n.csv", &head, &table)?;

    let mut table = Table::new(vec![
        "scheme",
        "n",
        "trial",
        "status",
        "tau_hat_fs",
        "abs_error_fs",
        "iterations",
        "photons_used",
    ]);
    for t in &trials {
        table.push(vec![
            t.scheme.label().to_string(),
            t.n.to_string(),
            t.trial.to_string(),
            t.status.clone(),
            opt_num(t.tau_hat_fs),
            opt_num(t.abs_error_fs),
            t.iterations.to_string(),
            t.photons_used.to_string(),
        ]);
    }
    write_table(&cfg.output_path, "sweep_n_long.csv", &head, &table)?;

    #[derive(Serialize)]
    struct Summary<'a> {
        #[serde(flatten)]
        provenance: Provenance,
        limit_ratio: f64,
        rows: &'a [SweepRow],
    }
    write_summary(
        &cfg.output_path,
        "sweep_n_summary.json",
        &Summary {
            provenance: Provenance::new("sweep-n", cfg),
            limit_ratio,
            rows: &rows,
        },
    )?;
    Ok(Sweep {
        rows,
        trials,
        limit_ratio,
    })
}

/// One adaptive run with `cfg.adaptive`, drawing from `master / "adaptive"`.
pub fn adaptive(cfg: &RunConfig) -> Result<AdaptiveTrace, CliError> {
    cfg.validate()?;
    let s = cfg.scenario()?;
    let mut stream = RandomStream::new(cfg.master_seed).named("adaptive");
    let trace = run_adaptive(&s, &cfg.adaptive, &mut stream)?;

    let head = header("adaptive", cfg)?;
    let mut table = Table::new(vec!["k", "epsilon", "step", "delta_omega", "n_accepted"]);
    for (k, it) in trace.iterations.iter().enumerate() {
        table.push(vec![
            k.to_string(),
            num(it.epsilon),
            num(it.step),
            opt_num(it.delta_omega),
            it.n_accepted.to_string(),
        ]);
    }
    write_table(&cfg.output_path, "adaptive_trace.csv", &head, &table)?;

    #[derive(Serialize)]
    struct Summary {
        #[serde(flatten)]
        provenance: Provenance,
        epsilon_final: f64,
        tau_hat_fs: Option<f64>,
        tau_true_fs: f64,
        stop_reason: StopReason,
        iterations: usize,
        photons_per_measurement: u64,
        total_photons_used: u64,
        warnings: Vec<awva_core::ValidityFlag>,
    }
    write_summary(
        &cfg.output_path,
        "adaptive_summary.json",
        &Summary {
            provenance: Provenance::new("adaptive", cfg),
            epsilon_final: trace.epsilon_final,
            tau_hat_fs: trace.tau_hat,
            tau_true_fs: s.tau(),
            stop_reason: trace.stop_reason,
            iterations: trace.iterations.len(),
            photons_per_measurement: cfg.adaptive.n_per_iteration,
            total_photons_used: trace.total_photons_used,
            warnings: cfg.adaptive.warnings(),
        },
    )?;
    Ok(trace)
}
