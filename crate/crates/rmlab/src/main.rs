use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rmlab::commands::{self, CmdFailure, CmdResult};
use rmlab::driver::resolve_workers;
use rmlab::selftest;
use rmlab::specio::{load_spec, LoadedSpec};

/// Numerical laboratory for products of random matrices in SL(m+1, R):
/// decompositions, stationary measures, deviation estimates, transfer
/// operators, and renewal sums.
#[derive(Parser)]
#[command(name = "rmlab", version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Measure spec JSON: {"m": rank, "atoms": [{"matrix": [[..]], "weight": w}]}
    #[arg(long)]
    spec: PathBuf,
    /// Base seed; all sample streams derive from (seed, stream index)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: RMLAB_WORKERS or all cores); results are
    /// invariant to this setting
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Estimate the vector of top log singular value growth rates of the
    /// random product, and its smallest simple-root gap
    Lyapunov {
        #[command(flatten)]
        common: Common,
        /// Word length per sample
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 10000)]
        samples: usize,
    },
    /// Empirical large-deviation curve: probability of an atypical event
    /// against word length, with a fitted exponential rate
    Ldp {
        #[command(flatten)]
        common: Common,
        /// Deviation event: cartan | point | flag-rep | flag-att
        #[arg(long, default_value = "cartan")]
        mode: String,
        /// Exterior degree for the point event
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 10)]
        n_min: usize,
        #[arg(long, default_value_t = 60)]
        n_max: usize,
        #[arg(long, default_value_t = 10)]
        n_step: usize,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        /// Samples for the internal growth-rate estimate
        #[arg(long, default_value_t = 2000)]
        drift_samples: usize,
    },
    /// Sample the stationary measure of the walk on projective space
    Stationary {
        #[command(flatten)]
        common: Common,
        /// Burn-in word length
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Fit the Holder exponent of the stationary measure: mass of small
    /// neighborhoods of a fixed point against the radius
    Regularity {
        #[command(flatten)]
        common: Common,
        /// Target point, comma-separated coordinates (default: second
        /// basis vector)
        #[arg(long)]
        target: Option<String>,
        #[arg(long, default_value_t = 1e-3)]
        r_min: f64,
        #[arg(long, default_value_t = 0.3)]
        r_max: f64,
        /// Radius grid size (log-spaced)
        #[arg(long, default_value_t = 12)]
        grid: usize,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 100000)]
        samples: usize,
    },
    /// Frequency of words whose singular values track the mean growth and
    /// whose expanding/contracting directions avoid fixed reference flags
    Goodfreq {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long, default_value_t = 10000)]
        samples: usize,
        #[arg(long, default_value_t = 2000)]
        drift_samples: usize,
    },
    /// Non-concentration of cocycle fluctuations: worst slab mass and the
    /// probability of nearly degenerate affine volumes, against word length
    Noncon {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        n_min: usize,
        #[arg(long, default_value_t = 40)]
        n_max: usize,
        #[arg(long, default_value_t = 10)]
        n_step: usize,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Affine-volume dimension
        #[arg(long, default_value_t = 1)]
        d: usize,
        /// Random slab directions searched
        #[arg(long, default_value_t = 200)]
        directions: usize,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        /// Independent tuples for the volume estimate
        #[arg(long, default_value_t = 2000)]
        tuples: usize,
    },
    /// Worst slab mass of the fluctuation cloud across a grid of slab
    /// widths, restricted to well-behaved words
    Multiscale {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 30)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 1e-4)]
        rho_min: f64,
        #[arg(long, default_value_t = 0.5)]
        rho_max: f64,
        #[arg(long, default_value_t = 10)]
        grid: usize,
        #[arg(long, default_value_t = 200)]
        directions: usize,
        #[arg(long, default_value_t = 4000)]
        samples: usize,
    },
    /// Fourier coefficients of the stationary measure on the circle of
    /// lines, with a fitted power-law decay exponent (rank 1 only)
    Fourier {
        #[command(flatten)]
        common: Common,
        /// Largest frequency; the grid is powers of two from 2
        #[arg(long, default_value_t = 2048)]
        k_max: i64,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 100000)]
        samples: usize,
    },
    /// Oscillatory integral of e^{i xi phi} against the stationary
    /// measure, phase phi = twice the line angle (rank 1 only)
    Oscillatory {
        #[command(flatten)]
        common: Common,
        /// Oscillation frequency, must exceed 1
        #[arg(long)]
        xi: f64,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 100000)]
        samples: usize,
    },
    /// Check the phase-regularity conditions used for oscillatory decay:
    /// Lipschitz phase, derivative bounded below on the support, Lipschitz
    /// derivative, and normalized derivative supremum
    Goodness {
        /// Phase function: cos-angle | constant
        #[arg(long, default_value = "cos-angle")]
        phase: String,
        /// Restrict the amplitude to line angles in [band-lo, band-hi]
        #[arg(long)]
        band_lo: Option<f64>,
        #[arg(long)]
        band_hi: Option<f64>,
        /// Comparability constant, must exceed 1
        #[arg(long, default_value_t = 4.0)]
        c: f64,
        #[arg(long, default_value_t = 400)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectral radius of the discretized weighted transfer operator over
    /// a grid of complex weights z = a + ib (rank 1 only)
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Real parts, comma-separated
        #[arg(long, default_value = "0")]
        a: String,
        #[arg(long, default_value_t = 1.0)]
        b_min: f64,
        #[arg(long, default_value_t = 50.0)]
        b_max: f64,
        #[arg(long, default_value_t = 0.5)]
        b_step: f64,
        #[arg(long, default_value_t = 2048)]
        n_grid: usize,
        /// Also compute the radius on the doubled grid and report the delta
        #[arg(long)]
        refine: bool,
    },
    /// Discretization-free iterates of the transfer operator over the word
    /// tree, with the fitted log growth rate (rank 1 only)
    Iterate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.05)]
        z_re: f64,
        #[arg(long, default_value_t = 0.0)]
        z_im: f64,
        #[arg(long, default_value_t = 12)]
        n_iter: usize,
    },
    /// Expected number of level crossings of the additive process, against
    /// the renewal-theorem limit
    Renewal {
        #[command(flatten)]
        common: Common,
        /// Crossing level
        #[arg(long)]
        t: f64,
        /// Half-width of the smooth bump test function
        #[arg(long, default_value_t = 1.0)]
        support: f64,
        /// Use the matrix-norm ladder instead of the vector cocycle
        #[arg(long)]
        norm: bool,
        #[arg(long, default_value_t = 100000)]
        samples: usize,
    },
    /// Renewal error against the level over a grid, with a fitted decay
    /// slope or a noise-floor report
    RenewalFit {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 6.0)]
        t_min: f64,
        #[arg(long, default_value_t = 20.0)]
        t_max: f64,
        #[arg(long, default_value_t = 2.0)]
        t_step: f64,
        #[arg(long, default_value_t = 1.0)]
        support: f64,
        #[arg(long, default_value_t = 20000)]
        samples: usize,
    },
    /// Solve (I - P_z) u = f on the grid near z = 0 and compare z u with
    /// the predicted simple-pole coefficient (rank 1 only)
    Resolvent {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.01)]
        z_abs: f64,
        #[arg(long, default_value_t = 2048)]
        n_grid: usize,
        /// Grid data: ones | centered-cos
        #[arg(long, default_value = "ones")]
        data: String,
    },
    /// Exercise the decomposition and flag-geometry identities on random
    /// words of the builtin specs
    GeomSelftest {
        #[arg(long, default_value_t = 1000)]
        words: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full quick invariant suite across every module
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(common: &Common) -> Result<LoadedSpec, CmdFailure> {
    load_spec(&common.spec).map_err(CmdFailure::Config)
}

fn range_usize(lo: usize, hi: usize, step: usize) -> Result<Vec<usize>, CmdFailure> {
    if step == 0 || hi < lo {
        return Err(CmdFailure::Config(anyhow::anyhow!(
            "need a positive step and max >= min"
        )));
    }
    Ok((lo..=hi).step_by(step).collect())
}

fn range_f64(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, CmdFailure> {
    if !(step > 0.0 && hi >= lo) {
        return Err(CmdFailure::Config(anyhow::anyhow!(
            "need a positive step and max >= min"
        )));
    }
    let mut out = Vec::new();
    let mut t = lo;
    while t <= hi + 1e-12 {
        out.push(t);
        t += step;
    }
    Ok(out)
}

fn dispatch(cmd: &Cmd) -> CmdResult {
    match cmd {
        Cmd::Lyapunov { common, n, samples } => {
            let loaded = load(common)?;
            let workers = resolve_workers(common.workers);
            commands::lyapunov(&loaded.spec, &loaded.hash, *n, *samples, common.seed, workers)
        }
        Cmd::Ldp {
            common,
            mode,
            d,
            eps,
            n_min,
            n_max,
            n_step,
            samples,
            drift_samples,
        } => {
            let loaded = load(common)?;
            let workers = resolve_workers(common.workers);
            let n_list = range_usize(*n_min, *n_max, *n_step)?;
            commands::ldp(
                &loaded.spec,
                &loaded.hash,
                mode,
                *d,
                *eps,
                &n_list,
                *samples,
                *drift_samples,
                common.seed,
                workers,
            )
        }
        Cmd::Stationary { common, n, samples } => {
            let loaded = load(common)?;
            let workers = resolve_workers(common.workers);
            commands::stationary(&loaded.spec, &loaded.hash, *n, *samples, common.seed, workers)
        }
        Cmd::Regularity {
            common,
            target,
            r_min,
            r_max,
            grid,
            n,
            samples,
        } => {
            let loaded = load(common)?;
            let workers = resolve_workers(common.workers);
            commands::regularity(
                &loaded.spec,
                &loaded.hash,
                target.as_deref(),
                *r_min,
                *r_max,
                *grid,
                *n,
                *samples,
                common.seed,
                workers,
            )
        }
        Cmd::Goodfreq {
            common,
            n,
            eps,
            samples,
            drift_samples,
        } => {
            let loaded = load(common)?;
            let workers = resolve_workers(common.workers);
            commands::goodfreq(
                &loaded.spec,
                &loaded.hash,
                *n,
                *eps,
                *samples,
                *drift_samples,
                common.seed,
                workers,
            )
        }
        Cmd::Noncon {
            common,
            n_min,
            n_max,
            n_step,
            eps,
            d,
            directions,
            samples,
            tuples,
        } => {
            let loaded = load(common)?;
            let workers = resolve_workers(common.workers);
            let n_list = range_usize(*n_min, *n_max, *n_step)?;
            commands::noncon_cmd(
                &loaded.spec,
                &loaded.hash,
                &n_list,
                *eps,
                *d,
                *directions,
                *samples,
                *tuples,
                common.seed,
                workers,
            )
        }
        Cmd::Multiscale {
            common,
            n,
            eps,
            rho_min,
            rho_max,
            grid,
            directions,
            samples,
        } => {
            let loaded = load(common)?;
            let workers = resolve_workers(common.workers);
            commands::multiscale(
                &loaded.spec,
                &loaded.hash,
                *n,
                *eps,
                *rho_min,
                *rho_max,
                *grid,
                *directions,
                *samples,
                common.seed,
                workers,
            )
        }
        Cmd::Fourier {
            common,
            k_max,
            n,
            samples,
        } => {
            let loaded = load(common)?;
            let workers = resolve_workers(common.workers);
            commands::fourier_cmd(
                &loaded.spec,
                &loaded.hash,
                *k_max,
                *n,
                *samples,
                common.seed,
                workers,
            )
        }
        Cmd::Oscillatory {
            common,
            xi,
            n,
            samples,
        } => {
            let loaded = load(common)?;
            let workers = resolve_workers(common.workers);
            commands::oscillatory(
                &loaded.spec,
                &loaded.hash,
                *xi,
                *n,
                *samples,
                common.seed,
                workers,
            )
        }
        Cmd::Goodness {
            phase,
            band_lo,
            band_hi,
            c,
            samples,
            seed,
            ..
        } => {
            let band = match (band_lo, band_hi) {
                (Some(lo), Some(hi)) => Some((*lo, *hi)),
                (None, None) => None,
                _ => {
                    return Err(CmdFailure::Config(anyhow::anyhow!(
                        "band-lo and band-hi must be given together"
                    )))
                }
            };
            commands::goodness(phase, band, *c, *samples, *seed)
        }
        Cmd::Spectrum {
            common,
            a,
            b_min,
            b_max,
            b_step,
            n_grid,
            refine,
        } => {
            let loaded = load(common)?;
            let workers = resolve_workers(common.workers);
            let a_list: Vec<f64> = a
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| CmdFailure::Config(anyhow::anyhow!("bad --a: {e}")))?;
            commands::spectrum(
                &loaded.spec,
                &loaded.hash,
                &a_list,
                *b_min,
                *b_max,
                *b_step,
                *n_grid,
                *refine,
                workers,
            )
        }
        Cmd::Iterate {
            common,
            z_re,
            z_im,
            n_iter,
        } => {
            let loaded = load(common)?;
            commands::iterate(&loaded.spec, &loaded.hash, *z_re, *z_im, *n_iter)
        }
        Cmd::Renewal {
            common,
            t,
            support,
            norm,
            samples,
        } => {
            let loaded = load(common)?;
            let workers = resolve_workers(common.workers);
            commands::renewal(
                &loaded.spec,
                &loaded.hash,
                *t,
                *support,
                *norm,
                *samples,
                common.seed,
                workers,
            )
        }
        Cmd::RenewalFit {
            common,
            t_min,
            t_max,
            t_step,
            support,
            samples,
        } => {
            let loaded = load(common)?;
            let workers = resolve_workers(common.workers);
            let t_list = range_f64(*t_min, *t_max, *t_step)?;
            commands::renewal_fit(
                &loaded.spec,
                &loaded.hash,
                &t_list,
                *support,
                *samples,
                common.seed,
                workers,
            )
        }
        Cmd::Resolvent {
            common,
            z_abs,
            n_grid,
            data,
        } => {
            let loaded = load(common)?;
            let workers = resolve_workers(common.workers);
            commands::resolvent(
                &loaded.spec,
                &loaded.hash,
                *z_abs,
                *n_grid,
                data,
                common.seed,
                workers,
            )
        }
        Cmd::GeomSelftest { words, seed, .. } => selftest::geom_selftest(*words, *seed),
        Cmd::Selftest { seed, .. } => selftest::selftest(*seed),
    }
}

fn out_path(cmd: &Cmd) -> Option<&PathBuf> {
    match cmd {
        Cmd::Lyapunov { common, .. }
        | Cmd::Ldp { common, .. }
        | Cmd::Stationary { common, .. }
        | Cmd::Regularity { common, .. }
        | Cmd::Goodfreq { common, .. }
        | Cmd::Noncon { common, .. }
        | Cmd::Multiscale { common, .. }
        | Cmd::Fourier { common, .. }
        | Cmd::Oscillatory { common, .. }
        | Cmd::Spectrum { common, .. }
        | Cmd::Iterate { common, .. }
        | Cmd::Renewal { common, .. }
        | Cmd::RenewalFit { common, .. }
        | Cmd::Resolvent { common, .. } => common.out.as_ref(),
        Cmd::Goodness { out, .. } | Cmd::GeomSelftest { out, .. } | Cmd::Selftest { out, .. } => {
            out.as_ref()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.cmd) {
        Ok(report) => match report.write(out_path(&cli.cmd).map(|p| p.as_path())) {
            Ok(()) => ExitCode::from(0),
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
        Err(CmdFailure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(1)
        }
        Err(CmdFailure::Numerical(e)) => {
            eprintln!("numerical failure: {e:#}");
            ExitCode::from(2)
        }
    }
}
