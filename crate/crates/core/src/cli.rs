//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::basis::{BasisFrame, BasisSpec};
use crate::christoffel::{christoffel_pencil, christoffel_weights, ChristoffelSpectrum};
use crate::clustering::{build_clusters, build_clusters_with_density, rn_classify, rn_interpolate};
use crate::error::{Error, Result};
use crate::gev::{solve_pencil, SpectralDecomposition};
use crate::io::{
    derivative_dx, generate_runge, generate_two_stage, histogram, read_samples, read_spectrum, write_cluster_report,
    write_columns, write_histogram, write_spectrum, ColumnSpec, SpectrumRow, TwoStageParams,
};
use crate::moments::{accumulate_in_frame, matrices_from_moments, x_pencil, MomentSet, OperatorPair, Sample};
use crate::quadrature::ChristoffelFunction;
use crate::radon_nikodym::{rn_gamma, rn_nevai};

#[derive(Debug, Parser)]
#[command(name = "lebesgue", version, about = "Lebesgue and Gaussian quadratures from sampled measures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Piecewise-linear two-stage degradation dataset `N, C(N)`.
    GenTwoStage(GenTwoStageArgs),
    /// 10001-row Runge dataset: 1, x..x^6, 1/(1+25x^2), weight.
    GenRunge {
        #[arg(long)]
        output: PathBuf,
    },
    /// Spectrum file (index, lambda, x_psi, w, w_K) of the f pencil.
    Quadrature(QuadratureArgs),
    /// Spectrum of the K(x) pencil; optionally the f pencil with w_K.
    Christoffel(ChristoffelArgs),
    /// Per-sample K(x), Nevai and gamma Radon-Nikodym estimates.
    RnEval(RnEvalArgs),
    /// D-point clustering of the value-node measure.
    Cluster(ClusterArgs),
    /// Binned mass of a spectrum file's eigenvalues.
    Histogram(HistogramArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FMode {
    Column,
    DerivativeDx,
    Christoffel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RhoKind {
    Pure,
    Christoffel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightKind {
    W,
    Wk,
}

#[derive(Debug, Args)]
pub struct GenTwoStageArgs {
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 10000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1000.0)]
    pub cycles: f64,
    #[arg(long = "break", default_value_t = 800.0)]
    pub break_at: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub slope1: f64,
    #[arg(long, default_value_t = 5e-4)]
    pub slope2: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// TOTAL:X:F[:W], 0-based.
    #[arg(long)]
    pub columns: ColumnSpec,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "chebyshev")]
    pub basis: BasisSpec,
    #[arg(long, value_enum, default_value_t = FMode::Column)]
    pub f_mode: FMode,
}

#[derive(Debug, Args)]
pub struct QuadratureArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub output: PathBuf,
    /// Write NaN in the w_K column instead of running the second pass.
    #[arg(long)]
    pub skip_christoffel: bool,
}

#[derive(Debug, Args)]
pub struct ChristoffelArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub output: PathBuf,
    /// Spectrum of the f pencil with Christoffel weights.
    #[arg(long)]
    pub f_output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RnEvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub gamma: f64,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long = "D")]
    pub d: usize,
    #[arg(long, value_enum, default_value_t = RhoKind::Pure)]
    pub rho: RhoKind,
    /// Per-sample x, f, w, f_RN, f_RNW.
    #[arg(long)]
    pub samples_output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HistogramArgs {
    /// A spectrum file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 25)]
    pub bins: usize,
    #[arg(long, value_enum, default_value_t = WeightKind::W)]
    pub weights: WeightKind,
}

/// Samples, fitted frame and first-pass moments.
struct Prepared {
    samples: Vec<Sample>,
    frame: BasisFrame,
    moments: MomentSet,
}

fn prepare(data: &DataArgs) -> Result<Prepared> {
    if data.n == 0 {
        return Err(Error::invalid("--n must be at least 1"));
    }
    let mut samples = read_samples(&data.input, &data.columns)?;
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    if data.f_mode == FMode::DerivativeDx {
        samples = derivative_dx(&samples)?;
    }
    let lo = samples.iter().map(|s| s.x).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.x).fold(f64::NEG_INFINITY, f64::max);
    let frame = if hi > lo {
        BasisFrame::fitted(data.basis.clone(), lo, hi)?
    } else {
        BasisFrame::raw(data.basis.clone())
    };
    let moments = accumulate_in_frame(samples.iter().copied(), &frame, data.n)?;
    Ok(Prepared {
        samples,
        frame,
        moments,
    })
}

fn k_spectrum(p: &Prepared) -> Result<ChristoffelSpectrum> {
    let gram = matrices_from_moments(&p.moments)?.right().clone();
    christoffel_pencil(p.samples.iter().copied(), &gram, &p.frame)
}

/// The pencil whose eigenvalues are the value-nodes, plus the K spectrum
/// when it was needed to build it.
fn f_pencil(p: &Prepared, mode: FMode) -> Result<(OperatorPair, Option<ChristoffelSpectrum>)> {
    let pair = matrices_from_moments(&p.moments)?;
    if mode == FMode::Christoffel {
        let spec = k_spectrum(p)?;
        let k = pair.with_left(spec.k_matrix().clone())?;
        Ok((k, Some(spec)))
    } else {
        Ok((pair, None))
    }
}

fn spectrum_rows(
    p: &Prepared,
    decomp: &SpectralDecomposition,
    spec: Option<&ChristoffelSpectrum>,
) -> Result<Vec<SpectrumRow>> {
    let x = x_pencil(&p.moments)?;
    let x_psi = decomp.expectations(x.left());
    let means = decomp.state_means();
    let wk = match spec {
        Some(s) => christoffel_weights(decomp, s)?,
        None => vec![f64::NAN; decomp.n()],
    };
    Ok((0..decomp.n())
        .map(|i| SpectrumRow {
            index: i,
            lambda: decomp.eigenvalues()[i],
            x_psi: x_psi[i],
            weight: means[i] * means[i],
            weight_k: wk[i],
        })
        .collect())
}

fn quadrature(args: &QuadratureArgs) -> Result<()> {
    let p = prepare(&args.data)?;
    let (pair, mut spec) = f_pencil(&p, args.data.f_mode)?;
    let decomp = solve_pencil(&pair)?;
    if spec.is_none() && !args.skip_christoffel {
        spec = Some(k_spectrum(&p)?);
    }
    let spec = if args.skip_christoffel { None } else { spec };
    write_spectrum(&args.output, &spectrum_rows(&p, &decomp, spec.as_ref())?)
}

fn christoffel(args: &ChristoffelArgs) -> Result<()> {
    let p = prepare(&args.data)?;
    let spec = k_spectrum(&p)?;
    write_spectrum(&args.output, &spectrum_rows(&p, spec.decomposition(), Some(&spec))?)?;
    if let Some(path) = &args.f_output {
        let (pair, _) = f_pencil(&p, args.data.f_mode)?;
        let decomp = solve_pencil(&pair)?;
        write_spectrum(path, &spectrum_rows(&p, &decomp, Some(&spec))?)?;
    }
    Ok(())
}

fn rn_eval(args: &RnEvalArgs) -> Result<()> {
    let p = prepare(&args.data)?;
    let (pair, _) = f_pencil(&p, args.data.f_mode)?;
    let decomp = solve_pencil(&pair)?;
    let k = ChristoffelFunction::new(pair.right(), &p.frame)?;
    let rows = p
        .samples
        .iter()
        .map(|s| {
            Ok(vec![
                s.x,
                s.f,
                s.weight,
                k.evaluate(s.x),
                rn_nevai(&decomp, s.x)?,
                rn_gamma(&decomp, s.x, args.gamma)?,
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    write_columns(&args.output, &["x", "f", "w", "K", "nevai", "gamma"], &rows)
}

fn cluster(args: &ClusterArgs) -> Result<()> {
    let p = prepare(&args.data)?;
    let (pair, spec) = f_pencil(&p, args.data.f_mode)?;
    let decomp = solve_pencil(&pair)?;
    let model = match args.rho {
        RhoKind::Pure => {
            let w: Vec<f64> = decomp.state_means().iter().map(|m| m * m).collect();
            build_clusters(&decomp, &w, args.d)?
        }
        RhoKind::Christoffel => {
            let spec = match spec {
                Some(s) => s,
                None => k_spectrum(&p)?,
            };
            build_clusters_with_density(&decomp, spec.rho_k(), args.d)?
        }
    };
    write_cluster_report(&args.output, model.cluster_values(), model.cluster_weights())?;
    if let Some(path) = &args.samples_output {
        let rows = p
            .samples
            .iter()
            .map(|s| Ok(vec![s.x, s.f, s.weight, rn_interpolate(&model, s.x)?, rn_classify(&model, s.x)?]))
            .collect::<Result<Vec<_>>>()?;
        write_columns(path, &["x", "f", "w", "f_RN", "f_RNW"], &rows)?;
    }
    Ok(())
}

fn histogram_cmd(args: &HistogramArgs) -> Result<()> {
    let rows = read_spectrum(&args.input)?;
    let values: Vec<f64> = rows.iter().map(|r| r.lambda).collect();
    let weights: Vec<f64> = rows
        .iter()
        .map(|r| match args.weights {
            WeightKind::W => r.weight,
            WeightKind::Wk => r.weight_k,
        })
        .collect();
    if weights.iter().any(|w| w.is_nan()) {
        return Err(Error::invalid(format!("{}: selected weight column contains NaN", args.input.display())));
    }
    write_histogram(&args.output, &histogram(&values, &weights, args.bins)?)
}

pub fn run(command: &Command) -> Result<()> {
    match command {
        Command::GenTwoStage(a) => generate_two_stage(
            &a.output,
            &TwoStageParams {
                samples: a.samples,
                n_total: a.cycles,
                n_break: a.break_at,
                slope1: a.slope1,
                slope2: a.slope2,
                noise: a.noise,
                seed: a.seed,
            },
        ),
        Command::GenRunge { output } => generate_runge(output),
        Command::Quadrature(a) => quadrature(a),
        Command::Christoffel(a) => christoffel(a),
        Command::RnEval(a) => rn_eval(a),
        Command::Cluster(a) => cluster(a),
        Command::Histogram(a) => histogram_cmd(a),
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        3
    } else if matches!(
        e,
        Error::InvalidArgument(_) | Error::InsufficientRecurrence { .. } | Error::DegreeTooHigh { .. }
    ) {
        1
    } else {
        2
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_entry<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
