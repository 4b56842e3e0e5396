//! Batch driver for `phasereg-core`: every operation as a subcommand, arrays
//! and curves through [`io`].

pub mod io;

use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use log::info;
use ndarray::{Array2, Axis};
use phasereg_core::dispersion::{dispersion_d, dispersion_profile};
use phasereg_core::filters::{delta_field, filter_frame, filter_profile, filter_sinogram};
use phasereg_core::select::{
    find_ell, log_space, m_sweep, physical_l, CurvatureAxis, CurvatureProfile, FindEllOptions, ModeEnergy, PhysicalParams, Refine, SelectInput,
};
use phasereg_core::simulate::{
    distance_series, distance_series_1d, gaussian_bump, multiplicative_noise, propagate_1d_spectral, propagate_2d, random_soft_disks, rect_phantom,
    simulate_profile, DistanceSeries, Phantom1D,
};
use phasereg_core::tomo::{radon, recon_fbp_with, Backprojector};
use phasereg_core::variational::{frechet_check_e, frechet_check_r, random_directions, second_order_check, stationarity};
use phasereg_core::{fft, CutoffMask, Ell, Frame, Grid1D, Grid2D, Mode, Profile, Sinogram, Slice};
use thiserror::Error;

use crate::io::{read_array, write_array, write_curve, ArrayHeader, Curve, IoError, Kind};

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] phasereg_core::Error),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{0}")]
    Input(String),
    /// A verification ran but its check did not hold.
    #[error("{0}")]
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Check(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "phasereg", version, about = "Regularized phase retrieval and tomography")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Retrieve a thickness map (frame mode) or smooth a sinogram (slice mode).
    Filter(FilterArgs),
    /// Maximize the curvature of ln xi over ell and print the argmax.
    FindEll(FindEllArgs),
    /// Regularized filtered backprojection, one slice per ell.
    Recon(ReconArgs),
    /// Rectangular 1D phantom and its propagated intensity.
    #[command(name = "simulate-1d")]
    Simulate1d(Simulate1dArgs),
    /// 2D phantom as a propagated frame or a sinogram.
    #[command(name = "simulate-2d")]
    Simulate2d(Simulate2dArgs),
    /// The same phantom propagated to several distances.
    DistanceSeries(DistanceSeriesArgs),
    /// Print max|Delta| and its bound for a frame.
    DeltaBound(DeltaBoundArgs),
    /// Dispersion D(ell, sigma_c) or its curvature profile.
    Dispersion(DispersionArgs),
    /// ell*(m) over a range of cutoff multipliers, calibrated against L.
    MSweep(MSweepArgs),
    /// Frechet, stationarity and second-order checks on a synthetic frame.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Frame,
    Slice,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Frame => Mode::Frame,
            ModeArg::Slice => Mode::Slice,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AxisArg {
    LogEll,
    Ell,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RefineArg {
    Golden,
    Newton,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BackprojectorArg {
    Direct,
    Bst,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PhantomArg {
    Disks,
    Gaussian,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SimKind {
    Frame,
    Sinogram,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Search interval for ell.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    pub bracket: Option<Vec<f64>>,
    #[arg(long, default_value_t = 48)]
    pub grid_points: usize,
    #[arg(long, value_enum, default_value_t = AxisArg::LogEll)]
    pub axis: AxisArg,
    #[arg(long, value_enum, default_value_t = RefineArg::Golden)]
    pub refine: RefineArg,
}

impl SearchArgs {
    fn options(&self) -> FindEllOptions {
        FindEllOptions {
            bracket: self.bracket.as_ref().map(|b| (b[0], b[1])),
            grid_points: self.grid_points,
            axis: match self.axis {
                AxisArg::LogEll => CurvatureAxis::LogEll,
                AxisArg::Ell => CurvatureAxis::Ell,
            },
            refine: match self.refine {
                RefineArg::Golden => Refine::Golden,
                RefineArg::Newton => Refine::Newton,
            },
            ..Default::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct PhysArgs {
    /// Refractive index decrement.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub distance: Option<f64>,
}

impl PhysArgs {
    fn params(&self, d: Option<f64>) -> Result<PhysicalParams> {
        match (self.delta, self.beta, self.lambda, d.or(self.distance)) {
            (Some(delta), Some(beta), Some(lambda), Some(d)) => Ok(PhysicalParams::new(delta, beta, lambda, d)?),
            _ => Err(CliError::Input("physical parameters need --delta, --beta, --lambda and a distance".into())),
        }
    }

    /// `--L` if given, otherwise `L` from the physical parameters.
    fn resolve(&self, l: Option<f64>) -> Result<f64> {
        match l {
            Some(l) if l >= 0.0 => Ok(l),
            Some(l) => Err(CliError::Input(format!("L must be nonnegative, got {l}"))),
            None => Ok(physical_l(&self.params(None)?)),
        }
    }
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("ell_source").required(true).args(["ell", "auto"])))]
pub struct FilterArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    #[arg(long)]
    pub ell: Option<f64>,
    /// Pick ell by curvature maximization first.
    #[arg(long)]
    pub auto: bool,
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Args)]
pub struct FindEllArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    /// Write the (ell, xi, kappa) profile here.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Args)]
pub struct ReconArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
    /// One or more values; several give a SERIES output.
    #[arg(long, required = true, num_args = 1.., value_delimiter = ',')]
    pub ell: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    /// Output side in pixels (default: detector samples).
    #[arg(long)]
    pub size: Option<usize>,
    /// Output pixel (default: detector step).
    #[arg(long)]
    pub pixel: Option<f64>,
    #[arg(long, value_enum, default_value_t = BackprojectorArg::Direct)]
    pub backprojector: BackprojectorArg,
    /// Write (ell, sharpness) here, sharpness being the squared L2 norm of the Laplacian.
    #[arg(long)]
    pub curve: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Simulate1dArgs {
    #[arg(long, default_value_t = 300.0)]
    pub w: f64,
    #[arg(long, default_value_t = 1e4)]
    pub n: f64,
    #[arg(long = "L")]
    pub l: f64,
    #[arg(long, default_value_t = 4096)]
    pub samples: usize,
    #[arg(long, default_value_t = 2.0)]
    pub half_width: f64,
    /// Multiplicative Gaussian noise level on the intensity.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Columns t, p, dp, d2p, intensity.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Also write the intensity as a 1D FRAME.
    #[arg(long)]
    pub array: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Simulate2dArgs {
    #[arg(long, value_enum, default_value_t = SimKind::Frame)]
    pub kind: SimKind,
    #[arg(long, value_enum, default_value_t = PhantomArg::Disks)]
    pub phantom: PhantomArg,
    #[arg(long, default_value_t = 256)]
    pub size: usize,
    #[arg(long, default_value_t = 1.0 / 64.0)]
    pub pixel: f64,
    #[arg(long, default_value_t = 5)]
    pub disks: usize,
    #[arg(long, default_value_t = 0.5)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 0.25)]
    pub width: f64,
    /// Projection angles for `--kind sinogram`.
    #[arg(long, default_value_t = 180)]
    pub angles: usize,
    #[arg(long = "L")]
    pub l: Option<f64>,
    #[command(flatten)]
    pub phys: PhysArgs,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, short)]
    pub output: PathBuf,
    /// Also write the ground-truth thickness.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DistanceSeriesArgs {
    /// Comma-separated, at least two, increasing.
    #[arg(long, required = true, num_args = 1.., value_delimiter = ',')]
    pub distances: Vec<f64>,
    #[command(flatten)]
    pub phys: PhysArgs,
    /// Rectangular 1D phantom instead of 2D soft disks.
    #[arg(long)]
    pub one_d: bool,
    #[arg(long, default_value_t = 256)]
    pub size: usize,
    #[arg(long, default_value_t = 1.0 / 64.0)]
    pub pixel: f64,
    #[arg(long, default_value_t = 5)]
    pub disks: usize,
    #[arg(long, default_value_t = 300.0)]
    pub w: f64,
    #[arg(long, default_value_t = 1e4)]
    pub n: f64,
    #[arg(long, default_value_t = 4096)]
    pub samples: usize,
    #[arg(long, default_value_t = 2.0)]
    pub half_width: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct DeltaBoundArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long)]
    pub ell: f64,
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    /// Write the Delta field here.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DispersionArgs {
    #[arg(long)]
    pub sigma_c: f64,
    /// Print D at this ell instead of searching.
    #[arg(long)]
    pub ell: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    pub lo: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hi: f64,
    #[arg(long, default_value_t = 48)]
    pub grid_points: usize,
    /// Write (ell, d, kappa) here.
    #[arg(long)]
    pub curve: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MSweepArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    /// Reference L to calibrate against.
    #[arg(long = "L")]
    pub l: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Frame)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1e-3)]
    pub m_lo: f64,
    #[arg(long, default_value_t = 5e-2)]
    pub m_hi: f64,
    #[arg(long, default_value_t = 25)]
    pub count: usize,
    /// Write (m, ell_star, crossing) here; crossing is 1 on the two samples bracketing L.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    #[arg(long, default_value_t = 1.0 / 32.0)]
    pub pixel: f64,
    #[arg(long, default_value_t = 2e-3)]
    pub ell: f64,
    #[arg(long, default_value_t = 50)]
    pub directions: usize,
    /// Write per-direction results here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

enum Input {
    Frame(Frame),
    Profile(Profile),
    Sinogram(Sinogram),
}

impl Input {
    fn kind(&self) -> &'static str {
        match self {
            Input::Frame(_) => "2D FRAME",
            Input::Profile(_) => "1D FRAME",
            Input::Sinogram(_) => "SINOGRAM",
        }
    }

    fn select(&self) -> SelectInput<'_> {
        match self {
            Input::Frame(f) => SelectInput::Frame(f),
            Input::Profile(p) => SelectInput::Profile(p),
            Input::Sinogram(g) => SelectInput::Sinogram(g),
        }
    }
}

fn matrix(h: &ArrayHeader, data: Vec<f64>) -> Result<Array2<f64>> {
    match h.shape[..] {
        [r, c] => Ok(Array2::from_shape_vec((r, c), data).expect("length checked on read")),
        _ => Err(CliError::Input(format!("{} needs a 2D shape, got {:?}", h.kind, h.shape))),
    }
}

fn load(path: &Path) -> Result<Input> {
    let (h, data) = read_array(path)?;
    Ok(match h.kind {
        Kind::Frame if h.shape.len() == 1 => Input::Profile(Profile::new(data, h.delta)?),
        Kind::Frame => Input::Frame(Frame::new(matrix(&h, data)?, h.delta)?),
        Kind::Sinogram => {
            let angles = h.angles.clone().unwrap_or_else(|| Sinogram::uniform_angles(h.shape[0]));
            Input::Sinogram(Sinogram::new(matrix(&h, data)?, h.delta, angles)?)
        }
        Kind::Slice | Kind::Series => return Err(CliError::Input(format!("{} files are outputs only", h.kind))),
    })
}

fn flat(a: &Array2<f64>) -> Vec<f64> {
    a.iter().copied().collect()
}

fn sinogram_header(g: &Sinogram) -> ArrayHeader {
    let (na, nt) = g.data().dim();
    ArrayHeader::new(Kind::Sinogram, vec![na, nt], g.t_grid().delta()).with_angles(g.angles().to_vec())
}

/// Output header stamped with the invocation.
struct Stamp(String);

impl Stamp {
    fn header(&self, kind: Kind, shape: Vec<usize>, delta: f64) -> ArrayHeader {
        ArrayHeader::new(kind, shape, delta).with_meta("argv", &self.0)
    }

    fn sign(&self, h: ArrayHeader) -> ArrayHeader {
        h.with_meta("argv", &self.0)
    }
}

fn list(xs: &[f64]) -> String {
    xs.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(" ")
}

fn profile_curve(p: &CurvatureProfile, value: &str) -> Curve {
    Curve::new()
        .column("ell", p.records.iter().map(|r| r.ell).collect())
        .column(value, p.records.iter().map(|r| r.xi).collect())
        .column("kappa", p.records.iter().map(|r| r.kappa).collect())
}

fn ell(v: f64) -> Result<Ell> {
    Ok(Ell::new(v)?)
}

/// Parses nothing; runs an already parsed command. `argv` is echoed into output metadata.
pub fn run(cli: Cli, argv: &[String]) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Input(e.to_string()))?;
    }
    let stamp = Stamp(argv.join(" "));
    let seed = cli.seed;
    match cli.command {
        Command::Filter(a) => filter(a, &stamp),
        Command::FindEll(a) => find(a),
        Command::Recon(a) => recon(a, &stamp),
        Command::Simulate1d(a) => simulate_1d(a, &stamp, seed),
        Command::Simulate2d(a) => simulate_2d(a, &stamp, seed),
        Command::DistanceSeries(a) => series(a, &stamp, seed),
        Command::DeltaBound(a) => delta_bound(a, &stamp),
        Command::Dispersion(a) => dispersion(a),
        Command::MSweep(a) => sweep(a),
        Command::Verify(a) => verify(a, seed),
    }
}

fn filter(a: FilterArgs, stamp: &Stamp) -> Result<()> {
    let input = load(&a.input)?;
    let mode = Mode::from(a.mode);
    let mask = CutoffMask::new(a.m)?;
    let l = match a.ell {
        Some(v) => ell(v)?,
        None => {
            let p = find_ell(input.select(), mode, mask, &a.search.options())?;
            info!("ell* = {:e} (kappa {:e})", p.argmax_ell, p.argmax_kappa);
            println!("{}", p.argmax_ell);
            ell(p.argmax_ell)?
        }
    };
    let (header, data) = match (&input, mode) {
        (Input::Frame(f), Mode::Frame) => {
            let r = filter_frame(f, l, mask, a.c)?;
            (stamp.header(Kind::Frame, r.data.shape().to_vec(), f.grid().delta()), flat(&r.data))
        }
        (Input::Profile(p), Mode::Frame) => {
            let r = filter_profile(p, l, mask, a.c)?;
            (stamp.header(Kind::Frame, vec![r.data.len()], p.grid().delta()), r.data.to_vec())
        }
        (Input::Sinogram(g), Mode::Slice) => (stamp.sign(sinogram_header(g)), flat(&filter_sinogram(g, l, mask).data)),
        (i, m) => return Err(CliError::Input(format!("mode {m} does not apply to a {} input", i.kind()))),
    };
    write_array(&a.output, &meta_filter(header, &a, l, mode), &data)?;
    Ok(())
}

fn meta_filter(h: ArrayHeader, a: &FilterArgs, l: Ell, mode: Mode) -> ArrayHeader {
    h.with_meta("ell", format!("{:?}", l.get()))
        .with_meta("m", format!("{:?}", a.m))
        .with_meta("c", format!("{:?}", a.c))
        .with_meta("mode", mode)
        .with_meta("auto", a.auto)
}

fn find(a: FindEllArgs) -> Result<()> {
    let input = load(&a.input)?;
    let p = find_ell(input.select(), a.mode.into(), CutoffMask::new(a.m)?, &a.search.options())?;
    if let Some(path) = &a.curve {
        write_curve(path, &profile_curve(&p, "xi"))?;
    }
    info!("kappa* = {:e}", p.argmax_kappa);
    println!("{}", p.argmax_ell);
    Ok(())
}

fn recon(a: ReconArgs, stamp: &Stamp) -> Result<()> {
    let Input::Sinogram(g) = load(&a.input)? else {
        return Err(CliError::Input("recon needs a SINOGRAM".into()));
    };
    let n = a.size.unwrap_or(g.t_grid().n());
    let d = a.pixel.unwrap_or(g.t_grid().delta());
    let out = Grid2D::square(n, d)?;
    let mask = CutoffMask::new(a.m)?;
    let bp = match a.backprojector {
        BackprojectorArg::Direct => Backprojector::Direct,
        BackprojectorArg::Bst => Backprojector::Bst,
    };
    let mut data = Vec::with_capacity(a.ell.len() * n * n);
    let mut sharpness = Vec::with_capacity(a.ell.len());
    for &l in &a.ell {
        let s = recon_fbp_with(&g, ell(l)?, out, mask, bp);
        sharpness.push(fft::laplacian2(s.data().view(), &out).iter().map(|v| v * v).sum::<f64>() * out.cell_area());
        data.extend(s.data().iter());
        info!("ell = {l:e}: sharpness {:e}", sharpness.last().unwrap());
    }
    let h = match a.ell.len() {
        1 => stamp.header(Kind::Slice, vec![n, n], d),
        k => stamp.header(Kind::Series, vec![k, n, n], d),
    };
    write_array(&a.output, &h.with_meta("ell", list(&a.ell)).with_meta("m", format!("{:?}", a.m)), &data)?;
    if let Some(path) = &a.curve {
        write_curve(path, &Curve::new().column("ell", a.ell.clone()).column("sharpness", sharpness))?;
    }
    Ok(())
}

fn simulate_1d(a: Simulate1dArgs, stamp: &Stamp, seed: u64) -> Result<()> {
    let grid = Grid1D::spanning(a.samples, a.half_width)?;
    let ph = rect_phantom(&Phantom1D::new(a.w, a.n, grid)?)?;
    let mut intensity = simulate_profile(&ph, &grid, a.l)?.data().to_vec();
    if a.noise > 0.0 {
        multiplicative_noise(&mut intensity, a.noise, seed)?;
    }
    let curve = Curve::new()
        .column("t", ph.t.clone())
        .column("p", ph.p.clone())
        .column("dp", ph.dp.clone())
        .column("d2p", ph.d2p.clone())
        .column("intensity", intensity.clone());
    write_curve(&a.output, &curve)?;
    if let Some(path) = &a.array {
        let h = stamp.header(Kind::Frame, vec![a.samples], grid.delta()).with_meta("L", format!("{:?}", a.l));
        write_array(path, &h, &intensity)?;
    }
    Ok(())
}

fn simulate_2d(a: Simulate2dArgs, stamp: &Stamp, seed: u64) -> Result<()> {
    let grid = Grid2D::square(a.size, a.pixel)?;
    let l = a.phys.resolve(a.l)?;
    let p = match a.phantom {
        PhantomArg::Disks => random_soft_disks(&grid, a.disks, seed),
        PhantomArg::Gaussian => gaussian_bump(&grid, a.amplitude, a.width),
    };
    let noise = |x: &mut [f64]| if a.noise > 0.0 { multiplicative_noise(x, a.noise, seed) } else { Ok(()) };
    let (header, data, truth_kind) = match a.kind {
        SimKind::Frame => {
            let mut f = flat(propagate_2d(&p, a.pixel, l)?.data());
            noise(&mut f)?;
            (stamp.header(Kind::Frame, vec![a.size, a.size], a.pixel), f, Kind::Frame)
        }
        SimKind::Sinogram => {
            let t = Grid1D::new(a.size, a.pixel)?;
            let g = radon(&Slice::new(p.clone(), a.pixel)?, &Sinogram::uniform_angles(a.angles), t)?;
            let mut rows = Vec::with_capacity(a.angles * a.size);
            for row in g.data().axis_iter(Axis(0)) {
                let mut f = propagate_1d_spectral(row.as_slice().expect("standard layout"), &t, l)?;
                noise(&mut f)?;
                rows.extend(f.iter().map(|v| -v.ln()));
            }
            (stamp.sign(sinogram_header(&g)), rows, Kind::Slice)
        }
    };
    write_array(&a.output, &header.with_meta("L", format!("{l:?}")).with_meta("seed", seed), &data)?;
    if let Some(path) = &a.truth {
        let h = stamp.header(truth_kind, vec![a.size, a.size], a.pixel).with_meta("quantity", "thickness");
        write_array(path, &h, &flat(&p))?;
    }
    Ok(())
}

fn series(a: DistanceSeriesArgs, stamp: &Stamp, seed: u64) -> Result<()> {
    let s = DistanceSeries::new(a.distances.clone(), a.phys.params(a.distances.first().copied())?)?;
    let k = a.distances.len();
    let (mut data, shape, delta) = if a.one_d {
        let grid = Grid1D::spanning(a.samples, a.half_width)?;
        let ph = rect_phantom(&Phantom1D::new(a.w, a.n, grid)?)?;
        let profiles = distance_series_1d(&ph, &grid, &s)?;
        (profiles.iter().flat_map(|p| p.data().to_vec()).collect::<Vec<_>>(), vec![k, a.samples], grid.delta())
    } else {
        let grid = Grid2D::square(a.size, a.pixel)?;
        let frames = distance_series(&random_soft_disks(&grid, a.disks, seed), a.pixel, &s)?;
        (frames.iter().flat_map(|f| flat(f.data())).collect(), vec![k, a.size, a.size], a.pixel)
    };
    if a.noise > 0.0 {
        let per = data.len() / k;
        for (i, chunk) in data.chunks_mut(per).enumerate() {
            multiplicative_noise(chunk, a.noise, seed.wrapping_add(i as u64))?;
        }
    }
    let h = stamp.header(Kind::Series, shape, delta).with_meta("distances", list(&a.distances)).with_meta("L", list(&s.ls()));
    write_array(&a.output, &h, &data)?;
    Ok(())
}

fn delta_bound(a: DeltaBoundArgs, stamp: &Stamp) -> Result<()> {
    let Input::Frame(f) = load(&a.input)? else {
        return Err(CliError::Input("delta-bound needs a 2D FRAME".into()));
    };
    let r = delta_field(&f, ell(a.ell)?, CutoffMask::new(a.m)?)?;
    if let Some(path) = &a.output {
        let h = stamp.header(Kind::Frame, r.field.shape().to_vec(), f.grid().delta());
        write_array(path, &h.with_meta("max_abs", r.max_abs).with_meta("bound", r.bound), &flat(&r.field))?;
    }
    println!("{} {}", r.max_abs, r.bound);
    if !r.holds() {
        return Err(CliError::Check(format!("max|Delta| = {:e} exceeds the bound {:e}", r.max_abs, r.bound)));
    }
    Ok(())
}

fn dispersion(a: DispersionArgs) -> Result<()> {
    if let Some(l) = a.ell {
        println!("{}", dispersion_d(l, a.sigma_c)?);
        return Ok(());
    }
    let opts = FindEllOptions { grid_points: a.grid_points, ..Default::default() };
    let p = dispersion_profile(a.sigma_c, a.lo, a.hi, &opts)?;
    if let Some(path) = &a.curve {
        write_curve(path, &profile_curve(&p, "d"))?;
    }
    println!("{}", p.argmax_ell);
    Ok(())
}

fn sweep(a: MSweepArgs) -> Result<()> {
    if a.count < 2 || !(a.m_lo > 0.0 && a.m_lo < a.m_hi) {
        return Err(CliError::Input("need 0 < m-lo < m-hi and count >= 2".into()));
    }
    let input = load(&a.input)?;
    let energy = ModeEnergy::new(input.select(), a.mode.into())?;
    let s = m_sweep(&energy, &log_space(a.m_lo, a.m_hi, a.count), a.l, &a.search.options())?;
    info!("m* = {:e}, ell* = {:e}, rel err {:.3}%", s.m_star, s.ell_star, 100.0 * s.rel_error());
    if let Some(path) = &a.curve {
        let (i, j) = s.crossing;
        let curve = Curve::new()
            .column("m", s.points.iter().map(|p| p.m).collect())
            .column("ell_star", s.points.iter().map(|p| p.ell_star).collect())
            .column("crossing", (0..s.points.len()).map(|k| f64::from(u8::from(k == i || k == j))).collect());
        write_curve(path, &curve)?;
    }
    println!("{}", s.m_star);
    Ok(())
}

fn verify(a: VerifyArgs, seed: u64) -> Result<()> {
    let grid = Grid2D::square(a.size, a.pixel)?;
    let truth = random_soft_disks(&grid, 4, seed);
    let f = Frame::new(truth.mapv(|v| (-v).exp()), a.pixel)?;
    let l = ell(a.ell)?;
    let p_bar = filter_frame(&f, l, CutoffMask::full(), 1.0)?.data;
    let dirs = random_directions(&grid, a.directions, 0.0, seed.wrapping_add(1));
    let stat: Vec<f64> = stationarity(&p_bar, &f, l, &dirs)?.iter().map(|r| r.ratio()).collect();
    let eps = 1e-3 * (p_bar.iter().map(|v| v * v).sum::<f64>() * grid.cell_area()).sqrt();
    let so = second_order_check(&p_bar, &f, l, &dirs, eps)?;
    let quotient: Vec<f64> = so.iter().map(|r| r.quotient / r.norm2).collect();

    let p = &truth + &(random_directions(&grid, 1, 3.0, seed.wrapping_add(2)).remove(0) * 0.05);
    let hs = random_directions(&grid, a.directions, 2.0, seed.wrapping_add(3));
    let fe: Vec<f64> = frechet_check_e(&p, &truth, &grid, &hs)?.iter().map(|r| r.rel_error).collect();
    let fr: Vec<f64> = frechet_check_r(&p, &grid, &hs)?.iter().map(|r| r.rel_error).collect();

    let max = |x: &[f64]| x.iter().copied().fold(0.0f64, f64::max);
    let min = |x: &[f64]| x.iter().copied().fold(f64::INFINITY, f64::min);
    let checks = [
        ("stationarity |H'h| / scale", max(&stat), max(&stat) <= 1e-4),
        ("min second difference / |v|^2", min(&quotient), min(&quotient) >= -1e-6),
        ("E' relative error", max(&fe), max(&fe) <= 1e-5),
        ("R' relative error", max(&fr), max(&fr) <= 1e-4),
    ];
    for (name, v, ok) in &checks {
        eprintln!("{} {name}: {v:.3e}", if *ok { "ok  " } else { "FAIL" });
    }
    if let Some(path) = &a.report {
        let curve = Curve::new()
            .column("direction", (0..a.directions).map(|i| i as f64).collect())
            .column("stationarity", stat)
            .column("quotient", quotient)
            .column("e_rel", fe)
            .column("r_rel", fr);
        write_curve(path, &curve)?;
    }
    match checks.iter().find(|c| !c.2) {
        Some((name, v, _)) => Err(CliError::Check(format!("{name} failed at {v:e}"))),
        None => Ok(()),
    }
}
