use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use flamelets_core::flamelets::BandwidthSelection;
use flamelets_core::io::{from_value, to_json, to_json_array};
use flamelets_core::kde::{bandwidth_vineyards, GridSpec, SweepConfig};
use flamelets_core::{
    bottleneck, build_flamelet, compute_persistence, dynamic, fixtures, hausdorff,
    integrated_bottleneck, integrated_hausdorff, integrated_landscape_distance, kde_evaluate,
    landscape, landscape_distance, projection_matrix, rips_filtration, select_bandwidth_ta_with,
    silhouette, silverman_classic, silverman_extended, sublevel_grid_filtration,
    superlevel_grid_filtration, BandwidthRange, Flamelet, GridFunction, KdeModel, Landscape,
    PersistenceDiagram, PointCloud, SelectionCriterion, Spacing, Vineyard, YGrid,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::ingest::{read_dynamic, read_points};

#[derive(Debug, Parser)]
#[command(
    name = "flamelets",
    version,
    about = "Persistent homology, landscapes and flamelets"
)]
pub struct Cli {
    /// Write the artifact here instead of stdout.
    #[arg(short, long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Persistence diagrams of a point cloud (CSV, Rips) or grid function (JSON).
    Diagram(DiagramArgs),
    /// Persistence landscape of a diagram.
    Landscape(LandscapeArgs),
    /// Power-weighted silhouette of a diagram.
    Silhouette(SilhouetteArgs),
    /// Flamelets indexed by time (dynamic CSV) or KDE bandwidth (static CSV).
    Flamelet(FlameletArgs),
    /// KDE bandwidth sweep producing one flamelet per homology dimension.
    Sweep(SweepCommand),
    /// Topologically-aware bandwidth from a flamelet or a fresh sweep.
    SelectBandwidth(SelectArgs),
    /// Distance between two artifacts, printed as a single number.
    Distance(DistanceArgs),
    /// Gaussian KDE evaluated on a regular grid.
    Kde(KdeArgs),
    /// One flamelet level as a CSV matrix (rows = scales, columns = levels).
    Project(ProjectArgs),
    /// Seeded synthetic datasets as CSV.
    Fixtures(FixtureArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FiltrationKind {
    Sub,
    Super,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FlameletMode {
    Time,
    Bandwidth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpacingArg {
    Lin,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    Sup,
    Mass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistanceMetric {
    Bottleneck,
    Landscape,
    IntegratedLandscape,
    IntegratedBottleneck,
    Hausdorff,
    IntegratedHausdorff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FixtureKind {
    Circle,
    Mixture,
    Dynamic,
}

/// Homology dimensions written `0`, `1` or `0+1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dims(pub Vec<usize>);

fn parse_dims(s: &str) -> Result<Dims, String> {
    let mut dims = s
        .split('+')
        .map(|d| match d.trim() {
            "0" => Ok(0),
            "1" => Ok(1),
            other => Err(format!(
                "unsupported homology dimension {other:?} (use 0, 1 or 0+1)"
            )),
        })
        .collect::<Result<Vec<_>, _>>()?;
    dims.sort_unstable();
    dims.dedup();
    Ok(Dims(dims))
}

#[derive(Debug, Args)]
pub struct DiagramArgs {
    /// Point CSV, or GridFunction JSON (`.json`).
    pub input: PathBuf,
    #[arg(long, value_parser = parse_dims, default_value = "0+1")]
    pub dims: Dims,
    /// Rips edge cutoff (point clouds only).
    #[arg(long, default_value_t = f64::INFINITY)]
    pub max_radius: f64,
    /// Level-set direction (grid functions only).
    #[arg(long, value_enum, default_value_t = FiltrationKind::Sub)]
    pub filtration: FiltrationKind,
}

#[derive(Debug, Args)]
pub struct YGridArgs {
    #[arg(long, default_value_t = flamelets_core::landscape::DEFAULT_GRID_STEPS)]
    pub y_steps: usize,
    /// Lower end of the level grid; defaults to the padded diagram range.
    #[arg(long, requires = "y_max")]
    pub y_min: Option<f64>,
    #[arg(long, requires = "y_min")]
    pub y_max: Option<f64>,
}

impl YGridArgs {
    fn resolve<'a>(
        &self,
        diagrams: impl IntoIterator<Item = &'a PersistenceDiagram>,
    ) -> CliResult<YGrid> {
        Ok(match (self.y_min, self.y_max) {
            (Some(lo), Some(hi)) => YGrid::new(lo, hi, self.y_steps)?,
            _ => YGrid::covering(diagrams, self.y_steps)?,
        })
    }
}

#[derive(Debug, Args)]
pub struct LandscapeArgs {
    /// Diagram JSON (single artifact or array).
    pub input: PathBuf,
    /// Which diagram to use when the file holds several.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long = "K", default_value_t = flamelets_core::landscape::DEFAULT_LEVELS)]
    pub levels: usize,
    #[command(flatten)]
    pub ygrid: YGridArgs,
}

#[derive(Debug, Args)]
pub struct SilhouetteArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Weight exponent on persistence.
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[command(flatten)]
    pub ygrid: YGridArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub h_min: Option<f64>,
    #[arg(long)]
    pub h_max: Option<f64>,
    #[arg(long, default_value_t = 32)]
    pub h_steps: usize,
    #[arg(long, value_enum, default_value_t = SpacingArg::Log)]
    pub h_spacing: SpacingArg,
    /// KDE grid nodes per axis (default 512 in 1D, 128 in 2D).
    #[arg(long)]
    pub grid_steps: Option<usize>,
    /// Worker threads for the sweep.
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl SweepArgs {
    fn config(&self, dims: Vec<usize>, k: usize, y_steps: usize) -> CliResult<SweepConfig<f64>> {
        let (Some(h_min), Some(h_max)) = (self.h_min, self.h_max) else {
            return Err(CliError::Usage(
                "bandwidth sweeps need --h-min and --h-max".into(),
            ));
        };
        let spacing = match self.h_spacing {
            SpacingArg::Lin => Spacing::Linear,
            SpacingArg::Log => Spacing::Logarithmic,
        };
        let mut config = SweepConfig::new(
            BandwidthRange::new(h_min, h_max, self.h_steps, spacing)?,
            dims,
        );
        config.grid_steps = self.grid_steps;
        config.jobs = self.jobs;
        config.k = k;
        config.y_steps = y_steps;
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct FlameletOutputArgs {
    #[arg(long, value_parser = parse_dims, default_value = "0+1")]
    pub dims: Dims,
    #[arg(long = "K", default_value_t = flamelets_core::landscape::DEFAULT_LEVELS)]
    pub levels: usize,
    /// Pass --y-min/--y-max to make flamelets from different runs comparable.
    #[command(flatten)]
    pub ygrid: YGridArgs,
    /// Also write the underlying vineyards here.
    #[arg(long)]
    pub vineyard_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FlameletArgs {
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub mode: FlameletMode,
    #[command(flatten)]
    pub output: FlameletOutputArgs,
    /// Rips edge cutoff (time mode).
    #[arg(long, default_value_t = f64::INFINITY)]
    pub max_radius: f64,
    /// Map frame times affinely onto [0, 1] (time mode).
    #[arg(long)]
    pub rescale_time: bool,
    #[command(flatten)]
    pub sweep: SweepArgs,
}

#[derive(Debug, Args)]
pub struct SweepCommand {
    /// Point CSV (1D or 2D).
    pub input: PathBuf,
    #[command(flatten)]
    pub output: FlameletOutputArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    /// Flamelet JSON (`.json`) or point CSV to sweep.
    pub input: PathBuf,
    #[arg(long)]
    pub dim: usize,
    /// Landscape level; defaults to 2 for dimension 0 and 1 otherwise.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum, default_value_t = CriterionArg::Sup)]
    pub criterion: CriterionArg,
    #[arg(long, default_value_t = flamelets_core::landscape::DEFAULT_GRID_STEPS)]
    pub y_steps: usize,
    #[command(flatten)]
    pub sweep: SweepArgs,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    #[arg(long, value_enum)]
    pub metric: DistanceMetric,
    pub a: PathBuf,
    pub b: PathBuf,
    /// Which artifact to compare when a file holds several dimensions.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Map frame times onto [0, 1] (integrated-hausdorff).
    #[arg(long)]
    pub rescale_time: bool,
}

#[derive(Debug, Args)]
pub struct KdeArgs {
    /// Point CSV (1D or 2D).
    pub input: PathBuf,
    /// Bandwidth; defaults to the extended Silverman rule.
    #[arg(long)]
    pub h: Option<f64>,
    /// Use the conventional Silverman rule when --h is absent.
    #[arg(long, conflicts_with = "h")]
    pub classic: bool,
    #[arg(long)]
    pub grid_steps: Option<usize>,
    /// Grid padding around the sample; defaults to 3h.
    #[arg(long)]
    pub pad: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    #[arg(value_enum)]
    pub kind: FixtureKind,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Coordinate noise (circle and dynamic).
    #[arg(long, default_value_t = 0.02)]
    pub noise: f64,
    /// Frame count (dynamic).
    #[arg(long, default_value_t = 8)]
    pub frames: usize,
}

/// Power-weighted silhouette sampled on a level grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SilhouetteArtifact {
    pub dim: usize,
    pub p: f64,
    pub grid: YGrid,
    pub values: Vec<f64>,
}

/// Selected bandwidth together with the flamelet it was read from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionArtifact {
    pub dim: usize,
    pub h: f64,
    pub index: usize,
    pub peak: f64,
    pub k: usize,
    pub criterion: SelectionCriterion,
}

impl SelectionArtifact {
    fn new(dim: usize, s: BandwidthSelection<f64>) -> Self {
        Self {
            dim,
            h: s.sigma,
            index: s.index,
            peak: s.peak,
            k: s.k,
            criterion: s.criterion,
        }
    }
}

/// Runs a parsed command; text artifacts go to `--out` or `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> CliResult<()> {
    let text = render(&cli.command)?;
    match &cli.out {
        Some(path) => write_file(path, &text),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn render(command: &Command) -> CliResult<String> {
    Ok(match command {
        Command::Diagram(args) => json_many(&diagrams(args)?)?,
        Command::Landscape(args) => {
            let d = pick(
                read_artifacts::<PersistenceDiagram>(&args.input)?,
                args.dim,
                &args.input,
                PersistenceDiagram::dim,
            )?;
            let grid = args.ygrid.resolve([&d])?;
            json_one(&landscape(&d, &grid, args.levels)?)?
        }
        Command::Silhouette(args) => {
            let d = pick(
                read_artifacts::<PersistenceDiagram>(&args.input)?,
                args.dim,
                &args.input,
                PersistenceDiagram::dim,
            )?;
            let grid = args.ygrid.resolve([&d])?;
            json_one(&SilhouetteArtifact {
                dim: d.dim(),
                p: args.p,
                values: silhouette(&d, &grid, args.p)?,
                grid,
            })?
        }
        Command::Flamelet(args) => match args.mode {
            FlameletMode::Time => {
                let cloud = read_dynamic(&args.input, args.rescale_time)?;
                let vineyards =
                    dynamic::rips_vineyards(&cloud, &args.output.dims.0, args.max_radius)?;
                flamelets_from(vineyards.into_values().collect(), &args.output)?
            }
            FlameletMode::Bandwidth => sweep(&args.input, &args.output, &args.sweep)?,
        },
        Command::Sweep(args) => sweep(&args.input, &args.output, &args.sweep)?,
        Command::SelectBandwidth(args) => json_one(&select(args)?)?,
        Command::Distance(args) => format!("{}\n", distance(args)?),
        Command::Kde(args) => json_one(&kde(args)?)?,
        Command::Project(args) => {
            let f = pick(
                read_artifacts::<Flamelet>(&args.input)?,
                args.dim,
                &args.input,
                Flamelet::dim,
            )?;
            projection_matrix(&f, args.k)?.to_csv()
        }
        Command::Fixtures(args) => fixture_csv(args)?,
    })
}

fn diagrams(args: &DiagramArgs) -> CliResult<Vec<PersistenceDiagram>> {
    let max_dim = args.dims.0.iter().max().map_or(1, |&d| d + 1);
    let complex = if is_json(&args.input) {
        let f = pick(
            read_artifacts::<GridFunction>(&args.input)?,
            None,
            &args.input,
            |_| 0,
        )?;
        match args.filtration {
            FiltrationKind::Sub => sublevel_grid_filtration(&f, max_dim)?,
            FiltrationKind::Super => superlevel_grid_filtration(&f, max_dim)?,
        }
    } else {
        rips_filtration(&read_points(&args.input)?, max_dim, args.max_radius)?
    };
    Ok(compute_persistence(&complex, &args.dims.0)?
        .into_values()
        .collect())
}

fn sweep(input: &Path, output: &FlameletOutputArgs, sweep: &SweepArgs) -> CliResult<String> {
    let sample = read_points(input)?;
    let config = sweep.config(output.dims.0.clone(), output.levels, output.ygrid.y_steps)?;
    flamelets_from(
        bandwidth_vineyards(&sample, &config)?
            .into_values()
            .collect(),
        output,
    )
}

fn flamelets_from(vineyards: Vec<Vineyard>, output: &FlameletOutputArgs) -> CliResult<String> {
    if let Some(path) = &output.vineyard_out {
        write_file(path, &json_many(&vineyards)?)?;
    }
    let flamelets = vineyards
        .iter()
        .map(|v| {
            Ok(build_flamelet(
                v,
                &output.ygrid.resolve(v.diagrams())?,
                output.levels,
            )?)
        })
        .collect::<CliResult<Vec<_>>>()?;
    json_many(&flamelets)
}

fn select(args: &SelectArgs) -> CliResult<SelectionArtifact> {
    let k = args.k.unwrap_or(if args.dim == 0 { 2 } else { 1 });
    let criterion = match args.criterion {
        CriterionArg::Sup => SelectionCriterion::Sup,
        CriterionArg::Mass => SelectionCriterion::Mass,
    };
    let flamelet = if is_json(&args.input) {
        pick(
            read_artifacts::<Flamelet>(&args.input)?,
            Some(args.dim),
            &args.input,
            Flamelet::dim,
        )?
    } else {
        let sample = read_points(&args.input)?;
        let config = args.sweep.config(vec![args.dim], k, args.y_steps)?;
        let mut sweep = flamelets_core::bandwidth_sweep(&sample, &config)?;
        sweep.remove(&args.dim).expect("requested dimension swept")
    };
    Ok(SelectionArtifact::new(
        args.dim,
        select_bandwidth_ta_with(&flamelet, k, criterion)?,
    ))
}

fn distance(args: &DistanceArgs) -> CliResult<f64> {
    let (a, b) = (&args.a, &args.b);
    Ok(match args.metric {
        DistanceMetric::Bottleneck => {
            let load = |p: &Path| {
                pick(
                    read_artifacts::<PersistenceDiagram>(p)?,
                    args.dim,
                    p,
                    PersistenceDiagram::dim,
                )
            };
            bottleneck(&load(a)?, &load(b)?)?
        }
        DistanceMetric::Landscape => {
            let load = |p: &Path| pick(read_artifacts::<Landscape>(p)?, None, p, |_| 0);
            landscape_distance(&load(a)?, &load(b)?)?
        }
        DistanceMetric::IntegratedLandscape => {
            let load = |p: &Path| pick(read_artifacts::<Flamelet>(p)?, args.dim, p, Flamelet::dim);
            integrated_landscape_distance(&load(a)?, &load(b)?)?
        }
        DistanceMetric::IntegratedBottleneck => {
            let load = |p: &Path| pick(read_artifacts::<Vineyard>(p)?, args.dim, p, Vineyard::dim);
            integrated_bottleneck(&load(a)?, &load(b)?)?
        }
        DistanceMetric::Hausdorff => hausdorff(&read_points(a)?, &read_points(b)?)?,
        DistanceMetric::IntegratedHausdorff => integrated_hausdorff(
            &read_dynamic(a, args.rescale_time)?,
            &read_dynamic(b, args.rescale_time)?,
        )?,
    })
}

fn kde(args: &KdeArgs) -> CliResult<GridFunction> {
    let sample = read_points(&args.input)?;
    let h = match args.h {
        Some(h) => h,
        None if args.classic => silverman_classic(&sample, sample.dim())?,
        None => silverman_extended(&sample, sample.dim())?,
    };
    let steps = args.grid_steps.unwrap_or(match sample.dim() {
        1 => flamelets_core::kde::DEFAULT_KDE_STEPS_1D,
        _ => flamelets_core::kde::DEFAULT_KDE_STEPS_2D,
    });
    let grid = GridSpec::covering(&sample, args.pad.unwrap_or(3.0 * h), steps)?;
    Ok(kde_evaluate(&KdeModel::new(sample, h)?, &grid)?)
}

fn fixture_csv(args: &FixtureArgs) -> CliResult<String> {
    let mut out = String::new();
    match args.kind {
        FixtureKind::Circle => {
            out.push_str("x,y\n");
            push_rows(
                &mut out,
                None,
                &fixtures::noisy_circle(args.n, 1.0, args.noise, args.seed)?,
            );
        }
        FixtureKind::Mixture => {
            out.push_str("x\n");
            push_rows(
                &mut out,
                None,
                &fixtures::bimodal_mixture(args.n, args.seed)?,
            );
        }
        FixtureKind::Dynamic => {
            out.push_str("t,x,y\n");
            let cloud =
                fixtures::breathing_circle(args.frames, args.n, (1.0, 2.0), args.noise, args.seed)?;
            for frame in cloud.frames() {
                push_rows(&mut out, Some(frame.t), &frame.cloud);
            }
        }
    }
    Ok(out)
}

fn push_rows(out: &mut String, t: Option<f64>, cloud: &PointCloud) {
    for p in cloud.iter() {
        let fields: Vec<String> = t.iter().chain(p).map(|v| v.to_string()).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
}

fn is_json(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn json_one<A: Serialize>(artifact: &A) -> CliResult<String> {
    Ok(to_json(artifact)? + "\n")
}

/// A lone artifact is written bare, several as a JSON array.
fn json_many<A: Serialize>(artifacts: &[A]) -> CliResult<String> {
    match artifacts {
        [one] => json_one(one),
        many => Ok(to_json_array(many)? + "\n"),
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Reads a JSON file holding one versioned artifact or an array of them.
pub fn read_artifacts<A: DeserializeOwned>(path: &Path) -> CliResult<Vec<A>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::format(path, e.to_string()))?;
    let items = match value {
        serde_json::Value::Array(items) => items,
        single => vec![single],
    };
    if items.is_empty() {
        return Err(CliError::format(path, "no artifacts in file"));
    }
    items
        .into_iter()
        .map(|v| from_value(v).map_err(|e| CliError::format(path, e.to_string())))
        .collect()
}

fn pick<A>(
    items: Vec<A>,
    dim: Option<usize>,
    path: &Path,
    dim_of: impl Fn(&A) -> usize,
) -> CliResult<A> {
    match dim {
        Some(d) => items
            .into_iter()
            .find(|a| dim_of(a) == d)
            .ok_or_else(|| CliError::format(path, format!("no artifact for dimension {d}"))),
        None if items.len() == 1 => Ok(items.into_iter().next().expect("one item")),
        None => Err(CliError::Usage(format!(
            "{} holds {} artifacts; choose one with --dim",
            path.display(),
            items.len()
        ))),
    }
}
