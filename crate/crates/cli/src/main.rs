use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use curveseg::export::{export, regions_json, regions_png, response_pgm};
use curveseg::filtering::respond_with;
use curveseg::pipeline::{support_regions, Count, MultiSelect};
use curveseg::regions::Polarity;
use curveseg::{run_with, Error, Execution, GrayImage, OutputFormat, PipelineConfig};

#[derive(Parser)]
#[command(name = "curveseg", version, about = "Extract parametric curve segments from grayscale images")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract curve segments from an image, or from every image in a directory.
    Extract(ExtractArgs),
    /// Dump the LoG response as 8-bit PGM plus a min/max sidecar.
    DebugResponse(DebugResponseArgs),
    /// Dump the labeled support regions as a palette PNG plus a JSON summary.
    DebugRegions(DebugRegionsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PolarityArg {
    #[value(alias = "positive")]
    Pos,
    #[value(alias = "negative")]
    Neg,
    Both,
}

impl From<PolarityArg> for Polarity {
    fn from(p: PolarityArg) -> Self {
        match p {
            PolarityArg::Pos => Polarity::Positive,
            PolarityArg::Neg => Polarity::Negative,
            PolarityArg::Both => Polarity::Both,
        }
    }
}

#[derive(Args)]
struct RegionArgs {
    /// LoG scale in pixels.
    #[arg(long, default_value_t = 2.0)]
    sigma: f64,
    /// Threshold as a fraction of the peak response, in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Smallest support region kept, in pixels.
    #[arg(long, default_value_t = 10)]
    min_area: usize,
    /// Response sign that forms support regions.
    #[arg(long, value_enum, default_value = "pos")]
    polarity: PolarityArg,
    /// Run every stage on the calling thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct ExtractArgs {
    /// Image file (PGM or PNG) or a directory of them.
    input: PathBuf,
    #[command(flatten)]
    regions: RegionArgs,
    /// Fourier harmonics per boundary: a number or "auto".
    #[arg(long, default_value = "auto")]
    harmonics: Count,
    /// Curvature samples per boundary.
    #[arg(long, default_value_t = 256)]
    samples: usize,
    /// Points per output segment: a number or "auto".
    #[arg(long, default_value = "auto")]
    points: Count,
    /// Splitting rule when a boundary has more than two curvature extrema.
    #[arg(long, default_value = "auto")]
    multi: MultiSelect,
    /// json, svg or csv; defaults to the --out extension, else json.
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Output file, or output directory in directory mode. Stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Embed the source image in SVG output.
    #[arg(long)]
    embed_image: bool,
}

#[derive(Args)]
struct DebugResponseArgs {
    input: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    sigma: f64,
    /// PGM output; the sidecar goes next to it with a .txt extension.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct DebugRegionsArgs {
    input: PathBuf,
    #[command(flatten)]
    regions: RegionArgs,
    /// PNG output; the summary goes next to it with a .json extension.
    #[arg(long)]
    out: PathBuf,
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

/// 2 for bad input, 3 when the image yields nothing.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NoSignal(_) | Error::NoRegions(_) => 3,
        _ => 2,
    }
}

fn region_config(a: &RegionArgs) -> PipelineConfig {
    PipelineConfig {
        sigma: a.sigma,
        tau_frac: a.threshold,
        min_area: a.min_area,
        polarity: a.polarity.into(),
        ..Default::default()
    }
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "pgm" | "png"))
}

fn extract_one(input: &Path, config: &PipelineConfig, args: &ExtractArgs) -> curveseg::Result<Vec<u8>> {
    let image = GrayImage::load(input)?;
    let set =
        run_with(&image, config, execution(args.regions.sequential))?.with_path(input.to_string_lossy());
    export(&set, config.format, args.embed_image.then_some(&image))
}

fn extract(args: &ExtractArgs) -> Result<(), u8> {
    let format = args
        .format
        .or_else(|| {
            let ext = args.out.as_ref()?.extension()?.to_str()?;
            ext.parse().ok()
        })
        .unwrap_or_default();
    let config = PipelineConfig {
        harmonics: args.harmonics,
        samples: args.samples,
        segment_points: args.points,
        multi_mode: args.multi,
        format,
        ..region_config(&args.regions)
    };
    config.validate().map_err(|e| report(&args.input, &e))?;

    if !args.input.is_dir() {
        let bytes = extract_one(&args.input, &config, args).map_err(|e| report(&args.input, &e))?;
        return write_output(args.out.as_deref(), &bytes).map_err(|e| report(&args.input, &e.into()));
    }

    let Some(out_dir) = &args.out else {
        eprintln!("error: directory input needs --out DIR");
        return Err(2);
    };
    fs::create_dir_all(out_dir).map_err(|e| report(out_dir, &e.into()))?;
    let mut inputs: Vec<PathBuf> = fs::read_dir(&args.input)
        .map_err(|e| report(&args.input, &e.into()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_image(p))
        .collect();
    inputs.sort();
    let mut worst = 0;
    for input in &inputs {
        let target = out_dir.join(input.file_stem().unwrap_or_default()).with_extension(format.extension());
        let result = extract_one(input, &config, args).and_then(|b| Ok(fs::write(&target, b)?));
        if let Err(e) = result {
            let code = report(input, &e);
            // input errors outrank empty results
            worst = if worst == 2 || code == 2 { 2 } else { code };
        }
    }
    if worst == 0 {
        Ok(())
    } else {
        Err(worst)
    }
}

fn report(path: &Path, e: &Error) -> u8 {
    eprintln!("error: {}: {e}", path.display());
    exit_code(e)
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, bytes),
        None => io::stdout().lock().write_all(bytes),
    }
}

fn debug_response(args: &DebugResponseArgs) -> Result<(), u8> {
    let run = || -> curveseg::Result<()> {
        let image = GrayImage::load(&args.input)?;
        let resp = respond_with(&image, args.sigma, execution(args.sequential))?;
        let (pgm, sidecar) = response_pgm(&resp);
        fs::write(&args.out, pgm)?;
        fs::write(args.out.with_extension("txt"), sidecar)?;
        Ok(())
    };
    run().map_err(|e| report(&args.input, &e))
}

fn debug_regions(args: &DebugRegionsArgs) -> Result<(), u8> {
    let run = || -> curveseg::Result<()> {
        let image = GrayImage::load(&args.input)?;
        let stages =
            support_regions(&image, &region_config(&args.regions), execution(args.regions.sequential))?;
        fs::write(&args.out, regions_png(image.width(), image.height(), &stages.regions)?)?;
        fs::write(args.out.with_extension("json"), regions_json(&stages.regions)?)?;
        Ok(())
    };
    run().map_err(|e| report(&args.input, &e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match &cli.command {
        Command::Extract(a) => extract(a),
        Command::DebugResponse(a) => debug_response(a),
        Command::DebugRegions(a) => debug_regions(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}
