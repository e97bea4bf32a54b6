use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tanno_biharmonic::curve::ClosedFormCurve;
use tanno_biharmonic::export::{sample_curve, sample_cylinder, sample_map, structure_meta, CylinderDomain};
use tanno_biharmonic::generators::{
    cartan_vranceanu, cylinder_geodesic, hopf_cylinder, legendre_biharmonic_curve, geodesic_tension_norms, CvParams,
    LegendreFrame,
};
use tanno_biharmonic::sasakian::TannoStructure;
use tanno_biharmonic::verify::{run_verification, VerifyConfig};
use tanno_biharmonic::{Error, Result};

#[derive(Parser)]
#[command(name = "tanno", version, about = "Biharmonic Legendre curves and Hopf cylinders in the deformed 3-sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the proper-biharmonic Legendre curve.
    Curve(CurveArgs),
    /// Sample the Hopf cylinder over one period cell, optionally as an OBJ mesh.
    Cylinder(CylinderArgs),
    /// Sample a geodesic of the Hopf cylinder and print its predicted tension norms.
    Geodesic(GeodesicArgs),
    /// Cartan-Vranceanu curve samples and residual report.
    Cv(CvArgs),
    /// Run the verification suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Common {
    /// Deformation parameter, 0 < a < 1.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    a: f64,
    /// Components of e1 followed by e3.
    #[arg(long, num_args = 1..=8, value_delimiter = ',', allow_negative_numbers = true)]
    frame: Option<Vec<f64>>,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file, or `-` for stdout.
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Obj,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Domain {
    Parallelogram,
    Strip,
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CylinderArgs {
    #[command(flatten)]
    common: Common,
    /// Vertices per side.
    #[arg(long, default_value_t = 32)]
    grid: usize,
    #[arg(long, value_enum, default_value_t = Domain::Parallelogram)]
    domain: Domain,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct GeodesicArgs {
    #[command(flatten)]
    common: Common,
    /// Reeb component of the direction.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    c1: f64,
    /// `x_u` component of the direction.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    c2: f64,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CvArgs {
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    l: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    m: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    c1: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    c2: f64,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 50)]
    samples: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol_analytic: f64,
    #[arg(long, default_value_t = 1e-3)]
    tol_oracle: f64,
    /// Also write the report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

fn bad(name: &'static str, value: f64, expected: &'static str) -> Error {
    Error::OutOfRange { name, value, expected }
}

fn structure(common: &Common) -> Result<(TannoStructure, LegendreFrame)> {
    let t = TannoStructure::new(common.a)?;
    let frame = match &common.frame {
        Some(c) => LegendreFrame::from_components(c)?,
        None => LegendreFrame::default(),
    };
    Ok((t, frame))
}

fn check_count(name: &'static str, n: usize) -> Result<()> {
    if n < 2 {
        return Err(bad(name, n as f64, "at least 2"));
    }
    Ok(())
}

fn write_output(out: &str, text: &str) -> std::result::Result<(), String> {
    if out == "-" {
        std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string())
    } else {
        fs::write(out, text).map_err(|e| format!("{out}: {e}"))
    }
}

fn samples_text(format: Format, json: String, csv: String) -> std::result::Result<String, String> {
    match format {
        Format::Json => Ok(json + "\n"),
        Format::Csv => Ok(csv),
        Format::Obj => Err("OBJ output is only available for `cylinder`".into()),
    }
}

fn curve_samples(t: &TannoStructure, frame: &LegendreFrame, curve: &ClosedFormCurve, n: usize, format: Format) -> std::result::Result<String, String> {
    let samples = sample_curve(structure_meta(t, frame), curve, n);
    samples_text(format, samples.to_json(), samples.to_csv())
}

/// Error message prefixed by the error kind, e.g. `OutOfRange: ...`.
fn describe(e: &Error) -> String {
    let debug = format!("{e:?}");
    let kind: String = debug.chars().take_while(|c| c.is_alphanumeric()).collect();
    format!("{kind}: {e}")
}

fn run(cli: Cli) -> std::result::Result<bool, String> {
    let lib = |e: Error| describe(&e);
    match cli.command {
        Command::Curve(args) => {
            let (t, frame) = structure(&args.common).map_err(lib)?;
            check_count("samples", args.samples).map_err(lib)?;
            let curve = legendre_biharmonic_curve(&t, &frame);
            let text = curve_samples(&t, &frame, &curve, args.samples, args.output.format)?;
            write_output(&args.output.out, &text)?;
        }
        Command::Cylinder(args) => {
            let (t, frame) = structure(&args.common).map_err(lib)?;
            check_count("grid", args.grid).map_err(lib)?;
            let domain = match args.domain {
                Domain::Parallelogram => CylinderDomain::Parallelogram,
                Domain::Strip => CylinderDomain::Strip,
            };
            let grid = sample_cylinder(&hopf_cylinder(&t, &frame), args.grid, domain);
            let text = match args.output.format {
                Format::Json => grid.to_json() + "\n",
                Format::Csv => grid.to_csv(),
                Format::Obj => grid.to_obj().map_err(lib)?,
            };
            write_output(&args.output.out, &text)?;
        }
        Command::Geodesic(args) => {
            let (t, frame) = structure(&args.common).map_err(lib)?;
            check_count("samples", args.samples).map_err(lib)?;
            let patch = hopf_cylinder(&t, &frame);
            let domain = (0.0, 2.0 * std::f64::consts::PI / t.slow_freq());
            let curve = cylinder_geodesic(&patch, args.c1, args.c2, [0.0, 0.0], domain).map_err(lib)?;
            let (tau, tau2) = geodesic_tension_norms(&t, args.c1, args.c2);
            eprintln!("predicted |tau| = {tau:.12e}, |tau2| = {tau2:.12e}");
            let text = curve_samples(&t, &frame, &curve, args.samples, args.output.format)?;
            write_output(&args.output.out, &text)?;
        }
        Command::Cv(args) => {
            check_count("samples", args.samples).map_err(lib)?;
            let params = CvParams::new(args.l, args.m, args.c1, args.c2).map_err(lib)?;
            let cv = cartan_vranceanu(&params).map_err(lib)?;
            eprint!("{}", cv.report.render_text());
            let meta = serde_json::json!({ "l": params.l, "m": params.m, "alpha": params.alpha, "beta": params.beta, "c1": params.c1, "c2": params.c2 });
            let curve = &cv.curve;
            let samples = sample_map::<3>(meta, (0.0, curve.period()), args.samples, |s| {
                let (p, dp) = (curve.derivative(0, s), curve.derivative(1, s));
                ([p[0], p[1], p[2]], [dp[0], dp[1], dp[2]])
            });
            let text = samples_text(args.output.format, samples.to_json(), samples.to_csv())?;
            write_output(&args.output.out, &text)?;
        }
        Command::Verify(args) => {
            let (_, frame) = structure(&args.common).map_err(lib)?;
            check_count("samples", args.samples).map_err(lib)?;
            if !(args.tol_analytic > 0.0) {
                return Err(describe(&bad("tol-analytic", args.tol_analytic, "tol > 0")));
            }
            if !(args.tol_oracle > 0.0) {
                return Err(describe(&bad("tol-oracle", args.tol_oracle, "tol > 0")));
            }
            let cfg = VerifyConfig {
                frame,
                tol_analytic: args.tol_analytic,
                tol_oracle: args.tol_oracle,
                samples: args.samples,
                ..VerifyConfig::new(args.common.a)
            };
            let report = run_verification(&cfg).map_err(lib)?;
            print!("{}", report.render_text());
            if let Some(path) = &args.json {
                fs::write(path, report.to_json() + "\n").map_err(|e| format!("{}: {e}", path.display()))?;
            }
            return Ok(report.pass);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
