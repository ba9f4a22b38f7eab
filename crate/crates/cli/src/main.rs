use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use confmeasures::io::{format_number, line_to_csv, matrix_to_csv, parse_line_csv, parse_matrix};
use confmeasures::io::{MatrixFormat, MatrixOptions};
use confmeasures::plot::{render_svg, PlotDocument};
use confmeasures::series::retention_grid;
use confmeasures::{
    class_proportions, discrimination_line, equivalence_classes, gt_index, make_series, report,
    ConfusionMatrix, GridConfig, Measure, MeasureKind, SeriesMode, SeriesPair, SeriesSpec,
};
use serde::Serialize;

mod failure;

use failure::{core_at, io_at, Failure};

type Outcome = Result<(), Failure>;

#[derive(Parser)]
#[command(
    name = "confmeasures",
    version,
    about = "Accuracy measures, controlled matrix series and discrimination lines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the measure catalog on one confusion matrix
    Measure(MeasureArgs),
    /// Write the x and y matrix series as a CSV bundle
    Generate(GenerateArgs),
    /// Compute a discrimination line
    Discriminate(DiscriminateArgs),
    /// Partition measures into classes that rank every series pair alike
    Equivalence(EquivalenceArgs),
    /// Draw one or more discrimination-line CSV files as SVG
    Plot(PlotArgs),
    /// Fit the quasi-independence model and report the GT index
    Gt(GtArgs),
}

#[derive(Args)]
struct MatrixInput {
    /// Confusion matrix file, estimated classes on rows
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Input format; defaults to the file extension, then csv
    #[arg(long, value_name = "csv|json")]
    format: Option<String>,
    /// Entries are instance counts
    #[arg(long)]
    counts: bool,
    /// Input has true classes on rows
    #[arg(long)]
    transpose: bool,
}

#[derive(Args)]
struct GridArgs {
    /// Number of classes
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Imbalance coefficient in [0, 1]
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    p: f64,
    /// Spacing of the retention grid
    #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
    grid_step: f64,
    /// Lowest retention value of the grid
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    c_lo: f64,
}

#[derive(Args)]
struct MeasureArgs {
    #[command(flatten)]
    matrix: MatrixInput,
    /// Report a single measure instead of the whole table
    #[arg(long, value_name = "KIND")]
    measure: Option<String>,
    /// One-based class for a class-specific measure
    #[arg(long, value_name = "I")]
    class: Option<usize>,
    /// Write the report as JSON
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeriesChoice {
    X,
    Y,
    Both,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Which series to write
    #[arg(long, value_enum, default_value = "both")]
    series: SeriesChoice,
    /// Directory receiving the bundle
    #[arg(long, value_name = "DIR")]
    output: PathBuf,
}

#[derive(Args)]
struct DiscriminateArgs {
    /// Measure kind, optionally with a class as `kind:i`
    #[arg(long, value_name = "KIND")]
    measure: String,
    /// One-based class for a class-specific measure
    #[arg(long, value_name = "I")]
    class: Option<usize>,
    #[command(flatten)]
    grid: GridArgs,
    /// Write the line CSV here instead of stdout
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Also draw the line as SVG
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct EquivalenceArgs {
    /// Comma-separated measures, e.g. `osr,ckc,tpr:1`
    #[arg(long, value_name = "LIST", default_value = "osr,ckc,spc,mre,csi")]
    kinds: String,
    /// Class applied to class-specific kinds given without one
    #[arg(long, value_name = "I")]
    class: Option<usize>,
    #[command(flatten)]
    grid: GridArgs,
    /// Write the partition JSON here instead of stdout
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Discrimination-line CSV files; labels come from the file names
    #[arg(long, value_name = "PATH", required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    #[arg(long, value_name = "PATH")]
    svg: PathBuf,
}

#[derive(Args)]
struct GtArgs {
    #[command(flatten)]
    matrix: MatrixInput,
    /// Write the fit as JSON
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(
                e.kind(),
                ErrorKind::DisplayHelp
                    | ErrorKind::DisplayVersion
                    | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            ) {
                e.exit();
            }
            return fail(Failure::from_usage(&e));
        }
    };
    let outcome = match cli.command {
        Command::Measure(a) => run_measure(a),
        Command::Generate(a) => run_generate(a),
        Command::Discriminate(a) => run_discriminate(a),
        Command::Equivalence(a) => run_equivalence(a),
        Command::Plot(a) => run_plot(a),
        Command::Gt(a) => run_gt(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => fail(f),
    }
}

fn fail(f: Failure) -> ExitCode {
    eprintln!("{}", f.to_json());
    ExitCode::from(f.exit_code)
}

fn read_text(parameter: &str, path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(io_at(parameter, path))
}

fn write_text(parameter: &str, path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(io_at(parameter, path))
}

fn print(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes());
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn load_matrix(input: &MatrixInput) -> Result<ConfusionMatrix, Failure> {
    let format = match &input.format {
        Some(f) => f.parse().map_err(core_at("--format", f))?,
        None => match input.input.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => MatrixFormat::Json,
            _ => MatrixFormat::Csv,
        },
    };
    let options = MatrixOptions {
        format,
        transpose: input.transpose,
        counts: input.counts,
        normalize: false,
    };
    let text = read_text("--input", &input.input)?;
    parse_matrix(&text, &options).map_err(core_at("--input", input.input.display()))
}

fn check_grid(g: &GridArgs) -> Result<GridConfig, Failure> {
    class_proportions(g.k, 0.0).map_err(core_at("--k", g.k))?;
    class_proportions(g.k, g.p).map_err(core_at("--p", g.p))?;
    retention_grid(g.c_lo, 1.0).map_err(core_at("--c-lo", g.c_lo))?;
    retention_grid(g.c_lo, g.grid_step).map_err(core_at("--grid-step", g.grid_step))?;
    Ok(GridConfig {
        step: g.grid_step,
        c_lo: g.c_lo,
    })
}

/// Resolves `kind` or `kind:i`, taking the class from `--class` when absent.
fn resolve_measure(
    parameter: &str,
    text: &str,
    class: Option<usize>,
    k: usize,
) -> Result<Measure, Failure> {
    let mut m: Measure = text.trim().parse().map_err(core_at(parameter, text))?;
    if m.class.is_none() && m.kind.is_class_specific() {
        match class {
            Some(0) => {
                return Err(
                    Failure::new("invalid_input", "classes are numbered from 1").at("--class", 0)
                )
            }
            Some(c) => m.class = Some(c - 1),
            None => {
                return Err(Failure::new(
                    "invalid_input",
                    format!(
                        "{} is class-specific, give --class or {}:<i>",
                        m.kind, m.kind
                    ),
                )
                .at(parameter, text))
            }
        }
    }
    m.validate(k).map_err(|e| match (class, m.class) {
        (Some(c), Some(_)) if !text.contains(':') => core_at("--class", c)(e),
        _ => core_at(parameter, text)(e),
    })?;
    Ok(m)
}

fn run_measure(a: MeasureArgs) -> Outcome {
    let m = load_matrix(&a.matrix)?;
    if let Some(text) = &a.measure {
        if let (Some(c), Ok(kind)) = (a.class, text.parse::<MeasureKind>()) {
            if !kind.is_class_specific() {
                return Err(Failure::new(
                    "invalid_input",
                    format!("{kind} is a multiclass measure and takes no class"),
                )
                .at("--class", c));
            }
        }
        let measure = resolve_measure("--measure", text, a.class, m.k())?;
        let value = measure.evaluate(&m).map_err(core_at("--measure", text))?;
        let shown = value
            .value
            .map(format_number)
            .unwrap_or_else(|| "undef".into());
        print(&format!("{measure} {shown}\n"));
        if let Some(path) = &a.output {
            write_text("--output", path, &to_json(&value))?;
        }
        return Ok(());
    }
    let r = report(&m);
    print(&r.render_table());
    if let Some(path) = &a.output {
        write_text("--output", path, &to_json(&r))?;
    }
    Ok(())
}

fn run_generate(a: GenerateArgs) -> Outcome {
    let grid = check_grid(&a.grid)?
        .points()
        .map_err(core_at("--grid-step", a.grid.grid_step))?;
    let modes: &[SeriesMode] = match a.series {
        SeriesChoice::X => &[SeriesMode::AllClasses],
        SeriesChoice::Y => &[SeriesMode::FirstClassOnly],
        SeriesChoice::Both => &[SeriesMode::AllClasses, SeriesMode::FirstClassOnly],
    };
    fs::create_dir_all(&a.output).map_err(io_at("--output", &a.output))?;
    let mut index = String::from("series,c,file\n");
    for &mode in modes {
        let spec = SeriesSpec::with_grid(a.grid.k, a.grid.p, mode, grid.clone())
            .map_err(core_at("--k", a.grid.k))?;
        let matrices = make_series(&spec).map_err(core_at("--p", a.grid.p))?;
        for (n, (m, c)) in matrices.iter().zip(&grid).enumerate() {
            let name = format!("{}_{n:04}.csv", mode.short_name());
            write_text("--output", &a.output.join(&name), &matrix_to_csv(m))?;
            index.push_str(&format!(
                "{},{},{name}\n",
                mode.short_name(),
                format_number(*c)
            ));
        }
    }
    let pi = class_proportions(a.grid.k, a.grid.p).map_err(core_at("--p", a.grid.p))?;
    let pi_line: Vec<String> = pi.as_slice().iter().map(|&v| format_number(v)).collect();
    write_text("--output", &a.output.join("index.csv"), &index)?;
    write_text(
        "--output",
        &a.output.join("proportions.csv"),
        &format!("{}\n", pi_line.join(",")),
    )?;
    print(&format!(
        "wrote {} matrices to {}\n",
        grid.len() * modes.len(),
        a.output.display()
    ));
    Ok(())
}

fn run_discriminate(a: DiscriminateArgs) -> Outcome {
    let grid = check_grid(&a.grid)?;
    let measure = resolve_measure("--measure", &a.measure, a.class, a.grid.k)?;
    let line = discrimination_line(measure, a.grid.k, a.grid.p, &grid)
        .map_err(core_at("--measure", &a.measure))?;
    let csv = line_to_csv(&line.points);
    match &a.output {
        Some(path) => write_text("--output", path, &csv)?,
        None => print(&csv),
    }
    if let Some(path) = &a.svg {
        let title = format!("{}, k = {}, p = {}", measure.label(), a.grid.k, a.grid.p);
        let doc = PlotDocument::new(title).with_line(measure.label(), line.points);
        write_text("--svg", path, &render_svg(&doc))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct EquivalenceReport {
    k: usize,
    p: f64,
    grid_step: f64,
    c_lo: f64,
    pairs: usize,
    classes: Vec<Vec<Measure>>,
    concordance: Vec<confmeasures::ConcordanceResult>,
}

fn run_equivalence(a: EquivalenceArgs) -> Outcome {
    let grid = check_grid(&a.grid)?;
    let measures = a
        .kinds
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| resolve_measure("--kinds", s, a.class, a.grid.k))
        .collect::<Result<Vec<_>, _>>()?;
    if measures.is_empty() {
        return Err(Failure::new("invalid_input", "no measures given").at("--kinds", &a.kinds));
    }
    let points = grid
        .points()
        .map_err(core_at("--grid-step", a.grid.grid_step))?;
    let pairs = SeriesPair::new(a.grid.k, a.grid.p)
        .map_err(core_at("--p", a.grid.p))?
        .all_pairs(&points);
    let eq = equivalence_classes(&measures, &pairs).map_err(core_at("--kinds", &a.kinds))?;
    let out = EquivalenceReport {
        k: a.grid.k,
        p: a.grid.p,
        grid_step: a.grid.grid_step,
        c_lo: a.grid.c_lo,
        pairs: eq.pairs,
        classes: eq.classes,
        concordance: eq.concordance,
    };
    let json = to_json(&out);
    match &a.output {
        Some(path) => {
            write_text("--output", path, &json)?;
            let groups: Vec<String> = out
                .classes
                .iter()
                .map(|c| {
                    let names: Vec<String> = c.iter().map(Measure::label).collect();
                    format!("{{{}}}", names.join(","))
                })
                .collect();
            print(&format!("{}\n", groups.join(" | ")));
        }
        None => print(&json),
    }
    Ok(())
}

fn run_plot(a: PlotArgs) -> Outcome {
    let mut labels = Vec::new();
    let mut doc = PlotDocument::new("");
    for path in &a.input {
        let text = read_text("--input", path)?;
        let points = parse_line_csv(&text).map_err(core_at("--input", path.display()))?;
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        labels.push(label.clone());
        doc = doc.with_line(label, points);
    }
    doc.title = format!("Discrimination lines: {}", labels.join(", "));
    write_text("--svg", &a.svg, &render_svg(&doc))
}

#[derive(Serialize)]
struct GtReport {
    k: usize,
    theta: Vec<Option<f64>>,
    a: Vec<f64>,
    b: Vec<f64>,
    iterations: usize,
    residual: f64,
    quasi_independent: bool,
}

fn run_gt(a: GtArgs) -> Outcome {
    let m = load_matrix(&a.matrix)?;
    let r = gt_index(&m).map_err(core_at("--input", a.matrix.input.display()))?;
    let mut text = format!("{:<8}{:>16}{:>16}{:>16}\n", "class", "a", "b", "gt");
    for i in 0..m.k() {
        let theta = r.theta[i]
            .map(format_number)
            .unwrap_or_else(|| "undef".into());
        text.push_str(&format!(
            "{:<8}{:>16}{:>16}{:>16}\n",
            i + 1,
            format_number(r.fit.a[i]),
            format_number(r.fit.b[i]),
            theta
        ));
    }
    text.push_str(&format!(
        "iterations {}, residual {:e}, quasi-independent {}\n",
        r.fit.iterations,
        r.fit.residual,
        if r.fit.quasi_independent { "yes" } else { "no" }
    ));
    print(&text);
    if let Some(path) = &a.output {
        let out = GtReport {
            k: m.k(),
            theta: r.theta,
            a: r.fit.a,
            b: r.fit.b,
            iterations: r.fit.iterations,
            residual: r.fit.residual,
            quasi_independent: r.fit.quasi_independent,
        };
        write_text("--output", path, &to_json(&out))?;
    }
    Ok(())
}
