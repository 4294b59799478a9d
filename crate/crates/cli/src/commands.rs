use crate::output::{records, write_records, Format};
use crate::problem::{load_problem, parse_number, Problem};
use crate::{CliError, OUTPUT_DIR_ENV};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use spectral_dae::problems::PRESET_NAMES;
use spectral_dae::{
    compute_projectors, empirical_order, estimate_index, preset_by_name, solve, validate_projectors, Config, Error,
    Method, Quadrature, Reference, SolveStatus,
};
use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "spectral-dae",
    version,
    about = "Solve index-1 semilinear DAEs with spectral projectors"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a problem and write the trajectory.
    Solve(SolveArgs),
    /// Estimate the convergence order over successively halved steps.
    Convergence(ConvergenceArgs),
    /// Print the projectors, validation report and index at one time.
    Projectors(ProjectorArgs),
    /// List built-in problems.
    Presets,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Preset name or path to a TOML problem file.
    #[arg(long)]
    pub problem: String,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub method: u8,
    #[arg(long)]
    pub t0: Option<f64>,
    /// Final time.
    #[arg(long = "T", alias = "t-end")]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    /// Initial guess, comma separated; made consistent before stepping.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x0: Option<Vec<String>>,
    /// Output file; defaults to a name derived from the problem inside
    /// `$SPECTRAL_DAE_OUTPUT_DIR` (or the working directory).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Record solvability diagnostics every this many steps (0 = off).
    #[arg(long, default_value_t = 0)]
    pub diag_every: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReferenceKind {
    Exact,
    Fine,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, default_value_t = 3)]
    pub n_halvings: usize,
    /// Defaults to `exact` when the problem has a known solution.
    #[arg(long, value_enum)]
    pub reference: Option<ReferenceKind>,
    /// Refinement of the fine-grid reference relative to the finest run.
    #[arg(long, default_value_t = 16)]
    pub factor: usize,
}

#[derive(Debug, Args)]
pub struct ProjectorArgs {
    #[arg(long)]
    pub problem: String,
    #[arg(long)]
    pub t: Option<f64>,
}

pub fn run(cli: Cli, out: &mut impl Write) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(a) => cmd_solve(&a, out),
        Command::Convergence(a) => cmd_convergence(&a, out),
        Command::Projectors(a) => cmd_projectors(&a, out),
        Command::Presets => {
            for name in PRESET_NAMES {
                let p = preset_by_name::<f64>(name).expect("listed preset");
                writeln!(out, "{name:24} {}", p.description)?;
            }
            Ok(())
        }
    }
}

struct Prepared {
    problem: Problem,
    config: Config,
}

fn prepare(a: &RunArgs) -> Result<Prepared, CliError> {
    let mut problem = load_problem(&a.problem)?;
    let t0 = a.t0.unwrap_or(problem.t0);
    let t_end = a.t_end.unwrap_or(problem.t_end);
    let h = a.h.unwrap_or(problem.h);
    if !(t_end > t0) {
        return Err(CliError::Usage(format!("final time {t_end} must exceed t0 = {t0}")));
    }
    if !(h > 0.0) {
        return Err(CliError::Usage(format!("step {h} must be positive")));
    }
    if let Some(x0) = &a.x0 {
        let v = x0
            .iter()
            .map(|s| parse_number(s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(CliError::Usage)?;
        if v.len() != problem.dae.dim() {
            return Err(CliError::Usage(format!(
                "x0 has {} entries, expected {}",
                v.len(),
                problem.dae.dim()
            )));
        }
        problem.x0 = DVector::from_vec(v);
    }
    if t0 != problem.t0 {
        problem.exact = None;
        problem.t0 = t0;
    }
    let method = if a.method == 1 {
        Method::Method1
    } else {
        Method::Method2
    };
    let config = Config::new(method, t0, t_end, h)?;
    Ok(Prepared { problem, config })
}

fn file_stem(problem: &str) -> String {
    problem
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

fn output_path(explicit: &Option<PathBuf>, default_name: String) -> PathBuf {
    explicit.clone().unwrap_or_else(|| {
        let dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from).unwrap_or_default();
        dir.join(default_name)
    })
}

fn create(path: &PathBuf) -> Result<File, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(File::create(path)?)
}

pub fn cmd_solve(a: &SolveArgs, out: &mut impl Write) -> Result<(), CliError> {
    let Prepared { problem, mut config } = prepare(&a.run)?;
    config.diag_every = a.diag_every;
    let path = output_path(
        &a.run.output,
        format!(
            "{}-m{}.{}",
            file_stem(&problem.name),
            a.run.method,
            a.format.extension()
        ),
    );
    let traj = solve(&problem.dae, &problem.x0, &config)?;
    write_records(create(&path)?, &records(&traj), a.format)?;

    let steps = traj.states.len().saturating_sub(1);
    writeln!(out, "problem       {}", problem.name)?;
    writeln!(out, "method        {}", a.run.method)?;
    writeln!(out, "h             {:e}", config.h())?;
    writeln!(out, "steps         {steps} of {}", config.steps)?;
    writeln!(out, "max residual  {:e}", traj.max_residual())?;
    if let Some(worst) = traj.diagnostics.iter().map(|d| d.phi_condition).reduce(f64::max) {
        writeln!(out, "max cond(Phi) {worst:e} over {} checks", traj.diagnostics.len())?;
    }
    writeln!(out, "output        {}", path.display())?;
    match traj.status {
        SolveStatus::Completed => {
            writeln!(out, "status        completed")?;
            Ok(())
        }
        SolveStatus::FailedAtStep { step, reason } => {
            writeln!(out, "status        failed at step {step}")?;
            Err(CliError::FailedAtStep { step, reason })
        }
    }
}

pub fn cmd_convergence(a: &ConvergenceArgs, out: &mut impl Write) -> Result<(), CliError> {
    if a.n_halvings < 2 {
        return Err(CliError::Usage("convergence needs --n-halvings of at least 2".into()));
    }
    if a.factor < 2 {
        return Err(CliError::Usage("--factor must be at least 2".into()));
    }
    let Prepared { problem, config } = prepare(&a.run)?;
    let kind = a.reference.unwrap_or(if problem.exact.is_some() {
        ReferenceKind::Exact
    } else {
        ReferenceKind::Fine
    });
    let report = match kind {
        ReferenceKind::Exact => {
            let exact = problem
                .exact
                .as_ref()
                .ok_or_else(|| CliError::Usage(format!("problem '{}' has no exact solution", problem.name)))?;
            empirical_order(
                &problem.dae,
                &problem.x0,
                &config,
                a.n_halvings,
                Reference::Exact(&**exact),
            )?
        }
        ReferenceKind::Fine => empirical_order(
            &problem.dae,
            &problem.x0,
            &config,
            a.n_halvings,
            Reference::FineGrid { factor: a.factor },
        )?,
    };
    let path = output_path(
        &a.run.output,
        format!("{}-m{}-order.json", file_stem(&problem.name), a.run.method),
    );
    let mut f = create(&path)?;
    serde_json::to_writer_pretty(&mut f, &report).map_err(|e| CliError::Io(e.into()))?;
    writeln!(f)?;

    writeln!(
        out,
        "problem {} method {} reference {:?}",
        problem.name, a.run.method, kind
    )?;
    writeln!(out, "{:>12} {:>12} {:>8}", "h", "error", "order")?;
    for (i, (h, e)) in report.step_sizes.iter().zip(&report.errors).enumerate() {
        let pair = if i == 0 {
            String::from("-")
        } else {
            format!("{:.3}", report.pairwise_orders[i - 1])
        };
        writeln!(out, "{h:>12.4e} {e:>12.4e} {pair:>8}")?;
    }
    let note = if report.excluded_coarsest {
        " (coarsest excluded)"
    } else {
        ""
    };
    writeln!(out, "fitted order {:.3}{note}", report.fitted_order)?;
    writeln!(out, "report {}", path.display())?;
    Ok(())
}

fn print_matrix(out: &mut impl Write, name: &str, m: &DMatrix<f64>) -> std::io::Result<()> {
    writeln!(out, "{name}")?;
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>24.16e}")).collect();
        writeln!(out, "{}", cells.join(""))?;
    }
    Ok(())
}

pub fn cmd_projectors(a: &ProjectorArgs, out: &mut impl Write) -> Result<(), CliError> {
    let problem = load_problem(&a.problem)?;
    let t = a.t.unwrap_or(problem.t0);
    let pencil = &problem.dae.pencil;
    let index = estimate_index(pencil, t)?;
    if index > 1 {
        return Err(CliError::Numerical(Error::IndexTooHigh { t, index }));
    }
    let ps = compute_projectors(pencil, t, &Quadrature::default())?;
    let report = validate_projectors(&ps, pencil);
    writeln!(out, "problem {} at t = {t}", problem.name)?;
    writeln!(out, "index {index}")?;
    writeln!(out, "contour radius {:e}, {} nodes", ps.radius, ps.nodes)?;
    for (name, m) in [
        ("P1", &ps.p1),
        ("P2", &ps.p2),
        ("Q1", &ps.q1),
        ("Q2", &ps.q2),
        ("G", &ps.g),
        ("G^-1", &ps.g_inv),
    ] {
        print_matrix(out, name, m)?;
    }
    writeln!(out, "validation")?;
    let json = serde_json::to_value(&report).map_err(|e| CliError::Io(e.into()))?;
    if let serde_json::Value::Object(fields) = json {
        for (k, v) in fields {
            writeln!(out, "  {k:16} {v}")?;
        }
    }
    writeln!(out, "  {:16} {:e}", "max_violation", report.max_violation())?;
    Ok(())
}
