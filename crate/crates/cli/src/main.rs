use std::process::ExitCode;

use clap::builder::PossibleValuesParser;
use clap::{Args, Parser, Subcommand, ValueEnum};

use nct_cli::commands;
use nct_cli::report::Report;
use nct_cli::suites::{self, Config, NAMES};
use nct_core::parametrix::Half;

/// Scalar curvature of the noncommutative two-torus: symbolic pipeline and
/// numerical checks.
#[derive(Parser)]
#[command(name = "nct", version)]
struct Cli {
    /// Emit the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Decimal digits for function evaluation.
    #[arg(long, global = true, default_value_t = 33)]
    precision: usize,
    /// Circle grid size of the torus model (power of two).
    #[arg(long, global = true, default_value_t = 1024)]
    grid: usize,
    /// Include wall-clock timings (reports are then no longer reproducible).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum HalfArg {
    Functions,
    Forms,
}

impl From<HalfArg> for Half {
    fn from(h: HalfArg) -> Half {
        match h {
            HalfArg::Functions => Half::Functions,
            HalfArg::Forms => Half::Forms,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum IntegrateStage {
    Angular,
    Radial,
    Grouped,
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Coefficients,
    Closedforms,
}

#[derive(Args)]
struct Grading {
    /// Chiral (graded) curvature.
    #[arg(long, conflicts_with = "ungraded")]
    graded: bool,
    /// Ordinary curvature (default).
    #[arg(long)]
    ungraded: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Symbols of the two operators and the leading symbol.
    Symbols {
        #[arg(long, value_enum)]
        half: Option<HalfArg>,
    },
    /// Parametrix terms b0, b1, b2.
    Parametrix {
        #[arg(long, value_enum, default_value = "functions")]
        half: HalfArg,
        /// Terms to print: b0, b1, b2 or all.
        #[arg(long, value_delimiter = ',', default_value = "all")]
        show: Vec<String>,
        /// Check the composition residual order by order.
        #[arg(long)]
        verify: bool,
        /// Compare b2 with the transcribed reference terms.
        #[arg(long)]
        spot_check: bool,
    },
    /// One stage of the ξ-integration.
    Integrate {
        #[arg(long, value_enum, default_value = "functions")]
        half: HalfArg,
        #[arg(long, value_enum, default_value = "grouped")]
        stage: IntegrateStage,
    },
    /// The curvature in the log basis.
    Curvature {
        #[command(flatten)]
        grading: Grading,
        #[arg(long, value_enum, default_value = "coefficients")]
        emit: Emit,
    },
    /// The table of modular functions.
    Modfun {
        /// List every registered function.
        #[arg(long)]
        list: bool,
        /// Evaluate a function at `--at a,b` (its own variables).
        #[arg(long)]
        eval: Option<String>,
        #[arg(long, value_delimiter = ',', num_args = 1..=2, allow_hyphen_values = true)]
        at: Vec<f64>,
        /// Check definitions and all closed forms for exact equality.
        #[arg(long)]
        verify: bool,
        /// Values of a function on a small (s, t) grid.
        #[arg(long)]
        table: Option<String>,
    },
    /// Run verification suites.
    Verify {
        /// Suites by name or number, or `all`.
        #[arg(long, value_delimiter = ',', default_value = "all", value_parser = suite_arg)]
        suite: Vec<u8>,
    },
    /// Run the pipeline of one half up to a stage.
    Pipeline {
        #[arg(long, value_enum, default_value = "functions")]
        half: HalfArg,
        /// Last stage: symbols, parametrix, angular, radial, grouped, logbasis, curvature.
        #[arg(long, default_value = "grouped", value_parser = PossibleValuesParser::new(commands::STAGES))]
        through: String,
        /// Compare b2 with the transcribed reference terms.
        #[arg(long)]
        spot_check: bool,
        #[command(flatten)]
        grading: Grading,
    },
}

/// A suite name or number; `all` becomes 0.
fn suite_arg(n: &str) -> Result<u8, String> {
    if n == "all" {
        return Ok(0);
    }
    if let Ok(i) = n.parse::<u8>() {
        if i == 0 || i as usize > NAMES.len() {
            return Err(format!("no suite {} (1 to {})", i, NAMES.len()));
        }
        return Ok(i);
    }
    suites::index_of(n).ok_or_else(|| format!("known suites: {}", NAMES.join(", ")))
}

fn expand_suites(picked: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    for &i in picked {
        if i == 0 {
            out.extend(1..=NAMES.len() as u8);
        } else {
            out.push(i);
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    out.retain(|i| seen.insert(*i));
    out
}

fn run(cli: &Cli) -> Result<Report, String> {
    let cfg = Config {
        seed: cli.seed,
        grid: cli.grid,
        precision: cli.precision,
    };
    let mut r = Report::new(command_name(&cli.cmd), cli.seed);
    r.param("grid", cli.grid);
    r.param("precision", cli.precision);
    match &cli.cmd {
        Cmd::Symbols { half } => {
            let halves: Vec<Half> = match half {
                Some(h) => vec![(*h).into()],
                None => vec![Half::Functions, Half::Forms],
            };
            commands::symbols(&mut r, &halves);
        }
        Cmd::Parametrix {
            half,
            show,
            verify,
            spot_check,
        } => {
            let half = (*half).into();
            commands::parametrix_stage(&mut r, half, show);
            if *verify {
                commands::parametrix_residuals(&mut r, half);
            }
            if *spot_check {
                commands::spot_check(&mut r, half)?;
            }
        }
        Cmd::Integrate { half, stage } => {
            let s = match stage {
                IntegrateStage::Angular => "angular",
                IntegrateStage::Radial => "radial",
                IntegrateStage::Grouped => "grouped",
            };
            r.param("stage", s);
            commands::integration_stage(&mut r, (*half).into(), s, false)?;
        }
        Cmd::Curvature { grading, emit } => {
            r.param("graded", grading.graded);
            match emit {
                Emit::Coefficients => commands::integration_stage(
                    &mut r,
                    Half::Functions,
                    "curvature",
                    grading.graded,
                )?,
                Emit::Closedforms => commands::curvature_closed_forms(&mut r, grading.graded)?,
            }
        }
        Cmd::Modfun {
            list,
            eval,
            at,
            verify,
            table,
        } => {
            if *list || (eval.is_none() && !*verify && table.is_none()) {
                commands::modfun_list(&mut r);
            }
            if let Some(name) = eval {
                let a = *at.first().ok_or("--eval needs --at a[,b]")?;
                let b = at.get(1).copied().unwrap_or(0.0);
                commands::modfun_eval(&mut r, name, a, b, cli.precision)?;
            }
            if let Some(name) = table {
                commands::modfun_table(&mut r, name, cli.precision)?;
            }
            if *verify {
                commands::modfun_verify(&mut r)?;
            }
        }
        Cmd::Verify { suite } => {
            let idx = expand_suites(suite);
            r.param(
                "suites",
                idx.iter()
                    .map(|i| NAMES[*i as usize - 1])
                    .collect::<Vec<_>>()
                    .join(","),
            );
            commands::verify(&mut r, &idx, &cfg, cli.timing);
        }
        Cmd::Pipeline {
            half,
            through,
            spot_check,
            grading,
        } => {
            r.param("half", Half::from(*half).name());
            r.param("through", through);
            commands::pipeline(
                &mut r,
                (*half).into(),
                through,
                *spot_check,
                grading.graded,
                cli.timing,
            )?;
        }
    }
    Ok(r)
}

fn command_name(c: &Cmd) -> &'static str {
    match c {
        Cmd::Symbols { .. } => "symbols",
        Cmd::Parametrix { .. } => "parametrix",
        Cmd::Integrate { .. } => "integrate",
        Cmd::Curvature { .. } => "curvature",
        Cmd::Modfun { .. } => "modfun",
        Cmd::Verify { .. } => "verify",
        Cmd::Pipeline { .. } => "pipeline",
    }
}

const EXIT_USAGE: u8 = 64;
const EXIT_FAILURE: u8 = 70;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(r) => {
            if cli.json {
                println!("{}", r.to_json());
            } else {
                print!("{}", r.to_text());
            }
            ExitCode::from(r.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("nct: {}", e);
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
