mod commands;
mod scenario;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use commands::Failure;
use scenario::{ConfigError, Scenario, Settings};

/// Nonstandard finite difference schemes for a predator-prey system.
#[derive(Parser)]
#[command(name = "nsfd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate the scheme; write trajectory CSV, comparison CSV and SVG.
    Simulate(ScenarioArgs),
    /// Equilibria, continuous and discrete verdicts, conditions, Lyapunov weights.
    Analyze {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Step sizes at which the discrete verdicts are evaluated.
        #[arg(long, value_delimiter = ',', default_value = "0.1,1,10,100")]
        h_list: Vec<f64>,
    },
    /// Equilibria as CSV (kind,x,y,verdict).
    Equilibria(ScenarioArgs),
    /// Sign, global-stability and threshold conditions for the scheme weights.
    CheckScheme(ScenarioArgs),
    /// Scheme, Euler and RK4 side by side, with positivity thresholds.
    Compare(ScenarioArgs),
    /// Empirical convergence order against a fine RK4 reference.
    Order {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.025,0.0125")]
        h_list: Vec<f64>,
    },
}

#[derive(Args, Clone)]
struct ScenarioArgs {
    /// Built-in case: i, ii, iii, iv, v or vi.
    #[arg(long)]
    case: Option<String>,
    /// Config file; repeat to run several scenarios.
    #[arg(long)]
    config: Vec<PathBuf>,
    /// Worker threads when several configs are given.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, allow_negative_numbers = true)]
    h: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    t_end: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    y0: Option<f64>,
    /// Comma-separated subset of nsfd,euler,rk4.
    #[arg(long)]
    methods: Option<String>,
    /// linear or mickens.
    #[arg(long)]
    denominator: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    q: Option<f64>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    comparison_csv: Option<PathBuf>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    echo_config: bool,
}

impl ScenarioArgs {
    fn overrides(&self, s: &mut Settings) -> Result<(), ConfigError> {
        let reals = [
            ("h", self.h),
            ("t_end", self.t_end),
            ("x0", self.x0),
            ("y0", self.y0),
            ("q", self.q),
        ];
        for (k, v) in reals {
            if let Some(v) = v {
                s.set(k, v.to_string())?;
            }
        }
        if let Some(n) = self.n {
            s.set("n", n.to_string())?;
        }
        for (k, v) in [("methods", &self.methods), ("denominator", &self.denominator)] {
            if let Some(v) = v {
                s.set(k, v.clone())?;
            }
        }
        for (k, v) in [
            ("csv", &self.csv),
            ("svg", &self.svg),
            ("comparison_csv", &self.comparison_csv),
        ] {
            if let Some(v) = v {
                s.set(k, v.display().to_string())?;
            }
        }
        Ok(())
    }

    fn scenarios(&self) -> Result<Vec<Scenario>, ConfigError> {
        let base = || -> Result<Settings, ConfigError> {
            let mut s = Settings::default();
            if let Some(case) = &self.case {
                s.apply_case(case)?;
            }
            Ok(s)
        };
        let mut out = Vec::new();
        if self.config.is_empty() {
            let mut s = base()?;
            self.overrides(&mut s)?;
            out.push(s.resolve()?);
        } else {
            for path in &self.config {
                let mut s = base()?;
                s.apply_file(path)?;
                self.overrides(&mut s)?;
                out.push(s.resolve()?);
            }
        }
        let mut seen: Vec<&std::path::Path> = Vec::new();
        for sc in &out {
            for p in sc.outputs() {
                if seen.contains(&p) {
                    return Err(ConfigError::Invalid(format!(
                        "output path {} is used twice",
                        p.display()
                    )));
                }
                seen.push(p);
            }
        }
        Ok(out)
    }
}

fn run(args: &ScenarioArgs, body: impl Fn(&Scenario) -> Result<String, Failure> + Sync) -> ExitCode {
    let scenarios = match args.scenarios() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}", Failure::from(e));
            return ExitCode::from(2);
        }
    };
    if args.echo_config {
        for sc in &scenarios {
            if scenarios.len() > 1 {
                println!("# {}", sc.label);
            }
            print!("{}", sc.to_config());
        }
        return ExitCode::SUCCESS;
    }

    let results: Vec<Result<String, Failure>> = if scenarios.len() > 1 && args.jobs > 1 {
        match rayon::ThreadPoolBuilder::new().num_threads(args.jobs).build() {
            Ok(pool) => pool.install(|| scenarios.par_iter().map(&body).collect()),
            Err(e) => {
                eprintln!("error: cannot start {} workers: {e}", args.jobs);
                return ExitCode::from(2);
            }
        }
    } else {
        scenarios.iter().map(&body).collect()
    };

    let mut code = 0u8;
    for (sc, r) in scenarios.iter().zip(results) {
        match r {
            Ok(text) => print!("{text}"),
            Err(e) => {
                eprintln!("error in {}: {e}", sc.label);
                code = code.max(e.exit_code());
            }
        }
    }
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Simulate(a) => run(a, commands::simulate),
        Command::Analyze { scenario, h_list } => run(scenario, |sc| commands::analyze(sc, h_list)),
        Command::Equilibria(a) => run(a, commands::equilibria),
        Command::CheckScheme(a) => run(a, commands::check_scheme),
        Command::Compare(a) => run(a, commands::compare),
        Command::Order { scenario, h_list } => run(scenario, |sc| commands::order(sc, h_list)),
    }
}
