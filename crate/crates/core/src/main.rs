use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use blockpc::driver::{self, ProblemKind, ProblemSpec};
use blockpc::problems::Problem;
use clap::{Args, CommandFactory, Parser, Subcommand};

/// Compose block preconditioners from options and solve structured test problems.
#[derive(Parser)]
#[command(name = "blockpc", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one problem; exit 0 if converged, 2 if not, 1 on configuration errors.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[command(flatten)]
        opts: OptionArgs,
        /// Write the JSON run report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the solution vector here (MatrixMarket array).
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// Solve at several grid sizes; exit 2 if any row fails.
    Sweep {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Comma-separated grid sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[command(flatten)]
        opts: OptionArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write the JSON sweep report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write K.mtx, b.mtx, layout.json and auxiliary matrices.
    Dump {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long)]
        outdir: PathBuf,
    },
    /// Print sizes, layout, nonzeros and symmetry of dumped files; exit 1 on inconsistencies.
    Info {
        #[arg(long)]
        indir: PathBuf,
    },
}

#[derive(Args)]
struct ProblemArgs {
    /// mixed-poisson, oseen-cavity, algebraic-demo or from-files.
    #[arg(long, value_parser = |s: &str| s.parse::<ProblemKind>().map_err(|e| e.to_string()))]
    problem: ProblemKind,
    #[arg(long, default_value_t = 0.1)]
    viscosity: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory with dumped files (for from-files).
    #[arg(long)]
    indir: Option<PathBuf>,
}

impl ProblemArgs {
    fn spec(&self, n: usize) -> ProblemSpec {
        ProblemSpec {
            problem: self.problem,
            n,
            viscosity: self.viscosity,
            seed: self.seed,
            indir: self.indir.clone(),
        }
    }
}

#[derive(Args)]
struct OptionArgs {
    /// Options file (repeatable; later files win, command-line tokens win over files).
    #[arg(long = "options-file")]
    options_file: Vec<PathBuf>,
    /// Fail when an option is never read.
    #[arg(long = "strict-options")]
    strict: bool,
    /// Raw option tokens, e.g. `-- -ksp_type gmres -pc_type ilu`.
    #[arg(last = true, allow_hyphen_values = true)]
    tokens: Vec<String>,
}

fn run(cmd: Cmd) -> blockpc::Result<ExitCode> {
    let verdict = |ok: bool| if ok { ExitCode::SUCCESS } else { ExitCode::from(2) };
    match cmd {
        Cmd::Solve { problem, n, opts, report, solution } => {
            let db = driver::load_options(&opts.options_file, &opts.tokens)?;
            let (r, x) = driver::run_solve(&problem.spec(n), &db, opts.strict)?;
            print!("{}", r.summary());
            if let Some(path) = report {
                r.write(path)?;
            }
            if let Some(path) = solution {
                blockpc::sparse::mtx::write_vector(path, &x)?;
            }
            Ok(verdict(r.converged))
        }
        Cmd::Sweep { problem, n, opts, csv, report } => {
            let db = driver::load_options(&opts.options_file, &opts.tokens)?;
            let s = driver::sweep(&problem.spec(0), &n, &db, opts.strict)?;
            println!("{:>6} {:>9} {:>6} {:>10} {:>10}  reason", "n", "dofs", "its", "setup_s", "solve_s");
            for row in &s.rows {
                let its = row.iterations.map_or("-".to_string(), |i| i.to_string());
                println!(
                    "{:>6} {:>9} {:>6} {:>10.3} {:>10.3}  {}",
                    row.n, row.dofs, its, row.setup_seconds, row.solve_seconds, row.reason
                );
            }
            if let Some(path) = csv {
                s.write_csv(path)?;
            }
            if let Some(path) = report {
                s.write_json(path)?;
            }
            Ok(verdict(s.all_converged()))
        }
        Cmd::Dump { problem, n, outdir } => {
            let t = Instant::now();
            let p: Problem = problem.spec(n).build()?;
            p.dump(&outdir)?;
            println!("wrote {} dofs to {} in {:.3}s", p.dofs(), outdir.display(), t.elapsed().as_secs_f64());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Info { indir } => {
            let info = driver::info(&indir)?;
            print!("{info}");
            Ok(if info.issues.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return ExitCode::SUCCESS;
            }
            eprintln!("\n{}", Cli::command().render_usage());
            return ExitCode::from(1);
        }
    };
    match run(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
