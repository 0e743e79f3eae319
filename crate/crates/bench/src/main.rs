use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ntc_bench::generator::truth_from_instance;
use ntc_bench::report::{write_plot_data, write_summary};
use ntc_bench::stats::aggregate;
use ntc_bench::suite::{run_suite, Suite, SuiteConfig, DEFAULT_RANK};
use ntc_bench::{generate, parse_versions, read_records, write_records, GeneratorSpec};
use ntc_core::solver::{solve_with, SolveOptions};
use ntc_core::{make_variant, nmse, Instance};

#[derive(Parser)]
#[command(name = "ntc", version, about = "Nonnegative tensor completion by blended conditional gradients")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic instance file.
    Gen(GenArgs),
    /// Solve an instance file.
    Solve(SolveArgs),
    /// Run a benchmark suite and write per-run records.
    Bench(BenchArgs),
    /// Summarize benchmark records.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Comma-separated dimensions, e.g. 10,10,10.
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_RANK)]
    rank: usize,
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Observe every entry once instead of sampling n entries.
    #[arg(long)]
    enumerate: bool,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    version: u8,
    /// Ball radius, or `auto` for the instance's recorded value (else the
    /// largest observation).
    #[arg(long, default_value = "auto")]
    lambda: String,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the per-iteration trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write `oracle_<iter>.lp` for every exact oracle call into DIR.
    #[arg(long, value_name = "DIR", num_args = 0..=1, default_missing_value = ".")]
    dump_ip: Option<PathBuf>,
    #[arg(long, default_value_t = ntc_core::oracle::DEFAULT_RHO_GUARD)]
    rho_guard: usize,
    /// Write the completed values at the observed indices as CSV.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    suite: String,
    #[arg(long, default_value = "0-10")]
    versions: String,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Lift the desk-scale caps on sizes, orders and sample counts.
    #[arg(long)]
    full: bool,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_RANK)]
    rank: usize,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Parallel solves. Timings are only comparable with 1.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value_t = ntc_core::oracle::DEFAULT_RHO_GUARD)]
    rho_guard: usize,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Directory for one plot-data CSV per suite.
    #[arg(long)]
    plot_data: Option<PathBuf>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(args) => gen(args),
        Command::Solve(args) => solve(args),
        Command::Bench(args) => bench(args),
        Command::Report(args) => report(args),
    }
}

fn gen(args: GenArgs) -> Result<()> {
    let spec = GeneratorSpec {
        dims: args.dims,
        rank: args.rank,
        n: args.n,
        noise_sd: args.noise,
        seed: args.seed,
        enumerate: args.enumerate,
    };
    let generated = generate(&spec)?;
    let json = generated.to_instance(&spec).to_json();
    std::fs::write(&args.output, json)
        .with_context(|| format!("writing {}", args.output.display()))?;
    eprintln!(
        "wrote {} ({} samples, {} unique, lambda {})",
        args.output.display(),
        generated.data.n(),
        generated.data.u(),
        generated.lambda
    );
    Ok(())
}

fn solve(args: SolveArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let instance = Instance::parse(&text).with_context(|| format!("parsing {}", args.input.display()))?;
    let data = &instance.data;
    let lambda = if args.lambda == "auto" {
        match instance.lambda {
            Some(l) => l,
            None => {
                let max = data.samples().iter().map(|s| s.value).fold(0.0, f64::max);
                if max <= 0.0 {
                    bail!("no positive observation to derive lambda from; pass --lambda");
                }
                max
            }
        }
    } else {
        args.lambda
            .parse()
            .with_context(|| format!("invalid --lambda {:?}", args.lambda))?
    };
    if let Some(dir) = &args.dump_ip {
        std::fs::create_dir_all(dir)?;
    }
    let options = SolveOptions {
        trace: args.trace.is_some(),
        dump_ip_dir: args.dump_ip.clone(),
        exact_rho_guard: args.rho_guard,
        ..Default::default()
    };
    let variant = make_variant(args.version)?;
    let result = solve_with(data, lambda, args.tol, variant, args.seed, &options)?;

    println!("variant      {variant}");
    println!("termination  {:?}", result.termination);
    println!("objective    {:.6e}", result.objective);
    println!("lower bound  {:.6e}", result.lower_bound);
    println!("gap          {:.6e}", result.certified_gap());
    println!("iterations   {}", result.iterations);
    let c = &result.counts;
    println!(
        "steps        sigd {} nag {} bpcg {} oracle {} exact {}",
        c.sigd, c.nag, c.bpcg, c.oracle_calls, c.exact_ip_calls
    );
    println!("vertices     {}", result.vertices.len());
    println!("time         {:.3} s", result.wall_time.as_secs_f64());
    if let (Some(truth), Some(completed)) = (truth_from_instance(&instance)?, &result.completed) {
        println!("nmse         {:.6e}", nmse(completed, &truth)?);
    }

    if let Some(path) = &args.trace {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["iteration", "step_type", "objVal", "gap", "bestbd", "active_set_size"])?;
        for row in &result.trace {
            w.write_record([
                row.iteration.to_string(),
                row.step.as_str().to_string(),
                row.objective.to_string(),
                row.gap.to_string(),
                row.lower_bound.to_string(),
                row.active_size.to_string(),
            ])?;
        }
        w.flush()?;
    }
    if let Some(path) = &args.output {
        let mut w = BufWriter::new(File::create(path)?);
        let order = data.shape().order();
        let header: Vec<String> = (1..=order).map(|k| format!("x{k}")).collect();
        writeln!(w, "{},value", header.join(","))?;
        for (t, v) in result.values_on_u.iter().enumerate() {
            let index: Vec<String> = data.unique_index(t).iter().map(|i| (i + 1).to_string()).collect();
            writeln!(w, "{},{v}", index.join(","))?;
        }
        w.flush()?;
    }
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let suite: Suite = args.suite.parse()?;
    let versions = parse_versions(&args.versions)?;
    if args.reps == 0 {
        bail!("--reps must be at least 1");
    }
    if !(args.scale.is_finite() && args.scale > 0.0) {
        bail!("--scale must be positive");
    }
    let config = SuiteConfig {
        tol: args.tol,
        rank: args.rank,
        noise_sd: args.noise,
        base_seed: args.seed,
        jobs: args.jobs.max(1),
        options: SolveOptions {
            exact_rho_guard: args.rho_guard,
            ..Default::default()
        },
    };
    let outcomes = run_suite(suite, &versions, args.reps, args.scale, args.full, &config);
    let mut records = Vec::with_capacity(outcomes.len());
    let mut failures = 0;
    for outcome in outcomes {
        match outcome {
            Ok(r) => records.push(r),
            Err(f) => {
                failures += 1;
                eprintln!("failed: {f}");
            }
        }
    }
    let file = File::create(&args.output).with_context(|| format!("creating {}", args.output.display()))?;
    write_records(BufWriter::new(file), &records)?;
    eprintln!(
        "wrote {} records to {} ({failures} failed)",
        records.len(),
        args.output.display()
    );
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let file = File::open(&args.input).with_context(|| format!("opening {}", args.input.display()))?;
    let records = read_records(file)?;
    if records.is_empty() {
        bail!("{} holds no records", args.input.display());
    }
    let rows = aggregate(&records)?;
    let out = File::create(&args.output).with_context(|| format!("creating {}", args.output.display()))?;
    write_summary(BufWriter::new(out), &rows)?;
    if let Some(dir) = &args.plot_data {
        for path in write_plot_data(dir, &rows)? {
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}
