//! Command-line front end.
//!
//! Exit codes: 0 for SAT / found / success, 1 for UNSAT / not found, 2 for
//! width-exceeded verdicts, 3 for budget or size limits, 64 for usage
//! errors.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use joinwidth::classes;
use joinwidth::decomposition::{evaluate, Semantics};
use joinwidth::engines::{
    exact_joinwidth, find_decomposition_dp, solve_variable_dp, solve_with_decomposition,
    SearchVerdict, SolveVerdict,
};
use joinwidth::error::Error;
use joinwidth::generators::{GeneratorSpec, RandomSpec};
use joinwidth::oracle;
use joinwidth::relation::hypergraph;
use joinwidth::width::parse_omega;
use joinwidth::{bench, io, Omega};

#[derive(Parser)]
#[command(name = "jw", about = "Join decompositions for constraint satisfaction", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide satisfiability.
    Solve(SolveArgs),
    /// Evaluate a decomposition and print per-node widths.
    Width(WidthArgs),
    /// Search for a decomposition within a width budget.
    Search(SearchArgs),
    /// Compute the exact join width.
    Exact(ExactArgs),
    /// Detect structured instance classes.
    Detect(DetectArgs),
    /// Generate an instance from a named family.
    Gen(GenArgs),
    /// Exhaustive ground-truth procedures.
    Oracle(OracleArgs),
    /// Run an engine suite and write a CSV report.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Solve by evaluating this decomposition (pruned semantics).
    #[arg(long, conflicts_with_all = ["dp_vars", "dp_cons"])]
    decomposition: Option<PathBuf>,
    /// Solve by the variable-subset recurrence.
    #[arg(long)]
    dp_vars: bool,
    /// Solve by searching for a decomposition within the width budget.
    #[arg(long, conflicts_with = "dp_vars")]
    dp_cons: bool,
    /// Width budget for the recurrences (integer, decimal, or p/q).
    #[arg(long, value_parser = parse_omega)]
    width: Option<Omega>,
}

#[derive(Args)]
struct WidthArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    decomposition: PathBuf,
    /// naive, proj, or pruned.
    #[arg(long, default_value = "pruned")]
    mode: String,
    /// Abort once some node exceeds this width.
    #[arg(long, value_parser = parse_omega)]
    cap: Option<Omega>,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_parser = parse_omega)]
    max_width: Omega,
    /// Write the decomposition found here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExactArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    instance: PathBuf,
    /// root-set, constraint-root, hereditary, or fixing.
    #[arg(long)]
    class: String,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Write the witness (JSON) here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    family: GenFamily,
}

#[derive(Subcommand)]
enum GenFamily {
    /// Triangle family over domain [n].
    Triangle {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Hub-and-rays family with omega rays.
    Star {
        #[arg(long)]
        omega: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Complete binary constraints over a tree, e.g. --edges 0-1,1-2.
    TreeComplete {
        #[arg(long)]
        edges: String,
        #[arg(long, default_value_t = 2)]
        d: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Branchwidth reduction of a simple graph.
    BwReduction {
        #[arg(long)]
        edges: String,
        #[arg(long)]
        omega: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Projection counterexample family.
    Agm {
        #[arg(long, default_value_t = 1)]
        omega: usize,
        #[arg(long)]
        allow_large: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Chain family (n = 16 * omega, or explicit --n).
    Chain {
        #[arg(long, conflicts_with = "n")]
        omega: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        allow_large: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Seeded random family.
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        vars: usize,
        #[arg(long)]
        domain: u32,
        #[arg(long)]
        constraints: usize,
        #[arg(long, default_value_t = 1)]
        min_arity: usize,
        #[arg(long, default_value_t = 3)]
        max_arity: usize,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct OracleArgs {
    #[command(subcommand)]
    which: OracleCommand,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Enumerate all solutions exhaustively.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        /// Assignment budget (also JW_ORACLE_BUDGET).
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Exhaustive minimum join width over all trees.
    Joinwidth {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        linear_only: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact branchwidth of the scope hypergraph.
    Branchwidth {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        linear_only: bool,
    },
}

#[derive(Args)]
struct BenchArgs {
    /// quick or standard.
    #[arg(long)]
    suite: String,
    #[arg(long, value_parser = parse_omega, default_value = "2")]
    width: Omega,
    #[arg(long)]
    out: PathBuf,
}

const EXIT_OK: u8 = 0;
const EXIT_NO: u8 = 1;
const EXIT_WIDTH: u8 = 2;
const EXIT_LIMIT: u8 = 3;
const EXIT_USAGE: u8 = 64;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    EXIT_OK
                }
                _ => EXIT_USAGE,
            });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::LimitExceeded { .. } | Error::BudgetExceeded(_) => EXIT_LIMIT,
                Error::WidthExceeded(_) | Error::WidthCapExceeded { .. } => EXIT_WIDTH,
                Error::Parse(_) | Error::InvalidSpec(_) => EXIT_USAGE,
                _ => EXIT_USAGE,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> joinwidth::Result<u8> {
    match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Width(a) => cmd_width(a),
        Command::Search(a) => cmd_search(a),
        Command::Exact(a) => cmd_exact(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn cmd_solve(a: SolveArgs) -> joinwidth::Result<u8> {
    let inst = io::read_instance(&a.instance)?;
    let verdict = if let Some(path) = &a.decomposition {
        let dec = io::read_decomposition(path)?;
        let (verdict, report) = solve_with_decomposition(&inst, &dec)?;
        println!("width {:.3}", report.overall_width);
        verdict
    } else if a.dp_vars {
        let w = a.width.ok_or_else(|| {
            Error::Parse("--dp-vars needs --width".into())
        })?;
        solve_variable_dp(&inst, w)?
    } else if a.dp_cons {
        let w = a.width.ok_or_else(|| {
            Error::Parse("--dp-cons needs --width".into())
        })?;
        match find_decomposition_dp(&inst, w)?.verdict {
            SearchVerdict::Found { decomposition, .. } => {
                solve_with_decomposition(&inst, &decomposition)?.0
            }
            SearchVerdict::NotFound => SolveVerdict::WidthExceeded,
        }
    } else {
        return Err(Error::Parse(
            "pick one of --decomposition, --dp-vars, --dp-cons".into(),
        ));
    };
    Ok(match verdict {
        SolveVerdict::Sat => {
            println!("SAT");
            EXIT_OK
        }
        SolveVerdict::Unsat => {
            println!("UNSAT");
            EXIT_NO
        }
        SolveVerdict::WidthExceeded => {
            println!("WIDTH-EXCEEDED");
            EXIT_WIDTH
        }
    })
}

fn cmd_width(a: WidthArgs) -> joinwidth::Result<u8> {
    let inst = io::read_instance(&a.instance)?;
    let dec = io::read_decomposition(&a.decomposition)?;
    let mode = match a.mode.as_str() {
        "naive" => Semantics::Naive,
        "proj" => Semantics::Proj,
        "pruned" => Semantics::Pruned,
        other => return Err(Error::Parse(format!("unknown mode {other:?}"))),
    };
    let report = match evaluate(&dec, &inst, mode, a.cap) {
        Ok(r) => r,
        Err(Error::WidthCapExceeded { node, tuples, cap }) => {
            println!("WIDTH-EXCEEDED at node {node}: {tuples} tuples > cap {cap}");
            return Ok(EXIT_WIDTH);
        }
        Err(e) => return Err(e),
    };
    println!("node tuples width");
    for n in &report.nodes {
        println!("{:>4} {:>6} {:.3}", n.node, n.constraint.len(), n.width);
    }
    println!("overall {:.3}", report.overall_width);
    if let Some(sat) = report.satisfiable {
        println!("{}", if sat { "SAT" } else { "UNSAT" });
    }
    Ok(EXIT_OK)
}

fn cmd_search(a: SearchArgs) -> joinwidth::Result<u8> {
    let inst = io::read_instance(&a.instance)?;
    let out = find_decomposition_dp(&inst, a.max_width)?;
    println!(
        "subsets {} relations {} peak {}",
        out.stats.subsets_expanded, out.stats.relations_materialized, out.stats.peak_relation_size
    );
    match out.verdict {
        SearchVerdict::Found { decomposition, width, peak_tuples } => {
            println!("FOUND width {width:.3} peak {peak_tuples}");
            if let Some(path) = a.out {
                io::write_decomposition(&decomposition, &path)?;
            }
            Ok(EXIT_OK)
        }
        SearchVerdict::NotFound => {
            println!("NOT-FOUND");
            Ok(EXIT_NO)
        }
    }
}

fn cmd_exact(a: ExactArgs) -> joinwidth::Result<u8> {
    let inst = io::read_instance(&a.instance)?;
    let r = exact_joinwidth(&inst)?;
    println!("width {:.3} peak {}", r.width, r.peak_tuples);
    if let Some(path) = a.out {
        io::write_decomposition(&r.decomposition, &path)?;
    }
    Ok(EXIT_OK)
}

fn cmd_detect(a: DetectArgs) -> joinwidth::Result<u8> {
    let inst = io::read_instance(&a.instance)?;
    match a.class.as_str() {
        "root-set" => {
            // Any root set of size at most k, roots tried lexicographically.
            let vars: Vec<_> = inst.variables().iter().copied().collect();
            for size in 0..=a.k.min(vars.len()) {
                for q in combinations(&vars, size) {
                    let set: BTreeSet<_> = q.iter().copied().collect();
                    if let Some(w) = classes::find_root_set_witness(&inst, &set) {
                        let names: Vec<&str> =
                            w.roots.iter().map(|&v| inst.variable_name(v)).collect();
                        println!("FOUND roots {:?}", names);
                        if let Some(path) = a.out {
                            let order: Vec<&str> =
                                w.order.iter().map(|&v| inst.variable_name(v)).collect();
                            let json = serde_json::json!({
                                "roots": names,
                                "order": order,
                                "certificates": w.certificates,
                            });
                            std::fs::write(path, serde_json::to_string_pretty(&json)? + "\n")?;
                        }
                        return Ok(EXIT_OK);
                    }
                }
            }
            println!("NOT-FOUND");
            Ok(EXIT_NO)
        }
        "constraint-root" => match classes::find_constraint_root_set(&inst, a.k)? {
            Some(found) => {
                println!("FOUND constraints {:?}", found.constraints);
                if let Some(path) = a.out {
                    io::write_decomposition(&found.decomposition, &path)?;
                }
                Ok(EXIT_OK)
            }
            None => {
                println!("NOT-FOUND");
                Ok(EXIT_NO)
            }
        },
        "hereditary" => {
            let k = Omega::from_integer(a.k as u64);
            if classes::is_hereditarily_k_bounded(&inst, k)? {
                println!("BOUNDED");
                Ok(EXIT_OK)
            } else {
                println!("NOT-BOUNDED");
                Ok(EXIT_NO)
            }
        }
        "fixing" => match classes::find_fixing_sets(&inst, a.k) {
            Some(fix) => {
                println!("FOUND");
                let dec = classes::decomposition_from_fixing_sets(&inst, &fix)?;
                if let Some(path) = a.out {
                    io::write_decomposition(&dec, &path)?;
                }
                Ok(EXIT_OK)
            }
            None => {
                println!("NOT-FOUND");
                Ok(EXIT_NO)
            }
        },
        other => Err(Error::Parse(format!(
            "unknown class {other:?} (root-set, constraint-root, hereditary, fixing)"
        ))),
    }
}

fn combinations<T: Copy>(items: &[T], k: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec<T: Copy>(items: &[T], start: usize, k: usize, cur: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, i + 1, k, cur, out);
            cur.pop();
        }
    }
    rec(items, 0, k, &mut cur, &mut out);
    out
}

fn parse_edges(s: &str) -> joinwidth::Result<Vec<(usize, usize)>> {
    s.split(',')
        .map(|e| {
            let (u, v) = e
                .trim()
                .split_once('-')
                .ok_or_else(|| Error::Parse(format!("bad edge {e:?}, expected u-v")))?;
            Ok((
                u.trim().parse().map_err(|_| Error::Parse(format!("bad vertex {u:?}")))?,
                v.trim().parse().map_err(|_| Error::Parse(format!("bad vertex {v:?}")))?,
            ))
        })
        .collect()
}

fn cmd_gen(a: GenArgs) -> joinwidth::Result<u8> {
    let (spec, out) = match a.family {
        GenFamily::Triangle { n, out } => (GeneratorSpec::Triangle { n }, out),
        GenFamily::Star { omega, out } => (GeneratorSpec::Star { omega }, out),
        GenFamily::TreeComplete { edges, d, out } => (
            GeneratorSpec::TreeComplete { edges: parse_edges(&edges)?, d },
            out,
        ),
        GenFamily::BwReduction { edges, omega, out } => (
            GeneratorSpec::BwReduction { edges: parse_edges(&edges)?, omega },
            out,
        ),
        GenFamily::Agm { omega, allow_large, out } => {
            (GeneratorSpec::Agm { omega, allow_large }, out)
        }
        GenFamily::Chain { omega, n, allow_large, out } => {
            let spec = match (omega, n) {
                (_, Some(n)) => GeneratorSpec::ChainN { n },
                (Some(omega), None) => GeneratorSpec::Chain { omega, allow_large },
                (None, None) => return Err(Error::Parse("chain needs --omega or --n".into())),
            };
            (spec, out)
        }
        GenFamily::Random {
            seed,
            vars,
            domain,
            constraints,
            min_arity,
            max_arity,
            density,
            out,
        } => (
            GeneratorSpec::Random(RandomSpec {
                seed,
                num_vars: vars,
                domain_size: domain,
                num_constraints: constraints,
                min_arity,
                max_arity,
                density,
            }),
            out,
        ),
    };
    let inst = spec.build()?;
    io::write_instance(&inst, &out)?;
    println!(
        "wrote {} ({} variables, {} constraints, tup {})",
        out.display(),
        inst.num_variables(),
        inst.num_constraints(),
        inst.max_tuples()?
    );
    Ok(EXIT_OK)
}

fn cmd_oracle(a: OracleArgs) -> joinwidth::Result<u8> {
    match a.which {
        OracleCommand::Solve { instance, budget } => {
            let inst = io::read_instance(&instance)?;
            let sols = match budget {
                Some(b) => oracle::enumerate_solutions_budgeted(&inst, b)?,
                None => oracle::enumerate_solutions(&inst)?,
            };
            println!("{} solutions", sols.len());
            Ok(if sols.is_empty() { EXIT_NO } else { EXIT_OK })
        }
        OracleCommand::Joinwidth { instance, linear_only, out } => {
            let inst = io::read_instance(&instance)?;
            let r = if linear_only {
                oracle::brute_force_joinwidth_linear(&inst)?
            } else {
                oracle::brute_force_joinwidth(&inst)?
            };
            println!("width {:.3} peak {}", r.width, r.peak_tuples);
            if let Some(path) = out {
                io::write_decomposition(&r.decomposition, &path)?;
            }
            Ok(EXIT_OK)
        }
        OracleCommand::Branchwidth { instance, linear_only } => {
            let inst = io::read_instance(&instance)?;
            let h = hypergraph(&inst);
            let bw = oracle::brute_force_branchwidth(&h, linear_only)?;
            println!("branchwidth {bw}");
            Ok(EXIT_OK)
        }
    }
}

fn cmd_bench(a: BenchArgs) -> joinwidth::Result<u8> {
    let rows = bench::run_suite(&a.suite, a.width)?;
    bench::write_csv(&rows, &a.out)?;
    println!("wrote {} ({} rows)", a.out.display(), rows.len());
    Ok(EXIT_OK)
}
