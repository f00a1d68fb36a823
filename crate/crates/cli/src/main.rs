use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};
use taut_core::graphs::enumerate_stable_graphs;
use taut_core::integrals::integrate;
use taut_core::relcert::{batch_certify, certify_relation, pairing_matrix};
use taut_core::scalar::{parse_rational, PhiScalar, Rational, Scalar};
use taut_core::spin3::{extended_relation, relation_class, shifted_witten_action, shifted_witten_formula, witten_class};
use taut_core::strata::TautClass;
use taut_core::TautError;

#[derive(Parser)]
#[command(name = "taut", version, about = "Tautological relations from Witten's 3-spin class")]
struct Cli {
    /// Truncation order of the R-matrix (selects the R-matrix action for `witten --phi`)
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Base point φ for the shifted class: a rational p/q or `symbolic`
    #[arg(long, global = true)]
    phi: Option<String>,
    /// Largest 3g - 3 + n for batch certification
    #[arg(long, global = true, default_value_t = 4)]
    budget: u32,
    /// Wall-clock limit in seconds for batch certification
    #[arg(long, global = true)]
    time_limit: Option<u64>,
    /// Worker threads (defaults to the number of cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write results into this directory instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List stable graphs of type (g, n): the count, then one graph per line
    Graphs {
        g: u32,
        n: usize,
        /// Only graphs with at most this many edges
        #[arg(long)]
        edges: Option<usize>,
    },
    /// The relation class R^d_{g,A}
    Relation {
        g: u32,
        n: usize,
        d: u32,
        /// Comma-separated entries; with --sigma they may be any integers ≡ 0, 1 mod 3
        a: String,
        /// Parts of σ, pushed forward along the forgetful map
        #[arg(long)]
        sigma: Option<String>,
    },
    /// Witten's 3-spin class, or the shifted class with --phi
    Witten { g: u32, n: usize, a: String },
    /// Certify one relation, or every relation within --budget when no arguments are given
    Certify {
        g: Option<u32>,
        n: Option<usize>,
        d: Option<u32>,
        a: Option<String>,
    },
    /// Exact rank of the pairing between degrees d and 3g - 3 + n - d
    Rank { g: u32, n: usize, d: u32 },
    /// Integrate a class read from a file or standard input
    Integral { input: Option<PathBuf> },
}

enum Failure {
    Usage(String),
    Uncertified(String),
    Internal(String),
}

impl From<TautError> for Failure {
    fn from(e: TautError) -> Self {
        match e {
            TautError::Internal(_) | TautError::Remainder(_) => Failure::Internal(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Out = Result<Vec<(String, String)>, Failure>;

fn parse_list(s: &str) -> Result<Vec<u32>, Failure> {
    if s == "-" || s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| Failure::Usage(format!("bad entry `{t}` in `{s}`"))))
        .collect()
}

fn binary(s: &str, n: usize) -> Result<Vec<u8>, Failure> {
    let a = parse_list(s)?;
    if a.len() != n {
        return Err(Failure::Usage(format!("A has {} entries, expected {n}", a.len())));
    }
    a.iter()
        .map(|&x| match x {
            0 | 1 => Ok(x as u8),
            _ => Err(Failure::Usage(format!("entry {x} of A is not 0 or 1"))),
        })
        .collect()
}

fn joined<T: ToString>(a: &[T]) -> String {
    a.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

enum Phi {
    Symbolic,
    Value(Rational),
}

fn parse_phi(s: &str) -> Result<Phi, Failure> {
    if s == "symbolic" {
        return Ok(Phi::Symbolic);
    }
    match parse_rational(s) {
        Some(q) if q > Rational::from_integer(0.into()) => Ok(Phi::Value(q)),
        _ => Err(Failure::Usage(format!("--phi expects a positive p/q or `symbolic`, got `{s}`"))),
    }
}

fn graphs(g: u32, n: usize, edges: Option<usize>) -> Out {
    let list = enumerate_stable_graphs(g, n, edges)?;
    let mut s = format!("{}\n", list.len());
    for gr in list {
        s += &format!("{gr}\n");
    }
    Ok(vec![(format!("graphs_{g}_{n}.txt"), s)])
}

fn relation(g: u32, n: usize, d: u32, a: &str, sigma: Option<&str>) -> Out {
    let (class, label) = match sigma {
        None => {
            let a = binary(a, n)?;
            (relation_class(g, n, &a, d)?, joined(&a))
        }
        Some(s) => {
            let a = parse_list(a)?;
            if a.len() != n {
                return Err(Failure::Usage(format!("A has {} entries, expected {n}", a.len())));
            }
            let sigma = parse_list(s)?;
            (extended_relation(g, &a, &sigma, d)?, format!("{} sigma={}", joined(&a), joined(&sigma)))
        }
    };
    let text = format!("R g={g} n={n} d={d} A={label}\n{class}");
    Ok(vec![(format!("relation_{g}_{n}_{d}.txt"), text)])
}

fn witten(cli: &Cli, g: u32, n: usize, a: &str) -> Out {
    let a = binary(a, n)?;
    let name = format!("witten_{g}_{n}.txt");
    let head = format!("W g={g} n={n} A={}", joined(&a));
    let Some(phi) = cli.phi.as_deref() else {
        return Ok(vec![(name, format!("{head}\n{}", witten_class(g, &a)?))]);
    };
    let phi = parse_phi(phi)?;
    let class = match cli.order {
        None => shifted_witten_formula(g, &a)?,
        Some(k) => {
            let dim = (3 * g as i64 - 3 + n as i64).max(0) as usize;
            if k < dim {
                return Err(Failure::Usage(format!("--order {k} is below 3g - 3 + n = {dim}")));
            }
            let args: Vec<usize> = a.iter().map(|&x| x as usize).collect();
            shifted_witten_action(k)?.eval(g, &args)?
        }
    };
    let text = match phi {
        Phi::Symbolic => format!("{head} phi=symbolic\n{class}"),
        Phi::Value(q) => {
            let bad = std::cell::Cell::new(false);
            let at = class.map_coeffs(|c| {
                c.specialize(&q).unwrap_or_else(|| {
                    bad.set(true);
                    Rational::from_integer(0.into())
                })
            });
            if bad.get() {
                return Err(Failure::Usage(format!("φ = {q} has no rational fourth root needed here")));
            }
            format!("{head} phi={q}\n{at}")
        }
    };
    Ok(vec![(name, text)])
}

fn certify(cli: &Cli, g: Option<u32>, n: Option<usize>, d: Option<u32>, a: Option<&str>) -> Out {
    match (g, n, d) {
        (Some(g), Some(n), Some(d)) => {
            let a = binary(a.unwrap_or(""), n)?;
            let (rec, class) = certify_relation(g, &a, d)?;
            let mut text = rec.line() + "\n";
            if !rec.certified {
                text += &format!("{class}");
                return Err(Failure::Uncertified(text));
            }
            Ok(vec![(format!("certify_{g}_{n}_{d}.txt"), text)])
        }
        (None, None, None) => {
            let report = batch_certify(cli.budget, cli.time_limit.map(Duration::from_secs))?;
            if let Some(c) = &report.counterexample {
                return Err(Failure::Uncertified(format!("{}{c}\n{}\n", report.log(), report.summary())));
            }
            Ok(vec![
                ("certify.log".into(), report.log()),
                ("summary.txt".into(), report.summary() + "\n"),
            ])
        }
        _ => Err(Failure::Usage("certify takes either g n d A or no positional arguments".into())),
    }
}

fn rank(g: u32, n: usize, d: u32) -> Out {
    let m = pairing_matrix(g, n, d)?;
    let line = format!("rank g={g} n={n} d={d} rows={} cols={} rank={}\n", m.rows.len(), m.cols.len(), m.rank());
    Ok(vec![
        (format!("rank_{g}_{n}_{d}.txt"), line),
        (format!("pairing_{g}_{n}_{d}.txt"), m.to_sparse()),
    ])
}

fn top_integral<S: Scalar>(g: u32, n: usize, body: &str) -> Result<S, Failure> {
    let class = TautClass::<S>::parse(g, n, body)?;
    let top = (3 * g as i64 - 3 + n as i64) as u32;
    Ok(integrate(&class.degree_part(top))?)
}

fn integral(input: Option<&PathBuf>) -> Out {
    let mut text = String::new();
    match input {
        Some(p) if p.as_os_str() != "-" => {
            text = fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
        }
        _ => {
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| Failure::Usage(e.to_string()))?;
        }
    }
    let (head, body) = text.split_once('\n').unwrap_or((&text, ""));
    let field = |key: &str| {
        head.split_whitespace()
            .find_map(|t| t.strip_prefix(key))
            .ok_or_else(|| Failure::Usage(format!("header `{head}` lacks {key}")))
    };
    let g: u32 = field("g=")?.parse().map_err(|_| Failure::Usage(format!("bad header `{head}`")))?;
    let n: usize = field("n=")?.parse().map_err(|_| Failure::Usage(format!("bad header `{head}`")))?;
    let value = if head.contains("phi=symbolic") {
        top_integral::<PhiScalar>(g, n, body)?.to_string()
    } else {
        top_integral::<Rational>(g, n, body)?.to_string()
    };
    Ok(vec![("integral.txt".into(), value + "\n")])
}

fn run(cli: &Cli) -> Out {
    if let Some(w) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build_global()
            .map_err(|e| Failure::Internal(e.to_string()))?;
    }
    match &cli.cmd {
        Cmd::Graphs { g, n, edges } => graphs(*g, *n, *edges),
        Cmd::Relation { g, n, d, a, sigma } => relation(*g, *n, *d, a, sigma.as_deref()),
        Cmd::Witten { g, n, a } => witten(cli, *g, *n, a),
        Cmd::Certify { g, n, d, a } => certify(cli, *g, *n, *d, a.as_deref()),
        Cmd::Rank { g, n, d } => rank(*g, *n, *d),
        Cmd::Integral { input } => integral(input.as_ref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(parts) => {
            match &cli.out {
                None => {
                    for (name, text) in &parts {
                        // the sparse matrix only goes to files
                        if !name.starts_with("pairing_") {
                            print!("{text}");
                        }
                    }
                }
                Some(dir) => {
                    if let Err(e) = fs::create_dir_all(dir) {
                        eprintln!("{}: {e}", dir.display());
                        return ExitCode::from(1);
                    }
                    for (name, text) in &parts {
                        let path = dir.join(name);
                        if let Err(e) = fs::write(&path, text) {
                            eprintln!("{}: {e}", path.display());
                            return ExitCode::from(1);
                        }
                        println!("{}", path.display());
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Uncertified(text)) => {
            print!("{text}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("internal error: {m}");
            ExitCode::from(3)
        }
    }
}
