//! Command-line interface: evaluate, convert, and cross-verify TCF files,
//! emit catalog entries, and fit growth models.
//!
//! Exit codes: 0 success, 1 verification failure, 2 parse error, 3
//! resource/size limit, 4 precision failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_bigint::BigUint;

use tilecount::catalog;
use tilecount::error::Error;
use tilecount::exactnum::DEFAULT_SIGN_BUDGET;
use tilecount::gf::{self, Limits};
use tilecount::multisum::eval_multisum;
use tilecount::tcf::{self, Representation, TcfDocument};
use tilecount::transfer::count_tilings;
use tilecount::translate::{self, TranslateOpts};

#[derive(Parser)]
#[command(name = "tilecount", version, about = "Exact tile counting functions in three representations")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate f(n) over a range and print one "n<TAB>f(n)" row per line.
    Eval {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        n0: u64,
        #[arg(long)]
        n1: u64,
        /// Require the input to hold this representation.
        #[arg(long)]
        rep: Option<String>,
        /// Refinement budget for sign tests.
        #[arg(long)]
        precision: Option<u32>,
        /// OEIS b-file style output ("n f(n)", space separated).
        #[arg(long, default_value_t = false)]
        bfile: bool,
    },
    /// Convert between representations and print the TCF document.
    Convert {
        #[arg(short, long)]
        input: PathBuf,
        /// Expected source representation (inferred when omitted).
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: String,
        #[arg(long)]
        precision: Option<u32>,
    },
    /// Evaluate two files over 0..=upto and compare.
    Verify {
        file_a: PathBuf,
        file_b: PathBuf,
        #[arg(long, default_value_t = 10)]
        upto: u64,
        #[arg(long)]
        precision: Option<u32>,
    },
    /// List catalog entries or emit one as TCF.
    Catalog {
        #[command(subcommand)]
        sub: CatalogCmd,
    },
    /// Fit A lambda^n n^alpha (log n)^beta per residue class.
    Asymp {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, default_value_t = 120)]
        upto: u64,
        /// Residue-class modulus.
        #[arg(long = "mod", default_value_t = 1)]
        modulus: u64,
        /// Model selection; "auto" fits with and without the log factor.
        #[arg(long, default_value = "auto")]
        model: String,
        #[arg(long)]
        precision: Option<u32>,
    },
}

#[derive(Subcommand)]
enum CatalogCmd {
    /// List entry names, descriptions, and available representations.
    List,
    /// Emit an entry in a representation as a TCF document.
    Emit {
        name: String,
        #[arg(long)]
        rep: String,
    },
}

fn limits_from_env() -> Limits {
    let mut limits = Limits::default();
    if let Ok(cap) = std::env::var("TILECOUNT_VAR_CAP") {
        if let Ok(cap) = cap.parse::<usize>() {
            limits.var_cap = cap;
        }
    }
    limits
}

fn read_doc(path: &PathBuf) -> Result<TcfDocument, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Syntax { pos: 0, msg: format!("{}: {e}", path.display()) })?;
    tcf::parse(&text)
}

fn eval_doc(doc: &TcfDocument, n: u64, budget: u32, limits: &Limits) -> Result<BigUint, Error> {
    match &doc.rep {
        Representation::Tiles(ts) => count_tilings(ts, n, budget),
        Representation::Gf(e) => gf::diagonal_with_limits(e, n as u32, limits),
        Representation::Multisum(ms) => eval_multisum(ms, n as i64),
    }
}

fn check_rep(doc: &TcfDocument, expect: &Option<String>) -> Result<(), Error> {
    if let Some(want) = expect {
        if doc.kind() != want {
            return Err(Error::Syntax {
                pos: 0,
                msg: format!("input holds a {} block, expected {want}", doc.kind()),
            });
        }
    }
    Ok(())
}

fn convert(doc: &TcfDocument, to: &str, opts: &TranslateOpts) -> Result<TcfDocument, Error> {
    let rep = match (&doc.rep, to) {
        (Representation::Tiles(ts), "multisum") => {
            Representation::Multisum(translate::tiles_to_multisum(ts, opts)?)
        }
        (Representation::Tiles(ts), "gf") => {
            let ms = translate::tiles_to_multisum(ts, opts)?;
            Representation::Gf(translate::multisum_to_gf(&ms, opts)?.gf)
        }
        (Representation::Gf(e), "tiles") => Representation::Tiles(translate::gf_to_tiles(e, opts)?),
        (Representation::Gf(e), "multisum") => {
            let ts = translate::gf_to_tiles(e, opts)?;
            Representation::Multisum(translate::tiles_to_multisum(&ts, opts)?)
        }
        (Representation::Multisum(ms), "gf") => {
            Representation::Gf(translate::multisum_to_gf(ms, opts)?.gf)
        }
        (Representation::Multisum(ms), "tiles") => {
            let g = translate::multisum_to_gf(ms, opts)?.gf;
            Representation::Tiles(translate::gf_to_tiles(&g, opts)?)
        }
        (rep, same) if doc.kind() == same => rep.clone(),
        (_, other) => {
            return Err(Error::Syntax { pos: 0, msg: format!("unknown target representation '{other}'") })
        }
    };
    Ok(TcfDocument { rep })
}

fn run() -> Result<bool, Error> {
    let cli = Cli::parse();
    let limits = limits_from_env();
    match cli.cmd {
        Cmd::Eval { input, n0, n1, rep, precision, bfile } => {
            if n0 > n1 {
                return Err(Error::Syntax { pos: 0, msg: "n0 must be at most n1".into() });
            }
            let doc = read_doc(&input)?;
            check_rep(&doc, &rep)?;
            let budget = precision.unwrap_or(DEFAULT_SIGN_BUDGET);
            for n in n0..=n1 {
                let v = eval_doc(&doc, n, budget, &limits)?;
                if bfile {
                    println!("{n} {v}");
                } else {
                    println!("{n}\t{v}");
                }
            }
            Ok(true)
        }
        Cmd::Convert { input, from, to, precision } => {
            let doc = read_doc(&input)?;
            check_rep(&doc, &from)?;
            let mut opts = TranslateOpts::default();
            opts.limits = limits;
            if let Some(p) = precision {
                opts.budget = p;
            }
            match convert(&doc, &to, &opts) {
                Ok(out) => {
                    print!("{}", tcf::emit(&out));
                    Ok(true)
                }
                Err(e @ Error::SizeLimit { .. }) => {
                    eprintln!("conversion refused: {e}");
                    Err(e)
                }
                Err(e) => Err(e),
            }
        }
        Cmd::Verify { file_a, file_b, upto, precision } => {
            let a = read_doc(&file_a)?;
            let b = read_doc(&file_b)?;
            let budget = precision.unwrap_or(DEFAULT_SIGN_BUDGET);
            let mut all_equal = true;
            let mut first_divergence: Option<u64> = None;
            for n in 0..=upto {
                let va = eval_doc(&a, n, budget, &limits)?;
                let vb = eval_doc(&b, n, budget, &limits)?;
                if va == vb {
                    println!("PASS\tn={n}\t{va}");
                } else {
                    if first_divergence.is_none() {
                        first_divergence = Some(n);
                        println!("FAIL\tn={n}\t{va} vs {vb}\t<- first divergence");
                    } else {
                        println!("FAIL\tn={n}\t{va} vs {vb}");
                    }
                    all_equal = false;
                }
            }
            Ok(all_equal)
        }
        Cmd::Catalog { sub } => match sub {
            CatalogCmd::List => {
                for e in catalog::entries() {
                    let mut reps = Vec::new();
                    if e.tiles.is_some() {
                        reps.push("tiles");
                    }
                    if e.gf.is_some() {
                        reps.push("gf");
                    }
                    if e.multisum.is_some() {
                        reps.push("multisum");
                    }
                    println!("{}\t[{}]\t{}", e.name, reps.join(","), e.description);
                }
                Ok(true)
            }
            CatalogCmd::Emit { name, rep } => {
                let entry = catalog::entry(&name)
                    .ok_or_else(|| Error::Syntax { pos: 0, msg: format!("unknown catalog entry '{name}'") })?;
                let doc = match rep.as_str() {
                    "tiles" => entry.tiles.clone().map(Representation::Tiles),
                    "gf" => entry.gf.clone().map(Representation::Gf),
                    "multisum" => entry.multisum.clone().map(Representation::Multisum),
                    other => {
                        return Err(Error::Syntax { pos: 0, msg: format!("unknown representation '{other}'") })
                    }
                };
                let doc = doc.ok_or_else(|| Error::Syntax {
                    pos: 0,
                    msg: format!("entry '{name}' has no {rep} representation"),
                })?;
                print!("{}", tcf::emit(&TcfDocument { rep: doc }));
                Ok(true)
            }
        },
        Cmd::Asymp { input, upto, modulus, model, precision } => {
            if model != "auto" {
                return Err(Error::Syntax { pos: 0, msg: "only the 'auto' model is supported".into() });
            }
            let doc = read_doc(&input)?;
            let budget = precision.unwrap_or(DEFAULT_SIGN_BUDGET);
            let values: Result<Vec<BigUint>, Error> =
                (0..=upto).map(|n| eval_doc(&doc, n, budget, &limits)).collect();
            let fits = catalog::asymp_fit(&values?, modulus)?;
            for f in fits {
                match f.growth {
                    catalog::Growth::EventuallyPolynomial { degree } => {
                        println!("class {}: eventually-polynomial, degree {degree} (exact)", f.residue);
                    }
                    catalog::Growth::Exponential => {
                        println!(
                            "class {}: exponential, lambda={:.6} alpha={:.4} beta={:.4} A={:.6} rms={:.3e}{}",
                            f.residue,
                            f.lambda,
                            f.alpha,
                            f.beta,
                            f.amplitude,
                            f.rms_residual,
                            if f.log_factor { " [log factor]" } else { "" }
                        );
                    }
                    catalog::Growth::Inconclusive => {
                        println!("class {}: inconclusive", f.residue);
                    }
                }
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
