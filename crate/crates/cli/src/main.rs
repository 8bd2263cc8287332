//! `nijenhuis` command-line front end.
//!
//! Exit status: 0 when every check passes (findings allowed), 1 when a check
//! fails, 2 on usage, I/O or parse errors.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nijenhuis::algebra::{BilinearProduct, ProductNotation};
use nijenhuis::catalog::{same_products, Catalog, EntryKind};
use nijenhuis::formats::{parse_document, parse_scalar, print_algebra, AlgebraDef, Block, FamilyDef, TensorDef};
use nijenhuis::operators::{validate_family, OperatorKind};
use nijenhuis::oracle::{enumerate_nijenhuis_ff, enumerate_rb_ff, family_coverage, instances, FfIdentity};
use nijenhuis::report::{algebra_items, coverage_items, verify_catalog, Item, OutputFormat, Report, Section, VerifyOptions};
use nijenhuis::scalars::{is_prime, Assignment, Fp};
use nijenhuis::yangbaxter::{cybe_residual, semidirect_double};

#[derive(Parser)]
#[command(name = "nijenhuis", version, about = "Exact checks for Nijenhuis, Rota-Baxter and CYBE structures")]
struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Include wall-clock timings in the report.
    #[arg(long, global = true)]
    timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Machine,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Text => OutputFormat::Text,
            Format::Machine => OutputFormat::Machine,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check the pre-Lie identity (and associativity or Jacobi when claimed).
    CheckAlgebra {
        /// Algebra file or catalog id.
        algebra: String,
    },
    /// Print the commutator algebra and match it against the catalog.
    SubAdjacent {
        /// Algebra file or catalog id.
        algebra: String,
    },
    /// Validate operator families as Nijenhuis operators on an algebra.
    NijenhuisCheck {
        /// Algebra file or catalog id.
        algebra: String,
        /// Family files or catalog family ids.
        #[arg(required = true)]
        families: Vec<String>,
    },
    /// Validate operator families as Rota-Baxter operators of a given weight.
    RbCheck {
        #[arg(long, default_value = "0")]
        weight: String,
        /// Algebra file or catalog id; Lie algebras use the bracket.
        algebra: String,
        /// Family files or catalog family ids.
        #[arg(required = true)]
        families: Vec<String>,
    },
    /// Evaluate the CYBE residual of tensors on the double of a Lie algebra.
    Cybe {
        /// Lie algebra file or catalog id.
        algebra: String,
        /// Tensor files or catalog tensor ids.
        #[arg(required = true)]
        tensors: Vec<String>,
    },
    /// List every Nijenhuis (or Rota-Baxter) operator over F_p.
    Enumerate {
        #[arg(long, default_value_t = 5)]
        prime: u32,
        /// Enumerate weight-zero Rota-Baxter operators on a Lie algebra instead.
        #[arg(long)]
        rb: bool,
        /// Algebra file or catalog id.
        algebra: String,
    },
    /// Compare the F_p solutions with the specializations of families.
    Coverage {
        #[arg(long, default_value_t = 5)]
        prime: u32,
        /// Family file; defaults to the catalog families on the algebra.
        #[arg(long)]
        families: Option<PathBuf>,
        /// Report uncovered solutions as failures rather than findings.
        #[arg(long)]
        require_complete: bool,
        /// Algebra file or catalog id.
        algebra: String,
    },
    /// Run the full verification of the catalog.
    VerifyPaper(VerifyArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Section number (1-9) or name; repeatable. Defaults to all.
    #[arg(long = "section")]
    sections: Vec<String>,
    #[arg(long, default_value_t = 5)]
    prime: u32,
    /// Random operators per algebra in the identities section.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
    /// Also write report.txt, report.machine and report.json here.
    #[arg(long)]
    write: Option<PathBuf>,
}

/// A usage, I/O or parse error; exit status 2.
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format: OutputFormat = cli.format.into();
    match run(&cli) {
        Ok((report, preface)) => {
            if matches!(format, OutputFormat::Text) {
                print!("{preface}");
            }
            print!("{}", report.render(format, cli.timing));
            ExitCode::from(report.exit_code() as u8)
        }
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read_blocks(arg: &str) -> Result<Option<Vec<Block>>, Usage> {
    let path = Path::new(arg);
    if !path.is_file() {
        return Ok(None);
    }
    let text = fs::read_to_string(path).map_err(|e| Usage(format!("{arg}: {e}")))?;
    parse_document(&text).map(Some).map_err(|e| Usage(format!("{arg}: {e}")))
}

fn load_algebra(cat: &Catalog, arg: &str) -> Result<AlgebraDef, Usage> {
    match read_blocks(arg)? {
        Some(blocks) => match blocks.as_slice() {
            [Block::Algebra(a)] => Ok(a.clone()),
            _ => Err(Usage(format!("{arg}: expected exactly one algebra block"))),
        },
        None => cat
            .any_algebra(arg)
            .cloned()
            .map_err(|_| Usage(format!("`{arg}` is neither a file nor a catalog algebra"))),
    }
}

fn load_all<T>(args: &[String], load: impl Fn(&str) -> Result<Vec<T>, Usage>) -> Result<Vec<T>, Usage> {
    let mut out = Vec::new();
    for arg in args {
        out.extend(load(arg)?);
    }
    Ok(out)
}

fn load_families(cat: &Catalog, arg: &str) -> Result<Vec<FamilyDef>, Usage> {
    match read_blocks(arg)? {
        Some(blocks) => blocks
            .into_iter()
            .map(|b| match b {
                Block::Family(f) => Ok(f),
                other => Err(Usage(format!("{arg}: `{}` is not a family block", other.id()))),
            })
            .collect(),
        None => cat
            .family(arg)
            .map(|f| vec![f.clone()])
            .map_err(|_| Usage(format!("`{arg}` is neither a file nor a catalog family"))),
    }
}

fn load_tensors(cat: &Catalog, arg: &str) -> Result<Vec<TensorDef>, Usage> {
    match read_blocks(arg)? {
        Some(blocks) => blocks
            .into_iter()
            .map(|b| match b {
                Block::Tensor(t) => Ok(t),
                other => Err(Usage(format!("{arg}: `{}` is not a tensor block", other.id()))),
            })
            .collect(),
        None => cat
            .tensor(arg)
            .map(|t| vec![t.clone()])
            .map_err(|_| Usage(format!("`{arg}` is neither a file nor a catalog tensor"))),
    }
}

fn check_prime(p: u32) -> Result<(), Usage> {
    if is_prime(p as u64) {
        Ok(())
    } else {
        Err(Usage(format!("{p} is not a prime")))
    }
}

fn command_line() -> String {
    let args: Vec<String> = std::env::args().skip(1).collect();
    format!("nijenhuis {}", args.join(" "))
}

fn run(cli: &Cli) -> Result<(Report, String), Usage> {
    let cat = Catalog::load()?;
    let mut report = Report::new(command_line());
    let mut preface = String::new();
    match &cli.command {
        Command::CheckAlgebra { algebra } => {
            let a = load_algebra(&cat, algebra)?;
            report.extend(algebra_items(&a));
        }
        Command::SubAdjacent { algebra } => {
            let a = load_algebra(&cat, algebra)?;
            let g = a.constants.sub_adjacent()?;
            let name = g.name().to_string();
            let def = AlgebraDef {
                constants: g.constants().clone(),
                is_lie: true,
                flags: Vec::new(),
            };
            preface = print_algebra(&def);
            preface.push('\n');
            let matches: Vec<String> = cat
                .of_kind(EntryKind::LieAlgebra)
                .filter_map(|e| cat.lie_def(&e.id).ok())
                .filter(|l| same_products(&l.constants, g.constants()))
                .map(|l| l.id().to_string())
                .collect();
            let brackets = g.constants().product_lines(ProductNotation::Bracket);
            let shown = if brackets.is_empty() {
                "abelian".to_string()
            } else {
                brackets.join(", ")
            };
            report.push(Item::pass("jacobi", &name, format!("{} basis triples", g.dim().pow(3))));
            report.push(Item::pass(
                "sub-adjacent",
                &name,
                if matches.is_empty() {
                    shown
                } else {
                    format!("{shown}; equals catalog {}", matches.join(", "))
                },
            ));
        }
        Command::NijenhuisCheck { algebra, families } => {
            let a = load_algebra(&cat, algebra)?;
            for f in load_all(families, |arg| load_families(&cat, arg))? {
                report.push(family_item(&a, &f, &OperatorKind::Nijenhuis)?);
            }
        }
        Command::RbCheck {
            weight,
            algebra,
            families,
        } => {
            let w = parse_scalar(weight).map_err(|e| Usage(format!("weight `{weight}`: {e}")))?;
            let a = load_algebra(&cat, algebra)?;
            for f in load_all(families, |arg| load_families(&cat, arg))? {
                report.push(family_item(&a, &f, &OperatorKind::RotaBaxter(w.clone()))?);
            }
        }
        Command::Cybe { algebra, tensors } => {
            let a = load_algebra(&cat, algebra)?;
            if !a.is_lie {
                return Err(Usage(format!("`{}` is not a Lie algebra", a.id())));
            }
            let d = semidirect_double(&a.lie()?)?;
            for t in load_all(tensors, |arg| load_tensors(&cat, arg))? {
                let res = cybe_residual(&d.total, &t.tensor)?;
                report.push(if res.is_zero() {
                    Item::pass("cybe", &t.id, format!("zero residual on the double of {}", a.id()))
                } else {
                    let names = d.basis_names();
                    let (idx, c) = res.terms().next().expect("nonzero");
                    Item::fail(
                        "cybe",
                        &t.id,
                        format!("{} nonzero residual components", res.len()),
                        format!("{c} at {} (x) {} (x) {}", names[idx[0]], names[idx[1]], names[idx[2]]),
                    )
                });
            }
        }
        Command::Enumerate { prime, rb, algebra } => {
            check_prime(*prime)?;
            let a = load_algebra(&cat, algebra)?;
            for inst in instances(&a.constants, *prime)? {
                let subject = if inst.values.is_empty() {
                    a.id().to_string()
                } else {
                    format!("{} [{}]", a.id(), inst.label())
                };
                let sols = if *rb {
                    let asg = Assignment::modulo(*prime);
                    let l = a.lie()?.map(|s| s.substitute_fp(&asg))?;
                    enumerate_rb_ff(&l, *prime, Fp::new(0, *prime))?
                } else {
                    enumerate_nijenhuis_ff(&inst.constants, *prime)?
                };
                let what = if *rb { "Rota-Baxter" } else { "Nijenhuis" };
                report.push(Item::pass(
                    "count",
                    &subject,
                    format!("{} {what} operators over F_{prime}", sols.len()),
                ));
                for m in sols {
                    report.push(Item::pass("solution", &subject, m.to_string()));
                }
            }
        }
        Command::Coverage {
            prime,
            families,
            require_complete,
            algebra,
        } => {
            check_prime(*prime)?;
            let a = load_algebra(&cat, algebra)?;
            let defs: Vec<FamilyDef> = match families {
                Some(path) => load_families(&cat, &path.display().to_string())?,
                None => cat
                    .families(EntryKind::NijenhuisFamily)
                    .filter(|f| f.family.algebra == a.id())
                    .cloned()
                    .collect(),
            };
            let mut errata = BTreeSet::new();
            for f in &defs {
                if !validate_family(&a.constants, &f.family, &OperatorKind::Nijenhuis)?.passed() {
                    errata.insert(f.family.id.clone());
                }
            }
            let fams: Vec<_> = defs.iter().map(|f| f.family.clone()).collect();
            for r in family_coverage(&a.constants, &fams, FfIdentity::Nijenhuis, *prime)? {
                report.extend(coverage_items(&r, &errata, *require_complete));
            }
        }
        Command::VerifyPaper(args) => {
            check_prime(args.prime)?;
            let sections = args
                .sections
                .iter()
                .map(|s| s.parse::<Section>())
                .collect::<Result<Vec<_>, _>>()?;
            let opts = VerifyOptions {
                sections,
                prime: args.prime,
                samples: args.samples,
                seed: args.seed,
            };
            report = verify_catalog(&cat, &opts)?;
            if let Some(dir) = &args.write {
                fs::create_dir_all(dir).map_err(|e| Usage(format!("{}: {e}", dir.display())))?;
                for (name, f) in [
                    ("report.txt", OutputFormat::Text),
                    ("report.machine", OutputFormat::Machine),
                    ("report.json", OutputFormat::Json),
                ] {
                    let path = dir.join(name);
                    fs::write(&path, report.render(f, cli.timing)).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
                }
            }
        }
    }
    Ok((report, preface))
}

fn family_item(a: &AlgebraDef, f: &FamilyDef, kind: &OperatorKind) -> Result<Item, Usage> {
    let r = validate_family(&a.constants, &f.family, kind)?;
    let id = &f.family.id;
    Ok(match &r.witness {
        None => Item::pass(&kind_check(kind), id, format!("{kind} on {}, all basis pairs", a.id())),
        Some(((i, j), v)) => {
            let names = a.constants.basis_names();
            Item::fail(
                &kind_check(kind),
                id,
                format!("{kind} residual is nonzero on {}", a.id()),
                format!("({}, {}) -> {v}", names[*i], names[*j]),
            )
        }
    })
}

fn kind_check(kind: &OperatorKind) -> String {
    match kind {
        OperatorKind::Nijenhuis => "nijenhuis".to_string(),
        OperatorKind::RotaBaxter(_) => "rota-baxter".to_string(),
    }
}
