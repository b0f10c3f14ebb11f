use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use locform::{format_rows, parse, serialise, Instance};
use locform_core::decompose::{self, Witness};
use locform_core::form::{self, Epsilon, GramForm, InvariantProfile};
use locform_core::residue::FormType;
use locform_core::ring::{RingDescriptor, RingKind};
use locform_core::Error;

#[derive(Parser)]
#[command(name = "locform", version, about = "Classify epsilon-hermitian forms over complete DVRs with involution")]
struct Cli {
    /// Override the precision given in the input files.
    #[arg(long, global = true)]
    precision: Option<u32>,
    #[arg(long, global = true, value_enum, default_value_t = Output::Text)]
    output: Output,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Text,
    Machine,
}

#[derive(Subcommand)]
enum Command {
    /// Check that the matrix is epsilon-hermitian.
    Validate { file: PathBuf },
    /// Print the invariant profile d_i with the residue data of each level.
    Invariants { file: PathBuf },
    /// Print the canonical form, optionally writing a verified witness.
    NormalForm {
        file: PathBuf,
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Decide congruence; exit 0 if congruent, 2 if not.
    Congruent {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Decide whether a profile d_0, d_1, ... occurs; exit 0 if so, 2 if not.
    Realisable {
        kind: String,
        p: u64,
        #[arg(allow_hyphen_values = true)]
        epsilon: String,
        /// Comma-separated sizes d_0,d_1,...
        d: String,
    },
    /// Check X'* M X = N for a witness file X.
    #[command(hide = true)]
    Verify { source: PathBuf, target: PathBuf, witness: PathBuf },
}

/// Decided-false outcomes exit with 2; errors with 1.
enum Verdict {
    Yes,
    No,
}

struct Ctx {
    precision: Option<u32>,
    machine: bool,
}

impl Ctx {
    fn load(&self, path: &Path) -> anyhow::Result<Instance> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        parse(&text, self.precision).map_err(|e| anyhow!("{}:{e}", path.display()))
    }

    fn load_form(&self, path: &Path) -> anyhow::Result<GramForm> {
        let inst = self.load(path)?;
        let eps = inst.epsilon.ok_or_else(|| anyhow!("{}: missing epsilon line", path.display()))?;
        form::validate(inst.matrix, eps).map_err(|e| anyhow!("{}: {e}", path.display()))
    }

    /// Runs `f` and, when it runs out of precision on exact input, finds a
    /// precision that suffices so the error can name it.
    fn with_retry<T>(&self, paths: &[&Path], f: impl Fn(&Ctx) -> anyhow::Result<T>) -> anyhow::Result<T> {
        let err = match f(self) {
            Ok(v) => return Ok(v),
            Err(e) => e,
        };
        let Some(&Error::PrecisionExhausted { precision }) = err.downcast_ref::<Error>() else {
            return Err(err);
        };
        let all_exact = paths.iter().all(|p| {
            self.load(p).is_ok_and(|i| i.matrix.entries().all(|x| x.is_exact()))
        });
        if !all_exact {
            return Err(err.context("input has truncated entries; more digits are needed"));
        }
        let mut n = precision;
        for _ in 0..4 {
            n *= 2;
            let higher = Ctx { precision: Some(n), machine: self.machine };
            if paths.iter().any(|p| higher.load(p).is_err()) {
                break;
            }
            if f(&higher).is_ok() {
                bail!("precision exhausted at {precision}; rerun with --precision {n}");
            }
        }
        Err(err.context(format!("no precision up to {n} suffices")))
    }
}

fn print_profile(ctx: &Ctx, profile: &InvariantProfile) {
    if ctx.machine {
        for l in &profile.levels {
            println!("d_{}={}", l.level, l.size);
            println!("type_{}={}", l.level, l.form_type.name());
            if l.form_type == FormType::Symmetric {
                println!("disc_{}={}", l.level, l.classification.disc.name());
            }
        }
        println!("d_inf={}", profile.zero_rank);
    } else {
        println!("{profile}");
    }
}

fn print_matrix(ctx: &Ctx, label: &str, inst: &Instance) {
    if ctx.machine {
        for (i, row) in format_rows(&inst.matrix).iter().enumerate() {
            println!("{label}_row_{i}={row}");
        }
    } else {
        println!("{label}:");
        print!("{}", serialise(inst));
    }
}

fn write_witness(ring: RingDescriptor, w: &Witness, path: &Path) -> anyhow::Result<()> {
    let inst = Instance { ring, epsilon: None, matrix: w.matrix().clone() };
    fs::write(path, serialise(&inst)).with_context(|| format!("cannot write {}", path.display()))
}

/// Re-reads a written witness and checks it, so the file itself is what got
/// verified.
fn reverify(ctx: &Ctx, source: &GramForm, target: &GramForm, path: &Path) -> anyhow::Result<()> {
    let x = ctx.load(path)?;
    if !Witness::new(x.matrix).verify(source, target) {
        bail!("witness written to {} does not verify", path.display());
    }
    Ok(())
}

fn validate(ctx: &Ctx, file: &Path) -> anyhow::Result<Verdict> {
    let inst = ctx.load(file)?;
    let eps = inst.epsilon.ok_or_else(|| anyhow!("{}: missing epsilon line", file.display()))?;
    let m = &inst.matrix;
    let n = m.rows();
    let mut violations = Vec::new();
    for i in 0..n {
        for j in i..n {
            let mirror = m.get(i, j).involute();
            let mirror = if eps == Epsilon::Minus { -mirror } else { mirror };
            if !(m.get(j, i) - &mirror).is_zero() {
                violations.push((i, j));
            }
        }
    }
    if ctx.machine {
        println!("epsilon_hermitian={}", if violations.is_empty() { "yes" } else { "no" });
        for (i, j) in &violations {
            println!("violation={i},{j}");
        }
    } else if violations.is_empty() {
        println!("epsilon-hermitian: yes");
    } else {
        println!("epsilon-hermitian: no");
        for (i, j) in &violations {
            println!("  entry ({j},{i}) is not epsilon times the conjugate of entry ({i},{j})");
        }
    }
    if violations.is_empty() {
        Ok(Verdict::Yes)
    } else {
        bail!("{} entries violate the epsilon-hermitian condition", violations.len())
    }
}

fn invariants(ctx: &Ctx, file: &Path) -> anyhow::Result<Verdict> {
    let profile = ctx.with_retry(&[file], |c| Ok(form::invariant_profile(&c.load_form(file)?)?))?;
    print_profile(ctx, &profile);
    Ok(Verdict::Yes)
}

fn normal_form(ctx: &Ctx, file: &Path, witness: Option<&Path>) -> anyhow::Result<Verdict> {
    let f = ctx.load_form(file)?;
    let (canon, w) = ctx.with_retry(&[file], |c| Ok(decompose::normal_form(&c.load_form(file)?)?))?;
    print_profile(ctx, &form::invariant_profile(&canon)?);
    let inst = Instance { ring: canon.descriptor(), epsilon: Some(canon.epsilon()), matrix: canon.matrix().clone() };
    print_matrix(ctx, "canonical", &inst);
    if let Some(path) = witness {
        write_witness(f.descriptor(), &w, path)?;
        reverify(ctx, &f, &canon, path)?;
        if ctx.machine {
            println!("witness={}", path.display());
        } else {
            println!("witness written to {} (verified)", path.display());
        }
    }
    Ok(Verdict::Yes)
}

fn congruent(ctx: &Ctx, a: &Path, b: &Path, witness: Option<&Path>) -> anyhow::Result<Verdict> {
    let (f, g) = (ctx.load_form(a)?, ctx.load_form(b)?);
    if f.descriptor() != g.descriptor() || f.epsilon() != g.epsilon() || f.size() != g.size() {
        bail!("{}", Error::ShapeMismatch);
    }
    let d = ctx.with_retry(&[a, b], |c| Ok(decompose::decide_congruent(&c.load_form(a)?, &c.load_form(b)?)?))?;
    if ctx.machine {
        println!("congruent={}", if d.congruent { "yes" } else { "no" });
        if let Some(r) = d.reason {
            println!("reason={r}");
        }
    } else {
        match d.reason {
            None => println!("congruent: yes"),
            Some(r) => println!("congruent: no ({r})"),
        }
    }
    if !d.congruent {
        return Ok(Verdict::No);
    }
    if let Some(path) = witness {
        let w = decompose::congruence_witness(&f, &g)?;
        write_witness(f.descriptor(), &w, path)?;
        reverify(ctx, &f, &g, path)?;
        if ctx.machine {
            println!("witness={}", path.display());
        } else {
            println!("witness written to {} (verified)", path.display());
        }
    }
    Ok(Verdict::Yes)
}

fn realisable(ctx: &Ctx, kind: &str, p: u64, epsilon: &str, d: &str) -> anyhow::Result<Verdict> {
    let kind = RingKind::from_name(kind).ok_or_else(|| {
        let names: Vec<_> = RingKind::ALL.iter().map(|k| k.name()).collect();
        anyhow!("unknown ring kind '{kind}' (expected one of {})", names.join(", "))
    })?;
    let eps = match epsilon {
        "1" | "+1" => Epsilon::Plus,
        "-1" => Epsilon::Minus,
        _ => bail!("epsilon must be 1 or -1, got '{epsilon}'"),
    };
    let d: Vec<usize> = d
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| anyhow!("invalid size '{s}' in the d-list")))
        .collect::<anyhow::Result<_>>()?;
    let ring = RingDescriptor::new(kind, p, ctx.precision.unwrap_or(16))?;
    let Some(f) = decompose::realise(&d, 0, eps, &ring)? else {
        if ctx.machine {
            println!("realisable=no");
        } else {
            println!("realisable: no");
        }
        return Ok(Verdict::No);
    };
    if ctx.machine {
        println!("realisable=yes");
    } else {
        println!("realisable: yes");
    }
    let inst = Instance { ring, epsilon: Some(eps), matrix: f.matrix().clone() };
    print_matrix(ctx, "witness", &inst);
    Ok(Verdict::Yes)
}

fn verify(ctx: &Ctx, source: &Path, target: &Path, witness: &Path) -> anyhow::Result<Verdict> {
    let (f, g) = (ctx.load_form(source)?, ctx.load_form(target)?);
    let x = ctx.load(witness)?;
    let ok = Witness::new(x.matrix).verify(&f, &g);
    if ctx.machine {
        println!("verified={}", if ok { "yes" } else { "no" });
    } else {
        println!("verified: {}", if ok { "yes" } else { "no" });
    }
    Ok(if ok { Verdict::Yes } else { Verdict::No })
}

fn run(cli: Cli) -> anyhow::Result<Verdict> {
    let ctx = Ctx { precision: cli.precision, machine: cli.output == Output::Machine };
    match &cli.command {
        Command::Validate { file } => validate(&ctx, file),
        Command::Invariants { file } => invariants(&ctx, file),
        Command::NormalForm { file, witness } => normal_form(&ctx, file, witness.as_deref()),
        Command::Congruent { a, b, witness } => congruent(&ctx, a, b, witness.as_deref()),
        Command::Realisable { kind, p, epsilon, d } => realisable(&ctx, kind, *p, epsilon, d),
        Command::Verify { source, target, witness } => verify(&ctx, source, target, witness),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Verdict::Yes) => ExitCode::SUCCESS,
        Ok(Verdict::No) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
