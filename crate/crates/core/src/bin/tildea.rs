use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::json;
use tildea::annulus::{self, ArcLift, MarkedAnnulus, Triangulation};
use tildea::engine::{ExchangeGraph, Seed};
use tildea::prooflab::{self, Case1Variant, IdentityReport};
use tildea::quiver::Quiver;

type Res<T> = Result<T, Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "tildea", version, about = "Cluster algebras of type Ã: mutation, annulus triangulations and proof checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mutate a quiver read from JSON at one vertex.
    MutateQuiver {
        #[arg(long)]
        quiver: PathBuf,
        #[arg(long)]
        at: usize,
    },
    /// Mutate a seed read from JSON in one direction.
    MutateSeed {
        #[arg(long)]
        seed: PathBuf,
        #[arg(long)]
        at: usize,
        /// Also print the two monomials of the exchange relation.
        #[arg(long)]
        trace: bool,
    },
    /// Enumerate the exchange graph around a seed.
    ExchangeGraph {
        #[arg(long)]
        seed: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 100_000)]
        limit: usize,
        /// Write a DOT rendering to this file as well.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Recognize a quiver of type Ã(p, q).
    Classify {
        #[arg(long)]
        quiver: PathBuf,
    },
    #[command(subcommand)]
    Annulus(AnnulusCommand),
    /// Run proof checks and print their reports as JSON.
    Verify {
        #[arg(long, value_enum)]
        report: Report,
        #[arg(long)]
        p: Option<u32>,
        #[arg(long)]
        q: Option<u32>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long = "K")]
        k: Option<u8>,
        #[arg(long, default_value_t = 1)]
        seed_rng: u64,
    },
}

#[derive(Subcommand)]
enum AnnulusCommand {
    /// Flip one arc of a triangulation.
    Flip {
        #[arg(long)]
        triangulation: PathBuf,
        #[arg(long)]
        arc: usize,
    },
    /// Cluster variable of an arc in the initial seed.
    Variable {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        q: u32,
        #[arg(long)]
        arc: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Report {
    Lemma31,
    Case1,
    Case2Formal,
    Case2Geometric,
    Case3N2,
    Case3N3,
    Case3N4,
    Induction,
    QuiverRecovery,
    Unistructurality,
    CoverFlip,
    All,
}

fn read<T: DeserializeOwned>(path: &Path) -> Res<T> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

fn print(v: &impl serde::Serialize) -> Res<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

struct Params {
    p: Option<u32>,
    q: Option<u32>,
    depth: Option<usize>,
    k: Option<u8>,
    rng: u64,
}

fn run_report(r: Report, a: &Params) -> Res<Vec<IdentityReport>> {
    let pq = |p, q| (a.p.unwrap_or(p), a.q.unwrap_or(q));
    let depth = |d| a.depth.unwrap_or(d);
    Ok(match r {
        Report::Lemma31 => vec![prooflab::verify_lemma31_examples()?],
        Report::Case1 => {
            let (p, q) = pq(2, 1);
            vec![prooflab::verify_case1(p, q, depth(3), Case1Variant::Generic)?]
        }
        Report::Case2Formal => vec![prooflab::verify_case2_formal()?],
        Report::Case2Geometric => {
            let (p, q) = pq(4, 1);
            vec![prooflab::verify_case2_geometric(p, q, depth(6))?]
        }
        Report::Case3N2 => vec![prooflab::verify_case3(2)?],
        Report::Case3N3 => vec![prooflab::verify_case3(3)?],
        Report::Case3N4 => vec![prooflab::verify_case3(4)?],
        Report::Induction => {
            let (p, q) = pq(2, 2);
            vec![prooflab::verify_bridging_induction(p, q, a.k.unwrap_or(5), depth(4))?]
        }
        Report::QuiverRecovery => {
            let (p, q) = pq(2, 1);
            vec![prooflab::verify_quiver_recovery(p as usize, q as usize, depth(3))?]
        }
        Report::Unistructurality => {
            let (p, q) = pq(1, 1);
            vec![prooflab::unistructurality_experiment(p, q, depth(5))?]
        }
        Report::CoverFlip => {
            let (p, q) = pq(2, 1);
            vec![prooflab::verify_cover_flips(p, q, 20, a.rng)?]
        }
        Report::All => {
            let mut out = Vec::new();
            for r in [
                Report::Lemma31,
                Report::Case1,
                Report::Case2Formal,
                Report::Case2Geometric,
                Report::Case3N2,
                Report::Case3N3,
                Report::Case3N4,
                Report::Induction,
                Report::QuiverRecovery,
                Report::Unistructurality,
                Report::CoverFlip,
            ] {
                // each report keeps its own default annulus
                out.extend(run_report(r, &Params { p: None, q: None, depth: None, k: a.k, rng: a.rng })?);
            }
            out
        }
    })
}

fn run(cli: Cli) -> Res<bool> {
    match cli.command {
        Command::MutateQuiver { quiver, at } => {
            let q: Quiver = read(&quiver)?;
            print(&q.mutate(at)?)?;
        }
        Command::MutateSeed { seed, at, trace } => {
            let s: Seed = read(&seed)?;
            let next = s.mutate(at)?;
            if trace {
                let (out, inc) = s.exchange_monomials(at)?;
                print(&json!({ "seed": next, "exchange": { "old": s.cluster()[at], "new": next.cluster()[at], "out": out, "in": inc } }))?;
            } else {
                print(&next)?;
            }
        }
        Command::ExchangeGraph { seed, depth, limit, dot } => {
            let s: Seed = read(&seed)?;
            let g = ExchangeGraph::enumerate(&s, depth, limit)?;
            if let Some(path) = dot {
                fs::write(path, g.to_dot())?;
            }
            print(&g.to_json())?;
        }
        Command::Classify { quiver } => {
            let q: Quiver = read(&quiver)?;
            print(&q.classify_tilde_a()?)?;
        }
        Command::Annulus(AnnulusCommand::Flip { triangulation, arc }) => {
            let t: Triangulation = read(&triangulation)?;
            print(&t.flip(arc)?)?;
        }
        Command::Annulus(AnnulusCommand::Variable { p, q, arc }) => {
            let a: ArcLift = read(&arc)?;
            let annulus = MarkedAnnulus::new(p, q)?;
            print(&json!({ "arc": annulus.canonical(&a), "variable": annulus::variable_of_arc(&a, annulus)? }))?;
        }
        Command::Verify { report, p, q, depth, k, seed_rng } => {
            let reports = run_report(report, &Params { p, q, depth, k, rng: seed_rng })?;
            print(&reports)?;
            return Ok(reports.iter().all(|r| r.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
