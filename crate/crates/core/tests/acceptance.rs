//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tildea::engine::{EngineError, Seed};
use tildea::prooflab::{self, Case2Sums};
use tildea::{LaurentPoly, MarkedAnnulus, Quiver, Triangulation};

type Outcome = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Outcome);

fn report(r: &prooflab::IdentityReport) -> Outcome {
    if r.passed {
        Ok(r.witness.clone())
    } else {
        Err(r.witness.clone())
    }
}

fn worked_example() -> Outcome {
    let ex = prooflab::tilde_a32_example().map_err(|e| e.to_string())?;
    let x = |i| LaurentPoly::var(5, i);
    let x4p = ex.seed.mutate(3).map_err(|e| e.to_string())?.cluster()[3].clone();
    if &x4p * &x(3) == &x(0) + &x(4) {
        Ok(format!("x4 x4' = x1 + x5, x4' = {x4p}"))
    } else {
        Err(format!("x4' = {x4p}"))
    }
}

fn formal_chains() -> Outcome {
    let mut failed = Vec::new();
    let mut reports = vec![prooflab::verify_case2_formal_with(Case2Sums::AsPrinted, false).map_err(|e| e.to_string())?];
    for n in 2..=4 {
        reports.push(prooflab::verify_case3(n).map_err(|e| e.to_string())?);
    }
    for r in &reports {
        for step in r.steps.iter().filter(|s| !s.passed) {
            failed.push(format!("{}: `{}` off by {} terms", r.name, step.label, step.difference.matches(" + ").count() + step.difference.matches(" - ").count() + 1));
        }
    }
    let consistent = prooflab::verify_case2_formal().map_err(|e| e.to_string())?;
    let tail = format!("(with S1 = z2' z4 z5' z8 and S2 = z1' z3 z4' z6 + .. the peripheral chain {})", if consistent.passed { "holds" } else { "fails too" });
    if failed.is_empty() {
        Ok("all chains have zero difference".into())
    } else {
        Err(format!("{} {tail}", failed.join("; ")))
    }
}

fn induction() -> Outcome {
    report(&prooflab::verify_bridging_induction(2, 2, 5, 4).map_err(|e| e.to_string())?)
}

fn random_walk(seed: &Seed, len: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Seed>, EngineError> {
    let mut out = vec![seed.clone()];
    let mut last = None;
    for _ in 0..len {
        let k = loop {
            let k = rng.gen_range(0..seed.rank());
            if Some(k) != last {
                break k;
            }
        };
        last = Some(k);
        let next = out.last().expect("nonempty").mutate(k)?;
        out.push(next);
    }
    Ok(out)
}

fn laurent_phenomenon() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let roots: Vec<Seed> = [(1, 1), (2, 1), (3, 2)].iter().map(|&(p, q)| Seed::initial(Quiver::tilde_a(p, q).unwrap())).collect();
    let mut checked = 0;
    for i in 0..500 {
        let root = &roots[i % 3];
        let len = rng.gen_range(1..=10);
        let walk = random_walk(root, len, &mut rng).map_err(|e| format!("sequence {i}: {e}"))?;
        for v in walk.last().expect("nonempty").cluster() {
            checked += 1;
            if !v.has_nonneg_numerator().map_err(|e| e.to_string())? {
                return Err(format!("negative coefficient in {v}"));
            }
        }
    }
    Ok(format!("500 sequences, {checked} variables, all Laurent with non-negative coefficients"))
}

fn flip_mutation() -> Outcome {
    let mut checked = 0;
    for (p, q) in [(1, 1), (2, 1), (3, 2)] {
        let c = MarkedAnnulus::new(p, q).unwrap();
        for t in Triangulation::initial(c).within_flips(4, 100_000).map_err(|e| e.to_string())? {
            let quiver = t.quiver().map_err(|e| e.to_string())?;
            for k in 0..t.len() {
                let flipped = t.flip(k).map_err(|e| e.to_string())?.triangulation.quiver().map_err(|e| e.to_string())?;
                if flipped != quiver.mutate(k).map_err(|e| e.to_string())? {
                    return Err(format!("C({p},{q}) {:?} arc {k}", t.arcs()));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} flips"))
}

fn cover_flips() -> Outcome {
    for (i, (p, q)) in [(2, 1), (2, 2), (3, 2)].into_iter().enumerate() {
        let r = prooflab::verify_cover_flips(p, q, 20, 100 + i as u64).map_err(|e| e.to_string())?;
        report(&r).map_err(|w| format!("C({p},{q}): {w}"))?;
    }
    Ok("60 random flips".into())
}

fn quiver_recovery() -> Outcome {
    for (p, q) in [(1, 1), (2, 1), (3, 2)] {
        report(&prooflab::verify_quiver_recovery(p, q, 3).map_err(|e| e.to_string())?).map_err(|w| format!("Ã({p},{q}): {w}"))?;
    }
    Ok("Ã(1,1), Ã(2,1), Ã(3,2) at depth 3".into())
}

fn unistructurality() -> Outcome {
    let mut sizes = Vec::new();
    for (p, q, d) in [(1, 1, 5), (2, 1, 4)] {
        let r = prooflab::unistructurality_experiment(p, q, d).map_err(|e| e.to_string())?;
        report(&r).map_err(|w| format!("C({p},{q}): {w}"))?;
        sizes.push(format!("C({p},{q}) depth {d}: {} interior compatible sets", r.context["interior_sets"]));
    }
    Ok(sizes.join(", "))
}

fn compatibility() -> Outcome {
    let r = prooflab::compatibility_oracle(2, 1, 4).map_err(|e| e.to_string())?;
    report(&r).map(|_| format!("{} compatible and {} crossing pairs", r.context["compatible_pairs"], r.context["crossing_pairs"]))
}

fn random_quiver(rng: &mut ChaCha8Rng) -> Quiver {
    let n = rng.gen_range(2..=6);
    let mut b = vec![vec![0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.gen_range(-2..=2);
            b[i][j] = v;
            b[j][i] = -v;
        }
    }
    Quiver::from_matrix(b).unwrap()
}

fn involutions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let types = [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2)];
    for i in 0..200 {
        let &(p, q) = types.choose(&mut rng).expect("nonempty");
        let root = Seed::initial(Quiver::tilde_a(p, q).unwrap());
        let len = rng.gen_range(0..6);
        let s = random_walk(&root, len, &mut rng).map_err(|e| e.to_string())?.pop().expect("nonempty");
        let k = rng.gen_range(0..s.rank());
        if s.mutate(k).and_then(|m| m.mutate(k)).map_err(|e| e.to_string())? != s {
            return Err(format!("seed {i} direction {k}"));
        }
    }
    for i in 0..200 {
        let quiver = random_quiver(&mut rng);
        let k = rng.gen_range(0..quiver.n());
        if quiver.mutate(k).and_then(|m| m.mutate(k)).map_err(|e| e.to_string())? != quiver {
            return Err(format!("quiver {i} vertex {k}"));
        }
    }
    for i in 0..200 {
        let &(p, q) = types.choose(&mut rng).expect("nonempty");
        let c = MarkedAnnulus::new(p as u32, q as u32).unwrap();
        let t = prooflab::random_triangulation(c, 8, &mut rng).map_err(|e| e.to_string())?;
        let k = rng.gen_range(0..t.len());
        let back = t.flip(k).and_then(|f| f.triangulation.flip(k)).map_err(|e| e.to_string())?.triangulation;
        if back != t {
            return Err(format!("triangulation {i} arc {k}"));
        }
    }
    Ok("600 double applications".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("worked example x4 x4' = x1 + x5 on Ã(3,2)", 1, worked_example),
        ("formal chains with displayed sums verbatim", 5, formal_chains),
        ("bridging induction on C(2,2), K = 5", 30, induction),
        ("Laurent phenomenon and positivity, 500 sequences", 120, laurent_phenomenon),
        ("flips commute with mutation within 4 flips", 60, flip_mutation),
        ("flips commute with the universal cover", 60, cover_flips),
        ("denominator uniqueness and quiver recovery", 60, quiver_recovery),
        ("unistructurality within bounds", 300, unistructurality),
        ("crossing zero iff common cluster on C(2,1)", 120, compatibility),
        ("involutivity of seed, quiver and flip", 30, involutions),
    ];
    let mut failures = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(_) if took > Duration::from_secs(*budget) => Err(format!("took {took:.2?}, budget {budget} s")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} [{took:.2?}] {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name} [{took:.2?}] {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
