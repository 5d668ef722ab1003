//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::Instant;

use cgrand::channel_sim::{paired_frame, simulate_point, ChannelParams};
use cgrand::codes::build_ebch;
use cgrand::constraints::{count_search_space, derive_constraints, ConstraintLayout, ConstraintTargets};
use cgrand::decoder::{ColumnSyndromes, DecodeBudget, GrandDecoder};
use cgrand::patterns::{PatternGenerator, RankFilter};
use cgrand::{BitMatrix, BitVec, LinearCode};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ebch128() -> LinearCode {
    build_ebch(7, 3).expect("eBCH(128,106)")
}

fn random_targets<R: Rng>(p: usize, rng: &mut R) -> ConstraintTargets {
    ConstraintTargets::new((0..p).map(|_| rng.random()).collect())
}

fn count_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut cases = 0;
    for n in 4..=16 {
        for p in 0..=3 {
            for _ in 0..4 {
                let layout = ConstraintLayout::random(n, p, &mut rng).map_err(|e| e.to_string())?;
                let targets = random_targets(p, &mut rng);
                let count = count_search_space(n, &layout, &targets).map_err(|e| e.to_string())?;
                ensure(count == 1 << (n - p), || {
                    format!("n={n} p={p} sets={:?}: {count} != 2^{}", layout.sets(), n - p)
                })?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} layouts, every count = 2^(n-p)"))
}

fn subsets_by_weight(n: usize, max_weight: usize) -> BTreeMap<usize, BTreeSet<Vec<usize>>> {
    let mut out: BTreeMap<usize, BTreeSet<Vec<usize>>> = BTreeMap::new();
    for mask in 0u32..1 << n {
        let set: Vec<usize> = (1..=n).filter(|i| mask >> (i - 1) & 1 == 1).collect();
        let w: usize = set.iter().sum();
        if w <= max_weight {
            out.entry(w).or_default().insert(set);
        }
    }
    out
}

fn generator_completeness() -> Outcome {
    const MAX_WEIGHT: usize = 40;
    let mut total = 0;
    for n in 1..=10 {
        let mut gen = PatternGenerator::new(n);
        let mut seen: BTreeMap<usize, BTreeSet<Vec<usize>>> = BTreeMap::new();
        let mut last = 0;
        while let Some(e) = gen.next_pattern() {
            let w: usize = e.iter().sum();
            if w > MAX_WEIGHT {
                break;
            }
            ensure(w >= last, || format!("n={n}: weight {w} after {last}"))?;
            last = w;
            let fresh = seen.entry(w).or_default().insert(e.to_vec());
            ensure(fresh, || format!("n={n}: {e:?} emitted twice"))?;
            total += 1;
        }
        let oracle = subsets_by_weight(n, MAX_WEIGHT);
        ensure(seen == oracle, || {
            format!("n={n}: emitted sets differ from subset oracle")
        })?;
    }
    Ok(format!("{total} patterns over n=1..10 match the subset oracle"))
}

fn example_reproduction() -> Outcome {
    let pi1: Vec<usize> = [8, 1, 5, 6, 3, 7, 2, 4].iter().map(|r| r - 1).collect();
    let row: BitVec = "01010010".parse().unwrap();
    let layout = ConstraintLayout::from_rows(8, vec![row]).map_err(|e| e.to_string())?;
    let targets = ConstraintTargets::new(vec![false]);
    let filter = RankFilter::new(&layout, &targets, &pi1);
    let mut gen = PatternGenerator::constrained(8, filter).start_at_weight(11);
    let mut got = Vec::new();
    while let Some(e) = gen.next_pattern() {
        if e.iter().sum::<usize>() != 11 {
            break;
        }
        got.push(e.iter().rev().copied().collect::<Vec<_>>());
    }
    let want = vec![vec![5, 3, 2, 1], vec![5, 4, 2]];
    ensure(got == want, || format!("emitted {got:?}, expected {want:?}"))?;
    Ok(format!("weight 11 emits {got:?}"))
}

fn decision_equivalence() -> Outcome {
    const FRAMES: u64 = 10_000;
    const B: u64 = 100_000;
    let code = ebch128();
    let params = ChannelParams::new(4.5, code.rate()).map_err(|e| e.to_string())?;
    let plain = GrandDecoder::new(&code, None);
    let mut summary = Vec::new();
    for p in [1, 2] {
        let layout = derive_constraints(code.parity_check(), p).map_err(|e| e.to_string())?;
        let constrained = GrandDecoder::new(&code, Some(layout));
        let (mismatches, excess) = (0..FRAMES)
            .into_par_iter()
            .map(|f| {
                let (_, frame) = paired_frame(&code, &params, 4545, 0, f);
                let a = constrained.decode(&frame, DecodeBudget::new(B, B)).unwrap();
                let b = plain.decode(&frame, DecodeBudget::new(B, B)).unwrap();
                let same = a.codeword() == b.codeword() && a.is_abandoned() == b.is_abandoned();
                ((!same) as u64, (a.queries_checked > b.queries_checked) as u64)
            })
            .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
        ensure(mismatches == 0, || {
            format!("p={p}: {mismatches} frames decoded differently")
        })?;
        ensure(excess == 0, || format!("p={p}: {excess} frames used more queries"))?;
        summary.push(format!("p={p}"));
    }
    Ok(format!("{FRAMES} paired frames identical for {}", summary.join(", ")))
}

/// Mean queries for p = 0, 1, 2 on the same frames.
fn query_levels(snr_db: f64, frames: u64, seed: u64) -> Result<[f64; 3], String> {
    let code = ebch128();
    let mut out = [0.0; 3];
    for (p, slot) in out.iter_mut().enumerate() {
        let layout = derive_constraints(code.parity_check(), p).map_err(|e| e.to_string())?;
        let decoder = GrandDecoder::new(&code, Some(layout));
        let point = simulate_point(&code, &decoder, 0, snr_db, frames, DecodeBudget::uniform(100_000), seed)
            .map_err(|e| e.to_string())?;
        *slot = point.avg_queries_checked();
    }
    Ok(out)
}

fn query_halving() -> Outcome {
    let mut lines = Vec::new();
    for snr in [4.5, 5.0] {
        let q = query_levels(snr, 10_000, 7)?;
        let ratios = [q[0] / q[1], q[1] / q[2]];
        for r in ratios {
            ensure((1.8..=2.2).contains(&r), || {
                format!("{snr} dB: queries {q:.1?}, ratio {r:.3}")
            })?;
        }
        lines.push(format!("{snr} dB ratios {:.3}/{:.3}", ratios[0], ratios[1]));
    }
    Ok(lines.join(", "))
}

fn query_levels_at_five_db() -> Outcome {
    let q = query_levels(5.0, 100_000, 11)?;
    let reference = [461.0, 231.0, 115.0];
    for (p, (&got, &want)) in q.iter().zip(&reference).enumerate() {
        let dev = (got - want) / want;
        ensure(dev.abs() <= 0.25, || {
            format!("p={p}: {got:.1} vs {want} ({:+.1}%)", dev * 100.0)
        })?;
    }
    Ok(format!(
        "mean queries {:.1}/{:.1}/{:.1} vs 461/231/115",
        q[0], q[1], q[2]
    ))
}

fn parity_from_scratch(parts: &[usize], layout: &ConstraintLayout, pi1: &[usize]) -> u64 {
    let mut acc = 0;
    for &i in parts {
        let slot = layout.pi2(pi1[i - 1]);
        for (j, &(lo, hi)) in layout.intervals().iter().enumerate() {
            if lo <= slot && slot <= hi {
                acc ^= 1 << j;
            }
        }
    }
    acc
}

fn progressive_consistency() -> Outcome {
    const WALKS: usize = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut nodes = 0u64;
    for walk in 0..WALKS {
        let n = [8, 64, 128][walk % 3];
        let p = rng.random_range(1..=6);
        let layout = ConstraintLayout::random(n, p, &mut rng).map_err(|e| e.to_string())?;
        let targets = random_targets(p, &mut rng);
        let mut pi1: Vec<usize> = (0..n).collect();
        pi1.shuffle(&mut rng);
        let filter = RankFilter::new(&layout, &targets, &pi1);
        let start = rng.random_range(0..=n * (n + 1) / 2).min(3 * n);
        let steps = rng.random_range(1..=40);
        let mut gen = PatternGenerator::constrained(n, filter)
            .start_at_weight(start)
            .with_limit(20_000);
        for _ in 0..steps {
            if gen.next_pattern().is_none() {
                break;
            }
            let node = gen.current_node();
            let fresh = parity_from_scratch(node.retained_parts(), &layout, &pi1);
            ensure(node.partial_parities == fresh, || {
                format!(
                    "n={n} parts={:?}: cached {:b}, recomputed {fresh:b}",
                    node.parts, node.partial_parities
                )
            })?;
            nodes += 1;
        }
    }
    Ok(format!("{WALKS} walks, {nodes} nodes consistent"))
}

fn relative_syndrome_identity() -> Outcome {
    const PAIRS: usize = 100_000;
    let code = ebch128();
    let n = code.n();
    let cols = ColumnSyndromes::new(code.parity_check());
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..PAIRS {
        let v = BitVec::from_bools(&(0..n).map(|_| rng.random()).collect::<Vec<_>>());
        let w = rng.random_range(0..=12);
        let support: Vec<usize> = rand::seq::index::sample(&mut rng, n, w).into_vec();
        let e = BitVec::from_support(n, support.iter().copied());
        let relative = cols.to_bitvec(&cols.relative(&cols.initial(&v), support.iter().copied()));
        let direct = code.syndrome(&v.xor(&e).unwrap()).map_err(|e| e.to_string())?;
        ensure(relative == direct, || {
            format!("support {support:?}: relative syndrome differs")
        })?;
    }
    Ok(format!("{PAIRS} pairs agree"))
}

fn min_distance(code: &LinearCode) -> usize {
    (1u32..1 << code.k())
        .map(|m| {
            let msg = BitVec::from_bools(&(0..code.k()).map(|i| m >> i & 1 == 1).collect::<Vec<_>>());
            code.encode(&msg).unwrap().weight()
        })
        .min()
        .unwrap()
}

fn code_construction() -> Outcome {
    let big = ebch128();
    ensure((big.n(), big.k()) == (128, 106), || {
        format!("got ({}, {})", big.n(), big.k())
    })?;
    let product: BitMatrix = big
        .generator()
        .mul_transpose(big.parity_check())
        .map_err(|e| e.to_string())?;
    ensure(product.is_zero(), || "G·Hᵀ != 0".into())?;
    let in_dual = big
        .parity_check()
        .in_row_space(&BitVec::ones(128))
        .map_err(|e| e.to_string())?;
    ensure(in_dual.is_some(), || "all-one word not in the dual".into())?;

    let small = build_ebch(3, 1).map_err(|e| e.to_string())?;
    ensure((small.n(), small.k()) == (8, 4), || {
        format!("got ({}, {})", small.n(), small.k())
    })?;
    let d = min_distance(&small);
    ensure(d == 4, || format!("(8,4) minimum distance {d}"))?;
    Ok("eBCH(128,106) and eBCH(8,4) with d=4".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("search-space count law", count_law),
        ("generator completeness", generator_completeness),
        ("worked example, weight 11", example_reproduction),
        ("decision equivalence", decision_equivalence),
        ("query halving", query_halving),
        ("query levels at 5.0 dB", query_levels_at_five_db),
        ("progressive parity cache", progressive_consistency),
        ("relative syndrome", relative_syndrome_identity),
        ("code construction", code_construction),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
