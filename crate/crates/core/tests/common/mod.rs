#![allow(dead_code)]

use meanlab::{EnvelopeSpec, EnvelopeTable, MeanExpr};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn builtins() -> Vec<MeanExpr> {
    [
        "arith", "geom", "harm", "rms", "min", "max", "log", "env(e1)", "env(e2)",
        "power(-2)", "power(0.5)", "gini(1,-3)", "gini(2,1)", "gini(-1,-2)", "gini(1,1)",
        "env(table(0.001,0.01,0.1,0.5))",
    ]
    .iter()
    .map(|s| meanlab::parse_mean(s).unwrap())
    .collect()
}

fn random_table(rng: &mut ChaCha8Rng) -> EnvelopeTable {
    loop {
        let n = rng.random_range(1..4);
        let pts = (0..n)
            .map(|_| {
                let t: f64 = rng.random_range(1e-6..0.999);
                (t, rng.random_range(t..=1.0))
            })
            .collect();
        if let Ok(table) = EnvelopeTable::new(pts) {
            return table;
        }
    }
}

/// Arbitrary AST with full-precision parameters, for format/parse round trips.
pub fn random_ast(rng: &mut ChaCha8Rng, depth: u32) -> MeanExpr {
    let pick = if depth == 0 { rng.random_range(0..6) } else { rng.random_range(0..8) };
    match pick {
        0 => MeanExpr::gini(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)),
        1 => MeanExpr::Log,
        2 => MeanExpr::Min,
        3 => MeanExpr::Max,
        4 => MeanExpr::Envelope(match rng.random_range(0..3) {
            0 => EnvelopeSpec::E1,
            1 => EnvelopeSpec::E2,
            _ => EnvelopeSpec::Table(random_table(rng)),
        }),
        5 => MeanExpr::gini(rng.random_range(-3i32..4) as f64 * 0.5, 0.0),
        6 => MeanExpr::compose(
            random_ast(rng, depth - 1),
            random_ast(rng, depth - 1),
            random_ast(rng, depth - 1),
        ),
        _ => MeanExpr::invariant(random_ast(rng, depth - 1), random_ast(rng, depth - 1)),
    }
}

/// Gini mean whose order lies strictly inside (0, 1).
fn interior_gini(rng: &mut ChaCha8Rng) -> MeanExpr {
    let p = rng.random_range(0..5) as f64 * 0.5;
    let q = -(rng.random_range(0..5) as f64) * 0.5;
    MeanExpr::gini(p, q)
}

/// Operand for an invariant node. Orders strictly inside (0, 1) keep Gauss
/// iteration contracting geometrically in log coordinates.
fn invariant_operand(rng: &mut ChaCha8Rng, depth: u32) -> MeanExpr {
    if depth == 0 || rng.random_bool(0.6) {
        interior_gini(rng)
    } else {
        MeanExpr::compose(
            interior_gini(rng),
            invariant_operand(rng, depth - 1),
            invariant_operand(rng, depth - 1),
        )
    }
}

/// Composed AST suitable for order estimation.
pub fn random_sampling_ast(rng: &mut ChaCha8Rng, depth: u32) -> MeanExpr {
    let pick = if depth == 0 { rng.random_range(0..5) } else { rng.random_range(0..8) };
    match pick {
        0 => MeanExpr::gini(
            rng.random_range(-4i32..5) as f64 * 0.5,
            rng.random_range(-4i32..5) as f64 * 0.5,
        ),
        1 => MeanExpr::Log,
        2 => [MeanExpr::Min, MeanExpr::Max][rng.random_range(0..2)].clone(),
        3 => MeanExpr::Envelope([EnvelopeSpec::E1, EnvelopeSpec::E2][rng.random_range(0..2)].clone()),
        4 => MeanExpr::Envelope(EnvelopeSpec::Table(random_table(rng))),
        5 | 6 => MeanExpr::compose(
            random_sampling_ast(rng, depth - 1),
            random_sampling_ast(rng, depth - 1),
            random_sampling_ast(rng, depth - 1),
        ),
        _ => MeanExpr::invariant(invariant_operand(rng, 1), invariant_operand(rng, 1)),
    }
}

/// Random composed AST that is not a bare leaf.
pub fn random_composed_ast(rng: &mut ChaCha8Rng, depth: u32) -> MeanExpr {
    loop {
        let e = random_sampling_ast(rng, depth);
        if matches!(e, MeanExpr::Compose { .. } | MeanExpr::Invariant { .. }) {
            return e;
        }
    }
}
