#![allow(dead_code)]

use num_bigint::BigUint;

use fairagg_core::commit::CommitmentKey;
use fairagg_core::datagen::{generate_federation, FederationConfig};
use fairagg_core::fairness::{extract_local_stats, Dataset, DEFAULT_THRESHOLD};
use fairagg_core::protocol::Participant;

/// 256-bit safe prime `p = 2q + 1` (q prime), produced with gmpy2's
/// `next_prime` from a seeded start and checked with 64 Miller-Rabin rounds
/// on both `p` and `q`. Small enough for fast test proofs, large enough
/// for fixed-point totals.
pub const TEST_SAFE_PRIME: &str =
    "dc52744c681c6c59d633438011004edca7acc7da00d321ab02489b9bdbac4897";

/// Commitment key over [`TEST_SAFE_PRIME`] with `g = 4`, a quadratic residue.
pub fn test_group() -> CommitmentKey {
    let p = BigUint::parse_bytes(TEST_SAFE_PRIME.as_bytes(), 16).unwrap();
    CommitmentKey::from_safe_prime(p, BigUint::from(4u32)).unwrap()
}

pub fn federation(n: usize, records: (usize, usize), seed: u64) -> Vec<Dataset> {
    generate_federation(&FederationConfig {
        n_participants: n,
        records_per_participant: records,
        seed,
        ..Default::default()
    })
    .unwrap()
}

pub fn honest(datasets: &[Dataset]) -> Vec<Participant> {
    datasets
        .iter()
        .enumerate()
        .map(|(i, d)| {
            Participant::honest(
                i as u32 + 1,
                extract_local_stats(d, DEFAULT_THRESHOLD).unwrap(),
            )
        })
        .collect()
}

/// Compares every point of the frozen high-precision formula grid with the
/// library at relative tolerance `tol`. Returns the number of values checked
/// and a description of each mismatch.
pub fn formula_grid_mismatches(tol: f64) -> (usize, Vec<String>) {
    use fairagg_core::privacy::{
        accuracy_bound, compose, defense_scale, protocol_epsilon, verification_lower_bound,
    };
    use serde_json::Value;

    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/fixtures/formula_grid.json"
    ))
    .unwrap();
    let grid: Value = serde_json::from_str(&text).unwrap();
    let f = |p: &Value, k: &str| {
        p[k].as_f64()
            .unwrap_or_else(|| panic!("missing {k} in {p}"))
    };
    let u = |p: &Value, k: &str| {
        p[k].as_u64()
            .unwrap_or_else(|| panic!("missing {k} in {p}"))
    };
    let expect = |p: &Value, k: &str| p[k].as_str().unwrap().parse::<f64>().unwrap();
    let mut checked = 0;
    let mut bad = Vec::new();
    let mut check = |name: &str, got: f64, want: f64, p: &Value| {
        checked += 1;
        let rel = if want == 0.0 {
            got.abs()
        } else {
            ((got - want) / want).abs()
        };
        if !(rel <= tol) {
            bad.push(format!(
                "{name}: got {got}, want {want} (rel {rel:e}) at {p}"
            ));
        }
    };
    for p in grid["points"].as_array().unwrap() {
        match p["formula"].as_str().unwrap() {
            "compose" => {
                let (e, d) = compose(
                    f(p, "epsilon0"),
                    f(p, "delta0"),
                    u(p, "rounds"),
                    f(p, "delta_prime"),
                )
                .unwrap();
                check("compose.epsilon", e, expect(p, "epsilon"), p);
                check("compose.delta", d, expect(p, "delta"), p);
            }
            "protocol_epsilon" => {
                let e = protocol_epsilon(f(p, "sigma"), u(p, "n"), u(p, "rounds"), f(p, "delta"))
                    .unwrap();
                check("protocol_epsilon", e, expect(p, "epsilon"), p);
            }
            "lower_bound" => {
                let e = verification_lower_bound(f(p, "tau"), u(p, "n0"), u(p, "n1"));
                check("lower_bound", e, expect(p, "epsilon"), p);
            }
            "accuracy_bound" => {
                let e =
                    accuracy_bound(f(p, "sigma"), 1, u(p, "n0"), u(p, "n1"), f(p, "delta_fair"))
                        .unwrap();
                check("accuracy_bound", e, expect(p, "epsilon"), p);
            }
            "defense_scale" => {
                let s = defense_scale(u(p, "rounds"), f(p, "epsilon_inf"), u(p, "n")).unwrap();
                check("defense_scale", s, expect(p, "sigma"), p);
            }
            other => panic!("unknown formula {other}"),
        }
    }
    (checked, bad)
}
