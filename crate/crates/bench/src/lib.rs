//! Fixtures shared by the benchmarks and the operation-count table they
//! print before timing.

use fairagg_core::crypto::KeyMaterial;
use fairagg_core::datagen::{generate_federation, FederationConfig};
use fairagg_core::experiment::{self, ParticipantRow, SweepResult};
use fairagg_core::fairness::{extract_local_stats, DEFAULT_THRESHOLD};
use fairagg_core::privacy::NoiseSpec;
use fairagg_core::protocol::{prepare_submissions, Participant, Submission, Transcript};

pub const BENCH_SEED: u64 = 7;

/// Honest participants over a small generated federation of size `n`.
pub fn participants(n: usize, seed: u64) -> Vec<Participant> {
    let cfg = FederationConfig {
        n_participants: n,
        records_per_participant: (50, 100),
        seed,
        ..Default::default()
    };
    generate_federation(&cfg)
        .expect("bench federation")
        .iter()
        .enumerate()
        .map(|(i, d)| {
            Participant::honest(
                i as u32 + 1,
                extract_local_stats(d, DEFAULT_THRESHOLD).expect("stats"),
            )
        })
        .collect()
}

/// Keys and noised, encrypted submissions for `n` participants.
pub fn submissions(n: usize, key_bits: u32, seed: u64) -> (KeyMaterial, Vec<Submission>) {
    let keys = KeyMaterial::generate(key_bits, 2.min(n as u32), n as u32, seed).expect("keys");
    let noise = NoiseSpec::new(1.0, 1_000_000).expect("noise");
    let subs = prepare_submissions(
        &participants(n, seed),
        &noise,
        &keys.public,
        seed,
        &mut Transcript::new(false),
    )
    .expect("submissions");
    (keys, subs)
}

/// Tree-verification and naive-baseline counts at each size.
pub fn op_count_rows(sizes: &[usize], batch_size: usize, key_bits: u32) -> Vec<ParticipantRow> {
    let mut cfg = experiment::preset("tree-scaling").expect("preset");
    cfg.protocol.batch_size = batch_size;
    cfg.protocol.key_bits = key_bits;
    cfg.protocol.threshold_k = 1;
    match experiment::run_scaling_sweep(&cfg, sizes).expect("sweep") {
        SweepResult::Participants { rows } => rows,
        SweepResult::Epsilon { .. } => unreachable!("scaling sweep yields participant rows"),
    }
}

/// Plain-text table of `rows` followed by the fitted constant `c`.
pub fn op_count_table(rows: &[ParticipantRow]) -> String {
    let mut out = format!(
        "{:>5} {:>3} {:>6} {:>6} {:>10} {:>10} {:>8} {:>9}\n",
        "n", "B", "rounds", "adds/s", "verify_ops", "naive_ops", "ratio", "ops/nlogn"
    );
    for r in rows {
        out.push_str(&format!(
            "{:>5} {:>3} {:>6} {:>6} {:>10} {:>10} {:>8.1} {:>9}\n",
            r.n,
            r.batch_size,
            r.rounds,
            r.additions_per_statistic,
            r.verification_ops,
            r.naive_ops,
            r.naive_ratio,
            r.ops_per_n_log2_n.map_or("-".into(), |c| format!("{c:.3}")),
        ));
    }
    match experiment::scaling_constant(rows) {
        Some(c) => out.push_str(&format!("c = {c:.4}\n")),
        None => out.push_str("c = -\n"),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_reports_rows_and_constant() {
        let rows = op_count_rows(&[10, 30], 4, 256);
        assert_eq!(rows[0].additions_per_statistic, 9);
        assert_eq!(rows[1].additions_per_statistic, 29);
        let table = op_count_table(&rows);
        assert_eq!(table.lines().count(), 4);
        assert!(table.lines().last().unwrap().starts_with("c = "));
    }
}
