//! Batched tree aggregation with verification tokens.
//!
//! Participants are split into `⌈n/B⌉` consecutive batches, the leaves.
//! Each level pairs up the nodes of the level below; an odd node out is
//! carried up unchanged as a unary node. A node's token is a SHA-256 hash
//! of its position, its inputs (member submissions at a leaf, child tokens
//! above) and its aggregated ciphertexts, so a replay detects any altered
//! intermediate value at the first node that consumed it.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{MessageBody, OpCounters, ProtocolError, Result, Submission, Transcript};
use crate::crypto::{Ciphertext, PublicKey};

pub const DEFAULT_BATCH_SIZE: usize = 4;

const TOKEN_TAG: &[u8] = b"fairagg/tree-token/v1";

/// A tree node: participant indices at a leaf, child positions above.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub inputs: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreePlan {
    pub batch_size: usize,
    pub participants: usize,
    /// `levels[0]` are the batches; `levels[L]` is the single root.
    pub levels: Vec<Vec<TreeNode>>,
}

impl TreePlan {
    /// `L = ⌈log₂⌈n/B⌉⌉`.
    pub fn level_count(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn batch_count(&self) -> usize {
        self.levels[0].len()
    }

    pub fn node_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    /// Participant that hosts node `(level, node)`: the first member of its
    /// leftmost batch.
    pub fn host(&self, level: usize, node: usize) -> u32 {
        let mut n = node;
        for l in (1..=level).rev() {
            n = self.levels[l][n].inputs[0] as usize;
        }
        self.levels[0][n].inputs[0]
    }

    fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.participants];
        for leaf in &self.levels[0] {
            for &i in &leaf.inputs {
                let slot = (i as usize)
                    .checked_sub(1)
                    .and_then(|p| seen.get_mut(p))
                    .ok_or_else(|| ProtocolError::Config(format!("leaf names participant {i}")))?;
                if std::mem::replace(slot, true) {
                    return Err(ProtocolError::Config(format!(
                        "participant {i} in two batches"
                    )));
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(ProtocolError::Config(
                "batches do not cover every participant".into(),
            ));
        }
        for l in 1..self.levels.len() {
            let below = self.levels[l - 1].len();
            let mut used = vec![false; below];
            for node in &self.levels[l] {
                if node.inputs.is_empty() || node.inputs.len() > 2 {
                    return Err(ProtocolError::Config(format!(
                        "level {l} node with {} children",
                        node.inputs.len()
                    )));
                }
                for &c in &node.inputs {
                    let slot = used.get_mut(c as usize).ok_or_else(|| {
                        ProtocolError::Config(format!("level {l} child {c} out of range"))
                    })?;
                    if std::mem::replace(slot, true) {
                        return Err(ProtocolError::Config(format!(
                            "level {l} child {c} used twice"
                        )));
                    }
                }
            }
            if used.iter().any(|u| !u) {
                return Err(ProtocolError::Config(format!(
                    "level {} has an orphan node",
                    l - 1
                )));
            }
        }
        if self.levels.last().map(Vec::len) != Some(1) {
            return Err(ProtocolError::Config("tree has no single root".into()));
        }
        Ok(())
    }
}

/// Batches of `batch_size` consecutive participants, paired level by level.
pub fn plan_tree(n: usize, batch_size: usize) -> TreePlan {
    assert!(
        n >= 1 && batch_size >= 1,
        "plan_tree needs n >= 1 and B >= 1"
    );
    let leaves: Vec<TreeNode> = (1..=n as u32)
        .collect::<Vec<_>>()
        .chunks(batch_size)
        .map(|c| TreeNode { inputs: c.to_vec() })
        .collect();
    let mut levels = vec![leaves];
    while levels.last().unwrap().len() > 1 {
        let below = levels.last().unwrap().len() as u32;
        let parents = (0..below)
            .step_by(2)
            .map(|c| TreeNode {
                inputs: (c..(c + 2).min(below)).collect(),
            })
            .collect();
        levels.push(parents);
    }
    TreePlan {
        batch_size,
        participants: n,
        levels,
    }
}

/// What a node forwarded to its parent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub level: u32,
    pub node: u32,
    #[serde(with = "super::message::hex_token")]
    pub token: [u8; 32],
    pub ciphertexts: Vec<Ciphertext>,
}

#[derive(Clone, Debug)]
pub struct TreeRun {
    /// Root ciphertexts: the verified aggregate.
    pub ciphertexts: Vec<Ciphertext>,
    /// `records[level][node]`.
    pub records: Vec<Vec<NodeRecord>>,
    pub counters: OpCounters,
}

fn absorb_cts(h: &mut Sha256, cts: &[Ciphertext]) {
    h.update((cts.len() as u32).to_le_bytes());
    for c in cts {
        let bytes = c.value().to_bytes_le();
        h.update((bytes.len() as u32).to_le_bytes());
        h.update(&bytes);
    }
}

fn leaf_token(node: u32, members: &[&Submission], out: &[Ciphertext]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(TOKEN_TAG);
    h.update(0u32.to_le_bytes());
    h.update(node.to_le_bytes());
    for s in members {
        h.update(s.sender.to_le_bytes());
        absorb_cts(&mut h, &s.ciphertexts);
    }
    absorb_cts(&mut h, out);
    h.finalize().into()
}

fn inner_token(level: u32, node: u32, children: &[&[u8; 32]], out: &[Ciphertext]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(TOKEN_TAG);
    h.update(level.to_le_bytes());
    h.update(node.to_le_bytes());
    for t in children {
        h.update(t);
    }
    absorb_cts(&mut h, out);
    h.finalize().into()
}

fn sum_all<'a, I>(pk: &PublicKey, mut inputs: I) -> Result<(Vec<Ciphertext>, u64)>
where
    I: Iterator<Item = &'a [Ciphertext]>,
{
    let first = inputs
        .next()
        .ok_or_else(|| ProtocolError::Config("node without inputs".into()))?;
    let mut acc = first.to_vec();
    let mut adds = 0;
    for cts in inputs {
        if cts.len() != acc.len() {
            return Err(ProtocolError::Config(
                "ciphertext vectors differ in length".into(),
            ));
        }
        for (a, c) in acc.iter_mut().zip(cts) {
            *a = pk.add(a, c)?;
            adds += 1;
        }
    }
    Ok((acc, adds))
}

fn members<'a>(subs: &'a [Submission], leaf: &TreeNode) -> Vec<&'a Submission> {
    leaf.inputs.iter().map(|&i| &subs[i as usize - 1]).collect()
}

fn check_plan(plan: &TreePlan, submissions: &[Submission]) -> Result<()> {
    if plan.participants != submissions.len() {
        return Err(ProtocolError::PlanMismatch {
            planned: plan.participants,
            actual: submissions.len(),
        });
    }
    plan.validate()?;
    if let Some((pos, s)) = submissions
        .iter()
        .enumerate()
        .find(|(pos, s)| s.sender as usize != pos + 1)
    {
        return Err(ProtocolError::Config(format!(
            "submission at position {pos} is from party {}",
            s.sender
        )));
    }
    Ok(())
}

/// Sums the submissions along `plan` and replays the tree to check every
/// token. Rounds: one for the submissions, then one per level.
pub fn run_batched_verification(
    pk: &PublicKey,
    submissions: &[Submission],
    plan: &TreePlan,
    transcript: &mut Transcript,
) -> Result<TreeRun> {
    check_plan(plan, submissions)?;
    let start = transcript.counters();

    transcript.begin_round();
    let mut leaves = Vec::with_capacity(plan.batch_count());
    let mut token_inputs = 0u64;
    for (j, leaf) in plan.levels[0].iter().enumerate() {
        let host = plan.host(0, j);
        let ms = members(submissions, leaf);
        for s in &ms {
            transcript.send(
                s.sender,
                host,
                MessageBody::StatSubmission {
                    ciphertexts: s.ciphertexts.clone(),
                },
            );
        }
        let (out, adds) = sum_all(pk, ms.iter().map(|s| s.ciphertexts.as_slice()))?;
        transcript.counters_mut().homomorphic_additions += adds;
        token_inputs += ms.len() as u64;
        leaves.push(NodeRecord {
            level: 0,
            node: j as u32,
            token: leaf_token(j as u32, &ms, &out),
            ciphertexts: out,
        });
    }
    let mut records = vec![leaves];

    for level in 1..plan.levels.len() {
        transcript.begin_round();
        let below = &records[level - 1];
        let mut current = Vec::with_capacity(plan.levels[level].len());
        for (j, node) in plan.levels[level].iter().enumerate() {
            let host = plan.host(level, j);
            let children: Vec<&NodeRecord> =
                node.inputs.iter().map(|&c| &below[c as usize]).collect();
            for c in &children {
                transcript.send(
                    plan.host(level - 1, c.node as usize),
                    host,
                    MessageBody::TreeForward {
                        level: c.level,
                        node: c.node,
                        token: c.token,
                        ciphertexts: c.ciphertexts.clone(),
                    },
                );
            }
            let (out, adds) = sum_all(pk, children.iter().map(|c| c.ciphertexts.as_slice()))?;
            transcript.counters_mut().homomorphic_additions += adds;
            token_inputs += children.len() as u64;
            let child_tokens: Vec<&[u8; 32]> = children.iter().map(|c| &c.token).collect();
            current.push(NodeRecord {
                level: level as u32,
                node: j as u32,
                token: inner_token(level as u32, j as u32, &child_tokens, &out),
                ciphertexts: out,
            });
        }
        records.push(current);
    }
    transcript.counters_mut().verification_ops += token_inputs;

    let replay_ops = verify_tree(pk, submissions, plan, &records)?;
    transcript.counters_mut().verification_ops += replay_ops;
    Ok(TreeRun {
        ciphertexts: records.last().unwrap()[0].ciphertexts.clone(),
        records,
        counters: transcript.counters().since(&start),
    })
}

/// Re-derives every node's sum and token from the submissions and the
/// forwarded child records, bottom-up. Returns the number of token inputs
/// absorbed, or the first `(level, node)` that does not match.
pub fn verify_tree(
    pk: &PublicKey,
    submissions: &[Submission],
    plan: &TreePlan,
    records: &[Vec<NodeRecord>],
) -> Result<u64> {
    check_plan(plan, submissions)?;
    let shape_ok = records.len() == plan.levels.len()
        && records
            .iter()
            .zip(&plan.levels)
            .all(|(r, l)| r.len() == l.len());
    if !shape_ok {
        return Err(ProtocolError::Config(
            "tree records do not match the plan".into(),
        ));
    }
    let mut ops = 0u64;
    for (j, leaf) in plan.levels[0].iter().enumerate() {
        let rec = &records[0][j];
        let ms = members(submissions, leaf);
        let (sum, _) = sum_all(pk, ms.iter().map(|s| s.ciphertexts.as_slice()))?;
        ops += ms.len() as u64;
        if rec.level != 0
            || rec.node != j as u32
            || sum != rec.ciphertexts
            || leaf_token(j as u32, &ms, &sum) != rec.token
        {
            return Err(ProtocolError::TokenMismatch {
                level: 0,
                node: j as u32,
            });
        }
    }
    for level in 1..plan.levels.len() {
        for (j, node) in plan.levels[level].iter().enumerate() {
            let rec = &records[level][j];
            let children: Vec<&NodeRecord> = node
                .inputs
                .iter()
                .map(|&c| &records[level - 1][c as usize])
                .collect();
            let (sum, _) = sum_all(pk, children.iter().map(|c| c.ciphertexts.as_slice()))?;
            ops += children.len() as u64;
            let tokens: Vec<&[u8; 32]> = children.iter().map(|c| &c.token).collect();
            let mismatch = rec.level != level as u32
                || rec.node != j as u32
                || sum != rec.ciphertexts
                || inner_token(level as u32, j as u32, &tokens, &sum) != rec.token;
            if mismatch {
                return Err(ProtocolError::TokenMismatch {
                    level: level as u32,
                    node: j as u32,
                });
            }
        }
    }
    Ok(ops)
}

/// Quadratic baseline: every pair of parties cross-checks every statistic
/// (same key, no replayed ciphertext). One op per pair and statistic.
pub fn naive_pairwise_verification(submissions: &[Submission]) -> Result<OpCounters> {
    let mut ops = 0u64;
    for (i, a) in submissions.iter().enumerate() {
        for b in &submissions[i + 1..] {
            if a.ciphertexts.len() != b.ciphertexts.len() {
                return Err(ProtocolError::Config(
                    "ciphertext vectors differ in length".into(),
                ));
            }
            for (x, y) in a.ciphertexts.iter().zip(&b.ciphertexts) {
                ops += 1;
                if x.key_fingerprint() != y.key_fingerprint() || x == y {
                    return Err(ProtocolError::Config(format!(
                        "parties {} and {} share a ciphertext or disagree on the key",
                        a.sender, b.sender
                    )));
                }
            }
        }
    }
    Ok(OpCounters {
        verification_ops: ops,
        ..Default::default()
    })
}
