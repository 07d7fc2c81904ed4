use num_bigint::BigUint;

use fairagg_core::commit::CommitmentKey;
use fairagg_core::crypto::KeyMaterial;
use fairagg_core::experiment::{execute, preset};
use fairagg_core::netsim::{capture_view, ThreatModel};
use fairagg_core::protocol::{MessageBody, MessageKind, ProtocolMessage, AGGREGATOR};

#[test]
fn honest_but_curious_view_is_minimal_and_leaks_nothing() {
    let cfg = preset("smoke").unwrap();
    let adv = cfg.adversary.clone().unwrap();
    assert_eq!(adv.model, ThreatModel::HonestButCurious);
    let run = execute(&cfg).unwrap();
    let all = run.transcript.messages();
    let view = capture_view(&adv, all);

    for m in &view.messages {
        let broadcast = matches!(
            m.body.kind(),
            MessageKind::CommitmentBroadcast | MessageKind::Abort
        );
        assert!(
            broadcast || adv.is_corrupted(m.sender) || adv.is_corrupted(m.recipient),
            "{m:?}"
        );
    }
    let private_to_honest = all
        .iter()
        .filter(|m| !adv.is_corrupted(m.sender) && !adv.is_corrupted(m.recipient))
        .filter(|m| {
            !matches!(
                m.body.kind(),
                MessageKind::CommitmentBroadcast | MessageKind::Abort
            )
        })
        .count();
    assert!(private_to_honest > 0);
    assert_eq!(view.messages.len() + private_to_honest, all.len());

    let summary = run.report.adversary.as_ref().unwrap();
    assert_eq!(summary.captured_messages, view.messages.len());
    assert_eq!(summary.leaked_values, 0);
}

#[test]
fn trivially_encrypted_values_are_detected() {
    let cfg = preset("smoke").unwrap();
    let adv = cfg.adversary.clone().unwrap();
    let keys = KeyMaterial::generate(256, 1, 2, 5).unwrap();
    let pk = &keys.public;
    let ck = CommitmentKey::rfc2409_group2();
    let secret = BigUint::from(4242u32);
    let leaky = (BigUint::from(1u32) + &secret * pk.modulus()) % pk.modulus_squared();
    let msg = ProtocolMessage {
        sender: AGGREGATOR,
        recipient: *adv.corrupted.first().unwrap(),
        logical_timestamp: 0,
        body: MessageBody::DecryptionRequest {
            ciphertexts: vec![pk.ciphertext_from_value(leaky).unwrap()],
        },
    };
    let view = capture_view(&adv, &[msg]);
    let leaks = view.recover(pk, &ck, &[secret.clone(), BigUint::from(7u32)]);
    assert_eq!(leaks.len(), 1);
    assert_eq!(leaks[0].value, secret);
}
