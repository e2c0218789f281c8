use std::collections::BTreeMap;

use aes_gcm::aead::{Aead, KeyInit, Payload};
use aes_gcm::{Aes256Gcm, Nonce};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{decode, encode, CodecError, WfMessage};
use crate::crypto::{decode_lower_hex, Digest, GroupKey, KeyRegistry, Keypair, Keyring, SignatureBytes};

const NONCE_LEN: usize = 12;

/// A signed message. When `encryption_group` is set, `canonical_bytes` hold
/// `nonce || AES-256-GCM ciphertext` instead of the plaintext encoding. The
/// digest always covers the plaintext canonical bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Envelope {
    pub originator_id: String,
    /// Sender-supplied send time, copied from the message so that ledgers can
    /// order envelopes they cannot decrypt.
    pub timestamp: DateTime<Utc>,
    #[serde(serialize_with = "ser_hex", deserialize_with = "de_hex")]
    pub canonical_bytes: Vec<u8>,
    pub digest: Digest,
    pub signature: SignatureBytes,
    pub encryption_group: Option<String>,
}

fn ser_hex<S: Serializer>(v: &[u8], s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&hex::encode(v))
}

fn de_hex<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
    decode_lower_hex(&String::deserialize(d)?).map_err(serde::de::Error::custom)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OpenError {
    #[error("envelope is encrypted for group `{0}` which this keyring cannot open")]
    OpaqueCiphertext(String),
    #[error("envelope body does not match its digest")]
    DigestMismatch,
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// Per-check outcome of [`verify`]. Never an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub signature_ok: bool,
    pub digest_ok: bool,
    pub originator_known: bool,
    /// False when the body is ciphertext this verifier cannot open; `digest_ok`
    /// is then false as well since the plaintext is unavailable.
    pub readable: bool,
}

impl VerificationReport {
    pub fn all_ok(&self) -> bool {
        self.signature_ok && self.digest_ok && self.originator_known
    }
}

fn cipher_for(key: &GroupKey) -> Aes256Gcm {
    Aes256Gcm::new_from_slice(&key.key).expect("32-byte key")
}

fn nonce_for(group_id: &str, digest: &Digest) -> [u8; NONCE_LEN] {
    let full = Digest::of_parts(&[b"pause-nonce", group_id.as_bytes(), digest.as_bytes()]);
    full.0[..NONCE_LEN].try_into().unwrap()
}

/// Signs `message` as its originator and optionally encrypts it for a group.
///
/// The nonce is derived from the group and the plaintext digest, so sealing is
/// deterministic: the same message sealed twice yields the same envelope.
pub fn seal(message: &WfMessage, key: &Keypair, group: Option<&GroupKey>) -> Result<Envelope, CodecError> {
    let digest = Digest::of(&encode(message)?);
    seal_signed(message, key.sign(digest.as_bytes()), group)
}

/// Wraps a message whose originator signed its digest elsewhere. The signature
/// is not checked here; ledgers verify it on append.
pub fn seal_signed(
    message: &WfMessage,
    signature: SignatureBytes,
    group: Option<&GroupKey>,
) -> Result<Envelope, CodecError> {
    let plain = encode(message)?;
    let digest = Digest::of(&plain);
    let (canonical_bytes, encryption_group) = match group {
        None => (plain, None),
        Some(g) => {
            let nonce = nonce_for(&g.group_id, &digest);
            let ct = cipher_for(g)
                .encrypt(Nonce::from_slice(&nonce), Payload { msg: &plain, aad: digest.as_bytes() })
                .expect("AES-GCM encryption of in-memory buffer");
            let mut body = nonce.to_vec();
            body.extend_from_slice(&ct);
            (body, Some(g.group_id.clone()))
        }
    };
    Ok(Envelope {
        originator_id: message.originator_id.clone(),
        timestamp: message.timestamp,
        canonical_bytes,
        digest,
        signature,
        encryption_group,
    })
}

/// Plaintext canonical bytes if this keyring can read the envelope.
fn plaintext(envelope: &Envelope, keyring: &Keyring) -> Result<Vec<u8>, OpenError> {
    match &envelope.encryption_group {
        None => Ok(envelope.canonical_bytes.clone()),
        Some(group) => {
            let key = keyring.get(group).ok_or_else(|| OpenError::OpaqueCiphertext(group.clone()))?;
            if envelope.canonical_bytes.len() < NONCE_LEN {
                return Err(OpenError::DigestMismatch);
            }
            let (nonce, ct) = envelope.canonical_bytes.split_at(NONCE_LEN);
            cipher_for(key)
                .decrypt(Nonce::from_slice(nonce), Payload { msg: ct, aad: envelope.digest.as_bytes() })
                .map_err(|_| OpenError::DigestMismatch)
        }
    }
}

/// Recovers the message, checking the digest and that the envelope's clear
/// header fields match the message.
pub fn open(envelope: &Envelope, keyring: &Keyring) -> Result<WfMessage, OpenError> {
    let plain = plaintext(envelope, keyring)?;
    if Digest::of(&plain) != envelope.digest {
        return Err(OpenError::DigestMismatch);
    }
    let message = decode(&plain)?;
    if message.originator_id != envelope.originator_id || message.timestamp != envelope.timestamp {
        return Err(OpenError::DigestMismatch);
    }
    Ok(message)
}

pub fn verify(envelope: &Envelope, registry: &KeyRegistry) -> VerificationReport {
    verify_with(envelope, registry, &Keyring::default())
}

pub fn verify_with(envelope: &Envelope, registry: &KeyRegistry, keyring: &Keyring) -> VerificationReport {
    let key = registry.get(&envelope.originator_id);
    let signature_ok = key.is_some_and(|k| k.verify(envelope.digest.as_bytes(), &envelope.signature));
    let (readable, digest_ok) = match open(envelope, keyring) {
        Ok(_) => (true, true),
        Err(OpenError::OpaqueCiphertext(_)) => (false, false),
        Err(_) => (true, false),
    };
    VerificationReport { signature_ok, digest_ok, originator_known: key.is_some(), readable }
}

/// Signing keys held by a sender, looked up by originator id.
#[derive(Debug, Clone, Default)]
pub struct SigningKeys {
    keys: BTreeMap<String, Keypair>,
}

impl SigningKeys {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: impl Into<String>, key: Keypair) {
        self.keys.insert(id.into(), key);
    }

    pub fn get(&self, id: &str) -> Option<&Keypair> {
        self.keys.get(id)
    }

    pub fn seal(&self, message: &WfMessage, group: Option<&GroupKey>) -> Result<Envelope, CodecError> {
        let key = self
            .keys
            .get(&message.originator_id)
            .ok_or_else(|| CodecError::UnknownKey(message.originator_id.clone()))?;
        seal(message, key, group)
    }

    /// Public half of every key, for registering with verifiers.
    pub fn registry(&self) -> KeyRegistry {
        let mut r = KeyRegistry::new();
        for (id, k) in &self.keys {
            r.register(id.clone(), k.public());
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::MessageCategory;
    use chrono::TimeZone;

    fn setup() -> (WfMessage, Keypair, KeyRegistry) {
        let m = WfMessage::new(
            "msf",
            MessageCategory::ProtectiveSign,
            6,
            Utc.with_ymd_and_hms(2026, 5, 2, 10, 30, 0).unwrap(),
        )
        .at(36.2, 37.15, 100);
        let k = Keypair::derive("msf");
        let mut reg = KeyRegistry::new();
        reg.register("msf", k.public());
        (m, k, reg)
    }

    #[test]
    fn sealed_envelope_verifies() {
        let (m, k, reg) = setup();
        let env = seal(&m, &k, None).unwrap();
        let r = verify(&env, &reg);
        assert!(r.all_ok() && r.readable);
        assert_eq!(open(&env, &Keyring::new()).unwrap(), m);
    }

    #[test]
    fn flipped_canonical_byte_fails() {
        let (m, k, reg) = setup();
        let mut env = seal(&m, &k, None).unwrap();
        env.canonical_bytes[3] ^= 0x01;
        let r = verify(&env, &reg);
        assert!(!r.digest_ok);
        assert!(!r.all_ok());
    }

    #[test]
    fn tampered_digest_breaks_digest_and_signature() {
        let (m, k, reg) = setup();
        let mut env = seal(&m, &k, None).unwrap();
        env.digest.0[0] ^= 0x80;
        let r = verify(&env, &reg);
        assert!(!r.digest_ok);
        assert!(!r.signature_ok);
    }

    #[test]
    fn unknown_originator() {
        let (m, k, _) = setup();
        let env = seal(&m, &k, None).unwrap();
        let r = verify(&env, &KeyRegistry::new());
        assert!(!r.originator_known);
        assert!(!r.signature_ok);
        assert!(r.digest_ok);
    }

    #[test]
    fn wrong_key_signature_rejected() {
        let (m, _, reg) = setup();
        let env = seal(&m, &Keypair::derive("impostor"), None).unwrap();
        assert!(!verify(&env, &reg).signature_ok);
    }

    #[test]
    fn group_encryption_members_and_outsiders() {
        let (m, k, reg) = setup();
        let g = GroupKey::derive("medical", "s3cret");
        let env = seal(&m, &k, Some(&g)).unwrap();
        assert_eq!(env.digest, m.digest().unwrap());
        assert!(!env.canonical_bytes.windows(3).any(|w| w == b"msf"));

        let member = Keyring::new().with(g.clone());
        assert_eq!(open(&env, &member).unwrap(), m);
        assert!(verify_with(&env, &reg, &member).all_ok());

        assert_eq!(open(&env, &Keyring::new()), Err(OpenError::OpaqueCiphertext("medical".into())));
        let outsider = verify(&env, &reg);
        assert!(outsider.signature_ok && !outsider.readable);

        let wrong = Keyring::new().with(GroupKey::derive("medical", "other"));
        assert_eq!(open(&env, &wrong), Err(OpenError::DigestMismatch));
    }

    #[test]
    fn sealing_is_deterministic() {
        let (m, k, _) = setup();
        let g = GroupKey::derive("g", "s");
        assert_eq!(seal(&m, &k, Some(&g)).unwrap(), seal(&m, &k, Some(&g)).unwrap());
    }

    #[test]
    fn signing_keys_report_unknown_key() {
        let (m, _, _) = setup();
        assert_eq!(SigningKeys::new().seal(&m, None), Err(CodecError::UnknownKey("msf".into())));
    }

    #[test]
    fn envelope_json_roundtrip() {
        let (m, k, _) = setup();
        let env = seal(&m, &k, None).unwrap();
        let json = serde_json::to_string(&env).unwrap();
        assert_eq!(serde_json::from_str::<Envelope>(&json).unwrap(), env);
    }
}
