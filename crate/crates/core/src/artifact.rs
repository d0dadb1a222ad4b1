//! Self-describing model files.
//!
//! ```text
//! "CARDNETM" | format version: u32 LE | header length: u32 LE | header JSON | parameters
//! ```
//!
//! The JSON header records the model kind, scalar type, a config snapshot,
//! kind-specific extras (vocabulary, alphabet) and the name and length of
//! each parameter tensor. Parameters follow as little-endian scalars in
//! header order.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::nn::Parameters;
use crate::scalar::Scalar;

pub const ARTIFACT_MAGIC: &[u8; 8] = b"CARDNETM";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamEntry {
    pub name: String,
    pub len: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArtifactHeader {
    pub kind: String,
    pub scalar: String,
    pub config: serde_json::Value,
    #[serde(default)]
    pub extra: serde_json::Value,
    pub params: Vec<ParamEntry>,
}

pub fn encode_artifact<T: Scalar>(
    kind: &str,
    config: serde_json::Value,
    extra: serde_json::Value,
    params: &[(String, &[T])],
) -> Vec<u8> {
    let header = ArtifactHeader {
        kind: kind.to_string(),
        scalar: T::NAME.to_string(),
        config,
        extra,
        params: params
            .iter()
            .map(|(name, s)| ParamEntry {
                name: name.clone(),
                len: s.len(),
            })
            .collect(),
    };
    let header = serde_json::to_vec(&header).expect("header serializes");
    let total: usize = params.iter().map(|(_, s)| s.len()).sum();
    let mut out = Vec::with_capacity(16 + header.len() + total * T::BYTES);
    out.extend_from_slice(ARTIFACT_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    for (_, slice) in params {
        for &v in slice.iter() {
            v.write_le(&mut out);
        }
    }
    out
}

/// Splits an artifact into its header and parameter payload.
pub fn decode_artifact(bytes: &[u8]) -> Result<(ArtifactHeader, &[u8])> {
    if bytes.len() < 16 || &bytes[..8] != ARTIFACT_MAGIC {
        return Err(Error::Artifact("not a model artifact (bad magic)".into()));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::Artifact(format!("unsupported format version {version}")));
    }
    let len = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let header_end = 16usize
        .checked_add(len)
        .filter(|e| *e <= bytes.len())
        .ok_or_else(|| Error::Artifact("truncated header".into()))?;
    let header: ArtifactHeader = serde_json::from_slice(&bytes[16..header_end])?;
    Ok((header, &bytes[header_end..]))
}

/// Checks kind and scalar tag, then copies the payload into `target`,
/// whose parameter names and sizes must match the header.
pub fn fill_params<T: Scalar, P: Parameters<T>>(
    header: &ArtifactHeader,
    payload: &[u8],
    expected_kind: &str,
    target: &mut P,
) -> Result<()> {
    if header.kind != expected_kind {
        return Err(Error::Artifact(format!(
            "expected a `{expected_kind}` artifact, found `{}`",
            header.kind
        )));
    }
    if header.scalar != T::NAME {
        return Err(Error::Artifact(format!(
            "artifact stores {} parameters, loader expects {}",
            header.scalar,
            T::NAME
        )));
    }
    let names: Vec<(String, usize)> = target.param_slices().into_iter().map(|(n, s)| (n, s.len())).collect();
    if names.len() != header.params.len()
        || names.iter().zip(&header.params).any(|((n, l), e)| *n != e.name || *l != e.len)
    {
        return Err(Error::Artifact("parameter layout does not match the stored config".into()));
    }
    let total: usize = names.iter().map(|(_, l)| l).sum();
    if payload.len() != total * T::BYTES {
        return Err(Error::Artifact(format!(
            "payload has {} bytes, expected {}",
            payload.len(),
            total * T::BYTES
        )));
    }
    let mut chunks = payload.chunks_exact(T::BYTES);
    for slot in target.param_slices_mut() {
        for v in slot.iter_mut() {
            *v = T::read_le(chunks.next().expect("length checked"));
        }
    }
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
