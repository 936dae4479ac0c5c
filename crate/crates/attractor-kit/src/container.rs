//! ACTV1 activation containers.
//!
//! Layout: `b"ACTV"`, version byte `0x01`, a little-endian `u32` header
//! length `H`, `H` bytes of compact JSON with sorted keys, then the payload
//! of `N·L·d` little-endian `f32` values in prompt, layer, dim order.

use std::fs;
use std::io;
use std::path::Path;

use attractor_core::{ActivationSet, PromptMeta};
use serde::{Deserialize, Serialize};

use crate::io::write_atomic;

pub const MAGIC: &[u8; 4] = b"ACTV";
pub const VERSION: u8 = 1;
const PREFIX_LEN: usize = 9;

#[derive(Debug, thiserror::Error)]
pub enum ContainerError {
    #[error("not an ACTV1 container: {0}")]
    BadMagic(String),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("header does not match content: {0}")]
    HeaderMismatch(String),
    #[error("non-finite value at prompt {prompt}, layer slot {slot}, dim {dim}")]
    NonFinite { prompt: usize, slot: usize, dim: usize },
    #[error("duplicate prompt id `{0}`")]
    DuplicatePromptId(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl ContainerError {
    pub fn name(&self) -> &'static str {
        match self {
            ContainerError::BadMagic(_) => "BadMagic",
            ContainerError::MalformedHeader(_) => "MalformedHeader",
            ContainerError::HeaderMismatch(_) => "HeaderMismatch",
            ContainerError::NonFinite { .. } => "NonFinite",
            ContainerError::DuplicatePromptId(_) => "DuplicatePromptId",
            ContainerError::Io(_) => "IoFailure",
        }
    }
}

impl From<attractor_core::Error> for ContainerError {
    fn from(e: attractor_core::Error) -> Self {
        use attractor_core::Error as E;
        match e {
            E::NonFinite { prompt, slot, dim } => ContainerError::NonFinite { prompt, slot, dim },
            E::DuplicatePromptId(id) => ContainerError::DuplicatePromptId(id),
            E::InvalidShape(msg) => ContainerError::HeaderMismatch(msg),
            other => ContainerError::MalformedHeader(other.to_string()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PromptHeader {
    concept: String,
    id: String,
    text_digest: String,
    token_count: u32,
}

// fields in lexicographic order so the derived serializer emits sorted keys
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    dtype: String,
    hidden_dim: usize,
    layer_indices: Vec<u32>,
    num_layers: usize,
    num_prompts: usize,
    prompts: Vec<PromptHeader>,
}

/// Serializes a validated set. Identical sets always give identical bytes.
pub fn encode(set: &ActivationSet) -> Result<Vec<u8>, ContainerError> {
    set.validate()?;
    let header = Header {
        dtype: "f32".into(),
        hidden_dim: set.hidden_dim(),
        layer_indices: set.layer_indices().to_vec(),
        num_layers: set.num_layers(),
        num_prompts: set.num_prompts(),
        prompts: set
            .prompts()
            .iter()
            .map(|p| PromptHeader {
                concept: p.concept.clone(),
                id: p.id.clone(),
                text_digest: hex::encode(p.text_digest),
                token_count: p.token_count,
            })
            .collect(),
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let header_len =
        u32::try_from(json.len()).map_err(|_| ContainerError::MalformedHeader("header longer than 4 GiB".into()))?;
    let mut out = Vec::with_capacity(PREFIX_LEN + json.len() + set.data().len() * 4);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&header_len.to_le_bytes());
    out.extend_from_slice(&json);
    for v in set.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

/// Parses and fully validates a container.
pub fn decode(bytes: &[u8]) -> Result<ActivationSet, ContainerError> {
    if bytes.len() < PREFIX_LEN || &bytes[..4] != MAGIC {
        return Err(ContainerError::BadMagic("missing ACTV signature".into()));
    }
    if bytes[4] != VERSION {
        return Err(ContainerError::BadMagic(format!("unsupported version {}", bytes[4])));
    }
    let header_len = u32::from_le_bytes(bytes[5..9].try_into().expect("four bytes")) as usize;
    let payload_start = PREFIX_LEN
        .checked_add(header_len)
        .filter(|&end| end <= bytes.len())
        .ok_or_else(|| {
            ContainerError::HeaderMismatch(format!(
                "declared header length {header_len} exceeds the {} bytes present",
                bytes.len() - PREFIX_LEN
            ))
        })?;
    let header: Header = serde_json::from_slice(&bytes[PREFIX_LEN..payload_start])
        .map_err(|e| ContainerError::MalformedHeader(e.to_string()))?;
    if header.dtype != "f32" {
        return Err(ContainerError::MalformedHeader(format!(
            "unsupported dtype `{}`",
            header.dtype
        )));
    }
    if header.num_prompts != header.prompts.len() {
        return Err(ContainerError::HeaderMismatch(format!(
            "num_prompts is {} but {} prompts are listed",
            header.num_prompts,
            header.prompts.len()
        )));
    }
    if header.num_layers != header.layer_indices.len() {
        return Err(ContainerError::HeaderMismatch(format!(
            "num_layers is {} but {} layer indices are listed",
            header.num_layers,
            header.layer_indices.len()
        )));
    }
    if header.num_prompts == 0 || header.num_layers == 0 || header.hidden_dim == 0 {
        return Err(ContainerError::MalformedHeader(
            "every dimension must be at least 1".into(),
        ));
    }

    let payload = &bytes[payload_start..];
    let expected = header
        .num_prompts
        .checked_mul(header.num_layers)
        .and_then(|x| x.checked_mul(header.hidden_dim))
        .and_then(|x| x.checked_mul(4));
    if expected != Some(payload.len()) {
        return Err(ContainerError::HeaderMismatch(format!(
            "shape ({}, {}, {}) does not match a payload of {} bytes",
            header.num_prompts,
            header.num_layers,
            header.hidden_dim,
            payload.len()
        )));
    }

    let prompts = header
        .prompts
        .into_iter()
        .map(|p| {
            let mut digest = [0u8; 32];
            hex::decode_to_slice(&p.text_digest, &mut digest)
                .map_err(|e| ContainerError::MalformedHeader(format!("text_digest of prompt `{}`: {e}", p.id)))?;
            Ok(PromptMeta {
                id: p.id,
                concept: p.concept,
                text_digest: digest,
                token_count: p.token_count,
            })
        })
        .collect::<Result<Vec<_>, ContainerError>>()?;
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("four bytes")))
        .collect();
    Ok(ActivationSet::new(
        header.layer_indices,
        header.hidden_dim,
        prompts,
        data,
    )?)
}

pub fn read_container(path: impl AsRef<Path>) -> Result<ActivationSet, ContainerError> {
    decode(&fs::read(path)?)
}

/// Validates, encodes and atomically replaces `path`.
pub fn write_container(set: &ActivationSet, path: impl AsRef<Path>) -> Result<(), ContainerError> {
    let bytes = encode(set)?;
    write_atomic(path.as_ref(), &bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ActivationSet {
        let prompts = vec![PromptMeta::new("a", "x"), PromptMeta::new("b", "y")];
        let data = (0..24).map(|i| i as f32 * 0.5).collect();
        ActivationSet::new(vec![0, 3, 7], 4, prompts, data).unwrap()
    }

    #[test]
    fn header_is_sorted_and_compact() {
        let bytes = encode(&small()).unwrap();
        let h = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
        let text = std::str::from_utf8(&bytes[9..9 + h]).unwrap();
        assert!(text.starts_with(r#"{"dtype":"f32","hidden_dim":4,"layer_indices":[0,3,7],"num_layers":3,"num_prompts":2,"prompts":[{"concept":"x","id":"a","text_digest":"00"#));
        assert!(!text.contains(' '));
    }

    #[test]
    fn offset_law() {
        let set = small();
        let bytes = encode(&set).unwrap();
        let h = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
        let (i, j, d) = (1, 2, 4);
        let off = 9 + h + ((i * 3 + j) * d) * 4;
        let v = f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
        assert_eq!(v, set.vector(i, j)[0]);
    }
}
