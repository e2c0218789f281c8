//! Chains persisted as one compact JSON file per block, named by zero-padded height.

use std::fs;
use std::path::{Path, PathBuf};

use super::chain::{verify_chain, BreakReason, ChainVerification};
use super::Block;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("block file {path} (position {position}) is invalid: {reason}")]
    InvalidBlock { path: PathBuf, position: u64, reason: BreakReason },
}

pub fn block_file_name(height: u64) -> String {
    format!("{height:08}.json")
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_owned(), source }
}

/// Writes every block, removing block files beyond the chain's length.
pub fn save_chain_dir(dir: &Path, chain: &[Block]) -> Result<(), StoreError> {
    fs::create_dir_all(dir).map_err(io(dir))?;
    for block in chain {
        let path = dir.join(block_file_name(block.height));
        let bytes = serde_json::to_vec(block).expect("block serializes");
        fs::write(&path, bytes).map_err(io(&path))?;
    }
    for (i, path) in block_files(dir)?.into_iter().enumerate() {
        if i >= chain.len() {
            fs::remove_file(&path).map_err(io(&path))?;
        }
    }
    Ok(())
}

fn block_files(dir: &Path) -> Result<Vec<PathBuf>, StoreError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

/// Parses one block file strictly: the bytes must be exactly the canonical
/// serialization of the parsed block.
pub fn parse_block(bytes: &[u8]) -> Result<Block, BreakReason> {
    let block: Block = serde_json::from_slice(bytes).map_err(|e| BreakReason::Unreadable(e.to_string()))?;
    if serde_json::to_vec(&block).expect("block serializes") != bytes {
        return Err(BreakReason::NonCanonical);
    }
    Ok(block)
}

pub fn load_chain_dir(dir: &Path) -> Result<Vec<Block>, StoreError> {
    let mut chain = Vec::new();
    for (i, path) in block_files(dir)?.into_iter().enumerate() {
        let invalid = |reason| StoreError::InvalidBlock { path: path.clone(), position: i as u64, reason };
        if path.file_name().and_then(|n| n.to_str()) != Some(block_file_name(i as u64).as_str()) {
            return Err(invalid(BreakReason::HeightGap));
        }
        let bytes = fs::read(&path).map_err(io(&path))?;
        chain.push(parse_block(&bytes).map_err(invalid)?);
    }
    Ok(chain)
}

/// Loads and verifies a chain directory. Unparseable or non-canonical files are
/// reported as breaks at their position.
pub fn verify_chain_dir(dir: &Path) -> Result<ChainVerification, StoreError> {
    match load_chain_dir(dir) {
        Ok(chain) => Ok(verify_chain(&chain)),
        Err(StoreError::InvalidBlock { position, reason, .. }) => {
            Ok(ChainVerification::Broken { broken_at: position, reason })
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{seal, MessageCategory, WfMessage};
    use crate::crypto::{KeyRegistry, Keypair};
    use crate::ledger::LedgerNode;
    use chrono::{Duration, TimeZone, Utc};

    fn node_with(n: i64) -> LedgerNode {
        let t0 = Utc.with_ymd_and_hms(2026, 1, 5, 0, 0, 0).unwrap();
        let src = Keypair::derive("s");
        let mut reg = KeyRegistry::new();
        reg.register("s", src.public());
        let mut node = LedgerNode::with_block_size("n", Keypair::derive("n"), 2);
        for i in 0..n {
            let m = WfMessage::new("s", MessageCategory::DangerSign, 2, t0 + Duration::seconds(i)).at(1.0, 1.0, 1);
            node.append(seal(&m, &src, None).unwrap(), &reg, t0).unwrap();
        }
        node
    }

    #[test]
    fn save_load_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let node = node_with(5);
        save_chain_dir(dir.path(), node.chain()).unwrap();
        assert!(dir.path().join("00000002.json").exists());
        assert_eq!(load_chain_dir(dir.path()).unwrap(), node.chain());
        assert!(verify_chain_dir(dir.path()).unwrap().is_ok());
        // shrinking removes stale files
        save_chain_dir(dir.path(), &node.chain()[..1]).unwrap();
        assert_eq!(load_chain_dir(dir.path()).unwrap().len(), 1);
    }

    #[test]
    fn uppercase_hex_is_non_canonical() {
        let dir = tempfile::tempdir().unwrap();
        save_chain_dir(dir.path(), node_with(2).chain()).unwrap();
        let p = dir.path().join("00000000.json");
        let text = fs::read_to_string(&p).unwrap();
        let idx = text.find("\"block_hash\":\"").unwrap() + 14;
        let mut bytes = text.into_bytes();
        let pos = (idx..idx + 64).find(|&i| bytes[i].is_ascii_lowercase()).unwrap();
        bytes[pos] = bytes[pos].to_ascii_uppercase();
        fs::write(&p, bytes).unwrap();
        assert_eq!(verify_chain_dir(dir.path()).unwrap().broken_at(), Some(0));
    }
}
