//! On-disk formats: a JSON header or manifest next to a raw little-endian
//! symbol payload. Symbols take one byte when `m <= 8` and two otherwise.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::Elem;
use crate::model::{
    Block, BroadcastBatch, CacheContents, Label, Library, Message, MessageLabel, Scheme, SchemeConfig,
};

#[derive(Debug, Error)]
pub enum DumpError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("malformed dump: {0}")]
    Format(String),
}

pub fn symbol_width(degree: u32) -> usize {
    if degree <= 8 {
        1
    } else {
        2
    }
}

pub fn encode_symbols(symbols: &[Elem], degree: u32, out: &mut Vec<u8>) {
    if symbol_width(degree) == 1 {
        out.extend(symbols.iter().map(|&s| s as u8));
    } else {
        for s in symbols {
            out.extend_from_slice(&s.to_le_bytes());
        }
    }
}

pub fn decode_symbols(bytes: &[u8], degree: u32) -> Result<Vec<Elem>, DumpError> {
    let width = symbol_width(degree);
    if !bytes.len().is_multiple_of(width) {
        return Err(DumpError::Format(format!(
            "{} bytes is not a whole number of symbols",
            bytes.len()
        )));
    }
    let symbols: Vec<Elem> = if width == 1 {
        bytes.iter().map(|&b| b as Elem).collect()
    } else {
        bytes
            .chunks_exact(2)
            .map(|c| Elem::from_le_bytes([c[0], c[1]]))
            .collect()
    };
    let limit = 1u32 << degree;
    if let Some(bad) = symbols.iter().find(|&&s| u32::from(s) >= limit) {
        return Err(DumpError::Format(format!("symbol {bad} outside GF(2^{degree})")));
    }
    Ok(symbols)
}

/// Library header: `{C, r, t, N, m, f, seed}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LibraryHeader {
    #[serde(rename = "C")]
    pub caches: usize,
    pub r: usize,
    pub t: Option<usize>,
    #[serde(rename = "N")]
    pub files: usize,
    pub m: u32,
    pub f: usize,
    pub seed: Option<u64>,
}

impl LibraryHeader {
    pub fn for_config(config: &SchemeConfig, library: &Library) -> Self {
        Self {
            caches: config.caches(),
            r: config.access(),
            t: config.t_param(),
            files: config.files(),
            m: config.field_degree(),
            f: config.file_len(),
            seed: library.seed(),
        }
    }
}

/// Writes `header` as JSON and the files back to back as symbols.
pub fn write_library(
    config: &SchemeConfig,
    library: &Library,
    header: &Path,
    payload: &Path,
) -> Result<(), DumpError> {
    let h = LibraryHeader::for_config(config, library);
    fs::write(header, serde_json::to_string_pretty(&h)? + "\n")?;
    let mut bytes = Vec::new();
    for file in library.files() {
        encode_symbols(file, config.field_degree(), &mut bytes);
    }
    fs::write(payload, bytes)?;
    Ok(())
}

pub fn read_library(header: &Path, payload: &Path) -> Result<(LibraryHeader, Library), DumpError> {
    let h: LibraryHeader = serde_json::from_str(&fs::read_to_string(header)?)?;
    let symbols = decode_symbols(&fs::read(payload)?, h.m)?;
    if symbols.len() != h.files * h.f {
        return Err(DumpError::Format(format!(
            "payload holds {} symbols, header implies {}",
            symbols.len(),
            h.files * h.f
        )));
    }
    let files = if h.f == 0 {
        vec![Vec::new(); h.files]
    } else {
        symbols.chunks(h.f).map(<[Elem]>::to_vec).collect()
    };
    let lib = Library::from_files(files, h.seed).map_err(|e| DumpError::Format(e.to_string()))?;
    Ok((h, lib))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub label: Label,
    pub combination: Vec<(usize, Elem)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheHeader {
    pub id: usize,
    pub symbol_count: usize,
    pub payload: String,
    pub items: Vec<CacheEntry>,
}

/// Cache dump header; each cache's symbols live in their own payload file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheManifest {
    pub scheme: Scheme,
    pub config: SchemeConfig,
    pub caches: Vec<CacheHeader>,
}

/// Writes `caches.json` and `cache_<c>.bin` into `dir`.
pub fn write_caches(config: &SchemeConfig, contents: &CacheContents, dir: &Path) -> Result<(), DumpError> {
    fs::create_dir_all(dir)?;
    let mut headers = Vec::with_capacity(contents.caches.len());
    for cache in &contents.caches {
        let name = format!("cache_{}.bin", cache.id);
        let mut bytes = Vec::new();
        for item in &cache.items {
            encode_symbols(&item.block.data, config.field_degree(), &mut bytes);
        }
        fs::write(dir.join(&name), bytes)?;
        headers.push(CacheHeader {
            id: cache.id,
            symbol_count: cache.symbol_count(),
            payload: name,
            items: cache
                .items
                .iter()
                .map(|i| CacheEntry {
                    label: i.label.clone(),
                    combination: i.block.combination.clone(),
                })
                .collect(),
        });
    }
    let manifest = CacheManifest {
        scheme: contents.scheme,
        config: config.clone(),
        caches: headers,
    };
    fs::write(
        dir.join("caches.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(())
}

pub fn read_caches(dir: &Path) -> Result<(SchemeConfig, CacheContents), DumpError> {
    let manifest: CacheManifest = serde_json::from_str(&fs::read_to_string(dir.join("caches.json"))?)?;
    let config = manifest.config;
    let s = config.piece_len();
    let mut caches = Vec::with_capacity(manifest.caches.len());
    for h in manifest.caches {
        let symbols = decode_symbols(&fs::read(dir.join(&h.payload))?, config.field_degree())?;
        if symbols.len() != h.symbol_count || symbols.len() != h.items.len() * s {
            return Err(DumpError::Format(format!("cache {} payload size mismatch", h.id)));
        }
        let items = h
            .items
            .into_iter()
            .zip(symbols.chunks(s.max(1)))
            .map(|(e, data)| crate::model::StoredItem {
                label: e.label,
                block: Block {
                    combination: e.combination,
                    data: data.to_vec(),
                },
            })
            .collect();
        caches.push(crate::model::Cache { id: h.id, items });
    }
    Ok((
        config,
        CacheContents {
            scheme: manifest.scheme,
            caches,
        },
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockEntry {
    pub combination: Vec<(usize, Elem)>,
    /// Symbol offset into the payload.
    pub offset: usize,
    pub len: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageEntry {
    pub label: MessageLabel,
    pub blocks: Vec<BlockEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BroadcastManifest {
    pub m: u32,
    pub symbol_count: usize,
    pub messages: Vec<MessageEntry>,
}

pub fn write_broadcast(
    config: &SchemeConfig,
    batch: &BroadcastBatch,
    manifest: &Path,
    payload: &Path,
) -> Result<(), DumpError> {
    let mut bytes = Vec::new();
    let mut offset = 0;
    let mut messages = Vec::with_capacity(batch.messages.len());
    for m in &batch.messages {
        let mut blocks = Vec::with_capacity(m.blocks.len());
        for b in &m.blocks {
            encode_symbols(&b.data, config.field_degree(), &mut bytes);
            blocks.push(BlockEntry {
                combination: b.combination.clone(),
                offset,
                len: b.data.len(),
            });
            offset += b.data.len();
        }
        messages.push(MessageEntry {
            label: m.label.clone(),
            blocks,
        });
    }
    let man = BroadcastManifest {
        m: config.field_degree(),
        symbol_count: offset,
        messages,
    };
    fs::write(manifest, serde_json::to_string_pretty(&man)? + "\n")?;
    fs::write(payload, bytes)?;
    Ok(())
}

pub fn read_broadcast(manifest: &Path, payload: &Path) -> Result<BroadcastBatch, DumpError> {
    let man: BroadcastManifest = serde_json::from_str(&fs::read_to_string(manifest)?)?;
    let symbols = decode_symbols(&fs::read(payload)?, man.m)?;
    if symbols.len() != man.symbol_count {
        return Err(DumpError::Format(format!(
            "payload holds {} symbols, manifest says {}",
            symbols.len(),
            man.symbol_count
        )));
    }
    let mut messages = Vec::with_capacity(man.messages.len());
    for m in man.messages {
        let mut blocks = Vec::with_capacity(m.blocks.len());
        for b in m.blocks {
            let data = symbols
                .get(b.offset..b.offset + b.len)
                .ok_or_else(|| DumpError::Format("block outside payload".into()))?;
            blocks.push(Block {
                combination: b.combination,
                data: data.to_vec(),
            });
        }
        messages.push(Message {
            label: m.label,
            blocks,
        });
    }
    Ok(BroadcastBatch { messages })
}
