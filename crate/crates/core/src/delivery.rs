//! Delivery-phase broadcasts and measured rates.

use thiserror::Error;

use crate::combinatorics::{choose, ksubsets, Rational, Subset};
use crate::gf::Elem;
use crate::model::{
    Block, BroadcastBatch, DemandVector, Library, Message, MessageLabel, Scheme, SchemeConfig, XorTerm,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DeliveryError {
    #[error("demand vector has {got} entries, expected {expected}")]
    DemandLength { expected: usize, got: usize },
    #[error("delivery {delivery} does not apply to a {actual:?} configuration")]
    WrongScheme { delivery: &'static str, actual: Scheme },
}

fn check_demands(config: &SchemeConfig, d: &DemandVector) -> Result<(), DeliveryError> {
    if d.as_slice().len() != config.users() {
        return Err(DeliveryError::DemandLength {
            expected: config.users(),
            got: d.as_slice().len(),
        });
    }
    Ok(())
}

/// Runs the delivery matching `config.scheme()`. The corner scheme sends nothing.
pub fn deliver(
    config: &SchemeConfig,
    library: &Library,
    d: &DemandVector,
) -> Result<BroadcastBatch, DeliveryError> {
    match config.scheme() {
        Scheme::Mkr | Scheme::Scheme1 => deliver_xor(config, library, d),
        Scheme::Corner => {
            check_demands(config, d)?;
            Ok(BroadcastBatch::default())
        }
        Scheme::Scheme2 => deliver_scheme2(config, library, d),
    }
}

/// One message per `(t + r)`-subset `S`, in lexicographic order:
/// the XOR over `r`-subsets `U` of `S` of `W_{d_U, S \ U}`.
///
/// Each message carries one block per mini-subfile.
pub fn deliver_xor(
    config: &SchemeConfig,
    library: &Library,
    d: &DemandVector,
) -> Result<BroadcastBatch, DeliveryError> {
    if !matches!(config.scheme(), Scheme::Mkr | Scheme::Scheme1) {
        return Err(DeliveryError::WrongScheme {
            delivery: "xor",
            actual: config.scheme(),
        });
    }
    check_demands(config, d)?;
    let (c, r, t) = (config.caches(), config.access(), config.t());
    let mut messages = Vec::new();
    for s in ksubsets(c, t + r) {
        let terms: Vec<XorTerm> = ksubsets(t + r, r)
            .into_iter()
            .map(|local| {
                let user = Subset::new(c, local.members().iter().map(|&i| s.members()[i - 1]).collect())
                    .expect("members of S");
                let subfile = s.difference(&user);
                XorTerm {
                    file: d.of(&user),
                    user,
                    subfile,
                }
            })
            .collect();
        let blocks = (0..config.pieces_per_subfile())
            .map(|j| {
                let mut pieces: Vec<usize> = terms
                    .iter()
                    .map(|term| config.subfile_piece(term.file, &term.subfile, j))
                    .collect();
                pieces.sort_unstable();
                let mut data = vec![0 as Elem; config.piece_len()];
                for &p in &pieces {
                    for (x, y) in data.iter_mut().zip(library.piece(config, p)) {
                        *x ^= y;
                    }
                }
                Block {
                    combination: pieces.into_iter().map(|p| (p, 1)).collect(),
                    data,
                }
            })
            .collect();
        messages.push(Message {
            label: MessageLabel::Xor { set: s, terms },
            blocks,
        });
    }
    Ok(BroadcastBatch { messages })
}

fn subfile_message(config: &SchemeConfig, library: &Library, file: usize, position: usize) -> Message {
    let piece = config.piece(file, position - 1);
    Message {
        label: MessageLabel::SubfilePiece { file, position },
        blocks: vec![Block {
            combination: vec![(piece, 1)],
            data: library.piece(config, piece).to_vec(),
        }],
    }
}

/// Uncoded delivery for the cross-file parity placement.
///
/// When at most `binom(C-1, r)` distinct files are demanded they are sent
/// whole. Otherwise, for each position `i`, the `i`-th subfiles of the files
/// demanded by users avoiding cache `i` are sent, padded with the
/// lowest-indexed remaining files up to `binom(C-1, r)`; files ascend within
/// each position.
pub fn deliver_scheme2(
    config: &SchemeConfig,
    library: &Library,
    d: &DemandVector,
) -> Result<BroadcastBatch, DeliveryError> {
    if config.scheme() != Scheme::Scheme2 {
        return Err(DeliveryError::WrongScheme {
            delivery: "scheme2",
            actual: config.scheme(),
        });
    }
    check_demands(config, d)?;
    let (c, r) = (config.caches(), config.access());
    let budget = choose(c - 1, r);
    let distinct = d.distinct();
    if distinct.len() <= budget {
        let messages = distinct
            .into_iter()
            .map(|file| Message {
                label: MessageLabel::WholeFile { file },
                blocks: (0..config.subpacketization())
                    .map(|j| {
                        let piece = config.piece(file, j);
                        Block {
                            combination: vec![(piece, 1)],
                            data: library.piece(config, piece).to_vec(),
                        }
                    })
                    .collect(),
            })
            .collect();
        return Ok(BroadcastBatch { messages });
    }
    let users = config.user_sets();
    let mut messages = Vec::with_capacity(c * budget);
    for i in 1..=c {
        let mut files: Vec<usize> = users.iter().filter(|u| !u.contains(i)).map(|u| d.of(u)).collect();
        files.sort_unstable();
        files.dedup();
        let pad: Vec<usize> = (1..=config.files())
            .filter(|n| !files.contains(n))
            .take(budget - files.len())
            .collect();
        files.extend(pad);
        files.sort_unstable();
        messages.extend(files.into_iter().map(|n| subfile_message(config, library, n, i)));
    }
    Ok(BroadcastBatch { messages })
}

/// Transmitted symbols over `f`, exactly.
pub fn measured_rate(batch: &BroadcastBatch, file_len: usize) -> Rational {
    Rational::from(batch.symbol_count()) / Rational::from(file_len)
}
