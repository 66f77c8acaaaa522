//! Per-user decoders and a scheme-agnostic linear oracle.
//!
//! The structured decoders follow each scheme's recovery procedure and check
//! the expected number of known coded pieces after every stage. The oracle
//! ignores labels beyond their linear combinations: it row-reduces every
//! accessible symbol and reports whether the target file is pinned down.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combinatorics::{choose, factorial, ksubsets, phi, Subset};
use crate::gf::{Elem, Field, Insertion, RowReducer};
use crate::mds::MdsCode;
use crate::model::{BroadcastBatch, CacheContents, Label, MessageLabel, Scheme, SchemeConfig, StoredItem};
use crate::placement::{
    corner_code, scheme1_base_code, scheme1_round_codes, scheme1_round_plan, scheme2_code,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("user {user} undecodable at {stage}: {detail}")]
    Undecodable {
        user: String,
        stage: String,
        detail: String,
    },
    #[error("decoder {decoder:?} does not apply to a {actual:?} configuration")]
    WrongScheme { decoder: Scheme, actual: Scheme },
}

fn fail(user: &Subset, stage: impl Into<String>, detail: impl Into<String>) -> DecodeError {
    DecodeError::Undecodable {
        user: user.to_string(),
        stage: stage.into(),
        detail: detail.into(),
    }
}

fn expect_scheme(config: &SchemeConfig, decoder: Scheme) -> Result<(), DecodeError> {
    if config.scheme() != decoder {
        return Err(DecodeError::WrongScheme {
            decoder,
            actual: config.scheme(),
        });
    }
    Ok(())
}

/// Number of subfiles (over all files) known after a named stage.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCount {
    pub stage: String,
    pub decoded_subfiles: usize,
}

/// A recovered file and the progress recorded on the way.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoded {
    pub file: Vec<Elem>,
    pub stages: Vec<StageCount>,
}

type ParityKey = (usize, usize, usize, usize);

/// Runs the structured decoder matching `config.scheme()`.
pub fn decode_user(
    config: &SchemeConfig,
    caches: &CacheContents,
    batch: &BroadcastBatch,
    user: &Subset,
    file: usize,
) -> Result<Decoded, DecodeError> {
    match config.scheme() {
        Scheme::Mkr => decode_mkr_user(config, caches, batch, user, file),
        Scheme::Scheme1 | Scheme::Corner => decode_scheme1_user(config, caches, batch, user, file),
        Scheme::Scheme2 => decode_scheme2_user(config, caches, batch, user, file),
    }
}

/// Subfiles as lists of mini-subfile symbol vectors, keyed by `(file, subset rank)`.
type SubfileStore = HashMap<(usize, usize), Vec<Vec<Elem>>>;

/// Recovers the demanded file: cached subfiles are read directly, the rest
/// come from peeling the XOR message for `U + T` with already-decoded subfiles.
fn finish_by_peeling(
    config: &SchemeConfig,
    batch: &BroadcastBatch,
    user: &Subset,
    file: usize,
    store: &SubfileStore,
) -> Result<Vec<Elem>, DecodeError> {
    let mut by_set: HashMap<&Subset, usize> = HashMap::new();
    for (i, m) in batch.messages.iter().enumerate() {
        if let MessageLabel::Xor { set, .. } = &m.label {
            by_set.insert(set, i);
        }
    }
    let pieces = config.pieces_per_subfile();
    let mut out = Vec::with_capacity(config.file_len());
    for t in ksubsets(config.caches(), config.t()) {
        if !t.is_disjoint(user) {
            let sub = store.get(&(file, t.rank())).ok_or_else(|| {
                fail(
                    user,
                    "cache",
                    format!("subfile W_{{{file},{}}} not recovered", t.compact()),
                )
            })?;
            out.extend(sub.iter().flatten());
            continue;
        }
        let s = user.union(&t);
        let msg = by_set
            .get(&s)
            .map(|&i| &batch.messages[i])
            .ok_or_else(|| fail(user, "delivery", format!("no message for S={s}")))?;
        let MessageLabel::Xor { terms, .. } = &msg.label else {
            unreachable!()
        };
        if msg.blocks.len() != pieces {
            return Err(fail(
                user,
                "delivery",
                format!("message for S={s} has {} blocks", msg.blocks.len()),
            ));
        }
        let own = terms.iter().find(|term| &term.user == user).ok_or_else(|| {
            fail(
                user,
                "delivery",
                format!("message for S={s} has no term for this user"),
            )
        })?;
        if own.file != file || own.subfile != t {
            return Err(fail(
                user,
                "delivery",
                format!("message for S={s} carries the wrong term"),
            ));
        }
        let mut acc: Vec<Vec<Elem>> = msg.blocks.iter().map(|b| b.data.clone()).collect();
        for term in terms.iter().filter(|term| &term.user != user) {
            let known = store.get(&(term.file, term.subfile.rank())).ok_or_else(|| {
                fail(
                    user,
                    "delivery",
                    format!(
                        "interference W_{{{},{}}} unknown",
                        term.file,
                        term.subfile.compact()
                    ),
                )
            })?;
            for (a, k) in acc.iter_mut().zip(known) {
                for (x, y) in a.iter_mut().zip(k) {
                    *x ^= y;
                }
            }
        }
        out.extend(acc.into_iter().flatten());
    }
    Ok(out)
}

/// Uncoded placement, XOR delivery.
pub fn decode_mkr_user(
    config: &SchemeConfig,
    caches: &CacheContents,
    batch: &BroadcastBatch,
    user: &Subset,
    file: usize,
) -> Result<Decoded, DecodeError> {
    expect_scheme(config, Scheme::Mkr)?;
    let mut store = SubfileStore::new();
    for (_, item) in caches.accessible(user) {
        if let Label::Subfile { file: n, subset } = &item.label {
            store.insert((*n, subset.rank()), vec![item.block.data.clone()]);
        }
    }
    let mut stages = vec![StageCount {
        stage: "cache".into(),
        decoded_subfiles: store.len(),
    }];
    let out = finish_by_peeling(config, batch, user, file, &store)?;
    stages.push(StageCount {
        stage: "delivery".into(),
        decoded_subfiles: store.len() + choose(config.caches() - config.access(), config.t()),
    });
    Ok(Decoded { file: out, stages })
}

/// Known coded mini-subfiles per subfile, keyed by `(file, subset rank)`, then 1-based index.
type CodedStore = HashMap<(usize, usize), BTreeMap<usize, Vec<Elem>>>;

struct Scheme1State<'a> {
    config: &'a SchemeConfig,
    user: &'a Subset,
    gf: Field,
    base: MdsCode,
    subsets: Vec<Subset>,
    coded: CodedStore,
    decoded: SubfileStore,
}

impl Scheme1State<'_> {
    fn known_count(&self, n: usize, t: &Subset) -> usize {
        self.coded.get(&(n, t.rank())).map_or(0, BTreeMap::len)
    }

    /// Decodes every subfile with at least `r~!` known coded mini-subfiles.
    /// Returns the overlaps `|T & U|` of the newly decoded subfiles.
    fn decode_ready(&mut self, stage: &str) -> Result<Vec<usize>, DecodeError> {
        let full = self.base.k();
        let mut overlaps = Vec::new();
        for n in 1..=self.config.files() {
            for t in &self.subsets {
                let key = (n, t.rank());
                if self.decoded.contains_key(&key) || self.known_count(n, t) < full {
                    continue;
                }
                let known = &self.coded[&key];
                let blocks: Vec<(usize, &[Elem])> = known
                    .iter()
                    .take(full)
                    .map(|(&l, v)| (l - 1, v.as_slice()))
                    .collect();
                let pieces = self
                    .base
                    .erasure_decode_blocks(&blocks, &self.gf)
                    .map_err(|e| fail(self.user, stage, format!("W_{{{n},{}}}: {e}", t.compact())))?;
                let refs: Vec<&[Elem]> = pieces.iter().map(Vec::as_slice).collect();
                let all = self
                    .base
                    .encode_blocks(&refs, &self.gf)
                    .map_err(|e| fail(self.user, stage, e.to_string()))?;
                self.coded.insert(
                    key,
                    all.into_iter().enumerate().map(|(i, v)| (i + 1, v)).collect(),
                );
                self.decoded.insert(key, pieces);
                overlaps.push(t.intersection_len(self.user));
            }
        }
        Ok(overlaps)
    }

    /// After round `beta`, an undecoded subfile meeting the user in `gamma`
    /// caches holds exactly `r~! gamma / (r~ - beta)` coded mini-subfiles.
    fn check_counts(&self, beta: usize, stage: &str) -> Result<(), DecodeError> {
        let rt = self.config.r_tilde();
        let full = factorial(rt);
        for n in 1..=self.config.files() {
            for t in &self.subsets {
                if self.decoded.contains_key(&(n, t.rank())) {
                    continue;
                }
                let gamma = t.intersection_len(self.user);
                let want = full * gamma / (rt - beta);
                let got = self.known_count(n, t);
                if got != want {
                    return Err(fail(
                        self.user,
                        stage,
                        format!(
                            "W_{{{n},{}}} has {got} coded mini-subfiles, expected {want}",
                            t.compact()
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    fn check_overlaps(&self, overlaps: &[usize], gamma: usize, stage: &str) -> Result<(), DecodeError> {
        let per_file = self
            .subsets
            .iter()
            .filter(|t| t.intersection_len(self.user) == gamma)
            .count();
        if overlaps.len() != per_file * self.config.files() || overlaps.iter().any(|&g| g != gamma) {
            return Err(fail(
                self.user,
                stage,
                format!(
                    "decoded {} subfiles with overlaps {overlaps:?}, expected all {} with overlap {gamma}",
                    overlaps.len(),
                    per_file * self.config.files()
                ),
            ));
        }
        Ok(())
    }
}

/// Multi-round coded placement, XOR delivery. Dispatches to the corner
/// decoder when `t = C - r + 1`.
pub fn decode_scheme1_user(
    config: &SchemeConfig,
    caches: &CacheContents,
    batch: &BroadcastBatch,
    user: &Subset,
    file: usize,
) -> Result<Decoded, DecodeError> {
    if config.scheme() == Scheme::Corner {
        return decode_corner_user(config, caches, user, file);
    }
    expect_scheme(config, Scheme::Scheme1)?;
    let gf = config.field();
    let err = |e: crate::placement::PlacementError| fail(user, "setup", e.to_string());
    let plans = scheme1_round_plan(config.caches(), config.access(), config.t()).map_err(err)?;
    let round_codes = scheme1_round_codes(config, &gf).map_err(err)?;
    let mut st = Scheme1State {
        config,
        user,
        base: scheme1_base_code(config, &gf).map_err(err)?,
        gf,
        subsets: ksubsets(config.caches(), config.t()),
        coded: CodedStore::new(),
        decoded: SubfileStore::new(),
    };
    let rt = config.r_tilde();
    // (file, cache, round, ell) -> column -> parity data.
    let mut parities: HashMap<ParityKey, BTreeMap<usize, &[Elem]>> = HashMap::new();
    for (_, item) in caches.accessible(user) {
        match &item.label {
            Label::Coded {
                file: n,
                subset,
                index,
            } => {
                st.coded
                    .entry((*n, subset.rank()))
                    .or_default()
                    .insert(*index, item.block.data.clone());
            }
            Label::Parity {
                file: n,
                cache,
                round,
                ell,
                column,
            } => {
                parities
                    .entry((*n, *cache, *round, *ell))
                    .or_default()
                    .insert(*column, item.block.data.as_slice());
            }
            _ => {}
        }
    }

    let mut stages = Vec::new();
    st.check_counts(0, "round 0")?;
    let overlaps = st.decode_ready("round 0")?;
    st.check_overlaps(&overlaps, rt, "round 0")?;
    stages.push(StageCount {
        stage: "round 0".into(),
        decoded_subfiles: st.decoded.len(),
    });

    for (plan, code) in plans.iter().skip(1).zip(&round_codes) {
        let beta = plan.round;
        let stage = format!("round {beta}");
        for &c in user.members() {
            let with_c: Vec<&Subset> = st.subsets.iter().filter(|t| t.contains(c)).collect();
            for ell in 1..=plan.block_len {
                for n in 1..=config.files() {
                    let slot = |t: &Subset| *plan.indices(phi(c, t).expect("member")).start() + ell - 1;
                    let mut known: Vec<(usize, &[Elem])> = Vec::with_capacity(plan.info_len);
                    for (i, t) in with_c.iter().enumerate() {
                        if st.decoded.contains_key(&(n, t.rank())) {
                            known.push((i, st.coded[&(n, t.rank())][&slot(t)].as_slice()));
                        }
                    }
                    if known.len() != plan.known {
                        return Err(fail(
                            user,
                            stage.as_str(),
                            format!(
                                "cache {c}, ell {ell}, file {n}: {} known information symbols, expected {}",
                                known.len(),
                                plan.known
                            ),
                        ));
                    }
                    let par = parities.get(&(n, c, beta, ell));
                    if par.map_or(0, BTreeMap::len) != plan.parity_len {
                        return Err(fail(
                            user,
                            stage.as_str(),
                            format!("cache {c}, ell {ell}, file {n}: parities missing"),
                        ));
                    }
                    if let Some(par) = par {
                        known.extend(par.iter().map(|(&col, &v)| (plan.info_len + col - 1, v)));
                    }
                    let info = code.erasure_decode_blocks(&known, &st.gf).map_err(|e| {
                        fail(
                            user,
                            stage.as_str(),
                            format!("cache {c}, ell {ell}, file {n}: {e}"),
                        )
                    })?;
                    for (t, y) in with_c.iter().zip(info) {
                        let key = (n, t.rank());
                        if !st.decoded.contains_key(&key) {
                            st.coded.entry(key).or_default().insert(slot(t), y);
                        }
                    }
                }
            }
        }
        let overlaps = st.decode_ready(&stage)?;
        st.check_overlaps(&overlaps, rt - beta, &stage)?;
        st.check_counts(beta, &stage)?;
        stages.push(StageCount {
            stage,
            decoded_subfiles: st.decoded.len(),
        });
    }

    let meeting = st.subsets.iter().filter(|t| !t.is_disjoint(user)).count();
    if st.decoded.len() != meeting * config.files() {
        return Err(fail(
            user,
            "placement",
            format!(
                "{} subfiles decoded from caches, expected {}",
                st.decoded.len(),
                meeting * config.files()
            ),
        ));
    }
    let out = finish_by_peeling(config, batch, user, file, &st.decoded)?;
    stages.push(StageCount {
        stage: "delivery".into(),
        decoded_subfiles: st.decoded.len() + (st.subsets.len() - meeting),
    });
    Ok(Decoded { file: out, stages })
}

/// `t = C - r + 1`: the user's `r` coded columns decode every file.
pub fn decode_corner_user(
    config: &SchemeConfig,
    caches: &CacheContents,
    user: &Subset,
    file: usize,
) -> Result<Decoded, DecodeError> {
    expect_scheme(config, Scheme::Corner)?;
    let gf = config.field();
    let code = corner_code(config, &gf).map_err(|e| fail(user, "setup", e.to_string()))?;
    let mut columns: BTreeMap<usize, Vec<(usize, &[Elem])>> = BTreeMap::new();
    for (_, item) in caches.accessible(user) {
        if let Label::CornerCoded { file: n, column } = &item.label {
            columns
                .entry(*n)
                .or_default()
                .push((column - 1, item.block.data.as_slice()));
        }
    }
    let mut out = None;
    for n in 1..=config.files() {
        let known = columns.get(&n).map(Vec::as_slice).unwrap_or_default();
        let pieces = code
            .erasure_decode_blocks(known, &gf)
            .map_err(|e| fail(user, "corner", format!("file {n}: {e}")))?;
        if n == file {
            out = Some(pieces.concat());
        }
    }
    Ok(Decoded {
        file: out.ok_or_else(|| fail(user, "corner", format!("file {file} out of range")))?,
        stages: vec![StageCount {
            stage: "corner".into(),
            decoded_subfiles: config.files() * config.access(),
        }],
    })
}

/// Cross-file parity placement, uncoded delivery.
pub fn decode_scheme2_user(
    config: &SchemeConfig,
    caches: &CacheContents,
    batch: &BroadcastBatch,
    user: &Subset,
    file: usize,
) -> Result<Decoded, DecodeError> {
    expect_scheme(config, Scheme::Scheme2)?;
    let c_total = config.caches();
    let mut sent: HashMap<(usize, usize), &[Elem]> = HashMap::new();
    for m in &batch.messages {
        match m.label {
            MessageLabel::WholeFile { file: n } if n == file => {
                if m.blocks.len() != c_total {
                    return Err(fail(
                        user,
                        "whole file",
                        format!("file {n} sent in {} blocks", m.blocks.len()),
                    ));
                }
                return Ok(Decoded {
                    file: m.blocks.iter().flat_map(|b| b.data.iter().copied()).collect(),
                    stages: vec![StageCount {
                        stage: "whole file".into(),
                        decoded_subfiles: c_total,
                    }],
                });
            }
            MessageLabel::SubfilePiece { file: n, position } => {
                sent.insert((n, position), m.blocks[0].data.as_slice());
            }
            _ => {}
        }
    }
    let gf = config.field();
    let code = scheme2_code(config, &gf).map_err(|e| fail(user, "setup", e.to_string()))?;
    let n_files = config.files();
    let mut out = Vec::with_capacity(config.file_len());
    let mut decoded = 0;
    for i in 1..=c_total {
        if !user.contains(i) {
            let piece = sent
                .get(&(file, i))
                .ok_or_else(|| fail(user, "delivery", format!("W_{{{file},{i}}} not broadcast")))?;
            out.extend_from_slice(piece);
            decoded += 1;
            continue;
        }
        let mut known: Vec<(usize, &[Elem])> = (1..=n_files)
            .filter_map(|n| sent.get(&(n, i)).map(|&v| (n - 1, v)))
            .collect();
        let parities: Vec<(usize, &[Elem])> = caches
            .cache(i)
            .items
            .iter()
            .filter_map(|it| match it.label {
                Label::CrossFileParity { position, column } if position == i => {
                    Some((n_files + column - 1, it.block.data.as_slice()))
                }
                _ => None,
            })
            .collect();
        known.extend(parities);
        let all = code
            .erasure_decode_blocks(&known, &gf)
            .map_err(|e| fail(user, format!("position {i}"), e.to_string()))?;
        decoded += n_files;
        out.extend_from_slice(&all[file - 1]);
    }
    Ok(Decoded {
        file: out,
        stages: vec![StageCount {
            stage: "positions".into(),
            decoded_subfiles: decoded,
        }],
    })
}

/// Row-reduced cache contents of one user, reusable across demand vectors.
#[derive(Clone, Debug)]
pub struct OracleUser {
    user: Subset,
    reducer: RowReducer,
    gf: Field,
}

impl OracleUser {
    /// Loads every block stored in the user's caches.
    pub fn new(config: &SchemeConfig, caches: &CacheContents, user: &Subset) -> Result<Self, DecodeError> {
        let gf = config.field();
        let mut reducer = RowReducer::new(config.total_pieces(), config.piece_len());
        for (_, item) in caches.accessible(user) {
            insert_item(&mut reducer, item, config, &gf, user, "cache")?;
        }
        Ok(Self {
            user: user.clone(),
            reducer,
            gf,
        })
    }

    /// Adds the broadcast and solves for file `file` (1-based).
    pub fn decode(
        &self,
        config: &SchemeConfig,
        batch: &BroadcastBatch,
        file: usize,
    ) -> Result<Vec<Elem>, DecodeError> {
        let mut reducer = self.reducer.clone();
        let width = config.total_pieces();
        for block in batch.messages.iter().flat_map(|m| &m.blocks) {
            let outcome = reducer
                .insert(block.dense_row(width), block.data.clone(), &self.gf)
                .map_err(|e| fail(&self.user, "oracle", e.to_string()))?;
            if outcome == Insertion::Conflict {
                return Err(fail(&self.user, "oracle", "broadcast contradicts cache contents"));
            }
        }
        let mut out = Vec::with_capacity(config.file_len());
        for j in 0..config.subpacketization() {
            let piece = config.piece(file, j);
            let v = reducer.determined(piece).ok_or_else(|| {
                fail(
                    &self.user,
                    "oracle",
                    format!(
                        "piece {j} of file {file} not determined (rank {} of {width})",
                        reducer.rank()
                    ),
                )
            })?;
            out.extend_from_slice(v);
        }
        Ok(out)
    }
}

fn insert_item(
    reducer: &mut RowReducer,
    item: &StoredItem,
    config: &SchemeConfig,
    gf: &Field,
    user: &Subset,
    stage: &str,
) -> Result<(), DecodeError> {
    let outcome = reducer
        .insert(
            item.block.dense_row(config.total_pieces()),
            item.block.data.clone(),
            gf,
        )
        .map_err(|e| fail(user, stage, e.to_string()))?;
    if outcome == Insertion::Conflict {
        return Err(fail(user, stage, "inconsistent cache contents"));
    }
    Ok(())
}

/// Solves for file `file` from everything user `user` can see.
pub fn oracle_decode_user(
    config: &SchemeConfig,
    caches: &CacheContents,
    batch: &BroadcastBatch,
    user: &Subset,
    file: usize,
) -> Result<Vec<Elem>, DecodeError> {
    OracleUser::new(config, caches, user)?.decode(config, batch, file)
}

/// Outcome of decoding one user, as written to verification reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub user: Subset,
    pub scheme: Scheme,
    pub decoded: bool,
    pub stage_counts: Vec<StageCount>,
    pub bytes_compared: usize,
    /// Whether the linear oracle also recovered the file, when it ran.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delivery::deliver;
    use crate::model::{Cache, DemandVector, Library};
    use crate::placement::place;

    fn setup(
        scheme: Scheme,
        c: usize,
        r: usize,
        t: Option<usize>,
        n: usize,
        seed: u64,
    ) -> (SchemeConfig, Library, CacheContents) {
        let config = SchemeConfig::new(scheme, c, r, t, n, 1).unwrap();
        let lib = Library::random(&config, seed);
        let z = place(&config, &lib).unwrap();
        (config, lib, z)
    }

    fn all_users_decode(config: &SchemeConfig, lib: &Library, z: &CacheContents, d: &DemandVector) {
        let x = deliver(config, lib, d).unwrap();
        for u in config.user_sets() {
            let want = d.of(&u);
            let got = decode_user(config, z, &x, &u, want).unwrap();
            assert_eq!(got.file, lib.file(want), "user {u}");
            assert_eq!(
                oracle_decode_user(config, z, &x, &u, want).unwrap(),
                lib.file(want)
            );
        }
    }

    #[test]
    fn example_user_stages() {
        let (config, lib, z) = setup(Scheme::Scheme1, 4, 2, Some(2), 6, 11);
        let d = DemandVector::new(&config, vec![1, 2, 3, 4, 5, 6]).unwrap();
        let x = deliver(&config, &lib, &d).unwrap();
        let u = Subset::new(4, vec![1, 2]).unwrap();
        let got = decode_scheme1_user(&config, &z, &x, &u, 1).unwrap();
        assert_eq!(got.file, lib.file(1));
        let counts: Vec<usize> = got.stages.iter().map(|s| s.decoded_subfiles).collect();
        // W_{n,12} after round 0; W_{n,13..24} after round 1; W_{1,34} from delivery.
        assert_eq!(counts, vec![6, 30, 31]);
    }

    #[test]
    fn every_scheme_small() {
        for (scheme, c, r, t, n) in [
            (Scheme::Mkr, 4, 2, Some(1), 3),
            (Scheme::Mkr, 4, 2, Some(2), 6),
            (Scheme::Mkr, 4, 2, Some(4), 2),
            (Scheme::Scheme1, 4, 2, Some(1), 3),
            (Scheme::Scheme1, 4, 2, Some(2), 6),
            (Scheme::Scheme1, 5, 3, Some(2), 10),
            (Scheme::Scheme1, 6, 3, Some(3), 2),
            (Scheme::Corner, 4, 2, None, 6),
            (Scheme::Scheme2, 4, 2, None, 6),
            (Scheme::Scheme2, 5, 3, None, 10),
        ] {
            let (config, lib, z) = setup(scheme, c, r, t, n, 5);
            all_users_decode(&config, &lib, &z, &DemandVector::round_robin(&config));
        }
    }

    #[test]
    fn scheme2_whole_file_branch() {
        let (config, lib, z) = setup(Scheme::Scheme2, 4, 2, None, 6, 3);
        let d = DemandVector::new(&config, vec![2; 6]).unwrap();
        all_users_decode(&config, &lib, &z, &d);
    }

    #[test]
    fn erased_cache_is_caught() {
        let (config, lib, mut z) = setup(Scheme::Mkr, 4, 2, Some(2), 6, 8);
        let d = DemandVector::round_robin(&config);
        let x = deliver(&config, &lib, &d).unwrap();
        z.caches[0] = Cache { id: 1, items: vec![] };
        let u = Subset::new(4, vec![1, 2]).unwrap();
        assert!(oracle_decode_user(&config, &z, &x, &u, 1).is_err());
        assert!(matches!(
            decode_mkr_user(&config, &z, &x, &u, 1),
            Err(DecodeError::Undecodable { .. })
        ));
    }

    #[test]
    fn scheme1_stage_failure_is_named() {
        let (config, lib, mut z) = setup(Scheme::Scheme1, 4, 2, Some(2), 6, 8);
        let d = DemandVector::round_robin(&config);
        let x = deliver(&config, &lib, &d).unwrap();
        z.caches[0]
            .items
            .retain(|i| !matches!(i.label, Label::Parity { .. }));
        let u = Subset::new(4, vec![1, 2]).unwrap();
        match decode_scheme1_user(&config, &z, &x, &u, 1) {
            Err(DecodeError::Undecodable { stage, .. }) => assert_eq!(stage, "round 1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn oracle_without_anything_fails() {
        let config = SchemeConfig::new(Scheme::Mkr, 4, 2, Some(2), 2, 1).unwrap();
        let z = CacheContents {
            scheme: Scheme::Mkr,
            caches: (1..=4).map(|id| Cache { id, items: vec![] }).collect(),
        };
        let u = Subset::new(4, vec![1, 2]).unwrap();
        assert!(oracle_decode_user(&config, &z, &BroadcastBatch::default(), &u, 1).is_err());
    }

    #[test]
    fn oracle_is_monotone() {
        let (config, lib, z) = setup(Scheme::Scheme1, 4, 2, Some(1), 2, 2);
        let d = DemandVector::new(&config, vec![1, 2, 1, 2, 1, 2]).unwrap();
        let x = deliver(&config, &lib, &d).unwrap();
        let u = Subset::new(4, vec![1, 3]).unwrap();
        let mut partial = x.clone();
        let mut ok_before = false;
        for keep in 0..=x.messages.len() {
            partial.messages = x.messages[..keep].to_vec();
            let ok = oracle_decode_user(&config, &z, &partial, &u, d.of(&u)).is_ok();
            assert!(ok || !ok_before);
            ok_before = ok;
        }
        assert!(ok_before);
    }
}
