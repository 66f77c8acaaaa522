//! Problem instances, the file library, demand vectors, and the labeled
//! containers that carry cache contents and broadcasts.
//!
//! Every stored or transmitted block records the exact linear combination of
//! library pieces it represents. A *piece* is the smallest unit a scheme
//! splits a file into (a subfile, a mini-subfile, or a position slice); the
//! library is addressed by global piece index `(n - 1) * P + local`, where
//! `P` is the scheme's subpacketization.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combinatorics::{choose, factorial, ksubsets, Subset};
use crate::gf::{Elem, Field, GfError, MAX_DEGREE};
use crate::placement::scheme1_round_plan;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("invalid regime: {0}")]
    InvalidRegime(String),
    #[error("scheme 2 needs N > binom(C-1, r) = {bound}, got N = {files}")]
    TooFewFiles { files: usize, bound: usize },
    #[error("field GF(2^{degree}) too small for codes of length {needed}")]
    FieldTooSmall { degree: u32, needed: usize },
    #[error("demand vector: {0}")]
    Demand(String),
    #[error(transparent)]
    Field(#[from] GfError),
}

/// The four placement constructions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Uncoded placement with XOR delivery.
    Mkr,
    /// Multi-round MDS-coded placement with XOR delivery.
    #[serde(rename = "s1")]
    Scheme1,
    /// `t = C - r + 1`: a `[C, r]` MDS column per cache, nothing to deliver.
    Corner,
    /// Cross-file systematic MDS parities with uncoded delivery.
    #[serde(rename = "s2")]
    Scheme2,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Mkr => "mkr",
            Scheme::Scheme1 => "s1",
            Scheme::Corner => "corner",
            Scheme::Scheme2 => "s2",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mkr" => Ok(Scheme::Mkr),
            "s1" | "scheme1" => Ok(Scheme::Scheme1),
            "corner" => Ok(Scheme::Corner),
            "s2" | "scheme2" => Ok(Scheme::Scheme2),
            other => Err(ConfigError::InvalidRegime(format!("unknown scheme {other:?}"))),
        }
    }
}

/// A `(C, r, t, N)` instance together with its field and file length.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeConfig {
    scheme: Scheme,
    caches: usize,
    access: usize,
    t: Option<usize>,
    files: usize,
    field_degree: u32,
    file_len: usize,
    subpacketization: usize,
}

impl SchemeConfig {
    /// Validates the regime, picks the smallest adequate field, and rounds
    /// `f_hint` up to a multiple of the subpacketization.
    ///
    /// Scheme 1 with `t = C - r + 1` becomes [`Scheme::Corner`]. The corner
    /// scheme ignores `t`.
    pub fn new(
        scheme: Scheme,
        caches: usize,
        access: usize,
        t: Option<usize>,
        files: usize,
        f_hint: usize,
    ) -> Result<Self, ConfigError> {
        let (c, r) = (caches, access);
        if r == 0 || r >= c {
            return Err(ConfigError::InvalidRegime(format!(
                "need 1 <= r < C, got C={c}, r={r}"
            )));
        }
        if files == 0 {
            return Err(ConfigError::InvalidRegime("need N >= 1".into()));
        }
        let need_t = |range: std::ops::RangeInclusive<usize>| -> Result<usize, ConfigError> {
            match t {
                Some(t) if range.contains(&t) => Ok(t),
                Some(t) => Err(ConfigError::InvalidRegime(format!(
                    "t={t} outside {}..={}",
                    range.start(),
                    range.end()
                ))),
                None => Err(ConfigError::InvalidRegime("this scheme needs t".into())),
            }
        };
        let (scheme, t) = match scheme {
            Scheme::Mkr => (Scheme::Mkr, Some(need_t(1..=c)?)),
            Scheme::Scheme1 => {
                let t = need_t(1..=c - r + 1)?;
                if t == c - r + 1 {
                    (Scheme::Corner, Some(t))
                } else {
                    (Scheme::Scheme1, Some(t))
                }
            }
            Scheme::Corner => (Scheme::Corner, Some(c - r + 1)),
            Scheme::Scheme2 => {
                let bound = choose(c - 1, r);
                if files <= bound {
                    return Err(ConfigError::TooFewFiles { files, bound });
                }
                (Scheme::Scheme2, None)
            }
        };
        let mut cfg = Self {
            scheme,
            caches: c,
            access: r,
            t,
            files,
            field_degree: 1,
            file_len: 0,
            subpacketization: 0,
        };
        cfg.subpacketization = match scheme {
            Scheme::Mkr => choose(c, cfg.t()),
            Scheme::Scheme1 => factorial(cfg.r_tilde()) * choose(c, cfg.t()),
            Scheme::Corner => r,
            Scheme::Scheme2 => c,
        };
        cfg.file_len = f_hint.max(1).div_ceil(cfg.subpacketization) * cfg.subpacketization;
        cfg.field_degree = Field::degree_for_len(cfg.max_code_len());
        if cfg.field_degree > MAX_DEGREE {
            return Err(ConfigError::FieldTooSmall {
                degree: MAX_DEGREE,
                needed: cfg.max_code_len(),
            });
        }
        Ok(cfg)
    }

    /// Uses a larger field than the automatic choice.
    pub fn with_field_degree(mut self, degree: u32) -> Result<Self, ConfigError> {
        Field::new(degree)?;
        let needed = self.max_code_len();
        if (1usize << degree) < needed {
            return Err(ConfigError::FieldTooSmall { degree, needed });
        }
        self.field_degree = degree;
        Ok(self)
    }

    /// Longest MDS code the scheme builds (1 when it builds none).
    pub fn max_code_len(&self) -> usize {
        let (c, r, n) = (self.caches, self.access, self.files);
        match self.scheme {
            Scheme::Mkr => 1,
            Scheme::Scheme1 => {
                let base = factorial(self.r_tilde()) * self.t();
                scheme1_round_plan(c, r, self.t())
                    .expect("validated regime")
                    .iter()
                    .map(|p| p.code_len)
                    .fold(base, usize::max)
            }
            Scheme::Corner => c,
            Scheme::Scheme2 => 2 * n - choose(c - 1, r),
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Number of caches `C`.
    pub fn caches(&self) -> usize {
        self.caches
    }

    /// Caches per user `r`.
    pub fn access(&self) -> usize {
        self.access
    }

    /// Placement parameter; `C - r + 1` for the corner scheme, absent for scheme 2.
    pub fn t_param(&self) -> Option<usize> {
        self.t
    }

    /// Placement parameter. Panics for scheme 2.
    pub fn t(&self) -> usize {
        self.t.expect("scheme has no t parameter")
    }

    /// `min(r, t)`.
    pub fn r_tilde(&self) -> usize {
        self.access.min(self.t())
    }

    pub fn files(&self) -> usize {
        self.files
    }

    pub fn users(&self) -> usize {
        choose(self.caches, self.access)
    }

    pub fn user_sets(&self) -> Vec<Subset> {
        ksubsets(self.caches, self.access)
    }

    pub fn field_degree(&self) -> u32 {
        self.field_degree
    }

    pub fn field(&self) -> Field {
        Field::new(self.field_degree).expect("validated degree")
    }

    /// File length `f` in field symbols.
    pub fn file_len(&self) -> usize {
        self.file_len
    }

    pub fn subpacketization(&self) -> usize {
        self.subpacketization
    }

    /// Symbols per piece, `f / P`.
    pub fn piece_len(&self) -> usize {
        self.file_len / self.subpacketization
    }

    /// Pieces per XOR-delivered subfile: 1 for MKR, `r~!` for scheme 1.
    pub fn pieces_per_subfile(&self) -> usize {
        match self.scheme {
            Scheme::Scheme1 => factorial(self.r_tilde()),
            _ => 1,
        }
    }

    /// Global index of local piece `local` of file `file` (1-based file).
    pub fn piece(&self, file: usize, local: usize) -> usize {
        (file - 1) * self.subpacketization + local
    }

    /// Global piece index of mini-subfile `mini` (0-based) of `W_{file, subset}`
    /// for the subfile-indexed schemes.
    pub fn subfile_piece(&self, file: usize, subset: &Subset, mini: usize) -> usize {
        self.piece(file, (subset.rank() - 1) * self.pieces_per_subfile() + mini)
    }

    /// Total unknowns `N * P` seen by the linear oracle.
    pub fn total_pieces(&self) -> usize {
        self.files * self.subpacketization
    }
}

/// The server's `N` files, each `f` symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Library {
    files: Vec<Vec<Elem>>,
    seed: Option<u64>,
}

impl Library {
    /// Deterministic pseudorandom symbols from a ChaCha8 stream.
    pub fn random(config: &SchemeConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let order = 1u32 << config.field_degree();
        let files = (0..config.files())
            .map(|_| {
                (0..config.file_len())
                    .map(|_| rng.gen_range(0..order) as Elem)
                    .collect()
            })
            .collect();
        Self {
            files,
            seed: Some(seed),
        }
    }

    pub fn zeros(config: &SchemeConfig) -> Self {
        Self {
            files: vec![vec![0; config.file_len()]; config.files()],
            seed: None,
        }
    }

    pub fn from_files(files: Vec<Vec<Elem>>, seed: Option<u64>) -> Result<Self, ConfigError> {
        if let Some(first) = files.first() {
            if files.iter().any(|f| f.len() != first.len()) {
                return Err(ConfigError::InvalidRegime("files of unequal length".into()));
            }
        }
        Ok(Self { files, seed })
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    /// File `n`, 1-based.
    pub fn file(&self, n: usize) -> &[Elem] {
        &self.files[n - 1]
    }

    pub fn files(&self) -> &[Vec<Elem>] {
        &self.files
    }

    /// Symbols of global piece `index` under `config`'s layout.
    pub fn piece(&self, config: &SchemeConfig, index: usize) -> &[Elem] {
        let p = config.subpacketization();
        let s = config.piece_len();
        let (file, local) = (index / p, index % p);
        &self.files[file][local * s..(local + 1) * s]
    }
}

/// One demanded file per user, users in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DemandVector(Vec<usize>);

impl DemandVector {
    pub fn new(config: &SchemeConfig, demands: Vec<usize>) -> Result<Self, ConfigError> {
        if demands.len() != config.users() {
            return Err(ConfigError::Demand(format!(
                "expected {} entries, got {}",
                config.users(),
                demands.len()
            )));
        }
        if let Some(&bad) = demands.iter().find(|&&d| d == 0 || d > config.files()) {
            return Err(ConfigError::Demand(format!(
                "file {bad} outside 1..={}",
                config.files()
            )));
        }
        Ok(Self(demands))
    }

    /// User `i` demands file `((i - 1) mod N) + 1`: all distinct when `N >= K`.
    pub fn round_robin(config: &SchemeConfig) -> Self {
        Self((0..config.users()).map(|i| i % config.files() + 1).collect())
    }

    pub fn random<R: Rng>(config: &SchemeConfig, rng: &mut R) -> Self {
        Self(
            (0..config.users())
                .map(|_| rng.gen_range(1..=config.files()))
                .collect(),
        )
    }

    /// All `N^K` demand vectors in odometer order (last user fastest).
    pub fn exhaustive(config: &SchemeConfig) -> impl Iterator<Item = DemandVector> {
        let (k, n) = (config.users(), config.files());
        let total = (n as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
        (0..total).map(move |mut idx| {
            let mut d = vec![1; k];
            for slot in d.iter_mut().rev() {
                *slot = (idx % n as u128) as usize + 1;
                idx /= n as u128;
            }
            DemandVector(d)
        })
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Demand of the user accessing `user` (a `r`-subset).
    pub fn of(&self, user: &Subset) -> usize {
        self.0[user.rank() - 1]
    }

    /// Distinct demanded files, ascending.
    pub fn distinct(&self) -> Vec<usize> {
        let mut v = self.0.clone();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// A linear combination of library pieces plus the symbols it evaluates to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    /// `(global piece index, coefficient)`, sorted by index, no zero coefficients.
    pub combination: Vec<(usize, Elem)>,
    pub data: Vec<Elem>,
}

impl Block {
    /// Evaluates `combination` against the library.
    pub fn from_combination(
        combination: Vec<(usize, Elem)>,
        config: &SchemeConfig,
        library: &Library,
        gf: &Field,
    ) -> Self {
        let data = gf.combine(
            config.piece_len(),
            combination.iter().map(|&(p, c)| (c, library.piece(config, p))),
        );
        Self { combination, data }
    }

    /// Whether the stored symbols equal the combination re-expanded against `library`.
    pub fn matches_library(&self, config: &SchemeConfig, library: &Library, gf: &Field) -> bool {
        Block::from_combination(self.combination.clone(), config, library, gf).data == self.data
    }

    /// Dense coefficient row of width `width`.
    pub fn dense_row(&self, width: usize) -> Vec<Elem> {
        let mut row = vec![0; width];
        for &(p, c) in &self.combination {
            row[p] = c;
        }
        row
    }
}

/// Accumulates `sum c_i * combo_i` over sparse piece combinations.
pub fn merge_combinations<'a, I>(terms: I, gf: &Field) -> Vec<(usize, Elem)>
where
    I: IntoIterator<Item = (Elem, &'a [(usize, Elem)])>,
{
    let mut acc: BTreeMap<usize, Elem> = BTreeMap::new();
    for (c, combo) in terms {
        if c == 0 {
            continue;
        }
        for &(p, v) in combo {
            *acc.entry(p).or_insert(0) ^= gf.mul(c, v);
        }
    }
    acc.into_iter().filter(|&(_, v)| v != 0).collect()
}

/// What a cached block is.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Label {
    /// Uncoded subfile `W_{file, subset}`.
    Subfile { file: usize, subset: Subset },
    /// Coded mini-subfile `Y^index_{file, subset}` (1-based index).
    Coded {
        file: usize,
        subset: Subset,
        index: usize,
    },
    /// Doubly-encoded parity `Q^{ell, column}_{file, cache}` of a scheme 1 round.
    Parity {
        file: usize,
        cache: usize,
        round: usize,
        ell: usize,
        column: usize,
    },
    /// Column `column` of the `[C, r]` corner encoding of `file`.
    CornerCoded { file: usize, column: usize },
    /// Scheme 2 parity `Q_{column, position}` across all files.
    CrossFileParity { position: usize, column: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredItem {
    pub label: Label,
    pub block: Block,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cache {
    pub id: usize,
    pub items: Vec<StoredItem>,
}

impl Cache {
    pub fn symbol_count(&self) -> usize {
        self.items.iter().map(|i| i.block.data.len()).sum()
    }
}

/// Contents of all `C` caches after placement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheContents {
    pub scheme: Scheme,
    pub caches: Vec<Cache>,
}

impl CacheContents {
    /// Cache `c`, 1-based.
    pub fn cache(&self, c: usize) -> &Cache {
        &self.caches[c - 1]
    }

    /// Stored size of cache `c` in file units.
    pub fn occupancy(&self, c: usize, file_len: usize) -> crate::Rational {
        crate::Rational::from(self.cache(c).symbol_count()) / crate::Rational::from(file_len)
    }

    /// Items reachable by a user accessing the caches in `user`.
    pub fn accessible<'a>(&'a self, user: &'a Subset) -> impl Iterator<Item = (usize, &'a StoredItem)> + 'a {
        user.members()
            .iter()
            .flat_map(move |&c| self.cache(c).items.iter().map(move |it| (c, it)))
    }
}

/// One summand `W_{file, subfile}` of an XOR message, meant for `user`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct XorTerm {
    pub user: Subset,
    pub file: usize,
    pub subfile: Subset,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MessageLabel {
    /// `XOR_{U in S, |U| = r} W_{d_U, S \ U}`.
    Xor { set: Subset, terms: Vec<XorTerm> },
    /// Subfile `position` of `file`, sent uncoded.
    SubfilePiece { file: usize, position: usize },
    /// A whole file, sent uncoded.
    WholeFile { file: usize },
}

/// One transmission: a label and its blocks (one per piece it spans).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub label: MessageLabel,
    pub blocks: Vec<Block>,
}

impl Message {
    pub fn symbol_count(&self) -> usize {
        self.blocks.iter().map(|b| b.data.len()).sum()
    }
}

/// Ordered delivery-phase transmissions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BroadcastBatch {
    pub messages: Vec<Message>,
}

impl BroadcastBatch {
    pub fn symbol_count(&self) -> usize {
        self.messages.iter().map(Message::symbol_count).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme1_config_example() {
        let cfg = SchemeConfig::new(Scheme::Scheme1, 4, 2, Some(2), 6, 1).unwrap();
        assert_eq!(cfg.subpacketization(), 12);
        assert_eq!(cfg.file_len(), 12);
        assert_eq!(cfg.users(), 6);
        // Longest code: round 1 is [2*3 - 1, 3] = length 5, base code length 4.
        assert_eq!(cfg.max_code_len(), 5);
        assert_eq!(cfg.field_degree(), 3);
    }

    #[test]
    fn scheme1_at_top_t_is_the_corner() {
        let cfg = SchemeConfig::new(Scheme::Scheme1, 4, 2, Some(3), 6, 1).unwrap();
        assert_eq!(cfg.scheme(), Scheme::Corner);
        assert_eq!(cfg.subpacketization(), 2);
        assert_eq!(cfg.field_degree(), 2);
    }

    #[test]
    fn scheme2_config() {
        let cfg = SchemeConfig::new(Scheme::Scheme2, 4, 2, None, 6, 10).unwrap();
        assert_eq!(cfg.subpacketization(), 4);
        assert_eq!(cfg.file_len(), 12);
        assert_eq!(cfg.max_code_len(), 9);
        assert_eq!(
            SchemeConfig::new(Scheme::Scheme2, 4, 2, None, 3, 1),
            Err(ConfigError::TooFewFiles { files: 3, bound: 3 })
        );
    }

    #[test]
    fn invalid_regimes() {
        assert!(SchemeConfig::new(Scheme::Mkr, 4, 4, Some(1), 2, 1).is_err());
        assert!(SchemeConfig::new(Scheme::Mkr, 4, 0, Some(1), 2, 1).is_err());
        assert!(SchemeConfig::new(Scheme::Mkr, 4, 2, Some(5), 2, 1).is_err());
        assert!(SchemeConfig::new(Scheme::Scheme1, 4, 2, Some(4), 2, 1).is_err());
        assert!(SchemeConfig::new(Scheme::Scheme1, 4, 2, None, 2, 1).is_err());
        assert!(SchemeConfig::new(Scheme::Mkr, 4, 2, Some(2), 0, 1).is_err());
    }

    #[test]
    fn field_override() {
        let cfg = SchemeConfig::new(Scheme::Mkr, 4, 2, Some(2), 2, 1).unwrap();
        assert_eq!(cfg.field_degree(), 1);
        assert_eq!(cfg.clone().with_field_degree(8).unwrap().field_degree(), 8);
        let s2 = SchemeConfig::new(Scheme::Scheme2, 4, 2, None, 6, 1).unwrap();
        assert!(matches!(
            s2.with_field_degree(3),
            Err(ConfigError::FieldTooSmall { .. })
        ));
    }

    #[test]
    fn library_determinism() {
        let cfg = SchemeConfig::new(Scheme::Scheme1, 4, 2, Some(2), 6, 24)
            .unwrap()
            .with_field_degree(8)
            .unwrap();
        assert_eq!(Library::random(&cfg, 9), Library::random(&cfg, 9));
        assert_ne!(Library::random(&cfg, 9), Library::random(&cfg, 10));
        let z = Library::zeros(&cfg);
        assert!(z.files().iter().all(|f| f.iter().all(|&s| s == 0)));
        assert_eq!(z.file(6).len(), 24);
    }

    #[test]
    fn demand_slots_follow_user_order() {
        let cfg = SchemeConfig::new(Scheme::Mkr, 4, 2, Some(2), 6, 1).unwrap();
        let d = DemandVector::new(&cfg, vec![1, 2, 3, 4, 5, 6]).unwrap();
        for (i, u) in cfg.user_sets().iter().enumerate() {
            assert_eq!(u, &Subset::unrank(4, 2, i + 1).unwrap());
            assert_eq!(d.of(u), i + 1);
        }
        assert!(DemandVector::new(&cfg, vec![1; 5]).is_err());
        assert!(DemandVector::new(&cfg, vec![7; 6]).is_err());
        assert_eq!(DemandVector::round_robin(&cfg).distinct().len(), 6);
    }

    #[test]
    fn exhaustive_demands() {
        let cfg = SchemeConfig::new(Scheme::Mkr, 4, 2, Some(1), 2, 1).unwrap();
        let all: Vec<_> = DemandVector::exhaustive(&cfg).collect();
        assert_eq!(all.len(), 64);
        assert_eq!(all[0].as_slice(), &[1; 6]);
        assert_eq!(all[63].as_slice(), &[2; 6]);
        let mut uniq = all.clone();
        uniq.sort_by(|a, b| a.as_slice().cmp(b.as_slice()));
        uniq.dedup();
        assert_eq!(uniq.len(), 64);
    }
}
