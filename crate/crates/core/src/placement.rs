//! Cache placement for the four schemes.

use std::ops::RangeInclusive;

use thiserror::Error;

use crate::combinatorics::{choose, factorial, ksubsets, phi, Subset};
use crate::gf::{Elem, Field};
use crate::mds::{MdsCode, MdsError};
use crate::model::{
    merge_combinations, Block, Cache, CacheContents, Label, Library, Scheme, SchemeConfig, StoredItem,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlacementError {
    #[error("placement {scheme:?} does not apply to a {actual:?} configuration")]
    WrongScheme { scheme: Scheme, actual: Scheme },
    #[error("invalid regime: {0}")]
    Regime(String),
    #[error("library has {files} files of {len} symbols, configuration expects {want_files} of {want_len}")]
    LibraryShape {
        files: usize,
        len: usize,
        want_files: usize,
        want_len: usize,
    },
    #[error(transparent)]
    Mds(#[from] MdsError),
}

/// Index bookkeeping for one round of scheme 1.
///
/// Round 0 places the base-code outputs directly; round `b >= 1` feeds the
/// outputs at `base + (phi - 1) * block_len + ell` (one per subfile containing
/// the cache) into a systematic `[info_len + parity_len, info_len]` code and
/// keeps the parities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundPlan {
    pub round: usize,
    /// Coded mini-subfile indices per cache position in this round.
    pub block_len: usize,
    /// Indices consumed by earlier rounds, over all positions.
    pub base: usize,
    /// `B = binom(C-1, t-1)`; zero in round 0.
    pub info_len: usize,
    /// `D_b`, information symbols a user already holds when it reaches this round.
    pub known: usize,
    /// `B - D_b` parities stored per `ell`.
    pub parity_len: usize,
    /// Length of the code used in this round (the base code for round 0).
    pub code_len: usize,
}

impl RoundPlan {
    /// 1-based coded mini-subfile indices at cache position `position` (1-based).
    pub fn indices(&self, position: usize) -> RangeInclusive<usize> {
        let start = self.base + (position - 1) * self.block_len;
        start + 1..=start + self.block_len
    }
}

fn count_known(c: usize, r: usize, t: usize, b: usize) -> usize {
    let sub = |a: usize, k: isize| if k < 0 { 0 } else { choose(a, k as usize) };
    let (c, r, t) = (c as isize, r as isize, t as isize);
    (1..=b as isize)
        .map(|i| {
            if t >= r {
                sub((r - 1) as usize, r - i) * sub((c - r) as usize, t - r + i - 1)
            } else {
                sub((r - 1) as usize, t - i) * sub((c - r) as usize, i - 1)
            }
        })
        .sum()
}

/// Rounds `0..r~` of scheme 1 for `1 <= t <= C - r`.
pub fn scheme1_round_plan(c: usize, r: usize, t: usize) -> Result<Vec<RoundPlan>, PlacementError> {
    if r == 0 || r >= c || t == 0 || t + r > c {
        return Err(PlacementError::Regime(format!(
            "scheme 1 rounds need 1 <= r < C and 1 <= t <= C - r, got C={c}, r={r}, t={t}"
        )));
    }
    let rt = r.min(t);
    let full = factorial(rt);
    let info = choose(c - 1, t - 1);
    let mut plans = vec![RoundPlan {
        round: 0,
        block_len: full / rt,
        base: 0,
        info_len: 0,
        known: 0,
        parity_len: 0,
        code_len: full * t,
    }];
    for b in 1..rt {
        let known = count_known(c, r, t, b);
        plans.push(RoundPlan {
            round: b,
            block_len: full / ((rt - b) * (rt - b + 1)),
            base: t * full / (rt - b + 1),
            info_len: info,
            known,
            parity_len: info - known,
            code_len: 2 * info - known,
        });
    }
    Ok(plans)
}

fn check_library(config: &SchemeConfig, library: &Library) -> Result<(), PlacementError> {
    let len = library.files().first().map_or(0, Vec::len);
    if library.len() != config.files() || len != config.file_len() {
        return Err(PlacementError::LibraryShape {
            files: library.len(),
            len,
            want_files: config.files(),
            want_len: config.file_len(),
        });
    }
    Ok(())
}

fn expect_scheme(config: &SchemeConfig, scheme: Scheme) -> Result<(), PlacementError> {
    if config.scheme() != scheme {
        return Err(PlacementError::WrongScheme {
            scheme,
            actual: config.scheme(),
        });
    }
    Ok(())
}

fn unit(piece: usize, config: &SchemeConfig, library: &Library) -> Block {
    Block {
        combination: vec![(piece, 1)],
        data: library.piece(config, piece).to_vec(),
    }
}

/// Runs the placement matching `config.scheme()`.
pub fn place(config: &SchemeConfig, library: &Library) -> Result<CacheContents, PlacementError> {
    match config.scheme() {
        Scheme::Mkr => place_mkr(config, library),
        Scheme::Scheme1 => place_scheme1(config, library),
        Scheme::Corner => place_corner(config, library),
        Scheme::Scheme2 => place_scheme2(config, library),
    }
}

/// Uncoded placement: cache `c` keeps `W_{n,T}` for every `T` containing `c`.
pub fn place_mkr(config: &SchemeConfig, library: &Library) -> Result<CacheContents, PlacementError> {
    expect_scheme(config, Scheme::Mkr)?;
    check_library(config, library)?;
    let subsets = ksubsets(config.caches(), config.t());
    let caches = (1..=config.caches())
        .map(|c| {
            let mut items = Vec::new();
            for n in 1..=config.files() {
                for s in subsets.iter().filter(|s| s.contains(c)) {
                    items.push(StoredItem {
                        label: Label::Subfile {
                            file: n,
                            subset: s.clone(),
                        },
                        block: unit(config.subfile_piece(n, s, 0), config, library),
                    });
                }
            }
            Cache { id: c, items }
        })
        .collect();
    Ok(CacheContents {
        scheme: Scheme::Mkr,
        caches,
    })
}

/// The `[r~! t, r~!]` systematic code applied to each subfile's mini-subfiles.
pub fn scheme1_base_code(config: &SchemeConfig, gf: &Field) -> Result<MdsCode, PlacementError> {
    let full = factorial(config.r_tilde());
    Ok(MdsCode::systematic_reed_solomon(full, full * config.t(), gf)?)
}

/// The systematic code of each round `b >= 1`, indexed by `b - 1`.
pub fn scheme1_round_codes(config: &SchemeConfig, gf: &Field) -> Result<Vec<MdsCode>, PlacementError> {
    scheme1_round_plan(config.caches(), config.access(), config.t())?
        .iter()
        .skip(1)
        .map(|p| Ok(MdsCode::systematic_reed_solomon(p.info_len, p.code_len, gf)?))
        .collect()
}

/// Coded mini-subfiles `Y_{n,T}` of one subfile: combinations and symbols.
pub(crate) struct CodedSubfile {
    pub combos: Vec<Vec<(usize, Elem)>>,
    pub data: Vec<Vec<Elem>>,
}

pub(crate) fn encode_subfile(
    config: &SchemeConfig,
    library: &Library,
    code: &MdsCode,
    gf: &Field,
    file: usize,
    subset: &Subset,
) -> Result<CodedSubfile, PlacementError> {
    let k = code.k();
    let pieces: Vec<usize> = (0..k).map(|j| config.subfile_piece(file, subset, j)).collect();
    let message: Vec<&[Elem]> = pieces.iter().map(|&p| library.piece(config, p)).collect();
    let data = code.encode_blocks(&message, gf)?;
    let g = code.generator();
    let combos = (0..code.n())
        .map(|l| {
            (0..k)
                .filter(|&j| g.get(j, l) != 0)
                .map(|j| (pieces[j], g.get(j, l)))
                .collect()
        })
        .collect();
    Ok(CodedSubfile { combos, data })
}

/// Multi-round coded placement for `1 <= t <= C - r`.
pub fn place_scheme1(config: &SchemeConfig, library: &Library) -> Result<CacheContents, PlacementError> {
    expect_scheme(config, Scheme::Scheme1)?;
    check_library(config, library)?;
    let gf = config.field();
    let (c_total, t) = (config.caches(), config.t());
    let plans = scheme1_round_plan(c_total, config.access(), t)?;
    let base = scheme1_base_code(config, &gf)?;
    let round_codes = scheme1_round_codes(config, &gf)?;
    let subsets = ksubsets(c_total, t);

    // coded[n - 1][rank - 1]
    let coded: Vec<Vec<CodedSubfile>> = (1..=config.files())
        .map(|n| {
            subsets
                .iter()
                .map(|s| encode_subfile(config, library, &base, &gf, n, s))
                .collect::<Result<_, _>>()
        })
        .collect::<Result<_, _>>()?;

    let mut caches = Vec::with_capacity(c_total);
    for c in 1..=c_total {
        let with_c: Vec<&Subset> = subsets.iter().filter(|s| s.contains(c)).collect();
        let mut items = Vec::new();
        for n in 1..=config.files() {
            for s in &with_c {
                let y = &coded[n - 1][s.rank() - 1];
                let pos = phi(c, s).expect("member");
                for l in plans[0].indices(pos) {
                    items.push(StoredItem {
                        label: Label::Coded {
                            file: n,
                            subset: (*s).clone(),
                            index: l,
                        },
                        block: Block {
                            combination: y.combos[l - 1].clone(),
                            data: y.data[l - 1].clone(),
                        },
                    });
                }
            }
        }
        for (plan, code) in plans.iter().skip(1).zip(&round_codes) {
            let p = code.parity_block().expect("systematic");
            for ell in 1..=plan.block_len {
                for n in 1..=config.files() {
                    // Information vector: one coded mini-subfile per subfile containing c.
                    let info: Vec<(usize, usize)> = with_c
                        .iter()
                        .map(|s| {
                            let pos = phi(c, s).expect("member");
                            (s.rank() - 1, *plan.indices(pos).start() + ell - 1)
                        })
                        .collect();
                    for col in 0..plan.parity_len {
                        let combination = merge_combinations(
                            info.iter().enumerate().map(|(i, &(rank, l))| {
                                (p.get(i, col), coded[n - 1][rank].combos[l - 1].as_slice())
                            }),
                            &gf,
                        );
                        let data = gf.combine(
                            config.piece_len(),
                            info.iter().enumerate().map(|(i, &(rank, l))| {
                                (p.get(i, col), coded[n - 1][rank].data[l - 1].as_slice())
                            }),
                        );
                        items.push(StoredItem {
                            label: Label::Parity {
                                file: n,
                                cache: c,
                                round: plan.round,
                                ell,
                                column: col + 1,
                            },
                            block: Block { combination, data },
                        });
                    }
                }
            }
        }
        caches.push(Cache { id: c, items });
    }
    Ok(CacheContents {
        scheme: Scheme::Scheme1,
        caches,
    })
}

/// The `[C, r]` code of the corner scheme.
pub fn corner_code(config: &SchemeConfig, gf: &Field) -> Result<MdsCode, PlacementError> {
    Ok(MdsCode::reed_solomon(config.access(), config.caches(), gf)?)
}

/// `t = C - r + 1`: each file becomes `r` subfiles, encoded by a `[C, r]` code;
/// cache `c` keeps coded column `c` of every file.
pub fn place_corner(config: &SchemeConfig, library: &Library) -> Result<CacheContents, PlacementError> {
    expect_scheme(config, Scheme::Corner)?;
    check_library(config, library)?;
    let gf = config.field();
    let code = corner_code(config, &gf)?;
    let g = code.generator();
    let caches = (1..=config.caches())
        .map(|c| {
            let items = (1..=config.files())
                .map(|n| {
                    let combination = (0..config.access())
                        .filter(|&j| g.get(j, c - 1) != 0)
                        .map(|j| (config.piece(n, j), g.get(j, c - 1)))
                        .collect();
                    StoredItem {
                        label: Label::CornerCoded { file: n, column: c },
                        block: Block::from_combination(combination, config, library, &gf),
                    }
                })
                .collect();
            Cache { id: c, items }
        })
        .collect();
    Ok(CacheContents {
        scheme: Scheme::Corner,
        caches,
    })
}

/// The systematic `[2N - binom(C-1, r), N]` code of scheme 2.
pub fn scheme2_code(config: &SchemeConfig, gf: &Field) -> Result<MdsCode, PlacementError> {
    let n = config.files();
    let k_prime = choose(config.caches() - 1, config.access());
    Ok(MdsCode::systematic_reed_solomon(n, 2 * n - k_prime, gf)?)
}

/// Each file becomes `C` subfiles; cache `i` keeps the `N - binom(C-1, r)`
/// parities of `(W_{1,i}, ..., W_{N,i})`.
pub fn place_scheme2(config: &SchemeConfig, library: &Library) -> Result<CacheContents, PlacementError> {
    expect_scheme(config, Scheme::Scheme2)?;
    check_library(config, library)?;
    let gf = config.field();
    let code = scheme2_code(config, &gf)?;
    let p = code.parity_block().expect("systematic");
    let caches = (1..=config.caches())
        .map(|i| {
            let pieces: Vec<usize> = (1..=config.files()).map(|n| config.piece(n, i - 1)).collect();
            let items = (0..p.cols())
                .map(|col| {
                    let combination: Vec<(usize, Elem)> = pieces
                        .iter()
                        .enumerate()
                        .filter(|&(n, _)| p.get(n, col) != 0)
                        .map(|(n, &piece)| (piece, p.get(n, col)))
                        .collect();
                    let data = gf.combine(
                        config.piece_len(),
                        pieces
                            .iter()
                            .enumerate()
                            .map(|(n, &piece)| (p.get(n, col), library.piece(config, piece))),
                    );
                    StoredItem {
                        label: Label::CrossFileParity {
                            position: i,
                            column: col + 1,
                        },
                        block: Block { combination, data },
                    }
                })
                .collect();
            Cache { id: i, items }
        })
        .collect();
    Ok(CacheContents {
        scheme: Scheme::Scheme2,
        caches,
    })
}

/// Every MDS code the configuration's placement builds.
pub fn scheme_codes(config: &SchemeConfig) -> Result<Vec<MdsCode>, PlacementError> {
    let gf = config.field();
    Ok(match config.scheme() {
        Scheme::Mkr => Vec::new(),
        Scheme::Scheme1 => {
            let mut v = vec![scheme1_base_code(config, &gf)?];
            v.extend(scheme1_round_codes(config, &gf)?);
            v
        }
        Scheme::Corner => vec![corner_code(config, &gf)?],
        Scheme::Scheme2 => vec![scheme2_code(config, &gf)?],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::Rational;

    fn cfg(scheme: Scheme, c: usize, r: usize, t: Option<usize>, n: usize) -> SchemeConfig {
        SchemeConfig::new(scheme, c, r, t, n, 1).unwrap()
    }

    fn set(c: usize, m: &[usize]) -> Subset {
        Subset::new(c, m.to_vec()).unwrap()
    }

    #[test]
    fn round_plan_two_two() {
        let plans = scheme1_round_plan(4, 2, 2).unwrap();
        assert_eq!(plans.len(), 2);
        assert_eq!(plans[0].indices(1), 1..=1);
        assert_eq!(plans[0].indices(2), 2..=2);
        assert_eq!(plans[1].indices(1), 3..=3);
        assert_eq!(plans[1].indices(2), 4..=4);
        assert_eq!(
            (plans[1].info_len, plans[1].known, plans[1].parity_len),
            (3, 1, 2)
        );
    }

    #[test]
    fn round_plan_single_round_when_rtilde_is_one() {
        let plans = scheme1_round_plan(5, 3, 1).unwrap();
        assert_eq!(plans.len(), 1);
        assert_eq!(plans[0].indices(1), 1..=1);
        let plans = scheme1_round_plan(5, 1, 3).unwrap();
        assert_eq!(plans.len(), 1);
    }

    #[test]
    fn round_plan_r3_t2_consumes_r_factorial_t() {
        // r~ = 2 here, since t < r.
        let plans = scheme1_round_plan(6, 3, 2).unwrap();
        let total: usize = plans.iter().map(|p| p.block_len * 2).sum();
        assert_eq!(total, 2 * 2);
        let plans = scheme1_round_plan(7, 3, 3).unwrap();
        let per_position: Vec<usize> = plans.iter().map(|p| p.block_len).collect();
        assert_eq!(per_position, vec![2, 1, 3]);
        assert_eq!(per_position.iter().sum::<usize>() * 3, 6 * 3);
    }

    /// Brute-force count of subsets containing a fixed cache whose overlap
    /// with a fixed user is at least `r~ - b + 1`.
    fn brute_known(c: usize, r: usize, t: usize, b: usize) -> usize {
        let rt = r.min(t);
        let user = set(c, &(1..=r).collect::<Vec<_>>());
        ksubsets(c, t)
            .into_iter()
            .filter(|s| s.contains(1) && s.intersection_len(&user) > rt - b)
            .count()
    }

    #[test]
    fn partition_and_known_counts() {
        for c in 2..=7 {
            for r in 1..c {
                for t in 1..=c - r {
                    let plans = scheme1_round_plan(c, r, t).unwrap();
                    let rt = r.min(t);
                    let mut hit = vec![0u32; factorial(rt) * t];
                    for p in &plans {
                        for pos in 1..=t {
                            for i in p.indices(pos) {
                                hit[i - 1] += 1;
                            }
                        }
                    }
                    assert!(hit.iter().all(|&h| h == 1), "C={c} r={r} t={t}: {hit:?}");
                    for p in plans.iter().skip(1) {
                        assert_eq!(p.known, brute_known(c, r, t, p.round), "C={c} r={r} t={t}");
                        assert_eq!(p.info_len, choose(c - 1, t - 1));
                    }
                }
            }
        }
        assert!(scheme1_round_plan(4, 2, 3).is_err());
    }

    fn occupancy(contents: &CacheContents, config: &SchemeConfig) -> Vec<Rational> {
        (1..=config.caches())
            .map(|c| contents.occupancy(c, config.file_len()))
            .collect()
    }

    #[test]
    fn mkr_cache_one_holds_pairs_with_one() {
        let config = cfg(Scheme::Mkr, 4, 2, Some(2), 6);
        let lib = Library::random(&config, 1);
        let z = place_mkr(&config, &lib).unwrap();
        let labels: Vec<_> = z.cache(1).items.iter().map(|i| i.label.clone()).collect();
        assert_eq!(labels.len(), 18);
        for (k, sub) in [[1, 2], [1, 3], [1, 4]].iter().enumerate() {
            assert_eq!(
                labels[k],
                Label::Subfile {
                    file: 1,
                    subset: set(4, sub)
                }
            );
        }
        assert!(occupancy(&z, &config)
            .iter()
            .all(|m| *m == Rational::from(3usize)));
    }

    #[test]
    fn mkr_full_replication_and_occupancy() {
        let config = cfg(Scheme::Mkr, 4, 2, Some(4), 3);
        let lib = Library::random(&config, 1);
        let z = place_mkr(&config, &lib).unwrap();
        assert!(occupancy(&z, &config)
            .iter()
            .all(|m| *m == Rational::from(3usize)));
        let config = cfg(Scheme::Mkr, 5, 2, Some(2), 10);
        let lib = Library::random(&config, 1);
        let z = place_mkr(&config, &lib).unwrap();
        assert!(occupancy(&z, &config)
            .iter()
            .all(|m| *m == Rational::from(4usize)));
    }

    #[test]
    fn scheme1_example_structure() {
        let config = cfg(Scheme::Scheme1, 4, 2, Some(2), 6);
        let lib = Library::random(&config, 3);
        let z = place_scheme1(&config, &lib).unwrap();
        let five_halves = Rational::new(5, 2).unwrap();
        assert!(occupancy(&z, &config).iter().all(|m| *m == five_halves));
        let gf = config.field();
        for c in 1..=4 {
            let items = &z.cache(c).items;
            let coded = items
                .iter()
                .filter(|i| matches!(i.label, Label::Coded { .. }))
                .count();
            let parity = items
                .iter()
                .filter(|i| matches!(i.label, Label::Parity { .. }))
                .count();
            assert_eq!((coded, parity), (18, 12));
            assert!(items.iter().all(|i| i.block.matches_library(&config, &lib, &gf)));
        }
        // Systematic base code: cache 1 stores the first mini-subfile of W_{1,12} verbatim.
        let first = &z.cache(1).items[0];
        assert_eq!(
            first.label,
            Label::Coded {
                file: 1,
                subset: set(4, &[1, 2]),
                index: 1
            }
        );
        assert_eq!(first.block.combination, vec![(0, 1)]);
        // Cache 2 stores index 2 of the same subfile, its second position.
        assert!(z.cache(2).items.iter().any(|i| i.label
            == Label::Coded {
                file: 1,
                subset: set(4, &[1, 2]),
                index: 2
            }));
    }

    #[test]
    fn corner_and_scheme2_occupancy() {
        let config = cfg(Scheme::Corner, 4, 2, None, 6);
        let lib = Library::random(&config, 5);
        let z = place_corner(&config, &lib).unwrap();
        assert!(occupancy(&z, &config)
            .iter()
            .all(|m| *m == Rational::from(3usize)));
        assert_eq!(
            z.cache(1)
                .items
                .iter()
                .map(|i| i.label.clone())
                .collect::<Vec<_>>(),
            (1..=6)
                .map(|n| Label::CornerCoded { file: n, column: 1 })
                .collect::<Vec<_>>()
        );

        let config = cfg(Scheme::Scheme2, 4, 2, None, 6);
        let lib = Library::random(&config, 5);
        let z = place_scheme2(&config, &lib).unwrap();
        assert!(occupancy(&z, &config)
            .iter()
            .all(|m| *m == Rational::new(3, 4).unwrap()));
        assert_eq!(z.cache(2).items.len(), 3);

        let config = cfg(Scheme::Scheme2, 4, 2, None, 4);
        let z = place_scheme2(&config, &Library::random(&config, 5)).unwrap();
        assert_eq!(z.cache(1).items.len(), 1);

        let config = cfg(Scheme::Scheme2, 5, 3, None, 10);
        let z = place_scheme2(&config, &Library::random(&config, 5)).unwrap();
        assert!(occupancy(&z, &config)
            .iter()
            .all(|m| *m == Rational::new(6, 5).unwrap()));
    }

    #[test]
    fn wrong_scheme_and_library_shape() {
        let config = cfg(Scheme::Mkr, 4, 2, Some(2), 6);
        let lib = Library::random(&config, 1);
        assert!(matches!(
            place_scheme1(&config, &lib),
            Err(PlacementError::WrongScheme { .. })
        ));
        let other = cfg(Scheme::Mkr, 4, 2, Some(2), 5);
        assert!(matches!(
            place_mkr(&other, &lib),
            Err(PlacementError::LibraryShape { .. })
        ));
    }
}
