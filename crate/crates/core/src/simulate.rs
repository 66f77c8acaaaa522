//! End-to-end runs: place, deliver, decode every user, and compare the
//! measured memory and rate with the closed forms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{mkr_point, scheme1_memory};
use crate::combinatorics::{choose, Rational};
use crate::decode::{decode_user, OracleUser, VerificationReport};
use crate::delivery::{deliver, measured_rate};
use crate::dump::symbol_width;
use crate::model::{BroadcastBatch, CacheContents, DemandVector, Library, Scheme, SchemeConfig};

/// `count` demand vectors from a ChaCha8 stream keyed by `seed`, separate
/// from the stream that fills the library.
pub fn random_demands(config: &SchemeConfig, seed: u64, count: usize) -> Vec<DemandVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    (0..count)
        .map(|_| DemandVector::random(config, &mut rng))
        .collect()
}

/// All `N^K` demand vectors when there are at most `limit`; otherwise the
/// single round-robin vector. The flag reports the fallback.
pub fn exhaustive_demands(config: &SchemeConfig, limit: u128) -> (Vec<DemandVector>, bool) {
    let total = (config.files() as u128).checked_pow(config.users() as u32);
    match total {
        Some(n) if n <= limit => (DemandVector::exhaustive(config).collect(), false),
        _ => (vec![DemandVector::round_robin(config)], true),
    }
}

/// Cache size the construction should use, in files.
pub fn expected_memory(config: &SchemeConfig) -> Rational {
    let (c, r, n) = (config.caches(), config.access(), config.files());
    match config.scheme() {
        Scheme::Mkr => mkr_point(c, r, config.t(), n).expect("validated").memory,
        Scheme::Scheme1 => scheme1_memory(c, r, config.t(), n).expect("validated"),
        Scheme::Corner => Rational::from(n) / Rational::from(r),
        Scheme::Scheme2 => Rational::from(n - choose(c - 1, r)) / Rational::from(c),
    }
}

/// Rate the delivery should use for demand vector `d`, in files.
pub fn expected_rate(config: &SchemeConfig, d: &DemandVector) -> Rational {
    let (c, r) = (config.caches(), config.access());
    match config.scheme() {
        Scheme::Mkr | Scheme::Scheme1 => {
            Rational::from(choose(c, config.t() + r)) / Rational::from(choose(c, config.t()))
        }
        Scheme::Corner => Rational::zero(),
        Scheme::Scheme2 => Rational::from(d.distinct().len().min(choose(c - 1, r))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandOutcome {
    pub demands: Vec<usize>,
    pub rate: Rational,
    pub expected_rate: Rational,
    pub broadcast_labels_ok: bool,
    pub users: Vec<VerificationReport>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub scheme: Scheme,
    pub config: SchemeConfig,
    pub seed: Option<u64>,
    pub memory: Vec<Rational>,
    pub expected_memory: Rational,
    pub memory_ok: bool,
    pub cache_labels_ok: bool,
    pub demand_vectors: Vec<DemandOutcome>,
    pub passed: bool,
}

/// Per-user reusable state: the oracle's reduced cache rows.
pub struct Prepared<'a> {
    config: &'a SchemeConfig,
    library: &'a Library,
    caches: &'a CacheContents,
    oracles: Option<Vec<Result<OracleUser, String>>>,
}

impl<'a> Prepared<'a> {
    pub fn new(
        config: &'a SchemeConfig,
        library: &'a Library,
        caches: &'a CacheContents,
        oracle: bool,
    ) -> Self {
        let oracles = oracle.then(|| {
            config
                .user_sets()
                .par_iter()
                .map(|u| OracleUser::new(config, caches, u).map_err(|e| e.to_string()))
                .collect()
        });
        Self {
            config,
            library,
            caches,
            oracles,
        }
    }

    /// Delivers for `d` and decodes every user with both decoders.
    pub fn run_demand(&self, d: &DemandVector) -> DemandOutcome {
        let config = self.config;
        let gf = config.field();
        let batch = match deliver(config, self.library, d) {
            Ok(b) => b,
            Err(e) => {
                return DemandOutcome {
                    demands: d.as_slice().to_vec(),
                    rate: Rational::zero(),
                    expected_rate: expected_rate(config, d),
                    broadcast_labels_ok: false,
                    users: vec![],
                    passed: false,
                }
                .with_error(e.to_string())
            }
        };
        let rate = measured_rate(&batch, config.file_len());
        let want_rate = expected_rate(config, d);
        let labels_ok = batch
            .messages
            .iter()
            .flat_map(|m| &m.blocks)
            .all(|b| b.matches_library(config, self.library, &gf));
        let users: Vec<VerificationReport> = config
            .user_sets()
            .iter()
            .enumerate()
            .map(|(i, u)| self.verify_user(&batch, d, i, u))
            .collect();
        let passed = labels_ok && rate == want_rate && users.iter().all(|u| u.decoded);
        DemandOutcome {
            demands: d.as_slice().to_vec(),
            rate,
            expected_rate: want_rate,
            broadcast_labels_ok: labels_ok,
            users,
            passed,
        }
    }

    fn verify_user(
        &self,
        batch: &BroadcastBatch,
        d: &DemandVector,
        index: usize,
        user: &crate::Subset,
    ) -> VerificationReport {
        let config = self.config;
        let want = d.of(user);
        let truth = self.library.file(want);
        let bytes = config.file_len() * symbol_width(config.field_degree());
        let mut report = VerificationReport {
            user: user.clone(),
            scheme: config.scheme(),
            decoded: false,
            stage_counts: vec![],
            bytes_compared: 0,
            oracle: None,
            error: None,
        };
        match decode_user(config, self.caches, batch, user, want) {
            Ok(got) => {
                report.stage_counts = got.stages;
                report.bytes_compared = bytes;
                if got.file != truth {
                    report.error = Some("structured decoder output differs from the library".into());
                    return report;
                }
            }
            Err(e) => {
                report.error = Some(e.to_string());
                return report;
            }
        }
        if let Some(oracles) = &self.oracles {
            let verdict = match &oracles[index] {
                Ok(o) => o.decode(config, batch, want).map_err(|e| e.to_string()),
                Err(e) => Err(e.clone()),
            };
            match verdict {
                Ok(v) if v == truth => report.oracle = Some(true),
                Ok(_) => {
                    report.oracle = Some(false);
                    report.error = Some("oracle output differs from the library".into());
                    return report;
                }
                Err(e) => {
                    report.oracle = Some(false);
                    report.error = Some(e);
                    return report;
                }
            }
        }
        report.decoded = true;
        report
    }
}

impl DemandOutcome {
    fn with_error(mut self, e: String) -> Self {
        self.users.push(VerificationReport {
            user: crate::Subset::new(1, vec![]).expect("empty set"),
            scheme: Scheme::Mkr,
            decoded: false,
            stage_counts: vec![],
            bytes_compared: 0,
            oracle: None,
            error: Some(e),
        });
        self
    }
}

/// Full run over `demands`, fanned out across demand vectors. The report
/// keeps the input order.
pub fn simulate(
    config: &SchemeConfig,
    library: &Library,
    caches: &CacheContents,
    demands: &[DemandVector],
    oracle: bool,
) -> SimulationReport {
    let gf = config.field();
    let memory: Vec<Rational> = (1..=config.caches())
        .map(|c| caches.occupancy(c, config.file_len()))
        .collect();
    let want_memory = expected_memory(config);
    let memory_ok = memory.iter().all(|m| *m == want_memory);
    let cache_labels_ok = caches
        .caches
        .iter()
        .flat_map(|c| &c.items)
        .all(|i| i.block.matches_library(config, library, &gf));
    let prepared = Prepared::new(config, library, caches, oracle);
    let outcomes: Vec<DemandOutcome> = demands.par_iter().map(|d| prepared.run_demand(d)).collect();
    let passed = memory_ok && cache_labels_ok && outcomes.iter().all(|o| o.passed);
    SimulationReport {
        scheme: config.scheme(),
        config: config.clone(),
        seed: library.seed(),
        memory,
        expected_memory: want_memory,
        memory_ok,
        cache_labels_ok,
        demand_vectors: outcomes,
        passed,
    }
}
