//! Reed–Solomon MDS codes: Vandermonde generators, systematic form,
//! encoding, and erasure decoding from any `k` coded symbols.
//!
//! Codes act on *blocks*: a message is `k` equal-length symbol vectors and
//! every coded block is the same linear combination applied position-wise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::gf::{Elem, Field, GfError, Matrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MdsError {
    #[error("invalid code parameters [{n}, {k}] over a field of {order} elements")]
    InvalidParameters { k: usize, n: usize, order: usize },
    #[error("expected {expected} message blocks, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("need {needed} distinct known positions, got {got}")]
    NotEnoughSymbols { needed: usize, got: usize },
    #[error("known position {0} repeated or out of range")]
    BadPosition(usize),
    #[error("blocks have unequal lengths")]
    RaggedBlocks,
    #[error("known symbols are not consistent with any codeword")]
    Inconsistent,
    #[error(transparent)]
    Field(#[from] GfError),
}

/// An `[n, k]` linear MDS code given by its `k x n` generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MdsCode {
    k: usize,
    n: usize,
    generator: Matrix,
    systematic: bool,
}

impl MdsCode {
    /// Vandermonde generator on the points `0, 1, ..., n-1`: entry `(i, j)` is `j^i`.
    pub fn reed_solomon(k: usize, n: usize, gf: &Field) -> Result<Self, MdsError> {
        if k == 0 || k > n || n > gf.order() {
            return Err(MdsError::InvalidParameters {
                k,
                n,
                order: gf.order(),
            });
        }
        let mut g = Matrix::zeros(k, n);
        for j in 0..n {
            for i in 0..k {
                g.set(i, j, gf.pow(j as Elem, i as u64));
            }
        }
        Ok(Self {
            k,
            n,
            generator: g,
            systematic: k == n,
        })
    }

    /// Systematic `[n, k]` Reed–Solomon code, `G = [I_k | P]`.
    pub fn systematic_reed_solomon(k: usize, n: usize, gf: &Field) -> Result<Self, MdsError> {
        Self::reed_solomon(k, n, gf)?.systematize(gf)
    }

    /// Left-multiplies by the inverse of the leading `k x k` block, giving
    /// `[I_k | P]` with the same row space.
    pub fn systematize(&self, gf: &Field) -> Result<Self, MdsError> {
        if self.systematic {
            return Ok(self.clone());
        }
        let lead = self.generator.column_block(0, self.k);
        let g = lead.inverse(gf)?.mul(&self.generator, gf)?;
        Ok(Self {
            k: self.k,
            n: self.n,
            generator: g,
            systematic: true,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_systematic(&self) -> bool {
        self.systematic
    }

    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    /// The `k x (n - k)` parity block `P` of a systematic generator.
    pub fn parity_block(&self) -> Option<Matrix> {
        self.systematic
            .then(|| self.generator.column_block(self.k, self.n))
    }

    /// Codeword symbols `message * G` for a length-`k` message.
    pub fn encode(&self, message: &[Elem], gf: &Field) -> Result<Vec<Elem>, MdsError> {
        if message.len() != self.k {
            return Err(MdsError::LengthMismatch {
                expected: self.k,
                got: message.len(),
            });
        }
        Ok(self.generator.left_mul_vec(message, gf)?)
    }

    /// Block-wise encoding: `k` message blocks to `n` coded blocks.
    pub fn encode_blocks(&self, message: &[&[Elem]], gf: &Field) -> Result<Vec<Vec<Elem>>, MdsError> {
        if message.len() != self.k {
            return Err(MdsError::LengthMismatch {
                expected: self.k,
                got: message.len(),
            });
        }
        let len = block_len(message.iter().copied())?;
        Ok((0..self.n)
            .map(|j| {
                gf.combine(
                    len,
                    message
                        .iter()
                        .enumerate()
                        .map(|(i, b)| (self.generator.get(i, j), *b)),
                )
            })
            .collect())
    }

    /// Recovers the message from `(position, symbol)` pairs.
    pub fn erasure_decode(&self, known: &[(usize, Elem)], gf: &Field) -> Result<Vec<Elem>, MdsError> {
        let blocks: Vec<(usize, Vec<Elem>)> = known.iter().map(|&(p, s)| (p, vec![s])).collect();
        let refs: Vec<(usize, &[Elem])> = blocks.iter().map(|(p, b)| (*p, b.as_slice())).collect();
        Ok(self
            .erasure_decode_blocks(&refs, gf)?
            .into_iter()
            .map(|b| b[0])
            .collect())
    }

    /// Recovers the `k` message blocks from any `k` or more distinct coded
    /// positions. Extra positions are checked for consistency.
    pub fn erasure_decode_blocks(
        &self,
        known: &[(usize, &[Elem])],
        gf: &Field,
    ) -> Result<Vec<Vec<Elem>>, MdsError> {
        let mut seen = vec![false; self.n];
        for &(p, _) in known {
            if p >= self.n || seen[p] {
                return Err(MdsError::BadPosition(p));
            }
            seen[p] = true;
        }
        if known.len() < self.k {
            return Err(MdsError::NotEnoughSymbols {
                needed: self.k,
                got: known.len(),
            });
        }
        let len = block_len(known.iter().map(|(_, b)| *b))?;
        let (head, tail) = known.split_at(self.k);
        let positions: Vec<usize> = head.iter().map(|(p, _)| *p).collect();
        // m * G_S = y_S  =>  m = y_S * G_S^{-1}
        let inv = self
            .generator
            .select_columns(&positions)
            .inverse(gf)
            .map_err(|_| MdsError::Inconsistent)?;
        let message: Vec<Vec<Elem>> = (0..self.k)
            .map(|i| {
                gf.combine(
                    len,
                    head.iter().enumerate().map(|(r, (_, b))| (inv.get(r, i), *b)),
                )
            })
            .collect();
        for &(p, block) in tail {
            let expect = gf.combine(
                len,
                message
                    .iter()
                    .enumerate()
                    .map(|(i, m)| (self.generator.get(i, p), m.as_slice())),
            );
            if expect != block {
                return Err(MdsError::Inconsistent);
            }
        }
        Ok(message)
    }

    /// Checks that the `k` columns at `positions` are linearly independent.
    pub fn columns_independent(&self, positions: &[usize], gf: &Field) -> bool {
        positions.len() == self.k && self.generator.select_columns(positions).rank(gf) == self.k
    }
}

/// Every `k`-subset of columns is invertible: exhaustively when `n <= 12`,
/// otherwise on 200 random subsets drawn from `seed`.
pub fn any_k_columns_invertible(code: &MdsCode, gf: &Field, seed: u64) -> bool {
    let (k, n) = (code.k(), code.n());
    if n <= 12 {
        return crate::combinatorics::ksubsets(n, k).iter().all(|s| {
            let cols: Vec<usize> = s.members().iter().map(|&c| c - 1).collect();
            code.columns_independent(&cols, gf)
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..200).all(|_| {
        let mut cols = rand::seq::index::sample(&mut rng, n, k).into_vec();
        cols.sort_unstable();
        code.columns_independent(&cols, gf)
    })
}

fn block_len<'a, I: IntoIterator<Item = &'a [Elem]>>(blocks: I) -> Result<usize, MdsError> {
    let mut it = blocks.into_iter();
    let Some(first) = it.next() else {
        return Ok(0);
    };
    let len = first.len();
    if it.any(|b| b.len() != len) {
        return Err(MdsError::RaggedBlocks);
    }
    Ok(len)
}
