//! Binomials, lexicographic k-subsets of `[C]`, the in-subset position map,
//! and exact rationals.
//!
//! Caches, users and files are 1-based throughout. Users and subfile labels
//! are subsets of `[C] = {1, ..., C}`, always ordered lexicographically.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CombinatoricsError {
    #[error("element {element} is not a member of {subset}")]
    NotAMember { element: usize, subset: Subset },
    #[error("rank {rank} outside 1..={count}")]
    RankOutOfRange { rank: usize, count: usize },
    #[error("invalid subset of [{universe}]: {members:?}")]
    InvalidSubset { universe: usize, members: Vec<usize> },
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse rational {0:?}")]
    ParseRational(String),
}

/// `n choose k` as an arbitrary-precision integer; zero when `k > n`.
pub fn binom(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `n choose k` for the small counts used in indexing; zero when `k > n`.
///
/// Panics if the value does not fit in `usize`.
pub fn choose(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    usize::try_from(acc).expect("binomial coefficient overflows usize")
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// A subset of `[universe]`, members strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subset {
    universe: usize,
    members: Vec<usize>,
}

impl Subset {
    pub fn new(universe: usize, mut members: Vec<usize>) -> Result<Self, CombinatoricsError> {
        members.sort_unstable();
        let valid =
            members.windows(2).all(|w| w[0] < w[1]) && members.iter().all(|&m| (1..=universe).contains(&m));
        if !valid {
            return Err(CombinatoricsError::InvalidSubset { universe, members });
        }
        Ok(Self { universe, members })
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, c: usize) -> bool {
        self.members.binary_search(&c).is_ok()
    }

    pub fn intersection_len(&self, other: &Subset) -> usize {
        self.members.iter().filter(|&&m| other.contains(m)).count()
    }

    pub fn is_disjoint(&self, other: &Subset) -> bool {
        self.intersection_len(other) == 0
    }

    pub fn is_subset_of(&self, other: &Subset) -> bool {
        self.members.iter().all(|&m| other.contains(m))
    }

    pub fn union(&self, other: &Subset) -> Subset {
        let mut members = self.members.clone();
        members.extend(other.members.iter().copied().filter(|&m| !self.contains(m)));
        members.sort_unstable();
        Subset {
            universe: self.universe,
            members,
        }
    }

    pub fn difference(&self, other: &Subset) -> Subset {
        Subset {
            universe: self.universe,
            members: self
                .members
                .iter()
                .copied()
                .filter(|&m| !other.contains(m))
                .collect(),
        }
    }

    /// 1-based lexicographic rank among the `len()`-subsets of `[universe]`.
    pub fn rank(&self) -> usize {
        let (n, k) = (self.universe, self.members.len());
        let mut rank = 0;
        let mut prev = 0;
        for (i, &a) in self.members.iter().enumerate() {
            for v in prev + 1..a {
                rank += choose(n - v, k - i - 1);
            }
            prev = a;
        }
        rank + 1
    }

    /// Inverse of [`Subset::rank`].
    pub fn unrank(universe: usize, k: usize, rank: usize) -> Result<Subset, CombinatoricsError> {
        let count = choose(universe, k);
        if rank == 0 || rank > count {
            return Err(CombinatoricsError::RankOutOfRange { rank, count });
        }
        let mut rest = rank - 1;
        let mut members = Vec::with_capacity(k);
        let mut v = 1;
        for i in 0..k {
            loop {
                let block = choose(universe - v, k - i - 1);
                if rest < block {
                    break;
                }
                rest -= block;
                v += 1;
            }
            members.push(v);
            v += 1;
        }
        Ok(Subset { universe, members })
    }

    /// Compact label such as `12` or `1,10,11` (commas only when some member exceeds 9).
    pub fn compact(&self) -> String {
        if self.universe <= 9 {
            self.members.iter().map(|m| m.to_string()).collect()
        } else {
            self.members
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join(",")
        }
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}")
    }
}

/// All `k`-subsets of `[universe]` in lexicographic order.
pub fn ksubsets(universe: usize, k: usize) -> Vec<Subset> {
    let mut out = Vec::with_capacity(choose(universe, k));
    if k > universe {
        return out;
    }
    let mut cur: Vec<usize> = (1..=k).collect();
    loop {
        out.push(Subset {
            universe,
            members: cur.clone(),
        });
        // Rightmost member that can still move right.
        let Some(i) = (0..k).rev().find(|&i| cur[i] < universe - (k - 1 - i)) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// 1-based position of cache `c` inside the sorted set `subset`.
pub fn phi(c: usize, subset: &Subset) -> Result<usize, CombinatoricsError> {
    subset
        .members
        .binary_search(&c)
        .map(|i| i + 1)
        .map_err(|_| CombinatoricsError::NotAMember {
            element: c,
            subset: subset.clone(),
        })
}

/// Exact rational number, always in lowest terms with a positive denominator.
///
/// Displays as `p/q` (integers included, e.g. `3/1`) so exported tables stay exact.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Result<Self, CombinatoricsError> {
        if denom == 0 {
            return Err(CombinatoricsError::DivisionByZero);
        }
        Ok(Self(BigRational::new(numer.into(), denom.into())))
    }

    pub fn from_big(numer: BigInt, denom: BigInt) -> Result<Self, CombinatoricsError> {
        if denom.is_zero() {
            return Err(CombinatoricsError::DivisionByZero);
        }
        Ok(Self(BigRational::new(numer, denom)))
    }

    pub fn integer(n: i64) -> Self {
        Self(BigRational::from_integer(n.into()))
    }

    pub fn from_biguint(n: BigUint) -> Self {
        Self(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn checked_div(&self, other: &Rational) -> Result<Rational, CombinatoricsError> {
        if other.is_zero() {
            return Err(CombinatoricsError::DivisionByZero);
        }
        Ok(Self(&self.0 / &other.0))
    }

    /// `max(self, 0)`.
    pub fn positive_part(&self) -> Rational {
        if self.is_negative() {
            Rational::zero()
        } else {
            self.clone()
        }
    }

    pub fn ceil_integer(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }
}

impl From<usize> for Rational {
    fn from(n: usize) -> Self {
        Self(BigRational::from_integer(n.into()))
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Self(r)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl FromStr for Rational {
    type Err = CombinatoricsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CombinatoricsError::ParseRational(s.to_string());
        let (n, d) = match s.trim().split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let n: BigInt = n.parse().map_err(|_| bad())?;
        let d: BigInt = d.parse().map_err(|_| bad())?;
        Rational::from_big(n, d)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

/// Panics on a zero divisor; use [`Rational::checked_div`] when that can happen.
impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        self.checked_div(&rhs).expect("rational division by zero")
    }
}

impl<'a> Div<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn div(self, rhs: &'a Rational) -> Rational {
        self.checked_div(rhs).expect("rational division by zero")
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn binom_values() {
        assert_eq!(binom(4, 2), BigUint::from(6u32));
        assert_eq!(binom(2, 3), BigUint::zero());
        assert_eq!(binom(9, 0), BigUint::one());
        assert_eq!(choose(4, 2), 6);
        assert_eq!(choose(2, 3), 0);
        assert_eq!(binom(64, 32).to_string(), "1832624140942590534");
    }

    #[test]
    fn pascal_identity() {
        for n in 1..=64u64 {
            for m in 1..=64u64 {
                assert_eq!(binom(n, m), binom(n - 1, m - 1) + binom(n - 1, m));
            }
        }
    }

    #[test]
    fn enumeration_order() {
        let got: Vec<String> = ksubsets(4, 2).iter().map(|s| s.compact()).collect();
        assert_eq!(got, ["12", "13", "14", "23", "24", "34"]);
        assert_eq!(ksubsets(3, 3).len(), 1);
        assert_eq!(ksubsets(3, 3)[0].members(), &[1, 2, 3]);
        assert_eq!(ksubsets(5, 2).len(), 10);
        assert_eq!(ksubsets(3, 0).len(), 1);
        assert!(ksubsets(2, 3).is_empty());
        for (n, k) in [(6, 3), (7, 2), (8, 5)] {
            let all = ksubsets(n, k);
            assert_eq!(all.len(), choose(n, k));
            assert!(all.windows(2).all(|w| w[0].members() < w[1].members()));
        }
    }

    #[test]
    fn rank_and_unrank() {
        let s = Subset::new(4, vec![1, 2]).unwrap();
        assert_eq!(s.rank(), 1);
        assert_eq!(Subset::unrank(4, 2, 6).unwrap().members(), &[3, 4]);
        assert_eq!(
            Subset::unrank(4, 2, 7),
            Err(CombinatoricsError::RankOutOfRange { rank: 7, count: 6 })
        );
        assert!(Subset::unrank(4, 2, 0).is_err());
        for (i, s) in ksubsets(6, 3).iter().enumerate() {
            assert_eq!(s.rank(), i + 1);
            assert_eq!(&Subset::unrank(6, 3, i + 1).unwrap(), s);
        }
    }

    #[test]
    fn invalid_subsets() {
        assert!(Subset::new(4, vec![1, 1]).is_err());
        assert!(Subset::new(4, vec![0, 2]).is_err());
        assert!(Subset::new(4, vec![5]).is_err());
        assert_eq!(Subset::new(4, vec![3, 1]).unwrap().members(), &[1, 3]);
    }

    #[test]
    fn phi_positions() {
        let t = Subset::new(4, vec![1, 3, 4]).unwrap();
        assert_eq!(phi(3, &t), Ok(2));
        assert_eq!(phi(1, &t), Ok(1));
        assert!(matches!(phi(2, &t), Err(CombinatoricsError::NotAMember { .. })));
        for t in ksubsets(5, 3) {
            let mut sorted = t.members().to_vec();
            sorted.sort();
            for c in 1..=5 {
                match sorted.iter().position(|&m| m == c) {
                    Some(p) => assert_eq!(phi(c, &t), Ok(p + 1)),
                    None => assert!(phi(c, &t).is_err()),
                }
            }
        }
    }

    #[test]
    fn rational_arithmetic() {
        assert_eq!(r(1, 2) + r(1, 3), r(5, 6));
        assert_eq!(Rational::from(2usize) / Rational::from(4usize), r(1, 2));
        assert_eq!(
            (Rational::from(6usize) - Rational::from(3usize)) / Rational::from(4usize),
            r(3, 4)
        );
        assert_eq!(r(2, 4).to_string(), "1/2");
        assert_eq!(r(-6, -2).to_string(), "3/1");
        assert_eq!(r(1, -3).to_string(), "-1/3");
        assert!(r(1, 3) < r(1, 2));
        assert_eq!(r(1, 3).max(r(1, 2)), r(1, 2));
        assert_eq!(Rational::new(1, 0), Err(CombinatoricsError::DivisionByZero));
        assert_eq!(
            r(1, 2).checked_div(&Rational::zero()),
            Err(CombinatoricsError::DivisionByZero)
        );
        assert_eq!("5/10".parse::<Rational>().unwrap(), r(1, 2));
        assert_eq!("7".parse::<Rational>().unwrap(), r(7, 1));
        assert!("1/0".parse::<Rational>().is_err());
        assert_eq!(r(-1, 2).positive_part(), Rational::zero());
    }

    proptest! {
        #[test]
        fn rational_field_laws(a in -50i64..50, b in 1i64..50, c in -50i64..50, d in 1i64..50) {
            let x = r(a, b);
            let y = r(c, d);
            prop_assert_eq!(&x + &y, r(a * d + c * b, b * d));
            prop_assert_eq!(&x * &y, r(a * c, b * d));
            prop_assert_eq!(&(&x + &y) - &y, x.clone());
            prop_assert!(x.denom() > &BigInt::zero());
            let shown: Rational = x.to_string().parse().unwrap();
            prop_assert_eq!(shown, x);
        }

        #[test]
        fn rank_roundtrip(n in 1usize..12, k in 0usize..12, pick in any::<usize>()) {
            prop_assume!(k <= n);
            let count = choose(n, k);
            let rank = pick % count + 1;
            let s = Subset::unrank(n, k, rank).unwrap();
            prop_assert_eq!(s.rank(), rank);
            prop_assert_eq!(s.len(), k);
        }
    }
}
