//! Exact rate-memory trade-offs, the lower bound, and identity checks.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combinatorics::{choose, factorial, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("invalid regime: {0}")]
    Regime(String),
}

fn q(n: usize) -> Rational {
    Rational::from(n)
}

fn frac(a: usize, b: usize) -> Rational {
    q(a) / q(b)
}

/// `binom(n, k)` with `binom(n, k) = 0` for negative `k`.
fn choose_signed(n: usize, k: isize) -> usize {
    if k < 0 {
        0
    } else {
        choose(n, k as usize)
    }
}

fn check_regime(c: usize, r: usize, n: usize) -> Result<(), AnalysisError> {
    if r == 0 || r >= c || n == 0 {
        return Err(AnalysisError::Regime(format!(
            "need 1 <= r < C and N >= 1, got C={c}, r={r}, N={n}"
        )));
    }
    Ok(())
}

/// Which construction a trade-off point comes from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Mkr {
        t: usize,
    },
    Scheme1 {
        t: usize,
    },
    /// `t = C - r + 1`, zero rate at `M = N / r`.
    Corner,
    /// `((N - binom(C-1, r)) / C, binom(C-1, r))`.
    Scheme2Corner,
    /// `(0, N)`: broadcast everything.
    Scheme2Zero,
    /// `lambda` of the left point plus `1 - lambda` of the right one.
    Shared {
        left: Box<Provenance>,
        right: Box<Provenance>,
        lambda: Rational,
    },
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Mkr { t } => write!(f, "mkr(t={t})"),
            Provenance::Scheme1 { t } => write!(f, "scheme1(t={t})"),
            Provenance::Corner => write!(f, "corner"),
            Provenance::Scheme2Corner => write!(f, "scheme2-corner"),
            Provenance::Scheme2Zero => write!(f, "scheme2-zero"),
            Provenance::Shared { left, right, lambda } => {
                write!(f, "shared({left};{right};{lambda})")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub memory: Rational,
    pub rate: Rational,
    pub provenance: Provenance,
}

/// Value of the lower bound at one memory size and the maximizing `(s, ell)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundResult {
    pub memory: Rational,
    pub bound: Rational,
    pub argmax: (usize, usize),
}

/// `(Nt/C, binom(C, t+r) / binom(C, t))`.
pub fn mkr_point(c: usize, r: usize, t: usize, n: usize) -> Result<TradeoffPoint, AnalysisError> {
    check_regime(c, r, n)?;
    if t == 0 || t > c {
        return Err(AnalysisError::Regime(format!("t={t} outside 1..={c}")));
    }
    Ok(TradeoffPoint {
        memory: frac(n * t, c),
        rate: frac(choose(c, t + r), choose(c, t)),
        provenance: Provenance::Mkr { t },
    })
}

/// Closed-form cache memory of the multi-round coded placement, `t` in `1..=C-r+1`.
pub fn scheme1_memory(c: usize, r: usize, t: usize, n: usize) -> Result<Rational, AnalysisError> {
    check_regime(c, r, n)?;
    if t == 0 || t > c - r + 1 {
        return Err(AnalysisError::Regime(format!("t={t} outside 1..={}", c - r + 1)));
    }
    let (ci, ri, ti) = (c as isize, r as isize, t as isize);
    let sum: Rational = if t >= r {
        (1..r)
            .map(|i| {
                let ii = i as isize;
                frac(r - i, r) * q(choose(r, i - 1)) * q(choose_signed(c - r, ti - ri + ii - 1))
            })
            .sum()
    } else {
        (1..t)
            .map(|i| {
                let ii = i as isize;
                frac(t - i, r)
                    * q(choose_signed(r, ti - ii + 1))
                    * q(choose_signed((ci - ri) as usize, ii - 1))
            })
            .sum()
    };
    Ok(q(n) * (frac(t, c) - sum / q(choose(c, t))))
}

/// The same memory counted round by round: `(r~-1)! B` round-0 pieces plus
/// `r~! / ((r~-b)(r~-b+1)) * (B - D_b)` parities for each round `b`, per file,
/// in units of `r~! binom(C, t)` pieces.
pub fn scheme1_memory_by_rounds(c: usize, r: usize, t: usize, n: usize) -> Result<Rational, AnalysisError> {
    check_regime(c, r, n)?;
    if t == 0 || t > c - r + 1 {
        return Err(AnalysisError::Regime(format!("t={t} outside 1..={}", c - r + 1)));
    }
    let rt = r.min(t);
    let full = factorial(rt);
    let big_b = choose(c - 1, t - 1);
    let (ci, ri, ti) = (c as isize, r as isize, t as isize);
    let known = |b: usize| -> usize {
        (1..=b as isize)
            .map(|i| {
                if t >= r {
                    choose_signed(r - 1, ri - i) * choose_signed(c - r, ti - ri + i - 1)
                } else {
                    choose_signed(r - 1, ti - i) * choose_signed((ci - ri) as usize, i - 1)
                }
            })
            .sum()
    };
    let mut pieces = q(factorial(rt - 1) * big_b);
    for b in 1..rt {
        pieces = pieces + frac(full, (rt - b) * (rt - b + 1)) * q(big_b - known(b));
    }
    Ok(q(n) * pieces / q(full * choose(c, t)))
}

/// Coded-placement points for `t = 1..=C-r+1`; the last is the zero-rate corner.
pub fn scheme1_points(c: usize, r: usize, n: usize) -> Result<Vec<TradeoffPoint>, AnalysisError> {
    (1..=c - r + 1)
        .map(|t| {
            Ok(TradeoffPoint {
                memory: scheme1_memory(c, r, t, n)?,
                rate: frac(choose(c, t + r), choose(c, t)),
                provenance: if t == c - r + 1 {
                    Provenance::Corner
                } else {
                    Provenance::Scheme1 { t }
                },
            })
        })
        .collect()
}

/// Endpoints of the `R = N - CM` segment, when `N > binom(C-1, r)`.
pub fn scheme2_segment(c: usize, r: usize, n: usize) -> Result<Option<[TradeoffPoint; 2]>, AnalysisError> {
    check_regime(c, r, n)?;
    let k_prime = choose(c - 1, r);
    if n <= k_prime {
        return Ok(None);
    }
    Ok(Some([
        TradeoffPoint {
            memory: Rational::zero(),
            rate: q(n),
            provenance: Provenance::Scheme2Zero,
        },
        TradeoffPoint {
            memory: frac(n - k_prime, c),
            rate: q(k_prime),
            provenance: Provenance::Scheme2Corner,
        },
    ]))
}

/// Lower convex envelope of the achievable points, with memory sharing in between.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Envelope {
    pub vertices: Vec<TradeoffPoint>,
}

impl Envelope {
    /// Achievable rate at memory `m`; zero past the last vertex.
    pub fn eval(&self, m: &Rational) -> Rational {
        self.eval_point(m).rate
    }

    pub fn eval_point(&self, m: &Rational) -> TradeoffPoint {
        let last = self.vertices.last().expect("envelope has a vertex");
        if m >= &last.memory {
            return TradeoffPoint {
                memory: m.clone(),
                rate: last.rate.clone(),
                provenance: last.provenance.clone(),
            };
        }
        if let Some(v) = self.vertices.iter().find(|v| &v.memory == m) {
            return v.clone();
        }
        let (a, b) = self
            .vertices
            .windows(2)
            .map(|w| (&w[0], &w[1]))
            .find(|(a, b)| &a.memory <= m && m <= &b.memory)
            .expect("memory inside the envelope range");
        let lambda = &(&b.memory - m) / &(&b.memory - &a.memory);
        let rate = &(&lambda * &a.rate) + &(&(Rational::one() - lambda.clone()) * &b.rate);
        TradeoffPoint {
            memory: m.clone(),
            rate,
            provenance: Provenance::Shared {
                left: Box::new(a.provenance.clone()),
                right: Box::new(b.provenance.clone()),
                lambda,
            },
        }
    }
}

/// Hull of `(0, N)`, the scheme 2 corner when it exists, and every scheme 1 point.
pub fn achievable_envelope(c: usize, r: usize, n: usize) -> Result<Envelope, AnalysisError> {
    let mut pts = vec![TradeoffPoint {
        memory: Rational::zero(),
        rate: q(n),
        provenance: Provenance::Scheme2Zero,
    }];
    if let Some([_, corner]) = scheme2_segment(c, r, n)? {
        pts.push(corner);
    }
    pts.extend(scheme1_points(c, r, n)?);
    // Same memory: keep the lower rate.
    pts.sort_by(|a, b| a.memory.cmp(&b.memory).then(a.rate.cmp(&b.rate)));
    pts.dedup_by(|later, earlier| later.memory == earlier.memory);
    let mut hull: Vec<TradeoffPoint> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (o, a) = (&hull[hull.len() - 2], &hull[hull.len() - 1]);
            let cross = &(&(&a.memory - &o.memory) * &(&p.rate - &o.rate))
                - &(&(&a.rate - &o.rate) * &(&p.memory - &o.memory));
            if cross.is_negative() || cross.is_zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    // Memory beyond the first zero-rate point is wasted.
    if let Some(i) = hull.iter().position(|v| v.rate.is_zero()) {
        hull.truncate(i + 1);
    }
    Ok(Envelope { vertices: hull })
}

/// `min(C - s, least i >= 0 with binom(s + i, r) >= ceil(N / ell))`.
pub fn omega(s: usize, ell: usize, c: usize, r: usize, n: usize) -> usize {
    let target = n.div_ceil(ell);
    (0..=c - s).find(|&i| choose(s + i, r) >= target).unwrap_or(c - s)
}

/// The bracket for one `(s, ell)`, before clipping.
pub fn bound_term(c: usize, r: usize, n: usize, m: &Rational, s: usize, ell: usize) -> Rational {
    let w = omega(s, ell, c, r, n);
    let pos = |x: isize| q(x.max(0) as usize);
    let (ni, li) = (n as isize, ell as isize);
    let inner = q(n)
        - frac(w, s + w) * pos(ni - li * choose(s, r) as isize)
        - pos(ni - li * choose(c, r) as isize)
        - q(s) * m.clone();
    inner / q(ell)
}

/// Maximizes the bound over `s in r..=C`, `ell in 1..=ceil(N / binom(s, r))`;
/// clipped at zero, ties to the lexicographically smallest `(s, ell)`.
pub fn lower_bound(c: usize, r: usize, n: usize, m: &Rational) -> Result<BoundResult, AnalysisError> {
    check_regime(c, r, n)?;
    let mut best: Option<(Rational, (usize, usize))> = None;
    for s in r..=c {
        for ell in 1..=n.div_ceil(choose(s, r)) {
            let v = bound_term(c, r, n, m, s, ell);
            if best.as_ref().is_none_or(|(b, _)| &v > b) {
                best = Some((v, (s, ell)));
            }
        }
    }
    let (value, argmax) = best.expect("non-empty search range");
    Ok(BoundResult {
        memory: m.clone(),
        bound: if value.is_negative() {
            Rational::zero()
        } else {
            value
        },
        argmax,
    })
}

/// One equality check between the envelope and the bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeCheck {
    pub regime: String,
    pub memory: Rational,
    pub achievable: Rational,
    pub bound: Rational,
    pub expected: Rational,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub checks: Vec<RegimeCheck>,
}

impl RegimeReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// Samples `lo`, `hi`, and `interior` evenly spaced points strictly between.
pub fn sample_interval(lo: &Rational, hi: &Rational, interior: usize) -> Vec<Rational> {
    let mut v = vec![lo.clone()];
    let step = &(hi - lo) / &q(interior + 1);
    for k in 1..=interior {
        v.push(lo + &(&q(k) * &step));
    }
    v.push(hi.clone());
    v
}

/// Checks `envelope = bound = 1 - rM/N` on `[N(K-1)/(rK), N/r]`, and, when
/// `binom(C-1, r) < N <= binom(C, r)`, `envelope = bound = N - CM` on
/// `[0, (N - binom(C-1, r))/C]`, at the endpoints and `interior` points between.
pub fn check_optimality_regimes(
    c: usize,
    r: usize,
    n: usize,
    interior: usize,
) -> Result<RegimeReport, AnalysisError> {
    let env = achievable_envelope(c, r, n)?;
    let k = choose(c, r);
    let mut checks = Vec::new();
    let mut run = |name: &str, lo: Rational, hi: Rational, expect: &dyn Fn(&Rational) -> Rational| {
        for m in sample_interval(&lo, &hi, interior) {
            let achievable = env.eval(&m);
            let bound = lower_bound(c, r, n, &m).expect("validated").bound;
            let expected = expect(&m);
            checks.push(RegimeCheck {
                regime: name.to_string(),
                holds: achievable == expected && bound == expected,
                memory: m,
                achievable,
                bound,
                expected,
            });
        }
    };
    run("high-memory", q(n) * frac(k - 1, r * k), frac(n, r), &|m| {
        Rational::one() - q(r) * m.clone() / q(n)
    });
    let k_prime = choose(c - 1, r);
    if k_prime < n && n <= k {
        run("low-memory", Rational::zero(), frac(n - k_prime, c), &|m| {
            q(n) - q(c) * m.clone()
        });
    }
    Ok(RegimeReport { checks })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub params: Vec<usize>,
    pub holds: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub checked: usize,
    pub failures: Vec<IdentityCheck>,
}

impl IdentityReport {
    fn record(&mut self, name: &str, params: Vec<usize>, holds: bool) {
        self.checked += 1;
        if !holds {
            self.failures.push(IdentityCheck {
                name: name.to_string(),
                params,
                holds,
            });
        }
    }

    pub fn all_hold(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Memory identities for every `C <= max_c`, `r < C`, and the counting
/// identities behind them. Failures are collected, not raised.
pub fn check_identities(max_c: usize) -> IdentityReport {
    let mut rep = IdentityReport::default();
    for c in 2..=max_c {
        for r in 1..c {
            let kk = choose(c, r);
            rep.record(
                "top corner memory N/r",
                vec![c, r],
                scheme1_memory(c, r, c - r + 1, 1) == Ok(frac(1, r)),
            );
            rep.record(
                "t = C - r memory N(K-1)/(rK)",
                vec![c, r],
                scheme1_memory(c, r, c - r, 1) == Ok(frac(kk - 1, r * kk)),
            );
            for t in 1..=c - r + 1 {
                rep.record(
                    "closed form equals round sum",
                    vec![c, r, t],
                    scheme1_memory(c, r, t, 1) == scheme1_memory_by_rounds(c, r, t, 1),
                );
            }
        }
    }
    for n1 in 0..=20 {
        for n2 in 0..=20 {
            if n1 + n2 == 0 {
                continue;
            }
            for m in 0..=20 {
                let weighted: usize = (0..=m).map(|k1| k1 * choose(n1, k1) * choose(n2, m - k1)).sum();
                rep.record(
                    "weighted Vandermonde",
                    vec![n1, n2, m],
                    q(weighted) == frac(m * n1, n1 + n2) * q(choose(n1 + n2, m)),
                );
                let plain: usize = (0..=m).map(|k| choose(n1, k) * choose(n2, m - k)).sum();
                rep.record("Vandermonde", vec![n1, n2, m], plain == choose(n1 + n2, m));
            }
        }
    }
    for r in 1..=10 {
        let lhs: Rational = (1..r).map(|b| frac(factorial(r), (r - b) * (r - b + 1))).sum();
        rep.record(
            "telescoping round sizes",
            vec![r],
            lhs == q(factorial(r - 1) * (r - 1)),
        );
    }
    rep
}

/// One line of the trade-off table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TradeoffRow {
    pub memory: Rational,
    pub achievable: Rational,
    pub bound: Rational,
    pub provenance: String,
    pub argmax: (usize, usize),
}

/// Scheme points (MKR, scheme 1, scheme 2) followed by `grid` envelope
/// samples evenly spaced over `[0, N/r]` merged with the envelope vertices.
pub fn tradeoff_rows(c: usize, r: usize, n: usize, grid: usize) -> Result<Vec<TradeoffRow>, AnalysisError> {
    let env = achievable_envelope(c, r, n)?;
    let row = |p: &TradeoffPoint| -> TradeoffRow {
        let b = lower_bound(c, r, n, &p.memory).expect("validated");
        TradeoffRow {
            memory: p.memory.clone(),
            achievable: p.rate.clone(),
            bound: b.bound,
            provenance: p.provenance.to_string(),
            argmax: b.argmax,
        }
    };
    let mut rows = Vec::new();
    for t in 1..=c {
        rows.push(row(&mkr_point(c, r, t, n)?));
    }
    if let Some(seg) = scheme2_segment(c, r, n)? {
        rows.extend(seg.iter().map(row));
    }
    rows.extend(scheme1_points(c, r, n)?.iter().map(row));
    let top = frac(n, r);
    let mut ms: Vec<Rational> = if grid >= 2 {
        (0..grid).map(|k| &top * &frac(k, grid - 1)).collect()
    } else {
        Vec::new()
    };
    ms.extend(env.vertices.iter().map(|v| v.memory.clone()));
    ms.sort();
    ms.dedup();
    for m in ms {
        let mut line = row(&env.eval_point(&m));
        line.provenance = format!("envelope:{}", line.provenance);
        rows.push(line);
    }
    Ok(rows)
}

/// Renders rows as `M,R_achievable,R_bound,provenance,argmax_s,argmax_l`.
pub fn tradeoff_csv(rows: &[TradeoffRow], decimal: bool) -> String {
    let fmt = |x: &Rational| {
        if decimal {
            format!("{}", x.to_f64())
        } else {
            x.to_string()
        }
    };
    let mut out = String::from("M,R_achievable,R_bound,provenance,argmax_s,argmax_l\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt(&r.memory),
            fmt(&r.achievable),
            fmt(&r.bound),
            r.provenance,
            r.argmax.0,
            r.argmax.1
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> Rational {
        Rational::new(a, b).unwrap()
    }

    /// Direct enumeration of the bracket over a wider `ell` range, as an
    /// independent check of the search bounds and tie-breaking.
    fn brute_bound(c: usize, rr: usize, n: usize, m: &Rational) -> (Rational, (usize, usize)) {
        let mut best = (None::<Rational>, (0, 0));
        for s in rr..=c {
            for ell in 1..=n.div_ceil(choose(s, rr)) {
                let target = n.div_ceil(ell);
                let mut w = c - s;
                for i in 0..=c - s {
                    if choose(s + i, rr) >= target {
                        w = i;
                        break;
                    }
                }
                let a = (n as i64 - (ell * choose(s, rr)) as i64).max(0);
                let b = (n as i64 - (ell * choose(c, rr)) as i64).max(0);
                let v = (Rational::integer(n as i64)
                    - r(w as i64 * a, (s + w) as i64)
                    - Rational::integer(b)
                    - Rational::integer(s as i64) * m.clone())
                    / Rational::integer(ell as i64);
                if best.0.as_ref().is_none_or(|x| &v > x) {
                    best = (Some(v), (s, ell));
                }
            }
        }
        let v = best.0.unwrap();
        (if v.is_negative() { Rational::zero() } else { v }, best.1)
    }

    #[test]
    fn mkr_points() {
        let p = mkr_point(4, 2, 2, 6).unwrap();
        assert_eq!((p.memory, p.rate), (r(3, 1), r(1, 6)));
        let p = mkr_point(8, 3, 1, 56).unwrap();
        assert_eq!((p.memory, p.rate), (r(7, 1), r(70, 8)));
        assert!(mkr_point(4, 2, 3, 6).unwrap().rate.is_zero());
    }

    #[test]
    fn scheme1_memory_values() {
        assert_eq!(scheme1_memory(4, 2, 2, 6).unwrap(), r(5, 2));
        assert_eq!(scheme1_memory(4, 2, 3, 6).unwrap(), r(3, 1));
        assert_eq!(scheme1_memory(4, 2, 1, 6).unwrap(), r(3, 2));
        assert!(scheme1_memory(4, 2, 4, 6).is_err());
        assert!(scheme1_memory(4, 4, 1, 6).is_err());
    }

    #[test]
    fn envelope_vertices() {
        let e = achievable_envelope(4, 2, 6).unwrap();
        let v: Vec<(Rational, Rational)> = e
            .vertices
            .iter()
            .map(|p| (p.memory.clone(), p.rate.clone()))
            .collect();
        assert_eq!(
            v,
            vec![
                (r(0, 1), r(6, 1)),
                (r(3, 4), r(3, 1)),
                (r(3, 2), r(1, 1)),
                (r(5, 2), r(1, 6)),
                (r(3, 1), r(0, 1))
            ]
        );
        let e = achievable_envelope(5, 3, 10).unwrap();
        let v: Vec<(Rational, Rational)> = e
            .vertices
            .iter()
            .map(|p| (p.memory.clone(), p.rate.clone()))
            .collect();
        assert_eq!(
            v,
            vec![
                (r(0, 1), r(10, 1)),
                (r(6, 5), r(4, 1)),
                (r(2, 1), r(1, 1)),
                (r(3, 1), r(1, 10)),
                (r(10, 3), r(0, 1))
            ]
        );
        assert_eq!(e.eval(&r(5, 1)), r(0, 1));
        let e = achievable_envelope(4, 2, 6).unwrap();
        assert_eq!(e.eval(&r(3, 8)), r(9, 2));
        assert_eq!(e.eval(&r(11, 4)), r(1, 12));
    }

    #[test]
    fn omega_examples() {
        assert_eq!(omega(2, 6, 4, 2, 6), 0);
        assert_eq!(omega(2, 1, 4, 2, 6), 2);
        assert_eq!(omega(4, 1, 4, 2, 6), 0);
        // The cap C - s applies when even all caches fall short.
        assert_eq!(omega(2, 1, 4, 2, 100), 2);
    }

    #[test]
    fn bound_examples() {
        let b = lower_bound(4, 2, 6, &r(3, 4)).unwrap();
        assert_eq!((b.bound, b.argmax), (r(3, 1), (3, 1)));
        let b = lower_bound(4, 2, 6, &r(5, 2)).unwrap();
        assert_eq!((b.bound, b.argmax), (r(1, 6), (2, 6)));
        assert_eq!(lower_bound(4, 2, 6, &r(6, 1)).unwrap().bound, r(0, 1));
        assert_eq!(lower_bound(4, 2, 6, &r(0, 1)).unwrap().bound, r(6, 1));
        for m in [r(0, 1), r(3, 8), r(1, 1), r(2, 1), r(11, 4), r(3, 1)] {
            let b = lower_bound(4, 2, 6, &m).unwrap();
            assert_eq!((b.bound, b.argmax), brute_bound(4, 2, 6, &m), "M={m}");
        }
    }

    #[test]
    fn bound_substitutions() {
        for (c, rr, n) in [(4, 2, 6), (5, 3, 10), (6, 2, 9)] {
            for m in [r(0, 1), r(1, 3), r(7, 5)] {
                assert_eq!(
                    bound_term(c, rr, n, &m, rr, n),
                    Rational::one() - Rational::integer(rr as i64) * m.clone() / Rational::integer(n as i64)
                );
                let k = choose(c, rr);
                if n <= k {
                    assert_eq!(
                        bound_term(c, rr, n, &m, c, 1),
                        Rational::integer(n as i64) - Rational::integer(c as i64) * m.clone()
                    );
                }
            }
        }
    }

    #[test]
    fn regimes_four_two_six() {
        let rep = check_optimality_regimes(4, 2, 6, 5).unwrap();
        assert!(rep.all_hold(), "{rep:?}");
        assert_eq!(rep.checks.len(), 14);
        let rep = check_optimality_regimes(5, 3, 10, 5).unwrap();
        assert!(rep.all_hold());
        assert!(rep.checks.iter().any(|c| c.regime == "low-memory"));
    }

    #[test]
    fn identities_hold() {
        let rep = check_identities(8);
        assert!(rep.all_hold(), "{:?}", rep.failures);
        assert!(rep.checked > 18_000);
    }

    #[test]
    fn lemma_example() {
        // n1 = n2 = m = 2: 1*2*2 + 2*1*1 = 6 = 2*2/4*6.
        let sum: usize = (0..=2).map(|k1| k1 * choose(2, k1) * choose(2, 2 - k1)).sum();
        assert_eq!(sum, 6);
    }

    #[test]
    fn csv_shape() {
        let rows = tradeoff_rows(4, 2, 6, 5).unwrap();
        let csv = tradeoff_csv(&rows, false);
        assert!(csv.starts_with("M,R_achievable,R_bound,provenance,argmax_s,argmax_l\n"));
        assert!(csv.contains("3/4,3/1,3/1,scheme2-corner,3,1"));
        assert!(csv.contains("5/2,1/6,1/6,scheme1(t=2),2,6"));
        assert!(csv.contains("3/1,0/1,0/1,corner,"));
        let dec = tradeoff_csv(&rows, true);
        assert!(dec.contains("0.75,3,3,scheme2-corner"));
    }
}
