//! ψ and κ intersection numbers on `M̄_{g,n}`.
//!
//! Pure ψ correlators come from the DVV recursion, with the string equation
//! removing `τ_0` insertions. κ classes are traded for extra ψ-points:
//! `π_*` of `Π ψ_{n+j}^{b_j+1}` is the sum over permutations of the extra
//! points of `Π_{cycles} κ_{Σ b}`, which inverts to a signed sum over set
//! partitions.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::ring::{double_factorial, factorial, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntersectError {
    #[error("time t_{0} is needed but not provided")]
    MissingTime(usize),
}

fn df(n: i64) -> BigRational {
    BigRational::from_integer(double_factorial(n))
}

type Cache = HashMap<(usize, Vec<i64>), BigRational>;

fn cache() -> &'static Mutex<Cache> {
    static CACHE: OnceLock<Mutex<Cache>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn stable(g: usize, n: usize) -> bool {
    2 * g + n > 2
}

/// `⟨τ_{d_1} … τ_{d_n}⟩_g`. Zero for unstable `(g, n)` and whenever
/// `Σ d ≠ 3g - 3 + n`.
pub fn psi_correlator(g: usize, degrees: &[i64]) -> BigRational {
    let n = degrees.len();
    if !stable(g, n) || degrees.iter().any(|&d| d < 0) {
        return BigRational::zero();
    }
    if degrees.iter().sum::<i64>() != 3 * g as i64 - 3 + n as i64 {
        return BigRational::zero();
    }
    let mut key = degrees.to_vec();
    key.sort_unstable_by(|a, b| b.cmp(a));
    if let Some(v) = cache().lock().unwrap().get(&(g, key.clone())) {
        return v.clone();
    }
    let v = psi_uncached(g, &key);
    cache().lock().unwrap().insert((g, key), v.clone());
    v
}

fn psi_uncached(g: usize, key: &[i64]) -> BigRational {
    let n = key.len();
    match (g, n) {
        (0, 3) => return BigRational::one(),
        // the constant term of the L_0 constraint
        (1, 1) => return BigRational::new(1.into(), 24.into()),
        _ => {}
    }
    if key[n - 1] == 0 {
        // string equation
        let rest = &key[..n - 1];
        let mut acc = BigRational::zero();
        for j in 0..rest.len() {
            if rest[j] > 0 {
                let mut r = rest.to_vec();
                r[j] -= 1;
                acc += psi_correlator(g, &r);
            }
        }
        return acc;
    }
    let k = key[0] - 1;
    let s = &key[1..];
    let mut acc = BigRational::zero();
    for j in 0..s.len() {
        let mut r: Vec<i64> = s.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &d)| d).collect();
        r.push(k + s[j]);
        acc += df(2 * k + 2 * s[j] + 1) / df(2 * s[j] - 1) * psi_correlator(g, &r);
    }
    let half = BigRational::new(1.into(), 2.into());
    for a in 0..k {
        let b = k - 1 - a;
        let w = df(2 * a + 1) * df(2 * b + 1) * &half;
        if g >= 1 {
            let mut r = s.to_vec();
            r.push(a);
            r.push(b);
            acc += &w * psi_correlator(g - 1, &r);
        }
        let m = s.len();
        for mask in 0..(1usize << m) {
            let inside: Vec<i64> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| s[i]).collect();
            let outside: Vec<i64> = (0..m).filter(|i| mask >> i & 1 == 0).map(|i| s[i]).collect();
            for g1 in 0..=g {
                let mut left = inside.clone();
                left.push(a);
                let mut right = outside.clone();
                right.push(b);
                let l = psi_correlator(g1, &left);
                if l.is_zero() {
                    continue;
                }
                acc += &w * l * psi_correlator(g - g1, &right);
            }
        }
    }
    acc / df(2 * k + 3)
}

/// Set partitions of `0..m`, as lists of blocks.
fn set_partitions(m: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = vec![Vec::new()];
    for x in 0..m {
        let mut next = Vec::new();
        for p in out {
            for b in 0..p.len() {
                let mut q: Vec<Vec<usize>> = p.clone();
                q[b].push(x);
                next.push(q);
            }
            let mut q = p;
            q.push(vec![x]);
            next.push(q);
        }
        out = next;
    }
    out
}

/// `⟨Π τ_{d_i} κ_{b_1} … κ_{b_m}⟩_g` (κ_0 allowed).
pub fn kappa_monomial(g: usize, degrees: &[i64], kappas: &[i64]) -> BigRational {
    let m = kappas.len();
    let mut acc = BigRational::zero();
    for p in set_partitions(m) {
        let mut degs = degrees.to_vec();
        for block in &p {
            degs.push(block.iter().map(|&j| kappas[j]).sum::<i64>() + 1);
        }
        let v = psi_correlator(g, &degs);
        if (m - p.len()).is_multiple_of(2) {
            acc += v;
        } else {
            acc -= v;
        }
    }
    acc
}

/// The forward pushforward: `⟨Π τ_d Π_j τ_{b_j+1}⟩_{g,n+m}` recomputed as a
/// sum over permutations of `Π_{cycles} κ`. Used to cross-check
/// [`kappa_monomial`].
pub fn pushforward_check(g: usize, degrees: &[i64], extra: &[i64]) -> (BigRational, BigRational) {
    let m = extra.len();
    let mut degs = degrees.to_vec();
    degs.extend(extra.iter().map(|b| b + 1));
    let direct = psi_correlator(g, &degs);
    let mut via = BigRational::zero();
    for perm in permutations(m) {
        let mut seen = vec![false; m];
        let mut ks = Vec::new();
        for s in 0..m {
            if seen[s] {
                continue;
            }
            let mut c = s;
            let mut sum = 0;
            while !seen[c] {
                seen[c] = true;
                sum += extra[c];
                c = perm[c];
            }
            ks.push(sum);
        }
        via += kappa_monomial(g, degrees, &ks);
    }
    (direct, via)
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for x in 0..m {
        let mut next = Vec::new();
        for p in out {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, x);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// Integer partitions of `r` into parts `>= 1`, as multiplicity vectors
/// indexed by part size (index 0 unused).
fn partitions(r: usize) -> Vec<Vec<usize>> {
    fn rec(r: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if r == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=max.min(r)).rev() {
            cur[p] += 1;
            rec(r - p, p, cur, out);
            cur[p] -= 1;
        }
    }
    let mut out = Vec::new();
    rec(r, r, &mut vec![0; r + 1], &mut out);
    out
}

/// An exponential κ-correlator `⟨Π τ_d e^{s_0 κ_0 + Σ_{k>=1} t_k κ_k}⟩`,
/// kept as `e^{s_0 · kappa0_exponent} · value` since `s_0` enters only
/// through `κ_0 = 2g - 2 + n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpCorrelator<S> {
    pub kappa0_exponent: i64,
    pub value: S,
}

/// `⟨Π τ_{d_i} exp(s_0 κ_0 + Σ_{k>=1} t_k κ_k)⟩_g` with `times[k-1] = t_k`.
/// Only κ-monomials filling the dimension contribute.
pub fn kappa_exp_correlator<S: Scalar>(g: usize, degrees: &[i64], times: &[S]) -> Result<ExpCorrelator<S>, IntersectError> {
    let n = degrees.len();
    let chi = 2 * g as i64 - 2 + n as i64;
    let zero = ExpCorrelator { kappa0_exponent: chi, value: S::zero() };
    if !stable(g, n) {
        return Ok(zero);
    }
    let budget = 3 * g as i64 - 3 + n as i64 - degrees.iter().sum::<i64>();
    if budget < 0 {
        return Ok(zero);
    }
    let mut value = S::zero();
    for mult in partitions(budget as usize) {
        let mut weight = S::one();
        let mut kappas = Vec::new();
        let mut skip = false;
        for (k, &c) in mult.iter().enumerate().skip(1) {
            if c == 0 {
                continue;
            }
            let t = times.get(k - 1).ok_or(IntersectError::MissingTime(k))?;
            if t.is_zero() {
                skip = true;
                break;
            }
            let inv_fact = BigRational::new(BigInt::one(), factorial(c as u64));
            weight = weight.mul_ref(&t.powi(c as i64).expect("positive power")).scale(&inv_fact);
            kappas.extend(std::iter::repeat_n(k as i64, c));
        }
        if skip {
            continue;
        }
        let v = kappa_monomial(g, degrees, &kappas);
        if !v.is_zero() {
            value = value.add_ref(&weight.scale(&v));
        }
    }
    Ok(ExpCorrelator { kappa0_exponent: chi, value })
}

/// `unit^{s (2g-2+n)} ⟨Π ψ^{d_i} exp(Σ_{k>=1} t̂_k κ_k)⟩_{g,n}`.
pub fn vertex_weight<S: Scalar>(g: usize, degrees: &[i64], unit: &S, times: &[S], sign: i64) -> Result<S, IntersectError> {
    let c = kappa_exp_correlator(g, degrees, times)?;
    if c.value.is_zero() {
        return Ok(c.value);
    }
    let p = unit.powi(sign * c.kappa0_exponent).expect("unit is invertible");
    Ok(p.mul_ref(&c.value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{rational, MarkerPoly, Rational};

    #[test]
    fn small_correlators() {
        assert_eq!(psi_correlator(0, &[0, 0, 0]), rational(1, 1));
        assert_eq!(psi_correlator(0, &[1, 0, 0, 0]), rational(1, 1));
        assert_eq!(psi_correlator(1, &[1]), rational(1, 24));
        assert_eq!(psi_correlator(2, &[4]), rational(1, 1152));
        assert_eq!(psi_correlator(1, &[1, 1]), rational(1, 24));
        assert_eq!(psi_correlator(0, &[2, 0, 0, 0]), rational(0, 1));
        assert_eq!(psi_correlator(3, &[7]), rational(1, 82944));
    }

    #[test]
    fn kappa_values() {
        assert_eq!(kappa_monomial(0, &[0, 0, 0, 0], &[1]), rational(1, 1));
        assert_eq!(kappa_monomial(0, &[], &[1]), rational(0, 1));
        // κ_0 = 2g - 2 + n
        assert_eq!(kappa_monomial(1, &[1, 0], &[0]), rational(2, 1) * psi_correlator(1, &[1, 0]));
        assert_eq!(kappa_monomial(1, &[0], &[1]), rational(1, 24));
        assert_eq!(kappa_monomial(2, &[], &[3]), rational(1, 1152));
    }

    #[test]
    fn exponential_potential_with_symbols() {
        let s1 = MarkerPoly::<Rational>::var("s1");
        let c = kappa_exp_correlator(0, &[0, 0, 0, 0], std::slice::from_ref(&s1)).unwrap();
        assert_eq!(c.kappa0_exponent, 2);
        assert_eq!(c.value, s1);
        let c = kappa_exp_correlator::<Rational>(0, &[0, 0, 0], &[]).unwrap();
        assert_eq!((c.kappa0_exponent, c.value), (1, rational(1, 1)));
        assert!(matches!(
            kappa_exp_correlator::<Rational>(0, &[0, 0, 0, 0], &[]),
            Err(IntersectError::MissingTime(1))
        ));
    }
}
