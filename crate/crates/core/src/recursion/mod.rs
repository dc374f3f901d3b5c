//! The residue recursion, evaluated entirely in the branchpoint charts.
//!
//! `W_n^{(g)}` is stored through its coefficients on the basis
//! `Π dξ_{i_k, d_k}(z_k)`. Near `a_i` the recursion kernel is
//!
//! `K(z_0, z) = -(1/4) Σ_d 2^d/(2d+1)!! dξ_{i,d}(z_0) ζ^{2d-1} / (U(ζ²) dζ)`
//!
//! with `y(z) - y(z̄) = 2ζ U(ζ²)`, so the coefficient of `dξ_{i,d}(z_0)` is a
//! single Laurent coefficient of `F(ζ)/U(ζ²)`.

pub mod oracle;

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use thiserror::Error;

use crate::localdata::{LocalDataError, LocalSpectralData, Orders};
use crate::ring::{double_factorial, Scalar};
use crate::series::{SeriesError, TruncatedSeries};

/// A colored degree `(branchpoint index, ψ-degree)`.
pub type Slot = (usize, i64);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecursionError {
    #[error("W_{n}^({g}) is unstable")]
    UnstableRequest { g: usize, n: usize },
    #[error("local data too short for W_{n}^({g}): {source}; orders {suffices:?} would suffice")]
    InsufficientTruncation { g: usize, n: usize, source: SeriesError, suffices: Orders },
    #[error(transparent)]
    LocalData(#[from] LocalDataError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// `3g - 3 + n`.
pub fn dimension(g: usize, n: usize) -> i64 {
    3 * g as i64 - 3 + n as i64
}

pub fn is_stable(g: usize, n: usize) -> bool {
    2 * g + n > 2
}

/// Canonical (sorted) form of a slot multiset.
pub fn canonical(key: &[Slot]) -> Vec<Slot> {
    let mut k = key.to_vec();
    k.sort();
    k
}

/// Symmetric tensor of `A` coefficients for one `(g, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantTensor<S> {
    pub g: usize,
    pub n: usize,
    entries: BTreeMap<Vec<Slot>, S>,
}

impl<S: Scalar> InvariantTensor<S> {
    pub fn new(g: usize, n: usize) -> Self {
        InvariantTensor { g, n, entries: BTreeMap::new() }
    }

    pub fn from_entries(g: usize, n: usize, entries: impl IntoIterator<Item = (Vec<Slot>, S)>) -> Self {
        let mut t = Self::new(g, n);
        for (k, v) in entries {
            t.insert(&k, v);
        }
        t
    }

    /// Stores `value` at the canonical form of `key`; zeros are dropped.
    pub fn insert(&mut self, key: &[Slot], value: S) {
        let k = canonical(key);
        if value.is_zero() {
            self.entries.remove(&k);
        } else {
            self.entries.insert(k, value);
        }
    }

    /// Coefficient at any ordering of `key`; absent entries are zero.
    pub fn get(&self, key: &[Slot]) -> S {
        self.entries.get(&canonical(key)).cloned().unwrap_or_else(S::zero)
    }

    /// Nonzero entries in canonical order.
    pub fn entries(&self) -> impl Iterator<Item = (&Vec<Slot>, &S)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest `Σ d_k` over nonzero entries.
    pub fn max_degree_sum(&self) -> Option<i64> {
        self.entries.keys().map(|k| k.iter().map(|s| s.1).sum()).max()
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> InvariantTensor<T> {
        InvariantTensor::from_entries(self.g, self.n, self.entries.iter().map(|(k, v)| (k.clone(), f(v))))
    }

    /// First key (over the union of supports) where the tensors differ.
    pub fn first_difference(&self, other: &Self) -> Option<Vec<Slot>> {
        self.entries
            .keys()
            .chain(other.entries.keys())
            .find(|k| !self.get(k).approx_eq(&other.get(k)))
            .cloned()
    }
}

/// All canonical keys of size `n` over `beta` colors with `Σ d <= dim`.
pub fn all_keys(beta: usize, n: usize, dim: i64) -> Vec<Vec<Slot>> {
    fn rec(beta: usize, n: usize, budget: i64, min: Slot, cur: &mut Vec<Slot>, out: &mut Vec<Vec<Slot>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in min.0..beta {
            let d0 = if i == min.0 { min.1 } else { 0 };
            for d in d0..=budget {
                cur.push((i, d));
                rec(beta, n, budget - d, (i, d), cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    if dim >= 0 {
        rec(beta, n, dim, (0, 0), &mut Vec::new(), &mut out);
    }
    out
}

fn df<S: Scalar>(n: i64) -> S {
    S::from_rational(&BigRational::from_integer(double_factorial(n)))
}

fn pow2<S: Scalar>(k: i64) -> S {
    let p = BigRational::from_integer(BigInt::one() << k.unsigned_abs() as usize);
    S::from_rational(&if k >= 0 { p } else { p.recip() })
}

type Memo<S> = BTreeMap<(usize, usize), Arc<InvariantTensor<S>>>;

/// The recursion over one local data package, with a memo table of
/// computed tensors.
pub struct Recursion<'a, S> {
    data: &'a LocalSpectralData<S>,
    /// `Ξ[σ][d][i]`, keyed `(σ, d, i)`.
    xi: BTreeMap<(usize, i64, usize), TruncatedSeries<S>>,
    /// `U(ζ²)^{-1}` at each branchpoint.
    u_inv: Vec<TruncatedSeries<S>>,
    memo: Mutex<Memo<S>>,
}

impl<'a, S: Scalar> Recursion<'a, S> {
    pub fn new(data: &'a LocalSpectralData<S>) -> Result<Self, RecursionError> {
        let beta = data.branchpoints();
        let top = data.orders.bergman;
        let mut jobs = Vec::new();
        for s in 0..beta {
            for d in 0..=top / 2 {
                for i in 0..beta {
                    jobs.push((s, d, i));
                }
            }
        }
        let xi = jobs
            .par_iter()
            .map(|&(s, d, i)| data.xi(s, d, i, top - 2 * d).map(|x| ((s, d, i), x)))
            .collect::<Result<BTreeMap<_, _>, _>>()?;
        let mut u_inv = Vec::with_capacity(beta);
        for p in &data.points {
            let mut c = Vec::with_capacity(2 * p.u.len());
            for u in &p.u {
                c.push(u.clone());
                c.push(S::zero());
            }
            let known = 2 * p.u.len() as i64 - 1;
            u_inv.push(TruncatedSeries::new(0, c, known).inv()?);
        }
        Ok(Recursion { data, xi, u_inv, memo: Mutex::new(BTreeMap::new()) })
    }

    pub fn data(&self) -> &LocalSpectralData<S> {
        self.data
    }

    fn xi_at(&self, s: usize, d: i64, i: usize) -> Result<&TruncatedSeries<S>, SeriesError> {
        self.xi.get(&(s, d, i)).ok_or(SeriesError::InsufficientTruncation {
            requested: 2 * d,
            known: self.data.orders.bergman,
        })
    }

    fn cached(&self, g: usize, n: usize) -> Option<Arc<InvariantTensor<S>>> {
        self.memo.lock().unwrap().get(&(g, n)).cloned()
    }

    /// `W_n^{(g)}` as a tensor of `A` coefficients.
    pub fn invariants(&self, g: usize, n: usize) -> Result<Arc<InvariantTensor<S>>, RecursionError> {
        if !is_stable(g, n) || n == 0 {
            return Err(RecursionError::UnstableRequest { g, n });
        }
        if let Some(t) = self.cached(g, n) {
            return Ok(t);
        }
        // the transitive closure of what the recursion reads, in order of
        // increasing 2g-2+n
        let chi = 2 * g + n;
        let mut deps: Vec<(usize, usize)> = Vec::new();
        for c in 3..chi {
            for h in 0..=g {
                if 2 * h < c && c - 2 * h >= 1 && is_stable(h, c - 2 * h) {
                    deps.push((h, c - 2 * h));
                }
            }
        }
        for (h, m) in deps {
            if self.cached(h, m).is_none() {
                let t = Arc::new(self.compute(h, m)?);
                self.memo.lock().unwrap().insert((h, m), t);
            }
        }
        let t = Arc::new(self.compute(g, n)?);
        self.memo.lock().unwrap().insert((g, n), t.clone());
        Ok(t)
    }

    fn lower(&self, g: usize, n: usize) -> Arc<InvariantTensor<S>> {
        self.cached(g, n).expect("lower tensor computed before use")
    }

    fn compute(&self, g: usize, n: usize) -> Result<InvariantTensor<S>, RecursionError> {
        let dim = dimension(g, n);
        let beta = self.data.branchpoints();
        // groups (root color, rest), with the root as the smallest slot
        let mut groups: Vec<(usize, Vec<Slot>)> = Vec::new();
        for rest in all_keys(beta, n - 1, dim) {
            for i in 0..beta {
                if rest.first().is_none_or(|m| i <= m.0) {
                    groups.push((i, rest.clone()));
                }
            }
        }
        let wrap = |e: RecursionError| match e {
            RecursionError::Series(s @ SeriesError::InsufficientTruncation { .. }) => {
                RecursionError::InsufficientTruncation { g, n, source: s, suffices: Orders::for_dimension(dim) }
            }
            other => other,
        };
        let results = groups
            .par_iter()
            .map(|(i, rest)| {
                let budget = dim - rest.iter().map(|s| s.1).sum::<i64>();
                let top = rest.first().filter(|m| m.0 == *i).map_or(budget, |m| m.1.min(budget));
                let coeffs = self.root_coefficients(g, *i, rest, top).map_err(wrap)?;
                Ok(coeffs
                    .into_iter()
                    .enumerate()
                    .map(|(d0, a)| {
                        let mut key = vec![(*i, d0 as i64)];
                        key.extend_from_slice(rest);
                        (key, a)
                    })
                    .collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>, RecursionError>>()?;
        Ok(InvariantTensor::from_entries(g, n, results.into_iter().flatten()))
    }

    /// `A((i, d_0), rest)` for `d_0 = 0..=top`, computed with the first slot
    /// as the recursion root. Lower tensors must be available.
    fn root_coefficients(&self, g: usize, i: usize, rest: &[Slot], top: i64) -> Result<Vec<S>, RecursionError> {
        let f = self.kernel_argument(g, i, rest)?;
        let ratio = f.mul(&self.u_inv[i]);
        let quarter = S::from_ratio(-1, 4);
        (0..=top)
            .map(|d0| {
                let c = ratio.coeff(-2 * d0)?;
                Ok(c.mul_ref(&quarter).mul_ref(&pow2(d0)).try_div(&df(2 * d0 + 1)).map_err(SeriesError::from)?)
            })
            .collect()
    }

    /// `A(key)` computed with `key[root]` as the recursion root, for any key
    /// (also beyond the degree bound). Used to test symmetry and vanishing.
    pub fn coefficient_rooted(&self, g: usize, key: &[Slot], root: usize) -> Result<S, RecursionError> {
        let n = key.len();
        self.invariants(g, n)?;
        let (i, d0) = key[root];
        let rest: Vec<Slot> = key.iter().enumerate().filter(|(k, _)| *k != root).map(|(_, s)| *s).collect();
        let f = self.kernel_argument(g, i, &rest)?;
        let c = f.mul(&self.u_inv[i]).coeff(-2 * d0)?;
        let a = c.mul_ref(&S::from_ratio(-1, 4)).mul_ref(&pow2(d0)).try_div(&df(2 * d0 + 1)).map_err(SeriesError::from)?;
        Ok(a)
    }

    /// `Σ_{(σ,d)} A_h((σ,d) ∪ fixed) Ξ[σ][d][i](ζ)`, or the even part of the
    /// unstable `B(z, z_j)` when `(h, fixed)` is `(0, {j})`.
    fn partial(&self, h: usize, fixed: &[Slot], i: usize) -> Result<TruncatedSeries<S>, RecursionError> {
        if h == 0 && fixed.len() == 1 {
            let (s, d) = fixed[0];
            if s != i {
                return Ok(TruncatedSeries::zero(None));
            }
            let c = -pow2::<S>(d).try_div(&df(2 * d - 1)).map_err(SeriesError::from)?;
            return Ok(TruncatedSeries::monomial(c, 2 * d, None));
        }
        let n = fixed.len() + 1;
        let t = self.lower(h, n);
        let budget = dimension(h, n) - fixed.iter().map(|s| s.1).sum::<i64>();
        let mut acc = TruncatedSeries::zero(None);
        let mut key = Vec::with_capacity(n);
        for s in 0..self.data.branchpoints() {
            for d in 0..=budget {
                key.clear();
                key.push((s, d));
                key.extend_from_slice(fixed);
                let a = t.get(&key);
                if !a.is_zero() {
                    acc = acc.add(&self.xi_at(s, d, i)?.scale(&a));
                }
            }
        }
        Ok(acc)
    }

    /// The quadratic differential the kernel acts on, as `F(ζ) dζ²` near `a_i`.
    fn kernel_argument(&self, g: usize, i: usize, rest: &[Slot]) -> Result<TruncatedSeries<S>, RecursionError> {
        let mut total = TruncatedSeries::zero(None);
        if g >= 1 {
            if g == 1 && rest.is_empty() {
                // B(z, z̄) in the chart: -[1/(4ζ²) + Σ B_{k,l} (-1)^l ζ^{k+l}]
                let top = self.data.orders.bergman;
                let mut c = vec![S::zero(); top as usize + 1];
                for k in 0..=top {
                    for l in 0..=top - k {
                        let b = self.data.b(i, k, i, l)?;
                        let slot = &mut c[(k + l) as usize];
                        *slot = if l % 2 == 0 { slot.add_ref(&b) } else { slot.sub_ref(&b) };
                    }
                }
                let reg = TruncatedSeries::new(0, c, top);
                let pole = TruncatedSeries::monomial(S::from_ratio(1, 4), -2, None);
                total = reg.add(&pole).neg();
            } else {
                let n = rest.len() + 2;
                let t = self.lower(g - 1, n);
                let budget = dimension(g - 1, n) - rest.iter().map(|s| s.1).sum::<i64>();
                let beta = self.data.branchpoints();
                let mut key = Vec::with_capacity(n);
                for s1 in 0..beta {
                    for d1 in 0..=budget {
                        let mut inner = TruncatedSeries::zero(None);
                        for s2 in 0..beta {
                            for d2 in 0..=budget - d1 {
                                key.clear();
                                key.push((s1, d1));
                                key.push((s2, d2));
                                key.extend_from_slice(rest);
                                let a = t.get(&key);
                                if !a.is_zero() {
                                    inner = inner.add(&self.xi_at(s2, d2, i)?.scale(&a));
                                }
                            }
                        }
                        if !inner.is_zero() {
                            total = total.sub(&self.xi_at(s1, d1, i)?.mul(&inner.reflect()));
                        }
                    }
                }
            }
        }
        let m = rest.len();
        let full = (1usize << m) - 1;
        let mut cache: BTreeMap<(usize, usize), TruncatedSeries<S>> = BTreeMap::new();
        for mask in 0..=full {
            let inside: Vec<Slot> = (0..m).filter(|b| mask >> b & 1 == 1).map(|b| rest[b]).collect();
            let outside: Vec<Slot> = (0..m).filter(|b| mask >> b & 1 == 0).map(|b| rest[b]).collect();
            for h in 0..=g {
                if (h == 0 && mask == 0) || (h == g && mask == full) {
                    continue;
                }
                let left = match cache.get(&(h, mask)) {
                    Some(s) => s.clone(),
                    None => {
                        let s = self.partial(h, &inside, i)?;
                        cache.insert((h, mask), s.clone());
                        s
                    }
                };
                if left.is_zero() {
                    continue;
                }
                let key = (g - h, full & !mask);
                let right = match cache.get(&key) {
                    Some(s) => s.clone(),
                    None => {
                        let s = self.partial(g - h, &outside, i)?;
                        cache.insert(key, s.clone());
                        s
                    }
                };
                total = total.sub(&left.mul(&right.reflect()));
            }
        }
        Ok(total)
    }
}

/// `F_g = 1/(2-2g) Σ_i Res_{a_i} W_1^{(g)} Φ` with `Φ = ∫_{a_i} y dx`. Only
/// the polar part of `W_1^{(g)}` and the odd part of `y` contribute, which
/// gives `Res_i = -Σ_d A_g((i,d)) (2d-1)!! 2^{1-d} u_{i,d-1}`.
pub fn fg<S: Scalar>(rec: &Recursion<'_, S>, g: usize) -> Result<S, RecursionError> {
    if g < 2 {
        return Err(RecursionError::UnstableRequest { g, n: 0 });
    }
    let w = rec.invariants(g, 1)?;
    let mut total = S::zero();
    for (key, a) in w.entries() {
        let (i, d) = key[0];
        if d == 0 {
            continue;
        }
        let u = rec.data().points[i].u.get(d as usize - 1).cloned().ok_or(SeriesError::InsufficientTruncation {
            requested: 2 * d - 1,
            known: 2 * rec.data().points[i].u.len() as i64 - 1,
        })?;
        let c = df::<S>(2 * d - 1).mul_ref(&pow2(1 - d)).mul_ref(&u).mul_ref(a);
        total = total.sub_ref(&c);
    }
    let denom = S::from_int(2 - 2 * g as i64);
    Ok(total.try_div(&denom).map_err(SeriesError::from)?)
}
