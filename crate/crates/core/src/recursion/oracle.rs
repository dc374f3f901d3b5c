//! Independent evaluation of the recursion in the global coordinate `z`, for
//! curves with a rational deck involution `z̄ = ι(z)`.
//!
//! Every `W_n^{(g)}` is kept on the basis `Π dz_k / (z_k - a_{j_k})^{m_k}`,
//! `m_k >= 2`. The kernel is expanded exactly in `z_0`:
//! `∫_{z̄}^{z} B(z_0, ·) = Σ_k (w^k - w̄^k) dz_0 / (z_0 - a)^{k+1}` with
//! `z = a + w`, so no chart or `dξ` table enters until the final projection.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{canonical, dimension, is_stable, InvariantTensor, RecursionError, Slot};
use crate::curve::{check_branchpoints, CurveError, CurvePresentation};
use crate::poly::{Polynomial, RationalFunction};
use crate::ring::{double_factorial, Scalar};
use crate::series::{SeriesError, TruncatedSeries};

/// A pole label `(branchpoint j, order m)` standing for `dz/(z - a_j)^m`.
pub type Label = (usize, i64);

/// Result of the global computation for one `(g, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult<S> {
    /// Coefficients on the pole basis, keyed by sorted labels.
    pub forms: InvariantTensor<S>,
    /// Projection onto `Π dξ_{i,d}`.
    pub tensor: InvariantTensor<S>,
    /// Highest pole order met in any variable.
    pub max_pole: i64,
    /// Whether any `dz/(z-a)` term appeared.
    pub residue_free: bool,
    /// First pole-basis key the projection fails to reproduce.
    pub outside_span: Option<Vec<Label>>,
}

pub struct GlobalOracle<S> {
    points: Vec<S>,
    order: i64,
    wbar: Vec<TruncatedSeries<S>>,
    dwbar: Vec<TruncatedSeries<S>>,
    /// `1 / (2 (y(z) - y(z̄)) x'(z))` at each branchpoint, in `w`.
    inv_den: Vec<TruncatedSeries<S>>,
    /// `ζ(w)^{-1}` at each branchpoint, for the final projection.
    zeta_inv: Vec<TruncatedSeries<S>>,
    max_dim: i64,
    /// `basis_at` / `basis_at_bar` tables, keyed `(j, m, i, bar)`.
    basis: BTreeMap<(usize, i64, usize, bool), TruncatedSeries<S>>,
    memo: BTreeMap<(usize, usize), InvariantTensor<S>>,
    stats: BTreeMap<(usize, usize), (i64, bool)>,
}

fn df<S: Scalar>(n: i64) -> S {
    S::from_rational(&num_rational::BigRational::from_integer(double_factorial(n)))
}

fn pow2_inv<S: Scalar>(k: i64) -> S {
    S::from_ratio(1, 1 << k)
}

impl<S: Scalar> GlobalOracle<S> {
    /// Prepare expansions good for all `(g, n)` with `3g - 3 + n <= max_dim`.
    pub fn new(curve: &CurvePresentation<S>, max_dim: i64) -> Result<Self, RecursionError> {
        let iota = curve.involution.clone().ok_or_else(|| {
            RecursionError::LocalData(CurveError::NoGlobalInvolution(curve.name.clone()).into())
        })?;
        check_branchpoints(curve).map_err(|e| RecursionError::LocalData(e.into()))?;
        let order = 2 * max_dim.max(0) + 8;
        let dx = curve.x.derivative();
        let dy = curve.y.derivative();
        let series = |e: SeriesError| RecursionError::Series(e);
        let mut wbar = Vec::new();
        let mut dwbar = Vec::new();
        let mut inv_den = Vec::new();
        let mut zeta_inv = Vec::new();
        for a in &curve.branchpoints {
            let fixed = iota.eval(a).map_err(|e| RecursionError::Series(e.into()))?;
            if fixed != *a {
                return Err(RecursionError::LocalData(CurveError::NoGlobalInvolution(a.to_text()).into()));
            }
            let wb = iota
                .expand_at(a, order + 2)
                .map_err(series)?
                .sub(&TruncatedSeries::constant(a.clone(), None));
            let dwb = wb.differentiate();
            let dy_a = dy.expand_at(a, order + 2).map_err(series)?;
            let dy_bar = dy_a.compose(&wb).map_err(series)?.mul(&dwb);
            let delta_y = dy_a.sub(&dy_bar).integrate().map_err(series)?;
            let xp = dx.expand_at(a, order + 2).map_err(series)?;
            let den = delta_y.mul(&xp).scale(&S::from_int(2));
            inv_den.push(den.inv().map_err(series)?);
            let big_x = xp.integrate().map_err(series)?;
            let zeta = big_x.sqrt(&curve.radicals).map_err(series)?;
            zeta_inv.push(zeta.inv().map_err(series)?);
            wbar.push(wb);
            dwbar.push(dwb);
        }
        let mut o = GlobalOracle {
            points: curve.branchpoints.clone(),
            order,
            wbar,
            dwbar,
            inv_den,
            zeta_inv,
            max_dim,
            basis: BTreeMap::new(),
            memo: BTreeMap::new(),
            stats: BTreeMap::new(),
        };
        let beta = o.beta();
        let jobs: Vec<(usize, i64, usize, bool)> = (0..beta)
            .flat_map(|j| (2..=2 * max_dim.max(0) + 2).flat_map(move |m| (0..beta).flat_map(move |i| [(j, m, i, false), (j, m, i, true)])))
            .collect();
        let basis = jobs
            .par_iter()
            .map(|&(j, m, i, bar)| {
                let s = if bar { o.basis_at_bar(j, m, i) } else { o.basis_at(j, m, i) };
                s.map(|s| ((j, m, i, bar), s))
            })
            .collect::<Result<BTreeMap<_, _>, _>>()
            .map_err(series)?;
        o.basis = basis;
        Ok(o)
    }

    fn cached_basis(&self, j: usize, m: i64, i: usize, bar: bool) -> Result<TruncatedSeries<S>, SeriesError> {
        match self.basis.get(&(j, m, i, bar)) {
            Some(s) => Ok(s.clone()),
            None if bar => self.basis_at_bar(j, m, i),
            None => self.basis_at(j, m, i),
        }
    }

    fn beta(&self) -> usize {
        self.points.len()
    }

    /// `dz/(z - a_j)^m` at `z = a_i + w`, divided by `dw`.
    fn basis_at(&self, j: usize, m: i64, i: usize) -> Result<TruncatedSeries<S>, SeriesError> {
        if i == j {
            return Ok(TruncatedSeries::monomial(S::one(), -m, None));
        }
        let mut den = Polynomial::one();
        let lin = Polynomial::new(vec![-self.points[j].clone(), S::one()]);
        for _ in 0..m {
            den = den.mul(&lin);
        }
        let r = RationalFunction::new(Polynomial::one(), den)?;
        r.expand_at(&self.points[i], self.order)
    }

    /// The same form at `z̄ = ι(a_i + w)`, divided by `dw`.
    fn basis_at_bar(&self, j: usize, m: i64, i: usize) -> Result<TruncatedSeries<S>, SeriesError> {
        let wb = &self.wbar[i];
        let base = if i == j {
            wb.inv()?.pow(m as u32)
        } else {
            self.basis_at(j, m, i)?.compose(wb)?
        };
        Ok(base.mul(&self.dwbar[i]))
    }

    /// `Σ_ℓ W_h(ℓ ∪ fixed) e_ℓ` at `z` (or `z̄`) near `a_i`, with the
    /// unstable `B(z, z_j)` entering through its exact expansion.
    fn partial(
        &self,
        lower: &BTreeMap<(usize, usize), InvariantTensor<S>>,
        h: usize,
        fixed: &[Label],
        i: usize,
        bar: bool,
    ) -> Result<TruncatedSeries<S>, SeriesError> {
        if h == 0 && fixed.len() == 1 {
            let (j, m) = fixed[0];
            if j != i {
                return Ok(TruncatedSeries::zero(None));
            }
            // 1/(z_j - z)^2 = Σ_k (k+1) w^k / (z_j - a)^{k+2}
            let c = S::from_int(m - 1);
            return Ok(if bar {
                self.wbar[i].pow((m - 2) as u32).mul(&self.dwbar[i]).scale(&c)
            } else {
                TruncatedSeries::monomial(c, m - 2, None)
            });
        }
        let n = fixed.len() + 1;
        let t = &lower[&(h, n)];
        let mut acc = TruncatedSeries::zero(None);
        let top = 2 * dimension(h, n) + 2;
        let mut key = Vec::with_capacity(n);
        for j in 0..self.beta() {
            for m in 2..=top {
                key.clear();
                key.push((j, m));
                key.extend_from_slice(fixed);
                let a = t.get(&key);
                if a.is_zero() {
                    continue;
                }
                let e = self.cached_basis(j, m, i, bar)?;
                acc = acc.add(&e.scale(&a));
            }
        }
        Ok(acc)
    }

    fn bracket(
        &self,
        lower: &BTreeMap<(usize, usize), InvariantTensor<S>>,
        g: usize,
        i: usize,
        rest: &[Label],
    ) -> Result<TruncatedSeries<S>, SeriesError> {
        let mut total = TruncatedSeries::zero(None);
        if g >= 1 {
            if g == 1 && rest.is_empty() {
                // dz dz̄ / (z - z̄)^2
                let diff = TruncatedSeries::var(None).sub(&self.wbar[i]);
                total = self.dwbar[i].mul(&diff.pow(2).inv()?);
            } else {
                let n = rest.len() + 2;
                let t = &lower[&(g - 1, n)];
                let top = 2 * dimension(g - 1, n) + 2;
                let mut key = Vec::with_capacity(n);
                for j1 in 0..self.beta() {
                    for m1 in 2..=top {
                        let mut inner = TruncatedSeries::zero(None);
                        for j2 in 0..self.beta() {
                            for m2 in 2..=top {
                                key.clear();
                                key.push((j1, m1));
                                key.push((j2, m2));
                                key.extend_from_slice(rest);
                                let a = t.get(&key);
                                if !a.is_zero() {
                                    inner = inner.add(&self.cached_basis(j2, m2, i, true)?.scale(&a));
                                }
                            }
                        }
                        if !inner.is_zero() {
                            total = total.add(&self.cached_basis(j1, m1, i, false)?.mul(&inner));
                        }
                    }
                }
            }
        }
        let m = rest.len();
        let full = (1usize << m) - 1;
        for mask in 0..=full {
            let inside: Vec<Label> = (0..m).filter(|b| mask >> b & 1 == 1).map(|b| rest[b]).collect();
            let outside: Vec<Label> = (0..m).filter(|b| mask >> b & 1 == 0).map(|b| rest[b]).collect();
            for h in 0..=g {
                if (h == 0 && mask == 0) || (h == g && mask == full) {
                    continue;
                }
                let left = self.partial(lower, h, &inside, i, false)?;
                if left.is_zero() {
                    continue;
                }
                let right = self.partial(lower, g - h, &outside, i, true)?;
                total = total.add(&left.mul(&right));
            }
        }
        Ok(total)
    }

    /// Pole-basis coefficients of `W_{g,n}` for root labels `(i, k+1)`,
    /// `k = 0..=kmax`, with the other variables on `rest`.
    fn root_coefficients(
        &self,
        lower: &BTreeMap<(usize, usize), InvariantTensor<S>>,
        g: usize,
        i: usize,
        rest: &[Label],
        kmax: i64,
    ) -> Result<Vec<S>, SeriesError> {
        let f = self.bracket(lower, g, i, rest)?;
        let gser = f.mul(&self.inv_den[i]);
        let mut out = Vec::with_capacity(kmax as usize + 1);
        let mut wbk = TruncatedSeries::constant(S::one(), None);
        for k in 0..=kmax {
            if k > 0 {
                wbk = wbk.mul(&self.wbar[i]).truncate(self.order);
            }
            // Res (w^k - w̄^k) G
            let diff = TruncatedSeries::monomial(S::one(), k, None).sub(&wbk);
            out.push(diff.mul(&gser).residue()?);
        }
        Ok(out)
    }

    fn compute(&self, g: usize, n: usize) -> Result<(InvariantTensor<S>, i64, bool), SeriesError> {
        let dim = dimension(g, n);
        let beta = self.beta();
        let kmax = 2 * dim + 5;
        let groups: Vec<(usize, Vec<Label>)> = label_keys(beta, n - 1, 2 * dim)
            .into_iter()
            .flat_map(|rest| (0..beta).map(move |i| (i, rest.clone())))
            .collect();
        let lower = &self.memo;
        let results = groups
            .par_iter()
            .map(|(i, rest)| self.root_coefficients(lower, g, *i, rest, kmax).map(|c| (*i, rest.clone(), c)))
            .collect::<Result<Vec<_>, _>>()?;
        let mut out = InvariantTensor::new(g, n);
        let mut max_pole = 0;
        let mut residue_free = true;
        for (i, rest, coeffs) in results {
            for (k, c) in coeffs.into_iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let m = k as i64 + 1;
                max_pole = max_pole.max(m);
                if m == 1 {
                    residue_free = false;
                    continue;
                }
                let root = (i, m);
                if rest.first().is_none_or(|r| root <= *r) {
                    let mut key = vec![root];
                    key.extend_from_slice(&rest);
                    out.insert(&key, c);
                }
            }
        }
        Ok((out, max_pole, residue_free))
    }

    /// Pole-basis tensor of `W_{g,n}`, computing lower ones as needed.
    pub fn forms(&mut self, g: usize, n: usize) -> Result<&InvariantTensor<S>, RecursionError> {
        if !is_stable(g, n) || n == 0 {
            return Err(RecursionError::UnstableRequest { g, n });
        }
        if dimension(g, n) > self.max_dim {
            let s = SeriesError::InsufficientTruncation { requested: 2 * dimension(g, n) + 8, known: self.order };
            return Err(RecursionError::InsufficientTruncation {
                g,
                n,
                source: s,
                suffices: crate::localdata::Orders::for_dimension(dimension(g, n)),
            });
        }
        let chi = 2 * g + n;
        let mut todo = Vec::new();
        for c in 3..=chi {
            for h in 0..=g {
                let m = c as i64 - 2 * h as i64;
                if m >= 1 && m as usize <= n + 1 && (c < chi || (h, m as usize) == (g, n)) {
                    todo.push((h, m as usize));
                }
            }
        }
        for key in todo {
            if !self.memo.contains_key(&key) {
                let (t, pole, res) = self.compute(key.0, key.1)?;
                self.memo.insert(key, t);
                self.stats.insert(key, (pole, res));
            }
        }
        Ok(&self.memo[&(g, n)])
    }

    /// Coefficient of `dz/(z-a_i)^m` in `dξ_{i,d}`, for `m = 0..=2d+2`
    /// (zero below 2).
    pub fn xi_in_pole_basis(&self, i: usize, d: i64) -> Result<Vec<S>, SeriesError> {
        // dξ_{i,d} = -(2d-1)!!/2^d Σ_k (k+1) e_{i,k+2} Res w^k ζ^{-2d-1}
        let p = self.zeta_inv[i].pow((2 * d + 1) as u32);
        let c = -df::<S>(2 * d - 1).mul_ref(&pow2_inv(d));
        let mut out = vec![S::zero(); (2 * d + 3) as usize];
        for k in 0..=2 * d {
            out[(k + 2) as usize] = p.coeff(-1 - k)?.mul_ref(&S::from_int(k + 1)).mul_ref(&c);
        }
        Ok(out)
    }

    /// Full oracle evaluation: pole-basis forms, their projection onto the
    /// `dξ` basis, and the structural diagnostics.
    pub fn evaluate(&mut self, g: usize, n: usize) -> Result<OracleResult<S>, RecursionError> {
        let forms = self.forms(g, n)?.clone();
        let (max_pole, residue_free) = self.stats[&(g, n)];
        let dim = dimension(g, n);
        let beta = self.beta();
        let mut m_tab: BTreeMap<(usize, i64), Vec<S>> = BTreeMap::new();
        for i in 0..beta {
            for d in 0..=dim {
                m_tab.insert((i, d), self.xi_in_pole_basis(i, d)?);
            }
        }
        // inverse of the even rows: N[d][d''] with Σ_{d''} N[d][d''] M[2d''+2][d'] = δ
        let mut n_tab: BTreeMap<(usize, i64, i64), S> = BTreeMap::new();
        for i in 0..beta {
            let mm = |row: i64, col: i64| -> S {
                m_tab[&(i, col)].get((2 * row + 2) as usize).cloned().unwrap_or_else(S::zero)
            };
            for d in (0..=dim).rev() {
                let diag = mm(d, d).try_inv().map_err(SeriesError::from)?;
                n_tab.insert((i, d, d), diag.clone());
                for col in d + 1..=dim {
                    // Σ_{r=d..col} N[d][r] M[r][col] = 0
                    let mut acc = S::zero();
                    for r in d + 1..=col {
                        if let Some(nv) = n_tab.get(&(i, r, col)) {
                            acc = acc.add_ref(&mm(d, r).mul_ref(nv));
                        }
                    }
                    n_tab.insert((i, d, col), -(acc.mul_ref(&diag)));
                }
            }
        }
        // A(s) = Σ_{ℓ ≥ s} E(ℓ) Π N[s_k][ℓ_k]; N is upper triangular as the
        // inverse of an upper triangular change of basis
        let mut tensor = InvariantTensor::new(g, n);
        for key in super::all_keys(beta, n, dim) {
            let mut acc = S::zero();
            let budget = dim - key.iter().map(|s| s.1).sum::<i64>();
            for_each_raise(&key, budget, &mut |raised| {
                let labels: Vec<Label> = raised.iter().map(|&(i, d)| (i, 2 * d + 2)).collect();
                let e = forms.get(&labels);
                if e.is_zero() {
                    return;
                }
                let mut w = e;
                for (s, r) in key.iter().zip(raised) {
                    w = w.mul_ref(&n_tab[&(s.0, s.1, r.1)]);
                }
                acc = acc.add_ref(&w);
            });
            tensor.insert(&key, acc);
        }
        // reconstruct every pole-basis entry from the projection
        let mut outside_span = None;
        let candidates: Vec<Vec<Label>> = forms.entries().map(|(k, _)| k.clone()).chain(label_keys(beta, n, 2 * dim)).collect();
        for labels in candidates {
            let mut acc = S::zero();
            let lows: Vec<Slot> = labels.iter().map(|&(i, m)| (i, ((m - 2) + 1) / 2)).collect();
            let low_sum: i64 = lows.iter().map(|s| s.1).sum();
            if low_sum <= dim {
                for_each_raise(&lows, dim - low_sum, &mut |slots| {
                    let a = tensor.get(slots);
                    if a.is_zero() {
                        return;
                    }
                    let mut w = a;
                    for (l, s) in labels.iter().zip(slots) {
                        w = w.mul_ref(m_tab[&(s.0, s.1)].get(l.1 as usize).unwrap_or(&S::zero()));
                    }
                    acc = acc.add_ref(&w);
                });
            }
            if !acc.approx_eq(&forms.get(&labels)) {
                outside_span = Some(labels);
                break;
            }
        }
        Ok(OracleResult { forms, tensor, max_pole, residue_free, outside_span })
    }
}

/// Sorted label multisets of size `n` with `Σ (m - 2) <= budget`.
fn label_keys(beta: usize, n: usize, budget: i64) -> Vec<Vec<Label>> {
    super::all_keys(beta, n, budget)
        .into_iter()
        .map(|k| canonical(&k.into_iter().map(|(j, e)| (j, e + 2)).collect::<Vec<_>>()))
        .collect()
}

/// Calls `f` on every tuple `r` with `r_k = (s_k.0, s_k.1 + δ_k)`, `δ_k >= 0`,
/// `Σ δ_k <= budget`.
fn for_each_raise(base: &[Slot], budget: i64, f: &mut impl FnMut(&[Slot])) {
    fn rec(base: &[Slot], budget: i64, cur: &mut Vec<Slot>, f: &mut impl FnMut(&[Slot])) {
        if cur.len() == base.len() {
            f(cur);
            return;
        }
        let (i, d) = base[cur.len()];
        for delta in 0..=budget {
            cur.push((i, d + delta));
            rec(base, budget - delta, cur, f);
            cur.pop();
        }
    }
    rec(base, budget, &mut Vec::with_capacity(base.len()), f);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;
    use crate::ring::{rational, Rational};

    #[test]
    fn airy_three_point_form() {
        let c = builtins::airy::<Rational>();
        let mut o = GlobalOracle::new(&c, 2).unwrap();
        let w = o.forms(0, 3).unwrap();
        assert_eq!(w.len(), 1);
        let c03 = w.get(&[(0, 2), (0, 2), (0, 2)]);
        assert_eq!(num_traits::Signed::abs(&c03), rational(1, 2));
    }
}
