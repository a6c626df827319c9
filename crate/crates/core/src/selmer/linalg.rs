//! Finite modules over `Z/p^m`: Smith normal form by p-adic pivoting,
//! kernels, sums, intersections and orthogonal complements.

use serde::{Deserialize, Serialize};

use super::SelmerError;
use crate::numeric::{inv_mod, is_prime};

/// The ring `Z/p^m` with `p` an odd prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Zpm {
    pub p: u64,
    pub m: u32,
    pub q: u64,
}

impl Zpm {
    pub fn new(p: u64, m: u32) -> Result<Zpm, SelmerError> {
        if p < 3 || !is_prime(p) || m == 0 {
            return Err(SelmerError::BadRing { p, m });
        }
        let q = p.checked_pow(m).filter(|&q| q < 1 << 31).ok_or(SelmerError::BadRing { p, m })?;
        Ok(Zpm { p, m, q })
    }

    /// Split `p^m` into `(p, m)`.
    pub fn from_order(pm: u64) -> Result<Zpm, SelmerError> {
        let p = (3..=pm).find(|d| pm % d == 0).ok_or(SelmerError::BadRing { p: pm, m: 1 })?;
        let mut m = 0;
        let mut r = pm;
        while r % p == 0 {
            r /= p;
            m += 1;
        }
        if r != 1 {
            return Err(SelmerError::BadRing { p, m });
        }
        Zpm::new(p, m)
    }

    /// `ord_p(x)`, with `m` for zero.
    pub fn val(&self, x: u64) -> u32 {
        let mut x = x % self.q;
        if x == 0 {
            return self.m;
        }
        let mut v = 0;
        while x % self.p == 0 {
            x /= self.p;
            v += 1;
        }
        v
    }

    pub fn pow_p(&self, e: u32) -> u64 {
        if e >= self.m {
            0
        } else {
            self.p.pow(e)
        }
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.q
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.q - b % self.q) % self.q
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.q
    }

    pub fn unit_inv(&self, a: u64) -> u64 {
        inv_mod(a as i128, self.q as i128).expect("unit") as u64
    }

    pub fn is_unit(&self, a: u64) -> bool {
        a % self.p != 0
    }

    fn axpy(&self, y: &mut [u64], k: u64, x: &[u64]) {
        for (a, b) in y.iter_mut().zip(x) {
            *a = (*a + k * b) % self.q;
        }
    }
}

/// Invariants `x_1 >= x_2 >= ... > 0` of a finite `Z/p^m`-module, meaning
/// `A = sum Z/p^{x_i}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InvariantSeq(Vec<u32>);

impl InvariantSeq {
    pub fn new(mut xs: Vec<u32>) -> InvariantSeq {
        xs.retain(|&x| x > 0);
        xs.sort_unstable_by(|a, b| b.cmp(a));
        InvariantSeq(xs)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// `log_p` of the order.
    pub fn length(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_cyclic(&self) -> bool {
        self.0.len() <= 1
    }

    /// The invariant at position `i` (1-based as in `x_1`), zero past the end.
    pub fn get(&self, i: usize) -> u32 {
        self.0.get(i - 1).copied().unwrap_or(0)
    }

    /// Drop the first `k` entries.
    pub fn skip(&self, k: usize) -> InvariantSeq {
        InvariantSeq(self.0.iter().skip(k).copied().collect())
    }

    /// Prepend `x` (kept sorted).
    pub fn with(&self, x: u32) -> InvariantSeq {
        let mut v = self.0.clone();
        v.push(x);
        InvariantSeq::new(v)
    }
}

impl std::fmt::Display for InvariantSeq {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// `U A V = diag(p^e_1, ..., p^e_r, 0, ...)`; `vinv = V^-1`.
#[derive(Clone, Debug)]
pub struct Snf {
    pub exps: Vec<u32>,
    pub u: Vec<Vec<u64>>,
    pub vinv: Vec<Vec<u64>>,
}

/// Smith normal form of a `rows x cols` matrix. The pivot at each step is
/// the entry of least valuation, ties broken by lowest (row, column) index.
pub fn snf(r: &Zpm, a: &[Vec<u64>], cols: usize) -> Snf {
    let rows = a.len();
    let mut a: Vec<Vec<u64>> = a.iter().map(|row| row.iter().map(|x| x % r.q).collect()).collect();
    let mut u = identity(rows);
    let mut vinv = identity(cols);
    let mut exps = Vec::new();
    for t in 0..rows.min(cols) {
        let mut best: Option<(u32, usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(t) {
            for (j, &x) in row.iter().enumerate().skip(t) {
                let v = r.val(x);
                if v < r.m && best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, i, j));
                }
            }
        }
        let Some((v, i, j)) = best else { break };
        a.swap(t, i);
        u.swap(t, i);
        if j != t {
            for row in a.iter_mut() {
                row.swap(t, j);
            }
            vinv.swap(t, j);
        }
        // make the pivot exactly p^v
        let unit = a[t][t] / r.pow_p(v);
        let ui = r.unit_inv(unit);
        for x in a[t].iter_mut().chain(u[t].iter_mut()) {
            *x = r.mul(*x, ui);
        }
        let pv = r.pow_p(v);
        let (pivot_row, pivot_u) = (a[t].clone(), u[t].clone());
        for i in t + 1..rows {
            let k = a[i][t] / pv;
            if k != 0 {
                let nk = r.q - k;
                r.axpy(&mut a[i], nk, &pivot_row);
                r.axpy(&mut u[i], nk, &pivot_u);
            }
        }
        for j in t + 1..cols {
            let k = a[t][j] / pv;
            if k != 0 {
                // column j -= k column t; only row t is nonzero in column t
                a[t][j] = 0;
                let row_j = vinv[j].clone();
                r.axpy(&mut vinv[t], k, &row_j);
            }
        }
        exps.push(v);
    }
    Snf { exps, u, vinv }
}

fn identity(n: usize) -> Vec<Vec<u64>> {
    (0..n)
        .map(|i| {
            let mut row = vec![0; n];
            row[i] = 1;
            row
        })
        .collect()
}

/// Generators of `{x : x A = 0}` for `A` with `rows` rows.
pub fn left_kernel(r: &Zpm, a: &[Vec<u64>], cols: usize) -> Vec<Vec<u64>> {
    let s = snf(r, a, cols);
    let mut out = Vec::new();
    for (k, row) in s.u.iter().enumerate() {
        match s.exps.get(k) {
            Some(&0) => {}
            Some(&e) => out.push(row.iter().map(|&x| r.mul(x, r.pow_p(r.m - e))).collect()),
            None => out.push(row.clone()),
        }
    }
    out
}

/// A submodule of `(Z/p^m)^dim`, kept as a Smith basis: generators `g_i`
/// with `Z/p^m g_i = Z/p^{inv_i}` and the sum direct.
#[derive(Clone, Debug)]
pub struct Submodule {
    ring: Zpm,
    dim: usize,
    basis: Vec<Vec<u64>>,
    inv: InvariantSeq,
}

impl Submodule {
    pub fn span(ring: Zpm, dim: usize, gens: &[Vec<u64>]) -> Submodule {
        assert!(gens.iter().all(|g| g.len() == dim), "generator length");
        if gens.is_empty() {
            return Submodule::zero(ring, dim);
        }
        let s = snf(&ring, gens, dim);
        let mut basis = Vec::new();
        let mut inv = Vec::new();
        for (k, &e) in s.exps.iter().enumerate() {
            let pe = ring.pow_p(e);
            basis.push(s.vinv[k].iter().map(|&x| ring.mul(x, pe)).collect());
            inv.push(ring.m - e);
        }
        Submodule { ring, dim, basis, inv: InvariantSeq::new(inv) }
    }

    pub fn zero(ring: Zpm, dim: usize) -> Submodule {
        Submodule { ring, dim, basis: Vec::new(), inv: InvariantSeq::default() }
    }

    pub fn full(ring: Zpm, dim: usize) -> Submodule {
        Submodule::span(ring, dim, &identity(dim))
    }

    pub fn ring(&self) -> Zpm {
        self.ring
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gens(&self) -> &[Vec<u64>] {
        &self.basis
    }

    pub fn invariants(&self) -> &InvariantSeq {
        &self.inv
    }

    /// `log_p #self`.
    pub fn length(&self) -> u32 {
        self.inv.length()
    }

    pub fn sum(&self, other: &Submodule) -> Submodule {
        assert_eq!(self.dim, other.dim);
        let gens: Vec<Vec<u64>> = self.basis.iter().chain(&other.basis).cloned().collect();
        Submodule::span(self.ring, self.dim, &gens)
    }

    pub fn intersect(&self, other: &Submodule) -> Submodule {
        assert_eq!(self.dim, other.dim);
        if self.basis.is_empty() || other.basis.is_empty() {
            return Submodule::zero(self.ring, self.dim);
        }
        // x A + y B = 0  =>  x A in A and B
        let stacked: Vec<Vec<u64>> = self.basis.iter().chain(&other.basis).cloned().collect();
        let ker = left_kernel(&self.ring, &stacked, self.dim);
        let n = self.basis.len();
        let gens: Vec<Vec<u64>> = ker.iter().map(|k| self.combine(&k[..n])).collect();
        Submodule::span(self.ring, self.dim, &gens)
    }

    fn combine(&self, coeffs: &[u64]) -> Vec<u64> {
        let mut out = vec![0; self.dim];
        for (c, g) in coeffs.iter().zip(&self.basis) {
            self.ring.axpy(&mut out, *c, g);
        }
        out
    }

    /// `self ⊆ other`.
    pub fn is_within(&self, other: &Submodule) -> bool {
        self.sum(other).length() == other.length()
    }

    pub fn same_as(&self, other: &Submodule) -> bool {
        self.length() == other.length() && self.is_within(other)
    }

    pub fn contains(&self, x: &[u64]) -> bool {
        Submodule::span(self.ring, self.dim, &[x.to_vec()]).is_within(self)
    }

    /// `p^t self`.
    pub fn scaled(&self, t: u32) -> Submodule {
        let pt = self.ring.pow_p(t);
        let gens: Vec<Vec<u64>> =
            self.basis.iter().map(|g| g.iter().map(|&x| self.ring.mul(x, pt)).collect()).collect();
        Submodule::span(self.ring, self.dim, &gens)
    }

    /// `{y : <x, y> = 0 for x in self}` for `<x, y> = x J y^T`.
    pub fn perp(&self, form: &[Vec<u64>]) -> Submodule {
        let r = &self.ring;
        if self.basis.is_empty() {
            return Submodule::full(*r, self.dim);
        }
        // columns of (S J)^T are the functionals y -> <s_i, y>
        let sj: Vec<Vec<u64>> = self
            .basis
            .iter()
            .map(|s| {
                (0..self.dim).map(|j| (0..self.dim).fold(0, |acc, k| r.add(acc, r.mul(s[k], form[k][j])))).collect()
            })
            .collect();
        let t: Vec<Vec<u64>> = (0..self.dim).map(|j| sj.iter().map(|row| row[j]).collect()).collect();
        Submodule::span(*r, self.dim, &left_kernel(r, &t, sj.len()))
    }

    /// `B / A` is cyclic, for `A = self ⊆ other = B`.
    pub fn cokernel_is_cyclic_in(&self, other: &Submodule) -> bool {
        other.length() - other.scaled(1).sum(self).length() <= 1
    }

    /// Place `self` at coordinates `offset..offset + dim` of a larger space.
    pub fn embed(&self, offset: usize, total: usize) -> Submodule {
        let gens: Vec<Vec<u64>> = self
            .basis
            .iter()
            .map(|g| {
                let mut v = vec![0; total];
                v[offset..offset + self.dim].copy_from_slice(g);
                v
            })
            .collect();
        Submodule { ring: self.ring, dim: total, basis: gens, inv: self.inv.clone() }
    }

    /// Coordinates `offset..offset + len` of every element.
    pub fn project(&self, offset: usize, len: usize) -> Submodule {
        let gens: Vec<Vec<u64>> = self.basis.iter().map(|g| g[offset..offset + len].to_vec()).collect();
        Submodule::span(self.ring, len, &gens)
    }
}

/// `sum_i x_i J_ij y_j`.
pub fn pair(r: &Zpm, form: &[Vec<u64>], x: &[u64], y: &[u64]) -> u64 {
    let mut acc = 0;
    for (i, xi) in x.iter().enumerate() {
        if *xi == 0 {
            continue;
        }
        for (j, yj) in y.iter().enumerate() {
            acc = r.add(acc, r.mul(r.mul(*xi, form[i][j]), *yj));
        }
    }
    acc
}

/// Every element of the span, for brute-force oracles on tiny modules.
pub fn enumerate_span(r: &Zpm, dim: usize, gens: &[Vec<u64>]) -> std::collections::HashSet<Vec<u64>> {
    let mut set = std::collections::HashSet::new();
    set.insert(vec![0; dim]);
    let mut frontier = vec![vec![0; dim]];
    while let Some(x) = frontier.pop() {
        for g in gens {
            let mut y = x.clone();
            r.axpy(&mut y, 1, g);
            if set.insert(y.clone()) {
                frontier.push(y);
            }
        }
    }
    set
}

/// Invariants of a finite subgroup given as an element set, from the
/// orders `#p^k H`: the number of invariants `> k` is `log_p(#p^k H / #p^{k+1} H)`.
pub fn brute_invariants(r: &Zpm, set: &std::collections::HashSet<Vec<u64>>) -> InvariantSeq {
    let log = |n: usize| -> u32 {
        let mut n = n as u64;
        let mut k = 0;
        while n > 1 {
            assert_eq!(n % r.p, 0, "group order must be a power of p");
            n /= r.p;
            k += 1;
        }
        k
    };
    let sizes: Vec<u32> = (0..=r.m)
        .map(|k| {
            let pk = r.pow_p(k);
            let img: std::collections::HashSet<Vec<u64>> =
                set.iter().map(|x| x.iter().map(|&a| r.mul(a, pk)).collect()).collect();
            log(img.len())
        })
        .collect();
    let mut inv = Vec::new();
    for k in 0..r.m as usize {
        let count = sizes[k] - sizes[k + 1];
        // invariants > k minus invariants > k + 1 equal k + 1
        let next = if k + 1 < r.m as usize { sizes[k + 1] - sizes[k + 2] } else { 0 };
        inv.extend(std::iter::repeat_n(k as u32 + 1, (count - next) as usize));
    }
    InvariantSeq::new(inv)
}
