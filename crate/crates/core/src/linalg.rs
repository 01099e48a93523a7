//! Exact linear algebra: sparse rational elimination, integer lattices and
//! linear systems over the two-element field.

use crate::rational::Q;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

pub type SparseVec = BTreeMap<usize, Q>;

/// `y -= a * x`
pub fn sub_scaled(y: &mut SparseVec, a: &Q, x: &SparseVec) {
    if a.is_zero() {
        return;
    }
    for (i, v) in x {
        let entry = y.entry(*i).or_insert_with(Q::zero);
        *entry -= a * v;
        if entry.is_zero() {
            y.remove(i);
        }
    }
}

pub fn dot(a: &SparseVec, b: &SparseVec) -> Q {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut s = Q::zero();
    for (i, v) in small {
        if let Some(w) = large.get(i) {
            s += v * w;
        }
    }
    s
}

#[derive(Clone, Debug)]
struct Pivot {
    vec: SparseVec,
    combo: SparseVec,
}

/// Incremental column echelon form. Columns are pushed one at a time; each
/// independent column becomes a pivot keyed by its leading (smallest) row,
/// normalised to 1 there. With tracking enabled every pivot remembers the
/// combination of pushed columns it came from, which yields kernel vectors
/// and preimages.
#[derive(Clone, Debug)]
pub struct Echelon {
    pivots: BTreeMap<usize, Pivot>,
    kernel: Vec<SparseVec>,
    ncols: usize,
    track: bool,
}

impl Echelon {
    pub fn new(track: bool) -> Self {
        Echelon { pivots: BTreeMap::new(), kernel: Vec::new(), ncols: 0, track }
    }

    pub fn from_columns<'a>(cols: impl IntoIterator<Item = &'a SparseVec>, track: bool) -> Self {
        let mut e = Self::new(track);
        for c in cols {
            e.push_column(c.clone());
        }
        e
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Kernel basis (only with tracking), one vector per dependent column.
    pub fn kernel(&self) -> &[SparseVec] {
        &self.kernel
    }

    pub fn is_pivot_row(&self, r: usize) -> bool {
        self.pivots.contains_key(&r)
    }

    pub fn pivot_rows(&self) -> impl Iterator<Item = usize> + '_ {
        self.pivots.keys().copied()
    }

    /// Adds a column; returns its pivot row if it was independent.
    pub fn push_column(&mut self, col: SparseVec) -> Option<usize> {
        let j = self.ncols;
        self.ncols += 1;
        let mut w = col;
        let mut combo = SparseVec::new();
        if self.track {
            combo.insert(j, Q::one());
        }
        loop {
            let Some((&r, a)) = w.iter().next() else {
                if self.track {
                    self.kernel.push(combo);
                }
                return None;
            };
            match self.pivots.get(&r) {
                Some(p) => {
                    let a = a.clone();
                    sub_scaled(&mut w, &a, &p.vec);
                    if self.track {
                        sub_scaled(&mut combo, &a, &p.combo);
                    }
                }
                None => {
                    let inv = a.recip();
                    for v in w.values_mut() {
                        *v *= &inv;
                    }
                    for v in combo.values_mut() {
                        *v *= &inv;
                    }
                    self.pivots.insert(r, Pivot { vec: w, combo });
                    return Some(r);
                }
            }
        }
    }

    /// Eliminates every pivot row from `v`; returns the remainder and the
    /// multiples of each pivot that were subtracted.
    pub fn reduce_full(&self, v: &SparseVec) -> (SparseVec, Vec<(usize, Q)>) {
        let mut w = v.clone();
        let mut used = Vec::new();
        let mut cursor = 0usize;
        loop {
            let next = w.range(cursor..).find(|(r, _)| self.pivots.contains_key(r)).map(|(r, a)| (*r, a.clone()));
            let Some((r, a)) = next else { break };
            sub_scaled(&mut w, &a, &self.pivots[&r].vec);
            used.push((r, a));
            cursor = r + 1;
        }
        (w, used)
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce_full(v).0.is_empty()
    }

    /// Coefficients `x` over the pushed columns with `sum x_j col_j = v`.
    pub fn solve(&self, v: &SparseVec) -> Option<SparseVec> {
        assert!(self.track, "solve needs a tracking echelon");
        let (rem, used) = self.reduce_full(v);
        if !rem.is_empty() {
            return None;
        }
        let mut x = SparseVec::new();
        for (r, a) in used {
            let neg = -a;
            sub_scaled(&mut x, &neg, &self.pivots[&r].combo);
        }
        Some(x)
    }

    /// Linear functional `y` vanishing on the column span with `y[r0] = 1`
    /// and `y` zero on every other non-pivot row. `r0` must not be a pivot row.
    pub fn annihilator(&self, r0: usize) -> SparseVec {
        assert!(!self.pivots.contains_key(&r0));
        let mut y = SparseVec::new();
        y.insert(r0, Q::one());
        for (&p, piv) in self.pivots.range(..r0).rev() {
            let mut s = Q::zero();
            for (r, v) in piv.vec.range(p + 1..) {
                if let Some(yr) = y.get(r) {
                    s += v * yr;
                }
            }
            if !s.is_zero() {
                y.insert(p, -s);
            }
        }
        y
    }
}

/// Integer matrix with its column-echelon form `h = m * u`, `u` unimodular.
#[derive(Clone, Debug)]
pub struct IntegerEchelon {
    h: Vec<Vec<BigInt>>,
    u: Vec<Vec<BigInt>>,
    /// (row, column) pivot positions of `h`
    pivots: Vec<(usize, usize)>,
    ncols: usize,
}

impl IntegerEchelon {
    pub fn new(rows: &[Vec<BigInt>], ncols: usize) -> Self {
        let mut h: Vec<Vec<BigInt>> = rows.to_vec();
        let mut u: Vec<Vec<BigInt>> = (0..ncols)
            .map(|i| (0..ncols).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect();
        let mut pivots = Vec::new();
        let mut k = 0;
        for i in 0..h.len() {
            if k == ncols {
                break;
            }
            loop {
                let best = (k..ncols).filter(|&c| !h[i][c].is_zero()).min_by(|&a, &b| h[i][a].abs().cmp(&h[i][b].abs()));
                let Some(c) = best else { break };
                swap_cols(&mut h, &mut u, k, c);
                let mut done = true;
                for c in k + 1..ncols {
                    if h[i][c].is_zero() {
                        continue;
                    }
                    let q = h[i][c].div_floor(&h[i][k]);
                    add_col_multiple(&mut h, &mut u, c, k, &-q);
                    if !h[i][c].is_zero() {
                        done = false;
                    }
                }
                if done {
                    break;
                }
            }
            if !h[i][k].is_zero() {
                pivots.push((i, k));
                k += 1;
            }
        }
        IntegerEchelon { h, u, pivots, ncols }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Z-basis of the integer kernel.
    pub fn kernel(&self) -> Vec<Vec<BigInt>> {
        (self.rank()..self.ncols).map(|c| self.u.iter().map(|row| row[c].clone()).collect()).collect()
    }

    /// Some integer `x` with `m x = b`, if one exists.
    pub fn solve(&self, b: &[BigInt]) -> Option<Vec<BigInt>> {
        let mut y = vec![BigInt::zero(); self.ncols];
        for (t, &(i, c)) in self.pivots.iter().enumerate() {
            debug_assert_eq!(c, t);
            let mut rhs = b[i].clone();
            for s in 0..t {
                rhs -= &self.h[i][s] * &y[s];
            }
            let (q, r) = rhs.div_rem(&self.h[i][c]);
            if !r.is_zero() {
                return None;
            }
            y[c] = q;
        }
        for (i, row) in self.h.iter().enumerate() {
            let v: BigInt = row.iter().zip(&y).map(|(a, b)| a * b).sum();
            if v != b[i] {
                return None;
            }
        }
        Some(self.u.iter().map(|row| row.iter().zip(&y).map(|(a, b)| a * b).sum()).collect())
    }
}

fn swap_cols(h: &mut [Vec<BigInt>], u: &mut [Vec<BigInt>], a: usize, b: usize) {
    if a == b {
        return;
    }
    for row in h.iter_mut().chain(u.iter_mut()) {
        row.swap(a, b);
    }
}

/// column `dst += f * column src`
fn add_col_multiple(h: &mut [Vec<BigInt>], u: &mut [Vec<BigInt>], dst: usize, src: usize, f: &BigInt) {
    for row in h.iter_mut().chain(u.iter_mut()) {
        let add = &row[src] * f;
        row[dst] += add;
    }
}

/// Solution set `particular + span(null_basis)` of a linear system over GF(2).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gf2Solution {
    pub particular: Vec<bool>,
    pub null_basis: Vec<Vec<bool>>,
}

impl Gf2Solution {
    /// All solutions, if there are at most `2^max_log` of them.
    pub fn enumerate(&self, max_log: usize) -> Option<Vec<Vec<bool>>> {
        if self.null_basis.len() > max_log {
            return None;
        }
        let mut out = Vec::new();
        for mask in 0u64..(1u64 << self.null_basis.len()) {
            let mut s = self.particular.clone();
            for (k, b) in self.null_basis.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    for (x, y) in s.iter_mut().zip(b) {
                        *x ^= *y;
                    }
                }
            }
            out.push(s);
        }
        Some(out)
    }
}

/// Solves `a s = b` over GF(2); `None` if inconsistent.
pub fn solve_gf2(rows: &[Vec<bool>], rhs: &[bool], ncols: usize) -> Option<Gf2Solution> {
    let mut m: Vec<(Vec<bool>, bool)> = rows.iter().cloned().zip(rhs.iter().copied()).collect();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| m[i].0[c]) else { continue };
        m.swap(r, p);
        let (prow, pb) = m[r].clone();
        for (i, (row, b)) in m.iter_mut().enumerate() {
            if i != r && row[c] {
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x ^= *y;
                }
                *b ^= pb;
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    if m[r..].iter().any(|(_, b)| *b) {
        return None;
    }
    let mut particular = vec![false; ncols];
    for (i, &c) in pivot_cols.iter().enumerate() {
        particular[c] = m[i].1;
    }
    let mut null_basis = Vec::new();
    for f in (0..ncols).filter(|c| !pivot_cols.contains(c)) {
        let mut v = vec![false; ncols];
        v[f] = true;
        for (i, &c) in pivot_cols.iter().enumerate() {
            v[c] = m[i].0[f];
        }
        null_basis.push(v);
    }
    Some(Gf2Solution { particular, null_basis })
}
