//! Exact sparse linear algebra over the rationals.
//!
//! Matrices store only nonzero entries, row by row. Every reduction runs through
//! [`Echelon`], an incremental reduced row echelon form whose pivot choice is fixed
//! by a [`PivotOrder`], so bases handed back to callers are reproducible.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Renders a rational as `p/q`, or `p` when the denominator is one.
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p/q` or an integer literal.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rat::new(n, d))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("subspace is not contained in the ambient subspace")]
    SubspaceNotContained,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Sparse rational matrix, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BTreeMap<usize, Rat>>,
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RatMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| fmt_rat(&self.get(r, c))).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![BTreeMap::new(); rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i].insert(i, Rat::one());
        }
        m
    }

    pub fn from_dense(rows: usize, cols: usize, entries: &[Vec<Rat>]) -> Self {
        assert_eq!(entries.len(), rows);
        let mut m = Self::zeros(rows, cols);
        for (r, row) in entries.iter().enumerate() {
            assert_eq!(row.len(), cols);
            for (c, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    m.data[r].insert(c, v.clone());
                }
            }
        }
        m
    }

    pub fn from_i64(rows: usize, cols: usize, entries: &[&[i64]]) -> Self {
        let dense: Vec<Vec<Rat>> = entries.iter().map(|r| r.iter().map(|&v| rat(v)).collect()).collect();
        Self::from_dense(rows, cols, &dense)
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<Rat>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (c, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (r, v) in col.iter().enumerate() {
                if !v.is_zero() {
                    m.data[r].insert(c, v.clone());
                }
            }
        }
        m
    }

    pub fn from_rows(cols: usize, rows: &[Vec<Rat>]) -> Self {
        Self::from_dense(rows.len(), cols, rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Rat {
        self.data[r].get(&c).cloned().unwrap_or_else(Rat::zero)
    }

    /// Adds `v` to entry (r, c), dropping the entry if it cancels.
    pub fn add_to(&mut self, r: usize, c: usize, v: &Rat) {
        assert!(r < self.rows && c < self.cols, "entry ({r},{c}) outside {}x{}", self.rows, self.cols);
        if v.is_zero() {
            return;
        }
        let row = &mut self.data[r];
        let nv = match row.get(&c) {
            Some(old) => old + v,
            None => v.clone(),
        };
        if nv.is_zero() {
            row.remove(&c);
        } else {
            row.insert(c, nv);
        }
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rat) {
        assert!(r < self.rows && c < self.cols);
        if v.is_zero() {
            self.data[r].remove(&c);
        } else {
            self.data[r].insert(c, v);
        }
    }

    pub fn row(&self, r: usize) -> &BTreeMap<usize, Rat> {
        &self.data[r]
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(|r| r.len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.is_empty())
    }

    /// Nonzero entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Rat)> {
        self.data.iter().enumerate().flat_map(|(r, row)| row.iter().map(move |(c, v)| (r, *c, v)))
    }

    pub fn column(&self, c: usize) -> Vec<Rat> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Rat>> {
        let mut out = vec![vec![Rat::zero(); self.rows]; self.cols];
        for (r, c, v) in self.entries() {
            out[c][r] = v.clone();
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<Rat>> {
        (0..self.rows).map(|r| (0..self.cols).map(|c| self.get(r, c)).collect()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for (r, c, v) in self.entries() {
            t.data[c].insert(r, v.clone());
        }
        t
    }

    pub fn mul(&self, other: &RatMatrix) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for (r, row) in self.data.iter().enumerate() {
            let mut acc: BTreeMap<usize, Rat> = BTreeMap::new();
            for (k, a) in row {
                for (c, b) in &other.data[*k] {
                    let e = acc.entry(*c).or_insert_with(Rat::zero);
                    *e += a * b;
                }
            }
            acc.retain(|_, v| !v.is_zero());
            out.data[r] = acc;
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len(), "shape mismatch in matrix-vector product");
        self.data
            .iter()
            .map(|row| {
                let mut s = Rat::zero();
                for (c, a) in row {
                    if !v[*c].is_zero() {
                        s += a * &v[*c];
                    }
                }
                s
            })
            .collect()
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![Rat::zero(); self.cols];
        for (r, row) in self.data.iter().enumerate() {
            if v[r].is_zero() {
                continue;
            }
            for (c, a) in row {
                out[*c] += &v[r] * a;
            }
        }
        out
    }

    /// The bilinear value uᵀ M v.
    pub fn bilinear(&self, u: &[Rat], v: &[Rat]) -> Rat {
        let mv = self.mul_vec(v);
        dot(u, &mv)
    }

    pub fn add(&self, other: &RatMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (r, c, v) in other.entries() {
            out.add_to(r, c, v);
        }
        out
    }

    pub fn sub(&self, other: &RatMatrix) -> Self {
        self.add(&other.scale(&-Rat::one()))
    }

    pub fn scale(&self, s: &Rat) -> Self {
        if s.is_zero() {
            return Self::zeros(self.rows, self.cols);
        }
        let mut out = self.clone();
        for row in &mut out.data {
            for v in row.values_mut() {
                *v = &*v * s;
            }
        }
        out
    }

    /// Block with the given rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.cols];
        for (j, &c) in cols.iter().enumerate() {
            pos[c] = j;
        }
        let mut out = Self::zeros(rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (c, v) in &self.data[r] {
                if pos[*c] != usize::MAX {
                    out.data[i].insert(pos[*c], v.clone());
                }
            }
        }
        out
    }

    pub fn hstack(&self, other: &RatMatrix) -> Self {
        assert_eq!(self.rows, other.rows);
        let mut out = Self::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            out.data[r] = self.data[r].clone();
            for (c, v) in &other.data[r] {
                out.data[r].insert(self.cols + c, v.clone());
            }
        }
        out
    }

    pub fn vstack(&self, other: &RatMatrix) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut out = self.clone();
        out.rows += other.rows;
        out.data.extend(other.data.iter().cloned());
        out
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &RatMatrix) -> Self {
        let mut out = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        for (r, c, v) in self.entries() {
            out.data[r].insert(c, v.clone());
        }
        for (r, c, v) in other.entries() {
            out.data[self.rows + r].insert(self.cols + c, v.clone());
        }
        out
    }

    pub fn rank(&self) -> usize {
        Echelon::of_rows(self, PivotOrder::Forward).rank()
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    /// Inverse of a square invertible matrix.
    pub fn inverse(&self) -> Option<RatMatrix> {
        if self.rows != self.cols {
            return None;
        }
        solve(self, &RatMatrix::identity(self.rows)).filter(|_| self.rank() == self.rows)
    }
}

pub fn dot(u: &[Rat], v: &[Rat]) -> Rat {
    assert_eq!(u.len(), v.len());
    let mut s = Rat::zero();
    for (a, b) in u.iter().zip(v) {
        if !a.is_zero() && !b.is_zero() {
            s += a * b;
        }
    }
    s
}

pub fn zero_vec(n: usize) -> Vec<Rat> {
    vec![Rat::zero(); n]
}

pub fn unit_vec(n: usize, i: usize) -> Vec<Rat> {
    let mut v = zero_vec(n);
    v[i] = Rat::one();
    v
}

pub fn is_zero_vec(v: &[Rat]) -> bool {
    v.iter().all(|x| x.is_zero())
}

pub fn vec_add(u: &[Rat], v: &[Rat]) -> Vec<Rat> {
    u.iter().zip(v).map(|(a, b)| a + b).collect()
}

pub fn vec_sub(u: &[Rat], v: &[Rat]) -> Vec<Rat> {
    u.iter().zip(v).map(|(a, b)| a - b).collect()
}

pub fn vec_scale(u: &[Rat], s: &Rat) -> Vec<Rat> {
    u.iter().map(|a| a * s).collect()
}

/// Which column becomes the leading entry of a new echelon row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PivotOrder {
    /// Smallest nonzero column first.
    Forward,
    /// Largest nonzero column first.
    Reverse,
}

/// Reduced row echelon form built one row at a time.
///
/// Every stored row has a leading entry equal to one at its pivot column, and every
/// pivot column is zero in all other stored rows.
#[derive(Clone, Debug)]
pub struct Echelon {
    cols: usize,
    order: PivotOrder,
    rows: Vec<BTreeMap<usize, Rat>>,
    pivot_of_col: BTreeMap<usize, usize>,
}

impl Echelon {
    pub fn new(cols: usize, order: PivotOrder) -> Self {
        Echelon { cols, order, rows: Vec::new(), pivot_of_col: BTreeMap::new() }
    }

    pub fn of_rows(m: &RatMatrix, order: PivotOrder) -> Self {
        let mut e = Self::new(m.cols, order);
        for r in 0..m.rows {
            e.insert(m.data[r].clone());
        }
        e
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Pivot columns in ascending order.
    pub fn pivots(&self) -> Vec<usize> {
        self.pivot_of_col.keys().copied().collect()
    }

    fn reduce_sparse(&self, mut row: BTreeMap<usize, Rat>) -> BTreeMap<usize, Rat> {
        let hits: Vec<(usize, Rat)> = row
            .iter()
            .filter(|(c, _)| self.pivot_of_col.contains_key(c))
            .map(|(c, v)| (*c, v.clone()))
            .collect();
        for (c, factor) in hits {
            let prow = &self.rows[self.pivot_of_col[&c]];
            for (pc, pv) in prow {
                let delta = &factor * pv;
                let nv = match row.get(pc) {
                    Some(old) => old - &delta,
                    None => -delta,
                };
                if nv.is_zero() {
                    row.remove(pc);
                } else {
                    row.insert(*pc, nv);
                }
            }
        }
        row
    }

    /// Inserts a row; returns true if it was independent of the rows already present.
    pub fn insert(&mut self, row: BTreeMap<usize, Rat>) -> bool {
        let mut row = self.reduce_sparse(row);
        if row.is_empty() {
            return false;
        }
        let lead = match self.order {
            PivotOrder::Forward => *row.keys().next().expect("nonempty"),
            PivotOrder::Reverse => *row.keys().next_back().expect("nonempty"),
        };
        let inv = Rat::one() / row[&lead].clone();
        for v in row.values_mut() {
            *v = &*v * &inv;
        }
        for other in &mut self.rows {
            if let Some(f) = other.get(&lead).cloned() {
                for (c, v) in &row {
                    let delta = &f * v;
                    let nv = match other.get(c) {
                        Some(old) => old - &delta,
                        None => -delta,
                    };
                    if nv.is_zero() {
                        other.remove(c);
                    } else {
                        other.insert(*c, nv);
                    }
                }
            }
        }
        self.pivot_of_col.insert(lead, self.rows.len());
        self.rows.push(row);
        true
    }

    pub fn insert_dense(&mut self, v: &[Rat]) -> bool {
        assert_eq!(v.len(), self.cols);
        self.insert(sparse_of(v))
    }

    /// Residual of `v` after reduction by the stored rows (zero iff `v` is in their span).
    pub fn reduce(&self, v: &[Rat]) -> Vec<Rat> {
        dense_of(&self.reduce_sparse(sparse_of(v)), self.cols)
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        self.reduce_sparse(sparse_of(v)).is_empty()
    }

    /// The stored rows as dense vectors, ordered by pivot column.
    pub fn basis(&self) -> Vec<Vec<Rat>> {
        self.pivot_of_col.values().map(|&i| dense_of(&self.rows[i], self.cols)).collect()
    }

    /// Null space of the row span: one vector per non-pivot column.
    pub fn null_space(&self) -> Vec<Vec<Rat>> {
        let mut out = Vec::new();
        for f in 0..self.cols {
            if self.pivot_of_col.contains_key(&f) {
                continue;
            }
            let mut v = zero_vec(self.cols);
            v[f] = Rat::one();
            for (&p, &ri) in &self.pivot_of_col {
                if let Some(x) = self.rows[ri].get(&f) {
                    v[p] = -x.clone();
                }
            }
            out.push(v);
        }
        out
    }
}

fn sparse_of(v: &[Rat]) -> BTreeMap<usize, Rat> {
    v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect()
}

fn dense_of(m: &BTreeMap<usize, Rat>, n: usize) -> Vec<Rat> {
    let mut v = zero_vec(n);
    for (c, x) in m {
        v[*c] = x.clone();
    }
    v
}

/// Solves `a · X = b` column by column; `None` if some column is inconsistent.
/// Free variables are set to zero.
pub fn solve(a: &RatMatrix, b: &RatMatrix) -> Option<RatMatrix> {
    assert_eq!(a.rows, b.rows, "solve: row mismatch");
    let n = a.cols;
    let aug = a.hstack(b);
    let e = Echelon::of_rows(&aug, PivotOrder::Forward);
    if e.pivot_of_col.keys().any(|&p| p >= n) {
        return None;
    }
    let mut x = RatMatrix::zeros(n, b.cols);
    for (&p, &ri) in &e.pivot_of_col {
        for (c, v) in e.rows[ri].range(n..) {
            x.set(p, c - n, v.clone());
        }
    }
    Some(x)
}

pub fn solve_vec(a: &RatMatrix, b: &[Rat]) -> Option<Vec<Rat>> {
    let bm = RatMatrix::from_columns(b.len(), &[b.to_vec()]);
    solve(a, &bm).map(|x| x.column(0))
}

/// A linear subspace of ℚ^ambient given by a basis of independent vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<Vec<Rat>>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, basis: Vec::new() }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace { ambient, basis: (0..ambient).map(|i| unit_vec(ambient, i)).collect() }
    }

    /// Span of arbitrary vectors; a maximal independent subset is kept in input order.
    pub fn span(ambient: usize, vectors: &[Vec<Rat>]) -> Self {
        let mut e = Echelon::new(ambient, PivotOrder::Forward);
        let mut basis = Vec::new();
        for v in vectors {
            assert_eq!(v.len(), ambient, "span: vector length");
            if e.insert_dense(v) {
                basis.push(v.clone());
            }
        }
        Subspace { ambient, basis }
    }

    /// Wraps vectors already known to be independent (checked).
    pub fn from_independent(ambient: usize, basis: Vec<Vec<Rat>>) -> Self {
        let s = Self::span(ambient, &basis);
        assert_eq!(s.basis.len(), basis.len(), "from_independent: dependent vectors");
        Subspace { ambient, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Rat>] {
        &self.basis
    }

    /// Matrix whose columns are the basis vectors.
    pub fn matrix(&self) -> RatMatrix {
        RatMatrix::from_columns(self.ambient, &self.basis)
    }

    /// Coordinates of `v` in this basis, if `v` lies in the subspace.
    pub fn coordinates(&self, v: &[Rat]) -> Option<Vec<Rat>> {
        assert_eq!(v.len(), self.ambient);
        solve_vec(&self.matrix(), v)
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        self.coordinates(v).is_some()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        if other.dim() == 0 {
            return true;
        }
        solve(&self.matrix(), &other.matrix()).is_some()
    }

    pub fn same_as(&self, other: &Subspace) -> bool {
        self.ambient == other.ambient && self.dim() == other.dim() && self.contains_subspace(other)
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient);
        let mut all = self.basis.clone();
        all.extend(other.basis.iter().cloned());
        Subspace::span(self.ambient, &all)
    }

    pub fn intersection(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient);
        if self.dim() == 0 || other.dim() == 0 {
            return Subspace::zero(self.ambient);
        }
        let a = self.matrix();
        let b = other.matrix().scale(&-Rat::one());
        let k = kernel_basis(&a.hstack(&b));
        let vs: Vec<Vec<Rat>> = k.basis.iter().map(|c| a.mul_vec(&c[..self.dim()])).collect();
        Subspace::span(self.ambient, &vs)
    }

    /// Image under a linear map.
    pub fn image_under(&self, m: &RatMatrix) -> Subspace {
        assert_eq!(m.cols(), self.ambient);
        let vs: Vec<Vec<Rat>> = self.basis.iter().map(|v| m.mul_vec(v)).collect();
        Subspace::span(m.rows(), &vs)
    }

    /// Preimage of this subspace under `m`.
    pub fn preimage_under(&self, m: &RatMatrix) -> Subspace {
        assert_eq!(m.rows(), self.ambient);
        // x ↦ m x lies in span(B)  ⇔  (m | −B)(x, c) = 0 for some c.
        let b = self.matrix().scale(&-Rat::one());
        let k = kernel_basis(&m.hstack(&b));
        let vs: Vec<Vec<Rat>> = k.basis.iter().map(|c| c[..m.cols()].to_vec()).collect();
        Subspace::span(m.cols(), &vs)
    }
}

pub fn kernel_basis(m: &RatMatrix) -> Subspace {
    let e = Echelon::of_rows(m, PivotOrder::Forward);
    Subspace { ambient: m.cols, basis: e.null_space() }
}

pub fn kernel_basis_with(m: &RatMatrix, order: PivotOrder) -> Subspace {
    let e = Echelon::of_rows(m, order);
    Subspace { ambient: m.cols, basis: e.null_space() }
}

/// Column space, with basis in reduced echelon form.
pub fn image_basis(m: &RatMatrix) -> Subspace {
    let e = Echelon::of_rows(&m.transpose(), PivotOrder::Forward);
    Subspace { ambient: m.rows, basis: e.basis() }
}

/// Result of splitting an ambient subspace by a subspace it contains.
#[derive(Clone, Debug)]
pub struct Quotient {
    /// Complement of `sub` inside `ambient`, spanned by ambient vectors.
    pub complement: Subspace,
    /// Maps a vector of the ambient subspace to its coordinates on `complement`,
    /// killing `sub`. Shape: dim(complement) × ambient_dim.
    pub projection: RatMatrix,
    sub_dim: usize,
}

impl Quotient {
    pub fn dim(&self) -> usize {
        self.complement.dim()
    }

    /// Coordinates of a vector of the ambient subspace in the quotient.
    pub fn project(&self, v: &[Rat]) -> Vec<Rat> {
        self.projection.mul_vec(v)
    }

    pub fn sub_dim(&self) -> usize {
        self.sub_dim
    }
}

/// Splits `ambient = complement ⊕ sub`. The complement is made of basis vectors of
/// `ambient` not already spanned by `sub`, scanned in order.
pub fn quotient(ambient: &Subspace, sub: &Subspace) -> Result<Quotient, LinalgError> {
    if ambient.ambient != sub.ambient {
        return Err(LinalgError::DimensionMismatch { expected: ambient.ambient, found: sub.ambient });
    }
    if !ambient.contains_subspace(sub) {
        return Err(LinalgError::SubspaceNotContained);
    }
    let n = ambient.ambient;
    let mut e = Echelon::new(n, PivotOrder::Forward);
    for v in &sub.basis {
        e.insert_dense(v);
    }
    let mut comp = Vec::new();
    for v in &ambient.basis {
        if e.insert_dense(v) {
            comp.push(v.clone());
        }
    }
    // Coordinates with respect to (sub basis, complement basis); keep the complement part.
    let mut full = sub.basis.clone();
    full.extend(comp.iter().cloned());
    let fm = RatMatrix::from_columns(n, &full);
    let k = sub.dim();
    let c = comp.len();
    let projection = if c == 0 {
        RatMatrix::zeros(0, n)
    } else {
        // Left inverse restricted to span(full): solve fmᵀ-free by least structure:
        // pick independent rows of fm to form an invertible square block.
        let rows_e = Echelon::of_rows(&fm.transpose(), PivotOrder::Forward);
        let piv = rows_e.pivots();
        let block = fm.select(&piv, &(0..k + c).collect::<Vec<_>>());
        let inv = block.inverse().expect("independent columns give an invertible block");
        let mut p = RatMatrix::zeros(c, n);
        for i in 0..c {
            for (j, &r) in piv.iter().enumerate() {
                let v = inv.get(k + i, j);
                if !v.is_zero() {
                    p.set(i, r, v);
                }
            }
        }
        p
    };
    Ok(Quotient { complement: Subspace { ambient: n, basis: comp }, projection, sub_dim: k })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetry {
    None,
    GradedSymmetric,
    GradedAntisymmetric,
}

/// A bilinear pairing p(u, v) = uᵀ M v between a left and a right space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairingForm {
    pub matrix: RatMatrix,
    pub symmetry: Symmetry,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// The subspace lives in the left factor; its complement in the right one.
    Left,
    /// The subspace lives in the right factor; its complement in the left one.
    Right,
}

impl PairingForm {
    pub fn new(matrix: RatMatrix, symmetry: Symmetry) -> Self {
        PairingForm { matrix, symmetry }
    }

    pub fn left_dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn right_dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn eval(&self, u: &[Rat], v: &[Rat]) -> Rat {
        self.matrix.bilinear(u, v)
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.matrix.is_invertible()
    }

    /// Restriction to subspaces: the Gram matrix Lᵀ M R.
    pub fn restrict(&self, left: &Subspace, right: &Subspace) -> PairingForm {
        let m = left.matrix().transpose().mul(&self.matrix).mul(&right.matrix());
        PairingForm::new(m, self.symmetry)
    }

    /// Radical: vectors orthogonal to everything from both sides (square forms only).
    pub fn radical(&self) -> Subspace {
        assert_eq!(self.left_dim(), self.right_dim());
        let stacked = self.matrix.vstack(&self.matrix.transpose());
        kernel_basis(&stacked)
    }
}

/// With `Side::Left`: {v : p(s, v) = 0}; with `Side::Right`: {u : p(u, s) = 0}.
pub fn orthogonal_complement(p: &PairingForm, side: Side, s: &Subspace) -> Result<Subspace, LinalgError> {
    let expected = match side {
        Side::Left => p.left_dim(),
        Side::Right => p.right_dim(),
    };
    if s.ambient_dim() != expected {
        return Err(LinalgError::DimensionMismatch { expected, found: s.ambient_dim() });
    }
    let cond = match side {
        Side::Left => s.matrix().transpose().mul(&p.matrix),
        Side::Right => s.matrix().transpose().mul(&p.matrix.transpose()),
    };
    let out_dim = match side {
        Side::Left => p.right_dim(),
        Side::Right => p.left_dim(),
    };
    if s.dim() == 0 {
        return Ok(Subspace::full(out_dim));
    }
    Ok(kernel_basis(&cond))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Classification {
    pub isotropic: bool,
    pub coisotropic: bool,
    pub lagrangian: bool,
}

/// Isotropic iff s ⊆ s⊥, coisotropic iff s⊥ ⊆ s, lagrangian iff both.
pub fn classify_subspace(p: &PairingForm, s: &Subspace) -> Result<Classification, LinalgError> {
    if p.left_dim() != p.right_dim() {
        return Err(LinalgError::DimensionMismatch { expected: p.left_dim(), found: p.right_dim() });
    }
    let perp = orthogonal_complement(p, Side::Left, s)?;
    let isotropic = perp.contains_subspace(s);
    let coisotropic = s.contains_subspace(&perp);
    Ok(Classification { isotropic, coisotropic, lagrangian: isotropic && coisotropic })
}

/// Output of [`presymplectic_reduce`].
#[derive(Clone, Debug)]
pub struct Reduction {
    pub kernel: Subspace,
    pub quotient: Quotient,
    /// Pairing on the quotient, in the coordinates of `quotient.complement`.
    pub reduced: PairingForm,
    /// Projection of L, as a subspace of the quotient coordinates.
    pub image: Subspace,
    pub original: Classification,
    pub reduced_class: Classification,
    pub kernel_in_l: bool,
    pub reduced_nondegenerate: bool,
    /// The three implications relating L and its image, each evaluated on this instance.
    pub clause_isotropy: bool,
    pub clause_lagrangian_descends: bool,
    pub clause_lagrangian_lifts: bool,
}

impl Reduction {
    pub fn all_clauses_hold(&self) -> bool {
        self.reduced_nondegenerate && self.clause_isotropy && self.clause_lagrangian_descends && self.clause_lagrangian_lifts
    }
}

/// Quotients a possibly degenerate square pairing by its radical K and pushes L along.
pub fn presymplectic_reduce(p: &PairingForm, l: &Subspace) -> Result<Reduction, LinalgError> {
    if p.left_dim() != p.right_dim() {
        return Err(LinalgError::DimensionMismatch { expected: p.left_dim(), found: p.right_dim() });
    }
    if l.ambient_dim() != p.left_dim() {
        return Err(LinalgError::DimensionMismatch { expected: p.left_dim(), found: l.ambient_dim() });
    }
    let n = p.left_dim();
    let kernel = p.radical();
    let q = quotient(&Subspace::full(n), &kernel)?;
    let reduced = p.restrict(&q.complement, &q.complement);
    let imgs: Vec<Vec<Rat>> = l.basis().iter().map(|v| q.project(v)).collect();
    let image = Subspace::span(q.dim(), &imgs);
    let original = classify_subspace(p, l)?;
    let reduced_class = classify_subspace(&reduced, &image)?;
    let kernel_in_l = l.contains_subspace(&kernel);
    let reduced_nondegenerate = reduced.is_nondegenerate();
    let clause_isotropy = original.isotropic == reduced_class.isotropic;
    let clause_lagrangian_descends = !original.lagrangian || reduced_class.lagrangian;
    let clause_lagrangian_lifts = !(reduced_class.lagrangian && kernel_in_l) || original.lagrangian;
    Ok(Reduction {
        kernel,
        quotient: q,
        reduced,
        image,
        original,
        reduced_class,
        kernel_in_l,
        reduced_nondegenerate,
        clause_isotropy,
        clause_lagrangian_descends,
        clause_lagrangian_lifts,
    })
}

/// Sign of a rational as -1, 0 or 1.
pub fn sign_of(r: &Rat) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn circle_d0() -> RatMatrix {
        // edges (0,1), (1,2), (0,2) with δf(a,b) = f(b) − f(a)
        RatMatrix::from_i64(3, 3, &[&[-1, 1, 0], &[0, -1, 1], &[-1, 0, 1]])
    }

    #[test]
    fn kernel_of_identity_is_zero() {
        assert_eq!(kernel_basis(&RatMatrix::identity(2)).dim(), 0);
    }

    #[test]
    fn kernel_of_zero_matrix_is_everything() {
        assert_eq!(kernel_basis(&RatMatrix::zeros(3, 3)).dim(), 3);
    }

    #[test]
    fn circle_coboundary_kernel_is_constants() {
        let k = kernel_basis(&circle_d0());
        assert_eq!(k.dim(), 1);
        // Independent oracle: the constant function is killed and spans the kernel.
        let ones = vec![rat(1), rat(1), rat(1)];
        assert!(is_zero_vec(&circle_d0().mul_vec(&ones)));
        assert!(k.contains(&ones));
    }

    #[test]
    fn circle_coboundary_image_has_dimension_two() {
        let im = image_basis(&circle_d0());
        assert_eq!(im.dim(), 2);
        // The image is exactly the cochains whose signed sum around the loop vanishes.
        let loop_fn = [rat(1), rat(1), rat(-1)];
        for v in im.basis() {
            assert_eq!(dot(v, &loop_fn), rat(0));
        }
        assert!(!im.contains(&[rat(1), rat(0), rat(0)]));
    }

    #[test]
    fn identity_image_and_zero_image() {
        assert_eq!(image_basis(&RatMatrix::identity(4)).dim(), 4);
        assert_eq!(image_basis(&RatMatrix::zeros(4, 2)).dim(), 0);
    }

    #[test]
    fn quotient_trivial_cases() {
        let full = Subspace::full(2);
        let q = quotient(&full, &Subspace::zero(2)).unwrap();
        assert_eq!(q.dim(), 2);
        let q = quotient(&full, &full).unwrap();
        assert_eq!(q.dim(), 0);
    }

    #[test]
    fn quotient_rejects_non_contained() {
        let a = Subspace::span(2, &[vec![rat(1), rat(0)]]);
        let b = Subspace::span(2, &[vec![rat(0), rat(1)]]);
        assert_eq!(quotient(&a, &b).unwrap_err(), LinalgError::SubspaceNotContained);
    }

    #[test]
    fn circle_cohomology_via_quotients() {
        let d0 = circle_d0();
        let h0 = quotient(&kernel_basis(&d0), &Subspace::zero(3)).unwrap();
        let z1 = Subspace::full(3);
        let h1 = quotient(&z1, &image_basis(&d0)).unwrap();
        assert_eq!((h0.dim(), h1.dim()), (1, 1));
        // The projection kills the image and fixes the complement.
        for v in image_basis(&d0).basis() {
            assert!(is_zero_vec(&h1.project(v)));
        }
        for (i, v) in h1.complement.basis().iter().enumerate() {
            assert_eq!(h1.project(v), unit_vec(1, i));
        }
    }

    fn symplectic_plane() -> PairingForm {
        PairingForm::new(RatMatrix::from_i64(2, 2, &[&[0, 1], &[-1, 0]]), Symmetry::GradedAntisymmetric)
    }

    #[test]
    fn line_in_symplectic_plane_is_its_own_complement() {
        let p = symplectic_plane();
        let s = Subspace::span(2, &[vec![rat(1), rat(0)]]);
        let c = orthogonal_complement(&p, Side::Left, &s).unwrap();
        assert!(c.same_as(&s));
    }

    #[test]
    fn zero_pairing_complement_is_everything() {
        let p = PairingForm::new(RatMatrix::zeros(3, 3), Symmetry::None);
        let s = Subspace::span(3, &[vec![rat(1), rat(2), rat(3)]]);
        assert_eq!(orthogonal_complement(&p, Side::Left, &s).unwrap().dim(), 3);
    }

    #[test]
    fn complement_dimension_mismatch() {
        let p = symplectic_plane();
        let s = Subspace::zero(3);
        assert!(matches!(orthogonal_complement(&p, Side::Left, &s), Err(LinalgError::DimensionMismatch { .. })));
    }

    #[test]
    fn torus_intersection_form_meridian() {
        // Intersection form on H¹(T²) in the (meridian, longitude) basis.
        let p = PairingForm::new(RatMatrix::from_i64(2, 2, &[&[0, 1], &[-1, 0]]), Symmetry::GradedAntisymmetric);
        let m = Subspace::span(2, &[vec![rat(1), rat(0)]]);
        assert!(orthogonal_complement(&p, Side::Left, &m).unwrap().same_as(&m));
        let c = classify_subspace(&p, &m).unwrap();
        assert!(c.lagrangian);
    }

    #[test]
    fn classify_extremes() {
        let p = symplectic_plane();
        let z = classify_subspace(&p, &Subspace::zero(2)).unwrap();
        assert!(z.isotropic && !z.coisotropic);
        let f = classify_subspace(&p, &Subspace::full(2)).unwrap();
        assert!(f.coisotropic && !f.isotropic);
    }

    #[test]
    fn presymplectic_reduce_trivial_cases() {
        let p = symplectic_plane();
        let l = Subspace::span(2, &[vec![rat(1), rat(1)]]);
        let r = presymplectic_reduce(&p, &l).unwrap();
        assert_eq!((r.quotient.dim(), r.image.dim()), (2, 1));
        assert!(r.all_clauses_hold());
        let z = PairingForm::new(RatMatrix::zeros(3, 3), Symmetry::None);
        let r = presymplectic_reduce(&z, &Subspace::full(3)).unwrap();
        assert_eq!(r.quotient.dim(), 0);
    }

    #[test]
    fn presymplectic_reduce_rank_two_in_four() {
        // p = e1∧e2 on ℚ⁴, radical span(e3, e4); L = span(e1, e3, e4) contains the radical.
        let m = RatMatrix::from_i64(4, 4, &[&[0, 1, 0, 0], &[-1, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 0]]);
        let p = PairingForm::new(m, Symmetry::GradedAntisymmetric);
        let l = Subspace::span(4, &[unit_vec(4, 0), unit_vec(4, 2), unit_vec(4, 3)]);
        let r = presymplectic_reduce(&p, &l).unwrap();
        assert_eq!(r.quotient.dim(), 2);
        assert_eq!(r.image.dim(), 1);
        assert!(r.reduced_class.lagrangian);
        assert!(r.original.lagrangian);
        assert!(r.kernel_in_l);
        assert!(r.all_clauses_hold());
    }

    #[test]
    fn solve_and_inverse() {
        let a = RatMatrix::from_i64(2, 2, &[&[2, 1], &[1, 1]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), RatMatrix::identity(2));
        let x = solve_vec(&a, &[rat(3), rat(2)]).unwrap();
        assert_eq!(x, vec![rat(1), rat(1)]);
        let sing = RatMatrix::from_i64(2, 2, &[&[1, 1], &[1, 1]]);
        assert!(solve_vec(&sing, &[rat(1), rat(0)]).is_none());
        assert!(sing.inverse().is_none());
    }

    #[test]
    fn rational_formatting_round_trips() {
        for s in ["0", "3", "-7", "1/2", "-5/3"] {
            assert_eq!(fmt_rat(&parse_rat(s).unwrap()), s);
        }
        assert_eq!(parse_rat("4/2"), Some(rat(2)));
        assert!(parse_rat("1/0").is_none());
        assert!(parse_rat("x").is_none());
    }

    fn small_matrix() -> impl Strategy<Value = RatMatrix> {
        (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-2i64..3, r * c).prop_map(move |v| {
                let rows: Vec<Vec<Rat>> = v.chunks(c).map(|ch| ch.iter().map(|&x| rat(x)).collect()).collect();
                RatMatrix::from_dense(r, c, &rows)
            })
        })
    }

    fn square_matrix() -> impl Strategy<Value = RatMatrix> {
        (1usize..6).prop_flat_map(|n| {
            proptest::collection::vec(-2i64..3, n * n).prop_map(move |v| {
                let rows: Vec<Vec<Rat>> = v.chunks(n).map(|ch| ch.iter().map(|&x| rat(x)).collect()).collect();
                RatMatrix::from_dense(n, n, &rows)
            })
        })
    }

    proptest! {
        #[test]
        fn rank_nullity(m in small_matrix()) {
            let k = kernel_basis(&m);
            prop_assert_eq!(k.dim() + m.rank(), m.cols());
            for v in k.basis() {
                prop_assert!(is_zero_vec(&m.mul_vec(v)));
            }
            prop_assert_eq!(image_basis(&m).dim(), m.rank());
            prop_assert_eq!(kernel_basis_with(&m, PivotOrder::Reverse).dim(), k.dim());
        }

        #[test]
        fn quotient_reembeds(m in small_matrix()) {
            let n = m.cols();
            let sub = kernel_basis(&m);
            let q = quotient(&Subspace::full(n), &sub).unwrap();
            prop_assert!(q.complement.sum(&sub).same_as(&Subspace::full(n)));
            prop_assert_eq!(q.dim() + sub.dim(), n);
            for v in sub.basis() {
                prop_assert!(is_zero_vec(&q.project(v)));
            }
            for (i, v) in q.complement.basis().iter().enumerate() {
                prop_assert_eq!(q.project(v), unit_vec(q.dim(), i));
            }
        }

        #[test]
        fn complement_is_involutive_for_nondegenerate(m in square_matrix(), picks in proptest::collection::vec(-2i64..3, 0..12)) {
            // Adding 11·I makes the matrix strictly diagonally dominant, hence invertible.
            let n = m.rows();
            let m = m.add(&RatMatrix::identity(n).scale(&rat(11)));
            let p = PairingForm::new(m, Symmetry::None);
            let vecs: Vec<Vec<Rat>> = picks.chunks(n).filter(|c| c.len() == n).map(|c| c.iter().map(|&x| rat(x)).collect()).collect();
            let s = Subspace::span(n, &vecs);
            let perp = orthogonal_complement(&p, Side::Left, &s).unwrap();
            prop_assert_eq!(perp.dim(), n - s.dim());
            let back = orthogonal_complement(&p, Side::Right, &perp).unwrap();
            prop_assert!(back.same_as(&s));
        }
    }
}
