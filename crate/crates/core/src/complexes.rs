//! Finite cochain complexes over ℚ, their cohomology, chain maps, long exact
//! sequences of short exact sequences, and ghost-number bookkeeping for sums of
//! shifted complexes.

use std::collections::BTreeSet;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{
    image_basis, kernel_basis, quotient, solve, solve_vec, zero_vec, Echelon, PivotOrder, Quotient, Rat, RatMatrix,
    Subspace,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("d∘d is nonzero from degree {0}")]
    NotAComplex(i32),
    #[error("differential in degree {degree} has shape {found:?}, expected {expected:?}")]
    BadShape { degree: i32, expected: (usize, usize), found: (usize, usize) },
    #[error("map does not commute with the differentials at degree {0}")]
    NotAChainMap(i32),
    #[error("not short exact at degree {degree}: {reason}")]
    NotShortExact { degree: i32, reason: String },
    #[error("ghost number mismatch between sectors {0} and {1}")]
    GhostMismatch(String, String),
    #[error("duplicate sector name {0}")]
    DuplicateSector(String),
}

/// A bounded cochain complex C^lo → … → C^hi, where `d[i]` maps C^{lo+i} → C^{lo+i+1}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CochainComplex {
    lo: i32,
    dims: Vec<usize>,
    d: Vec<RatMatrix>,
}

impl CochainComplex {
    /// Builds and checks a complex whose lowest degree is `lo`.
    pub fn new(lo: i32, dims: Vec<usize>, d: Vec<RatMatrix>) -> Result<Self, ComplexError> {
        assert_eq!(d.len() + 1, dims.len().max(1), "need one differential between consecutive degrees");
        for (i, m) in d.iter().enumerate() {
            let expected = (dims[i + 1], dims[i]);
            if (m.rows(), m.cols()) != expected {
                return Err(ComplexError::BadShape { degree: lo + i as i32, expected, found: (m.rows(), m.cols()) });
            }
        }
        for i in 0..d.len().saturating_sub(1) {
            if !d[i + 1].mul(&d[i]).is_zero() {
                return Err(ComplexError::NotAComplex(lo + i as i32));
            }
        }
        Ok(CochainComplex { lo, dims, d })
    }

    pub fn zero() -> Self {
        CochainComplex { lo: 0, dims: vec![0], d: Vec::new() }
    }

    pub fn lo(&self) -> i32 {
        self.lo
    }

    pub fn hi(&self) -> i32 {
        self.lo + self.dims.len() as i32 - 1
    }

    pub fn degrees(&self) -> std::ops::RangeInclusive<i32> {
        self.lo..=self.hi()
    }

    pub fn dim(&self, k: i32) -> usize {
        if k < self.lo || k > self.hi() {
            0
        } else {
            self.dims[(k - self.lo) as usize]
        }
    }

    /// The differential C^k → C^{k+1}, a zero matrix outside the stored range.
    pub fn d(&self, k: i32) -> RatMatrix {
        if k >= self.lo && k < self.hi() {
            self.d[(k - self.lo) as usize].clone()
        } else {
            RatMatrix::zeros(self.dim(k + 1), self.dim(k))
        }
    }

    pub fn cocycles(&self, k: i32) -> Subspace {
        kernel_basis(&self.d(k))
    }

    pub fn coboundaries(&self, k: i32) -> Subspace {
        if self.dim(k - 1) == 0 {
            return Subspace::zero(self.dim(k));
        }
        image_basis(&self.d(k - 1))
    }

    pub fn cohomology(&self, k: i32) -> Cohomology {
        let z = self.cocycles(k);
        let b = self.coboundaries(k);
        let q = quotient(&z, &b).expect("coboundaries are cocycles");
        Cohomology { degree: k, ambient: self.dim(k), cocycles: z, coboundaries: b, quotient: q }
    }

    pub fn betti(&self) -> Vec<usize> {
        self.degrees().map(|k| self.cohomology(k).dim()).collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.degrees().map(|k| sign(k) * self.dim(k) as i64).sum()
    }
}

fn sign(k: i32) -> i64 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// H^k = Z^k / B^k with stored cocycle representatives.
#[derive(Clone, Debug)]
pub struct Cohomology {
    pub degree: i32,
    pub ambient: usize,
    pub cocycles: Subspace,
    pub coboundaries: Subspace,
    pub quotient: Quotient,
}

impl Cohomology {
    pub fn dim(&self) -> usize {
        self.quotient.dim()
    }

    /// Cocycle representatives of the basis classes.
    pub fn representatives(&self) -> &[Vec<Rat>] {
        self.quotient.complement.basis()
    }

    /// Coordinates of the class of a cocycle; `None` if `v` is not closed.
    pub fn class_of(&self, v: &[Rat]) -> Option<Vec<Rat>> {
        if !self.cocycles.contains(v) {
            return None;
        }
        Some(self.quotient.project(v))
    }

    /// Matrix whose columns are the representatives.
    pub fn rep_matrix(&self) -> RatMatrix {
        RatMatrix::from_columns(self.ambient, self.representatives())
    }
}

/// A degree-preserving map of complexes given by one block per degree.
#[derive(Clone, Debug)]
pub struct ChainMap {
    pub source: CochainComplex,
    pub target: CochainComplex,
    blocks: Vec<(i32, RatMatrix)>,
}

impl ChainMap {
    /// `blocks` maps a degree to its block; missing degrees are zero.
    pub fn new(source: CochainComplex, target: CochainComplex, blocks: Vec<(i32, RatMatrix)>) -> Result<Self, ComplexError> {
        let cm = ChainMap { source, target, blocks };
        for (k, b) in &cm.blocks {
            let expected = (cm.target.dim(*k), cm.source.dim(*k));
            if (b.rows(), b.cols()) != expected {
                return Err(ComplexError::BadShape { degree: *k, expected, found: (b.rows(), b.cols()) });
            }
        }
        for k in cm.degrees() {
            let lhs = cm.block(k + 1).mul(&cm.source.d(k));
            let rhs = cm.target.d(k).mul(&cm.block(k));
            if lhs != rhs {
                return Err(ComplexError::NotAChainMap(k));
            }
        }
        Ok(cm)
    }

    fn degrees(&self) -> std::ops::RangeInclusive<i32> {
        self.source.lo().min(self.target.lo()) - 1..=self.source.hi().max(self.target.hi())
    }

    pub fn block(&self, k: i32) -> RatMatrix {
        for (kk, b) in &self.blocks {
            if *kk == k {
                return b.clone();
            }
        }
        RatMatrix::zeros(self.target.dim(k), self.source.dim(k))
    }

    /// Induced map on cohomology in the stored representative bases.
    pub fn induced(&self, k: i32) -> RatMatrix {
        let hs = self.source.cohomology(k);
        let ht = self.target.cohomology(k);
        induced_map(&self.block(k), &hs, &ht)
    }
}

/// Matrix of the map on cohomology induced by a cochain-level block.
pub fn induced_map(block: &RatMatrix, hs: &Cohomology, ht: &Cohomology) -> RatMatrix {
    let mut m = RatMatrix::zeros(ht.dim(), hs.dim());
    for (j, r) in hs.representatives().iter().enumerate() {
        let img = block.mul_vec(r);
        let c = ht.class_of(&img).expect("chain maps send cocycles to cocycles");
        for (i, v) in c.into_iter().enumerate() {
            m.set(i, j, v);
        }
    }
    m
}

#[derive(Clone, Debug, Serialize)]
pub struct SequenceNode {
    pub label: String,
    pub dim: usize,
}

/// A finite sequence of linear maps between consecutive nodes, with exactness verdicts
/// at every interior node.
#[derive(Clone, Debug, Serialize)]
pub struct ExactSequenceReport {
    pub nodes: Vec<SequenceNode>,
    #[serde(skip)]
    pub maps: Vec<RatMatrix>,
    /// One verdict per node; the end nodes are judged as if padded with zero maps.
    pub exact: Vec<bool>,
}

impl ExactSequenceReport {
    /// `maps[i]` goes from node i to node i+1.
    pub fn new(nodes: Vec<SequenceNode>, maps: Vec<RatMatrix>) -> Self {
        assert_eq!(maps.len() + 1, nodes.len());
        let mut exact = Vec::with_capacity(nodes.len());
        for i in 0..nodes.len() {
            let dim = nodes[i].dim;
            let (rank_in, comp_zero) = if i > 0 {
                let m_in = &maps[i - 1];
                let comp = if i < maps.len() { maps[i].mul(m_in).is_zero() } else { true };
                (m_in.rank(), comp)
            } else {
                (0, true)
            };
            let rank_out = if i < maps.len() { maps[i].rank() } else { 0 };
            exact.push(comp_zero && rank_in + rank_out == dim);
        }
        ExactSequenceReport { nodes, maps, exact }
    }

    /// Verdicts at interior nodes only, for sequences cut out of a longer one.
    pub fn exact_interior(&self) -> bool {
        let n = self.exact.len();
        n < 3 || self.exact[1..n - 1].iter().all(|&b| b)
    }

    pub fn all_exact(&self) -> bool {
        self.exact.iter().all(|&b| b)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.nodes.iter().map(|n| n.dim).collect()
    }
}

/// Long exact cohomology sequence of a short exact sequence 0 → A →i B →p C → 0.
#[derive(Clone, Debug)]
pub struct LongExactSequence {
    pub lo: i32,
    pub hi: i32,
    pub h_a: Vec<Cohomology>,
    pub h_b: Vec<Cohomology>,
    pub h_c: Vec<Cohomology>,
    pub i_star: Vec<RatMatrix>,
    pub p_star: Vec<RatMatrix>,
    /// `delta[k - lo]`: H^k(C) → H^{k+1}(A).
    pub delta: Vec<RatMatrix>,
    pub report: ExactSequenceReport,
}

impl LongExactSequence {
    fn at(&self, k: i32) -> usize {
        (k - self.lo) as usize
    }

    pub fn h_a(&self, k: i32) -> &Cohomology {
        &self.h_a[self.at(k)]
    }
    pub fn h_b(&self, k: i32) -> &Cohomology {
        &self.h_b[self.at(k)]
    }
    pub fn h_c(&self, k: i32) -> &Cohomology {
        &self.h_c[self.at(k)]
    }
    pub fn i_star(&self, k: i32) -> &RatMatrix {
        &self.i_star[self.at(k)]
    }
    pub fn p_star(&self, k: i32) -> &RatMatrix {
        &self.p_star[self.at(k)]
    }
    pub fn delta(&self, k: i32) -> &RatMatrix {
        &self.delta[self.at(k)]
    }
}

/// Checks 0 → A → B → C → 0 is exact in every degree.
pub fn check_short_exact(i: &ChainMap, p: &ChainMap) -> Result<(), ComplexError> {
    let b = &i.target;
    let lo = i.source.lo().min(b.lo()).min(p.target.lo());
    let hi = i.source.hi().max(b.hi()).max(p.target.hi());
    for k in lo..=hi {
        let ik = i.block(k);
        let pk = p.block(k);
        let fail = |reason: &str| Err(ComplexError::NotShortExact { degree: k, reason: reason.to_string() });
        if ik.rank() != i.source.dim(k) {
            return fail("inclusion not injective");
        }
        if pk.rank() != p.target.dim(k) {
            return fail("restriction not surjective");
        }
        if !pk.mul(&ik).is_zero() {
            return fail("composition not zero");
        }
        if ik.rank() + pk.rank() != b.dim(k) {
            return fail("not exact in the middle");
        }
    }
    Ok(())
}

/// Connecting homomorphism H^k(C) → H^{k+1}(A) by the zig-zag, lifting with the
/// given elimination order.
fn zigzag(i: &ChainMap, p: &ChainMap, k: i32, hc: &Cohomology, ha1: &Cohomology, order: PivotOrder) -> RatMatrix {
    let b = &i.target;
    let pk = p.block(k);
    let dk = b.d(k);
    let ik1 = i.block(k + 1);
    let mut m = RatMatrix::zeros(ha1.dim(), hc.dim());
    for (j, z) in hc.representatives().iter().enumerate() {
        let lift = solve_ordered(&pk, z, order).expect("restriction is surjective");
        let db = dk.mul_vec(&lift);
        let a = solve_ordered(&ik1, &db, order).expect("d of a lift lies in the image of the inclusion");
        let c = ha1.class_of(&a).expect("zig-zag produces a cocycle");
        for (r, v) in c.into_iter().enumerate() {
            m.set(r, j, v);
        }
    }
    m
}

/// Particular solution of a·x = b, with pivots chosen in the given order.
fn solve_ordered(a: &RatMatrix, b: &[Rat], order: PivotOrder) -> Option<Vec<Rat>> {
    match order {
        PivotOrder::Forward => solve_vec(a, b),
        PivotOrder::Reverse => {
            // Reverse the column order so forward elimination picks the last columns first.
            let n = a.cols();
            let perm: Vec<usize> = (0..n).rev().collect();
            let ar = a.select(&(0..a.rows()).collect::<Vec<_>>(), &perm);
            let x = solve_vec(&ar, b)?;
            let mut out = zero_vec(n);
            for (j, &c) in perm.iter().enumerate() {
                out[c] = x[j].clone();
            }
            Some(out)
        }
    }
}

/// The connecting map in degree k.
pub fn connecting_map(i: &ChainMap, p: &ChainMap, k: i32) -> Result<RatMatrix, ComplexError> {
    check_short_exact(i, p)?;
    let hc = p.target.cohomology(k);
    let ha1 = i.source.cohomology(k + 1);
    Ok(zigzag(i, p, k, &hc, &ha1, PivotOrder::Forward))
}

/// Recomputes the connecting map with different lifts and representatives shifted by
/// coboundaries, and compares with the forward computation.
pub fn connecting_map_is_well_defined(i: &ChainMap, p: &ChainMap, k: i32) -> Result<bool, ComplexError> {
    check_short_exact(i, p)?;
    let hc = p.target.cohomology(k);
    let ha1 = i.source.cohomology(k + 1);
    let fwd = zigzag(i, p, k, &hc, &ha1, PivotOrder::Forward);
    let rev = zigzag(i, p, k, &hc, &ha1, PivotOrder::Reverse);
    if fwd != rev {
        return Ok(false);
    }
    // Shift each representative by the sum of the coboundary basis vectors.
    let shift = hc.coboundaries.basis().iter().fold(zero_vec(hc.ambient), |acc, v| crate::linalg::vec_add(&acc, v));
    let b = &i.target;
    for (j, z) in hc.representatives().iter().enumerate() {
        let z2 = crate::linalg::vec_add(z, &shift);
        let lift = solve_vec(&p.block(k), &z2).expect("surjective");
        let db = b.d(k).mul_vec(&lift);
        let a = solve_vec(&i.block(k + 1), &db).expect("in image");
        let c = ha1.class_of(&a).expect("cocycle");
        if c != fwd.column(j) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Long exact sequence of a short exact sequence of complexes, with the sequence
/// H^k(A) → H^k(B) → H^k(C) → H^{k+1}(A) → … verified node by node.
pub fn les_of_short_exact(i: &ChainMap, p: &ChainMap, names: [&str; 3]) -> Result<LongExactSequence, ComplexError> {
    check_short_exact(i, p)?;
    let lo = i.source.lo().min(i.target.lo()).min(p.target.lo());
    let hi = i.source.hi().max(i.target.hi()).max(p.target.hi());
    let mut h_a = Vec::new();
    let mut h_b = Vec::new();
    let mut h_c = Vec::new();
    for k in lo..=hi + 1 {
        h_a.push(i.source.cohomology(k));
        h_b.push(i.target.cohomology(k));
        h_c.push(p.target.cohomology(k));
    }
    let mut i_star = Vec::new();
    let mut p_star = Vec::new();
    let mut delta = Vec::new();
    let mut nodes = Vec::new();
    let mut maps = Vec::new();
    for k in lo..=hi {
        let at = (k - lo) as usize;
        let im = induced_map(&i.block(k), &h_a[at], &h_b[at]);
        let pm = induced_map(&p.block(k), &h_b[at], &h_c[at]);
        let dm = zigzag(i, p, k, &h_c[at], &h_a[at + 1], PivotOrder::Forward);
        nodes.push(SequenceNode { label: format!("{}^{}", names[0], k), dim: h_a[at].dim() });
        nodes.push(SequenceNode { label: format!("{}^{}", names[1], k), dim: h_b[at].dim() });
        nodes.push(SequenceNode { label: format!("{}^{}", names[2], k), dim: h_c[at].dim() });
        maps.push(im.clone());
        maps.push(pm.clone());
        if k < hi {
            maps.push(dm.clone());
        }
        i_star.push(im);
        p_star.push(pm);
        delta.push(dm);
    }
    let report = ExactSequenceReport::new(nodes, maps);
    Ok(LongExactSequence { lo, hi, h_a, h_b, h_c, i_star, p_star, delta, report })
}

/// One summand of a graded field space: a cochain complex placed with a shift.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Summand {
    pub name: String,
    /// Dimension of the underlying cochain space in each form degree 0, 1, ….
    pub form_dims: Vec<usize>,
    pub shift: i32,
}

/// One basis vector of a [`ShiftedSum`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slot {
    pub sector: usize,
    pub form_degree: usize,
    pub index: usize,
}

/// Direct sum of shifted complexes; a form-degree-k element of a shift-s summand has
/// ghost number s − k. Basis order: summand by summand, form degree ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftedSum {
    pub summands: Vec<Summand>,
    offsets: Vec<Vec<usize>>,
    total: usize,
}

impl ShiftedSum {
    pub fn new(summands: Vec<Summand>) -> Result<Self, ComplexError> {
        let mut seen = BTreeSet::new();
        for s in &summands {
            if !seen.insert(s.name.clone()) {
                return Err(ComplexError::DuplicateSector(s.name.clone()));
            }
        }
        let mut offsets = Vec::new();
        let mut total = 0;
        for s in &summands {
            let mut o = Vec::new();
            for &d in &s.form_dims {
                o.push(total);
                total += d;
            }
            offsets.push(o);
        }
        Ok(ShiftedSum { summands, offsets, total })
    }

    pub fn empty() -> Self {
        ShiftedSum { summands: Vec::new(), offsets: Vec::new(), total: 0 }
    }

    pub fn dim(&self) -> usize {
        self.total
    }

    pub fn sector_index(&self, name: &str) -> Option<usize> {
        self.summands.iter().position(|s| s.name == name)
    }

    /// Position of element `index` of form degree `k` in sector `sector`.
    pub fn pos(&self, sector: usize, k: usize, index: usize) -> usize {
        assert!(index < self.summands[sector].form_dims[k]);
        self.offsets[sector][k] + index
    }

    pub fn pos_named(&self, name: &str, k: usize, index: usize) -> usize {
        self.pos(self.sector_index(name).unwrap_or_else(|| panic!("no sector {name}")), k, index)
    }

    /// Range of positions of one (sector, form degree) block.
    pub fn block(&self, sector: usize, k: usize) -> std::ops::Range<usize> {
        let o = self.offsets[sector][k];
        o..o + self.summands[sector].form_dims[k]
    }

    pub fn slot(&self, pos: usize) -> Slot {
        for (s, offs) in self.offsets.iter().enumerate() {
            for (k, &o) in offs.iter().enumerate() {
                let d = self.summands[s].form_dims[k];
                if pos >= o && pos < o + d {
                    return Slot { sector: s, form_degree: k, index: pos - o };
                }
            }
        }
        panic!("position {pos} out of range");
    }

    pub fn ghost_of_block(&self, sector: usize, k: usize) -> i32 {
        self.summands[sector].shift - k as i32
    }

    pub fn ghost(&self, pos: usize) -> i32 {
        let s = self.slot(pos);
        self.ghost_of_block(s.sector, s.form_degree)
    }

    /// All ghost numbers carried by some nonempty block, ascending.
    pub fn ghosts(&self) -> Vec<i32> {
        let mut g = BTreeSet::new();
        for (s, sm) in self.summands.iter().enumerate() {
            for (k, &d) in sm.form_dims.iter().enumerate() {
                if d > 0 {
                    g.insert(self.ghost_of_block(s, k));
                }
            }
        }
        g.into_iter().collect()
    }

    /// Positions of ghost number g, in basis order.
    pub fn positions_of_ghost(&self, g: i32) -> Vec<usize> {
        (0..self.total).filter(|&p| self.ghost(p) == g).collect()
    }

    fn block_label(&self, pos: usize) -> String {
        let s = self.slot(pos);
        format!("{}[{}]", self.summands[s.sector].name, s.form_degree)
    }
}

/// Views the linearization of a ghost-number-one vector field as a cochain complex graded by
/// degree = −ghost, so that the operator raises degree. Returns the complex and, for
/// each degree, the positions of its basis in the total space.
pub fn graded_complex(space: &ShiftedSum, op: &RatMatrix) -> Result<(CochainComplex, Vec<(i32, Vec<usize>)>), ComplexError> {
    verify_ghost_grading(space, op, None)?;
    let ghosts = space.ghosts();
    if ghosts.is_empty() {
        return Ok((CochainComplex::zero(), vec![(0, Vec::new())]));
    }
    let lo = -ghosts[ghosts.len() - 1];
    let hi = -ghosts[0];
    let mut pos = Vec::new();
    for deg in lo..=hi {
        pos.push((deg, space.positions_of_ghost(-deg)));
    }
    let dims: Vec<usize> = pos.iter().map(|(_, p)| p.len()).collect();
    let mut ds = Vec::new();
    for w in pos.windows(2) {
        ds.push(op.select(&w[1].1, &w[0].1));
    }
    Ok((CochainComplex::new(lo, dims, ds)?, pos))
}

/// Checks that `op` is the linearization of a ghost-number-one vector field, i.e. as a
/// map on field vectors it sends slot ghost g to g − 1, and that `pairing`, if given,
/// couples only ghost numbers adding to the declared total.
pub fn verify_ghost_grading(space: &ShiftedSum, op: &RatMatrix, pairing: Option<(&RatMatrix, i32)>) -> Result<(), ComplexError> {
    assert_eq!((op.rows(), op.cols()), (space.dim(), space.dim()));
    for (r, c, _) in op.entries() {
        if space.ghost(r) + 1 != space.ghost(c) {
            return Err(ComplexError::GhostMismatch(space.block_label(c), space.block_label(r)));
        }
    }
    if let Some((w, total)) = pairing {
        for (r, c, _) in w.entries() {
            if space.ghost(r) + space.ghost(c) != total {
                return Err(ComplexError::GhostMismatch(space.block_label(r), space.block_label(c)));
            }
        }
    }
    Ok(())
}

/// Restricts a total-space vector to the positions in `pos`.
pub fn restrict_vec(v: &[Rat], pos: &[usize]) -> Vec<Rat> {
    pos.iter().map(|&p| v[p].clone()).collect()
}

/// Embeds a vector on `pos` into a total space of dimension n.
pub fn embed_vec(v: &[Rat], pos: &[usize], n: usize) -> Vec<Rat> {
    let mut out = zero_vec(n);
    for (x, &p) in v.iter().zip(pos) {
        out[p] = x.clone();
    }
    out
}

/// Rank of a product of maps restricted to a subspace, used by dimension checks.
pub fn rank_on(m: &RatMatrix, s: &Subspace) -> usize {
    if s.dim() == 0 {
        return 0;
    }
    m.mul(&s.matrix()).rank()
}

/// Whether the columns of `a` span the same space as the columns of `b`.
pub fn same_column_space(a: &RatMatrix, b: &RatMatrix) -> bool {
    let ra = a.rank();
    ra == b.rank() && (a.cols() == 0 || b.cols() == 0 || a.hstack(b).rank() == ra)
}

/// Whether `v` lies in the column space of `a`.
pub fn in_column_space(a: &RatMatrix, v: &[Rat]) -> bool {
    if v.iter().all(|x| x.is_zero()) {
        return true;
    }
    let mut e = Echelon::of_rows(&a.transpose(), PivotOrder::Forward);
    !e.insert_dense(v)
}

/// Solves a·X = B for a block of right-hand sides.
pub fn solve_block(a: &RatMatrix, b: &RatMatrix) -> Option<RatMatrix> {
    solve(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;

    pub(crate) fn circle() -> CochainComplex {
        let d0 = RatMatrix::from_i64(3, 3, &[&[-1, 1, 0], &[0, -1, 1], &[-1, 0, 1]]);
        CochainComplex::new(0, vec![3, 3], vec![d0]).unwrap()
    }

    fn disk() -> CochainComplex {
        // vertices 0,1,2; edges 01,02,12; one triangle 012
        let d0 = RatMatrix::from_i64(3, 3, &[&[-1, 1, 0], &[-1, 0, 1], &[0, -1, 1]]);
        let d1 = RatMatrix::from_i64(1, 3, &[&[1, -1, 1]]);
        CochainComplex::new(0, vec![3, 3, 1], vec![d0, d1]).unwrap()
    }

    #[test]
    fn point_has_one_dimensional_h0() {
        let p = CochainComplex::new(0, vec![1], vec![]).unwrap();
        assert_eq!(p.betti(), vec![1]);
    }

    #[test]
    fn circle_and_disk_betti_numbers() {
        assert_eq!(circle().betti(), vec![1, 1]);
        assert_eq!(disk().betti(), vec![1, 0, 0]);
    }

    #[test]
    fn representatives_are_cocycles() {
        let c = circle();
        for k in c.degrees() {
            let h = c.cohomology(k);
            for r in h.representatives() {
                assert!(c.d(k).mul_vec(r).iter().all(|x| x.is_zero()));
            }
        }
    }

    #[test]
    fn nonzero_square_is_rejected() {
        let d = RatMatrix::from_i64(1, 1, &[&[1]]);
        assert_eq!(
            CochainComplex::new(0, vec![1, 1, 1], vec![d.clone(), d]).unwrap_err(),
            ComplexError::NotAComplex(0)
        );
    }

    /// Relative/absolute/boundary sequence for the interval with one edge.
    fn interval_pair() -> (ChainMap, ChainMap) {
        let abs = CochainComplex::new(0, vec![2, 1], vec![RatMatrix::from_i64(1, 2, &[&[-1, 1]])]).unwrap();
        let rel = CochainComplex::new(0, vec![0, 1], vec![RatMatrix::zeros(1, 0)]).unwrap();
        let bdry = CochainComplex::new(0, vec![2, 0], vec![RatMatrix::zeros(0, 2)]).unwrap();
        let inc = ChainMap::new(rel, abs.clone(), vec![(0, RatMatrix::zeros(2, 0)), (1, RatMatrix::identity(1))]).unwrap();
        let res = ChainMap::new(abs, bdry, vec![(0, RatMatrix::identity(2)), (1, RatMatrix::zeros(0, 1))]).unwrap();
        (inc, res)
    }

    #[test]
    fn interval_relative_cohomology() {
        let (i, p) = interval_pair();
        let les = les_of_short_exact(&i, &p, ["Hrel", "H", "Hbd"]).unwrap();
        assert_eq!(les.h_a(1).dim(), 1);
        assert_eq!(les.h_a(0).dim(), 0);
        assert!(les.report.all_exact());
        // H⁰(∂I) = ℚ² maps onto H¹(I,∂I) = ℚ with the constants in its kernel.
        assert_eq!(les.delta(0).rank(), 1);
        assert!(connecting_map_is_well_defined(&i, &p, 0).unwrap());
    }

    #[test]
    fn not_short_exact_is_reported() {
        let (i, _) = interval_pair();
        let abs = i.target.clone();
        let bdry = CochainComplex::new(0, vec![2, 0], vec![RatMatrix::zeros(0, 2)]).unwrap();
        let bad = ChainMap::new(abs, bdry, vec![]).unwrap();
        assert!(matches!(les_of_short_exact(&i, &bad, ["a", "b", "c"]), Err(ComplexError::NotShortExact { .. })));
    }

    #[test]
    fn exact_sequence_report_counts_ranks() {
        let nodes = vec![
            SequenceNode { label: "a".into(), dim: 1 },
            SequenceNode { label: "b".into(), dim: 1 },
        ];
        let r = ExactSequenceReport::new(nodes, vec![RatMatrix::identity(1)]);
        assert!(r.all_exact());
        let nodes = vec![
            SequenceNode { label: "a".into(), dim: 1 },
            SequenceNode { label: "b".into(), dim: 1 },
        ];
        let r = ExactSequenceReport::new(nodes, vec![RatMatrix::zeros(1, 1)]);
        assert!(!r.all_exact());
    }

    fn bf3_like() -> ShiftedSum {
        ShiftedSum::new(vec![
            Summand { name: "A".into(), form_dims: vec![1, 1, 1, 1], shift: 1 },
            Summand { name: "B".into(), form_dims: vec![1, 1, 1, 1], shift: 1 },
        ])
        .unwrap()
    }

    #[test]
    fn ghost_grading_of_coboundary_sum() {
        let s = bf3_like();
        let mut q = RatMatrix::zeros(s.dim(), s.dim());
        for sec in 0..2 {
            for k in 0..3 {
                q.set(s.pos(sec, k + 1, 0), s.pos(sec, k, 0), rat(1));
            }
        }
        assert!(verify_ghost_grading(&s, &q, None).is_ok());
        // A¹ (gh 0) against B² (gh −1) is a ghost −1 pairing.
        let mut w = RatMatrix::zeros(s.dim(), s.dim());
        w.set(s.pos(0, 1, 0), s.pos(1, 2, 0), rat(1));
        assert!(verify_ghost_grading(&s, &q, Some((&w, -1))).is_ok());
        assert!(matches!(verify_ghost_grading(&s, &q, Some((&w, 0))), Err(ComplexError::GhostMismatch(..))));
    }

    #[test]
    fn misshifted_operator_is_rejected() {
        let s = bf3_like();
        let mut q = RatMatrix::zeros(s.dim(), s.dim());
        q.set(s.pos(1, 0, 0), s.pos(0, 0, 0), rat(1));
        assert_eq!(
            verify_ghost_grading(&s, &q, None).unwrap_err(),
            ComplexError::GhostMismatch("A[0]".into(), "B[0]".into())
        );
    }

    #[test]
    fn duplicate_sector_names() {
        let s = Summand { name: "A".into(), form_dims: vec![1], shift: 0 };
        assert!(ShiftedSum::new(vec![s.clone(), s]).is_err());
    }

    #[test]
    fn graded_complex_orders_by_minus_ghost() {
        let s = bf3_like();
        let mut q = RatMatrix::zeros(s.dim(), s.dim());
        for sec in 0..2 {
            for k in [0, 2] {
                q.set(s.pos(sec, k + 1, 0), s.pos(sec, k, 0), rat(1));
            }
        }
        let (c, pos) = graded_complex(&s, &q).unwrap();
        assert_eq!(c.lo(), -1);
        assert_eq!(c.hi(), 2);
        assert_eq!(pos[0].1.len(), 2);
        assert_eq!(c.betti(), vec![0, 0, 0, 0]);
    }
}
