//! Oriented simplicial pseudomanifolds with boundary.
//!
//! Vertices carry a global order fixed by the `vertices` list of the description. Every
//! simplex is stored as the increasing tuple of vertex positions, so face maps, the
//! Alexander-Whitney cup product and restriction to the boundary are all index
//! arithmetic on sorted tuples. A top simplex additionally carries the sign of its
//! orientation relative to that increasing order.
//!
//! The boundary is oriented by the outward-face rule: the face obtained by deleting
//! vertex i of a top simplex with sign ε gets coefficient (−1)^i ε, so ∂[N] = [∂N].

use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complexes::{ChainMap, CochainComplex, Cohomology};
use crate::linalg::{rat, PairingForm, Rat, RatMatrix, Symmetry};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexFileError {
    #[error("face {0:?} lies in three or more top simplices")]
    NonManifoldFace(Vec<i64>),
    #[error("orientations of the top simplices around face {0:?} do not cancel")]
    IncoherentOrientation(Vec<i64>),
    #[error("top simplex {0:?} appears twice or repeats a vertex")]
    DuplicateSimplex(Vec<i64>),
    #[error("vertex {0} is used but not declared")]
    UnknownVertex(i64),
    #[error("vertex {0} is declared twice")]
    DuplicateVertex(i64),
    #[error("top simplex {0:?} should have {1} vertices")]
    WrongArity(Vec<i64>, usize),
    #[error("orientation_signs must have one entry ±1 per top simplex")]
    BadSigns,
    #[error("malformed complex description: {0}")]
    Parse(String),
}

/// The on-disk description of a complex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexFile {
    pub dimension: usize,
    pub vertices: Vec<i64>,
    pub top_simplices: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation_signs: Option<Vec<i64>>,
}

impl ComplexFile {
    /// A description whose orientation signs are propagated from the first top simplex
    /// across shared faces, one connected component at a time. Fails on faces in three
    /// or more top simplices and on non-orientable input.
    pub fn coherent(dimension: usize, top_simplices: Vec<Vec<i64>>) -> Result<Self, ComplexFileError> {
        let mut vertices: Vec<i64> = top_simplices.iter().flatten().copied().collect();
        vertices.sort_unstable();
        vertices.dedup();
        let mut faces: HashMap<Vec<i64>, Vec<(usize, i64)>> = HashMap::new();
        for (ti, t) in top_simplices.iter().enumerate() {
            if t.len() != dimension + 1 {
                return Err(ComplexFileError::WrongArity(t.clone(), dimension + 1));
            }
            let order: Vec<usize> = {
                let mut o: Vec<usize> = (0..t.len()).collect();
                o.sort_by_key(|&i| t[i]);
                o
            };
            let base = perm_sign(&order);
            let sorted: Vec<i64> = order.iter().map(|&i| t[i]).collect();
            for i in 0..sorted.len() {
                if dimension == 0 {
                    break;
                }
                let mut f = sorted.clone();
                f.remove(i);
                let sg = if i % 2 == 0 { base } else { -base };
                faces.entry(f).or_default().push((ti, sg));
            }
        }
        let mut adj: Vec<Vec<(usize, bool)>> = vec![Vec::new(); top_simplices.len()];
        for (f, inc) in &faces {
            if inc.len() >= 3 {
                return Err(ComplexFileError::NonManifoldFace(f.clone()));
            }
            if let [(a, sa), (b, sb)] = inc.as_slice() {
                // Same induced sign means the two simplices need opposite signs.
                adj[*a].push((*b, sa == sb));
                adj[*b].push((*a, sa == sb));
            }
        }
        let mut signs = vec![0i64; top_simplices.len()];
        for start in 0..top_simplices.len() {
            if signs[start] != 0 {
                continue;
            }
            signs[start] = 1;
            let mut stack = vec![start];
            while let Some(a) = stack.pop() {
                for &(b, flip) in &adj[a] {
                    let want = if flip { -signs[a] } else { signs[a] };
                    if signs[b] == 0 {
                        signs[b] = want;
                        stack.push(b);
                    } else if signs[b] != want {
                        let mut f: Vec<i64> = top_simplices[a].iter().filter(|v| top_simplices[b].contains(v)).copied().collect();
                        f.sort_unstable();
                        return Err(ComplexFileError::IncoherentOrientation(f));
                    }
                }
            }
        }
        Ok(ComplexFile { dimension, vertices, top_simplices, orientation_signs: Some(signs) })
    }
}

/// Signed sum of top simplices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FundamentalCycle {
    /// Coefficient of each top simplex, in the complex's top-simplex order.
    pub coeffs: Vec<i64>,
}

#[derive(Debug)]
pub struct OrientedComplex {
    n: usize,
    vertex_ids: Vec<i64>,
    /// simplices[k] = sorted list of increasing (k+1)-tuples of vertex positions.
    simplices: Vec<Vec<Vec<usize>>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
    /// Orientation sign of each top simplex relative to increasing order.
    top_signs: Vec<i64>,
    boundary: Option<Box<OrientedComplex>>,
    /// For each boundary k-simplex, its index among the k-simplices of this complex.
    boundary_embedding: Vec<Vec<usize>>,
    description: ComplexFile,
    cochains: OnceLock<CochainComplex>,
}

impl Clone for OrientedComplex {
    fn clone(&self) -> Self {
        OrientedComplex::load(self.description.clone()).expect("a loaded complex reloads")
    }
}

fn perm_sign(seq: &[usize]) -> i64 {
    let mut s = 1;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                s = -s;
            }
        }
    }
    s
}

fn combinations(set: &[usize], k: usize, out: &mut Vec<Vec<usize>>) {
    fn rec(set: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..set.len() {
            cur.push(set[i]);
            rec(set, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(set, k, 0, &mut Vec::new(), out);
}

impl OrientedComplex {
    pub fn from_json(text: &str) -> Result<Self, ComplexFileError> {
        let f: ComplexFile = serde_json::from_str(text).map_err(|e| ComplexFileError::Parse(e.to_string()))?;
        Self::load(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.description).expect("complex descriptions serialize")
    }

    pub fn description(&self) -> &ComplexFile {
        &self.description
    }

    /// Validates a description and derives all faces and the oriented boundary.
    pub fn load(f: ComplexFile) -> Result<Self, ComplexFileError> {
        let n = f.dimension;
        let mut pos_of: HashMap<i64, usize> = HashMap::new();
        for (i, &v) in f.vertices.iter().enumerate() {
            if pos_of.insert(v, i).is_some() {
                return Err(ComplexFileError::DuplicateVertex(v));
            }
        }
        let signs = match &f.orientation_signs {
            Some(s) => {
                if s.len() != f.top_simplices.len() || s.iter().any(|&x| x != 1 && x != -1) {
                    return Err(ComplexFileError::BadSigns);
                }
                s.clone()
            }
            None => vec![1; f.top_simplices.len()],
        };
        let mut tops: Vec<(Vec<usize>, i64)> = Vec::new();
        let mut seen = HashMap::new();
        for (t, &sg) in f.top_simplices.iter().zip(&signs) {
            if t.len() != n + 1 {
                return Err(ComplexFileError::WrongArity(t.clone(), n + 1));
            }
            let mut p = Vec::with_capacity(t.len());
            for v in t {
                p.push(*pos_of.get(v).ok_or(ComplexFileError::UnknownVertex(*v))?);
            }
            let eps = sg * perm_sign(&p);
            let mut sorted = p.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) || seen.insert(sorted.clone(), ()).is_some() {
                return Err(ComplexFileError::DuplicateSimplex(t.clone()));
            }
            tops.push((sorted, eps));
        }
        let ids = |s: &[usize]| s.iter().map(|&i| f.vertices[i]).collect::<Vec<_>>();

        // Boundary faces with induced orientation.
        let mut face_coeff: BTreeMap<Vec<usize>, (i64, usize)> = BTreeMap::new();
        if n >= 1 {
            for (t, eps) in &tops {
                for i in 0..=n {
                    let mut face = t.clone();
                    face.remove(i);
                    let sgn = if i % 2 == 0 { *eps } else { -*eps };
                    let e = face_coeff.entry(face).or_insert((0, 0));
                    e.0 += sgn;
                    e.1 += 1;
                }
            }
        }
        let mut bd_tops: Vec<(Vec<usize>, i64)> = Vec::new();
        for (face, (coef, count)) in &face_coeff {
            if *count >= 3 {
                return Err(ComplexFileError::NonManifoldFace(ids(face)));
            }
            if *count == 2 && *coef != 0 {
                return Err(ComplexFileError::IncoherentOrientation(ids(face)));
            }
            if *count == 1 {
                bd_tops.push((face.clone(), *coef));
            }
        }

        let mut simplices: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n + 1];
        {
            let mut sets: Vec<std::collections::BTreeSet<Vec<usize>>> = vec![Default::default(); n + 1];
            // Isolated declared vertices count as 0-simplices only in dimension 0.
            for (t, _) in &tops {
                for k in 0..=n {
                    let mut out = Vec::new();
                    combinations(t, k + 1, &mut out);
                    sets[k].extend(out);
                }
            }
            for k in 0..=n {
                simplices[k] = sets[k].iter().cloned().collect();
            }
        }
        let index: Vec<HashMap<Vec<usize>, usize>> =
            simplices.iter().map(|l| l.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect()).collect();
        let mut top_signs = vec![0; simplices[n].len()];
        for (t, eps) in &tops {
            top_signs[index[n][t]] = *eps;
        }

        let (boundary, boundary_embedding) = if bd_tops.is_empty() {
            (None, Vec::new())
        } else {
            let used: std::collections::BTreeSet<usize> = bd_tops.iter().flat_map(|(t, _)| t.iter().copied()).collect();
            let bverts: Vec<usize> = used.into_iter().collect();
            let bfile = ComplexFile {
                dimension: n - 1,
                vertices: bverts.iter().map(|&i| f.vertices[i]).collect(),
                top_simplices: bd_tops.iter().map(|(t, _)| ids(t)).collect(),
                orientation_signs: Some(bd_tops.iter().map(|(_, c)| *c).collect()),
            };
            let b = OrientedComplex::load(bfile)?;
            // Boundary vertex positions are increasing in the parent order, so sorted
            // tuples map to sorted tuples.
            let emb: Vec<Vec<usize>> = b
                .simplices
                .iter()
                .enumerate()
                .map(|(k, l)| l.iter().map(|s| index[k][&s.iter().map(|&i| bverts[i]).collect::<Vec<_>>()]).collect())
                .collect();
            (Some(Box::new(b)), emb)
        };

        Ok(OrientedComplex {
            n,
            vertex_ids: f.vertices.clone(),
            simplices,
            index,
            top_signs,
            boundary,
            boundary_embedding,
            description: f,
            cochains: OnceLock::new(),
        })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn vertex_ids(&self) -> &[i64] {
        &self.vertex_ids
    }

    /// Vertex ids of the vertices that appear in some top simplex, in global order.
    pub fn used_vertex_ids(&self) -> Vec<i64> {
        self.simplices[0].iter().map(|s| self.vertex_ids[s[0]]).collect()
    }

    pub fn count(&self, k: usize) -> usize {
        if k > self.n {
            0
        } else {
            self.simplices[k].len()
        }
    }

    pub fn counts(&self) -> Vec<usize> {
        (0..=self.n).map(|k| self.count(k)).collect()
    }

    pub fn simplex(&self, k: usize, i: usize) -> &[usize] {
        &self.simplices[k][i]
    }

    /// Vertex ids of the i-th k-simplex.
    pub fn simplex_ids(&self, k: usize, i: usize) -> Vec<i64> {
        self.simplices[k][i].iter().map(|&p| self.vertex_ids[p]).collect()
    }

    /// Index of the simplex with the given vertex ids, in any order.
    pub fn find_simplex(&self, ids: &[i64]) -> Option<usize> {
        let k = ids.len().checked_sub(1)?;
        if k > self.n {
            return None;
        }
        let mut pos: Vec<usize> = ids.iter().map(|id| self.vertex_ids.iter().position(|v| v == id)).collect::<Option<_>>()?;
        pos.sort_unstable();
        self.index[k].get(&pos).copied()
    }

    pub fn top_signs(&self) -> &[i64] {
        &self.top_signs
    }

    pub fn is_closed(&self) -> bool {
        self.boundary.is_none()
    }

    pub fn boundary(&self) -> Option<&OrientedComplex> {
        self.boundary.as_deref()
    }

    /// Parent indices of the boundary k-simplices, in boundary order.
    pub fn boundary_simplices(&self, k: usize) -> &[usize] {
        if self.boundary.is_none() || k >= self.n {
            &[]
        } else {
            &self.boundary_embedding[k]
        }
    }

    /// Indices of k-simplices not on the boundary, ascending.
    pub fn interior_simplices(&self, k: usize) -> Vec<usize> {
        let bd: std::collections::BTreeSet<usize> = self.boundary_simplices(k).iter().copied().collect();
        (0..self.count(k)).filter(|i| !bd.contains(i)).collect()
    }

    pub fn fundamental_cycle(&self) -> FundamentalCycle {
        FundamentalCycle { coeffs: self.top_signs.clone() }
    }

    /// Boundary of a chain of top simplices, as coefficients on (n−1)-simplices.
    pub fn chain_boundary(&self, coeffs: &[i64]) -> Vec<i64> {
        let mut out = vec![0; self.count(self.n.saturating_sub(1))];
        if self.n == 0 {
            return out;
        }
        for (t, c) in coeffs.iter().enumerate() {
            for i in 0..=self.n {
                let f = self.face_index(self.n, t, i);
                out[f] += if i % 2 == 0 { *c } else { -*c };
            }
        }
        out
    }

    /// Whether ∂[N] equals the fundamental cycle of the boundary, pushed into the
    /// (n−1)-chains of N.
    pub fn stokes_holds(&self) -> bool {
        if self.n == 0 {
            return self.boundary.is_none();
        }
        let mut expected = vec![0; self.count(self.n - 1)];
        if let Some(bd) = &self.boundary {
            for (i, s) in bd.top_signs.iter().enumerate() {
                expected[self.boundary_embedding[self.n - 1][i]] += s;
            }
        }
        self.chain_boundary(&self.top_signs) == expected
    }

    /// Index of the face of the i-th k-simplex obtained by deleting position j.
    pub fn face_index(&self, k: usize, i: usize, j: usize) -> usize {
        let mut f = self.simplices[k][i].clone();
        f.remove(j);
        self.index[k - 1][&f]
    }

    /// Coboundary d_k: C^k → C^{k+1}, (dc)(τ) = Σ_i (−1)^i c(∂_i τ).
    pub fn coboundary_matrix(&self, k: usize) -> RatMatrix {
        let mut m = RatMatrix::zeros(self.count(k + 1), self.count(k));
        if k >= self.n {
            return m;
        }
        for t in 0..self.count(k + 1) {
            for j in 0..=k + 1 {
                let f = self.face_index(k + 1, t, j);
                m.add_to(t, f, &rat(if j % 2 == 0 { 1 } else { -1 }));
            }
        }
        m
    }

    /// The simplicial cochain complex, computed once and cached.
    pub fn cochains(&self) -> &CochainComplex {
        self.cochains.get_or_init(|| {
            let dims = self.counts();
            let d = (0..self.n).map(|k| self.coboundary_matrix(k)).collect();
            CochainComplex::new(0, dims, d).expect("simplicial coboundary squares to zero")
        })
    }

    /// Alexander-Whitney cup product of a k-cochain and an l-cochain. Beyond the top
    /// degree the result is the (empty) zero cochain.
    pub fn cup(&self, a: &[Rat], k: usize, b: &[Rat], l: usize) -> Vec<Rat> {
        assert_eq!(a.len(), self.count(k));
        assert_eq!(b.len(), self.count(l));
        if k + l > self.n {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(self.count(k + l));
        for s in &self.simplices[k + l] {
            let fa = &a[self.index[k][&s[..=k].to_vec()]];
            if fa.is_zero() {
                out.push(Rat::zero());
                continue;
            }
            let fb = &b[self.index[l][&s[k..].to_vec()]];
            out.push(fa * fb);
        }
        out
    }

    /// ∫ of a top-degree cochain against a fundamental cycle.
    pub fn evaluate(&self, a: &[Rat], fc: &FundamentalCycle) -> Rat {
        assert_eq!(a.len(), fc.coeffs.len());
        let mut s = Rat::zero();
        for (x, c) in a.iter().zip(&fc.coeffs) {
            s += x * rat(*c);
        }
        s
    }

    pub fn integrate(&self, a: &[Rat]) -> Rat {
        self.evaluate(a, &self.fundamental_cycle())
    }

    /// Matrix of (σ, τ) ↦ ∫ e_σ ∪ e_τ for σ of degree k and τ of degree n − k.
    pub fn cup_pairing_matrix(&self, k: usize) -> RatMatrix {
        assert!(k <= self.n);
        let mut m = RatMatrix::zeros(self.count(k), self.count(self.n - k));
        for (t, s) in self.simplices[self.n].iter().enumerate() {
            let i = self.index[k][&s[..=k].to_vec()];
            let j = self.index[self.n - k][&s[k..].to_vec()];
            m.add_to(i, j, &rat(self.top_signs[t]));
        }
        m
    }

    /// Restriction C^k(N) → C^k(∂N).
    pub fn restriction_matrix(&self, k: usize) -> RatMatrix {
        let bd = self.boundary_simplices(k);
        let mut m = RatMatrix::zeros(bd.len(), self.count(k));
        for (r, &c) in bd.iter().enumerate() {
            m.set(r, c, Rat::one());
        }
        m
    }

    /// The relative complex, its inclusion into the absolute complex and the restriction
    /// onto the boundary complex.
    pub fn relative_complex(&self) -> RelativePair {
        let abs = self.cochains().clone();
        let interior: Vec<Vec<usize>> = (0..=self.n).map(|k| self.interior_simplices(k)).collect();
        let rel_dims: Vec<usize> = interior.iter().map(|v| v.len()).collect();
        let rel_d: Vec<RatMatrix> = (0..self.n).map(|k| abs.d(k as i32).select(&interior[k + 1], &interior[k])).collect();
        let rel = CochainComplex::new(0, rel_dims, rel_d).expect("relative cochains form a subcomplex");
        let bdry = match self.boundary() {
            Some(b) => {
                let mut c = b.cochains().clone();
                if b.n + 1 < self.n + 1 {
                    // Pad the boundary complex with a zero top degree so degrees line up.
                    let mut dims: Vec<usize> = (0..=b.n).map(|k| b.count(k)).collect();
                    dims.push(0);
                    let mut ds: Vec<RatMatrix> = (0..b.n).map(|k| b.coboundary_matrix(k)).collect();
                    ds.push(RatMatrix::zeros(0, b.count(b.n)));
                    c = CochainComplex::new(0, dims, ds).expect("padded boundary complex");
                }
                c
            }
            None => CochainComplex::new(0, vec![0; self.n + 1], (0..self.n).map(|_| RatMatrix::zeros(0, 0)).collect())
                .expect("zero complex"),
        };
        let inc_blocks: Vec<(i32, RatMatrix)> = (0..=self.n)
            .map(|k| {
                let mut m = RatMatrix::zeros(self.count(k), interior[k].len());
                for (j, &i) in interior[k].iter().enumerate() {
                    m.set(i, j, Rat::one());
                }
                (k as i32, m)
            })
            .collect();
        let res_blocks: Vec<(i32, RatMatrix)> = (0..=self.n).map(|k| (k as i32, self.restriction_matrix(k))).collect();
        let inclusion = ChainMap::new(rel.clone(), abs.clone(), inc_blocks).expect("inclusion is a chain map");
        let restriction = ChainMap::new(abs.clone(), bdry.clone(), res_blocks).expect("restriction is a chain map");
        RelativePair { relative: rel, absolute: abs, boundary: bdry, inclusion, restriction, interior }
    }

    /// Pairing H^k × H^{n−k} → ℚ by ∫ a ∪ b on stored representatives. With
    /// `relative_left` the left factor is H^k(N,∂N) and the right H^{n−k}(N); otherwise
    /// the left is absolute and the right relative. On closed complexes both are
    /// absolute.
    pub fn pairing_on_cohomology(&self, relative_left: bool, k: usize) -> CohomologyPairing {
        assert!(k <= self.n);
        let l = self.n - k;
        let rp = self.relative_complex();
        let (hl, hr) = if relative_left {
            (rp.relative.cohomology(k as i32), rp.absolute.cohomology(l as i32))
        } else {
            (rp.absolute.cohomology(k as i32), rp.relative.cohomology(l as i32))
        };
        let embed_l = if relative_left { rp.inclusion.block(k as i32) } else { RatMatrix::identity(self.count(k)) };
        let embed_r = if relative_left { RatMatrix::identity(self.count(l)) } else { rp.inclusion.block(l as i32) };
        let p = self.cup_pairing_matrix(k);
        let lm = embed_l.mul(&hl.rep_matrix());
        let rm = embed_r.mul(&hr.rep_matrix());
        let m = lm.transpose().mul(&p).mul(&rm);
        let symmetry = if (k * l) % 2 == 0 { Symmetry::GradedSymmetric } else { Symmetry::GradedAntisymmetric };
        CohomologyPairing { form: PairingForm::new(m, symmetry), left: hl, right: hr, embed_left: embed_l, embed_right: embed_r, degree: k }
    }
}

/// 0 → C(N,∂N) → C(N) → C(∂N) → 0.
#[derive(Clone, Debug)]
pub struct RelativePair {
    pub relative: CochainComplex,
    pub absolute: CochainComplex,
    pub boundary: CochainComplex,
    pub inclusion: ChainMap,
    pub restriction: ChainMap,
    /// Interior simplex indices per degree (the basis of the relative complex).
    pub interior: Vec<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct CohomologyPairing {
    pub form: PairingForm,
    pub left: Cohomology,
    pub right: Cohomology,
    embed_left: RatMatrix,
    embed_right: RatMatrix,
    degree: usize,
}

impl CohomologyPairing {
    /// Recomputes the matrix after adding d(·) of every basis cochain to every
    /// representative, and compares.
    pub fn is_well_defined(&self, c: &OrientedComplex, complex_left: &CochainComplex, complex_right: &CochainComplex) -> bool {
        let k = self.degree;
        let l = c.n - k;
        let perturb = |h: &Cohomology, cx: &CochainComplex, deg: usize| -> RatMatrix {
            let dprev = cx.d(deg as i32 - 1);
            let mut cols = Vec::new();
            for r in h.representatives() {
                let mut v = r.clone();
                for j in 0..dprev.cols() {
                    let col = dprev.column(j);
                    v = crate::linalg::vec_add(&v, &crate::linalg::vec_scale(&col, &rat(j as i64 + 1)));
                }
                cols.push(v);
            }
            RatMatrix::from_columns(h.ambient, &cols)
        };
        let lm = self.embed_left.mul(&perturb(&self.left, complex_left, k));
        let rm = self.embed_right.mul(&perturb(&self.right, complex_right, l));
        let m = lm.transpose().mul(&c.cup_pairing_matrix(k)).mul(&rm);
        m == self.form.matrix
    }
}
