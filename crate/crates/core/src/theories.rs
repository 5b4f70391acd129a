//! Linear field theories on oriented simplicial complexes.
//!
//! Each builder produces a [`LinearTheory`]: a bulk field space and a boundary field
//! space (both sums of shifted pieces), the linearized cohomological vector field on
//! each, the restriction map, and the two pairings. Fields are vectors in the bulk
//! basis and the matrix `q` acts on them; it sends slot ghost g to g − 1.
//!
//! Two pairing models are used. In the cup model (abelian BF and CS) fields and
//! antifields are cochains and the pairings are cup products evaluated on the
//! fundamental cycle; at codimension k the form-degree-j block carries the sign
//! s(j + k) with s(j) = (−1)^{j(j+1)/2}. In the cotangent model (scalar field and
//! electrodynamics) antifields are dual to fields, interior simplices only when the
//! complex has boundary, and the pairing is the canonical one; the boundary fields
//! are the field values and the discrete normal fluxes on the boundary.
//!
//! For BF, scalar and electrodynamics the theory also carries its polynomial data:
//! the action, the symplectic form and the vector field as graded polynomials over
//! the field coordinates and their differentials. [`verify_cme`] checks the modified
//! master equation and its consequences on that data.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complexes::{les_of_short_exact, verify_ghost_grading, ComplexError, ShiftedSum, Summand};
use crate::linalg::{fmt_rat, parse_rat, rat, ratio, Rat, RatMatrix};
use crate::simplicial::OrientedComplex;
use crate::symbolic::{GradedAlgebra, GradedPoly};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TheoryError {
    #[error("{kind} needs {expected}, but the complex has dimension {found}")]
    WrongDimension { kind: String, expected: String, found: usize },
    #[error(
        "the boundary restriction has rank {rank} but the boundary field space has dimension {dim}; \
         refine the triangulation so that no edge joins two boundary vertices"
    )]
    RestrictionNotSurjective { rank: usize, dim: usize },
    #[error("{0} has no cochain-level polynomial data")]
    NoPolynomialData(String),
    #[error("sign convention mismatch in {identity}: residual {block}")]
    SignConventionMismatch { identity: String, block: String },
    #[error("bad theory configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TheoryKind {
    AbelianBf { n: usize },
    AbelianCs,
    Scalar { mass: Rat },
    Electrodynamics,
}

impl TheoryKind {
    pub fn label(&self) -> String {
        match self {
            TheoryKind::AbelianBf { n } => format!("abelian_bf(n={n})"),
            TheoryKind::AbelianCs => "abelian_cs".to_string(),
            TheoryKind::Scalar { mass } => format!("scalar(m={})", fmt_rat(mass)),
            TheoryKind::Electrodynamics => "electrodynamics".to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairingModel {
    Cup,
    Cotangent,
}

/// How the constants in the master-equation identities are normalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// Spacetime level: ι_Q ω = (−1)ⁿ δS + π*α and ω_∂ = (−1)ⁿ⁻¹ δα.
    Bulk { n: usize },
    /// Higher strata: ι_Q ω = δS + π*α and ω_∂ = δα.
    Stratum,
}

impl Normalization {
    fn action_sign(&self) -> Rat {
        match self {
            Normalization::Bulk { n } => parity_sign(*n as i64),
            Normalization::Stratum => rat(1),
        }
    }

    fn exact_sign(&self) -> Rat {
        match self {
            Normalization::Bulk { n } => parity_sign(*n as i64 + 1),
            Normalization::Stratum => rat(1),
        }
    }
}

fn parity_sign(e: i64) -> Rat {
    if e.rem_euclid(2) == 0 {
        rat(1)
    } else {
        rat(-1)
    }
}

/// s(j) = (−1)^{j(j+1)/2}.
pub fn cup_sign(j: usize) -> Rat {
    parity_sign((j * (j + 1) / 2) as i64)
}

/// Field-theory data as graded polynomials. Variable degrees are ghost numbers; each
/// field coordinate has a differential partner of degree one higher.
#[derive(Clone, Debug)]
pub struct PolyData {
    pub alg: GradedAlgebra,
    /// Variable of each bulk basis position, and its differential.
    pub bulk_vars: Vec<usize>,
    pub bulk_d: Vec<usize>,
    pub bdry_vars: Vec<usize>,
    pub bdry_d: Vec<usize>,
    pub omega: GradedPoly,
    pub action: GradedPoly,
    pub alpha: GradedPoly,
    pub omega_bdry: GradedPoly,
    pub action_bdry: GradedPoly,
    pub q: BTreeMap<usize, GradedPoly>,
    pub q_bdry: BTreeMap<usize, GradedPoly>,
    /// Boundary coordinates and their differentials as functions of bulk ones.
    pub pullback: BTreeMap<usize, GradedPoly>,
    pub normalization: Normalization,
}

impl PolyData {
    fn delta_images(&self, vars: &[usize], ds: &[usize]) -> BTreeMap<usize, GradedPoly> {
        vars.iter().zip(ds).map(|(&x, &dx)| (x, GradedPoly::var(dx))).collect()
    }

    fn contraction_images(&self, vars: &[usize], ds: &[usize], q: &BTreeMap<usize, GradedPoly>) -> BTreeMap<usize, GradedPoly> {
        vars.iter().zip(ds).filter_map(|(x, &dx)| q.get(x).map(|p| (dx, p.clone()))).collect()
    }

    fn pull(&self, p: &GradedPoly) -> GradedPoly {
        if p.is_zero() {
            return GradedPoly::zero();
        }
        self.alg.substitute(p, &self.pullback, &self.alg)
    }

    /// Matrix of a linear map given by images of `rows` variables in terms of `cols`.
    fn linear_matrix(&self, rows: &[usize], cols: &[usize], images: &BTreeMap<usize, GradedPoly>) -> RatMatrix {
        let col_of: HashMap<usize, usize> = cols.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut m = RatMatrix::zeros(rows.len(), cols.len());
        for (r, x) in rows.iter().enumerate() {
            if let Some(p) = images.get(x) {
                for (mono, c) in p.terms() {
                    assert_eq!(mono.len(), 1, "linear theories have linear vector fields");
                    m.add_to(r, col_of[&(mono[0] as usize)], c);
                }
            }
        }
        m
    }
}

#[derive(Clone, Debug)]
pub struct LinearTheory {
    pub name: String,
    pub kind: TheoryKind,
    pub model: PairingModel,
    /// Spacetime dimension.
    pub n: usize,
    /// Codimension of the stratum the fields live on.
    pub codim: usize,
    pub complex: OrientedComplex,
    pub bulk: ShiftedSum,
    pub boundary: ShiftedSum,
    pub q: RatMatrix,
    pub q_bdry: RatMatrix,
    pub pi: RatMatrix,
    /// ω(ξ, η) = ξᵀ W η on bulk field vectors.
    pub omega: RatMatrix,
    pub omega_bdry: RatMatrix,
    /// Ghost number of the bulk pairing; the boundary pairing has one more.
    pub omega_ghost: i32,
    pub poly: Option<PolyData>,
}

/// Outcome of the structural checks every built theory must pass.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StructureReport {
    pub q_squares_to_zero: bool,
    pub q_bdry_squares_to_zero: bool,
    pub projectable: bool,
    pub ghost_grading: bool,
    pub restriction_surjective: bool,
    /// Q̂ᵀW ± WQ̂ = ΠᵀW_∂Π, the sign being (−1)^{gh ω}.
    pub quasi_symplectic: bool,
    /// The boundary pairing is Q̂_∂-invariant.
    pub boundary_invariant: bool,
}

impl StructureReport {
    pub fn all_hold(&self) -> bool {
        self.q_squares_to_zero
            && self.q_bdry_squares_to_zero
            && self.projectable
            && self.ghost_grading
            && self.restriction_surjective
            && self.quasi_symplectic
            && self.boundary_invariant
    }
}

impl LinearTheory {
    pub fn is_closed(&self) -> bool {
        self.boundary.dim() == 0
    }

    /// Q̂ᵀW + (−1)^{gh ω} W Q̂ − ΠᵀW_∂Π.
    pub fn quasi_symplectic_residual(&self) -> RatMatrix {
        let sign = parity_sign(self.omega_ghost as i64);
        let lhs = self.q.transpose().mul(&self.omega).add(&self.omega.mul(&self.q).scale(&sign));
        lhs.sub(&self.pi.transpose().mul(&self.omega_bdry).mul(&self.pi))
    }

    pub fn structure(&self) -> StructureReport {
        let ghost_grading = verify_ghost_grading(&self.bulk, &self.q, Some((&self.omega, self.omega_ghost))).is_ok()
            && verify_ghost_grading(&self.boundary, &self.q_bdry, Some((&self.omega_bdry, self.omega_ghost + 1))).is_ok()
            && self.pi.entries().all(|(r, c, _)| self.boundary.ghost(r) == self.bulk.ghost(c));
        let bsign = parity_sign(self.omega_ghost as i64 + 1);
        let binv = self.q_bdry.transpose().mul(&self.omega_bdry).add(&self.omega_bdry.mul(&self.q_bdry).scale(&bsign));
        StructureReport {
            q_squares_to_zero: self.q.mul(&self.q).is_zero(),
            q_bdry_squares_to_zero: self.q_bdry.mul(&self.q_bdry).is_zero(),
            projectable: self.pi.mul(&self.q) == self.q_bdry.mul(&self.pi),
            ghost_grading,
            restriction_surjective: self.pi.rank() == self.boundary.dim(),
            quasi_symplectic: self.quasi_symplectic_residual().is_zero(),
            boundary_invariant: binv.is_zero(),
        }
    }

    /// Bulk field dimensions per ghost number.
    pub fn field_dims(&self) -> BTreeMap<i32, usize> {
        ghost_dims(&self.bulk)
    }

    pub fn boundary_field_dims(&self) -> BTreeMap<i32, usize> {
        ghost_dims(&self.boundary)
    }

    /// The simplex carrying each bulk coordinate.
    pub fn field_sites(&self) -> Vec<Site> {
        self.sites(&self.bulk, false)
    }

    /// The boundary simplex carrying each boundary coordinate.
    pub fn boundary_sites(&self) -> Vec<Site> {
        self.sites(&self.boundary, true)
    }

    fn sites(&self, space: &ShiftedSum, on_boundary: bool) -> Vec<Site> {
        let c = &self.complex;
        let mut out = vec![Site { sector: String::new(), simplex: Vec::new(), flux: false }; space.dim()];
        for (s, summand) in space.summands.iter().enumerate() {
            let simplices: Vec<Vec<i64>> = match self.model {
                PairingModel::Cup => {
                    let host = if on_boundary { c.boundary() } else { Some(c) };
                    let Some(host) = host else { continue };
                    for k in 0..summand.form_dims.len() {
                        for i in 0..summand.form_dims[k] {
                            out[space.pos(s, k, i)] =
                                Site { sector: summand.name.clone(), simplex: host.simplex_ids(k, i), flux: false };
                        }
                    }
                    continue;
                }
                PairingModel::Cotangent => {
                    let (k, support, _) = cotangent_support(&summand.name);
                    let parents: Vec<usize> = match support {
                        Support::All => (0..c.count(k)).collect(),
                        Support::Interior => c.interior_simplices(k),
                        Support::Boundary => c.boundary_simplices(k).to_vec(),
                    };
                    parents.iter().map(|&p| c.simplex_ids(k, p)).collect()
                }
            };
            let flux = cotangent_support(&summand.name).2;
            for (i, simplex) in simplices.into_iter().enumerate() {
                out[space.pos(s, 0, i)] = Site { sector: summand.name.clone(), simplex, flux };
            }
        }
        out
    }
}

/// Where one coordinate of a field space lives: its sector and the vertex ids of its
/// simplex. Flux coordinates change sign when the orientation of their boundary flips.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Site {
    pub sector: String,
    pub simplex: Vec<i64>,
    pub flux: bool,
}

enum Support {
    All,
    Interior,
    Boundary,
}

/// Form degree, support and flux flag of each cotangent-model sector.
fn cotangent_support(name: &str) -> (usize, Support, bool) {
    match name {
        "phi" | "c" => (0, Support::All, false),
        "p" | "p_dag" | "A" => (1, Support::All, false),
        "B" | "B_dag" => (2, Support::All, false),
        "phi_dag" | "c_dag" => (0, Support::Interior, false),
        "A_dag" => (1, Support::Interior, false),
        "y_phi" | "y_c" => (0, Support::Boundary, false),
        "y_p" | "y_A_dag" => (0, Support::Boundary, true),
        "y_A" => (1, Support::Boundary, false),
        "y_B" => (1, Support::Boundary, true),
        other => unreachable!("unknown cotangent sector {other}"),
    }
}

pub fn ghost_dims(space: &ShiftedSum) -> BTreeMap<i32, usize> {
    let mut out = BTreeMap::new();
    for g in space.ghosts() {
        out.insert(g, space.positions_of_ghost(g).len());
    }
    out
}

// ---------------------------------------------------------------------------------
// Cup model

fn cup_sectors(c: &OrientedComplex, names: &[(&str, i32)]) -> Result<ShiftedSum, TheoryError> {
    let dims = c.counts();
    Ok(ShiftedSum::new(
        names.iter().map(|(nm, s)| Summand { name: nm.to_string(), form_dims: dims.clone(), shift: *s }).collect(),
    )?)
}

fn empty_like(names: &[(&str, i32)]) -> Result<ShiftedSum, TheoryError> {
    Ok(ShiftedSum::new(names.iter().map(|(nm, s)| Summand { name: nm.to_string(), form_dims: vec![], shift: *s }).collect())?)
}

/// Block-diagonal coboundary on every sector of a cup-model space.
fn coboundary_operator(c: &OrientedComplex, space: &ShiftedSum) -> RatMatrix {
    let mut q = RatMatrix::zeros(space.dim(), space.dim());
    for s in 0..space.summands.len() {
        for k in 0..c.dimension() {
            let d = c.coboundary_matrix(k);
            let (rows, cols) = (space.block(s, k + 1), space.block(s, k));
            for (r, col, v) in d.entries() {
                q.set(rows.start + r, cols.start + col, v.clone());
            }
        }
    }
    q
}

/// Σ_j sign(j) ∫ ξ_{left}^j ∪ η_{right}^{m−j} for each (left, right) sector pair.
fn cup_pairing(c: &OrientedComplex, space: &ShiftedSum, pairs: &[(usize, usize)], sign: impl Fn(usize) -> Rat) -> RatMatrix {
    let m = c.dimension();
    let mut w = RatMatrix::zeros(space.dim(), space.dim());
    for j in 0..=m {
        let p = c.cup_pairing_matrix(j);
        let s = sign(j);
        for &(l, r) in pairs {
            let (lb, rb) = (space.block(l, j).start, space.block(r, m - j).start);
            for (i, k, v) in p.entries() {
                w.add_to(lb + i, rb + k, &(v * &s));
            }
        }
    }
    w
}

/// Restriction of every sector onto the boundary complex.
fn cup_restriction(c: &OrientedComplex, bulk: &ShiftedSum, bdry: &ShiftedSum) -> RatMatrix {
    let mut pi = RatMatrix::zeros(bdry.dim(), bulk.dim());
    if let Some(b) = c.boundary() {
        for s in 0..bulk.summands.len() {
            for k in 0..=b.dimension() {
                for (i, &parent) in c.boundary_simplices(k).iter().enumerate() {
                    pi.set(bdry.pos(s, k, i), bulk.pos(s, k, parent), Rat::one());
                }
            }
        }
    }
    pi
}

struct CupParts {
    bulk: ShiftedSum,
    boundary: ShiftedSum,
    q: RatMatrix,
    q_bdry: RatMatrix,
    pi: RatMatrix,
    omega: RatMatrix,
    omega_bdry: RatMatrix,
}

fn cup_parts(c: &OrientedComplex, sectors: &[(&str, i32)], pairs: &[(usize, usize)], codim: usize) -> Result<CupParts, TheoryError> {
    let bulk = cup_sectors(c, sectors)?;
    let q = coboundary_operator(c, &bulk);
    let omega = cup_pairing(c, &bulk, pairs, |j| cup_sign(j + codim));
    let (boundary, q_bdry, omega_bdry) = match c.boundary() {
        Some(b) => {
            let bs = cup_sectors(b, sectors)?;
            let qb = coboundary_operator(b, &bs);
            let wb = cup_pairing(b, &bs, pairs, |j| cup_sign(j + codim + 1));
            (bs, qb, wb)
        }
        None => (empty_like(sectors)?, RatMatrix::zeros(0, 0), RatMatrix::zeros(0, 0)),
    };
    let pi = cup_restriction(c, &bulk, &boundary);
    Ok(CupParts { bulk, boundary, q, q_bdry, pi, omega, omega_bdry })
}

/// Abelian BF theory in dimension n = dim c: fields Ω•[1] ⊕ Ω•[n−2].
pub fn build_abelian_bf(c: &OrientedComplex) -> Result<LinearTheory, TheoryError> {
    bf_theory(c, c.dimension(), 0)
}

fn bf_theory(c: &OrientedComplex, n: usize, codim: usize) -> Result<LinearTheory, TheoryError> {
    let sectors = [("A", 1), ("B", n as i32 - 2)];
    let parts = cup_parts(c, &sectors, &[(0, 1), (1, 0)], codim)?;
    let normalization = if codim == 0 { Normalization::Bulk { n } } else { Normalization::Stratum };
    let poly = bf_poly(c, n, &parts.bulk, &parts.boundary, normalization);
    let t = LinearTheory {
        name: format!("abelian BF, n={n}, codim {codim}"),
        kind: TheoryKind::AbelianBf { n },
        model: PairingModel::Cup,
        n,
        codim,
        complex: c.clone(),
        bulk: parts.bulk,
        boundary: parts.boundary,
        q: parts.q,
        q_bdry: parts.q_bdry,
        pi: parts.pi,
        omega: parts.omega,
        omega_bdry: parts.omega_bdry,
        omega_ghost: codim as i32 - 1,
        poly: Some(poly),
    };
    debug_assert_eq!(poly_q_matrix(&t), Some(t.q.clone()));
    Ok(t)
}

/// Abelian Chern-Simons theory on a 3-complex: fields Ω•[1]. Its pairings are only
/// asserted on cohomology, where the cup pairing is graded symmetric.
pub fn build_abelian_cs(c: &OrientedComplex) -> Result<LinearTheory, TheoryError> {
    cs_theory(c, 0)
}

fn cs_theory(c: &OrientedComplex, codim: usize) -> Result<LinearTheory, TheoryError> {
    let expected = 3 - codim;
    if c.dimension() != expected {
        return Err(TheoryError::WrongDimension {
            kind: "abelian Chern-Simons".into(),
            expected: format!("dimension {expected} at codimension {codim}"),
            found: c.dimension(),
        });
    }
    let parts = cup_parts(c, &[("A", 1)], &[(0, 0)], codim)?;
    Ok(LinearTheory {
        name: format!("abelian CS, codim {codim}"),
        kind: TheoryKind::AbelianCs,
        model: PairingModel::Cup,
        n: 3,
        codim,
        complex: c.clone(),
        bulk: parts.bulk,
        boundary: parts.boundary,
        q: parts.q,
        q_bdry: parts.q_bdry,
        pi: parts.pi,
        omega: parts.omega,
        omega_bdry: parts.omega_bdry,
        omega_ghost: codim as i32 - 1,
        poly: None,
    })
}

/// Σ_{σ,τ} P_k[σ, τ] L[σ] R[τ] with P_k the cup pairing matrix in degree k.
fn cup_poly(alg: &GradedAlgebra, c: &OrientedComplex, k: usize, left: &[GradedPoly], right: &[GradedPoly], coef: &Rat) -> GradedPoly {
    let mut out = GradedPoly::zero();
    for (i, j, v) in c.cup_pairing_matrix(k).entries() {
        if left[i].is_zero() || right[j].is_zero() {
            continue;
        }
        out.add_assign(&alg.mul(&left[i], &right[j]).scale(&(v * coef)));
    }
    out
}

/// d applied to a cochain of variables: component list in degree k + 1.
fn d_poly(c: &OrientedComplex, k: usize, x: &[usize]) -> Vec<GradedPoly> {
    let mut out = vec![GradedPoly::zero(); c.count(k + 1)];
    for (r, col, v) in c.coboundary_matrix(k).entries() {
        out[r].add_assign(&GradedPoly::var_scaled(x[col], v.clone()));
    }
    out
}

fn vars_of(x: &[usize]) -> Vec<GradedPoly> {
    x.iter().map(|&v| GradedPoly::var(v)).collect()
}

/// Per-degree variables for one cup-model sector.
struct SectorVars {
    x: Vec<Vec<usize>>,
    dx: Vec<Vec<usize>>,
}

fn sector_vars(alg: &mut GradedAlgebra, c: &OrientedComplex, name: &str, shift: i32) -> SectorVars {
    let mut x = Vec::new();
    let mut dx = Vec::new();
    for k in 0..=c.dimension() {
        let g = shift - k as i32;
        x.push((0..c.count(k)).map(|i| alg.var(&format!("{name}{k}_{i}"), g)).collect());
        dx.push((0..c.count(k)).map(|i| alg.var(&format!("d{name}{k}_{i}"), g + 1)).collect());
    }
    SectorVars { x, dx }
}

fn bf_poly(c: &OrientedComplex, n: usize, bulk: &ShiftedSum, bdry: &ShiftedSum, norm: Normalization) -> PolyData {
    let m = c.dimension();
    let mut alg = GradedAlgebra::new();
    let a = sector_vars(&mut alg, c, "a", 1);
    let b = sector_vars(&mut alg, c, "b", n as i32 - 2);
    let mut bulk_vars = vec![0; bulk.dim()];
    let mut bulk_d = vec![0; bulk.dim()];
    for (s, sv) in [&a, &b].iter().enumerate() {
        for k in 0..=m {
            for i in 0..c.count(k) {
                bulk_vars[bulk.pos(s, k, i)] = sv.x[k][i];
                bulk_d[bulk.pos(s, k, i)] = sv.dx[k][i];
            }
        }
    }
    let one = rat(1);
    let mut omega = GradedPoly::zero();
    for k in 0..=m {
        omega.add_assign(&cup_poly(&alg, c, k, &vars_of(&a.dx[k]), &vars_of(&b.dx[m - k]), &one));
    }
    let s_sign = norm.action_sign();
    let mut action = GradedPoly::zero();
    for j in 0..m {
        action.add_assign(&cup_poly(&alg, c, j, &vars_of(&a.x[j]), &d_poly(c, m - j - 1, &b.x[m - j - 1]), &s_sign));
    }
    let mut q = BTreeMap::new();
    for sv in [&a, &b] {
        for k in 0..m {
            for (i, p) in d_poly(c, k, &sv.x[k]).into_iter().enumerate() {
                if !p.is_zero() {
                    q.insert(sv.x[k + 1][i], p);
                }
            }
        }
    }
    let mut pd = PolyData {
        alg,
        bulk_vars,
        bulk_d,
        bdry_vars: Vec::new(),
        bdry_d: Vec::new(),
        omega,
        action,
        alpha: GradedPoly::zero(),
        omega_bdry: GradedPoly::zero(),
        action_bdry: GradedPoly::zero(),
        q,
        q_bdry: BTreeMap::new(),
        pullback: BTreeMap::new(),
        normalization: norm,
    };
    if let Some(bc) = c.boundary() {
        let mb = bc.dimension();
        let ya = sector_vars(&mut pd.alg, bc, "ya", 1);
        let yb = sector_vars(&mut pd.alg, bc, "yb", n as i32 - 2);
        pd.bdry_vars = vec![0; bdry.dim()];
        pd.bdry_d = vec![0; bdry.dim()];
        for (s, sv) in [&ya, &yb].iter().enumerate() {
            for k in 0..=mb {
                for i in 0..bc.count(k) {
                    pd.bdry_vars[bdry.pos(s, k, i)] = sv.x[k][i];
                    pd.bdry_d[bdry.pos(s, k, i)] = sv.dx[k][i];
                }
            }
        }
        let alg = &pd.alg;
        for j in 0..=mb {
            pd.alpha.add_assign(&cup_poly(alg, bc, j, &vars_of(&ya.x[j]), &vars_of(&yb.dx[mb - j]), &one));
            pd.omega_bdry.add_assign(&cup_poly(alg, bc, j, &vars_of(&ya.dx[j]), &vars_of(&yb.dx[mb - j]), &norm.exact_sign()));
            if j < mb {
                pd.action_bdry.add_assign(&cup_poly(alg, bc, j, &vars_of(&ya.x[j]), &d_poly(bc, mb - j - 1, &yb.x[mb - j - 1]), &one));
            }
        }
        for sv in [&ya, &yb] {
            for k in 0..mb {
                for (i, p) in d_poly(bc, k, &sv.x[k]).into_iter().enumerate() {
                    if !p.is_zero() {
                        pd.q_bdry.insert(sv.x[k + 1][i], p);
                    }
                }
            }
        }
        for (yv, xv) in [(&ya, &a), (&yb, &b)] {
            for k in 0..=mb {
                for (i, &parent) in c.boundary_simplices(k).iter().enumerate() {
                    pd.pullback.insert(yv.x[k][i], GradedPoly::var(xv.x[k][parent]));
                    pd.pullback.insert(yv.dx[k][i], GradedPoly::var(xv.dx[k][parent]));
                }
            }
        }
    }
    pd
}

fn poly_q_matrix(t: &LinearTheory) -> Option<RatMatrix> {
    let p = t.poly.as_ref()?;
    Some(p.linear_matrix(&p.bulk_vars, &p.bulk_vars, &p.q))
}

// ---------------------------------------------------------------------------------
// Cotangent model

fn single(name: &str, dim: usize, ghost: i32) -> Summand {
    Summand { name: name.to_string(), form_dims: vec![dim], shift: ghost }
}

/// Assembles the vector-level theory from polynomial data plus explicit pairings.
fn from_poly(
    name: String,
    kind: TheoryKind,
    c: &OrientedComplex,
    bulk: ShiftedSum,
    boundary: ShiftedSum,
    pd: PolyData,
    omega: RatMatrix,
    omega_bdry: RatMatrix,
) -> Result<LinearTheory, TheoryError> {
    let q = pd.linear_matrix(&pd.bulk_vars, &pd.bulk_vars, &pd.q);
    let q_bdry = pd.linear_matrix(&pd.bdry_vars, &pd.bdry_vars, &pd.q_bdry);
    let pi = pd.linear_matrix(&pd.bdry_vars, &pd.bulk_vars, &pd.pullback);
    let rank = pi.rank();
    if rank != boundary.dim() {
        return Err(TheoryError::RestrictionNotSurjective { rank, dim: boundary.dim() });
    }
    Ok(LinearTheory {
        name,
        kind,
        model: PairingModel::Cotangent,
        n: c.dimension(),
        codim: 0,
        complex: c.clone(),
        bulk,
        boundary,
        q,
        q_bdry,
        pi,
        omega,
        omega_bdry,
        omega_ghost: -1,
        poly: Some(pd),
    })
}

/// Canonical pairing of `fields[i]` with `duals[i]`, coefficient `k` in both orders.
fn canonical_pairs(w: &mut RatMatrix, pairs: &[(usize, usize)], k: &Rat) {
    for &(x, y) in pairs {
        w.set(x, y, k.clone());
        w.set(y, x, k.clone());
    }
}

/// Antisymmetric boundary pairing with W[mom, field] = 1.
fn flux_pairs(w: &mut RatMatrix, pairs: &[(usize, usize)]) {
    for &(mom, field) in pairs {
        w.set(mom, field, rat(1));
        w.set(field, mom, rat(-1));
    }
}

/// Scalar field with first-order action ∫ p dφ + ½ p² − (m²/2) φ² in the cotangent
/// model: φ on vertices, p on edges, antifields on interior vertices and on all edges.
pub fn build_scalar(c: &OrientedComplex, mass: &Rat) -> Result<LinearTheory, TheoryError> {
    let n = c.dimension();
    if n == 0 {
        return Err(TheoryError::WrongDimension { kind: "scalar field".into(), expected: "dimension ≥ 1".into(), found: 0 });
    }
    let sn = parity_sign(n as i64);
    let m2 = mass * mass;
    let nv = c.count(0);
    let ne = c.count(1);
    let interior = c.interior_simplices(0);
    let bverts: Vec<usize> = c.boundary_simplices(0).to_vec();
    let bulk = ShiftedSum::new(vec![
        single("phi", nv, 0),
        single("p", ne, 0),
        single("phi_dag", interior.len(), -1),
        single("p_dag", ne, -1),
    ])?;
    let boundary = ShiftedSum::new(vec![single("y_phi", bverts.len(), 0), single("y_p", bverts.len(), 0)])?;

    let mut alg = GradedAlgebra::new();
    let phi: Vec<usize> = (0..nv).map(|i| alg.var(&format!("phi{i}"), 0)).collect();
    let p: Vec<usize> = (0..ne).map(|i| alg.var(&format!("p{i}"), 0)).collect();
    let phs: Vec<usize> = interior.iter().map(|i| alg.var(&format!("phs{i}"), -1)).collect();
    let ps: Vec<usize> = (0..ne).map(|i| alg.var(&format!("ps{i}"), -1)).collect();
    let bulk_vars: Vec<usize> = phi.iter().chain(&p).chain(&phs).chain(&ps).copied().collect();
    let bulk_d: Vec<usize> = bulk_vars
        .iter()
        .map(|&x| {
            let name = format!("d{}", alg.name(x));
            let deg = alg.degree(x) + 1;
            alg.var(&name, deg)
        })
        .collect();
    let dof: HashMap<usize, usize> = bulk_vars.iter().zip(&bulk_d).map(|(&x, &d)| (x, d)).collect();
    let v = GradedPoly::var;

    let d0 = c.coboundary_matrix(0);
    let mut dphi = vec![GradedPoly::zero(); ne];
    let mut dtp = vec![GradedPoly::zero(); nv];
    for (r, col, val) in d0.entries() {
        dphi[r].add_assign(&GradedPoly::var_scaled(phi[col], val.clone()));
        dtp[col].add_assign(&GradedPoly::var_scaled(p[r], val.clone()));
    }
    let mut omega = GradedPoly::zero();
    for (j, &i) in interior.iter().enumerate() {
        omega.add_assign(&alg.mul(&v(dof[&phi[i]]), &v(dof[&phs[j]])));
    }
    for e in 0..ne {
        omega.add_assign(&alg.mul(&v(dof[&p[e]]), &v(dof[&ps[e]])));
    }
    let mut action = GradedPoly::zero();
    for e in 0..ne {
        action.add_assign(&alg.mul(&v(p[e]), &dphi[e]));
        action.add_assign(&alg.mul(&v(p[e]), &v(p[e])).scale(&ratio(1, 2)));
    }
    for &i in &interior {
        action.add_assign(&alg.mul(&v(phi[i]), &v(phi[i])).scale(&(-&m2 * ratio(1, 2))));
    }
    let mut q = BTreeMap::new();
    for (j, &i) in interior.iter().enumerate() {
        let img = dtp[i].sub(&GradedPoly::var_scaled(phi[i], m2.clone())).scale(&sn);
        if !img.is_zero() {
            q.insert(phs[j], img);
        }
    }
    for e in 0..ne {
        q.insert(ps[e], dphi[e].add(&v(p[e])).scale(&sn));
    }

    let mut pd = PolyData {
        alg,
        bulk_vars,
        bulk_d,
        bdry_vars: Vec::new(),
        bdry_d: Vec::new(),
        omega,
        action,
        alpha: GradedPoly::zero(),
        omega_bdry: GradedPoly::zero(),
        action_bdry: GradedPoly::zero(),
        q,
        q_bdry: BTreeMap::new(),
        pullback: BTreeMap::new(),
        normalization: Normalization::Bulk { n },
    };
    let mut yph = Vec::new();
    let mut yp = Vec::new();
    for &vtx in &bverts {
        yph.push(pd.alg.var(&format!("yph{vtx}"), 0));
    }
    for &vtx in &bverts {
        yp.push(pd.alg.var(&format!("yp{vtx}"), 0));
    }
    let dyph: Vec<usize> = bverts.iter().map(|vtx| pd.alg.var(&format!("dyph{vtx}"), 1)).collect();
    let dyp: Vec<usize> = bverts.iter().map(|vtx| pd.alg.var(&format!("dyp{vtx}"), 1)).collect();
    pd.bdry_vars = yph.iter().chain(&yp).copied().collect();
    pd.bdry_d = dyph.iter().chain(&dyp).copied().collect();
    let bulk_delta = pd.delta_images(&pd.bulk_vars.clone(), &pd.bulk_d.clone());
    let flux_sign = parity_sign(n as i64 + 1);
    for (j, &vtx) in bverts.iter().enumerate() {
        let flux = dtp[vtx].scale(&flux_sign);
        pd.pullback.insert(yph[j], v(phi[vtx]));
        pd.pullback.insert(dyph[j], v(dof[&phi[vtx]]));
        pd.pullback.insert(dyp[j], pd.alg.derive(&flux, &bulk_delta, 1));
        pd.pullback.insert(yp[j], flux);
        pd.alpha.add_assign(&pd.alg.mul(&v(yp[j]), &v(dyph[j])));
        pd.omega_bdry.add_assign(&pd.alg.mul(&v(dyp[j]), &v(dyph[j])).scale(&parity_sign(n as i64 - 1)));
    }

    let mut w = RatMatrix::zeros(bulk.dim(), bulk.dim());
    let pairs: Vec<(usize, usize)> = interior
        .iter()
        .enumerate()
        .map(|(j, &i)| (bulk.pos(0, 0, i), bulk.pos(2, 0, j)))
        .chain((0..ne).map(|e| (bulk.pos(1, 0, e), bulk.pos(3, 0, e))))
        .collect();
    canonical_pairs(&mut w, &pairs, &rat(1));
    let mut wb = RatMatrix::zeros(boundary.dim(), boundary.dim());
    let bpairs: Vec<(usize, usize)> = (0..bverts.len()).map(|j| (boundary.pos(1, 0, j), boundary.pos(0, 0, j))).collect();
    flux_pairs(&mut wb, &bpairs);
    let name = format!("scalar field, m={}, n={n}", fmt_rat(mass));
    from_poly(name, TheoryKind::Scalar { mass: mass.clone() }, c, bulk, boundary, pd, w, wb)
}

/// BV-extended electrodynamics in first-order form in the cotangent model: A on edges,
/// B on triangles (standing in for the dual (n−2)-form), ghost c on vertices, and
/// their antifields. With boundary, only n = 2 has a surjective restriction.
pub fn build_electrodynamics(c: &OrientedComplex) -> Result<LinearTheory, TheoryError> {
    let n = c.dimension();
    if n < 2 {
        return Err(TheoryError::WrongDimension { kind: "electrodynamics".into(), expected: "dimension ≥ 2".into(), found: n });
    }
    let sn = parity_sign(n as i64);
    let (nv, ne, nf) = (c.count(0), c.count(1), c.count(2));
    let iv = c.interior_simplices(0);
    let ie = c.interior_simplices(1);
    let bv: Vec<usize> = c.boundary_simplices(0).to_vec();
    let be: Vec<usize> = c.boundary_simplices(1).to_vec();
    let bulk = ShiftedSum::new(vec![
        single("A", ne, 0),
        single("B", nf, 0),
        single("c", nv, 1),
        single("A_dag", ie.len(), -1),
        single("B_dag", nf, -1),
        single("c_dag", iv.len(), -2),
    ])?;
    let boundary = ShiftedSum::new(vec![
        single("y_A", be.len(), 0),
        single("y_B", be.len(), 0),
        single("y_c", bv.len(), 1),
        single("y_A_dag", bv.len(), -1),
    ])?;

    let mut alg = GradedAlgebra::new();
    let a: Vec<usize> = (0..ne).map(|i| alg.var(&format!("A{i}"), 0)).collect();
    let b: Vec<usize> = (0..nf).map(|i| alg.var(&format!("B{i}"), 0)).collect();
    let cg: Vec<usize> = (0..nv).map(|i| alg.var(&format!("c{i}"), 1)).collect();
    let as_: Vec<usize> = ie.iter().map(|i| alg.var(&format!("As{i}"), -1)).collect();
    let bs: Vec<usize> = (0..nf).map(|i| alg.var(&format!("Bs{i}"), -1)).collect();
    let cs: Vec<usize> = iv.iter().map(|i| alg.var(&format!("cs{i}"), -2)).collect();
    let bulk_vars: Vec<usize> = a.iter().chain(&b).chain(&cg).chain(&as_).chain(&bs).chain(&cs).copied().collect();
    let bulk_d: Vec<usize> = bulk_vars
        .iter()
        .map(|&x| {
            let name = format!("d{}", alg.name(x));
            let deg = alg.degree(x) + 1;
            alg.var(&name, deg)
        })
        .collect();
    let dof: HashMap<usize, usize> = bulk_vars.iter().zip(&bulk_d).map(|(&x, &d)| (x, d)).collect();
    let v = GradedPoly::var;
    let ie_pos: HashMap<usize, usize> = ie.iter().enumerate().map(|(j, &e)| (e, j)).collect();

    let d0 = c.coboundary_matrix(0);
    let d1 = c.coboundary_matrix(1);
    let mut da = vec![GradedPoly::zero(); nf];
    let mut dtb = vec![GradedPoly::zero(); ne];
    for (r, col, val) in d1.entries() {
        da[r].add_assign(&GradedPoly::var_scaled(a[col], val.clone()));
        dtb[col].add_assign(&GradedPoly::var_scaled(b[r], val.clone()));
    }
    let mut dc = vec![GradedPoly::zero(); ne];
    let mut dtas = vec![GradedPoly::zero(); nv];
    for (r, col, val) in d0.entries() {
        dc[r].add_assign(&GradedPoly::var_scaled(cg[col], val.clone()));
        if let Some(&j) = ie_pos.get(&r) {
            dtas[col].add_assign(&GradedPoly::var_scaled(as_[j], val.clone()));
        }
    }
    let mut omega = GradedPoly::zero();
    for (j, &e) in ie.iter().enumerate() {
        omega.add_assign(&alg.mul(&v(dof[&a[e]]), &v(dof[&as_[j]])));
    }
    for t in 0..nf {
        omega.add_assign(&alg.mul(&v(dof[&b[t]]), &v(dof[&bs[t]])));
    }
    for (j, &i) in iv.iter().enumerate() {
        omega.add_assign(&alg.mul(&v(dof[&cg[i]]), &v(dof[&cs[j]])));
    }
    let mut action = GradedPoly::zero();
    for t in 0..nf {
        action.add_assign(&alg.mul(&v(b[t]), &da[t]));
        action.add_assign(&alg.mul(&v(b[t]), &v(b[t])).scale(&ratio(1, 2)));
    }
    for (j, &e) in ie.iter().enumerate() {
        action.add_assign(&alg.mul(&v(as_[j]), &dc[e]).scale(&sn));
    }
    let mut q = BTreeMap::new();
    for e in 0..ne {
        if !dc[e].is_zero() {
            q.insert(a[e], dc[e].clone());
        }
    }
    for (j, &e) in ie.iter().enumerate() {
        if !dtb[e].is_zero() {
            q.insert(as_[j], dtb[e].scale(&sn));
        }
    }
    for t in 0..nf {
        q.insert(bs[t], v(b[t]).add(&da[t]).scale(&sn));
    }
    for (j, &i) in iv.iter().enumerate() {
        if !dtas[i].is_zero() {
            q.insert(cs[j], dtas[i].neg());
        }
    }

    let mut pd = PolyData {
        alg,
        bulk_vars,
        bulk_d,
        bdry_vars: Vec::new(),
        bdry_d: Vec::new(),
        omega,
        action,
        alpha: GradedPoly::zero(),
        omega_bdry: GradedPoly::zero(),
        action_bdry: GradedPoly::zero(),
        q,
        q_bdry: BTreeMap::new(),
        pullback: BTreeMap::new(),
        normalization: Normalization::Bulk { n },
    };
    let ya: Vec<usize> = be.iter().map(|e| pd.alg.var(&format!("yA{e}"), 0)).collect();
    let yb: Vec<usize> = be.iter().map(|e| pd.alg.var(&format!("yB{e}"), 0)).collect();
    let yc: Vec<usize> = bv.iter().map(|i| pd.alg.var(&format!("yc{i}"), 1)).collect();
    let yas: Vec<usize> = bv.iter().map(|i| pd.alg.var(&format!("yAs{i}"), -1)).collect();
    pd.bdry_vars = ya.iter().chain(&yb).chain(&yc).chain(&yas).copied().collect();
    pd.bdry_d = pd
        .bdry_vars
        .clone()
        .iter()
        .map(|&x| {
            let name = format!("d{}", pd.alg.name(x));
            let deg = pd.alg.degree(x) + 1;
            pd.alg.var(&name, deg)
        })
        .collect();
    let bdof: HashMap<usize, usize> = pd.bdry_vars.iter().zip(&pd.bdry_d).map(|(&x, &d)| (x, d)).collect();
    let bulk_delta = pd.delta_images(&pd.bulk_vars.clone(), &pd.bulk_d.clone());
    let flux_sign = parity_sign(n as i64 + 1);
    for (j, &e) in be.iter().enumerate() {
        pd.pullback.insert(ya[j], v(a[e]));
        pd.pullback.insert(yb[j], dtb[e].scale(&flux_sign));
    }
    for (j, &i) in bv.iter().enumerate() {
        pd.pullback.insert(yc[j], v(cg[i]));
        pd.pullback.insert(yas[j], dtas[i].clone());
    }
    for &y in &pd.bdry_vars.clone() {
        let img = pd.pullback[&y].clone();
        pd.pullback.insert(bdof[&y], pd.alg.derive(&img, &bulk_delta, 1));
    }
    for j in 0..be.len() {
        pd.alpha.add_assign(&pd.alg.mul(&v(yb[j]), &v(bdof[&ya[j]])));
    }
    for j in 0..bv.len() {
        pd.alpha.add_assign(&pd.alg.mul(&v(yas[j]), &v(bdof[&yc[j]])));
    }
    let bdelta = pd.delta_images(&pd.bdry_vars.clone(), &pd.bdry_d.clone());
    pd.omega_bdry = pd.alg.derive(&pd.alpha, &bdelta, 1).scale(&parity_sign(n as i64 - 1));
    if let Some(bc) = c.boundary() {
        let bd0 = bc.coboundary_matrix(0);
        let mut dcb = vec![GradedPoly::zero(); be.len()];
        let mut dtbb = vec![GradedPoly::zero(); bv.len()];
        for (r, col, val) in bd0.entries() {
            dcb[r].add_assign(&GradedPoly::var_scaled(yc[col], val.clone()));
            dtbb[col].add_assign(&GradedPoly::var_scaled(yb[r], val.clone()));
        }
        for j in 0..be.len() {
            if !dcb[j].is_zero() {
                pd.q_bdry.insert(ya[j], dcb[j].clone());
            }
        }
        for j in 0..bv.len() {
            if !dtbb[j].is_zero() {
                pd.q_bdry.insert(yas[j], dtbb[j].clone());
            }
            pd.action_bdry.add_assign(&pd.alg.mul(&v(yc[j]), &dtbb[j]));
        }
    }

    let mut w = RatMatrix::zeros(bulk.dim(), bulk.dim());
    let even_pairs: Vec<(usize, usize)> = ie
        .iter()
        .enumerate()
        .map(|(j, &e)| (bulk.pos(0, 0, e), bulk.pos(3, 0, j)))
        .chain((0..nf).map(|t| (bulk.pos(1, 0, t), bulk.pos(4, 0, t))))
        .collect();
    canonical_pairs(&mut w, &even_pairs, &rat(1));
    let ghost_pairs: Vec<(usize, usize)> = iv.iter().enumerate().map(|(j, &i)| (bulk.pos(2, 0, i), bulk.pos(5, 0, j))).collect();
    canonical_pairs(&mut w, &ghost_pairs, &rat(-1));
    let mut wb = RatMatrix::zeros(boundary.dim(), boundary.dim());
    let bpairs: Vec<(usize, usize)> = (0..be.len())
        .map(|j| (boundary.pos(1, 0, j), boundary.pos(0, 0, j)))
        .chain((0..bv.len()).map(|j| (boundary.pos(2, 0, j), boundary.pos(3, 0, j))))
        .collect();
    flux_pairs(&mut wb, &bpairs);
    from_poly(format!("electrodynamics, n={n}"), TheoryKind::Electrodynamics, c, bulk, boundary, pd, w, wb)
}

// ---------------------------------------------------------------------------------
// Master equation

/// One polynomial identity with its residual.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub statement: String,
    pub holds: bool,
    /// Normal-form residual; "0" when the identity holds.
    pub residual: String,
    pub residual_terms: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CmeReport {
    pub theory: String,
    pub boundary_term_nonzero: bool,
    pub identities: Vec<IdentityCheck>,
}

impl CmeReport {
    pub fn all_hold(&self) -> bool {
        self.identities.iter().all(|i| i.holds)
    }

    pub fn get(&self, name: &str) -> Option<&IdentityCheck> {
        self.identities.iter().find(|i| i.name == name)
    }

    /// The first failing identity as an error naming the offending residual.
    pub fn into_result(self) -> Result<CmeReport, TheoryError> {
        if let Some(bad) = self.identities.iter().find(|i| !i.holds) {
            return Err(TheoryError::SignConventionMismatch { identity: bad.name.clone(), block: bad.residual.clone() });
        }
        Ok(self)
    }
}

fn identity(alg: &GradedAlgebra, name: &str, statement: &str, residual: GradedPoly) -> IdentityCheck {
    let shown = if residual.len() > 6 {
        let mut first = GradedPoly::zero();
        for (m, c) in residual.terms().iter().take(6) {
            first.add_term(m.clone(), c.clone());
        }
        format!("{} + … ({} terms)", alg.format(&first), residual.len())
    } else {
        alg.format(&residual)
    };
    IdentityCheck { name: name.into(), statement: statement.into(), holds: residual.is_zero(), residual: shown, residual_terms: residual.len() }
}

/// Checks, on the polynomial data:
/// - `cme`: ι_Q ω = ε δS + π*α;
/// - `lo`: L_Q ω = −e π*ω_∂;
/// - `exact`: ω_∂ = e δα;
/// - `ham`: δS_∂ = ι_{Q_∂} δα;
/// - `q_action`: ι_Q δS = ε π*(2 S_∂ − ι_{Q_∂} α);
/// - `q2` and `proj`: Q² = 0 on generators and π* Q_∂ = Q π*;
///
/// with (ε, e) = ((−1)ⁿ, (−1)ⁿ⁻¹) at spacetime level and (1, 1) on strata.
pub fn verify_cme(t: &LinearTheory) -> Result<CmeReport, TheoryError> {
    let p = t.poly.as_ref().ok_or_else(|| TheoryError::NoPolynomialData(t.name.clone()))?;
    let alg = &p.alg;
    let eps = p.normalization.action_sign();
    let e = p.normalization.exact_sign();
    let dl = p.delta_images(&p.bulk_vars, &p.bulk_d);
    let iq = p.contraction_images(&p.bulk_vars, &p.bulk_d, &p.q);
    let dlb = p.delta_images(&p.bdry_vars, &p.bdry_d);
    let iqb = p.contraction_images(&p.bdry_vars, &p.bdry_d, &p.q_bdry);

    let iq_om = alg.derive(&p.omega, &iq, 0);
    let ds = alg.derive(&p.action, &dl, 1);
    let pa = p.pull(&p.alpha);
    let mut ids = Vec::new();
    ids.push(identity(alg, "master_equation", "ι_Q ω = ε δS + π*α", iq_om.sub(&ds.scale(&eps)).sub(&pa)));
    let lq_om = alg.derive(&iq_om, &dl, 1).neg();
    ids.push(identity(alg, "lie_derivative_omega", "L_Q ω = −e π*ω_∂", lq_om.add(&p.pull(&p.omega_bdry).scale(&e))));
    let dal = alg.derive(&p.alpha, &dlb, 1);
    ids.push(identity(alg, "boundary_form_exact", "ω_∂ = e δα", p.omega_bdry.sub(&dal.scale(&e))));
    ids.push(identity(alg, "boundary_hamiltonian", "δS_∂ = ι_{Q_∂} δα", alg.derive(&p.action_bdry, &dlb, 1).sub(&alg.derive(&dal, &iqb, 0))));
    let q_action = alg.derive(&ds, &iq, 0);
    let rhs = p.action_bdry.scale(&rat(2)).sub(&alg.derive(&p.alpha, &iqb, 0));
    ids.push(identity(alg, "q_of_action", "ι_Q δS = ε π*(2S_∂ − ι_{Q_∂}α)", q_action.sub(&p.pull(&rhs).scale(&eps))));
    let mut q2 = GradedPoly::zero();
    for img in p.q.values() {
        q2.add_assign(&alg.derive(img, &p.q, 1));
    }
    ids.push(identity(alg, "q_squared", "Q² = 0 on generators", q2));
    let mut proj = GradedPoly::zero();
    for y in &p.bdry_vars {
        let lhs = alg.derive(&p.pullback[y], &p.q, 1);
        let rhs = p.q_bdry.get(y).map(|q| p.pull(q)).unwrap_or_default();
        proj.add_assign(&lhs.sub(&rhs));
    }
    ids.push(identity(alg, "q_projects", "Q π* = π* Q_∂ on boundary generators", proj));
    Ok(CmeReport { theory: t.name.clone(), boundary_term_nonzero: !pa.is_zero(), identities: ids })
}

// ---------------------------------------------------------------------------------
// Strata, configs, slices, stored formulas

/// The same field content on a stratum of codimension k = n − dim c, with the
/// ghost shifts unchanged, so that ω has ghost number k − 1 and S has k.
pub fn extend_to_stratum(kind: &TheoryKind, c: &OrientedComplex) -> Result<LinearTheory, TheoryError> {
    match kind {
        TheoryKind::AbelianBf { n } => {
            if c.dimension() > *n {
                return Err(TheoryError::WrongDimension {
                    kind: "abelian BF stratum".into(),
                    expected: format!("dimension ≤ {n}"),
                    found: c.dimension(),
                });
            }
            bf_theory(c, *n, n - c.dimension())
        }
        TheoryKind::AbelianCs => {
            if c.dimension() > 3 {
                return Err(TheoryError::WrongDimension {
                    kind: "abelian CS stratum".into(),
                    expected: "dimension ≤ 3".into(),
                    found: c.dimension(),
                });
            }
            cs_theory(c, 3 - c.dimension())
        }
        other => Err(TheoryError::Config(format!("{} has no stratum extension", other.label()))),
    }
}

/// Whether the boundary data of `outer` is the bulk data of `inner` (built on the
/// boundary complex of `outer`): same ghost grading, same vector field and same pairing.
pub fn stratum_axiom_holds(outer: &LinearTheory, inner: &LinearTheory) -> bool {
    inner.codim == outer.codim + 1
        && inner.bulk.ghosts() == outer.boundary.ghosts()
        && (0..inner.bulk.dim()).all(|i| inner.bulk.ghost(i) == outer.boundary.ghost(i))
        && inner.q == outer.q_bdry
        && inner.omega == outer.omega_bdry
}

/// Codimension-two data of electrodynamics on ∂Σ for an (n−1)-complex Σ: the flux
/// C^{n−2}(∂Σ) and the ghost C⁰(∂Σ)[1], with zero action and zero vector field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdCodimTwo {
    pub flux_dim: usize,
    pub ghost_dim: usize,
    pub ghosts: BTreeMap<String, i32>,
    pub action_is_zero: bool,
    pub vector_field_is_zero: bool,
}

pub fn ed_codim_two(sigma: &OrientedComplex) -> EdCodimTwo {
    let n = sigma.dimension() + 1;
    let (flux_dim, ghost_dim) = match sigma.boundary() {
        Some(b) => (b.count(n - 2), b.count(0)),
        None => (0, 0),
    };
    let mut ghosts = BTreeMap::new();
    ghosts.insert("B".to_string(), 0);
    ghosts.insert("c".to_string(), 1);
    EdCodimTwo { flux_dim, ghost_dim, ghosts, action_is_zero: true, vector_field_is_zero: true }
}

/// Closed-form electrodynamics dimensions from (co)homology of N and ∂N, per ghost.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdFormulas {
    /// ker/Im in the c, A† and c† sectors: H⁰(N), H^{n−1}(N), Hⁿ(N).
    pub q_reduced: BTreeMap<i32, usize>,
    /// H¹(N) in the A sector; the continuum value only on closed N.
    pub q_reduced_a_sector: usize,
    /// Fibre over a boundary class: H⁰(N,∂N) at ghost 1, the image of H¹(N,∂N) in
    /// H¹(N) at ghost 0, the image of H^{n−1}(N,∂N) at ghost −1, Hⁿ(N) at ghost −2.
    pub fibre: BTreeMap<i32, usize>,
    /// Reduced evolution relation in the c and A† sectors: images of H⁰(N) and
    /// H^{n−1}(N) in the boundary cohomology.
    pub reduced_evolution: BTreeMap<i32, usize>,
}

pub fn ed_formulas(c: &OrientedComplex) -> EdFormulas {
    let n = c.dimension() as i32;
    let rp = c.relative_complex();
    let les = les_of_short_exact(&rp.inclusion, &rp.restriction, ["rel", "abs", "bdry"]).expect("pair sequence is short exact");
    let h = |k: i32| rp.absolute.cohomology(k).dim();
    let img_rel = |k: i32| les.i_star(k).rank();
    let img_bdry = |k: i32| les.p_star(k).rank();
    let mut q_reduced = BTreeMap::new();
    q_reduced.insert(1, h(0));
    q_reduced.insert(-1, h(n - 1));
    q_reduced.insert(-2, h(n));
    let mut fibre = BTreeMap::new();
    fibre.insert(1, rp.relative.cohomology(0).dim());
    fibre.insert(0, img_rel(1));
    fibre.insert(-1, img_rel(n - 1));
    fibre.insert(-2, h(n));
    let mut reduced_evolution = BTreeMap::new();
    reduced_evolution.insert(1, img_bdry(0));
    reduced_evolution.insert(-1, img_bdry(n - 1));
    EdFormulas { q_reduced, q_reduced_a_sector: h(1), fibre, reduced_evolution }
}

/// On-disk theory description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoryConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codim: Option<usize>,
}

impl TheoryConfig {
    pub fn from_json(text: &str) -> Result<Self, TheoryError> {
        serde_json::from_str(text).map_err(|e| TheoryError::Config(e.to_string()))
    }

    /// A config from a bare kind name such as `cs` or `abelian_bf`.
    pub fn named(kind: &str) -> Self {
        TheoryConfig { kind: kind.to_string(), mass: None, codim: None }
    }
}

/// Builds the configured theory on `c`. A codimension k > 0 puts the fields on a
/// stratum: c then has dimension n − k.
pub fn build_from_config(c: &OrientedComplex, cfg: &TheoryConfig) -> Result<LinearTheory, TheoryError> {
    let codim = cfg.codim.unwrap_or(0);
    let mass = match &cfg.mass {
        Some(s) => parse_rat(s).ok_or_else(|| TheoryError::Config(format!("mass {s:?} is not a rational")))?,
        None => Rat::zero(),
    };
    if mass < Rat::zero() {
        return Err(TheoryError::Config("mass must be nonnegative".into()));
    }
    match cfg.kind.as_str() {
        "abelian_bf" | "bf" => {
            if codim == 0 {
                build_abelian_bf(c)
            } else {
                extend_to_stratum(&TheoryKind::AbelianBf { n: c.dimension() + codim }, c)
            }
        }
        "abelian_cs" | "cs" => {
            if codim == 0 {
                build_abelian_cs(c)
            } else if c.dimension() + codim != 3 {
                Err(TheoryError::WrongDimension {
                    kind: "abelian Chern-Simons".into(),
                    expected: format!("dimension {}", 3i64 - codim as i64),
                    found: c.dimension(),
                })
            } else {
                extend_to_stratum(&TheoryKind::AbelianCs, c)
            }
        }
        "scalar" if codim == 0 => build_scalar(c, &mass),
        "electrodynamics" | "ed" if codim == 0 => build_electrodynamics(c),
        "scalar" | "electrodynamics" | "ed" => Err(TheoryError::Config(format!("{} supports only codim 0 here", cfg.kind))),
        other => Err(TheoryError::Config(format!(
            "unknown theory kind {other:?}; expected abelian_bf, abelian_cs, scalar or electrodynamics"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplicial::tests::{circle, cylinder, file, interval, torus_grid, triangle};
    use crate::simplicial::OrientedComplex;

    fn disk() -> OrientedComplex {
        // A square fan with an interior vertex.
        OrientedComplex::load(file(2, &[&[0, 1, 2], &[0, 2, 3], &[0, 3, 4], &[0, 4, 1]])).unwrap()
    }

    fn path(len: i64) -> OrientedComplex {
        let tops: Vec<Vec<i64>> = (0..len).map(|i| vec![i, i + 1]).collect();
        let refs: Vec<&[i64]> = tops.iter().map(|v| v.as_slice()).collect();
        OrientedComplex::load(file(1, &refs)).unwrap()
    }

    fn tet() -> OrientedComplex {
        OrientedComplex::load(file(3, &[&[0, 1, 2, 3]])).unwrap()
    }

    fn two_tets() -> OrientedComplex {
        OrientedComplex::load(file(3, &[&[0, 1, 2, 3], &[1, 2, 3, 4]])).unwrap()
    }

    #[test]
    fn bf_structure_on_small_complexes() {
        for c in [interval(), triangle(), cylinder(), disk(), torus_grid(3, 3), tet(), two_tets(), circle()] {
            let t = build_abelian_bf(&c).unwrap();
            let s = t.structure();
            assert!(s.all_hold(), "{}: {s:?}", t.name);
        }
    }

    #[test]
    fn bf_sector_dims_duplicate_cochains_with_shifts() {
        let c = cylinder();
        let t = build_abelian_bf(&c).unwrap();
        assert_eq!(t.bulk.summands[0].form_dims, c.counts());
        assert_eq!(t.bulk.summands[1].form_dims, c.counts());
        assert_eq!((t.bulk.summands[0].shift, t.bulk.summands[1].shift), (1, 0));
    }

    #[test]
    fn interval_boundary_pairing_is_two_blocks() {
        let t = build_abelian_bf(&interval()).unwrap();
        assert_eq!(t.boundary.dim(), 4);
        assert_eq!(t.omega_bdry.rank(), 4);
        for (r, c, _) in t.omega_bdry.entries() {
            assert_ne!(t.boundary.slot(r).sector, t.boundary.slot(c).sector);
            assert_eq!(t.boundary.slot(r).index, t.boundary.slot(c).index);
        }
    }

    #[test]
    fn bf_master_equation_on_closed_and_bounded_complexes() {
        for c in [interval(), path(3), triangle(), cylinder(), disk(), torus_grid(3, 3), tet()] {
            let t = build_abelian_bf(&c).unwrap();
            let r = verify_cme(&t).unwrap();
            assert!(r.all_hold(), "{}: {:?}", t.name, r.identities.iter().filter(|i| !i.holds).collect::<Vec<_>>());
            assert_eq!(r.boundary_term_nonzero, !c.is_closed(), "{}", t.name);
        }
    }

    #[test]
    fn cs_structure_and_pairing_ghosts() {
        for c in [tet(), two_tets()] {
            let t = build_abelian_cs(&c).unwrap();
            assert!(t.structure().all_hold(), "{:?}", t.structure());
        }
        assert!(matches!(build_abelian_cs(&triangle()), Err(TheoryError::WrongDimension { .. })));
    }

    #[test]
    fn scalar_structure_and_master_equation() {
        for c in [path(2), path(3), circle(), torus_grid(3, 3), disk()] {
            for m in [rat(0), rat(1), ratio(3, 2)] {
                let t = build_scalar(&c, &m).unwrap();
                assert!(t.structure().all_hold(), "{}: {:?}", t.name, t.structure());
                let r = verify_cme(&t).unwrap();
                assert!(r.all_hold(), "{}: {:?}", t.name, r.identities.iter().filter(|i| !i.holds).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn scalar_on_single_edge_is_refused() {
        assert!(matches!(build_scalar(&interval(), &rat(0)), Err(TheoryError::RestrictionNotSurjective { .. })));
    }

    #[test]
    fn scalar_field_level_pairing_is_nondegenerate_when_closed() {
        let t = build_scalar(&circle(), &rat(0)).unwrap();
        assert!(t.omega.is_invertible());
    }

    #[test]
    fn electrodynamics_structure_and_master_equation() {
        for c in [torus_grid(3, 3), disk()] {
            let t = build_electrodynamics(&c).unwrap();
            assert!(t.structure().all_hold(), "{}: {:?}", t.name, t.structure());
            let r = verify_cme(&t).unwrap();
            assert!(r.all_hold(), "{}: {:?}", t.name, r.identities.iter().filter(|i| !i.holds).collect::<Vec<_>>());
        }
        let closed = build_electrodynamics(&torus_grid(3, 3)).unwrap();
        assert!(closed.omega.is_invertible());
        assert!(matches!(build_electrodynamics(&path(3)), Err(TheoryError::WrongDimension { .. })));
    }

    #[test]
    fn strata_have_shifted_ghosts_and_chain_together() {
        let kind = TheoryKind::AbelianBf { n: 3 };
        let outer = extend_to_stratum(&kind, &two_tets()).unwrap();
        assert_eq!(outer.omega_ghost, -1);
        let bc = two_tets().boundary().unwrap().clone();
        let inner = extend_to_stratum(&kind, &bc).unwrap();
        assert_eq!(inner.omega_ghost, 0);
        assert!(inner.structure().all_hold(), "{:?}", inner.structure());
        assert!(stratum_axiom_holds(&outer, &inner));
        let t = torus_grid(3, 3);
        let on_torus = extend_to_stratum(&kind, &t).unwrap();
        assert_eq!(on_torus.omega_ghost, 0);
        assert!(verify_cme(&on_torus).unwrap().all_hold());
        let cyl = extend_to_stratum(&kind, &cylinder()).unwrap();
        assert!(cyl.structure().all_hold(), "{:?}", cyl.structure());
        let r = verify_cme(&cyl).unwrap();
        assert!(r.all_hold(), "{:?}", r.identities.iter().filter(|i| !i.holds).collect::<Vec<_>>());
        let cyl_bdry = extend_to_stratum(&kind, cylinder().boundary().unwrap()).unwrap();
        assert!(stratum_axiom_holds(&cyl, &cyl_bdry));
        assert!(cyl_bdry.is_closed());
    }

    fn point() -> OrientedComplex {
        OrientedComplex::load(file(0, &[&[0]])).unwrap()
    }

    #[test]
    fn top_codimension_is_a_point() {
        let t = extend_to_stratum(&TheoryKind::AbelianBf { n: 3 }, &point()).unwrap();
        assert_eq!(t.bulk.dim(), 2);
        assert_eq!(t.omega_ghost, 2);
        assert_eq!(t.bulk.ghosts(), vec![1]);
        let cs = extend_to_stratum(&TheoryKind::AbelianCs, &point()).unwrap();
        assert_eq!(cs.omega_ghost, 2);
    }

    #[test]
    fn ed_codim_two_on_an_interval() {
        let data = ed_codim_two(&path(2));
        assert_eq!((data.flux_dim, data.ghost_dim), (2, 2));
        assert!(data.action_is_zero && data.vector_field_is_zero);
    }

    #[test]
    fn ed_formulas_on_torus() {
        let f = ed_formulas(&torus_grid(3, 3));
        assert_eq!(f.q_reduced.get(&1), Some(&1));
        assert_eq!(f.q_reduced.get(&-1), Some(&2));
        assert_eq!(f.q_reduced.get(&-2), Some(&1));
        assert_eq!(f.q_reduced_a_sector, 2);
    }

    #[test]
    fn configs_parse_and_dispatch() {
        let cfg = TheoryConfig::from_json(r#"{"kind":"scalar","mass":"1/2"}"#).unwrap();
        let t = build_from_config(&circle(), &cfg).unwrap();
        assert_eq!(t.kind, TheoryKind::Scalar { mass: ratio(1, 2) });
        assert!(build_from_config(&circle(), &TheoryConfig::named("yang_mills")).is_err());
        let strat = TheoryConfig { kind: "abelian_bf".into(), mass: None, codim: Some(1) };
        let t = build_from_config(&torus_grid(3, 3), &strat).unwrap();
        assert_eq!((t.n, t.codim), (3, 1));
    }
}
