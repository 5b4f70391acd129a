//! Reduction engine for linear theories.
//!
//! All spaces here are linear, so tangent-space statements are global statements.
//! Field vectors are graded by degree = −ghost, which turns (F, Q̂), (F_∂, Q̂_∂) and the
//! vertical subcomplex V = ker π into cochain complexes sitting in a short exact
//! sequence 0 → V → F → F_∂ → 0. Everything else is read off from it:
//!
//! | object | linear model |
//! |---|---|
//! | EL, EL_∂ | ker Q̂, ker Q̂_∂ |
//! | M, M_∂ | H(F), H(F_∂) |
//! | M_symp | ker Q̂ / Q̂(V) |
//! | vertical part of M_symp | H(V) |
//! | χ, ψ, β* | maps of the long exact sequence |
//! | L, reduced L | π(ker Q̂), Im ψ |
//! | vacua | Im χ |

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complexes::{embed_vec, les_of_short_exact, ChainMap, CochainComplex, Cohomology, ComplexError, LongExactSequence};
use crate::linalg::{
    classify_subspace, fmt_rat, image_basis, kernel_basis, orthogonal_complement, quotient, solve, Classification, PairingForm, Rat,
    RatMatrix, Side, Subspace, Symmetry,
};
use crate::theories::{LinearTheory, PairingModel};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModuliError {
    #[error("Λ is not transversal to the reduced evolution relation: {0}")]
    NotTransversal(String),
    #[error("Λ is not lagrangian in the boundary moduli space")]
    NotLagrangian,
    #[error("Λ lives in a space of dimension {found}, expected {expected}")]
    WrongAmbient { expected: usize, found: usize },
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// Dimensions indexed by ghost number, listed from the highest ghost down.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GhostDims(pub BTreeMap<i32, usize>);

impl GhostDims {
    pub fn get(&self, ghost: i32) -> usize {
        self.0.get(&ghost).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }

    /// Values at the given ghosts, in the given order.
    pub fn at(&self, ghosts: &[i32]) -> Vec<usize> {
        ghosts.iter().map(|&g| self.get(g)).collect()
    }

    pub fn nonzero(mut self) -> Self {
        self.0.retain(|_, d| *d > 0);
        self
    }
}

impl Serialize for GhostDims {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (g, d) in self.0.iter().rev() {
            m.serialize_entry(&g.to_string(), d)?;
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for GhostDims {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw: BTreeMap<String, usize> = BTreeMap::deserialize(d)?;
        let mut out = BTreeMap::new();
        for (k, v) in raw {
            let g: i32 = k.parse().map_err(serde::de::Error::custom)?;
            out.insert(g, v);
        }
        Ok(GhostDims(out))
    }
}

/// A graded piece: a cochain complex together with where each degree sits in the
/// ambient field space.
#[derive(Clone, Debug)]
struct Piece {
    complex: CochainComplex,
    lo: i32,
    /// Positions in the ambient space, per degree lo..=hi.
    pos: Vec<Vec<usize>>,
    ambient: usize,
}

impl Piece {
    fn positions(&self, k: i32) -> &[usize] {
        if k < self.lo || k >= self.lo + self.pos.len() as i32 {
            &[]
        } else {
            &self.pos[(k - self.lo) as usize]
        }
    }
}

fn piece(space: &crate::complexes::ShiftedSum, op: &RatMatrix, lo: i32, hi: i32) -> Result<Piece, ComplexError> {
    let pos: Vec<Vec<usize>> = (lo..=hi).map(|k| space.positions_of_ghost(-k)).collect();
    let dims = pos.iter().map(|p| p.len()).collect();
    let ds = pos.windows(2).map(|w| op.select(&w[1], &w[0])).collect();
    Ok(Piece { complex: CochainComplex::new(lo, dims, ds)?, lo, pos, ambient: space.dim() })
}

/// Coordinates of the columns of `m` in the basis given by the columns of `basis`.
fn coords_in(basis: &RatMatrix, m: &RatMatrix) -> RatMatrix {
    if basis.cols() == 0 || m.cols() == 0 {
        return RatMatrix::zeros(basis.cols(), m.cols());
    }
    solve(basis, m).expect("columns lie in the span of the basis")
}

fn columns_matrix(rows: usize, cols: &[Vec<Rat>]) -> RatMatrix {
    if cols.is_empty() {
        RatMatrix::zeros(rows, 0)
    } else {
        RatMatrix::from_columns(rows, cols)
    }
}

fn matrix_strings(m: &RatMatrix) -> Vec<Vec<String>> {
    m.to_dense().iter().map(|r| r.iter().map(fmt_rat).collect()).collect()
}

fn vec_strings(v: &[Rat]) -> Vec<String> {
    v.iter().map(fmt_rat).collect()
}

fn parity(e: i32) -> Rat {
    if e.rem_euclid(2) == 0 {
        Rat::from_integer(1.into())
    } else {
        Rat::from_integer((-1).into())
    }
}

/// The reduction of one theory, with all cohomological data computed once.
pub struct Moduli<'a> {
    pub theory: &'a LinearTheory,
    lo: i32,
    hi: i32,
    fields: Piece,
    bdry: Piece,
    /// Basis of V in each degree, as columns in the coordinates of F in that degree.
    vert_basis: Vec<RatMatrix>,
    les: LongExactSequence,
    hv: BTreeMap<i32, Cohomology>,
    hf: BTreeMap<i32, Cohomology>,
    hb: BTreeMap<i32, Cohomology>,
}

impl<'a> Moduli<'a> {
    pub fn new(t: &'a LinearTheory) -> Result<Self, ModuliError> {
        let gs: Vec<i32> = t.bulk.ghosts().into_iter().chain(t.boundary.ghosts()).collect();
        let (lo, hi) = if gs.is_empty() { (0, 0) } else { (-gs.iter().max().unwrap(), -gs.iter().min().unwrap()) };
        let fields = piece(&t.bulk, &t.q, lo, hi)?;
        let bdry = piece(&t.boundary, &t.q_bdry, lo, hi)?;
        let pi_blocks: Vec<RatMatrix> = (lo..=hi).map(|k| t.pi.select(bdry.positions(k), fields.positions(k))).collect();
        let vert_basis: Vec<RatMatrix> = pi_blocks
            .iter()
            .zip(&fields.pos)
            .map(|(p, pos)| {
                let k = if p.rows() == 0 { Subspace::full(pos.len()) } else { kernel_basis(p) };
                columns_matrix(pos.len(), k.basis())
            })
            .collect();
        let mut vd = Vec::new();
        for k in lo..hi {
            let at = (k - lo) as usize;
            let qk = fields.complex.d(k);
            vd.push(coords_in(&vert_basis[at + 1], &qk.mul(&vert_basis[at])));
        }
        let vert = CochainComplex::new(lo, vert_basis.iter().map(|b| b.cols()).collect(), vd)?;
        let incl = ChainMap::new(vert.clone(), fields.complex.clone(), (lo..=hi).zip(vert_basis.iter().cloned()).collect())?;
        let proj = ChainMap::new(fields.complex.clone(), bdry.complex.clone(), (lo..=hi).zip(pi_blocks).collect())?;
        let les = les_of_short_exact(&incl, &proj, ["M_vert", "M", "M_bdry"])?;
        let mut hv = BTreeMap::new();
        let mut hf = BTreeMap::new();
        let mut hb = BTreeMap::new();
        let reach = 2 + (hi - lo) + t.omega_ghost.abs();
        for k in lo - reach..=hi + reach {
            hv.insert(k, vert.cohomology(k));
            hf.insert(k, fields.complex.cohomology(k));
            hb.insert(k, bdry.complex.cohomology(k));
        }
        Ok(Moduli { theory: t, lo, hi, fields, bdry, vert_basis, les, hv, hf, hb })
    }

    pub fn degrees(&self) -> std::ops::RangeInclusive<i32> {
        self.lo..=self.hi
    }

    fn pw(&self) -> i32 {
        self.theory.omega_ghost
    }

    fn h<'b>(map: &'b BTreeMap<i32, Cohomology>, k: i32) -> &'b Cohomology {
        map.get(&k).unwrap_or_else(|| panic!("cohomology in degree {k} not computed"))
    }

    fn in_range(&self, k: i32) -> bool {
        k >= self.lo && k <= self.hi
    }

    /// χ in degree k: H^k(V) → H^k(F).
    pub fn chi(&self, k: i32) -> RatMatrix {
        if self.in_range(k) {
            self.les.i_star(k).clone()
        } else {
            RatMatrix::zeros(Self::h(&self.hf, k).dim(), Self::h(&self.hv, k).dim())
        }
    }

    /// ψ in degree k: H^k(F) → H^k(F_∂).
    pub fn psi(&self, k: i32) -> RatMatrix {
        if self.in_range(k) {
            self.les.p_star(k).clone()
        } else {
            RatMatrix::zeros(Self::h(&self.hb, k).dim(), Self::h(&self.hf, k).dim())
        }
    }

    /// β* in degree k: H^k(F_∂) → H^{k+1}(V).
    pub fn beta_star(&self, k: i32) -> RatMatrix {
        if self.in_range(k) {
            self.les.delta(k).clone()
        } else {
            RatMatrix::zeros(Self::h(&self.hv, k + 1).dim(), Self::h(&self.hb, k).dim())
        }
    }

    fn rep_full_f(&self, k: i32) -> RatMatrix {
        let h = Self::h(&self.hf, k);
        let cols: Vec<Vec<Rat>> = h.representatives().iter().map(|r| embed_vec(r, self.fields.positions(k), self.fields.ambient)).collect();
        columns_matrix(self.fields.ambient, &cols)
    }

    fn rep_full_v(&self, k: i32) -> RatMatrix {
        let h = Self::h(&self.hv, k);
        if !self.in_range(k) {
            return RatMatrix::zeros(self.fields.ambient, h.dim());
        }
        let b = &self.vert_basis[(k - self.lo) as usize];
        let cols: Vec<Vec<Rat>> = h.representatives().iter().map(|r| embed_vec(&b.mul_vec(r), self.fields.positions(k), self.fields.ambient)).collect();
        columns_matrix(self.fields.ambient, &cols)
    }

    fn rep_full_b(&self, k: i32) -> RatMatrix {
        let h = Self::h(&self.hb, k);
        let cols: Vec<Vec<Rat>> = h.representatives().iter().map(|r| embed_vec(r, self.bdry.positions(k), self.bdry.ambient)).collect();
        columns_matrix(self.bdry.ambient, &cols)
    }

    /// P1 in degree k: H^k(V) × H^{j}(F) with j = −gh(ω) − k, the value uᵀWx.
    pub fn p1(&self, k: i32) -> RatMatrix {
        let j = -self.pw() - k;
        self.rep_full_v(k).transpose().mul(&self.theory.omega).mul(&self.rep_full_f(j))
    }

    /// P2 in degree k: H^k(F) × H^{j}(V) with j = −gh(ω) − k.
    pub fn p2(&self, k: i32) -> RatMatrix {
        let j = -self.pw() - k;
        self.rep_full_f(k).transpose().mul(&self.theory.omega).mul(&self.rep_full_v(j))
    }

    /// P3 in degree k: H^k(F_∂) × H^{j}(F_∂) with j = −gh(ω_∂) − k.
    pub fn p3(&self, k: i32) -> RatMatrix {
        let j = -self.pw() - 1 - k;
        self.rep_full_b(k).transpose().mul(&self.theory.omega_bdry).mul(&self.rep_full_b(j))
    }

    fn per_ghost(&self, f: impl Fn(i32) -> usize) -> GhostDims {
        GhostDims(self.degrees().map(|k| (-k, f(k))).collect()).nonzero()
    }

    fn q_block(&self, k: i32) -> RatMatrix {
        self.fields.complex.d(k)
    }

    fn el_basis(&self, k: i32) -> Subspace {
        kernel_basis(&self.q_block(k))
    }

    pub fn el_dims(&self) -> GhostDims {
        self.per_ghost(|k| self.el_basis(k).dim())
    }

    /// EL as a subspace of the whole field space.
    pub fn el_space(&self) -> Subspace {
        let mut vs = Vec::new();
        for k in self.degrees() {
            for v in self.el_basis(k).basis() {
                vs.push(embed_vec(v, self.fields.positions(k), self.fields.ambient));
            }
        }
        Subspace::span(self.fields.ambient, &vs)
    }

    pub fn el_bdry_dims(&self) -> GhostDims {
        self.per_ghost(|k| self.bdry.complex.cocycles(k).dim())
    }

    pub fn moduli_dims(&self) -> GhostDims {
        self.per_ghost(|k| Self::h(&self.hf, k).dim())
    }

    pub fn boundary_moduli_dims(&self) -> GhostDims {
        self.per_ghost(|k| Self::h(&self.hb, k).dim())
    }

    /// Fibres of π_*: M_symp → EL_∂, i.e. H(V).
    pub fn vertical_dims(&self) -> GhostDims {
        self.per_ghost(|k| Self::h(&self.hv, k).dim())
    }

    fn qv_image(&self, k: i32) -> Subspace {
        // Q̂(V) in degree k, in F_k coordinates.
        if !self.in_range(k - 1) {
            return Subspace::zero(self.fields.complex.dim(k));
        }
        let b = &self.vert_basis[(k - 1 - self.lo) as usize];
        if b.cols() == 0 {
            return Subspace::zero(self.fields.complex.dim(k));
        }
        image_basis(&self.q_block(k - 1).mul(b))
    }

    /// ker Q̂ / Q̂(V) in degree k.
    pub fn symp_quotient(&self, k: i32) -> crate::linalg::Quotient {
        quotient(&self.el_basis(k), &self.qv_image(k)).expect("Q̂(V) consists of solutions")
    }

    pub fn moduli_symp_dims(&self) -> GhostDims {
        self.per_ghost(|k| self.symp_quotient(k).dim())
    }

    /// L = π(EL) per ghost.
    pub fn evolution_dims(&self) -> GhostDims {
        self.per_ghost(|k| {
            let el = self.el_basis(k);
            if el.dim() == 0 {
                return 0;
            }
            let pk = self.theory.pi.select(self.bdry.positions(k), self.fields.positions(k));
            pk.mul(&el.matrix()).rank()
        })
    }

    pub fn reduced_evolution_dims(&self) -> GhostDims {
        self.per_ghost(|k| self.psi(k).rank())
    }

    pub fn vacua_dims(&self) -> GhostDims {
        self.per_ghost(|k| self.chi(k).rank())
    }

    pub fn les(&self) -> &LongExactSequence {
        &self.les
    }

    /// Offsets of each degree in the concatenated basis of M_∂.
    fn bdry_offsets(&self) -> (BTreeMap<i32, usize>, usize) {
        let mut off = BTreeMap::new();
        let mut total = 0;
        for k in self.degrees() {
            off.insert(k, total);
            total += Self::h(&self.hb, k).dim();
        }
        (off, total)
    }

    /// The pairing on M_∂ in the concatenated basis.
    pub fn boundary_pairing(&self) -> PairingForm {
        let (off, total) = self.bdry_offsets();
        let mut m = RatMatrix::zeros(total, total);
        for k in self.degrees() {
            let j = -self.pw() - 1 - k;
            if !self.in_range(j) {
                continue;
            }
            for (r, c, v) in self.p3(k).entries() {
                m.set(off[&k] + r, off[&j] + c, v.clone());
            }
        }
        PairingForm::new(m, Symmetry::GradedAntisymmetric)
    }

    /// Reduced L = Im ψ inside M_∂, in the concatenated basis.
    pub fn reduced_evolution(&self) -> Subspace {
        let (off, total) = self.bdry_offsets();
        let mut vs = Vec::new();
        for k in self.degrees() {
            for v in image_basis(&self.psi(k)).basis() {
                vs.push(embed_vec(v, &(off[&k]..off[&k] + v.len()).collect::<Vec<_>>(), total));
            }
        }
        Subspace::span(total, &vs)
    }

    pub fn lefschetz(&self) -> LefschetzReport {
        let s = parity(self.pw());
        let mut nondeg = true;
        let mut blocks = Vec::new();
        for k in self.degrees() {
            for (name, m) in [("P1", self.p1(k)), ("P2", self.p2(k)), ("P3", self.p3(k))] {
                let ok = m.rows() == m.cols() && (m.rows() == 0 || m.is_invertible());
                nondeg &= ok;
                if m.rows() + m.cols() > 0 {
                    blocks.push(PairingBlock { pairing: name.into(), ghost: -k, rows: m.rows(), cols: m.cols(), nondegenerate: ok });
                }
            }
        }
        let mut beta_adjoint = true;
        let mut psi_adjoint = true;
        let mut chi_self = true;
        for k in self.lo - 1..=self.hi {
            let j = -self.pw() - (k + 1);
            beta_adjoint &= self.beta_star(k).transpose().mul(&self.p1(k + 1)) == self.p3(k).mul(&self.psi(j));
            let jf = -self.pw() - 1 - k;
            psi_adjoint &= self.psi(jf).transpose().mul(&self.p3(jf)) == self.p2(jf).mul(&self.beta_star(k)).scale(&s);
        }
        for k in self.degrees() {
            let j = -self.pw() - k;
            chi_self &= self.p1(k).mul(&self.chi(j)) == self.chi(k).transpose().mul(&self.p2(k));
        }
        LefschetzReport {
            nondegenerate: nondeg,
            chi_self_adjoint: chi_self,
            psi_beta_adjoint: beta_adjoint && psi_adjoint,
            dual_sequence_commutes: beta_adjoint && psi_adjoint && chi_self,
            blocks,
        }
    }

    pub fn evolution_relation(&self) -> EvolutionReport {
        let l = self.reduced_evolution();
        let class = classify_subspace(&self.boundary_pairing(), &l).expect("shapes agree");
        let el = self.el_space();
        let img = el.image_under(&self.theory.pi);
        let field_iso = img.dim() == 0 || img.matrix().transpose().mul(&self.theory.omega_bdry).mul(&img.matrix()).is_zero();
        EvolutionReport {
            dims: self.evolution_dims(),
            reduced_dims: self.reduced_evolution_dims(),
            isotropic: class.isotropic,
            coisotropic: class.coisotropic,
            lagrangian: class.lagrangian,
            isotropic_at_field_level: field_iso,
        }
    }

    pub fn vacua(&self) -> VacuaReport {
        // Preimages under χ of a basis of Im χ, degree by degree.
        let mut pre: BTreeMap<i32, RatMatrix> = BTreeMap::new();
        let mut img: BTreeMap<i32, RatMatrix> = BTreeMap::new();
        for k in self.degrees() {
            let chi = self.chi(k);
            let ib = image_basis(&chi);
            let b = columns_matrix(chi.rows(), ib.basis());
            let u = if b.cols() == 0 { RatMatrix::zeros(chi.cols(), 0) } else { solve(&chi, &b).expect("image vectors have preimages") };
            pre.insert(k, self.rep_full_v(k).mul(&u));
            img.insert(k, self.rep_full_f(k).mul(&b));
        }
        let mut nondeg = true;
        let mut coupling = true;
        for k in self.degrees() {
            for l in self.degrees() {
                let g = pre[&k].transpose().mul(&self.theory.omega).mul(&img[&l]);
                if l == -self.pw() - k {
                    nondeg &= g.rows() == g.cols() && (g.rows() == 0 || g.is_invertible());
                } else {
                    coupling &= g.is_zero();
                }
            }
        }
        let mut kernel_is_chi_kernel = true;
        for k in self.degrees() {
            let j = -self.pw() - k;
            let form = self.p1(k).mul(&self.chi(j));
            let left_kernel = kernel_basis(&form.transpose());
            kernel_is_chi_kernel &= left_kernel.same_as(&kernel_basis(&self.chi(k)));
        }
        VacuaReport { dims: self.vacua_dims(), pairing_nondegenerate: nondeg, ghost_coupling: coupling, kernel_is_chi_kernel }
    }

    /// Lifts y ∈ F_∂ (degree k) and returns Q̂ of the lift, in F_{k+1} coordinates.
    fn beta_raw(&self, k: i32, y: &[Rat]) -> Vec<Rat> {
        let pk = self.theory.pi.select(self.bdry.positions(k), self.fields.positions(k));
        let xi = crate::linalg::solve_vec(&pk, y).expect("π is surjective");
        self.q_block(k).mul_vec(&xi)
    }

    pub fn beta(&self) -> BetaReport {
        let mut vanishes = true;
        let mut projects = true;
        let mut ranks = BTreeMap::new();
        for k in self.degrees() {
            let nb = self.bdry.positions(k).len();
            if nb == 0 {
                continue;
            }
            let target = self.symp_quotient(k + 1);
            let pk1 = self.theory.pi.select(self.bdry.positions(k + 1), self.fields.positions(k + 1));
            let qb = self.bdry.complex.d(k);
            let mut cols = Vec::new();
            for i in 0..nb {
                let y = crate::linalg::unit_vec(nb, i);
                let qx = self.beta_raw(k, &y);
                projects &= pk1.mul_vec(&qx) == qb.mul_vec(&y);
                cols.push(target.project(&qx));
            }
            let bm = columns_matrix(target.dim(), &cols);
            ranks.insert(-k, bm.rank());
            if self.in_range(k - 1) {
                let qprev = self.bdry.complex.d(k - 1);
                vanishes &= bm.mul(&qprev).is_zero();
            }
        }
        BetaReport { vanishes_on_image: vanishes, projects_to_boundary_differential: projects, rank: GhostDims(ranks).nonzero() }
    }

    /// Radical of the bulk pairing; zero for the closed cotangent model.
    fn omega_radical(&self) -> Subspace {
        PairingForm::new(self.theory.omega.clone(), Symmetry::None).radical()
    }

    fn orth_check(&self, name: &str, form: &PairingForm, s: &Subspace, t: &Subspace, radical: &Subspace) -> OrthogonalityCheck {
        let perp = orthogonal_complement(form, Side::Left, s).expect("shapes agree");
        let target = t.sum(radical);
        let holds = perp.same_as(&target);
        let witness = if holds {
            None
        } else {
            perp.basis().iter().find(|v| !target.contains(v)).or_else(|| target.basis().iter().find(|v| !perp.contains(v))).map(|v| vec_strings(v))
        };
        OrthogonalityCheck { name: name.into(), holds, witness }
    }

    pub fn regularity(&self) -> RegularityReport {
        let t = self.theory;
        match t.model {
            PairingModel::Cotangent => {
                let n = self.fields.ambient;
                let w = PairingForm::new(t.omega.clone(), Symmetry::GradedSymmetric);
                let rad = self.omega_radical();
                let v = kernel_basis(&t.pi);
                let v = if t.pi.rows() == 0 { Subspace::full(n) } else { v };
                let ker = kernel_basis(&t.q);
                let im = image_basis(&t.q);
                let qv = v.image_under(&t.q);
                let ker_v = ker.intersection(&v);
                let mut checks = vec![
                    self.orth_check("(ker Q)^perp = Q(V)", &w, &ker, &qv, &rad),
                    self.orth_check("(ker Q ∩ V)^perp = Im Q", &w, &ker_v, &im, &rad),
                ];
                let wb = PairingForm::new(t.omega_bdry.clone(), Symmetry::GradedAntisymmetric);
                let rad_b = wb.radical();
                checks.push(self.orth_check("(ker Q_bdry)^perp = Im Q_bdry", &wb, &kernel_basis(&t.q_bdry), &image_basis(&t.q_bdry), &rad_b));
                let mode = if rad.dim() == 0 { RegularityMode::Literal } else { RegularityMode::LiteralModuloRadical };
                RegularityReport { mode, holds: checks.iter().all(|c| c.holds), checks }
            }
            PairingModel::Cup => {
                let lf = self.lefschetz();
                let vac = self.vacua();
                let checks = vec![
                    OrthogonalityCheck { name: "Lefschetz and Poincaré pairings nondegenerate".into(), holds: lf.nondegenerate, witness: None },
                    OrthogonalityCheck { name: "ker ω_symp_vert = ker χ".into(), holds: vac.kernel_is_chi_kernel, witness: None },
                ];
                RegularityReport { mode: RegularityMode::ReducedSurrogate, holds: checks.iter().all(|c| c.holds), checks }
            }
        }
    }

    /// On a closed complex with nondegenerate ω, the symplectic reduction of EL is
    /// EL/(EL ∩ EL^⊥); it agrees with the Q-reduction iff EL^⊥ = Im Q̂.
    pub fn symplectic_reduction_matches(&self) -> Option<bool> {
        let t = self.theory;
        if !t.is_closed() || !t.omega.is_invertible() {
            return None;
        }
        let w = PairingForm::new(t.omega.clone(), Symmetry::GradedSymmetric);
        let el = self.el_space();
        let perp = orthogonal_complement(&w, Side::Left, &el).ok()?;
        Some(perp.same_as(&image_basis(&t.q)))
    }

    /// A lagrangian complement of the reduced evolution relation, built from
    /// homogeneous vectors when one exists.
    pub fn transversal_lagrangian(&self) -> Option<Subspace> {
        let p = self.boundary_pairing();
        let total = p.left_dim();
        let l = self.reduced_evolution();
        let mut lam = Subspace::zero(total);
        let full = Subspace::full(total);
        while 2 * lam.dim() < total {
            let perp = orthogonal_complement(&p, Side::Left, &lam).ok()?;
            let blocked = lam.sum(&l);
            let next = perp.basis().iter().chain(full.basis()).find(|v| {
                perp.contains(v) && !blocked.contains(v) && p.eval(v, v) == Rat::from_integer(0.into())
            })?;
            lam = lam.sum(&Subspace::span(total, &[next.clone()]));
        }
        Some(lam)
    }

    /// The reduction of fields with boundary values on a lagrangian Λ ⊂ M_∂ transversal
    /// to the reduced evolution relation, compared with the vacua.
    pub fn vacua_via_transversal(&self, lambda: &Subspace) -> Result<TransversalReport, ModuliError> {
        let p = self.boundary_pairing();
        if lambda.ambient_dim() != p.left_dim() {
            return Err(ModuliError::WrongAmbient { expected: p.left_dim(), found: lambda.ambient_dim() });
        }
        let class = classify_subspace(&p, lambda).expect("shapes agree");
        if !class.lagrangian {
            return Err(ModuliError::NotLagrangian);
        }
        let l = self.reduced_evolution();
        let meet = lambda.intersection(&l).dim();
        if meet != 0 || lambda.dim() + l.dim() != p.left_dim() {
            return Err(ModuliError::NotTransversal(format!("dim(Λ ∩ L) = {meet}")));
        }
        // Transversality forces boundary values of solutions with [πξ] ∈ Λ to vanish in
        // cohomology; the field-level representatives are then S = ker Q̂ ∩ V and
        // I = Im Q̂ ∩ V.
        let t = self.theory;
        let n = self.fields.ambient;
        let v = if t.pi.rows() == 0 { Subspace::full(n) } else { kernel_basis(&t.pi) };
        let s = kernel_basis(&t.q).intersection(&v);
        let i = image_basis(&t.q).intersection(&v);
        let w = PairingForm::new(t.omega.clone(), Symmetry::None);
        let s_perp_in_v = orthogonal_complement(&w, Side::Left, &s).expect("shapes agree").intersection(&v);
        let i_is_orthogonal = s_perp_in_v.contains_subspace(&i);
        let red = quotient(&s, &i).expect("I ⊆ S");
        let reduced = w.restrict(&red.complement, &red.complement);
        let red_nondeg = reduced.matrix.rows() == 0 || reduced.is_nondegenerate();
        // Φ: S/I → Im χ ⊂ H(F), [u] ↦ class of u.
        let mut phi_rank = 0;
        let mut agrees = true;
        let mut images = Vec::new();
        for u in red.complement.basis() {
            let mut class = Vec::new();
            for k in self.degrees() {
                let local: Vec<Rat> = self.fields.positions(k).iter().map(|&p| u[p].clone()).collect();
                class.extend(Self::h(&self.hf, k).class_of(&local).expect("S consists of solutions"));
            }
            images.push(class);
        }
        let hdim: usize = self.degrees().map(|k| Self::h(&self.hf, k).dim()).sum();
        if !images.is_empty() {
            let phi = RatMatrix::from_columns(hdim, &images);
            phi_rank = phi.rank();
        }
        let vac = self.vacua_dims();
        agrees &= phi_rank == red.dim() && phi_rank == vac.total();
        let mut dims = BTreeMap::new();
        for u in red.complement.basis() {
            let k = (0..n).find(|&p| *u[p].numer() != 0.into()).map(|p| t.bulk.ghost(p)).unwrap_or(0);
            *dims.entry(k).or_insert(0) += 1;
        }
        let dims = GhostDims(dims);
        agrees &= dims == vac;
        Ok(TransversalReport {
            lambda_dim: lambda.dim(),
            reduced_dims: dims,
            i_orthogonal_to_s: i_is_orthogonal,
            reduced_nondegenerate: red_nondeg,
            isomorphic_to_vacua: agrees,
        })
    }

    pub fn report(&self) -> ModuliReport {
        let t = self.theory;
        let les = &self.les;
        let mut maps = Vec::new();
        for k in self.degrees() {
            maps.push(DegreeMaps {
                ghost: -k,
                chi: matrix_strings(&self.chi(k)),
                psi: matrix_strings(&self.psi(k)),
                beta_star: matrix_strings(&self.beta_star(k)),
            });
        }
        let lefschetz = self.lefschetz();
        let evolution = self.evolution_relation();
        let vacua = self.vacua();
        let regularity = self.regularity();
        let beta = self.beta();
        let structure = t.structure();
        let transversal = self.transversal_lagrangian().map(|lam| self.vacua_via_transversal(&lam).map_err(|e| e.to_string()));
        let les_exact = les.report.all_exact();
        let symp_matches = self.symplectic_reduction_matches();
        let transversal_ok = match &transversal {
            Some(Ok(r)) => r.isomorphic_to_vacua && r.reduced_nondegenerate && r.i_orthogonal_to_s,
            Some(Err(_)) => false,
            None => true,
        };
        let verdicts = Verdicts {
            structure: structure.all_hold(),
            les_exact,
            lagrangian: evolution.lagrangian,
            lefschetz: lefschetz.nondegenerate && lefschetz.dual_sequence_commutes,
            vacua_symplectic: vacua.pairing_nondegenerate && vacua.ghost_coupling && vacua.kernel_is_chi_kernel,
            beta: beta.vanishes_on_image && beta.projects_to_boundary_differential,
            regular: regularity.holds,
            transversal_reduction: transversal_ok,
            symplectic_equals_q_reduction: symp_matches.unwrap_or(true),
        };
        ModuliReport {
            theory: t.name.clone(),
            model: t.model,
            codim: t.codim,
            closed: t.is_closed(),
            note: "linear theory: every tangent-space statement holds globally".into(),
            field_dims: t.field_dims(),
            boundary_field_dims: t.boundary_field_dims(),
            el: self.el_dims(),
            el_boundary: self.el_bdry_dims(),
            moduli: self.moduli_dims(),
            moduli_symp: self.moduli_symp_dims(),
            moduli_vertical: self.vertical_dims(),
            boundary_moduli: self.boundary_moduli_dims(),
            les: LesSummary {
                nodes: les.report.nodes.iter().map(|n| (n.label.clone(), n.dim)).collect(),
                exact: les_exact,
                maps,
            },
            lefschetz,
            evolution_relation: evolution,
            vacua,
            vacua_via_transversal: transversal,
            beta,
            regularity,
            symplectic_equals_q_reduction: symp_matches,
            verdicts,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairingBlock {
    pub pairing: String,
    pub ghost: i32,
    pub rows: usize,
    pub cols: usize,
    pub nondegenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LefschetzReport {
    pub nondegenerate: bool,
    pub chi_self_adjoint: bool,
    pub psi_beta_adjoint: bool,
    pub dual_sequence_commutes: bool,
    pub blocks: Vec<PairingBlock>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EvolutionReport {
    pub dims: GhostDims,
    pub reduced_dims: GhostDims,
    pub isotropic: bool,
    pub coisotropic: bool,
    pub lagrangian: bool,
    pub isotropic_at_field_level: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VacuaReport {
    pub dims: GhostDims,
    pub pairing_nondegenerate: bool,
    pub ghost_coupling: bool,
    pub kernel_is_chi_kernel: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransversalReport {
    pub lambda_dim: usize,
    pub reduced_dims: GhostDims,
    pub i_orthogonal_to_s: bool,
    pub reduced_nondegenerate: bool,
    pub isomorphic_to_vacua: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BetaReport {
    pub vanishes_on_image: bool,
    pub projects_to_boundary_differential: bool,
    pub rank: GhostDims,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegularityMode {
    /// Orthogonality identities at field level against a nondegenerate ω.
    Literal,
    /// Field-level identities with ω degenerate; complements are compared after
    /// adding the radical of ω.
    LiteralModuloRadical,
    /// Cup model: the consequences of regularity checked on cohomology.
    ReducedSurrogate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrthogonalityCheck {
    pub name: String,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegularityReport {
    pub mode: RegularityMode,
    pub holds: bool,
    pub checks: Vec<OrthogonalityCheck>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeMaps {
    pub ghost: i32,
    pub chi: Vec<Vec<String>>,
    pub psi: Vec<Vec<String>>,
    pub beta_star: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LesSummary {
    pub nodes: Vec<(String, usize)>,
    pub exact: bool,
    pub maps: Vec<DegreeMaps>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdicts {
    pub structure: bool,
    pub les_exact: bool,
    pub lagrangian: bool,
    pub lefschetz: bool,
    pub vacua_symplectic: bool,
    pub beta: bool,
    pub regular: bool,
    pub transversal_reduction: bool,
    pub symplectic_equals_q_reduction: bool,
}

impl Verdicts {
    pub fn all(&self) -> bool {
        self.structure
            && self.les_exact
            && self.lagrangian
            && self.lefschetz
            && self.vacua_symplectic
            && self.beta
            && self.regular
            && self.transversal_reduction
            && self.symplectic_equals_q_reduction
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModuliReport {
    pub theory: String,
    pub model: PairingModel,
    pub codim: usize,
    pub closed: bool,
    pub note: String,
    pub field_dims: BTreeMap<i32, usize>,
    pub boundary_field_dims: BTreeMap<i32, usize>,
    pub el: GhostDims,
    pub el_boundary: GhostDims,
    pub moduli: GhostDims,
    pub moduli_symp: GhostDims,
    pub moduli_vertical: GhostDims,
    pub boundary_moduli: GhostDims,
    pub les: LesSummary,
    pub lefschetz: LefschetzReport,
    pub evolution_relation: EvolutionReport,
    pub vacua: VacuaReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vacua_via_transversal: Option<Result<TransversalReport, String>>,
    pub beta: BetaReport,
    pub regularity: RegularityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symplectic_equals_q_reduction: Option<bool>,
    pub verdicts: Verdicts,
}

/// The ghost-number-zero part of a theory and of its moduli.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GhostZeroSlice {
    pub sectors: Vec<String>,
    pub field_dim: usize,
    pub el_dim: usize,
    /// Dimension of the gauge distribution Q̂(ghost-one fields).
    pub gauge_dim: usize,
    pub moduli_dim: usize,
    pub boundary_field_dim: usize,
    /// Boundary solutions at ghost zero.
    pub boundary_el_dim: usize,
    /// Coisotropy of the ghost-zero boundary solutions inside the ghost-zero boundary
    /// fields, at cochain level and after passing to cohomology.
    pub boundary_el_coisotropic_cochain: bool,
    pub boundary_el_coisotropic_reduced: bool,
}

pub fn ghost_zero_slice(m: &Moduli) -> GhostZeroSlice {
    let t = m.theory;
    let sectors: Vec<String> = t
        .bulk
        .summands
        .iter()
        .enumerate()
        .filter(|(s, sm)| (0..sm.form_dims.len()).any(|k| sm.form_dims[k] > 0 && t.bulk.ghost_of_block(*s, k) == 0))
        .map(|(_, sm)| sm.name.clone())
        .collect();
    let el0 = m.el_basis(0);
    let gauge = if m.fields.complex.dim(-1) == 0 { 0 } else { m.q_block(-1).rank() };
    let bpos = m.bdry.positions(0).to_vec();
    let bel = m.bdry.complex.cocycles(0);
    let w0 = t.omega_bdry.select(&bpos, &bpos);
    let cochain = classify_subspace(&PairingForm::new(w0, Symmetry::GradedAntisymmetric), &bel).map(|c: Classification| c.coisotropic).unwrap_or(false);
    let h0 = Moduli::h(&m.hb, 0).dim();
    let reduced = {
        let form = PairingForm::new(m.p3(0), Symmetry::GradedAntisymmetric);
        let img = if h0 == 0 { Subspace::zero(0) } else { image_basis(&m.psi(0)).sum(&Subspace::span(h0, &bel_classes(m, &bel))) };
        form.matrix.rows() != form.matrix.cols() || classify_subspace(&form, &img).map(|c| c.coisotropic).unwrap_or(false)
    };
    GhostZeroSlice {
        sectors,
        field_dim: m.fields.positions(0).len(),
        el_dim: el0.dim(),
        gauge_dim: gauge,
        moduli_dim: Moduli::h(&m.hf, 0).dim(),
        boundary_field_dim: bpos.len(),
        boundary_el_dim: bel.dim(),
        boundary_el_coisotropic_cochain: cochain,
        boundary_el_coisotropic_reduced: reduced,
    }
}

fn bel_classes(m: &Moduli, bel: &Subspace) -> Vec<Vec<Rat>> {
    let h = Moduli::h(&m.hb, 0);
    bel.basis().iter().map(|v| h.class_of(v).expect("cocycles have classes")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;
    use crate::simplicial::tests::{circle, cylinder, file, interval, solid_torus, torus_grid, triangle};
    use crate::simplicial::OrientedComplex;
    use crate::theories::{build_abelian_bf, build_abelian_cs, build_electrodynamics, build_scalar, ed_formulas, extend_to_stratum, TheoryKind};

    fn path(len: i64) -> OrientedComplex {
        let tops: Vec<Vec<i64>> = (0..len).map(|i| vec![i, i + 1]).collect();
        let refs: Vec<&[i64]> = tops.iter().map(|v| v.as_slice()).collect();
        OrientedComplex::load(file(1, &refs)).unwrap()
    }

    fn disk() -> OrientedComplex {
        OrientedComplex::load(file(2, &[&[0, 1, 2], &[0, 2, 3], &[0, 3, 4], &[0, 4, 1]])).unwrap()
    }

    fn assert_all(r: &ModuliReport) {
        assert!(r.verdicts.all(), "{}: {:#?}", r.theory, r.verdicts);
    }

    #[test]
    fn cs_on_solid_torus() {
        let c = solid_torus();
        let t = build_abelian_cs(&c).unwrap();
        let m = Moduli::new(&t).unwrap();
        let r = m.report();
        assert_eq!(r.moduli.at(&[1, 0, -1, -2]), vec![1, 1, 0, 0]);
        assert_eq!(r.boundary_moduli.at(&[1, 0, -1]), vec![1, 2, 1]);
        assert_eq!(r.vacua.dims.total(), 0);
        assert!(r.evolution_relation.lagrangian);
        assert_eq!(r.evolution_relation.reduced_dims.at(&[1, 0, -1]), vec![1, 1, 0]);
        assert_all(&r);
    }

    #[test]
    fn bf_closed_torus_has_doubled_betti_numbers() {
        let t = build_abelian_bf(&torus_grid(3, 3)).unwrap();
        let r = Moduli::new(&t).unwrap().report();
        assert_eq!(r.moduli.total(), 8);
        assert_eq!(r.moduli_symp, r.moduli);
        assert_all(&r);
    }

    #[test]
    fn bf_with_boundary_passes_all_checks() {
        for c in [interval(), path(3), triangle(), disk(), cylinder()] {
            let t = build_abelian_bf(&c).unwrap();
            let r = Moduli::new(&t).unwrap().report();
            assert_all(&r);
        }
    }

    #[test]
    fn bf_cylinder_fibres_are_relative_cohomology() {
        let c = cylinder();
        let t = build_abelian_bf(&c).unwrap();
        let m = Moduli::new(&t).unwrap();
        let rel = c.relative_complex().relative;
        let h: Vec<usize> = (0..=2).map(|k| rel.cohomology(k).dim()).collect();
        // A-sector: form degree p at ghost 1 − p; B-sector (n = 2): ghost −p.
        let mut expected = BTreeMap::new();
        for p in 0..=2i32 {
            *expected.entry(1 - p).or_insert(0) += h[p as usize];
            *expected.entry(-p).or_insert(0) += h[p as usize];
        }
        assert_eq!(m.vertical_dims(), GhostDims(expected).nonzero());
    }

    #[test]
    fn scalar_vacua() {
        let t = build_scalar(&circle(), &rat(0)).unwrap();
        let r = Moduli::new(&t).unwrap().report();
        assert_eq!(r.vacua.dims.at(&[0, -1]), vec![1, 1]);
        assert_all(&r);
        let t = build_scalar(&path(3), &rat(0)).unwrap();
        let r = Moduli::new(&t).unwrap().report();
        assert_eq!(r.vacua.dims.total(), 0);
        assert_all(&r);
        let t = build_scalar(&circle(), &rat(1)).unwrap();
        let m = Moduli::new(&t).unwrap();
        let phi: Vec<usize> = (0..3).collect();
        let el = m.el_space();
        assert!(el.basis().iter().all(|v| phi.iter().all(|&i| v[i] == rat(0))));
        assert_eq!(m.vacua_dims().total(), 0);
        assert_all(&m.report());
    }

    #[test]
    fn electrodynamics_torus_is_regular_and_matches_formulas() {
        let c = torus_grid(3, 3);
        let t = build_electrodynamics(&c).unwrap();
        let m = Moduli::new(&t).unwrap();
        let r = m.report();
        assert_eq!(r.regularity.mode, RegularityMode::Literal);
        assert!(r.regularity.holds);
        let f = ed_formulas(&c);
        for g in [1, -1, -2] {
            assert_eq!(r.moduli.get(g), f.q_reduced[&g], "ghost {g}");
        }
        assert_eq!(r.moduli.get(0), f.q_reduced_a_sector);
        assert_eq!(r.symplectic_equals_q_reduction, Some(true));
        assert_all(&r);
    }

    #[test]
    fn electrodynamics_disk() {
        let c = disk();
        let t = build_electrodynamics(&c).unwrap();
        let r = Moduli::new(&t).unwrap().report();
        let f = ed_formulas(&c);
        for g in [1, -1, -2] {
            assert_eq!(r.moduli.get(g), f.q_reduced[&g], "moduli ghost {g}");
            assert_eq!(r.vacua.dims.get(g), f.fibre[&g], "vacua ghost {g}");
        }
        for g in [1, -1] {
            assert_eq!(r.evolution_relation.reduced_dims.get(g), f.reduced_evolution[&g], "L ghost {g}");
        }
        assert_all(&r);
    }

    #[test]
    fn truncated_q_breaks_regularity_with_a_witness() {
        let c = torus_grid(3, 3);
        let mut t = build_electrodynamics(&c).unwrap();
        let a = t.bulk.sector_index("A").unwrap();
        let cg = t.bulk.sector_index("c").unwrap();
        let rows: Vec<usize> = t.bulk.block(a, 0).collect();
        let cols: Vec<usize> = t.bulk.block(cg, 0).collect();
        for &r in &rows {
            for &col in &cols {
                t.q.set(r, col, rat(0));
            }
        }
        let reg = Moduli::new(&t).unwrap().regularity();
        assert!(!reg.holds);
        assert!(reg.checks.iter().any(|c| !c.holds && c.witness.is_some()));
    }

    #[test]
    fn strata_reports() {
        let kind = TheoryKind::AbelianBf { n: 3 };
        let t = extend_to_stratum(&kind, &torus_grid(3, 3)).unwrap();
        assert_all(&Moduli::new(&t).unwrap().report());
        let t = extend_to_stratum(&kind, &cylinder()).unwrap();
        assert_all(&Moduli::new(&t).unwrap().report());
    }

    #[test]
    fn transversal_reduction_and_negative_cases() {
        let t = build_abelian_cs(&solid_torus()).unwrap();
        let m = Moduli::new(&t).unwrap();
        let lam = m.transversal_lagrangian().unwrap();
        let r = m.vacua_via_transversal(&lam).unwrap();
        assert!(r.isomorphic_to_vacua);
        let l = m.reduced_evolution();
        assert!(matches!(m.vacua_via_transversal(&l), Err(ModuliError::NotTransversal(_))));
    }

    #[test]
    fn ghost_zero_slices() {
        let t = build_abelian_cs(&solid_torus()).unwrap();
        let m = Moduli::new(&t).unwrap();
        let s = ghost_zero_slice(&m);
        assert_eq!(s.moduli_dim, 1);
        assert!(s.boundary_el_coisotropic_reduced);
        let t = build_scalar(&circle(), &rat(0)).unwrap();
        let s = ghost_zero_slice(&Moduli::new(&t).unwrap());
        assert_eq!(s.sectors, vec!["phi".to_string(), "p".to_string()]);
        let t = build_abelian_bf(&torus_grid(3, 3)).unwrap();
        let s = ghost_zero_slice(&Moduli::new(&t).unwrap());
        assert_eq!(s.moduli_dim, 3);
    }

    #[test]
    fn lefschetz_on_point_is_vacuous() {
        let p = OrientedComplex::load(file(0, &[&[0]])).unwrap();
        let t = extend_to_stratum(&TheoryKind::AbelianBf { n: 3 }, &p).unwrap();
        let lf = Moduli::new(&t).unwrap().lefschetz();
        assert!(lf.nondegenerate && lf.dual_sequence_commutes);
    }
}
