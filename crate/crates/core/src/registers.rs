//! Labeled tensor spaces over quantum registers.
//!
//! A [`Space`] is a set of registers kept sorted by [`RegId`]; every labeled
//! object stores its amplitudes in that canonical order, so the tensor
//! product is commutative as a matter of data layout.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::linalg::{self, Matrix, Real, C};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegError {
    #[error("label clash: {0}")]
    LabelClash(String),
    #[error("lift error: {0}")]
    LiftError(String),
    #[error("rename changes the type of register {0:?}")]
    RenameTypeError(RegId),
    #[error("operator is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

pub type RegResult<T> = Result<T, RegError>;

/// Register identity: the declaration index of a quantum variable plus its
/// side tag (0 untagged, 1 or 2 for the two program copies).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegId {
    pub tag: u8,
    pub index: u32,
}

impl RegId {
    pub fn new(tag: u8, index: u32) -> Self {
        RegId { tag, index }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Reg {
    pub id: RegId,
    pub dim: usize,
}

impl Reg {
    pub fn new(id: RegId, dim: usize) -> Self {
        Reg { id, dim }
    }
}

/// A set of registers in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Space {
    regs: Vec<Reg>,
}

impl Space {
    pub fn new(mut regs: Vec<Reg>) -> RegResult<Self> {
        regs.sort_by_key(|r| r.id);
        for w in regs.windows(2) {
            if w[0].id == w[1].id {
                return Err(RegError::LabelClash(format!(
                    "register {:?} listed twice",
                    w[0].id
                )));
            }
        }
        if let Some(r) = regs.iter().find(|r| r.dim == 0) {
            return Err(RegError::Shape(format!(
                "register {:?} has dimension 0",
                r.id
            )));
        }
        Ok(Space { regs })
    }

    pub fn empty() -> Self {
        Space { regs: Vec::new() }
    }

    pub fn regs(&self) -> &[Reg] {
        &self.regs
    }

    pub fn dim(&self) -> usize {
        self.regs.iter().map(|r| r.dim).product()
    }

    pub fn contains(&self, id: RegId) -> bool {
        self.position(id).is_some()
    }

    pub fn position(&self, id: RegId) -> Option<usize> {
        self.regs.binary_search_by_key(&id, |r| r.id).ok()
    }

    pub fn is_subset(&self, other: &Space) -> bool {
        self.regs.iter().all(|r| other.regs.contains(r))
    }

    pub fn is_disjoint(&self, other: &Space) -> bool {
        self.regs.iter().all(|r| !other.contains(r.id))
    }

    pub fn union(&self, other: &Space) -> RegResult<Space> {
        if !self.is_disjoint(other) {
            return Err(RegError::LabelClash(
                "tensor factors share registers".into(),
            ));
        }
        Space::new(self.regs.iter().chain(&other.regs).copied().collect())
    }

    pub fn minus(&self, other: &Space) -> Space {
        Space {
            regs: self
                .regs
                .iter()
                .filter(|r| !other.contains(r.id))
                .copied()
                .collect(),
        }
    }

    pub fn ids(&self) -> Vec<RegId> {
        self.regs.iter().map(|r| r.id).collect()
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.regs.len()];
        for i in (0..self.regs.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.regs[i + 1].dim;
        }
        s
    }

    /// For every index of `self`, the index of its restriction to `sub`.
    pub fn projection_map(&self, sub: &Space) -> RegResult<Vec<usize>> {
        if !sub.is_subset(self) {
            return Err(RegError::LabelClash(
                "projection onto registers outside the space".into(),
            ));
        }
        Ok(self.list_projection(&sub.regs))
    }

    /// For every index of `self`, the index of the digits of `list` (in list order).
    fn list_projection(&self, list: &[Reg]) -> Vec<usize> {
        let n = self.dim();
        let own = self.strides();
        let pos: Vec<usize> = list
            .iter()
            .map(|r| self.position(r.id).expect("member"))
            .collect();
        let mut lstr = vec![1; list.len()];
        for i in (0..list.len().saturating_sub(1)).rev() {
            lstr[i] = lstr[i + 1] * list[i + 1].dim;
        }
        (0..n)
            .map(|i| {
                pos.iter()
                    .zip(&lstr)
                    .map(|(&p, &ls)| ((i / own[p]) % self.regs[p].dim) * ls)
                    .sum()
            })
            .collect()
    }

    /// Index in `self` of the joint assignment given per register.
    fn compose(&self, digits: &HashMap<RegId, usize>) -> usize {
        let s = self.strides();
        self.regs
            .iter()
            .zip(&s)
            .map(|(r, st)| digits[&r.id] * st)
            .sum()
    }

    fn digits(&self, i: usize) -> HashMap<RegId, usize> {
        let s = self.strides();
        self.regs
            .iter()
            .zip(&s)
            .map(|(r, st)| (r.id, (i / st) % r.dim))
            .collect()
    }

    /// Maps each index of `self` to the index obtained by renaming registers.
    fn rename_map(&self, sigma: &BTreeMap<RegId, RegId>) -> RegResult<(Space, Vec<usize>)> {
        let renamed: Vec<Reg> = self
            .regs
            .iter()
            .map(|r| Reg::new(*sigma.get(&r.id).unwrap_or(&r.id), r.dim))
            .collect();
        let target = Space::new(renamed)?;
        let map = (0..self.dim())
            .map(|i| {
                let d = self.digits(i);
                let nd: HashMap<RegId, usize> = d
                    .into_iter()
                    .map(|(k, v)| (*sigma.get(&k).unwrap_or(&k), v))
                    .collect();
                target.compose(&nd)
            })
            .collect();
        Ok((target, map))
    }

    fn check_list(&self, list: &[Reg]) -> RegResult<()> {
        for (i, r) in list.iter().enumerate() {
            if !self.regs.contains(r) {
                return Err(RegError::LiftError(format!(
                    "register {:?} not in ambient space",
                    r.id
                )));
            }
            if list[..i].iter().any(|s| s.id == r.id) {
                return Err(RegError::LiftError(format!("register {:?} repeated", r.id)));
            }
        }
        Ok(())
    }
}

pub fn list_dim(list: &[Reg]) -> usize {
    list.iter().map(|r| r.dim).product()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledVector<T: Real> {
    pub space: Space,
    pub amps: Vec<C<T>>,
}

impl<T: Real> LabeledVector<T> {
    pub fn new(space: Space, amps: Vec<C<T>>) -> RegResult<Self> {
        if amps.len() != space.dim() {
            return Err(RegError::Shape(format!(
                "{} amplitudes for a space of dimension {}",
                amps.len(),
                space.dim()
            )));
        }
        Ok(LabeledVector { space, amps })
    }

    pub fn basis(space: Space, index: usize) -> Self {
        let n = space.dim();
        LabeledVector {
            space,
            amps: linalg::basis_vector(n, index),
        }
    }

    /// Places `amps` (indexed by the digits of `list` in list order) on the
    /// registers of `list`, i.e. applies `U_Q`.
    pub fn on_list(list: &[Reg], amps: &[C<T>]) -> RegResult<Self> {
        let space = Space::new(list.to_vec())?;
        if amps.len() != space.dim() {
            return Err(RegError::LiftError(
                "vector dimension does not match register list".into(),
            ));
        }
        let proj = space.list_projection(list);
        let out = proj.iter().map(|&j| amps[j]).collect();
        Ok(LabeledVector { space, amps: out })
    }

    pub fn norm(&self) -> T {
        linalg::norm(&self.amps)
    }

    pub fn tensor(&self, other: &Self) -> RegResult<Self> {
        let space = self.space.union(&other.space)?;
        let pa = space.projection_map(&self.space)?;
        let pb = space.projection_map(&other.space)?;
        let amps = (0..space.dim())
            .map(|i| self.amps[pa[i]] * other.amps[pb[i]])
            .collect();
        Ok(LabeledVector { space, amps })
    }

    pub fn add(&self, other: &Self) -> RegResult<Self> {
        if self.space != other.space {
            return Err(RegError::LabelClash(
                "sum of vectors over different spaces".into(),
            ));
        }
        Ok(LabeledVector {
            space: self.space.clone(),
            amps: linalg::add(&self.amps, &other.amps),
        })
    }

    pub fn scale(&self, s: C<T>) -> Self {
        LabeledVector {
            space: self.space.clone(),
            amps: linalg::scale(&self.amps, s),
        }
    }

    pub fn rename(&self, sigma: &BTreeMap<RegId, RegId>) -> RegResult<Self> {
        check_sigma(&self.space, sigma)?;
        let (space, map) = self.space.rename_map(sigma)?;
        let mut amps = vec![C::zero(); space.dim()];
        for (i, &j) in map.iter().enumerate() {
            amps[j] = self.amps[i];
        }
        Ok(LabeledVector { space, amps })
    }

    pub fn distance(&self, other: &Self) -> T {
        if self.space != other.space {
            return T::infinity();
        }
        linalg::norm(&linalg::sub(&self.amps, &other.amps))
    }
}

fn check_sigma(space: &Space, sigma: &BTreeMap<RegId, RegId>) -> RegResult<()> {
    let mut seen = std::collections::BTreeSet::new();
    for r in space.regs() {
        let t = *sigma.get(&r.id).unwrap_or(&r.id);
        if !seen.insert(t) {
            return Err(RegError::LabelClash(format!(
                "renaming is not injective at {t:?}"
            )));
        }
    }
    Ok(())
}

/// Checks that a renaming preserves register dimensions; `dims` supplies the
/// dimension of every register that may appear as a target.
pub fn check_rename_types(
    sigma: &BTreeMap<RegId, RegId>,
    dims: &BTreeMap<RegId, usize>,
) -> RegResult<()> {
    for (a, b) in sigma {
        match (dims.get(a), dims.get(b)) {
            (Some(x), Some(y)) if x == y => {}
            _ => return Err(RegError::RenameTypeError(*a)),
        }
    }
    Ok(())
}

/// Operator between two labeled spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledOperator<T: Real> {
    pub from: Space,
    pub to: Space,
    pub mat: Matrix<T>,
}

impl<T: Real> LabeledOperator<T> {
    pub fn new(from: Space, to: Space, mat: Matrix<T>) -> RegResult<Self> {
        if mat.rows() != to.dim() || mat.cols() != from.dim() {
            return Err(RegError::Shape(
                "operator shape does not match its labels".into(),
            ));
        }
        Ok(LabeledOperator { from, to, mat })
    }

    pub fn identity(space: Space) -> Self {
        let n = space.dim();
        LabeledOperator {
            from: space.clone(),
            to: space,
            mat: Matrix::identity(n),
        }
    }

    pub fn adjoint(&self) -> Self {
        LabeledOperator {
            from: self.to.clone(),
            to: self.from.clone(),
            mat: self.mat.adjoint(),
        }
    }

    pub fn compose(&self, inner: &Self) -> RegResult<Self> {
        if inner.to != self.from {
            return Err(RegError::LabelClash(
                "composition of mismatched operators".into(),
            ));
        }
        Ok(LabeledOperator {
            from: inner.from.clone(),
            to: self.to.clone(),
            mat: self.mat.matmul(&inner.mat),
        })
    }

    pub fn apply(&self, v: &LabeledVector<T>) -> RegResult<LabeledVector<T>> {
        if v.space != self.from {
            return Err(RegError::LabelClash(
                "operator applied to a vector over other registers".into(),
            ));
        }
        Ok(LabeledVector {
            space: self.to.clone(),
            amps: self.mat.apply(&v.amps),
        })
    }

    /// `A ⊗ B` on disjoint register sets.
    pub fn tensor(&self, other: &Self) -> RegResult<Self> {
        let from = self.from.union(&other.from)?;
        let to = self.to.union(&other.to)?;
        let fa = from.projection_map(&self.from)?;
        let fb = from.projection_map(&other.from)?;
        let ta = to.projection_map(&self.to)?;
        let tb = to.projection_map(&other.to)?;
        let mat = Matrix::from_fn(to.dim(), from.dim(), |r, c| {
            self.mat[(ta[r], fa[c])] * other.mat[(tb[r], fb[c])]
        });
        Ok(LabeledOperator { from, to, mat })
    }

    pub fn rename(&self, sigma: &BTreeMap<RegId, RegId>) -> RegResult<Self> {
        check_sigma(&self.from, sigma)?;
        check_sigma(&self.to, sigma)?;
        let (from, fm) = self.from.rename_map(sigma)?;
        let (to, tm) = self.to.rename_map(sigma)?;
        let mut mat = Matrix::zeros(to.dim(), from.dim());
        for r in 0..self.mat.rows() {
            for c in 0..self.mat.cols() {
                mat[(tm[r], fm[c])] = self.mat[(r, c)];
            }
        }
        Ok(LabeledOperator { from, to, mat })
    }

    pub fn trace(&self) -> C<T> {
        self.mat.trace()
    }

    /// Partial trace of a square operator, keeping the registers in `keep`.
    pub fn partial_trace(&self, keep: &Space) -> RegResult<Self> {
        if self.from != self.to {
            return Err(RegError::Shape(
                "partial trace of a non-square operator".into(),
            ));
        }
        let mat = partial_trace_matrix(&self.mat, &self.from, keep)?;
        Ok(LabeledOperator {
            from: keep.clone(),
            to: keep.clone(),
            mat,
        })
    }

    /// Support of a positive semidefinite operator.
    pub fn support(&self, eps: T) -> RegResult<Subspace<T>> {
        if self.from != self.to {
            return Err(RegError::Shape("support of a non-square operator".into()));
        }
        support_matrix(&self.mat, eps).map(|basis| Subspace {
            space: self.from.clone(),
            basis,
        })
    }
}

pub(crate) fn partial_trace_matrix<T: Real>(
    m: &Matrix<T>,
    space: &Space,
    keep: &Space,
) -> RegResult<Matrix<T>> {
    if !keep.is_subset(space) {
        return Err(RegError::LabelClash(
            "kept registers are not part of the operator".into(),
        ));
    }
    let rest = space.minus(keep);
    let pk = space.projection_map(keep)?;
    let pr = space.projection_map(&rest)?;
    let mut out = Matrix::zeros(keep.dim(), keep.dim());
    let n = space.dim();
    for i in 0..n {
        for j in 0..n {
            if pr[i] == pr[j] {
                let v = m[(i, j)];
                if !v.is_zero() {
                    out[(pk[i], pk[j])] = out[(pk[i], pk[j])] + v;
                }
            }
        }
    }
    Ok(out)
}

pub(crate) fn support_matrix<T: Real>(m: &Matrix<T>, eps: T) -> RegResult<Vec<Vec<C<T>>>> {
    if !m.is_hermitian(eps.max(T::lit(1e-12)) * T::lit(m.rows().max(1) as f64)) {
        return Err(RegError::NotPositive(f64::NAN));
    }
    let (vals, vecs) = linalg::eigh(m);
    if let Some(&lo) = vals.first() {
        if lo < -eps {
            return Err(RegError::NotPositive(lo.to_f64().unwrap_or(f64::NAN)));
        }
    }
    Ok(vals
        .into_iter()
        .zip(vecs)
        .filter(|(l, _)| *l > eps)
        .map(|(_, v)| v)
        .collect())
}

/// `U_Q A U_Q† ⊗ id` on `ambient`.
pub fn lift_op<T: Real>(
    a: &Matrix<T>,
    list: &[Reg],
    ambient: &Space,
) -> RegResult<LabeledOperator<T>> {
    ambient.check_list(list)?;
    let dq = list_dim(list);
    if a.rows() != dq || a.cols() != dq {
        return Err(RegError::LiftError(format!(
            "operator is {}x{} but the registers have dimension {}",
            a.rows(),
            a.cols(),
            dq
        )));
    }
    let mat = lift_matrix(a, list, ambient);
    Ok(LabeledOperator {
        from: ambient.clone(),
        to: ambient.clone(),
        mat,
    })
}

fn lift_matrix<T: Real>(a: &Matrix<T>, list: &[Reg], ambient: &Space) -> Matrix<T> {
    let n = ambient.dim();
    let dq = list_dim(list);
    let proj = ambient.list_projection(list);
    // base index of each column with the list digits cleared
    let strides = ambient.strides();
    let pos: Vec<usize> = list
        .iter()
        .map(|r| ambient.position(r.id).expect("member"))
        .collect();
    let mut lstr = vec![1; list.len()];
    for i in (0..list.len().saturating_sub(1)).rev() {
        lstr[i] = lstr[i + 1] * list[i + 1].dim;
    }
    let offset = |q: usize| -> usize {
        pos.iter()
            .zip(&lstr)
            .zip(list)
            .map(|((&p, &ls), r)| ((q / ls) % r.dim) * strides[p])
            .sum()
    };
    let offsets: Vec<usize> = (0..dq).map(offset).collect();
    let mut m = Matrix::zeros(n, n);
    for col in 0..n {
        let qi = proj[col];
        let base = col - offsets[qi];
        for qo in 0..dq {
            let v = a[(qo, qi)];
            if !v.is_zero() {
                m[(base + offsets[qo], col)] = v;
            }
        }
    }
    m
}

/// `span{ψ}»Q`
pub fn lift_vector<T: Real>(v: &[C<T>], list: &[Reg], ambient: &Space) -> RegResult<Subspace<T>> {
    ambient.check_list(list)?;
    if v.len() != list_dim(list) {
        return Err(RegError::LiftError(
            "vector dimension does not match register list".into(),
        ));
    }
    lift_subspace_raw(&[v.to_vec()], list, ambient)
}

/// `S»Q := U_Q S ⊗ ℓ2[ambient \ Q]`; `basis` need not be orthonormal.
pub fn lift_subspace<T: Real>(
    vectors: &[Vec<C<T>>],
    list: &[Reg],
    ambient: &Space,
    eps: T,
) -> RegResult<Subspace<T>> {
    ambient.check_list(list)?;
    let dq = list_dim(list);
    if vectors.iter().any(|v| v.len() != dq) {
        return Err(RegError::LiftError(
            "subspace dimension does not match register list".into(),
        ));
    }
    let ortho = linalg::orthonormalize(vectors, eps);
    lift_subspace_raw(&ortho, list, ambient)
}

fn lift_subspace_raw<T: Real>(
    ortho: &[Vec<C<T>>],
    list: &[Reg],
    ambient: &Space,
) -> RegResult<Subspace<T>> {
    let qspace = Space::new(list.to_vec())?;
    let rest = ambient.minus(&qspace);
    let proj_q = ambient.list_projection(list);
    let proj_r = ambient.projection_map(&rest)?;
    let n = ambient.dim();
    let mut by_rest: Vec<Vec<usize>> = vec![Vec::new(); rest.dim()];
    for i in 0..n {
        by_rest[proj_r[i]].push(i);
    }
    let mut basis = Vec::with_capacity(ortho.len() * rest.dim());
    for s in ortho {
        for idxs in &by_rest {
            let mut v = vec![C::zero(); n];
            for &i in idxs {
                v[i] = s[proj_q[i]];
            }
            basis.push(v);
        }
    }
    Ok(Subspace {
        space: ambient.clone(),
        basis,
    })
}

/// Closed subspace of `ℓ2[space]` with an orthonormal basis.
#[derive(Debug, Clone)]
pub struct Subspace<T: Real> {
    space: Space,
    basis: Vec<Vec<C<T>>>,
}

impl<T: Real> Subspace<T> {
    pub fn span(space: Space, vectors: &[Vec<C<T>>], eps: T) -> RegResult<Self> {
        let n = space.dim();
        if vectors.iter().any(|v| v.len() != n) {
            return Err(RegError::Shape(
                "spanning vector of the wrong length".into(),
            ));
        }
        Ok(Subspace {
            space,
            basis: linalg::orthonormalize(vectors, eps),
        })
    }

    pub fn span_labeled(vectors: &[LabeledVector<T>], space: Space, eps: T) -> RegResult<Self> {
        if vectors.iter().any(|v| v.space != space) {
            return Err(RegError::LabelClash(
                "spanning vectors over different spaces".into(),
            ));
        }
        let raw: Vec<Vec<C<T>>> = vectors.iter().map(|v| v.amps.clone()).collect();
        Self::span(space, &raw, eps)
    }

    pub fn full(space: Space) -> Self {
        let n = space.dim();
        Subspace {
            space,
            basis: (0..n).map(|i| linalg::basis_vector(n, i)).collect(),
        }
    }

    pub fn zero(space: Space) -> Self {
        Subspace {
            space,
            basis: Vec::new(),
        }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn basis(&self) -> &[Vec<C<T>>] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.space.dim()
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    fn same_space(&self, other: &Self) -> RegResult<()> {
        if self.space != other.space {
            return Err(RegError::LabelClash(
                "subspaces over different registers".into(),
            ));
        }
        Ok(())
    }

    pub fn complement(&self) -> Self {
        if self.is_zero() {
            return Subspace::full(self.space.clone());
        }
        if self.is_full() {
            return Subspace::zero(self.space.clone());
        }
        Subspace {
            space: self.space.clone(),
            basis: linalg::complement(&self.basis, self.space.dim()),
        }
    }

    pub fn sum(&self, other: &Self, eps: T) -> RegResult<Self> {
        self.same_space(other)?;
        if self.is_full() || other.is_zero() {
            return Ok(self.clone());
        }
        if other.is_full() || self.is_zero() {
            return Ok(other.clone());
        }
        let extra = linalg::orthonormalize_with(
            &self.basis,
            &other.basis,
            eps,
            self.ambient_dim() - self.dim(),
        );
        let mut basis = self.basis.clone();
        basis.extend(extra);
        Ok(Subspace {
            space: self.space.clone(),
            basis,
        })
    }

    pub fn intersect(&self, other: &Self, eps: T) -> RegResult<Self> {
        self.same_space(other)?;
        if self.is_full() || other.is_zero() {
            return Ok(other.clone());
        }
        if other.is_full() || self.is_zero() {
            return Ok(self.clone());
        }
        Ok(self
            .complement()
            .sum(&other.complement(), eps)?
            .complement())
    }

    pub fn project(&self, v: &[C<T>]) -> Vec<C<T>> {
        let mut out = vec![C::zero(); v.len()];
        for q in &self.basis {
            let p = linalg::dot(q, v);
            for (o, x) in out.iter_mut().zip(q) {
                *o = *o + p * *x;
            }
        }
        out
    }

    /// Distance between `v` and its projection onto the subspace.
    pub fn residual(&self, v: &[C<T>]) -> T {
        linalg::norm(&linalg::sub(v, &self.project(v)))
    }

    pub fn contains(&self, v: &[C<T>], eps: T) -> bool {
        self.residual(v) <= eps
    }

    pub fn leq(&self, other: &Self, eps: T) -> RegResult<bool> {
        self.same_space(other)?;
        if other.is_full() || self.is_zero() {
            return Ok(true);
        }
        if self.dim() > other.dim() {
            return Ok(false);
        }
        Ok(self.basis.iter().all(|b| other.contains(b, eps)))
    }

    pub fn equals(&self, other: &Self, eps: T) -> RegResult<bool> {
        Ok(self.leq(other, eps)? && other.leq(self, eps)?)
    }

    pub fn projector(&self) -> Matrix<T> {
        let n = self.ambient_dim();
        let mut m = Matrix::zeros(n, n);
        for q in &self.basis {
            for r in 0..n {
                if q[r].is_zero() {
                    continue;
                }
                for c in 0..n {
                    m[(r, c)] = m[(r, c)] + q[r] * q[c].conj();
                }
            }
        }
        m
    }

    /// `A·S`
    pub fn apply_op(&self, a: &LabeledOperator<T>, eps: T) -> RegResult<Self> {
        if a.from != self.space {
            return Err(RegError::LabelClash(
                "operator domain differs from the subspace".into(),
            ));
        }
        let images: Vec<Vec<C<T>>> = self.basis.iter().map(|b| a.mat.apply(b)).collect();
        Subspace::span(a.to.clone(), &images, eps)
    }

    pub fn image(a: &LabeledOperator<T>, eps: T) -> Self {
        Subspace {
            space: a.to.clone(),
            basis: a.mat.range(eps),
        }
    }

    /// Subspace fixed by `a`, i.e. the kernel of `a − id`.
    pub fn fixed_space(a: &LabeledOperator<T>, eps: T) -> RegResult<Self> {
        if a.from != a.to {
            return Err(RegError::Shape(
                "fixed space of a non-square operator".into(),
            ));
        }
        let m = &a.mat - &Matrix::identity(a.from.dim());
        Ok(Subspace {
            space: a.from.clone(),
            basis: m.kernel(eps),
        })
    }

    /// `{φ ∈ ℓ2[V∖W] : φ ⊗ ψ ∈ A}`; the zero vector divides to the full space.
    pub fn divide(&self, psi: &LabeledVector<T>, eps: T) -> RegResult<Self> {
        if !psi.space.is_subset(&self.space) {
            return Err(RegError::LabelClash(
                "divisor lives on registers outside the subspace".into(),
            ));
        }
        let rest = self.space.minus(&psi.space);
        if psi.norm() <= eps {
            return Ok(Subspace::full(rest));
        }
        if self.is_full() {
            return Ok(Subspace::full(rest));
        }
        let pr = self.space.projection_map(&rest)?;
        let pw = self.space.projection_map(&psi.space)?;
        let n = self.space.dim();
        let m = rest.dim();
        // column j: (id - P_A)(e_j ⊗ ψ)
        let mut cols = Vec::with_capacity(m);
        let mut by_rest: Vec<Vec<usize>> = vec![Vec::new(); m];
        for i in 0..n {
            by_rest[pr[i]].push(i);
        }
        for idxs in &by_rest {
            let mut v = vec![C::zero(); n];
            for &i in idxs {
                v[i] = psi.amps[pw[i]];
            }
            let p = self.project(&v);
            cols.push(linalg::sub(&v, &p));
        }
        let k = Matrix::from_columns(n, &cols);
        Ok(Subspace {
            space: rest,
            basis: k.kernel(eps),
        })
    }

    /// `S ⊗ T` over disjoint register sets.
    pub fn tensor(&self, other: &Self) -> RegResult<Self> {
        let space = self.space.union(&other.space)?;
        let mut basis = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.basis {
            for b in &other.basis {
                let va = LabeledVector {
                    space: self.space.clone(),
                    amps: a.clone(),
                };
                let vb = LabeledVector {
                    space: other.space.clone(),
                    amps: b.clone(),
                };
                basis.push(va.tensor(&vb)?.amps);
            }
        }
        Ok(Subspace { space, basis })
    }

    /// `S ⊗ ℓ2[space ∖ labels(S)]`
    pub fn extend(&self, space: &Space) -> RegResult<Self> {
        if *space == self.space {
            return Ok(self.clone());
        }
        if !self.space.is_subset(space) {
            return Err(RegError::LabelClash(
                "extension to a space missing registers".into(),
            ));
        }
        self.tensor(&Subspace::full(space.minus(&self.space)))
    }

    pub fn rename(&self, sigma: &BTreeMap<RegId, RegId>) -> RegResult<Self> {
        check_sigma(&self.space, sigma)?;
        let (space, map) = self.space.rename_map(sigma)?;
        let basis = self
            .basis
            .iter()
            .map(|b| {
                let mut v = vec![C::zero(); space.dim()];
                for (i, &j) in map.iter().enumerate() {
                    v[j] = b[i];
                }
                v
            })
            .collect();
        Ok(Subspace { space, basis })
    }
}

/// Classical-quantum operator: a map from classical keys to operators on
/// a fixed quantum space. Absent keys stand for zero blocks.
#[derive(Debug, Clone)]
pub struct CqState<K: Ord + Clone, T: Real> {
    pub space: Space,
    pub blocks: BTreeMap<K, Matrix<T>>,
}

impl<K: Ord + Clone, T: Real> CqState<K, T> {
    pub fn new(space: Space) -> Self {
        CqState {
            space,
            blocks: BTreeMap::new(),
        }
    }

    pub fn point(space: Space, key: K, rho: Matrix<T>) -> RegResult<Self> {
        let mut s = Self::new(space);
        s.add_block(key, rho)?;
        Ok(s)
    }

    pub fn add_block(&mut self, key: K, rho: Matrix<T>) -> RegResult<()> {
        let n = self.space.dim();
        if rho.rows() != n || rho.cols() != n {
            return Err(RegError::Shape(format!(
                "block of size {} in a space of dimension {n}",
                rho.rows()
            )));
        }
        match self.blocks.get_mut(&key) {
            Some(b) => *b = &*b + &rho,
            None => {
                self.blocks.insert(key, rho);
            }
        }
        Ok(())
    }

    pub fn add(&mut self, other: &Self) -> RegResult<()> {
        if other.space != self.space {
            return Err(RegError::LabelClash(
                "sum of cq-operators over different registers".into(),
            ));
        }
        for (k, v) in &other.blocks {
            self.add_block(k.clone(), v.clone())?;
        }
        Ok(())
    }

    pub fn trace(&self) -> T {
        self.blocks
            .values()
            .fold(T::zero(), |acc, m| acc + m.trace().re)
    }

    pub fn block_trace(&self, key: &K) -> T {
        self.blocks.get(key).map_or(T::zero(), |m| m.trace().re)
    }

    pub fn scale(&self, s: T) -> Self {
        CqState {
            space: self.space.clone(),
            blocks: self
                .blocks
                .iter()
                .map(|(k, v)| (k.clone(), v.scale_real(s)))
                .collect(),
        }
    }

    /// Drops blocks whose trace is at most `tol`.
    pub fn prune(&mut self, tol: T) {
        self.blocks
            .retain(|_, m| m.trace().re.abs() > tol || m.frobenius() > tol);
    }

    /// Keeps only the blocks whose key satisfies `pred`.
    pub fn restrict(&self, mut pred: impl FnMut(&K) -> bool) -> Self {
        CqState {
            space: self.space.clone(),
            blocks: self
                .blocks
                .iter()
                .filter(|(k, _)| pred(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// Quantum partial trace onto `keep` together with a marginalization of
    /// the classical keys through `key_map`.
    pub fn partial_trace<K2: Ord + Clone>(
        &self,
        keep: &Space,
        mut key_map: impl FnMut(&K) -> K2,
    ) -> RegResult<CqState<K2, T>> {
        let mut out = CqState::new(keep.clone());
        for (k, m) in &self.blocks {
            let pt = partial_trace_matrix(m, &self.space, keep)?;
            out.add_block(key_map(k), pt)?;
        }
        Ok(out)
    }

    /// `ρ ⊗ σ` with a quantum operator on disjoint registers.
    pub fn tensor_op(&self, sigma: &LabeledOperator<T>) -> RegResult<Self> {
        let mut out = CqState::new(self.space.union(&sigma.from)?);
        for (k, m) in &self.blocks {
            let op = LabeledOperator {
                from: self.space.clone(),
                to: self.space.clone(),
                mat: m.clone(),
            };
            out.add_block(k.clone(), op.tensor(sigma)?.mat)?;
        }
        Ok(out)
    }

    pub fn rename(&self, sigma: &BTreeMap<RegId, RegId>) -> RegResult<Self> {
        let mut blocks = BTreeMap::new();
        let mut space = self.space.clone();
        for (k, m) in &self.blocks {
            let op = LabeledOperator {
                from: self.space.clone(),
                to: self.space.clone(),
                mat: m.clone(),
            }
            .rename(sigma)?;
            space = op.from.clone();
            blocks.insert(k.clone(), op.mat);
        }
        if blocks.is_empty() {
            space = self.space.rename_map(sigma)?.0;
        }
        Ok(CqState { space, blocks })
    }

    /// Largest distance between corresponding blocks.
    pub fn distance(&self, other: &Self) -> T {
        if self.space != other.space {
            return T::infinity();
        }
        let zero = Matrix::zeros(self.space.dim(), self.space.dim());
        let mut worst = T::zero();
        for k in self.blocks.keys().chain(other.blocks.keys()) {
            let a = self.blocks.get(k).unwrap_or(&zero);
            let b = other.blocks.get(k).unwrap_or(&zero);
            worst = worst.max(a.dist(b));
        }
        worst
    }

    /// Every block is Hermitian with eigenvalues `≥ −eps`.
    pub fn is_positive(&self, eps: T) -> bool {
        self.blocks.values().all(|m| support_matrix(m, eps).is_ok())
    }
}

/// `|ψ⟩⟨ψ|`
pub fn pure<T: Real>(v: &[C<T>]) -> Matrix<T> {
    Matrix::outer(v, v)
}

pub fn complex<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

pub fn unit<T: Real>() -> C<T> {
    C::one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn q(i: u32) -> Reg {
        Reg::new(RegId::new(0, i), 2)
    }

    fn ket(bits: &[usize]) -> LabeledVector<f64> {
        let mut v: Option<LabeledVector<f64>> = None;
        for (i, &b) in bits.iter().enumerate() {
            let s = Space::new(vec![q(i as u32)]).unwrap();
            let k = LabeledVector::basis(s, b);
            v = Some(match v {
                None => k,
                Some(acc) => acc.tensor(&k).unwrap(),
            });
        }
        v.unwrap()
    }

    #[test]
    fn tensor_is_commutative() {
        let a = ket(&[0]);
        let b = LabeledVector::basis(Space::new(vec![q(1)]).unwrap(), 1);
        assert_eq!(a.tensor(&b).unwrap(), b.tensor(&a).unwrap());
        assert_eq!(
            a.tensor(&b).unwrap().amps,
            linalg::basis_vector::<f64>(4, 1)
        );
    }

    #[test]
    fn rename_swaps_labels() {
        let v = ket(&[0, 1]);
        let sigma: BTreeMap<RegId, RegId> = [
            (RegId::new(0, 0), RegId::new(0, 1)),
            (RegId::new(0, 1), RegId::new(0, 0)),
        ]
        .into();
        assert_eq!(v.rename(&sigma).unwrap(), ket(&[1, 0]));
    }

    #[test]
    fn lift_hadamard() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = Matrix::from_rows(&[vec![c(s, 0.0), c(s, 0.0)], vec![c(s, 0.0), c(-s, 0.0)]]);
        let amb = Space::new(vec![q(0), q(1)]).unwrap();
        let op = lift_op(&h, &[q(0)], &amb).unwrap();
        let out = op.apply(&ket(&[0, 0])).unwrap();
        assert!((out.amps[0].re - s).abs() < 1e-12 && (out.amps[2].re - s).abs() < 1e-12);
    }

    #[test]
    fn divide_of_product() {
        let amb = Space::new(vec![q(0), q(1)]).unwrap();
        let b = Subspace::span(
            Space::new(vec![q(0)]).unwrap(),
            &[linalg::basis_vector(2, 1)],
            1e-9,
        )
        .unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = LabeledVector::new(Space::new(vec![q(1)]).unwrap(), vec![c(s, 0.0), c(0.0, s)])
            .unwrap();
        let a = b
            .tensor(&Subspace::span(psi.space.clone(), &[psi.amps.clone()], 1e-9).unwrap())
            .unwrap();
        assert_eq!(a.space(), &amb);
        let d = a.divide(&psi, 1e-9).unwrap();
        assert!(d.equals(&b, 1e-9).unwrap());
    }
}
