//! Exact polyhedral engine for the Newton polyhedron `Γ₊(f)`, the Newton
//! boundary `Γ(f)` and the non-compact Newton boundary `Γ_nc(f)`.
//!
//! Facets of `Γ₊ = conv(support) + ℝ₊ⁿ` are found from integer cofactor
//! normals; every other face is an intersection of facets. A face is stored
//! as the set of support points on it together with its recession
//! directions `D ⊆ {1..n}`, so `Δ = conv(points) + cone{e_i : i ∈ D}`.

mod exact;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::{Error, MixedPolynomial, Result, Subset};

/// Default bound on `n` for full face-lattice enumeration.
pub const DEFAULT_DIMENSION_CAP: usize = 6;

/// Bound on `n` for subspace classification, which visits `2ⁿ` subsets.
pub const SUBSPACE_CAP: usize = 20;

pub type Point = Vec<i64>;

/// Point subset of the support, as a bitset over support indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct PointSet(Vec<u64>);

impl PointSet {
    fn empty(len: usize) -> Self {
        PointSet(vec![0; len.div_ceil(64).max(1)])
    }

    fn full(len: usize) -> Self {
        let mut s = Self::empty(len);
        for i in 0..len {
            s.insert(i);
        }
        s
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn contains(&self, i: usize) -> bool {
        self.0[i / 64] & (1 << (i % 64)) != 0
    }

    fn and(&self, other: &PointSet) -> PointSet {
        PointSet(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn is_subset_of(&self, other: &PointSet) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.0.len() * 64).filter(|&i| self.contains(i))
    }
}

#[derive(Clone, Debug)]
struct Facet {
    normal: Vec<u64>,
    points: PointSet,
    dirs: Subset,
}

/// `Γ₊(f)`: its support, its vertices and (internally) its facets.
#[derive(Clone, Debug, Serialize)]
pub struct NewtonPolyhedron {
    pub n: usize,
    /// Distinct lattice points `ν + μ`, sorted.
    pub support: Vec<Point>,
    /// Vertices of `Γ₊`, sorted.
    pub vertices: Vec<Point>,
    #[serde(skip)]
    facets: Vec<Facet>,
}

/// A face `Δ_w` of `Γ₊`, with a weight certificate `w`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Face {
    pub weight: Vec<u64>,
    /// Minimal value `d_w` of `l_w` on `Γ₊`.
    pub d: u64,
    /// Support points on the face, sorted.
    pub points: Vec<Point>,
    /// Vertices of `Γ₊` on the face, sorted.
    pub vertices: Vec<Point>,
    pub dim: usize,
    pub compact: bool,
    /// Non-compact direction `I_Δ = {i : w_i = 0}`; empty when compact.
    pub direction: Subset,
}

impl Face {
    pub fn contains_point(&self, p: &[i64]) -> bool {
        self.points.binary_search_by(|q| q.as_slice().cmp(p)).is_ok()
    }

    fn sort_key(&self) -> (usize, Point, Vec<Point>, u64) {
        (
            self.dim,
            self.points[0].clone(),
            self.points.clone(),
            self.direction.bits(),
        )
    }
}

/// Compact faces of `Γ₊` together with the essential non-compact faces.
#[derive(Clone, Debug, Serialize)]
pub struct NcBoundary {
    pub compact_faces: Vec<Face>,
    pub essential_noncompact: Vec<Face>,
    /// Non-compact faces that fail the vanishing condition.
    pub rejected_noncompact: Vec<Face>,
    pub diagnostics: Vec<String>,
}

impl NcBoundary {
    pub fn vertices(&self) -> impl Iterator<Item = &Face> {
        self.compact_faces.iter().filter(|f| f.dim == 0)
    }
}

/// Partition of the subsets of `{1..n}` into vanishing and non-vanishing
/// coordinate subspaces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubspaceClassification {
    pub vanishing: Vec<Subset>,
    pub nonvanishing: Vec<Subset>,
}

fn dot(w: &[u64], p: &[i64]) -> Result<u64> {
    w.iter().zip(p).try_fold(0u64, |acc, (&wi, &pi)| {
        wi.checked_mul(pi as u64)
            .and_then(|x| acc.checked_add(x))
            .ok_or(Error::ArithmeticOverflow)
    })
}

/// Points `p` of `pts` not dominated by another point `q ≤ p`, `q ≠ p`.
fn minimal_points(pts: &[Point]) -> Vec<usize> {
    (0..pts.len())
        .filter(|&i| {
            !pts.iter().enumerate().any(|(j, q)| {
                j != i && q.iter().zip(&pts[i]).all(|(a, b)| a <= b)
            })
        })
        .collect()
}

fn for_each_combination<F: FnMut(&[usize]) -> Result<()>>(
    m: usize,
    k: usize,
    f: &mut F,
) -> Result<()> {
    let mut idx: Vec<usize> = (0..k).collect();
    if k > m {
        return Ok(());
    }
    loop {
        f(&idx)?;
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            if idx[i] != i + m - k {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn affine_dim(n: usize, points: &[&Point], dirs: Subset) -> Result<usize> {
    let p0 = points[0];
    let mut rows: Vec<Vec<i128>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(p0).map(|(a, b)| (*a - *b) as i128).collect())
        .collect();
    for i in dirs.iter() {
        let mut e = vec![0i128; n];
        e[i] = 1;
        rows.push(e);
    }
    if rows.is_empty() {
        return Ok(0);
    }
    exact::rank(rows)
}

fn primitive(w: Vec<u64>) -> Vec<u64> {
    let g = w.iter().fold(0i128, |acc, &x| exact::gcd(acc, x as i128)) as u64;
    if g <= 1 {
        w
    } else {
        w.into_iter().map(|x| x / g).collect()
    }
}

/// Builds `Γ₊(f)`.
pub fn build_polyhedron(f: &MixedPolynomial) -> Result<NewtonPolyhedron> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    NewtonPolyhedron::from_support(f.n(), f.support())
}

impl NewtonPolyhedron {
    /// Builds `conv(points) + ℝ₊ⁿ` for non-negative integer points.
    pub fn from_support(n: usize, mut support: Vec<Point>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::ZeroPolynomial);
        }
        support.sort();
        support.dedup();
        if let Some(p) = support.iter().find(|p| p.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p.len(),
            });
        }
        let facets = enumerate_facets(n, &support)?;
        let mut vertices = Vec::new();
        for i in minimal_points(&support) {
            let mut pts = PointSet::full(support.len());
            let mut dirs = Subset::full(n);
            for fc in facets.iter().filter(|fc| fc.points.contains(i)) {
                pts = pts.and(&fc.points);
                dirs = dirs.intersection(fc.dirs);
            }
            if dirs.is_empty() && pts.iter().eq(std::iter::once(i)) {
                vertices.push(support[i].clone());
            }
        }
        vertices.sort();
        Ok(NewtonPolyhedron {
            n,
            support,
            vertices,
            facets,
        })
    }

    fn make_face(&self, weight: Vec<u64>, pts: &PointSet, dirs: Subset) -> Result<Face> {
        let d = dot(&weight, &self.support[pts.iter().next().ok_or(Error::NotAFace)?])?;
        let points: Vec<Point> = pts.iter().map(|i| self.support[i].clone()).collect();
        let refs: Vec<&Point> = points.iter().collect();
        let dim = affine_dim(self.n, &refs, dirs)?;
        let vertices = points
            .iter()
            .filter(|p| self.vertices.binary_search(p).is_ok())
            .cloned()
            .collect();
        Ok(Face {
            weight,
            d,
            points,
            vertices,
            dim,
            compact: dirs.is_empty(),
            direction: dirs,
        })
    }

    /// Every proper face of `Γ₊`, sorted by `(dim, lex-min point)`.
    ///
    /// Fails with [`Error::DimensionCap`] when `n > cap`.
    pub fn faces(&self, cap: usize) -> Result<Vec<Face>> {
        if self.n > cap {
            return Err(Error::DimensionCap { n: self.n, cap });
        }
        let mut seen: BTreeSet<(PointSet, Subset)> = self
            .facets
            .iter()
            .map(|f| (f.points.clone(), f.dirs))
            .collect();
        let mut queue: Vec<(PointSet, Subset)> = seen.iter().cloned().collect();
        while let Some((pts, dirs)) = queue.pop() {
            for fc in &self.facets {
                let p = pts.and(&fc.points);
                let d = dirs.intersection(fc.dirs);
                if p.is_empty() {
                    continue;
                }
                let key = (p, d);
                if !seen.contains(&key) {
                    seen.insert(key.clone());
                    queue.push(key);
                }
            }
        }
        let mut faces = Vec::with_capacity(seen.len());
        for (pts, dirs) in &seen {
            let mut w = vec![0u64; self.n];
            for fc in &self.facets {
                if pts.is_subset_of(&fc.points) && dirs.is_subset_of(fc.dirs) {
                    for (wi, ni) in w.iter_mut().zip(&fc.normal) {
                        *wi = wi.checked_add(*ni).ok_or(Error::ArithmeticOverflow)?;
                    }
                }
            }
            faces.push(self.make_face(primitive(w), pts, *dirs)?);
        }
        faces.sort_by_key(Face::sort_key);
        Ok(faces)
    }
}

fn enumerate_facets(n: usize, support: &[Point]) -> Result<Vec<Facet>> {
    let mins = minimal_points(support);
    let mut normals: BTreeSet<Vec<u64>> = BTreeSet::new();
    if n == 1 {
        normals.insert(vec![1]);
    } else {
        let mut rejected: BTreeSet<Vec<i128>> = BTreeSet::new();
        for &i0 in &mins {
            let p0 = &support[i0];
            let mut gens: Vec<Vec<i128>> = mins
                .iter()
                .filter(|&&j| j != i0)
                .map(|&j| {
                    support[j]
                        .iter()
                        .zip(p0)
                        .map(|(a, b)| (*a - *b) as i128)
                        .collect()
                })
                .collect();
            for i in 0..n {
                let mut e = vec![0i128; n];
                e[i] = 1;
                gens.push(e);
            }
            for_each_combination(gens.len(), n - 1, &mut |idx| {
                let rows: Vec<Vec<i128>> = idx.iter().map(|&k| gens[k].clone()).collect();
                let Some(mut w) = exact::normal(&rows)? else {
                    return Ok(());
                };
                if w.iter().all(|&x| x <= 0) {
                    w.iter_mut().for_each(|x| *x = -*x);
                }
                if w.iter().any(|&x| x < 0) || rejected.contains(&w) {
                    return Ok(());
                }
                let wu: Vec<u64> = w.iter().map(|&x| x as u64).collect();
                if normals.contains(&wu) {
                    return Ok(());
                }
                // A supporting normal is a facet normal iff Δ_w is (n−1)-dimensional.
                let vals: Vec<u64> = mins.iter().map(|&j| dot(&wu, &support[j])).collect::<Result<_>>()?;
                let d = *vals.iter().min().unwrap();
                let on: Vec<&Point> = mins
                    .iter()
                    .zip(&vals)
                    .filter(|&(_, &v)| v == d)
                    .map(|(&j, _)| &support[j])
                    .collect();
                let dirs = Subset::from_indices((0..n).filter(|&i| wu[i] == 0));
                if affine_dim(n, &on, dirs)? == n - 1 {
                    normals.insert(wu);
                } else {
                    rejected.insert(w);
                }
                Ok(())
            })?;
        }
    }
    let mut facets = Vec::with_capacity(normals.len());
    for w in normals {
        let vals: Vec<u64> = support.iter().map(|p| dot(&w, p)).collect::<Result<_>>()?;
        let d = *vals.iter().min().unwrap();
        let mut pts = PointSet::empty(support.len());
        for (i, &v) in vals.iter().enumerate() {
            if v == d {
                pts.insert(i);
            }
        }
        let dirs = Subset::from_indices((0..n).filter(|&i| w[i] == 0));
        facets.push(Facet {
            normal: w,
            points: pts,
            dirs,
        });
    }
    Ok(facets)
}

/// The face `Δ_w` on which `l_w` attains its minimum over `Γ₊`.
pub fn face_of_weight(p: &NewtonPolyhedron, w: &[u64]) -> Result<Face> {
    if w.len() != p.n {
        return Err(Error::DimensionMismatch {
            expected: p.n,
            got: w.len(),
        });
    }
    if w.iter().all(|&x| x == 0) {
        return Err(Error::InvalidWeight("all weights are zero".into()));
    }
    let vals: Vec<u64> = p.support.iter().map(|q| dot(w, q)).collect::<Result<_>>()?;
    let d = *vals.iter().min().unwrap();
    let mut pts = PointSet::empty(p.support.len());
    for (i, &v) in vals.iter().enumerate() {
        if v == d {
            pts.insert(i);
        }
    }
    let dirs = Subset::from_indices((0..p.n).filter(|&i| w[i] == 0));
    p.make_face(w.to_vec(), &pts, dirs)
}

/// `Γ(f)` (all compact faces) plus the essential non-compact faces.
pub fn enumerate_nc_boundary(f: &MixedPolynomial) -> Result<NcBoundary> {
    enumerate_nc_boundary_with_cap(f, DEFAULT_DIMENSION_CAP)
}

pub fn enumerate_nc_boundary_with_cap(f: &MixedPolynomial, cap: usize) -> Result<NcBoundary> {
    let poly = build_polyhedron(f)?;
    let faces = poly.faces(cap)?;
    let mut out = NcBoundary {
        compact_faces: Vec::new(),
        essential_noncompact: Vec::new(),
        rejected_noncompact: Vec::new(),
        diagnostics: Vec::new(),
    };
    // I_Δ must not depend on the certificate: collect per point set.
    let mut directions: BTreeMap<Vec<Point>, Subset> = BTreeMap::new();
    for face in faces {
        if face.compact {
            out.compact_faces.push(face);
            continue;
        }
        if let Some(prev) = directions.insert(face.points.clone(), face.direction) {
            if prev != face.direction {
                out.diagnostics.push(format!(
                    "non-compact direction differs between certificates of the face through {:?}",
                    face.points[0]
                ));
            }
        }
        let vanishes = !poly
            .support
            .iter()
            .any(|p| Subset::from_indices((0..p.len()).filter(|&i| p[i] != 0)).is_subset_of(face.direction));
        if !vanishes {
            out.rejected_noncompact.push(face);
            continue;
        }
        // Condition (iii): α + ℝ₊e_i ⊆ Δ for i ∈ I_w holds iff w_i = 0 and
        // e_i is a recession direction of the face.
        let zero_weights = Subset::from_indices((0..poly.n).filter(|&i| face.weight[i] == 0));
        if zero_weights != face.direction {
            out.diagnostics.push(format!(
                "half-line condition fails for the essential face through {:?}",
                face.points[0]
            ));
            continue;
        }
        out.essential_noncompact.push(face);
    }
    Ok(out)
}

/// `f_Δ`: the terms of `f` whose lattice point lies on `Δ`.
pub fn face_function(f: &MixedPolynomial, face: &Face) -> Result<MixedPolynomial> {
    let poly = build_polyhedron(f)?;
    let check = face_of_weight(&poly, &face.weight)?;
    if check.points != face.points || check.direction != face.direction {
        return Err(Error::NotAFace);
    }
    Ok(f.filter_support(|p| face.contains_point(p)))
}

/// `𝓘_v(f)` and `𝓘_nv(f)`, each listed in increasing bitmask order.
pub fn classify_subspaces(f: &MixedPolynomial) -> Result<SubspaceClassification> {
    let n = f.n();
    if n > SUBSPACE_CAP {
        return Err(Error::DimensionCap {
            n,
            cap: SUBSPACE_CAP,
        });
    }
    let supports: Vec<Subset> = f.terms().map(|(k, _)| k.variables()).collect();
    let mut out = SubspaceClassification {
        vanishing: Vec::new(),
        nonvanishing: Vec::new(),
    };
    for s in Subset::power_set(n) {
        if supports.iter().any(|v| v.is_subset_of(s)) {
            out.nonvanishing.push(s);
        } else {
            out.vanishing.push(s);
        }
    }
    Ok(out)
}

/// True when `Γ(f)` meets every coordinate axis.
pub fn is_convenient(f: &MixedPolynomial) -> bool {
    (0..f.n()).all(|i| {
        f.support()
            .iter()
            .any(|p| p[i] > 0 && p.iter().enumerate().all(|(j, &x)| j == i || x == 0))
    })
}
