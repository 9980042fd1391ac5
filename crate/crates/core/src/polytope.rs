//! Delzant polytopes described by their facets.
//!
//! A polytope is stored as a list of facets `ℓ_r(x) = ⟨x, v_r⟩ + c_r` with
//! primitive integer normals `v_r` pointing *into* the polytope, so that
//! `P = {x : ℓ_r(x) ≥ 0 for all r}`. Offsets are rational. Vertices, the
//! Delzant condition and lattice membership are all decided in exact
//! arithmetic; floating point only enters when a facet function is evaluated
//! at a real point.

use std::collections::HashSet;
use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use serde_json::Value;
use thiserror::Error;

type Q = Ratio<i128>;

#[derive(Debug, Error)]
pub enum PolytopeError {
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("facet {facet}: normal has {found} entries, expected {expected}")]
    NormalLength {
        facet: usize,
        expected: usize,
        found: usize,
    },
    #[error("facet {0}: normal is not primitive")]
    NotPrimitive(usize),
    #[error("facet {0}: offset has zero denominator")]
    BadOffset(usize),
    #[error("polytope is unbounded")]
    Unbounded,
    #[error("polytope has empty interior")]
    EmptyInterior,
    #[error("vertex {vertex:?} violates the Delzant condition: {reason}")]
    NotDelzant { vertex: Vec<f64>, reason: String },
    #[error("level must be at least 1, got {0}")]
    BadLevel(i64),
    #[error("point {point:?} lies outside the polytope (facet {facet} value {value})")]
    OutsidePolytope {
        point: Vec<f64>,
        facet: usize,
        value: f64,
    },
    #[error("operation not supported in dimension {0}")]
    UnsupportedDimension(usize),
    #[error("unknown polytope preset `{0}`")]
    UnknownPreset(String),
    #[error("invalid polytope document: {0}")]
    Parse(String),
}

/// One facet: `ℓ(x) = ⟨x, normal⟩ + offset`, nonnegative on the polytope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Facet {
    pub normal: Vec<i64>,
    pub offset: Ratio<i64>,
}

impl Facet {
    pub fn new(normal: Vec<i64>, offset: Ratio<i64>) -> Self {
        Facet { normal, offset }
    }

    pub fn integer(normal: Vec<i64>, offset: i64) -> Self {
        Facet {
            normal,
            offset: Ratio::from_integer(offset),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let dot: f64 = self
            .normal
            .iter()
            .zip(x)
            .map(|(&v, &xi)| v as f64 * xi)
            .sum();
        dot + *self.offset.numer() as f64 / *self.offset.denom() as f64
    }

    /// `k · ℓ(α/k)` as an exact rational; nonnegative iff `α ∈ kP` w.r.t. this facet.
    fn scaled_value(&self, alpha: &[i64], k: i64) -> Q {
        let dot: i128 = self
            .normal
            .iter()
            .zip(alpha)
            .map(|(&v, &a)| v as i128 * a as i128)
            .sum();
        Q::from_integer(dot) + q_from(self.offset) * Q::from_integer(k as i128)
    }

    fn exact_value(&self, x: &[Q]) -> Q {
        let mut acc = q_from(self.offset);
        for (&v, xi) in self.normal.iter().zip(x) {
            acc += *xi * Q::from_integer(v as i128);
        }
        acc
    }
}

fn q_from(r: Ratio<i64>) -> Q {
    Q::new(*r.numer() as i128, *r.denom() as i128)
}

fn q_to_f64(q: &Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// A vertex of the polytope with the facets that meet there.
#[derive(Debug, Clone)]
pub struct Vertex {
    exact: Vec<Q>,
    pub coords: Vec<f64>,
    pub active: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct DelzantPolytope {
    dim: usize,
    facets: Vec<Facet>,
    vertices: Vec<Vertex>,
    name: Option<String>,
}

impl PartialEq for DelzantPolytope {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.facets == other.facets
    }
}

impl fmt::Display for DelzantPolytope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.name {
            Some(n) => write!(f, "{n}"),
            None => write!(f, "polytope(dim={}, facets={})", self.dim, self.facets.len()),
        }
    }
}

impl DelzantPolytope {
    pub fn new(dim: usize, facets: Vec<Facet>) -> Result<Self, PolytopeError> {
        if dim == 0 {
            return Err(PolytopeError::ZeroDimension);
        }
        for (r, f) in facets.iter().enumerate() {
            if f.normal.len() != dim {
                return Err(PolytopeError::NormalLength {
                    facet: r,
                    expected: dim,
                    found: f.normal.len(),
                });
            }
            let g = f.normal.iter().fold(0i64, |g, &v| g.gcd(&v));
            if g != 1 {
                return Err(PolytopeError::NotPrimitive(r));
            }
        }
        if facets.len() < dim + 1 {
            return Err(PolytopeError::Unbounded);
        }
        check_bounded(dim, &facets)?;

        let vertices = enumerate_vertices(dim, &facets);
        if vertices.len() < dim + 1 {
            return Err(PolytopeError::EmptyInterior);
        }
        // Every facet must actually support the polytope along a face of full
        // dimension; a polytope with empty interior has vertices where more than
        // `dim` facets are active or whose normals are dependent.
        for v in &vertices {
            if v.active.len() != dim {
                return Err(PolytopeError::NotDelzant {
                    vertex: v.coords.clone(),
                    reason: format!("{} facets meet, expected {dim}", v.active.len()),
                });
            }
            let rows: Vec<Vec<i64>> = v.active.iter().map(|&r| facets[r].normal.clone()).collect();
            let det = integer_det(&rows);
            if det.abs() != 1 {
                return Err(PolytopeError::NotDelzant {
                    vertex: v.coords.clone(),
                    reason: format!("normals have determinant {det}"),
                });
            }
        }
        Ok(DelzantPolytope {
            dim,
            facets,
            vertices,
            name: None,
        })
    }

    fn named(mut self, name: &str) -> Self {
        self.name = Some(name.to_string());
        self
    }

    /// `[0, 1]`.
    pub fn interval() -> Self {
        DelzantPolytope::new(1, vec![Facet::integer(vec![1], 0), Facet::integer(vec![-1], 1)])
            .expect("interval is Delzant")
            .named("interval")
    }

    /// Standard 2-simplex `{x₁, x₂ ≥ 0, x₁ + x₂ ≤ 1}`.
    pub fn simplex2() -> Self {
        DelzantPolytope::new(
            2,
            vec![
                Facet::integer(vec![1, 0], 0),
                Facet::integer(vec![0, 1], 0),
                Facet::integer(vec![-1, -1], 1),
            ],
        )
        .expect("simplex is Delzant")
        .named("simplex2")
    }

    /// Unit square `[0, 1]²`.
    pub fn square() -> Self {
        DelzantPolytope::new(
            2,
            vec![
                Facet::integer(vec![1, 0], 0),
                Facet::integer(vec![-1, 0], 1),
                Facet::integer(vec![0, 1], 0),
                Facet::integer(vec![0, -1], 1),
            ],
        )
        .expect("square is Delzant")
        .named("square")
    }

    pub fn preset(name: &str) -> Result<Self, PolytopeError> {
        match name {
            "interval" => Ok(Self::interval()),
            "simplex2" => Ok(Self::simplex2()),
            "square" => Ok(Self::square()),
            other => Err(PolytopeError::UnknownPreset(other.to_string())),
        }
    }

    /// Parses `{"dim": m, "facets": [{"normal": [..], "offset": q}]}`.
    ///
    /// Offsets may be JSON integers or strings of the form `"p/q"`.
    pub fn from_json(doc: &str) -> Result<Self, PolytopeError> {
        let value: Value =
            serde_json::from_str(doc).map_err(|e| PolytopeError::Parse(e.to_string()))?;
        Self::from_json_value(&value)
    }

    pub fn from_json_value(value: &Value) -> Result<Self, PolytopeError> {
        let parse = |msg: &str| PolytopeError::Parse(msg.to_string());
        let dim = value
            .get("dim")
            .and_then(Value::as_u64)
            .ok_or_else(|| parse("missing integer `dim`"))? as usize;
        let facets_json = value
            .get("facets")
            .and_then(Value::as_array)
            .ok_or_else(|| parse("missing array `facets`"))?;
        let mut facets = Vec::with_capacity(facets_json.len());
        for (r, f) in facets_json.iter().enumerate() {
            let normal = f
                .get("normal")
                .and_then(Value::as_array)
                .ok_or_else(|| parse("facet without `normal`"))?
                .iter()
                .map(|v| v.as_i64().ok_or_else(|| parse("normal entries must be integers")))
                .collect::<Result<Vec<_>, _>>()?;
            let offset = match f.get("offset") {
                Some(Value::Number(n)) => match n.as_i64() {
                    Some(i) => Ratio::from_integer(i),
                    None => return Err(parse("non-integer offsets must be written as \"p/q\"")),
                },
                Some(Value::String(s)) => parse_ratio(s).ok_or(PolytopeError::BadOffset(r))?,
                _ => return Err(parse("facet without `offset`")),
            };
            facets.push(Facet::new(normal, offset));
        }
        DelzantPolytope::new(dim, facets)
    }

    pub fn to_json(&self) -> Value {
        let facets: Vec<Value> = self
            .facets
            .iter()
            .map(|f| {
                let offset = if *f.offset.denom() == 1 {
                    Value::from(*f.offset.numer())
                } else {
                    Value::from(format!("{}/{}", f.offset.numer(), f.offset.denom()))
                };
                serde_json::json!({ "normal": f.normal, "offset": offset })
            })
            .collect();
        serde_json::json!({ "dim": self.dim, "facets": facets })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn num_facets(&self) -> usize {
        self.facets.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    /// `ℓ_r(x)`; nonnegative iff `x` is on the inner side of facet `r`.
    pub fn facet_value(&self, r: usize, x: &[f64]) -> f64 {
        self.facets[r].value(x)
    }

    pub fn facet_values(&self, x: &[f64]) -> Vec<f64> {
        self.facets.iter().map(|f| f.value(x)).collect()
    }

    pub fn min_facet_value(&self, x: &[f64]) -> f64 {
        self.facets
            .iter()
            .map(|f| f.value(x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.min_facet_value(x) >= -tol
    }

    pub fn is_interior(&self, x: &[f64]) -> bool {
        self.min_facet_value(x) > 0.0
    }

    /// Exact test `α/k ∈ P`.
    pub fn contains_lattice(&self, alpha: &[i64], k: i64) -> bool {
        self.facets
            .iter()
            .all(|f| f.scaled_value(alpha, k) >= Q::from_integer(0))
    }

    /// Exact test that `α/k` lies in the open interior of `P`.
    pub fn lattice_is_interior(&self, alpha: &[i64], k: i64) -> bool {
        self.facets
            .iter()
            .all(|f| f.scaled_value(alpha, k) > Q::from_integer(0))
    }

    /// Axis-aligned bounding box `(lo, hi)` of `P`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for v in &self.vertices {
            for i in 0..self.dim {
                lo[i] = lo[i].min(v.coords[i]);
                hi[i] = hi[i].max(v.coords[i]);
            }
        }
        (lo, hi)
    }

    /// Mean of the vertices; a point strictly inside `P`.
    pub fn centroid(&self) -> Vec<f64> {
        let n = self.vertices.len() as f64;
        (0..self.dim)
            .map(|i| self.vertices.iter().map(|v| v.coords[i]).sum::<f64>() / n)
            .collect()
    }

    /// All integer points of the dilate `kP`, in lexicographic order.
    pub fn lattice_points(&self, k: i64) -> Result<LatticeSet, PolytopeError> {
        if k < 1 {
            return Err(PolytopeError::BadLevel(k));
        }
        let kq = Q::from_integer(k as i128);
        let mut lo = vec![i64::MAX; self.dim];
        let mut hi = vec![i64::MIN; self.dim];
        for v in &self.vertices {
            for i in 0..self.dim {
                let s = v.exact[i] * kq;
                lo[i] = lo[i].min(s.floor().to_integer() as i64);
                hi[i] = hi[i].max(s.ceil().to_integer() as i64);
            }
        }
        let mut points = Vec::new();
        let mut alpha = lo.clone();
        'scan: loop {
            if self.contains_lattice(&alpha, k) {
                points.push(alpha.clone());
            }
            // odometer, last coordinate fastest
            let mut i = self.dim;
            loop {
                if i == 0 {
                    break 'scan;
                }
                i -= 1;
                if alpha[i] < hi[i] {
                    alpha[i] += 1;
                    for j in i + 1..self.dim {
                        alpha[j] = lo[j];
                    }
                    break;
                }
            }
        }
        Ok(LatticeSet { level: k, points })
    }

    /// Facets closer than `delta` to `x`: the set `{r : ℓ_r(x) < δ}` and its size.
    pub fn near_facets(&self, x: &[f64], delta: f64) -> Result<(Vec<usize>, usize), PolytopeError> {
        const TOL: f64 = 1e-12;
        let mut near = Vec::new();
        for (r, f) in self.facets.iter().enumerate() {
            let value = f.value(x);
            if value < -TOL {
                return Err(PolytopeError::OutsidePolytope {
                    point: x.to_vec(),
                    facet: r,
                    value,
                });
            }
            if value < delta {
                near.push(r);
            }
        }
        let n = near.len();
        Ok((near, n))
    }

    /// Vertices in counter-clockwise order (dimension 2 only).
    pub fn ordered_vertices_2d(&self) -> Result<Vec<[f64; 2]>, PolytopeError> {
        if self.dim != 2 {
            return Err(PolytopeError::UnsupportedDimension(self.dim));
        }
        let c = self.centroid();
        let mut vs: Vec<[f64; 2]> = self.vertices.iter().map(|v| [v.coords[0], v.coords[1]]).collect();
        vs.sort_by(|a, b| {
            let ta = (a[1] - c[1]).atan2(a[0] - c[0]);
            let tb = (b[1] - c[1]).atan2(b[0] - c[0]);
            ta.total_cmp(&tb)
        });
        Ok(vs)
    }

    /// Lebesgue volume of `P` (dimensions 1 and 2).
    pub fn volume(&self) -> Result<f64, PolytopeError> {
        match self.dim {
            1 => {
                let (lo, hi) = self.bounding_box();
                Ok(hi[0] - lo[0])
            }
            2 => {
                let vs = self.ordered_vertices_2d()?;
                let n = vs.len();
                let twice: f64 = (0..n)
                    .map(|i| {
                        let (a, b) = (vs[i], vs[(i + 1) % n]);
                        a[0] * b[1] - b[0] * a[1]
                    })
                    .sum();
                Ok(0.5 * twice.abs())
            }
            d => Err(PolytopeError::UnsupportedDimension(d)),
        }
    }

    /// Fan triangulation from the first ordered vertex (dimension 2 only).
    pub fn triangles(&self) -> Result<Vec<[[f64; 2]; 3]>, PolytopeError> {
        let vs = self.ordered_vertices_2d()?;
        Ok((1..vs.len() - 1).map(|i| [vs[0], vs[i], vs[i + 1]]).collect())
    }
}

fn parse_ratio(s: &str) -> Option<Ratio<i64>> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().ok()?;
            let q: i64 = q.trim().parse().ok()?;
            (q != 0).then(|| Ratio::new(p, q))
        }
        None => s.parse::<i64>().ok().map(Ratio::from_integer),
    }
}

/// Integer points of the dilate `kP`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeSet {
    pub level: i64,
    pub points: Vec<Vec<i64>>,
}

impl LatticeSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[i64]> {
        self.points.iter().map(Vec::as_slice)
    }

    pub fn contains(&self, alpha: &[i64]) -> bool {
        self.points.iter().any(|p| p == alpha)
    }
}

fn integer_det(rows: &[Vec<i64>]) -> i128 {
    // Bareiss fraction-free elimination.
    let n = rows.len();
    let mut a: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| v as i128).collect())
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// Solves the square rational system `A x = b`; `None` when singular.
fn solve_rational(mut a: Vec<Vec<Q>>, mut b: Vec<Q>) -> Option<Vec<Q>> {
    let n = b.len();
    let zero = Q::from_integer(0);
    for col in 0..n {
        let pivot = (col..n).find(|&r| a[r][col] != zero)?;
        a.swap(pivot, col);
        b.swap(pivot, col);
        for r in 0..n {
            if r != col && a[r][col] != zero {
                let factor = a[r][col] / a[col][col];
                for c in col..n {
                    let sub = factor * a[col][c];
                    a[r][c] -= sub;
                }
                let sub = factor * b[col];
                b[r] -= sub;
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn enumerate_vertices(dim: usize, facets: &[Facet]) -> Vec<Vertex> {
    let zero = Q::from_integer(0);
    let mut seen: HashSet<Vec<Q>> = HashSet::new();
    let mut out = Vec::new();
    for subset in combinations(facets.len(), dim) {
        let a: Vec<Vec<Q>> = subset
            .iter()
            .map(|&r| facets[r].normal.iter().map(|&v| Q::from_integer(v as i128)).collect())
            .collect();
        let b: Vec<Q> = subset.iter().map(|&r| -q_from(facets[r].offset)).collect();
        let Some(x) = solve_rational(a, b) else { continue };
        if facets.iter().any(|f| f.exact_value(&x) < zero) {
            continue;
        }
        if !seen.insert(x.clone()) {
            continue;
        }
        let active = (0..facets.len())
            .filter(|&r| facets[r].exact_value(&x) == zero)
            .collect();
        out.push(Vertex {
            coords: x.iter().map(q_to_f64).collect(),
            exact: x,
            active,
        });
    }
    out
}

/// Rejects facet sets whose recession cone `{d : ⟨d, v_r⟩ ≥ 0 ∀r}` is nontrivial.
fn check_bounded(dim: usize, facets: &[Facet]) -> Result<(), PolytopeError> {
    let normals: Vec<&Vec<i64>> = facets.iter().map(|f| &f.normal).collect();
    let admissible = |d: &[i128]| {
        d.iter().any(|&x| x != 0)
            && normals
                .iter()
                .all(|v| v.iter().zip(d).map(|(&a, &b)| a as i128 * b).sum::<i128>() >= 0)
    };
    if dim == 1 {
        return if admissible(&[1]) || admissible(&[-1]) {
            Err(PolytopeError::Unbounded)
        } else {
            Ok(())
        };
    }
    // Extreme rays of a pointed cone sit on m-1 independent constraints; the
    // candidate direction is the generalized cross product of those normals.
    for subset in combinations(normals.len(), dim - 1) {
        let d: Vec<i128> = (0..dim)
            .map(|j| {
                let minor: Vec<Vec<i64>> = subset
                    .iter()
                    .map(|&r| {
                        normals[r]
                            .iter()
                            .enumerate()
                            .filter(|&(c, _)| c != j)
                            .map(|(_, &v)| v)
                            .collect()
                    })
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * integer_det(&minor)
            })
            .collect();
        let neg: Vec<i128> = d.iter().map(|&x| -x).collect();
        if admissible(&d) || admissible(&neg) {
            return Err(PolytopeError::Unbounded);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn facet_values_match_hand_evaluation() {
        let p = DelzantPolytope::interval();
        assert_abs_diff_eq!(p.facet_value(0, &[0.25]), 0.25);
        assert_eq!(p.facet_value(1, &[1.0]), 0.0);
        let s = DelzantPolytope::simplex2();
        assert_abs_diff_eq!(s.facet_value(2, &[0.2, 0.3]), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn lattice_points_of_presets() {
        let p = DelzantPolytope::interval();
        let l = p.lattice_points(3).unwrap();
        assert_eq!(l.points, vec![vec![0], vec![1], vec![2], vec![3]]);

        let s = DelzantPolytope::simplex2().lattice_points(2).unwrap();
        assert_eq!(s.len(), 6);
        for a in [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]] {
            assert!(s.contains(&a));
        }
        assert_eq!(DelzantPolytope::square().lattice_points(1).unwrap().len(), 4);
    }

    #[test]
    fn lattice_level_must_be_positive() {
        let p = DelzantPolytope::interval();
        assert!(matches!(p.lattice_points(0), Err(PolytopeError::BadLevel(0))));
        assert!(p.lattice_points(-2).is_err());
    }

    #[test]
    fn near_facets_examples() {
        let p = DelzantPolytope::interval();
        assert_eq!(p.near_facets(&[0.5], 0.1).unwrap(), (vec![], 0));
        assert_eq!(p.near_facets(&[0.05], 0.1).unwrap(), (vec![0], 1));
        let sq = DelzantPolytope::square();
        assert_eq!(sq.near_facets(&[0.01, 0.02], 0.05).unwrap().1, 2);
        assert!(p.near_facets(&[1.5], 0.1).is_err());
    }

    #[test]
    fn rejects_non_primitive_and_unbounded() {
        let bad = DelzantPolytope::new(1, vec![Facet::integer(vec![2], 0), Facet::integer(vec![-1], 1)]);
        assert!(matches!(bad, Err(PolytopeError::NotPrimitive(0))));
        let quadrant = DelzantPolytope::new(
            2,
            vec![
                Facet::integer(vec![1, 0], 0),
                Facet::integer(vec![0, 1], 0),
                Facet::integer(vec![1, 1], 1),
            ],
        );
        assert!(matches!(quadrant, Err(PolytopeError::Unbounded)));
    }

    #[test]
    fn rejects_non_delzant_triangle() {
        // conv{(0,0), (2,0), (0,1)}: the normals at (2,0) have determinant 2.
        let t = DelzantPolytope::new(
            2,
            vec![
                Facet::integer(vec![1, 0], 0),
                Facet::integer(vec![0, 1], 0),
                Facet::integer(vec![-1, -2], 2),
            ],
        );
        assert!(matches!(t, Err(PolytopeError::NotDelzant { .. })));
    }

    #[test]
    fn json_round_trip_with_rational_offsets() {
        let doc = r#"{"dim": 1, "facets": [{"normal": [1], "offset": "1/2"}, {"normal": [-1], "offset": 2}]}"#;
        let p = DelzantPolytope::from_json(doc).unwrap();
        let (lo, hi) = p.bounding_box();
        assert_eq!((lo[0], hi[0]), (-0.5, 2.0));
        let again = DelzantPolytope::from_json_value(&p.to_json()).unwrap();
        assert_eq!(p, again);
        // 2·[-1/2, 2] ∩ Z = {-1, ..., 4}
        assert_eq!(p.lattice_points(2).unwrap().len(), 6);
    }

    #[test]
    fn volumes() {
        assert_eq!(DelzantPolytope::interval().volume().unwrap(), 1.0);
        assert_abs_diff_eq!(DelzantPolytope::simplex2().volume().unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(DelzantPolytope::square().volume().unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn vertex_normals_are_unimodular() {
        for p in [DelzantPolytope::interval(), DelzantPolytope::simplex2(), DelzantPolytope::square()] {
            for v in p.vertices() {
                let rows: Vec<Vec<i64>> = v.active.iter().map(|&r| p.facets()[r].normal.clone()).collect();
                assert_eq!(integer_det(&rows).abs(), 1);
            }
        }
    }

    fn brute_force_count(p: &DelzantPolytope, k: i64) -> usize {
        // generous box, exact membership
        let r = 3 * k + 3;
        match p.dim() {
            1 => (-r..=r).filter(|&a| p.contains_lattice(&[a], k)).count(),
            2 => (-r..=r)
                .flat_map(|a| (-r..=r).map(move |b| [a, b]))
                .filter(|a| p.contains_lattice(a, k))
                .count(),
            _ => unreachable!(),
        }
    }

    proptest! {
        #[test]
        fn lattice_count_matches_brute_force(k in 1i64..12, which in 0usize..3) {
            let p = [DelzantPolytope::interval(), DelzantPolytope::simplex2(), DelzantPolytope::square()][which].clone();
            let l = p.lattice_points(k).unwrap();
            prop_assert_eq!(l.len(), brute_force_count(&p, k));
            let unique: HashSet<_> = l.points.iter().collect();
            prop_assert_eq!(unique.len(), l.len());
        }

        #[test]
        fn facet_value_is_affine(x in prop::array::uniform2(-2.0f64..2.0), y in prop::array::uniform2(-2.0f64..2.0)) {
            let p = DelzantPolytope::simplex2();
            let mid = [(x[0] + y[0]) / 2.0, (x[1] + y[1]) / 2.0];
            for r in 0..p.num_facets() {
                let lhs = p.facet_value(r, &x) + p.facet_value(r, &y);
                prop_assert!((lhs - 2.0 * p.facet_value(r, &mid)).abs() < 1e-12);
            }
        }
    }
}
