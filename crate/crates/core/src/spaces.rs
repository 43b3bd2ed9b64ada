//! Finite model spaces: a base space `Y` of `m` points with a symmetric
//! adjacency, `n` labeled copies of it, and the glued space obtained by
//! identifying the `n` copies of each distinguished base point. Functions on
//! the product that are constant on the glued fibers form the quotient
//! algebra; its dimension is `n·m - (n-1)·g` for `g` glued points.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::numerics::Tolerance;

/// A finite space: `m` points (one-based), an irreflexive symmetric
/// adjacency, and optional one-dimensional coordinates for the built-in
/// shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSpace {
    m: usize,
    /// `neighbors[y - 1]` is the set of points adjacent to `y`, one-based.
    neighbors: Vec<BTreeSet<usize>>,
    coords: Option<Vec<f64>>,
}

impl DiscreteSpace {
    /// A path graph `1 - 2 - … - m` with coordinates `(k-1)/(m-1)`;
    /// needs at least two points.
    pub fn interval(m: usize) -> Result<Self, Error> {
        if m < 2 {
            return Err(Error::Structural(format!(
                "an interval needs at least 2 points, got {m}"
            )));
        }
        let edges: Vec<(usize, usize)> = (1..m).map(|k| (k, k + 1)).collect();
        let mut space = Self::custom(m, &edges)?;
        space.coords = Some((0..m).map(|k| k as f64 / (m - 1) as f64).collect());
        Ok(space)
    }

    /// A cycle `1 - 2 - … - m - 1` with angular coordinates `2π(k-1)/m`;
    /// needs at least three points.
    pub fn circle(m: usize) -> Result<Self, Error> {
        if m < 3 {
            return Err(Error::Structural(format!(
                "a circle needs at least 3 points, got {m}"
            )));
        }
        let mut edges: Vec<(usize, usize)> = (1..m).map(|k| (k, k + 1)).collect();
        edges.push((m, 1));
        let mut space = Self::custom(m, &edges)?;
        space.coords = Some(
            (0..m)
                .map(|k| std::f64::consts::TAU * k as f64 / m as f64)
                .collect(),
        );
        Ok(space)
    }

    /// An arbitrary space from an edge list (one-based endpoints). Self-loops
    /// are rejected; duplicate and reversed edges are tolerated.
    pub fn custom(m: usize, edges: &[(usize, usize)]) -> Result<Self, Error> {
        if m == 0 {
            return Err(Error::Structural("a space needs at least one point".into()));
        }
        let mut neighbors = vec![BTreeSet::new(); m];
        for &(a, b) in edges {
            if a == 0 || a > m || b == 0 || b > m {
                return Err(Error::Structural(format!(
                    "edge ({a},{b}) out of range 1..={m}"
                )));
            }
            if a == b {
                return Err(Error::Structural(format!("self-loop at point {a}")));
            }
            neighbors[a - 1].insert(b);
            neighbors[b - 1].insert(a);
        }
        Ok(Self {
            m,
            neighbors,
            coords: None,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn neighbors(&self, y: usize) -> &BTreeSet<usize> {
        assert!((1..=self.m).contains(&y), "point {y} out of range");
        &self.neighbors[y - 1]
    }

    pub fn adjacent(&self, y: usize, z: usize) -> bool {
        self.neighbors(y).contains(&z)
    }

    /// Normalized edge list, each edge once with the smaller endpoint first.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for y in 1..=self.m {
            for &z in &self.neighbors[y - 1] {
                if y < z {
                    out.push((y, z));
                }
            }
        }
        out
    }

    pub fn coords(&self) -> Option<&[f64]> {
        self.coords.as_deref()
    }

    /// Number of connected components of the base space itself.
    pub fn components(&self) -> usize {
        let mut uf = UnionFind::new(self.m);
        for (a, b) in self.edges() {
            uf.union(a - 1, b - 1);
        }
        uf.count()
    }
}

/// How to glue `n` copies of a base space: the copies of each point in
/// `glued_indices` are identified across all copies.
#[derive(Debug, Clone, PartialEq)]
pub struct GluingSpec {
    n: usize,
    base: DiscreteSpace,
    glued: BTreeSet<usize>,
}

impl GluingSpec {
    pub fn new(n: usize, base: DiscreteSpace, glued_indices: &[usize]) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::Structural("need at least one copy".into()));
        }
        let mut glued = BTreeSet::new();
        for &y in glued_indices {
            if y == 0 || y > base.m() {
                return Err(Error::Structural(format!(
                    "glued index {y} out of range 1..={}",
                    base.m()
                )));
            }
            glued.insert(y);
        }
        Ok(Self { n, base, glued })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn base(&self) -> &DiscreteSpace {
        &self.base
    }

    pub fn glued(&self) -> &BTreeSet<usize> {
        &self.glued
    }

    pub fn is_glued(&self, y: usize) -> bool {
        self.glued.contains(&y)
    }

    /// Points of the base that are not glued, ascending.
    pub fn free_points(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=self.base.m()).filter(move |&y| !self.is_glued(y))
    }

    /// Dimension of the algebra of functions constant on glued fibers:
    /// `n·m - (n-1)·g`.
    pub fn quotient_dim(&self) -> usize {
        self.n * self.base.m() - (self.n - 1) * self.glued.len()
    }
}

/// One equivalence class of product points `(copy, point)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointClass {
    /// A non-glued point in one copy.
    Singleton { copy: usize, point: usize },
    /// All `n` copies of a glued point.
    Fiber { point: usize },
}

impl PointClass {
    pub fn base_point(&self) -> usize {
        match *self {
            PointClass::Singleton { point, .. } | PointClass::Fiber { point } => point,
        }
    }

    /// Whether the product point `(i, y)` belongs to this class.
    pub fn contains(&self, i: usize, y: usize) -> bool {
        match *self {
            PointClass::Singleton { copy, point } => copy == i && point == y,
            PointClass::Fiber { point } => point == y,
        }
    }
}

/// The glued space: equivalence classes in a canonical order (ascending base
/// point; within a free point, ascending copy) and the induced adjacency.
#[derive(Debug, Clone)]
pub struct GluedSpace {
    spec: GluingSpec,
    classes: Vec<PointClass>,
    /// `class_neighbors[c]` is the set of class indices adjacent to class `c`.
    class_neighbors: Vec<BTreeSet<usize>>,
}

impl GluedSpace {
    pub fn build(spec: &GluingSpec) -> Self {
        let n = spec.n();
        let m = spec.base().m();
        let mut classes = Vec::new();
        for y in 1..=m {
            if spec.is_glued(y) {
                classes.push(PointClass::Fiber { point: y });
            } else {
                for i in 1..=n {
                    classes.push(PointClass::Singleton { copy: i, point: y });
                }
            }
        }

        // Two classes are adjacent when some copy holds adjacent
        // representatives of both: edges run only within a copy, so
        // singleton classes must share their copy, while a fiber meets every
        // copy.
        let mut class_neighbors = vec![BTreeSet::new(); classes.len()];
        for (c1, k1) in classes.iter().enumerate() {
            for (c2, k2) in classes.iter().enumerate().skip(c1 + 1) {
                let base_adjacent = spec.base().adjacent(k1.base_point(), k2.base_point());
                if !base_adjacent {
                    continue;
                }
                let share_copy = match (k1, k2) {
                    (
                        PointClass::Singleton { copy: i, .. },
                        PointClass::Singleton { copy: j, .. },
                    ) => i == j,
                    _ => true,
                };
                if share_copy {
                    class_neighbors[c1].insert(c2);
                    class_neighbors[c2].insert(c1);
                }
            }
        }

        Self {
            spec: spec.clone(),
            classes,
            class_neighbors,
        }
    }

    pub fn spec(&self) -> &GluingSpec {
        &self.spec
    }

    pub fn classes(&self) -> &[PointClass] {
        &self.classes
    }

    /// Index of the class containing the product point `(i, y)`, one-based
    /// inputs.
    pub fn class_of(&self, i: usize, y: usize) -> usize {
        self.classes
            .iter()
            .position(|k| k.contains(i, y))
            .expect("every product point lies in exactly one class")
    }

    pub fn class_neighbors(&self, c: usize) -> &BTreeSet<usize> {
        &self.class_neighbors[c]
    }

    /// Number of equivalence classes — equal to the quotient dimension.
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn connected_components(&self) -> usize {
        let mut uf = UnionFind::new(self.classes.len());
        for (c, nbrs) in self.class_neighbors.iter().enumerate() {
            for &d in nbrs {
                uf.union(c, d);
            }
        }
        uf.count()
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(size: usize) -> Self {
        Self {
            parent: (0..size).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    fn count(&mut self) -> usize {
        (0..self.parent.len())
            .filter(|&x| self.find(x) == x)
            .count()
    }
}

/// A complex-valued function on the product of `n` copies and `m` base
/// points, stored per copy: `get(i, y)`, one-based.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductFunction {
    n: usize,
    m: usize,
    /// Row-major over copies: `values[(i-1) * m + (y-1)]`.
    values: Vec<Complex64>,
}

impl ProductFunction {
    pub fn new(n: usize, m: usize, values: Vec<Complex64>) -> Result<Self, Error> {
        if n == 0 || m == 0 {
            return Err(Error::Dimension(format!(
                "function domain must be non-empty, got {n} copies of {m} points"
            )));
        }
        if values.len() != n * m {
            return Err(Error::Dimension(format!(
                "function on {n}x{m} points needs {} values, got {}",
                n * m,
                values.len()
            )));
        }
        Ok(Self { n, m, values })
    }

    pub fn constant(n: usize, m: usize, value: Complex64) -> Self {
        Self {
            n,
            m,
            values: vec![value; n * m],
        }
    }

    /// The function `e_i ⊗ f`: zero outside copy `i`, equal to `f` on it.
    pub fn e_tensor(n: usize, i: usize, f: &[Complex64]) -> Result<Self, Error> {
        let m = f.len();
        if i == 0 || i > n {
            return Err(Error::Dimension(format!("copy {i} out of range 1..={n}")));
        }
        let mut out = Self::constant(n, m, Complex64::new(0.0, 0.0));
        for (y, &v) in f.iter().enumerate() {
            out.set(i, y + 1, v);
        }
        Ok(out)
    }

    /// Indicator of one equivalence class.
    pub fn class_indicator(spec: &GluingSpec, class: &PointClass) -> Self {
        let n = spec.n();
        let m = spec.base().m();
        let mut out = Self::constant(n, m, Complex64::new(0.0, 0.0));
        for i in 1..=n {
            for y in 1..=m {
                if class.contains(i, y) {
                    out.set(i, y, Complex64::new(1.0, 0.0));
                }
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, y: usize) -> Complex64 {
        assert!(
            (1..=self.n).contains(&i) && (1..=self.m).contains(&y),
            "point ({i},{y}) out of range"
        );
        self.values[(i - 1) * self.m + (y - 1)]
    }

    pub fn set(&mut self, i: usize, y: usize, value: Complex64) {
        assert!(
            (1..=self.n).contains(&i) && (1..=self.m).contains(&y),
            "point ({i},{y}) out of range"
        );
        self.values[(i - 1) * self.m + (y - 1)] = value;
    }

    fn check_same_domain(&self, other: &Self, op: &str) -> Result<(), Error> {
        if self.n != other.n || self.m != other.m {
            return Err(Error::Dimension(format!(
                "{op}: domains {}x{} and {}x{} differ",
                self.n, self.m, other.n, other.m
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, Error> {
        self.check_same_domain(other, "add")?;
        Ok(Self {
            n: self.n,
            m: self.m,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Pointwise product — multiplication in the function algebra.
    pub fn mul(&self, other: &Self) -> Result<Self, Error> {
        self.check_same_domain(other, "mul")?;
        Ok(Self {
            n: self.n,
            m: self.m,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub fn conj(&self) -> Self {
        Self {
            n: self.n,
            m: self.m,
            values: self.values.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            n: self.n,
            m: self.m,
            values: self.values.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn max_diff(&self, other: &Self) -> Result<f64, Error> {
        self.check_same_domain(other, "max_diff")?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Values flattened in `(copy, point)` order, for span computations.
    pub fn flatten(&self) -> Vec<Complex64> {
        self.values.clone()
    }

    /// Nearest member of the quotient algebra: replace the values over each
    /// glued point by their average across copies.
    pub fn project_to_quotient(&self, spec: &GluingSpec) -> Self {
        let mut out = self.clone();
        for &y in spec.glued() {
            let avg = (1..=self.n).map(|i| self.get(i, y)).sum::<Complex64>() / self.n as f64;
            for i in 1..=self.n {
                out.set(i, y, avg);
            }
        }
        out
    }

    /// A random member of the quotient algebra: independent uniform values
    /// in `[-1, 1]` for real and imaginary parts, then fiber-averaged at the
    /// glued points.
    pub fn random_in_quotient<R: Rng>(spec: &GluingSpec, rng: &mut R) -> Self {
        let n = spec.n();
        let m = spec.base().m();
        let values = (0..n * m)
            .map(|_| Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)))
            .collect();
        Self { n, m, values }.project_to_quotient(spec)
    }
}

/// Whether `f` descends to the glued space: over every glued point the
/// values across copies must agree within `tol`.
pub fn is_in_quotient_algebra(
    f: &ProductFunction,
    spec: &GluingSpec,
    tol: &Tolerance,
) -> Result<bool, Error> {
    if f.n() != spec.n() || f.m() != spec.base().m() {
        return Err(Error::Dimension(format!(
            "function domain {}x{} does not match space {}x{}",
            f.n(),
            f.m(),
            spec.n(),
            spec.base().m()
        )));
    }
    Ok(quotient_violation(f, spec) <= tol.eps())
}

/// Largest cross-copy disagreement over glued points (zero when none).
pub fn quotient_violation(f: &ProductFunction, spec: &GluingSpec) -> f64 {
    let mut worst = 0.0_f64;
    for &y in spec.glued() {
        for i in 1..=f.n() {
            for j in i + 1..=f.n() {
                worst = worst.max((f.get(i, y) - f.get(j, y)).norm());
            }
        }
    }
    worst
}

/// Indicators of the equivalence classes, in class order — a basis of the
/// quotient algebra.
pub fn quotient_basis(glued: &GluedSpace) -> Vec<ProductFunction> {
    glued
        .classes()
        .iter()
        .map(|class| ProductFunction::class_indicator(glued.spec(), class))
        .collect()
}

/// Connectivity of the glued space as a check: passes exactly when the class
/// graph has a single component. With at least one glued point and a
/// connected base this always holds; the report records both component
/// counts so a failure is attributable to the base or to the gluing.
pub fn connectivity_report(glued: &GluedSpace) -> crate::report::CheckReport {
    let components = glued.connected_components();
    crate::report::CheckReport::new("connected", 0.0)
        .with_pass(components == 1)
        .with_int("components", components as i64)
        .with_int("classes", glued.class_count() as i64)
        .with_int("base_components", glued.spec().base().components() as i64)
}

/// External description of a gluing scenario, as read from configuration:
/// `kind` selects the base shape, `edges` is only meaningful (and only
/// allowed) for `custom`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub kind: SpaceKind,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(usize, usize)>>,
    pub glued_indices: Vec<usize>,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Interval,
    Circle,
    Custom,
}

impl SpaceConfig {
    pub fn to_gluing_spec(&self) -> Result<GluingSpec, Error> {
        let base = match self.kind {
            SpaceKind::Interval => {
                if self.edges.is_some() {
                    return Err(Error::Structural(
                        "edges may only be given for a custom space".into(),
                    ));
                }
                DiscreteSpace::interval(self.m)?
            }
            SpaceKind::Circle => {
                if self.edges.is_some() {
                    return Err(Error::Structural(
                        "edges may only be given for a custom space".into(),
                    ));
                }
                DiscreteSpace::circle(self.m)?
            }
            SpaceKind::Custom => {
                let edges = self
                    .edges
                    .as_deref()
                    .ok_or_else(|| Error::Structural("a custom space needs an edge list".into()))?;
                DiscreteSpace::custom(self.m, edges)?
            }
        };
        GluingSpec::new(self.n, base, &self.glued_indices)
    }
}
