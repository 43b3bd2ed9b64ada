//! The coaction of a magic unitary on functions over the glued space and the
//! verification battery around it: the scalar-value lemma at glued points,
//! invariance of the quotient algebra, faithfulness via slice recovery,
//! ergodicity via the fixed-point space, and density of the generated
//! subspace.
//!
//! Throughout, a function `F` on the product maps to the matrix-valued
//! function `αF` with `αF(k, y) = Σ_i F(i, y) · u(k, i)`. For a scalar
//! (permutation) unitary this is exactly the pullback along the permutation,
//! which pins the orientation of all conventions here.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::magic::{delta_rep, MagicUnitary};
use crate::ncalg;
use crate::numerics::{nullspace_dim, span_basis_indices, span_rank, ComplexMatrix, Tolerance};
use crate::report::{CheckReport, WorstCase};
use crate::spaces::{quotient_basis, GluedSpace, GluingSpec, PointClass, ProductFunction};

/// The result of applying the coaction: a `d × d` matrix for every product
/// point `(k, y)`, one-based.
#[derive(Debug, Clone, PartialEq)]
pub struct CoactionValue {
    n: usize,
    m: usize,
    d: usize,
    /// Row-major over copies: `values[(k-1) * m + (y-1)]`.
    values: Vec<ComplexMatrix>,
}

impl CoactionValue {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn value(&self, k: usize, y: usize) -> &ComplexMatrix {
        assert!(
            (1..=self.n).contains(&k) && (1..=self.m).contains(&y),
            "point ({k},{y}) out of range"
        );
        &self.values[(k - 1) * self.m + (y - 1)]
    }

    fn check_same_shape(&self, other: &Self, op: &str) -> Result<(), Error> {
        if self.n != other.n || self.m != other.m || self.d != other.d {
            return Err(Error::Dimension(format!(
                "{op}: shapes ({}x{}, d={}) and ({}x{}, d={}) differ",
                self.n, self.m, self.d, other.n, other.m, other.d
            )));
        }
        Ok(())
    }

    /// Pointwise matrix product — multiplication in `C(product) ⊗ M_d`.
    pub fn pointwise_mul(&self, other: &Self) -> Result<Self, Error> {
        self.check_same_shape(other, "pointwise_mul")?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.matmul(b))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            n: self.n,
            m: self.m,
            d: self.d,
            values,
        })
    }

    /// Pointwise adjoint.
    pub fn pointwise_adjoint(&self) -> Self {
        Self {
            n: self.n,
            m: self.m,
            d: self.d,
            values: self.values.iter().map(ComplexMatrix::adjoint).collect(),
        }
    }

    /// Largest entrywise difference over all points.
    pub fn max_diff(&self, other: &Self) -> Result<f64, Error> {
        self.check_same_shape(other, "max_diff")?;
        let mut worst = 0.0_f64;
        for (a, b) in self.values.iter().zip(&other.values) {
            worst = worst.max(a.max_diff(b)?);
        }
        Ok(worst)
    }

    /// Entries flattened in `(copy, point, row, col)` order.
    pub fn flatten(&self) -> Vec<Complex64> {
        self.values
            .iter()
            .flat_map(|m| m.entries().iter().copied())
            .collect()
    }
}

/// `αF(k, y) = Σ_i F(i, y) · u(k, i)`.
pub fn apply_coaction(f: &ProductFunction, u: &MagicUnitary) -> Result<CoactionValue, Error> {
    if f.n() != u.n() {
        return Err(Error::Dimension(format!(
            "coaction: function has {} copies, unitary has size {}",
            f.n(),
            u.n()
        )));
    }
    let n = f.n();
    let m = f.m();
    let d = u.d();
    let mut values = Vec::with_capacity(n * m);
    for k in 1..=n {
        for y in 1..=m {
            let mut sum = ComplexMatrix::zeros(d, d);
            for i in 1..=n {
                sum = sum.add(&u.entry(k, i).scale(f.get(i, y)))?;
            }
            values.push(sum);
        }
    }
    Ok(CoactionValue { n, m, d, values })
}

/// Largest disagreement of `αF` across copies over the glued points — zero
/// when `αF` descends to the glued space tensored with the matrix algebra.
pub fn slice_equality_violation(cv: &CoactionValue, spec: &GluingSpec) -> Result<f64, Error> {
    if cv.n() != spec.n() || cv.m() != spec.base().m() {
        return Err(Error::Dimension(format!(
            "coaction value on {}x{} does not match space {}x{}",
            cv.n(),
            cv.m(),
            spec.n(),
            spec.base().m()
        )));
    }
    let mut worst = 0.0_f64;
    for &y in spec.glued() {
        for k in 1..=cv.n() {
            for l in k + 1..=cv.n() {
                worst = worst.max(cv.value(k, y).max_diff(cv.value(l, y))?);
            }
        }
    }
    Ok(worst)
}

/// Largest deviation of `αF(k, y)` from the scalar matrix `F(1, y)·I` over
/// the glued points, where `F` is fiber-constant.
pub fn technical_violation(
    f: &ProductFunction,
    u: &MagicUnitary,
    spec: &GluingSpec,
) -> Result<f64, Error> {
    let cv = apply_coaction(f, u)?;
    let mut worst = 0.0_f64;
    for &y in spec.glued() {
        let scalar = ComplexMatrix::identity(u.d()).scale(f.get(1, y));
        for k in 1..=spec.n() {
            worst = worst.max(cv.value(k, y).max_diff(&scalar)?);
        }
    }
    Ok(worst)
}

/// At a glued point a quotient function is fiber-constant, so its coaction
/// value there must collapse to the scalar `F(1, y)` times the identity —
/// the row sums of the unitary absorb the constant. Verified numerically on
/// `trials` random quotient members (bound `n · eps`) and symbolically: each
/// row sum `Σ_i a(k,i)` must reduce to `1` in the relation algebra.
pub fn check_technical_lemma(
    spec: &GluingSpec,
    u: &MagicUnitary,
    seed: u64,
    trials: usize,
    tol: &Tolerance,
) -> Result<CheckReport, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = WorstCase::new();
    for trial in 0..trials {
        let f = ProductFunction::random_in_quotient(spec, &mut rng);
        let violation = technical_violation(&f, u, spec)?;
        worst.observe(violation, &[("trial", trial as i64)]);
    }

    let n = u.n() as u32;
    let one = ncalg::NCPolynomial::unit(n, 1);
    let mut symbolic_ok = true;
    for k in 1..=n {
        let mut row = ncalg::NCPolynomial::zero(n, 1);
        for i in 1..=n {
            row = row.add(&ncalg::NCPolynomial::generator(n, k, i)?)?;
        }
        if !ncalg::check_identity(&row, &one)?.passed() {
            symbolic_ok = false;
        }
    }

    let bound = spec.n() as f64 * tol.eps();
    let report = CheckReport::new("technical_lemma", tol.eps())
        .with_pass(worst.value() <= bound && symbolic_ok)
        .with_real("max_violation", worst.value())
        .with_real("bound", bound)
        .with_int("trials", trials as i64)
        .with_int("glued_points", spec.glued().len() as i64)
        .with_int("symbolic_row_sums_pass", i64::from(symbolic_ok))
        .with_seed(seed);
    Ok(worst.apply_to(report))
}

/// The quotient algebra must be carried into itself: for every basis
/// indicator and `trials` random quotient members, the coaction value at
/// each glued point must agree across copies.
pub fn check_invariance(
    spec: &GluingSpec,
    u: &MagicUnitary,
    seed: u64,
    trials: usize,
    tol: &Tolerance,
) -> Result<CheckReport, Error> {
    let glued_space = GluedSpace::build(spec);
    let basis = quotient_basis(&glued_space);
    let basis_len = basis.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = WorstCase::new();
    for (idx, f) in basis
        .into_iter()
        .chain((0..trials).map(|_| ProductFunction::random_in_quotient(spec, &mut rng)))
        .enumerate()
    {
        let cv = apply_coaction(&f, u)?;
        let violation = slice_equality_violation(&cv, spec)?;
        worst.observe(violation, &[("function", idx as i64)]);
    }
    let report = CheckReport::new("invariance", tol.eps())
        .with_pass(worst.value() <= tol.eps())
        .with_real("max_violation", worst.value())
        .with_int("basis_functions", basis_len as i64)
        .with_int("trials", trials as i64)
        .with_seed(seed);
    Ok(worst.apply_to(report))
}

/// Recover every block of the unitary from coaction slices: with `y₀` the
/// smallest non-glued point and `F_i = e_i ⊗ 1_{y₀}`, the value `αF_i(k, y₀)`
/// is exactly `u(k, i)` — all other summands vanish identically, so the
/// recovery error is zero in exact *floating-point* arithmetic, not merely
/// small. A space with every point glued leaves no slice to recover from and
/// is a structural error.
pub fn check_faithful_slices(
    spec: &GluingSpec,
    u: &MagicUnitary,
    tol: &Tolerance,
) -> Result<CheckReport, Error> {
    if spec.n() != u.n() {
        return Err(Error::Dimension(format!(
            "space has {} copies, unitary has size {}",
            spec.n(),
            u.n()
        )));
    }
    let y0 = spec.free_points().next().ok_or_else(|| {
        Error::Structural("every point is glued: no free slice to recover generators from".into())
    })?;

    let m = spec.base().m();
    let mut indicator = vec![Complex64::new(0.0, 0.0); m];
    indicator[y0 - 1] = Complex64::new(1.0, 0.0);

    let mut worst = WorstCase::new();
    for i in 1..=spec.n() {
        let f = ProductFunction::e_tensor(spec.n(), i, &indicator)?;
        let cv = apply_coaction(&f, u)?;
        for k in 1..=spec.n() {
            let diff = cv.value(k, y0).max_diff(u.entry(k, i))?;
            worst.observe(diff, &[("i", i as i64), ("k", k as i64)]);
        }
    }
    let report = CheckReport::new("faithful_slices", tol.eps())
        .with_pass(worst.value() <= tol.eps())
        .with_real("max_recovery_error", worst.value())
        .with_int("generators_recovered", (spec.n() * spec.n()) as i64)
        .with_int("slice_point", y0 as i64);
    Ok(worst.apply_to(report))
}

/// Dimension of the fixed-point space of the coaction on the quotient
/// algebra: members `F` with `αF(k, y) = F(k, y)·I` for all points. Functions
/// of the base point alone are always fixed (row sums again), so the
/// dimension is at least `m`; it equals `1` exactly when the action is
/// ergodic, which forces `m = 1`. Reported informationally (`pass: null`)
/// with the verdict in `detail`.
pub fn fixed_point_space(
    spec: &GluingSpec,
    u: &MagicUnitary,
    tol: &Tolerance,
) -> Result<CheckReport, Error> {
    if spec.n() != u.n() {
        return Err(Error::Dimension(format!(
            "space has {} copies, unitary has size {}",
            spec.n(),
            u.n()
        )));
    }
    let glued_space = GluedSpace::build(spec);
    let basis = quotient_basis(&glued_space);
    let d = u.d();
    let identity = ComplexMatrix::identity(d);

    // Columns of the linear map F ↦ αF - F·I on the quotient basis.
    let mut columns = Vec::with_capacity(basis.len());
    for f in &basis {
        let cv = apply_coaction(f, u)?;
        let mut column = Vec::with_capacity(spec.n() * spec.base().m() * d * d);
        for k in 1..=spec.n() {
            for y in 1..=spec.base().m() {
                let expected = identity.scale(f.get(k, y));
                let residual = cv.value(k, y).sub(&expected)?;
                column.extend(residual.entries().iter().copied());
            }
        }
        columns.push(column);
    }
    let dim = nullspace_dim(&columns, tol)?;
    let ergodic = dim == 1;

    // Informational by design: a verdict, not an assertion.
    Ok(CheckReport::new("fixed_points", tol.eps())
        .with_int("fixed_point_dim", dim as i64)
        .with_int("quotient_dim", spec.quotient_dim() as i64)
        .with_int("base_points", spec.base().m() as i64)
        .with_detail(if ergodic { "ergodic" } else { "not ergodic" }))
}

/// The unital *-algebra of matrices generated by the blocks of the unitary,
/// represented by a linearly independent spanning family.
#[derive(Debug, Clone)]
pub struct RepAlgebra {
    basis: Vec<ComplexMatrix>,
}

impl RepAlgebra {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }
}

fn independent_subfamily(
    family: &[ComplexMatrix],
    tol: &Tolerance,
) -> Result<Vec<ComplexMatrix>, Error> {
    let vectors: Vec<Vec<Complex64>> = family.iter().map(ComplexMatrix::flatten).collect();
    let indices = span_basis_indices(&vectors, tol)?;
    Ok(indices.into_iter().map(|i| family[i].clone()).collect())
}

/// Saturate `{I} ∪ {u(i,j)}` under products and adjoints: keep a linearly
/// independent subfamily, adjoin all pairwise products and adjoints, and
/// repeat until the span stops growing. The span dimension strictly
/// increases each round and is capped by `d²`, so this terminates.
pub fn saturate_rep_algebra(u: &MagicUnitary, tol: &Tolerance) -> Result<RepAlgebra, Error> {
    let d = u.d();
    let mut family = vec![ComplexMatrix::identity(d)];
    for i in 1..=u.n() {
        for j in 1..=u.n() {
            family.push(u.entry(i, j).clone());
        }
    }
    let mut basis = independent_subfamily(&family, tol)?;
    loop {
        let mut candidates = basis.clone();
        for a in &basis {
            candidates.push(a.adjoint());
            for b in &basis {
                candidates.push(a.matmul(b)?);
            }
        }
        let next = independent_subfamily(&candidates, tol)?;
        if next.len() == basis.len() {
            return Ok(RepAlgebra { basis: next });
        }
        basis = next;
    }
}

/// Rank of the family `{flatten(αF_r · b_s)}` over quotient basis indicators
/// `F_r` and representation-algebra basis elements `b_s`, with each product
/// read off on one representative per equivalence class (the values agree
/// across a class by invariance). Equality with the target `q · β` — the
/// dimension of `C(Z) ⊗ rep algebra` — is the density statement; the check
/// passes when equal and is informational otherwise.
pub fn density_rank(
    spec: &GluingSpec,
    u: &MagicUnitary,
    tol: &Tolerance,
) -> Result<CheckReport, Error> {
    if spec.n() != u.n() {
        return Err(Error::Dimension(format!(
            "space has {} copies, unitary has size {}",
            spec.n(),
            u.n()
        )));
    }
    let glued_space = GluedSpace::build(spec);
    let classes = glued_space.classes();
    let q = classes.len();
    let rep = saturate_rep_algebra(u, tol)?;
    let beta = rep.dim();

    let representatives: Vec<(usize, usize)> = classes
        .iter()
        .map(|class| match *class {
            PointClass::Singleton { copy, point } => (copy, point),
            PointClass::Fiber { point } => (1, point),
        })
        .collect();

    let mut vectors = Vec::with_capacity(q * beta);
    for f in quotient_basis(&glued_space) {
        let cv = apply_coaction(&f, u)?;
        for b in rep.basis() {
            let mut vector = Vec::with_capacity(q * u.d() * u.d());
            for &(k, y) in &representatives {
                let product = cv.value(k, y).matmul(b)?;
                vector.extend(product.entries().iter().copied());
            }
            vectors.push(vector);
        }
    }
    let rank = span_rank(&vectors, tol)?;
    let target = q * beta;

    let report = CheckReport::new("density", tol.eps())
        .with_int("rank", rank as i64)
        .with_int("target", target as i64)
        .with_int("classes", q as i64)
        .with_int("rep_algebra_dim", beta as i64);
    Ok(if rank == target {
        report.with_pass(true)
    } else {
        // Rank below target is left informational: a deficient numeric rank
        // at a given tolerance is not a disproof.
        report.with_detail(format!(
            "span rank {rank} below target {target}; density not certified at this tolerance"
        ))
    })
}

/// The coaction is a unital *-homomorphism: multiplicative and
/// adjoint-compatible pointwise, and it sends the constant one to the
/// identity at every point. Verified on `trials` random pairs from the
/// quotient algebra.
pub fn check_homomorphism(
    spec: &GluingSpec,
    u: &MagicUnitary,
    seed: u64,
    trials: usize,
    tol: &Tolerance,
) -> Result<CheckReport, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mult = WorstCase::new();
    let mut star = WorstCase::new();
    for trial in 0..trials {
        let f = ProductFunction::random_in_quotient(spec, &mut rng);
        let g = ProductFunction::random_in_quotient(spec, &mut rng);
        let af = apply_coaction(&f, u)?;
        let ag = apply_coaction(&g, u)?;

        let lhs = apply_coaction(&f.mul(&g)?, u)?;
        let rhs = af.pointwise_mul(&ag)?;
        mult.observe(lhs.max_diff(&rhs)?, &[("trial", trial as i64)]);

        let conj_lhs = apply_coaction(&f.conj(), u)?;
        star.observe(
            conj_lhs.max_diff(&af.pointwise_adjoint())?,
            &[("trial", trial as i64)],
        );
    }

    let one = ProductFunction::constant(spec.n(), spec.base().m(), Complex64::new(1.0, 0.0));
    let a_one = apply_coaction(&one, u)?;
    let identity = ComplexMatrix::identity(u.d());
    let mut unit_violation = 0.0_f64;
    for k in 1..=spec.n() {
        for y in 1..=spec.base().m() {
            unit_violation = unit_violation.max(a_one.value(k, y).max_diff(&identity)?);
        }
    }

    let max = mult.value().max(star.value()).max(unit_violation);
    let report = CheckReport::new("homomorphism", tol.eps())
        .with_pass(max <= tol.eps())
        .with_real("multiplicativity_violation", mult.value())
        .with_real("adjoint_violation", star.value())
        .with_real("unit_violation", unit_violation)
        .with_real("max_violation", max)
        .with_int("trials", trials as i64)
        .with_seed(seed);
    Ok(mult.apply_to(report))
}

/// Coassociativity at the representation level: applying the coaction twice
/// must match applying it once against the degree-doubled unitary,
/// `Σ_l u(k,l) ⊗ αF(l, y) = α_{Δu}F(k, y)`. Verified on the quotient basis
/// and `trials` random quotient members.
pub fn check_rep_coassociativity(
    spec: &GluingSpec,
    u: &MagicUnitary,
    seed: u64,
    trials: usize,
    tol: &Tolerance,
) -> Result<CheckReport, Error> {
    let du = delta_rep(u);
    let glued_space = GluedSpace::build(spec);
    let basis = quotient_basis(&glued_space);
    let basis_len = basis.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = WorstCase::new();
    for (idx, f) in basis
        .into_iter()
        .chain((0..trials).map(|_| ProductFunction::random_in_quotient(spec, &mut rng)))
        .enumerate()
    {
        let af = apply_coaction(&f, u)?;
        let twice = apply_coaction(&f, &du)?;
        for k in 1..=spec.n() {
            for y in 1..=spec.base().m() {
                let mut lhs = ComplexMatrix::zeros(u.d() * u.d(), u.d() * u.d());
                for l in 1..=spec.n() {
                    lhs = lhs.add(&u.entry(k, l).kron(af.value(l, y)))?;
                }
                let diff = lhs.max_diff(twice.value(k, y))?;
                worst.observe(
                    diff,
                    &[("function", idx as i64), ("k", k as i64), ("y", y as i64)],
                );
            }
        }
    }
    let report = CheckReport::new("coassociativity_rep", tol.eps())
        .with_pass(worst.value() <= tol.eps())
        .with_real("max_violation", worst.value())
        .with_int("basis_functions", basis_len as i64)
        .with_int("trials", trials as i64)
        .with_seed(seed);
    Ok(worst.apply_to(report))
}
