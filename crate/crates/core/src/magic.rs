//! Magic unitaries: square grids of projections whose rows and columns each
//! sum to the identity, together with verification, the degree-doubling
//! comultiplication representation, and a commutator-based certificate that a
//! grid is genuinely noncommutative.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::numerics::{ComplexMatrix, Tolerance};
use crate::report::{CheckReport, WorstCase};

/// An `n × n` grid of `d × d` complex matrices, indexed 1-based as
/// `entry(i, j)`. Construction validates only the shape; whether the grid
/// actually satisfies the magic relations is the job of
/// [`verify_magic_unitary`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMagicUnitary", into = "RawMagicUnitary")]
pub struct MagicUnitary {
    n: usize,
    d: usize,
    /// Row-major: `entries[(i-1) * n + (j-1)]` is `entry(i, j)`.
    entries: Vec<ComplexMatrix>,
}

/// File form: `entries[i][j]` is the block in row `i`, column `j`,
/// zero-indexed.
#[derive(Serialize, Deserialize)]
struct RawMagicUnitary {
    n: usize,
    d: usize,
    entries: Vec<Vec<ComplexMatrix>>,
}

impl TryFrom<RawMagicUnitary> for MagicUnitary {
    type Error = Error;

    fn try_from(raw: RawMagicUnitary) -> Result<Self, Error> {
        if raw.entries.len() != raw.n {
            return Err(Error::Dimension(format!(
                "magic unitary of size {} has {} rows",
                raw.n,
                raw.entries.len()
            )));
        }
        let mut flat = Vec::with_capacity(raw.n * raw.n);
        for (i, row) in raw.entries.into_iter().enumerate() {
            if row.len() != raw.n {
                return Err(Error::Dimension(format!(
                    "magic unitary row {i} has {} entries, expected {}",
                    row.len(),
                    raw.n
                )));
            }
            flat.extend(row);
        }
        MagicUnitary::new(raw.n, raw.d, flat)
    }
}

impl From<MagicUnitary> for RawMagicUnitary {
    fn from(u: MagicUnitary) -> RawMagicUnitary {
        let n = u.n;
        let mut entries = Vec::with_capacity(n);
        let mut iter = u.entries.into_iter();
        for _ in 0..n {
            entries.push(iter.by_ref().take(n).collect());
        }
        RawMagicUnitary { n, d: u.d, entries }
    }
}

impl MagicUnitary {
    /// Build from a row-major flat list of `n * n` blocks, each `d × d`.
    pub fn new(n: usize, d: usize, entries: Vec<ComplexMatrix>) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::Dimension(
                "magic unitary size must be positive".into(),
            ));
        }
        if d == 0 {
            return Err(Error::Dimension("block dimension must be positive".into()));
        }
        if entries.len() != n * n {
            return Err(Error::Dimension(format!(
                "magic unitary of size {n} needs {} blocks, got {}",
                n * n,
                entries.len()
            )));
        }
        for (idx, m) in entries.iter().enumerate() {
            if m.rows() != d || m.cols() != d {
                return Err(Error::Dimension(format!(
                    "block ({}, {}) is {}x{}, expected {d}x{d}",
                    idx / n + 1,
                    idx % n + 1,
                    m.rows(),
                    m.cols()
                )));
            }
        }
        Ok(Self { n, d, entries })
    }

    /// The scalar magic unitary of a permutation: `entry(i, j) = δ_{i, σ(j)}`
    /// as a `1 × 1` block. `sigma` is one-based, `sigma[j - 1] = σ(j)`, and
    /// must be a bijection on `1..=n`.
    pub fn from_permutation(sigma: &[usize]) -> Result<Self, Error> {
        let n = sigma.len();
        if n == 0 {
            return Err(Error::Dimension("permutation must be non-empty".into()));
        }
        let mut seen = vec![false; n];
        for &img in sigma {
            if img == 0 || img > n {
                return Err(Error::Structural(format!(
                    "permutation value {img} out of range 1..={n}"
                )));
            }
            if seen[img - 1] {
                return Err(Error::Structural(format!(
                    "permutation repeats value {img}"
                )));
            }
            seen[img - 1] = true;
        }
        let one = ComplexMatrix::identity(1);
        let zero = ComplexMatrix::zeros(1, 1);
        let mut entries = Vec::with_capacity(n * n);
        for i in 1..=n {
            for j in 1..=n {
                entries.push(if sigma[j - 1] == i {
                    one.clone()
                } else {
                    zero.clone()
                });
            }
        }
        Self::new(n, 1, entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Block in row `i`, column `j`, one-based.
    pub fn entry(&self, i: usize, j: usize) -> &ComplexMatrix {
        assert!(
            (1..=self.n).contains(&i) && (1..=self.n).contains(&j),
            "magic unitary index ({i}, {j}) out of range 1..={}",
            self.n
        );
        &self.entries[(i - 1) * self.n + (j - 1)]
    }

    /// Whether every block is a scalar (`d == 1`).
    pub fn is_scalar(&self) -> bool {
        self.d == 1
    }
}

/// Check the magic-unitary relations, reporting the worst violation in each
/// family: projection defect, row-sum and column-sum distance from the
/// identity, and non-orthogonality of distinct entries sharing a row or
/// column. Returns `Err` only for structural problems (which `MagicUnitary`
/// construction already rules out); genuine relation failures come back as a
/// failing report.
pub fn verify_magic_unitary(u: &MagicUnitary, tol: &Tolerance) -> Result<CheckReport, Error> {
    let id = ComplexMatrix::identity(u.d());
    let mut proj = WorstCase::new();
    let mut row = WorstCase::new();
    let mut col = WorstCase::new();
    let mut orth = WorstCase::new();

    for i in 1..=u.n() {
        for j in 1..=u.n() {
            let e = u.entry(i, j);
            let herm = e.max_diff(&e.adjoint())?;
            let idem = e.matmul(e)?.max_diff(e)?;
            proj.observe(herm.max(idem), &[("i", i as i64), ("j", j as i64)]);
        }
    }

    for i in 1..=u.n() {
        let mut sum = ComplexMatrix::zeros(u.d(), u.d());
        for j in 1..=u.n() {
            sum = sum.add(u.entry(i, j))?;
        }
        row.observe(sum.max_diff(&id)?, &[("i", i as i64)]);
    }
    for j in 1..=u.n() {
        let mut sum = ComplexMatrix::zeros(u.d(), u.d());
        for i in 1..=u.n() {
            sum = sum.add(u.entry(i, j))?;
        }
        col.observe(sum.max_diff(&id)?, &[("j", j as i64)]);
    }

    for i in 1..=u.n() {
        for j in 1..=u.n() {
            for k in 1..=u.n() {
                if k != j {
                    let prod = u.entry(i, j).matmul(u.entry(i, k))?;
                    orth.observe(
                        prod.max_norm(),
                        &[("i", i as i64), ("j", j as i64), ("k", k as i64)],
                    );
                }
                if k != i {
                    let prod = u.entry(i, j).matmul(u.entry(k, j))?;
                    orth.observe(
                        prod.max_norm(),
                        &[("i", i as i64), ("j", j as i64), ("k", k as i64)],
                    );
                }
            }
        }
    }

    let max = proj
        .value()
        .max(row.value())
        .max(col.value())
        .max(orth.value());
    let mut report = CheckReport::new("magic_unitary", tol.eps())
        .with_pass(max <= tol.eps())
        .with_real("projection_violation", proj.value())
        .with_real("row_sum_violation", row.value())
        .with_real("col_sum_violation", col.value())
        .with_real("orthogonality_violation", orth.value())
        .with_real("max_violation", max)
        .with_int("n", u.n() as i64)
        .with_int("d", u.d() as i64);
    let worst = [&proj, &row, &col, &orth]
        .into_iter()
        .max_by(|a, b| a.value().total_cmp(&b.value()))
        .expect("non-empty");
    report = worst.apply_to(report);
    Ok(report)
}

/// The comultiplication applied to a representation: the `n × n` grid with
/// blocks `Δu(i, j) = Σ_k u(i, k) ⊗ u(k, j)` of size `d² × d²`. If `u`
/// satisfies the magic relations so does the result — this is the test that
/// the defining relations survive the coproduct.
pub fn delta_rep(u: &MagicUnitary) -> MagicUnitary {
    let n = u.n();
    let d2 = u.d() * u.d();
    let mut entries = Vec::with_capacity(n * n);
    for i in 1..=n {
        for j in 1..=n {
            let mut sum = ComplexMatrix::zeros(d2, d2);
            for k in 1..=n {
                sum = sum
                    .add(&u.entry(i, k).kron(u.entry(k, j)))
                    .expect("kron blocks share the d² shape");
            }
            entries.push(sum);
        }
    }
    MagicUnitary::new(n, d2, entries).expect("delta_rep preserves the grid shape")
}

/// The `4 × 4` magic unitary with `2 × 2` blocks built from two rank-one
/// projections: `p = diag(1, 0)` and the rotation projection
/// `q(θ) = [[cos²θ, cosθ sinθ], [cosθ sinθ, sin²θ]]`, arranged as
///
/// ```text
/// [ p    1-p  0    0  ]
/// [ 1-p  p    0    0  ]
/// [ 0    0    q    1-q]
/// [ 0    0    1-q  q  ]
/// ```
///
/// For θ with `sinθ cosθ ≠ 0` the blocks `p` and `q` do not commute, so the
/// grid entries generate a noncommutative algebra.
pub fn build_two_projection_magic(theta: f64) -> Result<MagicUnitary, Error> {
    if !theta.is_finite() {
        return Err(Error::Structural(format!(
            "rotation angle must be finite, got {theta}"
        )));
    }
    let (s, c) = theta.sin_cos();
    let p = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0])?;
    let q = ComplexMatrix::from_real(2, 2, &[c * c, c * s, c * s, s * s])?;
    let id = ComplexMatrix::identity(2);
    let zero = ComplexMatrix::zeros(2, 2);
    let p_c = id.sub(&p)?;
    let q_c = id.sub(&q)?;

    let entries = vec![
        p.clone(),
        p_c.clone(),
        zero.clone(),
        zero.clone(), //
        p_c,
        p,
        zero.clone(),
        zero.clone(), //
        zero.clone(),
        zero.clone(),
        q.clone(),
        q_c.clone(), //
        zero.clone(),
        zero,
        q_c,
        q,
    ];
    MagicUnitary::new(4, 2, entries)
}

/// Evidence that a magic unitary's entries do not commute: the pair of grid
/// positions whose commutator has the largest operator norm, provided that
/// norm exceeds the threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenuinenessCertificate {
    /// `((i1, j1), (i2, j2))`, one-based grid positions.
    pub witness_pair: ((usize, usize), (usize, usize)),
    /// Operator norm of `u(i1,j1) u(i2,j2) - u(i2,j2) u(i1,j1)`.
    pub commutator_norm: f64,
}

pub const GENUINENESS_THRESHOLD: f64 = 1e-6;

/// Scan all unordered pairs of grid positions for the largest commutator.
/// Positions are visited in lexicographic order and only a strictly larger
/// norm replaces the current witness, so the returned pair is deterministic.
/// Returns `None` when no commutator norm exceeds `threshold` — in
/// particular, always `None` for scalar grids.
pub fn genuineness_certificate(u: &MagicUnitary, threshold: f64) -> Option<GenuinenessCertificate> {
    let n = u.n();
    let positions: Vec<(usize, usize)> =
        (1..=n).flat_map(|i| (1..=n).map(move |j| (i, j))).collect();
    let mut best: Option<GenuinenessCertificate> = None;
    for (a, &pos1) in positions.iter().enumerate() {
        for &pos2 in &positions[a + 1..] {
            let x = u.entry(pos1.0, pos1.1);
            let y = u.entry(pos2.0, pos2.1);
            let comm = x
                .matmul(y)
                .and_then(|xy| y.matmul(x).and_then(|yx| xy.sub(&yx)))
                .expect("blocks share the dxd shape");
            let norm = comm.operator_norm();
            if norm > threshold && best.as_ref().is_none_or(|b| norm > b.commutator_norm) {
                best = Some(GenuinenessCertificate {
                    witness_pair: (pos1, pos2),
                    commutator_norm: norm,
                });
            }
        }
    }
    best
}

/// Generators for test families of magic unitaries.
pub mod generate {
    use rand::Rng;

    use super::*;

    /// All `n!` permutations of `1..=n` in a deterministic order (Heap's
    /// algorithm), each as a one-based image table.
    pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
        let mut items: Vec<usize> = (1..=n).collect();
        let mut out = Vec::new();
        heap_permute(&mut items, n, &mut out);
        out
    }

    fn heap_permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(items.clone());
            return;
        }
        for i in 0..k {
            heap_permute(items, k - 1, out);
            if k.is_multiple_of(2) {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
    }

    /// A random valid `4 × 4` magic unitary with `2 × 2` blocks: a
    /// two-projection grid at a random angle, conjugated blockwise by a
    /// random unitary `v` (which preserves all relations), with rows and
    /// columns then permuted (which also preserves them).
    pub fn random_block_magic<R: Rng>(rng: &mut R) -> MagicUnitary {
        let theta = rng.gen_range(0.0..std::f64::consts::PI);
        let base = build_two_projection_magic(theta).expect("finite angle");

        // Random 2x2 unitary v = R(phi) * diag(1, e^{i psi}).
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let psi = rng.gen_range(0.0..std::f64::consts::TAU);
        let (sp, cp) = phi.sin_cos();
        let eip = Complex64::new(psi.cos(), psi.sin());
        let v = ComplexMatrix::new(
            2,
            2,
            vec![
                Complex64::new(cp, 0.0),
                Complex64::new(-sp, 0.0) * eip,
                Complex64::new(sp, 0.0),
                Complex64::new(cp, 0.0) * eip,
            ],
        )
        .expect("finite entries");
        let v_adj = v.adjoint();

        let mut row_perm: Vec<usize> = (1..=4).collect();
        let mut col_perm: Vec<usize> = (1..=4).collect();
        shuffle(rng, &mut row_perm);
        shuffle(rng, &mut col_perm);

        let entries: Vec<ComplexMatrix> = (1..=4)
            .flat_map(|i| {
                let row_perm = &row_perm;
                let col_perm = &col_perm;
                let base = &base;
                let v = &v;
                let v_adj = &v_adj;
                (1..=4).map(move |j| {
                    let block = base.entry(row_perm[i - 1], col_perm[j - 1]);
                    v_adj
                        .matmul(block)
                        .and_then(|m| m.matmul(v))
                        .expect("2x2 blocks")
                })
            })
            .collect();
        MagicUnitary::new(4, 2, entries).expect("shape preserved")
    }

    fn shuffle<R: Rng>(rng: &mut R, items: &mut [usize]) {
        for i in (1..items.len()).rev() {
            let j = rng.gen_range(0..=i);
            items.swap(i, j);
        }
    }
}
