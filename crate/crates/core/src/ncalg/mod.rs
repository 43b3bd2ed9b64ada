//! Exact symbolic algebra for the universal algebra generated by an `n × n`
//! grid of self-adjoint idempotents `a(i,j)` whose rows and columns each sum
//! to the identity.
//!
//! Elements are finite linear combinations of tensor words over the
//! generators, with exact rational-complex coefficients — no floating point
//! enters until [`NCPolynomial::evaluate`] substitutes a concrete matrix
//! family. Two layers of simplification are kept deliberately separate:
//!
//! * [`NCPolynomial::normal_form`] applies only the *local* rules
//!   (idempotence `a·a = a`, and `a(i,j)·a(i,k) = a(i,j)·a(k,j) = 0` for
//!   distinct entries sharing a row or column). It is a terminating,
//!   confluent rewriting and is used for soundness-critical reduction.
//! * [`check_identity`] additionally collapses full row or column sums
//!   `Σ_j a(i,j) → 1` inside otherwise identical terms, to a fixed point.
//!   A zero residue proves the identity; a nonzero residue proves nothing
//!   (the relations are not confluent as a whole), so it is reported
//!   verbatim as inconclusive rather than as a failure.

mod parser;

pub use parser::parse_expression;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;
use crate::magic::MagicUnitary;
use crate::numerics::ComplexMatrix;
use crate::report::CheckReport;

/// Exact coefficient: complex number with rational real and imaginary parts.
pub type Coeff = Complex<BigRational>;

/// Convenience: the coefficient `p/q`.
pub fn rational(p: i64, q: i64) -> Coeff {
    Complex::new(
        BigRational::new(BigInt::from(p), BigInt::from(q)),
        BigRational::zero(),
    )
}

fn coeff_one() -> Coeff {
    Complex::one()
}

fn coeff_to_c64(c: &Coeff) -> Result<Complex64, Error> {
    let re =
        c.re.to_f64()
            .ok_or_else(|| Error::Structural("coefficient does not fit in f64".into()))?;
    let im =
        c.im.to_f64()
            .ok_or_else(|| Error::Structural("coefficient does not fit in f64".into()))?;
    Ok(Complex64::new(re, im))
}

/// One generator `a(row, col)`, one-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Generator {
    pub row: u32,
    pub col: u32,
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a({},{})", self.row, self.col)
    }
}

/// A product of generators in each tensor leg. An empty leg is the identity
/// of that factor. Words order lexicographically (legs, then generators), so
/// `BTreeMap<TensorWord, _>` keeps polynomials in a canonical term order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TensorWord {
    legs: Vec<Vec<Generator>>,
}

impl TensorWord {
    pub fn new(legs: Vec<Vec<Generator>>) -> Self {
        Self { legs }
    }

    pub fn unit(legs: usize) -> Self {
        Self {
            legs: vec![Vec::new(); legs],
        }
    }

    pub fn legs(&self) -> &[Vec<Generator>] {
        &self.legs
    }

    /// Total number of generators across all legs.
    pub fn len(&self) -> usize {
        self.legs.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.legs.iter().all(Vec::is_empty)
    }
}

impl fmt::Display for TensorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, leg) in self.legs.iter().enumerate() {
            if idx > 0 {
                write!(f, " # ")?;
            }
            if leg.is_empty() {
                write!(f, "1")?;
            } else {
                for (g_idx, g) in leg.iter().enumerate() {
                    if g_idx > 0 {
                        write!(f, "*")?;
                    }
                    write!(f, "{g}")?;
                }
            }
        }
        Ok(())
    }
}

/// A finite linear combination of tensor words with exact coefficients.
/// Invariants: all words have exactly `legs` legs, every generator index is
/// in `1..=n`, and no stored coefficient is zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NCPolynomial {
    n: u32,
    legs: usize,
    terms: BTreeMap<TensorWord, Coeff>,
}

impl NCPolynomial {
    pub fn zero(n: u32, legs: usize) -> Self {
        assert!(n > 0, "algebra size must be positive");
        assert!(legs > 0, "tensor words need at least one leg");
        Self {
            n,
            legs,
            terms: BTreeMap::new(),
        }
    }

    pub fn unit(n: u32, legs: usize) -> Self {
        let mut p = Self::zero(n, legs);
        p.insert(TensorWord::unit(legs), coeff_one());
        p
    }

    /// The single generator `a(i, j)` as a one-leg polynomial.
    pub fn generator(n: u32, i: u32, j: u32) -> Result<Self, Error> {
        if i == 0 || i > n || j == 0 || j > n {
            return Err(Error::IndexRange { i, j, n });
        }
        let mut p = Self::zero(n, 1);
        p.insert(
            TensorWord::new(vec![vec![Generator { row: i, col: j }]]),
            coeff_one(),
        );
        Ok(p)
    }

    /// Build from an explicit term, validating generator indices.
    pub fn from_term(n: u32, word: TensorWord, coeff: Coeff) -> Result<Self, Error> {
        if word.legs.is_empty() {
            return Err(Error::Dimension(
                "tensor words need at least one leg".into(),
            ));
        }
        for leg in &word.legs {
            for g in leg {
                if g.row == 0 || g.row > n || g.col == 0 || g.col > n {
                    return Err(Error::IndexRange {
                        i: g.row,
                        j: g.col,
                        n,
                    });
                }
            }
        }
        let mut p = Self::zero(n, word.legs.len());
        p.insert(word, coeff);
        Ok(p)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn leg_count(&self) -> usize {
        self.legs
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TensorWord, &Coeff)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total number of generators across all terms and legs.
    pub fn size(&self) -> usize {
        self.terms.keys().map(TensorWord::len).sum()
    }

    fn insert(&mut self, word: TensorWord, coeff: Coeff) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(word) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get().clone() + coeff;
                if sum.is_zero() {
                    o.remove();
                } else {
                    o.insert(sum);
                }
            }
        }
    }

    fn check_compatible(&self, other: &Self, op: &str) -> Result<(), Error> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "{op}: algebra sizes {} and {} differ",
                self.n, other.n
            )));
        }
        if self.legs != other.legs {
            return Err(Error::Dimension(format!(
                "{op}: tensor leg counts {} and {} differ",
                self.legs, other.legs
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, Error> {
        self.check_compatible(other, "add")?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.insert(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, Error> {
        self.check_compatible(other, "sub")?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.insert(w.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, factor: &Coeff) -> Self {
        let mut out = Self::zero(self.n, self.legs);
        for (w, c) in &self.terms {
            out.insert(w.clone(), c.clone() * factor.clone());
        }
        out
    }

    /// Product: words multiply leg-wise by concatenation,
    /// `(x ⊗ y)(x' ⊗ y') = xx' ⊗ yy'`.
    pub fn mul(&self, other: &Self) -> Result<Self, Error> {
        self.check_compatible(other, "mul")?;
        let mut out = Self::zero(self.n, self.legs);
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                let legs = w1
                    .legs
                    .iter()
                    .zip(&w2.legs)
                    .map(|(a, b)| {
                        let mut leg = a.clone();
                        leg.extend_from_slice(b);
                        leg
                    })
                    .collect();
                out.insert(TensorWord::new(legs), c1.clone() * c2.clone());
            }
        }
        Ok(out)
    }

    /// Tensor product: legs of `other` are appended after the legs of `self`.
    pub fn tensor(&self, other: &Self) -> Result<Self, Error> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "tensor: algebra sizes {} and {} differ",
                self.n, other.n
            )));
        }
        let mut out = Self::zero(self.n, self.legs + other.legs);
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                let mut legs = w1.legs.clone();
                legs.extend(w2.legs.iter().cloned());
                out.insert(TensorWord::new(legs), c1.clone() * c2.clone());
            }
        }
        Ok(out)
    }

    /// Adjoint: generators are self-adjoint, so each leg reverses and the
    /// coefficients conjugate.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.n, self.legs);
        for (w, c) in &self.terms {
            let legs = w
                .legs
                .iter()
                .map(|leg| leg.iter().rev().copied().collect())
                .collect();
            out.insert(TensorWord::new(legs), c.conj());
        }
        out
    }

    /// Normal form under the local rules only: adjacent equal generators
    /// merge (idempotence), and adjacent distinct generators sharing a row
    /// or a column annihilate the term. See [`normal_form_counted`] for the
    /// step count.
    ///
    /// [`normal_form_counted`]: NCPolynomial::normal_form_counted
    pub fn normal_form(&self) -> Self {
        self.normal_form_counted().0
    }

    /// Normal form together with the number of rewrite steps taken (one step
    /// per adjacent-pair examination). A single left-to-right pass with a
    /// stack suffices: merging never creates a new reducible pair that the
    /// pass does not immediately see.
    pub fn normal_form_counted(&self) -> (Self, usize) {
        let mut steps = 0usize;
        let mut out = Self::zero(self.n, self.legs);
        'term: for (word, coeff) in &self.terms {
            let mut legs = Vec::with_capacity(word.legs.len());
            for leg in &word.legs {
                match reduce_leg(leg, &mut steps) {
                    Some(reduced) => legs.push(reduced),
                    None => continue 'term,
                }
            }
            out.insert(TensorWord::new(legs), coeff.clone());
        }
        (out, steps)
    }

    /// Apply the comultiplication `a(i,j) ↦ Σ_k a(i,k) ⊗ a(k,j)` to leg
    /// `leg_idx`, splitting it into two legs; all other legs pass through.
    pub fn apply_delta_to_leg(&self, leg_idx: usize) -> Result<Self, Error> {
        if leg_idx >= self.legs {
            return Err(Error::Dimension(format!(
                "leg index {leg_idx} out of range for {} legs",
                self.legs
            )));
        }
        let mut out = Self::zero(self.n, self.legs + 1);
        for (word, coeff) in &self.terms {
            let mut expanded = Self::unit(self.n, 2);
            for g in &word.legs[leg_idx] {
                expanded = expanded.mul(&delta(self.n, g.row, g.col)?)?;
            }
            for (dword, dcoeff) in &expanded.terms {
                let mut legs = Vec::with_capacity(self.legs + 1);
                legs.extend_from_slice(&word.legs[..leg_idx]);
                legs.push(dword.legs[0].clone());
                legs.push(dword.legs[1].clone());
                legs.extend_from_slice(&word.legs[leg_idx + 1..]);
                out.insert(TensorWord::new(legs), coeff.clone() * dcoeff.clone());
            }
        }
        Ok(out)
    }

    /// Substitute the blocks of `u` for the generators: within a leg,
    /// generators multiply as matrices; across legs, the results combine by
    /// Kronecker product. The result is a `dᴸ × dᴸ` matrix for `L` legs.
    pub fn evaluate(&self, u: &MagicUnitary) -> Result<ComplexMatrix, Error> {
        if self.n as usize != u.n() {
            return Err(Error::Dimension(format!(
                "evaluate: polynomial is over a size-{} algebra, unitary has size {}",
                self.n,
                u.n()
            )));
        }
        let d = u.d();
        let dim = d.pow(self.legs as u32);
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for (word, coeff) in &self.terms {
            let mut kron_all: Option<ComplexMatrix> = None;
            for leg in &word.legs {
                let mut m = ComplexMatrix::identity(d);
                for g in leg {
                    m = m.matmul(u.entry(g.row as usize, g.col as usize))?;
                }
                kron_all = Some(match kron_all {
                    None => m,
                    Some(k) => k.kron(&m),
                });
            }
            let term = kron_all.expect("legs >= 1").scale(coeff_to_c64(coeff)?);
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }
}

/// Stack reduction of one leg. `None` means the whole term is zero.
fn reduce_leg(leg: &[Generator], steps: &mut usize) -> Option<Vec<Generator>> {
    let mut stack: Vec<Generator> = Vec::with_capacity(leg.len());
    for &g in leg {
        if let Some(&top) = stack.last() {
            *steps += 1;
            if top == g {
                continue; // a·a = a
            }
            if top.row == g.row || top.col == g.col {
                return None; // distinct entries in a row or column multiply to 0
            }
        }
        stack.push(g);
    }
    Some(stack)
}

/// The comultiplication of one generator: `Σ_k a(i,k) ⊗ a(k,j)`.
pub fn delta(n: u32, i: u32, j: u32) -> Result<NCPolynomial, Error> {
    if i == 0 || i > n || j == 0 || j > n {
        return Err(Error::IndexRange { i, j, n });
    }
    let mut p = NCPolynomial::zero(n, 2);
    for k in 1..=n {
        p.insert(
            TensorWord::new(vec![
                vec![Generator { row: i, col: k }],
                vec![Generator { row: k, col: j }],
            ]),
            coeff_one(),
        );
    }
    Ok(p)
}

#[derive(Clone, Copy)]
enum Axis {
    /// Fixed row, column index runs over `1..=n` (a row sum).
    Row,
    /// Fixed column, row index runs over `1..=n`.
    Col,
}

/// Scan for one applicable full-sum collapse: `n` terms with identical
/// coefficient, identical except at a single position where the generator
/// runs over a complete row or column. Terms are scanned in canonical order
/// and the first applicable collapse is taken, so the reduction path is
/// deterministic. Returns the collapsed polynomial, re-normalized (deleting
/// a position can create a new adjacency).
#[allow(clippy::needless_range_loop)]
fn try_collapse_once(p: &NCPolynomial) -> Option<NCPolynomial> {
    let n = p.n;
    for (word, coeff) in &p.terms {
        for (li, leg) in word.legs.iter().enumerate() {
            for pi in 0..leg.len() {
                for axis in [Axis::Row, Axis::Col] {
                    let g = leg[pi];
                    let complete = (1..=n).all(|v| {
                        let variant = replace_at(word, li, pi, g, axis, v);
                        p.terms.get(&variant) == Some(coeff)
                    });
                    if !complete {
                        continue;
                    }
                    let mut out = p.clone();
                    for v in 1..=n {
                        out.terms.remove(&replace_at(word, li, pi, g, axis, v));
                    }
                    let mut ctx_legs = word.legs.clone();
                    ctx_legs[li].remove(pi);
                    out.insert(TensorWord::new(ctx_legs), coeff.clone());
                    return Some(out.normal_form());
                }
            }
        }
    }
    None
}

fn replace_at(
    word: &TensorWord,
    li: usize,
    pi: usize,
    g: Generator,
    axis: Axis,
    v: u32,
) -> TensorWord {
    let mut legs = word.legs.clone();
    legs[li][pi] = match axis {
        Axis::Row => Generator { row: g.row, col: v },
        Axis::Col => Generator { row: v, col: g.col },
    };
    TensorWord::new(legs)
}

/// Repeated collapses until none applies. Terminates because each collapse
/// strictly decreases the total generator count.
pub fn collapse_to_fixed_point(p: NCPolynomial) -> (NCPolynomial, usize) {
    let mut current = p;
    let mut rounds = 0;
    while let Some(next) = try_collapse_once(&current) {
        current = next;
        rounds += 1;
    }
    (current, rounds)
}

/// Decide `lhs = rhs` by rewriting `lhs - rhs`: local normal form first, then
/// full-sum collapses to a fixed point. A zero residue is a proof and passes;
/// anything else is reported inconclusive (`pass: null`) with the residue
/// verbatim in `detail` — the rewriting is sound but not complete, so a
/// nonzero residue must not be read as a disproof.
pub fn check_identity(lhs: &NCPolynomial, rhs: &NCPolynomial) -> Result<CheckReport, Error> {
    lhs.check_compatible(rhs, "check_identity")?;
    let diff = lhs.sub(rhs)?;
    let (nf, steps) = diff.normal_form_counted();
    let (residue, collapses) = collapse_to_fixed_point(nf);
    let mut report = CheckReport::new("identity", 0.0)
        .with_int("rewrite_steps", steps as i64)
        .with_int("collapses", collapses as i64)
        .with_int("residue_terms", residue.term_count() as i64);
    if residue.is_zero() {
        report = report.with_pass(true);
    } else {
        report.pass = None;
        report = report.with_detail(residue.to_string());
    }
    Ok(report)
}

/// Symbolic coassociativity: for every generator, applying the
/// comultiplication to either leg of `Δa(i,j)` must give the same multiset
/// of three-leg words. The two sides agree term-by-term after the inner
/// summation indices are relabeled, so the comparison is exact equality of
/// canonical polynomials — no rewriting involved.
pub fn coassoc_check(n: u32) -> Result<CheckReport, Error> {
    if n == 0 {
        return Err(Error::Structural("algebra size must be positive".into()));
    }
    let mut all_equal = true;
    let mut words = 0usize;
    let mut worst: Option<(u32, u32)> = None;
    for i in 1..=n {
        for j in 1..=n {
            let d = delta(n, i, j)?;
            let lhs = d.apply_delta_to_leg(0)?;
            let rhs = d.apply_delta_to_leg(1)?;
            words += lhs.term_count();
            if lhs != rhs && worst.is_none() {
                all_equal = false;
                worst = Some((i, j));
            }
        }
    }
    let mut report = CheckReport::new("coassociativity_symbolic", 0.0)
        .with_pass(all_equal)
        .with_int("n", n as i64)
        .with_int("generators", (n * n) as i64)
        .with_int("words_compared", words as i64);
    if let Some((i, j)) = worst {
        report = report.with_worst("i", i as i64).with_worst("j", j as i64);
    }
    Ok(report)
}

/// Run [`check_identity`] over the defining relations of the algebra:
/// idempotence and self-adjointness of each generator, row and column sums,
/// orthogonality within rows and columns, and compatibility of the
/// comultiplication with the row sums (`Σ_j Δa(i,j) = 1 ⊗ 1`). Everything
/// here is provable by the rewriting, so any inconclusive outcome fails the
/// suite.
pub fn relation_suite(n: u32) -> Result<CheckReport, Error> {
    if n == 0 {
        return Err(Error::Structural("algebra size must be positive".into()));
    }
    let one = NCPolynomial::unit(n, 1);
    let one_one = NCPolynomial::unit(n, 2);
    let zero = NCPolynomial::zero(n, 1);
    let mut checked = 0usize;
    let mut failed: Option<String> = None;

    let mut run = |name: String, lhs: &NCPolynomial, rhs: &NCPolynomial| -> Result<(), Error> {
        checked += 1;
        if failed.is_none() {
            let r = check_identity(lhs, rhs)?;
            if !r.passed() {
                failed = Some(format!(
                    "{name}: residue {}",
                    r.detail.unwrap_or_else(|| "0".into())
                ));
            }
        }
        Ok(())
    };

    for i in 1..=n {
        for j in 1..=n {
            let a = NCPolynomial::generator(n, i, j)?;
            run(format!("idempotent a({i},{j})"), &a.mul(&a)?, &a)?;
            run(format!("self-adjoint a({i},{j})"), &a.adjoint(), &a)?;
        }
    }
    for i in 1..=n {
        let mut row = NCPolynomial::zero(n, 1);
        let mut col = NCPolynomial::zero(n, 1);
        for j in 1..=n {
            row = row.add(&NCPolynomial::generator(n, i, j)?)?;
            col = col.add(&NCPolynomial::generator(n, j, i)?)?;
        }
        run(format!("row sum {i}"), &row, &one)?;
        run(format!("column sum {i}"), &col, &one)?;
    }
    for i in 1..=n {
        for j in 1..=n {
            let aij = NCPolynomial::generator(n, i, j)?;
            for k in 1..=n {
                if k != j {
                    let aik = NCPolynomial::generator(n, i, k)?;
                    run(
                        format!("row orthogonality ({i};{j},{k})"),
                        &aij.mul(&aik)?,
                        &zero,
                    )?;
                }
                if k != i {
                    let akj = NCPolynomial::generator(n, k, j)?;
                    run(
                        format!("column orthogonality ({j};{i},{k})"),
                        &aij.mul(&akj)?,
                        &zero,
                    )?;
                }
            }
        }
    }
    for i in 1..=n {
        let mut sum = NCPolynomial::zero(n, 2);
        for j in 1..=n {
            sum = sum.add(&delta(n, i, j)?)?;
        }
        run(format!("coproduct row sum {i}"), &sum, &one_one)?;
    }

    let mut report = CheckReport::new("relation_suite", 0.0)
        .with_pass(failed.is_none())
        .with_int("n", n as i64)
        .with_int("identities_checked", checked as i64);
    if let Some(msg) = failed {
        report = report.with_detail(msg);
    }
    Ok(report)
}

fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// `None` means the magnitude is exactly one and should be omitted before a
/// non-unit word.
fn format_coeff_magnitude(c: &Coeff) -> Option<String> {
    if c.im.is_zero() {
        if c.re.is_one() {
            None
        } else {
            Some(format_rational(&c.re))
        }
    } else {
        let im = if c.im.is_negative() {
            format!("-{}i", format_rational(&-c.im.clone()))
        } else {
            format!("+{}i", format_rational(&c.im))
        };
        Some(format!("({}{})", format_rational(&c.re), im))
    }
}

impl fmt::Display for NCPolynomial {
    /// Canonical text form, parseable back by [`parse_expression`] whenever
    /// all coefficients are real (complex coefficients render with an `(a+bi)`
    /// prefix that the grammar does not cover).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (word, coeff)) in self.terms.iter().enumerate() {
            let negative = coeff.im.is_zero() && coeff.re.is_negative();
            let magnitude = if negative {
                -coeff.clone()
            } else {
                coeff.clone()
            };
            if idx == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            match format_coeff_magnitude(&magnitude) {
                Some(s) => write!(f, "{s} {word}")?,
                None => write!(f, "{word}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gen(i: u32, j: u32) -> Generator {
        Generator { row: i, col: j }
    }

    fn parse(s: &str, n: u32) -> NCPolynomial {
        parse_expression(s, n).unwrap()
    }

    #[test]
    fn normal_form_idempotence_rule() {
        let p = parse("a(1,1)*a(1,1)", 4);
        assert_eq!(p.normal_form(), parse("a(1,1)", 4));

        let triple = parse("a(2,3)*a(2,3)*a(2,3)", 4);
        assert_eq!(triple.normal_form(), parse("a(2,3)", 4));
    }

    #[test]
    fn normal_form_orthogonality_rule() {
        // Same row, different column.
        assert!(parse("a(1,1)*a(1,2)", 4).normal_form().is_zero());
        // Same column, different row.
        assert!(parse("a(1,1)*a(2,1)", 4).normal_form().is_zero());
        // Unrelated entries survive.
        let p = parse("a(1,1)*a(2,2)", 4);
        assert_eq!(p.normal_form(), p);
    }

    #[test]
    fn normal_form_cascade() {
        // Merging the middle pair leaves a(1,1)*a(2,2)*a(1,1), irreducible.
        let p = parse("a(1,1)*a(2,2)*a(2,2)*a(1,1)", 4);
        let nf = p.normal_form();
        assert_eq!(nf, parse("a(1,1)*a(2,2)*a(1,1)", 4));

        // Merging can expose an annihilating pair.
        let q = parse("a(1,1)*a(2,2)*a(2,2)*a(2,3)", 4);
        assert!(q.normal_form().is_zero());
    }

    #[test]
    fn normal_form_acts_per_leg() {
        let p = parse("a(1,1)*a(1,1) # a(1,1)*a(1,2)", 4);
        // Second leg annihilates, so the whole term is zero.
        assert!(p.normal_form().is_zero());

        let q = parse("a(1,1)*a(1,1) # a(2,2)", 4);
        assert_eq!(q.normal_form(), parse("a(1,1) # a(2,2)", 4));
    }

    #[test]
    fn normal_form_merges_coefficients() {
        let p = parse("a(1,1)*a(1,1) + a(1,1)", 4);
        assert_eq!(p.normal_form(), parse("2 a(1,1)", 4));

        let cancel = parse("a(1,1)*a(1,1) - a(1,1)", 4);
        assert!(cancel.normal_form().is_zero());
    }

    #[test]
    fn normal_form_is_exactly_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..200 {
            let p = random_poly(&mut rng, 4, 2);
            let once = p.normal_form();
            assert_eq!(once.normal_form(), once);
        }
    }

    #[test]
    fn normal_form_step_budget() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let p = random_poly(&mut rng, 4, 2);
            let size = p.size();
            let (_, steps) = p.normal_form_counted();
            assert!(
                steps <= 10 * size * size + 10,
                "steps={steps} for size={size}"
            );
        }
    }

    #[test]
    fn check_identity_defining_relations() {
        let n = 4;
        let a = NCPolynomial::generator(n, 2, 3).unwrap();
        assert!(check_identity(&a.mul(&a).unwrap(), &a).unwrap().passed());

        let mut row = NCPolynomial::zero(n, 1);
        for j in 1..=n {
            row = row.add(&NCPolynomial::generator(n, 1, j).unwrap()).unwrap();
        }
        assert!(check_identity(&row, &NCPolynomial::unit(n, 1))
            .unwrap()
            .passed());
    }

    #[test]
    fn check_identity_scaled_row_sum() {
        // (3/7) Σ_i a(2,i) = 3/7 · 1: collapse must respect a shared
        // non-unit coefficient.
        let n = 4;
        let c = rational(3, 7);
        let mut lhs = NCPolynomial::zero(n, 1);
        for i in 1..=n {
            lhs = lhs
                .add(&NCPolynomial::generator(n, 2, i).unwrap().scale(&c))
                .unwrap();
        }
        let rhs = NCPolynomial::unit(n, 1).scale(&c);
        assert!(check_identity(&lhs, &rhs).unwrap().passed());
    }

    #[test]
    fn check_identity_column_sum_and_mixed() {
        let n = 3;
        let mut col = NCPolynomial::zero(n, 1);
        for i in 1..=n {
            col = col.add(&NCPolynomial::generator(n, i, 2).unwrap()).unwrap();
        }
        assert!(check_identity(&col, &NCPolynomial::unit(n, 1))
            .unwrap()
            .passed());

        // A collapse with untouched context legs:
        // Σ_j a(2,2) ⊗ a(3,j) = a(2,2) ⊗ 1.
        let mut lhs = NCPolynomial::zero(n, 2);
        let prefix = NCPolynomial::generator(n, 2, 2).unwrap();
        for j in 1..=n {
            lhs = lhs
                .add(
                    &prefix
                        .tensor(&NCPolynomial::generator(n, 3, j).unwrap())
                        .unwrap(),
                )
                .unwrap();
        }
        let rhs = prefix.tensor(&NCPolynomial::unit(n, 1)).unwrap();
        assert!(check_identity(&lhs, &rhs).unwrap().passed());
    }

    #[test]
    fn check_identity_same_leg_gap_is_inconclusive() {
        // Σ_j a(2,2)·a(3,j) equals a(2,2) in the algebra, but the j = 2 term
        // annihilates under the local rules first (a(3,2) shares a column
        // with a(2,2)), so the remaining sum is incomplete and no collapse
        // applies. The procedure must report this inconclusive — a nonzero
        // residue is never a disproof.
        let n = 3;
        let prefix = NCPolynomial::generator(n, 2, 2).unwrap();
        let mut lhs = NCPolynomial::zero(n, 1);
        for j in 1..=n {
            lhs = lhs
                .add(
                    &prefix
                        .mul(&NCPolynomial::generator(n, 3, j).unwrap())
                        .unwrap(),
                )
                .unwrap();
        }
        let report = check_identity(&lhs, &prefix).unwrap();
        assert_eq!(report.pass, None);
        let residue = report.detail.unwrap();
        assert!(residue.contains("a(2,2)*a(3,1)"), "{residue}");
    }

    #[test]
    fn check_identity_inconclusive_residue_is_verbatim() {
        let n = 4;
        let lhs = NCPolynomial::generator(n, 1, 1).unwrap();
        let rhs = NCPolynomial::generator(n, 2, 2).unwrap();
        let report = check_identity(&lhs, &rhs).unwrap();
        assert_eq!(report.pass, None);
        assert_eq!(report.detail.as_deref(), Some("a(1,1) - a(2,2)"));
    }

    #[test]
    fn coproduct_row_sums_collapse_to_unit_tensor_unit() {
        for n in 1..=6u32 {
            for i in 1..=n {
                let mut sum = NCPolynomial::zero(n, 2);
                for j in 1..=n {
                    sum = sum.add(&delta(n, i, j).unwrap()).unwrap();
                }
                let report = check_identity(&sum, &NCPolynomial::unit(n, 2)).unwrap();
                assert!(report.passed(), "n={n}, i={i}: {report:?}");
            }
        }
    }

    #[test]
    fn relation_suite_passes_small_sizes() {
        for n in 1..=6u32 {
            let report = relation_suite(n).unwrap();
            assert!(report.passed(), "n={n}: {:?}", report.detail);
        }
    }

    #[test]
    fn coassoc_exact() {
        for n in [1u32, 3, 6] {
            let report = coassoc_check(n).unwrap();
            assert!(report.passed(), "n={n}");
        }
        // Each side of each generator identity has n² summands.
        let d = delta(3, 1, 2).unwrap();
        assert_eq!(d.apply_delta_to_leg(0).unwrap().term_count(), 9);
        assert_eq!(d.apply_delta_to_leg(1).unwrap().term_count(), 9);
    }

    #[test]
    fn adjoint_reverses_and_conjugates() {
        let p = parse("a(1,2)*a(3,4)", 4);
        assert_eq!(p.adjoint(), parse("a(3,4)*a(1,2)", 4));

        let ci = Complex::new(BigRational::zero(), BigRational::one());
        let q = parse("a(1,1)", 4).scale(&ci);
        let q_adj = q.adjoint();
        let (_, coeff) = q_adj.terms().next().unwrap();
        assert_eq!(
            coeff,
            &Complex::new(BigRational::zero(), -BigRational::one())
        );
    }

    #[test]
    fn evaluate_agrees_with_matrix_arithmetic() {
        let u = crate::magic::build_two_projection_magic(0.6).unwrap();
        let p = parse("a(1,1)*a(3,3) + 2 a(2,2)", 4);
        let expected = u
            .entry(1, 1)
            .matmul(u.entry(3, 3))
            .unwrap()
            .add(&u.entry(2, 2).scale(Complex64::new(2.0, 0.0)))
            .unwrap();
        let got = p.evaluate(&u).unwrap();
        assert!(got.max_diff(&expected).unwrap() == 0.0);
    }

    #[test]
    fn evaluate_kron_across_legs() {
        let u = crate::magic::build_two_projection_magic(0.6).unwrap();
        let p = parse("a(1,1) # a(3,3)", 4);
        let expected = u.entry(1, 1).kron(u.entry(3, 3));
        assert_eq!(p.evaluate(&u).unwrap(), expected);
        assert_eq!(p.evaluate(&u).unwrap().rows(), 4);
    }

    #[test]
    fn evaluate_rejects_size_mismatch() {
        let u = crate::magic::build_two_projection_magic(0.6).unwrap();
        let p = parse("a(1,1)", 3);
        assert!(p.evaluate(&u).is_err());
    }

    #[test]
    fn normal_form_soundness_on_random_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..50 {
            let u = crate::magic::generate::random_block_magic(&mut rng);
            let p = random_poly(&mut rng, 4, 1);
            let before = p.evaluate(&u).unwrap();
            let after = p.normal_form().evaluate(&u).unwrap();
            let diff = before.max_diff(&after).unwrap();
            assert!(diff <= 1e-9, "trial {trial}: diff {diff}");
        }
    }

    #[test]
    fn display_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let p = random_poly(&mut rng, 4, 2);
            let text = p.to_string();
            let back = parse_expression(&text, 4)
                .unwrap_or_else(|e| panic!("failed to reparse {text:?}: {e}"));
            if p.is_zero() {
                // "0" carries no leg count; only the value must agree.
                assert!(back.is_zero());
            } else {
                assert_eq!(back, p, "text: {text}");
            }
        }
    }

    #[test]
    fn display_fixed_examples() {
        assert_eq!(NCPolynomial::zero(4, 1).to_string(), "0");
        assert_eq!(NCPolynomial::unit(4, 2).to_string(), "1 # 1");
        let p = parse("a(1,1) - 3/7 a(2,2)", 4);
        assert_eq!(p.to_string(), "a(1,1) - 3/7 a(2,2)");
        let neg_first = parse("-2 a(1,1)", 4);
        assert_eq!(neg_first.to_string(), "-2 a(1,1)");
    }

    /// Random polynomial with real rational coefficients: up to four terms,
    /// legs of length at most three.
    fn random_poly(rng: &mut ChaCha8Rng, n: u32, legs: usize) -> NCPolynomial {
        let mut p = NCPolynomial::zero(n, legs);
        let terms = rng.gen_range(1..=4);
        for _ in 0..terms {
            let mut word_legs = Vec::with_capacity(legs);
            for _ in 0..legs {
                let len = rng.gen_range(0..=3);
                word_legs.push(
                    (0..len)
                        .map(|_| gen(rng.gen_range(1..=n), rng.gen_range(1..=n)))
                        .collect(),
                );
            }
            let num = rng.gen_range(-3i64..=3);
            let den = rng.gen_range(1i64..=4);
            if num == 0 {
                continue;
            }
            p = p
                .add(
                    &NCPolynomial::from_term(n, TensorWord::new(word_legs), rational(num, den))
                        .unwrap(),
                )
                .unwrap();
        }
        p
    }
}
