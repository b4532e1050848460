//! Mendelian heredity for one locus with two alleles.
//!
//! Genotypes are indexed AA = 1, Aa = 2, aa = 3 and stored in that order.
//! Random mating maps an adult population `x` to the offspring repartition
//! `((u_A·x)², 2(u_A·x)(u_a·x), (u_a·x)²) / (1·x)`, where `u_A = (1, ½, 0)`
//! and `u_a = (0, ½, 1)` count allele copies per genotype.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Totals below this are treated as an empty population.
pub const MIN_TOTAL: f64 = 1e-300;

/// Allele-copy weights of allele `A` per genotype.
pub const U_A: [f64; 3] = [1.0, 0.5, 0.0];
/// Allele-copy weights of allele `a` per genotype.
pub const U_LOWER_A: [f64; 3] = [0.0, 0.5, 1.0];
pub const ONES: [f64; 3] = [1.0, 1.0, 1.0];

#[inline]
pub fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Population sizes of the genotypes AA, Aa and aa.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GenotypeVector(pub [f64; 3]);

impl GenotypeVector {
    pub const ZERO: GenotypeVector = GenotypeVector([0.0; 3]);

    pub const fn new(x1: f64, x2: f64, x3: f64) -> Self {
        GenotypeVector([x1, x2, x3])
    }

    /// Builds a state, rejecting negative or non-finite components.
    pub fn try_new(x: [f64; 3]) -> Result<Self> {
        for (i, &c) in x.iter().enumerate() {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::invalid(
                    format!("x{}", i + 1),
                    format!("population counts must be finite and nonnegative, got {c}"),
                ));
            }
        }
        Ok(GenotypeVector(x))
    }

    /// Canonical basis state `e_i` (1-based genotype index).
    pub fn basis(i: usize) -> Self {
        assert!((1..=3).contains(&i), "genotype index must be 1, 2 or 3");
        let mut x = [0.0; 3];
        x[i - 1] = 1.0;
        GenotypeVector(x)
    }

    #[inline]
    pub fn as_array(&self) -> &[f64; 3] {
        &self.0
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    #[inline]
    pub fn dot(&self, weights: &[f64; 3]) -> f64 {
        dot3(&self.0, weights)
    }

    pub fn scale(&self, factor: f64) -> Self {
        GenotypeVector(self.0.map(|c| c * factor))
    }

    /// Componentwise product with a diagonal matrix.
    pub fn hadamard(&self, diag: &[f64; 3]) -> Self {
        GenotypeVector([self.0[0] * diag[0], self.0[1] * diag[1], self.0[2] * diag[2]])
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }
}

impl Index<usize> for GenotypeVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for GenotypeVector {
    type Output = GenotypeVector;
    fn add(self, rhs: Self) -> Self {
        GenotypeVector([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1], self.0[2] + rhs.0[2]])
    }
}

impl Sub for GenotypeVector {
    type Output = GenotypeVector;
    fn sub(self, rhs: Self) -> Self {
        GenotypeVector([self.0[0] - rhs.0[0], self.0[1] - rhs.0[1], self.0[2] - rhs.0[2]])
    }
}

impl Mul<GenotypeVector> for f64 {
    type Output = GenotypeVector;
    fn mul(self, rhs: GenotypeVector) -> GenotypeVector {
        rhs.scale(self)
    }
}

impl From<[f64; 3]> for GenotypeVector {
    fn from(x: [f64; 3]) -> Self {
        GenotypeVector(x)
    }
}

impl fmt::Display for GenotypeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Allele {
    /// Allele `A`, carried twice by genotype 1.
    A,
    /// Allele `a`, carried twice by genotype 3.
    #[serde(rename = "a")]
    LowerA,
}

impl Allele {
    pub const BOTH: [Allele; 2] = [Allele::A, Allele::LowerA];

    /// Allele-copy weights per genotype.
    pub fn weights(self) -> &'static [f64; 3] {
        match self {
            Allele::A => &U_A,
            Allele::LowerA => &U_LOWER_A,
        }
    }
}

impl fmt::Display for Allele {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Allele::A => "A",
            Allele::LowerA => "a",
        })
    }
}

/// Allele content `u_j·x`.
#[inline]
pub fn allele_count(x: &GenotypeVector, allele: Allele) -> f64 {
    x.dot(allele.weights())
}

fn checked_total(x: &GenotypeVector) -> Result<f64> {
    let total = x.total();
    if total.abs() < MIN_TOTAL {
        return Err(Error::ZeroPopulation { total });
    }
    Ok(total)
}

pub fn allele_frequency(x: &GenotypeVector, allele: Allele) -> Result<f64> {
    let total = checked_total(x)?;
    Ok(allele_count(x, allele) / total)
}

/// Heredity operator: genotype repartition of the offspring under random mating.
pub fn mendel_offspring(x: &GenotypeVector) -> Result<GenotypeVector> {
    let total = checked_total(x)?;
    let p = allele_count(x, Allele::A);
    let q = allele_count(x, Allele::LowerA);
    Ok(GenotypeVector([p * p / total, 2.0 * p * q / total, q * q / total]))
}

/// Symmetric 3×3 matrix `G_i` with `α_i(x) = xᵀ G_i x / 1ᵀx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InheritanceMatrix(pub [[f64; 3]; 3]);

impl InheritanceMatrix {
    fn outer_sym(a: &[f64; 3], b: &[f64; 3]) -> Self {
        let mut g = [[0.0; 3]; 3];
        for (r, row) in g.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = if a == b { a[r] * b[c] } else { a[r] * b[c] + b[r] * a[c] };
            }
        }
        InheritanceMatrix(g)
    }

    /// `G_1 = u_A u_Aᵀ`, `G_2 = u_A u_aᵀ + u_a u_Aᵀ`, `G_3 = u_a u_aᵀ` (1-based).
    pub fn for_genotype(i: usize) -> Self {
        match i {
            1 => Self::outer_sym(&U_A, &U_A),
            2 => Self::outer_sym(&U_A, &U_LOWER_A),
            3 => Self::outer_sym(&U_LOWER_A, &U_LOWER_A),
            _ => panic!("genotype index must be 1, 2 or 3"),
        }
    }

    pub fn all() -> [InheritanceMatrix; 3] {
        [Self::for_genotype(1), Self::for_genotype(2), Self::for_genotype(3)]
    }

    pub fn quadratic_form(&self, x: &GenotypeVector) -> f64 {
        let mut acc = 0.0;
        for r in 0..3 {
            for c in 0..3 {
                acc += x.0[r] * self.0[r][c] * x.0[c];
            }
        }
        acc
    }

    pub fn is_symmetric(&self) -> bool {
        (0..3).all(|r| (0..3).all(|c| self.0[r][c] == self.0[c][r]))
    }
}

/// Heredity operator evaluated through the inheritance matrices.
pub fn mendel_offspring_quadratic(x: &GenotypeVector) -> Result<GenotypeVector> {
    let total = checked_total(x)?;
    let g = InheritanceMatrix::all();
    Ok(GenotypeVector([
        g[0].quadratic_form(x) / total,
        g[1].quadratic_form(x) / total,
        g[2].quadratic_form(x) / total,
    ]))
}

/// Hardy-Weinberg proportions `(p², 2pq, q²)` for allele-A frequency `p`.
pub fn hardy_weinberg_proportions(p: f64) -> GenotypeVector {
    let q = 1.0 - p;
    GenotypeVector([p * p, 2.0 * p * q, q * q])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateClass {
    Zero,
    /// Only one homozygote is present.
    Monomorphic(Allele),
    /// Both alleles present but some genotype absent.
    Polymorphic,
    /// All three genotypes present.
    Holomorphic,
}

/// Classifies a state; components `<= tol` count as absent.
pub fn classify_state_with_tol(x: &GenotypeVector, tol: f64) -> StateClass {
    let present = x.0.map(|c| c > tol);
    match present {
        [false, false, false] => StateClass::Zero,
        [true, false, false] => StateClass::Monomorphic(Allele::A),
        [false, false, true] => StateClass::Monomorphic(Allele::LowerA),
        [true, true, true] => StateClass::Holomorphic,
        _ => StateClass::Polymorphic,
    }
}

pub fn classify_state(x: &GenotypeVector) -> StateClass {
    classify_state_with_tol(x, 0.0)
}

/// Both alleles present (`u_A·x > 0` and `u_a·x > 0`).
pub fn is_polymorphic(x: &GenotypeVector) -> bool {
    allele_count(x, Allele::A) > 0.0 && allele_count(x, Allele::LowerA) > 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn state() -> impl Strategy<Value = GenotypeVector> {
        (0.0..1e3f64, 0.0..1e3f64, 0.0..1e3f64)
            .prop_filter("nonzero", |(a, b, c)| a + b + c > 1e-6)
            .prop_map(|(a, b, c)| GenotypeVector::new(a, b, c))
    }

    #[test]
    fn allele_counts() {
        assert_eq!(allele_count(&GenotypeVector::new(1.0, 0.0, 0.0), Allele::A), 1.0);
        assert_eq!(allele_count(&GenotypeVector::new(0.0, 1.0, 0.0), Allele::A), 0.5);
        assert_eq!(allele_count(&GenotypeVector::new(1.0, 2.0, 3.0), Allele::LowerA), 4.0);
    }

    #[test]
    fn allele_frequencies() {
        let f = |x: [f64; 3], j| allele_frequency(&x.into(), j).unwrap();
        assert_eq!(f([1.0, 0.0, 1.0], Allele::A), 0.5);
        assert_eq!(f([1.0, 0.0, 0.0], Allele::LowerA), 0.0);
        assert_relative_eq!(f([1.0, 2.0, 3.0], Allele::A), 2.0 / 6.0, max_relative = 1e-15);
        assert!(matches!(
            allele_frequency(&GenotypeVector::ZERO, Allele::A),
            Err(Error::ZeroPopulation { .. })
        ));
    }

    #[test]
    fn offspring_examples() {
        let c = 3.7;
        assert_eq!(
            mendel_offspring(&GenotypeVector::new(c, 0.0, 0.0)).unwrap(),
            GenotypeVector::new(c, 0.0, 0.0)
        );
        assert_eq!(
            mendel_offspring(&GenotypeVector::new(0.0, 1.0, 0.0)).unwrap(),
            GenotypeVector::new(0.25, 0.5, 0.25)
        );
        assert_eq!(
            mendel_offspring(&GenotypeVector::new(1.0, 0.0, 1.0)).unwrap(),
            GenotypeVector::new(0.5, 1.0, 0.5)
        );
    }

    #[test]
    fn offspring_rejects_empty_and_tiny_totals() {
        assert!(mendel_offspring(&GenotypeVector::ZERO).is_err());
        assert!(mendel_offspring(&GenotypeVector::new(1e-301, 0.0, 0.0)).is_err());
        assert!(mendel_offspring_quadratic(&GenotypeVector::ZERO).is_err());
    }

    #[test]
    fn inheritance_matrices_match_the_punnett_table() {
        let g = InheritanceMatrix::all();
        assert_eq!(g[0].0, [[1.0, 0.5, 0.0], [0.5, 0.25, 0.0], [0.0, 0.0, 0.0]]);
        assert_eq!(g[1].0, [[0.0, 0.5, 1.0], [0.5, 0.5, 0.5], [1.0, 0.5, 0.0]]);
        assert_eq!(g[2].0, [[0.0, 0.0, 0.0], [0.0, 0.25, 0.5], [0.0, 0.5, 1.0]]);
        let mut sum = [[0.0; 3]; 3];
        for m in &g {
            assert!(m.is_symmetric());
            for (row, src) in sum.iter_mut().zip(&m.0) {
                for (s, v) in row.iter_mut().zip(src) {
                    *s += v;
                }
            }
        }
        assert_eq!(sum, [[1.0; 3]; 3]);
    }

    #[test]
    fn classification() {
        let c = |x: [f64; 3]| classify_state(&x.into());
        assert_eq!(c([0.0, 0.0, 0.0]), StateClass::Zero);
        assert_eq!(c([2.0, 0.0, 0.0]), StateClass::Monomorphic(Allele::A));
        assert_eq!(c([0.0, 0.0, 5.0]), StateClass::Monomorphic(Allele::LowerA));
        assert_eq!(c([1.0, 1.0, 1.0]), StateClass::Holomorphic);
        assert_eq!(c([1.0, 0.0, 1.0]), StateClass::Polymorphic);
        assert_eq!(c([0.0, 1.0, 0.0]), StateClass::Polymorphic);
        assert_eq!(
            classify_state_with_tol(&GenotypeVector::new(1.0, 1e-14, 0.0), 1e-12),
            StateClass::Monomorphic(Allele::A)
        );
    }

    proptest! {
        #[test]
        fn offspring_conserves_alleles_and_total(x in state()) {
            let y = mendel_offspring(&x).unwrap();
            for j in Allele::BOTH {
                let before = allele_count(&x, j);
                prop_assert!((allele_count(&y, j) - before).abs() <= 1e-12 * x.total());
            }
            prop_assert!((y.total() - x.total()).abs() <= 1e-12 * x.total());
        }

        #[test]
        fn offspring_is_homogeneous(x in state(), lambda in 1e-3..1e3f64) {
            let lhs = mendel_offspring(&x.scale(lambda)).unwrap();
            let rhs = mendel_offspring(&x).unwrap().scale(lambda);
            for i in 0..3 {
                prop_assert!((lhs[i] - rhs[i]).abs() <= 1e-12 * rhs.max_abs().max(1e-300));
            }
        }

        #[test]
        fn quadratic_form_agrees(x in state()) {
            let a = mendel_offspring(&x).unwrap();
            let b = mendel_offspring_quadratic(&x).unwrap();
            for i in 0..3 {
                prop_assert!((a[i] - b[i]).abs() <= 1e-12 * x.total());
            }
        }

        #[test]
        fn offspring_is_in_hardy_weinberg_proportions(x in state()) {
            let p = allele_frequency(&x, Allele::A).unwrap();
            let expected = hardy_weinberg_proportions(p).scale(x.total());
            let y = mendel_offspring(&x).unwrap();
            for i in 0..3 {
                prop_assert!((y[i] - expected[i]).abs() <= 1e-12 * x.total());
            }
        }
    }
}
