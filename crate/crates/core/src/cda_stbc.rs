//! Full-rate square space-time block codes from cyclic division algebras.
//!
//! The `n × n` code matrix carries `k = n²` symbols `d[u][v]`. Entry `(r, c)`
//! collects the row-group `u = (r − c) mod n`:
//!
//! ```text
//! X[r][c] = δ^[r < c] · Σ_v d[u][v] · ω^(c·v) · t^v,    ω = exp(j2π/n)
//! ```
//!
//! so the diagonal holds group 0, the strictly-upper triangle is scaled by
//! `δ`, and every weight matrix is a scaled permutation. `δ = t = 1` gives the
//! information-lossless (ILL) code, `δ = exp(j√5)`, `t = exp(j)` the
//! full-diversity variant (FD-ILL).
//!
//! Symbols are flattened as `i = u·n + v`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cis, Real};

/// Parameterization of the cyclic-division-algebra code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Information lossless, `δ = t = 1`.
    Ill,
    /// Full-diversity information lossless, `δ = e^{j√5}`, `t = e^{j}`.
    #[serde(rename = "fdill")]
    FdIll,
}

impl Variant {
    /// `(δ, t)` for this variant.
    pub fn scalars<T: Real>(self) -> (Complex<T>, Complex<T>) {
        match self {
            Variant::Ill => (
                Complex::new(T::one(), T::zero()),
                Complex::new(T::one(), T::zero()),
            ),
            Variant::FdIll => (cis(T::lit(5f64.sqrt())), cis(T::one())),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Ill => "ill",
            Variant::FdIll => "fdill",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ill" => Ok(Variant::Ill),
            "fdill" | "fd-ill" | "fd_ill" => Ok(Variant::FdIll),
            _ => Err(Error::UnknownVariant(s.to_string())),
        }
    }
}

/// A BPSK symbol vector, entries in `{+1, −1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolVector(Vec<i8>);

impl SymbolVector {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if let Some(pos) = values.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::Config(format!(
                "BPSK symbol {} at index {pos} is not ±1",
                values[pos]
            )));
        }
        Ok(Self(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }

    pub fn to_complex<T: Real>(&self) -> Vec<Complex<T>> {
        self.0
            .iter()
            .map(|&s| Complex::new(if s > 0 { T::one() } else { -T::one() }, T::zero()))
            .collect()
    }
}

/// Code parameters plus the per-column coefficient table used by both
/// encoders.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeSpec<T: Real> {
    n: usize,
    variant: Variant,
    delta: Complex<T>,
    t: Complex<T>,
    omega: Complex<T>,
    /// `coeff[c·n + v] = ω^(c·v) · t^v`.
    coeff: Vec<Complex<T>>,
}

impl<T: Real> CodeSpec<T> {
    /// Code with the standard scalars for `variant`.
    pub fn new(n: usize, variant: Variant) -> Result<Self> {
        let (delta, t) = variant.scalars();
        Self::with_scalars(n, variant, delta, t)
    }

    /// Code with explicit `δ` and `t`; `variant` is kept only as a label.
    pub fn with_scalars(
        n: usize,
        variant: Variant,
        delta: Complex<T>,
        t: Complex<T>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroCodeSize);
        }
        let nf = T::from_usize(n).unwrap();
        let omega = cis(T::TAU() / nf);
        let mut coeff = Vec::with_capacity(n * n);
        for c in 0..n {
            let mut tv = Complex::new(T::one(), T::zero());
            for v in 0..n {
                // Reduce the exponent mod n before taking the phase.
                let e = T::from_usize((c * v) % n).unwrap();
                coeff.push(cis(T::TAU() * e / nf) * tv);
                tv *= t;
            }
        }
        Ok(Self {
            n,
            variant,
            delta,
            t,
            omega,
            coeff,
        })
    }

    /// Number of transmit antennas (= time slots).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of symbols per code matrix, `n²`.
    pub fn k(&self) -> usize {
        self.n * self.n
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn delta(&self) -> Complex<T> {
        self.delta
    }

    pub fn t(&self) -> Complex<T> {
        self.t
    }

    pub fn omega(&self) -> Complex<T> {
        self.omega
    }

    /// Flat symbol index of `d[u][v]`.
    #[inline]
    pub fn flat_index(&self, u: usize, v: usize) -> usize {
        u * self.n + v
    }

    /// Row occupied by symbol group `u` in column `c`.
    #[inline]
    pub fn support_row(&self, u: usize, c: usize) -> usize {
        (u + c) % self.n
    }

    /// Nonzero entry of weight matrix `i` in column `c`, located at row
    /// `support_row(i / n, c)`.
    #[inline]
    pub fn weight_entry(&self, i: usize, c: usize) -> Complex<T> {
        let (u, v) = (i / self.n, i % self.n);
        let r = self.support_row(u, c);
        let a = self.coeff[c * self.n + v];
        if r < c {
            a * self.delta
        } else {
            a
        }
    }

    /// All `k` weight matrices and their column stack.
    pub fn weight_matrices(&self) -> WeightMatrixSet<T> {
        let n = self.n;
        let k = self.k();
        let mut matrices = Vec::with_capacity(k);
        let mut column_stack = DMatrix::zeros(k, k);
        for i in 0..k {
            let mut a = DMatrix::zeros(n, n);
            for c in 0..n {
                a[(self.support_row(i / n, c), c)] = self.weight_entry(i, c);
            }
            column_stack.set_column(i, &DVector::from_column_slice(a.as_slice()));
            matrices.push(a);
        }
        WeightMatrixSet {
            matrices,
            column_stack,
        }
    }

    /// Code matrix for arbitrary complex symbols, evaluated entry-wise.
    pub fn encode_symbols(&self, d: &[Complex<T>]) -> Result<DMatrix<Complex<T>>> {
        let n = self.n;
        if d.len() != self.k() {
            return Err(Error::Dimension {
                what: "symbol vector length",
                expected: self.k(),
                actual: d.len(),
            });
        }
        Ok(DMatrix::from_fn(n, n, |r, c| {
            let u = (r + n - c) % n;
            let coeff = &self.coeff[c * n..(c + 1) * n];
            let group = &d[u * n..(u + 1) * n];
            let s: Complex<T> = group.iter().zip(coeff).map(|(&x, &w)| x * w).sum();
            if r < c {
                s * self.delta
            } else {
                s
            }
        }))
    }

    /// Code matrix for a BPSK symbol vector.
    pub fn encode(&self, d: &SymbolVector) -> Result<DMatrix<Complex<T>>> {
        self.encode_symbols(&d.to_complex())
    }

    /// Equivalent channel `H̃`: column `i` is `(I ⊗ H_c)·vec(A⁽ⁱ⁾)`, so that
    /// `vec(H_c·X(d)) = H̃·d`. Accepts any number of receive antennas.
    pub fn linearize(&self, h_c: &DMatrix<Complex<T>>) -> Result<DMatrix<Complex<T>>> {
        let n = self.n;
        if h_c.ncols() != n {
            return Err(Error::Dimension {
                what: "channel columns",
                expected: n,
                actual: h_c.ncols(),
            });
        }
        let nr = h_c.nrows();
        let mut h = DMatrix::zeros(nr * n, self.k());
        for i in 0..self.k() {
            let u = i / n;
            for c in 0..n {
                let a = self.weight_entry(i, c);
                let src = h_c.column(self.support_row(u, c));
                for (row, &hv) in src.iter().enumerate() {
                    h[(c * nr + row, i)] = hv * a;
                }
            }
        }
        Ok(h)
    }

    /// `H̃ᴴH̃` from `G = H_cᴴH_c` without forming `H̃`; `O(n⁵)` work.
    pub fn linearized_gram(&self, h_c: &DMatrix<Complex<T>>) -> Result<DMatrix<Complex<T>>> {
        let n = self.n;
        if h_c.ncols() != n {
            return Err(Error::Dimension {
                what: "channel columns",
                expected: n,
                actual: h_c.ncols(),
            });
        }
        let g = h_c.adjoint_generic();
        let g = &g * h_c;
        let k = self.k();
        let entries = self.entry_table();
        let mut out = DMatrix::zeros(k, k);
        for i in 0..k {
            let ui = i / n;
            for j in 0..=i {
                let uj = j / n;
                let mut s = Complex::new(T::zero(), T::zero());
                for c in 0..n {
                    let ri = (ui + c) % n;
                    let rj = (uj + c) % n;
                    s += entries[i * n + c].conj() * entries[j * n + c] * g[(ri, rj)];
                }
                out[(i, j)] = s;
                out[(j, i)] = s.conj();
            }
        }
        Ok(out)
    }

    /// `H̃ᴴ·vec(Y)` from `W = H_cᴴY` without forming `H̃`; `O(n³)` after `W`.
    pub fn linearized_matched(
        &self,
        h_c: &DMatrix<Complex<T>>,
        y: &DMatrix<Complex<T>>,
    ) -> Result<DVector<Complex<T>>> {
        let n = self.n;
        if h_c.ncols() != n || y.ncols() != n || y.nrows() != h_c.nrows() {
            return Err(Error::Dimension {
                what: "received matrix shape",
                expected: h_c.nrows() * n,
                actual: y.nrows() * y.ncols(),
            });
        }
        let w = &h_c.adjoint_generic() * y;
        Ok(DVector::from_fn(self.k(), |i, _| {
            let u = i / n;
            (0..n)
                .map(|c| self.weight_entry(i, c).conj() * w[(self.support_row(u, c), c)])
                .sum()
        }))
    }

    fn entry_table(&self) -> Vec<Complex<T>> {
        let n = self.n;
        (0..self.k())
            .flat_map(|i| (0..n).map(move |c| (i, c)))
            .map(|(i, c)| self.weight_entry(i, c))
            .collect()
    }
}

/// The `k` weight matrices `A⁽ⁱ⁾` of the linear-dispersion form
/// `X = Σ_i d_i A⁽ⁱ⁾`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrixSet<T: Real> {
    pub matrices: Vec<DMatrix<Complex<T>>>,
    /// `k × k`, column `i` is `vec(A⁽ⁱ⁾)` (column-major).
    pub column_stack: DMatrix<Complex<T>>,
}

impl<T: Real> WeightMatrixSet<T> {
    /// Linear-dispersion encoding `Σ_i d_i A⁽ⁱ⁾`.
    pub fn encode_symbols(&self, d: &[Complex<T>]) -> Result<DMatrix<Complex<T>>> {
        if d.len() != self.matrices.len() {
            return Err(Error::Dimension {
                what: "symbol vector length",
                expected: self.matrices.len(),
                actual: d.len(),
            });
        }
        let (r, c) = self.matrices.first().map(|m| m.shape()).unwrap_or((0, 0));
        let mut x = DMatrix::zeros(r, c);
        for (a, &di) in self.matrices.iter().zip(d) {
            x += a * di;
        }
        Ok(x)
    }

    /// `true` when every matrix has exactly one nonzero unit-modulus entry per
    /// row and per column.
    pub fn is_permutation_type(&self, tol: T) -> bool {
        self.matrices.iter().all(|a| {
            let n = a.nrows();
            let rows_ok = (0..n).all(|r| unit_support(a.row(r).iter(), tol));
            let cols_ok = (0..a.ncols()).all(|c| unit_support(a.column(c).iter(), tol));
            rows_ok && cols_ok
        })
    }

    /// Largest entry of `|column_stackᴴ·column_stack − n·I|`.
    pub fn unitarity_defect(&self) -> T {
        let n = T::from_usize(self.matrices.first().map_or(0, |m| m.nrows())).unwrap();
        let gram = &self.column_stack.adjoint_generic() * &self.column_stack;
        let mut worst = T::zero();
        for c in 0..gram.ncols() {
            for r in 0..gram.nrows() {
                let target = if r == c { n } else { T::zero() };
                worst = worst.max((gram[(r, c)] - Complex::new(target, T::zero())).norm());
            }
        }
        worst
    }
}

fn unit_support<'a, T: Real>(mut it: impl Iterator<Item = &'a Complex<T>>, tol: T) -> bool {
    let mut count = 0;
    let ok = it.all(|z| {
        let m = z.norm();
        if m > tol {
            count += 1;
            (m - T::one()).abs() <= tol
        } else {
            true
        }
    });
    ok && count == 1
}

/// Build the code and its weight matrices.
pub fn build_code<T: Real>(
    n: usize,
    variant: Variant,
) -> Result<(CodeSpec<T>, WeightMatrixSet<T>)> {
    let code = CodeSpec::new(n, variant)?;
    let weights = code.weight_matrices();
    Ok((code, weights))
}

/// Conjugate transpose without requiring `ComplexField` on the scalar.
pub trait AdjointGeneric<T: Real> {
    fn adjoint_generic(&self) -> DMatrix<Complex<T>>;
}

impl<T: Real> AdjointGeneric<T> for DMatrix<Complex<T>> {
    fn adjoint_generic(&self) -> DMatrix<Complex<T>> {
        DMatrix::from_fn(self.ncols(), self.nrows(), |r, c| self[(c, r)].conj())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, cols: usize) -> DMatrix<Complex<f64>> {
        DMatrix::from_fn(r, cols, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn rejects_zero_size_and_unknown_variant() {
        assert!(matches!(
            build_code::<f64>(0, Variant::Ill),
            Err(Error::ZeroCodeSize)
        ));
        assert!(matches!(
            "qam".parse::<Variant>(),
            Err(Error::UnknownVariant(_))
        ));
        assert_eq!("FD-ILL".parse::<Variant>().unwrap(), Variant::FdIll);
    }

    #[test]
    fn degenerate_code_is_identity() {
        let (code, w) = build_code::<f64>(1, Variant::Ill).unwrap();
        assert_eq!(w.matrices.len(), 1);
        assert_eq!(w.matrices[0][(0, 0)], c(1.0, 0.0));
        let x = code.encode_symbols(&[c(-0.5, 2.0)]).unwrap();
        assert_eq!(x[(0, 0)], c(-0.5, 2.0));
        let h = DMatrix::from_element(1, 1, c(0.3, -0.7));
        assert_eq!(code.linearize(&h).unwrap(), h);
    }

    #[test]
    fn two_by_two_ill_worked_example() {
        let (code, w) = build_code::<f64>(2, Variant::Ill).unwrap();
        assert_eq!(w.matrices[0], DMatrix::identity(2, 2));
        let d = SymbolVector::new(vec![1, 1, 1, -1]).unwrap();
        let x = code.encode(&d).unwrap();
        let want =
            DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!((x - want).norm() < 1e-12);
    }

    #[test]
    fn two_by_two_fdill_scales_ill_support() {
        let (_, ill) = build_code::<f64>(2, Variant::Ill).unwrap();
        let (_, fd) = build_code::<f64>(2, Variant::FdIll).unwrap();
        let delta = cis(5f64.sqrt());
        let t = cis(1.0);
        // d[0][1]: diagonal, coefficients t and ω·t.
        let a01 = &fd.matrices[1];
        assert!((a01[(0, 0)] - t).norm() < 1e-15);
        assert!((a01[(1, 1)] - t * -1.0).norm() < 1e-15);
        // d[1][1]: lower-left t, upper-right δ·ω·t.
        let a11 = &fd.matrices[3];
        assert!((a11[(1, 0)] - t).norm() < 1e-15);
        assert!((a11[(0, 1)] - delta * t * -1.0).norm() < 1e-15);
        for (a, b) in ill.matrices.iter().zip(&fd.matrices) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert_eq!(x.norm() > 0.5, y.norm() > 0.5);
            }
        }
    }

    #[test]
    fn three_by_three_delta_placement() {
        // Row 0 reads d[0], δ·d[2]·ω, δ·d[1]·ω²; row 1 reads d[1], d[0]·ω, δ·d[2]·ω².
        let delta = c(0.0, 1.0);
        let code = CodeSpec::<f64>::with_scalars(3, Variant::FdIll, delta, c(1.0, 0.0)).unwrap();
        let mut d = vec![c(0.0, 0.0); 9];
        d[code.flat_index(2, 1)] = c(1.0, 0.0);
        let x = code.encode_symbols(&d).unwrap();
        let w = code.omega();
        assert!((x[(0, 1)] - delta * w).norm() < 1e-12);
        assert!((x[(1, 2)] - delta * w * w).norm() < 1e-12);
        assert!((x[(2, 0)] - c(1.0, 0.0)).norm() < 1e-12);
        assert!(x[(0, 0)].norm() < 1e-12);
    }

    #[test]
    fn omega_is_nth_root_of_unity() {
        for n in 1..=24 {
            let code = CodeSpec::<f64>::new(n, Variant::FdIll).unwrap();
            assert!((code.omega().powu(n as u32) - c(1.0, 0.0)).norm() < 1e-12);
            assert!((code.delta().norm() - 1.0).abs() < 1e-15);
            assert!((code.t().norm() - 1.0).abs() < 1e-15);
            assert_eq!(code.k(), n * n);
        }
    }

    #[test]
    fn direct_and_weight_encoders_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 3, 5, 8] {
            for variant in [Variant::Ill, Variant::FdIll] {
                let (code, w) = build_code::<f64>(n, variant).unwrap();
                let d: Vec<_> = (0..n * n)
                    .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect();
                let a = code.encode_symbols(&d).unwrap();
                let b = w.encode_symbols(&d).unwrap();
                assert!((a - b).norm() < 1e-10, "n={n} {variant}");
            }
        }
    }

    #[test]
    fn weights_are_scaled_unitary_permutations() {
        for n in [1, 2, 4, 7] {
            for variant in [Variant::Ill, Variant::FdIll] {
                let (_, w) = build_code::<f64>(n, variant).unwrap();
                assert!(w.is_permutation_type(1e-12));
                assert!(w.unitarity_defect() < 1e-10);
            }
        }
    }

    #[test]
    fn unit_scalar_override_matches_ill_bitwise() {
        let one = c(1.0, 0.0);
        for n in [2, 4, 6] {
            let ill = CodeSpec::<f64>::new(n, Variant::Ill).unwrap();
            let fd = CodeSpec::<f64>::with_scalars(n, Variant::FdIll, one, one).unwrap();
            let d = SymbolVector::new(
                (0..n * n)
                    .map(|i| if i % 3 == 0 { -1 } else { 1 })
                    .collect(),
            )
            .unwrap();
            assert_eq!(ill.encode(&d).unwrap(), fd.encode(&d).unwrap());
            assert_eq!(ill.weight_matrices(), fd.weight_matrices());
        }
    }

    #[test]
    fn linearize_identity_channel_gives_weight_columns() {
        let (code, w) = build_code::<f64>(2, Variant::Ill).unwrap();
        let h = code.linearize(&DMatrix::identity(2, 2)).unwrap();
        assert_eq!(h, w.column_stack);
    }

    #[test]
    fn structured_gram_and_matched_match_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (n, nr) in [(2, 2), (3, 5), (4, 4)] {
            let code = CodeSpec::<f64>::new(n, Variant::FdIll).unwrap();
            let hc = random_matrix(&mut rng, nr, n);
            let y = random_matrix(&mut rng, nr, n);
            let h = code.linearize(&hc).unwrap();
            let hh = h.adjoint_generic();
            let gram = &hh * &h;
            let yv = DVector::from_column_slice(y.as_slice());
            let mf = &hh * yv;
            assert!((code.linearized_gram(&hc).unwrap() - gram).norm() < 1e-10);
            assert!((code.linearized_matched(&hc, &y).unwrap() - mf).norm() < 1e-10);
        }
    }

    #[test]
    fn dimension_errors() {
        let code = CodeSpec::<f64>::new(3, Variant::Ill).unwrap();
        assert!(code.encode_symbols(&[c(1.0, 0.0); 8]).is_err());
        assert!(code.linearize(&DMatrix::zeros(3, 2)).is_err());
        assert!(SymbolVector::new(vec![1, 0]).is_err());
    }

    #[test]
    fn single_precision_build() {
        let (code, w) = build_code::<f32>(4, Variant::FdIll).unwrap();
        assert!(w.unitarity_defect() < 1e-4);
        assert_eq!(code.k(), 16);
    }
}
