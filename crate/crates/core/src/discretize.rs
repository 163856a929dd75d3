//! Periodic 1D discretization and the interaction-picture Hamiltonian.
//!
//! The kinetic operator `A = −½Δ` uses the second-order central stencil on
//! `[−π, π)`, which is circulant and therefore diagonalized by the unitary DFT
//! with eigenvalues `(1 − cos(2πk/N))/Δx²`. All kinetic phases `e^{±iAt}` are
//! applied through that spectrum.
//!
//! [`InteractionOracle`] evaluates `H_I(t) = e^{iAt} B e^{−iAt}` either in the
//! grid (position) basis or in the eigenbasis of `A`. The two frames differ by
//! a fixed unitary change of basis, so spectral norms, commutator structure and
//! unitarity are identical in both; the eigen frame is much cheaper because
//! `H_I(t)` there is just `C ∘ (e^{i(λ_k − λ_l)t})` with `C = Q†BQ`.

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;

use crate::band::CyclicBandMatrix;
use crate::error::{Error, Result};
use crate::linalg::{herm_eig, matmul_adjoint, ComplexMatrix, HermitianEig};
use crate::magnus::Hamiltonian;

/// Couplings with more distinct cyclic offsets than this are kept dense.
pub const MAX_BAND_OFFSETS: usize = 32;

/// Uniform periodic grid on `[−π, π)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid1D {
    n_points: usize,
}

impl Grid1D {
    pub fn new(n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {n_points}"
            )));
        }
        Ok(Self { n_points })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n_points as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -PI + j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.node(j)).collect()
    }
}

/// Real potential `V(x)` sampled on the grid.
#[derive(Clone, Debug, PartialEq)]
pub enum PotentialSpec {
    Cos,
    HalfCos,
    Zero,
    Constant(f64),
    Samples(Vec<f64>),
}

impl PotentialSpec {
    pub fn values(&self, grid: &Grid1D) -> Result<Vec<f64>> {
        let values = match self {
            PotentialSpec::Cos => grid.nodes().into_iter().map(f64::cos).collect(),
            PotentialSpec::HalfCos => grid.nodes().into_iter().map(|x| 0.5 * x.cos()).collect(),
            PotentialSpec::Zero => vec![0.0; grid.n_points()],
            PotentialSpec::Constant(c) => vec![*c; grid.n_points()],
            PotentialSpec::Samples(samples) => {
                if samples.len() != grid.n_points() {
                    return Err(Error::InvalidPotential(format!(
                        "{} samples for a grid of {} points",
                        samples.len(),
                        grid.n_points()
                    )));
                }
                samples.clone()
            }
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential("non-finite potential value".into()));
        }
        Ok(values)
    }

    /// `true` when `V` is constant, so `B` commutes with `A`.
    pub fn is_trivial(&self) -> bool {
        matches!(self, PotentialSpec::Zero | PotentialSpec::Constant(_))
    }

    /// Parses `cos`, `halfcos`, `zero` or `constant:<c>`.
    pub fn parse(text: &str) -> Result<Self> {
        let lower = text.trim().to_ascii_lowercase();
        match lower.as_str() {
            "cos" => Ok(PotentialSpec::Cos),
            "halfcos" | "half-cos" => Ok(PotentialSpec::HalfCos),
            "zero" => Ok(PotentialSpec::Zero),
            other => match other.strip_prefix("constant:") {
                Some(value) => value
                    .parse::<f64>()
                    .ok()
                    .filter(|c| c.is_finite())
                    .map(PotentialSpec::Constant)
                    .ok_or_else(|| Error::InvalidPotential(format!("bad constant in {text:?}"))),
                None => Err(Error::InvalidPotential(format!("unknown potential {text:?}"))),
            },
        }
    }

    pub fn label(&self) -> String {
        match self {
            PotentialSpec::Cos => "cos".into(),
            PotentialSpec::HalfCos => "halfcos".into(),
            PotentialSpec::Zero => "zero".into(),
            PotentialSpec::Constant(c) => format!("constant:{c}"),
            PotentialSpec::Samples(_) => "samples".into(),
        }
    }
}

/// `A = −½Δ` with its closed-form circulant spectrum.
#[derive(Clone, Debug)]
pub struct KineticOperator {
    pub grid: Grid1D,
    /// Real symmetric stencil matrix in the grid basis.
    pub matrix: ComplexMatrix,
    /// `λ_k = (1 − cos(2πk/N))/Δx²`, indexed by Fourier mode `k`.
    pub eigenvalues: Vec<f64>,
    /// Unitary DFT, `F[j][k] = e^{−2πi jk/N}/√N`; `matrix = F·diag(λ)·F†`.
    pub fourier: ComplexMatrix,
}

pub fn build_kinetic(grid: Grid1D) -> Result<KineticOperator> {
    let n = grid.n_points();
    if n < 3 {
        return Err(Error::InvalidGrid(format!(
            "the kinetic stencil needs at least 3 points, got {n}"
        )));
    }
    let dx2 = grid.spacing() * grid.spacing();
    let diag = 1.0 / dx2;
    let off = -0.5 / dx2;
    let matrix = ComplexMatrix::from_fn(n, |i, j| {
        let value = if i == j {
            diag
        } else if (i + 1) % n == j || (j + 1) % n == i {
            off
        } else {
            0.0
        };
        Complex64::new(value, 0.0)
    });
    let eigenvalues = (0..n)
        .map(|k| (1.0 - (2.0 * PI * k as f64 / n as f64).cos()) / dx2)
        .collect();
    Ok(KineticOperator {
        grid,
        matrix,
        eigenvalues,
        fourier: dft_matrix(n),
    })
}

/// Unitary DFT matrix `F[j][k] = e^{−2πi jk/N}/√N`.
pub fn dft_matrix(n: usize) -> ComplexMatrix {
    let scale = 1.0 / (n as f64).sqrt();
    ComplexMatrix::from_fn(n, |j, k| {
        // Reduce jk mod N before forming the angle to keep it small.
        let angle = -2.0 * PI * ((j * k) % n) as f64 / n as f64;
        Complex64::from_polar(scale, angle)
    })
}

/// Diagonal matrix `diag(V(x_j))`.
pub fn build_potential(grid: &Grid1D, spec: &PotentialSpec) -> Result<ComplexMatrix> {
    Ok(ComplexMatrix::from_real_diagonal(&spec.values(grid)?))
}

/// Basis in which an [`InteractionOracle`] reports matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Frame {
    /// Grid (position) basis.
    #[default]
    Position,
    /// Eigenbasis of the kinetic operator `A`.
    Eigen,
}

#[derive(Debug)]
struct Spectrum {
    /// Eigenvalues of `A`.
    eigenvalues: Vec<f64>,
    /// Unitary `Q` with `A = Q·diag(λ)·Q†`.
    basis: ComplexMatrix,
    kinetic: ComplexMatrix,
    potential: ComplexMatrix,
    /// `C = Q†BQ`.
    coupling: ComplexMatrix,
    /// Non-zero entries of `C` as `(row, col, value)`.
    coupling_entries: Vec<(usize, usize, Complex64)>,
    /// Eigendecomposition of `diag(λ) + C`, i.e. `A + B` in the eigen frame.
    full: OnceLock<std::result::Result<HermitianEig, String>>,
}

impl Spectrum {
    fn phases(&self, t: f64) -> Vec<Complex64> {
        self.eigenvalues
            .iter()
            .map(|&l| Complex64::from_polar(1.0, l * t))
            .collect()
    }

    fn hamiltonian_eigen(&self, t: f64) -> ComplexMatrix {
        let p = self.phases(t);
        let mut g = ComplexMatrix::zeros(self.eigenvalues.len());
        for &(k, l, c) in &self.coupling_entries {
            g.set(k, l, c * p[k] * p[l].conj());
        }
        g
    }

    fn weighted_sum_eigen(&self, nodes: &[f64], weights: &[f64]) -> ComplexMatrix {
        let mut acc = vec![Complex64::new(0.0, 0.0); self.coupling_entries.len()];
        for (&s, &w) in nodes.iter().zip(weights) {
            let p = self.phases(s);
            for (a, &(k, l, _)) in acc.iter_mut().zip(&self.coupling_entries) {
                *a += w * p[k] * p[l].conj();
            }
        }
        let mut g = ComplexMatrix::zeros(self.eigenvalues.len());
        for (a, &(k, l, c)) in acc.iter().zip(&self.coupling_entries) {
            g.set(k, l, c * a);
        }
        g
    }

    fn to_position(&self, m: &ComplexMatrix) -> ComplexMatrix {
        matmul_adjoint(&(&self.basis * m), &self.basis)
    }

    fn full_eig(&self) -> Result<&HermitianEig> {
        let entry = self.full.get_or_init(|| {
            let mut k = self.coupling.clone();
            for (i, &l) in self.eigenvalues.iter().enumerate() {
                k.set(i, i, k.get(i, i) + l);
            }
            herm_eig(&k).map_err(|e| e.to_string())
        });
        entry.as_ref().map_err(|_| Error::NotConverged {
            residual: f64::INFINITY,
        })
    }
}

/// Produces `H_I(t) = e^{iAt} B e^{−iAt}` on demand, with a cache keyed by the
/// exact bit pattern of `t`.
///
/// The cache is internally synchronized; equal keys always map to bitwise
/// identical values, so concurrent inserts are benign.
#[derive(Debug)]
pub struct InteractionOracle {
    frame: Frame,
    spectrum: Arc<Spectrum>,
    cache: RwLock<HashMap<u64, Arc<ComplexMatrix>>>,
}

impl Clone for InteractionOracle {
    fn clone(&self) -> Self {
        Self::from_spectrum(self.spectrum.clone(), self.frame)
    }
}

impl InteractionOracle {
    /// Oracle for the discretized Schrödinger operator `A = −½Δ`, `B = V(x)`.
    pub fn new(kinetic: &KineticOperator, potential: &ComplexMatrix, frame: Frame) -> Result<Self> {
        let n = kinetic.grid.n_points();
        if potential.dim() != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: potential.dim(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                let z = potential.get(i, j);
                if i != j && z != Complex64::new(0.0, 0.0) {
                    return Err(Error::InvalidPotential("potential must be diagonal".into()));
                }
                if z.im != 0.0 || !z.re.is_finite() {
                    return Err(Error::InvalidPotential(
                        "potential must be real and finite".into(),
                    ));
                }
            }
        }
        let values: Vec<f64> = potential.diagonal().iter().map(|z| z.re).collect();
        // C_{kl} = ĉ_{(k−l) mod N} with ĉ_m = (1/N) Σ_j V_j e^{2πi jm/N}.
        let symbol = circulant_symbol(&values);
        let coupling = ComplexMatrix::from_fn(n, |k, l| symbol[(k + n - l) % n]);
        Ok(Self::from_spectrum(
            Arc::new(Spectrum::new(
                kinetic.eigenvalues.clone(),
                kinetic.fourier.clone(),
                kinetic.matrix.clone(),
                potential.clone(),
                coupling,
            )),
            frame,
        ))
    }

    /// Convenience constructor from a grid size and potential.
    pub fn schrodinger(n_points: usize, potential: &PotentialSpec, frame: Frame) -> Result<Self> {
        let grid = Grid1D::new(n_points)?;
        let kinetic = build_kinetic(grid)?;
        let b = build_potential(&grid, potential)?;
        Self::new(&kinetic, &b, frame)
    }

    /// Oracle for arbitrary Hermitian `A` and `B`; `A` is diagonalized with
    /// the dense eigensolver.
    pub fn from_hermitian(a: &ComplexMatrix, b: &ComplexMatrix, frame: Frame) -> Result<Self> {
        let eig = herm_eig(a)?;
        Self::from_eigenbasis(eig.eigenvalues, eig.eigenvectors, a.clone(), b, frame)
    }

    /// Oracle from a known eigendecomposition `A = Q·diag(λ)·Q†`.
    pub fn from_eigenbasis(
        eigenvalues: Vec<f64>,
        basis: ComplexMatrix,
        kinetic: ComplexMatrix,
        b: &ComplexMatrix,
        frame: Frame,
    ) -> Result<Self> {
        let n = basis.dim();
        for dim in [eigenvalues.len(), kinetic.dim(), b.dim()] {
            if dim != n {
                return Err(Error::DimensionMismatch { left: n, right: dim });
            }
        }
        if !b.is_hermitian(1e-12 * b.frobenius_norm().max(1.0)) {
            return Err(Error::InvalidPotential("B must be Hermitian".into()));
        }
        let coupling = crate::linalg::adjoint_matmul(&basis, &(b * &basis));
        Ok(Self::from_spectrum(
            Arc::new(Spectrum::new(eigenvalues, basis, kinetic, b.clone(), coupling)),
            frame,
        ))
    }

    fn from_spectrum(spectrum: Arc<Spectrum>, frame: Frame) -> Self {
        Self {
            frame,
            spectrum,
            cache: RwLock::new(HashMap::new()),
        }
    }

    /// Same operators reported in another frame; the cache is not shared.
    pub fn with_frame(&self, frame: Frame) -> Self {
        Self::from_spectrum(self.spectrum.clone(), frame)
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn dim(&self) -> usize {
        self.spectrum.eigenvalues.len()
    }

    pub fn kinetic_eigenvalues(&self) -> &[f64] {
        &self.spectrum.eigenvalues
    }

    /// `A` in the oracle frame.
    pub fn kinetic(&self) -> ComplexMatrix {
        match self.frame {
            Frame::Position => self.spectrum.kinetic.clone(),
            Frame::Eigen => ComplexMatrix::from_real_diagonal(&self.spectrum.eigenvalues),
        }
    }

    /// `B` in the oracle frame.
    pub fn potential(&self) -> ComplexMatrix {
        match self.frame {
            Frame::Position => self.spectrum.potential.clone(),
            Frame::Eigen => self.spectrum.coupling.clone(),
        }
    }

    /// `H_I(t)` without touching the cache.
    pub fn evaluate(&self, t: f64) -> ComplexMatrix {
        match self.frame {
            Frame::Eigen => self.spectrum.hamiltonian_eigen(t),
            Frame::Position if t == 0.0 => self.spectrum.potential.clone(),
            Frame::Position => self
                .spectrum
                .to_position(&self.spectrum.hamiltonian_eigen(t)),
        }
    }

    /// `H_I(t)`, cached by the exact binary value of `t`.
    pub fn conjugate_at(&self, t: f64) -> Arc<ComplexMatrix> {
        let key = t.to_bits();
        if let Some(hit) = self.cache.read().expect("oracle cache poisoned").get(&key) {
            return hit.clone();
        }
        let value = Arc::new(self.evaluate(t));
        self.cache
            .write()
            .expect("oracle cache poisoned")
            .entry(key)
            .or_insert(value)
            .clone()
    }

    /// `H_I(t)` in the kinetic eigenbasis as a cyclic band matrix, whatever the
    /// oracle frame. `None` when the coupling spans more than
    /// [`MAX_BAND_OFFSETS`] Fourier offsets.
    pub fn eigen_band_at(&self, t: f64) -> Option<CyclicBandMatrix> {
        let n = self.dim();
        let offsets: BTreeSet<usize> = self
            .spectrum
            .coupling_entries
            .iter()
            .map(|&(k, l, _)| (l + n - k) % n)
            .collect();
        if offsets.len() > MAX_BAND_OFFSETS {
            return None;
        }
        let p = self.spectrum.phases(t);
        Some(CyclicBandMatrix::from_entries(
            n,
            self.spectrum
                .coupling_entries
                .iter()
                .map(|&(k, l, c)| (k, l, c * p[k] * p[l].conj())),
        ))
    }

    /// Populates the cache for every listed time, sequentially.
    pub fn prefetch(&self, times: &[f64]) {
        for &t in times {
            self.conjugate_at(t);
        }
    }

    pub fn cache_len(&self) -> usize {
        self.cache.read().expect("oracle cache poisoned").len()
    }

    /// `e^{iAt}` in the oracle frame.
    pub fn kinetic_phase(&self, t: f64) -> ComplexMatrix {
        let diag = ComplexMatrix::from_diagonal(&self.spectrum.phases(t));
        match self.frame {
            Frame::Eigen => diag,
            Frame::Position => self.spectrum.to_position(&diag),
        }
    }

    /// Exact interaction-picture propagator from `t0` to `t0 + dt`:
    /// `e^{iA(t0+dt)}·e^{−i(A+B)dt}·e^{−iAt0}`.
    pub fn exact_step(&self, t0: f64, dt: f64) -> Result<ComplexMatrix> {
        if !(dt >= 0.0) || !t0.is_finite() || !dt.is_finite() {
            return Err(Error::InvalidInput(format!(
                "exact_step needs finite t0 and dt >= 0, got t0={t0}, dt={dt}"
            )));
        }
        let full = self.spectrum.full_eig()?;
        let middle = full.apply_function(|mu| Complex64::from_polar(1.0, -mu * dt));
        let left = self.spectrum.phases(t0 + dt);
        let right: Vec<Complex64> = self.spectrum.phases(t0).iter().map(|z| z.conj()).collect();
        let step = middle.scale_rows_columns(&left, &right);
        Ok(match self.frame {
            Frame::Eigen => step,
            Frame::Position => self.spectrum.to_position(&step),
        })
    }
}

impl Spectrum {
    fn new(
        eigenvalues: Vec<f64>,
        basis: ComplexMatrix,
        kinetic: ComplexMatrix,
        potential: ComplexMatrix,
        coupling: ComplexMatrix,
    ) -> Self {
        let n = coupling.dim();
        let mut coupling_entries = Vec::new();
        for k in 0..n {
            for l in 0..n {
                let c = coupling.get(k, l);
                if c != Complex64::new(0.0, 0.0) {
                    coupling_entries.push((k, l, c));
                }
            }
        }
        Self {
            eigenvalues,
            basis,
            kinetic,
            potential,
            coupling,
            coupling_entries,
            full: OnceLock::new(),
        }
    }
}

/// `ĉ_m = (1/N) Σ_j V_j e^{2πi jm/N}`, with round-off-level modes set to zero
/// so that band-limited potentials give exactly sparse couplings.
fn circulant_symbol(values: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut symbol: Vec<Complex64> = (0..n)
        .map(|m| {
            let sum: Complex64 = values
                .iter()
                .enumerate()
                .map(|(j, &v)| {
                    Complex64::from_polar(v, 2.0 * PI * ((j * m) % n) as f64 / n as f64)
                })
                .sum();
            sum / n as f64
        })
        .collect();
    let floor = 64.0 * f64::EPSILON * scale;
    for z in &mut symbol {
        if z.norm() <= floor {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    // A real potential has a Hermitian symbol; enforce it exactly.
    for m in 1..n {
        let partner = n - m;
        if m < partner {
            let avg = (symbol[m] + symbol[partner].conj()) * 0.5;
            symbol[m] = avg;
            symbol[partner] = avg.conj();
        } else if m == partner {
            symbol[m].im = 0.0;
        }
    }
    symbol[0].im = 0.0;
    symbol
}

impl Hamiltonian for InteractionOracle {
    fn dim(&self) -> usize {
        InteractionOracle::dim(self)
    }

    fn at(&self, t: f64) -> ComplexMatrix {
        self.evaluate(t)
    }

    fn weighted_sum(&self, nodes: &[f64], weights: &[f64]) -> ComplexMatrix {
        let sum = self.spectrum.weighted_sum_eigen(nodes, weights);
        match self.frame {
            Frame::Eigen => sum,
            Frame::Position => self.spectrum.to_position(&sum),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::spectral_norm;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn grid_layout() {
        let g = Grid1D::new(8).unwrap();
        let x = g.nodes();
        assert_eq!(x[0], -PI);
        assert!(x.windows(2).all(|w| w[0] < w[1]));
        assert!(close(x[7] + g.spacing(), PI, 1e-15));
        assert!(Grid1D::new(1).is_err());
    }

    #[test]
    fn kinetic_stencil_n4() {
        let k = build_kinetic(Grid1D::new(4).unwrap()).unwrap();
        let d = 4.0 / (PI * PI);
        assert!(close(k.matrix.get(0, 0).re, d, 1e-15));
        assert!(close(k.matrix.get(0, 1).re, -d / 2.0, 1e-15));
        assert!(close(k.matrix.get(1, 0).re, -d / 2.0, 1e-15));
        assert!(close(k.matrix.get(0, 3).re, -d / 2.0, 1e-15));
        assert!(close(k.matrix.get(3, 0).re, -d / 2.0, 1e-15));
        assert_eq!(k.matrix.get(0, 2).re, 0.0);
        let expected = [0.0, d, 2.0 * d, d];
        for (l, e) in k.eigenvalues.iter().zip(expected) {
            assert!(close(*l, e, 1e-14));
        }
        assert!(build_kinetic(Grid1D::new(2).unwrap()).is_err());
    }

    #[test]
    fn kinetic_spectral_invariants() {
        let k = build_kinetic(Grid1D::new(16).unwrap()).unwrap();
        let lam: Vec<Complex64> = k.eigenvalues.iter().map(|&l| Complex64::new(l, 0.0)).collect();
        let rebuilt = matmul_adjoint(&k.fourier.scale_columns(&lam), &k.fourier);
        assert!((&rebuilt - &k.matrix).frobenius_norm() <= 1e-10 * k.matrix.frobenius_norm());
        for i in 0..16 {
            let row: f64 = (0..16).map(|j| k.matrix.get(i, j).re).sum();
            assert!(row.abs() < 1e-12);
        }
        assert_eq!(k.eigenvalues[0], 0.0);
        assert!(k.eigenvalues.iter().all(|&l| l >= 0.0));
        assert!(k.fourier.unitarity_defect() < 1e-13);
    }

    #[test]
    fn kinetic_eigenvalues_match_generic_solver() {
        let k = build_kinetic(Grid1D::new(64).unwrap()).unwrap();
        let mut closed = k.eigenvalues.clone();
        closed.sort_by(f64::total_cmp);
        let generic = herm_eig(&k.matrix).unwrap().eigenvalues;
        for (a, b) in closed.iter().zip(&generic) {
            assert!(close(*a, *b, 1e-9));
        }
    }

    #[test]
    fn potentials() {
        let g = Grid1D::new(4).unwrap();
        assert_eq!(build_potential(&g, &PotentialSpec::Zero).unwrap(), ComplexMatrix::zeros(4));
        let cos = build_potential(&g, &PotentialSpec::Cos).unwrap();
        let expected = [-1.0, 0.0, 1.0, 0.0];
        for (i, e) in expected.iter().enumerate() {
            assert!(close(cos.get(i, i).re, *e, 1e-15));
        }
        let half = build_potential(&g, &PotentialSpec::HalfCos).unwrap();
        for i in 0..4 {
            assert_eq!(half.get(i, i).re, 0.5 * cos.get(i, i).re);
        }
        assert!(cos.is_hermitian(0.0));
        let err = build_potential(&g, &PotentialSpec::Samples(vec![1.0; 3]));
        assert!(matches!(err, Err(Error::InvalidPotential(_))));
    }

    #[test]
    fn potential_parsing() {
        assert_eq!(PotentialSpec::parse("cos").unwrap(), PotentialSpec::Cos);
        assert_eq!(PotentialSpec::parse("HalfCos").unwrap(), PotentialSpec::HalfCos);
        assert_eq!(
            PotentialSpec::parse("constant:0.25").unwrap(),
            PotentialSpec::Constant(0.25)
        );
        assert!(PotentialSpec::parse("sin").is_err());
        assert!(PotentialSpec::parse("constant:nan").is_err());
    }

    #[test]
    fn complex_or_dense_potential_rejected() {
        let k = build_kinetic(Grid1D::new(4).unwrap()).unwrap();
        let mut b = ComplexMatrix::zeros(4);
        b.set(0, 0, Complex64::new(1.0, 0.5));
        assert!(InteractionOracle::new(&k, &b, Frame::Position).is_err());
        let mut b = ComplexMatrix::zeros(4);
        b.set(0, 1, Complex64::new(1.0, 0.0));
        assert!(InteractionOracle::new(&k, &b, Frame::Position).is_err());
    }

    #[test]
    fn cosine_coupling_is_tridiagonal_circulant() {
        let o = InteractionOracle::schrodinger(16, &PotentialSpec::Cos, Frame::Eigen).unwrap();
        assert_eq!(o.spectrum.coupling_entries.len(), 32);
        for &(k, l, c) in &o.spectrum.coupling_entries {
            assert!((k + 16 - l) % 16 == 1 || (l + 16 - k) % 16 == 1);
            assert!(close(c.re, -0.5, 1e-15) && c.im.abs() < 1e-15);
        }
    }

    #[test]
    fn conjugate_at_zero_is_b() {
        let o = InteractionOracle::schrodinger(16, &PotentialSpec::Cos, Frame::Position).unwrap();
        assert_eq!(*o.conjugate_at(0.0), o.potential());
        let e = o.with_frame(Frame::Eigen);
        assert_eq!(*e.conjugate_at(0.0), e.potential());
    }

    #[test]
    fn constant_potential_commutes() {
        let o = InteractionOracle::schrodinger(12, &PotentialSpec::Constant(0.7), Frame::Position)
            .unwrap();
        let expected = ComplexMatrix::identity(12).scale_real(0.7);
        for t in [0.1, 0.5, 2.0] {
            assert!((&*o.conjugate_at(t) - &expected).max_abs() < 1e-14);
        }
        let e = o.with_frame(Frame::Eigen);
        assert!((&*e.conjugate_at(1.3) - &expected).max_abs() < 1e-14);
    }

    #[test]
    fn conjugation_preserves_spectrum() {
        let o = InteractionOracle::schrodinger(64, &PotentialSpec::Cos, Frame::Position).unwrap();
        let b = o.potential();
        let mut reference = herm_eig(&b).unwrap().eigenvalues;
        reference.sort_by(f64::total_cmp);
        for t in [0.137, 0.9, 3.3] {
            let bt = o.conjugate_at(t);
            assert!(bt.is_hermitian(1e-10));
            let eig = herm_eig(&bt).unwrap().eigenvalues;
            for (x, y) in eig.iter().zip(&reference) {
                assert!(close(*x, *y, 1e-8));
            }
            assert!(close(spectral_norm(&bt), spectral_norm(&b), 1e-8));
        }
    }

    #[test]
    fn frames_are_unitarily_equivalent() {
        let p = InteractionOracle::schrodinger(16, &PotentialSpec::Cos, Frame::Position).unwrap();
        let e = p.with_frame(Frame::Eigen);
        let f = dft_matrix(16);
        for t in [0.25, 1.0] {
            let converted = matmul_adjoint(&(&f * &e.evaluate(t)), &f);
            assert!((&converted - &p.evaluate(t)).max_abs() < 1e-13);
        }
        let sum_p = p.weighted_sum(&[0.1, 0.4], &[0.3, 0.7]);
        let direct = {
            let mut m = p.evaluate(0.1).scale_real(0.3);
            m.axpy(Complex64::new(0.7, 0.0), &p.evaluate(0.4));
            m
        };
        assert!((&sum_p - &direct).max_abs() < 1e-13);
    }

    #[test]
    fn cache_is_idempotent() {
        let o = InteractionOracle::schrodinger(8, &PotentialSpec::Cos, Frame::Position).unwrap();
        let first = o.conjugate_at(0.3);
        let second = o.conjugate_at(0.3);
        assert!(Arc::ptr_eq(&first, &second));
        assert_eq!(*first, o.evaluate(0.3));
        o.prefetch(&[0.1, 0.2, 0.3]);
        assert_eq!(o.cache_len(), 3);
    }

    #[test]
    fn exact_step_trivial_cases() {
        let o = InteractionOracle::schrodinger(16, &PotentialSpec::Cos, Frame::Position).unwrap();
        let u = o.exact_step(0.3, 0.0).unwrap();
        assert!((&u - &ComplexMatrix::identity(16)).max_abs() < 1e-12);
        assert!(o.exact_step(0.0, -0.1).is_err());

        let z = InteractionOracle::schrodinger(16, &PotentialSpec::Zero, Frame::Position).unwrap();
        for (t0, dt) in [(0.0, 0.5), (1.2, 0.7)] {
            let u = z.exact_step(t0, dt).unwrap();
            assert!((&u - &ComplexMatrix::identity(16)).max_abs() < 1e-12);
        }

        let c = InteractionOracle::schrodinger(16, &PotentialSpec::Constant(0.4), Frame::Position)
            .unwrap();
        let u = c.exact_step(0.0, 0.9).unwrap();
        let expected = ComplexMatrix::identity(16).scale(Complex64::from_polar(1.0, -0.4 * 0.9));
        assert!((&u - &expected).frobenius_norm() < 1e-10);
    }

    #[test]
    fn exact_step_flow_property() {
        let o = InteractionOracle::schrodinger(24, &PotentialSpec::Cos, Frame::Position).unwrap();
        let whole = o.exact_step(0.2, 0.7).unwrap();
        let first = o.exact_step(0.2, 0.3).unwrap();
        let second = o.exact_step(0.5, 0.4).unwrap();
        assert!((&whole - &(&second * &first)).frobenius_norm() < 1e-9);
        assert!(whole.unitarity_defect() < 1e-10);
    }
}
