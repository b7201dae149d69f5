//! Finite-dimensional Hermitian operator algebra: pseudo-states, POVMs,
//! the Born map, eigendecomposition, trace norm, Jordan decomposition,
//! negativity and witnesses.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::correlations::{Box, Scenario};
use crate::error::{Error, Result};

/// Hermiticity tolerance enforced at construction.
pub const HERM_TOL: f64 = 1e-12;

/// Unit-trace tolerance for pseudo-states.
pub const TRACE_TOL: f64 = 1e-12;

/// POVM tolerances: minimum effect eigenvalue and completeness deviation.
pub const POVM_TOL: f64 = 1e-10;

/// A dim x dim Hermitian matrix, stored dense row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOp {
    dim: usize,
    entries: Vec<Complex64>,
}

impl HermitianOp {
    /// Builds from a complex matrix; errors if the asymmetry exceeds
    /// [`HERM_TOL`], otherwise stores (H + H^dag)/2.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for dim {}",
                entries.len(),
                dim
            )));
        }
        let mut asym: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let d = entries[i * dim + j] - entries[j * dim + i].conj();
                asym = asym.max(d.norm());
            }
        }
        if asym > HERM_TOL {
            return Err(Error::NotHermitian(asym, HERM_TOL));
        }
        let mut sym = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                sym[i * dim + j] =
                    (entries[i * dim + j] + entries[j * dim + i].conj()) * 0.5;
            }
        }
        Ok(HermitianOp { dim, entries: sym })
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianOp { dim, entries: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut h = Self::zeros(dim);
        for i in 0..dim {
            h.entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        h
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut h = Self::zeros(dim);
        for (i, &v) in diag.iter().enumerate() {
            h.entries[i * dim + i] = Complex64::new(v, 0.0);
        }
        h
    }

    /// Rank-one projector |v><v| / <v|v>.
    pub fn projector(v: &[Complex64]) -> Self {
        let dim = v.len();
        let n2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let mut h = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                h.entries[i * dim + j] = v[i] * v[j].conj() / n2;
            }
        }
        h
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianOp { dim: self.dim, entries: self.entries.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::ShapeMismatch("dimensions differ".into()));
        }
        Ok(HermitianOp {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// Plain matrix product; the result is generally not Hermitian, so only
    /// the raw entries are returned.
    pub fn matmul_entries(&self, other: &Self) -> Result<Vec<Complex64>> {
        if self.dim != other.dim {
            return Err(Error::ShapeMismatch("dimensions differ".into()));
        }
        let d = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for k in 0..d {
                let aik = self.entries[i * d + k];
                if aik.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out[i * d + j] += aik * other.entries[k * d + j];
                }
            }
        }
        Ok(out)
    }

    /// Hilbert-Schmidt inner product Tr(A B), real for Hermitian A, B.
    pub fn hs_inner(&self, other: &Self) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::ShapeMismatch("dimensions differ".into()));
        }
        let d = self.dim;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += self.entries[i * d + j] * other.entries[j * d + i];
            }
        }
        Ok(acc.re)
    }

    /// Kronecker product (no bipartition bookkeeping).
    pub fn kron(&self, other: &Self) -> Self {
        let da = self.dim;
        let db = other.dim;
        let d = da * db;
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..da {
            for j in 0..da {
                let a = self.entries[i * da + j];
                for k in 0..db {
                    for l in 0..db {
                        out[(i * db + k) * d + (j * db + l)] = a * other.entries[k * db + l];
                    }
                }
            }
        }
        HermitianOp { dim: d, entries: out }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Operator norm (largest |eigenvalue|).
    pub fn op_norm(&self) -> Result<f64> {
        let e = hermitian_eigen(self)?;
        Ok(e.values.iter().map(|v| v.abs()).fold(0.0, f64::max))
    }
}

// ---------------------------------------------------------------------------
// Eigendecomposition: cyclic Jacobi with exact 2x2 unitary diagonalization.
// ---------------------------------------------------------------------------

/// Eigenvalues (descending) and orthonormal eigenvectors (column k of
/// `vectors` belongs to `values[k]`).
#[derive(Debug, Clone)]
pub struct Eigen {
    pub dim: usize,
    pub values: Vec<f64>,
    /// Row-major dim x dim; entry (i, k) is component i of eigenvector k.
    pub vectors: Vec<Complex64>,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self.vectors[i * self.dim + k]).collect()
    }
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Diagonalizes a Hermitian matrix. Contract: reconstruction
/// ||H - V L V^dag||_max <= 1e-10 * max(1, ||H||_max), eigenvalues sorted
/// descending, V unitary within 1e-10.
pub fn hermitian_eigen(h: &HermitianOp) -> Result<Eigen> {
    let n = h.dim;
    let mut a = h.entries.clone();
    let mut v = HermitianOp::identity(n).entries;
    let scale = h.max_abs().max(1.0);
    let stop = 1e-14 * scale;

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].norm())
            .fold(0.0, f64::max);
        if off <= stop {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let z = a[p * n + q];
                if z.norm() <= stop * 1e-2 {
                    continue;
                }
                // Exact eigenbasis of the 2x2 block [[alpha, z], [conj(z), beta]].
                let alpha = a[p * n + p].re;
                let beta = a[q * n + q].re;
                let half = (beta - alpha) / 2.0;
                let rad = (half * half + z.norm_sqr()).sqrt();
                // lambda1 - alpha, computed without cancellation.
                let t = if half >= 0.0 { half + rad } else { z.norm_sqr() / (rad - half) };
                let nn = (z.norm_sqr() + t * t).sqrt();
                let u00 = z / nn;
                let u10 = Complex64::new(t / nn, 0.0);
                let u01 = Complex64::new(-t / nn, 0.0);
                let u11 = z.conj() / nn;

                // A <- A u (columns p, q).
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * u00 + akq * u10;
                    a[k * n + q] = akp * u01 + akq * u11;
                }
                // A <- u^dag A (rows p, q).
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = u00.conj() * apk + u10.conj() * aqk;
                    a[q * n + k] = u01.conj() * apk + u11.conj() * aqk;
                }
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
                a[p * n + p] = Complex64::new(a[p * n + p].re, 0.0);
                a[q * n + q] = Complex64::new(a[q * n + q].re, 0.0);
                // V <- V u.
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * u00 + vkq * u10;
                    v[k * n + q] = vkp * u01 + vkq * u11;
                }
            }
        }
    }
    if !converged {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].norm())
            .fold(0.0, f64::max);
        if off > 1e-11 * scale {
            return Err(Error::ConvergenceFailure(JACOBI_MAX_SWEEPS));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].re.total_cmp(&a[i * n + i].re));
    let values: Vec<f64> = order.iter().map(|&i| a[i * n + i].re).collect();
    let mut vectors = vec![Complex64::new(0.0, 0.0); n * n];
    for (k, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[i * n + k] = v[i * n + src];
        }
    }
    Ok(Eigen { dim: n, values, vectors })
}

/// Sum of the absolute values of the eigenvalues.
pub fn trace_norm(h: &HermitianOp) -> Result<f64> {
    Ok(hermitian_eigen(h)?.values.iter().map(|v| v.abs()).sum())
}

/// D(X, Y) = ||X - Y||_1 / 2.
pub fn trace_distance(x: &HermitianOp, y: &HermitianOp) -> Result<f64> {
    Ok(trace_norm(&x.sub(y)?)? / 2.0)
}

/// A unit-trace Hermitian operator together with its Alice/Bob bipartition.
/// Positive-semidefinite instances are ordinary density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoState {
    op: HermitianOp,
    dim_a: usize,
    dim_b: usize,
}

impl PseudoState {
    pub fn new(op: HermitianOp, bipartition: (usize, usize)) -> Result<Self> {
        let (dim_a, dim_b) = bipartition;
        if dim_a * dim_b != op.dim() {
            return Err(Error::ShapeMismatch(format!(
                "bipartition {}x{} does not match dim {}",
                dim_a,
                dim_b,
                op.dim()
            )));
        }
        let tr = op.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotUnitTrace(tr, TRACE_TOL));
        }
        Ok(PseudoState { op, dim_a, dim_b })
    }

    pub fn op(&self) -> &HermitianOp {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn bipartition(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn maximally_mixed(dim_a: usize, dim_b: usize) -> Self {
        let d = dim_a * dim_b;
        PseudoState {
            op: HermitianOp::identity(d).scale(1.0 / d as f64),
            dim_a,
            dim_b,
        }
    }
}

/// Positive and negative parts of the Jordan decomposition O = O_+ - O_-.
/// Kernel eigenvalues (|l| <= 1e-10 * scale) go to the positive part.
pub fn jordan_decompose(o: &PseudoState) -> Result<(HermitianOp, HermitianOp)> {
    let eig = hermitian_eigen(o.op())?;
    let scale = o.op().max_abs().max(1.0);
    let n = o.dim();
    let mut plus = HermitianOp::zeros(n);
    let mut minus = HermitianOp::zeros(n);
    for k in 0..n {
        let lam = eig.values[k];
        let vk = eig.vector(k);
        let proj = HermitianOp::projector(&vk);
        if lam >= -1e-10 * scale {
            plus = plus.add(&proj.scale(lam))?;
        } else {
            minus = minus.add(&proj.scale(-lam))?;
        }
    }
    Ok((plus, minus))
}

/// (||O||_1 - 1)/2: the sum of the absolute values of the negative
/// eigenvalues, and the robustness of O with respect to the state set.
pub fn negativity(o: &PseudoState) -> Result<f64> {
    Ok(((trace_norm(o.op())? - 1.0) / 2.0).max(0.0))
}

/// The closest density matrix O_+ / Tr(O_+) and its trace distance from O,
/// which equals the negativity.
pub fn closest_state(o: &PseudoState) -> Result<(PseudoState, f64)> {
    let (plus, _) = jordan_decompose(o)?;
    let tr = plus.trace();
    if tr <= 0.0 {
        return Err(Error::NumericalFailure("positive part has no trace".into()));
    }
    let mut rho = plus.scale(1.0 / tr);
    // Renormalize exactly; eigen dust can push the trace off by ~1e-13.
    let t2 = rho.trace();
    rho = rho.scale(1.0 / t2);
    let dist = negativity(o)?;
    let (da, db) = o.bipartition();
    Ok((PseudoState::new(rho, (da, db))?, dist))
}

/// Sign witness W = P_+ - P_- with the kernel assigned to P_+;
/// Tr(W O) = ||O||_1 and ||W||_op = 1.
pub fn negativity_witness(o: &PseudoState) -> Result<HermitianOp> {
    let eig = hermitian_eigen(o.op())?;
    let scale = o.op().max_abs().max(1.0);
    let n = o.dim();
    let mut w = HermitianOp::zeros(n);
    for k in 0..n {
        let sign = if eig.values[k] >= -1e-10 * scale { 1.0 } else { -1.0 };
        w = w.add(&HermitianOp::projector(&eig.vector(k)).scale(sign))?;
    }
    Ok(w)
}

/// Tensor product of two pseudo-states with the factors reordered so that
/// both Alice factors (and both Bob factors) stay contiguous: the result is
/// bipartite as (A1 A2 : B1 B2).
pub fn tensor(x: &PseudoState, y: &PseudoState) -> Result<PseudoState> {
    let (ax, bx) = x.bipartition();
    let (ay, by) = y.bipartition();
    let da = ax * ay;
    let db = bx * by;
    let d = da * db;
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    let idx = |a1: usize, a2: usize, b1: usize, b2: usize| -> usize {
        ((a1 * ay + a2) * db) + (b1 * by + b2)
    };
    for a1 in 0..ax {
        for b1 in 0..bx {
            for a1p in 0..ax {
                for b1p in 0..bx {
                    let xe = x.op().get(a1 * bx + b1, a1p * bx + b1p);
                    if xe.norm_sqr() == 0.0 {
                        continue;
                    }
                    for a2 in 0..ay {
                        for b2 in 0..by {
                            for a2p in 0..ay {
                                for b2p in 0..by {
                                    let ye = y.op().get(a2 * by + b2, a2p * by + b2p);
                                    out[idx(a1, a2, b1, b2) * d + idx(a1p, a2p, b1p, b2p)] =
                                        xe * ye;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let op = HermitianOp { dim: d, entries: out };
    PseudoState::new(op, (da, db))
}

/// Per-input POVMs for one party.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementAssemblage {
    dim: usize,
    povms: Vec<Vec<HermitianOp>>,
}

impl MeasurementAssemblage {
    /// Validates every effect (min eigenvalue >= -1e-10) and completeness of
    /// each POVM within 1e-10 entrywise.
    pub fn new(dim: usize, povms: Vec<Vec<HermitianOp>>) -> Result<Self> {
        for (input, povm) in povms.iter().enumerate() {
            let mut sum = HermitianOp::zeros(dim);
            for effect in povm {
                if effect.dim() != dim {
                    return Err(Error::ShapeMismatch(format!(
                        "effect dim {} in assemblage of dim {}",
                        effect.dim(),
                        dim
                    )));
                }
                let min = hermitian_eigen(effect)?
                    .values
                    .last()
                    .copied()
                    .unwrap_or(0.0);
                if min < -POVM_TOL {
                    return Err(Error::NegativeEffect(min, POVM_TOL));
                }
                sum = sum.add(effect)?;
            }
            let dev = sum.sub(&HermitianOp::identity(dim))?.max_abs();
            if dev > POVM_TOL {
                return Err(Error::IncompletePovm { input, dev });
            }
        }
        Ok(MeasurementAssemblage { dim, povms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_inputs(&self) -> usize {
        self.povms.len()
    }

    pub fn n_outcomes(&self) -> usize {
        self.povms.first().map_or(0, |p| p.len())
    }

    pub fn effect(&self, input: usize, outcome: usize) -> &HermitianOp {
        &self.povms[input][outcome]
    }

    pub fn povms(&self) -> &[Vec<HermitianOp>] {
        &self.povms
    }
}

/// The Born map p(a,b|x,y) = Tr(M_{a|x} (x) N_{b|y} O). Normalization per
/// (x, y) holds automatically; positivity may fail for a non-PSD O and is
/// left to the caller to query.
pub fn born_box(
    o: &PseudoState,
    alice: &MeasurementAssemblage,
    bob: &MeasurementAssemblage,
) -> Result<Box> {
    let (da, db) = o.bipartition();
    if alice.dim() != da || bob.dim() != db {
        return Err(Error::ShapeMismatch(format!(
            "assemblage dims ({}, {}) vs bipartition ({}, {})",
            alice.dim(),
            bob.dim(),
            da,
            db
        )));
    }
    let scenario = Scenario::new(
        alice.n_inputs(),
        bob.n_inputs(),
        alice.n_outcomes(),
        bob.n_outcomes(),
    )?;
    let d = da * db;
    let mut p = vec![0.0; scenario.len()];
    for x in 0..scenario.nx {
        for a in 0..scenario.na {
            let m = alice.effect(x, a);
            for y in 0..scenario.ny {
                for b in 0..scenario.nb {
                    let n = bob.effect(y, b);
                    // Tr((M (x) N) O) = sum_{ijkl} M_ik N_jl O_{(kl)(ij)}.
                    let mut acc = Complex64::new(0.0, 0.0);
                    for i in 0..da {
                        for k in 0..da {
                            let mik = m.get(i, k);
                            if mik.norm_sqr() == 0.0 {
                                continue;
                            }
                            for j in 0..db {
                                for l in 0..db {
                                    acc += mik
                                        * n.get(j, l)
                                        * o.op().entries()[(k * db + l) * d + (i * db + j)];
                                }
                            }
                        }
                    }
                    p[scenario.index(x, y, a, b)] = acc.re;
                }
            }
        }
    }
    Box::new_renormalized(scenario, p, 1e-10)
}

/// Standard 2x2 Pauli matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

pub fn pauli(which: Pauli) -> HermitianOp {
    let z = |re: f64, im: f64| Complex64::new(re, im);
    let entries = match which {
        Pauli::I => vec![z(1.0, 0.0), z(0.0, 0.0), z(0.0, 0.0), z(1.0, 0.0)],
        Pauli::X => vec![z(0.0, 0.0), z(1.0, 0.0), z(1.0, 0.0), z(0.0, 0.0)],
        Pauli::Y => vec![z(0.0, 0.0), z(0.0, -1.0), z(0.0, 1.0), z(0.0, 0.0)],
        Pauli::Z => vec![z(1.0, 0.0), z(0.0, 0.0), z(0.0, 0.0), z(-1.0, 0.0)],
    };
    HermitianOp { dim: 2, entries }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellSign {
    Plus,
    Minus,
}

/// |psi+-><psi+-| with |psi+-> = (|00> +- |11>)/sqrt(2), as a 4x4 pure state
/// on the (2, 2) bipartition.
pub fn bell_state(sign: BellSign) -> PseudoState {
    let s = match sign {
        BellSign::Plus => 1.0,
        BellSign::Minus => -1.0,
    };
    let inv = 1.0 / std::f64::consts::SQRT_2;
    let v = [
        Complex64::new(inv, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(s * inv, 0.0),
    ];
    PseudoState::new(HermitianOp::projector(&v), (2, 2)).expect("unit trace by construction")
}

// ---------------------------------------------------------------------------
// JSON wire format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct OperatorWire {
    dim: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    bipartition: Option<[usize; 2]>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl OperatorWire {
    fn from_op(op: &HermitianOp, bipartition: Option<(usize, usize)>) -> Self {
        let d = op.dim();
        let re = (0..d)
            .map(|i| (0..d).map(|j| op.get(i, j).re).collect())
            .collect();
        let im = (0..d)
            .map(|i| (0..d).map(|j| op.get(i, j).im).collect())
            .collect();
        OperatorWire { dim: d, bipartition: bipartition.map(|(a, b)| [a, b]), re, im }
    }

    fn to_op(&self) -> Result<HermitianOp> {
        let d = self.dim;
        if self.re.len() != d || self.im.len() != d {
            return Err(Error::Parse("re/im have wrong row count".into()));
        }
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            if self.re[i].len() != d || self.im[i].len() != d {
                return Err(Error::Parse("re/im have wrong column count".into()));
            }
            for j in 0..d {
                entries.push(Complex64::new(self.re[i][j], self.im[i][j]));
            }
        }
        HermitianOp::new(d, entries)
    }
}

impl Serialize for HermitianOp {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        OperatorWire::from_op(self, None).serialize(ser)
    }
}

impl<'de> Deserialize<'de> for HermitianOp {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        OperatorWire::deserialize(de)?
            .to_op()
            .map_err(serde::de::Error::custom)
    }
}

impl Serialize for PseudoState {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        OperatorWire::from_op(&self.op, Some(self.bipartition())).serialize(ser)
    }
}

impl<'de> Deserialize<'de> for PseudoState {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let wire = OperatorWire::deserialize(de)?;
        let op = wire.to_op().map_err(serde::de::Error::custom)?;
        let bip = wire
            .bipartition
            .map(|[a, b]| (a, b))
            .unwrap_or((1, op.dim()));
        PseudoState::new(op, bip).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct AssemblageWire {
    dim: usize,
    povms: Vec<Vec<HermitianOp>>,
}

impl Serialize for MeasurementAssemblage {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        AssemblageWire { dim: self.dim, povms: self.povms.clone() }.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for MeasurementAssemblage {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let wire = AssemblageWire::deserialize(de)?;
        MeasurementAssemblage::new(wire.dim, wire.povms).map_err(serde::de::Error::custom)
    }
}

/// Seeded generators of random operators, used by the test suites and kept
/// public so integration tests sample the same distributions.
pub mod sampling {
    use super::*;
    use rand::Rng;

    pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize) -> HermitianOp {
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
            for j in i + 1..dim {
                let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                entries[i * dim + j] = z;
                entries[j * dim + i] = z.conj();
            }
        }
        HermitianOp::new(dim, entries).unwrap()
    }

    /// Unit-trace Hermitian, generically with negative eigenvalues.
    pub fn random_pseudostate<R: Rng>(rng: &mut R, da: usize, db: usize) -> PseudoState {
        let d = da * db;
        let h = random_hermitian(rng, d);
        let tr = h.trace();
        let shifted = h
            .add(&HermitianOp::identity(d).scale((1.0 - tr) / d as f64))
            .unwrap();
        PseudoState::new(shifted, (da, db)).unwrap()
    }

    pub fn random_density<R: Rng>(rng: &mut R, da: usize, db: usize) -> PseudoState {
        let d = da * db;
        let h = random_hermitian(rng, d);
        // H^2 is PSD; normalize its trace.
        let sq = h.matmul_entries(&h).unwrap();
        let sq = HermitianOp::new(d, sq).unwrap();
        let rho = sq.scale(1.0 / sq.trace());
        PseudoState::new(rho, (da, db)).unwrap()
    }
}
