//! Bipartite boxes: conditional probability tensors p(a,b|x,y), the local
//! deterministic polytope, marginals and Bell functionals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on per-(x,y) normalization enforced at construction.
pub const NORM_TOL: f64 = 1e-12;

/// Default tolerance for no-signalling membership checks.
pub const NS_TOL: f64 = 1e-9;

/// Input/output alphabet sizes (|X|, |Y|, |A|, |B|).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(rename = "nX")]
    pub nx: usize,
    #[serde(rename = "nY")]
    pub ny: usize,
    #[serde(rename = "nA")]
    pub na: usize,
    #[serde(rename = "nB")]
    pub nb: usize,
}

impl Scenario {
    pub fn new(nx: usize, ny: usize, na: usize, nb: usize) -> Result<Self> {
        if nx == 0 || ny == 0 || na == 0 || nb == 0 {
            return Err(Error::EmptyScenario);
        }
        Ok(Scenario { nx, ny, na, nb })
    }

    /// The (2,2,2,2) CHSH scenario.
    pub fn chsh() -> Self {
        Scenario { nx: 2, ny: 2, na: 2, nb: 2 }
    }

    /// Number of entries of the full tensor.
    pub fn len(&self) -> usize {
        self.nx * self.ny * self.na * self.nb
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat index, row-major with x slowest: ((x*nY + y)*nA + a)*nB + b.
    pub fn index(&self, x: usize, y: usize, a: usize, b: usize) -> usize {
        debug_assert!(x < self.nx && y < self.ny && a < self.na && b < self.nb);
        ((x * self.ny + y) * self.na + a) * self.nb + b
    }

    /// Number of deterministic product boxes nA^nX * nB^nY.
    pub fn deterministic_count(&self) -> usize {
        self.na.pow(self.nx as u32) * self.nb.pow(self.ny as u32)
    }
}

/// A box: the tensor p(a,b|x,y) for a fixed scenario.
///
/// Normalization per (x,y) is part of the type; nonnegativity is not, so the
/// same type serves pseudo-probability tensors (query with [`Box::is_probability`]).
#[derive(Debug, Clone, PartialEq)]
pub struct Box {
    scenario: Scenario,
    p: Vec<f64>,
}

impl Box {
    /// Builds a box from the flat tensor, enforcing finiteness and
    /// per-(x,y) normalization within [`NORM_TOL`].
    pub fn new(scenario: Scenario, p: Vec<f64>) -> Result<Self> {
        Self::with_norm_tol(scenario, p, NORM_TOL)
    }

    /// Like [`Box::new`] but accepts blocks normalized only within `tol`,
    /// rescaling each (x,y) block to sum to exactly 1. Used to absorb
    /// solver-level dust when reconstructing boxes from LP solutions.
    pub fn new_renormalized(scenario: Scenario, p: Vec<f64>, tol: f64) -> Result<Self> {
        let mut b = Self::with_norm_tol(scenario, p, tol)?;
        for x in 0..scenario.nx {
            for y in 0..scenario.ny {
                let mut sum = 0.0;
                for a in 0..scenario.na {
                    for b_ in 0..scenario.nb {
                        sum += b.p[scenario.index(x, y, a, b_)];
                    }
                }
                for a in 0..scenario.na {
                    for b_ in 0..scenario.nb {
                        b.p[scenario.index(x, y, a, b_)] /= sum;
                    }
                }
            }
        }
        Ok(b)
    }

    fn with_norm_tol(scenario: Scenario, p: Vec<f64>, tol: f64) -> Result<Self> {
        if p.len() != scenario.len() {
            return Err(Error::ShapeMismatch(format!(
                "tensor has {} entries, scenario needs {}",
                p.len(),
                scenario.len()
            )));
        }
        for (i, v) in p.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(i));
            }
        }
        for x in 0..scenario.nx {
            for y in 0..scenario.ny {
                let mut sum = 0.0;
                for a in 0..scenario.na {
                    for b in 0..scenario.nb {
                        sum += p[scenario.index(x, y, a, b)];
                    }
                }
                if (sum - 1.0).abs() > tol {
                    return Err(Error::NotNormalized { x, y, sum, tol });
                }
            }
        }
        Ok(Box { scenario, p })
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn entries(&self) -> &[f64] {
        &self.p
    }

    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.p[self.scenario.index(x, y, a, b)]
    }

    /// Uniform box p = 1/(nA*nB).
    pub fn uniform(scenario: Scenario) -> Self {
        let v = 1.0 / (scenario.na * scenario.nb) as f64;
        Box { scenario, p: vec![v; scenario.len()] }
    }

    /// True iff every entry is >= -tol.
    pub fn is_probability(&self, tol: f64) -> bool {
        self.p.iter().all(|&v| v >= -tol)
    }

    /// True iff Alice's marginals are independent of y and Bob's of x,
    /// each within `tol` entrywise.
    pub fn is_no_signalling(&self, tol: f64) -> bool {
        self.signalling_deviation() <= tol
    }

    /// Largest entrywise deviation of a marginal under change of the
    /// remote input.
    pub fn signalling_deviation(&self) -> f64 {
        let s = self.scenario;
        let mut dev: f64 = 0.0;
        // Alice's marginal must not depend on y.
        for x in 0..s.nx {
            for a in 0..s.na {
                let reference: f64 = (0..s.nb).map(|b| self.get(x, 0, a, b)).sum();
                for y in 1..s.ny {
                    let m: f64 = (0..s.nb).map(|b| self.get(x, y, a, b)).sum();
                    dev = dev.max((m - reference).abs());
                }
            }
        }
        // Bob's marginal must not depend on x.
        for y in 0..s.ny {
            for b in 0..s.nb {
                let reference: f64 = (0..s.na).map(|a| self.get(0, y, a, b)).sum();
                for x in 1..s.nx {
                    let m: f64 = (0..s.na).map(|a| self.get(x, y, a, b)).sum();
                    dev = dev.max((m - reference).abs());
                }
            }
        }
        dev
    }

    /// Alice's conditional distribution p(a|x), evaluated at y = 0 after a
    /// no-signalling check within [`NS_TOL`].
    pub fn marginal_alice(&self, x: usize) -> Result<Vec<f64>> {
        let dev = self.signalling_deviation();
        if dev > NS_TOL {
            return Err(Error::SignallingInput(dev, NS_TOL));
        }
        let s = self.scenario;
        Ok((0..s.na)
            .map(|a| (0..s.nb).map(|b| self.get(x, 0, a, b)).sum())
            .collect())
    }

    /// Bob's conditional distribution p(b|y), evaluated at x = 0.
    pub fn marginal_bob(&self, y: usize) -> Result<Vec<f64>> {
        let dev = self.signalling_deviation();
        if dev > NS_TOL {
            return Err(Error::SignallingInput(dev, NS_TOL));
        }
        let s = self.scenario;
        Ok((0..s.nb)
            .map(|b| (0..s.na).map(|a| self.get(0, y, a, b)).sum())
            .collect())
    }
}

/// The deterministic product box with response functions encoded as
/// base-nA / base-nB integers: a(x) = (f / nA^x) mod nA, b(y) = (g / nB^y) mod nB.
pub fn deterministic_box(scenario: Scenario, f: usize, g: usize) -> Box {
    let s = scenario;
    let mut p = vec![0.0; s.len()];
    for x in 0..s.nx {
        let a = (f / s.na.pow(x as u32)) % s.na;
        for y in 0..s.ny {
            let b = (g / s.nb.pow(y as u32)) % s.nb;
            p[s.index(x, y, a, b)] = 1.0;
        }
    }
    Box { scenario: s, p }
}

/// Default cap on the number of deterministic boxes.
pub const DETERMINISTIC_CAP: usize = 1_000_000;

/// All nA^nX * nB^nY deterministic product boxes, ordered by
/// index = f * nB^nY + g. The order is fixed so LP certificates are
/// reproducible across runs.
pub fn enumerate_local_deterministic(scenario: Scenario) -> Result<Vec<Box>> {
    enumerate_local_deterministic_capped(scenario, DETERMINISTIC_CAP)
}

pub fn enumerate_local_deterministic_capped(scenario: Scenario, cap: usize) -> Result<Vec<Box>> {
    let n = scenario.deterministic_count();
    if n > cap {
        return Err(Error::TooLarge(n, cap));
    }
    let nf = scenario.na.pow(scenario.nx as u32);
    let ng = scenario.nb.pow(scenario.ny as u32);
    let mut out = Vec::with_capacity(n);
    for f in 0..nf {
        for g in 0..ng {
            out.push(deterministic_box(scenario, f, g));
        }
    }
    Ok(out)
}

/// Entrywise affine combination of boxes; weights may be negative but must
/// sum to 1 within [`NORM_TOL`], which keeps the result normalized.
pub fn mix(boxes: &[Box], weights: &[f64]) -> Result<Box> {
    if boxes.is_empty() || boxes.len() != weights.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} boxes vs {} weights",
            boxes.len(),
            weights.len()
        )));
    }
    let scenario = boxes[0].scenario;
    if boxes.iter().any(|b| b.scenario != scenario) {
        return Err(Error::ScenarioMismatch);
    }
    let wsum: f64 = weights.iter().sum();
    if (wsum - 1.0).abs() > NORM_TOL {
        return Err(Error::WeightSumMismatch(wsum, NORM_TOL));
    }
    let mut p = vec![0.0; scenario.len()];
    for (b, &w) in boxes.iter().zip(weights) {
        for (dst, &src) in p.iter_mut().zip(&b.p) {
            *dst += w * src;
        }
    }
    // Normalized by construction; bypass the tolerance check so that affine
    // combinations of many boxes do not trip on accumulated roundoff.
    Box::new_renormalized(scenario, p, 1e-9)
}

/// A linear functional on boxes with a classical (local) bound and an
/// optional quantum (Tsirelson) bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BellFunctional {
    pub scenario: Scenario,
    pub coefficients: Vec<f64>,
    pub classical_bound: f64,
    pub quantum_bound: Option<f64>,
}

impl BellFunctional {
    pub fn new(
        scenario: Scenario,
        coefficients: Vec<f64>,
        classical_bound: f64,
        quantum_bound: Option<f64>,
    ) -> Result<Self> {
        if coefficients.len() != scenario.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients, scenario needs {}",
                coefficients.len(),
                scenario.len()
            )));
        }
        if !(classical_bound > 0.0) {
            return Err(Error::RangeError {
                name: "classical_bound",
                value: classical_bound,
                lo: f64::MIN_POSITIVE,
                hi: f64::INFINITY,
            });
        }
        Ok(BellFunctional { scenario, coefficients, classical_bound, quantum_bound })
    }
}

/// The inner product sum_{abxy} B(a,b|x,y) p(a,b|x,y).
pub fn bell_value(bx: &Box, f: &BellFunctional) -> Result<f64> {
    if bx.scenario != f.scenario {
        return Err(Error::ShapeMismatch("functional/box scenario differ".into()));
    }
    Ok(bx.p.iter().zip(&f.coefficients).map(|(p, c)| p * c).sum())
}

/// The CHSH functional (1/2) sum (-1)^{(a xor b) xor (x and y)} p(a,b|x,y)
/// on the (2,2,2,2) scenario; classical bound 1, quantum bound sqrt(2).
pub fn chsh_functional() -> BellFunctional {
    let s = Scenario::chsh();
    let mut c = vec![0.0; s.len()];
    for x in 0..2 {
        for y in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let sign = if (a ^ b) ^ (x & y) == 0 { 1.0 } else { -1.0 };
                    c[s.index(x, y, a, b)] = 0.5 * sign;
                }
            }
        }
    }
    BellFunctional {
        scenario: s,
        coefficients: c,
        classical_bound: 1.0,
        quantum_bound: Some(std::f64::consts::SQRT_2),
    }
}

// ---------------------------------------------------------------------------
// JSON wire format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct BoxWire {
    scenario: Scenario,
    p: Vec<Vec<Vec<Vec<f64>>>>,
}

fn nest(scenario: Scenario, flat: &[f64]) -> Vec<Vec<Vec<Vec<f64>>>> {
    (0..scenario.nx)
        .map(|x| {
            (0..scenario.ny)
                .map(|y| {
                    (0..scenario.na)
                        .map(|a| {
                            (0..scenario.nb)
                                .map(|b| flat[scenario.index(x, y, a, b)])
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn flatten(scenario: Scenario, nested: &[Vec<Vec<Vec<f64>>>]) -> Result<Vec<f64>> {
    let mut flat = vec![0.0; scenario.len()];
    if nested.len() != scenario.nx {
        return Err(Error::Parse("p has wrong x extent".into()));
    }
    for (x, px) in nested.iter().enumerate() {
        if px.len() != scenario.ny {
            return Err(Error::Parse("p has wrong y extent".into()));
        }
        for (y, pxy) in px.iter().enumerate() {
            if pxy.len() != scenario.na {
                return Err(Error::Parse("p has wrong a extent".into()));
            }
            for (a, pxya) in pxy.iter().enumerate() {
                if pxya.len() != scenario.nb {
                    return Err(Error::Parse("p has wrong b extent".into()));
                }
                for (b, &v) in pxya.iter().enumerate() {
                    flat[scenario.index(x, y, a, b)] = v;
                }
            }
        }
    }
    Ok(flat)
}

impl Serialize for Box {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        BoxWire { scenario: self.scenario, p: nest(self.scenario, &self.p) }.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Box {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let wire = BoxWire::deserialize(de)?;
        let flat = flatten(wire.scenario, &wire.p).map_err(serde::de::Error::custom)?;
        Box::new(wire.scenario, flat).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct FunctionalWire {
    scenario: Scenario,
    coefficients: Vec<Vec<Vec<Vec<f64>>>>,
    classical_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    quantum_bound: Option<f64>,
}

impl Serialize for BellFunctional {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        FunctionalWire {
            scenario: self.scenario,
            coefficients: nest(self.scenario, &self.coefficients),
            classical_bound: self.classical_bound,
            quantum_bound: self.quantum_bound,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for BellFunctional {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let wire = FunctionalWire::deserialize(de)?;
        let flat = flatten(wire.scenario, &wire.coefficients).map_err(serde::de::Error::custom)?;
        BellFunctional::new(wire.scenario, flat, wire.classical_bound, wire.quantum_bound)
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pr_box() -> Box {
        crate::constructions::pr_box(0.0).unwrap()
    }

    fn pr_eps(eps: f64) -> Box {
        crate::constructions::pr_box(eps).unwrap()
    }

    #[test]
    fn uniform_box_is_probability() {
        let b = Box::uniform(Scenario::chsh());
        assert!(b.is_probability(0.0));
        assert!(b.is_no_signalling(1e-15));
    }

    #[test]
    fn negative_entry_fails_is_probability() {
        let s = Scenario::chsh();
        let mut p = Box::uniform(s).entries().to_vec();
        p[0] -= 0.3;
        p[1] += 0.3;
        let b = Box::new(s, p).unwrap();
        assert!(!b.is_probability(1e-9));
    }

    #[test]
    fn affine_combination_of_deterministic_boxes_goes_negative() {
        let s = Scenario::chsh();
        let d = enumerate_local_deterministic(s).unwrap();
        let m = mix(&[d[0].clone(), d[5].clone()], &[1.5, -0.5]).unwrap();
        assert!(!m.is_probability(1e-9));
        let min = m.entries().iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((min + 0.5).abs() < 1e-12);
    }

    #[test]
    fn pr_box_is_no_signalling() {
        assert!(pr_box().is_no_signalling(1e-12));
    }

    #[test]
    fn product_box_is_no_signalling() {
        let s = Scenario::chsh();
        let pa = [[0.3, 0.7], [0.9, 0.1]];
        let pb = [[0.5, 0.5], [0.2, 0.8]];
        let mut p = vec![0.0; s.len()];
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        p[s.index(x, y, a, b)] = pa[x][a] * pb[y][b];
                    }
                }
            }
        }
        assert!(Box::new(s, p).unwrap().is_no_signalling(1e-12));
    }

    #[test]
    fn hand_made_signalling_box_detected() {
        let s = Scenario::chsh();
        let mut p = vec![0.0; s.len()];
        // Alice's marginal depends on x only through legitimate inputs, but
        // here we leak y into Alice's side: p(a|x, y) differs across y.
        for x in 0..2 {
            for y in 0..2 {
                let pa = if y == 0 { 0.9 } else { 0.1 };
                p[s.index(x, y, 0, 0)] = pa;
                p[s.index(x, y, 1, 1)] = 1.0 - pa;
            }
        }
        let b = Box::new(s, p).unwrap();
        assert!(!b.is_no_signalling(1e-6));
        assert!(b.marginal_alice(0).is_err());
    }

    #[test]
    fn pr_marginals_are_uniform() {
        for eps in [0.0, 0.1, 0.3] {
            let b = pr_eps(eps);
            for x in 0..2 {
                let m = b.marginal_alice(x).unwrap();
                assert!((m[0] - 0.5).abs() < 1e-12 && (m[1] - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn deterministic_box_marginal() {
        let s = Scenario::chsh();
        let d = deterministic_box(s, 0, 0); // a(x) = 0, b(y) = 0
        assert_eq!(d.marginal_alice(0).unwrap(), vec![1.0, 0.0]);
        assert_eq!(d.marginal_alice(1).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_local_deterministic(Scenario::chsh()).unwrap().len(), 16);
        let s = Scenario::new(1, 1, 2, 2).unwrap();
        assert_eq!(enumerate_local_deterministic(s).unwrap().len(), 4);
    }

    #[test]
    fn enumeration_over_cap_errors() {
        let s = Scenario::new(2, 2, 2, 2).unwrap();
        assert!(matches!(
            enumerate_local_deterministic_capped(s, 8),
            Err(Error::TooLarge(16, 8))
        ));
    }

    #[test]
    fn deterministic_boxes_are_valid() {
        for d in enumerate_local_deterministic(Scenario::chsh()).unwrap() {
            assert!(d.is_probability(1e-12));
            assert!(d.is_no_signalling(1e-12));
        }
    }

    #[test]
    fn mix_identity() {
        let p = pr_box();
        let m = mix(std::slice::from_ref(&p), &[1.0]).unwrap();
        assert_eq!(m, p);
    }

    #[test]
    fn noisy_pr_is_mixture_of_pr_and_uniform() {
        for eps in [0.05, 0.25, 0.4] {
            let m = mix(&[pr_box(), Box::uniform(Scenario::chsh())], &[1.0 - 2.0 * eps, 2.0 * eps])
                .unwrap();
            let target = pr_eps(eps);
            for (a, b) in m.entries().iter().zip(target.entries()) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn uniform_mix_of_deterministic_boxes_is_uniform() {
        let d = enumerate_local_deterministic(Scenario::chsh()).unwrap();
        let m = mix(&d, &[1.0 / 16.0; 16]).unwrap();
        for (a, b) in m.entries().iter().zip(Box::uniform(Scenario::chsh()).entries()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn mix_rejects_bad_weight_sum() {
        let p = pr_box();
        assert!(matches!(
            mix(&[p.clone(), p], &[0.7, 0.2]),
            Err(Error::WeightSumMismatch(..))
        ));
    }

    #[test]
    fn chsh_on_pr_family() {
        let f = chsh_functional();
        assert!((bell_value(&pr_box(), &f).unwrap() - 2.0).abs() < 1e-12);
        assert!(bell_value(&Box::uniform(Scenario::chsh()), &f).unwrap().abs() < 1e-15);
        assert!((bell_value(&pr_eps(0.25), &f).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chsh_classical_bound_from_enumeration() {
        let f = chsh_functional();
        let max: f64 = enumerate_local_deterministic(Scenario::chsh())
            .unwrap()
            .iter()
            .map(|d| bell_value(d, &f).unwrap().abs())
            .fold(0.0, f64::max);
        assert!((max - f.classical_bound).abs() < 1e-12);
    }

    #[test]
    fn box_json_round_trip() {
        let b = pr_eps(0.1);
        let s = serde_json::to_string(&b).unwrap();
        assert!(s.contains("\"nX\":2"));
        let back: Box = serde_json::from_str(&s).unwrap();
        assert_eq!(back, b);
    }

    proptest! {
        #[test]
        fn ns_is_affine_stable(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let d = enumerate_local_deterministic(Scenario::chsh()).unwrap();
            let picks: Vec<Box> = (0..3).map(|_| d[rng.gen_range(0..16)].clone()).collect();
            let mut w: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..2.0)).collect();
            let s: f64 = w.iter().sum();
            w[2] += 1.0 - s;
            let m = mix(&picks, &w).unwrap();
            prop_assert!(m.is_no_signalling(1e-9));
        }

        #[test]
        fn bell_value_is_linear(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let d = enumerate_local_deterministic(Scenario::chsh()).unwrap();
            let f = chsh_functional();
            let picks: Vec<Box> = (0..4).map(|_| d[rng.gen_range(0..16)].clone()).collect();
            let mut w: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..2.0)).collect();
            let s: f64 = w.iter().sum();
            w[3] += 1.0 - s;
            let lhs = bell_value(&mix(&picks, &w).unwrap(), &f).unwrap();
            let rhs: f64 = picks
                .iter()
                .zip(&w)
                .map(|(b, wi)| wi * bell_value(b, &f).unwrap())
                .sum();
            prop_assert!((lhs - rhs).abs() < 1e-10);
        }

        #[test]
        fn mix_preserves_normalization(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let d = enumerate_local_deterministic(Scenario::chsh()).unwrap();
            let picks: Vec<Box> = (0..5).map(|_| d[rng.gen_range(0..16)].clone()).collect();
            let mut w: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let s: f64 = w.iter().sum();
            w[4] += 1.0 - s;
            let m = mix(&picks, &w).unwrap();
            let sc = m.scenario();
            for x in 0..sc.nx {
                for y in 0..sc.ny {
                    let sum: f64 = (0..sc.na)
                        .flat_map(|a| (0..sc.nb).map(move |b| (a, b)))
                        .map(|(a, b)| m.get(x, y, a, b))
                        .sum();
                    prop_assert!((sum - 1.0).abs() < 1e-12);
                }
            }
        }
    }
}
