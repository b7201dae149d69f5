//! Exact LP formulations of box-level robustness quantifiers, with primal
//! decompositions over the deterministic polytope and dual Bell-functional
//! certificates.

use serde::{Deserialize, Serialize};

use crate::correlations::{
    bell_value, enumerate_local_deterministic, BellFunctional, Box, Scenario, NS_TOL,
};
use crate::error::{Error, Result};
use crate::lp::{Problem, Relation};

/// Certificate gap tolerance; also the re-verification tolerance.
pub const CERT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RobustnessKind {
    LocalRobustness,
    GeneralizedLocalRobustness,
    BestLocalApprox,
}

/// Optimal value t together with the primal decomposition and the dual
/// certificate. The mixture identity (p + t*noise)/(1+t) = target holds
/// within [`CERT_TOL`] and the target carries an explicit convex
/// decomposition over deterministic boxes (`target_weights`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobustnessResult {
    pub kind: RobustnessKind,
    pub value: f64,
    pub noise: Box,
    pub target: Box,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dual: Option<BellFunctional>,
    pub gap: f64,
    /// Convex weights of the target over deterministic boxes (sum 1).
    pub target_weights: Vec<f64>,
    /// Convex weights of the noise over deterministic boxes (sum 1); empty
    /// when the noise is not drawn from the local set.
    pub noise_weights: Vec<f64>,
}

fn require_no_signalling(bx: &Box) -> Result<()> {
    let dev = bx.signalling_deviation();
    if dev > NS_TOL {
        return Err(Error::SignallingInput(dev, NS_TOL));
    }
    Ok(())
}

/// Mixture of deterministic boxes with the given (unnormalized, nonnegative)
/// weights, renormalized to a valid box. None if total weight is ~0.
fn weighted_det_box(scenario: Scenario, det: &[Box], weights: &[f64]) -> Option<(Box, Vec<f64>)> {
    let total: f64 = weights.iter().sum();
    if total <= 1e-12 {
        return None;
    }
    let mut p = vec![0.0; scenario.len()];
    for (d, &w) in det.iter().zip(weights) {
        for (dst, &src) in p.iter_mut().zip(d.entries()) {
            *dst += (w / total) * src;
        }
    }
    let bx = Box::new_renormalized(scenario, p, 1e-7).ok()?;
    Some((bx, weights.iter().map(|w| (w / total).max(0.0)).collect()))
}

/// The uniform "all entries equal" functional evaluating to 1 on every
/// normalized box; used to shift LP duals into Bell-inequality form.
fn unit_functional_coeffs(scenario: Scenario) -> Vec<f64> {
    vec![1.0 / (scenario.nx * scenario.ny) as f64; scenario.len()]
}

/// r_L(p): minimal t with (p + t p_L^-)/(1+t) local. Exact LP over the
/// deterministic vertices, with a dual Bell functional B normalized so that
/// max_i |B(d_i)| = 1 and B(p) = 1 + 2t.
pub fn local_robustness(bx: &Box) -> Result<RobustnessResult> {
    require_no_signalling(bx)?;
    let scenario = bx.scenario();
    let det = enumerate_local_deterministic(scenario)?;
    let n = det.len();
    let entries = scenario.len();

    // Variables: mu_0..n, nu_0..n >= 0.
    // Constraints: sum_i (mu_i - nu_i) d_i = p entrywise. Minimize sum nu.
    let mut objective = vec![0.0; 2 * n];
    objective[n..].fill(1.0);
    let mut lp = Problem::minimize(objective);
    for e in 0..entries {
        let mut row = vec![0.0; 2 * n];
        for (i, d) in det.iter().enumerate() {
            row[i] = d.entries()[e];
            row[n + i] = -d.entries()[e];
        }
        lp.constrain(row, Relation::Eq, bx.entries()[e]);
    }
    let sol = lp.solve()?;

    let mut mu = sol.x[..n].to_vec();
    let mut nu = sol.x[n..].to_vec();
    // Enforce complementarity post-hoc: common mass cancels without changing
    // the represented box.
    for i in 0..n {
        let c = mu[i].min(nu[i]);
        if c > 0.0 {
            mu[i] -= c;
            nu[i] -= c;
        }
    }
    let t = nu.iter().sum::<f64>().max(0.0);

    let (target, target_weights) = weighted_det_box(scenario, &det, &mu)
        .ok_or_else(|| Error::NumericalFailure("empty target decomposition".into()))?;
    let (noise, noise_weights) = match weighted_det_box(scenario, &det, &nu) {
        Some((b, w)) => (b, w),
        None => (Box::uniform(scenario), vec![1.0 / n as f64; n]),
    };

    let dual = dual_bell_functional(scenario, &det, &sol.y);
    Ok(RobustnessResult {
        kind: RobustnessKind::LocalRobustness,
        value: t,
        noise,
        target,
        dual: Some(dual),
        gap: sol.gap,
        target_weights,
        noise_weights,
    })
}

/// Turns the LP dual multipliers y of the entrywise equality constraints into
/// a Bell functional with |B(d_i)| <= 1, max_i |B(d_i)| = 1 and
/// B(p) = 1 + 2t. At the dual optimum y.d_i lies in [-1, 0] and y.p = t, so
/// B = (2/kappa) y + unit with kappa = max_i(-y.d_i) (or B = unit at t = 0).
fn dual_bell_functional(scenario: Scenario, det: &[Box], y: &[f64]) -> BellFunctional {
    let unit = unit_functional_coeffs(scenario);
    let mut kappa: f64 = 0.0;
    for d in det {
        let v: f64 = d.entries().iter().zip(y).map(|(de, yi)| de * yi).sum();
        kappa = kappa.max(-v);
    }
    let coeffs: Vec<f64> = if kappa > 1e-12 {
        unit.iter()
            .zip(y)
            .map(|(u, yi)| u + 2.0 * yi / kappa)
            .collect()
    } else {
        unit
    };
    BellFunctional::new(scenario, coeffs, 1.0, None).expect("valid functional")
}

/// r^G_L(p): minimal t with (p + t q)/(1+t) local for some no-signalling
/// noise q. Because the target is a mixture of deterministic boxes, the
/// per-(x,y) normalization and no-signalling of the noise tensor are implied
/// by the entrywise constraints, so the LP reduces to
/// min sum(mu) - 1 subject to sum_i mu_i d_i >= p entrywise.
pub fn generalized_local_robustness(bx: &Box) -> Result<RobustnessResult> {
    require_no_signalling(bx)?;
    let scenario = bx.scenario();
    let det = enumerate_local_deterministic(scenario)?;
    let n = det.len();
    let entries = scenario.len();

    let mut lp = Problem::minimize(vec![1.0; n]);
    for e in 0..entries {
        let row: Vec<f64> = det.iter().map(|d| d.entries()[e]).collect();
        lp.constrain(row, Relation::Ge, bx.entries()[e]);
    }
    let sol = lp.solve()?;
    let mu = sol.x.clone();
    let t = (sol.value - 1.0).max(0.0);

    let (target, target_weights) = weighted_det_box(scenario, &det, &mu)
        .ok_or_else(|| Error::NumericalFailure("empty target decomposition".into()))?;

    // Noise tensor q = sum mu_i d_i - p, normalized per (x, y) to sum t.
    let noise = if t > 1e-10 {
        let mut q = vec![0.0; entries];
        for (i, d) in det.iter().enumerate() {
            for (dst, &src) in q.iter_mut().zip(d.entries()) {
                *dst += mu[i] * src;
            }
        }
        for (dst, &src) in q.iter_mut().zip(bx.entries()) {
            *dst = (*dst - src).max(0.0) / t;
        }
        Box::new_renormalized(scenario, q, 1e-6)?
    } else {
        Box::uniform(scenario)
    };

    // Dual: y >= 0 with y.d_i <= 1 and y.p = 1 + t.
    let dual = BellFunctional::new(
        scenario,
        sol.y.iter().map(|v| v.max(0.0)).collect(),
        1.0,
        None,
    )?;
    Ok(RobustnessResult {
        kind: RobustnessKind::GeneralizedLocalRobustness,
        value: t,
        noise,
        target,
        dual: Some(dual),
        gap: sol.gap,
        target_weights,
        noise_weights: Vec::new(),
    })
}

/// Outcome of the best-local-approximation (EPR2) decomposition
/// p = (1 - q_NL) p_L + q_NL p_NS.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BestLocalApprox {
    pub q_nl_min: f64,
    pub local_part: Option<Box>,
    pub ns_part: Option<Box>,
    /// Convex weights of the local part over deterministic boxes.
    pub local_weights: Vec<f64>,
}

/// Maximal local weight: max sum(mu) subject to sum mu_i d_i <= p entrywise,
/// mu >= 0. Returns the complementary non-local weight q_NL^min and both
/// parts of the decomposition.
pub fn best_local_approximation(bx: &Box) -> Result<BestLocalApprox> {
    require_no_signalling(bx)?;
    let scenario = bx.scenario();
    let det = enumerate_local_deterministic(scenario)?;
    let n = det.len();
    let entries = scenario.len();

    let mut lp = Problem::minimize(vec![-1.0; n]);
    for e in 0..entries {
        let row: Vec<f64> = det.iter().map(|d| d.entries()[e]).collect();
        lp.constrain(row, Relation::Le, bx.entries()[e]);
    }
    let sol = lp.solve()?;
    let mu = sol.x;
    let local_weight: f64 = mu.iter().sum();
    let q_nl = (1.0 - local_weight).clamp(0.0, 1.0);

    let local = weighted_det_box(scenario, &det, &mu);
    let ns_part = if q_nl > 1e-10 {
        let mut q = bx.entries().to_vec();
        for (i, d) in det.iter().enumerate() {
            for (dst, &src) in q.iter_mut().zip(d.entries()) {
                *dst -= mu[i] * src;
            }
        }
        for v in q.iter_mut() {
            *v = v.max(0.0) / q_nl;
        }
        Some(Box::new_renormalized(scenario, q, 1e-6)?)
    } else {
        None
    };
    Ok(BestLocalApprox {
        q_nl_min: q_nl,
        local_weights: local
            .as_ref()
            .map(|(_, w)| w.clone())
            .unwrap_or_default(),
        local_part: local.map(|(b, _)| b),
        ns_part,
    })
}

/// Report of an independent certificate re-check.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub passed: bool,
    pub failures: Vec<String>,
}

/// Re-checks a robustness result with fresh arithmetic: primal feasibility
/// (mixture identity and target membership via its stored decomposition),
/// dual feasibility over re-enumerated vertices, and the duality identity
/// B(p) = 1 + 2t (local) or B(p) = 1 + t (generalized).
pub fn verify_certificate(bx: &Box, result: &RobustnessResult) -> CertificateReport {
    let mut failures = Vec::new();
    let scenario = bx.scenario();
    let t = result.value;

    // (i) Mixture identity (p + t noise)/(1 + t) = target.
    let mut max_dev: f64 = 0.0;
    for e in 0..scenario.len() {
        let mixed = (bx.entries()[e] + t * result.noise.entries()[e]) / (1.0 + t);
        max_dev = max_dev.max((mixed - result.target.entries()[e]).abs());
    }
    if max_dev > CERT_TOL {
        failures.push(format!("mixture identity deviates by {max_dev:.3e}"));
    }

    // (i) Target membership via its stored decomposition.
    match enumerate_local_deterministic(scenario) {
        Ok(det) => {
            if result.target_weights.len() == det.len() {
                let wsum: f64 = result.target_weights.iter().sum();
                if (wsum - 1.0).abs() > CERT_TOL
                    || result.target_weights.iter().any(|&w| w < -CERT_TOL)
                {
                    failures.push("target weights are not a convex combination".into());
                }
                let mut dev: f64 = 0.0;
                for e in 0..scenario.len() {
                    let v: f64 = det
                        .iter()
                        .zip(&result.target_weights)
                        .map(|(d, w)| w * d.entries()[e])
                        .sum();
                    dev = dev.max((v - result.target.entries()[e]).abs());
                }
                if dev > CERT_TOL {
                    failures.push(format!("target decomposition deviates by {dev:.3e}"));
                }
            } else {
                failures.push("target decomposition has wrong length".into());
            }

            if result.kind == RobustnessKind::LocalRobustness {
                if result.noise_weights.len() == det.len() {
                    let mut dev: f64 = 0.0;
                    for e in 0..scenario.len() {
                        let v: f64 = det
                            .iter()
                            .zip(&result.noise_weights)
                            .map(|(d, w)| w * d.entries()[e])
                            .sum();
                        dev = dev.max((v - result.noise.entries()[e]).abs());
                    }
                    if dev > CERT_TOL {
                        failures.push(format!("noise decomposition deviates by {dev:.3e}"));
                    }
                } else {
                    failures.push("noise decomposition has wrong length".into());
                }
            } else {
                // Generalized noise only needs to be a no-signalling box.
                if !result.noise.is_probability(CERT_TOL)
                    || !result.noise.is_no_signalling(1e-7)
                {
                    failures.push("noise is not a no-signalling probability box".into());
                }
            }

            // (ii) + (iii) Dual feasibility and value.
            if let Some(dual) = &result.dual {
                match result.kind {
                    RobustnessKind::LocalRobustness => {
                        for (i, d) in det.iter().enumerate() {
                            let v = bell_value(d, dual).unwrap_or(f64::NAN);
                            if !(v.abs() <= 1.0 + CERT_TOL) {
                                failures.push(format!("|B(d_{i})| = {v} exceeds 1"));
                                break;
                            }
                        }
                        let bp = bell_value(bx, dual).unwrap_or(f64::NAN);
                        if (bp.abs() - (1.0 + 2.0 * t)).abs() > CERT_TOL {
                            failures.push(format!("B(p) = {bp}, expected 1 + 2t = {}", 1.0 + 2.0 * t));
                        }
                    }
                    RobustnessKind::GeneralizedLocalRobustness => {
                        if dual.coefficients.iter().any(|&c| c < -CERT_TOL) {
                            failures.push("generalized dual has negative coefficients".into());
                        }
                        for (i, d) in det.iter().enumerate() {
                            let v = bell_value(d, dual).unwrap_or(f64::NAN);
                            if !(v <= 1.0 + CERT_TOL) {
                                failures.push(format!("B(d_{i}) = {v} exceeds 1"));
                                break;
                            }
                        }
                        let bp = bell_value(bx, dual).unwrap_or(f64::NAN);
                        if (bp - (1.0 + t)).abs() > CERT_TOL {
                            failures.push(format!("B(p) = {bp}, expected 1 + t = {}", 1.0 + t));
                        }
                    }
                    RobustnessKind::BestLocalApprox => {}
                }
            } else {
                failures.push("certificate carries no dual functional".into());
            }
        }
        Err(e) => failures.push(format!("vertex enumeration failed: {e}")),
    }

    if result.gap > CERT_TOL {
        failures.push(format!("LP duality gap {} exceeds {CERT_TOL}", result.gap));
    }

    CertificateReport { passed: failures.is_empty(), failures }
}

/// Certified lower bound on r_D(p) = r_Q(p): the best of
/// (|B(p)|/quantum_bound - 1)/2 over functionals carrying a quantum bound,
/// floored at zero.
pub fn negativity_floor(bx: &Box, functionals: &[BellFunctional]) -> Result<f64> {
    let mut best: Option<f64> = None;
    for f in functionals {
        let Some(qb) = f.quantum_bound else { continue };
        if f.scenario != bx.scenario() {
            continue;
        }
        let v = (bell_value(bx, f)?.abs() / qb - 1.0) / 2.0;
        best = Some(best.map_or(v, |b: f64| b.max(v)));
    }
    match best {
        Some(v) => Ok(v.max(0.0)),
        None => Err(Error::NoQuantumBoundRegistered),
    }
}
