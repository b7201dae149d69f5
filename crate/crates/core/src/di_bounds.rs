//! Device-independent certificates: from a measured box alone, certified
//! lower bounds on the trace norm / negativity of any pseudo-state realizing
//! it and on the generalized entanglement robustness of any quantum
//! realization.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::correlations::{bell_value, chsh_functional, BellFunctional, Box, NS_TOL};
use crate::error::{Error, Result};
use crate::operators::trace_norm;
use crate::robustness::{generalized_local_robustness, negativity_floor};

/// A certificate derived from correlation data only. Every floor holds for
/// *every* realization of the box, quantum or pseudo-state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DICertificate {
    /// Hex SHA-256 of the canonical box JSON.
    pub box_digest: String,
    pub chsh_value: f64,
    /// Lower bound on the trace norm of any pseudo-state producing the box.
    pub trace_norm_floor: f64,
    pub negativity_floor: f64,
    /// Lower bound on the generalized entanglement robustness of any quantum
    /// state producing the box.
    pub entanglement_floor: f64,
    pub assumptions: Vec<String>,
    pub version: String,
}

/// Canonical content hash of a box: hex SHA-256 of its JSON encoding.
pub fn box_digest(bx: &Box) -> String {
    let json = serde_json::to_string(bx).expect("boxes always serialize");
    hex::encode(Sha256::digest(json.as_bytes()))
}

/// Certifies a box with the built-in CHSH functional (quantum bound sqrt(2))
/// when the scenario is (2,2,2,2); other scenarios get only the
/// generalized-robustness entanglement floor.
pub fn certify(bx: &Box) -> Result<DICertificate> {
    certify_with(bx, &[])
}

/// Like `certify` but takes extra Bell functionals with known quantum
/// bounds; the negativity floor is the best over all applicable functionals.
pub fn certify_with(bx: &Box, extra: &[BellFunctional]) -> Result<DICertificate> {
    let dev = bx.signalling_deviation();
    if dev > NS_TOL {
        return Err(Error::SignallingInput(dev, NS_TOL));
    }
    let is_chsh_scenario = bx.scenario() == crate::correlations::Scenario::chsh();
    let mut functionals: Vec<BellFunctional> = Vec::new();
    let mut assumptions = Vec::new();
    if is_chsh_scenario {
        functionals.push(chsh_functional());
        assumptions.push("quantum bound sqrt(2) for CHSH taken as known".to_string());
    }
    for f in extra {
        if f.quantum_bound.is_some() && f.scenario == bx.scenario() {
            assumptions.push("user-supplied quantum bound taken as known".to_string());
            functionals.push(f.clone());
        }
    }

    let chsh_value = if is_chsh_scenario {
        bell_value(bx, &chsh_functional())?.abs()
    } else {
        0.0
    };
    let neg_floor = if functionals.is_empty() {
        0.0
    } else {
        negativity_floor(bx, &functionals)?
    };
    let entanglement_floor = generalized_local_robustness(bx)?.value.max(0.0);
    assumptions.push("box treated as exact (no finite statistics)".to_string());

    Ok(DICertificate {
        box_digest: box_digest(bx),
        chsh_value,
        trace_norm_floor: 2.0 * neg_floor + 1.0,
        negativity_floor: neg_floor,
        entanglement_floor,
        assumptions,
        version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

/// Tightness check for the noisy PR family: the device-independent
/// trace-norm floor against the trace norm of the explicit pseudo-state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SaturationReport {
    pub eps: f64,
    pub trace_norm_floor: f64,
    pub trace_norm_actual: f64,
    pub gap: f64,
}

/// Compares the certified floor with the explicit construction for
/// pr_box(eps). Only defined where the explicit pseudo-state has the floor's
/// trace norm, eps <= (2-sqrt(2))/4; the gap must be <= 1e-9 there.
pub fn saturation_report(eps: f64) -> Result<SaturationReport> {
    let hi = (2.0 - std::f64::consts::SQRT_2) / 4.0;
    if !(0.0..=hi).contains(&eps) {
        return Err(Error::RangeError { name: "eps", value: eps, lo: 0.0, hi });
    }
    let floor = certify(&crate::constructions::pr_box(eps)?)?.trace_norm_floor;
    let actual = trace_norm(crate::constructions::pr_pseudostate(eps)?.op())?;
    Ok(SaturationReport {
        eps,
        trace_norm_floor: floor,
        trace_norm_actual: actual,
        gap: (floor - actual).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{pr_box, pr_measurements};
    use crate::correlations::Scenario;
    use crate::operators::{born_box, sampling::random_density};
    use crate::robustness::local_robustness;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const SQRT_2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn pr_box_certificate() {
        let c = certify(&pr_box(0.0).unwrap()).unwrap();
        assert!((c.chsh_value - 2.0).abs() < 1e-12);
        assert!((c.trace_norm_floor - SQRT_2).abs() < 1e-12);
        assert!((c.negativity_floor - (SQRT_2 - 1.0) / 2.0).abs() < 1e-12);
        assert!((c.entanglement_floor - 1.0 / 3.0).abs() < 1e-8);
        assert!(c.assumptions.iter().any(|a| a.contains("sqrt(2)")));
    }

    #[test]
    fn noisy_pr_certificate_at_eps_01() {
        let c = certify(&pr_box(0.1).unwrap()).unwrap();
        assert!((c.chsh_value - 1.6).abs() < 1e-12);
        assert!((c.trace_norm_floor - SQRT_2 * 0.8).abs() < 1e-12);
    }

    #[test]
    fn floors_clamp_at_zero_for_local_boxes() {
        for eps in [0.25, 0.3, 0.5] {
            let c = certify(&pr_box(eps).unwrap()).unwrap();
            assert_eq!(c.negativity_floor, 0.0);
            assert_eq!(c.trace_norm_floor, 1.0);
            assert!(c.entanglement_floor < 1e-8);
        }
    }

    #[test]
    fn quantum_boxes_never_certify_negativity() {
        let (alice, bob) = pr_measurements();
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for _ in 0..20 {
            let st = random_density(&mut rng, 2, 2);
            let bx = born_box(&st, &alice, &bob).unwrap();
            let c = certify(&bx).unwrap();
            assert_eq!(c.negativity_floor, 0.0, "quantum box certified negativity");
        }
    }

    #[test]
    fn floor_chain_against_local_robustness() {
        for eps in [0.0, 0.05, 0.1, 0.2, 0.3] {
            let p = pr_box(eps).unwrap();
            let c = certify(&p).unwrap();
            let r_l = local_robustness(&p).unwrap().value;
            assert!(c.negativity_floor <= r_l + 1e-8, "eps={eps}");
            assert!(c.entanglement_floor <= r_l + 1e-8, "eps={eps}");
        }
    }

    #[test]
    fn chsh_invariant_under_its_relabeling_symmetries() {
        // Eight local relabelings map CHSH to +-CHSH: global output flips on
        // either side (sign flips) and the input swap x -> x+1 combined with
        // b -> b+y (invariance). |chsh_value| and the floors are unchanged.
        let s = Scenario::chsh();
        let base = pr_box(0.0).unwrap();
        for flip_a in 0..2usize {
            for flip_b in 0..2usize {
                for swap_x in 0..2usize {
                    let mut p = vec![0.0; s.len()];
                    for x in 0..2 {
                        for y in 0..2 {
                            for a in 0..2 {
                                for b in 0..2 {
                                    let src_x = if swap_x == 1 { x ^ 1 } else { x };
                                    let src_b = b ^ flip_b ^ (swap_x & y);
                                    p[s.index(x, y, a, b)] =
                                        base.get(src_x, y, a ^ flip_a, src_b);
                                }
                            }
                        }
                    }
                    let bx = Box::new(s, p).unwrap();
                    let c = certify(&bx).unwrap();
                    assert!(
                        (c.chsh_value - 2.0).abs() < 1e-12,
                        "flips ({flip_a},{flip_b},{swap_x}): chsh {}",
                        c.chsh_value
                    );
                    assert!((c.trace_norm_floor - SQRT_2).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn saturation_across_family() {
        let hi = (2.0 - SQRT_2) / 4.0;
        for k in 0..=10 {
            let eps = hi * k as f64 / 10.0;
            let r = saturation_report(eps).unwrap();
            assert!(r.gap <= 1e-9, "eps={eps} gap={}", r.gap);
            assert!((r.trace_norm_floor - SQRT_2 * (1.0 - 2.0 * eps)).abs() < 1e-9);
        }
        assert!(saturation_report(0.2).is_err());
        assert!(saturation_report(-0.1).is_err());
    }

    #[test]
    fn saturation_endpoints() {
        let r0 = saturation_report(0.0).unwrap();
        assert!((r0.trace_norm_floor - SQRT_2).abs() < 1e-12);
        assert!((r0.trace_norm_actual - SQRT_2).abs() < 1e-9);
        let rc = saturation_report((2.0 - SQRT_2) / 4.0).unwrap();
        assert!((rc.trace_norm_floor - 1.0).abs() < 1e-12);
        assert!((rc.trace_norm_actual - 1.0).abs() < 1e-9);
        let rm = saturation_report(0.05).unwrap();
        assert!((rm.trace_norm_floor - SQRT_2 * 0.9).abs() < 1e-12);
    }

    #[test]
    fn digest_is_stable_and_input_sensitive() {
        let d1 = box_digest(&pr_box(0.0).unwrap());
        let d2 = box_digest(&pr_box(0.0).unwrap());
        let d3 = box_digest(&pr_box(0.1).unwrap());
        assert_eq!(d1, d2);
        assert_ne!(d1, d3);
        assert_eq!(d1.len(), 64);
    }

    #[test]
    fn signalling_box_is_rejected() {
        let s = Scenario::chsh();
        let mut p = vec![0.0; s.len()];
        // Alice's outcome copies y: maximally signalling.
        for x in 0..2 {
            for y in 0..2 {
                p[s.index(x, y, y, 0)] = 1.0;
            }
        }
        let bx = Box::new(s, p).unwrap();
        assert!(matches!(certify(&bx), Err(Error::SignallingInput(_, _))));
    }

    #[test]
    fn extra_functional_can_tighten_the_floor() {
        // Register CHSH with a (hypothetical) smaller quantum bound; the
        // certificate must take the better of the two floors.
        let p = pr_box(0.0).unwrap();
        let mut f = chsh_functional();
        f.quantum_bound = Some(1.2);
        let c = certify_with(&p, &[f]).unwrap();
        let expect = (2.0 / 1.2 - 1.0) / 2.0;
        assert!((c.negativity_floor - expect).abs() < 1e-12);
    }
}
