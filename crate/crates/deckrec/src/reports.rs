//! JSON documents for certificates, hard pairs and recovery results.

use deckrec_core::arith::{fmt_rational, Q};
use deckrec_core::lower_bound::{moment_profile, MomentMatchedPair};
use deckrec_core::recovery::RecoveryResult;
use deckrec_core::separation::SeparationCertificate;
use serde_json::{json, Value};

use crate::formats::{decimal_f64, deck_to_json, population_to_json, rational};

fn rationals(v: &[Q]) -> Vec<String> {
    v.iter().map(fmt_rational).collect()
}

/// Separation certificate document.
pub fn certificate_to_json(cert: &SeparationCertificate) -> Value {
    let w = &cert.witness;
    let p = &cert.profile;
    json!({
        "witness": {
            "positions": w.restriction.positions(),
            "pattern": w.restriction.pattern(),
            "gap": rational(&w.gap),
            "i_star": w.i_star,
            "isolated": w.isolated.to_string(),
            "unpadded_len": w.unpadded_len,
        },
        "ell": cert.ell,
        "L": cert.l,
        "q": cert.q,
        "q_within_stated_bound": cert.q_within_stated_bound,
        "w": cert.projection.w,
        "rejections": cert.projection.rejections,
        "alpha": p.alpha,
        "beta": p.beta,
        "m": p.m,
        "nominal_m": p.nominal_m.to_string(),
        "tau_seq": rationals(&p.tau_seq),
        "m_seq": p.m_seq,
        "step_properties_hold": p.step_properties_hold,
        "h_range": cert.h_range,
        "exponent": cert.exponent,
        "nominal_exponent": decimal_f64(cert.nominal_exponent),
        "phi_degree": cert.phi_degree,
        "phi_norm1": rational(&cert.phi_norm1),
        "delta_sup": rational(&cert.delta_sup),
        "separation_sum_abs": rational(&cert.sum_abs()),
        "sums": {
            "direct": rational(&cert.sums.direct),
            "regrouped": rational(&cert.sums.regrouped),
        },
        "cover": {
            "d": cert.cover.d,
            "classes": cert.cover.classes.iter().map(|c| json!({
                "anchor": c.anchor,
                "members": c.members.len(),
                "value": rational(&c.value),
            })).collect::<Vec<_>>(),
            "groups": cert.cover.group_partition,
        },
    })
}

/// Hard-pair document: both populations plus the verification block.
pub fn hard_pair_to_json(pair: &MomentMatchedPair, delta: &Q, tv: &Q) -> Value {
    let profile = moment_profile(pair, pair.ell + 1);
    let verified: Vec<usize> = (1..=pair.ell).filter(|&t| profile[t].0 && profile[t].1).collect();
    json!({
        "s": population_to_json(&pair.pi_s),
        "t": population_to_json(&pair.pi_t),
        "certificate": {
            "ell": pair.ell,
            "n": pair.n,
            "delta": fmt_rational(delta),
            "c_vec": rationals(&pair.c_vec),
            "verified_moment_degrees": verified,
            "moments_equal_at_next_order": profile[pair.ell + 1].1,
            "tv": fmt_rational(tv),
            "tv_decimal": crate::formats::decimal(tv),
        },
    })
}

/// Recovery result document.
pub fn recovery_to_json(r: &RecoveryResult) -> Value {
    json!({
        "estimate": population_to_json(&r.estimate),
        "achieved_deck_distance": decimal_f64(r.achieved_deck_distance),
        "candidates_scanned": r.candidates_scanned,
        "samples_used": r.samples_used,
        "deck": deck_to_json(&r.deck),
    })
}
