//! Deterministic JSON reports for the CLI and the bindings.
//!
//! Reports are `serde_json::Value` trees with object keys in sorted order
//! and every exact number rendered as a string ("p/q" for rationals), so
//! identical inputs produce byte-identical output.

use crate::cones::RationalCone;
use crate::k3::{PolarizedScenario, ProbeReport};
use crate::lattice::{DiscriminantForm, IntegralLattice};
use crate::linalg::IntVec;
use crate::perfect::{
    AdmissibilityReport, PerfectCanonicalReport, PerfectFanPiece, SelfAdjointConeModel,
};
use crate::quotient::{ElementClass, KltOutcome, QuotientAnalysis};
use crate::toric::{CanonicalVerdict, QCartier, SingularityVerdict};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::One;
use serde_json::{json, Value};

pub fn fmt_int(x: &BigInt) -> String {
    x.to_string()
}

pub fn fmt_rat(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn int_vec_value(v: &[BigInt]) -> Value {
    Value::Array(v.iter().map(|x| Value::String(fmt_int(x))).collect())
}

pub fn rat_vec_value(v: &[BigRational]) -> Value {
    Value::Array(v.iter().map(|x| Value::String(fmt_rat(x))).collect())
}

pub fn int_vecs_value(vs: &[IntVec]) -> Value {
    Value::Array(vs.iter().map(|v| int_vec_value(v)).collect())
}

pub fn mat_value(m: &crate::linalg::IntMat) -> Value {
    Value::Array((0..m.rows()).map(|i| int_vec_value(&m.row(i))).collect())
}

pub fn cone_value(c: &RationalCone) -> Value {
    let mut obj = json!({
        "ambient_dim": c.ambient_dim(),
        "dim": c.dim(),
        "pointed": c.is_pointed(),
        "rays": int_vecs_value(c.rays()),
        "facet_normals": int_vecs_value(c.facet_normals()),
    });
    if let Some(mult) = c.multiplicity() {
        obj["multiplicity"] = Value::String(fmt_int(&mult));
    }
    obj
}

pub fn verdict_value(v: &SingularityVerdict) -> Value {
    let canonical = match &v.canonical {
        CanonicalVerdict::Canonical => json!({"status": "canonical"}),
        CanonicalVerdict::NotCanonical { witness } => json!({
            "status": "not-canonical",
            "witness": int_vec_value(witness),
        }),
        CanonicalVerdict::NotApplicable => json!({"status": "not-applicable"}),
    };
    let mut obj = json!({
        "rays": int_vecs_value(&v.rays),
        "q_gorenstein": v.is_q_gorenstein(),
        "canonical": canonical,
    });
    if let Some(m) = &v.q_gorenstein {
        obj["m"] = rat_vec_value(m);
    }
    if let Some(i) = &v.gorenstein_index {
        obj["gorenstein_index"] = Value::String(fmt_int(i));
    }
    if let Some(t) = v.terminal_informational {
        obj["terminal_informational"] = Value::Bool(t);
    }
    obj
}

pub fn q_cartier_value(q: &QCartier) -> Value {
    match q {
        QCartier::Yes { m } => json!({
            "q_cartier": true,
            "m": rat_vec_value(m),
        }),
        QCartier::No { certificate } => json!({
            "q_cartier": false,
            "certificate": rat_vec_value(certificate),
        }),
    }
}

pub fn lattice_value(l: &IntegralLattice) -> Value {
    let (pos, neg, zero) = l.signature().expect("symmetric by construction");
    json!({
        "rank": l.rank(),
        "gram": mat_value(l.gram()),
        "det": fmt_int(&l.det()),
        "even": l.is_even(),
        "signature": [pos, neg, zero],
    })
}

pub fn discriminant_value(form: &DiscriminantForm) -> Value {
    json!({
        "invariant_factors": form.invariant_factors.iter().map(fmt_int).collect::<Vec<_>>(),
        "order": fmt_int(&form.order()),
        "generators": Value::Array(form.generators.iter().map(|g| rat_vec_value(g)).collect()),
        "q_values": rat_vec_value(&form.q_values),
        "pairing": Value::Array(form.pairing.iter().map(|row| rat_vec_value(row)).collect()),
    })
}

pub fn model_value(model: &SelfAdjointConeModel) -> Value {
    match model {
        SelfAdjointConeModel::Lorentzian { lattice, component } => json!({
            "kind": "lorentzian",
            "lattice": lattice_value(lattice),
            "component": int_vec_value(component),
        }),
        SelfAdjointConeModel::PsdForms { g } => json!({
            "kind": "psd",
            "g": g,
        }),
    }
}

pub fn fan_piece_value(piece: &PerfectFanPiece) -> Value {
    let facets: Vec<Value> = piece
        .facets
        .iter()
        .map(|f| {
            json!({
                "normal": rat_vec_value(&f.normal),
                "normal_dual_vector": rat_vec_value(&f.normal_dual_vector),
                "vertices": int_vecs_value(&f.vertices),
                "lattice_points": int_vecs_value(&f.lattice_points),
                "certificate": {
                    "box_low": int_vec_value(&f.certificate.box_low),
                    "box_high": int_vec_value(&f.certificate.box_high),
                    "points_checked": f.certificate.points_checked,
                },
            })
        })
        .collect();
    let unbounded: Vec<Value> = piece
        .unbounded_faces
        .iter()
        .map(|u| {
            let mut obj = json!({
                "covector": int_vec_value(&u.covector),
            });
            if let Some(ray) = &u.ray {
                obj["ray"] = int_vec_value(ray);
            }
            obj
        })
        .collect();
    json!({
        "height": piece.height,
        "facets": facets,
        "maximal_cones": Value::Array(
            piece.maximal_cones().iter().map(cone_value).collect()
        ),
        "fan_cones": piece.fan.cones().len(),
        "unbounded_faces": unbounded,
    })
}

pub fn perfect_canonical_value(report: &PerfectCanonicalReport) -> Value {
    json!({
        "piece": fan_piece_value(&report.piece),
        "verdicts": Value::Array(report.verdicts.iter().map(verdict_value).collect()),
        "all_q_gorenstein": report.all_q_gorenstein,
        "all_canonical": report.all_canonical,
        "falsification_witnesses": report.falsification_witnesses,
    })
}

pub fn admissibility_value(r: &AdmissibilityReport) -> Value {
    json!({
        "face_closure_ok": r.face_closure_ok,
        "face_closure_witness": r.face_closure_witness,
        "intersections_ok": r.intersections_ok,
        "intersection_witness": r.intersection_witness,
        "group_compatible": r.group_compatible,
        "group_witness": r.group_witness,
        "covering_ok": r.covering_ok,
        "covering_witness": r.covering_witness,
        "cones_in_window": r.cones_in_window,
        "finiteness_note": r.finiteness_note,
        "all_ok": r.all_ok(),
    })
}

pub fn quotient_value(cone: &RationalCone, a: &QuotientAnalysis) -> Value {
    let elements: Vec<Value> = a
        .reports
        .iter()
        .map(|r| {
            let class = match r.classification {
                ElementClass::Identity => "identity",
                ElementClass::Reflection => "reflection",
                ElementClass::QuasiReflection => "quasi-reflection",
                ElementClass::Other => "other",
            };
            let mut obj = json!({
                "matrix": mat_value(&r.element),
                "class": class,
                "order": r.order,
            });
            if let Some(c) = &r.torus_fixed_components {
                obj["torus_fixed_components"] = Value::String(fmt_int(c));
                obj["component_labels"] = json!(r.component_labels);
            }
            obj
        })
        .collect();
    let ramification: Vec<Value> = a
        .ramification
        .iter()
        .map(|s| {
            json!({
                "reflection": mat_value(&s.reflection),
                "components": fmt_int(&s.components),
            })
        })
        .collect();
    let klt = match &a.klt {
        KltOutcome::Certificate(c) => json!({
            "certificate": true,
            "fan_canonical": c.fan_canonical,
            "group_acts": c.group_acts,
            "group_order": c.group_order,
            "reflection_count": c.reflection_count,
            "ramification_components": fmt_int(&c.ramification_components),
            "hypothesis_trace": c.hypothesis_trace,
        }),
        KltOutcome::Refusal { failed_check } => json!({
            "certificate": false,
            "failed_check": failed_check,
        }),
    };
    let mut obj = json!({
        "cone": cone_value(cone),
        "verdict": verdict_value(&a.verdict),
        "group_order": a.group_order,
        "elements": elements,
        "ramification": ramification,
        "characters": int_vecs_value(&a.characters),
        "invariant_divisor_check": {
            "pairs_checked": a.invariant_divisor_check.pairs_checked,
            "violations": a.invariant_divisor_check.violations,
            "passed": a.invariant_divisor_check.passed(),
        },
        "klt": klt,
    });
    if let Some(red) = &a.invariant_reduction {
        obj["invariant_reduction"] = rat_vec_value(&red.coefficients);
    }
    if let Some(qc) = &a.q_cartier {
        obj["q_cartier"] = q_cartier_value(qc);
    }
    if let Some(qg) = a.quotient_q_gorenstein {
        obj["quotient_q_gorenstein"] = Value::Bool(qg);
    }
    obj
}

pub fn scenario_value(s: &PolarizedScenario, d: Option<i64>, probe: Option<&ProbeReport>) -> Value {
    let form = crate::lattice::discriminant_form(&s.lattice).expect("even non-degenerate");
    let qform =
        crate::lattice::discriminant_form(&s.isotropic.quotient).expect("even non-degenerate");
    let mut obj = json!({
        "lattice": lattice_value(&s.lattice),
        "discriminant": discriminant_value(&form),
        "isotropic_vector": int_vec_value(&s.isotropic.vector),
        "partner": int_vec_value(&s.partner),
        "splitting_basis": mat_value(&s.splitting_basis),
        "splitting_verified": true,
        "quotient": lattice_value(&s.isotropic.quotient),
        "quotient_discriminant": discriminant_value(&qform),
        "complement_gram": mat_value(&s.complement_gram),
    });
    if let Some(d) = d {
        obj["d"] = json!(d);
        obj["d_square_free"] = json!(crate::k3::is_square_free(d));
        if !crate::k3::is_square_free(d) {
            obj["note"] = Value::String(
                "d is not square-free: there may be several orbits of primitive isotropic \
                 vectors; run the probe per representative"
                    .into(),
            );
        }
    }
    if let Some(p) = probe {
        obj["probe"] = probe_value(p);
    }
    obj
}

pub fn probe_value(p: &ProbeReport) -> Value {
    let attempts: Vec<Value> = p
        .attempts
        .iter()
        .map(|a| {
            let mut obj = json!({
                "eigenvector": int_vec_value(&a.eigenvector),
                "lifted": a.lift_vector.is_some(),
                "round_trip_ok": a.round_trip_ok,
            });
            if let Some(w) = &a.lift_vector {
                obj["lift_vector"] = int_vec_value(w);
            }
            obj
        })
        .collect();
    json!({
        "height": p.height,
        "reflections_found": p.reflections_found,
        "lifted": p.lifted,
        "all_lifted": p.all_lifted(),
        "note": "finite probe of the lifting hypothesis, not a proof",
        "attempts": attempts,
    })
}

/// Wrap a report body with its command name.
pub fn command_report(command: &str, body: Value) -> Value {
    json!({
        "command": command,
        "report": body,
    })
}

pub fn to_pretty_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// The worked-example pipeline: pentagon cone modulo its reflection.
pub fn paper_example() -> crate::Result<Value> {
    let cone = crate::toric::pentagon_cone();
    let reflection = crate::quotient::pentagon_reflection();
    let analysis = crate::quotient::quotient_analysis(
        &cone,
        std::slice::from_ref(&reflection),
        crate::quotient::DEFAULT_GROUP_BOUND,
    )?;
    let mut body = quotient_value(&cone, &analysis);
    body["inputs"] = json!({
        "cone_generators": int_vecs_value(cone.generators()),
        "group_generators": [mat_value(&reflection)],
    });
    Ok(command_report("paper-example", body))
}
