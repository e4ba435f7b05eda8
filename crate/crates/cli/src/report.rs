//! JSON rendering of library results and the reverse for `--verify`.
//!
//! A scalar is `{"exact": "p/q", "decimal": f}` in exact mode and
//! `{"decimal": f}` in float mode. Readers prefer `exact` when present.

use serde_json::{json, Map, Value};

use motpaver::measures::Separation;
use motpaver::monotonicity::{FinitePlan, MonotonicityCertificate, Verdict};
use motpaver::paving::ComponentPaving;
use motpaver::transport::{Coupling, DualCertificate};
use motpaver::{Point, Scalar, Tolerance};

pub const SCHEMA: &str = "motpaver-report/1";

pub fn scalar<S: Scalar>(v: &S) -> Value {
    let decimal = serde_json::Number::from_f64(v.to_f64()).map_or(Value::Null, Value::Number);
    if S::EXACT {
        json!({"exact": v.to_string(), "decimal": decimal})
    } else {
        json!({ "decimal": decimal })
    }
}

pub fn scalars<S: Scalar>(values: &[S]) -> Value {
    Value::Array(values.iter().map(scalar).collect())
}

pub fn points<S: Scalar>(values: &[Point<S>]) -> Value {
    Value::Array(values.iter().map(|p| scalars(p)).collect())
}

pub fn matrix<S: Scalar>(rows: &[Vec<S>]) -> Value {
    Value::Array(rows.iter().map(|r| scalars(r)).collect())
}

pub fn coupling<S: Scalar>(p: &Coupling<S>) -> Value {
    matrix(p.masses())
}

pub fn dual<S: Scalar>(c: &DualCertificate<S>) -> Value {
    json!({
        "phi": scalars(&c.phi),
        "psi": scalars(&c.psi),
        "h": matrix(&c.h),
        "value": scalar(&c.value),
        "slack": matrix(&c.slack),
    })
}

pub fn separation<S: Scalar>(s: &Separation<S>) -> Value {
    json!({"phi": scalars(&s.phi), "psi": scalars(&s.psi), "h": matrix(&s.h)})
}

pub fn pairs(p: &[(usize, usize)]) -> Value {
    Value::Array(p.iter().map(|&(i, j)| json!([i, j])).collect())
}

pub fn plan<S: Scalar>(p: &FinitePlan<S>) -> Value {
    json!({"pairs": pairs(p.pairs()), "weights": scalars(p.weights())})
}

pub fn monotonicity<S: Scalar>(cert: &MonotonicityCertificate<S>) -> Value {
    json!({
        "verdict": match cert.verdict { Verdict::Certified => "certified", Verdict::Violated => "violated" },
        "trials": cert.trials,
        "sweep": {
            "max_x_atoms": cert.params.max_x_atoms,
            "random_plans": cert.params.random_plans,
            "seed": cert.params.seed,
        },
        "witness": cert.witness.as_ref().map(|w| json!({
            "plan": plan(&w.plan),
            "competitor": plan(&w.competitor),
            "gap": scalar(&w.gap),
        })),
    })
}

pub fn paving<S: Scalar>(
    paving: &ComponentPaving<S>,
    xs: &[Point<S>],
    ys: &[Point<S>],
    invariant: Option<&[bool]>,
    tol: Tolerance,
) -> Result<Value, motpaver::Error<S>> {
    let mut components = Vec::new();
    for (k, c) in paving.components.iter().enumerate() {
        let vertices = c.polytope.vertices(tol)?;
        let attachments: Vec<Value> = c
            .attachments
            .iter()
            .map(|a| {
                json!({
                    "atom": a.atom,
                    "point": scalars(&ys[a.atom]),
                    "in_ri": a.in_ri,
                    "min_mass": scalar(&a.min_mass),
                    "max_mass": scalar(&a.max_mass),
                })
            })
            .collect();
        let mut entry = Map::new();
        entry.insert("id".into(), json!(c.id));
        entry.insert("members".into(), json!(c.members));
        entry.insert("member_points".into(), points(&c.members.iter().map(|&i| xs[i].clone()).collect::<Vec<_>>()));
        entry.insert("dimension".into(), json!(c.polytope.dim()));
        entry.insert("vertices".into(), points(&vertices));
        entry.insert("eta".into(), scalar(&c.eta));
        entry.insert("j_atoms".into(), json!(c.j_atoms()));
        entry.insert("attachments".into(), Value::Array(attachments));
        if let Some(flags) = invariant {
            entry.insert("nu_invariant".into(), json!(flags[k]));
        }
        components.push(Value::Object(entry));
    }
    Ok(json!({"components": components, "atom_component": paving.atom_component}))
}

/// Reads a scalar written by [`scalar`].
pub fn read_scalar<S: Scalar>(v: &Value) -> Option<S> {
    if let Some(text) = v.get("exact").and_then(Value::as_str) {
        if let Some(x) = S::parse(text) {
            return Some(x);
        }
    }
    let d = v.get("decimal")?;
    let text = d.as_number()?.to_string();
    S::parse(&text).or_else(|| S::from_f64(d.as_f64()?))
}

pub fn read_scalars<S: Scalar>(v: &Value) -> Option<Vec<S>> {
    v.as_array()?.iter().map(read_scalar).collect()
}

pub fn read_matrix<S: Scalar>(v: &Value) -> Option<Vec<Vec<S>>> {
    v.as_array()?.iter().map(read_scalars).collect()
}

pub fn read_pairs(v: &Value) -> Option<Vec<(usize, usize)>> {
    v.as_array()?
        .iter()
        .map(|p| {
            let p = p.as_array()?;
            Some((p.first()?.as_u64()? as usize, p.get(1)?.as_u64()? as usize))
        })
        .collect()
}

pub fn read_plan<S: Scalar>(v: &Value, tol: Tolerance) -> Option<FinitePlan<S>> {
    FinitePlan::new(read_pairs(v.get("pairs")?)?, read_scalars(v.get("weights")?)?, tol).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use motpaver::Rational;

    #[test]
    fn scalars_round_trip() {
        let q = Rational::from_ratio(-7, 12);
        assert_eq!(read_scalar::<Rational>(&scalar(&q)), Some(q));
        let f = 0.1f64 + 0.2;
        assert_eq!(read_scalar::<f64>(&scalar(&f)), Some(f));
        assert!(scalar(&1.5f64).get("exact").is_none());
    }
}
