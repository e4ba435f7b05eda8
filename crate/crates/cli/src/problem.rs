//! Problem files: JSON with `dimension`, `mu`, `nu`, optional `cost`,
//! `mode` and `tolerance`.
//!
//! Numbers may be JSON numbers or strings holding a decimal or `"p/q"`;
//! fractions are accepted only in exact mode. Decimal text is read
//! verbatim, so `0.1` is exactly `1/10` in exact mode.

use serde_json::Value;

use motpaver::transport::CostMatrix;
use motpaver::{DiscreteMeasure, Point, Scalar, Tolerance};

use crate::expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        }
    }
}

/// A parse failure with the JSON path of the offending field, or the line
/// and column of a syntax error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub location: String,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

fn fail<T>(location: impl Into<String>, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        location: location.into(),
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum CostSpec {
    Matrix(Vec<Vec<String>>),
    Expr(String),
}

/// The file after syntax checks, before conversion to a scalar mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub dimension: usize,
    pub mu_atoms: Vec<Vec<String>>,
    pub mu_weights: Vec<String>,
    pub nu_atoms: Vec<Vec<String>>,
    pub nu_weights: Vec<String>,
    pub cost: Option<CostSpec>,
    pub mode: Mode,
    pub tolerance: Tolerance,
}

/// A problem converted to one scalar mode.
#[derive(Debug, Clone)]
pub struct Problem<S> {
    pub mu: DiscreteMeasure<S>,
    pub nu: DiscreteMeasure<S>,
    pub cost: Option<CostMatrix<S>>,
    pub tol: Tolerance,
}

fn number_text(value: &Value, path: &str) -> Result<String, ParseError> {
    match value {
        Value::Number(n) => Ok(n.to_string()),
        Value::String(s) => Ok(s.trim().to_string()),
        _ => fail(path, "expected a number or a numeric string"),
    }
}

fn array<'a>(value: &'a Value, path: &str) -> Result<&'a Vec<Value>, ParseError> {
    value.as_array().ok_or_else(|| ParseError {
        location: path.to_string(),
        message: "expected an array".into(),
    })
}

fn field<'a>(object: &'a Value, key: &str, path: &str) -> Result<&'a Value, ParseError> {
    object.get(key).ok_or_else(|| ParseError {
        location: join(path, key),
        message: "missing field".into(),
    })
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn numbers(value: &Value, path: &str) -> Result<Vec<String>, ParseError> {
    array(value, path)?
        .iter()
        .enumerate()
        .map(|(k, v)| number_text(v, &format!("{path}[{k}]")))
        .collect()
}

fn matrix(value: &Value, path: &str) -> Result<Vec<Vec<String>>, ParseError> {
    array(value, path)?
        .iter()
        .enumerate()
        .map(|(k, row)| numbers(row, &format!("{path}[{k}]")))
        .collect()
}

fn measure(root: &Value, key: &str, dimension: usize) -> Result<(Vec<Vec<String>>, Vec<String>), ParseError> {
    let m = field(root, key, "")?;
    if !m.is_object() {
        return fail(key, "expected an object with `atoms` and `weights`");
    }
    let atoms_path = join(key, "atoms");
    let atoms = matrix(field(m, "atoms", key)?, &atoms_path)?;
    let weights_path = join(key, "weights");
    let weights = numbers(field(m, "weights", key)?, &weights_path)?;
    if atoms.is_empty() {
        return fail(atoms_path, "a measure needs at least one atom");
    }
    for (k, atom) in atoms.iter().enumerate() {
        if atom.len() != dimension {
            return fail(
                format!("{atoms_path}[{k}]"),
                format!("expected {dimension} coordinates, found {}", atom.len()),
            );
        }
    }
    if weights.len() != atoms.len() {
        return fail(weights_path, format!("expected {} weights, found {}", atoms.len(), weights.len()));
    }
    Ok((atoms, weights))
}

/// Checks syntax and shapes of a problem file.
pub fn parse_problem(text: &str) -> Result<ProblemFile, ParseError> {
    let root: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => return fail(format!("line {}, column {}", e.line(), e.column()), e.to_string()),
    };
    if !root.is_object() {
        return fail("<root>", "expected a JSON object");
    }
    let dimension = match field(&root, "dimension", "")?.as_u64() {
        Some(d) if d >= 1 => d as usize,
        _ => return fail("dimension", "expected a positive integer"),
    };
    let mode = match root.get("mode") {
        None => Mode::Exact,
        Some(Value::String(s)) if s == "exact" => Mode::Exact,
        Some(Value::String(s)) if s == "float" => Mode::Float,
        Some(_) => return fail("mode", "expected \"exact\" or \"float\""),
    };
    let tolerance = match root.get("tolerance") {
        None => Tolerance::DEFAULT,
        Some(v) => match number_text(v, "tolerance")?.parse::<f64>() {
            Ok(t) if t >= 0.0 && t.is_finite() => Tolerance(t),
            _ => return fail("tolerance", "expected a nonnegative finite number"),
        },
    };
    let (mu_atoms, mu_weights) = measure(&root, "mu", dimension)?;
    let (nu_atoms, nu_weights) = measure(&root, "nu", dimension)?;
    let cost = match root.get("cost") {
        None | Some(Value::Null) => None,
        Some(c) => {
            let kind = field(c, "type", "cost")?.as_str().unwrap_or_default();
            match kind {
                "matrix" => {
                    let values = matrix(field(c, "values", "cost")?, "cost.values")?;
                    if values.len() != mu_atoms.len() {
                        return fail("cost.values", format!("expected {} rows, found {}", mu_atoms.len(), values.len()));
                    }
                    for (k, row) in values.iter().enumerate() {
                        if row.len() != nu_atoms.len() {
                            return fail(
                                format!("cost.values[{k}]"),
                                format!("expected {} entries, found {}", nu_atoms.len(), row.len()),
                            );
                        }
                    }
                    Some(CostSpec::Matrix(values))
                }
                "expr" => {
                    let formula = field(c, "formula", "cost")?.as_str().ok_or_else(|| ParseError {
                        location: "cost.formula".into(),
                        message: "expected a string".into(),
                    })?;
                    if let Err(e) = expr::parse(formula, dimension) {
                        return fail("cost.formula", e.to_string());
                    }
                    Some(CostSpec::Expr(formula.to_string()))
                }
                _ => return fail("cost.type", "expected \"matrix\" or \"expr\""),
            }
        }
    };
    Ok(ProblemFile {
        dimension,
        mu_atoms,
        mu_weights,
        nu_atoms,
        nu_weights,
        cost,
        mode,
        tolerance,
    })
}

fn scalar<S: Scalar>(text: &str, path: &str) -> Result<S, ParseError> {
    if !S::EXACT && text.contains('/') {
        return fail(path, "fractions are only accepted in exact mode");
    }
    match S::parse(text) {
        Some(v) if v.is_finite() => Ok(v),
        _ => fail(path, format!("`{text}` is not a finite number")),
    }
}

fn points<S: Scalar>(rows: &[Vec<String>], path: &str) -> Result<Vec<Point<S>>, ParseError> {
    rows.iter()
        .enumerate()
        .map(|(k, row)| {
            row.iter()
                .enumerate()
                .map(|(c, v)| scalar(v, &format!("{path}[{k}][{c}]")))
                .collect()
        })
        .collect()
}

fn weights<S: Scalar>(values: &[String], path: &str) -> Result<Vec<S>, ParseError> {
    values
        .iter()
        .enumerate()
        .map(|(k, v)| scalar(v, &format!("{path}[{k}]")))
        .collect()
}

impl ProblemFile {
    /// Builds measures and cost in scalar mode `S`.
    pub fn build<S: Scalar>(&self) -> Result<Problem<S>, ParseError> {
        let tol = self.tolerance;
        let make = |atoms: &[Vec<String>], w: &[String], key: &str| -> Result<DiscreteMeasure<S>, ParseError> {
            let atoms = points::<S>(atoms, &format!("{key}.atoms"))?;
            let w = weights::<S>(w, &format!("{key}.weights"))?;
            if atoms.len() > 1 {
                for a in 1..atoms.len() {
                    if atoms[..a].iter().any(|b| motpaver::measures::points_equal(b, &atoms[a], tol)) {
                        return fail(format!("{key}.atoms[{a}]"), "repeated atom");
                    }
                }
            }
            DiscreteMeasure::new(atoms, w, tol).map_err(|e| ParseError {
                location: key.to_string(),
                message: e.to_string(),
            })
        };
        let mu = make(&self.mu_atoms, &self.mu_weights, "mu")?;
        let nu = make(&self.nu_atoms, &self.nu_weights, "nu")?;
        let cost = match &self.cost {
            None => None,
            Some(CostSpec::Matrix(rows)) => Some(points::<S>(rows, "cost.values")?),
            Some(CostSpec::Expr(formula)) => {
                let e = expr::parse(formula, self.dimension).expect("checked at parse time");
                let mut rows = Vec::with_capacity(mu.len());
                for (i, x) in mu.atoms().iter().enumerate() {
                    let mut row = Vec::with_capacity(nu.len());
                    for (j, y) in nu.atoms().iter().enumerate() {
                        let v = expr::eval::<S>(&e, x, y).map_err(|m| ParseError {
                            location: "cost.formula".into(),
                            message: format!("at (mu atom {i}, nu atom {j}): {m}"),
                        })?;
                        if !v.is_finite() {
                            return fail("cost.formula", format!("infinite value at (mu atom {i}, nu atom {j})"));
                        }
                        row.push(v);
                    }
                    rows.push(row);
                }
                Some(rows)
            }
        };
        let cost = cost
            .map(|rows| {
                CostMatrix::new(rows).map_err(|e| ParseError {
                    location: "cost".into(),
                    message: e.to_string(),
                })
            })
            .transpose()?;
        Ok(Problem { mu, nu, cost, tol })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use motpaver::Rational;

    const SPREAD: &str = r#"{
        "dimension": 1,
        "mu": {"atoms": [[0]], "weights": [1]},
        "nu": {"atoms": [[-1], [1]], "weights": ["1/2", 0.5]},
        "cost": {"type": "expr", "formula": "(y[0]-x[0])^2"}
    }"#;

    #[test]
    fn parses_and_builds_exactly() {
        let file = parse_problem(SPREAD).unwrap();
        assert_eq!(file.mode, Mode::Exact);
        let p = file.build::<Rational>().unwrap();
        assert_eq!(p.nu.weights(), &[Rational::from_ratio(1, 2), Rational::from_ratio(1, 2)]);
        assert_eq!(p.cost.unwrap().get(0, 1), &Rational::from_ratio(1, 1));
    }

    #[test]
    fn decimals_are_exact() {
        let text = r#"{"dimension": 1, "mu": {"atoms": [[0.1]], "weights": [1]},
                       "nu": {"atoms": [[0.1]], "weights": [1]}}"#;
        let p = parse_problem(text).unwrap().build::<Rational>().unwrap();
        assert_eq!(p.mu.atom(0)[0], Rational::from_ratio(1, 10));
    }

    #[test]
    fn fractions_rejected_in_float_mode() {
        let file = parse_problem(&SPREAD.replace("\"dimension\": 1,", "\"dimension\": 1, \"mode\": \"float\",")).unwrap();
        let err = file.build::<f64>().unwrap_err();
        assert_eq!(err.location, "nu.weights[0]");
    }

    #[test]
    fn diagnostics_name_fields() {
        let err = parse_problem(r#"{"dimension": 2, "mu": {"atoms": [[0, 0], [1]], "weights": [1, 1]}}"#).unwrap_err();
        assert_eq!(err.location, "mu.atoms[1]");
        let err = parse_problem(r#"{"dimension": 1, "mu": {"atoms": [[0]], "weights": [1]}}"#).unwrap_err();
        assert_eq!(err.location, "nu");
        let err = parse_problem("{\n  \"dimension\": 1,\n  oops\n}").unwrap_err();
        assert!(err.location.starts_with("line 3"));
        let bad_formula = SPREAD.replace("(y[0]-x[0])^2", "z + 1");
        assert_eq!(parse_problem(&bad_formula).unwrap_err().location, "cost.formula");
        let bad_weight = SPREAD.replace("0.5", "true");
        assert_eq!(parse_problem(&bad_weight).unwrap_err().location, "nu.weights[1]");
    }

    #[test]
    fn weights_must_sum_to_one() {
        let text = SPREAD.replace("0.5", "0.25");
        let err = parse_problem(&text).unwrap().build::<Rational>().unwrap_err();
        assert_eq!(err.location, "nu");
    }
}
