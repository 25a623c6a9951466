//! JSON readers and writers for matrices, algebra descriptors and Hamiltonians.
//!
//! Matrices are `{"dim": d, "entries": [[[re, im], ...], ...]}`, row-major.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde_json::{json, Map, Value};

use crate::algebra::{AlgebraDescriptor, Side};
use crate::dynamics::{analyze_hamiltonian, HamiltonianModel};
use crate::operator::{gue, OperatorMatrix, RandomSeed};
use crate::util::{real, to_f64};
use crate::{Error, Real, Result};

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn as_usize(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| parse_err(format!("{what} must be a non-negative integer")))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, ctx: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| parse_err(format!("{ctx}: missing \"{key}\"")))
}

fn as_object<'a>(v: &'a Value, ctx: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| parse_err(format!("{ctx} must be a JSON object")))
}

pub fn complex_from_json<R: Real>(v: &Value) -> Result<Complex<R>> {
    match v.as_array().map(Vec::as_slice) {
        Some([re, im]) => match (re.as_f64(), im.as_f64()) {
            (Some(re), Some(im)) => Ok(Complex::new(real(re), real(im))),
            _ => Err(parse_err("complex entries must be numeric [re, im] pairs")),
        },
        _ => Err(parse_err("complex entries must be [re, im] pairs")),
    }
}

pub fn complex_to_json<R: Real>(z: Complex<R>) -> Value {
    json!([to_f64(z.re), to_f64(z.im)])
}

pub fn matrix_from_json<R: Real>(v: &Value) -> Result<OperatorMatrix<R>> {
    let obj = as_object(v, "matrix")?;
    let dim = as_usize(field(obj, "dim", "matrix")?, "dim")?;
    let rows = field(obj, "entries", "matrix")?
        .as_array()
        .ok_or_else(|| parse_err("entries must be an array of rows"))?;
    if dim == 0 || rows.len() != dim {
        return Err(parse_err(format!("expected {dim} rows, found {}", rows.len())));
    }
    let mut m = DMatrix::zeros(dim, dim);
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| parse_err(format!("row {i} is not an array")))?;
        if row.len() != dim {
            return Err(parse_err(format!("row {i} has {} entries, expected {dim}", row.len())));
        }
        for (j, z) in row.iter().enumerate() {
            m[(i, j)] = complex_from_json(z)?;
        }
    }
    Ok(OperatorMatrix::from_square(m))
}

pub fn matrix_to_json<R: Real>(m: &OperatorMatrix<R>) -> Value {
    let d = m.dim();
    let rows: Vec<Value> = (0..d)
        .map(|i| Value::Array((0..d).map(|j| complex_to_json(m.matrix()[(i, j)])).collect()))
        .collect();
    json!({ "dim": d, "entries": rows })
}

fn vector_from_json<R: Real>(v: &Value) -> Result<DVector<Complex<R>>> {
    let items = v
        .as_array()
        .ok_or_else(|| parse_err("state vector must be an array of [re, im] pairs"))?;
    let entries = items.iter().map(complex_from_json).collect::<Result<Vec<_>>>()?;
    if entries.is_empty() {
        return Err(parse_err("state vector is empty"));
    }
    Ok(DVector::from_vec(entries))
}

/// `{"kind": ..., "params": {...}}`.
pub fn descriptor_from_json<R: Real>(v: &Value) -> Result<AlgebraDescriptor<R>> {
    let obj = as_object(v, "algebra descriptor")?;
    let kind = field(obj, "kind", "algebra descriptor")?
        .as_str()
        .ok_or_else(|| parse_err("kind must be a string"))?;
    let empty = Map::new();
    let params = match obj.get("params") {
        Some(p) => as_object(p, "params")?,
        None => &empty,
    };
    let int = |key: &str| -> Result<usize> { as_usize(field(params, key, kind)?, key) };
    Ok(match kind {
        "generators" => {
            let gens = field(params, "generators", kind)?
                .as_array()
                .ok_or_else(|| parse_err("generators must be an array of matrices"))?
                .iter()
                .map(matrix_from_json)
                .collect::<Result<Vec<_>>>()?;
            if gens.is_empty() {
                return Err(parse_err("generator list is empty"));
            }
            AlgebraDescriptor::Generators(gens)
        }
        "factor" => {
            let side = match params.get("side").and_then(Value::as_str).unwrap_or("A") {
                "A" | "a" => Side::A,
                "B" | "b" => Side::B,
                other => return Err(parse_err(format!("side must be \"A\" or \"B\", got {other:?}"))),
            };
            AlgebraDescriptor::Factor {
                d_a: int("d_a")?,
                d_b: int("d_b")?,
                side,
            }
        }
        "diagonal" => AlgebraDescriptor::Diagonal { d: int("d")? },
        "symmetric_swap" => AlgebraDescriptor::SymmetricSwap { d: int("d")? },
        "group_z2" => AlgebraDescriptor::GroupZ2 { d: int("d")? },
        "loschmidt" => {
            let psi = vector_from_json(field(params, "psi", kind)?)?;
            if let Some(d) = params.get("d") {
                let d = as_usize(d, "d")?;
                if d != psi.len() {
                    return Err(parse_err(format!("d = {d} but psi has {} entries", psi.len())));
                }
            }
            AlgebraDescriptor::Loschmidt { psi }
        }
        other => return Err(parse_err(format!("unknown algebra kind {other:?}"))),
    })
}

pub fn descriptor_to_json<R: Real>(desc: &AlgebraDescriptor<R>) -> Value {
    let params = match desc {
        AlgebraDescriptor::Generators(g) => json!({ "generators": g.iter().map(matrix_to_json).collect::<Vec<_>>() }),
        AlgebraDescriptor::Factor { d_a, d_b, side } => json!({
            "d_a": d_a,
            "d_b": d_b,
            "side": match side { Side::A => "A", Side::B => "B" },
        }),
        AlgebraDescriptor::Diagonal { d }
        | AlgebraDescriptor::SymmetricSwap { d }
        | AlgebraDescriptor::GroupZ2 { d } => json!({ "d": d }),
        AlgebraDescriptor::Loschmidt { psi } => json!({
            "d": psi.len(),
            "psi": psi.iter().map(|z| complex_to_json(*z)).collect::<Vec<_>>(),
        }),
    };
    json!({ "kind": desc.kind(), "params": params })
}

/// Full matrix, `{"eigenvalues", "eigenvectors"}`, or `{"gue": d, "seed": s}`.
pub fn hamiltonian_from_json<R: Real>(v: &Value, tol_rel: f64) -> Result<HamiltonianModel<R>> {
    let obj = as_object(v, "Hamiltonian")?;
    if let Some(d) = obj.get("gue") {
        let d = as_usize(d, "gue")?;
        if d == 0 {
            return Err(parse_err("gue dimension must be positive"));
        }
        let seed = obj.get("seed").map(|s| as_usize(s, "seed")).transpose()?.unwrap_or(0) as u64;
        return analyze_hamiltonian(&gue::<R>(d, RandomSeed::new(seed, 0)), tol_rel);
    }
    if let Some(vals) = obj.get("eigenvalues") {
        let vals = vals
            .as_array()
            .ok_or_else(|| parse_err("eigenvalues must be an array"))?
            .iter()
            .map(|x| x.as_f64().map(real::<R>).ok_or_else(|| parse_err("eigenvalues must be numbers")))
            .collect::<Result<Vec<R>>>()?;
        let vecs = matrix_from_json(field(obj, "eigenvectors", "Hamiltonian")?)?;
        return HamiltonianModel::from_eigen(&vals, vecs, tol_rel);
    }
    analyze_hamiltonian(&matrix_from_json(v)?, tol_rel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::pauli;

    #[test]
    fn matrix_round_trip() {
        let m = pauli::y::<f64>();
        let back: OperatorMatrix<f64> = matrix_from_json(&matrix_to_json(&m)).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn ragged_and_non_square_are_rejected() {
        let ragged = json!({"dim": 2, "entries": [[[1, 0], [0, 0]], [[0, 0]]]});
        assert!(matches!(matrix_from_json::<f64>(&ragged), Err(Error::Parse(_))));
        let rows = json!({"dim": 2, "entries": [[[1, 0], [0, 0]]]});
        assert!(matrix_from_json::<f64>(&rows).is_err());
        let bad = json!({"dim": 1, "entries": [[[1, 0, 3]]]});
        assert!(matrix_from_json::<f64>(&bad).is_err());
    }

    #[test]
    fn descriptor_round_trip() {
        let descs: Vec<AlgebraDescriptor<f64>> = vec![
            AlgebraDescriptor::Factor { d_a: 2, d_b: 3, side: Side::B },
            AlgebraDescriptor::Diagonal { d: 4 },
            AlgebraDescriptor::GroupZ2 { d: 2 },
            AlgebraDescriptor::SymmetricSwap { d: 2 },
            AlgebraDescriptor::Loschmidt { psi: DVector::from_vec(vec![Complex::new(0.6, 0.0), Complex::new(0.0, 0.8)]) },
            AlgebraDescriptor::Generators(vec![pauli::z::<f64>()]),
        ];
        for d in descs {
            let back: AlgebraDescriptor<f64> = descriptor_from_json(&descriptor_to_json(&d)).unwrap();
            assert_eq!(d, back);
        }
        assert!(descriptor_from_json::<f64>(&json!({"kind": "nope"})).is_err());
        assert!(descriptor_from_json::<f64>(&json!({"kind": "diagonal", "params": {}})).is_err());
    }

    #[test]
    fn hamiltonian_forms() {
        let h = hamiltonian_from_json::<f64>(&json!({"gue": 3, "seed": 4}), 1e-9).unwrap();
        assert_eq!(h.dim(), 3);
        let e = json!({
            "eigenvalues": [1.0, 0.0],
            "eigenvectors": {"dim": 2, "entries": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}
        });
        let m = hamiltonian_from_json::<f64>(&e, 1e-9).unwrap();
        assert_eq!(m.eigenvalues, vec![0.0, 1.0]);
        let full = matrix_to_json(&pauli::x::<f64>());
        let m = hamiltonian_from_json::<f64>(&full, 1e-9).unwrap();
        assert!((m.eigenvalues[0] + 1.0).abs() < 1e-12);
    }
}
