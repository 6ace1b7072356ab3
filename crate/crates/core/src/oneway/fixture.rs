use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{OneWayProtocol, RelationTable};
use crate::error::{Error, Result};
use crate::hilbert::linalg::{c64, ComplexMatrix, ComplexVector};
use crate::hilbert::MatrixRepr;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub struct FixtureDims {
    pub ea: usize,
    pub eb: usize,
    pub m: usize,
    /// Answer register dimension; defaults to one more than the largest answer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<usize>,
}

/// On-disk form of a protocol and its relation. Complex numbers are [re, im].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolFixture {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dims: FixtureDims,
    pub shared_state: Vec<[f64; 2]>,
    #[serde(rename = "U")]
    pub u: BTreeMap<String, MatrixRepr>,
    #[serde(rename = "V")]
    pub v: BTreeMap<String, MatrixRepr>,
    pub relation: Vec<[usize; 3]>,
    /// Keys are "x,y".
    pub mu: BTreeMap<String, f64>,
}

fn indexed(map: &BTreeMap<String, MatrixRepr>, what: &str) -> Result<Vec<ComplexMatrix>> {
    let mut out: Vec<Option<ComplexMatrix>> = vec![None; map.len()];
    for (key, m) in map {
        let i: usize = key
            .trim()
            .parse()
            .map_err(|_| Error::Fixture(format!("{what} key `{key}` is not an index")))?;
        if i >= out.len() || out[i].is_some() {
            return Err(Error::Fixture(format!("{what} keys must be 0..{}", map.len())));
        }
        out[i] = Some(m.to_matrix()?);
    }
    Ok(out.into_iter().map(|m| m.expect("all indices filled")).collect())
}

impl ProtocolFixture {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn build(&self) -> Result<(OneWayProtocol, RelationTable)> {
        let shared = ComplexVector::from_iterator(
            self.shared_state.len(),
            self.shared_state.iter().map(|&[re, im]| c64(re, im)),
        );
        let u = indexed(&self.u, "U")?;
        let v = indexed(&self.v, "V")?;
        let max_z = self.relation.iter().map(|r| r[2]).max().unwrap_or(0);
        let z_dim = self.dims.z.unwrap_or(max_z + 1);
        let protocol = OneWayProtocol::new(self.dims.ea, self.dims.eb, self.dims.m, z_dim, shared, u, v)?;
        let mut mu = BTreeMap::new();
        for (key, &p) in &self.mu {
            let parts: Vec<&str> = key.split(',').collect();
            let parse = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Fixture(format!("mu key `{key}` is not `x,y`")))
            };
            if parts.len() != 2 {
                return Err(Error::Fixture(format!("mu key `{key}` is not `x,y`")));
            }
            mu.insert((parse(parts[0])?, parse(parts[1])?), p);
        }
        let rel = RelationTable::new(self.relation.iter().map(|r| (r[0], r[1], r[2])).collect(), mu)?;
        protocol.check_relation(&rel)?;
        Ok((protocol, rel))
    }
}

fn repr(m: &ComplexMatrix) -> MatrixRepr {
    MatrixRepr::from(m)
}

fn real(rows: usize, cols: usize, v: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(rows, cols, &v.iter().map(|&x| c64(x, 0.0)).collect::<Vec<_>>())
}

fn uniform_mu(xs: usize, ys: usize) -> BTreeMap<String, f64> {
    let p = 1.0 / (xs * ys) as f64;
    (0..xs)
        .flat_map(|x| (0..ys).map(move |y| (format!("{x},{y}"), p)))
        .collect()
}

/// Equality on one bit: Alice sends x, Bob outputs [x = y].
pub fn equality() -> ProtocolFixture {
    let id = real(2, 2, &[1.0, 0.0, 0.0, 1.0]);
    let x = real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    ProtocolFixture {
        name: Some("equality".into()),
        dims: FixtureDims { ea: 2, eb: 1, m: 2, z: Some(2) },
        shared_state: vec![[1.0, 0.0], [0.0, 0.0]],
        u: [("0".into(), repr(&id)), ("1".into(), repr(&x))].into(),
        v: [("0".into(), repr(&x)), ("1".into(), repr(&id))].into(),
        relation: (0..2)
            .flat_map(|x| (0..2).map(move |y| [x, y, usize::from(x == y)]))
            .collect(),
        mu: uniform_mu(2, 2),
    }
}

/// Index function on two bits through the 2 → 1 quantum random access code.
pub fn index_qrac() -> ProtocolFixture {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut u = BTreeMap::new();
    for x in 0..4usize {
        let (x0, x1) = (x & 1, (x >> 1) & 1);
        let phi = f64::atan2(if x1 == 0 { 1.0 } else { -1.0 }, if x0 == 0 { 1.0 } else { -1.0 });
        let e = c64(phi.cos(), phi.sin());
        // columns |ψ_x⟩ = (|0⟩ + e^{iφ}|1⟩)/√2 and its orthogonal complement
        let m = ComplexMatrix::from_row_slice(2, 2, &[c64(s, 0.0), c64(s, 0.0), e * s, -e * s]);
        u.insert(x.to_string(), repr(&m));
    }
    let h = real(2, 2, &[s, s, s, -s]);
    let s_dag = ComplexMatrix::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, -1.0)]);
    let v: BTreeMap<String, MatrixRepr> = [("0".into(), repr(&h)), ("1".into(), repr(&(&h * s_dag)))].into();
    ProtocolFixture {
        name: Some("index".into()),
        dims: FixtureDims { ea: 2, eb: 1, m: 2, z: Some(2) },
        shared_state: vec![[1.0, 0.0], [0.0, 0.0]],
        u,
        v,
        relation: (0..4)
            .flat_map(|x: usize| (0..2).map(move |y| [x, y, (x >> y) & 1]))
            .collect(),
        mu: uniform_mu(4, 2),
    }
}

/// Superdense coding: two bits over one qubit and a shared Bell pair.
pub fn superdense() -> ProtocolFixture {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let id = real(2, 2, &[1.0, 0.0, 0.0, 1.0]);
    let x = real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let z = real(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    let paulis = [id.clone(), x.clone(), z.clone(), &x * &z];
    let cnot = real(4, 4, &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.]);
    let h = real(2, 2, &[s, s, s, -s]);
    let bell = crate::hilbert::linalg::kron(&h, &id) * cnot;
    ProtocolFixture {
        name: Some("superdense".into()),
        dims: FixtureDims { ea: 2, eb: 2, m: 2, z: Some(4) },
        shared_state: vec![[s, 0.0], [0.0, 0.0], [0.0, 0.0], [s, 0.0]],
        u: paulis.iter().enumerate().map(|(i, p)| (i.to_string(), repr(p))).collect(),
        v: [("0".into(), repr(&bell))].into(),
        relation: (0..4).map(|x| [x, 0, x]).collect(),
        mu: uniform_mu(4, 1),
    }
}

pub fn builtin(name: &str) -> Option<ProtocolFixture> {
    match name {
        "equality" => Some(equality()),
        "index" => Some(index_qrac()),
        "superdense" => Some(superdense()),
        _ => None,
    }
}
