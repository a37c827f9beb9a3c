//! Plain-text checkpoints of kinetic states.
//!
//! ```text
//! # apdg kinetic checkpoint
//! # n_x=4,k_x=1,n_v=8,k_v=1,epsilon=0.01,beta=1,t=0.5
//! index,x_cell,v_cell,x_node,v_node,value
//! 0,0,0,0,0,1.5e-1
//! ```
//! Rows follow the state ordering: x-cell major, then v-cell, then the
//! local `(x node, v node)` pair.

use std::path::Path;

use nalgebra::DVector;

use super::{KineticSpaces, KineticState};
use crate::error::{Error, Result};
use crate::norms::Beta;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointHeader {
    pub n_x: usize,
    pub k_x: usize,
    pub n_v: usize,
    pub k_v: usize,
    pub epsilon: f64,
    pub beta: Beta,
    pub t: f64,
}

pub fn checkpoint_string(state: &KineticState, spaces: &KineticSpaces) -> String {
    let mut out = String::from("# apdg kinetic checkpoint\n");
    out += &format!(
        "# n_x={},k_x={},n_v={},k_v={},epsilon={:e},beta={},t={:e}\n",
        spaces.x.mesh().n_cells(),
        spaces.x.degree(),
        spaces.v.mesh().n_cells(),
        spaces.v.degree(),
        state.epsilon,
        state.beta.as_int(),
        state.t
    );
    out += "index,x_cell,v_cell,x_node,v_node,value\n";
    let (kx1, kv1) = (spaces.x.local_count(), spaces.v.local_count());
    for (i, val) in state.g.iter().enumerate() {
        let (xb, vb) = spaces.split(i);
        out += &format!("{},{},{},{},{},{:e}\n", i, xb / kx1, vb / kv1, xb % kx1, vb % kv1, val);
    }
    out
}

pub fn write_checkpoint(path: &Path, state: &KineticState, spaces: &KineticSpaces) -> Result<()> {
    std::fs::write(path, checkpoint_string(state, spaces))
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

pub fn parse_checkpoint(text: &str) -> Result<(CheckpointHeader, KineticState)> {
    let mut lines = text.lines();
    if lines.next() != Some("# apdg kinetic checkpoint") {
        return Err(bad("missing magic line"));
    }
    let meta = lines.next().and_then(|l| l.strip_prefix("# ")).ok_or_else(|| bad("missing header line"))?;
    let mut fields = std::collections::BTreeMap::new();
    for kv in meta.split(',') {
        let (k, v) = kv.split_once('=').ok_or_else(|| bad(format!("bad header entry {kv:?}")))?;
        fields.insert(k, v);
    }
    let get = |k: &str| fields.get(k).copied().ok_or_else(|| bad(format!("header lacks {k}")));
    let int = |k: &str| -> Result<usize> { get(k)?.parse().map_err(|_| bad(format!("bad integer for {k}"))) };
    let real = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| bad(format!("bad real for {k}"))) };
    let beta = match get("beta")? {
        "0" => Beta::Zero,
        "1" => Beta::One,
        other => return Err(bad(format!("bad beta {other}"))),
    };
    let header = CheckpointHeader {
        n_x: int("n_x")?,
        k_x: int("k_x")?,
        n_v: int("n_v")?,
        k_v: int("k_v")?,
        epsilon: real("epsilon")?,
        beta,
        t: real("t")?,
    };
    if lines.next() != Some("index,x_cell,v_cell,x_node,v_node,value") {
        return Err(bad("missing column header"));
    }
    let n = header.n_x * (header.k_x + 1) * header.n_v * (header.k_v + 1);
    let mut g = DVector::zeros(n);
    let mut seen = 0;
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(bad(format!("row {line:?} does not have 6 columns")));
        }
        let i: usize = cols[0].parse().map_err(|_| bad("bad row index"))?;
        if i != seen || i >= n {
            return Err(bad(format!("row index {i} out of order")));
        }
        g[i] = cols[5].parse().map_err(|_| bad(format!("bad value in row {i}")))?;
        seen += 1;
    }
    if seen != n {
        return Err(bad(format!("expected {n} rows, found {seen}")));
    }
    let state = KineticState { g, epsilon: header.epsilon, beta: header.beta, t: header.t };
    Ok((header, state))
}

pub fn read_checkpoint(path: &Path) -> Result<(CheckpointHeader, KineticState)> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_checkpoint(&text)
}
