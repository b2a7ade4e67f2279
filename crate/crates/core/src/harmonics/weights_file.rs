//! JSON weights file:
//!
//! ```text
//! { "domain": {"kind": "oblate", "e": .., "zeta0": ..},
//!   "n_max": N, "frame": {"center": [..], "rotation": [[..], ..]},
//!   "rows": [{"n": 0, "m": 0, "re_x": .., "im_x": .., "re_y": .., ..}, ..] }
//! ```
//!
//! Rows are n-major with m ascending from −n. Floats use the shortest
//! representation that parses back to the identical double.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{beta, row_degree_order, FourierWeights};
use crate::error::{Error, Result};
use crate::spheroidal::{Frame, SpheroidDomain};

#[derive(Serialize, Deserialize)]
struct WeightsDocument {
    domain: SpheroidDomain,
    n_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frame: Option<Frame>,
    rows: Vec<Row>,
}

#[derive(Serialize, Deserialize)]
struct Row {
    n: usize,
    m: i64,
    re_x: f64,
    im_x: f64,
    re_y: f64,
    im_y: f64,
    re_z: f64,
    im_z: f64,
}

pub fn weights_to_json(weights: &FourierWeights) -> String {
    let rows = weights
        .rows()
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let (n, m) = row_degree_order(k);
            Row {
                n,
                m,
                re_x: w[0].re,
                im_x: w[0].im,
                re_y: w[1].re,
                im_y: w[1].im,
                re_z: w[2].re,
                im_z: w[2].im,
            }
        })
        .collect();
    let doc = WeightsDocument {
        domain: *weights.domain(),
        n_max: weights.n_max(),
        frame: (weights.frame != Frame::identity()).then_some(weights.frame),
        rows,
    };
    serde_json::to_string_pretty(&doc).expect("weights serialize")
}

pub fn weights_from_json(text: &str) -> Result<FourierWeights> {
    let doc: WeightsDocument = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: Some(e.line()),
        message: e.to_string(),
    })?;
    let domain = SpheroidDomain::new(doc.domain.kind, doc.domain.e, doc.domain.zeta0).map_err(|e| Error::Parse {
        line: None,
        message: e.to_string(),
    })?;
    if doc.rows.len() != beta(doc.n_max) {
        return Err(Error::Parse {
            line: None,
            message: format!(
                "{} rows for n_max = {} (expected {})",
                doc.rows.len(),
                doc.n_max,
                beta(doc.n_max)
            ),
        });
    }
    let mut q = Vec::with_capacity(doc.rows.len());
    for (k, r) in doc.rows.iter().enumerate() {
        if row_degree_order(k) != (r.n, r.m) {
            return Err(Error::Parse {
                line: None,
                message: format!("row {k} is (n={}, m={}), expected {:?}", r.n, r.m, row_degree_order(k)),
            });
        }
        q.push([
            Complex64::new(r.re_x, r.im_x),
            Complex64::new(r.re_y, r.im_y),
            Complex64::new(r.re_z, r.im_z),
        ]);
    }
    let mut w = FourierWeights::new(domain, doc.n_max, q).map_err(|e| Error::Parse {
        line: None,
        message: e.to_string(),
    })?;
    w.frame = doc.frame.unwrap_or_else(Frame::identity);
    Ok(w)
}

pub fn save_weights(weights: &FourierWeights, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, weights_to_json(weights)).map_err(|e| Error::io(path, e))
}

pub fn load_weights(path: impl AsRef<Path>) -> Result<FourierWeights> {
    let path = path.as_ref();
    weights_from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}
