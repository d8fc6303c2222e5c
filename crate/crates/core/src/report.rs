//! Machine-readable reports: fixed CSV schemas and JSON envelopes.
//!
//! Floats are written with 17 significant digits in scientific notation so that
//! identical inputs give byte-identical files; non-finite values become empty
//! CSV cells and JSON `null`.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::error::Result;
use crate::extrinsic::{FlowTrajectory, GrowthCurve};
use crate::scalar::Real;
use crate::tone::SpectralEstimate;

pub const SCHEMA_VERSION: u32 = 1;

pub const GROWTH_HEADER: [&str; 5] = ["r", "area", "perimeter", "total_curvature", "min_grad_R"];
pub const TONE_HEADER: [&str; 7] = [
    "r",
    "lambda1_mesh",
    "lambda1_barta",
    "l_used",
    "H0",
    "v_at_tc",
    "prefactor",
];
pub const FLOW_HEADER: [&str; 6] = ["t", "u", "v", "r", "psi", "sin_beta"];
pub const GEOMETRY_HEADER: [&str; 11] = [
    "u",
    "v",
    "x",
    "y",
    "z",
    "K",
    "H_norm",
    "alpha_norm",
    "R",
    "grad_R",
    "normal_defect",
];

/// Provenance embedded in every report.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ReportMeta {
    pub config_hash: String,
    pub tolerances: BTreeMap<String, f64>,
    pub seed: u64,
}

/// 17 significant digits; empty for non-finite values.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

fn cells<T: Real>(xs: &[T]) -> Vec<String> {
    xs.iter().map(|x| fmt_float(x.as_f64())).collect()
}

fn write_rows<W: Write>(w: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_growth_csv<T: Real, W: Write>(w: W, curve: &GrowthCurve<T>) -> Result<()> {
    let rows = (0..curve.len()).map(|i| {
        cells(&[
            curve.radii[i],
            curve.area[i],
            curve.perimeter[i],
            curve.curvature_integral[i],
            curve.min_grad_r_outside[i],
        ])
    });
    write_rows(w, &GROWTH_HEADER, rows)
}

pub fn write_tone_csv<T: Real, W: Write>(w: W, estimates: &[SpectralEstimate<T>]) -> Result<()> {
    let rows = estimates.iter().map(|e| {
        let mut row = cells(&[e.r, e.lambda1_mesh, e.lambda1_barta]);
        row.push(e.l_used.to_string());
        row.extend(cells(&[e.h0, e.v_at_tc, e.prefactor]));
        row
    });
    write_rows(w, &TONE_HEADER, rows)
}

pub fn write_flow_csv<T: Real, W: Write>(w: W, traj: &FlowTrajectory<T>) -> Result<()> {
    let rows = traj
        .samples
        .iter()
        .map(|s| cells(&[s.t, s.u, s.v, s.r, s.psi, s.sin_beta]));
    write_rows(w, &FLOW_HEADER, rows)
}

/// One row of the pointwise geometry table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GeometryRow<T> {
    pub u: T,
    pub v: T,
    pub position: [T; 3],
    pub k: T,
    pub h_norm: T,
    pub alpha_norm: T,
    pub r: T,
    pub grad_r: T,
    pub normal_defect: T,
}

pub fn write_geometry_csv<T: Real, W: Write>(w: W, rows: &[GeometryRow<T>]) -> Result<()> {
    let rows = rows.iter().map(|g| {
        cells(&[
            g.u,
            g.v,
            g.position[0],
            g.position[1],
            g.position[2],
            g.k,
            g.h_norm,
            g.alpha_norm,
            g.r,
            g.grad_r,
            g.normal_defect,
        ])
    });
    write_rows(w, &GEOMETRY_HEADER, rows)
}

/// Rewrites every non-integer number with 17 significant digits.
fn fix_floats(v: Value) -> Value {
    match v {
        Value::Number(n) => {
            let text = n.to_string();
            if text.contains(['.', 'e', 'E']) {
                match n.as_f64() {
                    Some(x) if x.is_finite() => Value::Number(fmt_float(x).parse::<Number>().unwrap_or(n)),
                    _ => Value::Null,
                }
            } else {
                Value::Number(n)
            }
        }
        Value::Array(a) => Value::Array(a.into_iter().map(fix_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, fix_floats(v))).collect()),
        other => other,
    }
}

/// JSON value of `body` with normalised floats.
pub fn to_value<S: Serialize>(body: &S) -> Result<Value> {
    Ok(fix_floats(serde_json::to_value(body)?))
}

/// `{schema_version, kind, meta, report}` as pretty-printed JSON.
pub fn json_report<S: Serialize>(kind: &str, meta: &ReportMeta, body: &S) -> Result<String> {
    let mut root = Map::new();
    root.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    root.insert("kind".into(), Value::from(kind));
    root.insert("meta".into(), to_value(meta)?);
    root.insert("report".into(), to_value(body)?);
    let mut s = serde_json::to_string_pretty(&Value::Object(root))?;
    s.push('\n');
    Ok(s)
}


#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn floats_round_trip(x in any::<f64>()) {
            let s = fmt_float(x);
            if x.is_finite() {
                prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
            } else {
                prop_assert!(s.is_empty());
            }
        }
    }
}
