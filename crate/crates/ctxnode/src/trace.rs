//! Trace, summary and VoI-curve output.
//!
//! Numbers are written with 9 significant digits in the shortest of fixed
//! or exponent notation, like C's `%.9g`, so identical traces always give
//! identical bytes.

use std::fs;
use std::path::Path;

use ctxnode_core::sim::{NodeState, TraceRecord, TraceSummary};
use ctxnode_core::voi::{self, VoiParams};

use crate::error::{csv_error, Error, Result};
use crate::timeseries::{format_timestamp, parse_timestamp};

pub const TRACE_HEADER: &str = "timestamp,x,f_s,f_t,z,soe,voi,utility,state";
pub const VOI_CURVE_HEADER: &str = "timestamp,x,vc_a,voi_a,vc_b,voi_b";

const SIG_DIGITS: i32 = 9;

/// `x` with 9 significant digits, trailing zeros removed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (SIG_DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..SIG_DIGITS).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (SIG_DIGITS - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Trace CSV text.
pub fn format_trace(trace: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(80 * (trace.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in trace {
        let nums = [r.x, r.f_s, r.f_t, r.z, r.soe, r.voi, r.utility].map(format_sig);
        out.push_str(&format_timestamp(r.timestamp));
        for n in &nums {
            out.push(',');
            out.push_str(n);
        }
        out.push(',');
        out.push_str(r.state.as_str());
        out.push('\n');
    }
    out
}

pub fn write_trace(trace: &[TraceRecord], path: &Path) -> Result<()> {
    fs::write(path, format_trace(trace)).map_err(|e| Error::io(path, e))
}

/// One parsed trace row.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub timestamp: i64,
    pub x: f64,
    pub f_s: f64,
    pub f_t: f64,
    pub z: f64,
    pub soe: f64,
    pub voi: f64,
    pub utility: f64,
    pub state: NodeState,
}

#[derive(serde::Deserialize)]
struct RawRow {
    timestamp: String,
    x: f64,
    f_s: f64,
    f_t: f64,
    z: f64,
    soe: f64,
    voi: f64,
    utility: f64,
    state: String,
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?;
    if headers.iter().collect::<Vec<_>>().join(",") != TRACE_HEADER {
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            message: format!("expected header {TRACE_HEADER}"),
        });
    }
    let mut rows = Vec::new();
    for raw in reader.deserialize::<RawRow>() {
        let raw = raw.map_err(|e| csv_error(path, e))?;
        let line = rows.len() as u64 + 2;
        let bad = |message: String| Error::Parse {
            path: path.into(),
            line,
            message,
        };
        let timestamp = parse_timestamp(&raw.timestamp).ok_or_else(|| bad(format!("invalid timestamp {:?}", raw.timestamp)))?;
        let state = match raw.state.as_str() {
            "active" => NodeState::Active,
            "depleted" => NodeState::Depleted,
            other => return Err(bad(format!("unknown state {other:?}"))),
        };
        rows.push(TraceRow {
            timestamp,
            x: raw.x,
            f_s: raw.f_s,
            f_t: raw.f_t,
            z: raw.z,
            soe: raw.soe,
            voi: raw.voi,
            utility: raw.utility,
            state,
        });
    }
    Ok(rows)
}

/// Summary lines in a fixed order, one `key: value` per line.
pub fn format_summary(s: &TraceSummary) -> String {
    format!(
        "windows: {}\ncumulative_voi: {}\nterminal_soe: {}\ndepleted_windows: {}\nmean_f_s: {}\nmean_f_t: {}\n",
        s.windows,
        format_sig(s.cumulative_voi),
        format_sig(s.terminal_soe),
        s.depleted_window_count,
        format_sig(s.mean_f_s),
        format_sig(s.mean_f_t),
    )
}

pub const SUMMARY_TABLE_HEADER: &str = "param,value,windows,cumulative_voi,terminal_soe,depleted_windows,mean_f_s,mean_f_t";

/// One row of a sweep table.
pub fn format_summary_row(param: &str, value: f64, s: &TraceSummary) -> String {
    format!(
        "{param},{},{},{},{},{},{},{}",
        format_sig(value),
        s.windows,
        format_sig(s.cumulative_voi),
        format_sig(s.terminal_soe),
        s.depleted_window_count,
        format_sig(s.mean_f_s),
        format_sig(s.mean_f_t),
    )
}

/// VoI of two planners at fixed frequencies along a level series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoiCurveRow {
    pub timestamp: i64,
    pub x: f64,
    pub vc_a: f64,
    pub voi_a: f64,
    pub vc_b: f64,
    pub voi_b: f64,
}

pub fn emit_voi_curve(
    a: &VoiParams,
    b: &VoiParams,
    levels: &[(i64, f64)],
    f_s: f64,
    f_t: f64,
) -> Result<Vec<VoiCurveRow>> {
    a.validate().map_err(Error::model("planner a"))?;
    b.validate().map_err(Error::model("planner b"))?;
    levels
        .iter()
        .map(|&(timestamp, x)| {
            let ba = voi::breakdown(x, f_s, f_t, a).map_err(Error::model("planner a"))?;
            let bb = voi::breakdown(x, f_s, f_t, b).map_err(Error::model("planner b"))?;
            Ok(VoiCurveRow {
                timestamp,
                x,
                vc_a: ba.v_c,
                voi_a: ba.v_i,
                vc_b: bb.v_c,
                voi_b: bb.v_i,
            })
        })
        .collect()
}

pub fn format_voi_curve(rows: &[VoiCurveRow]) -> String {
    let mut out = String::from(VOI_CURVE_HEADER);
    out.push('\n');
    for r in rows {
        let nums = [r.x, r.vc_a, r.voi_a, r.vc_b, r.voi_b].map(format_sig);
        out.push_str(&format!("{},{}\n", format_timestamp(r.timestamp), nums.join(",")));
    }
    out
}
