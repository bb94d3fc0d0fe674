//! Plain-text form used by fixtures and debug dumps.
//!
//! ```text
//! bottom
//! pl[-16; 0:0; -8]          left slope; vertices x:y; right slope
//! cpl[8:3, 16:3]            concave vertices x:y
//! ```

use std::fmt;

use crate::error::{Error, Result};
use crate::pl::concave::ConcavePl;
use crate::pl::function::PlFunction;
use crate::scalar::Scalar;

fn write_points<S: Scalar>(f: &mut fmt::Formatter<'_>, pts: &[(S, S)]) -> fmt::Result {
    for (i, (x, y)) in pts.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{x}:{y}")?;
    }
    Ok(())
}

impl<S: Scalar> fmt::Display for PlFunction<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlFunction::Bottom => write!(f, "bottom"),
            PlFunction::Finite(p) => {
                write!(f, "pl[{}; ", p.left_slope())?;
                write_points(f, p.points())?;
                write!(f, "; {}]", p.right_slope())
            }
        }
    }
}

impl<S: Scalar> fmt::Display for ConcavePl<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_bottom() {
            return write!(f, "bottom");
        }
        write!(f, "cpl[")?;
        write_points(f, self.vertices())?;
        write!(f, "]")
    }
}

fn bad(message: impl Into<String>) -> Error {
    Error::Parse {
        line: 1,
        column: 1,
        message: message.into(),
    }
}

fn scalar<S: Scalar>(text: &str) -> Result<S> {
    S::parse_literal(text).ok_or_else(|| bad(format!("bad number `{}`", text.trim())))
}

fn points<S: Scalar>(text: &str) -> Result<Vec<(S, S)>> {
    text.split(',')
        .map(|item| {
            let (x, y) = item
                .split_once(':')
                .ok_or_else(|| bad(format!("expected x:y, got `{}`", item.trim())))?;
            Ok((scalar(x)?, scalar(y)?))
        })
        .collect()
}

fn bracketed<'a>(text: &'a str, tag: &str) -> Result<&'a str> {
    text.trim()
        .strip_prefix(tag)
        .and_then(|rest| rest.strip_prefix('['))
        .and_then(|rest| rest.strip_suffix(']'))
        .ok_or_else(|| bad(format!("expected {tag}[...]")))
}

pub fn parse_pl<S: Scalar>(text: &str) -> Result<PlFunction<S>> {
    if text.trim() == "bottom" {
        return Ok(PlFunction::Bottom);
    }
    let body = bracketed(text, "pl")?;
    let parts: Vec<&str> = body.split(';').collect();
    let [left, pts, right] = parts.as_slice() else {
        return Err(bad("expected `left; points; right`"));
    };
    PlFunction::from_parts(points(pts)?, scalar(left)?, scalar(right)?)
}

pub fn parse_concave<S: Scalar>(text: &str) -> Result<ConcavePl<S>> {
    if text.trim() == "bottom" {
        return Ok(ConcavePl::bottom());
    }
    ConcavePl::from_vertices(points(bracketed(text, "cpl")?)?)
}
