//! Plain-text potential files.
//!
//! ```text
//! toric-potential 1
//! kind kahler            # or: symplectic
//! dim 1
//! tau 0.25               # optional flow time
//! polytope {...}         # symplectic only, same JSON as polytope input
//! margin 0.01            # symplectic only
//! axis 5 -2 -1 0 1 2     # one line per axis: count, then samples
//! values
//! 1.2
//! ...
//! ```
//!
//! Kähler files hold `φ`; symplectic files hold the smooth part `f = u − u₀`.
//! Numbers use Rust's shortest round-trip formatting, so reading a file back
//! reproduces every sample bit for bit. Masked nodes are written as `nan`.

use std::fmt::Write as _;

use super::grid::{PolytopeGrid, RadialGrid};
use super::{KahlerPotential, PotentialError, Result, SymplecticPotential};
use crate::polytope::DelzantPolytope;

const MAGIC: &str = "toric-potential 1";

fn header(kind: &str, axes: &[Vec<f64>], tau: Option<f64>, extra: &[(&str, String)]) -> String {
    let mut s = format!("{MAGIC}\nkind {kind}\ndim {}\n", axes.len());
    if let Some(t) = tau {
        writeln!(s, "tau {t:?}").unwrap();
    }
    for (k, v) in extra {
        writeln!(s, "{k} {v}").unwrap();
    }
    for a in axes {
        write!(s, "axis {}", a.len()).unwrap();
        for v in a {
            write!(s, " {v:?}").unwrap();
        }
        s.push('\n');
    }
    s.push_str("values\n");
    s
}

fn push_values(s: &mut String, values: &[f64]) {
    for v in values {
        if v.is_nan() {
            s.push_str("nan\n");
        } else {
            writeln!(s, "{v:?}").unwrap();
        }
    }
}

pub fn write_kahler(phi: &KahlerPotential, tau: Option<f64>) -> String {
    let mut s = header("kahler", phi.grid().axes().axes(), tau, &[]);
    push_values(&mut s, phi.samples());
    s
}

/// Writes the sampled smooth part of `u` on `grid`.
pub fn write_symplectic(u: &SymplecticPotential, grid: &PolytopeGrid, tau: Option<f64>) -> Result<String> {
    let extra = [
        ("polytope", u.polytope().to_json().to_string()),
        ("margin", format!("{:?}", grid.margin())),
    ];
    let mut s = header("symplectic", grid.axes().axes(), tau, &extra);
    let f: Vec<f64> = (0..grid.len())
        .map(|i| {
            if grid.is_valid(i) {
                u.smooth().value(&grid.node(i))
            } else {
                Ok(f64::NAN)
            }
        })
        .collect::<Result<_>>()?;
    push_values(&mut s, &f);
    Ok(s)
}

struct Parsed {
    kind: String,
    tau: Option<f64>,
    polytope: Option<String>,
    margin: Option<f64>,
    axes: Vec<Vec<f64>>,
    values: Vec<f64>,
}

fn bad(msg: impl Into<String>) -> PotentialError {
    PotentialError::Format(msg.into())
}

fn num(s: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|_| bad(format!("not a number: `{s}`")))
}

fn parse(text: &str) -> Result<Parsed> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(MAGIC) {
        return Err(bad("missing header line"));
    }
    let mut p = Parsed {
        kind: String::new(),
        tau: None,
        polytope: None,
        margin: None,
        axes: Vec::new(),
        values: Vec::new(),
    };
    let mut dim = None;
    for line in lines.by_ref() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == "values" {
            break;
        }
        let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
        match key {
            "kind" => p.kind = rest.trim().to_string(),
            "dim" => dim = Some(rest.trim().parse::<usize>().map_err(|_| bad("bad dim"))?),
            "tau" => p.tau = Some(num(rest.trim())?),
            "polytope" => p.polytope = Some(rest.to_string()),
            "margin" => p.margin = Some(num(rest.trim())?),
            "axis" => {
                let mut it = rest.split_whitespace();
                let n: usize = it
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| bad("axis without count"))?;
                let a = it.map(num).collect::<Result<Vec<_>>>()?;
                if a.len() != n {
                    return Err(bad("axis count does not match samples"));
                }
                p.axes.push(a);
            }
            other => return Err(bad(format!("unknown key `{other}`"))),
        }
    }
    if dim != Some(p.axes.len()) {
        return Err(bad("dim does not match the number of axes"));
    }
    for line in lines {
        let line = line.trim();
        if !line.is_empty() {
            p.values.push(num(line)?);
        }
    }
    let expected: usize = p.axes.iter().map(Vec::len).product();
    if p.values.len() != expected {
        return Err(bad(format!("expected {expected} values, found {}", p.values.len())));
    }
    Ok(p)
}

/// Reads a Kähler potential file; the result interpolates its samples.
pub fn read_kahler(text: &str) -> Result<(KahlerPotential, Option<f64>)> {
    let p = parse(text)?;
    if p.kind != "kahler" {
        return Err(bad(format!("expected kind kahler, found `{}`", p.kind)));
    }
    let grid = RadialGrid::new(p.axes)?;
    Ok((KahlerPotential::from_samples(grid, p.values)?, p.tau))
}

pub fn read_symplectic(text: &str) -> Result<(SymplecticPotential, Option<f64>)> {
    let p = parse(text)?;
    if p.kind != "symplectic" {
        return Err(bad(format!("expected kind symplectic, found `{}`", p.kind)));
    }
    let poly = DelzantPolytope::from_json(p.polytope.as_deref().ok_or_else(|| bad("missing polytope"))?)?;
    let margin = p.margin.ok_or_else(|| bad("missing margin"))?;
    let per_axis = p.axes.first().map(Vec::len).unwrap_or(0);
    let grid = PolytopeGrid::new(&poly, per_axis, margin)?;
    if grid.axes().axes() != p.axes.as_slice() {
        return Err(bad("axes do not match the polytope grid they claim"));
    }
    Ok((SymplecticPotential::from_samples(grid, p.values)?, p.tau))
}
