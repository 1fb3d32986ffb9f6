//! Line-oriented graph interchange format:
//!
//! ```text
//! n m
//! u v length      (m lines)
//! c_0 c_1 ... c_{n-1}   (optional capacity line)
//! ```
//!
//! Lengths are written with 17 significant digits so that a round trip is
//! exact. Blank lines and lines starting with `#` are ignored.

use super::graph::{Edge, WeightedGraph};
use crate::error::{Error, Result};

/// Shortest scientific rendering with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_graph(g: &WeightedGraph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.edges().len());
    for e in g.edges() {
        out.push_str(&format!("{} {} {}\n", e.u, e.v, format_float(e.length)));
    }
    if !g.unit_capacities() {
        let caps: Vec<String> = g.capacities().iter().map(|c| c.to_string()).collect();
        out.push_str(&caps.join(" "));
        out.push('\n');
    }
    out
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn parse_graph(text: &str) -> Result<WeightedGraph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 2 {
        return Err(parse_err(ln, "header must be `n m`"));
    }
    let n: usize = head[0].parse().map_err(|_| parse_err(ln, "bad vertex count"))?;
    let m: usize = head[1].parse().map_err(|_| parse_err(ln, "bad edge count"))?;
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, line) = lines.next().ok_or_else(|| parse_err(ln, "fewer edge lines than declared"))?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(parse_err(ln, "edge line must be `u v length`"));
        }
        let u = f[0].parse().map_err(|_| parse_err(ln, "bad endpoint"))?;
        let v = f[1].parse().map_err(|_| parse_err(ln, "bad endpoint"))?;
        let length = f[2].parse().map_err(|_| parse_err(ln, "bad length"))?;
        edges.push(Edge { u, v, length });
    }
    let caps = match lines.next() {
        Some((ln, line)) => {
            let caps = line
                .split_whitespace()
                .map(|c| c.parse::<u32>().map_err(|_| parse_err(ln, "bad capacity")))
                .collect::<Result<Vec<u32>>>()?;
            if let Some((ln, _)) = lines.next() {
                return Err(parse_err(ln, "trailing content"));
            }
            caps
        }
        None => vec![1; n],
    };
    WeightedGraph::with_capacities(n, edges, caps)
}
