//! Plain-text forms of [`IsingGraph`], [`GridIsing`] and Z reports.
//!
//! ```text
//! ising-graph
//! prefactor <log_magnitude> <phase>
//! vertex <id> <real_part> <quarter_turns> <residual_imag> [pinned <±1>]
//! edge <u> <v>
//! ```
//!
//! Grids use `ising-grid <width> <height>` and one `cell <x> <y> ...` line per
//! site in row-major order. Floats are written in shortest round-trip form,
//! so parse(render(x)) == x bit for bit. `#` starts a comment.

use crate::error::{Error, Result};
use crate::eval::Method;
use crate::field::{ComplexField, Prefactor};
use crate::graph::{IsingGraph, VId};
use crate::grid::GridIsing;
use num_complex::Complex64;
use std::fmt::Write as _;

fn syntax(line: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { line, col: 1, msg: msg.into() }
}

fn field_text(h: &ComplexField) -> String {
    format!("{:?} {} {:?}", h.real_part, h.quarter_turns, h.residual_imag)
}

fn pin_text(p: Option<i8>) -> String {
    match p {
        Some(s) => format!(" pinned {s:+}"),
        None => String::new(),
    }
}

pub fn render_prefactor(p: &Prefactor) -> String {
    format!("prefactor {:?} {:?}", p.log_magnitude, p.phase)
}

pub fn render_graph(g: &IsingGraph, p: &Prefactor) -> String {
    let mut s = String::from("ising-graph\n");
    let _ = writeln!(s, "{}", render_prefactor(p));
    for (v, vx) in g.vertices() {
        let _ = writeln!(s, "vertex {v} {}{}", field_text(&vx.field), pin_text(vx.pinned));
    }
    for (a, b) in g.edges() {
        let _ = writeln!(s, "edge {a} {b}");
    }
    s
}

pub fn render_grid(g: &GridIsing) -> String {
    let mut s = format!("ising-grid {} {}\n", g.width, g.height);
    let _ = writeln!(s, "{}", render_prefactor(&g.prefactor));
    for y in 0..g.height {
        for x in 0..g.width {
            let _ = writeln!(s, "cell {x} {y} {}{}", field_text(&g.field(x, y)), pin_text(g.pinned(x, y)));
        }
    }
    s
}

/// `<id> <origin>` per vertex with a nonempty origin.
pub fn render_provenance(g: &IsingGraph) -> String {
    let mut s = String::new();
    for (v, vx) in g.vertices() {
        if !vx.origin.is_empty() {
            let _ = writeln!(s, "{v} {}", vx.origin);
        }
    }
    s
}

pub fn apply_provenance(g: &mut IsingGraph, text: &str) -> Result<()> {
    for (i, line) in lines(text) {
        let (id, origin) = line.split_once(char::is_whitespace).ok_or_else(|| syntax(i, "expected `<id> <origin>`"))?;
        let v: VId = id.parse().map_err(|_| syntax(i, format!("bad vertex id {id:?}")))?;
        if !g.contains(v) {
            return Err(Error::MalformedGraph(format!("provenance for unknown vertex {v}")));
        }
        g.set_origin(v, origin.trim());
    }
    Ok(())
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

struct Words<'a> {
    line: usize,
    it: std::str::SplitWhitespace<'a>,
}

impl<'a> Words<'a> {
    fn next<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let w = self.it.next().ok_or_else(|| syntax(self.line, format!("missing {what}")))?;
        w.parse().map_err(|_| syntax(self.line, format!("bad {what} {w:?}")))
    }

    fn field(&mut self) -> Result<ComplexField> {
        Ok(ComplexField::new(self.next("real part")?, self.next("quarter turns")?, self.next("residual")?))
    }

    fn pin(&mut self) -> Result<Option<i8>> {
        match self.it.next() {
            None => Ok(None),
            Some("pinned") => {
                let s: i8 = self.next("pinned value")?;
                if s != 1 && s != -1 {
                    return Err(syntax(self.line, format!("pinned value {s}")));
                }
                Ok(Some(s))
            }
            Some(w) => Err(syntax(self.line, format!("unexpected {w:?}"))),
        }
    }

    fn end(&mut self) -> Result<()> {
        match self.it.next() {
            None => Ok(()),
            Some(w) => Err(syntax(self.line, format!("unexpected {w:?}"))),
        }
    }
}

fn words(line: usize, l: &str) -> Words<'_> {
    Words { line, it: l.split_whitespace() }
}

fn parse_prefactor(w: &mut Words) -> Result<Prefactor> {
    let p = Prefactor::new(w.next("log magnitude")?, w.next("phase")?);
    w.end()?;
    Ok(p)
}

pub fn parse_graph(text: &str) -> Result<(IsingGraph, Prefactor)> {
    let mut it = lines(text);
    match it.next() {
        Some((_, "ising-graph")) => {}
        Some((i, _)) => return Err(syntax(i, "expected header `ising-graph`")),
        None => return Err(syntax(1, "empty input")),
    }
    let mut p = Prefactor::ONE;
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    for (i, l) in it {
        let mut w = words(i, l);
        match w.it.next() {
            Some("prefactor") => p = parse_prefactor(&mut w)?,
            Some("vertex") => {
                let id: VId = w.next("vertex id")?;
                let h = w.field()?;
                let pin = w.pin()?;
                w.end()?;
                vertices.push((id, h, pin));
            }
            Some("edge") => {
                let e: (VId, VId) = (w.next("edge end")?, w.next("edge end")?);
                w.end()?;
                edges.push(e);
            }
            Some(k) => return Err(syntax(i, format!("unknown record {k:?}"))),
            None => unreachable!(),
        }
    }
    Ok((IsingGraph::from_parts(vertices, edges)?, p))
}

pub fn parse_grid(text: &str) -> Result<GridIsing> {
    let mut it = lines(text);
    let (i, head) = it.next().ok_or_else(|| syntax(1, "empty input"))?;
    let mut w = words(i, head);
    if w.it.next() != Some("ising-grid") {
        return Err(syntax(i, "expected header `ising-grid <width> <height>`"));
    }
    let (width, height): (usize, usize) = (w.next("width")?, w.next("height")?);
    w.end()?;
    if width.checked_mul(height).map_or(true, |n| n > 1 << 24) {
        return Err(Error::SizeOverflow(format!("grid {width}x{height}")));
    }
    let mut g = GridIsing::new(width, height);
    let mut seen = vec![false; width * height];
    for (i, l) in it {
        let mut w = words(i, l);
        match w.it.next() {
            Some("prefactor") => g.prefactor = parse_prefactor(&mut w)?,
            Some("cell") => {
                let (x, y): (usize, usize) = (w.next("x")?, w.next("y")?);
                if x >= width || y >= height {
                    return Err(syntax(i, format!("cell ({x}, {y}) outside the grid")));
                }
                if std::mem::replace(&mut seen[g.idx(x, y)], true) {
                    return Err(syntax(i, format!("cell ({x}, {y}) given twice")));
                }
                let h = w.field()?;
                let pin = w.pin()?;
                w.end()?;
                g.set_field(x, y, h);
                g.set_pinned(x, y, pin);
            }
            Some(k) => return Err(syntax(i, format!("unknown record {k:?}"))),
            None => unreachable!(),
        }
    }
    Ok(g)
}

/// The text form `re im n method ms`, read back.
#[derive(Clone, Debug, PartialEq)]
pub struct ZLine {
    pub value: Complex64,
    pub n_configs: u128,
    pub method: Method,
    pub millis: u128,
}

pub fn parse_z_line(line: &str) -> Result<ZLine> {
    let mut w = words(1, line.trim());
    let value = Complex64::new(w.next("real part")?, w.next("imaginary part")?);
    let n_configs = w.next("configuration count")?;
    let method = match w.it.next() {
        Some("brute") => Method::Brute,
        Some("constrained") => Method::Constrained,
        Some("transfer") => Method::Transfer,
        other => return Err(syntax(1, format!("bad method {other:?}"))),
    };
    let millis = w.next("milliseconds")?;
    w.end()?;
    Ok(ZLine { value, n_configs, method, millis })
}
