//! Text format for models, and generators for the standard lattices.
//!
//! ```text
//! model tri
//! site a spin; site b spin
//! term {a b} 0.5
//! term {a} 1*i*pi/4
//! site p potts3; site q potts3
//! term delta {p q} 0.7+0.1i
//! ```
//!
//! A coupling is a sum of parts: a real decimal, an imaginary decimal with a
//! trailing `i`, or an exact `k*i*pi/4`. Exact parts land in `quarter_turns`,
//! so a rendered model parses back to the identical value.

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::model::{SiteKind, SpinModel};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { line, col, msg: msg.into() }
}

fn parse_coupling(s: &str, line: usize, col: usize) -> Result<ComplexField> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(syntax(line, col, "missing coupling"));
    }
    // split into signed parts, keeping exponent signs attached
    let bytes = compact.as_bytes();
    let mut parts = Vec::new();
    let mut start = 0;
    for i in 1..bytes.len() {
        let c = bytes[i];
        if (c == b'+' || c == b'-') && !matches!(bytes[i - 1], b'e' | b'E' | b'*' | b'/') {
            parts.push(&compact[start..i]);
            start = i;
        }
    }
    parts.push(&compact[start..]);
    let mut h = ComplexField::ZERO;
    for p in parts {
        let bad = || syntax(line, col, format!("bad coupling literal `{s}`"));
        if let Some(k) = p.strip_suffix("*i*pi/4") {
            let k = k.strip_prefix('+').unwrap_or(k);
            let k: i64 = if k.is_empty() || k == "-" {
                if k == "-" {
                    -1
                } else {
                    1
                }
            } else {
                k.parse().map_err(|_| bad())?
            };
            h.quarter_turns += k;
        } else if let Some(x) = p.strip_suffix('i') {
            let x = x.strip_prefix('+').unwrap_or(x);
            let v: f64 = match x {
                "" => 1.0,
                "-" => -1.0,
                _ => x.parse().map_err(|_| bad())?,
            };
            h.residual_imag += v;
        } else {
            let x = p.strip_prefix('+').unwrap_or(p);
            let v: f64 = x.parse().map_err(|_| bad())?;
            if !v.is_finite() {
                return Err(bad());
            }
            h.real_part += v;
        }
    }
    Ok(h)
}

pub fn render_coupling(h: &ComplexField) -> String {
    let mut parts = Vec::new();
    if h.real_part != 0.0 || (h.quarter_turns == 0 && h.residual_imag == 0.0) {
        parts.push(format!("{:?}", h.real_part));
    }
    if h.quarter_turns != 0 {
        parts.push(format!("{}*i*pi/4", h.quarter_turns));
    }
    if h.residual_imag != 0.0 {
        parts.push(format!("{:?}i", h.residual_imag));
    }
    let mut out = String::new();
    for (k, p) in parts.iter().enumerate() {
        if k > 0 && !p.starts_with('-') {
            out.push('+');
        }
        out.push_str(p);
    }
    out
}

fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || matches!(c, '_' | '.' | ':' | '-'))
}

/// Parses and validates a model.
pub fn parse_model(text: &str) -> Result<SpinModel> {
    let mut m = SpinModel::new("model");
    let mut ids: BTreeMap<String, usize> = BTreeMap::new();
    let mut seen_terms = BTreeSet::new();
    let mut statements = 0;
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let body = raw.split('#').next().unwrap();
        let mut offset = 0;
        for stmt in body.split(';') {
            let col0 = offset + 1 + stmt.len() - stmt.trim_start().len();
            offset += stmt.len() + 1;
            let st = stmt.trim();
            if st.is_empty() {
                continue;
            }
            statements += 1;
            let (kw, rest) = st.split_once(char::is_whitespace).unwrap_or((st, ""));
            let rest = rest.trim();
            let rest_col = col0 + st.len() - rest.len();
            match kw {
                "model" => {
                    if !is_ident(rest) {
                        return Err(syntax(line, rest_col, "expected model name"));
                    }
                    m.name = rest.to_string();
                }
                "site" => {
                    let toks: Vec<&str> = rest.split_whitespace().collect();
                    if toks.len() != 2 {
                        return Err(syntax(line, rest_col, "expected `site <id> (spin|potts3|potts4)`"));
                    }
                    if !is_ident(toks[0]) {
                        return Err(syntax(line, rest_col, format!("bad site id `{}`", toks[0])));
                    }
                    let kind = match toks[1] {
                        "spin" => SiteKind::Spin,
                        "potts3" => SiteKind::Potts3,
                        "potts4" => SiteKind::Potts4,
                        other => {
                            let c = rest_col + rest.find(other).unwrap_or(0);
                            return Err(syntax(line, c, format!("unknown site kind `{other}`")));
                        }
                    };
                    if ids.contains_key(toks[0]) {
                        return Err(Error::Semantic(format!("duplicate site {} (line {line})", toks[0])));
                    }
                    ids.insert(toks[0].to_string(), m.add_site(toks[0], kind));
                }
                "term" => {
                    let (delta, after) = match rest.strip_prefix("delta") {
                        Some(a) if a.trim_start().starts_with('{') => (true, a.trim_start()),
                        _ => (false, rest),
                    };
                    let after_col = col0 + st.len() - after.len();
                    let Some(inner) = after.strip_prefix('{') else {
                        return Err(syntax(line, after_col, "expected `{`"));
                    };
                    let Some(close) = inner.find('}') else {
                        return Err(syntax(line, after_col, "unclosed `{`"));
                    };
                    let names: Vec<&str> = inner[..close].split_whitespace().collect();
                    if names.is_empty() {
                        return Err(syntax(line, after_col, "empty site list"));
                    }
                    let mut sites = Vec::new();
                    for n in &names {
                        match ids.get(*n) {
                            Some(&i) => sites.push(i),
                            None => return Err(Error::Semantic(format!("unknown site {n} (line {line})"))),
                        }
                    }
                    let coup_txt = &inner[close + 1..];
                    let coup_col = after_col + 1 + close + 1;
                    let h = parse_coupling(coup_txt, line, coup_col)?;
                    let mut key = sites.clone();
                    key.sort_unstable();
                    if !seen_terms.insert((key, delta)) {
                        return Err(Error::Semantic(format!("duplicate term {{{}}} (line {line})", names.join(" "))));
                    }
                    if delta {
                        if sites.len() != 2 {
                            return Err(Error::Semantic(format!("delta term needs two sites (line {line})")));
                        }
                        m.add_delta(sites[0], sites[1], h);
                    } else {
                        m.add_term(sites, h);
                    }
                }
                other => return Err(syntax(line, col0, format!("unknown statement `{other}`"))),
            }
        }
    }
    if statements == 0 {
        return Err(syntax(1, 1, "empty model"));
    }
    m.validate()?;
    Ok(m)
}

pub fn render_model(m: &SpinModel) -> String {
    let mut out = String::new();
    writeln!(out, "model {}", m.name).unwrap();
    for s in &m.sites {
        writeln!(out, "site {} {}", s.id, s.kind.keyword()).unwrap();
    }
    for t in &m.terms {
        let names: Vec<&str> = t.sites.iter().map(|&i| m.sites[i].id.as_str()).collect();
        let d = if t.delta { "delta " } else { "" };
        writeln!(out, "term {d}{{{}}} {}", names.join(" "), render_coupling(&t.coupling)).unwrap();
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatticeKind {
    Square,
    Triangular,
    Hexagonal,
    Triangular3Body,
}

impl std::str::FromStr for LatticeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(LatticeKind::Square),
            "triangular" => Ok(LatticeKind::Triangular),
            "hexagonal" => Ok(LatticeKind::Hexagonal),
            "triangular3body" => Ok(LatticeKind::Triangular3Body),
            _ => Err(Error::Semantic(format!("unknown lattice kind {s}"))),
        }
    }
}

pub const DEFAULT_MAX_SITES: usize = 1 << 16;

type Pt = (i64, i64);

/// Triangles of a `rows × cols` strip patch: strip `k` holds `cols`
/// alternating up/down triangles between vertex rows `k` and `k+1`.
fn triangles(rows: usize, cols: usize) -> Vec<[Pt; 3]> {
    let mut out = Vec::new();
    for k in 0..rows as i64 {
        for m in 0..cols as i64 {
            if m % 2 == 0 {
                out.push([(k, m / 2), (k, m / 2 + 1), (k + 1, m / 2)]);
            } else {
                out.push([(k, (m + 1) / 2), (k + 1, (m - 1) / 2), (k + 1, (m + 1) / 2)]);
            }
        }
    }
    out
}

/// Hexagons of a brick-wall honeycomb patch, as closed 6-cycles.
fn hexagons(rows: usize, cols: usize) -> Vec<[Pt; 6]> {
    let mut out = Vec::new();
    for r in 0..rows as i64 {
        for c in 0..cols as i64 {
            let x = 2 * c + (r % 2);
            out.push([(r, x), (r, x + 1), (r, x + 2), (r + 1, x + 2), (r + 1, x + 1), (r + 1, x)]);
        }
    }
    out
}

fn site_name(p: Pt) -> String {
    format!("s{}_{}", p.0, p.1)
}

/// Free-boundary patches. Square counts sites; triangular and its three-body
/// variant count triangles per strip; hexagonal counts hexagons.
pub fn gen_lattice(kind: LatticeKind, rows: usize, cols: usize, j: ComplexField, max_sites: usize) -> Result<SpinModel> {
    if rows == 0 || cols == 0 {
        return Err(Error::Precondition("rows and cols must be at least 1".into()));
    }
    let estimate = (rows + 1).saturating_mul(cols.saturating_mul(2) + 3);
    if estimate > max_sites.saturating_mul(4) {
        return Err(Error::SizeOverflow(format!("{rows}x{cols} exceeds the cap of {max_sites} sites")));
    }
    let mut edges: BTreeSet<(Pt, Pt)> = BTreeSet::new();
    let mut triples: Vec<[Pt; 3]> = Vec::new();
    match kind {
        LatticeKind::Square => {
            for r in 0..rows as i64 {
                for c in 0..cols as i64 {
                    if c + 1 < cols as i64 {
                        edges.insert(((r, c), (r, c + 1)));
                    }
                    if r + 1 < rows as i64 {
                        edges.insert(((r, c), (r + 1, c)));
                    }
                }
            }
        }
        LatticeKind::Triangular => {
            for t in triangles(rows, cols) {
                for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[0], t[2])] {
                    edges.insert((a.min(b), a.max(b)));
                }
            }
        }
        LatticeKind::Triangular3Body => triples = triangles(rows, cols),
        LatticeKind::Hexagonal => {
            for h in hexagons(rows, cols) {
                for i in 0..6 {
                    let (a, b) = (h[i], h[(i + 1) % 6]);
                    edges.insert((a.min(b), a.max(b)));
                }
            }
        }
    }
    let mut pts: BTreeSet<Pt> = BTreeSet::new();
    for &(a, b) in &edges {
        pts.insert(a);
        pts.insert(b);
    }
    for t in &triples {
        pts.extend(t.iter().copied());
    }
    if kind == LatticeKind::Square {
        for r in 0..rows as i64 {
            for c in 0..cols as i64 {
                pts.insert((r, c));
            }
        }
    }
    if pts.len() > max_sites {
        return Err(Error::SizeOverflow(format!("{} sites exceeds the cap of {max_sites}", pts.len())));
    }
    let name = match kind {
        LatticeKind::Square => "square",
        LatticeKind::Triangular => "triangular",
        LatticeKind::Hexagonal => "hexagonal",
        LatticeKind::Triangular3Body => "triangular3body",
    };
    let mut m = SpinModel::new(format!("{name}_{rows}x{cols}"));
    let index: BTreeMap<Pt, usize> = pts.iter().map(|&p| (p, m.add_site(site_name(p), SiteKind::Spin))).collect();
    for (a, b) in edges {
        m.add_term(vec![index[&a], index[&b]], j);
    }
    for t in triples {
        m.add_term(t.iter().map(|p| index[p]).collect(), j);
    }
    Ok(m)
}

/// Triangle vertex sets of the generated triangular patches, by site index.
pub fn lattice_triangles(m: &SpinModel, rows: usize, cols: usize) -> Vec<[usize; 3]> {
    triangles(rows, cols)
        .into_iter()
        .map(|t| t.map(|p| m.site_index(&site_name(p)).expect("site of generated patch")))
        .collect()
}

/// Hexagon vertex cycles of the generated honeycomb patches, by site index.
pub fn lattice_hexagons(m: &SpinModel, rows: usize, cols: usize) -> Vec<[usize; 6]> {
    hexagons(rows, cols)
        .into_iter()
        .map(|h| h.map(|p| m.site_index(&site_name(p)).expect("site of generated patch")))
        .collect()
}
