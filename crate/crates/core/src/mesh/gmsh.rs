//! ASCII Gmsh MSH reader (v2.2 and v4.1) and v2.2 writer.
//!
//! Only 3-node (type 2) and 6-node (type 9) triangles become cells.
//! Points (15) and line elements (1, 8) that Gmsh writes for geometric
//! entities are skipped; any other element type is rejected.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{Cell, MeshError, SurfaceMesh};
use crate::geom::Vec3;

const TRIANGLE3: u32 = 2;
const TRIANGLE6: u32 = 9;
const SKIPPED: [u32; 4] = [1, 8, 15, 26];

pub fn parse_gmsh(path: impl AsRef<Path>) -> Result<SurfaceMesh, MeshError> {
    let text = std::fs::read_to_string(path)?;
    parse_gmsh_str(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            line: 0,
        }
    }

    fn next_line(&mut self) -> Option<&'a str> {
        for (i, l) in self.inner.by_ref() {
            self.line = i + 1;
            let t = l.trim();
            if !t.is_empty() {
                return Some(t);
            }
        }
        None
    }

    fn expect_line(&mut self, what: &str) -> Result<&'a str, MeshError> {
        let line = self.line;
        self.next_line().ok_or_else(|| MeshError::Parse {
            line: line + 1,
            msg: format!("unexpected end of file, expected {what}"),
        })
    }

    fn err(&self, msg: impl Into<String>) -> MeshError {
        MeshError::Parse {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn numbers<T: std::str::FromStr>(&mut self, what: &str) -> Result<Vec<T>, MeshError> {
        let l = self.expect_line(what)?;
        l.split_whitespace()
            .map(|t| t.parse::<T>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| self.err(format!("malformed {what}: '{l}'")))
    }

    fn skip_section(&mut self, name: &str) -> Result<(), MeshError> {
        let end = format!("$End{name}");
        loop {
            let l = self.expect_line(&end)?;
            if l == end {
                return Ok(());
            }
        }
    }

    fn expect_end(&mut self, name: &str) -> Result<(), MeshError> {
        let end = format!("$End{name}");
        let l = self.expect_line(&end)?;
        if l != end {
            return Err(self.err(format!("expected {end}, found '{l}'")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Version {
    V2,
    V4,
}

struct RawElement {
    kind: u32,
    nodes: Vec<usize>,
}

pub fn parse_gmsh_str(text: &str) -> Result<SurfaceMesh, MeshError> {
    let mut lines = Lines::new(text);
    let mut version = None;
    let mut nodes: Vec<(usize, Vec3)> = Vec::new();
    let mut elements: Vec<RawElement> = Vec::new();

    while let Some(l) = lines.next_line() {
        match l {
            "$MeshFormat" => {
                let header = lines.expect_line("format header")?;
                let mut it = header.split_whitespace();
                let v = it.next().unwrap_or("");
                let file_type = it.next().unwrap_or("");
                if file_type != "0" {
                    return Err(MeshError::UnsupportedFeature("binary MSH files".into()));
                }
                version = Some(match v {
                    "2.2" | "2.1" | "2" => Version::V2,
                    "4.1" => Version::V4,
                    other => return Err(MeshError::UnsupportedVersion(other.to_string())),
                });
                lines.expect_end("MeshFormat")?;
            }
            "$Nodes" => {
                let v = version.ok_or_else(|| lines.err("$Nodes before $MeshFormat"))?;
                nodes = match v {
                    Version::V2 => read_nodes_v2(&mut lines)?,
                    Version::V4 => read_nodes_v4(&mut lines)?,
                };
                lines.expect_end("Nodes")?;
            }
            "$Elements" => {
                let v = version.ok_or_else(|| lines.err("$Elements before $MeshFormat"))?;
                elements = match v {
                    Version::V2 => read_elements_v2(&mut lines)?,
                    Version::V4 => read_elements_v4(&mut lines)?,
                };
                lines.expect_end("Elements")?;
            }
            "$PartitionedEntities" | "$Parametrizations" => {
                return Err(MeshError::UnsupportedFeature(
                    l.trim_start_matches('$').into(),
                ));
            }
            s if s.starts_with("$End") => {
                return Err(lines.err(format!("unmatched section end '{s}'")));
            }
            s if s.starts_with('$') => {
                let name = s[1..].to_string();
                lines.skip_section(&name)?;
            }
            other => return Err(lines.err(format!("unexpected content '{other}'"))),
        }
    }

    if version.is_none() {
        return Err(MeshError::Parse {
            line: lines.line,
            msg: "missing $MeshFormat section".into(),
        });
    }

    // Compact node tags to indices, keeping only nodes used by triangles.
    let mut used: HashMap<usize, usize> = HashMap::new();
    let tags: HashMap<usize, usize> = nodes.iter().enumerate().map(|(i, n)| (n.0, i)).collect();
    for e in &elements {
        for t in &e.nodes {
            if !tags.contains_key(t) {
                return Err(MeshError::Parse {
                    line: 0,
                    msg: format!("element references undefined node {t}"),
                });
            }
        }
    }
    let mut order: Vec<usize> = elements
        .iter()
        .flat_map(|e| e.nodes.iter().map(|t| tags[t]))
        .collect();
    order.sort_unstable();
    order.dedup();
    let mut vertices = Vec::with_capacity(order.len());
    for (new, &old) in order.iter().enumerate() {
        used.insert(nodes[old].0, new);
        vertices.push(nodes[old].1);
    }

    let mut cells = Vec::with_capacity(elements.len());
    let mut saw3 = false;
    let mut saw6 = false;
    for e in &elements {
        let ids: Vec<usize> = e.nodes.iter().map(|t| used[t]).collect();
        match e.kind {
            TRIANGLE3 => {
                saw3 = true;
                cells.push(Cell {
                    corners: [ids[0], ids[1], ids[2]],
                    mids: None,
                });
            }
            TRIANGLE6 => {
                saw6 = true;
                cells.push(Cell {
                    corners: [ids[0], ids[1], ids[2]],
                    mids: Some([ids[3], ids[4], ids[5]]),
                });
            }
            _ => unreachable!(),
        }
    }
    if saw3 && saw6 {
        return Err(MeshError::MixedOrder);
    }
    SurfaceMesh::new(vertices, cells)
}

fn nodes_per_element(kind: u32) -> Result<Option<usize>, MeshError> {
    match kind {
        TRIANGLE3 => Ok(Some(3)),
        TRIANGLE6 => Ok(Some(6)),
        k if SKIPPED.contains(&k) => Ok(None),
        k => Err(MeshError::UnsupportedElement(k)),
    }
}

fn read_nodes_v2(lines: &mut Lines) -> Result<Vec<(usize, Vec3)>, MeshError> {
    let n = lines.numbers::<usize>("node count")?;
    let n = *n.first().ok_or_else(|| lines.err("missing node count"))?;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let l = lines.expect_line("node")?;
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() < 4 {
            return Err(lines.err(format!("malformed node line '{l}'")));
        }
        let tag = f[0]
            .parse::<usize>()
            .map_err(|_| lines.err(format!("bad node tag '{}'", f[0])))?;
        let mut x = [0.0; 3];
        for k in 0..3 {
            x[k] = f[k + 1]
                .parse::<f64>()
                .map_err(|_| lines.err(format!("bad coordinate '{}'", f[k + 1])))?;
        }
        out.push((tag, x));
    }
    Ok(out)
}

fn read_elements_v2(lines: &mut Lines) -> Result<Vec<RawElement>, MeshError> {
    let n = lines.numbers::<usize>("element count")?;
    let n = *n
        .first()
        .ok_or_else(|| lines.err("missing element count"))?;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let f = lines.numbers::<usize>("element")?;
        if f.len() < 3 {
            return Err(lines.err("truncated element line"));
        }
        let kind = f[1] as u32;
        let ntags = f[2];
        let Some(nn) = nodes_per_element(kind)? else {
            continue;
        };
        if f.len() != 3 + ntags + nn {
            return Err(lines.err(format!(
                "element of type {kind} has {} fields, expected {}",
                f.len(),
                3 + ntags + nn
            )));
        }
        out.push(RawElement {
            kind,
            nodes: f[3 + ntags..].to_vec(),
        });
    }
    Ok(out)
}

fn read_nodes_v4(lines: &mut Lines) -> Result<Vec<(usize, Vec3)>, MeshError> {
    let h = lines.numbers::<usize>("nodes header")?;
    if h.len() != 4 {
        return Err(lines.err("malformed $Nodes header"));
    }
    let (blocks, total) = (h[0], h[1]);
    let mut out = Vec::with_capacity(total);
    for _ in 0..blocks {
        let b = lines.numbers::<usize>("node block header")?;
        if b.len() != 4 {
            return Err(lines.err("malformed node block header"));
        }
        if b[2] != 0 {
            return Err(MeshError::UnsupportedFeature(
                "parametric node coordinates".into(),
            ));
        }
        let count = b[3];
        let mut tags = Vec::with_capacity(count);
        for _ in 0..count {
            let t = lines.numbers::<usize>("node tag")?;
            if t.len() != 1 {
                return Err(lines.err("expected a single node tag"));
            }
            tags.push(t[0]);
        }
        for tag in tags {
            let x = lines.numbers::<f64>("node coordinates")?;
            if x.len() != 3 {
                return Err(lines.err("expected three coordinates"));
            }
            out.push((tag, [x[0], x[1], x[2]]));
        }
    }
    if out.len() != total {
        return Err(lines.err(format!(
            "node count mismatch: header {total}, read {}",
            out.len()
        )));
    }
    Ok(out)
}

fn read_elements_v4(lines: &mut Lines) -> Result<Vec<RawElement>, MeshError> {
    let h = lines.numbers::<usize>("elements header")?;
    if h.len() != 4 {
        return Err(lines.err("malformed $Elements header"));
    }
    let blocks = h[0];
    let mut out = Vec::new();
    for _ in 0..blocks {
        let b = lines.numbers::<usize>("element block header")?;
        if b.len() != 4 {
            return Err(lines.err("malformed element block header"));
        }
        let kind = b[2] as u32;
        let count = b[3];
        let nn = nodes_per_element(kind)?;
        for _ in 0..count {
            let f = lines.numbers::<usize>("element")?;
            if let Some(nn) = nn {
                if f.len() != 1 + nn {
                    return Err(lines.err(format!(
                        "element of type {kind} has {} node tags, expected {nn}",
                        f.len().saturating_sub(1)
                    )));
                }
                out.push(RawElement {
                    kind,
                    nodes: f[1..].to_vec(),
                });
            }
        }
    }
    Ok(out)
}

/// Serializes the mesh as ASCII MSH v2.2 (node tags are 1-based indices).
pub fn write_gmsh_v22(mesh: &SurfaceMesh) -> String {
    let mut s = String::new();
    s.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n");
    let _ = writeln!(s, "{}", mesh.vertices().len());
    for (i, v) in mesh.vertices().iter().enumerate() {
        let _ = writeln!(s, "{} {:.17e} {:.17e} {:.17e}", i + 1, v[0], v[1], v[2]);
    }
    s.push_str("$EndNodes\n$Elements\n");
    let _ = writeln!(s, "{}", mesh.n_cells());
    for (i, c) in mesh.cells().iter().enumerate() {
        match c.mids {
            None => {
                let _ = writeln!(
                    s,
                    "{} 2 2 0 1 {} {} {}",
                    i + 1,
                    c.corners[0] + 1,
                    c.corners[1] + 1,
                    c.corners[2] + 1
                );
            }
            Some(m) => {
                let _ = writeln!(
                    s,
                    "{} 9 2 0 1 {} {} {} {} {} {}",
                    i + 1,
                    c.corners[0] + 1,
                    c.corners[1] + 1,
                    c.corners[2] + 1,
                    m[0] + 1,
                    m[1] + 1,
                    m[2] + 1
                );
            }
        }
    }
    s.push_str("$EndElements\n");
    s
}
