//! OBJ / OFF mesh files and CSV scalar fields.
//!
//! Only geometry is read: OBJ `v` and `f` records, OFF vertex and face
//! blocks. Polygons with more than three sides are fan-triangulated. Vertices
//! are never welded or reordered, so a file round-trips face-for-face.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::{Error, Point, Result, TriMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Off,
    /// Decide from the file extension, or from the content for streams.
    Auto,
}

impl FromStr for MeshFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(MeshFormat::Obj),
            "off" => Ok(MeshFormat::Off),
            "auto" => Ok(MeshFormat::Auto),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }
}

impl MeshFormat {
    fn from_extension(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) => match ext.parse()? {
                MeshFormat::Auto => Err(Error::UnsupportedFormat(ext.to_string())),
                f => Ok(f),
            },
            None => Err(Error::UnsupportedFormat(path.display().to_string())),
        }
    }
}

pub fn read_mesh(path: impl AsRef<Path>, format: MeshFormat) -> Result<TriMesh> {
    let path = path.as_ref();
    let format = match format {
        MeshFormat::Auto => MeshFormat::from_extension(path)?,
        f => f,
    };
    read_mesh_from(BufReader::new(File::open(path)?), format)
}

pub fn read_mesh_from(mut reader: impl Read, format: MeshFormat) -> Result<TriMesh> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let format = match format {
        MeshFormat::Auto => sniff(&text),
        f => f,
    };
    let (positions, faces) = match format {
        MeshFormat::Obj => parse_obj(&text)?,
        MeshFormat::Off => parse_off(&text)?,
        MeshFormat::Auto => unreachable!(),
    };
    TriMesh::new(positions, faces)
}

fn sniff(text: &str) -> MeshFormat {
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'));
    match first {
        Some(l) if l.starts_with("OFF") => MeshFormat::Off,
        _ => MeshFormat::Obj,
    }
}

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| parse_err(line, format!("invalid number `{tok}`")))
}

fn fan(poly: &[usize], faces: &mut Vec<[usize; 3]>) {
    for k in 1..poly.len() - 1 {
        faces.push([poly[0], poly[k], poly[k + 1]]);
    }
}

fn parse_obj(text: &str) -> Result<(Vec<Point>, Vec<[usize; 3]>)> {
    let mut positions = Vec::new();
    let mut faces = Vec::new();
    let mut poly = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let mut toks = raw.split_whitespace();
        match toks.next() {
            Some("v") => {
                let mut c = [0.0; 3];
                for x in &mut c {
                    let tok = toks
                        .next()
                        .ok_or_else(|| parse_err(line, "vertex needs three coordinates"))?;
                    *x = parse_f64(tok, line)?;
                }
                positions.push(Point::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                poly.clear();
                for tok in toks {
                    let head = tok.split('/').next().unwrap_or_default();
                    let i: i64 = head
                        .parse()
                        .map_err(|_| parse_err(line, format!("invalid face index `{tok}`")))?;
                    let idx = match i {
                        0 => return Err(parse_err(line, "face index 0 is invalid in OBJ")),
                        i if i > 0 => (i - 1) as usize,
                        i => {
                            let back = i.unsigned_abs() as usize;
                            positions.len().checked_sub(back).ok_or_else(|| {
                                parse_err(line, format!("relative index {i} out of range"))
                            })?
                        }
                    };
                    poly.push(idx);
                }
                if poly.len() < 3 {
                    return Err(parse_err(line, "face needs at least three vertices"));
                }
                fan(&poly, &mut faces);
            }
            _ => {}
        }
    }
    Ok((positions, faces))
}

fn parse_off(text: &str) -> Result<(Vec<Point>, Vec<[usize; 3]>)> {
    // Tokens with their line numbers, comments stripped.
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or_default().trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let rest = header
        .strip_prefix("OFF")
        .ok_or_else(|| parse_err(hline, "missing OFF header"))?;
    let mut counts: Vec<usize> = Vec::new();
    let mut count_line = hline;
    let push_counts = |s: &str, line: usize, counts: &mut Vec<usize>| -> Result<()> {
        for tok in s.split_whitespace() {
            counts.push(
                tok.parse()
                    .map_err(|_| parse_err(line, format!("invalid count `{tok}`")))?,
            );
        }
        Ok(())
    };
    push_counts(rest, hline, &mut counts)?;
    if counts.is_empty() {
        let (l, s) = lines
            .next()
            .ok_or_else(|| parse_err(hline, "missing counts"))?;
        count_line = l;
        push_counts(s, l, &mut counts)?;
    }
    if counts.len() < 2 {
        return Err(parse_err(count_line, "expected vertex and face counts"));
    }
    let (nv, nf) = (counts[0], counts[1]);

    let mut positions = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, s) = lines
            .next()
            .ok_or_else(|| parse_err(count_line, "unexpected end of vertex block"))?;
        let c: Vec<f64> = s
            .split_whitespace()
            .take(3)
            .map(|t| parse_f64(t, line))
            .collect::<Result<_>>()?;
        if c.len() < 3 {
            return Err(parse_err(line, "vertex needs three coordinates"));
        }
        positions.push(Point::new(c[0], c[1], c[2]));
    }
    let mut faces = Vec::with_capacity(nf);
    let mut poly = Vec::new();
    for _ in 0..nf {
        let (line, s) = lines
            .next()
            .ok_or_else(|| parse_err(count_line, "unexpected end of face block"))?;
        let mut toks = s.split_whitespace();
        let k: usize = toks
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(line, "invalid face size"))?;
        if k < 3 {
            return Err(parse_err(line, "face needs at least three vertices"));
        }
        poly.clear();
        for _ in 0..k {
            let tok = toks
                .next()
                .ok_or_else(|| parse_err(line, "face is missing indices"))?;
            poly.push(
                tok.parse()
                    .map_err(|_| parse_err(line, format!("invalid face index `{tok}`")))?,
            );
        }
        fan(&poly, &mut faces);
    }
    Ok((positions, faces))
}

/// Formats a coordinate with ten significant digits, like C's `%.10g`; the
/// relative rounding error stays below 1e-9.
pub(crate) fn fmt_g10(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..10).contains(&exp) {
        let decimals = (9 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.9e}")
    }
}

pub fn write_mesh(mesh: &TriMesh, path: impl AsRef<Path>, format: MeshFormat) -> Result<()> {
    let path = path.as_ref();
    let format = match format {
        MeshFormat::Auto => MeshFormat::from_extension(path)?,
        f => f,
    };
    let mut w = BufWriter::new(File::create(path)?);
    write_mesh_to(mesh.positions(), mesh.faces(), &mut w, format)?;
    w.flush()?;
    Ok(())
}

/// Writes raw geometry. Refuses a face-less mesh with an I/O error since
/// nothing downstream can consume it.
pub fn write_mesh_to(
    positions: &[Point],
    faces: &[[usize; 3]],
    mut w: impl Write,
    format: MeshFormat,
) -> Result<()> {
    if faces.is_empty() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            "refusing to write a mesh without faces",
        )));
    }
    let mut buf = String::with_capacity(positions.len() * 40 + faces.len() * 20);
    match format {
        MeshFormat::Obj | MeshFormat::Auto => {
            for p in positions {
                let _ = writeln!(buf, "v {} {} {}", fmt_g10(p.x), fmt_g10(p.y), fmt_g10(p.z));
            }
            for f in faces {
                let _ = writeln!(buf, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
            }
        }
        MeshFormat::Off => {
            let _ = writeln!(buf, "OFF\n{} {} 0", positions.len(), faces.len());
            for p in positions {
                let _ = writeln!(buf, "{} {} {}", fmt_g10(p.x), fmt_g10(p.y), fmt_g10(p.z));
            }
            for f in faces {
                let _ = writeln!(buf, "3 {} {} {}", f[0], f[1], f[2]);
            }
        }
    }
    w.write_all(buf.as_bytes())?;
    Ok(())
}

/// Serializes a mesh to bytes in the given format (`Auto` means OBJ).
pub fn mesh_to_bytes(mesh: &TriMesh, format: MeshFormat) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    write_mesh_to(mesh.positions(), mesh.faces(), &mut out, format)?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldTarget {
    Vertex,
    Face,
}

/// Per-vertex or per-face scalar values, e.g. a signed error map.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub target: FieldTarget,
    pub values: Vec<f64>,
    pub label: String,
}

impl ScalarField {
    /// Checks the field length against the companion mesh.
    pub fn check(&self, mesh: &TriMesh) -> Result<()> {
        let expected = match self.target {
            FieldTarget::Vertex => mesh.vertex_count(),
            FieldTarget::Face => mesh.face_count(),
        };
        if self.values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: self.values.len(),
            });
        }
        Ok(())
    }
}

/// Writes `index,value` CSV, one row per element.
pub fn write_scalar_field(
    field: &ScalarField,
    mesh: &TriMesh,
    path: impl AsRef<Path>,
) -> Result<()> {
    field.check(mesh)?;
    let mut w = BufWriter::new(File::create(path)?);
    write_scalar_field_to(field, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_scalar_field_to(field: &ScalarField, mut w: impl Write) -> Result<()> {
    writeln!(w, "index,value")?;
    for (i, v) in field.values.iter().enumerate() {
        writeln!(w, "{i},{v}")?;
    }
    Ok(())
}

/// Reads back a two-column `index,value` CSV.
pub fn read_scalar_values(reader: impl BufRead) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (ln, line) in reader.lines().enumerate().skip(1) {
        let line = line?;
        let value = line
            .split(',')
            .nth(1)
            .ok_or_else(|| parse_err(ln + 1, "expected two columns"))?;
        out.push(parse_f64(value.trim(), ln + 1)?);
    }
    Ok(out)
}
