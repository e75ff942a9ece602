use super::CutPlan;
use crate::fit::TraceRow;
use crate::geom::{Polygon2, TriMesh, Vec2, Vec3};
use crate::{Error, Result};
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

/// Parses Wavefront OBJ text: `v x y z` and `f a b c ...` records, polygonal
/// faces fanned into triangles. Indices are 1-based; negative indices count
/// back from the latest vertex. Other records are ignored.
pub fn parse_obj(text: &str, path: &Path) -> Result<TriMesh> {
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut fields = content.split_whitespace();
        match fields.next() {
            Some("v") => {
                let coords: Vec<f64> = fields
                    .take(3)
                    .map(|f| f.parse::<f64>().map_err(|_| err(line, format!("bad coordinate {f:?}"))))
                    .collect::<Result<_>>()?;
                if coords.len() != 3 {
                    return Err(err(line, "vertex needs three coordinates".into()));
                }
                if coords.iter().any(|c| !c.is_finite()) {
                    return Err(err(line, "non-finite coordinate".into()));
                }
                vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let n = vertices.len() as i64;
                let idx: Vec<u32> = fields
                    .map(|f| {
                        let head = f.split('/').next().unwrap_or("");
                        let i: i64 = head.parse().map_err(|_| err(line, format!("bad face index {f:?}")))?;
                        let resolved = match i {
                            0 => return Err(err(line, "face index 0 (indices are 1-based)".into())),
                            i if i > 0 => i - 1,
                            i => n + i,
                        };
                        if resolved < 0 || resolved >= n {
                            return Err(err(line, format!("face index {i} out of range 1..={n}")));
                        }
                        Ok(resolved as u32)
                    })
                    .collect::<Result<_>>()?;
                if idx.len() < 3 {
                    return Err(err(line, "face needs at least three vertices".into()));
                }
                for j in 1..idx.len() - 1 {
                    triangles.push([idx[0], idx[j], idx[j + 1]]);
                }
            }
            _ => {}
        }
    }
    if triangles.is_empty() {
        return Err(err(text.lines().count().max(1), "no faces".into()));
    }
    TriMesh::new(vertices, triangles)
}

pub fn load_obj(path: &Path) -> Result<TriMesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_obj(&text, path)
}

pub fn obj_string(mesh: &TriMesh) -> String {
    let mut s = String::with_capacity(40 * (mesh.vertices.len() + mesh.triangles.len()));
    for v in &mesh.vertices {
        // {:?} prints the shortest representation that reads back exactly
        let _ = writeln!(s, "v {:?} {:?} {:?}", v.x, v.y, v.z);
    }
    for t in &mesh.triangles {
        let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    s
}

pub fn write_obj(mesh: &TriMesh, path: &Path) -> Result<()> {
    std::fs::write(path, obj_string(mesh)).map_err(|e| Error::io(path, e))
}

/// JSON number formatting with 17 significant digits.
struct PlanFormatter;

impl serde_json::ser::Formatter for PlanFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        if !value.is_finite() {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("non-finite number {value} in plan"),
            ));
        }
        write!(writer, "{value:.16e}")
    }
}

pub fn plan_to_string(plan: &CutPlan) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, PlanFormatter);
    serde::Serialize::serialize(plan, &mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

pub fn write_plan(plan: &CutPlan, path: &Path) -> Result<()> {
    std::fs::write(path, plan_to_string(plan)?).map_err(|e| Error::io(path, e))
}

pub fn read_plan(path: &Path) -> Result<CutPlan> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        msg: e.to_string(),
    })
}

/// Reads a contour as one `x,y` pair per line, closed implicitly.
pub fn read_contour_csv(path: &Path) -> Result<Polygon2> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_contour_csv(file, path)
}

pub fn parse_contour_csv(reader: impl std::io::Read, path: &Path) -> Result<Polygon2> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut points = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        if record.len() != 2 {
            return Err(err(format!("expected 2 fields, found {}", record.len())));
        }
        let coord = |i: usize| -> Result<f64> {
            record[i]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("bad coordinate {:?}", &record[i])))
        };
        points.push(Vec2::new(coord(0)?, coord(1)?));
    }
    Polygon2::new(points)
}

pub fn write_contour_csv(poly: &Polygon2, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    for p in poly.vertices() {
        w.write_record([format!("{:?}", p.x), format!("{:?}", p.y)])
            .map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Per-iteration fit trace with a header row.
pub fn write_trace_csv(rows: &[TraceRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e.to_string()))
}
