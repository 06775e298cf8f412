//! The MFD text format.
//!
//! ```text
//! MFD 1
//! dim <d> ambient <n> count <m> labels <k>
//! <n position floats> <d·n frame floats, row-major> <weight> [<label>]
//! ...
//! ```
//!
//! Frame rows are the tangent basis vectors. `#` starts a comment. Floats are
//! written in shortest round-trip form, so a save/load cycle is lossless.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use super::{DiscretizedSubmanifold, LabeledSubmanifold, Sample};
use crate::error::{Error, Result};
use crate::geometry::{GaussPoint, GrassPlane, FRAME_TOLERANCE};

/// Frames deviating from orthonormality by more than this are rejected on load.
pub const LOAD_TOLERANCE: f64 = 1e-6;

/// Serializes W (and optional per-sample labels).
pub fn write_mfd(w: &DiscretizedSubmanifold, labels: Option<&[f64]>) -> String {
    let (n, d) = (w.ambient_dim(), w.intrinsic_dim());
    let mut out = String::new();
    out.push_str("MFD 1\n");
    let _ = writeln!(
        out,
        "dim {d} ambient {n} count {} labels {}",
        w.len(),
        usize::from(labels.is_some())
    );
    for (i, s) in w.samples().iter().enumerate() {
        let mut fields: Vec<String> = s.position().iter().map(|x| format!("{x}")).collect();
        for j in 0..d {
            fields.extend(s.tangent().basis_vector(j).iter().map(|x| format!("{x}")));
        }
        fields.push(format!("{}", s.weight));
        if let Some(l) = labels {
            fields.push(format!("{}", l[i]));
        }
        out.push_str(&fields.join(" "));
        out.push('\n');
    }
    out
}

pub fn save(w: &DiscretizedSubmanifold, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_mfd(w, None))?;
    Ok(())
}

pub fn save_labeled(w: &LabeledSubmanifold, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_mfd(w.base(), Some(w.labels())))?;
    Ok(())
}

/// Reads a file; labels are returned when the header declares them.
pub fn read_mfd(path: impl AsRef<Path>) -> Result<(DiscretizedSubmanifold, Option<Vec<f64>>)> {
    parse_mfd(&std::fs::read_to_string(path)?)
}

/// Loads W, ignoring labels if present.
pub fn load(path: impl AsRef<Path>) -> Result<DiscretizedSubmanifold> {
    Ok(read_mfd(path)?.0)
}

pub fn load_labeled(path: impl AsRef<Path>) -> Result<LabeledSubmanifold> {
    let (w, labels) = read_mfd(path)?;
    LabeledSubmanifold::new(w, labels.ok_or(Error::MissingLabels)?)
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_mfd(text: &str) -> Result<(DiscretizedSubmanifold, Option<Vec<f64>>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (ln, magic) = lines.next().ok_or_else(|| parse_err(1, "missing `MFD` header"))?;
    match magic.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["MFD", "1"] => {}
        ["MFD", v] => return Err(Error::Version(v.to_string())),
        _ => return Err(parse_err(ln, format!("expected `MFD 1`, got `{magic}`"))),
    }

    let (ln, header) = lines
        .next()
        .ok_or_else(|| parse_err(ln + 1, "missing dimension header"))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    let field = |key: &str, pos: usize| -> Result<usize> {
        match (tokens.get(pos), tokens.get(pos + 1)) {
            (Some(&k), Some(v)) if k == key => v.parse().map_err(|_| parse_err(ln, format!("bad value for `{key}`"))),
            _ => Err(parse_err(ln, "expected `dim <d> ambient <n> count <m> labels <k>`")),
        }
    };
    if tokens.len() != 8 {
        return Err(parse_err(ln, "expected `dim <d> ambient <n> count <m> labels <k>`"));
    }
    let d = field("dim", 0)?;
    let n = field("ambient", 2)?;
    let m = field("count", 4)?;
    let k = field("labels", 6)?;
    if k > 1 {
        return Err(parse_err(ln, "labels must be 0 or 1"));
    }
    if n == 0 || d >= n {
        return Err(parse_err(ln, format!("invalid dimensions d = {d}, n = {n}")));
    }

    let width = n + d * n + 1 + k;
    let mut samples = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(if k == 1 { m } else { 0 });
    let mut last = ln;
    for _ in 0..m {
        let (ln, row) = lines
            .next()
            .ok_or_else(|| parse_err(last + 1, format!("expected {m} sample rows")))?;
        last = ln;
        let values = row
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| parse_err(ln, format!("cannot parse `{t}` as a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() != width {
            return Err(parse_err(
                ln,
                format!("expected {width} values, found {}", values.len()),
            ));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(parse_err(ln, format!("non-finite value {bad}")));
        }
        let frame = DMatrix::from_column_slice(n, d, &values[n..n + d * n]);
        let plane = frame_from_rows(frame, ln)?;
        let weight = values[n + d * n];
        if weight < 0.0 {
            return Err(parse_err(ln, "negative weight"));
        }
        samples.push(Sample {
            point: GaussPoint {
                position: values[..n].to_vec(),
                plane,
            },
            weight,
        });
        if k == 1 {
            labels.push(values[width - 1]);
        }
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, format!("more than {m} sample rows")));
    }
    let w = DiscretizedSubmanifold::new(n, d, samples)?;
    Ok((w, (k == 1).then_some(labels)))
}

/// Validates frame rows (stored as matrix columns) and re-orthonormalizes small
/// deviations.
fn frame_from_rows(frame: DMatrix<f64>, line: usize) -> Result<GrassPlane> {
    let d = frame.ncols();
    let mut worst = 0.0f64;
    for r in 0..d {
        let mut row_dev = (frame.column(r).norm_squared() - 1.0).abs();
        for s in 0..r {
            row_dev = row_dev.max(frame.column(r).dot(&frame.column(s)).abs());
        }
        if row_dev > LOAD_TOLERANCE {
            return Err(Error::NotOrthonormal {
                line,
                row: r + 1,
                deviation: row_dev,
            });
        }
        worst = worst.max(row_dev);
    }
    if worst > FRAME_TOLERANCE {
        GrassPlane::from_spanning(frame)
    } else {
        GrassPlane::from_frame(frame)
    }
}
