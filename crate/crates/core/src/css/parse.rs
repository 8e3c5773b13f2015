//! Plain-text code definitions: sections of 0/1 rows.
//!
//! ```text
//! # [[7,1,3]] Steane
//! hx
//! 1010101
//! 0110011
//! 0001111
//! hz
//! 1010101
//! 0110011
//! 0001111
//! logical_x
//! 1111111
//! logical_z
//! 1111111
//! distance
//! 3
//! ```
//!
//! Character position `j` of a row is physical qubit `j`.

use super::CssCode;
use crate::error::{Error, Result};

pub fn parse_code_text(text: &str) -> Result<CssCode> {
    let mut hx: Vec<u32> = Vec::new();
    let mut hz: Vec<u32> = Vec::new();
    let mut logical_x: Vec<u32> = Vec::new();
    let mut logical_z: Vec<u32> = Vec::new();
    let mut distance: Option<usize> = None;
    let mut n: Option<usize> = None;

    #[derive(PartialEq, Clone, Copy)]
    enum Section {
        None,
        Hx,
        Hz,
        Lx,
        Lz,
        Distance,
    }
    let mut section = Section::None;

    for (lineno, raw_line) in text.lines().enumerate() {
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.to_ascii_lowercase().as_str() {
            "hx" => section = Section::Hx,
            "hz" => section = Section::Hz,
            "logical_x" => section = Section::Lx,
            "logical_z" => section = Section::Lz,
            "distance" => section = Section::Distance,
            _ => {
                if section == Section::Distance {
                    distance = Some(line.parse::<usize>().map_err(|e| {
                        Error::Parse(format!("line {}: bad distance: {e}", lineno + 1))
                    })?);
                    continue;
                }
                let mut row = 0u32;
                for (j, ch) in line.chars().enumerate() {
                    match ch {
                        '0' => {}
                        '1' => row |= 1 << j,
                        other => {
                            return Err(Error::Parse(format!(
                                "line {}: unexpected character {other:?}",
                                lineno + 1
                            )))
                        }
                    }
                }
                let width = line.chars().count();
                match n {
                    None => n = Some(width),
                    Some(w) if w == width => {}
                    Some(w) => {
                        return Err(Error::Parse(format!(
                            "line {}: row width {width} ≠ {w}",
                            lineno + 1
                        )))
                    }
                }
                match section {
                    Section::Hx => hx.push(row),
                    Section::Hz => hz.push(row),
                    Section::Lx => logical_x.push(row),
                    Section::Lz => logical_z.push(row),
                    Section::None => {
                        return Err(Error::Parse(format!(
                            "line {}: row outside any section",
                            lineno + 1
                        )))
                    }
                    Section::Distance => unreachable!(),
                }
            }
        }
    }

    let n = n.ok_or_else(|| Error::Parse("no rows found".into()))?;
    let one = |rows: Vec<u32>, what: &str| -> Result<u32> {
        if rows.len() == 1 {
            Ok(rows[0])
        } else {
            Err(Error::Parse(format!(
                "expected exactly one {what} row, found {}",
                rows.len()
            )))
        }
    };
    CssCode::new(
        n,
        hx,
        hz,
        one(logical_x, "logical_x")?,
        one(logical_z, "logical_z")?,
        distance.ok_or_else(|| Error::Parse("missing distance section".into()))?,
    )
}

/// Render a code back to the text format.
pub fn code_to_text(code: &CssCode) -> String {
    let row = |mask: u32| -> String {
        (0..code.n)
            .map(|j| if mask >> j & 1 == 1 { '1' } else { '0' })
            .collect()
    };
    let mut out = String::new();
    out.push_str("hx\n");
    for &r in &code.hx {
        out.push_str(&row(r));
        out.push('\n');
    }
    out.push_str("hz\n");
    for &r in &code.hz {
        out.push_str(&row(r));
        out.push('\n');
    }
    out.push_str("logical_x\n");
    out.push_str(&row(code.logical_x));
    out.push_str("\nlogical_z\n");
    out.push_str(&row(code.logical_z));
    out.push_str("\ndistance\n");
    out.push_str(&code.distance.to_string());
    out.push('\n');
    out
}
