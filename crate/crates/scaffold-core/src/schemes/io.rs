//! Plain-text import and export of relation matrices.
//!
//! The file format is a header line `n d` (vertex count and class count),
//! followed by `d + 1` blocks, each block being `n` rows of `n`
//! space-separated `0`/`1` digits. Blank lines may appear anywhere between
//! rows and are ignored. The exporter writes one blank line between blocks.

use std::path::Path;

use num_traits::Zero;

use crate::algebra::IntMatrix;
use crate::{Error, Result};

use super::MAX_VERTICES;

/// Read relation matrices from a file in the `n d` + blocks format.
pub fn read_relations(path: impl AsRef<Path>) -> Result<Vec<IntMatrix>> {
    let text = std::fs::read_to_string(path)?;
    parse_relations(&text)
}

/// Write relation matrices to a file in the `n d` + blocks format.
pub fn write_relations(mats: &[IntMatrix], path: impl AsRef<Path>) -> Result<()> {
    let text = format_relations(mats)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Parse the relation-file format from a string.
pub fn parse_relations(text: &str) -> Result<Vec<IntMatrix>> {
    let mut lines = text.lines().enumerate().map(|(idx, raw)| (idx + 1, raw));

    // Header: two integers `n d` on the first non-blank line.
    let (header_line, header) = lines
        .by_ref()
        .find(|(_, raw)| !raw.trim().is_empty())
        .ok_or_else(|| syntax(1, 1, "empty file: expected header `n d`"))?;
    let header_tokens = tokens_of(header);
    let (n, d) = match header_tokens.as_slice() {
        [(c1, t1), (c2, t2)] => {
            let n = parse_count(header_line, *c1, t1, "vertex count")?;
            let d = parse_count(header_line, *c2, t2, "class count")?;
            (n, d)
        }
        [] => return Err(syntax(header_line, 1, "expected header `n d`")),
        [_, _, (col, _), ..] | [(col, _)] => {
            return Err(syntax(header_line, *col, "header must be exactly two integers `n d`"))
        }
    };
    if n == 0 {
        return Err(syntax(header_line, 1, "vertex count must be positive"));
    }
    if n > MAX_VERTICES {
        return Err(Error::TooLarge(format!("relation file declares n = {n} > {MAX_VERTICES}")));
    }
    if d + 1 > n * n {
        return Err(Error::TooLarge(format!(
            "relation file declares {} relations on only {} ordered pairs",
            d + 1,
            n * n
        )));
    }

    // Body: (d + 1) · n rows of n digits each.
    let mut mats = Vec::with_capacity(d + 1);
    let mut current = IntMatrix::zeros(n);
    let mut row = 0usize;
    let mut last_line = header_line;
    for (line_no, raw) in lines {
        last_line = line_no;
        if raw.trim().is_empty() {
            continue;
        }
        if mats.len() == d + 1 {
            return Err(syntax(line_no, 1, "unexpected content after the final relation block"));
        }
        let toks = tokens_of(raw);
        if toks.len() != n {
            return Err(syntax(
                line_no,
                toks.get(n).map_or(1, |(c, _)| *c),
                format!("row has {} entries, expected {n}", toks.len()),
            ));
        }
        for (y, (col, tok)) in toks.into_iter().enumerate() {
            let bit: i64 = match tok {
                "0" => 0,
                "1" => 1,
                other => {
                    return Err(syntax(line_no, col, format!("entry `{other}` is not 0 or 1")));
                }
            };
            current.set(row, y, bit);
        }
        row += 1;
        if row == n {
            mats.push(std::mem::replace(&mut current, IntMatrix::zeros(n)));
            row = 0;
        }
    }
    if mats.len() != d + 1 || row != 0 {
        return Err(syntax(
            last_line + 1,
            1,
            format!(
                "unexpected end of file: read {} complete relation blocks of {} expected",
                mats.len(),
                d + 1
            ),
        ));
    }
    Ok(mats)
}

/// Render relation matrices in the `n d` + blocks format.
pub fn format_relations(mats: &[IntMatrix]) -> Result<String> {
    if mats.is_empty() {
        return Err(Error::Shape("no relation matrices to write".into()));
    }
    let n = mats[0].size();
    let mut out = String::new();
    out.push_str(&format!("{n} {}\n", mats.len() - 1));
    for (idx, mat) in mats.iter().enumerate() {
        if mat.size() != n {
            return Err(Error::Shape(format!(
                "relation {idx} is {}×{}, expected {n}×{n}",
                mat.size(),
                mat.size()
            )));
        }
        if !mat.is_zero_one() {
            return Err(Error::Shape(format!("relation {idx} has entries other than 0/1")));
        }
        out.push('\n');
        for x in 0..n {
            let row: Vec<&str> =
                (0..n).map(|y| if mat.get(x, y).is_zero() { "0" } else { "1" }).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    Ok(out)
}

/// Tokens of a line with their 1-based character columns.
fn tokens_of(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (idx, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..idx]));
            }
        } else if start.is_none() {
            start = Some(idx);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn parse_count(line: usize, column: usize, token: &str, what: &str) -> Result<usize> {
    token
        .parse::<usize>()
        .map_err(|_| syntax(line, column, format!("{what} `{token}` is not a non-negative integer")))
}

fn syntax(line: usize, column: usize, detail: impl Into<String>) -> Error {
    Error::Syntax { line, column, detail: detail.into() }
}
