//! Text format: `#` comment lines (provenance), a header
//! `OA <M> <k> <s> <t> <lambda>`, then `M` lines of `k` symbols.

use std::io::{BufRead, Write};

use super::OrthogonalArray;
use crate::error::{Error, Result};

pub fn write_array<W: Write>(array: &OrthogonalArray, mut out: W) -> Result<()> {
    for line in array.provenance() {
        writeln!(out, "# {line}")?;
    }
    writeln!(
        out,
        "OA {} {} {} {} {}",
        array.runs(),
        array.factors(),
        array.levels(),
        array.claimed_strength(),
        array.index()
    )?;
    let mut line = String::with_capacity(array.factors() * 2);
    for i in 0..array.runs() {
        line.clear();
        for (j, v) in array.row(i).iter().enumerate() {
            if j > 0 {
                line.push(' ');
            }
            line.push_str(&v.to_string());
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_array<R: BufRead>(input: R) -> Result<OrthogonalArray> {
    let mut lines = input.lines().enumerate();
    let mut provenance = Vec::new();
    let header = loop {
        let Some((no, line)) = lines.next() else {
            return Err(Error::Format("missing OA header".into()));
        };
        let line = line?;
        let trimmed = line.trim();
        if let Some(comment) = trimmed.strip_prefix('#') {
            provenance.push(comment.trim().to_string());
        } else if !trimmed.is_empty() {
            break (no, trimmed.to_string());
        }
    };
    let fields: Vec<&str> = header.1.split_whitespace().collect();
    if fields.len() != 6 || fields[0] != "OA" {
        return Err(Error::Format(format!(
            "line {}: expected `OA <M> <k> <s> <t> <lambda>`",
            header.0 + 1
        )));
    }
    let num = |i: usize| -> Result<usize> {
        fields[i]
            .parse()
            .map_err(|_| Error::Format(format!("bad header field `{}`", fields[i])))
    };
    let (runs, factors, levels, strength, index) = (num(1)?, num(2)?, num(3)?, num(4)?, num(5)?);
    let mut entries = Vec::with_capacity(runs * factors);
    let mut rows = 0;
    for (no, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let before = entries.len();
        for tok in line.split_whitespace() {
            let v: u8 = tok
                .parse()
                .map_err(|_| Error::Format(format!("line {}: bad symbol `{tok}`", no + 1)))?;
            entries.push(v);
        }
        if entries.len() - before != factors {
            return Err(Error::Format(format!(
                "line {}: {} symbols, expected {factors}",
                no + 1,
                entries.len() - before
            )));
        }
        rows += 1;
    }
    if rows != runs {
        return Err(Error::Format(format!("{rows} rows, header says {runs}")));
    }
    let mut oa = OrthogonalArray::new(runs, factors, levels, strength, entries)?;
    if oa.index() != index {
        return Err(Error::Format(format!(
            "header index {index} but M / s^t = {}",
            oa.index()
        )));
    }
    for p in provenance {
        oa = oa.with_provenance(p);
    }
    Ok(oa)
}
