//! Text model file.
//!
//! ```text
//! DOTMAT-MODEL 1 <k> <n_users> <n_items>
//! U <user_id> <v1> ... <vk>      (n_users records)
//! V <item_id> <v1> ... <vk>      (n_items records)
//! ```
//!
//! Floats are written with Rust's shortest round-trip formatting, so
//! `load(save(m)) == m` bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::ids::{ItemId, UserId};
use crate::model::FactorModel;

const MAGIC: &str = "DOTMAT-MODEL";
const VERSION: &str = "1";

pub fn save_model<W: Write>(model: &FactorModel, mut out: W) -> Result<()> {
    let k = model.dim();
    writeln!(
        out,
        "{MAGIC} {VERSION} {k} {} {}",
        model.user_ids().len(),
        model.item_ids().len()
    )?;
    for (idx, id) in model.user_ids().iter().enumerate() {
        write!(out, "U {id}")?;
        for x in model.user_row(idx) {
            write!(out, " {x}")?;
        }
        writeln!(out)?;
    }
    for (idx, id) in model.item_ids().iter().enumerate() {
        write!(out, "V {id}")?;
        for x in model.item_row(idx) {
            write!(out, " {x}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_model_to_path(model: &FactorModel, path: impl AsRef<Path>) -> Result<()> {
    save_model(model, BufWriter::new(File::create(path)?))
}

fn parse_count(field: Option<&str>, what: &str) -> Result<usize> {
    field
        .ok_or_else(|| Error::parse(1, format!("header is missing {what}")))?
        .parse()
        .map_err(|_| Error::parse(1, format!("header field {what} is not a non-negative integer")))
}

fn parse_record(line: &str, lineno: usize, tag: &str, k: usize) -> Result<(u64, Vec<f64>)> {
    let mut fields = line.split_ascii_whitespace();
    match fields.next() {
        Some(t) if t == tag => {}
        Some(t) => return Err(Error::parse(lineno, format!("expected a `{tag}` record, found `{t}`"))),
        None => return Err(Error::parse(lineno, "empty record")),
    }
    let id: u64 = fields
        .next()
        .ok_or_else(|| Error::parse(lineno, "record has no id"))?
        .parse()
        .map_err(|_| Error::parse(lineno, "record id is not an unsigned integer"))?;
    let values = fields
        .map(|f| {
            f.parse::<f64>()
                .map_err(|_| Error::parse(lineno, format!("`{f}` is not a number")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() != k {
        return Err(Error::Integrity(format!(
            "line {lineno}: {tag} {id} has {} entries but the header declares k = {k}",
            values.len()
        )));
    }
    Ok((id, values))
}

pub fn load_model<R: BufRead>(input: R) -> Result<FactorModel> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| Error::parse(1, "empty model file"))?;
    let mut fields = header.split_ascii_whitespace();
    if fields.next() != Some(MAGIC) {
        return Err(Error::parse(1, format!("missing `{MAGIC}` header")));
    }
    if fields.next() != Some(VERSION) {
        return Err(Error::parse(1, "unsupported model file version"));
    }
    let k = parse_count(fields.next(), "k")?;
    let n_users = parse_count(fields.next(), "n_users")?;
    let n_items = parse_count(fields.next(), "n_items")?;
    if fields.next().is_some() {
        return Err(Error::parse(1, "trailing header fields"));
    }
    if k == 0 {
        return Err(Error::Integrity("header declares k = 0".into()));
    }

    let mut users = Vec::with_capacity(n_users);
    let mut items = Vec::with_capacity(n_items);
    let expected = n_users + n_items;
    let mut lineno = 1;
    for line in lines.by_ref() {
        let line = line?;
        lineno += 1;
        if lineno - 1 > expected {
            return Err(Error::parse(lineno, "more records than the header declares"));
        }
        if lineno - 1 <= n_users {
            let (id, v) = parse_record(&line, lineno, "U", k)?;
            users.push((UserId(id), v));
        } else {
            let (id, v) = parse_record(&line, lineno, "V", k)?;
            items.push((ItemId(id), v));
        }
        if lineno - 1 == expected {
            break;
        }
    }
    if users.len() + items.len() < expected {
        return Err(Error::parse(
            lineno + 1,
            format!(
                "truncated model file: header declares {n_users} users and {n_items} items, found {} and {}",
                users.len(),
                items.len()
            ),
        ));
    }
    for line in lines {
        lineno += 1;
        if !line?.trim().is_empty() {
            return Err(Error::parse(lineno, "more records than the header declares"));
        }
    }
    FactorModel::from_parts(k, users, items)
}

pub fn load_model_from_path(path: impl AsRef<Path>) -> Result<FactorModel> {
    load_model(BufReader::new(File::open(path)?))
}
