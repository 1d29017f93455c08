//! Plain-text interchange formats.
//!
//! Tagged corpus: one `<char>\t<tag>` per line, a blank line between
//! sentences, UTF-8 without BOM. An optional `# id = <id>` line before a
//! sentence names it; unnamed sentences get `s<k>` (1-based). Dictionary: one
//! term per line, blank lines and `#` comments ignored. Emissions: a header
//! `<id> <n> <k>` followed by `n` rows of `k` floats; several blocks may
//! follow one another. Raw input: one sentence per line, optionally
//! `<id>\t<text>`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use radext_core::tagscheme::{Tag, TagSequence, NUM_TAGS};
use radext_core::{EmissionMatrix, SecondaryPartDictionary, Sentence};

use crate::error::{Error, Result};

const ID_DIRECTIVE: &str = "# id = ";
const SOURCE_DIRECTIVE: &str = "# source = ";

pub(crate) fn read_text(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(&[0xEF, 0xBB, 0xBF]) {
        return Err(Error::format(path, 1, "byte-order mark is not allowed"));
    }
    String::from_utf8(bytes).map_err(|e| Error::format(path, 0, format!("invalid UTF-8: {e}")))
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
}

/// Parses a tagged corpus held in memory. `path` is only used in messages.
pub fn parse_tagged_corpus(text: &str, path: &Path) -> Result<Vec<(Sentence, TagSequence)>> {
    let mut out = Vec::new();
    let mut chars: Vec<char> = Vec::new();
    let mut tags: Vec<Tag> = Vec::new();
    let mut id: Option<String> = None;
    let mut source: Option<String> = None;
    let mut last_line = 0;

    let mut flush = |chars: &mut Vec<char>,
                     tags: &mut Vec<Tag>,
                     id: &mut Option<String>,
                     source: &mut Option<String>,
                     line: usize|
     -> Result<()> {
        if chars.is_empty() {
            if id.is_some() || source.is_some() {
                return Err(Error::format(path, line, "sentence header without characters"));
            }
            return Ok(());
        }
        let name = id.take().unwrap_or_else(|| format!("s{}", out.len() + 1));
        let mut s = Sentence::new(name.clone(), std::mem::take(chars))?;
        if let Some(src) = source.take() {
            s = s.with_source(src);
        }
        out.push((s, TagSequence::new(name, std::mem::take(tags))));
        Ok(())
    };

    for (no, line) in lines(text) {
        last_line = no;
        if line.is_empty() {
            flush(&mut chars, &mut tags, &mut id, &mut source, no)?;
            continue;
        }
        if !line.contains('\t') {
            if let Some(rest) = line.strip_prefix(ID_DIRECTIVE) {
                if !chars.is_empty() {
                    flush(&mut chars, &mut tags, &mut id, &mut source, no)?;
                }
                id = Some(rest.to_string());
                continue;
            }
            if let Some(rest) = line.strip_prefix(SOURCE_DIRECTIVE) {
                source = Some(rest.to_string());
                continue;
            }
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(Error::format(
                path,
                no,
                format!("malformed line `{line}`: expected `<char>\\t<tag>`"),
            ));
        }
        let mut it = fields[0].chars();
        let (Some(c), None) = (it.next(), it.next()) else {
            return Err(Error::format(
                path,
                no,
                format!("malformed line `{line}`: first field must be one character"),
            ));
        };
        let tag: Tag = fields[1]
            .parse()
            .map_err(|_| Error::format(path, no, format!("unknown tag `{}`", fields[1])))?;
        chars.push(c);
        tags.push(tag);
    }
    flush(&mut chars, &mut tags, &mut id, &mut source, last_line)?;
    if out.is_empty() {
        return Err(Error::EmptyFile { path: path.into() });
    }
    Ok(out)
}

pub fn read_tagged_corpus(path: &Path) -> Result<Vec<(Sentence, TagSequence)>> {
    parse_tagged_corpus(&read_text(path)?, path)
}

pub fn format_tagged_corpus(corpus: &[(Sentence, TagSequence)]) -> String {
    let mut out = String::new();
    for (s, tags) in corpus {
        let _ = writeln!(out, "{ID_DIRECTIVE}{}", s.id);
        if let Some(src) = &s.source_report_id {
            let _ = writeln!(out, "{SOURCE_DIRECTIVE}{src}");
        }
        for (c, t) in s.chars().iter().zip(&tags.tags) {
            let _ = writeln!(out, "{c}\t{t}");
        }
        out.push('\n');
    }
    out
}

pub fn write_tagged_corpus(corpus: &[(Sentence, TagSequence)], path: &Path) -> Result<()> {
    fs::write(path, format_tagged_corpus(corpus)).map_err(|e| Error::io(path, e))
}

pub fn parse_dictionary(text: &str, path: &Path) -> Result<SecondaryPartDictionary> {
    let terms: Vec<&str> = lines(text)
        .map(|(_, l)| l.trim())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    SecondaryPartDictionary::new(terms).map_err(|source| Error::Invalid {
        path: path.into(),
        source,
    })
}

pub fn read_dictionary(path: &Path) -> Result<SecondaryPartDictionary> {
    parse_dictionary(&read_text(path)?, path)
}

/// Parses every emission block in `text`.
pub fn parse_emissions(text: &str, path: &Path) -> Result<Vec<EmissionMatrix>> {
    let mut blocks = Vec::new();
    let mut rows = lines(text).filter(|(_, l)| !l.trim().is_empty()).peekable();
    while let Some((no, header)) = rows.next() {
        let parts: Vec<&str> = header.split_whitespace().collect();
        let parsed = match parts.as_slice() {
            [id, n, k] => n.parse::<usize>().ok().zip(k.parse::<usize>().ok()).map(|d| (*id, d)),
            _ => None,
        };
        let Some((id, (n, k))) = parsed else {
            return Err(Error::format(path, no, format!("expected header `<id> <n> <k>`, found `{header}`")));
        };
        if k != NUM_TAGS {
            return Err(Error::Invalid {
                path: path.into(),
                source: radext_core::Error::TagCountMismatch(k),
            });
        }
        let mut values = Vec::with_capacity(n * k);
        for r in 0..n {
            let Some((rno, row)) = rows.next() else {
                return Err(Error::Invalid {
                    path: path.into(),
                    source: radext_core::Error::DimensionMismatch { expected: n, found: r },
                });
            };
            let nums: Vec<&str> = row.split_whitespace().collect();
            if nums.len() != k {
                return Err(Error::format(
                    path,
                    rno,
                    format!("dimension mismatch: expected {k} values, found {}", nums.len()),
                ));
            }
            for v in nums {
                let x: f64 = v
                    .parse()
                    .map_err(|_| Error::format(path, rno, format!("not a number: `{v}`")))?;
                if !x.is_finite() {
                    return Err(Error::format(path, rno, format!("non-finite value `{v}`")));
                }
                values.push(x);
            }
        }
        let m = EmissionMatrix::new(id, n, values).map_err(|source| Error::Invalid {
            path: path.into(),
            source,
        })?;
        blocks.push(m);
    }
    Ok(blocks)
}

/// Reads a file holding exactly one emission block.
pub fn read_emissions(path: &Path) -> Result<EmissionMatrix> {
    let mut blocks = parse_emissions(&read_text(path)?, path)?;
    match blocks.len() {
        0 => Err(Error::EmptyFile { path: path.into() }),
        1 => Ok(blocks.remove(0)),
        n => Err(Error::format(path, 0, format!("expected one emission block, found {n}"))),
    }
}

/// Reads every emission block in a file.
pub fn read_emission_blocks(path: &Path) -> Result<Vec<EmissionMatrix>> {
    parse_emissions(&read_text(path)?, path)
}

pub fn format_emissions(blocks: &[EmissionMatrix]) -> String {
    let mut out = String::new();
    for m in blocks {
        let _ = writeln!(out, "{} {} {}", m.sentence_id, m.rows(), NUM_TAGS);
        for i in 0..m.rows() {
            let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
    }
    out
}

/// Raw sentences, one per non-blank line.
pub fn parse_sentences(text: &str, path: &Path) -> Result<Vec<Sentence>> {
    let mut out = Vec::new();
    for (no, line) in lines(text) {
        if line.trim().is_empty() {
            continue;
        }
        let (id, body) = match line.split_once('\t') {
            Some((id, body)) => (id.to_string(), body),
            None => (format!("s{}", out.len() + 1), line),
        };
        let s = Sentence::from_text(id, body).map_err(|_| Error::format(path, no, "sentence text is empty"))?;
        out.push(s);
    }
    Ok(out)
}

pub fn read_sentences(path: &Path) -> Result<Vec<Sentence>> {
    parse_sentences(&read_text(path)?, path)
}
