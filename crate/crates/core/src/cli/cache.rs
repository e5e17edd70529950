//! Sequence cache: a `markoff-seq v1` header, then `k x0 x1 x2` per line.

use std::fs;
use std::io::Write;
use std::path::Path;

use rug::Integer;

use crate::error::{Error, Result};
use crate::matseq::{MarkoffSequence, SymMat2};

pub const CACHE_HEADER: &str = "markoff-seq v1";

/// Serializes terms `1..=upto`.
pub fn cache_string(seq: &MarkoffSequence, upto: usize) -> Result<String> {
    let v = seq.view(upto)?;
    let mut out = String::from(CACHE_HEADER);
    out.push('\n');
    for (k, m) in v.iter().take(upto) {
        out.push_str(&format!("{k} {} {} {}\n", m.x0, m.x1, m.x2));
    }
    Ok(out)
}

/// Writes terms `1..=upto` atomically.
pub fn write_cache(path: &Path, seq: &MarkoffSequence, upto: usize) -> Result<()> {
    write_atomic(path, cache_string(seq, upto)?.as_bytes())
}

/// Parses a cache; every stored term past the seed is re-derived and compared.
pub fn parse_cache(text: &str) -> Result<MarkoffSequence> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CACHE_HEADER => {}
        _ => {
            return Err(Error::Format {
                line: 1,
                msg: format!("expected header `{CACHE_HEADER}`"),
            })
        }
    }
    let mut terms = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if toks.len() != 4 {
            return Err(Error::Format {
                line,
                msg: format!("expected `k x0 x1 x2`, found {} tokens", toks.len()),
            });
        }
        let mut nums = Vec::with_capacity(4);
        for t in &toks {
            nums.push(t.parse::<Integer>().map_err(|_| Error::Format {
                line,
                msg: format!("`{t}` is not an integer"),
            })?);
        }
        let expected = terms.len() + 1;
        if nums[0] != expected {
            return Err(Error::Format {
                line,
                msg: format!("index gap: expected term {expected}, found {}", nums[0]),
            });
        }
        let [_, x0, x1, x2]: [Integer; 4] = nums.try_into().expect("four tokens");
        let m = SymMat2::new(x0, x1, x2).map_err(|e| match e {
            Error::InvariantViolation(msg) => Error::InvariantViolation(format!("line {line}: {msg}")),
            other => other,
        })?;
        terms.push(m);
    }
    MarkoffSequence::from_terms(terms)
}

pub fn read_cache(path: &Path) -> Result<MarkoffSequence> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_cache(&text)
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let seq = MarkoffSequence::canonical();
        let text = cache_string(&seq, 7).unwrap();
        let back = parse_cache(&text).unwrap();
        assert_eq!(cache_string(&back, 7).unwrap(), text);
    }

    #[test]
    fn seed_only() {
        let seq = parse_cache("markoff-seq v1\n1 1 0 1\n2 1 1 2\n").unwrap();
        assert_eq!(seq.view(5).unwrap().x(5, 0), &29);
    }

    #[test]
    fn rejects_bad_input() {
        let line = |r: Result<MarkoffSequence>| match r {
            Err(Error::Format { line, .. }) => line,
            other => panic!("expected a format error, got {other:?}"),
        };
        assert_eq!(line(parse_cache("markoff v0\n")), 1);
        assert_eq!(line(parse_cache("markoff-seq v1\n1 1 0 1\n2 1 one 2\n")), 3);
        assert_eq!(line(parse_cache("markoff-seq v1\n1 1 0 1\n3 1 1 2\n")), 3);
        let det = parse_cache("markoff-seq v1\n1 1 0 1\n2 1 1 2\n3 2 1 7\n");
        assert!(matches!(det, Err(Error::InvariantViolation(_))));
        let wrong = parse_cache("markoff-seq v1\n1 1 0 1\n2 1 1 2\n3 1 0 1\n");
        assert!(matches!(wrong, Err(Error::OracleMismatch(_))));
    }
}
