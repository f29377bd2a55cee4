//! Flat `key=value` config files merged underneath command-line flags.
//!
//! Each entry becomes `--key value` and is spliced in right after the
//! subcommand words, ahead of the user's own flags. Every argument overrides
//! itself, so a flag given on the command line wins over the file.

use std::path::Path;

use crate::CliError;

/// Parses `key=value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "config line {}: expected key=value, got {line:?}",
                lineno + 1
            )));
        };
        let key = key.trim();
        if key.is_empty() || key.starts_with('-') {
            return Err(CliError::Usage(format!("config line {}: bad key {key:?}", lineno + 1)));
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Expands `--config FILE` (or `--config=FILE`) into flags.
pub fn expand_args(args: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut path = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            let p = it
                .next()
                .ok_or_else(|| CliError::Usage("--config needs a file".into()))?;
            path = Some(p);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::Usage(format!("cannot read config {path}: {e}")))?;
    let entries = parse(&text)?;

    // Insert after the program name and the leading positional words
    // (subcommand, dataset or experiment name).
    let at = 1 + rest
        .iter()
        .skip(1)
        .take_while(|a| !a.starts_with('-'))
        .count();
    let injected = entries
        .into_iter()
        .flat_map(|(k, v)| [format!("--{k}"), v]);
    rest.splice(at..at, injected);
    Ok(rest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blanks() {
        let e = parse("# header\nk = 20\n\ngamma=0.1 # trailing\n").unwrap();
        assert_eq!(e, vec![("k".into(), "20".into()), ("gamma".into(), "0.1".into())]);
    }

    #[test]
    fn rejects_lines_without_equals() {
        assert!(matches!(parse("k 20"), Err(CliError::Usage(_))));
    }

    #[test]
    fn injects_before_user_flags() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.conf");
        std::fs::write(&p, "k=5\n").unwrap();
        let args = ["grad-dr", "embed", "--config", p.to_str().unwrap(), "--k", "7"]
            .map(String::from)
            .to_vec();
        let out = expand_args(args).unwrap();
        assert_eq!(out, ["grad-dr", "embed", "--k", "5", "--k", "7"]);
    }
}
