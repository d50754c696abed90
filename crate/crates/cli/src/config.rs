//! `--config FILE`: `key=value` lines become `--key=value` flags placed before
//! the command line, so explicit flags override them.

use std::ffi::OsString;
use std::fs;

pub fn merged_args(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let mut path = None;
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let Some(s) = a.to_str() else { continue };
        if s == "--config" {
            path = it.next().cloned();
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(p.into());
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.to_string_lossy()))?;
    let mut out = vec![args[0].clone()];
    out.extend(parse(&text)?.into_iter().map(OsString::from));
    out.extend(args.into_iter().skip(1));
    Ok(out)
}

fn parse(text: &str) -> Result<Vec<String>, String> {
    let mut flags = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| format!("config line {}: expected key=value", i + 1))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" || key == "command" {
            return Err(format!("config line {}: key '{key}' not allowed", i + 1));
        }
        flags.push(format!("--{key}={}", value.trim()));
    }
    Ok(flags)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lines_become_flags() {
        let f = parse("# comment\nbeta = 2.5\n\ngrid_points=100 # trailing\n").unwrap();
        assert_eq!(f, ["--beta=2.5", "--grid-points=100"]);
        assert!(parse("beta").is_err());
        assert!(parse("command=solve").is_err());
    }
}
