//! `--config <file>`: a flat `key=value` file whose entries act as flags
//! placed before the ones given on the command line, so explicit flags win.

use std::fs;

/// Expands `--config <file>` / `--config=<file>` into flag tokens inserted
/// right after the subcommand name.
pub fn expand(args: Vec<String>) -> Result<Vec<String>, String> {
    let mut path = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or("--config needs a file path")?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config file {path}: {e}"))?;
    let injected = parse(&text)?;
    if rest.len() < 2 {
        return Err("--config must follow a subcommand".into());
    }
    let mut out = rest[..2].to_vec();
    out.extend(injected);
    out.extend_from_slice(&rest[2..]);
    Ok(out)
}

fn parse(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("config line {}: expected key=value", n + 1))?;
        let (k, v) = (k.trim().replace('_', "-"), v.trim());
        if k.is_empty() {
            return Err(format!("config line {}: empty key", n + 1));
        }
        match v {
            "true" => out.push(format!("--{k}")),
            "false" => {}
            _ => out.push(format!("--{k}={v}")),
        }
    }
    Ok(out)
}
