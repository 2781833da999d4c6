//! `--config <file>` support: the file's `key=value` lines become flags placed
//! right after the subcommand, so anything given on the command line (parsed
//! later, with self-override enabled) wins.

use std::fs;

pub fn expand(args: Vec<String>) -> Result<Vec<String>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config `{path}`: {e}"))?;
    let flags = parse(&text)?;
    let mut out = Vec::with_capacity(args.len() + flags.len());
    out.extend_from_slice(&args[..2]);
    out.extend(flags);
    out.extend_from_slice(&args[2..]);
    Ok(out)
}

fn config_path(args: &[String]) -> Option<String> {
    if args.len() < 2 || args[1].starts_with('-') {
        return None;
    }
    let mut it = args[2..].iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

fn parse(text: &str) -> Result<Vec<String>, String> {
    let mut flags = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| format!("config line {}: expected key=value", n + 1))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(format!("config line {}: bad key", n + 1));
        }
        match value.trim() {
            "true" => flags.push(format!("--{key}")),
            "false" => {}
            v => {
                flags.push(format!("--{key}"));
                flags.push(v.to_string());
            }
        }
    }
    Ok(flags)
}
