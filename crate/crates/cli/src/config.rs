//! `--config PATH`: a file of `key = value` lines, each appended as
//! `--key value` unless the flag is already on the command line.

use anyhow::{bail, Context, Result};
use std::path::Path;

pub fn expand(args: Vec<String>) -> Result<Vec<String>> {
    let Some(path) = config_path(&args)? else {
        return Ok(args);
    };
    let text =
        std::fs::read_to_string(&path).with_context(|| format!("reading config file {path}"))?;
    merge(args, &text, Path::new(&path))
}

fn config_path(args: &[String]) -> Result<Option<String>> {
    for (i, a) in args.iter().enumerate() {
        if let Some(p) = a.strip_prefix("--config=") {
            return Ok(Some(p.to_string()));
        }
        if a == "--config" {
            return match args.get(i + 1) {
                Some(p) => Ok(Some(p.clone())),
                None => bail!("--config needs a path"),
            };
        }
    }
    Ok(None)
}

fn merge(mut args: Vec<String>, text: &str, path: &Path) -> Result<Vec<String>> {
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{}:{}: expected `key = value`", path.display(), n + 1);
        };
        let key = key.trim().trim_start_matches("--");
        let value = value.trim();
        if key == "config" {
            bail!(
                "{}:{}: nested config files are not supported",
                path.display(),
                n + 1
            );
        }
        let flag = format!("--{key}");
        let present = args
            .iter()
            .any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if !present {
            args.push(flag);
            args.push(value.to_string());
        }
    }
    Ok(args)
}
