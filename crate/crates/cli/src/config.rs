//! Config files as flag defaults.
//!
//! A config is TOML. Top-level keys are global flags; a table named after a
//! subcommand (`[sval]`, `[estimate.boxcount]`, ...) holds that command's
//! flags. Keys are long flag names. Each entry becomes `--key value` unless the
//! same flag already appears on the command line, so flags always win.

use clap::Parser;

pub enum ParseError {
    Clap(clap::Error),
    Config(String),
}

fn flag_given(user: &[String], key: &str) -> bool {
    let long = format!("--{key}");
    let with_eq = format!("--{key}=");
    user.iter().any(|a| *a == long || a.starts_with(&with_eq))
}

fn to_args(table: &toml::Table, user: &[String], out: &mut Vec<String>) -> Result<(), String> {
    for (key, value) in table {
        if value.is_table() || flag_given(user, key) {
            continue;
        }
        let scalar = |v: &toml::Value| -> Result<String, String> {
            match v {
                toml::Value::String(s) => Ok(s.clone()),
                toml::Value::Integer(i) => Ok(i.to_string()),
                toml::Value::Float(f) => Ok(f.to_string()),
                other => Err(format!("config key {key:?}: unsupported value {other}")),
            }
        };
        match value {
            toml::Value::Boolean(true) => out.push(format!("--{key}")),
            toml::Value::Boolean(false) => {}
            toml::Value::Array(items) => {
                let parts: Vec<String> = items.iter().map(scalar).collect::<Result<_, _>>()?;
                out.push(format!("--{key}={}", parts.join(",")));
            }
            v => out.push(format!("--{key}={}", scalar(v)?)),
        }
    }
    Ok(())
}

fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// Parses `argv`, filling unspecified flags from the `--config` file.
pub fn parse_with_config<T: Parser>(argv: &[String]) -> Result<T, ParseError> {
    let Some(path) = config_path(argv) else {
        return T::try_parse_from(argv).map_err(ParseError::Clap);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| ParseError::Config(format!("{path}: {e}")))?;
    let table: toml::Table = text.parse().map_err(|e| ParseError::Config(format!("{path}: {e}")))?;

    // The subcommand chain, found without validating arguments: required
    // flags may come from the config.
    let mut chain = Vec::new();
    let mut cmd = T::command();
    for arg in &argv[1..] {
        let Some(sub) = cmd.find_subcommand(arg).cloned() else { continue };
        chain.push(arg.clone());
        cmd = sub;
    }

    // Remove the subcommand names from the user arguments, then rebuild as
    // `prog <chain> <config flags> <user flags>`; global flags may follow the
    // subcommand.
    let mut user: Vec<String> = argv[1..].to_vec();
    let mut from = 0;
    for name in &chain {
        if let Some(pos) = user[from..].iter().position(|a| a == name) {
            user.remove(from + pos);
            from += pos;
        }
    }
    let mut injected = Vec::new();
    to_args(&table, &user, &mut injected).map_err(ParseError::Config)?;
    let mut node = &table;
    for name in &chain {
        match node.get(name) {
            Some(toml::Value::Table(t)) => {
                to_args(t, &user, &mut injected).map_err(ParseError::Config)?;
                node = t;
            }
            _ => break,
        }
    }
    let mut args = vec![argv[0].clone()];
    args.extend(chain);
    args.extend(injected);
    args.extend(user);
    let matches = T::command().try_get_matches_from(&args).map_err(ParseError::Clap)?;
    T::from_arg_matches(&matches).map_err(ParseError::Clap)
}
