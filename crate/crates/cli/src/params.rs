//! `--params-json`: extra flags supplied as a JSON object, for scripted
//! sweeps. `{"t": 0.5, "tgrid": [20, 40]}` becomes `--t 0.5 --tgrid 20,40`.
//! A value starting with `@` names a file holding the object. Flags given
//! explicitly on the command line win.

use serde_json::Value;

fn scalar(v: &Value) -> Result<String, String> {
    match v {
        Value::Number(n) => Ok(n.to_string()),
        Value::String(s) => Ok(s.clone()),
        Value::Bool(b) => Ok(b.to_string()),
        other => Err(format!("unsupported parameter value {other}")),
    }
}

fn load(source: &str) -> Result<Value, String> {
    let text = match source.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?,
        None => source.to_string(),
    };
    serde_json::from_str(&text).map_err(|e| format!("--params-json: {e}"))
}

pub fn expand(args: Vec<String>) -> Result<Vec<String>, String> {
    let mut out = Vec::with_capacity(args.len());
    let mut source = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--params-json" {
            source = Some(it.next().ok_or("--params-json needs a value")?);
        } else if let Some(v) = a.strip_prefix("--params-json=") {
            source = Some(v.to_string());
        } else {
            out.push(a);
        }
    }
    let Some(source) = source else { return Ok(out) };
    let Value::Object(map) = load(&source)? else {
        return Err("--params-json must be a JSON object".into());
    };
    for (key, v) in map {
        let flag = format!("--{key}");
        if out.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}="))) {
            continue;
        }
        let value = match &v {
            Value::Array(items) => items.iter().map(scalar).collect::<Result<Vec<_>, _>>()?.join(","),
            other => scalar(other)?,
        };
        out.push(format!("{flag}={value}"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn merges_and_respects_explicit_flags() {
        let a = expand(argv(r#"matchstat cdf joint --t 1 --params-json {"t":2,"k":3,"j":[4]}"#)).unwrap();
        assert_eq!(a, argv("matchstat cdf joint --t 1 --j=4 --k=3"));
        assert!(expand(argv("matchstat --params-json [1]")).is_err());
        assert!(expand(argv("matchstat --params-json")).is_err());
    }
}
