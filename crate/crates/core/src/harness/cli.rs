//! Command-line and config-file parsing into an [`ExperimentSpec`].
//!
//! The config file is flat `key = value` text; keys are the long flag names
//! without the leading dashes (`-` and `_` are interchangeable), `#` starts a
//! comment. Command-line flags override the file regardless of order.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::activations::{ActivationKind, NUM_CANDIDATES};
use crate::harness::grid::{ExperimentSpec, ModelVariant};
use crate::{Error, Result};

pub const USAGE: &str = "\
usage: actroute [options]

Runs the activation-recovery grid: ground truths x models x seeds.
With no options the full default grid (5 x 7 x 5 = 175 runs) is executed.

grid selection
  --truth <list>          ground truths: relu,sigmoid,tanh,lrelu,identity or all
  --model <list>          flex (routed), fixed (all five baselines), a single
                          activation name or fixed-<name>, or all
  --alpha <list>          KL weights for routed models (default 0.3,0)
  --seeds <list>          comma list and/or ranges, e.g. 0-4 or 0,3,7

training
  --epochs <n>            --batch-size <n>        --lr <x>
  --lambda <x>            --tau-start <x>         --tau-end <x>
  --straight-through      hard one-hot forward pass, soft backward pass

data
  --n-train <n>  --n-test <n>  --scale <x>  --leaky-slope <x>

output
  --out <dir>             output directory (default: results)
  --jobs <n>              parallel runs (default: all cores)
  --no-plots              skip SVG figures
  --export-data           also write every train/test split as CSV
  --config <file>         flat key = value file; flags override it
  -h, --help              print this message
";

/// Options that take no value.
const SWITCHES: &[&str] = &["straight-through", "export-data", "no-plots"];

const KEYS: &[&str] = &[
    "truth",
    "model",
    "alpha",
    "seeds",
    "epochs",
    "batch-size",
    "lr",
    "lambda",
    "tau-start",
    "tau-end",
    "straight-through",
    "n-train",
    "n-test",
    "scale",
    "leaky-slope",
    "catalog",
    "out",
    "jobs",
    "no-plots",
    "plots",
    "export-data",
    "config",
];

/// True when `args` asks for the usage text.
pub fn wants_help<S: AsRef<str>>(args: &[S]) -> bool {
    args.iter().any(|a| matches!(a.as_ref(), "-h" | "--help"))
}

/// Parses command-line arguments (without the program name).
pub fn parse_cli<S: AsRef<str>>(args: &[S]) -> Result<ExperimentSpec> {
    let cli = collect_flags(args)?;
    let mut settings = match cli.get("config") {
        Some((_, path)) => read_config(Path::new(path))?,
        None => BTreeMap::new(),
    };
    settings.extend(cli);
    build_spec(&settings)
}

/// Parses config-file text into the same spec the equivalent flags give.
pub fn parse_config_str(text: &str) -> Result<ExperimentSpec> {
    build_spec(&config_pairs(text)?)
}

/// Key → (token shown in errors, raw value).
type Settings = BTreeMap<String, (String, String)>;

fn normalize_key(k: &str) -> String {
    k.trim().replace('_', "-").to_ascii_lowercase()
}

fn collect_flags<S: AsRef<str>>(args: &[S]) -> Result<Settings> {
    let mut out = Settings::new();
    let mut it = args.iter().map(AsRef::as_ref);
    while let Some(tok) = it.next() {
        let Some(body) = tok.strip_prefix("--") else {
            return Err(Error::usage(tok, "expected a --flag"));
        };
        let (name, inline) = match body.split_once('=') {
            Some((n, v)) => (n, Some(v)),
            None => (body, None),
        };
        let key = normalize_key(name);
        if !KEYS.contains(&key.as_str()) || key == "plots" || key == "catalog" {
            return Err(Error::usage(tok, "unknown flag"));
        }
        let value = if SWITCHES.contains(&key.as_str()) {
            inline.unwrap_or("true").to_string()
        } else {
            match inline {
                Some(v) => v.to_string(),
                None => it.next().ok_or_else(|| Error::usage(tok, "missing value"))?.to_string(),
            }
        };
        if out.insert(key, (tok.to_string(), value)).is_some() {
            return Err(Error::usage(tok, "flag given more than once"));
        }
    }
    Ok(out)
}

fn read_config(path: &Path) -> Result<Settings> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    config_pairs(&text)
}

fn config_pairs(text: &str) -> Result<Settings> {
    let mut out = Settings::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::usage(line, format!("line {}: expected key = value", n + 1)));
        };
        let key = normalize_key(k);
        if !KEYS.contains(&key.as_str()) || key == "config" {
            return Err(Error::usage(k.trim(), format!("line {}: unknown key", n + 1)));
        }
        let token = k.trim().to_string();
        if out.insert(key, (token.clone(), v.trim().to_string())).is_some() {
            return Err(Error::usage(token, format!("line {}: key given more than once", n + 1)));
        }
    }
    Ok(out)
}

fn parse_num<T: FromStr>(token: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::usage(token, format!("cannot parse `{value}`")))
}

fn parse_bool(token: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::usage(token, format!("expected a boolean, got `{value}`"))),
    }
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_kind(token: &str, s: &str) -> Result<ActivationKind> {
    s.parse().map_err(|_| Error::usage(token, format!("unknown activation `{s}`")))
}

fn parse_truths(token: &str, value: &str) -> Result<Vec<ActivationKind>> {
    let mut out = Vec::new();
    for item in list(value) {
        if item.eq_ignore_ascii_case("all") {
            out.extend(ActivationKind::ALL);
        } else {
            out.push(parse_kind(token, item)?);
        }
    }
    no_duplicates(token, &out)?;
    Ok(out)
}

fn parse_seeds(token: &str, value: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for item in list(value) {
        match item.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (parse_num(token, a)?, parse_num(token, b)?);
                if b < a {
                    return Err(Error::usage(token, format!("empty seed range `{item}`")));
                }
                out.extend(a..=b);
            }
            None => out.push(parse_num(token, item)?),
        }
    }
    if out.is_empty() {
        return Err(Error::usage(token, "seed list is empty"));
    }
    no_duplicates(token, &out)?;
    Ok(out)
}

fn parse_alphas(token: &str, value: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in list(value) {
        let a: f64 = parse_num(token, item)?;
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::usage(token, format!("alpha must be >= 0, got {item}")));
        }
        out.push(a);
    }
    if out.is_empty() {
        return Err(Error::usage(token, "alpha list is empty"));
    }
    if out.iter().enumerate().any(|(i, a)| out[..i].contains(a)) {
        return Err(Error::usage(token, "conflicting grid: repeated alpha"));
    }
    Ok(out)
}

fn no_duplicates<T: PartialEq>(token: &str, xs: &[T]) -> Result<()> {
    if xs.iter().enumerate().any(|(i, x)| xs[..i].contains(x)) {
        return Err(Error::usage(token, "conflicting grid: repeated entry"));
    }
    Ok(())
}

/// Expands the model list; `flex` entries fan out over `alphas`.
fn parse_models(token: &str, value: &str, alphas: &[f64]) -> Result<(Vec<ModelVariant>, bool)> {
    let mut out = Vec::new();
    let mut any_routed = false;
    for item in list(value) {
        let lower = item.to_ascii_lowercase();
        match lower.as_str() {
            "flex" | "routed" | "flex-act" => {
                any_routed = true;
                out.extend(alphas.iter().map(|&a| ModelVariant::routed(a)));
            }
            "fixed" => out.extend(ActivationKind::ALL.map(ModelVariant::fixed)),
            "all" => {
                any_routed = true;
                out.extend(alphas.iter().map(|&a| ModelVariant::routed(a)));
                out.extend(ActivationKind::ALL.map(ModelVariant::fixed));
            }
            other => {
                let name = other.strip_prefix("fixed-").unwrap_or(other);
                out.push(ModelVariant::fixed(parse_kind(token, name)?));
            }
        }
    }
    if out.is_empty() {
        return Err(Error::usage(token, "model list is empty"));
    }
    no_duplicates(token, &out)?;
    Ok((out, any_routed))
}

fn build_spec(s: &Settings) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::default();
    let get = |k: &str| s.get(k).map(|(t, v)| (t.as_str(), v.as_str()));

    if let Some((t, v)) = get("truth") {
        spec.truths = parse_truths(t, v)?;
    }
    let alphas = match get("alpha") {
        Some((t, v)) => parse_alphas(t, v)?,
        None => vec![0.3, 0.0],
    };
    let (model_token, model_value) = get("model").unwrap_or(("--model", "all"));
    let (models, any_routed) = parse_models(model_token, model_value, &alphas)?;
    if let (Some((t, _)), false) = (get("alpha"), any_routed) {
        return Err(Error::usage(t, "conflicting grid: alpha given but no routed model selected"));
    }
    spec.models = models;
    if let Some((t, v)) = get("seeds") {
        spec.seeds = parse_seeds(t, v)?;
    }

    let tc = &mut spec.train;
    if let Some((t, v)) = get("epochs") {
        tc.epochs = parse_num(t, v)?;
    }
    if let Some((t, v)) = get("batch-size") {
        tc.batch_size = parse_num(t, v)?;
    }
    if let Some((t, v)) = get("lr") {
        tc.learning_rate = parse_num(t, v)?;
    }
    if let Some((t, v)) = get("lambda") {
        tc.lambda = parse_num(t, v)?;
        if !(tc.lambda > 0.0 && tc.lambda.is_finite()) {
            return Err(Error::usage(t, format!("lambda must be > 0, got {v}")));
        }
    }
    if let Some((t, v)) = get("tau-start") {
        tc.tau_start = parse_num(t, v)?;
    }
    if let Some((t, v)) = get("tau-end") {
        tc.tau_end = parse_num(t, v)?;
    }
    if let Some((t, v)) = get("straight-through") {
        tc.straight_through = parse_bool(t, v)?;
    }

    if let Some((t, v)) = get("n-train") {
        spec.data.n_train = parse_num(t, v)?;
    }
    if let Some((t, v)) = get("n-test") {
        spec.data.n_test = parse_num(t, v)?;
    }
    if let Some((t, v)) = get("scale") {
        spec.data.scale = parse_num(t, v)?;
    }
    if let Some((t, v)) = get("leaky-slope") {
        spec.data.leaky_slope = parse_num(t, v)?;
    }
    if let Some((t, v)) = get("catalog") {
        // The candidate order is fixed; the key exists so config files can
        // state it explicitly, and a mismatch is an error rather than a reorder.
        let given: Vec<String> = list(v).map(str::to_ascii_lowercase).collect();
        let kinds: Result<Vec<ActivationKind>> = given.iter().map(|g| parse_kind(t, g)).collect();
        if kinds? != ActivationKind::ALL || given.len() != NUM_CANDIDATES {
            return Err(Error::usage(t, "catalog order is fixed: relu, sigmoid, tanh, lrelu, identity"));
        }
    }

    if let Some((_, v)) = get("out") {
        spec.out = PathBuf::from(v);
    }
    if let Some((t, v)) = get("jobs") {
        spec.jobs = parse_num(t, v)?;
    }
    if let Some((t, v)) = get("plots") {
        spec.plots = parse_bool(t, v)?;
    }
    if let Some((t, v)) = get("no-plots") {
        spec.plots = !parse_bool(t, v)?;
    }
    if let Some((t, v)) = get("export-data") {
        spec.export_data = parse_bool(t, v)?;
    }

    spec.validate().map_err(|e| match e {
        Error::InvalidConfig(m) => Error::usage("<grid>", m),
        other => other,
    })?;
    Ok(spec)
}
