//! Line-oriented model files.
//!
//! ```text
//! # comments run to the end of the line
//! system {
//!   dim = 2
//!   f1 = -x1
//!   f2 = x2
//!   domain = [-4, 4] x [-4, 4]
//!   init = [4, 4] x [-1, 1]
//! }
//! partition {
//!   name = phi1
//!   phi = x1^2
//!   levels = [0, 1, 4, 16]
//! }
//! options {
//!   grid = 201
//!   seed = 42
//! }
//! ```
//!
//! Each block opens with `<kind> {` and closes with `}` on a line of its own.
//! Entries are `key = value`, one per line. `system` is required and must come
//! first; `partition` may repeat; `options` is optional and every key in it
//! defaults. Numbers accept `inf` and `-inf`. `proper_candidates` takes a
//! sequence of bracketed points, `[0.3, 0] [1, 2]`.

use crate::config::Options;
use crate::dynsys::{BoxDomain, DynSystem};
use crate::expr::{parse, Expr};
use crate::partition::PartitionFunction;
use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ModelError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{block} block (line {line}): {message}")]
    Semantic {
        block: String,
        line: usize,
        message: String,
    },
    #[error("{0}")]
    Io(String),
}

/// A fully validated model: system, partition functions and options.
#[derive(Clone, Debug)]
pub struct Model {
    pub system: DynSystem,
    pub families: Vec<PartitionFunction>,
    pub options: Options,
}

#[derive(Debug)]
struct Entry {
    value: String,
    line: usize,
    /// 1-based column of the first character of `value`.
    column: usize,
}

#[derive(Debug)]
struct Block {
    kind: String,
    line: usize,
    entries: BTreeMap<String, Entry>,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ModelError {
    ModelError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn strip_comment(s: &str) -> &str {
    s.find('#').map_or(s, |i| &s[..i])
}

fn split_blocks(src: &str) -> Result<Vec<Block>, ModelError> {
    let mut blocks = Vec::new();
    let mut open: Option<Block> = None;
    let mut last_line = 0;
    for (i, raw) in src.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let text = strip_comment(raw);
        let trimmed = text.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = text.len() - text.trim_start().len();
        match open.as_mut() {
            None => {
                let Some(head) = trimmed.strip_suffix('{') else {
                    return Err(syntax(line, indent + 1, "expected `<block> {`"));
                };
                let kind = head.trim();
                if !matches!(kind, "system" | "partition" | "options") {
                    return Err(syntax(
                        line,
                        indent + 1,
                        format!("unknown block `{kind}`, expected system, partition or options"),
                    ));
                }
                open = Some(Block {
                    kind: kind.to_string(),
                    line,
                    entries: BTreeMap::new(),
                });
            }
            Some(block) => {
                if trimmed == "}" {
                    blocks.push(open.take().expect("block is open"));
                    continue;
                }
                let Some(eq) = text.find('=') else {
                    return Err(syntax(line, indent + 1, "expected `key = value`"));
                };
                let key = text[..eq].trim();
                if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(syntax(line, indent + 1, format!("invalid key `{key}`")));
                }
                let rest = &text[eq + 1..];
                let lead = rest.len() - rest.trim_start().len();
                let value = rest.trim();
                let column = eq + 2 + lead;
                if value.is_empty() {
                    return Err(syntax(line, column, format!("missing value for `{key}`")));
                }
                if block.entries.contains_key(key) {
                    return Err(syntax(line, indent + 1, format!("duplicate key `{key}`")));
                }
                block.entries.insert(
                    key.to_string(),
                    Entry {
                        value: value.to_string(),
                        line,
                        column,
                    },
                );
            }
        }
    }
    if let Some(b) = open {
        return Err(syntax(
            last_line.max(b.line),
            1,
            format!("{} block opened on line {} is not closed", b.kind, b.line),
        ));
    }
    Ok(blocks)
}

fn parse_number(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" | "+inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        t if t
            .chars()
            .any(|c| c.is_ascii_alphabetic() && c != 'e' && c != 'E') =>
        {
            None
        }
        t => t.parse().ok().filter(|v: &f64| !v.is_nan()),
    }
}

/// Splits `[a, b] [c, d] ...` (with optional `x` separators) into the
/// comma lists inside the brackets, with the column of each group.
fn bracket_groups(e: &Entry, sep_x: bool) -> Result<Vec<(Vec<f64>, usize)>, ModelError> {
    let s = &e.value;
    let mut groups = Vec::new();
    let mut i = 0;
    let bytes = s.as_bytes();
    let mut expect_sep = false;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let col = e.column + i;
        if expect_sep && sep_x {
            if c != 'x' {
                return Err(syntax(e.line, col, "expected `x` between intervals"));
            }
            expect_sep = false;
            i += 1;
            continue;
        }
        if c != '[' {
            return Err(syntax(e.line, col, "expected `[`"));
        }
        let Some(close) = s[i..].find(']') else {
            return Err(syntax(e.line, col, "unclosed `[`"));
        };
        let inner = &s[i + 1..i + close];
        let mut nums = Vec::new();
        let mut off = i + 1;
        if !inner.trim().is_empty() {
            for part in inner.split(',') {
                let lead = part.len() - part.trim_start().len();
                let v = parse_number(part).ok_or_else(|| {
                    syntax(
                        e.line,
                        e.column + off + lead,
                        format!("malformed number `{}`", part.trim()),
                    )
                })?;
                nums.push(v);
                off += part.len() + 1;
            }
        }
        groups.push((nums, col));
        i += close + 1;
        expect_sep = true;
    }
    if sep_x && !expect_sep && !groups.is_empty() {
        return Err(syntax(e.line, e.column + s.len(), "trailing `x`"));
    }
    Ok(groups)
}

fn parse_box(e: &Entry, block: &Block) -> Result<BoxDomain, ModelError> {
    let groups = bracket_groups(e, true)?;
    let mut bounds = Vec::with_capacity(groups.len());
    for (nums, col) in groups {
        let [lo, hi] = nums[..] else {
            return Err(syntax(e.line, col, "an interval needs exactly two bounds"));
        };
        bounds.push((lo, hi));
    }
    BoxDomain::from_intervals(&bounds).map_err(|err| semantic(block, e.line, err.to_string()))
}

fn semantic(block: &Block, line: usize, message: impl Into<String>) -> ModelError {
    ModelError::Semantic {
        block: block.kind.clone(),
        line,
        message: message.into(),
    }
}

fn parse_expr(e: &Entry, dim: usize) -> Result<Expr, ModelError> {
    parse(&e.value, dim).map_err(|err| syntax(e.line, e.column + err.pos, err.kind.to_string()))
}

fn take<'a>(block: &'a Block, key: &str) -> Result<&'a Entry, ModelError> {
    block
        .entries
        .get(key)
        .ok_or_else(|| semantic(block, block.line, format!("missing `{key}`")))
}

fn check_keys(block: &Block, allowed: &[&str]) -> Result<(), ModelError> {
    for (k, e) in &block.entries {
        if !allowed.contains(&k.as_str()) {
            return Err(syntax(
                e.line,
                e.column,
                format!("unknown key `{k}` in {} block", block.kind),
            ));
        }
    }
    Ok(())
}

fn parse_system(block: &Block) -> Result<DynSystem, ModelError> {
    let dim_e = take(block, "dim")?;
    let dim: usize = dim_e
        .value
        .parse()
        .ok()
        .filter(|&d| d >= 1)
        .ok_or_else(|| syntax(dim_e.line, dim_e.column, "dim must be a positive integer"))?;
    let field_keys: Vec<String> = (1..=dim).map(|i| format!("f{i}")).collect();
    let mut allowed: Vec<&str> = vec!["dim", "domain", "init"];
    allowed.extend(field_keys.iter().map(String::as_str));
    check_keys(block, &allowed)?;
    let field = field_keys
        .iter()
        .map(|k| parse_expr(take(block, k)?, dim))
        .collect::<Result<Vec<_>, _>>()?;
    let dom_e = take(block, "domain")?;
    let domain = parse_box(dom_e, block)?;
    if domain.dim() != dim {
        return Err(semantic(
            block,
            dom_e.line,
            format!("domain has {} intervals but dim = {dim}", domain.dim()),
        ));
    }
    let init = block
        .entries
        .get("init")
        .map(|e| parse_box(e, block))
        .transpose()?;
    let line = block.entries.get("init").map_or(block.line, |e| e.line);
    DynSystem::new(field, domain, init).map_err(|err| semantic(block, line, err.to_string()))
}

fn parse_partition(block: &Block, sys: &DynSystem) -> Result<PartitionFunction, ModelError> {
    check_keys(block, &["name", "phi", "levels"])?;
    let name_e = take(block, "name")?;
    if !name_e
        .value
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
    {
        return Err(syntax(
            name_e.line,
            name_e.column,
            "names use letters, digits, `_` and `-`",
        ));
    }
    let phi = parse_expr(take(block, "phi")?, sys.dim())?;
    let lv_e = take(block, "levels")?;
    let groups = bracket_groups(lv_e, false)?;
    let [(levels, _)] = &groups[..] else {
        return Err(syntax(
            lv_e.line,
            lv_e.column,
            "levels must be a single `[a0, a1, ...]` list",
        ));
    };
    let block_name = Block {
        kind: format!("partition `{}`", name_e.value),
        line: block.line,
        entries: BTreeMap::new(),
    };
    PartitionFunction::new(name_e.value.clone(), phi, levels.clone(), sys)
        .map_err(|err| semantic(&block_name, lv_e.line, err.to_string()))
}

macro_rules! option_fields {
    ($m:ident; $($int:ident),*; $($float:ident),*) => {
        const OPTION_KEYS: &[&str] = &[$(stringify!($int),)* $(stringify!($float),)* "proper_candidates"];

        fn apply_option(opts: &mut Options, key: &str, e: &Entry) -> Result<(), ModelError> {
            match key {
                $(stringify!($int) => {
                    opts.$int = e.value.parse().map_err(|_| {
                        syntax(e.line, e.column, format!("`{key}` must be a nonnegative integer"))
                    })?;
                })*
                $(stringify!($float) => {
                    opts.$float = parse_number(&e.value).ok_or_else(|| {
                        syntax(e.line, e.column, format!("`{key}` must be a number"))
                    })?;
                })*
                "proper_candidates" => {
                    opts.proper_candidates = bracket_groups(e, false)?.into_iter().map(|g| g.0).collect();
                }
                _ => unreachable!("keys are checked first"),
            }
            Ok(())
        }

        fn write_options(out: &mut String, $m: &Options) {
            let d = Options::default();
            $(if $m.$int != d.$int {
                let _ = writeln!(out, "  {} = {}", stringify!($int), $m.$int);
            })*
            $(if $m.$float.to_bits() != d.$float.to_bits() {
                let _ = writeln!(out, "  {} = {}", stringify!($float), number($m.$float));
            })*
            if !$m.proper_candidates.is_empty() {
                let groups: Vec<String> = $m.proper_candidates.iter().map(|p| list(p)).collect();
                let _ = writeln!(out, "  proper_candidates = {}", groups.join(" "));
            }
        }
    };
}

option_fields!(o;
    grid, seed, samples_per_level, extra_level_pairs, init_samples, n_traj, t_grid_points,
    sync_samples, invariance_samples, equilibrium_seeds;
    rk4_step, t_max, tol_complete, tol_complete_rel, tol_psi, tol_grad, t_grid_max,
    manifold_delta, manifold_horizon, manifold_tol, proper_radius, proper_tol, invariance_t_probe);

fn parse_options(block: &Block) -> Result<Options, ModelError> {
    check_keys(block, OPTION_KEYS)?;
    let mut opts = Options::default();
    for (k, e) in &block.entries {
        apply_option(&mut opts, k, e)?;
    }
    let positive = [("rk4_step", opts.rk4_step), ("t_max", opts.t_max)];
    for (k, v) in positive {
        if !(v > 0.0 && v.is_finite()) {
            let line = block.entries.get(k).map_or(block.line, |e| e.line);
            return Err(semantic(
                block,
                line,
                format!("`{k}` must be positive and finite"),
            ));
        }
    }
    Ok(opts)
}

/// Parses and validates a model file's text.
pub fn parse_model(src: &str) -> Result<Model, ModelError> {
    let blocks = split_blocks(src)?;
    let systems: Vec<&Block> = blocks.iter().filter(|b| b.kind == "system").collect();
    let sys_block = match systems[..] {
        [b] => b,
        [] => return Err(syntax(1, 1, "missing system block")),
        [_, b, ..] => return Err(syntax(b.line, 1, "only one system block is allowed")),
    };
    if let Some(b) = blocks.iter().take_while(|b| b.kind != "system").next() {
        return Err(syntax(b.line, 1, "the system block must come first"));
    }
    let system = parse_system(sys_block)?;
    let mut families: Vec<PartitionFunction> = Vec::new();
    let mut options = None;
    for b in &blocks {
        match b.kind.as_str() {
            "partition" => {
                let pf = parse_partition(b, &system)?;
                if families.iter().any(|f| f.name() == pf.name()) {
                    let line = b.entries["name"].line;
                    return Err(semantic(
                        b,
                        line,
                        format!("duplicate partition name `{}`", pf.name()),
                    ));
                }
                families.push(pf);
            }
            "options" => {
                if options.is_some() {
                    return Err(syntax(b.line, 1, "only one options block is allowed"));
                }
                options = Some(parse_options(b)?);
            }
            _ => {}
        }
    }
    Ok(Model {
        system,
        families,
        options: options.unwrap_or_default(),
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model, ModelError> {
    let path = path.as_ref();
    let src = std::fs::read_to_string(path)
        .map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))?;
    parse_model(&src)
}

fn number(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:?}")
    }
}

fn list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|&x| number(x)).collect();
    format!("[{}]", parts.join(", "))
}

fn boxed(b: &BoxDomain) -> String {
    let parts: Vec<String> = b
        .lo()
        .iter()
        .zip(b.hi())
        .map(|(&l, &h)| list(&[l, h]))
        .collect();
    parts.join(" x ")
}

/// Prints a model in the file format; [`parse_model`] reads it back to the
/// same system, families and options.
pub fn print_model(m: &Model) -> String {
    let mut out = String::new();
    let sys = &m.system;
    let _ = writeln!(out, "system {{\n  dim = {}", sys.dim());
    for (i, f) in sys.field().iter().enumerate() {
        let _ = writeln!(out, "  f{} = {f}", i + 1);
    }
    let _ = writeln!(out, "  domain = {}", boxed(sys.domain()));
    if let Some(init) = sys.init() {
        let _ = writeln!(out, "  init = {}", boxed(init));
    }
    out.push_str("}\n");
    for pf in &m.families {
        let _ = writeln!(
            out,
            "\npartition {{\n  name = {}\n  phi = {}\n  levels = {}\n}}",
            pf.name(),
            pf.phi(),
            list(pf.levels())
        );
    }
    let mut opts = String::new();
    write_options(&mut opts, &m.options);
    if !opts.is_empty() {
        let _ = write!(out, "\noptions {{\n{opts}}}\n");
    }
    out
}
