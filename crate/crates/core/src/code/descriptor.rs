//! Text descriptors for code instances.
//!
//! ```text
//! alignstore-code v1
//! n=6
//! k=3
//! d=4
//! m=1
//! q=65537
//! generator=chacha20-v1
//! seed=0
//! attempt=0
//! end
//! ```
//!
//! Explicit codes use `generator=explicit` and carry a `matrices` section
//! with one `G[i,l]=x1,x2,...` line per submatrix before `end`. A seeded
//! descriptor without `attempt` is rebuilt by rerunning construction.

use std::collections::BTreeMap;

use thiserror::Error;

use super::generator::{self, CoefficientGenerator};
use super::instance::{construct_with, seeded_attempt, CodeInstance, CodeOrigin};
use super::params::CodeParams;
use super::CodeError;
use crate::field::PrimeField;
use crate::linalg::DiagonalMatrix;
use crate::registry::Registry;

pub const DESCRIPTOR_MAGIC: &str = "alignstore-code";
pub const DESCRIPTOR_VERSION: &str = "v1";
const EXPLICIT: &str = "explicit";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DescriptorError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported descriptor version {found:?} (expected {DESCRIPTOR_VERSION})")]
    VersionMismatch { found: String },
    #[error(transparent)]
    Code(#[from] CodeError),
}

fn parse_err(line: usize, message: impl Into<String>) -> DescriptorError {
    DescriptorError::Parse {
        line,
        message: message.into(),
    }
}

pub fn describe_code(code: &CodeInstance) -> String {
    let p = code.params();
    let mut out = format!("{DESCRIPTOR_MAGIC} {DESCRIPTOR_VERSION}\n");
    for (key, value) in [("n", p.n), ("k", p.k), ("d", p.d), ("m", p.m)] {
        out.push_str(&format!("{key}={value}\n"));
    }
    out.push_str(&format!("q={}\n", p.q));
    match code.origin() {
        CodeOrigin::Seeded {
            generator,
            seed,
            attempt,
        } => {
            out.push_str(&format!("generator={generator}\nseed={seed}\nattempt={attempt}\n"));
        }
        CodeOrigin::Explicit => {
            out.push_str(&format!("generator={EXPLICIT}\nseed={}\n", p.seed));
            out.push_str("matrices\n");
            for ((i, l), g) in code.submatrices() {
                let entries: Vec<String> = g.entries().iter().map(u64::to_string).collect();
                out.push_str(&format!("G[{i},{l}]={}\n", entries.join(",")));
            }
        }
    }
    out.push_str("end\n");
    out
}

pub fn load_code(text: &str) -> Result<CodeInstance, DescriptorError> {
    load_code_with(text, &generator::default_registry())
}

pub fn load_code_with(
    text: &str,
    generators: &Registry<dyn CoefficientGenerator>,
) -> Result<CodeInstance, DescriptorError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));

    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty descriptor"))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(DESCRIPTOR_MAGIC) {
        return Err(parse_err(
            1,
            format!("expected header '{DESCRIPTOR_MAGIC} {DESCRIPTOR_VERSION}'"),
        ));
    }
    let version = parts.next().ok_or_else(|| parse_err(1, "missing version"))?;
    if version != DESCRIPTOR_VERSION {
        return Err(DescriptorError::VersionMismatch {
            found: version.to_string(),
        });
    }
    if parts.next().is_some() {
        return Err(parse_err(1, "trailing text after version"));
    }

    let mut keys: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    let mut matrix_lines = Vec::new();
    let mut in_matrices = false;
    let mut terminated = false;
    let mut last_line = 1;
    for (no, line) in lines.by_ref() {
        last_line = no;
        if line == "end" {
            terminated = true;
            break;
        }
        if line == "matrices" {
            if in_matrices {
                return Err(parse_err(no, "duplicate matrices section"));
            }
            in_matrices = true;
            continue;
        }
        if in_matrices {
            matrix_lines.push((no, line));
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(no, format!("expected key=value, found {line:?}")))?;
        if !matches!(key, "n" | "k" | "d" | "m" | "q" | "generator" | "seed" | "attempt") {
            return Err(parse_err(no, format!("unknown key {key:?}")));
        }
        if keys.insert(key, (no, value)).is_some() {
            return Err(parse_err(no, format!("duplicate key {key:?}")));
        }
    }
    if !terminated {
        return Err(parse_err(last_line, "truncated descriptor: missing 'end'"));
    }
    if let Some((no, line)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(parse_err(no, format!("unexpected text after 'end': {line:?}")));
    }

    let get = |key: &str| {
        keys.get(key)
            .copied()
            .ok_or_else(|| parse_err(last_line, format!("missing key {key:?}")))
    };
    fn num<T: std::str::FromStr>((no, v): (usize, &str), key: &str) -> Result<T, DescriptorError> {
        v.parse()
            .map_err(|_| parse_err(no, format!("invalid {key} value {v:?}")))
    }
    let params = CodeParams {
        n: num(get("n")?, "n")?,
        k: num(get("k")?, "k")?,
        d: num(get("d")?, "d")?,
        m: num(get("m")?, "m")?,
        q: num(get("q")?, "q")?,
        seed: num(get("seed")?, "seed")?,
    };
    let (gen_line, gen_name) = get("generator")?;

    if gen_name == EXPLICIT {
        if let Some((no, _)) = keys.get("attempt") {
            return Err(parse_err(*no, "explicit codes take no attempt"));
        }
        if !in_matrices {
            return Err(parse_err(last_line, "explicit code without matrices section"));
        }
        params.validate()?;
        let field = PrimeField::new(params.q).map_err(CodeError::from)?;
        let subs = parse_matrices(&params, field, &matrix_lines)?;
        return Ok(CodeInstance::from_parts(params, CodeOrigin::Explicit, subs)?);
    }

    if in_matrices {
        return Err(parse_err(gen_line, "matrices section requires generator=explicit"));
    }
    let generator = generators.get(gen_name).map_err(CodeError::from)?;
    match keys.get("attempt") {
        Some(&entry) => {
            let attempt: u32 = num(entry, "attempt")?;
            Ok(seeded_attempt(params, generator.as_ref(), attempt)?)
        }
        None => Ok(construct_with(params, generator.as_ref())?),
    }
}

fn parse_matrices(
    params: &CodeParams,
    field: PrimeField,
    lines: &[(usize, &str)],
) -> Result<Vec<Vec<DiagonalMatrix>>, DescriptorError> {
    let mut slots: Vec<Vec<Option<DiagonalMatrix>>> = vec![vec![None; params.k]; params.n - params.k];
    for &(no, line) in lines {
        let (lhs, rhs) = line
            .split_once('=')
            .ok_or_else(|| parse_err(no, "expected G[i,l]=entries"))?;
        let inner = lhs
            .strip_prefix("G[")
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| parse_err(no, format!("expected G[i,l], found {lhs:?}")))?;
        let (i, l) = inner.split_once(',').ok_or_else(|| parse_err(no, "expected G[i,l]"))?;
        let i: usize = i.trim().parse().map_err(|_| parse_err(no, "bad parity index"))?;
        let l: usize = l.trim().parse().map_err(|_| parse_err(no, "bad unit index"))?;
        if !(1..=params.n - params.k).contains(&i) || !(1..=params.k).contains(&l) {
            return Err(parse_err(no, format!("G[{i},{l}] out of range")));
        }
        let entries = rhs
            .split(',')
            .map(|x| {
                let v: u64 = x
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(no, format!("bad entry {x:?}")))?;
                if v >= field.modulus() {
                    return Err(parse_err(no, format!("entry {v} not reduced mod {}", field.modulus())));
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let slot = &mut slots[i - 1][l - 1];
        if slot.is_some() {
            return Err(parse_err(no, format!("duplicate G[{i},{l}]")));
        }
        *slot = Some(DiagonalMatrix::new(field, entries));
    }
    slots
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            row.into_iter()
                .enumerate()
                .map(|(l, g)| g.ok_or_else(|| parse_err(0, format!("missing G[{},{}]", i + 1, l + 1))))
                .collect()
        })
        .collect()
}
