//! Benchmark programs with golden expectations and tight input families.
//!
//! A corpus directory holds `<name>.fx` sources next to `<name>.golden`
//! files of `key=value` lines; see `docs/golden-format.md`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use num_traits::Zero;

use crate::analysis::{AnalysisResult, Status, Step};
use crate::pipeline::PipelineError;
use crate::rational::{fmt_rat, parse_rat, Rational};
use crate::surface::SurfaceError;
use crate::syntax::{SType, Value};
use crate::types::{AnnType, ConcreteArrow, Ty};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Malformed { path: PathBuf, line: usize, msg: String },
    #[error("missing golden file {0}")]
    MissingGolden(PathBuf),
    #[error("tight family `{family}` does not fit argument type `{ty}`")]
    FamilyMismatch { family: String, ty: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpectedStatus {
    Bounded,
    Unsolvable,
    /// The front end must reject the program with a linearity error.
    Rejected,
}

impl fmt::Display for ExpectedStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExpectedStatus::Bounded => "bounded",
            ExpectedStatus::Unsolvable => "unsolvable",
            ExpectedStatus::Rejected => "rejected",
        })
    }
}

/// Where an annotation sits in a signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathRoot {
    Arg,
    Res,
    EffectIn(String),
    EffectOut(String),
}

/// An annotation position: a root followed by steps into the type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnPath {
    pub root: PathRoot,
    pub steps: Vec<Step>,
}

impl AnnPath {
    pub fn parse(text: &str) -> Result<AnnPath, String> {
        let text = text.trim();
        let (root, mut rest) = if let Some(r) = text.strip_prefix("arg") {
            (PathRoot::Arg, r)
        } else if let Some(r) = text.strip_prefix("res") {
            (PathRoot::Res, r)
        } else if let Some(r) = text.strip_prefix("in(").or_else(|| text.strip_prefix("out(")) {
            let close = r.find(')').ok_or_else(|| format!("unclosed label in `{text}`"))?;
            let label = r[..close].trim().to_string();
            let root = if text.starts_with("in(") {
                PathRoot::EffectIn(label)
            } else {
                PathRoot::EffectOut(label)
            };
            (root, &r[close + 1..])
        } else {
            return Err(format!("path `{text}` must start with arg, res, in(L) or out(L)"));
        };
        let mut steps = Vec::new();
        while !rest.is_empty() {
            let (step, len) = if rest.starts_with("[i]") {
                (Step::Elem, 3)
            } else if rest.starts_with(".0") {
                (Step::Fst, 2)
            } else if rest.starts_with(".1") {
                (Step::Snd, 2)
            } else if rest.starts_with(".inl") {
                (Step::Inl, 4)
            } else if rest.starts_with(".inr") {
                (Step::Inr, 4)
            } else {
                return Err(format!("bad path step at `{rest}`"));
            };
            steps.push(step);
            rest = &rest[len..];
        }
        Ok(AnnPath { root, steps })
    }

    /// The annotation at this path in a concrete signature.
    pub fn resolve<'a>(&self, sig: &'a ConcreteArrow) -> Option<&'a Rational> {
        let mut at: &AnnType = match &self.root {
            PathRoot::Arg => &sig.arg,
            PathRoot::Res => &sig.res,
            PathRoot::EffectIn(l) => &sig.effects.get(l)?.input,
            PathRoot::EffectOut(l) => &sig.effects.get(l)?.output,
        };
        for s in &self.steps {
            at = match (s, &at.ty) {
                (Step::Elem, Ty::List(e)) => e,
                (Step::Fst, Ty::Prod(a, _)) | (Step::Inl, Ty::Sum(a, _)) => a,
                (Step::Snd, Ty::Prod(_, b)) | (Step::Inr, Ty::Sum(_, b)) => b,
                _ => return None,
            };
        }
        Some(&at.pot)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Eq,
    Le,
    Ge,
}

/// `Σ coeff·name + constant  rel  0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldenConstraint {
    pub text: String,
    pub terms: Vec<(String, Rational)>,
    pub constant: Rational,
    pub rel: Rel,
}

impl GoldenConstraint {
    pub fn parse(text: &str) -> Result<GoldenConstraint, String> {
        let (rel, op) = if text.contains("==") {
            (Rel::Eq, "==")
        } else if text.contains("<=") {
            (Rel::Le, "<=")
        } else if text.contains(">=") {
            (Rel::Ge, ">=")
        } else {
            return Err(format!("constraint `{text}` needs ==, <= or >="));
        };
        let (l, r) = text.split_once(op).unwrap();
        let mut terms = Vec::new();
        let mut constant = Rational::zero();
        linear_side(l, &Rational::from_integer(1.into()), &mut terms, &mut constant)?;
        linear_side(r, &Rational::from_integer((-1).into()), &mut terms, &mut constant)?;
        Ok(GoldenConstraint {
            text: text.trim().to_string(),
            terms,
            constant,
            rel,
        })
    }

    pub fn holds(&self, value: impl Fn(&str) -> Option<Rational>) -> Result<bool, String> {
        let mut total = self.constant.clone();
        for (n, c) in &self.terms {
            let v = value(n).ok_or_else(|| format!("unknown name `{n}`"))?;
            total += c * v;
        }
        Ok(match self.rel {
            Rel::Eq => total.is_zero(),
            Rel::Le => total <= Rational::zero(),
            Rel::Ge => total >= Rational::zero(),
        })
    }
}

/// Adds `sign · side` to the accumulated terms.
fn linear_side(
    side: &str,
    sign: &Rational,
    terms: &mut Vec<(String, Rational)>,
    constant: &mut Rational,
) -> Result<(), String> {
    let mut s = side.replace(' ', "");
    if s.is_empty() {
        return Err("empty side of a constraint".into());
    }
    if !s.starts_with('-') && !s.starts_with('+') {
        s.insert(0, '+');
    }
    let mut parts = Vec::new();
    let mut start = 0;
    for (i, ch) in s.char_indices().skip(1) {
        if ch == '+' || ch == '-' {
            parts.push(&s[start..i]);
            start = i;
        }
    }
    parts.push(&s[start..]);
    for part in parts {
        let (neg, body) = (part.starts_with('-'), &part[1..]);
        let signed = |c: Rational| if neg { -c * sign } else { c * sign };
        let (coeff, name) = match body.split_once('*') {
            Some((c, n)) => (parse_rat(c).map_err(|e| e.to_string())?, Some(n)),
            None if body.starts_with(|c: char| c.is_ascii_digit()) => {
                (parse_rat(body).map_err(|e| e.to_string())?, None)
            }
            None => (Rational::from_integer(1.into()), Some(body)),
        };
        match name {
            Some(n) if is_name(n) => match terms.iter_mut().find(|(m, _)| m == n) {
                Some((_, c)) => *c += signed(coeff),
                None => terms.push((n.to_string(), signed(coeff))),
            },
            Some(n) => return Err(format!("bad name `{n}`")),
            None => *constant += signed(coeff),
        }
    }
    Ok(())
}

fn is_name(n: &str) -> bool {
    let mut cs = n.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

/// A parameterized input family on which the golden bound is exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TightFamily {
    pub kind: FamilyKind,
    pub param: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    /// The unit value.
    Unit,
    /// A list of `n` elements.
    Lists,
    /// `n` inner lists of length `k`.
    UniformInner,
    /// Two lists of length `n`.
    EqualLengths,
    /// Two lists of lengths `n + 1` and `n`.
    FirstLonger,
    /// `n` vectors of length `k` and a point of length `k`.
    VectorsAndPoint,
    /// `n` lists of `k` nonzero elements except a final zero.
    ZeroLast,
    /// `n` vectors of length `k - 1`, then a copy of the point of length `k`.
    ShorterThenExact,
}

const FAMILIES: [(&str, FamilyKind, bool); 8] = [
    ("unit", FamilyKind::Unit, false),
    ("lists", FamilyKind::Lists, false),
    ("uniform_inner", FamilyKind::UniformInner, true),
    ("equal_lengths", FamilyKind::EqualLengths, false),
    ("first_longer", FamilyKind::FirstLonger, false),
    ("vectors_and_point", FamilyKind::VectorsAndPoint, true),
    ("zero_last", FamilyKind::ZeroLast, true),
    ("shorter_then_exact", FamilyKind::ShorterThenExact, true),
];

impl TightFamily {
    pub fn parse(text: &str) -> Result<TightFamily, String> {
        let text = text.trim();
        let (name, param) = match text.split_once('(') {
            Some((n, rest)) => {
                let p = rest
                    .strip_suffix(')')
                    .ok_or_else(|| format!("unclosed parameter in `{text}`"))?;
                let k: u32 = p.trim().parse().map_err(|_| format!("bad parameter `{p}`"))?;
                (n.trim(), Some(k))
            }
            None => (text, None),
        };
        let &(_, kind, takes) = FAMILIES
            .iter()
            .find(|(n, _, _)| *n == name)
            .ok_or_else(|| format!("unknown tight family `{name}`"))?;
        match (takes, param) {
            (true, Some(k)) if k >= 1 => Ok(TightFamily { kind, param: k }),
            (true, _) => Err(format!("`{name}` needs a positive parameter")),
            (false, None) => Ok(TightFamily { kind, param: 0 }),
            (false, Some(_)) => Err(format!("`{name}` takes no parameter")),
        }
    }

    /// The member of size `n`, built for the given argument type.
    pub fn generate(&self, ty: &SType, n: u32) -> Result<Value, CorpusError> {
        let k = self.param as i64;
        let n = n as i64;
        let mismatch = || CorpusError::FamilyMismatch {
            family: self.to_string(),
            ty: ty.to_string(),
        };
        let ints = |len: i64, f: &dyn Fn(i64) -> i64| Value::list((0..len).map(|i| Value::Int(f(i))));
        let v = match (self.kind, ty) {
            (FamilyKind::Unit, SType::Unit) => Value::Unit,
            (FamilyKind::Lists, SType::List(e)) => Value::list((0..n).map(|i| filler(e, i))),
            (FamilyKind::UniformInner, SType::List(inner)) => match &**inner {
                SType::List(e) => Value::list((0..n).map(|_| Value::list((0..k).map(|j| filler(e, j))))),
                _ => return Err(mismatch()),
            },
            (FamilyKind::EqualLengths | FamilyKind::FirstLonger, SType::Prod(a, b)) => match (&**a, &**b) {
                (SType::List(ea), SType::List(eb)) => {
                    let extra = i64::from(self.kind == FamilyKind::FirstLonger);
                    Value::pair(
                        Value::list((0..n + extra).map(|i| filler(ea, i))),
                        Value::list((0..n).map(|i| filler(eb, i))),
                    )
                }
                _ => return Err(mismatch()),
            },
            (FamilyKind::VectorsAndPoint, t) if is_vectors_and_point(t) => Value::pair(
                Value::list((0..n).map(|i| ints(k, &|j| i + j + 1))),
                ints(k, &|j| j),
            ),
            (FamilyKind::ShorterThenExact, t) if is_vectors_and_point(t) => {
                let point = ints(k, &|j| j + 1);
                let mut vs: Vec<Value> = (0..n).map(|_| ints(k - 1, &|j| j + 2)).collect();
                vs.push(point.clone());
                Value::pair(Value::list(vs), point)
            }
            (FamilyKind::ZeroLast, SType::List(inner)) if **inner == SType::list(SType::Int) => {
                Value::list((0..n).map(|_| ints(k, &|j| if j == k - 1 { 0 } else { j + 1 })))
            }
            _ => return Err(mismatch()),
        };
        Ok(v)
    }
}

fn is_vectors_and_point(t: &SType) -> bool {
    *t == SType::prod(SType::list(SType::list(SType::Int)), SType::list(SType::Int))
}

/// A fixed inhabitant of a first-order type; integers count up from one.
fn filler(t: &SType, i: i64) -> Value {
    match t {
        SType::Int => Value::Int(i + 1),
        SType::Prod(a, b) => Value::pair(filler(a, i), filler(b, i)),
        SType::Sum(a, _) => Value::inl(filler(a, i)),
        SType::List(_) => Value::Nil,
        _ => Value::Unit,
    }
}

impl fmt::Display for TightFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (name, _, takes) = FAMILIES.iter().find(|(_, k, _)| *k == self.kind).unwrap();
        if *takes {
            write!(f, "{name}({})", self.param)
        } else {
            f.write_str(name)
        }
    }
}

pub const DEFAULT_TIGHT_SIZES: [u32; 5] = [0, 1, 2, 5, 8];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldenEntry {
    /// File stem shared by the program and its golden file.
    pub name: String,
    pub program_file: PathBuf,
    pub golden_file: PathBuf,
    pub entry: String,
    pub status: ExpectedStatus,
    /// Names for annotation positions used by the constraints.
    pub names: Vec<(String, AnnPath)>,
    pub constraints: Vec<GoldenConstraint>,
    /// Expected pretty-printed signature and bound, when pinned exactly.
    pub signature: Option<String>,
    pub bound: Option<String>,
    pub tight_family: Option<TightFamily>,
    pub tight_sizes: Vec<u32>,
}

impl GoldenEntry {
    pub fn source(&self) -> Result<String, CorpusError> {
        read(&self.program_file)
    }
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses a golden file; `name` is the program's file stem.
pub fn parse_golden(name: &str, program_file: PathBuf, golden_file: PathBuf, text: &str) -> Result<GoldenEntry, CorpusError> {
    let mut g = GoldenEntry {
        name: name.to_string(),
        program_file,
        golden_file: golden_file.clone(),
        entry: name.to_string(),
        status: ExpectedStatus::Bounded,
        names: vec![
            ("p".into(), AnnPath { root: PathRoot::Arg, steps: vec![] }),
            ("p'".into(), AnnPath { root: PathRoot::Res, steps: vec![] }),
        ],
        constraints: Vec::new(),
        signature: None,
        bound: None,
        tight_family: None,
        tight_sizes: DEFAULT_TIGHT_SIZES.to_vec(),
    };
    let mut seen_status = false;
    for (i, raw) in text.lines().enumerate() {
        let bad = |msg: String| CorpusError::Malformed {
            path: golden_file.clone(),
            line: i + 1,
            msg,
        };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| bad(format!("expected key=value, found `{line}`")))?;
        let value = value.trim();
        match key.trim() {
            "entry" => g.entry = value.to_string(),
            "status" => {
                seen_status = true;
                g.status = match value {
                    "bounded" => ExpectedStatus::Bounded,
                    "unsolvable" => ExpectedStatus::Unsolvable,
                    "rejected" => ExpectedStatus::Rejected,
                    other => return Err(bad(format!("unknown status `{other}`"))),
                };
            }
            "name" => {
                let (n, path) = value.split_once(':').ok_or_else(|| bad("expected name=<name>:<path>".into()))?;
                let n = n.trim();
                if !is_name(n) || g.names.iter().any(|(m, _)| m == n) {
                    return Err(bad(format!("bad or duplicate name `{n}`")));
                }
                g.names.push((n.to_string(), AnnPath::parse(path).map_err(bad)?));
            }
            "constraint" => g.constraints.push(GoldenConstraint::parse(value).map_err(bad)?),
            "signature" => g.signature = Some(value.to_string()),
            "bound" => g.bound = Some(value.to_string()),
            "tight_family" => g.tight_family = Some(TightFamily::parse(value).map_err(bad)?),
            "tight_sizes" => {
                g.tight_sizes = value
                    .split(',')
                    .map(|s| s.trim().parse::<u32>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad(format!("bad size list `{value}`")))?;
            }
            other => return Err(bad(format!("unknown key `{other}`"))),
        }
    }
    if !seen_status {
        return Err(CorpusError::Malformed {
            path: golden_file,
            line: 0,
            msg: "missing status".into(),
        });
    }
    for c in &g.constraints {
        for (n, _) in &c.terms {
            if !g.names.iter().any(|(m, _)| m == n) {
                return Err(CorpusError::Malformed {
                    path: g.golden_file.clone(),
                    line: 0,
                    msg: format!("constraint `{}` uses undeclared name `{n}`", c.text),
                });
            }
        }
    }
    Ok(g)
}

/// Loads every `<name>.fx` with its `<name>.golden`, ordered by name.
pub fn load_corpus(dir: &Path) -> Result<Vec<GoldenEntry>, CorpusError> {
    let io = |source| CorpusError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut programs = Vec::new();
    for e in fs::read_dir(dir).map_err(io)? {
        let path = e.map_err(io)?.path();
        if path.extension().is_some_and(|x| x == "fx") {
            programs.push(path);
        }
    }
    programs.sort();
    let mut out = Vec::new();
    for program in programs {
        let name = program.file_stem().unwrap().to_string_lossy().to_string();
        let golden = program.with_extension("golden");
        if !golden.exists() {
            return Err(CorpusError::MissingGolden(golden));
        }
        let text = read(&golden)?;
        out.push(parse_golden(&name, program, golden, &text)?);
    }
    Ok(out)
}

/// What the pipeline produced for a golden entry.
#[derive(Debug, Clone, Copy)]
pub enum Observed<'a> {
    Analyzed(&'a AnalysisResult),
    Failed(&'a PipelineError),
}

/// Every way the observation departs from the golden; empty on a match.
pub fn check_golden(g: &GoldenEntry, obs: Observed<'_>) -> Vec<String> {
    let mut out = Vec::new();
    let r = match (g.status, obs) {
        (ExpectedStatus::Rejected, Observed::Failed(PipelineError::Surface(SurfaceError::LinearReuse(_)))) => {
            return out
        }
        (_, Observed::Failed(e)) => {
            out.push(format!("expected {}, pipeline failed: {e}", g.status));
            return out;
        }
        (ExpectedStatus::Rejected, Observed::Analyzed(_)) => {
            out.push("expected rejection, program was analyzed".into());
            return out;
        }
        (ExpectedStatus::Unsolvable, Observed::Analyzed(r)) => {
            if r.status != Status::Unsolvable {
                out.push("expected unsolvable, analysis found a bound".into());
            }
            return out;
        }
        (ExpectedStatus::Bounded, Observed::Analyzed(r)) => r,
    };
    let (Some(sig), Some(bound)) = (&r.signature, &r.bound) else {
        out.push("expected bounded, analysis is unsolvable".into());
        return out;
    };
    if let Some(s) = &g.signature {
        let got = sig.display_fun().to_string();
        if *s != got {
            out.push(format!("signature: expected `{s}`, got `{got}`"));
        }
    }
    if let Some(b) = &g.bound {
        let got = bound.to_string();
        if *b != got {
            out.push(format!("bound: expected `{b}`, got `{got}`"));
        }
    }
    let value = |n: &str| {
        g.names
            .iter()
            .find(|(m, _)| m == n)
            .and_then(|(_, p)| p.resolve(sig))
            .cloned()
    };
    for c in &g.constraints {
        match c.holds(value) {
            Ok(true) => {}
            Ok(false) => {
                let vals: Vec<String> = c
                    .terms
                    .iter()
                    .map(|(n, _)| format!("{n}={}", value(n).map_or("?".into(), |v| fmt_rat(&v))))
                    .collect();
                out.push(format!("constraint `{}` fails with {}", c.text, vals.join(", ")));
            }
            Err(e) => out.push(format!("constraint `{}`: {e}", c.text)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::types::{Ann, Arrow, EffectSig};

    fn golden(text: &str) -> Result<GoldenEntry, CorpusError> {
        parse_golden("t", "t.fx".into(), "t.golden".into(), text)
    }

    fn store_sig() -> ConcreteArrow {
        let inner = Ann::new(Ty::List(Box::new(Ann::new(Ty::Int, rat(1)))), rat(2));
        Arrow {
            arg: Ann::new(Ty::List(Box::new(inner)), rat(1)),
            res: Ann::new(Ty::Unit, rat(0)),
            effects: EffectSig::default(),
        }
    }

    #[test]
    fn paths_resolve_into_signatures() {
        let sig = store_sig();
        let get = |p: &str| AnnPath::parse(p).unwrap().resolve(&sig).cloned();
        assert_eq!(get("arg"), Some(rat(1)));
        assert_eq!(get("arg[i]"), Some(rat(2)));
        assert_eq!(get("arg[i][i]"), Some(rat(1)));
        assert_eq!(get("arg.0"), None);
        assert!(AnnPath::parse("arg[j]").is_err());
    }

    #[test]
    fn constraints_parse_and_evaluate() {
        let c = GoldenConstraint::parse("q1 + q2 == 1").unwrap();
        let v = |a: i64, b: i64| move |n: &str| Some(rat(if n == "q1" { a } else { b }));
        assert!(c.holds(v(1, 0)).unwrap());
        assert!(!c.holds(v(1, 1)).unwrap());
        let d = GoldenConstraint::parse("2*x - 1/2 >= y").unwrap();
        assert!(d.holds(|_| Some(rat(1))).unwrap());
        assert!(GoldenConstraint::parse("x = 1").is_err());
    }

    #[test]
    fn golden_files_check_against_results() {
        let g = golden(
            "status=bounded\nentry=store_lists\nname=outer:arg[i]\nname=inner:arg[i][i]\n\
             constraint=outer==2\nconstraint=inner==1\nconstraint=p==1\nconstraint=p'==0\n\
             tight_family=uniform_inner(2)\n",
        )
        .unwrap();
        assert_eq!(g.entry, "store_lists");
        assert_eq!(g.tight_family.as_ref().unwrap().to_string(), "uniform_inner(2)");
        let sig = store_sig();
        let value = |n: &str| g.names.iter().find(|(m, _)| m == n).and_then(|(_, p)| p.resolve(&sig)).cloned();
        assert!(g.constraints.iter().all(|c| c.holds(value).unwrap()));
    }

    #[test]
    fn malformed_goldens_are_rejected() {
        assert!(golden("entry=f\n").is_err());
        assert!(golden("status=maybe\n").is_err());
        assert!(golden("status=bounded\nconstraint=q==1\n").is_err());
        assert!(golden("status=bounded\nwhat\n").is_err());
        assert!(golden("status=bounded\ntight_family=uniform_inner\n").is_err());
    }

    #[test]
    fn families_follow_the_argument_type() {
        let t = SType::list(SType::list(SType::Int));
        let v = TightFamily::parse("uniform_inner(2)").unwrap().generate(&t, 3).unwrap();
        assert_eq!(v.list_items().unwrap().len(), 3);
        let z = TightFamily::parse("zero_last(3)").unwrap().generate(&t, 1).unwrap();
        assert_eq!(z.to_string(), "[[1, 2, 0]]");
        assert!(TightFamily::parse("equal_lengths").unwrap().generate(&t, 1).is_err());
    }
}
