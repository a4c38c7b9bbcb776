//! Text forms for the core objects: sets, index maps, filters, moduli,
//! vectors, spaces, and sequences.
//!
//! Everything here is a closed constructor grammar, not a general language.
//! A parsed object can be rebuilt from its text, which is what makes config
//! files and CLI invocations reproducible: the report can quote the exact
//! expression that produced each input.
//!
//! The only arithmetic in the grammar is the small expression language used
//! for custom moduli (`t * t / (t + 1)`) and scalar sequences
//! (`scalar(1 / n)`). It supports `+ - * /`, parentheses, numeric literals
//! in scientific notation, and the functions `log`, `log1p`, `sqrt`, `exp`,
//! `sin`, `abs`, `pow`, `min`, `max`.

use filterlab_core::converge::SequenceSpec;
use filterlab_core::filters::NatFilter;
use filterlab_core::modulus::{builtin_modulus, ModulusFunction, UNBOUNDED_TARGET};
use filterlab_core::natset::{IndexMap, NatSet};
use filterlab_core::spaces::{SpaceModel, Vector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DslError {
    #[error("expected {expected} at byte {at} in `{input}`")]
    Expected { expected: String, at: usize, input: String },
    #[error("unknown {kind} `{name}`; known forms: {known}")]
    Unknown { kind: &'static str, name: String, known: &'static str },
    #[error("`{name}` takes {takes}, got {got} argument(s)")]
    Arity { name: String, takes: &'static str, got: usize },
    #[error("number `{text}` does not fit: {reason}")]
    BadNumber { text: String, reason: String },
    #[error("{0}")]
    Invalid(String),
}

/// Berry-pick the core error text without threading five error types
/// through every grammar rule.
fn invalid(e: impl std::fmt::Display) -> DslError {
    DslError::Invalid(e.to_string())
}

// ----------------------------------------------------------------------
// Scanner
// ----------------------------------------------------------------------

struct Scanner<'a> {
    input: &'a str,
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn new(input: &'a str) -> Scanner<'a> {
        Scanner { input, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.input[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.input.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn expected(&self, what: impl Into<String>) -> DslError {
        DslError::Expected { expected: what.into(), at: self.pos, input: self.input.to_string() }
    }

    fn eat(&mut self, c: char) -> Result<(), DslError> {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.expected(format!("`{c}`")))
        }
    }

    fn eat_if(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    /// An identifier: letters, digits, underscores, starting with a letter.
    fn ident(&mut self) -> Result<&'a str, DslError> {
        self.skip_ws();
        let rest = self.rest();
        let end = rest
            .char_indices()
            .take_while(|&(i, c)| {
                if i == 0 {
                    c.is_ascii_alphabetic() || c == '_'
                } else {
                    c.is_ascii_alphanumeric() || c == '_'
                }
            })
            .map(|(i, c)| i + c.len_utf8())
            .last()
            .ok_or_else(|| self.expected("a name"))?;
        self.pos += end;
        Ok(&rest[..end])
    }

    /// A numeric literal, scientific notation included.
    fn number_text(&mut self) -> Result<&'a str, DslError> {
        self.skip_ws();
        let rest = self.rest();
        let bytes = rest.as_bytes();
        let mut end = 0;
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        if end == 0 {
            return Err(self.expected("a number"));
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut exp = end + 1;
            if exp < bytes.len() && (bytes[exp] == b'+' || bytes[exp] == b'-') {
                exp += 1;
            }
            let digits = bytes[exp..].iter().take_while(|b| b.is_ascii_digit()).count();
            if digits > 0 {
                end = exp + digits;
            }
        }
        self.pos += end;
        Ok(&rest[..end])
    }

    fn number_f64(&mut self) -> Result<f64, DslError> {
        let text = self.number_text()?;
        text.parse::<f64>().map_err(|e| DslError::BadNumber {
            text: text.to_string(),
            reason: e.to_string(),
        })
    }

    fn number_u64(&mut self) -> Result<u64, DslError> {
        let text = self.number_text()?;
        sci_u64(text)
    }

    fn done(&mut self) -> Result<(), DslError> {
        self.skip_ws();
        if self.pos == self.input.len() {
            Ok(())
        } else {
            Err(self.expected("end of input"))
        }
    }
}

/// Parse a non-negative integer, allowing scientific notation (`1e6`) as
/// long as the value is exact.
pub fn sci_u64(text: &str) -> Result<u64, DslError> {
    if let Ok(n) = text.parse::<u64>() {
        return Ok(n);
    }
    let v: f64 = text.parse().map_err(|e: std::num::ParseFloatError| DslError::BadNumber {
        text: text.to_string(),
        reason: e.to_string(),
    })?;
    if !v.is_finite() || v < 0.0 || v.fract() != 0.0 || v > 2f64.powi(53) {
        return Err(DslError::BadNumber {
            text: text.to_string(),
            reason: "not an exact non-negative integer".to_string(),
        });
    }
    Ok(v as u64)
}

// ----------------------------------------------------------------------
// Sets and index maps
// ----------------------------------------------------------------------

const SET_FORMS: &str = "full, empty, evens, odds, squares, cubes, ap(first,step), \
     poly(c0,c1,...), powers(base), blocks(pow2), range(lo,hi), finite(a,b,...), \
     compl(set), union(set,set), inter(set,set), preimage(map,set)";

/// Parse the set grammar: `squares`, `ap(1,2)`, `union(evens, finite(1,3))`,
/// and the rest of the constructor tree.
pub fn parse_set(text: &str) -> Result<NatSet, DslError> {
    let mut s = Scanner::new(text);
    let set = set_expr(&mut s)?;
    s.done()?;
    Ok(set)
}

fn u64_args(s: &mut Scanner) -> Result<Vec<u64>, DslError> {
    s.eat('(')?;
    let mut args = vec![s.number_u64()?];
    while s.eat_if(',') {
        args.push(s.number_u64()?);
    }
    s.eat(')')?;
    Ok(args)
}

fn two<T: Copy>(name: &str, args: &[T]) -> Result<(T, T), DslError> {
    if args.len() == 2 {
        Ok((args[0], args[1]))
    } else {
        Err(DslError::Arity { name: name.to_string(), takes: "2", got: args.len() })
    }
}

fn set_expr(s: &mut Scanner) -> Result<NatSet, DslError> {
    let name = s.ident()?;
    match name {
        "full" | "nat" => Ok(NatSet::full()),
        "empty" => Ok(NatSet::empty()),
        "evens" => Ok(NatSet::evens()),
        "odds" => Ok(NatSet::odds()),
        "squares" => Ok(NatSet::squares()),
        "cubes" => Ok(NatSet::cubes()),
        "ap" => {
            let (first, step) = two("ap", &u64_args(s)?)?;
            NatSet::ap(first, step).map_err(invalid)
        }
        "poly" => NatSet::poly(u64_args(s)?).map_err(invalid),
        "powers" => {
            let args = u64_args(s)?;
            if args.len() != 1 {
                return Err(DslError::Arity {
                    name: "powers".to_string(),
                    takes: "1",
                    got: args.len(),
                });
            }
            NatSet::powers(args[0]).map_err(invalid)
        }
        "blocks" => {
            s.eat('(')?;
            let gen = s.ident()?;
            s.eat(')')?;
            match gen {
                "pow2" => Ok(NatSet::blocks_pow2()),
                other => Err(DslError::Unknown {
                    kind: "block generator",
                    name: other.to_string(),
                    known: "pow2",
                }),
            }
        }
        "range" => {
            let (lo, hi) = two("range", &u64_args(s)?)?;
            NatSet::range(lo, hi).map_err(invalid)
        }
        "finite" => NatSet::finite(u64_args(s)?).map_err(invalid),
        "compl" => {
            s.eat('(')?;
            let inner = set_expr(s)?;
            s.eat(')')?;
            Ok(inner.complement())
        }
        "union" | "inter" => {
            s.eat('(')?;
            let a = set_expr(s)?;
            s.eat(',')?;
            let b = set_expr(s)?;
            s.eat(')')?;
            Ok(if name == "union" { a.union(&b) } else { a.inter(&b) })
        }
        "preimage" => {
            s.eat('(')?;
            let map = map_expr(s)?;
            s.eat(',')?;
            let of = set_expr(s)?;
            s.eat(')')?;
            Ok(NatSet::preimage(map, &of))
        }
        other => Err(DslError::Unknown { kind: "set", name: other.to_string(), known: SET_FORMS }),
    }
}

/// Parse the index-map grammar: `id`, `affine(a,b)`, `pow2`, `poly(...)`,
/// `const(v)`, `explicit(v1,v2,...)`.
pub fn parse_index_map(text: &str) -> Result<IndexMap, DslError> {
    let mut s = Scanner::new(text);
    let map = map_expr(&mut s)?;
    s.done()?;
    Ok(map)
}

fn map_expr(s: &mut Scanner) -> Result<IndexMap, DslError> {
    let name = s.ident()?;
    match name {
        "id" | "identity" => Ok(IndexMap::identity()),
        "pow2" => Ok(IndexMap::pow2()),
        "affine" => {
            let (a, b) = two("affine", &u64_args(s)?)?;
            IndexMap::affine(a, b).map_err(invalid)
        }
        "poly" => IndexMap::poly(u64_args(s)?).map_err(invalid),
        "const" => {
            let args = u64_args(s)?;
            if args.len() != 1 {
                return Err(DslError::Arity {
                    name: "const".to_string(),
                    takes: "1",
                    got: args.len(),
                });
            }
            IndexMap::constant(args[0]).map_err(invalid)
        }
        "explicit" => IndexMap::explicit(u64_args(s)?).map_err(invalid),
        other => Err(DslError::Unknown {
            kind: "index map",
            name: other.to_string(),
            known: "id, affine(a,b), pow2, poly(c0,c1,...), const(v), explicit(v1,v2,...)",
        }),
    }
}

// ----------------------------------------------------------------------
// Filters
// ----------------------------------------------------------------------

/// Parse the filter grammar: `frechet`, `stat`, `fstat(log1p)`,
/// `base(set, ...)`, `image(map, filter)`, `subseq(set)`.
pub fn parse_filter(text: &str) -> Result<NatFilter, DslError> {
    let mut s = Scanner::new(text);
    let filter = filter_expr(&mut s)?;
    s.done()?;
    Ok(filter)
}

fn filter_expr(s: &mut Scanner) -> Result<NatFilter, DslError> {
    let name = s.ident()?;
    match name {
        "frechet" | "cofinite" => Ok(NatFilter::frechet()),
        "stat" | "statistical" => Ok(NatFilter::statistical()),
        "fstat" => {
            s.eat('(')?;
            let start = s.pos;
            let mut depth = 0usize;
            for (i, c) in s.rest().char_indices() {
                match c {
                    '(' => depth += 1,
                    ')' if depth == 0 => {
                        let inner = &s.input[start..start + i];
                        s.pos = start + i + 1;
                        let modulus = parse_modulus(inner.trim())?;
                        return NatFilter::f_statistical(modulus).map_err(invalid);
                    }
                    ')' => depth -= 1,
                    _ => {}
                }
            }
            Err(s.expected("`)` closing fstat"))
        }
        "base" => {
            s.eat('(')?;
            let mut sets = vec![set_expr(s)?];
            while s.eat_if(',') {
                sets.push(set_expr(s)?);
            }
            s.eat(')')?;
            NatFilter::base_generated(sets).map_err(invalid)
        }
        "image" => {
            s.eat('(')?;
            let map = map_expr(s)?;
            s.eat(',')?;
            let inner = filter_expr(s)?;
            s.eat(')')?;
            Ok(NatFilter::image(map, inner))
        }
        "subseq" => {
            s.eat('(')?;
            let stream = set_expr(s)?;
            s.eat(')')?;
            NatFilter::subsequence(stream).map_err(invalid)
        }
        other => Err(DslError::Unknown {
            kind: "filter",
            name: other.to_string(),
            known: "frechet, stat, fstat(modulus), base(set,...), image(map,filter), subseq(set)",
        }),
    }
}

// ----------------------------------------------------------------------
// Moduli and the expression grammar
// ----------------------------------------------------------------------

/// Parse a modulus: a builtin name (`identity`, `log1p`, `sqrt`, `pow(0.5)`,
/// `bounded_rational`) or an arithmetic expression over `t`.
///
/// Expression moduli get their unboundedness claim from a doubling probe at
/// parse time; the full axiom grid still runs wherever the modulus is
/// validated or used for density.
pub fn parse_modulus(text: &str) -> Result<ModulusFunction, DslError> {
    let trimmed = text.trim();
    if let Ok(builtin) = builtin_modulus(trimmed) {
        return Ok(builtin);
    }
    let expr = parse_expr(trimmed, "t")?;
    let mut claims_unbounded = false;
    let mut t = 1.0f64;
    while t <= 2f64.powi(60) {
        if expr.eval(t) > UNBOUNDED_TARGET {
            claims_unbounded = true;
            break;
        }
        t *= 2.0;
    }
    let name = trimmed.to_string();
    Ok(ModulusFunction::new(name, claims_unbounded, move |t| expr.eval(t)))
}

#[derive(Clone, Debug)]
enum Expr {
    Num(f64),
    Var,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Call1(Func1, Box<Expr>),
    Call2(Func2, Box<Expr>, Box<Expr>),
}

#[derive(Clone, Copy, Debug)]
enum Func1 {
    Log,
    Log1p,
    Sqrt,
    Exp,
    Sin,
    Abs,
}

#[derive(Clone, Copy, Debug)]
enum Func2 {
    Pow,
    Min,
    Max,
}

impl Expr {
    fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var => x,
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Neg(a) => -a.eval(x),
            Expr::Call1(f, a) => {
                let v = a.eval(x);
                match f {
                    Func1::Log => v.ln(),
                    Func1::Log1p => v.ln_1p(),
                    Func1::Sqrt => v.sqrt(),
                    Func1::Exp => v.exp(),
                    Func1::Sin => v.sin(),
                    Func1::Abs => v.abs(),
                }
            }
            Expr::Call2(f, a, b) => {
                let u = a.eval(x);
                let v = b.eval(x);
                match f {
                    Func2::Pow => u.powf(v),
                    Func2::Min => u.min(v),
                    Func2::Max => u.max(v),
                }
            }
        }
    }
}

/// Parse the arithmetic grammar over the named variable.
fn parse_expr(text: &str, var: &str) -> Result<Expr, DslError> {
    let mut s = Scanner::new(text);
    let expr = expr_sum(&mut s, var)?;
    s.done()?;
    Ok(expr)
}

fn expr_sum(s: &mut Scanner, var: &str) -> Result<Expr, DslError> {
    let mut lhs = expr_product(s, var)?;
    loop {
        if s.eat_if('+') {
            lhs = Expr::Add(Box::new(lhs), Box::new(expr_product(s, var)?));
        } else if s.eat_if('-') {
            lhs = Expr::Sub(Box::new(lhs), Box::new(expr_product(s, var)?));
        } else {
            return Ok(lhs);
        }
    }
}

fn expr_product(s: &mut Scanner, var: &str) -> Result<Expr, DslError> {
    let mut lhs = expr_unary(s, var)?;
    loop {
        if s.eat_if('*') {
            lhs = Expr::Mul(Box::new(lhs), Box::new(expr_unary(s, var)?));
        } else if s.eat_if('/') {
            lhs = Expr::Div(Box::new(lhs), Box::new(expr_unary(s, var)?));
        } else {
            return Ok(lhs);
        }
    }
}

fn expr_unary(s: &mut Scanner, var: &str) -> Result<Expr, DslError> {
    if s.eat_if('-') {
        return Ok(Expr::Neg(Box::new(expr_unary(s, var)?)));
    }
    expr_atom(s, var)
}

fn expr_atom(s: &mut Scanner, var: &str) -> Result<Expr, DslError> {
    match s.peek() {
        Some('(') => {
            s.eat('(')?;
            let inner = expr_sum(s, var)?;
            s.eat(')')?;
            Ok(inner)
        }
        Some(c) if c.is_ascii_digit() || c == '.' => Ok(Expr::Num(s.number_f64()?)),
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {
            let name = s.ident()?;
            if name == var {
                return Ok(Expr::Var);
            }
            match name {
                "log" | "log1p" | "sqrt" | "exp" | "sin" | "abs" => {
                    s.eat('(')?;
                    let a = expr_sum(s, var)?;
                    s.eat(')')?;
                    let f = match name {
                        "log" => Func1::Log,
                        "log1p" => Func1::Log1p,
                        "sqrt" => Func1::Sqrt,
                        "exp" => Func1::Exp,
                        "sin" => Func1::Sin,
                        _ => Func1::Abs,
                    };
                    Ok(Expr::Call1(f, Box::new(a)))
                }
                "pow" | "min" | "max" => {
                    s.eat('(')?;
                    let a = expr_sum(s, var)?;
                    s.eat(',')?;
                    let b = expr_sum(s, var)?;
                    s.eat(')')?;
                    let f = match name {
                        "pow" => Func2::Pow,
                        "min" => Func2::Min,
                        _ => Func2::Max,
                    };
                    Ok(Expr::Call2(f, Box::new(a), Box::new(b)))
                }
                other => Err(DslError::Unknown {
                    kind: "function or variable",
                    name: other.to_string(),
                    known: "the sweep variable, log, log1p, sqrt, exp, sin, abs, pow, min, max",
                }),
            }
        }
        _ => Err(s.expected("a number, name, or `(`")),
    }
}

// ----------------------------------------------------------------------
// Vectors and spaces
// ----------------------------------------------------------------------

/// Parse a vector: a dense list `[1, 0.5, -2]`, a sparse map
/// `{a: 1.5, c: -0.25}`, or a named generator (`ones`, `zeros`, `basis(k)`
/// with 1-indexed k, `cesaro_basis(n)` for the averaged basis prefix).
pub fn parse_vector(text: &str, dim: usize) -> Result<Vector, DslError> {
    let mut s = Scanner::new(text);
    let v = vector_expr(&mut s, dim)?;
    s.done()?;
    Ok(v)
}

fn vector_expr(s: &mut Scanner, dim: usize) -> Result<Vector, DslError> {
    match s.peek() {
        Some('[') => {
            s.eat('[')?;
            let mut coords = Vec::new();
            if s.peek() != Some(']') {
                coords.push(signed_f64(s)?);
                while s.eat_if(',') {
                    coords.push(signed_f64(s)?);
                }
            }
            s.eat(']')?;
            Ok(Vector::dense(coords))
        }
        Some('{') => {
            s.eat('{')?;
            let mut pairs = Vec::new();
            if s.peek() != Some('}') {
                loop {
                    let key = s.ident()?;
                    s.eat(':')?;
                    pairs.push((key.to_string(), signed_f64(s)?));
                    if !s.eat_if(',') {
                        break;
                    }
                }
            }
            s.eat('}')?;
            Ok(Vector::sparse(pairs))
        }
        _ => {
            let name = s.ident()?;
            match name {
                "ones" => Ok(Vector::ones(dim)),
                "zeros" => Ok(Vector::zeros(dim)),
                "basis" => {
                    s.eat('(')?;
                    let k = s.number_u64()?;
                    s.eat(')')?;
                    if k == 0 {
                        return Err(DslError::Invalid(
                            "basis(k) is 1-indexed; basis(1) is the first coordinate".to_string(),
                        ));
                    }
                    Vector::basis(dim, (k - 1) as usize).map_err(invalid)
                }
                "cesaro_basis" => {
                    s.eat('(')?;
                    let n = s.number_u64()? as usize;
                    s.eat(')')?;
                    if n == 0 || n > dim {
                        return Err(DslError::Invalid(format!(
                            "cesaro_basis(n) averages the first n basis vectors; n = {n} is outside [1, {dim}]"
                        )));
                    }
                    let mut coords = vec![0.0; dim];
                    for c in coords.iter_mut().take(n) {
                        *c = 1.0 / n as f64;
                    }
                    Ok(Vector::dense(coords))
                }
                other => Err(DslError::Unknown {
                    kind: "vector",
                    name: other.to_string(),
                    known: "[a, b, ...], {key: value, ...}, ones, zeros, basis(k), cesaro_basis(n)",
                }),
            }
        }
    }
}

fn signed_f64(s: &mut Scanner) -> Result<f64, DslError> {
    if s.eat_if('-') {
        Ok(-s.number_f64()?)
    } else {
        Ok(s.number_f64()?)
    }
}

/// Parse a space: `l1`, `linf` (dimension from the `dim` argument, or given
/// inline as `l1(8)`), or `sparse(key1, key2, ...)`.
pub fn parse_space(text: &str, dim: usize) -> Result<SpaceModel, DslError> {
    let mut s = Scanner::new(text);
    let name = s.ident()?;
    let space = match name {
        "l1" | "linf" => {
            let d = if s.eat_if('(') {
                let d = s.number_u64()? as usize;
                s.eat(')')?;
                d
            } else {
                dim
            };
            if name == "l1" {
                SpaceModel::l1(d).map_err(invalid)?
            } else {
                SpaceModel::linf(d).map_err(invalid)?
            }
        }
        "sparse" => {
            s.eat('(')?;
            let mut keys = vec![s.ident()?.to_string()];
            while s.eat_if(',') {
                keys.push(s.ident()?.to_string());
            }
            s.eat(')')?;
            SpaceModel::sparse_product(keys).map_err(invalid)?
        }
        other => {
            return Err(DslError::Unknown {
                kind: "space",
                name: other.to_string(),
                known: "l1, linf, l1(dim), linf(dim), sparse(key1,key2,...)",
            })
        }
    };
    Ok(space)
}

// ----------------------------------------------------------------------
// Sequences
// ----------------------------------------------------------------------

/// Parse a sequence generator and bind it to a space:
///
/// * `basis_seq`: the basis walk e1, e2, ..., wrapping at the dimension.
/// * `cesaro_basis_seq`: the running means of the basis walk.
/// * `perturbed(base, set, spike)`: the scalar sequence sitting at `base`
///   except on the set, where it takes `spike`.
/// * `scalar(expr)`: a scalar sequence from an expression over `n`.
/// * `compose(seq, map)`: the sequence at the mapped indices.
///
/// Scalar generators need a 1-dimensional dense space; the walk generators
/// need `dim` dense coordinates. `horizon` becomes the sequence's declared
/// last index.
pub fn parse_sequence(
    text: &str,
    space: &SpaceModel,
    dim: usize,
    horizon: u64,
) -> Result<SequenceSpec, DslError> {
    let mut s = Scanner::new(text);
    let seq = sequence_expr(&mut s, space, dim, horizon)?;
    s.done()?;
    Ok(seq)
}

fn sequence_expr(
    s: &mut Scanner,
    space: &SpaceModel,
    dim: usize,
    horizon: u64,
) -> Result<SequenceSpec, DslError> {
    let name = s.ident()?;
    match name {
        "basis_seq" | "cesaro_basis_seq" => {
            if dim == 0 {
                return Err(DslError::Invalid(
                    "the basis walk needs a positive dimension".to_string(),
                ));
            }
            let walk =
                SequenceSpec::from_fn("basis walk".to_string(), space.clone(), move |n| {
                    Vector::basis(dim, ((n - 1) as usize) % dim)
                        .expect("the index wraps at the dimension")
                })
                .map_err(invalid)?
                .with_bound(1.0)
                .with_max_index(horizon);
            Ok(if name == "basis_seq" { walk } else { walk.cesaro() })
        }
        "perturbed" => {
            s.eat('(')?;
            let base = signed_f64(s)?;
            s.eat(',')?;
            let set = set_expr(s)?;
            s.eat(',')?;
            let spike = signed_f64(s)?;
            s.eat(')')?;
            let bound = base.abs().max(spike.abs());
            let label = format!("perturbed({base}, {}, {spike})", set.describe());
            let seq = SequenceSpec::from_fn(label, space.clone(), move |n| {
                Vector::dense(vec![if set.contains(n) { spike } else { base }])
            })
            .map_err(invalid)?
            .with_bound(bound)
            .with_max_index(horizon);
            Ok(seq)
        }
        "scalar" => {
            s.eat('(')?;
            let start = s.pos;
            let mut depth = 0usize;
            for (i, c) in s.rest().char_indices() {
                match c {
                    '(' => depth += 1,
                    ')' if depth == 0 => {
                        let inner = &s.input[start..start + i];
                        s.pos = start + i + 1;
                        let expr = parse_expr(inner.trim(), "n")?;
                        let label = format!("scalar({})", inner.trim());
                        let seq = SequenceSpec::from_fn(label, space.clone(), move |n| {
                            Vector::dense(vec![expr.eval(n as f64)])
                        })
                        .map_err(invalid)?
                        .with_max_index(horizon);
                        return Ok(seq);
                    }
                    ')' => depth -= 1,
                    _ => {}
                }
            }
            Err(s.expected("`)` closing scalar"))
        }
        "entries" => {
            s.eat('(')?;
            let mut fields: Vec<(String, Expr)> = Vec::new();
            loop {
                s.skip_ws();
                let key = s.ident()?.to_string();
                s.eat(':')?;
                s.skip_ws();
                let start = s.pos;
                let mut depth = 0usize;
                let mut end = None;
                for (i, c) in s.rest().char_indices() {
                    match c {
                        '(' => depth += 1,
                        ')' if depth == 0 => {
                            end = Some(i);
                            break;
                        }
                        ')' => depth -= 1,
                        ',' if depth == 0 => {
                            end = Some(i);
                            break;
                        }
                        _ => {}
                    }
                }
                let Some(len) = end else {
                    return Err(s.expected("`,` or `)` after an entry expression"));
                };
                let inner = &s.input[start..start + len];
                s.pos = start + len;
                fields.push((key, parse_expr(inner.trim(), "n")?));
                if s.eat_if(',') {
                    continue;
                }
                s.eat(')')?;
                break;
            }
            let label = format!(
                "entries({})",
                fields.iter().map(|(k, _)| k.as_str()).collect::<Vec<_>>().join(", ")
            );
            let seq = SequenceSpec::from_fn(label, space.clone(), move |n| {
                Vector::sparse(fields.iter().map(|(k, e)| (k.clone(), e.eval(n as f64))))
            })
            .map_err(invalid)?
            .with_max_index(horizon);
            Ok(seq)
        }
        "compose" => {
            s.eat('(')?;
            let inner = sequence_expr(s, space, dim, horizon)?;
            s.eat(',')?;
            let map = map_expr(s)?;
            s.eat(')')?;
            Ok(inner.compose(map))
        }
        other => Err(DslError::Unknown {
            kind: "sequence",
            name: other.to_string(),
            known: "basis_seq, cesaro_basis_seq, perturbed(base,set,spike), scalar(expr), entries(key: expr, ...), compose(seq,map)",
        }),
    }
}
