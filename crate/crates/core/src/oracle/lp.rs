//! The separation integer program in the textual LP model format, plus a
//! reader for the subset of that format the writer produces (and the usual
//! spellings other tools use for the same constructs).
//!
//! For the projected problem over `U` the model is
//!
//! ```text
//! min   sum_t c_t phi_t
//! s.t.  phi_t - lambda * sum_k theta_k_{x_k} >= lambda * (1 - p)   for t in U
//!       phi_t - lambda * theta_k_{x_k} <= 0                          for t in U, k
//!       phi_t >= 0,  theta binary
//! ```
//!
//! The constant `-<c, psi>` is dropped. Variable names are 1-based:
//! `phi_t`, `theta_k_j`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::tensor::ObservedData;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearTerm {
    pub coef: f64,
    pub var: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: Option<String>,
    pub terms: Vec<LinearTerm>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bound {
    pub var: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpModel {
    pub minimize: bool,
    pub objective: Vec<LinearTerm>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<Bound>,
    pub binaries: Vec<String>,
    pub generals: Vec<String>,
}

pub fn phi_name(t: usize) -> String {
    format!("phi_{}", t + 1)
}

pub fn theta_name(mode: usize, value: usize) -> String {
    format!("theta_{}_{}", mode + 1, value + 1)
}

/// Builds the separation model for the given scaled gradient.
pub fn build_ip_model(scaled_gradient: &[f64], data: &ObservedData, lambda: f64) -> LpModel {
    let dims = data.shape().dims();
    let p = dims.len();
    let coords = data.coords();
    let objective = scaled_gradient
        .iter()
        .enumerate()
        .map(|(t, &c)| LinearTerm {
            coef: c,
            var: phi_name(t),
        })
        .collect();

    let mut constraints = Vec::with_capacity(data.u() * (p + 1));
    for t in 0..data.u() {
        let mut terms = vec![LinearTerm {
            coef: 1.0,
            var: phi_name(t),
        }];
        for k in 0..p {
            terms.push(LinearTerm {
                coef: -lambda,
                var: theta_name(k, coords[k][t] as usize),
            });
        }
        constraints.push(Constraint {
            name: Some(format!("lb_{}", t + 1)),
            terms,
            sense: Sense::Ge,
            rhs: lambda * (1.0 - p as f64),
        });
        for k in 0..p {
            constraints.push(Constraint {
                name: Some(format!("ub_{}_{}", t + 1, k + 1)),
                terms: vec![
                    LinearTerm {
                        coef: 1.0,
                        var: phi_name(t),
                    },
                    LinearTerm {
                        coef: -lambda,
                        var: theta_name(k, coords[k][t] as usize),
                    },
                ],
                sense: Sense::Le,
                rhs: 0.0,
            });
        }
    }

    let bounds = (0..data.u())
        .map(|t| Bound {
            var: phi_name(t),
            lower: 0.0,
            upper: f64::INFINITY,
        })
        .collect();
    let binaries = dims
        .iter()
        .enumerate()
        .flat_map(|(k, &r)| (0..r).map(move |j| theta_name(k, j)))
        .collect();

    LpModel {
        minimize: true,
        objective,
        constraints,
        bounds,
        binaries,
        generals: Vec::new(),
    }
}

/// Separation model rendered as LP text.
pub fn emit_ip_model(scaled_gradient: &[f64], data: &ObservedData, lambda: f64) -> String {
    build_ip_model(scaled_gradient, data, lambda).to_lp_string()
}

const TERMS_PER_LINE: usize = 6;

fn write_terms(out: &mut String, terms: &[LinearTerm]) {
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    for (i, term) in terms.iter().enumerate() {
        if i > 0 && i % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if term.coef.is_sign_negative() { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {}", term.coef.abs(), term.var);
    }
}

fn write_number(out: &mut String, v: f64) {
    if v == f64::INFINITY {
        out.push_str("+inf");
    } else if v == f64::NEG_INFINITY {
        out.push_str("-inf");
    } else {
        let _ = write!(out, "{v}");
    }
}

impl LpModel {
    pub fn to_lp_string(&self) -> String {
        let mut out = String::new();
        out.push_str("\\ rank-1 binary tensor separation model\n");
        out.push_str(if self.minimize { "Minimize\n" } else { "Maximize\n" });
        out.push_str(" obj:");
        write_terms(&mut out, &self.objective);
        out.push_str("\nSubject To\n");
        for c in &self.constraints {
            out.push(' ');
            if let Some(name) = &c.name {
                let _ = write!(out, "{name}:");
            }
            write_terms(&mut out, &c.terms);
            out.push_str(match c.sense {
                Sense::Le => " <= ",
                Sense::Ge => " >= ",
                Sense::Eq => " = ",
            });
            write_number(&mut out, c.rhs);
            out.push('\n');
        }
        out.push_str("Bounds\n");
        for b in &self.bounds {
            out.push(' ');
            if b.lower == f64::NEG_INFINITY && b.upper == f64::INFINITY {
                let _ = writeln!(out, "{} free", b.var);
                continue;
            }
            write_number(&mut out, b.lower);
            let _ = write!(out, " <= {} <= ", b.var);
            write_number(&mut out, b.upper);
            out.push('\n');
        }
        if !self.binaries.is_empty() {
            out.push_str("Binary\n");
            for name in &self.binaries {
                let _ = writeln!(out, " {name}");
            }
        }
        if !self.generals.is_empty() {
            out.push_str("General\n");
            for name in &self.generals {
                let _ = writeln!(out, " {name}");
            }
        }
        out.push_str("End\n");
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        Parser::new(text)?.model()
    }

    /// Every variable name mentioned anywhere in the model, first-seen order.
    pub fn variables(&self) -> Vec<String> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        let names = self
            .objective
            .iter()
            .map(|t| &t.var)
            .chain(self.constraints.iter().flat_map(|c| c.terms.iter().map(|t| &t.var)))
            .chain(self.bounds.iter().map(|b| &b.var))
            .chain(&self.binaries)
            .chain(&self.generals);
        for name in names {
            if seen.insert(name.clone()) {
                out.push(name.clone());
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Colon,
    Cmp(Sense),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Objective,
    Constraints,
    Bounds,
    Binary,
    General,
    End,
}

fn section_keyword(line: &str) -> Option<(Section, Option<bool>)> {
    let lower = line.trim().to_ascii_lowercase();
    let words: Vec<&str> = lower.split_whitespace().collect();
    let joined = words.join(" ");
    match joined.as_str() {
        "minimize" | "minimise" | "minimum" | "min" => Some((Section::Objective, Some(true))),
        "maximize" | "maximise" | "maximum" | "max" => Some((Section::Objective, Some(false))),
        "subject to" | "such that" | "st" | "s.t." => Some((Section::Constraints, None)),
        "bounds" | "bound" => Some((Section::Bounds, None)),
        "binary" | "binaries" | "bin" => Some((Section::Binary, None)),
        "general" | "generals" | "gen" => Some((Section::General, None)),
        "end" => Some((Section::End, None)),
        _ => None,
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || "_!\"#$%&()/,;?@`'{}|~".contains(c)
}

fn is_ident_char(c: char) -> bool {
    is_ident_start(c) || c.is_ascii_digit() || c == '.'
}

/// A name the tokenizer reads back as one identifier and that cannot be
/// mistaken for a section header on a line of its own.
fn is_plain_name(word: &str) -> bool {
    let mut chars = word.chars();
    chars.next().is_some_and(is_ident_start)
        && chars.all(is_ident_char)
        && !matches!(word.to_ascii_lowercase().as_str(), "inf" | "infinity")
        && section_keyword(word).is_none()
}

fn tokenize(line: &str, line_no: usize) -> Result<Vec<Tok>> {
    let chars: Vec<char> = line.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let err = |msg: String| Error::LpParse { line: line_no, msg };
    while i < chars.len() {
        let c = chars[i];
        match c {
            _ if c.is_whitespace() => i += 1,
            '\\' => break,
            '+' => {
                toks.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                toks.push(Tok::Minus);
                i += 1;
            }
            ':' => {
                toks.push(Tok::Colon);
                i += 1;
            }
            '<' | '>' | '=' => {
                let mut j = i + 1;
                while j < chars.len() && "<>=".contains(chars[j]) {
                    j += 1;
                }
                let op: String = chars[i..j].iter().collect();
                let sense = match op.as_str() {
                    "<" | "<=" | "=<" => Sense::Le,
                    ">" | ">=" | "=>" => Sense::Ge,
                    "=" => Sense::Eq,
                    _ => return Err(err(format!("unknown operator {op:?}"))),
                };
                toks.push(Tok::Cmp(sense));
                i = j;
            }
            _ if c.is_ascii_digit() || c == '.' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                    j += 1;
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let text: String = chars[i..j].iter().collect();
                let v: f64 = text
                    .parse()
                    .map_err(|_| err(format!("bad number {text:?}")))?;
                toks.push(Tok::Num(v));
                i = j;
            }
            _ if is_ident_start(c) => {
                let mut j = i;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                match word.to_ascii_lowercase().as_str() {
                    "inf" | "infinity" => toks.push(Tok::Num(f64::INFINITY)),
                    _ => toks.push(Tok::Ident(word)),
                }
                i = j;
            }
            _ => return Err(err(format!("unexpected character {c:?}"))),
        }
    }
    Ok(toks)
}

type SectionTokens = (Section, Option<bool>, Vec<(Tok, usize)>);

struct Parser {
    /// (section, tokens with their line numbers)
    sections: Vec<SectionTokens>,
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        let mut sections: Vec<SectionTokens> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let content = line.split('\\').next().unwrap_or("");
            if content.trim().is_empty() {
                continue;
            }
            if let Some((section, sense)) = section_keyword(content) {
                if section == Section::End {
                    sections.push((section, None, Vec::new()));
                    break;
                }
                sections.push((section, sense, Vec::new()));
                continue;
            }
            let Some(current) = sections.last_mut() else {
                return Err(Error::LpParse {
                    line: line_no,
                    msg: "content before the objective section".into(),
                });
            };
            if current.0 == Section::Binary || current.0 == Section::General {
                for word in content.split_whitespace() {
                    if !is_plain_name(word) {
                        return Err(Error::LpParse {
                            line: line_no,
                            msg: format!("invalid variable name {word:?}"),
                        });
                    }
                    current.2.push((Tok::Ident(word.to_string()), line_no));
                }
                continue;
            }
            for tok in tokenize(content, line_no)? {
                current.2.push((tok, line_no));
            }
        }
        Ok(Self { sections })
    }

    fn model(self) -> Result<LpModel> {
        let mut model = LpModel {
            minimize: true,
            objective: Vec::new(),
            constraints: Vec::new(),
            bounds: Vec::new(),
            binaries: Vec::new(),
            generals: Vec::new(),
        };
        let mut saw_objective = false;
        for (section, sense, toks) in self.sections {
            match section {
                Section::Objective => {
                    if saw_objective {
                        return Err(Error::LpParse {
                            line: toks.first().map_or(0, |t| t.1),
                            msg: "second objective section".into(),
                        });
                    }
                    saw_objective = true;
                    model.minimize = sense.unwrap_or(true);
                    let mut cur = Cursor::new(&toks);
                    cur.skip_label();
                    model.objective = cur.terms()?;
                    if !cur.done() {
                        return Err(cur.error("unexpected token in objective"));
                    }
                }
                Section::Constraints => {
                    let mut cur = Cursor::new(&toks);
                    while !cur.done() {
                        let name = cur.skip_label();
                        let terms = cur.terms()?;
                        if terms.is_empty() {
                            return Err(cur.error("constraint without variables"));
                        }
                        let sense = cur.cmp()?;
                        let rhs = cur.signed_number()?;
                        model.constraints.push(Constraint {
                            name,
                            terms,
                            sense,
                            rhs,
                        });
                    }
                }
                Section::Bounds => {
                    let mut cur = Cursor::new(&toks);
                    while !cur.done() {
                        model.bounds.push(cur.bound()?);
                    }
                }
                Section::Binary => model.binaries.extend(toks.into_iter().filter_map(|t| match t.0 {
                    Tok::Ident(s) => Some(s),
                    _ => None,
                })),
                Section::General => model.generals.extend(toks.into_iter().filter_map(|t| match t.0 {
                    Tok::Ident(s) => Some(s),
                    _ => None,
                })),
                Section::End => break,
            }
        }
        if !saw_objective {
            return Err(Error::LpParse {
                line: 0,
                msg: "missing objective section".into(),
            });
        }
        Ok(model)
    }
}

struct Cursor<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(toks: &'a [(Tok, usize)]) -> Self {
        Self { toks, pos: 0 }
    }

    fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.toks.get(self.pos + offset).map(|t| &t.0)
    }

    fn error(&self, msg: &str) -> Error {
        let line = self
            .toks
            .get(self.pos)
            .or(self.toks.last())
            .map_or(0, |t| t.1);
        Error::LpParse {
            line,
            msg: msg.to_string(),
        }
    }

    fn skip_label(&mut self) -> Option<String> {
        if let (Some(Tok::Ident(name)), Some(Tok::Colon)) = (self.peek(), self.peek_at(1)) {
            let name = name.clone();
            self.pos += 2;
            return Some(name);
        }
        None
    }

    /// Linear expression up to a comparison, a label or the end of input.
    fn terms(&mut self) -> Result<Vec<LinearTerm>> {
        let mut terms = Vec::new();
        loop {
            let mut sign = 1.0;
            let mut saw_sign = false;
            while let Some(Tok::Plus | Tok::Minus) = self.peek() {
                if self.peek() == Some(&Tok::Minus) {
                    sign = -sign;
                }
                saw_sign = true;
                self.pos += 1;
            }
            let mut coef = None;
            if let Some(&Tok::Num(v)) = self.peek() {
                // A bare number before a comparison is the rhs of an
                // expression like "x >= 0"; leave it for the caller.
                if !saw_sign && matches!(self.peek_at(1), Some(Tok::Cmp(_))) {
                    if terms.is_empty() {
                        return Err(self.error("constant term in expression"));
                    }
                    return Ok(terms);
                }
                // Trailing constant of an objective; it does not affect the argmin.
                if self.peek_at(1).is_none() {
                    self.pos += 1;
                    return Ok(terms);
                }
                coef = Some(v);
                self.pos += 1;
            }
            match self.peek() {
                Some(Tok::Ident(name))
                    if !matches!(self.peek_at(1), Some(Tok::Colon)) || coef.is_some() =>
                {
                    let name = name.clone();
                    self.pos += 1;
                    terms.push(LinearTerm {
                        coef: sign * coef.unwrap_or(1.0),
                        var: name,
                    });
                }
                _ => {
                    if saw_sign || coef.is_some() {
                        return Err(self.error("expected a variable name"));
                    }
                    return Ok(terms);
                }
            }
        }
    }

    fn cmp(&mut self) -> Result<Sense> {
        match self.peek() {
            Some(&Tok::Cmp(s)) => {
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error("expected a comparison operator")),
        }
    }

    fn signed_number(&mut self) -> Result<f64> {
        let mut sign = 1.0;
        while let Some(Tok::Plus | Tok::Minus) = self.peek() {
            if self.peek() == Some(&Tok::Minus) {
                sign = -sign;
            }
            self.pos += 1;
        }
        match self.peek() {
            Some(&Tok::Num(v)) => {
                self.pos += 1;
                Ok(sign * v)
            }
            _ => Err(self.error("expected a number")),
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error("expected a variable name")),
        }
    }

    fn bound(&mut self) -> Result<Bound> {
        // Forms: "l <= x <= u", "l <= x", "x >= l", "x <= u", "x = v", "x free".
        if let Some(Tok::Ident(_)) = self.peek() {
            let var = self.ident()?;
            if let Some(Tok::Ident(word)) = self.peek() {
                if word.eq_ignore_ascii_case("free") {
                    self.pos += 1;
                    return Ok(Bound {
                        var,
                        lower: f64::NEG_INFINITY,
                        upper: f64::INFINITY,
                    });
                }
            }
            let sense = self.cmp()?;
            let v = self.signed_number()?;
            let (lower, upper) = match sense {
                Sense::Le => (0.0, v),
                Sense::Ge => (v, f64::INFINITY),
                Sense::Eq => (v, v),
            };
            return Ok(Bound { var, lower, upper });
        }
        let lower = self.signed_number()?;
        let first = self.cmp()?;
        let var = self.ident()?;
        let mut bound = match first {
            Sense::Le => Bound {
                var,
                lower,
                upper: f64::INFINITY,
            },
            Sense::Ge => Bound {
                var,
                lower: 0.0,
                upper: lower,
            },
            Sense::Eq => Bound {
                var,
                lower,
                upper: lower,
            },
        };
        if let Some(Tok::Cmp(_)) = self.peek() {
            let second = self.cmp()?;
            let v = self.signed_number()?;
            match (first, second) {
                (Sense::Le, Sense::Le) => bound.upper = v,
                (Sense::Ge, Sense::Ge) => bound.lower = v,
                _ => return Err(self.error("inconsistent double bound")),
            }
        }
        Ok(bound)
    }
}
