//! Sparse multivariate polynomials over the rationals.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arrangement::{Circle, Orientation};
use crate::exact_arith::{format_rat, parse_rat, rat_to_f64, MixedFieldError, QuadExt, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error(transparent)]
    MixedField(#[from] MixedFieldError),
    #[error("point has {got} coordinates, polynomial has {want} variables")]
    Arity { got: usize, want: usize },
    #[error("cannot parse polynomial term `{0}`")]
    Parse(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
}

/// Polynomial with named variables and exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    vars: Vec<String>,
    terms: BTreeMap<Vec<u32>, Rat>,
}

/// `x1..xn`.
pub fn x_vars(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

impl Poly {
    pub fn zero(vars: Vec<String>) -> Self {
        Poly { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: Vec<String>, c: Rat) -> Self {
        let mut p = Poly::zero(vars);
        let e = vec![0; p.vars.len()];
        p.add_term(e, c);
        p
    }

    /// The variable with index `i`.
    pub fn var(vars: Vec<String>, i: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        let mut p = Poly::zero(vars);
        p.add_term(e, Rat::one());
        p
    }

    pub fn from_terms(vars: Vec<String>, terms: impl IntoIterator<Item = (Vec<u32>, Rat)>) -> Self {
        let mut p = Poly::zero(vars);
        for (e, c) in terms {
            assert_eq!(e.len(), p.vars.len(), "exponent arity");
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Vec<u32>, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rat)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn coeff(&self, e: &[u32]) -> Rat {
        self.terms.get(e).cloned().unwrap_or_else(Rat::zero)
    }

    fn check_vars(&self, o: &Poly) {
        assert_eq!(self.vars, o.vars, "polynomials over different variable lists");
    }

    pub fn add(&self, o: &Poly) -> Poly {
        self.check_vars(o);
        let mut p = self.clone();
        for (e, c) in &o.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Poly {
        self.scale(&-Rat::one())
    }

    pub fn scale(&self, k: &Rat) -> Poly {
        if k.is_zero() {
            return Poly::zero(self.vars.clone());
        }
        Poly { vars: self.vars.clone(), terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect() }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        self.check_vars(o);
        let mut p = Poly::zero(self.vars.clone());
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, c1 * c2);
            }
        }
        p
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut p = Poly::constant(self.vars.clone(), Rat::one());
        for _ in 0..k {
            p = p.mul(self);
        }
        p
    }

    /// Re-expresses the polynomial over a larger variable list, matching variables by name.
    pub fn embed(&self, vars: &[String]) -> Result<Poly, PolyError> {
        let idx: Vec<usize> = self
            .vars
            .iter()
            .map(|v| vars.iter().position(|w| w == v).ok_or_else(|| PolyError::UnknownVariable(v.clone())))
            .collect::<Result<_, _>>()?;
        let mut p = Poly::zero(vars.to_vec());
        for (e, c) in &self.terms {
            let mut ne = vec![0; vars.len()];
            for (k, &i) in idx.iter().enumerate() {
                ne[i] = e[k];
            }
            p.add_term(ne, c.clone());
        }
        Ok(p)
    }

    /// Partial derivative with respect to variable `k`.
    pub fn derivative(&self, k: usize) -> Poly {
        let mut p = Poly::zero(self.vars.clone());
        for (e, c) in &self.terms {
            if e[k] == 0 {
                continue;
            }
            let mut ne = e.clone();
            ne[k] -= 1;
            p.add_term(ne, c * Rat::from_integer(e[k].into()));
        }
        p
    }

    pub fn eval_rat(&self, point: &[Rat]) -> Rat {
        assert_eq!(point.len(), self.vars.len());
        let mut acc = Rat::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    t *= x;
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.vars.len());
        self.terms
            .iter()
            .map(|(e, c)| rat_to_f64(c) * point.iter().zip(e).map(|(x, &k)| x.powi(k as i32)).product::<f64>())
            .sum()
    }

    /// Canonical text: graded-lex order, constant first, e.g. `1 - 1*x1^2 - 1*x2^2`.
    pub fn to_text(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (e, c)) in self.sorted_terms().into_iter().enumerate() {
            let mono = self.monomial_text(e);
            let neg = c.is_negative();
            let mag = format_rat(&c.abs());
            let body = if mono.is_empty() { mag } else { format!("{mag}*{mono}") };
            match (i, neg) {
                (0, false) => out.push_str(&body),
                (0, true) => {
                    out.push('-');
                    out.push_str(&body);
                }
                (_, false) => {
                    out.push_str(" + ");
                    out.push_str(&body);
                }
                (_, true) => {
                    out.push_str(" - ");
                    out.push_str(&body);
                }
            }
        }
        out
    }

    fn sorted_terms(&self) -> Vec<(&Vec<u32>, &Rat)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            da.cmp(&db).then_with(|| b.cmp(a))
        });
        v
    }

    fn monomial_text(&self, e: &[u32]) -> String {
        let parts: Vec<String> = e
            .iter()
            .zip(&self.vars)
            .filter(|(k, _)| **k > 0)
            .map(|(&k, v)| if k == 1 { v.clone() } else { format!("{v}^{k}") })
            .collect();
        parts.join("*")
    }

    /// Parses the canonical text form (also tolerates missing unit coefficients and extra spaces).
    pub fn parse(text: &str, vars: &[String]) -> Result<Poly, PolyError> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut p = Poly::zero(vars.to_vec());
        if compact == "0" {
            return Ok(p);
        }
        let mut pieces: Vec<(bool, String)> = Vec::new();
        let mut cur = String::new();
        let mut neg = false;
        for (i, ch) in compact.chars().enumerate() {
            if (ch == '+' || ch == '-') && i > 0 && !cur.ends_with('^') {
                pieces.push((neg, std::mem::take(&mut cur)));
                neg = ch == '-';
            } else if (ch == '+' || ch == '-') && i == 0 {
                neg = ch == '-';
            } else {
                cur.push(ch);
            }
        }
        pieces.push((neg, cur));
        for (neg, term) in pieces {
            if term.is_empty() {
                return Err(PolyError::Parse(text.to_string()));
            }
            let mut coeff = Rat::one();
            let mut e = vec![0u32; vars.len()];
            for (k, factor) in term.split('*').enumerate() {
                if k == 0 {
                    if let Ok(c) = parse_rat(factor) {
                        coeff = c;
                        continue;
                    }
                }
                let (name, pow) = match factor.split_once('^') {
                    Some((n, k)) => (n, k.parse::<u32>().map_err(|_| PolyError::Parse(term.clone()))?),
                    None => (factor, 1),
                };
                let i = vars
                    .iter()
                    .position(|v| v == name)
                    .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
                e[i] += pow;
            }
            if neg {
                coeff = -coeff;
            }
            p.add_term(e, coeff);
        }
        Ok(p)
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            variables: self.vars.clone(),
            terms: self
                .sorted_terms()
                .into_iter()
                .map(|(e, c)| TermJson { coeff: format_rat(c), exponents: e.clone() })
                .collect(),
        }
    }

    pub fn from_json(j: &PolyJson) -> Result<Poly, PolyError> {
        let mut p = Poly::zero(j.variables.clone());
        for t in &j.terms {
            if t.exponents.len() != j.variables.len() {
                return Err(PolyError::Arity { got: t.exponents.len(), want: j.variables.len() });
            }
            let c = parse_rat(&t.coeff).map_err(|_| PolyError::Parse(t.coeff.clone()))?;
            p.add_term(t.exponents.clone(), c);
        }
        Ok(p)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: String,
    pub exponents: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyJson {
    pub variables: Vec<String>,
    pub terms: Vec<TermJson>,
}

/// Exact value at a point whose coordinates share one quadratic field.
pub fn poly_eval(p: &Poly, point: &[QuadExt]) -> Result<QuadExt, PolyError> {
    if point.len() != p.nvars() {
        return Err(PolyError::Arity { got: point.len(), want: p.nvars() });
    }
    let mut field: Option<&QuadExt> = None;
    for x in point {
        if let Some(d) = x.field() {
            match field {
                Some(f) if f.field() != Some(d) => {
                    return Err(MixedFieldError(f.field().unwrap().clone(), d.clone()).into())
                }
                _ => field = Some(x),
            }
        }
    }
    let max_deg = p.terms.keys().flat_map(|e| e.iter().copied()).max().unwrap_or(0) as usize;
    let powers: Vec<Vec<QuadExt>> = point
        .iter()
        .map(|x| {
            let mut v = vec![QuadExt::from_int(1)];
            for k in 1..=max_deg {
                let next = v[k - 1].checked_mul(x).expect("single field");
                v.push(next);
            }
            v
        })
        .collect();
    let mut acc = QuadExt::zero();
    for (e, c) in &p.terms {
        let mut t = QuadExt::from_rat(c.clone());
        for (i, &k) in e.iter().enumerate() {
            if k > 0 {
                t = t.checked_mul(&powers[i][k as usize])?;
            }
        }
        acc = acc.checked_add(&t)?;
    }
    Ok(acc)
}

/// Gradient as one polynomial per variable.
pub fn poly_grad(p: &Poly) -> Vec<Poly> {
    (0..p.nvars()).map(|k| p.derivative(k)).collect()
}

/// Defining polynomial of a circle in `x1, x2`, positive on the side given by its orientation.
pub fn circle_poly(c: &Circle) -> Poly {
    let vars = x_vars(2);
    let x1 = Poly::var(vars.clone(), 0).sub(&Poly::constant(vars.clone(), c.center.0.clone()));
    let x2 = Poly::var(vars.clone(), 1).sub(&Poly::constant(vars.clone(), c.center.1.clone()));
    let r2 = &c.radius * &c.radius;
    let outside = x1.pow(2).add(&x2.pow(2)).sub(&Poly::constant(vars, r2));
    match c.orientation {
        Orientation::Outside => outside,
        Orientation::Inside => outside.neg(),
    }
}
