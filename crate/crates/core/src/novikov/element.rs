use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::{Coeff, Exp, ExponentGroup, NovikovError, Valuation};

/// An element `Σ a_g T^g` of the Novikov field over ℚ with exponents in an
/// [`ExponentGroup`].
///
/// The element is stored as finitely many terms together with a `cutoff`:
/// every term with exponent strictly below the cutoff is represented
/// exactly, and nothing is known about exponents at or above it. A cutoff of
/// `None` means the element is exactly the finite sum of its terms.
///
/// Terms are kept sorted by exponent with nonzero coefficients, so derived
/// equality is equality of canonical forms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Novikov {
    group: ExponentGroup,
    terms: Vec<(Exp, Coeff)>,
    cutoff: Option<Exp>,
}

fn min_cutoff(a: Option<Exp>, b: Option<Exp>) -> Option<Exp> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

fn add_opt(a: Option<Exp>, b: Option<Exp>) -> Option<Exp> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x + y),
        _ => None,
    }
}

impl Novikov {
    pub fn zero(group: ExponentGroup) -> Self {
        Novikov {
            group,
            terms: Vec::new(),
            cutoff: None,
        }
    }

    pub fn one(group: ExponentGroup) -> Self {
        Self::constant(group, Coeff::one())
    }

    pub fn constant(group: ExponentGroup, c: Coeff) -> Self {
        Self::from_terms_unchecked(group, vec![(Exp::zero(), c)], None)
    }

    /// `c·T^e`; fails if `e` is not in the group.
    pub fn monomial(group: ExponentGroup, c: Coeff, e: Exp) -> Result<Self, NovikovError> {
        Self::from_terms(group, vec![(e, c)], None)
    }

    /// Builds an element from arbitrary terms: sorts, merges equal
    /// exponents, drops zero coefficients and terms at or above the cutoff.
    pub fn from_terms(
        group: ExponentGroup,
        terms: Vec<(Exp, Coeff)>,
        cutoff: Option<Exp>,
    ) -> Result<Self, NovikovError> {
        if let Some(&(e, _)) = terms.iter().find(|(e, _)| !group.contains(*e)) {
            return Err(NovikovError::ExponentOutsideGroup { exponent: e, group });
        }
        Ok(Self::from_terms_unchecked(group, terms, cutoff))
    }

    pub(crate) fn from_terms_unchecked(
        group: ExponentGroup,
        terms: Vec<(Exp, Coeff)>,
        cutoff: Option<Exp>,
    ) -> Self {
        let mut map: BTreeMap<Exp, Coeff> = BTreeMap::new();
        for (e, c) in terms {
            if cutoff.is_some_and(|k| e >= k) {
                continue;
            }
            *map.entry(e).or_insert_with(Coeff::zero) += c;
        }
        let terms = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Novikov {
            group,
            terms,
            cutoff,
        }
    }

    pub fn group(&self) -> ExponentGroup {
        self.group
    }

    pub fn terms(&self) -> &[(Exp, Coeff)] {
        &self.terms
    }

    pub fn cutoff(&self) -> Option<Exp> {
        self.cutoff
    }

    pub fn is_exact(&self) -> bool {
        self.cutoff.is_none()
    }

    /// No terms below the cutoff. For exact elements this is the zero element.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.terms.is_empty() && self.cutoff.is_none()
    }

    pub fn leading(&self) -> Option<&(Exp, Coeff)> {
        self.terms.first()
    }

    /// Single term with exponent `e`, if present.
    pub fn coefficient(&self, e: Exp) -> Coeff {
        self.terms
            .binary_search_by(|(x, _)| x.cmp(&e))
            .map(|i| self.terms[i].1.clone())
            .unwrap_or_else(|_| Coeff::zero())
    }

    /// The valuation `min{g : a_g ≠ 0}`.
    pub fn nu(&self) -> Result<Valuation, NovikovError> {
        match (self.terms.first(), self.cutoff) {
            (Some((e, _)), _) => Ok(Valuation::Finite(*e)),
            (None, None) => Ok(Valuation::Infinite),
            (None, Some(c)) => Err(NovikovError::CutoffAmbiguous { cutoff: c }),
        }
    }

    /// A lower bound for the valuation that is exact whenever a term is
    /// present; `None` only for the exact zero element.
    pub fn lower_valuation(&self) -> Option<Exp> {
        match self.terms.first() {
            Some((e, _)) => Some(*e),
            None => self.cutoff,
        }
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1 && self.cutoff.is_none()
    }

    fn check_group(&self, other: &Novikov) -> Result<(), NovikovError> {
        if self.group != other.group {
            return Err(NovikovError::GroupMismatch {
                left: self.group,
                right: other.group,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Novikov) -> Result<Novikov, NovikovError> {
        self.check_group(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn try_sub(&self, other: &Novikov) -> Result<Novikov, NovikovError> {
        self.check_group(other)?;
        Ok(self.add_unchecked(&-other))
    }

    pub fn try_mul(&self, other: &Novikov) -> Result<Novikov, NovikovError> {
        self.check_group(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn add_unchecked(&self, other: &Novikov) -> Novikov {
        let cutoff = min_cutoff(self.cutoff, other.cutoff);
        let below = |e: &Exp| cutoff.is_none_or(|k| *e < k);
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() || j < b.len() {
            let take = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) => x.0.cmp(&y.0),
                (Some(_), None) => std::cmp::Ordering::Less,
                _ => std::cmp::Ordering::Greater,
            };
            match take {
                std::cmp::Ordering::Less => {
                    if below(&a[i].0) {
                        out.push(a[i].clone());
                    }
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    if below(&b[j].0) {
                        out.push(b[j].clone());
                    }
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = &a[i].1 + &b[j].1;
                    if !c.is_zero() && below(&a[i].0) {
                        out.push((a[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Novikov {
            group: self.group,
            terms: out,
            cutoff,
        }
    }

    fn mul_unchecked(&self, other: &Novikov) -> Novikov {
        // x·y is known below min(cut_x + ν(y), cut_y + ν(x)).
        let cutoff = min_cutoff(
            add_opt(self.cutoff, other.lower_valuation()),
            add_opt(other.cutoff, self.lower_valuation()),
        );
        let cutoff = match (self.lower_valuation(), other.lower_valuation()) {
            (None, _) | (_, None) => None,
            _ => cutoff,
        };
        if self.terms.is_empty() || other.terms.is_empty() {
            return Novikov {
                group: self.group,
                terms: Vec::new(),
                cutoff,
            };
        }
        let mut map: BTreeMap<Exp, Coeff> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea + eb;
                if cutoff.is_some_and(|k| e >= k) {
                    // terms of `other` are sorted, later ones are larger
                    break;
                }
                let prod = ca * cb;
                match map.get_mut(&e) {
                    Some(acc) => *acc += prod,
                    None => {
                        map.insert(e, prod);
                    }
                }
            }
        }
        Novikov {
            group: self.group,
            terms: map.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
            cutoff,
        }
    }

    /// Multiplies by a field constant.
    pub fn scale(&self, c: &Coeff) -> Novikov {
        if c.is_zero() {
            return Novikov {
                group: self.group,
                terms: Vec::new(),
                cutoff: None,
            };
        }
        Novikov {
            group: self.group,
            terms: self.terms.iter().map(|(e, a)| (*e, a * c)).collect(),
            cutoff: self.cutoff,
        }
    }

    /// Multiplies by `T^e`; `e` must lie in the group.
    pub fn mul_monomial(&self, e: Exp) -> Result<Novikov, NovikovError> {
        if !self.group.contains(e) {
            return Err(NovikovError::ExponentOutsideGroup {
                exponent: e,
                group: self.group,
            });
        }
        Ok(self.shift_unchecked(e))
    }

    pub(crate) fn shift_unchecked(&self, e: Exp) -> Novikov {
        Novikov {
            group: self.group,
            terms: self.terms.iter().map(|(x, c)| (x + e, c.clone())).collect(),
            cutoff: self.cutoff.map(|k| k + e),
        }
    }

    /// Forgets every term at or above `cutoff`.
    pub fn truncate(&self, cutoff: Exp) -> Novikov {
        let cutoff = min_cutoff(self.cutoff, Some(cutoff));
        Novikov {
            group: self.group,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| cutoff.is_none_or(|k| *e < k))
                .cloned()
                .collect(),
            cutoff,
        }
    }

    /// Declares the truncation exact. Used where the true value is known to
    /// be the represented finite sum (for instance a cancelled entry).
    pub(crate) fn into_exact(mut self) -> Novikov {
        self.cutoff = None;
        self
    }

    /// Reinterprets the element over a larger exponent group.
    pub fn extend_group(&self, larger: ExponentGroup) -> Result<Novikov, NovikovError> {
        if !self.group.is_subgroup_of(&larger) {
            return Err(NovikovError::NotASubgroup {
                smaller: self.group,
                larger,
            });
        }
        Ok(self.with_group_unchecked(larger))
    }

    pub(crate) fn with_group_unchecked(&self, group: ExponentGroup) -> Novikov {
        Novikov {
            group,
            terms: self.terms.clone(),
            cutoff: self.cutoff,
        }
    }

    /// Terms whose exponent lies in the coset `rep + sub`.
    pub(crate) fn coset_part(&self, sub: &ExponentGroup, rep: Exp) -> Novikov {
        Novikov {
            group: self.group,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| sub.coset_representative(*e) == rep)
                .cloned()
                .collect(),
            cutoff: self.cutoff,
        }
    }

    /// Multiplicative inverse, truncated at the precision the operand
    /// supports. Exact elements must be monomials; use [`Novikov::invert_to`]
    /// for other exact elements.
    pub fn invert(&self) -> Result<Novikov, NovikovError> {
        self.invert_impl(None)
    }

    /// Multiplicative inverse known below `cutoff` (or below the precision
    /// the operand supports, whichever is smaller).
    pub fn invert_to(&self, cutoff: Exp) -> Result<Novikov, NovikovError> {
        self.invert_impl(Some(cutoff))
    }

    fn invert_impl(&self, target: Option<Exp>) -> Result<Novikov, NovikovError> {
        let Some((v, a)) = self.terms.first().cloned() else {
            return Err(NovikovError::DivisionByZero);
        };
        let a_inv = a.recip();
        if self.is_monomial() {
            return Ok(Novikov {
                group: self.group,
                terms: vec![(-v, a_inv)],
                cutoff: None,
            });
        }
        // relative precision p: 1/x = a⁻¹T^{-v}·(1+u)⁻¹ with (1+u)⁻¹ known below T^p
        let p = match (self.cutoff.map(|k| k - v), target.map(|t| t + v)) {
            (Some(x), Some(y)) => x.min(y),
            (Some(x), None) | (None, Some(x)) => x,
            (None, None) => return Err(NovikovError::NeedsCutoff),
        };
        let unit: Vec<(Exp, Coeff)> = self
            .terms
            .iter()
            .map(|(e, c)| (e - v, c * &a_inv))
            .filter(|(e, _)| *e < p)
            .collect();
        let unit = Novikov {
            group: self.group,
            terms: unit,
            cutoff: Some(p),
        };
        let mut quotient: Vec<(Exp, Coeff)> = Vec::new();
        let mut rem = Novikov {
            group: self.group,
            terms: vec![(Exp::zero(), Coeff::one())],
            cutoff: Some(p),
        };
        while let Some((e, c)) = rem.terms.first().cloned() {
            quotient.push((e, c.clone()));
            let step = unit.shift_unchecked(e).scale(&c);
            rem = rem.add_unchecked(&-&step);
            rem.cutoff = Some(p);
        }
        Ok(Novikov {
            group: self.group,
            terms: quotient
                .into_iter()
                .map(|(e, c)| (e - v, c * &a_inv))
                .collect(),
            cutoff: Some(p - v),
        })
    }

    /// Parses the textual form `c*T^e; c*T^e; ...`, optionally ending in
    /// `O(T^k)` for a finite cutoff. `0` is the exact zero element.
    pub fn parse(group: ExponentGroup, text: &str) -> Result<Novikov, NovikovError> {
        let trimmed = text.trim();
        if trimmed == "0" {
            return Ok(Novikov::zero(group));
        }
        let mut terms = Vec::new();
        let mut cutoff = None;
        let mut offset = text.len() - text.trim_start().len();
        for part in trimmed.split(';') {
            let col = offset + (part.len() - part.trim_start().len());
            offset += part.len() + 1;
            let part = part.trim();
            let err = |msg: &str| NovikovError::Parse {
                column: col + 1,
                message: format!("{msg}: `{part}`"),
            };
            if let Some(inner) = part.strip_prefix("O(T^").and_then(|s| s.strip_suffix(')')) {
                if cutoff.is_some() {
                    return Err(err("duplicate cutoff"));
                }
                cutoff = Some(parse_exp(inner).ok_or_else(|| err("bad cutoff exponent"))?);
                continue;
            }
            if cutoff.is_some() {
                return Err(err("term after cutoff"));
            }
            let (c, e) = part
                .split_once("*T^")
                .ok_or_else(|| err("expected `coeff*T^exp`"))?;
            let c = parse_coeff(c.trim()).ok_or_else(|| err("bad coefficient"))?;
            let e = parse_exp(e.trim()).ok_or_else(|| err("bad exponent"))?;
            if c.is_zero() {
                return Err(err("zero coefficient"));
            }
            if terms.iter().any(|(x, _)| *x == e) {
                return Err(err("repeated exponent"));
            }
            terms.push((e, c));
        }
        if cutoff.is_none() && terms.is_empty() {
            return Err(NovikovError::Parse {
                column: 1,
                message: "empty element".into(),
            });
        }
        Novikov::from_terms(group, terms, cutoff)
    }
}

pub(crate) fn parse_exp(s: &str) -> Option<Exp> {
    let s = s.trim();
    if s.ends_with("/0") || s.is_empty() {
        return None;
    }
    s.parse().ok()
}

pub(crate) fn parse_coeff(s: &str) -> Option<Coeff> {
    let s = s.trim();
    if s.ends_with("/0") || s.is_empty() {
        return None;
    }
    s.parse().ok()
}

impl fmt::Display for Novikov {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() && self.cutoff.is_none() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, "; ")?;
            }
            first = false;
            write!(f, "{c}*T^{e}")?;
        }
        if let Some(k) = self.cutoff {
            if !first {
                write!(f, "; ")?;
            }
            write!(f, "O(T^{k})")?;
        }
        Ok(())
    }
}

impl Neg for &Novikov {
    type Output = Novikov;
    fn neg(self) -> Novikov {
        Novikov {
            group: self.group,
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
            cutoff: self.cutoff,
        }
    }
}

impl Neg for Novikov {
    type Output = Novikov;
    fn neg(self) -> Novikov {
        -&self
    }
}

// Operator forms panic on mismatched groups; the `try_*` methods report it.
impl Add for &Novikov {
    type Output = Novikov;
    fn add(self, rhs: &Novikov) -> Novikov {
        self.try_add(rhs)
            .expect("Novikov addition across exponent groups")
    }
}

impl Sub for &Novikov {
    type Output = Novikov;
    fn sub(self, rhs: &Novikov) -> Novikov {
        self.try_sub(rhs)
            .expect("Novikov subtraction across exponent groups")
    }
}

impl Mul for &Novikov {
    type Output = Novikov;
    fn mul(self, rhs: &Novikov) -> Novikov {
        self.try_mul(rhs)
            .expect("Novikov product across exponent groups")
    }
}
