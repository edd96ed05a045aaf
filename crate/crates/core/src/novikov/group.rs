use std::fmt;

use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::{Exp, NovikovError};

/// A finitely generated subgroup of ℚ, used as the exponent group of a
/// Novikov field.
///
/// Every such group is cyclic, so it is stored as its positive generator
/// `step` (the gcd of the declared generators). The trivial group has
/// `step == 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ExponentGroup {
    step: Exp,
}

fn rational_gcd(a: Exp, b: Exp) -> Exp {
    if a.is_zero() {
        return b.abs();
    }
    if b.is_zero() {
        return a.abs();
    }
    let (an, ad) = (a.numer().abs(), *a.denom());
    let (bn, bd) = (b.numer().abs(), *b.denom());
    let den = ad.lcm(&bd);
    let num = (an * (den / ad)).gcd(&(bn * (den / bd)));
    Exp::new(num, den)
}

impl ExponentGroup {
    pub fn trivial() -> Self {
        ExponentGroup { step: Exp::zero() }
    }

    /// The cyclic group `ℤ·step`; a zero step gives the trivial group.
    pub fn cyclic(step: Exp) -> Self {
        ExponentGroup { step: step.abs() }
    }

    pub fn integers() -> Self {
        Self::cyclic(Exp::from_integer(1))
    }

    /// Group generated by `generators`, which must be positive and pairwise
    /// distinct.
    pub fn new(generators: &[Exp]) -> Result<Self, NovikovError> {
        let mut step = Exp::zero();
        for (i, g) in generators.iter().enumerate() {
            if !g.is_positive() {
                return Err(NovikovError::InvalidGroup(format!(
                    "generator {g} is not positive"
                )));
            }
            if generators[..i].contains(g) {
                return Err(NovikovError::InvalidGroup(format!(
                    "generator {g} is repeated"
                )));
            }
            step = rational_gcd(step, *g);
        }
        Ok(ExponentGroup { step })
    }

    pub fn step(&self) -> Exp {
        self.step
    }

    pub fn is_trivial(&self) -> bool {
        self.step.is_zero()
    }

    /// Canonical generator list: empty for the trivial group.
    pub fn generators(&self) -> Vec<Exp> {
        if self.is_trivial() {
            Vec::new()
        } else {
            vec![self.step]
        }
    }

    pub fn contains(&self, e: Exp) -> bool {
        if self.is_trivial() {
            e.is_zero()
        } else {
            (e / self.step).is_integer()
        }
    }

    pub fn is_subgroup_of(&self, other: &ExponentGroup) -> bool {
        other.contains(self.step)
    }

    /// Smallest group containing both.
    pub fn join(&self, other: &ExponentGroup) -> ExponentGroup {
        ExponentGroup {
            step: rational_gcd(self.step, other.step),
        }
    }

    /// Smallest group containing `self` and every element of `extra`.
    pub fn extended_by<I: IntoIterator<Item = Exp>>(&self, extra: I) -> ExponentGroup {
        let mut step = self.step;
        for e in extra {
            step = rational_gcd(step, e);
        }
        ExponentGroup { step }
    }

    /// Representative of the coset `e + Γ`: `e` itself for the trivial group,
    /// otherwise the unique element of `[0, step)`.
    pub fn coset_representative(&self, e: Exp) -> Exp {
        if self.is_trivial() {
            e
        } else {
            let q = (e / self.step).floor();
            e - q * self.step
        }
    }
}

impl fmt::Display for ExponentGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            write!(f, "0")
        } else {
            write!(f, "Z*{}", self.step)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Exp {
        Exp::new(n, d)
    }

    #[test]
    fn gcd_of_rational_generators() {
        let g = ExponentGroup::new(&[q(1, 2), q(1, 3)]).unwrap();
        assert_eq!(g.step(), q(1, 6));
        assert!(g.contains(q(5, 6)));
        assert!(!g.contains(q(1, 4)));
    }

    #[test]
    fn trivial_group() {
        let g = ExponentGroup::new(&[]).unwrap();
        assert!(g.is_trivial());
        assert!(g.contains(q(0, 1)));
        assert!(!g.contains(q(1, 1)));
        assert!(g.is_subgroup_of(&ExponentGroup::integers()));
        assert!(g.generators().is_empty());
    }

    #[test]
    fn rejects_bad_generators() {
        assert!(ExponentGroup::new(&[q(-1, 1)]).is_err());
        assert!(ExponentGroup::new(&[q(0, 1)]).is_err());
        assert!(ExponentGroup::new(&[q(1, 1), q(1, 1)]).is_err());
    }

    #[test]
    fn subgroup_and_cosets() {
        let half = ExponentGroup::cyclic(q(1, 2));
        let quarter = ExponentGroup::cyclic(q(1, 4));
        assert!(half.is_subgroup_of(&quarter));
        assert!(!quarter.is_subgroup_of(&half));
        assert_eq!(half.coset_representative(q(7, 4)), q(1, 4));
        assert_eq!(half.coset_representative(q(-1, 4)), q(1, 4));
        assert_eq!(
            ExponentGroup::integers().extended_by([q(2, 3)]).step(),
            q(1, 3)
        );
    }
}
