//! Neighbouring values: a default literal plus per-device exceptions.

use std::collections::BTreeMap;
use std::fmt;

use crate::value::{DeviceId, Literal};

/// `default[δ1 -> ℓ1, …]`. Exceptions equal to the default are never stored,
/// so structural equality is value equality.
#[derive(Clone, Debug, PartialEq)]
pub struct NValue {
    default: Literal,
    exceptions: BTreeMap<DeviceId, Literal>,
}

impl NValue {
    pub fn lift(default: Literal) -> Self {
        NValue { default, exceptions: BTreeMap::new() }
    }

    /// Builds a canonical nvalue; later entries for the same device win.
    pub fn from_entries(default: Literal, entries: impl IntoIterator<Item = (DeviceId, Literal)>) -> Self {
        let mut exceptions = BTreeMap::new();
        for (d, l) in entries {
            if l == default {
                exceptions.remove(&d);
            } else {
                exceptions.insert(d, l);
            }
        }
        NValue { default, exceptions }
    }

    pub fn default(&self) -> &Literal {
        &self.default
    }

    pub fn exceptions(&self) -> impl Iterator<Item = (DeviceId, &Literal)> + '_ {
        self.exceptions.iter().map(|(d, l)| (*d, l))
    }

    pub fn is_lifted(&self) -> bool {
        self.exceptions.is_empty()
    }

    pub fn lookup(&self, d: DeviceId) -> &Literal {
        self.exceptions.get(&d).unwrap_or(&self.default)
    }

    pub fn update_self(&self, d: DeviceId, l: Literal) -> Self {
        let mut out = self.clone();
        if l == out.default {
            out.exceptions.remove(&d);
        } else {
            out.exceptions.insert(d, l);
        }
        out
    }

    pub fn update_def(&self, l: Literal) -> Self {
        self.update_def_over(std::iter::empty(), l)
    }

    /// Replaces the default after pinning the current value at each of
    /// `devices`, so those devices keep what they had.
    pub fn update_def_over(&self, devices: impl IntoIterator<Item = DeviceId>, l: Literal) -> Self {
        let mut entries: Vec<(DeviceId, Literal)> = self.exceptions.iter().map(|(d, v)| (*d, v.clone())).collect();
        for d in devices {
            if !self.exceptions.contains_key(&d) {
                entries.push((d, self.default.clone()));
            }
        }
        NValue::from_entries(l, entries)
    }

    /// Drops exceptions for devices outside `keep`.
    pub fn restrict(&self, keep: &[DeviceId]) -> Self {
        NValue {
            default: self.default.clone(),
            exceptions: self
                .exceptions
                .iter()
                .filter(|(d, _)| keep.contains(d))
                .map(|(d, l)| (*d, l.clone()))
                .collect(),
        }
    }

    /// Applies `f` device-wise: on the defaults and at every device that is an
    /// exception in any argument.
    pub fn pointwise<E>(ws: &[&NValue], mut f: impl FnMut(&[&Literal]) -> Result<Literal, E>) -> Result<NValue, E> {
        let defaults: Vec<&Literal> = ws.iter().map(|w| &w.default).collect();
        let default = f(&defaults)?;
        let mut keys: Vec<DeviceId> = ws.iter().flat_map(|w| w.exceptions.keys().copied()).collect();
        keys.sort_unstable();
        keys.dedup();
        let mut entries = Vec::with_capacity(keys.len());
        for d in keys {
            let at: Vec<&Literal> = ws.iter().map(|w| w.lookup(d)).collect();
            entries.push((d, f(&at)?));
        }
        Ok(NValue::from_entries(default, entries))
    }

    /// Left fold over `neighbours` in the given order, skipping `me`.
    pub fn nfold_local<E>(
        &self,
        init: Literal,
        neighbours: &[DeviceId],
        me: DeviceId,
        mut f: impl FnMut(Literal, &Literal) -> Result<Literal, E>,
    ) -> Result<Literal, E> {
        let mut acc = init;
        for &d in neighbours {
            if d != me {
                acc = f(acc, self.lookup(d))?;
            }
        }
        Ok(acc)
    }

    /// Parses the canonical rendering. Function literals are only accepted
    /// when `closures` knows their name.
    pub fn parse_with(text: &str, closures: &dyn Fn(&str) -> Option<Literal>) -> Result<NValue, crate::syntax::SyntaxError> {
        crate::syntax::parse_nvalue(text, closures)
    }

    /// Bit-level equality, treating NaN payloads as equal to themselves.
    pub fn same(&self, other: &NValue) -> bool {
        self.default.same(&other.default)
            && self.exceptions.len() == other.exceptions.len()
            && self
                .exceptions
                .iter()
                .zip(other.exceptions.iter())
                .all(|((d, a), (e, b))| d == e && a.same(b))
    }
}

impl std::str::FromStr for NValue {
    type Err = crate::syntax::SyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NValue::parse_with(s, &|_| None)
    }
}

impl fmt::Display for NValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[", self.default)?;
        for (i, (d, l)) in self.exceptions.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{d}->{l}")?;
        }
        f.write_str("]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    fn n(x: f64) -> Literal {
        Literal::Num(x)
    }

    fn d(i: u32) -> DeviceId {
        DeviceId(i)
    }

    fn add(ws: &[&NValue]) -> NValue {
        NValue::pointwise::<Infallible>(ws, |ls| Ok(n(ls.iter().map(|l| l.as_num().unwrap()).sum()))).unwrap()
    }

    #[test]
    fn canonical_pruning() {
        let w = NValue::from_entries(n(0.0), [(d(1), n(1.0))]);
        assert_eq!(w.update_self(d(1), n(0.0)), NValue::lift(n(0.0)));
        assert_eq!(w.update_self(d(2), n(7.0)).to_string(), "0[1->1, 2->7]");
        assert_eq!(NValue::lift(n(3.0)).update_self(d(0), n(3.0)), NValue::lift(n(3.0)));
    }

    #[test]
    fn defaults_and_restriction() {
        let w = NValue::from_entries(n(0.0), [(d(1), n(1.0))]);
        assert_eq!(w.update_def(n(9.0)).to_string(), "9[1->1]");
        assert_eq!(NValue::lift(n(5.0)).update_def(n(5.0)).to_string(), "5[]");
        let w2 = NValue::from_entries(n(0.0), [(d(1), n(1.0)), (d(2), n(2.0))]);
        assert_eq!(w2.restrict(&[d(1)]).to_string(), "0[1->1]");
        assert_eq!(w2.restrict(&[]), NValue::lift(n(0.0)));
        let pinned = NValue::lift(n(1.0)).update_def_over([d(2), d(4)], n(0.0));
        assert_eq!(pinned.to_string(), "0[2->1, 4->1]");
    }

    #[test]
    fn pointwise_sum() {
        let w1 = NValue::from_entries(n(0.0), [(d(1), n(1.0)), (d(2), n(2.0))]);
        let w2 = NValue::from_entries(n(2.0), [(d(2), n(1.0))]);
        assert_eq!(add(&[&w1, &w2]).to_string(), "2[1->3, 2->3]");
        assert_eq!(add(&[&w1, &NValue::lift(n(1.0))]).to_string(), "1[1->2, 2->3]");
    }

    #[test]
    fn fold_skips_self() {
        let w1 = NValue::from_entries(n(0.0), [(d(1), n(1.0)), (d(2), n(2.0))]);
        let sum = |a: Literal, b: &Literal| Ok::<_, Infallible>(n(a.as_num().unwrap() + b.as_num().unwrap()));
        assert_eq!(w1.nfold_local(n(10.0), &[d(1), d(3)], d(2), sum).unwrap(), n(11.0));
        assert_eq!(w1.nfold_local(n(10.0), &[d(2)], d(2), sum).unwrap(), n(10.0));
        assert_eq!(w1.nfold_local(n(10.0), &[], d(2), sum).unwrap(), n(10.0));
    }

    #[test]
    fn text_round_trip() {
        let w: NValue = "Infinity[0->-1, 7->0.25]".parse().unwrap();
        assert_eq!(w.lookup(d(7)), &n(0.25));
        assert_eq!(w.to_string().parse::<NValue>().unwrap(), w);
        let p: NValue = "Pair(1, True)[3->Pair(2, False)]".parse().unwrap();
        assert_eq!(p.to_string(), "Pair(1, True)[3->Pair(2, False)]");
        let f: NValue = "+[1->mux, 2->-]".parse().unwrap();
        assert_eq!(f.to_string(), "+[1->mux, 2->-]");
    }
}
