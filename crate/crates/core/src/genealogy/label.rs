use std::fmt;
use std::str::FromStr;

use super::GenealogyError;

/// Ulam–Harris label: the root is the empty path, and `u.i` is the `i`-th
/// child (1-based) of `u`. Proper prefixes of a label are its ancestors.
///
/// The derived order is lexicographic with prefixes first, which is also
/// the depth-first order of the genealogy.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(Vec<u32>);

impl Label {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    /// Panics if any coordinate is zero.
    pub fn new(path: impl Into<Vec<u32>>) -> Self {
        let path = path.into();
        assert!(path.iter().all(|&c| c > 0), "label coordinates are 1-based");
        Self(path)
    }

    pub fn path(&self) -> &[u32] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// The `index`-th daughter (1-based).
    pub fn child(&self, index: u32) -> Self {
        assert!(index > 0, "child indices are 1-based");
        let mut path = Vec::with_capacity(self.0.len() + 1);
        path.extend_from_slice(&self.0);
        path.push(index);
        Self(path)
    }

    pub fn parent(&self) -> Option<Self> {
        let (_, head) = self.0.split_last()?;
        Some(Self(head.to_vec()))
    }

    /// `self ≺ other` when `strict`, `self ⪯ other` otherwise.
    pub fn is_ancestor_of(&self, other: &Label, strict: bool) -> bool {
        is_ancestor(self, other, strict)
    }
}

/// Longest common prefix, i.e. the most recent common ancestor label.
pub fn lcp(a: &Label, b: &Label) -> Label {
    let shared = a.0.iter().zip(&b.0).take_while(|(x, y)| x == y).count();
    Label(a.0[..shared].to_vec())
}

/// Tests `a ≺ b` (proper prefix) or, with `strict = false`, `a ⪯ b`.
pub fn is_ancestor(a: &Label, b: &Label, strict: bool) -> bool {
    let shorter = if strict { a.0.len() < b.0.len() } else { a.0.len() <= b.0.len() };
    shorter && b.0.starts_with(&a.0)
}

/// Dot-joined path; the root prints as the empty string.
impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(".")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Label {
    type Err = GenealogyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Self::root());
        }
        let path = s
            .split('.')
            .map(|part| match part.parse::<u32>() {
                Ok(c) if c > 0 => Ok(c),
                _ => Err(GenealogyError::BadLabel(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self(path))
    }
}

impl From<&[u32]> for Label {
    fn from(path: &[u32]) -> Self {
        Self::new(path.to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(p: &[u32]) -> Label {
        Label::from(p)
    }

    #[test]
    fn lcp_examples() {
        assert_eq!(lcp(&l(&[1, 2, 1]), &l(&[1, 2, 2])), l(&[1, 2]));
        assert_eq!(lcp(&l(&[1]), &l(&[2])), Label::root());
        let u = l(&[3, 1, 4]);
        assert_eq!(lcp(&u, &u), u);
    }

    #[test]
    fn ancestry_examples() {
        assert!(is_ancestor(&Label::root(), &l(&[3, 1]), true));
        assert!(!is_ancestor(&l(&[1, 2]), &l(&[1, 2]), true));
        assert!(is_ancestor(&l(&[1, 2]), &l(&[1, 2]), false));
        assert!(!is_ancestor(&l(&[1, 2]), &l(&[1, 3, 2]), true));
        assert!(!is_ancestor(&l(&[1, 2, 3]), &l(&[1, 2]), false));
    }

    #[test]
    fn text_form() {
        assert_eq!(l(&[2, 1]).to_string(), "2.1");
        assert_eq!(Label::root().to_string(), "");
        assert_eq!("2.1".parse::<Label>().unwrap(), l(&[2, 1]));
        assert_eq!("".parse::<Label>().unwrap(), Label::root());
        assert!("2.0".parse::<Label>().is_err());
        assert!("a".parse::<Label>().is_err());
    }

    #[test]
    fn order_is_depth_first() {
        let mut v = vec![l(&[2]), l(&[1, 2]), Label::root(), l(&[1]), l(&[1, 1])];
        v.sort();
        assert_eq!(v, vec![Label::root(), l(&[1]), l(&[1, 1]), l(&[1, 2]), l(&[2])]);
    }
}
