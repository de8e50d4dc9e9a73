use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Exponent vector of a monomial in the action variables.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<u8>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, j: usize) -> Self {
        let mut e = vec![0; n];
        e[j] = 1;
        MultiIndex(e)
    }

    /// Panics if an entry exceeds 255.
    pub fn new(entries: &[usize]) -> Self {
        MultiIndex(
            entries
                .iter()
                .map(|&a| u8::try_from(a).expect("exponent above 255"))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&a| a as usize).sum()
    }

    pub fn get(&self, j: usize) -> usize {
        self.0[j] as usize
    }

    pub fn entries(&self) -> Vec<usize> {
        self.0.iter().map(|&a| a as usize).collect()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn add_unit(&self, j: usize) -> MultiIndex {
        let mut e = self.0.clone();
        e[j] += 1;
        MultiIndex(e)
    }

    pub fn sub_unit(&self, j: usize) -> Option<MultiIndex> {
        if self.0[j] == 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[j] -= 1;
        Some(MultiIndex(e))
    }

    /// Componentwise difference, `None` unless `other <= self`.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        let mut e = self.0.clone();
        for (a, b) in e.iter_mut().zip(&other.0) {
            *a = a.checked_sub(*b)?;
        }
        Some(MultiIndex(e))
    }

    /// Index of the last nonzero entry.
    pub fn last_nonzero(&self) -> Option<usize> {
        self.0.iter().rposition(|&a| a != 0)
    }

    /// α! = Π α_j!
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&a| (1..=a as u32).fold(1.0, |acc, i| acc * i as f64))
            .product()
    }

    /// Multinomial coefficient |α|! / α!.
    pub fn multinomial(&self) -> f64 {
        let n = self.degree() as u32;
        (1..=n).fold(1.0, |acc, i| acc * i as f64) / self.factorial()
    }

    pub fn monomial(&self, y: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(y)
            .map(|(&a, &v)| libm::pow(v, a as f64))
            .product()
    }

    /// Joins two exponent vectors into one over the concatenated variables.
    pub fn concat(&self, other: &MultiIndex) -> MultiIndex {
        let mut e = self.0.clone();
        e.extend_from_slice(&other.0);
        MultiIndex(e)
    }

    /// Splits into the first `at` entries and the rest.
    pub fn split(&self, at: usize) -> (MultiIndex, MultiIndex) {
        (
            MultiIndex(self.0[..at].to_vec()),
            MultiIndex(self.0[at..].to_vec()),
        )
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// All exponent vectors in `n` variables of total degree exactly `deg`,
/// in lexicographic order.
pub fn monomials(n: usize, deg: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut cur = vec![0u8; n];
    fill(&mut cur, 0, deg, &mut out);
    out.sort();
    out
}

fn fill(cur: &mut Vec<u8>, pos: usize, left: usize, out: &mut Vec<MultiIndex>) {
    let n = cur.len();
    if n == 0 {
        if left == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    if pos == n - 1 {
        cur[pos] = left as u8;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for a in 0..=left {
        cur[pos] = a as u8;
        fill(cur, pos + 1, left - a, out);
    }
    cur[pos] = 0;
}

/// All exponent vectors of degree `lo..=hi`, graded then lexicographic.
pub fn monomials_between(n: usize, lo: usize, hi: usize) -> Vec<MultiIndex> {
    (lo..=hi).flat_map(|deg| monomials(n, deg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_counts_match_binomials() {
        // C(n + deg - 1, deg)
        assert_eq!(monomials(2, 3).len(), 4);
        assert_eq!(monomials(3, 2).len(), 6);
        assert_eq!(monomials(1, 5).len(), 1);
        assert_eq!(monomials_between(2, 0, 8).len(), 45);
    }

    #[test]
    fn factorials_and_multinomials() {
        let a = MultiIndex::new(&[2, 1, 0]);
        assert_eq!(a.degree(), 3);
        assert_eq!(a.factorial(), 2.0);
        assert_eq!(a.multinomial(), 3.0);
        assert_eq!(a.sub_unit(2), None);
        assert_eq!(a.sub_unit(0), Some(MultiIndex::new(&[1, 1, 0])));
        assert_eq!(a.last_nonzero(), Some(1));
    }

    #[test]
    fn split_inverts_concat() {
        let a = MultiIndex::new(&[1, 2]);
        let b = MultiIndex::new(&[0, 3]);
        let (l, r) = a.concat(&b).split(2);
        assert_eq!((l, r), (a, b));
    }
}
