//! Fixed-width bitsets over row indices, used by the masking and
//! verification hot loops.

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Bits {
    words: Vec<u64>,
    len: usize,
}

impl Bits {
    pub fn empty(len: usize) -> Self {
        Bits {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn set(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn clear(&mut self) {
        self.words.fill(0);
    }

    pub fn union_with(&mut self, other: &Bits) {
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w |= o;
        }
    }

    /// True iff `self` has a bit outside `other`.
    pub fn any_outside(&self, other: &Bits) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .any(|(w, o)| w & !o != 0)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_and_subset_ops() {
        let mut a = Bits::empty(130);
        let mut b = Bits::empty(130);
        a.set(0);
        a.set(129);
        b.set(0);
        assert!(a.any_outside(&b));
        assert!(!b.any_outside(&a));
        b.union_with(&a);
        assert!(!a.any_outside(&b));
        assert_eq!(b.iter_ones().collect::<Vec<_>>(), vec![0, 129]);
        b.clear();
        assert_eq!(b.iter_ones().count(), 0);
    }
}
