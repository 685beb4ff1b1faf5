use std::ops::RangeInclusive;

use super::value::Value;

/// A canonical, duplicate-free, sorted enumeration of a finite universe.
///
/// Every exhaustive check in the crate walks one of these, so the order is
/// the `Ord` order of the elements and is stable across runs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteDomain<T> {
    elements: Vec<T>,
}

impl<T: Ord> FiniteDomain<T> {
    pub fn new(elements: impl IntoIterator<Item = T>) -> Self {
        let mut elements: Vec<T> = elements.into_iter().collect();
        elements.sort();
        elements.dedup();
        FiniteDomain { elements }
    }

    pub fn empty() -> Self {
        FiniteDomain { elements: Vec::new() }
    }

    pub fn contains(&self, x: &T) -> bool {
        self.elements.binary_search(x).is_ok()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.elements.iter()
    }

    pub fn elements(&self) -> &[T] {
        &self.elements
    }

    pub fn filter(&self, keep: impl Fn(&T) -> bool) -> Self
    where
        T: Clone,
    {
        FiniteDomain {
            elements: self.elements.iter().filter(|x| keep(x)).cloned().collect(),
        }
    }
}

impl FiniteDomain<Value> {
    /// Integers in an inclusive range, as values.
    pub fn ints(range: RangeInclusive<i64>) -> Self {
        FiniteDomain::new(range.map(Value::Int))
    }
}

impl FiniteDomain<()> {
    /// The single-point state universe of the set monad.
    pub fn unit() -> Self {
        FiniteDomain { elements: vec![()] }
    }
}

impl<T: Ord> FromIterator<T> for FiniteDomain<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        FiniteDomain::new(iter)
    }
}

impl<'a, T> IntoIterator for &'a FiniteDomain<T> {
    type Item = &'a T;
    type IntoIter = std::slice::Iter<'a, T>;

    fn into_iter(self) -> Self::IntoIter {
        self.elements.iter()
    }
}
