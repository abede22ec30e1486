use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::to_f64;

/// Local assignments are addressed by their mixed-radix index, first incident edge most significant.
pub type LocalIndex = u64;

const DENSE_LIMIT: u64 = 1 << 16;

/// A non-negative local function stored as its support (the local code) plus values.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTable {
    radices: Vec<u32>,
    support: Vec<LocalIndex>,
    exact: Vec<BigRational>,
    values: Vec<f64>,
    dense: Option<Vec<u32>>,
}

impl LocalTable {
    /// Builds a table from `(assignment, value)` rows; unlisted assignments are zero.
    pub fn from_rows(radices: Vec<u32>, rows: Vec<(Vec<u32>, BigRational)>) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows.len());
        for (assignment, value) in rows {
            if value < BigRational::zero() {
                return Err(Error::InvalidNfg(format!("negative table value {value}")));
            }
            let index = encode_checked(&radices, &assignment)?;
            entries.push((index, value));
        }
        entries.sort_by_key(|(i, _)| *i);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidNfg(format!(
                    "duplicate row {:?}",
                    decode(&radices, w[0].0)
                )));
            }
        }
        entries.retain(|(_, v)| !v.is_zero());
        Ok(Self::assemble(radices, entries))
    }

    /// Table given by a function of the local assignment, evaluated on the whole product space.
    pub fn from_fn(radices: Vec<u32>, f: impl Fn(&[u32]) -> BigRational) -> Result<Self> {
        let size = product(&radices).filter(|&s| s <= 1 << 26).ok_or_else(|| {
            Error::InvalidNfg("local assignment space too large for a functional table".into())
        })?;
        let mut entries = Vec::new();
        for index in 0..size {
            let value = f(&decode(&radices, index));
            if value < BigRational::zero() {
                return Err(Error::InvalidNfg(format!("negative table value {value}")));
            }
            if !value.is_zero() {
                entries.push((index, value));
            }
        }
        Ok(Self::assemble(radices, entries))
    }

    /// Indicator of even Hamming weight over binary edges.
    pub fn parity(degree: usize) -> Self {
        let radices = vec![2; degree];
        let entries = (0..1u64 << degree)
            .filter(|i| i.count_ones() % 2 == 0)
            .map(|i| (i, BigRational::one()))
            .collect();
        Self::assemble(radices, entries)
    }

    /// Indicator of all incident symbols being equal.
    pub fn repetition(radices: Vec<u32>) -> Result<Self> {
        let q = *radices.first().ok_or_else(|| Error::InvalidNfg("empty repetition factor".into()))?;
        if radices.iter().any(|&r| r != q) {
            return Err(Error::InvalidNfg("repetition factor needs equal alphabets".into()));
        }
        let entries = (0..q)
            .map(|a| {
                let assignment = vec![a; radices.len()];
                (encode(&radices, &assignment), BigRational::one())
            })
            .collect();
        Ok(Self::assemble(radices, entries))
    }

    fn assemble(radices: Vec<u32>, entries: Vec<(LocalIndex, BigRational)>) -> Self {
        let support: Vec<LocalIndex> = entries.iter().map(|(i, _)| *i).collect();
        let values = entries.iter().map(|(_, v)| to_f64(v)).collect();
        let exact = entries.into_iter().map(|(_, v)| v).collect();
        let dense = product(&radices).filter(|&s| s <= DENSE_LIMIT).map(|size| {
            let mut lookup = vec![0u32; size as usize];
            for (pos, &i) in support.iter().enumerate() {
                lookup[i as usize] = pos as u32 + 1;
            }
            lookup
        });
        LocalTable { radices, support, exact, values, dense }
    }

    pub fn radices(&self) -> &[u32] {
        &self.radices
    }

    pub fn degree(&self) -> usize {
        self.radices.len()
    }

    /// Size of the full local assignment space, if it fits in a u128.
    pub fn space_size(&self) -> Option<u128> {
        self.radices.iter().try_fold(1u128, |acc, &r| acc.checked_mul(r as u128))
    }

    /// Local code A_f in increasing index order.
    pub fn support(&self) -> &[LocalIndex] {
        &self.support
    }

    pub fn support_len(&self) -> usize {
        self.support.len()
    }

    pub fn exact_values(&self) -> &[BigRational] {
        &self.exact
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Position of a local assignment inside the support, `None` when the value is zero.
    pub fn position(&self, index: LocalIndex) -> Option<usize> {
        match &self.dense {
            Some(lookup) => match lookup.get(index as usize) {
                Some(&p) if p > 0 => Some(p as usize - 1),
                _ => None,
            },
            None => self.support.binary_search(&index).ok(),
        }
    }

    pub fn value(&self, index: LocalIndex) -> f64 {
        self.position(index).map_or(0.0, |p| self.values[p])
    }

    pub fn exact_value(&self, index: LocalIndex) -> BigRational {
        self.position(index).map_or_else(BigRational::zero, |p| self.exact[p].clone())
    }

    pub fn encode(&self, assignment: &[u32]) -> LocalIndex {
        encode(&self.radices, assignment)
    }

    pub fn decode(&self, index: LocalIndex) -> Vec<u32> {
        decode(&self.radices, index)
    }

    /// Symbol of the `slot`-th incident edge inside a local assignment.
    pub fn symbol_at(&self, index: LocalIndex, slot: usize) -> u32 {
        let stride: u64 = self.radices[slot + 1..].iter().map(|&r| r as u64).product();
        ((index / stride) % self.radices[slot] as u64) as u32
    }

    /// True when every nonzero value equals one.
    pub fn is_indicator(&self) -> bool {
        self.exact.iter().all(|v| v.is_one())
    }

    pub fn is_parity(&self) -> bool {
        self.radices.iter().all(|&r| r == 2)
            && self.is_indicator()
            && self.support.len() as u128 * 2 == self.space_size().unwrap_or(0)
            && self.support.iter().all(|i| i.count_ones() % 2 == 0)
    }

    pub fn is_repetition(&self) -> bool {
        let Some(&q) = self.radices.first() else { return false };
        self.radices.iter().all(|&r| r == q)
            && self.is_indicator()
            && self.support.len() == q as usize
            && self.support.iter().all(|&i| {
                let a = self.decode(i);
                a.iter().all(|&s| s == a[0])
            })
    }
}

pub(crate) fn product(radices: &[u32]) -> Option<u64> {
    radices.iter().try_fold(1u64, |acc, &r| acc.checked_mul(r as u64))
}

pub(crate) fn encode(radices: &[u32], assignment: &[u32]) -> LocalIndex {
    assignment
        .iter()
        .zip(radices)
        .fold(0u64, |acc, (&a, &r)| acc * r as u64 + a as u64)
}

fn encode_checked(radices: &[u32], assignment: &[u32]) -> Result<LocalIndex> {
    if assignment.len() != radices.len() {
        return Err(Error::InvalidNfg(format!(
            "row has {} symbols, factor has {} edges",
            assignment.len(),
            radices.len()
        )));
    }
    if let Some((&a, &r)) = assignment.iter().zip(radices).find(|(&a, &r)| a >= r) {
        return Err(Error::InvalidNfg(format!("symbol {a} outside alphabet of size {r}")));
    }
    Ok(encode(radices, assignment))
}

pub(crate) fn decode(radices: &[u32], mut index: LocalIndex) -> Vec<u32> {
    let mut out = vec![0; radices.len()];
    for (slot, &r) in radices.iter().enumerate().rev() {
        out[slot] = (index % r as u64) as u32;
        index /= r as u64;
    }
    out
}
