use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ProtocolError, Result};
use crate::quantum::Basis;

/// Classical bit string, serialized as text such as `"0110"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BitString(Vec<u8>);

impl BitString {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(ProtocolError::InvalidParams(format!("bit value {b}")));
        }
        Ok(BitString(bits))
    }

    pub fn zeros(n: usize) -> Self {
        BitString(vec![0; n])
    }

    pub fn ones(n: usize) -> Self {
        BitString(vec![1; n])
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        BitString((0..n).map(|_| rng.random_range(0..2u8)).collect())
    }

    /// Uniformly random string of length `n` with exactly `weight` ones.
    pub fn random_with_weight<R: Rng + ?Sized>(n: usize, weight: usize, rng: &mut R) -> Result<Self> {
        if weight > n {
            return Err(ProtocolError::InvalidParams(format!("weight {weight} exceeds length {n}")));
        }
        let mut bits = vec![0u8; n];
        let positions = rand::seq::index::sample(rng, n, weight);
        for i in positions.iter() {
            bits[i] = 1;
        }
        Ok(BitString(bits))
    }

    /// Bit `i` of the string is bit `i` of `mask`.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        BitString((0..n).map(|i| ((mask >> i) & 1) as u8).collect())
    }

    pub fn to_mask(&self) -> u64 {
        self.0.iter().enumerate().fold(0, |m, (i, &b)| m | ((b as u64) << i))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, bit: u8) {
        self.0[i] = bit & 1;
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    pub fn exclude(&self, x: usize) -> Result<BitString> {
        exclude(&self.0, x).map(BitString)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|b| write!(f, "{b}"))
    }
}

impl FromStr for BitString {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(ProtocolError::InvalidParams(format!("bad bit character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(BitString)
    }
}

impl TryFrom<String> for BitString {
    type Error = ProtocolError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<BitString> for String {
    fn from(b: BitString) -> String {
        b.to_string()
    }
}

/// String of basis labels, serialized as text such as `"+x+x"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BasisString(Vec<Basis>);

impl BasisString {
    pub fn new(bases: Vec<Basis>) -> Self {
        BasisString(bases)
    }

    pub fn uniform(n: usize, basis: Basis) -> Self {
        BasisString(vec![basis; n])
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        BasisString((0..n).map(|_| Basis::from_bit(rng.random_range(0..2u8))).collect())
    }

    /// Position `i` is diagonal iff bit `i` of `mask` is set.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        BasisString((0..n).map(|i| Basis::from_bit(((mask >> i) & 1) as u8)).collect())
    }

    pub fn to_mask(&self) -> u64 {
        self.0.iter().enumerate().fold(0, |m, (i, b)| m | ((b.as_bit() as u64) << i))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bases(&self) -> &[Basis] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Basis {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, basis: Basis) {
        self.0[i] = basis;
    }

    pub fn exclude(&self, x: usize) -> Result<BasisString> {
        exclude(&self.0, x).map(BasisString)
    }
}

impl fmt::Display for BasisString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|b| write!(f, "{b}"))
    }
}

impl FromStr for BasisString {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| {
                Basis::from_symbol(c)
                    .ok_or_else(|| ProtocolError::InvalidParams(format!("bad basis character {c:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(BasisString)
    }
}

impl TryFrom<String> for BasisString {
    type Error = ProtocolError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<BasisString> for String {
    fn from(b: BasisString) -> String {
        b.to_string()
    }
}

/// Scalar product modulo 2: `⊕_i r(i)·s(i)`.
pub fn parity(r: &BitString, s: &BitString) -> Result<u8> {
    if r.len() != s.len() {
        return Err(ProtocolError::LengthMismatch { left: r.len(), right: s.len() });
    }
    Ok(r.0.iter().zip(&s.0).fold(0, |acc, (a, b)| acc ^ (a & b)))
}

/// `s` with position `x` removed, order preserved.
pub fn exclude<T: Clone>(s: &[T], x: usize) -> Result<Vec<T>> {
    if x >= s.len() {
        return Err(ProtocolError::IndexOutOfRange { index: x, len: s.len() });
    }
    let mut out = Vec::with_capacity(s.len() - 1);
    out.extend_from_slice(&s[..x]);
    out.extend_from_slice(&s[x + 1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn parity_examples() {
        assert_eq!(parity(&bs("1010"), &bs("1110")).unwrap(), 0);
        assert_eq!(parity(&bs("0000"), &bs("1011")).unwrap(), 0);
        assert_eq!(parity(&bs("1111"), &bs("1111")).unwrap(), 0);
        assert_eq!(parity(&bs("1111"), &bs("1110")).unwrap(), 1);
        assert!(matches!(parity(&bs("11"), &bs("1")), Err(ProtocolError::LengthMismatch { .. })));
    }

    #[test]
    fn exclude_examples() {
        assert_eq!(bs("0110").exclude(2).unwrap(), bs("010"));
        assert_eq!(bs("01").exclude(0).unwrap(), bs("1"));
        assert!(matches!(bs("01").exclude(2), Err(ProtocolError::IndexOutOfRange { .. })));
        let bases: BasisString = "+x+".parse().unwrap();
        assert_eq!(bases.exclude(1).unwrap().to_string(), "++");
    }

    #[test]
    fn zero_removal_keeps_parity() {
        for n in 1..=6usize {
            for r in 0..1u64 << n {
                for s in 0..1u64 << n {
                    let (r, s) = (BitString::from_mask(r, n), BitString::from_mask(s, n));
                    let p = parity(&r, &s).unwrap();
                    for x in (0..n).filter(|&x| s.get(x) == 0) {
                        assert_eq!(parity(&r.exclude(x).unwrap(), &s.exclude(x).unwrap()).unwrap(), p);
                    }
                }
            }
        }
    }

    #[test]
    fn masks_and_text() {
        let b = BitString::from_mask(0b0110, 4);
        assert_eq!(b.to_string(), "0110");
        assert_eq!(b.to_mask(), 0b0110);
        assert_eq!(serde_json::to_string(&b).unwrap(), "\"0110\"");
        let back: BasisString = serde_json::from_str("\"+x\"").unwrap();
        assert_eq!(back.to_mask(), 0b10);
        assert!("01a".parse::<BitString>().is_err());
        assert!(BitString::new(vec![2]).is_err());
    }

    #[test]
    fn weighted_random_has_weight() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(11);
        for w in 0..=6 {
            assert_eq!(BitString::random_with_weight(6, w, &mut rng).unwrap().weight(), w);
        }
        assert!(BitString::random_with_weight(3, 4, &mut rng).is_err());
    }
}
