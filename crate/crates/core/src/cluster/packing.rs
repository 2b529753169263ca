//! Byte-to-subsymbol packing.

use std::sync::Arc;

use super::ClusterError;
use crate::field::{FieldElement, PrimeField};
use crate::registry::{Named, Registry};

pub const HEADER_BYTES: usize = 10;

/// Prefix written before the file bytes: original length and packer id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IngestHeader {
    pub length: u64,
    pub packer_id: u16,
}

impl IngestHeader {
    pub fn to_bytes(self) -> [u8; HEADER_BYTES] {
        let mut out = [0u8; HEADER_BYTES];
        out[..8].copy_from_slice(&self.length.to_le_bytes());
        out[8..].copy_from_slice(&self.packer_id.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ClusterError> {
        if bytes.len() < HEADER_BYTES {
            return Err(ClusterError::Corrupt(format!(
                "header needs {HEADER_BYTES} bytes, got {}",
                bytes.len()
            )));
        }
        Ok(Self {
            length: u64::from_le_bytes(bytes[..8].try_into().expect("8 bytes")),
            packer_id: u16::from_le_bytes(bytes[8..HEADER_BYTES].try_into().expect("2 bytes")),
        })
    }
}

pub trait Packer: Named + Send + Sync {
    /// Identifier stored in the ingest header.
    fn id(&self) -> u16;

    fn check_field(&self, field: PrimeField) -> Result<(), ClusterError>;

    fn pack(&self, field: PrimeField, bytes: &[u8]) -> Vec<FieldElement>;

    /// Inverse of `pack`; may return trailing padding bytes.
    fn unpack(&self, field: PrimeField, subsymbols: &[FieldElement]) -> Result<Vec<u8>, ClusterError>;
}

/// Two bytes per subsymbol, little-endian. Needs `q > 2^16`.
#[derive(Debug, Default, Clone, Copy)]
pub struct U16Le;

impl Named for U16Le {
    fn name(&self) -> &'static str {
        "u16le"
    }
}

impl Packer for U16Le {
    fn id(&self) -> u16 {
        1
    }

    fn check_field(&self, field: PrimeField) -> Result<(), ClusterError> {
        if field.modulus() <= 1 << 16 {
            return Err(ClusterError::FieldTooSmall {
                q: field.modulus(),
                packer: self.name(),
            });
        }
        Ok(())
    }

    fn pack(&self, _field: PrimeField, bytes: &[u8]) -> Vec<FieldElement> {
        bytes
            .chunks(2)
            .map(|c| u16::from_le_bytes([c[0], c.get(1).copied().unwrap_or(0)]) as u64)
            .collect()
    }

    fn unpack(&self, _field: PrimeField, subsymbols: &[FieldElement]) -> Result<Vec<u8>, ClusterError> {
        let mut out = Vec::with_capacity(subsymbols.len() * 2);
        for &s in subsymbols {
            let v = u16::try_from(s).map_err(|_| ClusterError::Corrupt(format!("subsymbol {s} exceeds 16 bits")))?;
            out.extend_from_slice(&v.to_le_bytes());
        }
        Ok(out)
    }
}

/// Each byte as the fewest base-`q` digits that cover 0..=255, least
/// significant first. Works in any field.
#[derive(Debug, Default, Clone, Copy)]
pub struct Radix;

impl Radix {
    pub fn digits_per_byte(q: u64) -> usize {
        let mut t = 1;
        let mut cap = q;
        while cap < 256 {
            cap *= q;
            t += 1;
        }
        t
    }
}

impl Named for Radix {
    fn name(&self) -> &'static str {
        "radix"
    }
}

impl Packer for Radix {
    fn id(&self) -> u16 {
        2
    }

    fn check_field(&self, _field: PrimeField) -> Result<(), ClusterError> {
        Ok(())
    }

    fn pack(&self, field: PrimeField, bytes: &[u8]) -> Vec<FieldElement> {
        let q = field.modulus();
        let t = Self::digits_per_byte(q);
        let mut out = Vec::with_capacity(bytes.len() * t);
        for &b in bytes {
            let mut x = b as u64;
            for _ in 0..t {
                out.push(x % q);
                x /= q;
            }
        }
        out
    }

    fn unpack(&self, field: PrimeField, subsymbols: &[FieldElement]) -> Result<Vec<u8>, ClusterError> {
        let q = field.modulus();
        let t = Self::digits_per_byte(q);
        subsymbols
            .chunks(t)
            .map(|digits| {
                let v = digits.iter().rev().fold(0u64, |acc, &d| acc * q + d);
                u8::try_from(v).map_err(|_| ClusterError::Corrupt(format!("digit group {digits:?} exceeds a byte")))
            })
            .collect()
    }
}

pub fn default_registry() -> Registry<dyn Packer> {
    let mut reg: Registry<dyn Packer> = Registry::new("packer");
    reg.register(Arc::new(U16Le));
    reg.register(Arc::new(Radix));
    reg
}

pub fn packer_by_id(id: u16) -> Option<Arc<dyn Packer>> {
    default_registry().iter().find(|p| p.id() == id).cloned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(q: u64) -> PrimeField {
        PrimeField::new(q).unwrap()
    }

    #[test]
    fn header_round_trip() {
        let h = IngestHeader {
            length: 0x0102_0304_0506,
            packer_id: 2,
        };
        assert_eq!(IngestHeader::from_bytes(&h.to_bytes()).unwrap(), h);
        assert!(matches!(
            IngestHeader::from_bytes(&[0; 9]),
            Err(ClusterError::Corrupt(_))
        ));
    }

    #[test]
    fn u16le_needs_a_big_field() {
        assert!(U16Le.check_field(f(65537)).is_ok());
        assert_eq!(
            U16Le.check_field(f(5)),
            Err(ClusterError::FieldTooSmall { q: 5, packer: "u16le" })
        );
        assert_eq!(U16Le.pack(f(65537), &[1, 2, 3]), vec![0x0201, 3]);
        assert!(U16Le.unpack(f(65537), &[65536]).is_err());
    }

    #[test]
    fn radix_digits() {
        assert_eq!(Radix::digits_per_byte(5), 4);
        assert_eq!(Radix::digits_per_byte(2), 8);
        assert_eq!(Radix::digits_per_byte(257), 1);
        assert_eq!(Radix.pack(f(5), &[255]), vec![0, 1, 0, 2]);
        assert!(Radix.unpack(f(5), &[4, 4, 4, 4]).is_err());
    }

    #[test]
    fn lookup_by_id() {
        assert_eq!(packer_by_id(1).unwrap().name(), "u16le");
        assert_eq!(packer_by_id(2).unwrap().name(), "radix");
        assert!(packer_by_id(9).is_none());
    }

    proptest! {
        #[test]
        fn round_trips(bytes in proptest::collection::vec(any::<u8>(), 0..200), qi in 0usize..4) {
            let q = [2, 5, 251, 65537][qi];
            let r = Radix.unpack(f(q), &Radix.pack(f(q), &bytes)).unwrap();
            prop_assert_eq!(&r, &bytes);
            let u = U16Le.unpack(f(65537), &U16Le.pack(f(65537), &bytes)).unwrap();
            prop_assert_eq!(&u[..bytes.len()], &bytes[..]);
        }
    }
}
