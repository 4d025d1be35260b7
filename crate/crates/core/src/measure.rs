// SPDX-License-Identifier: Apache-2.0

//! Enclave measurement.
//!
//! The measurement is the exact canonical serialization of an initial
//! enclave view, so two measurements are equal exactly when the views are.
//! The 64-bit FNV-1a digest is for display only.

use alloc::vec::Vec;
use core::fmt;

use crate::canonical::Encoder;
use crate::config::PlatformConfig;
use crate::state::{EnclaveStateView, StateError};

pub const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
pub const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Measurement {
    pub canonical: Vec<u8>,
    pub digest64: u64,
}

impl fmt::Debug for Measurement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Measurement({:016x})", self.digest64)
    }
}

/// Measures an initial enclave view.
///
/// Layout: `ep` (u32 LE), then for each virtual address in ascending
/// order: private flag, permission bits, mapped flag, backing PA (u32 LE,
/// zero when unmapped) and the content word (zero unless private and
/// mapped). Words are little-endian, `word_bits / 8` bytes wide.
pub fn measure(cfg: &PlatformConfig, init: &EnclaveStateView) -> Result<Measurement, StateError> {
    if !init.is_initial() {
        return Err(StateError::NotInitialState);
    }
    let mut canonical = Vec::with_capacity(4 + init.private.len() * (7 + cfg.word_bytes()));
    let mut enc = Encoder::new(&mut canonical, cfg.word_bytes());
    enc.index(init.ep);
    for va in 0..init.private.len() {
        let pte = init.page_table.get(va);
        enc.flag(init.private[va]);
        enc.byte(pte.map_or(0, |p| p.perm.bits()));
        enc.flag(pte.is_some());
        enc.index(pte.map_or(0, |p| p.pa));
        let content = match (init.private[va], pte) {
            (true, Some(_)) => init.vmem[va].unwrap_or(0),
            _ => 0,
        };
        enc.word(content);
    }
    let digest64 = fnv1a64(&canonical);
    Ok(Measurement {
        canonical,
        digest64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{PageTable, Perm, Pte};
    use alloc::vec;

    fn cfg() -> PlatformConfig {
        PlatformConfig::new(3, 8, 2, 16, 2).unwrap()
    }

    fn view() -> EnclaveStateView {
        let mut pt = PageTable::empty(3);
        pt.set(
            0,
            Some(Pte {
                pa: 2,
                perm: Perm::RX,
            }),
        );
        pt.set(
            1,
            Some(Pte {
                pa: 3,
                perm: Perm::RW,
            }),
        );
        pt.set(
            2,
            Some(Pte {
                pa: 6,
                perm: Perm::R,
            }),
        );
        EnclaveStateView {
            ep: 0,
            page_table: pt,
            private: vec![true, true, false],
            pc: 0,
            regs: vec![0, 0],
            vmem: vec![Some(0x0101), Some(7), None],
        }
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a64(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a64(b"a"), 0xaf63_dc4c_8601_ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x8594_4171_f739_67e8);
    }

    #[test]
    fn exact_layout() {
        let m = measure(&cfg(), &view()).unwrap();
        let expected: Vec<u8> = vec![
            0, 0, 0, 0, // ep
            1, 5, 1, 2, 0, 0, 0, 0x01, 0x01, // va 0
            1, 3, 1, 3, 0, 0, 0, 7, 0, // va 1
            0, 1, 1, 6, 0, 0, 0, 0, 0, // va 2 (public: content omitted)
        ];
        assert_eq!(m.canonical, expected);
        assert_eq!(m.digest64, fnv1a64(&expected));
    }

    #[test]
    fn equal_views_equal_measurements() {
        let a = measure(&cfg(), &view()).unwrap();
        let b = measure(&cfg(), &view()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn private_word_changes_measurement() {
        let mut v = view();
        v.vmem[1] = Some(8);
        assert_ne!(
            measure(&cfg(), &v).unwrap(),
            measure(&cfg(), &view()).unwrap()
        );
    }

    #[test]
    fn public_content_is_not_measured() {
        // A public address has no content in the view at all, so two
        // enclaves that differ only in public memory measure the same.
        let v = view();
        assert_eq!(v.vmem[2], None);
        assert_eq!(
            measure(&cfg(), &v).unwrap().canonical,
            measure(&cfg(), &view()).unwrap().canonical
        );
    }

    #[test]
    fn rejects_non_initial() {
        let mut v = view();
        v.pc = 1;
        assert_eq!(measure(&cfg(), &v), Err(StateError::NotInitialState));
        let mut v = view();
        v.regs[1] = 3;
        assert_eq!(measure(&cfg(), &v), Err(StateError::NotInitialState));
    }
}
