// SPDX-License-Identifier: Apache-2.0

//! Desk-scale sizing of the abstract address, register and word sets.

use thiserror::Error;

/// A machine word. Only the low `word_bits` bits are ever set.
pub type Word = u32;

/// Largest enclave index; ids are stored in a byte.
pub const MAX_ENCLAVES: usize = 250;

/// Register fields occupy the low nibble of an operand word.
pub const REG_FIELD_BITS: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("{0} must be at least 1")]
    ZeroCount(&'static str),
    #[error("word width {0} is not one of 8, 16, 32")]
    WordBits(u32),
    #[error("n_pa ({n_pa}) must be at least n_va ({n_va})")]
    PaSmallerThanVa { n_va: usize, n_pa: usize },
    #[error("{what} = {value} exceeds the encodable limit {limit}")]
    TooLarge {
        what: &'static str,
        value: usize,
        limit: usize,
    },
}

/// Sizes of the platform's finite domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PlatformConfig {
    pub n_va: usize,
    pub n_pa: usize,
    pub n_regs: usize,
    pub word_bits: u32,
    pub max_enclaves: usize,
}

impl PlatformConfig {
    pub fn new(
        n_va: usize,
        n_pa: usize,
        n_regs: usize,
        word_bits: u32,
        max_enclaves: usize,
    ) -> Result<Self, ConfigError> {
        let cfg = PlatformConfig {
            n_va,
            n_pa,
            n_regs,
            word_bits,
            max_enclaves,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [
            ("n_va", self.n_va),
            ("n_pa", self.n_pa),
            ("n_regs", self.n_regs),
            ("max_enclaves", self.max_enclaves),
        ] {
            if v == 0 {
                return Err(ConfigError::ZeroCount(name));
            }
        }
        if !matches!(self.word_bits, 8 | 16 | 32) {
            return Err(ConfigError::WordBits(self.word_bits));
        }
        if self.n_pa < self.n_va {
            return Err(ConfigError::PaSmallerThanVa {
                n_va: self.n_va,
                n_pa: self.n_pa,
            });
        }
        let field_limit = self.operand_field_limit();
        let checks = [
            ("n_va", self.n_va, field_limit),
            ("n_regs", self.n_regs, 1 << REG_FIELD_BITS),
            ("max_enclaves", self.max_enclaves, MAX_ENCLAVES),
            ("n_pa", self.n_pa, u32::MAX as usize),
        ];
        for (what, value, limit) in checks {
            if value > limit {
                return Err(ConfigError::TooLarge { what, value, limit });
            }
        }
        Ok(())
    }

    /// Configuration used by the randomized harnesses and the oracle.
    pub fn small() -> Self {
        PlatformConfig {
            n_va: 12,
            n_pa: 40,
            n_regs: 4,
            word_bits: 8,
            max_enclaves: 3,
        }
    }

    /// Configuration used by the bounded explorer: two enclave ids and a
    /// single register.
    pub fn explorer(n_va: usize, n_pa: usize) -> Result<Self, ConfigError> {
        Self::new(n_va, n_pa, 1, 8, 2)
    }

    pub fn word_mask(&self) -> Word {
        if self.word_bits == 32 {
            Word::MAX
        } else {
            (1 << self.word_bits) - 1
        }
    }

    pub fn word_bytes(&self) -> usize {
        (self.word_bits / 8) as usize
    }

    /// Exclusive bound on the second operand field (immediates and VAs).
    pub fn operand_field_limit(&self) -> usize {
        1usize << (self.word_bits - REG_FIELD_BITS)
    }
}
