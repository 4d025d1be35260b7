// SPDX-License-Identifier: Apache-2.0

//! Byte-exact serialization helpers shared by the measurement and the
//! state digest.

use alloc::vec::Vec;

pub(crate) struct Encoder<'a> {
    out: &'a mut Vec<u8>,
    word_bytes: usize,
}

impl<'a> Encoder<'a> {
    pub(crate) fn new(out: &'a mut Vec<u8>, word_bytes: usize) -> Self {
        Encoder { out, word_bytes }
    }

    pub(crate) fn byte(&mut self, b: u8) {
        self.out.push(b);
    }

    pub(crate) fn flag(&mut self, b: bool) {
        self.out.push(b as u8);
    }

    /// Little-endian word, `word_bytes` wide.
    pub(crate) fn word(&mut self, w: u32) {
        self.out
            .extend_from_slice(&w.to_le_bytes()[..self.word_bytes]);
    }

    /// Indices and counts are always four bytes, little-endian.
    pub(crate) fn index(&mut self, i: usize) {
        self.out.extend_from_slice(&(i as u32).to_le_bytes());
    }
}
