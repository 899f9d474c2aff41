//! MSB-first bit packing for frame payloads.

use crate::error::{Error, Result};

#[derive(Debug, Default, Clone)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bit_len: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append the low `width` bits of `value`, most significant first.
    pub fn write(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 64);
        for i in (0..width).rev() {
            let bit = (value >> i) & 1;
            let offset = (self.bit_len % 8) as u32;
            if offset == 0 {
                self.bytes.push(0);
            }
            if bit == 1 {
                *self.bytes.last_mut().unwrap() |= 0x80 >> offset;
            }
            self.bit_len += 1;
        }
    }

    pub fn write_f64(&mut self, v: f64) {
        self.write(v.to_bits(), 64);
    }

    pub fn bit_len(&self) -> u64 {
        self.bit_len
    }

    /// Bytes, zero-padded to a byte boundary.
    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }
}

#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub fn read(&mut self, width: u32) -> Result<u64> {
        if self.pos + width as u64 > self.bytes.len() as u64 * 8 {
            return Err(Error::Truncated);
        }
        let mut v = 0u64;
        for _ in 0..width {
            let byte = self.bytes[(self.pos / 8) as usize];
            let bit = (byte >> (7 - (self.pos % 8))) & 1;
            v = (v << 1) | bit as u64;
            self.pos += 1;
        }
        Ok(v)
    }

    pub fn read_f64(&mut self) -> Result<f64> {
        self.read(64).map(f64::from_bits)
    }

    pub fn position(&self) -> u64 {
        self.pos
    }
}
