//! Prefix-free integer coding and meta-record accounting.
//!
//! The workhorse is the Elias delta code for positive integers. Writing
//! `L = floor(log2 t) + 1` for the bit length of `t`, the codeword is the
//! Elias gamma code of `L` followed by the `L - 1` low bits of `t`, giving
//! the exact length
//!
//! ```text
//! len(t) = floor(log2 t) + 2*floor(log2(1 + floor(log2 t))) + 1.
//! ```
//!
//! Zero is not in the code's domain; callers encode `max(1, t)` behind a
//! one-bit zero flag (see [`encode_nonneg`]).
//!
//! A [`MetaRecord`] is a named list of nonnegative integer fields. Records
//! are self-delimiting: the wire form is `delta(m + 1)` for the field count
//! `m`, then per field a zero flag bit and `delta(max(1, value))`. The field
//! count prefix plus the flag bits are the record's *tag*; [`meta_overhead`]
//! reports payload and tag separately so byte budgets stay auditable.
//!
//! Byte layout: codewords serialize most-significant-bit first. The first
//! byte of a serialized stream holds the count of trailing zero pad bits in
//! the final byte (0..=7); pad bits must be zero. This layout is fixed.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CodingError {
    #[error("delta code is undefined for zero")]
    ZeroValue,
    #[error("empty byte stream")]
    EmptyStream,
    #[error("truncated codeword at bit offset {offset}")]
    Truncated { offset: usize },
    #[error("pad header {pad} exceeds 7")]
    BadPadHeader { pad: u8 },
    #[error("pad header {pad} larger than payload of {bits} bits")]
    PadTooLarge { pad: u8, bits: usize },
    #[error("nonzero padding bits")]
    DirtyPadding,
    #[error("bound checks need a parameter n >= 16, got {n}")]
    SmallParameter { n: u64 },
    #[error("field {field} has value {value} above the allowed n^k = {n}^{exponent}")]
    RangeViolation {
        field: String,
        value: u64,
        n: u64,
        exponent: f64,
    },
}

/// A growable most-significant-bit-first bit string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitCode {
    bits: Vec<bool>,
}

impl BitCode {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn extend(&mut self, other: &BitCode) {
        self.bits.extend_from_slice(&other.bits);
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn is_prefix_of(&self, other: &BitCode) -> bool {
        other.bits.len() >= self.bits.len() && other.bits[..self.bits.len()] == self.bits[..]
    }

    /// Serialize with a leading pad-count byte, then the bits packed MSB
    /// first and the last byte zero-padded.
    pub fn to_bytes(&self) -> Vec<u8> {
        let pad = (8 - self.bits.len() % 8) % 8;
        let mut out = Vec::with_capacity(1 + self.bits.len().div_ceil(8));
        out.push(pad as u8);
        let mut cur = 0u8;
        for (i, &b) in self.bits.iter().enumerate() {
            cur = (cur << 1) | u8::from(b);
            if i % 8 == 7 {
                out.push(cur);
                cur = 0;
            }
        }
        if !self.bits.len().is_multiple_of(8) {
            out.push(cur << pad);
        }
        out
    }

    /// Inverse of [`BitCode::to_bytes`]. Rejects malformed pad headers and
    /// nonzero padding so the byte form is canonical.
    pub fn from_bytes(data: &[u8]) -> Result<Self, CodingError> {
        let (&pad, payload) = data.split_first().ok_or(CodingError::EmptyStream)?;
        if pad > 7 {
            return Err(CodingError::BadPadHeader { pad });
        }
        let total = payload.len() * 8;
        if usize::from(pad) > total {
            return Err(CodingError::PadTooLarge {
                pad,
                bits: total,
            });
        }
        let nbits = total - usize::from(pad);
        let mut bits = Vec::with_capacity(nbits);
        for i in 0..total {
            let bit = payload[i / 8] >> (7 - i % 8) & 1 == 1;
            if i < nbits {
                bits.push(bit);
            } else if bit {
                return Err(CodingError::DirtyPadding);
            }
        }
        Ok(Self { bits })
    }
}

impl fmt::Display for BitCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Exact Elias delta codeword length for `t >= 1`.
pub fn delta_len(t: u64) -> u64 {
    assert!(t > 0, "delta_len needs t >= 1");
    let l = t.ilog2() as u64;
    l + 2 * (1 + l).ilog2() as u64 + 1
}

/// Elias delta code of a positive integer.
pub fn elias_delta_encode(t: u64) -> Result<BitCode, CodingError> {
    if t == 0 {
        return Err(CodingError::ZeroValue);
    }
    let mut code = BitCode::new();
    let l = t.ilog2() + 1; // bit length of t
    let ll = l.ilog2() + 1; // bit length of l
    for _ in 0..ll - 1 {
        code.push(false);
    }
    for i in (0..ll).rev() {
        code.push(l >> i & 1 == 1);
    }
    for i in (0..l - 1).rev() {
        code.push(t >> i & 1 == 1);
    }
    Ok(code)
}

/// Decode one delta codeword starting at `start`; returns the value and the
/// position one past the codeword.
pub fn elias_delta_decode(bits: &[bool], start: usize) -> Result<(u64, usize), CodingError> {
    let mut pos = start;
    let mut zeros = 0usize;
    loop {
        match bits.get(pos) {
            None => return Err(CodingError::Truncated { offset: pos }),
            Some(false) => {
                zeros += 1;
                pos += 1;
                if zeros > 63 {
                    return Err(CodingError::Truncated { offset: pos });
                }
            }
            Some(true) => break,
        }
    }
    // Read l: the leading one plus `zeros` following bits.
    let mut l = 1u64;
    pos += 1;
    for _ in 0..zeros {
        let &b = bits.get(pos).ok_or(CodingError::Truncated { offset: pos })?;
        l = l << 1 | u64::from(b);
        pos += 1;
    }
    let mut t = 1u64;
    for _ in 0..l - 1 {
        let &b = bits.get(pos).ok_or(CodingError::Truncated { offset: pos })?;
        t = t << 1 | u64::from(b);
        pos += 1;
    }
    Ok((t, pos))
}

/// Encode a nonnegative integer: a zero flag bit, then `delta(max(1, v))`.
pub fn encode_nonneg(v: u64) -> BitCode {
    let mut code = BitCode::new();
    code.push(v == 0);
    code.extend(&elias_delta_encode(v.max(1)).expect("max(1, v) is positive"));
    code
}

/// Inverse of [`encode_nonneg`].
pub fn decode_nonneg(bits: &[bool], start: usize) -> Result<(u64, usize), CodingError> {
    let &flag = bits.get(start).ok_or(CodingError::Truncated { offset: start })?;
    let (t, pos) = elias_delta_decode(bits, start + 1)?;
    Ok((if flag { 0 } else { t }, pos))
}

/// One named nonnegative integer field with its declared growth exponent:
/// the field promises `value <= n^range_exponent` for the ambient parameter
/// `n` handed to [`meta_overhead`].
#[derive(Debug, Clone, PartialEq)]
pub struct MetaField {
    pub name: String,
    pub value: u64,
    pub range_exponent: f64,
}

impl MetaField {
    pub fn new(name: impl Into<String>, value: u64, range_exponent: f64) -> Self {
        Self {
            name: name.into(),
            value,
            range_exponent,
        }
    }
}

/// A named list of integer fields, the unit of side-information accounting.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetaRecord {
    pub fields: Vec<MetaField>,
}

impl MetaRecord {
    pub fn new(fields: Vec<MetaField>) -> Self {
        Self { fields }
    }

    /// Wire form: `delta(m + 1)`, then per field flag + `delta(max(1, v))`.
    pub fn encode(&self) -> BitCode {
        let mut code = elias_delta_encode(self.fields.len() as u64 + 1).expect("m + 1 >= 1");
        for f in &self.fields {
            code.extend(&encode_nonneg(f.value));
        }
        code
    }

    /// Decode the values (names are not on the wire) and return the position
    /// one past the record, so records concatenate.
    pub fn decode_values(bits: &[bool], start: usize) -> Result<(Vec<u64>, usize), CodingError> {
        let (count_plus_one, mut pos) = elias_delta_decode(bits, start)?;
        let count = count_plus_one - 1;
        let mut values = Vec::new();
        for _ in 0..count {
            let (v, next) = decode_nonneg(bits, pos)?;
            values.push(v);
            pos = next;
        }
        Ok((values, pos))
    }
}

/// Bit-accounting for a record against the two displayed bounds at ambient
/// parameter `n`: per field, tight `k*log2 n + 2*log2 log2 n + 3` and coarse
/// `(k + 1)*log2 n`. The tight flag is the primary check; the coarse bound
/// genuinely fails for small `n` (e.g. n = 16, k = 1, t = 16 gives 9 > 8), so
/// it is reported separately rather than folded in.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaOverhead {
    /// Sum of `delta_len(max(1, value))` over fields.
    pub payload_bits: u64,
    /// Field-count prefix plus one flag bit per field.
    pub tag_bits: u64,
    /// payload + tag; equals the length of [`MetaRecord::encode`].
    pub total_bits: u64,
    /// Every field meets its tight bound.
    pub bound_ok: bool,
    /// Every field meets the coarse `(k + 1)*log2 n` bound.
    pub coarse_ok: bool,
}

/// Price a record at parameter `n >= 16`, checking each field's declared
/// range `value <= n^k` and both length bounds.
pub fn meta_overhead(record: &MetaRecord, n: u64) -> Result<MetaOverhead, CodingError> {
    if n < 16 {
        return Err(CodingError::SmallParameter { n });
    }
    let log2n = (n as f64).log2();
    let mut payload = 0u64;
    let mut tight = true;
    let mut coarse = true;
    for f in &record.fields {
        if f.value > 0 && (f.value as f64).ln() > f.range_exponent * (n as f64).ln() + 1e-9 {
            return Err(CodingError::RangeViolation {
                field: f.name.clone(),
                value: f.value,
                n,
                exponent: f.range_exponent,
            });
        }
        let len = delta_len(f.value.max(1)) as f64;
        payload += len as u64;
        if len > f.range_exponent * log2n + 2.0 * log2n.log2() + 3.0 + 1e-9 {
            tight = false;
        }
        if len > (f.range_exponent + 1.0) * log2n + 1e-9 {
            coarse = false;
        }
    }
    let tag = delta_len(record.fields.len() as u64 + 1) + record.fields.len() as u64;
    Ok(MetaOverhead {
        payload_bits: payload,
        tag_bits: tag,
        total_bits: payload + tag,
        bound_ok: tight,
        coarse_ok: coarse,
    })
}
