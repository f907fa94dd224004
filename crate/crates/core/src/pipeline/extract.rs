//! Seeded randomness extraction over fixed-size sample blocks.
//!
//! The default extractor is a binary Toeplitz matrix (a 2-universal family):
//! the seed supplies the `input + output - 1` diagonal entries,
//! `T[i][j] = seed[i + input - 1 - j]`, and each output bit is the GF(2) dot
//! product of one matrix row with the input block. Rows are materialized
//! incrementally: row i+1 is row i shifted one column with the next seed bit
//! entering at column 0, so a block costs one masked-popcount pass per output
//! bit instead of a dense matrix product.
//!
//! Bit order is little-endian throughout: bit 0 of a sample is the least
//! significant bit of its code, samples are concatenated in stream order, and
//! packed bytes fill from bit 0 up.

use crate::error::{Error, Result};
use crate::pipeline::SampleBlock;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Growable bit sequence packed into 64-bit words, least significant bit
/// first. Bits at positions >= `len` in the backing words are always zero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self { words: Vec::with_capacity(bits.div_ceil(64)), len: 0 }
    }

    pub fn zeros(len: usize) -> Self {
        Self { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut out = Self::with_capacity(bits.len());
        for &b in bits {
            out.push(b);
        }
        out
    }

    /// Unpacks `len` bits from LSB-first packed bytes.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Self {
        assert!(len <= bytes.len() * 8, "length exceeds the packed data");
        let mut words = vec![0u64; len.div_ceil(64)];
        for (i, &byte) in bytes.iter().enumerate().take(len.div_ceil(8)) {
            words[i / 8] |= (byte as u64) << (8 * (i % 8));
        }
        let mut out = Self { words, len };
        out.mask_tail();
        out
    }

    /// Concatenates the `n_bits`-wide codes of `samples` in stream order,
    /// least significant bit of each code first.
    pub fn from_samples(samples: &[i32], n_bits: u32) -> Self {
        let mut out = Self::with_capacity(samples.len() * n_bits as usize);
        let mask = if n_bits == 32 { u32::MAX } else { (1u32 << n_bits) - 1 };
        for &s in samples {
            out.push_bits((s as u32 & mask) as u64, n_bits);
        }
        out
    }

    fn mask_tail(&mut self) {
        let tail = self.len % 64;
        if tail != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, index: usize) -> bool {
        assert!(index < self.len);
        (self.words[index / 64] >> (index % 64)) & 1 == 1
    }

    pub fn push(&mut self, bit: bool) {
        self.push_bits(bit as u64, 1);
    }

    /// Appends the `count` low bits of `value`, least significant first.
    pub fn push_bits(&mut self, value: u64, count: u32) {
        debug_assert!(count <= 64);
        if count == 0 {
            return;
        }
        let masked = if count == 64 { value } else { value & ((1u64 << count) - 1) };
        let pos = self.len % 64;
        if pos == 0 {
            self.words.push(masked);
        } else {
            *self.words.last_mut().expect("pos > 0 implies a word") |= masked << pos;
            let spill = 64 - pos;
            if count as usize > spill {
                self.words.push(masked >> spill);
            }
        }
        self.len += count as usize;
    }

    /// Packs into LSB-first bytes; a final partial byte is zero-padded.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = Vec::with_capacity(self.len.div_ceil(8));
        'outer: for word in &self.words {
            for b in word.to_le_bytes() {
                if bytes.len() == self.len.div_ceil(8) {
                    break 'outer;
                }
                bytes.push(b);
            }
        }
        bytes
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Population count over the half-open bit range `[start, start + len)`.
    pub fn count_ones_range(&self, start: usize, len: usize) -> usize {
        assert!(start + len <= self.len);
        let mut total = 0usize;
        let mut i = start;
        let end = start + len;
        while i < end {
            let word = i / 64;
            let bit = i % 64;
            let take = (64 - bit).min(end - i);
            let mask = if take == 64 { u64::MAX } else { ((1u64 << take) - 1) << bit };
            total += (self.words[word] & mask).count_ones() as usize;
            i += take;
        }
        total
    }

    /// Number of positions where both this bit and the bit `lag` places later
    /// are set: popcount(x & (x >> lag)).
    pub fn overlap_ones(&self, lag: usize) -> usize {
        if lag >= self.len {
            return 0;
        }
        let word_shift = lag / 64;
        let bit_shift = lag % 64;
        let n = self.words.len();
        let mut total = 0usize;
        for i in 0..n - word_shift {
            let mut shifted = self.words[i + word_shift] >> bit_shift;
            if bit_shift > 0 && i + word_shift + 1 < n {
                shifted |= self.words[i + word_shift + 1] << (64 - bit_shift);
            }
            total += (self.words[i] & shifted).count_ones() as usize;
        }
        total
    }

    /// Bitwise XOR of equal-length sequences.
    pub fn xor(&self, other: &Self) -> Self {
        assert_eq!(self.len, other.len, "xor requires equal lengths");
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect();
        Self { words, len: self.len }
    }

    /// Copies `bit_len` bits starting at `bit_offset` into fresh words,
    /// zero-padded above `bit_len`.
    pub fn extract_words(&self, bit_offset: usize, bit_len: usize) -> Vec<u64> {
        assert!(bit_offset + bit_len <= self.len);
        let word_count = bit_len.div_ceil(64);
        let mut out = Vec::with_capacity(word_count);
        let word_shift = bit_offset / 64;
        let bit_shift = bit_offset % 64;
        let n = self.words.len();
        for j in 0..word_count {
            let k = word_shift + j;
            let mut w = if k < n { self.words[k] >> bit_shift } else { 0 };
            if bit_shift > 0 && k + 1 < n {
                w |= self.words[k + 1] << (64 - bit_shift);
            }
            out.push(w);
        }
        let tail = bit_len % 64;
        if tail != 0 {
            if let Some(last) = out.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        out
    }
}

/// How the per-block output length is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizingMode {
    /// Leftover-hash sizing: `floor(t - 2*log2(1/epsilon))` output bits from
    /// `t` bits of block min-entropy.
    InformationTheoretic,
    /// Engineering margin without a composable security claim: half the
    /// block min-entropy, rounded down.
    KeepHalf,
}

/// Which hash family maps blocks to output bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractorKind {
    /// Seeded binary Toeplitz matrix; the sizing modes' guarantees apply.
    Toeplitz,
    /// Keyed SHA-256 slot behind the same interface. Deterministic and
    /// length-correct, but carries no information-theoretic claim; only
    /// [`SizingMode::KeepHalf`] is accepted.
    KeyedHash,
}

/// Minimum key length for the keyed-hash extractor slot.
pub const KEYED_HASH_MIN_SEED_BITS: usize = 256;

/// Block extraction parameters. Build with one of the sizing constructors,
/// then attach the seed.
#[derive(Debug, Clone)]
pub struct ExtractorConfig {
    input_block_bits: usize,
    output_bits: usize,
    epsilon: f64,
    seed: BitString,
    mode: SizingMode,
    kind: ExtractorKind,
}

fn validate_sizing(
    block_entropy_bits: f64,
    epsilon: f64,
    input_block_bits: usize,
) -> Result<()> {
    if input_block_bits == 0 {
        return Err(Error::InvalidConfig("input block must hold at least one bit".into()));
    }
    if !block_entropy_bits.is_finite() || block_entropy_bits < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "block entropy must be finite and >= 0 (got {block_entropy_bits})"
        )));
    }
    if block_entropy_bits > input_block_bits as f64 {
        return Err(Error::InvalidConfig(format!(
            "block entropy {block_entropy_bits} exceeds the block size {input_block_bits}"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidConfig(format!("epsilon must lie in (0, 1) (got {epsilon})")));
    }
    Ok(())
}

impl ExtractorConfig {
    /// Sizes the output by the leftover-hash bound.
    pub fn information_theoretic(
        block_entropy_bits: f64,
        epsilon: f64,
        input_block_bits: usize,
    ) -> Result<Self> {
        validate_sizing(block_entropy_bits, epsilon, input_block_bits)?;
        Ok(Self {
            input_block_bits,
            output_bits: super::lhl_output_length(block_entropy_bits, epsilon)?,
            epsilon,
            seed: BitString::new(),
            mode: SizingMode::InformationTheoretic,
            kind: ExtractorKind::Toeplitz,
        })
    }

    /// Sizes the output at half the block min-entropy.
    pub fn keep_half(
        block_entropy_bits: f64,
        epsilon: f64,
        input_block_bits: usize,
    ) -> Result<Self> {
        validate_sizing(block_entropy_bits, epsilon, input_block_bits)?;
        Ok(Self {
            input_block_bits,
            output_bits: (block_entropy_bits / 2.0).floor() as usize,
            epsilon,
            seed: BitString::new(),
            mode: SizingMode::KeepHalf,
            kind: ExtractorKind::Toeplitz,
        })
    }

    /// Switches the hash family. The keyed-hash slot makes no
    /// information-theoretic claim, so it refuses leftover-hash sizing.
    pub fn with_kind(mut self, kind: ExtractorKind) -> Result<Self> {
        if kind == ExtractorKind::KeyedHash && self.mode == SizingMode::InformationTheoretic {
            return Err(Error::InvalidConfig(
                "the keyed-hash extractor carries no leftover-hash guarantee; use keep-half sizing"
                    .into(),
            ));
        }
        self.kind = kind;
        Ok(self)
    }

    /// Attaches the seed, validating its length for the hash family.
    pub fn with_seed(mut self, seed: BitString) -> Result<Self> {
        let expected = self.required_seed_bits();
        match self.kind {
            ExtractorKind::Toeplitz => {
                if seed.len() != expected {
                    return Err(Error::SeedLength { expected, got: seed.len() });
                }
            }
            ExtractorKind::KeyedHash => {
                if seed.len() < expected {
                    return Err(Error::SeedLength { expected, got: seed.len() });
                }
            }
        }
        self.seed = seed;
        Ok(self)
    }

    /// Seed bits the hash family needs: exactly `input + output - 1` for
    /// Toeplitz, at least [`KEYED_HASH_MIN_SEED_BITS`] for the keyed hash.
    pub fn required_seed_bits(&self) -> usize {
        match self.kind {
            ExtractorKind::Toeplitz => self.input_block_bits + self.output_bits.max(1) - 1,
            ExtractorKind::KeyedHash => KEYED_HASH_MIN_SEED_BITS,
        }
    }

    pub fn input_block_bits(&self) -> usize {
        self.input_block_bits
    }

    pub fn output_bits(&self) -> usize {
        self.output_bits
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn mode(&self) -> SizingMode {
        self.mode
    }

    pub fn kind(&self) -> ExtractorKind {
        self.kind
    }

    pub fn seed(&self) -> &BitString {
        &self.seed
    }
}

/// Result of extracting a sample block.
#[derive(Debug, Clone)]
pub struct ExtractionOutput {
    pub bits: BitString,
    pub blocks: usize,
    pub input_bits_consumed: usize,
    /// Tail bits that did not fill a whole block and were discarded.
    pub input_bits_dropped: usize,
}

fn toeplitz_first_row(seed: &BitString, input_block_bits: usize) -> Vec<u64> {
    let word_count = input_block_bits.div_ceil(64);
    let mut row = vec![0u64; word_count];
    for j in 0..input_block_bits {
        if seed.get(input_block_bits - 1 - j) {
            row[j / 64] |= 1u64 << (j % 64);
        }
    }
    row
}

fn shift_row_left(row: &mut [u64], incoming: bool) {
    let mut carry = incoming as u64;
    for word in row.iter_mut() {
        let next_carry = *word >> 63;
        *word = (*word << 1) | carry;
        carry = next_carry;
    }
}

fn toeplitz_block(
    seed: &BitString,
    first_row: &[u64],
    input: &[u64],
    input_block_bits: usize,
    output_bits: usize,
    out: &mut BitString,
) {
    let mut row = first_row.to_vec();
    for i in 0..output_bits {
        let mut acc = 0u64;
        for (r, x) in row.iter().zip(input) {
            acc ^= r & x;
        }
        out.push(acc.count_ones() & 1 == 1);
        if i + 1 < output_bits {
            shift_row_left(&mut row, seed.get(input_block_bits + i));
        }
    }
}

fn keyed_hash_block(
    key: &[u8],
    block_index: u64,
    input: &[u64],
    output_bits: usize,
    out: &mut BitString,
) {
    let input_bytes: Vec<u8> = input.iter().flat_map(|w| w.to_le_bytes()).collect();
    let mut produced = 0usize;
    let mut counter = 0u32;
    while produced < output_bits {
        let mut hasher = Sha256::new();
        hasher.update(key);
        hasher.update(block_index.to_le_bytes());
        hasher.update(counter.to_le_bytes());
        hasher.update(&input_bytes);
        let digest = hasher.finalize();
        for byte in digest {
            let take = (output_bits - produced).min(8);
            if take == 0 {
                break;
            }
            out.push_bits(byte as u64, take as u32);
            produced += take;
        }
        counter += 1;
    }
}

/// Runs the configured extractor over every whole input block in the sample
/// stream; a trailing partial block is dropped and reported.
pub fn extract(block: &SampleBlock, cfg: &ExtractorConfig) -> Result<ExtractionOutput> {
    if cfg.output_bits > cfg.input_block_bits {
        return Err(Error::InvalidConfig(format!(
            "output of {} bits exceeds the {}-bit input block",
            cfg.output_bits, cfg.input_block_bits
        )));
    }
    match cfg.kind {
        ExtractorKind::Toeplitz => {
            let expected = cfg.required_seed_bits();
            if cfg.seed.len() != expected {
                return Err(Error::SeedLength { expected, got: cfg.seed.len() });
            }
        }
        ExtractorKind::KeyedHash => {
            if cfg.seed.len() < KEYED_HASH_MIN_SEED_BITS {
                return Err(Error::SeedLength {
                    expected: KEYED_HASH_MIN_SEED_BITS,
                    got: cfg.seed.len(),
                });
            }
        }
    }
    let stream = BitString::from_samples(&block.samples, block.adc.n_bits());
    let blocks = stream.len() / cfg.input_block_bits;
    let mut bits = BitString::with_capacity(blocks * cfg.output_bits);
    match cfg.kind {
        ExtractorKind::Toeplitz => {
            let first_row = toeplitz_first_row(&cfg.seed, cfg.input_block_bits);
            for b in 0..blocks {
                let input = stream.extract_words(b * cfg.input_block_bits, cfg.input_block_bits);
                toeplitz_block(
                    &cfg.seed,
                    &first_row,
                    &input,
                    cfg.input_block_bits,
                    cfg.output_bits,
                    &mut bits,
                );
            }
        }
        ExtractorKind::KeyedHash => {
            let key = cfg.seed.to_bytes();
            for b in 0..blocks {
                let input = stream.extract_words(b * cfg.input_block_bits, cfg.input_block_bits);
                keyed_hash_block(&key, b as u64, &input, cfg.output_bits, &mut bits);
            }
        }
    }
    Ok(ExtractionOutput {
        bits,
        blocks,
        input_bits_consumed: blocks * cfg.input_block_bits,
        input_bits_dropped: stream.len() - blocks * cfg.input_block_bits,
    })
}
