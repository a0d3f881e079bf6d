//! Per-branch Gray coding.
//!
//! Each branch of the modem carries a word of "zig-zag" bits `z` whose
//! bipolar images `d_j = 2 z_j - 1` weight the sub-channel gains. The data
//! bits `g` are the Gray image of `z`: the receiver's Gray encoder is the
//! XOR chain `g_K = z_K`, `g_j = z_j XOR z_{j+1}`, and the transmitter runs
//! the unique inverse `z_K = g_K`, `z_j = g_j XOR z_{j+1}`.
//!
//! Bit index 1 is the weakest sub-channel (gain `A_1`/`B_1`) and index `K`
//! the strongest; packed words store bit `j` at position `j - 1`.

/// Maximum supported word size, matching the constellation bit cap.
pub const MAX_WORD_BITS: usize = 24;

/// Gray-encode a packed zig-zag word of `len` bits.
///
/// Equivalent to the XOR chain above; for packed words this is `z ^ (z >> 1)`.
#[inline]
pub fn encode_word(z: u32, len: usize) -> u32 {
    debug_assert!((1..=MAX_WORD_BITS).contains(&len));
    debug_assert!(z < (1u32 << len));
    z ^ (z >> 1)
}

/// Invert [`encode_word`]: recover the zig-zag word from a Gray word.
///
/// Bit `j` of the result is the XOR of all Gray bits at positions `>= j`
/// (the descending recursion `z_j = g_j XOR z_{j+1}` unrolled).
#[inline]
pub fn decode_word(g: u32, len: usize) -> u32 {
    debug_assert!((1..=MAX_WORD_BITS).contains(&len));
    debug_assert!(g < (1u32 << len));
    let mut z = g;
    z ^= z >> 1;
    z ^= z >> 2;
    z ^= z >> 4;
    z ^= z >> 8;
    z ^= z >> 16;
    z
}

/// A fixed-length word of bits, index 1 (weakest) through K (strongest).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitVector {
    word: u32,
    len: u8,
}

impl BitVector {
    /// Build from individual bits, `bits[0]` being bit 1 (the weakest).
    ///
    /// # Panics
    ///
    /// Panics if the slice is empty, longer than [`MAX_WORD_BITS`], or
    /// contains values other than 0 and 1.
    pub fn from_bits(bits: &[u8]) -> Self {
        assert!(
            !bits.is_empty() && bits.len() <= MAX_WORD_BITS,
            "bit vector length must be 1..={MAX_WORD_BITS}"
        );
        let mut word = 0u32;
        for (i, &b) in bits.iter().enumerate() {
            assert!(b <= 1, "bit values must be 0 or 1");
            word |= u32::from(b) << i;
        }
        Self {
            word,
            len: bits.len() as u8,
        }
    }

    /// Build from a packed word (bit `j` at position `j - 1`).
    pub fn from_word(word: u32, len: usize) -> Self {
        assert!((1..=MAX_WORD_BITS).contains(&len));
        assert!(word < (1u32 << len), "word has bits beyond the stated length");
        Self {
            word,
            len: len as u8,
        }
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        false // length is always >= 1
    }

    pub fn word(&self) -> u32 {
        self.word
    }

    /// Bit `j`, 1-based from the weakest sub-channel.
    pub fn bit(&self, j: usize) -> u8 {
        assert!(j >= 1 && j <= self.len());
        ((self.word >> (j - 1)) & 1) as u8
    }

    /// The bits as a vector, index order 1..=K.
    pub fn bits(&self) -> Vec<u8> {
        (1..=self.len()).map(|j| self.bit(j)).collect()
    }
}

/// Receiver-side Gray encoder: zig-zag bits to data bits.
pub fn gray_encode(z: &BitVector) -> BitVector {
    BitVector {
        word: encode_word(z.word, z.len()),
        len: z.len,
    }
}

/// Transmitter-side inverse: data bits to zig-zag bits.
pub fn gray_decode(g: &BitVector) -> BitVector {
    BitVector {
        word: decode_word(g.word, g.len()),
        len: g.len,
    }
}
