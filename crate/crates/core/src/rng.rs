//! Counter-based random streams for reproducible, schedule-invariant
//! Monte Carlo acquisition.
//!
//! Every variate is a pure function of (seed, coordinates), so frames and
//! pixels can be evaluated in any order, on any number of threads, with
//! bit-identical results. The mixer is the SplitMix64 finalizer, which has
//! full avalanche; it is not cryptographic and does not need to be.

/// Golden-ratio increment used by SplitMix64.
const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
/// Second Weyl constant, decorrelates the pixel coordinate from the frame.
const WEYL2: u64 = 0xD1B5_4A32_D192_ED03;

/// SplitMix64 finalizer: bijective mixing of a 64-bit word.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent sub-seed for a tagged stream (one per image in a
/// multi-image acquisition).
#[inline]
pub fn derive_stream(seed: u64, tag: u64) -> u64 {
    mix64(mix64(seed.wrapping_add(GOLDEN)).wrapping_add(tag.wrapping_mul(WEYL2)))
}

/// 64 uniform bits for the event at (frame, pixel) under `seed`.
///
/// Each coordinate is absorbed by add-multiply followed by a full mix, so
/// neighboring seeds do not act as permutations of each other's frame sets
/// (which plain xor absorption would allow).
#[inline]
pub fn event_bits(seed: u64, frame: u64, pixel: u64) -> u64 {
    let s = mix64(seed.wrapping_add(GOLDEN));
    let z = mix64(s.wrapping_add(frame.wrapping_mul(GOLDEN)));
    mix64(z.wrapping_add(pixel.wrapping_mul(WEYL2)))
}

/// Uniform f64 in [0, 1) with 53 bits of precision.
#[inline]
pub fn event_uniform(seed: u64, frame: u64, pixel: u64) -> f64 {
    const DEN: f64 = (1u64 << 53) as f64;
    ((event_bits(seed, frame, pixel) >> 11) as f64) / DEN
}
