//! Stable seed derivation. Sub-seeds for folds, instances, and model
//! initialization are derived from the run seed with fixed integer mixing so
//! reruns reproduce the exact same randomness regardless of platform.

/// FNV-1a over arbitrary bytes; used to fold string ids into seeds.
pub fn fnv1a_64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a sub-seed from a base seed and a salt.
pub fn mix(seed: u64, salt: u64) -> u64 {
    splitmix64(seed ^ splitmix64(salt))
}

/// Derive a sub-seed keyed by a string (e.g. an instance id).
pub fn mix_str(seed: u64, salt: &str) -> u64 {
    mix(seed, fnv1a_64(salt.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixing_is_stable() {
        // Frozen reference values; changing the mixing constants would
        // silently re-randomize every seeded run.
        assert_eq!(fnv1a_64(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a_64(b"a"), 0xaf63_dc4c_8601_ec8c);
        assert_ne!(mix(7, 0), mix(7, 1));
        assert_ne!(mix(7, 0), mix(8, 0));
        assert_ne!(mix_str(7, "a"), mix_str(7, "b"));
    }
}
