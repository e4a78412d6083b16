//! Seed derivation. All randomness flows from one base seed through named
//! sub-seeds so that component behavior is stable when unrelated parts of a
//! run change.

/// FNV-1a, 64 bit. Stable across platforms and releases, unlike
/// `DefaultHasher`.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Sub-seed named by component, e.g. `derive_seed(seed, "trainer")`.
pub fn derive_seed(base: u64, component: &str) -> u64 {
    splitmix64(base ^ fnv1a64(component.as_bytes()))
}

/// Sub-seed with an index, e.g. per epoch or per sentence.
pub fn derive_seed_n(base: u64, component: &str, n: u64) -> u64 {
    splitmix64(derive_seed(base, component) ^ splitmix64(n.wrapping_add(1)))
}
