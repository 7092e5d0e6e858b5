//! Deterministic seed derivation. Every stochastic routine takes one user
//! seed; per-chain/per-purpose seeds are derived with splitmix64 so that runs
//! are byte-reproducible and chains are decorrelated.

pub fn splitmix64(state: &mut u64) {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `index`-th consumer derived from the master seed: jump the
/// splitmix64 stream directly to position `index` (O(1) in the index, which
/// may be any u64), then advance and mix.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut s = master.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    splitmix64(&mut s);
    mix(s)
}
