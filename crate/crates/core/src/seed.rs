//! Deterministic seed derivation.

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a list of integers into one well-distributed seed. Order matters.
pub fn derive(parts: &[u64]) -> u64 {
    parts.iter().fold(0x6A09_E667_F3BC_C908, |acc, &p| {
        splitmix64(acc ^ splitmix64(p))
    })
}

/// Shuffle seed for one client in one round.
pub fn client_round_seed(master: u64, round: u64, client_id: u64) -> u64 {
    derive(&[master, round, client_id])
}

/// Seed for client sampling in one round. Uses a distinct tag so it never
/// collides with a client shuffle seed.
pub fn sampling_seed(master: u64, round: u64) -> u64 {
    derive(&[master, round, u64::MAX])
}
