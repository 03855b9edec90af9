use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

fn digest_u64(parts: &[&[u8]]) -> u64 {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().unwrap())
}

/// Seed for one dataset instance, independent of processing order.
pub fn instance_seed(global_seed: u64, id: &str) -> u64 {
    digest_u64(&[&global_seed.to_le_bytes(), id.as_bytes()])
}

/// Sub-seed for a named stream under `seed`.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    digest_u64(&[&seed.to_le_bytes(), label.as_bytes()])
}

/// The portable RNG every generator draws from.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
