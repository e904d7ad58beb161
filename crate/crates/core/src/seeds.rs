use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seed of sweep cell `index` derived from a master seed (splitmix64 mixing),
/// so parallel cells never share a stream and reruns are reproducible.
pub fn cell_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_get_distinct_seeds() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| cell_seed(42, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_eq!(cell_seed(7, 3), cell_seed(7, 3));
        assert_ne!(cell_seed(7, 3), cell_seed(8, 3));
    }
}
