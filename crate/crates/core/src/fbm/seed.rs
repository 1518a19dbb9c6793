use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream families drawn by one path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    /// Wiener increments behind the fBm (and the per-step residual draws).
    Fbm = 0,
    /// The independent Brownian motion driving the stock in the volatility model.
    StockNoise = 1,
    /// Exact covariance sampler.
    Cholesky = 2,
}

/// `(master_seed, path_index)` pair that fixes every draw of one path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PathSeed {
    pub master_seed: u64,
    pub path_index: u64,
}

impl PathSeed {
    pub fn new(master_seed: u64, path_index: u64) -> Self {
        Self { master_seed, path_index }
    }

    /// Counter-based generator: the key comes from `(master_seed, stream)`,
    /// the ChaCha stream id is the path index.
    pub fn rng(&self, stream: Stream) -> ChaCha8Rng {
        let mut state = self.master_seed ^ (stream as u64).wrapping_mul(0xA24B_AED4_963E_E407);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.path_index);
        rng
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
