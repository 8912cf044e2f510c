use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// A family of independent generators addressed by a counter.
///
/// The ChaCha key is derived from `(master_seed, stream_id)`; the counter
/// selects the ChaCha stream. Every draw is therefore a pure function of
/// `(master_seed, stream_id, counter)`, whichever worker produces it.
#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    stream_id: String,
    key: [u8; 32],
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: impl Into<String>) -> Self {
        let stream_id = stream_id.into();
        let mut h = Sha256::new();
        h.update(master_seed.to_le_bytes());
        h.update(stream_id.as_bytes());
        let key: [u8; 32] = h.finalize().into();
        Self {
            master_seed,
            stream_id,
            key,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> &str {
        &self.stream_id
    }

    /// A sub-family with a derived label, e.g. per experiment row.
    pub fn child(&self, label: &str) -> Self {
        Self::new(self.master_seed, format!("{}/{}", self.stream_id, label))
    }

    pub fn at(&self, counter: u64) -> SeededRng {
        let mut inner = ChaCha8Rng::from_seed(self.key);
        inner.set_stream(counter);
        SeededRng {
            master_seed: self.master_seed,
            counter,
            inner,
        }
    }
}

/// The generator for one `(master_seed, stream_id, counter)` triple.
#[derive(Clone, Debug)]
pub struct SeededRng {
    master_seed: u64,
    counter: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(master_seed: u64, stream_id: &str, counter: u64) -> Self {
        RngStream::new(master_seed, stream_id).at(counter)
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}
