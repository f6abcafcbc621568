//! Counter-based random streams.
//!
//! Every random draw in the crate is addressed by a [`StreamKey`]: a user
//! seed, a purpose tag naming the consumer ("ensemble", "bootstrap", ...),
//! and a path index.  The generator for a key is a pure function of the key
//! and a draw counter, so any path can be re-simulated in isolation, streams
//! for different purposes never share state, and adding paths to an ensemble
//! never shifts the draws of existing ones.

/// Golden-ratio increment used by the splitmix64 sequence.
const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Finalizer of splitmix64: a bijection on `u64` with full avalanche.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable 64-bit hash of a purpose tag (FNV-1a).
pub fn purpose_id(name: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in name.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Address of an independent random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub purpose: u64,
    pub path: u64,
}

impl StreamKey {
    pub fn new(seed: u64, purpose: &str, path: u64) -> Self {
        StreamKey {
            seed,
            purpose: purpose_id(purpose),
            path,
        }
    }

    /// Same stream family, different path index.
    pub fn with_path(self, path: u64) -> Self {
        StreamKey { path, ..self }
    }

    /// Collapses the key to the 64-bit state the stream counts from.
    fn fold(self) -> u64 {
        mix(mix(mix(self.seed) ^ self.purpose) ^ self.path)
    }
}

/// Deterministic stream of draws for one [`StreamKey`].
///
/// Draw `i` is `mix(base + i * GOLDEN)` where `base` folds the key, so the
/// stream is random access: [`Stream::seek`] repositions it in O(1).
#[derive(Clone, Debug)]
pub struct Stream {
    base: u64,
    counter: u64,
}

impl Stream {
    pub fn new(key: StreamKey) -> Self {
        Stream {
            base: key.fold(),
            counter: 0,
        }
    }

    /// Number of draws consumed so far.
    pub fn position(&self) -> u64 {
        self.counter
    }

    /// Repositions the stream at an absolute draw index.
    pub fn seek(&mut self, counter: u64) {
        self.counter = counter;
    }

    pub fn next_u64(&mut self) -> u64 {
        let out = mix(self.base.wrapping_add(self.counter.wrapping_mul(GOLDEN)));
        self.counter += 1;
        out
    }

    /// Uniform draw in the open interval (0, 1).
    ///
    /// Uses the top 53 bits shifted to the cell midpoint, so 0 and 1 are
    /// unreachable and the draw survives `ln` and inverse-distribution maps.
    pub fn next_uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal draw via the inverse distribution function.
    pub fn next_gaussian(&mut self) -> f64 {
        inverse_normal_cdf(self.next_uniform())
    }

    /// Uniform draw in `0..n` without modulo bias.
    pub fn next_below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "next_below requires a positive bound");
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }
}

/// Inverse of the standard normal distribution function.
///
/// Wichura's PPND16 rational approximations, accurate to about 1e-15 over
/// the full open interval.  Out-of-range arguments saturate to infinities.
pub fn inverse_normal_cdf(p: f64) -> f64 {
    if !(p > 0.0) {
        return f64::NEG_INFINITY;
    }
    if !(p < 1.0) {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = (((((((2.509_080_928_730_122_7e3 * r + 3.343_057_558_358_812_8e4) * r
            + 6.726_577_092_700_87e4)
            * r
            + 4.592_195_393_154_987e4)
            * r
            + 1.373_169_376_550_946_1e4)
            * r
            + 1.971_590_950_306_551_3e3)
            * r
            + 1.331_416_678_917_843_8e2)
            * r
            + 3.387_132_872_796_366_5)
            * q;
        let den = ((((((5.226_495_278_852_854_5e3 * r + 2.872_908_573_572_194_3e4) * r
            + 3.930_789_580_009_271e4)
            * r
            + 2.121_379_430_158_659_7e4)
            * r
            + 5.394_196_021_424_751e3)
            * r
            + 6.871_870_074_920_579e2)
            * r
            + 4.231_333_070_160_091e1)
            * r
            + 1.0;
        return num / den;
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let r = libm::sqrt(-libm::log(tail));
    let x = if r <= 5.0 {
        let r = r - 1.6;
        let num = ((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r
            + 2.417_807_251_774_506e-1)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_6)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5;
        let den = ((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
            + 1.519_866_656_361_645_7e-2)
            * r
            + 1.481_039_764_274_800_8e-1)
            * r
            + 6.897_673_349_851e-1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_758_8)
            * r
            + 1.0;
        num / den
    } else {
        let r = r - 5.0;
        let num = ((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 2.965_605_718_285_048_9e-1)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103;
        let den = ((((((2.042_310_539_811_551_7e-15 * r + 1.421_511_758_316_446e-7) * r
            + 1.846_318_317_510_054_8e-5)
            * r
            + 7.868_691_311_456_133e-4)
            * r
            + 1.487_536_129_085_061_5e-2)
            * r
            + 1.369_298_809_227_358e-1)
            * r
            + 5.998_322_065_558_88e-1)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}
