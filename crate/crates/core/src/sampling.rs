//! Seeded path generation under a designated true law.
//!
//! Every path owns a ChaCha8 stream selected by `(seed, stream)`, so trial
//! `i` of an experiment always sees the same randomness no matter how the
//! trials are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::forecast::Forecast;
use crate::history::{PlayEntry, PlayHistory, PlayPath, Seat};
use crate::strategy::{ForecastingStrategy, Strategy};

/// Which law Nature samples from.
#[derive(Debug, Clone)]
pub enum NatureLaw {
    /// The forecaster in the given seat is truthful.
    Seat(Seat),
    /// An outside strategy, evaluated at the realized history in the first seat.
    External(Strategy),
}

/// A true law plus the coordinates of its random stream.
#[derive(Debug, Clone)]
pub struct TruthProcess {
    pub law: NatureLaw,
    pub seed: u64,
    pub stream: u64,
}

impl TruthProcess {
    pub fn new(law: NatureLaw, seed: u64) -> Self {
        TruthProcess { law, seed, stream: 0 }
    }

    pub fn first(seed: u64) -> Self {
        TruthProcess::new(NatureLaw::Seat(Seat::First), seed)
    }

    /// Same law on another stream (trial index).
    pub fn with_stream(&self, stream: u64) -> Self {
        TruthProcess {
            law: self.law.clone(),
            seed: self.seed,
            stream,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        path_rng(self.seed, self.stream)
    }
}

/// The generator for one path.
pub fn path_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives an independent seed for a named sub-experiment.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Draws an outcome from `forecast` with a uniform variate in `[0, 1)`.
/// Zero-probability outcomes are never returned.
pub fn draw_outcome(forecast: &Forecast, u: f64) -> usize {
    let probs = forecast.probs();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (x, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = x;
            if u < acc {
                return x;
            }
        }
    }
    last_positive
}

/// Samples a path of length `horizon` under `truth`.
pub fn sample_path(
    truth: &TruthProcess,
    f: &dyn ForecastingStrategy,
    g: &dyn ForecastingStrategy,
    horizon: usize,
) -> PlayPath {
    let mut rng = truth.rng();
    let mut path = PlayHistory::with_capacity(f.alphabet(), horizon);
    extend_path(&mut path, truth, &mut rng, f, g, horizon);
    path
}

/// Continues `path` for `steps` more periods with the given generator.
pub fn extend_path(
    path: &mut PlayHistory,
    truth: &TruthProcess,
    rng: &mut ChaCha8Rng,
    f: &dyn ForecastingStrategy,
    g: &dyn ForecastingStrategy,
    steps: usize,
) {
    for _ in 0..steps {
        let (first, second) = path.forecasts(f, g);
        let outcome = {
            let law = match &truth.law {
                NatureLaw::Seat(Seat::First) => std::borrow::Cow::Borrowed(&first),
                NatureLaw::Seat(Seat::Second) => std::borrow::Cow::Borrowed(&second),
                NatureLaw::External(s) => std::borrow::Cow::Owned(s.forecast(path.as_prefix(), Seat::First)),
            };
            draw_outcome(&law, rng.gen::<f64>())
        };
        path.push_entry(PlayEntry {
            outcome,
            first,
            second,
        })
        .expect("sampled outcome lies in the alphabet");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::Alphabet;
    use crate::strategy::{parse_strategy, Fair};

    #[test]
    fn horizon_zero_is_empty() {
        let f = Fair::new(Alphabet::BINARY);
        let p = sample_path(&TruthProcess::first(1), &f, &f, 0);
        assert!(p.is_empty());
        assert_eq!(p.log_prefix_prob(Seat::First).0, 0.0);
        assert_eq!(p.log_prefix_prob(Seat::Second).0, 0.0);
    }

    #[test]
    fn degenerate_truth_yields_all_ones() {
        let f = parse_strategy("delta:1", Alphabet::BINARY).unwrap();
        let g = parse_strategy("fair", Alphabet::BINARY).unwrap();
        let p = sample_path(&TruthProcess::first(3), &*f, &*g, 50);
        assert!(p.entries().iter().all(|e| e.outcome == 1));
    }

    #[test]
    fn equal_seeds_equal_paths_other_streams_differ() {
        let f = Fair::new(Alphabet::BINARY);
        let t = TruthProcess::first(11);
        let a = sample_path(&t, &f, &f, 20);
        let b = sample_path(&t, &f, &f, 20);
        assert_eq!(a, b);
        let c = sample_path(&t.with_stream(1), &f, &f, 64);
        let d = sample_path(&t.with_stream(2), &f, &f, 64);
        assert_ne!(c.outcomes(), d.outcomes());
    }

    #[test]
    fn draw_never_picks_zero_mass() {
        let fc = Forecast::binary(1.0).unwrap();
        for u in [0.0, 0.3, 0.999_999] {
            assert_eq!(draw_outcome(&fc, u), 1);
        }
        let fc = Forecast::binary(0.0).unwrap();
        assert_eq!(draw_outcome(&fc, 0.999_999_999), 0);
    }

    #[test]
    fn second_seat_truth_follows_second_forecaster() {
        let f = parse_strategy("delta:0", Alphabet::BINARY).unwrap();
        let g = parse_strategy("delta:1", Alphabet::BINARY).unwrap();
        let truth = TruthProcess::new(NatureLaw::Seat(Seat::Second), 5);
        let p = sample_path(&truth, &*f, &*g, 10);
        assert!(p.entries().iter().all(|e| e.outcome == 1));
        assert!(p.log_prefix_prob(Seat::First).is_zero());
    }
}
