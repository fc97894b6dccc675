use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::plant::PlantState;

/// Gaussian noise plus quantization. A zero quantum disables quantization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorModel {
    pub sigma_t: f64,
    pub sigma_h: f64,
    pub quantum_t: f64,
    pub quantum_h: f64,
}

impl Default for SensorModel {
    /// PT100 class A: ±0.3 °C taken as 3σ.
    fn default() -> Self {
        Self {
            sigma_t: 0.1,
            sigma_h: 0.5,
            quantum_t: 0.1,
            quantum_h: 0.1,
        }
    }
}

impl SensorModel {
    pub fn ideal() -> Self {
        Self {
            sigma_t: 0.0,
            sigma_h: 0.0,
            quantum_t: 0.0,
            quantum_h: 0.0,
        }
    }
}

fn quantize(x: f64, q: f64) -> f64 {
    if q > 0.0 {
        (x / q).round() * q
    } else {
        x
    }
}

/// One noisy reading `(ti, hi)`. The noise depends only on `(seed, counter)`,
/// so repeated calls with the same pair give the same values.
pub fn read_sensors(state: &PlantState, model: &SensorModel, seed: u64, counter: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(counter);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let nt = unit.sample(&mut rng);
    let nh = unit.sample(&mut rng);
    let ti = quantize(state.ti + model.sigma_t * nt, model.quantum_t);
    let hi = quantize(state.hi + model.sigma_h * nh, model.quantum_h).clamp(0.0, 100.0);
    (ti, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_sensor_is_identity() {
        let s = PlantState { ti: 18.0371, hi: 61.234 };
        for c in 0..10 {
            assert_eq!(read_sensors(&s, &SensorModel::ideal(), 99, c), (s.ti, s.hi));
        }
    }

    #[test]
    fn readings_are_deterministic() {
        let s = PlantState { ti: 18.0, hi: 60.0 };
        let m = SensorModel::default();
        assert_eq!(read_sensors(&s, &m, 4, 17), read_sensors(&s, &m, 4, 17));
        let draws: Vec<_> = (0..20).map(|c| read_sensors(&s, &m, 4, c)).collect();
        assert!(draws.windows(2).any(|w| w[0] != w[1]));
    }

    #[test]
    fn readings_are_quantized() {
        let s = PlantState { ti: 18.0, hi: 60.0 };
        for c in 0..100 {
            let (t, h) = read_sensors(&s, &SensorModel::default(), 1, c);
            assert!(((t * 10.0) - (t * 10.0).round()).abs() < 1e-9);
            assert!(((h * 10.0) - (h * 10.0).round()).abs() < 1e-9);
        }
    }

    #[test]
    fn three_sigma_bound() {
        let s = PlantState { ti: 18.0, hi: 60.0 };
        let m = SensorModel::default();
        let n = 100_000u64;
        let outside = (0..n)
            .filter(|&c| (read_sensors(&s, &m, 2024, c).0 - s.ti).abs() > 0.3 + 1e-9)
            .count();
        assert!((outside as f64) < 0.003 * n as f64, "{outside} of {n} beyond 0.3 °C");
    }
}
