use serde::{Deserialize, Serialize};

use super::weather::WeatherPoint;
use crate::error::{Error, Result};

/// Largest internal integration step, seconds.
pub const MAX_SUBSTEP_S: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantState {
    /// Internal air temperature, °C.
    pub ti: f64,
    /// Internal relative humidity, %.
    pub hi: f64,
}

impl Default for PlantState {
    fn default() -> Self {
        Self { ti: 18.0, hi: 55.0 }
    }
}

/// Actuator levels held over one integration step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ActuatorInputs {
    /// Heating, 0..1.
    pub ch: f64,
    /// Fog, 0..1.
    pub br: f64,
    /// Opening, 0..0.5.
    pub ov: f64,
    /// Shade, 0..1.
    pub om: f64,
}

impl ActuatorInputs {
    pub fn validate(&self) -> Result<()> {
        let unit = 0.0..=1.0;
        if !unit.contains(&self.ch) || !unit.contains(&self.br) || !unit.contains(&self.om) {
            return Err(Error::InvalidInput(format!("actuator level out of [0, 1]: {self:?}")));
        }
        if !(0.0..=0.5).contains(&self.ov) {
            return Err(Error::InvalidInput(format!("opening must be within [0, 0.5], got {}", self.ov)));
        }
        Ok(())
    }
}

/// Coefficients of the synthetic climate model, all per second.
///
/// ```text
/// dTi/dt = k_loss(Te−Ti) + k_sun·Rg(1−Om) + k_heat·Ch − k_fog_t·Br + k_vent·Ov(Te−Ti)(1 + k_wind·Vv)
/// dHi/dt = k_hx(He−Hi) − k_dry·Ch + k_fog_h·Br − k_vent_h·Ov(Hi−He)
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GreenhouseParams {
    pub k_loss: f64,
    pub k_sun: f64,
    pub k_heat: f64,
    pub k_fog_t: f64,
    pub k_vent: f64,
    pub k_wind: f64,
    pub k_hx: f64,
    pub k_dry: f64,
    pub k_fog_h: f64,
    pub k_vent_h: f64,
}

impl Default for GreenhouseParams {
    fn default() -> Self {
        Self {
            k_loss: 1.3e-4,
            k_sun: 1e-5,
            k_heat: 0.01,
            k_fog_t: 1e-4,
            k_vent: 5e-4,
            k_wind: 0.02,
            k_hx: 2.5e-4,
            k_dry: 0.01875,
            k_fog_h: 0.0125,
            k_vent_h: 5e-4,
        }
    }
}

impl GreenhouseParams {
    /// All coefficients set to zero; the plant then never moves.
    pub fn zero() -> Self {
        Self {
            k_loss: 0.0,
            k_sun: 0.0,
            k_heat: 0.0,
            k_fog_t: 0.0,
            k_vent: 0.0,
            k_wind: 0.0,
            k_hx: 0.0,
            k_dry: 0.0,
            k_fog_h: 0.0,
            k_vent_h: 0.0,
        }
    }

    pub fn coefficients(&self) -> [f64; 10] {
        [
            self.k_loss,
            self.k_sun,
            self.k_heat,
            self.k_fog_t,
            self.k_vent,
            self.k_wind,
            self.k_hx,
            self.k_dry,
            self.k_fog_h,
            self.k_vent_h,
        ]
    }

    /// Multiplies every coefficient by the matching factor.
    pub fn scaled(&self, factors: [f64; 10]) -> Self {
        let c = self.coefficients();
        let s: Vec<f64> = c.iter().zip(factors).map(|(c, f)| c * f).collect();
        Self {
            k_loss: s[0],
            k_sun: s[1],
            k_heat: s[2],
            k_fog_t: s[3],
            k_vent: s[4],
            k_wind: s[5],
            k_hx: s[6],
            k_dry: s[7],
            k_fog_h: s[8],
            k_vent_h: s[9],
        }
    }

    /// Checks the coefficient invariants. A zero `k_heat` is only accepted for
    /// the all-zero degenerate plant.
    pub fn validate(&self) -> Result<()> {
        let c = self.coefficients();
        if c.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::config("plant coefficients must be finite and non-negative"));
        }
        if self.k_heat <= 0.0 && c.iter().any(|v| *v != 0.0) {
            return Err(Error::config("k_heat must be positive"));
        }
        Ok(())
    }
}

/// Right-hand side `(dTi/dt, dHi/dt)` in °C/s and %/s.
pub fn plant_derivatives(
    state: &PlantState,
    inputs: &ActuatorInputs,
    weather: &WeatherPoint,
    p: &GreenhouseParams,
) -> (f64, f64) {
    let dt_out = weather.te - state.ti;
    let d_ti = p.k_loss * dt_out + p.k_sun * weather.rg * (1.0 - inputs.om) + p.k_heat * inputs.ch
        - p.k_fog_t * inputs.br
        + p.k_vent * inputs.ov * dt_out * (1.0 + p.k_wind * weather.vv);
    let d_hi = p.k_hx * (weather.he - state.hi) - p.k_dry * inputs.ch + p.k_fog_h * inputs.br
        - p.k_vent_h * inputs.ov * (state.hi - weather.he);
    (d_ti, d_hi)
}

/// Classic RK4 step of `ẋ = f(x)` for a two-component state.
pub fn rk4_step(x: [f64; 2], h: f64, f: impl Fn([f64; 2]) -> [f64; 2]) -> [f64; 2] {
    let add = |a: [f64; 2], b: [f64; 2], s: f64| [a[0] + s * b[0], a[1] + s * b[1]];
    let k1 = f(x);
    let k2 = f(add(x, k1, h / 2.0));
    let k3 = f(add(x, k2, h / 2.0));
    let k4 = f(add(x, k3, h));
    [
        x[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        x[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Advances the climate by `dt` seconds with inputs and weather held constant,
/// sub-stepping at [`MAX_SUBSTEP_S`]. Hi is clamped to `[0, 100]` after every
/// sub-step.
pub fn step_plant(
    state: PlantState,
    inputs: &ActuatorInputs,
    weather: &WeatherPoint,
    params: &GreenhouseParams,
    dt: f64,
) -> Result<PlantState> {
    step_plant_with(state, inputs, weather, params, dt, MAX_SUBSTEP_S)
}

/// [`step_plant`] with an explicit maximum sub-step.
pub fn step_plant_with(
    state: PlantState,
    inputs: &ActuatorInputs,
    weather: &WeatherPoint,
    params: &GreenhouseParams,
    dt: f64,
    max_substep: f64,
) -> Result<PlantState> {
    if !(dt > 0.0 && max_substep > 0.0) {
        return Err(Error::InvalidInput(format!("plant step must be positive, got {dt} s")));
    }
    inputs.validate()?;
    let n = (dt / max_substep).ceil().max(1.0) as usize;
    let h = dt / n as f64;
    let mut x = [state.ti, state.hi];
    for _ in 0..n {
        x = rk4_step(x, h, |x| {
            let s = PlantState { ti: x[0], hi: x[1] };
            let (a, b) = plant_derivatives(&s, inputs, weather, params);
            [a, b]
        });
        x[1] = x[1].clamp(0.0, 100.0);
        if !x[0].is_finite() || !x[1].is_finite() {
            return Err(Error::IntegratorFault { t: weather.t });
        }
    }
    Ok(PlantState { ti: x[0], hi: x[1] })
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;

    fn calm(te: f64, he: f64) -> WeatherPoint {
        WeatherPoint {
            t: 0.0,
            te,
            he,
            rg: 0.0,
            vv: 0.0,
        }
    }

    #[test]
    fn equilibrium_is_fixed_point() {
        let s = PlantState { ti: 12.0, hi: 70.0 };
        let next = step_plant(s, &ActuatorInputs::default(), &calm(12.0, 70.0), &GreenhouseParams::default(), 60.0).unwrap();
        assert_eq!(next, s);
    }

    #[test]
    fn heating_rate_hand_evaluated() {
        // 0.01 − 1.3e-4·8 = 0.00896 °C/s
        let s = PlantState { ti: 18.0, hi: 60.0 };
        let inputs = ActuatorInputs { ch: 1.0, ..Default::default() };
        let (d_ti, _) = plant_derivatives(&s, &inputs, &calm(10.0, 60.0), &GreenhouseParams::default());
        assert_relative_eq!(d_ti, 0.00896, epsilon = 1e-15);
    }

    #[test]
    fn humidity_is_clamped() {
        let p = GreenhouseParams { k_fog_h: 1.0, ..GreenhouseParams::default() };
        let inputs = ActuatorInputs { br: 1.0, ..Default::default() };
        let s = step_plant(PlantState { ti: 18.0, hi: 99.0 }, &inputs, &calm(18.0, 99.0), &p, 60.0).unwrap();
        assert_eq!(s.hi, 100.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let w = calm(10.0, 60.0);
        let p = GreenhouseParams::default();
        let over = ActuatorInputs { ov: 0.6, ..Default::default() };
        assert!(step_plant(PlantState::default(), &over, &w, &p, 1.0).is_err());
        assert!(step_plant(PlantState::default(), &ActuatorInputs::default(), &w, &p, 0.0).is_err());
    }

    #[test]
    fn non_finite_state_is_integrator_fault() {
        let p = GreenhouseParams { k_loss: 1e300, ..GreenhouseParams::default() };
        let s = PlantState { ti: 1e300, hi: 50.0 };
        let err = step_plant(s, &ActuatorInputs::default(), &calm(-1e300, 50.0), &p, 1.0).unwrap_err();
        assert!(matches!(err, Error::IntegratorFault { .. }));
    }

    #[test]
    fn free_cooling_is_monotone_toward_te() {
        let p = GreenhouseParams::default();
        let w = calm(4.0, 60.0);
        let mut s = PlantState { ti: 18.0, hi: 60.0 };
        for _ in 0..720 {
            let next = step_plant(s, &ActuatorInputs::default(), &w, &p, 60.0).unwrap();
            assert!(next.ti < s.ti && next.ti > 4.0);
            s = next;
        }
    }

    #[test]
    fn fog_pulse_raises_humidity_a_few_percent() {
        let p = GreenhouseParams::default();
        let s = PlantState { ti: 18.0, hi: 55.0 };
        let inputs = ActuatorInputs { br: 1.0, ..Default::default() };
        let after = step_plant(s, &inputs, &calm(6.0, 55.0), &p, 180.0).unwrap();
        let rise = after.hi - s.hi;
        assert!((2.0..=4.0).contains(&rise), "rise {rise}");
    }

    #[test]
    fn step_halving_converges() {
        let p = GreenhouseParams::default();
        let inputs = ActuatorInputs { ch: 0.3, br: 0.4, ov: 0.1, om: 0.2 };
        let w = WeatherPoint { t: 0.0, te: 3.0, he: 80.0, rg: 150.0, vv: 10.0 };
        let run = |h: f64| {
            let mut s = PlantState { ti: 18.0, hi: 55.0 };
            for _ in 0..720 {
                s = step_plant_with(s, &inputs, &w, &p, 60.0, h).unwrap();
            }
            s
        };
        let (a, b) = (run(1.0), run(0.5));
        assert!((a.ti - b.ti).abs() < 1e-6, "{} vs {}", a.ti, b.ti);
    }

    proptest! {
        #[test]
        fn heating_warms_and_dries(
            ti in 0.0f64..35.0, hi in 0.0f64..100.0, te in -10.0f64..30.0, he in 0.0f64..100.0,
            rg in 0.0f64..800.0, vv in 0.0f64..40.0, ch in 0.0f64..1.0, dch in 0.0f64..1.0,
            br in 0.0f64..1.0, ov in 0.0f64..0.5, om in 0.0f64..1.0,
        ) {
            let p = GreenhouseParams::default();
            let s = PlantState { ti, hi };
            let w = WeatherPoint { t: 0.0, te, he, rg, vv };
            let lo = ActuatorInputs { ch, br, ov, om };
            let hi_in = ActuatorInputs { ch: (ch + dch).min(1.0), ..lo };
            let (t0, h0) = plant_derivatives(&s, &lo, &w, &p);
            let (t1, h1) = plant_derivatives(&s, &hi_in, &w, &p);
            prop_assert!(t1 >= t0 && h1 <= h0);

            let more_fog = ActuatorInputs { br: (br + dch).min(1.0), ..lo };
            let (t2, h2) = plant_derivatives(&s, &more_fog, &w, &p);
            prop_assert!(t2 <= t0 && h2 >= h0);
        }
    }
}
