use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const WEATHER_COLUMNS: [&str; 5] = ["t_s", "te_c", "he_pct", "rg_wm2", "vv_kmh"];

/// Outside conditions at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WeatherPoint {
    /// Seconds since start.
    pub t: f64,
    /// Temperature, °C.
    pub te: f64,
    /// Relative humidity, %.
    pub he: f64,
    /// Global radiation, W/m².
    pub rg: f64,
    /// Wind speed, km/h.
    pub vv: f64,
}

impl WeatherPoint {
    fn check(&self) -> std::result::Result<(), (&'static str, String)> {
        if !(0.0..=100.0).contains(&self.he) {
            return Err(("he_pct", format!("humidity {} outside [0, 100]", self.he)));
        }
        if !(self.rg >= 0.0) {
            return Err(("rg_wm2", format!("negative radiation {}", self.rg)));
        }
        if !(self.vv >= 0.0) {
            return Err(("vv_kmh", format!("negative wind speed {}", self.vv)));
        }
        if !self.te.is_finite() {
            return Err(("te_c", "non-finite temperature".into()));
        }
        Ok(())
    }
}

/// Time-ordered weather samples, linearly interpolated and held constant past
/// either end.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherTrace {
    points: Vec<WeatherPoint>,
}

impl WeatherTrace {
    pub fn new(points: Vec<WeatherPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("weather trace is empty".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if let Err((col, reason)) = p.check() {
                return Err(Error::InvalidInput(format!("weather sample {i}, {col}: {reason}")));
            }
        }
        if points.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::InvalidInput("weather times must be strictly increasing".into()));
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[WeatherPoint] {
        &self.points
    }

    pub fn start(&self) -> f64 {
        self.points[0].t
    }

    pub fn end(&self) -> f64 {
        self.points[self.points.len() - 1].t
    }

    pub fn at(&self, t: f64) -> WeatherPoint {
        let pts = &self.points;
        let i = pts.partition_point(|p| p.t <= t);
        if i == 0 {
            return WeatherPoint { t, ..pts[0] };
        }
        if i == pts.len() {
            return WeatherPoint { t, ..pts[i - 1] };
        }
        let (a, b) = (&pts[i - 1], &pts[i]);
        let w = (t - a.t) / (b.t - a.t);
        let lerp = |x: f64, y: f64| x + w * (y - x);
        WeatherPoint {
            t,
            te: lerp(a.te, b.te),
            he: lerp(a.he, b.he),
            rg: lerp(a.rg, b.rg),
            vv: lerp(a.vv, b.vv),
        }
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(WEATHER_COLUMNS)?;
        for p in &self.points {
            w.write_record([p.t, p.te, p.he, p.rg, p.vv].map(|v| v.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Reads a `t_s,te_c,he_pct,rg_wm2,vv_kmh` CSV file. Errors name the data row
/// (1-based, header excluded) and column.
pub fn load_weather_csv(path: impl AsRef<Path>) -> Result<WeatherTrace> {
    let path = path.as_ref();
    let fail = |row: usize, column: &str, reason: String| Error::WeatherLoad {
        path: path.to_path_buf(),
        row,
        column: column.to_string(),
        reason,
    };

    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = reader.headers()?.clone();
    let mut idx = [0usize; 5];
    for (slot, name) in idx.iter_mut().zip(WEATHER_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| fail(0, name, "missing column".into()))?;
    }

    let mut points: Vec<WeatherPoint> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record?;
        let mut vals = [0.0; 5];
        for ((v, &col), name) in vals.iter_mut().zip(&idx).zip(WEATHER_COLUMNS) {
            let raw = record.get(col).ok_or_else(|| fail(row, name, "missing value".into()))?;
            *v = raw
                .parse::<f64>()
                .map_err(|_| fail(row, name, format!("cannot parse `{raw}` as a number")))?;
            if !v.is_finite() {
                return Err(fail(row, name, "non-finite value".into()));
            }
        }
        let p = WeatherPoint {
            t: vals[0],
            te: vals[1],
            he: vals[2],
            rg: vals[3],
            vv: vals[4],
        };
        if let Some(prev) = points.last() {
            if !(p.t > prev.t) {
                return Err(fail(row, "t_s", format!("time {} does not increase (previous {})", p.t, prev.t)));
            }
        }
        p.check().map_err(|(col, reason)| fail(row, col, reason))?;
        points.push(p);
    }
    if points.is_empty() {
        return Err(fail(1, "t_s", "no data rows".into()));
    }
    WeatherTrace::new(points)
}

/// Shape of a synthetic winter night.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NightWeatherConfig {
    pub duration_s: f64,
    pub te_start_c: f64,
    pub te_min_c: f64,
    pub he_start_pct: f64,
    pub he_end_pct: f64,
    pub wind_mean_kmh: f64,
    /// Standard deviation of the slow temperature wobble, °C. 0 disables it.
    pub te_noise_c: f64,
    pub he_noise_pct: f64,
    pub wind_noise_kmh: f64,
    pub sample_period_s: f64,
}

impl Default for NightWeatherConfig {
    fn default() -> Self {
        Self {
            duration_s: 43_200.0,
            te_start_c: 8.0,
            te_min_c: 0.0,
            he_start_pct: 50.0,
            he_end_pct: 65.0,
            wind_mean_kmh: 4.0,
            te_noise_c: 0.15,
            he_noise_pct: 0.5,
            wind_noise_kmh: 1.0,
            sample_period_s: 60.0,
        }
    }
}

impl NightWeatherConfig {
    pub fn noiseless(self) -> Self {
        Self {
            te_noise_c: 0.0,
            he_noise_pct: 0.0,
            wind_noise_kmh: 0.0,
            ..self
        }
    }

    /// Noise-free outside temperature: exponential approach from `te_start_c`
    /// to `te_min_c` with a time constant of a third of the night.
    pub fn te_envelope(&self, t: f64) -> f64 {
        let tc = self.duration_s / 3.0;
        self.te_min_c + (self.te_start_c - self.te_min_c) * (-t / tc).exp()
    }

    pub fn he_envelope(&self, t: f64) -> f64 {
        let frac = (t / self.duration_s).clamp(0.0, 1.0);
        self.he_start_pct + frac * (self.he_end_pct - self.he_start_pct)
    }
}

/// Generates a night trace (no sun) sampled every `sample_period_s`.
///
/// Noise is a first-order autoregressive wobble so the interpolated trace stays
/// smooth; identical seeds give identical traces.
pub fn synth_night(cfg: &NightWeatherConfig, seed: u64) -> Result<WeatherTrace> {
    if !(cfg.duration_s > 0.0 && cfg.sample_period_s > 0.0) {
        return Err(Error::config("synthetic weather needs positive duration and sample period"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let n = (cfg.duration_s / cfg.sample_period_s).ceil() as usize;
    // correlation time of about 20 minutes
    let phi: f64 = (-cfg.sample_period_s / 1200.0).exp();
    let innov = (1.0 - phi * phi).sqrt();
    let (mut nt, mut nh, mut nw) = (0.0f64, 0.0f64, 0.0f64);

    let mut points = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t = k as f64 * cfg.sample_period_s;
        if k > 0 {
            nt = phi * nt + innov * unit.sample(&mut rng);
            nh = phi * nh + innov * unit.sample(&mut rng);
            nw = phi * nw + innov * unit.sample(&mut rng);
        }
        points.push(WeatherPoint {
            t,
            te: cfg.te_envelope(t) + cfg.te_noise_c * nt,
            he: (cfg.he_envelope(t) + cfg.he_noise_pct * nh).clamp(0.0, 100.0),
            rg: 0.0,
            vv: (cfg.wind_mean_kmh + cfg.wind_noise_kmh * nw).max(0.0),
        });
    }
    WeatherTrace::new(points)
}

/// Night trace with default humidity and wind settings.
pub fn synth_night_weather(duration: f64, te_start: f64, te_min: f64, seed: u64) -> Result<WeatherTrace> {
    let cfg = NightWeatherConfig {
        duration_s: duration,
        te_start_c: te_start,
        te_min_c: te_min,
        ..NightWeatherConfig::default()
    };
    synth_night(&cfg, seed)
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use approx::assert_relative_eq;

    use super::*;

    fn write(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_and_interpolates() {
        let f = write("t_s,te_c,he_pct,rg_wm2,vv_kmh\n0,10,60,0,2\n60,12,70,100,4\n");
        let trace = load_weather_csv(f.path()).unwrap();
        assert_eq!(trace.len(), 2);
        let mid = trace.at(30.0);
        assert_relative_eq!(mid.te, 11.0);
        assert_relative_eq!(mid.he, 65.0);
        assert_relative_eq!(mid.rg, 50.0);
        assert_relative_eq!(mid.vv, 3.0);
        assert_eq!(trace.at(-10.0).te, 10.0);
        assert_eq!(trace.at(1e4).te, 12.0);
    }

    #[test]
    fn column_order_is_free() {
        let f = write("vv_kmh,t_s,rg_wm2,he_pct,te_c\n1,0,0,50,5\n");
        let trace = load_weather_csv(f.path()).unwrap();
        assert_eq!(trace.points()[0].te, 5.0);
        assert_eq!(trace.points()[0].vv, 1.0);
    }

    #[test]
    fn rejects_bad_files() {
        let cases = [
            ("t_s,te_c,he_pct,rg_wm2\n0,1,2,3\n", "vv_kmh", 0),
            ("t_s,te_c,he_pct,rg_wm2,vv_kmh\n0,10,120,0,1\n", "he_pct", 1),
            ("t_s,te_c,he_pct,rg_wm2,vv_kmh\n0,10,50,0,1\n60,x,50,0,1\n", "te_c", 2),
            ("t_s,te_c,he_pct,rg_wm2,vv_kmh\n60,10,50,0,1\n0,10,50,0,1\n", "t_s", 2),
            ("t_s,te_c,he_pct,rg_wm2,vv_kmh\n0,10,50,-5,1\n", "rg_wm2", 1),
        ];
        for (content, col, row_no) in cases {
            let f = write(content);
            match load_weather_csv(f.path()) {
                Err(Error::WeatherLoad { row, column, .. }) => {
                    assert_eq!(column, col);
                    assert_eq!(row, row_no);
                }
                other => panic!("expected load error for {col}, got {other:?}"),
            }
        }
    }

    #[test]
    fn csv_round_trip() {
        let trace = synth_night_weather(3600.0, 9.0, 3.0, 5).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        trace.write_csv(f.path()).unwrap();
        let back = load_weather_csv(f.path()).unwrap();
        assert_eq!(back, trace);
    }

    #[test]
    fn flat_night_without_noise_is_constant() {
        let cfg = NightWeatherConfig {
            te_start_c: 7.0,
            te_min_c: 7.0,
            ..NightWeatherConfig::default()
        }
        .noiseless();
        let trace = synth_night(&cfg, 1).unwrap();
        assert!(trace.points().iter().all(|p| p.te == 7.0));
    }

    #[test]
    fn night_has_no_sun_and_rising_humidity() {
        let trace = synth_night_weather(43_200.0, 12.0, 6.0, 3).unwrap();
        assert!(trace.points().iter().all(|p| p.rg == 0.0 && p.vv >= 0.0));
        let first = trace.points()[0].he;
        let last = trace.points()[trace.len() - 1].he;
        assert!(last > first);
    }

    #[test]
    fn envelope_is_monotone() {
        let cfg = NightWeatherConfig {
            te_start_c: 12.0,
            te_min_c: 6.0,
            ..NightWeatherConfig::default()
        }
        .noiseless();
        let trace = synth_night(&cfg, 0).unwrap();
        let te: Vec<f64> = trace.points().iter().map(|p| p.te).collect();
        assert!(te.windows(2).all(|w| w[1] <= w[0]));
        assert!(te[te.len() - 1] >= 6.0);
    }

    #[test]
    fn same_seed_same_trace() {
        let a = synth_night_weather(7200.0, 8.0, 0.0, 11).unwrap();
        let b = synth_night_weather(7200.0, 8.0, 0.0, 11).unwrap();
        let c = synth_night_weather(7200.0, 8.0, 0.0, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
