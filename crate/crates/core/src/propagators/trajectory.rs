use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{PotentialSpec, Sampler};
use crate::error::{Error, Result};
use crate::grid::{read_binary, write_binary, Grid1D, WaveField};

const TIME_TOLERANCE: f64 = 1e-12;

/// Time-ordered fields of one evolution plus its metadata.
#[derive(Debug, Clone)]
pub struct Trajectory {
    fields: Vec<WaveField>,
    z: Complex64,
    potential: PotentialSpec,
    dt: f64,
}

#[derive(Serialize, Deserialize)]
struct Metadata {
    grid: Grid1D,
    potential_id: String,
    z: [f64; 2],
    dt: f64,
    times: Vec<f64>,
    snapshots: Vec<String>,
}

impl Trajectory {
    /// Times must be strictly increasing inside `[0, 1]`, on one grid, with `Re z ≥ 0`.
    pub fn new(fields: Vec<WaveField>, z: Complex64, potential: PotentialSpec, dt: f64) -> Result<Self> {
        if fields.is_empty() {
            return Err(Error::Precondition("trajectory needs at least one field".into()));
        }
        if z.re < 0.0 {
            return Err(Error::Precondition(format!("Re z = {} < 0 is ill-posed forward", z.re)));
        }
        let grid = *fields[0].grid();
        for (k, f) in fields.iter().enumerate() {
            if *f.grid() != grid {
                return Err(Error::Precondition(format!("field {k} lives on a different grid")));
            }
            let t = f.time();
            if !(-TIME_TOLERANCE..=1.0 + TIME_TOLERANCE).contains(&t) {
                return Err(Error::Precondition(format!("time {t} outside [0, 1]")));
            }
            if k > 0 && t <= fields[k - 1].time() {
                return Err(Error::Precondition(format!("times not strictly increasing at index {k}")));
            }
        }
        Ok(Self { fields, z, potential, dt })
    }

    /// Samples a closed-form or exact solution at the given times.
    pub fn sample(
        sampler: &dyn Sampler,
        times: &[f64],
        z: Complex64,
        potential: PotentialSpec,
    ) -> Result<Self> {
        let fields = times.iter().map(|&t| sampler.field_at(t)).collect::<Result<Vec<_>>>()?;
        let dt = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
        Self::new(fields, z, potential, dt)
    }

    /// `K + 1` uniform times on `[0, 1]`.
    pub fn uniform_times(k: usize) -> Vec<f64> {
        (0..=k).map(|i| i as f64 / k as f64).collect()
    }

    pub fn fields(&self) -> &[WaveField] {
        &self.fields
    }

    pub fn times(&self) -> Vec<f64> {
        self.fields.iter().map(WaveField::time).collect()
    }

    pub fn grid(&self) -> &Grid1D {
        self.fields[0].grid()
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn first(&self) -> &WaveField {
        &self.fields[0]
    }

    pub fn last(&self) -> &WaveField {
        self.fields.last().expect("non-empty")
    }

    /// The stored snapshot at time `t` (within `1e-9`).
    pub fn field_at_time(&self, t: f64) -> Result<&WaveField> {
        let k = self.nearest_index(t);
        if (self.fields[k].time() - t).abs() <= 1e-9 {
            Ok(&self.fields[k])
        } else {
            Err(Error::TimeNotSampled(t))
        }
    }

    fn nearest_index(&self, t: f64) -> usize {
        let k = self.fields.partition_point(|f| f.time() < t);
        if k == 0 {
            0
        } else if k == self.fields.len() {
            k - 1
        } else if (self.fields[k].time() - t) < (t - self.fields[k - 1].time()) {
            k
        } else {
            k - 1
        }
    }

    /// Cubic Lagrange interpolation in time through the four nearest snapshots.
    pub fn interpolate_time(&self, t: f64) -> Result<WaveField> {
        let n = self.fields.len();
        let (t0, t1) = (self.fields[0].time(), self.fields[n - 1].time());
        if t < t0 - TIME_TOLERANCE || t > t1 + TIME_TOLERANCE {
            return Err(Error::Precondition(format!("time {t} outside trajectory span [{t0}, {t1}]")));
        }
        if let Ok(f) = self.field_at_time(t) {
            return Ok(f.clone().with_time(t));
        }
        if n < 4 {
            return Err(Error::TimeNotSampled(t));
        }
        let k = self.fields.partition_point(|f| f.time() < t);
        let start = k.saturating_sub(2).min(n - 4);
        let nodes: Vec<&WaveField> = self.fields[start..start + 4].iter().collect();
        let ts: Vec<f64> = nodes.iter().map(|f| f.time()).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid().n_points()];
        for (i, f) in nodes.iter().enumerate() {
            let mut l = 1.0;
            for (j, &tj) in ts.iter().enumerate() {
                if j != i {
                    l *= (t - tj) / (ts[i] - tj);
                }
            }
            for (o, v) in out.iter_mut().zip(f.samples()) {
                *o += v * l;
            }
        }
        WaveField::new(*self.grid(), out, t)
    }

    /// Writes `metadata.json` plus one binary snapshot per time into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut snapshots = Vec::with_capacity(self.fields.len());
        for (k, f) in self.fields.iter().enumerate() {
            let name = format!("snapshot_{k:05}.bin");
            write_binary(f, BufWriter::new(File::create(dir.join(&name))?))?;
            snapshots.push(name);
        }
        let meta = Metadata {
            grid: *self.grid(),
            potential_id: self.potential.id().to_string(),
            z: [self.z.re, self.z.im],
            dt: self.dt,
            times: self.times(),
            snapshots,
        };
        serde_json::to_writer_pretty(BufWriter::new(File::create(dir.join("metadata.json"))?), &meta)?;
        Ok(())
    }

    /// Reads a directory written by [`Trajectory::save`]. The potential must be a registered family.
    pub fn load(dir: &Path) -> Result<Self> {
        let meta: Metadata = serde_json::from_reader(BufReader::new(File::open(dir.join("metadata.json"))?))?;
        if meta.times.len() != meta.snapshots.len() {
            return Err(Error::Format("times and snapshots differ in length".into()));
        }
        let mut fields = Vec::with_capacity(meta.snapshots.len());
        for (name, &t) in meta.snapshots.iter().zip(&meta.times) {
            let f = read_binary(BufReader::new(File::open(dir.join(name))?))?;
            if *f.grid() != meta.grid || f.time() != t {
                return Err(Error::Format(format!("snapshot {name} disagrees with metadata")));
            }
            fields.push(f);
        }
        let potential = PotentialSpec::from_id(&meta.potential_id)?;
        Self::new(fields, Complex64::new(meta.z[0], meta.z[1]), potential, meta.dt)
    }
}

impl Sampler for Trajectory {
    fn grid(&self) -> Grid1D {
        *Trajectory::grid(self)
    }

    fn field_at(&self, t: f64) -> Result<WaveField> {
        self.interpolate_time(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(times: &[f64]) -> Result<Trajectory> {
        let g = Grid1D::new(16, 4.0).unwrap();
        let fields = times
            .iter()
            .map(|&t| WaveField::from_fn(g, t, |x| Complex64::new(x * t * t * t, t)).unwrap())
            .collect();
        Trajectory::new(fields, Complex64::new(0.0, 1.0), PotentialSpec::zero(), 0.1)
    }

    #[test]
    fn rejects_bad_time_orders() {
        assert!(toy(&[0.0, 0.5, 0.5]).is_err());
        assert!(toy(&[0.0, 1.5]).is_err());
        assert!(toy(&[0.0, 0.5]).is_ok());
    }

    #[test]
    fn cubic_interpolation_exact_on_cubics() {
        let tr = toy(&[0.0, 0.2, 0.4, 0.6, 0.8, 1.0]).unwrap();
        let f = tr.interpolate_time(0.53).unwrap();
        let want = WaveField::from_fn(*tr.grid(), 0.53, |x| Complex64::new(x * 0.53f64.powi(3), 0.53)).unwrap();
        assert!(f.max_pointwise_distance(&want) < 1e-13);
        assert!(matches!(tr.field_at_time(0.3), Err(Error::TimeNotSampled(_))));
    }

    #[test]
    fn save_load_round_trip() {
        let tr = toy(&[0.0, 0.25, 0.5]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        tr.save(dir.path()).unwrap();
        let back = Trajectory::load(dir.path()).unwrap();
        assert_eq!(back.times(), tr.times());
        for (a, b) in back.fields().iter().zip(tr.fields()) {
            assert_eq!(a.samples(), b.samples());
        }
        assert_eq!(back.z(), tr.z());
    }
}
