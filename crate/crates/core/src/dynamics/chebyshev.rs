//! Chebyshev expansion of the short-time evolution operator.
//!
//! Within one step the couplings are frozen at the step midpoint, so the
//! Hamiltonian is constant and
//! exp(−iHΔt/ħ) = e^{−iĒΔt/ħ} Σ_k (2 − δ_k0)(−i)^k J_k(ΔE Δt/2ħ) T_k(Ĥ_norm)
//! with Ĥ_norm = (H − Ē)/(ΔE/2) mapped into [−1, 1].

use num_complex::Complex64;

use super::hamiltonian::CoupledHamiltonian;
use super::Trajectory;
use crate::error::{Error, Result};
use crate::state::BipartiteState;
use crate::units::HBAR;

/// Expansion terms below this magnitude are dropped.
pub const COEFFICIENT_CUTOFF: f64 = 1e-14;
/// Safety factor applied to the half-width of the spectral bracket.
pub const SPECTRAL_MARGIN: f64 = 1.1;
/// A step that moves the norm further than this from one aborts the run.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// J_0(x), …, J_n(x) by Miller's backward recurrence.
pub fn bessel_j_sequence(x: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let top = n.max(x.abs().ceil() as usize);
    let mut start = top + 30 + (40.0 * top as f64).sqrt() as usize;
    start += start % 2;
    let mut next = 0.0;
    let mut cur = 1e-300;
    let mut norm = 0.0;
    let mut vals = vec![0.0; start + 1];
    vals[start] = cur;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        vals[k - 1] = cur;
        if cur.abs() > 1e250 {
            for v in vals[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
            next *= 1e-250;
            cur *= 1e-250;
        }
    }
    for (k, v) in vals.iter().enumerate() {
        if k == 0 {
            norm += v;
        } else if k % 2 == 0 {
            norm += 2.0 * v;
        }
    }
    for k in 0..=n {
        out[k] = vals[k] / norm;
    }
    // J_n(−x) = (−1)^n J_n(x); the recurrence already carries the sign of x
    out
}

/// Expansion coefficients a_k = (2 − δ_k0)(−i)^k J_k(r) truncated at the cutoff.
pub fn expansion_coefficients(r: f64) -> Vec<Complex64> {
    let guess = (1.5 * r).ceil() as usize + 40;
    let j = bessel_j_sequence(r, guess);
    let mut last = 0;
    for (k, v) in j.iter().enumerate() {
        let mag = if k == 0 { v.abs() } else { 2.0 * v.abs() };
        if mag >= COEFFICIENT_CUTOFF || (k as f64) <= r {
            last = k;
        }
    }
    let mut phase = Complex64::new(1.0, 0.0);
    (0..=last)
        .map(|k| {
            let a = if k == 0 { j[0] } else { 2.0 * j[k] };
            let c = phase * a;
            phase *= Complex64::new(0.0, -1.0);
            c
        })
        .collect()
}

/// Grid propagator for a [`CoupledHamiltonian`].
#[derive(Debug, Clone)]
pub struct ChebyshevPropagator<'a> {
    hamiltonian: &'a CoupledHamiltonian,
    center: f64,
    half_width: f64,
}

impl<'a> ChebyshevPropagator<'a> {
    pub fn new(hamiltonian: &'a CoupledHamiltonian) -> Self {
        let (lo, hi) = hamiltonian.spectral_bounds();
        ChebyshevPropagator {
            hamiltonian,
            center: 0.5 * (lo + hi),
            half_width: 0.5 * (hi - lo) * SPECTRAL_MARGIN,
        }
    }

    /// Uses an explicit spectral bracket; it must contain the Hamiltonian's range.
    pub fn with_bounds(hamiltonian: &'a CoupledHamiltonian, min: f64, max: f64) -> Result<Self> {
        let (lo, hi) = hamiltonian.spectral_bounds();
        if !(min <= lo && max >= hi) {
            return Err(Error::SpectralRangeExceeded {
                needed_min: lo,
                needed_max: hi,
                min,
                max,
            });
        }
        Ok(ChebyshevPropagator {
            hamiltonian,
            center: 0.5 * (min + max),
            half_width: 0.5 * (max - min),
        })
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }

    /// Advances `state` from t to t + dt in place.
    pub fn step(&self, state: &mut BipartiteState, t: f64, dt: f64) -> Result<()> {
        let h = self.hamiltonian;
        let coupling = h.coupling_matrix(t + 0.5 * dt);
        let (lo, hi) = h.spectral_bounds();
        let (min, max) = self.bounds();
        if lo < min || hi > max {
            return Err(Error::SpectralRangeExceeded {
                needed_min: lo,
                needed_max: hi,
                min,
                max,
            });
        }
        let coefs = expansion_coefficients(self.half_width * dt / HBAR);
        let n_ch = state.n_channels();
        let n = state.grid().n_points();
        let zero = || vec![vec![Complex64::new(0.0, 0.0); n]; n_ch];

        let mut prev: Vec<Vec<Complex64>> = state.channels().to_vec();
        let mut cur = zero();
        let mut next = zero();
        let mut acc = zero();
        let mut hpsi = zero();

        let apply_norm = |input: &[Vec<Complex64>], out: &mut [Vec<Complex64>], tmp: &mut [Vec<Complex64>]| {
            h.apply(&coupling, input, tmp);
            let inv = 1.0 / self.half_width;
            for (a, o) in out.iter_mut().enumerate() {
                for i in 0..n {
                    o[i] = (tmp[a][i] - input[a][i] * self.center) * inv;
                }
            }
        };

        for (a, ch) in acc.iter_mut().enumerate() {
            for i in 0..n {
                ch[i] = prev[a][i] * coefs[0];
            }
        }
        if coefs.len() > 1 {
            apply_norm(&prev, &mut cur, &mut hpsi);
            accumulate(&mut acc, &cur, coefs[1]);
            for &c in &coefs[2..] {
                apply_norm(&cur, &mut next, &mut hpsi);
                for a in 0..n_ch {
                    for i in 0..n {
                        next[a][i] = next[a][i] * 2.0 - prev[a][i];
                    }
                }
                accumulate(&mut acc, &next, c);
                std::mem::swap(&mut prev, &mut cur);
                std::mem::swap(&mut cur, &mut next);
            }
        }
        let global = Complex64::from_polar(1.0, -self.center * dt / HBAR);
        for (dst, src) in state.channels_mut().iter_mut().zip(&acc) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d = s * global;
            }
        }
        state.set_time(t + dt);
        Ok(())
    }

    /// Propagates from t0 to t1 with steps of (at most) dt, keeping every
    /// `stride`-th state including the initial one.
    pub fn propagate(
        &self,
        initial: &BipartiteState,
        t0: f64,
        t1: f64,
        dt: f64,
        stride: usize,
    ) -> Result<Trajectory> {
        let steps = step_count(t0, t1, dt)?;
        let stride = stride.max(1);
        let h = if steps == 0 { 0.0 } else { (t1 - t0) / steps as f64 };
        let mut state = initial.clone();
        state.set_time(t0);
        let norm0 = state.total_norm();
        let mut traj = Trajectory::default();
        traj.push(state.clone());
        for k in 0..steps {
            let t = t0 + k as f64 * h;
            self.step(&mut state, t, h)?;
            state.set_time(t0 + (k + 1) as f64 * h);
            let norm = state.total_norm();
            if (norm - norm0).abs() > NORM_DRIFT_LIMIT {
                return Err(Error::NormDrift {
                    norm,
                    time: state.time(),
                });
            }
            if (k + 1) % stride == 0 {
                traj.push(state.clone());
            }
        }
        Ok(traj)
    }
}

fn accumulate(acc: &mut [Vec<Complex64>], term: &[Vec<Complex64>], c: Complex64) {
    for (a, t) in acc.iter_mut().zip(term) {
        for (x, y) in a.iter_mut().zip(t) {
            *x += y * c;
        }
    }
}

/// Number of equal steps no longer than dt covering [t0, t1].
pub fn step_count(t0: f64, t1: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) {
        return Err(Error::InvalidState(format!("time step must be positive (got {dt})")));
    }
    if !(t1 >= t0) {
        return Err(Error::InvalidState(format!("t1 = {t1} precedes t0 = {t0}")));
    }
    let ratio = (t1 - t0) / dt;
    let rounded = ratio.round();
    Ok(if (ratio - rounded).abs() < 1e-9 * ratio.max(1.0) {
        rounded as usize
    } else {
        ratio.ceil() as usize
    })
}

/// Convenience wrapper: build the default propagator and run it.
pub fn propagate(
    hamiltonian: &CoupledHamiltonian,
    initial: &BipartiteState,
    t0: f64,
    t1: f64,
    dt: f64,
    snapshot_stride: usize,
) -> Result<Trajectory> {
    ChebyshevPropagator::new(hamiltonian).propagate(initial, t0, t1, dt, snapshot_stride)
}
