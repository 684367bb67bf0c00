//! Fully-connected tanh controllers over a flat parameter vector.
//!
//! Parameters are stored layer by layer. Each layer contributes its weight
//! matrix of shape `(n_out, n_in)` in row-major order (row `j` holds the
//! weights feeding output unit `j`), followed by its `n_out` biases. Every
//! layer, the last one included, applies `tanh`, so raw outputs live in
//! `(-1, 1)` before they are scaled onto the actuator box.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dynamics::{ActuatorLimits, Control};
use crate::error::{Error, Result};

/// Standard deviation of the Gaussian used for fresh parameters.
pub const INIT_STD: f64 = 0.001;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MlpSpec {
    layer_sizes: Vec<usize>,
}

impl MlpSpec {
    pub fn new(layer_sizes: impl Into<Vec<usize>>) -> Result<Self> {
        let layer_sizes = layer_sizes.into();
        if layer_sizes.len() < 2 {
            return Err(Error::Config(format!(
                "network needs at least an input and an output layer, got {layer_sizes:?}"
            )));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::Config(format!(
                "layer sizes must be positive, got {layer_sizes:?}"
            )));
        }
        Ok(Self { layer_sizes })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn param_count(&self) -> usize {
        param_count(self)
    }

    fn widest(&self) -> usize {
        self.layer_sizes.iter().copied().max().unwrap_or(0)
    }
}

/// Number of weights and biases: `sum(n_in * n_out + n_out)` over layer pairs.
pub fn param_count(spec: &MlpSpec) -> usize {
    spec.layer_sizes
        .windows(2)
        .map(|w| w[0] * w[1] + w[1])
        .sum()
}

/// Flat parameter vector in the canonical order described in the module docs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(pub Vec<f64>);

impl ParamVector {
    pub fn zeros(spec: &MlpSpec) -> Self {
        Self(vec![0.0; spec.param_count()])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn check(&self, spec: &MlpSpec) -> Result<()> {
        let expected = spec.param_count();
        if self.len() != expected {
            return Err(Error::Dimension {
                expected: format!("{expected} parameters for {:?}", spec.layer_sizes()),
                actual: format!("{} parameters", self.len()),
            });
        }
        Ok(())
    }

    /// Borrowed per-layer views.
    pub fn layers<'a>(&'a self, spec: &MlpSpec) -> Result<Vec<LayerView<'a>>> {
        self.check(spec)?;
        let mut rest = self.0.as_slice();
        let mut out = Vec::with_capacity(spec.layer_sizes.len() - 1);
        for w in spec.layer_sizes.windows(2) {
            let (n_in, n_out) = (w[0], w[1]);
            let (weights, tail) = rest.split_at(n_in * n_out);
            let (biases, tail) = tail.split_at(n_out);
            out.push(LayerView {
                n_in,
                n_out,
                weights,
                biases,
            });
            rest = tail;
        }
        Ok(out)
    }

    /// Inverse of [`ParamVector::layers`].
    pub fn from_layers(layers: &[LayerView<'_>]) -> Self {
        let mut v = Vec::with_capacity(
            layers
                .iter()
                .map(|l| l.weights.len() + l.biases.len())
                .sum(),
        );
        for l in layers {
            v.extend_from_slice(l.weights);
            v.extend_from_slice(l.biases);
        }
        Self(v)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LayerView<'a> {
    pub n_in: usize,
    pub n_out: usize,
    /// Row-major `(n_out, n_in)`.
    pub weights: &'a [f64],
    pub biases: &'a [f64],
}

/// Independent `N(0, INIT_STD^2)` draws for every parameter.
pub fn init_params<R: Rng + ?Sized>(spec: &MlpSpec, rng: &mut R) -> ParamVector {
    let normal = Normal::new(0.0, INIT_STD).expect("finite std");
    ParamVector(
        (0..spec.param_count())
            .map(|_| normal.sample(rng))
            .collect(),
    )
}

/// `theta + sigma * zeta` with `zeta ~ N(0, I)`.
pub fn perturb<R: Rng + ?Sized>(theta: &ParamVector, sigma: f64, rng: &mut R) -> ParamVector {
    ParamVector(
        theta
            .0
            .iter()
            .map(|&w| {
                let z: f64 = StandardNormal.sample(rng);
                w + sigma * z
            })
            .collect(),
    )
}

/// Something that maps a feature vector to raw outputs in `[-1, 1]`.
pub trait Policy {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn act(&mut self, features: &[f64], out: &mut [f64]);
    /// Clears any recurrent state before a new episode. Feed-forward
    /// policies have none.
    fn reset_state(&mut self) {}
}

/// Forward evaluator with reusable scratch buffers.
pub struct Mlp<'a> {
    spec: &'a MlpSpec,
    theta: &'a [f64],
    cur: Vec<f64>,
    next: Vec<f64>,
}

impl<'a> Mlp<'a> {
    pub fn new(spec: &'a MlpSpec, theta: &'a ParamVector) -> Result<Self> {
        theta.check(spec)?;
        Ok(Self {
            spec,
            theta: theta.as_slice(),
            cur: Vec::with_capacity(spec.widest()),
            next: Vec::with_capacity(spec.widest()),
        })
    }

    pub fn spec(&self) -> &MlpSpec {
        self.spec
    }

    fn eval(&mut self, input: &[f64], out: &mut [f64]) {
        self.cur.clear();
        self.cur.extend_from_slice(input);
        let mut offset = 0;
        for w in self.spec.layer_sizes.windows(2) {
            let (n_in, n_out) = (w[0], w[1]);
            let weights = &self.theta[offset..offset + n_in * n_out];
            let biases = &self.theta[offset + n_in * n_out..offset + n_in * n_out + n_out];
            offset += n_in * n_out + n_out;
            self.next.clear();
            for (row, &b) in weights.chunks_exact(n_in).zip(biases) {
                let z = dot(row, &self.cur) + b;
                self.next.push(z.tanh());
            }
            std::mem::swap(&mut self.cur, &mut self.next);
        }
        out.copy_from_slice(&self.cur);
    }
}

/// Dot product with four independent accumulators so the loop vectorizes.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

impl Policy for Mlp<'_> {
    fn input_dim(&self) -> usize {
        self.spec.input_dim()
    }

    fn output_dim(&self) -> usize {
        self.spec.output_dim()
    }

    fn act(&mut self, features: &[f64], out: &mut [f64]) {
        debug_assert_eq!(features.len(), self.input_dim());
        debug_assert_eq!(out.len(), self.output_dim());
        self.eval(features, out);
    }
}

/// One-shot forward pass.
pub fn forward(theta: &ParamVector, spec: &MlpSpec, input: &[f64]) -> Result<Vec<f64>> {
    if input.len() != spec.input_dim() {
        return Err(Error::Dimension {
            expected: format!("{} input features", spec.input_dim()),
            actual: format!("{} features", input.len()),
        });
    }
    let mut mlp = Mlp::new(spec, theta)?;
    let mut out = vec![0.0; spec.output_dim()];
    mlp.act(input, &mut out);
    Ok(out)
}

/// Maps `raw in [-1, 1]` affinely onto `[lo, hi]`.
///
/// Written around the midpoint so that negating `raw` together with the box
/// negates the result bit-for-bit; the endpoints are hit exactly.
pub fn affine_scale(raw: f64, lo: f64, hi: f64) -> f64 {
    if raw <= -1.0 {
        return lo;
    }
    if raw >= 1.0 {
        return hi;
    }
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    (mid + raw * half).clamp(lo, hi)
}

/// Intersects the admissible velocity interval with a virtual velocity box.
/// If they do not overlap the admissible point closest to the virtual box wins.
pub fn restrict_velocity(admissible: (f64, f64), virtual_box: (f64, f64)) -> (f64, f64) {
    let (rl, ru) = admissible;
    let (vl, vu) = virtual_box;
    let lo = rl.max(vl);
    let hi = ru.min(vu);
    if lo <= hi {
        (lo, hi)
    } else if ru < vl {
        (ru, ru)
    } else {
        (rl, rl)
    }
}

/// Scales raw `[v, delta]` outputs into the box admissible at this step.
pub fn scale_outputs(
    raw: [f64; 2],
    prev: Control,
    lim: &ActuatorLimits,
    vvc_box: Option<(f64, f64)>,
    ts: f64,
) -> Control {
    let mut vbox = lim.velocity_box(prev.v, ts);
    if let Some(b) = vvc_box {
        vbox = restrict_velocity(vbox, b);
    }
    let dbox = lim.steering_box(prev.delta, ts);
    Control {
        v: affine_scale(raw[0], vbox.0, vbox.1),
        delta: affine_scale(raw[1], dbox.0, dbox.1),
    }
}

/// Cart force from a single raw output, no rate limit.
pub fn scale_force(raw: f64, force_max: f64) -> f64 {
    affine_scale(raw, -force_max, force_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::clamp_controls;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn param_counts() {
        assert_eq!(param_count(&MlpSpec::new([5, 8, 2]).unwrap()), 66);
        assert_eq!(param_count(&MlpSpec::new([4, 64, 64, 2]).unwrap()), 4610);
        assert_eq!(param_count(&MlpSpec::new([1, 1]).unwrap()), 2);
    }

    #[test]
    fn spec_rejects_bad_shapes() {
        assert!(MlpSpec::new([3]).is_err());
        assert!(MlpSpec::new([3, 0, 2]).is_err());
    }

    #[test]
    fn init_statistics() {
        let spec = MlpSpec::new([1, 50_000]).unwrap(); // 100_000 params
        let theta = init_params(&spec, &mut ChaCha8Rng::seed_from_u64(3));
        let n = theta.len() as f64;
        let mean = theta.0.iter().sum::<f64>() / n;
        let std = (theta.0.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!(mean.abs() < 3.0 * INIT_STD / n.sqrt(), "mean {mean}");
        assert!((std - INIT_STD).abs() < 0.05 * INIT_STD, "std {std}");
    }

    #[test]
    fn init_is_seeded() {
        let spec = MlpSpec::new([5, 8, 2]).unwrap();
        let a = init_params(&spec, &mut ChaCha8Rng::seed_from_u64(9));
        let b = init_params(&spec, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        assert_eq!(a.len(), spec.param_count());
    }

    #[test]
    fn zero_params_give_zero_output() {
        let spec = MlpSpec::new([4, 64, 64, 2]).unwrap();
        let out = forward(&ParamVector::zeros(&spec), &spec, &[0.3, -0.2, 0.9, 1.0]).unwrap();
        assert_eq!(out, vec![0.0, 0.0]);
    }

    #[test]
    fn single_layer_closed_form() {
        let spec = MlpSpec::new([1, 1]).unwrap();
        let (w, b, u) = (0.7, -0.2, 1.3);
        let out = forward(&ParamVector(vec![w, b]), &spec, &[u]).unwrap();
        assert_eq!(out[0], (w * u + b).tanh());
    }

    #[test]
    fn weight_layout_is_row_major() {
        // [2, 2]: W = [[1, 2], [3, 4]], b = [0.5, -0.5]
        let spec = MlpSpec::new([2, 2]).unwrap();
        let theta = ParamVector(vec![1.0, 2.0, 3.0, 4.0, 0.5, -0.5]);
        let out = forward(&theta, &spec, &[0.1, 0.2]).unwrap();
        assert_eq!(out[0], (0.1f64 + 0.4 + 0.5).tanh());
        assert_eq!(out[1], (0.3f64 + 0.8 - 0.5).tanh());
    }

    #[test]
    fn forward_dimension_errors() {
        let spec = MlpSpec::new([5, 8, 2]).unwrap();
        assert!(forward(&ParamVector::zeros(&spec), &spec, &[0.0; 4]).is_err());
        assert!(forward(&ParamVector(vec![0.0; 10]), &spec, &[0.0; 5]).is_err());
    }

    #[test]
    fn scale_endpoints_and_midpoint() {
        let lim = ActuatorLimits::default();
        let prev = Control { v: 2.0, delta: 0.1 };
        let ts = 0.01;
        let (vl, vu) = lim.velocity_box(prev.v, ts);
        let (dl, du) = lim.steering_box(prev.delta, ts);
        let lo = scale_outputs([-1.0, -1.0], prev, &lim, None, ts);
        assert_eq!((lo.v, lo.delta), (vl, dl));
        let hi = scale_outputs([1.0, 1.0], prev, &lim, None, ts);
        assert_eq!((hi.v, hi.delta), (vu, du));

        let rest = Control::default();
        let sym = ActuatorLimits {
            vdot_min: -5.0,
            ..lim
        };
        let mid = scale_outputs([0.0, 0.0], rest, &sym, None, ts);
        assert_eq!((mid.v, mid.delta), (0.0, 0.0));
    }

    #[test]
    fn scale_respects_virtual_box() {
        let lim = ActuatorLimits::default();
        let prev = Control { v: 3.0, delta: 0.0 };
        // virtual box entirely below what braking can reach this step
        let a = scale_outputs([1.0, 0.0], prev, &lim, Some((0.0, 1.0)), 0.01);
        assert_eq!(a.v, 3.0 - 0.08);
        // overlapping box
        let b = scale_outputs([1.0, 0.0], prev, &lim, Some((0.0, 3.01)), 0.01);
        assert_eq!(b.v, 3.01);
    }

    #[test]
    fn zero_sigma_perturbation_is_identity() {
        let spec = MlpSpec::new([5, 8, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let theta = init_params(&spec, &mut rng);
        assert_eq!(perturb(&theta, 0.0, &mut rng), theta);
    }

    #[test]
    fn perturbation_spread_matches_sigma() {
        let spec = MlpSpec::new([1, 50_000]).unwrap();
        let theta = ParamVector::zeros(&spec);
        let p = perturb(&theta, 7.5, &mut ChaCha8Rng::seed_from_u64(4));
        let n = p.len() as f64;
        let std = (p.0.iter().map(|w| w * w).sum::<f64>() / n).sqrt();
        assert!((std - 7.5).abs() < 0.05 * 7.5, "std {std}");
        let q = perturb(&theta, 7.5, &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(p, q);
    }

    proptest! {
        #[test]
        fn outputs_are_bounded(
            seed in any::<u64>(),
            sigma in 0.0..100.0f64,
            input in proptest::collection::vec(-5.0..5.0f64, 5),
        ) {
            let spec = MlpSpec::new([5, 8, 2]).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let theta = perturb(&ParamVector::zeros(&spec), sigma, &mut rng);
            let out = forward(&theta, &spec, &input).unwrap();
            for o in out {
                prop_assert!((-1.0..=1.0).contains(&o));
            }
        }

        #[test]
        fn layer_round_trip(seed in any::<u64>(), hidden in 1usize..12) {
            let spec = MlpSpec::new([3, hidden, 4, 2]).unwrap();
            let theta = init_params(&spec, &mut ChaCha8Rng::seed_from_u64(seed));
            let layers = theta.layers(&spec).unwrap();
            prop_assert_eq!(ParamVector::from_layers(&layers), theta);
        }

        #[test]
        fn scaled_controls_are_admissible(
            rv in -1.0..=1.0f64, rd in -1.0..=1.0f64,
            pv in -10.0..10.0f64, pd in -0.69..0.69f64,
            vvc in proptest::option::of((-10.0..10.0f64, 0.0..5.0f64)),
        ) {
            let lim = ActuatorLimits::default();
            let prev = Control { v: pv, delta: pd };
            let ts = 0.01;
            let vbox = vvc.map(|(lo, w)| (lo, lo + w));
            let a = scale_outputs([rv, rd], prev, &lim, vbox, ts);
            prop_assert_eq!(clamp_controls(a, prev, &lim, ts), a);
        }

        #[test]
        fn affine_scale_is_odd(raw in -1.0..=1.0f64, lo in -5.0..0.0f64, w in 0.0..5.0f64) {
            let hi = lo + w;
            // == rather than bits: signed zeros may differ
            prop_assert!(affine_scale(-raw, -hi, -lo) == -affine_scale(raw, lo, hi));
        }
    }
}
