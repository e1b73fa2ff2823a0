//! Parametrizations of the relaxed state `p_θ`.
//!
//! [`Model`] holds every trainable tensor in one flat buffer so a single
//! optimizer instance can update it. Three architectures share the type:
//!
//! * `Direct`: `p = σ(θ)` (or a row softmax for one-hot layouts).
//! * `Gcn`: two layers of `z = Ā h W + h B`.
//! * `Sage`: two layers of `z = h W_self + Ā h W_neigh + b`.
//!
//! `Ā` is the mean over neighbours; isolated nodes aggregate to zero. Layer 1
//! uses relu, layer 2 a sigmoid (binary) or row softmax (one-hot).

use std::fmt;
use std::str::FromStr;

use ndarray::linalg::general_mat_mul;
use ndarray::{ArrayView2, ArrayViewMut2, LinalgScalar, ScalarOperand};
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, RngSeed};
use crate::optimizer::{AdamW, OptimError};
use crate::problems::Layout;

/// Floating point type the model computes in.
pub trait Real:
    Float + LinalgScalar + ScalarOperand + Default + Send + Sync + fmt::Debug + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("{what}: expected {expected}, got {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("backward called without a matching forward pass")]
    MissingCache,
    #[error("checkpoint does not match this model: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Optim(#[from] OptimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Direct,
    Gcn,
    Sage,
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Architecture::Direct => "direct",
            Architecture::Gcn => "gcn",
            Architecture::Sage => "sage",
        })
    }
}

impl FromStr for Architecture {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "direct" => Ok(Architecture::Direct),
            "gcn" | "gcv" => Ok(Architecture::Gcn),
            "sage" | "graphsage" => Ok(Architecture::Sage),
            other => Err(format!("unknown architecture `{other}` (direct, gcn, sage)")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    F64,
    F32,
}

impl FromStr for Precision {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "f64" | "64" => Ok(Precision::F64),
            "f32" | "32" => Ok(Precision::F32),
            other => Err(format!("unknown precision `{other}` (f64, f32)")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingMode {
    #[default]
    Trainable,
    /// Random node inputs that are drawn once and never updated.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub arch: Architecture,
    #[serde(default)]
    pub embedding: EmbeddingMode,
    /// Multiplies the initialization range of every weight.
    pub init_scale: f64,
    /// Overrides `(H0, H1)`; `None` uses [`hidden_dims`].
    #[serde(default)]
    pub hidden: Option<(usize, usize)>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            arch: Architecture::Sage,
            embedding: EmbeddingMode::Trainable,
            init_scale: 1.0,
            hidden: None,
        }
    }
}

/// `(H0, H1) = (int(N^0.8), int(N^0.8 / 2))`, each at least 1.
pub fn hidden_dims(num_nodes: usize) -> (usize, usize) {
    let base = (num_nodes as f64).powf(0.8);
    ((base as usize).max(1), ((base / 2.0) as usize).max(1))
}

/// Offsets of one layer's tensors inside the flat parameter buffer.
///
/// Both weight matrices live in one `fan_in × 2·fan_out` block: the first
/// `fan_out` columns multiply the neighbour mean, the rest the node itself.
/// Since `Ā` is linear, `Ā h W_agg = Ā (h W_agg)`, so one product `h [W_agg | W_self]`
/// followed by aggregation of the narrow half gives the layer.
#[derive(Debug, Clone, Copy)]
struct LayerSlots {
    fan_in: usize,
    fan_out: usize,
    w: usize,
    bias: Option<usize>,
}

impl LayerSlots {
    fn weight_len(&self) -> usize {
        2 * self.fan_in * self.fan_out
    }
}

#[derive(Debug, Clone)]
struct Gnn<F> {
    h0: usize,
    h1: usize,
    h2: usize,
    /// Offset of trainable embeddings, or `None` when they live in `fixed`.
    emb: Option<usize>,
    fixed: Vec<F>,
    l1: LayerSlots,
    l2: LayerSlots,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    inv_deg: Vec<F>,
    buf: Buffers<F>,
}

#[derive(Debug, Clone, Default)]
struct Buffers<F> {
    /// `h0 [W_agg | W_self]` of layer 1, `rows × 2·H1`.
    y1: Vec<F>,
    z1: Vec<F>,
    h1: Vec<F>,
    y2: Vec<F>,
    out: Vec<F>,
    dz2: Vec<F>,
    /// `[Āᵀ dz | dz]` for the layer being differentiated.
    g2: Vec<F>,
    dh1: Vec<F>,
    g1: Vec<F>,
    dh0: Vec<F>,
}

/// Trainable map from parameters to a relaxed state.
#[derive(Debug, Clone)]
pub struct Model<F> {
    arch: Architecture,
    layout: Layout,
    seed: RngSeed,
    params: Vec<F>,
    grads: Vec<F>,
    /// Output of the last forward pass, in the layout's order.
    p: Vec<F>,
    fresh: bool,
    gnn: Option<Gnn<F>>,
}

fn cast<F: Real>(x: f64) -> F {
    F::from(x).expect("value representable in model precision")
}

fn sigmoid<F: Real>(z: F) -> F {
    F::one() / (F::one() + (-z).exp())
}

fn softmax_rows<F: Real>(z: &[F], out: &mut [F], classes: usize) {
    for (zr, or) in z.chunks_exact(classes).zip(out.chunks_exact_mut(classes)) {
        let max = zr.iter().copied().fold(F::neg_infinity(), F::max);
        let mut sum = F::zero();
        for (o, &x) in or.iter_mut().zip(zr) {
            *o = (x - max).exp();
            sum = sum + *o;
        }
        for o in or.iter_mut() {
            *o = *o / sum;
        }
    }
}

/// Backpropagates through the output nonlinearity: `∂L/∂z` from `∂L/∂p`.
fn output_backward<F: Real>(layout: Layout, p: &[F], dp: &[f64], dz: &mut [F]) {
    match layout {
        Layout::Binary { .. } => {
            for ((d, &pi), &g) in dz.iter_mut().zip(p).zip(dp) {
                *d = cast::<F>(g) * pi * (F::one() - pi);
            }
        }
        Layout::OneHot { classes, .. } => {
            for ((dr, pr), gr) in dz
                .chunks_exact_mut(classes)
                .zip(p.chunks_exact(classes))
                .zip(dp.chunks_exact(classes))
            {
                let dot = pr
                    .iter()
                    .zip(gr)
                    .fold(F::zero(), |acc, (&a, &b)| acc + a * cast(b));
                for ((d, &pi), &g) in dr.iter_mut().zip(pr).zip(gr) {
                    *d = pi * (cast::<F>(g) - dot);
                }
            }
        }
    }
}

fn view<F>(data: &[F], rows: usize, cols: usize) -> ArrayView2<'_, F> {
    ArrayView2::from_shape((rows, cols), data).expect("buffer sized for shape")
}

fn view_mut<F>(data: &mut [F], rows: usize, cols: usize) -> ArrayViewMut2<'_, F> {
    ArrayViewMut2::from_shape((rows, cols), data).expect("buffer sized for shape")
}

/// `out[v] = Σ_{u∈N(v)} y[u][..cols] / deg(v)` where rows of `y` have `stride` entries.
fn aggregate<F: Real>(
    offsets: &[usize],
    targets: &[usize],
    scale: &[F],
    y: &[F],
    stride: usize,
    out: &mut [F],
    out_stride: usize,
    cols: usize,
) {
    for v in 0..offsets.len() - 1 {
        let row = &mut out[v * out_stride..v * out_stride + cols];
        row.fill(F::zero());
        for &u in &targets[offsets[v]..offsets[v + 1]] {
            for (o, &a) in row.iter_mut().zip(&y[u * stride..u * stride + cols]) {
                *o = *o + a;
            }
        }
        for o in row.iter_mut() {
            *o = *o * scale[v];
        }
    }
}

impl<F: Real> Model<F> {
    pub fn new(config: &ModelConfig, layout: Layout, graph: &Graph, seed: RngSeed) -> Result<Self, ModelError> {
        if graph.num_nodes() != layout.rows() {
            return Err(ModelError::DimensionMismatch {
                what: "graph nodes vs layout rows",
                expected: layout.rows(),
                found: graph.num_nodes(),
            });
        }
        let mut rng = seed.rng();
        let scale = config.init_scale;
        let n = layout.num_vars();
        let (params, gnn) = match config.arch {
            Architecture::Direct => {
                let params = (0..n).map(|_| cast(rng.random_range(-scale..=scale))).collect();
                (params, None)
            }
            Architecture::Gcn | Architecture::Sage => {
                let rows = layout.rows();
                let (h0, h1) = config.hidden.unwrap_or_else(|| hidden_dims(rows));
                let h2 = layout.classes();
                let sage = config.arch == Architecture::Sage;
                let mut next = 0;
                let mut take = |len: usize| {
                    let at = next;
                    next += len;
                    at
                };
                let emb = (config.embedding == EmbeddingMode::Trainable).then(|| take(rows * h0));
                let mut layer = |fan_in: usize, fan_out: usize| LayerSlots {
                    fan_in,
                    fan_out,
                    w: take(2 * fan_in * fan_out),
                    bias: sage.then(|| take(fan_out)),
                };
                let l1 = layer(h0, h1);
                let l2 = layer(h1, h2);
                let total = next;

                let mut params = vec![F::zero(); total];
                let emb_std = 1.0 / (h0 as f64).sqrt();
                let draw_emb = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<F> {
                    (0..rows * h0)
                        .map(|_| {
                            let z: f64 = StandardNormal.sample(rng);
                            cast(z * emb_std)
                        })
                        .collect()
                };
                let fixed = match emb {
                    Some(at) => {
                        let e = draw_emb(&mut rng);
                        params[at..at + e.len()].copy_from_slice(&e);
                        Vec::new()
                    }
                    None => draw_emb(&mut rng),
                };
                for l in [&l1, &l2] {
                    let s = scale * (6.0 / (l.fan_in + l.fan_out) as f64).sqrt();
                    for w in &mut params[l.w..l.w + l.weight_len()] {
                        *w = cast(rng.random_range(-s..=s));
                    }
                }

                let inv_deg = (0..rows)
                    .map(|v| match graph.degree(v) {
                        0 => F::zero(),
                        d => cast(1.0 / d as f64),
                    })
                    .collect();
                let z = |c: usize| vec![F::zero(); rows * c];
                let buf = Buffers {
                    y1: z(2 * h1),
                    z1: z(h1),
                    h1: z(h1),
                    y2: z(2 * h2),
                    out: z(h2),
                    dz2: z(h2),
                    g2: z(2 * h2),
                    dh1: z(h1),
                    g1: z(2 * h1),
                    dh0: if emb.is_some() { z(h0) } else { Vec::new() },
                };
                let gnn = Gnn {
                    h0,
                    h1,
                    h2,
                    emb,
                    fixed,
                    l1,
                    l2,
                    offsets: graph.offsets().to_vec(),
                    targets: (0..rows).flat_map(|v| graph.neighbors(v).iter().copied()).collect(),
                    inv_deg,
                    buf,
                };
                (params, Some(gnn))
            }
        };
        let num_params = params.len();
        Ok(Model {
            arch: config.arch,
            layout,
            seed,
            params,
            grads: vec![F::zero(); num_params],
            p: vec![F::zero(); n],
            fresh: false,
            gnn,
        })
    }

    pub fn arch(&self) -> Architecture {
        self.arch
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    /// `(H0, H1, H2)` for graph networks.
    pub fn dims(&self) -> Option<(usize, usize, usize)> {
        self.gnn.as_ref().map(|g| (g.h0, g.h1, g.h2))
    }

    pub fn params(&self) -> &[F] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [F] {
        self.fresh = false;
        &mut self.params
    }

    pub fn grads(&self) -> &[F] {
        &self.grads
    }

    /// Computes `p_θ`, caches the activations and writes `p` into `out`.
    pub fn forward_into(&mut self, out: &mut [f64]) -> Result<(), ModelError> {
        let n = self.layout.num_vars();
        if out.len() != n {
            return Err(ModelError::DimensionMismatch {
                what: "output length",
                expected: n,
                found: out.len(),
            });
        }
        match &mut self.gnn {
            None => match self.layout {
                Layout::Binary { .. } => {
                    for (p, &t) in self.p.iter_mut().zip(&self.params) {
                        *p = sigmoid(t);
                    }
                }
                Layout::OneHot { classes, .. } => softmax_rows(&self.params, &mut self.p, classes),
            },
            Some(g) => g.forward(&self.params, self.layout, &mut self.p),
        }
        for (o, &p) in out.iter_mut().zip(&self.p) {
            *o = p.to_f64().unwrap_or(f64::NAN);
        }
        self.fresh = true;
        Ok(())
    }

    pub fn forward(&mut self) -> Result<Vec<f64>, ModelError> {
        let mut out = vec![0.0; self.layout.num_vars()];
        self.forward_into(&mut out)?;
        Ok(out)
    }

    /// Fills [`Model::grads`] with `∂L/∂θ` given `dp = ∂L/∂p` at the last forward pass.
    pub fn backward(&mut self, dp: &[f64]) -> Result<(), ModelError> {
        if !self.fresh {
            return Err(ModelError::MissingCache);
        }
        let n = self.layout.num_vars();
        if dp.len() != n {
            return Err(ModelError::DimensionMismatch {
                what: "upstream gradient length",
                expected: n,
                found: dp.len(),
            });
        }
        match &mut self.gnn {
            None => output_backward(self.layout, &self.p, dp, &mut self.grads),
            Some(g) => g.backward(&self.params, self.layout, &self.p, dp, &mut self.grads),
        }
        Ok(())
    }

    /// Applies one optimizer update using the current gradients.
    pub fn step(&mut self, opt: &mut AdamW<F>) -> Result<(), ModelError> {
        opt.step(&mut self.params, &self.grads)?;
        self.fresh = false;
        Ok(())
    }

    pub fn checkpoint(&self) -> Checkpoint {
        let to64 = |v: &[F]| v.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
        Checkpoint {
            version: Checkpoint::VERSION,
            arch: self.arch,
            layout: self.layout,
            dims: self.dims(),
            seed: self.seed,
            params: to64(&self.params),
            fixed_embedding: self.gnn.as_ref().map(|g| to64(&g.fixed)).unwrap_or_default(),
        }
    }

    /// Loads tensors saved by [`Model::checkpoint`] into a model of the same shape.
    pub fn restore(&mut self, ck: &Checkpoint) -> Result<(), ModelError> {
        if ck.version != Checkpoint::VERSION {
            return Err(ModelError::Checkpoint(format!("unsupported version {}", ck.version)));
        }
        if ck.arch != self.arch || ck.layout != self.layout || ck.dims != self.dims() {
            return Err(ModelError::Checkpoint("architecture or dimensions differ".into()));
        }
        if ck.params.len() != self.params.len() {
            return Err(ModelError::Checkpoint("parameter count differs".into()));
        }
        for (p, &x) in self.params.iter_mut().zip(&ck.params) {
            *p = cast(x);
        }
        if let Some(g) = &mut self.gnn {
            if ck.fixed_embedding.len() != g.fixed.len() {
                return Err(ModelError::Checkpoint("fixed embedding size differs".into()));
            }
            for (p, &x) in g.fixed.iter_mut().zip(&ck.fixed_embedding) {
                *p = cast(x);
            }
        }
        self.seed = ck.seed;
        self.fresh = false;
        Ok(())
    }
}

impl<F: Real> Gnn<F> {
    fn rows(&self) -> usize {
        self.offsets.len() - 1
    }

    fn embeddings<'a>(&'a self, params: &'a [F]) -> &'a [F] {
        match self.emb {
            Some(at) => &params[at..at + self.rows() * self.h0],
            None => &self.fixed,
        }
    }

    /// `z = Ā (x W_agg) + x W_self (+ b)`, using `y` as scratch.
    fn layer_forward(&self, params: &[F], l: &LayerSlots, x: &[F], y: &mut [F], z: &mut [F]) {
        let rows = self.rows();
        let (i, o) = (l.fan_in, l.fan_out);
        general_mat_mul(
            F::one(),
            &view(x, rows, i),
            &view(&params[l.w..l.w + l.weight_len()], i, 2 * o),
            F::zero(),
            &mut view_mut(y, rows, 2 * o),
        );
        aggregate(&self.offsets, &self.targets, &self.inv_deg, y, 2 * o, z, o, o);
        let zero = vec![F::zero(); o];
        let bias = l.bias.map_or(&zero[..], |b| &params[b..b + o]);
        for v in 0..rows {
            let own = &y[v * 2 * o + o..(v + 1) * 2 * o];
            for ((zv, &s), &b) in z[v * o..(v + 1) * o].iter_mut().zip(own).zip(bias) {
                *zv = *zv + s + b;
            }
        }
    }

    /// Writes weight (and bias) gradients of one layer and, if asked, `∂L/∂x`.
    #[allow(clippy::too_many_arguments)]
    fn layer_backward(
        &self,
        params: &[F],
        grads: &mut [F],
        l: &LayerSlots,
        x: &[F],
        dz: &[F],
        g: &mut [F],
        dx: Option<&mut [F]>,
    ) {
        let rows = self.rows();
        let (i, o) = (l.fan_in, l.fan_out);
        // g = [Āᵀ dz | dz]; Āᵀ dz [u] = Σ_{v∈N(u)} dz[v] / deg(v) on a symmetric graph
        for u in 0..rows {
            let row = &mut g[u * 2 * o..(u + 1) * 2 * o];
            let (agg, own) = row.split_at_mut(o);
            agg.fill(F::zero());
            for &v in &self.targets[self.offsets[u]..self.offsets[u + 1]] {
                let s = self.inv_deg[v];
                for (a, &d) in agg.iter_mut().zip(&dz[v * o..(v + 1) * o]) {
                    *a = *a + d * s;
                }
            }
            own.copy_from_slice(&dz[u * o..(u + 1) * o]);
        }
        let gv = view(g, rows, 2 * o);
        general_mat_mul(
            F::one(),
            &view(x, rows, i).t(),
            &gv,
            F::zero(),
            &mut view_mut(&mut grads[l.w..l.w + l.weight_len()], i, 2 * o),
        );
        if let Some(b) = l.bias {
            let gb = &mut grads[b..b + o];
            gb.fill(F::zero());
            for row in dz.chunks_exact(o) {
                for (g, &d) in gb.iter_mut().zip(row) {
                    *g = *g + d;
                }
            }
        }
        if let Some(dx) = dx {
            general_mat_mul(
                F::one(),
                &gv,
                &view(&params[l.w..l.w + l.weight_len()], i, 2 * o).t(),
                F::zero(),
                &mut view_mut(dx, rows, i),
            );
        }
    }

    fn forward(&mut self, params: &[F], layout: Layout, p: &mut [F]) {
        let mut buf = std::mem::take(&mut self.buf);
        self.layer_forward(params, &self.l1, self.embeddings(params), &mut buf.y1, &mut buf.z1);
        for (h, &z) in buf.h1.iter_mut().zip(&buf.z1) {
            *h = z.max(F::zero());
        }
        self.layer_forward(params, &self.l2, &buf.h1, &mut buf.y2, &mut buf.out);
        match layout {
            Layout::Binary { .. } => {
                for (pi, &z) in p.iter_mut().zip(&buf.out) {
                    *pi = sigmoid(z);
                }
            }
            Layout::OneHot { classes, .. } => softmax_rows(&buf.out, p, classes),
        }
        self.buf = buf;
    }

    fn backward(&mut self, params: &[F], layout: Layout, p: &[F], dp: &[f64], grads: &mut [F]) {
        let mut buf = std::mem::take(&mut self.buf);
        output_backward(layout, p, dp, &mut buf.dz2);
        self.layer_backward(params, grads, &self.l2, &buf.h1, &buf.dz2, &mut buf.g2, Some(&mut buf.dh1));
        // relu mask turns dh1 into dz1
        for (d, &z) in buf.dh1.iter_mut().zip(&buf.z1) {
            if z <= F::zero() {
                *d = F::zero();
            }
        }
        let h0 = self.embeddings(params);
        match self.emb {
            Some(at) => {
                self.layer_backward(params, grads, &self.l1, h0, &buf.dh1, &mut buf.g1, Some(&mut buf.dh0));
                grads[at..at + buf.dh0.len()].copy_from_slice(&buf.dh0);
            }
            None => self.layer_backward(params, grads, &self.l1, h0, &buf.dh1, &mut buf.g1, None),
        }
        self.buf = buf;
    }
}

/// Serialized parameters, always stored in 64-bit floats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub arch: Architecture,
    pub layout: Layout,
    pub dims: Option<(usize, usize, usize)>,
    pub seed: RngSeed,
    pub params: Vec<f64>,
    #[serde(default)]
    pub fixed_embedding: Vec<f64>,
}

impl Checkpoint {
    pub const VERSION: u32 = 1;
}
