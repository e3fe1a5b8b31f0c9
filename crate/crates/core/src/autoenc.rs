//! Compression/reconstruction embedding: a single sigmoid coding layer
//! trained by full-batch gradient descent on the regularized mean
//! reconstruction error, with backpropagated gradients.

use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::{axpy, dot, Matrix};
use crate::error::{Error, Result};
use crate::scalar::{sigmoid_scalar, Scalar};

pub use crate::scalar::sigmoid;

pub const DEFAULT_LAMBDA: f64 = 0.1;
pub const DEFAULT_CODE_LENGTH: usize = 100;
pub const DEFAULT_MAX_ITERS: usize = 100;
pub const DEFAULT_SIGMA: f64 = 0.1;
pub const DEFAULT_TOL: f64 = 1e-6;

/// Coding-function parameters: compression weights/biases and reconstruction
/// weights/biases. Code length l is strictly smaller than input length k.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel<F> {
    wc: Matrix<F>, // l x k
    bc: Vec<F>,    // l
    wr: Matrix<F>, // k x l
    br: Vec<F>,    // k
    lambda: F,
}

/// Gradient bundle shaped like the model parameters.
#[derive(Debug, Clone)]
pub struct Gradients<F> {
    pub wc: Matrix<F>,
    pub bc: Vec<F>,
    pub wr: Matrix<F>,
    pub br: Vec<F>,
}

/// Gradient-descent settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    /// Learning rate.
    pub sigma: f64,
    pub max_iters: usize,
    /// Relative loss-change stopping threshold.
    pub tol: f64,
    pub seed: u64,
    /// Half-range for uniform weight init; None picks sqrt(6/(k+l)).
    pub init_scale: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            sigma: DEFAULT_SIGMA,
            max_iters: DEFAULT_MAX_ITERS,
            tol: DEFAULT_TOL,
            seed: 42,
            init_scale: None,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !self.sigma.is_finite() || self.sigma <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if self.max_iters < 1 {
            return Err(Error::InvalidParameter("max_iters must be >= 1".into()));
        }
        if self.tol < 0.0 || self.tol.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "tol must be >= 0, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

/// Model plus the loss recorded before training and after every iteration.
#[derive(Debug, Clone)]
pub struct Trained<F> {
    pub model: EmbeddingModel<F>,
    pub loss_trace: Vec<F>,
}

fn check_dims(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch {
            what,
            expected,
            got,
        });
    }
    Ok(())
}

impl<F: Scalar> EmbeddingModel<F> {
    pub fn from_parts(wc: Matrix<F>, bc: Vec<F>, wr: Matrix<F>, br: Vec<F>, lambda: F) -> Result<Self> {
        let l = wc.rows();
        let k = wc.cols();
        if l >= k {
            return Err(Error::InvalidParameter(format!(
                "code length {l} must be smaller than input length {k}"
            )));
        }
        check_dims("bc length", l, bc.len())?;
        check_dims("wr rows", k, wr.rows())?;
        check_dims("wr cols", l, wr.cols())?;
        check_dims("br length", k, br.len())?;
        Ok(EmbeddingModel {
            wc,
            bc,
            wr,
            br,
            lambda,
        })
    }

    /// Zero-initialized model (useful for tests and as a FD baseline).
    pub fn zeros(k: usize, l: usize, lambda: F) -> Result<Self> {
        Self::from_parts(
            Matrix::zeros(l, k),
            vec![F::zero(); l],
            Matrix::zeros(k, l),
            vec![F::zero(); k],
            lambda,
        )
    }

    /// Seeded uniform init in [-r, r].
    pub fn init_seeded(k: usize, l: usize, lambda: F, seed: u64, init_scale: Option<f64>) -> Result<Self> {
        let r = init_scale.unwrap_or_else(|| (6.0 / (k + l) as f64).sqrt());
        if !r.is_finite() || r <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "init_scale must be positive and finite, got {r}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |len: usize| -> Vec<F> {
            (0..len)
                .map(|_| F::from_f64_lossy(r * (2.0 * rng.gen::<f64>() - 1.0)))
                .collect()
        };
        let wc = Matrix::from_vec(l, k, draw(l * k))?;
        let bc = draw(l);
        let wr = Matrix::from_vec(k, l, draw(k * l))?;
        let br = draw(k);
        Self::from_parts(wc, bc, wr, br, lambda)
    }

    pub fn k(&self) -> usize {
        self.wc.cols()
    }

    pub fn l(&self) -> usize {
        self.wc.rows()
    }

    pub fn lambda(&self) -> F {
        self.lambda
    }

    pub fn wc(&self) -> &Matrix<F> {
        &self.wc
    }

    pub fn bc(&self) -> &[F] {
        &self.bc
    }

    pub fn wr(&self) -> &Matrix<F> {
        &self.wr
    }

    pub fn br(&self) -> &[F] {
        &self.br
    }

    /// Compression: code = f(Wc e + bc), in (0,1)^l.
    pub fn compress(&self, e: &[F]) -> Result<Vec<F>> {
        check_dims("input length", self.k(), e.len())?;
        let mut z = self.wc.matvec(e);
        for (zi, &b) in z.iter_mut().zip(self.bc.iter()) {
            *zi = sigmoid_scalar(*zi + b);
        }
        Ok(z)
    }

    /// Reconstruction: f(Wr code + br), in (0,1)^k.
    pub fn reconstruct(&self, alpha: &[F]) -> Result<Vec<F>> {
        check_dims("code length", self.l(), alpha.len())?;
        let mut z = self.wr.matvec(alpha);
        for (zi, &b) in z.iter_mut().zip(self.br.iter()) {
            *zi = sigmoid_scalar(*zi + b);
        }
        Ok(z)
    }

    /// Mean reconstruction error plus the Frobenius regularizer
    /// (lambda/2)(|Wc|^2 + |Wr|^2); biases are not penalized.
    pub fn loss(&self, data: &Matrix<F>) -> Result<F> {
        self.check_data(data)?;
        let mut total = F::zero();
        for row in data.iter_rows() {
            let alpha = self.compress(row)?;
            let beta = self.reconstruct(&alpha)?;
            let mut err = F::zero();
            for (&b, &e) in beta.iter().zip(row.iter()) {
                let d = b - e;
                err += d * d;
            }
            total += err * F::from_f64_lossy(0.5);
        }
        let m = F::from_usize_lossy(data.rows());
        let reg = self.lambda * F::from_f64_lossy(0.5)
            * (self.wc.frobenius_sq() + self.wr.frobenius_sq());
        Ok(total / m + reg)
    }

    /// Backpropagated gradients of the loss: data terms averaged over the
    /// dataset plus lambda*W on the weight matrices.
    pub fn gradients(&self, data: &Matrix<F>) -> Result<Gradients<F>> {
        Ok(self.gradients_counted(data)?.0)
    }

    /// Like `gradients`, also returning the number of multiply-accumulate
    /// operations performed by the pass (for complexity checks).
    pub fn gradients_counted(&self, data: &Matrix<F>) -> Result<(Gradients<F>, u64)> {
        self.check_data(data)?;
        let (k, l) = (self.k(), self.l());
        let mut g = Gradients {
            wc: Matrix::zeros(l, k),
            bc: vec![F::zero(); l],
            wr: Matrix::zeros(k, l),
            br: vec![F::zero(); k],
        };
        let mut ops: u64 = 0;
        let mut alpha = vec![F::zero(); l];
        let mut beta = vec![F::zero(); k];
        let mut delta2 = vec![F::zero(); k];
        let mut delta1 = vec![F::zero(); l];

        for e in data.iter_rows() {
            // forward
            for i in 0..l {
                alpha[i] = sigmoid_scalar(dot(self.wc.row(i), e) + self.bc[i]);
            }
            for j in 0..k {
                beta[j] = sigmoid_scalar(dot(self.wr.row(j), &alpha) + self.br[j]);
            }
            // output delta: (beta - e) .* beta .* (1 - beta)
            for j in 0..k {
                delta2[j] = (beta[j] - e[j]) * beta[j] * (F::one() - beta[j]);
            }
            // reconstruction-side gradients and backpropagated code delta
            delta1.iter_mut().for_each(|d| *d = F::zero());
            for j in 0..k {
                axpy(delta2[j], &alpha, g.wr.row_mut(j));
                axpy(delta2[j], self.wr.row(j), &mut delta1);
                g.br[j] += delta2[j];
            }
            for i in 0..l {
                delta1[i] = delta1[i] * alpha[i] * (F::one() - alpha[i]);
            }
            // compression-side gradients
            for i in 0..l {
                axpy(delta1[i], e, g.wc.row_mut(i));
                g.bc[i] += delta1[i];
            }
            ops += (5 * k * l + 3 * k + 3 * l) as u64;
        }

        let inv_m = F::one() / F::from_usize_lossy(data.rows());
        for v in [&mut g.bc, &mut g.br] {
            for x in v.iter_mut() {
                *x *= inv_m;
            }
        }
        // average the data terms, then add the regularizer derivative
        let finish = |gw: &mut Matrix<F>, w: &Matrix<F>| {
            for i in 0..gw.rows() {
                let row = gw.row_mut(i);
                for x in row.iter_mut() {
                    *x *= inv_m;
                }
                axpy(self.lambda, w.row(i), row);
            }
        };
        finish(&mut g.wc, &self.wc);
        finish(&mut g.wr, &self.wr);
        ops += (2 * k * l) as u64;
        Ok((g, ops))
    }

    /// Row-wise compression of a dataset: the metric embedding.
    pub fn embed(&self, data: &Matrix<F>) -> Result<Matrix<F>> {
        self.check_data(data)?;
        let mut out = Matrix::zeros(data.rows(), self.l());
        for (r, row) in data.iter_rows().enumerate() {
            let alpha = self.compress(row)?;
            out.row_mut(r).copy_from_slice(&alpha);
        }
        Ok(out)
    }

    fn check_data(&self, data: &Matrix<F>) -> Result<()> {
        if data.rows() == 0 {
            return Err(Error::EmptyInput("dataset"));
        }
        check_dims("dataset row length", self.k(), data.cols())
    }

    fn step(&mut self, g: &Gradients<F>, sigma: F) {
        self.wc.scaled_add(-sigma, &g.wc);
        self.wr.scaled_add(-sigma, &g.wr);
        for (b, &d) in self.bc.iter_mut().zip(g.bc.iter()) {
            *b -= sigma * d;
        }
        for (b, &d) in self.br.iter_mut().zip(g.br.iter()) {
            *b -= sigma * d;
        }
    }
}

/// Clamp a requested code length below the input length.
pub fn clamp_code_length(l: usize, k: usize) -> usize {
    l.min(k.saturating_sub(1)).max(1)
}

/// Full-batch gradient descent on the reconstruction loss. Deterministic for
/// a given seed; stops on `max_iters` or when the relative loss change drops
/// below `tol`.
pub fn train<F: Scalar>(
    data: &Matrix<F>,
    l: usize,
    lambda: F,
    cfg: &TrainConfig,
) -> Result<Trained<F>> {
    cfg.validate()?;
    if data.rows() == 0 {
        return Err(Error::EmptyInput("dataset"));
    }
    let k = data.cols();
    if l >= k || l == 0 {
        return Err(Error::InvalidParameter(format!(
            "code length {l} must satisfy 0 < l < k={k}"
        )));
    }
    let mut model = EmbeddingModel::init_seeded(k, l, lambda, cfg.seed, cfg.init_scale)?;
    let sigma = F::from_f64_lossy(cfg.sigma);
    let mut trace = Vec::with_capacity(cfg.max_iters + 1);
    let mut prev = model.loss(data)?;
    trace.push(prev);
    for iteration in 1..=cfg.max_iters {
        let g = model.gradients(data)?;
        model.step(&g, sigma);
        let j = model.loss(data)?;
        trace.push(j);
        if !j.is_finite() {
            return Err(Error::Diverged { iteration });
        }
        let denom = prev.abs().max(F::from_f64_lossy(1e-12));
        if ((prev - j).abs() / denom).to_f64_lossy() < cfg.tol {
            break;
        }
        prev = j;
    }
    Ok(Trained {
        model,
        loss_trace: trace,
    })
}

const MODEL_HEADER: &str = "dylink2vec-model v1";

fn write_vec<F: Scalar, W: Write>(w: &mut W, v: &[F]) -> Result<()> {
    let mut first = true;
    for x in v {
        if !first {
            write!(w, " ")?;
        }
        write!(w, "{x:.16e}")?;
        first = false;
    }
    writeln!(w)?;
    Ok(())
}

/// Save a model as versioned text with 17 significant digits per value
/// (lossless for f64).
pub fn write_model<F: Scalar, W: Write>(model: &EmbeddingModel<F>, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "{MODEL_HEADER}")?;
    writeln!(w, "{} {} {:.16e}", model.k(), model.l(), model.lambda())?;
    for i in 0..model.l() {
        write_vec(&mut w, model.wc.row(i))?;
    }
    write_vec(&mut w, &model.bc)?;
    for j in 0..model.k() {
        write_vec(&mut w, model.wr.row(j))?;
    }
    write_vec(&mut w, &model.br)?;
    w.flush()?;
    Ok(())
}

pub fn write_model_file<F: Scalar>(model: &EmbeddingModel<F>, path: &Path) -> Result<()> {
    write_model(model, std::fs::File::create(path)?)
}

pub fn read_model<F: Scalar, R: BufRead>(reader: R) -> Result<EmbeddingModel<F>> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or(Error::Format("missing model header".into()))??;
    if header.trim() != MODEL_HEADER {
        return Err(Error::Format(format!(
            "bad model header `{header}`, expected `{MODEL_HEADER}`"
        )));
    }
    let dims = lines
        .next()
        .ok_or(Error::Format("missing dims line".into()))??;
    let mut it = dims.split_whitespace();
    let (k, l, lambda): (usize, usize, f64) = match (it.next(), it.next(), it.next()) {
        (Some(a), Some(b), Some(c)) => (
            a.parse().map_err(|e| Error::Format(format!("bad k: {e}")))?,
            b.parse().map_err(|e| Error::Format(format!("bad l: {e}")))?,
            c.parse()
                .map_err(|e| Error::Format(format!("bad lambda: {e}")))?,
        ),
        _ => return Err(Error::Format("dims line must be `k l lambda`".into())),
    };
    let mut parse_vec = |expected: usize, what: &str| -> Result<Vec<F>> {
        let line = lines
            .next()
            .ok_or_else(|| Error::Format(format!("missing {what} line")))??;
        let vals = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map(F::from_f64_lossy)
                    .map_err(|e| Error::Format(format!("bad value in {what}: {e}")))
            })
            .collect::<Result<Vec<F>>>()?;
        if vals.len() != expected {
            return Err(Error::Format(format!(
                "{what}: expected {expected} values, got {}",
                vals.len()
            )));
        }
        Ok(vals)
    };
    let mut wc_rows = Vec::with_capacity(l);
    for _ in 0..l {
        wc_rows.push(parse_vec(k, "compression weight row")?);
    }
    let bc = parse_vec(l, "compression bias")?;
    let mut wr_rows = Vec::with_capacity(k);
    for _ in 0..k {
        wr_rows.push(parse_vec(l, "reconstruction weight row")?);
    }
    let br = parse_vec(k, "reconstruction bias")?;
    EmbeddingModel::from_parts(
        Matrix::from_rows(wc_rows)?,
        bc,
        Matrix::from_rows(wr_rows)?,
        br,
        F::from_f64_lossy(lambda),
    )
}

pub fn read_model_file<F: Scalar>(path: &Path) -> Result<EmbeddingModel<F>> {
    read_model(std::io::BufReader::new(std::fs::File::open(path)?))
}
