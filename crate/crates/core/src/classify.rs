//! Supervised scoring of embedded node-pairs: AdaBoost.M1 over decision
//! stumps (primary) and a logistic-regression cross-check. Both emit scores
//! in [0,1], higher meaning more likely link.

use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use crate::dense::Matrix;
use crate::dyngraph::Pair;
use crate::error::{Error, Result};
use crate::scalar::{sigmoid_scalar, Scalar};

pub const DEFAULT_ROUNDS: usize = 100;
const EPS_CLAMP: f64 = 1e-10;

/// Feature matrix with binary labels and the pair identities behind the rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset<F> {
    features: Matrix<F>,
    labels: Vec<u8>,
    pair_ids: Vec<Pair>,
}

impl<F: Scalar> LabeledDataset<F> {
    pub fn new(features: Matrix<F>, labels: Vec<u8>, pair_ids: Vec<Pair>) -> Result<Self> {
        if features.rows() != labels.len() || features.rows() != pair_ids.len() {
            return Err(Error::DimensionMismatch {
                what: "labels/pair_ids length",
                expected: features.rows(),
                got: labels.len().min(pair_ids.len()),
            });
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::InvalidParameter("labels must be 0 or 1".into()));
        }
        Ok(LabeledDataset {
            features,
            labels,
            pair_ids,
        })
    }

    pub fn features(&self) -> &Matrix<F> {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn pair_ids(&self) -> &[Pair] {
        &self.pair_ids
    }

    pub fn rows(&self) -> usize {
        self.features.rows()
    }

    fn has_both_classes(&self) -> bool {
        self.labels.contains(&1) && self.labels.contains(&0)
    }
}

/// One axis-aligned threshold classifier. With polarity +1 it votes +1 when
/// `x[feature] >= threshold`; polarity -1 inverts the vote.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stump<F> {
    pub feature: usize,
    pub threshold: F,
    pub polarity: i8,
    pub weight: F,
}

impl<F: Scalar> Stump<F> {
    fn vote(&self, x: &[F]) -> i8 {
        let above = x[self.feature] >= self.threshold;
        let positive = (self.polarity > 0) == above;
        if positive {
            1
        } else {
            -1
        }
    }
}

/// Weighted stump ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct StumpEnsemble<F> {
    pub stumps: Vec<Stump<F>>,
    pub rounds: usize,
}

/// Training output: the ensemble plus per-round weighted errors, which feed
/// the AdaBoost training-error bound prod_m 2*sqrt(eps_m (1-eps_m)).
#[derive(Debug, Clone)]
pub struct AdaboostFit<F> {
    pub ensemble: StumpEnsemble<F>,
    pub round_errors: Vec<F>,
    pub training_error: F,
}

impl<F: Scalar> AdaboostFit<F> {
    pub fn error_bound(&self) -> F {
        let two = F::from_f64_lossy(2.0);
        self.round_errors
            .iter()
            .map(|&e| two * (e * (F::one() - e)).sqrt())
            .fold(F::one(), |acc, x| acc * x)
    }
}

/// Standard AdaBoost.M1 with decision stumps. Example weights start uniform;
/// each round fits the weighted-error-minimizing stump over midpoint
/// thresholds of sorted unique feature values, with ties broken by lowest
/// (feature, threshold) and polarity +1 first. Stops early on a perfect
/// stump or when no stump beats 0.5.
pub fn train_adaboost<F: Scalar>(data: &LabeledDataset<F>, rounds: usize) -> Result<AdaboostFit<F>> {
    if rounds < 1 {
        return Err(Error::InvalidParameter("rounds must be >= 1".into()));
    }
    if !data.has_both_classes() {
        return Err(Error::SingleClass);
    }
    let m = data.rows();
    let d = data.features().cols();
    // y in {-1,+1}
    let y: Vec<i8> = data.labels().iter().map(|&l| if l == 1 { 1 } else { -1 }).collect();
    // per-feature row order sorted by value, computed once
    let mut feature_order: Vec<Vec<usize>> = Vec::with_capacity(d);
    for f in 0..d {
        let mut idx: Vec<usize> = (0..m).collect();
        idx.sort_by(|&a, &b| {
            data.features()
                .get(a, f)
                .partial_cmp(&data.features().get(b, f))
                .expect("finite features")
        });
        feature_order.push(idx);
    }

    let mut w = vec![F::one() / F::from_usize_lossy(m); m];
    let mut stumps: Vec<Stump<F>> = Vec::new();
    let mut round_errors: Vec<F> = Vec::new();
    let half = F::from_f64_lossy(0.5);

    for _round in 0..rounds {
        // total weight of positive examples
        let w_pos: F = w
            .iter()
            .zip(y.iter())
            .filter(|(_, &yy)| yy > 0)
            .map(|(&wi, _)| wi)
            .sum();
        let w_total: F = w.iter().copied().sum();
        let w_neg = w_total - w_pos;

        let mut best: Option<(F, usize, F, i8)> = None; // (eps, feature, threshold, polarity)
        for f in 0..d {
            let order = &feature_order[f];
            // sweep thresholds at midpoints between distinct adjacent values;
            // below[pos/neg] = weight with value < threshold
            let mut below_pos = F::zero();
            let mut below_neg = F::zero();
            let mut i = 0;
            while i < m {
                // consume the run of equal values
                let v = data.features().get(order[i], f);
                while i < m && data.features().get(order[i], f) == v {
                    let row = order[i];
                    if y[row] > 0 {
                        below_pos += w[row];
                    } else {
                        below_neg += w[row];
                    }
                    i += 1;
                }
                if i == m {
                    break; // no distinct value above: no threshold here
                }
                let next = data.features().get(order[i], f);
                let thr = (v + next) * half;
                // polarity +1 (positive when >= thr): errors are positives
                // below and negatives at-or-above
                let eps_plus = below_pos + (w_neg - below_neg);
                // polarity -1: complement
                let eps_minus = below_neg + (w_pos - below_pos);
                for (eps, pol) in [(eps_plus, 1i8), (eps_minus, -1i8)] {
                    let better = match &best {
                        None => true,
                        Some((be, ..)) => eps < *be,
                    };
                    if better {
                        best = Some((eps, f, thr, pol));
                    }
                }
            }
        }
        let Some((eps_raw, feature, threshold, polarity)) = best else {
            break; // every feature is constant; nothing to split on
        };
        let eps = eps_raw / w_total;
        if eps.to_f64_lossy() >= 0.5 {
            break; // no stump better than chance
        }
        let eps_clamped = F::from_f64_lossy(
            eps.to_f64_lossy().clamp(EPS_CLAMP, 1.0 - EPS_CLAMP),
        );
        let alpha = half * ((F::one() - eps_clamped) / eps_clamped).ln();
        let stump = Stump {
            feature,
            threshold,
            polarity,
            weight: alpha,
        };
        round_errors.push(eps_clamped);
        stumps.push(stump);
        if eps <= F::zero() {
            break; // perfect stump
        }
        // reweight and normalize
        let mut sum = F::zero();
        for i in 0..m {
            let agree = stump.vote(data.features().row(i)) == y[i];
            let factor = if agree { (-alpha).exp() } else { alpha.exp() };
            w[i] *= factor;
            sum += w[i];
        }
        for wi in &mut w {
            *wi /= sum;
        }
    }

    let ensemble = StumpEnsemble {
        rounds: stumps.len(),
        stumps,
    };
    let fit_scores = score(&ensemble, data.features())?;
    let errors = fit_scores
        .iter()
        .zip(data.labels().iter())
        .filter(|(&s, &l)| {
            let predicted = s >= F::from_f64_lossy(0.5);
            predicted != (l == 1)
        })
        .count();
    let training_error = F::from_usize_lossy(errors) / F::from_usize_lossy(m);
    let fit = AdaboostFit {
        ensemble,
        round_errors,
        training_error,
    };
    debug_assert!(
        fit.training_error <= fit.error_bound() + F::from_f64_lossy(1e-12),
        "AdaBoost bound violated: {} > {}",
        fit.training_error,
        fit.error_bound()
    );
    Ok(fit)
}

/// Normalized ensemble margin mapped to [0,1]: (sum a_m h_m / sum a_m + 1)/2.
/// An empty ensemble scores 0.5 everywhere.
pub fn score<F: Scalar>(model: &StumpEnsemble<F>, features: &Matrix<F>) -> Result<Vec<F>> {
    let width_needed = model.stumps.iter().map(|s| s.feature + 1).max().unwrap_or(0);
    if features.cols() < width_needed {
        return Err(Error::DimensionMismatch {
            what: "feature width",
            expected: width_needed,
            got: features.cols(),
        });
    }
    let total: F = model.stumps.iter().map(|s| s.weight).sum();
    let half = F::from_f64_lossy(0.5);
    Ok(features
        .iter_rows()
        .map(|row| {
            if model.stumps.is_empty() || total == F::zero() {
                return half;
            }
            let mut margin = F::zero();
            for s in &model.stumps {
                let v = F::from_f64_lossy(s.vote(row) as f64);
                margin += s.weight * v;
            }
            ((margin / total) + F::one()) * half
        })
        .collect())
}

/// Logistic regression scorer.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel<F> {
    pub weights: Vec<F>,
    pub bias: F,
}

impl<F: Scalar> LogisticModel<F> {
    pub fn score(&self, features: &Matrix<F>) -> Result<Vec<F>> {
        if features.cols() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                what: "feature width",
                expected: self.weights.len(),
                got: features.cols(),
            });
        }
        Ok(features
            .iter_rows()
            .map(|row| sigmoid_scalar(crate::dense::dot(row, &self.weights) + self.bias))
            .collect())
    }
}

/// Mean log-loss of a weight vector on the dataset (used by the gradient
/// check and for monitoring).
pub fn logistic_loss<F: Scalar>(model: &LogisticModel<F>, data: &LabeledDataset<F>) -> Result<F> {
    let p = model.score(data.features())?;
    let mut total = F::zero();
    let tiny = F::from_f64_lossy(1e-12);
    for (&pi, &l) in p.iter().zip(data.labels().iter()) {
        let pi = pi.max(tiny).min(F::one() - tiny);
        total += if l == 1 { -pi.ln() } else { -(F::one() - pi).ln() };
    }
    Ok(total / F::from_usize_lossy(data.rows()))
}

/// Gradient of the mean log-loss (weights then bias).
pub fn logistic_gradient<F: Scalar>(
    model: &LogisticModel<F>,
    data: &LabeledDataset<F>,
) -> Result<(Vec<F>, F)> {
    let p = model.score(data.features())?;
    let m = F::from_usize_lossy(data.rows());
    let mut gw = vec![F::zero(); model.weights.len()];
    let mut gb = F::zero();
    for (i, row) in data.features().iter_rows().enumerate() {
        let resid = p[i] - F::from_f64_lossy(data.labels()[i] as f64);
        crate::dense::axpy(resid / m, row, &mut gw);
        gb += resid / m;
    }
    Ok((gw, gb))
}

/// Plain gradient descent on the mean log-loss from zero weights; zero steps
/// therefore scores 0.5 everywhere.
pub fn train_logistic<F: Scalar>(
    data: &LabeledDataset<F>,
    steps: usize,
    rate: f64,
) -> Result<LogisticModel<F>> {
    if !data.has_both_classes() {
        return Err(Error::SingleClass);
    }
    if !rate.is_finite() || rate <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "learning rate must be positive, got {rate}"
        )));
    }
    let mut model = LogisticModel {
        weights: vec![F::zero(); data.features().cols()],
        bias: F::zero(),
    };
    let rate = F::from_f64_lossy(rate);
    for _ in 0..steps {
        let (gw, gb) = logistic_gradient(&model, data)?;
        for (w, g) in model.weights.iter_mut().zip(gw.iter()) {
            *w -= rate * *g;
        }
        model.bias -= rate * gb;
    }
    Ok(model)
}

const ENSEMBLE_HEADER: &str = "dylink2vec-ensemble v1";

/// Versioned text serialization: one stump per line `feat thr polarity weight`.
pub fn write_ensemble<F: Scalar, W: Write>(model: &StumpEnsemble<F>, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "{ENSEMBLE_HEADER}")?;
    for s in &model.stumps {
        writeln!(w, "{} {:.16e} {} {:.16e}", s.feature, s.threshold, s.polarity, s.weight)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_ensemble_file<F: Scalar>(model: &StumpEnsemble<F>, path: &Path) -> Result<()> {
    write_ensemble(model, std::fs::File::create(path)?)
}

pub fn read_ensemble<F: Scalar, R: BufRead>(reader: R) -> Result<StumpEnsemble<F>> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or(Error::Format("missing ensemble header".into()))??;
    if header.trim() != ENSEMBLE_HEADER {
        return Err(Error::Format(format!(
            "bad ensemble header `{header}`, expected `{ENSEMBLE_HEADER}`"
        )));
    }
    let mut stumps = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 4 {
            return Err(Error::Format(format!(
                "line {}: expected `feat thr polarity weight`",
                lineno + 2
            )));
        }
        let bad = |what: &str, e: &dyn std::fmt::Display| {
            Error::Format(format!("line {}: bad {what}: {e}", lineno + 2))
        };
        stumps.push(Stump {
            feature: toks[0].parse().map_err(|e| bad("feature", &e))?,
            threshold: toks[1]
                .parse::<f64>()
                .map(F::from_f64_lossy)
                .map_err(|e| bad("threshold", &e))?,
            polarity: toks[2].parse().map_err(|e| bad("polarity", &e))?,
            weight: toks[3]
                .parse::<f64>()
                .map(F::from_f64_lossy)
                .map_err(|e| bad("weight", &e))?,
        });
    }
    Ok(StumpEnsemble {
        rounds: stumps.len(),
        stumps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn labeled(rows: Vec<Vec<f64>>, labels: Vec<u8>) -> LabeledDataset<f64> {
        let pair_ids = (0..labels.len()).map(|i| (0, i + 1)).collect();
        LabeledDataset::new(Matrix::from_rows(rows).unwrap(), labels, pair_ids).unwrap()
    }

    #[test]
    fn separable_clusters_need_one_round() {
        let data = labeled(
            vec![vec![-1.0], vec![-0.9], vec![1.0], vec![1.1]],
            vec![0, 0, 1, 1],
        );
        let fit = train_adaboost(&data, 50).unwrap();
        assert_eq!(fit.ensemble.stumps.len(), 1); // perfect stump stops early
        assert_eq!(fit.training_error, 0.0);
        let scores = score(&fit.ensemble, data.features()).unwrap();
        assert_eq!(scores, vec![0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn hand_traced_first_round() {
        // x = [1,2,3,4], y = [1,1,0,1]; best stump is thr=2.5, polarity -1
        // (positive below), eps = 1/4, alpha = ln(3)/2.
        let data = labeled(
            vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]],
            vec![1, 1, 0, 1],
        );
        let fit = train_adaboost(&data, 1).unwrap();
        let s = fit.ensemble.stumps[0];
        assert_eq!(s.feature, 0);
        assert_eq!(s.threshold, 2.5);
        assert_eq!(s.polarity, -1);
        assert!((s.weight - 0.5 * 3.0_f64.ln()).abs() < 1e-12);
        assert!((fit.round_errors[0] - 0.25).abs() < 1e-12);
        // scores from the single stump: positive below 2.5
        let scores = score(&fit.ensemble, data.features()).unwrap();
        assert_eq!(scores, vec![1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn single_stump_votes_full_confidence() {
        let ens = StumpEnsemble {
            stumps: vec![Stump {
                feature: 0,
                threshold: 0.5,
                polarity: 1,
                weight: 2.0,
            }],
            rounds: 1,
        };
        let scores = score(&ens, &Matrix::from_rows(vec![vec![1.0]]).unwrap()).unwrap();
        assert_eq!(scores, vec![1.0]);
    }

    #[test]
    fn equal_weight_disagreement_scores_half() {
        let ens = StumpEnsemble {
            stumps: vec![
                Stump {
                    feature: 0,
                    threshold: 0.5,
                    polarity: 1,
                    weight: 1.0,
                },
                Stump {
                    feature: 0,
                    threshold: 0.5,
                    polarity: -1,
                    weight: 1.0,
                },
            ],
            rounds: 2,
        };
        let scores = score(&ens, &Matrix::from_rows(vec![vec![1.0], vec![0.0]]).unwrap()).unwrap();
        assert_eq!(scores, vec![0.5, 0.5]);
    }

    #[test]
    fn single_class_rejected() {
        let data = labeled(vec![vec![0.0], vec![1.0]], vec![1, 1]);
        assert!(matches!(train_adaboost(&data, 3), Err(Error::SingleClass)));
        assert!(matches!(
            train_logistic(&data, 5, 0.1),
            Err(Error::SingleClass)
        ));
    }

    fn random_dataset(seed: u64, rows: usize, cols: usize) -> LabeledDataset<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let feats: Vec<Vec<f64>> = (0..rows)
            .map(|_| (0..cols).map(|_| rng.gen::<f64>()).collect())
            .collect();
        // noisy linear rule so both classes appear
        let labels: Vec<u8> = feats
            .iter()
            .map(|r| {
                let s: f64 = r.iter().sum::<f64>() / cols as f64 + 0.1 * rng.gen::<f64>();
                (s > 0.55) as u8
            })
            .collect();
        labeled(feats, labels)
    }

    #[test]
    fn training_error_respects_adaboost_bound() {
        for seed in 0..10 {
            let data = random_dataset(seed, 60, 4);
            if !data.labels().contains(&1) || !data.labels().contains(&0) {
                continue;
            }
            let fit = train_adaboost(&data, 30).unwrap();
            assert!(
                fit.training_error <= fit.error_bound() + 1e-12,
                "seed {seed}: {} > {}",
                fit.training_error,
                fit.error_bound()
            );
        }
    }

    #[test]
    fn boosting_reduces_training_error_on_interval_data() {
        // positives form an interval; a single stump cannot separate them
        let xs = [0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.75, 0.85, 0.95];
        let labels = vec![0, 0, 0, 1, 1, 1, 0, 0, 0];
        let data = labeled(xs.iter().map(|&x| vec![x]).collect(), labels);
        let one = train_adaboost(&data, 1).unwrap();
        assert!(one.training_error > 0.0);
        let many = train_adaboost(&data, 50).unwrap();
        assert!(many.training_error < one.training_error);
        assert!(many.training_error <= many.error_bound() + 1e-12);
    }

    #[test]
    fn score_invariant_under_stump_duplication_with_split_weight() {
        let data = random_dataset(3, 40, 3);
        let fit = train_adaboost(&data, 10).unwrap();
        let mut split = Vec::new();
        for s in &fit.ensemble.stumps {
            let mut half = *s;
            half.weight = s.weight / 2.0;
            split.push(half);
            split.push(half);
        }
        let doubled = StumpEnsemble {
            rounds: split.len(),
            stumps: split,
        };
        let a = score(&fit.ensemble, data.features()).unwrap();
        let b = score(&doubled, data.features()).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn score_equivariant_under_feature_permutation() {
        let data = random_dataset(5, 30, 4);
        let fit = train_adaboost(&data, 8).unwrap();
        // permute columns 0..4 by rotation and remap stump indices
        let perm = |j: usize| (j + 1) % 4;
        let permuted_rows: Vec<Vec<f64>> = data
            .features()
            .iter_rows()
            .map(|r| {
                let mut out = vec![0.0; 4];
                for (j, &v) in r.iter().enumerate() {
                    out[perm(j)] = v;
                }
                out
            })
            .collect();
        let permuted = Matrix::from_rows(permuted_rows).unwrap();
        let remapped = StumpEnsemble {
            rounds: fit.ensemble.rounds,
            stumps: fit
                .ensemble
                .stumps
                .iter()
                .map(|s| Stump {
                    feature: perm(s.feature),
                    ..*s
                })
                .collect(),
        };
        let a = score(&fit.ensemble, data.features()).unwrap();
        let b = score(&remapped, &permuted).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn score_rejects_narrow_features() {
        let ens = StumpEnsemble {
            stumps: vec![Stump {
                feature: 3,
                threshold: 0.0,
                polarity: 1,
                weight: 1.0,
            }],
            rounds: 1,
        };
        assert!(score(&ens, &Matrix::<f64>::zeros(1, 2)).is_err());
    }

    #[test]
    fn logistic_separable_reaches_full_accuracy() {
        let data = labeled(
            vec![vec![-1.0], vec![-0.8], vec![0.8], vec![1.0]],
            vec![0, 0, 1, 1],
        );
        let model = train_logistic(&data, 500, 1.0).unwrap();
        let scores = model.score(data.features()).unwrap();
        for (s, &l) in scores.iter().zip(data.labels().iter()) {
            assert_eq!((*s >= 0.5) as u8, l);
        }
    }

    #[test]
    fn logistic_zero_steps_scores_half() {
        let data = random_dataset(7, 20, 3);
        let model = train_logistic(&data, 0, 0.5).unwrap();
        let scores = model.score(data.features()).unwrap();
        assert!(scores.iter().all(|&s| s == 0.5));
    }

    #[test]
    fn logistic_gradient_matches_finite_differences() {
        let data = random_dataset(11, 25, 4);
        let model = LogisticModel {
            weights: vec![0.3, -0.2, 0.5, 0.1],
            bias: -0.05,
        };
        let (gw, gb) = logistic_gradient(&model, &data).unwrap();
        let h = 1e-6;
        for j in 0..4 {
            let mut hi = model.clone();
            hi.weights[j] += h;
            let mut lo = model.clone();
            lo.weights[j] -= h;
            let fd = (logistic_loss(&hi, &data).unwrap() - logistic_loss(&lo, &data).unwrap())
                / (2.0 * h);
            let tol = 1e-5 * gw[j].abs().max(fd.abs()).max(1e-3);
            assert!((gw[j] - fd).abs() <= tol);
        }
        let mut hi = model.clone();
        hi.bias += h;
        let mut lo = model.clone();
        lo.bias -= h;
        let fd =
            (logistic_loss(&hi, &data).unwrap() - logistic_loss(&lo, &data).unwrap()) / (2.0 * h);
        assert!((gb - fd).abs() <= 1e-5 * gb.abs().max(fd.abs()).max(1e-3));
    }

    #[test]
    fn ensemble_round_trip() {
        let data = random_dataset(13, 30, 3);
        let fit = train_adaboost(&data, 12).unwrap();
        let mut buf = Vec::new();
        write_ensemble(&fit.ensemble, &mut buf).unwrap();
        let back: StumpEnsemble<f64> =
            read_ensemble(std::io::BufReader::new(buf.as_slice())).unwrap();
        assert_eq!(back, fit.ensemble);
        assert!(read_ensemble::<f64, _>(std::io::BufReader::new(&b"nope\n"[..])).is_err());
    }
}
