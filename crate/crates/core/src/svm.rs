//! Baseline classifier: mean-of-word-embeddings sentence vectors and a
//! soft-margin RBF-kernel SVM trained with simplified sequential minimal
//! optimization.

use std::collections::HashMap;
use std::path::Path;

use log::warn;
use rand::Rng;

use crate::data::{tokenize, RawUtterance};
use crate::error::{Error, Result};
use crate::rng;
use crate::serial::{ModelFile, ModelKind, NamedTensor};

/// Token vectors loaded from a text file, one `token v1 .. vk` line each.
/// The published tables use k = 300; any consistent width is accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Vec<Vec<f64>>,
    dim: usize,
}

impl EmbeddingTable {
    pub fn new(entries: Vec<(String, Vec<f64>)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Data("embedding table has no entries".into()));
        }
        let dim = entries[0].1.len();
        if dim == 0 {
            return Err(Error::Data("embedding vectors are zero-width".into()));
        }
        let mut tokens = Vec::with_capacity(entries.len());
        let mut vectors = Vec::with_capacity(entries.len());
        let mut index = HashMap::with_capacity(entries.len());
        for (token, vector) in entries {
            if vector.len() != dim {
                return Err(Error::Shape(format!(
                    "token {token:?} has a {}-d vector, table is {dim}-d",
                    vector.len()
                )));
            }
            if !vector.iter().all(|v| v.is_finite()) {
                return Err(Error::Numeric(format!(
                    "token {token:?} has a non-finite vector entry"
                )));
            }
            if index.insert(token.clone(), tokens.len()).is_some() {
                return Err(Error::Data(format!("duplicate token {token:?} in table")));
            }
            tokens.push(token);
            vectors.push(vector);
        }
        Ok(Self {
            tokens,
            index,
            vectors,
            dim,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let token = fields.next().expect("non-empty line").to_string();
            let vector: Vec<f64> = fields
                .map(|f| {
                    f.parse::<f64>().map_err(|_| Error::Parse {
                        line: i + 1,
                        msg: format!("bad number {f:?}"),
                    })
                })
                .collect::<Result<_>>()?;
            if vector.is_empty() {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("token {token:?} has no vector values"),
                });
            }
            entries.push((token, vector));
        }
        Self::new(entries)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.index.get(token).map(|&i| self.vectors[i].as_slice())
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// Mean of the vectors of the tokens found in the table; tokens without an
/// entry are skipped.
pub fn sentence_vector(tokens: &[String], table: &EmbeddingTable) -> Result<Vec<f64>> {
    let mut sum = vec![0.0; table.dim()];
    let mut found = 0usize;
    for token in tokens {
        if let Some(v) = table.get(token) {
            for (s, x) in sum.iter_mut().zip(v) {
                *s += x;
            }
            found += 1;
        }
    }
    if found == 0 {
        return Err(Error::Coverage(format!(
            "none of {} tokens appear in the embedding table",
            tokens.len()
        )));
    }
    for s in &mut sum {
        *s /= found as f64;
    }
    Ok(sum)
}

pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "kernel inputs of widths {} and {}",
            a.len(),
            b.len()
        )));
    }
    if !(gamma > 0.0) {
        return Err(Error::Config(format!("kernel gamma {gamma} must be positive")));
    }
    let dist2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((-gamma * dist2).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    /// None selects 1 / (dim * variance of all feature entries).
    pub gamma: Option<f64>,
    pub tol: f64,
    pub max_passes: usize,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            gamma: None,
            tol: 1e-3,
            max_passes: 10,
            seed: 42,
        }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::Config(format!("penalty C {} must be positive", self.c)));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0) {
                return Err(Error::Config(format!("gamma {g} must be positive")));
            }
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tolerance {} must be positive", self.tol)));
        }
        if self.max_passes == 0 {
            return Err(Error::Config("max passes must be at least 1".into()));
        }
        Ok(())
    }
}

/// The scikit-style default: 1 / (dim * population variance over every
/// feature entry), falling back to 1 / dim for constant data.
pub fn default_gamma(vectors: &[Vec<f64>]) -> f64 {
    let dim = vectors[0].len();
    let n = (vectors.len() * dim) as f64;
    let mean: f64 = vectors.iter().flatten().sum::<f64>() / n;
    let var: f64 = vectors
        .iter()
        .flatten()
        .map(|x| (x - mean) * (x - mean))
        .sum::<f64>()
        / n;
    if var > 0.0 {
        1.0 / (dim as f64 * var)
    } else {
        1.0 / dim as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// alpha_i * y_i per support vector.
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub c: f64,
}

impl SvmModel {
    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        let mut f = self.bias;
        for (sv, coef) in self.support_vectors.iter().zip(&self.dual_coefs) {
            f += coef * rbf_kernel(sv, x, self.gamma)?;
        }
        Ok(f)
    }

    /// 1 for a positive decision value, 0 otherwise (ties fall to unstressed).
    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        Ok(u8::from(self.decision(x)? > 0.0))
    }
}

/// Simplified SMO: sweep the examples, pair each KKT violator with a random
/// second index, and solve the two-variable subproblem analytically. Stops
/// after `max_passes` consecutive sweeps without an update.
pub fn svm_train(vectors: &[Vec<f64>], labels: &[i8], params: &SvmParams) -> Result<SvmModel> {
    params.validate()?;
    if vectors.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} vectors vs {} labels",
            vectors.len(),
            labels.len()
        )));
    }
    let n = vectors.len();
    if n < 2 {
        return Err(Error::Data("svm training needs at least 2 examples".into()));
    }
    let dim = vectors[0].len();
    if vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::Shape("svm training vectors have mixed widths".into()));
    }
    if labels.iter().any(|&y| y != -1 && y != 1) {
        return Err(Error::Data("svm labels must be -1 or +1".into()));
    }
    if !labels.contains(&1) || !labels.contains(&-1) {
        return Err(Error::Data("svm training needs both classes".into()));
    }
    let gamma = params.gamma.unwrap_or_else(|| default_gamma(vectors));
    let c = params.c;
    let y: Vec<f64> = labels.iter().map(|&l| l as f64).collect();

    let mut kernel = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let k = rbf_kernel(&vectors[i], &vectors[j], gamma)?;
            kernel[i * n + j] = k;
            kernel[j * n + i] = k;
        }
    }
    let k_at = |i: usize, j: usize| kernel[i * n + j];

    let mut alphas = vec![0.0; n];
    let mut bias = 0.0;
    let decision = |alphas: &[f64], bias: f64, i: usize| -> f64 {
        let mut f = bias;
        for j in 0..n {
            if alphas[j] != 0.0 {
                f += alphas[j] * y[j] * k_at(j, i);
            }
        }
        f
    };

    let mut r = rng::stream(params.seed, "smo", 0);
    let mut stable_passes = 0usize;
    let mut sweeps = 0usize;
    const SWEEP_CAP: usize = 1000;
    while stable_passes < params.max_passes {
        if sweeps >= SWEEP_CAP {
            warn!("smo stopped at the {SWEEP_CAP}-sweep cap before satisfying tolerance");
            break;
        }
        sweeps += 1;
        let mut changed = 0usize;
        for i in 0..n {
            let e_i = decision(&alphas, bias, i) - y[i];
            let violates = (y[i] * e_i < -params.tol && alphas[i] < c)
                || (y[i] * e_i > params.tol && alphas[i] > 0.0);
            if !violates {
                continue;
            }
            let j = {
                let mut j = r.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                j
            };
            let e_j = decision(&alphas, bias, j) - y[j];
            let (a_i_old, a_j_old) = (alphas[i], alphas[j]);
            let (low, high) = if y[i] != y[j] {
                (
                    (a_j_old - a_i_old).max(0.0),
                    (c + a_j_old - a_i_old).min(c),
                )
            } else {
                (
                    (a_i_old + a_j_old - c).max(0.0),
                    (a_i_old + a_j_old).min(c),
                )
            };
            // >= rather than ==: accumulated rounding can push low past
            // high by an ulp, which would invert the clamp below.
            if low >= high {
                continue;
            }
            let eta = 2.0 * k_at(i, j) - k_at(i, i) - k_at(j, j);
            if eta >= 0.0 {
                continue;
            }
            let mut a_j = a_j_old - y[j] * (e_i - e_j) / eta;
            a_j = a_j.clamp(low, high);
            if (a_j - a_j_old).abs() < 1e-5 {
                continue;
            }
            // The paired update keeps a_i in the box analytically; the clamp
            // only absorbs rounding drift at the ends.
            let a_i = (a_i_old + y[i] * y[j] * (a_j_old - a_j)).clamp(0.0, c);
            let b1 = bias
                - e_i
                - y[i] * (a_i - a_i_old) * k_at(i, i)
                - y[j] * (a_j - a_j_old) * k_at(i, j);
            let b2 = bias
                - e_j
                - y[i] * (a_i - a_i_old) * k_at(i, j)
                - y[j] * (a_j - a_j_old) * k_at(j, j);
            bias = if a_i > 0.0 && a_i < c {
                b1
            } else if a_j > 0.0 && a_j < c {
                b2
            } else {
                (b1 + b2) / 2.0
            };
            alphas[i] = a_i;
            alphas[j] = a_j;
            changed += 1;
        }
        if changed == 0 {
            stable_passes += 1;
        } else {
            stable_passes = 0;
        }
    }

    let mut support_vectors = Vec::new();
    let mut dual_coefs = Vec::new();
    for i in 0..n {
        if alphas[i] > 0.0 {
            support_vectors.push(vectors[i].clone());
            dual_coefs.push(alphas[i] * y[i]);
        }
    }
    Ok(SvmModel {
        support_vectors,
        dual_coefs,
        bias,
        gamma,
        c,
    })
}

/// Training points with y_i * f(x_i) < 1: inside the margin or misclassified.
pub fn margin_violations(model: &SvmModel, vectors: &[Vec<f64>], labels: &[i8]) -> Result<usize> {
    let mut count = 0;
    for (x, &label) in vectors.iter().zip(labels) {
        if label as f64 * model.decision(x)? < 1.0 {
            count += 1;
        }
    }
    Ok(count)
}

/// Text-level baseline: the embedding table plus the trained kernel machine.
#[derive(Debug, Clone, PartialEq)]
pub struct TextSvm {
    pub table: EmbeddingTable,
    pub model: SvmModel,
}

impl TextSvm {
    /// Vectorizes the utterances (skipping any with zero table coverage,
    /// with a warning) and trains. Returns the model and the skip count.
    pub fn train(
        utterances: &[RawUtterance],
        table: EmbeddingTable,
        params: &SvmParams,
    ) -> Result<(Self, usize)> {
        let mut vectors = Vec::new();
        let mut labels = Vec::new();
        let mut skipped = 0usize;
        for utt in utterances {
            match sentence_vector(&tokenize(&utt.text), &table) {
                Ok(v) => {
                    vectors.push(v);
                    labels.push(if utt.label == 1 { 1i8 } else { -1i8 });
                }
                Err(Error::Coverage(_)) => skipped += 1,
                Err(e) => return Err(e),
            }
        }
        if skipped > 0 {
            warn!("{skipped} utterances had no embedding-table coverage and were skipped");
        }
        if vectors.is_empty() {
            return Err(Error::Coverage(
                "no utterance had embedding-table coverage".into(),
            ));
        }
        let model = svm_train(&vectors, &labels, params)?;
        Ok((Self { table, model }, skipped))
    }

    pub fn predict_text(&self, text: &str) -> Result<u8> {
        let v = sentence_vector(&tokenize(text), &self.table)?;
        self.model.predict(&v)
    }

    /// Packs the table and the machine into the shared container format.
    pub fn to_model_file(&self) -> ModelFile {
        let dim = self.table.dim() as u64;
        let n_tokens = self.table.len() as u64;
        let n_sv = self.model.support_vectors.len() as u64;
        let table_data: Vec<f64> = self.table.vectors.iter().flatten().copied().collect();
        let sv_data: Vec<f64> = self
            .model
            .support_vectors
            .iter()
            .flatten()
            .copied()
            .collect();
        ModelFile {
            kind: ModelKind::Svm,
            attention: false,
            dims: [n_tokens, dim, 0, 0],
            vocab: self.table.tokens.clone(),
            tensors: vec![
                NamedTensor::new("table.vectors", vec![n_tokens, dim], table_data),
                NamedTensor::new("svm.support_vectors", vec![n_sv, dim], sv_data),
                NamedTensor::new("svm.dual_coefs", vec![n_sv], self.model.dual_coefs.clone()),
                NamedTensor::new("svm.bias", vec![1], vec![self.model.bias]),
                NamedTensor::new("svm.gamma", vec![1], vec![self.model.gamma]),
                NamedTensor::new("svm.c", vec![1], vec![self.model.c]),
            ],
        }
    }

    pub fn from_model_file(file: &ModelFile) -> Result<Self> {
        if file.kind != ModelKind::Svm {
            return Err(Error::Data(format!(
                "model file holds a {} classifier, not an svm baseline",
                file.kind.as_str()
            )));
        }
        let dim = file.dims[1] as usize;
        let table_tensor = file.tensor("table.vectors")?;
        if table_tensor.data.len() != file.vocab.len() * dim {
            return Err(Error::Data("embedding tensor does not match vocabulary".into()));
        }
        let entries: Vec<(String, Vec<f64>)> = file
            .vocab
            .iter()
            .cloned()
            .zip(table_tensor.data.chunks(dim).map(|c| c.to_vec()))
            .collect();
        let table = EmbeddingTable::new(entries)?;
        let sv_tensor = file.tensor("svm.support_vectors")?;
        let coefs = file.tensor("svm.dual_coefs")?.data.clone();
        if sv_tensor.data.len() != coefs.len() * dim {
            return Err(Error::Data(
                "support vectors do not match dual coefficients".into(),
            ));
        }
        let support_vectors: Vec<Vec<f64>> =
            sv_tensor.data.chunks(dim).map(|c| c.to_vec()).collect();
        let scalar = |name: &str| -> Result<f64> {
            let t = file.tensor(name)?;
            t.data
                .first()
                .copied()
                .ok_or_else(|| Error::Data(format!("tensor {name} is empty")))
        };
        Ok(Self {
            table,
            model: SvmModel {
                support_vectors,
                dual_coefs: coefs,
                bias: scalar("svm.bias")?,
                gamma: scalar("svm.gamma")?,
                c: scalar("svm.c")?,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Source;

    fn small_table() -> EmbeddingTable {
        EmbeddingTable::new(vec![
            ("up".into(), vec![1.0, 2.0, 3.0]),
            ("down".into(), vec![-1.0, -2.0, -3.0]),
            ("left".into(), vec![0.5, 0.0, 1.0]),
        ])
        .unwrap()
    }

    /// Two tight clusters around (0,0) and (4,4).
    fn separable_points() -> (Vec<Vec<f64>>, Vec<i8>) {
        let vectors = vec![
            vec![0.0, 0.0],
            vec![0.3, -0.2],
            vec![4.0, 4.0],
            vec![3.8, 4.2],
        ];
        (vectors, vec![-1, -1, 1, 1])
    }

    #[test]
    fn table_parses_and_validates() {
        let t = EmbeddingTable::parse("up 1 2 3\ndown -1 -2 -3\n").unwrap();
        assert_eq!(t.dim(), 3);
        assert_eq!(t.len(), 2);
        assert_eq!(t.get("up"), Some(&[1.0, 2.0, 3.0][..]));
        assert_eq!(t.get("sideways"), None);

        assert!(matches!(
            EmbeddingTable::parse("a 1 2\nb 1\n"),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            EmbeddingTable::parse("a 1 x\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            EmbeddingTable::parse("a 1\na 2\n"),
            Err(Error::Data(_))
        ));
        assert!(matches!(EmbeddingTable::parse(""), Err(Error::Data(_))));
    }

    #[test]
    fn sentence_vector_is_mean_of_found_tokens() {
        let table = small_table();
        let one = sentence_vector(&["up".to_string()], &table).unwrap();
        assert_eq!(one, vec![1.0, 2.0, 3.0]);

        let cancel =
            sentence_vector(&["up".to_string(), "down".to_string()], &table).unwrap();
        assert_eq!(cancel, vec![0.0, 0.0, 0.0]);

        let mixed = sentence_vector(
            &["up".to_string(), "down".to_string(), "left".to_string()],
            &table,
        )
        .unwrap();
        for (got, want) in mixed.iter().zip([0.5 / 3.0, 0.0, 1.0 / 3.0]) {
            assert!((got - want).abs() < 1e-15);
        }

        // Unknown tokens are skipped, not averaged in.
        let skipping =
            sentence_vector(&["up".to_string(), "zzz".to_string()], &table).unwrap();
        assert_eq!(skipping, vec![1.0, 2.0, 3.0]);

        assert!(matches!(
            sentence_vector(&["zzz".to_string()], &table),
            Err(Error::Coverage(_))
        ));
    }

    #[test]
    fn rbf_kernel_basics() {
        let x = [0.3, -1.2, 7.0];
        assert_eq!(rbf_kernel(&x, &x, 2.0).unwrap(), 1.0);
        let a = [1.0, 2.0];
        let b = [0.0, 3.5];
        assert_eq!(
            rbf_kernel(&a, &b, 0.7).unwrap(),
            rbf_kernel(&b, &a, 0.7).unwrap()
        );
        let k = rbf_kernel(&[0.0], &[1.0], 0.5).unwrap();
        assert!((k - (-0.5f64).exp()).abs() < 1e-12);
        assert!((k - 0.606531).abs() < 1e-6);
        assert!(matches!(rbf_kernel(&[0.0], &[1.0], 0.0), Err(Error::Config(_))));
        assert!(matches!(rbf_kernel(&[0.0], &[1.0, 2.0], 1.0), Err(Error::Shape(_))));
    }

    #[test]
    fn separable_points_train_to_full_accuracy() {
        let (vectors, labels) = separable_points();
        let params = SvmParams {
            gamma: Some(0.5),
            ..SvmParams::default()
        };
        let model = svm_train(&vectors, &labels, &params).unwrap();
        for (x, &label) in vectors.iter().zip(&labels) {
            let want = u8::from(label == 1);
            assert_eq!(model.predict(x).unwrap(), want);
        }
    }

    #[test]
    fn dual_constraints_hold_after_training() {
        let (vectors, labels) = separable_points();
        let params = SvmParams {
            gamma: Some(0.5),
            ..SvmParams::default()
        };
        let model = svm_train(&vectors, &labels, &params).unwrap();
        assert!(!model.dual_coefs.is_empty());
        for coef in &model.dual_coefs {
            let alpha = coef.abs();
            assert!(alpha > 0.0 && alpha <= model.c + 1e-12, "alpha {alpha}");
        }
        let balance: f64 = model.dual_coefs.iter().sum();
        assert!(balance.abs() < 1e-6, "sum alpha_i y_i = {balance}");
    }

    #[test]
    fn contradictory_duplicate_point_still_trains() {
        let vectors = vec![
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![3.0, 3.0],
            vec![-3.0, 3.0],
        ];
        let labels = vec![-1, 1, 1, -1];
        let params = SvmParams {
            gamma: Some(0.5),
            ..SvmParams::default()
        };
        let model = svm_train(&vectors, &labels, &params).unwrap();
        // The duplicated point carries both labels; at least one copy must
        // violate its margin.
        let f = model.decision(&vectors[0]).unwrap();
        assert!((-1.0) * f < 1.0 || 1.0 * f < 1.0);
    }

    #[test]
    fn interior_point_predicts_its_own_label() {
        let mut vectors = vec![
            vec![0.0, 0.0],
            vec![0.4, 0.0],
            vec![0.0, 0.4],
            vec![4.0, 4.0],
            vec![4.4, 4.0],
            vec![4.0, 4.4],
        ];
        let mut labels = vec![-1, -1, -1, 1, 1, 1];
        // Deep inside the positive cluster.
        vectors.push(vec![4.2, 4.2]);
        labels.push(1);
        let params = SvmParams {
            gamma: Some(0.5),
            ..SvmParams::default()
        };
        let model = svm_train(&vectors, &labels, &params).unwrap();
        assert_eq!(model.predict(&[4.2, 4.2]).unwrap(), 1);
    }

    #[test]
    fn tie_breaks_to_unstressed() {
        let model = SvmModel {
            support_vectors: vec![vec![1.0], vec![-1.0]],
            dual_coefs: vec![0.8, -0.8],
            bias: 0.0,
            gamma: 1.0,
            c: 1.0,
        };
        // Equidistant from both mirrored support vectors.
        assert_eq!(model.decision(&[0.0]).unwrap(), 0.0);
        assert_eq!(model.predict(&[0.0]).unwrap(), 0);
    }

    #[test]
    fn training_is_seed_deterministic() {
        let (vectors, labels) = separable_points();
        let params = SvmParams {
            gamma: Some(0.5),
            seed: 9,
            ..SvmParams::default()
        };
        let a = svm_train(&vectors, &labels, &params).unwrap();
        let b = svm_train(&vectors, &labels, &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn default_gamma_uses_total_variance() {
        let vectors = vec![vec![0.0, 2.0], vec![2.0, 0.0]];
        // Entries 0,2,2,0: mean 1, population variance 1, dim 2.
        assert!((default_gamma(&vectors) - 0.5).abs() < 1e-15);
        let constant = vec![vec![3.0], vec![3.0]];
        assert_eq!(default_gamma(&constant), 1.0);
    }

    #[test]
    fn single_class_input_is_rejected() {
        let vectors = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            svm_train(&vectors, &[1, 1], &SvmParams::default()),
            Err(Error::Data(_))
        ));
        assert!(matches!(
            svm_train(&vectors, &[1, 2], &SvmParams::default()),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn text_svm_trains_and_round_trips_through_container() {
        let table = EmbeddingTable::new(vec![
            ("calm".into(), vec![0.0, 0.1]),
            ("quiet".into(), vec![0.2, 0.0]),
            ("deadline".into(), vec![4.0, 4.1]),
            ("panic".into(), vec![4.2, 3.9]),
        ])
        .unwrap();
        let utterances = vec![
            RawUtterance::new("calm quiet calm", 0, Source::Interview),
            RawUtterance::new("quiet calm", 0, Source::Interview),
            RawUtterance::new("deadline panic", 1, Source::Interview),
            RawUtterance::new("panic deadline panic", 1, Source::Interview),
            RawUtterance::new("xyzzy unknown words", 0, Source::Interview),
        ];
        let params = SvmParams {
            gamma: Some(0.5),
            ..SvmParams::default()
        };
        let (svm, skipped) = TextSvm::train(&utterances, table, &params).unwrap();
        assert_eq!(skipped, 1);
        assert_eq!(svm.predict_text("calm quiet").unwrap(), 0);
        assert_eq!(svm.predict_text("deadline panic").unwrap(), 1);

        let file = svm.to_model_file();
        let back = TextSvm::from_model_file(&file).unwrap();
        assert_eq!(back, svm);
        assert_eq!(
            back.predict_text("deadline panic").unwrap(),
            svm.predict_text("deadline panic").unwrap()
        );
    }
}
