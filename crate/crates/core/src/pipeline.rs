//! End-to-end trainable models over corpora, including the three composite
//! pipelines, and their container (de)serialization.
//!
//! Every model here trains on a labeled corpus and predicts a
//! [`ProbabilityMatrix`] for an evaluation corpus sharing the same label
//! registry. The composite pipelines follow fixed recipes:
//!
//! * **safina** — soft vote of a character 5-gram language model over
//!   word-duplicated text, a multinomial NB over 4-to-6 char n-gram counts
//!   of word-duplicated text, and a multinomial NB over word unigrams of
//!   the raw text.
//! * **mawdoo3** — stage 1 trains MNB, logistic regression, and a dummy on
//!   word TF-IDF; their out-of-fold probability rows (5-fold, seeded) are
//!   stacked with the TF-IDF block and feed stage 2 (MNB one-vs-rest, a
//!   hinge-loss linear classifier, Bernoulli NB, KNN, dummy), combined by
//!   hard vote. Out-of-fold rows are used on the training side so stage 2
//!   never sees probabilities produced by models that were fit on the very
//!   examples being described.
//! * **just** — the training set is first balanced by shuffle
//!   augmentation; per example, the per-class language-model row is
//!   concatenated with word TF-IDF and char 2-to-5-gram TF-IDF, and a
//!   multinomial NB with one-vs-rest strategy produces the final row.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::augment::{balance_by_shuffle, AugmentationConfig};
use crate::classifiers::{
    train_charlm, train_dummy, train_knn, train_linear, train_mlp, train_nb, train_nb_ovr,
    ClassConditionalLm, DummyModel, KnnModel, LinearConfig, LinearLoss, LinearModel, MlpConfig,
    MlpModel, NbKind, NbModel, NbOvrModel,
};
use crate::container::ModelContainer;
use crate::corpus::Corpus;
use crate::embedding::{pool_embedding, EmbeddingTable};
use crate::ensemble::{argmax_labels, soft_vote, Predictions};
use crate::error::{Error, Result};
use crate::features::{
    count_transform, stack_probability_features, tfidf_transform, tokenized_docs, SparseVector,
    Vocabulary,
};
use crate::probability::ProbabilityMatrix;
use crate::scalar::{from_f64, Scalar};
use crate::text::{char_ngram_range, duplicate_words, tokenize};

/// Character n-gram range of the safina NB component.
const SAFINA_CHAR_RANGE: (usize, usize) = (4, 6);
/// Character n-gram range of the just TF-IDF block.
const JUST_CHAR_RANGE: (usize, usize) = (2, 5);
/// Folds used for out-of-fold stacking in the mawdoo3 pipeline.
const STACKING_FOLDS: usize = 5;

// Seed salts keep independent random streams per role.
const SALT_FOLDS: u64 = 0x01;
const SALT_STAGE1_LOGREG: u64 = 0x02;
const SALT_STAGE2_SVM: u64 = 0x03;
const SALT_AUGMENT: u64 = 0x04;

/// Shared hyperparameters for the composite pipelines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig<F> {
    pub seed: u64,
    /// Naive Bayes smoothing.
    pub alpha: F,
    /// L2 strength of the gradient-trained linear models.
    pub lambda: F,
    pub step: F,
    pub epochs: usize,
    pub batch_size: usize,
    pub knn_k: usize,
    pub lm_order: usize,
    pub word_min_df: usize,
    pub char_min_df: usize,
}

impl<F: Scalar> Default for PipelineConfig<F> {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            alpha: F::one(),
            lambda: from_f64(1e-4),
            step: from_f64(0.1),
            epochs: 30,
            batch_size: 32,
            knn_k: 5,
            lm_order: 5,
            word_min_df: 1,
            char_min_df: 2,
        }
    }
}

impl<F: Scalar> PipelineConfig<F> {
    fn linear_config(&self, salt: u64) -> LinearConfig<F> {
        LinearConfig {
            lambda: self.lambda,
            step: self.step,
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed: self.seed.wrapping_add(salt),
        }
    }
}

fn labeled_indices(c: &Corpus, stage: &'static str) -> Result<Vec<usize>> {
    c.label_indices().map_err(|e| e.in_stage(stage))
}

fn matrix_over<F: Scalar>(c: &Corpus, rows: Vec<Vec<F>>) -> Result<ProbabilityMatrix<F>> {
    ProbabilityMatrix::new(c.ids(), c.registry().labels().to_vec(), rows)
}

fn word_docs(c: &Corpus) -> Vec<Vec<String>> {
    tokenized_docs(&c.examples().iter().map(|e| e.text.clone()).collect::<Vec<_>>())
}

fn duplicated_char_docs(c: &Corpus, lo: usize, hi: usize) -> Result<Vec<Vec<String>>> {
    c.examples()
        .iter()
        .map(|e| char_ngram_range(&duplicate_words(&tokenize(&e.text)), lo, hi))
        .collect()
}

fn raw_char_docs(c: &Corpus, lo: usize, hi: usize) -> Result<Vec<Vec<String>>> {
    c.examples()
        .iter()
        .map(|e| char_ngram_range(&e.text, lo, hi))
        .collect()
}

// ---------------------------------------------------------------------------
// safina
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafinaModel<F> {
    lm: ClassConditionalLm,
    char_vocab: Vocabulary,
    char_nb: NbModel<F>,
    word_vocab: Vocabulary,
    word_nb: NbModel<F>,
}

pub fn train_safina<F: Scalar>(train: &Corpus, cfg: &PipelineConfig<F>) -> Result<SafinaModel<F>> {
    let y = labeled_indices(train, "safina")?;
    let k = train.registry().len();
    let (lo, hi) = SAFINA_CHAR_RANGE;

    let lm = train_charlm(train, cfg.lm_order, true).map_err(|e| e.in_stage("safina char-lm"))?;

    let char_docs = duplicated_char_docs(train, lo, hi).map_err(|e| e.in_stage("safina char-nb"))?;
    let char_vocab = Vocabulary::fit(&char_docs, cfg.char_min_df)
        .map_err(|e| e.in_stage("safina char-nb"))?;
    let char_x: Vec<SparseVector<F>> = char_docs
        .iter()
        .map(|d| count_transform(d, &char_vocab))
        .collect();
    let char_nb = train_nb(&char_x, &y, k, NbKind::Multinomial, cfg.alpha)
        .map_err(|e| e.in_stage("safina char-nb"))?;

    let word_docs = word_docs(train);
    let word_vocab =
        Vocabulary::fit(&word_docs, cfg.word_min_df).map_err(|e| e.in_stage("safina word-nb"))?;
    let word_x: Vec<SparseVector<F>> = word_docs
        .iter()
        .map(|d| count_transform(d, &word_vocab))
        .collect();
    let word_nb = train_nb(&word_x, &y, k, NbKind::Multinomial, cfg.alpha)
        .map_err(|e| e.in_stage("safina word-nb"))?;

    Ok(SafinaModel { lm, char_vocab, char_nb, word_vocab, word_nb })
}

impl<F: Scalar> SafinaModel<F> {
    /// The three component matrices (char LM, char NB, word NB).
    pub fn component_matrices(&self, eval: &Corpus) -> Result<[ProbabilityMatrix<F>; 3]> {
        let (lo, hi) = SAFINA_CHAR_RANGE;
        let lm_rows: Vec<Vec<F>> = eval
            .examples()
            .iter()
            .map(|e| self.lm.predict_proba_row(&e.text))
            .collect();
        let char_rows: Vec<Vec<F>> = eval
            .examples()
            .iter()
            .map(|e| {
                let grams = char_ngram_range(&duplicate_words(&tokenize(&e.text)), lo, hi)?;
                Ok(self.char_nb.predict_proba_row(&count_transform(&grams, &self.char_vocab)))
            })
            .collect::<Result<_>>()?;
        let word_rows: Vec<Vec<F>> = eval
            .examples()
            .iter()
            .map(|e| {
                let tokens = tokenize(&e.text).into_tokens();
                self.word_nb.predict_proba_row(&count_transform(&tokens, &self.word_vocab))
            })
            .collect();
        Ok([
            matrix_over(eval, lm_rows)?,
            matrix_over(eval, char_rows)?,
            matrix_over(eval, word_rows)?,
        ])
    }

    /// Soft vote of the three components.
    pub fn predict_proba(&self, eval: &Corpus) -> Result<ProbabilityMatrix<F>> {
        soft_vote(&self.component_matrices(eval)?).map_err(|e| e.in_stage("safina vote"))
    }
}

pub fn run_safina_pipeline<F: Scalar>(
    train: &Corpus,
    eval: &Corpus,
    cfg: &PipelineConfig<F>,
) -> Result<Predictions<F>> {
    let model = train_safina(train, cfg)?;
    Ok(argmax_labels(&model.predict_proba(eval)?))
}

// ---------------------------------------------------------------------------
// mawdoo3
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mawdoo3Model<F> {
    word_vocab: Vocabulary,
    stage1_mnb: NbModel<F>,
    stage1_logreg: LinearModel<F>,
    stage1_dummy: DummyModel<F>,
    stage2_mnb_ovr: NbOvrModel<F>,
    stage2_svm: LinearModel<F>,
    stage2_bnb: NbModel<F>,
    stage2_knn: KnnModel<F>,
    stage2_dummy: DummyModel<F>,
}

/// Deterministic fold assignment: a seeded shuffle of `0..n` chopped into
/// `folds` nearly equal chunks.
fn seeded_folds(n: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let base = n / folds;
    let extra = n % folds;
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let len = base + usize::from(f < extra);
        out.push(order[start..start + len].to_vec());
        start += len;
    }
    out
}

/// Out-of-fold probability rows for the three stage-1 learners.
fn stage1_oof_rows<F: Scalar>(
    xs: &[SparseVector<F>],
    y: &[usize],
    k: usize,
    cfg: &PipelineConfig<F>,
) -> Result<[Vec<Vec<F>>; 3]> {
    let n = xs.len();
    let uniform = vec![F::one() / crate::scalar::from_usize::<F>(k); k];
    let mut mnb_rows = vec![uniform.clone(); n];
    let mut lr_rows = vec![uniform.clone(); n];
    let mut dummy_rows = vec![uniform; n];

    for fold in seeded_folds(n, STACKING_FOLDS, cfg.seed.wrapping_add(SALT_FOLDS)) {
        if fold.is_empty() {
            continue;
        }
        let in_fold: std::collections::HashSet<usize> = fold.iter().copied().collect();
        let rest_idx: Vec<usize> = (0..n).filter(|i| !in_fold.contains(i)).collect();
        if rest_idx.is_empty() {
            continue; // single-fold degenerate case: keep uniform rows
        }
        let rest_x: Vec<SparseVector<F>> = rest_idx.iter().map(|&i| xs[i].clone()).collect();
        let rest_y: Vec<usize> = rest_idx.iter().map(|&i| y[i]).collect();

        let mnb = train_nb(&rest_x, &rest_y, k, NbKind::Multinomial, cfg.alpha)?;
        let lr = train_linear(
            &rest_x,
            &rest_y,
            k,
            LinearLoss::CrossEntropy,
            &cfg.linear_config(SALT_STAGE1_LOGREG),
        )?;
        let dummy = train_dummy::<F>(&rest_y, k)?;
        for &i in &fold {
            mnb_rows[i] = mnb.predict_proba_row(&xs[i]);
            lr_rows[i] = lr.predict_proba_row(&xs[i]);
            dummy_rows[i] = dummy.predict_proba_row();
        }
    }
    Ok([mnb_rows, lr_rows, dummy_rows])
}

pub fn train_mawdoo3<F: Scalar>(
    train: &Corpus,
    cfg: &PipelineConfig<F>,
) -> Result<Mawdoo3Model<F>> {
    let y = labeled_indices(train, "mawdoo3 stage-1")?;
    let k = train.registry().len();

    let docs = word_docs(train);
    let word_vocab =
        Vocabulary::fit(&docs, cfg.word_min_df).map_err(|e| e.in_stage("mawdoo3 stage-1"))?;
    let xs: Vec<SparseVector<F>> = docs.iter().map(|d| tfidf_transform(d, &word_vocab)).collect();

    // Stage-1 models on the full training set (used at prediction time).
    let stage1_mnb = train_nb(&xs, &y, k, NbKind::Multinomial, cfg.alpha)
        .map_err(|e| e.in_stage("mawdoo3 stage-1"))?;
    let stage1_logreg = train_linear(
        &xs,
        &y,
        k,
        LinearLoss::CrossEntropy,
        &cfg.linear_config(SALT_STAGE1_LOGREG),
    )
    .map_err(|e| e.in_stage("mawdoo3 stage-1"))?;
    let stage1_dummy =
        train_dummy::<F>(&y, k).map_err(|e| e.in_stage("mawdoo3 stage-1"))?;

    // Out-of-fold rows feed stage 2.
    let [mnb_rows, lr_rows, dummy_rows] =
        stage1_oof_rows(&xs, &y, k, cfg).map_err(|e| e.in_stage("mawdoo3 stacking"))?;
    let oof = [
        matrix_over(train, mnb_rows).map_err(|e| e.in_stage("mawdoo3 stacking"))?,
        matrix_over(train, lr_rows).map_err(|e| e.in_stage("mawdoo3 stacking"))?,
        matrix_over(train, dummy_rows).map_err(|e| e.in_stage("mawdoo3 stacking"))?,
    ];
    let stacked = stack_probability_features(&[&oof[0], &oof[1], &oof[2]], &xs)
        .map_err(|e| e.in_stage("mawdoo3 stacking"))?;

    let stage2_mnb_ovr = train_nb_ovr(&stacked, &y, k, NbKind::Multinomial, cfg.alpha)
        .map_err(|e| e.in_stage("mawdoo3 stage-2"))?;
    let stage2_svm = train_linear(
        &stacked,
        &y,
        k,
        LinearLoss::Hinge,
        &cfg.linear_config(SALT_STAGE2_SVM),
    )
    .map_err(|e| e.in_stage("mawdoo3 stage-2"))?;
    let stage2_bnb = train_nb(&stacked, &y, k, NbKind::Bernoulli, cfg.alpha)
        .map_err(|e| e.in_stage("mawdoo3 stage-2"))?;
    let stage2_knn = train_knn(&stacked, &y, k, cfg.knn_k.min(stacked.len()))
        .map_err(|e| e.in_stage("mawdoo3 stage-2"))?;
    let stage2_dummy = train_dummy::<F>(&y, k).map_err(|e| e.in_stage("mawdoo3 stage-2"))?;

    Ok(Mawdoo3Model {
        word_vocab,
        stage1_mnb,
        stage1_logreg,
        stage1_dummy,
        stage2_mnb_ovr,
        stage2_svm,
        stage2_bnb,
        stage2_knn,
        stage2_dummy,
    })
}

impl<F: Scalar> Mawdoo3Model<F> {
    /// Stage-2 hard-vote shares: entry `(i, c)` is the fraction of the
    /// five stage-2 voters that predicted class `c` for example `i`. The
    /// argmax of a share row (lowest index on ties) is exactly the
    /// hard-vote winner.
    pub fn predict_proba(&self, eval: &Corpus) -> Result<ProbabilityMatrix<F>> {
        let docs = word_docs(eval);
        let xs: Vec<SparseVector<F>> = docs
            .iter()
            .map(|d| tfidf_transform(d, &self.word_vocab))
            .collect();

        let k = self.stage1_mnb.n_classes();
        let stage1 = [
            matrix_over(eval, self.stage1_mnb.predict_proba_rows(&xs))?,
            matrix_over(eval, self.stage1_logreg.predict_proba_rows(&xs))?,
            matrix_over(eval, self.stage1_dummy.predict_proba_rows(xs.len()))?,
        ];
        let stacked = stack_probability_features(&[&stage1[0], &stage1[1], &stage1[2]], &xs)
            .map_err(|e| e.in_stage("mawdoo3 stacking"))?;

        let voters: [Vec<usize>; 5] = [
            stacked
                .iter()
                .map(|x| crate::classifiers::argmax(&self.stage2_mnb_ovr.predict_proba_row(x)))
                .collect(),
            stacked
                .iter()
                .map(|x| crate::classifiers::argmax(&self.stage2_svm.scores(x)))
                .collect(),
            stacked
                .iter()
                .map(|x| crate::classifiers::argmax(&self.stage2_bnb.predict_proba_row(x)))
                .collect(),
            stacked
                .iter()
                .map(|x| crate::classifiers::argmax(&self.stage2_knn.predict_proba_row(x)))
                .collect(),
            vec![self.stage2_dummy.label(); stacked.len()],
        ];

        let five = crate::scalar::from_usize::<F>(voters.len());
        let rows: Vec<Vec<F>> = (0..stacked.len())
            .map(|i| {
                let mut counts = vec![0usize; k];
                for v in &voters {
                    counts[v[i]] += 1;
                }
                counts
                    .into_iter()
                    .map(|c| crate::scalar::from_usize::<F>(c) / five)
                    .collect()
            })
            .collect();
        matrix_over(eval, rows).map_err(|e| e.in_stage("mawdoo3 vote"))
    }
}

pub fn run_mawdoo3_pipeline<F: Scalar>(
    train: &Corpus,
    eval: &Corpus,
    cfg: &PipelineConfig<F>,
) -> Result<Predictions<F>> {
    let model = train_mawdoo3(train, cfg)?;
    Ok(argmax_labels(&model.predict_proba(eval)?))
}

// ---------------------------------------------------------------------------
// just
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JustModel<F> {
    lm: ClassConditionalLm,
    word_vocab: Vocabulary,
    char_vocab: Vocabulary,
    ovr: NbOvrModel<F>,
}

pub fn train_just<F: Scalar>(train: &Corpus, cfg: &PipelineConfig<F>) -> Result<JustModel<F>> {
    let balanced = balance_by_shuffle(
        train,
        &AugmentationConfig::new(cfg.seed.wrapping_add(SALT_AUGMENT)),
    )
    .map_err(|e| e.in_stage("just augmentation"))?;
    let y = labeled_indices(&balanced, "just features")?;
    let k = balanced.registry().len();
    let (lo, hi) = JUST_CHAR_RANGE;

    let lm = train_charlm(&balanced, cfg.lm_order, false)
        .map_err(|e| e.in_stage("just char-lm"))?;

    let word_docs = word_docs(&balanced);
    let word_vocab =
        Vocabulary::fit(&word_docs, cfg.word_min_df).map_err(|e| e.in_stage("just features"))?;
    let char_docs = raw_char_docs(&balanced, lo, hi).map_err(|e| e.in_stage("just features"))?;
    let char_vocab =
        Vocabulary::fit(&char_docs, cfg.char_min_df).map_err(|e| e.in_stage("just features"))?;

    let xs = just_features(&balanced, &lm, &word_vocab, &char_vocab)?;
    let ovr = train_nb_ovr(&xs, &y, k, NbKind::Multinomial, cfg.alpha)
        .map_err(|e| e.in_stage("just classifier"))?;

    Ok(JustModel { lm, word_vocab, char_vocab, ovr })
}

fn just_features<F: Scalar>(
    c: &Corpus,
    lm: &ClassConditionalLm,
    word_vocab: &Vocabulary,
    char_vocab: &Vocabulary,
) -> Result<Vec<SparseVector<F>>> {
    let (lo, hi) = JUST_CHAR_RANGE;
    c.examples()
        .iter()
        .map(|e| {
            let lm_row = SparseVector::from_dense(&lm.predict_proba_row::<F>(&e.text));
            let tokens = tokenize(&e.text).into_tokens();
            let word = tfidf_transform(&tokens, word_vocab);
            let grams = char_ngram_range(&e.text, lo, hi)?;
            let ch = tfidf_transform(&grams, char_vocab);
            Ok(crate::features::concat_features(&[lm_row, word, ch]))
        })
        .collect()
}

impl<F: Scalar> JustModel<F> {
    pub fn predict_proba(&self, eval: &Corpus) -> Result<ProbabilityMatrix<F>> {
        let xs = just_features(eval, &self.lm, &self.word_vocab, &self.char_vocab)?;
        let rows: Vec<Vec<F>> = xs.iter().map(|x| self.ovr.predict_proba_row(x)).collect();
        matrix_over(eval, rows).map_err(|e| e.in_stage("just classifier"))
    }

    /// Stacked feature width: classes + word vocabulary + char vocabulary.
    pub fn feature_width(&self) -> usize {
        self.lm.n_classes() + self.word_vocab.len() + self.char_vocab.len()
    }
}

pub fn run_just_pipeline<F: Scalar>(
    train: &Corpus,
    eval: &Corpus,
    cfg: &PipelineConfig<F>,
) -> Result<Predictions<F>> {
    let model = train_just(train, cfg)?;
    Ok(argmax_labels(&model.predict_proba(eval)?))
}

// ---------------------------------------------------------------------------
// trainable model zoo and container round trip
// ---------------------------------------------------------------------------

/// Knobs consumed by [`TrainedTextModel::train`]; the pipeline block also
/// drives the single-model kinds (alpha, k, min_df, ...).
#[derive(Debug, Clone, Default)]
pub struct TrainOptions {
    pub pipeline: PipelineConfig<f64>,
    pub mlp: MlpConfig<f64>,
    /// Word-duplication preprocessing for the standalone `charlm` kind.
    pub charlm_duplicate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum ModelPayload {
    WordMnb { vocab: Vocabulary, model: NbModel<f64> },
    WordBnb { vocab: Vocabulary, model: NbModel<f64> },
    WordLogReg { vocab: Vocabulary, model: LinearModel<f64> },
    WordKnn { vocab: Vocabulary, model: KnnModel<f64> },
    Dummy { model: DummyModel<f64> },
    CharLm { model: ClassConditionalLm },
    EmbedLogReg { model: LinearModel<f64>, dim: usize },
    EmbedMlp { model: MlpModel<f64>, dim: usize },
    Safina(Box<SafinaModel<f64>>),
    Mawdoo3(Box<Mawdoo3Model<f64>>),
    Just(Box<JustModel<f64>>),
}

/// A trained model bound to the label registry it was trained with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedTextModel {
    labels: Vec<String>,
    payload: ModelPayload,
}

impl TrainedTextModel {
    /// Train the named kind on a labeled corpus. The embedding-backed
    /// kinds (`embed-logreg`, `embed-mlp`) need `embeddings`.
    pub fn train(
        kind: &str,
        train: &Corpus,
        opts: &TrainOptions,
        embeddings: Option<&EmbeddingTable<f64>>,
    ) -> Result<Self> {
        let cfg = &opts.pipeline;
        let y = train.label_indices()?;
        let k = train.registry().len();
        let labels = train.registry().labels().to_vec();

        let word_tfidf = |min_df: usize| -> Result<(Vocabulary, Vec<SparseVector<f64>>)> {
            let docs = word_docs(train);
            let vocab = Vocabulary::fit(&docs, min_df)?;
            let xs = docs.iter().map(|d| tfidf_transform(d, &vocab)).collect();
            Ok((vocab, xs))
        };
        let pooled = |table: Option<&EmbeddingTable<f64>>| -> Result<(usize, Vec<Vec<f64>>)> {
            let table = table.ok_or_else(|| {
                Error::invalid(format!("model kind {kind} requires an embedding table"))
            })?;
            let xs = train
                .examples()
                .iter()
                .map(|e| pool_embedding(&tokenize(&e.text), table))
                .collect();
            Ok((table.dim(), xs))
        };

        let payload = match kind {
            "mnb" => {
                let (vocab, xs) = word_tfidf(cfg.word_min_df)?;
                let model = train_nb(&xs, &y, k, NbKind::Multinomial, cfg.alpha)?;
                ModelPayload::WordMnb { vocab, model }
            }
            "bnb" => {
                let (vocab, xs) = word_tfidf(cfg.word_min_df)?;
                let model = train_nb(&xs, &y, k, NbKind::Bernoulli, cfg.alpha)?;
                ModelPayload::WordBnb { vocab, model }
            }
            "logreg" => {
                let (vocab, xs) = word_tfidf(cfg.word_min_df)?;
                let model = train_linear(
                    &xs,
                    &y,
                    k,
                    LinearLoss::CrossEntropy,
                    &cfg.linear_config(SALT_STAGE1_LOGREG),
                )?;
                ModelPayload::WordLogReg { vocab, model }
            }
            "knn" => {
                let (vocab, xs) = word_tfidf(cfg.word_min_df)?;
                let model = train_knn(&xs, &y, k, cfg.knn_k)?;
                ModelPayload::WordKnn { vocab, model }
            }
            "dummy" => ModelPayload::Dummy { model: train_dummy(&y, k)? },
            "charlm" => ModelPayload::CharLm {
                model: train_charlm(train, cfg.lm_order, opts.charlm_duplicate)?,
            },
            "embed-logreg" => {
                let (dim, dense) = pooled(embeddings)?;
                let xs: Vec<SparseVector<f64>> =
                    dense.iter().map(|v| SparseVector::from_dense(v)).collect();
                let model = train_linear(
                    &xs,
                    &y,
                    k,
                    LinearLoss::CrossEntropy,
                    &cfg.linear_config(SALT_STAGE1_LOGREG),
                )?;
                ModelPayload::EmbedLogReg { model, dim }
            }
            "embed-mlp" => {
                let (dim, dense) = pooled(embeddings)?;
                let model = train_mlp(&dense, &y, k, &opts.mlp)?;
                ModelPayload::EmbedMlp { model, dim }
            }
            "safina" => ModelPayload::Safina(Box::new(train_safina(train, cfg)?)),
            "mawdoo3" => ModelPayload::Mawdoo3(Box::new(train_mawdoo3(train, cfg)?)),
            "just" => ModelPayload::Just(Box::new(train_just(train, cfg)?)),
            other => return Err(Error::invalid(format!("unknown model kind {other}"))),
        };
        Ok(TrainedTextModel { labels, payload })
    }

    pub fn kind(&self) -> &'static str {
        match &self.payload {
            ModelPayload::WordMnb { .. } => "mnb",
            ModelPayload::WordBnb { .. } => "bnb",
            ModelPayload::WordLogReg { .. } => "logreg",
            ModelPayload::WordKnn { .. } => "knn",
            ModelPayload::Dummy { .. } => "dummy",
            ModelPayload::CharLm { .. } => "charlm",
            ModelPayload::EmbedLogReg { .. } => "embed-logreg",
            ModelPayload::EmbedMlp { .. } => "embed-mlp",
            ModelPayload::Safina(_) => "safina",
            ModelPayload::Mawdoo3(_) => "mawdoo3",
            ModelPayload::Just(_) => "just",
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Predict a probability matrix for an evaluation corpus. The corpus
    /// registry must match the training registry exactly.
    pub fn predict_proba(
        &self,
        eval: &Corpus,
        embeddings: Option<&EmbeddingTable<f64>>,
    ) -> Result<ProbabilityMatrix<f64>> {
        if eval.registry().labels() != self.labels.as_slice() {
            return Err(Error::invalid(
                "label registry does not match the one the model was trained with",
            ));
        }
        let word_rows = |vocab: &Vocabulary, f: &dyn Fn(&SparseVector<f64>) -> Vec<f64>| {
            let docs = word_docs(eval);
            docs.iter().map(|d| f(&tfidf_transform(d, vocab))).collect::<Vec<_>>()
        };
        let pooled = |table: Option<&EmbeddingTable<f64>>, dim: usize| -> Result<Vec<Vec<f64>>> {
            let table = table.ok_or_else(|| {
                Error::invalid(format!("model kind {} requires an embedding table", self.kind()))
            })?;
            if table.dim() != dim {
                return Err(Error::invalid(format!(
                    "embedding table dimension {} does not match the model's {dim}",
                    table.dim()
                )));
            }
            Ok(eval
                .examples()
                .iter()
                .map(|e| pool_embedding(&tokenize(&e.text), table))
                .collect())
        };

        match &self.payload {
            ModelPayload::WordMnb { vocab, model } | ModelPayload::WordBnb { vocab, model } => {
                matrix_over(eval, word_rows(vocab, &|x| model.predict_proba_row(x)))
            }
            ModelPayload::WordLogReg { vocab, model } => {
                matrix_over(eval, word_rows(vocab, &|x| model.predict_proba_row(x)))
            }
            ModelPayload::WordKnn { vocab, model } => {
                matrix_over(eval, word_rows(vocab, &|x| model.predict_proba_row(x)))
            }
            ModelPayload::Dummy { model } => {
                matrix_over(eval, model.predict_proba_rows(eval.len()))
            }
            ModelPayload::CharLm { model } => {
                let rows = eval
                    .examples()
                    .iter()
                    .map(|e| model.predict_proba_row(&e.text))
                    .collect();
                matrix_over(eval, rows)
            }
            ModelPayload::EmbedLogReg { model, dim } => {
                let rows = pooled(embeddings, *dim)?
                    .iter()
                    .map(|v| model.predict_proba_row(&SparseVector::from_dense(v)))
                    .collect();
                matrix_over(eval, rows)
            }
            ModelPayload::EmbedMlp { model, dim } => {
                let rows = pooled(embeddings, *dim)?
                    .iter()
                    .map(|v| model.predict_proba_row(v))
                    .collect();
                matrix_over(eval, rows)
            }
            ModelPayload::Safina(m) => m.predict_proba(eval),
            ModelPayload::Mawdoo3(m) => m.predict_proba(eval),
            ModelPayload::Just(m) => m.predict_proba(eval),
        }
    }

    /// Predicted labels via the argmax rule.
    pub fn predict(
        &self,
        eval: &Corpus,
        embeddings: Option<&EmbeddingTable<f64>>,
    ) -> Result<Predictions<f64>> {
        Ok(argmax_labels(&self.predict_proba(eval, embeddings)?))
    }

    /// Wrap into a sealed container; `hyperparameters` are informational.
    pub fn to_container(&self, hyperparameters: BTreeMap<String, String>) -> Result<ModelContainer> {
        let body = SealedBody { labels: self.labels.clone(), payload: self.payload.clone() };
        let payload = ron::to_string(&body)
            .map_err(|e| Error::invalid(format!("serialize model payload: {e}")))?;
        ModelContainer::seal(self.kind(), hyperparameters, payload)
    }

    /// Decode and validate a verified container.
    pub fn from_container(container: &ModelContainer) -> Result<Self> {
        container.verify()?;
        let body: SealedBody = ron::from_str(&container.payload)
            .map_err(|e| Error::invalid(format!("malformed model payload: {e}")))?;
        let model = TrainedTextModel { labels: body.labels, payload: body.payload };
        if model.kind() != container.model_kind {
            return Err(Error::invalid(format!(
                "container kind {} does not match payload kind {}",
                container.model_kind,
                model.kind()
            )));
        }
        Ok(model)
    }
}

#[derive(Serialize, Deserialize)]
struct SealedBody {
    labels: Vec<String>,
    payload: ModelPayload,
}
