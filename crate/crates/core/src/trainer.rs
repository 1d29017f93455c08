//! Joint training of the linear emission scorer and the transition matrix by
//! mini-batch gradient descent on summed sentence NLL, with dev-set model
//! selection.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{EmissionMatrix, Sentence};
use crate::crf::{self, TransitionMatrix};
use crate::encoder::{FeatureVocabulary, LinearScorerParams};
use crate::error::{Error, Result};
use crate::eval::{entity_prf, AnnotatedSentence};
use crate::tagscheme::{tags_to_entities, TagSequence, NUM_TAGS};

/// Trained tagger: feature vocabulary, emission weights and transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub vocab: FeatureVocabulary,
    pub weights: LinearScorerParams,
    pub transitions: TransitionMatrix,
}

impl Model {
    /// All-zero parameters over `vocab`.
    pub fn zeros(vocab: FeatureVocabulary) -> Self {
        let weights = LinearScorerParams::zeros(vocab.len());
        Self {
            vocab,
            weights,
            transitions: TransitionMatrix::zeros(),
        }
    }

    /// Fails only if the weights overflow when summed.
    pub fn emissions(&self, sentence: &Sentence) -> Result<EmissionMatrix> {
        crate::encoder::score_sentence(sentence, &self.weights, &self.vocab)
    }

    /// Viterbi path over the model's own emissions.
    pub fn tag(&self, sentence: &Sentence, constrain_bio: bool) -> Result<TagSequence> {
        Ok(self.tag_emissions(&self.emissions(sentence)?, constrain_bio))
    }

    /// Viterbi path over externally supplied emissions with this model's
    /// transitions.
    pub fn tag_emissions(&self, emissions: &EmissionMatrix, constrain_bio: bool) -> TagSequence {
        TagSequence::new(
            emissions.sentence_id.clone(),
            crf::viterbi_decode(emissions, &self.transitions, constrain_bio),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Learning rate for epochs before `decay_epoch`.
    pub initial_rate: f64,
    /// Learning rate from `decay_epoch` (1-based) onward.
    pub decayed_rate: f64,
    pub decay_epoch: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            initial_rate: 0.5,
            decayed_rate: 0.1,
            decay_epoch: 2,
            batch_size: 16,
            seed: 0,
            l2: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1"));
        }
        if !(self.initial_rate > 0.0 && self.decayed_rate > 0.0)
            || !self.initial_rate.is_finite()
            || !self.decayed_rate.is_finite()
        {
            return Err(Error::InvalidConfig("learning rates must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch size must be at least 1"));
        }
        if !self.l2.is_finite() || self.l2 < 0.0 {
            return Err(Error::InvalidConfig("l2 must be non-negative"));
        }
        Ok(())
    }

    /// Rate for a 1-based epoch number.
    pub fn rate(&self, epoch: usize) -> f64 {
        if epoch < self.decay_epoch {
            self.initial_rate
        } else {
            self.decayed_rate
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainReport {
    /// Summed sentence NLL per epoch, accumulated over the epoch's batches
    /// before each batch's update.
    pub train_nll: Vec<f64>,
    /// Dev entity F1 (percent) after each epoch.
    pub dev_f1: Vec<f64>,
    /// Parameter updates performed per epoch.
    pub updates: Vec<usize>,
    /// 0-based index of the epoch whose parameters were kept.
    pub selected_epoch: usize,
}

/// Progress handed to the observer after each epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    /// 1-based.
    pub epoch: usize,
    pub train_nll: f64,
    pub dev_f1: f64,
    pub best_so_far: bool,
}

/// Dev entity F1 of `model` using BIO-constrained decoding.
pub fn evaluate_dev(model: &Model, dev: &[(Sentence, TagSequence)]) -> Result<f64> {
    let mut pred = Vec::with_capacity(dev.len());
    let mut gold = Vec::with_capacity(dev.len());
    for (s, tags) in dev {
        let decoded = model.tag(s, true)?;
        pred.push(AnnotatedSentence::new(s.id.clone(), tags_to_entities(s, &decoded), vec![]));
        gold.push(AnnotatedSentence::new(s.id.clone(), tags_to_entities(s, tags), vec![]));
    }
    Ok(entity_prf(&pred, &gold).overall.f1)
}

pub fn train(
    corpus: &[(Sentence, TagSequence)],
    dev: &[(Sentence, TagSequence)],
    config: &TrainConfig,
) -> Result<(Model, TrainReport)> {
    train_with_observer(corpus, dev, config, |_| {})
}

/// Trains from zero parameters. Shuffling is driven only by `config.seed`,
/// so equal inputs give bit-identical results. Returns the parameters from
/// the epoch with the highest dev F1 (earliest on ties).
pub fn train_with_observer<F>(
    corpus: &[(Sentence, TagSequence)],
    dev: &[(Sentence, TagSequence)],
    config: &TrainConfig,
    mut observe: F,
) -> Result<(Model, TrainReport)>
where
    F: FnMut(&EpochStats),
{
    config.validate()?;
    if corpus.is_empty() || dev.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    for (s, t) in corpus.iter().chain(dev) {
        if s.len() != t.len() {
            return Err(Error::DimensionMismatch {
                expected: s.len(),
                found: t.len(),
            });
        }
    }

    let vocab = FeatureVocabulary::build(corpus.iter().map(|(s, _)| s));
    let active: Vec<Vec<Vec<usize>>> = corpus.iter().map(|(s, _)| vocab.featurize(s)).collect();
    let mut model = Model::zeros(vocab);
    let mut best: Option<(f64, Model)> = None;
    let mut report = TrainReport {
        train_nll: Vec::new(),
        dev_f1: Vec::new(),
        updates: Vec::new(),
        selected_epoch: 0,
    };

    let m = model.vocab.len();
    let mut grad_w = vec![0.0; m * NUM_TAGS];
    let mut touched = vec![false; m];
    let mut touched_list: Vec<usize> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..corpus.len()).collect();

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let rate = config.rate(epoch);
        let mut epoch_nll = 0.0;
        let mut updates = 0;
        for batch in order.chunks(config.batch_size) {
            let mut grad_a = TransitionMatrix::zeros();
            for &idx in batch {
                let (sentence, gold) = &corpus[idx];
                let emissions = model
                    .weights
                    .score_indices(&sentence.id, &active[idx])
                    .map_err(|_| Error::NonFiniteLoss(format!("emission scores on sentence `{}`", sentence.id)))?;
                let (loss, g) = crf::nll_with_gradient(&emissions, &model.transitions, &gold.tags)?;
                if !loss.is_finite() {
                    return Err(Error::NonFiniteLoss(format!("loss on sentence `{}`", sentence.id)));
                }
                epoch_nll += loss;
                for (ga, gi) in grad_a.iter_mut().zip(g.transitions.iter()) {
                    *ga += gi;
                }
                for (i, feats) in active[idx].iter().enumerate() {
                    let row = &g.emissions[i * NUM_TAGS..(i + 1) * NUM_TAGS];
                    for &f in feats {
                        if !touched[f] {
                            touched[f] = true;
                            touched_list.push(f);
                        }
                        for (w, r) in grad_w[f * NUM_TAGS..(f + 1) * NUM_TAGS].iter_mut().zip(row) {
                            *w += r;
                        }
                    }
                }
            }

            let scale = rate / batch.len() as f64;
            let decay = 1.0 - rate * config.l2;
            if config.l2 > 0.0 {
                for w in model.weights.as_mut_slice() {
                    *w *= decay;
                }
            }
            let weights = model.weights.as_mut_slice();
            for &f in &touched_list {
                for t in 0..NUM_TAGS {
                    weights[f * NUM_TAGS + t] -= scale * grad_w[f * NUM_TAGS + t];
                    grad_w[f * NUM_TAGS + t] = 0.0;
                }
                touched[f] = false;
            }
            touched_list.clear();
            for (a, g) in model.transitions.iter_mut().zip(grad_a.iter()) {
                *a = *a * if config.l2 > 0.0 { decay } else { 1.0 } - scale * g;
            }
            updates += 1;
        }
        if !epoch_nll.is_finite() {
            return Err(Error::NonFiniteLoss(format!("training loss in epoch {epoch}")));
        }

        if !model.transitions.is_finite() || model.weights.as_slice().iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFiniteLoss(format!("parameters after epoch {epoch}")));
        }
        let f1 = evaluate_dev(&model, dev).map_err(|e| match e {
            Error::NonFinite { .. } => Error::NonFiniteLoss(format!("dev emission scores after epoch {epoch}")),
            other => other,
        })?;
        let improved = best.as_ref().is_none_or(|(b, _)| f1 > *b);
        if improved {
            best = Some((f1, model.clone()));
            report.selected_epoch = epoch - 1;
        }
        report.train_nll.push(epoch_nll);
        report.dev_f1.push(f1);
        report.updates.push(updates);
        observe(&EpochStats {
            epoch,
            train_nll: epoch_nll,
            dev_f1: f1,
            best_so_far: improved,
        });
    }

    let (_, selected) = best.expect("at least one epoch ran");
    Ok((selected, report))
}
