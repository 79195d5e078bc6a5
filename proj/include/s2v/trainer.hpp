#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "s2v/corpus.hpp"
#include "s2v/rng.hpp"
#include "s2v/vocab.hpp"

namespace s2v {

enum class ModelKind : std::uint8_t { Cbow = 0, SkipGram = 1, StructuredSkipGram = 2 };

const char* to_string(ModelKind kind);
std::optional<ModelKind> model_kind_from_string(std::string_view name);

struct TrainConfig {
  std::uint32_t dim = 500;
  std::uint32_t window = 10;
  std::uint32_t negatives = 10;
  double sample = 1e-5;       // subsample threshold t; 0 disables
  std::uint32_t epochs = 3;
  std::uint32_t min_count = 10;
  double alpha0 = 0.025;
  ModelKind model = ModelKind::Cbow;
  std::uint32_t workers = 1;
  std::uint64_t seed = 1;
  // Unset means: on for CBOW/SG, off for structured skip-gram (so every
  // offset matrix sees all of its positions).
  std::optional<bool> dynamic_window;
  double negative_power = 0.75;
  std::uint64_t memory_budget_bytes = 4ULL << 30;
  std::uint64_t progress_interval = 100000;  // tokens between reports; 0 = off

  bool effective_dynamic_window() const {
    return dynamic_window.value_or(model != ModelKind::StructuredSkipGram);
  }
  void validate() const;  // throws DataError on a bad combination
};

// Sense embeddings (input matrix, one row per vocab entry) plus the output
// parameter block: a single matrix for CBOW/SG, one matrix per signed window
// offset for structured skip-gram. All parameters are 32-bit floats.
// Models loaded from text/binary files carry input vectors only.
class EmbeddingModel {
 public:
  Vocabulary vocab;
  TrainConfig config;
  std::vector<float> input;                 // [vocab_size x dim], row-major
  std::vector<std::vector<float>> output;   // each [vocab_size x dim]

  std::uint32_t dim() const { return config.dim; }
  std::size_t vocab_size() const { return vocab.size(); }

  std::span<float> input_row(std::uint32_t i) {
    return {input.data() + std::size_t(i) * config.dim, config.dim};
  }
  std::span<const float> input_row(std::uint32_t i) const {
    return {input.data() + std::size_t(i) * config.dim, config.dim};
  }
  std::span<float> output_row(std::size_t matrix, std::uint32_t i) {
    return {output[matrix].data() + std::size_t(i) * config.dim, config.dim};
  }
  std::span<const float> output_row(std::size_t matrix, std::uint32_t i) const {
    return {output[matrix].data() + std::size_t(i) * config.dim, config.dim};
  }

  // Output matrix selected by a training pair: always 0 for CBOW/SG; for
  // structured skip-gram offsets -window..-1,+1..+window map to 0..2*window-1.
  std::size_t matrix_for_offset(int offset) const;

  bool all_finite() const;
};

// Random sense-embedding init: input entries i.i.d. uniform in
// [-0.5/dim, +0.5/dim] drawn from config.seed; output block(s) zero.
EmbeddingModel init_model(Vocabulary vocab, TrainConfig config);

// Exact sigmoid with the argument clamped to [-30, 30].
double sigmoid(double x);

// Gradient of the negative-sampling loss at the current parameters, touching
// only the rows involved. apply_gradient() takes one SGD step: p -= alpha*g.
struct SparseGradient {
  double loss = 0.0;
  struct InputGrad {
    std::uint32_t row;
    std::vector<double> grad;
  };
  struct OutputGrad {
    std::size_t matrix;
    std::uint32_t row;
    std::vector<double> grad;
  };
  std::vector<InputGrad> input_rows;
  std::vector<OutputGrad> output_rows;
};

SparseGradient sg_gradient(const EmbeddingModel& model, std::uint32_t center,
                           std::uint32_t context, int position_offset,
                           std::span<const std::uint32_t> negatives);
SparseGradient cbow_gradient(const EmbeddingModel& model,
                             std::span<const std::uint32_t> context_rows,
                             std::uint32_t center,
                             std::span<const std::uint32_t> negatives);

// input_scale lets CBOW add the full hidden-side gradient back to every
// contributing context row (the lineage convention) while cbow_gradient
// itself stays the exact loss gradient.
void apply_gradient(EmbeddingModel& model, const SparseGradient& grad, double alpha,
                    double input_scale = 1.0);

// One (skip-gram or structured skip-gram) training pair: a positive update on
// (input[center], output[context]) plus drawn negatives. Returns the loss at
// the pre-update parameters.
double train_pair_sg(EmbeddingModel& model, std::uint32_t center, std::uint32_t context,
                     int position_offset, double alpha, const NegativeTable& table,
                     Rng& rng);

// One CBOW window update: mean of the in-window neighbors predicts the
// center. A window with no neighbors is a no-op returning zero loss.
double train_window_cbow(EmbeddingModel& model, std::span<const std::uint32_t> sentence,
                         std::size_t center_pos, std::uint32_t effective_window,
                         double alpha, const NegativeTable& table, Rng& rng);

struct TrainProgress {
  std::uint64_t tokens_processed = 0;
  double current_alpha = 0.0;
  double running_loss = 0.0;  // mean loss since the previous report
};
using ProgressFn = std::function<void(const TrainProgress&)>;

struct TrainStats {
  std::uint64_t tokens_processed = 0;   // in-vocab tokens seen (pre-subsampling)
  std::uint64_t skipped_unknown = 0;    // tokens whose key is not in the vocab
  std::vector<double> epoch_mean_loss;  // one entry per epoch
};

// Full SGD run over the corpus. Single-worker runs are byte-reproducible for
// a fixed seed; multi-worker runs race benignly on the shared matrices.
EmbeddingModel train(const CorpusSource& corpus, Vocabulary vocab, TrainConfig config,
                     const ProgressFn& progress = {}, TrainStats* stats = nullptr);

}  // namespace s2v
