#include "s2v/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "s2v/errors.hpp"

namespace s2v {

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Cbow: return "cbow";
    case ModelKind::SkipGram: return "sg";
    case ModelKind::StructuredSkipGram: return "ssg";
  }
  return "?";
}

std::optional<ModelKind> model_kind_from_string(std::string_view name) {
  if (name == "cbow") return ModelKind::Cbow;
  if (name == "sg" || name == "skipgram") return ModelKind::SkipGram;
  if (name == "ssg" || name == "structured-skipgram") return ModelKind::StructuredSkipGram;
  return std::nullopt;
}

void TrainConfig::validate() const {
  if (dim < 1) throw DataError("embedding dimension must be at least 1");
  if (window < 1) throw DataError("window must be at least 1");
  if (epochs < 1) throw DataError("epochs must be at least 1");
  if (!(alpha0 > 0.0)) throw DataError("initial learning rate must be positive");
  if (sample < 0.0) throw DataError("subsample threshold must be non-negative");
  if (min_count < 1) throw DataError("min-count must be at least 1");
  if (workers < 1) throw DataError("worker count must be at least 1");
  if (!(negative_power > 0.0 && negative_power <= 1.0)) {
    throw DataError("negative-sampling power must be in (0, 1]");
  }
}

std::size_t EmbeddingModel::matrix_for_offset(int offset) const {
  if (config.model != ModelKind::StructuredSkipGram) return 0;
  int w = static_cast<int>(config.window);
  if (offset == 0 || offset < -w || offset > w) {
    throw std::logic_error("position offset " + std::to_string(offset) +
                           " outside window " + std::to_string(w));
  }
  return offset < 0 ? static_cast<std::size_t>(offset + w)
                    : static_cast<std::size_t>(w + offset - 1);
}

bool EmbeddingModel::all_finite() const {
  auto finite = [](const std::vector<float>& m) {
    return std::all_of(m.begin(), m.end(), [](float x) { return std::isfinite(x); });
  };
  if (!finite(input)) return false;
  for (const auto& m : output) {
    if (!finite(m)) return false;
  }
  return true;
}

EmbeddingModel init_model(Vocabulary vocab, TrainConfig config) {
  config.validate();
  if (vocab.empty()) throw DataError("cannot initialize a model on an empty vocabulary");

  const std::size_t v = vocab.size();
  const std::size_t dim = config.dim;
  const std::size_t matrices =
      config.model == ModelKind::StructuredSkipGram ? 2ULL * config.window : 1ULL;
  const std::size_t bytes = v * dim * (1 + matrices) * sizeof(float);
  if (bytes > config.memory_budget_bytes) {
    throw DataError("model needs " + std::to_string(bytes / (1 << 20)) +
                    " MiB (vocab " + std::to_string(v) + " x dim " +
                    std::to_string(dim) + " x " + std::to_string(1 + matrices) +
                    " matrices) but the memory budget is " +
                    std::to_string(config.memory_budget_bytes / (1 << 20)) + " MiB");
  }

  EmbeddingModel model;
  model.vocab = std::move(vocab);
  model.config = config;
  model.input.resize(v * dim);
  Rng rng(config.seed);
  const double inv_dim = 1.0 / static_cast<double>(dim);
  for (auto& x : model.input) {
    x = static_cast<float>((rng.uniform01() - 0.5) * inv_dim);
  }
  model.output.assign(matrices, std::vector<float>(v * dim, 0.0f));
  return model;
}

double sigmoid(double x) {
  x = std::clamp(x, -30.0, 30.0);
  return 1.0 / (1.0 + std::exp(-x));
}

namespace {

double dot(std::span<const float> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// One logistic target: accumulates the loss term, the output-row gradient and
// this target's contribution to the hidden-side gradient e.
void logistic_target(std::span<const double> hidden, std::span<const float> out_row,
                     bool positive, double& loss, std::vector<double>& out_grad,
                     std::vector<double>& e) {
  const double x = dot(out_row, hidden);
  const double s = sigmoid(x);
  loss += positive ? -std::log(std::max(s, 1e-30))
                   : -std::log(std::max(1.0 - s, 1e-30));
  const double g = s - (positive ? 1.0 : 0.0);  // dL/dx
  out_grad.resize(hidden.size());
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    out_grad[i] = g * hidden[i];
    e[i] += g * out_row[i];
  }
}

}  // namespace

SparseGradient sg_gradient(const EmbeddingModel& model, std::uint32_t center,
                           std::uint32_t context, int position_offset,
                           std::span<const std::uint32_t> negatives) {
  const std::size_t dim = model.dim();
  const std::size_t matrix = model.matrix_for_offset(position_offset);
  auto v = model.input_row(center);
  std::vector<double> hidden(v.begin(), v.end());

  SparseGradient grad;
  std::vector<double> e(dim, 0.0);
  grad.output_rows.reserve(negatives.size() + 1);

  auto add_target = [&](std::uint32_t row, bool positive) {
    SparseGradient::OutputGrad og{matrix, row, {}};
    logistic_target(hidden, model.output_row(matrix, row), positive, grad.loss,
                    og.grad, e);
    grad.output_rows.push_back(std::move(og));
  };
  add_target(context, true);
  for (auto neg : negatives) add_target(neg, false);

  grad.input_rows.push_back({center, std::move(e)});
  return grad;
}

SparseGradient cbow_gradient(const EmbeddingModel& model,
                             std::span<const std::uint32_t> context_rows,
                             std::uint32_t center,
                             std::span<const std::uint32_t> negatives) {
  if (context_rows.empty()) return {};
  const std::size_t dim = model.dim();
  std::vector<double> hidden(dim, 0.0);
  for (auto row : context_rows) {
    auto r = model.input_row(row);
    for (std::size_t i = 0; i < dim; ++i) hidden[i] += r[i];
  }
  const double inv_n = 1.0 / static_cast<double>(context_rows.size());
  for (auto& x : hidden) x *= inv_n;

  SparseGradient grad;
  std::vector<double> e(dim, 0.0);
  grad.output_rows.reserve(negatives.size() + 1);
  auto add_target = [&](std::uint32_t row, bool positive) {
    SparseGradient::OutputGrad og{0, row, {}};
    logistic_target(hidden, model.output_row(0, row), positive, grad.loss, og.grad, e);
    grad.output_rows.push_back(std::move(og));
  };
  add_target(center, true);
  for (auto neg : negatives) add_target(neg, false);

  // The mean spreads the hidden gradient evenly: every contributing context
  // row receives the same e/n.
  std::vector<double> per_row(dim);
  for (std::size_t i = 0; i < dim; ++i) per_row[i] = e[i] * inv_n;
  grad.input_rows.reserve(context_rows.size());
  for (auto row : context_rows) grad.input_rows.push_back({row, per_row});
  return grad;
}

void apply_gradient(EmbeddingModel& model, const SparseGradient& grad, double alpha,
                    double input_scale) {
  const double input_alpha = alpha * input_scale;
  for (const auto& ig : grad.input_rows) {
    auto row = model.input_row(ig.row);
    for (std::size_t i = 0; i < row.size(); ++i) {
      row[i] -= static_cast<float>(input_alpha * ig.grad[i]);
    }
  }
  for (const auto& og : grad.output_rows) {
    auto row = model.output_row(og.matrix, og.row);
    for (std::size_t i = 0; i < row.size(); ++i) {
      row[i] -= static_cast<float>(alpha * og.grad[i]);
    }
  }
}

namespace {

// Draws `count` negatives; a draw equal to the positive target is redrawn
// once and then skipped, so rare senses do not get oversampled.
void draw_negatives(const NegativeTable& table, std::uint32_t positive,
                    std::uint32_t count, Rng& rng, std::vector<std::uint32_t>& out) {
  out.clear();
  for (std::uint32_t k = 0; k < count; ++k) {
    std::uint32_t t = table.sample(rng);
    if (t == positive) {
      t = table.sample(rng);
      if (t == positive) continue;
    }
    out.push_back(t);
  }
}

}  // namespace

double train_pair_sg(EmbeddingModel& model, std::uint32_t center, std::uint32_t context,
                     int position_offset, double alpha, const NegativeTable& table,
                     Rng& rng) {
  std::vector<std::uint32_t> negatives;
  negatives.reserve(model.config.negatives);
  draw_negatives(table, context, model.config.negatives, rng, negatives);
  SparseGradient grad = sg_gradient(model, center, context, position_offset, negatives);
  apply_gradient(model, grad, alpha);
  return grad.loss;
}

double train_window_cbow(EmbeddingModel& model, std::span<const std::uint32_t> sentence,
                         std::size_t center_pos, std::uint32_t effective_window,
                         double alpha, const NegativeTable& table, Rng& rng) {
  std::vector<std::uint32_t> context;
  const std::size_t lo =
      center_pos >= effective_window ? center_pos - effective_window : 0;
  const std::size_t hi =
      std::min(sentence.size(), center_pos + effective_window + 1);
  for (std::size_t p = lo; p < hi; ++p) {
    if (p != center_pos) context.push_back(sentence[p]);
  }
  if (context.empty()) return 0.0;

  std::vector<std::uint32_t> negatives;
  negatives.reserve(model.config.negatives);
  draw_negatives(table, sentence[center_pos], model.config.negatives, rng, negatives);
  SparseGradient grad = cbow_gradient(model, context, sentence[center_pos], negatives);
  // Every contributing context row takes the full hidden-side gradient.
  apply_gradient(model, grad, alpha, static_cast<double>(context.size()));
  return grad.loss;
}

namespace {

struct SharedProgress {
  std::mutex mutex;
  double loss_sum = 0.0;
  std::uint64_t loss_count = 0;
  double reported_loss_sum = 0.0;
  std::uint64_t reported_loss_count = 0;
  std::uint64_t next_report = 0;
  std::vector<double> epoch_loss_sum;
  std::vector<std::uint64_t> epoch_loss_count;
};

}  // namespace

EmbeddingModel train(const CorpusSource& corpus, Vocabulary vocab, TrainConfig config,
                     const ProgressFn& progress, TrainStats* stats) {
  config.validate();
  EmbeddingModel model = init_model(std::move(vocab), config);
  const NegativeTable table(model.vocab, config.negative_power);
  const std::uint64_t total = model.vocab.total_train_tokens();
  if (total == 0) throw DataError("vocabulary reports zero trainable tokens");

  const double denom = static_cast<double>(config.epochs) * static_cast<double>(total);
  const bool dynamic = config.effective_dynamic_window();

  std::atomic<std::uint64_t> tokens_processed{0};
  std::atomic<std::uint64_t> skipped_unknown{0};
  SharedProgress shared;
  shared.next_report = config.progress_interval;
  shared.epoch_loss_sum.assign(config.epochs, 0.0);
  shared.epoch_loss_count.assign(config.epochs, 0);

  auto alpha_at = [&](std::uint64_t tokens) {
    double a = config.alpha0 * (1.0 - static_cast<double>(tokens) / denom);
    return std::max(a, config.alpha0 * 1e-4);
  };

  auto worker_body = [&](std::uint32_t worker_id) {
    Rng rng(mix_seed(config.seed, 1 + worker_id));
    std::vector<std::uint32_t> ids;
    for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
      std::uint64_t sentence_ordinal = 0;
      corpus.for_each_document([&](Document&& doc) {
        for (const auto& sentence : doc.sentences) {
          if (sentence_ordinal++ % config.workers != worker_id) continue;

          ids.clear();
          std::uint64_t in_vocab = 0;
          std::uint64_t unknown = 0;
          for (const auto& tok : sentence) {
            auto idx = model.vocab.find(tok.key());
            if (!idx) {
              ++unknown;
              continue;
            }
            ++in_vocab;
            if (config.sample > 0.0) {
              double keep = subsample_keep_prob(model.vocab.entry(*idx).count, total,
                                                config.sample);
              if (rng.uniform01() >= keep) continue;
            }
            ids.push_back(*idx);
          }
          if (unknown) skipped_unknown.fetch_add(unknown, std::memory_order_relaxed);
          if (in_vocab == 0) continue;
          const std::uint64_t tokens_now =
              tokens_processed.fetch_add(in_vocab, std::memory_order_relaxed) + in_vocab;
          const double alpha = alpha_at(tokens_now);

          double sent_loss = 0.0;
          std::uint64_t sent_updates = 0;
          for (std::size_t pos = 0; pos < ids.size(); ++pos) {
            const std::uint32_t b =
                dynamic ? static_cast<std::uint32_t>(rng.below(config.window)) + 1
                        : config.window;
            if (config.model == ModelKind::Cbow) {
              sent_loss += train_window_cbow(model, ids, pos, b, alpha, table, rng);
              ++sent_updates;
            } else {
              const std::size_t lo = pos >= b ? pos - b : 0;
              const std::size_t hi = std::min(ids.size(), pos + b + 1);
              for (std::size_t q = lo; q < hi; ++q) {
                if (q == pos) continue;
                const int offset = static_cast<int>(q) - static_cast<int>(pos);
                sent_loss +=
                    train_pair_sg(model, ids[pos], ids[q], offset, alpha, table, rng);
                ++sent_updates;
              }
            }
          }

          std::lock_guard<std::mutex> lock(shared.mutex);
          shared.loss_sum += sent_loss;
          shared.loss_count += sent_updates;
          shared.epoch_loss_sum[epoch] += sent_loss;
          shared.epoch_loss_count[epoch] += sent_updates;
          if (progress && config.progress_interval > 0 &&
              tokens_now >= shared.next_report) {
            while (shared.next_report <= tokens_now) {
              shared.next_report += config.progress_interval;
            }
            const std::uint64_t n = shared.loss_count - shared.reported_loss_count;
            TrainProgress p;
            p.tokens_processed = tokens_now;
            p.current_alpha = alpha_at(tokens_now);
            p.running_loss =
                n ? (shared.loss_sum - shared.reported_loss_sum) / static_cast<double>(n)
                  : 0.0;
            shared.reported_loss_sum = shared.loss_sum;
            shared.reported_loss_count = shared.loss_count;
            progress(p);
          }
        }
      });
    }
  };

  if (config.workers == 1) {
    worker_body(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(config.workers);
    for (std::uint32_t w = 0; w < config.workers; ++w) {
      threads.emplace_back(worker_body, w);
    }
    for (auto& t : threads) t.join();
  }

  if (tokens_processed.load() == 0) {
    throw DataError("no trainable tokens: the corpus shares no keys with the vocabulary");
  }
  if (!model.all_finite()) {
    throw std::logic_error("model contains non-finite parameters after training");
  }
  if (stats) {
    stats->tokens_processed = tokens_processed.load();
    stats->skipped_unknown = skipped_unknown.load();
    stats->epoch_mean_loss.clear();
    for (std::uint32_t e = 0; e < config.epochs; ++e) {
      stats->epoch_mean_loss.push_back(
          shared.epoch_loss_count[e]
              ? shared.epoch_loss_sum[e] / static_cast<double>(shared.epoch_loss_count[e])
              : 0.0);
    }
  }
  return model;
}

}  // namespace s2v
