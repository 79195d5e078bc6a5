#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "s2v/query.hpp"
#include "s2v/token.hpp"
#include "s2v/trainer.hpp"

namespace s2v {

// One planted meaning of an ambiguous surface: a label, the context
// vocabulary that only ever co-occurs with this sense, and how often the
// sense is sampled.
struct PlantedSense {
  std::string label;
  std::vector<std::string> context_vocab;
  double mix_weight = 0.0;
};

struct PlantedWord {
  std::string surface;
  std::vector<PlantedSense> senses;
};

// Declarative recipe for a synthetic polysemy corpus. Context vocabularies
// are pairwise disjoint (and disjoint from the background), which is what
// makes purity an exact oracle rather than a heuristic.
struct PlantedCorpusSpec {
  std::vector<PlantedWord> ambiguous_words;
  std::vector<std::string> background_vocab;
  std::uint64_t sentences = 50000;
  std::uint32_t sentence_length = 8;
  std::uint64_t seed = 1;

  void validate() const;  // throws DataError

  static PlantedCorpusSpec default_spec();
  static PlantedCorpusSpec parse(std::istream& in);
  void write(std::ostream& out) const;
};

// Deterministic generation: each sentence carries exactly one ambiguous
// occurrence whose in-window neighbors come from the sampled sense's context
// vocabulary (labeled WORD, with a few labeled distractors mixed in).
std::vector<Document> generate_planted_corpus(const PlantedCorpusSpec& spec);

// The baseline twin: every label replaced by WORD.
std::vector<Document> strip_labels(std::vector<Document> docs);

struct SensePurity {
  std::string label;
  double purity = 0.0;  // fraction of top-k neighbors from this sense's context vocab
};

struct SensePairMetrics {
  std::string label_a;
  std::string label_b;
  double cross_sense_cosine = 0.0;
  double neighbor_jaccard = 0.0;
};

struct SurfaceReport {
  std::string surface;
  bool insufficient_data = false;
  std::vector<SensePurity> purities;
  std::vector<SensePairMetrics> pairs;  // empty in baseline mode
};

struct SeparationReport {
  std::size_t k = 10;
  std::vector<SurfaceReport> surfaces;
};

enum class EvalMode { Sense, Baseline };

// Sense mode scores each planted sense vector; baseline mode scores the
// single merged (surface|WORD) vector against every planted context set.
SeparationReport separation_report(const EmbeddingModel& model,
                                   const PlantedCorpusSpec& spec, std::size_t k,
                                   EvalMode mode);

void print_separation_report(const SeparationReport& report, std::ostream& out,
                             bool machine);

// Held-out accuracy of a single-layer logistic probe on (feature, class)
// pairs with a fixed 80/20 split. Deterministic for a fixed seed. Throws if
// any class has fewer than 10 test examples.
double logistic_probe_accuracy(const std::vector<std::vector<float>>& features,
                               const std::vector<std::uint32_t>& classes,
                               std::uint32_t num_classes, std::uint64_t seed);

struct ProbeResult {
  double sense_accuracy = 0.0;
  double baseline_accuracy = 0.0;
  double error_reduction = 0.0;  // (sense - baseline) / (1 - baseline)
};

// Token-level classification probe standing in for the downstream-consumer
// experiment: predict the planted sense class of each ambiguous occurrence
// from the embedding the model supplies for it (gold-label indexed; the
// baseline has only its single vector per surface).
ProbeResult downstream_probe(const EmbeddingModel& sense_model,
                             const EmbeddingModel& baseline_model,
                             const PlantedCorpusSpec& spec, std::uint64_t probe_seed);

}  // namespace s2v
