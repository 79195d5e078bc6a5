#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "s2v/corpus.hpp"
#include "s2v/rng.hpp"
#include "s2v/token.hpp"

namespace s2v {

struct SenseEntry {
  std::string key;
  std::string surface;
  std::string label;
  std::uint64_t count = 0;
  std::uint32_t index = 0;
};

// Per-sense vocabulary in canonical order: descending count, ties broken
// lexicographically by key. Immutable once built.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Takes entries already in their final order (used by model loaders, where
  // file order is the canonical order); indices are reassigned densely.
  static Vocabulary from_entries(std::vector<SenseEntry> entries);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const SenseEntry& entry(std::uint32_t index) const { return entries_[index]; }
  const std::vector<SenseEntry>& entries() const { return entries_; }

  std::optional<std::uint32_t> find(std::string_view key) const;

  // All senses of a surface, in canonical order; empty for unknown surfaces.
  std::vector<std::uint32_t> senses_of(std::string_view surface) const;

  // Post-pruning, pre-subsampling token total (sum of entry counts).
  std::uint64_t total_train_tokens() const { return total_train_tokens_; }

  // "key<TAB>count" lines in canonical order.
  void dump(std::ostream& out) const;

 private:
  std::vector<SenseEntry> entries_;
  std::unordered_map<std::string, std::uint32_t> key_to_index_;
  std::unordered_map<std::string, std::vector<std::uint32_t>> surface_index_;
  std::uint64_t total_train_tokens_ = 0;
};

Vocabulary build_vocab(const CorpusSource& corpus, std::uint32_t min_count);
Vocabulary build_vocab(const std::vector<Document>& docs, std::uint32_t min_count);
Vocabulary build_vocab(const std::vector<SenseToken>& tokens, std::uint32_t min_count);

// Unigram negative-sampling table with P(i) proportional to count_i^power,
// realized as a Vose alias table: O(1) per draw, probabilities exact.
class NegativeTable {
 public:
  NegativeTable(const Vocabulary& vocab, double power = 0.75);

  std::uint32_t sample(Rng& rng) const;
  double probability(std::uint32_t index) const { return prob_[index]; }
  std::size_t size() const { return prob_.size(); }

 private:
  std::vector<double> prob_;           // exact normalized P(i)
  std::vector<double> accept_;         // alias acceptance thresholds
  std::vector<std::uint32_t> alias_;
};

}  // namespace s2v
