#include "s2v/vocab.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "s2v/errors.hpp"

namespace s2v {

Vocabulary Vocabulary::from_entries(std::vector<SenseEntry> entries) {
  Vocabulary v;
  v.entries_ = std::move(entries);
  v.key_to_index_.reserve(v.entries_.size());
  for (std::uint32_t i = 0; i < v.entries_.size(); ++i) {
    SenseEntry& e = v.entries_[i];
    e.index = i;
    v.key_to_index_.emplace(e.key, i);
    v.surface_index_[e.surface].push_back(i);
    v.total_train_tokens_ += e.count;
  }
  return v;
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view key) const {
  auto it = key_to_index_.find(std::string(key));
  if (it == key_to_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::uint32_t> Vocabulary::senses_of(std::string_view surface) const {
  auto it = surface_index_.find(std::string(surface));
  if (it == surface_index_.end()) return {};
  return it->second;
}

void Vocabulary::dump(std::ostream& out) const {
  for (const auto& e : entries_) out << e.key << '\t' << e.count << '\n';
}

namespace {

Vocabulary vocab_from_counts(std::unordered_map<std::string, std::uint64_t>&& counts,
                             std::uint32_t min_count) {
  if (min_count < 1) throw DataError("min_count must be at least 1");
  std::vector<SenseEntry> entries;
  entries.reserve(counts.size());
  for (auto& [key, count] : counts) {
    if (count < min_count) continue;
    auto [surface, label] = split_key(key);
    entries.push_back(SenseEntry{key, std::move(surface), std::move(label), count, 0});
  }
  if (entries.empty()) {
    throw DataError("vocabulary is empty after pruning (min_count=" +
                    std::to_string(min_count) + ")");
  }
  std::sort(entries.begin(), entries.end(), [](const SenseEntry& a, const SenseEntry& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.key < b.key;
  });
  return Vocabulary::from_entries(std::move(entries));
}

}  // namespace

Vocabulary build_vocab(const CorpusSource& corpus, std::uint32_t min_count) {
  std::unordered_map<std::string, std::uint64_t> counts;
  corpus.for_each_document([&](Document&& doc) {
    for (const auto& sent : doc.sentences) {
      for (const auto& tok : sent) ++counts[tok.key()];
    }
  });
  return vocab_from_counts(std::move(counts), min_count);
}

Vocabulary build_vocab(const std::vector<Document>& docs, std::uint32_t min_count) {
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& doc : docs) {
    for (const auto& sent : doc.sentences) {
      for (const auto& tok : sent) ++counts[tok.key()];
    }
  }
  return vocab_from_counts(std::move(counts), min_count);
}

Vocabulary build_vocab(const std::vector<SenseToken>& tokens, std::uint32_t min_count) {
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& tok : tokens) ++counts[tok.key()];
  return vocab_from_counts(std::move(counts), min_count);
}

NegativeTable::NegativeTable(const Vocabulary& vocab, double power) {
  if (vocab.empty()) throw DataError("cannot build a negative table on an empty vocabulary");
  if (!(power > 0.0 && power <= 1.0)) {
    throw DataError("negative-sampling power must be in (0, 1]");
  }
  const std::size_t n = vocab.size();
  prob_.resize(n);
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    prob_[i] = std::pow(static_cast<double>(vocab.entry(i).count), power);
    norm += prob_[i];
  }
  if (norm <= 0.0) {
    throw DataError("negative table degenerate: all vocabulary counts are zero");
  }
  for (double& p : prob_) p /= norm;

  // Vose alias construction.
  accept_.assign(n, 1.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  for (std::size_t i = 0; i < n; ++i) scaled[i] = prob_[i] * static_cast<double>(n);
  std::vector<std::uint32_t> small, large;
  for (std::uint32_t i = 0; i < n; ++i) {
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    std::uint32_t s = small.back();
    small.pop_back();
    std::uint32_t l = large.back();
    large.pop_back();
    accept_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    (scaled[l] < 1.0 ? small : large).push_back(l);
  }
  for (auto i : large) accept_[i] = 1.0;
  for (auto i : small) accept_[i] = 1.0;
}

std::uint32_t NegativeTable::sample(Rng& rng) const {
  auto i = static_cast<std::uint32_t>(rng.below(prob_.size()));
  return rng.uniform01() < accept_[i] ? i : alias_[i];
}

}  // namespace s2v
