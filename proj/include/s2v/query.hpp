#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "s2v/trainer.hpp"

namespace s2v {

// Ranked (key, cosine) pairs, similarities non-increasing, ties broken by
// canonical vocabulary order.
struct NeighborResult {
  std::vector<std::pair<std::string, double>> entries;
};

// Result of a sense-disambiguated lookup. A miss is a value, not an error:
// it carries the senses the surface does have, for the caller's fallback
// policy.
struct LookupResult {
  std::optional<std::vector<float>> vector;
  std::vector<std::string> available_senses;
  bool found() const { return vector.has_value(); }
};

double cosine(std::span<const float> u, std::span<const float> v);

// Read-only query surface over a finished model. Holds a unit-normalized
// copy of the input matrix built once here; the model itself is never
// touched again.
class QueryEngine {
 public:
  explicit QueryEngine(const EmbeddingModel& model);

  LookupResult embedding_for(std::string_view surface, std::string_view label) const;

  NeighborResult nearest(std::string_view key, std::size_t k,
                         const std::optional<std::string>& filter_label = {}) const;
  NeighborResult nearest(std::span<const float> vec, std::size_t k,
                         const std::optional<std::string>& filter_label = {}) const;

  // 3CosAdd: rank candidates d by cos(d, b - a + c) over unit vectors,
  // excluding a, b and c.
  NeighborResult analogy(std::string_view a, std::string_view b, std::string_view c,
                         std::size_t k) const;

  // One top-k neighbor list per sense of the surface, in canonical order.
  std::vector<std::pair<std::string, NeighborResult>> sense_table(
      std::string_view surface, std::size_t k) const;

  const EmbeddingModel& model() const { return model_; }

 private:
  std::uint32_t require_key(std::string_view key) const;
  NeighborResult ranked(std::span<const double> query_unit, std::size_t k,
                        const std::optional<std::string>& filter_label,
                        std::span<const std::uint32_t> exclude) const;

  const EmbeddingModel& model_;
  std::vector<float> normalized_;   // row-normalized input copy
  std::vector<bool> zero_norm_;
};

}  // namespace s2v
