#include "s2v/query.hpp"

#include <algorithm>
#include <cmath>

#include "s2v/errors.hpp"

namespace s2v {

double cosine(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) throw DataError("cosine: dimension mismatch");
  double uu = 0.0, vv = 0.0, uv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uu += static_cast<double>(u[i]) * u[i];
    vv += static_cast<double>(v[i]) * v[i];
    uv += static_cast<double>(u[i]) * v[i];
  }
  if (uu == 0.0 || vv == 0.0) throw DataError("cosine undefined for a zero-norm vector");
  return uv / (std::sqrt(uu) * std::sqrt(vv));
}

QueryEngine::QueryEngine(const EmbeddingModel& model) : model_(model) {
  const std::size_t v = model.vocab_size();
  const std::size_t dim = model.dim();
  normalized_.resize(v * dim);
  zero_norm_.assign(v, false);
  for (std::size_t i = 0; i < v; ++i) {
    auto row = model.input_row(static_cast<std::uint32_t>(i));
    double norm = 0.0;
    for (float x : row) norm += static_cast<double>(x) * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) {
      zero_norm_[i] = true;
      continue;
    }
    for (std::size_t d = 0; d < dim; ++d) {
      normalized_[i * dim + d] = static_cast<float>(row[d] / norm);
    }
  }
}

std::uint32_t QueryEngine::require_key(std::string_view key) const {
  auto idx = model_.vocab.find(key);
  if (idx) return *idx;
  auto [surface, label] = split_key(key);
  auto senses = model_.vocab.senses_of(surface);
  std::string message = "unknown key '" + std::string(key) + "'";
  if (senses.empty()) {
    message += " (no senses of surface '" + surface + "')";
  } else {
    message += "; available senses:";
    for (auto s : senses) message += " " + model_.vocab.entry(s).key;
  }
  throw DataError(message);
}

LookupResult QueryEngine::embedding_for(std::string_view surface,
                                        std::string_view label) const {
  LookupResult result;
  auto idx = model_.vocab.find(make_key(surface, label));
  if (idx) {
    auto row = model_.input_row(*idx);
    result.vector.emplace(row.begin(), row.end());
    return result;
  }
  for (auto s : model_.vocab.senses_of(surface)) {
    result.available_senses.push_back(model_.vocab.entry(s).key);
  }
  return result;
}

NeighborResult QueryEngine::ranked(std::span<const double> query_unit, std::size_t k,
                                   const std::optional<std::string>& filter_label,
                                   std::span<const std::uint32_t> exclude) const {
  const std::size_t v = model_.vocab_size();
  const std::size_t dim = model_.dim();
  std::vector<std::pair<double, std::uint32_t>> scored;
  scored.reserve(v);
  for (std::uint32_t i = 0; i < v; ++i) {
    if (zero_norm_[i]) continue;
    if (std::find(exclude.begin(), exclude.end(), i) != exclude.end()) continue;
    if (filter_label && model_.vocab.entry(i).label != *filter_label) continue;
    double s = 0.0;
    const float* row = normalized_.data() + std::size_t(i) * dim;
    for (std::size_t d = 0; d < dim; ++d) s += row[d] * query_unit[d];
    scored.emplace_back(s, i);
  }
  const std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + take, scored.end(),
                    [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;  // canonical-order tie break
                    });
  NeighborResult result;
  result.entries.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    result.entries.emplace_back(model_.vocab.entry(scored[i].second).key, scored[i].first);
  }
  return result;
}

NeighborResult QueryEngine::nearest(std::string_view key, std::size_t k,
                                    const std::optional<std::string>& filter_label) const {
  if (k < 1) throw DataError("nearest: k must be at least 1");
  std::uint32_t idx = require_key(key);
  if (zero_norm_[idx]) {
    throw DataError("key '" + std::string(key) + "' has a zero-norm vector");
  }
  const std::size_t dim = model_.dim();
  std::vector<double> q(dim);
  for (std::size_t d = 0; d < dim; ++d) q[d] = normalized_[std::size_t(idx) * dim + d];
  std::uint32_t exclude[1] = {idx};
  return ranked(q, k, filter_label, exclude);
}

NeighborResult QueryEngine::nearest(std::span<const float> vec, std::size_t k,
                                    const std::optional<std::string>& filter_label) const {
  if (k < 1) throw DataError("nearest: k must be at least 1");
  if (vec.size() != model_.dim()) throw DataError("nearest: query dimension mismatch");
  double norm = 0.0;
  for (float x : vec) norm += static_cast<double>(x) * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) throw DataError("nearest: zero-norm query vector");
  std::vector<double> q(vec.size());
  for (std::size_t d = 0; d < vec.size(); ++d) q[d] = vec[d] / norm;
  return ranked(q, k, filter_label, {});
}

NeighborResult QueryEngine::analogy(std::string_view a, std::string_view b,
                                    std::string_view c, std::size_t k) const {
  if (k < 1) throw DataError("analogy: k must be at least 1");
  std::uint32_t ia = require_key(a);
  std::uint32_t ib = require_key(b);
  std::uint32_t ic = require_key(c);
  for (auto [idx, name] : {std::pair{ia, a}, {ib, b}, {ic, c}}) {
    if (zero_norm_[idx]) {
      throw DataError("key '" + std::string(name) + "' has a zero-norm vector");
    }
  }
  const std::size_t dim = model_.dim();
  std::vector<double> target(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    target[d] = static_cast<double>(normalized_[std::size_t(ib) * dim + d]) -
                normalized_[std::size_t(ia) * dim + d] +
                normalized_[std::size_t(ic) * dim + d];
  }
  double norm = 0.0;
  for (double x : target) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    throw DataError("analogy target b - a + c is the zero vector");
  }
  for (double& x : target) x /= norm;
  std::uint32_t exclude[3] = {ia, ib, ic};
  return ranked(target, k, {}, exclude);
}

std::vector<std::pair<std::string, NeighborResult>> QueryEngine::sense_table(
    std::string_view surface, std::size_t k) const {
  auto senses = model_.vocab.senses_of(surface);
  if (senses.empty()) {
    throw DataError("unknown surface '" + std::string(surface) + "'");
  }
  std::vector<std::pair<std::string, NeighborResult>> table;
  table.reserve(senses.size());
  for (auto s : senses) {
    const std::string& key = model_.vocab.entry(s).key;
    table.emplace_back(key, nearest(key, k));
  }
  return table;
}

}  // namespace s2v
