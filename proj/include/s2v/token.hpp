#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace s2v {

// Reserved label for tokens that carry no sense annotation.
inline const std::string kUnlabeledLabel = "WORD";

// Percent-escaping for literal '|' and '%' inside surface forms, so that
// "surface|LABEL" keys stay unambiguous.
std::string encode_surface(std::string_view surface);
std::string decode_surface(std::string_view encoded);

std::string to_upper_ascii(std::string_view s);
std::string to_lower_ascii(std::string_view s);

// Canonical sense key: encode(surface) + "|" + label.
std::string make_key(std::string_view surface, std::string_view label);

// Inverse of make_key. Splits at the last '|'; keys without one (plain
// word2vec vocabularies) get the reserved WORD label.
std::pair<std::string, std::string> split_key(std::string_view key);

// One corpus position: surface form plus its sense label.
struct SenseToken {
  std::string surface;
  std::string label;

  std::string key() const { return make_key(surface, label); }

  bool operator==(const SenseToken&) const = default;
};

using Sentence = std::vector<SenseToken>;

struct Document {
  std::vector<Sentence> sentences;
  std::optional<std::string> doc_label;  // e.g. sentiment POS/NEG
  std::string id;                        // source name, for diagnostics
};

// Half-open token range inside one sentence, to be merged into a single
// multi-word token.
struct Span {
  std::size_t sentence_index = 0;
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // exclusive
  std::string entity_label;
};

}  // namespace s2v
