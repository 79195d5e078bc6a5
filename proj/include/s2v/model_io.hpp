#pragma once

#include <iosfwd>
#include <string>

#include "s2v/trainer.hpp"

namespace s2v {

// Text format: header "vocab_size dim", then one "key v1 .. v_dim" line per
// entry in canonical order, floats printed shortest-round-trip. Load restores
// input vectors only.
void save_text(const EmbeddingModel& model, std::ostream& out);
EmbeddingModel load_text(std::istream& in);

// word2vec binary layout: ASCII header "vocab_size dim\n", then per entry the
// key bytes, a single space, dim little-endian IEEE-754 32-bit floats, and a
// newline. Round trips bit-exactly.
void save_binary(const EmbeddingModel& model, std::ostream& out);
EmbeddingModel load_binary(std::istream& in);

// Native container ("S2V1" magic, length-prefixed sections): vocabulary with
// counts, train config, input matrix and all output matrices. Unknown
// sections are skipped on load, so the format can grow.
void save_native(const EmbeddingModel& model, std::ostream& out);
EmbeddingModel load_native(std::istream& in);

enum class ModelFormat { Text, Binary, Native };

// Picks a format from the file extension: .txt -> text, .bin -> binary,
// .s2v -> native. Anything else is an error unless overridden.
ModelFormat format_from_extension(const std::string& path);

void save_model(const EmbeddingModel& model, const std::string& path, ModelFormat format);
EmbeddingModel load_model(const std::string& path, ModelFormat format);

}  // namespace s2v
