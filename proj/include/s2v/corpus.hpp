#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "s2v/token.hpp"

namespace s2v {

// Per-read diagnostics for the recoverable error paths. Counts are always
// exact; `diagnostics` keeps the first few messages so logs stay bounded.
struct ReadStats {
  std::size_t malformed_tokens = 0;
  std::size_t skipped_sentences = 0;
  std::vector<std::string> diagnostics;

  void note(std::string message);
  bool clean() const { return malformed_tokens == 0 && skipped_sentences == 0; }
};

using DocumentFn = std::function<void(Document&&)>;

// Tagged-token text: one sentence per line, space-separated "surface|LABEL"
// tokens ('|' in the surface escaped as %7C, '%' as %25); bare tokens get the
// WORD label; blank lines separate documents. Malformed tokens are dropped
// and counted per line.
void parse_tagged_text(std::istream& in, const DocumentFn& emit,
                       ReadStats* stats = nullptr, std::string_view source = "");
std::vector<Document> read_tagged_text(std::istream& in, ReadStats* stats = nullptr,
                                       std::string_view source = "");
void write_tagged_text(const std::vector<Document>& docs, std::ostream& out);
void write_tagged_text(const Document& doc, std::ostream& out);

enum class ConlluColumn { Upos, Xpos };

// CoNLL-U reader: FORM becomes the surface, the chosen tag column the label
// ('_' maps to WORD). Multiword range lines ("1-2") and empty nodes ("5.1")
// are dropped. A malformed line discards its whole sentence, recoverably.
// "# newdoc" comments start a new document.
std::vector<Document> read_conllu(std::istream& in, ConlluColumn column,
                                  ReadStats* stats = nullptr,
                                  std::string_view source = "");

// Relabels every token whose label equals `adjective_label` with the
// document-level sentiment label; everything else keeps its label.
Document label_adjectives_with_sentiment(Document doc,
                                         const std::string& adjective_label = "ADJ");

// Joins each span's surfaces into one token labeled with the span's entity
// label. Spans must be in range and non-overlapping.
Document merge_spans(Document doc, std::vector<Span> spans,
                     const std::string& joiner = "_");

// Span sidecar: one "sentence_index<TAB>start<TAB>end<TAB>LABEL" line per
// span, sentence indices global over the input stream.
std::vector<Span> read_span_sidecar(std::istream& in);

// Keep probability for a sense occurring sense_frequency times out of
// total_tokens, with subsample threshold t: min(1, sqrt(t/f) + t/f).
// t == 0 disables discarding.
double subsample_keep_prob(std::uint64_t sense_frequency, std::uint64_t total_tokens,
                           double threshold);

// Lowercases every surface (ASCII); labels are untouched.
Document fold_case(Document doc);

// A corpus the trainer can traverse once per epoch pass. Implementations
// must yield identical documents on every call.
class CorpusSource {
 public:
  virtual ~CorpusSource() = default;
  virtual void for_each_document(const DocumentFn& fn) const = 0;
};

class MemoryCorpus : public CorpusSource {
 public:
  MemoryCorpus() = default;
  explicit MemoryCorpus(std::vector<Document> docs) : docs_(std::move(docs)) {}
  void for_each_document(const DocumentFn& fn) const override;
  const std::vector<Document>& documents() const { return docs_; }

 private:
  std::vector<Document> docs_;
};

// Re-parses a tagged-token text file on every pass, so epochs never hold the
// whole corpus in memory.
class TaggedTextFileCorpus : public CorpusSource {
 public:
  explicit TaggedTextFileCorpus(std::string path) : path_(std::move(path)) {}
  void for_each_document(const DocumentFn& fn) const override;

 private:
  std::string path_;
};

}  // namespace s2v
