#include "s2v/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "s2v/errors.hpp"

namespace s2v {

namespace {

constexpr std::size_t kMaxDiagnostics = 20;

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

std::vector<std::string> split_whitespace(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(std::move(tok));
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

bool has_whitespace(std::string_view s) {
  return std::any_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

// "surface|LABEL" or bare "surface"; more than one '|' means the surface was
// not escaped and the token is malformed.
bool parse_token(const std::string& raw, SenseToken& out) {
  auto pipes = std::count(raw.begin(), raw.end(), '|');
  if (pipes > 1) return false;
  if (pipes == 0) {
    if (raw.empty()) return false;
    out.surface = decode_surface(raw);
    out.label = kUnlabeledLabel;
    return true;
  }
  auto pos = raw.find('|');
  if (pos == 0 || pos + 1 == raw.size()) return false;  // empty surface or label
  out.surface = decode_surface(raw.substr(0, pos));
  out.label = to_upper_ascii(raw.substr(pos + 1));
  return true;
}

std::string doc_id(std::string_view source, std::size_t ordinal) {
  std::string id(source.empty() ? "doc" : source);
  id += '#';
  id += std::to_string(ordinal);
  return id;
}

}  // namespace

void ReadStats::note(std::string message) {
  if (diagnostics.size() < kMaxDiagnostics) diagnostics.push_back(std::move(message));
}

void parse_tagged_text(std::istream& in, const DocumentFn& emit, ReadStats* stats,
                       std::string_view source) {
  ReadStats local;
  ReadStats& st = stats ? *stats : local;

  Document doc;
  std::size_t ordinal = 0;
  std::size_t line_no = 0;
  doc.id = doc_id(source, ordinal);

  auto flush_doc = [&] {
    if (!doc.sentences.empty()) {
      emit(std::move(doc));
      doc = Document{};
      doc.id = doc_id(source, ++ordinal);
    }
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) {
      flush_doc();
      continue;
    }
    Sentence sent;
    for (const auto& raw : split_whitespace(line)) {
      SenseToken tok;
      if (parse_token(raw, tok)) {
        sent.push_back(std::move(tok));
      } else {
        ++st.malformed_tokens;
        st.note("line " + std::to_string(line_no) + ": malformed token '" + raw + "'");
      }
    }
    if (!sent.empty()) doc.sentences.push_back(std::move(sent));
  }
  if (in.bad()) throw DataError("I/O failure while reading tagged text");
  flush_doc();
}

std::vector<Document> read_tagged_text(std::istream& in, ReadStats* stats,
                                       std::string_view source) {
  std::vector<Document> docs;
  parse_tagged_text(in, [&](Document&& d) { docs.push_back(std::move(d)); }, stats,
                    source);
  return docs;
}

void write_tagged_text(const Document& doc, std::ostream& out) {
  for (const auto& sent : doc.sentences) {
    for (std::size_t i = 0; i < sent.size(); ++i) {
      if (i > 0) out << ' ';
      out << sent[i].key();
    }
    out << '\n';
  }
}

void write_tagged_text(const std::vector<Document>& docs, std::ostream& out) {
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (d > 0) out << '\n';
    write_tagged_text(docs[d], out);
  }
}

std::vector<Document> read_conllu(std::istream& in, ConlluColumn column,
                                  ReadStats* stats, std::string_view source) {
  ReadStats local;
  ReadStats& st = stats ? *stats : local;

  std::vector<Document> docs;
  Document doc;
  std::size_t ordinal = 0;
  doc.id = doc_id(source, ordinal);
  Sentence sent;
  bool sent_bad = false;
  std::size_t line_no = 0;

  auto flush_sentence = [&] {
    if (sent_bad) {
      ++st.skipped_sentences;
    } else if (!sent.empty()) {
      doc.sentences.push_back(std::move(sent));
    }
    sent.clear();
    sent_bad = false;
  };
  auto flush_doc = [&] {
    flush_sentence();
    if (!doc.sentences.empty()) {
      docs.push_back(std::move(doc));
      doc = Document{};
      doc.id = doc_id(source, ++ordinal);
    }
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush_sentence();
      continue;
    }
    if (line[0] == '#') {
      if (line.rfind("# newdoc", 0) == 0) flush_doc();
      continue;
    }
    if (sent_bad) continue;  // discard the rest of a bad sentence

    auto cols = split_tabs(line);
    if (cols.size() != 10) {
      sent_bad = true;
      st.note("line " + std::to_string(line_no) + ": expected 10 columns, got " +
              std::to_string(cols.size()));
      continue;
    }
    const std::string& id = cols[0];
    // Multiword ranges ("1-2") and empty nodes ("5.1") carry no training
    // surface; both are dropped.
    if (id.find('-') != std::string::npos || id.find('.') != std::string::npos) {
      continue;
    }
    if (id.empty() || !std::all_of(id.begin(), id.end(), [](unsigned char c) {
          return std::isdigit(c);
        })) {
      sent_bad = true;
      st.note("line " + std::to_string(line_no) + ": bad token ID '" + id + "'");
      continue;
    }
    const std::string& form = cols[1];
    const std::string& tag = column == ConlluColumn::Upos ? cols[3] : cols[4];
    if (form.empty() || has_whitespace(form)) {
      sent_bad = true;
      st.note("line " + std::to_string(line_no) + ": unusable FORM '" + form + "'");
      continue;
    }
    std::string label = tag == "_" ? kUnlabeledLabel : to_upper_ascii(tag);
    if (label.empty() || label.find('|') != std::string::npos || has_whitespace(label)) {
      sent_bad = true;
      st.note("line " + std::to_string(line_no) + ": unusable tag '" + tag + "'");
      continue;
    }
    sent.push_back(SenseToken{form, std::move(label)});
  }
  if (in.bad()) throw DataError("I/O failure while reading CoNLL-U input");
  flush_doc();
  return docs;
}

Document label_adjectives_with_sentiment(Document doc, const std::string& adjective_label) {
  if (!doc.doc_label.has_value() || doc.doc_label->empty()) {
    throw DataError("document '" + doc.id + "' has no sentiment label");
  }
  const std::string sentiment = to_upper_ascii(*doc.doc_label);
  for (auto& sent : doc.sentences) {
    for (auto& tok : sent) {
      if (tok.label == adjective_label) tok.label = sentiment;
    }
  }
  return doc;
}

Document merge_spans(Document doc, std::vector<Span> spans, const std::string& joiner) {
  for (const auto& sp : spans) {
    if (sp.sentence_index >= doc.sentences.size()) {
      throw DataError("span sentence index " + std::to_string(sp.sentence_index) +
                      " out of range in document '" + doc.id + "'");
    }
    std::size_t len = doc.sentences[sp.sentence_index].size();
    if (sp.start >= sp.end || sp.end > len) {
      throw DataError("span [" + std::to_string(sp.start) + "," +
                      std::to_string(sp.end) + ") invalid for sentence " +
                      std::to_string(sp.sentence_index) + " of length " +
                      std::to_string(len));
    }
  }
  std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) {
    return std::tie(a.sentence_index, a.start) < std::tie(b.sentence_index, b.start);
  });
  for (std::size_t i = 1; i < spans.size(); ++i) {
    const Span& prev = spans[i - 1];
    const Span& cur = spans[i];
    if (prev.sentence_index == cur.sentence_index && cur.start < prev.end) {
      throw DataError("overlapping spans in sentence " +
                      std::to_string(cur.sentence_index) + ": [" +
                      std::to_string(prev.start) + "," + std::to_string(prev.end) +
                      ") '" + prev.entity_label + "' and [" +
                      std::to_string(cur.start) + "," + std::to_string(cur.end) +
                      ") '" + cur.entity_label + "'");
    }
  }

  std::size_t span_i = 0;
  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    Sentence& sent = doc.sentences[s];
    Sentence merged;
    std::size_t t = 0;
    while (t < sent.size()) {
      if (span_i < spans.size() && spans[span_i].sentence_index == s &&
          spans[span_i].start == t) {
        const Span& sp = spans[span_i];
        std::string surface = sent[t].surface;
        for (std::size_t j = t + 1; j < sp.end; ++j) {
          surface += joiner;
          surface += sent[j].surface;
        }
        merged.push_back(SenseToken{std::move(surface), to_upper_ascii(sp.entity_label)});
        t = sp.end;
        ++span_i;
      } else {
        merged.push_back(std::move(sent[t]));
        ++t;
      }
    }
    sent = std::move(merged);
  }
  return doc;
}

std::vector<Span> read_span_sidecar(std::istream& in) {
  std::vector<Span> spans;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;
    auto cols = split_tabs(line);
    if (cols.size() != 4) {
      throw DataError("span sidecar line " + std::to_string(line_no) +
                      ": expected 4 tab-separated fields, got " +
                      std::to_string(cols.size()));
    }
    try {
      Span sp;
      sp.sentence_index = std::stoull(cols[0]);
      sp.start = std::stoull(cols[1]);
      sp.end = std::stoull(cols[2]);
      sp.entity_label = to_upper_ascii(cols[3]);
      if (sp.entity_label.empty()) throw std::invalid_argument("empty label");
      spans.push_back(std::move(sp));
    } catch (const std::logic_error&) {
      throw DataError("span sidecar line " + std::to_string(line_no) +
                      ": unparseable span '" + line + "'");
    }
  }
  if (in.bad()) throw DataError("I/O failure while reading span sidecar");
  return spans;
}

double subsample_keep_prob(std::uint64_t sense_frequency, std::uint64_t total_tokens,
                           double threshold) {
  if (sense_frequency < 1 || total_tokens < sense_frequency || threshold < 0.0) {
    throw std::invalid_argument("subsample_keep_prob: bad arguments");
  }
  if (threshold == 0.0) return 1.0;
  double f = static_cast<double>(sense_frequency) / static_cast<double>(total_tokens);
  double ratio = threshold / f;
  return std::min(1.0, std::sqrt(ratio) + ratio);
}

Document fold_case(Document doc) {
  for (auto& sent : doc.sentences) {
    for (auto& tok : sent) tok.surface = to_lower_ascii(tok.surface);
  }
  return doc;
}

void MemoryCorpus::for_each_document(const DocumentFn& fn) const {
  for (const auto& doc : docs_) fn(Document(doc));
}

void TaggedTextFileCorpus::for_each_document(const DocumentFn& fn) const {
  std::ifstream in(path_);
  if (!in) throw DataError("cannot open corpus file: " + path_);
  parse_tagged_text(in, fn, nullptr, path_);
}

}  // namespace s2v
