#include <cmath>
#include <sstream>

#include "doctest.h"
#include "s2v/corpus.hpp"
#include "s2v/errors.hpp"
#include "s2v/rng.hpp"
#include "s2v/token.hpp"

using namespace s2v;

namespace {

Document one_sentence_doc(std::initializer_list<SenseToken> tokens) {
  Document doc;
  doc.id = "test";
  doc.sentences.emplace_back(tokens);
  return doc;
}

std::vector<SenseToken> flatten(const std::vector<Document>& docs) {
  std::vector<SenseToken> out;
  for (const auto& d : docs) {
    for (const auto& s : d.sentences) out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

}  // namespace

TEST_CASE("key escaping round-trips") {
  CHECK(encode_surface("a|b") == "a%7Cb");
  CHECK(encode_surface("100%") == "100%25");
  CHECK(decode_surface("a%7Cb") == "a|b");
  CHECK(decode_surface("100%25") == "100%");
  CHECK(decode_surface("50%off") == "50%off");  // unknown escape passes through

  SenseToken tok{"a|b", "NOUN"};
  CHECK(tok.key() == "a%7Cb|NOUN");
  auto [surface, label] = split_key(tok.key());
  CHECK(surface == "a|b");
  CHECK(label == "NOUN");
}

TEST_CASE("split_key without separator falls back to WORD") {
  auto [surface, label] = split_key("hello");
  CHECK(surface == "hello");
  CHECK(label == "WORD");
}

TEST_CASE("read_tagged_text parses labeled, bare and escaped tokens") {
  std::istringstream in("the|DET bank|NOUN\nhello\na%7Cb|NOUN\n");
  auto docs = read_tagged_text(in);
  REQUIRE(docs.size() == 1);
  REQUIRE(docs[0].sentences.size() == 3);
  CHECK(docs[0].sentences[0] ==
        Sentence{SenseToken{"the", "DET"}, SenseToken{"bank", "NOUN"}});
  CHECK(docs[0].sentences[1] == Sentence{SenseToken{"hello", "WORD"}});
  CHECK(docs[0].sentences[2] == Sentence{SenseToken{"a|b", "NOUN"}});
}

TEST_CASE("read_tagged_text reports malformed tokens with line numbers") {
  std::istringstream in("good|ADJ |NOUN\nbad| a|b|NOUN fine|X\n");
  ReadStats stats;
  auto docs = read_tagged_text(in, &stats);
  CHECK(stats.malformed_tokens == 3);
  REQUIRE(stats.diagnostics.size() == 3);
  CHECK(stats.diagnostics[0].find("line 1") != std::string::npos);
  CHECK(stats.diagnostics[1].find("line 2") != std::string::npos);
  auto tokens = flatten(docs);
  REQUIRE(tokens.size() == 2);
  CHECK(tokens[0].surface == "good");
  CHECK(tokens[1].surface == "fine");
}

TEST_CASE("blank lines separate documents") {
  std::istringstream in("a|X\nb|Y\n\nc|Z\n\n\n");
  auto docs = read_tagged_text(in);
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].sentences.size() == 2);
  CHECK(docs[1].sentences.size() == 1);
}

TEST_CASE("tagged text round-trip is exact on canonical input") {
  Rng rng(7);
  const std::vector<std::string> labels = {"NOUN", "VERB", "ADJ", "WORD", "X1"};
  const std::string alphabet = "ab|%c_";
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Document> docs(1 + rng.below(3));
    for (auto& doc : docs) {
      doc.sentences.resize(1 + rng.below(4));
      for (auto& sent : doc.sentences) {
        sent.resize(1 + rng.below(6));
        for (auto& tok : sent) {
          std::string surface;
          std::size_t len = 1 + rng.below(5);
          for (std::size_t i = 0; i < len; ++i) {
            surface += alphabet[rng.below(alphabet.size())];
          }
          tok.surface = surface;
          tok.label = labels[rng.below(labels.size())];
        }
      }
    }
    std::ostringstream first;
    write_tagged_text(docs, first);
    std::istringstream back(first.str());
    ReadStats stats;
    auto reread = read_tagged_text(back, &stats);
    CHECK(stats.clean());
    REQUIRE(reread.size() == docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
      CHECK(reread[d].sentences == docs[d].sentences);
    }
    std::ostringstream second;
    write_tagged_text(reread, second);
    CHECK(second.str() == first.str());
  }
}

TEST_CASE("read_conllu extracts FORM and the chosen tag column") {
  std::string text =
      "# sent_id = 1\n"
      "# text = We work\n"
      "1\tWe\twe\tPRON\tPRP\t_\t2\tnsubj\t_\t_\n"
      "2\twork\twork\tVERB\tVBP\t_\t0\troot\t_\t_\n"
      "\n";
  {
    std::istringstream in(text);
    auto docs = read_conllu(in, ConlluColumn::Upos);
    auto tokens = flatten(docs);
    REQUIRE(tokens.size() == 2);
    CHECK(tokens[0] == SenseToken{"We", "PRON"});
    CHECK(tokens[1] == SenseToken{"work", "VERB"});
  }
  {
    std::istringstream in(text);
    auto docs = read_conllu(in, ConlluColumn::Xpos);
    auto tokens = flatten(docs);
    REQUIRE(tokens.size() == 2);
    CHECK(tokens[0].label == "PRP");
    CHECK(tokens[1].label == "VBP");
  }
}

TEST_CASE("read_conllu drops range tokens and empty nodes") {
  std::istringstream in(
      "1-2\tvamonos\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "1\tvamos\tir\tVERB\t_\t_\t0\troot\t_\t_\n"
      "2\tnos\tnosotros\tPRON\t_\t_\t1\tobj\t_\t_\n"
      "5.1\tghost\t_\tNOUN\t_\t_\t_\t_\t_\t_\n"
      "\n");
  auto docs = read_conllu(in, ConlluColumn::Upos);
  auto tokens = flatten(docs);
  REQUIRE(tokens.size() == 2);
  CHECK(tokens[0].surface == "vamos");
  CHECK(tokens[1].surface == "nos");
}

TEST_CASE("read_conllu maps '_' to WORD and skips malformed sentences") {
  std::istringstream in(
      "1\tok\t_\t_\t_\t_\t0\troot\t_\t_\n"
      "\n"
      "1\tbroken line with too few columns\n"
      "2\tignored\t_\tNOUN\t_\t_\t0\troot\t_\t_\n"
      "\n"
      "1\tfine\t_\tNOUN\t_\t_\t0\troot\t_\t_\n"
      "\n");
  ReadStats stats;
  auto docs = read_conllu(in, ConlluColumn::Upos, &stats);
  CHECK(stats.skipped_sentences == 1);
  auto tokens = flatten(docs);
  REQUIRE(tokens.size() == 2);
  CHECK(tokens[0] == SenseToken{"ok", "WORD"});
  CHECK(tokens[1] == SenseToken{"fine", "NOUN"});
}

TEST_CASE("read_conllu honors newdoc boundaries") {
  std::istringstream in(
      "# newdoc id = a\n"
      "1\tx\t_\tNOUN\t_\t_\t0\troot\t_\t_\n"
      "\n"
      "# newdoc id = b\n"
      "1\ty\t_\tNOUN\t_\t_\t0\troot\t_\t_\n"
      "\n");
  auto docs = read_conllu(in, ConlluColumn::Upos);
  CHECK(docs.size() == 2);
}

TEST_CASE("sentiment labeling touches exactly the adjective tokens") {
  Document doc = one_sentence_doc({{"bad", "ADJ"}, {"film", "NOUN"}, {"perfect", "ADJ"}});
  doc.doc_label = "NEG";
  Document out = label_adjectives_with_sentiment(doc);
  CHECK(out.sentences[0][0] == SenseToken{"bad", "NEG"});
  CHECK(out.sentences[0][1] == SenseToken{"film", "NOUN"});
  CHECK(out.sentences[0][2] == SenseToken{"perfect", "NEG"});

  doc.doc_label = "POS";
  out = label_adjectives_with_sentiment(doc);
  CHECK(out.sentences[0][2] == SenseToken{"perfect", "POS"});
}

TEST_CASE("sentiment labeling without a document label fails, naming the document") {
  Document doc = one_sentence_doc({{"bad", "ADJ"}});
  doc.id = "imdb#17";
  CHECK_THROWS_WITH_AS(label_adjectives_with_sentiment(doc),
                       doctest::Contains("imdb#17"), DataError);
}

TEST_CASE("sentiment labeling change count equals the adjective count") {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    Document doc;
    doc.id = "gen";
    doc.doc_label = "NEG";
    doc.sentences.resize(1 + rng.below(4));
    std::size_t adjectives = 0;
    for (auto& sent : doc.sentences) {
      sent.resize(1 + rng.below(8));
      for (auto& tok : sent) {
        tok.surface = "w" + std::to_string(rng.below(20));
        switch (rng.below(3)) {
          case 0: tok.label = "ADJ"; ++adjectives; break;
          case 1: tok.label = "NOUN"; break;
          default: tok.label = "NEG"; break;  // already-sentiment tokens stay put
        }
      }
    }
    Document out = label_adjectives_with_sentiment(doc);
    std::size_t changed = 0;
    for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
      for (std::size_t t = 0; t < doc.sentences[s].size(); ++t) {
        if (doc.sentences[s][t] != out.sentences[s][t]) {
          ++changed;
          CHECK(doc.sentences[s][t].label == "ADJ");
          CHECK(out.sentences[s][t].label == "NEG");
        }
      }
    }
    CHECK(changed == adjectives);
  }
}

TEST_CASE("merge_spans joins multi-word sequences") {
  Document doc = one_sentence_doc(
      {{"George", "WORD"}, {"Washington", "WORD"}, {"slept", "WORD"}});
  Document out = merge_spans(doc, {Span{0, 0, 2, "PERSON_NAME"}});
  REQUIRE(out.sentences[0].size() == 2);
  CHECK(out.sentences[0][0] == SenseToken{"George_Washington", "PERSON_NAME"});
  CHECK(out.sentences[0][1] == SenseToken{"slept", "WORD"});

  Document titles = one_sentence_doc(
      {{"Secretary", "WORD"}, {"of", "WORD"}, {"State", "WORD"}});
  out = merge_spans(titles, {Span{0, 0, 3, "TITLE"}});
  REQUIRE(out.sentences[0].size() == 1);
  CHECK(out.sentences[0][0] == SenseToken{"Secretary_of_State", "TITLE"});
}

TEST_CASE("merge_spans with no spans is the identity") {
  Document doc = one_sentence_doc({{"a", "X"}, {"b", "Y"}});
  Document out = merge_spans(doc, {});
  CHECK(out.sentences == doc.sentences);
}

TEST_CASE("overlapping spans are rejected with both spans named") {
  Document doc = one_sentence_doc({{"a", "W"}, {"b", "W"}, {"c", "W"}, {"d", "W"}});
  CHECK_THROWS_WITH_AS(
      merge_spans(doc, {Span{0, 0, 2, "ONE"}, Span{0, 1, 3, "TWO"}}),
      doctest::Contains("overlapping"), DataError);
  CHECK_THROWS_AS(merge_spans(doc, {Span{0, 2, 2, "EMPTY"}}), DataError);
  CHECK_THROWS_AS(merge_spans(doc, {Span{0, 2, 9, "LONG"}}), DataError);
  CHECK_THROWS_AS(merge_spans(doc, {Span{3, 0, 1, "NOSENT"}}), DataError);
}

TEST_CASE("merge_spans token count drops by the merged token total") {
  Rng rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    Document doc;
    doc.id = "gen";
    doc.sentences.resize(1 + rng.below(3));
    std::size_t before = 0;
    for (auto& sent : doc.sentences) {
      sent.resize(4 + rng.below(8));
      before += sent.size();
      for (auto& tok : sent) {
        tok.surface = "w" + std::to_string(rng.below(30));
        tok.label = "WORD";
      }
    }
    // Non-overlapping spans: chop each sentence into strides.
    std::vector<Span> spans;
    std::size_t merged_away = 0;
    for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
      std::size_t pos = rng.below(2);
      while (pos + 2 <= doc.sentences[s].size()) {
        std::size_t len = 2 + rng.below(2);
        std::size_t end = std::min(pos + len, doc.sentences[s].size());
        if (end - pos >= 2 && rng.below(2) == 0) {
          spans.push_back(Span{s, pos, end, "ENT"});
          merged_away += (end - pos) - 1;
        }
        pos = end + rng.below(3);
      }
    }
    Document out = merge_spans(doc, spans);
    std::size_t after = 0;
    for (const auto& sent : out.sentences) after += sent.size();
    CHECK(after == before - merged_away);
  }
}

TEST_CASE("span sidecar parsing") {
  std::istringstream in("0\t0\t2\tPERSON_NAME\n3\t1\t4\ttitle\n");
  auto spans = read_span_sidecar(in);
  REQUIRE(spans.size() == 2);
  CHECK(spans[0].sentence_index == 0);
  CHECK(spans[0].end == 2);
  CHECK(spans[1].entity_label == "TITLE");
  std::istringstream bad("0\t0\tPERSON\n");
  CHECK_THROWS_AS(read_span_sidecar(bad), DataError);
}

TEST_CASE("subsample keep probability") {
  // f == t sits at the boundary: sqrt(1) + 1 clamps to 1.
  CHECK(subsample_keep_prob(10, 1000, 0.01) == doctest::Approx(1.0));
  // threshold 0 disables discarding.
  CHECK(subsample_keep_prob(999, 1000, 0.0) == 1.0);
  // sqrt(1e-5/0.01) + 1e-5/0.01 = 0.0316227766 + 0.001
  CHECK(subsample_keep_prob(10000, 1000000, 1e-5) ==
        doctest::Approx(0.0326227766).epsilon(1e-9));

  CHECK_THROWS_AS(subsample_keep_prob(0, 10, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(subsample_keep_prob(11, 10, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(subsample_keep_prob(1, 10, -0.5), std::invalid_argument);
}

TEST_CASE("subsample keep probability is non-increasing in frequency") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::uint64_t total = 1000 + rng.below(1000000);
    const double t = std::pow(10.0, -(1.0 + rng.uniform01() * 5.0));
    double prev = 1.0;
    for (std::uint64_t f = 1; f <= total; f = f * 2 + 1) {
      double keep = subsample_keep_prob(f, total, t);
      CHECK(keep <= prev + 1e-12);
      CHECK(keep >= 0.0);
      CHECK(keep <= 1.0);
      prev = keep;
    }
  }
}

TEST_CASE("fold_case lowercases surfaces only") {
  Document doc = one_sentence_doc({{"Bank", "NOUN"}});
  Document out = fold_case(doc);
  CHECK(out.sentences[0][0] == SenseToken{"bank", "NOUN"});
}
