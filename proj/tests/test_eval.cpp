#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "doctest.h"
#include "s2v/corpus.hpp"
#include "s2v/errors.hpp"
#include "s2v/eval.hpp"

using namespace s2v;

namespace {

PlantedCorpusSpec small_spec() {
  PlantedCorpusSpec spec;
  spec.sentences = 400;
  spec.sentence_length = 6;
  spec.seed = 3;
  spec.ambiguous_words = {
      {"bank",
       {{"NOUN", {"deposit", "loan", "teller"}, 0.5},
        {"VERB", {"gamble", "wager", "bet"}, 0.5}}},
      {"tree",
       {{"PLANT", {"leaf", "bark", "root"}, 0.6},
        {"GRAPH", {"node", "edge", "parent"}, 0.4}}}};
  spec.background_vocab = {"the", "a", "of", "to", "and"};
  return spec;
}

EmbeddingModel model_from_rows(
    const std::vector<std::pair<std::string, std::vector<float>>>& rows) {
  std::vector<SenseToken> tokens;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto [surface, label] = split_key(rows[i].first);
    for (std::size_t c = rows.size() - i; c > 0; --c) {
      tokens.push_back(SenseToken{surface, label});
    }
  }
  TrainConfig config;
  config.dim = static_cast<std::uint32_t>(rows[0].second.size());
  config.min_count = 1;
  EmbeddingModel model = init_model(build_vocab(tokens, 1), config);
  for (const auto& [key, vec] : rows) {
    auto idx = model.vocab.find(key);
    REQUIRE(idx.has_value());
    std::copy(vec.begin(), vec.end(), model.input_row(*idx).begin());
  }
  return model;
}

}  // namespace

TEST_CASE("default planted spec validates") {
  CHECK_NOTHROW(PlantedCorpusSpec::default_spec().validate());
}

TEST_CASE("overlapping context vocabularies are fatal") {
  auto spec = small_spec();
  spec.ambiguous_words[0].senses[1].context_vocab.push_back("deposit");
  CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("overlapping"), DataError);
}

TEST_CASE("background overlap and bad weights are fatal") {
  auto spec = small_spec();
  spec.background_vocab.push_back("deposit");
  CHECK_THROWS_AS(spec.validate(), DataError);

  spec = small_spec();
  spec.ambiguous_words[0].senses[0].mix_weight = 0.7;
  CHECK_THROWS_AS(spec.validate(), DataError);

  spec = small_spec();
  spec.background_vocab.push_back("bank");
  CHECK_THROWS_AS(spec.validate(), DataError);

  spec = small_spec();
  spec.ambiguous_words[0].senses[0].label = "WORD";
  CHECK_THROWS_AS(spec.validate(), DataError);
}

TEST_CASE("spec config files round-trip through write and parse") {
  auto spec = small_spec();
  std::ostringstream out;
  spec.write(out);
  std::istringstream in(out.str());
  auto parsed = PlantedCorpusSpec::parse(in);
  CHECK(parsed.sentences == spec.sentences);
  CHECK(parsed.sentence_length == spec.sentence_length);
  CHECK(parsed.seed == spec.seed);
  CHECK(parsed.background_vocab == spec.background_vocab);
  REQUIRE(parsed.ambiguous_words.size() == spec.ambiguous_words.size());
  for (std::size_t w = 0; w < spec.ambiguous_words.size(); ++w) {
    CHECK(parsed.ambiguous_words[w].surface == spec.ambiguous_words[w].surface);
    REQUIRE(parsed.ambiguous_words[w].senses.size() ==
            spec.ambiguous_words[w].senses.size());
    for (std::size_t s = 0; s < spec.ambiguous_words[w].senses.size(); ++s) {
      CHECK(parsed.ambiguous_words[w].senses[s].label ==
            spec.ambiguous_words[w].senses[s].label);
      CHECK(parsed.ambiguous_words[w].senses[s].mix_weight ==
            doctest::Approx(spec.ambiguous_words[w].senses[s].mix_weight));
      CHECK(parsed.ambiguous_words[w].senses[s].context_vocab ==
            spec.ambiguous_words[w].senses[s].context_vocab);
    }
  }
}

TEST_CASE("spec parser rejects malformed input") {
  std::istringstream missing_word("sense = NOUN 1.0 a b\n");
  CHECK_THROWS_AS(PlantedCorpusSpec::parse(missing_word), DataError);
  std::istringstream unknown("wibble = 3\n");
  CHECK_THROWS_AS(PlantedCorpusSpec::parse(unknown), DataError);
}

TEST_CASE("planted corpus generation is deterministic") {
  auto spec = small_spec();
  std::ostringstream a, b;
  write_tagged_text(generate_planted_corpus(spec), a);
  write_tagged_text(generate_planted_corpus(spec), b);
  CHECK(a.str() == b.str());
  CHECK(!a.str().empty());
}

TEST_CASE("each sentence plants one ambiguous token with sense-pure neighbors") {
  auto spec = small_spec();
  auto docs = generate_planted_corpus(spec);
  REQUIRE(docs.size() == 1);
  CHECK(docs[0].sentences.size() == spec.sentences);

  std::unordered_set<std::string> background(spec.background_vocab.begin(),
                                             spec.background_vocab.end());
  std::size_t checked = 0;
  for (const auto& sent : docs[0].sentences) {
    std::size_t ambiguous_at = sent.size();
    const PlantedSense* sense = nullptr;
    for (std::size_t i = 0; i < sent.size(); ++i) {
      for (const auto& word : spec.ambiguous_words) {
        if (sent[i].surface != word.surface) continue;
        CHECK(ambiguous_at == sent.size());  // exactly one planted occurrence
        ambiguous_at = i;
        for (const auto& cand : word.senses) {
          if (cand.label == sent[i].label) sense = &cand;
        }
      }
    }
    REQUIRE(ambiguous_at < sent.size());
    REQUIRE(sense != nullptr);
    std::unordered_set<std::string> allowed(sense->context_vocab.begin(),
                                            sense->context_vocab.end());
    for (std::size_t i = 0; i < sent.size(); ++i) {
      if (i == ambiguous_at) continue;
      std::size_t dist = i > ambiguous_at ? i - ambiguous_at : ambiguous_at - i;
      if (dist <= 5) {
        CHECK((allowed.count(sent[i].surface) || background.count(sent[i].surface)));
        ++checked;
      }
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("a zero mix weight sense never appears") {
  auto spec = small_spec();
  spec.ambiguous_words[0].senses[0].mix_weight = 1.0;
  spec.ambiguous_words[0].senses[1].mix_weight = 0.0;
  auto docs = generate_planted_corpus(spec);
  for (const auto& sent : docs[0].sentences) {
    for (const auto& tok : sent) {
      CHECK(!(tok.surface == "bank" && tok.label == "VERB"));
    }
  }
}

TEST_CASE("strip_labels produces the unlabeled twin") {
  auto docs = generate_planted_corpus(small_spec());
  auto stripped = strip_labels(docs);
  for (const auto& sent : stripped[0].sentences) {
    for (const auto& tok : sent) CHECK(tok.label == "WORD");
  }
}

TEST_CASE("separation report on a hand-built perfectly separated model") {
  auto spec = small_spec();
  // Sense vectors on distinct axes; each context word hugs its sense's axis.
  std::vector<std::pair<std::string, std::vector<float>>> rows = {
      {"bank|NOUN", {1, 0, 0, 0}},      {"bank|VERB", {0, 1, 0, 0}},
      {"tree|PLANT", {0, 0, 1, 0}},     {"tree|GRAPH", {0, 0, 0, 1}},
      {"deposit|WORD", {1, .01f, 0, 0}}, {"loan|WORD", {1, .02f, 0, 0}},
      {"teller|WORD", {1, .03f, 0, 0}}, {"gamble|WORD", {.01f, 1, 0, 0}},
      {"wager|WORD", {.02f, 1, 0, 0}},  {"bet|WORD", {.03f, 1, 0, 0}},
      {"leaf|WORD", {0, 0, 1, .01f}},   {"bark|WORD", {0, 0, 1, .02f}},
      {"root|WORD", {0, 0, 1, .03f}},   {"node|WORD", {0, 0, .01f, 1}},
      {"edge|WORD", {0, 0, .02f, 1}},   {"parent|WORD", {0, 0, .03f, 1}},
      {"the|WORD", {.5f, .5f, .5f, .5f}}};
  auto model = model_from_rows(rows);
  auto report = separation_report(model, spec, 3, EvalMode::Sense);
  REQUIRE(report.surfaces.size() == 2);
  for (const auto& sr : report.surfaces) {
    CHECK(!sr.insufficient_data);
    for (const auto& p : sr.purities) CHECK(p.purity == doctest::Approx(1.0));
    for (const auto& pm : sr.pairs) {
      CHECK(pm.neighbor_jaccard == doctest::Approx(0.0));
      CHECK(std::abs(pm.cross_sense_cosine) < 0.05);
    }
  }
}

TEST_CASE("identical sense vectors report cross cosine 1") {
  auto spec = small_spec();
  std::vector<std::pair<std::string, std::vector<float>>> rows = {
      {"bank|NOUN", {1, 1, 0}},  {"bank|VERB", {1, 1, 0}},
      {"tree|PLANT", {0, 1, 1}}, {"tree|GRAPH", {0, 1, 1}},
      {"deposit|WORD", {1, 0, 0}}, {"loan|WORD", {1, .1f, 0}},
      {"teller|WORD", {1, .2f, 0}}, {"gamble|WORD", {.9f, 1, 0}},
      {"wager|WORD", {.8f, 1, 0}}, {"bet|WORD", {.7f, 1, 0}},
      {"leaf|WORD", {0, 1, .9f}},  {"bark|WORD", {0, 1, .8f}},
      {"root|WORD", {0, .9f, 1}},  {"node|WORD", {0, .8f, 1}},
      {"edge|WORD", {0, .7f, 1}},  {"parent|WORD", {0, .6f, 1}}};
  auto model = model_from_rows(rows);
  auto report = separation_report(model, spec, 3, EvalMode::Sense);
  CHECK(report.surfaces[0].pairs[0].cross_sense_cosine == doctest::Approx(1.0));
}

TEST_CASE("missing surfaces are marked insufficient, not fatal") {
  auto spec = small_spec();
  std::vector<std::pair<std::string, std::vector<float>>> rows = {
      {"bank|NOUN", {1, 0}}, {"bank|VERB", {0, 1}},
      {"deposit|WORD", {1, .1f}}, {"loan|WORD", {1, .2f}}, {"teller|WORD", {1, .3f}},
      {"gamble|WORD", {.1f, 1}}, {"wager|WORD", {.2f, 1}}, {"bet|WORD", {.3f, 1}}};
  auto model = model_from_rows(rows);
  auto report = separation_report(model, spec, 3, EvalMode::Sense);
  REQUIRE(report.surfaces.size() == 2);
  CHECK(!report.surfaces[0].insufficient_data);
  CHECK(report.surfaces[1].insufficient_data);  // "tree" absent

  // Baseline mode likewise marks, instead of failing, when surface|WORD is gone.
  auto baseline_report = separation_report(model, spec, 3, EvalMode::Baseline);
  CHECK(baseline_report.surfaces[0].insufficient_data);
}

TEST_CASE("baseline mode scores the merged vector against every context set") {
  auto spec = small_spec();
  std::vector<std::pair<std::string, std::vector<float>>> rows = {
      {"bank|WORD", {1, 1}},
      {"tree|WORD", {1, -1}},
      {"deposit|WORD", {1, .9f}},  {"loan|WORD", {1, .8f}},  {"teller|WORD", {1, .7f}},
      {"gamble|WORD", {.9f, 1}},   {"wager|WORD", {.8f, 1}}, {"bet|WORD", {.7f, 1}},
      {"leaf|WORD", {1, -.9f}},    {"bark|WORD", {1, -.8f}}, {"root|WORD", {1, -.7f}},
      {"node|WORD", {.9f, -1}},    {"edge|WORD", {.8f, -1}}, {"parent|WORD", {.7f, -1}}};
  auto model = model_from_rows(rows);
  auto report = separation_report(model, spec, 6, EvalMode::Baseline);
  REQUIRE(report.surfaces.size() == 2);
  const auto& bank = report.surfaces[0];
  REQUIRE(bank.purities.size() == 2);
  // The merged vector's top-6 covers both context sets half-and-half.
  CHECK(bank.purities[0].purity == doctest::Approx(0.5));
  CHECK(bank.purities[1].purity == doctest::Approx(0.5));
  CHECK(bank.pairs.empty());
}

TEST_CASE("machine report format is tab-separated") {
  auto spec = small_spec();
  std::vector<std::pair<std::string, std::vector<float>>> rows = {
      {"bank|NOUN", {1, 0}}, {"bank|VERB", {0, 1}},
      {"deposit|WORD", {1, .1f}}, {"loan|WORD", {1, .2f}}, {"teller|WORD", {1, .3f}},
      {"gamble|WORD", {.1f, 1}}, {"wager|WORD", {.2f, 1}}, {"bet|WORD", {.3f, 1}}};
  auto model = model_from_rows(rows);
  auto report = separation_report(model, spec, 3, EvalMode::Sense);
  std::ostringstream machine;
  print_separation_report(report, machine, true);
  CHECK(machine.str().find("purity\tbank\tNOUN\t") != std::string::npos);
  CHECK(machine.str().find("pair\tbank\tNOUN\tVERB\t") != std::string::npos);
  CHECK(machine.str().find("insufficient\ttree") != std::string::npos);
  std::ostringstream human;
  print_separation_report(report, human, false);
  CHECK(human.str().find("surface 'bank'") != std::string::npos);
}

TEST_CASE("probe on per-example noise features scores near the majority rate") {
  Rng rng(99);
  const std::uint32_t num_classes = 3;
  const double priors[3] = {0.5, 0.3, 0.2};
  std::vector<std::vector<float>> features;
  std::vector<std::uint32_t> classes;
  std::size_t class_count[3] = {0, 0, 0};
  for (int i = 0; i < 3000; ++i) {
    double r = rng.uniform01();
    std::uint32_t c = r < priors[0] ? 0 : (r < priors[0] + priors[1] ? 1 : 2);
    classes.push_back(c);
    ++class_count[c];
    std::vector<float> noise(20);
    for (auto& x : noise) x = static_cast<float>(rng.uniform(-1.0, 1.0));
    features.push_back(std::move(noise));
  }
  const double majority =
      static_cast<double>(*std::max_element(class_count, class_count + 3)) / 3000.0;
  double accuracy = logistic_probe_accuracy(features, classes, num_classes, 1);
  CHECK(std::abs(accuracy - majority) <= 0.05);
}

TEST_CASE("probe demands ten test examples per class") {
  std::vector<std::vector<float>> features;
  std::vector<std::uint32_t> classes;
  for (int i = 0; i < 100; ++i) {
    features.push_back({static_cast<float>(i % 4), 1.0f});
    classes.push_back(i % 4);
  }
  CHECK_THROWS_WITH_AS(logistic_probe_accuracy(features, classes, 4, 1),
                       doctest::Contains("test examples"), DataError);
}

namespace {

PlantedCorpusSpec probe_spec() {
  auto spec = small_spec();
  spec.sentences = 4000;
  return spec;
}

EmbeddingModel probe_sense_model() {
  return model_from_rows({{"bank|NOUN", {1, 0, 0, 0}},
                          {"bank|VERB", {0, 1, 0, 0}},
                          {"tree|PLANT", {0, 0, 1, 0}},
                          {"tree|GRAPH", {0, 0, 0, 1}}});
}

EmbeddingModel probe_baseline_model() {
  return model_from_rows({{"bank|WORD", {1, 1, 0, 0}}, {"tree|WORD", {0, 0, 1, 1}}});
}

}  // namespace

TEST_CASE("identical models give identical probe accuracies") {
  auto spec = probe_spec();
  auto model = probe_sense_model();
  auto result = downstream_probe(model, model, spec, 5);
  CHECK(result.sense_accuracy == result.baseline_accuracy);
  CHECK(result.error_reduction == doctest::Approx(0.0));
}

TEST_CASE("downstream probe separates distinct sense vectors from merged ones") {
  auto spec = probe_spec();
  auto result = downstream_probe(probe_sense_model(), probe_baseline_model(), spec, 5);
  CHECK(result.sense_accuracy > result.baseline_accuracy);
  CHECK(result.error_reduction > 0.0);
}

TEST_CASE("swapping the probe's model arguments swaps the accuracies exactly") {
  auto spec = probe_spec();
  auto fwd = downstream_probe(probe_sense_model(), probe_baseline_model(), spec, 9);
  auto rev = downstream_probe(probe_baseline_model(), probe_sense_model(), spec, 9);
  CHECK(fwd.sense_accuracy == rev.baseline_accuracy);
  CHECK(fwd.baseline_accuracy == rev.sense_accuracy);
}

TEST_CASE("probe refuses models that do not cover the vocabulary") {
  auto spec = probe_spec();
  auto partial = model_from_rows({{"bank|NOUN", {1, 0}}, {"bank|VERB", {0, 1}}});
  CHECK_THROWS_WITH_AS(downstream_probe(partial, partial, spec, 1),
                       doctest::Contains("cover"), DataError);
}
