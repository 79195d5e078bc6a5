#include "s2v/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "s2v/errors.hpp"
#include "s2v/rng.hpp"

namespace s2v {

namespace {

// Generation constants: neighbors this close to the ambiguous token come from
// the sense's context vocabulary; a slice of them are labeled distractors.
constexpr std::uint32_t kInWindowRadius = 5;
constexpr double kContextProb = 0.85;
constexpr double kDistractorLabelProb = 0.3;
const std::string kDistractorLabel = "FILL";

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string w;
  while (ss >> w) out.push_back(w);
  return out;
}

}  // namespace

void PlantedCorpusSpec::validate() const {
  if (ambiguous_words.empty()) throw DataError("planted spec: no ambiguous words");
  if (sentences < 1) throw DataError("planted spec: sentence count must be positive");
  if (sentence_length < 2) throw DataError("planted spec: sentences need at least 2 tokens");
  if (background_vocab.empty()) throw DataError("planted spec: background vocabulary is empty");

  std::unordered_set<std::string> surfaces;
  std::unordered_set<std::string> background(background_vocab.begin(),
                                             background_vocab.end());
  if (background.size() != background_vocab.size()) {
    throw DataError("planted spec: duplicate background word");
  }
  for (const auto& word : ambiguous_words) {
    if (word.surface.empty()) throw DataError("planted spec: empty ambiguous surface");
    if (!surfaces.insert(word.surface).second) {
      throw DataError("planted spec: duplicate ambiguous surface '" + word.surface + "'");
    }
    if (word.senses.empty()) {
      throw DataError("planted spec: surface '" + word.surface + "' has no senses");
    }
    double weight_sum = 0.0;
    std::unordered_set<std::string> labels;
    std::unordered_set<std::string> seen_context;
    for (const auto& sense : word.senses) {
      if (sense.label.empty() || sense.label == kUnlabeledLabel) {
        throw DataError("planted spec: sense of '" + word.surface +
                        "' needs a label other than the reserved WORD");
      }
      if (!labels.insert(sense.label).second) {
        throw DataError("planted spec: duplicate sense label '" + sense.label +
                        "' for '" + word.surface + "'");
      }
      if (sense.mix_weight < 0.0) {
        throw DataError("planted spec: negative mix weight for '" + word.surface + "'");
      }
      weight_sum += sense.mix_weight;
      if (sense.context_vocab.empty()) {
        throw DataError("planted spec: sense " + sense.label + " of '" + word.surface +
                        "' has an empty context vocabulary");
      }
      for (const auto& w : sense.context_vocab) {
        if (!seen_context.insert(w).second) {
          throw DataError("planted spec: overlapping context vocabularies for '" +
                          word.surface + "': word '" + w +
                          "' appears in more than one sense");
        }
        if (background.count(w)) {
          throw DataError("planted spec: context word '" + w +
                          "' also appears in the background vocabulary");
        }
      }
    }
    if (std::abs(weight_sum - 1.0) > 1e-9) {
      throw DataError("planted spec: mix weights for '" + word.surface +
                      "' sum to " + std::to_string(weight_sum) + ", expected 1");
    }
  }
  // An ambiguous surface inside any context/background set would break the
  // purity oracle's premise.
  for (const auto& word : ambiguous_words) {
    if (background.count(word.surface)) {
      throw DataError("planted spec: ambiguous surface '" + word.surface +
                      "' also appears in the background vocabulary");
    }
    for (const auto& other : ambiguous_words) {
      for (const auto& sense : other.senses) {
        if (std::find(sense.context_vocab.begin(), sense.context_vocab.end(),
                      word.surface) != sense.context_vocab.end()) {
          throw DataError("planted spec: ambiguous surface '" + word.surface +
                          "' appears in a context vocabulary");
        }
      }
    }
  }
}

PlantedCorpusSpec PlantedCorpusSpec::default_spec() {
  PlantedCorpusSpec spec;
  spec.sentences = 50000;
  spec.sentence_length = 8;
  spec.seed = 1;
  spec.ambiguous_words = {
      {"bank",
       {{"NOUN",
         {"deposit", "loan", "teller", "lender", "mortgage", "cash", "credit",
          "branch", "vault", "interest", "account", "savings", "cheque", "payment",
          "currency"},
         0.5},
        {"VERB",
         {"gamble", "wager", "bet", "stake", "odds", "casino", "dice", "roulette",
          "bluff", "jackpot", "payout", "bookie", "hedge", "punt", "ante"},
         0.5}}},
      {"apple",
       {{"NOUN",
         {"orchard", "pear", "peach", "cider", "pie", "harvest", "ripe", "juicy",
          "blossom", "seedling", "crumble", "cobbler", "grove", "picker", "jam"},
         0.5},
        {"PROPN",
         {"software", "laptop", "tablet", "smartphone", "startup", "silicon",
          "processor", "gadget", "firmware", "keynote", "patent", "chipset", "app",
          "device", "developer"},
         0.5}}},
      {"so",
       {{"INTJ",
         {"well", "anyway", "okay", "alright", "hmm", "look", "listen", "honestly",
          "frankly", "basically", "seriously", "indeed"},
         0.4},
        {"ADV",
         {"very", "too", "quite", "rather", "extremely", "really", "fairly",
          "incredibly", "immensely", "awfully", "somewhat", "terribly"},
         0.3},
        {"ADJ",
         {"lovely", "dreadful", "splendid", "charming", "hideous", "delightful",
          "ghastly", "wonderful", "miserable", "shoddy", "superb", "drab"},
         0.3}}}};
  spec.background_vocab = {
      "the",   "a",     "an",      "of",      "to",      "and",     "in",
      "that",  "it",    "was",     "for",     "on",      "with",    "as",
      "at",    "by",    "from",    "this",    "but",     "not",     "are",
      "be",    "have",  "had",     "they",    "you",     "we",      "he",
      "she",   "his",   "her",     "its",     "our",     "their",   "when",
      "then",  "what",  "who",     "how",     "why",     "where",   "which",
      "while", "during", "before", "after",   "between", "among",   "through",
      "against"};
  return spec;
}

PlantedCorpusSpec PlantedCorpusSpec::parse(std::istream& in) {
  PlantedCorpusSpec spec;
  spec.ambiguous_words.clear();
  spec.background_vocab.clear();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw DataError("planted spec line " + std::to_string(line_no) +
                      ": expected key = value");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    try {
      if (key == "sentences") {
        spec.sentences = std::stoull(value);
      } else if (key == "sentence_length") {
        spec.sentence_length = static_cast<std::uint32_t>(std::stoul(value));
      } else if (key == "seed") {
        spec.seed = std::stoull(value);
      } else if (key == "background") {
        for (auto& w : split_words(value)) spec.background_vocab.push_back(std::move(w));
      } else if (key == "word") {
        if (value.empty()) throw DataError("empty surface");
        spec.ambiguous_words.push_back(PlantedWord{value, {}});
      } else if (key == "sense") {
        if (spec.ambiguous_words.empty()) {
          throw DataError("planted spec line " + std::to_string(line_no) +
                          ": 'sense' before any 'word'");
        }
        auto fields = split_words(value);
        if (fields.size() < 3) {
          throw DataError("planted spec line " + std::to_string(line_no) +
                          ": sense needs LABEL WEIGHT word...");
        }
        PlantedSense sense;
        sense.label = to_upper_ascii(fields[0]);
        sense.mix_weight = std::stod(fields[1]);
        sense.context_vocab.assign(fields.begin() + 2, fields.end());
        spec.ambiguous_words.back().senses.push_back(std::move(sense));
      } else {
        throw DataError("planted spec line " + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw DataError("planted spec line " + std::to_string(line_no) +
                      ": unparseable value '" + value + "'");
    }
  }
  if (in.bad()) throw DataError("I/O failure while reading planted spec");
  spec.validate();
  return spec;
}

void PlantedCorpusSpec::write(std::ostream& out) const {
  out << "sentences = " << sentences << '\n';
  out << "sentence_length = " << sentence_length << '\n';
  out << "seed = " << seed << '\n';
  out << "background =";
  for (const auto& w : background_vocab) out << ' ' << w;
  out << '\n';
  for (const auto& word : ambiguous_words) {
    out << "word = " << word.surface << '\n';
    for (const auto& sense : word.senses) {
      out << "sense = " << sense.label << ' ' << sense.mix_weight;
      for (const auto& w : sense.context_vocab) out << ' ' << w;
      out << '\n';
    }
  }
}

std::vector<Document> generate_planted_corpus(const PlantedCorpusSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  Document doc;
  doc.id = "planted";
  doc.sentences.reserve(spec.sentences);
  for (std::uint64_t s = 0; s < spec.sentences; ++s) {
    const PlantedWord& word =
        spec.ambiguous_words[rng.below(spec.ambiguous_words.size())];
    double r = rng.uniform01();
    const PlantedSense* sense = &word.senses.back();
    double cum = 0.0;
    for (const auto& cand : word.senses) {
      cum += cand.mix_weight;
      if (r < cum) {
        sense = &cand;
        break;
      }
    }
    const std::size_t pos = rng.below(spec.sentence_length);
    Sentence sent(spec.sentence_length);
    for (std::size_t i = 0; i < spec.sentence_length; ++i) {
      if (i == pos) {
        sent[i] = SenseToken{word.surface, sense->label};
        continue;
      }
      const std::size_t dist = i > pos ? i - pos : pos - i;
      if (dist <= kInWindowRadius && rng.uniform01() < kContextProb) {
        sent[i] = SenseToken{
            sense->context_vocab[rng.below(sense->context_vocab.size())],
            kUnlabeledLabel};
      } else {
        std::string surface =
            spec.background_vocab[rng.below(spec.background_vocab.size())];
        std::string label = dist <= kInWindowRadius &&
                                    rng.uniform01() < kDistractorLabelProb
                                ? kDistractorLabel
                                : kUnlabeledLabel;
        sent[i] = SenseToken{std::move(surface), std::move(label)};
      }
    }
    doc.sentences.push_back(std::move(sent));
  }
  std::vector<Document> docs;
  docs.push_back(std::move(doc));
  return docs;
}

std::vector<Document> strip_labels(std::vector<Document> docs) {
  for (auto& doc : docs) {
    for (auto& sent : doc.sentences) {
      for (auto& tok : sent) tok.label = kUnlabeledLabel;
    }
  }
  return docs;
}

namespace {

double purity_against(const NeighborResult& neighbors,
                      const std::unordered_set<std::string>& context_set) {
  if (neighbors.entries.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& [key, sim] : neighbors.entries) {
    auto [surface, label] = split_key(key);
    if (context_set.count(surface)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(neighbors.entries.size());
}

double jaccard(const NeighborResult& a, const NeighborResult& b) {
  std::unordered_set<std::string> sa;
  for (const auto& [key, sim] : a.entries) sa.insert(key);
  std::size_t inter = 0;
  std::unordered_set<std::string> uni = sa;
  for (const auto& [key, sim] : b.entries) {
    if (sa.count(key)) ++inter;
    uni.insert(key);
  }
  if (uni.empty()) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni.size());
}

}  // namespace

SeparationReport separation_report(const EmbeddingModel& model,
                                   const PlantedCorpusSpec& spec, std::size_t k,
                                   EvalMode mode) {
  spec.validate();
  if (k < 1) throw DataError("separation report: k must be at least 1");
  QueryEngine engine(model);
  SeparationReport report;
  report.k = k;

  for (const auto& word : spec.ambiguous_words) {
    SurfaceReport sr;
    sr.surface = word.surface;
    std::vector<const PlantedSense*> live;
    for (const auto& sense : word.senses) {
      if (sense.mix_weight > 0.0) live.push_back(&sense);
    }
    if (live.empty()) {
      sr.insufficient_data = true;
      report.surfaces.push_back(std::move(sr));
      continue;
    }

    if (mode == EvalMode::Sense) {
      bool missing = false;
      for (const auto* sense : live) {
        if (!model.vocab.find(make_key(word.surface, sense->label))) missing = true;
      }
      if (missing) {
        sr.insufficient_data = true;
        report.surfaces.push_back(std::move(sr));
        continue;
      }
      std::vector<NeighborResult> neighbor_lists;
      neighbor_lists.reserve(live.size());
      for (const auto* sense : live) {
        NeighborResult nn = engine.nearest(make_key(word.surface, sense->label), k);
        std::unordered_set<std::string> context_set(sense->context_vocab.begin(),
                                                    sense->context_vocab.end());
        sr.purities.push_back({sense->label, purity_against(nn, context_set)});
        neighbor_lists.push_back(std::move(nn));
      }
      for (std::size_t i = 0; i < live.size(); ++i) {
        for (std::size_t j = i + 1; j < live.size(); ++j) {
          auto idx_i = model.vocab.find(make_key(word.surface, live[i]->label));
          auto idx_j = model.vocab.find(make_key(word.surface, live[j]->label));
          SensePairMetrics pm;
          pm.label_a = live[i]->label;
          pm.label_b = live[j]->label;
          pm.cross_sense_cosine =
              cosine(model.input_row(*idx_i), model.input_row(*idx_j));
          pm.neighbor_jaccard = jaccard(neighbor_lists[i], neighbor_lists[j]);
          sr.pairs.push_back(std::move(pm));
        }
      }
    } else {
      const std::string merged_key = make_key(word.surface, kUnlabeledLabel);
      if (!model.vocab.find(merged_key)) {
        sr.insufficient_data = true;
        report.surfaces.push_back(std::move(sr));
        continue;
      }
      NeighborResult nn = engine.nearest(merged_key, k);
      for (const auto* sense : live) {
        std::unordered_set<std::string> context_set(sense->context_vocab.begin(),
                                                    sense->context_vocab.end());
        sr.purities.push_back({sense->label, purity_against(nn, context_set)});
      }
    }
    report.surfaces.push_back(std::move(sr));
  }
  return report;
}

void print_separation_report(const SeparationReport& report, std::ostream& out,
                             bool machine) {
  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return std::string(buf);
  };
  if (machine) {
    for (const auto& sr : report.surfaces) {
      if (sr.insufficient_data) {
        out << "insufficient\t" << sr.surface << '\n';
        continue;
      }
      for (const auto& p : sr.purities) {
        out << "purity\t" << sr.surface << '\t' << p.label << '\t' << fmt(p.purity)
            << '\n';
      }
      for (const auto& pm : sr.pairs) {
        out << "pair\t" << sr.surface << '\t' << pm.label_a << '\t' << pm.label_b
            << '\t' << fmt(pm.cross_sense_cosine) << '\t' << fmt(pm.neighbor_jaccard)
            << '\n';
      }
    }
    return;
  }
  out << "separation report (k=" << report.k << ")\n";
  for (const auto& sr : report.surfaces) {
    out << "surface '" << sr.surface << "'\n";
    if (sr.insufficient_data) {
      out << "  insufficient data (surface missing from the model)\n";
      continue;
    }
    for (const auto& p : sr.purities) {
      out << "  purity@" << report.k << ' ' << p.label << ' ' << fmt(p.purity) << '\n';
    }
    for (const auto& pm : sr.pairs) {
      out << "  pair " << pm.label_a << '/' << pm.label_b << " cross_cosine "
          << fmt(pm.cross_sense_cosine) << " jaccard@" << report.k << ' '
          << fmt(pm.neighbor_jaccard) << '\n';
    }
  }
}

double logistic_probe_accuracy(const std::vector<std::vector<float>>& features,
                               const std::vector<std::uint32_t>& classes,
                               std::uint32_t num_classes, std::uint64_t seed) {
  if (features.size() != classes.size() || features.empty()) {
    throw DataError("probe: features and classes must be the same non-zero size");
  }
  const std::size_t n = features.size();
  const std::size_t dim = features[0].size();
  for (const auto& f : features) {
    if (f.size() != dim) throw DataError("probe: inconsistent feature dimensions");
  }
  for (auto c : classes) {
    if (c >= num_classes) throw DataError("probe: class id out of range");
  }

  // L2-normalized features with a bias slot.
  std::vector<std::vector<double>> x(n, std::vector<double>(dim + 1, 1.0));
  for (std::size_t i = 0; i < n; ++i) {
    double norm = 0.0;
    for (float v : features[i]) norm += static_cast<double>(v) * v;
    norm = std::sqrt(norm);
    for (std::size_t d = 0; d < dim; ++d) {
      x[i][d] = norm > 0.0 ? features[i][d] / norm : 0.0;
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(mix_seed(seed, 11));
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[rng.below(i + 1)]);
  }
  const std::size_t n_test = n / 5;
  if (n_test == 0) throw DataError("probe: too few examples for an 80/20 split");

  std::vector<std::size_t> test_per_class(num_classes, 0);
  for (std::size_t i = 0; i < n_test; ++i) ++test_per_class[classes[order[i]]];
  for (std::uint32_t c = 0; c < num_classes; ++c) {
    if (test_per_class[c] < 10) {
      throw DataError("probe: class " + std::to_string(c) + " has only " +
                      std::to_string(test_per_class[c]) +
                      " test examples; increase the planted spec's sentence count");
    }
  }

  const std::size_t n_train = n - n_test;
  std::vector<double> w(std::size_t(num_classes) * (dim + 1), 0.0);
  std::vector<double> grad(w.size());
  std::vector<double> logits(num_classes);
  constexpr int kIters = 400;
  constexpr double kLearningRate = 1.0;
  for (int iter = 0; iter < kIters; ++iter) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t t = n_test; t < n; ++t) {
      const auto& xi = x[order[t]];
      const std::uint32_t yi = classes[order[t]];
      double max_logit = -1e300;
      for (std::uint32_t c = 0; c < num_classes; ++c) {
        double z = 0.0;
        const double* wc = w.data() + std::size_t(c) * (dim + 1);
        for (std::size_t d = 0; d <= dim; ++d) z += wc[d] * xi[d];
        logits[c] = z;
        max_logit = std::max(max_logit, z);
      }
      double denom = 0.0;
      for (std::uint32_t c = 0; c < num_classes; ++c) {
        logits[c] = std::exp(logits[c] - max_logit);
        denom += logits[c];
      }
      for (std::uint32_t c = 0; c < num_classes; ++c) {
        const double g = logits[c] / denom - (c == yi ? 1.0 : 0.0);
        double* gc = grad.data() + std::size_t(c) * (dim + 1);
        for (std::size_t d = 0; d <= dim; ++d) gc[d] += g * xi[d];
      }
    }
    const double step = kLearningRate / static_cast<double>(n_train);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= step * grad[i];
  }

  std::size_t correct = 0;
  for (std::size_t t = 0; t < n_test; ++t) {
    const auto& xi = x[order[t]];
    std::uint32_t best = 0;
    double best_z = -1e300;
    for (std::uint32_t c = 0; c < num_classes; ++c) {
      double z = 0.0;
      const double* wc = w.data() + std::size_t(c) * (dim + 1);
      for (std::size_t d = 0; d <= dim; ++d) z += wc[d] * xi[d];
      if (z > best_z) {
        best_z = z;
        best = c;
      }
    }
    if (best == classes[order[t]]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(n_test);
}

namespace {

std::span<const float> probe_feature(const EmbeddingModel& model,
                                     const std::string& surface,
                                     const std::string& label) {
  if (auto idx = model.vocab.find(make_key(surface, label))) {
    return model.input_row(*idx);
  }
  auto senses = model.vocab.senses_of(surface);
  if (senses.size() == 1) return model.input_row(senses[0]);
  throw DataError("model does not cover probe vocabulary: no usable sense of '" +
                  surface + "' for gold label " + label);
}

}  // namespace

ProbeResult downstream_probe(const EmbeddingModel& sense_model,
                             const EmbeddingModel& baseline_model,
                             const PlantedCorpusSpec& spec, std::uint64_t probe_seed) {
  spec.validate();

  struct ProbeClass {
    const PlantedWord* word;
    const PlantedSense* sense;
  };
  std::vector<ProbeClass> class_defs;
  for (const auto& word : spec.ambiguous_words) {
    for (const auto& sense : word.senses) {
      if (sense.mix_weight > 0.0) class_defs.push_back({&word, &sense});
    }
  }
  const auto num_classes = static_cast<std::uint32_t>(class_defs.size());
  if (num_classes < 2) throw DataError("probe: need at least two planted classes");

  const std::uint64_t n = std::min<std::uint64_t>(spec.sentences, 5000);
  Rng rng(mix_seed(probe_seed, 101));
  std::vector<std::uint32_t> classes(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto& w = spec.ambiguous_words[rng.below(spec.ambiguous_words.size())];
    double r = rng.uniform01();
    const PlantedSense* sense = nullptr;
    double cum = 0.0;
    for (const auto& cand : w.senses) {
      cum += cand.mix_weight;
      if (r < cum) {
        sense = &cand;
        break;
      }
    }
    if (!sense) {
      for (auto it = w.senses.rbegin(); it != w.senses.rend(); ++it) {
        if (it->mix_weight > 0.0) {
          sense = &*it;
          break;
        }
      }
    }
    std::uint32_t cls = 0;
    for (std::uint32_t c = 0; c < num_classes; ++c) {
      if (class_defs[c].word == &w && class_defs[c].sense == sense) {
        cls = c;
        break;
      }
    }
    classes[i] = cls;
  }

  auto arm_features = [&](const EmbeddingModel& model) {
    std::vector<std::vector<float>> features;
    features.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      const ProbeClass& pc = class_defs[classes[i]];
      auto row = probe_feature(model, pc.word->surface, pc.sense->label);
      features.emplace_back(row.begin(), row.end());
    }
    return features;
  };

  ProbeResult result;
  result.sense_accuracy =
      logistic_probe_accuracy(arm_features(sense_model), classes, num_classes, probe_seed);
  result.baseline_accuracy = logistic_probe_accuracy(arm_features(baseline_model),
                                                     classes, num_classes, probe_seed);
  result.error_reduction =
      result.baseline_accuracy < 1.0
          ? (result.sense_accuracy - result.baseline_accuracy) /
                (1.0 - result.baseline_accuracy)
          : 0.0;
  return result;
}

}  // namespace s2v
