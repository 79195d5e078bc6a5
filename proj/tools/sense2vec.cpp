// sense2vec command line: convert and label corpora, train sense embeddings,
// query them, and run the planted-polysemy evaluation harness.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "s2v/corpus.hpp"
#include "s2v/errors.hpp"
#include "s2v/eval.hpp"
#include "s2v/model_io.hpp"
#include "s2v/query.hpp"
#include "s2v/token.hpp"
#include "s2v/trainer.hpp"
#include "s2v/vocab.hpp"

namespace {

using namespace s2v;

struct FlagDef {
  const char* name;
  bool takes_value;
};

// word2vec-style single-dash flags; --long forms are accepted as aliases.
class Args {
 public:
  Args(int argc, char** argv, int start, std::initializer_list<FlagDef> defs) {
    for (int i = start; i < argc; ++i) {
      std::string arg = argv[i];
      if (arg.size() > 1 && arg[0] == '-' &&
          !std::isdigit(static_cast<unsigned char>(arg[1])) && arg[1] != '.') {
        std::string name = arg.substr(arg[1] == '-' ? 2 : 1);
        const FlagDef* def = nullptr;
        for (const auto& d : defs) {
          if (name == d.name) {
            def = &d;
            break;
          }
        }
        if (!def) throw UsageError("unknown flag '" + arg + "'");
        if (values_.count(name)) throw UsageError("flag '" + arg + "' given twice");
        if (def->takes_value) {
          if (i + 1 >= argc) throw UsageError("flag '" + arg + "' needs a value");
          values_[name] = argv[++i];
        } else {
          values_[name] = "1";
        }
      } else {
        positionals_.push_back(std::move(arg));
      }
    }
  }

  bool has(const std::string& name) const { return values_.count(name) != 0; }

  std::string get_or(const std::string& name, const std::string& fallback) const {
    auto it = values_.find(name);
    return it == values_.end() ? fallback : it->second;
  }

  std::string require(const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end()) throw UsageError("missing required flag -" + name);
    return it->second;
  }

  std::uint64_t get_u64(const std::string& name, std::uint64_t fallback) const {
    auto it = values_.find(name);
    if (it == values_.end()) return fallback;
    try {
      std::size_t pos = 0;
      std::uint64_t v = std::stoull(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing junk");
      return v;
    } catch (const std::logic_error&) {
      throw UsageError("flag -" + name + " expects an integer, got '" + it->second + "'");
    }
  }

  double get_double(const std::string& name, double fallback) const {
    auto it = values_.find(name);
    if (it == values_.end()) return fallback;
    try {
      std::size_t pos = 0;
      double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing junk");
      return v;
    } catch (const std::logic_error&) {
      throw UsageError("flag -" + name + " expects a number, got '" + it->second + "'");
    }
  }

  const std::vector<std::string>& positionals() const { return positionals_; }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> positionals_;
};

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void print_usage(std::ostream& out) {
  out << "usage: sense2vec <command> [flags]\n"
         "\n"
         "commands:\n"
         "  convert      read tagged text or CoNLL-U, apply span/sentiment labeling,\n"
         "               write canonical tagged text\n"
         "  train        train sense embeddings on tagged text\n"
         "  nn           nearest neighbors of one sense:   nn SURFACE LABEL -load M\n"
         "  analogy      3CosAdd analogy:                  analogy A B C -load M\n"
         "  senses       list the senses of a surface:     senses SURFACE -load M\n"
         "  table        per-sense neighbor table:         table SURFACE -load M\n"
         "  eval-gen     generate a planted-polysemy corpus\n"
         "  eval-report  sense-separation report for a trained model\n"
         "  eval-probe   downstream probe: sense model vs baseline model\n"
         "\n"
         "run 'sense2vec <command> -help' for the command's flags\n";
}

void print_train_usage(std::ostream& out) {
  out << "usage: sense2vec train -train FILE [flags]\n"
         "  -train FILE        tagged-text training corpus (required)\n"
         "  -output FILE       write vectors (text, or word2vec binary with -binary 1)\n"
         "  -binary 0|1        binary output format (default 0)\n"
         "  -save-native FILE  also write the full native model (.s2v)\n"
         "  -save-vocab FILE   write the vocabulary as key<TAB>count lines\n"
         "  -size N            embedding dimension (default 500)\n"
         "  -window N          max context offset (default 10)\n"
         "  -negative N        negative samples per target (default 10)\n"
         "  -sample F          subsample threshold, 0 disables (default 1e-5)\n"
         "  -iter N            training epochs (default 3)\n"
         "  -min-count N       prune senses seen fewer times (default 10)\n"
         "  -alpha F           initial learning rate (default 0.025)\n"
         "  -threads N         worker count (default 1; >1 is non-reproducible)\n"
         "  -seed N            RNG seed (default 1)\n"
         "  -model KIND        cbow | sg | ssg (default cbow)\n"
         "  -dynamic-window 0|1  override the per-model default\n"
         "  -hs 0              accepted for flag compatibility; -hs 1 is rejected\n"
         "  -cap N             accepted and ignored\n"
         "  -progress N        progress report every N tokens, 0 off (default 100000)\n";
}

ModelFormat resolve_format(const Args& args, const std::string& path) {
  std::string fmt = args.get_or("format", "auto");
  if (fmt == "auto") return format_from_extension(path);
  if (fmt == "text") return ModelFormat::Text;
  if (fmt == "bin" || fmt == "binary") return ModelFormat::Binary;
  if (fmt == "native") return ModelFormat::Native;
  throw UsageError("unknown model format '" + fmt + "' (text|bin|native|auto)");
}

EmbeddingModel load_query_model(const Args& args) {
  std::string path = args.require("load");
  return load_model(path, resolve_format(args, path));
}

PlantedCorpusSpec load_spec(const Args& args) {
  if (!args.has("spec")) return PlantedCorpusSpec::default_spec();
  std::string path = args.require("spec");
  std::ifstream in(path);
  if (!in) throw DataError("cannot open planted spec: " + path);
  return PlantedCorpusSpec::parse(in);
}

void report_read_stats(const ReadStats& stats) {
  for (const auto& d : stats.diagnostics) std::cerr << d << '\n';
  if (stats.malformed_tokens) {
    std::cerr << stats.malformed_tokens << " malformed token(s) skipped\n";
  }
  if (stats.skipped_sentences) {
    std::cerr << stats.skipped_sentences << " sentence(s) skipped\n";
  }
}

int cmd_convert(int argc, char** argv) {
  Args args(argc, argv, 2,
            {{"input", true},
             {"output", true},
             {"format", true},
             {"label-column", true},
             {"spans", true},
             {"sentiment", true},
             {"adjective-label", true},
             {"fold-case", false},
             {"help", false}});
  if (args.has("help")) {
    std::cout << "usage: sense2vec convert -input FILE -output FILE\n"
                 "  -format auto|tagged|conllu   input format (auto by extension)\n"
                 "  -label-column upos|xpos      CoNLL-U tag column (default upos)\n"
                 "  -spans FILE       span sidecar: sentence<TAB>start<TAB>end<TAB>LABEL\n"
                 "  -sentiment FILE   one document label per line (e.g. POS / NEG)\n"
                 "  -adjective-label L  label replaced by the sentiment (default ADJ)\n"
                 "  -fold-case        lowercase all surfaces\n";
    return 0;
  }
  std::string input = args.require("input");
  std::string output = args.require("output");

  std::string format = args.get_or("format", "auto");
  if (format == "auto") {
    format = input.ends_with(".conllu") || input.ends_with(".conll") ? "conllu" : "tagged";
  }
  if (format != "tagged" && format != "conllu") {
    throw UsageError("unknown input format '" + format + "' (tagged|conllu|auto)");
  }
  if (args.has("label-column") && format != "conllu") {
    throw UsageError("-label-column only applies to CoNLL-U input");
  }

  std::ifstream in(input);
  if (!in) throw DataError("cannot open input file: " + input);
  ReadStats stats;
  std::vector<Document> docs;
  if (format == "conllu") {
    std::string column = args.get_or("label-column", "upos");
    if (column != "upos" && column != "xpos") {
      throw UsageError("-label-column must be upos or xpos");
    }
    docs = read_conllu(in, column == "upos" ? ConlluColumn::Upos : ConlluColumn::Xpos,
                       &stats, input);
  } else {
    docs = read_tagged_text(in, &stats, input);
  }

  if (args.has("spans")) {
    std::ifstream sidecar(args.require("spans"));
    if (!sidecar) throw DataError("cannot open span sidecar: " + args.require("spans"));
    auto spans = read_span_sidecar(sidecar);
    // Sidecar sentence indices are global over the stream; regroup per document.
    std::vector<std::vector<Span>> per_doc(docs.size());
    std::vector<std::size_t> doc_start(docs.size() + 1, 0);
    for (std::size_t d = 0; d < docs.size(); ++d) {
      doc_start[d + 1] = doc_start[d] + docs[d].sentences.size();
    }
    for (auto& sp : spans) {
      std::size_t d = 0;
      while (d < docs.size() && sp.sentence_index >= doc_start[d + 1]) ++d;
      if (d == docs.size()) {
        throw DataError("span sentence index " + std::to_string(sp.sentence_index) +
                        " beyond the input's " + std::to_string(doc_start.back()) +
                        " sentences");
      }
      sp.sentence_index -= doc_start[d];
      per_doc[d].push_back(sp);
    }
    for (std::size_t d = 0; d < docs.size(); ++d) {
      docs[d] = merge_spans(std::move(docs[d]), std::move(per_doc[d]));
    }
  }

  if (args.has("sentiment")) {
    std::ifstream manifest(args.require("sentiment"));
    if (!manifest) throw DataError("cannot open sentiment manifest: " + args.require("sentiment"));
    std::vector<std::string> labels;
    std::string line;
    while (std::getline(manifest, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) labels.push_back(line);
    }
    if (labels.size() != docs.size()) {
      throw DataError("sentiment manifest has " + std::to_string(labels.size()) +
                      " labels for " + std::to_string(docs.size()) + " documents");
    }
    std::string adjective = args.get_or("adjective-label", "ADJ");
    for (std::size_t d = 0; d < docs.size(); ++d) {
      docs[d].doc_label = labels[d];
      docs[d] = label_adjectives_with_sentiment(std::move(docs[d]), adjective);
    }
  }

  if (args.has("fold-case")) {
    for (auto& doc : docs) doc = fold_case(std::move(doc));
  }

  std::ofstream out(output);
  if (!out) throw DataError("cannot open for writing: " + output);
  write_tagged_text(docs, out);
  if (!out.flush()) throw DataError("I/O failure while writing " + output);
  report_read_stats(stats);
  return 0;
}

int cmd_train(int argc, char** argv) {
  Args args(argc, argv, 2,
            {{"train", true},    {"output", true},        {"binary", true},
             {"save-native", true}, {"save-vocab", true}, {"size", true},
             {"window", true},   {"negative", true},      {"sample", true},
             {"iter", true},     {"min-count", true},     {"alpha", true},
             {"threads", true},  {"seed", true},          {"model", true},
             {"dynamic-window", true}, {"hs", true},      {"cap", true},
             {"progress", true}, {"help", false}});
  if (args.has("help")) {
    print_train_usage(std::cout);
    return 0;
  }
  if (args.has("hs") && args.get_or("hs", "0") != "0") {
    throw UsageError("hierarchical softmax not supported; run with -hs 0");
  }
  // -cap is accepted for flag compatibility and does nothing.

  TrainConfig config;
  config.dim = static_cast<std::uint32_t>(args.get_u64("size", 500));
  config.window = static_cast<std::uint32_t>(args.get_u64("window", 10));
  config.negatives = static_cast<std::uint32_t>(args.get_u64("negative", 10));
  config.sample = args.get_double("sample", 1e-5);
  config.epochs = static_cast<std::uint32_t>(args.get_u64("iter", 3));
  config.min_count = static_cast<std::uint32_t>(args.get_u64("min-count", 10));
  config.alpha0 = args.get_double("alpha", 0.025);
  config.workers = static_cast<std::uint32_t>(args.get_u64("threads", 1));
  config.seed = args.get_u64("seed", 1);
  config.progress_interval = args.get_u64("progress", 100000);
  if (auto kind = model_kind_from_string(args.get_or("model", "cbow"))) {
    config.model = *kind;
  } else {
    throw UsageError("unknown model '" + args.get_or("model", "") + "' (cbow|sg|ssg)");
  }
  if (args.has("dynamic-window")) {
    config.dynamic_window = args.get_u64("dynamic-window", 1) != 0;
  }
  bool binary = args.get_u64("binary", 0) != 0;

  std::string train_path = args.require("train");
  if (!args.has("output") && !args.has("save-native") && !args.has("save-vocab")) {
    throw UsageError("nothing to do: pass -output, -save-native or -save-vocab");
  }

  TaggedTextFileCorpus corpus(train_path);
  Vocabulary vocab = build_vocab(corpus, config.min_count);
  std::cerr << "vocab: " << vocab.size() << " senses, "
            << vocab.total_train_tokens() << " trainable tokens\n";

  TrainStats stats;
  EmbeddingModel model =
      train(corpus, std::move(vocab), config,
            [](const TrainProgress& p) {
              std::cerr << p.tokens_processed << '\t' << fmt6(p.current_alpha) << '\t'
                        << fmt6(p.running_loss) << '\n';
            },
            &stats);
  if (stats.skipped_unknown) {
    std::cerr << stats.skipped_unknown << " token(s) outside the vocabulary skipped\n";
  }

  if (args.has("output")) {
    save_model(model, args.require("output"),
               binary ? ModelFormat::Binary : ModelFormat::Text);
  }
  if (args.has("save-native")) {
    save_model(model, args.require("save-native"), ModelFormat::Native);
  }
  if (args.has("save-vocab")) {
    std::ofstream out(args.require("save-vocab"));
    if (!out) throw DataError("cannot open for writing: " + args.require("save-vocab"));
    model.vocab.dump(out);
    if (!out.flush()) throw DataError("I/O failure while writing vocabulary");
  }
  return 0;
}

int cmd_nn(int argc, char** argv) {
  Args args(argc, argv, 2,
            {{"load", true}, {"format", true}, {"k", true}, {"filter-label", true},
             {"help", false}});
  if (args.has("help")) {
    std::cout << "usage: sense2vec nn SURFACE LABEL -load MODEL [-k N] [-filter-label L]\n";
    return 0;
  }
  if (args.positionals().size() != 2) {
    throw UsageError("nn expects exactly two positionals: SURFACE LABEL");
  }
  EmbeddingModel model = load_query_model(args);
  QueryEngine engine(model);
  const auto k = static_cast<std::size_t>(args.get_u64("k", 10));
  std::optional<std::string> filter;
  if (args.has("filter-label")) filter = to_upper_ascii(args.require("filter-label"));
  auto key = make_key(args.positionals()[0], to_upper_ascii(args.positionals()[1]));
  for (const auto& [nkey, sim] : engine.nearest(key, k, filter).entries) {
    std::cout << nkey << '\t' << fmt6(sim) << '\n';
  }
  return 0;
}

int cmd_analogy(int argc, char** argv) {
  Args args(argc, argv, 2, {{"load", true}, {"format", true}, {"k", true}, {"help", false}});
  if (args.has("help")) {
    std::cout << "usage: sense2vec analogy KEY_A KEY_B KEY_C -load MODEL [-k N]\n"
                 "  keys are surface|LABEL; a bare surface means surface|WORD\n";
    return 0;
  }
  if (args.positionals().size() != 3) {
    throw UsageError("analogy expects exactly three keys");
  }
  EmbeddingModel model = load_query_model(args);
  QueryEngine engine(model);
  const auto k = static_cast<std::size_t>(args.get_u64("k", 10));
  auto canonical = [](const std::string& raw) {
    auto [surface, label] = split_key(raw);
    return make_key(surface, to_upper_ascii(label));
  };
  auto result = engine.analogy(canonical(args.positionals()[0]),
                               canonical(args.positionals()[1]),
                               canonical(args.positionals()[2]), k);
  for (const auto& [nkey, sim] : result.entries) {
    std::cout << nkey << '\t' << fmt6(sim) << '\n';
  }
  return 0;
}

int cmd_senses(int argc, char** argv) {
  Args args(argc, argv, 2, {{"load", true}, {"format", true}, {"help", false}});
  if (args.has("help")) {
    std::cout << "usage: sense2vec senses SURFACE -load MODEL\n";
    return 0;
  }
  if (args.positionals().size() != 1) {
    throw UsageError("senses expects exactly one positional: SURFACE");
  }
  EmbeddingModel model = load_query_model(args);
  for (auto idx : model.vocab.senses_of(args.positionals()[0])) {
    const auto& e = model.vocab.entry(idx);
    std::cout << e.key << '\t' << e.count << '\n';
  }
  return 0;
}

int cmd_table(int argc, char** argv) {
  Args args(argc, argv, 2, {{"load", true}, {"format", true}, {"k", true}, {"help", false}});
  if (args.has("help")) {
    std::cout << "usage: sense2vec table SURFACE -load MODEL [-k N]\n";
    return 0;
  }
  if (args.positionals().size() != 1) {
    throw UsageError("table expects exactly one positional: SURFACE");
  }
  EmbeddingModel model = load_query_model(args);
  QueryEngine engine(model);
  const auto k = static_cast<std::size_t>(args.get_u64("k", 5));
  auto table = engine.sense_table(args.positionals()[0], k);

  // One column per sense, the sense itself on top with self-similarity 1.0.
  std::vector<std::vector<std::string>> columns;
  std::size_t rows = 0;
  for (const auto& [key, neighbors] : table) {
    std::vector<std::string> col;
    col.push_back(key + " 1.000");
    for (const auto& [nkey, sim] : neighbors.entries) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), " %.3f", sim);
      col.push_back(nkey + buf);
    }
    rows = std::max(rows, col.size());
    columns.push_back(std::move(col));
  }
  std::vector<std::size_t> widths(columns.size(), 0);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    for (const auto& cell : columns[c]) widths[c] = std::max(widths[c], cell.size());
  }
  for (std::size_t r = 0; r < rows; ++r) {
    std::string line;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c > 0) line += "  |  ";
      std::string cell = r < columns[c].size() ? columns[c][r] : "";
      cell.resize(widths[c], ' ');
      line += cell;
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    std::cout << line << '\n';
  }
  return 0;
}

int cmd_eval_gen(int argc, char** argv) {
  Args args(argc, argv, 2,
            {{"spec", true}, {"output", true}, {"strip-labels", false},
             {"print-spec", false}, {"help", false}});
  if (args.has("help")) {
    std::cout << "usage: sense2vec eval-gen -output FILE [-spec FILE] [-strip-labels]\n"
                 "  -spec FILE     planted-corpus spec (defaults to the built-in spec)\n"
                 "  -strip-labels  write the unlabeled baseline twin\n"
                 "  -print-spec    print the spec config to stdout instead\n";
    return 0;
  }
  PlantedCorpusSpec spec = load_spec(args);
  if (args.has("print-spec")) {
    spec.write(std::cout);
    return 0;
  }
  std::string output = args.require("output");
  auto docs = generate_planted_corpus(spec);
  if (args.has("strip-labels")) docs = strip_labels(std::move(docs));
  std::ofstream out(output);
  if (!out) throw DataError("cannot open for writing: " + output);
  write_tagged_text(docs, out);
  if (!out.flush()) throw DataError("I/O failure while writing " + output);
  return 0;
}

int cmd_eval_report(int argc, char** argv) {
  Args args(argc, argv, 2,
            {{"load", true}, {"format", true}, {"spec", true}, {"k", true},
             {"mode", true}, {"machine", false}, {"help", false}});
  if (args.has("help")) {
    std::cout << "usage: sense2vec eval-report -load MODEL [-spec FILE] [-k N]\n"
                 "                             [-mode sense|baseline] [-machine]\n";
    return 0;
  }
  PlantedCorpusSpec spec = load_spec(args);
  EmbeddingModel model = load_query_model(args);
  const auto k = static_cast<std::size_t>(args.get_u64("k", 10));
  std::string mode = args.get_or("mode", "sense");
  if (mode != "sense" && mode != "baseline") {
    throw UsageError("-mode must be sense or baseline");
  }
  auto report = separation_report(model, spec, k,
                                  mode == "sense" ? EvalMode::Sense : EvalMode::Baseline);
  print_separation_report(report, std::cout, args.has("machine"));
  return 0;
}

int cmd_eval_probe(int argc, char** argv) {
  Args args(argc, argv, 2,
            {{"sense-model", true}, {"baseline-model", true}, {"spec", true},
             {"probe-seed", true}, {"help", false}});
  if (args.has("help")) {
    std::cout << "usage: sense2vec eval-probe -sense-model FILE -baseline-model FILE\n"
                 "                            [-spec FILE] [-probe-seed N]\n";
    return 0;
  }
  PlantedCorpusSpec spec = load_spec(args);
  std::string sense_path = args.require("sense-model");
  std::string baseline_path = args.require("baseline-model");
  EmbeddingModel sense_model = load_model(sense_path, format_from_extension(sense_path));
  EmbeddingModel baseline_model =
      load_model(baseline_path, format_from_extension(baseline_path));
  auto result =
      downstream_probe(sense_model, baseline_model, spec, args.get_u64("probe-seed", 1));
  std::cout << "sense_accuracy\t" << fmt6(result.sense_accuracy) << '\n';
  std::cout << "baseline_accuracy\t" << fmt6(result.baseline_accuracy) << '\n';
  std::cout << "error_reduction\t" << fmt6(result.error_reduction) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    print_usage(std::cerr);
    return 1;
  }
  std::string command = argv[1];
  try {
    if (command == "convert") return cmd_convert(argc, argv);
    if (command == "train") return cmd_train(argc, argv);
    if (command == "nn") return cmd_nn(argc, argv);
    if (command == "analogy") return cmd_analogy(argc, argv);
    if (command == "senses") return cmd_senses(argc, argv);
    if (command == "table") return cmd_table(argc, argv);
    if (command == "eval-gen") return cmd_eval_gen(argc, argv);
    if (command == "eval-report") return cmd_eval_report(argc, argv);
    if (command == "eval-probe") return cmd_eval_probe(argc, argv);
    if (command == "-help" || command == "--help" || command == "help") {
      print_usage(std::cout);
      return 0;
    }
    throw UsageError("unknown command '" + command + "'");
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
}
