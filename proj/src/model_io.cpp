#include "s2v/model_io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "s2v/errors.hpp"

namespace s2v {

namespace {

constexpr char kMagic[4] = {'S', '2', 'V', '1'};
constexpr std::uint32_t kNativeVersion = 1;

void require_nonempty(const EmbeddingModel& model) {
  if (model.vocab.empty()) throw DataError("refusing to save a model with an empty vocabulary");
  if (model.input.size() != model.vocab_size() * std::size_t(model.dim())) {
    throw std::logic_error("input matrix size does not match vocab_size x dim");
  }
}

std::string format_float(float value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::logic_error("float formatting failed");
  return std::string(buf, ptr);
}

float parse_float(std::string_view text, std::size_t row) {
  float value = 0.0f;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw DataError("row " + std::to_string(row) + ": unparseable float '" +
                    std::string(text) + "'");
  }
  return value;
}

// All multi-byte integers and floats in the binary formats are little-endian.
void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

void put_f32(std::ostream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::uint64_t offset() const { return offset_; }

  void read(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw DataError("truncated model file at byte offset " +
                      std::to_string(offset_ + static_cast<std::uint64_t>(in_.gcount())));
    }
    offset_ += n;
  }

  std::uint32_t u32() {
    char b[4];
    read(b, 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[i]);
    return v;
  }

  std::uint64_t u64() {
    char b[8];
    read(b, 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[i]);
    return v;
  }

  float f32() {
    std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }

  double f64() {
    std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  void skip(std::uint64_t n) {
    constexpr std::size_t kChunk = 4096;
    char buf[kChunk];
    while (n > 0) {
      std::size_t step = static_cast<std::size_t>(std::min<std::uint64_t>(n, kChunk));
      read(buf, step);
      n -= step;
    }
  }

  bool at_eof() {
    return in_.peek() == std::char_traits<char>::eof();
  }

 private:
  std::istream& in_;
  std::uint64_t offset_ = 0;
};

EmbeddingModel model_from_rows(std::vector<SenseEntry> entries,
                               std::vector<float> input, std::uint32_t dim) {
  EmbeddingModel model;
  model.vocab = Vocabulary::from_entries(std::move(entries));
  model.config.dim = dim;
  model.config.min_count = 1;
  model.input = std::move(input);
  return model;
}

}  // namespace

void save_text(const EmbeddingModel& model, std::ostream& out) {
  require_nonempty(model);
  out << model.vocab_size() << ' ' << model.dim() << '\n';
  for (std::uint32_t i = 0; i < model.vocab_size(); ++i) {
    out << model.vocab.entry(i).key;
    for (float v : model.input_row(i)) out << ' ' << format_float(v);
    out << '\n';
  }
  if (!out) throw DataError("I/O failure while writing text model");
}

EmbeddingModel load_text(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty model file");
  std::uint64_t vocab_size = 0;
  std::uint32_t dim = 0;
  {
    std::istringstream header(line);
    if (!(header >> vocab_size >> dim) || vocab_size == 0 || dim == 0) {
      throw DataError("bad text model header '" + line + "'");
    }
  }
  std::vector<SenseEntry> entries;
  entries.reserve(vocab_size);
  std::vector<float> input;
  input.reserve(vocab_size * dim);
  for (std::uint64_t row = 1; row <= vocab_size; ++row) {
    if (!std::getline(in, line)) {
      throw DataError("row " + std::to_string(row) + ": unexpected end of file");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t pos = line.find(' ');
    if (pos == std::string::npos || pos == 0) {
      throw DataError("row " + std::to_string(row) + ": missing key");
    }
    SenseEntry e;
    e.key = line.substr(0, pos);
    std::tie(e.surface, e.label) = split_key(e.key);
    e.count = 0;
    entries.push_back(std::move(e));

    std::uint32_t values = 0;
    while (pos != std::string::npos && pos < line.size()) {
      std::size_t next = line.find(' ', pos + 1);
      std::string_view field =
          next == std::string::npos
              ? std::string_view(line).substr(pos + 1)
              : std::string_view(line).substr(pos + 1, next - pos - 1);
      if (!field.empty()) {
        input.push_back(parse_float(field, row));
        ++values;
      }
      pos = next;
    }
    if (values != dim) {
      throw DataError("row " + std::to_string(row) + ": header says dim " +
                      std::to_string(dim) + " but the row has " +
                      std::to_string(values) + " values");
    }
  }
  return model_from_rows(std::move(entries), std::move(input), dim);
}

void save_binary(const EmbeddingModel& model, std::ostream& out) {
  require_nonempty(model);
  out << model.vocab_size() << ' ' << model.dim() << '\n';
  for (std::uint32_t i = 0; i < model.vocab_size(); ++i) {
    out << model.vocab.entry(i).key << ' ';
    for (float v : model.input_row(i)) put_f32(out, v);
    out << '\n';
  }
  if (!out) throw DataError("I/O failure while writing binary model");
}

EmbeddingModel load_binary(std::istream& in) {
  Reader reader(in);
  // ASCII header line.
  std::string header;
  for (;;) {
    char c;
    reader.read(&c, 1);
    if (c == '\n') break;
    header += c;
    if (header.size() > 64) throw DataError("bad binary model header");
  }
  std::uint64_t vocab_size = 0;
  std::uint32_t dim = 0;
  {
    std::istringstream hs(header);
    if (!(hs >> vocab_size >> dim) || vocab_size == 0 || dim == 0) {
      throw DataError("bad binary model header '" + header + "'");
    }
  }
  std::vector<SenseEntry> entries;
  entries.reserve(vocab_size);
  std::vector<float> input(vocab_size * dim);
  for (std::uint64_t row = 0; row < vocab_size; ++row) {
    std::string key;
    for (;;) {
      char c;
      reader.read(&c, 1);
      if (c == ' ') break;
      key += c;
      if (key.size() > 4096) {
        throw DataError("unterminated key near byte offset " +
                        std::to_string(reader.offset()));
      }
    }
    if (key.empty()) throw DataError("empty key in row " + std::to_string(row + 1));
    SenseEntry e;
    e.key = std::move(key);
    std::tie(e.surface, e.label) = split_key(e.key);
    entries.push_back(std::move(e));
    for (std::uint32_t d = 0; d < dim; ++d) input[row * dim + d] = reader.f32();
    char newline;
    reader.read(&newline, 1);
    if (newline != '\n') {
      throw DataError("missing record terminator at byte offset " +
                      std::to_string(reader.offset() - 1));
    }
  }
  return model_from_rows(std::move(entries), std::move(input), dim);
}

namespace {

void put_section(std::ostream& out, const char tag[4], const std::string& payload) {
  out.write(tag, 4);
  put_u64(out, payload.size());
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

std::string config_payload(const TrainConfig& c) {
  std::ostringstream s;
  put_u32(s, c.dim);
  put_u32(s, c.window);
  put_u32(s, c.negatives);
  put_f64(s, c.sample);
  put_u32(s, c.epochs);
  put_u32(s, c.min_count);
  put_f64(s, c.alpha0);
  char kind = static_cast<char>(c.model);
  s.write(&kind, 1);
  put_u32(s, c.workers);
  put_u64(s, c.seed);
  char dyn = c.dynamic_window.has_value() ? (*c.dynamic_window ? 1 : 0) : 2;
  s.write(&dyn, 1);
  put_f64(s, c.negative_power);
  return s.str();
}

}  // namespace

void save_native(const EmbeddingModel& model, std::ostream& out) {
  require_nonempty(model);
  out.write(kMagic, 4);

  {
    std::ostringstream s;
    put_u32(s, kNativeVersion);
    put_u64(s, model.vocab_size());
    put_u32(s, model.dim());
    char kind = static_cast<char>(model.config.model);
    s.write(&kind, 1);
    put_u32(s, model.config.window);
    put_section(out, "HEAD", s.str());
  }
  put_section(out, "CONF", config_payload(model.config));
  {
    std::ostringstream s;
    for (std::uint32_t i = 0; i < model.vocab_size(); ++i) {
      const SenseEntry& e = model.vocab.entry(i);
      put_u32(s, static_cast<std::uint32_t>(e.key.size()));
      s.write(e.key.data(), static_cast<std::streamsize>(e.key.size()));
      put_u64(s, e.count);
    }
    put_section(out, "VOCB", s.str());
  }
  {
    std::ostringstream s;
    for (float v : model.input) put_f32(s, v);
    put_section(out, "VECI", s.str());
  }
  {
    std::ostringstream s;
    put_u32(s, static_cast<std::uint32_t>(model.output.size()));
    for (const auto& matrix : model.output) {
      for (float v : matrix) put_f32(s, v);
    }
    put_section(out, "VECO", s.str());
  }
  if (!out) throw DataError("I/O failure while writing native model");
}

EmbeddingModel load_native(std::istream& in) {
  Reader reader(in);
  char magic[4];
  reader.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError(
        "not a native model file (magic 'S2V1' missing); text and binary models "
        "load via the text/binary readers");
  }

  bool have_head = false, have_conf = false, have_vocb = false, have_veci = false,
       have_veco = false;
  std::uint64_t vocab_size = 0;
  std::uint32_t dim = 0;
  EmbeddingModel model;
  std::vector<SenseEntry> entries;

  while (!reader.at_eof()) {
    char tag[4];
    reader.read(tag, 4);
    std::uint64_t len = reader.u64();
    std::string_view tag_sv(tag, 4);
    if (tag_sv == "HEAD") {
      std::uint32_t version = reader.u32();
      if (version != kNativeVersion) {
        throw DataError("native model version " + std::to_string(version) +
                        " not supported; this build reads version " +
                        std::to_string(kNativeVersion));
      }
      vocab_size = reader.u64();
      dim = reader.u32();
      char kind;
      reader.read(&kind, 1);
      model.config.model = static_cast<ModelKind>(kind);
      model.config.window = reader.u32();
      if (vocab_size == 0 || dim == 0) throw DataError("bad native model header");
      have_head = true;
    } else if (tag_sv == "CONF") {
      model.config.dim = reader.u32();
      model.config.window = reader.u32();
      model.config.negatives = reader.u32();
      model.config.sample = reader.f64();
      model.config.epochs = reader.u32();
      model.config.min_count = reader.u32();
      model.config.alpha0 = reader.f64();
      char kind;
      reader.read(&kind, 1);
      model.config.model = static_cast<ModelKind>(kind);
      model.config.workers = reader.u32();
      model.config.seed = reader.u64();
      char dyn;
      reader.read(&dyn, 1);
      model.config.dynamic_window =
          dyn == 2 ? std::nullopt : std::optional<bool>(dyn == 1);
      model.config.negative_power = reader.f64();
      have_conf = true;
    } else if (tag_sv == "VOCB") {
      if (!have_head) throw DataError("native model: VOCB section before HEAD");
      entries.reserve(vocab_size);
      for (std::uint64_t i = 0; i < vocab_size; ++i) {
        std::uint32_t key_len = reader.u32();
        if (key_len == 0 || key_len > 1 << 20) {
          throw DataError("native model: implausible key length at byte offset " +
                          std::to_string(reader.offset()));
        }
        SenseEntry e;
        e.key.resize(key_len);
        reader.read(e.key.data(), key_len);
        e.count = reader.u64();
        std::tie(e.surface, e.label) = split_key(e.key);
        entries.push_back(std::move(e));
      }
      have_vocb = true;
    } else if (tag_sv == "VECI") {
      if (!have_head) throw DataError("native model: VECI section before HEAD");
      if (len != vocab_size * dim * 4) {
        throw DataError("native model: input matrix has " + std::to_string(len) +
                        " bytes, expected " + std::to_string(vocab_size * dim * 4));
      }
      model.input.resize(vocab_size * dim);
      for (auto& v : model.input) v = reader.f32();
      have_veci = true;
    } else if (tag_sv == "VECO") {
      if (!have_head) throw DataError("native model: VECO section before HEAD");
      std::uint32_t matrices = reader.u32();
      if (len != 4 + std::uint64_t(matrices) * vocab_size * dim * 4) {
        throw DataError("native model: output block length mismatch");
      }
      model.output.assign(matrices, std::vector<float>(vocab_size * dim));
      for (auto& matrix : model.output) {
        for (auto& v : matrix) v = reader.f32();
      }
      have_veco = true;
    } else {
      reader.skip(len);  // unknown section from a newer writer
    }
  }

  if (!have_head || !have_conf || !have_vocb || !have_veci || !have_veco) {
    throw DataError("native model: missing required sections");
  }
  model.config.dim = dim;
  model.vocab = Vocabulary::from_entries(std::move(entries));
  return model;
}

ModelFormat format_from_extension(const std::string& path) {
  auto dot = path.rfind('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".txt") return ModelFormat::Text;
  if (ext == ".bin") return ModelFormat::Binary;
  if (ext == ".s2v") return ModelFormat::Native;
  throw DataError("cannot infer model format from '" + path +
                  "' (expected .txt, .bin or .s2v); pass an explicit format");
}

void save_model(const EmbeddingModel& model, const std::string& path, ModelFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  switch (format) {
    case ModelFormat::Text: save_text(model, out); break;
    case ModelFormat::Binary: save_binary(model, out); break;
    case ModelFormat::Native: save_native(model, out); break;
  }
  if (!out.flush()) throw DataError("I/O failure while writing " + path);
}

EmbeddingModel load_model(const std::string& path, ModelFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path);
  switch (format) {
    case ModelFormat::Text: return load_text(in);
    case ModelFormat::Binary: return load_binary(in);
    case ModelFormat::Native: return load_native(in);
  }
  throw std::logic_error("unreachable model format");
}

}  // namespace s2v
