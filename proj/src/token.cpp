#include "s2v/token.hpp"

#include <cctype>

namespace s2v {

std::string encode_surface(std::string_view surface) {
  std::string out;
  out.reserve(surface.size());
  for (char c : surface) {
    if (c == '|') {
      out += "%7C";
    } else if (c == '%') {
      out += "%25";
    } else {
      out += c;
    }
  }
  return out;
}

std::string decode_surface(std::string_view encoded) {
  std::string out;
  out.reserve(encoded.size());
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    if (encoded[i] == '%' && i + 2 < encoded.size()) {
      char a = encoded[i + 1];
      char b = encoded[i + 2];
      if (a == '7' && (b == 'C' || b == 'c')) {
        out += '|';
        i += 2;
        continue;
      }
      if (a == '2' && b == '5') {
        out += '%';
        i += 2;
        continue;
      }
    }
    // A '%' that is not part of a known escape passes through verbatim, so
    // corpora that never heard of the convention still load.
    out += encoded[i];
  }
  return out;
}

std::string to_upper_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string make_key(std::string_view surface, std::string_view label) {
  std::string key = encode_surface(surface);
  key += '|';
  key += label;
  return key;
}

std::pair<std::string, std::string> split_key(std::string_view key) {
  auto pos = key.rfind('|');
  if (pos == std::string_view::npos) {
    return {decode_surface(key), kUnlabeledLabel};
  }
  return {decode_surface(key.substr(0, pos)), std::string(key.substr(pos + 1))};
}

}  // namespace s2v
