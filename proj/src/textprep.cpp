#include "how/textprep.hpp"

#include <charconv>
#include <cstdint>
#include <sstream>
#include <stdexcept>

namespace how {

namespace {

// Decodes one UTF-8 sequence starting at `i`; advances `i`. Malformed
// bytes are passed through one at a time with `valid` = false so they
// survive normalization untouched.
std::uint32_t next_codepoint(std::string_view s, std::size_t& i, bool& valid) {
  auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  unsigned char b0 = byte(i);
  valid = true;
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 0;
  std::uint32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    valid = false;
    ++i;
    return b0;
  }
  if (i + len > s.size()) {
    valid = false;
    ++i;
    return b0;
  }
  for (int k = 1; k < len; ++k) {
    unsigned char bk = byte(i + k);
    if ((bk & 0xC0) != 0x80) {
      valid = false;
      ++i;
      return b0;
    }
    cp = (cp << 6) | (bk & 0x3F);
  }
  i += len;
  return cp;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(char(cp));
  } else if (cp < 0x800) {
    out.push_back(char(0xC0 | (cp >> 6)));
    out.push_back(char(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(char(0xE0 | (cp >> 12)));
    out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(char(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(char(0xF0 | (cp >> 18)));
    out.push_back(char(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(char(0x80 | (cp & 0x3F)));
  }
}

bool is_punct(std::uint32_t cp) {
  // ASCII punctuation and symbols.
  if ((cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
      (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E)) {
    return true;
  }
  // Latin-1 punctuation.
  if (cp == 0xA1 || cp == 0xA7 || cp == 0xAB || cp == 0xB6 || cp == 0xB7 ||
      cp == 0xBB || cp == 0xBF) {
    return true;
  }
  // General Punctuation: dashes, curly quotes, daggers, bullets, ellipsis,
  // per-mille, primes, single guillemets.
  if ((cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E)) {
    return true;
  }
  // CJK full stop family and fullwidth forms seen in wire copy.
  if (cp == 0x3001 || cp == 0x3002 || (cp >= 0xFF01 && cp <= 0xFF0F) ||
      (cp >= 0xFF1A && cp <= 0xFF20) || (cp >= 0xFF3B && cp <= 0xFF40) ||
      (cp >= 0xFF5B && cp <= 0xFF65)) {
    return true;
  }
  return false;
}

bool is_space(std::uint32_t cp) {
  if (cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\v' ||
      cp == '\f') {
    return true;
  }
  return cp == 0xA0 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 ||
         cp == 0x2029 || cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

std::uint32_t to_lower(std::uint32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  // Latin-1 capitals except the multiplication sign.
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  return cp;
}

}  // namespace

std::string normalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  bool any_output = false;
  std::size_t i = 0;
  while (i < text.size()) {
    bool valid = false;
    std::uint32_t cp = next_codepoint(text, i, valid);
    if (valid && is_punct(cp)) continue;
    if (valid && is_space(cp)) {
      pending_space = any_output;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    if (valid) {
      append_utf8(out, to_lower(cp));
    } else {
      out.push_back(text[i - 1]);
    }
    any_output = true;
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find(' ', start);
    if (end == std::string_view::npos) end = text.size();
    if (end > start) tokens.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
  return tokens;
}

void EmbeddingTable::add(std::string token, Eigen::VectorXd vec) {
  if (token.empty()) throw std::runtime_error("embedding token is empty");
  for (char ch : token) {
    if (ch == ' ' || ch == '\t') {
      throw std::runtime_error("embedding token '" + token +
                               "' contains whitespace");
    }
  }
  if (dimension == 0) dimension = int(vec.size());
  if (int(vec.size()) != dimension) {
    throw std::runtime_error("embedding vector for '" + token + "' has " +
                             std::to_string(vec.size()) + " values, expected " +
                             std::to_string(dimension));
  }
  auto it = index.find(token);
  if (it != index.end()) {
    vectors[it->second] = std::move(vec);
    return;
  }
  index.emplace(token, int(tokens.size()));
  tokens.push_back(std::move(token));
  vectors.push_back(std::move(vec));
}

const Eigen::VectorXd* EmbeddingTable::find(std::string_view token) const {
  auto it = index.find(std::string(token));
  return it == index.end() ? nullptr : &vectors[it->second];
}

namespace {

// Splits on runs of spaces/tabs.
std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool parse_nonneg_int(std::string_view s, long& value) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  return ec == std::errc{} && ptr == s.data() + s.size() && value >= 0;
}

double parse_real(std::string_view s, long line_no) {
  double value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::runtime_error("line " + std::to_string(line_no) +
                             ": non-numeric value '" + std::string(s) + "'");
  }
  return value;
}

void append_real(std::string& out, double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, r.ptr);
}

}  // namespace

EmbeddingTable load_embedding_table(std::istream& in,
                                    std::vector<std::string>* warnings) {
  EmbeddingTable table;
  std::string line;
  long line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (first_content) {
      first_content = false;
      long count = 0, dim = 0;
      if (fields.size() == 2 && parse_nonneg_int(fields[0], count) &&
          parse_nonneg_int(fields[1], dim)) {
        continue;  // "<count> <dim>" header
      }
    }
    if (fields.size() < 2) {
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": expected token and vector values");
    }
    std::string token(fields[0]);
    Eigen::VectorXd vec(fields.size() - 1);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      vec[long(k) - 1] = parse_real(fields[k], line_no);
    }
    if (table.dimension != 0 && int(vec.size()) != table.dimension) {
      throw std::runtime_error(
          "line " + std::to_string(line_no) + ": vector for '" + token +
          "' has " + std::to_string(vec.size()) + " values, expected " +
          std::to_string(table.dimension));
    }
    if (warnings && table.index.count(token)) {
      warnings->push_back("line " + std::to_string(line_no) +
                          ": duplicate token '" + token + "', keeping last");
    }
    table.add(std::move(token), std::move(vec));
  }
  return table;
}

std::string dump_embedding_table(const EmbeddingTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.tokens.size(); ++i) {
    out += table.tokens[i];
    const Eigen::VectorXd& v = table.vectors[i];
    for (long k = 0; k < v.size(); ++k) {
      out.push_back(' ');
      append_real(out, v[k]);
    }
    out.push_back('\n');
  }
  return out;
}

EncodedHeadline encode(std::string_view text, const EmbeddingTable& table,
                       int pad_length) {
  EncodedHeadline enc;
  enc.matrix = Eigen::MatrixXd::Zero(pad_length, table.dimension);
  for (const std::string& token : tokenize(normalize(text))) {
    const Eigen::VectorXd* vec = table.find(token);
    if (!vec) continue;  // out-of-vocabulary tokens are dropped
    if (enc.n_tokens == pad_length) {
      enc.truncated = true;
      break;
    }
    enc.matrix.row(enc.n_tokens++) = vec->transpose();
  }
  return enc;
}

double delta_date_feature(const Date& a, const Date& b) {
  return 1.0 / (1.0 + double(days_between(a, b)));
}

long count_codepoints(std::string_view text) {
  long n = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    bool valid = false;
    next_codepoint(text, i, valid);
    ++n;
  }
  return n;
}

}  // namespace how
