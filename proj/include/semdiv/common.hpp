// Shared vocabulary types, errors and small string/RNG helpers.

#ifndef SEMDIV_COMMON_HPP
#define SEMDIV_COMMON_HPP

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace semdiv {

// Token-level tag: equivalent or divergent.
enum class Label : std::uint8_t { Eq = 0, Div = 1 };

inline const char* to_string(Label l) { return l == Label::Eq ? "EQ" : "DIV"; }

inline Label label_from_string(std::string_view s) {
  if (s == "EQ") return Label::Eq;
  if (s == "DIV") return Label::Div;
  throw std::invalid_argument("unknown token label: " + std::string(s));
}

enum class Side : std::uint8_t { Src = 0, Tgt = 1 };

inline Side opposite(Side s) { return s == Side::Src ? Side::Tgt : Side::Src; }

inline const char* to_string(Side s) { return s == Side::Src ? "src" : "tgt"; }

// Sentence-level binary decision.
enum class SentenceLabel : std::uint8_t { Equivalent, Divergent };

inline const char* to_string(SentenceLabel l) {
  return l == SentenceLabel::Equivalent ? "equivalent" : "divergent";
}

// Malformed input. `line` is 1-based, 0 when not applicable.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what
                                : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A generator had nothing it was allowed to edit; callers skip the seed.
class NoEligibleEdit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace util {

inline std::vector<std::string> split(std::string_view s, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = s.find(delim, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

// Splits on runs of ASCII whitespace; never yields empty pieces.
inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::string join(const std::vector<std::string>& parts,
                        std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

// FNV-1a; stable across platforms, unlike std::hash.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream per (global seed, key) so per-item work can be
// reordered or parallelized without changing results.
inline std::mt19937_64 derive_rng(std::uint64_t seed, std::string_view key) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(fnv1a(key))));
}

// Uniform index in [0, n). Avoids std::uniform_int_distribution, whose
// output is library-specific.
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index over empty range");
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return static_cast<std::size_t>(r % n);
}

template <class T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_index(rng, i)]);
  }
}

inline double uniform_real(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace util
}  // namespace semdiv

#endif  // SEMDIV_COMMON_HPP
