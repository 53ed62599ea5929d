// Hand-built inputs shared by several test files.

#ifndef SEMDIV_TESTS_FIXTURES_HPP
#define SEMDIV_TESTS_FIXTURES_HPP

#include <string>
#include <vector>

#include "semdiv/synthgen.hpp"

namespace fixtures {

using namespace semdiv;

// "Now, however, one of them is suddenly asking your help, and you can see
// from this how weak they are." with its French translation, a dependency
// parse of the English side and a word alignment.
inline Seed table1_seed() {
  Seed s;
  s.pair = make_pair_from_raw(
      "t1",
      "Now , however , one of them is suddenly asking your help , and you can see from this how weak they are .",
      "Maintenant , cependant , l' un d' eux vient soudainement demander votre aide et vous pouvez voir à quel "
      "point ils sont faibles .");
  //               Now ,  however ,  one of them is suddenly asking
  s.src_tree.heads = {10, 10, 10, 10, 10, 7, 5, 10, 10, 0,
                      // your help , and you can see from this how weak they are .
                      12, 10, 17, 17, 17, 17, 10, 19, 17, 21, 23, 23, 17, 10};
  s.src_tree.upos = {"ADV",  "PUNCT", "ADV",  "PUNCT", "NUM",  "ADP", "PRON", "AUX",
                     "ADV",  "VERB",  "PRON", "NOUN",  "PUNCT", "CCONJ", "PRON", "AUX",
                     "VERB", "ADP",   "PRON", "ADV",   "ADJ",  "PRON", "AUX",  "PUNCT"};
  s.src_lemmas = {"now", ",", "however", ",", "one", "of", "they", "be", "suddenly", "ask", "your", "help",
                  ",",   "and", "you", "can", "see", "from", "this", "how", "weak", "they", "be", "."};
  s.alignment = parse_pharaoh(
      "0-0 1-1 2-2 3-3 4-4 4-5 5-6 6-7 7-8 8-9 9-10 10-11 11-12 13-13 14-14 15-15 16-16 17-17 "
      "19-18 20-22 21-20 22-21 23-23");
  validate_seed(s);
  return s;
}

// Indices into the seed above.
inline constexpr std::size_t kHow = 19, kAre = 22, kSuddenly = 8, kHelp = 11;
inline constexpr std::size_t kFrQuel = 18, kFrPoint = 19, kFrIls = 20, kFrSont = 21, kFrFaibles = 22;
inline constexpr std::size_t kFrSoudainement = 9, kFrAide = 12;

inline std::vector<std::size_t> div_positions(const std::vector<Label>& v) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == Label::Div) out.push_back(i);
  }
  return out;
}

}  // namespace fixtures

#endif  // SEMDIV_TESTS_FIXTURES_HPP
