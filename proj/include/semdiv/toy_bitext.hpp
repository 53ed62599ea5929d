// A small English/French bitext generator with gold parses, alignments and a
// hypernym/hyponym table. Used for smoke runs, tests and the synthetic
// acceptance experiments; it is not a model of real translation.

#ifndef SEMDIV_TOY_BITEXT_HPP
#define SEMDIV_TOY_BITEXT_HPP

#include <cstdio>
#include <string>
#include <vector>

#include "semdiv/common.hpp"
#include "semdiv/corpus_io.hpp"
#include "semdiv/synthgen.hpp"

namespace semdiv::toy {

struct Word {
  const char* en;
  const char* en_lemma;
  const char* fr;
  const char* parent;  // hypernym (by English lemma), "" for none
};

// clang-format off
inline const std::vector<Word>& nouns() {
  static const std::vector<Word> v = {
      {"animal", "animal", "animal", ""},     {"dog", "dog", "chien", "animal"},
      {"puppy", "puppy", "chiot", "dog"},     {"hound", "hound", "limier", "dog"},
      {"cat", "cat", "chat", "animal"},       {"kitten", "kitten", "chaton", "cat"},
      {"horse", "horse", "cheval", "animal"}, {"pony", "pony", "poney", "horse"},
      {"bird", "bird", "oiseau", "animal"},   {"sparrow", "sparrow", "moineau", "bird"},
      {"vehicle", "vehicle", "véhicule", ""}, {"car", "car", "voiture", "vehicle"},
      {"taxi", "taxi", "taxi", "car"},        {"truck", "truck", "camion", "vehicle"},
      {"boat", "boat", "bateau", "vehicle"},  {"canoe", "canoe", "canoë", "boat"},
      {"building", "building", "bâtiment", ""}, {"house", "house", "maison", "building"},
      {"cottage", "cottage", "chaumière", "house"}, {"school", "school", "école", "building"},
      {"church", "church", "église", "building"}, {"chapel", "chapel", "chapelle", "church"},
      {"person", "person", "personne", ""},   {"child", "child", "enfant", "person"},
      {"boy", "boy", "garçon", "child"},      {"girl", "girl", "fille", "child"},
      {"worker", "worker", "ouvrier", "person"}, {"farmer", "farmer", "fermier", "worker"},
      {"teacher", "teacher", "professeur", "worker"}, {"doctor", "doctor", "médecin", "worker"},
      {"soldier", "soldier", "soldat", "person"}, {"king", "king", "roi", "person"},
      {"food", "food", "nourriture", ""},     {"bread", "bread", "pain", "food"},
      {"fruit", "fruit", "fruit", "food"},    {"apple", "apple", "pomme", "fruit"},
      {"pear", "pear", "poire", "fruit"},     {"cheese", "cheese", "fromage", "food"},
      {"place", "place", "lieu", ""},         {"city", "city", "ville", "place"},
      {"village", "village", "village", "place"}, {"forest", "forest", "forêt", "place"},
      {"river", "river", "rivière", "place"}, {"garden", "garden", "jardin", "place"},
      {"market", "market", "marché", "place"}, {"object", "object", "objet", ""},
      {"book", "book", "livre", "object"},    {"novel", "novel", "roman", "book"},
      {"tool", "tool", "outil", "object"},    {"hammer", "hammer", "marteau", "tool"},
      {"knife", "knife", "couteau", "tool"},  {"letter", "letter", "lettre", "object"},
      {"help", "help", "aide", ""},           {"mercy", "mercy", "pitié", "help"},
      {"policy", "policy", "politique", ""},  {"song", "song", "chanson", ""},
  };
  return v;
}

inline const std::vector<Word>& verbs() {
  static const std::vector<Word> v = {
      {"took", "take", "prit", ""},           {"grabbed", "grab", "saisit", "take"},
      {"saw", "see", "vit", ""},              {"watched", "watch", "regarda", "see"},
      {"noticed", "notice", "remarqua", "see"}, {"made", "make", "fit", ""},
      {"built", "build", "construisit", "make"}, {"painted", "paint", "peignit", "make"},
      {"moved", "move", "déplaça", ""},       {"carried", "carry", "porta", "move"},
      {"pushed", "push", "poussa", "move"},   {"pulled", "pull", "tira", "move"},
      {"liked", "like", "aima", ""},          {"loved", "love", "adora", "like"},
      {"found", "find", "trouva", ""},        {"discovered", "discover", "découvrit", "find"},
      {"ate", "eat", "mangea", ""},           {"devoured", "devour", "dévora", "eat"},
      {"sold", "sell", "vendit", ""},         {"bought", "buy", "acheta", ""},
      {"visited", "visit", "visita", ""},     {"left", "leave", "quitta", ""},
      {"followed", "follow", "suivit", ""},   {"described", "describe", "décrivit", ""},
      {"asked", "ask", "demanda", ""},        {"begged", "beg", "supplia", "ask"},
  };
  return v;
}

inline const std::vector<Word>& adjectives() {
  static const std::vector<Word> v = {
      {"big", "big", "grand", ""},       {"small", "small", "petit", ""},
      {"old", "old", "vieux", ""},       {"new", "new", "nouveau", ""},
      {"red", "red", "rouge", ""},       {"green", "green", "vert", ""},
      {"beautiful", "beautiful", "beau", ""}, {"strange", "strange", "étrange", ""},
      {"quiet", "quiet", "calme", ""},   {"famous", "famous", "célèbre", ""},
      {"dark", "dark", "sombre", ""},    {"young", "young", "jeune", ""},
      {"heavy", "heavy", "lourd", ""},   {"rich", "rich", "riche", ""},
      {"weak", "weak", "faible", ""},    {"poor", "poor", "pauvre", ""},
  };
  return v;
}

inline const std::vector<Word>& adverbs() {
  static const std::vector<Word> v = {
      {"quickly", "quickly", "rapidement", ""}, {"slowly", "slowly", "lentement", ""},
      {"suddenly", "suddenly", "soudainement", ""}, {"often", "often", "souvent", ""},
      {"finally", "finally", "finalement", ""}, {"carefully", "carefully", "soigneusement", ""},
      {"absolutely", "absolutely", "absolument", ""},
  };
  return v;
}

inline const std::vector<Word>& determiners() {
  static const std::vector<Word> v = {
      {"the", "the", "le", ""}, {"a", "a", "un", ""}, {"this", "this", "ce", ""},
      {"every", "every", "chaque", ""},
  };
  return v;
}

inline const std::vector<Word>& possessives() {
  static const std::vector<Word> v = {
      {"his", "his", "son", ""}, {"her", "her", "sa", ""}, {"their", "their", "leur", ""},
      {"our", "our", "notre", ""}, {"my", "my", "mon", ""}, {"your", "your", "votre", ""},
  };
  return v;
}

inline const std::vector<Word>& prepositions() {
  static const std::vector<Word> v = {
      {"in", "in", "dans", ""}, {"near", "near", "près", ""}, {"with", "with", "avec", ""},
      {"from", "from", "de", ""}, {"for", "for", "pour", ""}, {"behind", "behind", "derrière", ""},
      {"under", "under", "sous", ""},
  };
  return v;
}
// clang-format on

struct Node {
  std::string en, en_lemma, fr, upos, deprel;
  int head = -1;  // node index, -1 for root
};

// Word order is built directly for both languages as node-index sequences.
class SentenceBuilder {
 public:
  explicit SentenceBuilder(std::mt19937_64& rng) : rng_(rng) {}

  void build() {
    const int v1 = clause(-1, "root");
    if (util::uniform_real(rng_) < 0.25) {
      const int cc = add({"and", "and", "et", "CCONJ", "cc"}, -1);
      en_.push_back(cc);
      fr_.push_back(cc);
      const int v2 = clause(v1, "conj");
      nodes_[static_cast<std::size_t>(cc)].head = v2;
    }
    const int p = add({".", ".", ".", "PUNCT", "punct"}, v1);
    en_.push_back(p);
    fr_.push_back(p);
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<int>& en_order() const { return en_; }
  const std::vector<int>& fr_order() const { return fr_; }

 private:
  const Word& pick(const std::vector<Word>& v) { return v[util::uniform_index(rng_, v.size())]; }

  int add(Node n, int head) {
    n.head = head;
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  int add_word(const Word& w, const char* upos, const char* deprel, int head) {
    return add({w.en, w.en_lemma, w.fr, upos, deprel}, head);
  }

  // Returns the clause's verb node.
  int clause(int head, const char* deprel) {
    const int verb = add_word(pick(verbs()), "VERB", deprel, head);
    std::vector<int> subj_en, subj_fr;
    noun_phrase(verb, "nsubj", true, subj_en, subj_fr);
    int adv = -1;
    if (util::uniform_real(rng_) < 0.3) adv = add_word(pick(adverbs()), "ADV", "advmod", verb);
    std::vector<int> obj_en, obj_fr;
    noun_phrase(verb, "obj", true, obj_en, obj_fr);
    std::vector<int> obl_en, obl_fr;
    if (util::uniform_real(rng_) < 0.5) prep_phrase(verb, "obl", obl_en, obl_fr);

    // EN: subj [adv] verb obj [obl]; FR: subj verb [adv] obj [obl]
    append(en_, subj_en);
    if (adv >= 0) en_.push_back(adv);
    en_.push_back(verb);
    append(en_, obj_en);
    append(en_, obl_en);
    append(fr_, subj_fr);
    fr_.push_back(verb);
    if (adv >= 0) fr_.push_back(adv);
    append(fr_, obj_fr);
    append(fr_, obl_fr);
    return verb;
  }

  void noun_phrase(int head, const char* deprel, bool allow_pp, std::vector<int>& en,
                   std::vector<int>& fr) {
    const int noun = add_word(pick(nouns()), "NOUN", deprel, head);
    const int det = util::uniform_real(rng_) < 0.7
                        ? add_word(pick(determiners()), "DET", "det", noun)
                        : add_word(pick(possessives()), "PRON", "nmod:poss", noun);
    int adj = -1;
    if (util::uniform_real(rng_) < 0.5) adj = add_word(pick(adjectives()), "ADJ", "amod", noun);
    std::vector<int> pp_en, pp_fr;
    if (allow_pp && util::uniform_real(rng_) < 0.2) prep_phrase(noun, "nmod", pp_en, pp_fr);

    en.push_back(det);
    if (adj >= 0) en.push_back(adj);
    en.push_back(noun);
    append(en, pp_en);
    fr.push_back(det);
    fr.push_back(noun);
    if (adj >= 0) fr.push_back(adj);
    append(fr, pp_fr);
  }

  void prep_phrase(int head, const char* deprel, std::vector<int>& en, std::vector<int>& fr) {
    std::vector<int> np_en, np_fr;
    // The preposition attaches to the noun it introduces.
    const std::size_t before = nodes_.size();
    noun_phrase(head, deprel, false, np_en, np_fr);
    const int noun = static_cast<int>(before);
    const int adp = add_word(pick(prepositions()), "ADP", "case", noun);
    en.push_back(adp);
    append(en, np_en);
    fr.push_back(adp);
    append(fr, np_fr);
  }

  static void append(std::vector<int>& a, const std::vector<int>& b) {
    a.insert(a.end(), b.begin(), b.end());
  }

  std::mt19937_64& rng_;
  std::vector<Node> nodes_;
  std::vector<int> en_, fr_;
};

struct ToyCorpus {
  std::vector<Seed> seeds;
  std::vector<ConlluSentence> src_conllu;
  std::vector<ConlluSentence> tgt_conllu;
  std::vector<SimilarityScore> scores;  // random stand-ins for external scores
  LexicalResource lexicon;
};

inline LexicalResource toy_lexicon() {
  LexicalResource r;
  auto add_all = [&](const std::vector<Word>& words, const char* upos) {
    for (const auto& w : words) {
      if (*w.parent == '\0') continue;
      r.add(w.en_lemma, upos, LexicalDirection::Generalize, w.parent);
      // Hyponym candidates are surface forms so substitution stays inflected.
      r.add(w.parent, upos, LexicalDirection::Particularize, w.en);
    }
  };
  add_all(nouns(), "NOUN");
  // Verb hypernyms: map the lemma to the parent's surface form.
  for (const auto& w : verbs()) {
    if (*w.parent == '\0') continue;
    for (const auto& p : verbs()) {
      if (std::string(p.en_lemma) == w.parent) {
        r.add(w.en_lemma, "VERB", LexicalDirection::Generalize, p.en);
        r.add(p.en_lemma, "VERB", LexicalDirection::Particularize, w.en);
      }
    }
  }
  return r;
}

inline std::string toy_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "toy-%06zu", i + 1);
  return buf;
}

inline ToyCorpus make_toy_corpus(std::size_t n, std::uint64_t rng_seed) {
  ToyCorpus c;
  c.lexicon = toy_lexicon();
  for (std::size_t s = 0; s < n; ++s) {
    const std::string id = toy_id(s);
    auto rng = util::derive_rng(rng_seed, id);
    SentenceBuilder b(rng);
    b.build();
    const auto& nodes = b.nodes();
    const auto& en = b.en_order();
    const auto& fr = b.fr_order();
    std::vector<std::size_t> en_pos(nodes.size()), fr_pos(nodes.size());
    for (std::size_t i = 0; i < en.size(); ++i) en_pos[static_cast<std::size_t>(en[i])] = i;
    for (std::size_t i = 0; i < fr.size(); ++i) fr_pos[static_cast<std::size_t>(fr[i])] = i;

    auto sentence = [&](const std::vector<int>& order, const std::vector<std::size_t>& pos,
                        bool english) {
      ConlluSentence cs;
      cs.comments.push_back(" sent_id = " + id);
      for (int ni : order) {
        const Node& nd = nodes[static_cast<std::size_t>(ni)];
        cs.forms.push_back(english ? nd.en : nd.fr);
        cs.lemmas.push_back(english ? nd.en_lemma : "_");
        cs.tree.upos.push_back(nd.upos);
        cs.tree.heads.push_back(nd.head < 0 ? 0 : static_cast<int>(pos[static_cast<std::size_t>(nd.head)]) + 1);
        cs.xpos.push_back("_");
        cs.feats.push_back("_");
        cs.deprels.push_back(nd.deprel);
        cs.deps.push_back("_");
        cs.misc.push_back("_");
      }
      return cs;
    };
    ConlluSentence src = sentence(en, en_pos, true);
    ConlluSentence tgt = sentence(fr, fr_pos, false);

    Seed seed;
    seed.pair.id = id;
    seed.pair.src_tokens = src.forms;
    seed.pair.tgt_tokens = tgt.forms;
    seed.pair.src_raw = util::join(src.forms, " ");
    seed.pair.tgt_raw = util::join(tgt.forms, " ");
    seed.src_tree = src.tree;
    seed.src_lemmas = src.lemmas;
    seed.tgt_upos = tgt.tree.upos;
    for (std::size_t ni = 0; ni < nodes.size(); ++ni) {
      seed.alignment.links.emplace_back(en_pos[ni], fr_pos[ni]);
    }
    std::sort(seed.alignment.links.begin(), seed.alignment.links.end());

    c.scores.push_back({id, 1.0 + 0.2 * util::uniform_real(rng)});
    c.seeds.push_back(std::move(seed));
    c.src_conllu.push_back(std::move(src));
    c.tgt_conllu.push_back(std::move(tgt));
  }
  return c;
}

}  // namespace semdiv::toy

#endif  // SEMDIV_TOY_BITEXT_HPP
