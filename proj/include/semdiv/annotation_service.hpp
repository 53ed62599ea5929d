// Annotation sessions over a pool of sentence pairs, persisted to an
// append-only JSONL journal, and the HTTP routes that expose them.
//
// Every pool pair is assigned to `fan_out` distinct annotators across
// sessions. Items are served under opaque ids, so injected duplicates and
// reference pairs look like any other item.

#ifndef SEMDIV_ANNOTATION_SERVICE_HPP
#define SEMDIV_ANNOTATION_SERVICE_HPP

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

// Eigen has to come first: httplib pulls in <resolv.h>, whose _res macro
// collides with an Eigen parameter name.
#include <Eigen/Core>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "semdiv/common.hpp"
#include "semdiv/corpus_io.hpp"
#include "semdiv/metrics.hpp"
#include "semdiv/refresd.hpp"

namespace semdiv {

struct ServiceConfig {
  std::size_t session_size = 120;  // regular items per session
  std::size_t fan_out = 3;
  std::size_t duplicates_per_session = 2;
  std::size_t references_per_session = 2;
  std::uint64_t seed = 0;
  QualityConfig quality;
};

enum class ItemKind : std::uint8_t { Regular, Duplicate, Reference };

inline const char* to_string(ItemKind k) {
  switch (k) {
    case ItemKind::Regular: return "regular";
    case ItemKind::Duplicate: return "duplicate";
    case ItemKind::Reference: return "reference";
  }
  return "?";
}

inline ItemKind item_kind_from_string(std::string_view s) {
  if (s == "regular") return ItemKind::Regular;
  if (s == "duplicate") return ItemKind::Duplicate;
  if (s == "reference") return ItemKind::Reference;
  throw std::invalid_argument("unknown item kind: " + std::string(s));
}

struct ServedItem {
  std::string item_id;  // opaque, unique across sessions
  std::string pair_id;  // the underlying pair
  ItemKind kind = ItemKind::Regular;
};

struct Session {
  std::string session_id;
  std::string annotator_id;
  std::vector<ServedItem> items;
  std::set<std::string> done;  // item ids

  std::size_t completed() const { return done.size(); }
};

struct FieldError {
  std::string field;
  std::string message;
};

struct SubmitResult {
  int status = 201;
  std::vector<FieldError> errors;
  std::optional<AnnotationRecord> record;
};

struct ServiceError : std::runtime_error {
  int status;
  ServiceError(int s, const std::string& m) : std::runtime_error(m), status(s) {}
};

class AnnotationStore {
 public:
  // Immutable view published after every write.
  struct Snapshot {
    std::map<std::string, Session> sessions;
    std::vector<AnnotationRecord> records;  // regular items, pair_id = pool id
    std::vector<AnnotationRecord> qc_records;  // pair_id = served item id
    std::map<std::string, std::string> duplicate_of;  // item id -> pool id
    std::map<std::string, SentenceClass> reference_for_item;
  };

  AnnotationStore(std::vector<SentencePair> pool, ServiceConfig cfg,
                  std::map<std::string, SentenceClass> reference = {},
                  std::optional<std::filesystem::path> journal = std::nullopt,
                  std::optional<RefresdDataset> dataset = std::nullopt)
      : cfg_(cfg), reference_(std::move(reference)), journal_path_(std::move(journal)),
        dataset_(std::move(dataset)) {
    if (cfg_.fan_out == 0) throw std::invalid_argument("fan_out must be positive");
    for (auto& p : pool) {
      if (!pair_index_.emplace(p.id, pool_.size()).second) {
        throw std::invalid_argument("duplicate pool pair id " + p.id);
      }
      pool_.push_back(std::move(p));
    }
    for (const auto& [id, cls] : reference_) {
      if (!pair_index_.count(id)) throw std::invalid_argument("reference pair not in pool: " + id);
      reference_ids_.push_back(id);
    }
    assigned_.assign(pool_.size(), {});
    auto snap = std::make_shared<Snapshot>();
    if (journal_path_ && std::filesystem::exists(*journal_path_)) replay(*snap);
    if (journal_path_) {
      journal_.open(*journal_path_, std::ios::app);
      if (!journal_) throw std::runtime_error("cannot open journal " + journal_path_->string());
    }
    publish(std::move(snap));
  }

  std::shared_ptr<const Snapshot> snapshot() const {
    std::lock_guard<std::mutex> g(snap_mu_);
    return snap_;
  }

  const SentencePair& pair(const std::string& id) const { return pool_.at(pair_index_.at(id)); }
  bool has_pair(const std::string& id) const { return pair_index_.count(id) != 0; }
  const ServiceConfig& config() const { return cfg_; }
  const std::optional<RefresdDataset>& dataset() const { return dataset_; }

  Session create_session(const std::string& annotator_id) {
    if (annotator_id.empty()) throw ServiceError(400, "annotator_id is required");
    std::lock_guard<std::mutex> g(write_mu_);
    auto snap = std::make_shared<Snapshot>(*snapshot());
    Session s;
    // Session ids double as the annotator's access token, so they are not
    // sequential.
    {
      char buf[24];
      std::snprintf(buf, sizeof buf, "s%016llx",
                    static_cast<unsigned long long>(util::splitmix64(
                        cfg_.seed ^ util::fnv1a(annotator_id) ^ (snap->sessions.size() + 1))));
      s.session_id = buf;
    }
    s.annotator_id = annotator_id;
    auto rng = util::derive_rng(cfg_.seed, "session/" + s.session_id);

    // Pairs closest to completion first, then pool order.
    std::vector<std::size_t> cand;
    const std::set<std::string> refs(reference_ids_.begin(), reference_ids_.end());
    for (std::size_t i = 0; i < pool_.size(); ++i) {
      if (refs.count(pool_[i].id)) continue;
      if (assigned_[i].size() >= cfg_.fan_out || assigned_[i].count(annotator_id)) continue;
      cand.push_back(i);
    }
    std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
      return assigned_[a].size() > assigned_[b].size();
    });
    if (cand.size() > cfg_.session_size) cand.resize(cfg_.session_size);
    if (cand.empty()) throw ServiceError(409, "no pairs left to assign to " + annotator_id);

    std::size_t serial = 0;
    auto fresh_id = [&] {
      return "i" + std::to_string(util::splitmix64(util::fnv1a(s.session_id) + serial++) %
                                  1000000000000ULL);
    };
    for (auto i : cand) s.items.push_back({fresh_id(), pool_[i].id, ItemKind::Regular});
    util::shuffle(s.items, rng);
    // Duplicates go after their original.
    const std::size_t n_regular = s.items.size();
    for (std::size_t d = 0; d < std::min(cfg_.duplicates_per_session, n_regular); ++d) {
      const std::size_t orig = util::uniform_index(rng, n_regular);
      const ServedItem dup{fresh_id(), s.items[orig].pair_id, ItemKind::Duplicate};
      std::size_t pos_orig = 0;
      for (std::size_t k = 0; k < s.items.size(); ++k) {
        if (s.items[k].kind == ItemKind::Regular && s.items[k].pair_id == dup.pair_id) pos_orig = k;
      }
      const std::size_t pos = pos_orig + 1 + util::uniform_index(rng, s.items.size() - pos_orig);
      s.items.insert(s.items.begin() + static_cast<std::ptrdiff_t>(pos), dup);
    }
    for (std::size_t r = 0; r < std::min(cfg_.references_per_session, reference_ids_.size()); ++r) {
      const ServedItem ref{fresh_id(), reference_ids_[(snap->sessions.size() + r) % reference_ids_.size()],
                           ItemKind::Reference};
      const std::size_t pos = util::uniform_index(rng, s.items.size() + 1);
      s.items.insert(s.items.begin() + static_cast<std::ptrdiff_t>(pos), ref);
    }

    apply_session(*snap, s);
    append_journal(session_json(s));
    publish(std::move(snap));
    return s;
  }

  // Next unannotated item, or nullopt when the session is finished.
  std::optional<ServedItem> next(const std::string& session_id) const {
    auto snap = snapshot();
    auto it = snap->sessions.find(session_id);
    if (it == snap->sessions.end()) throw ServiceError(404, "unknown session " + session_id);
    for (const auto& item : it->second.items) {
      if (!it->second.done.count(item.item_id)) return item;
    }
    return std::nullopt;
  }

  SubmitResult submit(const std::string& session_id, const nlohmann::json& body) {
    std::lock_guard<std::mutex> g(write_mu_);
    auto cur = snapshot();
    auto sit = cur->sessions.find(session_id);
    if (sit == cur->sessions.end()) throw ServiceError(404, "unknown session " + session_id);
    const Session& s = sit->second;
    SubmitResult res;
    auto fail = [&](std::string field, std::string msg) {
      res.errors.push_back({std::move(field), std::move(msg)});
    };
    if (!body.is_object()) {
      res.status = 400;
      fail("", "body must be a JSON object");
      return res;
    }
    const ServedItem* item = nullptr;
    if (!body.contains("item_id") || !body["item_id"].is_string()) {
      fail("item_id", "required string");
    } else {
      const auto id = body["item_id"].get<std::string>();
      for (const auto& i : s.items) {
        if (i.item_id == id) item = &i;
      }
      if (!item) fail("item_id", "not an item of this session");
    }
    AnnotationRecord rec;
    rec.annotator_id = s.annotator_id;
    if (!body.contains("sentence_class") || !body["sentence_class"].is_string()) {
      fail("sentence_class", "required string");
    } else {
      try {
        rec.sentence_class = sentence_class_from_string(body["sentence_class"].get<std::string>());
      } catch (const std::exception& e) {
        fail("sentence_class", e.what());
      }
    }
    if (body.contains("notes") && !body["notes"].is_null()) {
      if (body["notes"].is_string()) rec.notes = body["notes"].get<std::string>();
      else fail("notes", "must be a string");
    }
    if (!body.contains("spans") || !body["spans"].is_array()) {
      fail("spans", "required array");
    } else {
      const auto& spans = body["spans"];
      for (std::size_t k = 0; k < spans.size(); ++k) {
        const std::string f = "spans[" + std::to_string(k) + "]";
        const auto& j = spans[k];
        if (!j.is_object()) {
          fail(f, "must be an object");
          continue;
        }
        Span sp;
        bool ok = true;
        if (!j.contains("side") || !j["side"].is_string() ||
            (j["side"] != "src" && j["side"] != "tgt")) {
          fail(f + ".side", "must be \"src\" or \"tgt\"");
          ok = false;
        } else {
          sp.side = j["side"] == "src" ? Side::Src : Side::Tgt;
        }
        for (const char* key : {"start", "end"}) {
          if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<long long>() < 0) {
            fail(f + "." + key, "must be a non-negative integer");
            ok = false;
          }
        }
        if (!j.contains("label") || !j["label"].is_string()) {
          fail(f + ".label", "required string");
          ok = false;
        } else {
          try {
            sp.label = span_label_from_string(j["label"].get<std::string>());
          } catch (const std::exception& e) {
            fail(f + ".label", e.what());
            ok = false;
          }
        }
        if (!ok) continue;
        sp.start = j["start"].get<std::size_t>();
        sp.end = j["end"].get<std::size_t>();
        if (item) {
          const auto& p = pair(item->pair_id);
          const std::size_t n = sp.side == Side::Src ? p.src_tokens.size() : p.tgt_tokens.size();
          if (sp.end > n) {
            fail(f + ".end", "exceeds token count " + std::to_string(n) + " of the " +
                                 to_string(sp.side) + " sentence");
            continue;
          }
        }
        if (sp.start >= sp.end) {
          fail(f + ".start", "must be less than end");
          continue;
        }
        for (std::size_t o = 0; o < rec.spans.size(); ++o) {
          const auto& q = rec.spans[o];
          if (q.side == sp.side && sp.start < q.end && q.start < sp.end) {
            fail(f, "overlaps an earlier span");
            ok = false;
            break;
          }
        }
        if (ok) rec.spans.push_back(sp);
      }
    }
    if (!res.errors.empty()) {
      res.status = 400;
      return res;
    }
    rec.pair_id = item->kind == ItemKind::Regular ? item->pair_id : item->item_id;
    if (s.done.count(item->item_id)) {
      res.status = 409;
      fail("item_id", "already annotated by " + s.annotator_id);
      return res;
    }
    for (const auto& r : cur->records) {
      if (item->kind == ItemKind::Regular && r.pair_id == rec.pair_id &&
          r.annotator_id == rec.annotator_id) {
        res.status = 409;
        fail("item_id", "pair already annotated by " + s.annotator_id);
        return res;
      }
    }
    auto snap = std::make_shared<Snapshot>(*cur);
    apply_record(*snap, session_id, item->item_id, rec);
    append_journal({{"type", "record"}, {"session_id", session_id}, {"item_id", item->item_id},
                    {"record", to_json(rec)}});
    publish(std::move(snap));
    res.record = rec;
    return res;
  }

  // Pairs whose regular records come from `fan_out` annotators.
  std::vector<AnnotatedPair> completed_pairs() const {
    auto snap = snapshot();
    std::map<std::string, std::vector<AnnotationRecord>> by_pair;
    for (const auto& r : snap->records) by_pair[r.pair_id].push_back(r);
    std::vector<AnnotatedPair> out;
    for (auto& [id, recs] : by_pair) {
      if (recs.size() < cfg_.fan_out) continue;
      AnnotatedPair ap;
      ap.pair = pair(id);
      ap.records = recs;
      if (ap.records.size() == 3) adjudicate(ap);
      out.push_back(std::move(ap));
    }
    return out;
  }

  nlohmann::json progress_json() const {
    auto snap = snapshot();
    std::map<std::string, std::size_t> per_pair;
    for (const auto& r : snap->records) ++per_pair[r.pair_id];
    std::size_t complete = 0;
    for (const auto& [id, n] : per_pair) complete += n >= cfg_.fan_out;
    nlohmann::json sessions = nlohmann::json::array();
    for (const auto& [id, s] : snap->sessions) {
      sessions.push_back({{"session_id", id}, {"annotator_id", s.annotator_id},
                          {"completed", s.completed()}, {"total", s.items.size()}});
    }
    return {{"pairs_total", pool_.size() - reference_ids_.size()},
            {"pairs_complete", complete},
            {"records", snap->records.size()},
            {"fan_out", cfg_.fan_out},
            {"sessions", sessions}};
  }

  nlohmann::json quality_json() const {
    auto snap = snapshot();
    nlohmann::json out = nlohmann::json::array();
    auto all = snap->records;
    all.insert(all.end(), snap->qc_records.begin(), snap->qc_records.end());
    for (const auto& q : quality_report(all, snap->duplicate_of, snap->reference_for_item, cfg_.quality)) {
      out.push_back(to_json(q));
    }
    return out;
  }

 private:
  void publish(std::shared_ptr<Snapshot> s) {
    std::lock_guard<std::mutex> g(snap_mu_);
    snap_ = std::move(s);
  }

  static nlohmann::json session_json(const Session& s) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& i : s.items) {
      items.push_back({{"item_id", i.item_id}, {"pair_id", i.pair_id}, {"kind", to_string(i.kind)}});
    }
    return {{"type", "session"}, {"session_id", s.session_id}, {"annotator_id", s.annotator_id},
            {"items", items}};
  }

  void apply_session(Snapshot& snap, const Session& s) {
    for (const auto& i : s.items) {
      if (i.kind == ItemKind::Regular) assigned_[pair_index_.at(i.pair_id)].insert(s.annotator_id);
      if (i.kind == ItemKind::Duplicate) snap.duplicate_of[i.item_id] = i.pair_id;
      if (i.kind == ItemKind::Reference) snap.reference_for_item[i.item_id] = reference_.at(i.pair_id);
    }
    snap.sessions[s.session_id] = s;
  }

  static void apply_record(Snapshot& snap, const std::string& session_id, const std::string& item_id,
                           const AnnotationRecord& rec) {
    snap.sessions.at(session_id).done.insert(item_id);
    bool regular = false;
    for (const auto& i : snap.sessions.at(session_id).items) {
      if (i.item_id == item_id) regular = i.kind == ItemKind::Regular;
    }
    (regular ? snap.records : snap.qc_records).push_back(rec);
  }

  void append_journal(const nlohmann::json& j) {
    if (!journal_.is_open()) return;
    journal_ << j.dump() << '\n';
    journal_.flush();
    if (!journal_) throw std::runtime_error("journal write failed");
  }

  void replay(Snapshot& snap) {
    std::ifstream in(*journal_path_);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (util::trim(line).empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        const auto type = j.at("type").get<std::string>();
        if (type == "session") {
          Session s;
          s.session_id = j.at("session_id").get<std::string>();
          s.annotator_id = j.at("annotator_id").get<std::string>();
          for (const auto& i : j.at("items")) {
            s.items.push_back({i.at("item_id").get<std::string>(), i.at("pair_id").get<std::string>(),
                               item_kind_from_string(i.at("kind").get<std::string>())});
            if (!has_pair(s.items.back().pair_id)) {
              throw std::invalid_argument("unknown pair " + s.items.back().pair_id);
            }
          }
          apply_session(snap, s);
        } else if (type == "record") {
          apply_record(snap, j.at("session_id").get<std::string>(), j.at("item_id").get<std::string>(),
                       record_from_json(j.at("record")));
        } else {
          throw std::invalid_argument("unknown journal entry type " + type);
        }
      } catch (const std::exception& e) {
        throw ParseError(journal_path_->string() + ": " + e.what(), lineno);
      }
    }
  }

  ServiceConfig cfg_;
  std::vector<SentencePair> pool_;
  std::map<std::string, std::size_t> pair_index_;
  std::map<std::string, SentenceClass> reference_;
  std::vector<std::string> reference_ids_;
  std::vector<std::set<std::string>> assigned_;  // guarded by write_mu_
  std::optional<std::filesystem::path> journal_path_;
  std::ofstream journal_;
  std::optional<RefresdDataset> dataset_;

  std::mutex write_mu_;
  mutable std::mutex snap_mu_;
  std::shared_ptr<const Snapshot> snap_;
};

// ---------------------------------------------------------------------------
// HTTP

namespace detail {

inline void send_json(httplib::Response& res, int status, const nlohmann::json& j) {
  res.status = status;
  res.set_content(j.dump(), "application/json");
}

inline void send_error(httplib::Response& res, int status, const std::string& msg,
                       const std::vector<FieldError>& fields = {}) {
  nlohmann::json errs = nlohmann::json::array();
  for (const auto& f : fields) errs.push_back({{"field", f.field}, {"message", f.message}});
  send_json(res, status, {{"error", msg}, {"errors", errs}});
}

template <class F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const ServiceError& e) {
    send_error(res, e.status, e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

}  // namespace detail

// `source` is "live" (completed annotation triples) or "dataset" (the loaded
// dataset); the default prefers the dataset for stats and live data for IAA.
inline void register_routes(httplib::Server& server, AnnotationStore& store) {
  using detail::guarded;
  using detail::send_error;
  using detail::send_json;

  server.Post("/api/session", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      nlohmann::json body = nlohmann::json::parse(req.body, nullptr, false);
      if (body.is_discarded() || !body.is_object() || !body.contains("annotator_id") ||
          !body["annotator_id"].is_string()) {
        send_error(res, 400, "invalid body", {{"annotator_id", "required string"}});
        return;
      }
      const auto s = store.create_session(body["annotator_id"].get<std::string>());
      send_json(res, 201, {{"session_id", s.session_id}, {"annotator_id", s.annotator_id},
                           {"items", s.items.size()}});
    });
  });

  server.Get(R"(/api/session/([^/]+)/next)", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto item = store.next(req.matches[1]);
      if (!item) {
        res.status = 204;
        return;
      }
      const auto& p = store.pair(item->pair_id);
      send_json(res, 200, {{"item_id", item->item_id}, {"src", p.src_tokens}, {"tgt", p.tgt_tokens}});
    });
  });

  server.Post(R"(/api/session/([^/]+)/annotation)",
              [&](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                  nlohmann::json body = nlohmann::json::parse(req.body, nullptr, false);
                  if (body.is_discarded()) {
                    send_error(res, 400, "body is not valid JSON");
                    return;
                  }
                  const auto r = store.submit(req.matches[1], body);
                  if (!r.record) {
                    send_error(res, r.status, r.status == 409 ? "duplicate submission" : "invalid annotation",
                               r.errors);
                    return;
                  }
                  send_json(res, 201, to_json(*r.record));
                });
              });

  auto pick_source = [&](const httplib::Request& req, bool prefer_dataset) {
    std::string src = req.has_param("source") ? req.get_param_value("source")
                      : (prefer_dataset && store.dataset()) ? "dataset"
                                                            : "live";
    if (src != "live" && src != "dataset") throw ServiceError(400, "source must be live or dataset");
    if (src == "dataset" && !store.dataset()) throw ServiceError(404, "no dataset loaded");
    return src;
  };

  server.Get("/api/iaa", [&, pick_source](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto src = pick_source(req, false);
      nlohmann::json out;
      if (src == "dataset") {
        out = to_json(agreement(*store.dataset()));
        out["excluded"] = store.dataset()->pairs.size() - store.dataset()->included().size();
      } else {
        const auto done = store.completed_pairs();
        std::vector<const AnnotatedPair*> ptrs;
        std::size_t excluded = 0;
        for (const auto& p : done) {
          if (p.excluded) ++excluded;
          else ptrs.push_back(&p);
        }
        out = to_json(agreement(ptrs));
        out["excluded"] = excluded;
        nlohmann::json adj = nlohmann::json::array();
        for (const auto& p : done) {
          adj.push_back({{"pair_id", p.pair.id},
                         {"adjudicated", p.adjudicated ? nlohmann::json(to_string(*p.adjudicated))
                                                       : nlohmann::json()},
                         {"excluded", p.excluded ? nlohmann::json(p.exclusion_reason) : nlohmann::json()}});
        }
        out["pairs"] = adj;
      }
      out["source"] = src;
      send_json(res, 200, out);
    });
  });

  server.Get("/api/progress", [&](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, store.progress_json()); });
  });

  server.Get("/api/dataset/stats", [&, pick_source](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto src = pick_source(req, true);
      RefresdDataset live;
      if (src == "live") live.pairs = store.completed_pairs();
      auto out = to_json(dataset_stats(src == "dataset" ? *store.dataset() : live));
      out["source"] = src;
      send_json(res, 200, out);
    });
  });

  server.Get("/api/quality", [&](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, store.quality_json()); });
  });
}

}  // namespace semdiv

#endif  // SEMDIV_ANNOTATION_SERVICE_HPP
