#include "taxorank/service.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include <unistd.h>

#include <httplib.h>

#include "taxorank/errors.hpp"

namespace taxorank {

namespace {

std::string_view verdict_name(Verdict v) { return v == Verdict::accept ? "accept" : "reject"; }

std::optional<Verdict> parse_verdict(std::string_view s) {
  if (s == "accept") return Verdict::accept;
  if (s == "reject") return Verdict::reject;
  return std::nullopt;
}

std::string utc_now() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Response json_response(int status, const nlohmann::ordered_json& j) { return {status, j.dump(), "application/json"}; }

Response error_response(int status, const std::string& message) {
  return json_response(status, nlohmann::ordered_json{{"error", message}});
}

std::optional<nlohmann::json> parse_body(std::string_view body) {
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  return j;
}

std::optional<std::string> string_field(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

std::vector<std::string> read_queue(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open queue " + path.string());
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    auto w = normalize_lemma(line);
    if (!w.empty() && seen.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

}  // namespace

nlohmann::json LogRecord::to_json() const {
  nlohmann::ordered_json j;
  if (kind == Kind::decision) {
    j["type"] = "decision";
    j["word"] = decision.word;
    j["synset_id"] = decision.synset_id;
    j["verdict"] = verdict_name(decision.verdict);
    j["annotator"] = decision.annotator;
    j["timestamp"] = decision.timestamp;
  } else {
    j["type"] = "commit";
    j["word"] = word;
    j["parents"] = parents;
    j["new_synset_id"] = new_synset_id;
  }
  return j;
}

LogRecord LogRecord::from_json(const nlohmann::json& j) {
  LogRecord r;
  auto type = j.at("type").get<std::string>();
  if (type == "decision") {
    r.kind = Kind::decision;
    r.decision.word = j.at("word").get<std::string>();
    r.decision.synset_id = j.at("synset_id").get<std::string>();
    auto v = parse_verdict(j.at("verdict").get<std::string>());
    if (!v) throw ParseError("bad verdict in decision log");
    r.decision.verdict = *v;
    r.decision.annotator = j.at("annotator").get<std::string>();
    r.decision.timestamp = j.value("timestamp", "");
  } else if (type == "commit") {
    r.kind = Kind::commit;
    r.word = j.at("word").get<std::string>();
    r.parents = j.at("parents").get<std::vector<std::string>>();
    r.new_synset_id = j.at("new_synset_id").get<std::string>();
  } else {
    throw ParseError("unknown record type '" + type + "' in decision log");
  }
  return r;
}

std::vector<LogRecord> read_decision_log(const std::filesystem::path& path) {
  std::vector<LogRecord> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(LogRecord::from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("decision log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Decision> compact_decisions(const std::vector<LogRecord>& log) {
  std::map<std::tuple<std::string, std::string, std::string>, Decision> latest;
  for (const auto& r : log) {
    if (r.kind != LogRecord::Kind::decision) continue;
    const auto& d = r.decision;
    latest[{d.word, d.synset_id, d.annotator}] = d;
  }
  std::vector<Decision> out;
  out.reserve(latest.size());
  for (auto& [_, d] : latest) out.push_back(std::move(d));
  return out;
}

Taxonomy replay_log(const Taxonomy& initial, const std::vector<LogRecord>& log) {
  Taxonomy t = initial;
  for (const auto& r : log) {
    if (r.kind != LogRecord::Kind::commit) continue;
    auto attached = t.attach(r.word, r.parents);
    if (attached.id != r.new_synset_id) {
      throw ParseError("decision log replay produced " + attached.id + " where the log recorded " + r.new_synset_id);
    }
    t = std::move(attached.taxonomy);
  }
  return t;
}

std::unique_ptr<AnnotationService> AnnotationService::open(const std::filesystem::path& state_dir,
                                                           ServiceOptions options) {
  StateFiles files{state_dir};
  for (const auto& p : {files.initial(), files.queue(), files.vectors(), files.ranker()}) {
    if (!std::filesystem::exists(p)) throw ConfigError("state directory is missing " + p.string());
  }
  auto store = std::make_shared<const VectorStore>(load_vectors(files.vectors()));
  WiktionaryTable wikt;
  if (std::filesystem::exists(files.wiktionary())) wikt = load_wiktionary(files.wiktionary());
  return std::make_unique<AnnotationService>(load_taxonomy(files.initial()), read_queue(files.queue()),
                                             std::move(store), load_ranker(files.ranker()), std::move(wikt),
                                             files.log(), files.snapshot(), std::move(options));
}

AnnotationService::AnnotationService(Taxonomy initial, std::vector<std::string> queue,
                                     std::shared_ptr<const VectorStore> store, Ranker ranker, WiktionaryTable wikt,
                                     std::filesystem::path log_path, std::filesystem::path snapshot_path,
                                     ServiceOptions options)
    : initial_(std::move(initial)),
      working_(initial_),
      store_(std::move(store)),
      ranker_(std::move(ranker)),
      wikt_(std::move(wikt)),
      log_path_(std::move(log_path)),
      snapshot_path_(std::move(snapshot_path)),
      options_(std::move(options)) {
  if (!options_.clock) options_.clock = utc_now;
  for (auto& w : queue) {
    auto n = normalize_lemma(w);
    if (!n.empty() && std::find(queue_.begin(), queue_.end(), n) == queue_.end()) queue_.push_back(std::move(n));
  }
  space_ = std::make_unique<WordSpace>(store_, working_);
  for (auto& r : read_decision_log(log_path_)) {
    if (r.kind == LogRecord::Kind::commit) apply_commit(r);
    log_.push_back(std::move(r));
  }
  log_file_ = std::fopen(log_path_.c_str(), "a");
  if (!log_file_) throw ConfigError("cannot open decision log " + log_path_.string());
  if (!snapshot_path_.empty()) save_taxonomy(snapshot_path_, working_);
}

AnnotationService::~AnnotationService() {
  if (log_file_) std::fclose(log_file_);
}

void AnnotationService::append(const LogRecord& record) {
  auto line = record.to_json().dump() + "\n";
  if (std::fwrite(line.data(), 1, line.size(), log_file_) != line.size() || std::fflush(log_file_) != 0 ||
      ::fsync(::fileno(log_file_)) != 0) {
    throw ConfigError("cannot write decision log " + log_path_.string());
  }
  log_.push_back(record);
}

void AnnotationService::apply_commit(const LogRecord& record) {
  auto attached = working_.attach(record.word, record.parents);
  if (attached.id != record.new_synset_id) {
    throw ParseError("decision log replay produced " + attached.id + " where the log recorded " +
                     record.new_synset_id);
  }
  working_ = std::move(attached.taxonomy);
  space_->add_synset(working_.at(attached.id));
  committed_[record.word] = attached.id;
  std::erase(queue_, record.word);
}

Response AnnotationService::next_word() const {
  std::shared_lock lock(mutex_);
  if (queue_.empty()) return error_response(404, "queue is empty");
  return json_response(200, nlohmann::ordered_json{{"word", queue_.front()}, {"remaining_count", queue_.size()}});
}

Response AnnotationService::candidates(const std::optional<std::string>& word,
                                       const std::optional<std::string>& k) const {
  if (!word || normalize_lemma(*word).empty()) return error_response(400, "missing word");
  std::size_t limit = 10;
  if (k) {
    auto [ptr, ec] = std::from_chars(k->data(), k->data() + k->size(), limit);
    if (ec != std::errc() || ptr != k->data() + k->size() || limit == 0) return error_response(400, "bad k");
  }
  std::shared_lock lock(mutex_);
  std::vector<ScoredId> ranked;
  try {
    ranked = predict(*word, *space_, working_, ranker_, wikt_, limit, options_.k_assoc);
  } catch (const ZeroQueryError& e) {
    return error_response(422, e.what());
  }
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    nlohmann::ordered_json row;
    row["synset_id"] = ranked[i].id;
    row["words"] = working_.at(ranked[i].id).words;
    row["score"] = ranked[i].score;
    row["rank"] = i + 1;
    out.push_back(std::move(row));
  }
  return json_response(200, out);
}

Response AnnotationService::decision(std::string_view body) {
  auto j = parse_body(body);
  if (!j) return error_response(400, "body must be a JSON object");
  auto word = string_field(*j, "word");
  auto synset = string_field(*j, "synset_id");
  auto verdict_s = string_field(*j, "verdict");
  auto annotator = string_field(*j, "annotator");
  if (!word || !synset || !verdict_s || !annotator) {
    return error_response(400, "word, synset_id, verdict and annotator are required strings");
  }
  auto verdict = parse_verdict(*verdict_s);
  if (!verdict) return error_response(400, "verdict must be accept or reject");
  auto w = normalize_lemma(*word);

  std::unique_lock lock(mutex_);
  if (committed_.contains(w)) return error_response(409, "word '" + w + "' is already committed");
  if (std::find(queue_.begin(), queue_.end(), w) == queue_.end()) {
    return error_response(404, "word '" + w + "' is not pending");
  }
  if (!working_.contains(*synset)) return error_response(404, "unknown synset " + *synset);
  LogRecord r;
  r.decision = {w, *synset, *verdict, options_.clock(), *annotator};
  append(r);
  return {204, "", "application/json"};
}

Response AnnotationService::commit(std::string_view body) {
  auto j = parse_body(body);
  if (!j) return error_response(400, "body must be a JSON object");
  auto word = string_field(*j, "word");
  if (!word) return error_response(400, "word is a required string");
  auto w = normalize_lemma(*word);

  std::unique_lock lock(mutex_);
  if (committed_.contains(w)) return error_response(409, "word '" + w + "' is no longer pending");
  if (std::find(queue_.begin(), queue_.end(), w) == queue_.end()) {
    return error_response(404, "word '" + w + "' is not pending");
  }
  std::set<std::string> accepted;
  for (const auto& d : compact_decisions(log_)) {
    if (d.word == w && d.verdict == Verdict::accept) accepted.insert(d.synset_id);
  }
  if (accepted.empty()) return error_response(409, "no accepted hypernyms for '" + w + "'");

  LogRecord r;
  r.kind = LogRecord::Kind::commit;
  r.word = w;
  r.parents.assign(accepted.begin(), accepted.end());
  r.new_synset_id = working_.attach(w, r.parents).id;
  append(r);
  apply_commit(r);
  if (!snapshot_path_.empty()) {
    auto tmp = snapshot_path_;
    tmp += ".tmp";
    save_taxonomy(tmp, working_);
    std::filesystem::rename(tmp, snapshot_path_);
  }
  return json_response(200, nlohmann::ordered_json{{"new_synset_id", r.new_synset_id}});
}

Response AnnotationService::export_taxonomy() const {
  std::shared_lock lock(mutex_);
  std::ostringstream out;
  write_taxonomy(out, working_);
  return {200, out.str(), "application/x-ndjson"};
}

Taxonomy AnnotationService::taxonomy() const {
  std::shared_lock lock(mutex_);
  return working_;
}

std::vector<std::string> AnnotationService::queue() const {
  std::shared_lock lock(mutex_);
  return queue_;
}

std::vector<Decision> AnnotationService::decisions() const {
  std::shared_lock lock(mutex_);
  return compact_decisions(log_);
}

struct HttpServer::Impl {
  explicit Impl(AnnotationService& s) : service(s) {}
  AnnotationService& service;
  httplib::Server server;
};

namespace {

void send(httplib::Response& res, const Response& r) {
  res.status = r.status;
  if (!r.body.empty()) res.set_content(r.body, r.content_type);
}

std::optional<std::string> param(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  return req.get_param_value(key);
}

}  // namespace

HttpServer::HttpServer(AnnotationService& service) : impl_(std::make_unique<Impl>(service)) {
  auto& svr = impl_->server;
  auto& svc = impl_->service;
  svr.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});
  svr.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  svr.Get("/words/next", [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.next_word()); });
  svr.Get("/candidates", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.candidates(param(req, "word"), param(req, "k")));
  });
  svr.Post("/decision",
           [&svc](const httplib::Request& req, httplib::Response& res) { send(res, svc.decision(req.body)); });
  svr.Post("/commit", [&svc](const httplib::Request& req, httplib::Response& res) { send(res, svc.commit(req.body)); });
  svr.Get("/taxonomy/export",
          [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.export_taxonomy()); });
  svr.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    send(res, error_response(500, message));
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  if (!impl_->server.bind_to_port(host, port)) return -1;
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace taxorank
