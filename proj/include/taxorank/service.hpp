#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "taxorank/ranker.hpp"
#include "taxorank/space.hpp"
#include "taxorank/taxonomy.hpp"
#include "taxorank/vectors.hpp"

namespace taxorank {

enum class Verdict { accept, reject };

struct Decision {
  std::string word;
  std::string synset_id;
  Verdict verdict = Verdict::accept;
  std::string timestamp;
  std::string annotator;
};

/// One line of the decision log: either a verdict or a commit.
struct LogRecord {
  enum class Kind { decision, commit } kind = Kind::decision;
  Decision decision;                 // kind == decision
  std::string word;                  // kind == commit
  std::vector<std::string> parents;  // kind == commit
  std::string new_synset_id;         // kind == commit

  nlohmann::json to_json() const;
  static LogRecord from_json(const nlohmann::json& j);
};

std::vector<LogRecord> read_decision_log(const std::filesystem::path& path);

/// Latest verdict per (word, synset, annotator), ordered by that key.
std::vector<Decision> compact_decisions(const std::vector<LogRecord>& log);

/// Working taxonomy after replaying every commit of the log over `initial`.
Taxonomy replay_log(const Taxonomy& initial, const std::vector<LogRecord>& log);

/// An HTTP-free response so handlers can be tested directly.
struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Files of a state directory.
struct StateFiles {
  std::filesystem::path dir;
  std::filesystem::path initial() const { return dir / "initial.jsonl"; }
  std::filesystem::path queue() const { return dir / "queue.txt"; }
  std::filesystem::path vectors() const { return dir / "vectors.vec"; }
  std::filesystem::path ranker() const { return dir / "ranker.json"; }
  std::filesystem::path wiktionary() const { return dir / "wiktionary.tsv"; }
  std::filesystem::path log() const { return dir / "decisions.jsonl"; }
  std::filesystem::path snapshot() const { return dir / "snapshot.jsonl"; }
};

struct ServiceOptions {
  std::size_t k_assoc = 10;
  std::function<std::string()> clock;  // RFC 3339 UTC by default
};

class AnnotationService {
 public:
  /// Loads a state directory and replays its decision log.
  static std::unique_ptr<AnnotationService> open(const std::filesystem::path& state_dir,
                                                 ServiceOptions options = {});

  AnnotationService(Taxonomy initial, std::vector<std::string> queue, std::shared_ptr<const VectorStore> store,
                    Ranker ranker, WiktionaryTable wikt, std::filesystem::path log_path,
                    std::filesystem::path snapshot_path = {}, ServiceOptions options = {});
  ~AnnotationService();
  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  Response next_word() const;
  Response candidates(const std::optional<std::string>& word, const std::optional<std::string>& k) const;
  Response decision(std::string_view body);
  Response commit(std::string_view body);
  Response export_taxonomy() const;

  Taxonomy taxonomy() const;
  std::vector<std::string> queue() const;
  std::vector<Decision> decisions() const;

 private:
  void append(const LogRecord& record);
  void apply_commit(const LogRecord& record);

  mutable std::shared_mutex mutex_;
  Taxonomy initial_;
  Taxonomy working_;
  std::vector<std::string> queue_;
  std::map<std::string, std::string, std::less<>> committed_;  // word -> new synset id
  std::vector<LogRecord> log_;
  std::shared_ptr<const VectorStore> store_;
  std::unique_ptr<WordSpace> space_;
  Ranker ranker_;
  WiktionaryTable wikt_;
  std::filesystem::path log_path_;
  std::filesystem::path snapshot_path_;
  std::FILE* log_file_ = nullptr;
  ServiceOptions options_;
};

/// Serves `service` over HTTP until `stop` is called from another thread.
class HttpServer {
 public:
  explicit HttpServer(AnnotationService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds (port 0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks serving requests.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace taxorank
