#include <doctest.h>

#include <thread>

#include "fixtures.hpp"
#include "taxorank/service.hpp"
#include "toy.hpp"

// Last: <resolv.h> defines a _res macro that breaks Eigen.
#include <httplib.h>

using namespace taxorank;
using namespace taxorank::testing;

namespace {

ServiceOptions fixed_clock() {
  ServiceOptions o;
  o.clock = [] { return std::string("2026-01-01T00:00:00Z"); };
  return o;
}

std::size_t line_count(const std::filesystem::path& p) {
  auto text = read_text(p);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

std::string decision_body(const std::string& word, const std::string& id, const std::string& verdict,
                          const std::string& who = "ann") {
  return nlohmann::json{{"word", word}, {"synset_id", id}, {"verdict", verdict}, {"annotator", who}}.dump();
}

std::string commit_body(const std::string& word) { return nlohmann::json{{"word", word}}.dump(); }

}  // namespace

TEST_CASE("next word") {
  TempDir dir;
  make_toy_state(dir.path());
  auto svc = AnnotationService::open(dir.path(), fixed_clock());
  auto r = svc->next_word();
  CHECK(r.status == 200);
  CHECK(r.body == R"({"word":"puppy","remaining_count":2})");
  CHECK(svc->next_word().body == r.body);

  write_text(StateFiles{dir.path()}.queue(), "");
  std::filesystem::remove(StateFiles{dir.path()}.log());
  auto empty = AnnotationService::open(dir.path(), fixed_clock());
  CHECK(empty->next_word().status == 404);
}

TEST_CASE("candidates") {
  TempDir dir;
  make_toy_state(dir.path());
  auto svc = AnnotationService::open(dir.path(), fixed_clock());

  auto r = svc->candidates("puppy", std::nullopt);
  REQUIRE(r.status == 200);
  auto j = nlohmann::json::parse(r.body);
  REQUIRE(j.is_array());
  REQUIRE(!j.empty());
  CHECK(j[0]["synset_id"] == "s3");
  CHECK(j[0]["words"] == nlohmann::json::array({"dog"}));
  CHECK(j[0]["rank"] == 1);
  for (std::size_t i = 1; i < j.size(); ++i) {
    CHECK(j[i]["rank"] == i + 1);
    CHECK(j[i - 1]["score"].get<double>() >= j[i]["score"].get<double>());
  }

  // Same content as the ranking pipeline on the same state.
  auto store = std::make_shared<const VectorStore>(load_vectors(StateFiles{dir.path()}.vectors()));
  WordSpace space(store, t0());
  auto direct = predict("puppy", space, t0(), toy_ranker(), {});
  REQUIRE(direct.size() == j.size());
  for (std::size_t i = 0; i < direct.size(); ++i) {
    CHECK(j[i]["synset_id"] == direct[i].id);
    CHECK(j[i]["score"].get<double>() == direct[i].score);
  }

  auto one = nlohmann::json::parse(svc->candidates("puppy", "1").body);
  CHECK(one.size() == 1);
  CHECK(svc->candidates("puppy", std::nullopt).body == r.body);

  CHECK(svc->candidates(std::nullopt, std::nullopt).status == 400);
  CHECK(svc->candidates("  ", std::nullopt).status == 400);
  CHECK(svc->candidates("puppy", "0").status == 400);
  CHECK(svc->candidates("puppy", "ten").status == 400);
  CHECK(svc->candidates("void", std::nullopt).status == 422);
  CHECK(svc->candidates("zebra", std::nullopt).status == 422);
}

TEST_CASE("decisions are logged and compacted") {
  TempDir dir;
  make_toy_state(dir.path());
  auto svc = AnnotationService::open(dir.path(), fixed_clock());
  auto log = StateFiles{dir.path()}.log();

  CHECK(svc->decision(decision_body("puppy", "s3", "accept")).status == 204);
  CHECK(line_count(log) == 1);
  CHECK(svc->decision(decision_body("puppy", "s3", "reject")).status == 204);
  CHECK(line_count(log) == 2);
  auto ds = svc->decisions();
  REQUIRE(ds.size() == 1);
  CHECK(ds[0].verdict == Verdict::reject);
  CHECK(ds[0].timestamp == "2026-01-01T00:00:00Z");

  CHECK(svc->decision(decision_body("puppy", "s99", "accept")).status == 404);
  CHECK(svc->decision(decision_body("zebra", "s3", "accept")).status == 404);
  CHECK(svc->decision(decision_body("puppy", "s3", "maybe")).status == 400);
  CHECK(svc->decision("{not json").status == 400);
  CHECK(svc->decision(R"({"word":"puppy","synset_id":"s3","verdict":"accept"})").status == 400);
  CHECK(line_count(log) == 2);

  // Annotators are tracked separately.
  CHECK(svc->decision(decision_body("puppy", "s3", "accept", "bob")).status == 204);
  CHECK(svc->decisions().size() == 2);
}

TEST_CASE("commit attaches accepted synsets") {
  TempDir dir;
  make_toy_state(dir.path());
  auto svc = AnnotationService::open(dir.path(), fixed_clock());

  CHECK(svc->commit(commit_body("puppy")).status == 409);  // nothing accepted yet
  REQUIRE(svc->decision(decision_body("puppy", "s3", "accept")).status == 204);
  REQUIRE(svc->decision(decision_body("puppy", "s4", "reject")).status == 204);
  auto r = svc->commit(commit_body("puppy"));
  REQUIRE(r.status == 200);
  auto id = nlohmann::json::parse(r.body)["new_synset_id"].get<std::string>();

  auto t = svc->taxonomy();
  REQUIRE(t.contains(id));
  CHECK(t.at(id).hypernym_ids == std::vector<std::string>{"s3"});
  CHECK(t.at(id).words == std::vector<std::string>{"puppy"});
  CHECK(t.hyponyms(id).empty());
  CHECK(svc->queue() == std::vector<std::string>{"kitten"});
  CHECK(nlohmann::json::parse(svc->next_word().body)["word"] == "kitten");

  CHECK(svc->commit(commit_body("puppy")).status == 409);
  CHECK(svc->decision(decision_body("puppy", "s3", "accept")).status == 409);
  CHECK(svc->commit(commit_body("zebra")).status == 404);
  CHECK(svc->commit("[]").status == 400);

  // The export and the snapshot carry the new synset.
  auto exported = svc->export_taxonomy();
  CHECK(exported.body.find(synset_to_json_line(t.at(id))) != std::string::npos);
  CHECK(read_text(StateFiles{dir.path()}.snapshot()) == exported.body);

  // The index picked up the new row: a dog-like query now reaches it.
  auto j = nlohmann::json::parse(svc->candidates("hound", std::nullopt).body);
  bool found = false;
  for (const auto& row : j) found = found || row["synset_id"] == id;
  CHECK(found);
}

TEST_CASE("export round trip") {
  TempDir dir;
  make_toy_state(dir.path());
  auto svc = AnnotationService::open(dir.path(), fixed_clock());
  auto body = svc->export_taxonomy().body;
  CHECK(body == read_text(data_path("t0.jsonl")));
  std::istringstream in(body);
  auto back = read_taxonomy(in);
  std::ostringstream again;
  write_taxonomy(again, back);
  CHECK(again.str() == body);
}

TEST_CASE("replaying the log reproduces the working taxonomy") {
  TempDir dir;
  make_toy_state(dir.path());
  StateFiles files{dir.path()};
  write_text(files.queue(), "puppy\nkitten\nsapling\noak\nhound\ntabby\n");
  std::mt19937_64 rng(11);
  const std::vector<std::string> words{"puppy", "kitten", "sapling", "oak", "hound", "tabby"};
  const std::vector<std::string> verdicts{"accept", "reject"};
  Taxonomy working;
  {
    auto svc = AnnotationService::open(dir.path(), fixed_clock());
    for (int step = 0; step < 60; ++step) {
      const auto& w = words[rng() % words.size()];
      auto ids = svc->taxonomy().ids();
      if (rng() % 4 == 0) {
        auto r = svc->commit(commit_body(w));
        if (r.status == 200) {
          auto id = nlohmann::json::parse(r.body)["new_synset_id"].get<std::string>();
          CHECK(svc->taxonomy().hyponyms(id).empty());
        }
      } else {
        svc->decision(decision_body(w, ids[rng() % ids.size()], verdicts[rng() % 2], rng() % 2 ? "a" : "b"));
      }
    }
    working = svc->taxonomy();
    CHECK(working.size() > t0().size());
    CHECK_NOTHROW(working.topological_order());
  }
  CHECK(replay_log(t0(), read_decision_log(files.log())) == working);
  auto reopened = AnnotationService::open(dir.path(), fixed_clock());
  CHECK(reopened->taxonomy() == working);
  CHECK(reopened->export_taxonomy().body == read_text(files.snapshot()));
}

TEST_CASE("a tampered log is rejected on replay") {
  TempDir dir;
  make_toy_state(dir.path());
  StateFiles files{dir.path()};
  write_text(files.log(), R"({"type":"commit","word":"puppy","parents":["s3"],"new_synset_id":"bogus"})" "\n");
  CHECK_THROWS_AS(AnnotationService::open(dir.path()), ParseError);
  write_text(files.log(), "{\n");
  CHECK_THROWS_AS(AnnotationService::open(dir.path()), ParseError);
}

TEST_CASE("concurrent writers serialize") {
  TempDir dir;
  make_toy_state(dir.path());
  auto svc = AnnotationService::open(dir.path(), fixed_clock());
  std::vector<std::thread> threads;
  for (int i = 0; i < 4; ++i) {
    threads.emplace_back([&, i] {
      for (int j = 0; j < 25; ++j) {
        svc->decision(decision_body("kitten", j % 2 ? "s4" : "s2", "accept", "t" + std::to_string(i)));
        svc->candidates("kitten", "3");
      }
    });
  }
  for (auto& t : threads) t.join();
  auto log = read_decision_log(StateFiles{dir.path()}.log());
  CHECK(log.size() == 100);
  CHECK(svc->decisions().size() == 8);
}

TEST_CASE("http surface") {
  TempDir dir;
  make_toy_state(dir.path());
  auto svc = AnnotationService::open(dir.path(), fixed_clock());
  HttpServer server(*svc);
  int port = server.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread loop([&] { server.listen(); });

  httplib::Client client("127.0.0.1", port);
  auto next = client.Get("/words/next");
  REQUIRE(next);
  CHECK(next->status == 200);
  CHECK(next->body == R"({"word":"puppy","remaining_count":2})");
  CHECK(next->get_header_value("Access-Control-Allow-Origin") == "*");

  auto pre = client.Options("/decision");
  REQUIRE(pre);
  CHECK(pre->status == 204);
  CHECK(pre->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);

  auto cands = client.Get("/candidates?word=puppy&k=2");
  REQUIRE(cands);
  CHECK(cands->status == 200);
  CHECK(cands->body == svc->candidates("puppy", "2").body);
  CHECK(client.Get("/candidates")->status == 400);
  CHECK(client.Get("/candidates?word=void")->status == 422);

  auto dec = client.Post("/decision", decision_body("puppy", "s3", "accept"), "application/json");
  REQUIRE(dec);
  CHECK(dec->status == 204);
  CHECK(client.Post("/decision", decision_body("puppy", "s99", "accept"), "application/json")->status == 404);
  auto com = client.Post("/commit", commit_body("puppy"), "application/json");
  REQUIRE(com);
  CHECK(com->status == 200);
  auto id = nlohmann::json::parse(com->body)["new_synset_id"].get<std::string>();
  CHECK(client.Post("/commit", commit_body("puppy"), "application/json")->status == 409);

  auto exp = client.Get("/taxonomy/export");
  REQUIRE(exp);
  CHECK(exp->status == 200);
  std::istringstream in(exp->body);
  auto t = read_taxonomy(in);
  CHECK(t.at(id).hypernym_ids == std::vector<std::string>{"s3"});

  server.stop();
  loop.join();
}
