#include "taxorank/cli.hpp"

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "taxorank/dataset.hpp"
#include "taxorank/errors.hpp"
#include "taxorank/evaluation.hpp"
#include "taxorank/graph_embeddings.hpp"
#include "taxorank/meta.hpp"
#include "taxorank/ranker.hpp"
#include "taxorank/service.hpp"
#include "taxorank/space.hpp"

namespace taxorank {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// TAXORANK_LOG=quiet silences progress messages on stderr.
bool verbose() {
  const char* level = std::getenv("TAXORANK_LOG");
  return level == nullptr || std::string_view(level) != "quiet";
}

struct Common {
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Seed for every random choice")->capture_default_str();
  app->add_option("--threads", c.threads, "Worker thread cap")->capture_default_str()->check(CLI::PositiveNumber);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  return out;
}

// Words of a query file: the first tab-separated field of each non-blank line.
std::vector<std::string> read_query_words(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    auto word = line.substr(0, line.find('\t'));
    while (!word.empty() && (word.back() == '\r' || word.back() == ' ')) word.pop_back();
    if (!word.empty() && seen.insert(word).second) out.push_back(std::move(word));
  }
  return out;
}

struct SpaceArgs {
  std::string kind = "words";
  fs::path vectors;
  fs::path embeddings;
  fs::path gcn_model;
  fs::path meta;

  void add(CLI::App* app) {
    app->add_option("--space", kind, "Similarity space")
        ->check(CLI::IsMember({"words", "graph", "meta"}))
        ->capture_default_str();
    app->add_option("--vectors", vectors, "Word vectors (word2vec text); required for words and graph spaces")
        ->check(CLI::ExistingFile);
    app->add_option("--embeddings", embeddings, "Synset embeddings from embed-graph; graph space")
        ->check(CLI::ExistingFile);
    app->add_option("--gcn-model", gcn_model, "GCN weights for projecting unseen words; graph space")
        ->check(CLI::ExistingFile);
    app->add_option("--meta", meta, "Meta-embedding manifest from fit-meta; meta space")->check(CLI::ExistingFile);
  }

  std::unique_ptr<Space> open(const std::shared_ptr<const Taxonomy>& t) const {
    if (kind == "words") {
      if (vectors.empty()) throw UsageError("--space words needs --vectors");
      return std::make_unique<WordSpace>(std::make_shared<const VectorStore>(load_vectors(vectors)), *t);
    }
    if (kind == "graph") {
      if (vectors.empty() || embeddings.empty()) throw UsageError("--space graph needs --vectors and --embeddings");
      GraphContext ctx;
      ctx.taxonomy = t;
      ctx.store = std::make_shared<const VectorStore>(load_vectors(vectors));
      ctx.text_index = std::make_shared<const SynsetIndex>(SynsetIndex::build(*ctx.store, *t));
      ctx.emb = std::make_shared<const NodeEmbeddings>(load_node_embeddings(embeddings));
      if (!gcn_model.empty()) ctx.gcn = std::make_shared<const GcnModel>(load_gcn_model(gcn_model));
      return std::make_unique<GraphSpace>(std::move(ctx));
    }
    if (meta.empty()) throw UsageError("--space meta needs --meta");
    return std::make_unique<MetaEmbeddingSpace>(std::make_shared<const MetaSpace>(load_meta_space(meta)), *t);
  }
};

struct BuildDatasetArgs {
  fs::path old_path, new_path, out, mapping;
  FilterConfig filters;
  Common common;
};

int build_dataset(const BuildDatasetArgs& a, std::ostream& out) {
  IdMapping mapping;
  if (!a.mapping.empty()) mapping = IdMapping::load(a.mapping);
  auto ds = diff_versions(load_taxonomy(a.old_path), load_taxonomy(a.new_path), a.filters, mapping);
  ds.old_label = a.old_path.stem().string();
  ds.new_label = a.new_path.stem().string();
  save_dataset(a.out, ds);
  fmt::print(out, "{} entries\n", ds.entries.size());
  return kExitOk;
}

struct EmbedGraphArgs {
  std::string method;
  fs::path taxonomy, vectors, out, gcn_model_out;
  int dim = 0;
  int epochs = 0;
  Node2VecConfig n2v;
  PoincareConfig poincare;
  TadwConfig tadw;
  HopeConfig hope;
  GcnConfig gcn;
  Common common;
};

int embed_graph(EmbedGraphArgs a, std::ostream& out, std::ostream& err) {
  auto t = load_taxonomy(a.taxonomy);
  auto method = parse_method(a.method);
  auto features = [&] {
    if (a.vectors.empty()) throw UsageError("--method " + a.method + " needs --vectors for synset text features");
    return SynsetIndex::build(load_vectors(a.vectors), t);
  };
  if (method != GraphMethod::gcn && !a.gcn_model_out.empty()) {
    throw UsageError("--gcn-model-out only applies to --method gcn");
  }
  NodeEmbeddings emb;
  switch (method) {
    case GraphMethod::node2vec:
      if (a.dim > 0) a.n2v.dim = a.dim;
      if (a.epochs > 0) a.n2v.epochs = a.epochs;
      a.n2v.seed = a.common.seed;
      a.n2v.threads = a.common.threads;
      emb = train_node2vec(t, a.n2v);
      break;
    case GraphMethod::poincare:
      if (a.dim > 0) a.poincare.dim = a.dim;
      if (a.epochs > 0) a.poincare.epochs = a.epochs;
      a.poincare.seed = a.common.seed;
      emb = train_poincare(t, a.poincare);
      break;
    case GraphMethod::tadw:
      if (a.dim > 0) a.tadw.dim = a.dim;
      if (a.epochs > 0) a.tadw.iterations = a.epochs;
      a.tadw.seed = a.common.seed;
      emb = train_tadw(t, features(), a.tadw);
      break;
    case GraphMethod::hope:
      if (a.dim > 0) a.hope.dim = a.dim;
      a.hope.seed = a.common.seed;
      emb = train_hope(t, a.hope);
      break;
    case GraphMethod::gcn: {
      if (a.dim > 0) a.gcn.out = a.dim;
      if (a.epochs > 0) a.gcn.steps = a.epochs;
      a.gcn.seed = a.common.seed;
      auto result = train_gcn(t, features(), a.gcn);
      emb = std::move(result.embeddings);
      if (!a.gcn_model_out.empty()) save_gcn_model(a.gcn_model_out, result.model);
      break;
    }
  }
  save_node_embeddings(a.out, emb);
  if (verbose()) fmt::print(err, "trained {} embeddings for {} synsets\n", method_name(method), emb.index.size());
  fmt::print(out, "{} {} {}\n", method_name(method), emb.index.size(), emb.dim());
  return kExitOk;
}

struct FitMetaArgs {
  std::string mode;
  std::vector<std::string> word_sources, graph_sources;
  fs::path taxonomy, vectors, gcn_model, out;
  std::size_t dim = 300;
  std::size_t vocab_limit = 0;
  bool triplet = false;
  AutoencoderConfig ae;
  TripletConfig tc;
  Common common;
};

std::pair<std::string, fs::path> split_source(const std::string& arg) {
  auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size()) {
    throw UsageError("source '" + arg + "' must look like NAME=PATH");
  }
  fs::path p = arg.substr(eq + 1);
  if (!fs::exists(p)) throw UsageError("source file does not exist: " + p.string());
  return {arg.substr(0, eq), fs::absolute(p)};
}

int fit_meta(FitMetaArgs a, std::ostream& out, std::ostream& err) {
  auto mode = parse_meta_mode(a.mode);
  if ((!a.graph_sources.empty() || a.triplet) && a.taxonomy.empty()) {
    throw UsageError("graph sources and --triplet need --taxonomy");
  }
  if (!a.graph_sources.empty() && a.vectors.empty()) throw UsageError("graph sources need --vectors");

  std::vector<Source> sources;
  std::vector<std::string> vocab;
  auto take_vocab = [&](const VectorStore& store) {
    const auto& toks = store.tokens();
    auto n = a.vocab_limit == 0 ? toks.size() : std::min(a.vocab_limit, toks.size());
    vocab.insert(vocab.end(), toks.begin(), toks.begin() + static_cast<std::ptrdiff_t>(n));
  };
  for (const auto& arg : a.word_sources) {
    auto [name, path] = split_source(arg);
    SourceSpec spec{name, "words", path, {}, {}, {}};
    sources.push_back(open_source(spec));
    take_vocab(load_vectors(path));
  }
  for (const auto& arg : a.graph_sources) {
    auto [name, path] = split_source(arg);
    SourceSpec spec{name, "graph", fs::absolute(a.vectors), path, fs::absolute(a.taxonomy), {}};
    if (!a.gcn_model.empty()) spec.gcn_model = fs::absolute(a.gcn_model);
    sources.push_back(open_source(spec));
  }
  std::optional<Taxonomy> t;
  if (!a.taxonomy.empty()) {
    t = load_taxonomy(a.taxonomy);
    for (const auto& [lemma, _] : t->lemma_index()) vocab.push_back(lemma);
  }
  auto ss = std::make_shared<const SourceSet>(std::move(sources), vocab);
  if (verbose()) fmt::print(err, "{} sources, {} shared words\n", ss->size(), ss->shared_vocabulary().size());

  std::optional<MetaSpace> ms;
  switch (mode) {
    case MetaMode::concat:
      ms = MetaSpace::concat(ss);
      break;
    case MetaMode::svd:
      ms = fit_svd_meta(ss, a.dim);
      break;
    case MetaMode::caeme:
    case MetaMode::aaeme: {
      a.ae.meta_dim = a.dim;
      a.ae.seed = a.common.seed;
      std::optional<TripletConfig> tcfg;
      if (a.triplet) tcfg = a.tc;
      FitReport report;
      ms = fit_autoencoder_meta(ss, mode, a.ae, tcfg, t ? &*t : nullptr, &report);
      fmt::print(out, "initial_loss {}\nfinal_loss {}\n", report.initial_loss, report.final_loss);
      break;
    }
  }
  save_meta_space(a.out, *ms);
  fmt::print(out, "{} {}\n", meta_mode_name(mode), ms->dim());
  return kExitOk;
}

struct TrainRankerArgs {
  fs::path taxonomy, wiktionary, out;
  SpaceArgs space;
  TrainingConfig training;
  RankerConfig ranker;
  Common common;
};

int train_ranker_cmd(TrainRankerArgs a, std::ostream& out, std::ostream& err) {
  auto t = std::make_shared<const Taxonomy>(load_taxonomy(a.taxonomy));
  auto space = a.space.open(t);
  WiktionaryTable wikt;
  if (!a.wiktionary.empty()) wikt = load_wiktionary(a.wiktionary);
  a.training.seed = a.common.seed;
  a.training.threads = a.common.threads;
  a.ranker.seed = a.common.seed;
  auto ts = build_training_set(*t, *space, wikt, a.training);
  if (verbose()) fmt::print(err, "{} pseudo-queries, {} candidate rows\n", ts.queries.size(), ts.y.size());
  auto r = train_ranker(ts, a.ranker);
  save_ranker(a.out, r);
  fmt::print(out, "queries {}\nrows {}\nl2 {}\n", ts.queries.size(), ts.y.size(), r.l2);
  return kExitOk;
}

struct PredictArgs {
  fs::path taxonomy, ranker, queries, wiktionary, out;
  SpaceArgs space;
  std::size_t k = 10;
  std::size_t k_assoc = 10;
  Common common;
};

int predict_cmd(const PredictArgs& a, std::ostream& out, std::ostream& err) {
  auto t = std::make_shared<const Taxonomy>(load_taxonomy(a.taxonomy));
  auto space = a.space.open(t);
  auto r = load_ranker(a.ranker);
  WiktionaryTable wikt;
  if (!a.wiktionary.empty()) wikt = load_wiktionary(a.wiktionary);
  auto file = open_out(a.out);
  std::size_t written = 0, missed = 0;
  for (const auto& word : read_query_words(a.queries)) {
    try {
      write_predictions(file, word, predict(word, *space, *t, r, wikt, a.k, a.k_assoc));
      ++written;
    } catch (const ZeroQueryError& e) {
      ++missed;
      if (verbose()) fmt::print(err, "skipping {}\n", e.what());
    }
  }
  fmt::print(out, "predicted {}\nskipped {}\n", written, missed);
  return kExitOk;
}

struct EvaluateArgs {
  fs::path pred, gold, taxonomy, out, per_query;
  std::size_t k = 10;
  Common common;
};

int evaluate_cmd(const EvaluateArgs& a, std::ostream& out) {
  auto t = load_taxonomy(a.taxonomy);
  QueryDataset ds;
  ds.entries = load_dataset(a.gold);
  std::ifstream pin(a.pred);
  if (!pin) throw ParseError("cannot open " + a.pred.string());
  auto report = evaluate(ds, read_predictions(pin), t, a.k, a.common.seed);
  auto text = report.to_json().dump(2) + "\n";
  if (a.out.empty()) {
    out << text;
  } else {
    open_out(a.out) << text;
  }
  if (!a.per_query.empty()) {
    auto f = open_out(a.per_query);
    write_per_query(f, report);
  }
  return kExitOk;
}

struct ServeArgs {
  fs::path state_dir, taxonomy, vectors, ranker, queue, wiktionary;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t k_assoc = 10;
  Common common;
};

HttpServer* g_server = nullptr;

extern "C" void handle_stop(int) {
  if (g_server) g_server->stop();
}

// Seeds a fresh state directory from the init flags; an existing one is reused.
void prepare_state_dir(const ServeArgs& a) {
  StateFiles files{a.state_dir};
  if (fs::exists(files.initial())) return;
  if (a.taxonomy.empty() || a.vectors.empty() || a.ranker.empty() || a.queue.empty()) {
    throw UsageError("a new state directory needs --taxonomy, --vectors, --ranker and --queue");
  }
  fs::create_directories(a.state_dir);
  save_taxonomy(files.initial(), load_taxonomy(a.taxonomy));
  fs::copy_file(a.vectors, files.vectors(), fs::copy_options::overwrite_existing);
  fs::copy_file(a.ranker, files.ranker(), fs::copy_options::overwrite_existing);
  fs::copy_file(a.queue, files.queue(), fs::copy_options::overwrite_existing);
  if (!a.wiktionary.empty()) fs::copy_file(a.wiktionary, files.wiktionary(), fs::copy_options::overwrite_existing);
}

int serve_cmd(const ServeArgs& a, std::ostream& out) {
  prepare_state_dir(a);
  ServiceOptions opts;
  opts.k_assoc = a.k_assoc;
  auto service = AnnotationService::open(a.state_dir, opts);
  HttpServer server(*service);
  int port = server.bind(a.host, a.port);
  if (port < 0) throw ConfigError(fmt::format("cannot bind {}:{}", a.host, a.port));
  fmt::print(out, "listening on http://{}:{}\n", a.host, port);
  out.flush();
  g_server = &server;
  auto prev_int = std::signal(SIGINT, handle_stop);
  auto prev_term = std::signal(SIGTERM, handle_stop);
  server.listen();
  std::signal(SIGINT, prev_int);
  std::signal(SIGTERM, prev_term);
  g_server = nullptr;
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attach new words to a hypernymy taxonomy", "taxorank"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  BuildDatasetArgs bd;
  auto* build = app.add_subcommand("build-dataset", "Diff two taxonomy versions into a query/gold TSV");
  build->add_option("--old", bd.old_path, "Older taxonomy (JSON Lines)")->required()->check(CLI::ExistingFile);
  build->add_option("--new", bd.new_path, "Newer taxonomy (JSON Lines)")->required()->check(CLI::ExistingFile);
  build->add_option("--out", bd.out, "Output TSV")->required();
  build->add_option("--mapping", bd.mapping, "TSV of old_id TAB new_id")->check(CLI::ExistingFile);
  build->add_option("--min-length", bd.filters.min_length, "Drop words shorter than this (0 keeps all)")
      ->capture_default_str();
  build->add_flag("--drop-substring", bd.filters.substring_of_hypernym,
                  "Drop words containing a lemma of a gold synset");
  build->add_flag("--drop-multiword", bd.filters.multiword, "Drop words containing whitespace");
  add_common(build, bd.common);

  EmbedGraphArgs eg;
  auto* embed = app.add_subcommand("embed-graph", "Train synset embeddings from the taxonomy graph");
  embed->add_option("--method", eg.method, "Embedding method")
      ->required()
      ->check(CLI::IsMember({"node2vec", "poincare", "tadw", "hope", "gcn"}));
  embed->add_option("--taxonomy", eg.taxonomy, "Taxonomy (JSON Lines)")->required()->check(CLI::ExistingFile);
  embed->add_option("--vectors", eg.vectors, "Word vectors for synset text features; tadw and gcn")
      ->check(CLI::ExistingFile);
  embed->add_option("--out", eg.out, "Output embeddings (word2vec text plus .meta sidecar)")->required();
  embed->add_option("--gcn-model-out", eg.gcn_model_out, "Where to save GCN weights; gcn only");
  embed->add_option("--dim", eg.dim, "Embedding size (0 keeps the method default)")->capture_default_str();
  embed->add_option("--epochs", eg.epochs, "Epochs, iterations or steps (0 keeps the method default)")
      ->capture_default_str();
  embed->add_option("--walk-length", eg.n2v.walk_length, "node2vec walk length")->capture_default_str();
  embed->add_option("--num-walks", eg.n2v.num_walks, "node2vec walks per node")->capture_default_str();
  embed->add_option("--p", eg.n2v.p, "node2vec return parameter")->capture_default_str();
  embed->add_option("--q", eg.n2v.q, "node2vec in-out parameter")->capture_default_str();
  embed->add_option("--window", eg.n2v.window, "node2vec skip-gram window")->capture_default_str();
  embed->add_option("--negatives", eg.n2v.negatives, "node2vec negative samples")->capture_default_str();
  embed->add_option("--poincare-negatives", eg.poincare.negatives, "Poincaré negative samples")
      ->capture_default_str();
  embed->add_option("--lr", eg.poincare.lr, "Poincaré learning rate")->capture_default_str();
  embed->add_option("--lambda", eg.tadw.lambda, "TADW regularisation")->capture_default_str();
  embed->add_option("--text-dim", eg.tadw.text_dim, "TADW text feature size")->capture_default_str();
  embed->add_option("--beta-scale", eg.hope.beta_scale, "HOPE decay as a fraction of 1/spectral radius")
      ->capture_default_str();
  embed->add_option("--hidden", eg.gcn.hidden, "GCN hidden size")->capture_default_str();
  embed->add_option("--step-size", eg.gcn.step_size, "GCN step size")->capture_default_str();
  add_common(embed, eg.common);

  FitMetaArgs fm;
  auto* meta = app.add_subcommand("fit-meta", "Fit a meta-embedding over several sources");
  meta->add_option("--mode", fm.mode, "Fusion")->required()->check(CLI::IsMember({"concat", "svd", "caeme", "aaeme"}));
  meta->add_option("--words-source", fm.word_sources, "Word-vector source NAME=PATH (repeatable)");
  meta->add_option("--graph-source", fm.graph_sources, "Graph-embedding source NAME=PATH (repeatable)");
  meta->add_option("--taxonomy", fm.taxonomy, "Taxonomy; needed by graph sources and --triplet")
      ->check(CLI::ExistingFile);
  meta->add_option("--vectors", fm.vectors, "Word vectors that graph sources project through")
      ->check(CLI::ExistingFile);
  meta->add_option("--gcn-model", fm.gcn_model, "GCN weights shared by graph sources")->check(CLI::ExistingFile);
  meta->add_option("--out", fm.out, "Output manifest (JSON)")->required();
  meta->add_option("--dim", fm.dim, "Output size for svd and aaeme")->capture_default_str();
  meta->add_option("--vocab-limit", fm.vocab_limit, "Training words taken from each word source (0 = all)")
      ->capture_default_str();
  meta->add_option("--epochs", fm.ae.epochs, "Autoencoder epochs")->capture_default_str();
  meta->add_option("--batch", fm.ae.batch, "Autoencoder batch size")->capture_default_str();
  meta->add_option("--step", fm.ae.step, "Autoencoder step size")->capture_default_str();
  meta->add_flag("--triplet", fm.triplet, "Add the taxonomy triplet term");
  meta->add_option("--triplet-k", fm.tc.k, "Triplets per anchor")->capture_default_str();
  meta->add_option("--margin", fm.tc.margin, "Triplet margin")->capture_default_str();
  meta->add_option("--alpha", fm.tc.alpha, "Reconstruction weight against the triplet term")->capture_default_str();
  add_common(meta, fm.common);

  TrainRankerArgs tr;
  auto* train = app.add_subcommand("train-ranker", "Train the candidate ranker on pseudo-queries");
  train->add_option("--taxonomy", tr.taxonomy, "Taxonomy (JSON Lines)")->required()->check(CLI::ExistingFile);
  tr.space.add(train);
  train->add_option("--wiktionary", tr.wiktionary, "Wiktionary TSV")->check(CLI::ExistingFile);
  train->add_option("--out", tr.out, "Output ranker (JSON)")->required();
  train->add_option("--n-pseudo", tr.training.n_pseudo, "Pseudo-queries sampled from leaf lemmas")
      ->capture_default_str();
  train->add_option("--k-assoc", tr.training.k_assoc, "Associates per query")->capture_default_str();
  train->add_option("--folds", tr.ranker.folds, "Cross-validation folds")->capture_default_str();
  add_common(train, tr.common);

  PredictArgs pr;
  auto* pred = app.add_subcommand("predict", "Rank hypernym candidates for query words");
  pred->add_option("--taxonomy", pr.taxonomy, "Taxonomy (JSON Lines)")->required()->check(CLI::ExistingFile);
  pr.space.add(pred);
  pred->add_option("--ranker", pr.ranker, "Ranker from train-ranker")->required()->check(CLI::ExistingFile);
  pred->add_option("--queries", pr.queries, "Query words, one per line (a dataset TSV also works)")
      ->required()
      ->check(CLI::ExistingFile);
  pred->add_option("--wiktionary", pr.wiktionary, "Wiktionary TSV")->check(CLI::ExistingFile);
  pred->add_option("--out", pr.out, "Output predictions TSV")->required();
  pred->add_option("--k", pr.k, "Candidates kept per word")->capture_default_str()->check(CLI::PositiveNumber);
  pred->add_option("--k-assoc", pr.k_assoc, "Associates per query")->capture_default_str();
  add_common(pred, pr.common);

  EvaluateArgs ev;
  auto* eval = app.add_subcommand("evaluate", "Score predictions with component MAP and precision@k");
  eval->add_option("--pred", ev.pred, "Predictions TSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--gold", ev.gold, "Dataset TSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--taxonomy", ev.taxonomy, "Taxonomy the gold ids refer to")->required()->check(CLI::ExistingFile);
  eval->add_option("--k", ev.k, "Predictions counted per word")->capture_default_str()->check(CLI::PositiveNumber);
  eval->add_option("--out", ev.out, "Write the JSON report here instead of stdout");
  eval->add_option("--per-query", ev.per_query, "Write word TAB AP lines here");
  add_common(eval, ev.common);

  ServeArgs sv;
  auto* serve = app.add_subcommand("serve", "Run the annotation service");
  serve->add_option("--state-dir", sv.state_dir, "Service state directory")->required();
  serve->add_option("--port", sv.port, "TCP port (0 picks a free one)")->capture_default_str();
  serve->add_option("--host", sv.host, "Bind address")->capture_default_str();
  serve->add_option("--taxonomy", sv.taxonomy, "Initial taxonomy for a new state directory")
      ->check(CLI::ExistingFile);
  serve->add_option("--vectors", sv.vectors, "Word vectors for a new state directory")->check(CLI::ExistingFile);
  serve->add_option("--ranker", sv.ranker, "Ranker for a new state directory")->check(CLI::ExistingFile);
  serve->add_option("--queue", sv.queue, "Query words for a new state directory")->check(CLI::ExistingFile);
  serve->add_option("--wiktionary", sv.wiktionary, "Wiktionary TSV for a new state directory")
      ->check(CLI::ExistingFile);
  serve->add_option("--k-assoc", sv.k_assoc, "Associates per query")->capture_default_str();
  add_common(serve, sv.common);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*build) return build_dataset(bd, out);
    if (*embed) return embed_graph(eg, out, err);
    if (*meta) return fit_meta(fm, out, err);
    if (*train) return train_ranker_cmd(tr, out, err);
    if (*pred) return predict_cmd(pr, out, err);
    if (*eval) return evaluate_cmd(ev, out);
    if (*serve) return serve_cmd(sv, out);
  } catch (const UsageError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitUsage;
  } catch (const ConfigError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace taxorank
