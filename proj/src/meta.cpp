#include "taxorank/meta.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <Eigen/SVD>

#include "json_matrix.hpp"
#include "taxorank/errors.hpp"
#include "taxorank/graph_embeddings.hpp"
#include "taxorank/linalg.hpp"

namespace taxorank {

std::string_view meta_mode_name(MetaMode m) {
  switch (m) {
    case MetaMode::concat: return "concat";
    case MetaMode::svd: return "svd";
    case MetaMode::caeme: return "caeme";
    case MetaMode::aaeme: return "aaeme";
  }
  return "concat";
}

MetaMode parse_meta_mode(std::string_view name) {
  for (auto m : {MetaMode::concat, MetaMode::svd, MetaMode::caeme, MetaMode::aaeme}) {
    if (meta_mode_name(m) == name) return m;
  }
  throw ConfigError("unknown meta-embedding mode '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// sources

nlohmann::json SourceSpec::to_json() const {
  nlohmann::ordered_json j{{"name", name}, {"kind", kind}, {"vectors", vectors.string()}};
  if (kind == "graph") {
    j["embeddings"] = embeddings.string();
    j["taxonomy"] = taxonomy.string();
    if (!gcn_model.empty()) j["gcn_model"] = gcn_model.string();
  }
  return j;
}

SourceSpec SourceSpec::from_json(const nlohmann::json& j) {
  SourceSpec s;
  s.name = j.at("name").get<std::string>();
  s.kind = j.at("kind").get<std::string>();
  s.vectors = j.at("vectors").get<std::string>();
  if (s.kind == "graph") {
    s.embeddings = j.at("embeddings").get<std::string>();
    s.taxonomy = j.at("taxonomy").get<std::string>();
    if (j.contains("gcn_model")) s.gcn_model = j.at("gcn_model").get<std::string>();
  } else if (s.kind != "words") {
    throw ConfigError("unknown source kind '" + s.kind + "'");
  }
  return s;
}

Source open_source(const SourceSpec& spec) {
  Source src;
  src.name = spec.name;
  src.spec = spec;
  auto store = std::make_shared<const VectorStore>(load_vectors(spec.vectors));
  if (spec.kind == "words") {
    src.dim = store->dim();
    src.lookup = [store](std::string_view token, const SynsetIdSet&) { return store->phrase_vector(token); };
    return src;
  }
  if (spec.kind != "graph") throw ConfigError("unknown source kind '" + spec.kind + "'");
  GraphContext ctx;
  ctx.taxonomy = std::make_shared<const Taxonomy>(load_taxonomy(spec.taxonomy));
  ctx.store = store;
  ctx.text_index = std::make_shared<const SynsetIndex>(SynsetIndex::build(*store, *ctx.taxonomy));
  ctx.emb = std::make_shared<const NodeEmbeddings>(load_node_embeddings(spec.embeddings));
  if (!spec.gcn_model.empty()) ctx.gcn = std::make_shared<const GcnModel>(load_gcn_model(spec.gcn_model));
  src.dim = ctx.emb->dim();
  src.lookup = [ctx](std::string_view token, const SynsetIdSet& mask) { return ctx.lemma_vector(token, mask); };
  return src;
}

SourceSet::SourceSet(std::vector<Source> sources, const std::vector<std::string>& candidates)
    : sources_(std::move(sources)) {
  if (sources_.size() < 2) throw ConfigError("a source set needs at least two sources");
  for (const auto& s : sources_) {
    if (s.dim == 0 || !s.lookup) throw ConfigError("source '" + s.name + "' is empty");
  }
  std::vector<std::string> tokens;
  tokens.reserve(candidates.size());
  for (const auto& c : candidates) tokens.push_back(normalize_lemma(c));
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  for (auto& tok : tokens) {
    if (tok.empty()) continue;
    bool covered = std::all_of(sources_.begin(), sources_.end(),
                               [&](const Source& s) { return !s.lookup(tok, {}).miss; });
    if (covered) shared_.push_back(std::move(tok));
  }
}

std::size_t SourceSet::total_dim() const {
  std::size_t d = 0;
  for (const auto& s : sources_) d += s.dim;
  return d;
}

namespace {

// Normalised per-source vectors of one token; zeros where a source misses.
std::vector<Vector> source_inputs(const SourceSet& ss, std::string_view token, const SynsetIdSet& mask,
                                  bool& all_miss) {
  std::vector<Vector> out;
  out.reserve(ss.size());
  all_miss = true;
  for (const auto& s : ss.sources()) {
    auto l = s.lookup(token, mask);
    if (static_cast<std::size_t>(l.vec.size()) != s.dim) {
      throw DimensionMismatchError("source '" + s.name + "' returned a vector of the wrong size");
    }
    double n = l.vec.norm();
    if (l.miss || n == 0.0) {
      out.push_back(Vector::Zero(static_cast<Eigen::Index>(s.dim)));
    } else {
      out.push_back(l.vec / n);
      all_miss = false;
    }
  }
  return out;
}

}  // namespace

Vector concat_meta(const SourceSet& ss, std::string_view token, const SynsetIdSet& mask) {
  bool all_miss = false;
  auto parts = source_inputs(ss, token, mask, all_miss);
  if (all_miss) throw MissError("no source resolves '" + std::string(token) + "'");
  Vector out(static_cast<Eigen::Index>(ss.total_dim()));
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.segment(at, p.size()) = p;
    at += p.size();
  }
  return out;
}

Matrix concat_matrix(const SourceSet& ss) {
  const auto& vocab = ss.shared_vocabulary();
  Matrix x(static_cast<Eigen::Index>(vocab.size()), static_cast<Eigen::Index>(ss.total_dim()));
  for (std::size_t i = 0; i < vocab.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = concat_meta(ss, vocab[i]);
  return x;
}

double svd_reconstruction_error(const Matrix& x, const Matrix& v) {
  return (x - x * v * v.transpose()).squaredNorm();
}

// ---------------------------------------------------------------------------
// triplets

void TripletConfig::validate() const {
  if (k < 1) throw ConfigError("triplet: K must be at least 1");
  if (!(margin > 0)) throw ConfigError("triplet: margin must be positive");
  if (!(alpha > 0) || alpha >= 1) throw ConfigError("triplet: alpha must lie in (0, 1)");
  if (!(noise_sigma >= 0)) throw ConfigError("triplet: noise sigma must be non-negative");
}

double triplet_loss(double d_ap, double d_an, double margin) { return std::max(d_ap - d_an + margin, 0.0); }

std::set<std::string> related_lemmas(const Taxonomy& t, std::string_view anchor) {
  const auto key = normalize_lemma(anchor);
  std::set<std::string> out;
  if (!t.has_lemma(key)) return out;
  auto add_words = [&](const std::string& id) {
    for (const auto& w : t.at(id).words) out.insert(normalize_lemma(w));
  };
  for (const auto& id : t.synsets_of(key)) {
    add_words(id);
    for (const auto& h : t.at(id).hypernym_ids) add_words(h);
    for (const auto& h : t.hyponyms(id)) add_words(h);
  }
  out.erase(key);
  return out;
}

std::vector<Triplet> sample_triplets(const Taxonomy& t, const std::vector<std::string>& vocab,
                                     const std::string& anchor, const TripletConfig& cfg,
                                     std::mt19937_64& rng) {
  cfg.validate();
  const auto key = normalize_lemma(anchor);
  auto related = related_lemmas(t, key);
  std::vector<std::string> positives;
  std::vector<std::string> negatives;
  for (const auto& w : vocab) {
    if (related.contains(w)) {
      positives.push_back(w);
    } else if (w != key) {
      negatives.push_back(w);
    }
  }
  std::vector<Triplet> out;
  if (negatives.empty()) return out;
  std::uniform_int_distribution<std::size_t> pick_neg(0, negatives.size() - 1);
  for (int i = 0; i < cfg.k; ++i) {
    Triplet tr{key, std::nullopt, {}};
    if (!positives.empty()) {
      tr.positive = positives[std::uniform_int_distribution<std::size_t>(0, positives.size() - 1)(rng)];
    }
    tr.negative = negatives[pick_neg(rng)];
    out.push_back(std::move(tr));
  }
  return out;
}

// ---------------------------------------------------------------------------
// autoencoder

void AutoencoderConfig::validate() const {
  if (meta_dim == 0 || epochs <= 0 || batch == 0) throw ConfigError("autoencoder: sizes must be positive");
  if (!(step > 0)) throw ConfigError("autoencoder: step size must be positive");
}

AutoencoderModel::AutoencoderModel(MetaMode mode, std::vector<std::size_t> source_dims, std::size_t aaeme_dim)
    : mode_(mode), dims_(std::move(source_dims)) {
  if (mode_ != MetaMode::caeme && mode_ != MetaMode::aaeme) {
    throw ConfigError("autoencoder mode must be caeme or aaeme");
  }
  if (dims_.empty()) throw ConfigError("autoencoder needs sources");
  meta_dim_ = mode_ == MetaMode::caeme ? std::accumulate(dims_.begin(), dims_.end(), std::size_t{0}) : aaeme_dim;
  if (meta_dim_ == 0) throw ConfigError("autoencoder meta dimension must be positive");
  std::size_t at = 0;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    Offsets o{};
    const auto c = code_dim(i);
    o.enc_w = at;
    at += c * dims_[i];
    o.enc_b = at;
    at += c;
    o.dec_w = at;
    at += dims_[i] * meta_dim_;
    o.dec_b = at;
    at += dims_[i];
    offsets_.push_back(o);
  }
  params_ = Vector::Zero(static_cast<Eigen::Index>(at));
}

std::size_t AutoencoderModel::code_dim(std::size_t i) const {
  return mode_ == MetaMode::caeme ? dims_[i] : meta_dim_;
}

namespace {
using Idx = Eigen::Index;
}

Eigen::Map<const Matrix> AutoencoderModel::encoder_w(std::size_t i) const {
  return {params_.data() + offsets_[i].enc_w, static_cast<Idx>(code_dim(i)), static_cast<Idx>(dims_[i])};
}
Eigen::Map<const Vector> AutoencoderModel::encoder_b(std::size_t i) const {
  return {params_.data() + offsets_[i].enc_b, static_cast<Idx>(code_dim(i))};
}
Eigen::Map<const Matrix> AutoencoderModel::decoder_w(std::size_t i) const {
  return {params_.data() + offsets_[i].dec_w, static_cast<Idx>(dims_[i]), static_cast<Idx>(meta_dim_)};
}
Eigen::Map<const Vector> AutoencoderModel::decoder_b(std::size_t i) const {
  return {params_.data() + offsets_[i].dec_b, static_cast<Idx>(dims_[i])};
}

void AutoencoderModel::initialize(std::mt19937_64& rng) {
  params_.setZero();
  auto glorot = [&](std::size_t offset, std::size_t rows, std::size_t cols) {
    double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (std::size_t k = 0; k < rows * cols; ++k) params_[static_cast<Idx>(offset + k)] = u(rng);
  };
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    glorot(offsets_[i].enc_w, code_dim(i), dims_[i]);
    glorot(offsets_[i].dec_w, dims_[i], meta_dim_);
  }
}

Vector AutoencoderModel::fuse(const std::vector<Vector>& inputs) const {
  if (inputs.size() != dims_.size()) throw DimensionMismatchError("autoencoder: wrong number of inputs");
  Vector u = Vector::Zero(static_cast<Idx>(meta_dim_));
  Idx at = 0;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (static_cast<std::size_t>(inputs[i].size()) != dims_[i]) {
      throw DimensionMismatchError("autoencoder: input size mismatch");
    }
    Vector e = encoder_w(i) * inputs[i] + encoder_b(i);
    if (mode_ == MetaMode::caeme) {
      u.segment(at, e.size()) = e;
      at += e.size();
    } else {
      u += e;
    }
  }
  return u;
}

Vector AutoencoderModel::encode(const std::vector<Vector>& inputs) const {
  Vector u = fuse(inputs);
  double n = u.norm();
  if (n == 0.0) throw MissError("autoencoder: meta vector is zero");
  return u / n;
}

Vector AutoencoderModel::decode(std::size_t i, const Vector& meta) const {
  return decoder_w(i) * meta + decoder_b(i);
}

AutoencoderLoss autoencoder_loss(const AutoencoderModel& model, const std::vector<std::vector<Vector>>& inputs,
                                 std::span<const std::size_t> words, std::span<const TripletIndex> triplets,
                                 const std::optional<TripletConfig>& tcfg) {
  const auto& dims = model.source_dims();
  const std::size_t ns = dims.size();
  const auto md = static_cast<Idx>(model.meta_dim());

  // Forward pass for every word that appears anywhere in the batch.
  std::vector<std::size_t> involved(words.begin(), words.end());
  if (tcfg) {
    for (const auto& t : triplets) {
      involved.push_back(t.anchor);
      if (t.positive) involved.push_back(*t.positive);
      involved.push_back(t.negative);
    }
  }
  std::sort(involved.begin(), involved.end());
  involved.erase(std::unique(involved.begin(), involved.end()), involved.end());
  auto slot = [&](std::size_t w) {
    return static_cast<std::size_t>(std::lower_bound(involved.begin(), involved.end(), w) - involved.begin());
  };
  std::vector<Vector> u(involved.size());
  std::vector<Vector> m(involved.size());
  std::vector<double> unorm(involved.size());
  for (std::size_t k = 0; k < involved.size(); ++k) {
    u[k] = model.fuse(inputs[involved[k]]);
    unorm[k] = u[k].norm();
    if (unorm[k] == 0.0) throw NonFiniteLossError("autoencoder: zero meta vector");
    m[k] = u[k] / unorm[k];
  }
  // Decoder gradients go straight into the flat vector; encoder gradients
  // wait until every meta-vector gradient is complete.
  std::vector<Vector> grad_m(involved.size(), Vector::Zero(md));

  AutoencoderLoss out;
  out.grad = Vector::Zero(model.params().size());
  const double recon_weight = tcfg ? tcfg->alpha : 1.0;
  const double triplet_weight = tcfg ? 1.0 - tcfg->alpha : 0.0;

  if (!words.empty()) {
    const double scale = recon_weight / static_cast<double>(words.size());
    for (auto w : words) {
      const auto k = slot(w);
      for (std::size_t i = 0; i < ns; ++i) {
        const Vector& x = inputs[w][i];
        Vector r = model.decode(i, m[k]);
        double xn = x.norm();
        double rn = r.norm();
        double cos = (xn > 0 && rn > 0) ? x.dot(r) / (xn * rn) : 0.0;
        out.recon += (1.0 - cos) / static_cast<double>(words.size());
        if (xn == 0 || rn == 0) continue;
        Vector g_r = -scale * (x / (xn * rn) - cos * r / (rn * rn));
        Eigen::Map<Matrix>(out.grad.data() + model.offsets(i).dec_w, static_cast<Idx>(dims[i]), md) +=
            g_r * m[k].transpose();
        Eigen::Map<Vector>(out.grad.data() + model.offsets(i).dec_b, static_cast<Idx>(dims[i])) += g_r;
        grad_m[k] += model.decoder_w(i).transpose() * g_r;
      }
    }
  }

  if (tcfg && !triplets.empty()) {
    const double scale = triplet_weight / static_cast<double>(triplets.size());
    for (const auto& t : triplets) {
      const auto a = slot(t.anchor);
      const auto n = slot(t.negative);
      Vector diff_n = m[a] - m[n];
      double d_an = diff_n.norm();
      double d_ap = 0.0;
      Vector diff_p;
      std::optional<std::size_t> p;
      if (t.positive) {
        p = slot(*t.positive);
        diff_p = m[a] - m[*p];
        d_ap = diff_p.norm();
      } else {
        // m(a) + noise sits at a fixed offset from m(a), so d(a, p) has no
        // gradient with respect to the parameters.
        d_ap = t.noise.norm();
      }
      double l = triplet_loss(d_ap, d_an, tcfg->margin);
      out.triplet += l / static_cast<double>(triplets.size());
      if (l <= 0.0) continue;
      if (p && d_ap > 0) {
        Vector g = scale * diff_p / d_ap;
        grad_m[a] += g;
        grad_m[*p] -= g;
      }
      if (d_an > 0) {
        Vector g = scale * diff_n / d_an;
        grad_m[a] -= g;
        grad_m[n] += g;
      }
    }
  }

  for (std::size_t k = 0; k < involved.size(); ++k) {
    if (grad_m[k].isZero(0.0)) continue;
    Vector g_u = (grad_m[k] - m[k] * m[k].dot(grad_m[k])) / unorm[k];
    Idx at = 0;
    for (std::size_t i = 0; i < ns; ++i) {
      const auto c = static_cast<Idx>(model.code_dim(i));
      Vector g_e = model.mode() == MetaMode::caeme ? Vector(g_u.segment(at, c)) : g_u;
      at += c;
      const Vector& x = inputs[involved[k]][i];
      Eigen::Map<Matrix>(out.grad.data() + model.offsets(i).enc_w, c, static_cast<Idx>(dims[i])) += g_e * x.transpose();
      Eigen::Map<Vector>(out.grad.data() + model.offsets(i).enc_b, c) += g_e;
    }
  }

  out.loss = recon_weight * out.recon + triplet_weight * out.triplet;
  if (!std::isfinite(out.loss) || !out.grad.allFinite()) {
    throw NonFiniteLossError("autoencoder: loss is not finite");
  }
  return out;
}

// ---------------------------------------------------------------------------
// meta spaces

MetaSpace MetaSpace::concat(std::shared_ptr<const SourceSet> sources) {
  MetaSpace ms;
  ms.mode_ = MetaMode::concat;
  ms.sources_ = std::move(sources);
  return ms;
}

MetaSpace MetaSpace::svd(std::shared_ptr<const SourceSet> sources, Matrix projection) {
  if (static_cast<std::size_t>(projection.rows()) != sources->total_dim()) {
    throw DimensionMismatchError("svd projection does not match the source dimensions");
  }
  MetaSpace ms;
  ms.mode_ = MetaMode::svd;
  ms.sources_ = std::move(sources);
  ms.projection_ = std::move(projection);
  return ms;
}

MetaSpace MetaSpace::autoencoder(std::shared_ptr<const SourceSet> sources, AutoencoderModel model) {
  std::vector<std::size_t> dims;
  for (const auto& s : sources->sources()) dims.push_back(s.dim);
  if (dims != model.source_dims()) throw DimensionMismatchError("autoencoder does not match the sources");
  MetaSpace ms;
  ms.mode_ = model.mode();
  ms.sources_ = std::move(sources);
  ms.model_ = std::move(model);
  return ms;
}

std::size_t MetaSpace::dim() const {
  switch (mode_) {
    case MetaMode::concat: return sources_->total_dim();
    case MetaMode::svd: return static_cast<std::size_t>(projection_.cols());
    default: return model_.meta_dim();
  }
}

Vector MetaSpace::encode(std::string_view token, const SynsetIdSet& mask) const {
  if (mode_ == MetaMode::concat) return concat_meta(*sources_, token, mask);
  if (mode_ == MetaMode::svd) return projection_.transpose() * concat_meta(*sources_, token, mask);
  bool all_miss = false;
  auto inputs = source_inputs(*sources_, token, mask, all_miss);
  if (all_miss) throw MissError("no source resolves '" + std::string(token) + "'");
  return model_.encode(inputs);
}

nlohmann::json MetaSpace::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "taxorank-meta/1";
  j["mode"] = meta_mode_name(mode_);
  j["dim"] = dim();
  auto srcs = nlohmann::ordered_json::array();
  for (const auto& s : sources_->sources()) {
    nlohmann::ordered_json e{{"name", s.name}, {"dim", s.dim}};
    if (s.spec) e["spec"] = s.spec->to_json();
    srcs.push_back(std::move(e));
  }
  j["sources"] = std::move(srcs);
  if (mode_ == MetaMode::svd) j["projection"] = detail::matrix_to_json(projection_);
  if (mode_ == MetaMode::caeme || mode_ == MetaMode::aaeme) {
    j["meta_dim"] = model_.meta_dim();
    j["params"] = detail::vector_to_json(model_.params());
  }
  return j;
}

MetaSpace MetaSpace::from_json(const nlohmann::json& j, std::shared_ptr<const SourceSet> sources) {
  try {
    if (j.at("format") != "taxorank-meta/1") throw ParseError("unsupported meta-space format");
    const auto& srcs = j.at("sources");
    if (srcs.size() != sources->size()) throw DimensionMismatchError("meta space: source count mismatch");
    std::vector<std::size_t> dims;
    for (std::size_t i = 0; i < srcs.size(); ++i) {
      dims.push_back(srcs[i].at("dim").get<std::size_t>());
      if (dims.back() != sources->sources()[i].dim) {
        throw DimensionMismatchError("meta space: source '" + sources->sources()[i].name + "' changed size");
      }
    }
    auto mode = parse_meta_mode(j.at("mode").get<std::string>());
    if (mode == MetaMode::concat) return concat(std::move(sources));
    if (mode == MetaMode::svd) return svd(std::move(sources), detail::matrix_from_json(j.at("projection")));
    AutoencoderModel model(mode, dims, j.at("meta_dim").get<std::size_t>());
    Vector params = detail::vector_from_json(j.at("params"));
    if (params.size() != model.params().size()) throw ParseError("meta space: parameter count mismatch");
    model.params() = std::move(params);
    return autoencoder(std::move(sources), std::move(model));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("meta space: ") + e.what());
  }
}

MetaSpace fit_svd_meta(std::shared_ptr<const SourceSet> sources, std::size_t dim) {
  const auto& vocab = sources->shared_vocabulary();
  if (dim == 0 || dim > sources->total_dim() || dim > vocab.size()) {
    throw RankError("svd meta: target dimension " + std::to_string(dim) + " exceeds the available rank");
  }
  Matrix x = concat_matrix(*sources);
  Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinV);
  return MetaSpace::svd(std::move(sources), svd.matrixV().leftCols(static_cast<Idx>(dim)));
}

MetaSpace fit_autoencoder_meta(std::shared_ptr<const SourceSet> sources, MetaMode mode,
                               const AutoencoderConfig& cfg, const std::optional<TripletConfig>& tcfg,
                               const Taxonomy* taxonomy, FitReport* report) {
  cfg.validate();
  if (tcfg) {
    tcfg->validate();
    if (taxonomy == nullptr) throw ConfigError("triplet loss needs a taxonomy");
  }
  const auto& vocab = sources->shared_vocabulary();
  if (vocab.empty()) throw InsufficientDataError("meta: the sources share no vocabulary");

  std::vector<std::size_t> dims;
  for (const auto& s : sources->sources()) dims.push_back(s.dim);
  AutoencoderModel model(mode, dims, cfg.meta_dim);
  std::mt19937_64 rng(cfg.seed);
  model.initialize(rng);

  std::vector<std::vector<Vector>> inputs;
  inputs.reserve(vocab.size());
  for (const auto& w : vocab) {
    bool all_miss = false;
    inputs.push_back(source_inputs(*sources, w, {}, all_miss));
  }

  auto vocab_index = [&](const std::string& w) {
    return static_cast<std::size_t>(std::lower_bound(vocab.begin(), vocab.end(), w) - vocab.begin());
  };
  std::normal_distribution<double> noise(0.0, tcfg ? tcfg->noise_sigma : 0.0);
  auto draw_triplets = [&](std::size_t anchor, std::mt19937_64& r, std::vector<TripletIndex>& out) {
    for (auto& t : sample_triplets(*taxonomy, vocab, vocab[anchor], *tcfg, r)) {
      TripletIndex ti{anchor, std::nullopt, Vector(), vocab_index(t.negative)};
      if (t.positive) {
        ti.positive = vocab_index(*t.positive);
      } else {
        ti.noise.resize(static_cast<Idx>(model.meta_dim()));
        for (Idx d = 0; d < ti.noise.size(); ++d) ti.noise[d] = noise(r);
      }
      out.push_back(std::move(ti));
    }
  };

  std::vector<std::size_t> all(vocab.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<TripletIndex> eval_triplets;
  if (tcfg) {
    std::mt19937_64 eval_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    for (auto a : all) draw_triplets(a, eval_rng, eval_triplets);
  }
  FitReport local;
  local.initial_loss = autoencoder_loss(model, inputs, all, eval_triplets, tcfg).loss;

  std::vector<std::size_t> order = all;
  std::vector<TripletIndex> batch_triplets;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      std::span<const std::size_t> batch(order.data() + start, std::min(cfg.batch, order.size() - start));
      batch_triplets.clear();
      if (tcfg) {
        for (auto a : batch) draw_triplets(a, rng, batch_triplets);
      }
      auto lg = autoencoder_loss(model, inputs, batch, batch_triplets, tcfg);
      model.params() -= cfg.step * lg.grad;
      epoch_loss += lg.loss;
      ++batches;
    }
    local.epoch_loss.push_back(epoch_loss / static_cast<double>(batches));
  }
  local.final_loss = autoencoder_loss(model, inputs, all, eval_triplets, tcfg).loss;
  if (report != nullptr) *report = std::move(local);
  return MetaSpace::autoencoder(std::move(sources), std::move(model));
}

void save_meta_space(const std::filesystem::path& path, const MetaSpace& ms) {
  for (const auto& s : ms.sources().sources()) {
    if (!s.spec) throw ConfigError("source '" + s.name + "' has no file manifest to save");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write meta space " + path.string());
  out << ms.to_json().dump() << '\n';
}

MetaSpace load_meta_space(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open meta space " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    std::vector<Source> srcs;
    for (const auto& e : j.at("sources")) srcs.push_back(open_source(SourceSpec::from_json(e.at("spec"))));
    auto set = std::make_shared<const SourceSet>(std::move(srcs));
    return MetaSpace::from_json(j, std::move(set));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("meta space: ") + e.what());
  }
}

}  // namespace taxorank
