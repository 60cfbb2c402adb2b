#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "taxorank/geometry.hpp"
#include "taxorank/linalg.hpp"
#include "taxorank/taxonomy.hpp"
#include "taxorank/vectors.hpp"

namespace taxorank {

enum class GraphMethod { node2vec, poincare, tadw, hope, gcn };

std::string_view method_name(GraphMethod m);
GraphMethod parse_method(std::string_view name);

/// One vector per synset, tagged with the geometry it lives in and the
/// method that produced it. Rows are aligned to sorted synset ids.
struct NodeEmbeddings {
  GraphMethod method = GraphMethod::node2vec;
  SynsetIndex index;

  Geometry geometry() const { return index.geometry(); }
  std::size_t dim() const { return index.dim(); }
  Vector vector(std::string_view id) const { return index.row(id); }
};

/// word2vec text file with synset ids as tokens plus a "<path>.meta" sidecar
/// holding "geometry method".
void save_node_embeddings(const std::filesystem::path& path, const NodeEmbeddings& emb);
NodeEmbeddings load_node_embeddings(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// node2vec

struct Node2VecConfig {
  int dim = 300;
  int walk_length = 30;
  int num_walks = 200;
  double p = 1.0;
  double q = 1.0;
  int window = 10;
  int negatives = 5;
  int epochs = 5;
  double lr_start = 0.025;
  double lr_end = 1e-4;
  std::uint64_t seed = 1;
  unsigned threads = 1;

  void validate() const;
};

/// Undirected neighbour lists over taxonomy indices (sorted-id order).
std::vector<std::vector<std::size_t>> undirected_adjacency(const Taxonomy& t);

/// Second-order transition distribution when the walk sits at `cur` having
/// arrived from `prev`: weight 1/p to return, 1 to stay at distance one from
/// prev, 1/q to move away. Pairs are (neighbour, probability).
std::vector<std::pair<std::size_t, double>> node2vec_transition(
    const std::vector<std::vector<std::size_t>>& adj, std::size_t prev, std::size_t cur, double p,
    double q);

/// All walks of the corpus; walk generation for node i uses seed ^ i.
std::vector<std::vector<std::size_t>> node2vec_walks(const std::vector<std::vector<std::size_t>>& adj,
                                                     const Node2VecConfig& cfg);

NodeEmbeddings train_node2vec(const Taxonomy& t, const Node2VecConfig& cfg);

// ---------------------------------------------------------------------------
// Poincare ball

struct PoincareConfig {
  int dim = 10;
  int epochs = 50;
  int negatives = 10;
  double lr = 0.01;
  int burn_in = 10;
  double burn_in_factor = 0.1;
  double eps = 1e-5;
  double init_range = 1e-3;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Called after every epoch with the current embedding matrix.
using EpochObserver = std::function<void(int epoch, const Matrix& rows)>;

NodeEmbeddings train_poincare(const Taxonomy& t, const PoincareConfig& cfg,
                              const EpochObserver& observer = {});

// ---------------------------------------------------------------------------
// TADW

struct TadwConfig {
  int dim = 80;
  double lambda = 0.2;
  int iterations = 20;
  int text_dim = 200;
  std::uint64_t seed = 1;

  void validate() const;
};

/// (S + S^2) / 2 with S the row-normalised undirected adjacency matrix.
Matrix tadw_proximity(const Taxonomy& t);

/// Text matrix T (text_dim x |V|): SVD-reduced features with unit columns.
Matrix tadw_text_features(const SynsetIndex& features, const Taxonomy& t, int text_dim);

/// ||M - W^T H T||^2 + lambda/2 (||W||^2 + ||H||^2)
double tadw_objective(const Matrix& m, const Matrix& w, const Matrix& h, const Matrix& text,
                      double lambda);

struct TadwResult {
  NodeEmbeddings embeddings;
  Matrix w;
  Matrix h;
  /// Objective after initialisation and after every half-step.
  std::vector<double> objective;
};

TadwResult train_tadw_detailed(const Taxonomy& t, const SynsetIndex& text_features,
                               const TadwConfig& cfg);
NodeEmbeddings train_tadw(const Taxonomy& t, const SynsetIndex& text_features, const TadwConfig& cfg);

// ---------------------------------------------------------------------------
// HOPE

struct HopeConfig {
  int dim = 128;
  double beta_scale = 0.5;
  int power_iterations = 100;
  int series_terms = 10;
  std::size_t dense_limit = 5000;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Directed child -> parent adjacency in sorted-id order.
Matrix directed_adjacency(const Taxonomy& t);
/// Power-iteration spectral radius estimate, floored at 1.
double spectral_radius_estimate(const Matrix& a, int iterations);
/// (I - beta A)^{-1} beta A
Matrix katz_closed_form(const Matrix& a, double beta);
/// sum_{l=1..terms} beta^l A^l
Matrix katz_series(const Matrix& a, double beta, int terms);
SparseMatrix katz_series(const SparseMatrix& a, double beta, int terms);

NodeEmbeddings train_hope(const Taxonomy& t, const HopeConfig& cfg);

// ---------------------------------------------------------------------------
// GCN autoencoder

struct GcnConfig {
  int hidden = 128;
  int out = 64;
  int steps = 200;
  double step_size = 0.01;
  double negative_ratio = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct GcnModel {
  Matrix w0;  // features x hidden
  Matrix w1;  // hidden x out

  /// Embedding of a node with no neighbours: relu(x W0) W1.
  Vector embed_isolated(const Vector& features) const;
};

/// D^{-1/2} (A + A^T + I) D^{-1/2}
SparseMatrix gcn_normalized_adjacency(const Taxonomy& t);

/// Node pair with a link label.
struct LabeledPair {
  std::size_t a;
  std::size_t b;
  double label;
};

struct GcnLossGrad {
  double loss = 0.0;
  Matrix grad_w0;
  Matrix grad_w1;
};

/// Encoder Z = A relu(A X W0) W1, logistic inner-product decoder, mean binary
/// cross-entropy over the pairs, with analytic gradients.
Matrix gcn_forward(const SparseMatrix& adj, const Matrix& x, const GcnModel& model);
GcnLossGrad gcn_loss_and_grad(const SparseMatrix& adj, const Matrix& x, const GcnModel& model,
                              const std::vector<LabeledPair>& pairs);

struct GcnResult {
  NodeEmbeddings embeddings;
  GcnModel model;
  std::vector<double> loss;  // one entry per step
};

GcnResult train_gcn(const Taxonomy& t, const SynsetIndex& features, const GcnConfig& cfg);

void save_gcn_model(const std::filesystem::path& path, const GcnModel& model);
GcnModel load_gcn_model(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Out-of-vocabulary projection

inline constexpr std::size_t kOovNeighbours = 5;

/// Places a word that has no node into the embedding space: mean (or Einstein
/// midpoint in the ball) of the embeddings of its five text-nearest synsets,
/// or the isolated-node forward pass when a GCN model is supplied. Synsets in
/// `exclude` are not used as neighbours.
Vector project_oov(std::string_view word, const VectorStore& store, const SynsetIndex& text_index,
                   const NodeEmbeddings& emb, const GcnModel* gcn = nullptr,
                   const std::set<std::string>& exclude = {});

/// Places arbitrary words into a node-embedding space. A lemma with synsets
/// outside `mask` gets the mean (ball midpoint) of those synsets' vectors;
/// anything else goes through project_oov with `mask` excluded.
struct GraphContext {
  std::shared_ptr<const Taxonomy> taxonomy;
  std::shared_ptr<const VectorStore> store;
  std::shared_ptr<const SynsetIndex> text_index;
  std::shared_ptr<const NodeEmbeddings> emb;
  std::shared_ptr<const GcnModel> gcn;

  Lookup lemma_vector(std::string_view word, const SynsetIdSet& mask = {}) const;
};

}  // namespace taxorank
