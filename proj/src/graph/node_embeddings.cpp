#include <fstream>
#include <sstream>

#include "taxorank/errors.hpp"
#include "taxorank/graph_embeddings.hpp"

namespace taxorank {

namespace {

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  auto p = path;
  p += ".meta";
  return p;
}

}  // namespace

std::string_view method_name(GraphMethod m) {
  switch (m) {
    case GraphMethod::node2vec: return "node2vec";
    case GraphMethod::poincare: return "poincare";
    case GraphMethod::tadw: return "tadw";
    case GraphMethod::hope: return "hope";
    case GraphMethod::gcn: return "gcn";
  }
  return "node2vec";
}

GraphMethod parse_method(std::string_view name) {
  for (auto m : {GraphMethod::node2vec, GraphMethod::poincare, GraphMethod::tadw, GraphMethod::hope,
                 GraphMethod::gcn}) {
    if (method_name(m) == name) return m;
  }
  throw ConfigError("unknown graph embedding method '" + std::string(name) + "'");
}

void save_node_embeddings(const std::filesystem::path& path, const NodeEmbeddings& emb) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write embeddings " + path.string());
    write_vectors(out, emb.index.ids(), emb.index.rows());
  }
  std::ofstream meta(sidecar_path(path), std::ios::binary);
  if (!meta) throw ParseError("cannot write embedding sidecar for " + path.string());
  meta << geometry_name(emb.geometry()) << ' ' << method_name(emb.method) << '\n';
}

NodeEmbeddings load_node_embeddings(const std::filesystem::path& path) {
  std::ifstream meta(sidecar_path(path));
  if (!meta) throw ParseError("missing embedding sidecar " + sidecar_path(path).string());
  std::string geometry, method;
  if (!(meta >> geometry >> method)) throw ParseError("malformed embedding sidecar");

  auto store = load_vectors(path);
  Matrix rows(static_cast<Eigen::Index>(store.size()), static_cast<Eigen::Index>(store.dim()));
  for (std::size_t i = 0; i < store.size(); ++i) {
    rows.row(static_cast<Eigen::Index>(i)) = store.find(store.tokens()[i])->transpose();
  }
  NodeEmbeddings emb;
  emb.method = parse_method(method);
  emb.index = SynsetIndex(store.tokens(), std::move(rows), parse_geometry(geometry));
  if (emb.geometry() == Geometry::poincare) {
    for (Eigen::Index i = 0; i < emb.index.rows().rows(); ++i) {
      if (emb.index.rows().row(i).squaredNorm() >= 1.0) {
        throw OutOfBallError("stored Poincare vector outside the unit ball");
      }
    }
  }
  return emb;
}

std::vector<std::vector<std::size_t>> undirected_adjacency(const Taxonomy& t) {
  auto ids = t.ids();
  std::vector<std::vector<std::size_t>> adj(ids.size());
  auto index_of = [&](const std::string& id) {
    return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (const auto& h : t.at(ids[i]).hypernym_ids) {
      auto j = index_of(h);
      adj[i].push_back(j);
      adj[j].push_back(i);
    }
  }
  for (auto& nbrs : adj) {
    std::ranges::sort(nbrs);
    auto dup = std::ranges::unique(nbrs);
    nbrs.erase(dup.begin(), dup.end());
  }
  return adj;
}

Vector project_oov(std::string_view word, const VectorStore& store, const SynsetIndex& text_index,
                   const NodeEmbeddings& emb, const GcnModel* gcn,
                   const std::set<std::string>& exclude) {
  auto text = store.phrase_vector(word);
  if (text.miss) throw ZeroQueryError("no text vector for '" + std::string(word) + "'");
  if (gcn != nullptr) return gcn->embed_isolated(text.vec);

  auto nearest = text_index.top_k(text.vec, kOovNeighbours, exclude);
  if (nearest.empty()) throw ZeroQueryError("no synsets to project '" + std::string(word) + "' onto");
  std::vector<Vector> points;
  points.reserve(nearest.size());
  for (const auto& n : nearest) points.push_back(emb.vector(n.id));
  if (emb.geometry() == Geometry::poincare) return einstein_midpoint(points);
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(emb.dim()));
  for (const auto& p : points) sum += p;
  return sum / static_cast<double>(points.size());
}

Lookup GraphContext::lemma_vector(std::string_view word, const SynsetIdSet& mask) const {
  const auto key = normalize_lemma(word);
  std::vector<Vector> points;
  if (taxonomy->has_lemma(key)) {
    for (const auto& id : taxonomy->synsets_of(key)) {
      if (!mask.contains(id)) points.push_back(emb->vector(id));
    }
  }
  if (!points.empty()) {
    if (emb->geometry() == Geometry::poincare) return {einstein_midpoint(points), false};
    Vector sum = Vector::Zero(static_cast<Eigen::Index>(emb->dim()));
    for (const auto& p : points) sum += p;
    return {sum / static_cast<double>(points.size()), false};
  }
  try {
    return {project_oov(key, *store, *text_index, *emb, gcn.get(), mask), false};
  } catch (const ZeroQueryError&) {
    return {Vector::Zero(static_cast<Eigen::Index>(emb->dim())), true};
  }
}

}  // namespace taxorank
