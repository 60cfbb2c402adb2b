#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "taxorank/errors.hpp"
#include "taxorank/graph_embeddings.hpp"

namespace taxorank {

void Node2VecConfig::validate() const {
  if (dim <= 0 || walk_length <= 0 || num_walks <= 0 || window <= 0 || negatives < 0 ||
      epochs <= 0 || threads == 0) {
    throw ConfigError("node2vec: counts must be positive");
  }
  if (!(p > 0) || !(q > 0) || !(lr_start > 0) || !(lr_end > 0)) {
    throw ConfigError("node2vec: p, q and learning rates must be positive");
  }
}

std::vector<std::pair<std::size_t, double>> node2vec_transition(
    const std::vector<std::vector<std::size_t>>& adj, std::size_t prev, std::size_t cur, double p,
    double q) {
  const auto& prev_nbrs = adj[prev];
  std::vector<std::pair<std::size_t, double>> out;
  double total = 0.0;
  for (auto next : adj[cur]) {
    double w;
    if (next == prev) {
      w = 1.0 / p;
    } else if (std::ranges::binary_search(prev_nbrs, next)) {
      w = 1.0;
    } else {
      w = 1.0 / q;
    }
    out.emplace_back(next, w);
    total += w;
  }
  for (auto& [_, w] : out) w /= total;
  return out;
}

namespace {

std::vector<std::size_t> one_walk(const std::vector<std::vector<std::size_t>>& adj, std::size_t start,
                                  const Node2VecConfig& cfg, std::mt19937_64& rng) {
  std::vector<std::size_t> walk{start};
  walk.reserve(static_cast<std::size_t>(cfg.walk_length));
  while (walk.size() < static_cast<std::size_t>(cfg.walk_length)) {
    auto cur = walk.back();
    const auto& nbrs = adj[cur];
    if (nbrs.empty()) break;
    if (walk.size() == 1) {
      walk.push_back(nbrs[std::uniform_int_distribution<std::size_t>(0, nbrs.size() - 1)(rng)]);
      continue;
    }
    auto probs = node2vec_transition(adj, walk[walk.size() - 2], cur, cfg.p, cfg.q);
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    std::size_t pick = probs.back().first;
    for (const auto& [next, prob] : probs) {
      if (u < prob) {
        pick = next;
        break;
      }
      u -= prob;
    }
    walk.push_back(pick);
  }
  return walk;
}

}  // namespace

std::vector<std::vector<std::size_t>> node2vec_walks(const std::vector<std::vector<std::size_t>>& adj,
                                                     const Node2VecConfig& cfg) {
  cfg.validate();
  const std::size_t n = adj.size();
  const auto walks_per_node = static_cast<std::size_t>(cfg.num_walks);
  // per_node[i][r] is the r-th walk started at node i.
  std::vector<std::vector<std::vector<std::size_t>>> per_node(n);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      std::mt19937_64 rng(cfg.seed ^ static_cast<std::uint64_t>(i));
      per_node[i].reserve(walks_per_node);
      for (std::size_t r = 0; r < walks_per_node; ++r) per_node[i].push_back(one_walk(adj, i, cfg, rng));
    }
  };
  const std::size_t workers = std::min<std::size_t>(cfg.threads, std::max<std::size_t>(n, 1));
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      std::size_t begin = w * chunk;
      std::size_t end = std::min(n, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
  }
  // Round-major corpus with node order shuffled per round.
  std::mt19937_64 order_rng(cfg.seed);
  std::vector<std::size_t> order(n);
  std::vector<std::vector<std::size_t>> corpus;
  corpus.reserve(n * walks_per_node);
  for (std::size_t r = 0; r < walks_per_node; ++r) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), order_rng);
    for (auto i : order) corpus.push_back(std::move(per_node[i][r]));
  }
  return corpus;
}

NodeEmbeddings train_node2vec(const Taxonomy& t, const Node2VecConfig& cfg) {
  cfg.validate();
  auto adj = undirected_adjacency(t);
  auto corpus = node2vec_walks(adj, cfg);
  const auto n = static_cast<Eigen::Index>(adj.size());
  const auto dim = static_cast<Eigen::Index>(cfg.dim);

  std::mt19937_64 rng(cfg.seed + 0x9e3779b97f4a7c15ULL);
  // Column-major storage: one node vector per column.
  Matrix input(dim, n);
  Matrix output = Matrix::Zero(dim, n);
  std::uniform_real_distribution<double> init(-0.5 / cfg.dim, 0.5 / cfg.dim);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < dim; ++i) input(i, j) = init(rng);
  }

  std::vector<double> counts(adj.size(), 0.0);
  std::size_t total_tokens = 0;
  for (const auto& walk : corpus) {
    for (auto v : walk) counts[v] += 1.0;
    total_tokens += walk.size();
  }
  for (auto& c : counts) c = std::pow(c, 0.75);
  std::discrete_distribution<std::size_t> noise(counts.begin(), counts.end());
  std::uniform_int_distribution<int> shrink(0, cfg.window - 1);

  const double total_work = static_cast<double>(total_tokens) * cfg.epochs;
  double processed = 0.0;
  Vector grad_in(dim);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& walk : corpus) {
      for (std::size_t pos = 0; pos < walk.size(); ++pos, processed += 1.0) {
        double lr = std::max(cfg.lr_end, cfg.lr_start - (cfg.lr_start - cfg.lr_end) * processed / total_work);
        const auto center = static_cast<Eigen::Index>(walk[pos]);
        const int reach = cfg.window - shrink(rng);
        const std::size_t lo = pos >= static_cast<std::size_t>(reach) ? pos - static_cast<std::size_t>(reach) : 0;
        const std::size_t hi = std::min(walk.size() - 1, pos + static_cast<std::size_t>(reach));
        for (std::size_t c = lo; c <= hi; ++c) {
          if (c == pos) continue;
          const auto context = static_cast<Eigen::Index>(walk[c]);
          grad_in.setZero();
          for (int s = 0; s <= cfg.negatives; ++s) {
            Eigen::Index target;
            double label;
            if (s == 0) {
              target = center;
              label = 1.0;
            } else {
              target = static_cast<Eigen::Index>(noise(rng));
              if (target == center) continue;
              label = 0.0;
            }
            double score = input.col(context).dot(output.col(target));
            double pred = 1.0 / (1.0 + std::exp(-std::clamp(score, -30.0, 30.0)));
            double g = (label - pred) * lr;
            grad_in += g * output.col(target);
            output.col(target) += g * input.col(context);
          }
          input.col(context) += grad_in;
        }
      }
    }
  }

  NodeEmbeddings emb;
  emb.method = GraphMethod::node2vec;
  emb.index = SynsetIndex(t.ids(), input.transpose(), Geometry::euclidean);
  return emb;
}

}  // namespace taxorank
