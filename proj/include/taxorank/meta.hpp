#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "taxorank/geometry.hpp"
#include "taxorank/taxonomy.hpp"
#include "taxorank/vectors.hpp"

namespace taxorank {

enum class MetaMode { concat, svd, caeme, aaeme };

std::string_view meta_mode_name(MetaMode m);
MetaMode parse_meta_mode(std::string_view name);

/// How to reopen a source from disk. Word sources read one vector file;
/// graph sources combine node embeddings with text vectors for projection.
struct SourceSpec {
  std::string name;
  std::string kind = "words";  // "words" or "graph"
  std::filesystem::path vectors;
  std::filesystem::path embeddings;
  std::filesystem::path taxonomy;
  std::filesystem::path gcn_model;

  nlohmann::json to_json() const;
  static SourceSpec from_json(const nlohmann::json& j);
};

struct Source {
  std::string name;
  std::size_t dim = 0;
  /// Resolves a token; `mask` hides synsets from graph sources.
  std::function<Lookup(std::string_view, const SynsetIdSet&)> lookup;
  std::optional<SourceSpec> spec;
};

Source open_source(const SourceSpec& spec);

class SourceSet {
 public:
  /// Keeps the candidate tokens that every source resolves. Needs at least
  /// two sources; an empty candidate list is allowed for encode-only use.
  SourceSet(std::vector<Source> sources, const std::vector<std::string>& candidates = {});

  const std::vector<Source>& sources() const { return sources_; }
  std::size_t size() const { return sources_.size(); }
  std::size_t total_dim() const;
  /// Sorted, normalised tokens covered by all sources.
  const std::vector<std::string>& shared_vocabulary() const { return shared_; }

 private:
  std::vector<Source> sources_;
  std::vector<std::string> shared_;
};

/// Per-source L2-normalised vectors concatenated in source order.
Vector concat_meta(const SourceSet& ss, std::string_view token, const SynsetIdSet& mask = {});

/// concat_meta rows over the shared vocabulary.
Matrix concat_matrix(const SourceSet& ss);

/// ||X - X V V^T||_F^2
double svd_reconstruction_error(const Matrix& x, const Matrix& v);

struct TripletConfig {
  int k = 5;
  double margin = 0.1;
  double alpha = 0.005;
  double noise_sigma = 0.01;

  void validate() const;
};

double triplet_loss(double d_ap, double d_an, double margin);

/// A positive of nullopt means "anchor meta vector plus gaussian noise".
struct Triplet {
  std::string anchor;
  std::optional<std::string> positive;
  std::string negative;
};

/// Co-members of the anchor's synsets plus lemmas of their direct hypernyms
/// and hyponyms, without the anchor itself.
std::set<std::string> related_lemmas(const Taxonomy& t, std::string_view anchor);

/// `vocab` must be sorted. Positives come from the related lemmas present in
/// vocab; negatives from vocab outside the related set.
std::vector<Triplet> sample_triplets(const Taxonomy& t, const std::vector<std::string>& vocab,
                                     const std::string& anchor, const TripletConfig& cfg,
                                     std::mt19937_64& rng);

struct AutoencoderConfig {
  std::size_t meta_dim = 300;  // aaeme only
  int epochs = 50;
  std::size_t batch = 128;
  double step = 0.01;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Affine encoder and decoder per source, stored in one flat parameter
/// vector laid out source by source as [E_i, e_i, D_i, d_i] (column major).
class AutoencoderModel {
 public:
  AutoencoderModel() = default;
  AutoencoderModel(MetaMode mode, std::vector<std::size_t> source_dims, std::size_t aaeme_dim);

  MetaMode mode() const { return mode_; }
  const std::vector<std::size_t>& source_dims() const { return dims_; }
  std::size_t meta_dim() const { return meta_dim_; }
  /// Encoder output size for source i.
  std::size_t code_dim(std::size_t i) const;

  Vector& params() { return params_; }
  const Vector& params() const { return params_; }

  Eigen::Map<const Matrix> encoder_w(std::size_t i) const;
  Eigen::Map<const Vector> encoder_b(std::size_t i) const;
  Eigen::Map<const Matrix> decoder_w(std::size_t i) const;
  Eigen::Map<const Vector> decoder_b(std::size_t i) const;

  /// Start of each block of source i inside params().
  struct Offsets {
    std::size_t enc_w, enc_b, dec_w, dec_b;
  };
  const Offsets& offsets(std::size_t i) const { return offsets_[i]; }

  void initialize(std::mt19937_64& rng);

  /// Unnormalised fused code: concatenation (caeme) or sum (aaeme).
  Vector fuse(const std::vector<Vector>& inputs) const;
  /// Unit-norm meta vector.
  Vector encode(const std::vector<Vector>& inputs) const;
  Vector decode(std::size_t i, const Vector& meta) const;

 private:
  MetaMode mode_ = MetaMode::caeme;
  std::vector<std::size_t> dims_;
  std::size_t meta_dim_ = 0;
  std::vector<Offsets> offsets_;
  Vector params_;
};

struct TripletIndex {
  std::size_t anchor;
  std::optional<std::size_t> positive;
  Vector noise;  // used when positive is empty
  std::size_t negative;
};

struct AutoencoderLoss {
  double loss = 0.0;
  double recon = 0.0;
  double triplet = 0.0;
  Vector grad;
};

/// Mean reconstruction loss over `words` (sum of per-source cosine
/// distances), mixed with the mean triplet loss when `tcfg` is set.
/// `inputs[w][i]` is word w's normalised vector from source i.
AutoencoderLoss autoencoder_loss(const AutoencoderModel& model,
                                 const std::vector<std::vector<Vector>>& inputs,
                                 std::span<const std::size_t> words, std::span<const TripletIndex> triplets,
                                 const std::optional<TripletConfig>& tcfg);

class MetaSpace {
 public:
  static MetaSpace concat(std::shared_ptr<const SourceSet> sources);
  static MetaSpace svd(std::shared_ptr<const SourceSet> sources, Matrix projection);
  static MetaSpace autoencoder(std::shared_ptr<const SourceSet> sources, AutoencoderModel model);

  MetaMode mode() const { return mode_; }
  std::size_t dim() const;
  const SourceSet& sources() const { return *sources_; }
  const Matrix& projection() const { return projection_; }
  const AutoencoderModel& model() const { return model_; }

  /// Throws MissError when every source misses.
  Vector encode(std::string_view token, const SynsetIdSet& mask = {}) const;

  nlohmann::json to_json() const;
  static MetaSpace from_json(const nlohmann::json& j, std::shared_ptr<const SourceSet> sources);

 private:
  MetaMode mode_ = MetaMode::concat;
  std::shared_ptr<const SourceSet> sources_;
  Matrix projection_;
  AutoencoderModel model_;
};

MetaSpace fit_svd_meta(std::shared_ptr<const SourceSet> sources, std::size_t dim);

struct FitReport {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<double> epoch_loss;
};

/// Minibatch gradient descent on the reconstruction (plus triplet) loss.
/// The report's initial and final losses are measured over the whole shared
/// vocabulary with one fixed triplet sample.
MetaSpace fit_autoencoder_meta(std::shared_ptr<const SourceSet> sources, MetaMode mode,
                               const AutoencoderConfig& cfg,
                               const std::optional<TripletConfig>& tcfg = std::nullopt,
                               const Taxonomy* taxonomy = nullptr, FitReport* report = nullptr);

/// JSON with the fitted parameters and a manifest of the sources. Every
/// source must carry a SourceSpec.
void save_meta_space(const std::filesystem::path& path, const MetaSpace& ms);
MetaSpace load_meta_space(const std::filesystem::path& path);

}  // namespace taxorank
