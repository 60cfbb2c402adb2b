#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "taxorank/cli.hpp"
#include "taxorank/dataset.hpp"
#include "taxorank/errors.hpp"
#include "taxorank/evaluation.hpp"
#include "taxorank/geometry.hpp"
#include "taxorank/graph_embeddings.hpp"
#include "taxorank/meta.hpp"
#include "taxorank/ranker.hpp"
#include "taxorank/space.hpp"
#include "taxorank/taxonomy.hpp"
#include "taxorank/vectors.hpp"

namespace py = pybind11;
using namespace taxorank;

namespace {

using Scored = std::vector<std::pair<std::string, double>>;

Scored to_pairs(const std::vector<ScoredId>& xs) {
  Scored out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.emplace_back(x.id, x.score);
  return out;
}

}  // namespace

PYBIND11_MODULE(_taxorank, m) {
  m.doc() = "Taxonomy enrichment: candidate generation, ranking and evaluation.";

  auto base = py::register_exception<Error>(m, "TaxorankError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<CycleError>(m, "CycleError", base.ptr());
  py::register_exception<DanglingEdgeError>(m, "DanglingEdgeError", base.ptr());
  py::register_exception<UnknownSynsetError>(m, "UnknownSynsetError", base.ptr());
  py::register_exception<ZeroQueryError>(m, "ZeroQueryError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<EmptyDatasetError>(m, "EmptyDatasetError", base.ptr());
  py::register_exception<EmptyGoldError>(m, "EmptyGoldError", base.ptr());
  py::register_exception<DuplicatePredictionError>(m, "DuplicatePredictionError", base.ptr());
  py::register_exception<InsufficientDataError>(m, "InsufficientDataError", base.ptr());
  py::register_exception<DegenerateDataError>(m, "DegenerateDataError", base.ptr());

  py::class_<Synset>(m, "Synset")
      .def(py::init([](std::string id, std::vector<std::string> words, std::vector<std::string> hypernyms,
                       const std::string& pos) {
             return Synset{std::move(id), parse_pos(pos), std::move(words), std::move(hypernyms)};
           }),
           py::arg("id"), py::arg("words"), py::arg("hypernyms") = std::vector<std::string>{},
           py::arg("pos") = "n")
      .def_readonly("id", &Synset::id)
      .def_readonly("words", &Synset::words)
      .def_readonly("hypernyms", &Synset::hypernym_ids)
      .def_property_readonly("pos", [](const Synset& s) { return std::string(pos_tag(s.pos)); })
      .def("__repr__", [](const Synset& s) { return synset_to_json_line(s); });

  py::class_<Taxonomy>(m, "Taxonomy")
      .def(py::init(&Taxonomy::from_synsets), py::arg("synsets"))
      .def("__len__", &Taxonomy::size)
      .def("__contains__", &Taxonomy::contains)
      .def("__getitem__", &Taxonomy::at, py::return_value_policy::copy)
      .def("__eq__", &Taxonomy::operator==)
      .def("ids", &Taxonomy::ids)
      .def("edge_count", &Taxonomy::edge_count)
      .def("synsets_of", [](const Taxonomy& t, const std::string& lemma) {
        auto s = t.synsets_of(lemma);
        return std::vector<std::string>(s.begin(), s.end());
      })
      .def("hypernyms", &Taxonomy::hypernyms, py::arg("id"), py::arg("max_order") = 2)
      .def("hyponyms", &Taxonomy::hyponyms, py::arg("id"))
      .def("connected_components", &Taxonomy::connected_components, py::arg("ids"))
      .def("topological_order", &Taxonomy::topological_order)
      .def(
          "attach",
          [](const Taxonomy& t, const std::string& lemma, const std::vector<std::string>& parents) {
            auto a = t.attach(lemma, parents);
            return py::make_tuple(std::move(a.taxonomy), a.id);
          },
          py::arg("lemma"), py::arg("hypernym_ids"))
      .def("to_jsonl", [](const Taxonomy& t) {
        std::ostringstream out;
        write_taxonomy(out, t);
        return out.str();
      });
  m.def("load_taxonomy", &load_taxonomy, py::arg("path"));
  m.def("save_taxonomy", &save_taxonomy, py::arg("path"), py::arg("taxonomy"));
  m.def("read_taxonomy", [](const std::string& text) {
    std::istringstream in(text);
    return read_taxonomy(in);
  });

  m.def(
      "diff_versions",
      [](const Taxonomy& old_t, const Taxonomy& new_t, std::size_t min_length, bool substring, bool multiword) {
        FilterConfig f{min_length, substring, multiword};
        std::vector<std::pair<std::string, SynsetIdSet>> out;
        for (auto& e : diff_versions(old_t, new_t, f).entries) out.emplace_back(e.word, e.gold_ids);
        return out;
      },
      py::arg("old"), py::arg("new"), py::arg("min_length") = 0, py::arg("drop_substring") = false,
      py::arg("drop_multiword") = false);

  py::class_<VectorStore, std::shared_ptr<VectorStore>>(m, "VectorStore")
      .def(py::init<std::size_t>(), py::arg("dim"))
      .def_property_readonly("dim", &VectorStore::dim)
      .def("__len__", &VectorStore::size)
      .def("__contains__", &VectorStore::contains)
      .def("add", &VectorStore::add, py::arg("token"), py::arg("vector"))
      .def("tokens", &VectorStore::tokens)
      .def("word_vector", [](const VectorStore& s, const std::string& t) {
        auto l = s.word_vector(t);
        return py::make_tuple(l.vec, l.miss);
      })
      .def("phrase_vector", [](const VectorStore& s, const std::string& t) {
        auto l = s.phrase_vector(t);
        return py::make_tuple(l.vec, l.miss);
      });
  m.def(
      "load_vectors", [](const std::filesystem::path& p) { return std::make_shared<VectorStore>(load_vectors(p)); },
      py::arg("path"));

  py::class_<Space>(m, "Space")
      .def_property_readonly("kind", [](const Space& s) { return std::string(s.kind()); })
      .def("query_vector", &Space::query_vector, py::arg("word"), py::arg("mask") = SynsetIdSet{});
  py::class_<WordSpace, Space>(m, "WordSpace")
      .def(py::init([](std::shared_ptr<VectorStore> store, const Taxonomy& t) {
             return std::make_unique<WordSpace>(std::move(store), t);
           }),
           py::arg("store"), py::arg("taxonomy"));
  py::class_<MetaEmbeddingSpace, Space>(m, "MetaEmbeddingSpace")
      .def(py::init([](const std::filesystem::path& manifest, const Taxonomy& t) {
             return std::make_unique<MetaEmbeddingSpace>(std::make_shared<const MetaSpace>(load_meta_space(manifest)),
                                                         t);
           }),
           py::arg("manifest"), py::arg("taxonomy"));

  m.def(
      "generate_candidates",
      [](const std::string& query, const Space& space, const Taxonomy& t, std::size_t k_assoc,
         const SynsetIdSet& mask) {
        std::vector<std::pair<std::string, std::vector<std::tuple<std::string, int, double>>>> out;
        for (const auto& c : generate_candidates(query, space, t, k_assoc, mask).candidates) {
          std::vector<std::tuple<std::string, int, double>> prov;
          for (const auto& p : c.provenance) prov.emplace_back(p.associate, p.level, p.similarity);
          out.emplace_back(c.id, std::move(prov));
        }
        return out;
      },
      py::arg("query"), py::arg("space"), py::arg("taxonomy"), py::arg("k_assoc") = 10,
      py::arg("mask") = SynsetIdSet{});
  m.def("feature_schema", &feature_schema);

  py::class_<Ranker>(m, "Ranker")
      .def_readonly("schema", &Ranker::schema)
      .def_readonly("weights", &Ranker::weights)
      .def_readonly("bias", &Ranker::bias)
      .def_readonly("mean", &Ranker::mean)
      .def_readonly("std", &Ranker::std)
      .def_readonly("l2", &Ranker::l2)
      .def_readonly("cv_loss", &Ranker::cv_loss);
  m.def("load_ranker", &load_ranker, py::arg("path"));
  m.def("save_ranker", &save_ranker, py::arg("path"), py::arg("ranker"));
  m.def(
      "train_ranker",
      [](const Taxonomy& t, const Space& space, std::size_t n_pseudo, std::size_t k_assoc, std::uint64_t seed,
         unsigned threads) {
        TrainingConfig tc{n_pseudo, k_assoc, seed, threads};
        RankerConfig rc;
        rc.seed = seed;
        py::gil_scoped_release release;
        return train_ranker(build_training_set(t, space, {}, tc), rc);
      },
      py::arg("taxonomy"), py::arg("space"), py::arg("n_pseudo") = 1000, py::arg("k_assoc") = 10,
      py::arg("seed") = 1, py::arg("threads") = 1);
  m.def(
      "predict",
      [](const std::string& word, const Space& space, const Taxonomy& t, const Ranker& r, std::size_t k,
         std::size_t k_assoc) { return to_pairs(predict(word, space, t, r, {}, k, k_assoc)); },
      py::arg("word"), py::arg("space"), py::arg("taxonomy"), py::arg("ranker"), py::arg("k") = 10,
      py::arg("k_assoc") = 10);

  m.def(
      "average_precision_components",
      [](const std::vector<std::string>& preds, const SynsetIdSet& gold, const Taxonomy& t, std::size_t k) {
        return average_precision_components(preds, gold, t, k);
      },
      py::arg("preds"), py::arg("gold"), py::arg("taxonomy"), py::arg("k") = 10);
  m.def(
      "map_score",
      [](const std::vector<std::pair<std::vector<std::string>, SynsetIdSet>>& queries, const Taxonomy& t,
         std::size_t k) {
        std::vector<QueryOutcome> qs;
        for (const auto& [p, g] : queries) qs.push_back({p, g});
        return map_score(qs, t, k);
      },
      py::arg("queries"), py::arg("taxonomy"), py::arg("k") = 10);
  m.def(
      "precision_at_k",
      [](const std::vector<std::string>& preds, const SynsetIdSet& gold, std::size_t k) {
        return precision_at_k(preds, gold, k);
      },
      py::arg("preds"), py::arg("gold"), py::arg("k"));
  m.def(
      "bootstrap_std",
      [](const std::vector<double>& v, double fraction, int reps, std::uint64_t seed) {
        return bootstrap_std(v, fraction, reps, seed);
      },
      py::arg("values"), py::arg("fraction") = 0.8, py::arg("reps") = 30, py::arg("seed") = 1);

  m.def("cosine", &cosine, py::arg("u"), py::arg("v"));
  m.def("poincare_distance", &poincare_distance, py::arg("u"), py::arg("v"));
  m.def(
      "einstein_midpoint", [](const std::vector<Vector>& pts) { return einstein_midpoint(pts); }, py::arg("points"));
  m.def("katz_closed_form", &katz_closed_form, py::arg("adjacency"), py::arg("beta"));
  m.def(
      "katz_series", [](const Matrix& a, double beta, int terms) { return katz_series(a, beta, terms); },
      py::arg("adjacency"), py::arg("beta"), py::arg("terms") = 10);
  m.def("directed_adjacency", &directed_adjacency, py::arg("taxonomy"));

  py::class_<TripletConfig>(m, "TripletConfig")
      .def(py::init<>())
      .def_readwrite("k", &TripletConfig::k)
      .def_readwrite("margin", &TripletConfig::margin)
      .def_readwrite("alpha", &TripletConfig::alpha)
      .def_readwrite("noise_sigma", &TripletConfig::noise_sigma);
  m.def("triplet_loss", &triplet_loss, py::arg("d_ap"), py::arg("d_an"), py::arg("margin") = 0.1);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
