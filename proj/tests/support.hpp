#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "ovsg/embedding.hpp"
#include "ovsg/matching.hpp"
#include "ovsg/query.hpp"
#include "ovsg/scene_graph.hpp"
#include "ovsg/scene_io.hpp"
#include "ovsg/spatial.hpp"

namespace ovsg::testing {

inline const std::filesystem::path kFixtures = OVSG_TEST_FIXTURES;

inline const Embedder& stub_embedder() {
  static const Embedder e{EmbedderOptions{}};
  return e;
}

inline const SpatialVocabulary& vocabulary() {
  static const SpatialVocabulary v = load_spatial_vocabulary(default_vocabulary_path());
  return v;
}

inline QueryContext stub_context() { return {&stub_embedder(), &vocabulary()}; }

// Box from center and half-extents.
inline Pose3D box(double cx, double cy, double cz, double hx, double hy, double hz) {
  return Pose3D::from_center_extent(Eigen::Vector3d(cx, cy, cz), Eigen::Vector3d(hx, hy, hz));
}

inline SceneNode object(const std::string& id, const std::string& label, const Pose3D& pose,
                        const Embedder& e = stub_embedder()) {
  return SceneNode{id, NodeKind::Object, e.embed(Space::Object, label), label, pose, std::nullopt};
}

inline SceneNode named(const std::string& id, NodeKind kind, const std::string& name,
                       std::optional<Pose3D> pose = std::nullopt,
                       const Embedder& e = stub_embedder()) {
  return SceneNode{id, kind, e.embed(Space::Name, name), name, pose, std::nullopt};
}

inline Relationship abstract_rel(const std::string& label, const Embedder& e = stub_embedder()) {
  return Relationship::abstract(label, e.embed(Space::Abstract, label));
}

inline Relationship spatial_request(const std::string& phrase) {
  return Relationship::requested(vocabulary().resolve(phrase, nullptr));
}

inline QueryNode query_node(const std::string& name, NodeKind kind,
                            const Embedder& e = stub_embedder()) {
  return QueryNode{name, kind, e.embed(node_space(kind), name)};
}

inline FeatureVec unit(Space space, std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return FeatureVec(space, v);
}

// Small-vocabulary random instances for oracle and property tests. Features
// come from a low-dimensional random table so distances spread over [0, 2].
struct Pools {
  std::vector<std::string> objects{"cup", "mug", "bottle", "plate", "book"};
  std::vector<std::string> agents{"tom", "ann"};
  std::vector<std::string> regions{"kitchen", "office"};
  std::vector<std::string> abstracts{"like", "own", "use"};
};

inline Embedder random_embedder(std::mt19937_64& rng, int dim = 4) {
  std::normal_distribution<double> g;
  auto table = [&](Space space, const std::vector<std::string>& words) {
    EmbeddingTable t{space, dim, {}, {}};
    for (const auto& w : words) {
      Eigen::VectorXd v(dim);
      for (int i = 0; i < dim; ++i) v[i] = g(rng);
      t.add(w, v);
    }
    return t;
  };
  const Pools p;
  EmbedderOptions opts;
  opts.stub_enabled = false;
  Embedder e(opts);
  e.set_table(table(Space::Object, p.objects));
  std::vector<std::string> names = p.agents;
  names.insert(names.end(), p.regions.begin(), p.regions.end());
  e.set_table(table(Space::Name, names));
  e.set_table(table(Space::Abstract, p.abstracts));
  return e;
}

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

inline SceneGraph random_scene(std::mt19937_64& rng, std::size_t max_nodes, const Embedder& e) {
  const Pools p;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = std::uniform_int_distribution<std::size_t>(0, max_nodes)(rng);
  std::vector<SceneNode> nodes;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "n" + std::to_string(i / 10) + std::to_string(i % 10);
    const double roll = u(rng);
    if (roll < 0.7) {
      nodes.push_back(object(id, pick(rng, p.objects),
                             box(3 * u(rng), 3 * u(rng), u(rng), 0.1 + 0.6 * u(rng),
                                 0.1 + 0.6 * u(rng), 0.1 + 0.6 * u(rng)),
                             e));
    } else if (roll < 0.85) {
      nodes.push_back(named(id, NodeKind::Agent, pick(rng, p.agents), std::nullopt, e));
    } else {
      nodes.push_back(named(id, NodeKind::Region, pick(rng, p.regions),
                            box(1.5 * u(rng) + 0.75, 1.5 * u(rng) + 0.75, 1.0, 1.5 + 2 * u(rng),
                                1.5 + 2 * u(rng), 2.5),
                            e));
    }
  }
  std::vector<RelationEdge> edges;
  for (const auto& a : nodes) {
    for (const auto& b : nodes) {
      if (a.id == b.id || u(rng) > 0.15) continue;
      edges.push_back(RelationEdge{a.id, b.id, {abstract_rel(pick(rng, p.abstracts), e)}});
    }
  }
  SceneGraph base("random", nodes, edges);
  for (auto& d : derive_spatial_edges(base)) edges.push_back(std::move(d));
  return SceneGraph("random", std::move(nodes), std::move(edges));
}

inline QueryGraph random_query(std::mt19937_64& rng, std::size_t max_leaves, const Embedder& e) {
  const Pools p;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto random_node = [&] {
    const double roll = u(rng);
    if (roll < 0.7) return query_node(pick(rng, p.objects), NodeKind::Object, e);
    if (roll < 0.85) return query_node(pick(rng, p.agents), NodeKind::Agent, e);
    return query_node(pick(rng, p.regions), NodeKind::Region, e);
  };
  std::vector<std::string> phrases;
  for (const auto& [phrase, set] : vocabulary().descriptions()) phrases.push_back(phrase);

  QueryGraph q{random_node(), {}, {}, {}};
  const std::size_t leaves = std::uniform_int_distribution<std::size_t>(0, max_leaves)(rng);
  for (std::size_t k = 0; k < leaves; ++k) {
    q.leaves.push_back(random_node());
    const std::size_t rels = u(rng) < 0.8 ? 1 : 2;
    for (std::size_t r = 0; r < rels; ++r) {
      const Direction dir = u(rng) < 0.5 ? Direction::CenterToLeaf : Direction::LeafToCenter;
      Relationship rel = u(rng) < 0.6 ? spatial_request(pick(rng, phrases))
                                      : abstract_rel(pick(rng, p.abstracts), e);
      q.leaf_edges.push_back(LeafEdge{k, dir, std::move(rel)});
    }
  }
  return q;
}

// K regions, each with a landmark, an agent and one cup, bottle and book on
// the landmark. Item classes repeat across regions; landmarks, agents and
// region names are unique, and same-class items are never near each other.
inline std::string distractor_scene_json(int regions = 5) {
  static const char* kRegion[] = {"kitchen", "office", "garage", "bedroom", "laboratory",
                                  "hallway", "studio", "pantry"};
  static const char* kLandmark[] = {"dining table", "desk",        "workbench", "dresser",
                                    "lab bench",    "hall console", "easel",     "shelf"};
  static const char* kAgent[] = {"tom", "ann", "lee", "sam", "kim", "joe", "eve", "max"};
  static const char* kItems[] = {"cup", "bottle", "book"};
  using nlohmann::json;
  auto bbox = [](double cx, double cy, double cz, double ex, double ey, double ez) {
    return json{{"min", {cx - ex / 2, cy - ey / 2, cz - ez / 2}},
                {"max", {cx + ex / 2, cy + ey / 2, cz + ez / 2}}};
  };
  json objects = json::array(), agents = json::array(), regs = json::array(),
       rels = json::array();
  int points = 0;
  for (int r = 0; r < regions; ++r) {
    const double x0 = 10.0 * r;
    const std::string rid = "r" + std::to_string(r);
    regs.push_back({{"id", rid}, {"name", kRegion[r]}, {"bbox", bbox(x0 + 4, 4, 1.5, 8, 8, 3)}});
    objects.push_back({{"id", rid + "_landmark"},
                       {"label", kLandmark[r]},
                       {"bbox", bbox(x0 + 4, 4, 0.4, 3.2, 1.2, 0.8)}});
    agents.push_back({{"id", rid + "_agent"}, {"name", kAgent[r]}});
    for (int i = 0; i < 3; ++i) {
      const std::string id = rid + "_" + kItems[i];
      std::vector<int> idx;
      for (int k = 0; k < 20; ++k) idx.push_back(points++);
      objects.push_back({{"id", id},
                         {"label", kItems[i]},
                         {"bbox", bbox(x0 + 2.8 + 1.2 * i, 4, 0.86, 0.1, 0.1, 0.12)},
                         {"point_indices", idx}});
      rels.push_back({{"src", rid + "_agent"}, {"dst", id}, {"label", "likes"}});
    }
  }
  return json{{"scene_id", "distractors"},
              {"objects", objects},
              {"agents", agents},
              {"regions", regs},
              {"abstract_relations", rels}}
      .dump(1);
}

}  // namespace ovsg::testing
