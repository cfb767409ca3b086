#include "ovsg/scene_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ovsg/errors.hpp"

namespace ovsg {

using nlohmann::json;

namespace {

constexpr std::string_view kGraphFormat = "ovsg-graph";
constexpr int kGraphVersion = 1;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Eigen::Vector3d read_vec3(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw ParseError("expected 3 coordinates");
  return {v[0], v[1], v[2]};
}

json write_vec3(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Pose3D read_bbox(const json& j) {
  const Eigen::Vector3d lo = read_vec3(j.at("min"));
  const Eigen::Vector3d hi = read_vec3(j.at("max"));
  const Eigen::Vector3d c = j.contains("center") ? read_vec3(j.at("center")) : Eigen::Vector3d(0.5 * (lo + hi));
  return Pose3D(c, lo, hi);
}

json write_bbox(const Pose3D& p) {
  return json{{"center", write_vec3(p.center)},
              {"min", write_vec3(p.min_corner)},
              {"max", write_vec3(p.max_corner)}};
}

Eigen::VectorXd read_vector(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json write_vector(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

json write_feature(const FeatureVec& f) {
  return json{{"space", std::string(to_string(f.space()))}, {"values", write_vector(f.values())}};
}

FeatureVec read_feature(const json& j) {
  return FeatureVec(parse_space(j.at("space").get<std::string>()), read_vector(j.at("values")));
}

json write_signature(const SpatialSignature& sig) {
  json out = json::object();
  for (SpatialRelation r : kAllSpatialRelations) out[std::string(to_string(r))] = sig[r];
  return out;
}

SpatialSignature read_signature(const json& j) {
  SpatialSignature sig;
  for (const auto& [name, value] : j.items()) sig[parse_spatial_relation(name)] = value.get<double>();
  return sig;
}

SceneGraph build_scene(const json& doc, const Embedder& embedder,
                       const SpatialVocabulary& vocabulary, const SpatialParams& params) {
  std::vector<SceneNode> nodes;
  const int object_dim = embedder.dim(Space::Object);

  for (const auto& o : doc.value("objects", json::array())) {
    const std::string id = o.at("id").get<std::string>();
    const std::string label = o.at("label").get<std::string>();
    if (!o.contains("bbox")) throw ParseError("object '" + id + "' has no pose");
    std::optional<FeatureVec> feature;
    if (o.contains("feature")) {
      Eigen::VectorXd v = read_vector(o.at("feature"));
      if (v.size() != object_dim) {
        throw DimensionMismatch("object '" + id + "' feature has dimension " +
                                std::to_string(v.size()) + ", object space expects " +
                                std::to_string(object_dim));
      }
      feature.emplace(Space::Object, std::move(v));
    } else {
      feature = embedder.embed(Space::Object, label);
    }
    SceneNode n{id, NodeKind::Object, *feature, label, read_bbox(o.at("bbox")), std::nullopt};
    if (o.contains("point_indices")) {
      n.point_indices = o.at("point_indices").get<std::vector<std::uint32_t>>();
    }
    nodes.push_back(std::move(n));
  }

  auto named = [&](const char* key, NodeKind kind, bool pose_required) {
    for (const auto& a : doc.value(key, json::array())) {
      const std::string id = a.at("id").get<std::string>();
      const std::string name = a.at("name").get<std::string>();
      std::optional<Pose3D> pose;
      if (a.contains("bbox")) {
        pose = read_bbox(a.at("bbox"));
      } else if (pose_required) {
        throw ParseError(std::string(to_string(kind)) + " '" + id + "' has no bbox");
      }
      nodes.push_back(
          SceneNode{id, kind, embedder.embed(Space::Name, name), name, pose, std::nullopt});
    }
  };
  named("agents", NodeKind::Agent, false);
  named("regions", NodeKind::Region, true);

  std::vector<RelationEdge> edges;
  for (const auto& r : doc.value("abstract_relations", json::array())) {
    const std::string label = r.at("label").get<std::string>();
    edges.push_back(RelationEdge{r.at("src").get<std::string>(), r.at("dst").get<std::string>(),
                                 {Relationship::abstract(label, embedder.embed(Space::Abstract, label))}});
  }

  std::string scene_id = doc.value("scene_id", std::string());
  if (doc.contains("spatial_relations")) {
    for (const auto& r : doc.at("spatial_relations")) {
      const std::string label = r.at("label").get<std::string>();
      const SpatialDescriptor desc = vocabulary.resolve(label, &embedder);
      edges.push_back(RelationEdge{r.at("src").get<std::string>(), r.at("dst").get<std::string>(),
                                   {Relationship::measured(signature_from(desc.relations), label)}});
    }
    return SceneGraph(std::move(scene_id), std::move(nodes), std::move(edges));
  }

  SceneGraph base(scene_id, nodes, edges);
  for (auto& e : derive_spatial_edges(base, params)) edges.push_back(std::move(e));
  return SceneGraph(std::move(scene_id), std::move(nodes), std::move(edges));
}

}  // namespace

SceneGraph parse_scene(const std::string& json_text, const Embedder& embedder,
                       const SpatialVocabulary& vocabulary, const SpatialParams& params) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed scene file: ") + e.what());
  }
  try {
    return build_scene(doc, embedder, vocabulary, params);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed scene file: ") + e.what());
  }
}

SceneGraph load_scene(const std::filesystem::path& path, const Embedder& embedder,
                      const SpatialVocabulary& vocabulary, const SpatialParams& params) {
  const std::string text = read_file(path);
  try {
    return parse_scene(text, embedder, vocabulary, params);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string serialize_graph(const SceneGraph& graph) {
  json nodes = json::array();
  for (const auto& [id, n] : graph.nodes()) {
    json j{{"id", id}, {"kind", std::string(to_string(n.kind))}, {"feature", write_feature(n.feature)}};
    if (n.label) j["label"] = *n.label;
    if (n.pose) j["bbox"] = write_bbox(*n.pose);
    if (n.point_indices) j["point_indices"] = *n.point_indices;
    nodes.push_back(std::move(j));
  }
  json edges = json::array();
  for (const auto& [key, e] : graph.edges()) {
    json rels = json::array();
    for (const auto& r : e.relationships) {
      json jr{{"kind", std::string(to_string(r.kind))}};
      if (r.label) jr["label"] = *r.label;
      if (r.feature) jr["feature"] = write_feature(*r.feature);
      if (r.signature) jr["signature"] = write_signature(*r.signature);
      rels.push_back(std::move(jr));
    }
    edges.push_back(json{{"src", e.src}, {"dst", e.dst}, {"relationships", std::move(rels)}});
  }
  const json doc{{"format", kGraphFormat},
                 {"version", kGraphVersion},
                 {"scene_id", graph.scene_id()},
                 {"nodes", std::move(nodes)},
                 {"edges", std::move(edges)}};
  return doc.dump(1) + "\n";
}

SceneGraph deserialize_graph(const std::string& json_text) {
  try {
    const json doc = json::parse(json_text);
    if (doc.at("format").get<std::string>() != kGraphFormat) {
      throw ParseError("not a serialized scene graph");
    }
    if (doc.at("version").get<int>() != kGraphVersion) {
      throw ParseError("unsupported graph version");
    }
    std::vector<SceneNode> nodes;
    for (const auto& j : doc.at("nodes")) {
      SceneNode n{j.at("id").get<std::string>(), parse_node_kind(j.at("kind").get<std::string>()),
                  read_feature(j.at("feature")), std::nullopt, std::nullopt, std::nullopt};
      if (j.contains("label")) n.label = j.at("label").get<std::string>();
      if (j.contains("bbox")) n.pose = read_bbox(j.at("bbox"));
      if (j.contains("point_indices")) {
        n.point_indices = j.at("point_indices").get<std::vector<std::uint32_t>>();
      }
      nodes.push_back(std::move(n));
    }
    std::vector<RelationEdge> edges;
    for (const auto& j : doc.at("edges")) {
      RelationEdge e{j.at("src").get<std::string>(), j.at("dst").get<std::string>(), {}};
      for (const auto& jr : j.at("relationships")) {
        Relationship r;
        r.kind = parse_relation_kind(jr.at("kind").get<std::string>());
        if (jr.contains("label")) r.label = jr.at("label").get<std::string>();
        if (jr.contains("feature")) r.feature = read_feature(jr.at("feature"));
        if (jr.contains("signature")) r.signature = read_signature(jr.at("signature"));
        e.relationships.push_back(std::move(r));
      }
      edges.push_back(std::move(e));
    }
    return SceneGraph(doc.value("scene_id", std::string()), std::move(nodes), std::move(edges));
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed graph file: ") + e.what());
  }
}

void save_graph(const SceneGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << serialize_graph(graph);
}

SceneGraph load_graph(const std::filesystem::path& path) {
  try {
    return deserialize_graph(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace ovsg
