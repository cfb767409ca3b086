#include "ovsg/scene_graph.hpp"

#include <algorithm>

#include "ovsg/errors.hpp"

namespace ovsg {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Object:
      return "object";
    case NodeKind::Agent:
      return "agent";
    case NodeKind::Region:
      return "region";
  }
  return "unknown";
}

NodeKind parse_node_kind(std::string_view text) {
  if (text == "object") return NodeKind::Object;
  if (text == "agent") return NodeKind::Agent;
  if (text == "region") return NodeKind::Region;
  throw ParseError("unknown node kind '" + std::string(text) + "'");
}

std::string_view to_string(RelationKind kind) {
  return kind == RelationKind::Spatial ? "spatial" : "abstract";
}

RelationKind parse_relation_kind(std::string_view text) {
  if (text == "spatial") return RelationKind::Spatial;
  if (text == "abstract") return RelationKind::Abstract;
  throw ParseError("unknown relation kind '" + std::string(text) + "'");
}

Space node_space(NodeKind kind) {
  return kind == NodeKind::Object ? Space::Object : Space::Name;
}

Relationship Relationship::abstract(std::string label, FeatureVec feature) {
  Relationship r;
  r.kind = RelationKind::Abstract;
  r.label = std::move(label);
  r.feature = std::move(feature);
  return r;
}

Relationship Relationship::measured(SpatialSignature signature, std::optional<std::string> label) {
  Relationship r;
  r.kind = RelationKind::Spatial;
  r.label = std::move(label);
  r.signature = signature;
  return r;
}

Relationship Relationship::requested(SpatialDescriptor descriptor) {
  Relationship r;
  r.kind = RelationKind::Spatial;
  r.label = descriptor.raw_text;
  r.descriptor = std::move(descriptor);
  return r;
}

void Relationship::validate() const {
  if (kind == RelationKind::Abstract) {
    if (!feature) throw ParseError("abstract relationship without a feature");
    return;
  }
  if (descriptor.has_value() == signature.has_value()) {
    throw ParseError("spatial relationship needs exactly one of descriptor or signature");
  }
  if (signature) {
    for (double m : signature->margins) {
      if (!(m >= 0.0 && m <= 1.0)) throw ParseError("spatial margin outside [0, 1]");
    }
  }
  if (descriptor) validate_relation_set(descriptor->relations, descriptor->raw_text);
}

SceneGraph::SceneGraph(std::string scene_id, std::vector<SceneNode> nodes,
                       std::vector<RelationEdge> edges)
    : scene_id_(std::move(scene_id)) {
  for (auto& n : nodes) {
    if (n.id.empty()) throw ParseError("node with empty id");
    if (n.feature.space() != node_space(n.kind)) {
      throw SpaceMismatch("node '" + n.id + "' carries a feature from space '" +
                          std::string(to_string(n.feature.space())) + "'");
    }
    if (n.kind == NodeKind::Object && !n.pose) {
      throw ParseError("object '" + n.id + "' has no pose");
    }
    if (n.pose) {
      try {
        validate(*n.pose);
      } catch (const std::invalid_argument& e) {
        throw ParseError("node '" + n.id + "': " + e.what());
      }
    }
    if (n.point_indices) {
      auto& pts = *n.point_indices;
      std::sort(pts.begin(), pts.end());
      pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    }
    const NodeId id = n.id;
    if (!nodes_.emplace(id, std::move(n)).second) {
      throw ParseError("duplicate node id '" + id + "'");
    }
    adjacency_[id];
  }

  for (auto& e : edges) {
    if (e.src == e.dst) throw ParseError("self-loop on node '" + e.src + "'");
    for (const NodeId* end : {&e.src, &e.dst}) {
      if (!nodes_.count(*end)) throw UnknownNode("unknown node reference '" + *end + "'");
    }
    if (e.relationships.empty()) {
      throw ParseError("edge " + e.src + " -> " + e.dst + " has no relationships");
    }
    for (const auto& r : e.relationships) {
      r.validate();
      if (r.kind == RelationKind::Spatial && !r.signature) {
        throw ParseError("scene spatial relationship " + e.src + " -> " + e.dst +
                         " must carry a measured signature");
      }
      const auto& src = nodes_.at(e.src);
      const auto& dst = nodes_.at(e.dst);
      if (r.kind == RelationKind::Spatial && (!src.pose || !dst.pose)) {
        throw ParseError("spatial relationship " + e.src + " -> " + e.dst +
                         " between unposed nodes");
      }
    }
    EdgeKey key{e.src, e.dst};
    auto [it, inserted] = edges_.try_emplace(key, RelationEdge{e.src, e.dst, {}});
    auto& rels = it->second.relationships;
    rels.insert(rels.end(), std::make_move_iterator(e.relationships.begin()),
                std::make_move_iterator(e.relationships.end()));
    if (inserted) {
      adjacency_[e.src].push_back(e.dst);
      adjacency_[e.dst].push_back(e.src);
    }
  }

  for (auto& [id, list] : adjacency_) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
}

const SceneNode* SceneGraph::find(std::string_view id) const {
  const auto it = nodes_.find(NodeId(id));
  return it == nodes_.end() ? nullptr : &it->second;
}

const SceneNode& SceneGraph::node(std::string_view id) const {
  if (const SceneNode* n = find(id)) return *n;
  throw UnknownNode("unknown node '" + std::string(id) + "'");
}

const RelationEdge* SceneGraph::edge(std::string_view src, std::string_view dst) const {
  const auto it = edges_.find(EdgeKey{NodeId(src), NodeId(dst)});
  return it == edges_.end() ? nullptr : &it->second;
}

const std::vector<NodeId>& SceneGraph::neighbors(std::string_view id) const {
  const auto it = adjacency_.find(NodeId(id));
  if (it == adjacency_.end()) throw UnknownNode("unknown node '" + std::string(id) + "'");
  return it->second;
}

StarView local_star(const SceneGraph& scene, std::string_view center) {
  StarView star;
  star.center = &scene.node(center);
  for (const NodeId& nid : scene.neighbors(center)) {
    StarNeighbor nb;
    nb.node = &scene.node(nid);
    if (const RelationEdge* out = scene.edge(center, nid)) nb.outgoing = &out->relationships;
    if (const RelationEdge* in = scene.edge(nid, center)) nb.incoming = &in->relationships;
    star.neighbors.push_back(nb);
  }
  return star;
}

namespace {

bool evaluates_pair(const SceneNode& a, const SceneNode& b) {
  return a.id != b.id && a.pose && b.pose && a.kind != NodeKind::Region;
}

}  // namespace

std::size_t candidate_pair_count(const SceneGraph& scene) {
  std::size_t count = 0;
  for (const auto& [ia, a] : scene.nodes()) {
    for (const auto& [ib, b] : scene.nodes()) count += evaluates_pair(a, b) ? 1 : 0;
  }
  return count;
}

std::vector<RelationEdge> derive_spatial_edges(const SceneGraph& scene, const SpatialParams& params) {
  params.validate();
  std::vector<RelationEdge> out;
  for (const auto& [ia, a] : scene.nodes()) {
    for (const auto& [ib, b] : scene.nodes()) {
      if (!evaluates_pair(a, b)) continue;
      const SpatialSignature sig = evaluate_pair(*a.pose, *b.pose, params);
      bool keep = false;
      if (b.kind == NodeKind::Region) {
        keep = sig[SpatialRelation::In] > 0.0;
      } else {
        const bool strong = std::any_of(sig.margins.begin(), sig.margins.end(),
                                        [&](double m) { return m >= params.keep_floor; });
        keep = strong && (!params.require_proximity || sig[SpatialRelation::Near] > 0.0 ||
                          sig[SpatialRelation::In] > 0.0 || sig[SpatialRelation::On] > 0.0);
      }
      if (keep) out.push_back(RelationEdge{ia, ib, {Relationship::measured(sig)}});
    }
  }
  return out;
}

}  // namespace ovsg
