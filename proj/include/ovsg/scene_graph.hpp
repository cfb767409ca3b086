#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ovsg/feature.hpp"
#include "ovsg/geometry.hpp"
#include "ovsg/spatial.hpp"

namespace ovsg {

enum class NodeKind { Object, Agent, Region };
enum class RelationKind { Spatial, Abstract };

std::string_view to_string(NodeKind kind);
NodeKind parse_node_kind(std::string_view text);
std::string_view to_string(RelationKind kind);
RelationKind parse_relation_kind(std::string_view text);

/// Embedding space used for the features of nodes of a kind.
Space node_space(NodeKind kind);

using NodeId = std::string;

struct SceneNode {
  NodeId id;
  NodeKind kind = NodeKind::Object;
  FeatureVec feature;
  std::optional<std::string> label;
  std::optional<Pose3D> pose;
  std::optional<std::vector<std::uint32_t>> point_indices;  // sorted, unique
};

/// One typed relationship on an edge.
///
/// Abstract relationships carry a feature. Spatial ones carry either a
/// signature (scene side, measured) or a descriptor (query side, requested).
struct Relationship {
  RelationKind kind = RelationKind::Abstract;
  std::optional<std::string> label;
  std::optional<FeatureVec> feature;
  std::optional<SpatialDescriptor> descriptor;
  std::optional<SpatialSignature> signature;

  static Relationship abstract(std::string label, FeatureVec feature);
  static Relationship measured(SpatialSignature signature, std::optional<std::string> label = {});
  static Relationship requested(SpatialDescriptor descriptor);

  /// Throws ParseError when the kind-specific payload is missing or ambiguous.
  void validate() const;
};

/// Directed edge; relationships of duplicate (src, dst) entries are merged.
struct RelationEdge {
  NodeId src;
  NodeId dst;
  std::vector<Relationship> relationships;
};

/// Neighbor of a star center with the relationships on both directions.
struct StarNeighbor {
  const SceneNode* node = nullptr;
  const std::vector<Relationship>* outgoing = nullptr;  // center -> neighbor
  const std::vector<Relationship>* incoming = nullptr;  // neighbor -> center
};

/// Local star around one node. Borrows from the graph it was taken from.
struct StarView {
  const SceneNode* center = nullptr;
  std::vector<StarNeighbor> neighbors;  // sorted by id

  std::size_t node_count() const { return 1 + neighbors.size(); }
  /// Edges merged per neighbor regardless of direction.
  std::size_t edge_count() const { return neighbors.size(); }
};

/// Immutable, validated scene graph. Nodes and edges iterate in id order.
class SceneGraph {
 public:
  using EdgeKey = std::pair<NodeId, NodeId>;

  SceneGraph() = default;
  SceneGraph(std::string scene_id, std::vector<SceneNode> nodes, std::vector<RelationEdge> edges);

  const std::string& scene_id() const { return scene_id_; }
  const std::map<NodeId, SceneNode>& nodes() const { return nodes_; }
  const std::map<EdgeKey, RelationEdge>& edges() const { return edges_; }

  const SceneNode* find(std::string_view id) const;
  const SceneNode& node(std::string_view id) const;
  const RelationEdge* edge(std::string_view src, std::string_view dst) const;
  const std::vector<NodeId>& neighbors(std::string_view id) const;

 private:
  std::string scene_id_;
  std::map<NodeId, SceneNode> nodes_;
  std::map<EdgeKey, RelationEdge> edges_;
  std::map<NodeId, std::vector<NodeId>> adjacency_;
};

/// Center, every incident edge, and every neighbor. Throws UnknownNode.
StarView local_star(const SceneGraph& scene, std::string_view center);

/// Spatial edges between posed nodes. Pairs are kept when a margin reaches
/// keep_floor (and, with require_proximity, the Near margin is positive).
/// Nothing is emitted with a Region as source; (node, region) pairs are kept
/// exactly when In is positive.
std::vector<RelationEdge> derive_spatial_edges(const SceneGraph& scene,
                                               const SpatialParams& params = {});

/// Number of ordered pairs derive_spatial_edges evaluates.
std::size_t candidate_pair_count(const SceneGraph& scene);

}  // namespace ovsg
