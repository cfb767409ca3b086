#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ovsg/query.hpp"
#include "ovsg/scene_graph.hpp"

namespace ovsg {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Method { Likelihood, Jaccard, Simpson, SemanticOnly };

std::string_view to_string(Method method);
/// Accepts "likelihood", "jaccard", "simpson", "semantic".
Method parse_method(std::string_view text);

struct MatchParams {
  double sigma_v = 1.0;
  double sigma_e = 2.0;
  double eps_v = 0.5;
  double eps_e = 0.5;
  Method method = Method::Likelihood;
  std::size_t top_k = 3;
  std::optional<std::size_t> candidate_cap;  // nullopt: every node
  /// Greedy one-to-one leaf association instead of independent argmax.
  bool injective = false;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

struct MatchResult {
  NodeId candidate_id;
  double score = 0.0;
  Method method = Method::Likelihood;
  std::map<std::size_t, NodeId> association;  // query leaf -> scene node
  std::vector<std::size_t> dropped;           // leaves without a usable match
};

/// exp(-d / sigma) with exp(-inf) == 0.
double likelihood(double distance, double sigma);

/// +inf across kinds, otherwise 1 - dot of the features.
double node_distance(NodeKind ka, const FeatureVec& fa, NodeKind kb, const FeatureVec& fb);

template <typename A, typename B>
double node_distance(const A& a, const B& b) {
  return node_distance(a.kind, a.feature, b.kind, b.feature);
}

/// +inf across relation kinds; 1 - dot for abstract pairs; spatial_distance
/// when one side is measured and the other requested. Two measured or two
/// requested spatial relationships raise SpaceMismatch.
double relationship_distance(const Relationship& a, const Relationship& b);

/// Minimum relationship distance over the cross product.
double edge_distance(std::span<const Relationship> a, std::span<const Relationship> b);

/// Distance between the query edges of one leaf and the scene relationships
/// linking the star center to one neighbor. Same-direction relationships
/// compare directly; opposite-direction spatial ones compare against the
/// inverted descriptor; opposite-direction abstract ones never match.
double leaf_edge_distance(std::span<const LeafEdge* const> query_edges, const StarNeighbor& neighbor);

/// Scene nodes with finite distance to the query center, nearest first, ties
/// by id, truncated to candidate_cap.
std::vector<NodeId> propose_candidates(const SceneGraph& scene, const QueryGraph& query,
                                       const MatchParams& params);

struct LikelihoodScore {
  double score = 0.0;
  std::map<std::size_t, NodeId> association;
  std::vector<std::size_t> dropped;
};

LikelihoodScore likelihood_score(const QueryGraph& query, const StarView& star,
                                 const MatchParams& params);

struct OverlapCount {
  std::size_t matched_nodes = 0;
  std::size_t matched_edges = 0;
  std::map<std::size_t, NodeId> association;
};

/// Thresholded node/edge overlap between the query and a local star.
///
/// Leaves associate to the neighbor minimizing (node distance, edge
/// distance, id). Counts are of distinct star elements covered, so they never
/// exceed the star's size.
OverlapCount overlap_set_size(const QueryGraph& query, const StarView& star,
                              const MatchParams& params);

double jaccard_index(std::size_t matched, std::size_t query_size, std::size_t star_size);
double simpson_index(std::size_t matched, std::size_t query_size, std::size_t star_size);

double jaccard_score(const QueryGraph& query, const StarView& star, const MatchParams& params);
double simpson_score(const QueryGraph& query, const StarView& star, const MatchParams& params);

/// Candidate proposal followed by re-ranking with params.method. Results are
/// sorted by score (descending, ties by id) and truncated to top_k.
std::vector<MatchResult> ground(const SceneGraph& scene, const QueryGraph& query,
                                const MatchParams& params);

inline constexpr std::size_t kOracleMaxNodes = 15;
inline constexpr std::size_t kOracleMaxLeaves = 5;

/// Exhaustive reference for ground(): every node is a center, neighbors are
/// found by scanning all edges and leaf assignments are enumerated. Ignores
/// candidate_cap. Throws ConfigError past the size limits or with injective.
std::vector<MatchResult> brute_force_ground(const SceneGraph& scene, const QueryGraph& query,
                                            const MatchParams& params);

}  // namespace ovsg
