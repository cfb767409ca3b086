#include "ovsg/matching.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "ovsg/errors.hpp"

namespace ovsg {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::Likelihood:
      return "likelihood";
    case Method::Jaccard:
      return "jaccard";
    case Method::Simpson:
      return "simpson";
    case Method::SemanticOnly:
      return "semantic";
  }
  return "unknown";
}

Method parse_method(std::string_view text) {
  for (Method m : {Method::Likelihood, Method::Jaccard, Method::Simpson, Method::SemanticOnly}) {
    if (to_string(m) == text) return m;
  }
  throw ConfigError("unknown method '" + std::string(text) +
                    "' (expected likelihood, jaccard, simpson or semantic)");
}

void MatchParams::validate() const {
  if (!(sigma_v > 0.0 && std::isfinite(sigma_v))) throw ConfigError("sigma_v must be positive");
  if (!(sigma_e > 0.0 && std::isfinite(sigma_e))) throw ConfigError("sigma_e must be positive");
  if (!(eps_v > 0.0 && eps_v <= 2.0)) throw ConfigError("eps_v must lie in (0, 2]");
  if (!(eps_e > 0.0 && eps_e <= 2.0)) throw ConfigError("eps_e must lie in (0, 2]");
  if (top_k == 0) throw ConfigError("top_k must be positive");
  if (candidate_cap && *candidate_cap == 0) throw ConfigError("candidate_cap must be positive");
}

double likelihood(double distance, double sigma) {
  if (std::isinf(distance)) return 0.0;
  return std::exp(-distance / sigma);
}

double node_distance(NodeKind ka, const FeatureVec& fa, NodeKind kb, const FeatureVec& fb) {
  if (ka != kb) return kInfinity;
  return feature_distance(fa, fb);
}

double relationship_distance(const Relationship& a, const Relationship& b) {
  if (a.kind != b.kind) return kInfinity;
  if (a.kind == RelationKind::Abstract) {
    if (!a.feature || !b.feature) throw ParseError("abstract relationship without a feature");
    return feature_distance(*a.feature, *b.feature);
  }
  if (a.signature && b.descriptor) return spatial_distance(*a.signature, *b.descriptor);
  if (a.descriptor && b.signature) return spatial_distance(*b.signature, *a.descriptor);
  throw SpaceMismatch(
      "spatial relationships compare a measured signature with a requested descriptor");
}

double edge_distance(std::span<const Relationship> a, std::span<const Relationship> b) {
  double best = kInfinity;
  for (const auto& ra : a) {
    for (const auto& rb : b) best = std::min(best, relationship_distance(ra, rb));
  }
  return best;
}

double leaf_edge_distance(std::span<const LeafEdge* const> query_edges,
                          const StarNeighbor& neighbor) {
  double best = kInfinity;
  for (const LeafEdge* e : query_edges) {
    const Relationship& q = e->relationship;
    const bool forward = e->direction == Direction::CenterToLeaf;
    const auto* same = forward ? neighbor.outgoing : neighbor.incoming;
    const auto* opposite = forward ? neighbor.incoming : neighbor.outgoing;
    if (same) best = std::min(best, edge_distance(std::span(&q, 1), *same));
    if (opposite && q.kind == RelationKind::Spatial && q.descriptor) {
      if (const auto inv = inverse(*q.descriptor)) {
        for (const auto& s : *opposite) {
          if (s.kind == RelationKind::Spatial && s.signature) {
            best = std::min(best, spatial_distance(*s.signature, *inv));
          }
        }
      }
    }
  }
  return best;
}

std::vector<NodeId> propose_candidates(const SceneGraph& scene, const QueryGraph& query,
                                       const MatchParams& params) {
  std::vector<std::pair<double, NodeId>> ranked;
  for (const auto& [id, node] : scene.nodes()) {
    const double d = node_distance(query.center, node);
    if (std::isfinite(d)) ranked.emplace_back(d, id);
  }
  std::sort(ranked.begin(), ranked.end());
  std::size_t keep = ranked.size();
  if (params.candidate_cap) keep = std::min(keep, *params.candidate_cap);
  std::vector<NodeId> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back(std::move(ranked[i].second));
  return out;
}

namespace {

// Node and edge distances between every query leaf and every star neighbor.
struct PairTable {
  std::size_t leaves = 0;
  std::size_t neighbors = 0;
  std::vector<double> node;
  std::vector<double> edge;

  double node_at(std::size_t k, std::size_t j) const { return node[k * neighbors + j]; }
  double edge_at(std::size_t k, std::size_t j) const { return edge[k * neighbors + j]; }
};

std::vector<std::vector<const LeafEdge*>> edges_by_leaf(const QueryGraph& query) {
  std::vector<std::vector<const LeafEdge*>> out(query.leaves.size());
  for (const auto& e : query.leaf_edges) out.at(e.leaf).push_back(&e);
  return out;
}

PairTable pair_table(const QueryGraph& query, const StarView& star) {
  PairTable t{query.leaves.size(), star.neighbors.size(), {}, {}};
  t.node.resize(t.leaves * t.neighbors);
  t.edge.resize(t.leaves * t.neighbors);
  const auto by_leaf = edges_by_leaf(query);
  for (std::size_t k = 0; k < t.leaves; ++k) {
    for (std::size_t j = 0; j < t.neighbors; ++j) {
      const StarNeighbor& nb = star.neighbors[j];
      t.node[k * t.neighbors + j] = node_distance(query.leaves[k], *nb.node);
      t.edge[k * t.neighbors + j] = leaf_edge_distance(by_leaf[k], nb);
    }
  }
  return t;
}

// Greedy one-to-one assignment; `better(a, b)` orders (leaf, neighbor) pairs.
template <typename Better>
std::vector<std::optional<std::size_t>> greedy_assign(std::size_t leaves, std::size_t neighbors,
                                                      Better better) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t k = 0; k < leaves; ++k) {
    for (std::size_t j = 0; j < neighbors; ++j) pairs.emplace_back(k, j);
  }
  std::stable_sort(pairs.begin(), pairs.end(), better);
  std::vector<std::optional<std::size_t>> assigned(leaves);
  std::vector<bool> used(neighbors, false);
  for (const auto& [k, j] : pairs) {
    if (assigned[k] || used[j]) continue;
    assigned[k] = j;
    used[j] = true;
  }
  return assigned;
}

}  // namespace

LikelihoodScore likelihood_score(const QueryGraph& query, const StarView& star,
                                 const MatchParams& params) {
  LikelihoodScore out;
  const PairTable t = pair_table(query, star);
  auto factor = [&](std::size_t k, std::size_t j) {
    return likelihood(t.node_at(k, j), params.sigma_v) * likelihood(t.edge_at(k, j), params.sigma_e);
  };

  std::vector<std::optional<std::size_t>> choice(t.leaves);
  if (params.injective) {
    choice = greedy_assign(t.leaves, t.neighbors, [&](const auto& a, const auto& b) {
      return factor(a.first, a.second) > factor(b.first, b.second);
    });
  } else {
    for (std::size_t k = 0; k < t.leaves; ++k) {
      double best = -1.0;
      for (std::size_t j = 0; j < t.neighbors; ++j) {
        const double f = factor(k, j);
        if (f > best) {
          best = f;
          choice[k] = j;
        }
      }
    }
  }

  out.score = likelihood(node_distance(query.center, *star.center), params.sigma_v);
  for (std::size_t k = 0; k < t.leaves; ++k) {
    const double f = choice[k] ? factor(k, *choice[k]) : 0.0;
    out.score *= f;
    if (f > 0.0) {
      out.association[k] = star.neighbors[*choice[k]].node->id;
    } else {
      out.dropped.push_back(k);
    }
  }
  return out;
}

OverlapCount overlap_set_size(const QueryGraph& query, const StarView& star,
                              const MatchParams& params) {
  OverlapCount out;
  const PairTable t = pair_table(query, star);
  auto key = [&](std::size_t k, std::size_t j) {
    return std::make_tuple(t.node_at(k, j), t.edge_at(k, j));
  };

  std::vector<std::optional<std::size_t>> choice(t.leaves);
  if (params.injective) {
    choice = greedy_assign(t.leaves, t.neighbors, [&](const auto& a, const auto& b) {
      return key(a.first, a.second) < key(b.first, b.second);
    });
  } else {
    for (std::size_t k = 0; k < t.leaves; ++k) {
      for (std::size_t j = 0; j < t.neighbors; ++j) {
        if (!choice[k] || key(k, j) < key(k, *choice[k])) choice[k] = j;
      }
    }
  }

  const bool center_ok = node_distance(query.center, *star.center) < params.eps_v;
  std::set<NodeId> nodes;
  std::set<NodeId> edges;
  if (center_ok) nodes.insert(star.center->id);
  for (std::size_t k = 0; k < t.leaves; ++k) {
    if (!choice[k]) continue;
    const std::size_t j = *choice[k];
    const NodeId& id = star.neighbors[j].node->id;
    out.association[k] = id;
    const bool node_ok = t.node_at(k, j) < params.eps_v;
    if (node_ok) nodes.insert(id);
    if (node_ok && center_ok && t.edge_at(k, j) < params.eps_e) edges.insert(id);
  }
  out.matched_nodes = nodes.size();
  out.matched_edges = edges.size();
  return out;
}

double jaccard_index(std::size_t matched, std::size_t query_size, std::size_t star_size) {
  const double denom = static_cast<double>(query_size + star_size) - static_cast<double>(matched);
  return denom > 0.0 ? static_cast<double>(matched) / denom : 0.0;
}

double simpson_index(std::size_t matched, std::size_t query_size, std::size_t star_size) {
  const std::size_t denom = std::min(query_size, star_size);
  return denom > 0 ? static_cast<double>(matched) / static_cast<double>(denom) : 0.0;
}

double jaccard_score(const QueryGraph& query, const StarView& star, const MatchParams& params) {
  const OverlapCount c = overlap_set_size(query, star, params);
  return jaccard_index(c.matched_nodes + c.matched_edges, query.node_count() + query.edge_count(),
                       star.node_count() + star.edge_count());
}

double simpson_score(const QueryGraph& query, const StarView& star, const MatchParams& params) {
  const OverlapCount c = overlap_set_size(query, star, params);
  return simpson_index(c.matched_nodes + c.matched_edges, query.node_count() + query.edge_count(),
                       star.node_count() + star.edge_count());
}

namespace {

MatchResult score_candidate(const QueryGraph& query, const StarView& star,
                            const MatchParams& params) {
  MatchResult r{star.center->id, 0.0, params.method, {}, {}};
  switch (params.method) {
    case Method::SemanticOnly:
      r.score = likelihood(node_distance(query.center, *star.center), params.sigma_v);
      break;
    case Method::Likelihood: {
      LikelihoodScore s = likelihood_score(query, star, params);
      r.score = s.score;
      r.association = std::move(s.association);
      r.dropped = std::move(s.dropped);
      break;
    }
    case Method::Jaccard:
    case Method::Simpson: {
      const OverlapCount c = overlap_set_size(query, star, params);
      const std::size_t m = c.matched_nodes + c.matched_edges;
      const std::size_t q = query.node_count() + query.edge_count();
      const std::size_t s = star.node_count() + star.edge_count();
      r.score = params.method == Method::Jaccard ? jaccard_index(m, q, s) : simpson_index(m, q, s);
      r.association = c.association;
      for (std::size_t k = 0; k < query.leaves.size(); ++k) {
        if (!c.association.count(k)) r.dropped.push_back(k);
      }
      break;
    }
  }
  return r;
}

}  // namespace

std::vector<MatchResult> ground(const SceneGraph& scene, const QueryGraph& query,
                                const MatchParams& params) {
  params.validate();
  std::vector<MatchResult> results;
  for (const NodeId& id : propose_candidates(scene, query, params)) {
    results.push_back(score_candidate(query, local_star(scene, id), params));
  }
  std::sort(results.begin(), results.end(), [](const MatchResult& a, const MatchResult& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.candidate_id < b.candidate_id;
  });
  if (results.size() > params.top_k) results.resize(params.top_k);
  return results;
}

}  // namespace ovsg
