#include <algorithm>
#include <cmath>
#include <set>

#include "ovsg/errors.hpp"
#include "ovsg/matching.hpp"

// Deliberately naive reference: no adjacency index, no candidate proposal and
// likelihood associations found by enumerating every leaf assignment.

namespace ovsg {

namespace {

struct Neighbor {
  const SceneNode* node = nullptr;
  const std::vector<Relationship>* out = nullptr;
  const std::vector<Relationship>* in = nullptr;
};

std::vector<Neighbor> scan_neighbors(const SceneGraph& scene, const NodeId& center) {
  std::map<NodeId, Neighbor> found;
  for (const auto& [key, edge] : scene.edges()) {
    if (edge.src == center) {
      Neighbor& n = found[edge.dst];
      n.node = &scene.node(edge.dst);
      n.out = &edge.relationships;
    } else if (edge.dst == center) {
      Neighbor& n = found[edge.src];
      n.node = &scene.node(edge.src);
      n.in = &edge.relationships;
    }
  }
  std::vector<Neighbor> out;
  for (auto& [id, n] : found) out.push_back(n);
  return out;
}

double edge_cost(const QueryGraph& query, std::size_t leaf, const Neighbor& nb) {
  double best = kInfinity;
  for (const auto& e : query.leaf_edges) {
    if (e.leaf != leaf) continue;
    const bool forward = e.direction == Direction::CenterToLeaf;
    const auto* direct = forward ? nb.out : nb.in;
    const auto* reverse = forward ? nb.in : nb.out;
    if (direct) {
      for (const auto& r : *direct) best = std::min(best, relationship_distance(e.relationship, r));
    }
    if (!reverse || e.relationship.kind != RelationKind::Spatial) continue;
    const auto flipped = inverse(*e.relationship.descriptor);
    if (!flipped) continue;
    const Relationship q = Relationship::requested(*flipped);
    for (const auto& r : *reverse) {
      if (r.kind == RelationKind::Spatial) best = std::min(best, relationship_distance(q, r));
    }
  }
  return best;
}

MatchResult score_center(const QueryGraph& query, const SceneNode& center,
                         const std::vector<Neighbor>& nbs, const MatchParams& params) {
  MatchResult r{center.id, 0.0, params.method, {}, {}};
  const std::size_t L = query.leaves.size();
  const std::size_t N = nbs.size();
  const double dc = node_distance(query.center, center);
  const double center_factor = likelihood(dc, params.sigma_v);

  std::vector<std::vector<double>> dn(L, std::vector<double>(N));
  std::vector<std::vector<double>> de(L, std::vector<double>(N));
  for (std::size_t k = 0; k < L; ++k) {
    for (std::size_t j = 0; j < N; ++j) {
      dn[k][j] = node_distance(query.leaves[k], *nbs[j].node);
      de[k][j] = edge_cost(query, k, nbs[j]);
    }
  }

  if (params.method == Method::SemanticOnly) {
    r.score = center_factor;
    return r;
  }

  if (params.method == Method::Likelihood) {
    r.score = center_factor * (L == 0 ? 1.0 : 0.0);
    if (L == 0 || N == 0) {
      for (std::size_t k = 0; k < L; ++k) r.dropped.push_back(k);
      return r;
    }
    std::vector<std::size_t> pick(L, 0);
    std::vector<std::size_t> best_pick;
    double best = -1.0;
    while (true) {
      double s = center_factor;
      for (std::size_t k = 0; k < L; ++k) {
        s *= likelihood(dn[k][pick[k]], params.sigma_v) * likelihood(de[k][pick[k]], params.sigma_e);
      }
      if (s > best) {
        best = s;
        best_pick = pick;
      }
      std::size_t k = L;
      while (k > 0 && ++pick[k - 1] == N) pick[--k] = 0;
      if (k == 0) break;
    }
    r.score = best;
    for (std::size_t k = 0; k < L; ++k) {
      const std::size_t j = best_pick[k];
      const double f =
          likelihood(dn[k][j], params.sigma_v) * likelihood(de[k][j], params.sigma_e);
      if (f > 0.0) {
        r.association[k] = nbs[j].node->id;
      } else {
        r.dropped.push_back(k);
      }
    }
    return r;
  }

  const bool center_in = dc < params.eps_v;
  std::set<NodeId> cap;  // matched scene elements; edges tagged with a prefix
  if (center_in) cap.insert("node:" + center.id);
  for (std::size_t k = 0; k < L; ++k) {
    if (N == 0) {
      r.dropped.push_back(k);
      continue;
    }
    std::size_t j = 0;
    for (std::size_t c = 1; c < N; ++c) {
      if (dn[k][c] < dn[k][j] || (dn[k][c] == dn[k][j] && de[k][c] < de[k][j])) j = c;
    }
    r.association[k] = nbs[j].node->id;
    if (dn[k][j] < params.eps_v) {
      cap.insert("node:" + nbs[j].node->id);
      if (center_in && de[k][j] < params.eps_e) cap.insert("edge:" + nbs[j].node->id);
    }
  }
  const double m = static_cast<double>(cap.size());
  const double q = static_cast<double>(1 + 2 * L);
  const double s = static_cast<double>(1 + 2 * N);
  r.score = params.method == Method::Jaccard ? m / (q + s - m) : m / std::min(q, s);
  return r;
}

}  // namespace

std::vector<MatchResult> brute_force_ground(const SceneGraph& scene, const QueryGraph& query,
                                            const MatchParams& params) {
  params.validate();
  if (params.injective) throw ConfigError("brute_force_ground does not support injective mode");
  if (scene.nodes().size() > kOracleMaxNodes) {
    throw ConfigError("brute_force_ground: scene exceeds " + std::to_string(kOracleMaxNodes) +
                      " nodes");
  }
  if (query.leaves.size() > kOracleMaxLeaves) {
    throw ConfigError("brute_force_ground: query exceeds " + std::to_string(kOracleMaxLeaves) +
                      " leaves");
  }
  std::vector<MatchResult> all;
  for (const auto& [id, node] : scene.nodes()) {
    if (!std::isfinite(node_distance(query.center, node))) continue;
    all.push_back(score_center(query, node, scan_neighbors(scene, id), params));
  }
  std::sort(all.begin(), all.end(), [](const MatchResult& a, const MatchResult& b) {
    return a.score > b.score || (a.score == b.score && a.candidate_id < b.candidate_id);
  });
  if (all.size() > params.top_k) all.resize(params.top_k);
  return all;
}

}  // namespace ovsg
