#include "ovsg/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "ovsg/embedding.hpp"
#include "ovsg/errors.hpp"

namespace ovsg {

namespace {

constexpr std::array<std::string_view, kNumSpatialRelations> kRelationNames = {
    "LeftOf", "RightOf", "InFrontOf", "Behind", "Above", "Under", "In", "On", "Near"};

// Fraction of a's extent on `axis` that lies inside b. A degenerate extent
// counts as a point.
double axis_fraction(const Pose3D& a, const Pose3D& b, int axis, double eps) {
  const double ext = a.max_corner[axis] - a.min_corner[axis];
  if (ext < eps) {
    const double p = 0.5 * (a.min_corner[axis] + a.max_corner[axis]);
    return (p >= b.min_corner[axis] && p <= b.max_corner[axis]) ? 1.0 : 0.0;
  }
  const double lo = std::max(a.min_corner[axis], b.min_corner[axis]);
  const double hi = std::min(a.max_corner[axis], b.max_corner[axis]);
  return std::clamp((hi - lo) / ext, 0.0, 1.0);
}

double axis_margin(double gap, double half_a, double half_b, double eps) {
  return std::clamp(gap / (half_a + half_b + eps), 0.0, 1.0);
}

}  // namespace

std::string_view to_string(SpatialRelation rel) {
  return kRelationNames[static_cast<std::size_t>(rel)];
}

SpatialRelation parse_spatial_relation(std::string_view text) {
  for (std::size_t i = 0; i < kRelationNames.size(); ++i) {
    if (kRelationNames[i] == text) return kAllSpatialRelations[i];
  }
  throw UnknownSpatialRelation("unknown canonical spatial relation '" + std::string(text) + "'");
}

std::optional<SpatialRelation> inverse(SpatialRelation rel) {
  switch (rel) {
    case SpatialRelation::LeftOf:
      return SpatialRelation::RightOf;
    case SpatialRelation::RightOf:
      return SpatialRelation::LeftOf;
    case SpatialRelation::InFrontOf:
      return SpatialRelation::Behind;
    case SpatialRelation::Behind:
      return SpatialRelation::InFrontOf;
    case SpatialRelation::Above:
      return SpatialRelation::Under;
    case SpatialRelation::Under:
      return SpatialRelation::Above;
    case SpatialRelation::Near:
      return SpatialRelation::Near;
    case SpatialRelation::In:
    case SpatialRelation::On:
      return std::nullopt;
  }
  return std::nullopt;
}

bool mutually_exclusive(SpatialRelation a, SpatialRelation b) {
  const auto inv = inverse(a);
  return a != SpatialRelation::Near && inv && *inv == b;
}

std::optional<SpatialDescriptor> inverse(const SpatialDescriptor& desc) {
  SpatialDescriptor out{desc.raw_text, {}};
  for (SpatialRelation r : desc.relations) {
    const auto inv = inverse(r);
    if (!inv) return std::nullopt;
    out.relations.insert(*inv);
  }
  return out;
}

void validate_relation_set(const RelationSet& set, std::string_view context) {
  if (set.empty()) {
    throw UnknownSpatialRelation("empty relation set for '" + std::string(context) + "'");
  }
  for (SpatialRelation a : set) {
    for (SpatialRelation b : set) {
      if (mutually_exclusive(a, b)) {
        throw UnknownSpatialRelation("relation set for '" + std::string(context) +
                                     "' combines " + std::string(to_string(a)) + " and " +
                                     std::string(to_string(b)));
      }
    }
  }
}

void SpatialParams::validate() const {
  if (!(contact_tol >= 0.0)) throw ConfigError("contact_tol must be non-negative");
  if (!(near_scale > 0.0)) throw ConfigError("near_scale must be positive");
  if (!(keep_floor > 0.0 && keep_floor <= 1.0)) throw ConfigError("keep_floor must lie in (0, 1]");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(support_overlap > 0.0 && support_overlap <= 1.0)) {
    throw ConfigError("support_overlap must lie in (0, 1]");
  }
}

SpatialSignature evaluate_pair(const Pose3D& a, const Pose3D& b, const SpatialParams& params) {
  using R = SpatialRelation;
  const double eps = params.epsilon;
  const Eigen::Vector3d ha = a.half_extent();
  const Eigen::Vector3d hb = b.half_extent();

  SpatialSignature sig;
  sig[R::RightOf] = axis_margin(a.center.x() - b.center.x(), ha.x(), hb.x(), eps);
  sig[R::LeftOf] = axis_margin(b.center.x() - a.center.x(), ha.x(), hb.x(), eps);
  sig[R::InFrontOf] = axis_margin(a.center.y() - b.center.y(), ha.y(), hb.y(), eps);
  sig[R::Behind] = axis_margin(b.center.y() - a.center.y(), ha.y(), hb.y(), eps);
  sig[R::Above] = axis_margin(a.center.z() - b.center.z(), ha.z(), hb.z(), eps);
  sig[R::Under] = axis_margin(b.center.z() - a.center.z(), ha.z(), hb.z(), eps);

  sig[R::In] = axis_fraction(a, b, 0, eps) * axis_fraction(a, b, 1, eps) *
               axis_fraction(a, b, 2, eps);

  const bool contact = std::abs(a.min_corner.z() - b.max_corner.z()) <= params.contact_tol;
  if (contact) {
    const double footprint = axis_fraction(a, b, 0, eps) * axis_fraction(a, b, 1, eps);
    sig[R::On] = std::clamp(footprint / params.support_overlap, 0.0, 1.0);
  }

  const double scale =
      std::max(params.near_scale * 0.5 * (a.diagonal() + b.diagonal()), eps);
  sig[R::Near] = std::clamp(1.0 - (a.center - b.center).norm() / scale, 0.0, 1.0);
  return sig;
}

double spatial_distance(const SpatialSignature& sig, const SpatialDescriptor& desc) {
  double weakest = 1.0;
  for (SpatialRelation r : desc.relations) weakest = std::min(weakest, sig[r]);
  return 1.0 - weakest;
}

SpatialSignature signature_from(const RelationSet& set) {
  SpatialSignature sig;
  for (SpatialRelation r : set) sig[r] = 1.0;
  return sig;
}

SpatialVocabulary::SpatialVocabulary(
    std::vector<std::pair<std::string, RelationSet>> descriptions) {
  for (auto& [text, set] : descriptions) {
    const std::string key = normalize_text(text);
    if (key.empty()) throw ParseError("empty spatial description");
    validate_relation_set(set, key);
    if (!descriptions_.emplace(key, set).second) {
      throw ParseError("duplicate spatial description '" + key + "'");
    }
    if (canonical_.emplace(set, key).second) sets_.push_back(set);
  }
}

std::optional<SpatialDescriptor> SpatialVocabulary::find(std::string_view text) const {
  const std::string key = normalize_text(text);
  const auto it = descriptions_.find(key);
  if (it == descriptions_.end()) return std::nullopt;
  return SpatialDescriptor{key, it->second};
}

SpatialDescriptor SpatialVocabulary::resolve(std::string_view text, const Embedder* embedder) const {
  const std::string key = normalize_text(text);
  if (key.empty()) throw UnknownSpatialRelation("empty spatial relation text");
  if (auto hit = find(key)) return *hit;

  if (embedder && embedder->has_provider(Space::SpatialText)) {
    try {
      const FeatureVec probe = embedder->embed(Space::SpatialText, key);
      const std::string* best = nullptr;
      double best_sim = -std::numeric_limits<double>::infinity();
      for (const auto& [desc, set] : descriptions_) {
        const double sim =
            1.0 - feature_distance(probe, embedder->embed(Space::SpatialText, desc));
        if (sim > best_sim) {
          best_sim = sim;
          best = &desc;
        }
      }
      if (best && best_sim >= embedder->options().snap_floor) {
        return SpatialDescriptor{key, descriptions_.at(*best)};
      }
    } catch (const UnencodableText&) {
      // fall through to the unknown-relation error
    }
  }
  throw UnknownSpatialRelation("unknown spatial relation '" + key + "'");
}

std::optional<std::string> SpatialVocabulary::canonical_description(const RelationSet& set) const {
  const auto it = canonical_.find(set);
  if (it == canonical_.end()) return std::nullopt;
  return it->second;
}

SpatialVocabulary load_spatial_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spatial vocabulary " + path.string());
  try {
    const auto doc = nlohmann::ordered_json::parse(in);
    std::vector<std::pair<std::string, RelationSet>> descriptions;
    for (const auto& [text, arr] : doc.at("descriptions").items()) {
      RelationSet set;
      for (const auto& name : arr) set.insert(parse_spatial_relation(name.get<std::string>()));
      descriptions.emplace_back(text, std::move(set));
    }
    return SpatialVocabulary(std::move(descriptions));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::filesystem::path default_vocabulary_path() {
  return std::filesystem::path(OVSG_DATA_DIR) / "spatial_vocabulary.json";
}

}  // namespace ovsg
