#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ovsg/geometry.hpp"

namespace ovsg {

class Embedder;

/// Canonical spatial relations, read as "a <relation> b".
enum class SpatialRelation { LeftOf, RightOf, InFrontOf, Behind, Above, Under, In, On, Near };

inline constexpr std::size_t kNumSpatialRelations = 9;
inline constexpr std::array<SpatialRelation, kNumSpatialRelations> kAllSpatialRelations = {
    SpatialRelation::LeftOf, SpatialRelation::RightOf, SpatialRelation::InFrontOf,
    SpatialRelation::Behind, SpatialRelation::Above,   SpatialRelation::Under,
    SpatialRelation::In,     SpatialRelation::On,      SpatialRelation::Near};

std::string_view to_string(SpatialRelation rel);
SpatialRelation parse_spatial_relation(std::string_view text);

/// Relation of b to a, given the relation of a to b. In and On have none.
std::optional<SpatialRelation> inverse(SpatialRelation rel);
bool mutually_exclusive(SpatialRelation a, SpatialRelation b);

/// Degree of satisfaction in [0, 1] of each canonical relation for a pose pair.
struct SpatialSignature {
  std::array<double, kNumSpatialRelations> margins{};

  double operator[](SpatialRelation r) const { return margins[static_cast<std::size_t>(r)]; }
  double& operator[](SpatialRelation r) { return margins[static_cast<std::size_t>(r)]; }
  bool operator==(const SpatialSignature&) const = default;
};

using RelationSet = std::set<SpatialRelation>;

/// Resolved spatial phrase; relations combine with AND semantics.
struct SpatialDescriptor {
  std::string raw_text;
  RelationSet relations;

  bool operator==(const SpatialDescriptor&) const = default;
};

/// Descriptor with every relation inverted; nullopt if any relation has no
/// inverse.
std::optional<SpatialDescriptor> inverse(const SpatialDescriptor& desc);

/// Throws UnknownSpatialRelation when the set is empty or holds an exclusive pair.
void validate_relation_set(const RelationSet& set, std::string_view context);

struct SpatialParams {
  double contact_tol = 0.05;
  double near_scale = 2.0;
  double keep_floor = 0.25;
  double epsilon = 1e-6;
  /// Minimum footprint overlap fraction for On to reach 1.
  double support_overlap = 0.25;
  /// Only keep pairs whose Near margin is positive (besides containment).
  bool require_proximity = true;

  void validate() const;
};

/// Closed-form margins of a relative to b in the world frame
/// (+x right, +y front, +z up).
SpatialSignature evaluate_pair(const Pose3D& a, const Pose3D& b, const SpatialParams& params = {});

/// 1 - min over desc.relations of sig[r].
double spatial_distance(const SpatialSignature& sig, const SpatialDescriptor& desc);

/// Synthetic signature with margin 1 on the listed relations and 0 elsewhere.
SpatialSignature signature_from(const RelationSet& set);

/// Description corpus mapping normalized phrases to relation sets.
///
/// The first phrase listed for a relation set is its canonical description.
class SpatialVocabulary {
 public:
  SpatialVocabulary() = default;
  explicit SpatialVocabulary(std::vector<std::pair<std::string, RelationSet>> descriptions);

  const std::map<std::string, RelationSet>& descriptions() const { return descriptions_; }
  std::size_t size() const { return descriptions_.size(); }

  /// Exact (normalized) lookup.
  std::optional<SpatialDescriptor> find(std::string_view text) const;

  /// Exact lookup, then snap to the nearest description in spatial-text space
  /// when the cosine similarity reaches the embedder's floor.
  SpatialDescriptor resolve(std::string_view text, const Embedder* embedder) const;

  std::optional<std::string> canonical_description(const RelationSet& set) const;

  /// Relation sets present in the vocabulary, in first-listed order.
  const std::vector<RelationSet>& relation_sets() const { return sets_; }

 private:
  std::map<std::string, RelationSet> descriptions_;
  std::vector<RelationSet> sets_;
  std::map<RelationSet, std::string> canonical_;
};

/// Reads {"descriptions": {"phrase": ["RightOf", ...], ...}}.
SpatialVocabulary load_spatial_vocabulary(const std::filesystem::path& path);

/// Location of the vocabulary that ships with the project.
std::filesystem::path default_vocabulary_path();

}  // namespace ovsg
