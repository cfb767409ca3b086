#pragma once

#include <Eigen/Core>

#include <string>
#include <string_view>

#include "ovsg/errors.hpp"

namespace ovsg {

/// Embedding spaces. Vectors are only comparable within one space.
enum class Space { Object, Name, Abstract, SpatialText };

inline constexpr Space kAllSpaces[] = {Space::Object, Space::Name, Space::Abstract,
                                       Space::SpatialText};

std::string_view to_string(Space space);
/// Accepts "object", "name", "abstract", "spatial-text".
Space parse_space(std::string_view text);

/// Unit-norm embedding tagged with its space.
class FeatureVec {
 public:
  FeatureVec(Space space, Eigen::VectorXd values);

  Space space() const { return space_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::Index dim() const { return values_.size(); }

  bool operator==(const FeatureVec& other) const {
    return space_ == other.space_ && values_.size() == other.values_.size() &&
           values_ == other.values_;
  }

 private:
  Space space_;
  Eigen::VectorXd values_;
};

/// 1 - dot(a, b), in [0, 2]. Throws SpaceMismatch across spaces.
double feature_distance(const FeatureVec& a, const FeatureVec& b);

}  // namespace ovsg
