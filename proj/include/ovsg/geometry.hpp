#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ovsg {

/// Axis-aligned box with a separately reported center.
///
/// The center is not required to be the box midpoint: fused instances often
/// report the point-cloud centroid. It must lie inside the box (up to a
/// tolerance proportional to the diagonal).
template <typename Scalar>
struct Box3 {
  using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

  Vec3 center = Vec3::Zero();
  Vec3 min_corner = Vec3::Zero();
  Vec3 max_corner = Vec3::Zero();

  Box3() = default;
  Box3(const Vec3& center, const Vec3& min_corner, const Vec3& max_corner)
      : center(center), min_corner(min_corner), max_corner(max_corner) {}

  static Box3 from_center_extent(const Vec3& center, const Vec3& half_extent) {
    return Box3(center, center - half_extent, center + half_extent);
  }

  Vec3 extent() const { return max_corner - min_corner; }
  Vec3 half_extent() const { return extent() / Scalar(2); }
  Scalar diagonal() const { return extent().norm(); }
  Scalar volume() const { return extent().prod(); }

  Box3 translated(const Vec3& offset) const {
    return Box3(center + offset, min_corner + offset, max_corner + offset);
  }

  bool operator==(const Box3& other) const {
    return center == other.center && min_corner == other.min_corner &&
           max_corner == other.max_corner;
  }
};

using Pose3D = Box3<double>;

/// Throws std::invalid_argument unless min <= max and the center sits inside
/// the box (tolerance 1e-6 * diagonal).
template <typename Scalar>
void validate(const Box3<Scalar>& box) {
  if ((box.min_corner.array() > box.max_corner.array()).any()) {
    throw std::invalid_argument("bounding box has min_corner > max_corner");
  }
  const Scalar tol = Scalar(1e-6) * box.diagonal();
  if ((box.center.array() < box.min_corner.array() - tol).any() ||
      (box.center.array() > box.max_corner.array() + tol).any()) {
    throw std::invalid_argument("bounding box center lies outside the box");
  }
}

/// Per-axis overlap lengths, clamped at zero.
template <typename Scalar>
typename Box3<Scalar>::Vec3 overlap_extent(const Box3<Scalar>& a, const Box3<Scalar>& b) {
  const typename Box3<Scalar>::Vec3 lo = a.min_corner.cwiseMax(b.min_corner);
  const typename Box3<Scalar>::Vec3 hi = a.max_corner.cwiseMin(b.max_corner);
  return (hi - lo).cwiseMax(Scalar(0));
}

template <typename Scalar>
Scalar intersection_volume(const Box3<Scalar>& a, const Box3<Scalar>& b) {
  return overlap_extent(a, b).prod();
}

/// Axis-aligned 3D IoU; 0 for disjoint boxes. Two identical zero-volume boxes
/// have IoU 1.
template <typename Scalar>
Scalar iou_bb(const Box3<Scalar>& a, const Box3<Scalar>& b) {
  const Scalar inter = intersection_volume(a, b);
  const Scalar uni = a.volume() + b.volume() - inter;
  if (uni <= Scalar(0)) {
    return (a.min_corner == b.min_corner && a.max_corner == b.max_corner) ? Scalar(1)
                                                                          : Scalar(0);
  }
  return std::clamp(inter / uni, Scalar(0), Scalar(1));
}

}  // namespace ovsg
