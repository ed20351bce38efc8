#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "arw/kernel.hpp"

namespace arw {

/// Finite set of sites V containing the origin, either a centered box
/// B_r (radius per axis) or an explicit list. `unbounded(d)` stands for all
/// of Z^d and is only accepted where an operation documents it.
class Volume {
 public:
  enum class Shape { kBox, kSites, kUnbounded };

  static Volume box(std::vector<int> radii);
  /// Box with the same radius on every axis.
  static Volume ball(int dim, int radius);
  static Volume sites(int dim, std::vector<Site> sites);
  static Volume unbounded(int dim);

  Shape shape() const noexcept { return shape_; }
  int dim() const noexcept { return dim_; }
  bool bounded() const noexcept { return shape_ != Shape::kUnbounded; }
  /// Number of sites; 0 for unbounded.
  std::size_t size() const noexcept { return size_; }

  bool contains(std::span<const int> site) const;
  /// True if the centered box of radius r is a subset.
  bool contains_ball(int radius) const;

  /// Bounding box corners (inclusive). Undefined for unbounded volumes.
  const std::vector<int>& lower() const noexcept { return lower_; }
  const std::vector<int>& upper() const noexcept { return upper_; }
  /// Per-axis radii for box volumes.
  const std::vector<int>& radii() const noexcept { return upper_; }

  /// Sites in lexicographic order.
  std::vector<Site> enumerate() const;

  std::string describe() const;

  bool operator==(const Volume& other) const;

 private:
  Volume() = default;

  Shape shape_ = Shape::kBox;
  int dim_ = 0;
  std::size_t size_ = 0;
  std::vector<int> lower_;
  std::vector<int> upper_;
  std::vector<Site> sites_;  // sorted, kSites only
};

/// Sup-norm |x|_inf.
int sup_norm(std::span<const int> site);
std::string format_site(std::span<const int> site);
/// Parses "(x,y,...)"; throws InvalidArgument.
Site parse_site(std::string_view text);

}  // namespace arw
