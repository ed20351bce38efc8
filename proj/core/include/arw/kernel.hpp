#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace arw {

/// A lattice point of Z^d (also used for offsets).
using Site = std::vector<int>;

struct KernelEntry {
  Site offset;
  double prob = 0.0;
};

/// Translation-invariant jump distribution with finite support.
///
/// The support is kept in lexicographic order of offsets so that inverse-CDF
/// sampling is reproducible. Construction validates: offsets have length
/// `dim`, are distinct and nonzero, each probability lies in (0, 1], and the
/// total is 1 within 1e-12.
class JumpKernel {
 public:
  JumpKernel(int dim, std::vector<KernelEntry> support, std::string name = {});

  int dim() const noexcept { return dim_; }
  std::span<const KernelEntry> support() const noexcept { return support_; }
  /// Cumulative probabilities in support order; the last entry is exactly 1.
  std::span<const double> cdf() const noexcept { return cdf_; }
  /// Largest |component| over all offsets.
  int reach() const noexcept { return reach_; }
  bool symmetric() const;
  /// True for the nearest-neighbour walk with uniform weights.
  bool is_ssrw() const;
  const std::string& name() const noexcept { return name_; }

  /// Support index of the offset selected by a uniform u in [0, 1).
  std::size_t sample_index(double u) const noexcept;

 private:
  int dim_;
  std::vector<KernelEntry> support_;
  std::vector<double> cdf_;
  int reach_ = 0;
  std::string name_;
};

/// Simple symmetric random walk on Z^dim: offsets +-e_i, each 1/(2 dim).
JumpKernel make_ssrw_kernel(int dim);

/// Parses {"dim": d, "support": [{"offset": [...], "prob": p}, ...]}.
JumpKernel kernel_from_json(std::string_view text);
std::string kernel_to_json(const JumpKernel& kernel);
JumpKernel load_kernel_file(const std::string& path);

}  // namespace arw
