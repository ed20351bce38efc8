#include "arw/randomness.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include "arw/errors.hpp"

namespace arw {

InstructionStream::InstructionStream(std::uint64_t seed, JumpKernel kernel, Params params)
    : seed_(seed),
      seed_key_(mix(seed + kGold)),
      kernel_(std::move(kernel)),
      params_(params),
      sleep_prob_(params.sleep_prob()) {
  const auto& cdf = kernel_.cdf();
  thresholds_.resize(cdf.size());
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    thresholds_[i] = sleep_prob_ + params_.jump_prob() * cdf[i];
  }
  thresholds_.back() = 1.0;
}

std::uint64_t InstructionStream::site_key(std::span<const int> site) const {
  if (static_cast<int>(site.size()) != kernel_.dim()) {
    throw InvalidArgument("site dimension does not match the kernel");
  }
  std::uint64_t key = seed_key_;
  for (int c : site) {
    if (c <= -kCoordinateLimit || c >= kCoordinateLimit) {
      throw RangeError("site coordinate outside the addressable range");
    }
    key = mix(key ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(c) + kCoordinateLimit));
  }
  return key;
}

Instruction InstructionStream::instruction(std::span<const int> site, std::uint64_t k) const {
  const std::int32_t d = draw(site_key(site), k);
  if (d == kSleep) return {};
  return {Instruction::Tag::kJump, kernel_.support()[static_cast<std::size_t>(d)].offset};
}

std::size_t InstructionStream::jump_marginal(std::uint64_t key, std::uint64_t k) const noexcept {
  const std::uint64_t bits = mix(key + k * kGold);
  const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
  return kernel_.sample_index(u);
}

JumpDraw InstructionStream::next_jump(std::uint64_t key, std::uint64_t k) const noexcept {
  JumpDraw out;
  if (params_.sleep_certain()) {
    out.support_index = jump_marginal(key, k);
    out.consumed = 1;
    out.first_was_sleep = true;
    return out;
  }
  std::uint64_t i = k;
  while (true) {
    const std::int32_t d = draw(key, i);
    ++i;
    if (d != kSleep) {
      out.support_index = static_cast<std::size_t>(d);
      break;
    }
    if (i == k + 1) out.first_was_sleep = true;
  }
  out.consumed = i - k;
  return out;
}

InstructionStream InstructionStream::reseeded(std::uint64_t seed) const {
  return InstructionStream(seed, kernel_, params_);
}

ChiSquareReport chi_square_marginals(const InstructionStream& stream,
                                     std::span<const Site> sites, std::uint64_t depth,
                                     double alpha) {
  const auto& support = stream.kernel().support();
  const Params& params = stream.params();
  ChiSquareReport report;
  report.observed.assign(support.size() + 1, 0);
  for (const auto& site : sites) {
    const std::uint64_t key = stream.site_key(site);
    for (std::uint64_t k = 0; k < depth; ++k) {
      const std::int32_t d = stream.draw(key, k);
      ++report.observed[d == InstructionStream::kSleep ? 0 : static_cast<std::size_t>(d) + 1];
    }
  }
  report.samples = static_cast<std::uint64_t>(sites.size()) * depth;
  const double n = static_cast<double>(report.samples);
  report.expected.resize(report.observed.size());
  report.expected[0] = n * params.sleep_prob();
  for (std::size_t i = 0; i < support.size(); ++i) {
    report.expected[i + 1] = n * params.jump_prob() * support[i].prob;
  }
  int categories = 0;
  double stat = 0.0;
  for (std::size_t i = 0; i < report.expected.size(); ++i) {
    const double e = report.expected[i];
    if (e <= 0.0) continue;
    ++categories;
    const double diff = static_cast<double>(report.observed[i]) - e;
    stat += diff * diff / e;
  }
  if (categories < 2 || report.samples == 0) {
    report.status = ChiSquareReport::Status::kSkipped;
    return report;
  }
  report.statistic = stat;
  report.degrees_of_freedom = categories - 1;
  boost::math::chi_squared dist(report.degrees_of_freedom);
  report.p_value = boost::math::cdf(boost::math::complement(dist, stat));
  report.status = report.p_value > alpha ? ChiSquareReport::Status::kPass
                                         : ChiSquareReport::Status::kFail;
  return report;
}

}  // namespace arw
