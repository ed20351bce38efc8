#include "arw/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "arw/errors.hpp"

namespace arw {

JumpKernel::JumpKernel(int dim, std::vector<KernelEntry> support, std::string name)
    : dim_(dim), support_(std::move(support)), name_(std::move(name)) {
  if (dim_ < 1) throw InvalidArgument("kernel dimension must be >= 1");
  if (support_.empty()) throw InvalidArgument("kernel support is empty");
  double total = 0.0;
  for (const auto& e : support_) {
    if (static_cast<int>(e.offset.size()) != dim_) {
      throw InvalidArgument("kernel offset has wrong length");
    }
    if (std::all_of(e.offset.begin(), e.offset.end(), [](int c) { return c == 0; })) {
      throw InvalidArgument("kernel support contains the zero offset");
    }
    if (!(e.prob > 0.0 && e.prob <= 1.0)) {
      throw InvalidArgument("kernel probabilities must lie in (0, 1]");
    }
    total += e.prob;
    for (int c : e.offset) reach_ = std::max(reach_, std::abs(c));
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidArgument("kernel probabilities must sum to 1 (got " + std::to_string(total) + ")");
  }
  std::sort(support_.begin(), support_.end(),
            [](const KernelEntry& a, const KernelEntry& b) { return a.offset < b.offset; });
  for (std::size_t i = 1; i < support_.size(); ++i) {
    if (support_[i].offset == support_[i - 1].offset) {
      throw InvalidArgument("kernel offsets must be distinct");
    }
  }
  cdf_.resize(support_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < support_.size(); ++i) {
    acc += support_[i].prob;
    cdf_[i] = acc;
  }
  cdf_.back() = 1.0;
  if (name_.empty()) name_ = is_ssrw() ? "ssrw-d" + std::to_string(dim_) : "custom-d" + std::to_string(dim_);
}

bool JumpKernel::symmetric() const {
  for (const auto& e : support_) {
    Site neg(e.offset);
    for (int& c : neg) c = -c;
    auto it = std::lower_bound(support_.begin(), support_.end(), neg,
                               [](const KernelEntry& a, const Site& s) { return a.offset < s; });
    if (it == support_.end() || it->offset != neg || std::abs(it->prob - e.prob) > 1e-15) {
      return false;
    }
  }
  return true;
}

bool JumpKernel::is_ssrw() const {
  if (support_.size() != static_cast<std::size_t>(2 * dim_)) return false;
  const double p = 1.0 / (2.0 * dim_);
  for (const auto& e : support_) {
    int nonzero = 0;
    for (int c : e.offset) {
      if (c != 0) {
        if (std::abs(c) != 1) return false;
        ++nonzero;
      }
    }
    if (nonzero != 1 || std::abs(e.prob - p) > 1e-15) return false;
  }
  return true;
}

std::size_t JumpKernel::sample_index(double u) const noexcept {
  for (std::size_t i = 0; i + 1 < cdf_.size(); ++i) {
    if (u < cdf_[i]) return i;
  }
  return cdf_.size() - 1;
}

JumpKernel make_ssrw_kernel(int dim) {
  if (dim < 1) throw InvalidArgument("invalid dimension: must be >= 1");
  std::vector<KernelEntry> support;
  const double p = 1.0 / (2.0 * dim);
  for (int axis = 0; axis < dim; ++axis) {
    for (int sign : {-1, 1}) {
      Site offset(static_cast<std::size_t>(dim), 0);
      offset[static_cast<std::size_t>(axis)] = sign;
      support.push_back({std::move(offset), p});
    }
  }
  return JumpKernel(dim, std::move(support), "ssrw-d" + std::to_string(dim));
}

JumpKernel kernel_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed kernel JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("dim") || !j.contains("support") ||
      !j["support"].is_array() || !j["dim"].is_number_integer()) {
    throw InvalidArgument("kernel JSON needs integer \"dim\" and array \"support\"");
  }
  std::vector<KernelEntry> support;
  for (const auto& e : j["support"]) {
    if (!e.is_object() || !e.contains("offset") || !e.contains("prob") ||
        !e["offset"].is_array() || !e["prob"].is_number()) {
      throw InvalidArgument("kernel support entries need \"offset\" and \"prob\"");
    }
    KernelEntry entry;
    for (const auto& c : e["offset"]) {
      if (!c.is_number_integer()) throw InvalidArgument("kernel offsets must be integers");
      entry.offset.push_back(c.get<int>());
    }
    entry.prob = e["prob"].get<double>();
    support.push_back(std::move(entry));
  }
  std::string name = j.value("name", std::string{});
  return JumpKernel(j["dim"].get<int>(), std::move(support), std::move(name));
}

std::string kernel_to_json(const JumpKernel& kernel) {
  nlohmann::json j;
  j["dim"] = kernel.dim();
  j["name"] = kernel.name();
  j["support"] = nlohmann::json::array();
  for (const auto& e : kernel.support()) {
    j["support"].push_back({{"offset", e.offset}, {"prob", e.prob}});
  }
  return j.dump();
}

JumpKernel load_kernel_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open kernel file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return kernel_from_json(buffer.str());
}

}  // namespace arw
