#include "arw/volume.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <sstream>

#include "arw/errors.hpp"

namespace arw {

Volume Volume::box(std::vector<int> radii) {
  if (radii.empty()) throw InvalidArgument("invalid dimension: must be >= 1");
  Volume v;
  v.shape_ = Shape::kBox;
  v.dim_ = static_cast<int>(radii.size());
  v.size_ = 1;
  for (int r : radii) {
    if (r < 0) throw InvalidArgument("box radius must be >= 0");
    v.size_ *= static_cast<std::size_t>(2 * r + 1);
    v.lower_.push_back(-r);
  }
  v.upper_ = std::move(radii);
  return v;
}

Volume Volume::ball(int dim, int radius) {
  if (dim < 1) throw InvalidArgument("invalid dimension: must be >= 1");
  return box(std::vector<int>(static_cast<std::size_t>(dim), radius));
}

Volume Volume::sites(int dim, std::vector<Site> sites) {
  if (dim < 1) throw InvalidArgument("invalid dimension: must be >= 1");
  for (const auto& s : sites) {
    if (static_cast<int>(s.size()) != dim) throw InvalidArgument("site has wrong dimension");
  }
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  const Site origin(static_cast<std::size_t>(dim), 0);
  if (!std::binary_search(sites.begin(), sites.end(), origin)) {
    throw InvalidArgument("volume must contain the origin");
  }
  Volume v;
  v.shape_ = Shape::kSites;
  v.dim_ = dim;
  v.size_ = sites.size();
  v.lower_.assign(static_cast<std::size_t>(dim), 0);
  v.upper_.assign(static_cast<std::size_t>(dim), 0);
  for (const auto& s : sites) {
    for (int i = 0; i < dim; ++i) {
      v.lower_[i] = std::min(v.lower_[i], s[i]);
      v.upper_[i] = std::max(v.upper_[i], s[i]);
    }
  }
  v.sites_ = std::move(sites);
  return v;
}

Volume Volume::unbounded(int dim) {
  if (dim < 1) throw InvalidArgument("invalid dimension: must be >= 1");
  Volume v;
  v.shape_ = Shape::kUnbounded;
  v.dim_ = dim;
  return v;
}

bool Volume::contains(std::span<const int> site) const {
  if (static_cast<int>(site.size()) != dim_) return false;
  switch (shape_) {
    case Shape::kUnbounded:
      return true;
    case Shape::kBox:
      for (int i = 0; i < dim_; ++i) {
        if (site[i] < lower_[i] || site[i] > upper_[i]) return false;
      }
      return true;
    case Shape::kSites:
      return std::binary_search(sites_.begin(), sites_.end(), Site(site.begin(), site.end()));
  }
  return false;
}

bool Volume::contains_ball(int radius) const {
  if (radius < 0) return true;
  switch (shape_) {
    case Shape::kUnbounded:
      return true;
    case Shape::kBox:
      return std::all_of(upper_.begin(), upper_.end(), [&](int r) { return r >= radius; });
    case Shape::kSites: {
      for (const auto& s : Volume::ball(dim_, radius).enumerate()) {
        if (!contains(s)) return false;
      }
      return true;
    }
  }
  return false;
}

std::vector<Site> Volume::enumerate() const {
  if (shape_ == Shape::kUnbounded) throw UnsupportedError("cannot enumerate an unbounded volume");
  if (shape_ == Shape::kSites) return sites_;
  std::vector<Site> out;
  out.reserve(size_);
  Site cur = lower_;
  while (true) {
    out.push_back(cur);
    int i = dim_ - 1;
    while (i >= 0 && cur[i] == upper_[i]) {
      cur[i] = lower_[i];
      --i;
    }
    if (i < 0) break;
    ++cur[i];
  }
  return out;
}

std::string Volume::describe() const {
  std::ostringstream out;
  switch (shape_) {
    case Shape::kUnbounded:
      out << "Z^" << dim_;
      break;
    case Shape::kBox: {
      const bool uniform = std::all_of(upper_.begin(), upper_.end(), [&](int r) { return r == upper_[0]; });
      if (uniform) {
        out << "B_" << upper_[0] << " in Z^" << dim_;
      } else {
        out << "box" << format_site(upper_);
      }
      break;
    }
    case Shape::kSites:
      out << size_ << " sites in Z^" << dim_;
      break;
  }
  return out.str();
}

bool Volume::operator==(const Volume& other) const {
  return shape_ == other.shape_ && dim_ == other.dim_ && lower_ == other.lower_ &&
         upper_ == other.upper_ && sites_ == other.sites_;
}

int sup_norm(std::span<const int> site) {
  int m = 0;
  for (int c : site) m = std::max(m, std::abs(c));
  return m;
}

std::string format_site(std::span<const int> site) {
  std::string out = "(";
  for (std::size_t i = 0; i < site.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(site[i]);
  }
  out += ')';
  return out;
}

Site parse_site(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  if (text.size() < 2 || text.front() != '(' || text.back() != ')') {
    throw InvalidArgument("site must look like (x,y,...): " + std::string(text));
  }
  text = text.substr(1, text.size() - 2);
  Site out;
  while (true) {
    const auto comma = text.find(',');
    auto part = trim(text.substr(0, comma));
    int value = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (part.empty() || ec != std::errc{} || ptr != part.data() + part.size()) {
      throw InvalidArgument("bad site coordinate: " + std::string(part));
    }
    out.push_back(value);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace arw
