#include "arw/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "arw/errors.hpp"

namespace arw::oracle {

namespace {

struct StateHash {
  std::size_t operator()(const std::vector<std::int8_t>& s) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (auto v : s) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint8_t>(v)) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

constexpr std::int8_t kSleep = -1;

struct Edge {
  std::size_t to;
  double p;
  Rational exact;
  bool jump_out;  // chance-counting transition
};

enum class ChainKind { kStab, kChances };

// Absorbing chain over site-state vectors reachable from the initial state.
class Chain {
 public:
  Chain(const Configuration& initial, const Params& params, const JumpKernel& kernel,
        const Mode& mode, ChainKind kind, const Options& options, bool rational)
      : params_(params), kernel_(kernel), kind_(kind), options_(options), rational_(rational) {
    const Volume& volume = initial.volume();
    sites_ = volume.enumerate();
    const std::size_t n = sites_.size();
    region_.assign(n, 0);
    for (const auto& s : mode.region) {
      auto it = std::lower_bound(sites_.begin(), sites_.end(), s);
      if (it != sites_.end() && *it == s) region_[static_cast<std::size_t>(it - sites_.begin())] = 1;
    }
    mode_kind_ = mode.kind;
    const Site origin(static_cast<std::size_t>(volume.dim()), 0);
    origin_ = static_cast<std::size_t>(std::lower_bound(sites_.begin(), sites_.end(), origin) - sites_.begin());
    for (const auto& e : kernel.support()) {
      std::vector<std::ptrdiff_t> row(n, -1);
      for (std::size_t i = 0; i < n; ++i) {
        Site t = sites_[i];
        for (std::size_t k = 0; k < t.size(); ++k) t[k] += e.offset[k];
        auto it = std::lower_bound(sites_.begin(), sites_.end(), t);
        if (it != sites_.end() && *it == t) row[i] = it - sites_.begin();
      }
      target_.push_back(std::move(row));
      kernel_p_.push_back(e.prob);
      if (rational_) kernel_q_.push_back(to_rational(e.prob));
    }
    if (rational_) {
      sleep_q_ = to_rational(params.sleep_prob());
      jump_q_ = Rational(1) - sleep_q_;
    }
    std::vector<std::int8_t> init(n);
    for (std::size_t i = 0; i < n; ++i) init[i] = static_cast<std::int8_t>(initial.states()[i]);
    build(std::move(init));
  }

  std::size_t size() const { return states_.size(); }
  const std::vector<std::int8_t>& state(std::size_t i) const { return states_[i]; }
  bool terminal(std::size_t i) const { return terminal_[i] != 0; }
  const std::vector<Edge>& edges(std::size_t i) const { return edges_[i]; }
  std::size_t origin() const { return origin_; }
  const std::vector<Site>& sites() const { return sites_; }

 private:
  bool unstable(const std::vector<std::int8_t>& s, std::size_t i) const {
    const bool in_region = region_[i] != 0;
    switch (mode_kind_) {
      case Mode::Kind::kLegal:
        return s[i] >= 1;
      case Mode::Kind::kWeak:
        return in_region ? s[i] >= 2 : s[i] >= 1;
      case Mode::Kind::kStrong:
        return in_region ? s[i] != 0 : s[i] >= 1;
    }
    return false;
  }

  std::size_t intern(std::vector<std::int8_t> s, std::vector<std::vector<std::int8_t>>& queue) {
    auto [it, inserted] = index_.try_emplace(s, states_.size());
    if (inserted) {
      if (states_.size() >= options_.limits.max_states) {
        throw ResourceError("oracle state space exceeds " + std::to_string(options_.limits.max_states) +
                                " states",
                            static_cast<std::int64_t>(options_.limits.max_states));
      }
      states_.push_back(s);
      queue.push_back(std::move(s));
    }
    return it->second;
  }

  static void move_one(std::vector<std::int8_t>& s, std::size_t from, std::ptrdiff_t to) {
    if (s[from] == kSleep) s[from] = 1;
    --s[from];
    if (to < 0) return;
    auto& t = s[static_cast<std::size_t>(to)];
    t = t == kSleep ? 2 : static_cast<std::int8_t>(t + 1);
  }

  void build(std::vector<std::int8_t> init) {
    std::vector<std::vector<std::int8_t>> queue;
    intern(std::move(init), queue);
    const std::size_t n = sites_.size();
    for (std::size_t head = 0; head < states_.size(); ++head) {
      const std::vector<std::int8_t> s = states_[head];
      std::ptrdiff_t site = -1;
      if (options_.order == ToppleOrder::kLexFirst) {
        for (std::size_t i = 0; i < n && site < 0; ++i) {
          if (unstable(s, i)) site = static_cast<std::ptrdiff_t>(i);
        }
      } else {
        for (std::size_t i = n; i-- > 0 && site < 0;) {
          if (unstable(s, i)) site = static_cast<std::ptrdiff_t>(i);
        }
      }
      std::vector<Edge> out;
      if (site < 0) {
        if (kind_ == ChainKind::kStab || s[origin_] == 0) {
          terminal_.push_back(1);
          edges_.push_back({});
          continue;
        }
        // Jump the origin particle out: the first jump in its stack.
        for (std::size_t k = 0; k < kernel_p_.size(); ++k) {
          auto t = s;
          move_one(t, origin_, target_[k][origin_]);
          out.push_back({intern(std::move(t), queue), kernel_p_[k],
                         rational_ ? kernel_q_[k] : Rational(0), true});
        }
      } else {
        const auto x = static_cast<std::size_t>(site);
        const double ls = params_.sleep_prob();
        const double lj = params_.jump_prob();
        if (ls > 0.0) {
          auto t = s;
          if (t[x] == kSleep || t[x] == 1) t[x] = kSleep;
          out.push_back({intern(std::move(t), queue), ls, rational_ ? sleep_q_ : Rational(0), false});
        }
        if (lj > 0.0) {
          for (std::size_t k = 0; k < kernel_p_.size(); ++k) {
            auto t = s;
            move_one(t, x, target_[k][x]);
            out.push_back({intern(std::move(t), queue), lj * kernel_p_[k],
                           rational_ ? jump_q_ * kernel_q_[k] : Rational(0), false});
          }
        }
      }
      terminal_.push_back(0);
      edges_.push_back(normalize(head, std::move(out)));
    }
  }

  // Merges parallel edges and removes the self-loop by conditioning on
  // leaving the state.
  std::vector<Edge> normalize(std::size_t self, std::vector<Edge> out) const {
    std::map<std::pair<std::size_t, bool>, Edge> merged;
    double self_p = 0.0;
    Rational self_q = 0;
    for (auto& e : out) {
      if (e.to == self && !e.jump_out) {
        self_p += e.p;
        if (rational_) self_q += e.exact;
        continue;
      }
      auto key = std::make_pair(e.to, e.jump_out);
      auto it = merged.find(key);
      if (it == merged.end()) {
        merged.emplace(key, e);
      } else {
        it->second.p += e.p;
        if (rational_) it->second.exact += e.exact;
      }
    }
    if (merged.empty() || self_p >= 1.0 - 1e-15) {
      throw ModelError("oracle chain has a state that can never be left; no stable state is reachable");
    }
    std::vector<Edge> result;
    for (auto& [key, e] : merged) {
      e.p /= (1.0 - self_p);
      if (rational_) e.exact /= (Rational(1) - self_q);
      result.push_back(e);
    }
    return result;
  }

  const Params& params_;
  const JumpKernel& kernel_;
  ChainKind kind_;
  Options options_;
  bool rational_;
  Mode::Kind mode_kind_ = Mode::Kind::kLegal;
  std::vector<Site> sites_;
  std::vector<std::uint8_t> region_;
  std::size_t origin_ = 0;
  std::vector<std::vector<std::ptrdiff_t>> target_;
  std::vector<double> kernel_p_;
  std::vector<Rational> kernel_q_;
  Rational sleep_q_, jump_q_;
  std::vector<std::vector<std::int8_t>> states_;
  std::unordered_map<std::vector<std::int8_t>, std::size_t, StateHash> index_;
  std::vector<std::uint8_t> terminal_;
  std::vector<std::vector<Edge>> edges_;
};

// Sparse Gaussian elimination over exact rationals. Matrices here are
// nonsingular M-matrices, so no pivoting is needed.
std::vector<Rational> solve_rational(std::vector<std::map<std::size_t, Rational>> rows,
                                     std::vector<Rational> rhs) {
  const std::size_t n = rows.size();
  std::vector<std::set<std::size_t>> col_rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, v] : rows[i]) col_rows[j].insert(i);
  }
  for (std::size_t k = 0; k < n; ++k) {
    const Rational pivot = rows[k].at(k);
    for (std::size_t i : std::vector<std::size_t>(col_rows[k].begin(), col_rows[k].end())) {
      if (i <= k) continue;
      auto it = rows[i].find(k);
      if (it == rows[i].end()) continue;
      const Rational factor = it->second / pivot;
      for (const auto& [j, v] : rows[k]) {
        if (j < k) continue;
        auto& target = rows[i][j];
        target -= factor * v;
        col_rows[j].insert(i);
      }
      rows[i].erase(k);
      rhs[i] -= factor * rhs[k];
    }
  }
  std::vector<Rational> x(n);
  for (std::size_t k = n; k-- > 0;) {
    Rational acc = rhs[k];
    for (const auto& [j, v] : rows[k]) {
      if (j > k) acc -= v * x[j];
    }
    x[k] = acc / rows[k].at(k);
  }
  return x;
}

struct Solved {
  std::vector<double> x;
  std::vector<Rational> exact;
  double residual = 0.0;
};

// Solves (I - W) x = b over the non-terminal states, where W holds edge
// weights between non-terminal states. `transpose` solves (I - W)^T x = b.
template <class Weight, class ExactWeight>
Solved solve_chain(const Chain& chain, const std::vector<std::size_t>& index_of,
                   const std::vector<std::size_t>& transient, Weight weight, ExactWeight exact_weight,
                   const std::vector<double>& b, const std::vector<Rational>* b_exact, bool transpose) {
  const std::size_t m = transient.size();
  Solved out;
  if (m == 0) return out;
  if (b_exact) {
    std::vector<std::map<std::size_t, Rational>> rows(m);
    for (std::size_t r = 0; r < m; ++r) rows[r][r] = 1;
    for (std::size_t r = 0; r < m; ++r) {
      for (const auto& e : chain.edges(transient[r])) {
        if (chain.terminal(e.to)) continue;
        const std::size_t c = index_of[e.to];
        const Rational w = exact_weight(e);
        if (transpose) {
          rows[c][r] -= w;
        } else {
          rows[r][c] -= w;
        }
      }
    }
    out.exact = solve_rational(std::move(rows), *b_exact);
    out.x.resize(m);
    for (std::size_t i = 0; i < m; ++i) out.x[i] = out.exact[i].convert_to<double>();
    return out;
  }
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t r = 0; r < m; ++r) {
    trips.emplace_back(static_cast<int>(r), static_cast<int>(r), 1.0);
    for (const auto& e : chain.edges(transient[r])) {
      if (chain.terminal(e.to)) continue;
      const std::size_t c = index_of[e.to];
      const double w = weight(e);
      if (transpose) {
        trips.emplace_back(static_cast<int>(c), static_cast<int>(r), -w);
      } else {
        trips.emplace_back(static_cast<int>(r), static_cast<int>(c), -w);
      }
    }
  }
  Eigen::SparseMatrix<double> a(static_cast<int>(m), static_cast<int>(m));
  a.setFromTriplets(trips.begin(), trips.end());
  a.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw ModelError("oracle linear system is singular");
  Eigen::VectorXd rhs(static_cast<int>(m));
  for (std::size_t i = 0; i < m; ++i) rhs[static_cast<int>(i)] = b[i];
  Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw ModelError("oracle linear solve failed");
  out.residual = (a * x - rhs).cwiseAbs().maxCoeff();
  out.x.assign(x.data(), x.data() + m);
  return out;
}

bool use_rational(const Configuration& initial, const Options& options) {
  switch (options.arithmetic) {
    case Arithmetic::kRational:
      return true;
    case Arithmetic::kFloating:
      return false;
    case Arithmetic::kAuto:
      break;
  }
  return initial.volume().size() <= options.limits.rational_max_sites &&
         initial.mass() <= options.limits.rational_max_mass;
}

void check_limits(const Configuration& initial, const JumpKernel& kernel, const Options& options) {
  if (kernel.dim() != initial.volume().dim()) throw InvalidArgument("kernel dimension does not match the volume");
  if (initial.volume().size() > options.limits.max_sites) {
    throw ResourceError("oracle volume has " + std::to_string(initial.volume().size()) +
                            " sites; the limit is " + std::to_string(options.limits.max_sites),
                        static_cast<std::int64_t>(options.limits.max_sites));
  }
  if (initial.mass() > options.limits.max_mass) {
    throw ResourceError("oracle initial mass " + std::to_string(initial.mass()) + " exceeds the limit " +
                            std::to_string(options.limits.max_mass),
                        static_cast<std::int64_t>(options.limits.max_mass));
  }
  if (initial.mass() > 100) throw ResourceError("oracle mass is capped at 100", 100);
}

struct Indexed {
  std::vector<std::size_t> transient;
  std::vector<std::size_t> index_of;
};

Indexed index_transient(const Chain& chain) {
  Indexed ix;
  ix.index_of.assign(chain.size(), static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (!chain.terminal(i)) {
      ix.index_of[i] = ix.transient.size();
      ix.transient.push_back(i);
    }
  }
  return ix;
}

}  // namespace

Rational to_rational(double x, std::int64_t max_den) {
  if (!std::isfinite(x)) throw InvalidArgument("cannot convert a non-finite value to a rational");
  // Continued-fraction convergents.
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double r = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double a = std::floor(r);
    if (std::abs(a) > 9e15) break;
    const auto ai = static_cast<std::int64_t>(a);
    const std::int64_t q2 = ai * q1 + q0;
    if (q2 > max_den) break;
    const std::int64_t p2 = ai * p1 + p0;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const double approx = static_cast<double>(p1) / static_cast<double>(q1);
    if (std::abs(approx - x) <= 1e-14 * std::max(1.0, std::abs(x))) return Rational(p1, q1);
    const double frac = r - a;
    if (frac == 0.0) break;
    r = 1.0 / frac;
  }
  int exp = 0;
  const double mant = std::frexp(x, &exp);
  const auto scaled = static_cast<std::int64_t>(std::ldexp(mant, 53));
  Rational out(scaled);
  const int shift = exp - 53;
  boost::multiprecision::cpp_int pow2 = 1;
  pow2 <<= std::abs(shift);
  if (shift >= 0) {
    out *= Rational(pow2);
  } else {
    out /= Rational(pow2);
  }
  return out;
}

Distribution exact_stab_distribution(const Configuration& initial, const Params& params,
                                     const JumpKernel& kernel, const Mode& mode, const Options& options) {
  check_limits(initial, kernel, options);
  const bool rational = use_rational(initial, options);
  Chain chain(initial, params, kernel, mode, ChainKind::kStab, options, rational);
  const auto ix = index_transient(chain);
  Distribution dist;
  dist.rational = rational;
  dist.transient_states = ix.transient.size();

  std::map<std::size_t, double> absorbed;
  std::map<std::size_t, Rational> absorbed_q;
  if (chain.terminal(0)) {
    absorbed[0] = 1.0;
    absorbed_q[0] = 1;
  } else {
    // Expected visits y solve (I - Q)^T y = e_init.
    std::vector<double> b(ix.transient.size(), 0.0);
    std::vector<Rational> bq(rational ? ix.transient.size() : 0, Rational(0));
    b[ix.index_of[0]] = 1.0;
    if (rational) bq[ix.index_of[0]] = 1;
    const auto y = solve_chain(
        chain, ix.index_of, ix.transient, [](const Edge& e) { return e.p; },
        [](const Edge& e) { return e.exact; }, b, rational ? &bq : nullptr, true);
    dist.residual = y.residual;
    for (std::size_t r = 0; r < ix.transient.size(); ++r) {
      for (const auto& e : chain.edges(ix.transient[r])) {
        if (!chain.terminal(e.to)) continue;
        absorbed[e.to] += y.x[r] * e.p;
        if (rational) absorbed_q[e.to] += y.exact[r] * e.exact;
      }
    }
  }
  for (const auto& [i, p] : absorbed) {
    Configuration c(initial.volume());
    const auto& s = chain.state(i);
    for (std::size_t k = 0; k < s.size(); ++k) c.states()[k] = s[k];
    StableOutcome o{std::move(c), p, std::nullopt};
    if (rational) {
      o.exact = absorbed_q[i];
      o.probability = absorbed_q[i].convert_to<double>();
    }
    dist.outcomes.push_back(std::move(o));
  }
  std::stable_sort(dist.outcomes.begin(), dist.outcomes.end(), [](const StableOutcome& a, const StableOutcome& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    return std::lexicographical_compare(a.config.states().begin(), a.config.states().end(),
                                        b.config.states().begin(), b.config.states().end());
  });
  return dist;
}

Value exact_quantity(const Configuration& initial, const Params& params, const JumpKernel& kernel,
                     Quantity quantity, double s, const Options& options) {
  check_limits(initial, kernel, options);
  const Site origin(static_cast<std::size_t>(initial.volume().dim()), 0);
  if (!initial.volume().contains(origin)) throw InvalidArgument("volume must contain the origin");
  const bool rational = use_rational(initial, options);
  Value out;

  if (quantity == Quantity::kOriginOccupied || quantity == Quantity::kMassRetained) {
    const auto dist = exact_stab_distribution(initial, params, kernel, Mode::legal(), options);
    const std::size_t o = initial.rank(origin);
    Rational acc = 0;
    for (const auto& outcome : dist.outcomes) {
      const auto st = outcome.config.states()[o];
      const double w = quantity == Quantity::kOriginOccupied ? (st != 0 ? 1.0 : 0.0)
                                                             : static_cast<double>(outcome.config.mass());
      out.value += w * outcome.probability;
      if (outcome.exact) acc += Rational(static_cast<std::int64_t>(w)) * *outcome.exact;
    }
    if (dist.rational) {
      out.exact = acc;
      out.value = acc.convert_to<double>();
    }
    return out;
  }

  if (!initial.all_active()) throw InvalidArgument("chance quantities need an all-active initial configuration");
  if (quantity == Quantity::kChPgf && !(s >= 0.0 && s <= 1.0)) {
    throw InvalidArgument("pgf argument must lie in [0, 1]");
  }
  Chain chain(initial, params, kernel, Mode::weak_origin(initial.volume().dim()), ChainKind::kChances,
              options, rational);
  const auto ix = index_transient(chain);
  const std::size_t m = ix.transient.size();
  if (chain.terminal(0)) {
    out.value = quantity == Quantity::kMeanCh ? 0.0 : 1.0;
    if (rational) out.exact = Rational(quantity == Quantity::kMeanCh ? 0 : 1);
    return out;
  }
  const Rational s_q = rational ? to_rational(s) : Rational(0);
  if (quantity == Quantity::kMeanCh) {
    // f = W f + r with r the expected chance reward of one transition.
    std::vector<double> b(m, 0.0);
    std::vector<Rational> bq(rational ? m : 0, Rational(0));
    for (std::size_t r = 0; r < m; ++r) {
      for (const auto& e : chain.edges(ix.transient[r])) {
        if (!e.jump_out) continue;
        b[r] += e.p;
        if (rational) bq[r] += e.exact;
      }
    }
    const auto f = solve_chain(
        chain, ix.index_of, ix.transient, [](const Edge& e) { return e.p; },
        [](const Edge& e) { return e.exact; }, b, rational ? &bq : nullptr, false);
    out.value = f.x[ix.index_of[0]];
    if (rational) out.exact = f.exact[ix.index_of[0]];
    return out;
  }
  // E[s^Ch]: jump-out transitions carry a factor s.
  std::vector<double> b(m, 0.0);
  std::vector<Rational> bq(rational ? m : 0, Rational(0));
  for (std::size_t r = 0; r < m; ++r) {
    for (const auto& e : chain.edges(ix.transient[r])) {
      if (!chain.terminal(e.to)) continue;
      b[r] += e.jump_out ? s * e.p : e.p;
      if (rational) bq[r] += e.jump_out ? s_q * e.exact : e.exact;
    }
  }
  const auto f = solve_chain(
      chain, ix.index_of, ix.transient, [s](const Edge& e) { return e.jump_out ? s * e.p : e.p; },
      [&s_q](const Edge& e) { return e.jump_out ? Rational(s_q * e.exact) : e.exact; }, b,
      rational ? &bq : nullptr, false);
  out.value = f.x[ix.index_of[0]];
  if (rational) out.exact = f.exact[ix.index_of[0]];
  return out;
}

}  // namespace arw::oracle
