#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tfm {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Thrown when an argument is outside the mathematical domain of an operation
/// (value outside the support, inverse above the virtual-value range, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Thrown for malformed or infeasible configuration (bad segments, capacity
/// violations, unknown keys). Carries a line/column when parsed from a file.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg, int line = -1, int column = -1)
      : std::runtime_error(msg), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Thrown when a query is asked of a mechanism that does not support it
/// (e.g. a scalar critical bid at a randomized rank).
class UnsupportedQueryError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Thrown when allocation monotonicity fails while computing a payment.
/// Carries the witness bid pair (lower bid, higher bid) with alloc(lo) > alloc(hi).
class IncentiveViolationError : public std::runtime_error {
 public:
  IncentiveViolationError(const std::string& msg, double lo, double hi)
      : std::runtime_error(msg), lo_(lo), hi_(hi) {}
  double witness_lo() const { return lo_; }
  double witness_hi() const { return hi_; }

 private:
  double lo_;
  double hi_;
};

/// A profile of bids kept sorted in descending order. Rank r (0-based) is the
/// r-th largest bid.
class BidProfile {
 public:
  BidProfile() = default;
  explicit BidProfile(std::vector<double> values) : values_(std::move(values)) {
    for (double v : values_) {
      if (!(v >= 0.0)) throw DomainError("BidProfile: bids must be nonnegative");
    }
    std::sort(values_.begin(), values_.end(), std::greater<double>());
  }

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double at_rank(std::size_t r) const { return values_.at(r); }
  const std::vector<double>& values() const { return values_; }
  std::span<const double> span() const { return values_; }

  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  /// Profile with rank r removed.
  BidProfile without_rank(std::size_t r) const {
    std::vector<double> v = values_;
    v.erase(v.begin() + static_cast<std::ptrdiff_t>(r));
    BidProfile out;
    out.values_ = std::move(v);  // still sorted
    return out;
  }

  /// Profile with one extra bid inserted (keeps descending order).
  BidProfile with_bid(double bid) const {
    if (!(bid >= 0.0)) throw DomainError("BidProfile: bids must be nonnegative");
    std::vector<double> v = values_;
    auto pos = std::lower_bound(v.begin(), v.end(), bid, std::greater<double>());
    v.insert(pos, bid);
    BidProfile out;
    out.values_ = std::move(v);
    return out;
  }

 private:
  std::vector<double> values_;
};

/// Block capacity: infinite, or a finite total allocation budget.
struct Capacity {
  bool is_finite = false;
  double omega = kInf;

  static Capacity infinite() { return Capacity{false, kInf}; }
  static Capacity finite(double omega) {
    if (!(omega >= 0.0)) throw ConfigError("capacity must be nonnegative");
    return Capacity{true, omega};
  }
};

/// Space in which the allocation engine maximizes: virtual values (off-chain
/// revenue analysis) or raw values (global-coalition analysis).
enum class ObjectiveSpace { Virtual, Value };

/// Full result of running a mechanism on a bid profile. `alloc` and
/// `payments` are indexed by rank of the sorted profile; `burn` is the total
/// burn with the empty-block burn (negated block reward) folded in.
struct Outcome {
  std::vector<double> alloc;
  std::vector<double> payments;
  double burn = 0.0;
};

}  // namespace tfm
