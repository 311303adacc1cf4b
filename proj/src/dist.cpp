#include "tfm/dist.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace tfm {

namespace {

constexpr int kGridPoints = 1024;
constexpr double kPhiBisectTol = 1e-12;  // absolute tolerance on value
constexpr int kPhiBisectIters = 200;

double require_in_support(double v, double lo, double hi, const char* what) {
  if (!(v >= lo) || v > hi) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s: value %.17g outside support [%.17g, %.17g]",
                  what, v, lo, hi);
    throw DomainError(buf);
  }
  return v;
}

}  // namespace

Distribution Distribution::exponential(double mean) {
  if (!(mean > 0.0)) throw ConfigError("exponential: mean must be positive");
  Distribution d;
  d.kind_ = Kind::Exponential;
  d.mean_ = mean;
  d.lo_ = 0.0;
  d.hi_ = kInf;
  d.validate();
  return d;
}

Distribution Distribution::uniform(double lo, double hi) {
  if (!(lo >= 0.0) || !(hi > lo)) throw ConfigError("uniform: need 0 <= lo < hi");
  Distribution d;
  d.kind_ = Kind::Uniform;
  d.lo_ = lo;
  d.hi_ = hi;
  d.validate();
  return d;
}

Distribution Distribution::capped_pareto(double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 2.0)) {
    throw ConfigError("capped_pareto: epsilon must be in (0, 2)");
  }
  Distribution d;
  d.kind_ = Kind::CappedPareto;
  d.eps_ = epsilon;
  d.lo_ = 0.0;
  d.hi_ = 2.0 + epsilon;
  d.atom_ = 0.25;
  d.validate();
  return d;
}

Distribution Distribution::piecewise_density(std::vector<DensityPiece> pieces) {
  if (pieces.empty()) throw ConfigError("piecewise: need at least one piece");
  double mass = 0.0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& p = pieces[i];
    if (!(p.lo >= 0.0) || !(p.hi > p.lo)) throw ConfigError("piecewise: bad piece range");
    if (!(p.density > 0.0)) throw ConfigError("piecewise: density must be positive");
    if (i > 0 && std::abs(p.lo - pieces[i - 1].hi) > 1e-12) {
      throw ConfigError("piecewise: pieces must be contiguous");
    }
    mass += p.density * (p.hi - p.lo);
  }
  if (std::abs(mass - 1.0) > 1e-9) throw ConfigError("piecewise: total mass must be 1");
  Distribution d;
  d.kind_ = Kind::PiecewiseDensity;
  d.lo_ = pieces.front().lo;
  d.hi_ = pieces.back().hi;
  d.pieces_ = std::move(pieces);
  d.piece_cum_.resize(d.pieces_.size());
  double c = 0.0;
  for (std::size_t i = 0; i < d.pieces_.size(); ++i) {
    d.piece_cum_[i] = c;
    c += d.pieces_[i].density * (d.pieces_[i].hi - d.pieces_[i].lo);
  }
  d.validate();
  return d;
}

const char* Distribution::kind_name() const {
  switch (kind_) {
    case Kind::Exponential: return "exponential";
    case Kind::Uniform: return "uniform";
    case Kind::CappedPareto: return "capped_pareto";
    case Kind::PiecewiseDensity: return "piecewise";
  }
  return "?";
}

double Distribution::param(const char* name) const {
  std::string n = name;
  if (n == "mean") return mean_;
  if (n == "lo") return lo_;
  if (n == "hi") return hi_;
  if (n == "epsilon") return eps_;
  throw ConfigError("unknown distribution parameter: " + n);
}

double Distribution::cdf(double v) const {
  if (v < lo_) return 0.0;
  if (v >= hi_) return 1.0;
  switch (kind_) {
    case Kind::Exponential:
      return 1.0 - std::exp(-v / mean_);
    case Kind::Uniform:
      return (v - lo_) / (hi_ - lo_);
    case Kind::CappedPareto:
      if (v < 2.0) return v / (v + 2.0);
      return 1.0 - eps_ / (2.0 * (v - 2.0 + eps_));
    case Kind::PiecewiseDensity: {
      for (std::size_t i = 0; i < pieces_.size(); ++i) {
        if (v < pieces_[i].hi) return piece_cum_[i] + pieces_[i].density * (v - pieces_[i].lo);
      }
      return 1.0;
    }
  }
  return 0.0;
}

double Distribution::pdf(double v) const {
  require_in_support(v, lo_, hi_, "pdf");
  switch (kind_) {
    case Kind::Exponential:
      return std::exp(-v / mean_) / mean_;
    case Kind::Uniform:
      return 1.0 / (hi_ - lo_);
    case Kind::CappedPareto:
      if (v < 2.0) return 2.0 / ((v + 2.0) * (v + 2.0));
      // Left-limit density on the bridge piece; the atom itself has no density.
      return eps_ / (2.0 * (v - 2.0 + eps_) * (v - 2.0 + eps_));
    case Kind::PiecewiseDensity: {
      for (const auto& p : pieces_) {
        if (v < p.hi) return p.density;
      }
      return pieces_.back().density;
    }
  }
  return 0.0;
}

double Distribution::virtual_value(double v) const {
  require_in_support(v, lo_, hi_, "virtual_value");
  switch (kind_) {
    case Kind::Exponential:
      return v - mean_;
    case Kind::Uniform:
      return 2.0 * v - hi_;
    case Kind::CappedPareto:
      if (v < 2.0) return -2.0;
      if (v < hi_) return 2.0 - eps_;
      return 2.0 + eps_;  // atom at the cap
    case Kind::PiecewiseDensity: {
      if (v >= hi_) v = hi_;
      for (std::size_t i = 0; i < pieces_.size(); ++i) {
        const auto& p = pieces_[i];
        if (v < p.hi || i + 1 == pieces_.size()) {
          double F = piece_cum_[i] + p.density * (v - p.lo);
          return v - (1.0 - F) / p.density;
        }
      }
      return v;
    }
  }
  return v;
}

double Distribution::phi_at_sup() const {
  if (!bounded()) return kInf;
  return virtual_value(hi_);
}

double Distribution::inverse_virtual_value(double phi) const {
  if (bounded() && phi > phi_at_sup()) {
    throw DomainError("inverse_virtual_value: phi above the virtual value at the supremum");
  }
  switch (kind_) {
    case Kind::Exponential:
      return std::max(lo_, phi + mean_);
    case Kind::Uniform:
      return std::clamp((phi + hi_) / 2.0, lo_, hi_);
    case Kind::CappedPareto:
      if (phi <= -2.0) return 0.0;
      if (phi <= 2.0 - eps_) return 2.0;
      return 2.0 + eps_;
    case Kind::PiecewiseDensity:
      break;  // generic bisection below
  }
  // Bisection on the monotone phi maintaining phi(lo) < phi <= phi(hi);
  // the common limit is sup{ v : phi(v) < phi }.
  double lo = lo_;
  if (!(virtual_value(lo) < phi)) return lo;  // the set is empty
  double hi = hi_;
  if (!bounded()) {
    hi = std::max(1.0, lo + 1.0);
    while (virtual_value(hi) < phi) hi *= 2.0;
  }
  for (int it = 0; it < kPhiBisectIters && hi - lo > kPhiBisectTol; ++it) {
    double mid = 0.5 * (lo + hi);
    if (virtual_value(mid) < phi) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double Distribution::monopoly_reserve() const { return inverse_virtual_value(0.0); }

double Distribution::quantile(double u) const {
  if (!(u >= 0.0) || u >= 1.0) throw DomainError("quantile: u must be in [0,1)");
  switch (kind_) {
    case Kind::Exponential:
      return -mean_ * std::log1p(-u);
    case Kind::Uniform:
      return lo_ + (hi_ - lo_) * u;
    case Kind::CappedPareto:
      if (u < 0.5) return 2.0 * u / (1.0 - u);
      if (u < 0.75) return 2.0 - eps_ + eps_ / (2.0 * (1.0 - u));
      return hi_;  // atom
    case Kind::PiecewiseDensity: {
      for (std::size_t i = 0; i < pieces_.size(); ++i) {
        double next = (i + 1 < pieces_.size()) ? piece_cum_[i + 1] : 1.0;
        if (u < next) return pieces_[i].lo + (u - piece_cum_[i]) / pieces_[i].density;
      }
      return hi_;
    }
  }
  return lo_;
}

BidProfile Distribution::sample(std::size_t n, std::uint64_t seed) const {
  Rng rng(seed);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = quantile(rng.uniform01());
  return BidProfile(std::move(v));
}

SmoothnessReport Distribution::smoothness_check() const {
  SmoothnessReport rep;
  rep.has_atom_at_sup = atom_ > 0.0;
  rep.prob_nonpos_vv = cdf(monopoly_reserve());

  // Grid over the continuum part of the support (quantile-spaced). Adjacent
  // phi gaps above threshold are refined by bisection: a gap persisting over
  // a vanishing value interval is a genuine discontinuity.
  const double cont_mass = 1.0 - atom_;
  std::vector<double> grid(kGridPoints);
  for (int i = 0; i < kGridPoints; ++i) {
    grid[static_cast<std::size_t>(i)] =
        quantile(cont_mass * (static_cast<double>(i) + 0.5) / kGridPoints);
  }
  double phimax = 1.0;
  for (double g : grid) phimax = std::max(phimax, std::abs(virtual_value(g)));
  const double jump_tol = 1e-6 * phimax;

  rep.continuous_phi = true;
  for (int i = 0; i + 1 < kGridPoints; ++i) {
    double a = grid[static_cast<std::size_t>(i)];
    double b = grid[static_cast<std::size_t>(i) + 1];
    if (std::abs(virtual_value(b) - virtual_value(a)) <= jump_tol) continue;
    const double width_tol = 1e-12 * std::max(1.0, std::abs(b));
    while (b - a > width_tol) {
      double mid = 0.5 * (a + b);
      if (std::abs(virtual_value(mid) - virtual_value(a)) >
          std::abs(virtual_value(b) - virtual_value(mid))) {
        b = mid;
      } else {
        a = mid;
      }
    }
    double gap = std::abs(virtual_value(b) - virtual_value(a));
    if (gap > jump_tol) {
      rep.continuous_phi = false;
      if (gap > rep.max_jump) {
        rep.max_jump = gap;
        rep.jump_at = b;
      }
    }
  }
  rep.smooth = rep.continuous_phi && rep.prob_nonpos_vv > 0.0;
  return rep;
}

void Distribution::validate() const {
  // Regularity and phi(v) <= v on a quantile grid over the continuum part.
  const double cont_mass = 1.0 - atom_;
  double prev = -kInf;
  for (int i = 0; i < kGridPoints; ++i) {
    double v = quantile(cont_mass * (static_cast<double>(i) + 0.5) / kGridPoints);
    double phi = virtual_value(v);
    if (phi > v + 1e-12) throw ConfigError("distribution: phi(v) > v on the support grid");
    if (phi < prev - 1e-9) {
      throw ConfigError("distribution: virtual value is not non-decreasing (irregular)");
    }
    prev = std::max(prev, phi);
  }
  if (atom_ > 0.0 && phi_at_sup() < prev - 1e-9) {
    throw ConfigError("distribution: virtual value decreases at the supremum atom");
  }
}

std::vector<double> Distribution::analytic_breakpoints() const {
  switch (kind_) {
    case Kind::Exponential:
    case Kind::Uniform:
      return {};
    case Kind::CappedPareto:
      return {2.0};
    case Kind::PiecewiseDensity: {
      std::vector<double> b;
      for (std::size_t i = 1; i < pieces_.size(); ++i) b.push_back(pieces_[i].lo);
      return b;
    }
  }
  return {};
}

ConditionalNegVV::ConditionalNegVV(const Distribution& base)
    : base_(&base), reserve_(base.monopoly_reserve()), prob_(base.cdf(reserve_)) {}

double ConditionalNegVV::draw_one(Rng& rng) const {
  constexpr int kRetryCap = 100000;
  for (int i = 0; i < kRetryCap; ++i) {
    double v = base_->draw(rng);
    if (base_->virtual_value(v) <= 1e-12) return v;
  }
  throw ConfigError(
      "conditional sampler: retry cap exceeded; Pr[phi(v) <= 0] appears to be zero");
}

BidProfile ConditionalNegVV::sample(std::size_t n, std::uint64_t seed) const {
  Rng rng(seed);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = draw_one(rng);
  return BidProfile(std::move(v));
}

}  // namespace tfm
