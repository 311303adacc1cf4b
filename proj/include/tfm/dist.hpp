#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tfm/rng.hpp"
#include "tfm/types.hpp"

namespace tfm {

/// One piece of a piecewise-constant density: density `c` on [lo, hi).
struct DensityPiece {
  double lo = 0.0;
  double hi = 0.0;
  double density = 0.0;
};

struct SmoothnessReport {
  bool continuous_phi = true;
  double prob_nonpos_vv = 0.0;
  bool smooth = false;      // continuous_phi && prob_nonpos_vv > 0
  double max_jump = 0.0;    // largest persisting phi gap found on the grid
  double jump_at = 0.0;     // location of that gap (meaningful when !continuous_phi)
  bool has_atom_at_sup = false;
};

/// A regular value prior. Immutable after construction and safe to share
/// across threads; samplers take explicit seeds.
///
/// Regularity (non-decreasing virtual value phi(v) = v - (1-F(v))/f(v)) is
/// validated on a 1024-point support grid at construction, along with
/// phi(v) <= v and the density integrating to 1 - atom_at_sup.
class Distribution {
 public:
  enum class Kind { Exponential, Uniform, CappedPareto, PiecewiseDensity };

  /// Exponential with the given mean: F(v) = 1 - e^{-v/mean}, phi(v) = v - mean.
  static Distribution exponential(double mean);
  /// Uniform on [lo, hi] (lo >= 0): phi(v) = 2v - hi.
  static Distribution uniform(double lo, double hi);
  /// Pareto-type body F(v) = v/(v+2) on [0,2), a thin bridge piece on
  /// [2, 2+epsilon), and an atom of mass 1/4 at the cap 2+epsilon. Its
  /// virtual value is the step -2 / (2-epsilon) / (2+epsilon): a regular
  /// distribution with a discontinuous phi and a point mass at the supremum.
  static Distribution capped_pareto(double epsilon);
  /// Piecewise-constant density; pieces must be contiguous, nonnegative and
  /// integrate to 1. Each piece carries closed-form cdf/pdf/phi.
  static Distribution piecewise_density(std::vector<DensityPiece> pieces);

  Kind kind() const { return kind_; }
  const char* kind_name() const;

  double cdf(double v) const;
  /// Density on the continuum part of the support (left-limit at an atom).
  double pdf(double v) const;
  double support_lo() const { return lo_; }
  double support_hi() const { return hi_; }  // kInf when unbounded
  bool bounded() const { return hi_ < kInf; }
  double atom_at_sup() const { return atom_; }

  /// phi(v) = v - (1-F(v))/f(v), closed form per piece. Throws DomainError
  /// outside the support.
  double virtual_value(double v) const;
  /// sup{ v : phi(v) < phi } -- the ordinary inverse where phi is continuous
  /// and strictly increasing; the jump location at discontinuities. Throws
  /// DomainError when phi exceeds the virtual value at the supremum.
  double inverse_virtual_value(double phi) const;
  /// Equals inverse_virtual_value(0).
  double monopoly_reserve() const;
  /// Virtual value at the supremum (+inf when unbounded).
  double phi_at_sup() const;

  /// Inverse CDF; u in [0,1). Atoms map the corresponding u-interval to the
  /// atom location.
  double quantile(double u) const;
  double draw(Rng& rng) const { return quantile(rng.uniform01()); }
  /// n iid draws, sorted descending; identical seeds give identical profiles.
  BidProfile sample(std::size_t n, std::uint64_t seed) const;

  SmoothnessReport smoothness_check() const;

  /// Interior points where cdf/pdf/phi switch analytic form (piece edges);
  /// integrators split at these.
  std::vector<double> analytic_breakpoints() const;

  // Parameters, for config round-trips.
  double param(const char* name) const;
  const std::vector<DensityPiece>& pieces() const { return pieces_; }

 private:
  Distribution() = default;
  void validate() const;

  Kind kind_ = Kind::Exponential;
  double lo_ = 0.0;
  double hi_ = kInf;
  double atom_ = 0.0;
  double mean_ = 1.0;     // Exponential
  double eps_ = 0.1;      // CappedPareto
  std::vector<DensityPiece> pieces_;
  std::vector<double> piece_cum_;  // cumulative mass at piece starts
};

/// The base distribution conditioned on phi(v) <= 0. Rejection-sampled;
/// every sample satisfies phi(v) <= 1e-12.
class ConditionalNegVV {
 public:
  explicit ConditionalNegVV(const Distribution& base);
  const Distribution& base() const { return *base_; }
  double prob_mass() const { return prob_; }

  double draw_one(Rng& rng) const;
  BidProfile sample(std::size_t n, std::uint64_t seed) const;

 private:
  const Distribution* base_;
  double reserve_;
  double prob_;
};

}  // namespace tfm
