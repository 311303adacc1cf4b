#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tfm/dist.hpp"
#include "tfm/types.hpp"

namespace tfm {

// ---------------------------------------------------------------------------
// Families
// ---------------------------------------------------------------------------

/// Posted price with a per-user burn. `BurnAll` routes the whole payment to
/// the burn (burn_per_user is ignored and equals the price).
struct PostedPriceBurn {
  enum class Route { Miner, BurnAll };
  double price = 0.0;
  double burn_per_user = 0.0;
  Route route = Route::Miner;

  double effective_burn() const { return route == Route::BurnAll ? price : burn_per_user; }
};

enum class ScheduleTail { ConstantLast, Infinite };

/// Deterministic mechanism described by marginal burns beta_1..beta_K plus a
/// tail rule. `Infinite` tail means blocks larger than K are never built.
struct DeterministicSchedule {
  std::vector<double> marginal_burns;
  ScheduleTail tail = ScheduleTail::ConstantLast;
  double block_reward_burn = 0.0;  // B_0; the miner's empty-block revenue is -B_0

  double marginal_burn(std::size_t t) const;  // 1-based; +inf past K for Infinite tail
  double burn_for(std::size_t t) const;       // B_t = B_0 + sum_{i<=t} beta_i
  std::size_t max_block_size() const;
};

/// Non-increasing per-rank allocation probabilities x_1 >= x_2 >= ...
struct PositionWeights {
  enum class Kind {
    Harmonic,       // x_t = scale / (t (t+1)); sums to `scale`
    HarmonicFirst,  // x_1 = first, x_t = scale / (t (t+1)) for t >= 2
    Constant,       // x_t = value
    List,           // explicit leading values, then tail
  };
  enum class ListTail { ConstantLast, Zero };

  Kind kind = Kind::Harmonic;
  double scale = 1.0;
  double first = 0.5;
  double value = 0.0;
  std::vector<double> values;
  ListTail list_tail = ListTail::Zero;

  double at(std::size_t t) const;  // 1-based
  double partial_sum(std::size_t t) const;
  double total_sum() const;  // kInf when the series diverges
  bool is_constant() const;
  /// When t (x_t - x_{t+1}) = ratio * x_{t+1} holds for all t >= *valid_from,
  /// the rank-t miner-simplicity inequality reduces to one t-independent
  /// comparison; returns that ratio, or nullopt when no such certificate.
  std::optional<double> tail_ratio(std::size_t* valid_from) const;
};

/// Position auction: allocation by rank only, with marginal burn per unit
/// allocation (scalar when `marginal_burns` has one entry; per-rank list with
/// a constant-last tail otherwise).
struct PositionAuction {
  PositionWeights weights;
  std::vector<double> marginal_burns{0.0};
  double block_reward_burn = 0.0;

  double marginal_burn(std::size_t t) const;  // 1-based
  bool constant_marginal_burn() const { return marginal_burns.size() == 1; }
};

/// Rank-indexed allocation curves x_t(w) = 0 below `gamma`, and
/// 1 - coeff(t) e^{-(w-gamma)} above it. The default coefficient rule
/// coeff(t) = t / (2 (t+1)) makes the curves non-increasing in rank and
/// gives every integral a closed form; a custom list overrides the leading
/// coefficients (used to construct deliberately broken curve families).
struct GenPosCurves {
  double gamma = 0.0;
  std::vector<double> custom_coeffs;

  double coeff(std::size_t t) const;           // 1-based
  double at(std::size_t t, double w) const;
  double integral(std::size_t t, double a, double b) const;  // closed form
};

struct GeneralizedPositionAuction {
  GenPosCurves curves;
  double block_reward_burn = 0.0;
};

// ---------------------------------------------------------------------------
// MechanismSpec
// ---------------------------------------------------------------------------

using FamilyVariant = std::variant<PostedPriceBurn, DeterministicSchedule,
                                   PositionAuction, GeneralizedPositionAuction>;

struct MechanismSpec {
  FamilyVariant family;
  ObjectiveSpace objective = ObjectiveSpace::Virtual;
  Capacity capacity = Capacity::infinite();

  const char* family_name() const;
  double block_reward_burn() const;

  template <class T>
  const T* as() const {
    return std::get_if<T>(&family);
  }

  /// Structural feasibility against a distribution. Throws ConfigError on
  /// violations; returns non-fatal warnings (documented limitations).
  std::vector<std::string> validate(const Distribution& d) const;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Objective transform: virtual value in Virtual space, identity in Value space.
double g_of(const MechanismSpec& m, const Distribution& d, double v);
/// Inverse transform with the supremum convention (identity, clamped at the
/// support floor, in Value space).
double g_inverse(const MechanismSpec& m, const Distribution& d, double g);

/// Per-rank allocation for the sorted profile: the argmax over feasible
/// prefix sizes of the g-surplus minus burn (smallest maximizing prefix on
/// ties), or the rank-indexed curves for generalized position auctions.
std::vector<double> allocate(const MechanismSpec& m, const Distribution& d,
                             const BidProfile& bids);

/// Allocation, payments (payment identity) and burn (burn identity).
Outcome outcome(const MechanismSpec& m, const Distribution& d, const BidProfile& bids);

double miner_revenue(const Outcome& o);
double coalition_utility(const Outcome& o, const BidProfile& bids);

/// The family's direct burn formula (B_t; B_0 + sum beta_i x_i; the
/// closed-form curve identity for generalized families). Cross-checked in
/// tests against the identity-derived burn.
double direct_burn(const MechanismSpec& m, const Distribution& d, const BidProfile& bids,
                   std::span<const double> alloc);

/// Integral of the rank-t curve against the objective measure,
/// int_0^{g(w)} x_t(g^{-1}(s)) ds: closed form when g is affine
/// (exponential/uniform priors), adaptive quadrature otherwise.
double genpos_g_integral(const GeneralizedPositionAuction& gp, const MechanismSpec& m,
                         const Distribution& d, std::size_t rank, double w);

/// Bid levels at which the mechanism's own-bid behavior changes (price,
/// burn-threshold inverses, curve start). Used to seed misreport grids.
std::vector<double> interesting_bids(const MechanismSpec& m, const Distribution& d);

/// Maximum number of bids the mechanism accepts, when it declares one.
/// A schedule with an infinite tail supports at most K bids total, so a
/// miner wanting to fabricate into a full block must censor first.
std::optional<std::size_t> bid_arity_cap(const MechanismSpec& m);

}  // namespace tfm
