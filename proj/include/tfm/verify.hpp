#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tfm/dist.hpp"
#include "tfm/identity.hpp"
#include "tfm/mech.hpp"
#include "tfm/parallel.hpp"
#include "tfm/rng.hpp"
#include "tfm/types.hpp"

namespace tfm {

enum class CheckStatus { Pass, Fail, Inconclusive };
const char* to_string(CheckStatus s);

enum class DeviationKind {
  Censor,
  Fabricate,
  CensorFabricate,
  OffchainCoerce,
  EntryFee,
  Rebate,
  Compliant,  // no deviation improves on honest play
};
const char* to_string(DeviationKind k);

/// One concrete manipulation and its replayed effect. `delta` always equals
/// revenue_after - revenue_before for the stated metric, and reported gains
/// are reproducible by replaying `manipulated_bids` through the mechanism.
struct DeviationReport {
  DeviationKind kind = DeviationKind::Compliant;
  std::string metric = "net_revenue";
  std::vector<double> original_bids;
  std::vector<double> manipulated_bids;
  std::vector<double> fabricated_bids;
  std::vector<std::size_t> censored_ranks;
  double revenue_before = 0.0;
  double revenue_after = 0.0;
  double delta = 0.0;
  bool applicable = true;
  std::string note;
};

struct ConditionResult {
  std::string name;
  CheckStatus status = CheckStatus::Pass;
  double worst_margin = kInf;  // most adverse slack observed (negative = violated)
  std::size_t violations = 0;
  std::size_t trials = 0;
  std::vector<DeviationReport> witnesses;  // first 10, in deterministic order
  std::string note;
};

struct CheckReport {
  std::string check_name;
  CheckStatus status = CheckStatus::Pass;
  std::uint64_t seed = 0;
  std::vector<ConditionResult> conditions;
  std::string note;

  void finalize();  // folds condition statuses into `status`
};

inline constexpr std::size_t kMaxWitnesses = 10;

// ---------------------------------------------------------------------------
// Reduction conditions (virtual objective space)
// ---------------------------------------------------------------------------

struct MirParams {
  std::vector<std::size_t> n_list{1, 2, 3};
  std::size_t samples = 10000;
  std::uint64_t seed = kDefaultBaseSeed;
  std::size_t misreport_grid = 9;  // per-user single-coordinate misreports
  std::size_t append_trials = 16;  // nonpositive-virtual-value append draws
  double tol = 1e-9;
};

/// Conditions on the mechanism's own outcome rule, for each n in n_list:
///  (A) optimal-for-n: the truthful profile maximizes the virtual surplus
///      minus burn against sampled and targeted misreport profiles;
///  (B) no allocation at negative virtual values;
///  (C) appending draws conditioned on phi <= 0 leaves the virtual utility
///      unchanged.
/// Passing all three certifies user simplicity + off-chain influence
/// proofness for prior-dependent rules implementing their own payments.
CheckReport check_mir_conditions(const MechanismSpec& m, const Distribution& d,
                                 const MirParams& params, ExecPolicy exec = {});

// ---------------------------------------------------------------------------
// On-chain user simplicity
// ---------------------------------------------------------------------------

struct OncusParams {
  std::size_t n = 2;
  std::size_t samples = 2000;
  std::size_t grid = 64;
  std::uint64_t seed = kDefaultBaseSeed;
  double tol = 1e-9;
  /// Test hook: perturb the outcome (e.g. corrupt payments) before utilities
  /// are compared.
  std::function<void(Outcome&, const BidProfile&)> perturb;
};

/// Truthful dominant-strategy check: for sampled profiles and a per-user
/// misreport grid, truthful utility >= misreport utility.
CheckReport check_oncus(const MechanismSpec& m, const Distribution& d,
                        const OncusParams& params, ExecPolicy exec = {});

// ---------------------------------------------------------------------------
// Miner simplicity for position families
// ---------------------------------------------------------------------------

/// Revenue change from fabricating one bid w below t equal-or-larger bids in
/// a constant-burn position auction:
///   t (w - r) (x_t - x_{t+1}) - beta x_{t+1},   r = g_inverse(beta).
/// Domain error when w < r (such a bid is never allocated).
double fabrication_delta_closed_form(const MechanismSpec& m, const Distribution& d,
                                     std::size_t t, double w);

/// Per-user payment deltas from fabricating w into a profile whose values
/// all exceed g_inverse(beta); used as the closed-form side of the
/// fabrication oracle agreement suite.
struct FabricationDeltas {
  std::vector<double> per_user;  // indexed by rank of the original profile
  double payments_top = 0.0;     // users ranked above w
  double payments_bottom = 0.0;  // users displaced below w
  double extra_burn = 0.0;
  double total = 0.0;            // payments_top + payments_bottom - extra_burn
};
FabricationDeltas fabrication_payment_deltas(const MechanismSpec& m, const Distribution& d,
                                             const BidProfile& bids, double w);

struct OncmsPositionParams {
  std::size_t t_max = 100;
  double tol = 1e-12;
};

/// Exact rank-by-rank test of the miner-simplicity inequality for position
/// auctions with constant marginal burn, a capacity condition, and an
/// analytic tail certificate where the weight family provides one.
CheckReport check_oncms_position(const MechanismSpec& m, const Distribution& d,
                                 const OncmsPositionParams& params = {});

struct OncmsGenposParams {
  std::size_t w_grid = 256;
  std::size_t t_max = 50;
  double tol = 1e-9;
};

/// Generalized-position miner simplicity: the rank-difference convergence
/// inequality and the fabrication-payment vs burn-increase inequality on a
/// quantile w-grid for t <= t_max.
CheckReport check_oncms_genpos(const MechanismSpec& m, const Distribution& d,
                               const OncmsGenposParams& params = {});

// ---------------------------------------------------------------------------
// Brute-force deviation search
// ---------------------------------------------------------------------------

/// Replays one manipulation: censor the given ranks of `bids`, add the
/// fabricated bids, recompute the surviving users' payments on the
/// manipulated profile, and account the burn. This is the ground truth every
/// closed-form delta is checked against.
DeviationReport replay_deviation(const MechanismSpec& m, const Distribution& d,
                                 const BidProfile& bids,
                                 const std::vector<std::size_t>& censored_ranks,
                                 const std::vector<double>& fabricated_bids);

struct DeviationSearchConfig {
  std::size_t max_fabricate = 1;
  std::size_t grid = 64;
  bool allow_censor = true;
  std::size_t max_evaluations = 2'000'000;
};

/// Exhaustive censor-subsets x fabricate-multisets search; real users'
/// payments are recomputed on each manipulated profile via the payment
/// identity. Returns the max-delta deviation (Compliant when nothing beats
/// honest play). Enforces n <= 12.
DeviationReport deviation_search(const MechanismSpec& m, const Distribution& d,
                                 const BidProfile& bids, const DeviationSearchConfig& cfg = {});

// ---------------------------------------------------------------------------
// Counterexample generators for deterministic schedules
// ---------------------------------------------------------------------------

/// For a schedule with an increasing step beta_t < beta_{t+1}: builds the
/// profile with phi(v_i) = beta_i + eps (i <= t), fabricates a bid with phi
/// inside (beta_t, phi(v_t)), and replays; the gain is the fabricated bid
/// minus g_inverse(beta_t). Not applicable when burns are non-increasing.
DeviationReport increasing_marginal_burn_deviation(const Distribution& d,
                                                   const std::vector<double>& betas,
                                                   double eps);

/// For a schedule with a strictly decreasing step: searches block sizes
/// n <= n_cap for the eps/delta profile where the empty block is optimal yet
/// one fabricated bid flips everyone in with positive net revenue.
DeviationReport decreasing_marginal_burn_deviation(const Distribution& d,
                                                   const std::function<double(std::size_t)>& beta,
                                                   std::size_t n_cap);

// ---------------------------------------------------------------------------
// Posted-price tuning
// ---------------------------------------------------------------------------

struct MistuningReport {
  DeviationKind kind = DeviationKind::Compliant;  // Rebate | EntryFee | Compliant
  double price = 0.0;
  double burn = 0.0;
  double phi_at_price = 0.0;
  double offchain_fee = 0.0;      // entry fee (or rebate) per user
  double delta_quadrature = 0.0;  // expected per-user revenue gain
  double delta_mc = 0.0;
  double mc_stderr = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

/// Quantifies the revenue left on the table by a mistuned posted price:
/// rebate gain when the burn is below phi(price), entry-fee gain above it;
/// quadrature cross-checked by Monte Carlo on the same report.
MistuningReport posted_price_mistuning(const Distribution& d, double price, double burn,
                                       std::size_t mc_samples = 100000,
                                       std::uint64_t seed = kDefaultBaseSeed,
                                       ExecPolicy exec = {});

// ---------------------------------------------------------------------------
// Revenue equivalence
// ---------------------------------------------------------------------------

struct RevenueEquivalenceReport {
  double payment_mean = 0.0;
  double virtual_surplus_mean = 0.0;
  double diff_mean = 0.0;
  double diff_stderr = 0.0;
  double z_score = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  bool pass = true;  // |diff| <= 3 paired standard errors
};

RevenueEquivalenceReport mc_revenue_equivalence(const MechanismSpec& m, const Distribution& d,
                                                std::size_t n, std::size_t samples,
                                                std::uint64_t seed = kDefaultBaseSeed,
                                                ExecPolicy exec = {});

// ---------------------------------------------------------------------------
// Global-coalition (value space) suite
// ---------------------------------------------------------------------------

struct GscpParams {
  std::vector<std::size_t> n_list{1, 2, 3};
  std::size_t samples = 10000;
  std::uint64_t seed = kDefaultBaseSeed;
  std::size_t misreport_grid = 9;
  std::size_t append_trials = 16;
  double tol = 1e-9;
  std::size_t t_max = 100;
};

/// Value-space mirror of the reduction conditions (optimal-for-n; appending
/// zero-value bids is neutral), the payments-dominate-burn inequality, and
/// the matching miner-simplicity conditions for position families.
CheckReport check_gscp(const MechanismSpec& m, const Distribution& d, const GscpParams& params,
                       ExecPolicy exec = {});

// ---------------------------------------------------------------------------
// Weight-reading diagnostics
// ---------------------------------------------------------------------------

struct WeightReadingReport {
  double partial_sum_1e6 = 0.0;
  double total_sum = 0.0;
  bool identity_exact_to_100 = false;  // t (x_t - x_{t+1}) == 2 x_{t+1}, exact rationals
  std::size_t first_identity_failure = 0;  // 0 when none
  bool feasible_capacity_one = false;
};

/// Exact-rational diagnostics for the two readings of the harmonic position
/// weights; the verifier reports both rather than silently picking one.
WeightReadingReport weight_reading_report(const PositionWeights& w);

}  // namespace tfm
