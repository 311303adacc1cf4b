#include <algorithm>
#include <cmath>
#include <cstdio>

#include "tfm/verify.hpp"

namespace tfm {

namespace {

const PositionAuction& require_position_const(const MechanismSpec& m, const char* who) {
  auto* pa = m.as<PositionAuction>();
  if (!pa) throw UnsupportedQueryError(std::string(who) + ": not a position auction");
  if (!pa->constant_marginal_burn()) {
    throw UnsupportedQueryError(std::string(who) +
                                ": requires a constant marginal burn per unit allocation");
  }
  return *pa;
}

}  // namespace

double fabrication_delta_closed_form(const MechanismSpec& m, const Distribution& d,
                                     std::size_t t, double w) {
  const auto& pa = require_position_const(m, "fabrication_delta_closed_form");
  const double beta = pa.marginal_burn(1);
  const double r = g_inverse(m, d, beta);
  if (w < r - 1e-12) {
    throw DomainError("fabrication_delta_closed_form: the fabricated bid is never allocated");
  }
  const double xt = pa.weights.at(t);
  const double xt1 = pa.weights.at(t + 1);
  return static_cast<double>(t) * (w - r) * (xt - xt1) - beta * xt1;
}

FabricationDeltas fabrication_payment_deltas(const MechanismSpec& m, const Distribution& d,
                                             const BidProfile& bids, double w) {
  const auto& pa = require_position_const(m, "fabrication_payment_deltas");
  const double beta = pa.marginal_burn(1);
  const double r = g_inverse(m, d, beta);
  if (w < r - 1e-12) {
    throw DomainError("fabrication_payment_deltas: the fabricated bid is never allocated");
  }
  const std::size_t n = bids.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(g_of(m, d, bids.at_rank(i)) > beta)) {
      throw DomainError("fabrication_payment_deltas: every value must exceed the threshold");
    }
  }
  std::size_t t = 0;
  while (t < n && bids.at_rank(t) > w) ++t;

  auto value = [&](std::size_t rank1) {  // 1-based, with v_{n+1} = r
    return rank1 <= n ? bids.at_rank(rank1 - 1) : r;
  };
  auto x = [&](std::size_t rank1) { return pa.weights.at(rank1); };

  FabricationDeltas out;
  out.per_user.assign(n, 0.0);
  double shared_top = (w - value(t + 1)) * (x(t) - x(t + 1));
  for (std::size_t i = t + 1; i <= n; ++i) {
    shared_top += (value(i) - value(i + 1)) * (x(i) - x(i + 1));
  }
  for (std::size_t j = 1; j <= t; ++j) {
    out.per_user[j - 1] = shared_top;
    out.payments_top += shared_top;
  }
  for (std::size_t j = t + 1; j <= n; ++j) {
    double dj = -value(j + 1) * (x(j) - x(j + 1));
    for (std::size_t i = j + 1; i <= n; ++i) {
      dj += (value(i) - value(i + 1)) * (x(i) - x(i + 1));
    }
    out.per_user[j - 1] = dj;
    out.payments_bottom += dj;
  }
  out.extra_burn = beta * x(n + 1);
  out.total = out.payments_top + out.payments_bottom - out.extra_burn;
  return out;
}

// ---------------------------------------------------------------------------
// check_oncms_position
// ---------------------------------------------------------------------------

CheckReport check_oncms_position(const MechanismSpec& m, const Distribution& d,
                                 const OncmsPositionParams& params) {
  const auto& pa = require_position_const(m, "check_oncms_position");
  const double beta = pa.marginal_burn(1);
  const double r = g_inverse(m, d, beta);

  CheckReport report;
  report.check_name = "oncms_position";

  {
    ConditionResult cap;
    cap.name = "capacity_feasible";
    cap.trials = 1;
    if (m.capacity.is_finite) {
      cap.worst_margin = m.capacity.omega - pa.weights.total_sum();
      cap.status = cap.worst_margin >= -1e-9 ? CheckStatus::Pass : CheckStatus::Fail;
    } else {
      cap.note = "infinite capacity";
      cap.status = CheckStatus::Pass;
    }
    report.conditions.push_back(std::move(cap));
  }

  if (!d.bounded()) {
    // Unbounded support: only rank-independent weights can be miner simple;
    // any weight drop is exploitable by a fabricated bid below high values.
    ConditionResult cond;
    cond.name = "unbounded_requires_constant_weights";
    cond.trials = params.t_max;
    if (pa.weights.is_constant()) {
      cond.status = CheckStatus::Pass;
      cond.note = "rank-independent weights (posted-price-like); fabrication gains nothing";
    } else {
      cond.status = CheckStatus::Fail;
      std::size_t bad_t = 0;
      for (std::size_t t = 1; t <= params.t_max; ++t) {
        if (pa.weights.at(t) > pa.weights.at(t + 1) + 1e-15) {
          bad_t = t;
          break;
        }
      }
      if (bad_t > 0) {
        const double gap = pa.weights.at(bad_t) - pa.weights.at(bad_t + 1);
        const double w = r + (1.0 + beta * pa.weights.at(bad_t + 1)) /
                                 (static_cast<double>(bad_t) * gap);
        std::vector<double> values(bad_t, w + 1.0);
        DeviationReport wit = replay_deviation(m, d, BidProfile(values), {}, {w});
        char buf[96];
        std::snprintf(buf, sizeof(buf), "weights drop at rank %zu; fabricating below %zu "
                      "high bids pays", bad_t, bad_t);
        wit.note = buf;
        cond.worst_margin = -wit.delta;
        cond.witnesses.push_back(std::move(wit));
        cond.violations = 1;
      }
    }
    report.conditions.push_back(std::move(cond));
    report.finalize();
    return report;
  }

  const double sup = d.support_hi();
  const double span = sup - d.support_lo();

  ConditionResult rank_cond;
  rank_cond.name = "rank_inequality";
  std::size_t valid_from = 0;
  std::optional<double> ratio = pa.weights.tail_ratio(&valid_from);
  const std::size_t t_explicit = std::max(params.t_max, valid_from > 0 ? valid_from - 1 : 0);
  rank_cond.trials = t_explicit;
  bool boundary = false;
  for (std::size_t t = 1; t <= t_explicit; ++t) {
    const double lhs = static_cast<double>(t) * (pa.weights.at(t) - pa.weights.at(t + 1)) *
                       (sup - r);
    const double rhs = beta * pa.weights.at(t + 1);
    const double margin = rhs - lhs;
    if (margin < rank_cond.worst_margin) rank_cond.worst_margin = margin;
    if (margin < -params.tol) {
      ++rank_cond.violations;
      if (rank_cond.witnesses.size() < kMaxWitnesses) {
        // Witness: t bids at the supremum, one fabricated bid just below it.
        double w = std::max(sup - 1e-4 * span, 0.5 * (r + sup));
        std::vector<double> values(t, sup);
        DeviationReport wit = replay_deviation(m, d, BidProfile(values), {}, {w});
        char buf[96];
        std::snprintf(buf, sizeof(buf), "rank %zu: fabrication gain %.6g exceeds burn %.6g",
                      t, lhs, rhs);
        wit.note = buf;
        rank_cond.witnesses.push_back(std::move(wit));
      }
    } else if (std::abs(margin) <= params.tol) {
      boundary = true;
    }
  }
  if (rank_cond.violations > 0) {
    rank_cond.status = CheckStatus::Fail;
  } else if (boundary) {
    rank_cond.status = CheckStatus::Inconclusive;
    rank_cond.note = "boundary case: the strict inequality holds with equality at some rank";
  } else {
    rank_cond.status = CheckStatus::Pass;
  }
  report.conditions.push_back(std::move(rank_cond));

  ConditionResult tail;
  tail.name = "tail_certificate";
  tail.trials = 1;
  if (ratio) {
    const double margin = beta - *ratio * (sup - r);
    tail.worst_margin = margin;
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "t (x_t - x_{t+1}) = %.17g x_{t+1} for all t >= %zu; the rank inequality "
                  "is t-independent there",
                  *ratio, valid_from);
    tail.note = buf;
    if (margin < -params.tol) {
      tail.status = CheckStatus::Fail;
      tail.violations = 1;
      double w = std::max(sup - 1e-4 * span, 0.5 * (r + sup));
      std::vector<double> values(std::max<std::size_t>(valid_from, 1), sup);
      tail.witnesses.push_back(replay_deviation(m, d, BidProfile(values), {}, {w}));
    } else if (margin <= params.tol) {
      tail.status = CheckStatus::Inconclusive;
    } else {
      tail.status = CheckStatus::Pass;
    }
  } else {
    tail.status = CheckStatus::Inconclusive;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "pass up to t=%zu, tail unverified (no analytic certificate)",
                  t_explicit);
    tail.note = buf;
  }
  report.conditions.push_back(std::move(tail));

  report.finalize();
  return report;
}

// ---------------------------------------------------------------------------
// check_oncms_genpos
// ---------------------------------------------------------------------------

CheckReport check_oncms_genpos(const MechanismSpec& m, const Distribution& d,
                               const OncmsGenposParams& params) {
  auto* gp = m.as<GeneralizedPositionAuction>();
  if (!gp) throw UnsupportedQueryError("check_oncms_genpos: not a generalized position auction");
  const auto& curves = gp->curves;

  CheckReport report;
  report.check_name = "oncms_genpos";

  const double lower = g_inverse(m, d, 0.0);
  std::vector<double> wgrid;
  for (std::size_t k = 0; k < params.w_grid; ++k) {
    double w = d.quantile((static_cast<double>(k) + 0.5) / static_cast<double>(params.w_grid));
    if (w >= lower) wgrid.push_back(w);
  }
  const double nudge = 1e-6 * std::max(1.0, curves.gamma);
  for (double w : {curves.gamma, curves.gamma + nudge, curves.gamma + 1.0}) {
    if (w >= lower && (!d.bounded() || w <= d.support_hi())) wgrid.push_back(w);
  }
  std::sort(wgrid.begin(), wgrid.end());
  wgrid.erase(std::unique(wgrid.begin(), wgrid.end()), wgrid.end());

  ConditionResult conv;
  conv.name = "rank_difference_convergence";
  ConditionResult ineq;
  ineq.name = "fabrication_payment_vs_burn";
  conv.trials = ineq.trials = wgrid.size() * params.t_max;

  for (std::size_t t = 1; t <= params.t_max; ++t) {
    for (double w : wgrid) {
      const double x_t = curves.at(t, w);
      const double x_t1 = curves.at(t + 1, w);
      const double x_t2 = curves.at(t + 2, w);
      const double lhs_c = static_cast<double>(t) * (x_t - x_t1);
      const double rhs_c = static_cast<double>(t + 1) * (x_t1 - x_t2);
      const double margin_c = lhs_c - rhs_c;
      if (margin_c < conv.worst_margin) conv.worst_margin = margin_c;
      if (margin_c < -params.tol) {
        ++conv.violations;
        if (conv.witnesses.size() < kMaxWitnesses) {
          DeviationReport wit;
          wit.kind = DeviationKind::Fabricate;
          wit.metric = "rank_difference_convergence";
          wit.fabricated_bids = {w};
          wit.delta = margin_c;
          char buf[96];
          std::snprintf(buf, sizeof(buf), "t=%zu, w=%.9g: rank differences are not contracting",
                        t, w);
          wit.note = buf;
          conv.witnesses.push_back(std::move(wit));
        }
      }

      const double lhs_i =
          static_cast<double>(t) *
          (curves.integral(t, lower, w) - curves.integral(t + 1, lower, w));
      const double g_w = g_of(m, d, w);
      const double rhs_i = g_w * x_t1 - genpos_g_integral(*gp, m, d, t + 1, w);
      const double margin_i = rhs_i - lhs_i;
      if (margin_i < ineq.worst_margin) ineq.worst_margin = margin_i;
      if (margin_i < -params.tol) {
        ++ineq.violations;
        if (ineq.witnesses.size() < kMaxWitnesses) {
          DeviationReport wit;
          wit.kind = DeviationKind::Fabricate;
          wit.metric = "payment_minus_burn_increase";
          wit.fabricated_bids = {w};
          wit.delta = lhs_i - rhs_i;
          char buf[112];
          std::snprintf(buf, sizeof(buf),
                        "t=%zu, w=%.9g: fabricating below %zu bids pays %.6g over the burn", t,
                        w, t, lhs_i - rhs_i);
          wit.note = buf;
          ineq.witnesses.push_back(std::move(wit));
        }
      }
    }
  }
  conv.status = conv.violations ? CheckStatus::Fail : CheckStatus::Pass;
  ineq.status = ineq.violations ? CheckStatus::Fail : CheckStatus::Pass;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "checked t <= %zu on %zu grid points; larger t unverified",
                params.t_max, wgrid.size());
  report.note = buf;
  report.conditions.push_back(std::move(conv));
  report.conditions.push_back(std::move(ineq));
  report.finalize();
  return report;
}

}  // namespace tfm
