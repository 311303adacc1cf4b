#include "tfm/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tfm {

namespace {

[[noreturn]] void key_error(const std::string& context, const std::string& key) {
  throw ConfigError("config: unknown key \"" + key + "\" in " + context);
}

void reject_unknown(const OrderedJson& obj, const std::string& context,
                    std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) key_error(context, it.key());
  }
}

double parse_decimal(const OrderedJson& j, const std::string& context) {
  if (!j.is_string()) {
    throw ConfigError("config: " + context + " must be a decimal string");
  }
  const std::string s = j.get<std::string>();
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v)) {
    throw ConfigError("config: " + context + " is not a finite decimal: \"" + s + "\"");
  }
  return v;
}

std::uint64_t parse_u64(const OrderedJson& j, const std::string& context) {
  if (!j.is_string()) throw ConfigError("config: " + context + " must be a decimal string");
  const std::string s = j.get<std::string>();
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ConfigError("config: " + context + " is not an unsigned integer: \"" + s + "\"");
  }
  return v;
}

bool parse_bool(const OrderedJson& j, const std::string& context) {
  if (!j.is_string()) throw ConfigError("config: " + context + " must be \"true\" or \"false\"");
  const std::string s = j.get<std::string>();
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigError("config: " + context + " must be \"true\" or \"false\"");
}

std::vector<double> parse_decimal_list(const OrderedJson& j, const std::string& context) {
  if (!j.is_array()) throw ConfigError("config: " + context + " must be an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(parse_decimal(j[i], context + "[" + std::to_string(i) + "]"));
  }
  return out;
}

template <class T>
T get_or(const OrderedJson& obj, const char* key, const std::string& context, T fallback,
         T (*parser)(const OrderedJson&, const std::string&)) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  return parser(*it, context + "." + key);
}

double get_decimal_or(const OrderedJson& obj, const char* key, const std::string& ctx,
                      double fallback) {
  return get_or<double>(obj, key, ctx, fallback, parse_decimal);
}

std::uint64_t get_u64_or(const OrderedJson& obj, const char* key, const std::string& ctx,
                         std::uint64_t fallback) {
  return get_or<std::uint64_t>(obj, key, ctx, fallback, parse_u64);
}

double require_decimal(const OrderedJson& obj, const char* key, const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError("config: missing " + ctx + "." + key);
  return parse_decimal(*it, ctx + "." + key);
}

Distribution parse_distribution(const OrderedJson& j) {
  if (!j.is_object()) throw ConfigError("config: distribution must be an object");
  auto it = j.find("kind");
  if (it == j.end()) throw ConfigError("config: missing distribution.kind");
  const std::string kind = it->get<std::string>();
  if (kind == "exponential") {
    reject_unknown(j, "distribution", {"kind", "mean"});
    return Distribution::exponential(get_decimal_or(j, "mean", "distribution", 1.0));
  }
  if (kind == "uniform") {
    reject_unknown(j, "distribution", {"kind", "lo", "hi"});
    return Distribution::uniform(get_decimal_or(j, "lo", "distribution", 0.0),
                                 get_decimal_or(j, "hi", "distribution", 1.0));
  }
  if (kind == "capped_pareto" || kind == "appendix_c2") {
    reject_unknown(j, "distribution", {"kind", "epsilon"});
    return Distribution::capped_pareto(get_decimal_or(j, "epsilon", "distribution", 0.1));
  }
  if (kind == "piecewise") {
    reject_unknown(j, "distribution", {"kind", "pieces"});
    auto pit = j.find("pieces");
    if (pit == j.end() || !pit->is_array()) {
      throw ConfigError("config: distribution.pieces must be an array");
    }
    std::vector<DensityPiece> pieces;
    for (const auto& pj : *pit) {
      reject_unknown(pj, "distribution.pieces[]", {"lo", "hi", "density"});
      DensityPiece p;
      p.lo = require_decimal(pj, "lo", "distribution.pieces[]");
      p.hi = require_decimal(pj, "hi", "distribution.pieces[]");
      p.density = require_decimal(pj, "density", "distribution.pieces[]");
      pieces.push_back(p);
    }
    return Distribution::piecewise_density(std::move(pieces));
  }
  throw ConfigError("config: unknown distribution.kind \"" + kind + "\"");
}

PositionWeights parse_weights(const OrderedJson& j) {
  if (!j.is_object()) throw ConfigError("config: mechanism.weights must be an object");
  auto it = j.find("kind");
  if (it == j.end()) throw ConfigError("config: missing mechanism.weights.kind");
  const std::string kind = it->get<std::string>();
  PositionWeights w;
  if (kind == "harmonic") {
    reject_unknown(j, "weights", {"kind", "scale"});
    w.kind = PositionWeights::Kind::Harmonic;
    w.scale = get_decimal_or(j, "scale", "weights", 1.0);
  } else if (kind == "harmonic_first") {
    reject_unknown(j, "weights", {"kind", "first", "scale"});
    w.kind = PositionWeights::Kind::HarmonicFirst;
    w.first = get_decimal_or(j, "first", "weights", 0.5);
    w.scale = get_decimal_or(j, "scale", "weights", 0.5);
  } else if (kind == "constant") {
    reject_unknown(j, "weights", {"kind", "value"});
    w.kind = PositionWeights::Kind::Constant;
    w.value = require_decimal(j, "value", "weights");
  } else if (kind == "list") {
    reject_unknown(j, "weights", {"kind", "values", "tail"});
    w.kind = PositionWeights::Kind::List;
    auto vit = j.find("values");
    if (vit == j.end()) throw ConfigError("config: missing weights.values");
    w.values = parse_decimal_list(*vit, "weights.values");
    if (w.values.empty()) throw ConfigError("config: weights.values must be nonempty");
    std::string tail = j.value("tail", "zero");
    if (tail == "zero") {
      w.list_tail = PositionWeights::ListTail::Zero;
    } else if (tail == "constant_last") {
      w.list_tail = PositionWeights::ListTail::ConstantLast;
    } else {
      throw ConfigError("config: weights.tail must be \"zero\" or \"constant_last\"");
    }
  } else {
    throw ConfigError("config: unknown weights.kind \"" + kind + "\"");
  }
  return w;
}

Capacity parse_capacity(const OrderedJson& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "infinite") return Capacity::infinite();
    throw ConfigError("config: capacity must be \"infinite\" or {\"finite\": \"...\"}");
  }
  if (j.is_object()) {
    reject_unknown(j, "capacity", {"finite"});
    return Capacity::finite(require_decimal(j, "finite", "capacity"));
  }
  throw ConfigError("config: capacity must be \"infinite\" or {\"finite\": \"...\"}");
}

MechanismSpec parse_mechanism(const OrderedJson& j) {
  if (!j.is_object()) throw ConfigError("config: mechanism must be an object");
  auto it = j.find("family");
  if (it == j.end()) throw ConfigError("config: missing mechanism.family");
  const std::string family = it->get<std::string>();

  MechanismSpec m;
  if (auto sit = j.find("objective_space"); sit != j.end()) {
    const std::string s = sit->get<std::string>();
    if (s == "virtual") {
      m.objective = ObjectiveSpace::Virtual;
    } else if (s == "value") {
      m.objective = ObjectiveSpace::Value;
    } else {
      throw ConfigError("config: objective_space must be \"virtual\" or \"value\"");
    }
  }
  if (auto cit = j.find("capacity"); cit != j.end()) m.capacity = parse_capacity(*cit);

  if (family == "posted_price") {
    reject_unknown(j, "mechanism",
                   {"family", "objective_space", "capacity", "price", "burn_per_user", "route"});
    PostedPriceBurn pp;
    pp.price = require_decimal(j, "price", "mechanism");
    pp.burn_per_user = get_decimal_or(j, "burn_per_user", "mechanism", 0.0);
    const std::string route = j.value("route", "miner");
    if (route == "miner") {
      pp.route = PostedPriceBurn::Route::Miner;
    } else if (route == "burn_all") {
      pp.route = PostedPriceBurn::Route::BurnAll;
    } else {
      throw ConfigError("config: mechanism.route must be \"miner\" or \"burn_all\"");
    }
    m.family = pp;
  } else if (family == "deterministic_schedule") {
    reject_unknown(j, "mechanism", {"family", "objective_space", "capacity", "marginal_burns",
                                    "tail", "block_reward_burn"});
    DeterministicSchedule ds;
    auto bit = j.find("marginal_burns");
    if (bit == j.end()) throw ConfigError("config: missing mechanism.marginal_burns");
    ds.marginal_burns = parse_decimal_list(*bit, "mechanism.marginal_burns");
    const std::string tail = j.value("tail", "constant_last");
    if (tail == "constant_last") {
      ds.tail = ScheduleTail::ConstantLast;
    } else if (tail == "infinite") {
      ds.tail = ScheduleTail::Infinite;
    } else {
      throw ConfigError("config: mechanism.tail must be \"constant_last\" or \"infinite\"");
    }
    ds.block_reward_burn = get_decimal_or(j, "block_reward_burn", "mechanism", 0.0);
    m.family = ds;
  } else if (family == "position_auction") {
    reject_unknown(j, "mechanism", {"family", "objective_space", "capacity", "weights",
                                    "marginal_burn", "marginal_burns", "block_reward_burn"});
    PositionAuction pa;
    auto wit = j.find("weights");
    if (wit == j.end()) throw ConfigError("config: missing mechanism.weights");
    pa.weights = parse_weights(*wit);
    if (auto bit = j.find("marginal_burn"); bit != j.end()) {
      pa.marginal_burns = {parse_decimal(*bit, "mechanism.marginal_burn")};
    } else if (auto bsit = j.find("marginal_burns"); bsit != j.end()) {
      pa.marginal_burns = parse_decimal_list(*bsit, "mechanism.marginal_burns");
      if (pa.marginal_burns.empty()) {
        throw ConfigError("config: mechanism.marginal_burns must be nonempty");
      }
    } else {
      throw ConfigError("config: position_auction needs marginal_burn or marginal_burns");
    }
    pa.block_reward_burn = get_decimal_or(j, "block_reward_burn", "mechanism", 0.0);
    m.family = pa;
  } else if (family == "generalized_position") {
    reject_unknown(j, "mechanism",
                   {"family", "objective_space", "capacity", "curves", "block_reward_burn"});
    GeneralizedPositionAuction gp;
    auto cit = j.find("curves");
    if (cit == j.end()) throw ConfigError("config: missing mechanism.curves");
    reject_unknown(*cit, "mechanism.curves", {"kind", "gamma", "coefficients"});
    const std::string ckind = cit->value("kind", "exp_family");
    if (ckind != "exp_family") {
      throw ConfigError("config: unknown curves.kind \"" + ckind + "\"");
    }
    gp.curves.gamma = require_decimal(*cit, "gamma", "mechanism.curves");
    if (auto coit = cit->find("coefficients"); coit != cit->end()) {
      gp.curves.custom_coeffs = parse_decimal_list(*coit, "mechanism.curves.coefficients");
    }
    gp.block_reward_burn = get_decimal_or(j, "block_reward_burn", "mechanism", 0.0);
    m.family = gp;
  } else {
    throw ConfigError("config: unknown mechanism.family \"" + family + "\"");
  }
  return m;
}

CheckEntry parse_check(const OrderedJson& j) {
  if (!j.is_object()) throw ConfigError("config: checks[] entries must be objects");
  auto it = j.find("name");
  if (it == j.end()) throw ConfigError("config: missing checks[].name");
  CheckEntry entry;
  entry.name = it->get<std::string>();
  if (auto sit = j.find("seed"); sit != j.end()) {
    entry.seed_overridden = true;
    entry.seed = parse_u64(*sit, "checks[].seed");
  }
  const std::string& name = entry.name;

  if (name == "mir_conditions" || name == "gscp") {
    reject_unknown(j, "check " + name,
                   {"name", "seed", "n_list", "samples", "misreport_grid", "append_trials",
                    "tol", "t_max"});
    auto fill = [&](auto& p) {
      if (auto nit = j.find("n_list"); nit != j.end()) {
        p.n_list.clear();
        for (const auto& nj : *nit) p.n_list.push_back(parse_u64(nj, "check.n_list[]"));
      }
      p.samples = get_u64_or(j, "samples", "check", p.samples);
      p.misreport_grid = get_u64_or(j, "misreport_grid", "check", p.misreport_grid);
      p.append_trials = get_u64_or(j, "append_trials", "check", p.append_trials);
      p.tol = get_decimal_or(j, "tol", "check", p.tol);
    };
    if (name == "mir_conditions") {
      MirParams p;
      fill(p);
      entry.params = p;
    } else {
      GscpParams p;
      fill(p);
      p.t_max = get_u64_or(j, "t_max", "check", p.t_max);
      entry.params = p;
    }
  } else if (name == "oncus") {
    reject_unknown(j, "check oncus", {"name", "seed", "n", "samples", "grid", "tol"});
    OncusParams p;
    p.n = get_u64_or(j, "n", "check", p.n);
    p.samples = get_u64_or(j, "samples", "check", p.samples);
    p.grid = get_u64_or(j, "grid", "check", p.grid);
    p.tol = get_decimal_or(j, "tol", "check", p.tol);
    entry.params = p;
  } else if (name == "oncms_position") {
    reject_unknown(j, "check oncms_position", {"name", "seed", "t_max", "tol"});
    OncmsPositionParams p;
    p.t_max = get_u64_or(j, "t_max", "check", p.t_max);
    p.tol = get_decimal_or(j, "tol", "check", p.tol);
    entry.params = p;
  } else if (name == "oncms_genpos") {
    reject_unknown(j, "check oncms_genpos", {"name", "seed", "w_grid", "t_max", "tol"});
    OncmsGenposParams p;
    p.w_grid = get_u64_or(j, "w_grid", "check", p.w_grid);
    p.t_max = get_u64_or(j, "t_max", "check", p.t_max);
    p.tol = get_decimal_or(j, "tol", "check", p.tol);
    entry.params = p;
  } else if (name == "deviation_search") {
    reject_unknown(j, "check deviation_search",
                   {"name", "seed", "profile", "max_fabricate", "grid", "allow_censor", "tol"});
    DeviationCheckSpec p;
    auto pit = j.find("profile");
    if (pit == j.end()) throw ConfigError("config: deviation_search needs a profile");
    p.bids = parse_decimal_list(*pit, "check.profile");
    p.cfg.max_fabricate = get_u64_or(j, "max_fabricate", "check", p.cfg.max_fabricate);
    p.cfg.grid = get_u64_or(j, "grid", "check", p.cfg.grid);
    if (auto ait = j.find("allow_censor"); ait != j.end()) {
      p.cfg.allow_censor = parse_bool(*ait, "check.allow_censor");
    }
    p.tol = get_decimal_or(j, "tol", "check", p.tol);
    entry.params = p;
  } else if (name == "mistuning") {
    reject_unknown(j, "check mistuning", {"name", "seed", "price", "burn", "samples", "tol"});
    MistuningCheckSpec p;
    p.price = require_decimal(j, "price", "check mistuning");
    p.burn = require_decimal(j, "burn", "check mistuning");
    p.samples = get_u64_or(j, "samples", "check", p.samples);
    p.tol = get_decimal_or(j, "tol", "check", p.tol);
    entry.params = p;
  } else if (name == "mc_revenue") {
    reject_unknown(j, "check mc_revenue", {"name", "seed", "n", "samples"});
    McRevenueCheckSpec p;
    p.n = get_u64_or(j, "n", "check", p.n);
    p.samples = get_u64_or(j, "samples", "check", p.samples);
    entry.params = p;
  } else if (name == "increasing_marginal_burn") {
    reject_unknown(j, "check increasing_marginal_burn", {"name", "seed", "betas", "eps"});
    IncreasingBurnCheckSpec p;
    auto bit = j.find("betas");
    if (bit == j.end()) throw ConfigError("config: increasing_marginal_burn needs betas");
    p.betas = parse_decimal_list(*bit, "check.betas");
    p.eps = get_decimal_or(j, "eps", "check", p.eps);
    entry.params = p;
  } else if (name == "decreasing_marginal_burn") {
    reject_unknown(j, "check decreasing_marginal_burn",
                   {"name", "seed", "beta_base", "beta_coeff", "n_cap"});
    DecreasingBurnCheckSpec p;
    p.base = get_decimal_or(j, "beta_base", "check", p.base);
    p.coeff = get_decimal_or(j, "beta_coeff", "check", p.coeff);
    p.n_cap = get_u64_or(j, "n_cap", "check", p.n_cap);
    entry.params = p;
  } else if (name == "smoothness") {
    reject_unknown(j, "check smoothness", {"name", "seed"});
    entry.params = SmoothnessCheckSpec{};
  } else {
    throw ConfigError("config: unknown check name \"" + name + "\"");
  }
  return entry;
}

}  // namespace

ExperimentConfig parse_config_json(const OrderedJson& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown(j, "top level",
                 {"schema_version", "seed", "distribution", "mechanism", "checks", "output"});
  ExperimentConfig cfg;
  if (auto it = j.find("schema_version"); it != j.end()) {
    if (it->get<std::string>() != "1") {
      throw ConfigError("config: unsupported schema_version (expected \"1\")");
    }
  }
  cfg.seed = get_u64_or(j, "seed", "top level", kDefaultBaseSeed);

  auto dit = j.find("distribution");
  if (dit == j.end()) throw ConfigError("config: missing distribution");
  cfg.distribution = parse_distribution(*dit);

  auto mit = j.find("mechanism");
  if (mit == j.end()) throw ConfigError("config: missing mechanism");
  cfg.mechanism = parse_mechanism(*mit);
  cfg.mechanism.validate(cfg.distribution);  // throws on infeasible specs

  if (auto cit = j.find("checks"); cit != j.end()) {
    if (!cit->is_array()) throw ConfigError("config: checks must be an array");
    for (const auto& cj : *cit) cfg.checks.push_back(parse_check(cj));
  }
  if (auto oit = j.find("output"); oit != j.end()) {
    reject_unknown(*oit, "output", {"report", "plot_data_dir"});
    cfg.report_path = oit->value("report", cfg.report_path);
    cfg.plot_dir = oit->value("plot_data_dir", cfg.plot_dir);
  }
  return cfg;
}

ExperimentConfig parse_config_text(const std::string& text) {
  OrderedJson j;
  try {
    j = OrderedJson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Recover line/column from the byte offset for a usable diagnostic.
    int line = 1, col = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(std::string("config: JSON parse error: ") + e.what(), line, col);
  }
  return parse_config_json(j);
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string format_decimal(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

OrderedJson weights_json(const PositionWeights& w) {
  OrderedJson j;
  switch (w.kind) {
    case PositionWeights::Kind::Harmonic:
      j["kind"] = "harmonic";
      j["scale"] = format_decimal(w.scale);
      break;
    case PositionWeights::Kind::HarmonicFirst:
      j["kind"] = "harmonic_first";
      j["first"] = format_decimal(w.first);
      j["scale"] = format_decimal(w.scale);
      break;
    case PositionWeights::Kind::Constant:
      j["kind"] = "constant";
      j["value"] = format_decimal(w.value);
      break;
    case PositionWeights::Kind::List: {
      j["kind"] = "list";
      OrderedJson arr = OrderedJson::array();
      for (double v : w.values) arr.push_back(format_decimal(v));
      j["values"] = arr;
      j["tail"] = w.list_tail == PositionWeights::ListTail::Zero ? "zero" : "constant_last";
      break;
    }
  }
  return j;
}

OrderedJson distribution_json(const Distribution& d) {
  OrderedJson j;
  j["kind"] = d.kind_name();
  switch (d.kind()) {
    case Distribution::Kind::Exponential:
      j["mean"] = format_decimal(d.param("mean"));
      break;
    case Distribution::Kind::Uniform:
      j["lo"] = format_decimal(d.param("lo"));
      j["hi"] = format_decimal(d.param("hi"));
      break;
    case Distribution::Kind::CappedPareto:
      j["epsilon"] = format_decimal(d.param("epsilon"));
      break;
    case Distribution::Kind::PiecewiseDensity: {
      OrderedJson arr = OrderedJson::array();
      for (const auto& p : d.pieces()) {
        OrderedJson pj;
        pj["lo"] = format_decimal(p.lo);
        pj["hi"] = format_decimal(p.hi);
        pj["density"] = format_decimal(p.density);
        arr.push_back(pj);
      }
      j["pieces"] = arr;
      break;
    }
  }
  return j;
}

OrderedJson mechanism_json(const MechanismSpec& m) {
  OrderedJson j;
  j["family"] = m.family_name();
  j["objective_space"] = m.objective == ObjectiveSpace::Virtual ? "virtual" : "value";
  if (m.capacity.is_finite) {
    j["capacity"] = OrderedJson{{"finite", format_decimal(m.capacity.omega)}};
  } else {
    j["capacity"] = "infinite";
  }
  if (auto* pp = m.as<PostedPriceBurn>()) {
    j["price"] = format_decimal(pp->price);
    j["burn_per_user"] = format_decimal(pp->burn_per_user);
    j["route"] = pp->route == PostedPriceBurn::Route::Miner ? "miner" : "burn_all";
  } else if (auto* ds = m.as<DeterministicSchedule>()) {
    OrderedJson arr = OrderedJson::array();
    for (double b : ds->marginal_burns) arr.push_back(format_decimal(b));
    j["marginal_burns"] = arr;
    j["tail"] = ds->tail == ScheduleTail::ConstantLast ? "constant_last" : "infinite";
    j["block_reward_burn"] = format_decimal(ds->block_reward_burn);
  } else if (auto* pa = m.as<PositionAuction>()) {
    j["weights"] = weights_json(pa->weights);
    if (pa->marginal_burns.size() == 1) {
      j["marginal_burn"] = format_decimal(pa->marginal_burns[0]);
    } else {
      OrderedJson arr = OrderedJson::array();
      for (double b : pa->marginal_burns) arr.push_back(format_decimal(b));
      j["marginal_burns"] = arr;
    }
    j["block_reward_burn"] = format_decimal(pa->block_reward_burn);
  } else if (auto* gp = m.as<GeneralizedPositionAuction>()) {
    OrderedJson cj;
    cj["kind"] = "exp_family";
    cj["gamma"] = format_decimal(gp->curves.gamma);
    if (!gp->curves.custom_coeffs.empty()) {
      OrderedJson arr = OrderedJson::array();
      for (double c : gp->curves.custom_coeffs) arr.push_back(format_decimal(c));
      cj["coefficients"] = arr;
    }
    j["curves"] = cj;
    j["block_reward_burn"] = format_decimal(gp->block_reward_burn);
  }
  return j;
}

OrderedJson check_json(const CheckEntry& e) {
  OrderedJson j;
  j["name"] = e.name;
  if (e.seed_overridden) j["seed"] = std::to_string(e.seed);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, MirParams> || std::is_same_v<T, GscpParams>) {
          OrderedJson arr = OrderedJson::array();
          for (std::size_t n : p.n_list) arr.push_back(std::to_string(n));
          j["n_list"] = arr;
          j["samples"] = std::to_string(p.samples);
          j["misreport_grid"] = std::to_string(p.misreport_grid);
          j["append_trials"] = std::to_string(p.append_trials);
          j["tol"] = format_decimal(p.tol);
          if constexpr (std::is_same_v<T, GscpParams>) j["t_max"] = std::to_string(p.t_max);
        } else if constexpr (std::is_same_v<T, OncusParams>) {
          j["n"] = std::to_string(p.n);
          j["samples"] = std::to_string(p.samples);
          j["grid"] = std::to_string(p.grid);
          j["tol"] = format_decimal(p.tol);
        } else if constexpr (std::is_same_v<T, OncmsPositionParams>) {
          j["t_max"] = std::to_string(p.t_max);
          j["tol"] = format_decimal(p.tol);
        } else if constexpr (std::is_same_v<T, OncmsGenposParams>) {
          j["w_grid"] = std::to_string(p.w_grid);
          j["t_max"] = std::to_string(p.t_max);
          j["tol"] = format_decimal(p.tol);
        } else if constexpr (std::is_same_v<T, DeviationCheckSpec>) {
          OrderedJson arr = OrderedJson::array();
          for (double b : p.bids) arr.push_back(format_decimal(b));
          j["profile"] = arr;
          j["max_fabricate"] = std::to_string(p.cfg.max_fabricate);
          j["grid"] = std::to_string(p.cfg.grid);
          j["allow_censor"] = p.cfg.allow_censor ? "true" : "false";
          j["tol"] = format_decimal(p.tol);
        } else if constexpr (std::is_same_v<T, MistuningCheckSpec>) {
          j["price"] = format_decimal(p.price);
          j["burn"] = format_decimal(p.burn);
          j["samples"] = std::to_string(p.samples);
          j["tol"] = format_decimal(p.tol);
        } else if constexpr (std::is_same_v<T, McRevenueCheckSpec>) {
          j["n"] = std::to_string(p.n);
          j["samples"] = std::to_string(p.samples);
        } else if constexpr (std::is_same_v<T, IncreasingBurnCheckSpec>) {
          OrderedJson arr = OrderedJson::array();
          for (double b : p.betas) arr.push_back(format_decimal(b));
          j["betas"] = arr;
          j["eps"] = format_decimal(p.eps);
        } else if constexpr (std::is_same_v<T, DecreasingBurnCheckSpec>) {
          j["beta_base"] = format_decimal(p.base);
          j["beta_coeff"] = format_decimal(p.coeff);
          j["n_cap"] = std::to_string(p.n_cap);
        } else {
          static_assert(std::is_same_v<T, SmoothnessCheckSpec>);
        }
      },
      e.params);
  return j;
}

}  // namespace

OrderedJson resolved_config_json(const ExperimentConfig& cfg) {
  OrderedJson j;
  j["schema_version"] = "1";
  j["seed"] = std::to_string(cfg.seed);
  j["distribution"] = distribution_json(cfg.distribution);
  j["mechanism"] = mechanism_json(cfg.mechanism);
  OrderedJson arr = OrderedJson::array();
  for (const auto& c : cfg.checks) arr.push_back(check_json(c));
  j["checks"] = arr;
  j["output"] = OrderedJson{{"report", cfg.report_path}, {"plot_data_dir", cfg.plot_dir}};
  return j;
}

}  // namespace tfm
