#include "cftwin/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "cftwin/error.hpp"

namespace cftwin {

void EstimateReport::attach_exact(double value) {
  exact = value;
  if (point) abs_error = std::abs(*point - value);
}

// ---------------------------------------------------------------- TrialLog

std::string TrialLog::to_csv() const {
  std::string out;
  for (const auto& n : natural_names) out += "natural_" + n + ",";
  for (const auto& n : acted_names) out += "acted_" + n + ",";
  out += "y\n";
  for (const auto& row : rows) {
    for (int v : row.natural) out += std::to_string(v) + ",";
    for (int v : row.acted) out += std::to_string(v) + ",";
    out += std::to_string(row.outcome) + "\n";
  }
  return out;
}

TrialLog TrialLog::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Validation, "trial log is empty");
  TrialLog log;
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  if (header.empty() || header.back() != "y") throw Error(ErrorKind::Validation, "trial log header must end with 'y'");
  for (std::size_t i = 0; i + 1 < header.size(); ++i) {
    const auto& h = header[i];
    if (h.rfind("natural_", 0) == 0) {
      if (!log.acted_names.empty()) throw Error(ErrorKind::Validation, "natural columns must precede acted columns");
      log.natural_names.push_back(h.substr(8));
    } else if (h.rfind("acted_", 0) == 0) {
      log.acted_names.push_back(h.substr(6));
    } else {
      throw Error(ErrorKind::Validation, "unexpected trial log column '" + h + "'");
    }
  }
  if (log.natural_names.size() != log.acted_names.size())
    throw Error(ErrorKind::Validation, "trial log needs one acted column per natural column");
  log.outcome_name = "y";
  const std::size_t k = log.natural_names.size();
  std::vector<std::set<int>> seen(k);
  std::set<int> seen_y;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<int> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        cells.push_back(std::stoi(cell));
      } catch (const std::exception&) {
        throw Error(ErrorKind::Validation, "bad integer on trial log line " + std::to_string(line_no));
      }
    }
    if (cells.size() != header.size())
      throw Error(ErrorKind::Validation, "wrong column count on trial log line " + std::to_string(line_no));
    Row row;
    row.natural.assign(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(k));
    row.acted.assign(cells.begin() + static_cast<std::ptrdiff_t>(k), cells.end() - 1);
    row.outcome = cells.back();
    for (std::size_t j = 0; j < k; ++j) seen[j].insert(row.natural[j]);
    seen_y.insert(row.outcome);
    log.rows.push_back(std::move(row));
  }
  for (const auto& s : seen) log.natural_domains.emplace_back(s.begin(), s.end());
  log.outcome_domain.assign(seen_y.begin(), seen_y.end());
  return log;
}

// ---------------------------------------------------------------- simulation

TrialLog simulate_trials(const TwinResult& tw, const Regime& regime, std::uint64_t n, std::uint64_t seed) {
  const Scm& g = tw.derived;
  for (const auto& iv : regime.interventions()) {
    const auto& name = g.name(iv.target);
    const auto copies = tw.copies();
    if (std::find(copies.begin(), copies.end(), name) == copies.end())
      throw Error(ErrorKind::Validation, "trial regime may only target primed copies, not '" + name + "'");
  }
  TrialLog log;
  std::vector<NodeId> nat, act;
  for (const auto& [from, to] : tw.copy_map) {
    log.natural_names.push_back(from);
    log.acted_names.push_back(to);
    nat.push_back(g.id(from));
    act.push_back(g.id(to));
    const auto dom = g.domain(nat.back());
    log.natural_domains.emplace_back(dom.begin(), dom.end());
  }
  const NodeId y = g.reward_var();
  log.outcome_name = g.name(y);
  log.outcome_domain.assign(g.domain(y).begin(), g.domain(y).end());

  for (const auto& a : sample(g, regime, n, seed)) {
    TrialLog::Row row;
    for (NodeId v : nat) row.natural.push_back(g.value_at(v, a[index_of(v)]));
    for (NodeId v : act) row.acted.push_back(g.value_at(v, a[index_of(v)]));
    row.outcome = g.value_at(y, a[index_of(y)]);
    log.rows.push_back(std::move(row));
  }
  return log;
}

// ---------------------------------------------------------------- estimators

namespace {

std::string cell_name(const std::string& var, int v) { return var + "=" + std::to_string(v); }

EstimateReport ratio(std::string estimand, std::uint64_t num, std::uint64_t den) {
  EstimateReport rep;
  rep.estimand = std::move(estimand);
  rep.numerator = num;
  rep.denominator = den;
  if (den > 0) rep.point = static_cast<double>(num) / static_cast<double>(den);
  return rep;
}

}  // namespace

EstimateReport estimate_eq1(const TrialLog& log, int a, int y, std::optional<int> acted) {
  if (log.natural_names.size() != 1)
    throw Error(ErrorKind::Validation, "single-action estimator needs a one-action log (got " +
                                           std::to_string(log.natural_names.size()) + ")");
  std::uint64_t num = 0, den = 0;
  for (const auto& row : log.rows) {
    if (row.natural[0] != a) continue;
    if (acted && row.acted[0] != *acted) continue;
    ++den;
    if (row.outcome == y) ++num;
  }
  const std::string& an = log.natural_names[0];
  std::string estimand = "P(" + log.outcome_name + "_{" + log.acted_names[0] + "=pi}=" + std::to_string(y) + " | " +
                         cell_name(an, a);
  if (acted) estimand += ", " + cell_name(log.acted_names[0], *acted);
  return ratio(estimand + ")", num, den);
}

std::optional<double> exact_counterfactual(const Scm& scm, const std::map<std::string, int>& observed,
                                           const std::map<std::string, int>& forced, int y) {
  std::vector<std::pair<NodeId, int>> obs;
  for (const auto& [name, v] : observed) {
    const NodeId id = scm.id(name);
    obs.emplace_back(id, scm.value_index(id, v));
  }
  std::vector<Intervention> ivs;
  for (const auto& [name, v] : forced) {
    const NodeId id = scm.id(name);
    ivs.push_back(Intervention::atomic(id, scm.value_index(id, v)));
  }
  const Regime forced_regime(scm, std::move(ivs));
  const NodeId yv = scm.reward_var();
  const int y_index = scm.value_index(yv, y);

  Rational num = 0, den = 0;
  for (const auto& cfg : scm.exogenous_support()) {
    const Assignment natural = evaluate_natural(scm, cfg.values);
    const bool matches = std::all_of(obs.begin(), obs.end(), [&](const auto& o) {
      return natural[index_of(o.first)] == o.second;
    });
    if (!matches) continue;
    den += cfg.p.exact;
    const Assignment world = evaluate(scm, cfg.values, forced_regime, {});
    if (world[index_of(yv)] == y_index) num += cfg.p.exact;
  }
  if (den == 0) return std::nullopt;
  return to_double(Rational(num / den));
}

std::optional<double> exact_counterfactual_single(const Scm& scm, const std::string& action, int a,
                                                  int a_prime, int y) {
  return exact_counterfactual(scm, {{action, a}}, {{action, a_prime}}, y);
}

EstimateReport naive_multi_estimate(const TrialLog& log, int a, int b, int a_act, int b_act, int y) {
  if (log.natural_names.size() != 2)
    throw Error(ErrorKind::Validation, "two-action estimator needs a two-action log");
  std::uint64_t num = 0, den = 0;
  for (const auto& row : log.rows) {
    if (row.natural[0] != a || row.acted[0] != a_act || row.natural[1] != b || row.acted[1] != b_act) continue;
    ++den;
    if (row.outcome == y) ++num;
  }
  const auto& an = log.natural_names;
  const auto& ac = log.acted_names;
  return ratio("naive P(" + log.outcome_name + "_{" + cell_name(an[0], a_act) + "," + cell_name(an[1], b_act) +
                   "}=" + std::to_string(y) + " | " + cell_name(an[0], a) + ", " + cell_name(an[1], b) + ") via " +
                   cell_name(ac[0], a_act) + ", " + cell_name(ac[1], b_act),
               num, den);
}

std::optional<double> naive_multi_limit(const TwinResult& tw, const Regime& regime, int a, int b, int a_act,
                                        int b_act, int y) {
  if (tw.copy_map.size() != 2) throw Error(ErrorKind::Validation, "naive limit needs a two-target twin");
  const auto joint = exact_joint<Rational>(tw.derived, regime);
  const std::size_t ca = joint.column(tw.copy_map[0].first), cap = joint.column(tw.copy_map[0].second);
  const std::size_t cb = joint.column(tw.copy_map[1].first), cbp = joint.column(tw.copy_map[1].second);
  const std::size_t cy = joint.column(tw.derived.name(tw.derived.reward_var()));
  auto cond = [&](std::span<const int> r) {
    return r[ca] == a && r[cap] == a_act && r[cb] == b && r[cbp] == b_act;
  };
  const Rational den = joint.probability(cond);
  if (den == 0) return std::nullopt;
  const Rational num = joint.probability([&](std::span<const int> r) { return cond(r) && r[cy] == y; });
  return to_double(Rational(num / den));
}

EstimateReport three_factor_estimate(const TrialLog& log, const ThreeFactorOptions& opt) {
  if (log.natural_names.size() != 2)
    throw Error(ErrorKind::Validation, "three-factor estimator needs a two-action log");
  if (!opt.acted_maps.empty() && opt.acted_maps.size() != 2)
    throw Error(ErrorKind::Validation, "three-factor estimator needs one acted map per action");
  if (opt.smoothing < 0) throw Error(ErrorKind::Argument, "smoothing must be nonnegative");

  const double alpha = opt.smoothing;
  const auto& dom_a = log.natural_domains[0];
  const auto& dom_b = log.natural_domains[1];
  const double k_y = static_cast<double>(std::max<std::size_t>(log.outcome_domain.size(), 2));
  auto acted_ok = [&](const TrialLog::Row& row, std::size_t j) {
    if (opt.acted_maps.empty()) return true;
    auto it = opt.acted_maps[j].find(row.natural[j]);
    return it != opt.acted_maps[j].end() && row.acted[j] == it->second;
  };
  auto smoothed = [&](std::uint64_t num, std::uint64_t den, double k) -> std::optional<double> {
    if (den == 0 && alpha == 0) return std::nullopt;
    return (static_cast<double>(num) + alpha) / (static_cast<double>(den) + alpha * k);
  };

  EstimateReport rep;
  rep.estimand = "P(" + log.outcome_name + "_rho=" + std::to_string(opt.y) + ") three-factor";

  const auto& an = log.natural_names[0];
  const auto& bn = log.natural_names[1];
  double total = 0.0;
  for (int a : dom_a) {
    std::uint64_t n_a = 0;
    for (const auto& row : log.rows)
      if (row.natural[0] == a) ++n_a;
    const auto f3 = smoothed(n_a, log.rows.size(), static_cast<double>(dom_a.size()));
    if (!f3) {
      rep.undefined_cells.push_back("P(" + cell_name(an, a) + ")");
      continue;
    }
    if (*f3 == 0.0) continue;
    std::uint64_t den2 = 0;
    for (const auto& row : log.rows)
      if (row.natural[0] == a && acted_ok(row, 0)) ++den2;
    for (int b : dom_b) {
      std::uint64_t num2 = 0, den1 = 0, num1 = 0;
      for (const auto& row : log.rows) {
        if (row.natural[0] != a || !acted_ok(row, 0) || row.natural[1] != b) continue;
        ++num2;
        if (!acted_ok(row, 1)) continue;
        ++den1;
        if (row.outcome == opt.y) ++num1;
      }
      const auto f2 = smoothed(num2, den2, static_cast<double>(dom_b.size()));
      if (!f2) {
        rep.undefined_cells.push_back("P(" + bn + "_{a'}=" + std::to_string(b) + " | " + cell_name(an, a) + ")");
        continue;
      }
      if (*f2 == 0.0) continue;
      const auto f1 = smoothed(num1, den1, k_y);
      if (!f1) {
        rep.undefined_cells.push_back("P(" + log.outcome_name + "=" + std::to_string(opt.y) + " | " +
                                      cell_name(an, a) + ", " + bn + "_{a'}=" + std::to_string(b) + ")");
        continue;
      }
      total += *f1 * *f2 * *f3;
    }
  }
  rep.partial = !rep.undefined_cells.empty();
  rep.point = total;
  return rep;
}

double exact_rho_value(const Scm& scm, const Regime& rho, int y) {
  const auto joint = exact_joint<double>(scm, rho);
  const std::size_t cy = joint.column(scm.name(scm.reward_var()));
  return joint.probability([&](std::span<const int> r) { return r[cy] == y; });
}

}  // namespace cftwin
