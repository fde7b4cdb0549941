#include "sck/identification.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sck/errors.hpp"
#include "sck/rng.hpp"

namespace sck::ident {

namespace reg = sck::regression;

namespace {

constexpr double kZeroDenominator = 1e-12;

void require_binary_y(const ObservationTable& table, const char* what) {
  if (!table.y_binary())
    throw DataError(std::string(what) + " requires a binary outcome");
}

WaldEstimate from_coefficient(double value, double se, double level, std::string label,
                              double numerator, double denominator) {
  const double crit = reg::normal_critical(level);
  WaldEstimate w;
  w.value = value;
  w.se = se;
  w.ci = {value - crit * se, value + crit * se};
  w.numerator = numerator;
  w.denominator = denominator;
  w.label = std::move(label);
  w.level = level;
  return w;
}

// Slope of v on [1, r] as a WaldEstimate with denominator 1.
WaldEstimate difference_of_means(const ObservationTable& table, const VectorXd& v,
                                 const VectorXd& r, double level, std::string label) {
  const auto fit = reg::ols(reg::intercept_and(r), v, reg::default_se_mode(table), {"_cons", "arm"});
  return from_coefficient(fit.beta[1], fit.se(1), level, std::move(label), fit.beta[1], 1.0);
}

[[noreturn]] void unidentified() {
  throw EstimationError(
      "zero reduced form (or first stage): target share unidentified in sample");
}

std::string format_edge(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

}  // namespace

double arm_difference(const VectorXd& v, const VectorXd& z) {
  double s1 = 0.0, s0 = 0.0;
  Index n1 = 0;
  for (Index i = 0; i < v.size(); ++i) {
    if (z[i] == 1.0) {
      s1 += v[i];
      ++n1;
    } else {
      s0 += v[i];
    }
  }
  const Index n0 = v.size() - n1;
  if (n1 == 0 || n0 == 0) throw DataError("degenerate assignment arm");
  return s1 / n1 - s0 / n0;
}

WeightSet compute_weights(const ObservationTable& table, std::optional<double> tau) {
  require_binary_y(table, "weights");
  WeightSet w;
  w.tau = tau.value_or(table.treated_share());
  if (!(w.tau > 0.0 && w.tau < 1.0)) throw ConfigError("tau must lie strictly between 0 and 1");
  const double t = w.tau;
  const auto z = table.z().array(), d = table.d().array(), y = table.y().array();
  w.kappa = (1.0 - d * (1.0 - z) / (1.0 - t) - (1.0 - d) * z / t).matrix();
  w.kappa0 = ((1.0 - d) * (1.0 - z) / (1.0 - t) - (1.0 - d) * z / t).matrix();
  w.kappa1 = (d * z / t - d * (1.0 - z) / (1.0 - t)).matrix();
  w.pi = (w.kappa.array() - w.kappa0.array() * y - w.kappa1.array() * (1.0 - y)).matrix();
  return w;
}

WaldEstimate supercomplier_share(const ObservationTable& table, double level) {
  return difference_of_means(table, table.y(), table.z(), level,
                             table.y_binary() ? "share_cc" : "TE-weighted share_cc");
}

WaldEstimate first_stage(const ObservationTable& table, double level) {
  return difference_of_means(table, table.d(), table.z(), level, "share_complier");
}

OtherShares other_group_shares(const ObservationTable& table, double level) {
  require_binary_y(table, "other group shares");
  const auto d = table.d().array(), y = table.y().array();
  const VectorXd untreated_y = ((1.0 - d) * y).matrix();
  const VectorXd treated_not_y = (d * (1.0 - y)).matrix();
  const VectorXd not_z = (1.0 - table.z().array()).matrix();
  return {difference_of_means(table, untreated_y, not_z, level, "share_ca"),
          difference_of_means(table, treated_not_y, table.z(), level, "share_cn")};
}

VectorXd target_indicator(const ObservationTable& table, Target target) {
  const auto d = table.d().array(), y = table.y().array();
  switch (target) {
    case Target::kPopulation: return VectorXd::Ones(table.n());
    case Target::kComplier: return table.d();
    case Target::kSupercomplier: return table.y();
    case Target::kCa: return ((1.0 - d) * y).matrix();
    case Target::kCn: return (d * (1.0 - y)).matrix();
  }
  return VectorXd::Ones(table.n());
}

WaldEstimate characteristics_wald(const ObservationTable& table, const VectorXd& h, Target target,
                                  double level) {
  if (h.size() != table.n()) throw EstimationError("h length differs from table rows");
  if (!h.allFinite()) throw DataError("h(X) has non-finite values");
  const auto mode = reg::default_se_mode(table);
  if (target == Target::kPopulation) {
    const auto fit = reg::ols(reg::intercept_design(table.n()), h, mode, {"_cons"});
    return from_coefficient(fit.beta[0], fit.se(0), level, "population mean", fit.beta[0], 1.0);
  }
  if ((target == Target::kCa || target == Target::kCn)) require_binary_y(table, "ca/cn characteristics");
  const VectorXd t = target_indicator(table, target);
  const double denominator = arm_difference(t, table.z());
  if (std::abs(denominator) <= kZeroDenominator) unidentified();
  const VectorXd ht = h.cwiseProduct(t);
  const double numerator = arm_difference(ht, table.z());
  const auto fit = reg::tsls(ht, t, table.z(), reg::intercept_design(table.n()), mode, {"_cons"});
  std::string label = std::string(target_name(target)) + " mean";
  if (target == Target::kSupercomplier && !table.y_binary()) label = "TE-weighted supercomplier mean";
  return from_coefficient(fit.beta[0], fit.se(0), level, std::move(label), numerator, denominator);
}

WaldEstimate characteristics_plugin(const ObservationTable& table, const VectorXd& h, Target target,
                                    double level, std::optional<double> tau) {
  if (target != Target::kSupercomplier && target != Target::kComplier)
    throw ConfigError("plug-in characteristics support only supercomplier and complier targets");
  if (h.size() != table.n()) throw EstimationError("h length differs from table rows");
  const double t = tau.value_or(table.treated_share());
  if (!(t > 0.0 && t < 1.0)) throw ConfigError("tau must lie strictly between 0 and 1");
  const VectorXd endog = target == Target::kSupercomplier ? table.y() : table.d();
  const double denominator = arm_difference(endog, table.z());
  if (std::abs(denominator) <= kZeroDenominator) unidentified();
  const VectorXd response = h.cwiseProduct((endog.array() - (1.0 - t)).matrix());
  const double numerator = arm_difference(response, table.z());
  const auto fit = reg::tsls(response, endog, table.z(), reg::intercept_design(table.n()),
                             reg::default_se_mode(table), {"_cons"});
  std::string label = std::string(target_name(target)) + " mean (plug-in)";
  return from_coefficient(fit.beta[0], fit.se(0), level, std::move(label), numerator, denominator);
}

FinkNotoReport fink_noto_equivalence_check(const ObservationTable& table, const VectorXd& h) {
  if (h.size() != table.n()) throw EstimationError("h length differs from table rows");
  const auto& z = table.z();
  const auto& d = table.d();
  double n1 = 0, n0 = 0, d1 = 0, d0 = 0, h1 = 0, h0 = 0;
  for (Index i = 0; i < table.n(); ++i) {
    if (z[i] == 1.0) {
      ++n1;
      if (d[i] == 1.0) {
        ++d1;
        h1 += h[i];
      }
    } else {
      ++n0;
      if (d[i] == 1.0) {
        ++d0;
        h0 += h[i];
      }
    }
  }
  FinkNotoReport r;
  r.share_always_taker = d0 / n0;
  r.share_complier = d1 / n1 - d0 / n0;
  if (std::abs(r.share_complier) <= kZeroDenominator)
    throw EstimationError("complier share is zero in sample");
  r.mean_treated = d1 > 0 ? h1 / d1 : 0.0;
  r.mean_always_taker = d0 > 0 ? h0 / d0 : 0.0;
  r.assembled = ((r.share_always_taker + r.share_complier) * r.mean_treated -
                 r.share_always_taker * r.mean_always_taker) /
                r.share_complier;
  r.tsls = reg::tsls(h.cwiseProduct(d), d, z, reg::intercept_design(table.n())).beta[0];
  r.abs_difference = std::abs(r.assembled - r.tsls);
  r.rel_difference = r.abs_difference / std::max(1.0, std::abs(r.tsls));
  r.equal = r.rel_difference < 1e-12;
  return r;
}

CdfEstimate characteristics_cdf(const ObservationTable& table, const std::string& covariate,
                                std::vector<double> grid, bool rearrange, Target target,
                                double level) {
  if (grid.empty()) throw ConfigError("CDF grid is empty");
  std::sort(grid.begin(), grid.end());
  const VectorXd x = table.covariate(covariate);
  CdfEstimate out;
  out.grid = grid;
  for (double g : grid) {
    const VectorXd h = (x.array() <= g).cast<double>().matrix();
    auto est = characteristics_wald(table, h, target, level);
    est.label = "cdf(" + covariate + " <= " + format_edge(g) + ")";
    out.raw.push_back(std::move(est));
  }
  if (rearrange) {
    for (const auto& r : out.raw) out.rearranged.push_back(r.value);
    std::sort(out.rearranged.begin(), out.rearranged.end());
  }
  return out;
}

std::pair<std::vector<int>, std::vector<double>> discretize(const VectorXd& x, int bins) {
  if (bins < 1) throw ConfigError("bin count must be positive");
  std::vector<double> sorted(x.data(), x.data() + x.size());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<double> edges;
  if (static_cast<int>(distinct.size()) <= bins) {
    edges = distinct;
  } else {
    const std::size_t n = sorted.size();
    for (int j = 1; j <= bins; ++j) {
      const std::size_t pos = (static_cast<std::size_t>(j) * n + bins - 1) / bins;
      edges.push_back(sorted[std::max<std::size_t>(pos, 1) - 1]);
    }
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  }
  std::vector<int> codes(x.size());
  for (Index i = 0; i < x.size(); ++i)
    codes[i] = static_cast<int>(std::lower_bound(edges.begin(), edges.end(), x[i]) - edges.begin());
  return {std::move(codes), std::move(edges)};
}

double weighted_quantile(const VectorXd& x, const VectorXd& weights, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("quantile level must lie in (0, 1)");
  std::vector<Index> order(x.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return x[a] < x[b]; });
  const double total = weights.sum();
  if (!(total > 0.0)) throw EstimationError("no supercomplier mass detected");
  double cum = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    cum += weights[order[k]];
    // Ties in x share one step of the weighted CDF.
    if (k + 1 < order.size() && x[order[k + 1]] == x[order[k]]) continue;
    if (cum >= theta * total * (1.0 - 1e-12)) return x[order[k]];
  }
  return x[order.back()];
}

namespace {

QuantileEstimate quantile_point(const ObservationTable& table, const VectorXd& x, double theta,
                                const QuantileOptions& options) {
  const WeightSet w = compute_weights(table);
  auto [bin_codes, edges] = discretize(x, options.bins);
  const int nbins = static_cast<int>(edges.size());
  const bool with_y = options.conditioning == Conditioning::kYX;
  const int ncells = with_y ? 2 * nbins : nbins;
  std::vector<double> sums(ncells, 0.0);
  std::vector<Index> counts(ncells, 0);
  std::vector<int> cell(table.n());
  for (Index i = 0; i < table.n(); ++i) {
    cell[i] = bin_codes[i] + (with_y ? nbins * static_cast<int>(table.y()[i]) : 0);
    sums[cell[i]] += w.pi[i];
    ++counts[cell[i]];
  }
  QuantileEstimate out;
  out.theta = theta;
  std::vector<double> xs(x.data(), x.data() + x.size());
  std::sort(xs.begin(), xs.end());
  const bool exact_values = std::unique(xs.begin(), xs.end()) - xs.begin() == nbins;
  std::vector<double> weight(ncells, 0.0);
  for (int c = 0; c < ncells; ++c) {
    if (counts[c] == 0) continue;
    QuantileCell qc;
    const int b = c % nbins;
    qc.label = (with_y ? "y=" + std::to_string(c / nbins) + "," : std::string()) +
               (exact_values ? "x=" : "x<=") +
               format_edge(edges[b]);
    qc.count = counts[c];
    qc.pi_nu = sums[c] / counts[c];
    qc.weight = std::max(qc.pi_nu, 0.0);
    if (qc.pi_nu < 0.0) ++out.clipped_cells;
    weight[c] = qc.weight;
    out.cells.push_back(std::move(qc));
  }
  VectorXd row_weight(table.n());
  for (Index i = 0; i < table.n(); ++i) row_weight[i] = weight[cell[i]];
  out.value = weighted_quantile(x, row_weight, theta);
  if (out.clipped_cells > 0)
    out.warnings.push_back(std::to_string(out.clipped_cells) +
                           " quantile cell weight(s) were negative and clipped to zero");
  return out;
}

}  // namespace

QuantileEstimate supercomplier_quantile(const ObservationTable& table, const std::string& covariate,
                                        double theta, const QuantileOptions& options) {
  require_binary_y(table, "quantile estimation");
  const VectorXd x = table.covariate(covariate);
  QuantileEstimate out = quantile_point(table, x, theta, options);
  if (options.bootstrap_reps > 0) {
    std::vector<double> draws;
    int failed = 0;
    const Index n = table.n();
    for (int r = 0; r < options.bootstrap_reps; ++r) {
      StreamRng rng(options.seed, static_cast<std::uint64_t>(r));
      std::vector<Index> rows(n);
      for (auto& i : rows) i = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
      try {
        const auto boot = table.subset(rows);
        draws.push_back(quantile_point(boot, boot.covariate(covariate), theta, options).value);
      } catch (const Error&) {
        ++failed;
      }
    }
    if (draws.size() >= 2) {
      const double mean = std::accumulate(draws.begin(), draws.end(), 0.0) / draws.size();
      double ss = 0.0;
      for (double v : draws) ss += (v - mean) * (v - mean);
      out.se = std::sqrt(ss / (draws.size() - 1));
    }
    if (failed > 0)
      out.warnings.push_back(std::to_string(failed) + " bootstrap resample(s) failed and were skipped");
  }
  return out;
}

StratifiedEstimate stratified_characteristics(const ObservationTable& table, const VectorXd& h,
                                              double level) {
  require_binary_y(table, "stratified characteristics");
  if (!table.stratum()) throw ConfigError("stratified characteristics need a stratum column");
  if (h.size() != table.n()) throw EstimationError("h length differs from table rows");
  const auto& strata = *table.stratum();
  const Index k = strata.levels();
  const Index n = table.n();
  const auto& z = table.z();
  const auto& y = table.y();

  MatrixXd dummies = MatrixXd::Zero(n, k);
  for (Index i = 0; i < n; ++i) dummies(i, strata.codes[i]) = 1.0;
  std::vector<std::string> names;
  for (const auto& l : strata.labels) names.push_back("stratum[" + l + "]");

  StratifiedEstimate out;
  const VectorXd hy = h.cwiseProduct(y);
  double num = 0.0, den = 0.0;
  for (Index s = 0; s < k; ++s) {
    std::vector<Index> rows;
    for (Index i = 0; i < n; ++i)
      if (strata.codes[i] == s) rows.push_back(i);
    VectorXd zs(rows.size()), ys(rows.size()), hys(rows.size());
    for (std::size_t j = 0; j < rows.size(); ++j) {
      zs[j] = z[rows[j]];
      ys[j] = y[rows[j]];
      hys[j] = hy[rows[j]];
    }
    StratumComponent c;
    c.label = strata.labels[s];
    c.n = static_cast<Index>(rows.size());
    c.share = static_cast<double>(c.n) / n;
    c.tau = zs.mean();
    if (!(c.tau > 0.0 && c.tau < 1.0))
      throw DataError("stratum '" + c.label + "' has only one assignment arm");
    c.reduced_form = arm_difference(ys, zs);
    const double var_z = c.tau * (1.0 - c.tau);
    c.omega = c.share * c.reduced_form * var_z;
    // omega_W * chi_W written without dividing by RF_W so empty strata still count.
    num += c.share * var_z * arm_difference(hys, zs);
    den += c.omega;
    if (std::abs(c.reduced_form) > kZeroDenominator) {
      c.mean = arm_difference(hys, zs) / c.reduced_form;
    } else {
      out.warnings.push_back("stratum '" + c.label + "' has zero reduced form; omega = 0");
    }
    out.strata.push_back(std::move(c));
  }
  if (std::abs(den) <= kZeroDenominator) unidentified();
  out.decomposition = num / den;
  const auto fit = reg::tsls(hy, y, z, dummies, reg::default_se_mode(table), names);
  out.fe_2sls = from_coefficient(fit.beta[0], fit.se(0), level, "stratified supercomplier mean",
                                 num, den);
  out.abs_difference = std::abs(out.fe_2sls.value - out.decomposition);
  if (out.abs_difference > 1e-8 * std::max(1.0, std::abs(out.decomposition)))
    out.warnings.push_back("FE-2SLS and omega-weighted decomposition disagree beyond 1e-8");
  return out;
}

double bias_under_violation(double share_cf, double share_cc, double mean_cc, double mean_cf) {
  if (share_cf < 0.0 || share_cc < 0.0) throw ConfigError("shares must be nonnegative");
  const double rf = share_cc - share_cf;
  if (std::abs(rf) <= kZeroDenominator) unidentified();
  const double xi = share_cf / rf;
  return mean_cc + xi * (mean_cc - mean_cf);
}

GroupSummary summarize(const ObservationTable& table, const std::vector<std::string>& covariates,
                       double level) {
  require_binary_y(table, "group summary");
  GroupSummary out;
  out.share_cc = supercomplier_share(table, level);
  const auto other = other_group_shares(table, level);
  out.share_ca = other.ca;
  out.share_cn = other.cn;
  out.share_complier = first_stage(table, level);

  std::vector<std::int64_t> ids;
  if (table.cluster()) {
    ids.assign(table.cluster()->codes.begin(), table.cluster()->codes.end());
  } else {
    ids = reg::row_ids(table.n());
  }
  std::vector<Target> identified;
  for (Target t : kAllTargets) {
    if (t == Target::kPopulation) {
      identified.push_back(t);
      continue;
    }
    const double den = arm_difference(target_indicator(table, t), table.z());
    if (std::abs(den) > kZeroDenominator) {
      identified.push_back(t);
    } else {
      out.warnings.push_back(std::string(target_name(t)) +
                             " share is zero in sample; its characteristics are omitted");
    }
  }

  for (const auto& name : covariates) {
    const VectorXd h = table.covariate(name);
    std::vector<reg::Stack> stacks;
    for (Target t : identified) {
      reg::Stack s;
      s.name = std::string(target_name(t));
      if (t == Target::kPopulation) {
        s.response = h;
        s.regressors = MatrixXd(table.n(), 0);
      } else {
        const VectorXd ti = target_indicator(table, t);
        s.response = h.cwiseProduct(ti);
        s.regressors = ti;
        s.regressor_names = {"mean"};
        s.instrument = table.z();
      }
      stacks.push_back(std::move(s));
    }
    const auto fit = reg::stacked_regression(stacks, ids);
    CharacteristicRow row;
    row.covariate = name;
    std::map<Target, Index> pos;
    for (Target t : identified) {
      const std::string coef = std::string(target_name(t)) +
                               (t == Target::kPopulation ? ":_cons" : ":mean");
      const Index j = fit.index_of(coef);
      pos[t] = j;
      WaldEstimate w = from_coefficient(fit.beta[j], fit.se(j), level,
                                        std::string(target_name(t)) + " mean", fit.beta[j], 1.0);
      if (t != Target::kPopulation) {
        const VectorXd ti = target_indicator(table, t);
        w.denominator = arm_difference(ti, table.z());
        w.numerator = arm_difference(h.cwiseProduct(ti), table.z());
      }
      row.means.emplace(t, std::move(w));
    }
    for (std::size_t a = 0; a < identified.size(); ++a) {
      for (std::size_t b = a + 1; b < identified.size(); ++b) {
        const Index i = pos[identified[a]], j = pos[identified[b]];
        Difference diff;
        diff.a = identified[a];
        diff.b = identified[b];
        diff.value = fit.beta[i] - fit.beta[j];
        const double var = fit.vcov(i, i) + fit.vcov(j, j) - 2.0 * fit.vcov(i, j);
        diff.se = std::sqrt(std::max(var, 0.0));
        row.differences.push_back(diff);
      }
    }
    out.characteristics.push_back(std::move(row));
  }
  return out;
}

}  // namespace sck::ident
