#include "sck/regression.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "sck/errors.hpp"

namespace sck::regression {

namespace {

constexpr double kRankTolerance = 1e-10;
constexpr double kWeakTolerance = 1e-10;

std::vector<std::string> default_names(Index k, const std::string& prefix) {
  std::vector<std::string> names;
  for (Index j = 0; j < k; ++j) names.push_back(prefix + std::to_string(j));
  return names;
}

// Coefficient estimate plus the per-row influence contributions
// psi_i = bread * w_i * e_i, so that beta_hat - beta ~ sum_i psi_i.
struct Fit {
  VectorXd beta;
  MatrixXd psi;  // n x k
};

// Rank check on an already-computed column-pivoted QR.
void check_rank(const Eigen::ColPivHouseholderQR<MatrixXd>& qr, Index k,
                const std::vector<std::string>& names, const char* what) {
  const MatrixXd r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<MatrixXd> svd(r);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv[0] : 0.0;
  Index rank = 0;
  for (Index j = 0; j < sv.size(); ++j)
    if (sv[j] > kRankTolerance * smax && sv[j] > 0.0) ++rank;
  if (rank == k) return;
  std::vector<std::string> dependent;
  const auto& perm = qr.colsPermutation().indices();
  for (Index j = rank; j < k; ++j) dependent.push_back(names[perm[j]]);
  std::sort(dependent.begin(), dependent.end());
  std::ostringstream msg;
  msg << what << " is rank deficient (rank " << rank << " of " << k << "); collinear columns:";
  for (const auto& c : dependent) msg << ' ' << c;
  throw RankDeficiencyError(msg.str(), dependent);
}

Fit fit_ols(const MatrixXd& x, const VectorXd& y, const std::vector<std::string>& names) {
  const Index n = x.rows(), k = x.cols();
  if (y.size() != n) throw EstimationError("design rows and response length differ");
  if (n <= k) throw EstimationError("need more observations than regressors");
  Eigen::ColPivHouseholderQR<MatrixXd> qr(x);
  check_rank(qr, k, names, "design");
  Fit fit;
  fit.beta = qr.solve(y);
  const VectorXd resid = y - x * fit.beta;
  // (X'X)^{-1} = P R^{-1} R^{-T} P'
  const MatrixXd r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const MatrixXd rinv =
      r.triangularView<Eigen::Upper>().solve(MatrixXd::Identity(k, k));
  const auto perm = qr.colsPermutation();
  const MatrixXd bread = perm * (rinv * rinv.transpose()) * perm.transpose();
  fit.psi = (x.array().colwise() * resid.array()).matrix() * bread;  // bread symmetric
  return fit;
}

Fit fit_iv(const VectorXd& y, const VectorXd& endog, const VectorXd& instrument,
           const MatrixXd& controls, const std::vector<std::string>& control_names,
           double* first_stage_f) {
  const Index n = y.size(), c = controls.cols(), k = c + 1;
  if (endog.size() != n || instrument.size() != n || controls.rows() != n)
    throw EstimationError("2SLS inputs have different lengths");
  if (n <= k) throw EstimationError("need more observations than regressors");

  VectorXd z_res = instrument, x_res = endog, y_res = y;
  Eigen::ColPivHouseholderQR<MatrixXd> qr_c;
  if (c > 0) {
    qr_c.compute(controls);
    check_rank(qr_c, c, control_names, "exogenous controls");
    z_res -= controls * qr_c.solve(instrument);
    x_res -= controls * qr_c.solve(endog);
    y_res -= controls * qr_c.solve(y);
  }
  const double z_norm = z_res.norm(), x_norm = x_res.norm();
  if (z_norm <= kRankTolerance * std::max(instrument.norm(), 1.0))
    throw RankDeficiencyError("instrument is collinear with the exogenous controls", {"instrument"});

  // First stage: endog on [instrument, controls].
  MatrixXd w(n, k);
  w.col(0) = instrument;
  if (c > 0) w.rightCols(c) = controls;
  double f_stat = 0.0;
  {
    std::vector<std::string> names{"instrument"};
    names.insert(names.end(), control_names.begin(), control_names.end());
    Fit first = fit_ols(w, endog, names);
    const double slope = first.beta[0];
    const double var = first.psi.col(0).squaredNorm() * static_cast<double>(n) / (n - k);
    f_stat = var > 0.0 ? slope * slope / var
                       : (slope == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  }
  if (first_stage_f) *first_stage_f = f_stat;

  const double s = z_res.dot(x_res);
  if (x_norm == 0.0 || std::abs(s) <= kWeakTolerance * z_norm * x_norm) {
    std::ostringstream msg;
    msg << "weak/zero first stage (first-stage F = " << f_stat << ")";
    throw WeakFirstStageError(msg.str(), f_stat);
  }

  Fit fit;
  fit.beta.resize(k);
  fit.beta[0] = z_res.dot(y_res) / s;
  if (c > 0) fit.beta.tail(c) = qr_c.solve(VectorXd(y - fit.beta[0] * endog));
  MatrixXd xmat(n, k);
  xmat.col(0) = endog;
  if (c > 0) xmat.rightCols(c) = controls;
  const VectorXd resid = y - xmat * fit.beta;
  // bread = (W'X)^{-1}; psi_i = bread * w_i * e_i
  const MatrixXd a = w.transpose() * xmat;
  const MatrixXd bread = a.fullPivLu().inverse();
  fit.psi = (w.array().colwise() * resid.array()).matrix() * bread.transpose();
  return fit;
}

// Dense 0..G-1 codes for arbitrary cluster ids, in first-seen order.
std::vector<Index> dense_codes(const std::vector<std::int64_t>& ids, Index* groups) {
  std::unordered_map<std::int64_t, Index> map;
  map.reserve(ids.size());
  std::vector<Index> codes(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto [it, inserted] = map.try_emplace(ids[i], static_cast<Index>(map.size()));
    codes[i] = it->second;
  }
  *groups = static_cast<Index>(map.size());
  return codes;
}

MatrixXd robust_vcov(const MatrixXd& psi, Index n, Index k) {
  const MatrixXd meat = psi.transpose() * psi;
  return meat * (static_cast<double>(n) / static_cast<double>(n - k));
}

MatrixXd cluster_vcov(const MatrixXd& psi, const std::vector<std::int64_t>& ids, Index n, Index k,
                      Index* clusters) {
  if (static_cast<Index>(ids.size()) != psi.rows())
    throw EstimationError("cluster ids do not match the number of rows");
  Index g = 0;
  const auto codes = dense_codes(ids, &g);
  if (g < 2) throw EstimationError("clustered standard errors need at least two clusters");
  MatrixXd sums = MatrixXd::Zero(g, psi.cols());
  for (Index i = 0; i < psi.rows(); ++i) sums.row(codes[i]) += psi.row(i);
  *clusters = g;
  const double factor = static_cast<double>(g) / (g - 1) * static_cast<double>(n - 1) / (n - k);
  return sums.transpose() * sums * factor;
}

MatrixXd symmetrize(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

SeMode default_se_mode(const ObservationTable& table) {
  if (!table.cluster()) return SeMode::robust();
  const auto& codes = table.cluster()->codes;
  return SeMode::cluster(std::vector<std::int64_t>(codes.begin(), codes.end()));
}

Index CoefficientEstimates::index_of(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw EstimationError("no coefficient named '" + std::string(name) + "'");
  return it - names.begin();
}

CoefficientEstimates ols(const MatrixXd& design, const VectorXd& response, const SeMode& se_mode,
                         std::vector<std::string> names) {
  const Index n = design.rows(), k = design.cols();
  if (names.empty()) names = default_names(k, "x");
  if (static_cast<Index>(names.size()) != k) throw EstimationError("name count differs from columns");
  Fit fit = fit_ols(design, response, names);
  CoefficientEstimates out;
  out.beta = std::move(fit.beta);
  out.n = n;
  out.names = std::move(names);
  out.vcov = se_mode.clustered() ? cluster_vcov(fit.psi, se_mode.ids(), n, k, &out.clusters)
                                 : robust_vcov(fit.psi, n, k);
  out.vcov = symmetrize(out.vcov);
  return out;
}

CoefficientEstimates tsls(const VectorXd& response, const VectorXd& endogenous,
                          const VectorXd& instrument, const MatrixXd& exog, const SeMode& se_mode,
                          std::vector<std::string> exog_names) {
  const Index n = response.size(), k = exog.cols() + 1;
  if (exog_names.empty()) exog_names = default_names(exog.cols(), "w");
  double f = 0.0;
  Fit fit = fit_iv(response, endogenous, instrument, exog, exog_names, &f);
  CoefficientEstimates out;
  out.beta = std::move(fit.beta);
  out.n = n;
  out.names = {"endogenous"};
  out.names.insert(out.names.end(), exog_names.begin(), exog_names.end());
  out.first_stage_f = f;
  out.vcov = se_mode.clustered() ? cluster_vcov(fit.psi, se_mode.ids(), n, k, &out.clusters)
                                 : robust_vcov(fit.psi, n, k);
  out.vcov = symmetrize(out.vcov);
  return out;
}

MatrixXd intercept_design(Index n) { return MatrixXd::Ones(n, 1); }

MatrixXd intercept_and(const VectorXd& regressor) {
  MatrixXd x(regressor.size(), 2);
  x.col(0).setOnes();
  x.col(1) = regressor;
  return x;
}

std::vector<std::int64_t> row_ids(Index n) {
  std::vector<std::int64_t> ids(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) ids[i] = i;
  return ids;
}

CoefficientEstimates stacked_regression(const std::vector<Stack>& stacks,
                                        const std::vector<std::int64_t>& shared_ids) {
  if (stacks.empty()) throw EstimationError("no stacks to estimate");
  std::vector<Fit> fits;
  std::vector<std::string> names;
  Index total_rows = 0, total_k = 0;
  for (const auto& s : stacks) {
    const Index n = s.response.size();
    const auto* ids = s.ids ? &*s.ids : &shared_ids;
    if (static_cast<Index>(ids->size()) != n || s.regressors.rows() != n ||
        (s.controls.size() > 0 && s.controls.rows() != n))
      throw EstimationError("stack '" + s.name + "' length does not match its cluster ids");
    std::vector<std::string> reg_names = s.regressor_names;
    if (reg_names.empty()) reg_names = default_names(s.regressors.cols(), "x");
    std::vector<std::string> ctl_names = s.control_names;
    if (ctl_names.empty()) ctl_names = default_names(s.controls.cols(), "w");

    MatrixXd controls(n, s.controls.cols() + 1);
    if (s.controls.cols() > 0) controls.leftCols(s.controls.cols()) = s.controls;
    controls.rightCols(1).setOnes();
    ctl_names.push_back("_cons");

    Fit fit;
    if (s.instrument) {
      if (s.regressors.cols() != 1)
        throw EstimationError("IV stack '" + s.name + "' must have exactly one regressor");
      fit = fit_iv(s.response, s.regressors.col(0), *s.instrument, controls, ctl_names, nullptr);
    } else {
      MatrixXd x(n, s.regressors.cols() + controls.cols());
      x << s.regressors, controls;
      std::vector<std::string> all = reg_names;
      all.insert(all.end(), ctl_names.begin(), ctl_names.end());
      fit = fit_ols(x, s.response, all);
    }
    for (const auto& r : reg_names) names.push_back(s.name + ":" + r);
    for (const auto& c : ctl_names) names.push_back(s.name + ":" + c);
    total_rows += n;
    total_k += fit.beta.size();
    fits.push_back(std::move(fit));
  }

  // Accumulate influence rows per cluster across all stacks.
  std::unordered_map<std::int64_t, Index> code_of;
  for (const auto& s : stacks)
    for (auto id : (s.ids ? *s.ids : shared_ids)) code_of.try_emplace(id, static_cast<Index>(code_of.size()));
  const Index g = static_cast<Index>(code_of.size());
  if (g < 2) throw EstimationError("clustered standard errors need at least two clusters");

  CoefficientEstimates out;
  out.beta.resize(total_k);
  MatrixXd sums = MatrixXd::Zero(g, total_k);
  Index offset = 0;
  for (std::size_t s = 0; s < stacks.size(); ++s) {
    const auto& ids = stacks[s].ids ? *stacks[s].ids : shared_ids;
    const Index k = fits[s].beta.size();
    out.beta.segment(offset, k) = fits[s].beta;
    for (Index i = 0; i < fits[s].psi.rows(); ++i)
      sums.block(code_of[ids[i]], offset, 1, k) += fits[s].psi.row(i);
    offset += k;
  }
  const double factor = static_cast<double>(g) / (g - 1) *
                        static_cast<double>(total_rows - 1) / (total_rows - total_k);
  out.vcov = symmetrize(sums.transpose() * sums * factor);
  out.n = total_rows;
  out.names = std::move(names);
  out.clusters = g;
  return out;
}

// --- Anderson-Rubin ---------------------------------------------------------

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error("normal quantile needs 0 < p < 1");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double normal_critical(double level) {
  if (!(level > 0.0 && level < 1.0)) throw Error("coverage level must lie in (0, 1)");
  return normal_quantile(1.0 - (1.0 - level) / 2.0);
}

bool ArConfidenceSet::contains(double c) const {
  for (const auto& iv : intervals)
    if (c >= iv.lower && c <= iv.upper) return true;
  return false;
}

double ar_statistic(const VectorXd& instrument, const VectorXd& response, const SeMode& se_mode) {
  const auto fit = ols(intercept_and(instrument), response, se_mode, {"_cons", "instrument"});
  const double slope = fit.beta[1];
  const double se = fit.se(1);
  if (se > 0.0) return slope / se;
  return slope == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), slope);
}

ArConfidenceSet anderson_rubin_ci(const VectorXd& instrument,
                                  const std::function<VectorXd(double)>& response_at,
                                  const SeMode& se_mode, double level, double center,
                                  double scale, const ArOptions& options) {
  if (options.grid_points < 2) throw ConfigError("AR grid needs at least two points");
  const double crit = normal_critical(level);
  ArConfidenceSet out;
  out.level = level;
  if (!(scale > 0.0) || !std::isfinite(scale)) scale = 1.0;
  out.grid_lower = options.lower.value_or(center - options.half_width_se * scale);
  out.grid_upper = options.upper.value_or(center + options.half_width_se * scale);
  if (!(out.grid_upper > out.grid_lower)) throw ConfigError("AR grid is empty");

  auto accepted = [&](double c) {
    return std::abs(ar_statistic(instrument, response_at(c), se_mode)) <= crit;
  };
  const int m = options.grid_points;
  std::vector<double> grid(m);
  std::vector<char> acc(m);
  for (int i = 0; i < m; ++i) {
    grid[i] = out.grid_lower + (out.grid_upper - out.grid_lower) * i / (m - 1);
    acc[i] = accepted(grid[i]);
  }
  auto refine = [&](double inside, double outside) {
    // Returns the boundary point, kept on the accepted side.
    while (std::abs(outside - inside) >
           options.rel_tol * std::max(1.0, std::abs(0.5 * (inside + outside)))) {
      const double mid = 0.5 * (inside + outside);
      (accepted(mid) ? inside : outside) = mid;
    }
    return inside;
  };
  int i = 0;
  while (i < m) {
    if (!acc[i]) {
      ++i;
      continue;
    }
    const int start = i;
    while (i + 1 < m && acc[i + 1]) ++i;
    const double lo = start == 0 ? grid[0] : refine(grid[start], grid[start - 1]);
    const double hi = i == m - 1 ? grid[m - 1] : refine(grid[i], grid[i + 1]);
    out.intervals.push_back({lo, hi});
    if (start == 0) out.unbounded_below = true;
    if (i == m - 1) out.unbounded_above = true;
    ++i;
  }
  if (!out.bounded())
    out.warnings.push_back("AR confidence set reaches the edge of the search grid");
  return out;
}

ArConfidenceSet anderson_rubin_ci(const ObservationTable& table, const VectorXd& h, double level,
                                  const ArOptions& options) {
  if (!table.y_binary()) throw DataError("AR intervals for mean characteristics need a binary outcome");
  if (h.size() != table.n()) throw EstimationError("h length differs from table rows");
  const SeMode mode = default_se_mode(table);
  const VectorXd& y = table.y();
  std::optional<double> point;
  double center = 0.0, scale = 0.0;
  std::vector<std::string> warnings;
  try {
    const VectorXd hy = h.cwiseProduct(y);
    const auto fit = tsls(hy, y, table.z(), intercept_design(table.n()), mode, {"_cons"});
    point = fit.beta[0];
    center = *point;
    scale = fit.se(0);
  } catch (const EstimationError&) {
    // Unidentified: center on the sample mean of h and scale by its spread.
    center = h.mean();
    scale = std::sqrt((h.array() - center).square().mean());
    warnings.push_back("reduced form is zero in sample; AR set is unbounded on the grid");
  }
  auto response_at = [&](double c) -> VectorXd {
    return ((h.array() - c) * y.array()).matrix();
  };
  ArConfidenceSet out =
      anderson_rubin_ci(table.z(), response_at, mode, level, center, scale, options);
  out.point_estimate = point;
  if (point && (*point < out.grid_lower || *point > out.grid_upper))
    out.warnings.push_back("AR grid does not bracket the Wald point estimate");
  out.warnings.insert(out.warnings.begin(), warnings.begin(), warnings.end());
  return out;
}

}  // namespace sck::regression
