#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sck/data_model.hpp"

namespace sck::regression {

// Standard-error flavour. Robust is HC1, n/(n-k); clustered uses
// G/(G-1) * (N-1)/(N-K).
class SeMode {
 public:
  static SeMode robust() { return SeMode{}; }
  static SeMode cluster(std::vector<std::int64_t> ids) {
    SeMode m;
    m.ids_ = std::move(ids);
    return m;
  }
  bool clustered() const noexcept { return ids_.has_value(); }
  const std::vector<std::int64_t>& ids() const { return *ids_; }

 private:
  std::optional<std::vector<std::int64_t>> ids_;
};

// Clusters by the table's cluster column when present, robust otherwise.
SeMode default_se_mode(const ObservationTable& table);

struct CoefficientEstimates {
  VectorXd beta;
  MatrixXd vcov;
  Index n = 0;
  std::vector<std::string> names;
  std::optional<double> first_stage_f;
  Index clusters = 0;  // 0 when not clustered

  double se(Index i) const { return std::sqrt(std::max(vcov(i, i), 0.0)); }
  Index index_of(std::string_view name) const;
  double coef(std::string_view name) const { return beta[index_of(name)]; }
  double se(std::string_view name) const { return se(index_of(name)); }
};

// Least squares via column-pivoted QR. Throws RankDeficiencyError naming the
// dependent columns when a singular value of the design falls below 1e-10
// relative to the largest.
CoefficientEstimates ols(const MatrixXd& design, const VectorXd& response,
                         const SeMode& se_mode = SeMode::robust(),
                         std::vector<std::string> names = {});

// Just-identified 2SLS with one endogenous regressor and one excluded
// instrument. `exog` must carry its own intercept column if one is wanted.
// The first coefficient is the endogenous one.
CoefficientEstimates tsls(const VectorXd& response, const VectorXd& endogenous,
                          const VectorXd& instrument, const MatrixXd& exog,
                          const SeMode& se_mode = SeMode::robust(),
                          std::vector<std::string> exog_names = {});

MatrixXd intercept_design(Index n);
MatrixXd intercept_and(const VectorXd& regressor);

// One equation of a stacked system. Each stack gets its own intercept.
struct Stack {
  std::string name;
  VectorXd response;
  MatrixXd regressors;
  std::vector<std::string> regressor_names;
  // Just-identified IV for a single regressor when set.
  std::optional<VectorXd> instrument;
  MatrixXd controls;  // optional, no intercept
  std::vector<std::string> control_names;
  // Per-stack cluster ids; when absent the shared ids are used.
  std::optional<std::vector<std::int64_t>> ids;
};

// Joint estimation of all stacks with a cluster-robust covariance across
// stacks. Coefficient names are "<stack>:<coef>", intercepts "<stack>:_cons".
CoefficientEstimates stacked_regression(const std::vector<Stack>& stacks,
                                        const std::vector<std::int64_t>& shared_ids);

std::vector<std::int64_t> row_ids(Index n);

// --- Anderson-Rubin inversion ---------------------------------------------

struct ArOptions {
  int grid_points = 401;
  double half_width_se = 10.0;
  std::optional<double> lower;
  std::optional<double> upper;
  double rel_tol = 1e-6;
};

struct ClosedInterval {
  double lower;
  double upper;
};

struct ArConfidenceSet {
  std::vector<ClosedInterval> intervals;
  double level = 0.95;
  double grid_lower = 0.0;
  double grid_upper = 0.0;
  bool unbounded_below = false;  // accepted at the lowest grid point
  bool unbounded_above = false;  // accepted at the highest grid point
  std::optional<double> point_estimate;
  std::vector<std::string> warnings;

  bool contains(double c) const;
  bool bounded() const { return !unbounded_below && !unbounded_above; }
};

// Robust t statistic of the instrument coefficient in the regression of
// response_at(c) on an intercept and the instrument.
double ar_statistic(const VectorXd& instrument, const VectorXd& response, const SeMode& se_mode);

// Collects the c values whose AR test does not reject at `level`, scanning a
// grid over [center - w*scale, center + w*scale] and bisecting boundaries.
ArConfidenceSet anderson_rubin_ci(const VectorXd& instrument,
                                  const std::function<VectorXd(double)>& response_at,
                                  const SeMode& se_mode, double level, double center,
                                  double scale, const ArOptions& options = {});

// Mean-characteristics version: response (h - c) * y, centered on the Wald
// estimate of the supercomplier mean of h.
ArConfidenceSet anderson_rubin_ci(const ObservationTable& table, const VectorXd& h,
                                  double level = 0.95, const ArOptions& options = {});

// Two-sided normal critical value z_{1 - (1-level)/2}.
double normal_critical(double level);
double normal_cdf(double x);
double normal_quantile(double p);

}  // namespace sck::regression
