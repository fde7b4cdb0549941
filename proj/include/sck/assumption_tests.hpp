#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sck/data_model.hpp"

namespace sck::assumptions {

// The three sharp inequalities, named by the group share each identifies:
//   kComplierNever:  Pr(Y=0,D=1|Z=1) - Pr(Y=0,D=1|Z=0) >= 0   (cn share)
//   kComplierAlways: Pr(Y=1,D=0|Z=0) - Pr(Y=1,D=0|Z=1) >= 0   (ca share)
//   kReducedForm:    Pr(Y=1|Z=1)     - Pr(Y=1|Z=0)     >= 0   (cc share)
enum class SharpInequality { kComplierNever = 0, kComplierAlways = 1, kReducedForm = 2 };

inline constexpr std::array<SharpInequality, 3> kAllInequalities = {
    SharpInequality::kComplierNever, SharpInequality::kComplierAlways,
    SharpInequality::kReducedForm};

std::string_view inequality_name(SharpInequality which) noexcept;

struct InequalityStatistic {
  SharpInequality which;
  double estimate = 0.0;
  double se = 0.0;
};

std::array<InequalityStatistic, 3> inequality_statistics(const ObservationTable& table);

struct SimulationOptions {
  double level = 0.05;
  int draws = 100000;
  std::uint64_t seed = 20240101;
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct SharpTestResult {
  std::vector<std::string> names;
  VectorXd theta;
  VectorXd se;
  MatrixXd vcov;
  double theta_min = 0.0;
  double critical_value = 0.0;
  double critical_value_mcse = 0.0;
  double p_value = 1.0;
  bool reject = false;
  double level = 0.05;
  int draws = 0;
  std::uint64_t seed = 0;
};

// Stacked test of all three inequalities, clustered on observation id (or on
// the table's cluster column when present).
SharpTestResult joint_sharp_test(const ObservationTable& table, const SimulationOptions& options = {});

struct OmTestResult {
  double estimate = 0.0;
  double se = 0.0;
  double p_value = 0.5;  // one-sided, Phi(estimate / se)
  bool reject = false;
  double level = 0.05;
};

// One-sided test of a nonnegative reduced form.
OmTestResult om_test(const ObservationTable& table, double level = 0.05);

// One stack per cell, each testing the within-cell reduced form.
SharpTestResult om_test_conditional(const ObservationTable& table, const Categorical& cells,
                                    const SimulationOptions& options = {});

// Sorted draws of min(N(0, vcov)), one counter-based stream per draw.
std::vector<double> simulate_min(const MatrixXd& vcov, int draws, std::uint64_t seed,
                                 unsigned threads = 0);

// Lower level-quantile of sorted draws: element ceil(level * draws) - 1.
double lower_quantile(const std::vector<double>& sorted, double level);

}  // namespace sck::assumptions
