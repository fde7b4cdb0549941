#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sck/data_model.hpp"
#include "sck/regression.hpp"

namespace sck::ident {

// Abadie-style observation weights. pi = kappa - kappa0*y - kappa1*(1-y).
struct WeightSet {
  VectorXd kappa;
  VectorXd kappa0;
  VectorXd kappa1;
  VectorXd pi;
  double tau = 0.5;
};

// Uses the sample share of z=1 when tau is absent.
WeightSet compute_weights(const ObservationTable& table, std::optional<double> tau = std::nullopt);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

// A ratio estimand. For non-ratio quantities (shares, plain means) the
// denominator is 1.
struct WaldEstimate {
  double value = 0.0;
  double se = 0.0;
  Interval ci;
  double numerator = 0.0;
  double denominator = 1.0;
  std::string label;
  double level = 0.95;
};

// Arm difference mean(v | z=1) - mean(v | z=0).
double arm_difference(const VectorXd& v, const VectorXd& z);

// Reduced form: arm difference in y. Labeled as a TE-weighted share when y is
// not binary.
WaldEstimate supercomplier_share(const ObservationTable& table, double level = 0.95);
WaldEstimate first_stage(const ObservationTable& table, double level = 0.95);

struct OtherShares {
  WaldEstimate ca;
  WaldEstimate cn;
};
OtherShares other_group_shares(const ObservationTable& table, double level = 0.95);

// Mean of h within the target group. Latent targets are just-identified 2SLS
// of h*T on T instrumented by Z, with T = Y, D, (1-D)Y or D(1-Y).
WaldEstimate characteristics_wald(const ObservationTable& table, const VectorXd& h, Target target,
                                  double level = 0.95);

// Weight-based form: response shifted to Y-(1-tau) (or D-(1-tau)). tau is
// treated as fixed for inference. Only supercomplier and complier targets.
WaldEstimate characteristics_plugin(const ObservationTable& table, const VectorXd& h, Target target,
                                    double level = 0.95, std::optional<double> tau = std::nullopt);

struct FinkNotoReport {
  double share_always_taker = 0.0;  // mean(d | z=0)
  double share_complier = 0.0;      // first stage
  double mean_treated = 0.0;        // mean(h | d=1, z=1)
  double mean_always_taker = 0.0;   // mean(h | d=1, z=0); 0 when no such rows
  double assembled = 0.0;
  double tsls = 0.0;
  double abs_difference = 0.0;
  double rel_difference = 0.0;
  bool equal = false;  // rel_difference < 1e-12
};
FinkNotoReport fink_noto_equivalence_check(const ObservationTable& table, const VectorXd& h);

struct CdfEstimate {
  std::vector<double> grid;
  std::vector<WaldEstimate> raw;
  std::vector<double> rearranged;  // empty unless requested
};
CdfEstimate characteristics_cdf(const ObservationTable& table, const std::string& covariate,
                                std::vector<double> grid, bool rearrange = false,
                                Target target = Target::kSupercomplier, double level = 0.95);

enum class Conditioning { kX, kYX };

struct QuantileOptions {
  Conditioning conditioning = Conditioning::kX;
  int bins = 20;  // distinct values are used directly when there are at most this many
  int bootstrap_reps = 0;
  std::uint64_t seed = 0;
};

struct QuantileCell {
  std::string label;   // "x<=v" bin upper edge, prefixed by "y=k," under (y,x)
  Index count = 0;
  double pi_nu = 0.0;  // raw within-cell mean of pi
  double weight = 0.0; // clipped
};

struct QuantileEstimate {
  double theta = 0.5;
  double value = 0.0;
  std::optional<double> se;
  std::vector<QuantileCell> cells;
  Index clipped_cells = 0;
  std::vector<std::string> warnings;
};

// Cell index per row: distinct values when few, else equal-frequency bins.
// Returns codes and per-cell upper edges.
std::pair<std::vector<int>, std::vector<double>> discretize(const VectorXd& x, int bins);

QuantileEstimate supercomplier_quantile(const ObservationTable& table, const std::string& covariate,
                                        double theta, const QuantileOptions& options = {});

// Lower weighted theta-quantile: smallest x with cumulative weight share >= theta.
double weighted_quantile(const VectorXd& x, const VectorXd& weights, double theta);

struct StratumComponent {
  std::string label;
  Index n = 0;
  double share = 0.0;         // N_W / N
  double tau = 0.0;           // mean(z | W)
  double reduced_form = 0.0;  // RF_W
  double omega = 0.0;         // share * RF_W * tau(1-tau)
  std::optional<double> mean; // within-stratum supercomplier mean; absent when RF_W == 0
};

struct StratifiedEstimate {
  WaldEstimate fe_2sls;
  double decomposition = 0.0;
  double abs_difference = 0.0;
  std::vector<StratumComponent> strata;
  std::vector<std::string> warnings;
};

StratifiedEstimate stratified_characteristics(const ObservationTable& table, const VectorXd& h,
                                              double level = 0.95);

// E[h|cc] + xi (E[h|cc] - E[h|cf]) with xi = cf / (cc - cf).
double bias_under_violation(double share_cf, double share_cc, double mean_cc, double mean_cf);

// Shares and, per covariate, all five target means plus their pairwise
// differences from one stacked regression.
struct Difference {
  Target a;
  Target b;
  double value = 0.0;
  double se = 0.0;
};

struct CharacteristicRow {
  std::string covariate;
  std::map<Target, WaldEstimate> means;
  std::vector<Difference> differences;
};

struct GroupSummary {
  WaldEstimate share_cc;
  WaldEstimate share_ca;
  WaldEstimate share_cn;
  WaldEstimate share_complier;
  std::vector<CharacteristicRow> characteristics;
  std::vector<std::string> warnings;
};

GroupSummary summarize(const ObservationTable& table, const std::vector<std::string>& covariates,
                       double level = 0.95);

// Per-target endogenous variable T (population: ones).
VectorXd target_indicator(const ObservationTable& table, Target target);

}  // namespace sck::ident
