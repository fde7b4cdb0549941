#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sck/assumption_tests.hpp"
#include "sck/data_model.hpp"
#include "sck/errors.hpp"

namespace sck::dgp {

// One atom of a finite-support covariate law. Observed outcomes are the
// group's potential outcome times y_scale, so y_scale != 1 gives a non-binary Y.
struct SupportPoint {
  std::vector<double> x;
  double probability = 0.0;
  double y_scale = 1.0;
};

using CovariateLaw = std::vector<SupportPoint>;

struct Stratum;

// Group shares, assignment probability and per-group covariate laws. When
// `strata` is non-empty the top-level shares, tau and laws are ignored and each
// stratum carries its own.
struct StratificationDGP {
  std::array<double, Group::kCount> shares{};
  double tau = 0.5;
  std::vector<std::string> covariate_names;
  std::array<CovariateLaw, Group::kCount> covariate_law{};
  std::vector<Stratum> strata;

  double share(Group g) const { return shares[g.index()]; }
  void set_share(Group g, double p) { shares[g.index()] = p; }

  // Throws ConfigError on any invariant failure.
  void validate() const;
  // No mass on a defier component anywhere.
  bool conforming() const;
  bool binary_outcome() const;
};

struct Stratum {
  std::string label;
  double probability = 0.0;
  StratificationDGP dgp;
};

// P(Y=y, D=d | Z=z), indexed p[z][y][d].
struct ObservedDistribution {
  std::array<std::array<std::array<double, 2>, 2>, 2> p{};
  double operator()(int z, int y, int d) const { return p[z][y][d]; }
  double& operator()(int z, int y, int d) { return p[z][y][d]; }
};

// Population law of observables implied by a DGP (Y treated as an indicator of
// a positive outcome).
ObservedDistribution induce(const StratificationDGP& dgp);

// Left-hand sides of the three sharp inequalities in kAllInequalities order.
std::array<double, 3> inequality_lhs(const ObservedDistribution& observed);

struct CovariateTruth {
  std::string name;
  std::map<Target, double> mean_by_target;  // absent when the group has no mass
  std::optional<double> te_weighted_mean;   // outcome-effect weighted cc mean
  std::optional<double> wald_limit;         // probability limit of the supercomplier Wald ratio
  std::optional<double> stratified_limit;   // probability limit of FE-2SLS with stratum dummies
  std::vector<std::pair<double, double>> cc_distribution;  // (value, probability), sorted
  std::vector<std::pair<double, double>> cc_given_x;       // (value, Pr(cc | X=value))

  double cc_cdf(double x) const;
  // Lower theta-quantile of X among supercompliers.
  double cc_quantile(double theta) const;
};

struct AnalyticTruth {
  std::array<double, Group::kCount> group_shares{};
  double share_cc = 0.0;
  double share_ca = 0.0;
  double share_cn = 0.0;
  double share_cf = 0.0;
  double share_complier = 0.0;
  // Population-average effects of Z (stratum-probability weighted when stratified).
  double reduced_form = 0.0;
  double first_stage = 0.0;
  std::optional<double> late;
  std::array<double, 3> inequality_lhs{};
  ObservedDistribution observed;
  double tau = 0.5;  // overall Pr(Z=1)
  std::vector<CovariateTruth> covariates;

  const CovariateTruth& covariate(const std::string& name) const;
};

AnalyticTruth true_values(const StratificationDGP& dgp);

// Per-row streams (seed, row): stratum, then group, covariate atom, and z.
ObservationTable sample(const StratificationDGP& dgp, Index n, std::uint64_t seed,
                        unsigned threads = 0);
// Exact stratum sizes; rows are laid out stratum by stratum.
ObservationTable sample_per_stratum(const StratificationDGP& dgp, const std::vector<Index>& counts,
                                    std::uint64_t seed, unsigned threads = 0);

class InequalityViolation : public DataError {
 public:
  InequalityViolation(const std::string& what, std::vector<assumptions::SharpInequality> violated)
      : DataError(what), violated_(std::move(violated)) {}
  const std::vector<assumptions::SharpInequality>& violated() const noexcept { return violated_; }

 private:
  std::vector<assumptions::SharpInequality> violated_;
};

// Constructs conforming group shares that reproduce `observed` exactly.
// Ambiguous mass is split half-half between aa/ac and nn/nc.
StratificationDGP rationalize(const ObservedDistribution& observed, double tau);

// var(XY | Z=1) - var(X(Y-1+tau) | Z=1) in the tau = 0.5, X ~ Bernoulli(0.5)
// independent construction.
double variance_gap_example(double mu_y);
StratificationDGP variance_gap_dgp(double mu_y);

struct VarianceGapSimulation {
  double difference = 0.0;
  double mc_se = 0.0;
  Index treated_rows = 0;
};
VarianceGapSimulation simulate_variance_gap(double mu_y, Index n, std::uint64_t seed);

// DGP with compfier mass; admissibility is intentionally not enforced.
StratificationDGP violation_dgp(double share_cf, double share_cc,
                                const std::map<Group, double>& other_shares,
                                const std::map<Group, CovariateLaw>& laws,
                                const std::vector<std::string>& covariate_names, double tau = 0.5);

StratificationDGP from_json(const std::string& text);
StratificationDGP load_dgp(const std::string& path);
std::string to_json(const StratificationDGP& dgp);

namespace presets {
// Observed law with Z=0 cells (Y,D) (1,1)=.2 (0,1)=.1 (1,0)=.3 (0,0)=.4 and
// Z=1 cells .5 .15 .2 .15, rationalized at tau = 0.5.
ObservedDistribution rationalization_observed();
// The rationalized shares with group-specific laws over covariates x1 (0..6) and x2 (binary).
StratificationDGP rationalization_example();
}  // namespace presets

}  // namespace sck::dgp
