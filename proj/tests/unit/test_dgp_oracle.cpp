#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "sck/dgp_oracle.hpp"
#include "sck/identification.hpp"

using namespace sck;
using namespace sck::dgp;
using assumptions::SharpInequality;

namespace {

double law_mean(const CovariateLaw& law, int j) {
  double s = 0.0;
  for (const auto& a : law) s += a.probability * a.x[j];
  return s;
}

}  // namespace

TEST_CASE("preset truth matches hand values") {
  const auto g = presets::rationalization_example();
  CHECK_NOTHROW(g.validate());
  CHECK(g.conforming());
  const auto tv = true_values(g);
  CHECK(tv.share_cc == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(tv.share_ca == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(tv.share_cn == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(tv.share_complier == doctest::Approx(0.35).epsilon(1e-12));
  CHECK(*tv.late == doctest::Approx(0.2 / 0.35).epsilon(1e-12));
  const auto& x1 = tv.covariate("x1");
  CHECK(x1.mean_by_target.at(Target::kSupercomplier) == doctest::Approx(3.15));
  CHECK(x1.mean_by_target.at(Target::kCa) == doctest::Approx(1.5));
  CHECK(x1.mean_by_target.at(Target::kCn) == doctest::Approx(4.5));
  CHECK(x1.mean_by_target.at(Target::kComplier) == doctest::Approx((0.2 * 3.15 + 0.1 * 1.5 + 0.05 * 4.5) / 0.35));
  CHECK(x1.mean_by_target.at(Target::kPopulation) == doctest::Approx(2.95));
  CHECK(tv.covariate("x2").mean_by_target.at(Target::kSupercomplier) == doctest::Approx(0.7));
  CHECK(x1.cc_quantile(0.5) == 3.0);
  CHECK(x1.cc_cdf(2.0) == doctest::Approx(0.3));
}

TEST_CASE("truth computed by direct enumeration") {
  const auto g = presets::rationalization_example();
  const auto tv = true_values(g);
  double pop = 0.0, comp = 0.0, comp_mass = 0.0;
  ObservedDistribution obs;
  for (Group grp : Group::all()) {
    const double s = g.share(grp);
    if (s == 0.0) continue;
    const double m = law_mean(g.covariate_law[grp.index()], 0);
    pop += s * m;
    if (const auto po = group_to_potentials(grp); po.d0 == 0 && po.d1 == 1) {
      comp += s * m;
      comp_mass += s;
    }
    for (int z = 0; z < 2; ++z) {
      const int d = treatment_under(grp, z);
      obs(z, outcome_under(grp, d), d) += s;
    }
  }
  const auto& x1 = tv.covariate("x1");
  CHECK(x1.mean_by_target.at(Target::kPopulation) == doctest::Approx(pop).epsilon(1e-12));
  CHECK(x1.mean_by_target.at(Target::kComplier) == doctest::Approx(comp / comp_mass).epsilon(1e-12));
  for (int z = 0; z < 2; ++z)
    for (int y = 0; y < 2; ++y)
      for (int d = 0; d < 2; ++d) CHECK(tv.observed(z, y, d) == doctest::Approx(obs(z, y, d)).epsilon(1e-14));
  const auto preset_obs = presets::rationalization_observed();
  for (int z = 0; z < 2; ++z)
    for (int y = 0; y < 2; ++y)
      for (int d = 0; d < 2; ++d) CHECK(obs(z, y, d) == doctest::Approx(preset_obs(z, y, d)).epsilon(1e-12));
  const auto lhs = inequality_lhs(obs);
  CHECK(lhs[2] == doctest::Approx(tv.share_cc));
  CHECK(lhs[1] == doctest::Approx(tv.share_ca));
  CHECK(lhs[0] == doctest::Approx(tv.share_cn));
}

TEST_CASE("rationalize reproduces the observed law") {
  const auto obs = presets::rationalization_observed();
  const auto g = rationalize(obs, 0.5);
  CHECK(g.conforming());
  const auto back = induce(g);
  for (int z = 0; z < 2; ++z)
    for (int y = 0; y < 2; ++y)
      for (int d = 0; d < 2; ++d) CHECK(std::abs(back(z, y, d) - obs(z, y, d)) < 1e-12);

  auto bad = obs;
  bad(1, 1, 1) -= 0.35;
  bad(1, 0, 0) += 0.35;
  try {
    rationalize(bad, 0.5);
    FAIL("expected a violation");
  } catch (const InequalityViolation& e) {
    CHECK(std::string(e.what()).find("reduced_form") != std::string::npos);
    bool named = false;
    for (auto v : e.violated()) named |= v == SharpInequality::kReducedForm;
    CHECK(named);
  }
}

TEST_CASE("validate rejects malformed DGPs") {
  StratificationDGP g;
  g.set_share(groups::cc, 0.5);
  CHECK_THROWS_AS(g.validate(), ConfigError);
  g.set_share(groups::nn, 0.5);
  CHECK_NOTHROW(g.validate());
  g.tau = 1.0;
  CHECK_THROWS_AS(g.validate(), ConfigError);
  g.tau = 0.5;
  g.set_share(groups::nn, -0.1);
  g.set_share(groups::aa, 0.6);
  CHECK_THROWS_AS(g.validate(), ConfigError);
}

TEST_CASE("json round trip") {
  const auto g = presets::rationalization_example();
  const auto back = from_json(to_json(g));
  CHECK(back.shares == g.shares);
  CHECK(back.covariate_names == g.covariate_names);
  CHECK(to_json(back) == to_json(g));
  CHECK_THROWS_AS(from_json("{\"shares\": {\"zz\": 1}}"), ConfigError);
}

TEST_CASE("sampling follows the law and is thread invariant") {
  const auto g = presets::rationalization_example();
  const auto a = sample(g, 50000, 3, 1);
  const auto b = sample(g, 50000, 3, 8);
  CHECK(a.z() == b.z());
  CHECK(a.y() == b.y());
  CHECK(a.x() == b.x());
  const auto big = sample(g, 1000000, 4);
  const auto obs = induce(g);
  for (int z = 0; z < 2; ++z)
    for (int y = 0; y < 2; ++y)
      for (int d = 0; d < 2; ++d) {
        double hit = 0, arm = 0;
        for (Index i = 0; i < big.n(); ++i) {
          if (big.z()[i] != z) continue;
          ++arm;
          hit += big.y()[i] == y && big.d()[i] == d;
        }
        const double p = obs(z, y, d);
        CHECK(std::abs(hit / arm - p) < 5 * std::sqrt(p * (1 - p) / arm));
      }
  CHECK(std::abs(big.treated_share() - 0.5) < 0.005);
}

TEST_CASE("per-stratum sampling has exact counts") {
  StratificationDGP g, s1, s2;
  s1.set_share(groups::cc, 1.0);
  s2.set_share(groups::nn, 1.0);
  s2.tau = 0.3;
  g.strata = {{"u", 0.4, s1}, {"v", 0.6, s2}};
  CHECK_NOTHROW(g.validate());
  const auto t = sample_per_stratum(g, {300, 700}, 5);
  REQUIRE(t.stratum().has_value());
  int first = 0;
  for (int c : t.stratum()->codes) first += c == 0;
  CHECK(first == 300);
}

TEST_CASE("variance gap closed form") {
  // var(XY) - var(X(Y - 1/2)) with X ~ Bern(1/2): mu/4 - 1/16.
  for (double mu : {0.1, 0.25, 0.5, 0.9}) CHECK(variance_gap_example(mu) == doctest::Approx(mu / 4 - 1.0 / 16));
  CHECK(variance_gap_example(0.1) < 0.0);
  CHECK(variance_gap_example(0.5) > 0.0);
  const auto sim = simulate_variance_gap(0.5, 200000, 1);
  CHECK(std::abs(sim.difference - variance_gap_example(0.5)) < 4 * sim.mc_se);
}

TEST_CASE("wald limit differs from the cc mean when a defier group is present") {
  const auto g = violation_dgp(0.1, 0.3, {{groups::an, 0.2}, {groups::nn, 0.4}},
                               {{groups::cc, {{{1.0}, 1.0, 1.0}}},
                                {groups::cf, {{{0.0}, 1.0, 1.0}}},
                                {groups::an, {{{0.0}, 1.0, 1.0}}},
                                {groups::nn, {{{0.0}, 1.0, 1.0}}}},
                               {"x"});
  CHECK_FALSE(g.conforming());
  const auto tv = true_values(g);
  CHECK(*tv.covariate("x").wald_limit == doctest::Approx(1.5));
  CHECK(ident::bias_under_violation(0.1, 0.3, 1.0, 0.0) == doctest::Approx(*tv.covariate("x").wald_limit));
}
