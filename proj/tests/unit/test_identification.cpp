#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "sck/dgp_oracle.hpp"
#include "sck/errors.hpp"
#include "sck/identification.hpp"

using namespace sck;
using namespace sck::ident;
using testing::arm_diff;
using testing::arm_mean;
using testing::rel_err;

TEST_CASE("weights by direct substitution") {
  // Rows: (z,d,y) = (1,1,1), (0,0,1), (0,1,0), padded to keep tau = 0.5.
  const auto t = testing::table_of({1, 0, 0, 1}, {1, 0, 1, 0}, {1, 1, 0, 0});
  const auto w = compute_weights(t);
  CHECK(w.tau == 0.5);
  CHECK(w.kappa[0] == 1.0);
  CHECK(w.kappa0[0] == 0.0);
  CHECK(w.kappa1[0] == 2.0);
  CHECK(w.pi[0] == 1.0);
  CHECK(w.kappa[1] == 1.0);
  CHECK(w.kappa0[1] == 2.0);
  CHECK(w.kappa1[1] == 0.0);
  CHECK(w.pi[1] == -1.0);
  CHECK(w.kappa[2] == -1.0);
  CHECK(w.kappa0[2] == 0.0);
  CHECK(w.kappa1[2] == -2.0);
  CHECK(w.pi[2] == 1.0);
  CHECK_THROWS_AS(compute_weights(t, 1.0), ConfigError);
}

TEST_CASE("weight identities hold on random tables") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto t = testing::random_table(seed, 50 + 37 * seed);
    const auto w = compute_weights(t);
    const VectorXd pi_check = (w.kappa.array() - w.kappa0.array() * t.y().array() -
                               w.kappa1.array() * (1.0 - t.y().array())).matrix();
    CHECK(w.pi == pi_check);
    CHECK(rel_err(w.pi.mean(), arm_diff(t.y(), t.z())) < 1e-10);
    CHECK(rel_err(w.kappa.mean(), arm_diff(t.d(), t.z())) < 1e-10);
  }
}

TEST_CASE("supercomplier share is the reduced form") {
  const auto t = testing::table_of({1, 1, 1, 1, 0, 0, 0, 0}, {1, 1, 1, 1, 0, 0, 0, 0},
                                   {1, 1, 1, 0, 1, 0, 0, 0});
  CHECK(supercomplier_share(t).value == doctest::Approx(0.5));
  const auto flat = testing::table_of({1, 1, 0, 0}, {1, 0, 1, 0}, {1, 0, 1, 0});
  CHECK(supercomplier_share(flat).value == doctest::Approx(0.0));
}

TEST_CASE("other group shares") {
  // Perfect compliance: ca = mean(y|z=0), cn = mean(1-y|z=1).
  const auto t = testing::table_of({1, 1, 1, 0, 0, 0}, {1, 1, 1, 0, 0, 0}, {1, 0, 0, 1, 1, 0});
  const auto s = other_group_shares(t);
  CHECK(s.ca.value == doctest::Approx(2.0 / 3.0));
  CHECK(s.cn.value == doctest::Approx(2.0 / 3.0));
  const auto zero_y = testing::table_of({1, 1, 0, 0}, {1, 0, 1, 0}, {0, 0, 0, 0});
  CHECK(other_group_shares(zero_y).ca.value == 0.0);
}

TEST_CASE("shares decompose the first stage exactly") {
  for (std::uint64_t seed = 100; seed < 150; ++seed) {
    const auto t = testing::random_table(seed, 60 + 13 * (seed - 100));
    const auto o = other_group_shares(t);
    const double total = o.ca.value + o.cn.value + supercomplier_share(t).value;
    CHECK(rel_err(total, first_stage(t).value) < 1e-10);
  }
}

TEST_CASE("characteristics Wald hand example") {
  // z=1 rows (x,y) = (2,1),(4,1),(6,0),(8,0); z=0 rows (1,1),(3,0),(5,0),(7,0).
  const auto t = testing::table_of({1, 1, 1, 1, 0, 0, 0, 0}, {1, 1, 1, 1, 0, 0, 0, 0},
                                   {1, 1, 0, 0, 1, 0, 0, 0}, {{2, 4, 6, 8, 1, 3, 5, 7}});
  const auto w = characteristics_wald(t, t.covariate("x1"), Target::kSupercomplier);
  CHECK(w.value == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(w.numerator == doctest::Approx(1.25));
  CHECK(w.denominator == doctest::Approx(0.25));
  CHECK(w.ci.lower <= w.value);
  CHECK(w.ci.upper >= w.value);
}

TEST_CASE("constant h and h = 1") {
  for (std::uint64_t seed = 200; seed < 220; ++seed) {
    const auto t = testing::random_table(seed, 400);
    const VectorXd ones = VectorXd::Ones(t.n());
    for (Target target : kAllTargets) {
      CHECK(rel_err(characteristics_wald(t, ones, target).value, 1.0) < 1e-10);
      CHECK(rel_err(characteristics_wald(t, 3.5 * ones, target).value, 3.5) < 1e-10);
    }
  }
}

TEST_CASE("latent-group Wald ratios match difference-of-means oracles") {
  const auto t = testing::random_table(7, 2000);
  const VectorXd h = t.covariate("age");
  const auto d = t.d().array(), y = t.y().array();
  const VectorXd ca = ((1.0 - d) * y).matrix(), cn = (d * (1.0 - y)).matrix();
  auto ratio = [&](const VectorXd& T) { return arm_diff(h.cwiseProduct(T), t.z()) / arm_diff(T, t.z()); };
  CHECK(rel_err(characteristics_wald(t, h, Target::kSupercomplier).value, ratio(t.y())) < 1e-10);
  CHECK(rel_err(characteristics_wald(t, h, Target::kComplier).value, ratio(t.d())) < 1e-10);
  CHECK(rel_err(characteristics_wald(t, h, Target::kCa).value, ratio(ca)) < 1e-10);
  CHECK(rel_err(characteristics_wald(t, h, Target::kCn).value, ratio(cn)) < 1e-10);
  CHECK(rel_err(characteristics_wald(t, h, Target::kPopulation).value, h.mean()) < 1e-12);
}

TEST_CASE("zero denominator is reported as unidentified") {
  const auto t = testing::table_of({1, 1, 0, 0}, {1, 0, 1, 0}, {1, 0, 1, 0}, {{1, 2, 3, 4}});
  try {
    characteristics_wald(t, t.covariate("x1"), Target::kSupercomplier);
    FAIL("expected an error");
  } catch (const EstimationError& e) {
    CHECK(std::string(e.what()).find("zero reduced form") != std::string::npos);
  }
}

TEST_CASE("non-binary outcome is labeled as TE-weighted") {
  const auto t = testing::table_of({1, 1, 1, 0, 0, 0}, {1, 1, 0, 0, 0, 1}, {2.5, 1.0, 0.0, 0.5, 0.0, 1.0},
                                   {{1, 2, 3, 4, 5, 6}}, false);
  const auto w = characteristics_wald(t, t.covariate("x1"), Target::kSupercomplier);
  CHECK(w.label == "TE-weighted supercomplier mean");
  CHECK_THROWS_AS(characteristics_wald(t, t.covariate("x1"), Target::kCa), DataError);
}

TEST_CASE("plug-in form identities") {
  for (std::uint64_t seed = 300; seed < 330; ++seed) {
    const auto t = testing::random_table(seed, 500);
    const VectorXd h = t.covariate("age");
    const auto w = compute_weights(t);
    const double rf = arm_diff(t.y(), t.z());
    const double fs = arm_diff(t.d(), t.z());
    const auto plug = characteristics_plugin(t, h, Target::kSupercomplier);
    CHECK(rel_err(plug.value, w.pi.cwiseProduct(h).mean() / rf) < 1e-10);
    const auto plug_c = characteristics_plugin(t, h, Target::kComplier);
    CHECK(rel_err(plug_c.value, w.kappa.cwiseProduct(h).mean() / fs) < 1e-10);
  }
  // Balanced: identical arm means of h, so plug-in equals Wald.
  const auto t = testing::table_of({1, 1, 1, 1, 0, 0, 0, 0}, {1, 1, 0, 1, 0, 1, 0, 0},
                                   {1, 1, 0, 1, 0, 1, 0, 0}, {{1, 2, 3, 4, 4, 3, 2, 1}});
  const VectorXd h = t.covariate("x1");
  CHECK(rel_err(characteristics_plugin(t, h, Target::kSupercomplier).value,
                characteristics_wald(t, h, Target::kSupercomplier).value) < 1e-12);
  CHECK_THROWS_AS(characteristics_plugin(t, h, Target::kCa), ConfigError);
}

TEST_CASE("share-and-mean assembly equals the complier 2SLS estimator") {
  const auto base = testing::random_table(400, 800);
  const VectorXd h = base.covariate("age");
  const auto r = fink_noto_equivalence_check(base, h);
  CHECK(r.equal);
  int held = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    StreamRng rng(401, rep);
    std::vector<Index> rows(base.n());
    for (auto& i : rows) i = static_cast<Index>(rng.below(base.n()));
    rows[0] = 0;
    rows[1] = 1;
    const auto t = base.subset(rows);
    if (std::abs(arm_diff(t.d(), t.z())) < 1e-9) continue;
    held += fink_noto_equivalence_check(t, t.covariate("age")).equal;
  }
  CHECK(held == 1000);
  // Perfect compliance: both equal mean(h | z=1).
  const auto pc = testing::table_of({1, 1, 1, 0, 0}, {1, 1, 1, 0, 0}, {1, 0, 1, 0, 1}, {{2, 4, 9, 1, 1}});
  const auto p = fink_noto_equivalence_check(pc, pc.covariate("x1"));
  CHECK(p.assembled == doctest::Approx(5.0));
  CHECK(p.tsls == doctest::Approx(5.0));
}

TEST_CASE("CDF estimates") {
  const auto t = testing::random_table(500, 1000);
  const auto c = characteristics_cdf(t, "age", {-1.0, 1000.0, 40.0}, true);
  CHECK(c.grid == std::vector<double>{-1.0, 40.0, 1000.0});
  CHECK(std::abs(c.raw[0].value) < 1e-12);
  CHECK(c.raw[2].value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::is_sorted(c.rearranged.begin(), c.rearranged.end()));
  const auto k = testing::table_of({1, 1, 0, 0, 1}, {1, 1, 0, 1, 0}, {1, 1, 0, 0, 0}, {{3, 3, 3, 3, 3}});
  const auto kc = characteristics_cdf(k, "x1", {2.0, 4.0});
  CHECK(std::abs(kc.raw[0].value) < 1e-12);
  CHECK(kc.raw[1].value == doctest::Approx(1.0));
  CHECK_THROWS_AS(characteristics_cdf(k, "x1", {}), ConfigError);
}

TEST_CASE("weighted quantile minimizes the check-function objective") {
  StreamRng rng(600, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const Index n = 5 + static_cast<Index>(rng.below(30));
    VectorXd x(n), w(n);
    for (Index i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.below(10));
      w[i] = rng.uniform();
    }
    const double theta = 0.05 + 0.9 * rng.uniform();
    const double q = weighted_quantile(x, w, theta);
    auto objective = [&](double xi) {
      double s = 0.0;
      for (Index i = 0; i < n; ++i) {
        const double u = x[i] - xi;
        s += w[i] * (theta - (u < 0 ? 1.0 : 0.0)) * u;
      }
      return s;
    };
    double best = objective(q);
    for (Index i = 0; i < n; ++i) CHECK(objective(x[i]) >= best - 1e-12);
  }
  CHECK_THROWS_WITH_AS(weighted_quantile(VectorXd::Ones(3), VectorXd::Zero(3), 0.5),
                       "no supercomplier mass detected", EstimationError);
}

TEST_CASE("discretize uses distinct values or equal-frequency bins") {
  VectorXd few(6);
  few << 3, 1, 2, 3, 1, 2;
  auto [codes, edges] = discretize(few, 20);
  CHECK(edges == std::vector<double>{1, 2, 3});
  CHECK(codes == std::vector<int>{2, 0, 1, 2, 0, 1});
  VectorXd many(100);
  for (Index i = 0; i < 100; ++i) many[i] = static_cast<double>(99 - i);
  auto [c2, e2] = discretize(many, 4);
  CHECK(e2.size() == 4);
  std::vector<int> counts(4, 0);
  for (int c : c2) ++counts[c];
  CHECK(counts == std::vector<int>{25, 25, 25, 25});
}

TEST_CASE("quantile on a single-valued covariate and independent X") {
  const auto t = testing::random_table(700, 500);
  ObservationTable::Columns cols;
  cols.z = t.z();
  cols.d = t.d();
  cols.y = t.y();
  cols.x = MatrixXd::Constant(t.n(), 1, 7.0);
  cols.covariate_names = {"k"};
  const auto constant = ObservationTable::create(cols);
  if (arm_diff(t.y(), t.z()) > 0) CHECK(supercomplier_quantile(constant, "k", 0.5).value == 7.0);

  // X independent of the group: pi_nu roughly constant, quantile is the population quantile.
  dgp::StratificationDGP g;
  g.covariate_names = {"x"};
  g.set_share(groups::cc, 0.3);
  g.set_share(groups::aa, 0.3);
  g.set_share(groups::nn, 0.4);
  dgp::CovariateLaw law;
  for (int v = 1; v <= 5; ++v) law.push_back({{double(v)}, v == 3 ? 0.3 : 0.175, 1.0});
  for (Group grp : {groups::cc, groups::aa, groups::nn}) g.covariate_law[grp.index()] = law;
  const auto s = dgp::sample(g, 100000, 701);
  const auto q = supercomplier_quantile(s, "x", 0.5);
  CHECK(q.value == 3.0);
  for (const auto& c : q.cells) CHECK(c.pi_nu == doctest::Approx(0.3).epsilon(0.05 / 0.3));
}

TEST_CASE("quantile recovers the cc median") {
  dgp::StratificationDGP g;
  g.covariate_names = {"x"};
  g.set_share(groups::cc, 0.3);
  g.set_share(groups::an, 0.3);
  g.set_share(groups::nn, 0.4);
  g.covariate_law[groups::cc.index()] = {{{1.0}, 1.0 / 3, 1.0}, {{2.0}, 1.0 / 3, 1.0}, {{3.0}, 1.0 / 3, 1.0}};
  g.covariate_law[groups::an.index()] = {{{0.0}, 1.0, 1.0}};
  g.covariate_law[groups::nn.index()] = {{{0.0}, 1.0, 1.0}};
  const auto s = dgp::sample(g, 200000, 702);
  QuantileOptions opts;
  CHECK(supercomplier_quantile(s, "x", 0.5, opts).value == 2.0);
  opts.conditioning = Conditioning::kYX;
  CHECK(supercomplier_quantile(s, "x", 0.5, opts).value == 2.0);
  opts.bootstrap_reps = 5;
  opts.seed = 9;
  const auto b = supercomplier_quantile(s, "x", 0.5, opts);
  REQUIRE(b.se.has_value());
  CHECK(*b.se >= 0.0);
}

TEST_CASE("no supercomplier mass") {
  const auto t = testing::table_of({1, 1, 0, 0}, {1, 1, 0, 0}, {0, 0, 1, 1}, {{1, 2, 3, 4}});
  CHECK_THROWS_WITH_AS(supercomplier_quantile(t, "x1", 0.5), "no supercomplier mass detected",
                       EstimationError);
}

TEST_CASE("stratified characteristics") {
  const auto t = testing::random_table(800, 3000);
  const VectorXd h = t.covariate("age");

  // Single stratum reduces to the Wald estimate.
  ObservationTable::Columns c;
  c.z = t.z();
  c.d = t.d();
  c.y = t.y();
  c.x = t.x();
  c.covariate_names = t.covariate_names();
  c.stratum = Categorical::from_labels(std::vector<std::string>(t.n(), "all"));
  const auto one = stratified_characteristics(ObservationTable::create(c), h);
  CHECK(rel_err(one.fe_2sls.value, characteristics_wald(t, h, Target::kSupercomplier).value) < 1e-10);

  // Three strata from the discrete covariate: FE-2SLS equals the explicit weighted average.
  std::vector<std::string> labels(t.n());
  for (Index i = 0; i < t.n(); ++i) labels[i] = "g" + std::to_string(static_cast<int>(t.x()(i, 1)) % 3);
  c.stratum = Categorical::from_labels(labels);
  const auto strat = ObservationTable::create(c);
  const auto s = stratified_characteristics(strat, h);
  CHECK(rel_err(s.fe_2sls.value, s.decomposition) < 1e-8);
  double num = 0, den = 0;
  for (const auto& comp : s.strata) {
    REQUIRE(comp.mean.has_value());
    num += comp.omega * *comp.mean;
    den += comp.omega;
  }
  CHECK(rel_err(num / den, s.decomposition) < 1e-10);
}

TEST_CASE("equal reduced forms and tau give a simple average") {
  // Two identical strata (same rows, different x shift) -> equal weights.
  std::vector<int> z, d;
  std::vector<double> y, x;
  std::vector<std::string> lab;
  const int zz[] = {1, 1, 1, 1, 0, 0, 0, 0};
  const double yy[] = {1, 1, 0, 0, 1, 0, 0, 0};
  const double xs[] = {2, 4, 6, 8, 1, 3, 5, 7};
  for (int s = 0; s < 2; ++s)
    for (int i = 0; i < 8; ++i) {
      z.push_back(zz[i]);
      d.push_back(zz[i]);
      y.push_back(yy[i]);
      x.push_back(xs[i] + 10 * s);
      lab.push_back(s ? "b" : "a");
    }
  ObservationTable::Columns c;
  const auto base = testing::table_of(z, d, y, {x});
  c.z = base.z();
  c.d = base.d();
  c.y = base.y();
  c.x = base.x();
  c.covariate_names = base.covariate_names();
  c.stratum = Categorical::from_labels(lab);
  const auto s = stratified_characteristics(ObservationTable::create(c), base.covariate("x1"));
  CHECK(s.fe_2sls.value == doctest::Approx((5.0 + 15.0) / 2));
}

TEST_CASE("zero reduced form stratum gets zero weight and a warning") {
  std::vector<int> z, d;
  std::vector<double> y, x;
  std::vector<std::string> lab;
  const int zz[] = {1, 1, 1, 1, 0, 0, 0, 0};
  const double y_a[] = {1, 1, 0, 0, 1, 0, 0, 0};
  const double y_b[] = {1, 0, 0, 0, 1, 0, 0, 0};
  for (int s = 0; s < 2; ++s)
    for (int i = 0; i < 8; ++i) {
      z.push_back(zz[i]);
      d.push_back(zz[i]);
      y.push_back(s ? y_b[i] : y_a[i]);
      x.push_back(i + 1);
      lab.push_back(s ? "b" : "a");
    }
  const auto base = testing::table_of(z, d, y, {x});
  ObservationTable::Columns c;
  c.z = base.z();
  c.d = base.d();
  c.y = base.y();
  c.x = base.x();
  c.covariate_names = base.covariate_names();
  c.stratum = Categorical::from_labels(lab);
  const auto s = stratified_characteristics(ObservationTable::create(c), base.covariate("x1"));
  CHECK(s.strata[1].omega == 0.0);
  CHECK_FALSE(s.strata[1].mean.has_value());
  REQUIRE(s.warnings.size() == 1);
  CHECK(s.warnings[0].find("'b'") != std::string::npos);
  // The zero-RF stratum still enters the numerator through its shift in hY:
  // (-0.5 - 1.0) / 0.25.
  CHECK(s.fe_2sls.value == doctest::Approx(-6.0).epsilon(1e-10));
  CHECK(rel_err(s.fe_2sls.value, s.decomposition) < 1e-8);
}

TEST_CASE("bias under violation") {
  CHECK(bias_under_violation(0.0, 0.3, 1.0, 0.0) == 1.0);
  CHECK(bias_under_violation(0.1, 0.3, 1.0, 0.0) == doctest::Approx(1.5));
  CHECK(bias_under_violation(0.2, 0.3, 2.0, 2.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(bias_under_violation(0.3, 0.3, 1.0, 0.0), EstimationError);
}

TEST_CASE("group summary means and differences are consistent") {
  const auto t = testing::random_table(900, 2000);
  const auto s = summarize(t, {"age", "group"});
  CHECK(rel_err(s.share_ca.value + s.share_cn.value + s.share_cc.value, s.share_complier.value) < 1e-10);
  REQUIRE(s.characteristics.size() == 2);
  for (const auto& row : s.characteristics) {
    const VectorXd h = t.covariate(row.covariate);
    for (const auto& [target, w] : row.means)
      CHECK(rel_err(w.value, characteristics_wald(t, h, target).value) < 1e-10);
    CHECK(row.differences.size() == 10);
    for (const auto& d : row.differences) {
      CHECK(rel_err(d.value, row.means.at(d.a).value - row.means.at(d.b).value) < 1e-12);
      CHECK(d.se >= 0.0);
    }
  }
}
