#include "sck/dgp_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "sck/rng.hpp"

namespace sck::dgp {

using assumptions::SharpInequality;

namespace {

constexpr double kSumTolerance = 1e-12;

const CovariateLaw& effective_law(const StratificationDGP& dgp, Group g) {
  static const CovariateLaw kDegenerate{SupportPoint{{}, 1.0, 1.0}};
  const auto& law = dgp.covariate_law[g.index()];
  return law.empty() ? kDegenerate : law;
}

// Flattened view: every (stratum, group, atom) with its joint probability.
struct Atom {
  int stratum = 0;
  double stratum_prob = 1.0;
  double tau = 0.5;
  Group group = groups::aa;
  double prob = 0.0;  // stratum_prob * p_g * p_atom
  const SupportPoint* point = nullptr;
};

struct Part {
  double probability;
  const StratificationDGP* dgp;
};

std::vector<Part> parts_of(const StratificationDGP& dgp) {
  std::vector<Part> parts;
  if (dgp.strata.empty()) {
    parts.push_back({1.0, &dgp});
  } else {
    for (const auto& s : dgp.strata) parts.push_back({s.probability, &s.dgp});
  }
  return parts;
}

std::vector<Atom> atoms_of(const StratificationDGP& dgp) {
  std::vector<Atom> atoms;
  const auto parts = parts_of(dgp);
  for (std::size_t w = 0; w < parts.size(); ++w) {
    const auto& sub = *parts[w].dgp;
    for (Group g : Group::all()) {
      const double pg = sub.share(g);
      if (pg <= 0.0) continue;
      for (const auto& pt : effective_law(sub, g)) {
        if (pt.probability <= 0.0) continue;
        atoms.push_back({static_cast<int>(w), parts[w].probability, sub.tau, g,
                         parts[w].probability * pg * pt.probability, &pt});
      }
    }
  }
  return atoms;
}

// Realized outcome of an atom under assignment z.
double realized_y(const Atom& a, int z) {
  return a.point->y_scale * outcome_under(a.group, treatment_under(a.group, z));
}

void check_probability_vector(const std::vector<double>& p, const std::string& what) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(what + " has a negative or non-finite entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSumTolerance)
    throw ConfigError(what + " sums to " + std::to_string(sum) + ", not 1");
}

// Inverse-CDF draw over nonnegative weights summing to one.
std::size_t draw_index(const std::vector<double>& cumulative, double u) {
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  std::size_t k = static_cast<std::size_t>(it - cumulative.begin());
  if (k >= cumulative.size()) {
    // u beyond the rounded total: take the last index with positive mass.
    k = cumulative.size() - 1;
    while (k > 0 && cumulative[k] == cumulative[k - 1]) --k;
  }
  return k;
}

std::vector<double> cumulate(const std::vector<double>& p) {
  std::vector<double> c(p.size());
  std::partial_sum(p.begin(), p.end(), c.begin());
  return c;
}

struct Sampler {
  struct PartSampler {
    const StratificationDGP* dgp;
    std::vector<double> group_cdf;
    std::array<std::vector<double>, Group::kCount> atom_cdf;
  };
  std::vector<double> stratum_cdf;
  std::vector<PartSampler> parts;

  explicit Sampler(const StratificationDGP& dgp) {
    std::vector<double> sp;
    for (const auto& p : parts_of(dgp)) {
      sp.push_back(p.probability);
      PartSampler ps;
      ps.dgp = p.dgp;
      ps.group_cdf = cumulate(std::vector<double>(p.dgp->shares.begin(), p.dgp->shares.end()));
      for (Group g : Group::all()) {
        std::vector<double> w;
        for (const auto& pt : effective_law(*p.dgp, g)) w.push_back(pt.probability);
        ps.atom_cdf[g.index()] = cumulate(w);
      }
      parts.push_back(std::move(ps));
    }
    stratum_cdf = cumulate(sp);
  }
};

ObservationTable draw_rows(const StratificationDGP& dgp, const std::vector<int>& fixed_stratum,
                           Index n, std::uint64_t seed, unsigned threads) {
  dgp.validate();
  if (n < 1) throw ConfigError("sample size must be at least 1");
  const Sampler sampler(dgp);
  const auto k = static_cast<Index>(dgp.covariate_names.size());
  ObservationTable::Columns cols;
  cols.z.resize(n);
  cols.d.resize(n);
  cols.y.resize(n);
  cols.x.resize(n, k);
  cols.covariate_names = dgp.covariate_names;
  cols.y_binary = dgp.binary_outcome();
  std::vector<int> stratum(static_cast<std::size_t>(n), 0);

  parallel_chunks(static_cast<std::size_t>(n), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      StreamRng rng(seed, i);
      int w = 0;
      if (!fixed_stratum.empty()) {
        w = fixed_stratum[i];
      } else if (!dgp.strata.empty()) {
        w = static_cast<int>(draw_index(sampler.stratum_cdf, rng.uniform()));
      }
      const auto& part = sampler.parts[w];
      const Group g = Group::from_index(static_cast<int>(draw_index(part.group_cdf, rng.uniform())));
      const auto& law = effective_law(*part.dgp, g);
      const auto& pt = law[draw_index(part.atom_cdf[g.index()], rng.uniform())];
      const int z = rng.uniform() < part.dgp->tau ? 1 : 0;
      const int d = treatment_under(g, z);
      const auto row = static_cast<Index>(i);
      cols.z[row] = z;
      cols.d[row] = d;
      cols.y[row] = pt.y_scale * outcome_under(g, d);
      for (Index j = 0; j < k; ++j) cols.x(row, j) = pt.x[j];
      stratum[i] = w;
    }
  });
  if (!dgp.strata.empty()) {
    std::vector<std::string> labels(stratum.size());
    for (std::size_t i = 0; i < stratum.size(); ++i) labels[i] = dgp.strata[stratum[i]].label;
    cols.stratum = Categorical::from_labels(labels);
  }
  return ObservationTable::create(std::move(cols));
}

}  // namespace

void StratificationDGP::validate() const {
  if (!strata.empty()) {
    std::vector<double> probs;
    for (const auto& s : strata) {
      probs.push_back(s.probability);
      if (!s.dgp.strata.empty()) throw ConfigError("strata cannot be nested");
      if (s.dgp.covariate_names != covariate_names)
        throw ConfigError("stratum '" + s.label + "' covariates differ from the DGP's");
      s.dgp.validate();
    }
    check_probability_vector(probs, "stratum probabilities");
    return;
  }
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie strictly between 0 and 1");
  check_probability_vector(std::vector<double>(shares.begin(), shares.end()), "group shares");
  for (Group g : Group::all()) {
    const auto& law = covariate_law[g.index()];
    if (law.empty()) {
      if (share(g) > 0.0 && !covariate_names.empty())
        throw ConfigError("group " + g.code() + " has positive share but no covariate law");
      continue;
    }
    std::vector<double> p;
    for (const auto& pt : law) {
      p.push_back(pt.probability);
      if (pt.x.size() != covariate_names.size())
        throw ConfigError("covariate law of group " + g.code() + " has the wrong dimension");
      if (!std::isfinite(pt.y_scale)) throw ConfigError("y_scale must be finite");
      for (double v : pt.x)
        if (!std::isfinite(v)) throw ConfigError("covariate values must be finite");
    }
    check_probability_vector(p, "covariate law of group " + g.code());
  }
}

bool StratificationDGP::conforming() const {
  for (const auto& part : parts_of(*this))
    for (Group g : Group::all())
      if (!g.admissible() && part.dgp->share(g) > 0.0) return false;
  return true;
}

bool StratificationDGP::binary_outcome() const {
  for (const auto& part : parts_of(*this))
    for (const auto& law : part.dgp->covariate_law)
      for (const auto& pt : law)
        if (pt.y_scale != 1.0) return false;
  return true;
}

ObservedDistribution induce(const StratificationDGP& dgp) {
  ObservedDistribution out;
  double pz1 = 0.0;
  for (const auto& part : parts_of(dgp)) pz1 += part.probability * part.dgp->tau;
  for (const auto& part : parts_of(dgp)) {
    const double tau = part.dgp->tau;
    for (Group g : Group::all()) {
      const double pg = part.dgp->share(g);
      if (pg <= 0.0) continue;
      for (int z = 0; z < 2; ++z) {
        const double weight = part.probability * (z == 1 ? tau / pz1 : (1.0 - tau) / (1.0 - pz1));
        const int d = treatment_under(g, z);
        out(z, outcome_under(g, d), d) += weight * pg;
      }
    }
  }
  return out;
}

std::array<double, 3> inequality_lhs(const ObservedDistribution& o) {
  return {o(1, 0, 1) - o(0, 0, 1), o(0, 1, 0) - o(1, 1, 0),
          (o(1, 1, 0) + o(1, 1, 1)) - (o(0, 1, 0) + o(0, 1, 1))};
}

double CovariateTruth::cc_cdf(double x) const {
  double c = 0.0;
  for (const auto& [v, p] : cc_distribution)
    if (v <= x) c += p;
  return c;
}

double CovariateTruth::cc_quantile(double theta) const {
  if (cc_distribution.empty()) throw EstimationError("no supercomplier mass in the DGP");
  double c = 0.0;
  for (const auto& [v, p] : cc_distribution) {
    c += p;
    if (c >= theta * (1.0 - 1e-12)) return v;
  }
  return cc_distribution.back().first;
}

const CovariateTruth& AnalyticTruth::covariate(const std::string& name) const {
  for (const auto& c : covariates)
    if (c.name == name) return c;
  throw ConfigError("no covariate named '" + name + "' in the DGP");
}

AnalyticTruth true_values(const StratificationDGP& dgp) {
  dgp.validate();
  AnalyticTruth t;
  const auto atoms = atoms_of(dgp);
  for (const auto& a : atoms) {
    t.group_shares[a.group.index()] += a.prob;
    t.reduced_form += a.prob * (realized_y(a, 1) - realized_y(a, 0));
    t.first_stage += a.prob * (treatment_under(a.group, 1) - treatment_under(a.group, 0));
  }
  t.share_cc = t.group_shares[groups::cc.index()];
  t.share_ca = t.group_shares[groups::ca.index()];
  t.share_cn = t.group_shares[groups::cn.index()];
  t.share_cf = t.group_shares[groups::cf.index()];
  t.share_complier = t.share_cc + t.share_ca + t.share_cn + t.share_cf;
  if (std::abs(t.first_stage) > 1e-15) t.late = t.reduced_form / t.first_stage;
  t.observed = induce(dgp);
  t.inequality_lhs = inequality_lhs(t.observed);
  t.tau = 0.0;
  const auto parts = parts_of(dgp);
  for (const auto& p : parts) t.tau += p.probability * p.dgp->tau;

  auto in_target = [](Target target, Group g) {
    switch (target) {
      case Target::kPopulation: return true;
      case Target::kComplier: return g.treatment() == ResponseType::kComplier;
      case Target::kSupercomplier: return g == groups::cc;
      case Target::kCa: return g == groups::ca;
      case Target::kCn: return g == groups::cn;
    }
    return false;
  };

  for (std::size_t j = 0; j < dgp.covariate_names.size(); ++j) {
    CovariateTruth c;
    c.name = dgp.covariate_names[j];
    for (Target target : kAllTargets) {
      double num = 0.0, den = 0.0;
      for (const auto& a : atoms)
        if (in_target(target, a.group)) {
          num += a.prob * a.point->x[j];
          den += a.prob;
        }
      if (den > 0.0) c.mean_by_target[target] = num / den;
    }
    {
      double num = 0.0, den = 0.0;
      for (const auto& a : atoms)
        if (a.group == groups::cc) {
          num += a.prob * a.point->y_scale * a.point->x[j];
          den += a.prob * a.point->y_scale;
        }
      if (den != 0.0) c.te_weighted_mean = num / den;
    }
    // Pooled arm means of hY and Y, and per-stratum differences.
    std::array<double, 2> hy{}, y{};
    std::vector<double> dhy(parts.size(), 0.0), dy(parts.size(), 0.0);
    for (const auto& a : atoms) {
      for (int z = 0; z < 2; ++z) {
        const double pz = z == 1 ? a.tau / t.tau : (1.0 - a.tau) / (1.0 - t.tau);
        hy[z] += a.prob * pz * a.point->x[j] * realized_y(a, z);
        y[z] += a.prob * pz * realized_y(a, z);
      }
      const double per_stratum = a.prob / a.stratum_prob;
      dhy[a.stratum] += per_stratum * a.point->x[j] * (realized_y(a, 1) - realized_y(a, 0));
      dy[a.stratum] += per_stratum * (realized_y(a, 1) - realized_y(a, 0));
    }
    if (std::abs(y[1] - y[0]) > 1e-15) c.wald_limit = (hy[1] - hy[0]) / (y[1] - y[0]);
    double snum = 0.0, sden = 0.0;
    for (std::size_t w = 0; w < parts.size(); ++w) {
      const double v = parts[w].probability * parts[w].dgp->tau * (1.0 - parts[w].dgp->tau);
      snum += v * dhy[w];
      sden += v * dy[w];
    }
    if (std::abs(sden) > 1e-15) c.stratified_limit = snum / sden;

    std::map<double, double> cc_mass, all_mass;
    for (const auto& a : atoms) {
      all_mass[a.point->x[j]] += a.prob;
      if (a.group == groups::cc) cc_mass[a.point->x[j]] += a.prob;
    }
    for (const auto& [v, p] : cc_mass) c.cc_distribution.emplace_back(v, p / t.share_cc);
    for (const auto& [v, p] : all_mass) {
      const auto it = cc_mass.find(v);
      c.cc_given_x.emplace_back(v, it == cc_mass.end() ? 0.0 : it->second / p);
    }
    t.covariates.push_back(std::move(c));
  }
  return t;
}

ObservationTable sample(const StratificationDGP& dgp, Index n, std::uint64_t seed, unsigned threads) {
  return draw_rows(dgp, {}, n, seed, threads);
}

ObservationTable sample_per_stratum(const StratificationDGP& dgp, const std::vector<Index>& counts,
                                    std::uint64_t seed, unsigned threads) {
  const std::size_t parts = dgp.strata.empty() ? 1 : dgp.strata.size();
  if (counts.size() != parts) throw ConfigError("need one count per stratum");
  std::vector<int> fixed;
  for (std::size_t w = 0; w < counts.size(); ++w) {
    if (counts[w] < 0) throw ConfigError("stratum counts must be nonnegative");
    fixed.insert(fixed.end(), static_cast<std::size_t>(counts[w]), static_cast<int>(w));
  }
  return draw_rows(dgp, fixed, static_cast<Index>(fixed.size()), seed, threads);
}

StratificationDGP rationalize(const ObservedDistribution& o, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie strictly between 0 and 1");
  for (int z = 0; z < 2; ++z) {
    double sum = 0.0;
    for (int y = 0; y < 2; ++y)
      for (int d = 0; d < 2; ++d) {
        if (!(o(z, y, d) >= 0.0)) throw ConfigError("observed probabilities must be nonnegative");
        sum += o(z, y, d);
      }
    if (std::abs(sum - 1.0) > 1e-9)
      throw ConfigError("observed probabilities for Z=" + std::to_string(z) + " do not sum to 1");
  }
  const auto lhs = inequality_lhs(o);
  std::vector<SharpInequality> violated;
  std::ostringstream msg;
  msg << "sharp inequality violated:";
  for (std::size_t s = 0; s < 3; ++s) {
    if (lhs[s] < -kSumTolerance) {
      violated.push_back(assumptions::kAllInequalities[s]);
      msg << ' ' << assumptions::inequality_name(assumptions::kAllInequalities[s])
          << " (lhs = " << lhs[s] << ")";
    }
  }
  if (!violated.empty()) throw InequalityViolation(msg.str(), std::move(violated));

  using namespace groups;
  StratificationDGP dgp;
  dgp.tau = tau;
  dgp.set_share(aa, 0.5 * o(0, 1, 1));
  dgp.set_share(ac, 0.5 * o(0, 1, 1));
  dgp.set_share(an, o(0, 0, 1));
  dgp.set_share(na, o(1, 1, 0));
  dgp.set_share(nn, 0.5 * o(1, 0, 0));
  dgp.set_share(nc, 0.5 * o(1, 0, 0));
  dgp.set_share(cn, std::max(lhs[0], 0.0));
  dgp.set_share(ca, std::max(lhs[1], 0.0));
  dgp.set_share(cc, std::max(lhs[2], 0.0));
  return dgp;
}

double variance_gap_example(double mu_y) { return 0.25 * mu_y - 0.0625; }

StratificationDGP variance_gap_dgp(double mu_y) {
  if (!(mu_y >= 0.0 && mu_y <= 1.0)) throw ConfigError("mu_y must lie in [0, 1]");
  StratificationDGP dgp;
  dgp.tau = 0.5;
  dgp.covariate_names = {"x"};
  dgp.set_share(groups::aa, mu_y);
  dgp.set_share(groups::nn, 1.0 - mu_y);
  const CovariateLaw coin{{{0.0}, 0.5, 1.0}, {{1.0}, 0.5, 1.0}};
  dgp.covariate_law[groups::aa.index()] = coin;
  dgp.covariate_law[groups::nn.index()] = coin;
  return dgp;
}

VarianceGapSimulation simulate_variance_gap(double mu_y, Index n, std::uint64_t seed) {
  const auto dgp = variance_gap_dgp(mu_y);
  const auto table = sample(dgp, n, seed);
  std::vector<double> a, b;
  for (Index i = 0; i < table.n(); ++i) {
    if (table.z()[i] != 1.0) continue;
    const double x = table.x()(i, 0), y = table.y()[i];
    a.push_back(x * y);
    b.push_back(x * (y - 1.0 + dgp.tau));
  }
  const auto m = static_cast<double>(a.size());
  if (a.size() < 2) throw EstimationError("too few treated rows for the variance comparison");
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / m;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / m;
  std::vector<double> psi(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    psi[i] = (a[i] - ma) * (a[i] - ma) - (b[i] - mb) * (b[i] - mb);
  const double diff = std::accumulate(psi.begin(), psi.end(), 0.0) / m;
  double ss = 0.0;
  for (double v : psi) ss += (v - diff) * (v - diff);
  VarianceGapSimulation out;
  out.difference = diff;
  out.mc_se = std::sqrt(ss / (m - 1.0) / m);
  out.treated_rows = static_cast<Index>(a.size());
  return out;
}

StratificationDGP violation_dgp(double share_cf, double share_cc,
                                const std::map<Group, double>& other_shares,
                                const std::map<Group, CovariateLaw>& laws,
                                const std::vector<std::string>& covariate_names, double tau) {
  StratificationDGP dgp;
  dgp.tau = tau;
  dgp.covariate_names = covariate_names;
  for (const auto& [g, p] : other_shares) {
    if (g == groups::cf || g == groups::cc)
      throw ConfigError("cc and cf shares are passed separately");
    dgp.set_share(g, p);
  }
  dgp.set_share(groups::cf, share_cf);
  dgp.set_share(groups::cc, share_cc);
  for (const auto& [g, law] : laws) dgp.covariate_law[g.index()] = law;
  dgp.validate();
  return dgp;
}

// --- JSON -------------------------------------------------------------------

namespace {

using nlohmann::json;

StratificationDGP part_from_json(const json& j, const std::vector<std::string>& names) {
  StratificationDGP dgp;
  dgp.covariate_names = names;
  dgp.tau = j.value("tau", 0.5);
  if (j.contains("shares")) {
    for (const auto& [code, p] : j.at("shares").items()) dgp.set_share(Group::parse(code), p.get<double>());
  }
  if (j.contains("covariate_laws")) {
    for (const auto& [code, law] : j.at("covariate_laws").items()) {
      CovariateLaw out;
      for (const auto& pt : law) {
        SupportPoint sp;
        sp.x = pt.value("x", std::vector<double>{});
        sp.probability = pt.at("p").get<double>();
        sp.y_scale = pt.value("y_scale", 1.0);
        out.push_back(std::move(sp));
      }
      dgp.covariate_law[Group::parse(code).index()] = std::move(out);
    }
  }
  return dgp;
}

json part_to_json(const StratificationDGP& dgp) {
  json j;
  j["tau"] = dgp.tau;
  json shares = json::object();
  json laws = json::object();
  for (Group g : Group::all()) {
    if (dgp.share(g) != 0.0) shares[g.code()] = dgp.share(g);
    const auto& law = dgp.covariate_law[g.index()];
    if (law.empty()) continue;
    json arr = json::array();
    for (const auto& pt : law) {
      json p{{"x", pt.x}, {"p", pt.probability}};
      if (pt.y_scale != 1.0) p["y_scale"] = pt.y_scale;
      arr.push_back(std::move(p));
    }
    laws[g.code()] = std::move(arr);
  }
  j["shares"] = std::move(shares);
  j["covariate_laws"] = std::move(laws);
  return j;
}

}  // namespace

StratificationDGP from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    const auto names = j.value("covariates", std::vector<std::string>{});
    StratificationDGP dgp = part_from_json(j, names);
    if (j.contains("strata")) {
      for (const auto& s : j.at("strata")) {
        Stratum st;
        st.label = s.at("label").get<std::string>();
        st.probability = s.at("probability").get<double>();
        st.dgp = part_from_json(s.at("dgp"), names);
        dgp.strata.push_back(std::move(st));
      }
    }
    dgp.validate();
    return dgp;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid DGP specification: ") + e.what());
  }
}

StratificationDGP load_dgp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open DGP file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

std::string to_json(const StratificationDGP& dgp) {
  json j = part_to_json(dgp);
  j["covariates"] = dgp.covariate_names;
  if (!dgp.strata.empty()) {
    json arr = json::array();
    for (const auto& s : dgp.strata)
      arr.push_back({{"label", s.label}, {"probability", s.probability}, {"dgp", part_to_json(s.dgp)}});
    j["strata"] = std::move(arr);
  }
  return j.dump(2);
}

namespace presets {

ObservedDistribution rationalization_observed() {
  ObservedDistribution o;
  o(0, 1, 1) = 0.2;
  o(0, 0, 1) = 0.1;
  o(0, 1, 0) = 0.3;
  o(0, 0, 0) = 0.4;
  o(1, 1, 1) = 0.5;
  o(1, 0, 1) = 0.15;
  o(1, 1, 0) = 0.2;
  o(1, 0, 0) = 0.15;
  return o;
}

StratificationDGP rationalization_example() {
  StratificationDGP dgp = rationalize(rationalization_observed(), 0.5);
  dgp.covariate_names = {"x1", "x2"};
  using Marginal = std::vector<std::pair<double, double>>;
  auto law = [](const Marginal& x1, double p_x2) {
    CovariateLaw out;
    for (const auto& [v, p] : x1) {
      out.push_back({{v, 0.0}, p * (1.0 - p_x2), 1.0});
      out.push_back({{v, 1.0}, p * p_x2, 1.0});
    }
    return out;
  };
  using namespace groups;
  dgp.covariate_law[cc.index()] = law({{1, .1}, {2, .2}, {3, .3}, {4, .25}, {5, .15}}, 0.7);
  dgp.covariate_law[ca.index()] = law({{0, .2}, {1, .3}, {2, .3}, {3, .2}}, 0.4);
  dgp.covariate_law[cn.index()] = law({{3, .2}, {4, .3}, {5, .3}, {6, .2}}, 0.2);
  dgp.covariate_law[aa.index()] = law({{0, .5}, {6, .5}}, 0.5);
  dgp.covariate_law[ac.index()] = law({{2, .5}, {4, .5}}, 0.5);
  dgp.covariate_law[an.index()] = law({{1, .4}, {5, .6}}, 0.5);
  dgp.covariate_law[na.index()] = law({{0, .3}, {3, .4}, {6, .3}}, 0.5);
  Marginal uniform;
  for (int v = 0; v <= 6; ++v) uniform.emplace_back(v, 1.0 / 7.0);
  dgp.covariate_law[nn.index()] = law(uniform, 0.5);
  dgp.covariate_law[nc.index()] = law({{2, .6}, {3, .4}}, 0.5);
  dgp.validate();
  return dgp;
}

}  // namespace presets

}  // namespace sck::dgp
