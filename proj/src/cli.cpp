#include "sck/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "sck/assumption_tests.hpp"
#include "sck/dgp_oracle.hpp"
#include "sck/errors.hpp"
#include "sck/identification.hpp"
#include "sck/report.hpp"
#include "sck/rng.hpp"

namespace sck::cli {

namespace {

using report::Json;
using report::Report;
using report::Warnings;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& s, const char* what) {
  std::vector<double> out;
  for (const auto& tok : split_list(s)) {
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw ConfigError(std::string("invalid number '") + tok + "' in " + what);
    }
  }
  if (out.empty()) throw ConfigError(std::string(what) + " is empty");
  return out;
}

std::string output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("SCK_OUTPUT_DIR"); env && *env) return env;
  return ".";
}

struct LoadedData {
  ObservationTable table;
  std::string hash;
  Json config;
};

LoadedData load(const std::string& data_path, const std::string& config_path,
                ColumnMapping& mapping) {
  const std::string bytes = read_file(data_path);
  std::string config_text;
  if (!config_path.empty()) {
    config_text = read_file(config_path);
    mapping = parse_mapping(config_text);
  }
  std::istringstream in(bytes);
  auto table = load_observations(in, mapping);
  Json config = Json::object();
  config["z"] = mapping.z;
  config["d"] = mapping.d;
  config["y"] = mapping.y;
  config["covariates"] = mapping.covariates;
  config["stratum"] = mapping.stratum ? Json(*mapping.stratum) : Json(nullptr);
  config["cluster"] = mapping.cluster ? Json(*mapping.cluster) : Json(nullptr);
  config["categoricals"] = mapping.extra_categoricals;
  config["y_binary"] = mapping.y_binary;
  config["tau_known"] = mapping.tau_known ? Json(*mapping.tau_known) : Json(nullptr);
  return {std::move(table), report::fnv1a64(bytes + '\0' + config_text), std::move(config)};
}

void weak_reduced_form_check(const ident::WaldEstimate& rf, double threshold, Warnings& w) {
  if (rf.se <= 0.0) return;
  const double stat = (rf.value / rf.se) * (rf.value / rf.se);
  if (stat < threshold)
    w.add("weak reduced form: (RF/SE)^2 = " + report::format_number(stat, 2) + " is below " +
          report::format_number(threshold, 2));
}

Json warnings_json(const Warnings& w) { return Json(w.items()); }

void emit(const Report& r, const std::string& dir, std::ostream& out) {
  report::write_report(r, dir);
  out << r.text;
}

// --- estimate -----------------------------------------------------------------

struct EstimateArgs {
  std::string data, config, strata, covariates, out;
  double level = 0.95;
  double weak_threshold = 10.0;
  bool ar = false;
};

int run_estimate(const EstimateArgs& a, std::ostream& out) {
  ColumnMapping mapping;
  mapping = load_mapping(a.config);
  if (!a.strata.empty()) mapping.stratum = a.strata;
  if (!a.covariates.empty()) mapping.covariates = split_list(a.covariates);
  const std::string config_text = read_file(a.config);
  const std::string bytes = read_file(a.data);
  std::istringstream in(bytes);
  const auto table = load_observations(in, mapping);
  Json config = Json::parse(config_text);
  config["effective_covariates"] = mapping.covariates;
  config["effective_stratum"] = mapping.stratum ? Json(*mapping.stratum) : Json(nullptr);
  const std::string hash = report::fnv1a64(bytes + '\0' + config_text);

  Warnings warnings;
  Report r;
  r.doc["schema"] = report::kSchema;
  r.doc["metadata"] = report::metadata("estimate", hash, config, std::nullopt, table.n());

  if (!table.y_binary()) {
    // Only the reduced form and TE-weighted supercomplier means are meaningful.
    const auto rf = ident::supercomplier_share(table, a.level);
    weak_reduced_form_check(rf, a.weak_threshold, warnings);
    Json chars = Json::array();
    std::ostringstream text;
    text << "Non-binary outcome: treatment-effect weighted estimands\n"
         << "reduced form " << report::format_number(rf.value) << " ("
         << report::format_number(rf.se) << ")\n";
    for (const auto& name : mapping.covariates) {
      const auto w = ident::characteristics_wald(table, table.covariate(name), Target::kSupercomplier, a.level);
      chars.push_back({{"covariate", name}, {"te_weighted_supercomplier", report::to_json(w)}});
      text << name << "  " << w.label << " " << report::format_number(w.value) << " ("
           << report::format_number(w.se) << ")\n";
    }
    r.doc["shares"] = {{"reduced_form", report::to_json(rf)}};
    r.doc["characteristics"] = std::move(chars);
    r.doc["tests"] = nullptr;
    r.doc["warnings"] = warnings_json(warnings);
    r.text = text.str() + "\n" + report::render_warnings(warnings);
    emit(r, output_dir(a.out), out);
    return kOk;
  }

  const auto summary = ident::summarize(table, mapping.covariates, a.level);
  warnings.add_all(summary.warnings);
  weak_reduced_form_check(summary.share_cc, a.weak_threshold, warnings);

  const double gap = summary.share_ca.value + summary.share_cn.value + summary.share_cc.value -
                     summary.share_complier.value;
  r.doc["shares"] = {{"supercomplier", report::to_json(summary.share_cc)},
                     {"ca", report::to_json(summary.share_ca)},
                     {"cn", report::to_json(summary.share_cn)},
                     {"complier", report::to_json(summary.share_complier)},
                     {"identity_gap", gap}};

  std::ostringstream extra;
  Json chars = Json::array();
  for (const auto& row : summary.characteristics) {
    Json entry;
    entry["covariate"] = row.covariate;
    Json means = Json::object();
    for (const auto& [t, w] : row.means) means[std::string(target_name(t))] = report::to_json(w);
    entry["means"] = std::move(means);
    Json diffs = Json::array();
    for (const auto& d : row.differences)
      diffs.push_back({{"a", target_name(d.a)}, {"b", target_name(d.b)},
                       {"value", d.value}, {"se", d.se}});
    entry["differences"] = std::move(diffs);

    const VectorXd h = table.covariate(row.covariate);
    try {
      const auto plug = ident::characteristics_plugin(table, h, Target::kSupercomplier, a.level,
                                                      mapping.tau_known);
      entry["supercomplier_plugin"] = report::to_json(plug);
    } catch (const EstimationError& e) {
      warnings.add(row.covariate + ": plug-in estimate unavailable (" + e.what() + ")");
      entry["supercomplier_plugin"] = nullptr;
    }
    try {
      const auto fn = ident::fink_noto_equivalence_check(table, h);
      entry["complier_assembly_check"] = {{"assembled", fn.assembled}, {"tsls", fn.tsls},
                                          {"rel_difference", fn.rel_difference}, {"equal", fn.equal}};
      if (!fn.equal) warnings.add(row.covariate + ": complier assembly check failed");
    } catch (const EstimationError&) {
      entry["complier_assembly_check"] = nullptr;
    }
    if (a.ar) {
      const auto ar = regression::anderson_rubin_ci(table, h, a.level);
      warnings.add_all(ar.warnings);
      entry["supercomplier_ar"] = report::to_json(ar);
      extra << row.covariate << "  AR " << report::format_number(a.level * 100, 0) << "% set:";
      for (const auto& iv : ar.intervals)
        extra << " [" << report::format_number(iv.lower) << ", " << report::format_number(iv.upper) << "]";
      if (ar.intervals.empty()) extra << " empty";
      if (!ar.bounded()) extra << " (reaches grid edge)";
      extra << '\n';
    }
    if (table.stratum()) {
      const auto st = ident::stratified_characteristics(table, h, a.level);
      warnings.add_all(st.warnings);
      entry["stratified"] = report::to_json(st);
      extra << row.covariate << "  stratified FE-2SLS " << report::format_number(st.fe_2sls.value)
            << " (" << report::format_number(st.fe_2sls.se) << "), omega-weighted "
            << report::format_number(st.decomposition) << '\n';
    }
    chars.push_back(std::move(entry));
  }
  r.doc["characteristics"] = std::move(chars);
  r.doc["tests"] = nullptr;
  r.doc["warnings"] = warnings_json(warnings);

  std::ostringstream text;
  text << "sck estimate  n = " << table.n() << "  input fnv1a64:" << hash << "\n\n"
       << report::render_shares(summary) << '\n'
       << report::render_characteristics(summary);
  if (!extra.str().empty()) text << '\n' << extra.str();
  text << '\n' << report::render_warnings(warnings);
  r.text = text.str();
  emit(r, output_dir(a.out), out);
  return kOk;
}

// --- test ---------------------------------------------------------------------

struct TestArgs {
  std::string data, config, cells, cell_covariate, out;
  int cell_bins = 0;
  int draws = 100000;
  std::uint64_t seed = 12345;
  double level = 0.05;
  bool strict = false;
};

int run_test(const TestArgs& a, std::ostream& out) {
  ColumnMapping mapping;
  if (!a.config.empty()) mapping = load_mapping(a.config);
  if (!a.cells.empty()) mapping.extra_categoricals.push_back(a.cells);
  if (!a.cell_covariate.empty() &&
      std::find(mapping.covariates.begin(), mapping.covariates.end(), a.cell_covariate) ==
          mapping.covariates.end())
    mapping.covariates.push_back(a.cell_covariate);
  if (!a.cell_covariate.empty() && a.cell_bins < 1)
    throw ConfigError("--cell-covariate needs --cell-bins");
  auto data = load(a.data, "", mapping);
  if (!a.config.empty()) {
    const std::string config_text = read_file(a.config);
    data.hash = report::fnv1a64(read_file(a.data) + '\0' + config_text);
  }
  const auto& table = data.table;

  assumptions::SimulationOptions sim;
  sim.level = a.level;
  sim.draws = a.draws;
  sim.seed = a.seed;

  Warnings warnings;
  Report r;
  r.doc["schema"] = report::kSchema;
  data.config["cells"] = a.cells.empty() ? Json(nullptr) : Json(a.cells);
  data.config["cell_covariate"] = a.cell_covariate.empty() ? Json(nullptr) : Json(a.cell_covariate);
  data.config["cell_bins"] = a.cell_bins;
  r.doc["metadata"] = report::metadata("test", data.hash, data.config, a.seed, table.n());

  std::ostringstream text;
  text << "sck test  n = " << table.n() << "  input fnv1a64:" << data.hash << "\n\n";
  bool any_reject = false;
  Json tests = Json::object();

  if (table.y_binary()) {
    Json stats = Json::array();
    for (const auto& s : assumptions::inequality_statistics(table))
      stats.push_back({{"inequality", assumptions::inequality_name(s.which)},
                       {"estimate", s.estimate}, {"se", s.se}});
    tests["inequalities"] = std::move(stats);
    const auto joint = assumptions::joint_sharp_test(table, sim);
    tests["joint"] = report::to_json(joint);
    any_reject |= joint.reject;
    text << report::render_test("Joint sharp test (min of three inequalities)", joint) << '\n';
  } else {
    warnings.add("non-binary outcome: joint sharp test skipped; outcome-monotonicity tests only");
    tests["inequalities"] = nullptr;
    tests["joint"] = nullptr;
  }

  const auto om = assumptions::om_test(table, a.level);
  tests["om"] = report::to_json(om);
  any_reject |= om.reject;
  text << "Outcome monotonicity (reduced form >= 0)\n"
       << "  estimate " << report::format_number(om.estimate) << " ("
       << report::format_number(om.se) << "), one-sided p " << report::format_number(om.p_value)
       << ", " << (om.reject ? "reject" : "do not reject") << "\n\n";

  std::optional<Categorical> cells;
  if (!a.cells.empty()) cells = table.categorical(a.cells);
  if (!a.cell_covariate.empty()) {
    auto [codes, edges] = ident::discretize(table.covariate(a.cell_covariate), a.cell_bins);
    std::vector<std::string> labels(codes.size());
    for (std::size_t i = 0; i < codes.size(); ++i)
      labels[i] = a.cell_covariate + "<=" + report::format_number(edges[codes[i]], 6);
    cells = Categorical::from_labels(labels);
    if (!a.cells.empty()) throw ConfigError("use either --cells or --cell-covariate, not both");
  }
  if (cells) {
    const auto cond = assumptions::om_test_conditional(table, *cells, sim);
    tests["om_conditional"] = report::to_json(cond);
    any_reject |= cond.reject;
    text << report::render_test("Conditional outcome monotonicity (one stack per cell)", cond) << '\n';
  } else {
    tests["om_conditional"] = nullptr;
  }
  if (any_reject) warnings.add("at least one test rejects the identifying assumptions");

  r.doc["shares"] = nullptr;
  r.doc["characteristics"] = nullptr;
  r.doc["tests"] = std::move(tests);
  r.doc["warnings"] = warnings_json(warnings);
  text << report::render_warnings(warnings);
  r.text = text.str();
  emit(r, output_dir(a.out), out);
  return a.strict && any_reject ? kRejected : kOk;
}

// --- simulate -------------------------------------------------------------------

struct SimulateArgs {
  std::string dgp, out;
  Index n = 0;
  std::uint64_t seed = 12345;
  int reps = 1;
  double level = 0.95;
};

struct Tally {
  std::string estimand;
  double truth = 0.0;
  std::vector<double> estimates;
  std::vector<double> ses;
  int within = 0;
  int failures = 0;
};

int run_simulate(const SimulateArgs& a, std::ostream& out) {
  if (a.n < 2) throw ConfigError("--n must be at least 2");
  if (a.reps < 1) throw ConfigError("--reps must be at least 1");
  const std::string text_in = read_file(a.dgp);
  const auto dgp = dgp::from_json(text_in);
  const auto truth = dgp::true_values(dgp);
  const bool binary = dgp.binary_outcome();

  std::vector<Tally> tallies;
  auto tally = [&](const std::string& name, double truth_value) -> Tally& {
    for (auto& t : tallies)
      if (t.estimand == name) return t;
    tallies.push_back({name, truth_value, {}, {}, 0, 0});
    return tallies.back();
  };
  auto record = [&](const std::string& name, double truth_value, auto&& compute) {
    Tally& t = tally(name, truth_value);
    try {
      const ident::WaldEstimate w = compute();
      t.estimates.push_back(w.value);
      t.ses.push_back(w.se);
      if (std::abs(w.value - truth_value) <= 4.0 * w.se) ++t.within;
    } catch (const EstimationError&) {
      ++t.failures;
    }
  };

  for (int rep = 0; rep < a.reps; ++rep) {
    const std::uint64_t rep_seed = StreamRng(a.seed, static_cast<std::uint64_t>(rep)).next();
    const auto table = dgp::sample(dgp, a.n, rep_seed);
    record(binary ? "share_cc" : "reduced_form", binary ? truth.share_cc : truth.reduced_form,
           [&] { return ident::supercomplier_share(table, a.level); });
    record("share_complier", truth.share_complier, [&] { return ident::first_stage(table, a.level); });
    if (binary) {
      record("share_ca", truth.share_ca, [&] { return ident::other_group_shares(table, a.level).ca; });
      record("share_cn", truth.share_cn, [&] { return ident::other_group_shares(table, a.level).cn; });
    }
    for (const auto& cov : truth.covariates) {
      const VectorXd h = table.covariate(cov.name);
      for (Target t : kAllTargets) {
        if (!binary && (t == Target::kCa || t == Target::kCn)) continue;
        std::optional<double> tv;
        if (t == Target::kSupercomplier && !binary) {
          tv = cov.te_weighted_mean;
        } else if (auto it = cov.mean_by_target.find(t); it != cov.mean_by_target.end()) {
          tv = it->second;
        }
        if (!tv) continue;
        record(cov.name + ":" + std::string(target_name(t)), *tv,
               [&] { return ident::characteristics_wald(table, h, t, a.level); });
      }
      if (table.stratum() && cov.stratified_limit) {
        record(cov.name + ":stratified_fe_2sls", *cov.stratified_limit,
               [&] { return ident::stratified_characteristics(table, h, a.level).fe_2sls; });
      }
    }
  }

  Json results = Json::array();
  std::ostringstream text;
  text << "sck simulate  n = " << a.n << "  reps = " << a.reps << "  seed = " << a.seed << "\n\n";
  text << "estimand                              truth        mean est     mean se   within 4 se\n";
  Warnings warnings;
  if (!dgp.conforming())
    warnings.add("DGP has defier-component mass; estimands need not equal group truths");
  for (const auto& t : tallies) {
    const auto m = static_cast<double>(t.estimates.size());
    double mean = 0.0, se = 0.0;
    for (std::size_t i = 0; i < t.estimates.size(); ++i) {
      mean += t.estimates[i] / m;
      se += t.ses[i] / m;
    }
    Json entry{{"estimand", t.estimand},
               {"truth", t.truth},
               {"estimates", t.estimates},
               {"ses", t.ses},
               {"mean_estimate", t.estimates.empty() ? Json(nullptr) : Json(mean)},
               {"within_4se", t.within},
               {"failures", t.failures}};
    results.push_back(std::move(entry));
    std::string name = t.estimand;
    name.resize(std::max<std::size_t>(name.size(), 34), ' ');
    char line[256];
    std::snprintf(line, sizeof line, "%s %12s %12s %12s   %d/%d\n", name.c_str(),
                  report::format_number(t.truth).c_str(),
                  t.estimates.empty() ? "-" : report::format_number(mean).c_str(),
                  t.estimates.empty() ? "-" : report::format_number(se).c_str(), t.within, a.reps);
    text << line;
    if (t.failures > 0)
      warnings.add(t.estimand + ": estimation failed in " + std::to_string(t.failures) + " replication(s)");
  }

  Json truth_json{{"share_cc", truth.share_cc},
                  {"share_ca", truth.share_ca},
                  {"share_cn", truth.share_cn},
                  {"share_cf", truth.share_cf},
                  {"share_complier", truth.share_complier},
                  {"reduced_form", truth.reduced_form},
                  {"first_stage", truth.first_stage},
                  {"late", truth.late ? Json(*truth.late) : Json(nullptr)},
                  {"inequality_lhs", truth.inequality_lhs},
                  {"tau", truth.tau}};
  Report r;
  r.doc["schema"] = report::kSchema;
  r.doc["metadata"] = report::metadata("simulate", report::fnv1a64(text_in),
                                       Json{{"dgp", Json::parse(dgp::to_json(dgp))},
                                            {"reps", a.reps}, {"level", a.level}},
                                       a.seed, a.n);
  r.doc["truth"] = std::move(truth_json);
  r.doc["simulation"] = std::move(results);
  r.doc["shares"] = nullptr;
  r.doc["characteristics"] = nullptr;
  r.doc["tests"] = nullptr;
  r.doc["warnings"] = warnings_json(warnings);
  text << '\n' << report::render_warnings(warnings);
  r.text = text.str();
  emit(r, output_dir(a.out), out);
  return kOk;
}

// --- quantiles ------------------------------------------------------------------

struct QuantileArgs {
  std::string data, config, covariate, theta, grid, conditioning = "x", out;
  int bins = 20;
  int bootstrap = 0;
  std::uint64_t seed = 12345;
  bool rearrange = false;
  double level = 0.95;
};

int run_quantiles(const QuantileArgs& a, std::ostream& out) {
  ColumnMapping mapping;
  if (!a.config.empty()) mapping = load_mapping(a.config);
  if (std::find(mapping.covariates.begin(), mapping.covariates.end(), a.covariate) ==
      mapping.covariates.end())
    mapping.covariates.push_back(a.covariate);
  auto data = load(a.data, "", mapping);
  if (!a.config.empty()) data.hash = report::fnv1a64(read_file(a.data) + '\0' + read_file(a.config));
  const auto& table = data.table;

  ident::QuantileOptions opts;
  if (a.conditioning == "x") {
    opts.conditioning = ident::Conditioning::kX;
  } else if (a.conditioning == "yx") {
    opts.conditioning = ident::Conditioning::kYX;
  } else {
    throw ConfigError("--conditioning must be 'x' or 'yx'");
  }
  opts.bins = a.bins;
  opts.bootstrap_reps = a.bootstrap;
  opts.seed = a.seed;

  Warnings warnings;
  std::ostringstream text;
  text << "sck quantiles  n = " << table.n() << "  covariate " << a.covariate << "\n\n"
       << "Supercomplier quantiles\n";
  Json qs = Json::array();
  for (double theta : parse_doubles(a.theta, "--theta")) {
    const auto q = ident::supercomplier_quantile(table, a.covariate, theta, opts);
    warnings.add_all(q.warnings);
    qs.push_back(report::to_json(q));
    text << "  theta " << report::format_number(theta, 3) << "  " << report::format_number(q.value);
    if (q.se) text << " (" << report::format_number(*q.se) << ")";
    text << '\n';
  }
  Json cdf = nullptr;
  if (!a.grid.empty()) {
    const auto est = ident::characteristics_cdf(table, a.covariate, parse_doubles(a.grid, "--grid"),
                                                a.rearrange, Target::kSupercomplier, a.level);
    cdf = Json::array();
    text << "\nSupercomplier CDF\n";
    for (std::size_t k = 0; k < est.grid.size(); ++k) {
      Json e{{"x", est.grid[k]}, {"estimate", report::to_json(est.raw[k])}};
      if (!est.rearranged.empty()) e["rearranged"] = est.rearranged[k];
      cdf.push_back(std::move(e));
      text << "  x <= " << report::format_number(est.grid[k]) << "  "
           << report::format_number(est.raw[k].value) << " (" << report::format_number(est.raw[k].se)
           << ")";
      if (!est.rearranged.empty()) text << "  rearranged " << report::format_number(est.rearranged[k]);
      text << '\n';
    }
  }
  data.config["conditioning"] = a.conditioning;
  data.config["bins"] = a.bins;
  data.config["bootstrap"] = a.bootstrap;
  Report r;
  r.doc["schema"] = report::kSchema;
  r.doc["metadata"] = report::metadata("quantiles", data.hash, data.config,
                                       a.bootstrap > 0 ? std::optional(a.seed) : std::nullopt, table.n());
  r.doc["quantiles"] = std::move(qs);
  r.doc["cdf"] = std::move(cdf);
  r.doc["shares"] = nullptr;
  r.doc["characteristics"] = nullptr;
  r.doc["tests"] = nullptr;
  r.doc["warnings"] = warnings_json(warnings);
  text << '\n' << report::render_warnings(warnings);
  r.text = text.str();
  emit(r, output_dir(a.out), out);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Supercomplier estimation, assumption tests and simulation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(report::kVersion));

  EstimateArgs est;
  auto* e = app.add_subcommand("estimate", "Shares and characteristics of latent groups");
  e->add_option("--data", est.data, "CSV input")->required();
  e->add_option("--config", est.config, "JSON column mapping")->required();
  e->add_option("--strata", est.strata, "Stratum column (overrides config)");
  e->add_option("--covariates", est.covariates, "Comma-separated covariates (overrides config)");
  e->add_option("--out", est.out, "Output directory (default $SCK_OUTPUT_DIR or .)");
  e->add_option("--level", est.level, "Confidence level")->check(CLI::Range(0.5, 0.9999));
  e->add_option("--weak-threshold", est.weak_threshold, "Warn when (RF/SE)^2 is below this");
  e->add_flag("--ar", est.ar, "Anderson-Rubin sets for supercomplier means");

  TestArgs tst;
  auto* t = app.add_subcommand("test", "Sharp and outcome-monotonicity tests");
  t->add_option("--data", tst.data, "CSV input")->required();
  t->add_option("--config", tst.config, "JSON column mapping");
  t->add_option("--cells", tst.cells, "Categorical column defining test cells");
  t->add_option("--cell-covariate", tst.cell_covariate, "Covariate to discretize into cells");
  t->add_option("--cell-bins", tst.cell_bins, "Equal-frequency bins for --cell-covariate");
  t->add_option("--draws", tst.draws, "Simulation draws");
  t->add_option("--seed", tst.seed, "Simulation seed");
  t->add_option("--level", tst.level, "Test level")->check(CLI::Range(0.0001, 0.5));
  t->add_option("--out", tst.out, "Output directory");
  t->add_flag("--strict", tst.strict, "Exit with status 1 when any test rejects");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Sample a DGP and compare estimates with the truth");
  s->add_option("--dgp", sim.dgp, "DGP JSON file")->required();
  s->add_option("--n", sim.n, "Rows per replication")->required();
  s->add_option("--seed", sim.seed, "Master seed")->required();
  s->add_option("--reps", sim.reps, "Replications");
  s->add_option("--level", sim.level, "Confidence level")->check(CLI::Range(0.5, 0.9999));
  s->add_option("--out", sim.out, "Output directory");

  QuantileArgs qa;
  auto* q = app.add_subcommand("quantiles", "Supercomplier quantiles and CDF of a covariate");
  q->add_option("--data", qa.data, "CSV input")->required();
  q->add_option("--config", qa.config, "JSON column mapping");
  q->add_option("--covariate", qa.covariate, "Covariate column")->required();
  q->add_option("--theta", qa.theta, "Comma-separated quantile levels")->required();
  q->add_option("--grid", qa.grid, "Comma-separated CDF grid");
  q->add_flag("--rearrange", qa.rearrange, "Add a monotone rearranged CDF");
  q->add_option("--conditioning", qa.conditioning, "x or yx");
  q->add_option("--bins", qa.bins, "Maximum cells for the conditioning covariate");
  q->add_option("--bootstrap", qa.bootstrap, "Bootstrap replications for standard errors");
  q->add_option("--seed", qa.seed, "Bootstrap seed");
  q->add_option("--out", qa.out, "Output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*e) return run_estimate(est, out);
    if (*t) return run_test(tst, out);
    if (*s) return run_simulate(sim, out);
    if (*q) return run_quantiles(qa, out);
  } catch (const ConfigError& ex) {
    err << "configuration error: " << ex.what() << '\n';
    return kConfigError;
  } catch (const DataError& ex) {
    err << "data error: " << ex.what() << '\n';
    return kDataError;
  } catch (const EstimationError& ex) {
    err << "estimation error: " << ex.what() << '\n';
    return kEstimationError;
  } catch (const std::exception& ex) {
    err << "internal error: " << ex.what() << '\n';
    return kInternalError;
  }
  return kInternalError;
}

}  // namespace sck::cli
