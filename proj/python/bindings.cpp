#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "sck/assumption_tests.hpp"
#include "sck/cli.hpp"
#include "sck/dgp_oracle.hpp"
#include "sck/errors.hpp"
#include "sck/identification.hpp"

namespace py = pybind11;
using namespace sck;

namespace {

py::dict wald_dict(const ident::WaldEstimate& w) {
  py::dict d;
  d["value"] = w.value;
  d["se"] = w.se;
  d["ci"] = py::make_tuple(w.ci.lower, w.ci.upper);
  d["numerator"] = w.numerator;
  d["denominator"] = w.denominator;
  d["label"] = w.label;
  d["level"] = w.level;
  return d;
}

py::dict sharp_dict(const assumptions::SharpTestResult& r) {
  py::dict d;
  d["names"] = r.names;
  d["theta"] = r.theta;
  d["se"] = r.se;
  d["vcov"] = r.vcov;
  d["theta_min"] = r.theta_min;
  d["critical_value"] = r.critical_value;
  d["critical_value_mcse"] = r.critical_value_mcse;
  d["p_value"] = r.p_value;
  d["reject"] = r.reject;
  d["level"] = r.level;
  d["draws"] = r.draws;
  d["seed"] = r.seed;
  return d;
}

Categorical labels_to_categorical(const std::vector<std::string>& labels) {
  return Categorical::from_labels(labels);
}

ObservationTable make_table(const VectorXd& z, const VectorXd& d, const VectorXd& y,
                            std::optional<MatrixXd> x, std::vector<std::string> names,
                            std::optional<std::vector<std::string>> stratum,
                            std::optional<std::vector<std::string>> cluster, bool y_binary) {
  ObservationTable::Columns c;
  c.z = z;
  c.d = d;
  c.y = y;
  c.x = x ? *x : MatrixXd(z.size(), 0);
  if (names.empty())
    for (Index j = 0; j < c.x.cols(); ++j) names.push_back("x" + std::to_string(j + 1));
  c.covariate_names = std::move(names);
  if (stratum) c.stratum = labels_to_categorical(*stratum);
  if (cluster) c.cluster = labels_to_categorical(*cluster);
  c.y_binary = y_binary;
  return ObservationTable::create(std::move(c));
}

assumptions::SimulationOptions sim_options(double level, int draws, std::uint64_t seed) {
  assumptions::SimulationOptions o;
  o.level = level;
  o.draws = draws;
  o.seed = seed;
  return o;
}

dgp::ObservedDistribution observed_from(const std::vector<std::vector<std::vector<double>>>& p) {
  dgp::ObservedDistribution o;
  if (p.size() != 2) throw ConfigError("observed distribution must be indexed [z][y][d]");
  for (int z = 0; z < 2; ++z) {
    if (p[z].size() != 2) throw ConfigError("observed distribution must be indexed [z][y][d]");
    for (int y = 0; y < 2; ++y) {
      if (p[z][y].size() != 2) throw ConfigError("observed distribution must be indexed [z][y][d]");
      for (int d = 0; d < 2; ++d) o(z, y, d) = p[z][y][d];
    }
  }
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Supercomplier estimation core";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  auto data_error = py::register_exception<DataError>(m, "DataError", base.ptr());
  auto est_error = py::register_exception<EstimationError>(m, "EstimationError", base.ptr());
  py::register_exception<RankDeficiencyError>(m, "RankDeficiencyError", est_error.ptr());
  py::register_exception<WeakFirstStageError>(m, "WeakFirstStageError", est_error.ptr());
  py::register_exception<dgp::InequalityViolation>(m, "InequalityViolation", data_error.ptr());

  py::class_<ObservationTable>(m, "Table")
      .def(py::init(&make_table), py::arg("z"), py::arg("d"), py::arg("y"),
           py::arg("x") = py::none(), py::arg("covariate_names") = std::vector<std::string>{},
           py::arg("stratum") = py::none(), py::arg("cluster") = py::none(),
           py::arg("y_binary") = true)
      .def_property_readonly("n", &ObservationTable::n)
      .def_property_readonly("z", &ObservationTable::z)
      .def_property_readonly("d", &ObservationTable::d)
      .def_property_readonly("y", &ObservationTable::y)
      .def_property_readonly("x", &ObservationTable::x)
      .def_property_readonly("covariate_names", &ObservationTable::covariate_names)
      .def("covariate", &ObservationTable::covariate)
      .def("to_csv", [](const ObservationTable& t) {
        std::ostringstream s;
        write_csv(s, t);
        return s.str();
      });

  m.def("load_csv", [](const std::string& path, const std::string& config_json) {
    return load_observations_file(path, config_json.empty() ? ColumnMapping{} : parse_mapping(config_json));
  }, py::arg("path"), py::arg("config_json") = "");

  m.def("compute_weights", [](const ObservationTable& t, std::optional<double> tau) {
    const auto w = ident::compute_weights(t, tau);
    py::dict d;
    d["kappa"] = w.kappa;
    d["kappa0"] = w.kappa0;
    d["kappa1"] = w.kappa1;
    d["pi"] = w.pi;
    d["tau"] = w.tau;
    return d;
  }, py::arg("table"), py::arg("tau") = py::none());

  m.def("supercomplier_share", [](const ObservationTable& t, double level) {
    return wald_dict(ident::supercomplier_share(t, level));
  }, py::arg("table"), py::arg("level") = 0.95);
  m.def("first_stage", [](const ObservationTable& t, double level) {
    return wald_dict(ident::first_stage(t, level));
  }, py::arg("table"), py::arg("level") = 0.95);
  m.def("other_group_shares", [](const ObservationTable& t, double level) {
    const auto s = ident::other_group_shares(t, level);
    return py::make_tuple(wald_dict(s.ca), wald_dict(s.cn));
  }, py::arg("table"), py::arg("level") = 0.95);

  m.def("characteristics_wald", [](const ObservationTable& t, const VectorXd& h,
                                   const std::string& target, double level) {
    return wald_dict(ident::characteristics_wald(t, h, parse_target(target), level));
  }, py::arg("table"), py::arg("h"), py::arg("target") = "supercomplier", py::arg("level") = 0.95);
  m.def("characteristics_plugin", [](const ObservationTable& t, const VectorXd& h,
                                     const std::string& target, double level) {
    return wald_dict(ident::characteristics_plugin(t, h, parse_target(target), level));
  }, py::arg("table"), py::arg("h"), py::arg("target") = "supercomplier", py::arg("level") = 0.95);
  m.def("fink_noto_check", [](const ObservationTable& t, const VectorXd& h) {
    const auto r = ident::fink_noto_equivalence_check(t, h);
    py::dict d;
    d["assembled"] = r.assembled;
    d["tsls"] = r.tsls;
    d["rel_difference"] = r.rel_difference;
    d["equal"] = r.equal;
    return d;
  });
  m.def("characteristics_cdf", [](const ObservationTable& t, const std::string& cov,
                                  std::vector<double> grid, bool rearrange) {
    const auto c = ident::characteristics_cdf(t, cov, std::move(grid), rearrange);
    py::list raw;
    for (const auto& w : c.raw) raw.append(wald_dict(w));
    py::dict d;
    d["grid"] = c.grid;
    d["raw"] = raw;
    d["rearranged"] = c.rearranged;
    return d;
  }, py::arg("table"), py::arg("covariate"), py::arg("grid"), py::arg("rearrange") = false);
  m.def("supercomplier_quantile", [](const ObservationTable& t, const std::string& cov, double theta,
                                     const std::string& conditioning, int bins, int bootstrap,
                                     std::uint64_t seed) {
    ident::QuantileOptions o;
    if (conditioning == "x") {
      o.conditioning = ident::Conditioning::kX;
    } else if (conditioning == "yx") {
      o.conditioning = ident::Conditioning::kYX;
    } else {
      throw ConfigError("conditioning must be 'x' or 'yx'");
    }
    o.bins = bins;
    o.bootstrap_reps = bootstrap;
    o.seed = seed;
    const auto q = ident::supercomplier_quantile(t, cov, theta, o);
    py::dict d;
    d["value"] = q.value;
    d["se"] = q.se ? py::cast(*q.se) : py::none();
    py::list cells;
    for (const auto& c : q.cells)
      cells.append(py::dict(py::arg("cell") = c.label, py::arg("n") = c.count,
                            py::arg("pi_nu") = c.pi_nu, py::arg("weight") = c.weight));
    d["cells"] = cells;
    d["clipped_cells"] = q.clipped_cells;
    d["warnings"] = q.warnings;
    return d;
  }, py::arg("table"), py::arg("covariate"), py::arg("theta") = 0.5, py::arg("conditioning") = "x",
     py::arg("bins") = 20, py::arg("bootstrap") = 0, py::arg("seed") = 0);
  m.def("stratified_characteristics", [](const ObservationTable& t, const VectorXd& h, double level) {
    const auto s = ident::stratified_characteristics(t, h, level);
    py::dict d;
    d["fe_2sls"] = wald_dict(s.fe_2sls);
    d["omega_weighted"] = s.decomposition;
    d["warnings"] = s.warnings;
    return d;
  }, py::arg("table"), py::arg("h"), py::arg("level") = 0.95);
  m.def("bias_under_violation", &ident::bias_under_violation, py::arg("share_cf"),
        py::arg("share_cc"), py::arg("mean_cc"), py::arg("mean_cf"));

  m.def("inequality_statistics", [](const ObservationTable& t) {
    py::list out;
    for (const auto& s : assumptions::inequality_statistics(t))
      out.append(py::dict(py::arg("inequality") = std::string(assumptions::inequality_name(s.which)),
                          py::arg("estimate") = s.estimate, py::arg("se") = s.se));
    return out;
  });
  m.def("joint_sharp_test", [](const ObservationTable& t, double level, int draws, std::uint64_t seed) {
    return sharp_dict(assumptions::joint_sharp_test(t, sim_options(level, draws, seed)));
  }, py::arg("table"), py::arg("level") = 0.05, py::arg("draws") = 100000, py::arg("seed") = 12345);
  m.def("om_test", [](const ObservationTable& t, double level) {
    const auto r = assumptions::om_test(t, level);
    py::dict d;
    d["estimate"] = r.estimate;
    d["se"] = r.se;
    d["p_value"] = r.p_value;
    d["reject"] = r.reject;
    return d;
  }, py::arg("table"), py::arg("level") = 0.05);
  m.def("om_test_conditional", [](const ObservationTable& t, const std::vector<std::string>& cells,
                                  double level, int draws, std::uint64_t seed) {
    return sharp_dict(assumptions::om_test_conditional(t, Categorical::from_labels(cells),
                                                       sim_options(level, draws, seed)));
  }, py::arg("table"), py::arg("cells"), py::arg("level") = 0.05, py::arg("draws") = 100000,
     py::arg("seed") = 12345);

  m.def("rationalization_example", [] { return dgp::to_json(dgp::presets::rationalization_example()); });
  m.def("rationalize", [](const std::vector<std::vector<std::vector<double>>>& p, double tau) {
    return dgp::to_json(dgp::rationalize(observed_from(p), tau));
  }, py::arg("observed"), py::arg("tau") = 0.5);
  m.def("sample", [](const std::string& dgp_json, Index n, std::uint64_t seed) {
    return dgp::sample(dgp::from_json(dgp_json), n, seed);
  }, py::arg("dgp_json"), py::arg("n"), py::arg("seed"));
  m.def("true_values", [](const std::string& dgp_json) {
    const auto t = dgp::true_values(dgp::from_json(dgp_json));
    py::dict d;
    d["share_cc"] = t.share_cc;
    d["share_ca"] = t.share_ca;
    d["share_cn"] = t.share_cn;
    d["share_cf"] = t.share_cf;
    d["share_complier"] = t.share_complier;
    d["reduced_form"] = t.reduced_form;
    d["first_stage"] = t.first_stage;
    d["late"] = t.late ? py::cast(*t.late) : py::none();
    d["inequality_lhs"] = t.inequality_lhs;
    py::dict covs;
    for (const auto& c : t.covariates) {
      py::dict means;
      for (const auto& [target, v] : c.mean_by_target) means[py::str(std::string(target_name(target)))] = v;
      covs[py::str(c.name)] = means;
    }
    d["means"] = covs;
    return d;
  });
  m.def("variance_gap_example", &dgp::variance_gap_example, py::arg("mu_y"));

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"));
}
