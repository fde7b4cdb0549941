#include "sck/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sck/errors.hpp"

namespace sck::report {

std::string fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void Warnings::add(const std::string& message) {
  if (std::find(items_.begin(), items_.end(), message) == items_.end()) items_.push_back(message);
}

void Warnings::add_all(const std::vector<std::string>& messages) {
  for (const auto& m : messages) add(m);
}

namespace {

// JSON has no infinities; encode them as null.
Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

Json to_json(const ident::WaldEstimate& w) {
  return Json{{"label", w.label},
              {"value", number(w.value)},
              {"se", number(w.se)},
              {"ci", {number(w.ci.lower), number(w.ci.upper)}},
              {"level", w.level},
              {"numerator", number(w.numerator)},
              {"denominator", number(w.denominator)}};
}

Json to_json(const assumptions::SharpTestResult& r) {
  Json theta = Json::array();
  for (std::size_t j = 0; j < r.names.size(); ++j)
    theta.push_back({{"name", r.names[j]}, {"estimate", number(r.theta[j])}, {"se", number(r.se[j])}});
  Json vcov = Json::array();
  for (Index a = 0; a < r.vcov.rows(); ++a) {
    Json row = Json::array();
    for (Index b = 0; b < r.vcov.cols(); ++b) row.push_back(number(r.vcov(a, b)));
    vcov.push_back(std::move(row));
  }
  return Json{{"theta", std::move(theta)},
              {"vcov", std::move(vcov)},
              {"theta_min", number(r.theta_min)},
              {"critical_value", number(r.critical_value)},
              {"critical_value_mcse", number(r.critical_value_mcse)},
              {"p_value", r.p_value},
              {"reject", r.reject},
              {"level", r.level},
              {"draws", r.draws},
              {"seed", r.seed}};
}

Json to_json(const assumptions::OmTestResult& r) {
  return Json{{"estimate", number(r.estimate)},
              {"se", number(r.se)},
              {"p_value", r.p_value},
              {"reject", r.reject},
              {"level", r.level}};
}

Json to_json(const regression::ArConfidenceSet& ar) {
  Json intervals = Json::array();
  for (const auto& iv : ar.intervals) intervals.push_back({number(iv.lower), number(iv.upper)});
  return Json{{"level", ar.level},
              {"intervals", std::move(intervals)},
              {"grid", {number(ar.grid_lower), number(ar.grid_upper)}},
              {"unbounded_below", ar.unbounded_below},
              {"unbounded_above", ar.unbounded_above}};
}

Json to_json(const ident::QuantileEstimate& q) {
  Json cells = Json::array();
  for (const auto& c : q.cells)
    cells.push_back({{"cell", c.label}, {"n", c.count}, {"pi_nu", number(c.pi_nu)}, {"weight", number(c.weight)}});
  return Json{{"theta", q.theta},
              {"value", number(q.value)},
              {"se", q.se ? number(*q.se) : Json(nullptr)},
              {"clipped_cells", q.clipped_cells},
              {"cells", std::move(cells)}};
}

Json to_json(const ident::StratifiedEstimate& s) {
  Json strata = Json::array();
  for (const auto& c : s.strata)
    strata.push_back({{"stratum", c.label},
                      {"n", c.n},
                      {"share", c.share},
                      {"tau", c.tau},
                      {"reduced_form", number(c.reduced_form)},
                      {"omega", number(c.omega)},
                      {"mean", c.mean ? number(*c.mean) : Json(nullptr)}});
  return Json{{"fe_2sls", to_json(s.fe_2sls)},
              {"omega_weighted", number(s.decomposition)},
              {"abs_difference", number(s.abs_difference)},
              {"strata", std::move(strata)}};
}

Json metadata(std::string_view command, const std::string& input_hash, const Json& config,
              std::optional<std::uint64_t> seed, Index n) {
  return Json{{"command", command},
              {"version", kVersion},
              {"input_hash", input_hash.empty() ? Json(nullptr) : Json("fnv1a64:" + input_hash)},
              {"config", config},
              {"seed", seed ? Json(*seed) : Json(nullptr)},
              {"n", n}};
}

std::string format_number(double v, int precision) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
  return s;
}

std::string render_shares(const ident::GroupSummary& s) {
  std::ostringstream out;
  out << "Group shares\n";
  out << pad_right("", 16) << pad_left("estimate", 12) << pad_left("se", 12) << '\n';
  const std::pair<const char*, const ident::WaldEstimate*> rows[] = {
      {"supercomplier", &s.share_cc}, {"ca", &s.share_ca}, {"cn", &s.share_cn},
      {"complier", &s.share_complier}};
  for (const auto& [name, w] : rows)
    out << pad_right(name, 16) << pad_left(format_number(w->value), 12)
        << pad_left(format_number(w->se), 12) << '\n';
  return out.str();
}

std::string render_characteristics(const ident::GroupSummary& s) {
  if (s.characteristics.empty()) return {};
  std::ostringstream out;
  constexpr std::size_t kName = 16, kCol = 15;
  out << "Characteristics: means (standard errors)\n" << pad_right("covariate", kName);
  for (Target t : kAllTargets) out << pad_left(std::string(target_name(t)), kCol);
  out << '\n';
  for (const auto& row : s.characteristics) {
    std::string values = pad_right(row.covariate, kName), ses = pad_right("", kName);
    for (Target t : kAllTargets) {
      const auto it = row.means.find(t);
      values += pad_left(it == row.means.end() ? "-" : format_number(it->second.value), kCol);
      ses += pad_left(it == row.means.end() ? "" : "(" + format_number(it->second.se) + ")", kCol);
    }
    out << values << '\n' << ses << '\n';
  }
  out << "\nDifferences: estimate (standard error)\n";
  for (const auto& row : s.characteristics) {
    for (const auto& d : row.differences) {
      const std::string label = std::string(target_name(d.a)) + " - " + std::string(target_name(d.b));
      out << pad_right(row.covariate, kName) << pad_right(label, 32)
          << pad_left(format_number(d.value), 12) << pad_left("(" + format_number(d.se) + ")", 12)
          << '\n';
    }
  }
  return out.str();
}

std::string render_test(const std::string& title, const assumptions::SharpTestResult& r) {
  std::ostringstream out;
  out << title << '\n';
  for (std::size_t j = 0; j < r.names.size(); ++j)
    out << "  " << pad_right(r.names[j], 28) << pad_left(format_number(r.theta[j]), 12)
        << pad_left("(" + format_number(r.se[j]) + ")", 12) << '\n';
  out << "  " << pad_right("min statistic", 28) << pad_left(format_number(r.theta_min), 12) << '\n';
  out << "  " << pad_right("critical value", 28) << pad_left(format_number(r.critical_value), 12)
      << "  (MC se " << format_number(r.critical_value_mcse, 5) << ", " << r.draws
      << " draws, seed " << r.seed << ")\n";
  out << "  " << pad_right("p-value", 28) << pad_left(format_number(r.p_value), 12) << '\n';
  out << "  " << pad_right("decision", 28)
      << pad_left(r.reject ? "reject" : "do not reject", 12) << " at level "
      << format_number(r.level, 3) << '\n';
  return out.str();
}

std::string render_warnings(const Warnings& w) {
  if (w.items().empty()) return "Warnings: none\n";
  std::ostringstream out;
  out << "Warnings\n";
  for (const auto& m : w.items()) out << "  - " << m << '\n';
  return out.str();
}

void write_report(const Report& report, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  const auto base = std::filesystem::path(dir);
  std::ofstream txt(base / "report.txt", std::ios::binary);
  std::ofstream js(base / "report.json", std::ios::binary);
  if (!txt || !js) throw ConfigError("cannot write report files in '" + dir + "'");
  txt << report.text;
  js << report.doc.dump(2) << '\n';
}

}  // namespace sck::report
