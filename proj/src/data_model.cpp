#include "sck/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "json.hpp"
#include "sck/errors.hpp"

namespace sck {

char response_code(ResponseType type) noexcept {
  switch (type) {
    case ResponseType::kAlways: return 'a';
    case ResponseType::kNever: return 'n';
    case ResponseType::kComplier: return 'c';
    case ResponseType::kDefier: return 'f';
  }
  return '?';
}

namespace {

std::optional<ResponseType> response_from_code(char c) {
  switch (c) {
    case 'a': return ResponseType::kAlways;
    case 'n': return ResponseType::kNever;
    case 'c': return ResponseType::kComplier;
    case 'f': return ResponseType::kDefier;
    default: return std::nullopt;
  }
}

// (value at input 0, value at input 1)
std::pair<int, int> response_pair(ResponseType t) {
  switch (t) {
    case ResponseType::kAlways: return {1, 1};
    case ResponseType::kNever: return {0, 0};
    case ResponseType::kComplier: return {0, 1};
    case ResponseType::kDefier: return {1, 0};
  }
  return {0, 0};
}

}  // namespace

Group Group::parse(std::string_view code) {
  if (code.size() == 2) {
    auto t = response_from_code(code[0]);
    auto o = response_from_code(code[1]);
    if (t && o) return {*t, *o};
  }
  throw ConfigError("unknown group code '" + std::string(code) + "'");
}

std::string Group::code() const {
  return {response_code(treatment_), response_code(outcome_)};
}

std::array<Group, Group::kCount> Group::all() noexcept {
  return []<std::size_t... I>(std::index_sequence<I...>) {
    return std::array<Group, kCount>{from_index(static_cast<int>(I))...};
  }(std::make_index_sequence<kCount>{});
}

Potentials group_to_potentials(Group g) noexcept {
  auto [d0, d1] = response_pair(g.treatment());
  auto [y0, y1] = response_pair(g.outcome());
  return {d0, d1, y0, y1};
}

int treatment_under(Group g, int z) noexcept {
  auto [d0, d1] = response_pair(g.treatment());
  return z ? d1 : d0;
}

int outcome_under(Group g, int d) noexcept {
  auto [y0, y1] = response_pair(g.outcome());
  return d ? y1 : y0;
}

std::string_view target_name(Target t) noexcept {
  switch (t) {
    case Target::kPopulation: return "population";
    case Target::kComplier: return "complier";
    case Target::kSupercomplier: return "supercomplier";
    case Target::kCa: return "ca";
    case Target::kCn: return "cn";
  }
  return "?";
}

Target parse_target(std::string_view name) {
  for (Target t : kAllTargets)
    if (target_name(t) == name) return t;
  throw ConfigError("unknown target '" + std::string(name) + "'");
}

Categorical Categorical::from_labels(const std::vector<std::string>& values) {
  Categorical out;
  out.codes.reserve(values.size());
  std::unordered_map<std::string, int> seen;
  for (const auto& v : values) {
    auto [it, inserted] = seen.try_emplace(v, static_cast<int>(out.labels.size()));
    if (inserted) out.labels.push_back(v);
    out.codes.push_back(it->second);
  }
  return out;
}

namespace {

void require_binary(const VectorXd& v, const char* what) {
  for (Index i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0 && v[i] != 1.0) {
      std::ostringstream msg;
      msg << "non-binary " << what << " value " << v[i] << " at row " << (i + 1);
      throw DataError(msg.str());
    }
  }
}

}  // namespace

ObservationTable ObservationTable::create(Columns c) {
  const Index n = c.z.size();
  if (n == 0) throw DataError("empty table");
  if (c.d.size() != n || c.y.size() != n) throw DataError("z, d and y lengths differ");
  if (c.x.cols() == 0 && c.x.rows() == 0) c.x.resize(n, 0);
  if (c.x.rows() != n) throw DataError("covariate matrix row count differs from n");
  if (static_cast<std::size_t>(c.x.cols()) != c.covariate_names.size())
    throw DataError("covariate name count differs from covariate matrix columns");
  require_binary(c.z, "instrument");
  require_binary(c.d, "treatment");
  if (c.y_binary) require_binary(c.y, "outcome");
  if (!c.x.allFinite()) throw DataError("covariates contain missing or non-finite values");
  if (!c.y.allFinite()) throw DataError("outcome contains non-finite values");

  const double treated = c.z.sum();
  if (treated == 0.0 || treated == static_cast<double>(n))
    throw DataError(std::string("degenerate assignment arm: every row has z=") +
                    (treated == 0.0 ? "0" : "1"));

  auto check_cat = [n](const Categorical& cat, const char* what) {
    if (static_cast<Index>(cat.codes.size()) != n)
      throw DataError(std::string(what) + " length differs from n");
    for (int code : cat.codes)
      if (code < 0 || code >= cat.levels())
        throw DataError(std::string(what) + " code out of range");
  };
  if (c.stratum) {
    check_cat(*c.stratum, "stratum");
    std::vector<Index> count(c.stratum->levels(), 0), treated_w(c.stratum->levels(), 0);
    for (Index i = 0; i < n; ++i) {
      ++count[c.stratum->codes[i]];
      if (c.z[i] == 1.0) ++treated_w[c.stratum->codes[i]];
    }
    for (Index w = 0; w < c.stratum->levels(); ++w) {
      if (count[w] == 0 || treated_w[w] == 0 || treated_w[w] == count[w])
        throw DataError("degenerate assignment arm in stratum '" + c.stratum->labels[w] + "'");
    }
  }
  if (c.cluster) check_cat(*c.cluster, "cluster");
  for (const auto& [name, cat] : c.categoricals) check_cat(cat, name.c_str());

  for (std::size_t a = 0; a < c.covariate_names.size(); ++a)
    for (std::size_t b = a + 1; b < c.covariate_names.size(); ++b)
      if (c.covariate_names[a] == c.covariate_names[b])
        throw DataError("duplicate covariate name '" + c.covariate_names[a] + "'");

  return ObservationTable(std::make_shared<const Columns>(std::move(c)));
}

bool ObservationTable::has_covariate(std::string_view name) const noexcept {
  const auto& names = data_->covariate_names;
  return std::find(names.begin(), names.end(), name) != names.end();
}

VectorXd ObservationTable::covariate(std::string_view name) const {
  const auto& names = data_->covariate_names;
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ConfigError("unknown covariate '" + std::string(name) + "'");
  return data_->x.col(it - names.begin());
}

const Categorical& ObservationTable::categorical(std::string_view name) const {
  auto it = data_->categoricals.find(std::string(name));
  if (it != data_->categoricals.end()) return it->second;
  throw ConfigError("unknown categorical column '" + std::string(name) + "'");
}

Index ObservationTable::treated_count() const noexcept {
  Index k = 0;
  for (Index i = 0; i < n(); ++i) k += data_->z[i] == 1.0;
  return k;
}

namespace {

// Unused levels are dropped so every remaining level is populated.
Categorical take(const Categorical& cat, const std::vector<Index>& rows) {
  std::vector<std::string> values;
  values.reserve(rows.size());
  for (Index r : rows) values.push_back(cat.labels[cat.codes[r]]);
  return Categorical::from_labels(values);
}

}  // namespace

ObservationTable ObservationTable::subset(const std::vector<Index>& rows) const {
  Columns c;
  const Index m = static_cast<Index>(rows.size());
  c.z.resize(m);
  c.d.resize(m);
  c.y.resize(m);
  c.x.resize(m, data_->x.cols());
  for (Index i = 0; i < m; ++i) {
    const Index r = rows[i];
    c.z[i] = data_->z[r];
    c.d[i] = data_->d[r];
    c.y[i] = data_->y[r];
    c.x.row(i) = data_->x.row(r);
  }
  c.covariate_names = data_->covariate_names;
  c.y_binary = data_->y_binary;
  if (data_->stratum) c.stratum = take(*data_->stratum, rows);
  if (data_->cluster) c.cluster = take(*data_->cluster, rows);
  for (const auto& [name, cat] : data_->categoricals) c.categoricals[name] = take(cat, rows);
  return create(std::move(c));
}

namespace {

// Re-encodes parts' categorical columns against a merged label set.
Categorical merge_categoricals(const std::vector<const Categorical*>& parts) {
  std::vector<std::string> values;
  for (const auto* p : parts)
    for (int code : p->codes) values.push_back(p->labels[code]);
  return Categorical::from_labels(values);
}

}  // namespace

ObservationTable ObservationTable::concat(const std::vector<ObservationTable>& parts) {
  if (parts.empty()) throw DataError("nothing to concatenate");
  const auto& first = *parts.front().data_;
  Index total = 0;
  for (const auto& p : parts) {
    if (p.covariate_names() != first.covariate_names || p.y_binary() != first.y_binary ||
        p.stratum().has_value() != first.stratum.has_value() ||
        p.cluster().has_value() != first.cluster.has_value())
      throw DataError("tables to concatenate have different layouts");
    total += p.n();
  }
  Columns c;
  c.z.resize(total);
  c.d.resize(total);
  c.y.resize(total);
  c.x.resize(total, first.x.cols());
  Index at = 0;
  for (const auto& p : parts) {
    c.z.segment(at, p.n()) = p.z();
    c.d.segment(at, p.n()) = p.d();
    c.y.segment(at, p.n()) = p.y();
    c.x.middleRows(at, p.n()) = p.x();
    at += p.n();
  }
  c.covariate_names = first.covariate_names;
  c.y_binary = first.y_binary;
  auto gather = [&](auto accessor) {
    std::vector<const Categorical*> cats;
    for (const auto& p : parts) cats.push_back(&*accessor(p));
    return merge_categoricals(cats);
  };
  if (first.stratum) c.stratum = gather([](const ObservationTable& t) -> const std::optional<Categorical>& { return t.stratum(); });
  if (first.cluster) c.cluster = gather([](const ObservationTable& t) -> const std::optional<Categorical>& { return t.cluster(); });
  for (const auto& [name, cat] : first.categoricals) {
    std::vector<const Categorical*> cats;
    for (const auto& p : parts) cats.push_back(&p.categorical(name));
    c.categoricals[name] = merge_categoricals(cats);
  }
  return create(std::move(c));
}

// ---------------------------------------------------------------------------
// Config

ColumnMapping parse_mapping(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ColumnMapping m;
  try {
    const auto& cols = j.contains("columns") ? j.at("columns") : j;
    if (cols.contains("z")) m.z = cols.at("z").get<std::string>();
    if (cols.contains("d")) m.d = cols.at("d").get<std::string>();
    if (cols.contains("y")) m.y = cols.at("y").get<std::string>();
    if (cols.contains("covariates")) m.covariates = cols.at("covariates").get<std::vector<std::string>>();
    if (cols.contains("stratum") && !cols.at("stratum").is_null())
      m.stratum = cols.at("stratum").get<std::string>();
    if (cols.contains("cluster") && !cols.at("cluster").is_null())
      m.cluster = cols.at("cluster").get<std::string>();
    if (cols.contains("categoricals"))
      m.extra_categoricals = cols.at("categoricals").get<std::vector<std::string>>();
    if (j.contains("y_binary")) m.y_binary = j.at("y_binary").get<bool>();
    if (j.contains("tau_known") && !j.at("tau_known").is_null()) {
      const double tau = j.at("tau_known").get<double>();
      if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau_known must lie strictly between 0 and 1");
      m.tau_known = tau;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config field: ") + e.what());
  }
  return m;
}

ColumnMapping load_mapping(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_mapping(buf.str());
}

// ---------------------------------------------------------------------------
// CSV

namespace {

// Splits one record; supports double-quoted fields with "" escapes.
std::vector<std::string> split_record(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool is_missing(std::string_view s) {
  return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "." || s == "null";
}

std::optional<double> parse_number(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string row_list(const std::vector<Index>& rows) {
  std::ostringstream out;
  const std::size_t shown = std::min<std::size_t>(rows.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) out << (i ? ", " : "") << rows[i];
  if (rows.size() > shown) out << ", ... (" << rows.size() << " rows)";
  return out.str();
}

}  // namespace

ObservationTable load_observations(std::istream& source, const ColumnMapping& mapping) {
  std::string line;
  if (!std::getline(source, line)) throw DataError("input has no header row");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
  std::vector<std::string> header = split_record(line);
  for (auto& h : header) h = std::string(trim(h));

  auto column_index = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t iz = column_index(mapping.z);
  const std::size_t id = column_index(mapping.d);
  const std::size_t iy = column_index(mapping.y);
  std::vector<std::size_t> ix;
  for (const auto& name : mapping.covariates) ix.push_back(column_index(name));
  std::optional<std::size_t> istratum, icluster;
  if (mapping.stratum) istratum = column_index(*mapping.stratum);
  if (mapping.cluster) icluster = column_index(*mapping.cluster);
  std::vector<std::size_t> icat;
  for (const auto& name : mapping.extra_categoricals) icat.push_back(column_index(name));

  std::vector<double> z, d, y;
  std::vector<std::vector<double>> x(ix.size());
  std::vector<std::string> stratum, cluster;
  std::vector<std::vector<std::string>> cats(icat.size());
  std::vector<Index> missing_rows;
  std::vector<Index> covariate_missing(ix.size(), 0);

  Index row = 0;
  while (std::getline(source, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_record(line);
    if (fields.size() != header.size()) {
      std::ostringstream msg;
      msg << "row " << row << " has " << fields.size() << " fields, header has " << header.size();
      throw DataError(msg.str());
    }
    bool row_missing = false;
    auto binary = [&](std::size_t col, const char* what) -> double {
      const auto tok = trim(fields[col]);
      if (is_missing(tok)) {
        row_missing = true;
        return 0.0;
      }
      if (tok == "0") return 0.0;
      if (tok == "1") return 1.0;
      std::ostringstream msg;
      msg << "non-binary " << what << " value '" << tok << "' at row " << row << " (column '"
          << header[col] << "')";
      throw DataError(msg.str());
    };
    auto numeric = [&](std::size_t col) -> double {
      const auto tok = trim(fields[col]);
      if (is_missing(tok)) {
        row_missing = true;
        return std::numeric_limits<double>::quiet_NaN();
      }
      auto v = parse_number(tok);
      if (!v) {
        std::ostringstream msg;
        msg << "non-numeric value '" << tok << "' at row " << row << " (column '" << header[col]
            << "')";
        throw DataError(msg.str());
      }
      return *v;
    };
    auto label = [&](std::size_t col) -> std::string {
      const auto tok = trim(fields[col]);
      if (is_missing(tok)) row_missing = true;
      return std::string(tok);
    };

    z.push_back(binary(iz, "instrument"));
    d.push_back(binary(id, "treatment"));
    y.push_back(mapping.y_binary ? binary(iy, "outcome") : numeric(iy));
    for (std::size_t k = 0; k < ix.size(); ++k) {
      const double v = numeric(ix[k]);
      if (std::isnan(v)) ++covariate_missing[k];
      x[k].push_back(v);
    }
    if (istratum) stratum.push_back(label(*istratum));
    if (icluster) cluster.push_back(label(*icluster));
    for (std::size_t k = 0; k < icat.size(); ++k) cats[k].push_back(label(icat[k]));
    if (row_missing) missing_rows.push_back(row);
  }
  if (row == 0) throw DataError("input has no data rows");
  for (std::size_t k = 0; k < ix.size(); ++k)
    if (covariate_missing[k] == row)
      throw DataError("covariate '" + mapping.covariates[k] + "' is missing in every row");
  if (!missing_rows.empty())
    throw DataError("missing values in mapped columns at rows " + row_list(missing_rows));

  ObservationTable::Columns c;
  c.z = Eigen::Map<VectorXd>(z.data(), row);
  c.d = Eigen::Map<VectorXd>(d.data(), row);
  c.y = Eigen::Map<VectorXd>(y.data(), row);
  c.x.resize(row, static_cast<Index>(ix.size()));
  for (std::size_t k = 0; k < ix.size(); ++k)
    c.x.col(static_cast<Index>(k)) = Eigen::Map<VectorXd>(x[k].data(), row);
  c.covariate_names = mapping.covariates;
  c.y_binary = mapping.y_binary;
  if (istratum) c.stratum = Categorical::from_labels(stratum);
  if (icluster) c.cluster = Categorical::from_labels(cluster);
  for (std::size_t k = 0; k < icat.size(); ++k)
    c.categoricals[mapping.extra_categoricals[k]] = Categorical::from_labels(cats[k]);
  return ObservationTable::create(std::move(c));
}

ObservationTable load_observations_file(const std::string& path, const ColumnMapping& mapping) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open data file '" + path + "'");
  return load_observations(in, mapping);
}

void write_csv(std::ostream& out, const ObservationTable& table) {
  out << "z,d,y";
  for (const auto& name : table.covariate_names()) out << ',' << name;
  if (table.stratum()) out << ",stratum";
  if (table.cluster()) out << ",cluster";
  out << '\n';
  out << std::setprecision(17);
  for (Index i = 0; i < table.n(); ++i) {
    out << static_cast<int>(table.z()[i]) << ',' << static_cast<int>(table.d()[i]) << ',';
    if (table.y_binary())
      out << static_cast<int>(table.y()[i]);
    else
      out << table.y()[i];
    for (Index k = 0; k < table.x().cols(); ++k) out << ',' << table.x()(i, k);
    if (table.stratum()) out << ',' << table.stratum()->labels[table.stratum()->codes[i]];
    if (table.cluster()) out << ',' << table.cluster()->labels[table.cluster()->codes[i]];
    out << '\n';
  }
}

}  // namespace sck
