#include <doctest.h>

#include <set>
#include <sstream>

#include "helpers.hpp"
#include "sck/errors.hpp"

using namespace sck;

namespace {

ObservationTable parse(const std::string& csv, ColumnMapping m = {}) {
  std::istringstream in(csv);
  return load_observations(in, m);
}

std::string error_of(const std::string& csv, ColumnMapping m = {}) {
  try {
    parse(csv, m);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("group potentials follow the stratification table") {
  CHECK(group_to_potentials(groups::cc) == Potentials{0, 1, 0, 1});
  CHECK(group_to_potentials(groups::an) == Potentials{1, 1, 0, 0});
  CHECK(group_to_potentials(groups::ff) == Potentials{1, 0, 1, 0});

  std::set<std::tuple<int, int, int, int>> seen;
  int admissible = 0;
  for (Group g : Group::all()) {
    const auto p = group_to_potentials(g);
    seen.insert({p.d0, p.d1, p.y0, p.y1});
    const bool monotone = p.d1 >= p.d0 && p.y1 >= p.y0;
    CHECK(monotone == g.admissible());
    admissible += g.admissible();
    CHECK(Group::parse(g.code()) == g);
    CHECK(Group::from_index(g.index()) == g);
  }
  CHECK(seen.size() == 16);
  CHECK(admissible == 9);
  CHECK_THROWS_AS(Group::parse("xx"), ConfigError);
}

TEST_CASE("realized treatment and outcome") {
  CHECK(treatment_under(groups::ca, 0) == 0);
  CHECK(treatment_under(groups::ca, 1) == 1);
  CHECK(outcome_under(groups::ca, 0) == 1);
  CHECK(outcome_under(groups::nc, 0) == 0);
  CHECK(outcome_under(groups::fc, 1) == 1);
}

TEST_CASE("load a well-formed csv") {
  const std::string csv =
      "z,d,y,x1\n1,1,1,2.5\n1,0,0,3\n0,0,0,1\n0,1,1,4\n1,1,0,5\n0,0,1,6\n1,1,1,7\n0,0,0,8\n";
  ColumnMapping m;
  m.covariates = {"x1"};
  const auto t = parse(csv, m);
  CHECK(t.n() == 8);
  CHECK(t.z().sum() == 4);
  CHECK(t.covariate("x1")[0] == 2.5);
  // Deterministic: same bytes, same table.
  const auto t2 = parse(csv, m);
  CHECK(t2.x() == t.x());
  CHECK(t2.y() == t.y());
}

TEST_CASE("binary columns accept only literal 0 and 1") {
  const auto msg = error_of("z,d,y\n2,1,1\n0,0,0\n");
  CHECK(msg.find("non-binary instrument") != std::string::npos);
  CHECK(error_of("z,d,y\n1,true,1\n0,0,0\n").find("non-binary treatment") != std::string::npos);
  CHECK(error_of("z,d,y\n1,1,1.0\n0,0,0\n").find("non-binary outcome") != std::string::npos);
}

TEST_CASE("degenerate assignment arm is rejected") {
  CHECK(error_of("z,d,y\n1,1,1\n1,0,0\n").find("degenerate assignment arm") != std::string::npos);
}

TEST_CASE("missing values reject rows with row numbers") {
  ColumnMapping m;
  m.covariates = {"x1"};
  const auto msg = error_of("z,d,y,x1\n1,1,1,NA\n0,0,0,1\n1,0,1,\n", m);
  CHECK(msg.find("missing") != std::string::npos);
  CHECK(msg.find('1') != std::string::npos);
  CHECK(msg.find('3') != std::string::npos);
  const auto all_missing = error_of("z,d,y,x1\n1,1,1,NA\n0,0,0,\n", m);
  CHECK(all_missing.find("x1") != std::string::npos);
}

TEST_CASE("missing mapped column") {
  ColumnMapping m;
  m.covariates = {"income"};
  CHECK_THROWS_AS(parse("z,d,y\n1,1,1\n0,0,0\n", m), Error);
}

TEST_CASE("non-binary outcome behind the flag") {
  ColumnMapping m;
  m.y_binary = false;
  const auto t = parse("z,d,y\n1,1,2.5\n0,0,0\n", m);
  CHECK_FALSE(t.y_binary());
  CHECK(t.y()[0] == 2.5);
}

TEST_CASE("strata need both arms") {
  ColumnMapping m;
  m.stratum = "s";
  CHECK_NOTHROW(parse("z,d,y,s\n1,1,1,a\n0,0,0,a\n1,0,0,b\n0,1,1,b\n", m));
  CHECK(error_of("z,d,y,s\n1,1,1,a\n0,0,0,a\n1,0,0,b\n1,1,1,b\n", m).find("'b'") != std::string::npos);
}

TEST_CASE("config parsing") {
  const auto m = parse_mapping(R"({"columns":{"z":"assign","d":"took","y":"out",
      "covariates":["age"],"stratum":"site","cluster":"hh"},"y_binary":false,"tau_known":0.4})");
  CHECK(m.z == "assign");
  CHECK(m.covariates == std::vector<std::string>{"age"});
  CHECK(m.stratum == std::optional<std::string>("site"));
  CHECK(m.cluster == std::optional<std::string>("hh"));
  CHECK_FALSE(m.y_binary);
  CHECK(*m.tau_known == doctest::Approx(0.4));
  CHECK_THROWS_AS(parse_mapping(R"({"tau_known": 1.5})"), ConfigError);
  CHECK_THROWS_AS(parse_mapping("{not json"), ConfigError);
}

TEST_CASE("subset, concat and csv round trip") {
  const auto t = testing::random_table(3, 200);
  std::vector<Index> rows;
  for (Index i = 0; i < 100; ++i) rows.push_back(i);
  const auto a = t.subset(rows);
  rows.clear();
  for (Index i = 100; i < 200; ++i) rows.push_back(i);
  const auto b = t.subset(rows);
  const auto c = ObservationTable::concat({a, b});
  CHECK(c.y() == t.y());
  CHECK(c.x() == t.x());

  std::ostringstream out;
  write_csv(out, t);
  ColumnMapping m;
  m.covariates = {"age", "group"};
  std::istringstream in(out.str());
  const auto back = load_observations(in, m);
  CHECK(back.z() == t.z());
  CHECK((back.x() - t.x()).cwiseAbs().maxCoeff() < 1e-12);
}
