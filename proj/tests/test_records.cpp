#include "tndipw/csv.hpp"
#include "tndipw/errors.hpp"
#include "tndipw/records.hpp"

#include <doctest.h>

#include <sstream>

using namespace tndipw;

namespace {

IndividualRecord rec(int c, int x, int y1, int w, int t, int h = 0) {
  IndividualRecord r;
  r.c = static_cast<std::uint8_t>(c);
  r.x = static_cast<std::uint8_t>(x);
  r.y1 = static_cast<std::uint8_t>(y1);
  r.w = static_cast<std::uint8_t>(w);
  r.t = static_cast<std::uint8_t>(t);
  r.h = static_cast<std::uint8_t>(h);
  return r;
}

StudySample small_sample() {
  std::vector<ObservedRecord> rs;
  rs.emplace_back(rec(0, 1, 1, 1, 1), 0);
  rs.emplace_back(rec(1, 0, 0, 1, 1), 1);
  rs.emplace_back(rec(1, 1, 0, 0, 1), 2);
  rs.emplace_back(rec(0, 0, 1, 0, 0), 3);
  rs.emplace_back(rec(1, 1, 0, 0, 0), 4);
  return make_sample(std::move(rs), DesignTag::all_tested_plus_controls, 0.01);
}

}  // namespace

TEST_CASE("variable names round-trip") {
  for (std::size_t i = 0; i < kVariableCount; ++i) {
    const auto v = static_cast<Variable>(i);
    CHECK(parse_variable(variable_name(v)) == v);
  }
  CHECK_THROWS_AS(parse_variable("z"), UnknownVariableError);
}

TEST_CASE("masked outcome is a detectable error") {
  const ObservedRecord untested(rec(0, 1, 1, 0, 0), 7);
  CHECK_FALSE(untested.y1_observed());
  CHECK_THROWS_AS(untested.value(Variable::y1), MaskedOutcomeError);
  CHECK(untested.value(Variable::x) == 1);
  CHECK(untested.source_index() == 7);
  const ObservedRecord tested(rec(0, 1, 1, 0, 1), 8);
  CHECK(tested.value(Variable::y1) == 1);
}

TEST_CASE("formula parsing and column labels") {
  const auto f = Formula::parse("y1 ~ x + c + w + w:x");
  CHECK(f.outcome == Variable::y1);
  CHECK(f.column_labels() == std::vector<std::string>{"(Intercept)", "x", "c", "w", "w:x"});
  CHECK(f.str() == "y1 ~ 1 + x + c + w + w:x");
  CHECK(f.has_term(Term{Variable::w, Variable::x}));
  const auto no_int = Formula::parse("t ~ 0 + x");
  CHECK_FALSE(no_int.include_intercept);
  CHECK(no_int.column_labels() == std::vector<std::string>{"x"});
  CHECK_FALSE(Formula::parse("t ~ x - 1").include_intercept);
  CHECK_THROWS_AS(Formula::parse("y1 x"), ConfigError);
  CHECK_THROWS_AS(Formula::parse("y1 ~ x + x"), ConfigError);
  CHECK_THROWS_AS(Formula::parse("y1 ~ x + y1"), ConfigError);
  CHECK_THROWS_AS(Formula::parse("y1 ~ x:c:w"), ConfigError);
  CHECK_THROWS_AS(Formula::parse("y1 ~ q"), UnknownVariableError);
}

TEST_CASE("design matrix matches a hand-enumerated layout") {
  const StudySample s = subset(small_sample(), tested_filter());
  const auto frame = build_design(s, Formula::parse("y1 ~ x + c + w:x"));
  // Rows: (c,x,w) = (0,1,1), (1,0,1), (1,1,0).
  Eigen::MatrixXd expected(3, 4);
  expected << 1, 1, 0, 1,  //
      1, 0, 1, 0,          //
      1, 1, 1, 0;
  CHECK(frame.design.values() == expected);
  CHECK(frame.response == std::vector<double>{1, 0, 0});
  CHECK(frame.design.column_index("w:x") == 3);
}

TEST_CASE("building an outcome model on untested records is refused") {
  CHECK_THROWS_AS(build_design(small_sample(), Formula::parse("y1 ~ x")), MaskedOutcomeError);
  // Regressors alone never read the outcome.
  CHECK(build_regressors(small_sample(), Formula::parse("y1 ~ x")).rows() == 5);
}

TEST_CASE("subsets recount strata and update the design tag") {
  const StudySample s = small_sample();
  CHECK(s.n_tested == 3);
  CHECK(s.n_controls == 2);
  const StudySample tested = subset(s, tested_filter());
  CHECK(tested.n_controls == 0);
  CHECK(tested.design == DesignTag::tested_only);
  const StudySample tnd = subset(s, tested_symptomatic_filter());
  CHECK(tnd.design == DesignTag::proper_tnd);
  CHECK(tnd.size() == 2);
  const StudySample cases = subset(s, testpos_or_control_filter());
  CHECK(cases.n_tested == 1);
  CHECK(cases.n_controls == 2);
  CHECK(cases.design == DesignTag::proper_tnd_plus_controls);
  CHECK(subset(s, untested_filter()).n_tested == 0);
  CHECK(subset(s, both(tested_filter(), tested_symptomatic_filter())).size() == 2);
  CHECK_FALSE(tnd.annotations.empty());
}

TEST_CASE("design tags round-trip") {
  for (const auto t : {DesignTag::all_tested_plus_controls, DesignTag::proper_tnd, DesignTag::proper_tnd_plus_controls,
                       DesignTag::tested_only}) {
    CHECK(parse_design_tag(design_tag_name(t)) == t);
  }
  CHECK_THROWS_AS(parse_design_tag("nope"), ConfigError);
}

TEST_CASE("sample CSV writes masked outcomes as empty fields and reads back") {
  const StudySample s = small_sample();
  std::ostringstream out;
  csv::write_sample(out, s);
  const std::string text = out.str();
  CHECK(text.rfind("c,x,u,y1,y_other,w,h,t\n", 0) == 0);
  CHECK(text.find("0,0,0,,0,0,0,0\n") != std::string::npos);  // record 3: untested, y1 masked
  std::istringstream in(text);
  const StudySample back = csv::read_sample(in, 0.01);
  REQUIRE(back.size() == s.size());
  CHECK(back.n_tested == 3);
  CHECK(back.n_controls == 2);
  CHECK(back.design == DesignTag::all_tested_plus_controls);
  CHECK_THROWS_AS(back.records[3].value(Variable::y1), MaskedOutcomeError);
  CHECK(back.records[0].value(Variable::y1) == 1);
}

TEST_CASE("population CSV round-trips and rejects malformed input") {
  const std::vector<IndividualRecord> rs{rec(0, 1, 1, 1, 1, 1), rec(1, 0, 0, 0, 0)};
  std::ostringstream out;
  csv::write_records(out, rs);
  std::istringstream in(out.str());
  CHECK(csv::read_records(in) == rs);

  std::istringstream bad_header("a,b\n");
  CHECK_THROWS_AS(csv::read_records(bad_header), ConfigError);
  std::istringstream bad_value("c,x,u,y1,y_other,w,h,t\n0,2,0,0,0,0,0,0\n");
  CHECK_THROWS_AS(csv::read_records(bad_value), ConfigError);
  std::istringstream masked("c,x,u,y1,y_other,w,h,t\n0,1,0,,0,0,0,0\n");
  CHECK_THROWS_AS(csv::read_records(masked), ConfigError);
  std::istringstream tested_without_y1("c,x,u,y1,y_other,w,h,t\n0,1,0,,0,0,0,1\n");
  CHECK_THROWS_AS(csv::read_sample(tested_without_y1, 0.1), ConfigError);
}
