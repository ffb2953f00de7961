#include <cmath>
#include <numeric>

#include "doctest.h"
#include "helpers.hpp"
#include "maasim/analysis.hpp"
#include "maasim/fixtures.hpp"

using namespace maasim;

namespace {

CorrelationMatrix corr(std::vector<std::vector<double>> rows) {
  CorrelationMatrix c;
  c.values = Matrix(0, rows.size());
  for (const auto& r : rows) c.values.append_row(r);
  for (std::size_t i = 0; i < rows.size(); ++i) c.names.push_back("v" + std::to_string(i));
  return c;
}

CorrelationMatrix equicorrelated(std::size_t p, double r) {
  std::vector<std::vector<double>> rows(p, std::vector<double>(p, r));
  for (std::size_t i = 0; i < p; ++i) rows[i][i] = 1.0;
  return corr(rows);
}

}  // namespace

TEST_CASE("kmo is undefined without correlation") {
  CHECK_THROWS_AS(kmo(equicorrelated(3, 0.0)), UndefinedError);
}

TEST_CASE("kmo of two variables is one half") {
  for (double r : {0.1, 0.5, -0.7}) CHECK(kmo(equicorrelated(2, r)).value == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("kmo of equicorrelated variables matches the closed form") {
  // partial correlation q = r / (1 + (p - 2) r); KMO = r^2 / (r^2 + q^2)
  for (std::size_t p : {3, 5}) {
    for (double r : {0.3, 0.5}) {
      const double q = r / (1.0 + double(p - 2) * r);
      const auto res = kmo(equicorrelated(p, r));
      CHECK(res.value == doctest::Approx(r * r / (r * r + q * q)).epsilon(1e-10));
      CHECK_FALSE(res.ridge_applied);
    }
  }
  CHECK(kmo(equicorrelated(3, 0.5)).value == doctest::Approx(0.6923076923).epsilon(1e-9));
}

TEST_CASE("kmo of a general matrix and its invariance under reordering") {
  // value computed independently with numpy
  const auto c = corr({{1, .4, .2}, {.4, 1, .3}, {.2, .3, 1}});
  CHECK(kmo(c).value == doctest::Approx(0.5909702656721604).epsilon(1e-12));
  const auto swapped = corr({{1, .3, .2}, {.3, 1, .4}, {.2, .4, 1}});
  CHECK(kmo(swapped).value == doctest::Approx(kmo(c).value).epsilon(1e-12));
}

TEST_CASE("kmo of a singular matrix uses the ridge") {
  const auto res = kmo(equicorrelated(3, 1.0));
  CHECK(res.ridge_applied);
  CHECK(std::isfinite(res.value));
}

TEST_CASE("communalities hand values") {
  for (double h : communalities(equicorrelated(4, 0.3), 4)) CHECK(h == doctest::Approx(1.0).epsilon(1e-12));
  const auto id = communalities(equicorrelated(3, 0.0), 1);
  CHECK(id[0] == doctest::Approx(1.0));
  CHECK(id[1] == doctest::Approx(0.0));
  CHECK(id[2] == doctest::Approx(0.0));
  const auto two = communalities(equicorrelated(2, 0.8), 1);
  CHECK(two[0] == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(two[1] == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("communalities of a general matrix") {
  // numpy eigh, descending eigenvalues
  const auto c = corr({{1, .4, .2}, {.4, 1, .3}, {.2, .3, 1}});
  const std::vector<double> one{0.5489384823924219, 0.6473087047067985, 0.4112201711522928};
  const std::vector<double> two{0.7898548281848853, 0.6667953905053334, 0.9621380409362573};
  const auto h1 = communalities(c, 1), h2 = communalities(c, 2), h3 = communalities(c, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(h1[i] == doctest::Approx(one[i]).epsilon(1e-10));
    CHECK(h2[i] == doctest::Approx(two[i]).epsilon(1e-10));
    CHECK(h1[i] <= h2[i]);
    CHECK(h2[i] <= h3[i] + 1e-12);
  }
}

TEST_CASE("communalities reject bad input") {
  CHECK_THROWS_AS(communalities(corr({{1, .2}, {.3, 1}}), 1), FormatError);
  CHECK_THROWS_AS(kmo(corr({{1, .2}, {.3, 1}})), FormatError);
  CHECK_THROWS_AS(communalities(equicorrelated(3, .2), 0), ShapeError);
  CHECK_THROWS_AS(communalities(equicorrelated(3, .2), 4), ShapeError);
}

TEST_CASE("group weights follow mean absolute contributions") {
  // Feature 0 moves the prediction by 0.3, feature 1 by 0.1, feature 2 never.
  const auto f = test::forest_of({test::stump(0, 0.5, 3.0, 2.7, 3.3), test::stump(1, 0.5, 3.0, 2.9, 3.1)}, 3);
  const auto ds = test::make_dataset({{0, 0, 5}, {1, 1, 5}, {0, 1, 5}, {1, 0, 5}}, {1, 2, 3, 4});
  const std::map<std::size_t, Group> groups{{0, Group::housing}, {1, Group::housing}, {2, Group::leisure}};
  const auto gw = group_weights(f, ds, groups);
  REQUIRE(gw.groups.at(Group::housing).size() == 2);
  CHECK(gw.groups.at(Group::housing)[0].weight == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(gw.groups.at(Group::housing)[1].weight == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(gw.groups.at(Group::leisure)[0].weight == 1.0);
  CHECK(gw.uniform_fallback == std::vector<Group>{Group::leisure});

  CHECK_THROWS_AS(group_weights(f, ds, {{0, Group::housing}}), ConfigError);
}

TEST_CASE("group weights json round-trip") {
  const auto f = test::forest_of({test::stump(0, 0.5, 3.0, 2.7, 3.3), test::stump(1, 0.5, 3.0, 2.9, 3.1)}, 2);
  const auto ds = test::make_dataset({{0, 0}, {1, 1}}, {1, 2}, {"housing_a", "housing_b"});
  const auto gw = group_weights(f, ds);
  const std::vector<std::string> names{"housing_a", "housing_b"};
  const auto back = GroupWeights::from_json(gw.to_json(), names);
  CHECK(back.to_json() == gw.to_json());
}

TEST_CASE("group scores are baseline relative") {
  GroupWeights gw;
  gw.groups[Group::housing] = {{0, "a", 0.75}, {1, "b", 0.25}};
  gw.groups[Group::leisure] = {{2, "c", 1.0}};
  const std::vector<double> base{2.0, 4.0, 10.0};
  auto s = group_scores(base, gw, base);
  CHECK(s.at(Group::housing) == 1.0);
  CHECK(s.at(Group::leisure) == 1.0);
  s = group_scores(std::vector<double>{3.0, 4.0, 5.0}, gw, base);
  CHECK(s.at(Group::housing) == doctest::Approx(0.75 * 1.5 + 0.25));
  CHECK(s.at(Group::leisure) == doctest::Approx(0.5));
  CHECK_THROWS_AS(group_scores(base, gw, std::vector<double>{2.0, 0.0, 1.0}), BaselineError);
  CHECK_THROWS_AS(group_scores(base, gw, std::vector<double>{2.0}), ShapeError);
}

TEST_CASE("plateau game weights cover the five display groups") {
  const auto g = fixtures::plateau_game();
  const auto gw = group_weights(g.forest, g.dataset);
  CHECK(gw.groups.size() == 5);
  for (const auto& [grp, entries] : gw.groups) {
    CHECK(grp != Group::none);
    double sum = 0.0;
    for (const auto& e : entries) sum += e.weight;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}
