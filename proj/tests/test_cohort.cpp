#include "strokerisk/cohort.hpp"
#include "strokerisk/error.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace strokerisk;

namespace {

FeatureSchema small_schema() {
  return FeatureSchema({{"Age", FeatureKind::Numerical, "years", ValueRange{0, 120}, 0},
                        {"TG", FeatureKind::Numerical, "mmol/L", ValueRange{0, 20}, 0},
                        {"Sex", FeatureKind::Categorical, "", {}, 2}});
}

FeatureSchema bp_schema() {
  return FeatureSchema({{"Systolic blood pressure", FeatureKind::Numerical, "mmHg", ValueRange{50, 250}, 0},
                        {"Diastolic blood pressure", FeatureKind::Numerical, "mmHg", ValueRange{30, 200}, 0},
                        {"HCY", FeatureKind::Numerical, "", {}, 0}});
}

Cohort bp_cohort(const std::vector<std::vector<double>>& rows) {
  CellMatrix cells(static_cast<Eigen::Index>(rows.size()), 3);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < 3; ++j) cells(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
  return Cohort(bp_schema(), std::move(cells));
}

}  // namespace

TEST_CASE("survey schema") {
  const auto schema = FeatureSchema::stroke_survey();
  CHECK(schema.size() == 34);
  const auto names = schema.names();
  CHECK(std::set<std::string>(names.begin(), names.end()).size() == names.size());
  CHECK(schema[schema.require("TG")].kind == FeatureKind::Numerical);
  CHECK(schema[schema.require("Hypertension")].kind == FeatureKind::Categorical);
  CHECK(schema[schema.require("Hypertension")].category_count == 2);
  CHECK_FALSE(schema.index_of("Overweight").has_value());
  CHECK_THROWS_AS(schema.require("nope"), Error);
  for (const auto& f : schema.features()) {
    if (f.valid_range) CHECK(f.valid_range->min < f.valid_range->max);
  }
}

TEST_CASE("schema rejects duplicate names and empty ranges") {
  CHECK_THROWS_AS(FeatureSchema({{"a", FeatureKind::Numerical, "", {}, 0}, {"a", FeatureKind::Numerical, "", {}, 0}}),
                  Error);
  CHECK_THROWS_AS(FeatureSchema({{"a", FeatureKind::Numerical, "", ValueRange{3, 3}, 0}}), Error);
}

TEST_CASE("cohort rejects non-code categorical cells") {
  CellMatrix cells(1, 3);
  cells << 40, 1.2, 0.5;
  CHECK_THROWS_AS(Cohort(small_schema(), cells), Error);
  cells << 40, 1.2, -1;
  CHECK_NOTHROW(Cohort(small_schema(), cells));
}

TEST_CASE("ingest: empty cell becomes the sentinel") {
  const auto r = ingest_csv_text("Age,TG,Sex\n50,1.5,0\n61,,1\n47,2.0,1\n", small_schema());
  REQUIRE(r.cohort.row_count() == 3);
  CHECK(r.cohort.at(1, 1) == kMissing);
  CHECK(r.cohort.at(0, 1) == 1.5);
  CHECK(r.empty_cells == 1);
  CHECK(r.unparseable_cells == 0);
}

TEST_CASE("ingest: header order does not matter") {
  const auto r = ingest_csv_text("Sex,TG,Age\n1,2.5,33\n", small_schema());
  CHECK(r.cohort.at(0, 0) == 33);
  CHECK(r.cohort.at(0, 1) == 2.5);
  CHECK(r.cohort.at(0, 2) == 1);
}

TEST_CASE("ingest: unparseable numeric cell is counted") {
  const auto r = ingest_csv_text("Age,TG,Sex\nabc,1.0,0\n52,1.1,1\n", small_schema());
  CHECK(r.cohort.at(0, 0) == kMissing);
  CHECK(r.unparseable_cells == 1);
  CHECK(r.empty_cells == 0);
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("Age") != std::string::npos);
}

TEST_CASE("ingest: header errors") {
  try {
    ingest_csv_text("Age,Sex\n1,0\n", small_schema());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Schema);
    CHECK(std::string(e.what()).find("column absent") != std::string::npos);
  }
  CHECK_THROWS_AS(ingest_csv_text("Age,TG,Sex,Extra\n1,1,0,3\n", small_schema()), Error);
  CHECK_THROWS_AS(ingest_csv_text("Age,TG,Sex,Age\n1,1,0,1\n", small_schema()), Error);
  CHECK_THROWS_AS(ingest_csv_text("", small_schema()), Error);
  CHECK_THROWS_AS(ingest_csv_text("Age,TG,Sex\n1,1\n", small_schema()), Error);
  CHECK_THROWS_AS(ingest_csv_text("Age,TG,Sex\n1e999,1,0\n", small_schema()), Error);
}

TEST_CASE("ingest: label and outcome columns") {
  const auto r = ingest_csv_text("Age,TG,Sex,risk_label,stroke\n50,1,0,High,1\n40,1,1,Low,0\n", small_schema());
  REQUIRE(r.cohort.has_labels());
  CHECK(r.cohort.labels() == std::vector<int>{2, 0});
  CHECK(r.cohort.outcome() == std::vector<int>{1, 0});
}

TEST_CASE("csv round trip") {
  CellMatrix cells(3, 3);
  cells << 50.25, 1.0 / 3.0, 0, 61, kMissing, 1, 0.1, 7e-5, kMissing;
  const Cohort c(small_schema(), cells, {0, 1, 2}, {0, 0, 1});
  const auto back = ingest_csv_text(to_csv(c), small_schema()).cohort;
  CHECK(back == c);
  const auto numeric_labels = ingest_csv_text(to_csv(c, false), small_schema()).cohort;
  CHECK(numeric_labels == c);
}

TEST_CASE("cleanse: column over the missing threshold is dropped") {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({130, 80, i < 7 ? kMissing : 10.0});
  const auto [out, report] = cleanse(bp_cohort(rows));
  CHECK(out.feature_count() == 2);
  CHECK_FALSE(out.schema().index_of("HCY").has_value());
  REQUIRE(report.dropped_columns.size() == 1);
  CHECK(report.dropped_columns[0].first == "HCY");
  CHECK(report.dropped_columns[0].second == doctest::Approx(0.7));
  CHECK(report.rows_in == 10);
  CHECK(report.rows_out == 10);
}

TEST_CASE("cleanse: exactly sixty percent missing is kept") {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({130, 80, i < 6 ? kMissing : 10.0});
  const auto [out, report] = cleanse(bp_cohort(rows));
  CHECK(out.feature_count() == 3);
  CHECK(report.dropped_columns.empty());
  CHECK(report.imputed_cells == 6);
}

TEST_CASE("cleanse: inverted blood pressure is swapped") {
  const auto [out, report] = cleanse(bp_cohort({{87, 140, 10}, {120, 80, 10}}));
  CHECK(out.at(0, 0) == 140);
  CHECK(out.at(0, 1) == 87);
  CHECK(out.at(1, 0) == 120);
  CHECK(report.corrected_bp_rows == 1);
}

TEST_CASE("cleanse: equal readings lose the diastolic value") {
  const auto [out, report] = cleanse(bp_cohort({{110, 110, 10}}));
  CHECK(out.at(0, 0) == 110);
  CHECK(out.at(0, 1) == kMissing);
  CHECK(report.corrected_bp_rows == 1);
}

TEST_CASE("cleanse: clean cohort is unchanged") {
  const auto c = bp_cohort({{120, 80, 9}, {135, 85, 11}});
  const auto [out, report] = cleanse(c);
  CHECK(out == c);
  CHECK(report.dropped_columns.empty());
  CHECK(report.imputed_cells == 0);
  CHECK(report.corrected_bp_rows == 0);
}

TEST_CASE("cleanse: correction is skipped when a pressure column is absent") {
  CellMatrix cells(1, 3);
  cells << 1, 1, 0;
  const Cohort c(small_schema(), cells);
  const auto [out, report] = cleanse(c);
  CHECK(out == c);
  CHECK(report.corrected_bp_rows == 0);

  // Systolic dropped for missingness: the remaining diastolic column is left alone.
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({i < 8 ? kMissing : 120.0, 150, 10});
  const auto [dropped, report2] = cleanse(bp_cohort(rows));
  CHECK(dropped.feature_count() == 2);
  CHECK(report2.corrected_bp_rows == 0);
  CHECK(cleanse(dropped).first == dropped);
}

TEST_CASE("cleanse properties on random cohorts") {
  Rng rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  std::uniform_int_distribution<int> bp(60, 180);
  for (int trial = 0; trial < 50; ++trial) {
    const double miss_hcy = u(rng);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 40; ++i) {
      rows.push_back({u(rng) < 0.1 ? kMissing : double(bp(rng)), u(rng) < 0.1 ? kMissing : double(bp(rng)),
                      u(rng) < miss_hcy ? kMissing : 10.0});
    }
    const auto input = bp_cohort(rows);
    const auto [once, report] = cleanse(input);
    const auto [twice, report2] = cleanse(once);
    CHECK(twice == once);
    CHECK(report2.corrected_bp_rows == 0);
    CHECK(once.row_count() == input.row_count());
    for (std::size_t j = 0; j < once.feature_count(); ++j) CHECK(missing_fraction(once, j) <= 0.60);
    for (std::size_t i = 0; i < once.row_count(); ++i) {
      const double s = once.at(i, 0), d = once.at(i, 1);
      if (!is_missing(s) && !is_missing(d)) CHECK(d < s);
    }
  }
}

TEST_CASE("split: published cohort size gives the published support") {
  // Class sizes five times the Table 4 supports: 9995 + 6565 + 6729 = 23289.
  std::vector<int> labels;
  for (int c = 0; c < 3; ++c) {
    const int n = std::array{9995, 6565, 6729}[static_cast<std::size_t>(c)];
    labels.insert(labels.end(), static_cast<std::size_t>(n), c);
  }
  CellMatrix cells(static_cast<Eigen::Index>(labels.size()), 1);
  for (Eigen::Index i = 0; i < cells.rows(); ++i) cells(i, 0) = static_cast<double>(i);
  const Cohort c(test::numeric_schema(1), cells, labels);
  const auto split = split_stratified(c, 0.2, 42);
  CHECK(split.test.row_count() >= 4655);
  CHECK(split.test.row_count() <= 4659);
  CHECK(split.train.row_count() + split.test.row_count() == 23289);
  for (int cls = 0; cls < 3; ++cls) {
    const auto in_test = std::count(split.test.labels().begin(), split.test.labels().end(), cls);
    const auto in_all = std::count(labels.begin(), labels.end(), cls);
    CHECK(std::abs(static_cast<double>(in_test) - 0.2 * static_cast<double>(in_all)) <= 1.0);
  }
  // Rows keep their original order on each side.
  for (std::size_t i = 1; i < split.test.row_count(); ++i) CHECK(split.test.at(i - 1, 0) < split.test.at(i, 0));
}

TEST_CASE("split: four rows, half to test") {
  const auto c = test::make_cohort({{0}, {1}, {2}, {3}}, {0, 0, 1, 1});
  const auto split = split_stratified(c, 0.5, 3);
  REQUIRE(split.test.row_count() == 2);
  CHECK(std::count(split.test.labels().begin(), split.test.labels().end(), 0) == 1);
  CHECK(std::count(split.test.labels().begin(), split.test.labels().end(), 1) == 1);
}

TEST_CASE("split: determinism") {
  Rng rng(5);
  const auto c = test::random_cohort(rng, 300, 2, 3, 1000);
  const auto a = split_stratified(c, 0.3, 9);
  const auto b = split_stratified(c, 0.3, 9);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  const auto other = split_stratified(c, 0.3, 10);
  CHECK_FALSE(other.test == a.test);
}

TEST_CASE("split: errors") {
  const auto c = test::make_cohort({{0}, {1}}, {0, 1});
  CHECK_THROWS_AS(split_stratified(c, 0.0, 1), Error);
  CHECK_THROWS_AS(split_stratified(c, 1.0, 1), Error);
  CHECK_THROWS_AS(split_stratified(test::make_cohort({{0}}), 0.5, 1), Error);
  CHECK_THROWS_AS(split_stratified(c, 0.5, 1), Error);
}

TEST_CASE("fingerprint tracks content") {
  const auto a = test::make_cohort({{0}, {1}}, {0, 1});
  const auto b = test::make_cohort({{0}, {2}}, {0, 1});
  CHECK(fingerprint(a) == fingerprint(test::make_cohort({{0}, {1}}, {0, 1})));
  CHECK(fingerprint(a) != fingerprint(b));
}
