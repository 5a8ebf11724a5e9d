#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "tvgnn/errors.hpp"
#include "tvgnn/metrics.hpp"
#include "tvgnn/model.hpp"

using namespace tvgnn;
using namespace tvgnn::pipeline;

namespace {
double round4(double x) { return std::round(x * 1e4) / 1e4; }
}  // namespace

TEST(Mse, HandExamples) {
  const std::vector<double> p = {1, 1}, y = {0, 2};
  EXPECT_EQ(mse(p, y), 1.0);
  EXPECT_EQ(mse(y, y), 0.0);
  EXPECT_THROW(mse(std::vector<double>{}, std::vector<double>{}), DataError);
  EXPECT_THROW(mse(p, std::vector<double>{1}), DataError);
}

TEST(Mse, MatchesDirectSum) {
  Rng rng(1);
  std::vector<double> p(50), y(50);
  long double want = 0;
  for (std::size_t i = 0; i < 50; ++i) {
    p[i] = rng.normal();
    y[i] = rng.normal();
    want += static_cast<long double>(p[i] - y[i]) * (p[i] - y[i]);
  }
  EXPECT_NEAR(mse(p, y), static_cast<double>(want / 50), 1e-14);
}

TEST(RSquared, ReferenceTableCells) {
  EXPECT_EQ(round4(r_squared(0.5980, 1.1336)), 0.4725);
  EXPECT_EQ(round4(r_squared(0.2818, 0.4026)), 0.3000);
  EXPECT_EQ(round4(r_squared(0.2017, 0.2167)), 0.0692);
  EXPECT_EQ(r_squared(0.3, 0.3), 0.0);
  EXPECT_GT(r_squared(0.29, 0.3), 0.0);
  EXPECT_LT(r_squared(0.31, 0.3), 0.0);
  EXPECT_THROW(r_squared(0.1, 0.0), DataError);
}

TEST(MeanMse, ReferenceTableCells) {
  EXPECT_EQ(round4(mean_mse(0.5980, 0.2818, 0.2017)), 0.3605);
  EXPECT_EQ(round4(mean_mse(1.1336, 0.4026, 0.2167)), 0.5843);
  EXPECT_EQ(mean_mse(0.25, 0.25, 0.25), 0.25);
  MetricsReport r;
  r.horizons[3].mse = 0.5980;
  r.horizons[7].mse = 0.2818;
  EXPECT_THROW(mean_mse(r), DataError);
  r.horizons[15].mse = 0.2017;
  EXPECT_EQ(round4(mean_mse(r)), 0.3605);
}

TEST(Report, JsonAndTableOrder) {
  MetricsReport r;
  r.samples = 12;
  r.horizons[3] = {0.5980, 1.1336, r_squared(0.5980, 1.1336)};
  r.horizons[7] = {0.2818, 0.4026, r_squared(0.2818, 0.4026)};
  r.horizons[15] = {0.2017, 0.2167, r_squared(0.2017, 0.2167)};
  const auto j = r.to_json();
  EXPECT_EQ(j["schema_version"], kReportSchemaVersion);
  EXPECT_EQ(j["samples"], 12);
  const auto row = r.table_row("TVGNN");
  const auto pos = [&](const std::string& s) { return row.find(s); };
  EXPECT_LT(pos("0.3605"), pos("0.5980"));
  EXPECT_LT(pos("0.5980"), pos("0.2818"));
  EXPECT_LT(pos("0.2017"), pos("0.4725"));
  EXPECT_LT(pos("0.3000"), pos("0.0692"));
}

TEST(Evaluate, VpastAgainstItselfHasZeroR2) {
  const auto cfg = fixture::tiny_config();
  const auto q = fixture::random_quarter(12, 3, cfg, 5);
  const std::vector<const QuarterData*> qs = {&q};
  const auto samples = whole_quarters(qs);
  const auto rep = vpast_report(samples);
  EXPECT_EQ(rep.samples, q.num_labeled());
  for (const auto& [tau, h] : rep.horizons) {
    EXPECT_EQ(h.r2, 0.0) << tau;
    EXPECT_EQ(h.mse, h.vpast_mse);
  }
}

TEST(Evaluate, SampleCountIsLabeledNodes) {
  auto cfg = fixture::tiny_config();
  auto q = fixture::random_quarter(12, 3, cfg, 6);
  q.labeled[2] = 0;
  q.labeled[5] = 0;
  const std::vector<const QuarterData*> qs = {&q};
  const auto bundle = ModelBundle::create(cfg);
  const auto rep = evaluate(bundle, whole_quarters(qs));
  EXPECT_EQ(rep.samples, 10u);
  for (const auto& [tau, h] : rep.horizons) EXPECT_NEAR(h.r2, 1.0 - h.mse / h.vpast_mse, 1e-15);
}

TEST(Evaluate, MaskedEvaluationNeverReadsOutsideTheMask) {
  const auto cfg = fixture::tiny_config();
  auto q = fixture::random_quarter(14, 4, cfg, 7);
  const auto bundle = ModelBundle::create(cfg);
  Sample s{&q, std::vector<char>(14, 0)};
  for (std::size_t i : {1u, 4u, 6u, 11u}) s.mask[i] = 1;
  const auto before = evaluate(bundle, std::span<const Sample>(&s, 1));
  EXPECT_EQ(before.samples, 4u);
  // Poison every label and baseline outside the mask.
  for (std::size_t i = 0; i < 14; ++i)
    if (!s.mask[i])
      for (std::size_t k = 0; k < 3; ++k) q.labels(i, k) = q.v_past(i, k) = std::numeric_limits<double>::quiet_NaN();
  const auto after = evaluate(bundle, std::span<const Sample>(&s, 1));
  for (int tau : {3, 7, 15}) {
    EXPECT_EQ(after.horizons.at(tau).mse, before.horizons.at(tau).mse);
    EXPECT_EQ(after.horizons.at(tau).vpast_mse, before.horizons.at(tau).vpast_mse);
  }
}
