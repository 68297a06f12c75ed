#include <gtest/gtest.h>

#include <cmath>

#include "bfm/data_io.hpp"
#include "bfm/model_eval.hpp"
#include "bfm/models.hpp"

namespace {

struct Printed {
  const char* name;
  std::vector<double> p;
  double nll;
};

// Printed AFST estimates and the nll they give on the bundled data.
const std::vector<Printed> kPrinted{
    {"BFM", {0.0054, 4.9472, 0.4701, 0.0419}, 53.69261},
    {"FACG", {0.581, 0.202, 90.46, 709.8}, 54.9598},
    {"FAEPG", {0.795, 0.248, 88.92, 697.6}, 55.3390},
    {"EAddW", {0.241, 1.540, 3.755, 0.052, 74.79}, 56.2425},
    {"GExtEW", {1300, 1.071, 8.3e-4, 3.0e-3, 26.97}, 57.1040},
    {"APD", {0.108, 0.109, 1.016, 17.76}, 1236.07},
};

bfm::Dataset afst() { return bfm::parse_dataset(bfm::bundled_data_path("afst.csv")); }

}  // namespace

TEST(Models, CumulativeHazardShape) {
  for (const auto& e : kPrinted) {
    const auto m = bfm::model_by_name(e.name);
    ASSERT_EQ(m.param_count(), e.p.size());
    EXPECT_NEAR(m.chf(1e-12, e.p), 0.0, 1e-6) << e.name;
    double prev = 0.0;
    for (double x = 0.05; x < 3.0; x *= 1.5) {
      const double h = m.chf(x, e.p);
      EXPECT_GE(h, prev) << e.name;
      prev = h;
    }
  }
}

TEST(Models, HazardIsChfSlope) {
  for (const auto& e : kPrinted) {
    const auto m = bfm::model_by_name(e.name);
    for (double x : {0.05, 0.5, 1.5}) {
      const double h = 1e-5 * x;
      const double fd = (m.chf(x + h, e.p) - m.chf(x - h, e.p)) / (2 * h);
      EXPECT_NEAR(fd / m.frf(x, e.p), 1.0, 1e-5) << e.name << " x=" << x;
    }
  }
}

TEST(Models, FrozenNllAtPrintedEstimates) {
  const auto d = afst();
  for (const auto& e : kPrinted)
    EXPECT_NEAR(bfm::model_nll(bfm::model_by_name(e.name), e.p, d.observations), e.nll, 1e-3) << e.name;
}

TEST(Models, BfmModelMatchesDirectNll) {
  const auto d = afst();
  const auto& p = kPrinted[0].p;
  EXPECT_NEAR(bfm::model_nll(bfm::bfm_model(), p, d.observations), bfm::bfm_nll(bfm::BfmParams::from_span(p), d), 1e-10);
}

TEST(Models, FacgAfstRisks) {
  const auto r = bfm::competitor_risks(bfm::facg_model(), kPrinted[1].p);
  EXPECT_NEAR(r.f1, 0.995, 1e-3);
  EXPECT_NEAR(r.f2, 0.005, 1e-3);
  EXPECT_NEAR(r.f1 + r.f2, 1.0, 1e-8);
}

TEST(Models, ApdIsSymmetricInItsComponents) {
  const auto m = bfm::apd_model();
  const std::vector<double> p{0.108, 0.109, 1.016, 17.76}, q{0.109, 0.108, 17.76, 1.016};
  for (double x : {0.1, 0.7, 2.0}) EXPECT_NEAR(m.chf(x, p), m.chf(x, q), 1e-12 * std::max(1.0, m.chf(x, p)));
}

TEST(Models, LookupByName) {
  EXPECT_EQ(bfm::model_by_name("facg").name, "FACG");
  EXPECT_EQ(bfm::model_by_name("bfm").param_count(), 4u);
  EXPECT_THROW(bfm::model_by_name("weibull"), bfm::ConfigError);
  EXPECT_THROW(bfm::competitor("BFM"), bfm::ConfigError);
}

TEST(Models, SampleTimesFollowModel) {
  const auto m = bfm::facg_model();
  const auto& p = kPrinted[1].p;
  bfm::Rng rng(4);
  std::vector<double> t(20000);
  for (auto& v : t) v = bfm::model_sample_time(m, p, rng);
  std::sort(t.begin(), t.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double F = m.cdf(t[i], p);
    ks = std::max({ks, (i + 1.0) / t.size() - F, F - double(i) / t.size()});
  }
  EXPECT_LT(ks, 0.015);
}
