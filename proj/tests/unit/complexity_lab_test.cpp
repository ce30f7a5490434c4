#include <gtest/gtest.h>

#include <sstream>

#include "nvc/complexity_lab.hpp"

namespace nvc {
namespace {

BenchConfig cfg(int n, int c, int h, int w, int k = 1) {
  BenchConfig b;
  b.n = n;
  b.c = c;
  b.h = h;
  b.w = w;
  b.kernel = k;
  return b;
}

TEST(AnalyticMetrics, Definitions) {
  const ComplexityTriple m = analytic_metrics(cfg(3, 8, 5, 7, 3));
  EXPECT_EQ(m.p_comp, 3u * 9 * 64 * 35);
  EXPECT_EQ(m.p_size, 8u * 35);
  EXPECT_EQ(m.p_num, 3u);
}

TEST(AnalyticMetrics, HalvingChannels) {
  const ComplexityTriple a = analytic_metrics(cfg(4, 64, 32, 32));
  const ComplexityTriple b = analytic_metrics(cfg(4, 32, 32, 32));
  EXPECT_EQ(a.p_comp, 4 * b.p_comp);
  EXPECT_EQ(a.p_size, 2 * b.p_size);
  EXPECT_EQ(a.p_num, b.p_num);
}

TEST(AnalyticMetrics, TradeChannelsForArea) {
  const ComplexityTriple a = analytic_metrics(cfg(4, 64, 32, 32));
  const ComplexityTriple half_c = analytic_metrics(cfg(4, 32, 32, 64));
  EXPECT_EQ(half_c.p_size, a.p_size);
  EXPECT_EQ(2 * half_c.p_comp, a.p_comp);
  const ComplexityTriple wide = analytic_metrics(cfg(4, 128, 16, 16));
  EXPECT_EQ(wide.p_comp, a.p_comp);
  EXPECT_EQ(2 * wide.p_size, a.p_size);
}

TEST(AnalyticMetrics, OverflowDetected) {
  EXPECT_THROW(analytic_metrics(cfg(1 << 30, 1 << 20, 1 << 20, 1 << 20)), std::invalid_argument);
}

TEST(Factor, Parse) {
  const Factor q = Factor::parse("1/4");
  EXPECT_EQ(q.num, 1);
  EXPECT_EQ(q.den, 4);
  const Factor r = Factor::parse("6/4");
  EXPECT_EQ(r.num, 3);
  EXPECT_EQ(r.den, 2);
  EXPECT_EQ(Factor::parse("2").to_string(), "2");
  EXPECT_EQ(q.to_string(), "1/4");
  EXPECT_THROW(Factor::parse("0.5"), std::invalid_argument);
  EXPECT_THROW(Factor::parse("-1/2"), std::invalid_argument);
  EXPECT_THROW(Factor::parse("1/0"), std::invalid_argument);
  EXPECT_THROW(Factor::parse("x"), std::invalid_argument);
}

void expect_only_scaled(const BenchConfig& base, const BenchConfig& got, Quantity q, Factor f) {
  const ComplexityTriple a = analytic_metrics(base);
  const ComplexityTriple b = analytic_metrics(got);
  const auto scaled = [&](std::uint64_t v) { return v * static_cast<std::uint64_t>(f.num) / static_cast<std::uint64_t>(f.den); };
  EXPECT_EQ(b.p_comp, q == Quantity::comp ? scaled(a.p_comp) : a.p_comp) << got.label;
  EXPECT_EQ(b.p_size, q == Quantity::size ? scaled(a.p_size) : a.p_size) << got.label;
  EXPECT_EQ(b.p_num, q == Quantity::num ? scaled(a.p_num) : a.p_num) << got.label;
}

TEST(Planner, IsoControlHoldsTheOtherQuantities) {
  const BenchConfig base = cfg(4, 64, 64, 64);
  const std::vector<Factor> factors{{1, 4}, {1, 2}, {2, 1}, {4, 1}};
  for (Quantity q : {Quantity::comp, Quantity::size, Quantity::num}) {
    const auto plans = plan_isocontrol(base, q, factors);
    ASSERT_EQ(plans.size(), factors.size());
    for (std::size_t i = 0; i < plans.size(); ++i) expect_only_scaled(base, plans[i], q, factors[i]);
  }
}

TEST(Planner, ExactSolutions) {
  const BenchConfig base = cfg(4, 64, 64, 64);
  const Factor quarter{1, 4};
  const auto comp = plan_isocontrol(base, Quantity::comp, std::span(&quarter, 1));
  EXPECT_EQ(comp[0].c, 16);
  EXPECT_EQ(comp[0].h * comp[0].w, 4 * 64 * 64);
  EXPECT_EQ(comp[0].h, 128);
  EXPECT_EQ(comp[0].label, "comp_1/4");
  const Factor half{1, 2};
  const auto size = plan_isocontrol(base, Quantity::size, std::span(&half, 1));
  EXPECT_EQ(size[0].c, 128);
  EXPECT_EQ(size[0].h * size[0].w, 32 * 32);
  const auto num = plan_isocontrol(base, Quantity::num, std::span(&half, 1));
  EXPECT_EQ(num[0].n, 2);
  EXPECT_EQ(num[0].c, 128);
  EXPECT_EQ(num[0].h * num[0].w, 64 * 32);
}

TEST(Planner, InfeasibleFactorsRejected) {
  const BenchConfig base = cfg(4, 6, 5, 5);
  const Factor quarter{1, 4};
  EXPECT_THROW(plan_isocontrol(base, Quantity::comp, std::span(&quarter, 1)), PlanningError);
  const Factor third{1, 3};
  EXPECT_THROW(plan_isocontrol(cfg(4, 64, 64, 64), Quantity::num, std::span(&third, 1)), PlanningError);
}

TEST(Stats, MedianAndIqr) {
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(median({4, 1, 2, 3}), 2.5);
  EXPECT_DOUBLE_EQ(interquartile_range({1, 2, 3, 4, 5}), 2.0);
  EXPECT_DOUBLE_EQ(interquartile_range({7}), 0.0);
  EXPECT_THROW(median({}), std::invalid_argument);
}

TEST(BenchConfigValidate, Minimums) {
  BenchConfig b = cfg(1, 4, 4, 4);
  EXPECT_NO_THROW(b.validate());
  b.warmup = 2;
  EXPECT_THROW(b.validate(), std::invalid_argument);
  b = cfg(1, 4, 4, 4, 2);
  EXPECT_THROW(b.validate(), std::invalid_argument);
  b = cfg(1, 4, 4, 4);
  b.repeats = 19;
  EXPECT_THROW(b.validate(), std::invalid_argument);
}

TEST(RunBench, ReportAndPlotFormats) {
  const auto suite = default_suite(cfg(2, 8, 8, 8));
  ASSERT_EQ(suite.size(), 5u);
  EXPECT_EQ(suite[0].label, "base");
  EXPECT_EQ(suite[1].label, "halve_c");
  const auto results = run_bench(suite, 2);
  ASSERT_EQ(results.size(), suite.size());
  for (const auto& r : results) {
    EXPECT_EQ(r.samples_ms.size(), 20u);
    EXPECT_GT(r.median_ms, 0.0);
    EXPECT_GE(r.iqr_ms, 0.0);
    EXPECT_EQ(r.metrics, analytic_metrics(r.config));
  }
  std::ostringstream report;
  write_report(report, results, 2);
  std::istringstream lines(report.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "label,N,C,H,W,k,P_comp,P_size,P_num,median_ms,iqr_ms,threads");
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 11) << line;
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "2");
  }
  EXPECT_EQ(rows, 5);
  std::ostringstream plot;
  write_plot_data(plot, results);
  const std::string text = plot.str();
  EXPECT_EQ(text.rfind("# label", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 6);
}

}  // namespace
}  // namespace nvc
