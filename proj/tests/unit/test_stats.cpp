#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "octlayers/comparison.hpp"
#include "octlayers/control_model.hpp"
#include "octlayers/distributions.hpp"
#include "octlayers/error.hpp"
#include "octlayers/hypothesis.hpp"
#include "octlayers/measure.hpp"
#include "octlayers/regions.hpp"
#include "octlayers/stats_io.hpp"

using namespace octlayers;

namespace {

// Two-sided Student t p-value by Simpson quadrature of the density.
double t_p_quadrature(double t, double df) {
  const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * std::numbers::pi);
  auto f = [&](double x) { return c * std::pow(1 + x * x / df, -(df + 1) / 2); };
  const double a = 0.0, b = std::abs(t);
  const int n = 20000;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
  return 1.0 - 2.0 * s * h / 3.0;
}

double brute_u(const std::vector<double>& a, const std::vector<double>& b) {
  double u = 0;
  for (double x : a)
    for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
  return u;
}

std::vector<AttributeMap> cohort_maps(const CohortSpec& spec, std::uint64_t seed, int layer = 5) {
  std::vector<AttributeMap> out;
  for (const auto& d : generate_synthetic_cohort(spec, seed))
    out.push_back(compute_attribute_map(d, layer, AttributeKind::thickness()));
  return out;
}

}  // namespace

TEST(Distributions, IncompleteBetaReference) {
  EXPECT_NEAR(regularized_incomplete_beta(2, 3, 0.5), 0.6875, 1e-14);
  EXPECT_NEAR(regularized_incomplete_beta(0.5, 7.5, 0.3), 0.977153386842316, 1e-12);
  EXPECT_EQ(regularized_incomplete_beta(2, 3, 0.0), 0.0);
  EXPECT_EQ(regularized_incomplete_beta(2, 3, 1.0), 1.0);
}

TEST(Distributions, StudentTMatchesQuadrature) {
  EXPECT_NEAR(student_t_two_sided_p(2.0, 10), 0.07338803477074039, 1e-12);
  for (double df : {1.5, 3.3, 7.0, 25.0})
    for (double t : {0.1, 0.7, 1.9, 3.5, -2.2})
      EXPECT_NEAR(student_t_two_sided_p(t, df), t_p_quadrature(t, df), 1e-8) << t << " " << df;
  EXPECT_EQ(student_t_two_sided_p(0.0, 4), 1.0);
}

TEST(Distributions, Normal) {
  EXPECT_NEAR(normal_cdf(1.959963984540054), 0.975, 1e-12);
  EXPECT_NEAR(normal_two_sided_p(1.959963984540054), 0.05, 1e-12);
}

TEST(Hypothesis, WelchReference) {
  const std::vector<double> a{1.2, 3.4, 2.2, 5.1, 4.4}, b{2.0, 7.5, 6.1, 8.8, 5.9, 9.3};
  const auto r = welch_t_test(a, b);
  EXPECT_NEAR(r.statistic, -2.588499245021163, 1e-12);
  EXPECT_NEAR(r.p, 0.03117259958265582, 1e-10);
  // Welch-Satterthwaite oracle.
  const double va = sample_variance(a) / 5, vb = sample_variance(b) / 6;
  ASSERT_TRUE(r.df.has_value());
  EXPECT_NEAR(*r.df, (va + vb) * (va + vb) / (va * va / 4 + vb * vb / 5), 1e-12);
  EXPECT_NEAR(r.p, t_p_quadrature(r.statistic, *r.df), 1e-8);
}

TEST(Hypothesis, WelchDegenerate) {
  const std::vector<double> a{2, 2, 2}, b{2, 2, 2, 2}, c{3, 3, 3};
  EXPECT_EQ(welch_t_test(a, b).p, 1.0);
  const auto r = welch_t_test(a, c);
  EXPECT_EQ(r.p, 0.0);
  EXPECT_EQ(r.statistic, -kInfiniteSentinel);
}

TEST(Hypothesis, MannWhitneyReference) {
  const std::vector<double> a{1.2, 3.4, 2.2, 5.1, 4.4}, b{2.0, 7.5, 6.1, 8.8, 5.9, 9.3};
  auto r = mann_whitney_u_test(a, b);
  EXPECT_EQ(r.statistic, 4.0);
  EXPECT_NEAR(r.p, 0.05523425371806383, 1e-12);
  const std::vector<double> c{1, 2, 2, 3, 3, 3}, d{2, 3, 4, 4, 5};
  r = mann_whitney_u_test(c, d);
  EXPECT_EQ(r.statistic, 5.5);
  EXPECT_NEAR(r.p, 0.08871369199677616, 1e-12);
}

TEST(Hypothesis, MannWhitneyMatchesPairCount) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> val(0, 5), size(3, 9);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> a(size(rng)), b(size(rng));
    for (auto& x : a) x = val(rng);
    for (auto& x : b) x = val(rng);
    EXPECT_EQ(mann_whitney_u_test(a, b).statistic, brute_u(a, b));
  }
}

TEST(Hypothesis, SampleSizeAndFiniteness) {
  const std::vector<double> two{1, 2}, three{1, 2, 3}, bad{1, NAN, 3};
  EXPECT_THROW(two_sample_test(two, three, TestKind::WelchT), Error);
  EXPECT_THROW(two_sample_test(bad, three, TestKind::MannWhitneyU), Error);
  EXPECT_NO_THROW(two_sample_test(three, three, TestKind::MannWhitneyU));
}

TEST(Hypothesis, CohensD) {
  const std::vector<double> a{1, 2, 3, 4}, b{3, 4, 5, 6, 7};
  const double sp = std::sqrt((3 * sample_variance(a) + 4 * sample_variance(b)) / 7);
  EXPECT_NEAR(effect_size(a, b), (2.5 - 5.0) / sp, 1e-12);
  EXPECT_EQ(effect_size(std::vector<double>{1, 1}, std::vector<double>{1, 1}), 0.0);
}

TEST(Hypothesis, Parsing) {
  EXPECT_EQ(parse_test_kind("mwu"), TestKind::MannWhitneyU);
  EXPECT_EQ(parse_test_kind("welch"), TestKind::WelchT);
  EXPECT_EQ(parse_correction("fdr"), Correction::BenjaminiHochberg);
  EXPECT_THROW(parse_correction("holm"), Error);
}

TEST(Correction, KnownExample) {
  const std::vector<double> p{0.01, 0.04, 0.03, 0.005, 0.2};
  const auto bh = adjust_pvalues(p, Correction::BenjaminiHochberg, 0.05);
  EXPECT_EQ(bh.significant, (std::vector<std::uint8_t>{1, 1, 1, 1, 0}));
  EXPECT_DOUBLE_EQ(bh.threshold, 0.04);
  const auto bf = adjust_pvalues(p, Correction::Bonferroni, 0.05);
  EXPECT_EQ(bf.significant, (std::vector<std::uint8_t>{1, 0, 0, 1, 0}));  // p <= alpha / m
  EXPECT_DOUBLE_EQ(bf.threshold, 0.01);
  const auto none = adjust_pvalues(p, Correction::None, 0.05);
  EXPECT_EQ(none.significant, (std::vector<std::uint8_t>{1, 1, 1, 1, 0}));
  const auto empty = adjust_pvalues({}, Correction::BenjaminiHochberg, 0.05);
  EXPECT_TRUE(empty.significant.empty());
}

TEST(Correction, BhStepUpOracle) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 0.2);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> p(40);
    for (auto& x : p) x = u(rng);
    auto sorted = p;
    std::sort(sorted.begin(), sorted.end());
    std::size_t k = 0;
    for (std::size_t i = 0; i < sorted.size(); ++i)
      if (sorted[i] <= 0.05 * (i + 1) / sorted.size()) k = i + 1;
    const auto adj = adjust_pvalues(p, Correction::BenjaminiHochberg, 0.05);
    std::size_t n_sig = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      n_sig += adj.significant[i];
      if (k > 0) {
        EXPECT_EQ(adj.significant[i] != 0, p[i] <= sorted[k - 1]);
      }
    }
    EXPECT_EQ(n_sig, k);
  }
}

TEST(ControlModel, Percentiles) {
  std::vector<double> v{10, 1, 9, 2, 8, 3, 7, 4, 6, 5};
  EXPECT_DOUBLE_EQ(empirical_percentile(v, 2.5), 1.225);
  EXPECT_DOUBLE_EQ(empirical_percentile(v, 97.5), 9.775);
  EXPECT_DOUBLE_EQ(empirical_percentile(std::vector<double>{3, 1, 2}, 50), 2.0);
  EXPECT_DOUBLE_EQ(empirical_percentile(std::vector<double>{4}, 10), 4.0);
}

TEST(ControlModel, BuildAndDeviation) {
  const auto controls = cohort_maps(octtest::small_spec(6), 8);
  const auto model = build_control_model(controls);
  EXPECT_EQ(model.n_valid(3, 3), 6);
  double mean = 0;
  for (const auto& m : controls) mean += m.values(5, 7);
  EXPECT_NEAR(model.mean(5, 7), mean / 6, 1e-12);
  EXPECT_LE(model.lower(5, 7), model.mean(5, 7));
  EXPECT_GE(model.upper(5, 7), model.mean(5, 7));

  AttributeMap same = controls.front();
  same.values = model.mean;
  const auto dev = deviation_map(same, model);
  for (double z : dev.z.values()) EXPECT_EQ(z, 0.0);
  for (auto f : dev.flag.values()) EXPECT_EQ(f, static_cast<std::uint8_t>(IntervalFlag::Inside));

  AttributeMap low = same;
  low.values(2, 2) = model.lower(2, 2) - 1.0;
  low.values(3, 2) = invalid_value<double>();
  const auto dev2 = deviation_map(low, model);
  EXPECT_EQ(dev2.flag(2, 2), static_cast<std::uint8_t>(IntervalFlag::Below));
  EXPECT_EQ(dev2.flag(3, 2), static_cast<std::uint8_t>(IntervalFlag::Invalid));
  EXPECT_LT(dev2.z(2, 2), 0.0);
  EXPECT_THROW(build_control_model(std::span(controls).first(2)), Error);
}

TEST(ControlModel, IntervalCoverage) {
  // 200 controls, 95% reference interval: a fresh healthy map lands inside
  // at roughly 95% of the points.
  auto spec = octtest::small_spec(201, 4.0, 0.0);
  spec.geometry = octtest::geometry(32, 16, 200.0, 400.0);
  auto maps = cohort_maps(spec, 13);
  const AttributeMap probe = maps.back();
  maps.pop_back();
  const auto dev = deviation_map(probe, build_control_model(maps));
  double inside = 0;
  for (auto f : dev.flag.values()) inside += f == static_cast<std::uint8_t>(IntervalFlag::Inside);
  const double frac = inside / dev.flag.size();
  EXPECT_NEAR(frac, 0.95, 3 * std::sqrt(0.95 * 0.05 / dev.flag.size()) + 0.01);
}

TEST(Comparison, SwapNegatesDifference) {
  auto ps = octtest::small_spec(5);
  ps.defects.push_back({1.5, 0.0, 0.6, 5, -25.0});
  const auto p = cohort_maps(ps, 1);
  const auto c = cohort_maps(octtest::small_spec(6), 2);
  const auto a = compare_pointwise(p, c, {});
  const auto b = compare_pointwise(c, p, {});
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].diff, -b.records[i].diff);
    EXPECT_NEAR(a.records[i].p, b.records[i].p, 1e-12);
    EXPECT_EQ(a.records[i].significant, b.records[i].significant);
  }
  EXPECT_GT(a.significant_count, 0u);
}

TEST(Comparison, PointRecordMatchesDirectTest) {
  const auto p = cohort_maps(octtest::small_spec(4), 3);
  const auto c = cohort_maps(octtest::small_spec(5), 4);
  const auto cmp = compare_pointwise(p, c, {TestKind::MannWhitneyU, 0.05, Correction::None, 3});
  std::vector<double> a, b;
  for (const auto& m : p) a.push_back(m.values(40, 20));
  for (const auto& m : c) b.push_back(m.values(40, 20));
  const auto& rec = cmp.at(40, 20);
  const auto t = mann_whitney_u_test(a, b);
  EXPECT_TRUE(rec.tested);
  EXPECT_EQ(rec.statistic, t.statistic);
  EXPECT_EQ(rec.p, t.p);
  EXPECT_NEAR(rec.d, effect_size(a, b), 1e-12);
  EXPECT_NEAR(rec.diff, mean_of(a) - mean_of(b), 1e-12);
  EXPECT_EQ(rec.n_p, 4u);
}

TEST(Comparison, TooFewValidValuesLeavesPointUntested) {
  auto p = cohort_maps(octtest::small_spec(4), 3);
  const auto c = cohort_maps(octtest::small_spec(4), 4);
  p[0].values(1, 1) = invalid_value<double>();
  p[1].values(1, 1) = invalid_value<double>();
  const auto cmp = compare_pointwise(p, c, {});
  EXPECT_FALSE(cmp.at(1, 1).tested);
  EXPECT_FALSE(cmp.at(1, 1).significant);
  EXPECT_EQ(cmp.tested_count, cmp.records.size() - 1);
  EXPECT_THROW(compare_pointwise(std::span(p).first(2), c, {}), Error);
}

TEST(Comparison, GridwiseUsesReliableCellMeans) {
  const auto p = cohort_maps(octtest::small_spec(4), 3);
  const auto c = cohort_maps(octtest::small_spec(5), 4);
  const auto grid = fit_common_grid(c, 2.0, 2);
  const auto cmp = compare_gridwise(grid, p, c, {TestKind::WelchT, 0.05, Correction::None, 3});
  EXPECT_EQ(cmp.cell_ids, grid.leaf_ids());
  std::vector<double> a, b;
  for (const auto& m : p) a.push_back(summarize_cell(m, grid.cell("inner-nasal")).mean);
  for (const auto& m : c) b.push_back(summarize_cell(m, grid.cell("inner-nasal")).mean);
  if (grid.cell("inner-nasal").is_leaf()) {
    const auto& rec = cmp.at("inner-nasal");
    EXPECT_NEAR(rec.p, welch_t_test(a, b).p, 1e-12);
    EXPECT_NEAR(rec.diff, mean_of(a) - mean_of(b), 1e-12);
  }
  EXPECT_THROW(cmp.at("nope"), Error);
}

TEST(Regions, EightConnectivity) {
  Mask m(6, 5, 0);
  m(0, 0) = m(1, 1) = m(2, 2) = 1;  // diagonal chain
  m(5, 4) = 1;
  const auto comps = connected_components(m);
  ASSERT_EQ(comps.size(), 2u);
  EXPECT_EQ(comps[0].size(), 3u);
  EXPECT_EQ(comps[1].front(), (LatticeIndex{5, 4}));
}

TEST(Regions, SinglePixelOutline) {
  Mask m(5, 5, 0);
  m(2, 3) = 1;
  const auto loops = trace_outlines(m);
  ASSERT_EQ(loops.size(), 1u);
  ASSERT_EQ(loops[0].size(), 4u);
  double xmin = 1e9, xmax = -1e9, ymin = 1e9, ymax = -1e9;
  for (const auto& p : loops[0]) {
    xmin = std::min(xmin, p.ix);
    xmax = std::max(xmax, p.ix);
    ymin = std::min(ymin, p.iy);
    ymax = std::max(ymax, p.iy);
  }
  EXPECT_EQ(xmin, 1.5);
  EXPECT_EQ(xmax, 2.5);
  EXPECT_EQ(ymin, 2.5);
  EXPECT_EQ(ymax, 3.5);
}

TEST(Regions, HoleGivesSecondLoop) {
  Mask m(5, 5, 0);
  for (int y = 1; y <= 3; ++y)
    for (int x = 1; x <= 3; ++x) m(x, y) = 1;
  m(2, 2) = 0;
  const auto loops = trace_outlines(m);
  ASSERT_EQ(loops.size(), 2u);
  EXPECT_EQ(loops[0].size(), 4u);
  EXPECT_EQ(loops[1].size(), 4u);
}

TEST(Regions, DiagonalPixelsShareOneOutline) {
  Mask m(4, 4, 0);
  m(1, 1) = m(2, 2) = 1;
  EXPECT_EQ(trace_outlines(m).size(), 1u);
}

TEST(Regions, ExtractionOrderAndArea) {
  ComparisonMap cmp;
  cmp.domain = octtest::geometry(10, 6, 100.0, 200.0).enface();
  cmp.records.resize(60);
  auto mark = [&](int x, int y, double diff) {
    auto& r = cmp.records[static_cast<std::size_t>(y) * 10 + x];
    r.tested = r.significant = true;
    r.diff = diff;
    r.p = 0.001 * (x + 1);
  };
  mark(8, 1, -1.0);
  for (int x = 1; x <= 3; ++x) mark(x, 4, 2.0);
  const auto regions = extract_significant_regions(cmp);
  ASSERT_EQ(regions.size(), 2u);
  EXPECT_EQ(regions[0].id, 1);
  EXPECT_EQ(regions[0].points.size(), 3u);
  EXPECT_NEAR(regions[0].area_mm2, 3 * 0.02, 1e-12);
  EXPECT_EQ(regions[0].mean_diff, 2.0);
  EXPECT_NEAR(regions[0].min_p, 0.002, 1e-15);
  EXPECT_EQ(regions[1].id, 2);
  EXPECT_EQ(regions[0].outlines.size(), 1u);
  const Mask rm = region_mask(cmp.domain, regions[1]);
  EXPECT_EQ(rm(8, 1), 1);
}

TEST(Measure, WholeDomainPolygonEqualsGlobalStats) {
  const auto map = cohort_maps(octtest::small_spec(1), 5).front();
  const Polygon all{{-10, -10}, {10, -10}, {10, 10}, {-10, 10}};
  const auto mask = mask_from_polygon(map.domain, all);
  const auto m = measure_region(map, mask);
  CellSummary oracle;
  std::vector<double> v(map.values.values().begin(), map.values.values().end());
  describe_values(v, oracle);
  EXPECT_EQ(m.n, v.size());
  EXPECT_EQ(m.mean, oracle.mean);
  EXPECT_EQ(m.sd, oracle.sd);
  EXPECT_NEAR(m.area_mm2, 128 * 64 * 0.005, 1e-9);
}

TEST(Measure, CellSelectionEqualsCellSummary) {
  const auto map = cohort_maps(octtest::small_spec(1), 5).front();
  const auto g = fit_grid(map, 2.5, 3);
  for (const auto& id : g.leaf_ids()) {
    const std::vector<std::string> ids{id};
    const auto m = measure_region(map, mask_from_cells(map.domain, g, ids));
    EXPECT_EQ(m.n, g.cell(id).summary->n_valid);
    EXPECT_DOUBLE_EQ(m.mean, g.cell(id).summary->mean);
    EXPECT_DOUBLE_EQ(m.sd, g.cell(id).summary->sd);
    EXPECT_EQ(m.max, g.cell(id).summary->max);
  }
}

TEST(Measure, EmptySelectionRejected) {
  const auto map = cohort_maps(octtest::small_spec(1), 5).front();
  const Polygon tiny{{5, 5}, {5.01, 5}, {5.01, 5.01}};
  try {
    measure_region(map, mask_from_polygon(map.domain, tiny));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Selection);
  }
}

TEST(Measure, DefectDiscRecoversDelta) {
  auto ps = octtest::small_spec(10, 3.0, 2.0);
  const DefectSpec def{1.5, 0.5, 0.7, 5, -15.0};
  ps.defects.push_back(def);
  const auto p = cohort_maps(ps, 31);
  const auto c = cohort_maps(octtest::small_spec(10, 3.0, 2.0), 32);
  const Mask mask = defect_mask(p.front().domain, def);
  const auto m = measure_region(p, c, mask, {});
  ASSERT_TRUE(m.mean_diff.has_value());
  EXPECT_NEAR(*m.mean_diff, -15.0, 3.0);
  EXPECT_LT(*m.p, 1e-6);
  EXPECT_EQ(*m.n_p, 10u);
  const auto model = build_control_model(c);
  const auto single = measure_region(p.front(), mask, &model);
  EXPECT_NEAR(*single.mean_diff, -15.0, 4.0);
}

TEST(StatsIo, ComparisonMapRoundTrip) {
  const auto p = cohort_maps(octtest::small_spec(4), 3);
  const auto c = cohort_maps(octtest::small_spec(4), 4);
  const auto cmp = compare_pointwise(p, c, {});
  const auto doc = comparison_map_to_json(cmp);
  EXPECT_NO_THROW(nlohmann::json::parse(doc.dump()));
  const auto back = comparison_map_from_json(doc);
  ASSERT_EQ(back.records.size(), cmp.records.size());
  for (std::size_t i = 0; i < cmp.records.size(); i += 37) {
    EXPECT_EQ(back.records[i].p, cmp.records[i].p);
    EXPECT_EQ(back.records[i].diff, cmp.records[i].diff);
    EXPECT_EQ(back.records[i].n_c, cmp.records[i].n_c);
  }
  EXPECT_EQ(back.threshold, cmp.threshold);
  EXPECT_EQ(back.domain, cmp.domain);
  EXPECT_EQ(comparison_map_to_json(back).dump(), doc.dump());
}

TEST(StatsIo, CellComparisonRoundTrip) {
  const auto p = cohort_maps(octtest::small_spec(4), 3);
  const auto c = cohort_maps(octtest::small_spec(4), 4);
  const auto cmp = compare_gridwise(fit_common_grid(c, 2.0, 2), p, c, {});
  const auto doc = cell_comparison_to_json(cmp);
  const auto back = cell_comparison_from_json(doc);
  EXPECT_EQ(back.cell_ids, cmp.cell_ids);
  EXPECT_EQ(cell_comparison_to_json(back).dump(), doc.dump());
  EXPECT_THROW(cell_comparison_from_json(nlohmann::json{{"kind", "attribute_map"}}), Error);
}

TEST(StatsIo, ConfigValidation) {
  EXPECT_EQ(compare_config_from_json({{"test", "mwu"}}).test, TestKind::MannWhitneyU);
  EXPECT_THROW(compare_config_from_json({{"alpha", 1.5}}), Error);
  EXPECT_THROW(compare_config_from_json({{"correction", "holm"}}), Error);
}
