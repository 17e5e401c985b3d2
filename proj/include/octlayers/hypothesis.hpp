#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace octlayers {

/// Stand-in for an infinite statistic (zero variance with unequal means).
/// Finite so that every serialized number stays valid JSON.
inline constexpr double kInfiniteSentinel = 1e300;

enum class TestKind { WelchT, MannWhitneyU };

std::string_view to_string(TestKind kind);
/// "welch_t" / "welch", "mann_whitney_u" / "mwu".
TestKind parse_test_kind(std::string_view text);

struct TestResult {
  TestKind kind = TestKind::WelchT;
  double statistic = 0.0;  // t, or U of the first sample
  std::optional<double> df;
  double p = 1.0;  // two-sided
};

/// Each sample needs >= 3 finite values (Error(InsufficientData)).
TestResult two_sample_test(std::span<const double> a, std::span<const double> b, TestKind kind);

/// Welch's unequal-variance t test with Welch-Satterthwaite df.
TestResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// Mann-Whitney U of `a` (pairs a > b plus half the ties) with the
/// tie-corrected normal approximation and continuity correction.
TestResult mann_whitney_u_test(std::span<const double> a, std::span<const double> b);

/// Cohen's d with pooled SD; needs >= 2 values per sample.
double effect_size(std::span<const double> a, std::span<const double> b);

enum class Correction { None, Bonferroni, BenjaminiHochberg };

std::string_view to_string(Correction c);
/// "none", "bonferroni", "bh" / "benjamini_hochberg" / "fdr".
Correction parse_correction(std::string_view text);

struct Adjustment {
  std::vector<std::uint8_t> significant;  // parallel to the input p-values
  double threshold = 0.0;                 // significant <=> p <= threshold
};

Adjustment adjust_pvalues(std::span<const double> p, Correction method, double alpha);

double mean_of(std::span<const double> v);
/// Sample variance (n - 1 denominator); 0 for fewer than 2 values.
double sample_variance(std::span<const double> v);

}  // namespace octlayers
