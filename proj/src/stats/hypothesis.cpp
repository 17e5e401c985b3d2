#include "octlayers/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "octlayers/distributions.hpp"
#include "octlayers/error.hpp"

namespace octlayers {

namespace {

void require_samples(std::span<const double> a, std::span<const double> b, std::size_t minimum) {
  if (a.size() < minimum || b.size() < minimum)
    fail(ErrorKind::InsufficientData, "each sample needs at least " + std::to_string(minimum) +
                                          " values (got " + std::to_string(a.size()) + " and " +
                                          std::to_string(b.size()) + ")");
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(a.begin(), a.end(), finite) || !std::all_of(b.begin(), b.end(), finite))
    fail(ErrorKind::Validation, "samples must be finite");
}

double signed_sentinel(double diff) { return diff > 0.0 ? kInfiniteSentinel : -kInfiniteSentinel; }

}  // namespace

std::string_view to_string(TestKind kind) {
  return kind == TestKind::WelchT ? "welch_t" : "mann_whitney_u";
}

TestKind parse_test_kind(std::string_view text) {
  if (text == "welch_t" || text == "welch" || text == "t") return TestKind::WelchT;
  if (text == "mann_whitney_u" || text == "mwu" || text == "mann_whitney")
    return TestKind::MannWhitneyU;
  fail(ErrorKind::Spec, "unknown test kind '" + std::string(text) + "'");
}

std::string_view to_string(Correction c) {
  switch (c) {
    case Correction::None: return "none";
    case Correction::Bonferroni: return "bonferroni";
    case Correction::BenjaminiHochberg: return "benjamini_hochberg";
  }
  return "?";
}

Correction parse_correction(std::string_view text) {
  if (text == "none") return Correction::None;
  if (text == "bonferroni") return Correction::Bonferroni;
  if (text == "bh" || text == "benjamini_hochberg" || text == "fdr")
    return Correction::BenjaminiHochberg;
  fail(ErrorKind::Spec, "unknown correction '" + std::string(text) + "'");
}

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

TestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  require_samples(a, b, 3);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double ma = mean_of(a), mb = mean_of(b);
  const double va = sample_variance(a) / na, vb = sample_variance(b) / nb;
  TestResult r;
  r.kind = TestKind::WelchT;
  const double se2 = va + vb;
  if (se2 == 0.0) {
    r.df = na + nb - 2.0;
    if (ma == mb) {
      r.statistic = 0.0;
      r.p = 1.0;
    } else {
      r.statistic = signed_sentinel(ma - mb);
      r.p = 0.0;
    }
    return r;
  }
  r.statistic = (ma - mb) / std::sqrt(se2);
  r.df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  r.p = student_t_two_sided_p(r.statistic, *r.df);
  return r;
}

TestResult mann_whitney_u_test(std::span<const double> a, std::span<const double> b) {
  require_samples(a, b, 3);
  const std::size_t na = a.size(), nb = b.size(), n = na + nb;
  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(n);
  for (double v : a) pooled.emplace_back(v, 0);
  for (double v : b) pooled.emplace_back(v, 1);
  std::sort(pooled.begin(), pooled.end());

  double rank_sum_a = 0.0, tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && pooled[j].first == pooled[i].first) ++j;
    const double t = static_cast<double>(j - i);
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k)
      if (pooled[k].second == 0) rank_sum_a += midrank;
    tie_term += t * t * t - t;
    i = j;
  }
  const double dna = static_cast<double>(na), dnb = static_cast<double>(nb),
               dn = static_cast<double>(n);
  TestResult r;
  r.kind = TestKind::MannWhitneyU;
  r.statistic = rank_sum_a - dna * (dna + 1.0) / 2.0;
  const double mu = dna * dnb / 2.0;
  const double var = dna * dnb / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
  if (!(var > 0.0)) {
    r.p = 1.0;
    return r;
  }
  const double z = std::max(0.0, std::fabs(r.statistic - mu) - 0.5) / std::sqrt(var);
  r.p = normal_two_sided_p(z);
  return r;
}

TestResult two_sample_test(std::span<const double> a, std::span<const double> b, TestKind kind) {
  return kind == TestKind::WelchT ? welch_t_test(a, b) : mann_whitney_u_test(a, b);
}

double effect_size(std::span<const double> a, std::span<const double> b) {
  require_samples(a, b, 2);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double diff = mean_of(a) - mean_of(b);
  const double pooled =
      std::sqrt(((na - 1.0) * sample_variance(a) + (nb - 1.0) * sample_variance(b)) / (na + nb - 2.0));
  if (pooled == 0.0) return diff == 0.0 ? 0.0 : signed_sentinel(diff);
  return diff / pooled;
}

Adjustment adjust_pvalues(std::span<const double> p, Correction method, double alpha) {
  Adjustment out;
  const std::size_t m = p.size();
  out.significant.assign(m, 0);
  switch (method) {
    case Correction::None: out.threshold = alpha; break;
    case Correction::Bonferroni: out.threshold = m == 0 ? alpha : alpha / static_cast<double>(m); break;
    case Correction::BenjaminiHochberg: {
      std::vector<double> sorted(p.begin(), p.end());
      std::sort(sorted.begin(), sorted.end());
      out.threshold = 0.0;
      for (std::size_t k = m; k >= 1; --k) {
        const double bound = static_cast<double>(k) * alpha / static_cast<double>(m);
        if (sorted[k - 1] <= bound) {
          out.threshold = bound;
          break;
        }
      }
      if (out.threshold == 0.0) {
        // No rejections; leave every flag clear.
        return out;
      }
      break;
    }
  }
  for (std::size_t i = 0; i < m; ++i) out.significant[i] = p[i] <= out.threshold ? 1 : 0;
  return out;
}

}  // namespace octlayers
