#pragma once

namespace octlayers {

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided p-value of Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

double normal_cdf(double z);
double normal_two_sided_p(double z);

}  // namespace octlayers
