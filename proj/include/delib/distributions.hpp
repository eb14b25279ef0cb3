#pragma once

namespace delib::dist {

/// Regularized incomplete beta I_x(a, b), a, b > 0, x in [0, 1].
/// Continued fraction (modified Lentz) with the symmetry swap.
double incomplete_beta(double a, double b, double x);

/// Two-sided p-value of a Student t statistic: P(|T_df| >= |t|).
double student_t_two_sided(double t, double df);

/// Student t CDF.
double student_t_cdf(double t, double df);

/// Upper tail of the F distribution: P(F_{d1,d2} >= f).
double f_survival(double f, double d1, double d2);

double normal_cdf(double z);

/// Two-sided normal p-value for a z statistic.
double normal_two_sided(double z);

}  // namespace delib::dist
