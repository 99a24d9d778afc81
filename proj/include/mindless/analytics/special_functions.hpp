#pragma once

namespace mindless::analytics {

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_beta(double a, double b, double x);
/// Regularized lower incomplete gamma P(a, x) and its complement Q(a, x).
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

/// Two-sided p-value of a Student t statistic.
double student_t_two_sided_p(double t, double df);
/// Upper tail of chi-square with `df` degrees of freedom.
double chi_square_sf(double x, double df);
/// Upper tail of F(df1, df2).
double f_sf(double f, double df1, double df2);

} // namespace mindless::analytics
