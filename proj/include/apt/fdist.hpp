#pragma once

namespace apt {

/**
 * @brief Regularized incomplete beta function I_x(a, b).
 *
 * Evaluated with the Lentz continued fraction on whichever side of the
 * distribution mean converges fastest. Throws ConvergenceError if the
 * fraction does not settle.
 */
double incomplete_beta(double a, double b, double x);

/// Upper-tail probability P(F > x) for F ~ F(df1, df2).
double f_upper_tail(double x, double df1, double df2);

/// The x with P(F <= x) = p, found by bracketed root search.
double f_quantile(double p, double df1, double df2);

}  // namespace apt
