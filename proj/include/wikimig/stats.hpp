#pragma once

#include <span>

namespace wikimig::stats {

// Tail probabilities. Non-finite or out-of-domain inputs are clamped to the
// nearest meaningful probability rather than throwing.
double student_t_two_sided_p(double t, double df);
double f_upper_tail(double f, double df1, double df2);
double chi_square_upper_tail(double x, double df);
double chi_square_quantile(double probability, double df);

double mean(std::span<const double> x);
/// Product-moment correlation. Returns NaN when either input has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

}  // namespace wikimig::stats
