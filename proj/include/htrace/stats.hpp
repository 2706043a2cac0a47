#pragma once

#include <cstddef>
#include <span>

namespace htrace::stats {

struct CorrelationResult {
  double r = 0;
  double p_two_sided = 1;
  std::size_t n = 0;
};

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

// Two-sided p-value of a sample Pearson r under the t-test with n-2
// degrees of freedom.
double pearson_p_value(double r, std::size_t n);

// Throws Error("length-mismatch"), Error("too-few-samples") for n < 3,
// Error("constant-input").
CorrelationResult pearson(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> xs);

}  // namespace htrace::stats
