#pragma once

namespace readapt {

// Natural log of the gamma function for x > 0.
// Throws std::domain_error for x <= 0 or non-finite input.
double log_gamma(double x);

// Logarithmic derivative of the gamma function, x > 0.
double digamma(double x);

// Second derivative of log_gamma, x > 0. Needed for analytic
// gradients of Dirichlet KL terms.
double trigamma(double x);

// log Gamma(x + s) - log Gamma(x) for x > 0, s in [0, 1].
// Uses a direct difference for moderate x and an asymptotic
// expansion for large x where the difference would cancel.
double log_gamma_ratio(double x, double s);

} // namespace readapt
