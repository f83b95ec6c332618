#pragma once

namespace ustatlab {

// Standard normal density.
double normal_pdf(double z);

// Standard normal CDF via erfc; relative accuracy close to machine epsilon
// even deep in the lower tail.
double normal_cdf(double z);

// Inverse of the standard normal CDF. Wichura's AS241 (PPND16) rational
// approximation followed by one Newton step against the erfc-based CDF.
// Absolute error <= 1e-9 on [1e-15, 1-1e-15]; throws std::domain_error
// outside (0,1).
double inverse_normal_cdf(double u);

// E[Z^2 1{|Z| > k}] for Z ~ N(0,1), k >= 0: 2*(k*phi(k) + 1 - Phi(k)).
double normal_tail_second_moment(double k);

}  // namespace ustatlab
