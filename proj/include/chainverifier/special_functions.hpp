#pragma once

#include <Eigen/Dense>

namespace chainverifier {

inline constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

/// ln of the standard multivariate normal density at u.
double normal_log_pdf(const Eigen::VectorXd& u);
double normal_pdf(double u);
double normal_cdf(double x);
/// Upper tail 1 - Phi(x), accurate for large x.
double normal_sf(double x);

/// ln(lambda! / (lambda - mu)!)
double log_falling_factorial(int lambda, int mu);

/// P(chi'^2_df(noncentrality) <= x) and its complement, each evaluated on its
/// own tail so neither loses precision near 0 or 1.
struct TailPair {
  double lower = 0.0;
  double upper = 1.0;
};
TailPair noncentral_chi_squared_tails(int df, double noncentrality, double x);

}  // namespace chainverifier
