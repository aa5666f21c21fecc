#include "chainverifier/special_functions.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/non_central_chi_squared.hpp>

#include <cmath>

#include "chainverifier/errors.hpp"

namespace chainverifier {

double normal_log_pdf(const Eigen::VectorXd& u) {
  return -0.5 * static_cast<double>(u.size()) * kLogTwoPi - 0.5 * u.squaredNorm();
}

double normal_pdf(double u) { return std::exp(-0.5 * kLogTwoPi - 0.5 * u * u); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double log_falling_factorial(int lambda, int mu) {
  if (mu < 0 || mu > lambda) throw InputError("falling factorial needs 0 <= mu <= lambda");
  return std::lgamma(lambda + 1.0) - std::lgamma(lambda - mu + 1.0);
}

TailPair noncentral_chi_squared_tails(int df, double noncentrality, double x) {
  if (df < 1) throw InputError("degrees of freedom must be positive");
  if (x <= 0.0) return {0.0, 1.0};
  try {
    if (noncentrality <= 0.0) {
      const boost::math::chi_squared_distribution<double> dist(df);
      return {boost::math::cdf(dist, x), boost::math::cdf(boost::math::complement(dist, x))};
    }
    const boost::math::non_central_chi_squared_distribution<double> dist(df, noncentrality);
    return {boost::math::cdf(dist, x), boost::math::cdf(boost::math::complement(dist, x))};
  } catch (const std::exception& e) {
    throw NumericError(std::string("noncentral chi-squared evaluation failed: ") + e.what());
  }
}

}  // namespace chainverifier
