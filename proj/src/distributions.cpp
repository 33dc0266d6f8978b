#include "despar/distributions.hpp"

#include "despar/error.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

namespace despar::dist {

double normal_cdf(double x) {
  return boost::math::cdf(boost::math::normal_distribution<double>(), x);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile level outside (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double chi_squared_cdf(double x, int dof) {
  if (dof < 1) throw Error(ErrorCode::InvalidArgument, "degrees of freedom must be positive");
  if (!(x > 0.0)) return 0.0;
  return boost::math::cdf(boost::math::chi_squared_distribution<double>(dof), x);
}

double chi_squared_survival(double x, int dof) {
  if (dof < 1) throw Error(ErrorCode::InvalidArgument, "degrees of freedom must be positive");
  if (!(x > 0.0)) return 1.0;
  return boost::math::cdf(
      boost::math::complement(boost::math::chi_squared_distribution<double>(dof), x));
}

double chi_squared_quantile(double p, int dof) {
  if (dof < 1) throw Error(ErrorCode::InvalidArgument, "degrees of freedom must be positive");
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile level outside (0, 1)");
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(dof), p);
}

}  // namespace despar::dist
