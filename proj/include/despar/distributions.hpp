#pragma once

namespace despar::dist {

double normal_cdf(double x);
/// Phi^{-1}(p) for p in (0, 1); returns 0 at p = 0.5 exactly.
double normal_quantile(double p);
double chi_squared_cdf(double x, int dof);
/// 1 - F_P(x), evaluated without cancellation.
double chi_squared_survival(double x, int dof);
double chi_squared_quantile(double p, int dof);

}  // namespace despar::dist
