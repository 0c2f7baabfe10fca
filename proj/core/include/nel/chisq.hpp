#ifndef NEL_CHISQ_HPP
#define NEL_CHISQ_HPP

namespace nel {

/// Lower regularized incomplete gamma P(a, x); series for x < a+1, Lentz
/// continued fraction otherwise.
double gamma_p(double a, double x);
/// Upper tail Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

double chisq_cdf(int dof, double x);

/// Quantile q with P(X <= q) = level for X ~ chi^2_dof, found by bisection
/// on the regularized incomplete gamma; absolute error below 1e-8.
double chisq_quantile(int dof, double level);

/// Kolmogorov distribution tail Q_KS(t) = 2 sum_k (-1)^{k-1} exp(-2 k^2 t^2).
double kolmogorov_tail(double t);

/// Critical value c with Q_KS(c) = alpha (asymptotic one-sample KS test).
double ks_critical(double alpha);

}  // namespace nel

#endif
