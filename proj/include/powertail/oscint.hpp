#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <span>

namespace powertail {
class SwitchingProfile;
}

namespace powertail::oscint {

using cplx = std::complex<double>;

/// j_0(x) ... j_{n_max}(x) written to out[0..n_max].
void spherical_bessel_sequence(int n_max, double x, std::span<double> out);

/// Piecewise Legendre interpolant of a function on equal panels of [a, b],
/// ready for Filon integration against exp(i omega t): on each panel the
/// interpolant is integrated exactly using
///   int_{-1}^{1} P_n(x) exp(i k x) dx = 2 i^n j_n(k).
class FilonTable {
 public:
  FilonTable() = default;
  FilonTable(const std::function<double(double)>& f, double a, double b, int panels, int degree);

  /// integral_a^b f(t) exp(i omega t) dt for the interpolant of f.
  cplx integral(double omega) const;

  double a() const { return a_; }
  double b() const { return b_; }
  int panels() const { return panels_; }
  int degree() const { return static_cast<int>(coeffs_.rows()) - 1; }
  double half_width() const { return half_; }
  double panel_mid(int p) const { return a_ + (2 * p + 1) * half_; }
  /// Column p holds the Legendre coefficients on panel p.
  const Eigen::MatrixXd& coefficients() const { return coeffs_; }

 private:
  double a_ = 0.0, b_ = 0.0, half_ = 0.0;
  int panels_ = 0;
  Eigen::MatrixXd coeffs_;
};

/// integral_0^1 gdot(s) exp(i p s) ds. 64 panels, degree 8.
cplx gdot_hat(const SwitchingProfile& profile, double p);

/// Table of gdot / theta_total used by gdot_hat.
const FilonTable& unit_gdot_table();

/// Fourier transform of exp(-1/(1-s^2)) on [-1, 1] (real, even in p).
/// Throws PrecisionLimit where the value sinks toward the double-precision
/// cancellation floor.
double bump_hat(double p);

/// Largest |p| for which bump_hat still returns a result.
double bump_hat_precision_limit();

struct AsymptoticForm {
  double amplitude;         // 2 sqrt(pi) / (2e)^(1/4)
  double correction_scale;  // empirical bound on |ratio - cos(phase)| * sqrt(p)

  static AsymptoticForm canonical();
  double decay(double p) const;  // exp(-sqrt p)
  double power(double p) const;  // p^(-3/4)
  double phase(double p) const;  // p - sqrt p - 3 pi / 8
  double envelope(double p) const { return amplitude * decay(p) * power(p); }
  double operator()(double p) const;
};

/// Leading saddle-point form of bump_hat.
double bump_hat_asymptotic(double p);

/// integral_0^{min(s,1)} gdot(t) exp(i tau t) dt.
cplx partial_gdot_transform(const SwitchingProfile& profile, double s, double tau);

}  // namespace powertail::oscint
