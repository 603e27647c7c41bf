#include "powertail/oscint.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "powertail/errors.hpp"
#include "powertail/model.hpp"
#include "powertail/quadrature.hpp"

namespace powertail::oscint {

void spherical_bessel_sequence(int n_max, double x, std::span<double> out) {
  if (n_max < 0 || out.size() < std::size_t(n_max + 1))
    throw ContractViolation("spherical_bessel_sequence: output too short");
  if (x < 0.0) {
    spherical_bessel_sequence(n_max, -x, out);
    for (int n = 1; n <= n_max; n += 2) out[n] = -out[n];
    return;
  }
  if (x == 0.0) {
    out[0] = 1.0;
    for (int n = 1; n <= n_max; ++n) out[n] = 0.0;
    return;
  }
  if (x < 0.5) {
    // Power series; (x^2/2)^k / k! falls below 1e-17 well before k = 12.
    double lead = 1.0;  // x^n / (2n+1)!!
    for (int n = 0; n <= n_max; ++n) {
      if (n > 0) lead *= x / (2.0 * n + 1.0);
      double term = 1.0, sum = 1.0;
      for (int k = 1; k < 12; ++k) {
        term *= -0.5 * x * x / (k * (2.0 * n + 2.0 * k + 1.0));
        sum += term;
      }
      out[n] = lead * sum;
    }
    return;
  }
  const double s = std::sin(x), c = std::cos(x);
  const double j0 = s / x;
  const double j1 = s / (x * x) - c / x;
  if (x > n_max) {
    // Forward recurrence is stable while n < x.
    out[0] = j0;
    if (n_max >= 1) out[1] = j1;
    for (int n = 1; n < n_max; ++n) out[n + 1] = (2.0 * n + 1.0) / x * out[n] - out[n - 1];
    return;
  }
  // Miller: backward recurrence from well above n_max, normalized with
  // sum_n (2n+1) j_n^2 = 1.
  const int start = n_max + 24 + static_cast<int>(x);
  std::vector<double> f(start + 2, 0.0);
  f[start + 1] = 0.0;
  f[start] = 1.0;
  // Seed at 1 so the normalization sum cannot underflow; rescale to keep it finite.
  for (int n = start; n >= 1; --n) {
    f[n - 1] = (2.0 * n + 1.0) / x * f[n] - f[n + 1];
    if (std::abs(f[n - 1]) > 1e100) {
      for (int k = n - 1; k <= start + 1; ++k) f[k] *= 1e-100;
    }
  }
  double sum = 0.0;
  for (int n = 0; n <= start; ++n) sum += (2.0 * n + 1.0) * f[n] * f[n];
  double scale = 1.0 / std::sqrt(sum);
  // Fix the sign from whichever closed-form low order is better conditioned.
  if (std::abs(j0) >= std::abs(j1)) {
    if ((f[0] < 0.0) != (j0 < 0.0)) scale = -scale;
  } else {
    if ((f[1] < 0.0) != (j1 < 0.0)) scale = -scale;
  }
  for (int n = 0; n <= n_max; ++n) out[n] = f[n] * scale;
}

FilonTable::FilonTable(const std::function<double(double)>& f, double a, double b, int panels,
                       int degree)
    : a_(a), b_(b), half_(0.5 * (b - a) / panels), panels_(panels) {
  if (panels < 1 || degree < 0) throw ConfigError("FilonTable: need panels >= 1, degree >= 0");
  if (!(b > a)) throw ConfigError("FilonTable: need b > a");
  const quad::GaussRule rule = quad::gauss_legendre(degree + 1);
  const Eigen::MatrixXd t = quad::legendre_transform(rule);
  coeffs_.resize(degree + 1, panels);
  Eigen::VectorXd samples(degree + 1);
  for (int p = 0; p < panels; ++p) {
    const double mid = panel_mid(p);
    for (int l = 0; l <= degree; ++l) samples[l] = f(mid + half_ * rule.nodes[l]);
    coeffs_.col(p) = t * samples;
  }
}

cplx FilonTable::integral(double omega) const {
  const int q = static_cast<int>(coeffs_.rows());
  double jn[64];
  std::vector<double> heap;
  std::span<double> js(jn, 64);
  if (q > 64) {
    heap.resize(q);
    js = std::span<double>(heap);
  }
  spherical_bessel_sequence(q - 1, omega * half_, js);
  // moment_n = 2 i^n j_n: real for even n, imaginary for odd n.
  double re_m[64], im_m[64];
  std::vector<double> re_h, im_h;
  double* rm = re_m;
  double* imm = im_m;
  if (q > 64) {
    re_h.resize(q);
    im_h.resize(q);
    rm = re_h.data();
    imm = im_h.data();
  }
  for (int n = 0; n < q; ++n) {
    const double sgn = ((n / 2) % 2 == 0) ? 2.0 : -2.0;
    rm[n] = (n % 2 == 0) ? sgn * js[n] : 0.0;
    imm[n] = (n % 2 == 1) ? sgn * js[n] : 0.0;
  }
  cplx total = 0.0;
  for (int p = 0; p < panels_; ++p) {
    double re = 0.0, im = 0.0;
    for (int n = 0; n < q; ++n) {
      re += coeffs_(n, p) * rm[n];
      im += coeffs_(n, p) * imm[n];
    }
    total += std::polar(1.0, omega * panel_mid(p)) * cplx(re, im);
  }
  return half_ * total;
}

const FilonTable& unit_gdot_table() {
  static const FilonTable table(
      [](double s) { return SwitchingProfile::bump(s) / SwitchingProfile::bump_integral(); }, 0.0,
      1.0, 64, 8);
  return table;
}

cplx gdot_hat(const SwitchingProfile& profile, double p) {
  return profile.theta_total() * unit_gdot_table().integral(p);
}

namespace {

double canonical_bump(double s) {
  if (s <= -1.0 || s >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - s * s));
}

const FilonTable& bump_table() {
  static const FilonTable table(canonical_bump, -1.0, 1.0, 128, 12);
  return table;
}

// Roundoff floor of the panel sum relative to the O(1) integrand.
constexpr double kBumpFloor = 64.0 * std::numeric_limits<double>::epsilon() * 0.444;

}  // namespace

double bump_hat_precision_limit() {
  static const double limit = [] {
    const auto form = AsymptoticForm::canonical();
    double lo = 10.0, hi = 5000.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (form.envelope(mid) > 100.0 * kBumpFloor) lo = mid;
      else hi = mid;
    }
    return lo;
  }();
  return limit;
}

double bump_hat(double p) {
  p = std::abs(p);
  if (p > bump_hat_precision_limit())
    throw PrecisionLimit("bump_hat: p = " + std::to_string(p) +
                         " is past the double-precision cancellation floor (limit " +
                         std::to_string(bump_hat_precision_limit()) + ")");
  return bump_table().integral(p).real();
}

AsymptoticForm AsymptoticForm::canonical() {
  return {2.0 * std::sqrt(std::numbers::pi) / std::pow(2.0 * std::numbers::e, 0.25), 5.0};
}

double AsymptoticForm::decay(double p) const { return std::exp(-std::sqrt(p)); }
double AsymptoticForm::power(double p) const { return std::pow(p, -0.75); }
double AsymptoticForm::phase(double p) const { return p - std::sqrt(p) - 3.0 * std::numbers::pi / 8.0; }
double AsymptoticForm::operator()(double p) const { return envelope(p) * std::cos(phase(p)); }

double bump_hat_asymptotic(double p) {
  if (!(p > 0.0)) throw ContractViolation("bump_hat_asymptotic: p must be > 0");
  return AsymptoticForm::canonical()(p);
}

cplx partial_gdot_transform(const SwitchingProfile& profile, double s, double tau) {
  const double upper = std::min(s, 1.0);
  if (upper <= 0.0) return 0.0;
  const FilonTable table([&](double t) { return profile.gdot(t); }, 0.0, upper, 64, 8);
  return table.integral(tau);
}

}  // namespace powertail::oscint
