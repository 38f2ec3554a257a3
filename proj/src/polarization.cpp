#include "spsb/polarization.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spsb {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr cplx kI{0.0, 1.0};
}  // namespace

bool JonesVector::normalized() const { return std::abs(norm2() - 1.0) < 1e-12; }

cplx inner(const JonesVector& u, const JonesVector& v) {
  return std::conj(u.cx) * v.cx + std::conj(u.cy) * v.cy;
}

bool same_ray(const JonesVector& u, const JonesVector& v, double tol) {
  const double nu = std::sqrt(u.norm2());
  const double nv = std::sqrt(v.norm2());
  return std::abs(std::abs(inner(u, v)) - nu * nv) <= tol * std::max(1.0, nu * nv);
}

JonesVector normalize(const JonesVector& v) {
  const double n = std::sqrt(v.norm2());
  if (n == 0.0) throw std::domain_error("cannot normalize the zero Jones vector");
  return {v.cx / n, v.cy / n};
}

std::pair<cplx, cplx> to_circular(const JonesVector& v) {
  return {(v.cx - kI * v.cy) * kInvSqrt2, (v.cx + kI * v.cy) * kInvSqrt2};
}

JonesVector to_linear(cplx c_plus, cplx c_minus) {
  return {(c_plus + c_minus) * kInvSqrt2, kI * (c_plus - c_minus) * kInvSqrt2};
}

JonesVector e_x() { return {1.0, 0.0}; }
JonesVector e_y() { return {0.0, 1.0}; }
JonesVector e_plus() { return to_linear(1.0, 0.0); }
JonesVector e_minus() { return to_linear(0.0, 1.0); }

JonesVector bright_mode(ModelKind model, double theta) {
  const cplx em = std::polar(1.0, -theta);
  const cplx ep = std::polar(1.0, theta);
  switch (model) {
    case ModelKind::opo:
      return {em * kInvSqrt2, ep * kInvSqrt2};
    case ModelKind::chi3:
      return to_linear(em * kInvSqrt2, ep * kInvSqrt2);
  }
  throw std::invalid_argument("unknown model");
}

JonesVector dark_mode(ModelKind model, double theta) {
  const cplx em = std::polar(1.0, -theta);
  const cplx ep = std::polar(1.0, theta);
  switch (model) {
    case ModelKind::opo:
      return {kI * em * kInvSqrt2, -kI * ep * kInvSqrt2};
    case ModelKind::chi3:
      return to_linear(-kI * em * kInvSqrt2, kI * ep * kInvSqrt2);
  }
  throw std::invalid_argument("unknown model");
}

StokesVector stokes(const JonesVector& v) {
  if (v.norm2() == 0.0) throw std::domain_error("Stokes parameters of the zero vector");
  const cplx cross = std::conj(v.cx) * v.cy;
  return {v.norm2(), std::norm(v.cx) - std::norm(v.cy), 2.0 * cross.real(), 2.0 * cross.imag()};
}

PolarizationEllipse ellipse_params(const JonesVector& v) {
  const StokesVector s = stokes(v);
  PolarizationEllipse e;
  const double ratio = std::clamp(s.s3 / s.s0, -1.0, 1.0);
  e.ellipticity = 0.5 * std::asin(ratio);
  const double lin = std::hypot(s.s1, s.s2);
  if (lin <= 1e-12 * s.s0) {
    e.orientation = 0.0;
    e.orientation_degenerate = true;
  } else {
    double psi = 0.5 * std::atan2(s.s2, s.s1);
    if (psi < 0.0) psi += std::numbers::pi;
    if (psi >= std::numbers::pi) psi -= std::numbers::pi;
    e.orientation = psi;
  }
  if (std::abs(s.s3) <= 1e-12 * s.s0) {
    e.handedness = Handedness::linear;
    e.ellipticity = 0.0;
  } else {
    // e_+ has s3 > 0 and is called right circular.
    e.handedness = s.s3 > 0.0 ? Handedness::right : Handedness::left;
  }
  return e;
}

JonesVector jones_of(const PolarizationEllipse& e) {
  const double c = std::cos(e.orientation);
  const double s = std::sin(e.orientation);
  const double a = std::cos(e.ellipticity);
  const double b = std::sin(e.ellipticity);
  // Rotate the ellipse (a, i b) written in its own axes.
  return {c * a - kI * s * b, s * a + kI * c * b};
}

JonesVector qwp(const JonesVector& v, double fast_axis) {
  // R(a) diag(1, i) R(-a)
  const double c = std::cos(fast_axis);
  const double s = std::sin(fast_axis);
  const cplx fast = c * v.cx + s * v.cy;
  const cplx slow = -s * v.cx + c * v.cy;
  const cplx slow_r = kI * slow;
  return {c * fast - s * slow_r, s * fast + c * slow_r};
}

}  // namespace spsb
