#pragma once

#include <complex>
#include <utility>

namespace spsb {

using cplx = std::complex<double>;

/// Polarization state as amplitudes on the linear unit vectors e_x, e_y.
struct JonesVector {
  cplx cx{};
  cplx cy{};

  double norm2() const { return std::norm(cx) + std::norm(cy); }
  bool normalized() const;
};

/// Hermitian inner product <u|v>.
cplx inner(const JonesVector& u, const JonesVector& v);

/// True when u and v describe the same ray, i.e. |<u|v>| = |u||v| within tol.
bool same_ray(const JonesVector& u, const JonesVector& v, double tol = 1e-12);

JonesVector normalize(const JonesVector& v);

enum class Handedness { left, right, linear };

struct PolarizationEllipse {
  double orientation = 0.0;   // psi in [0, pi)
  double ellipticity = 0.0;   // chi_e in [-pi/4, pi/4]
  Handedness handedness = Handedness::linear;
  bool orientation_degenerate = false;  // set for circular light, psi reported as 0
};

struct StokesVector {
  double s0 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;
};

// Circular basis. The unit vectors are e_+ = (e_x + i e_y)/sqrt2 and
// e_- = (e_x - i e_y)/sqrt2, so the amplitudes on them are
// c_+- = (c_x -+ i c_y)/sqrt2, the same map as a_+- = (a_x -+ i a_y)/sqrt2 on
// mode operators. Every basis change in the library goes through these two
// functions.
std::pair<cplx, cplx> to_circular(const JonesVector& v);
JonesVector to_linear(cplx c_plus, cplx c_minus);

JonesVector e_x();
JonesVector e_y();
JonesVector e_plus();
JonesVector e_minus();

enum class ModelKind { opo, chi3 };

/// Mode carrying the classical mean field for broken-symmetry angle theta.
JonesVector bright_mode(ModelKind model, double theta);
/// Mode orthogonal to bright_mode(model, theta), classically empty.
JonesVector dark_mode(ModelKind model, double theta);

/// Throws std::domain_error for the zero vector.
StokesVector stokes(const JonesVector& v);
/// Throws std::domain_error for the zero vector.
PolarizationEllipse ellipse_params(const JonesVector& v);
/// Unit Jones vector with the given ellipse; inverse of ellipse_params up to global phase.
JonesVector jones_of(const PolarizationEllipse& e);

/// Quarter-wave retarder with its fast axis at `fast_axis` radians from e_x.
JonesVector qwp(const JonesVector& v, double fast_axis);

}  // namespace spsb
