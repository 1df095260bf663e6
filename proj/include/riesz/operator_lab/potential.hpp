#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <sstream>
#include <string>

#include "riesz/error.hpp"

namespace riesz::lab {

using Complex = std::complex<double>;

/// Perturbation descriptor. Plane potentials are evaluated at (x, y) (y = 0 in one
/// dimension), sphere potentials at (theta, phi), equator weights at phi.
struct Potential {
  enum class Type { Zero, Constant, Gaussian, GaussianCap, DeltaEquator, CustomPlane, CustomSphere, CustomEquator };

  Type type = Type::Zero;
  Complex amplitude{0.0, 0.0};
  double scale = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  std::function<Complex(double, double)> fn;
  bool symmetric = false;  // custom: radial in the plane, axisymmetric on the sphere
  std::string label;

  static Potential zero() { return {}; }
  static Potential constant(Complex a) {
    Potential p;
    p.type = Type::Constant;
    p.amplitude = a;
    return p;
  }
  /// a * exp(-s |x - c|^2)
  static Potential gaussian(Complex a, double s, double cx = 0.0, double cy = 0.0) {
    Potential p;
    p.type = Type::Gaussian;
    p.amplitude = a;
    p.scale = s;
    p.cx = cx;
    p.cy = cy;
    return p;
  }
  /// a * exp(-s (1 - cos theta)) on the sphere
  static Potential gaussian_cap(Complex a, double s) {
    Potential p;
    p.type = Type::GaussianCap;
    p.amplitude = a;
    p.scale = s;
    return p;
  }
  /// W delta_Sigma on the equator with constant W = a
  static Potential delta_equator(Complex a) {
    Potential p;
    p.type = Type::DeltaEquator;
    p.amplitude = a;
    return p;
  }
  static Potential custom_plane(std::function<Complex(double, double)> f, bool radial, std::string label = "custom") {
    Potential p;
    p.type = Type::CustomPlane;
    p.fn = std::move(f);
    p.symmetric = radial;
    p.label = std::move(label);
    return p;
  }
  static Potential custom_sphere(std::function<Complex(double, double)> f, bool axisymmetric,
                                 std::string label = "custom") {
    Potential p;
    p.type = Type::CustomSphere;
    p.fn = std::move(f);
    p.symmetric = axisymmetric;
    p.label = std::move(label);
    return p;
  }
  static Potential custom_equator(std::function<Complex(double)> w, std::string label = "custom") {
    Potential p;
    p.type = Type::CustomEquator;
    p.fn = [w = std::move(w)](double phi, double) { return w(phi); };
    p.label = std::move(label);
    return p;
  }

  bool on_plane() const {
    return type == Type::Zero || type == Type::Constant || type == Type::Gaussian || type == Type::CustomPlane;
  }
  bool on_sphere() const {
    return type == Type::Zero || type == Type::Constant || type == Type::GaussianCap || type == Type::CustomSphere;
  }
  bool on_equator() const {
    return type == Type::Zero || type == Type::DeltaEquator || type == Type::CustomEquator;
  }

  /// Rotation invariance about the origin (plane) or the polar axis (sphere, equator).
  bool rotationally_symmetric() const {
    switch (type) {
      case Type::Zero:
      case Type::Constant:
      case Type::GaussianCap:
      case Type::DeltaEquator: return true;
      case Type::Gaussian: return cx == 0.0 && cy == 0.0;
      case Type::CustomPlane:
      case Type::CustomSphere: return symmetric;
      case Type::CustomEquator: return false;
    }
    return false;
  }

  Complex plane(double x, double y) const {
    switch (type) {
      case Type::Zero: return 0.0;
      case Type::Constant: return amplitude;
      case Type::Gaussian: {
        const double dx = x - cx, dy = y - cy;
        return amplitude * std::exp(-scale * (dx * dx + dy * dy));
      }
      case Type::CustomPlane: return fn(x, y);
      default: throw Error(ErrorKind::UnsupportedPotential, describe() + " is not a plane potential");
    }
  }

  Complex sphere(double theta, double phi) const {
    switch (type) {
      case Type::Zero: return 0.0;
      case Type::Constant: return amplitude;
      case Type::GaussianCap: return amplitude * std::exp(-scale * (1.0 - std::cos(theta)));
      case Type::CustomSphere: return fn(theta, phi);
      default: throw Error(ErrorKind::UnsupportedPotential, describe() + " is not a sphere potential");
    }
  }

  Complex equator(double phi) const {
    switch (type) {
      case Type::Zero: return 0.0;
      case Type::DeltaEquator: return amplitude;
      case Type::CustomEquator: return fn(phi, 0.0);
      default: throw Error(ErrorKind::UnsupportedPotential, describe() + " is not an equator weight");
    }
  }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    auto amp = [&] { os << "(" << amplitude.real() << (amplitude.imag() < 0 ? "" : "+") << amplitude.imag() << "i)"; };
    switch (type) {
      case Type::Zero: os << "zero"; break;
      case Type::Constant: os << "constant "; amp(); break;
      case Type::Gaussian:
        amp();
        os << "*exp(-" << scale << "|x-(" << cx << "," << cy << ")|^2)";
        break;
      case Type::GaussianCap:
        amp();
        os << "*exp(-" << scale << "(1-cos theta))";
        break;
      case Type::DeltaEquator:
        amp();
        os << "*delta_equator";
        break;
      default: os << label; break;
    }
    return os.str();
  }
};

}  // namespace riesz::lab
