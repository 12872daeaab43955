#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace mlspec {

enum class DomainKind { Circle, Ellipse, Fourier };

char const* domain_kind_name(DomainKind k);

/// Description of a strictly convex planar table, given in polar form
/// r(theta) about an interior origin.  Parsed and stored in double precision;
/// scalar-generic evaluation happens in Boundary.
struct DomainSpec {
  DomainKind kind = DomainKind::Circle;
  double radius = 1.0;           // Circle
  double a = 1.0, b = 1.0;       // Ellipse semi-axes, a along x
  double base_radius = 1.0;      // Fourier constant term
  std::vector<double> cos_coeffs;  // mode k stored at index k-1
  std::vector<double> sin_coeffs;

  static DomainSpec circle(double R);
  static DomainSpec ellipse(double a, double b);
  /// Mildly perturbed ellipse with no special symmetry; the default table
  /// for genericity-sensitive diagnostics.
  static DomainSpec generic();
};

bool operator==(DomainSpec const& x, DomainSpec const& y);
inline bool operator!=(DomainSpec const& x, DomainSpec const& y) { return !(x == y); }

/// Throws InvalidSpec on unknown keys, missing fields, or out-of-range values.
DomainSpec parse_domain(nlohmann::json const& j);
nlohmann::json domain_to_json(DomainSpec const& d);

}  // namespace mlspec
