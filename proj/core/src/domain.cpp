#include "mlspec/domain.hpp"

#include <cmath>
#include <set>

#include "mlspec/errors.hpp"

namespace mlspec {

using nlohmann::json;

char const* domain_kind_name(DomainKind k) {
  switch (k) {
    case DomainKind::Circle: return "circle";
    case DomainKind::Ellipse: return "ellipse";
    case DomainKind::Fourier: return "fourier";
  }
  return "?";
}

DomainSpec DomainSpec::circle(double R) {
  DomainSpec d;
  d.kind = DomainKind::Circle;
  d.radius = R;
  return d;
}

DomainSpec DomainSpec::ellipse(double a, double b) {
  DomainSpec d;
  d.kind = DomainKind::Ellipse;
  d.a = a;
  d.b = b;
  return d;
}

DomainSpec DomainSpec::generic() {
  DomainSpec d = ellipse(1.0, 0.6);
  d.cos_coeffs = {0.0, 0.0, 0.005};
  d.sin_coeffs = {0.0, 0.0, 0.0, 0.003};
  return d;
}

bool operator==(DomainSpec const& x, DomainSpec const& y) {
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case DomainKind::Circle:
      return x.radius == y.radius;
    case DomainKind::Ellipse:
      return x.a == y.a && x.b == y.b && x.cos_coeffs == y.cos_coeffs &&
             x.sin_coeffs == y.sin_coeffs;
    case DomainKind::Fourier:
      return x.base_radius == y.base_radius && x.cos_coeffs == y.cos_coeffs &&
             x.sin_coeffs == y.sin_coeffs;
  }
  return false;
}

namespace {

void require_keys(json const& j, std::set<std::string> const& allowed) {
  if (!j.is_object()) throw InvalidSpec("domain: expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw InvalidSpec("domain: unknown key \"" + it.key() + "\"");
}

double positive_number(json const& j, char const* key) {
  if (!j.contains(key)) throw InvalidSpec(std::string("domain: missing \"") + key + "\"");
  auto const& v = j.at(key);
  if (!v.is_number()) throw InvalidSpec(std::string("domain: \"") + key + "\" must be a number");
  double x = v.get<double>();
  if (!(x > 0.0) || !std::isfinite(x))
    throw InvalidSpec(std::string("domain: \"") + key + "\" must be positive and finite");
  return x;
}

std::vector<double> coeff_array(json const& j, char const* key) {
  std::vector<double> out;
  if (!j.contains(key)) return out;
  auto const& v = j.at(key);
  if (!v.is_array()) throw InvalidSpec(std::string("domain: \"") + key + "\" must be an array");
  for (auto const& e : v) {
    if (!e.is_number())
      throw InvalidSpec(std::string("domain: \"") + key + "\" entries must be numbers");
    double x = e.get<double>();
    if (!std::isfinite(x))
      throw InvalidSpec(std::string("domain: \"") + key + "\" entries must be finite");
    out.push_back(x);
  }
  return out;
}

}  // namespace

DomainSpec parse_domain(json const& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw InvalidSpec("domain: missing \"kind\"");
  if (!j.at("kind").is_string()) throw InvalidSpec("domain: \"kind\" must be a string");
  std::string kind = j.at("kind").get<std::string>();

  DomainSpec d;
  if (kind == "circle") {
    require_keys(j, {"kind", "radius"});
    d.kind = DomainKind::Circle;
    d.radius = positive_number(j, "radius");
  } else if (kind == "ellipse") {
    require_keys(j, {"kind", "a", "b", "cos_coeffs", "sin_coeffs"});
    d.kind = DomainKind::Ellipse;
    d.a = positive_number(j, "a");
    d.b = positive_number(j, "b");
    d.cos_coeffs = coeff_array(j, "cos_coeffs");
    d.sin_coeffs = coeff_array(j, "sin_coeffs");
  } else if (kind == "fourier") {
    require_keys(j, {"kind", "base_radius", "cos_coeffs", "sin_coeffs"});
    d.kind = DomainKind::Fourier;
    d.base_radius = positive_number(j, "base_radius");
    d.cos_coeffs = coeff_array(j, "cos_coeffs");
    d.sin_coeffs = coeff_array(j, "sin_coeffs");
  } else {
    throw InvalidSpec("domain: unknown kind \"" + kind + "\"");
  }
  return d;
}

json domain_to_json(DomainSpec const& d) {
  json j;
  j["kind"] = domain_kind_name(d.kind);
  switch (d.kind) {
    case DomainKind::Circle:
      j["radius"] = d.radius;
      break;
    case DomainKind::Ellipse:
      j["a"] = d.a;
      j["b"] = d.b;
      if (!d.cos_coeffs.empty()) j["cos_coeffs"] = d.cos_coeffs;
      if (!d.sin_coeffs.empty()) j["sin_coeffs"] = d.sin_coeffs;
      break;
    case DomainKind::Fourier:
      j["base_radius"] = d.base_radius;
      if (!d.cos_coeffs.empty()) j["cos_coeffs"] = d.cos_coeffs;
      if (!d.sin_coeffs.empty()) j["sin_coeffs"] = d.sin_coeffs;
      break;
  }
  return j;
}

}  // namespace mlspec
