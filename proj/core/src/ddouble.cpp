#include "mlspec/ddouble.hpp"

#include <array>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace mlspec {

namespace {

// Inverse factorials 1/k! for k = 0..31, built once by paired-double division.
struct InvFactTable {
  std::array<DDouble, 32> v{};
  InvFactTable() {
    v[0] = DDouble(1.0);
    v[1] = DDouble(1.0);
    for (int k = 2; k < 32; ++k) v[k] = v[k - 1] / double(k);
  }
};
InvFactTable const kInvFact;

// sin on |r| <= pi/4 + eps via the odd Taylor series; k = 14 truncation
// leaves (pi/4)^31/31! ~ 1e-37, below working precision.
DDouble sin_taylor(DDouble r) {
  if (r.hi == 0.0 && r.lo == 0.0) return DDouble(0.0);
  DDouble z = r * r;
  DDouble sum(0.0);
  for (int k = 14; k >= 1; --k) {
    double sign = (k % 2 == 0) ? 1.0 : -1.0;
    sum = (sum + mul_pwr2(kInvFact.v[2 * k + 1], sign)) * z;
  }
  return r + r * sum;
}

// cos on |r| <= pi/4 + eps via the even Taylor series.
DDouble cos_taylor(DDouble r) {
  if (r.hi == 0.0 && r.lo == 0.0) return DDouble(1.0);
  DDouble z = r * r;
  DDouble sum(0.0);
  for (int k = 14; k >= 1; --k) {
    double sign = (k % 2 == 0) ? 1.0 : -1.0;
    sum = (sum + mul_pwr2(kInvFact.v[2 * k], sign)) * z;
  }
  return 1.0 + sum;
}

// Reduce a modulo 2*pi, then modulo pi/2; returns the quadrant index.
// Accuracy degrades by ~|k| ulps of the stored 2*pi tail; callers keep
// arguments within a few hundred, where that is far below tolerance.
int reduce_pi2(DDouble a, DDouble& r) {
  DDouble k = round_nearest(a / dd_two_pi);
  r = a - dd_two_pi * k;
  DDouble j = round_nearest(r / dd_half_pi);
  r = r - dd_half_pi * j;
  int q = int(to_double(j));  // in {-2,...,2}
  return ((q % 4) + 4) % 4;
}

}  // namespace

void sincos(DDouble a, DDouble& s, DDouble& c) {
  DDouble r;
  int q = reduce_pi2(a, r);
  DDouble sr = sin_taylor(r);
  DDouble cr = cos_taylor(r);
  switch (q) {
    case 0: s = sr; c = cr; break;
    case 1: s = cr; c = -sr; break;
    case 2: s = -sr; c = -cr; break;
    default: s = -cr; c = sr; break;
  }
}

DDouble sin(DDouble a) {
  DDouble s, c;
  sincos(a, s, c);
  return s;
}

DDouble cos(DDouble a) {
  DDouble s, c;
  sincos(a, s, c);
  return c;
}

DDouble exp(DDouble a) {
  if (a.hi > 709.0) return DDouble(std::numeric_limits<double>::infinity());
  if (a.hi < -709.0) return DDouble(0.0);
  // a = k*ln2 + m, |m| <= ln2/2; scale m down by 2^9 so the series is short.
  double k = std::nearbyint(a.hi / dd_ln2.hi);
  DDouble m = a - dd_ln2 * k;
  DDouble r = mul_pwr2(m, 1.0 / 512.0);
  // expm1(r) for tiny r.
  DDouble p(0.0);
  for (int j = 10; j >= 2; --j) p = (p + kInvFact.v[j]) * r;
  p = r + r * p;
  // Undo the scaling: expm1(2t) = 2*expm1(t) + expm1(t)^2, nine times.
  for (int j = 0; j < 9; ++j) p = mul_pwr2(p, 2.0) + p * p;
  return ldexp(p + 1.0, int(k));
}

DDouble log(DDouble a) {
  if (a.hi <= 0.0) return DDouble(std::numeric_limits<double>::quiet_NaN());
  // Double seed plus one Newton step on exp(y) = a.
  DDouble y(std::log(a.hi));
  y = y + a * exp(-y) - 1.0;
  return y;
}

DDouble atan2(DDouble y, DDouble x) {
  bool y_zero = (y.hi == 0.0 && y.lo == 0.0);
  bool x_zero = (x.hi == 0.0 && x.lo == 0.0);
  if (x_zero && y_zero) return DDouble(0.0);
  if (x_zero) return y.hi > 0.0 ? dd_half_pi : -dd_half_pi;
  if (y_zero) return x.hi > 0.0 ? DDouble(0.0) : dd_pi;
  // Normalize, then one Newton refinement of the double seed on
  // sin(z) = y/r (or cos(z) = x/r on the flatter branch).
  DDouble r = sqrt(x * x + y * y);
  DDouble xn = x / r, yn = y / r;
  DDouble z(std::atan2(to_double(y), to_double(x)));
  DDouble sz, cz;
  sincos(z, sz, cz);
  if (std::fabs(xn.hi) > std::fabs(yn.hi)) {
    z = z + (yn - sz) / cz;
  } else {
    z = z - (xn - cz) / sz;
  }
  return z;
}

DDouble asin(DDouble a) {
  DDouble one_minus = (1.0 - a) * (1.0 + a);
  if (one_minus.hi < 0.0) one_minus = DDouble(0.0);
  return atan2(a, sqrt(one_minus));
}

namespace {

DDouble pow10_dd(int n) {
  DDouble base(10.0);
  bool inv = n < 0;
  unsigned e = unsigned(inv ? -n : n);
  DDouble acc(1.0);
  while (e) {
    if (e & 1u) acc = acc * base;
    base = base * base;
    e >>= 1;
  }
  return inv ? DDouble(1.0) / acc : acc;
}

}  // namespace

std::string to_string(DDouble a, int digits) {
  if (std::isnan(a.hi)) return "nan";
  if (std::isinf(a.hi)) return a.hi > 0 ? "inf" : "-inf";
  if (digits < 1) digits = 1;
  if (digits > 34) digits = 34;

  bool neg = a.hi < 0.0 || (a.hi == 0.0 && a.lo < 0.0);
  DDouble x = abs(a);
  char buf[64];
  if (x.hi == 0.0 && x.lo == 0.0) {
    std::string out = neg ? "-0." : "0.";
    out.append(size_t(digits - 1), '0');
    out += "e+00";
    return out;
  }

  int e10 = int(std::floor(std::log10(x.hi)));
  DDouble m = x / pow10_dd(e10);
  // Guard against log10 rounding at decade boundaries.
  for (int guard = 0; guard < 3 && m.hi >= 10.0; ++guard) {
    ++e10;
    m = m / 10.0;
  }
  for (int guard = 0; guard < 3 && m.hi < 1.0; ++guard) {
    --e10;
    m = m * 10.0;
  }

  int const nd = digits + 1;  // one guard digit for rounding
  std::vector<int> dv(size_t(nd), 0);
  for (int i = 0; i < nd; ++i) {
    int d = int(std::floor(m.hi));
    dv[size_t(i)] = d;
    m = (m - double(d)) * 10.0;
  }
  // The running remainder can dip negative or reach 10 transiently;
  // settle with borrows/carries from the tail up.
  for (int i = nd - 1; i >= 1; --i) {
    while (dv[size_t(i)] < 0) {
      dv[size_t(i)] += 10;
      dv[size_t(i - 1)] -= 1;
    }
    while (dv[size_t(i)] > 9) {
      dv[size_t(i)] -= 10;
      dv[size_t(i - 1)] += 1;
    }
  }
  if (dv[0] >= 10) {
    // Shift right: first digit overflowed into two digits.
    dv.insert(dv.begin(), dv[0] / 10);
    dv[1] %= 10;
    dv.pop_back();
    ++e10;
  }
  if (dv[0] == 0) {
    // Leading zero: drop it and pull one more digit's worth of exponent.
    dv.erase(dv.begin());
    dv.push_back(0);
    --e10;
  }
  // Round away the guard digit.
  if (dv[size_t(nd - 1)] >= 5) {
    int i = nd - 2;
    dv[size_t(i)] += 1;
    while (i >= 1 && dv[size_t(i)] > 9) {
      dv[size_t(i)] -= 10;
      dv[size_t(i - 1)] += 1;
      --i;
    }
    if (dv[0] > 9) {
      dv[0] = 1;  // 9.99... rounds to 10.0...: all later digits are zero
      for (int j = 1; j < nd; ++j) dv[size_t(j)] = 0;
      ++e10;
    }
  }
  std::string ds;
  ds.reserve(size_t(digits));
  for (int i = 0; i < digits; ++i) ds.push_back(char('0' + dv[size_t(i)]));

  std::string out;
  if (neg) out.push_back('-');
  out.push_back(ds[0]);
  out.push_back('.');
  out.append(ds.begin() + 1, ds.end());
  std::snprintf(buf, sizeof buf, "e%+03d", e10);
  out += buf;
  return out;
}

DDouble parse_ddouble(std::string const& text) {
  size_t i = 0;
  auto const n = text.size();
  while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  bool neg = false;
  if (i < n && (text[i] == '+' || text[i] == '-')) {
    neg = text[i] == '-';
    ++i;
  }
  if (text.compare(i, 3, "nan") == 0) return DDouble(std::numeric_limits<double>::quiet_NaN());
  if (text.compare(i, 3, "inf") == 0) {
    double v = std::numeric_limits<double>::infinity();
    return DDouble(neg ? -v : v);
  }

  DDouble acc(0.0);
  int frac_digits = 0;
  bool seen_dot = false, seen_digit = false;
  for (; i < n; ++i) {
    char ch = text[i];
    if (ch >= '0' && ch <= '9') {
      acc = acc * 10.0 + double(ch - '0');
      if (seen_dot) ++frac_digits;
      seen_digit = true;
    } else if (ch == '.' && !seen_dot) {
      seen_dot = true;
    } else {
      break;
    }
  }
  if (!seen_digit) throw std::invalid_argument("parse_ddouble: no digits in '" + text + "'");
  int e10 = 0;
  if (i < n && (text[i] == 'e' || text[i] == 'E')) {
    e10 = std::atoi(text.c_str() + i + 1);
  }
  int shift = e10 - frac_digits;
  DDouble v = shift == 0 ? acc : acc * pow10_dd(shift);
  return neg ? -v : v;
}

}  // namespace mlspec
