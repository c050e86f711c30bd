#pragma once

// Angular-momentum algebra: Clebsch-Gordan coefficients, 6j symbols and the
// reduction of hyperfine dipole matrix elements to <J||d||S>.
//
// All quantum numbers are carried as HalfInt (twice the value stored as an
// integer), so every selection rule is decided in exact integer arithmetic.
// Coefficients are evaluated from the Racah sums in exact rational
// arithmetic and converted to double once at the end.

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace rsc {

class HalfInt {
 public:
  constexpr HalfInt() = default;
  constexpr HalfInt(int whole) : twice_(2 * whole) {}  // NOLINT(implicit)

  static constexpr HalfInt from_twice(int twice) {
    HalfInt h;
    h.twice_ = twice;
    return h;
  }

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return 0.5 * twice_; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }

  constexpr HalfInt operator-() const { return from_twice(-twice_); }
  friend constexpr HalfInt operator+(HalfInt a, HalfInt b) { return from_twice(a.twice_ + b.twice_); }
  friend constexpr HalfInt operator-(HalfInt a, HalfInt b) { return from_twice(a.twice_ - b.twice_); }
  friend constexpr bool operator==(HalfInt, HalfInt) = default;
  friend constexpr auto operator<=>(HalfInt, HalfInt) = default;

  std::string str() const;

 private:
  int twice_ = 0;
};

/// j = n/2.
constexpr HalfInt half(int twice) { return HalfInt::from_twice(twice); }

/// |2m| <= 2j and 2m = 2j (mod 2).
constexpr bool is_projection_of(HalfInt m, HalfInt j) {
  const int tm = m.twice() < 0 ? -m.twice() : m.twice();
  return j.twice() >= 0 && tm <= j.twice() && ((j.twice() - m.twice()) % 2 == 0);
}

/// |a-b| <= c <= a+b with a+b+c integer.
constexpr bool triangle(HalfInt a, HalfInt b, HalfInt c) {
  const int d = a.twice() - b.twice();
  const int ad = d < 0 ? -d : d;
  return a.twice() >= 0 && b.twice() >= 0 && c.twice() >= 0 && ad <= c.twice() &&
         c.twice() <= a.twice() + b.twice() && ((a.twice() + b.twice() + c.twice()) % 2 == 0);
}

/// (-1)^x for an integer-valued x; throws std::domain_error otherwise.
int phase(HalfInt x);

/// <j1 m1; j2 m2 | J M>, Condon-Shortley phase. Zero when a selection rule fails.
double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M);

/// {j1 j2 j3; j4 j5 j6}. Zero when any of the four triads violates the triangle rule.
double wigner_6j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt j4, HalfInt j5, HalfInt j6);

/// Fine/hyperfine quantum numbers needed to reduce <F||d||F0> to <J||d||S>.
struct ReducedDipoleContext {
  HalfInt J = half(3);  // excited fine-structure level
  HalfInt S = half(1);  // ground electronic angular momentum
  HalfInt I = half(5);  // nuclear spin
  double gamma = 1.0;   // decay-rate scale, frequency unit of the whole model

  void validate() const;
};

/// <F||d||F0> in units of <J||d||S>.
double reduced_dipole(HalfInt F, HalfInt F0, const ReducedDipoleContext& ctx);

/// <F M| d_q |F0 M0> in units of <J||d||S>, via the Wigner-Eckart theorem.
double dipole_element(HalfInt F, HalfInt M, int q, HalfInt F0, HalfInt M0,
                      const ReducedDipoleContext& ctx);

/// Number of entries currently held in the coefficient caches (CG + 6j).
std::size_t angular_cache_size();

}  // namespace rsc
