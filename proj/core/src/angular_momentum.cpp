#include "rsc/angular_momentum.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace rsc {

namespace {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

cpp_int fact(int n) {
  static std::mutex mutex;
  static std::vector<cpp_int> table{cpp_int(1)};
  if (n < 0) throw std::domain_error("factorial of a negative number");
  std::lock_guard lock(mutex);
  while (static_cast<int>(table.size()) <= n) {
    table.push_back(table.back() * static_cast<unsigned>(table.size()));
  }
  return table[static_cast<std::size_t>(n)];
}

// sign * sqrt(radicand) with both pieces exact.
struct SqrtRational {
  cpp_rational sum;
  cpp_rational radicand;

  double to_double() const {
    if (sum == 0 || radicand == 0) return 0.0;
    const double s = static_cast<double>(sum);
    const double r = static_cast<double>(radicand);
    return s * std::sqrt(r);
  }
};

using Key = std::array<int, 6>;

struct KeyHash {
  std::size_t operator()(const Key& k) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (int v : k) {
      h ^= static_cast<std::size_t>(v + 1024);
      h *= 1099511628211ull;
    }
    return h;
  }
};

class Memo {
 public:
  template <class F>
  double get(const Key& key, F&& compute) {
    {
      std::shared_lock lock(mutex_);
      auto it = table_.find(key);
      if (it != table_.end()) return it->second;
    }
    const double value = compute();
    std::unique_lock lock(mutex_);
    table_.emplace(key, value);
    return value;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return table_.size();
  }

 private:
  mutable std::shared_mutex mutex_;
  std::unordered_map<Key, double, KeyHash> table_;
};

Memo& cg_memo() {
  static Memo m;
  return m;
}

Memo& sixj_memo() {
  static Memo m;
  return m;
}

// All arguments below are integers equal to (sum of twice-values)/2.

double cg_exact(int tj1, int tm1, int tj2, int tm2, int tJ, int tM) {
  const int a = (tj1 + tj2 - tJ) / 2;
  const int b = (tj1 - tj2 + tJ) / 2;
  const int c = (-tj1 + tj2 + tJ) / 2;
  const int d = (tj1 + tj2 + tJ) / 2 + 1;

  SqrtRational r;
  r.radicand = cpp_rational(cpp_int(tJ + 1) * fact(a) * fact(b) * fact(c), fact(d));
  r.radicand *= cpp_rational(fact((tJ + tM) / 2) * fact((tJ - tM) / 2) * fact((tj1 - tm1) / 2) *
                             fact((tj1 + tm1) / 2) * fact((tj2 - tm2) / 2) * fact((tj2 + tm2) / 2));

  const int kmin = std::max({0, (tj2 - tJ - tm1) / 2, (tj1 - tJ + tm2) / 2});
  const int kmax = std::min({a, (tj1 - tm1) / 2, (tj2 + tm2) / 2});
  for (int k = kmin; k <= kmax; ++k) {
    cpp_int den = fact(k) * fact(a - k) * fact((tj1 - tm1) / 2 - k) * fact((tj2 + tm2) / 2 - k) *
                  fact((tJ - tj2 + tm1) / 2 + k) * fact((tJ - tj1 - tm2) / 2 + k);
    cpp_rational term(cpp_int(1), den);
    if (k % 2) r.sum -= term;
    else r.sum += term;
  }
  return r.to_double();
}

// Delta(abc)^2 from twice-values.
cpp_rational triangle_sq(int ta, int tb, int tc) {
  return cpp_rational(fact((ta + tb - tc) / 2) * fact((ta - tb + tc) / 2) * fact((-ta + tb + tc) / 2),
                      fact((ta + tb + tc) / 2 + 1));
}

double sixj_exact(int ta, int tb, int tc, int td, int te, int tf) {
  SqrtRational r;
  r.radicand = triangle_sq(ta, tb, tc) * triangle_sq(ta, te, tf) * triangle_sq(td, tb, tf) *
               triangle_sq(td, te, tc);
  const int s1 = (ta + tb + tc) / 2;
  const int s2 = (ta + te + tf) / 2;
  const int s3 = (td + tb + tf) / 2;
  const int s4 = (td + te + tc) / 2;
  const int p1 = (ta + tb + td + te) / 2;
  const int p2 = (tb + tc + te + tf) / 2;
  const int p3 = (tc + ta + tf + td) / 2;
  const int tmin = std::max({s1, s2, s3, s4});
  const int tmax = std::min({p1, p2, p3});
  for (int t = tmin; t <= tmax; ++t) {
    cpp_int den = fact(t - s1) * fact(t - s2) * fact(t - s3) * fact(t - s4) * fact(p1 - t) *
                  fact(p2 - t) * fact(p3 - t);
    cpp_rational term(fact(t + 1), den);
    if (t % 2) r.sum -= term;
    else r.sum += term;
  }
  return r.to_double();
}

}  // namespace

std::string HalfInt::str() const {
  if (twice_ % 2 == 0) return std::to_string(twice_ / 2);
  return std::to_string(twice_) + "/2";
}

int phase(HalfInt x) {
  if (!x.is_integer()) throw std::domain_error("phase (-1)^x needs integer x, got " + x.str());
  const int n = x.twice() / 2;
  return (n % 2 == 0) ? 1 : -1;
}

double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M) {
  if (m1 + m2 != M) return 0.0;
  if (!is_projection_of(m1, j1) || !is_projection_of(m2, j2) || !is_projection_of(M, J)) return 0.0;
  if (!triangle(j1, j2, J)) return 0.0;
  const Key key{j1.twice(), m1.twice(), j2.twice(), m2.twice(), J.twice(), M.twice()};
  return cg_memo().get(key, [&] {
    return cg_exact(j1.twice(), m1.twice(), j2.twice(), m2.twice(), J.twice(), M.twice());
  });
}

double wigner_6j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt j4, HalfInt j5, HalfInt j6) {
  if (!triangle(j1, j2, j3) || !triangle(j1, j5, j6) || !triangle(j4, j2, j6) ||
      !triangle(j4, j5, j3)) {
    return 0.0;
  }
  const Key key{j1.twice(), j2.twice(), j3.twice(), j4.twice(), j5.twice(), j6.twice()};
  return sixj_memo().get(key, [&] {
    return sixj_exact(j1.twice(), j2.twice(), j3.twice(), j4.twice(), j5.twice(), j6.twice());
  });
}

void ReducedDipoleContext::validate() const {
  if (S != half(1)) throw std::invalid_argument("ground electronic momentum must be S = 1/2");
  if (J != half(1) && J != half(3)) throw std::invalid_argument("excited level must be J = 1/2 or 3/2");
  if (I.twice() < 0) throw std::invalid_argument("nuclear spin must be non-negative");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
}

double reduced_dipole(HalfInt F, HalfInt F0, const ReducedDipoleContext& ctx) {
  if (!triangle(ctx.J, ctx.I, F) || !triangle(ctx.S, ctx.I, F0)) return 0.0;
  const double sixj = wigner_6j(ctx.S, ctx.I, F0, F, HalfInt(1), ctx.J);
  if (sixj == 0.0) return 0.0;
  const int sign = phase(F0 + ctx.J + ctx.I - HalfInt(1));
  return sign * std::sqrt(static_cast<double>((F.twice() + 1) * (F0.twice() + 1))) * sixj;
}

double dipole_element(HalfInt F, HalfInt M, int q, HalfInt F0, HalfInt M0,
                      const ReducedDipoleContext& ctx) {
  if (q < -1 || q > 1) throw std::invalid_argument("spherical component q must be -1, 0 or +1");
  if (M != M0 + HalfInt(q)) return 0.0;
  const double cg = clebsch_gordan(F0, M0, HalfInt(1), HalfInt(q), F, M);
  if (cg == 0.0) return 0.0;
  return reduced_dipole(F, F0, ctx) / std::sqrt(static_cast<double>(F.twice() + 1)) * cg;
}

std::size_t angular_cache_size() { return cg_memo().size() + sixj_memo().size(); }

}  // namespace rsc
