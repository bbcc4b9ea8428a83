#include "vmath.hpp"

#include <cstdint>
#include <cstring>

namespace flowmap::vmath {
namespace {

using v8 = double __attribute__((vector_size(64)));
using v8i = std::int64_t __attribute__((vector_size(64)));

// pi/2 split for Cody-Waite reduction.
constexpr double kPio2Hi = 1.57079625129699707031e0;
constexpr double kPio2Mid = 7.54978941586159635335e-8;
constexpr double kPio2Lo = 5.39030285815811905290e-15;
constexpr double kTwoOverPi = 0.63661977236758134308;
constexpr double kRoundMagic = 6755399441055744.0;  // 1.5 * 2^52

// Minimax coefficients on [-pi/4, pi/4] (Cephes sin.c).
constexpr double kS[] = {1.58962301576546568060e-10, -2.50507477628578072866e-8,
                         2.75573136213857245213e-6,  -1.98412698295895385996e-4,
                         8.33333333332211858878e-3,  -1.66666666666666307295e-1};
constexpr double kC[] = {-1.13585365213876817300e-11, 2.08757008419747316778e-9,
                         -2.75573141792967388112e-7,  2.48015872888517045348e-5,
                         -1.38888888888730564116e-3,  4.16666666666665929218e-2};

inline v8 poly(const double (&c)[6], v8 x) {
  v8 p = c[0] + v8{};
  for (int i = 1; i < 6; ++i) p = p * x + c[i];
  return p;
}

// sin(x) when shift == 0, cos(x) when shift == 1.
inline v8 sin_quadrant(v8 x, std::int64_t shift) {
  const v8 biased = x * kTwoOverPi + kRoundMagic;
  const v8 q = biased - kRoundMagic;
  v8i quadrant;
  std::memcpy(&quadrant, &biased, sizeof quadrant);
  quadrant += shift;

  v8 r = x - q * kPio2Hi;
  r = r - q * kPio2Mid;
  r = r - q * kPio2Lo;
  const v8 r2 = r * r;
  const v8 s = r + r * r2 * poly(kS, r2);
  const v8 c = 1.0 - 0.5 * r2 + r2 * r2 * poly(kC, r2);

  const v8i use_cos = (quadrant & 1) != 0;
  v8 out = use_cos ? c : s;
  const v8i negate = (quadrant & 2) << 62;
  v8i bits;
  std::memcpy(&bits, &out, sizeof bits);
  bits ^= negate;
  std::memcpy(&out, &bits, sizeof out);
  return out;
}

template <std::int64_t Shift>
void apply(const double* z, double* out, std::size_t n, double omega) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    v8 x;
    std::memcpy(&x, z + i, sizeof x);
    const v8 y = sin_quadrant(x * omega, Shift);
    std::memcpy(out + i, &y, sizeof y);
  }
  if (i < n) {
    double buf[8] = {};
    std::memcpy(buf, z + i, (n - i) * sizeof(double));
    v8 x;
    std::memcpy(&x, buf, sizeof x);
    const v8 y = sin_quadrant(x * omega, Shift);
    std::memcpy(buf, &y, sizeof y);
    std::memcpy(out + i, buf, (n - i) * sizeof(double));
  }
}

}  // namespace

void sin_scaled(const double* z, double* out, std::size_t n, double omega) { apply<0>(z, out, n, omega); }

void cos_scaled(const double* z, double* out, std::size_t n, double omega) { apply<1>(z, out, n, omega); }

}  // namespace flowmap::vmath
