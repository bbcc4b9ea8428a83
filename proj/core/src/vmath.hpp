#pragma once

// Vectorised sine/cosine for the activation layers. Every element runs
// through the same 8-lane code path (tails are zero-padded), so results do
// not depend on an element's position in a buffer.

#include <cstddef>

namespace flowmap::vmath {

/// out[i] = sin(omega * z[i]).
void sin_scaled(const double* z, double* out, std::size_t n, double omega);
/// out[i] = cos(omega * z[i]).
void cos_scaled(const double* z, double* out, std::size_t n, double omega);

}  // namespace flowmap::vmath
