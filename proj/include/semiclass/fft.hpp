#pragma once

#include <complex>
#include <vector>

namespace semiclass {

// In-place multidimensional DFT on a row-major array with `dims` extents.
// sign = +1 computes sum_k c_k e^{+2 pi i k j / n}, sign = -1 the conjugate
// transform.  Unnormalized.  Plan creation is serialized internally.
void dft(std::vector<std::complex<double>>& data, const std::vector<int>& dims, int sign);

}  // namespace semiclass
