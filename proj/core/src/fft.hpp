#pragma once

#include "fracheat/field.hpp"

namespace fracheat::detail {

// Unnormalized in-place DFT of every row; sign -1 forward, +1 inverse.
void dft_rows(ModeMatrix& data, int sign);
void dft_inplace(cplx* data, int n, int sign);

}  // namespace fracheat::detail
