#pragma once

#include <span>

#include "cpafdm/types.hpp"

namespace cpafdm::fft {

// Unitary (1/sqrt(N)) DFT, in place. Safe to call concurrently: plans are
// created once per (size, direction) under a lock and executed on caller
// buffers.
void forward_unitary(std::span<cd> data);
void inverse_unitary(std::span<cd> data);

// Unnormalized forward DFT: X[k] = sum_n x[n] exp(-j 2 pi k n / N).
void forward_raw(std::span<cd> data);

}  // namespace cpafdm::fft
