#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dme/random.hpp"
#include "dme/types.hpp"

namespace dme {

constexpr bool is_power_of_two(std::size_t n) {
  return n != 0 && (n & (n - 1)) == 0;
}

std::size_t next_power_of_two(std::size_t n);

/// Zero-pads x to the next power-of-two length (no-op if already one).
Vector pad_to_power_of_two(const Vector& x);

/// In-place normalized fast Walsh-Hadamard transform: x <- (1/sqrt(d)) H x.
/// O(d log d), norm-preserving. Throws if the length is not a power of 2.
void fwht_in_place(std::span<double> x);

Vector fwht(Vector x);

/// R x with R = (1/sqrt(d)) H D, D = diag(signs).
Vector rotate(const Vector& x, const SignVector& signs);

/// R^{-1} y = D (1/sqrt(d)) H y, using H^2 = d I.
Vector rotate_inverse(const Vector& y, const SignVector& signs);

}  // namespace dme
