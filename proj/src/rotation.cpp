#include "dme/rotation.hpp"

#include <cmath>
#include <stdexcept>

namespace dme {

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

Vector pad_to_power_of_two(const Vector& x) {
  Vector padded = x;
  padded.resize(next_power_of_two(x.size()), 0.0);
  return padded;
}

void fwht_in_place(std::span<double> x) {
  const std::size_t d = x.size();
  if (!is_power_of_two(d)) {
    throw std::invalid_argument("fwht: dimension must be a power of 2");
  }
  for (std::size_t half = 1; half < d; half <<= 1) {
    for (std::size_t block = 0; block < d; block += half << 1) {
      for (std::size_t i = block; i < block + half; ++i) {
        const double a = x[i];
        const double b = x[i + half];
        x[i] = a + b;
        x[i + half] = a - b;
      }
    }
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (double& v : x) v *= scale;
}

Vector fwht(Vector x) {
  fwht_in_place(x);
  return x;
}

Vector rotate(const Vector& x, const SignVector& signs) {
  if (x.size() != signs.size()) {
    throw std::invalid_argument("rotate: dimension mismatch");
  }
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * signs[i];
  fwht_in_place(out);
  return out;
}

Vector rotate_inverse(const Vector& y, const SignVector& signs) {
  if (y.size() != signs.size()) {
    throw std::invalid_argument("rotate_inverse: dimension mismatch");
  }
  Vector out = fwht(y);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= signs[i];
  return out;
}

}  // namespace dme
