#pragma once

// Seed derivation and random matrices. Every random draw in the library goes
// through an Rng constructed from derive_seed(root, stream, index), so one root
// seed determines every result.

#include <cstdint>
#include <random>
#include <string_view>

#include "lppl/local_ops.hpp"

namespace lppl {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// FNV-1a of a stream tag.
constexpr std::uint64_t tag_hash(std::string_view tag) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Child seed of `root` for the named stream and index.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index = 0) noexcept {
  return mix64(mix64(root ^ tag_hash(stream)) + index);
}

inline Complex complex_gaussian(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

inline Matrix random_complex_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = complex_gaussian(rng);
  return m;
}

/// (G + G^dagger) / 2 with complex Gaussian G.
inline Matrix random_hermitian(Eigen::Index d, Rng& rng) {
  Matrix g = random_complex_matrix(d, d, rng);
  return 0.5 * (g + g.adjoint());
}

/// Normalized complex Gaussian vector.
inline Vector random_unit_vector(Eigen::Index n, Rng& rng) {
  Vector v = random_complex_matrix(n, 1, rng).col(0);
  return v / v.norm();
}

} // namespace lppl
