#pragma once
// Generators and independent oracles shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "evplane/entire.hpp"
#include "evplane/geodesic.hpp"
#include "evplane/graph.hpp"
#include "evplane/matlin.hpp"

namespace support {

using evplane::Mat;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  double normal() {
    // Box-Muller keeps the stream platform independent.
    const double u = uniform(1e-300, 1.0), v = uniform(0.0, 1.0);
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
  }

 private:
  std::mt19937_64 engine_;
};

inline Mat random_mat(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  Mat a(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) a(i, j) = scale * rng.uniform(-1.0, 1.0);
  return a;
}

// Modified Gram-Schmidt on a Gaussian matrix, run twice for a clean Q.
inline Mat random_orthogonal(Rng& rng, std::size_t n) {
  Mat a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = rng.normal();
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < j; ++k) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += a(i, j) * a(i, k);
        for (std::size_t i = 0; i < n; ++i) a(i, j) -= dot * a(i, k);
      }
      double norm = 0.0;
      for (std::size_t i = 0; i < n; ++i) norm += a(i, j) * a(i, j);
      norm = std::sqrt(norm);
      for (std::size_t i = 0; i < n; ++i) a(i, j) /= norm;
    }
  }
  return a;
}

inline Mat random_spd(Rng& rng, std::size_t n) {
  const Mat a = random_mat(rng, n, n);
  return a * a.transpose() + 0.5 * Mat::identity(n);
}

// Textbook triple loop.
inline Mat naive_matmul(const Mat& a, const Mat& b) {
  Mat c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

// Laplace expansion along the first row.
inline double cofactor_det(const Mat& a) {
  const std::size_t n = a.rows();
  if (n == 1) return a(0, 0);
  double det = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    Mat minor(n - 1, n - 1);
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t k = 0, col = 0; k < n; ++k)
        if (k != j) minor(i - 1, col++) = a(i, k);
    det += ((j % 2 == 0) ? 1.0 : -1.0) * a(0, j) * cofactor_det(minor);
  }
  return det;
}

// Random entire pair from the odd-dimension construction with n-1, m <= max_dim.
inline evplane::EntirePair random_entire_pair(Rng& rng, int max_dim = 6, int max_num = 5) {
  for (;;) {
    const int k = rng.integer(2, max_dim);
    const int m = rng.integer(2, max_dim);
    const int slots = std::min(k, m) / 2;
    const int cells = rng.integer(1, slots);
    const int nblocks = rng.integer(1, cells);
    std::vector<evplane::FrequencyBlock> blocks;
    std::set<std::pair<std::int64_t, std::int64_t>> used;
    int remaining = cells;
    bool ok = true;
    for (int b = 0; b < nblocks; ++b) {
      const int here = b + 1 == nblocks ? remaining : rng.integer(1, remaining - (nblocks - b - 1));
      remaining -= here;
      std::int64_t p = rng.integer(1, max_num), q = rng.integer(1, 4);
      const std::int64_t g = std::gcd(p, q);
      p /= g;
      q /= g;
      if (!used.insert({p, q}).second) {
        ok = false;
        break;
      }
      evplane::FrequencyBlock blk{static_cast<double>(p) / static_cast<double>(q),
                                  evplane::Rational{p, q},
                                  {}};
      for (int c = 0; c < here; ++c) {
        const double mag = rng.uniform(0.2, 2.0);
        blk.cells.push_back({rng.uniform(-2.0, 2.0), rng.integer(0, 1) ? mag : -mag});
      }
      blocks.push_back(std::move(blk));
    }
    if (!ok) continue;
    return evplane::build_odd_pair(evplane::BlockSpec(k + 1, m, std::move(blocks)));
  }
}

// Random spectral block and unconstrained B with n-1, m <= max_dim. Not entire in general.
inline evplane::EntirePair random_pair(Rng& rng, int max_dim = 6) {
  const int k = rng.integer(1, max_dim);
  const int m = rng.integer(1, max_dim);
  const int r = rng.integer(0, std::min(k, m));
  std::vector<double> lambdas;
  for (int i = 0; i < r; ++i) lambdas.push_back(rng.uniform(0.1, 2.0));
  std::sort(lambdas.begin(), lambdas.end());
  return {evplane::SpectralBlock(k + 1, m, std::move(lambdas)),
          random_mat(rng, static_cast<std::size_t>(k), static_cast<std::size_t>(m))};
}

// An arbitrary (not necessarily geodesic) jet.
inline evplane::CurveJet random_jet(Rng& rng, std::size_t rows, std::size_t cols, double t = 0.3) {
  return evplane::CurveJet(t, random_mat(rng, rows, cols), random_mat(rng, rows, cols),
                           random_mat(rng, rows, cols));
}

inline evplane::AnsatzPoint random_point(Rng& rng, std::size_t dims, double half_width, double t) {
  evplane::AnsatzPoint p{std::vector<double>(dims), t};
  for (double& x : p.x) x = rng.uniform(-half_width, half_width);
  return p;
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace support
