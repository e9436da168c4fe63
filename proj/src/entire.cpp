#include "evplane/entire.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace evplane {

BlockSpec::BlockSpec(int n, int m, std::vector<FrequencyBlock> blocks)
    : n_(n), m_(m), blocks_(std::move(blocks)) {
  if (n < 2 || m < 1) throw InvalidArgument("BlockSpec: need n >= 2 and m >= 1");
  std::size_t total = 0;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const FrequencyBlock& blk = blocks_[i];
    if (blk.exact) {
      if (blk.exact->den == 0) throw InvalidArgument("BlockSpec: zero denominator");
      blocks_[i].lambda = blk.exact->value();
    }
    if (!std::isfinite(blk.lambda) || blk.lambda <= 0.0) {
      throw InvalidArgument("BlockSpec: block lambdas must be positive");
    }
    if (blk.cells.empty()) throw InvalidArgument("BlockSpec: a block needs at least one cell");
    for (const RotationCell& c : blk.cells) {
      if (!std::isfinite(c.a) || !std::isfinite(c.b) || c.b == 0.0) {
        throw InvalidArgument("BlockSpec: cell b must be nonzero (a I has real eigenvalues)");
      }
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (blocks_[j].lambda == blk.lambda) throw InvalidArgument("BlockSpec: lambdas must be distinct");
    }
    total += 2 * blk.cells.size();
  }
  if (total > static_cast<std::size_t>(std::min(n - 1, m))) {
    throw InvalidArgument("BlockSpec: total block size exceeds min(n - 1, m)");
  }
}

EntirePair build_odd_pair(const BlockSpec& spec) {
  std::vector<const FrequencyBlock*> order;
  for (const FrequencyBlock& b : spec.blocks()) order.push_back(&b);
  std::stable_sort(order.begin(), order.end(),
                   [](const FrequencyBlock* x, const FrequencyBlock* y) { return x->lambda < y->lambda; });

  const bool all_rational =
      std::all_of(order.begin(), order.end(), [](const FrequencyBlock* b) { return b->exact.has_value(); });

  Mat b(static_cast<std::size_t>(spec.n() - 1), static_cast<std::size_t>(spec.m()));
  std::vector<double> lambdas;
  std::vector<Rational> exact;
  std::size_t offset = 0;
  for (const FrequencyBlock* blk : order) {
    for (const RotationCell& c : blk->cells) {
      const Mat cell{{c.a, c.b}, {-c.b, c.a}};
      if (!char_poly_positive_2x2(cell)) {
        throw InvalidArgument("build_odd_pair: cell has real eigenvalues");
      }
      b.set_block(offset, offset, cell);
      offset += 2;
      for (int k = 0; k < 2; ++k) {
        lambdas.push_back(blk->lambda);
        if (all_rational) exact.push_back(*blk->exact);
      }
    }
  }
  if (all_rational) {
    return {SpectralBlock::from_rationals(spec.n(), spec.m(), std::move(exact)), std::move(b)};
  }
  return {SpectralBlock(spec.n(), spec.m(), std::move(lambdas)), std::move(b)};
}

bool char_poly_positive_2x2(const Mat& cell) {
  if (cell.rows() != 2 || cell.cols() != 2) throw InvalidArgument("char_poly_positive_2x2: need a 2x2 matrix");
  const double tr = cell(0, 0) + cell(1, 1);
  const double det = cell(0, 0) * cell(1, 1) - cell(0, 1) * cell(1, 0);
  return tr * tr < 4.0 * det;
}

double positivity_determinant(const SpectralBlock& spec, const Mat& b, double t) {
  if (b.rows() != spec.rows() || b.cols() != spec.cols()) {
    throw InvalidArgument("positivity_determinant: B must be (n-1) x m");
  }
  return determinant(spec.cos_block(t) + b.transpose() * spec.sin_block(t));
}

double common_period(const SpectralBlock& spec) {
  if (spec.r() == 0) return 2.0 * std::numbers::pi;
  if (!spec.rationals()) {
    throw InvalidArgument("common_period: lambdas must be given as rationals");
  }
  // T = 2 pi s with s the least positive rational such that s * p_i / q_i is an
  // integer for every i: s = lcm(q_i) / gcd(p_i).
  std::int64_t num_gcd = 0, den_lcm = 1;
  for (const Rational& q : *spec.rationals()) {
    num_gcd = std::gcd(num_gcd, q.num);
    den_lcm = std::lcm(den_lcm, q.den);
  }
  return 2.0 * std::numbers::pi * static_cast<double>(den_lcm) / static_cast<double>(num_gcd);
}

namespace {

struct Minimum {
  double t;
  double value;
};

Minimum golden_section(const SpectralBlock& spec, const Mat& b, double lo, double hi) {
  constexpr double inv_phi = 0.6180339887498949;
  auto f = [&](double t) { return positivity_determinant(spec, b, t); };
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > 1e-10) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? Minimum{x1, f1} : Minimum{x2, f2};
}

}  // namespace

PositivityReport positivity_scan(const SpectralBlock& spec, const Mat& b,
                                 std::optional<std::pair<double, double>> interval,
                                 int grid_points) {
  if (grid_points < kMinScanPoints) {
    throw InvalidArgument("positivity_scan: grid_points must be >= 16");
  }
  const bool periodic = !interval.has_value();
  const auto [lo, hi] = interval ? *interval : std::pair{0.0, common_period(spec)};
  if (!(hi > lo)) throw InvalidArgument("positivity_scan: empty interval");

  const auto count = static_cast<std::size_t>(grid_points);
  const double h = (hi - lo) / static_cast<double>(count - 1);
  std::vector<double> values(count);
  for (std::size_t k = 0; k < count; ++k) {
    values[k] = positivity_determinant(spec, b, lo + h * static_cast<double>(k));
  }

  double scale = 1.0;
  for (double v : values) scale = std::max(scale, std::abs(v));

  Minimum best{lo, values[0]};
  for (std::size_t k = 0; k < count; ++k) {
    const double t = lo + h * static_cast<double>(k);
    if (values[k] < best.value) best = {t, values[k]};
    const bool left_ok = k == 0 || values[k] <= values[k - 1];
    const bool right_ok = k + 1 == count || values[k] <= values[k + 1];
    if (!left_ok || !right_ok) continue;
    const Minimum refined =
        golden_section(spec, b, std::max(lo, t - h), std::min(hi, t + h));
    if (refined.value < best.value) best = refined;
  }

  return {best.value, best.t, {lo, hi}, periodic,
          best.value > kPositivityMargin * scale ? PositivityVerdict::entire_certified_on_interval
                           : PositivityVerdict::violation_found};
}

std::optional<double> tan_blow_up_time(const SpectralBlock& spec) {
  if (spec.r() == 0) return std::nullopt;
  return std::numbers::pi / (2.0 * spec.lambdas().back());
}

}  // namespace evplane
