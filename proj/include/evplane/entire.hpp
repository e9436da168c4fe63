#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "evplane/geodesic.hpp"

namespace evplane {

/// One 2x2 cell a I + b J = [[a, b], [-b, a]] with eigenvalues a +- ib.
struct RotationCell {
  double a;
  double b;
};

/// A frequency block of the odd-dimension construction: lambda repeated on
/// 2 * cells.size() diagonal slots, paired with a block-diagonal B_i of cells.
struct FrequencyBlock {
  double lambda;
  std::optional<Rational> exact;  ///< exact value of lambda when rational
  std::vector<RotationCell> cells;
};

/// Block data (lambda_i I_{d_i}, B_i) of an entire pair. Validated on construction:
/// distinct lambdas, nonzero cell b, sum of d_i <= min(n - 1, m).
class BlockSpec {
 public:
  BlockSpec(int n, int m, std::vector<FrequencyBlock> blocks);

  int n() const noexcept { return n_; }
  int m() const noexcept { return m_; }
  const std::vector<FrequencyBlock>& blocks() const noexcept { return blocks_; }

 private:
  int n_;
  int m_;
  std::vector<FrequencyBlock> blocks_;
};

struct EntirePair {
  SpectralBlock spectral;
  Mat b;
};

/// Realizes (Lambda~, B) from block data. Blocks are laid out in increasing
/// lambda order; B is zero outside the leading s x s block.
EntirePair build_odd_pair(const BlockSpec& spec);

/// True iff the 2x2 cell has no real eigenvalues (trace^2 < 4 det).
bool char_poly_positive_2x2(const Mat& cell);

/// det(cos(Lambda~ t) + B^T sin(Lambda~ t)), the chart determinant of the
/// closed-form solution up to the positive factor det M.
double positivity_determinant(const SpectralBlock& spec, const Mat& b, double t);

/// Smallest T > 0 with lambda_i T in 2 pi Z for all i; requires rational
/// lambdas. For r = 0 returns 2 pi.
double common_period(const SpectralBlock& spec);

enum class PositivityVerdict { entire_certified_on_interval, violation_found };

struct PositivityReport {
  double min_det;
  double argmin_t;
  std::pair<double, double> scanned_interval;
  bool periodic;
  PositivityVerdict verdict;
};

inline constexpr int kDefaultScanPoints = 4096;
inline constexpr int kMinScanPoints = 16;
/// Minima at or below this fraction of max |det| on the grid count as roots
/// (a tangential zero such as cos^2 never samples negative).
inline constexpr double kPositivityMargin = 1e-12;

/// Scans the positivity determinant on a uniform grid, refines each grid
/// local minimum by golden-section search to width 1e-10 and reports the
/// smallest value found. Certified iff that value exceeds kPositivityMargin
/// times the largest |det| on the grid. Without an interval the exact common period is
/// scanned (rational lambdas required) and the report is periodic.
PositivityReport positivity_scan(const SpectralBlock& spec, const Mat& b,
                                 std::optional<std::pair<double, double>> interval = std::nullopt,
                                 int grid_points = kDefaultScanPoints);

/// pi / (2 lambda_r), where the tan family leaves the chart; nullopt when r = 0.
std::optional<double> tan_blow_up_time(const SpectralBlock& spec);

}  // namespace evplane
