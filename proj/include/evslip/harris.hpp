#ifndef EVSLIP_HARRIS_HPP
#define EVSLIP_HARRIS_HPP

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "evslip/labeled_event.hpp"
#include "evslip/sae.hpp"

namespace evslip {

/// Thresholds are inclusive: score >= corner_threshold is a corner,
/// score <= edge_threshold an edge.
struct HarrisParams {
  int patch_side = 9;
  int n_latest = 20;
  double corner_threshold = 10.0;
  double edge_threshold = -0.01;
  double harris_k = 0.04;
  double gaussian_sigma = 1.5;

  void validate() const;
};

/// Gaussian window over the patch, normalised to unit sum.
///
/// The window weight only depends on the offset (|dr|, |dc|) from the centre,
/// so the squared gradients are summed exactly as integers per offset class
/// and weighted once per class. Each cell's gradient products come from a
/// table indexed by its 3x3 neighbourhood, read off row bitmasks. Sides up
/// to 19 fit the bitmask layout.
template <typename Scalar>
class HarrisKernel {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  explicit HarrisKernel(const HarrisParams& params)
      : side_(params.patch_side), k_(static_cast<Scalar>(params.harris_k)) {
    params.validate();
    const int h = side_ / 2;
    const Scalar two_sigma2 = Scalar(2) * Scalar(params.gaussian_sigma * params.gaussian_sigma);
    weights_.resize(side_, side_);
    for (int r = 0; r < side_; ++r)
      for (int c = 0; c < side_; ++c)
        weights_(r, c) = std::exp(-Scalar((r - h) * (r - h) + (c - h) * (c - h)) / two_sigma2);
    weights_ /= weights_.sum();

    // Class of offset (i, j) with i <= j is j (j + 1) / 2 + i.
    const int classes = (h + 1) * (h + 2) / 2;
    class_of_.resize(side_ * side_);
    class_weight_.resize(classes);
    for (int r = 0; r < side_; ++r)
      for (int c = 0; c < side_; ++c) {
        const int i = std::min(std::abs(r - h), std::abs(c - h));
        const int j = std::max(std::abs(r - h), std::abs(c - h));
        class_of_[r * side_ + c] = j * (j + 1) / 2 + i;
        class_weight_(j * (j + 1) / 2 + i) = weights_(r, c);
      }
    sums_.resize(classes);
    rows_.resize(side_ + 2);
    row_of_.resize(side_ * side_);
    bit_of_.resize(side_ * side_);
    for (int i = 0; i < side_ * side_; ++i) {
      row_of_[i] = i / side_ + 1;
      bit_of_[i] = std::uint64_t(1) << (i % side_ + 1);
    }
  }

  /// det(M) - k trace(M)^2 for the Gaussian-weighted structure tensor M of
  /// the 3x3 Sobel gradients. Cells beyond the patch border read as zero.
  Scalar score(const BinaryPatch& patch) {
    if (patch.side != side_) throw std::invalid_argument("patch side does not match kernel");
    cells_.clear();
    for (int r = 0; r < side_; ++r)
      for (int c = 0; c < side_; ++c)
        if (patch.bits(r, c)) cells_.push_back(r * side_ + c);
    return score_cells(cells_);
  }

  /// Same score from the row-major indices of the set cells.
  Scalar score_cells(std::span<const int> cells) {
    // Row r + 1 holds patch row r, bit c + 1 its column c; the rest is border.
    std::fill(rows_.begin(), rows_.end(), 0);
    for (const int index : cells) rows_[row_of_[index]] |= bit_of_[index];
    std::fill(sums_.begin(), sums_.end(), 0);
    if (side_ == 9) accumulate<9>();
    else accumulate<0>();
    Scalar a = 0, b = 0, c = 0;
    for (Eigen::Index k = 0; k < class_weight_.size(); ++k) {
      const std::int64_t v = sums_[k];
      a += class_weight_(k) * Scalar(v & 0xffff);
      b += class_weight_(k) * Scalar((v >> 16) & 0xffff);
      c += class_weight_(k) * Scalar(v >> 32);
    }
    const Scalar trace = a + b;
    return a * b - c * c - k_ * trace * trace;
  }

  const Matrix& weights() const noexcept { return weights_; }

 private:
  // Adds each cell's table entry to its class. The three rows around a cell
  // sit 21 bits apart in one word; the multiply gathers the 3x3 block into
  // a 9-bit index without carries. W > 0 fixes the side at compile time.
  template <int W>
  void accumulate() {
    const int side = W > 0 ? W : side_;
    constexpr std::uint64_t kBlock = 7 | (7ull << 21) | (7ull << 42);
    constexpr std::uint64_t kGather = 1 | (1ull << 18) | (1ull << 36);
    const int* cls = class_of_.data();
    for (int r = 0; r < side; ++r) {
      std::uint64_t word = rows_[r] | rows_[r + 1] << 21 | rows_[r + 2] << 42;
      if (word == 0) {
        cls += side;
        continue;
      }
      for (int c = 0; c < side; ++c, ++cls, word >>= 1)
        sums_[*cls] += kProducts[((word & kBlock) * kGather) >> 36 & 511];
    }
  }

  // gx^2 + gy^2 << 16 + gx gy << 32 for each 3x3 neighbourhood; bit 3 dr + dc
  // of the index is the cell at row offset dr - 1 and column offset dc - 1.
  // gx is the right column minus the left, gy the lower row minus the upper,
  // both weighted 1, 2, 1.
  static constexpr std::array<std::int64_t, 512> kProducts = [] {
    std::array<std::int64_t, 512> t{};
    for (int nb = 0; nb < 512; ++nb) {
      auto bit = [nb](int dr, int dc) { return (nb >> (3 * dr + dc)) & 1; };
      const std::int64_t gx = bit(0, 2) + 2 * bit(1, 2) + bit(2, 2) - bit(0, 0) - 2 * bit(1, 0) - bit(2, 0);
      const std::int64_t gy = bit(2, 0) + 2 * bit(2, 1) + bit(2, 2) - bit(0, 0) - 2 * bit(0, 1) - bit(0, 2);
      t[nb] = gx * gx + (gy * gy << 16) + gx * gy * (std::int64_t(1) << 32);
    }
    return t;
  }();

  int side_;
  Scalar k_;
  Matrix weights_;
  Eigen::Array<Scalar, Eigen::Dynamic, 1> class_weight_;
  std::vector<int> class_of_;
  std::vector<std::int64_t> sums_;
  std::vector<std::uint64_t> rows_;
  std::vector<int> row_of_;
  std::vector<std::uint64_t> bit_of_;
  std::vector<int> cells_;
};

template <typename Scalar = double>
Scalar harris_score(const BinaryPatch& patch, const HarrisParams& params) {
  HarrisKernel<Scalar> kernel(params);
  return kernel.score(patch);
}

FeatureClass classify_event(double score, const HarrisParams& params) noexcept;

struct FeatureDecision {
  FeatureClass label = FeatureClass::Flat;
  double score = 0.0;
};

/// Event-by-event classifier over the surface of active events. The surface
/// already contains the event when classify() is called.
class FeatureDetector {
 public:
  virtual ~FeatureDetector() = default;
  virtual FeatureDecision classify(const Event& e, const SurfaceOfActiveEvents& sae) = 0;
};

class EHarrisDetector final : public FeatureDetector {
 public:
  explicit EHarrisDetector(HarrisParams params = {});

  FeatureDecision classify(const Event& e, const SurfaceOfActiveEvents& sae) override;

  const HarrisParams& params() const noexcept { return params_; }
  /// Patch used by the most recent classify() call.
  BinaryPatch last_patch() const {
    BinaryPatch p;
    binarizer_.mark(p);
    return p;
  }

 private:
  HarrisParams params_;
  PatchBinarizer binarizer_;
  HarrisKernel<double> kernel_;
};

class NotImplemented : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Placeholders for the comparison detectors; classify() throws NotImplemented.
class EFastDetector final : public FeatureDetector {
 public:
  FeatureDecision classify(const Event& e, const SurfaceOfActiveEvents& sae) override;
};

class ArcStarDetector final : public FeatureDetector {
 public:
  FeatureDecision classify(const Event& e, const SurfaceOfActiveEvents& sae) override;
};

/// Owns the surface and a detector; updates the surface with each event
/// before classifying it.
class EventLabeler {
 public:
  explicit EventLabeler(SensorGeometry geometry = {}, HarrisParams params = {});
  EventLabeler(SensorGeometry geometry, std::unique_ptr<FeatureDetector> detector);

  LabeledEvent process(const Event& e) {
    sae_.update(e);
    const FeatureDecision d = detector_->classify(e, sae_);
    return {e, d.label, d.score};
  }

  SurfaceOfActiveEvents& sae() noexcept { return sae_; }
  const SurfaceOfActiveEvents& sae() const noexcept { return sae_; }
  void reset_surface() noexcept { sae_.reset(); }

 private:
  SurfaceOfActiveEvents sae_;
  std::unique_ptr<FeatureDetector> detector_;
};

/// Labels a whole stream with e-Harris, updating `sae` in place.
std::vector<LabeledEvent> label_stream(std::span<const Event> events, SurfaceOfActiveEvents& sae,
                                       const HarrisParams& params = {});

}  // namespace evslip

#endif  // EVSLIP_HARRIS_HPP
