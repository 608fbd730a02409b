#ifndef EVSLIP_SAE_HPP
#define EVSLIP_SAE_HPP

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "evslip/event.hpp"

namespace evslip {

/// Per-pixel timestamp of the most recent event. Rows index y, columns x.
/// Both polarities update the surface identically. Timestamps are nonnegative.
class SurfaceOfActiveEvents {
 public:
  using Grid = Eigen::Matrix<TimeUs, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  static constexpr TimeUs kEmpty = -1;

  explicit SurfaceOfActiveEvents(SensorGeometry geometry = {});

  void update(const Event& e) noexcept {
    grid_(e.y, e.x) = e.t;
    if (e.t > newest_) newest_ = e.t;
  }

  std::optional<TimeUs> at(int x, int y) const {
    const TimeUs t = grid_(y, x);
    if (t == kEmpty) return std::nullopt;
    return t;
  }

  /// Raw cell value, kEmpty when the pixel never fired.
  TimeUs raw(int x, int y) const noexcept { return grid_(y, x); }

  void reset() noexcept;

  std::size_t populated_count() const noexcept;
  std::optional<TimeUs> newest() const noexcept {
    if (newest_ == kEmpty) return std::nullopt;
    return newest_;
  }

  const SensorGeometry& geometry() const noexcept { return geometry_; }
  const Grid& grid() const noexcept { return grid_; }

  friend bool operator==(const SurfaceOfActiveEvents& a, const SurfaceOfActiveEvents& b) {
    return a.geometry_.width == b.geometry_.width && a.geometry_.height == b.geometry_.height &&
           a.grid_ == b.grid_;
  }

 private:
  SensorGeometry geometry_;
  Grid grid_;
  TimeUs newest_ = kEmpty;
};

/// Functional form of the surface update; returns the updated copy.
SurfaceOfActiveEvents sae_update(SurfaceOfActiveEvents sae, const Event& e);

/// side x side window of {0,1}; bits(r, c) covers pixel (cx - h + c, cy - h + r).
struct BinaryPatch {
  using Bits = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

  int side = 0;
  Bits bits;

  int ones() const { return bits.cast<int>().sum(); }
  int half() const noexcept { return side / 2; }
};

/// Marks the `n_latest` newest populated cells of the window centred on
/// (cx, cy). Ties in timestamp go to the cell nearer the centre, then to the
/// earlier row-major position. Cells outside the sensor read as absent.
///
/// Holds scratch buffers so the per-event path does not allocate. An age
/// cutoff, remembered per sensor tile, narrows the window to a few more than
/// n_latest candidates; the surplus is then trimmed by the full ordering key.
class PatchBinarizer {
 public:
  PatchBinarizer(int side, int n_latest);

  void binarize(const SurfaceOfActiveEvents& sae, int cx, int cy, BinaryPatch& out);

  /// Row-major indices of the marked cells without writing a patch; valid
  /// until the next call.
  std::span<const int> select(const SurfaceOfActiveEvents& sae, int cx, int cy);

  /// Writes the last selection into a patch.
  void mark(BinaryPatch& out) const;

  /// Row-major indices of the cells marked by the last binarize() call.
  std::span<const int> selected() const noexcept { return {selected_.data(), selected_.size()}; }

  int side() const noexcept { return side_; }
  int n_latest() const noexcept { return n_latest_; }

 private:
  void trim(const SurfaceOfActiveEvents& sae, int x0, int y0, int c);

  int side_;
  int n_latest_;
  int cells_;
  std::vector<int> rank_;    // cell index -> rank among equal timestamps
  std::vector<int> offset_;  // cell index -> storage offset in BinaryPatch::bits
  std::vector<int> row_of_;
  std::vector<int> col_of_;
  // Last age cutoff per 4 x 4 pixel tile, hashed into a fixed table.
  static constexpr int kTiles = 4096;
  std::array<TimeUs, kTiles> cutoff_;

  // Per-call scratch: surviving cells and their ordering keys.
  std::vector<TimeUs> key_;
  std::vector<int> cand_;
  std::vector<int> selected_;
};

BinaryPatch binarized_patch(const SurfaceOfActiveEvents& sae, int cx, int cy, int side = 9,
                            int n_latest = 20);

}  // namespace evslip

#endif  // EVSLIP_SAE_HPP
