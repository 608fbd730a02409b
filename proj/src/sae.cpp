#include "evslip/sae.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace evslip {

SurfaceOfActiveEvents::SurfaceOfActiveEvents(SensorGeometry geometry) : geometry_(geometry) {
  geometry_.validate();
  grid_ = Grid::Constant(geometry_.height, geometry_.width, kEmpty);
}

void SurfaceOfActiveEvents::reset() noexcept {
  grid_.setConstant(kEmpty);
  newest_ = kEmpty;
}

std::size_t SurfaceOfActiveEvents::populated_count() const noexcept {
  return static_cast<std::size_t>((grid_.array() != kEmpty).count());
}

SurfaceOfActiveEvents sae_update(SurfaceOfActiveEvents sae, const Event& e) {
  sae.update(e);
  return sae;
}

PatchBinarizer::PatchBinarizer(int side, int n_latest) : side_(side), n_latest_(n_latest) {
  if (side_ <= 0 || side_ % 2 == 0) throw std::invalid_argument("patch side must be odd and positive");
  if (n_latest_ <= 0 || n_latest_ > side_ * side_)
    throw std::invalid_argument("latest-event count must lie in [1, side^2]");
  cells_ = side_ * side_;
  const int h = side_ / 2;
  auto dist2 = [&](int index) {
    const int dr = index / side_ - h;
    const int dc = index % side_ - h;
    return dr * dr + dc * dc;
  };
  std::vector<int> by_rank(cells_);
  std::iota(by_rank.begin(), by_rank.end(), 0);
  std::stable_sort(by_rank.begin(), by_rank.end(), [&](int a, int b) { return dist2(a) < dist2(b); });
  rank_.resize(cells_);
  for (int r = 0; r < cells_; ++r) rank_[by_rank[r]] = r;
  cutoff_.fill(1'000);
  offset_.resize(cells_);
  row_of_.resize(cells_);
  col_of_.resize(cells_);
  for (int i = 0; i < cells_; ++i) {
    row_of_[i] = i / side_;
    col_of_[i] = i % side_;
  }
  for (int i = 0; i < cells_; ++i) offset_[i] = (i % side_) * side_ + i / side_;  // column-major
  cand_.resize(cells_);
  key_.resize(cells_);
  selected_.reserve(cells_);
}

namespace {

// Row helpers; W > 0 fixes the width at compile time, W == 0 reads w.
template <int W>
std::uint64_t count_older(const TimeUs* line, int w, TimeUs since) {
  const int n = W > 0 ? W : w;
  std::uint64_t older = 0;
  for (int x = 0; x < n; ++x) older += static_cast<std::uint64_t>(line[x] - since) >> 63;
  return older;
}

template <int W>
int compact_row(const TimeUs* line, int w, TimeUs since, int index, int* cand, int c) {
  const int n = W > 0 ? W : w;
  for (int x = 0; x < n; ++x) {
    cand[c] = index + x;
    c += line[x] >= since;
  }
  return c;
}

}  // namespace

void PatchBinarizer::binarize(const SurfaceOfActiveEvents& sae, int cx, int cy, BinaryPatch& out) {
  select(sae, cx, cy);
  mark(out);
}

void PatchBinarizer::mark(BinaryPatch& out) const {
  if (out.side != side_ || out.bits.rows() != side_) {
    out.side = side_;
    out.bits.resize(side_, side_);
  }
  out.bits.setZero();
  std::uint8_t* bits = out.bits.data();
  for (const int i : selected_) bits[offset_[i]] = 1;
}

std::span<const int> PatchBinarizer::select(const SurfaceOfActiveEvents& sae, int cx, int cy) {
  const int h = side_ / 2;
  const auto& geo = sae.geometry();
  selected_.clear();
  const auto newest = sae.newest();
  if (!newest) return selected();

  const int y0 = std::max(0, cy - h);
  const int y1 = std::min(geo.height - 1, cy + h);
  const int x0 = std::max(0, cx - h);
  const int x1 = std::min(geo.width - 1, cx + h);
  const int w = x1 - x0 + 1;
  const Eigen::Index stride = sae.grid().cols();
  const TimeUs* base = sae.grid().data() + y0 * stride + x0;
  // Counts cells with t >= since through the sign of t - since, which
  // vectorizes without a 64-bit compare.
  auto count_since = [&](TimeUs since) {
    std::uint64_t older = 0;
    for (int y = y0; y <= y1; ++y) {
      const TimeUs* line = base + (y - y0) * stride;
      older += w == 9 ? count_older<9>(line, w, since) : count_older<0>(line, w, since);
    }
    return (y1 - y0 + 1) * w - static_cast<int>(older);
  };

  // Smallest age cutoff found with at least n cells at or above newest - age;
  // refine until the count is within n + slack or the bracket closes. Starts
  // from the last cutoff used in the same tile and steps by interpolating the
  // counts, with every third step a bisection.
  const int n = n_latest_;
  const int slack = 3;
  const TimeUs target = n + slack / 2;
  TimeUs& tile = cutoff_[((cy >> 2) * 64 + (cx >> 2)) & (kTiles - 1)];
  TimeUs lo = -1;
  TimeUs hi = -1;
  int count_lo = 0;
  int count_hi = 0;
  TimeUs age = std::min(tile, *newest);
  for (int step = 1;; ++step) {
    const int count = count_since(*newest - age);
    if (count < n) {
      lo = age;
      count_lo = count;
      if (age == *newest) break;
    } else {
      hi = age;
      count_hi = count;
      if (count <= n + slack) break;
    }
    if (hi >= 0 && hi - lo <= 1) break;
    if (hi < 0) age = std::min(*newest, std::max(lo + 1, (lo + 1) * target / std::max(count_lo, 1)));
    else if (step % 3 == 0) age = lo + (hi - lo) / 2;
    else age = std::clamp(lo + (hi - lo) * (target - count_lo) / (count_hi - count_lo), lo + 1, hi - 1);
  }
  const TimeUs since = hi < 0 ? 0 : *newest - hi;
  if (hi >= 0) tile = hi;

  int c = 0;
  int* cand = cand_.data();
  for (int y = y0; y <= y1; ++y) {
    const TimeUs* line = base + (y - y0) * stride;
    const int row = (y - cy + h) * side_ + (x0 - cx + h);
    c = w == 9 ? compact_row<9>(line, w, since, row, cand, c) : compact_row<0>(line, w, since, row, cand, c);
  }
  if (c > n) trim(sae, cx - h, cy - h, c);
  else selected_.assign(cand, cand + c);
  return selected();
}

void PatchBinarizer::trim(const SurfaceOfActiveEvents& sae, int x0, int y0, int c) {
  const int n = n_latest_;
  TimeUs* key = key_.data();
  int* cand = cand_.data();
  // Timestamp first, then closeness rank; larger is kept.
  for (int j = 0; j < c; ++j) {
    const int i = cand[j];
    const TimeUs t = sae.raw(x0 + col_of_[i], y0 + row_of_[i]);
    key[j] = t * cells_ + (cells_ - 1 - rank_[i]);
  }
  if (c - n > 8) {
    std::vector<int> order(c);
    std::iota(order.begin(), order.end(), 0);
    std::nth_element(order.begin(), order.begin() + (n - 1), order.end(),
                     [&](int a, int b) { return key[a] > key[b]; });
    for (int i = 0; i < n; ++i) selected_.push_back(cand[order[i]]);
    return;
  }
  // Drop the oldest candidate until n remain.
  for (; c > n; --c) {
    int j = 0;
    TimeUs oldest = key[0];
    for (int i = 1; i < c; ++i) {
      const bool older = key[i] < oldest;
      oldest = older ? key[i] : oldest;
      j = older ? i : j;
    }
    key[j] = key[c - 1];
    cand[j] = cand[c - 1];
  }
  selected_.assign(cand, cand + n);
}

BinaryPatch binarized_patch(const SurfaceOfActiveEvents& sae, int cx, int cy, int side,
                            int n_latest) {
  PatchBinarizer binarizer(side, n_latest);
  BinaryPatch patch;
  binarizer.binarize(sae, cx, cy, patch);
  return patch;
}

}  // namespace evslip
