#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "evslip/sae.hpp"
#include "evslip/windows.hpp"
#include "oracles.hpp"

using namespace evslip;

namespace {

// Marks the newest n cells by a full sort: time, then distance, then row-major.
std::vector<int> sorted_window(const SurfaceOfActiveEvents& sae, int cx, int cy, int n) {
  struct Cell {
    TimeUs t;
    int d2, idx;
  };
  std::vector<Cell> cand;
  for (int r = 0; r < 9; ++r) {
    for (int c = 0; c < 9; ++c) {
      const int x = cx - 4 + c, y = cy - 4 + r;
      if (!sae.geometry().contains(x, y) || !sae.at(x, y)) continue;
      cand.push_back({*sae.at(x, y), (r - 4) * (r - 4) + (c - 4) * (c - 4), r * 9 + c});
    }
  }
  std::sort(cand.begin(), cand.end(), [](const Cell& a, const Cell& b) {
    if (a.t != b.t) return a.t > b.t;
    if (a.d2 != b.d2) return a.d2 < b.d2;
    return a.idx < b.idx;
  });
  std::vector<int> expect(81, 0);
  for (std::size_t i = 0; i < cand.size() && i < std::size_t(n); ++i) expect[cand[i].idx] = 1;
  return expect;
}

}  // namespace

TEST_SUITE("event_core") {

TEST_CASE("parse maps fields") {
  EventParser p;
  const Event e = p.parse("1000,5,7,1");
  CHECK(e == Event{1000, 5, 7, 1});
  CHECK(p.parse(" 1001 , 6 , 8 , -1 ") == Event{1001, 6, 8, -1});
}

TEST_CASE("parse rejects bad records") {
  EventParser p;
  CHECK_THROWS_AS(p.parse("1000,240,7,1"), OutOfRange);
  CHECK_THROWS_AS(p.parse("1000,5,180,1"), OutOfRange);
  CHECK_THROWS_AS(p.parse("1000,5,7,0"), OutOfRange);
  CHECK_THROWS_AS(p.parse("1000,5,7"), MalformedRecord);
  CHECK_THROWS_AS(p.parse("1000,5,7,1,3"), MalformedRecord);
  CHECK_THROWS_AS(p.parse("abc,5,7,1"), MalformedRecord);
  CHECK_THROWS_AS(p.parse("-5,5,7,1"), OutOfRange);
}

TEST_CASE("ordering with and without slack") {
  EventParser strict;
  strict.parse("1000,5,7,1");
  CHECK_THROWS_AS(strict.parse("999,5,7,1"), NonMonotonic);
  CHECK_NOTHROW(strict.parse("1000,5,8,1"));

  EventParser loose(SensorGeometry{}, 5);
  loose.parse("1000,5,7,1");
  CHECK_NOTHROW(loose.parse("996,5,7,1"));
  CHECK_THROWS_AS(loose.parse("994,5,7,1"), NonMonotonic);
}

TEST_CASE("log round trip skips comments and reports line numbers") {
  std::vector<Event> events{{10, 1, 2, 1}, {20, 3, 4, -1}, {20, 239, 179, 1}};
  std::stringstream buf;
  write_event_log(buf, events, SensorGeometry{});
  CHECK(buf.str().rfind("# t_us,x,y,pol", 0) == 0);
  CHECK(read_event_log(buf) == events);

  std::stringstream bad("# header\n10,1,1,1\n\n5,1,1,1\n");
  try {
    read_event_log(bad);
    FAIL("expected NonMonotonic");
  } catch (const NonMonotonic& e) {
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
}

TEST_CASE("sae update") {
  SurfaceOfActiveEvents sae;
  CHECK(sae.populated_count() == 0);
  sae = sae_update(sae, {10, 0, 0, 1});
  CHECK(sae.at(0, 0) == 10);
  CHECK(sae.populated_count() == 1);
  CHECK_FALSE(sae.at(1, 0).has_value());

  sae.update({50, 3, 3, -1});
  sae.update({80, 3, 3, 1});
  CHECK(sae.at(3, 3) == 80);
  CHECK(sae.populated_count() == 2);
  CHECK(sae.newest() == 80);
}

TEST_CASE("sae replay is idempotent") {
  std::mt19937_64 rng(7);
  std::vector<Event> events;
  for (TimeUs t = 0; t < 20'000; t += 3) {
    events.push_back({t, int(rng() % 240), int(rng() % 180), rng() % 2 ? 1 : -1});
  }
  SurfaceOfActiveEvents a, b;
  for (const auto& e : events) a.update(e);
  for (const auto& e : events) b.update(e);
  CHECK(a == b);
}

TEST_CASE("binarized patch with only the centre") {
  SurfaceOfActiveEvents sae;
  sae.update({5, 50, 50, 1});
  const BinaryPatch p = binarized_patch(sae, 50, 50);
  CHECK(p.side == 9);
  CHECK(p.ones() == 1);
  CHECK(p.bits(4, 4) == 1);
}

TEST_CASE("binarized patch keeps the newest n") {
  SurfaceOfActiveEvents sae;
  std::vector<std::pair<int, int>> cells;
  for (int y = 46; y <= 54; ++y)
    for (int x = 46; x <= 54; ++x) cells.emplace_back(x, y);
  std::mt19937_64 rng(3);
  std::shuffle(cells.begin(), cells.end(), rng);
  cells.resize(25);
  for (int i = 0; i < 25; ++i) sae.update({TimeUs(100 + i), cells[i].first, cells[i].second, 1});

  const BinaryPatch p = binarized_patch(sae, 50, 50, 9, 20);
  CHECK(p.ones() == 20);
  for (int i = 0; i < 25; ++i) {
    const int r = cells[i].second - 46;
    const int c = cells[i].first - 46;
    CHECK(p.bits(r, c) == (i >= 5 ? 1 : 0));
  }
}

TEST_CASE("binarized patch tie break prefers the centre, then row-major order") {
  SurfaceOfActiveEvents sae;
  // Same timestamp everywhere in the window.
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 9; ++x) sae.update({7, 100 + x, 100 + y, 1});
  const BinaryPatch p = binarized_patch(sae, 104, 104, 9, 5);
  CHECK(p.ones() == 5);
  CHECK(p.bits(4, 4) == 1);
  // Four cells at distance 1; all tie, all kept.
  CHECK(p.bits(3, 4) == 1);
  CHECK(p.bits(5, 4) == 1);
  CHECK(p.bits(4, 3) == 1);
  CHECK(p.bits(4, 5) == 1);

  const BinaryPatch q = binarized_patch(sae, 104, 104, 9, 7);
  // Distance^2 = 2 ring: the first two in row-major order win.
  CHECK(q.bits(3, 3) == 1);
  CHECK(q.bits(3, 5) == 1);
  CHECK(q.bits(5, 3) == 0);
  CHECK(q.bits(5, 5) == 0);
}

TEST_CASE("binarized patch at the sensor corner") {
  SurfaceOfActiveEvents sae;
  sae.update({1, 0, 0, 1});
  sae.update({2, 1, 1, 1});
  const BinaryPatch p = binarized_patch(sae, 0, 0);
  CHECK(p.ones() == 2);
  CHECK(p.bits(4, 4) == 1);
  CHECK(p.bits(5, 5) == 1);
  CHECK(p.bits.topRows(4).cast<int>().sum() == 0);
  CHECK(p.bits.leftCols(4).cast<int>().sum() == 0);
}

TEST_CASE("binarized patch never exceeds n and matches a sort of the window") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    SurfaceOfActiveEvents sae;
    const int cx = int(rng() % 240), cy = int(rng() % 180);
    for (int i = 0; i < 60; ++i) {
      const int x = cx - 4 + int(rng() % 9), y = cy - 4 + int(rng() % 9);
      if (sae.geometry().contains(x, y)) sae.update({TimeUs(rng() % 20), x, y, 1});
    }
    const int n = 1 + int(rng() % 30);
    const BinaryPatch p = binarized_patch(sae, cx, cy, 9, n);
    CHECK(p.ones() <= n);
    const std::vector<int> expect = sorted_window(sae, cx, cy, n);
    for (int i = 0; i < 81; ++i) REQUIRE(int(p.bits(i / 9, i % 9)) == expect[i]);
  }
}

TEST_CASE("a reused binarizer matches the sort along a stream") {
  std::mt19937_64 rng(5);
  for (const int n : {1, 7, 20, 40}) {
    SurfaceOfActiveEvents sae;
    PatchBinarizer binarizer(9, n);
    BinaryPatch p;
    TimeUs t = 0;
    for (int i = 0; i < 4000; ++i) {
      // Mostly small steps with ties, now and then a long gap.
      const std::uint64_t r = rng() % 100;
      t += r < 40 ? 0 : r < 98 ? TimeUs(rng() % 50) : TimeUs(1) << (20 + rng() % 20);
      const int x = 20 + int(rng() % 30) - (i % 500 == 0 ? 20 : 0), y = int(rng() % 24);
      sae.update({t, x, y, 1});
      binarizer.binarize(sae, x, y, p);
      const std::vector<int> expect = sorted_window(sae, x, y, n);
      for (int k = 0; k < 81; ++k) REQUIRE(int(p.bits(k / 9, k % 9)) == expect[k]);
      REQUIRE(int(binarizer.selected().size()) == p.ones());
    }
  }
}

TEST_CASE("windows bucket events") {
  std::vector<LabeledEvent> ev{{{100, 0, 0, 1}, FeatureClass::Flat, 0},
                               {{200, 0, 0, 1}, FeatureClass::Flat, 0},
                               {{600, 0, 0, 1}, FeatureClass::Flat, 0}};
  const auto w = accumulate_windows(ev, 500);
  REQUIRE(w.size() == 2);
  CHECK(w[0].c_raw == 2);
  CHECK(w[1].c_raw == 1);
  CHECK(w[1].t_start == 500);
}

TEST_CASE("empty span yields zero windows") {
  const auto w = accumulate_windows({}, 500, 0, 2000);
  REQUIRE(w.size() == 4);
  for (const auto& x : w) CHECK(x.c_raw == 0);
}

TEST_CASE("window tallies by label") {
  std::vector<LabeledEvent> ev;
  for (int i = 0; i < 5; ++i) ev.push_back({{TimeUs(i), 0, 0, 1}, FeatureClass::Corner, 0});
  for (int i = 0; i < 7; ++i) ev.push_back({{TimeUs(10 + i), 0, 0, 1}, FeatureClass::Edge, 0});
  for (int i = 0; i < 3; ++i) ev.push_back({{TimeUs(20 + i), 0, 0, 1}, FeatureClass::Flat, 0});
  const auto w = accumulate_windows(ev, 500);
  REQUIRE(w.size() == 1);
  CHECK(w[0].c_raw == 15);
  CHECK(w[0].c_corner == 5);
  CHECK(w[0].c_edge == 7);
  CHECK(w[0].c_flat() == 3);
}

TEST_CASE("streaming windows match a brute-force recount") {
  std::mt19937_64 rng(5);
  std::vector<LabeledEvent> ev;
  TimeUs t = 0;
  for (int i = 0; i < 50'000; ++i) {
    t += TimeUs(rng() % 40);
    ev.push_back({{t, 0, 0, 1}, FeatureClass(rng() % 3), 0});
  }
  const TimeUs dt = 500;
  const std::int64_t n = t / dt + 1;
  std::vector<WindowCounts> got;
  WindowAccumulator acc(dt);
  for (const auto& e : ev) acc.push(e, [&](const WindowCounts& w) { got.push_back(w); });
  acc.flush([&](const WindowCounts& w) { got.push_back(w); });
  const auto ref = oracle::recount(ev, dt, n);
  REQUIRE(got.size() == ref.size());
  std::int64_t total = 0;
  for (std::size_t k = 0; k < got.size(); ++k) {
    CHECK(got[k].window_index == std::int64_t(k));
    CHECK(got[k].c_raw == ref[k].raw);
    CHECK(got[k].c_edge == ref[k].edge);
    CHECK(got[k].c_corner == ref[k].corner);
    total += got[k].c_raw;
  }
  CHECK(total == std::int64_t(ev.size()));
}

TEST_CASE("accumulator rejects time going backwards") {
  WindowAccumulator acc(500);
  auto sink = [](const WindowCounts&) {};
  acc.push(1200, FeatureClass::Flat, sink);
  CHECK_THROWS_AS(acc.push(400, FeatureClass::Flat, sink), NonMonotonic);
}

}  // TEST_SUITE
