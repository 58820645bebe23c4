#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "kfn/core_model.hpp"
#include "kfn/errors.hpp"
#include "oracles.hpp"

namespace kfn {
namespace {

TEST(TimeInterval, Construction) {
  const auto a = make_interval(3, 7);
  EXPECT_EQ(a.start(), 3);
  EXPECT_EQ(a.end(), 7);
  EXPECT_EQ(a.length(), 4);
  EXPECT_EQ(make_interval(0, 1).length(), 1);
  EXPECT_THROW(make_interval(5, 5), EmptyInterval);
  EXPECT_THROW(make_interval(6, 5), EmptyInterval);
  EXPECT_THROW(make_interval(-1, 5), InvalidInterval);
}

TEST(TimeInterval, Overlaps) {
  EXPECT_FALSE(overlaps(make_interval(0, 5), make_interval(5, 9)));
  EXPECT_TRUE(overlaps(make_interval(0, 5), make_interval(4, 6)));
  EXPECT_TRUE(overlaps(make_interval(2, 3), make_interval(0, 10)));
}

TEST(TimeInterval, OverlapsIsSymmetricAndMatchesTicks) {
  std::mt19937 gen(7);
  std::uniform_int_distribution<Tick> d(0, 12);
  for (int i = 0; i < 2000; ++i) {
    Tick a0 = d(gen), a1 = d(gen), b0 = d(gen), b1 = d(gen);
    if (a0 == a1 || b0 == b1) continue;
    const auto a = make_interval(std::min(a0, a1), std::max(a0, a1));
    const auto b = make_interval(std::min(b0, b1), std::max(b0, b1));
    bool shared = false;
    for (Tick t = 0; t < 13; ++t) shared = shared || (a.contains(t) && b.contains(t));
    EXPECT_EQ(overlaps(a, b), shared);
    EXPECT_EQ(overlaps(a, b), overlaps(b, a));
  }
}

TEST(Calendar, SortsAndRejectsOverlap) {
  Calendar c({{make_interval(5, 7), BusyKind::Task}, {make_interval(0, 2), BusyKind::Task}});
  ASSERT_EQ(c.entries().size(), 2u);
  EXPECT_EQ(c.entries()[0].interval.start(), 0);
  EXPECT_THROW(Calendar({{make_interval(0, 4), BusyKind::Task},
                         {make_interval(3, 6), BusyKind::KnowledgeProcessing}}),
               OverlappingEntries);
  EXPECT_THROW(c.insert(make_interval(6, 8), BusyKind::Task), OverlappingEntries);
  c.insert(make_interval(2, 5), BusyKind::KnowledgeProcessing);
  EXPECT_EQ(c.entries().size(), 3u);
  EXPECT_EQ(c.latest_end_at_or_before(6), std::optional<Tick>(5));
  EXPECT_EQ(c.latest_end_at_or_before(1), std::nullopt);
}

TEST(FreeGaps, Examples) {
  const auto window = make_interval(0, 10);
  const std::vector<Calendar> one{Calendar({{make_interval(2, 4), BusyKind::Task}})};
  EXPECT_EQ(free_gaps(one, window),
            (std::vector<TimeInterval>{make_interval(0, 2), make_interval(4, 10)}));

  const std::vector<Calendar> none{Calendar()};
  EXPECT_EQ(free_gaps(none, window), std::vector<TimeInterval>{window});

  const std::vector<Calendar> full{Calendar({{make_interval(0, 10), BusyKind::Task}})};
  EXPECT_TRUE(free_gaps(full, window).empty());
}

// Gaps plus clipped busy time partition the window, checked tick by tick, and
// the result does not depend on insertion order.
TEST(FreeGaps, PartitionsWindowAgainstTickScan) {
  std::mt19937 gen(11);
  for (int round = 0; round < 500; ++round) {
    const Tick lo = std::uniform_int_distribution<Tick>(0, 5)(gen);
    const Tick hi = lo + std::uniform_int_distribution<Tick>(1, 20)(gen);
    std::vector<Calendar> cals(std::uniform_int_distribution<int>(1, 3)(gen));
    std::vector<CalendarEntry> inserted;
    for (auto& c : cals) {
      Tick cursor = 0;
      while (cursor < 30) {
        cursor += std::uniform_int_distribution<Tick>(0, 4)(gen);
        const Tick len = std::uniform_int_distribution<Tick>(1, 4)(gen);
        c.insert(make_interval(cursor, cursor + len), BusyKind::Task);
        cursor += len;
      }
    }
    const auto window = make_interval(lo, hi);
    const auto gaps = free_gaps(cals, window);

    std::vector<oracle::Span> busy;
    for (const auto& c : cals) {
      for (const auto& s : oracle::spans_of(c)) busy.push_back(s);
    }
    const auto expect = oracle::tick_scan_gaps(busy, lo, hi);
    ASSERT_EQ(gaps.size(), expect.size());
    for (std::size_t i = 0; i < gaps.size(); ++i) {
      EXPECT_EQ(gaps[i].start(), expect[i].start);
      EXPECT_EQ(gaps[i].end(), expect[i].end);
    }

    // Rebuild every calendar from shuffled entries.
    std::vector<Calendar> shuffled;
    for (const auto& c : cals) {
      std::vector<CalendarEntry> entries(c.entries().begin(), c.entries().end());
      std::shuffle(entries.begin(), entries.end(), gen);
      Calendar rebuilt;
      for (const auto& e : entries) rebuilt.insert(e.interval, e.kind);
      shuffled.push_back(rebuilt);
    }
    std::reverse(shuffled.begin(), shuffled.end());
    EXPECT_EQ(free_gaps(shuffled, window), gaps);
  }
}

TEST(KnowledgeSpace, FlatIds) {
  KnowledgeSpace space(3);
  EXPECT_EQ(space.size(), 3u);
  EXPECT_EQ(space.at(2).id, 2u);
  EXPECT_THROW(space.at(3), IndexOutOfRange);
  EXPECT_THROW(KnowledgeSpace(0), InvalidConfig);
  KnowledgeSpace named(std::vector<std::string>{"design", "testing"});
  EXPECT_EQ(named.at(1).label, "testing");
}

TEST(EnergyMatrix, Lookup) {
  EnergyMatrix m(4, 2, 10.0);
  m.set(3, 1, 7.5);
  EXPECT_DOUBLE_EQ(energy_of(m, 3, 1), 7.5);
  EXPECT_DOUBLE_EQ(energy_of(m, 0, 0), 0.0);
  EXPECT_THROW(energy_of(m, 0, 2), IndexOutOfRange);
  EXPECT_THROW(energy_of(m, 4, 0), IndexOutOfRange);
  EXPECT_THROW(m.set(0, 0, 10.5), InvalidEnergy);
  EXPECT_THROW(m.set(0, 0, -0.1), InvalidEnergy);
  EXPECT_THROW(EnergyMatrix(1, 1, 0.0), InvalidEnergy);
  m.set(3, 0, 2.5);
  EXPECT_DOUBLE_EQ(m.mean_energy(3), 5.0);
}

}  // namespace
}  // namespace kfn
