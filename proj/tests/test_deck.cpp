#include <gtest/gtest.h>

#include <random>

#include "dorplan/deck.hpp"

using dorplan::CardRanking;
using dorplan::InputError;

namespace {

CardRanking didactic() { return {{{"P5"}, {"P2"}, {"P3"}, {"P6"}, {"P4"}, {"P1"}}, {3, 1, 6, 1, 4}, 30}; }
CardRanking r50() { return {{{"x8"}, {"x7"}, {"x5"}, {"x6"}}, {3, 2, 5}, 2}; }
CardRanking r100() { return {{{"x3"}, {"x4"}, {"x2"}, {"x1"}}, {0, 2, 3}, 5}; }

}  // namespace

TEST(Deck, DidacticScores) {
  const auto t = dorplan::score(didactic());
  EXPECT_EQ(t.at("P5"), 31);
  EXPECT_EQ(t.at("P2"), 35);
  EXPECT_EQ(t.at("P3"), 37);
  EXPECT_EQ(t.at("P6"), 44);
  EXPECT_EQ(t.at("P4"), 46);
  EXPECT_EQ(t.at("P1"), 51);
}

TEST(Deck, PartialRankings) {
  const auto a = dorplan::score(r50());
  EXPECT_EQ(a.at("x8"), 3);
  EXPECT_EQ(a.at("x7"), 7);
  EXPECT_EQ(a.at("x5"), 10);
  EXPECT_EQ(a.at("x6"), 16);
  const auto b = dorplan::score(r100());
  EXPECT_EQ(b.at("x3"), 6);
  EXPECT_EQ(b.at("x4"), 7);
  EXPECT_EQ(b.at("x2"), 10);
  EXPECT_EQ(b.at("x1"), 14);
}

TEST(Deck, MergedRanking) {
  const auto t = dorplan::score(dorplan::merge(r50(), r100(), 7));
  const std::vector<std::pair<std::string, long long>> want{{"x8", 3},  {"x7", 7},  {"x5", 10}, {"x6", 16},
                                                            {"x3", 24}, {"x4", 25}, {"x2", 28}, {"x1", 32}};
  ASSERT_EQ(t.entries.size(), want.size());
  for (const auto& [id, v] : want) EXPECT_EQ(t.at(id), v) << id;
}

TEST(Deck, SingletonsWithoutBlanks) {
  const auto t = dorplan::score({{{"a"}, {"b"}, {"c"}}, {0, 0}, 0});
  EXPECT_EQ(t.at("a"), 1);
  EXPECT_EQ(t.at("b"), 2);
  EXPECT_EQ(t.at("c"), 3);
}

TEST(Deck, TiedItemsShareScore) {
  const auto t = dorplan::score({{{"a", "b"}, {"c"}}, {1}, 0});
  EXPECT_EQ(t.at("a"), 1);
  EXPECT_EQ(t.at("b"), 1);
  EXPECT_EQ(t.at("c"), 3);
  EXPECT_EQ(t.find("c")->rank_class, 1u);
}

TEST(Deck, Rejections) {
  EXPECT_THROW(dorplan::score({{}, {}, 0}), InputError);
  EXPECT_THROW(dorplan::score({{{"a"}, {}}, {0}, 0}), InputError);
  EXPECT_THROW(dorplan::score({{{"a"}, {"a"}}, {0}, 0}), InputError);
  EXPECT_THROW(dorplan::score({{{"a"}, {"b"}}, {}, 0}), InputError);
  EXPECT_THROW(dorplan::score({{{"a"}, {"b"}}, {-1}, 0}), InputError);
  EXPECT_THROW(dorplan::score({{{"a"}}, {}, -1}), InputError);
  EXPECT_THROW(dorplan::merge(r50(), r50(), 1), InputError);
  EXPECT_THROW(dorplan::merge(r50(), r100(), -1), InputError);
}

TEST(Deck, ScoresStrictlyIncreaseAcrossClasses) {
  std::mt19937 rng(7);
  for (int rep = 0; rep < 200; ++rep) {
    CardRanking r;
    r.zero_gap = rng() % 5;
    const int n = 1 + rng() % 8;
    for (int s = 0; s < n; ++s) {
      r.classes.push_back({"i" + std::to_string(s)});
      if (s) r.blanks.push_back(rng() % 4);
    }
    const auto t = dorplan::score(r);
    long long prev = 0;
    for (std::size_t s = 0; s < r.classes.size(); ++s) {
      const long long v = t.at(r.classes[s][0]);
      const long long gap = s == 0 ? r.zero_gap : r.blanks[s - 1];
      EXPECT_EQ(v - prev, gap + 1);
      prev = v;
    }
  }
}

TEST(Deck, MergeShiftsUpperByConstant) {
  const auto lo = dorplan::score(r50());
  const auto up = dorplan::score(r100());
  for (long long bridge : {0LL, 1LL, 7LL, 20LL}) {
    const auto m = dorplan::score(dorplan::merge(r50(), r100(), bridge));
    for (const auto& e : lo.entries) EXPECT_EQ(m.at(e.item), e.score);
    // upper's own zero gap is replaced by the bridge
    const long long shift = m.at("x3") - up.at("x3");
    for (const auto& e : up.entries) EXPECT_EQ(m.at(e.item) - e.score, shift);
    EXPECT_EQ(m.at("x3"), lo.at("x6") + bridge + 1);
  }
}

TEST(Deck, AddedBlankShiftsDownstreamByOne) {
  auto r = didactic();
  const auto base = dorplan::score(r);
  r.blanks[2] += 1;  // between P3 and P6
  const auto bumped = dorplan::score(r);
  for (const char* id : {"P5", "P2", "P3"}) EXPECT_EQ(bumped.at(id), base.at(id));
  for (const char* id : {"P6", "P4", "P1"}) EXPECT_EQ(bumped.at(id), base.at(id) + 1);
}
