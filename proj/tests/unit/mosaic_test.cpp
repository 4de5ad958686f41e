#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ufpmp/mosaic.hpp"

using namespace ufpmp;

namespace {

ScaledRegion square(double side) { return {{0, 0, side, side}, 1.0}; }

void expect_sound(const MosaicLayout& layout) {
  const BBox canvas{0, 0, layout.width, layout.height};
  for (std::size_t i = 0; i < layout.placements.size(); ++i) {
    const BBox a = layout.placements[i].dest();
    ASSERT_TRUE(canvas.contains(a)) << "placement " << i;
    for (std::size_t j = i + 1; j < layout.placements.size(); ++j) {
      ASSERT_LE(intersection_area(a, layout.placements[j].dest()), 1e-9) << i << " vs " << j;
    }
  }
}

}  // namespace

TEST(Equalize, LargeRegionsUntouched) {
  const std::vector<BBox> regions{{0, 0, 96, 96}, {0, 0, 200, 100}};
  for (const auto& s : equalize(regions, 96)) EXPECT_EQ(s.scale, 1.0);
}

TEST(Equalize, GlobalMeanExample) {
  const std::vector<BBox> regions{{0, 0, 48, 48}, {0, 0, 128, 128}};
  const auto s = equalize(regions, 96, EqualizeMode::GlobalMean);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_NEAR(s[0].scale, 96.0 / 88.0, 1e-12);
  EXPECT_NEAR(s[0].width(), 52.36, 5e-3);
  EXPECT_EQ(s[1].scale, 1.0);
}

TEST(Equalize, SingleSmallRegion) {
  for (auto mode : {EqualizeMode::GlobalMean, EqualizeMode::PerRegion}) {
    const auto s = equalize(std::vector<BBox>{{0, 0, 32, 32}}, 96, mode);
    EXPECT_DOUBLE_EQ(s[0].scale, 3.0);
    EXPECT_DOUBLE_EQ(s[0].width(), 96.0);
  }
}

TEST(Equalize, PerRegionLiftsEachSmallRegionToFixedSize) {
  const std::vector<BBox> regions{{0, 0, 48, 48}, {0, 0, 16, 64}, {0, 0, 128, 128}};
  const auto s = equalize(regions, 96, EqualizeMode::PerRegion);
  EXPECT_DOUBLE_EQ(s[0].scale, 2.0);
  EXPECT_DOUBLE_EQ(std::sqrt(s[1].width() * s[1].height()), 96.0);
  EXPECT_EQ(s[2].scale, 1.0);
}

TEST(Equalize, EmptyAndInvalid) {
  EXPECT_TRUE(equalize(std::vector<BBox>{}, 96).empty());
  EXPECT_THROW(equalize(std::vector<BBox>{{0, 0, 1, 1}}, 0), Error);
}

TEST(Equalize, QualifyingRegionsGrowByExactlyTheFactor) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    std::vector<BBox> regions;
    for (int i = 0; i < 8; ++i) regions.push_back(oracle::random_box(rng, 1000, 1000, 5, 200));
    double mean = 0;
    for (const auto& r : regions) mean += std::sqrt(oracle::box_area(r));
    mean /= regions.size();
    const double f = mean < 96 ? 96 / mean : 1.0;
    const auto s = equalize(regions, 96, EqualizeMode::GlobalMean);
    for (std::size_t i = 0; i < regions.size(); ++i) {
      const double side = std::sqrt(oracle::box_area(regions[i]));
      ASSERT_GE(s[i].scale, 1.0);
      if (side < 96) {
        ASSERT_NEAR(s[i].scale, f, 1e-12);
      } else {
        ASSERT_EQ(s[i].scale, 1.0);
      }
    }
  }
}

TEST(Pack, SingleRegion) {
  const std::vector<ScaledRegion> in{square(50)};
  const auto l = pack(in, 120, 0);
  EXPECT_EQ(l.width, 120);
  EXPECT_EQ(l.height, 50);
  EXPECT_EQ(l.placements[0].dest_x, 0);
  EXPECT_EQ(l.placements[0].dest_y, 0);
  EXPECT_DOUBLE_EQ(waste_ratio(l), 6000.0 / 2500.0);
}

TEST(Pack, TwoSquaresShareAShelf) {
  const std::vector<ScaledRegion> in{square(50), square(50)};
  const auto l = pack(in, 120, 0);
  EXPECT_EQ(l.height, 50);
  EXPECT_EQ(l.placements[0].dest_x, 0);
  EXPECT_EQ(l.placements[1].dest_x, 50);
  EXPECT_EQ(l.placements[1].dest_y, 0);
  EXPECT_DOUBLE_EQ(waste_ratio(l), 1.2);
}

TEST(Pack, PaddingAddsGutters) {
  const std::vector<ScaledRegion> in{square(50), square(50)};
  const auto l = pack(in, 120, 2);
  EXPECT_EQ(l.placements[0].dest_x, 2);
  EXPECT_EQ(l.placements[1].dest_x, 54);
  EXPECT_EQ(l.placements[0].dest_y, 2);
  EXPECT_EQ(l.height, 54);
}

TEST(Pack, TwoShelvesWhenRegionsDoNotFitSideBySide) {
  const std::vector<ScaledRegion> in{{{0, 0, 60, 40}, 1.0}, {{0, 0, 60, 80}, 1.0}};
  const auto l = pack(in, 70, 0);
  EXPECT_EQ(l.height, 120);
  EXPECT_EQ(l.placements[1].dest_y, 0);
  EXPECT_EQ(l.placements[0].dest_y, 80);
  expect_sound(l);
}

TEST(Pack, FillingRegionHasUnitWaste) {
  const auto l = pack(std::vector<ScaledRegion>{square(40)}, 40, 0);
  EXPECT_DOUBLE_EQ(waste_ratio(l), 1.0);
}

TEST(Pack, ErrorsAndEmptyInput) {
  const auto empty = pack(std::vector<ScaledRegion>{}, 100, 2);
  EXPECT_TRUE(empty.empty());
  EXPECT_THROW(waste_ratio(empty), Error);
  try {
    pack(std::vector<ScaledRegion>{square(10), square(97)}, 100, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnpackableRegion);
    EXPECT_NE(std::string(e.what()).find("region 1"), std::string::npos);
  }
  EXPECT_THROW(pack(std::vector<ScaledRegion>{{{0, 0, 5, 5}, 0.5}}, 100, 0), Error);
  EXPECT_THROW(pack(std::vector<ScaledRegion>{square(5)}, 0, 0), Error);
}

TEST(Pack, DeterministicAndPreservesInputOrder) {
  std::mt19937_64 rng(99);
  std::vector<ScaledRegion> in;
  for (int i = 0; i < 30; ++i) in.push_back({oracle::random_box(rng, 500, 500, 5, 60), 1.5});
  const auto a = pack(in, 400, 2);
  const auto b = pack(in, 400, 2);
  EXPECT_EQ(a, b);
  for (std::size_t i = 0; i < in.size(); ++i) {
    EXPECT_EQ(a.placements[i].source, in[i].source);
    EXPECT_EQ(a.placements[i].scale, in[i].scale);
  }
  expect_sound(a);
}

TEST(Pack, PackerInterfaceIsSwappable) {
  struct Column final : Packer {
    MosaicLayout pack(std::span<const ScaledRegion> s, double w, double pad) const override {
      MosaicLayout l{w, pad, {}};
      for (const auto& r : s) {
        l.placements.push_back({r.source, r.scale, pad, l.height});
        l.height += r.height() + pad;
      }
      return l;
    }
  };
  const std::vector<ScaledRegion> in{square(10), square(20)};
  const Column col;
  const Packer& p = col;
  const auto l = p.pack(in, 50, 1);
  EXPECT_EQ(l.height, 33);
  expect_sound(l);
}
