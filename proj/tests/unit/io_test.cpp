#include <cstdlib>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ufpmp/ufpmp.hpp"

using namespace ufpmp;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("ufpmp-io-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  fs::path operator/(const std::string& name) const { return path_ / name; }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::InvalidState;
}

MosaicLayout random_layout(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  MosaicLayout l{1333, 0, {}};
  const int n = std::uniform_int_distribution<int>(0, 6)(rng);
  for (int i = 0; i < n; ++i) {
    l.placements.push_back({oracle::random_box(rng, 2000, 1500, 0.1, 300), 1 + 5 * u(rng), 1000 * u(rng), 800 * u(rng)});
  }
  l.height = 1000 * u(rng) + 1;
  return l;
}

}  // namespace

TEST(DetectionsIo, Examples) {
  EXPECT_TRUE(io::parse_detections("[]").empty());
  const auto one = io::parse_detections(R"([{"image_id":3,"bbox":[10,10,10,10],"score":0.5,"category_id":2}])");
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one.at(3)[0].box, (BBox{10, 10, 20, 20}));
  EXPECT_EQ(one.at(3)[0].category, 2);
  try {
    io::parse_detections(R"([{"image_id":1,"bbox":[0,0,-1,5],"score":0.5,"category_id":0},
                            {"image_id":1,"bbox":[0,0,1,5],"score":0.5,"category_id":0},
                            {"image_id":1,"bbox":[0,0,2,-5],"score":0.5,"category_id":0}])");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Validation);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("record 0"), std::string::npos);
    EXPECT_NE(msg.find("record 2"), std::string::npos);
    EXPECT_EQ(msg.find("record 1 "), std::string::npos);
  }
}

TEST(DetectionsIo, MalformedJsonReportsPosition) {
  try {
    io::parse_detections("[\n  {\"image_id\": 1,\n  \"bbox\": [1, 2,, 3]}\n]");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(DetectionsIo, RoundTrip) {
  TempDir dir;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  io::DetectionsByImage dets;
  for (int img = 0; img < 4; ++img) {
    for (int i = 0; i < 10; ++i) {
      const double x = 1000 * u(rng), y = 1000 * u(rng);
      // xywh -> corners -> xywh is exact for dyadic coordinates
      const double w = std::ldexp(std::floor(u(rng) * 4096), -4), h = std::ldexp(std::floor(u(rng) * 4096), -4);
      const double xr = std::ldexp(std::floor(x * 16), -4), yr = std::ldexp(std::floor(y * 16), -4);
      dets[img * 7].push_back({BBox::from_xywh(xr, yr, w, h), u(rng), img % 3});
    }
  }
  io::save_detections(dir / "d.json", dets);
  EXPECT_EQ(io::load_detections(dir / "d.json"), dets);
}

TEST(LayoutIo, EmptyLayoutShape) {
  const auto j = io::layout_to_json(MosaicLayout{1333, 0, {}});
  EXPECT_TRUE(j["placements"].is_array());
  EXPECT_TRUE(j["placements"].empty());
  EXPECT_EQ(j["mosaic"]["width"], 1333.0);
}

TEST(LayoutIo, RoundTripIsExact) {
  TempDir dir;
  const std::vector<ScaledRegion> two{{{0, 0, 50, 50}, 1.0}, {{100, 100, 150, 150}, 1.0}};
  const auto example = pack(two, 120, 0);
  io::save_layout(dir / "l.json", example);
  EXPECT_EQ(io::load_layout(dir / "l.json"), example);
  std::mt19937_64 rng(10);
  for (int t = 0; t < 200; ++t) {
    const auto l = random_layout(rng);
    ASSERT_EQ(io::layout_from_json(io::parse_json(io::layout_to_json(l).dump(), "layout")), l);
  }
}

TEST(LayoutIo, TruncatedAndSchemaErrors) {
  TempDir dir;
  const std::string text = io::layout_to_json(MosaicLayout{100, 50, {{{0, 0, 10, 10}, 2.0, 2, 2}}}).dump();
  io::write_file_atomic(dir / "t.json", text.substr(0, text.size() / 2));
  EXPECT_EQ(kind_of([&] { io::load_layout(dir / "t.json"); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([&] { io::layout_from_json(io::json::parse(R"({"mosaic":{"width":1}})")); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([&] {
              io::layout_from_json(io::json::parse(R"({"mosaic":{"width":1,"height":1},"placements":[{"src":[0,0,1],"scale":1,"dest":[0,0]}]})"));
            }),
            ErrorKind::Parse);
}

TEST(ConfigIo, DefaultsAndRoundTrip) {
  TempDir dir;
  const PipelineConfig def;
  EXPECT_EQ(def.ufp.beta, 1.5);
  EXPECT_EQ(def.ufp.fixed_size, 96);
  EXPECT_EQ(def.ufp.mosaic_width, 1333);
  EXPECT_EQ(def.ufp.padding, 2);
  EXPECT_EQ(def.nms_iou, 0.5);
  EXPECT_EQ(def.sim.boiw_size, 200u);
  EXPECT_EQ(def.sim.boiw_cadence, 2000);
  EXPECT_EQ(def.sim.sinkhorn.epsilon, 0.05);
  EXPECT_EQ(def.sim.gamma, 5.0);

  PipelineConfig c;
  c.ufp.beta = 1.7;
  c.ufp.equalize_mode = EqualizeMode::GlobalMean;
  c.nms_iou = 0.123456789012345;
  c.sim.sinkhorn.tol = 3.3e-7;
  c.sim.use_ot = false;
  c.sim.init = ProxyInit::RandomNormal;
  c.sim.seed = 18446744073709551557ull;
  const std::string text = io::config_to_json(c).dump(1);
  const auto back = io::config_from_json(io::parse_json(text, "config"));
  EXPECT_EQ(io::config_to_json(back).dump(1), text);
  EXPECT_EQ(back.sim.seed, c.sim.seed);
  EXPECT_EQ(back.ufp.equalize_mode, EqualizeMode::GlobalMean);

  const auto partial = io::config_from_json(io::json::parse(R"({"beta": 1.0})"));
  EXPECT_EQ(partial.ufp.beta, 1.0);
  EXPECT_EQ(partial.ufp.fixed_size, 96);
}

TEST(ConfigIo, Errors) {
  EXPECT_EQ(kind_of([] { io::config_from_json(io::json::parse(R"({"betta": 1.5})")); }), ErrorKind::Validation);
  EXPECT_EQ(kind_of([] { io::config_from_json(io::json::parse(R"({"beta": 0.5})")); }), ErrorKind::Validation);
  EXPECT_EQ(kind_of([] { io::config_from_json(io::json::parse(R"({"nms_iou": 2})")); }), ErrorKind::Validation);
  EXPECT_EQ(kind_of([] { io::config_from_json(io::json::parse(R"({"sim_lr": 0})")); }), ErrorKind::Validation);
  EXPECT_EQ(kind_of([] { io::config_from_json(io::json::parse(R"({"equalize_mode": "median"})")); }), ErrorKind::Validation);
  EXPECT_EQ(kind_of([] { io::config_from_json(io::json::parse(R"({"beta": "big"})")); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { io::config_from_json(io::json::parse(R"({"boiw_size": -3})")); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { io::config_from_json(io::json::parse(R"([1, 2])")); }), ErrorKind::Parse);
}

TEST(ConfigIo, SeedEnvironmentOverride) {
  TempDir dir;
  io::save_config(dir / "c.json", PipelineConfig{});
  ::setenv("UFPPACK_SEED", "1234", 1);
  EXPECT_EQ(io::load_config(dir / "c.json").sim.seed, 1234u);
  io::write_file_atomic(dir / "s.json", R"({"seed": 5})");
  EXPECT_EQ(io::load_scene_spec(dir / "s.json").seed, 1234u);
  ::setenv("UFPPACK_SEED", "12x", 1);
  EXPECT_EQ(kind_of([&] { io::load_config(dir / "c.json"); }), ErrorKind::Validation);
  ::unsetenv("UFPPACK_SEED");
  EXPECT_EQ(io::load_config(dir / "c.json").sim.seed, TrainSimConfig{}.seed);
  EXPECT_EQ(io::load_scene_spec(dir / "s.json").seed, 5u);
}

TEST(SceneSpecIo, RoundTrip) {
  SceneSpec s;
  s.extent = {640.5, 480};
  s.proportions = {0.5, 0.25, 0.25};
  s.seed = 99;
  s.drop_rate = 0.0;
  const std::string text = io::scene_spec_to_json(s).dump();
  EXPECT_EQ(io::scene_spec_to_json(io::scene_spec_from_json(io::json::parse(text))).dump(), text);
  EXPECT_EQ(kind_of([] { io::scene_spec_from_json(io::json::parse(R"({"colour": 1})")); }), ErrorKind::Validation);
}

TEST(ReportIo, JsonLinesRoundTrip) {
  TempDir dir;
  TrainReport r;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 3);
  for (int i = 1; i <= 50; ++i) r.records.push_back({i, u(rng), u(rng), u(rng), u(rng), u(rng)});
  io::save_report(dir / "r.jsonl", r);
  const auto back = io::load_report(dir / "r.jsonl");
  ASSERT_EQ(back.size(), r.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].step, r.records[i].step);
    EXPECT_EQ(back[i].l_det, r.records[i].l_det);
    EXPECT_EQ(back[i].l_ot, r.records[i].l_ot);
    EXPECT_EQ(back[i].l_cl, r.records[i].l_cl);
    EXPECT_EQ(back[i].min_proxy_distance, r.records[i].min_proxy_distance);
    EXPECT_EQ(back[i].max_proxy_similarity, r.records[i].max_proxy_similarity);
  }
  const std::string text = io::read_file(dir / "r.jsonl");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 50);
  EXPECT_EQ(kind_of([] { io::records_from_jsonl("{\"step\": 1}\n"); }), ErrorKind::Parse);
}

TEST(StatsIo, RoundTrip) {
  const std::vector<BBox> boxes{{0, 0, 20, 20}, {10, 10, 30, 30}, {50, 50, 150, 150}};
  const MosaicLayout layout{300, 200, {{{0, 0, 40, 40}, 2.5, 2, 2}}};
  const auto r = io::compute_stats(boxes, {200, 200}, &layout);
  ASSERT_TRUE(r.mosaic);
  EXPECT_EQ(r.uncovered, 1u);
  EXPECT_EQ(io::stats_report_from_json(io::parse_json(io::stats_report_to_json(r).dump(), "s")), r);
  const auto src_only = io::compute_stats(boxes, {200, 200});
  EXPECT_FALSE(src_only.mosaic);
  EXPECT_EQ(io::stats_report_from_json(io::stats_report_to_json(src_only)), src_only);
}

TEST(VocabIo, RoundTrip) {
  TempDir dir;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0, 1);
  std::vector<VocabQueue> vocab{VocabQueue(0, 4), VocabQueue(3, 2)};
  for (int i = 0; i < 6; ++i) vocab[0].push(Vector::NullaryExpr(5, [&] { return g(rng); }));
  vocab[1].push(Vector::NullaryExpr(5, [&] { return g(rng); }));
  io::save_vocab(dir / "v.json", vocab);
  const auto back = io::load_vocab(dir / "v.json");
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t q = 0; q < 2; ++q) {
    EXPECT_EQ(back[q].class_id(), vocab[q].class_id());
    EXPECT_EQ(back[q].capacity(), vocab[q].capacity());
    EXPECT_EQ(back[q].entries(), vocab[q].entries());
  }
}

TEST(AtomicWrite, NoPartialFiles) {
  TempDir dir;
  io::write_file_atomic(dir / "a.txt", "hello");
  EXPECT_EQ(io::read_file(dir / "a.txt"), "hello");
  io::write_file_atomic(dir / "a.txt", "bye");
  EXPECT_EQ(io::read_file(dir / "a.txt"), "bye");
  EXPECT_EQ(kind_of([&] { io::write_file_atomic(dir / "missing" / "b.txt", "x"); }), ErrorKind::Io);
  EXPECT_EQ(std::distance(fs::directory_iterator(dir.path()), fs::directory_iterator()), 1);
  EXPECT_EQ(kind_of([&] { io::read_file(dir / "nope"); }), ErrorKind::Io);
}

TEST(Ppm, EncodeDecodeRoundTrip) {
  TempDir dir;
  io::Raster r(7, 5);
  std::mt19937_64 rng(3);
  for (auto& b : r.rgb) b = static_cast<std::uint8_t>(rng());
  io::write_ppm(dir / "a.ppm", r);
  EXPECT_EQ(io::read_ppm(dir / "a.ppm"), r);
  const std::string with_comment = "P6\n# made by hand\n2 1\n255\n" + std::string("\x01\x02\x03\x04\x05\x06", 6);
  const auto c = io::decode_ppm(with_comment);
  EXPECT_EQ(c.width, 2);
  EXPECT_EQ(c.rgb[5], 6);
  const std::string bytes = io::encode_ppm(r);
  EXPECT_EQ(kind_of([&] { io::decode_ppm(bytes.substr(0, bytes.size() - 1)); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { io::decode_ppm("P3\n1 1\n255\n0 0 0"); }), ErrorKind::Parse);
}

TEST(Ppm, IdentityPlacementCopiesBytes) {
  io::Raster src(9, 6);
  std::mt19937_64 rng(4);
  for (auto& b : src.rgb) b = static_cast<std::uint8_t>(rng());
  const MosaicLayout l{9, 6, {{{0, 0, 9, 6}, 1.0, 0, 0}}};
  EXPECT_EQ(io::compose_mosaic(l, src), src);
}

TEST(Ppm, ConstantCropDoubles) {
  io::Raster src(10, 10);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) {
      auto* p = src.at(x, y);
      p[0] = 200, p[1] = 100, p[2] = 50;
    }
  const MosaicLayout l{20, 14, {{{2, 3, 6, 8}, 2.0, 1, 2}}};
  const auto out = io::compose_mosaic(l, src);
  for (int y = 0; y < 14; ++y) {
    for (int x = 0; x < 20; ++x) {
      const bool inside = x >= 1 && x < 9 && y >= 2 && y < 12;
      const auto* p = out.at(x, y);
      ASSERT_EQ(p[0], inside ? 200 : 0) << x << "," << y;
      ASSERT_EQ(p[2], inside ? 50 : 0);
    }
  }
}

TEST(Ppm, CheckerboardMatchesScalarBilinear) {
  io::Raster src(2, 2);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 2; ++x)
      for (int c = 0; c < 3; ++c) src.at(x, y)[c] = ((x + y) % 2 == 0) ? 255 : 0;
  const MosaicLayout l{4, 4, {{{0, 0, 2, 2}, 2.0, 0, 0}}};
  const auto out = io::compose_mosaic(l, src);
  for (int v = 0; v < 4; ++v) {
    for (int u = 0; u < 4; ++u) {
      const double sx = (u + 0.5) / 2 - 0.5, sy = (v + 0.5) / 2 - 0.5;
      const double want = oracle::bilinear(src, 0, sx, sy, 0, 0, 1, 1);
      EXPECT_EQ(out.at(u, v)[0], static_cast<int>(std::lround(want))) << u << "," << v;
    }
  }
  EXPECT_EQ(out.at(0, 0)[0], 255);
  EXPECT_EQ(out.at(1, 1)[0], 159);
}

TEST(Ppm, RandomPlacementsMatchScalarBilinear) {
  std::mt19937_64 rng(12);
  io::Raster src(40, 30);
  for (auto& b : src.rgb) b = static_cast<std::uint8_t>(rng());
  std::uniform_real_distribution<double> sc(1.0, 3.0);
  for (int t = 0; t < 20; ++t) {
    const BBox s = oracle::random_box(rng, 40, 30, 2, 12);
    const Placement p{s, sc(rng), 3, 4};
    const MosaicLayout l{std::ceil(p.dest().x2) + 3, std::ceil(p.dest().y2) + 3, {p}};
    const auto out = io::compose_mosaic(l, src);
    const int x0 = static_cast<int>(std::floor(s.x1)), y0 = static_cast<int>(std::floor(s.y1));
    const int x1 = std::max(x0, static_cast<int>(std::ceil(s.x2)) - 1), y1 = std::max(y0, static_cast<int>(std::ceil(s.y2)) - 1);
    for (int v = static_cast<int>(std::lround(p.dest_y)); v < static_cast<int>(std::lround(p.dest().y2)); ++v) {
      for (int u = static_cast<int>(std::lround(p.dest_x)); u < static_cast<int>(std::lround(p.dest().x2)); ++u) {
        const double sx = s.x1 + (u + 0.5 - p.dest_x) / p.scale - 0.5, sy = s.y1 + (v + 0.5 - p.dest_y) / p.scale - 0.5;
        for (int c = 0; c < 3; ++c) {
          const double want = oracle::bilinear(src, c, sx, sy, x0, y0, x1, y1);
          ASSERT_LE(std::abs(out.at(u, v)[c] - want), 0.5 + 1e-9) << "trial " << t;
        }
      }
    }
    ASSERT_EQ(out.at(0, 0)[0], 0);
  }
}

TEST(Ppm, PlacementOutsideRasterIsCompositionError) {
  const io::Raster src(10, 10);
  EXPECT_EQ(kind_of([&] { io::compose_mosaic(MosaicLayout{30, 30, {{{5, 5, 12, 9}, 1.0, 0, 0}}}, src); }),
            ErrorKind::Composition);
  EXPECT_EQ(kind_of([&] { io::compose_mosaic(MosaicLayout{5, 5, {{{0, 0, 8, 8}, 1.0, 0, 0}}}, src); }),
            ErrorKind::Composition);
}
