// ufppack: command-line driver for foreground packing and proxy simulations.
//
//   ufppack pack      --detections F --image-size WxH --config C --out-layout L [--image I --out-mosaic M]
//   ufppack unpack    --fine F --layout L --coarse G --config C --out D
//   ufppack stats     --boxes F --image-size WxH [--layout L] [--out S]
//   ufppack train-sim --config C --out R
//   ufppack synth     --spec S --out F [--out-gt G]
//
// Exit status: 0 success, 1 validation error, 2 I/O or parse error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ufpmp/ufpmp.hpp"

namespace {

using namespace ufpmp;

ImageExtent parse_image_size(const std::string& s) {
  const auto x = s.find_first_of("xX");
  std::size_t a = 0, b = 0;
  double w = 0, h = 0;
  try {
    if (x != std::string::npos) {
      w = std::stod(s.substr(0, x), &a);
      h = std::stod(s.substr(x + 1), &b);
    }
  } catch (const std::exception&) {
    a = 0;
  }
  if (x == std::string::npos || a != x || b != s.size() - x - 1 || !(w > 0) || !(h > 0)) {
    throw Error(ErrorKind::Validation, "--image-size must look like WxH with positive numbers, got '" + s + "'");
  }
  return {w, h};
}

/// Picks the detections of one image: the requested id, or the only image present.
std::pair<std::int64_t, std::vector<Detection>> select_image(const io::DetectionsByImage& all,
                                                             std::optional<std::int64_t> id, const std::string& what) {
  if (id) {
    auto it = all.find(*id);
    return {*id, it == all.end() ? std::vector<Detection>{} : it->second};
  }
  if (all.empty()) return {0, {}};
  if (all.size() > 1) {
    throw Error(ErrorKind::Validation, what + " holds " + std::to_string(all.size()) + " images; pass --image-id");
  }
  return *all.begin();
}

struct PackArgs {
  std::string detections, image_size, config, out_layout, image, out_mosaic;
  std::optional<std::int64_t> image_id;
};

int run_pack(const PackArgs& a) {
  const ImageExtent extent = parse_image_size(a.image_size);
  const PipelineConfig cfg = io::load_config(a.config);
  if (a.image.empty() != a.out_mosaic.empty()) {
    throw Error(ErrorKind::Validation, "--image and --out-mosaic must be given together");
  }
  const auto [id, dets] = select_image(io::load_detections(a.detections), a.image_id, a.detections);
  const UfpResult r = run_ufp(std::span<const Detection>(dets), extent, cfg.ufp);
  if (!a.image.empty()) {
    const io::Raster src = io::read_ppm(a.image);
    if (src.width != static_cast<int>(std::lround(extent.width)) || src.height != static_cast<int>(std::lround(extent.height))) {
      throw Error(ErrorKind::Validation, "--image is " + std::to_string(src.width) + "x" + std::to_string(src.height) +
                                             " but --image-size says " + a.image_size);
    }
    const io::Raster mosaic = io::compose_mosaic(r.layout, src);
    io::save_layout(a.out_layout, r.layout);
    io::write_ppm(a.out_mosaic, mosaic);
  } else {
    io::save_layout(a.out_layout, r.layout);
  }
  std::cout << "image " << id << ": " << dets.size() << " detections -> " << r.regions.regions.size()
            << " regions, mosaic " << r.layout.width << "x" << r.layout.height << "\n";
  return 0;
}

struct UnpackArgs {
  std::string fine, layout, coarse, config, out;
  std::optional<std::int64_t> image_id;
};

int run_unpack(const UnpackArgs& a) {
  const PipelineConfig cfg = io::load_config(a.config);
  const MosaicLayout layout = io::load_layout(a.layout);
  const auto coarse_all = io::load_detections(a.coarse);
  const auto fine_all = io::load_detections(a.fine);
  std::optional<std::int64_t> id = a.image_id;
  if (!id && coarse_all.size() == 1) id = coarse_all.begin()->first;
  const auto [cid, coarse] = select_image(coarse_all, id, a.coarse);
  const auto [fid, fine] = select_image(fine_all, id ? id : std::optional<std::int64_t>(cid), a.fine);
  std::size_t dropped = 0;
  io::DetectionsByImage out;
  out[cid] = unpack_and_fuse(fine, layout, coarse, cfg.nms_iou, &dropped);
  if (dropped > 0) std::cerr << "unpack: " << dropped << " fine detections fell outside every placement\n";
  io::save_detections(a.out, out);
  std::cout << "image " << cid << ": " << coarse.size() << " coarse + " << fine.size() << " fine -> " << out[cid].size()
            << " fused\n";
  return 0;
}

void print_stats(const char* label, const SizeStats& st, std::optional<double> fr_sum) {
  std::printf("%s FR %.2f%%", label, 100.0 * st.fr);
  if (fr_sum) std::printf(" (sum %.2f%%)", 100.0 * *fr_sum);
  std::printf(" small %.2f%% medium %.2f%% large %.2f%% count %zu\n", 100.0 * st.small, 100.0 * st.medium,
              100.0 * st.large, st.count);
}

struct StatsArgs {
  std::string boxes, image_size, layout, out;
  std::optional<std::int64_t> image_id;
};

int run_stats(const StatsArgs& a) {
  const ImageExtent extent = parse_image_size(a.image_size);
  const auto [id, dets] = select_image(io::load_detections(a.boxes), a.image_id, a.boxes);
  std::vector<BBox> boxes;
  for (const auto& d : dets) boxes.push_back(d.box);
  std::optional<MosaicLayout> layout;
  if (!a.layout.empty()) layout = io::load_layout(a.layout);
  const io::StatsReport r = io::compute_stats(boxes, extent, layout ? &*layout : nullptr);
  if (!a.out.empty()) io::save_stats_report(a.out, r);
  print_stats("source", r.source.stats, r.source.fr_sum);
  if (r.mosaic) {
    print_stats("mosaic", r.mosaic->stats, r.mosaic->fr_sum);
    if (r.uncovered > 0) std::printf("mosaic uncovered %zu\n", r.uncovered);
  }
  return 0;
}

int run_train_sim(const std::string& config, const std::string& out) {
  const PipelineConfig cfg = io::load_config(config);
  const TrainReport report = train_sim(cfg.sim);
  io::save_report(out, report);
  std::printf("steps %zu initial min distance %.6f final min distance %.6f final max similarity %.6f\n",
              report.records.size(), report.initial_min_distance, report.final_min_distance,
              report.final_max_similarity);
  return 0;
}

int run_synth(const std::string& spec_path, const std::string& out, const std::string& out_gt) {
  const SceneSpec spec = io::load_scene_spec(spec_path);
  const Scene scene = generate_scene(spec);
  io::DetectionsByImage coarse{{0, scene.coarse}};
  if (!out_gt.empty()) {
    io::DetectionsByImage gt;
    auto& list = gt[0];
    for (std::size_t i = 0; i < scene.ground_truth.size(); ++i) {
      list.push_back({scene.ground_truth[i], 1.0, scene.categories[i]});
    }
    io::save_detections(out_gt, gt);
  }
  io::save_detections(out, coarse);
  const SizeStats st = source_stats(scene.ground_truth, spec.extent);
  print_stats("ground-truth", st, std::nullopt);
  return 0;
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Io:
    case ErrorKind::Parse:
      return 2;
    default:
      return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Foreground packing for small-object detection, plus multi-proxy training simulations"};
  app.require_subcommand(1);

  PackArgs pk;
  auto* pack = app.add_subcommand("pack", "Merge, equalize and pack coarse detections into a mosaic layout");
  pack->add_option("--detections", pk.detections, "coarse detections (COCO results JSON)")->required();
  pack->add_option("--image-size", pk.image_size, "source image size, WxH")->required();
  pack->add_option("--config", pk.config, "pipeline config JSON")->required();
  pack->add_option("--out-layout", pk.out_layout, "output layout JSON")->required();
  pack->add_option("--image", pk.image, "source image (PPM P6)");
  pack->add_option("--out-mosaic", pk.out_mosaic, "output mosaic (PPM P6)");
  pack->add_option("--image-id", pk.image_id, "image to pack when the detections cover several");

  UnpackArgs up;
  auto* unpack = app.add_subcommand("unpack", "Map mosaic detections back to the source and fuse with coarse ones");
  unpack->add_option("--fine", up.fine, "fine detections in mosaic coordinates")->required();
  unpack->add_option("--layout", up.layout, "layout JSON written by pack")->required();
  unpack->add_option("--coarse", up.coarse, "coarse detections in source coordinates")->required();
  unpack->add_option("--config", up.config, "pipeline config JSON")->required();
  unpack->add_option("--out", up.out, "fused detections output")->required();
  unpack->add_option("--image-id", up.image_id, "image to fuse when the inputs cover several");

  StatsArgs sa;
  auto* stats = app.add_subcommand("stats", "Print foreground ratio and size buckets");
  stats->add_option("--boxes", sa.boxes, "boxes (COCO results JSON)")->required();
  stats->add_option("--image-size", sa.image_size, "source image size, WxH")->required();
  stats->add_option("--layout", sa.layout, "layout JSON for mosaic-side statistics");
  stats->add_option("--image-id", sa.image_id, "image to measure when the boxes cover several");
  stats->add_option("--out", sa.out, "write the statistics as JSON");

  std::string ts_config, ts_out;
  auto* ts = app.add_subcommand("train-sim", "Run the multi-proxy simulation and write a JSON-lines report");
  ts->add_option("--config", ts_config, "pipeline config JSON")->required();
  ts->add_option("--out", ts_out, "report output (JSON lines)")->required();

  std::string sy_spec, sy_out, sy_gt;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene");
  synth->add_option("--spec", sy_spec, "scene spec JSON")->required();
  synth->add_option("--out", sy_out, "coarse detections output")->required();
  synth->add_option("--out-gt", sy_gt, "ground-truth boxes output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e, std::cerr, std::cerr);
    return 1;
  }

  try {
    if (pack->parsed()) return run_pack(pk);
    if (unpack->parsed()) return run_unpack(up);
    if (stats->parsed()) return run_stats(sa);
    if (ts->parsed()) return run_train_sim(ts_config, ts_out);
    if (synth->parsed()) return run_synth(sy_spec, sy_out, sy_gt);
  } catch (const Error& e) {
    std::cerr << "ufppack: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "ufppack: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
