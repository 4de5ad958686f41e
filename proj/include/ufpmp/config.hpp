#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>

#include "ufpmp/io/atomic_file.hpp"
#include "ufpmp/io/json_util.hpp"
#include "ufpmp/pipeline.hpp"
#include "ufpmp/train_sim.hpp"

namespace ufpmp {

/// Every tunable of the pack/unpack pipeline and the proxy simulation.
/// Serialized as a flat JSON object; simulation-only keys carry a `sim_` prefix.
struct PipelineConfig {
  UfpOptions ufp{};
  double nms_iou = 0.5;
  TrainSimConfig sim{};  // also holds the Sinkhorn, BoIW, gamma and DBSCAN settings

  void validate() const {
    auto bad = [](const std::string& m) { throw Error(ErrorKind::Validation, "config: " + m); };
    if (!(ufp.beta >= 1.0)) bad("beta must be >= 1");
    if (!(ufp.fixed_size > 0)) bad("fixed_size must be positive");
    if (!(ufp.padding >= 0)) bad("padding must be >= 0");
    if (!(ufp.mosaic_width > 2 * ufp.padding)) bad("mosaic_width must exceed twice the padding");
    if (!(nms_iou >= 0 && nms_iou <= 1)) bad("nms_iou must be in [0,1]");
    try {
      sim.validate();
    } catch (const Error& e) {
      bad(e.what());
    }
  }
};

inline std::string_view to_string(EqualizeMode m) {
  return m == EqualizeMode::PerRegion ? "per-region" : "global-mean";
}

inline std::string_view to_string(ProxyInit i) { return i == ProxyInit::KMeans ? "kmeans" : "random-normal"; }

namespace io {

inline json config_to_json(const PipelineConfig& c) {
  const auto& s = c.sim;
  return {
      {"beta", c.ufp.beta},
      {"fixed_size", c.ufp.fixed_size},
      {"mosaic_width", c.ufp.mosaic_width},
      {"padding", c.ufp.padding},
      {"equalize_mode", to_string(c.ufp.equalize_mode)},
      {"nms_iou", c.nms_iou},
      {"sinkhorn_epsilon", s.sinkhorn.epsilon},
      {"sinkhorn_iters", s.sinkhorn.max_iters},
      {"sinkhorn_tol", s.sinkhorn.tol},
      {"boiw_size", s.boiw_size},
      {"boiw_m", s.boiw_m},
      {"boiw_cadence", s.boiw_cadence},
      {"gamma", s.gamma},
      {"dbscan_eps", s.dbscan_eps},
      {"dbscan_min_pts", s.dbscan_min_pts},
      {"k_max", s.k_max},
      {"seed", s.seed},
      {"sim_classes", s.classes},
      {"sim_proxies_per_class", s.proxies_per_class},
      {"sim_dim", s.dim},
      {"sim_modes_per_class", s.modes_per_class},
      {"sim_mode_spread", s.mode_spread},
      {"sim_mode_decay", s.mode_decay},
      {"sim_mode_noise", s.mode_noise},
      {"sim_batch_per_class", s.batch_per_class},
      {"sim_steps", s.steps},
      {"sim_lr", s.lr},
      {"sim_feature_lr", s.feature_lr},
      {"sim_use_ot", s.use_ot},
      {"sim_use_contrastive", s.use_contrastive},
      {"sim_warmup_steps", s.warmup_steps},
      {"sim_init", to_string(s.init)},
      {"sim_init_samples", s.init_samples},
      {"sim_init_restarts", s.init_restarts},
  };
}

namespace detail {

class FlatReader {
 public:
  FlatReader(const json& j, std::string_view what) : j_(j), what_(what) {
    if (!j.is_object()) throw Error(ErrorKind::Parse, what_ + ": top level must be an object");
  }

  template <class T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    bool ok = false;
    if constexpr (std::is_same_v<T, bool>) {
      ok = v.is_boolean();
    } else if constexpr (std::is_integral_v<T>) {
      ok = v.is_number_integer() && (std::is_signed_v<T> || v.is_number_unsigned() || v.get<std::int64_t>() >= 0);
    } else if constexpr (std::is_floating_point_v<T>) {
      ok = v.is_number();
    } else {
      ok = v.is_string();
    }
    if (!ok) throw Error(ErrorKind::Parse, what_ + ": field '" + key + "' has the wrong type");
    out = v.get<T>();
  }

  void known(const char* key) { seen_.insert(key); }

  void reject_unknown() const {
    std::string unknown;
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.contains(k)) unknown += (unknown.empty() ? "" : ", ") + k;
    }
    if (!unknown.empty()) throw Error(ErrorKind::Validation, what_ + ": unknown keys: " + unknown);
  }

  [[noreturn]] void invalid(const std::string& msg) const { throw Error(ErrorKind::Validation, what_ + ": " + msg); }

 private:
  const json& j_;
  std::string what_;
  std::set<std::string, std::less<>> seen_;
};

}  // namespace detail

inline PipelineConfig config_from_json(const json& j, std::string_view what = "config") {
  detail::FlatReader r(j, what);
  PipelineConfig c;
  auto& s = c.sim;
  std::string mode(to_string(c.ufp.equalize_mode)), init(to_string(s.init));
  r.read("beta", c.ufp.beta);
  r.read("fixed_size", c.ufp.fixed_size);
  r.read("mosaic_width", c.ufp.mosaic_width);
  r.read("padding", c.ufp.padding);
  r.read("equalize_mode", mode);
  r.read("nms_iou", c.nms_iou);
  r.read("sinkhorn_epsilon", s.sinkhorn.epsilon);
  r.read("sinkhorn_iters", s.sinkhorn.max_iters);
  r.read("sinkhorn_tol", s.sinkhorn.tol);
  r.read("boiw_size", s.boiw_size);
  r.read("boiw_m", s.boiw_m);
  r.read("boiw_cadence", s.boiw_cadence);
  r.read("gamma", s.gamma);
  r.read("dbscan_eps", s.dbscan_eps);
  r.read("dbscan_min_pts", s.dbscan_min_pts);
  r.read("k_max", s.k_max);
  r.read("seed", s.seed);
  r.read("sim_classes", s.classes);
  r.read("sim_proxies_per_class", s.proxies_per_class);
  r.read("sim_dim", s.dim);
  r.read("sim_modes_per_class", s.modes_per_class);
  r.read("sim_mode_spread", s.mode_spread);
  r.read("sim_mode_decay", s.mode_decay);
  r.read("sim_mode_noise", s.mode_noise);
  r.read("sim_batch_per_class", s.batch_per_class);
  r.read("sim_steps", s.steps);
  r.read("sim_lr", s.lr);
  r.read("sim_feature_lr", s.feature_lr);
  r.read("sim_use_ot", s.use_ot);
  r.read("sim_use_contrastive", s.use_contrastive);
  r.read("sim_warmup_steps", s.warmup_steps);
  r.read("sim_init", init);
  r.read("sim_init_samples", s.init_samples);
  r.read("sim_init_restarts", s.init_restarts);
  r.reject_unknown();

  if (mode == "per-region") c.ufp.equalize_mode = EqualizeMode::PerRegion;
  else if (mode == "global-mean") c.ufp.equalize_mode = EqualizeMode::GlobalMean;
  else r.invalid("equalize_mode must be 'per-region' or 'global-mean'");
  if (init == "kmeans") s.init = ProxyInit::KMeans;
  else if (init == "random-normal") s.init = ProxyInit::RandomNormal;
  else r.invalid("sim_init must be 'kmeans' or 'random-normal'");

  c.validate();
  return c;
}

/// Reads UFPPACK_SEED, if set, as an unsigned 64-bit seed.
inline std::optional<std::uint64_t> seed_override() {
  const char* v = std::getenv("UFPPACK_SEED");
  if (v == nullptr) return std::nullopt;
  const std::string s(v);
  std::size_t pos = 0;
  std::uint64_t seed = 0;
  try {
    if (s.empty() || s.front() == '-') throw std::invalid_argument(s);
    seed = std::stoull(s, &pos, 10);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size()) throw Error(ErrorKind::Validation, "UFPPACK_SEED must be an unsigned integer, got '" + s + "'");
  return seed;
}

inline void save_config(const std::filesystem::path& path, const PipelineConfig& c) {
  write_file_atomic(path, config_to_json(c).dump(1) + "\n");
}

/// Loads a config file; the UFPPACK_SEED environment variable replaces the seed.
inline PipelineConfig load_config(const std::filesystem::path& path) {
  PipelineConfig c = config_from_json(parse_json(read_file(path), path.string()), path.string());
  if (auto s = seed_override()) c.sim.seed = *s;
  return c;
}

}  // namespace io
}  // namespace ufpmp
