#pragma once

// Subcommands of the acpv tool. Exit codes: 0 success, 1 partial result
// (violations or skipped patches), 2 usage error.

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "acpv/cli/config.hpp"
#include "acpv/io.hpp"
#include "acpv/metrics.hpp"
#include "acpv/simplify.hpp"
#include "acpv/svg.hpp"
#include "acpv/synth.hpp"
#include "acpv/validate.hpp"

namespace acpv::cli {

namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kPartial = 1, kUsage = 2 };

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Results must be
/// written to per-index slots so that the reduction order stays fixed.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  const std::size_t threads = std::min<std::size_t>(n, std::size_t(std::max(1, workers)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// Flags shared by several subcommands, with config-file fallbacks.
struct Common {
  std::string config;
  double tau = 3.0;
  float nms_threshold = 0.3f;
  std::string dp_eps = "2";
  double merge_radius = 1.5;
  int band = 2;
  std::string deltas = "2,4,6";
  int classes = 5;
  std::string elongated;
  int workers = 1;
  std::uint64_t seed = 0;
  int peak_k = 11;
  double peak_sigma = 1.0;
  ClassScheme scheme;

  std::vector<std::pair<CLI::Option*, std::string>> bound;

  void bind(CLI::App* app, std::initializer_list<const char*> which) {
    for (std::string w : which) {
      CLI::Option* o = nullptr;
      if (w == "tau") o = app->add_option("--tau", tau, "Peak-to-boundary snapping radius (px)")->capture_default_str();
      if (w == "nms") o = app->add_option("--nms-threshold", nms_threshold, "Heatmap NMS threshold")->capture_default_str();
      if (w == "dp") o = app->add_option("--dp-eps", dp_eps, "Douglas-Peucker tolerance (px); lists allowed where noted")->capture_default_str();
      if (w == "band") o = app->add_option("--band", band, "Boundary IoU band width (px)")->capture_default_str();
      if (w == "deltas") o = app->add_option("--deltas", deltas, "Vertex-to-boundary distances (px), comma separated")->capture_default_str();
      if (w == "classes") o = app->add_option("--classes", classes, "Number of classes")->capture_default_str();
      if (w == "elongated") o = app->add_option("--elongated", elongated, "Classes scored with APLS (names or ids; default road,water)");
      if (w == "workers") o = app->add_option("--workers", workers, "Patch-level worker threads")->capture_default_str();
      if (w == "seed") o = app->add_option("--seed", seed, "Random seed")->capture_default_str();
      if (o) bound.push_back({o, w});
    }
    if (!app->get_option_no_throw("--config"))
      app->add_option("--config", config, "key = value config file (default: $ACPV_CONFIG)");
  }

  /// Fills unset flags from the config file and checks ranges.
  void finish() {
    const ConfigFile cf = ConfigFile::resolve(config);
    auto unset = [&](const std::string& w) {
      for (const auto& [o, name] : bound)
        if (name == w) return o->count() == 0;
      return true;
    };
    if (unset("tau") && cf.has("tau")) tau = parse_double(cf.get("tau"), "tau");
    if (unset("nms") && cf.has("nms_threshold")) nms_threshold = float(parse_double(cf.get("nms_threshold"), "nms_threshold"));
    if (unset("dp") && cf.has("dp_eps")) dp_eps = cf.get("dp_eps");
    if (unset("band") && cf.has("band")) band = int(parse_int(cf.get("band"), "band"));
    if (unset("deltas") && cf.has("deltas")) deltas = cf.get("deltas");
    if (unset("classes") && cf.has("classes")) classes = int(parse_int(cf.get("classes"), "classes"));
    if (unset("workers") && cf.has("workers")) workers = int(parse_int(cf.get("workers"), "workers"));
    if (unset("seed") && cf.has("seed")) seed = std::uint64_t(parse_int(cf.get("seed"), "seed"));
    if (cf.has("anchor_merge_radius")) merge_radius = parse_double(cf.get("anchor_merge_radius"), "anchor_merge_radius");
    if (cf.has("peak_k")) peak_k = int(parse_int(cf.get("peak_k"), "peak_k"));
    if (cf.has("peak_sigma")) peak_sigma = parse_double(cf.get("peak_sigma"), "peak_sigma");
    if (cf.has("class_names")) scheme.names = split_list(cf.get("class_names"));
    if (cf.has("palette")) scheme.palette = split_list(cf.get("palette"));
    if (cf.has("elongated")) scheme.elongated = split_list(cf.get("elongated"));
    if (!unset("elongated")) scheme.elongated = split_list(elongated);

    if (!(tau >= 0)) throw UsageError("--tau must be >= 0");
    if (!(nms_threshold >= 0 && nms_threshold <= 1)) throw UsageError("--nms-threshold must be in [0, 1]");
    if (band < 1) throw UsageError("--band must be >= 1");
    if (classes < 1 || classes > 254) throw UsageError("--classes must be in [1, 254]");
    if (workers < 1) throw UsageError("--workers must be >= 1");
    if (peak_k < 3 || peak_k % 2 == 0) throw UsageError("peak_k must be odd and >= 3");
    if (!(peak_sigma > 0)) throw UsageError("peak_sigma must be > 0");
    for (double e : dp_epsilons())
      if (!(e >= 0)) throw UsageError("--dp-eps must be >= 0");
    for (double d : delta_list())
      if (!(d >= 0)) throw UsageError("--deltas must be >= 0");
  }

  std::vector<double> dp_epsilons() const { return parse_doubles(dp_eps, "--dp-eps"); }
  std::vector<double> delta_list() const { return parse_doubles(deltas, "--deltas"); }

  EvaluateOptions evaluate_options() const {
    EvaluateOptions o;
    o.num_classes = classes;
    o.band = band;
    o.deltas = delta_list();
    o.elongated = scheme.elongated_ids(classes);
    o.peak_k = peak_k;
    o.peak_sigma = peak_sigma;
    o.nms_threshold = nms_threshold;
    return o;
  }

  VectorizeOptions vectorize_options(Mode mode) const {
    VectorizeOptions o;
    o.mode = mode;
    o.nms_threshold = nms_threshold;
    o.projection.tau = tau;
    o.projection.anchor_merge_radius = merge_radius;
    const auto eps = dp_epsilons();
    if (eps.size() != 1) throw UsageError("--dp-eps takes a single value here");
    o.dp_epsilon = eps.front();
    return o;
  }

  std::vector<std::string> class_names() const {
    std::vector<std::string> n = scheme.names;
    for (int c = int(n.size()); c < classes; ++c) n.push_back(std::to_string(c));
    n.resize(std::size_t(classes));
    return n;
  }
};

inline Mode parse_mode(const std::string& s) {
  if (s == "vss") return Mode::vss;
  if (s == "dp") return Mode::dp;
  if (s == "none") return Mode::none;
  throw UsageError("--mode must be one of vss, dp, none");
}

inline std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100 * v);
  return buf;
}

inline void print_report(std::ostream& os, const ComplianceReport& r, std::size_t max_violations = 20) {
  auto line = [&](const char* tag, const char* name, bool ok) {
    os << "  (" << tag << ") " << name << ": " << (ok ? "ok" : "VIOLATED") << '\n';
  };
  line("a", "planar partition", r.planar_partition_ok);
  line("b", "shared boundaries", r.shared_boundaries_ok);
  line("c", "zero gap/overlap", r.zero_gap_overlap_ok);
  line("d", "linear geometry", r.linear_geometry_ok);
  line("e", "semantic consistency", r.semantic_consistency_ok);
  line("f", "minimal redundancy", r.minimal_redundancy_ok);
  os << "gap " << percent(r.gap_rate) << " inter " << percent(r.inter_overlap) << " intra "
     << percent(r.intra_overlap) << " sec " << percent(r.sec) << (r.overlay_rasterized ? " (rasterized overlay)" : "")
     << '\n';
  for (std::size_t i = 0; i < std::min(max_violations, r.violations.size()); ++i) {
    const auto& v = r.violations[i];
    os << "  violation (" << v.constraint << ") " << v.message << " at (" << v.location.x << ", " << v.location.y
       << ")";
    if (v.polygon >= 0) os << " polygon " << v.polygon;
    os << '\n';
  }
  if (r.violations.size() > max_violations)
    os << "  ... " << r.violations.size() - max_violations << " more violations\n";
}

inline fs::path find_mask(const fs::path& dir, const std::string& stem) {
  for (const char* ext : {".png", ".pgm"})
    if (fs::exists(dir / (stem + ext))) return dir / (stem + ext);
  return {};
}

// ---------------------------------------------------------------------------
// vectorize
// ---------------------------------------------------------------------------

struct VectorizeArgs {
  Common common;
  std::string mask, heatmap, mode = "vss", out, svg;
};

inline int cmd_vectorize(VectorizeArgs& a, std::ostream& os) {
  a.common.finish();
  const Mode mode = parse_mode(a.mode);
  if (mode == Mode::vss && a.heatmap.empty()) throw UsageError("--mode vss requires --heatmap");
  const VectorizeOptions opt = a.common.vectorize_options(mode);
  const LabelMask mask = load_mask(a.mask, a.common.classes);
  std::optional<Heatmap> hm;
  if (!a.heatmap.empty()) hm = load_heatmap(a.heatmap);
  const VectorizeResult r = vectorize(mask, hm ? &*hm : nullptr, opt);
  write_partition(r.partition, a.out);
  if (!a.svg.empty()) {
    SvgStyle style;
    style.palette = a.common.scheme.palette;
    detail::write_file(a.svg, render_svg(r.partition, style));
  }
  const ComplianceReport rep = validate_acpv(r.partition);
  os << "polygons " << r.partition.polygons.size() << '\n';
  os << "vertices overdense " << r.overdense_vertices << " simplified " << r.simplified_vertices << '\n';
  if (mode == Mode::vss) os << "peaks " << r.peaks << " repair rounds " << r.repair.rounds << " reinserted " << r.repair.reinserted << '\n';
  print_report(os, rep);
  return rep.all_ok() ? kOk : kPartial;
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

struct ValidateArgs {
  Common common;
  std::string input, out;
  double snap = 0;
  bool lenient = false;
};

inline int cmd_validate(ValidateArgs& a, std::ostream& os) {
  a.common.finish();
  if (!(a.snap >= 0)) throw UsageError("--snap must be >= 0");
  LoadDiagnostics diag;
  Partition p = load_partition(a.input, &diag, a.lenient || a.snap > 0 ? LoadMode::lenient : LoadMode::strict);
  if (diag.reoriented_rings) os << "reoriented rings " << diag.reoriented_rings << '\n';
  if (a.snap > 0) p = snap_and_clean(p, a.snap);
  if (!a.out.empty()) write_partition(p, a.out);
  const ComplianceReport rep = validate_acpv(p);
  os << "polygons " << p.polygons.size() << " vertices " << vertex_count(p) << '\n';
  print_report(os, rep);
  return rep.all_ok() ? kOk : kPartial;
}

// ---------------------------------------------------------------------------
// render
// ---------------------------------------------------------------------------

struct RenderArgs {
  Common common;
  std::string input, out;
  double scale = 4.0;
  bool no_vertices = false, no_overlay = false;
};

inline int cmd_render(RenderArgs& a, std::ostream& os) {
  a.common.finish();
  if (!(a.scale > 0)) throw UsageError("--scale must be > 0");
  const Partition p = load_partition(a.input, nullptr, LoadMode::lenient);
  SvgStyle style;
  style.palette = a.common.scheme.palette;
  style.scale = a.scale;
  style.vertices = !a.no_vertices;
  style.overlay = !a.no_overlay;
  detail::write_file(a.out, render_svg(p, style));
  os << "wrote " << a.out << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthArgs {
  Common common;
  std::string out;
  int count = 1;
  SynthConfig cfg;
};

inline bool has_noise(const NoiseConfig& n) {
  return n.boundary_jitter_px > 0 || n.label_flip_rate > 0 || n.heatmap_dropout_rate > 0 || n.spurious_peak_rate > 0;
}

inline int cmd_synth(SynthArgs& a, std::ostream& os) {
  a.common.finish();
  if (a.count < 1) throw UsageError("--count must be >= 1");
  SynthConfig base = a.cfg;
  base.seed = a.common.seed;
  base.num_classes = a.common.classes;
  try {
    check_config(base);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const fs::path out = a.out;
  const bool noisy = has_noise(base.noise);
  for (const char* d : {"masks", "heatmaps", "gt"}) fs::create_directories(out / d);
  if (noisy) {
    fs::create_directories(out / "noisy" / "masks");
    fs::create_directories(out / "noisy" / "heatmaps");
  }
  std::vector<nlohmann::json> entries(std::size_t(a.count));
  parallel_for(std::size_t(a.count), a.common.workers, [&](std::size_t i) {
    SynthConfig c = base;
    c.seed = base.seed + i;
    char stem[32];
    std::snprintf(stem, sizeof stem, "patch_%04zu", i);
    const Partition gt = generate_partition(c);
    const LabelMask mask = rasterize(gt, c.num_classes);
    const Heatmap hm = render_heatmap(gt, c.heatmap_sigma);
    const std::string s = stem;
    save_mask(mask, out / "masks" / (s + ".png"));
    save_heatmap(hm, out / "heatmaps" / (s + ".pfm"));
    write_partition(gt, out / "gt" / (s + ".geojson"));
    nlohmann::json e{{"stem", s},
                     {"seed", c.seed},
                     {"config_hash", config_hash(c)},
                     {"mask", "masks/" + s + ".png"},
                     {"heatmap", "heatmaps/" + s + ".pfm"},
                     {"partition", "gt/" + s + ".geojson"},
                     {"polygons", gt.polygons.size()}};
    if (noisy) {
      const auto [nm, nh] = perturb(mask, hm, c.noise, c.seed);
      save_mask(nm, out / "noisy" / "masks" / (s + ".png"));
      save_heatmap(nh, out / "noisy" / "heatmaps" / (s + ".pfm"));
      e["noisy_mask"] = "noisy/masks/" + s + ".png";
      e["noisy_heatmap"] = "noisy/heatmaps/" + s + ".pfm";
    }
    entries[i] = std::move(e);
  });
  nlohmann::json manifest{{"config", config_to_json(base)}, {"config_hash", config_hash(base)}, {"patches", entries}};
  detail::write_file(out / "manifest.json", manifest.dump(2) + "\n");
  os << "generated " << a.count << " patches in " << out.string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateArgs {
  Common common;
  std::string pred, gt, masks, heatmaps, out;
};

inline std::vector<std::string> geojson_stems(const fs::path& dir) {
  std::vector<std::string> stems;
  if (!fs::is_directory(dir)) throw UsageError("not a directory: " + dir.string());
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".geojson") stems.push_back(e.path().stem().string());
  std::sort(stems.begin(), stems.end());
  return stems;
}

inline int cmd_evaluate(EvaluateArgs& a, std::ostream& os) {
  a.common.finish();
  const EvaluateOptions opt = a.common.evaluate_options();
  if (!fs::is_directory(a.pred)) throw UsageError("--pred is not a directory: " + a.pred);
  if (!fs::is_directory(a.masks)) throw UsageError("--masks is not a directory: " + a.masks);
  const auto stems = geojson_stems(a.gt);
  const fs::path out = a.out;
  fs::create_directories(out / "patches");
  const auto names = a.common.class_names();

  std::vector<std::optional<MetricsReport>> reports(stems.size());
  std::vector<std::string> reasons(stems.size());
  parallel_for(stems.size(), a.common.workers, [&](std::size_t i) {
    const std::string& s = stems[i];
    try {
      const fs::path pp = fs::path(a.pred) / (s + ".geojson");
      if (!fs::exists(pp)) {
        reasons[i] = "missing prediction";
        return;
      }
      const fs::path mp = find_mask(a.masks, s);
      if (mp.empty()) {
        reasons[i] = "missing ground-truth mask";
        return;
      }
      std::optional<Heatmap> hm;
      if (!a.heatmaps.empty()) {
        const fs::path hp = fs::path(a.heatmaps) / (s + ".pfm");
        if (!fs::exists(hp)) {
          reasons[i] = "missing heatmap";
          return;
        }
        hm = load_heatmap(hp);
      }
      const Partition pred = load_partition(pp, nullptr, LoadMode::lenient);
      const Partition gt = load_partition(fs::path(a.gt) / (s + ".geojson"), nullptr, LoadMode::lenient);
      const LabelMask mask = load_mask(mp, opt.num_classes);
      MetricsReport r = evaluate_patch(pred, gt, mask, opt, hm ? &*hm : nullptr);
      detail::write_file(out / "patches" / (s + ".json"), report_to_json(r, names).dump(2) + "\n");
      reports[i] = std::move(r);
    } catch (const std::exception& e) {
      reasons[i] = e.what();
    }
  });

  MetricsReport total;
  total.elongated = opt.elongated;
  total.deltas = opt.deltas;
  total.classes.resize(std::size_t(opt.num_classes));
  nlohmann::json skipped = nlohmann::json::array();
  for (std::size_t i = 0; i < stems.size(); ++i) {
    if (reports[i]) total.merge(*reports[i]);
    else skipped.push_back({{"patch", stems[i]}, {"reason", reasons[i]}});
  }
  nlohmann::json j = report_to_json(total, names);
  j["skipped"] = skipped;
  detail::write_file(out / "report.json", j.dump(2) + "\n");
  const std::string csv = report_to_csv(total, names);
  detail::write_file(out / "report.csv", csv);
  os << csv;
  os << "patches evaluated " << total.patches << " skipped " << skipped.size() << '\n';
  for (const auto& s : skipped) os << "  skipped " << s["patch"].get<std::string>() << ": " << s["reason"].get<std::string>() << '\n';
  return total.patches > 0 && skipped.empty() ? kOk : kPartial;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepArgs {
  Common common;
  std::string axis, values, masks, heatmaps, gt, out, mode;
};

struct SweepRow {
  double value;
  int cls;
  std::optional<double> iou, polis, n_ratio;
  std::size_t vertices = 0, pairs = 0;
  std::optional<double> redundancy() const {
    if (!n_ratio || *n_ratio <= 0) return std::nullopt;
    return std::max(*n_ratio, 1.0 / *n_ratio);
  }
};

inline int cmd_sweep(SweepArgs& a, std::ostream& os) {
  a.common.finish();
  if (a.axis != "nms" && a.axis != "dp_eps" && a.axis != "tau") throw UsageError("--axis must be nms, dp_eps or tau");
  const auto values = parse_doubles(a.values, "--values");
  if (values.size() < 2) throw UsageError("--values needs at least two entries");
  const Mode mode = a.mode.empty() ? (a.axis == "dp_eps" ? Mode::dp : Mode::vss) : parse_mode(a.mode);
  if (mode == Mode::vss && a.heatmaps.empty()) throw UsageError("vss sweeps require --heatmaps");
  if (!fs::is_directory(a.masks)) throw UsageError("--masks is not a directory: " + a.masks);
  const auto stems = geojson_stems(a.gt);
  if (stems.empty()) throw UsageError("no ground-truth partitions in " + a.gt);
  EvaluateOptions eo = a.common.evaluate_options();
  eo.elongated.clear();

  struct Input {
    Partition gt;
    LabelMask mask;
    std::optional<Heatmap> hm;
  };
  std::vector<Input> inputs(stems.size());
  parallel_for(stems.size(), a.common.workers, [&](std::size_t i) {
    const fs::path mp = find_mask(a.masks, stems[i]);
    if (mp.empty()) throw Error("sweep: no mask for " + stems[i]);
    inputs[i].gt = load_partition(fs::path(a.gt) / (stems[i] + ".geojson"), nullptr, LoadMode::lenient);
    inputs[i].mask = load_mask(mp, eo.num_classes);
    if (!a.heatmaps.empty()) inputs[i].hm = load_heatmap(fs::path(a.heatmaps) / (stems[i] + ".pfm"));
  });

  std::vector<SweepRow> rows;
  for (double v : values) {
    Common c = a.common;
    if (a.axis == "nms") c.nms_threshold = float(v);
    if (a.axis == "tau") c.tau = v;
    if (a.axis == "dp_eps") c.dp_eps = std::to_string(v);
    if (!(v >= 0) || (a.axis == "nms" && v > 1)) throw UsageError("--values out of range for axis " + a.axis);
    const VectorizeOptions vo = c.vectorize_options(mode);
    std::vector<MetricsReport> reps(inputs.size());
    std::vector<std::vector<std::size_t>> verts(inputs.size(), std::vector<std::size_t>(std::size_t(eo.num_classes), 0));
    parallel_for(inputs.size(), a.common.workers, [&](std::size_t i) {
      const auto& in = inputs[i];
      const auto r = vectorize(in.mask, in.hm ? &*in.hm : nullptr, vo);
      for (const auto& lp : r.partition.polygons)
        if (lp.cls < eo.num_classes) verts[i][std::size_t(lp.cls)] += vertex_count(lp.polygon);
      reps[i] = evaluate_patch(r.partition, in.gt, in.mask, eo);
    });
    MetricsReport total;
    total.classes.resize(std::size_t(eo.num_classes));
    for (const auto& r : reps) total.merge(r);
    for (int k = 0; k < eo.num_classes; ++k) {
      const auto& cm = total.classes[std::size_t(k)];
      SweepRow row{v, k, cm.iou(), cm.polis(), cm.n_ratio()};
      for (const auto& vv : verts) row.vertices += vv[std::size_t(k)];
      row.pairs = cm.pairs;
      rows.push_back(row);
    }
  }

  const auto names = a.common.class_names();
  std::vector<std::vector<std::string>> table{{"axis", "value", "class", "iou", "polis", "n_ratio", "r", "vertices", "pairs"}};
  for (const auto& r : rows) {
    char v[32];
    std::snprintf(v, sizeof v, "%g", r.value);
    table.push_back({a.axis, v, names[std::size_t(r.cls)], detail::fmt_cell(r.iou), detail::fmt_cell(r.polis),
                     detail::fmt_cell(r.n_ratio), detail::fmt_cell(r.redundancy()), std::to_string(r.vertices),
                     std::to_string(r.pairs)});
  }
  const std::string csv = detail::aligned_csv(table);
  if (!a.out.empty()) detail::write_file(a.out, csv);
  os << csv;
  return kOk;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& os = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Topology-consistent polygonal vectorization of multi-class label masks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "acpv 0.1.0");

  VectorizeArgs va;
  auto* vec = app.add_subcommand("vectorize", "Polygonize a label mask into a partition");
  vec->add_option("--mask", va.mask, "Label mask (PNG or PGM)")->required()->check(CLI::ExistingFile);
  vec->add_option("--heatmap", va.heatmap, "Vertex heatmap (PFM); required for --mode vss")->check(CLI::ExistingFile);
  vec->add_option("--mode", va.mode, "Simplification: vss, dp or none")->capture_default_str();
  vec->add_option("--out", va.out, "Output GeoJSON")->required();
  vec->add_option("--svg", va.svg, "Also render an SVG");
  va.common.bind(vec, {"tau", "nms", "dp", "classes"});

  ValidateArgs vla;
  auto* val = app.add_subcommand("validate", "Check a partition against the six constraints");
  val->add_option("input", vla.input, "Partition GeoJSON")->required()->check(CLI::ExistingFile);
  val->add_option("--snap", vla.snap, "Snap-and-clean tolerance (px) applied before checking")->capture_default_str();
  val->add_flag("--lenient", vla.lenient, "Accept degenerate or self-intersecting rings on load");
  val->add_option("--out", vla.out, "Write the (cleaned) partition");
  vla.common.bind(val, {});

  RenderArgs ra;
  auto* ren = app.add_subcommand("render", "Render a partition to SVG");
  ren->add_option("input", ra.input, "Partition GeoJSON")->required()->check(CLI::ExistingFile);
  ren->add_option("--out", ra.out, "Output SVG")->required();
  ren->add_option("--scale", ra.scale, "Pixels per domain unit")->capture_default_str();
  ren->add_flag("--no-vertices", ra.no_vertices, "Omit vertex markers");
  ren->add_flag("--no-overlay", ra.no_overlay, "Omit gap/overlap shading");
  ra.common.bind(ren, {});

  SynthArgs sa;
  auto* syn = app.add_subcommand("synth", "Generate synthetic ground truth, masks and heatmaps");
  syn->add_option("--out", sa.out, "Output directory")->required();
  syn->add_option("--count", sa.count, "Number of patches")->capture_default_str();
  syn->add_option("--width", sa.cfg.width, "Patch width (px)")->capture_default_str();
  syn->add_option("--height", sa.cfg.height, "Patch height (px)")->capture_default_str();
  syn->add_option("--cells", sa.cfg.cell_count, "Target face count")->capture_default_str();
  syn->add_option("--holes", sa.cfg.hole_probability, "Per-face hole probability")->capture_default_str();
  syn->add_option("--sigma", sa.cfg.heatmap_sigma, "Heatmap Gaussian sigma (px)")->capture_default_str();
  syn->add_option("--bend", sa.cfg.bend_probability, "Probability of a bent split chord")->capture_default_str();
  syn->add_option("--jitter", sa.cfg.noise.boundary_jitter_px, "Boundary jitter (px)")->capture_default_str();
  syn->add_option("--flip-rate", sa.cfg.noise.label_flip_rate, "Fraction of pixels in flipped blobs")->capture_default_str();
  syn->add_option("--dropout", sa.cfg.noise.heatmap_dropout_rate, "Heatmap peak dropout rate")->capture_default_str();
  syn->add_option("--spurious", sa.cfg.noise.spurious_peak_rate, "Spurious peaks per true peak")->capture_default_str();
  sa.common.bind(syn, {"classes", "seed", "workers"});

  EvaluateArgs ea;
  auto* ev = app.add_subcommand("evaluate", "Score predicted partitions against ground truth");
  ev->add_option("--pred", ea.pred, "Directory of predicted *.geojson")->required();
  ev->add_option("--gt", ea.gt, "Directory of ground-truth *.geojson")->required();
  ev->add_option("--masks", ea.masks, "Directory of ground-truth masks")->required();
  ev->add_option("--heatmaps", ea.heatmaps, "Directory of heatmaps for alignment and peak-shape scores");
  ev->add_option("--out", ea.out, "Report directory")->required();
  ea.common.bind(ev, {"band", "deltas", "classes", "elongated", "workers", "nms"});

  SweepArgs swa;
  auto* sw = app.add_subcommand("sweep", "Metric curves over one parameter");
  sw->add_option("--axis", swa.axis, "nms, dp_eps or tau")->required();
  sw->add_option("--values", swa.values, "Comma-separated values (at least two)")->required();
  sw->add_option("--masks", swa.masks, "Directory of input masks")->required();
  sw->add_option("--gt", swa.gt, "Directory of ground-truth *.geojson")->required();
  sw->add_option("--heatmaps", swa.heatmaps, "Directory of heatmaps (vss sweeps)");
  sw->add_option("--mode", swa.mode, "Override the simplification mode");
  sw->add_option("--out", swa.out, "Output CSV");
  swa.common.bind(sw, {"tau", "nms", "dp", "classes", "workers"});

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, os, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, os, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, os, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, os, err);
    return kUsage;
  }

  try {
    if (*vec) return cmd_vectorize(va, os);
    if (*val) return cmd_validate(vla, os);
    if (*ren) return cmd_render(ra, os);
    if (*syn) return cmd_synth(sa, os);
    if (*ev) return cmd_evaluate(ea, os);
    if (*sw) return cmd_sweep(swa, os);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kPartial;
  }
  return kUsage;
}

}  // namespace acpv::cli
