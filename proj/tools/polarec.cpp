#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "polarec/densify.hpp"
#include "polarec/eval.hpp"
#include "polarec/geometry.hpp"
#include "polarec/io.hpp"
#include "polarec/prior.hpp"
#include "polarec/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace polarec;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kPi = 3.14159265358979323846;

// exit codes
constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kIoError = 3;
constexpr int kNumericalError = 4;

struct StageClock {
  json& timings;
  std::string stage;
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  ~StageClock() {
    timings[stage] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
  }
};

struct CliError : std::runtime_error {
  int code;
  CliError(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

// Re-tag exceptions from a block with the exit code of the failing stage.
template <typename F>
auto stage_guard(int code, const std::string& stage, F&& fn) {
  try {
    return fn();
  } catch (const CliError&) {
    throw;
  } catch (const std::ios_base::failure& e) {
    throw CliError(kIoError, stage + ": " + e.what());
  } catch (const std::exception& e) {
    throw CliError(code, stage + ": " + e.what());
  }
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void record_output(json& manifest, const std::string& path) {
  manifest["outputs"].push_back(path);
}

void write_manifest(const std::string& out_dir, const json& manifest) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  write_text_file(join_path(out_dir, "manifest.json"), manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// shared options

struct ScatterOpts {  // seed sampling + simulated prior (render/pipeline)
  double seed_fraction = 0.01;
  double seed_noise = 0.0;
  std::string prior_warp = "reciprocal";  // identity | reciprocal
  double prior_a = 1.0;
  double prior_b = 0.0;
  uint64_t seed = 1;
};

struct ReconOpts {
  DensifyConfig cfg;
  double eta = kDefaultEta;
  double noise_floor = kDefaultNoiseFloor;
  double gmin_frac = 1e-4;
  double max_alignment = 0.25 * kPi;
};

void add_recon_flags(CLI::App* app, ReconOpts& o) {
  app->add_option("--lambda", o.cfg.lambda, "TV regularization weight");
  app->add_option("--zeta", o.cfg.zeta, "TV edge-weight sharpness");
  app->add_option("--tv-iters", o.cfg.tv_iters,
                  "primal-dual iterations per outer iteration");
  app->add_option("--consistency-frac", o.cfg.consistency_frac,
                  "two-view inlier threshold as a fraction of the depth range");
  app->add_option("--azimuth-stop", o.cfg.azimuth_stop,
                  "propagation stop on azimuth jumps (radians)");
  app->add_option("--convergence-ratio", o.cfg.convergence_ratio,
                  "stop when the relative point growth drops below this");
  app->add_option("--max-outer-iters", o.cfg.max_outer_iters,
                  "cap on propagate/estimate/smooth iterations");
  app->add_option("--eta", o.eta, "refractive index");
  app->add_option("--noise-floor", o.noise_floor,
                  "minimum usable polarized radiance");
  app->add_option("--gmin-frac", o.gmin_frac,
                  "minimum prior gradient, fraction of the prior range");
  app->add_option("--max-alignment", o.max_alignment,
                  "reject cues misaligned with the prior beyond this (radians)");
}

void add_scatter_flags(CLI::App* app, ScatterOpts& o) {
  app->add_option("--seed-fraction", o.seed_fraction,
                  "fraction of pixels kept as sparse seeds");
  app->add_option("--seed-noise", o.seed_noise,
                  "relative gaussian noise on seed depths");
  app->add_option("--prior-warp", o.prior_warp,
                  "simulated prior space: identity or reciprocal")
      ->check(CLI::IsMember({"identity", "reciprocal"}));
  app->add_option("--prior-a", o.prior_a, "prior warp z' = a / (z + b)");
  app->add_option("--prior-b", o.prior_b, "prior warp z' = a / (z + b)");
  app->add_option("--rng-seed", o.seed, "seed for all stochastic fixtures");
}

json recon_config_json(const ReconOpts& o) {
  return {{"lambda", o.cfg.lambda},
          {"zeta", o.cfg.zeta},
          {"tv_iters", o.cfg.tv_iters},
          {"consistency_frac", o.cfg.consistency_frac},
          {"azimuth_stop", o.cfg.azimuth_stop},
          {"convergence_ratio", o.cfg.convergence_ratio},
          {"max_outer_iters", o.cfg.max_outer_iters},
          {"eta", o.eta},
          {"noise_floor", o.noise_floor},
          {"gmin_frac", o.gmin_frac},
          {"max_alignment", o.max_alignment}};
}

// ---------------------------------------------------------------------------
// render

struct RenderArgs {
  std::string scene_path, camera_path, out_dir;
  int frame = 0;
  ScatterOpts scatter;
};

void render_stage(const RenderArgs& a, json& manifest) {
  SyntheticScene scene;
  CameraModel cam;
  stage_guard(kIoError, "load inputs", [&] {
    scene = scene_from_json_text(read_text_file(a.scene_path));
    const CameraRig rig = read_camera_rig(a.camera_path);
    cam = rig.camera(a.frame);
    cam.validate();
  });

  RenderResult r;
  DepthMap seeds, prior;
  stage_guard(kNumericalError, "render", [&] {
    StageClock clock{manifest["timings"], "render"};
    r = render_scene(scene, cam);
    seeds = sample_sparse_seeds(r.gt, a.scatter.seed_fraction,
                                a.scatter.seed_noise, a.scatter.seed);
    PriorWarp warp;
    warp.mode = a.scatter.prior_warp == "identity"
                    ? PriorWarp::Mode::Identity
                    : PriorWarp::Mode::Reciprocal;
    warp.a = a.scatter.prior_a;
    warp.b = a.scatter.prior_b;
    prior = simulate_relative_prior(r.gt, warp, {}, a.scatter.seed);
  });

  stage_guard(kIoError, "write outputs", [&] {
    StageClock clock{manifest["timings"], "render_write"};
    fs::create_directories(a.out_dir);
    double scale = 0.0;
    for (const ImageGrid& ch : r.frame.channels)
      for (double v : ch.values) scale = std::max(scale, v);
    if (scale <= 0.0) scale = 1.0;
    const char* names[4] = {"channels_p000.png", "channels_p045.png",
                            "channels_p090.png", "channels_p135.png"};
    for (int c = 0; c < 4; ++c) {
      write_png16(join_path(a.out_dir, names[c]), r.frame.channels[c], scale);
      record_output(manifest, names[c]);
    }
    const json sidecar = {{"scale", scale},
                          {"angles_deg", {0, 45, 90, 135}},
                          {"files", {names[0], names[1], names[2], names[3]}},
                          {"width", cam.width},
                          {"height", cam.height}};
    write_text_file(join_path(a.out_dir, "channels.json"),
                    sidecar.dump(2) + "\n");
    record_output(manifest, "channels.json");

    write_depth_pfm(join_path(a.out_dir, "gt_depth.pfm"), r.gt.depth);
    write_pfm(join_path(a.out_dir, "gt_aolp.pfm"), r.gt.aolp);
    write_pfm(join_path(a.out_dir, "gt_dolp.pfm"), r.gt.dolp);
    write_pfm(join_path(a.out_dir, "gt_zenith.pfm"), r.gt.zenith_true);
    write_pfm(join_path(a.out_dir, "gt_azimuth.pfm"), r.gt.azimuth_true);
    for (const char* n : {"gt_depth.pfm", "gt_aolp.pfm", "gt_dolp.pfm",
                          "gt_zenith.pfm", "gt_azimuth.pfm"})
      record_output(manifest, n);

    ImageGrid label(cam.width, cam.height);
    ImageGrid surface(cam.width, cam.height);
    for (int y = 0; y < cam.height; ++y)
      for (int x = 0; x < cam.width; ++x) {
        label.at(x, y) = r.gt.label(x, y) == Reflection::Specular ? 1.0 : 0.0;
        surface.at(x, y) = static_cast<double>(r.gt.surface(x, y));
      }
    write_png16(join_path(a.out_dir, "gt_label.png"), label, 1.0);
    write_pfm(join_path(a.out_dir, "gt_surface.pfm"), surface);
    record_output(manifest, "gt_label.png");
    record_output(manifest, "gt_surface.pfm");

    write_depth_pfm(join_path(a.out_dir, "seeds.pfm"), seeds);
    write_depth_pfm(join_path(a.out_dir, "prior.pfm"), prior);
    record_output(manifest, "seeds.pfm");
    record_output(manifest, "prior.pfm");

    write_text_file(join_path(a.out_dir, "scene.json"),
                    scene_to_json_text(scene) + "\n");
    record_output(manifest, "scene.json");

    manifest["scene"] = {{"z_min", scene.z_min},
                         {"z_max", scene.z_max},
                         {"eta", scene.eta},
                         {"prior_space", a.scatter.prior_warp == "reciprocal"
                                             ? "disparity"
                                             : "depth"}};
  });
}

// ---------------------------------------------------------------------------
// reconstruct

struct ReconstructArgs {
  std::string channels_path, seeds_path, prior_path, camera_path, out_dir;
  std::string gt_path;  // optional
  int frame = 0;
  bool prior_disparity = false;
  double z_min = 0.0, z_max = 0.0;  // 0 = derive from the seeds
  ReconOpts recon;
};

DepthMap load_relative_prior(const std::string& path) {
  const ImageGrid raw = read_pfm(path);
  double lo = 0.0, hi = 0.0;
  for (double v : raw.values)
    if (v > 0.0) {
      lo = lo == 0.0 ? v : std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (hi <= 0.0)
    throw std::invalid_argument("prior has no positive values: " + path);
  DepthMap prior(raw.width, raw.height, lo * 0.999999, hi * 1.000001);
  for (int y = 0; y < raw.height; ++y)
    for (int x = 0; x < raw.width; ++x)
      if (raw.at(x, y) > 0.0) prior.set_depth(x, y, raw.at(x, y));
  return prior;
}

void reconstruct_stage(const ReconstructArgs& a, json& manifest) {
  stage_guard(kConfigError, "validate config",
              [&] { a.recon.cfg.validate(); });

  PolarFrame frame;
  DepthMap seeds, prior;
  DepthMap gt;
  bool have_gt = false;
  CameraModel cam;
  stage_guard(kIoError, "load inputs", [&] {
    StageClock clock{manifest["timings"], "load"};
    const json sidecar = json::parse(read_text_file(a.channels_path));
    const double scale = sidecar.at("scale").get<double>();
    const fs::path dir = fs::path(a.channels_path).parent_path();
    for (int c = 0; c < 4; ++c)
      frame.channels[c] = read_png16(
          (dir / sidecar.at("files").at(c).get<std::string>()).string(),
          scale);
    const CameraRig rig = read_camera_rig(a.camera_path);
    cam = rig.camera(a.frame);
    cam.validate();

    double z_min = a.z_min, z_max = a.z_max;
    if (!(z_min > 0.0) || !(z_max > z_min)) {
      // derive a generous range from the seed depths
      const ImageGrid raw = read_pfm(a.seeds_path);
      double lo = 0.0, hi = 0.0;
      for (double v : raw.values)
        if (v > 0.0) {
          lo = lo == 0.0 ? v : std::min(lo, v);
          hi = std::max(hi, v);
        }
      if (hi <= 0.0)
        throw std::invalid_argument("seed file has no valid depths");
      z_min = 0.5 * lo;
      z_max = 2.0 * hi;
    }
    manifest["depth_range"] = {{"z_min", z_min}, {"z_max", z_max}};
    seeds = read_depth_pfm(a.seeds_path, z_min, z_max);
    prior = load_relative_prior(a.prior_path);
    if (!a.gt_path.empty()) {
      gt = read_depth_pfm(a.gt_path, z_min, z_max);
      have_gt = true;
    }
  });

  DensifyResult res;
  PolarCues cues;
  stage_guard(kNumericalError, "reconstruct", [&] {
    StageClock clock{manifest["timings"], "reconstruct"};
    if (a.prior_disparity) prior = invert_disparity(prior);
    const PriorField field = normals_from_prior(prior, cam);
    const PolarMeasurement meas =
        stokes_from_channels(frame, a.recon.noise_floor);
    DisambiguateOptions dopts;
    dopts.eta = a.recon.eta;
    dopts.gmin_frac = a.recon.gmin_frac;
    dopts.max_alignment = a.recon.max_alignment;
    cues = disambiguate(meas, field, dopts);
    res = densify_keyframe(seeds, cues, field, meas.intensity, a.recon.cfg,
                           nullptr, have_gt ? &gt : nullptr);
  });

  stage_guard(kIoError, "write outputs", [&] {
    StageClock clock{manifest["timings"], "reconstruct_write"};
    fs::create_directories(a.out_dir);
    write_depth_pfm(join_path(a.out_dir, "depth.pfm"), res.depth);
    record_output(manifest, "depth.pfm");

    ImageGrid prov(res.depth.width(), res.depth.height());
    for (size_t i = 0; i < res.provenance.size(); ++i)
      prov.values[i] = static_cast<double>(res.provenance[i]);
    write_png16(join_path(a.out_dir, "provenance.png"), prov, 4.0);
    record_output(manifest, "provenance.png");

    std::vector<OrientedPoint> cloud;
    for (int y = 0; y < res.depth.height(); ++y)
      for (int x = 0; x < res.depth.width(); ++x) {
        if (!res.depth.valid.at(x, y)) continue;
        OrientedPoint p;
        p.position = cam.unproject(x, y, res.depth.depth(x, y));
        p.normal = Eigen::Vector3d::Zero();
        if (cues.valid.at(x, y)) {
          const double az = cues.azimuth.at(x, y);
          const double ze = cues.zenith.at(x, y);
          p.normal = {std::sin(ze) * std::cos(az), std::sin(ze) * std::sin(az),
                      std::cos(ze)};
        }
        cloud.push_back(p);
      }
    write_ply(join_path(a.out_dir, "cloud.ply"), cloud);
    record_output(manifest, "cloud.ply");

    std::string stats;
    stats += "seeds " + std::to_string(res.stats.seed_count) + "\n";
    stats += "points " + std::to_string(res.depth.valid_count()) + "\n";
    stats += std::string("converged ") + (res.stats.converged ? "1" : "0") +
             "\n";
    for (const auto& t : res.stats.trace) {
      char line[128];
      if (std::isnan(t.absrel))
        std::snprintf(line, sizeof(line), "iter %d points %zu\n", t.iteration,
                      t.points);
      else
        std::snprintf(line, sizeof(line), "iter %d points %zu absrel %.6f\n",
                      t.iteration, t.points, t.absrel);
      stats += line;
    }
    if (have_gt) {
      char line[64];
      std::snprintf(line, sizeof(line), "absrel %.6f\n",
                    absrel(res.depth, gt));
      stats += line;
    }
    write_text_file(join_path(a.out_dir, "stats.txt"), stats);
    record_output(manifest, "stats.txt");
  });
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::string depth_path, gt_path, labels_path, camera_path, out_dir;
  int frame = 0;
  std::vector<double> thresholds;  // meters; empty = fractions of the range
};

void evaluate_stage(const EvaluateArgs& a, json& manifest) {
  DepthMap depth, gt;
  ImageGrid labels;
  bool have_labels = false;
  CameraModel cam;
  stage_guard(kIoError, "load inputs", [&] {
    const ImageGrid raw_gt = read_pfm(a.gt_path);
    double lo = 0.0, hi = 0.0;
    for (double v : raw_gt.values)
      if (v > 0.0) {
        lo = lo == 0.0 ? v : std::min(lo, v);
        hi = std::max(hi, v);
      }
    if (hi <= 0.0)
      throw std::invalid_argument("ground truth has no valid depths");
    const double z_min = 0.5 * lo, z_max = 2.0 * hi;
    depth = read_depth_pfm(a.depth_path, z_min, z_max);
    gt = read_depth_pfm(a.gt_path, z_min, z_max);
    if (!a.labels_path.empty()) {
      labels = read_pfm(a.labels_path);
      have_labels = true;
    }
    const CameraRig rig = read_camera_rig(a.camera_path);
    cam = rig.camera(a.frame);
    cam.validate();
  });

  json report;
  std::string csv = "label,threshold,inlier_fraction\n";
  stage_guard(kNumericalError, "evaluate", [&] {
    StageClock clock{manifest["timings"], "evaluate"};
    report["absrel"] = absrel(depth, gt);
    report["points"] = depth.valid_count();
    report["gt_points"] = gt.valid_count();
    double lo = 0.0, hi = 0.0;
    for (int y = 0; y < gt.height(); ++y)
      for (int x = 0; x < gt.width(); ++x)
        if (gt.valid.at(x, y)) {
          const double v = gt.depth(x, y);
          lo = lo == 0.0 ? v : std::min(lo, v);
          hi = std::max(hi, v);
        }
    const double range = hi - lo;
    report["depth_range"] = {{"min", lo}, {"max", hi}};

    if (have_labels) {
      std::vector<double> thr = a.thresholds;
      if (thr.empty())
        for (double f : {0.0025, 0.005, 0.01, 0.02, 0.05})
          thr.push_back(f * range);
      std::vector<Eigen::Vector3d> pts;
      std::vector<int> ids;
      for (int y = 0; y < depth.height(); ++y)
        for (int x = 0; x < depth.width(); ++x) {
          if (!depth.valid.at(x, y)) continue;
          const int id = static_cast<int>(std::lround(labels.at(x, y)));
          if (id < 0) continue;
          pts.push_back(cam.unproject(x, y, depth.depth(x, y)));
          ids.push_back(id);
        }
      const auto curves = plane_accuracy(pts, ids, thr);
      for (const auto& [id, c] : curves) {
        json jc = {{"degenerate", c.degenerate}};
        if (!c.degenerate) {
          jc["normal"] = {c.normal.x(), c.normal.y(), c.normal.z()};
          jc["offset"] = c.offset;
          for (size_t i = 0; i < c.thresholds.size(); ++i) {
            char line[96];
            std::snprintf(line, sizeof(line), "%d,%.6f,%.6f\n", id,
                          c.thresholds[i], c.inlier_fraction[i]);
            csv += line;
            jc["curve"].push_back(
                {{"threshold", c.thresholds[i]},
                 {"inlier_fraction", c.inlier_fraction[i]}});
          }
        }
        report["planes"][std::to_string(id)] = jc;
      }
    }
  });

  stage_guard(kIoError, "write outputs", [&] {
    fs::create_directories(a.out_dir);
    write_text_file(join_path(a.out_dir, "report.json"),
                    report.dump(2) + "\n");
    record_output(manifest, "report.json");
    if (have_labels) {
      write_text_file(join_path(a.out_dir, "plane_curves.csv"), csv);
      record_output(manifest, "plane_curves.csv");
    }
    manifest["report"] = report;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polarimetric dense depthmap reconstruction"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "read options from an INI/TOML file");
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads,
                 "worker threads (0 = auto); results are identical for all "
                 "values");

  RenderArgs render_args;
  CLI::App* render = app.add_subcommand(
      "render", "synthesize polarization channels and ground truth");
  render->add_option("--scene", render_args.scene_path, "scene JSON")
      ->required();
  render->add_option("--camera", render_args.camera_path, "camera rig JSON")
      ->required();
  render->add_option("--frame", render_args.frame, "rig frame index");
  render->add_option("--out-dir", render_args.out_dir, "output directory")
      ->required();
  add_scatter_flags(render, render_args.scatter);

  ReconstructArgs rec_args;
  CLI::App* rec = app.add_subcommand(
      "reconstruct", "densify sparse seeds into a full depthmap");
  rec->add_option("--channels", rec_args.channels_path,
                  "channels.json sidecar")
      ->required();
  rec->add_option("--seeds", rec_args.seeds_path, "sparse seed PFM")
      ->required();
  rec->add_option("--prior", rec_args.prior_path, "relative depth prior PFM")
      ->required();
  rec->add_flag("--prior-disparity", rec_args.prior_disparity,
                "prior stores disparity (larger = closer)");
  rec->add_option("--camera", rec_args.camera_path, "camera rig JSON")
      ->required();
  rec->add_option("--frame", rec_args.frame, "rig frame index");
  rec->add_option("--gt", rec_args.gt_path, "ground-truth depth PFM");
  rec->add_option("--z-min", rec_args.z_min, "scene depth range");
  rec->add_option("--z-max", rec_args.z_max, "scene depth range");
  rec->add_option("--out-dir", rec_args.out_dir, "output directory")
      ->required();
  add_recon_flags(rec, rec_args.recon);

  EvaluateArgs eval_args;
  CLI::App* eval = app.add_subcommand(
      "evaluate", "score a reconstruction against ground truth");
  eval->add_option("--depth", eval_args.depth_path, "reconstructed depth PFM")
      ->required();
  eval->add_option("--gt", eval_args.gt_path, "ground-truth depth PFM")
      ->required();
  eval->add_option("--labels", eval_args.labels_path,
                   "per-pixel plane label PFM (plane curves)");
  eval->add_option("--camera", eval_args.camera_path, "camera rig JSON")
      ->required();
  eval->add_option("--frame", eval_args.frame, "rig frame index");
  eval->add_option("--thresholds", eval_args.thresholds,
                   "plane distance thresholds in meters");
  eval->add_option("--out-dir", eval_args.out_dir, "output directory")
      ->required();

  RenderArgs pipe_render;
  ReconOpts pipe_recon;
  std::vector<double> pipe_thresholds;
  CLI::App* pipe = app.add_subcommand(
      "pipeline", "render, reconstruct, and evaluate in one run");
  pipe->add_option("--scene", pipe_render.scene_path, "scene JSON")
      ->required();
  pipe->add_option("--camera", pipe_render.camera_path, "camera rig JSON")
      ->required();
  pipe->add_option("--frame", pipe_render.frame, "rig frame index");
  pipe->add_option("--out-dir", pipe_render.out_dir, "output directory")
      ->required();
  pipe->add_option("--thresholds", pipe_thresholds,
                   "plane distance thresholds in meters");
  add_scatter_flags(pipe, pipe_render.scatter);
  add_recon_flags(pipe, pipe_recon);

  for (CLI::App* sub : {render, rec, eval, pipe}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  set_threads(threads);

  std::string out_dir;
  json manifest;
  manifest["tool_version"] = kVersion;
  manifest["threads"] = threads;
  manifest["outputs"] = json::array();
  manifest["timings"] = json::object();

  try {
    if (*render) {
      out_dir = render_args.out_dir;
      manifest["command"] = "render";
      manifest["inputs"] = {{"scene", render_args.scene_path},
                            {"camera", render_args.camera_path},
                            {"frame", render_args.frame}};
      manifest["rng_seed"] = render_args.scatter.seed;
      render_stage(render_args, manifest);
    } else if (*rec) {
      out_dir = rec_args.out_dir;
      manifest["command"] = "reconstruct";
      manifest["inputs"] = {{"channels", rec_args.channels_path},
                            {"seeds", rec_args.seeds_path},
                            {"prior", rec_args.prior_path},
                            {"camera", rec_args.camera_path},
                            {"frame", rec_args.frame},
                            {"gt", rec_args.gt_path},
                            {"prior_disparity", rec_args.prior_disparity}};
      manifest["config"] = recon_config_json(rec_args.recon);
      reconstruct_stage(rec_args, manifest);
    } else if (*eval) {
      out_dir = eval_args.out_dir;
      manifest["command"] = "evaluate";
      manifest["inputs"] = {{"depth", eval_args.depth_path},
                            {"gt", eval_args.gt_path},
                            {"labels", eval_args.labels_path},
                            {"camera", eval_args.camera_path},
                            {"frame", eval_args.frame}};
      evaluate_stage(eval_args, manifest);
    } else {
      out_dir = pipe_render.out_dir;
      manifest["command"] = "pipeline";
      manifest["inputs"] = {{"scene", pipe_render.scene_path},
                            {"camera", pipe_render.camera_path},
                            {"frame", pipe_render.frame}};
      manifest["rng_seed"] = pipe_render.scatter.seed;
      manifest["config"] = recon_config_json(pipe_recon);
      render_stage(pipe_render, manifest);

      ReconstructArgs chain;
      chain.channels_path = join_path(out_dir, "channels.json");
      chain.seeds_path = join_path(out_dir, "seeds.pfm");
      chain.prior_path = join_path(out_dir, "prior.pfm");
      chain.camera_path = pipe_render.camera_path;
      chain.gt_path = join_path(out_dir, "gt_depth.pfm");
      chain.frame = pipe_render.frame;
      chain.prior_disparity =
          manifest["scene"]["prior_space"] == "disparity";
      chain.z_min = manifest["scene"]["z_min"].get<double>();
      chain.z_max = manifest["scene"]["z_max"].get<double>();
      chain.out_dir = out_dir;
      chain.recon = pipe_recon;
      reconstruct_stage(chain, manifest);

      EvaluateArgs score;
      score.depth_path = join_path(out_dir, "depth.pfm");
      score.gt_path = join_path(out_dir, "gt_depth.pfm");
      score.labels_path = join_path(out_dir, "gt_surface.pfm");
      score.camera_path = pipe_render.camera_path;
      score.frame = pipe_render.frame;
      score.thresholds = pipe_thresholds;
      score.out_dir = out_dir;
      evaluate_stage(score, manifest);
    }
  } catch (const CliError& e) {
    manifest["status"] = "error";
    manifest["error"] = e.what();
    std::fprintf(stderr, "error: %s\n", e.what());
    try {
      write_manifest(out_dir, manifest);
    } catch (const std::exception& we) {
      std::fprintf(stderr, "error: cannot write manifest: %s\n", we.what());
    }
    return e.code;
  }

  manifest["status"] = "ok";
  try {
    write_manifest(out_dir, manifest);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: cannot write manifest: %s\n", e.what());
    return kIoError;
  }
  return kOk;
}
