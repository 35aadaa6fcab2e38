// lumio command-line tool. Subcommands compose through files only: simulate
// writes a scenario, preintegrate compresses IMU samples, refine runs the
// pose-graph back-end, evaluate scores trajectories, infer runs the toy pose
// regressor, gradcheck verifies the attention gradients.
//
// Logs go to stderr; data goes to files (or JSON on stdout with --json).

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lumio/config.hpp"
#include "lumio/eval.hpp"
#include "lumio/files.hpp"
#include "lumio/geometry.hpp"
#include "lumio/imu.hpp"
#include "lumio/pgo.hpp"
#include "lumio/rng.hpp"
#include "lumio/sim.hpp"
#include "lumio/trajectory.hpp"
#include "lumio/vonet.hpp"
#include "lumio/weights_io.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace lumio;

namespace {

void emit(const ordered_json& summary, bool as_json) {
  if (as_json) std::cout << summary.dump(2) << std::endl;
}

void log_line(const std::string& msg) { std::cerr << msg << '\n'; }

std::vector<double> json_vec(const Vec3& v) { return {v[0], v[1], v[2]}; }

Vec3 parse_vec3(const std::string& text, const std::string& flag) {
  Vec3 v;
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t comma = text.find(',', pos);
    const std::string field =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      v[i] = std::stod(field);
    } catch (const std::exception&) {
      throw std::runtime_error(flag + ": expected 'x,y,z', got '" + text + "'");
    }
    if (i < 2) {
      if (comma == std::string::npos) {
        throw std::runtime_error(flag + ": expected 'x,y,z', got '" + text + "'");
      }
      pos = comma + 1;
    }
  }
  return v;
}

io::PipelineConfig load_or_default(const std::string& config_path) {
  if (config_path.empty()) return io::PipelineConfig{};
  return io::load_config_file(config_path);
}

std::vector<Pose> relative_motions(const Trajectory& traj) {
  std::vector<Pose> motions;
  motions.reserve(traj.size() - 1);
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    motions.push_back(relative_pose(traj.poses[k].pose, traj.poses[k + 1].pose));
  }
  return motions;
}

// --------------------------------------------------------------------------
// Pre-integrated motion JSON.
// --------------------------------------------------------------------------

ordered_json motion_to_json(const imu::PreintegratedMotion& m) {
  const Mat3& r = m.delta_rotation.matrix();
  std::vector<double> rot(9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) rot[i * 3 + j] = r(i, j);
  return ordered_json{{"duration", m.duration},
                      {"delta_rotation", rot},
                      {"delta_velocity", json_vec(m.delta_velocity)},
                      {"delta_position", json_vec(m.delta_position)}};
}

imu::PreintegratedMotion motion_from_json(const nlohmann::json& j) {
  imu::PreintegratedMotion m;
  m.duration = j.at("duration").get<double>();
  const auto rot = j.at("delta_rotation").get<std::vector<double>>();
  if (rot.size() != 9) throw std::runtime_error("motions: delta_rotation needs 9 numbers");
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) r(i, k) = rot[i * 3 + k];
  m.delta_rotation = Rotation(r, 1e-6);
  const auto dv = j.at("delta_velocity").get<std::vector<double>>();
  const auto dp = j.at("delta_position").get<std::vector<double>>();
  if (dv.size() != 3 || dp.size() != 3) {
    throw std::runtime_error("motions: delta vectors need 3 numbers");
  }
  m.delta_velocity = Vec3(dv[0], dv[1], dv[2]);
  m.delta_position = Vec3(dp[0], dp[1], dp[2]);
  return m;
}

struct MotionsFile {
  double start_time = 0.0;
  double keyframe_rate = 1.0;
  std::vector<imu::PreintegratedMotion> motions;
};

void write_motions(const MotionsFile& mf, const fs::path& path) {
  ordered_json doc;
  doc["version"] = 1;
  doc["start_time"] = mf.start_time;
  doc["keyframe_rate"] = mf.keyframe_rate;
  auto& arr = doc["motions"] = ordered_json::array();
  for (const auto& m : mf.motions) arr.push_back(motion_to_json(m));
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << doc.dump(2) << '\n';
}

MotionsFile read_motions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open for reading");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  if (doc.at("version").get<int>() != 1) {
    throw std::runtime_error(path.string() + ": unsupported version");
  }
  MotionsFile mf;
  mf.start_time = doc.at("start_time").get<double>();
  mf.keyframe_rate = doc.at("keyframe_rate").get<double>();
  for (const auto& j : doc.at("motions")) mf.motions.push_back(motion_from_json(j));
  return mf;
}

// --------------------------------------------------------------------------
// simulate
// --------------------------------------------------------------------------

int run_simulate(const std::string& config_path, const std::string& out_dir,
                 bool with_frames, bool as_json) {
  const io::PipelineConfig cfg = load_or_default(config_path);
  const sim::ScenarioConfig& sc = cfg.scenario;

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  const Trajectory gt = sim::gen_ground_truth(sc);
  io::write_pose_file(gt, dir / "gt.txt");

  const auto vo_motions = sim::gen_vo(gt, sc);
  Trajectory vo_chain;
  vo_chain.poses.push_back({gt.poses.front().t, Pose::identity()});
  for (std::size_t k = 0; k < vo_motions.size(); ++k) {
    vo_chain.poses.push_back(
        {gt.poses[k + 1].t, compose(vo_chain.poses.back().pose, vo_motions[k])});
  }
  io::write_pose_file(vo_chain, dir / "vo.txt");

  const Trajectory dense = sim::gen_ground_truth_at(sc, sc.imu_rate);
  io::write_imu_csv(sim::gen_imu(dense, sc), dir / "imu.csv");
  io::write_gnss_csv(sim::gen_gnss(gt, sc), dir / "gnss.csv");

  int frame_count = 0;
  if (with_frames) {
    const auto frames = sim::gen_frames(gt, sc);
    fs::create_directories(dir / "frames");
    char name[32];
    for (std::size_t i = 0; i < frames.size(); ++i) {
      std::snprintf(name, sizeof(name), "frame_%06zu.ppm", i);
      io::write_ppm(frames[i], dir / "frames" / name);
    }
    frame_count = static_cast<int>(frames.size());
  }

  ordered_json manifest;
  manifest["version"] = 1;
  manifest["kind"] = sim::to_string(sc.kind);
  manifest["seed"] = sc.seed;
  manifest["keyframe_count"] = gt.size();
  manifest["keyframe_rate"] = sc.keyframe_rate;
  manifest["initial_velocity"] = json_vec(sim::initial_velocity(sc));
  {
    std::ofstream out(dir / "scenario.json");
    if (!out) throw std::runtime_error((dir / "scenario.json").string() + ": cannot write");
    out << manifest.dump(2) << '\n';
  }

  log_line("simulate: wrote " + std::to_string(gt.size()) + " keyframes to " + out_dir);
  ordered_json summary;
  summary["command"] = "simulate";
  summary["out_dir"] = out_dir;
  summary["keyframes"] = gt.size();
  summary["imu_samples"] = dense.size();
  summary["frames"] = frame_count;
  emit(summary, as_json);
  return 0;
}

// --------------------------------------------------------------------------
// preintegrate
// --------------------------------------------------------------------------

int run_preintegrate(const std::string& imu_path, double keyframe_rate,
                     const std::string& out_path, bool as_json) {
  if (!(keyframe_rate > 0.0)) throw std::runtime_error("--keyframe-rate must be > 0");
  const auto samples = io::read_imu_csv(imu_path);
  if (samples.size() < 2) {
    throw std::runtime_error(imu_path + ": needs at least 2 IMU samples");
  }

  const double t0 = samples.front().t;
  const double t_end = samples.back().t;
  const double dt_kf = 1.0 / keyframe_rate;

  // Window boundaries snap to the nearest sample; boundary samples are shared
  // between adjacent windows.
  std::vector<std::size_t> boundaries = {0};
  std::size_t cursor = 0;
  for (int k = 1;; ++k) {
    const double target = t0 + k * dt_kf;
    if (target > t_end + 1e-9) break;
    while (cursor + 1 < samples.size() &&
           std::abs(samples[cursor + 1].t - target) <= std::abs(samples[cursor].t - target)) {
      ++cursor;
    }
    if (cursor > boundaries.back()) boundaries.push_back(cursor);
  }
  if (boundaries.size() < 2) {
    throw std::runtime_error(imu_path + ": shorter than one keyframe interval");
  }

  MotionsFile mf;
  mf.start_time = t0;
  mf.keyframe_rate = keyframe_rate;
  for (std::size_t b = 0; b + 1 < boundaries.size(); ++b) {
    const std::size_t lo = boundaries[b], hi = boundaries[b + 1];
    mf.motions.push_back(
        imu::preintegrate(std::span(samples.data() + lo, hi - lo + 1)));
  }
  write_motions(mf, out_path);

  log_line("preintegrate: " + std::to_string(samples.size()) + " samples -> " +
           std::to_string(mf.motions.size()) + " motions");
  ordered_json summary;
  summary["command"] = "preintegrate";
  summary["samples"] = samples.size();
  summary["motions"] = mf.motions.size();
  summary["output"] = out_path;
  emit(summary, as_json);
  return 0;
}

// --------------------------------------------------------------------------
// refine
// --------------------------------------------------------------------------

int run_refine(const std::string& vo_path, const std::string& motions_path,
               const std::string& gnss_path, const std::string& config_path,
               const std::string& out_path, const std::string& report_path,
               const std::string& initial_velocity_text, bool as_json) {
  const io::PipelineConfig cfg = load_or_default(config_path);

  const Trajectory vo_chain = io::read_pose_file(vo_path);
  if (vo_chain.size() < 2) throw std::runtime_error(vo_path + ": needs at least 2 poses");
  const std::vector<Pose> vo_motions = relative_motions(vo_chain);

  const MotionsFile mf = read_motions(motions_path);
  if (mf.motions.size() != vo_motions.size()) {
    throw std::runtime_error(motions_path + ": " + std::to_string(mf.motions.size()) +
                             " motions vs " + std::to_string(vo_motions.size()) +
                             " VO steps in " + vo_path);
  }

  Vec3 v0;
  if (!initial_velocity_text.empty()) {
    v0 = parse_vec3(initial_velocity_text, "--initial-velocity");
  } else {
    // Fall back to the first VO step as a velocity estimate.
    v0 = vo_motions.front().translation / std::max(mf.motions.front().duration, 1e-9);
    log_line("refine: initial velocity estimated from the first VO step");
  }

  imu::ChainOptions chain_opts;
  chain_opts.gravity_compensation = cfg.imu.gravity_compensation;
  chain_opts.start_time = mf.start_time;
  Trajectory imu_world =
      imu::chain_to_world(mf.motions, vo_chain.poses.front().pose, v0, chain_opts);

  if (!gnss_path.empty()) {
    const auto fixes = io::read_gnss_csv(gnss_path);
    imu_world = imu::apply_gnss_correction(imu_world, fixes, cfg.imu.gnss_blend);
    log_line("refine: applied " + std::to_string(fixes.size()) + " GNSS fixes");
  }

  const std::vector<Pose> imu_relative = relative_motions(imu_world);
  const Mat6 sigma = cfg.pgo.sigma_scale * Mat6::Identity();
  pgo::PoseGraph graph = pgo::build_graph(vo_motions, imu_relative, cfg.pgo.lambda, sigma);
  graph.nodes.clear();
  for (const auto& tp : vo_chain.poses) graph.nodes.push_back(tp.pose);

  const auto [nodes, report] = pgo::lm_solve(graph, cfg.pgo.lm);

  Trajectory refined;
  refined.frame = vo_chain.frame;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    refined.poses.push_back({vo_chain.poses[i].t, nodes[i]});
  }
  io::write_pose_file(refined, out_path);

  ordered_json rep;
  rep["version"] = 1;
  rep["initial_cost"] = report.cost_history.front();
  rep["final_cost"] = report.final_cost;
  rep["iterations"] = report.iterations;
  rep["accepted_steps"] = report.accepted_steps;
  rep["termination"] = pgo::to_string(report.termination);
  rep["cost_history"] = report.cost_history;
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) throw std::runtime_error(report_path + ": cannot open for writing");
    out << rep.dump(2) << '\n';
  }

  log_line("refine: cost " + std::to_string(report.cost_history.front()) + " -> " +
           std::to_string(report.final_cost) + " (" + pgo::to_string(report.termination) +
           ")");
  ordered_json summary;
  summary["command"] = "refine";
  summary["output"] = out_path;
  summary["report"] = rep;
  emit(summary, as_json);
  return 0;
}

// --------------------------------------------------------------------------
// evaluate
// --------------------------------------------------------------------------

int run_evaluate(const std::string& est_path, const std::string& gt_path, int delta,
                 const std::string& segments_text, const std::string& config_path,
                 bool no_align, const std::string& out_path,
                 const std::string& aligned_csv_path, bool as_json) {
  io::PipelineConfig cfg = load_or_default(config_path);
  if (delta > 0) cfg.eval.rpe_delta = delta;
  if (no_align) cfg.eval.align = false;
  if (!segments_text.empty()) {
    cfg.eval.segment_lengths.clear();
    std::size_t pos = 0;
    while (pos <= segments_text.size()) {
      const std::size_t comma = segments_text.find(',', pos);
      const std::string field = segments_text.substr(
          pos, comma == std::string::npos ? std::string::npos : comma - pos);
      try {
        cfg.eval.segment_lengths.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw std::runtime_error("--segments: '" + field + "' is not a number");
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }

  const Trajectory est = io::read_pose_file(est_path);
  const Trajectory gt = io::read_pose_file(gt_path);
  if (est.size() != gt.size()) {
    throw std::runtime_error("evaluate: " + est_path + " has " +
                             std::to_string(est.size()) + " poses but " + gt_path +
                             " has " + std::to_string(gt.size()));
  }

  ordered_json doc;
  doc["version"] = 1;
  doc["est"] = est_path;
  doc["gt"] = gt_path;

  std::optional<eval::AlignmentResult> alignment;
  bool align = cfg.eval.align;
  if (align) {
    try {
      alignment = eval::umeyama_align(est, gt, cfg.eval.with_scale);
    } catch (const std::invalid_argument& e) {
      log_line(std::string("evaluate: alignment skipped (") + e.what() + ")");
      align = false;
    }
  }

  doc["ate"] = eval::ate(est, gt, align, cfg.eval.with_scale);
  const auto r = eval::rpe(est, gt, cfg.eval.rpe_delta);
  doc["rpe"] = ordered_json{{"delta", cfg.eval.rpe_delta},
                            {"translational_m", r.translational},
                            {"rotational_rad", r.rotational}};

  const auto seg = eval::segment_errors(est, gt, cfg.eval.segment_lengths);
  ordered_json seg_json;
  seg_json["t_rel_percent"] = seg.t_rel_percent;
  seg_json["r_rel_deg_per_100m"] = seg.r_rel_deg_per_100m;
  seg_json["segment_count"] = seg.segment_count;
  auto& per = seg_json["per_length"] = ordered_json::array();
  for (const auto& pl : seg.per_length) {
    per.push_back(ordered_json{{"length_m", pl.length},
                               {"t_rel_percent", pl.t_rel_percent},
                               {"r_rel_deg_per_100m", pl.r_rel_deg_per_100m},
                               {"count", pl.count}});
  }
  doc["segments"] = seg_json;

  if (alignment) {
    const Mat3& rm = alignment->rotation.matrix();
    std::vector<double> rot(9);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) rot[i * 3 + j] = rm(i, j);
    doc["alignment"] = ordered_json{{"scale", alignment->scale},
                                    {"rotation", rot},
                                    {"translation", json_vec(alignment->translation)},
                                    {"rmse_before", alignment->rmse_before},
                                    {"rmse_after", alignment->rmse_after}};
  } else {
    doc["alignment"] = nullptr;
  }

  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error(out_path + ": cannot open for writing");
    out << doc.dump(2) << '\n';
  }
  if (!aligned_csv_path.empty()) {
    const Trajectory aligned = alignment ? eval::apply_alignment(*alignment, est) : est;
    io::write_trajectory_csv(aligned, aligned_csv_path);
  }

  log_line("evaluate: ate " + std::to_string(doc["ate"].get<double>()) + " m");
  emit(doc, as_json);
  return 0;
}

// --------------------------------------------------------------------------
// infer
// --------------------------------------------------------------------------

int run_infer(const std::string& frames_dir, const std::string& weights_path,
              const std::string& out_path, bool as_json) {
  std::vector<fs::path> files;
  if (!fs::is_directory(frames_dir)) {
    throw std::runtime_error(frames_dir + ": not a directory");
  }
  for (const auto& entry : fs::directory_iterator(frames_dir)) {
    const auto ext = entry.path().extension().string();
    if (ext == ".ppm" || ext == ".pgm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.size() < 2) {
    throw std::runtime_error(frames_dir + ": needs at least 2 .ppm/.pgm frames");
  }

  const vonet::ModelWeights weights = vonet::load_weights(weights_path);

  Trajectory chain;
  chain.poses.push_back({0.0, Pose::identity()});
  vonet::Image prev = io::read_pnm(files[0]);
  for (std::size_t i = 1; i < files.size(); ++i) {
    vonet::Image next = io::read_pnm(files[i]);
    const Pose motion = vonet::vonet_infer(prev, next, weights);
    chain.poses.push_back(
        {static_cast<double>(i), compose(chain.poses.back().pose, motion)});
    prev = std::move(next);
  }
  io::write_pose_file(chain, out_path);

  log_line("infer: " + std::to_string(files.size()) + " frames -> " + out_path);
  ordered_json summary;
  summary["command"] = "infer";
  summary["frames"] = files.size();
  summary["output"] = out_path;
  emit(summary, as_json);
  return 0;
}

// --------------------------------------------------------------------------
// gradcheck
// --------------------------------------------------------------------------

int run_gradcheck(int instances, std::uint64_t seed, bool as_json) {
  Rng rng(seed);
  const double h = 1e-5;
  double max_rel_err = 0.0;
  int failures = 0;

  auto rel_err = [](double got, double want) {
    return std::abs(got - want) / std::max({1.0, std::abs(got), std::abs(want)});
  };

  for (int trial = 0; trial < instances; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform(1.0, 4.0));
    const int d = 1 + static_cast<int>(rng.uniform(1.0, 4.0));
    Eigen::MatrixXd q(n, d), k(n, d), v(n, d), g(n, d), upstream(n, d);
    for (auto* m : {&q, &k, &v, &g, &upstream}) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) (*m)(i, j) = rng.gaussian();
    }
    const double alpha = rng.uniform(0.5, 2.5);

    const auto grads = vonet::guided_attention_grad(q, k, v, g, alpha, upstream);
    auto loss = [&](const Eigen::MatrixXd& qq, const Eigen::MatrixXd& kk,
                    const Eigen::MatrixXd& vv, const Eigen::MatrixXd& gg, double aa) {
      return vonet::guided_attention(qq, kk, vv, gg, aa).cwiseProduct(upstream).sum();
    };

    double instance_err = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) {
        struct Slot {
          Eigen::MatrixXd* m;
          const Eigen::MatrixXd* grad;
        };
        const Slot slots[4] = {{&q, &grads.q}, {&k, &grads.k}, {&v, &grads.v}, {&g, &grads.gate}};
        for (const auto& slot : slots) {
          (*slot.m)(i, j) += h;
          const double up = loss(q, k, v, g, alpha);
          (*slot.m)(i, j) -= 2.0 * h;
          const double dn = loss(q, k, v, g, alpha);
          (*slot.m)(i, j) += h;
          instance_err = std::max(instance_err,
                                  rel_err((*slot.grad)(i, j), (up - dn) / (2.0 * h)));
        }
      }
    }
    const double fd_alpha =
        (loss(q, k, v, g, alpha + h) - loss(q, k, v, g, alpha - h)) / (2.0 * h);
    instance_err = std::max(instance_err, rel_err(grads.alpha, fd_alpha));

    max_rel_err = std::max(max_rel_err, instance_err);
    if (instance_err >= 1e-4) ++failures;
  }

  log_line("gradcheck: " + std::to_string(instances) + " instances, max relative error " +
           std::to_string(max_rel_err));
  ordered_json summary;
  summary["command"] = "gradcheck";
  summary["instances"] = instances;
  summary["max_relative_error"] = max_rel_err;
  summary["threshold"] = 1e-4;
  summary["failures"] = failures;
  summary["passed"] = failures == 0;
  emit(summary, as_json);
  return failures == 0 ? 0 : 1;
}

// --------------------------------------------------------------------------
// init-weights
// --------------------------------------------------------------------------

int run_init_weights(const std::string& config_path, std::uint64_t seed, bool zero,
                     const std::string& out_path, bool as_json) {
  const io::PipelineConfig cfg = load_or_default(config_path);
  const vonet::ModelWeights w = zero ? vonet::ModelWeights::zeros(cfg.model)
                                     : vonet::ModelWeights::seeded(cfg.model, seed);
  vonet::save_weights(w, out_path);
  log_line("init-weights: wrote " + out_path);
  ordered_json summary;
  summary["command"] = "init-weights";
  summary["output"] = out_path;
  summary["zero"] = zero;
  summary["seed"] = seed;
  emit(summary, as_json);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"low-light visual-inertial odometry toolkit"};
  app.require_subcommand(1);

  bool as_json = false;
  app.add_flag("--json", as_json, "print a machine-readable summary on stdout");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "generate a synthetic scenario");
  std::string sim_config, sim_out;
  bool sim_frames = false;
  sim_cmd->add_option("--config", sim_config, "pipeline config JSON");
  sim_cmd->add_option("--out-dir", sim_out, "output directory")->required();
  sim_cmd->add_flag("--frames", sim_frames, "also render PPM frame sequence");

  // preintegrate
  auto* pre_cmd = app.add_subcommand("preintegrate", "IMU CSV -> per-keyframe motions JSON");
  std::string pre_imu, pre_out;
  double pre_rate = 1.0;
  pre_cmd->add_option("--imu", pre_imu, "IMU CSV file")->required();
  pre_cmd->add_option("--keyframe-rate", pre_rate, "keyframe rate in Hz")->required();
  pre_cmd->add_option("-o,--output", pre_out, "motions JSON output")->required();

  // refine
  auto* ref_cmd = app.add_subcommand("refine", "pose-graph refinement of a VO chain");
  std::string ref_vo, ref_motions, ref_gnss, ref_config, ref_out, ref_report, ref_v0;
  ref_cmd->add_option("--vo", ref_vo, "VO pose file")->required();
  ref_cmd->add_option("--motions", ref_motions, "pre-integrated motions JSON")->required();
  ref_cmd->add_option("--gnss", ref_gnss, "optional GNSS CSV");
  ref_cmd->add_option("--config", ref_config, "pipeline config JSON");
  ref_cmd->add_option("-o,--output", ref_out, "refined pose file")->required();
  ref_cmd->add_option("--report", ref_report, "solve report JSON");
  ref_cmd->add_option("--initial-velocity", ref_v0, "world-frame start velocity 'x,y,z'");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "ATE/RPE/segment metrics");
  std::string eval_est, eval_gt, eval_segments, eval_config, eval_out, eval_csv;
  int eval_delta = 0;
  bool eval_no_align = false;
  eval_cmd->add_option("--est", eval_est, "estimated pose file")->required();
  eval_cmd->add_option("--gt", eval_gt, "ground-truth pose file")->required();
  eval_cmd->add_option("--delta", eval_delta, "RPE frame step");
  eval_cmd->add_option("--segments", eval_segments, "comma-separated segment lengths (m)");
  eval_cmd->add_option("--config", eval_config, "pipeline config JSON");
  eval_cmd->add_flag("--no-align", eval_no_align, "skip similarity alignment");
  eval_cmd->add_option("-o,--output", eval_out, "metrics JSON output");
  eval_cmd->add_option("--aligned-csv", eval_csv, "aligned trajectory CSV output");

  // infer
  auto* inf_cmd = app.add_subcommand("infer", "frame-pair directory -> VO pose file");
  std::string inf_frames, inf_weights, inf_out;
  inf_cmd->add_option("--frames", inf_frames, "directory of .ppm/.pgm frames")->required();
  inf_cmd->add_option("--weights", inf_weights, "weight binary (manifest at <file>.json)")
      ->required();
  inf_cmd->add_option("-o,--output", inf_out, "pose file output")->required();

  // gradcheck
  auto* grad_cmd = app.add_subcommand("gradcheck", "attention finite-difference suite");
  int grad_instances = 50;
  std::uint64_t grad_seed = 20240701;
  grad_cmd->add_option("--instances", grad_instances, "number of random instances");
  grad_cmd->add_option("--seed", grad_seed, "RNG seed");

  // init-weights
  auto* init_cmd = app.add_subcommand("init-weights", "write a seeded or zero weight file");
  std::string init_config, init_out;
  std::uint64_t init_seed = 1;
  bool init_zero = false;
  init_cmd->add_option("--config", init_config, "pipeline config JSON");
  init_cmd->add_option("--seed", init_seed, "RNG seed");
  init_cmd->add_flag("--zero", init_zero, "all-zero weights (identity-pose output)");
  init_cmd->add_option("-o,--output", init_out, "weight binary output")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim_cmd->parsed()) return run_simulate(sim_config, sim_out, sim_frames, as_json);
    if (pre_cmd->parsed()) return run_preintegrate(pre_imu, pre_rate, pre_out, as_json);
    if (ref_cmd->parsed()) {
      return run_refine(ref_vo, ref_motions, ref_gnss, ref_config, ref_out, ref_report,
                        ref_v0, as_json);
    }
    if (eval_cmd->parsed()) {
      return run_evaluate(eval_est, eval_gt, eval_delta, eval_segments, eval_config,
                          eval_no_align, eval_out, eval_csv, as_json);
    }
    if (inf_cmd->parsed()) return run_infer(inf_frames, inf_weights, inf_out, as_json);
    if (grad_cmd->parsed()) return run_gradcheck(grad_instances, grad_seed, as_json);
    if (init_cmd->parsed()) {
      return run_init_weights(init_config, init_seed, init_zero, init_out, as_json);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
