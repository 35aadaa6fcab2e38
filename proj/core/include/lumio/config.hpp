#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lumio/eval.hpp"
#include "lumio/imu.hpp"
#include "lumio/pgo.hpp"
#include "lumio/sim.hpp"
#include "lumio/vonet.hpp"

namespace lumio::io {

struct PgoSettings {
  double lambda = 1.0;       // IMU constraint weight in the graph cost
  double sigma_scale = 1.0;  // edge information = sigma_scale * identity
  pgo::LmConfig lm;
};

struct ImuSettings {
  bool gravity_compensation = false;
  imu::GnssBlendOptions gnss_blend;
};

struct EvalSettings {
  int rpe_delta = 1;
  std::vector<double> segment_lengths = eval::default_segment_lengths();
  bool align = true;
  bool with_scale = true;
  double max_time_offset = 0.02;
};

/// All tunables of the pipeline in one versioned JSON document. Every key is
/// optional (defaults apply); unknown keys are rejected by name.
struct PipelineConfig {
  sim::ScenarioConfig scenario;
  vonet::ModelConfig model;
  PgoSettings pgo;
  ImuSettings imu;
  EvalSettings eval;

  void validate() const;
};

PipelineConfig parse_config(const std::string& json_text, const std::string& origin = "config");
PipelineConfig load_config_file(const std::filesystem::path& path);

/// Serializes a config with every field present (documents the defaults).
std::string dump_config(const PipelineConfig& cfg);

}  // namespace lumio::io
