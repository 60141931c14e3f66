#pragma once

#include <string>
#include <vector>

#include "gpd/scene/types.hpp"

namespace gpd::rollout {

/// Metrics of one predicted scenario against ground truth over a horizon.
/// Quantities that cannot be computed (no visible agent, no GT lane) are NaN.
struct EvalRow {
  std::string scenario;
  std::string mode;
  double horizon_s = 0.0;
  std::size_t frames = 0;
  double ego_ade = 0.0;
  double ego_fde = 0.0;
  double agent_ade = 0.0;  // mean over agents visible at least once
  double agent_fde = 0.0;
  std::size_t agents_scored = 0;
  double collision_rate = 0.0;  // percent
  double map_f1 = 0.0;          // mean over frames sampled at 1 Hz
  double map_lateral_l2 = 0.0;
  double map_chamfer = 0.0;
  std::size_t map_frames = 0;
};

/// Compares the first `horizon_frames` frames of `pred` with the frames of
/// `gt` carrying the same t_index. Agents are paired by id; the scored
/// frames of an agent are those where it is visible in `gt`. Maps are
/// compared ego-centrically (each scenario in its own ego frame, clipped to
/// the region) at every 1-second mark of the horizon.
/// Throws ConfigError when frames cannot be aligned.
EvalRow evaluate_prediction(const scene::Scenario& pred, const scene::Scenario& gt, std::size_t horizon_frames,
                            double half_extent = 32.0);

/// Mean of each metric over rows, ignoring NaN entries.
EvalRow average_rows(const std::vector<EvalRow>& rows);

/// key=value rendering of one row (single line, space separated).
std::string format_row(const EvalRow& r);

}  // namespace gpd::rollout
