#pragma once

#include <filesystem>
#include <iosfwd>

#include "gpd/rollout/rollout.hpp"

namespace gpd::rollout {

/// Sidecar listing, per predicted frame, which slots came from ground truth.
///
///   GPD-PROVENANCE v1 mode=<mode> n_map=<m> n_agent=<a> frames=<f>
///   <t_index> TAB <m flags> TAB <ego flag> TAB <a-1 flags>     (G = ground truth, P = predicted)
///   end
struct Provenance {
  TaskMode mode = TaskMode::SceneGeneration;
  world::SceneLayout layout;
  std::vector<std::int64_t> t_index;
  std::vector<std::vector<Source>> flags;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

Provenance provenance_of(const RolloutResult& r, const world::SceneLayout& layout);
void write_provenance(std::ostream& out, const Provenance& p);
Provenance read_provenance(std::istream& in);
void save_provenance(const Provenance& p, const std::filesystem::path& path);
Provenance load_provenance(const std::filesystem::path& path);

}  // namespace gpd::rollout
