#include "gpd/world/trainer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "gpd/codec/trainer.hpp"
#include "gpd/scene/error.hpp"

namespace gpd::world {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), static_cast<std::uint32_t>(b),
                    static_cast<std::uint32_t>(b >> 32)};
  std::array<std::uint32_t, 2> v{};
  seq.generate(v.begin(), v.end());
  return (static_cast<std::uint64_t>(v[0]) << 32) | v[1];
}

}  // namespace

WorldTrainer::WorldTrainer(WorldModel<float>& model, std::vector<TokenizedScenario> data, WorldTrainConfig cfg)
    : model_(model),
      data_(std::move(data)),
      cfg_(cfg),
      window_(cfg.window == 0 ? model.config().layout.t_max : cfg.window),
      opt_(model.params().all(), nn::AdamWOptions{cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay, {}}) {
  if (window_ < 2 || window_ > model_.config().layout.t_max) throw ConfigError("training window must be in [2, t_max]");
  if (cfg_.batch == 0 || cfg_.steps <= 0) throw ConfigError("world training needs batch >= 1 and steps >= 1");
  for (std::size_t s = 0; s < data_.size(); ++s) {
    const std::size_t n = data_[s].frames.size();
    if (n < 2) continue;
    // A window of w frames needs w frames of context; its last frame keeps a target when one exists.
    const std::size_t w = std::min(window_, n);
    for (std::size_t start = 0; start + w <= n; ++start) all_windows_.push_back({s, start});
  }
  if (all_windows_.empty()) throw ConfigError("world training needs scenarios with at least two frames");
}

std::vector<WorldTrainer::Window> WorldTrainer::windows_for(std::int64_t step) const {
  const std::size_t n = all_windows_.size();
  std::vector<Window> out;
  for (std::size_t k = 0; k < cfg_.batch; ++k) {
    const std::uint64_t pos = static_cast<std::uint64_t>(step) * cfg_.batch + k;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(mix(cfg_.seed, pos / n));
    std::shuffle(perm.begin(), perm.end(), rng);
    out.push_back(all_windows_[perm[pos % n]]);
  }
  return out;
}

WorldStepStats WorldTrainer::step() {
  const std::int64_t s = opt_.state().step;
  model_.params().zero_grad();
  WorldStepStats st;
  st.step = s + 1;
  const float inv_b = 1.0f / static_cast<float>(cfg_.batch);
  std::size_t correct = 0, count = 0;
  const auto wins = windows_for(s);
  for (std::size_t b = 0; b < wins.size(); ++b) {
    const auto& win = wins[b];
    const auto& frames = data_[win.scenario].frames;
    const std::size_t w = std::min(window_, frames.size());
    std::vector<FrameTokens> noisy;
    std::span<const FrameTokens> window(frames.data() + win.start, w);
    if (cfg_.pose_noise > 0.0) {
      noisy.assign(window.begin(), window.end());
      std::mt19937_64 rng(mix(mix(cfg_.seed ^ 0x6e6f697365ull, static_cast<std::uint64_t>(s)), b));
      std::normal_distribution<double> n(0.0, cfg_.pose_noise);
      for (auto& f : noisy) {
        for (auto& slot : f.slots) {
          if (!slot.visible) continue;
          slot.pose.x += n(rng);
          slot.pose.y += n(rng);
          slot.pose.heading = scene::normalize_angle(slot.pose.heading + n(rng) * std::numbers::pi / 180.0);
        }
      }
      window = noisy;
    }
    const std::size_t with_target = std::min(w, frames.size() - win.start - 1);
    const std::span<const FrameTokens> targets(frames.data() + win.start + 1, with_target);
    nn::Tape<float> tape;
    const auto out = model_.forward(tape, window);
    const auto loss = world_loss(model_, out, window, targets, cfg_.weights);
    const double total = loss.total.value()[0];
    if (!std::isfinite(total)) throw NumericalError("world loss is not finite at step " + std::to_string(s + 1));
    st.total += total * inv_b;
    st.map_ce += loss.map_ce * inv_b;
    st.agent_l1 += loss.agent_l1 * inv_b;
    st.position_l1 += loss.position_l1 * inv_b;
    st.visibility += loss.visibility * inv_b;
    correct += loss.map_correct;
    count += loss.map_count;
    tape.backward(nn::scale(loss.total, inv_b));
  }
  for (auto* p : model_.params().all()) {
    if (!p->grad.all_finite()) throw NumericalError("non-finite gradient in " + p->name + " at step " + std::to_string(s + 1));
  }
  st.map_accuracy = count == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(count);
  opt_.step(nn::warmup_cosine(s, cfg_.warmup, cfg_.steps));
  return st;
}

nn::Checkpoint WorldTrainer::checkpoint(const std::string& codec_hash) const {
  auto ckpt = world_checkpoint(model_, codec_hash);
  nn::export_optimizer(opt_, ckpt);
  return ckpt;
}

void WorldTrainer::restore(const nn::Checkpoint& ckpt) {
  nn::import_params(model_.params(), ckpt);
  nn::import_optimizer(opt_, ckpt);
}

WorldEval evaluate_teacher_forced(const WorldModel<float>& model, const std::vector<TokenizedScenario>& data,
                                  std::size_t window) {
  // Consecutive chunks; a chunk is the causal prefix of a full training window.
  WorldEval ev;
  std::size_t correct = 0, count = 0, agent_rows = 0, vis_rows = 0;
  double l1 = 0.0, pos = 0.0, vis = 0.0;
  const std::size_t n_agent = model.config().layout.n_agent;
  for (const auto& sc : data) {
    const std::size_t n = sc.frames.size();
    for (std::size_t start = 0; start + 1 < n; start += window) {
      const std::size_t w = std::min(window, n - start);
      const std::size_t with_target = std::min(w, n - start - 1);
      const std::span<const FrameTokens> win(sc.frames.data() + start, w);
      const std::span<const FrameTokens> tg(sc.frames.data() + start + 1, with_target);
      nn::Tape<float> tape;
      const auto out = model.forward(tape, win);
      const auto loss = world_loss(model, out, win, tg, {});
      correct += loss.map_correct;
      count += loss.map_count;
      l1 += loss.agent_l1 * static_cast<double>(loss.agent_count);
      pos += loss.position_l1 * static_cast<double>(loss.agent_count);
      agent_rows += loss.agent_count;
      vis += loss.visibility * static_cast<double>(with_target * n_agent);
      vis_rows += with_target * n_agent;
    }
  }
  ev.map_accuracy = count == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(count);
  ev.agent_l1 = agent_rows == 0 ? 0.0 : l1 / static_cast<double>(agent_rows);
  ev.position_l1 = agent_rows == 0 ? 0.0 : pos / static_cast<double>(agent_rows);
  ev.visibility = vis_rows == 0 ? 0.0 : vis / static_cast<double>(vis_rows);
  return ev;
}

std::string codec_hash(const codec::CodecModel<float>& codec) { return nn::content_hash(codec::codec_checkpoint(codec)); }

nn::Checkpoint world_checkpoint(const WorldModel<float>& model, const std::string& codec_hash) {
  nn::Checkpoint ckpt;
  ckpt.header = to_header(model.config());
  ckpt.header["kind"] = "world";
  ckpt.header["format"] = "1";
  ckpt.header["codec_hash"] = codec_hash;
  nn::export_params(model.params(), ckpt);
  return ckpt;
}

void save_world(const WorldModel<float>& model, const std::string& codec_hash, const std::filesystem::path& path) {
  nn::save_checkpoint(world_checkpoint(model, codec_hash), path);
}

std::unique_ptr<WorldModel<float>> world_from_checkpoint(const nn::Checkpoint& ckpt, const codec::CodecModel<float>& codec) {
  if (ckpt.require("kind") != "world") throw ConfigError("checkpoint is not a world-model checkpoint");
  const std::string want = ckpt.require("codec_hash");
  const std::string have = codec_hash(codec);
  if (want != have) throw ConfigError("codec mismatch: world model expects codec " + want + ", got " + have);
  auto model = std::make_unique<WorldModel<float>>(world_config_from_header(ckpt.header), codec.codebook().value, 0);
  nn::import_params(model->params(), ckpt);
  return model;
}

std::unique_ptr<WorldModel<float>> load_world(const std::filesystem::path& path, const codec::CodecModel<float>& codec) {
  return world_from_checkpoint(nn::load_checkpoint(path), codec);
}

}  // namespace gpd::world
