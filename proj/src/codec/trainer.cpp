#include "gpd/codec/trainer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "gpd/codec/quantizer.hpp"
#include "gpd/metrics/map.hpp"
#include "gpd/scene/error.hpp"
#include "gpd/scene/geometry.hpp"

namespace gpd::codec {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), static_cast<std::uint32_t>(b),
                    static_cast<std::uint32_t>(b >> 32)};
  std::uint64_t out = 0;
  std::array<std::uint32_t, 2> v{};
  seq.generate(v.begin(), v.end());
  out = (static_cast<std::uint64_t>(v[0]) << 32) | v[1];
  return out;
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

CodecSample make_codec_sample(const scene::SceneFrame& frame, const CodecConfig& cfg) {
  const auto local = scene::transform_map(frame.map, frame.ego.pose, true);
  const double h = cfg.raster.region_half_extent;
  CodecSample s;
  s.canvas = raster::rasterize(scene::clip_map_to_region(local, h), cfg.raster);
  s.lines = target_lines(local, h, cfg.queries);
  s.targets = resample_targets(s.lines, cfg.points);
  return s;
}

CodecTrainer::CodecTrainer(CodecModel<float>& model, std::vector<CodecSample> data, CodecTrainConfig cfg)
    : model_(model),
      data_(std::move(data)),
      cfg_(cfg),
      opt_(model.params().all(), nn::AdamWOptions{cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay, {{1, cfg.codebook_lr}}}),
      last_used_(model.config().codebook_size, 0.0f) {
  if (data_.empty()) throw ConfigError("codec training needs at least one sample");
  if (cfg_.batch == 0 || cfg_.steps <= 0) throw ConfigError("codec training needs batch >= 1 and steps >= 1");
}

std::vector<std::size_t> CodecTrainer::batch_indices(std::int64_t step) const {
  // Walk a fresh permutation per epoch so every sample is visited evenly.
  const std::size_t n = data_.size();
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < cfg_.batch; ++k) {
    const std::uint64_t pos = static_cast<std::uint64_t>(step) * cfg_.batch + k;
    const std::uint64_t epoch = pos / n;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(mix(cfg_.seed, epoch));
    std::shuffle(perm.begin(), perm.end(), rng);
    out.push_back(perm[pos % n]);
  }
  return out;
}

void CodecTrainer::init_codebook() {
  // Data-dependent start: codebook rows copied from encoder outputs.
  const std::size_t k = model_.config().codebook_size;
  const std::size_t d = model_.config().latent_dim;
  std::vector<float> pool;
  for (std::size_t i = 0; i < data_.size() && pool.size() < k * d; ++i) {
    nn::Tape<float> tape;
    const auto z = model_.encode(tape, canvas_tensor<float>(data_[i].canvas));
    pool.insert(pool.end(), z.value().values().begin(), z.value().values().end());
  }
  const std::size_t rows = pool.size() / d;
  std::mt19937_64 rng(mix(cfg_.seed, 0x5eed));
  std::normal_distribution<double> noise(0.0, 1.0);
  auto& book = model_.codebook().value;
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t src = r % rows;
    const bool repeat = r >= rows;
    for (std::size_t c = 0; c < d; ++c) {
      double v = pool[src * d + c];
      if (repeat) v += 1e-3 * noise(rng);
      book(r, c) = static_cast<float>(v);
    }
  }
  book_ready_ = true;
}

void CodecTrainer::reseed_dead_codes(const std::vector<nn::Tensor<float>>& latents) {
  const auto step = static_cast<float>(opt_.state().step);
  const std::size_t d = model_.config().latent_dim;
  std::mt19937_64 rng(mix(cfg_.seed ^ 0xdeadc0deULL, static_cast<std::uint64_t>(opt_.state().step)));
  auto& book = model_.codebook().value;
  for (std::size_t k = 0; k < last_used_.size(); ++k) {
    if (step - last_used_[k] < static_cast<float>(cfg_.dead_code_steps)) continue;
    const auto& z = latents[rng() % latents.size()];
    const std::size_t row = rng() % z.rows();
    for (std::size_t c = 0; c < d; ++c) book(k, c) = z(row, c);
    last_used_[k] = step;
  }
}

CodecStepStats CodecTrainer::step() {
  if (!book_ready_) init_codebook();
  const std::int64_t s = opt_.state().step;
  model_.params().zero_grad();
  CodecStepStats st;
  st.step = s + 1;
  std::vector<nn::Tensor<float>> latents;
  std::vector<std::uint8_t> used(last_used_.size(), 0);
  const float inv_b = 1.0f / static_cast<float>(cfg_.batch);
  for (auto i : batch_indices(s)) {
    const CodecSample& sample = data_[i];
    nn::Tape<float> tape;
    const auto z = model_.encode(tape, canvas_tensor<float>(sample.canvas));
    const auto idx = nearest_codes(z.value(), model_.codebook().value);
    for (auto k : idx) used[k] = 1;
    const auto v = nn::gather_rows(tape.param(model_.codebook()), std::span<const std::size_t>(idx));
    const auto zq = straight_through(z, v);
    const auto dec = model_.decode(tape, zq);
    const auto cost = match_cost(dec.points.value().cast<double>(), dec.logits.value().cast<double>(), sample.targets,
                                 cfg_.weights.match_visibility);
    const auto assign = match_queries(cost, model_.config().queries);
    const auto loss = codec_loss<float>(dec, sample.targets, assign, z, v, cfg_.weights);
    const double total = loss.total.value()[0];
    if (!finite(total)) {
      throw NumericalError("codec loss is not finite at step " + std::to_string(s + 1));
    }
    st.total += total * inv_b;
    st.position += loss.position * inv_b;
    st.visibility += loss.visibility * inv_b;
    st.codebook += loss.codebook * inv_b;
    st.commitment += loss.commitment * inv_b;
    tape.backward(nn::scale(loss.total, inv_b));
    latents.push_back(z.value());
  }
  for (auto* p : model_.params().all()) {
    if (!p->grad.all_finite()) throw NumericalError("non-finite gradient in " + p->name + " at step " + std::to_string(s + 1));
  }
  opt_.step(nn::warmup_cosine(s, cfg_.warmup, cfg_.steps));
  for (std::size_t k = 0; k < used.size(); ++k) {
    if (used[k]) last_used_[k] = static_cast<float>(s + 1);
    st.codes_used += used[k];
  }
  if (cfg_.dead_code_steps > 0) reseed_dead_codes(latents);
  return st;
}

nn::Checkpoint CodecTrainer::checkpoint() const {
  nn::Checkpoint ckpt = codec_checkpoint(model_);
  nn::export_optimizer(opt_, ckpt);
  ckpt.header["train.book_ready"] = book_ready_ ? "1" : "0";
  ckpt.arrays.push_back({"train.last_used", {last_used_.size()}, last_used_});
  return ckpt;
}

void CodecTrainer::restore(const nn::Checkpoint& ckpt) {
  nn::import_params(model_.params(), ckpt);
  nn::import_optimizer(opt_, ckpt);
  book_ready_ = ckpt.require("train.book_ready") == "1";
  const auto* lu = ckpt.find("train.last_used");
  if (lu == nullptr || lu->data.size() != last_used_.size()) throw ConfigError("checkpoint lacks codebook usage state");
  last_used_ = lu->data;
}

double mean_reconstruction_f1(const CodecModel<float>& model, const std::vector<CodecSample>& data) {
  double total = 0.0;
  std::size_t n = 0;
  const double h = model.config().raster.region_half_extent;
  for (const auto& s : data) {
    if (s.lines.empty()) continue;
    const auto lanes = model.decode_tokens(model.tokenize(s.canvas));
    const auto pred = metrics::sample_points(visible_lines(lanes, h));
    total += metrics::map_f1(pred, metrics::sample_points(s.lines)).f1;
    ++n;
  }
  return n == 0 ? 0.0 : total / static_cast<double>(n);
}

nn::Checkpoint codec_checkpoint(const CodecModel<float>& model) {
  nn::Checkpoint ckpt;
  ckpt.header = to_header(model.config());
  ckpt.header["kind"] = "codec";
  ckpt.header["format"] = "1";
  nn::export_params(model.params(), ckpt);
  return ckpt;
}

void save_codec(const CodecModel<float>& model, const std::filesystem::path& path) {
  nn::save_checkpoint(codec_checkpoint(model), path);
}

std::unique_ptr<CodecModel<float>> codec_from_checkpoint(const nn::Checkpoint& ckpt) {
  if (ckpt.require("kind") != "codec") throw ConfigError("checkpoint is not a codec checkpoint");
  auto model = std::make_unique<CodecModel<float>>(codec_config_from_header(ckpt.header), 0);
  nn::import_params(model->params(), ckpt);
  return model;
}

std::unique_ptr<CodecModel<float>> load_codec(const std::filesystem::path& path) {
  return codec_from_checkpoint(nn::load_checkpoint(path));
}

}  // namespace gpd::codec
