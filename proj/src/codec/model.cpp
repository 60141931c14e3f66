#include "gpd/codec/model.hpp"

#include <cmath>
#include <sstream>

#include "gpd/codec/quantizer.hpp"
#include "gpd/scene/error.hpp"

namespace gpd::codec {

std::vector<std::size_t> CodecConfig::stage_channels() const {
  const std::vector<std::size_t> base{16, 32, 64, 128, 128, 128, 128, 128};
  std::size_t stages = 0;
  for (int s = raster.canvas_size; s > grid; s /= 2) ++stages;
  return {base.begin(), base.begin() + static_cast<long>(stages)};
}

void validate(const CodecConfig& cfg) {
  raster::validate(cfg.raster);
  if (cfg.grid < 1 || cfg.raster.canvas_size % cfg.grid != 0) throw ConfigError("codec grid must divide the canvas size");
  int s = cfg.raster.canvas_size;
  while (s > cfg.grid) {
    if (s % 2 != 0) throw ConfigError("canvas size / grid must be a power of two");
    s /= 2;
  }
  if (cfg.stage_channels().size() > 8) throw ConfigError("too many encoder stages");
  if (cfg.codebook_size < 2) throw ConfigError("codebook needs at least two entries");
  if (cfg.queries == 0 || cfg.points < 2) throw ConfigError("decoder needs queries >= 1 and points >= 2");
  if (cfg.latent_dim % 4 != 0) throw ConfigError("latent_dim must be divisible by 4");
  if (cfg.latent_dim % cfg.decoder_heads != 0) throw ConfigError("latent_dim must be divisible by decoder_heads");
}

std::map<std::string, std::string> to_header(const CodecConfig& cfg) {
  auto num = [](double v) {
    std::ostringstream o;
    o.precision(17);
    o << v;
    return o.str();
  };
  return {
      {"codec.grid", std::to_string(cfg.grid)},
      {"codec.latent_dim", std::to_string(cfg.latent_dim)},
      {"codec.codebook_size", std::to_string(cfg.codebook_size)},
      {"codec.queries", std::to_string(cfg.queries)},
      {"codec.points", std::to_string(cfg.points)},
      {"codec.decoder_layers", std::to_string(cfg.decoder_layers)},
      {"codec.decoder_heads", std::to_string(cfg.decoder_heads)},
      {"codec.decoder_hidden", std::to_string(cfg.decoder_hidden)},
      {"raster.canvas_size", std::to_string(cfg.raster.canvas_size)},
      {"raster.half_extent", num(cfg.raster.region_half_extent)},
      {"raster.interp_step", num(cfg.raster.interp_step)},
  };
}

CodecConfig codec_config_from_header(const std::map<std::string, std::string>& h) {
  auto get = [&h](const std::string& k) {
    const auto it = h.find(k);
    if (it == h.end()) throw ConfigError("codec header lacks '" + k + "'");
    return it->second;
  };
  CodecConfig c;
  c.grid = std::stoi(get("codec.grid"));
  c.latent_dim = std::stoul(get("codec.latent_dim"));
  c.codebook_size = std::stoul(get("codec.codebook_size"));
  c.queries = std::stoul(get("codec.queries"));
  c.points = std::stoul(get("codec.points"));
  c.decoder_layers = std::stoul(get("codec.decoder_layers"));
  c.decoder_heads = std::stoul(get("codec.decoder_heads"));
  c.decoder_hidden = std::stoul(get("codec.decoder_hidden"));
  c.raster.canvas_size = std::stoi(get("raster.canvas_size"));
  c.raster.region_half_extent = std::stod(get("raster.half_extent"));
  c.raster.interp_step = std::stod(get("raster.interp_step"));
  validate(c);
  return c;
}

template <typename T>
nn::Tensor<T> canvas_tensor(const raster::RasterCanvas& canvas) {
  const auto s = static_cast<std::size_t>(canvas.size());
  nn::Tensor<T> t({1, s, s});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<T>(canvas.cells()[i]);
  return t;
}

template <typename T>
nn::Tensor<T> lookup(const nn::Tensor<T>& book, const std::vector<std::size_t>& idx) {
  const std::size_t d = book.cols();
  nn::Tensor<T> out({idx.size(), d});
  for (std::size_t i = 0; i < idx.size(); ++i) {
    std::copy_n(book.data() + idx[i] * d, d, out.data() + i * d);
  }
  return out;
}

template <typename T>
CodecModel<T>::CodecModel(const CodecConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  validate(cfg_);
  nn::Rng rng(seed);
  std::size_t in = 1;
  const auto channels = cfg_.stage_channels();
  for (std::size_t s = 0; s < channels.size(); ++s) {
    Conv c;
    const std::string name = "enc.conv" + std::to_string(s);
    c.w = &params_.add(name + ".w", {channels[s], in * 9});
    c.b = &params_.add(name + ".b", {channels[s]});
    nn::init_xavier(*c.w, in * 9, channels[s] * 9, rng);
    convs_.push_back(c);
    in = channels[s];
  }
  const std::size_t d = cfg_.latent_dim;
  proj_ = nn::Linear<T>(params_, "enc.proj", in, d, rng);
  codebook_ = &params_.add("codebook", {cfg_.codebook_size, d}, 1);
  nn::init_uniform(*codebook_, 0.02, rng);

  queries_ = &params_.add("dec.queries", {cfg_.queries, d});
  nn::init_uniform(*queries_, 0.02, rng);
  for (std::size_t l = 0; l < cfg_.decoder_layers; ++l) {
    blocks_.emplace_back(params_, "dec.block" + std::to_string(l), d, cfg_.decoder_heads, cfg_.decoder_hidden, rng);
  }
  final_ln_ = nn::LayerNorm<T>(params_, "dec.ln", d);
  points_head_ = nn::Linear<T>(params_, "dec.points", d, 2 * cfg_.points, rng);
  vis_head_ = nn::Linear<T>(params_, "dec.vis", d, 1, rng);

  // Fixed 2-D sinusoidal code per cell: half the channels for the row, half for the column.
  const auto g = static_cast<std::size_t>(cfg_.grid);
  memory_pos_ = nn::Tensor<T>({g * g, d});
  for (std::size_t r = 0; r < g; ++r) {
    for (std::size_t c = 0; c < g; ++c) {
      const auto er = nn::sinusoidal(static_cast<double>(r), d / 2);
      const auto ec = nn::sinusoidal(static_cast<double>(c), d / 2);
      for (std::size_t k = 0; k < d / 2; ++k) {
        memory_pos_(r * g + c, k) = static_cast<T>(er[k]);
        memory_pos_(r * g + c, d / 2 + k) = static_cast<T>(ec[k]);
      }
    }
  }
}

template <typename T>
nn::Var<T> CodecModel<T>::encode(nn::Tape<T>& tape, const nn::Tensor<T>& canvas) const {
  const auto s = static_cast<std::size_t>(cfg_.raster.canvas_size);
  if (canvas.shape() != nn::Shape{1, s, s}) throw ConfigError("codec input must be [1 x " + std::to_string(s) + " x " + std::to_string(s) + "], got " + nn::shape_str(canvas.shape()));
  nn::Var<T> x = tape.constant(canvas);
  for (const auto& c : convs_) {
    x = nn::relu(nn::conv2d(x, tape.param(*c.w), tape.param(*c.b), 3, 2, 1));
  }
  // [C x g x g] -> [g*g x C]
  const std::size_t ch = x.shape()[0];
  const std::size_t n = x.shape()[1] * x.shape()[2];
  x = nn::transpose(nn::reshape(x, {ch, n}));
  return proj_(x);
}

template <typename T>
typename CodecModel<T>::Decoded CodecModel<T>::decode(nn::Tape<T>& tape, const nn::Var<T>& zq) const {
  if (zq.shape() != nn::Shape{cfg_.cells(), cfg_.latent_dim}) {
    throw nn::ShapeError("codec decode", zq.shape(), {cfg_.cells(), cfg_.latent_dim});
  }
  const nn::Var<T> memory = nn::add(zq, tape.constant(memory_pos_));
  nn::Var<T> q = tape.param(*queries_);
  for (const auto& b : blocks_) q = b(q, memory);
  q = final_ln_(q);
  const T scale = static_cast<T>(cfg_.raster.region_half_extent);
  return {nn::scale(points_head_(q), scale), vis_head_(q)};
}

template <typename T>
std::vector<std::size_t> CodecModel<T>::tokenize(const raster::RasterCanvas& canvas) const {
  nn::Tape<T> tape;
  const auto z = encode(tape, canvas_tensor<T>(canvas));
  return nearest_codes(z.value(), codebook_->value);
}

template <typename T>
LaneSet CodecModel<T>::decode_tokens(const std::vector<std::size_t>& tokens) const {
  if (tokens.size() != cfg_.cells()) throw ConfigError("expected " + std::to_string(cfg_.cells()) + " map tokens");
  for (auto t : tokens) {
    if (t >= cfg_.codebook_size) throw ConfigError("map token " + std::to_string(t) + " out of range");
  }
  nn::Tape<T> tape;
  const auto out = decode(tape, tape.constant(lookup(codebook_->value, tokens)));
  LaneSet set;
  set.points_per_lane = cfg_.points;
  const auto& pts = out.points.value();
  const auto& logits = out.logits.value();
  for (std::size_t q = 0; q < cfg_.queries; ++q) {
    std::vector<scene::Vec2> lane(cfg_.points);
    for (std::size_t p = 0; p < cfg_.points; ++p) lane[p] = {static_cast<double>(pts(q, 2 * p)), static_cast<double>(pts(q, 2 * p + 1))};
    set.lanes.push_back(std::move(lane));
    set.prob.push_back(1.0 / (1.0 + std::exp(-static_cast<double>(logits[q]))));
  }
  return set;
}

template nn::Tensor<float> canvas_tensor(const raster::RasterCanvas&);
template nn::Tensor<double> canvas_tensor(const raster::RasterCanvas&);
template nn::Tensor<float> lookup(const nn::Tensor<float>&, const std::vector<std::size_t>&);
template nn::Tensor<double> lookup(const nn::Tensor<double>&, const std::vector<std::size_t>&);
template class CodecModel<float>;
template class CodecModel<double>;

}  // namespace gpd::codec
