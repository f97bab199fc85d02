#include "sdakd/model_zoo.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace sdakd {

namespace {

constexpr double kLeakySlope = 0.2;

int int_log2(int x) {
  int p = 0;
  while ((1 << p) < x) ++p;
  return p;
}

std::vector<double> sigmoid_clamped(const std::vector<double>& z) {
  std::vector<double> p(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double s = 1.0 / (1.0 + std::exp(-z[i]));
    p[i] = std::min(1.0 - kProbEps, std::max(kProbEps, s));
  }
  return p;
}

}  // namespace

int ArchitectureBlueprint::upsample_stages() const { return int_log2(upscale_factor); }

static void validate_common(const ArchitectureBlueprint& bp) {
  if (bp.input_channels < 1) throw std::invalid_argument("blueprint: input_channels must be >= 1");
  if (bp.upscale_factor != 2 && bp.upscale_factor != 4) {
    throw std::invalid_argument("blueprint: upscale_factor must be 2 or 4, got " +
                                std::to_string(bp.upscale_factor));
  }
  if (bp.base_channel_widths.empty()) {
    throw std::invalid_argument("blueprint: base_channel_widths is empty");
  }
  for (int w : bp.base_channel_widths) {
    if (w < 1) throw std::invalid_argument("blueprint: all base widths must be >= 1");
  }
}

void ArchitectureBlueprint::validate_generator() const {
  validate_common(*this);
  if (num_residual_blocks < 0) throw std::invalid_argument("blueprint: negative block count");
  const int expected = 1 + 2 * num_residual_blocks + upsample_stages();
  if (static_cast<int>(base_channel_widths.size()) != expected) {
    throw std::invalid_argument("blueprint: generator needs " + std::to_string(expected) +
                                " conv widths, got " +
                                std::to_string(base_channel_widths.size()));
  }
  // residual skip-adds require the closing conv of each block to restore the
  // head width
  for (int j = 0; j < num_residual_blocks; ++j) {
    if (base_channel_widths[2 + 2 * j] != base_channel_widths[0]) {
      throw std::invalid_argument("blueprint: block " + std::to_string(j) +
                                  " closing width must equal head width");
    }
  }
}

void ArchitectureBlueprint::validate_discriminator() const {
  validate_common(*this);
  if (num_residual_blocks != 0) {
    throw std::invalid_argument("blueprint: discriminator has no residual blocks");
  }
}

ArchitectureBlueprint ArchitectureBlueprint::default_generator(int base_width, int blocks,
                                                               int upscale) {
  ArchitectureBlueprint bp;
  bp.num_residual_blocks = blocks;
  bp.upscale_factor = upscale;
  bp.input_channels = 3;
  const int convs = 1 + 2 * blocks + bp.upsample_stages();
  bp.base_channel_widths.assign(convs, base_width);
  bp.validate_generator();
  return bp;
}

ArchitectureBlueprint ArchitectureBlueprint::default_discriminator(int upscale) {
  ArchitectureBlueprint bp;
  bp.base_channel_widths = {64, 128, 128};
  bp.num_residual_blocks = 0;
  bp.upscale_factor = upscale;
  bp.input_channels = 3;
  bp.validate_discriminator();
  return bp;
}

std::vector<int> ScaledArchitecture::scaled_widths() const {
  std::vector<int> widths;
  widths.reserve(blueprint.base_channel_widths.size());
  for (int w : blueprint.base_channel_widths) {
    widths.push_back(channel_fraction.scale_width(w));
  }
  return widths;
}

GeneratorNetwork::GeneratorNetwork(const ScaledArchitecture& arch, std::uint64_t seed)
    : arch_(arch), seed_(seed) {
  arch_.blueprint.validate_generator();
  const auto widths = arch_.scaled_widths();
  const int blocks = arch_.blueprint.num_residual_blocks;
  const int stages = arch_.blueprint.upsample_stages();
  const int in_ch = arch_.blueprint.input_channels;
  fm_hook_layer_ = 2 * blocks;  // closing conv of the last block, or the head

  Rng rng(seed);
  head_ = Conv2d(in_ch, widths[0], 3, 1, 1);
  head_.init(rng);
  int prev = widths[0];
  block_convs_.clear();
  for (int j = 0; j < blocks; ++j) {
    Conv2d a(prev, widths[1 + 2 * j], 3, 1, 1);
    a.init(rng);
    Conv2d b(widths[1 + 2 * j], widths[2 + 2 * j], 3, 1, 1);
    b.init(rng);
    block_convs_.push_back(std::move(a));
    block_convs_.push_back(std::move(b));
    prev = widths[2 + 2 * j];
  }
  up_convs_.clear();
  for (int s = 0; s < stages; ++s) {
    Conv2d u(prev, widths[1 + 2 * blocks + s], 3, 1, 1);
    u.init(rng);
    up_convs_.push_back(std::move(u));
    prev = widths[1 + 2 * blocks + s];
  }
  to_rgb_ = Conv2d(prev, in_ch, 3, 1, 1);
  to_rgb_.init(rng);
}

void GeneratorNetwork::set_fm_hook_layer(int layer_index) {
  const int blocks = arch_.blueprint.num_residual_blocks;
  const bool valid = layer_index == 0 ||
                     (layer_index > 0 && layer_index <= 2 * blocks && layer_index % 2 == 0);
  if (!valid) {
    throw std::out_of_range("fm hook layer " + std::to_string(layer_index) +
                            " is not a backbone representation point (0 or 2j for block j)");
  }
  fm_hook_layer_ = layer_index;
}

int GeneratorNetwork::fm_channels() const {
  const auto widths = arch_.scaled_widths();
  return widths[fm_hook_layer_];
}

Tensor GeneratorNetwork::run(const Tensor& lr, GenCache* cache) const {
  if (lr.c != arch_.blueprint.input_channels) {
    throw std::invalid_argument("generator: input has " + std::to_string(lr.c) +
                                " channels, blueprint expects " +
                                std::to_string(arch_.blueprint.input_channels));
  }
  const int blocks = arch_.blueprint.num_residual_blocks;
  const int hook_block = fm_hook_layer_ / 2;  // 0 means "after head"

  Tensor head_out = head_.forward(lr);
  Tensor x = leaky_relu(head_out, kLeakySlope);
  if (cache) {
    cache->input = lr;
    cache->head_out = head_out;
    cache->head_act = x;
    cache->block_in.clear();
    cache->a_out.clear();
    cache->a_act.clear();
    cache->b_out.clear();
  }
  Tensor fm = (hook_block == 0) ? x : Tensor();
  for (int j = 0; j < blocks; ++j) {
    const Conv2d& ca = block_convs_[2 * j];
    const Conv2d& cb = block_convs_[2 * j + 1];
    Tensor a_out = ca.forward(x);
    Tensor a_act = leaky_relu(a_out, kLeakySlope);
    Tensor b_out = cb.forward(a_act);
    Tensor out = b_out;
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += x.v[i];
    if (cache) {
      cache->block_in.push_back(x);
      cache->a_out.push_back(std::move(a_out));
      cache->a_act.push_back(std::move(a_act));
      cache->b_out.push_back(std::move(b_out));
    }
    x = std::move(out);
    if (hook_block == j + 1) fm = x;
  }
  if (cache) cache->fm = fm;

  if (cache) {
    cache->up_in.clear();
    cache->up_sampled.clear();
    cache->up_out.clear();
    cache->up_act.clear();
  }
  for (const Conv2d& cu : up_convs_) {
    Tensor up = upsample_nearest(x, 2);
    Tensor conv_out = cu.forward(up);
    Tensor act = leaky_relu(conv_out, kLeakySlope);
    if (cache) {
      cache->up_in.push_back(std::move(x));
      cache->up_sampled.push_back(std::move(up));
      cache->up_out.push_back(std::move(conv_out));
      cache->up_act.push_back(act);
    }
    x = std::move(act);
  }
  Tensor rgb_out = to_rgb_.forward(x);
  Tensor sr = tanh_forward(rgb_out);
  if (cache) {
    cache->rgb_in = std::move(x);
    cache->rgb_out = std::move(rgb_out);
    cache->sr = sr;
  }
  return sr;
}

Tensor GeneratorNetwork::forward(const Tensor& lr) const { return run(lr, nullptr); }

Tensor GeneratorNetwork::forward_train(const Tensor& lr, GenCache& cache) const {
  return run(lr, &cache);
}

Tensor GeneratorNetwork::feature_map(const Tensor& lr) const {
  GenCache cache;
  run(lr, &cache);
  return cache.fm;
}

void GeneratorNetwork::backward(const GenCache& cache, const Tensor& d_sr, const Tensor* d_fm) {
  if (!d_sr.same_shape(cache.sr)) {
    throw std::invalid_argument("generator backward: d_sr shape mismatch");
  }
  const int blocks = arch_.blueprint.num_residual_blocks;
  const int hook_block = fm_hook_layer_ / 2;

  Tensor d = tanh_backward(cache.sr, d_sr);
  d = to_rgb_.backward(cache.rgb_in, d);
  for (int s = static_cast<int>(up_convs_.size()) - 1; s >= 0; --s) {
    d = leaky_relu_backward(cache.up_out[s], d, kLeakySlope);
    d = up_convs_[s].backward(cache.up_sampled[s], d);
    d = upsample_nearest_backward(d, 2);
  }
  if (d_fm && hook_block == blocks) {
    if (!d_fm->same_shape(d)) throw std::invalid_argument("generator backward: d_fm shape");
    for (std::size_t i = 0; i < d.v.size(); ++i) d.v[i] += d_fm->v[i];
  }
  for (int j = blocks - 1; j >= 0; --j) {
    Tensor d_branch = block_convs_[2 * j + 1].backward(cache.a_act[j], d);
    d_branch = leaky_relu_backward(cache.a_out[j], d_branch, kLeakySlope);
    d_branch = block_convs_[2 * j].backward(cache.block_in[j], d_branch);
    for (std::size_t i = 0; i < d.v.size(); ++i) d.v[i] += d_branch.v[i];
    if (d_fm && hook_block == j) {
      for (std::size_t i = 0; i < d.v.size(); ++i) d.v[i] += d_fm->v[i];
    }
  }
  d = leaky_relu_backward(cache.head_out, d, kLeakySlope);
  head_.backward(cache.input, d, /*want_dx=*/false);
}

void GeneratorNetwork::zero_grad() {
  head_.zero_grad();
  for (auto& c : block_convs_) c.zero_grad();
  for (auto& c : up_convs_) c.zero_grad();
  to_rgb_.zero_grad();
}

std::vector<ParamRef> GeneratorNetwork::params() {
  std::vector<ParamRef> out;
  head_.collect_params("head", out);
  for (std::size_t j = 0; j < block_convs_.size() / 2; ++j) {
    block_convs_[2 * j].collect_params("block" + std::to_string(j) + ".conv0", out);
    block_convs_[2 * j + 1].collect_params("block" + std::to_string(j) + ".conv1", out);
  }
  for (std::size_t s = 0; s < up_convs_.size(); ++s) {
    up_convs_[s].collect_params("up" + std::to_string(s), out);
  }
  to_rgb_.collect_params("to_rgb", out);
  return out;
}

long long GeneratorNetwork::param_count() const {
  long long total = head_.param_count() + to_rgb_.param_count();
  for (const auto& c : block_convs_) total += c.param_count();
  for (const auto& c : up_convs_) total += c.param_count();
  return total;
}

std::vector<long long> GeneratorNetwork::conv_weight_counts() const {
  std::vector<long long> counts;
  counts.push_back(head_.weight_count());
  for (const auto& c : block_convs_) counts.push_back(c.weight_count());
  for (const auto& c : up_convs_) counts.push_back(c.weight_count());
  counts.push_back(to_rgb_.weight_count());
  return counts;
}

DiscriminatorNetwork::DiscriminatorNetwork(const ScaledArchitecture& arch, std::uint64_t seed,
                                           int input_size)
    : arch_(arch), seed_(seed), input_size_(input_size) {
  arch_.blueprint.validate_discriminator();
  if (input_size < (1 << arch_.blueprint.base_channel_widths.size())) {
    throw std::invalid_argument("discriminator: input size " + std::to_string(input_size) +
                                " too small for " +
                                std::to_string(arch_.blueprint.base_channel_widths.size()) +
                                " strided blocks");
  }
  const auto widths = arch_.scaled_widths();
  Rng rng(seed);
  int prev = arch_.blueprint.input_channels;
  for (int w : widths) {
    Conv2d c(prev, w, 3, 2, 1);
    c.init(rng);
    convs_.push_back(std::move(c));
    prev = w;
  }
  head_ = LinearHead(prev);
  head_.init(rng);
}

std::vector<double> DiscriminatorNetwork::forward(const Tensor& images) const {
  DiscCache cache;
  return forward_train(images, cache);
}

std::vector<double> DiscriminatorNetwork::forward_train(const Tensor& images,
                                                        DiscCache& cache) const {
  if (images.c != arch_.blueprint.input_channels || images.h != input_size_ ||
      images.w != input_size_) {
    throw std::invalid_argument("discriminator: input " + images.shape_str() +
                                " does not match expected (*, " +
                                std::to_string(arch_.blueprint.input_channels) + ", " +
                                std::to_string(input_size_) + ", " + std::to_string(input_size_) +
                                ")");
  }
  cache.input = images;
  cache.conv_in.clear();
  cache.conv_out.clear();
  Tensor x = images;
  for (const Conv2d& c : convs_) {
    cache.conv_in.push_back(x);
    Tensor out = c.forward(x);
    cache.conv_out.push_back(out);
    x = leaky_relu(out, kLeakySlope);
  }
  cache.last_act = x;
  cache.pooled = global_avg_pool(x);
  cache.logits = head_.forward(cache.pooled, x.n);
  cache.probs = sigmoid_clamped(cache.logits);
  return cache.probs;
}

Tensor DiscriminatorNetwork::backward(const DiscCache& cache, const std::vector<double>& d_prob,
                                      bool want_dx) {
  if (d_prob.size() != cache.probs.size()) {
    throw std::invalid_argument("discriminator backward: gradient length mismatch");
  }
  std::vector<double> dz(d_prob.size());
  for (std::size_t i = 0; i < d_prob.size(); ++i) {
    const double p = cache.probs[i];
    dz[i] = d_prob[i] * p * (1.0 - p);
  }
  std::vector<double> dpooled;
  head_.backward(cache.pooled, cache.last_act.n, dz, &dpooled);
  Tensor d = global_avg_pool_backward(cache.last_act.n, cache.last_act.c, cache.last_act.h,
                                      cache.last_act.w, dpooled);
  for (int i = static_cast<int>(convs_.size()) - 1; i >= 0; --i) {
    d = leaky_relu_backward(cache.conv_out[i], d, kLeakySlope);
    const bool need_dx = want_dx || i > 0;
    d = convs_[i].backward(cache.conv_in[i], d, need_dx);
  }
  return want_dx ? d : Tensor();
}

void DiscriminatorNetwork::zero_grad() {
  for (auto& c : convs_) c.zero_grad();
  head_.zero_grad();
}

std::vector<ParamRef> DiscriminatorNetwork::params() {
  std::vector<ParamRef> out;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    convs_[i].collect_params("conv" + std::to_string(i), out);
  }
  head_.collect_params("head", out);
  return out;
}

long long DiscriminatorNetwork::param_count() const {
  long long total = head_.param_count();
  for (const auto& c : convs_) total += c.param_count();
  return total;
}

std::vector<long long> DiscriminatorNetwork::conv_weight_counts() const {
  std::vector<long long> counts;
  for (const auto& c : convs_) counts.push_back(c.weight_count());
  return counts;
}

GeneratorNetwork build_generator(const ScaledArchitecture& arch, std::uint64_t seed) {
  return GeneratorNetwork(arch, seed);
}

DiscriminatorNetwork build_discriminator(const ScaledArchitecture& arch, std::uint64_t seed,
                                         int input_size) {
  return DiscriminatorNetwork(arch, seed, input_size);
}

Tensor generate(const GeneratorNetwork& g, const Tensor& lr_batch) { return g.forward(lr_batch); }

Tensor backbone_feature_map(const GeneratorNetwork& g, const Tensor& lr_batch) {
  return g.feature_map(lr_batch);
}

std::vector<double> discriminate(const DiscriminatorNetwork& d, const Tensor& images) {
  return d.forward(images);
}

std::uint64_t param_hash(std::vector<ParamRef> params) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t bytes) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  for (const ParamRef& ref : params) {
    mix(ref.name.data(), ref.name.size());
    mix(ref.value->data(), ref.value->size() * sizeof(double));
  }
  return h;
}

}  // namespace sdakd
