#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdakd/fraction.hpp"
#include "sdakd/layers.hpp"
#include "sdakd/tensor.hpp"

namespace sdakd {

// Probabilities from discriminators are clamped into [kProbEps, 1 - kProbEps]
// so the log losses stay finite.
inline constexpr double kProbEps = 1e-7;

// Teacher-side architecture description. base_channel_widths holds the output
// width of every convolutional layer except the final to-RGB conv (whose output
// width is input_channels).
//
// Generator layer order: head conv, then 2 convs per residual block, then one
// conv per nearest-neighbor 2x upsample stage. Discriminators reuse the struct
// with one width per strided conv (num_residual_blocks = 0).
struct ArchitectureBlueprint {
  std::vector<int> base_channel_widths;
  int num_residual_blocks = 4;
  int upscale_factor = 4;
  int input_channels = 3;

  int upsample_stages() const;
  void validate_generator() const;
  void validate_discriminator() const;

  static ArchitectureBlueprint default_generator(int base_width = 64, int blocks = 4,
                                                 int upscale = 4);
  static ArchitectureBlueprint default_discriminator(int upscale = 4);

  bool operator==(const ArchitectureBlueprint&) const = default;
};

// Blueprint plus channel fraction; one blueprint yields the teacher (C = 1)
// and every student (C < 1).
struct ScaledArchitecture {
  ArchitectureBlueprint blueprint;
  Fraction channel_fraction;

  std::vector<int> scaled_widths() const;
};

// Per-layer activation caches for one training forward pass.
struct GenCache {
  Tensor input;
  Tensor head_out, head_act;
  std::vector<Tensor> block_in, a_out, a_act, b_out;
  Tensor fm;  // backbone output at the hook
  std::vector<Tensor> up_in, up_sampled, up_out, up_act;
  Tensor rgb_in, rgb_out, sr;
};

class GeneratorNetwork {
 public:
  GeneratorNetwork(const ScaledArchitecture& arch, std::uint64_t seed);

  // Inference forward; output in [-1, 1], spatial dims scaled by upscale_factor.
  Tensor forward(const Tensor& lr_batch) const;
  // Forward with caches retained for backward.
  Tensor forward_train(const Tensor& lr_batch, GenCache& cache) const;
  // Accumulates parameter gradients from the output gradient and an optional
  // gradient injected at the feature-map hook.
  void backward(const GenCache& cache, const Tensor& d_sr, const Tensor* d_fm = nullptr);

  // Activation at the feature-map hook (backbone output).
  Tensor feature_map(const Tensor& lr_batch) const;

  void zero_grad();
  std::vector<ParamRef> params();
  long long param_count() const;
  // Weight-only element counts per conv layer, in blueprint order
  // (head, block convs..., upsample convs..., to-RGB).
  std::vector<long long> conv_weight_counts() const;

  const ScaledArchitecture& arch() const { return arch_; }
  std::uint64_t seed() const { return seed_; }
  int fm_hook_layer() const { return fm_hook_layer_; }
  // Hook must be the head conv (0) or the closing conv of a residual block.
  void set_fm_hook_layer(int layer_index);
  int fm_channels() const;
  int upscale_factor() const { return arch_.blueprint.upscale_factor; }

 private:
  Tensor run(const Tensor& lr_batch, GenCache* cache) const;

  ScaledArchitecture arch_;
  std::uint64_t seed_ = 0;
  int fm_hook_layer_ = 0;
  Conv2d head_;
  std::vector<Conv2d> block_convs_;  // 2 per block: a, b
  std::vector<Conv2d> up_convs_;
  Conv2d to_rgb_;
};

struct DiscCache {
  Tensor input;
  std::vector<Tensor> conv_in, conv_out;  // conv_out is pre-activation
  Tensor last_act;
  std::vector<double> pooled;
  std::vector<double> logits;
  std::vector<double> probs;  // clamped
};

class DiscriminatorNetwork {
 public:
  DiscriminatorNetwork(const ScaledArchitecture& arch, std::uint64_t seed, int input_size);

  // Realness probability per image, clamped into [kProbEps, 1 - kProbEps].
  std::vector<double> forward(const Tensor& images) const;
  std::vector<double> forward_train(const Tensor& images, DiscCache& cache) const;
  // d_prob is dL/dP per image. Accumulates parameter gradients; returns dL/dx
  // when want_dx (used by generator adversarial steps).
  Tensor backward(const DiscCache& cache, const std::vector<double>& d_prob,
                  bool want_dx = false);

  void zero_grad();
  std::vector<ParamRef> params();
  long long param_count() const;
  std::vector<long long> conv_weight_counts() const;

  const ScaledArchitecture& arch() const { return arch_; }
  std::uint64_t seed() const { return seed_; }
  int input_size() const { return input_size_; }
  LinearHead& head() { return head_; }

 private:
  ScaledArchitecture arch_;
  std::uint64_t seed_ = 0;
  int input_size_ = 0;
  std::vector<Conv2d> convs_;
  LinearHead head_;
};

GeneratorNetwork build_generator(const ScaledArchitecture& arch, std::uint64_t seed);
DiscriminatorNetwork build_discriminator(const ScaledArchitecture& arch, std::uint64_t seed,
                                         int input_size);
Tensor generate(const GeneratorNetwork& g, const Tensor& lr_batch);
Tensor backbone_feature_map(const GeneratorNetwork& g, const Tensor& lr_batch);
std::vector<double> discriminate(const DiscriminatorNetwork& d, const Tensor& images);

// FNV-1a over all parameter bytes in declaration order; used to assert that
// frozen networks stay untouched.
std::uint64_t param_hash(std::vector<ParamRef> params);

}  // namespace sdakd
