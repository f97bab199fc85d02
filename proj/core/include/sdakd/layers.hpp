#pragma once

#include <string>
#include <vector>

#include "sdakd/rng.hpp"
#include "sdakd/tensor.hpp"

namespace sdakd {

// Named view of one parameter block and its gradient accumulator.
struct ParamRef {
  std::string name;
  std::vector<double>* value = nullptr;
  std::vector<double>* grad = nullptr;
};

// 2-D convolution over NCHW tensors, square kernel, im2col + GEMM inside.
// Weight layout: [out_ch][in_ch * k * k], matching the im2col row order.
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(int in_ch, int out_ch, int ksize, int stride, int pad);

  // Kaiming fan-in init for weights, zero biases.
  void init(Rng& rng);

  Tensor forward(const Tensor& x) const;

  // Accumulates gw/gb from dy; returns dL/dx when want_dx.
  Tensor backward(const Tensor& x, const Tensor& dy, bool want_dx = true);

  // Input gradient only, parameters untouched (frozen networks).
  Tensor backward_input(const Tensor& x, const Tensor& dy) const;

  void zero_grad();
  void collect_params(const std::string& prefix, std::vector<ParamRef>& out);

  int out_size(int in) const { return (in + 2 * pad - k) / stride + 1; }
  long long weight_count() const { return static_cast<long long>(oc) * ic * k * k; }
  long long param_count() const { return weight_count() + oc; }

  int ic = 0, oc = 0, k = 0, stride = 1, pad = 0;
  std::vector<double> w, b, gw, gb;
};

// Scalar head: per-image linear map from a pooled feature vector to one logit.
class LinearHead {
 public:
  LinearHead() = default;
  explicit LinearHead(int in_features);

  void init(Rng& rng);
  // feat is n x in_features row-major, returns n logits.
  std::vector<double> forward(const std::vector<double>& feat, int n) const;
  void backward(const std::vector<double>& feat, int n, const std::vector<double>& dlogit,
                std::vector<double>* dfeat);
  void zero_grad();
  void collect_params(const std::string& prefix, std::vector<ParamRef>& out);
  long long param_count() const { return static_cast<long long>(in_features) + 1; }

  int in_features = 0;
  std::vector<double> w, b, gw, gb;  // b and gb have one element
};

Tensor leaky_relu(const Tensor& x, double slope = 0.2);
Tensor leaky_relu_backward(const Tensor& x, const Tensor& dy, double slope = 0.2);

Tensor tanh_forward(const Tensor& x);
// dy scaled by tanh' computed from the forward output y.
Tensor tanh_backward(const Tensor& y, const Tensor& dy);

Tensor upsample_nearest(const Tensor& x, int s);
Tensor upsample_nearest_backward(const Tensor& dy, int s);

// (N,C,H,W) -> N*C row-major means.
std::vector<double> global_avg_pool(const Tensor& x);
Tensor global_avg_pool_backward(int n, int c, int h, int w, const std::vector<double>& dpooled);

}  // namespace sdakd
