#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace sdakd {

// Dense NCHW tensor of doubles.
struct Tensor {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_)
      : n(n_), c(c_), h(h_), w(w_),
        v(static_cast<std::size_t>(n_) * c_ * h_ * w_, 0.0) {}

  std::size_t size() const { return v.size(); }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  std::size_t image_size() const { return static_cast<std::size_t>(c) * h * w; }

  double& at(int ni, int ci, int y, int x) {
    return v[((static_cast<std::size_t>(ni) * c + ci) * h + y) * w + x];
  }
  double at(int ni, int ci, int y, int x) const {
    return v[((static_cast<std::size_t>(ni) * c + ci) * h + y) * w + x];
  }

  double* image(int ni) { return v.data() + static_cast<std::size_t>(ni) * image_size(); }
  const double* image(int ni) const {
    return v.data() + static_cast<std::size_t>(ni) * image_size();
  }

  bool same_shape(const Tensor& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }

  std::string shape_str() const;

  bool all_finite() const;
  double mean() const;

  // Stack single-image tensors (n=1 each) into one batch.
  static Tensor stack(const std::vector<const Tensor*>& images);

  // Copy of images [from, from+count) along the batch dimension.
  Tensor slice(int from, int count) const;
};

}  // namespace sdakd
