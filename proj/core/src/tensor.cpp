#include "sdakd/tensor.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace sdakd {

std::string Tensor::shape_str() const {
  return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
         std::to_string(w) + ")";
}

bool Tensor::all_finite() const {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

double Tensor::mean() const {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

Tensor Tensor::stack(const std::vector<const Tensor*>& images) {
  if (images.empty()) throw std::invalid_argument("stack: empty image list");
  const Tensor& first = *images.front();
  Tensor out(static_cast<int>(images.size()), first.c, first.h, first.w);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Tensor& img = *images[i];
    if (img.n != 1 || img.c != first.c || img.h != first.h || img.w != first.w) {
      throw std::invalid_argument("stack: image " + std::to_string(i) + " has shape " +
                                  img.shape_str() + ", expected (1," + std::to_string(first.c) +
                                  "," + std::to_string(first.h) + "," + std::to_string(first.w) +
                                  ")");
    }
    std::memcpy(out.image(static_cast<int>(i)), img.v.data(), img.size() * sizeof(double));
  }
  return out;
}

Tensor Tensor::slice(int from, int count) const {
  if (from < 0 || count < 0 || from + count > n) {
    throw std::out_of_range("slice: range [" + std::to_string(from) + "," +
                            std::to_string(from + count) + ") out of batch of " +
                            std::to_string(n));
  }
  Tensor out(count, c, h, w);
  std::memcpy(out.v.data(), image(from), out.size() * sizeof(double));
  return out;
}

}  // namespace sdakd
