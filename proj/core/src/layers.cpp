#include "sdakd/layers.hpp"

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>

namespace sdakd {

namespace {

using MatMap = Eigen::Map<Eigen::MatrixXd>;
using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;

// Column j = output position (oy, ox), row = (c, ky, kx); one image at a time.
void im2col(const double* img, int c, int h, int w, int k, int stride, int pad, int oh, int ow,
            double* col) {
  const int rows = c * k * k;
  for (int ci = 0; ci < c; ++ci) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const int r = (ci * k + ky) * k + kx;
        double* dst = col + static_cast<std::size_t>(r) * oh * ow;
        const double* src = img + static_cast<std::size_t>(ci) * h * w;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= h) {
            for (int ox = 0; ox < ow; ++ox) dst[oy * ow + ox] = 0.0;
            continue;
          }
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride + kx - pad;
            dst[oy * ow + ox] = (ix < 0 || ix >= w) ? 0.0 : src[iy * w + ix];
          }
        }
        (void)rows;
      }
    }
  }
}

void col2im_add(const double* col, int c, int h, int w, int k, int stride, int pad, int oh, int ow,
                double* img) {
  for (int ci = 0; ci < c; ++ci) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const int r = (ci * k + ky) * k + kx;
        const double* src = col + static_cast<std::size_t>(r) * oh * ow;
        double* dst = img + static_cast<std::size_t>(ci) * h * w;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= h) continue;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride + kx - pad;
            if (ix < 0 || ix >= w) continue;
            dst[iy * w + ix] += src[oy * ow + ox];
          }
        }
      }
    }
  }
}

}  // namespace

Conv2d::Conv2d(int in_ch, int out_ch, int ksize, int stride_, int pad_)
    : ic(in_ch), oc(out_ch), k(ksize), stride(stride_), pad(pad_) {
  if (ic < 1 || oc < 1 || k < 1 || stride < 1 || pad < 0) {
    throw std::invalid_argument("Conv2d: bad geometry");
  }
  w.assign(static_cast<std::size_t>(oc) * ic * k * k, 0.0);
  b.assign(oc, 0.0);
  gw.assign(w.size(), 0.0);
  gb.assign(b.size(), 0.0);
}

void Conv2d::init(Rng& rng) {
  const double stddev = std::sqrt(2.0 / (static_cast<double>(ic) * k * k));
  for (double& x : w) x = rng.normal(0.0, stddev);
  for (double& x : b) x = 0.0;
}

Tensor Conv2d::forward(const Tensor& x) const {
  if (x.c != ic) {
    throw std::invalid_argument("Conv2d: input has " + std::to_string(x.c) +
                                " channels, expected " + std::to_string(ic));
  }
  const int oh = out_size(x.h), ow = out_size(x.w);
  if (oh < 1 || ow < 1) throw std::invalid_argument("Conv2d: input too small");
  Tensor y(x.n, oc, oh, ow);
  const int cols = oh * ow, rows = ic * k * k;
  std::vector<double> col(static_cast<std::size_t>(rows) * cols);
  ConstMatMap W(w.data(), rows, oc);  // column-major view of [oc][rows] row-major = W^T
  for (int ni = 0; ni < x.n; ++ni) {
    im2col(x.image(ni), ic, x.h, x.w, k, stride, pad, oh, ow, col.data());
    ConstMatMap C(col.data(), cols, rows);  // transposed view of col (rows x cols row-major)
    MatMap Y(y.image(ni), cols, oc);
    Y.noalias() = C * W;
    for (int o = 0; o < oc; ++o) Y.col(o).array() += b[o];
  }
  return y;
}

Tensor Conv2d::backward(const Tensor& x, const Tensor& dy, bool want_dx) {
  const int oh = out_size(x.h), ow = out_size(x.w);
  if (dy.n != x.n || dy.c != oc || dy.h != oh || dy.w != ow) {
    throw std::invalid_argument("Conv2d::backward: dy shape " + dy.shape_str() + " mismatch");
  }
  const int cols = oh * ow, rows = ic * k * k;
  std::vector<double> col(static_cast<std::size_t>(rows) * cols);
  std::vector<double> dcol(static_cast<std::size_t>(rows) * cols);
  Tensor dx;
  if (want_dx) dx = Tensor(x.n, ic, x.h, x.w);
  MatMap GW(gw.data(), rows, oc);
  ConstMatMap W(w.data(), rows, oc);
  for (int ni = 0; ni < x.n; ++ni) {
    im2col(x.image(ni), ic, x.h, x.w, k, stride, pad, oh, ow, col.data());
    ConstMatMap C(col.data(), cols, rows);
    ConstMatMap DY(dy.image(ni), cols, oc);
    GW.noalias() += C.transpose() * DY;
    for (int o = 0; o < oc; ++o) gb[o] += DY.col(o).sum();
    if (want_dx) {
      MatMap DC(dcol.data(), cols, rows);
      DC.noalias() = DY * W.transpose();
      col2im_add(dcol.data(), ic, x.h, x.w, k, stride, pad, oh, ow, dx.image(ni));
    }
  }
  return dx;
}

Tensor Conv2d::backward_input(const Tensor& x, const Tensor& dy) const {
  const int oh = out_size(x.h), ow = out_size(x.w);
  if (dy.n != x.n || dy.c != oc || dy.h != oh || dy.w != ow) {
    throw std::invalid_argument("Conv2d::backward_input: dy shape mismatch");
  }
  const int cols = oh * ow, rows = ic * k * k;
  std::vector<double> dcol(static_cast<std::size_t>(rows) * cols);
  Tensor dx(x.n, ic, x.h, x.w);
  ConstMatMap W(w.data(), rows, oc);
  for (int ni = 0; ni < x.n; ++ni) {
    ConstMatMap DY(dy.image(ni), cols, oc);
    MatMap DC(dcol.data(), cols, rows);
    DC.noalias() = DY * W.transpose();
    col2im_add(dcol.data(), ic, x.h, x.w, k, stride, pad, oh, ow, dx.image(ni));
  }
  return dx;
}

void Conv2d::zero_grad() {
  std::fill(gw.begin(), gw.end(), 0.0);
  std::fill(gb.begin(), gb.end(), 0.0);
}

void Conv2d::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".w", &w, &gw});
  out.push_back({prefix + ".b", &b, &gb});
}

LinearHead::LinearHead(int in) : in_features(in) {
  w.assign(in, 0.0);
  b.assign(1, 0.0);
  gw.assign(in, 0.0);
  gb.assign(1, 0.0);
}

void LinearHead::init(Rng& rng) {
  const double stddev = std::sqrt(1.0 / static_cast<double>(in_features));
  for (double& x : w) x = rng.normal(0.0, stddev);
  b[0] = 0.0;
}

std::vector<double> LinearHead::forward(const std::vector<double>& feat, int n) const {
  std::vector<double> z(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = b[0];
    const double* f = feat.data() + static_cast<std::size_t>(i) * in_features;
    for (int j = 0; j < in_features; ++j) s += w[j] * f[j];
    z[i] = s;
  }
  return z;
}

void LinearHead::backward(const std::vector<double>& feat, int n,
                          const std::vector<double>& dlogit, std::vector<double>* dfeat) {
  if (dfeat) dfeat->assign(static_cast<std::size_t>(n) * in_features, 0.0);
  for (int i = 0; i < n; ++i) {
    const double* f = feat.data() + static_cast<std::size_t>(i) * in_features;
    const double g = dlogit[i];
    gb[0] += g;
    for (int j = 0; j < in_features; ++j) gw[j] += g * f[j];
    if (dfeat) {
      double* df = dfeat->data() + static_cast<std::size_t>(i) * in_features;
      for (int j = 0; j < in_features; ++j) df[j] += g * w[j];
    }
  }
}

void LinearHead::zero_grad() {
  std::fill(gw.begin(), gw.end(), 0.0);
  gb[0] = 0.0;
}

void LinearHead::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".w", &w, &gw});
  out.push_back({prefix + ".b", &b, &gb});
}

Tensor leaky_relu(const Tensor& x, double slope) {
  Tensor y = x;
  for (double& t : y.v) t = t > 0.0 ? t : slope * t;
  return y;
}

Tensor leaky_relu_backward(const Tensor& x, const Tensor& dy, double slope) {
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.v.size(); ++i) {
    if (x.v[i] <= 0.0) dx.v[i] *= slope;
  }
  return dx;
}

Tensor tanh_forward(const Tensor& x) {
  Tensor y = x;
  for (double& t : y.v) t = std::tanh(t);
  return y;
}

Tensor tanh_backward(const Tensor& y, const Tensor& dy) {
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.v.size(); ++i) dx.v[i] *= 1.0 - y.v[i] * y.v[i];
  return dx;
}

Tensor upsample_nearest(const Tensor& x, int s) {
  Tensor y(x.n, x.c, x.h * s, x.w * s);
  for (int ni = 0; ni < x.n; ++ni) {
    for (int ci = 0; ci < x.c; ++ci) {
      for (int yy = 0; yy < y.h; ++yy) {
        for (int xx = 0; xx < y.w; ++xx) {
          y.at(ni, ci, yy, xx) = x.at(ni, ci, yy / s, xx / s);
        }
      }
    }
  }
  return y;
}

Tensor upsample_nearest_backward(const Tensor& dy, int s) {
  Tensor dx(dy.n, dy.c, dy.h / s, dy.w / s);
  for (int ni = 0; ni < dy.n; ++ni) {
    for (int ci = 0; ci < dy.c; ++ci) {
      for (int yy = 0; yy < dy.h; ++yy) {
        for (int xx = 0; xx < dy.w; ++xx) {
          dx.at(ni, ci, yy / s, xx / s) += dy.at(ni, ci, yy, xx);
        }
      }
    }
  }
  return dx;
}

std::vector<double> global_avg_pool(const Tensor& x) {
  std::vector<double> out(static_cast<std::size_t>(x.n) * x.c, 0.0);
  const double inv = 1.0 / static_cast<double>(x.h * x.w);
  for (int ni = 0; ni < x.n; ++ni) {
    for (int ci = 0; ci < x.c; ++ci) {
      const double* p = &x.v[(static_cast<std::size_t>(ni) * x.c + ci) * x.plane()];
      double s = 0.0;
      for (std::size_t i = 0; i < x.plane(); ++i) s += p[i];
      out[static_cast<std::size_t>(ni) * x.c + ci] = s * inv;
    }
  }
  return out;
}

Tensor global_avg_pool_backward(int n, int c, int h, int w, const std::vector<double>& dpooled) {
  Tensor dx(n, c, h, w);
  const double inv = 1.0 / static_cast<double>(h * w);
  for (int ni = 0; ni < n; ++ni) {
    for (int ci = 0; ci < c; ++ci) {
      const double g = dpooled[static_cast<std::size_t>(ni) * c + ci] * inv;
      double* p = &dx.v[(static_cast<std::size_t>(ni) * c + ci) * dx.plane()];
      for (std::size_t i = 0; i < dx.plane(); ++i) p[i] = g;
    }
  }
  return dx;
}

}  // namespace sdakd
