#include "fractoseg/layers.hpp"

#include <cmath>

namespace fractoseg {

// --- Conv2d ---------------------------------------------------------------------

Conv2d::Conv2d(int in_ch, int out_ch, int kernel, int stride, int pad, int dilation, bool bias,
               std::string name)
    : in_ch_(in_ch), out_ch_(out_ch), k_(kernel), stride_(stride), pad_(pad), dil_(dilation),
      has_bias_(bias) {
  weight.name = name + ".weight";
  weight.value = Eigen::MatrixXf::Zero(Eigen::Index(in_ch) * kernel * kernel, out_ch);
  if (has_bias_) {
    bias_p.name = name + ".bias";
    bias_p.value = Eigen::MatrixXf::Zero(1, out_ch);
  }
}

void Conv2d::init(Rng& rng) {
  const double stddev = std::sqrt(2.0 / double(weight.value.rows()));
  for (Eigen::Index j = 0; j < weight.value.cols(); ++j)
    for (Eigen::Index i = 0; i < weight.value.rows(); ++i)
      weight.value(i, j) = float(stddev * rng.normal());
  if (has_bias_) bias_p.value.setZero();
}

void Conv2d::collect_params(std::vector<Param*>& out) {
  out.push_back(&weight);
  if (has_bias_) out.push_back(&bias_p);
}

TensorF Conv2d::forward(const TensorF& x, bool training) {
  require(x.c == in_ch_, ErrorCode::ShapeMismatch,
          weight.name + ": expected " + std::to_string(in_ch_) + " channels, got " +
              std::to_string(x.c));
  const int oh = out_extent(x.h, k_, stride_, pad_, dil_);
  const int ow = out_extent(x.w, k_, stride_, pad_, dil_);
  require(oh > 0 && ow > 0, ErrorCode::ShapeMismatch, weight.name + ": input too small");

  TensorF out(x.n, out_ch_, oh, ow);
  const Eigen::Index K = Eigen::Index(in_ch_) * k_ * k_;
  Eigen::MatrixXf col(Eigen::Index(oh) * ow, K);
  if (training) {
    input_ = x;
    cols_.assign(std::size_t(x.n), Eigen::MatrixXf());
  }

  for (int ni = 0; ni < x.n; ++ni) {
    auto xb = x.sample(ni);
    col.setZero();
    for (int ci = 0; ci < in_ch_; ++ci) {
      for (int ky = 0; ky < k_; ++ky) {
        for (int kx = 0; kx < k_; ++kx) {
          const Eigen::Index kcol = (Eigen::Index(ci) * k_ + ky) * k_ + kx;
          for (int oy = 0; oy < oh; ++oy) {
            const int sy = oy * stride_ - pad_ + ky * dil_;
            if (sy < 0 || sy >= x.h) continue;
            const Eigen::Index src_row = Eigen::Index(sy) * x.w;
            const Eigen::Index dst_row = Eigen::Index(oy) * ow;
            for (int ox = 0; ox < ow; ++ox) {
              const int sx = ox * stride_ - pad_ + kx * dil_;
              if (sx < 0 || sx >= x.w) continue;
              col(dst_row + ox, kcol) = xb(src_row + sx, ci);
            }
          }
        }
      }
    }
    out.sample(ni).noalias() = col * weight.value;
    if (has_bias_) out.sample(ni).rowwise() += bias_p.value.row(0);
    if (training) cols_[std::size_t(ni)] = col;
  }
  return out;
}

TensorF Conv2d::backward(const TensorF& grad_out) {
  const TensorF& x = input_;
  require(x.n == grad_out.n, ErrorCode::ShapeMismatch, "conv backward without forward");
  TensorF grad_in(x.n, x.c, x.h, x.w);
  const int oh = grad_out.h, ow = grad_out.w;

  for (int ni = 0; ni < x.n; ++ni) {
    const Eigen::MatrixXf& col = cols_[std::size_t(ni)];
    auto gb = grad_out.sample(ni);
    weight.grad.noalias() += col.transpose() * gb;
    if (has_bias_) bias_p.grad.row(0) += gb.colwise().sum();

    Eigen::MatrixXf gcol = gb * weight.value.transpose();  // (ohw x K)
    auto gi = grad_in.sample(ni);
    for (int ci = 0; ci < in_ch_; ++ci) {
      for (int ky = 0; ky < k_; ++ky) {
        for (int kx = 0; kx < k_; ++kx) {
          const Eigen::Index kcol = (Eigen::Index(ci) * k_ + ky) * k_ + kx;
          for (int oy = 0; oy < oh; ++oy) {
            const int sy = oy * stride_ - pad_ + ky * dil_;
            if (sy < 0 || sy >= x.h) continue;
            const Eigen::Index src_row = Eigen::Index(sy) * x.w;
            const Eigen::Index dst_row = Eigen::Index(oy) * ow;
            for (int ox = 0; ox < ow; ++ox) {
              const int sx = ox * stride_ - pad_ + kx * dil_;
              if (sx < 0 || sx >= x.w) continue;
              gi(src_row + sx, ci) += gcol(dst_row + ox, kcol);
            }
          }
        }
      }
    }
  }
  return grad_in;
}

// --- BatchNorm2d ----------------------------------------------------------------

BatchNorm2d::BatchNorm2d(int channels, float momentum, float eps, std::string name)
    : channels_(channels), momentum_(momentum), eps_(eps) {
  gamma.name = name + ".gamma";
  gamma.value = Eigen::MatrixXf::Ones(1, channels);
  beta.name = name + ".beta";
  beta.value = Eigen::MatrixXf::Zero(1, channels);
  running_mean = Eigen::VectorXf::Zero(channels);
  running_var = Eigen::VectorXf::Ones(channels);
}

void BatchNorm2d::collect_params(std::vector<Param*>& out) {
  out.push_back(&gamma);
  out.push_back(&beta);
}

TensorF BatchNorm2d::forward(const TensorF& x, bool training) {
  require(x.c == channels_, ErrorCode::ShapeMismatch, gamma.name + ": channel mismatch");
  TensorF out(x.n, x.c, x.h, x.w);
  x_hat_ = TensorF(x.n, x.c, x.h, x.w);
  inv_std_.resize(channels_);
  const double m = double(x.n) * double(x.pixels());

  for (int ci = 0; ci < channels_; ++ci) {
    double mean, var;
    if (training) {
      double sum = 0, sq = 0;
      for (int ni = 0; ni < x.n; ++ni) {
        const auto col = x.m.col(Eigen::Index(ni) * x.c + ci);
        sum += col.template cast<double>().sum();
        sq += col.template cast<double>().squaredNorm();
      }
      mean = sum / m;
      var = std::max(0.0, sq / m - mean * mean);
      running_mean(ci) = (1 - momentum_) * running_mean(ci) + momentum_ * float(mean);
      const double unbiased = m > 1 ? var * m / (m - 1) : var;
      running_var(ci) = (1 - momentum_) * running_var(ci) + momentum_ * float(unbiased);
    } else {
      mean = running_mean(ci);
      var = running_var(ci);
    }
    const float istd = float(1.0 / std::sqrt(var + eps_));
    inv_std_(ci) = istd;
    for (int ni = 0; ni < x.n; ++ni) {
      const Eigen::Index c = Eigen::Index(ni) * x.c + ci;
      x_hat_.m.col(c) = (x.m.col(c).array() - float(mean)) * istd;
      out.m.col(c) = x_hat_.m.col(c) * gamma.value(0, ci) + Eigen::VectorXf::Constant(x.pixels(), beta.value(0, ci));
    }
  }
  training_stats_ = training;
  return out;
}

TensorF BatchNorm2d::backward(const TensorF& grad_out) {
  const TensorF& xh = x_hat_;
  require(grad_out.same_shape(xh), ErrorCode::ShapeMismatch, "bn backward shape mismatch");
  TensorF grad_in(grad_out.n, grad_out.c, grad_out.h, grad_out.w);
  const double m = double(grad_out.n) * double(grad_out.pixels());

  for (int ci = 0; ci < channels_; ++ci) {
    double dgamma = 0, dbeta = 0;
    for (int ni = 0; ni < grad_out.n; ++ni) {
      const Eigen::Index c = Eigen::Index(ni) * grad_out.c + ci;
      dgamma += (grad_out.m.col(c).array() * xh.m.col(c).array()).template cast<double>().sum();
      dbeta += grad_out.m.col(c).template cast<double>().sum();
    }
    gamma.grad(0, ci) += float(dgamma);
    beta.grad(0, ci) += float(dbeta);

    const float scale = gamma.value(0, ci) * inv_std_(ci);
    for (int ni = 0; ni < grad_out.n; ++ni) {
      const Eigen::Index c = Eigen::Index(ni) * grad_out.c + ci;
      if (training_stats_) {
        grad_in.m.col(c) = scale * (grad_out.m.col(c).array() - float(dbeta / m) -
                                    xh.m.col(c).array() * float(dgamma / m))
                                       .matrix();
      } else {
        grad_in.m.col(c) = scale * grad_out.m.col(c);
      }
    }
  }
  return grad_in;
}

// --- ReLU ------------------------------------------------------------------------

TensorF ReLU::forward(const TensorF& x, bool training) {
  TensorF out = x;
  out.m = out.m.cwiseMax(0.0f);
  if (training) {
    mask_ = x;
    mask_.m = (x.m.array() > 0.0f).cast<float>().matrix();
  }
  return out;
}

TensorF ReLU::backward(const TensorF& grad_out) {
  require(grad_out.same_shape(mask_), ErrorCode::ShapeMismatch, "relu backward shape mismatch");
  TensorF grad = grad_out;
  grad.m = grad.m.cwiseProduct(mask_.m);
  return grad;
}

// --- MaxPool2d ---------------------------------------------------------------------

MaxPool2d::MaxPool2d(int kernel, int stride, int pad) : k_(kernel), stride_(stride), pad_(pad) {}

TensorF MaxPool2d::forward(const TensorF& x, bool) {
  const int oh = Conv2d::out_extent(x.h, k_, stride_, pad_, 1);
  const int ow = Conv2d::out_extent(x.w, k_, stride_, pad_, 1);
  in_h_ = x.h;
  in_w_ = x.w;
  in_n_ = x.n;
  in_c_ = x.c;
  TensorF out(x.n, x.c, oh, ow);
  argmax_.resize(Eigen::Index(oh) * ow, x.m.cols());

  for (Eigen::Index col = 0; col < x.m.cols(); ++col) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        float best = -std::numeric_limits<float>::infinity();
        Eigen::Index best_row = -1;
        for (int ky = 0; ky < k_; ++ky) {
          const int sy = oy * stride_ - pad_ + ky;
          if (sy < 0 || sy >= x.h) continue;
          for (int kx = 0; kx < k_; ++kx) {
            const int sx = ox * stride_ - pad_ + kx;
            if (sx < 0 || sx >= x.w) continue;
            const Eigen::Index row = Eigen::Index(sy) * x.w + sx;
            const float v = x.m(row, col);
            if (v > best) {
              best = v;
              best_row = row;
            }
          }
        }
        out.m(Eigen::Index(oy) * ow + ox, col) = best;
        argmax_(Eigen::Index(oy) * ow + ox, col) = best_row;
      }
    }
  }
  return out;
}

TensorF MaxPool2d::backward(const TensorF& grad_out) {
  TensorF grad_in(in_n_, in_c_, in_h_, in_w_);
  for (Eigen::Index col = 0; col < grad_out.m.cols(); ++col)
    for (Eigen::Index row = 0; row < grad_out.m.rows(); ++row)
      grad_in.m(argmax_(row, col), col) += grad_out.m(row, col);
  return grad_in;
}

// --- UpsampleNearest2x --------------------------------------------------------------

TensorF UpsampleNearest2x::forward(const TensorF& x, bool) {
  in_h_ = x.h;
  in_w_ = x.w;
  TensorF out(x.n, x.c, x.h * 2, x.w * 2);
  for (int y = 0; y < out.h; ++y) {
    const Eigen::Index src = Eigen::Index(y / 2) * x.w;
    const Eigen::Index dst = Eigen::Index(y) * out.w;
    for (int x2 = 0; x2 < out.w; ++x2) out.m.row(dst + x2) = x.m.row(src + x2 / 2);
  }
  return out;
}

TensorF UpsampleNearest2x::backward(const TensorF& grad_out) {
  TensorF grad_in(grad_out.n, grad_out.c, in_h_, in_w_);
  for (int y = 0; y < grad_out.h; ++y) {
    const Eigen::Index src = Eigen::Index(y / 2) * in_w_;
    const Eigen::Index dst = Eigen::Index(y) * grad_out.w;
    for (int x2 = 0; x2 < grad_out.w; ++x2) grad_in.m.row(src + x2 / 2) += grad_out.m.row(dst + x2);
  }
  return grad_in;
}

// --- BilinearResize -------------------------------------------------------------------

BilinearResize::BilinearResize(int out_h, int out_w) : out_h_(out_h), out_w_(out_w) {}

namespace {

struct Lerp {
  Eigen::Index i0, i1;
  float w0, w1;
};

std::vector<Lerp> lerp_table(int in, int out) {
  std::vector<Lerp> t(static_cast<std::size_t>(out));
  const double scale = double(in) / double(out);
  for (int o = 0; o < out; ++o) {
    double f = (double(o) + 0.5) * scale - 0.5;
    f = std::min(std::max(f, 0.0), double(in - 1));
    const Eigen::Index i0 = Eigen::Index(std::floor(f));
    const Eigen::Index i1 = std::min<Eigen::Index>(i0 + 1, in - 1);
    const float w1 = float(f - double(i0));
    t[std::size_t(o)] = {i0, i1, 1.0f - w1, w1};
  }
  return t;
}

}  // namespace

TensorF BilinearResize::forward(const TensorF& x, bool) {
  in_h_ = x.h;
  in_w_ = x.w;
  TensorF out(x.n, x.c, out_h_, out_w_);
  const auto ty = lerp_table(x.h, out_h_);
  const auto tx = lerp_table(x.w, out_w_);
  for (int oy = 0; oy < out_h_; ++oy) {
    const Lerp& ly = ty[std::size_t(oy)];
    for (int ox = 0; ox < out_w_; ++ox) {
      const Lerp& lx = tx[std::size_t(ox)];
      out.m.row(Eigen::Index(oy) * out_w_ + ox) =
          ly.w0 * lx.w0 * x.m.row(ly.i0 * x.w + lx.i0) +
          ly.w0 * lx.w1 * x.m.row(ly.i0 * x.w + lx.i1) +
          ly.w1 * lx.w0 * x.m.row(ly.i1 * x.w + lx.i0) +
          ly.w1 * lx.w1 * x.m.row(ly.i1 * x.w + lx.i1);
    }
  }
  return out;
}

TensorF BilinearResize::backward(const TensorF& grad_out) {
  TensorF grad_in(grad_out.n, grad_out.c, in_h_, in_w_);
  const auto ty = lerp_table(in_h_, out_h_);
  const auto tx = lerp_table(in_w_, out_w_);
  for (int oy = 0; oy < out_h_; ++oy) {
    const Lerp& ly = ty[std::size_t(oy)];
    for (int ox = 0; ox < out_w_; ++ox) {
      const Lerp& lx = tx[std::size_t(ox)];
      const auto g = grad_out.m.row(Eigen::Index(oy) * out_w_ + ox);
      grad_in.m.row(ly.i0 * in_w_ + lx.i0) += ly.w0 * lx.w0 * g;
      grad_in.m.row(ly.i0 * in_w_ + lx.i1) += ly.w0 * lx.w1 * g;
      grad_in.m.row(ly.i1 * in_w_ + lx.i0) += ly.w1 * lx.w0 * g;
      grad_in.m.row(ly.i1 * in_w_ + lx.i1) += ly.w1 * lx.w1 * g;
    }
  }
  return grad_in;
}

// --- GlobalAvgPool -----------------------------------------------------------------------

TensorF GlobalAvgPool::forward(const TensorF& x, bool) {
  in_h_ = x.h;
  in_w_ = x.w;
  TensorF out(x.n, x.c, 1, 1);
  out.m = x.m.colwise().mean();
  return out;
}

TensorF GlobalAvgPool::backward(const TensorF& grad_out) {
  TensorF grad_in(grad_out.n, grad_out.c, in_h_, in_w_);
  const float inv = 1.0f / float(Eigen::Index(in_h_) * in_w_);
  for (Eigen::Index col = 0; col < grad_out.m.cols(); ++col)
    grad_in.m.col(col).setConstant(grad_out.m(0, col) * inv);
  return grad_in;
}

// --- Sequential ---------------------------------------------------------------------------

TensorF Sequential::forward(const TensorF& x, bool training) {
  TensorF cur = x;
  for (auto& mod : modules_) cur = mod->forward(cur, training);
  return cur;
}

TensorF Sequential::backward(const TensorF& grad_out) {
  TensorF cur = grad_out;
  for (auto it = modules_.rbegin(); it != modules_.rend(); ++it) cur = (*it)->backward(cur);
  return cur;
}

void Sequential::collect_params(std::vector<Param*>& out) {
  for (auto& mod : modules_) mod->collect_params(out);
}

// --- helpers ---------------------------------------------------------------------------------

TensorF concat_channels(const TensorF& a, const TensorF& b) {
  require(a.n == b.n && a.h == b.h && a.w == b.w, ErrorCode::ShapeMismatch,
          "concat spatial/batch mismatch");
  TensorF out(a.n, a.c + b.c, a.h, a.w);
  for (int ni = 0; ni < a.n; ++ni) {
    out.m.middleCols(Eigen::Index(ni) * out.c, a.c) = a.sample(ni);
    out.m.middleCols(Eigen::Index(ni) * out.c + a.c, b.c) = b.sample(ni);
  }
  return out;
}

void split_channels(const TensorF& grad, int c_a, TensorF& grad_a, TensorF& grad_b) {
  grad_a = TensorF(grad.n, c_a, grad.h, grad.w);
  grad_b = TensorF(grad.n, grad.c - c_a, grad.h, grad.w);
  for (int ni = 0; ni < grad.n; ++ni) {
    grad_a.sample(ni) = grad.m.middleCols(Eigen::Index(ni) * grad.c, c_a);
    grad_b.sample(ni) = grad.m.middleCols(Eigen::Index(ni) * grad.c + c_a, grad.c - c_a);
  }
}

TensorF add(const TensorF& a, const TensorF& b) {
  require(a.same_shape(b), ErrorCode::ShapeMismatch, "add shape mismatch");
  TensorF out = a;
  out.m += b.m;
  return out;
}

std::unique_ptr<Sequential> conv_bn_relu(int in_ch, int out_ch, int kernel, int stride, int pad,
                                         int dilation, Rng& rng, const std::string& name) {
  auto seq = std::make_unique<Sequential>();
  auto conv = std::make_unique<Conv2d>(in_ch, out_ch, kernel, stride, pad, dilation, false, name);
  conv->init(rng);
  seq->add(std::move(conv));
  seq->add(std::make_unique<BatchNorm2d>(out_ch, 0.1f, 1e-5f, name));
  seq->add(std::make_unique<ReLU>());
  return seq;
}

}  // namespace fractoseg
