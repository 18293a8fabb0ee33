#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fractoseg/rng.hpp"
#include "fractoseg/tensor.hpp"

namespace fractoseg {

struct Param {
  std::string name;
  Eigen::MatrixXf value;
  Eigen::MatrixXf grad;

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

/// Layers own their parameters and remember whatever the backward pass needs.
/// backward() consumes the gradient w.r.t. the layer output and returns the
/// gradient w.r.t. the input, accumulating parameter gradients along the way.
class Module {
 public:
  virtual ~Module() = default;
  virtual TensorF forward(const TensorF& x, bool training) = 0;
  virtual TensorF backward(const TensorF& grad_out) = 0;
  virtual void collect_params(std::vector<Param*>& out) { (void)out; }
};

class Conv2d : public Module {
 public:
  Conv2d(int in_ch, int out_ch, int kernel, int stride = 1, int pad = 0, int dilation = 1,
         bool bias = true, std::string name = "conv");

  void init(Rng& rng);  // He-normal weights, zero bias
  TensorF forward(const TensorF& x, bool training) override;
  TensorF backward(const TensorF& grad_out) override;
  void collect_params(std::vector<Param*>& out) override;

  static int out_extent(int in, int kernel, int stride, int pad, int dilation) {
    return (in + 2 * pad - dilation * (kernel - 1) - 1) / stride + 1;
  }

  Param weight;  // (in_ch*k*k) x out_ch
  Param bias_p;  // 1 x out_ch (empty when bias disabled)

 private:
  int in_ch_, out_ch_, k_, stride_, pad_, dil_;
  bool has_bias_;
  TensorF input_;                          // saved for backward
  std::vector<Eigen::MatrixXf> cols_;      // per-sample im2col buffers
};

class BatchNorm2d : public Module {
 public:
  explicit BatchNorm2d(int channels, float momentum = 0.1f, float eps = 1e-5f,
                       std::string name = "bn");

  TensorF forward(const TensorF& x, bool training) override;
  TensorF backward(const TensorF& grad_out) override;
  void collect_params(std::vector<Param*>& out) override;

  Param gamma, beta;
  Eigen::VectorXf running_mean, running_var;

 private:
  int channels_;
  float momentum_, eps_;
  TensorF x_hat_;
  Eigen::VectorXf inv_std_;
  bool training_stats_ = true;
};

class ReLU : public Module {
 public:
  TensorF forward(const TensorF& x, bool training) override;
  TensorF backward(const TensorF& grad_out) override;

 private:
  TensorF mask_;
};

class MaxPool2d : public Module {
 public:
  MaxPool2d(int kernel, int stride, int pad = 0);

  TensorF forward(const TensorF& x, bool training) override;
  TensorF backward(const TensorF& grad_out) override;

 private:
  int k_, stride_, pad_;
  int in_h_ = 0, in_w_ = 0, in_n_ = 0, in_c_ = 0;
  Eigen::MatrixX<Eigen::Index> argmax_;  // source row per output element, per column
};

/// Nearest-neighbor x2 upsampling (the small U-Net's decoder step).
class UpsampleNearest2x : public Module {
 public:
  TensorF forward(const TensorF& x, bool training) override;
  TensorF backward(const TensorF& grad_out) override;

 private:
  int in_h_ = 0, in_w_ = 0;
};

/// Bilinear resize to a fixed size with exact transpose backward.
class BilinearResize : public Module {
 public:
  BilinearResize(int out_h, int out_w);
  void set_output_size(int out_h, int out_w) { out_h_ = out_h; out_w_ = out_w; }

  TensorF forward(const TensorF& x, bool training) override;
  TensorF backward(const TensorF& grad_out) override;

 private:
  int out_h_, out_w_;
  int in_h_ = 0, in_w_ = 0;
};

/// Spatial mean to 1x1, used by the ASPP image-pooling branch.
class GlobalAvgPool : public Module {
 public:
  TensorF forward(const TensorF& x, bool training) override;
  TensorF backward(const TensorF& grad_out) override;

 private:
  int in_h_ = 0, in_w_ = 0;
};

class Sequential : public Module {
 public:
  Sequential() = default;
  Sequential& add(std::unique_ptr<Module> m) {
    modules_.push_back(std::move(m));
    return *this;
  }

  TensorF forward(const TensorF& x, bool training) override;
  TensorF backward(const TensorF& grad_out) override;
  void collect_params(std::vector<Param*>& out) override;

 private:
  std::vector<std::unique_ptr<Module>> modules_;
};

// free helpers used by the network graphs
TensorF concat_channels(const TensorF& a, const TensorF& b);
void split_channels(const TensorF& grad, int c_a, TensorF& grad_a, TensorF& grad_b);
TensorF add(const TensorF& a, const TensorF& b);

std::unique_ptr<Sequential> conv_bn_relu(int in_ch, int out_ch, int kernel, int stride, int pad,
                                         int dilation, Rng& rng, const std::string& name);

}  // namespace fractoseg
