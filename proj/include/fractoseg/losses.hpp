#pragma once

#include <cmath>
#include <vector>

#include "fractoseg/tensor.hpp"

namespace fractoseg {

/// Decomposition of one training step's objective: total = supervised +
/// lambda * unsupervised.
struct LossBundle {
  double total = 0;
  double supervised = 0;
  double unsupervised = 0;
  double lambda = 0;
  double valid_pixel_fraction = 0;

  void finalize() { total = supervised + lambda * unsupervised; }
};

struct RampSchedule {
  double lambda_max = 1.0;
  int ramp_epochs = 200;
};

/// Gaussian ramp exp(-5 (1 - T)^2) with T = min(epoch / ramp_epochs, 1);
/// reaches lambda_max exactly at ramp_epochs.
inline double lambda_at(int epoch, const RampSchedule& schedule) {
  require(epoch >= 0, ErrorCode::ConfigInvalid, "epoch must be >= 0");
  require(schedule.lambda_max >= 0 && schedule.ramp_epochs > 0, ErrorCode::ConfigInvalid,
          "bad ramp schedule");
  const double t = std::min(double(epoch) / double(schedule.ramp_epochs), 1.0);
  return schedule.lambda_max * std::exp(-5.0 * (1.0 - t) * (1.0 - t));
}

namespace detail {

template <typename S>
void check_labels(const Tensor<S>& logits, const std::vector<Eigen::VectorXi>& labels) {
  require(int(labels.size()) == logits.n, ErrorCode::ShapeMismatch,
          "label batch size does not match logits");
  for (const auto& l : labels) {
    require(l.size() == logits.pixels(), ErrorCode::ShapeMismatch,
            "label pixel count does not match logits");
    require((l.array() >= 0).all() && (l.array() < logits.c).all(), ErrorCode::InvalidSpec,
            "label id outside class range");
  }
}

}  // namespace detail

/// Mean over all pixels of -log softmax at the true class. When `grad` is
/// given it receives d(loss)/d(logits).
template <typename S>
S cross_entropy(const Tensor<S>& logits, const std::vector<Eigen::VectorXi>& labels,
                Tensor<S>* grad = nullptr) {
  detail::check_labels(logits, labels);
  require(logits.all_finite(), ErrorCode::NonFinite, "cross_entropy on non-finite logits");
  const Tensor<S> probs = softmax(logits);
  const S inv_total = S(1) / S(double(logits.n) * double(logits.pixels()));
  if (grad) {
    *grad = probs;
    grad->m *= inv_total;
  }
  S loss = 0;
  for (int ni = 0; ni < logits.n; ++ni) {
    auto zb = logits.sample(ni);
    auto pb = probs.sample(ni);
    const auto& lab = labels[std::size_t(ni)];
    for (Eigen::Index r = 0; r < zb.rows(); ++r) {
      loss -= std::log(std::max(pb(r, lab(r)), S(1e-30)));
      if (grad) grad->sample(ni)(r, lab(r)) -= inv_total;
    }
  }
  return loss * inv_total;
}

/// Per-class soft Dice coefficients of one sample, (2 sum(t p) + eps) /
/// (sum(t^2) + sum(p^2) + eps).
template <typename S>
std::vector<S> dice_per_class(const Tensor<S>& probs, const std::vector<Eigen::VectorXi>& labels,
                              int sample, S epsilon = S(1e-6)) {
  detail::check_labels(probs, labels);
  auto pb = probs.sample(sample);
  const auto& lab = labels[std::size_t(sample)];
  std::vector<S> out(std::size_t(probs.c));
  for (int c = 0; c < probs.c; ++c) {
    S dot = 0, p_sq = 0, t_sq = 0;
    for (Eigen::Index r = 0; r < pb.rows(); ++r) {
      const S p = pb(r, c);
      const S t = lab(r) == c ? S(1) : S(0);
      dot += p * t;
      p_sq += p * p;
      t_sq += t;
    }
    out[std::size_t(c)] = (S(2) * dot + epsilon) / (t_sq + p_sq + epsilon);
  }
  return out;
}

/// Soft Dice loss over per-class probability fields. Dice is computed per
/// class with smoothing, averaged over all classes per sample, then over the
/// batch; `grad` receives d(loss)/d(probabilities).
template <typename S>
S dice_loss(const Tensor<S>& probs, const std::vector<Eigen::VectorXi>& labels,
            Tensor<S>* grad = nullptr, S epsilon = S(1e-6)) {
  detail::check_labels(probs, labels);
  require((probs.m.array() >= S(-1e-6)).all() && (probs.m.array() <= S(1) + S(1e-6)).all(),
          ErrorCode::InvalidSpec, "dice_loss expects probabilities in [0,1]");
  if (grad) *grad = zeros_like(probs);

  S loss = 0;
  for (int ni = 0; ni < probs.n; ++ni) {
    auto pb = probs.sample(ni);
    const auto& lab = labels[std::size_t(ni)];
    S dice_sum = 0;
    for (int c = 0; c < probs.c; ++c) {
      S dot = 0, p_sq = 0, t_sq = 0;
      for (Eigen::Index r = 0; r < pb.rows(); ++r) {
        const S p = pb(r, c);
        const S t = lab(r) == c ? S(1) : S(0);
        dot += p * t;
        p_sq += p * p;
        t_sq += t;
      }
      const S num = S(2) * dot + epsilon;
      const S den = t_sq + p_sq + epsilon;
      dice_sum += num / den;
      if (grad) {
        auto gb = grad->sample(ni);
        const S scale = S(-1) / (S(probs.c) * S(probs.n));
        for (Eigen::Index r = 0; r < pb.rows(); ++r) {
          const S p = pb(r, c);
          const S t = lab(r) == c ? S(1) : S(0);
          gb(r, c) += scale * (S(2) * t * den - num * S(2) * p) / (den * den);
        }
      }
    }
    loss += S(1) - dice_sum / S(probs.c);
  }
  return loss / S(probs.n);
}

/// Chain rule through a per-pixel softmax: given d(loss)/d(probs), returns
/// d(loss)/d(logits).
template <typename S>
Tensor<S> softmax_backward(const Tensor<S>& probs, const Tensor<S>& grad_probs) {
  require(probs.same_shape(grad_probs), ErrorCode::ShapeMismatch, "softmax backward shapes");
  Tensor<S> grad = zeros_like(probs);
  for (int ni = 0; ni < probs.n; ++ni) {
    auto pb = probs.sample(ni);
    auto gp = grad_probs.sample(ni);
    auto gz = grad.sample(ni);
    for (Eigen::Index r = 0; r < pb.rows(); ++r) {
      const S dot = pb.row(r).dot(gp.row(r));
      gz.row(r) = pb.row(r).cwiseProduct(gp.row(r) - Eigen::RowVectorX<S>::Constant(pb.cols(), dot));
    }
  }
  return grad;
}

template <typename S>
struct SupervisedLoss {
  S total = 0, ce = 0, dice = 0;
};

/// L_s = CE + Dice loss on the weakly augmented labeled sample.
template <typename S>
SupervisedLoss<S> supervised_loss(const Tensor<S>& logits,
                                  const std::vector<Eigen::VectorXi>& labels,
                                  Tensor<S>* grad = nullptr) {
  SupervisedLoss<S> out;
  Tensor<S> grad_ce;
  out.ce = cross_entropy(logits, labels, grad ? &grad_ce : nullptr);
  const Tensor<S> probs = softmax(logits);
  Tensor<S> grad_dice_p;
  out.dice = dice_loss(probs, labels, grad ? &grad_dice_p : nullptr);
  out.total = out.ce + out.dice;
  if (grad) {
    *grad = softmax_backward(probs, grad_dice_p);
    grad->m += grad_ce.m;
  }
  return out;
}

struct ConsistencyWeights {
  double ce = 1.0;
  double dice = 1.0;
  double negative = 1.0;
};

template <typename S>
struct ConsistencyLoss {
  S total = 0, ce = 0, dice = 0, negative = 0;
  double valid_fraction = 0;
  long long valid_pixels = 0;
};

/// Weak-to-strong consistency with negative learning. The weak branch is a
/// constant target: its argmax acts as ground truth, its argmin defines the
/// complementary class, and only pixels whose weak confidence reaches tau
/// participate. Returns zero (and no gradient) when no pixel is valid.
template <typename S>
ConsistencyLoss<S> consistency_loss(const Tensor<S>& z_weak, const Tensor<S>& z_strong, double tau,
                                    const ConsistencyWeights& weights = {},
                                    Tensor<S>* grad_strong = nullptr,
                                    S epsilon = S(1e-6)) {
  require(z_weak.same_shape(z_strong), ErrorCode::ShapeMismatch,
          "weak/strong logits shapes differ");
  require(tau >= 0 && tau <= 1, ErrorCode::ConfigInvalid, "tau must lie in [0, 1]");

  const Tensor<S> p_weak = softmax(z_weak);
  const Tensor<S> p_strong = softmax(z_strong);
  if (grad_strong) *grad_strong = zeros_like(z_strong);

  ConsistencyLoss<S> out;
  const Eigen::Index pixels = z_weak.pixels();
  long long total_pixels = 0;

  Tensor<S> grad_probs = zeros_like(z_strong);  // d(loss)/d(p_strong)
  for (int ni = 0; ni < z_weak.n; ++ni) {
    auto pw = p_weak.sample(ni);
    auto ps = p_strong.sample(ni);
    total_pixels += pixels;

    // per-pixel weak targets over the valid set
    std::vector<Eigen::Index> valid_rows;
    std::vector<int> arg_top, arg_bot;
    for (Eigen::Index r = 0; r < pixels; ++r) {
      Eigen::Index top, bot;
      const S conf = pw.row(r).maxCoeff(&top);
      pw.row(r).minCoeff(&bot);
      if (double(conf) >= tau) {
        valid_rows.push_back(r);
        arg_top.push_back(int(top));
        arg_bot.push_back(int(bot));
      }
    }
    out.valid_pixels += (long long)(valid_rows.size());
    if (valid_rows.empty()) continue;

    const S inv_valid = S(1) / S(double(valid_rows.size()));

    // cross entropy of the strong view against the weak argmax
    for (std::size_t i = 0; i < valid_rows.size(); ++i) {
      const Eigen::Index r = valid_rows[i];
      out.ce -= std::log(std::max(ps(r, arg_top[i]), S(1e-30))) * inv_valid;
      if (grad_strong) {
        auto gp = grad_probs.sample(ni);
        gp(r, arg_top[i]) -= S(weights.ce) * inv_valid / std::max(ps(r, arg_top[i]), S(1e-30)) /
                             S(z_weak.n);
      }
      // complementary term: push probability away from the weak argmin
      const S p_bot = std::min(ps(r, arg_bot[i]), S(1) - S(1e-12));
      out.negative -= std::log(S(1) - p_bot) * inv_valid;
      if (grad_strong) {
        auto gp = grad_probs.sample(ni);
        gp(r, arg_bot[i]) += S(weights.negative) * inv_valid / (S(1) - p_bot) / S(z_weak.n);
      }
    }

    // masked soft Dice between the strong probabilities and weak one-hot
    S dice_sum = 0;
    for (int c = 0; c < z_weak.c; ++c) {
      S d = 0, psq = 0, tsq = 0;
      for (std::size_t i = 0; i < valid_rows.size(); ++i) {
        const Eigen::Index r = valid_rows[i];
        const S p = ps(r, c);
        const S t = arg_top[i] == c ? S(1) : S(0);
        d += p * t;
        psq += p * p;
        tsq += t;
      }
      const S num = S(2) * d + epsilon;
      const S den = tsq + psq + epsilon;
      dice_sum += num / den;
      if (grad_strong) {
        auto gp = grad_probs.sample(ni);
        const S scale = S(-weights.dice) / (S(z_weak.c) * S(z_weak.n));
        for (std::size_t i = 0; i < valid_rows.size(); ++i) {
          const Eigen::Index r = valid_rows[i];
          const S p = ps(r, c);
          const S t = arg_top[i] == c ? S(1) : S(0);
          gp(r, c) += scale * (S(2) * t * den - num * S(2) * p) / (den * den);
        }
      }
    }
    out.dice += S(1) - dice_sum / S(z_weak.c);
  }

  const S inv_n = S(1) / S(z_weak.n);
  out.ce *= inv_n;
  out.dice *= inv_n;
  out.negative *= inv_n;
  out.valid_fraction = double(out.valid_pixels) / double(total_pixels);
  out.total = S(weights.ce) * out.ce + S(weights.dice) * out.dice +
              S(weights.negative) * out.negative;
  if (grad_strong && out.valid_pixels > 0) *grad_strong = softmax_backward(p_strong, grad_probs);
  return out;
}

}  // namespace fractoseg
