#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/rng.hpp"

// Small dense networks with hand-rolled backprop. Batches are column-major:
// one sample per column, so forward passes are plain GEMMs.

namespace flores::nets {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct Tensor {
  std::string name;
  Mat<Scalar> value;
  Mat<Scalar> grad;

  void init_zero(const std::string& n, int rows, int cols) {
    name = n;
    value = Mat<Scalar>::Zero(rows, cols);
    grad = Mat<Scalar>::Zero(rows, cols);
  }
};

template <typename Scalar>
inline Mat<Scalar> elu(const Mat<Scalar>& x) {
  return x.unaryExpr([](Scalar v) {
    return v > Scalar(0) ? v : Scalar(std::expm1(static_cast<double>(v)));
  });
}

template <typename Scalar>
inline Mat<Scalar> elu_grad_from_output(const Mat<Scalar>& y) {
  // with f(x) = expm1(x) for x<0, f'(x) = f(x)+1; for x>0, f' = 1
  return y.unaryExpr([](Scalar v) { return v > Scalar(0) ? Scalar(1) : v + Scalar(1); });
}

template <typename Scalar>
class Mlp {
 public:
  Mlp() = default;

  // sizes = {in, hidden..., out}; ELU between layers, linear head
  Mlp(std::vector<int> sizes, Rng& rng, double final_layer_scale = 1.0)
      : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) throw_invalid("mlp: need at least input and output sizes");
    const int L = static_cast<int>(sizes_.size()) - 1;
    weights_.resize(L);
    biases_.resize(L);
    for (int l = 0; l < L; ++l) {
      const int in = sizes_[l], out = sizes_[l + 1];
      weights_[l].init_zero("w" + std::to_string(l), out, in);
      biases_[l].init_zero("b" + std::to_string(l), out, 1);
      const double bound = std::sqrt(6.0 / (in + out)) * (l == L - 1 ? final_layer_scale : 1.0);
      for (int i = 0; i < out; ++i)
        for (int j = 0; j < in; ++j)
          weights_[l].value(i, j) = static_cast<Scalar>(rng.uniform(-bound, bound));
    }
  }

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  const std::vector<int>& sizes() const { return sizes_; }

  Mat<Scalar> forward(const Mat<Scalar>& x) {
    if (x.rows() != sizes_.front()) throw_invalid("mlp: input dimension mismatch");
    const int L = static_cast<int>(weights_.size());
    activations_.assign(1, x);
    for (int l = 0; l < L; ++l) {
      Mat<Scalar> z = (weights_[l].value * activations_.back()).colwise() +
                      Vec<Scalar>(biases_[l].value.col(0));
      activations_.push_back(l + 1 < L ? elu<Scalar>(z) : z);
    }
    return activations_.back();
  }

  // evaluation without caching (const)
  Mat<Scalar> evaluate(const Mat<Scalar>& x) const {
    const int L = static_cast<int>(weights_.size());
    Mat<Scalar> h = x;
    for (int l = 0; l < L; ++l) {
      Mat<Scalar> z =
          (weights_[l].value * h).colwise() + Vec<Scalar>(biases_[l].value.col(0));
      h = l + 1 < L ? elu<Scalar>(z) : z;
    }
    return h;
  }

  // accumulates parameter gradients; returns dL/dx
  Mat<Scalar> backward(const Mat<Scalar>& dout) {
    if (activations_.empty()) throw_invalid("mlp: backward before forward");
    const int L = static_cast<int>(weights_.size());
    Mat<Scalar> delta = dout;
    for (int l = L - 1; l >= 0; --l) {
      if (l < L - 1)
        delta = delta.cwiseProduct(elu_grad_from_output<Scalar>(activations_[l + 1]));
      weights_[l].grad.noalias() += delta * activations_[l].transpose();
      biases_[l].grad.col(0).noalias() += delta.rowwise().sum();
      delta = (weights_[l].value.transpose() * delta).eval();
    }
    return delta;
  }

  void zero_grad() {
    for (auto& t : weights_) t.grad.setZero();
    for (auto& t : biases_) t.grad.setZero();
  }

  void visit(const std::function<void(Tensor<Scalar>&)>& fn) {
    for (size_t l = 0; l < weights_.size(); ++l) {
      fn(weights_[l]);
      fn(biases_[l]);
    }
  }

 private:
  std::vector<int> sizes_;
  std::vector<Tensor<Scalar>> weights_;
  std::vector<Tensor<Scalar>> biases_;
  std::vector<Mat<Scalar>> activations_;
};

// Adam with bias correction; one slot set per tensor, keyed by visit order
template <typename Scalar>
class Adam {
 public:
  Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void set_learning_rate(double lr) { lr_ = lr; }
  double learning_rate() const { return lr_; }

  void begin_step() {
    ++t_;
    cursor_ = 0;
  }

  void update(Tensor<Scalar>& tensor) {
    if (cursor_ == m_.size()) {
      m_.push_back(Mat<Scalar>::Zero(tensor.value.rows(), tensor.value.cols()));
      v_.push_back(Mat<Scalar>::Zero(tensor.value.rows(), tensor.value.cols()));
    }
    Mat<Scalar>& m = m_[cursor_];
    Mat<Scalar>& v = v_[cursor_];
    ++cursor_;
    m = Scalar(beta1_) * m + Scalar(1 - beta1_) * tensor.grad;
    v = Scalar(beta2_) * v + Scalar(1 - beta2_) * tensor.grad.cwiseProduct(tensor.grad);
    const double mc = 1.0 - std::pow(beta1_, t_);
    const double vc = 1.0 - std::pow(beta2_, t_);
    const Scalar alpha = static_cast<Scalar>(lr_ / mc);
    const Scalar vscale = static_cast<Scalar>(1.0 / std::sqrt(vc));
    tensor.value.array() -=
        alpha * m.array() / (v.array().sqrt() * vscale + Scalar(eps_));
  }

 private:
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  size_t cursor_ = 0;
  std::vector<Mat<Scalar>> m_;
  std::vector<Mat<Scalar>> v_;
};

}  // namespace flores::nets
