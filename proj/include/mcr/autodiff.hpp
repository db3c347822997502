#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace mcr::ad {

/// Reverse-mode tape over dense Eigen matrices, templated on scalar so the
/// same model code runs in float for training and double for gradient
/// verification. With record=false the tape computes values only.
template <typename S>
class Tape {
 public:
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  using Mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

  struct Var {
    int id = -1;
  };

  explicit Tape(bool record = true) : record_(record) { nodes_.reserve(256); }

  Var input(Mat value) { return push(std::move(value), true, nullptr); }
  Var constant(Mat value) { return push(std::move(value), false, nullptr); }

  const Mat& value(Var v) const { return nodes_[check(v)].value; }
  const Mat& grad(Var v) const { return nodes_[check(v)].grad; }
  size_t size() const { return nodes_.size(); }

  void backward(Var loss) {
    if (!record_) throw std::logic_error("backward on a non-recording tape");
    auto& n = nodes_[check(loss)];
    if (n.value.rows() != 1 || n.value.cols() != 1)
      throw std::logic_error("backward seed must be a 1x1 value");
    for (auto& node : nodes_) node.grad.setZero(node.value.rows(), node.value.cols());
    n.grad(0, 0) = S(1);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it)
      if (it->back) it->back();
  }

  Var matmul(Var a, Var b) {
    Mat out = value(a) * value(b);
    return push(std::move(out), needs_grad(a) || needs_grad(b), [this, a, b](Var o) {
      if (needs_grad(a)) acc(a, grad(o) * value(b).transpose());
      if (needs_grad(b)) acc(b, value(a).transpose() * grad(o));
    });
  }

  Var add(Var a, Var b) {
    Mat out = value(a) + value(b);
    return push(std::move(out), needs_grad(a) || needs_grad(b), [this, a, b](Var o) {
      if (needs_grad(a)) acc(a, grad(o));
      if (needs_grad(b)) acc(b, grad(o));
    });
  }

  Var sub(Var a, Var b) {
    Mat out = value(a) - value(b);
    return push(std::move(out), needs_grad(a) || needs_grad(b), [this, a, b](Var o) {
      if (needs_grad(a)) acc(a, grad(o));
      if (needs_grad(b)) acc(b, Mat(-grad(o)));
    });
  }

  Var cmul(Var a, Var b) {
    Mat out = value(a).cwiseProduct(value(b));
    return push(std::move(out), needs_grad(a) || needs_grad(b), [this, a, b](Var o) {
      if (needs_grad(a)) acc(a, grad(o).cwiseProduct(value(b)));
      if (needs_grad(b)) acc(b, grad(o).cwiseProduct(value(a)));
    });
  }

  Var scale(Var a, S k) {
    Mat out = value(a) * k;
    return push(std::move(out), needs_grad(a), [this, a, k](Var o) {
      if (needs_grad(a)) acc(a, Mat(grad(o) * k));
    });
  }

  Var transpose(Var a) {
    Mat out = value(a).transpose();
    return push(std::move(out), needs_grad(a), [this, a](Var o) {
      if (needs_grad(a)) acc(a, grad(o).transpose());
    });
  }

  Var tanh(Var a) {
    Mat out = value(a).array().tanh().matrix();
    return push(std::move(out), needs_grad(a), [this, a](Var o) {
      if (needs_grad(a))
        acc(a, grad(o).cwiseProduct(
                   (S(1) - value(o).array().square()).matrix()));
    });
  }

  Var sigmoid(Var a) {
    Mat out = (S(1) / (S(1) + (-value(a).array()).exp())).matrix();
    return push(std::move(out), needs_grad(a), [this, a](Var o) {
      if (needs_grad(a))
        acc(a, grad(o).cwiseProduct(
                   (value(o).array() * (S(1) - value(o).array())).matrix()));
    });
  }

  Var relu(Var a) {
    Mat out = value(a).cwiseMax(S(0));
    return push(std::move(out), needs_grad(a), [this, a](Var o) {
      if (needs_grad(a))
        acc(a, grad(o).cwiseProduct(
                   (value(a).array() > S(0)).template cast<S>().matrix()));
    });
  }

  Var leaky_relu(Var a, S slope) {
    Mat out = value(a).cwiseMax(value(a) * slope);
    return push(std::move(out), needs_grad(a), [this, a, slope](Var o) {
      if (needs_grad(a)) {
        Mat d = (value(a).array() >= S(0))
                    .select(Mat::Constant(value(a).rows(), value(a).cols(), S(1)),
                            Mat::Constant(value(a).rows(), value(a).cols(), slope));
        acc(a, grad(o).cwiseProduct(d));
      }
    });
  }

  Var log(Var a) {
    Mat out = value(a).array().log().matrix();
    return push(std::move(out), needs_grad(a), [this, a](Var o) {
      if (needs_grad(a)) acc(a, grad(o).cwiseQuotient(value(a)));
    });
  }

  Var concat_cols(Var a, Var b) {
    Mat out(value(a).rows(), value(a).cols() + value(b).cols());
    out << value(a), value(b);
    return push(std::move(out), needs_grad(a) || needs_grad(b), [this, a, b](Var o) {
      auto ca = value(a).cols();
      if (needs_grad(a)) acc(a, grad(o).leftCols(ca));
      if (needs_grad(b)) acc(b, grad(o).rightCols(value(b).cols()));
    });
  }

  Var cols(Var a, int start, int len) {
    Mat out = value(a).middleCols(start, len);
    return push(std::move(out), needs_grad(a), [this, a, start, len](Var o) {
      if (needs_grad(a)) {
        Mat g = Mat::Zero(value(a).rows(), value(a).cols());
        g.middleCols(start, len) = grad(o);
        acc(a, g);
      }
    });
  }

  /// Selected rows of a, in the given order.
  Var gather_rows(Var a, std::vector<int> idx) {
    Mat out(static_cast<Eigen::Index>(idx.size()), value(a).cols());
    for (size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = value(a).row(idx[k]);
    return push(std::move(out), needs_grad(a), [this, a, idx = std::move(idx)](Var o) {
      if (needs_grad(a)) {
        Mat g = Mat::Zero(value(a).rows(), value(a).cols());
        for (size_t k = 0; k < idx.size(); ++k)
          g.row(idx[k]) += grad(o).row(static_cast<Eigen::Index>(k));
        acc(a, g);
      }
    });
  }

  /// Spreads a 1 x k row into a 1 x n row at the given columns; the rest
  /// stays exactly zero.
  Var scatter_cols(Var a, std::vector<int> cols, int n) {
    Mat out = Mat::Zero(1, n);
    for (size_t k = 0; k < cols.size(); ++k) out(0, cols[k]) = value(a)(0, static_cast<Eigen::Index>(k));
    return push(std::move(out), needs_grad(a), [this, a, cols = std::move(cols)](Var o) {
      if (needs_grad(a)) {
        Mat g(1, value(a).cols());
        for (size_t k = 0; k < cols.size(); ++k)
          g(0, static_cast<Eigen::Index>(k)) = grad(o)(0, cols[k]);
        acc(a, g);
      }
    });
  }

  Var row(Var a, int i) {
    Mat out = value(a).row(i);
    return push(std::move(out), needs_grad(a), [this, a, i](Var o) {
      if (needs_grad(a)) {
        Mat g = Mat::Zero(value(a).rows(), value(a).cols());
        g.row(i) = grad(o);
        acc(a, g);
      }
    });
  }

  /// col (n x 1) broadcast-plus row (1 x m) -> n x m.
  Var outer_sum(Var col, Var rowv) {
    Mat out = value(col).replicate(1, value(rowv).cols()) +
              value(rowv).replicate(value(col).rows(), 1);
    return push(std::move(out), needs_grad(col) || needs_grad(rowv),
                [this, col, rowv](Var o) {
                  if (needs_grad(col)) acc(col, grad(o).rowwise().sum());
                  if (needs_grad(rowv)) acc(rowv, grad(o).colwise().sum());
                });
  }

  /// a (n x m) plus row vector r (1 x m) broadcast over rows.
  Var add_rowvec(Var a, Var r) {
    Mat out = value(a).rowwise() + value(r).row(0);
    return push(std::move(out), needs_grad(a) || needs_grad(r), [this, a, r](Var o) {
      if (needs_grad(a)) acc(a, grad(o));
      if (needs_grad(r)) acc(r, grad(o).colwise().sum());
    });
  }

  Var repeat_row(Var r, int n) {
    Mat out = value(r).replicate(n, 1);
    return push(std::move(out), needs_grad(r), [this, r](Var o) {
      if (needs_grad(r)) acc(r, grad(o).colwise().sum());
    });
  }

  /// Row-wise softmax restricted to mask==true entries; masked entries get
  /// probability exactly zero (their shifted logits are -inf, so the exp
  /// underflows to an exact zero) and receive no gradient.
  Var softmax_rows_masked(Var a, const Mask& mask) {
    const Mat& x = value(a);
    const S ninf = -std::numeric_limits<S>::infinity();
    Mat shifted = mask.select(x, Mat::Constant(x.rows(), x.cols(), ninf));
    Eigen::Matrix<S, Eigen::Dynamic, 1> mx = shifted.rowwise().maxCoeff();
    if (!mx.allFinite())
      throw std::logic_error("softmax row with no unmasked entries");
    Mat out = (shifted.colwise() - mx).array().exp().matrix();
    Eigen::Matrix<S, Eigen::Dynamic, 1> sums = out.rowwise().sum();
    out.array().colwise() /= sums.array();
    return push(std::move(out), needs_grad(a), [this, a](Var o) {
      if (!needs_grad(a)) return;
      const Mat& p = value(o);
      const Mat& g = grad(o);
      // Masked probabilities are zero, so they drop out of both terms.
      Eigen::Matrix<S, Eigen::Dynamic, 1> dot = g.cwiseProduct(p).rowwise().sum();
      Mat ga = (p.array() * (g.array().colwise() - dot.array())).matrix();
      acc(a, ga);
    });
  }

  Var sum(Var a) {
    Mat out(1, 1);
    out(0, 0) = value(a).sum();
    return push(std::move(out), needs_grad(a), [this, a](Var o) {
      if (needs_grad(a))
        acc(a, Mat::Constant(value(a).rows(), value(a).cols(), grad(o)(0, 0)));
    });
  }

  Var pick(Var a, int i, int j) {
    Mat out(1, 1);
    out(0, 0) = value(a)(i, j);
    return push(std::move(out), needs_grad(a), [this, a, i, j](Var o) {
      if (needs_grad(a)) {
        Mat g = Mat::Zero(value(a).rows(), value(a).cols());
        g(i, j) = grad(o)(0, 0);
        acc(a, g);
      }
    });
  }

 private:
  struct Node {
    Mat value;
    Mat grad;
    bool requires_grad = false;
    std::function<void()> back;
  };

  bool needs_grad(Var v) const { return nodes_[check(v)].requires_grad; }

  size_t check(Var v) const {
    if (v.id < 0 || static_cast<size_t>(v.id) >= nodes_.size())
      throw std::logic_error("invalid tape variable");
    return static_cast<size_t>(v.id);
  }

  void acc(Var v, const Mat& g) { nodes_[check(v)].grad += g; }

  // The backward closure stays a raw lambda unless this tape records;
  // value-only tapes never pay the std::function allocation per node.
  template <typename F>
  Var push(Mat value, bool req, F&& back) {
    Node n;
    n.value = std::move(value);
    // Value-only tapes skip the scan; training runs guard against blow-ups
    // via the gradient-norm check as well.
    if (record_ && !n.value.allFinite())
      throw std::runtime_error("non-finite value produced on the tape");
    n.requires_grad = req;
    Var v{static_cast<int>(nodes_.size())};
    if constexpr (!std::is_same_v<std::decay_t<F>, std::nullptr_t>) {
      if (record_ && req) n.back = [fn = std::forward<F>(back), v] { fn(v); };
    }
    nodes_.push_back(std::move(n));
    return v;
  }

  std::vector<Node> nodes_;
  bool record_;
};

}  // namespace mcr::ad
