#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace crowdnav::train {

using Matrix = Eigen::MatrixXd;

/// Trainable tensor with its accumulated gradient.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

/// Handle to a node on a Tape.
struct Var {
  std::size_t id = 0;
};

/// Reverse-mode automatic differentiation over dense matrices.
///
/// Nodes are recorded in evaluation order; backward() walks them in reverse
/// and accumulates into every Parameter reached. Columns are typically agents.
class Tape {
 public:
  Var constant(Matrix value);
  Var parameter(Parameter& p);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  double scalar(Var v) const { return nodes_[v.id].value(0, 0); }
  std::size_t size() const { return nodes_.size(); }

  Var matmul(Var a, Var b);
  /// Elementwise sum; a single-column `b` broadcasts across the columns of `a`.
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double s);
  Var add_scalar(Var a, double s);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var relu(Var a);
  /// log(1 + exp(a)), evaluated stably.
  Var softplus(Var a);
  Var square(Var a);
  Var sqrt(Var a);
  Var sum(Var a);
  Var concat_rows(Var top, Var bottom);
  Var rows(Var a, Eigen::Index start, Eigen::Index count);
  /// Column j of the result is column index[j] of `a`.
  Var gather_cols(Var a, std::vector<Eigen::Index> index);
  /// Column i of the result is the elementwise max over the columns of `a`
  /// listed in groups[i]; empty groups give zeros.
  Var group_max(Var a, std::vector<std::vector<Eigen::Index>> groups);

  /// Seeds d(root)/d(root) = 1 for a 1x1 root and back-propagates.
  void backward(Var root);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::function<void(Tape&, std::size_t)> backprop;
    Parameter* param = nullptr;
  };

  Var push(Matrix value, std::function<void(Tape&, std::size_t)> backprop);
  Matrix& grad(std::size_t id);

  std::vector<Node> nodes_;
};

}  // namespace crowdnav::train
