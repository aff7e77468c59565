#include "crowdnav/autodiff.hpp"

#include <cmath>

#include "crowdnav/error.hpp"

namespace crowdnav::train {

Var Tape::push(Matrix value, std::function<void(Tape&, std::size_t)> backprop) {
  nodes_.push_back(Node{std::move(value), Matrix(), std::move(backprop), nullptr});
  return Var{nodes_.size() - 1};
}

Matrix& Tape::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Var Tape::constant(Matrix value) { return push(std::move(value), nullptr); }

Var Tape::parameter(Parameter& p) {
  Var v = push(p.value, nullptr);
  nodes_[v.id].param = &p;
  return v;
}

Var Tape::matmul(Var a, Var b) {
  return push(value(a) * value(b), [a, b](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    t.grad(a.id) += g * t.value(b).transpose();
    t.grad(b.id) += t.value(a).transpose() * g;
  });
}

Var Tape::add(Var a, Var b) {
  const Matrix& va = value(a);
  const Matrix& vb = value(b);
  if (va.rows() == vb.rows() && va.cols() == vb.cols()) {
    return push(va + vb, [a, b](Tape& t, std::size_t self) {
      const Matrix& g = t.nodes_[self].grad;
      t.grad(a.id) += g;
      t.grad(b.id) += g;
    });
  }
  if (vb.cols() == 1 && vb.rows() == va.rows()) {
    return push(va.colwise() + vb.col(0), [a, b](Tape& t, std::size_t self) {
      const Matrix& g = t.nodes_[self].grad;
      t.grad(a.id) += g;
      t.grad(b.id) += g.rowwise().sum();
    });
  }
  throw ValidationError("autodiff add: incompatible shapes");
}

Var Tape::sub(Var a, Var b) {
  if (value(a).rows() != value(b).rows() || value(a).cols() != value(b).cols()) {
    throw ValidationError("autodiff sub: incompatible shapes");
  }
  return push(value(a) - value(b), [a, b](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    t.grad(a.id) += g;
    t.grad(b.id) -= g;
  });
}

Var Tape::mul(Var a, Var b) {
  if (value(a).rows() != value(b).rows() || value(a).cols() != value(b).cols()) {
    throw ValidationError("autodiff mul: incompatible shapes");
  }
  return push(value(a).cwiseProduct(value(b)), [a, b](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    t.grad(a.id) += g.cwiseProduct(t.value(b));
    t.grad(b.id) += g.cwiseProduct(t.value(a));
  });
}

Var Tape::scale(Var a, double s) {
  return push(value(a) * s, [a, s](Tape& t, std::size_t self) {
    t.grad(a.id) += t.nodes_[self].grad * s;
  });
}

Var Tape::add_scalar(Var a, double s) {
  return push((value(a).array() + s).matrix(), [a](Tape& t, std::size_t self) {
    t.grad(a.id) += t.nodes_[self].grad;
  });
}

Var Tape::sigmoid(Var a) {
  Matrix y = (1.0 / (1.0 + (-value(a).array()).exp())).matrix();
  return push(std::move(y), [a](Tape& t, std::size_t self) {
    const Matrix& y = t.nodes_[self].value;
    t.grad(a.id) +=
        t.nodes_[self].grad.cwiseProduct((y.array() * (1.0 - y.array())).matrix());
  });
}

Var Tape::tanh(Var a) {
  Matrix y = value(a).array().tanh().matrix();
  return push(std::move(y), [a](Tape& t, std::size_t self) {
    const Matrix& y = t.nodes_[self].value;
    t.grad(a.id) += t.nodes_[self].grad.cwiseProduct((1.0 - y.array().square()).matrix());
  });
}

Var Tape::relu(Var a) {
  return push(value(a).cwiseMax(0.0), [a](Tape& t, std::size_t self) {
    const Matrix mask = (t.value(a).array() > 0.0).cast<double>().matrix();
    t.grad(a.id) += t.nodes_[self].grad.cwiseProduct(mask);
  });
}

Var Tape::softplus(Var a) {
  const Matrix& x = value(a);
  Matrix y = (x.array().max(0.0) + (-x.array().abs()).exp().log1p()).matrix();
  return push(std::move(y), [a](Tape& t, std::size_t self) {
    const Matrix s = (1.0 / (1.0 + (-t.value(a).array()).exp())).matrix();
    t.grad(a.id) += t.nodes_[self].grad.cwiseProduct(s);
  });
}

Var Tape::square(Var a) {
  return push(value(a).array().square().matrix(), [a](Tape& t, std::size_t self) {
    t.grad(a.id) += t.nodes_[self].grad.cwiseProduct(2.0 * t.value(a));
  });
}

Var Tape::sqrt(Var a) {
  return push(value(a).array().sqrt().matrix(), [a](Tape& t, std::size_t self) {
    const Matrix& y = t.nodes_[self].value;
    t.grad(a.id) += t.nodes_[self].grad.cwiseQuotient(2.0 * y);
  });
}

Var Tape::sum(Var a) {
  Matrix y(1, 1);
  y(0, 0) = value(a).sum();
  return push(std::move(y), [a](Tape& t, std::size_t self) {
    t.grad(a.id).array() += t.nodes_[self].grad(0, 0);
  });
}

Var Tape::concat_rows(Var top, Var bottom) {
  const Matrix& a = value(top);
  const Matrix& b = value(bottom);
  if (a.cols() != b.cols()) throw ValidationError("autodiff concat: column mismatch");
  Matrix y(a.rows() + b.rows(), a.cols());
  y << a, b;
  const Eigen::Index split = a.rows();
  return push(std::move(y), [top, bottom, split](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    t.grad(top.id) += g.topRows(split);
    t.grad(bottom.id) += g.bottomRows(g.rows() - split);
  });
}

Var Tape::rows(Var a, Eigen::Index start, Eigen::Index count) {
  return push(value(a).middleRows(start, count), [a, start, count](Tape& t, std::size_t self) {
    t.grad(a.id).middleRows(start, count) += t.nodes_[self].grad;
  });
}

Var Tape::gather_cols(Var a, std::vector<Eigen::Index> index) {
  const Matrix& x = value(a);
  Matrix y(x.rows(), static_cast<Eigen::Index>(index.size()));
  for (std::size_t j = 0; j < index.size(); ++j) y.col(static_cast<Eigen::Index>(j)) = x.col(index[j]);
  return push(std::move(y), [a, index = std::move(index)](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    Matrix& ga = t.grad(a.id);
    for (std::size_t j = 0; j < index.size(); ++j) ga.col(index[j]) += g.col(static_cast<Eigen::Index>(j));
  });
}

Var Tape::group_max(Var a, std::vector<std::vector<Eigen::Index>> groups) {
  const Matrix& x = value(a);
  const auto out_cols = static_cast<Eigen::Index>(groups.size());
  Matrix y = Matrix::Zero(x.rows(), out_cols);
  // argmax[i * rows + r]: source column feeding output (r, i), or -1.
  std::vector<Eigen::Index> argmax(static_cast<std::size_t>(x.rows() * out_cols), -1);
  for (Eigen::Index i = 0; i < out_cols; ++i) {
    const auto& group = groups[static_cast<std::size_t>(i)];
    if (group.empty()) continue;
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      Eigen::Index best = group.front();
      for (Eigen::Index c : group) {
        if (x(r, c) > x(r, best)) best = c;
      }
      y(r, i) = x(r, best);
      argmax[static_cast<std::size_t>(i * x.rows() + r)] = best;
    }
  }
  const Eigen::Index rows = x.rows();
  return push(std::move(y), [a, rows, argmax = std::move(argmax)](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    Matrix& ga = t.grad(a.id);
    for (Eigen::Index i = 0; i < g.cols(); ++i) {
      for (Eigen::Index r = 0; r < rows; ++r) {
        const Eigen::Index c = argmax[static_cast<std::size_t>(i * rows + r)];
        if (c >= 0) ga(r, c) += g(r, i);
      }
    }
  });
}

void Tape::backward(Var root) {
  if (value(root).size() != 1) throw ValidationError("backward needs a scalar root");
  grad(root.id)(0, 0) += 1.0;
  for (std::size_t i = root.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.size() == 0) continue;
    if (n.backprop) n.backprop(*this, i);
    if (n.param) {
      if (n.param->grad.size() == 0) n.param->zero_grad();
      n.param->grad += n.grad;
    }
  }
}

}  // namespace crowdnav::train
