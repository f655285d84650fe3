#pragma once

// Reverse-mode differentiation over dense matrices.
//
// A Tape is an append-only list of nodes. Every op appends one node whose
// inputs have smaller ids, so a single reverse sweep over ids is a valid
// topological order for the backward pass. Vars are lightweight handles
// (tape pointer, node id, shape) into exactly one tape.

#include "ddica/common.hpp"
#include "ddica/linalg.hpp"

#include <string>
#include <vector>

namespace ddica {

class Tape;

struct Var {
  Tape* tape = nullptr;
  int id = -1;
  Index rows = 0;
  Index cols = 0;

  bool valid() const { return tape != nullptr && id >= 0; }
  const Matrix& value() const;
  double scalar() const;
};

enum class Op {
  Leaf,
  MatMul,
  Add,
  Sub,
  Hadamard,
  Scale,
  Tanh,
  Transpose,
  Sum,
  AddColumn,
  CenterRows,
  Row,
  MulScalar,
  DivScalar,
  Norm,
  ClampMin,
  InvSqrtFloor,
  Trace,
  GaussianGram,
  SpectralEntropy,
};

inline const char* op_name(Op op) {
  switch (op) {
    case Op::Leaf: return "leaf";
    case Op::MatMul: return "matmul";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Hadamard: return "hadamard";
    case Op::Scale: return "scale";
    case Op::Tanh: return "tanh";
    case Op::Transpose: return "transpose";
    case Op::Sum: return "sum";
    case Op::AddColumn: return "add_column";
    case Op::CenterRows: return "center_rows";
    case Op::Row: return "row";
    case Op::MulScalar: return "mul_scalar";
    case Op::DivScalar: return "div_scalar";
    case Op::Norm: return "norm";
    case Op::ClampMin: return "clamp_min";
    case Op::InvSqrtFloor: return "inv_sqrt_floor";
    case Op::Trace: return "trace";
    case Op::GaussianGram: return "gaussian_gram";
    case Op::SpectralEntropy: return "spectral_entropy";
  }
  return "?";
}

struct Node {
  Op op = Op::Leaf;
  int a = -1;
  int b = -1;
  Matrix value;
  double param = 0.0;
  Index index = 0;
  // Cached forward quantities for backward rules that need more than the
  // input values (eigenvectors and spectral weights of SpectralEntropy).
  Matrix aux;
  Vector aux_vec;
};

/// Gradients of a scalar loss with respect to every node of a tape.
class Gradients {
 public:
  explicit Gradients(std::vector<Matrix> grads) : grads_(std::move(grads)) {}

  const Matrix& operator[](const Var& v) const { return grads_.at(static_cast<std::size_t>(v.id)); }
  const Matrix& at(int id) const { return grads_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return grads_.size(); }

 private:
  std::vector<Matrix> grads_;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Matrix value) {
    Node n;
    n.op = Op::Leaf;
    n.value = std::move(value);
    return push(std::move(n));
  }

  const Node& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  const Matrix& value(const Var& v) const { return node(v.id).value; }
  std::size_t size() const { return nodes_.size(); }

  /// Appends a node; op functions below are the intended callers.
  Var push(Node n) {
    if (!all_finite(n.value)) {
      throw NumericError(std::string("tape: non-finite value produced by ") + op_name(n.op));
    }
    const int id = static_cast<int>(nodes_.size());
    const Index rows = n.value.rows();
    const Index cols = n.value.cols();
    nodes_.push_back(std::move(n));
    return Var{this, id, rows, cols};
  }

  /// Reverse sweep from a 1x1 loss. `seed` is the incoming gradient dL/dloss.
  Gradients backward(const Var& loss, double seed = 1.0) const;

 private:
  std::vector<Node> nodes_;
};

inline const Matrix& Var::value() const { return tape->value(*this); }

inline double Var::scalar() const {
  if (rows != 1 || cols != 1) {
    throw DimensionError("Var::scalar: expected 1x1, got " + shape_str(rows, cols));
  }
  return value()(0, 0);
}

namespace detail {

inline Tape& common_tape(const Var& a, const Var& b, const char* who) {
  if (!a.valid() || !b.valid() || a.tape != b.tape) {
    throw Error(std::string(who) + ": operands must live on the same tape");
  }
  return *a.tape;
}

inline Tape& tape_of(const Var& a, const char* who) {
  if (!a.valid()) throw Error(std::string(who) + ": invalid Var");
  return *a.tape;
}

inline void require_same_shape(const Var& a, const Var& b, const char* who) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw DimensionError(std::string(who) + ": shape mismatch " + shape_str(a.rows, a.cols) +
                         " vs " + shape_str(b.rows, b.cols));
  }
}

inline void require_scalar(const Var& s, const char* who) {
  if (s.rows != 1 || s.cols != 1) {
    throw DimensionError(std::string(who) + ": expected 1x1 scalar, got " +
                         shape_str(s.rows, s.cols));
  }
}

inline Node make_node(Op op, int a, int b, Matrix value) {
  Node n;
  n.op = op;
  n.a = a;
  n.b = b;
  n.value = std::move(value);
  return n;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Ops
// ---------------------------------------------------------------------------

inline Var matmul(const Var& a, const Var& b) {
  Tape& t = detail::common_tape(a, b, "matmul");
  if (a.cols != b.rows) {
    throw DimensionError("matmul: shape mismatch " + shape_str(a.rows, a.cols) + " x " +
                         shape_str(b.rows, b.cols));
  }
  return t.push(detail::make_node(Op::MatMul, a.id, b.id, a.value() * b.value()));
}

inline Var add(const Var& a, const Var& b) {
  Tape& t = detail::common_tape(a, b, "add");
  detail::require_same_shape(a, b, "add");
  return t.push(detail::make_node(Op::Add, a.id, b.id, a.value() + b.value()));
}

inline Var sub(const Var& a, const Var& b) {
  Tape& t = detail::common_tape(a, b, "sub");
  detail::require_same_shape(a, b, "sub");
  return t.push(detail::make_node(Op::Sub, a.id, b.id, a.value() - b.value()));
}

inline Var hadamard(const Var& a, const Var& b) {
  Tape& t = detail::common_tape(a, b, "hadamard");
  detail::require_same_shape(a, b, "hadamard");
  return t.push(
      detail::make_node(Op::Hadamard, a.id, b.id, a.value().cwiseProduct(b.value())));
}

inline Var scale(const Var& a, double c) {
  Tape& t = detail::tape_of(a, "scale");
  Node n = detail::make_node(Op::Scale, a.id, -1, c * a.value());
  n.param = c;
  return t.push(std::move(n));
}

inline Var tanh_act(const Var& a) {
  Tape& t = detail::tape_of(a, "tanh_act");
  return t.push(detail::make_node(Op::Tanh, a.id, -1, a.value().array().tanh().matrix()));
}

inline Var transpose(const Var& a) {
  Tape& t = detail::tape_of(a, "transpose");
  return t.push(detail::make_node(Op::Transpose, a.id, -1, a.value().transpose()));
}

/// Sum of all entries, as a 1x1 Var.
inline Var sum(const Var& a) {
  Tape& t = detail::tape_of(a, "sum");
  return t.push(detail::make_node(Op::Sum, a.id, -1, Matrix::Constant(1, 1, a.value().sum())));
}

/// a + b * 1^T for an r x c matrix a and an r x 1 column b (bias add).
inline Var add_column(const Var& a, const Var& b) {
  Tape& t = detail::common_tape(a, b, "add_column");
  if (b.cols != 1 || b.rows != a.rows) {
    throw DimensionError("add_column: expected " + shape_str(a.rows, 1) + " column, got " +
                         shape_str(b.rows, b.cols));
  }
  Matrix out = a.value();
  out.colwise() += b.value().col(0);
  return t.push(detail::make_node(Op::AddColumn, a.id, b.id, std::move(out)));
}

/// Subtracts each row's mean.
inline Var center_rows(const Var& a) {
  Tape& t = detail::tape_of(a, "center_rows");
  Matrix out = a.value();
  const Vector mean = out.rowwise().mean();
  out.colwise() -= mean;
  return t.push(detail::make_node(Op::CenterRows, a.id, -1, std::move(out)));
}

/// Row i of a, as a 1 x cols Var.
inline Var row(const Var& a, Index i) {
  Tape& t = detail::tape_of(a, "row");
  if (i < 0 || i >= a.rows) {
    throw DimensionError("row: index " + std::to_string(i) + " out of range for " +
                         shape_str(a.rows, a.cols));
  }
  Node n = detail::make_node(Op::Row, a.id, -1, a.value().row(i));
  n.index = i;
  return t.push(std::move(n));
}

/// s * a for a 1x1 Var s.
inline Var mul_scalar(const Var& a, const Var& s) {
  Tape& t = detail::common_tape(a, s, "mul_scalar");
  detail::require_scalar(s, "mul_scalar");
  return t.push(detail::make_node(Op::MulScalar, a.id, s.id, s.scalar() * a.value()));
}

/// a / s for a 1x1 Var s.
inline Var div_scalar(const Var& a, const Var& s) {
  Tape& t = detail::common_tape(a, s, "div_scalar");
  detail::require_scalar(s, "div_scalar");
  if (s.scalar() == 0.0) throw NumericError("div_scalar: division by zero");
  return t.push(detail::make_node(Op::DivScalar, a.id, s.id, a.value() / s.scalar()));
}

/// Frobenius norm, as a 1x1 Var. The gradient at the origin is taken as 0.
inline Var norm(const Var& a) {
  Tape& t = detail::tape_of(a, "norm");
  return t.push(detail::make_node(Op::Norm, a.id, -1, Matrix::Constant(1, 1, a.value().norm())));
}

/// max(s, floor) for a 1x1 Var; gradient passes only where s > floor.
inline Var clamp_min(const Var& s, double floor) {
  Tape& t = detail::tape_of(s, "clamp_min");
  detail::require_scalar(s, "clamp_min");
  Node n = detail::make_node(Op::ClampMin, s.id, -1,
                             Matrix::Constant(1, 1, std::max(s.scalar(), floor)));
  n.param = floor;
  return t.push(std::move(n));
}

/// 1 / sqrt(max(s, floor)) for a 1x1 Var.
inline Var inv_sqrt_floor(const Var& s, double floor) {
  Tape& t = detail::tape_of(s, "inv_sqrt_floor");
  detail::require_scalar(s, "inv_sqrt_floor");
  if (!(floor > 0.0)) throw ConfigError("inv_sqrt_floor: floor must be positive");
  Node n = detail::make_node(Op::InvSqrtFloor, s.id, -1,
                             Matrix::Constant(1, 1, 1.0 / std::sqrt(std::max(s.scalar(), floor))));
  n.param = floor;
  return t.push(std::move(n));
}

inline Var trace(const Var& a) {
  Tape& t = detail::tape_of(a, "trace");
  if (a.rows != a.cols) throw DimensionError("trace: expected square, got " + shape_str(a.rows, a.cols));
  return t.push(detail::make_node(Op::Trace, a.id, -1, Matrix::Constant(1, 1, a.value().trace())));
}

/// Gaussian kernel Gram matrix K(n,m) = exp(-(x_n - x_m)^2 / (2 sigma^2)) of
/// a vector-shaped Var (N x 1 or 1 x N).
inline Var gaussian_gram(const Var& x, double sigma) {
  Tape& t = detail::tape_of(x, "gaussian_gram");
  if (x.rows != 1 && x.cols != 1) {
    throw DimensionError("gaussian_gram: expected a vector, got " + shape_str(x.rows, x.cols));
  }
  if (!(sigma > 0.0)) throw ConfigError("gaussian_gram: sigma must be positive");
  Matrix k = gaussian_kernel_matrix(x.value(), sigma);
  Node node = detail::make_node(Op::GaussianGram, x.id, -1, std::move(k));
  node.param = sigma;
  return t.push(std::move(node));
}

/// Matrix-based Renyi entropy (in bits) of a normalized Gram matrix:
/// H = log2(sum_n lambda_n^alpha) / (1 - alpha), with eigenvalues below
/// `floor` entering linearly (see spectral_power). The backward rule is the
/// spectral-function derivative
/// 1 / ((1-alpha) ln2 sum lambda^alpha) * U diag(alpha lambda^(alpha-1)) U^T,
/// which stays well defined when eigenvalues repeat.
inline Var spectral_entropy_node(const Var& a, double alpha, double floor) {
  Tape& t = detail::tape_of(a, "spectral_entropy_node");
  if (!(alpha > 0.0) || alpha == 1.0) {
    throw ConfigError("spectral_entropy_node: alpha must be positive and != 1");
  }
  if (!(floor > 0.0)) throw ConfigError("spectral_entropy_node: floor must be positive");
  const EigenDecomposition eig = symmetric_eigen_fast(a.value());
  const Index n = eig.values.size();
  if (n > 0 && eig.values[n - 1] < -1e-8) {
    throw PsdError("spectral_entropy_node: eigenvalue " + std::to_string(eig.values[n - 1]) +
                   " below -1e-8");
  }
  const double h = renyi_from_spectrum(eig.values, alpha, floor);
  const double power_sum = std::exp2((1.0 - alpha) * h);
  const double coef = 1.0 / ((1.0 - alpha) * std::log(2.0) * power_sum);

  Node node = detail::make_node(Op::SpectralEntropy, a.id, -1, Matrix::Constant(1, 1, h));
  node.aux = eig.vectors;
  node.aux_vec.resize(n);
  for (Index i = 0; i < n; ++i) node.aux_vec[i] = coef * spectral_power_slope(eig.values[i], alpha, floor);
  node.param = alpha;
  return t.push(std::move(node));
}

// ---------------------------------------------------------------------------
// Backward
// ---------------------------------------------------------------------------

inline Gradients Tape::backward(const Var& loss, double seed) const {
  if (loss.tape != this) throw Error("backward: loss does not belong to this tape");
  if (loss.rows != 1 || loss.cols != 1) {
    throw DimensionError("backward: loss must be 1x1, got " + shape_str(loss.rows, loss.cols));
  }
  std::vector<Matrix> g(nodes_.size());
  g[static_cast<std::size_t>(loss.id)] = Matrix::Constant(1, 1, seed);

  auto acc = [&](int id) -> Matrix& {
    Matrix& m = g[static_cast<std::size_t>(id)];
    if (m.size() == 0) m = Matrix::Zero(node(id).value.rows(), node(id).value.cols());
    return m;
  };

  for (int id = loss.id; id >= 0; --id) {
    if (g[static_cast<std::size_t>(id)].size() == 0) continue;
    const Matrix gout = g[static_cast<std::size_t>(id)];
    const Node& n = node(id);
    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::MatMul:
        acc(n.a) += gout * node(n.b).value.transpose();
        acc(n.b) += node(n.a).value.transpose() * gout;
        break;
      case Op::Add:
        acc(n.a) += gout;
        acc(n.b) += gout;
        break;
      case Op::Sub:
        acc(n.a) += gout;
        acc(n.b) -= gout;
        break;
      case Op::Hadamard:
        acc(n.a) += gout.cwiseProduct(node(n.b).value);
        acc(n.b) += gout.cwiseProduct(node(n.a).value);
        break;
      case Op::Scale:
        acc(n.a) += n.param * gout;
        break;
      case Op::Tanh:
        acc(n.a) += gout.cwiseProduct((1.0 - n.value.array().square()).matrix());
        break;
      case Op::Transpose:
        acc(n.a) += gout.transpose();
        break;
      case Op::Sum:
        acc(n.a).array() += gout(0, 0);
        break;
      case Op::AddColumn:
        acc(n.a) += gout;
        acc(n.b) += gout.rowwise().sum();
        break;
      case Op::CenterRows: {
        Matrix centered = gout;
        const Vector mean = centered.rowwise().mean();
        centered.colwise() -= mean;
        acc(n.a) += centered;
        break;
      }
      case Op::Row:
        acc(n.a).row(n.index) += gout;
        break;
      case Op::MulScalar: {
        const double s = node(n.b).value(0, 0);
        acc(n.a) += s * gout;
        acc(n.b)(0, 0) += gout.cwiseProduct(node(n.a).value).sum();
        break;
      }
      case Op::DivScalar: {
        const double s = node(n.b).value(0, 0);
        acc(n.a) += gout / s;
        acc(n.b)(0, 0) -= gout.cwiseProduct(node(n.a).value).sum() / (s * s);
        break;
      }
      case Op::Norm: {
        const double r = n.value(0, 0);
        if (r > 0.0) acc(n.a) += (gout(0, 0) / r) * node(n.a).value;
        break;
      }
      case Op::ClampMin:
        if (node(n.a).value(0, 0) > n.param) acc(n.a) += gout;
        break;
      case Op::InvSqrtFloor: {
        const double s = node(n.a).value(0, 0);
        if (s > n.param) acc(n.a)(0, 0) += gout(0, 0) * (-0.5) * std::pow(s, -1.5);
        break;
      }
      case Op::Trace:
        acc(n.a).diagonal().array() += gout(0, 0);
        break;
      case Op::GaussianGram: {
        const Matrix& x = node(n.a).value;
        const Index len = x.size();
        const double inv_var = 1.0 / (n.param * n.param);
        const Matrix m = (gout + gout.transpose()).cwiseProduct(n.value);
        Vector xv(len);
        for (Index i = 0; i < len; ++i) xv[i] = x(i);
        const Vector row_sum = m.rowwise().sum();
        const Vector mx = m * xv;
        Matrix& gx = acc(n.a);
        for (Index i = 0; i < len; ++i) gx(i) += -inv_var * (xv[i] * row_sum[i] - mx[i]);
        break;
      }
      case Op::SpectralEntropy: {
        const Matrix weighted = n.aux * n.aux_vec.asDiagonal();
        acc(n.a) += gout(0, 0) * (weighted * n.aux.transpose());
        break;
      }
    }
  }

  for (std::size_t id = 0; id < g.size(); ++id) {
    if (g[id].size() == 0) g[id] = Matrix::Zero(nodes_[id].value.rows(), nodes_[id].value.cols());
  }
  return Gradients(std::move(g));
}

}  // namespace ddica
