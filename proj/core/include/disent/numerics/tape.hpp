#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <string_view>

#include "disent/numerics/tensor.hpp"

namespace disent {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  // True when gradients flow back through this value.
  bool requires_grad() const;
  // Gradient buffer; empty unless requires_grad().
  std::span<double> grad() const;
  Tape& tape() const { return *tape_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

// Reverse-mode recording for a single forward/backward pass.
//
// Parameters enter through watch() and receive their gradients in their own
// Tensor::grad() buffer. Everything else recorded on the tape is owned by it and
// released with it. A tape and its Vars belong to one thread.
class Tape {
 public:
  // Accumulates d(loss)/d(inputs) given the op's output and d(loss)/d(output).
  using Backward = std::function<void(const Tensor& out, std::span<const double> out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Tracks an external tensor; enables its gradient buffer if needed.
  Var watch(Tensor& parameter);
  // Copies `value` onto the tape; no gradient.
  Var constant(Tensor value);
  // References an external tensor without tracking it. `value` must outlive the tape.
  Var borrow(const Tensor& value);

  // Used by operators: stores `out` and, when any input requires a gradient,
  // the closure that propagates it. Throws NonFiniteError naming `op` if `out`
  // contains NaN/Inf.
  Var record(std::string_view op, Tensor out, std::initializer_list<Var> inputs,
             Backward backward);

  // Seeds d(loss)/d(loss) = 1 and runs every recorded closure in reverse order.
  // A tape can be differentiated once.
  void backward(const Var& loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  friend class Var;

  struct Node {
    const Tensor* value = nullptr;
    std::span<double> grad;
    std::vector<double> grad_storage;
    Backward backward;
  };

  Node& node(std::size_t index) { return nodes_[index]; }
  const Node& node(std::size_t index) const { return nodes_[index]; }

  std::deque<Tensor> storage_;
  std::deque<Node> nodes_;
  bool consumed_ = false;
};

}  // namespace disent
