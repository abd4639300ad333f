#include "disent/numerics/tape.hpp"

#include <algorithm>

#include "disent/numerics/errors.hpp"

namespace disent {

const Tensor& Var::value() const { return *tape_->node(index_).value; }

bool Var::requires_grad() const { return !tape_->node(index_).grad.empty(); }

std::span<double> Var::grad() const { return tape_->node(index_).grad; }

Var Tape::watch(Tensor& parameter) {
  if (!parameter.requires_grad()) parameter.set_requires_grad(true);
  Node& n = nodes_.emplace_back();
  n.value = &parameter;
  n.grad = parameter.grad();
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  storage_.push_back(std::move(value));
  Node& n = nodes_.emplace_back();
  n.value = &storage_.back();
  return Var(this, nodes_.size() - 1);
}

Var Tape::borrow(const Tensor& value) {
  Node& n = nodes_.emplace_back();
  n.value = &value;
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(std::string_view op, Tensor out, std::initializer_list<Var> inputs,
                 Backward backward) {
  out.check_finite(op);
  const bool tracked = std::any_of(inputs.begin(), inputs.end(),
                                   [](const Var& v) { return v.requires_grad(); });
  storage_.push_back(std::move(out));
  Node& n = nodes_.emplace_back();
  n.value = &storage_.back();
  if (tracked) {
    n.grad_storage.assign(n.value->size(), 0.0);
    n.grad = n.grad_storage;
    n.backward = std::move(backward);
  }
  return Var(this, nodes_.size() - 1);
}

void Tape::backward(const Var& loss) {
  if (loss.tape_ != this) throw ContractError("backward: loss recorded on a different tape");
  if (consumed_) throw ContractError("backward: tape already differentiated");
  if (loss.value().size() != 1) {
    throw DimensionError("backward: loss must be a scalar, got " + loss.shape().str());
  }
  consumed_ = true;
  if (!loss.requires_grad()) return;
  loss.grad()[0] += 1.0;
  for (std::size_t i = loss.index_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backward) {
      n.backward(*n.value, n.grad);
      n.backward = nullptr;
    }
  }
}

}  // namespace disent
