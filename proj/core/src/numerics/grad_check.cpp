#include "disent/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace disent {
namespace {

double evaluate(const ScalarFunction& f, const std::vector<Tensor>& inputs) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const Tensor& t : inputs) vars.push_back(tape.borrow(t));
  return f(tape, vars).value().item();
}

}  // namespace

GradCheckResult grad_check(const ScalarFunction& f, const std::vector<Tensor>& inputs,
                           GradCheckOptions options) {
  std::vector<Tensor> work;
  work.reserve(inputs.size());
  for (const Tensor& t : inputs) work.push_back(Tensor(t.shape(), {t.values().begin(), t.values().end()}));

  {
    Tape tape;
    std::vector<Var> vars;
    for (Tensor& t : work) vars.push_back(tape.watch(t));
    tape.backward(f(tape, vars));
  }

  std::vector<Tensor> probe;
  probe.reserve(inputs.size());
  for (const Tensor& t : inputs) probe.push_back(Tensor(t.shape(), {t.values().begin(), t.values().end()}));

  GradCheckResult result;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    for (std::size_t j = 0; j < probe[i].size(); ++j) {
      const double original = probe[i][j];
      probe[i][j] = original + options.step;
      const double up = evaluate(f, probe);
      probe[i][j] = original - options.step;
      const double down = evaluate(f, probe);
      probe[i][j] = original;

      const double numeric = (up - down) / (2.0 * options.step);
      const double analytic = work[i].grad()[j];
      const double scale = std::max({std::abs(analytic), std::abs(numeric), options.floor});
      const double err = std::abs(analytic - numeric) / scale;
      if (err > result.max_relative_error) {
        result = {err, i, j, analytic, numeric};
      }
    }
  }
  return result;
}

}  // namespace disent
