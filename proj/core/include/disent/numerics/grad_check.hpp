#pragma once

#include <functional>
#include <vector>

#include "disent/numerics/tape.hpp"

namespace disent {

// A scalar-valued function of tape variables, evaluated on the given tape.
using ScalarFunction = std::function<Var(Tape&, const std::vector<Var>&)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_input = 0;
  std::size_t worst_element = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradCheckOptions {
  double step = 1e-6;
  // Relative errors are computed against max(|analytic|, |numeric|, floor) so
  // that gradients indistinguishable from zero do not divide by noise. With
  // h = 1e-6 the central difference of an O(1) loss carries roughly 1e-10 of
  // rounding noise, so entries below the floor are held to 1e-8 absolute.
  double floor = 1e-4;
};

// Compares tape gradients of `f` against central finite differences over every
// element of every input, returning the worst relative error found.
GradCheckResult grad_check(const ScalarFunction& f, const std::vector<Tensor>& inputs,
                           GradCheckOptions options = {});

}  // namespace disent
