#pragma once

#include <functional>
#include <span>

#include "xalma/graph.hpp"

namespace xalma {

// Finite-difference verification of reverse-mode gradients.
//
// `f` must rebuild the scalar objective on the given graph from the current
// contents of `params` (define-by-run), deterministically. Returns the max
// over all parameter coordinates of
//   |analytic - central_difference| / max(1, |analytic|, |central_difference|)
// using central differences with step eps. eps must lie in (0, 1e-3].
// Throws ContractError on a bad eps and DomainError naming the coordinate if
// either gradient is non-finite.
double grad_check(const std::function<Value(Graph&)>& f,
                  std::span<Tensor* const> params, double eps);

}  // namespace xalma
