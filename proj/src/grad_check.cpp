#include "xalma/grad_check.hpp"

#include <cmath>
#include <string>

namespace xalma {

double grad_check(const std::function<Value(Graph&)>& f,
                  std::span<Tensor* const> params, double eps) {
  if (!(eps > 0.0) || eps > 1e-3) {
    throw ContractError("grad_check: eps must be in (0, 1e-3], got " +
                        std::to_string(eps));
  }

  // Analytic pass.
  for (Tensor* p : params) p->zero_grad();
  {
    Graph g;
    Value root = f(g);
    g.backward(root);
  }
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (Tensor* p : params) {
    p->ensure_grad();
    analytic.push_back(p->grad);
  }

  auto eval = [&]() {
    Graph g;
    return f(g).scalar();
  };

  double worst = 0.0;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& t = *params[pi];
    for (size_t i = 0; i < t.data.size(); ++i) {
      double keep = t.data[i];
      t.data[i] = keep + eps;
      double fp = eval();
      t.data[i] = keep - eps;
      double fm = eval();
      t.data[i] = keep;
      double numeric = (fp - fm) / (2.0 * eps);
      double a = analytic[pi][i];
      if (!std::isfinite(a) || !std::isfinite(numeric)) {
        throw DomainError("grad_check: non-finite gradient at param " +
                          std::to_string(pi) + " coord " + std::to_string(i) +
                          " (analytic=" + std::to_string(a) +
                          ", numeric=" + std::to_string(numeric) + ")");
      }
      double rel = std::fabs(a - numeric) /
                   std::max({1.0, std::fabs(a), std::fabs(numeric)});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace xalma
