#pragma once

// Central finite-difference oracle used by the gradient tests. Kept
// independent of the autograd internals: it only calls the function under
// test and compares scalars.

#include <cmath>
#include <functional>
#include <vector>

#include "glead/autograd.hpp"

namespace gradcheck {

using glead::Tensor;
using glead::Var;

struct Report {
    double max_rel_err = 0;
    double worst_analytic = 0;
    double worst_numeric = 0;
    bool ok(double tol) const { return max_rel_err <= tol; }
};

// f maps leaf Vars (requires_grad) to a scalar Var.
inline Report check(const std::function<Var<double>(std::vector<Var<double>>&)>& f,
                    std::vector<Tensor<double>> inputs, double h = 1e-5) {
    std::vector<Var<double>> leaves;
    for (auto& t : inputs) leaves.emplace_back(t.clone(), true);
    Var<double> out = f(leaves);
    std::vector<Tensor<double>> analytic = glead::grad(out, leaves);

    Report rep;
    for (size_t vi = 0; vi < inputs.size(); ++vi) {
        for (int64_t i = 0; i < inputs[vi].numel(); ++i) {
            // Probes keep grad mode on: the function under test may take
            // gradients internally (R1-style penalties).
            auto eval = [&](double delta) {
                std::vector<Var<double>> probe;
                for (size_t k = 0; k < inputs.size(); ++k) {
                    Tensor<double> t = inputs[k].clone();
                    if (k == vi) t.mutable_data()[i] += delta;
                    probe.emplace_back(std::move(t), true);
                }
                return f(probe).item();
            };
            double step = h * std::max(1.0, std::abs(inputs[vi].data()[i]));
            double numeric = (eval(step) - eval(-step)) / (2 * step);
            double a = analytic[vi].data()[i];
            double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
            double rel = std::abs(a - numeric) / denom;
            if (std::abs(a - numeric) < 1e-10) rel = 0;  // both effectively zero
            if (rel > rep.max_rel_err) {
                rep.max_rel_err = rel;
                rep.worst_analytic = a;
                rep.worst_numeric = numeric;
            }
        }
    }
    return rep;
}

}  // namespace gradcheck
