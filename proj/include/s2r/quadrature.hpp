#pragma once

#include <functional>
#include <span>
#include <vector>

#include "s2r/geometry.hpp"

namespace s2r {

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Cached per order; thread-safe after first use of a given order.
const GaussRule& gauss_legendre(std::size_t order);

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = false;
    std::size_t evaluations = 0;
};

struct QuadOptions {
    double tol = 1e-6;
    std::size_t nodes_per_panel = 8;
    std::size_t initial_panels = 64;   // per axis; keep multiple of cell count
    std::size_t max_points = 1 << 20;  // refinement cap (total evaluations)
    bool throw_on_nonconvergence = false;
};

// Composite Gauss-Legendre over a box, panels doubled per axis until two
// successive estimates agree to tol. f takes a point of box.dim() coords.
QuadResult integrate(const Box& box,
                     const std::function<double(std::span<const double>)>& f,
                     const QuadOptions& opts = {});

// 1-d convenience.
QuadResult integrate_1d(double lo, double hi, const std::function<double(double)>& f,
                        const QuadOptions& opts = {});

}  // namespace s2r
