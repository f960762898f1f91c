#include "s2r/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "s2r/errors.hpp"

namespace s2r {

namespace {

GaussRule compute_rule(std::size_t n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    // Newton on P_n from the Chebyshev-angle initial guess.
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            if (n == 1) p1 = x;
            for (std::size_t m = 2; m <= n; ++m) {
                double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

std::mutex g_rules_mutex;
std::map<std::size_t, GaussRule> g_rules;

double sweep(const Box& box, const std::function<double(std::span<const double>)>& f,
             std::size_t panels_per_axis, const GaussRule& rule,
             std::size_t& evaluations) {
    const std::size_t d = box.dim();
    const std::size_t m = rule.nodes.size();
    const std::size_t per_axis = panels_per_axis * m;
    // Precompute per-axis sample coordinates and weights.
    std::vector<std::vector<double>> coords(d), wts(d);
    for (std::size_t k = 0; k < d; ++k) {
        coords[k].resize(per_axis);
        wts[k].resize(per_axis);
        const double width = (box.hi[k] - box.lo[k]) / static_cast<double>(panels_per_axis);
        for (std::size_t p = 0; p < panels_per_axis; ++p) {
            const double a = box.lo[k] + width * static_cast<double>(p);
            for (std::size_t j = 0; j < m; ++j) {
                coords[k][p * m + j] = a + 0.5 * width * (rule.nodes[j] + 1.0);
                wts[k][p * m + j] = 0.5 * width * rule.weights[j];
            }
        }
    }
    std::vector<std::size_t> idx(d, 0);
    std::vector<double> x(d);
    double total = 0.0;
    const std::size_t count = [&] {
        std::size_t c = 1;
        for (std::size_t k = 0; k < d; ++k) c *= per_axis;
        return c;
    }();
    for (std::size_t flat = 0; flat < count; ++flat) {
        double w = 1.0;
        std::size_t rem = flat;
        for (std::size_t k = d; k-- > 0;) {
            idx[k] = rem % per_axis;
            rem /= per_axis;
            x[k] = coords[k][idx[k]];
            w *= wts[k][idx[k]];
        }
        total += w * f(x);
    }
    evaluations += count;
    return total;
}

}  // namespace

const GaussRule& gauss_legendre(std::size_t order) {
    if (order == 0) throw InputError("gauss_legendre: order must be >= 1");
    std::lock_guard<std::mutex> lock(g_rules_mutex);
    auto it = g_rules.find(order);
    if (it == g_rules.end()) it = g_rules.emplace(order, compute_rule(order)).first;
    return it->second;
}

QuadResult integrate(const Box& box,
                     const std::function<double(std::span<const double>)>& f,
                     const QuadOptions& opts) {
    const GaussRule& rule = gauss_legendre(opts.nodes_per_panel);
    QuadResult res;
    std::size_t panels = opts.initial_panels;
    double prev = sweep(box, f, panels, rule, res.evaluations);
    for (;;) {
        panels *= 2;
        std::size_t cost = 1;
        for (std::size_t k = 0; k < box.dim(); ++k) cost *= panels * opts.nodes_per_panel;
        if (res.evaluations + cost > opts.max_points) {
            res.value = prev;
            res.error_estimate = res.error_estimate == 0.0 ? opts.tol : res.error_estimate;
            res.converged = false;
            break;
        }
        double cur = sweep(box, f, panels, rule, res.evaluations);
        res.error_estimate = std::fabs(cur - prev);
        res.value = cur;
        if (res.error_estimate < opts.tol) {
            res.converged = true;
            break;
        }
        prev = cur;
    }
    if (!res.converged && opts.throw_on_nonconvergence)
        throw NumericsError("quadrature did not converge within refinement cap");
    return res;
}

QuadResult integrate_1d(double lo, double hi, const std::function<double(double)>& f,
                        const QuadOptions& opts) {
    Box box{{lo}, {hi}};
    return integrate(box, [&f](std::span<const double> x) { return f(x[0]); }, opts);
}

}  // namespace s2r
