#pragma once

#include <functional>
#include <vector>

#include "s2r/family.hpp"
#include "s2r/romdp.hpp"

namespace s2r {

struct ValueReport {
    std::vector<double> v_star;  // per state id; zero for unreachable states
    double total = 0.0;          // V* at the initial state
    double quad_error = 0.0;     // accumulated quadrature error estimate
};

struct OracleOptions {
    double tol = 1e-6;
    std::size_t nodes_per_panel = 8;
    std::size_t initial_panels = 16;
    std::size_t max_points = 1 << 20;
    // Sorted interior breakpoints per layer (1-based index - 1); integration
    // segments align to these so piecewise-constant policies stay exact.
    const std::vector<std::vector<double>>* layer_edges = nullptr;
};

// Exact optimal values by backward induction over the layered transition
// graph, expectations by adaptive Gauss-Legendre over each density support.
ValueReport optimal_value(const Env& env, const OracleOptions& opts = {});

// Oracle-side policies may see the underlying state; learner policies wrap
// as (s, x) -> pi(x).
struct OraclePolicy {
    enum class Kind { Deterministic, UniformRandom } kind = Kind::Deterministic;
    std::function<int(StateId, std::span<const double>)> act;

    static OraclePolicy reactive(ReactivePolicy p) {
        OraclePolicy out;
        out.act = [p = std::move(p)](StateId, std::span<const double> x) { return p(x); };
        return out;
    }
    static OraclePolicy uniform_random() {
        OraclePolicy out;
        out.kind = Kind::UniformRandom;
        return out;
    }
};

double policy_value(const Env& env, const OraclePolicy& policy,
                    const OracleOptions& opts = {}, double* err_out = nullptr);

// Greedy policy induced by the optimal values (ties to the lowest action).
OraclePolicy optimal_policy(const Env& env, const ValueReport& report);

struct MetaValue {
    double mean = 0.0;
    double ci_half = 0.0;  // 1.96 * sd / sqrt(n)
    std::vector<double> per_env;
};

// Monte Carlo estimate of E_theta V_theta(policy_for(env)); the factory gets
// the sampled environment and a derived stream for any sampling it needs
// (for instance a feedback-free deployment).
MetaValue expected_meta_value(
    const EnvFamily& family,
    const std::function<OraclePolicy(const Env&, Rng&)>& policy_for, int n_env, Rng rng,
    const OracleOptions& opts = {});

// Monte Carlo estimate of E_theta V*_theta over the prior.
MetaValue expected_optimal_value(const EnvFamily& family, int n_env, Rng rng,
                                 const OracleOptions& opts = {});

}  // namespace s2r
