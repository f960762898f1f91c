#include "s2r/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "s2r/errors.hpp"
#include "s2r/quadrature.hpp"

namespace s2r {

namespace {

// Integrate f over the density support, split at the given interior edges so
// that discontinuities of cell-based policies always land on segment
// boundaries. 1-d only; higher dims use a plain adaptive sweep.
double integrate_over_support(const Env& env, StateId s,
                              const std::function<double(std::span<const double>)>& f,
                              const OracleOptions& opts, double& err_acc) {
    const Density& dens = env.density(s);
    const Box& sup = dens.support();
    QuadOptions q;
    q.tol = opts.tol;
    q.nodes_per_panel = opts.nodes_per_panel;
    q.initial_panels = opts.initial_panels;
    q.max_points = opts.max_points;
    q.throw_on_nonconvergence = false;

    if (sup.dim() != 1) {
        auto res = integrate(sup, f, q);
        if (!res.converged)
            throw NumericsError("oracle quadrature did not converge (state " +
                                std::to_string(s) + ")");
        err_acc += res.error_estimate;
        return res.value;
    }

    std::vector<double> edges{sup.lo[0], sup.hi[0]};
    if (opts.layer_edges) {
        int layer = env.spec().layer_of(s);
        const auto& per_layer = *opts.layer_edges;
        if (static_cast<std::size_t>(layer - 1) < per_layer.size()) {
            for (double e : per_layer[static_cast<std::size_t>(layer - 1)])
                if (e > sup.lo[0] + 1e-12 && e < sup.hi[0] - 1e-12) edges.push_back(e);
        }
    }
    std::sort(edges.begin(), edges.end());
    double total = 0.0;
    const double seg_tol = q.tol / static_cast<double>(edges.size());
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        QuadOptions sq = q;
        sq.tol = seg_tol;
        sq.initial_panels = std::max<std::size_t>(4, opts.initial_panels / edges.size());
        auto res = integrate_1d(edges[i], edges[i + 1],
                                [&](double x) {
                                    double xv[1] = {x};
                                    return f(std::span<const double>(xv, 1));
                                },
                                sq);
        if (!res.converged)
            throw NumericsError("oracle quadrature did not converge (state " +
                                std::to_string(s) + ")");
        total += res.value;
        err_acc += res.error_estimate;
    }
    return total;
}

}  // namespace

ValueReport optimal_value(const Env& env, const OracleOptions& opts) {
    const EnvSpec& spec = env.spec();
    ValueReport report;
    report.v_star.assign(static_cast<std::size_t>(spec.state_count()), 0.0);
    for (int h = spec.horizon(); h >= 1; --h) {
        for (StateId s : spec.layers()[static_cast<std::size_t>(h - 1)]) {
            if (!spec.reachable(s)) continue;
            auto integrand = [&](std::span<const double> x) {
                double best = -1.0;
                for (int a = 0; a < spec.action_count(); ++a) {
                    double q = env.mean_reward(s, x, a);
                    if (h < spec.horizon())
                        q += report.v_star[static_cast<std::size_t>(spec.next_state(s, a))];
                    if (q > best) best = q;
                }
                return env.density(s).eval(x) * best;
            };
            report.v_star[static_cast<std::size_t>(s)] =
                integrate_over_support(env, s, integrand, opts, report.quad_error);
        }
    }
    report.total = report.v_star[static_cast<std::size_t>(spec.initial_state())];
    return report;
}

double policy_value(const Env& env, const OraclePolicy& policy, const OracleOptions& opts,
                    double* err_out) {
    const EnvSpec& spec = env.spec();
    std::vector<double> value(static_cast<std::size_t>(spec.state_count()), 0.0);
    double err = 0.0;
    for (int h = spec.horizon(); h >= 1; --h) {
        for (StateId s : spec.layers()[static_cast<std::size_t>(h - 1)]) {
            if (!spec.reachable(s)) continue;
            auto integrand = [&](std::span<const double> x) {
                double inner = 0.0;
                if (policy.kind == OraclePolicy::Kind::UniformRandom) {
                    for (int a = 0; a < spec.action_count(); ++a) {
                        double q = env.mean_reward(s, x, a);
                        if (h < spec.horizon())
                            q += value[static_cast<std::size_t>(spec.next_state(s, a))];
                        inner += q;
                    }
                    inner /= static_cast<double>(spec.action_count());
                } else {
                    int a = policy.act(s, x);
                    inner = env.mean_reward(s, x, a);
                    if (h < spec.horizon())
                        inner += value[static_cast<std::size_t>(spec.next_state(s, a))];
                }
                return env.density(s).eval(x) * inner;
            };
            value[static_cast<std::size_t>(s)] =
                integrate_over_support(env, s, integrand, opts, err);
        }
    }
    if (err_out) *err_out = err;
    return value[static_cast<std::size_t>(spec.initial_state())];
}

OraclePolicy optimal_policy(const Env& env, const ValueReport& report) {
    OraclePolicy p;
    auto spec = env.spec_ptr();
    auto v = report.v_star;
    p.act = [&env, spec, v](StateId s, std::span<const double> x) {
        int best_a = 0;
        double best = -1.0;
        int h = spec->layer_of(s);
        for (int a = 0; a < spec->action_count(); ++a) {
            double q = env.mean_reward(s, x, a);
            if (h < spec->horizon()) q += v[static_cast<std::size_t>(spec->next_state(s, a))];
            if (q > best) {
                best = q;
                best_a = a;
            }
        }
        return best_a;
    };
    return p;
}

MetaValue expected_meta_value(
    const EnvFamily& family,
    const std::function<OraclePolicy(const Env&, Rng&)>& policy_for, int n_env, Rng rng,
    const OracleOptions& opts) {
    if (n_env < 1) throw InputError("expected_meta_value: n_env must be >= 1");
    MetaValue mv;
    mv.per_env.reserve(static_cast<std::size_t>(n_env));
    double sum = 0.0, sumsq = 0.0;
    for (int j = 0; j < n_env; ++j) {
        Rng env_stream = rng.derive({phase_id(Phase::MetaEval), static_cast<std::uint64_t>(j), 1});
        Env env = family.sample_env(env_stream);
        Rng policy_stream =
            rng.derive({phase_id(Phase::MetaEval), static_cast<std::uint64_t>(j), 2});
        OraclePolicy pol = policy_for(env, policy_stream);
        double v = policy_value(env, pol, opts);
        mv.per_env.push_back(v);
        sum += v;
        sumsq += v * v;
    }
    mv.mean = sum / n_env;
    double var = n_env > 1 ? std::max(0.0, (sumsq - sum * sum / n_env) / (n_env - 1)) : 0.0;
    mv.ci_half = 1.96 * std::sqrt(var / n_env);
    return mv;
}

MetaValue expected_optimal_value(const EnvFamily& family, int n_env, Rng rng,
                                 const OracleOptions& opts) {
    if (n_env < 1) throw InputError("expected_optimal_value: n_env must be >= 1");
    MetaValue mv;
    mv.per_env.reserve(static_cast<std::size_t>(n_env));
    double sum = 0.0, sumsq = 0.0;
    for (int j = 0; j < n_env; ++j) {
        Rng env_stream = rng.derive({phase_id(Phase::MetaEval), static_cast<std::uint64_t>(j), 1});
        Env env = family.sample_env(env_stream);
        double v = optimal_value(env, opts).total;
        mv.per_env.push_back(v);
        sum += v;
        sumsq += v * v;
    }
    mv.mean = sum / n_env;
    double var = n_env > 1 ? std::max(0.0, (sumsq - sum * sum / n_env) / (n_env - 1)) : 0.0;
    mv.ci_half = 1.96 * std::sqrt(var / n_env);
    return mv;
}

}  // namespace s2r
