#include "s2r/algo.hpp"

#include <cmath>

#include "s2r/errors.hpp"

namespace s2r {

double ResolvedAlgo::eps_test(int path_len) const {
    double inner = std::max(0.0, static_cast<double>(H - path_len - 2));
    return (25.0 * inner + 21.0) * std::sqrt(static_cast<double>(A)) * phi;
}

long ResolvedAlgo::n_test(double delta_c) const {
    double v = 2.0 * std::log(2.0 * static_cast<double>(F) * B / delta_c) / (phi * phi);
    return std::max(1L, static_cast<long>(std::ceil(v)));
}

long ResolvedAlgo::n_train(double delta_td) const {
    double v = 2.0 * std::log(4.0 * static_cast<double>(F) * B / delta_td) / (phi * phi);
    return std::max(1L, static_cast<long>(std::ceil(v)));
}

double ResolvedAlgo::elimination_slack(long n_train_used, double delta_td) const {
    double lead = slack_16phi ? 16.0 * phi : 8.0 * phi;
    return 2.0 * phi * phi + lead +
           (22.0 / static_cast<double>(n_train_used)) *
               std::log(2.0 * static_cast<double>(F) * B / delta_td);
}

double ResolvedAlgo::delta_refine() const {
    double d6 = delta_learn_on_sim();
    return eps * d6 / (48.0 * H * H * S * std::log(3.0 * H * S / d6));
}

long solve_n_dist(double c_l, double c_dist, double alpha, int d, double phi, long B, int H,
                  int S, int A, double delta, long cap) {
    auto satisfied = [&](long n) {
        double nn = static_cast<double>(n);
        double lhs = c_l * c_dist * std::pow(1.0 / nn, alpha / (2.0 * alpha + d)) *
                     std::sqrt(std::log(nn) + std::log((B + 1.0) * H * S * A / delta));
        return lhs <= phi / 2.0;
    };
    long lo = 1, hi = 1;
    while (hi < cap && !satisfied(hi)) hi *= 2;
    if (!satisfied(hi)) return cap;  // formula value beyond any runnable size
    while (lo < hi) {
        long mid = lo + (hi - lo) / 2;
        if (satisfied(mid))
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

ResolvedAlgo resolve_algo(const AlgoConfig& cfg, int H, int A, int S, long F, double alpha,
                          int d, double zeta) {
    if (cfg.eps <= 0.0 || cfg.eps > 1.0) throw ConfigError("resolve_algo: eps out of (0,1]");
    if (cfg.delta <= 0.0 || cfg.delta > 1.0)
        throw ConfigError("resolve_algo: delta out of (0,1]");
    if (cfg.desk.count_scale <= 0.0 || cfg.desk.count_scale > 1.0)
        throw ConfigError("resolve_algo: desk count_scale out of (0,1]");
    ResolvedAlgo r;
    r.H = H;
    r.A = A;
    r.S = S;
    r.F = F;
    r.eps = cfg.eps;
    r.delta = cfg.delta;
    r.alpha = alpha;
    r.d = d;
    r.zeta = zeta;
    r.c_l = cfg.c_l;
    r.c_dist = cfg.c_dist;
    r.slack_16phi = cfg.slack_16phi;
    r.workers = cfg.workers;

    r.phi_nominal = cfg.eps / (500.0 * H * H * std::sqrt(static_cast<double>(A)));
    r.phi = r.phi_nominal / std::sqrt(cfg.desk.count_scale);
    if (cfg.desk.count_scale != 1.0)
        r.derivation_log.push_back("desk count_scale=" + std::to_string(cfg.desk.count_scale) +
                                   " boosts phi from " + std::to_string(r.phi_nominal) +
                                   " to " + std::to_string(r.phi));

    double b_formula = (2.0 / (r.phi * r.phi)) *
                       std::log(256.0 * H * H * S * static_cast<double>(F) *
                                std::log(4.0 * H * S / cfg.delta) / (cfg.eps * cfg.delta));
    if (cfg.desk.b_override) {
        r.B = *cfg.desk.b_override;
        r.derivation_log.push_back("B overridden to " + std::to_string(r.B) +
                                   " (formula value " + std::to_string(b_formula) + ")");
    } else {
        r.B = static_cast<long>(std::ceil(std::min(b_formula, 9e15)));
    }
    if (r.B < 1) throw ConfigError("resolve_algo: B must be >= 1");

    r.eps_dist = zeta / 2.0;
    long n_dist_formula = solve_n_dist(cfg.c_l, cfg.c_dist, alpha, d, r.phi, r.B, H, S, A,
                                       r.delta / 4.0);
    if (cfg.desk.n_dist_override) {
        r.n_dist = std::max(1L, *cfg.desk.n_dist_override);
        r.derivation_log.push_back("n_dist overridden to " + std::to_string(r.n_dist) +
                                   " (condition value " + std::to_string(n_dist_formula) +
                                   ")");
    } else {
        r.n_dist = n_dist_formula;
    }
    r.bandwidth_h =
        std::pow(static_cast<double>(r.n_dist), -1.0 / (2.0 * alpha + static_cast<double>(d)));

    r.eps_demand = cfg.eps / 2.0;
    double d6 = r.delta_learn_on_sim();
    double n1_formula = 32.0 * std::log(6.0 * H * S * r.B / d6) / (cfg.eps * cfg.eps);
    r.n_1 = std::max(1L, static_cast<long>(std::ceil(cfg.desk.n1_scale * n1_formula)));
    if (cfg.desk.n1_scale != 1.0)
        r.derivation_log.push_back("n_1 scaled by " + std::to_string(cfg.desk.n1_scale) +
                                   " to " + std::to_string(r.n_1));
    double n2_formula = 8.0 * std::log(3.0 * S * H / d6) / (cfg.eps * r.B);
    r.n_2 = std::max(1L, static_cast<long>(std::ceil(cfg.desk.n2_scale * n2_formula)));
    if (cfg.desk.n2_scale != 1.0)
        r.derivation_log.push_back("n_2 scaled by " + std::to_string(cfg.desk.n2_scale) +
                                   " to " + std::to_string(r.n_2));
    return r;
}

}  // namespace s2r
