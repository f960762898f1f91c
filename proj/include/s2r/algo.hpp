#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace s2r {

// Desk-scale knobs. The theoretical counts are astronomically large for any
// nontrivial (eps, delta, F); count_scale < 1 shrinks them while keeping
// every formula structurally intact: scaling n_test/n_train by lambda is the
// same as running the formulas at phi_eff = phi / sqrt(lambda), and all
// thresholds (eps_test schedule, elimination slack) follow phi_eff so the
// concentration arguments stay aligned. B and n_dist carry their own
// overrides because their formulas dominate everything else. Every override
// is logged into the run report.
struct DeskScale {
    double count_scale = 1.0;
    std::optional<int> b_override;
    std::optional<long> n_dist_override;
    double n1_scale = 1.0;
    double n2_scale = 1.0;
};

struct AlgoConfig {
    double eps = 0.1;
    double delta = 0.2;
    double c_l = 1.0;      // Lipschitz constant used in the n_dist condition
    double c_dist = 1.0;   // KDE rate constant; unknown in practice, config default 1
    bool slack_16phi = false;  // appendix-derived 16*phi instead of the listing's 8*phi
    DeskScale desk;
    int workers = 1;
    std::uint64_t seed = 0;
};

// Every constant of the training algorithms, resolved for one environment
// family (H, A, S) and predictor class size F.
struct ResolvedAlgo {
    int H = 0, A = 0, S = 0;
    long F = 0;
    double eps = 0.0, delta = 0.0;
    double alpha = 0.0;
    int d = 0;
    double zeta = 0.0;
    double c_l = 1.0, c_dist = 1.0;

    double phi = 0.0;        // effective phi (after desk scaling)
    double phi_nominal = 0.0;  // eps / (500 H^2 sqrt(A)), before desk scaling
    long B = 0;
    long n_dist = 0;
    double bandwidth_h = 0.0;  // n_dist^{-1/(2 alpha + d)}
    double eps_dist = 0.0;     // zeta / 2
    double eps_demand = 0.0;   // eps / 2
    long n_1 = 0;
    long n_2 = 0;
    bool slack_16phi = false;
    int workers = 1;
    std::vector<std::string> derivation_log;

    // eps_test schedule from the recursion depth; the inner factor is
    // clamped at zero at the deepest layer.
    double eps_test(int path_len) const;
    long n_test(double delta_c) const;    // 2 log(2FB/delta) / phi^2
    long n_train(double delta_td) const;  // 2 log(4FB/delta) / phi^2
    double elimination_slack(long n_train_used, double delta_td) const;

    // Delta splits used by the recursion.
    double delta_dfs_distribution() const { return delta / 4.0; }
    double delta_dfs_learn() const { return delta / 4.0; }
    double delta_learn_on_sim() const { return delta / 4.0; }
    double delta_consensus(double delta_dl) const { return (delta_dl / 2.0) / (H * S * A); }
    double delta_td(double delta_dl) const { return (delta_dl / 2.0) / (H * S); }
    double delta_refine() const;  // Learn-on-Simulators line 9
};

// Derives phi, B, n_dist, n_1, n_2 from the nominal formulas with the desk
// overrides applied and logged.
ResolvedAlgo resolve_algo(const AlgoConfig& cfg, int H, int A, int S, long F, double alpha,
                          int d, double zeta);

// Smallest n satisfying the n_dist condition
//   C_L C_dist n^{-alpha/(2 alpha + d)} sqrt(log n + log((B+1)HSA/delta)) <= phi/2.
long solve_n_dist(double c_l, double c_dist, double alpha, int d, double phi, long B, int H,
                  int S, int A, double delta, long cap = 1000000000000L);

}  // namespace s2r
