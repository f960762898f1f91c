#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "s2r/algo.hpp"
#include "s2r/family.hpp"
#include "s2r/kde.hpp"
#include "s2r/predictor.hpp"

namespace s2r {

// State identification produced by DFS-Distribution: canonical paths in
// discovery preorder plus the alias edges for pruned subtrees.
struct DiscoveryMap {
    std::vector<Path> canonical;
    std::vector<std::pair<Path, Path>> aliases;  // alias path -> earlier canonical path
    long node_visits = 0;

    bool is_canonical(const Path& p) const {
        for (const auto& c : canonical)
            if (c == p) return true;
        return false;
    }
    // Resolves through alias edges, replacing the longest aliased prefix
    // until the path is canonical (or unknown, returned as-is).
    Path canonicalize(Path p) const;
};

struct EliminationRecord {
    Path site;
    std::vector<int> survivors_after;
};

struct PhaseEpisodes {
    std::string name;
    std::vector<long> sim_episodes;  // per simulator, delta within the phase
    long real_episodes = 0;
};

struct MetaPolicy {
    int predictor_id = -1;
    std::shared_ptr<const PredictorClass> cls;
    std::vector<DensityVector> sim_density;  // by simulator index
};

// Shared state of one training run; the algorithm steps are free functions
// over it so tests can drive any stage directly.
struct Sim2RealContext {
    Sim2RealContext(const EnvFamily& family, std::shared_ptr<const PredictorClass> cls,
                    ResolvedAlgo algo, std::vector<Env> sims, KernelSpec kernel,
                    Rng master);

    const EnvFamily* family;
    std::shared_ptr<const PredictorClass> cls;
    ResolvedAlgo algo;
    std::vector<Env> sims;
    KernelSpec kernel;
    Rng master;

    DiscoveryMap discovery;
    std::vector<DensityVector> dhat;  // per simulator
    std::vector<int> survivors;      // predictor ids, ascending

    // V-hat cache: canonical path -> [member][simulator]; NaN = absent.
    std::map<Path, std::vector<std::vector<double>>> vhat;
    std::vector<EliminationRecord> elimination_log;

    long consensus_calls = 0, td_calls = 0;
    long root_consensus_calls = 0, root_td_calls = 0;
    long max_consensus_per_root = 0, max_td_per_root = 0;
    double v_star_hat = 0.0;
    int iterations = 0;
    std::uint64_t draw_epoch = 0;
    std::vector<std::string> anomalies;

    std::vector<double>& vhat_slot(const Path& canonical_path, int member);
};

// Training pipeline steps, in invocation order.
void dfs_distribution(Sim2RealContext& ctx);
bool consensus(Sim2RealContext& ctx, const Path& p, double eps_test, double delta_c);
void td_eliminate(Sim2RealContext& ctx, const Path& p, double delta_td);
void dfs_learn(Sim2RealContext& ctx, const Path& p, double delta_dl);
// dfs_learn plus per-root call-count bookkeeping (the H*S / H*S*A bounds).
void dfs_learn_root(Sim2RealContext& ctx, const Path& p, double delta_dl);
double estimate_vstar(Sim2RealContext& ctx);
MetaPolicy learn_on_simulators(Sim2RealContext& ctx);

struct Sim2RealResult {
    MetaPolicy policy;
    DiscoveryMap discovery;
    std::vector<DensityVector> sim_density;
    double v_star_hat = 0.0;
    int iterations = 0;
    std::vector<int> final_survivors;
    std::vector<EliminationRecord> elimination_log;
    std::vector<PhaseEpisodes> phases;
    std::vector<long> sim_episodes_total;
    long consensus_calls = 0, td_calls = 0;
    long max_consensus_per_root = 0, max_td_per_root = 0;
    long dfs_node_visits = 0;
    long sim_episode_budget = 0;  // structural bound from the resolved counts
    std::vector<std::string> anomalies;
    ResolvedAlgo algo;
    std::uint64_t seed = 0;
};

// Resolves the constants, samples the B simulators, and assembles a context
// ready for the algorithm steps.
Sim2RealContext make_context(const EnvFamily& family,
                             std::shared_ptr<const PredictorClass> cls,
                             const AlgoConfig& cfg, std::uint64_t seed);

// Algorithm 1 end to end on freshly sampled simulators.
Sim2RealResult sim2real(const EnvFamily& family, std::shared_ptr<const PredictorClass> cls,
                        const AlgoConfig& cfg, std::uint64_t seed);

struct DeployResult {
    BoundPredictor policy;
    DensityVector d_real;
    long real_episodes = 0;
    int canonical_count = 0;
    bool firewall_ok = false;
};

// Algorithm 7: feedback-free density estimation in the real environment at
// every canonical path, then the meta-policy bound to those estimates.
DeployResult deploy(const MetaPolicy& meta, const Env& real_env,
                    const DiscoveryMap& discovery, const ResolvedAlgo& algo,
                    const KernelSpec& kernel, Rng master);

}  // namespace s2r
