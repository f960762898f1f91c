#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "s2r/geometry.hpp"
#include "s2r/grid.hpp"
#include "s2r/rng.hpp"

namespace s2r {

using StateId = int;

// Shared skeleton of a deterministic, layered, finite-horizon ROMDP:
// everything an environment family keeps fixed across parameters.
class EnvSpec {
public:
    EnvSpec(int horizon, int action_count,
            std::vector<std::vector<StateId>> layers,
            std::vector<std::vector<StateId>> transition, StateId initial_state,
            int obs_dim, double obs_bound, std::vector<Box> layer_boxes);

    int horizon() const { return horizon_; }
    int action_count() const { return actions_; }
    StateId initial_state() const { return initial_; }
    int obs_dim() const { return obs_dim_; }
    double obs_bound() const { return obs_bound_; }

    const std::vector<std::vector<StateId>>& layers() const { return layers_; }
    const Box& layer_box(int layer) const { return boxes_[static_cast<std::size_t>(layer - 1)]; }
    int layer_of(StateId s) const { return layer_of_[static_cast<std::size_t>(s)]; }
    StateId next_state(StateId s, int action) const;
    int state_count() const { return static_cast<int>(layer_of_.size()); }

    // S in the sample-size formulas: the largest layer.
    int max_layer_size() const;
    bool reachable(StateId s) const { return reachable_[static_cast<std::size_t>(s)]; }
    // xi: reachable states only; unreachable states are excluded.
    int reachable_count() const;

    // Layer containing x, or 0 when x lies in no layer box.
    int layer_of_point(std::span<const double> x) const;

private:
    int horizon_;
    int actions_;
    std::vector<std::vector<StateId>> layers_;
    std::vector<std::vector<StateId>> transition_;
    StateId initial_;
    int obs_dim_;
    double obs_bound_;
    std::vector<Box> boxes_;
    std::vector<int> layer_of_;
    std::vector<bool> reachable_;
};

// Evaluable observation density with enough structure for rejection sampling.
class Density {
public:
    virtual ~Density() = default;
    virtual double eval(std::span<const double> x) const = 0;
    virtual const Box& support() const = 0;
    virtual double sup_bound() const = 0;
};

using RewardMeanFn = std::function<double(StateId, std::span<const double>, int)>;

struct EpisodeCounter {
    std::atomic<long> episodes{0};
    std::atomic<long> reward_reads{0};
};

// One concrete environment: the shared skeleton plus parameter-determined
// densities and rewards. Immutable after construction; counters are atomic.
class Env {
public:
    Env(std::shared_ptr<const EnvSpec> spec,
        std::vector<std::shared_ptr<const Density>> obs_density,
        RewardMeanFn reward_mean, std::vector<double> theta);

    const EnvSpec& spec() const { return *spec_; }
    std::shared_ptr<const EnvSpec> spec_ptr() const { return spec_; }
    const Density& density(StateId s) const { return *densities_[static_cast<std::size_t>(s)]; }

    // Opaque to learners; tests and oracles may look.
    const std::vector<double>& theta() const { return theta_; }

    double mean_reward(StateId s, std::span<const double> x, int a) const {
        counter_->reward_reads.fetch_add(1, std::memory_order_relaxed);
        return reward_mean_(s, x, a);
    }
    // Bernoulli around the mean keeps rewards in {0,1} subset of [0,1].
    double sample_reward(StateId s, std::span<const double> x, int a, Rng& rng) const {
        double m = mean_reward(s, x, a);
        return rng.bernoulli(m) ? 1.0 : 0.0;
    }

    long episodes() const { return counter_->episodes.load(); }
    long reward_reads() const { return counter_->reward_reads.load(); }
    void count_episodes(long n) const { counter_->episodes.fetch_add(n, std::memory_order_relaxed); }

    // Twin sharing the skeleton and densities, with replaced rewards and fresh
    // counters; the sentinel tool for feedback-firewall tests.
    Env with_rewards(RewardMeanFn replacement) const {
        return Env(spec_, densities_, std::move(replacement), theta_);
    }

private:
    std::shared_ptr<const EnvSpec> spec_;
    std::vector<std::shared_ptr<const Density>> densities_;
    RewardMeanFn reward_mean_;
    std::vector<double> theta_;
    std::shared_ptr<EpisodeCounter> counter_;
};

struct TrajectoryStep {
    StateId state;  // internal; sealed from learner-facing interfaces
    std::vector<double> obs;
    int action;
    std::optional<double> reward;  // absent when feedback is hidden
};

struct Trajectory {
    std::vector<TrajectoryStep> steps;
    bool feedback_visible = true;
};

using ReactivePolicy = std::function<int(std::span<const double>)>;

// Unique state reached by executing p from the initial state.
StateId terminal_state(const EnvSpec& spec, const Path& p);

// One draw from the state's observation density, by rejection sampling
// against a uniform envelope on the density's support box. Counts as one
// episode.
std::vector<double> sample_observation(const Env& env, StateId s, Rng& rng,
                                       long proposal_cap = 1000000);

// Full H-step episode under a reactive policy. With feedback=false no reward
// is sampled or stored and the reward channel is never touched.
Trajectory run_episode(const Env& env, const ReactivePolicy& policy, Rng& rng,
                       bool feedback = true);

// n observations of the terminal state of p; each costs one episode.
std::vector<std::vector<double>> collect_at_path(const Env& env, const Path& p,
                                                 long n, Rng& rng);

struct Transition {
    std::vector<double> obs;
    int action;
    double reward;
};

// n (x, a, r) triples at the terminal state of p with a drawn uniformly;
// the draw pattern TD-Eliminate consumes. Each triple costs one episode.
std::vector<Transition> collect_transitions(const Env& env, const Path& p, long n,
                                            Rng& rng);

// Default evaluation lattice of a layer box: spacing C_b / 64 per axis.
inline Lattice layer_lattice(const EnvSpec& spec, int layer) {
    return Lattice::with_spacing(spec.layer_box(layer), spec.obs_bound() / 64.0);
}

}  // namespace s2r
