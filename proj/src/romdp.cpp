#include "s2r/romdp.hpp"

#include <algorithm>
#include <deque>

#include "s2r/errors.hpp"

namespace s2r {

EnvSpec::EnvSpec(int horizon, int action_count,
                 std::vector<std::vector<StateId>> layers,
                 std::vector<std::vector<StateId>> transition, StateId initial_state,
                 int obs_dim, double obs_bound, std::vector<Box> layer_boxes)
    : horizon_(horizon),
      actions_(action_count),
      layers_(std::move(layers)),
      transition_(std::move(transition)),
      initial_(initial_state),
      obs_dim_(obs_dim),
      obs_bound_(obs_bound),
      boxes_(std::move(layer_boxes)) {
    if (horizon_ < 1) throw ConstructionError("EnvSpec: horizon must be >= 1");
    if (actions_ < 1) throw ConstructionError("EnvSpec: need at least one action");
    if (static_cast<int>(layers_.size()) != horizon_)
        throw ConstructionError("EnvSpec: layer count must equal horizon");
    if (static_cast<int>(boxes_.size()) != horizon_)
        throw ConstructionError("EnvSpec: need one observation box per layer");

    int total = 0;
    for (const auto& l : layers_) total += static_cast<int>(l.size());
    layer_of_.assign(static_cast<std::size_t>(total), -1);
    for (int h = 0; h < horizon_; ++h) {
        for (StateId s : layers_[static_cast<std::size_t>(h)]) {
            if (s < 0 || s >= total) throw ConstructionError("EnvSpec: bad state id");
            if (layer_of_[static_cast<std::size_t>(s)] != -1)
                throw ConstructionError("EnvSpec: state in two layers");
            layer_of_[static_cast<std::size_t>(s)] = h + 1;
        }
    }
    for (int v : layer_of_)
        if (v == -1) throw ConstructionError("EnvSpec: state missing from layers");
    if (layer_of_[static_cast<std::size_t>(initial_)] != 1)
        throw ConstructionError("EnvSpec: initial state must sit in layer 1");
    if (static_cast<int>(transition_.size()) != total)
        throw ConstructionError("EnvSpec: transition table must cover every state");

    // Layered property: T maps layer h to layer h+1 and is total below H.
    for (StateId s = 0; s < total; ++s) {
        int h = layer_of_[static_cast<std::size_t>(s)];
        const auto& row = transition_[static_cast<std::size_t>(s)];
        if (h < horizon_) {
            if (static_cast<int>(row.size()) != actions_)
                throw ConstructionError("EnvSpec: transition row incomplete");
            for (StateId t : row) {
                if (t < 0 || t >= total || layer_of_[static_cast<std::size_t>(t)] != h + 1)
                    throw ConstructionError("EnvSpec: transition leaves the next layer");
            }
        } else if (!row.empty()) {
            throw ConstructionError("EnvSpec: terminal layer states take no transition");
        }
    }

    for (const auto& b : boxes_) {
        if (static_cast<int>(b.dim()) != obs_dim_)
            throw ConstructionError("EnvSpec: box dim mismatch");
        for (std::size_t k = 0; k < b.dim(); ++k)
            if (b.lo[k] < -obs_bound_ - 1e-12 || b.hi[k] > obs_bound_ + 1e-12)
                throw ConstructionError("EnvSpec: box exceeds observation bound");
    }
    // Disjoint layer regions (interiors).
    for (std::size_t i = 0; i < boxes_.size(); ++i) {
        for (std::size_t j = i + 1; j < boxes_.size(); ++j) {
            bool overlap = true;
            for (std::size_t k = 0; k < boxes_[i].dim(); ++k) {
                if (boxes_[i].hi[k] <= boxes_[j].lo[k] + 1e-12 ||
                    boxes_[j].hi[k] <= boxes_[i].lo[k] + 1e-12) {
                    overlap = false;
                    break;
                }
            }
            if (overlap) throw ConstructionError("EnvSpec: layer boxes overlap");
        }
    }

    reachable_.assign(static_cast<std::size_t>(total), false);
    std::deque<StateId> queue{initial_};
    reachable_[static_cast<std::size_t>(initial_)] = true;
    while (!queue.empty()) {
        StateId s = queue.front();
        queue.pop_front();
        if (layer_of_[static_cast<std::size_t>(s)] == horizon_) continue;
        for (StateId t : transition_[static_cast<std::size_t>(s)]) {
            if (!reachable_[static_cast<std::size_t>(t)]) {
                reachable_[static_cast<std::size_t>(t)] = true;
                queue.push_back(t);
            }
        }
    }
}

StateId EnvSpec::next_state(StateId s, int action) const {
    if (action < 0 || action >= actions_) throw InputError("next_state: bad action id");
    int h = layer_of(s);
    if (h >= horizon_) throw InputError("next_state: state is terminal");
    return transition_[static_cast<std::size_t>(s)][static_cast<std::size_t>(action)];
}

int EnvSpec::max_layer_size() const {
    std::size_t m = 0;
    for (const auto& l : layers_) m = std::max(m, l.size());
    return static_cast<int>(m);
}

int EnvSpec::reachable_count() const {
    int c = 0;
    for (bool b : reachable_) c += b ? 1 : 0;
    return c;
}

int EnvSpec::layer_of_point(std::span<const double> x) const {
    for (int h = 1; h <= horizon_; ++h)
        if (layer_box(h).contains(x, 1e-12)) return h;
    return 0;
}

Env::Env(std::shared_ptr<const EnvSpec> spec,
         std::vector<std::shared_ptr<const Density>> obs_density,
         RewardMeanFn reward_mean, std::vector<double> theta)
    : spec_(std::move(spec)),
      densities_(std::move(obs_density)),
      reward_mean_(std::move(reward_mean)),
      theta_(std::move(theta)),
      counter_(std::make_shared<EpisodeCounter>()) {
    if (static_cast<int>(densities_.size()) != spec_->state_count())
        throw ConstructionError("Env: one density per state required");
}

StateId terminal_state(const EnvSpec& spec, const Path& p) {
    if (static_cast<int>(p.size()) > spec.horizon() - 1)
        throw InputError("terminal_state: path longer than horizon allows");
    StateId s = spec.initial_state();
    for (int a : p) {
        if (a < 0 || a >= spec.action_count())
            throw InputError("terminal_state: invalid action id");
        s = spec.next_state(s, a);
    }
    return s;
}

std::vector<double> sample_observation(const Env& env, StateId s, Rng& rng,
                                       long proposal_cap) {
    const Density& d = env.density(s);
    const Box& sup = d.support();
    const double envelope = d.sup_bound();
    const std::size_t dim = sup.dim();
    std::vector<double> x(dim);
    for (long i = 0; i < proposal_cap; ++i) {
        for (std::size_t k = 0; k < dim; ++k) x[k] = rng.uniform(sup.lo[k], sup.hi[k]);
        double u = rng.uniform() * envelope;
        if (u < d.eval(x)) {
            env.count_episodes(1);
            return x;
        }
    }
    throw SamplingError("sample_observation: rejection cap exceeded (malformed density?)");
}

Trajectory run_episode(const Env& env, const ReactivePolicy& policy, Rng& rng,
                       bool feedback) {
    const EnvSpec& spec = env.spec();
    Trajectory traj;
    traj.feedback_visible = feedback;
    StateId s = spec.initial_state();
    for (int h = 1; h <= spec.horizon(); ++h) {
        TrajectoryStep step;
        step.state = s;
        // Inline draw; the episode is counted once at the end.
        const Density& d = env.density(s);
        const Box& sup = d.support();
        std::vector<double> x(sup.dim());
        bool accepted = false;
        for (long i = 0; i < 1000000; ++i) {
            for (std::size_t k = 0; k < sup.dim(); ++k) x[k] = rng.uniform(sup.lo[k], sup.hi[k]);
            if (rng.uniform() * d.sup_bound() < d.eval(x)) {
                accepted = true;
                break;
            }
        }
        if (!accepted) throw SamplingError("run_episode: rejection cap exceeded");
        step.obs = x;
        step.action = policy(step.obs);
        if (step.action < 0 || step.action >= spec.action_count())
            throw InputError("run_episode: policy returned invalid action");
        if (feedback) step.reward = env.sample_reward(s, step.obs, step.action, rng);
        if (h < spec.horizon()) s = spec.next_state(s, step.action);
        traj.steps.push_back(std::move(step));
    }
    env.count_episodes(1);
    return traj;
}

std::vector<std::vector<double>> collect_at_path(const Env& env, const Path& p, long n,
                                                 Rng& rng) {
    StateId s = terminal_state(env.spec(), p);
    std::vector<std::vector<double>> out;
    out.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) out.push_back(sample_observation(env, s, rng));
    return out;
}

std::vector<Transition> collect_transitions(const Env& env, const Path& p, long n,
                                            Rng& rng) {
    StateId s = terminal_state(env.spec(), p);
    std::vector<Transition> out;
    out.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        Transition t;
        t.obs = sample_observation(env, s, rng);
        t.action = static_cast<int>(rng.below(static_cast<std::uint64_t>(env.spec().action_count())));
        t.reward = env.sample_reward(s, t.obs, t.action, rng);
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace s2r
