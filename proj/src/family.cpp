#include "s2r/family.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

#include "s2r/errors.hpp"
#include "s2r/quadrature.hpp"

namespace s2r {

namespace {

double bump_shape(double u) {
    if (u <= -1.0 || u >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - u * u));
}

}  // namespace

double bump_norm_1d() {
    static const double value = [] {
        QuadOptions opts;
        opts.tol = 1e-13;
        opts.nodes_per_panel = 10;
        opts.initial_panels = 64;
        return integrate_1d(-1.0, 1.0, bump_shape, opts).value;
    }();
    return value;
}

BumpMixtureDensity::BumpMixtureDensity(std::vector<double> weights,
                                       std::vector<std::vector<double>> centers,
                                       std::vector<std::vector<double>> halfwidths)
    : weights_(std::move(weights)),
      centers_(std::move(centers)),
      halfwidths_(std::move(halfwidths)) {
    if (weights_.empty() || weights_.size() != centers_.size() ||
        weights_.size() != halfwidths_.size())
        throw ConstructionError("BumpMixtureDensity: inconsistent mixture terms");
    double total = 0.0;
    for (double w : weights_) {
        if (w < 0.0) throw ConstructionError("BumpMixtureDensity: negative weight");
        total += w;
    }
    if (total <= 0.0) throw ConstructionError("BumpMixtureDensity: zero total weight");
    for (double& w : weights_) w /= total;

    const std::size_t d = centers_[0].size();
    support_.lo.assign(d, std::numeric_limits<double>::infinity());
    support_.hi.assign(d, -std::numeric_limits<double>::infinity());
    sup_bound_ = 0.0;
    const double ib = bump_norm_1d();
    for (std::size_t j = 0; j < weights_.size(); ++j) {
        double peak = weights_[j];
        for (std::size_t k = 0; k < d; ++k) {
            double c = centers_[j][k], w = halfwidths_[j][k];
            if (w <= 0.0) throw ConstructionError("BumpMixtureDensity: halfwidth <= 0");
            support_.lo[k] = std::min(support_.lo[k], c - w);
            support_.hi[k] = std::max(support_.hi[k], c + w);
            peak *= bump_shape(0.0) / (ib * w);
        }
        sup_bound_ += peak;
    }
    sup_bound_ *= 1.0000001;
}

double BumpMixtureDensity::eval(std::span<const double> x) const {
    const double ib = bump_norm_1d();
    double v = 0.0;
    for (std::size_t j = 0; j < weights_.size(); ++j) {
        double term = weights_[j];
        for (std::size_t k = 0; k < x.size(); ++k) {
            double u = (x[k] - centers_[j][k]) / halfwidths_[j][k];
            term *= bump_shape(u) / (ib * halfwidths_[j][k]);
            if (term == 0.0) break;
        }
        v += term;
    }
    return v;
}

EnvFamily::EnvFamily(FamilySpec spec) : def_(std::move(spec)) {
    std::vector<std::vector<StateId>> layers(static_cast<std::size_t>(def_.horizon));
    for (std::size_t i = 0; i < def_.states.size(); ++i) {
        int layer = def_.states[i].layer;
        if (layer < 1 || layer > def_.horizon)
            throw ConstructionError("family: state layer out of range");
        layers[static_cast<std::size_t>(layer - 1)].push_back(static_cast<StateId>(i));
    }
    std::vector<std::vector<StateId>> transition(def_.states.size());
    for (std::size_t i = 0; i < def_.states.size(); ++i) {
        if (def_.states[i].layer < def_.horizon) {
            if (i >= def_.transitions.size())
                throw ConstructionError("family: missing transition row");
            transition[i].assign(def_.transitions[i].begin(), def_.transitions[i].end());
        }
    }
    if (static_cast<int>(def_.rewards.size()) != def_.horizon)
        throw ConstructionError("family: need one reward row per layer");
    for (const auto& row : def_.rewards)
        if (static_cast<int>(row.size()) != def_.actions)
            throw ConstructionError("family: need one reward expression per action");

    spec_ = std::make_shared<EnvSpec>(def_.horizon, def_.actions, std::move(layers),
                                      std::move(transition), def_.initial, def_.obs_dim,
                                      def_.obs_bound, def_.layer_boxes);

    // Canonical enumeration: DFS preorder with ascending actions, first
    // arrival wins. Unreachable states never appear, so xi excludes them.
    std::set<StateId> seen;
    std::function<void(const Path&, StateId)> visit = [&](const Path& p, StateId s) {
        if (seen.count(s)) return;
        seen.insert(s);
        canonical_.push_back({p, s});
        if (spec_->layer_of(s) < def_.horizon) {
            for (int a = 0; a < def_.actions; ++a) {
                Path q = p;
                q.push_back(a);
                visit(q, spec_->next_state(s, a));
            }
        }
    };
    visit({}, spec_->initial_state());
}

std::vector<double> EnvFamily::sample_theta(Rng& rng) const {
    std::vector<double> theta(static_cast<std::size_t>(def_.theta_dim));
    if (def_.prior.kind == PriorDef::Kind::Point) {
        theta = def_.prior.point;
        theta.resize(static_cast<std::size_t>(def_.theta_dim), 0.0);
    } else {
        for (auto& t : theta) t = rng.uniform();
    }
    return theta;
}

Env EnvFamily::env_at(std::span<const double> theta) const {
    std::vector<std::shared_ptr<const Density>> densities;
    densities.reserve(def_.states.size());
    for (const auto& sd : def_.states) {
        std::vector<double> weights;
        std::vector<std::vector<double>> centers, widths;
        for (const auto& bump : sd.bumps) {
            weights.push_back(bump.weight.eval({}, theta));
            std::vector<double> c(bump.center.size());
            for (std::size_t k = 0; k < bump.center.size(); ++k)
                c[k] = bump.center[k].eval({}, theta);
            centers.push_back(std::move(c));
            widths.push_back(bump.halfwidth);
        }
        auto dens = std::make_shared<BumpMixtureDensity>(std::move(weights), std::move(centers),
                                                         std::move(widths));
        const Box& layer_box = spec_->layer_box(sd.layer);
        for (std::size_t k = 0; k < layer_box.dim(); ++k)
            if (dens->support().lo[k] < layer_box.lo[k] - 1e-12 ||
                dens->support().hi[k] > layer_box.hi[k] + 1e-12)
                throw ConstructionError("family: density support leaves its layer box");
        densities.push_back(std::move(dens));
    }
    std::vector<double> theta_copy(theta.begin(), theta.end());
    auto rewards = def_.rewards;
    auto spec = spec_;
    RewardMeanFn mean = [rewards, spec, theta_copy](StateId s, std::span<const double> x,
                                                    int a) {
        int layer = spec->layer_of(s);
        double v = rewards[static_cast<std::size_t>(layer - 1)][static_cast<std::size_t>(a)]
                       .eval(x, theta_copy);
        return std::clamp(v, 0.0, 1.0);
    };
    return Env(spec_, std::move(densities), std::move(mean), theta_copy);
}

Env EnvFamily::sample_env(Rng& rng) const {
    std::vector<double> theta = sample_theta(rng);
    Env env = env_at(theta);
    check_separation(theta);
    check_holder(theta);
    return env;
}

Lattice EnvFamily::layer_lattice(int layer) const {
    return Lattice::with_spacing(spec_->layer_box(layer), def_.obs_bound / 64.0);
}

void EnvFamily::check_separation(std::span<const double> theta) const {
    Env env = env_at(theta);
    for (int layer = 1; layer <= def_.horizon; ++layer) {
        const auto& states = spec_->layers()[static_cast<std::size_t>(layer - 1)];
        if (states.size() < 2) continue;
        Lattice lat = layer_lattice(layer);
        for (std::size_t i = 0; i < states.size(); ++i) {
            for (std::size_t j = i + 1; j < states.size(); ++j) {
                if (!spec_->reachable(states[i]) || !spec_->reachable(states[j])) continue;
                double sup = 0.0;
                for (std::size_t q = 0; q < lat.size(); ++q) {
                    auto x = lat.point(q);
                    double d = std::fabs(env.density(states[i]).eval(x) -
                                         env.density(states[j]).eval(x));
                    if (d > sup) sup = d;
                }
                if (sup <= def_.zeta)
                    throw ConstructionError(
                        "assumption violation: separation (distinguishability) fails for "
                        "states " +
                        def_.states[static_cast<std::size_t>(states[i])].name + ", " +
                        def_.states[static_cast<std::size_t>(states[j])].name);
            }
        }
    }
}

void EnvFamily::check_holder(std::span<const double> theta) const {
    Env env = env_at(theta);
    const int m = static_cast<int>(std::ceil(def_.alpha)) - 1;
    if (m > 3) throw ConstructionError("holder check supports derivative order <= 3");
    const double exponent = def_.alpha - static_cast<double>(m);
    for (std::size_t si = 0; si < def_.states.size(); ++si) {
        auto s = static_cast<StateId>(si);
        if (!spec_->reachable(s)) continue;
        const Density& dens = env.density(s);
        const Box& sup = dens.support();
        for (std::size_t axis = 0; axis < sup.dim(); ++axis) {
            const double width = sup.hi[axis] - sup.lo[axis];
            const double fd = width * 1e-4;  // stencil step
            auto dm = [&](double t) {
                std::vector<double> x(sup.dim());
                for (std::size_t k = 0; k < sup.dim(); ++k)
                    x[k] = 0.5 * (sup.lo[k] + sup.hi[k]);
                auto at = [&](double v) {
                    x[axis] = v;
                    return dens.eval(x);
                };
                switch (m) {
                    case 0: return at(t);
                    case 1: return (at(t + fd) - at(t - fd)) / (2 * fd);
                    case 2: return (at(t + fd) - 2 * at(t) + at(t - fd)) / (fd * fd);
                    default:
                        return (at(t + 2 * fd) - 2 * at(t + fd) + 2 * at(t - fd) -
                                at(t - 2 * fd)) /
                               (2 * fd * fd * fd);
                }
            };
            const int probes = 17;
            std::vector<double> ts(probes), vs(probes);
            for (int i = 0; i < probes; ++i) {
                ts[static_cast<std::size_t>(i)] =
                    sup.lo[axis] + width * (0.05 + 0.9 * i / (probes - 1.0));
                vs[static_cast<std::size_t>(i)] = dm(ts[static_cast<std::size_t>(i)]);
            }
            for (int i = 0; i < probes; ++i) {
                for (int j = i + 1; j < probes; ++j) {
                    double gap = std::fabs(ts[static_cast<std::size_t>(j)] -
                                           ts[static_cast<std::size_t>(i)]);
                    double lhs = std::fabs(vs[static_cast<std::size_t>(j)] -
                                           vs[static_cast<std::size_t>(i)]);
                    if (lhs > def_.holder_const * std::pow(gap, exponent) + 1e-6)
                        throw ConstructionError(
                            "assumption violation: Holder smoothness fails for state " +
                            def_.states[si].name);
                }
            }
        }
    }
}

DensityVector EnvFamily::true_density_vector(std::span<const double> theta) const {
    Env env = env_at(theta);
    DensityVector vec;
    for (const auto& cs : canonical_) {
        int layer = spec_->layer_of(cs.state);
        Lattice lat = layer_lattice(layer);
        DensityGrid grid;
        grid.lattice = lat;
        grid.provenance = GridProvenance::TrueDensity;
        grid.values.resize(lat.size());
        for (std::size_t q = 0; q < lat.size(); ++q) {
            auto x = lat.point(q);
            grid.values[q] = env.density(cs.state).eval(x);
        }
        vec.add(cs.path, std::move(grid));
    }
    return vec;
}

double EnvFamily::mean_reward(StateId s, std::span<const double> x, int a,
                              std::span<const double> theta) const {
    int layer = spec_->layer_of(s);
    double v =
        def_.rewards[static_cast<std::size_t>(layer - 1)][static_cast<std::size_t>(a)].eval(
            x, theta);
    return std::clamp(v, 0.0, 1.0);
}

FamilySpec builtin_family(const std::string& name) {
    if (name == "desk-h2") {
        FamilySpec f;
        f.name = "desk-h2";
        f.horizon = 2;
        f.actions = 2;
        f.obs_dim = 1;
        f.obs_bound = 1.0;
        f.theta_dim = 1;
        f.alpha = 2.5;
        f.holder_const = 40000.0;
        f.zeta = 0.4;
        f.layer_boxes = {Box{{-1.0}, {0.0}}, Box{{0.0}, {1.0}}};
        f.states = {
            {"s1", 1, {BumpTerm{{1.0, {}, {}}, {Affine{-0.55, {}, {0.10}}}, {0.30}}}},
            {"s2a", 2, {BumpTerm{{1.0, {}, {}}, {Affine{0.31, {}, {0.10}}}, {0.30}}}},
            {"s2b", 2, {BumpTerm{{1.0, {}, {}}, {Affine{0.59, {}, {0.10}}}, {0.30}}}},
        };
        f.transitions = {{1, 2}};
        f.initial = 0;
        f.rewards = {
            {Affine{0.10, {}, {}}, Affine{0.10, {}, {}}},
            {Affine{0.30, {0.09}, {}}, Affine{0.39, {-0.09}, {}}},
        };
        return f;
    }
    if (name == "desk-h2-alias") {
        FamilySpec f = builtin_family("desk-h2");
        f.name = "desk-h2-alias";
        f.states = {
            {"s1", 1, {BumpTerm{{1.0, {}, {}}, {Affine{-0.55, {}, {0.10}}}, {0.30}}}},
            {"s2", 2, {BumpTerm{{1.0, {}, {}}, {Affine{0.45, {}, {0.10}}}, {0.30}}}},
        };
        f.transitions = {{1, 1}};
        return f;
    }
    if (name == "kde-bench") {
        // Single wide bump on the whole ball; the rate-diagnostic target.
        FamilySpec f;
        f.name = "kde-bench";
        f.horizon = 1;
        f.actions = 1;
        f.obs_dim = 1;
        f.obs_bound = 1.0;
        f.theta_dim = 1;
        f.alpha = 2.5;
        f.holder_const = 2000.0;
        f.zeta = 0.1;
        f.layer_boxes = {Box{{-1.0}, {1.0}}};
        f.states = {{"s1", 1, {BumpTerm{{1.0, {}, {}}, {Affine{0.0, {}, {}}}, {0.9}}}}};
        f.transitions = {};
        f.initial = 0;
        f.rewards = {{Affine{0.5, {}, {}}}};
        return f;
    }
    if (name == "unit-reward-h1" || name == "zero-reward-h1") {
        FamilySpec f;
        f.name = name;
        f.horizon = 1;
        f.actions = 2;
        f.obs_dim = 1;
        f.obs_bound = 1.0;
        f.theta_dim = 1;
        f.alpha = 2.5;
        f.holder_const = 40000.0;
        f.zeta = 0.1;
        f.layer_boxes = {Box{{-1.0}, {1.0}}};
        f.states = {{"s1", 1, {BumpTerm{{1.0, {}, {}}, {Affine{-0.1, {}, {0.2}}}, {0.5}}}}};
        f.transitions = {};
        f.initial = 0;
        double v = name == "unit-reward-h1" ? 1.0 : 0.0;
        f.rewards = {{Affine{v, {}, {}}, Affine{v, {}, {}}}};
        return f;
    }
    throw InputError("unknown builtin family: " + name);
}

}  // namespace s2r
