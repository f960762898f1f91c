#include "s2r/sim2real.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include "s2r/errors.hpp"

namespace s2r {

namespace {

// Per-simulator work with independent streams; results land in index order,
// so worker count never changes any output.
void for_each_sim(int count, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    int n_threads = std::min(workers, count);
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

}  // namespace

Path DiscoveryMap::canonicalize(Path p) const {
    for (int guard = 0; guard < 100000; ++guard) {
        if (is_canonical(p) || p.empty()) return p;
        bool replaced = false;
        for (std::size_t len = p.size(); len >= 1 && !replaced; --len) {
            Path prefix(p.begin(), p.begin() + static_cast<long>(len));
            for (const auto& [alias, canon] : aliases) {
                if (alias == prefix) {
                    Path next = canon;
                    next.insert(next.end(), p.begin() + static_cast<long>(len), p.end());
                    p = std::move(next);
                    replaced = true;
                    break;
                }
            }
        }
        if (!replaced) return p;  // unknown to this map
    }
    throw NonTerminationAnomaly("canonicalize: alias resolution did not settle");
}

Sim2RealContext::Sim2RealContext(const EnvFamily& fam,
                                 std::shared_ptr<const PredictorClass> cls_in,
                                 ResolvedAlgo algo_in, std::vector<Env> sims_in,
                                 KernelSpec kernel_in, Rng master_in)
    : family(&fam),
      cls(std::move(cls_in)),
      algo(std::move(algo_in)),
      sims(std::move(sims_in)),
      kernel(std::move(kernel_in)),
      master(master_in) {
    for (int id = 0; id < static_cast<int>(cls->size()); ++id) survivors.push_back(id);
    dhat.resize(sims.size());
}

std::vector<double>& Sim2RealContext::vhat_slot(const Path& canonical_path, int member) {
    auto it = vhat.find(canonical_path);
    if (it == vhat.end()) {
        std::vector<std::vector<double>> fresh(
            static_cast<std::size_t>(cls->size()),
            std::vector<double>(sims.size(), kMissing));
        it = vhat.emplace(canonical_path, std::move(fresh)).first;
    }
    return it->second[static_cast<std::size_t>(member)];
}

namespace {

void dfs_dist_visit(Sim2RealContext& ctx, const Path& p) {
    const EnvSpec& spec = ctx.sims.front().spec();
    const int B = static_cast<int>(ctx.sims.size());
    ++ctx.discovery.node_visits;
    const int layer = static_cast<int>(p.size()) + 1;
    Lattice lat = layer_lattice(spec, layer);

    std::vector<DensityGrid> fresh(static_cast<std::size_t>(B));
    for_each_sim(B, ctx.algo.workers, [&](int b) {
        Rng stream = ctx.master.derive({phase_id(Phase::DfsDistribution),
                                        static_cast<std::uint64_t>(b), path_label(p)});
        auto obs = collect_at_path(ctx.sims[static_cast<std::size_t>(b)], p,
                                   ctx.algo.n_dist, stream);
        fresh[static_cast<std::size_t>(b)] =
            kde_fit(obs, ctx.algo.bandwidth_h, ctx.kernel, lat);
    });

    // Aliased iff some already-visited node matches on every simulator.
    for (const Path& q : ctx.discovery.canonical) {
        if (q.size() != p.size()) continue;  // different layer boxes never match
        bool all_close = true;
        for (int b = 0; b < B && all_close; ++b) {
            const auto& stored = ctx.dhat[static_cast<std::size_t>(b)].grid_for(q);
            if (stored.lattice != fresh[static_cast<std::size_t>(b)].lattice ||
                sup_distance(stored, fresh[static_cast<std::size_t>(b)]) > ctx.algo.eps_dist)
                all_close = false;
        }
        if (all_close) {
            ctx.discovery.aliases.emplace_back(p, q);
            for (int b = 0; b < B; ++b) ctx.dhat[static_cast<std::size_t>(b)].add_alias(p, q);
            return;  // subtree pruned; descendants resolve through the alias
        }
    }

    ctx.discovery.canonical.push_back(p);
    for (int b = 0; b < B; ++b)
        ctx.dhat[static_cast<std::size_t>(b)].add(p, std::move(fresh[static_cast<std::size_t>(b)]));
    if (static_cast<int>(p.size()) < spec.horizon() - 1) {
        for (int a = 0; a < spec.action_count(); ++a) {
            Path q = p;
            q.push_back(a);
            dfs_dist_visit(ctx, q);
        }
    }
}

}  // namespace

void dfs_distribution(Sim2RealContext& ctx) {
    if (ctx.algo.zeta < 2.0 * ctx.algo.phi / ctx.algo.c_l)
        throw ConfigError("dfs_distribution: zeta < 2*phi/C_L breaks state discrimination");
    dfs_dist_visit(ctx, {});

    // Materialize alias entries for every probe path so predictor bindings
    // resolve even when discovery merged states the probes name.
    for (const auto& probe : ctx.cls->geometry().probes) {
        for (auto& d : ctx.dhat) {
            if (d.find(probe.path) != DensityVector::npos) continue;
            Path c = ctx.discovery.canonicalize(probe.path);
            if (ctx.discovery.is_canonical(c)) {
                d.add_alias(probe.path, c);
            } else {
                // Structural mismatch (a discovery failure mode): fall back to
                // the first canonical path of the same layer.
                for (const auto& q : ctx.discovery.canonical) {
                    if (q.size() == probe.path.size()) {
                        d.add_alias(probe.path, q);
                        break;
                    }
                }
                ctx.anomalies.push_back("probe path " + path_str(probe.path) +
                                        " unresolved after discovery");
            }
        }
    }
}

bool consensus(Sim2RealContext& ctx, const Path& p, double eps_test, double delta_c) {
    const int B = static_cast<int>(ctx.sims.size());
    const long n = ctx.algo.n_test(delta_c);
    const Path cp = ctx.discovery.canonicalize(p);
    ++ctx.draw_epoch;
    const std::uint64_t epoch = ctx.draw_epoch;

    std::vector<std::vector<std::vector<double>>> obs(static_cast<std::size_t>(B));
    for_each_sim(B, ctx.algo.workers, [&](int b) {
        Rng stream = ctx.master.derive({phase_id(Phase::Consensus),
                                        static_cast<std::uint64_t>(b), path_label(p), epoch});
        obs[static_cast<std::size_t>(b)] =
            collect_at_path(ctx.sims[static_cast<std::size_t>(b)], p, n, stream);
    });

    bool agree = true;
    for (int b = 0; b < B; ++b) {
        double vmax = -1.0, vmin = 2.0;
        for (int f : ctx.survivors) {
            BoundPredictor bound =
                ctx.cls->member(f).bind(ctx.dhat[static_cast<std::size_t>(b)]);
            double acc = 0.0;
            for (const auto& x : obs[static_cast<std::size_t>(b)])
                acc += bound.value(x, bound.act(x));
            double v = acc / static_cast<double>(n);
            ctx.vhat_slot(cp, f)[static_cast<std::size_t>(b)] = v;
            vmax = std::max(vmax, v);
            vmin = std::min(vmin, v);
        }
        if (vmax - vmin > eps_test) agree = false;
    }
    ++ctx.consensus_calls;
    ++ctx.root_consensus_calls;
    return agree;
}

void td_eliminate(Sim2RealContext& ctx, const Path& p, double delta_td) {
    const EnvSpec& spec = ctx.sims.front().spec();
    const int B = static_cast<int>(ctx.sims.size());
    const int A = spec.action_count();
    const long n = ctx.algo.n_train(delta_td);
    const double slack = ctx.algo.elimination_slack(n, delta_td);
    const Path cp = ctx.discovery.canonicalize(p);
    const bool deepest = static_cast<int>(p.size()) == spec.horizon() - 1;

    // Child estimates, required for every action (zero beyond the horizon).
    std::vector<std::vector<std::vector<double>>> child(
        static_cast<std::size_t>(A),
        std::vector<std::vector<double>>(static_cast<std::size_t>(ctx.cls->size()),
                                         std::vector<double>(static_cast<std::size_t>(B), 0.0)));
    if (!deepest) {
        for (int a = 0; a < A; ++a) {
            Path q = p;
            q.push_back(a);
            Path cq = ctx.discovery.canonicalize(q);
            auto it = ctx.vhat.find(cq);
            if (it == ctx.vhat.end())
                throw EliminationAnomaly("td_eliminate at " + path_str(p) +
                                         ": missing child estimates for action " +
                                         std::to_string(a));
            for (int f : ctx.survivors) {
                for (int b = 0; b < B; ++b) {
                    double v = it->second[static_cast<std::size_t>(f)][static_cast<std::size_t>(b)];
                    if (std::isnan(v))
                        throw EliminationAnomaly("td_eliminate at " + path_str(p) +
                                                 ": stale child cache");
                    child[static_cast<std::size_t>(a)][static_cast<std::size_t>(f)]
                         [static_cast<std::size_t>(b)] = v;
                }
            }
        }
    }

    ++ctx.draw_epoch;
    const std::uint64_t epoch = ctx.draw_epoch;
    std::vector<std::vector<Transition>> trans(static_cast<std::size_t>(B));
    for_each_sim(B, ctx.algo.workers, [&](int b) {
        Rng stream = ctx.master.derive({phase_id(Phase::TdEliminate),
                                        static_cast<std::uint64_t>(b), path_label(p), epoch});
        trans[static_cast<std::size_t>(b)] =
            collect_transitions(ctx.sims[static_cast<std::size_t>(b)], p, n, stream);
    });

    // Squared Bellman residual risk per member and simulator.
    std::vector<std::vector<double>> risk(
        static_cast<std::size_t>(ctx.cls->size()),
        std::vector<double>(static_cast<std::size_t>(B), 0.0));
    std::vector<std::vector<BoundPredictor>> bound(
        static_cast<std::size_t>(ctx.cls->size()));
    for (int f : ctx.survivors) {
        bound[static_cast<std::size_t>(f)].resize(static_cast<std::size_t>(B));
        for (int b = 0; b < B; ++b)
            bound[static_cast<std::size_t>(f)][static_cast<std::size_t>(b)] =
                ctx.cls->member(f).bind(ctx.dhat[static_cast<std::size_t>(b)]);
    }
    for (int b = 0; b < B; ++b) {
        for (const auto& t : trans[static_cast<std::size_t>(b)]) {
            for (int f : ctx.survivors) {
                const auto& bp = bound[static_cast<std::size_t>(f)][static_cast<std::size_t>(b)];
                double resid = bp.value(t.obs, t.action) - t.reward -
                               child[static_cast<std::size_t>(t.action)]
                                    [static_cast<std::size_t>(f)][static_cast<std::size_t>(b)];
                risk[static_cast<std::size_t>(f)][static_cast<std::size_t>(b)] += resid * resid;
            }
        }
    }
    for (int f : ctx.survivors)
        for (int b = 0; b < B; ++b)
            risk[static_cast<std::size_t>(f)][static_cast<std::size_t>(b)] /=
                static_cast<double>(n);

    std::vector<int> retained;
    for (int f : ctx.survivors) {
        bool keep = true;
        for (int b = 0; b < B && keep; ++b) {
            double best = std::numeric_limits<double>::infinity();
            for (int g : ctx.survivors)
                best = std::min(best,
                                risk[static_cast<std::size_t>(g)][static_cast<std::size_t>(b)]);
            if (risk[static_cast<std::size_t>(f)][static_cast<std::size_t>(b)] > best + slack)
                keep = false;
        }
        if (keep) retained.push_back(f);
    }
    if (retained.empty())
        throw EliminationAnomaly("td_eliminate at " + path_str(p) +
                                 ": every predictor eliminated");

    // Fresh V-hat at p for the survivors, from the same observation draws.
    for (int f : retained) {
        for (int b = 0; b < B; ++b) {
            const auto& bp = bound[static_cast<std::size_t>(f)][static_cast<std::size_t>(b)];
            double acc = 0.0;
            for (const auto& t : trans[static_cast<std::size_t>(b)])
                acc += bp.value(t.obs, bp.act(t.obs));
            ctx.vhat_slot(cp, f)[static_cast<std::size_t>(b)] = acc / static_cast<double>(n);
        }
    }

    ctx.survivors = retained;
    ctx.elimination_log.push_back({p, retained});
    ++ctx.td_calls;
    ++ctx.root_td_calls;
}

void dfs_learn(Sim2RealContext& ctx, const Path& p, double delta_dl) {
    const EnvSpec& spec = ctx.sims.front().spec();
    if (static_cast<int>(p.size()) < spec.horizon() - 1) {
        const double et = ctx.algo.eps_test(static_cast<int>(p.size()));
        for (int a = 0; a < spec.action_count(); ++a) {
            Path q = p;
            q.push_back(a);
            if (!consensus(ctx, q, et, ctx.algo.delta_consensus(delta_dl)))
                dfs_learn(ctx, q, delta_dl);
        }
    }
    td_eliminate(ctx, p, ctx.algo.delta_td(delta_dl));
}

void dfs_learn_root(Sim2RealContext& ctx, const Path& p, double delta_dl) {
    ctx.root_consensus_calls = 0;
    ctx.root_td_calls = 0;
    dfs_learn(ctx, p, delta_dl);
    ctx.max_consensus_per_root = std::max(ctx.max_consensus_per_root, ctx.root_consensus_calls);
    ctx.max_td_per_root = std::max(ctx.max_td_per_root, ctx.root_td_calls);
    const long hs = static_cast<long>(ctx.algo.H) * ctx.algo.S;
    if (ctx.root_td_calls > hs)
        ctx.anomalies.push_back("dfs_learn at " + path_str(p) + " used " +
                                std::to_string(ctx.root_td_calls) +
                                " TD-Eliminate calls (bound " + std::to_string(hs) + ")");
    if (ctx.root_consensus_calls > hs * ctx.algo.A)
        ctx.anomalies.push_back("dfs_learn at " + path_str(p) + " used " +
                                std::to_string(ctx.root_consensus_calls) +
                                " Consensus calls (bound " + std::to_string(hs * ctx.algo.A) +
                                ")");
}

double estimate_vstar(Sim2RealContext& ctx) {
    const int B = static_cast<int>(ctx.sims.size());
    const int f = ctx.survivors.front();
    ++ctx.draw_epoch;
    const std::uint64_t epoch = ctx.draw_epoch;
    std::vector<double> per_sim(static_cast<std::size_t>(B), 0.0);
    for_each_sim(B, ctx.algo.workers, [&](int b) {
        Rng stream = ctx.master.derive({phase_id(Phase::EstimateVstar),
                                        static_cast<std::uint64_t>(b), epoch});
        auto obs = collect_at_path(ctx.sims[static_cast<std::size_t>(b)], {}, ctx.algo.n_1,
                                   stream);
        BoundPredictor bound = ctx.cls->member(f).bind(ctx.dhat[static_cast<std::size_t>(b)]);
        double acc = 0.0;
        for (const auto& x : obs) acc += bound.value(x, bound.act(x));
        per_sim[static_cast<std::size_t>(b)] = acc / static_cast<double>(ctx.algo.n_1);
    });
    double total = 0.0;
    for (double v : per_sim) total += v;
    ctx.v_star_hat = total / static_cast<double>(B);
    return ctx.v_star_hat;
}

MetaPolicy learn_on_simulators(Sim2RealContext& ctx) {
    const EnvSpec& spec = ctx.sims.front().spec();
    const int B = static_cast<int>(ctx.sims.size());
    const long iteration_cap = static_cast<long>(ctx.algo.S) * ctx.algo.H;
    for (ctx.iterations = 0;; ++ctx.iterations) {
        if (ctx.iterations >= iteration_cap)
            throw NonTerminationAnomaly("learn_on_simulators exceeded " +
                                        std::to_string(iteration_cap) + " iterations");
        const int f = ctx.survivors.front();
        ++ctx.draw_epoch;
        const std::uint64_t epoch = ctx.draw_epoch;

        std::vector<double> sim_total(static_cast<std::size_t>(B), 0.0);
        std::vector<std::vector<Path>> executed(static_cast<std::size_t>(B));
        for_each_sim(B, ctx.algo.workers, [&](int b) {
            Rng stream = ctx.master.derive({phase_id(Phase::LearnOnSimulators),
                                            static_cast<std::uint64_t>(b), epoch});
            BoundPredictor bound =
                ctx.cls->member(f).bind(ctx.dhat[static_cast<std::size_t>(b)]);
            ReactivePolicy policy = [&bound](std::span<const double> x) {
                return bound.act(x);
            };
            std::set<Path> seen;
            for (long j = 0; j < ctx.algo.n_1; ++j) {
                Trajectory traj =
                    run_episode(ctx.sims[static_cast<std::size_t>(b)], policy, stream, true);
                double total = 0.0;
                Path actions;
                for (const auto& step : traj.steps) {
                    total += step.reward.value_or(0.0);
                    actions.push_back(step.action);
                }
                sim_total[static_cast<std::size_t>(b)] += total;
                // First n_2 distinct executed paths, in rollout order.
                if (static_cast<long>(executed[static_cast<std::size_t>(b)].size()) <
                        ctx.algo.n_2 &&
                    !seen.count(actions)) {
                    seen.insert(actions);
                    executed[static_cast<std::size_t>(b)].push_back(actions);
                }
            }
        });
        double v_policy = 0.0;
        for (double v : sim_total) v_policy += v;
        v_policy /= static_cast<double>(ctx.algo.n_1) * B;

        if (std::fabs(ctx.v_star_hat - v_policy) <= ctx.algo.eps_demand) {
            MetaPolicy meta;
            meta.predictor_id = f;
            meta.cls = ctx.cls;
            meta.sim_density = ctx.dhat;
            return meta;
        }

        // Refine at the terminal states of every prefix of the selected paths.
        std::set<Path> sites;
        for (int b = 0; b < B; ++b) {
            for (const auto& path : executed[static_cast<std::size_t>(b)]) {
                for (std::size_t len = 0; len < static_cast<std::size_t>(spec.horizon());
                     ++len)
                    sites.insert(Path(path.begin(), path.begin() + static_cast<long>(len)));
            }
        }
        std::vector<Path> ordered(sites.begin(), sites.end());
        std::sort(ordered.begin(), ordered.end(), [](const Path& a, const Path& b) {
            if (a.size() != b.size()) return a.size() < b.size();
            return a < b;
        });
        for (const auto& site : ordered) dfs_learn_root(ctx, site, ctx.algo.delta_refine());
    }
}

Sim2RealContext make_context(const EnvFamily& family,
                             std::shared_ptr<const PredictorClass> cls,
                             const AlgoConfig& cfg, std::uint64_t seed) {
    auto spec = family.env_spec();
    ResolvedAlgo algo =
        resolve_algo(cfg, spec->horizon(), spec->action_count(), spec->max_layer_size(),
                     cls->size(), family.def().alpha, family.def().obs_dim,
                     family.def().zeta);
    Rng master(seed);

    if (algo.B > 100000)
        throw ConfigError("make_context: B=" + std::to_string(algo.B) +
                          " is too large to instantiate; set a desk override");
    std::vector<Env> sims;
    sims.reserve(static_cast<std::size_t>(algo.B));
    for (int b = 0; b < static_cast<int>(algo.B); ++b) {
        Rng stream = master.derive({phase_id(Phase::SampleSimulators),
                                    static_cast<std::uint64_t>(b)});
        sims.push_back(family.sample_env(stream));
    }

    KernelSpec kernel(algo.alpha, algo.d);
    return Sim2RealContext(family, std::move(cls), algo, std::move(sims), kernel, master);
}

Sim2RealResult sim2real(const EnvFamily& family, std::shared_ptr<const PredictorClass> cls,
                        const AlgoConfig& cfg, std::uint64_t seed) {
    Sim2RealContext ctx = make_context(family, std::move(cls), cfg, seed);
    const ResolvedAlgo& algo = ctx.algo;

    Sim2RealResult result;
    result.seed = seed;
    result.algo = algo;
    auto episodes_now = [&] {
        std::vector<long> v;
        for (const auto& e : ctx.sims) v.push_back(e.episodes());
        return v;
    };
    auto phase_delta = [&](const std::string& name, const std::vector<long>& before) {
        PhaseEpisodes ph;
        ph.name = name;
        auto after = episodes_now();
        for (std::size_t i = 0; i < after.size(); ++i)
            ph.sim_episodes.push_back(after[i] - before[i]);
        result.phases.push_back(ph);
    };

    auto before = episodes_now();
    dfs_distribution(ctx);
    phase_delta("dfs-distribution", before);

    before = episodes_now();
    dfs_learn_root(ctx, {}, algo.delta_dfs_learn());
    phase_delta("dfs-learn", before);

    before = episodes_now();
    estimate_vstar(ctx);
    phase_delta("estimate-vstar", before);

    before = episodes_now();
    result.policy = learn_on_simulators(ctx);
    phase_delta("learn-on-simulators", before);

    result.discovery = ctx.discovery;
    result.sim_density = ctx.dhat;
    result.v_star_hat = ctx.v_star_hat;
    result.iterations = ctx.iterations;
    result.final_survivors = ctx.survivors;
    result.elimination_log = ctx.elimination_log;
    result.sim_episodes_total = episodes_now();
    result.consensus_calls = ctx.consensus_calls;
    result.td_calls = ctx.td_calls;
    result.max_consensus_per_root = ctx.max_consensus_per_root;
    result.max_td_per_root = ctx.max_td_per_root;
    result.dfs_node_visits = ctx.discovery.node_visits;
    result.anomalies = ctx.anomalies;

    // Structural episode budget: the discovery bound n_dist*B*HSA plus the
    // per-invocation consensus/elimination budgets and evaluation rollouts.
    const long hsa = static_cast<long>(algo.H) * algo.S * algo.A;
    const long hs = static_cast<long>(algo.H) * algo.S;
    const double d4 = algo.delta_dfs_learn();
    const double dr = algo.delta_refine();
    long per_root_budget =
        hs * algo.n_train(algo.delta_td(d4)) + hsa * algo.n_test(algo.delta_consensus(d4));
    long per_root_budget_refine =
        hs * algo.n_train(algo.delta_td(dr)) + hsa * algo.n_test(algo.delta_consensus(dr));
    long refine_roots = static_cast<long>(ctx.iterations) *
                        (1 + static_cast<long>(algo.H) * algo.n_2 * algo.B);
    result.sim_episode_budget =
        algo.n_dist * algo.B * hsa + per_root_budget * algo.B +
        refine_roots * per_root_budget_refine * algo.B +
        (static_cast<long>(ctx.iterations) + 1) * algo.n_1 * algo.B + algo.n_1 * algo.B;
    return result;
}

DeployResult deploy(const MetaPolicy& meta, const Env& real_env,
                    const DiscoveryMap& discovery, const ResolvedAlgo& algo,
                    const KernelSpec& kernel, Rng master) {
    const EnvSpec& spec = real_env.spec();
    const long reads_before = real_env.reward_reads();
    const long episodes_before = real_env.episodes();

    DeployResult out;
    for (const auto& p : discovery.canonical) {
        Rng stream = master.derive({phase_id(Phase::Deploy), path_label(p)});
        auto obs = collect_at_path(real_env, p, algo.n_dist, stream);
        Lattice lat = layer_lattice(spec, static_cast<int>(p.size()) + 1);
        out.d_real.add(p, kde_fit(obs, algo.bandwidth_h, kernel, lat));
    }
    for (const auto& [alias, canon] : discovery.aliases) out.d_real.add_alias(alias, canon);
    for (const auto& probe : meta.cls->geometry().probes) {
        if (out.d_real.find(probe.path) != DensityVector::npos) continue;
        Path c = discovery.canonicalize(probe.path);
        if (discovery.is_canonical(c)) {
            out.d_real.add_alias(probe.path, c);
        } else {
            for (const auto& q : discovery.canonical) {
                if (q.size() == probe.path.size()) {
                    out.d_real.add_alias(probe.path, q);
                    break;
                }
            }
        }
    }

    out.firewall_ok = real_env.reward_reads() == reads_before;
    if (!out.firewall_ok)
        throw FirewallViolation("deploy: the real-world phase touched a reward");
    out.real_episodes = real_env.episodes() - episodes_before;
    out.canonical_count = static_cast<int>(discovery.canonical.size());
    out.policy = meta.cls->member(meta.predictor_id).bind(out.d_real);
    return out;
}

}  // namespace s2r
