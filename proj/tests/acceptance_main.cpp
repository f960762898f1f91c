// Acceptance suite: every criterion at its stated tolerance, one line each.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "s2r/oracle.hpp"
#include "s2r/quadrature.hpp"
#include "s2r/report.hpp"
#include "s2r/sim2real.hpp"

using namespace s2r;

namespace {

struct CriterionResult {
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const auto t0 = clock::now();
    return std::chrono::duration<double>(clock::now() - t0).count();
}

const EnvFamily& desk() {
    static EnvFamily fam(builtin_family("desk-h2"));
    return fam;
}

std::shared_ptr<const PredictorClass> desk_class() {
    static auto cls =
        std::make_shared<const PredictorClass>(build_class(desk(), 7, {}, Rng(100)));
    return cls;
}

AlgoConfig desk_cfg() {
    AlgoConfig cfg;
    cfg.eps = 0.1;
    cfg.delta = 0.2;
    cfg.c_l = 1.0;
    cfg.c_dist = 1.0;
    cfg.desk.count_scale = 1.25e-5;  // phi 3.54e-5 -> 0.01; logged in reports
    cfg.desk.b_override = 4;
    cfg.desk.n_dist_override = 16384;
    cfg.workers = 1;
    return cfg;
}

void parallel_seeds(int seeds, int workers, const std::function<void(int)>& fn) {
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= seeds) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    int n = std::max(1, std::min(workers, seeds));
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------- C1
CriterionResult criterion_kernel_certification() {
    CriterionResult r{"C1 kernel-certification"};
    double t0 = now_seconds();
    double worst_integral = 0.0, worst_moment = 0.0;
    bool ok = true;
    for (double alpha : {1.5, 2.5, 3.5}) {
        for (int d : {1, 2}) {
            KernelSpec spec(alpha, d);
            KernelCertificate cert = certify_k1(spec, 1e-8);
            ok = ok && cert.ok;
            worst_integral = std::max(worst_integral, std::fabs(cert.integral - 1.0));
            for (const auto& m : cert.moments)
                worst_moment = std::max(worst_moment, std::fabs(m.value));
        }
    }
    r.seconds = now_seconds() - t0;
    r.pass = ok && r.seconds < 5.0;
    char buf[160];
    std::snprintf(buf, sizeof buf, "max|integral-1|=%.2e max|moment|=%.2e over alpha x d grid",
                  worst_integral, worst_moment);
    r.detail = buf;
    return r;
}

// ---------------------------------------------------------------- C2
CriterionResult criterion_kde_rate() {
    CriterionResult r{"C2 kde-rate"};
    double t0 = now_seconds();
    EnvFamily bench(builtin_family("kde-bench"));
    std::vector<double> theta{0.5};
    Env env = bench.env_at(theta);
    KernelSpec kernel(2.5, 1);
    Lattice lat = bench.layer_lattice(1);
    auto sampler = [&env](Rng& rng) { return sample_observation(env, 0, rng); };
    auto truth = [&env](std::span<const double> x) { return env.density(0).eval(x); };
    std::vector<long> sched;
    for (int p = 7; p <= 14; ++p) sched.push_back(1L << p);
    RateReport rep = rate_diagnostic(sampler, truth, kernel, lat, sched, 20, Rng(2024));
    r.seconds = now_seconds() - t0;
    double target = -2.5 / 6.0;
    r.pass = std::fabs(rep.slope - target) <= 0.12 && r.seconds < 120.0;
    char buf[160];
    std::snprintf(buf, sizeof buf, "slope=%.4f target=%.4f band=+-0.12", rep.slope, target);
    r.detail = buf;
    return r;
}

// ---------------------------------------------------------------- C3
CriterionResult criterion_state_discovery(int seeds, int workers) {
    CriterionResult r{"C3 state-discovery"};
    double t0 = now_seconds();
    AlgoConfig cfg = desk_cfg();
    std::vector<int> exact(static_cast<std::size_t>(seeds), 0);
    std::vector<int> visits_ok(static_cast<std::size_t>(seeds), 0);
    parallel_seeds(seeds, workers, [&](int i) {
        Sim2RealContext ctx = make_context(desk(), desk_class(), cfg,
                                           static_cast<std::uint64_t>(3000 + i));
        dfs_distribution(ctx);
        exact[static_cast<std::size_t>(i)] = ctx.discovery.canonical.size() == 3 ? 1 : 0;
        visits_ok[static_cast<std::size_t>(i)] =
            ctx.discovery.node_visits <= 2 * 2 * 2 ? 1 : 0;
    });
    int n_exact = 0, n_visits = 0;
    for (int i = 0; i < seeds; ++i) {
        n_exact += exact[static_cast<std::size_t>(i)];
        n_visits += visits_ok[static_cast<std::size_t>(i)];
    }
    r.seconds = now_seconds() - t0;
    r.pass = n_exact >= (95 * seeds + 99) / 100 && n_visits == seeds && r.seconds < 60.0;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "exactly-3 states in %d/%d seeds; node visits <= HSA in %d/%d", n_exact,
                  seeds, n_visits, seeds);
    r.detail = buf;
    return r;
}

// ------------------------------------------------- shared runs for C4..C7
struct SeedOutcome {
    bool ran = false;
    bool star_survived = false;
    bool big_decoys_gone = false;
    double v_star_hat = 0.0;
    double regret = 0.0;
    bool accounting_exact = false;
    bool phases_consistent = false;
    bool firewall_ok = false;
    std::string anomaly;
};

struct SharedRuns {
    std::vector<SeedOutcome> outcomes;
    double ev_star = 0.0;
    double run_seconds = 0.0;   // training + deployment accounting (C4/C5/C7)
    double eval_seconds = 0.0;  // 200-environment policy evaluation (C6)
};

SharedRuns run_shared(int seeds, int workers) {
    SharedRuns shared;
    shared.outcomes.resize(static_cast<std::size_t>(seeds));
    AlgoConfig cfg = desk_cfg();
    KernelSpec kernel(2.5, 1);
    auto edges = desk_class()->geometry().cell_edges();
    OracleOptions oracle_opts;
    oracle_opts.layer_edges = &edges;
    const std::uint64_t eval_seed = 900001;

    std::set<int> big_ids;
    for (int id = 1; id < static_cast<int>(desk_class()->size()); ++id)
        if (desk_class()->member(id).corruption() >= 0.5) big_ids.insert(id);

    // Pass 1: train and deploy; everything criteria 4, 5, and 7 need.
    std::vector<Sim2RealResult> runs(static_cast<std::size_t>(seeds));
    double t0 = now_seconds();
    parallel_seeds(seeds, workers, [&](int i) {
        SeedOutcome& out = shared.outcomes[static_cast<std::size_t>(i)];
        const auto seed = static_cast<std::uint64_t>(4000 + i);
        try {
            Sim2RealResult run = sim2real(desk(), desk_class(), cfg, seed);
            out.ran = true;
            out.v_star_hat = run.v_star_hat;
            std::set<int> surv(run.final_survivors.begin(), run.final_survivors.end());
            out.star_survived = surv.count(0) == 1;
            out.big_decoys_gone = true;
            for (int id : big_ids)
                if (surv.count(id)) out.big_decoys_gone = false;

            // Per-phase sums must equal the counters exactly.
            std::vector<long> sums(run.sim_episodes_total.size(), 0);
            for (const auto& ph : run.phases)
                for (std::size_t b = 0; b < ph.sim_episodes.size(); ++b)
                    sums[b] += ph.sim_episodes[b];
            out.phases_consistent = sums == run.sim_episodes_total;

            // Deploy on a sentinel-poisoned real world: rewards must never be
            // read, and accounting is exact.
            Rng real_stream = Rng(seed).derive({phase_id(Phase::RealEnv)});
            Env real_env = desk().sample_env(real_stream);
            Env poisoned = real_env.with_rewards(
                [](StateId, std::span<const double>, int) { return 0.123456789; });
            DeployResult dep =
                deploy(run.policy, poisoned, run.discovery, run.algo, kernel, Rng(seed));
            out.firewall_ok = dep.firewall_ok && poisoned.reward_reads() == 0;
            out.accounting_exact =
                dep.real_episodes ==
                run.algo.n_dist * static_cast<long>(dep.canonical_count);
            runs[static_cast<std::size_t>(i)] = std::move(run);
        } catch (const std::exception& e) {
            out.anomaly = e.what();
        }
    });
    shared.run_seconds = now_seconds() - t0;

    // Pass 2: oracle-measured expected value of each deployed meta-policy
    // over fresh parameters, with feedback-free deploys on poisoned twins.
    double t1 = now_seconds();
    MetaValue ev = expected_optimal_value(desk(), 200, Rng(eval_seed), oracle_opts);
    shared.ev_star = ev.mean;
    parallel_seeds(seeds, workers, [&](int i) {
        SeedOutcome& out = shared.outcomes[static_cast<std::size_t>(i)];
        if (!out.ran) return;
        const Sim2RealResult& run = runs[static_cast<std::size_t>(i)];
        try {
            auto policy_for = [&](const Env& env, Rng& rng) {
                Env twin = env.with_rewards(
                    [](StateId, std::span<const double>, int) { return 0.5; });
                DeployResult d =
                    deploy(run.policy, twin, run.discovery, run.algo, kernel, rng);
                if (twin.reward_reads() != 0)
                    throw FirewallViolation("eval deploy read a reward");
                if (d.real_episodes !=
                    run.algo.n_dist * static_cast<long>(d.canonical_count))
                    throw NumericsError("eval deploy accounting mismatch");
                auto bp = std::make_shared<BoundPredictor>(d.policy);
                return OraclePolicy::reactive(
                    [bp](std::span<const double> x) { return bp->act(x); });
            };
            MetaValue mv =
                expected_meta_value(desk(), policy_for, 200, Rng(eval_seed), oracle_opts);
            out.regret = shared.ev_star - mv.mean;
        } catch (const std::exception& e) {
            out.anomaly = e.what();
            out.firewall_ok = false;
        }
    });
    shared.eval_seconds = now_seconds() - t1;
    return shared;
}

CriterionResult criterion_retention(const SharedRuns& shared) {
    CriterionResult r{"C4 fstar-retention"};
    int star = 0, decoys = 0, n = static_cast<int>(shared.outcomes.size());
    for (const auto& o : shared.outcomes) {
        star += o.ran && o.star_survived ? 1 : 0;
        decoys += o.ran && o.big_decoys_gone ? 1 : 0;
    }
    r.pass = star >= (80 * n + 99) / 100 && decoys >= (95 * n + 99) / 100 &&
             shared.run_seconds < 600.0;
    r.seconds = shared.run_seconds;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "f* survived in %d/%d; all >=0.5-residual decoys eliminated in %d/%d",
                  star, n, decoys, n);
    r.detail = buf;
    return r;
}

CriterionResult criterion_vstar(const SharedRuns& shared) {
    CriterionResult r{"C5 vstar-accuracy"};
    const double bound = 33.0 * 2.0 * std::sqrt(2.0) * 0.01;  // 33 H sqrt(A) phi
    int ok = 0, n = static_cast<int>(shared.outcomes.size());
    double worst = 0.0;
    for (const auto& o : shared.outcomes) {
        double err = std::fabs(o.v_star_hat - shared.ev_star);
        worst = std::max(worst, err);
        ok += o.ran && err <= bound ? 1 : 0;
    }
    r.pass = ok >= (80 * n + 99) / 100;
    char buf[160];
    std::snprintf(buf, sizeof buf, "|V^-V*|<=%.3f in %d/%d seeds (worst %.4f)", bound, ok,
                  n, worst);
    r.detail = buf;
    return r;
}

CriterionResult criterion_eps_optimality(const SharedRuns& shared) {
    CriterionResult r{"C6 eps-optimality"};
    int ok = 0, firewall = 0, n = static_cast<int>(shared.outcomes.size());
    double worst = -1.0;
    for (const auto& o : shared.outcomes) {
        worst = std::max(worst, o.regret);
        ok += o.ran && o.regret <= 0.1 ? 1 : 0;
        firewall += o.ran && o.firewall_ok ? 1 : 0;
    }
    r.pass = ok >= (80 * n + 99) / 100 && firewall == n &&
             shared.run_seconds + shared.eval_seconds < 1800.0;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "regret<=0.1 in %d/%d (worst %.4f); sentinel-clean deploys %d/%d", ok, n,
                  worst, firewall, n);
    r.detail = buf;
    r.seconds = shared.run_seconds + shared.eval_seconds;
    return r;
}

CriterionResult criterion_accounting(const SharedRuns& shared) {
    CriterionResult r{"C7 sample-accounting"};
    int exact = 0, phases = 0, n = static_cast<int>(shared.outcomes.size());
    for (const auto& o : shared.outcomes) {
        exact += o.ran && o.accounting_exact ? 1 : 0;
        phases += o.ran && o.phases_consistent ? 1 : 0;
    }
    r.pass = exact == n && phases == n;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "real episodes == n_dist x canonical in %d/%d; phase sums exact in %d/%d",
                  exact, n, phases, n);
    r.detail = buf;
    return r;
}

// ---------------------------------------------------------------- C8
CriterionResult criterion_determinism() {
    CriterionResult r{"C8 determinism"};
    double t0 = now_seconds();
    AlgoConfig cfg = desk_cfg();
    bool ok = true;
    for (std::uint64_t seed : {7001, 7002, 7003}) {
        Sim2RealResult a = sim2real(desk(), desk_class(), cfg, seed);
        Sim2RealResult b = sim2real(desk(), desk_class(), cfg, seed);
        AlgoConfig par = cfg;
        par.workers = 2;
        Sim2RealResult c = sim2real(desk(), desk_class(), par, seed);
        std::string ja = report_to_json(a, "{}");
        ok = ok && ja == report_to_json(b, "{}") && ja == report_to_json(c, "{}");
    }
    r.seconds = now_seconds() - t0;
    r.pass = ok;
    r.detail = "three seeds, reruns and 2-worker runs byte-identical";
    return r;
}

// ---------------------------------------------------------------- C9
CriterionResult criterion_invariants() {
    CriterionResult r{"C9 invariant-suites"};
    double t0 = now_seconds();
    std::string fail;

    {  // KDE linearity and shift equivariance at 1e-12.
        KernelSpec kernel(2.5, 1);
        Lattice lat(Box{{-2.0}, {2.0}}, {65});
        Rng rng(41);
        std::vector<std::vector<double>> a, b, both, shifted;
        for (int i = 0; i < 80; ++i) a.push_back({rng.uniform(-1.5, 1.5)});
        for (int i = 0; i < 120; ++i) b.push_back({rng.uniform(-1.5, 1.5)});
        both = a;
        both.insert(both.end(), b.begin(), b.end());
        DensityGrid ga = kde_fit(a, 0.4, kernel, lat);
        DensityGrid gb = kde_fit(b, 0.4, kernel, lat);
        DensityGrid gu = kde_fit(both, 0.4, kernel, lat);
        for (std::size_t i = 0; i < lat.size(); ++i) {
            double mixed = (80.0 * ga.values[i] + 120.0 * gb.values[i]) / 200.0;
            if (std::fabs(gu.values[i] - mixed) > 1e-12) fail = "kde linearity";
        }
        const double v = 2.25;
        for (const auto& s : both) shifted.push_back({s[0] + v});
        Lattice lat2(Box{{-2.0 + v}, {2.0 + v}}, {65});
        DensityGrid gs = kde_fit(shifted, 0.4, kernel, lat2);
        for (std::size_t i = 0; i < lat.size(); ++i)
            if (std::fabs(gs.values[i] - gu.values[i]) > 1e-12) fail = "kde shift";
    }

    {  // Argmax invariance under constant shifts.
        const auto cls = desk_class();
        std::vector<double> table = cls->member(0).table();
        for (double& v : table) v = std::min(1.0, v + 0.2);
        Predictor shifted(99, "shift", 0.0, cls->geometry_ptr(), table);
        Rng rng(43);
        for (int t = 0; t < 500; ++t) {
            DensityVector d =
                desk().true_density_vector(std::vector<double>{rng.uniform()});
            int layer = 1 + static_cast<int>(rng.below(2));
            const Box& box = desk().env_spec()->layer_box(layer);
            std::vector<double> x{rng.uniform(box.lo[0], box.hi[0])};
            if (cls->member(0).induced_action(d, x) != shifted.induced_action(d, x))
                fail = "argmax invariance";
        }
    }

    {  // Monotone elimination along a full dfs_learn.
        AlgoConfig cfg = desk_cfg();
        Sim2RealContext ctx = make_context(desk(), desk_class(), cfg, 8101);
        dfs_distribution(ctx);
        dfs_learn_root(ctx, {}, ctx.algo.delta_dfs_learn());
        std::set<int> prev;
        for (int id = 0; id < 8; ++id) prev.insert(id);
        for (const auto& rec : ctx.elimination_log) {
            for (int id : rec.survivors_after)
                if (!prev.count(id)) fail = "monotone elimination";
            prev = std::set<int>(rec.survivors_after.begin(), rec.survivors_after.end());
        }
    }

    {  // Lipschitz contract: 1000 random density perturbations, no violation.
        const auto cls = desk_class();
        const double tau = 0.01;
        Rng rng(47);
        for (int t = 0; t < 1000; ++t) {
            DensityVector d =
                desk().true_density_vector(std::vector<double>{rng.uniform()});
            DensityVector d2 = d;
            for (std::size_t s = 0; s < d2.size(); ++s)
                for (double& v : d2.grid(s).values) v += tau * rng.uniform(-1.0, 1.0);
            int member = static_cast<int>(rng.below(static_cast<std::uint64_t>(cls->size())));
            int layer = 1 + static_cast<int>(rng.below(2));
            const Box& box = desk().env_spec()->layer_box(layer);
            std::vector<double> x{rng.uniform(box.lo[0], box.hi[0])};
            int a = static_cast<int>(rng.below(2));
            double va = cls->member(member).predict(d, x, a);
            double vb = cls->member(member).predict(d2, x, a);
            if (va < 0.0 || va > 1.0 || vb < 0.0 || vb > 1.0) fail = "range";
            if (std::fabs(va - vb) > cls->lipschitz() * tau + 1e-12) fail = "lipschitz";
        }
    }

    r.seconds = now_seconds() - t0;
    r.pass = fail.empty() && r.seconds < 120.0;
    r.detail = fail.empty() ? "kde linearity/shift 1e-12; argmax shifts; monotone "
                              "elimination; 1000 Lipschitz trials clean"
                            : "violated: " + fail;
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    int seeds = 100;
    int workers = 2;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--seeds") == 0 && i + 1 < argc) seeds = std::atoi(argv[++i]);
        if (std::strcmp(argv[i], "--workers") == 0 && i + 1 < argc)
            workers = std::atoi(argv[++i]);
    }
    std::printf("acceptance suite: %d seeds, %d workers (%s)\n", seeds, workers,
                version_string().c_str());

    std::vector<CriterionResult> results;
    results.push_back(criterion_kernel_certification());
    results.push_back(criterion_kde_rate());
    results.push_back(criterion_state_discovery(seeds, workers));
    SharedRuns shared = run_shared(seeds, workers);
    results.push_back(criterion_retention(shared));
    results.push_back(criterion_vstar(shared));
    results.push_back(criterion_eps_optimality(shared));
    results.push_back(criterion_accounting(shared));
    results.push_back(criterion_determinism());
    results.push_back(criterion_invariants());

    bool all = true;
    for (const auto& r : results) {
        std::printf("[%s] %s: %s (%.1fs)\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                    r.detail.c_str(), r.seconds);
        all = all && r.pass;
    }
    int anomalies = 0;
    for (const auto& o : shared.outcomes)
        if (!o.anomaly.empty()) ++anomalies;
    if (anomalies > 0) std::printf("note: %d seed(s) raised anomalies\n", anomalies);
    return all ? 0 : 1;
}
