// Command-line harness: experiment orchestration, config ingestion, seed
// management, and report/CSV emission for the sim-to-real training pipeline.

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "s2r/kde.hpp"
#include "s2r/oracle.hpp"
#include "s2r/report.hpp"
#include "s2r/sim2real.hpp"

using namespace s2r;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAnomaly = 1;
constexpr int kExitUsage = 2;

struct ExperimentConfig {
    std::string family_path;
    std::uint64_t seed = 1;
    int reps = 1;
    std::string out_dir = "out";
    int eval_envs = 200;
    int workers = 1;
    AlgoConfig algo;
    PredictorClassOptions predictors;
    int n_decoys = 7;
    std::uint64_t class_seed = 100;
    int kde_n_min_pow = 7;
    int kde_n_max_pow = 14;
    int kde_trials = 20;
    double kde_alpha = 2.5;
    int oracle_n_thetas = 5;
    long oracle_mc_episodes = 200000;
    std::vector<double> certify_alphas = {1.5, 2.5, 3.5};
    std::vector<int> certify_dims = {1, 2};

    json echo;  // effective config (with CLI overrides), excluding workers
};

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j = json::parse(in);
    reject_unknown(j,
                   {"family", "seed", "reps", "out_dir", "eval_envs", "workers", "algo",
                    "predictors", "kde_diagnose", "oracle", "certify"},
                   "config");
    ExperimentConfig cfg;
    if (j.contains("family")) cfg.family_path = j.at("family").get<std::string>();
    cfg.seed = j.value("seed", std::uint64_t{1});
    cfg.reps = j.value("reps", 1);
    cfg.out_dir = j.value("out_dir", std::string("out"));
    cfg.eval_envs = j.value("eval_envs", 200);
    cfg.workers = j.value("workers", 1);
    if (j.contains("algo")) {
        const json& a = j.at("algo");
        reject_unknown(a, {"eps", "delta", "c_l", "c_dist", "slack_16phi", "desk"}, "algo");
        cfg.algo.eps = a.value("eps", 0.1);
        cfg.algo.delta = a.value("delta", 0.2);
        cfg.algo.c_l = a.value("c_l", 1.0);
        cfg.algo.c_dist = a.value("c_dist", 1.0);
        cfg.algo.slack_16phi = a.value("slack_16phi", false);
        if (a.contains("desk")) {
            const json& d = a.at("desk");
            reject_unknown(d,
                           {"count_scale", "b_override", "n_dist_override", "n1_scale",
                            "n2_scale"},
                           "algo.desk");
            cfg.algo.desk.count_scale = d.value("count_scale", 1.0);
            if (d.contains("b_override"))
                cfg.algo.desk.b_override = d.at("b_override").get<int>();
            if (d.contains("n_dist_override"))
                cfg.algo.desk.n_dist_override = d.at("n_dist_override").get<long>();
            cfg.algo.desk.n1_scale = d.value("n1_scale", 1.0);
            cfg.algo.desk.n2_scale = d.value("n2_scale", 1.0);
        }
    }
    if (j.contains("predictors")) {
        const json& p = j.at("predictors");
        reject_unknown(p,
                       {"n_decoys", "n_net", "cells_per_axis", "min_corruption",
                        "class_seed", "window_half_points"},
                       "predictors");
        cfg.n_decoys = p.value("n_decoys", 7);
        cfg.predictors.n_net = p.value("n_net", 256);
        cfg.predictors.cells_per_axis = p.value("cells_per_axis", 64);
        cfg.predictors.min_corruption = p.value("min_corruption", 0.1);
        cfg.predictors.window_half_points = p.value("window_half_points", 4);
        cfg.class_seed = p.value("class_seed", std::uint64_t{100});
    }
    if (j.contains("kde_diagnose")) {
        const json& k = j.at("kde_diagnose");
        reject_unknown(k, {"n_min_pow", "n_max_pow", "trials", "alpha"}, "kde_diagnose");
        cfg.kde_n_min_pow = k.value("n_min_pow", 7);
        cfg.kde_n_max_pow = k.value("n_max_pow", 14);
        cfg.kde_trials = k.value("trials", 20);
        cfg.kde_alpha = k.value("alpha", 2.5);
    }
    if (j.contains("oracle")) {
        const json& o = j.at("oracle");
        reject_unknown(o, {"n_thetas", "mc_episodes"}, "oracle");
        cfg.oracle_n_thetas = o.value("n_thetas", 5);
        cfg.oracle_mc_episodes = o.value("mc_episodes", 200000L);
    }
    if (j.contains("certify")) {
        const json& c = j.at("certify");
        reject_unknown(c, {"alphas", "dims"}, "certify");
        if (c.contains("alphas")) cfg.certify_alphas = c.at("alphas").get<std::vector<double>>();
        if (c.contains("dims")) cfg.certify_dims = c.at("dims").get<std::vector<int>>();
    }
    return cfg;
}

// Effective-config echo, stamped into every artifact. Worker count is an
// execution detail: reruns at any parallelism stay byte-identical.
json build_echo(const ExperimentConfig& cfg) {
    json e;
    e["family"] = cfg.family_path;
    e["seed"] = cfg.seed;
    e["reps"] = cfg.reps;
    e["out_dir"] = cfg.out_dir;
    e["eval_envs"] = cfg.eval_envs;
    json a;
    a["eps"] = cfg.algo.eps;
    a["delta"] = cfg.algo.delta;
    a["c_l"] = cfg.algo.c_l;
    a["c_dist"] = cfg.algo.c_dist;
    a["slack_16phi"] = cfg.algo.slack_16phi;
    json d;
    d["count_scale"] = cfg.algo.desk.count_scale;
    if (cfg.algo.desk.b_override) d["b_override"] = *cfg.algo.desk.b_override;
    if (cfg.algo.desk.n_dist_override) d["n_dist_override"] = *cfg.algo.desk.n_dist_override;
    d["n1_scale"] = cfg.algo.desk.n1_scale;
    d["n2_scale"] = cfg.algo.desk.n2_scale;
    a["desk"] = d;
    e["algo"] = a;
    json p;
    p["n_decoys"] = cfg.n_decoys;
    p["n_net"] = cfg.predictors.n_net;
    p["cells_per_axis"] = cfg.predictors.cells_per_axis;
    p["min_corruption"] = cfg.predictors.min_corruption;
    p["window_half_points"] = cfg.predictors.window_half_points;
    p["class_seed"] = cfg.class_seed;
    e["predictors"] = p;
    return e;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << text;
}

std::string csv_preamble(const json& echo) {
    return "# version: " + version_string() + "\n# config: " + echo.dump() + "\n";
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct RepOutcome {
    std::uint64_t seed = 0;
    double v_star = 0.0;
    double v_policy = 0.0;
    double regret = 0.0;
    long sim_episodes = 0;
    long real_episodes = 0;
    int iterations = 0;
    int accepted = -1;
    std::vector<std::string> anomalies;
    std::string report_json;
};

int cmd_run(const ExperimentConfig& cfg) {
    EnvFamily family(family_from_json_file(cfg.family_path));
    auto cls = std::make_shared<const PredictorClass>(
        build_class(family, cfg.n_decoys, cfg.predictors, Rng(cfg.class_seed)));
    KernelSpec kernel(family.def().alpha, family.def().obs_dim);
    auto edges = cls->geometry().cell_edges();
    OracleOptions oracle_opts;
    oracle_opts.layer_edges = &edges;

    // Expected optimum over the prior, shared by every repetition; the same
    // evaluation streams price each policy so the regret is a paired
    // difference.
    MetaValue ev_star =
        expected_optimal_value(family, cfg.eval_envs, Rng(cfg.seed), oracle_opts);

    std::vector<RepOutcome> outcomes(static_cast<std::size_t>(cfg.reps));
    std::atomic<int> next{0};
    std::atomic<bool> any_anomaly{false};
    auto worker = [&] {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= cfg.reps) return;
            RepOutcome& out = outcomes[static_cast<std::size_t>(i)];
            out.seed = cfg.seed + static_cast<std::uint64_t>(i);
            AlgoConfig algo = cfg.algo;
            algo.workers = 1;  // parallelism lives across repetitions here
            try {
                Sim2RealResult run = sim2real(family, cls, algo, out.seed);
                Rng real_stream = Rng(out.seed).derive({phase_id(Phase::RealEnv)});
                Env real_env = family.sample_env(real_stream);
                DeployResult dep = deploy(run.policy, real_env, run.discovery, run.algo,
                                          kernel, Rng(out.seed));
                PhaseEpisodes deploy_phase;
                deploy_phase.name = "deploy";
                deploy_phase.sim_episodes.assign(run.sim_episodes_total.size(), 0);
                deploy_phase.real_episodes = dep.real_episodes;
                run.phases.push_back(deploy_phase);

                auto policy_for = [&](const Env& env, Rng& rng) {
                    DeployResult d = deploy(run.policy, env, run.discovery, run.algo,
                                            kernel, rng);
                    auto bp = std::make_shared<BoundPredictor>(d.policy);
                    return OraclePolicy::reactive(
                        [bp](std::span<const double> x) { return bp->act(x); });
                };
                MetaValue mv = expected_meta_value(family, policy_for, cfg.eval_envs,
                                                   Rng(cfg.seed), oracle_opts);
                out.v_star = ev_star.mean;
                out.v_policy = mv.mean;
                out.regret = ev_star.mean - mv.mean;
                out.iterations = run.iterations;
                out.accepted = run.policy.predictor_id;
                out.real_episodes = dep.real_episodes;
                for (long e : run.sim_episodes_total) out.sim_episodes += e;
                out.anomalies = run.anomalies;
                if (dep.real_episodes !=
                    run.algo.n_dist * static_cast<long>(dep.canonical_count))
                    out.anomalies.push_back("real-world episode accounting mismatch");
                out.report_json = report_to_json(run, cfg.echo.dump());
            } catch (const std::exception& e) {
                out.anomalies.push_back(e.what());
                out.report_json = "";
            }
            if (!out.anomalies.empty()) any_anomaly = true;
        }
    };
    int n_threads = std::max(1, std::min(cfg.workers, cfg.reps));
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    std::filesystem::create_directories(cfg.out_dir);
    std::string csv = csv_preamble(cfg.echo) +
                      "seed,v_star,v_policy,regret,sim_episodes,real_episodes,iterations,"
                      "accepted_predictor,anomalies\n";
    std::sort(outcomes.begin(), outcomes.end(),
              [](const RepOutcome& a, const RepOutcome& b) { return a.seed < b.seed; });
    for (const auto& out : outcomes) {
        csv += std::to_string(out.seed) + "," + fmt(out.v_star) + "," + fmt(out.v_policy) +
               "," + fmt(out.regret) + "," + std::to_string(out.sim_episodes) + "," +
               std::to_string(out.real_episodes) + "," + std::to_string(out.iterations) +
               "," + std::to_string(out.accepted) + "," +
               std::to_string(out.anomalies.size()) + "\n";
        if (!out.report_json.empty())
            write_text(cfg.out_dir + "/report_seed" + std::to_string(out.seed) + ".json",
                       out.report_json);
    }
    write_text(cfg.out_dir + "/summary.csv", csv);
    std::cout << csv;
    return any_anomaly ? kExitAnomaly : kExitOk;
}

int cmd_kde_diagnose(const ExperimentConfig& cfg) {
    EnvFamily bench(builtin_family("kde-bench"));
    std::vector<double> theta{0.5};
    Env env = bench.env_at(theta);
    KernelSpec kernel(cfg.kde_alpha, 1);
    Lattice lat = bench.layer_lattice(1);
    auto sampler = [&env](Rng& r) { return sample_observation(env, 0, r); };
    auto truth = [&env](std::span<const double> x) { return env.density(0).eval(x); };
    std::vector<long> sched;
    for (int p = cfg.kde_n_min_pow; p <= cfg.kde_n_max_pow; ++p) sched.push_back(1L << p);
    RateReport rep = rate_diagnostic(sampler, truth, kernel, lat, sched, cfg.kde_trials,
                                     Rng(cfg.seed));
    std::string csv = csv_preamble(cfg.echo) + "n,h,mean_sup_err,std_sup_err\n";
    for (const auto& pt : rep.points)
        csv += std::to_string(pt.n) + "," + fmt(pt.h) + "," + fmt(pt.mean_sup_err) + "," +
               fmt(pt.std_sup_err) + "\n";
    csv += "# slope: " + fmt(rep.slope) + "\n";
    csv += "# theoretical_slope: " + fmt(rep.theoretical_slope) + "\n";
    csv += "# c_dist_estimate: " + fmt(calibrate_c_dist(rep, cfg.kde_alpha, 1)) + "\n";
    if (std::isnan(rep.slope))
        csv += "# warning: slope undefined for a single-point schedule\n";
    std::filesystem::create_directories(cfg.out_dir);
    write_text(cfg.out_dir + "/kde_rate.csv", csv);
    std::cout << csv;
    return kExitOk;
}

int cmd_oracle(const ExperimentConfig& cfg) {
    EnvFamily family(family_from_json_file(cfg.family_path));
    std::string csv = csv_preamble(cfg.echo);
    csv += "theta,v_star_quad,quad_err,v_star_mc,mc_ci_half\n";
    Rng master(cfg.seed);
    bool consistent = true;
    for (int i = 0; i < cfg.oracle_n_thetas; ++i) {
        Rng stream = master.derive({phase_id(Phase::MetaEval), static_cast<std::uint64_t>(i)});
        std::vector<double> theta = family.sample_theta(stream);
        Env env = family.env_at(theta);
        ValueReport rep = optimal_value(env);
        OraclePolicy greedy = optimal_policy(env, rep);
        // Monte Carlo of the greedy policy with internal state tracking.
        auto spec = family.env_spec();
        double total = 0.0, totalsq = 0.0;
        Rng mc = stream.derive({7});
        for (long e = 0; e < cfg.oracle_mc_episodes; ++e) {
            StateId s = spec->initial_state();
            double ep = 0.0;
            for (int h = 1; h <= spec->horizon(); ++h) {
                auto x = sample_observation(env, s, mc);
                int a = greedy.act(s, x);
                ep += env.sample_reward(s, x, a, mc);
                if (h < spec->horizon()) s = spec->next_state(s, a);
            }
            total += ep;
            totalsq += ep * ep;
        }
        double n = static_cast<double>(cfg.oracle_mc_episodes);
        double mean = total / n;
        double var = std::max(0.0, (totalsq - total * total / n) / (n - 1.0));
        double ci = 1.96 * std::sqrt(var / n);
        std::string ts;
        for (std::size_t k = 0; k < theta.size(); ++k)
            ts += (k ? ";" : "") + fmt(theta[k]);
        csv += ts + "," + fmt(rep.total) + "," + fmt(rep.quad_error) + "," + fmt(mean) +
               "," + fmt(ci) + "\n";
        if (std::fabs(mean - rep.total) > 3.0 * (ci + rep.quad_error) + 1e-9)
            consistent = false;
    }
    std::filesystem::create_directories(cfg.out_dir);
    write_text(cfg.out_dir + "/oracle.csv", csv);
    std::cout << csv;
    if (!consistent) {
        std::cerr << "oracle: quadrature and Monte Carlo estimates disagree\n";
        return kExitAnomaly;
    }
    return kExitOk;
}

int cmd_certify_kernel(const ExperimentConfig& cfg) {
    std::string csv = csv_preamble(cfg.echo);
    csv += "alpha,d,integral,max_abs_moment,alpha_moment,sup_norm,l2_norm,ok\n";
    bool all_ok = true;
    for (double alpha : cfg.certify_alphas) {
        for (int d : cfg.certify_dims) {
            KernelSpec spec(alpha, d);
            KernelCertificate cert = certify_k1(spec, 1e-8);
            double worst = 0.0;
            for (const auto& m : cert.moments) worst = std::max(worst, std::fabs(m.value));
            csv += fmt(alpha) + "," + std::to_string(d) + "," + fmt(cert.integral) + "," +
                   fmt(worst) + "," + fmt(cert.alpha_moment) + "," + fmt(cert.sup_norm) +
                   "," + fmt(cert.l2_norm) + "," + (cert.ok ? "1" : "0") + "\n";
            all_ok = all_ok && cert.ok;
        }
    }
    std::filesystem::create_directories(cfg.out_dir);
    write_text(cfg.out_dir + "/kernel_certificate.csv", csv);
    std::cout << csv;
    return all_ok ? kExitOk : kExitAnomaly;
}

int cmd_gen_family(const std::string& name, const std::string& out_path) {
    FamilySpec spec = builtin_family(name);
    write_text(out_path, family_to_json(spec));
    std::cout << "wrote " << out_path << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Feedback-free sim-to-real training on rich-observation MDPs"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed_flag;
    std::optional<int> reps_flag;
    std::optional<std::string> out_flag;
    std::optional<double> desk_scale_flag;
    std::optional<int> workers_flag;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* opt = cmd->add_option("--config", config_path, "experiment config (JSON)");
        if (needs_config) opt->required();
        cmd->add_option("--seed", [&](const CLI::results_t& r) {
            seed_flag = std::stoull(r[0]);
            return true;
        }, "master seed override");
        cmd->add_option("--reps", [&](const CLI::results_t& r) {
            reps_flag = std::stoi(r[0]);
            return true;
        }, "repetition count override");
        cmd->add_option("--out", [&](const CLI::results_t& r) {
            out_flag = r[0];
            return true;
        }, "output directory override");
        cmd->add_option("--desk-scale", [&](const CLI::results_t& r) {
            desk_scale_flag = std::stod(r[0]);
            return true;
        }, "count multiplier for the theoretical sample sizes");
        cmd->add_option("--workers", [&](const CLI::results_t& r) {
            workers_flag = std::stoi(r[0]);
            return true;
        }, "parallel workers across repetitions");
    };

    auto* run = app.add_subcommand("run", "train, deploy, and score the meta-policy");
    add_common(run, true);
    auto* kde = app.add_subcommand("kde-diagnose", "empirical KDE convergence table");
    add_common(kde, true);
    auto* oracle = app.add_subcommand("oracle", "optimal values by quadrature and MC");
    add_common(oracle, true);
    auto* certify = app.add_subcommand("certify-kernel", "kernel moment certification");
    add_common(certify, true);
    auto* gen = app.add_subcommand("gen-family", "write a built-in family as JSON");
    std::string gen_name = "desk-h2", gen_out = "family.json";
    gen->add_option("--name", gen_name, "built-in family name");
    gen->add_option("--out", gen_out, "output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) return cmd_gen_family(gen_name, gen_out);

        ExperimentConfig cfg = load_config(config_path);
        if (seed_flag) cfg.seed = *seed_flag;
        if (reps_flag) cfg.reps = *reps_flag;
        if (out_flag) cfg.out_dir = *out_flag;
        if (desk_scale_flag) cfg.algo.desk.count_scale = *desk_scale_flag;
        if (workers_flag) cfg.workers = *workers_flag;
        cfg.echo = build_echo(cfg);

        if (run->parsed()) return cmd_run(cfg);
        if (kde->parsed()) return cmd_kde_diagnose(cfg);
        if (oracle->parsed()) return cmd_oracle(cfg);
        if (certify->parsed()) return cmd_certify_kernel(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InputError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "runtime anomaly: " << e.what() << "\n";
        return kExitAnomaly;
    }
    return kExitUsage;
}
