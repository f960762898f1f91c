#include "s2r/report.hpp"

#include <json.hpp>

namespace s2r {

using nlohmann::json;

std::string version_string() { return "s2r-0.1.0"; }

std::string report_to_json(const Sim2RealResult& r, const std::string& config_echo_json,
                           int indent) {
    json j;
    j["schema_version"] = "1";
    j["version"] = version_string();
    j["seed"] = r.seed;
    j["config"] = config_echo_json.empty() ? json::object() : json::parse(config_echo_json);

    json algo;
    algo["H"] = r.algo.H;
    algo["A"] = r.algo.A;
    algo["S"] = r.algo.S;
    algo["F"] = r.algo.F;
    algo["eps"] = r.algo.eps;
    algo["delta"] = r.algo.delta;
    algo["phi"] = r.algo.phi;
    algo["phi_nominal"] = r.algo.phi_nominal;
    algo["B"] = r.algo.B;
    algo["n_dist"] = r.algo.n_dist;
    algo["bandwidth_h"] = r.algo.bandwidth_h;
    algo["eps_dist"] = r.algo.eps_dist;
    algo["eps_demand"] = r.algo.eps_demand;
    algo["n_1"] = r.algo.n_1;
    algo["n_2"] = r.algo.n_2;
    algo["slack_16phi"] = r.algo.slack_16phi;
    algo["derivation_log"] = r.algo.derivation_log;
    j["algo"] = algo;

    json discovery;
    discovery["node_visits"] = r.discovery.node_visits;
    discovery["canonical_paths"] = json::array();
    for (const auto& p : r.discovery.canonical) discovery["canonical_paths"].push_back(p);
    discovery["aliases"] = json::array();
    for (const auto& [a, c] : r.discovery.aliases)
        discovery["aliases"].push_back({{"path", a}, {"canonical", c}});
    j["discovery"] = discovery;

    j["phases"] = json::array();
    for (const auto& ph : r.phases)
        j["phases"].push_back({{"name", ph.name},
                               {"sim_episodes", ph.sim_episodes},
                               {"real_episodes", ph.real_episodes}});
    j["sim_episodes_total"] = r.sim_episodes_total;
    j["sim_episode_budget"] = r.sim_episode_budget;

    j["elimination_log"] = json::array();
    for (const auto& rec : r.elimination_log)
        j["elimination_log"].push_back(
            {{"site", rec.site}, {"survivors_after", rec.survivors_after}});
    j["final_survivors"] = r.final_survivors;
    j["accepted_predictor"] = r.policy.predictor_id;
    j["v_star_hat"] = r.v_star_hat;
    j["iterations"] = r.iterations;
    j["consensus_calls"] = r.consensus_calls;
    j["td_calls"] = r.td_calls;
    j["max_consensus_per_root"] = r.max_consensus_per_root;
    j["max_td_per_root"] = r.max_td_per_root;
    j["anomalies"] = r.anomalies;
    return j.dump(indent) + "\n";
}

std::string trajectory_to_json(const Trajectory& traj) {
    json steps = json::array();
    for (std::size_t h = 0; h < traj.steps.size(); ++h) {
        const auto& s = traj.steps[h];
        json rec;
        rec["h"] = h + 1;
        rec["x"] = s.obs;
        rec["a"] = s.action;
        if (s.reward && traj.feedback_visible)
            rec["r"] = *s.reward;
        else
            rec["r"] = nullptr;
        steps.push_back(rec);
    }
    return steps.dump();
}

}  // namespace s2r
