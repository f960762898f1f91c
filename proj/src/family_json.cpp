#include <fstream>
#include <set>

#include <json.hpp>

#include "s2r/errors.hpp"
#include "s2r/family.hpp"

namespace s2r {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

Affine affine_from(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": affine must be an object");
    reject_unknown(j, {"c", "x", "theta", "sin_amp", "sin_freq", "sin_phase"}, where);
    Affine a;
    a.c = j.value("c", 0.0);
    if (j.contains("x")) a.x_coef = j.at("x").get<std::vector<double>>();
    if (j.contains("theta")) a.theta_coef = j.at("theta").get<std::vector<double>>();
    a.sin_amp = j.value("sin_amp", 0.0);
    if (j.contains("sin_freq")) a.sin_freq = j.at("sin_freq").get<std::vector<double>>();
    a.sin_phase = j.value("sin_phase", 0.0);
    return a;
}

json affine_to(const Affine& a) {
    json j;
    j["c"] = a.c;
    if (!a.x_coef.empty()) j["x"] = a.x_coef;
    if (!a.theta_coef.empty()) j["theta"] = a.theta_coef;
    if (a.sin_amp != 0.0) {
        j["sin_amp"] = a.sin_amp;
        j["sin_freq"] = a.sin_freq;
        if (a.sin_phase != 0.0) j["sin_phase"] = a.sin_phase;
    }
    return j;
}

}  // namespace

FamilySpec family_from_json_text(const std::string& text) {
    json j = json::parse(text);
    reject_unknown(j,
                   {"name", "horizon", "actions", "obs_dim", "obs_bound", "theta_dim",
                    "alpha", "holder_const", "zeta", "layer_boxes", "states", "initial",
                    "transitions", "rewards", "prior"},
                   "family");
    FamilySpec f;
    f.name = j.at("name").get<std::string>();
    f.horizon = j.at("horizon").get<int>();
    f.actions = j.at("actions").get<int>();
    f.obs_dim = j.at("obs_dim").get<int>();
    f.obs_bound = j.at("obs_bound").get<double>();
    f.theta_dim = j.at("theta_dim").get<int>();
    f.alpha = j.at("alpha").get<double>();
    f.holder_const = j.at("holder_const").get<double>();
    f.zeta = j.at("zeta").get<double>();
    for (const auto& b : j.at("layer_boxes")) {
        reject_unknown(b, {"lo", "hi"}, "layer_boxes");
        f.layer_boxes.push_back(Box{b.at("lo").get<std::vector<double>>(),
                                    b.at("hi").get<std::vector<double>>()});
    }
    std::vector<std::string> names;
    for (const auto& s : j.at("states")) {
        reject_unknown(s, {"name", "layer", "bumps"}, "states");
        StateDef sd;
        sd.name = s.at("name").get<std::string>();
        sd.layer = s.at("layer").get<int>();
        for (const auto& b : s.at("bumps")) {
            reject_unknown(b, {"weight", "center", "halfwidth"}, "bumps");
            BumpTerm bt;
            bt.weight = affine_from(b.at("weight"), "bump weight");
            for (const auto& c : b.at("center")) bt.center.push_back(affine_from(c, "center"));
            bt.halfwidth = b.at("halfwidth").get<std::vector<double>>();
            sd.bumps.push_back(std::move(bt));
        }
        names.push_back(sd.name);
        f.states.push_back(std::move(sd));
    }
    auto index_of = [&](const std::string& n) {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == n) return static_cast<int>(i);
        throw ConfigError("family: unknown state name '" + n + "'");
    };
    f.initial = index_of(j.at("initial").get<std::string>());
    f.transitions.assign(f.states.size(), {});
    for (auto it = j.at("transitions").begin(); it != j.at("transitions").end(); ++it) {
        int from = index_of(it.key());
        for (const auto& to : it.value())
            f.transitions[static_cast<std::size_t>(from)].push_back(
                index_of(to.get<std::string>()));
    }
    for (const auto& row : j.at("rewards")) {
        std::vector<Affine> r;
        for (const auto& a : row) r.push_back(affine_from(a, "rewards"));
        f.rewards.push_back(std::move(r));
    }
    if (j.contains("prior")) {
        const auto& p = j.at("prior");
        reject_unknown(p, {"type", "theta"}, "prior");
        std::string type = p.at("type").get<std::string>();
        if (type == "uniform") {
            f.prior.kind = PriorDef::Kind::Uniform;
        } else if (type == "point") {
            f.prior.kind = PriorDef::Kind::Point;
            f.prior.point = p.at("theta").get<std::vector<double>>();
        } else {
            throw ConfigError("family: unknown prior type '" + type + "'");
        }
    }
    return f;
}

FamilySpec family_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open family file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return family_from_json_text(text);
}

std::string family_to_json(const FamilySpec& f) {
    json j;
    j["name"] = f.name;
    j["horizon"] = f.horizon;
    j["actions"] = f.actions;
    j["obs_dim"] = f.obs_dim;
    j["obs_bound"] = f.obs_bound;
    j["theta_dim"] = f.theta_dim;
    j["alpha"] = f.alpha;
    j["holder_const"] = f.holder_const;
    j["zeta"] = f.zeta;
    j["layer_boxes"] = json::array();
    for (const auto& b : f.layer_boxes) j["layer_boxes"].push_back({{"lo", b.lo}, {"hi", b.hi}});
    j["states"] = json::array();
    for (const auto& s : f.states) {
        json bumps = json::array();
        for (const auto& b : s.bumps) {
            json centers = json::array();
            for (const auto& c : b.center) centers.push_back(affine_to(c));
            bumps.push_back({{"weight", affine_to(b.weight)},
                             {"center", centers},
                             {"halfwidth", b.halfwidth}});
        }
        j["states"].push_back({{"name", s.name}, {"layer", s.layer}, {"bumps", bumps}});
    }
    j["initial"] = f.states[static_cast<std::size_t>(f.initial)].name;
    json trans = json::object();
    for (std::size_t i = 0; i < f.transitions.size(); ++i) {
        if (f.transitions[i].empty()) continue;
        json row = json::array();
        for (int t : f.transitions[i])
            row.push_back(f.states[static_cast<std::size_t>(t)].name);
        trans[f.states[i].name] = row;
    }
    j["transitions"] = trans;
    j["rewards"] = json::array();
    for (const auto& row : f.rewards) {
        json r = json::array();
        for (const auto& a : row) r.push_back(affine_to(a));
        j["rewards"].push_back(r);
    }
    if (f.prior.kind == PriorDef::Kind::Point)
        j["prior"] = {{"type", "point"}, {"theta", f.prior.point}};
    else
        j["prior"] = {{"type", "uniform"}};
    return j.dump(2) + "\n";
}

}  // namespace s2r
