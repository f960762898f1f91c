#include "s2r/predictor.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "s2r/errors.hpp"
#include "s2r/oracle.hpp"

namespace s2r {

std::size_t PredictorGeometry::cell_of(int layer, std::span<const double> x) const {
    const Box& box = env->layer_box(layer);
    std::size_t cell = 0;
    for (std::size_t k = 0; k < box.dim(); ++k) {
        double w = (box.hi[k] - box.lo[k]) / cells_per_axis;
        auto ik = static_cast<long>(std::floor((x[k] - box.lo[k]) / w));
        ik = std::clamp<long>(ik, 0, cells_per_axis - 1);
        cell = cell * static_cast<std::size_t>(cells_per_axis) + static_cast<std::size_t>(ik);
    }
    return cell;
}

std::vector<std::vector<double>> PredictorGeometry::cell_edges() const {
    std::vector<std::vector<double>> edges;
    for (int h = 1; h <= env->horizon(); ++h) {
        const Box& box = env->layer_box(h);
        std::vector<double> e;
        if (box.dim() == 1) {
            double w = (box.hi[0] - box.lo[0]) / cells_per_axis;
            for (int i = 1; i < cells_per_axis; ++i) e.push_back(box.lo[0] + w * i);
        }
        edges.push_back(std::move(e));
    }
    return edges;
}

double BoundPredictor::value(std::span<const double> x, int a) const {
    const PredictorGeometry& g = f_->geometry();
    if (a < 0 || a >= g.actions) throw InputError("predict: invalid action");
    int layer = g.env->layer_of_point(x);
    if (layer == 0) throw InputError("predict: observation outside every layer box");
    return f_->table_[g.table_index(net_, layer, g.cell_of(layer, x), a)];
}

int BoundPredictor::act(std::span<const double> x) const {
    const PredictorGeometry& g = f_->geometry();
    int layer = g.env->layer_of_point(x);
    if (layer == 0) throw InputError("predict: observation outside every layer box");
    std::size_t cell = g.cell_of(layer, x);
    int best_a = 0;
    double best = -1.0;
    for (int a = 0; a < g.actions; ++a) {
        double v = f_->table_[g.table_index(net_, layer, cell, a)];
        if (v > best) {  // strict: ties resolve to the lowest action id
            best = v;
            best_a = a;
        }
    }
    return best_a;
}

Predictor::Predictor(int id, std::string kind, double corruption,
                     std::shared_ptr<const PredictorGeometry> geom, std::vector<double> table)
    : id_(id),
      kind_(std::move(kind)),
      corruption_(corruption),
      geom_(std::move(geom)),
      table_(std::move(table)) {
    for (double v : table_)
        if (v < -1e-9 || v > 1.0 + 1e-9)
            throw ConstructionError("Predictor: table value outside [0,1]");
}

std::size_t Predictor::resolve_net(const DensityVector& d) const {
    const auto& g = *geom_;
    std::vector<double> readings(g.windows.size());
    for (std::size_t w = 0; w < g.windows.size(); ++w) {
        double acc = 0.0;
        for (std::size_t i = 0; i < g.windows[w].count; ++i) {
            const Probe& pr = g.probes[g.windows[w].first + i];
            acc += d.grid_for(pr.path).values[pr.lattice_index];
        }
        readings[w] = acc / static_cast<double>(g.windows[w].count);
    }
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < g.net_signatures.size(); ++n) {
        double dist = 0.0;
        for (std::size_t i = 0; i < readings.size(); ++i) {
            double dd = std::fabs(readings[i] - g.net_signatures[n][i]);
            if (dd > dist) dist = dd;
        }
        if (dist < best_dist) {
            best_dist = dist;
            best = n;
        }
    }
    return best;
}

PredictorClass::PredictorClass(std::shared_ptr<const PredictorGeometry> geom,
                               std::vector<Predictor> members, std::optional<int> star_index,
                               double lipschitz)
    : geom_(std::move(geom)),
      members_(std::move(members)),
      star_(star_index),
      lipschitz_(lipschitz) {
    if (members_.empty()) throw ConstructionError("PredictorClass: needs at least one member");
}

namespace {

struct DecoyPlan {
    std::string kind;
    double magnitude;
    int target_layer;  // 0 = leaf layer shorthand
    int action;        // -1 = all actions
    bool net_signed;   // association decoy: sign flips across the net midpoint
    bool needs_lipschitz_scan;
};

// Owner of a cell center: the layer state whose support contains it, else
// the state with the nearest support center. Non-leaf overlap breaks the
// state-free table and is rejected.
StateId owner_state(const EnvFamily& family, const Env& env, int layer,
                    std::span<const double> x, bool allow_overlap) {
    const auto& states = family.env_spec()->layers()[static_cast<std::size_t>(layer - 1)];
    StateId inside = -1;
    int inside_count = 0;
    for (StateId s : states) {
        if (!family.env_spec()->reachable(s)) continue;
        if (env.density(s).support().contains(x)) {
            ++inside_count;
            if (inside == -1) inside = s;
        }
    }
    if (inside_count > 1 && !allow_overlap)
        throw ConstructionError(
            "build_class: overlapping same-layer supports below the last layer");
    if (inside != -1) return inside;
    double best = std::numeric_limits<double>::infinity();
    StateId best_s = states.front();
    for (StateId s : states) {
        if (!family.env_spec()->reachable(s)) continue;
        const Box& sup = env.density(s).support();
        double dist = 0.0;
        for (std::size_t k = 0; k < sup.dim(); ++k) {
            double c = 0.5 * (sup.lo[k] + sup.hi[k]);
            dist += (x[k] - c) * (x[k] - c);
        }
        if (dist < best) {
            best = dist;
            best_s = s;
        }
    }
    return best_s;
}

}  // namespace

PredictorClass build_class(const EnvFamily& family, int n_decoys,
                           const PredictorClassOptions& opts, Rng rng) {
    auto spec = family.env_spec();
    auto geom = std::make_shared<PredictorGeometry>();
    geom->env = spec;
    geom->actions = spec->action_count();
    geom->cells_per_axis = opts.cells_per_axis;

    const int H = spec->horizon();
    geom->layer_cell_count.resize(static_cast<std::size_t>(H));
    geom->layer_offset.resize(static_cast<std::size_t>(H));
    std::size_t off = 0;
    for (int h = 1; h <= H; ++h) {
        std::size_t cells = 1;
        for (std::size_t k = 0; k < spec->layer_box(h).dim(); ++k)
            cells *= static_cast<std::size_t>(opts.cells_per_axis);
        geom->layer_cell_count[static_cast<std::size_t>(h - 1)] = cells;
        geom->layer_offset[static_cast<std::size_t>(h - 1)] = off;
        off += cells * static_cast<std::size_t>(geom->actions);
    }
    geom->net_stride = off;

    // Probe windows: short lattice runs at the flanks and center of every
    // canonical state's density at the central parameter. Only axis 0 is
    // scanned; remaining axes sit at the support center.
    std::vector<double> theta_ref(static_cast<std::size_t>(family.def().theta_dim), 0.5);
    Env env_ref = family.env_at(theta_ref);
    for (const auto& cs : family.canonical_states()) {
        int layer = spec->layer_of(cs.state);
        Lattice lat = family.layer_lattice(layer);
        const Box& sup = env_ref.density(cs.state).support();
        for (double offset : opts.window_offsets) {
            std::vector<long> center_idx(lat.dim());
            for (std::size_t k = 0; k < lat.dim(); ++k) {
                double coord = 0.5 * (sup.lo[k] + sup.hi[k]);
                if (k == 0) coord += offset * 0.5 * (sup.hi[0] - sup.lo[0]);
                auto ik = static_cast<long>(
                    std::llround((coord - lat.box().lo[k]) / lat.spacing()[k]));
                center_idx[k] =
                    std::clamp<long>(ik, 0, static_cast<long>(lat.points_per_axis()[k]) - 1);
            }
            ProbeWindow window;
            window.first = geom->probes.size();
            for (long step = -opts.window_half_points; step <= opts.window_half_points;
                 ++step) {
                long i0 = std::clamp<long>(center_idx[0] + step, 0,
                                           static_cast<long>(lat.points_per_axis()[0]) - 1);
                std::size_t flat = 0;
                for (std::size_t k = 0; k < lat.dim(); ++k) {
                    long ik = k == 0 ? i0 : center_idx[k];
                    flat = flat * lat.points_per_axis()[k] + static_cast<std::size_t>(ik);
                }
                geom->probes.push_back({cs.path, flat});
            }
            window.count = geom->probes.size() - window.first;
            geom->windows.push_back(window);
        }
    }

    // Theta net: a uniform 1-d grid, or deterministic uniform draws beyond.
    const int n_net = opts.n_net;
    std::vector<std::vector<double>> net_thetas;
    Rng net_rng = rng.derive({phase_id(Phase::BuildClass), 1});
    for (int i = 0; i < n_net; ++i) {
        std::vector<double> th(static_cast<std::size_t>(family.def().theta_dim));
        if (family.def().theta_dim == 1) {
            th[0] = (static_cast<double>(i) + 0.5) / n_net;
        } else {
            for (auto& t : th) t = net_rng.uniform();
        }
        net_thetas.push_back(th);
    }
    geom->net_thetas.reserve(static_cast<std::size_t>(n_net));
    for (const auto& th : net_thetas) geom->net_thetas.push_back(th[0]);

    geom->net_signatures.assign(static_cast<std::size_t>(n_net), {});
    // Lattice point coordinates per probe, evaluated once.
    std::vector<std::vector<double>> probe_coords;
    for (const auto& pr : geom->probes) {
        StateId s = terminal_state(*spec, pr.path);
        Lattice lat = family.layer_lattice(spec->layer_of(s));
        probe_coords.push_back(lat.point(pr.lattice_index));
    }
    for (int i = 0; i < n_net; ++i) {
        Env env_i = family.env_at(net_thetas[static_cast<std::size_t>(i)]);
        auto& sig = geom->net_signatures[static_cast<std::size_t>(i)];
        sig.resize(geom->windows.size());
        for (std::size_t w = 0; w < geom->windows.size(); ++w) {
            double acc = 0.0;
            for (std::size_t q = 0; q < geom->windows[w].count; ++q) {
                std::size_t p = geom->windows[w].first + q;
                StateId s = terminal_state(*spec, geom->probes[p].path);
                acc += env_i.density(s).eval(probe_coords[p]);
            }
            sig[w] = acc / static_cast<double>(geom->windows[w].count);
        }
    }

    // Optimal tables: Q*(theta_i) discretized on cells.
    OracleOptions oracle_opts;
    oracle_opts.tol = opts.oracle_tol;
    std::vector<double> star_table(static_cast<std::size_t>(n_net) * geom->net_stride, 0.0);
    for (int i = 0; i < n_net; ++i) {
        Env env_i = family.env_at(net_thetas[static_cast<std::size_t>(i)]);
        ValueReport report = optimal_value(env_i, oracle_opts);
        for (int h = 1; h <= H; ++h) {
            const Box& box = spec->layer_box(h);
            std::size_t cells = geom->layer_cell_count[static_cast<std::size_t>(h - 1)];
            for (std::size_t c = 0; c < cells; ++c) {
                // Cell center coordinates (row-major inverse of cell_of).
                std::vector<double> x(box.dim());
                std::size_t rem = c;
                for (std::size_t k = box.dim(); k-- > 0;) {
                    std::size_t ik = rem % static_cast<std::size_t>(opts.cells_per_axis);
                    rem /= static_cast<std::size_t>(opts.cells_per_axis);
                    double w = (box.hi[k] - box.lo[k]) / opts.cells_per_axis;
                    x[k] = box.lo[k] + w * (static_cast<double>(ik) + 0.5);
                }
                StateId owner = owner_state(family, env_i, h, x, h == H);
                for (int a = 0; a < geom->actions; ++a) {
                    double q = family.mean_reward(
                        owner, x, a, net_thetas[static_cast<std::size_t>(i)]);
                    if (h < H)
                        q += report.v_star[static_cast<std::size_t>(spec->next_state(owner, a))];
                    if (q < 0.0 || q > 1.0 + 1e-9)
                        throw ConstructionError(
                            "build_class: optimal values leave [0,1]; scale the family "
                            "rewards down");
                    star_table[geom->table_index(static_cast<std::size_t>(i), h, c, a)] =
                        std::min(q, 1.0);
                }
            }
        }
    }

    std::vector<Predictor> members;
    members.emplace_back(0, "planted-optimal", 0.0, geom, star_table);

    const int leaf = H;
    const int root = 1;
    // Magnitudes >= 0.5 are the TD-Eliminate targets; the two mild decoys sit
    // below the elimination slack and below the survivor value-closeness
    // schedule, so they ride along to the end by design.
    std::vector<DecoyPlan> plan = {
        {"value-shift-leaf", 0.52, leaf, -1, false, false},
        {"value-shift-leaf-mild", 0.20, leaf, -1, false, false},
        {"value-shift-root", 0.50, root, -1, false, false},
        {"reward-corrupt-a0", 0.52, leaf, 0, false, false},
        {"reward-corrupt-a1", 0.52, leaf, std::min(1, geom->actions - 1), false, false},
        {"association-shift", 0.12, leaf, -1, true, true},
        {"value-shift-leaf-big", 0.60, leaf, -1, false, false},
    };
    for (int d = 0; d < n_decoys; ++d) {
        DecoyPlan p = plan[static_cast<std::size_t>(d) % plan.size()];
        p.magnitude += 0.01 * static_cast<double>(d / static_cast<int>(plan.size()));
        if (p.magnitude < opts.min_corruption) p.magnitude = opts.min_corruption;

        std::vector<double> table = star_table;
        // Headroom decides the shift sign; decoys must stay inside [0,1].
        const int layer = p.target_layer;
        std::size_t cells = geom->layer_cell_count[static_cast<std::size_t>(layer - 1)];
        double vmax = 0.0, vmin = 1.0;
        for (int i = 0; i < n_net; ++i) {
            for (std::size_t c = 0; c < cells; ++c) {
                for (int a = 0; a < geom->actions; ++a) {
                    if (p.action >= 0 && a != p.action) continue;
                    double v =
                        table[geom->table_index(static_cast<std::size_t>(i), layer, c, a)];
                    vmax = std::max(vmax, v);
                    vmin = std::min(vmin, v);
                }
            }
        }
        double shift;
        if (vmax + p.magnitude <= 1.0)
            shift = p.magnitude;
        else if (vmin - p.magnitude >= 0.0)
            shift = -p.magnitude;
        else
            throw ConstructionError("build_class: no headroom for decoy magnitude");
        for (int i = 0; i < n_net; ++i) {
            double s = shift;
            if (p.net_signed && i < n_net / 2) s = -shift;
            if (p.net_signed && (vmin - p.magnitude < 0.0 || vmax + p.magnitude > 1.0))
                throw ConstructionError("build_class: no headroom for association decoy");
            for (std::size_t c = 0; c < cells; ++c) {
                for (int a = 0; a < geom->actions; ++a) {
                    if (p.action >= 0 && a != p.action) continue;
                    auto idx = geom->table_index(static_cast<std::size_t>(i), layer, c, a);
                    table[idx] = std::clamp(table[idx] + s, 0.0, 1.0);
                }
            }
        }
        members.emplace_back(d + 1, p.kind, p.magnitude, geom, std::move(table));
    }

    // Shared Lipschitz constant: worst table-variation per unit signature
    // distance across the net, with slack for the net discretization at the
    // contract's reference perturbation size (0.01).
    double max_ratio = 0.0;
    double max_adjacent_gap = 0.0;
    for (std::size_t i = 0; i + 1 < geom->net_signatures.size(); ++i) {
        double g = 0.0;
        for (std::size_t w = 0; w < geom->windows.size(); ++w)
            g = std::max(g, std::fabs(geom->net_signatures[i][w] -
                                      geom->net_signatures[i + 1][w]));
        max_adjacent_gap = std::max(max_adjacent_gap, g);
    }
    for (const auto& member : members) {
        bool scan = member.id() == 0;
        for (const auto& pl : plan)
            if (pl.kind == member.kind() && pl.needs_lipschitz_scan) scan = true;
        if (!scan) continue;
        for (std::size_t i = 0; i < geom->net_signatures.size(); ++i) {
            for (std::size_t j = i + 1; j < geom->net_signatures.size(); ++j) {
                double sig_dist = 0.0;
                for (std::size_t w = 0; w < geom->windows.size(); ++w)
                    sig_dist = std::max(sig_dist, std::fabs(geom->net_signatures[i][w] -
                                                            geom->net_signatures[j][w]));
                if (sig_dist < 1e-12) continue;
                double table_diff = 0.0;
                for (std::size_t t = 0; t < geom->net_stride; ++t) {
                    double dd = std::fabs(member.table()[i * geom->net_stride + t] -
                                          member.table()[j * geom->net_stride + t]);
                    if (dd > table_diff) table_diff = dd;
                }
                max_ratio = std::max(max_ratio, table_diff / sig_dist);
            }
        }
    }
    double lipschitz = 2.0 * max_ratio * (1.0 + max_adjacent_gap / 0.01) * 1.1 + 1e-9;

    return PredictorClass(geom, std::move(members), 0, lipschitz);
}

std::string PredictorClass::to_json() const {
    nlohmann::json j;
    j["cells_per_axis"] = geom_->cells_per_axis;
    j["actions"] = geom_->actions;
    j["net_thetas"] = geom_->net_thetas;
    j["net_signatures"] = geom_->net_signatures;
    j["probes"] = nlohmann::json::array();
    for (const auto& p : geom_->probes)
        j["probes"].push_back({{"path", p.path}, {"lattice_index", p.lattice_index}});
    j["windows"] = nlohmann::json::array();
    for (const auto& w : geom_->windows)
        j["windows"].push_back({{"first", w.first}, {"count", w.count}});
    j["lipschitz"] = lipschitz_;
    if (star_) j["star_index"] = *star_;
    j["members"] = nlohmann::json::array();
    for (const auto& m : members_)
        j["members"].push_back({{"id", m.id()},
                                {"kind", m.kind()},
                                {"corruption", m.corruption()},
                                {"table", m.table()}});
    return j.dump();
}

PredictorClass PredictorClass::from_json(const std::string& text,
                                         std::shared_ptr<const EnvSpec> env) {
    nlohmann::json j = nlohmann::json::parse(text);
    auto geom = std::make_shared<PredictorGeometry>();
    geom->env = std::move(env);
    geom->actions = j.at("actions").get<int>();
    geom->cells_per_axis = j.at("cells_per_axis").get<int>();
    geom->net_thetas = j.at("net_thetas").get<std::vector<double>>();
    geom->net_signatures = j.at("net_signatures").get<std::vector<std::vector<double>>>();
    for (const auto& p : j.at("probes"))
        geom->probes.push_back(
            {p.at("path").get<Path>(), p.at("lattice_index").get<std::size_t>()});
    for (const auto& w : j.at("windows"))
        geom->windows.push_back(
            {w.at("first").get<std::size_t>(), w.at("count").get<std::size_t>()});
    const int H = geom->env->horizon();
    geom->layer_cell_count.resize(static_cast<std::size_t>(H));
    geom->layer_offset.resize(static_cast<std::size_t>(H));
    std::size_t off = 0;
    for (int h = 1; h <= H; ++h) {
        std::size_t cells = 1;
        for (std::size_t k = 0; k < geom->env->layer_box(h).dim(); ++k)
            cells *= static_cast<std::size_t>(geom->cells_per_axis);
        geom->layer_cell_count[static_cast<std::size_t>(h - 1)] = cells;
        geom->layer_offset[static_cast<std::size_t>(h - 1)] = off;
        off += cells * static_cast<std::size_t>(geom->actions);
    }
    geom->net_stride = off;

    std::vector<Predictor> members;
    for (const auto& m : j.at("members"))
        members.emplace_back(m.at("id").get<int>(), m.at("kind").get<std::string>(),
                             m.at("corruption").get<double>(), geom,
                             m.at("table").get<std::vector<double>>());
    std::optional<int> star;
    if (j.contains("star_index")) star = j.at("star_index").get<int>();
    return PredictorClass(geom, std::move(members), star, j.at("lipschitz").get<double>());
}

}  // namespace s2r
