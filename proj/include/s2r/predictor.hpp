#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "s2r/family.hpp"
#include "s2r/grid.hpp"

namespace s2r {

// One density probe: a lattice point of the named state's layer grid.
struct Probe {
    Path path;               // canonical path of the probed state
    std::size_t lattice_index;
};

// Contiguous probe range whose readings are averaged before signature
// matching. Window means of a KDE track window means of the true density far
// better than point values do (the smoothing bias cancels through the
// kernel's vanishing moments), so the theta lookup stays stable at desk
// sample sizes.
struct ProbeWindow {
    std::size_t first = 0;
    std::size_t count = 0;
};

// Geometry shared by every member of a predictor class: the probe set, the
// theta-net signatures those probes take on, and the x-cell partition of
// each layer box. Members differ only in their value tables.
struct PredictorGeometry {
    std::vector<Probe> probes;
    std::vector<ProbeWindow> windows;
    std::vector<std::vector<double>> net_signatures;  // [net][window]
    std::vector<double> net_thetas;                   // diagnostic only (1-d nets)
    int cells_per_axis = 64;
    std::shared_ptr<const EnvSpec> env;
    int actions = 0;
    // Flat table layout: [net][layer][cell][action].
    std::vector<std::size_t> layer_cell_count;  // cells per layer (dim-product)
    std::vector<std::size_t> layer_offset;      // into one net's block
    std::size_t net_stride = 0;

    std::size_t cell_of(int layer, std::span<const double> x) const;
    std::size_t table_index(std::size_t net, int layer, std::size_t cell, int action) const {
        return net * net_stride + layer_offset[static_cast<std::size_t>(layer - 1)] +
               cell * static_cast<std::size_t>(actions) + static_cast<std::size_t>(action);
    }
    // Sorted interior cell edges per layer (1-d), for exact oracle quadrature
    // of cell-wise-constant policies.
    std::vector<std::vector<double>> cell_edges() const;
};

class Predictor;

// A predictor bound to one density vector: the theta-net lookup is resolved
// once, after which evaluation is a table read.
class BoundPredictor {
public:
    BoundPredictor() = default;
    BoundPredictor(const Predictor* f, std::size_t net) : f_(f), net_(net) {}
    double value(std::span<const double> x, int a) const;
    int act(std::span<const double> x) const;
    std::size_t net() const { return net_; }

private:
    const Predictor* f_ = nullptr;
    std::size_t net_ = 0;
};

class Predictor {
public:
    Predictor(int id, std::string kind, double corruption,
              std::shared_ptr<const PredictorGeometry> geom, std::vector<double> table);

    int id() const { return id_; }
    const std::string& kind() const { return kind_; }
    // Recorded planted Bellman-residual magnitude (zero for the optimal member).
    double corruption() const { return corruption_; }
    const PredictorGeometry& geometry() const { return *geom_; }
    const std::vector<double>& table() const { return table_; }

    // Nearest net signature in sup norm over probe readings, lowest index on
    // ties.
    std::size_t resolve_net(const DensityVector& d) const;
    BoundPredictor bind(const DensityVector& d) const { return {this, resolve_net(d)}; }

    double predict(const DensityVector& d, std::span<const double> x, int a) const {
        return bind(d).value(x, a);
    }
    int induced_action(const DensityVector& d, std::span<const double> x) const {
        return bind(d).act(x);
    }

    double table_at(std::size_t net, int layer, std::size_t cell, int action) const {
        return table_[geom_->table_index(net, layer, cell, action)];
    }

private:
    friend class BoundPredictor;
    int id_;
    std::string kind_;
    double corruption_;
    std::shared_ptr<const PredictorGeometry> geom_;
    std::vector<double> table_;
};

struct PredictorClassOptions {
    int n_net = 256;
    int cells_per_axis = 64;
    double min_corruption = 0.1;
    // Window centers relative to each support half-width, and the number of
    // lattice steps on each side of a window center.
    std::vector<double> window_offsets = {-0.5, 0.0, 0.5};
    int window_half_points = 4;
    double oracle_tol = 1e-7;
};

class PredictorClass {
public:
    PredictorClass(std::shared_ptr<const PredictorGeometry> geom,
                   std::vector<Predictor> members, std::optional<int> star_index,
                   double lipschitz);

    const PredictorGeometry& geometry() const { return *geom_; }
    std::shared_ptr<const PredictorGeometry> geometry_ptr() const { return geom_; }
    const std::vector<Predictor>& members() const { return members_; }
    const Predictor& member(int id) const { return members_[static_cast<std::size_t>(id)]; }
    long size() const { return static_cast<long>(members_.size()); }
    std::optional<int> star_index() const { return star_; }
    // Shared Lipschitz bound over the density argument, measured across the
    // net at build time.
    double lipschitz() const { return lipschitz_; }

    std::string to_json() const;
    // The environment skeleton is not part of the artifact; pass it back in.
    static PredictorClass from_json(const std::string& text,
                                    std::shared_ptr<const EnvSpec> env);

private:
    std::shared_ptr<const PredictorGeometry> geom_;
    std::vector<Predictor> members_;
    std::optional<int> star_;
    double lipschitz_;
};

// Builds the realizable class: the tabulated optimal predictor (id 0) plus
// n_decoys corrupted variants with recorded corruption magnitudes.
PredictorClass build_class(const EnvFamily& family, int n_decoys,
                           const PredictorClassOptions& opts, Rng rng);

}  // namespace s2r
