#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "s2r/romdp.hpp"

namespace s2r {

// Expression over (x, theta): an affine part plus one optional smooth
// primitive, sin_amp * sin(2 pi sin_freq . theta + sin_phase). This is the
// whole grammar family files may use.
struct Affine {
    double c = 0.0;
    std::vector<double> x_coef;
    std::vector<double> theta_coef;
    double sin_amp = 0.0;
    std::vector<double> sin_freq;
    double sin_phase = 0.0;

    double eval(std::span<const double> x, std::span<const double> theta) const {
        double v = c;
        for (std::size_t k = 0; k < x_coef.size() && k < x.size(); ++k) v += x_coef[k] * x[k];
        for (std::size_t k = 0; k < theta_coef.size() && k < theta.size(); ++k)
            v += theta_coef[k] * theta[k];
        if (sin_amp != 0.0) {
            double arg = sin_phase;
            for (std::size_t k = 0; k < sin_freq.size() && k < theta.size(); ++k)
                arg += 2.0 * M_PI * sin_freq[k] * theta[k];
            v += sin_amp * std::sin(arg);
        }
        return v;
    }
};

// One C-infinity bump factor per axis: exp(-1/(1-u^2)) scaled to integrate
// to one over its support box.
struct BumpTerm {
    Affine weight;                  // mixture weight (theta only)
    std::vector<Affine> center;     // per axis (theta only)
    std::vector<double> halfwidth;  // per axis
};

struct StateDef {
    std::string name;
    int layer = 1;  // 1-based
    std::vector<BumpTerm> bumps;
};

struct PriorDef {
    enum class Kind { Uniform, Point } kind = Kind::Uniform;
    std::vector<double> point;  // used when kind == Point
};

// Declarative family: shared skeleton plus theta-parameterized densities and
// rewards. Loadable from JSON (see family_json.cpp for the schema).
struct FamilySpec {
    std::string name;
    int horizon = 1;
    int actions = 1;
    int obs_dim = 1;
    double obs_bound = 1.0;
    int theta_dim = 1;
    double alpha = 2.5;         // declared Holder order of the densities
    double holder_const = 0.0;  // declared C_alpha
    double zeta = 0.0;          // declared separation
    std::vector<Box> layer_boxes;
    std::vector<StateDef> states;            // ids by position
    std::vector<std::vector<int>> transitions;  // [state][action] -> state index
    int initial = 0;
    std::vector<std::vector<Affine>> rewards;   // [layer-1][action], affine over (x, theta)
    PriorDef prior;
};

// A state's slot in the canonical (DFS preorder) enumeration, the indexing
// predictors and discovery share.
struct CanonicalState {
    Path path;
    StateId state;
};

class EnvFamily {
public:
    explicit EnvFamily(FamilySpec spec);

    const FamilySpec& def() const { return def_; }
    std::shared_ptr<const EnvSpec> env_spec() const { return spec_; }

    // Environment at an explicit parameter, without invariant checks.
    Env env_at(std::span<const double> theta) const;

    // Draw theta from the prior, build the environment, and verify the
    // family invariants for that draw. Throws ConstructionError naming the
    // violated assumption.
    Env sample_env(Rng& rng) const;
    std::vector<double> sample_theta(Rng& rng) const;

    // Lattice-scan separation check (distinguishability): every same-layer
    // state pair at this theta must differ by more than zeta somewhere.
    void check_separation(std::span<const double> theta) const;
    // Finite-difference Holder probe of the declared (alpha, C_alpha).
    void check_holder(std::span<const double> theta) const;

    // DFS preorder over reachable states with ascending actions; gives the
    // slot order used by predictors and expected from discovery.
    const std::vector<CanonicalState>& canonical_states() const { return canonical_; }

    // Evaluation lattice for a layer box at the default spacing C_b/64.
    Lattice layer_lattice(int layer) const;

    // True-density grids for every canonical slot at this theta.
    DensityVector true_density_vector(std::span<const double> theta) const;

    double mean_reward(StateId s, std::span<const double> x, int a,
                       std::span<const double> theta) const;

private:
    FamilySpec def_;
    std::shared_ptr<const EnvSpec> spec_;
    std::vector<CanonicalState> canonical_;
};

// Built-in families (also writable as JSON via family_to_json).
FamilySpec builtin_family(const std::string& name);

FamilySpec family_from_json_text(const std::string& text);
FamilySpec family_from_json_file(const std::string& path);
std::string family_to_json(const FamilySpec& spec);

// Density classes reused by tests.
class BumpMixtureDensity : public Density {
public:
    BumpMixtureDensity(std::vector<double> weights, std::vector<std::vector<double>> centers,
                       std::vector<std::vector<double>> halfwidths);
    double eval(std::span<const double> x) const override;
    const Box& support() const override { return support_; }
    double sup_bound() const override { return sup_bound_; }

private:
    std::vector<double> weights_;
    std::vector<std::vector<double>> centers_;
    std::vector<std::vector<double>> halfwidths_;
    Box support_;
    double sup_bound_;
};

class UniformDensity : public Density {
public:
    explicit UniformDensity(Box b) : box_(std::move(b)) {
        value_ = 1.0 / box_.volume();
    }
    double eval(std::span<const double> x) const override {
        return box_.contains(x) ? value_ : 0.0;
    }
    const Box& support() const override { return box_; }
    double sup_bound() const override { return value_ * 1.0000001; }

private:
    Box box_;
    double value_;
};

// 1-d mollifier bump normalizer: integral of exp(-1/(1-u^2)) over [-1, 1].
double bump_norm_1d();

}  // namespace s2r
