#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "s2r/geometry.hpp"

namespace s2r {

// A path is the learner-visible name of a state: the action sequence leading
// to it from the initial state. The empty path denotes the initial state.
using Path = std::vector<int>;

inline std::string path_str(const Path& p) {
    std::string s = "[";
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(p[i]);
    }
    return s + "]";
}

// Hash label for RNG stream derivation; injective for action counts < 2^6
// and horizons < 10, which covers every bench family here.
inline std::uint64_t path_label(const Path& p) {
    std::uint64_t h = 1;
    for (int a : p) h = h * 64 + static_cast<std::uint64_t>(a + 1);
    return h;
}

enum class GridProvenance { TrueDensity, Kde };

// Lattice evaluation of one (possibly signed) density over a layer box.
struct DensityGrid {
    Lattice lattice;
    std::vector<double> values;
    GridProvenance provenance = GridProvenance::TrueDensity;
    long kde_n = 0;       // sample count when provenance == Kde
    double kde_h = 0.0;   // bandwidth when provenance == Kde
};

// Max over lattice points of |a - b|; the computable stand-in for the
// sup-norm distance between two densities on the same layer box.
double sup_distance(const DensityGrid& a, const DensityGrid& b);

// Per-state density store: entry i holds the density grid of the state named
// by paths[i]. Lookup canonicalizes through the alias structure established
// at discovery time, so aliased paths read their canonical twin's grid.
class DensityVector {
public:
    void add(Path path, DensityGrid grid) {
        paths_.push_back(std::move(path));
        grids_.push_back(std::move(grid));
        ++version_;
    }

    std::size_t size() const { return paths_.size(); }
    const std::vector<Path>& paths() const { return paths_; }
    const DensityGrid& grid(std::size_t slot) const { return grids_[slot]; }
    DensityGrid& grid(std::size_t slot) { return grids_[slot]; }

    // Slot of an exact path key, or npos.
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t find(const Path& p) const {
        for (std::size_t i = 0; i < paths_.size(); ++i)
            if (paths_[i] == p) return i;
        return npos;
    }

    // Register that `path` reads the same grid as the (already present)
    // canonical path; realizes the descendant-copy step of discovery.
    void add_alias(const Path& path, const Path& canonical) {
        std::size_t slot = lookup(canonical);
        aliases_.emplace_back(path, slot);
        ++version_;
    }

    // Slot for a path, following aliases; throws if unknown.
    std::size_t lookup(const Path& p) const {
        std::size_t s = find(p);
        if (s != npos) return s;
        for (const auto& [ap, slot] : aliases_)
            if (ap == p) return slot;
        throw InputError("DensityVector: unknown state path " + path_str(p));
    }
    const DensityGrid& grid_for(const Path& p) const { return grids_[lookup(p)]; }

    // Monotonic stamp; lets predictor bindings cache per vector state.
    std::uint64_t version() const { return version_; }

private:
    std::vector<Path> paths_;
    std::vector<DensityGrid> grids_;
    std::vector<std::pair<Path, std::size_t>> aliases_;
    std::uint64_t version_ = 0;
};

// Max over shared slots of per-slot sup_distance; key sets must agree.
double sup_distance(const DensityVector& a, const DensityVector& b);

}  // namespace s2r
