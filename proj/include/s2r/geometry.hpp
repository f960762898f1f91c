#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "s2r/errors.hpp"

namespace s2r {

// Axis-aligned box in R^d.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dim() const { return lo.size(); }

    bool contains(std::span<const double> x, double slack = 0.0) const {
        if (x.size() != lo.size()) return false;
        for (std::size_t k = 0; k < lo.size(); ++k)
            if (x[k] < lo[k] - slack || x[k] > hi[k] + slack) return false;
        return true;
    }

    double volume() const {
        double v = 1.0;
        for (std::size_t k = 0; k < lo.size(); ++k) v *= hi[k] - lo[k];
        return v;
    }

    bool operator==(const Box&) const = default;
};

// Uniform evaluation lattice over a box, endpoints included.
class Lattice {
public:
    Lattice() = default;

    Lattice(Box box, std::vector<std::size_t> points_per_axis)
        : box_(std::move(box)), npts_(std::move(points_per_axis)) {
        if (box_.dim() != npts_.size()) throw InputError("Lattice: dim mismatch");
        total_ = 1;
        spacing_.resize(npts_.size());
        for (std::size_t k = 0; k < npts_.size(); ++k) {
            if (npts_[k] < 2) throw InputError("Lattice: need >= 2 points per axis");
            total_ *= npts_[k];
            spacing_[k] = (box_.hi[k] - box_.lo[k]) / static_cast<double>(npts_[k] - 1);
        }
    }

    // Lattice with spacing approximately `target_spacing` on each axis.
    static Lattice with_spacing(const Box& box, double target_spacing) {
        std::vector<std::size_t> npts(box.dim());
        for (std::size_t k = 0; k < box.dim(); ++k) {
            double width = box.hi[k] - box.lo[k];
            auto n = static_cast<std::size_t>(width / target_spacing + 0.5);
            npts[k] = n + 1 < 2 ? 2 : n + 1;
        }
        return Lattice(box, std::move(npts));
    }

    const Box& box() const { return box_; }
    std::size_t dim() const { return npts_.size(); }
    std::size_t size() const { return total_; }
    const std::vector<std::size_t>& points_per_axis() const { return npts_; }
    const std::vector<double>& spacing() const { return spacing_; }

    // Coordinates of flat index i (row-major, last axis fastest).
    std::vector<double> point(std::size_t i) const {
        std::vector<double> x(dim());
        for (std::size_t k = dim(); k-- > 0;) {
            std::size_t ik = i % npts_[k];
            i /= npts_[k];
            x[k] = box_.lo[k] + spacing_[k] * static_cast<double>(ik);
        }
        return x;
    }

    bool operator==(const Lattice&) const = default;

private:
    Box box_;
    std::vector<std::size_t> npts_;
    std::vector<double> spacing_;
    std::size_t total_ = 0;
};

}  // namespace s2r
