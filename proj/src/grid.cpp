#include "s2r/grid.hpp"

#include <cmath>

namespace s2r {

double sup_distance(const DensityGrid& a, const DensityGrid& b) {
    if (a.lattice != b.lattice) throw InputError("sup_distance: lattice mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        double d = std::fabs(a.values[i] - b.values[i]);
        if (d > m) m = d;
    }
    return m;
}

double sup_distance(const DensityVector& a, const DensityVector& b) {
    if (a.size() != b.size()) throw InputError("sup_distance: key mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::size_t j = b.find(a.paths()[i]);
        if (j == DensityVector::npos) throw InputError("sup_distance: key mismatch");
        double d = sup_distance(a.grid(i), b.grid(j));
        if (d > m) m = d;
    }
    return m;
}

}  // namespace s2r
