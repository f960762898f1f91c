#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace s2r {

// Orthonormal Legendre polynomial on [-1, 1], no support indicator applied.
// psi_0 = 1/sqrt(2); higher orders via the three-term recurrence, scaled by
// sqrt((2m+1)/2).
double legendre_psi(int m, double t, int cap = 12);

// Product kernel built from the Legendre basis: one 1-d factor
//   gamma(t) = sum_{m=0}^{m_max} psi_m(0) psi_m(t) 1[-1 <= t <= 1]
// per coordinate, with m_max = ceil(alpha) - 1. Orders >= 2 take negative
// values somewhere; nothing downstream may assume nonnegativity.
class KernelSpec {
public:
    KernelSpec(double alpha, int dim, int cap = 12);

    double alpha() const { return alpha_; }
    int dim() const { return dim_; }
    int order() const { return m_max_; }
    const std::vector<double>& psi_at_zero() const { return psi0_; }

    double gamma(double t) const;
    double eval(std::span<const double> x) const;

    // sup |gamma| and integral of gamma^2 over [-1,1]; by orthonormality the
    // latter equals sum psi_m(0)^2.
    double gamma_sup() const;
    double gamma_l2sq() const;

private:
    double alpha_;
    int dim_;
    int m_max_;
    std::vector<double> psi0_;
};

struct MomentCheck {
    std::vector<int> exponents;  // s, |s| >= 1
    double value = 0.0;
    double target = 0.0;
    bool ok = false;
};

struct KernelCertificate {
    double integral = 0.0;          // target 1
    double integral_err = 0.0;
    double alpha_moment = 0.0;      // ∫ ||t||^alpha |kernel|, finite
    std::vector<MomentCheck> moments;
    double sup_norm = 0.0;
    double l2_norm = 0.0;
    bool ok = false;
    std::string failure;
};

// Numerically certifies the unit integral and the vanishing of all mixed
// moments of order 1..m_max, to `tol`. Throws nothing; inspect .ok.
KernelCertificate certify_k1(const KernelSpec& spec, double tol = 1e-8);

}  // namespace s2r
