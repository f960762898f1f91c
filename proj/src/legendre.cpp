#include "s2r/legendre.hpp"

#include <cmath>

#include "s2r/errors.hpp"
#include "s2r/quadrature.hpp"

namespace s2r {

double legendre_psi(int m, double t, int cap) {
    if (m < 0) throw InputError("legendre_psi: order must be >= 0");
    if (m > cap) throw InputError("legendre_psi: order " + std::to_string(m) +
                                  " exceeds cap " + std::to_string(cap));
    double p0 = 1.0;
    if (m == 0) return p0 / std::sqrt(2.0);
    double p1 = t;
    for (int k = 1; k < m; ++k) {
        double p2 = ((2.0 * k + 1.0) * t * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    return std::sqrt((2.0 * m + 1.0) / 2.0) * p1;
}

KernelSpec::KernelSpec(double alpha, int dim, int cap) : alpha_(alpha), dim_(dim) {
    if (alpha <= 1.0) throw InputError("KernelSpec: alpha must exceed 1");
    if (dim < 1) throw InputError("KernelSpec: dim must be >= 1");
    m_max_ = static_cast<int>(std::ceil(alpha)) - 1;
    if (m_max_ > cap) throw InputError("KernelSpec: kernel order exceeds cap");
    psi0_.resize(static_cast<std::size_t>(m_max_) + 1);
    for (int m = 0; m <= m_max_; ++m) psi0_[static_cast<std::size_t>(m)] = legendre_psi(m, 0.0, cap);
}

double KernelSpec::gamma(double t) const {
    if (t < -1.0 || t > 1.0) return 0.0;
    double s = 0.0;
    for (int m = 0; m <= m_max_; ++m) {
        double c = psi0_[static_cast<std::size_t>(m)];
        if (c != 0.0) s += c * legendre_psi(m, t);
    }
    return s;
}

double KernelSpec::eval(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_) throw InputError("kernel eval: dim mismatch");
    double v = 1.0;
    for (double c : x) {
        v *= gamma(c);
        if (v == 0.0) return 0.0;
    }
    return v;
}

double KernelSpec::gamma_sup() const {
    double m = 0.0;
    const int n = 8192;
    for (int i = 0; i <= n; ++i) {
        double t = -1.0 + 2.0 * static_cast<double>(i) / n;
        double v = std::fabs(gamma(t));
        if (v > m) m = v;
    }
    return m;
}

double KernelSpec::gamma_l2sq() const {
    double s = 0.0;
    for (double c : psi0_) s += c * c;
    return s;
}

namespace {

// All exponent vectors s >= 0 with 1 <= |s| <= max_total.
void enumerate_exponents(int dim, int max_total, std::vector<int>& cur,
                         std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == dim) {
        int total = 0;
        for (int e : cur) total += e;
        if (total >= 1 && total <= max_total) out.push_back(cur);
        return;
    }
    for (int e = 0; e <= max_total; ++e) {
        cur.push_back(e);
        enumerate_exponents(dim, max_total, cur, out);
        cur.pop_back();
    }
}

}  // namespace

KernelCertificate certify_k1(const KernelSpec& spec, double tol) {
    KernelCertificate cert;
    Box cube;
    cube.lo.assign(static_cast<std::size_t>(spec.dim()), -1.0);
    cube.hi.assign(static_cast<std::size_t>(spec.dim()), 1.0);

    QuadOptions poly_opts;
    poly_opts.tol = 1e-13;
    poly_opts.nodes_per_panel = 12;
    poly_opts.initial_panels = 2;
    poly_opts.max_points = 1 << 22;

    auto unit = integrate(cube, [&](std::span<const double> x) { return spec.eval(x); },
                          poly_opts);
    cert.integral = unit.value;
    cert.integral_err = unit.error_estimate;

    std::vector<std::vector<int>> exps;
    std::vector<int> cur;
    enumerate_exponents(spec.dim(), spec.order(), cur, exps);
    cert.ok = std::fabs(cert.integral - 1.0) <= tol;
    if (!cert.ok) cert.failure = "unit integral off target";
    for (const auto& s : exps) {
        auto mom = integrate(cube,
                             [&](std::span<const double> x) {
                                 double v = spec.eval(x);
                                 for (std::size_t k = 0; k < x.size(); ++k)
                                     for (int e = 0; e < s[k]; ++e) v *= x[k];
                                 return v;
                             },
                             poly_opts);
        MomentCheck mc;
        mc.exponents = s;
        mc.value = mom.value;
        mc.ok = std::fabs(mom.value) <= tol;
        if (!mc.ok && cert.failure.empty()) {
            cert.failure = "moment (";
            for (std::size_t k = 0; k < s.size(); ++k) {
                if (k) cert.failure += ",";
                cert.failure += std::to_string(s[k]);
            }
            cert.failure += ") off target";
        }
        cert.ok = cert.ok && mc.ok;
        cert.moments.push_back(std::move(mc));
    }

    QuadOptions abs_opts;
    abs_opts.tol = 1e-9;
    abs_opts.nodes_per_panel = 8;
    abs_opts.initial_panels = spec.dim() >= 2 ? 32 : 128;
    abs_opts.max_points = 1 << 22;
    auto am = integrate(cube,
                        [&](std::span<const double> x) {
                            double n2 = 0.0;
                            for (double c : x) n2 += c * c;
                            return std::pow(n2, 0.5 * spec.alpha()) *
                                   std::fabs(spec.eval(x));
                        },
                        abs_opts);
    cert.alpha_moment = am.value;
    if (!std::isfinite(cert.alpha_moment)) {
        cert.ok = false;
        if (cert.failure.empty()) cert.failure = "alpha moment not finite";
    }

    cert.sup_norm = std::pow(spec.gamma_sup(), spec.dim());
    cert.l2_norm = std::pow(spec.gamma_l2sq(), 0.5 * spec.dim());
    return cert;
}

}  // namespace s2r
