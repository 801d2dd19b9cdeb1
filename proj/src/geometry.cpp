#include "hfce/geometry.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hfce {

void SystemGeometry::validate() const {
    if (bs_antennas < 1 || ris_elements < 1 || subarrays < 1)
        throw std::invalid_argument("geometry: array sizes must be positive");
    if (ris_elements % subarrays != 0)
        throw std::invalid_argument("geometry: ris_elements must be divisible by subarrays");
    if (d() <= 0.0 || lambda() <= 0.0)
        throw std::invalid_argument("geometry: spacing and wavelength must be positive");
    if (user_range_min <= 0.0 || user_range_max < user_range_min)
        throw std::invalid_argument("geometry: bad user range interval");
    if (!(rayleigh_distance() > 0.0))
        throw std::invalid_argument("geometry: Rayleigh distance not computable");
}

SystemGeometry SystemGeometry::paper_scale() {
    SystemGeometry g;
    g.bs_antennas = 16;
    g.ris_elements = 128;
    g.subarrays = 8;
    g.carrier_hz = 28e9;
    g.bs_anchor = Eigen::Vector2d(-90.0, -30.0);
    g.user_range_min = 10.0;
    g.user_range_max = 20.0;
    return g;
}

SystemGeometry SystemGeometry::desk_scale() {
    // Same carrier, shrunk arrays. The user ring and BS anchor are scaled so
    // the near/far-field split matches the full-size deployment: Rayleigh
    // distance ~5.5 m, BS just beyond it, users well inside.
    SystemGeometry g;
    g.bs_antennas = 8;
    g.ris_elements = 32;
    g.subarrays = 4;
    g.carrier_hz = 28e9;
    g.bs_anchor = Eigen::Vector2d(-5.6, -1.9);
    g.user_range_min = 0.3;
    g.user_range_max = 0.6;
    return g;
}

ComplexVector far_field_arv(int n_elems, double varphi, double d, double lambda) {
    if (std::abs(varphi) > 1.0) throw std::invalid_argument("far_field_arv: |varphi| > 1");
    return fresnel_arv(n_elems, varphi, 0.0, d, lambda);
}

ComplexVector fresnel_arv(int n_elems, double varphi, double zeta, double d, double lambda) {
    ComplexVector a(n_elems);
    const double k = 2.0 * kPi / lambda;
    for (int n = 0; n < n_elems; ++n) {
        const double phase = -k * (n * d * varphi + n * n * d * d * zeta);
        a(n) = Complex(std::cos(phase), std::sin(phase));
    }
    return a;
}

ComplexVector near_field_arv(int n_elems, double vartheta, double r, double d, double lambda,
                             NearFieldMode mode) {
    if (r <= 0.0) throw std::invalid_argument("near_field_arv: r must be positive");
    if (std::abs(vartheta) > 1.0) throw std::invalid_argument("near_field_arv: |vartheta| > 1");
    if (mode == NearFieldMode::fresnel)
        return fresnel_arv(n_elems, vartheta, (1.0 - vartheta * vartheta) / (2.0 * r), d, lambda);

    // Exact spherical distances. Element n sits at (-(n-1) d, 0) so that the
    // large-r limit agrees with far_field_arv(vartheta).
    ComplexVector a(n_elems);
    const double k = 2.0 * kPi / lambda;
    const double sin_theta = std::sqrt(std::max(0.0, 1.0 - vartheta * vartheta));
    const Eigen::Vector2d src(r * vartheta, r * sin_theta);
    for (int n = 0; n < n_elems; ++n) {
        const Eigen::Vector2d elem(-static_cast<double>(n) * d, 0.0);
        const double rn = (src - elem).norm();
        const double phase = -k * (rn - r);
        a(n) = Complex(std::cos(phase), std::sin(phase));
    }
    return a;
}

ComplexVector fresnel_arv_dangle(int n_elems, double varphi, double r, double d, double lambda) {
    const bool far_ring = !std::isfinite(r);
    const double zeta = far_ring ? 0.0 : (1.0 - varphi * varphi) / (2.0 * r);
    const ComplexVector a = fresnel_arv(n_elems, varphi, zeta, d, lambda);
    ComplexVector g(n_elems);
    const double k = 2.0 * kPi / lambda;
    for (int n = 0; n < n_elems; ++n) {
        const double lin = n * d;
        const double quad = far_ring ? 0.0 : n * n * d * d * varphi / r;
        g(n) = Complex(0.0, -k * (lin - quad)) * a(n);
    }
    return g;
}

ComplexVector fresnel_arv_drange(int n_elems, double varphi, double r, double d, double lambda) {
    if (!std::isfinite(r)) return ComplexVector::Zero(n_elems);  // far-field ring sentinel
    const double zeta = (1.0 - varphi * varphi) / (2.0 * r);
    const ComplexVector a = fresnel_arv(n_elems, varphi, zeta, d, lambda);
    ComplexVector g(n_elems);
    const double k = 2.0 * kPi / lambda;
    for (int n = 0; n < n_elems; ++n) {
        const double coeff = n * n * d * d * (1.0 - varphi * varphi) / (2.0 * r * r);
        g(n) = Complex(0.0, k * coeff) * a(n);
    }
    return g;
}

ComplexVector far_field_arv_dangle(int n_elems, double vartheta, double d, double lambda) {
    const ComplexVector a = far_field_arv(n_elems, vartheta, d, lambda);
    ComplexVector g(n_elems);
    const double k = 2.0 * kPi / lambda;
    for (int n = 0; n < n_elems; ++n) g(n) = Complex(0.0, -k * n * d) * a(n);
    return g;
}

}  // namespace hfce
