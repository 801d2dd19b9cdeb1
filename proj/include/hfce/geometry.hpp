#ifndef HFCE_GEOMETRY_HPP
#define HFCE_GEOMETRY_HPP

#include <Eigen/Dense>

#include "hfce/types.hpp"

namespace hfce {

/// BS/RIS array layout and deployment geometry. The RIS is a ULA on the
/// x-axis with its reference element at the origin; the BS ULA sits at
/// bs_anchor. Distances in meters, angles as cosines in [-1, 1].
struct SystemGeometry {
    int bs_antennas = 16;       // M
    int ris_elements = 128;     // N
    int subarrays = 8;          // K, divides N
    double spacing = 0.0;       // d; 0 means lambda/2
    double wavelength = 0.0;    // lambda; 0 means derived from carrier_hz
    double carrier_hz = 28e9;
    Eigen::Vector2d bs_anchor{-90.0, -30.0};
    double user_range_min = 10.0;
    double user_range_max = 20.0;

    double lambda() const { return wavelength > 0.0 ? wavelength : kSpeedOfLight / carrier_hz; }
    double d() const { return spacing > 0.0 ? spacing : lambda() / 2.0; }
    int elements_per_subarray() const { return ris_elements / subarrays; }

    double ris_aperture() const { return ris_elements * d(); }
    double rayleigh_distance() const { return 2.0 * ris_aperture() * ris_aperture() / lambda(); }
    double bs_distance() const { return bs_anchor.norm(); }
    bool bs_in_far_field() const { return bs_distance() > rayleigh_distance(); }
    bool user_in_near_field() const { return user_range_max < rayleigh_distance(); }

    void validate() const;

    static SystemGeometry paper_scale();
    static SystemGeometry desk_scale();
};

enum class NearFieldMode { exact, fresnel };

/// Far-field ULA response, entry n = exp(-j 2 pi / lambda (n-1) d varphi).
ComplexVector far_field_arv(int n_elems, double varphi, double d, double lambda);

/// Generalized Fresnel response with explicit quadratic curvature zeta:
/// entry n = exp(-j 2 pi / lambda ((n-1) d varphi + (n-1)^2 d^2 zeta)).
/// zeta = 0 reproduces far_field_arv; zeta = (1 - varphi^2) / (2 r) is the
/// Fresnel expansion of a source at (varphi, r).
ComplexVector fresnel_arv(int n_elems, double varphi, double zeta, double d, double lambda);

/// Spherical-wave response of a source at angle cosine vartheta, range r.
/// `exact` uses the true per-element distance, `fresnel` the second-order
/// expansion. Entry 1 is 1 in both modes.
ComplexVector near_field_arv(int n_elems, double vartheta, double r, double d, double lambda,
                             NearFieldMode mode = NearFieldMode::exact);

/// d/d(delta_varphi) of fresnel_arv at fixed range r (r = +/-inf handled as
/// the zero-curvature far-field column).
ComplexVector fresnel_arv_dangle(int n_elems, double varphi, double r, double d, double lambda);

/// d/d(delta_r) of fresnel_arv at fixed angle.
ComplexVector fresnel_arv_drange(int n_elems, double varphi, double r, double d, double lambda);

/// d/d(delta_vartheta) of far_field_arv.
ComplexVector far_field_arv_dangle(int n_elems, double vartheta, double d, double lambda);

}  // namespace hfce

#endif
