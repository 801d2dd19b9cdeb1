#ifndef HFCE_CHANNEL_HPP
#define HFCE_CHANNEL_HPP

#include <vector>

#include "hfce/geometry.hpp"
#include "hfce/rng.hpp"
#include "hfce/types.hpp"

namespace hfce {

struct UserPath {
    double angle = 0.0;   // spatial angle cosine at the RIS
    double range = 0.0;   // distance to the scatterer (or the user for path 1)
    Complex gain{0.0, 0.0};
};

struct RisBsPath {
    double bs_angle = 0.0;   // AoA cosine at the BS
    double ris_angle = 0.0;  // AoD cosine at the RIS
    Complex gain{0.0, 0.0};
};

struct PathSet {
    std::vector<UserPath> user_paths;   // L_U entries, index 0 is the LoS path
    std::vector<RisBsPath> rb_paths;    // L_RB entries
    int user_count() const { return static_cast<int>(user_paths.size()); }
    int rb_count() const { return static_cast<int>(rb_paths.size()); }
};

/// Per-path visibility of RIS elements. Element-level rows replicate the
/// subarray-level rows: phi = phi_sub expanded by N/K per subarray.
struct VisibleRegion {
    IntMatrix phi;      // N x L_U
    IntMatrix phi_sub;  // K x L_U
};

struct ChannelRealization {
    ComplexVector h_user;       // N, user-RIS channel
    ComplexMatrix ris_bs;       // M x N, RIS-BS channel
    ComplexVector h_cascaded;   // M*N, vec(ris_bs * diag(h_user))
    PathSet paths;
    VisibleRegion vr;
};

struct PilotObservation {
    ComplexMatrix ris_phases;   // N x P, unit-modulus
    ComplexVector y;            // M*P stacked observations
    double noise_var = 0.0;     // per-entry complex noise variance
    int pilots = 0;
};

/// 28 GHz urban NLoS defaults; the citation in the source material gives the
/// model shape only, so these are config-level values.
struct PathLossModel {
    double alpha_db = 61.4;
    double beta_exp = 2.0;
    double shadow_sigma_db = 5.8;
    bool enabled = true;

    double amplitude(double dist_m, Rng& rng) const;
};

struct PathSamplingOptions {
    PathLossModel path_loss;
    double los_power_boost_db = 10.0;
};

/// Markov transition pair (p01: blocked->visible, p10: visible->blocked).
/// The stationary visibility probability is p01 / (p01 + p10).
struct MarkovVRPrior {
    double lambda_vr = 0.875;
    double p01 = 0.35;
    double p10 = 0.05;

    double p00() const { return 1.0 - p01; }
    double p11() const { return 1.0 - p10; }

    static MarkovVRPrior from_sparsity(double lambda_vr, double p01 = 0.35);
};

PathSet sample_paths(const SystemGeometry& geom, int l_user, int l_rb, Rng& rng,
                     const PathSamplingOptions& opts = {});

/// Per-column length-K Markov chains started from the stationary probability,
/// expanded to element level. Columns that come out all-blocked are redrawn
/// (a fully blocked path would be unidentifiable); throws after 50 attempts.
VisibleRegion sample_vr(const SystemGeometry& geom, int l_user, const MarkovVRPrior& prior, Rng& rng);

/// Ground-truth synthesis with exact spherical user-side responses (the
/// Fresnel form is reserved for dictionaries, keeping generator and estimator
/// decoupled).
ChannelRealization synthesize_channel(const SystemGeometry& geom, const PathSet& paths,
                                      const VisibleRegion& vr);

/// Random unit-modulus RIS probing phases; noise variance calibrated so that
/// ||h_stacked||^2 / (M P noise_var) equals the linear SNR. snr_db = +inf
/// gives a noiseless observation.
PilotObservation observe(const SystemGeometry& geom, const ChannelRealization& ch, int pilots,
                         double snr_db, Rng& rng);

}  // namespace hfce

#endif
