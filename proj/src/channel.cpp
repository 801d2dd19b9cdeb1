#include "hfce/channel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hfce {

double PathLossModel::amplitude(double dist_m, Rng& rng) const {
    if (!enabled) return 1.0;
    std::normal_distribution<double> shadow(0.0, shadow_sigma_db);
    const double pl_db = alpha_db + 10.0 * beta_exp * std::log10(dist_m) + shadow(rng);
    return std::pow(10.0, -pl_db / 20.0);
}

MarkovVRPrior MarkovVRPrior::from_sparsity(double lambda_vr, double p01) {
    if (lambda_vr <= 0.0 || lambda_vr > 1.0) throw std::invalid_argument("lambda_vr out of (0,1]");
    MarkovVRPrior m;
    m.lambda_vr = lambda_vr;
    m.p01 = p01;
    m.p10 = p01 * (1.0 - lambda_vr) / lambda_vr;
    return m;
}

PathSet sample_paths(const SystemGeometry& geom, int l_user, int l_rb, Rng& rng,
                     const PathSamplingOptions& opts) {
    if (l_user < 1 || l_rb < 1) throw std::invalid_argument("sample_paths: need at least one path");
    PathSet ps;
    ps.user_paths.resize(l_user);
    ps.rb_paths.resize(l_rb);

    const double bs_range = geom.bs_distance();
    for (int l = 0; l < l_user; ++l) {
        UserPath& p = ps.user_paths[l];
        p.angle = uniform_real(rng, -1.0, 1.0);
        p.range = uniform_real(rng, geom.user_range_min, geom.user_range_max);
        double amp = opts.path_loss.amplitude(p.range, rng);
        if (l == 0) amp *= std::pow(10.0, opts.los_power_boost_db / 20.0);
        p.gain = amp * complex_gaussian(rng);
    }
    for (int l = 0; l < l_rb; ++l) {
        RisBsPath& p = ps.rb_paths[l];
        p.bs_angle = uniform_real(rng, -1.0, 1.0);
        p.ris_angle = uniform_real(rng, -1.0, 1.0);
        p.gain = opts.path_loss.amplitude(bs_range, rng) * complex_gaussian(rng);
    }
    return ps;
}

VisibleRegion sample_vr(const SystemGeometry& geom, int l_user, const MarkovVRPrior& prior, Rng& rng) {
    if (prior.p01 < 0.0 || prior.p01 > 1.0 || prior.p10 < 0.0 || prior.p10 > 1.0)
        throw std::invalid_argument("sample_vr: transition probabilities out of [0,1]");
    const int K = geom.subarrays;
    const int rep = geom.elements_per_subarray();
    const double lambda_vr = prior.p01 + prior.p10 > 0.0
                                 ? prior.p01 / (prior.p01 + prior.p10)
                                 : 1.0;

    VisibleRegion vr;
    vr.phi_sub.setZero(K, l_user);
    vr.phi.setZero(geom.ris_elements, l_user);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    for (int l = 0; l < l_user; ++l) {
        bool ok = false;
        for (int attempt = 0; attempt < 50 && !ok; ++attempt) {
            int prev = u01(rng) < lambda_vr ? 1 : 0;
            vr.phi_sub(0, l) = prev;
            for (int k = 1; k < K; ++k) {
                const double p_vis = prev == 1 ? prior.p11() : prior.p01;
                prev = u01(rng) < p_vis ? 1 : 0;
                vr.phi_sub(k, l) = prev;
            }
            ok = vr.phi_sub.col(l).sum() > 0;
        }
        if (!ok) throw std::runtime_error("sample_vr: all-zero column after 50 attempts");
        for (int k = 0; k < K; ++k)
            vr.phi.col(l).segment(k * rep, rep).setConstant(vr.phi_sub(k, l));
    }
    return vr;
}

ChannelRealization synthesize_channel(const SystemGeometry& geom, const PathSet& paths,
                                      const VisibleRegion& vr) {
    if (paths.user_count() < 1 || paths.rb_count() < 1)
        throw std::invalid_argument("synthesize_channel: degenerate path set");
    if (vr.phi.rows() != geom.ris_elements || vr.phi.cols() != paths.user_count())
        throw std::invalid_argument("synthesize_channel: VR shape mismatch");

    const int N = geom.ris_elements;
    const int M = geom.bs_antennas;
    const double d = geom.d(), lambda = geom.lambda();

    ChannelRealization ch;
    ch.h_user.setZero(N);
    for (int l = 0; l < paths.user_count(); ++l) {
        const UserPath& p = paths.user_paths[l];
        const ComplexVector a = near_field_arv(N, p.angle, p.range, d, lambda, NearFieldMode::exact);
        ch.h_user += p.gain * (a.array() * vr.phi.col(l).cast<double>().cast<Complex>().array()).matrix();
    }

    ch.ris_bs.setZero(M, N);
    for (int l = 0; l < paths.rb_count(); ++l) {
        const RisBsPath& p = paths.rb_paths[l];
        const ComplexVector ab = far_field_arv(M, p.bs_angle, d, lambda);
        const ComplexVector ar = far_field_arv(N, p.ris_angle, d, lambda);
        ch.ris_bs += p.gain * ab * ar.adjoint();
    }

    ch.h_cascaded.resize(M * N);
    for (int n = 0; n < N; ++n) ch.h_cascaded.segment(n * M, M) = ch.ris_bs.col(n) * ch.h_user(n);
    if (!ch.h_cascaded.allFinite() || ch.h_cascaded.norm() == 0.0)
        throw std::runtime_error("synthesize_channel: degenerate cascaded channel");

    ch.paths = paths;
    ch.vr = vr;
    return ch;
}

PilotObservation observe(const SystemGeometry& geom, const ChannelRealization& ch, int pilots,
                         double snr_db, Rng& rng) {
    if (pilots < 1) throw std::invalid_argument("observe: pilots must be >= 1");
    const int M = geom.bs_antennas;
    const int N = geom.ris_elements;

    PilotObservation obs;
    obs.pilots = pilots;
    obs.ris_phases = random_phase_matrix(rng, N, pilots);

    ComplexVector stacked(M * pilots);
    for (int p = 0; p < pilots; ++p) {
        ComplexVector hp = ComplexVector::Zero(M);
        for (int n = 0; n < N; ++n)
            hp += ch.ris_bs.col(n) * (obs.ris_phases(n, p) * ch.h_user(n));
        stacked.segment(p * M, M) = hp;
    }

    if (std::isinf(snr_db)) {
        obs.noise_var = 0.0;
        obs.y = stacked;
        return obs;
    }
    const double snr_lin = std::pow(10.0, snr_db / 10.0);
    obs.noise_var = stacked.squaredNorm() / (static_cast<double>(M) * pilots * snr_lin);
    obs.y = stacked + complex_gaussian_vector(rng, M * pilots, obs.noise_var);
    return obs;
}

}  // namespace hfce
