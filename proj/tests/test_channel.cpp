#include <doctest.h>

#include <cmath>

#include "hfce/channel.hpp"
#include "hfce/io.hpp"

using namespace hfce;

namespace {

PathSamplingOptions no_pathloss() {
    PathSamplingOptions o;
    o.path_loss.enabled = false;
    o.los_power_boost_db = 0.0;
    return o;
}

}  // namespace

TEST_CASE("markov prior from sparsity reproduces the stated ratio") {
    const MarkovVRPrior m = MarkovVRPrior::from_sparsity(0.875, 0.35);
    CHECK(m.p10 == doctest::Approx(0.05));
    CHECK(m.p01 / (m.p01 + m.p10) == doctest::Approx(0.875));
    CHECK(m.p00() == doctest::Approx(0.65));
    CHECK(m.p11() == doctest::Approx(0.95));
}

TEST_CASE("vr sampling: absorbing visible state gives all-ones columns") {
    SystemGeometry g = SystemGeometry::desk_scale();
    Rng rng(11);
    MarkovVRPrior prior = MarkovVRPrior::from_sparsity(1.0, 0.35);  // p10 = 0
    const VisibleRegion vr = sample_vr(g, 3, prior, rng);
    CHECK(vr.phi_sub.minCoeff() == 1);
    CHECK(vr.phi.minCoeff() == 1);
}

TEST_CASE("vr sampling: replication invariant and no dead columns") {
    SystemGeometry g = SystemGeometry::desk_scale();
    Rng rng(12);
    const MarkovVRPrior prior = MarkovVRPrior::from_sparsity(0.6, 0.35);
    for (int t = 0; t < 50; ++t) {
        const VisibleRegion vr = sample_vr(g, 2, prior, rng);
        const int rep = g.elements_per_subarray();
        for (int l = 0; l < 2; ++l) {
            CHECK(vr.phi_sub.col(l).sum() > 0);
            for (int k = 0; k < g.subarrays; ++k)
                for (int i = 0; i < rep; ++i)
                    CHECK(vr.phi(k * rep + i, l) == vr.phi_sub(k, l));
        }
    }
}

TEST_CASE("vr sampling: empirical mean approaches the stationary probability") {
    SystemGeometry g = SystemGeometry::desk_scale();
    g.ris_elements = 64;
    g.subarrays = 8;  // conditioning on not-all-blocked is negligible at K = 8
    Rng rng(13);
    const MarkovVRPrior prior = MarkovVRPrior::from_sparsity(0.875, 0.35);
    const int samples = 20000;
    double mean = 0.0;
    for (int t = 0; t < samples; ++t)
        mean += sample_vr(g, 1, prior, rng).phi_sub.col(0).cast<double>().mean();
    mean /= samples;
    CHECK(mean == doctest::Approx(0.875).epsilon(0.0115));
}

TEST_CASE("single-path channel has the closed cascade form") {
    SystemGeometry g = SystemGeometry::desk_scale();
    PathSet ps;
    ps.user_paths.push_back({0.25, 0.45, Complex(1.0, 0.0)});
    ps.rb_paths.push_back({-0.4, 0.6, Complex(1.0, 0.0)});
    VisibleRegion vr;
    vr.phi_sub = IntMatrix::Ones(g.subarrays, 1);
    vr.phi = IntMatrix::Ones(g.ris_elements, 1);
    const ChannelRealization ch = synthesize_channel(g, ps, vr);

    const ComplexVector au =
        near_field_arv(g.ris_elements, 0.25, 0.45, g.d(), g.lambda(), NearFieldMode::exact);
    const ComplexVector ab = far_field_arv(g.bs_antennas, -0.4, g.d(), g.lambda());
    const ComplexVector ar = far_field_arv(g.ris_elements, 0.6, g.d(), g.lambda());
    const ComplexMatrix h_expected = ab * ar.adjoint();
    ComplexVector casc(g.bs_antennas * g.ris_elements);
    for (int n = 0; n < g.ris_elements; ++n)
        casc.segment(n * g.bs_antennas, g.bs_antennas) = h_expected.col(n) * au(n);
    CHECK((ch.h_cascaded - casc).norm() / casc.norm() < 1e-14);
}

TEST_CASE("fully blocked path contributes nothing") {
    SystemGeometry g = SystemGeometry::desk_scale();
    PathSet ps;
    ps.user_paths.push_back({0.2, 0.5, Complex(1.0, 0.5)});
    ps.user_paths.push_back({-0.6, 0.4, Complex(2.0, -1.0)});
    ps.rb_paths.push_back({0.1, -0.3, Complex(1.0, 0.0)});
    VisibleRegion vr;
    vr.phi_sub = IntMatrix::Ones(g.subarrays, 2);
    vr.phi = IntMatrix::Ones(g.ris_elements, 2);
    vr.phi_sub.col(1).setZero();
    vr.phi.col(1).setZero();
    const ChannelRealization both = synthesize_channel(g, ps, vr);

    PathSet only_first;
    only_first.user_paths.push_back(ps.user_paths[0]);
    only_first.rb_paths = ps.rb_paths;
    VisibleRegion vr1;
    vr1.phi_sub = IntMatrix::Ones(g.subarrays, 1);
    vr1.phi = IntMatrix::Ones(g.ris_elements, 1);
    const ChannelRealization first = synthesize_channel(g, only_first, vr1);
    CHECK((both.h_user - first.h_user).norm() == doctest::Approx(0.0));
}

TEST_CASE("random multipath user channel matches a per-element loop oracle") {
    SystemGeometry g = SystemGeometry::desk_scale();
    Rng rng(14);
    const PathSet ps = sample_paths(g, 3, 3, rng, no_pathloss());
    const MarkovVRPrior prior = MarkovVRPrior::from_sparsity(0.875, 0.35);
    const VisibleRegion vr = sample_vr(g, 3, prior, rng);
    const ChannelRealization ch = synthesize_channel(g, ps, vr);

    for (int n = 0; n < g.ris_elements; ++n) {
        Complex expected(0.0, 0.0);
        for (int l = 0; l < 3; ++l) {
            const UserPath& p = ps.user_paths[l];
            const double sin_t = std::sqrt(1.0 - p.angle * p.angle);
            const double ex = p.range * p.angle + n * g.d();
            const double ey = p.range * sin_t;
            const double rn = std::sqrt(ex * ex + ey * ey);
            const double phase = -2.0 * kPi / g.lambda() * (rn - p.range);
            expected += p.gain * Complex(std::cos(phase), std::sin(phase)) *
                        static_cast<double>(vr.phi(n, l));
        }
        CHECK(std::abs(ch.h_user(n) - expected) < 1e-12 * std::max(1.0, std::abs(expected)));
    }
}

TEST_CASE("observation blocks match a loop oracle and snr calibration holds") {
    SystemGeometry g = SystemGeometry::desk_scale();
    Rng rng(15);
    const PathSet ps = sample_paths(g, 2, 2, rng, no_pathloss());
    const MarkovVRPrior prior = MarkovVRPrior::from_sparsity(0.875, 0.35);
    const VisibleRegion vr = sample_vr(g, 2, prior, rng);
    const ChannelRealization ch = synthesize_channel(g, ps, vr);

    // noiseless observation equals the stacked per-pilot cascade
    Rng rng2(16);
    const PilotObservation clean = observe(g, ch, 4, std::numeric_limits<double>::infinity(), rng2);
    CHECK(clean.noise_var == 0.0);
    for (int p = 0; p < 4; ++p) {
        ComplexVector hp = ComplexVector::Zero(g.bs_antennas);
        for (int n = 0; n < g.ris_elements; ++n)
            hp += ch.ris_bs.col(n) * clean.ris_phases(n, p) * ch.h_user(n);
        CHECK((clean.y.segment(p * g.bs_antennas, g.bs_antennas) - hp).norm() < 1e-12 * hp.norm());
        for (int n = 0; n < g.ris_elements; ++n)
            CHECK(std::abs(std::abs(clean.ris_phases(n, p)) - 1.0) < 1e-12);
    }

    // empirical SNR over many draws within 0.2 dB of the target
    const double target_db = 10.0;
    double num = 0.0, den = 0.0;
    for (int t = 0; t < 300; ++t) {
        const PilotObservation obs = observe(g, ch, 8, target_db, rng2);
        ComplexVector clean_y(obs.y.size());
        for (int p = 0; p < 8; ++p) {
            ComplexVector hp = ComplexVector::Zero(g.bs_antennas);
            for (int n = 0; n < g.ris_elements; ++n)
                hp += ch.ris_bs.col(n) * obs.ris_phases(n, p) * ch.h_user(n);
            clean_y.segment(p * g.bs_antennas, g.bs_antennas) = hp;
        }
        num += clean_y.squaredNorm();
        den += (obs.y - clean_y).squaredNorm();
    }
    const double snr_db = 10.0 * std::log10(num / den);
    CHECK(snr_db == doctest::Approx(target_db).epsilon(0.02));
}

TEST_CASE("channel export/import round-trip") {
    SystemGeometry g = SystemGeometry::desk_scale();
    Rng rng(17);
    const PathSet ps = sample_paths(g, 2, 3, rng);
    const MarkovVRPrior prior = MarkovVRPrior::from_sparsity(0.875, 0.35);
    const VisibleRegion vr = sample_vr(g, 2, prior, rng);
    const ChannelRealization ch = synthesize_channel(g, ps, vr);

    const std::string base = "chan_roundtrip";
    export_channel(g, ch, base);
    const ImportedChannel got = import_channel(base);
    CHECK(got.geom.bs_antennas == g.bs_antennas);
    CHECK(got.geom.ris_elements == g.ris_elements);
    CHECK((got.ch.h_user - ch.h_user).norm() == doctest::Approx(0.0));
    CHECK((got.ch.h_cascaded - ch.h_cascaded).norm() == doctest::Approx(0.0));
    CHECK((got.ch.vr.phi_sub - ch.vr.phi_sub).norm() == 0);
    CHECK(got.ch.paths.user_paths[1].range == doctest::Approx(ch.paths.user_paths[1].range));
}
