#include <doctest.h>

#include <cmath>

#include "hfce/dictionary.hpp"
#include "hfce/rng.hpp"
#include "hfce/sensing.hpp"
#include "hfce/turbo_vr.hpp"

using namespace hfce;

namespace {

double gauss(double x, double mean, double var) {
    return std::exp(-(x - mean) * (x - mean) / (2.0 * var)) / std::sqrt(2.0 * kPi * var);
}

// Exhaustive chain posterior: prior p(v_1) prod p(v_k | v_{k-1}) times the
// Gaussian pseudo-observations; optionally excludes node `skip`'s
// observation (for extrinsic marginals).
RealVector enumerate_marginals(const RealVector& alpha, const RealVector& beta,
                               const MarkovVRPrior& prior, int skip = -1) {
    const int k_sub = static_cast<int>(alpha.size());
    RealVector marg = RealVector::Zero(k_sub);
    double total = 0.0;
    for (int cfg = 0; cfg < (1 << k_sub); ++cfg) {
        double w = 1.0;
        int prev = 0;
        for (int k = 0; k < k_sub; ++k) {
            const int v = (cfg >> k) & 1;
            if (k == 0)
                w *= v ? prior.lambda_vr : 1.0 - prior.lambda_vr;
            else
                w *= v ? (prev ? prior.p11() : prior.p01) : (prev ? prior.p10 : prior.p00());
            if (k != skip) w *= gauss(alpha(k), v, beta(k));
            prev = v;
        }
        total += w;
        for (int k = 0; k < k_sub; ++k)
            if ((cfg >> k) & 1) marg(k) += w;
    }
    return marg / total;
}

}  // namespace

TEST_CASE("realify: reconstruction identity and noise split") {
    Rng rng(51);
    const ComplexMatrix d2 = complex_gaussian_matrix(rng, 10, 6);
    const RealVector phi = (RealVector::Random(6).array() > 0.0).cast<double>();
    const ComplexVector y = d2 * phi.cast<Complex>();
    const RealifiedModel rm = realify(y, d2);
    const RealVector lhs = rm.d_bar * phi;
    CHECK((lhs.head(10) - y.real()).norm() < 1e-12);
    CHECK((lhs.tail(10) - y.imag()).norm() < 1e-12);

    // purely real observation: imaginary block is exactly zero
    const RealifiedModel rm2 = realify(ComplexVector::Ones(4), ComplexMatrix::Ones(4, 2));
    CHECK(rm2.y_bar.tail(4).norm() == 0.0);
    CHECK_THROWS_AS((void)realify(y, ComplexMatrix(10, 0)), std::invalid_argument);

    // complex noise of variance 1/kappa splits into real parts of variance
    // 1/(2 kappa)
    const double kappa = 4.0;
    double acc = 0.0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        const Complex z = complex_gaussian(rng, 1.0 / kappa);
        acc += z.real() * z.real();
    }
    CHECK(acc / draws == doctest::Approx(1.0 / (2.0 * kappa)).epsilon(0.03));
}

TEST_CASE("lmmse: limiting cases and the joint-Gaussian oracle") {
    Rng rng(52);
    const int n = 6, rows = 8;
    RealMatrix d = RealMatrix::Random(rows, n);
    const RealVector truth = RealVector::Random(n);
    const double kappa = 50.0;
    RealVector noise(rows);
    for (int i = 0; i < rows; ++i) noise(i) = uniform_real(rng, -0.01, 0.01);
    const RealVector y = d * truth + noise;

    RealVector alpha_post, beta_post;
    // flat prior: posterior mean approaches least squares
    lmmse_step(y, d, kappa, RealVector::Zero(n), RealVector::Constant(n, 1e12), alpha_post, beta_post);
    const RealVector ls = d.colPivHouseholderQr().solve(y);
    CHECK((alpha_post - ls).norm() < 1e-6 * ls.norm());

    // dogmatic prior: posterior sticks to it
    const RealVector pri = RealVector::Constant(n, 0.3);
    lmmse_step(y, d, kappa, pri, RealVector::Constant(n, 1e-12), alpha_post, beta_post);
    CHECK((alpha_post - pri).norm() < 1e-6);

    // joint-Gaussian conditional mean/covariance oracle
    const RealVector prior_mean = RealVector::Random(n);
    RealVector prior_var(n);
    for (int i = 0; i < n; ++i) prior_var(i) = uniform_real(rng, 0.2, 2.0);
    lmmse_step(y, d, kappa, prior_mean, prior_var, alpha_post, beta_post);
    const RealMatrix sigma_yy =
        d * prior_var.asDiagonal() * d.transpose() + RealMatrix::Identity(rows, rows) / kappa;
    const RealMatrix sigma_xy = prior_var.asDiagonal() * d.transpose();
    const RealVector cond_mean = prior_mean + sigma_xy * sigma_yy.ldlt().solve(y - d * prior_mean);
    const RealMatrix cond_cov =
        RealMatrix(prior_var.asDiagonal()) - sigma_xy * sigma_yy.ldlt().solve(sigma_xy.transpose());
    CHECK((alpha_post - cond_mean).norm() < 1e-10 * std::max(1.0, cond_mean.norm()));
    CHECK((beta_post - cond_cov.diagonal()).norm() < 1e-10);
}

TEST_CASE("decorrelate: limits, clamping, gaussian recombination") {
    const int n = 4;
    RealVector post_mean = RealVector::Random(n);
    RealVector post_var(n), pri_var(n);
    for (int i = 0; i < n; ++i) {
        post_var(i) = 0.2 + 0.05 * i;
        pri_var(i) = 1.0 + 0.3 * i;
    }
    const RealVector pri_mean = RealVector::Random(n);
    RealVector ext_mean, ext_var;

    // infinite prior variance: extrinsic equals the posterior
    decorrelate(post_mean, post_var, pri_mean, RealVector::Constant(n, 1e30), ext_mean, ext_var);
    CHECK((ext_mean - post_mean).norm() < 1e-9);
    CHECK((ext_var - post_var).norm() / post_var.norm() < 1e-9);

    // posterior equals prior: capped variance, mean pinned to the posterior
    decorrelate(post_mean, post_var, pri_mean, post_var, ext_mean, ext_var);
    CHECK((ext_var.array() == 1e8).all());
    CHECK((ext_mean - post_mean).norm() == 0.0);

    // product of Gaussians: combining extrinsic with the prior reproduces the
    // posterior
    decorrelate(post_mean, post_var, pri_mean, pri_var, ext_mean, ext_var);
    for (int i = 0; i < n; ++i) {
        const double prec = 1.0 / ext_var(i) + 1.0 / pri_var(i);
        const double mean = (ext_mean(i) / ext_var(i) + pri_mean(i) / pri_var(i)) / prec;
        CHECK(1.0 / prec == doctest::Approx(post_var(i)).epsilon(1e-9));
        CHECK(mean == doctest::Approx(post_mean(i)).epsilon(1e-9));
    }
}

TEST_CASE("mp_step: single node reduces to the Bayes combination") {
    const MarkovVRPrior prior = MarkovVRPrior::from_sparsity(0.8, 0.3);
    RealMatrix alpha(1, 1), beta(1, 1);
    alpha(0, 0) = 0.7;
    beta(0, 0) = 0.2;
    const MpResult r = mp_step(alpha, beta, prior);
    const double l1 = gauss(0.7, 1.0, 0.2) * prior.lambda_vr;
    const double l0 = gauss(0.7, 0.0, 0.2) * (1.0 - prior.lambda_vr);
    CHECK(r.posterior(0, 0) == doctest::Approx(l1 / (l1 + l0)).epsilon(1e-10));
    CHECK(r.pi_out(0, 0) == doctest::Approx(prior.lambda_vr).epsilon(1e-10));
}

TEST_CASE("mp_step: exhaustive enumeration oracle for K in {2,4,6,8}") {
    Rng rng(53);
    const MarkovVRPrior prior = MarkovVRPrior::from_sparsity(0.875, 0.35);
    for (int k_sub : {2, 4, 6, 8}) {
        for (int trial = 0; trial < 20; ++trial) {
            RealMatrix alpha(k_sub, 1), beta(k_sub, 1);
            for (int k = 0; k < k_sub; ++k) {
                alpha(k, 0) = uniform_real(rng, -0.5, 1.5);
                beta(k, 0) = uniform_real(rng, 0.05, 2.0);
            }
            const MpResult r = mp_step(alpha, beta, prior);
            const RealVector post = enumerate_marginals(alpha.col(0), beta.col(0), prior);
            for (int k = 0; k < k_sub; ++k)
                CHECK(std::abs(r.posterior(k, 0) - post(k)) < 1e-10);
            // extrinsic output: marginal with node k's own observation removed
            for (int k = 0; k < k_sub; ++k) {
                const RealVector ext = enumerate_marginals(alpha.col(0), beta.col(0), prior, k);
                CHECK(std::abs(r.pi_out(k, 0) - ext(k)) < 1e-10);
            }
        }
    }
}

TEST_CASE("mp_step: uninformative observations recover the stationary marginal") {
    const MarkovVRPrior prior = MarkovVRPrior::from_sparsity(0.875, 0.35);
    const int k_sub = 6;
    const RealMatrix alpha = RealMatrix::Constant(k_sub, 2, 0.4);
    const RealMatrix beta = RealMatrix::Constant(k_sub, 2, 1e12);
    const MpResult r = mp_step(alpha, beta, prior);
    for (int c = 0; c < 2; ++c)
        for (int k = 0; k < k_sub; ++k) {
            CHECK(r.pi_out(k, c) == doctest::Approx(prior.lambda_vr).epsilon(1e-6));
            CHECK(r.posterior(k, c) == doctest::Approx(prior.lambda_vr).epsilon(1e-6));
        }
}

namespace {

struct VRInstance {
    SystemGeometry geom;
    DictionarySet dict;
    ComplexMatrix phases;
    ComplexVector x_true;
    IntMatrix phi_true;  // K x Qbar
    std::vector<int> active;
    ComplexVector y;
};

VRInstance make_vr_instance(Rng& rng, double lambda_vr, int blocked_run) {
    SystemGeometry g = SystemGeometry::desk_scale();
    g.subarrays = 8;
    VRInstance inst{g,
                    DictionarySet::build(g, DictionaryOptions::for_geometry(g, 64, 2)),
                    random_phase_matrix(rng, g.ris_elements, 24),
                    {},
                    {},
                    {},
                    {}};
    const int m = inst.dict.m(), qbar = inst.dict.q_bar();
    inst.x_true = ComplexVector::Zero(m * qbar);
    inst.active = {9, 30, 51};
    inst.phi_true = IntMatrix::Ones(g.subarrays, qbar);
    MarkovVRPrior prior = MarkovVRPrior::from_sparsity(lambda_vr, 0.35);
    for (std::size_t i = 0; i < inst.active.size(); ++i) {
        const int q = inst.active[i];
        inst.x_true(q * m + static_cast<int>(rng() % m)) = complex_gaussian(rng) + Complex(2.0, 0.0);
        if (blocked_run > 0 && i == 1) {
            const int start = 2;
            for (int k = start; k < start + blocked_run; ++k) inst.phi_true(k, q) = 0;
        }
    }
    const SensingD1 d1(inst.dict.bs_dict,
                       apply_mask(inst.dict.comp_dict,
                                  expand_mask(inst.phi_true, g.elements_per_subarray())),
                       inst.phases);
    inst.y = d1.apply(inst.x_true);
    return inst;
}

}  // namespace

TEST_CASE("vr module: exact recovery of a blocked run on noiseless data") {
    Rng rng(54);
    VRInstance inst = make_vr_instance(rng, 0.875, 3);
    const ComplexMatrix d2 =
        assemble_d2_columns(inst.dict.bs_dict, inst.dict.comp_dict, inst.phases, inst.x_true,
                            inst.geom.subarrays, inst.active);
    const MarkovVRPrior prior = MarkovVRPrior::from_sparsity(0.875, 0.35);
    const VRModuleResult res = run_vr_module(inst.y, d2, inst.active, inst.geom.subarrays,
                                             inst.dict.q_bar(), 1e7, prior, 5);
    for (int q : inst.active)
        CHECK((res.phi_s_hat.col(q) - inst.phi_true.col(q)).cwiseAbs().maxCoeff() == 0);
    // inactive columns stay all-ones
    CHECK(res.phi_s_hat.col(0).minCoeff() == 1);
}

TEST_CASE("vr module: certain prior forces all-ones decisions") {
    Rng rng(55);
    VRInstance inst = make_vr_instance(rng, 0.875, 3);
    const ComplexMatrix d2 =
        assemble_d2_columns(inst.dict.bs_dict, inst.dict.comp_dict, inst.phases, inst.x_true,
                            inst.geom.subarrays, inst.active);
    const MarkovVRPrior certain = MarkovVRPrior::from_sparsity(1.0, 0.35);  // p10 = 0
    const VRModuleResult res = run_vr_module(inst.y, d2, inst.active, inst.geom.subarrays,
                                             inst.dict.q_bar(), 1e7, certain, 5);
    CHECK(res.phi_s_hat.minCoeff() == 1);
}

TEST_CASE("vr module: posterior is permutation-covariant across columns") {
    Rng rng(56);
    VRInstance inst = make_vr_instance(rng, 0.75, 2);
    const MarkovVRPrior prior = MarkovVRPrior::from_sparsity(0.75, 0.35);

    const ComplexMatrix d2 =
        assemble_d2_columns(inst.dict.bs_dict, inst.dict.comp_dict, inst.phases, inst.x_true,
                            inst.geom.subarrays, inst.active);
    const VRModuleResult base = run_vr_module(inst.y, d2, inst.active, inst.geom.subarrays,
                                              inst.dict.q_bar(), 1e5, prior, 4);

    // permute the active-column order; the per-column posteriors must follow
    std::vector<int> perm = {inst.active[2], inst.active[0], inst.active[1]};
    ComplexMatrix d2p =
        assemble_d2_columns(inst.dict.bs_dict, inst.dict.comp_dict, inst.phases, inst.x_true,
                            inst.geom.subarrays, perm);
    const VRModuleResult moved = run_vr_module(inst.y, d2p, perm, inst.geom.subarrays,
                                               inst.dict.q_bar(), 1e5, prior, 4);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        const int q = perm[i];
        std::size_t j = 0;
        while (inst.active[j] != q) ++j;
        CHECK((moved.beliefs.posterior.col(i) - base.beliefs.posterior.col(j)).cwiseAbs().maxCoeff() <
              1e-9);
    }
}
