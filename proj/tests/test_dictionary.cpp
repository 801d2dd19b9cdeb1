#include <doctest.h>

#include <cmath>
#include <fstream>

#include "hfce/dictionary.hpp"
#include "hfce/io.hpp"
#include "hfce/rng.hpp"
#include "hfce/selfcheck.hpp"
#include "hfce/sensing.hpp"
#include "hfce/tensor_ops.hpp"

using namespace hfce;

namespace {

SystemGeometry small_geom() {
    SystemGeometry g;
    g.bs_antennas = 4;
    g.ris_elements = 8;
    g.subarrays = 2;
    g.carrier_hz = 28e9;
    g.bs_anchor = Eigen::Vector2d(-0.5, -0.2);
    g.user_range_min = 0.02;
    g.user_range_max = 0.1;
    return g;
}

}  // namespace

TEST_CASE("polar grid rings decrease with ring index; endfire keeps only the far ring") {
    const SystemGeometry g = SystemGeometry::desk_scale();
    const auto rings = rings_for_angle(g, 1.2, 0.3, 5);
    REQUIRE(rings.size() == 5);
    CHECK(std::isinf(rings[0].range));
    for (std::size_t s = 2; s < rings.size(); ++s) CHECK(rings[s].range < rings[s - 1].range);
    for (std::size_t s = 1; s < rings.size(); ++s) CHECK(rings[s].range > 0.0);

    const auto endfire = rings_for_angle(g, 1.2, 1.0, 5);
    CHECK(endfire.size() == 1);
    CHECK(std::isinf(endfire[0].range));

    CHECK_THROWS_AS((void)rings_for_angle(g, -1.0, 0.3, 3), std::invalid_argument);
}

TEST_CASE("polar grid layout, coherence bound recorded at N = 32") {
    const SystemGeometry g = SystemGeometry::desk_scale();
    PolarGridSpec spec;
    spec.n_angles = 32;
    spec.n_rings = 2;
    const PolarGrid grid = build_polar_grid(g, spec);
    CHECK(grid.size() == 64);
    for (const GridPoint& p : grid.points) CHECK(std::abs(p.angle) <= 1.0 - 1e-3);

    ComplexMatrix dict(g.ris_elements, grid.size());
    for (int i = 0; i < grid.size(); ++i)
        dict.col(i) = fresnel_arv(g.ris_elements, grid.points[i].angle, grid.points[i].curvature,
                                  g.d(), g.lambda());
    const double mu = max_column_coherence(dict);
    MESSAGE("polar dictionary coherence at N=32: ", mu);
    CHECK(mu < 0.999);

    const std::string path = "polar_grid_dump.csv";
    write_grid_csv(grid, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "index,angle,range,curvature");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == grid.size());
}

TEST_CASE("dictionary columns are unit-modulus; grids match the stated cosine rule") {
    const SystemGeometry g = small_geom();
    const DictionarySet dict = DictionarySet::build(g, DictionaryOptions::for_geometry(g, 16, 2));
    for (int m = 0; m < dict.m(); ++m)
        CHECK(dict.bs_angles[m] == doctest::Approx((2.0 / g.bs_antennas) * (m + 1 - (g.bs_antennas + 1) / 2.0)));
    for (const ComplexMatrix* d : {&dict.bs_dict, &dict.ris_dict, &dict.near_dict, &dict.comp_dict})
        for (Eigen::Index j = 0; j < d->cols(); ++j)
            for (Eigen::Index i = 0; i < d->rows(); ++i)
                CHECK(std::abs(std::abs((*d)(i, j)) - 1.0) < 1e-12);
}

TEST_CASE("appendix-A pair map: matched angles give zero difference and invariant curvature") {
    const SystemGeometry g = small_geom();
    const DictionarySet dict =
        DictionarySet::build(g, DictionaryOptions::aligned_for_geometry(g, 2));
    // Pick a finite-ring polar point whose angle equals a RIS grid angle.
    const int nb = dict.polar.point_index(3, 1);
    const double theta = dict.polar.points[nb].angle;
    int nf = -1;
    for (int n = 0; n < dict.n(); ++n)
        if (std::abs(dict.ris_angles[n] - theta) < 1e-12) nf = n;
    REQUIRE(nf >= 0);
    const int q = dict.pair_to_point(nb, nf);
    CHECK(dict.comp.points[q].angle == doctest::Approx(0.0));
    CHECK(dict.comp.points[q].curvature == doctest::Approx(dict.polar.points[nb].curvature));
    // r_bar = r (1 - diff^2) / (1 - theta^2) at diff = 0
    const double expect_r = dict.polar.points[nb].range * 1.0 / (1.0 - theta * theta);
    CHECK(dict.comp.points[q].range == doctest::Approx(expect_r).epsilon(1e-9));
}

TEST_CASE("compression suite: equivalence, column counts, bilinear consistency") {
    const auto results = run_compression_suite(123, 10);
    for (const auto& r : results) {
        INFO(r.name, " worst ", r.worst_error);
        CHECK(r.pass);
    }
}

TEST_CASE("representation scale drops from O(M N^2) to O(M N)") {
    const SystemGeometry g = SystemGeometry::paper_scale();
    const DictionarySet dict = DictionarySet::build(g, DictionaryOptions::for_geometry(g, 256, 2));
    const long coupled = static_cast<long>(dict.m()) * dict.n() * dict.n_bar();
    const long compressed = static_cast<long>(dict.m()) * dict.q_bar();
    CHECK(dict.q_bar() == 256);
    CHECK(dict.q_bar() <= 2 * dict.n());  // Qbar comparable to N
    CHECK(compressed * dict.n() <= coupled);
}

TEST_CASE("perturbed dictionaries: zero offsets identical, locality, re-evaluation") {
    const SystemGeometry g = small_geom();
    const DictionarySet dict = DictionarySet::build(g, DictionaryOptions::for_geometry(g, 16, 2));
    const OffGridState zero = OffGridState::zeros(dict.m(), dict.q_bar());
    CHECK((dict.perturbed_bs_dict(zero) - dict.bs_dict).norm() == 0.0);
    CHECK((dict.perturbed_comp_dict(zero) - dict.comp_dict).norm() == 0.0);

    OffGridState xi = zero;
    const int q = 5;
    REQUIRE(dict.range_refinable(q));
    xi.delta_angle(q) = 0.01;
    xi.delta_range(q) = -0.002;
    const ComplexMatrix pert = dict.perturbed_comp_dict(xi);
    for (int j = 0; j < dict.q_bar(); ++j) {
        if (j == q) continue;
        CHECK((pert.col(j) - dict.comp_dict.col(j)).norm() == 0.0);
    }
    const GridPoint& p = dict.comp.points[q];
    const double a = p.angle + 0.01, r = p.range - 0.002;
    const ComplexVector expect = fresnel_arv(dict.n(), a, (1.0 - a * a) / (2.0 * r), g.d(), g.lambda());
    CHECK((pert.col(q) - expect).norm() < 1e-14);

    OffGridState bs = zero;
    bs.delta_bs_angle(2) = 0.03;
    const ComplexMatrix pb = dict.perturbed_bs_dict(bs);
    CHECK((pb.col(2) - far_field_arv(dict.m(), dict.bs_angles[2] + 0.03, g.d(), g.lambda())).norm() <
          1e-14);
}

TEST_CASE("dictionary derivatives agree with central finite differences (100 columns)") {
    const SystemGeometry g = SystemGeometry::desk_scale();
    const DictionarySet dict = DictionarySet::build(g, DictionaryOptions::for_geometry(g, 64, 2));
    Rng rng(21);
    const double h = 1e-6;
    int checked = 0;
    for (int t = 0; checked < 100 && t < 400; ++t) {
        const int q = static_cast<int>(rng() % dict.q_bar());
        OffGridState xi = OffGridState::zeros(dict.m(), dict.q_bar());
        xi.delta_angle(q) = uniform_real(rng, -0.2, 0.2) * dict.comp.angle_half_cell();
        if (dict.range_refinable(q))
            xi.delta_range(q) = uniform_real(rng, -0.2, 0.2) * dict.comp.range_half_cell(q);

        OffGridState xp = xi, xm = xi;
        xp.delta_angle(q) += h;
        xm.delta_angle(q) -= h;
        const ComplexVector fd_a = (dict.comp_column(q, xp) - dict.comp_column(q, xm)) / (2.0 * h);
        const ComplexVector an_a = dict.comp_column_dangle(q, xi);
        CHECK((an_a - fd_a).norm() / fd_a.norm() < 1e-5);
        CHECK(std::abs(an_a(0)) == doctest::Approx(0.0));

        if (dict.range_refinable(q)) {
            OffGridState rp = xi, rm = xi;
            rp.delta_range(q) += h;
            rm.delta_range(q) -= h;
            const ComplexVector fd_r =
                (dict.comp_column(q, rp) - dict.comp_column(q, rm)) / (2.0 * h);
            const ComplexVector an_r = dict.comp_column_drange(q, xi);
            if (fd_r.norm() > 1e-9) CHECK((an_r - fd_r).norm() / fd_r.norm() < 1e-5);
        }

        const int mi = static_cast<int>(rng() % dict.m());
        OffGridState bp = xi, bm = xi;
        bp.delta_bs_angle(mi) += h;
        bm.delta_bs_angle(mi) -= h;
        const ComplexVector fd_b = (dict.bs_column(mi, bp) - dict.bs_column(mi, bm)) / (2.0 * h);
        const ComplexVector an_b = dict.bs_column_dangle(mi, xi);
        CHECK((an_b - fd_b).norm() / fd_b.norm() < 1e-5);
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("sensing operator: dense agreement and one-hot columns") {
    const SystemGeometry g = small_geom();
    const DictionarySet dict = DictionarySet::build(g, DictionaryOptions::for_geometry(g, 16, 2));
    Rng rng(22);
    const int pilots = 3;
    const ComplexMatrix phases = random_phase_matrix(rng, g.ris_elements, pilots);

    IntMatrix phi = IntMatrix::Ones(g.subarrays, dict.q_bar());
    const SensingD1 d1(dict.bs_dict, apply_mask(dict.comp_dict, expand_mask(phi, g.elements_per_subarray())),
                       phases);
    const ComplexMatrix dense = d1.dense();

    // apply/adjoint/gram against the dense operator
    const ComplexVector x = complex_gaussian_vector(rng, d1.cols());
    const ComplexVector y = complex_gaussian_vector(rng, d1.rows());
    CHECK((d1.apply(x) - dense * x).norm() / (dense * x).norm() < 1e-12);
    CHECK((d1.adjoint(y) - dense.adjoint() * y).norm() / (dense.adjoint() * y).norm() < 1e-12);
    CHECK((d1.gram_apply(x) - dense.adjoint() * dense * x).norm() /
              (dense.adjoint() * dense * x).norm() <
          1e-12);
    const RealVector gd = d1.gram_diag();
    for (int i = 0; i < d1.cols(); ++i)
        CHECK(gd(i) == doctest::Approx(dense.col(i).squaredNorm()).epsilon(1e-10));

    // one-hot x picks the pilot-stacked single column
    const int q = 7, mi = 2;
    ComplexVector onehot = ComplexVector::Zero(d1.cols());
    onehot(q * dict.m() + mi) = Complex(1.0, 0.0);
    const ComplexVector col = d1.apply(onehot);
    for (int p = 0; p < pilots; ++p) {
        const Complex c = phases.col(p).cwiseProduct(dict.comp_dict.col(q)).sum();
        CHECK((col.segment(p * dict.m(), dict.m()) - c * dict.bs_dict.col(mi)).norm() < 1e-10);
    }

    // restricted Gram block matches the dense Gram
    const std::vector<int> idx{1, 9, 22, 37};
    const ComplexMatrix gs = d1.gram_submatrix(idx);
    const ComplexMatrix gram = dense.adjoint() * dense;
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = 0; b < idx.size(); ++b)
            CHECK(std::abs(gs(a, b) - gram(idx[a], idx[b])) < 1e-9);
}
