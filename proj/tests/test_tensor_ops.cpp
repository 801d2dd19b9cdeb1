#include <doctest.h>

#include "hfce/rng.hpp"
#include "hfce/selfcheck.hpp"
#include "hfce/tensor_ops.hpp"

using namespace hfce;

TEST_CASE("kron identity blocks") {
    Rng rng(1);
    const ComplexMatrix b = complex_gaussian_matrix(rng, 2, 2);
    const ComplexMatrix out = kron(ComplexMatrix::Identity(2, 2), b);
    CHECK((out.block(0, 0, 2, 2) - b).norm() == doctest::Approx(0.0));
    CHECK((out.block(2, 2, 2, 2) - b).norm() == doctest::Approx(0.0));
    CHECK(out.block(0, 2, 2, 2).norm() == doctest::Approx(0.0));

    const ComplexMatrix one = ComplexMatrix::Ones(1, 1);
    CHECK((kron(b, one) - b).norm() == doctest::Approx(0.0));
}

TEST_CASE("kron nested-loop oracle on random shapes") {
    Rng rng(2);
    const ComplexMatrix a = complex_gaussian_matrix(rng, 2, 3);
    const ComplexMatrix b = complex_gaussian_matrix(rng, 3, 2);
    const ComplexMatrix out = kron(a, b);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 2; ++l)
                    CHECK(std::abs(out(i * 3 + k, j * 2 + l) - a(i, j) * b(k, l)) < 1e-15);
}

TEST_CASE("khatri-rao degenerate shapes") {
    Rng rng(3);
    // two single-row inputs: elementwise product row
    const ComplexMatrix a = complex_gaussian_matrix(rng, 1, 5);
    const ComplexMatrix b = complex_gaussian_matrix(rng, 1, 5);
    CHECK((khatri_rao_col(a, b) - a.cwiseProduct(b)).norm() < 1e-15);
    // single-column inputs: row-wise product collapses to the Hadamard product
    const ComplexMatrix c = complex_gaussian_matrix(rng, 4, 1);
    const ComplexMatrix d = complex_gaussian_matrix(rng, 4, 1);
    CHECK((khatri_rao_row(c, d) - c.cwiseProduct(d)).norm() < 1e-15);
}

TEST_CASE("khatri-rao shape mismatches throw") {
    Rng rng(4);
    const ComplexMatrix a = complex_gaussian_matrix(rng, 2, 3);
    const ComplexMatrix b = complex_gaussian_matrix(rng, 2, 4);
    CHECK_THROWS_AS((void)khatri_rao_col(a, b), std::invalid_argument);
    const ComplexMatrix c = complex_gaussian_matrix(rng, 3, 4);
    CHECK_THROWS_AS((void)khatri_rao_row(a, c), std::invalid_argument);
    CHECK_THROWS_AS((void)unvec(ComplexVector::Zero(5), 2, 3), std::invalid_argument);
}

TEST_CASE("vec is column-major and unvec inverts it") {
    ComplexMatrix a(2, 2);
    a << Complex(1, 0), Complex(3, 0), Complex(2, 0), Complex(4, 0);
    const ComplexVector v = vec(a);
    CHECK(v(0) == Complex(1, 0));
    CHECK(v(1) == Complex(2, 0));
    CHECK(v(2) == Complex(3, 0));
    CHECK(v(3) == Complex(4, 0));

    Rng rng(5);
    const ComplexMatrix b = complex_gaussian_matrix(rng, 5, 3);
    CHECK((unvec(vec(b), 5, 3) - b).norm() == doctest::Approx(0.0));
}

TEST_CASE("lemma1 transform scalar-one case is the identity") {
    const SparseComplexMatrix s = lemma1_transform(ComplexMatrix::Ones(1, 1), 3, 2);
    const ComplexMatrix dense(s);
    CHECK((dense - ComplexMatrix::Identity(6, 6)).norm() == doctest::Approx(0.0));
}

TEST_CASE("lemma1 transform defining identity, 100 random B") {
    Rng rng(6);
    const ComplexMatrix a = complex_gaussian_matrix(rng, 2, 2);
    const SparseComplexMatrix s = lemma1_transform(a, 3, 2);
    for (int t = 0; t < 100; ++t) {
        const ComplexMatrix b = complex_gaussian_matrix(rng, 3, 2);
        CHECK((vec(kron(b, a)) - s * vec(b)).norm() < 1e-12 * vec(kron(b, a)).norm());
    }
}

TEST_CASE("hadamard-vec oracle") {
    Rng rng(7);
    const ComplexMatrix a = complex_gaussian_matrix(rng, 4, 5);
    CHECK(hadamard_vec_identity_check(a, ComplexMatrix::Ones(4, 5)));
    const ComplexMatrix b = complex_gaussian_matrix(rng, 4, 5);
    CHECK(hadamard_vec_identity_check(a, b));
    CHECK_THROWS_AS((void)hadamard_vec_identity_check(a, complex_gaussian_matrix(rng, 5, 4)),
                    std::invalid_argument);
}

TEST_CASE("identity suite passes wholesale") {
    const auto results = run_identity_suite(42, 100);
    for (const auto& r : results) {
        INFO(r.name, " worst ", r.worst_error);
        CHECK(r.pass);
    }
}
