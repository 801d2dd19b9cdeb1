#ifndef HFCE_SELFCHECK_HPP
#define HFCE_SELFCHECK_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace hfce {

struct CheckResult {
    std::string name;
    bool pass = false;
    double worst_error = 0.0;
    double tolerance = 0.0;
};

/// Structured-algebra verification: the five rearrangement identities of the
/// gain model, the three of the VR model, the sparse vec-transform lemma, the
/// Hadamard-vec identity and the Khatri-Rao transpose relation, each on
/// `instances` random instances against nested-loop or dense-evaluation
/// oracles.
std::vector<CheckResult> run_identity_suite(std::uint64_t seed, int instances = 100);

/// Dictionary-compression equivalence at M = 4, N = 8: the direct cascade
/// through the coupled (polar x far-field) dictionary equals the compressed
/// operator applied to the re-indexed sparse matrix, with matching
/// active-column counts; plus the bilinear D1/D2 consistency on random
/// inputs.
std::vector<CheckResult> run_compression_suite(std::uint64_t seed, int instances = 20);

bool all_passed(const std::vector<CheckResult>& results);
void print_results(const std::vector<CheckResult>& results);

}  // namespace hfce

#endif
