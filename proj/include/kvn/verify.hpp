#pragma once

#include <iosfwd>

#include "kvn/galilei.hpp"
#include "kvn/liouvillian.hpp"

namespace kvn {

struct VerifyOptions {
    std::size_t grid_points = 64;  // per axis, 2D-config grid
    int n_states = 5;
    double t_ref = 0.5;       // boost reference time entering G
    double lambda_sign = 1.0; // test hook: -1 deliberately breaks the shift generators
};

struct VerifyReport {
    std::vector<IdentityResult> rows;
    bool all_pass = true;
    double runtime_seconds = 0.0;
    std::size_t n_identities = 0;
};

/// The verification grid: [-5, 5) on all four axes of a 2D-config grid.
GridPtr verify_grid(std::size_t points_per_axis);

/// Default test-state suite: seeded gaussians with interior centers, widths
/// sized for both spectral resolvability and amplitude-tail margins.
std::vector<WaveField> default_test_states(GridPtr grid, int n_states);

/// Every postulated commutator of the operator set and the free-particle
/// Galilei algebra, with per-identity tolerances.
std::vector<OperatorIdentity> build_identity_suite(GridPtr grid, double t_ref, double lambda_sign = 1.0);

VerifyReport run_verify_suite(const VerifyOptions& opts);

/// One CSV row per (identity_id, state_index).
void write_verify_csv(std::ostream& os, const VerifyReport& report);

}  // namespace kvn
