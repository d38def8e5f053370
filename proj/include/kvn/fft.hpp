#pragma once

#include <cstddef>
#include <vector>

#include "kvn/common.hpp"
#include "kvn/grid.hpp"

namespace kvn::spectral {

/// Radix-2 tables for one transform length.
struct FftPlan {
    std::size_t n = 0;
    std::size_t log2n = 0;
    // Twiddles per stage, forward (e^{-i...}) and inverse (e^{+i...}).
    std::vector<std::vector<cplx>> fwd;
    std::vector<std::vector<cplx>> inv;
    std::vector<std::uint32_t> bitrev;
};

const FftPlan& plan_for(std::size_t n);

/// Contiguous single-line transforms (bit-reversed spectral order, paired
/// forward/inverse; inverse includes the 1/n scale).
void fft_line_forward(cplx* x, std::size_t n);
void fft_line_inverse(cplx* x, std::size_t n);

/// In-place forward DFT along one axis of the row-major array `d`.
/// Output is in bit-reversed order along that axis (DIF); pair with
/// inverse_axis or with a bit-rev-ordered multiplier.
void forward_axis(cplx* d, const Grid& g, std::size_t axis);

/// In-place inverse DFT along one axis; input bit-reversed (DIT).
/// Scales by 1/n unless normalize is false.
void inverse_axis(cplx* d, const Grid& g, std::size_t axis, bool normalize = true);

/// Pointwise multiply along an axis by mult[j] (bit-reversed order, length n).
void multiply_axis_bitrev(cplx* d, const Grid& g, std::size_t axis, const cplx* mult);
void multiply_axis_bitrev(cplx* d, const Grid& g, std::size_t axis, const double* mult);

/// Reorders a natural-FFT-order multiplier into bit-reversed order.
template <typename T>
std::vector<T> to_bitrev(const std::vector<T>& natural) {
    const FftPlan& p = plan_for(natural.size());
    std::vector<T> out(natural.size());
    for (std::size_t j = 0; j < natural.size(); ++j) out[j] = natural[p.bitrev[j]];
    return out;
}

/// psi <- -i d(psi)/dx along `axis`, evaluated spectrally with the Nyquist
/// mode zeroed (keeps the operator skew-adjoint on the grid).
void lambda_axis(cplx* d, const Grid& g, std::size_t axis);

/// psi(x) <- psi(x - a) along `axis` (exact periodic spectral shift).
void shift_axis(cplx* d, const Grid& g, std::size_t axis, double a);

/// Per-line spectral shift: psi(..., x, ...) <- psi(..., x - s(line), ...)
/// where s depends on every coordinate except `axis`. The callback receives
/// the flat index of one point of the line (the one with axis-index 0).
void shear_axis(cplx* d, const Grid& g, std::size_t axis,
                const std::function<double(std::size_t)>& shift_at);

/// Precomputed full-size phase table for a repeated shear (split-step use).
/// Includes the 1/n inverse normalization; apply with apply_phase_table.
std::vector<cplx> make_shear_table(const Grid& g, std::size_t axis,
                                   const std::function<double(std::size_t)>& shift_at);
void apply_phase_table(cplx* d, const Grid& g, std::size_t axis, const std::vector<cplx>& table);

/// Integer-cell circular roll along an axis: psi_new[i] = psi_old[i - k mod n].
void roll_axis(cplx* d, const Grid& g, std::size_t axis, std::ptrdiff_t k);

/// Pullback of a rotation by `phi` acting in the (coord_a, coord_b / b_scale)
/// plane: psi_new(z) = psi_old(R(phi) z). Exact three-shear decomposition,
/// split into sub-rotations of at most pi/2.
void rotate_pair(cplx* d, const Grid& g, std::size_t axis_a, std::size_t axis_b, double phi,
                 double b_scale = 1.0);

}  // namespace kvn::spectral
