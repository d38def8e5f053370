#include "kvn/fft.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace kvn::spectral {

namespace {

// Panel width cap so a (n x chunk) working set stays cache-resident.
constexpr std::size_t kPanelBudget = 131072;  // complex elements, ~2 MB

std::map<std::size_t, FftPlan> g_plans;
std::mutex g_plan_mutex;

FftPlan build_plan(std::size_t n) {
    FftPlan p;
    p.n = n;
    std::size_t l = 0;
    while ((std::size_t{1} << l) < n) ++l;
    p.log2n = l;
    p.fwd.resize(l);
    p.inv.resize(l);
    for (std::size_t stage = 0; stage < l; ++stage) {
        const std::size_t span = std::size_t{1} << stage;
        p.fwd[stage].resize(span);
        p.inv[stage].resize(span);
        for (std::size_t j = 0; j < span; ++j) {
            const double ang = kPi * static_cast<double>(j) / static_cast<double>(span);
            p.fwd[stage][j] = cplx(std::cos(ang), -std::sin(ang));
            p.inv[stage][j] = cplx(std::cos(ang), std::sin(ang));
        }
    }
    p.bitrev.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = 0, v = i;
        for (std::size_t b = 0; b < l; ++b) {
            r = (r << 1) | (v & 1);
            v >>= 1;
        }
        p.bitrev[i] = static_cast<std::uint32_t>(r);
    }
    return p;
}

// Butterflies operate on interleaved (re, im) doubles with __restrict row
// pointers so the width loops vectorize.

// DIF forward on one contiguous line.
inline void dif_line(cplx* xc, const FftPlan& p) {
    double* x = reinterpret_cast<double*>(xc);
    for (std::size_t stage = p.log2n; stage-- > 0;) {
        const std::size_t span = std::size_t{1} << stage;
        const cplx* tw = p.fwd[stage].data();
        for (std::size_t base = 0; base < p.n; base += 2 * span) {
            double* __restrict a = x + 2 * base;
            double* __restrict b = a + 2 * span;
            for (std::size_t j = 0; j < span; ++j) {
                const double wr = tw[j].real(), wi = tw[j].imag();
                const double ur = a[2 * j], ui = a[2 * j + 1];
                const double vr = b[2 * j], vi = b[2 * j + 1];
                a[2 * j] = ur + vr;
                a[2 * j + 1] = ui + vi;
                const double tr = ur - vr, ti = ui - vi;
                b[2 * j] = tr * wr - ti * wi;
                b[2 * j + 1] = tr * wi + ti * wr;
            }
        }
    }
}

// DIT inverse on one contiguous line (input bit-reversed), unnormalized.
inline void dit_line(cplx* xc, const FftPlan& p) {
    double* x = reinterpret_cast<double*>(xc);
    for (std::size_t stage = 0; stage < p.log2n; ++stage) {
        const std::size_t span = std::size_t{1} << stage;
        const cplx* tw = p.inv[stage].data();
        for (std::size_t base = 0; base < p.n; base += 2 * span) {
            double* __restrict a = x + 2 * base;
            double* __restrict b = a + 2 * span;
            for (std::size_t j = 0; j < span; ++j) {
                const double wr = tw[j].real(), wi = tw[j].imag();
                const double br = b[2 * j], bi = b[2 * j + 1];
                const double tr = br * wr - bi * wi;
                const double ti = br * wi + bi * wr;
                const double ur = a[2 * j], ui = a[2 * j + 1];
                a[2 * j] = ur + tr;
                a[2 * j + 1] = ui + ti;
                b[2 * j] = ur - tr;
                b[2 * j + 1] = ui - ti;
            }
        }
    }
}

// DIF forward on a (n x width) panel; rows are `row_stride` apart, row
// elements contiguous. Vectorizes over the width.
inline void dif_panel(cplx* xc, const FftPlan& p, std::size_t row_stride, std::size_t width) {
    double* x = reinterpret_cast<double*>(xc);
    for (std::size_t stage = p.log2n; stage-- > 0;) {
        const std::size_t span = std::size_t{1} << stage;
        const cplx* tw = p.fwd[stage].data();
        for (std::size_t base = 0; base < p.n; base += 2 * span) {
            for (std::size_t j = 0; j < span; ++j) {
                double* __restrict a = x + 2 * (base + j) * row_stride;
                double* __restrict b = x + 2 * (base + j + span) * row_stride;
                const double wr = tw[j].real(), wi = tw[j].imag();
                for (std::size_t c = 0; c < width; ++c) {
                    const double ur = a[2 * c], ui = a[2 * c + 1];
                    const double vr = b[2 * c], vi = b[2 * c + 1];
                    a[2 * c] = ur + vr;
                    a[2 * c + 1] = ui + vi;
                    const double tr = ur - vr, ti = ui - vi;
                    b[2 * c] = tr * wr - ti * wi;
                    b[2 * c + 1] = tr * wi + ti * wr;
                }
            }
        }
    }
}

inline void dit_panel(cplx* xc, const FftPlan& p, std::size_t row_stride, std::size_t width) {
    double* x = reinterpret_cast<double*>(xc);
    for (std::size_t stage = 0; stage < p.log2n; ++stage) {
        const std::size_t span = std::size_t{1} << stage;
        const cplx* tw = p.inv[stage].data();
        for (std::size_t base = 0; base < p.n; base += 2 * span) {
            for (std::size_t j = 0; j < span; ++j) {
                double* __restrict a = x + 2 * (base + j) * row_stride;
                double* __restrict b = x + 2 * (base + j + span) * row_stride;
                const double wr = tw[j].real(), wi = tw[j].imag();
                for (std::size_t c = 0; c < width; ++c) {
                    const double br = b[2 * c], bi = b[2 * c + 1];
                    const double tr = br * wr - bi * wi;
                    const double ti = br * wi + bi * wr;
                    const double ur = a[2 * c], ui = a[2 * c + 1];
                    a[2 * c] = ur + tr;
                    a[2 * c + 1] = ui + ti;
                    b[2 * c] = ur - tr;
                    b[2 * c + 1] = ui - ti;
                }
            }
        }
    }
}

enum class Dir { fwd, inv };

void transform_axis(cplx* d, const Grid& g, std::size_t axis, Dir dir) {
    const std::size_t n = g.axis(axis).n;
    const std::size_t s = g.stride(axis);
    const std::size_t total = g.total_points();
    const FftPlan& p = plan_for(n);

    if (s == 1) {
        const std::size_t lines = total / n;
        parallel_for(lines, [&](std::size_t b, std::size_t e) {
            for (std::size_t ln = b; ln < e; ++ln) {
                cplx* x = d + ln * n;
                dir == Dir::fwd ? dif_line(x, p) : dit_line(x, p);
            }
        });
        return;
    }

    const std::size_t chunk = std::max<std::size_t>(1, std::min(s, kPanelBudget / n));
    const std::size_t outer = total / (n * s);
    const std::size_t chunks_per_outer = (s + chunk - 1) / chunk;
    parallel_for(outer * chunks_per_outer, [&](std::size_t b, std::size_t e) {
        for (std::size_t w = b; w < e; ++w) {
            const std::size_t o = w / chunks_per_outer;
            const std::size_t c0 = (w % chunks_per_outer) * chunk;
            const std::size_t width = std::min(chunk, s - c0);
            cplx* x = d + o * n * s + c0;
            dir == Dir::fwd ? dif_panel(x, p, s, width) : dit_panel(x, p, s, width);
        }
    });
}

// Forward transform, per-mode multiply, inverse transform, all while each
// panel (or line) is cache-resident: one read+write sweep of the array.
// `mult` is bit-reversed and carries the 1/n normalization.
template <typename M>
void fused_multiply_axis(cplx* d, const Grid& g, std::size_t axis, const M* mult) {
    const std::size_t n = g.axis(axis).n;
    const std::size_t s = g.stride(axis);
    const std::size_t total = g.total_points();
    const FftPlan& p = plan_for(n);

    if (s == 1) {
        const std::size_t lines = total / n;
        parallel_for(lines, [&](std::size_t b, std::size_t e) {
            for (std::size_t ln = b; ln < e; ++ln) {
                cplx* x = d + ln * n;
                dif_line(x, p);
                for (std::size_t j = 0; j < n; ++j) x[j] *= mult[j];
                dit_line(x, p);
            }
        });
        return;
    }
    const std::size_t chunk = std::max<std::size_t>(1, std::min(s, kPanelBudget / n));
    const std::size_t outer = total / (n * s);
    const std::size_t chunks_per_outer = (s + chunk - 1) / chunk;
    parallel_for(outer * chunks_per_outer, [&](std::size_t b, std::size_t e) {
        for (std::size_t w = b; w < e; ++w) {
            const std::size_t o = w / chunks_per_outer;
            const std::size_t c0 = (w % chunks_per_outer) * chunk;
            const std::size_t width = std::min(chunk, s - c0);
            cplx* x = d + o * n * s + c0;
            dif_panel(x, p, s, width);
            for (std::size_t j = 0; j < n; ++j) {
                cplx* row = x + j * s;
                const M m = mult[j];
                for (std::size_t c = 0; c < width; ++c) row[c] *= m;
            }
            dit_panel(x, p, s, width);
        }
    });
}

// Same sweep structure with a full-size per-point phase table.
void fused_table_axis(cplx* d, const Grid& g, std::size_t axis, const cplx* table) {
    const std::size_t n = g.axis(axis).n;
    const std::size_t s = g.stride(axis);
    const std::size_t total = g.total_points();
    const FftPlan& p = plan_for(n);

    if (s == 1) {
        const std::size_t lines = total / n;
        parallel_for(lines, [&](std::size_t b, std::size_t e) {
            for (std::size_t ln = b; ln < e; ++ln) {
                cplx* x = d + ln * n;
                const cplx* t = table + ln * n;
                dif_line(x, p);
                for (std::size_t j = 0; j < n; ++j) x[j] *= t[j];
                dit_line(x, p);
            }
        });
        return;
    }
    const std::size_t chunk = std::max<std::size_t>(1, std::min(s, kPanelBudget / n));
    const std::size_t outer = total / (n * s);
    const std::size_t chunks_per_outer = (s + chunk - 1) / chunk;
    parallel_for(outer * chunks_per_outer, [&](std::size_t b, std::size_t e) {
        for (std::size_t w = b; w < e; ++w) {
            const std::size_t o = w / chunks_per_outer;
            const std::size_t c0 = (w % chunks_per_outer) * chunk;
            const std::size_t width = std::min(chunk, s - c0);
            const std::size_t off = o * n * s + c0;
            cplx* x = d + off;
            const cplx* t = table + off;
            dif_panel(x, p, s, width);
            for (std::size_t j = 0; j < n; ++j) {
                cplx* row = x + j * s;
                const cplx* trow = t + j * s;
                for (std::size_t c = 0; c < width; ++c) row[c] *= trow[c];
            }
            dit_panel(x, p, s, width);
        }
    });
}

template <typename M>
void multiply_axis_impl(cplx* d, const Grid& g, std::size_t axis, const M* mult) {
    const std::size_t n = g.axis(axis).n;
    const std::size_t s = g.stride(axis);
    const std::size_t outer = g.total_points() / (n * s);
    parallel_for(outer, [&](std::size_t b, std::size_t e) {
        for (std::size_t o = b; o < e; ++o) {
            cplx* base = d + o * n * s;
            for (std::size_t j = 0; j < n; ++j) {
                cplx* row = base + j * s;
                const M m = mult[j];
                for (std::size_t c = 0; c < s; ++c) row[c] *= m;
            }
        }
    });
}

}  // namespace

void fft_line_forward(cplx* x, std::size_t n) { dif_line(x, plan_for(n)); }

void fft_line_inverse(cplx* x, std::size_t n) {
    dit_line(x, plan_for(n));
    const double s = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) x[i] *= s;
}

const FftPlan& plan_for(std::size_t n) {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto it = g_plans.find(n);
    if (it == g_plans.end()) it = g_plans.emplace(n, build_plan(n)).first;
    return it->second;
}

void forward_axis(cplx* d, const Grid& g, std::size_t axis) { transform_axis(d, g, axis, Dir::fwd); }

void inverse_axis(cplx* d, const Grid& g, std::size_t axis, bool normalize) {
    transform_axis(d, g, axis, Dir::inv);
    if (normalize) {
        const double inv_n = 1.0 / static_cast<double>(g.axis(axis).n);
        const std::size_t total = g.total_points();
        parallel_for(total, [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) d[i] *= inv_n;
        });
    }
}

void multiply_axis_bitrev(cplx* d, const Grid& g, std::size_t axis, const cplx* mult) {
    multiply_axis_impl(d, g, axis, mult);
}
void multiply_axis_bitrev(cplx* d, const Grid& g, std::size_t axis, const double* mult) {
    multiply_axis_impl(d, g, axis, mult);
}

void lambda_axis(cplx* d, const Grid& g, std::size_t axis) {
    const std::size_t n = g.axis(axis).n;
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> mult(n);
    const auto& k = g.wavenumbers(axis);
    for (std::size_t j = 0; j < n; ++j) mult[j] = k[j] * inv_n;
    mult[n / 2] = 0.0;  // Nyquist
    const auto brev = to_bitrev(mult);
    fused_multiply_axis(d, g, axis, brev.data());
}

void shift_axis(cplx* d, const Grid& g, std::size_t axis, double a) {
    const std::size_t n = g.axis(axis).n;
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<cplx> mult(n);
    const auto& k = g.wavenumbers(axis);
    for (std::size_t j = 0; j < n; ++j)
        mult[j] = cplx(std::cos(k[j] * a), -std::sin(k[j] * a)) * inv_n;
    const auto brev = to_bitrev(mult);
    fused_multiply_axis(d, g, axis, brev.data());
}

void shear_axis(cplx* d, const Grid& g, std::size_t axis,
                const std::function<double(std::size_t)>& shift_at) {
    const std::size_t n = g.axis(axis).n;
    const std::size_t s = g.stride(axis);
    const std::size_t total = g.total_points();
    const double inv_n = 1.0 / static_cast<double>(n);
    const FftPlan& p = plan_for(n);
    const auto& k = g.wavenumbers(axis);

    if (s == 1) {
        const std::size_t lines = total / n;
        parallel_for(lines, [&](std::size_t b, std::size_t e) {
            for (std::size_t ln = b; ln < e; ++ln) {
                cplx* x = d + ln * n;
                const double a = shift_at(ln * n);
                dif_line(x, p);
                for (std::size_t j = 0; j < n; ++j) {
                    const double kj = k[p.bitrev[j]];
                    x[j] *= cplx(std::cos(kj * a), -std::sin(kj * a)) * inv_n;
                }
                dit_line(x, p);
            }
        });
        return;
    }
    const std::size_t chunk = std::max<std::size_t>(1, std::min(s, kPanelBudget / n));
    const std::size_t outer = total / (n * s);
    const std::size_t chunks_per_outer = (s + chunk - 1) / chunk;
    parallel_for(outer * chunks_per_outer, [&](std::size_t b, std::size_t e) {
        std::vector<double> shifts;
        for (std::size_t w = b; w < e; ++w) {
            const std::size_t o = w / chunks_per_outer;
            const std::size_t c0 = (w % chunks_per_outer) * chunk;
            const std::size_t width = std::min(chunk, s - c0);
            const std::size_t off = o * n * s + c0;
            cplx* x = d + off;
            shifts.resize(width);
            for (std::size_t c = 0; c < width; ++c) shifts[c] = shift_at(off + c);
            dif_panel(x, p, s, width);
            for (std::size_t j = 0; j < n; ++j) {
                const double kj = k[p.bitrev[j]];
                cplx* row = x + j * s;
                for (std::size_t c = 0; c < width; ++c)
                    row[c] *= cplx(std::cos(kj * shifts[c]), -std::sin(kj * shifts[c])) * inv_n;
            }
            dit_panel(x, p, s, width);
        }
    });
}

std::vector<cplx> make_shear_table(const Grid& g, std::size_t axis,
                                   const std::function<double(std::size_t)>& shift_at) {
    const std::size_t n = g.axis(axis).n;
    const std::size_t s = g.stride(axis);
    const std::size_t outer = g.total_points() / (n * s);
    const double inv_n = 1.0 / static_cast<double>(n);
    const FftPlan& p = plan_for(n);
    const auto& k = g.wavenumbers(axis);
    std::vector<cplx> table(g.total_points());
    parallel_for(outer, [&](std::size_t ob, std::size_t oe) {
        for (std::size_t o = ob; o < oe; ++o) {
            cplx* base = table.data() + o * n * s;
            for (std::size_t c = 0; c < s; ++c) {
                const double a = shift_at(o * n * s + c);
                for (std::size_t j = 0; j < n; ++j) {
                    const double kj = k[p.bitrev[j]];
                    base[j * s + c] = cplx(std::cos(kj * a), -std::sin(kj * a)) * inv_n;
                }
            }
        }
    });
    return table;
}

void apply_phase_table(cplx* d, const Grid& g, std::size_t axis, const std::vector<cplx>& table) {
    fused_table_axis(d, g, axis, table.data());
}

void rotate_pair(cplx* d, const Grid& g, std::size_t axis_a, std::size_t axis_b, double phi,
                 double b_scale) {
    // Split so each sub-rotation has |angle| <= pi/2 (keeps |tan(phi/2)| <= 1).
    int chunks = static_cast<int>(std::ceil(std::abs(phi) / (0.5 * kPi)));
    chunks = std::max(chunks, 1);
    const double step = phi / chunks;
    const double alpha = -std::tan(0.5 * step);
    const double beta = std::sin(step);
    for (int c = 0; c < chunks; ++c) {
        // R(step) = Sa(alpha) Sb(beta) Sa(alpha); pullbacks compose in reverse.
        shear_axis(d, g, axis_a, [&](std::size_t flat) {
            return -alpha * g.coord_of(axis_b, flat) / b_scale;
        });
        shear_axis(d, g, axis_b, [&](std::size_t flat) {
            return -beta * b_scale * g.coord_of(axis_a, flat);
        });
        shear_axis(d, g, axis_a, [&](std::size_t flat) {
            return -alpha * g.coord_of(axis_b, flat) / b_scale;
        });
    }
}

void roll_axis(cplx* d, const Grid& g, std::size_t axis, std::ptrdiff_t k) {
    const std::size_t n = g.axis(axis).n;
    const std::size_t s = g.stride(axis);
    const std::size_t outer = g.total_points() / (n * s);
    std::ptrdiff_t kk = k % static_cast<std::ptrdiff_t>(n);
    if (kk < 0) kk += static_cast<std::ptrdiff_t>(n);
    if (kk == 0) return;
    std::vector<cplx> tmp(n * s);
    for (std::size_t o = 0; o < outer; ++o) {
        cplx* base = d + o * n * s;
        std::copy(base, base + n * s, tmp.data());
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t src = (j + n - static_cast<std::size_t>(kk)) % n;
            std::copy(tmp.data() + src * s, tmp.data() + (src + 1) * s, base + j * s);
        }
    }
}

}  // namespace kvn::spectral
