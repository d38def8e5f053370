#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kvn {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Thrown on invalid configuration (bad grid spec, bad scenario field, ...).
/// The message names the offending field or axis.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown on runtime numerical failure (margin breach, NaN, blowup).
class NumericsError : public std::runtime_error {
public:
    explicit NumericsError(const std::string& what) : std::runtime_error(what) {}
};

/// Process-wide worker count for the loop helpers below. The CLI sets this
/// from --threads; library code never spawns more workers than this.
void set_worker_count(int n);
int worker_count();

/// Keeps grid-sized allocations on the heap free list instead of cycling
/// them through mmap/munmap (glibc); a large win for repeated field copies.
void tune_allocator();

/// Runs fn(begin, end) over [0, n) split into contiguous chunks. Chunk
/// boundaries depend only on n, never on the worker count, so per-chunk
/// results (and any serial combination of them) are reproducible.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

/// Deterministic sum reduction: partial sums over fixed-size chunks are
/// combined in chunk order regardless of how many workers ran them.
double parallel_sum(std::size_t n, const std::function<double(std::size_t, std::size_t)>& chunk_sum);
cplx parallel_sum_cplx(std::size_t n, const std::function<cplx(std::size_t, std::size_t)>& chunk_sum);

}  // namespace kvn
