#include "editsum/kernels.hpp"

#include <algorithm>
#include <vector>

namespace editsum::kernels::parallel {

namespace {

// Below this many multiply-adds the fork/join costs more than it saves.
constexpr std::size_t kMinParallelWork = 1 << 16;

template <typename T>
void nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n,
        bool accumulate) {
    const auto rows = static_cast<long long>(m);
#pragma omp parallel for schedule(static) if (m * k * n >= kMinParallelWork)
    for (long long i = 0; i < rows; ++i) {
        const T* a_row = a + i * k;
        T* c_row = c + i * n;
        if (!accumulate) std::fill(c_row, c_row + n, T(0));
        for (std::size_t p = 0; p < k; ++p) {
            const T av = a_row[p];
            const T* b_row = b + p * n;
            for (std::size_t j = 0; j < n; ++j) c_row[j] += av * b_row[j];
        }
    }
}

template <typename T>
void nt(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n,
        bool accumulate) {
    std::vector<T> bt(k * n);
    const auto cols = static_cast<long long>(n);
#pragma omp parallel for schedule(static) if (k * n >= kMinParallelWork)
    for (long long j = 0; j < cols; ++j)
        for (std::size_t p = 0; p < k; ++p) bt[p * n + j] = b[j * k + p];
    nn(a, bt.data(), c, m, k, n, accumulate);
}

template <typename T>
void tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n,
        bool accumulate) {
    const auto rows = static_cast<long long>(m);
#pragma omp parallel for schedule(static) if (m * k * n >= kMinParallelWork)
    for (long long i = 0; i < rows; ++i) {
        T* c_row = c + i * n;
        if (!accumulate) std::fill(c_row, c_row + n, T(0));
        for (std::size_t p = 0; p < k; ++p) {
            const T av = a[p * m + i];
            const T* b_row = b + p * n;
            for (std::size_t j = 0; j < n; ++j) c_row[j] += av * b_row[j];
        }
    }
}

} // namespace

#define EDITSUM_PARALLEL_DEFS(T)                                                               \
    void gemm_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n,     \
                 bool accumulate) {                                                            \
        nn(a, b, c, m, k, n, accumulate);                                                      \
    }                                                                                          \
    void gemm_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n,     \
                 bool accumulate) {                                                            \
        nt(a, b, c, m, k, n, accumulate);                                                      \
    }                                                                                          \
    void gemm_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n,     \
                 bool accumulate) {                                                            \
        tn(a, b, c, m, k, n, accumulate);                                                      \
    }

EDITSUM_PARALLEL_DEFS(float)
EDITSUM_PARALLEL_DEFS(double)

#undef EDITSUM_PARALLEL_DEFS

} // namespace editsum::kernels::parallel
