#pragma once

#include <cstddef>

// Dense kernels behind the autodiff engine. Two implementations share one
// signature: `serial` is the plain reference and `parallel` splits output rows
// across OpenMP threads. Each output row is accumulated in the same order by
// both, so their results are bit-identical.
namespace editsum::kernels {

enum class Backend { serial, parallel };

// Process-wide choice used by nn_core (defaults to parallel).
void set_backend(Backend b);
Backend backend();

#define EDITSUM_KERNEL_DECLS(T)                                                              \
    /* C[M,N] (+)= A[M,K] * B[K,N] */                                                        \
    void gemm_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n,   \
                 bool accumulate);                                                           \
    /* C[M,N] (+)= A[M,K] * B[N,K]^T */                                                      \
    void gemm_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n,   \
                 bool accumulate);                                                           \
    /* C[M,N] (+)= A[K,M]^T * B[K,N] */                                                      \
    void gemm_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n,   \
                 bool accumulate);

namespace serial {
EDITSUM_KERNEL_DECLS(float)
EDITSUM_KERNEL_DECLS(double)
} // namespace serial

namespace parallel {
EDITSUM_KERNEL_DECLS(float)
EDITSUM_KERNEL_DECLS(double)
} // namespace parallel

#undef EDITSUM_KERNEL_DECLS

// Dispatch on the process-wide backend.
template <typename T>
void gemm_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n,
             bool accumulate) {
    if (backend() == Backend::parallel)
        parallel::gemm_nn(a, b, c, m, k, n, accumulate);
    else
        serial::gemm_nn(a, b, c, m, k, n, accumulate);
}

template <typename T>
void gemm_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n,
             bool accumulate) {
    if (backend() == Backend::parallel)
        parallel::gemm_nt(a, b, c, m, k, n, accumulate);
    else
        serial::gemm_nt(a, b, c, m, k, n, accumulate);
}

template <typename T>
void gemm_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n,
             bool accumulate) {
    if (backend() == Backend::parallel)
        parallel::gemm_tn(a, b, c, m, k, n, accumulate);
    else
        serial::gemm_tn(a, b, c, m, k, n, accumulate);
}

} // namespace editsum::kernels
