#include "editsum/kernels.hpp"

#include <algorithm>
#include <vector>

namespace editsum::kernels {

namespace {
Backend g_backend = Backend::parallel;
} // namespace

void set_backend(Backend b) { g_backend = b; }
Backend backend() { return g_backend; }

namespace serial {

namespace {

template <typename T>
void row_nn(const T* a_row, const T* b, T* c_row, std::size_t k, std::size_t n, bool accumulate) {
    if (!accumulate) std::fill(c_row, c_row + n, T(0));
    for (std::size_t p = 0; p < k; ++p) {
        const T a = a_row[p];
        const T* b_row = b + p * n;
        for (std::size_t j = 0; j < n; ++j) c_row[j] += a * b_row[j];
    }
}

template <typename T>
void nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n,
        bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) row_nn(a + i * k, b, c + i * n, k, n, accumulate);
}

template <typename T>
void nt(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n,
        bool accumulate) {
    std::vector<T> bt(k * n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t p = 0; p < k; ++p) bt[p * n + j] = b[j * k + p];
    nn(a, bt.data(), c, m, k, n, accumulate);
}

template <typename T>
void tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n,
        bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
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

#define EDITSUM_SERIAL_DEFS(T)                                                                 \
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

EDITSUM_SERIAL_DEFS(float)
EDITSUM_SERIAL_DEFS(double)

#undef EDITSUM_SERIAL_DEFS

} // namespace serial
} // namespace editsum::kernels
