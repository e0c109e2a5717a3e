#include "editsum/error.hpp"
#include "editsum/kernels.hpp"
#include "editsum/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace editsum::nn {

namespace {

template <typename T>
void require_same(const char* op, Var<T> a, Var<T> b) {
    if (a.value().shape() != b.value().shape())
        throw ShapeMismatch(std::string(op) + ": " + shape_string(a.value().shape()) + " vs " +
                            shape_string(b.value().shape()));
}

template <typename T>
T sigmoid_scalar(T x) {
    return x >= T(0) ? T(1) / (T(1) + std::exp(-x)) : std::exp(x) / (T(1) + std::exp(x));
}

} // namespace

template <typename T>
Var<T> matmul(Var<T> a, Var<T> b) {
    const auto& av = a.value();
    const auto& bv = b.value();
    if (av.cols() != bv.rows())
        throw ShapeMismatch("matmul: " + shape_string(av.shape()) + " x " +
                            shape_string(bv.shape()));
    const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
    Matrix<T> out(m, n);
    kernels::gemm_nn(av.data(), bv.data(), out.data(), m, k, n, false);
    return a.tape->record(std::move(out), {a, b}, [a, b, m, k, n](Tape<T>& t, std::size_t self) {
        const auto& g = t.grad(self);
        if (t.requires_grad(a.id))
            kernels::gemm_nt(g.data(), t.value(b.id).data(), t.grad_buffer(a.id).data(), m, n, k,
                             true);
        if (t.requires_grad(b.id))
            kernels::gemm_tn(t.value(a.id).data(), g.data(), t.grad_buffer(b.id).data(), k, m, n,
                             true);
    });
}

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
    require_same("add", a, b);
    Matrix<T> out = a.value();
    const auto& bv = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
    return a.tape->record(std::move(out), {a, b}, [a, b](Tape<T>& t, std::size_t self) {
        const auto& g = t.grad(self);
        for (auto id : {a.id, b.id}) {
            if (!t.requires_grad(id)) continue;
            auto& d = t.grad_buffer(id);
            for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
        }
    });
}

template <typename T>
Var<T> sub(Var<T> a, Var<T> b) {
    require_same("sub", a, b);
    Matrix<T> out = a.value();
    const auto& bv = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
    return a.tape->record(std::move(out), {a, b}, [a, b](Tape<T>& t, std::size_t self) {
        const auto& g = t.grad(self);
        if (t.requires_grad(a.id)) {
            auto& d = t.grad_buffer(a.id);
            for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
        }
        if (t.requires_grad(b.id)) {
            auto& d = t.grad_buffer(b.id);
            for (std::size_t i = 0; i < g.size(); ++i) d[i] -= g[i];
        }
    });
}

template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
    require_same("mul", a, b);
    Matrix<T> out = a.value();
    const auto& bv = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
    return a.tape->record(std::move(out), {a, b}, [a, b](Tape<T>& t, std::size_t self) {
        const auto& g = t.grad(self);
        if (t.requires_grad(a.id)) {
            auto& d = t.grad_buffer(a.id);
            const auto& o = t.value(b.id);
            for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * o[i];
        }
        if (t.requires_grad(b.id)) {
            auto& d = t.grad_buffer(b.id);
            const auto& o = t.value(a.id);
            for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * o[i];
        }
    });
}

template <typename T>
Var<T> add_row(Var<T> a, Var<T> bias) {
    const auto& av = a.value();
    const auto& bv = bias.value();
    if (bv.rows() != 1 || bv.cols() != av.cols())
        throw ShapeMismatch("add_row: " + shape_string(av.shape()) + " + " +
                            shape_string(bv.shape()));
    Matrix<T> out = av;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) row[c] += bv[c];
    }
    return a.tape->record(std::move(out), {a, bias}, [a, bias](Tape<T>& t, std::size_t self) {
        const auto& g = t.grad(self);
        if (t.requires_grad(a.id)) {
            auto& d = t.grad_buffer(a.id);
            for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
        }
        if (t.requires_grad(bias.id)) {
            auto& d = t.grad_buffer(bias.id);
            for (std::size_t r = 0; r < g.rows(); ++r) {
                auto row = g.row(r);
                for (std::size_t c = 0; c < row.size(); ++c) d[c] += row[c];
            }
        }
    });
}

template <typename T>
Var<T> mul_col(Var<T> a, Var<T> col) {
    const auto& av = a.value();
    const auto& cv = col.value();
    if (cv.cols() != 1 || cv.rows() != av.rows())
        throw ShapeMismatch("mul_col: " + shape_string(av.shape()) + " * " +
                            shape_string(cv.shape()));
    Matrix<T> out = av;
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (auto& x : out.row(r)) x *= cv[r];
    return a.tape->record(std::move(out), {a, col}, [a, col](Tape<T>& t, std::size_t self) {
        const auto& g = t.grad(self);
        const auto& cvv = t.value(col.id);
        const auto& avv = t.value(a.id);
        if (t.requires_grad(a.id)) {
            auto& d = t.grad_buffer(a.id);
            for (std::size_t r = 0; r < g.rows(); ++r) {
                auto gr = g.row(r);
                auto dr = d.row(r);
                for (std::size_t c = 0; c < gr.size(); ++c) dr[c] += gr[c] * cvv[r];
            }
        }
        if (t.requires_grad(col.id)) {
            auto& d = t.grad_buffer(col.id);
            for (std::size_t r = 0; r < g.rows(); ++r) {
                auto gr = g.row(r);
                auto ar = avv.row(r);
                T acc = T(0);
                for (std::size_t c = 0; c < gr.size(); ++c) acc += gr[c] * ar[c];
                d[r] += acc;
            }
        }
    });
}

template <typename T>
Var<T> tanh(Var<T> a) {
    Matrix<T> out = a.value();
    for (auto& x : out.values()) x = std::tanh(x);
    return a.tape->record(std::move(out), {a}, [a](Tape<T>& t, std::size_t self) {
        const auto& g = t.grad(self);
        const auto& y = t.value(self);
        auto& d = t.grad_buffer(a.id);
        for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * (T(1) - y[i] * y[i]);
    });
}

template <typename T>
Var<T> sigmoid(Var<T> a) {
    Matrix<T> out = a.value();
    for (auto& x : out.values()) x = sigmoid_scalar(x);
    return a.tape->record(std::move(out), {a}, [a](Tape<T>& t, std::size_t self) {
        const auto& g = t.grad(self);
        const auto& y = t.value(self);
        auto& d = t.grad_buffer(a.id);
        for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * y[i] * (T(1) - y[i]);
    });
}

template <typename T>
Var<T> sum(Var<T> a) {
    T s = T(0);
    for (T x : a.value().values()) s += x;
    return a.tape->record(Matrix<T>(1, 1, s), {a}, [a](Tape<T>& t, std::size_t self) {
        const T g = t.grad(self)[0];
        for (auto& x : t.grad_buffer(a.id).values()) x += g;
    });
}

template <typename T>
Var<T> concat_cols(std::span<const Var<T>> parts) {
    if (parts.empty()) throw ShapeMismatch("concat_cols: no inputs");
    const std::size_t rows = parts[0].rows();
    std::vector<std::size_t> offsets;
    std::size_t cols = 0;
    for (const auto& p : parts) {
        if (p.rows() != rows)
            throw ShapeMismatch("concat_cols: " + shape_string(parts[0].value().shape()) + " vs " +
                                shape_string(p.value().shape()));
        offsets.push_back(cols);
        cols += p.cols();
    }
    Matrix<T> out(rows, cols);
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto& pv = parts[i].value();
        for (std::size_t r = 0; r < rows; ++r)
            std::copy(pv.row(r).begin(), pv.row(r).end(), out.row(r).begin() + offsets[i]);
    }
    std::vector<Var<T>> inputs(parts.begin(), parts.end());
    return parts[0].tape->record(
        std::move(out), parts, [inputs, offsets](Tape<T>& t, std::size_t self) {
            const auto& g = t.grad(self);
            for (std::size_t i = 0; i < inputs.size(); ++i) {
                if (!t.requires_grad(inputs[i].id)) continue;
                auto& d = t.grad_buffer(inputs[i].id);
                for (std::size_t r = 0; r < d.rows(); ++r) {
                    auto gr = g.row(r).subspan(offsets[i], d.cols());
                    auto dr = d.row(r);
                    for (std::size_t c = 0; c < dr.size(); ++c) dr[c] += gr[c];
                }
            }
        });
}

template <typename T>
Var<T> concat_rows(std::span<const Var<T>> parts) {
    if (parts.empty()) throw ShapeMismatch("concat_rows: no inputs");
    const std::size_t cols = parts[0].cols();
    std::vector<std::size_t> offsets;
    std::size_t rows = 0;
    for (const auto& p : parts) {
        if (p.cols() != cols)
            throw ShapeMismatch("concat_rows: " + shape_string(parts[0].value().shape()) + " vs " +
                                shape_string(p.value().shape()));
        offsets.push_back(rows);
        rows += p.rows();
    }
    Matrix<T> out(rows, cols);
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto& pv = parts[i].value();
        std::copy(pv.values().begin(), pv.values().end(), out.data() + offsets[i] * cols);
    }
    std::vector<Var<T>> inputs(parts.begin(), parts.end());
    return parts[0].tape->record(
        std::move(out), parts, [inputs, offsets, cols](Tape<T>& t, std::size_t self) {
            const auto& g = t.grad(self);
            for (std::size_t i = 0; i < inputs.size(); ++i) {
                if (!t.requires_grad(inputs[i].id)) continue;
                auto& d = t.grad_buffer(inputs[i].id);
                const T* src = g.data() + offsets[i] * cols;
                for (std::size_t k = 0; k < d.size(); ++k) d[k] += src[k];
            }
        });
}

template <typename T>
Var<T> slice_cols(Var<T> a, std::size_t begin, std::size_t end) {
    const auto& av = a.value();
    if (begin > end || end > av.cols())
        throw ShapeMismatch("slice_cols [" + std::to_string(begin) + "," + std::to_string(end) +
                            ") of " + shape_string(av.shape()));
    const std::size_t w = end - begin;
    Matrix<T> out(av.rows(), w);
    for (std::size_t r = 0; r < av.rows(); ++r) {
        auto src = av.row(r).subspan(begin, w);
        std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return a.tape->record(std::move(out), {a}, [a, begin, w](Tape<T>& t, std::size_t self) {
        const auto& g = t.grad(self);
        auto& d = t.grad_buffer(a.id);
        for (std::size_t r = 0; r < g.rows(); ++r) {
            auto dr = d.row(r).subspan(begin, w);
            auto gr = g.row(r);
            for (std::size_t c = 0; c < w; ++c) dr[c] += gr[c];
        }
    });
}

template <typename T>
Var<T> slice_rows(Var<T> a, std::size_t begin, std::size_t end) {
    const auto& av = a.value();
    if (begin > end || end > av.rows())
        throw ShapeMismatch("slice_rows [" + std::to_string(begin) + "," + std::to_string(end) +
                            ") of " + shape_string(av.shape()));
    const std::size_t n = (end - begin) * av.cols();
    std::vector<T> data(av.data() + begin * av.cols(), av.data() + begin * av.cols() + n);
    Matrix<T> out(end - begin, av.cols(), std::move(data));
    return a.tape->record(std::move(out), {a}, [a, begin](Tape<T>& t, std::size_t self) {
        const auto& g = t.grad(self);
        auto& d = t.grad_buffer(a.id);
        T* dst = d.data() + begin * d.cols();
        for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
    });
}

template <typename T>
Var<T> gather_rows(Var<T> a, std::span<const std::int32_t> idx) {
    const auto& av = a.value();
    for (auto i : idx)
        if (i < 0 || static_cast<std::size_t>(i) >= av.rows())
            throw IndexOutOfVocab("gather_rows: index " + std::to_string(i) + " outside " +
                                  shape_string(av.shape()));
    Matrix<T> out(idx.size(), av.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        auto src = av.row(static_cast<std::size_t>(idx[r]));
        std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    std::vector<std::int32_t> ids(idx.begin(), idx.end());
    return a.tape->record(std::move(out), {a}, [a, ids](Tape<T>& t, std::size_t self) {
        const auto& g = t.grad(self);
        auto& d = t.grad_buffer(a.id);
        for (std::size_t r = 0; r < ids.size(); ++r) {
            auto dr = d.row(static_cast<std::size_t>(ids[r]));
            auto gr = g.row(r);
            for (std::size_t c = 0; c < dr.size(); ++c) dr[c] += gr[c];
        }
    });
}

template <typename T>
Var<T> reshape(Var<T> a, std::size_t rows, std::size_t cols) {
    const auto& av = a.value();
    if (rows * cols != av.size())
        throw ShapeMismatch("reshape " + shape_string(av.shape()) + " to " +
                            shape_string({rows, cols}));
    Matrix<T> out(rows, cols, std::vector<T>(av.values().begin(), av.values().end()));
    return a.tape->record(std::move(out), {a}, [a](Tape<T>& t, std::size_t self) {
        const auto& g = t.grad(self);
        auto& d = t.grad_buffer(a.id);
        for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
    });
}

template <typename T>
Var<T> group_sum_rows(Var<T> a, std::size_t group) {
    const auto& av = a.value();
    if (group == 0 || av.rows() % group != 0)
        throw ShapeMismatch("group_sum_rows: " + shape_string(av.shape()) + " by groups of " +
                            std::to_string(group));
    const std::size_t m = av.rows() / group, n = av.cols();
    Matrix<T> out(m, n);
    for (std::size_t i = 0; i < m; ++i) {
        auto orow = out.row(i);
        for (std::size_t k = 0; k < group; ++k) {
            auto src = av.row(i * group + k);
            for (std::size_t c = 0; c < n; ++c) orow[c] += src[c];
        }
    }
    return a.tape->record(std::move(out), {a}, [a, group](Tape<T>& t, std::size_t self) {
        const auto& g = t.grad(self);
        auto& d = t.grad_buffer(a.id);
        for (std::size_t r = 0; r < d.rows(); ++r) {
            auto gr = g.row(r / group);
            auto dr = d.row(r);
            for (std::size_t c = 0; c < dr.size(); ++c) dr[c] += gr[c];
        }
    });
}

namespace {

// Softmax over entries `stride` apart starting at `base`; masked-out entries
// get weight 0. Returns false when the support is empty.
template <typename T>
bool softmax_line(const T* in, T* out, std::size_t count, std::size_t stride,
                  const std::uint8_t* mask) {
    T mx = -std::numeric_limits<T>::infinity();
    bool any = false;
    for (std::size_t i = 0; i < count; ++i) {
        if (mask && !mask[i * stride]) continue;
        mx = std::max(mx, in[i * stride]);
        any = true;
    }
    if (!any) {
        for (std::size_t i = 0; i < count; ++i) out[i * stride] = T(0);
        return false;
    }
    T total = T(0);
    for (std::size_t i = 0; i < count; ++i) {
        const bool on = !mask || mask[i * stride];
        const T e = on ? std::exp(in[i * stride] - mx) : T(0);
        out[i * stride] = e;
        total += e;
    }
    for (std::size_t i = 0; i < count; ++i) out[i * stride] /= total;
    return true;
}

// dx = y * (g - <g, y>) along one line.
template <typename T>
void softmax_line_backward(const T* y, const T* g, T* d, std::size_t count, std::size_t stride) {
    T dot = T(0);
    for (std::size_t i = 0; i < count; ++i) dot += g[i * stride] * y[i * stride];
    for (std::size_t i = 0; i < count; ++i) d[i * stride] += y[i * stride] * (g[i * stride] - dot);
}

} // namespace

template <typename T>
Var<T> softmax(Var<T> a, int axis) {
    if (axis != 0 && axis != 1) throw ShapeMismatch("softmax: axis must be 0 or 1");
    const auto& av = a.value();
    Matrix<T> out(av.rows(), av.cols());
    const bool rows_axis = axis == 1;
    const std::size_t lines = rows_axis ? av.rows() : av.cols();
    const std::size_t count = rows_axis ? av.cols() : av.rows();
    const std::size_t stride = rows_axis ? 1 : av.cols();
    const auto base = [&](std::size_t l) { return rows_axis ? l * av.cols() : l; };
    for (std::size_t l = 0; l < lines; ++l)
        softmax_line(av.data() + base(l), out.data() + base(l), count, stride,
                     static_cast<const std::uint8_t*>(nullptr));
    return a.tape->record(
        std::move(out), {a}, [a, rows_axis, lines, count, stride](Tape<T>& t, std::size_t self) {
            const auto& g = t.grad(self);
            const auto& y = t.value(self);
            auto& d = t.grad_buffer(a.id);
            for (std::size_t l = 0; l < lines; ++l) {
                const std::size_t b = rows_axis ? l * count : l;
                softmax_line_backward(y.data() + b, g.data() + b, d.data() + b, count, stride);
            }
        });
}

template <typename T>
Var<T> masked_softmax_rows(Var<T> a, std::span<const std::uint8_t> mask) {
    const auto& av = a.value();
    if (mask.size() != av.size())
        throw ShapeMismatch("masked_softmax_rows: mask of " + std::to_string(mask.size()) +
                            " entries for " + shape_string(av.shape()));
    Matrix<T> out(av.rows(), av.cols());
    const std::size_t n = av.cols();
    for (std::size_t r = 0; r < av.rows(); ++r)
        softmax_line(av.data() + r * n, out.data() + r * n, n, 1, mask.data() + r * n);
    return a.tape->record(std::move(out), {a}, [a, n](Tape<T>& t, std::size_t self) {
        const auto& g = t.grad(self);
        const auto& y = t.value(self);
        auto& d = t.grad_buffer(a.id);
        // masked entries have y == 0 and so receive no gradient
        for (std::size_t r = 0; r < g.rows(); ++r)
            softmax_line_backward(y.data() + r * n, g.data() + r * n, d.data() + r * n, n, 1);
    });
}

template <typename T>
Var<T> dropout(Var<T> a, double p, bool train, Rng& rng) {
    if (!train || p <= 0.0) return a;
    if (p >= 1.0) throw ShapeMismatch("dropout probability must be < 1");
    const auto& av = a.value();
    Matrix<T> keep(av.rows(), av.cols());
    std::bernoulli_distribution coin(1.0 - p);
    const T scale = static_cast<T>(1.0 / (1.0 - p));
    for (auto& k : keep.values()) k = coin(rng) ? scale : T(0);
    Matrix<T> out = av;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= keep[i];
    return a.tape->record(std::move(out), {a},
                          [a, keep = std::move(keep)](Tape<T>& t, std::size_t self) {
                              const auto& g = t.grad(self);
                              auto& d = t.grad_buffer(a.id);
                              for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * keep[i];
                          });
}

template <typename T>
Var<T> dropout(Var<T> a, double p, bool train, std::uint64_t seed) {
    Rng rng(seed);
    return dropout(a, p, train, rng);
}

template <typename T>
Var<T> cross_entropy(Var<T> logits, std::span<const std::int32_t> targets,
                     std::span<const std::uint8_t> mask) {
    const auto& lv = logits.value();
    const std::size_t rows = lv.rows(), vocab = lv.cols();
    if (targets.size() != rows || mask.size() != rows)
        throw ShapeMismatch("cross_entropy: " + std::to_string(targets.size()) + " targets and " +
                            std::to_string(mask.size()) + " mask entries for logits " +
                            shape_string(lv.shape()));
    std::size_t counted = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        if (!mask[r]) continue;
        if (targets[r] < 0 || static_cast<std::size_t>(targets[r]) >= vocab)
            throw IndexOutOfVocab("cross_entropy: target " + std::to_string(targets[r]) +
                                  " outside vocabulary of size " + std::to_string(vocab));
        ++counted;
    }
    Matrix<T> probs(rows, vocab);
    T loss = T(0);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!mask[r]) continue;
        auto in = lv.row(r);
        const T mx = *std::max_element(in.begin(), in.end());
        T total = T(0);
        auto pr = probs.row(r);
        for (std::size_t c = 0; c < vocab; ++c) {
            pr[c] = std::exp(in[c] - mx);
            total += pr[c];
        }
        for (auto& x : pr) x /= total;
        loss += -(in[static_cast<std::size_t>(targets[r])] - mx - std::log(total));
    }
    const T denom = counted ? static_cast<T>(counted) : T(1);
    loss /= denom;
    std::vector<std::int32_t> tgt(targets.begin(), targets.end());
    std::vector<std::uint8_t> msk(mask.begin(), mask.end());
    return logits.tape->record(
        Matrix<T>(1, 1, loss), {logits},
        [logits, tgt, msk, probs = std::move(probs), denom](Tape<T>& t, std::size_t self) {
            const T g = t.grad(self)[0] / denom;
            auto& d = t.grad_buffer(logits.id);
            for (std::size_t r = 0; r < tgt.size(); ++r) {
                if (!msk[r]) continue;
                auto pr = probs.row(r);
                auto dr = d.row(r);
                for (std::size_t c = 0; c < dr.size(); ++c) dr[c] += g * pr[c];
                dr[static_cast<std::size_t>(tgt[r])] -= g;
            }
        });
}

template <typename T>
LstmState<T> lstm_cell(Var<T> x, Var<T> h_prev, Var<T> c_prev, const LstmWeights<T>& weights) {
    const std::size_t hidden = h_prev.cols();
    const auto& w = weights.w.value();
    if (w.rows() != x.cols() + hidden || w.cols() != 4 * hidden ||
        weights.b.value().shape() != std::array<std::size_t, 2>{1, 4 * hidden} ||
        c_prev.value().shape() != h_prev.value().shape() || x.rows() != h_prev.rows())
        throw ShapeMismatch("lstm_cell: x " + shape_string(x.value().shape()) + ", h " +
                            shape_string(h_prev.value().shape()) + ", c " +
                            shape_string(c_prev.value().shape()) + ", W " +
                            shape_string(w.shape()) + ", b " +
                            shape_string(weights.b.value().shape()));
    auto gates = add_row(matmul(concat_cols<T>({x, h_prev}), weights.w), weights.b);
    auto i = sigmoid(slice_cols(gates, 0, hidden));
    auto f = sigmoid(slice_cols(gates, hidden, 2 * hidden));
    auto g = tanh(slice_cols(gates, 2 * hidden, 3 * hidden));
    auto o = sigmoid(slice_cols(gates, 3 * hidden, 4 * hidden));
    auto c = add(mul(f, c_prev), mul(i, g));
    auto h = mul(o, tanh(c));
    return {h, c};
}

#define EDITSUM_INSTANTIATE_OPS(T)                                                             \
    template Var<T> matmul(Var<T>, Var<T>);                                                    \
    template Var<T> add(Var<T>, Var<T>);                                                       \
    template Var<T> sub(Var<T>, Var<T>);                                                       \
    template Var<T> mul(Var<T>, Var<T>);                                                       \
    template Var<T> add_row(Var<T>, Var<T>);                                                   \
    template Var<T> mul_col(Var<T>, Var<T>);                                                   \
    template Var<T> tanh(Var<T>);                                                              \
    template Var<T> sigmoid(Var<T>);                                                           \
    template Var<T> sum(Var<T>);                                                               \
    template Var<T> concat_cols(std::span<const Var<T>>);                                      \
    template Var<T> concat_rows(std::span<const Var<T>>);                                      \
    template Var<T> slice_cols(Var<T>, std::size_t, std::size_t);                              \
    template Var<T> slice_rows(Var<T>, std::size_t, std::size_t);                              \
    template Var<T> gather_rows(Var<T>, std::span<const std::int32_t>);                        \
    template Var<T> reshape(Var<T>, std::size_t, std::size_t);                                 \
    template Var<T> group_sum_rows(Var<T>, std::size_t);                                       \
    template Var<T> softmax(Var<T>, int);                                                      \
    template Var<T> masked_softmax_rows(Var<T>, std::span<const std::uint8_t>);                \
    template Var<T> dropout(Var<T>, double, bool, Rng&);                                       \
    template Var<T> dropout(Var<T>, double, bool, std::uint64_t);                              \
    template Var<T> cross_entropy(Var<T>, std::span<const std::int32_t>,                       \
                                  std::span<const std::uint8_t>);                              \
    template LstmState<T> lstm_cell(Var<T>, Var<T>, Var<T>, const LstmWeights<T>&);

EDITSUM_INSTANTIATE_OPS(float)
EDITSUM_INSTANTIATE_OPS(double)

#undef EDITSUM_INSTANTIATE_OPS

} // namespace editsum::nn
