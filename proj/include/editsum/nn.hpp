#pragma once

// Minimal dense-matrix engine with tape-based reverse-mode differentiation.
//
// All arrays are rank-2 (rows x cols, row-major). A `Tape` records every op
// executed on `Var` handles whose inputs require gradients; `Tape::backward`
// walks the record in reverse creation order, which is a topological order by
// construction. Parameters live outside the tape and receive gradients through
// leaf nodes that alias their storage, so one parameter set can be shared by
// any number of tapes.

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace editsum::nn {

using Rng = std::mt19937_64;

template <typename T>
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T(0))
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<T> data);

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    [[nodiscard]] std::size_t size() const { return data_.size(); }
    [[nodiscard]] bool empty() const { return data_.empty(); }
    [[nodiscard]] std::array<std::size_t, 2> shape() const { return {rows_, cols_}; }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    [[nodiscard]] T* data() { return data_.data(); }
    [[nodiscard]] const T* data() const { return data_.data(); }
    [[nodiscard]] std::span<T> values() { return data_; }
    [[nodiscard]] std::span<const T> values() const { return data_; }
    [[nodiscard]] std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    [[nodiscard]] std::span<const T> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

std::string shape_string(std::array<std::size_t, 2> shape);

template <typename T>
struct Parameter {
    std::string name;
    Matrix<T> value;
    Matrix<T> grad;

    Parameter() = default;
    Parameter(std::string n, std::size_t rows, std::size_t cols)
        : name(std::move(n)), value(rows, cols), grad(rows, cols) {}
    void zero_grad() { grad.fill(T(0)); }
};

template <typename T>
class Tape;

// Handle to one recorded value.
template <typename T>
struct Var {
    Tape<T>* tape = nullptr;
    std::size_t id = 0;

    [[nodiscard]] const Matrix<T>& value() const;
    // Gradient buffer; empty matrix until backward reached this node.
    [[nodiscard]] const Matrix<T>& grad() const;
    [[nodiscard]] std::size_t rows() const { return value().rows(); }
    [[nodiscard]] std::size_t cols() const { return value().cols(); }
    [[nodiscard]] bool requires_grad() const;
};

template <typename T>
class Tape {
  public:
    using BackwardFn = std::function<void(Tape&, std::size_t self)>;

    // With `grad_enabled == false` nothing is kept for backward (inference).
    explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    [[nodiscard]] bool grad_enabled() const { return grad_enabled_; }
    [[nodiscard]] std::size_t size() const { return nodes_.size(); }

    Var<T> constant(Matrix<T> value);
    // Tape-owned leaf whose gradient accumulates across backward calls.
    Var<T> variable(Matrix<T> value);
    // Leaf aliasing a parameter; gradients accumulate into `p.grad`.
    Var<T> param(Parameter<T>& p);

    // Populates gradients of every requires-grad leaf. Intermediate buffers are
    // reset first; leaf gradients keep accumulating until zeroed by the caller.
    void backward(Var<T> loss);

    // Op plumbing.
    Var<T> record(Matrix<T> value, std::initializer_list<Var<T>> inputs, BackwardFn fn);
    Var<T> record(Matrix<T> value, std::span<const Var<T>> inputs, BackwardFn fn);
    [[nodiscard]] const Matrix<T>& value(std::size_t id) const { return *nodes_[id].value; }
    [[nodiscard]] const Matrix<T>& grad(std::size_t id) const { return *nodes_[id].grad; }
    [[nodiscard]] bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
    // Gradient accumulator of `id`, allocated as zeros on first use.
    Matrix<T>& grad_buffer(std::size_t id);

  private:
    struct Node {
        Matrix<T> own_value;
        const Matrix<T>* value = nullptr;
        Matrix<T> own_grad;
        Matrix<T>* grad = nullptr;
        bool requires_grad = false;
        bool leaf = true;
        BackwardFn backward;
    };

    bool grad_enabled_;
    std::deque<Node> nodes_;
};

template <typename T>
const Matrix<T>& Var<T>::value() const {
    return tape->value(id);
}
template <typename T>
const Matrix<T>& Var<T>::grad() const {
    return tape->grad(id);
}
template <typename T>
bool Var<T>::requires_grad() const {
    return tape->requires_grad(id);
}

// ---------------------------------------------------------------------------
// Primitive ops. Every op throws ShapeMismatch naming the offending shapes.

template <typename T> Var<T> matmul(Var<T> a, Var<T> b);
template <typename T> Var<T> add(Var<T> a, Var<T> b);
template <typename T> Var<T> sub(Var<T> a, Var<T> b);
template <typename T> Var<T> mul(Var<T> a, Var<T> b);
// a[M,N] + bias[1,N] broadcast over rows.
template <typename T> Var<T> add_row(Var<T> a, Var<T> bias);
// a[M,N] scaled row-wise by col[M,1].
template <typename T> Var<T> mul_col(Var<T> a, Var<T> col);
template <typename T> Var<T> tanh(Var<T> a);
template <typename T> Var<T> sigmoid(Var<T> a);
template <typename T> Var<T> sum(Var<T> a);
template <typename T> Var<T> concat_cols(std::span<const Var<T>> parts);
template <typename T> Var<T> concat_rows(std::span<const Var<T>> parts);
template <typename T> Var<T> slice_cols(Var<T> a, std::size_t begin, std::size_t end);
template <typename T> Var<T> slice_rows(Var<T> a, std::size_t begin, std::size_t end);
// out[i] = a[idx[i]]; also serves as embedding lookup on a parameter table.
template <typename T> Var<T> gather_rows(Var<T> a, std::span<const std::int32_t> idx);
template <typename T> Var<T> reshape(Var<T> a, std::size_t rows, std::size_t cols);
// Sums each run of `group` consecutive rows: [M*group, N] -> [M, N].
template <typename T> Var<T> group_sum_rows(Var<T> a, std::size_t group);
// Softmax along axis 1 (within each row) or axis 0 (within each column).
template <typename T> Var<T> softmax(Var<T> a, int axis = 1);
// Row softmax restricted to entries with mask != 0; rows with empty support
// produce all zeros.
template <typename T> Var<T> masked_softmax_rows(Var<T> a, std::span<const std::uint8_t> mask);
// Inverted dropout; identity when !train or p == 0.
template <typename T> Var<T> dropout(Var<T> a, double p, bool train, Rng& rng);
template <typename T> Var<T> dropout(Var<T> a, double p, bool train, std::uint64_t seed);
// Mean over positions with mask != 0 of -log softmax(logits[t])[targets[t]].
template <typename T>
Var<T> cross_entropy(Var<T> logits, std::span<const std::int32_t> targets,
                     std::span<const std::uint8_t> mask);

template <typename T>
Var<T> embedding_lookup(Var<T> table, std::span<const std::int32_t> ids) {
    return gather_rows(table, ids);
}

template <typename T>
Var<T> concat_cols(std::initializer_list<Var<T>> parts) {
    return concat_cols<T>(std::span<const Var<T>>(parts.begin(), parts.size()));
}

template <typename T>
Var<T> concat_rows(std::initializer_list<Var<T>> parts) {
    return concat_rows<T>(std::span<const Var<T>>(parts.begin(), parts.size()));
}

template <typename T>
struct LstmWeights {
    Var<T> w; // [(input + hidden), 4 * hidden], gate blocks i, f, g, o
    Var<T> b; // [1, 4 * hidden]
};

template <typename T>
struct LstmState {
    Var<T> h;
    Var<T> c;
};

// One LSTM step over a batch of rows.
template <typename T>
LstmState<T> lstm_cell(Var<T> x, Var<T> h_prev, Var<T> c_prev, const LstmWeights<T>& weights);

// ---------------------------------------------------------------------------
// Initialization and optimization.

template <typename T> void glorot_uniform(Matrix<T>& m, Rng& rng);
template <typename T> void uniform_fill(Matrix<T>& m, T bound, Rng& rng);

// Global L2 norm of all gradients; rescales them to `max_norm` when above it.
// Returns the pre-clip norm.
template <typename T> double clip_grad_norm(std::span<Parameter<T>* const> params, double max_norm);
template <typename T> double grad_norm(std::span<Parameter<T>* const> params);

struct AdamHyper {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

template <typename T>
class Adam {
  public:
    Adam() = default;
    Adam(std::span<Parameter<T>* const> params, AdamHyper hyper);

    // Bias-corrected Adam update of every parameter from its current gradient.
    void step(std::span<Parameter<T>* const> params);

    [[nodiscard]] const AdamHyper& hyper() const { return hyper_; }
    void set_learning_rate(double lr) { hyper_.learning_rate = lr; }
    [[nodiscard]] std::uint64_t steps() const { return step_; }

    std::vector<Matrix<T>>& first_moments() { return m_; }
    std::vector<Matrix<T>>& second_moments() { return v_; }
    [[nodiscard]] const std::vector<Matrix<T>>& first_moments() const { return m_; }
    [[nodiscard]] const std::vector<Matrix<T>>& second_moments() const { return v_; }
    void set_steps(std::uint64_t s) { step_ = s; }

  private:
    AdamHyper hyper_;
    std::uint64_t step_ = 0;
    std::vector<Matrix<T>> m_;
    std::vector<Matrix<T>> v_;
};

} // namespace editsum::nn
