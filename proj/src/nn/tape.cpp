#include "editsum/error.hpp"
#include "editsum/nn.hpp"

namespace editsum::nn {

std::string shape_string(std::array<std::size_t, 2> shape) {
    return "[" + std::to_string(shape[0]) + "x" + std::to_string(shape[1]) + "]";
}

template <typename T>
Matrix<T>::Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols)
        throw ShapeMismatch("matrix data of size " + std::to_string(data_.size()) +
                            " does not fill " + shape_string({rows, cols}));
}

template <typename T>
Var<T> Tape<T>::constant(Matrix<T> value) {
    Node& n = nodes_.emplace_back();
    n.own_value = std::move(value);
    n.value = &n.own_value;
    n.grad = &n.own_grad;
    return {this, nodes_.size() - 1};
}

template <typename T>
Var<T> Tape<T>::variable(Matrix<T> value) {
    Var<T> v = constant(std::move(value));
    nodes_.back().requires_grad = grad_enabled_;
    return v;
}

template <typename T>
Var<T> Tape<T>::param(Parameter<T>& p) {
    Node& n = nodes_.emplace_back();
    n.value = &p.value;
    n.requires_grad = grad_enabled_;
    n.grad = grad_enabled_ ? &p.grad : &n.own_grad;
    return {this, nodes_.size() - 1};
}

template <typename T>
Var<T> Tape<T>::record(Matrix<T> value, std::initializer_list<Var<T>> inputs, BackwardFn fn) {
    return record(std::move(value), std::span<const Var<T>>(inputs.begin(), inputs.size()),
                  std::move(fn));
}

template <typename T>
Var<T> Tape<T>::record(Matrix<T> value, std::span<const Var<T>> inputs, BackwardFn fn) {
    bool needs = false;
    if (grad_enabled_)
        for (const auto& v : inputs) needs = needs || nodes_[v.id].requires_grad;
    Node& n = nodes_.emplace_back();
    n.own_value = std::move(value);
    n.value = &n.own_value;
    n.grad = &n.own_grad;
    n.leaf = false;
    n.requires_grad = needs;
    if (needs) n.backward = std::move(fn);
    return {this, nodes_.size() - 1};
}

template <typename T>
Matrix<T>& Tape<T>::grad_buffer(std::size_t id) {
    Node& n = nodes_[id];
    if (n.grad->empty() && !n.value->empty())
        *n.grad = Matrix<T>(n.value->rows(), n.value->cols());
    return *n.grad;
}

template <typename T>
void Tape<T>::backward(Var<T> loss) {
    const Matrix<T>& lv = value(loss.id);
    if (lv.rows() != 1 || lv.cols() != 1)
        throw NotScalar("backward needs a 1x1 loss, got " + shape_string(lv.shape()));
    if (!nodes_[loss.id].requires_grad) return;
    for (auto& n : nodes_)
        if (!n.leaf) n.own_grad = Matrix<T>();
    grad_buffer(loss.id)[0] += T(1);
    for (std::size_t i = loss.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.requires_grad || !n.backward || n.grad->empty()) continue;
        n.backward(*this, i);
    }
}

template class Matrix<float>;
template class Matrix<double>;
template class Tape<float>;
template class Tape<double>;

} // namespace editsum::nn
