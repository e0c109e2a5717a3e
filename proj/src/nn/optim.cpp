#include "editsum/error.hpp"
#include "editsum/nn.hpp"

#include <cmath>

namespace editsum::nn {

template <typename T>
void glorot_uniform(Matrix<T>& m, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    uniform_fill(m, static_cast<T>(bound), rng);
}

template <typename T>
void uniform_fill(Matrix<T>& m, T bound, Rng& rng) {
    std::uniform_real_distribution<double> dist(-static_cast<double>(bound),
                                                static_cast<double>(bound));
    for (auto& x : m.values()) x = static_cast<T>(dist(rng));
}

template <typename T>
double grad_norm(std::span<Parameter<T>* const> params) {
    double sq = 0.0;
    for (const auto* p : params)
        for (T g : p->grad.values()) sq += static_cast<double>(g) * static_cast<double>(g);
    return std::sqrt(sq);
}

template <typename T>
double clip_grad_norm(std::span<Parameter<T>* const> params, double max_norm) {
    const double norm = grad_norm(params);
    if (norm > max_norm) {
        const double scale = max_norm / norm;
        for (auto* p : params)
            for (auto& g : p->grad.values()) g = static_cast<T>(static_cast<double>(g) * scale);
    }
    return norm;
}

template <typename T>
Adam<T>::Adam(std::span<Parameter<T>* const> params, AdamHyper hyper) : hyper_(hyper) {
    for (const auto* p : params) {
        m_.emplace_back(p->value.rows(), p->value.cols());
        v_.emplace_back(p->value.rows(), p->value.cols());
    }
}

template <typename T>
void Adam<T>::step(std::span<Parameter<T>* const> params) {
    if (params.size() != m_.size())
        throw ShapeMismatch("adam: state tracks " + std::to_string(m_.size()) +
                            " parameters, got " + std::to_string(params.size()));
    ++step_;
    const double b1 = hyper_.beta1, b2 = hyper_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
    const double lr = hyper_.learning_rate, eps = hyper_.epsilon;
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto& value = params[k]->value;
        const auto& grad = params[k]->grad;
        auto& m = m_[k];
        auto& v = v_[k];
        if (value.shape() != m.shape())
            throw ShapeMismatch("adam: moment " + shape_string(m.shape()) + " for parameter " +
                                shape_string(value.shape()));
        for (std::size_t i = 0; i < value.size(); ++i) {
            const double g = static_cast<double>(grad[i]);
            const double mi = b1 * static_cast<double>(m[i]) + (1.0 - b1) * g;
            const double vi = b2 * static_cast<double>(v[i]) + (1.0 - b2) * g * g;
            m[i] = static_cast<T>(mi);
            v[i] = static_cast<T>(vi);
            const double update = lr * (mi / c1) / (std::sqrt(vi / c2) + eps);
            value[i] = static_cast<T>(static_cast<double>(value[i]) - update);
        }
    }
}

#define EDITSUM_INSTANTIATE_OPTIM(T)                                                           \
    template void glorot_uniform(Matrix<T>&, Rng&);                                            \
    template void uniform_fill(Matrix<T>&, T, Rng&);                                           \
    template double grad_norm(std::span<Parameter<T>* const>);                                 \
    template double clip_grad_norm(std::span<Parameter<T>* const>, double);                    \
    template class Adam<T>;

EDITSUM_INSTANTIATE_OPTIM(float)
EDITSUM_INSTANTIATE_OPTIM(double)

#undef EDITSUM_INSTANTIATE_OPTIM

} // namespace editsum::nn
