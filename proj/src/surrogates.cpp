#include "qslr/surrogates.hpp"

#include <cmath>

#include "qslr/errors.hpp"
#include "qslr/kernels.hpp"

namespace qslr {

SurrogateKind surrogate_kind_from_string(const std::string& s) {
    if (s == "nuclear") return SurrogateKind::Nuclear;
    if (s == "logdet") return SurrogateKind::LogDet;
    if (s == "schatten") return SurrogateKind::SchattenGamma;
    if (s == "logarithm") return SurrogateKind::Logarithm;
    if (s == "laplace") return SurrogateKind::Laplace;
    if (s == "weighted-schatten") return SurrogateKind::WeightedSchattenGamma;
    if (s == "etp") return SurrogateKind::Etp;
    throw ConfigError("unknown surrogate kind: " + s);
}

std::string to_string(SurrogateKind k) {
    switch (k) {
        case SurrogateKind::Nuclear: return "nuclear";
        case SurrogateKind::LogDet: return "logdet";
        case SurrogateKind::SchattenGamma: return "schatten";
        case SurrogateKind::Logarithm: return "logarithm";
        case SurrogateKind::Laplace: return "laplace";
        case SurrogateKind::WeightedSchattenGamma: return "weighted-schatten";
        case SurrogateKind::Etp: return "etp";
    }
    return "?";
}

void SurrogateSpec::validate() const {
    if (epsilon < 0.0) throw ConfigError("surrogate: epsilon must be >= 0");
    switch (kind) {
        case SurrogateKind::Nuclear:
            break;
        case SurrogateKind::SchattenGamma:
        case SurrogateKind::WeightedSchattenGamma:
            if (gamma <= 0.0 || gamma > 1.0)
                throw ConfigError("surrogate: Schatten gamma must lie in (0,1]");
            break;
        default:
            if (gamma <= 0.0) throw ConfigError("surrogate: gamma must be > 0");
            break;
    }
    if (is_weighted()) {
        if (weights.empty() && adaptive_weight_scale <= 0.0)
            throw ConfigError(
                "weighted-schatten surrogate needs weights or an adaptive rule");
        for (double w : weights)
            if (w < 0.0) throw ConfigError("surrogate: weights must be >= 0");
    }
}

namespace {

double weight_for(std::size_t i, const SurrogateSpec& spec) {
    if (i >= spec.weights.size())
        throw ConfigError("weighted-schatten surrogate: missing weight for index " +
                          std::to_string(i));
    return spec.weights[i];
}

} // namespace

double phi_at(std::size_t i, double x, const SurrogateSpec& spec) {
    switch (spec.kind) {
        case SurrogateKind::Nuclear:
            return x;
        case SurrogateKind::LogDet:
            return std::log(1.0 + x * x);
        case SurrogateKind::SchattenGamma:
            return std::pow(x, spec.gamma);
        case SurrogateKind::Logarithm:
            return std::log(spec.gamma + x);
        case SurrogateKind::Laplace:
            return 1.0 - std::exp(-x / spec.gamma);
        case SurrogateKind::WeightedSchattenGamma:
            return weight_for(i, spec) * std::pow(x, spec.gamma);
        case SurrogateKind::Etp:
            return spec.etp_scale * (1.0 - std::exp(-spec.gamma * x)) /
                   (1.0 - std::exp(-spec.gamma));
    }
    throw ConfigError("phi: bad kind");
}

double phi(double x, const SurrogateSpec& spec) {
    if (spec.is_weighted())
        throw ConfigError("phi: weighted surrogate requires phi_at(i, x, spec)");
    return phi_at(0, x, spec);
}

double dphi_at(std::size_t i, double x, const SurrogateSpec& spec) {
    switch (spec.kind) {
        case SurrogateKind::Nuclear:
            return 1.0;
        case SurrogateKind::LogDet:
            return 2.0 * x / (1.0 + x * x);
        case SurrogateKind::SchattenGamma:
        case SurrogateKind::WeightedSchattenGamma: {
            const double w = spec.kind == SurrogateKind::WeightedSchattenGamma
                                 ? weight_for(i, spec)
                                 : 1.0;
            if (spec.gamma < 1.0 && x == 0.0)
                throw DomainError(
                    "dphi: Schatten derivative is singular at 0; use epsilon > 0");
            if (spec.gamma == 1.0) return w;
            return w * spec.gamma * std::pow(x, spec.gamma - 1.0);
        }
        case SurrogateKind::Logarithm:
            return 1.0 / (spec.gamma + x);
        case SurrogateKind::Laplace:
            return std::exp(-x / spec.gamma) / spec.gamma;
        case SurrogateKind::Etp:
            return spec.etp_scale * spec.gamma * std::exp(-spec.gamma * x) /
                   (1.0 - std::exp(-spec.gamma));
    }
    throw ConfigError("dphi: bad kind");
}

double dphi(double x, const SurrogateSpec& spec) {
    if (spec.is_weighted())
        throw ConfigError("dphi: weighted surrogate requires dphi_at(i, x, spec)");
    return dphi_at(0, x, spec);
}

double dphi_smoothed_at(std::size_t i, double s, const SurrogateSpec& spec) {
    const double h = std::sqrt(s * s + spec.epsilon * spec.epsilon);
    if (h == 0.0) {
        // eps = 0 and s = 0: right derivative of phi(|s|) on [0, inf).
        return dphi_at(i, 0.0, spec);
    }
    return dphi_at(i, h, spec) * (s / h);
}

double spectral_penalty(std::span<const double> sigma, const SurrogateSpec& spec) {
    double total = 0.0;
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        const double h =
            std::sqrt(sigma[i] * sigma[i] + spec.epsilon * spec.epsilon);
        total += phi_at(i, h, spec);
    }
    return total;
}

bool surrogate_coercive(SurrogateKind k) {
    return k != SurrogateKind::Laplace && k != SurrogateKind::Etp;
}

void HuberSpec::validate() const {
    if (delta <= 0.0) throw ConfigError("huber: delta must be > 0");
    if (lambda < 0.0) throw ConfigError("huber: lambda must be >= 0");
}

double huber(const QMatrix& W, const HuberSpec& spec) {
    const double* planes[4] = {W.plane(0), W.plane(1), W.plane(2), W.plane(3)};
    double* grads[4] = {nullptr, nullptr, nullptr, nullptr};
    return kernels::huber(planes, grads, W.plane_size(), spec.delta);
}

double huber_value_grad(const QMatrix& W, const HuberSpec& spec, QMatrix& grad) {
    if (!grad.same_shape(W)) grad = QMatrix(W.rows(), W.cols());
    const double* planes[4] = {W.plane(0), W.plane(1), W.plane(2), W.plane(3)};
    double* grads[4] = {grad.plane(0), grad.plane(1), grad.plane(2),
                        grad.plane(3)};
    return kernels::huber(planes, grads, W.plane_size(), spec.delta);
}

QMatrix huber_grad(const QMatrix& W, const HuberSpec& spec) {
    QMatrix grad(W.rows(), W.cols());
    huber_value_grad(W, spec, grad);
    return grad;
}

} // namespace qslr
