#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qdep/errors.hpp"
#include "qdep/ranks.hpp"
#include "qdep/rng.hpp"

namespace qdep {

// =========================================================================
// Simulation models. Identifiers follow the benchmark naming: simple
// regressions (sr), heteroscedastic regressions (hr), random-effect models
// (re), classical bivariate laws (bm), plus the independence null.
// =========================================================================

enum class ModelId {
    Null,
    SR1, SR2, SR3, SR4, SR5,
    HR1, HR2,
    RE1, RE2, RE3, RE4,
    BM1, BM2, BM3, BM4, BM5, BM6, BM7, BM8, BM9, BM10, BM11,
};

struct ModelSpec {
    ModelId id = ModelId::Null;

    // Family parameters with the benchmark defaults baked in; only the
    // families below consult them.
    double theta = 0.0;  // BM5 Mardia / BM6 Gumbel exponential / BM7 Clayton
    double rho = 0.0;    // BM1 Gaussian correlation / BM11 base correlation
    double alpha = 0.0;  // BM11 stable index

    static ModelSpec make(ModelId id) {
        ModelSpec m;
        m.id = id;
        switch (id) {
            case ModelId::BM1:  m.rho = 0.3; break;
            case ModelId::BM5:  m.theta = -0.55; break;
            case ModelId::BM6:  m.theta = 0.5; break;
            case ModelId::BM7:  m.theta = 0.5; break;
            case ModelId::BM11: m.rho = 0.1; m.alpha = 1.5; break;
            default: break;
        }
        return m;
    }
};

inline const std::array<std::pair<const char*, ModelId>, 23>& model_name_table() {
    static const std::array<std::pair<const char*, ModelId>, 23> table{{
        {"null", ModelId::Null},
        {"sr1", ModelId::SR1}, {"sr2", ModelId::SR2}, {"sr3", ModelId::SR3},
        {"sr4", ModelId::SR4}, {"sr5", ModelId::SR5},
        {"hr1", ModelId::HR1}, {"hr2", ModelId::HR2},
        {"re1", ModelId::RE1}, {"re2", ModelId::RE2}, {"re3", ModelId::RE3},
        {"re4", ModelId::RE4},
        {"bm1", ModelId::BM1}, {"bm2", ModelId::BM2}, {"bm3", ModelId::BM3},
        {"bm4", ModelId::BM4}, {"bm5", ModelId::BM5}, {"bm6", ModelId::BM6},
        {"bm7", ModelId::BM7}, {"bm8", ModelId::BM8}, {"bm9", ModelId::BM9},
        {"bm10", ModelId::BM10}, {"bm11", ModelId::BM11},
    }};
    return table;
}

inline ModelSpec model_from_string(const std::string& name) {
    for (const auto& [key, id] : model_name_table())
        if (name == key) return ModelSpec::make(id);
    throw UnknownModel("unknown model id: " + name);
}

inline std::string to_string(ModelId id) {
    for (const auto& [key, tid] : model_name_table())
        if (tid == id) return key;
    return "?";
}

// Mixture weights of the Mardia copula: comonotone, independence and
// countermonotone components. Nonnegative and summing to one for |theta|<=1.
struct MardiaWeights {
    double comonotone = 0.0;
    double independence = 1.0;
    double countermonotone = 0.0;
};

inline MardiaWeights mardia_mixture_weights(double theta) {
    if (!(theta >= -1.0 && theta <= 1.0))
        throw InvalidParameter("Mardia theta must lie in [-1,1]");
    MardiaWeights w;
    w.comonotone = theta * theta * (1.0 + theta) / 2.0;
    w.independence = 1.0 - theta * theta;
    w.countermonotone = theta * theta * (1.0 - theta) / 2.0;
    return w;
}

namespace detail {

struct Drawn {
    double x;
    double y;
};

inline Drawn gaussian_pair(Rng& rng, double rho) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    return {z1, rho * z1 + std::sqrt(1.0 - rho * rho) * z2};
}

// Elliptical bivariate t with identity correlation: Z / sqrt(chi2_nu / nu).
inline Drawn student_pair(Rng& rng, int nu) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    const double scale = std::sqrt(rng.chi_squared(nu) / static_cast<double>(nu));
    return {z1 / scale, z2 / scale};
}

// Conditional draw of the Gumbel bivariate exponential: given X = x, the
// conditional cdf of Y is F(y|x) = 1 - (1 + theta y) exp(-(1 + theta x) y),
// inverted by bisection to 1e-12.
inline double gumbel_exponential_conditional(double x, double theta, double w) {
    const auto cdf = [&](double y) {
        return 1.0 - (1.0 + theta * y) * std::exp(-(1.0 + theta * x) * y);
    };
    double lo = 0.0, hi = 1.0;
    while (cdf(hi) < w) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < w ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Clayton pair by conditional inversion (closed form).
inline Drawn clayton_pair(Rng& rng, double theta) {
    const double u = rng.uniform();
    const double w = rng.uniform();
    const double v = std::pow(
        (std::pow(w, -theta / (1.0 + theta)) - 1.0) * std::pow(u, -theta) + 1.0,
        -1.0 / theta);
    return {u, v};
}

// Skew-t pair (Azzalini-Capitanio): skew-normal base via the conditioning
// representation, divided by sqrt(chi2_nu / nu). Base correlation omega,
// skewness vector (a1, a2).
struct SkewT {
    double l21, l22, l31, l32, l33;  // Cholesky rows of the augmented matrix
    int nu;

    SkewT(double omega, double a1, double a2, int nu_) : nu(nu_) {
        const double oa1 = a1 + omega * a2;
        const double oa2 = omega * a1 + a2;
        const double norm = std::sqrt(1.0 + a1 * oa1 + a2 * oa2);
        const double d1 = oa1 / norm;
        const double d2 = oa2 / norm;
        // Augmented correlation matrix [[1, d1, d2], [d1, 1, omega], [d2, omega, 1]].
        l21 = d1;
        l22 = std::sqrt(1.0 - d1 * d1);
        l31 = d2;
        l32 = (omega - d1 * d2) / l22;
        l33 = std::sqrt(1.0 - l31 * l31 - l32 * l32);
    }

    Drawn draw(Rng& rng) const {
        const double z0 = rng.normal();
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        double x1 = l21 * z0 + l22 * z1;
        double x2 = l31 * z0 + l32 * z1 + l33 * z2;
        if (z0 <= 0.0) {
            x1 = -x1;
            x2 = -x2;
        }
        const double scale = std::sqrt(rng.chi_squared(nu) / static_cast<double>(nu));
        return {x1 / scale, x2 / scale};
    }
};

// Sub-Gaussian alpha-stable pair: X = sqrt(A) G with A a totally skewed
// positive stable(alpha/2) subordinator scaled by cos(pi alpha/4)^(2/alpha)
// and G bivariate normal with the given correlation.
inline Drawn sub_gaussian_stable_pair(Rng& rng, double rho, double alpha) {
    constexpr double kPi = 3.14159265358979323846;
    const double scale = std::pow(std::cos(kPi * alpha / 4.0), 2.0 / alpha);
    const double a = scale * rng.positive_stable(alpha / 2.0);
    const Drawn g = gaussian_pair(rng, rho);
    const double root = std::sqrt(a);
    return {root * g.x, root * g.y};
}

}  // namespace detail

// Draws n i.i.d. observations from the model; pure function of
// (spec, n, seed).
inline Sample sample(const ModelSpec& spec, int n, std::uint64_t seed) {
    if (n < 1) throw InvalidParameter("sample size must be >= 1");
    Rng rng = Rng::stream(seed, stream_tag::kModelSample);

    Sample out;
    out.x.reserve(static_cast<std::size_t>(n));
    out.y.reserve(static_cast<std::size_t>(n));

    switch (spec.id) {
        case ModelId::BM5:
            if (!(spec.theta >= -1.0 && spec.theta <= 1.0))
                throw InvalidParameter("Mardia theta must lie in [-1,1]");
            break;
        case ModelId::BM6:
            if (!(spec.theta >= 0.0 && spec.theta <= 1.0))
                throw InvalidParameter("Gumbel exponential theta must lie in [0,1]");
            break;
        case ModelId::BM7:
            if (!(spec.theta > 0.0)) throw InvalidParameter("Clayton theta must be > 0");
            break;
        case ModelId::BM1:
        case ModelId::BM11:
            if (!(spec.rho > -1.0 && spec.rho < 1.0))
                throw InvalidParameter("correlation must lie in (-1,1)");
            if (spec.id == ModelId::BM11 && !(spec.alpha > 0.0 && spec.alpha < 2.0))
                throw InvalidParameter("stable index must lie in (0,2)");
            break;
        default:
            break;
    }

    const MardiaWeights mw = spec.id == ModelId::BM5
                                 ? mardia_mixture_weights(spec.theta)
                                 : MardiaWeights{};
    const detail::SkewT skew_t(-0.7, 0.3, 0.7, 5);

    for (int k = 0; k < n; ++k) {
        double x = 0.0, y = 0.0;
        switch (spec.id) {
            case ModelId::Null: {
                x = rng.uniform();
                y = rng.uniform();
                break;
            }
            case ModelId::SR1: {
                x = rng.uniform();
                y = 2.0 + x + rng.normal();
                break;
            }
            case ModelId::SR2: {
                x = rng.uniform();
                y = std::pow(x, 0.25) + std::sqrt(0.25) * rng.normal();
                break;
            }
            case ModelId::SR3: {
                x = rng.uniform();
                y = (x <= 0.5 ? 1.0 : 0.0) + std::sqrt(2.0) * rng.normal();
                break;
            }
            case ModelId::SR4: {
                x = rng.normal();
                y = std::log(1.0 + std::fabs(x)) + rng.normal();
                break;
            }
            case ModelId::SR5: {
                x = rng.uniform();
                const double t = (2.0 * x - 1.0) * (2.0 * x - 1.0) - 0.5;
                y = 4.0 * t * t + std::sqrt(0.5) * rng.normal();
                break;
            }
            case ModelId::HR1: {
                x = rng.exponential(0.1);
                y = std::sqrt(1.0 + 1.0 / (x * x)) * rng.normal();
                break;
            }
            case ModelId::HR2: {
                x = 1.0 + 15.0 * rng.uniform();
                y = std::sqrt(x) * rng.normal();
                break;
            }
            case ModelId::RE1: {
                x = rng.uniform();
                y = 2.0 + x + 2.0 * rng.normal() * x + rng.normal();
                break;
            }
            case ModelId::RE2: {
                x = rng.uniform();
                y = rng.normal() * (2.0 + x + x * x) + rng.normal();
                break;
            }
            case ModelId::RE3: {
                x = rng.uniform();
                y = rng.normal() / x + rng.normal();
                break;
            }
            case ModelId::RE4: {
                const detail::Drawn c = detail::student_pair(rng, 1);
                x = c.x;
                y = rng.normal() * c.y + rng.normal();
                break;
            }
            case ModelId::BM1: {
                const detail::Drawn g = detail::gaussian_pair(rng, spec.rho);
                x = g.x;
                y = g.y;
                break;
            }
            case ModelId::BM2: {
                // Variances 6, covariance 5 in the wide component.
                if (rng.uniform() < 0.1) {
                    const detail::Drawn g = detail::gaussian_pair(rng, 0.0);
                    x = g.x;
                    y = g.y;
                } else {
                    const detail::Drawn g = detail::gaussian_pair(rng, 5.0 / 6.0);
                    x = std::sqrt(6.0) * g.x;
                    y = std::sqrt(6.0) * g.y;
                }
                break;
            }
            case ModelId::BM3: {
                if (rng.uniform() < 0.3) {
                    const detail::Drawn c = detail::student_pair(rng, 1);
                    x = c.x;
                    y = c.y;
                } else {
                    const detail::Drawn g = detail::gaussian_pair(rng, 0.0);
                    x = g.x;
                    y = g.y;
                }
                break;
            }
            case ModelId::BM4: {
                x = rng.normal();
                y = (std::fabs(x) > 1.96 ? -x : 0.0) + rng.normal();
                break;
            }
            case ModelId::BM5: {
                const double pick = rng.uniform();
                const double u = rng.uniform();
                if (pick < mw.comonotone) {
                    x = u;
                    y = u;
                } else if (pick < mw.comonotone + mw.independence) {
                    x = u;
                    y = rng.uniform();
                } else {
                    x = u;
                    y = 1.0 - u;
                }
                break;
            }
            case ModelId::BM6: {
                x = rng.exponential(1.0);
                y = detail::gumbel_exponential_conditional(x, spec.theta, rng.uniform());
                break;
            }
            case ModelId::BM7: {
                const detail::Drawn c = detail::clayton_pair(rng, spec.theta);
                x = c.x;
                y = c.y;
                break;
            }
            case ModelId::BM8: {
                const detail::Drawn c = detail::student_pair(rng, 1);
                x = c.x;
                y = c.y;
                break;
            }
            case ModelId::BM9: {
                const detail::Drawn c = detail::student_pair(rng, 2);
                x = c.x;
                y = c.y;
                break;
            }
            case ModelId::BM10: {
                const detail::Drawn c = skew_t.draw(rng);
                x = c.x;
                y = c.y;
                break;
            }
            case ModelId::BM11: {
                const detail::Drawn c =
                    detail::sub_gaussian_stable_pair(rng, spec.rho, spec.alpha);
                x = c.x;
                y = c.y;
                break;
            }
        }
        out.x.push_back(x);
        out.y.push_back(y);
    }
    return out;
}

// =========================================================================
// Closed-form copulas used as oracles for the grid estimator.
// =========================================================================

enum class CopulaFamily { Independence, Clayton, Mardia, FGM, GumbelExponential };

struct AnalyticCopula {
    CopulaFamily family = CopulaFamily::Independence;
    double theta = 0.0;

    double cdf(double u, double v) const {
        // Boundary values hold by definition for every copula.
        if (u <= 0.0 || v <= 0.0) return 0.0;
        if (u >= 1.0) return v;
        if (v >= 1.0) return u;
        switch (family) {
            case CopulaFamily::Independence:
                return u * v;
            case CopulaFamily::Clayton: {
                if (!(theta > 0.0)) throw InvalidParameter("Clayton theta must be > 0");
                return std::pow(std::pow(u, -theta) + std::pow(v, -theta) - 1.0,
                                -1.0 / theta);
            }
            case CopulaFamily::Mardia: {
                const MardiaWeights w = mardia_mixture_weights(theta);
                return w.comonotone * std::min(u, v) + w.independence * u * v +
                       w.countermonotone * std::max(u + v - 1.0, 0.0);
            }
            case CopulaFamily::FGM: {
                if (!(theta >= -1.0 && theta <= 1.0))
                    throw InvalidParameter("FGM theta must lie in [-1,1]");
                return u * v * (1.0 + theta * (1.0 - u) * (1.0 - v));
            }
            case CopulaFamily::GumbelExponential: {
                if (!(theta >= 0.0 && theta <= 1.0))
                    throw InvalidParameter("Gumbel exponential theta must lie in [0,1]");
                return u + v - 1.0 +
                       (1.0 - u) * (1.0 - v) *
                           std::exp(-theta * std::log(1.0 - u) * std::log(1.0 - v));
            }
        }
        return 0.0;
    }
};

// The weighted dependence function of an analytic copula.
inline double analytic_q(const AnalyticCopula& copula, double u, double v) {
    if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0))
        throw DomainError("analytic_q requires (u,v) in (0,1)^2");
    return (copula.cdf(u, v) - u * v) * weight(u, v);
}

}  // namespace qdep
