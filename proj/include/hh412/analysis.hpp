#pragma once

#include "hh412/linalg.hpp"
#include "hh412/noise.hpp"
#include "hh412/tracer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace hh412 {

struct fit_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DecayPoint {
    double rounds = 0;
    double p_fail = 0;
    double stderr_p = 0;
};

// Logical-error decay fit. The model's initialization and final-measurement
// factors enter only through their product, so eps_i and eps_m are not
// separately identifiable; following the published fit tables, eps_m is tied
// to eps and the fit has two free parameters.
struct DecayFit {
    double eps_i = 0;
    double eps_m = 0;
    double eps = 0;
    std::array<std::array<double, 3>, 3> covariance{};
    std::vector<DecayPoint> points;

    double model(double r) const {
        return 0.5 - 0.5 * (1 - 2 * eps_i) * (1 - 2 * eps_m) * std::exp(-2 * eps * r);
    }
};

inline DecayFit fit_decay(const std::vector<DecayPoint>& points) {
    std::vector<double> distinct;
    for (const auto& p : points)
        if (std::find(distinct.begin(), distinct.end(), p.rounds) == distinct.end())
            distinct.push_back(p.rounds);
    if (distinct.size() < 3) throw fit_error("fit_decay: need at least 3 distinct round counts");
    bool any_below_half = false;
    for (const auto& p : points) any_below_half = any_below_half || p.p_fail < 0.5;
    if (!any_below_half) throw fit_error("fit_decay: degenerate data (all p_fail >= 1/2)");

    double max_w = 1.0;
    for (const auto& p : points)
        if (p.stderr_p > 0) max_w = std::max(max_w, 1.0 / (p.stderr_p * p.stderr_p));
    auto weight = [&](const DecayPoint& p) {
        return p.stderr_p > 0 ? 1.0 / (p.stderr_p * p.stderr_p) : max_w;
    };

    // Init: log-linear regression of ln(1 - 2 p_fail).
    double sw = 0, sr = 0, sy = 0, srr = 0, sry = 0;
    for (const auto& p : points) {
        if (p.p_fail >= 0.5) continue;
        const double y = std::log(std::max(1e-12, 1.0 - 2.0 * p.p_fail));
        const double w = weight(p);
        sw += w;
        sr += w * p.rounds;
        sy += w * y;
        srr += w * p.rounds * p.rounds;
        sry += w * p.rounds * y;
    }
    const double det = sw * srr - sr * sr;
    double slope = 0, intercept = 0;
    if (std::abs(det) > 1e-30) {
        slope = (sw * sry - sr * sy) / det;
        intercept = (srr * sy - sr * sry) / det;
    } else {
        intercept = sy / std::max(sw, 1e-30);
    }
    double eps = std::clamp(-slope / 2.0, 0.0, 0.49);
    const double prod = std::clamp(std::exp(intercept), 1e-9, 1.0);
    double eps_i = std::clamp(0.5 * (1.0 - prod / std::max(1e-9, 1.0 - 2.0 * eps)), 0.0, 0.49);

    // Damped Gauss-Newton on (eps_i, eps), box [0, 1/2).
    auto residual2 = [&](double ei, double e) {
        double s = 0;
        for (const auto& p : points) {
            const double m = 0.5 - 0.5 * (1 - 2 * ei) * (1 - 2 * e) * std::exp(-2 * e * p.rounds);
            s += weight(p) * (m - p.p_fail) * (m - p.p_fail);
        }
        return s;
    };
    double best = residual2(eps_i, eps);
    double lambda = 1e-6;
    for (int iter = 0; iter < 200; ++iter) {
        double jtj[4] = {0, 0, 0, 0}, jtr[2] = {0, 0};
        for (const auto& p : points) {
            const double A = 1 - 2 * eps_i, B = 1 - 2 * eps, E = std::exp(-2 * eps * p.rounds);
            const double m = 0.5 - 0.5 * A * B * E;
            const double ji = B * E;                      // d m / d eps_i
            const double je = A * E * (1 + p.rounds * B);  // d m / d eps
            const double w = weight(p), r = m - p.p_fail;
            jtj[0] += w * ji * ji;
            jtj[1] += w * ji * je;
            jtj[3] += w * je * je;
            jtr[0] += w * ji * r;
            jtr[1] += w * je * r;
        }
        jtj[2] = jtj[1];
        bool improved = false;
        for (int tries = 0; tries < 10 && !improved; ++tries) {
            const double a = jtj[0] + lambda, b = jtj[1], c = jtj[2], d = jtj[3] + lambda;
            const double dd = a * d - b * c;
            if (std::abs(dd) < 1e-300) {
                lambda *= 10;
                continue;
            }
            const double di = (-d * jtr[0] + b * jtr[1]) / dd;
            const double de = (c * jtr[0] - a * jtr[1]) / dd;
            const double ni = std::clamp(eps_i + di, 0.0, 0.5 - 1e-9);
            const double ne = std::clamp(eps + de, 0.0, 0.5 - 1e-9);
            const double r2 = residual2(ni, ne);
            if (r2 < best) {
                best = r2;
                eps_i = ni;
                eps = ne;
                lambda = std::max(lambda / 3, 1e-12);
                improved = true;
            } else {
                lambda *= 10;
            }
        }
        if (!improved || best < 1e-28) break;
    }

    DecayFit fit;
    fit.eps_i = eps_i;
    fit.eps = fit.eps_m = eps;
    fit.points = points;
    // Covariance of (eps_i, eps) from the weighted normal matrix; the eps_m
    // row/column mirrors eps.
    double jtj[4] = {0, 0, 0, 0};
    for (const auto& p : points) {
        const double A = 1 - 2 * eps_i, B = 1 - 2 * eps, E = std::exp(-2 * eps * p.rounds);
        const double ji = B * E, je = A * E * (1 + p.rounds * B), w = weight(p);
        jtj[0] += w * ji * ji;
        jtj[1] += w * ji * je;
        jtj[3] += w * je * je;
    }
    const double dd = jtj[0] * jtj[3] - jtj[1] * jtj[1];
    if (std::abs(dd) > 1e-300) {
        const double cii = jtj[3] / dd, cie = -jtj[1] / dd, cee = jtj[0] / dd;
        fit.covariance = {{{cii, cie, cie}, {cie, cee, cee}, {cie, cee, cee}}};
    }
    return fit;
}

// ---- six-parameter noise model refit ------------------------------------------

struct NoiseFitRow {
    std::uint64_t event_mask = 0;
    double measured = 0;
    double model = 0;
};

struct NoiseFit {
    NoiseParams params;
    double residual = 0;
    bool converged = true;
    std::vector<NoiseFitRow> per_hyperedge;  // sorted descending by fitted model alpha
};

namespace detail {

inline int channel_index(Channel c) {
    switch (c) {
        case Channel::Depolarize1: return 0;
        case Channel::IdleDepolarize: return 1;
        case Channel::BitFlipInit: return 2;
        case Channel::MeasFlip: return 3;
        case Channel::ResetFlip: return 4;
        case Channel::Depolarize2: return 5;
    }
    return -1;
}

inline double channel_split(Channel c) {
    switch (c) {
        case Channel::Depolarize1:
        case Channel::IdleDepolarize: return 3.0;
        case Channel::Depolarize2: return 15.0;
        default: return 1.0;
    }
}

}  // namespace detail

// First-order analytical alpha as a linear map of the six parameters: each
// hyperedge's coefficient on channel j counts its sources at that channel,
// weighted by the uniform depolarizing split. Least squares with
// nonnegativity by active-set clamping.
inline NoiseFit fit_noise_model(const std::map<std::uint64_t, double>& calibrated,
                                const std::vector<Hyperedge>& hyperedges,
                                const std::vector<FaultLocation>& locations) {
    std::vector<std::array<double, 6>> design;
    std::vector<double> target;
    std::vector<std::uint64_t> masks;
    for (const auto& h : hyperedges) {
        if (h.size() == 0) continue;
        auto it = calibrated.find(h.event_mask);
        if (it == calibrated.end()) continue;
        std::array<double, 6> row{};
        for (const auto& src : h.sources) {
            const Channel c = locations[src.location].channel;
            row[detail::channel_index(c)] += 1.0 / detail::channel_split(c);
        }
        design.push_back(row);
        target.push_back(it->second);
        masks.push_back(h.event_mask);
    }
    if (design.empty()) throw fit_error("fit_noise_model: no overlapping hyperedges");

    std::array<bool, 6> fixed{};
    std::array<double, 6> params{};
    for (int pass = 0; pass < 7; ++pass) {
        std::vector<int> free;
        for (int j = 0; j < 6; ++j)
            if (!fixed[j]) free.push_back(j);
        if (free.empty()) break;
        const int n = static_cast<int>(free.size());
        std::vector<double> ata(std::size_t(n) * n, 0.0), atb(n, 0.0);
        for (std::size_t r = 0; r < design.size(); ++r) {
            for (int a = 0; a < n; ++a) {
                atb[a] += design[r][free[a]] * target[r];
                for (int b = 0; b < n; ++b) ata[a * n + b] += design[r][free[a]] * design[r][free[b]];
            }
        }
        std::vector<double> sol;
        try {
            sol = solve_linear_system(ata, atb);
        } catch (const std::runtime_error&) {
            throw fit_error("fit_noise_model: singular normal equations");
        }
        int worst = -1;
        double worst_val = 0;
        for (int a = 0; a < n; ++a) {
            params[free[a]] = sol[a];
            if (sol[a] < worst_val) {
                worst_val = sol[a];
                worst = free[a];
            }
        }
        if (worst < 0) break;
        fixed[worst] = true;
        params[worst] = 0;
    }

    NoiseFit fit;
    fit.params.p1 = params[0];
    fit.params.pw = params[1];
    fit.params.pi = params[2];
    fit.params.pm = params[3];
    fit.params.pr = params[4];
    fit.params.p2 = params[5];
    double r2 = 0;
    for (std::size_t r = 0; r < design.size(); ++r) {
        double model = 0;
        for (int j = 0; j < 6; ++j) model += design[r][j] * params[j];
        fit.per_hyperedge.push_back({masks[r], target[r], model});
        r2 += (model - target[r]) * (model - target[r]);
    }
    fit.residual = std::sqrt(r2);
    std::sort(fit.per_hyperedge.begin(), fit.per_hyperedge.end(),
              [](const NoiseFitRow& a, const NoiseFitRow& b) {
                  if (a.model != b.model) return a.model > b.model;
                  return a.event_mask < b.event_mask;
              });
    return fit;
}

// ---- correlation-vs-analytical distance -----------------------------------------

inline std::map<std::uint64_t, double> analytical_probabilities(
    const std::vector<Hyperedge>& hyperedges) {
    std::map<std::uint64_t, double> out;
    for (const auto& h : hyperedges)
        if (h.event_mask) out[h.event_mask] = h.probability;
    return out;
}

// Delta = sum over H of |alpha_a - alpha_b|; both maps must cover the same H.
inline double delta_metric(const std::map<std::uint64_t, double>& a,
                           const std::map<std::uint64_t, double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("delta_metric: hyperedge sets differ");
    double d = 0;
    for (const auto& [mask, va] : a) {
        auto it = b.find(mask);
        if (it == b.end()) throw std::invalid_argument("delta_metric: hyperedge sets differ");
        d += std::abs(va - it->second);
    }
    return d;
}

// Least-squares slope of log(delta) against log(N).
inline double log_log_slope(const std::vector<std::pair<double, double>>& points) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(points.size());
    for (const auto& [x, y] : points) {
        const double lx = std::log(x), ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace hh412
