#pragma once

#include "hh412/linalg.hpp"
#include "hh412/rng.hpp"
#include "hh412/sim.hpp"
#include "hh412/tracer.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

namespace hh412 {

// ---- clustering --------------------------------------------------------------

inline std::vector<int> mask_to_events(std::uint64_t mask) {
    std::vector<int> out;
    while (mask) {
        out.push_back(std::countr_zero(mask));
        mask &= mask - 1;
    }
    return out;
}

// Greedy cover: hyperedges sorted by size (largest first, ties by event
// tuple) are kept as clusters unless already inside one. Every candidate
// hyperedge ends up a subset of some cluster; the largest cluster size equals
// the largest hyperedge size.
inline std::vector<std::uint64_t> cluster(const std::vector<Hyperedge>& hyperedges) {
    std::vector<std::uint64_t> masks;
    for (const auto& h : hyperedges)
        if (h.event_mask) masks.push_back(h.event_mask);
    std::sort(masks.begin(), masks.end(), [](std::uint64_t a, std::uint64_t b) {
        const int sa = std::popcount(a), sb = std::popcount(b);
        if (sa != sb) return sa > sb;
        return mask_to_events(a) < mask_to_events(b);
    });
    std::vector<std::uint64_t> clusters;
    for (std::uint64_t m : masks) {
        bool covered = false;
        for (std::uint64_t c : clusters)
            if ((m & ~c) == 0) {
                covered = true;
                break;
            }
        if (!covered) clusters.push_back(m);
    }
    return clusters;
}

// ---- moment accumulation -------------------------------------------------------

// AND-moments <h> = P[every event of h fired], held as per-cluster fired
// sub-pattern histograms (a cluster has at most 4 events, so 16 bins).
// Statistics from disjoint shot sets merge by addition.
struct EventStatistics {
    std::uint64_t n_shots = 0;
    std::vector<std::uint64_t> clusters;
    std::vector<std::array<std::uint64_t, 16>> pattern_counts;

    void add_events(std::uint64_t events) {
        ++n_shots;
        for (std::size_t c = 0; c < clusters.size(); ++c) {
            std::uint64_t m = clusters[c];
            unsigned pattern = 0, bit = 0;
            while (m) {
                const int e = std::countr_zero(m);
                m &= m - 1;
                pattern |= unsigned((events >> e) & 1) << bit;
                ++bit;
            }
            ++pattern_counts[c][pattern];
        }
    }

    void merge(const EventStatistics& other) {
        if (clusters != other.clusters)
            throw std::invalid_argument("EventStatistics::merge: cluster sets differ");
        n_shots += other.n_shots;
        for (std::size_t c = 0; c < clusters.size(); ++c)
            for (int p = 0; p < 16; ++p) pattern_counts[c][p] += other.pattern_counts[c][p];
    }

    // Count of shots with all events of `h` fired; h must sit inside a cluster.
    std::uint64_t count(std::uint64_t h) const {
        for (std::size_t c = 0; c < clusters.size(); ++c) {
            if (h & ~clusters[c]) continue;
            unsigned want = 0, bit = 0;
            std::uint64_t m = clusters[c];
            while (m) {
                const int e = std::countr_zero(m);
                m &= m - 1;
                if ((h >> e) & 1) want |= 1u << bit;
                ++bit;
            }
            std::uint64_t total = 0;
            for (unsigned p = 0; p < 16; ++p)
                if ((p & want) == want) total += pattern_counts[c][p];
            return total;
        }
        throw std::invalid_argument("EventStatistics::count: set not covered by any cluster");
    }

    double moment(std::uint64_t h) const {
        return n_shots ? double(count(h)) / double(n_shots) : 0.0;
    }
};

inline EventStatistics make_statistics(const std::vector<std::uint64_t>& clusters) {
    EventStatistics s;
    s.clusters = clusters;
    s.pattern_counts.assign(clusters.size(), {});
    return s;
}

inline EventStatistics accumulate(std::span<const ShotRecord> shots,
                                  const std::vector<Hyperedge>& hyperedges) {
    EventStatistics s = make_statistics(cluster(hyperedges));
    for (const auto& rec : shots) s.add_events(rec.events);
    return s;
}

// ---- cluster solving -----------------------------------------------------------

struct ClusterSolution {
    std::uint64_t cluster_mask = 0;
    std::vector<std::uint64_t> members;  // hyperedges inside the cluster
    std::vector<double> alphas;          // pre-adjustment estimates, aligned to members
    std::vector<double> alpha_se;        // propagated moment standard errors
    double residual = 0;
    bool converged = true;
    bool projected = false;  // moments fell outside the model's image
};

namespace detail {

// Model moments for the within-cluster system: for each member h,
// <h>_c = sum over fired subsets A of the members with h inside the symmetric
// difference of A, of prod alpha_a * prod (1-alpha_b). Also fills the
// Jacobian d<h>/d(alpha_g) when `jac` is non-null.
inline void cluster_model(const std::vector<std::uint64_t>& members,
                          const std::vector<double>& alpha, std::vector<double>& model,
                          std::vector<double>* jac) {
    const int n = static_cast<int>(members.size());
    model.assign(n, 0.0);
    if (jac) jac->assign(std::size_t(n) * n, 0.0);
    std::vector<double> factor(n), prefix(n + 1), suffix(n + 1);
    for (std::uint32_t fired = 0; fired < (1u << n); ++fired) {
        std::uint64_t diff = 0;
        for (int a = 0; a < n; ++a) {
            const bool in = (fired >> a) & 1;
            factor[a] = in ? alpha[a] : 1.0 - alpha[a];
            if (in) diff ^= members[a];
        }
        prefix[0] = 1.0;
        for (int a = 0; a < n; ++a) prefix[a + 1] = prefix[a] * factor[a];
        suffix[n] = 1.0;
        for (int a = n - 1; a >= 0; --a) suffix[a] = suffix[a + 1] * factor[a];
        const double w = prefix[n];
        for (int h = 0; h < n; ++h) {
            if (members[h] & ~diff) continue;
            model[h] += w;
            if (jac) {
                for (int g = 0; g < n; ++g) {
                    const double without = prefix[g] * suffix[g + 1];
                    (*jac)[h * n + g] += ((fired >> g) & 1) ? without : -without;
                }
            }
        }
    }
}

// Closed-form size-2 cluster {i, j} with all three members present.
// Solves m_i = x(1-z)+z(1-x), m_j likewise, m_ij = xy(1-z)+(1-x)(1-y)z.
inline bool solve_pair_closed_form(double mi, double mj, double mij, double& x, double& y,
                                   double& z, bool& projected) {
    const double num = 4.0 * (mij - mi * mj);
    const double den = 1.0 - 2.0 * mi - 2.0 * mj + 4.0 * mij;
    if (den <= 0) return false;
    double arg = 1.0 - num / den;
    if (arg < 0) {
        arg = 0;
        projected = true;
    }
    z = 0.5 - 0.5 * std::sqrt(arg);
    const double d = 1.0 - 2.0 * z;
    if (d <= 0) return false;
    x = (mi - z) / d;
    y = (mj - z) / d;
    return true;
}

}  // namespace detail

// Solves the within-cluster system for all candidate hyperedges inside `c`,
// treating them as the only hyperedges in existence. Size-2 clusters use the
// closed form when all three members are present; everything else runs a
// damped Gauss-Newton iteration projected onto the [0, 1/2] box.
inline ClusterSolution solve_cluster(std::uint64_t c, const EventStatistics& stats,
                                     const std::vector<Hyperedge>& hyperedges) {
    ClusterSolution sol;
    sol.cluster_mask = c;
    for (const auto& h : hyperedges)
        if (h.event_mask && (h.event_mask & ~c) == 0) sol.members.push_back(h.event_mask);
    std::sort(sol.members.begin(), sol.members.end(), [](std::uint64_t a, std::uint64_t b) {
        return mask_to_events(a) < mask_to_events(b);
    });
    const int n = static_cast<int>(sol.members.size());
    if (n == 0) return sol;
    if (n > 20) throw std::invalid_argument("solve_cluster: too many members");

    std::vector<double> m(n);
    for (int i = 0; i < n; ++i) m[i] = stats.moment(sol.members[i]);
    sol.alphas = m;  // initialization at the raw moments

    auto project = [&](std::vector<double>& a) {
        for (double& v : a) {
            if (v < 0) {
                v = 0;
                sol.projected = true;
            }
            if (v > 0.5) {
                v = 0.5;
                sol.projected = true;
            }
        }
    };

    bool closed_form_done = false;
    if (std::popcount(c) == 2 && n == 3) {
        int si = -1, sj = -1, pij = -1;
        for (int i = 0; i < n; ++i) {
            if (std::popcount(sol.members[i]) == 2) pij = i;
            else if (si < 0) si = i;
            else sj = i;
        }
        double x, y, z;
        if (pij >= 0 && sj >= 0 &&
            detail::solve_pair_closed_form(m[si], m[sj], m[pij], x, y, z, sol.projected)) {
            sol.alphas[si] = x;
            sol.alphas[sj] = y;
            sol.alphas[pij] = z;
            project(sol.alphas);
            closed_form_done = true;
        }
    }
    if (n == 1) {
        sol.alphas = {m[0]};
        project(sol.alphas);
        closed_form_done = true;
    }

    std::vector<double> model, jac;
    if (!closed_form_done) {
        project(sol.alphas);
        std::vector<double> alpha = sol.alphas;
        double lambda = 1e-3;
        detail::cluster_model(sol.members, alpha, model, &jac);
        auto res_norm2 = [&](const std::vector<double>& mod) {
            double s = 0;
            for (int i = 0; i < n; ++i) s += (mod[i] - m[i]) * (mod[i] - m[i]);
            return s;
        };
        double best = res_norm2(model);
        for (int iter = 0; iter < 200 && best > 1e-20; ++iter) {
            // (J^T J + lambda I) delta = -J^T r
            std::vector<double> jtj(std::size_t(n) * n, 0.0), jtr(n, 0.0);
            for (int i = 0; i < n; ++i) {
                const double r = model[i] - m[i];
                for (int g = 0; g < n; ++g) {
                    jtr[g] += jac[i * n + g] * r;
                    for (int h = 0; h <= g; ++h) jtj[g * n + h] += jac[i * n + g] * jac[i * n + h];
                }
            }
            for (int g = 0; g < n; ++g)
                for (int h = g + 1; h < n; ++h) jtj[g * n + h] = jtj[h * n + g];
            bool improved = false;
            for (int tries = 0; tries < 12 && !improved; ++tries) {
                std::vector<double> a = jtj;
                for (int g = 0; g < n; ++g) a[g * n + g] += lambda;
                std::vector<double> rhs(n);
                for (int g = 0; g < n; ++g) rhs[g] = -jtr[g];
                std::vector<double> delta;
                try {
                    delta = solve_linear_system(a, rhs);
                } catch (const std::runtime_error&) {
                    lambda *= 10;
                    continue;
                }
                std::vector<double> trial = alpha;
                for (int g = 0; g < n; ++g) trial[g] += delta[g];
                for (double& v : trial) v = std::clamp(v, 0.0, 0.5);
                std::vector<double> tmodel;
                detail::cluster_model(sol.members, trial, tmodel, nullptr);
                const double tnorm = res_norm2(tmodel);
                if (tnorm < best) {
                    best = tnorm;
                    alpha = trial;
                    detail::cluster_model(sol.members, alpha, model, &jac);
                    lambda = std::max(lambda / 3, 1e-12);
                    improved = true;
                } else {
                    lambda *= 10;
                }
            }
            if (!improved) break;
        }
        sol.alphas = alpha;
        sol.residual = std::sqrt(best);
        sol.converged = sol.residual <= 1e-10 || sol.projected;
    }

    // Moment-error propagation through the solved system: Cov(alpha) ~
    // J^-1 diag(Var m) J^-T, diagonal only.
    detail::cluster_model(sol.members, sol.alphas, model, &jac);
    if (!closed_form_done) {
        double r2 = 0;
        for (int i = 0; i < n; ++i) r2 += (model[i] - m[i]) * (model[i] - m[i]);
        sol.residual = std::sqrt(r2);
        sol.converged = sol.residual <= 1e-10 || sol.projected;
    }
    sol.alpha_se.assign(n, 0.0);
    if (stats.n_shots > 0) {
        const double N = double(stats.n_shots);
        std::vector<double> var(n);
        for (int i = 0; i < n; ++i) {
            const double p = std::clamp(m[i], 1.0 / N, 1.0 - 1.0 / N);
            var[i] = p * (1 - p) / N;
        }
        try {
            // Solve J^T x = e_h per member to get rows of J^-1.
            for (int h = 0; h < n; ++h) {
                std::vector<double> jt(std::size_t(n) * n);
                for (int i = 0; i < n; ++i)
                    for (int g = 0; g < n; ++g) jt[g * n + i] = jac[i * n + g];
                std::vector<double> e(n, 0.0);
                e[h] = 1.0;
                std::vector<double> row = solve_linear_system(jt, e);
                double v = 0;
                for (int i = 0; i < n; ++i) v += row[i] * row[i] * var[i];
                sol.alpha_se[h] = std::sqrt(v);
            }
        } catch (const std::runtime_error&) {
            for (int h = 0; h < n; ++h)
                sol.alpha_se[h] = std::sqrt(var[h]);
            sol.converged = false;
        }
    }
    return sol;
}

// ---- adjustment ----------------------------------------------------------------

struct CalibrationResult {
    std::map<std::uint64_t, double> alpha;
    std::map<std::uint64_t, double> alpha_se;
    std::uint64_t n_shots = 0;
    int truncate_size = 4;
    double max_residual = 0;
    bool all_converged = true;
    bool any_projected = false;
    bool any_singular_adjustment = false;
};

// Recursive top-down adjustment (largest sizes first) followed by averaging
// across the clusters containing each hyperedge.
inline std::map<std::uint64_t, double> adjust(const std::vector<ClusterSolution>& solutions,
                                              const std::vector<Hyperedge>& hyperedges,
                                              std::map<std::uint64_t, double>* se_out = nullptr,
                                              bool* singular_flag = nullptr) {
    std::vector<std::uint64_t> members;
    for (const auto& h : hyperedges)
        if (h.event_mask) members.push_back(h.event_mask);
    std::sort(members.begin(), members.end(), [](std::uint64_t a, std::uint64_t b) {
        const int sa = std::popcount(a), sb = std::popcount(b);
        if (sa != sb) return sa > sb;
        return mask_to_events(a) < mask_to_events(b);
    });

    std::map<std::uint64_t, double> final_alpha;
    std::map<std::uint64_t, double> final_se;
    for (std::uint64_t h : members) {
        const int size = std::popcount(h);
        double sum = 0, se_sum = 0;
        int count = 0;
        for (const auto& sol : solutions) {
            if (h & ~sol.cluster_mask) continue;
            auto it = std::find(sol.members.begin(), sol.members.end(), h);
            if (it == sol.members.end()) continue;
            const std::size_t idx = it - sol.members.begin();
            double a = sol.alphas[idx];
            for (std::uint64_t hp : members) {
                if (std::popcount(hp) <= size) continue;
                if ((hp & sol.cluster_mask) != h) continue;
                if ((hp & ~sol.cluster_mask) == 0) continue;  // inside the cluster: already modeled
                const double ap = final_alpha.at(hp);
                const double den = 1.0 - 2.0 * ap;
                if (std::abs(den) < 1e-12) {
                    if (singular_flag) *singular_flag = true;
                    continue;
                }
                a = (a - ap) / den;
            }
            sum += a;
            se_sum += sol.alpha_se.empty() ? 0.0 : sol.alpha_se[idx];
            ++count;
        }
        final_alpha[h] = count ? sum / count : 0.0;
        final_se[h] = count ? se_sum / count : 0.0;
    }
    if (se_out) *se_out = std::move(final_se);
    return final_alpha;
}

// accumulate -> cluster -> solve -> adjust, on a candidate set truncated to
// hyperedges of size <= truncate_size (4 reproduces the paper's pipeline; 2
// reproduces its negative-probability caution).
inline CalibrationResult calibrate(const EventStatistics& stats,
                                   const std::vector<Hyperedge>& hyperedges,
                                   int truncate_size = 4) {
    std::vector<Hyperedge> candidates;
    for (const auto& h : hyperedges)
        if (h.size() >= 1 && h.size() <= truncate_size) candidates.push_back(h);

    CalibrationResult out;
    out.n_shots = stats.n_shots;
    out.truncate_size = truncate_size;
    std::vector<ClusterSolution> sols;
    for (std::uint64_t c : cluster(candidates)) {
        sols.push_back(solve_cluster(c, stats, candidates));
        out.max_residual = std::max(out.max_residual, sols.back().residual);
        out.all_converged = out.all_converged && sols.back().converged;
        out.any_projected = out.any_projected || sols.back().projected;
    }
    out.alpha = adjust(sols, candidates, &out.alpha_se, &out.any_singular_adjustment);
    return out;
}

inline CalibrationResult calibrate(std::span<const ShotRecord> shots,
                                   const std::vector<Hyperedge>& hyperedges,
                                   int truncate_size = 4) {
    std::vector<Hyperedge> candidates;
    for (const auto& h : hyperedges)
        if (h.size() >= 1 && h.size() <= truncate_size) candidates.push_back(h);
    EventStatistics stats = accumulate(shots, candidates);
    return calibrate(stats, candidates, truncate_size);
}

// Strict variant for decoder consumption: negative calibrated probabilities
// clamp to zero before weight conversion.
inline std::map<std::uint64_t, double> clamped_probabilities(const CalibrationResult& cal) {
    std::map<std::uint64_t, double> out;
    for (const auto& [mask, a] : cal.alpha) out[mask] = std::max(a, 0.0);
    return out;
}

// ---- synthetic generator -------------------------------------------------------

// Independent-hyperedge process: each hyperedge fires on its own with
// probability alpha; events are the XOR of the fired hyperedges. Serves as
// the forward model that calibrate() inverts.
inline std::vector<std::uint64_t> sample_independent_hyperedges(
    const std::vector<std::uint64_t>& masks, const std::vector<double>& alphas, std::uint64_t n,
    std::uint64_t seed) {
    std::vector<std::uint64_t> out;
    out.reserve(n);
    for (std::uint64_t s = 0; s < n; ++s) {
        SplitMix64 rng = shot_rng(seed, s);
        std::uint64_t events = 0;
        for (std::size_t i = 0; i < masks.size(); ++i)
            if (rng.next_double() < alphas[i]) events ^= masks[i];
        out.push_back(events);
    }
    return out;
}

}  // namespace hh412
