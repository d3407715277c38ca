#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace hh412 {

// Pairing problem produced by the decoder: n defects, pairwise connection
// costs, and a per-defect cost to the merged boundary. Every defect ends up
// either paired with another defect or sent to the boundary (the boundary
// absorbs any number of defects at no extra cost).
struct PairingInstance {
    int n = 0;
    std::vector<double> defect_cost;    // n*n, symmetric
    std::vector<double> boundary_cost;  // n

    double cost(int i, int j) const { return defect_cost[std::size_t(i) * n + j]; }
    double& cost(int i, int j) { return defect_cost[std::size_t(i) * n + j]; }
};

// partner[i] = j for a defect pair, or -1 for the boundary.
using Pairing = std::vector<int>;

inline double pairing_cost(const PairingInstance& inst, const Pairing& partner) {
    double total = 0;
    for (int i = 0; i < inst.n; ++i) {
        if (partner[i] < 0)
            total += inst.boundary_cost[i];
        else if (partner[i] > i)
            total += inst.cost(i, partner[i]);
    }
    return total;
}

namespace detail {

// Exact subset DP. Returns the lexicographically smallest minimum-cost
// pairing: the lowest unmatched defect greedily takes the smallest partner id
// consistent with optimality (boundary ordered after every defect id).
inline Pairing pair_by_subset_dp(const PairingInstance& inst) {
    const int n = inst.n;
    const std::uint32_t full = n == 32 ? 0xffffffffu : ((1u << n) - 1);
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> best(std::size_t(full) + 1, kInf);
    best[0] = 0;
    // best[] is filled in increasing mask order; every transition removes the
    // lowest set bit, so subproblems are always ready.
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
        const int i = std::countr_zero(mask);
        const std::uint32_t rest = mask & (mask - 1);
        double b = inst.boundary_cost[i] + best[rest];
        std::uint32_t others = rest;
        while (others) {
            const int j = std::countr_zero(others);
            others &= others - 1;
            const double c = inst.cost(i, j) + best[rest & ~(1u << j)];
            if (c < b) b = c;
        }
        best[mask] = b;
    }
    Pairing partner(n, -1);
    std::uint32_t mask = full;
    while (mask) {
        const int i = std::countr_zero(mask);
        const std::uint32_t rest = mask & (mask - 1);
        int pick = -1;  // boundary unless a defect partner matches the optimum
        std::uint32_t others = rest;
        while (others) {
            const int j = std::countr_zero(others);
            others &= others - 1;
            if (inst.cost(i, j) + best[rest & ~(1u << j)] == best[mask]) {
                pick = j;
                break;
            }
        }
        if (pick < 0 && inst.boundary_cost[i] + best[rest] != best[mask])
            throw std::logic_error("pairing DP: inconsistent traceback");
        partner[i] = pick;
        if (pick >= 0) {
            partner[pick] = i;
            mask = rest & ~(1u << pick);
        } else {
            mask = rest;
        }
    }
    return partner;
}

// Maximum-weight matching on a general graph (blossom algorithm, O(n^3)).
// Dense-weight formulation with the maximum-cardinality option, used here to
// solve minimum-weight perfect matching on the boundary-augmented graph when
// the defect set is too large for the subset DP.
class BlossomMatcher {
  public:
    BlossomMatcher(int nvertex, const std::vector<std::array<int, 2>>& ends,
                   const std::vector<double>& weights)
        : nv(nvertex), ne(static_cast<int>(ends.size())), edges(ends), wt(weights) {
        endpoint.resize(2 * ne);
        for (int k = 0; k < ne; ++k) {
            endpoint[2 * k] = edges[k][0];
            endpoint[2 * k + 1] = edges[k][1];
        }
        neighbend.assign(nv, {});
        for (int k = 0; k < ne; ++k) {
            neighbend[edges[k][0]].push_back(2 * k + 1);
            neighbend[edges[k][1]].push_back(2 * k);
        }
        maxweight = 0;
        for (double w : wt) maxweight = std::max(maxweight, w);
        mate.assign(nv, -1);
        label.assign(2 * nv, 0);
        labelend.assign(2 * nv, -1);
        inblossom.resize(nv);
        for (int v = 0; v < nv; ++v) inblossom[v] = v;
        blossomparent.assign(2 * nv, -1);
        blossomchilds.assign(2 * nv, {});
        blossombase.resize(2 * nv);
        for (int v = 0; v < nv; ++v) blossombase[v] = v;
        for (int b = nv; b < 2 * nv; ++b) blossombase[b] = -1;
        blossomendps.assign(2 * nv, {});
        bestedge.assign(2 * nv, -1);
        blossombestedges.assign(2 * nv, {});
        for (int b = 2 * nv - 1; b >= nv; --b) unusedblossoms.push_back(b);
        dualvar.assign(2 * nv, 0);
        for (int v = 0; v < nv; ++v) dualvar[v] = maxweight;
        allowedge.assign(ne, false);
    }

    // Returns mate[v] = partner vertex or -1.
    std::vector<int> solve() {
        for (int t = 0; t < nv; ++t) {
            std::fill(label.begin(), label.end(), 0);
            std::fill(bestedge.begin(), bestedge.end(), -1);
            for (int b = nv; b < 2 * nv; ++b) blossombestedges[b].clear();
            std::fill(allowedge.begin(), allowedge.end(), false);
            queue.clear();
            for (int v = 0; v < nv; ++v)
                if (mate[v] == -1 && label[inblossom[v]] == 0) assign_label(v, 1, -1);
            bool augmented = false;
            while (true) {
                while (!queue.empty() && !augmented) {
                    const int v = queue.back();
                    queue.pop_back();
                    for (int p : neighbend[v]) {
                        const int k = p / 2;
                        const int w = endpoint[p];
                        if (inblossom[v] == inblossom[w]) continue;
                        double kslack = 0;
                        if (!allowedge[k]) {
                            kslack = slack(k);
                            if (kslack <= 0) allowedge[k] = true;
                        }
                        if (allowedge[k]) {
                            if (label[inblossom[w]] == 0) {
                                assign_label(w, 2, p ^ 1);
                            } else if (label[inblossom[w]] == 1) {
                                const int base = scan_blossom(v, w);
                                if (base >= 0) {
                                    add_blossom(base, k);
                                } else {
                                    augment_matching(k);
                                    augmented = true;
                                    break;
                                }
                            } else if (label[w] == 0) {
                                label[w] = 2;
                                labelend[w] = p ^ 1;
                            }
                        } else if (label[inblossom[w]] == 1) {
                            const int b = inblossom[v];
                            if (bestedge[b] == -1 || kslack < slack(bestedge[b])) bestedge[b] = k;
                        } else if (label[w] == 0) {
                            if (bestedge[w] == -1 || kslack < slack(bestedge[w])) bestedge[w] = k;
                        }
                    }
                }
                if (augmented) break;

                // Dual update: smallest decrease that creates new tight
                // structure (types follow the classic formulation).
                int deltatype = -1;
                double delta = 0;
                int deltaedge = -1, deltablossom = -1;
                for (int v = 0; v < nv; ++v) {
                    if (label[inblossom[v]] == 0 && bestedge[v] != -1) {
                        const double d = slack(bestedge[v]);
                        if (deltatype == -1 || d < delta) {
                            delta = d;
                            deltatype = 2;
                            deltaedge = bestedge[v];
                        }
                    }
                }
                for (int b = 0; b < 2 * nv; ++b) {
                    if (blossomparent[b] == -1 && label[b] == 1 && bestedge[b] != -1) {
                        const double d = slack(bestedge[b]) / 2;
                        if (deltatype == -1 || d < delta) {
                            delta = d;
                            deltatype = 3;
                            deltaedge = bestedge[b];
                        }
                    }
                }
                for (int b = nv; b < 2 * nv; ++b) {
                    if (blossombase[b] >= 0 && blossomparent[b] == -1 && label[b] == 2 &&
                        (deltatype == -1 || dualvar[b] < delta)) {
                        delta = dualvar[b];
                        deltatype = 4;
                        deltablossom = b;
                    }
                }
                if (deltatype == -1) {
                    // No further progress possible: maximum cardinality reached.
                    deltatype = 1;
                    double mind = dualvar[0];
                    for (int v = 1; v < nv; ++v) mind = std::min(mind, dualvar[v]);
                    delta = std::max(0.0, mind);
                }
                for (int v = 0; v < nv; ++v) {
                    const int l = label[inblossom[v]];
                    if (l == 1)
                        dualvar[v] -= delta;
                    else if (l == 2)
                        dualvar[v] += delta;
                }
                for (int b = nv; b < 2 * nv; ++b) {
                    if (blossombase[b] >= 0 && blossomparent[b] == -1) {
                        if (label[b] == 1)
                            dualvar[b] += delta;
                        else if (label[b] == 2)
                            dualvar[b] -= delta;
                    }
                }
                if (deltatype == 1) break;
                if (deltatype == 2) {
                    allowedge[deltaedge] = true;
                    int i = endpoint[2 * deltaedge];
                    if (label[inblossom[i]] == 0) i = endpoint[2 * deltaedge + 1];
                    queue.push_back(i);
                } else if (deltatype == 3) {
                    allowedge[deltaedge] = true;
                    queue.push_back(endpoint[2 * deltaedge]);
                } else if (deltatype == 4) {
                    expand_blossom(deltablossom, false);
                }
            }
            if (!augmented_flag) break;
            augmented_flag = false;
            for (int b = nv; b < 2 * nv; ++b)
                if (blossomparent[b] == -1 && blossombase[b] >= 0 && label[b] == 1 &&
                    dualvar[b] == 0)
                    expand_blossom(b, true);
        }
        std::vector<int> out(nv, -1);
        for (int v = 0; v < nv; ++v)
            if (mate[v] >= 0) out[v] = endpoint[mate[v]];
        return out;
    }

  private:
    int nv, ne;
    std::vector<std::array<int, 2>> edges;
    std::vector<double> wt;
    double maxweight;
    std::vector<int> endpoint;
    std::vector<std::vector<int>> neighbend;
    std::vector<int> mate;
    std::vector<int> label, labelend, inblossom, blossomparent;
    std::vector<std::vector<int>> blossomchilds;
    std::vector<int> blossombase;
    std::vector<std::vector<int>> blossomendps;
    std::vector<int> bestedge;
    std::vector<std::vector<int>> blossombestedges;
    std::vector<int> unusedblossoms;
    std::vector<double> dualvar;
    std::vector<char> allowedge;
    std::vector<int> queue;
    bool augmented_flag = false;

    double slack(int k) const {
        return dualvar[edges[k][0]] + dualvar[edges[k][1]] - 2 * wt[k];
    }

    void blossom_leaves(int b, std::vector<int>& out) const {
        if (b < nv) {
            out.push_back(b);
        } else {
            for (int t : blossomchilds[b]) blossom_leaves(t, out);
        }
    }

    void assign_label(int w, int t, int p) {
        const int b = inblossom[w];
        label[w] = label[b] = t;
        labelend[w] = labelend[b] = p;
        bestedge[w] = bestedge[b] = -1;
        if (t == 1) {
            std::vector<int> leaves;
            blossom_leaves(b, leaves);
            for (int v : leaves) queue.push_back(v);
        } else if (t == 2) {
            const int base = blossombase[b];
            assign_label(endpoint[mate[base]], 1, mate[base] ^ 1);
        }
    }

    int scan_blossom(int v, int w) {
        std::vector<int> path;
        int base = -1;
        while (v != -1 || w != -1) {
            int b = inblossom[v];
            if (label[b] & 4) {
                base = blossombase[b];
                break;
            }
            path.push_back(b);
            label[b] |= 4;
            if (labelend[b] == -1) {
                v = -1;
            } else {
                v = endpoint[labelend[b]];
                b = inblossom[v];
                v = endpoint[labelend[b]];
            }
            if (w != -1) std::swap(v, w);
        }
        for (int b : path) label[b] &= ~4;
        return base;
    }

    void add_blossom(int base, int k) {
        int v = edges[k][0], w = edges[k][1];
        const int bb = inblossom[base];
        int bv = inblossom[v], bw = inblossom[w];
        const int b = unusedblossoms.back();
        unusedblossoms.pop_back();
        blossombase[b] = base;
        blossomparent[b] = -1;
        blossomparent[bb] = b;
        auto& path = blossomchilds[b];
        auto& endps = blossomendps[b];
        path.clear();
        endps.clear();
        while (bv != bb) {
            blossomparent[bv] = b;
            path.push_back(bv);
            endps.push_back(labelend[bv]);
            v = endpoint[labelend[bv]];
            bv = inblossom[v];
        }
        path.push_back(bb);
        std::reverse(path.begin(), path.end());
        std::reverse(endps.begin(), endps.end());
        endps.push_back(2 * k);
        while (bw != bb) {
            blossomparent[bw] = b;
            path.push_back(bw);
            endps.push_back(labelend[bw] ^ 1);
            w = endpoint[labelend[bw]];
            bw = inblossom[w];
        }
        label[b] = 1;
        labelend[b] = labelend[bb];
        dualvar[b] = 0;
        std::vector<int> leaves;
        blossom_leaves(b, leaves);
        for (int leaf : leaves) {
            if (label[inblossom[leaf]] == 2) queue.push_back(leaf);
            inblossom[leaf] = b;
        }
        // Recompute best-edge lists for delta-3 bookkeeping.
        std::vector<int> bestedgeto(2 * nv, -1);
        for (int child : path) {
            std::vector<int> nblists;
            if (blossombestedges[child].empty()) {
                std::vector<int> lv;
                blossom_leaves(child, lv);
                for (int leaf : lv)
                    for (int p : neighbend[leaf]) nblists.push_back(p / 2);
            } else {
                nblists = blossombestedges[child];
            }
            for (int kk : nblists) {
                int i = edges[kk][0], j = edges[kk][1];
                if (inblossom[j] == b) std::swap(i, j);
                const int bj = inblossom[j];
                if (bj != b && label[bj] == 1 &&
                    (bestedgeto[bj] == -1 || slack(kk) < slack(bestedgeto[bj])))
                    bestedgeto[bj] = kk;
            }
            blossombestedges[child].clear();
            bestedge[child] = -1;
        }
        blossombestedges[b].clear();
        for (int kk : bestedgeto)
            if (kk != -1) blossombestedges[b].push_back(kk);
        bestedge[b] = -1;
        for (int kk : blossombestedges[b])
            if (bestedge[b] == -1 || slack(kk) < slack(bestedge[b])) bestedge[b] = kk;
    }

    void expand_blossom(int b, bool endstage) {
        for (int s : blossomchilds[b]) {
            blossomparent[s] = -1;
            if (s < nv) {
                inblossom[s] = s;
            } else if (endstage && dualvar[s] == 0) {
                expand_blossom(s, endstage);
            } else {
                std::vector<int> leaves;
                blossom_leaves(s, leaves);
                for (int v : leaves) inblossom[v] = s;
            }
        }
        if (!endstage && label[b] == 2) {
            const int entrychild = inblossom[endpoint[labelend[b] ^ 1]];
            int j = static_cast<int>(
                std::find(blossomchilds[b].begin(), blossomchilds[b].end(), entrychild) -
                blossomchilds[b].begin());
            int jstep, endptrick;
            if (j & 1) {
                j -= static_cast<int>(blossomchilds[b].size());
                jstep = 1;
                endptrick = 0;
            } else {
                jstep = -1;
                endptrick = 1;
            }
            int p = labelend[b];
            while (j != 0) {
                label[endpoint[p ^ 1]] = 0;
                const int idx = mod_index(j - endptrick, blossomchilds[b].size());
                label[endpoint[blossomendps[b][idx] ^ endptrick ^ 1]] = 0;
                assign_label(endpoint[p ^ 1], 2, p);
                allowedge[blossomendps[b][idx] / 2] = true;
                j += jstep;
                const int idx2 = mod_index(j - endptrick, blossomchilds[b].size());
                p = blossomendps[b][idx2] ^ endptrick;
                allowedge[p / 2] = true;
                j += jstep;
            }
            const int bv = blossomchilds[b][mod_index(j, blossomchilds[b].size())];
            label[endpoint[p ^ 1]] = label[bv] = 2;
            labelend[endpoint[p ^ 1]] = labelend[bv] = p;
            bestedge[bv] = -1;
            j += jstep;
            while (blossomchilds[b][mod_index(j, blossomchilds[b].size())] != entrychild) {
                const int bw = blossomchilds[b][mod_index(j, blossomchilds[b].size())];
                if (label[bw] == 1) {
                    j += jstep;
                    continue;
                }
                std::vector<int> leaves;
                blossom_leaves(bw, leaves);
                int v = -1;
                for (int leaf : leaves)
                    if (label[leaf] != 0) {
                        v = leaf;
                        break;
                    }
                if (v != -1) {
                    label[v] = 0;
                    label[endpoint[mate[blossombase[bw]]]] = 0;
                    assign_label(v, 2, labelend[v]);
                }
                j += jstep;
            }
        }
        label[b] = labelend[b] = -1;
        blossomchilds[b].clear();
        blossomendps[b].clear();
        blossombase[b] = -1;
        blossombestedges[b].clear();
        bestedge[b] = -1;
        unusedblossoms.push_back(b);
    }

    static int mod_index(int j, std::size_t size) {
        const int m = static_cast<int>(size);
        return ((j % m) + m) % m;
    }

    void augment_blossom(int b, int v) {
        int t = v;
        while (blossomparent[t] != b) t = blossomparent[t];
        if (t >= nv) augment_blossom(t, v);
        const auto& childs = blossomchilds[b];
        const int i = static_cast<int>(std::find(childs.begin(), childs.end(), t) - childs.begin());
        int j = i, jstep, endptrick;
        if (i & 1) {
            j -= static_cast<int>(childs.size());
            jstep = 1;
            endptrick = 0;
        } else {
            jstep = -1;
            endptrick = 1;
        }
        while (j != 0) {
            j += jstep;
            int tt = childs[mod_index(j, childs.size())];
            const int p = blossomendps[b][mod_index(j - endptrick, childs.size())] ^ endptrick;
            if (tt >= nv) augment_blossom(tt, endpoint[p]);
            j += jstep;
            tt = childs[mod_index(j, childs.size())];
            if (tt >= nv) augment_blossom(tt, endpoint[p ^ 1]);
            mate[endpoint[p]] = p ^ 1;
            mate[endpoint[p ^ 1]] = p;
        }
        std::rotate(blossomchilds[b].begin(), blossomchilds[b].begin() + i, blossomchilds[b].end());
        std::rotate(blossomendps[b].begin(), blossomendps[b].begin() + i, blossomendps[b].end());
        blossombase[b] = blossombase[blossomchilds[b][0]];
    }

    void augment_matching(int k) {
        augmented_flag = true;
        for (int side = 0; side < 2; ++side) {
            int s = edges[k][side];
            int p = 2 * k + (side ^ 1);  // endpoint pointing at the other vertex
            while (true) {
                const int bs = inblossom[s];
                if (bs >= nv) augment_blossom(bs, s);
                mate[s] = p;
                if (labelend[bs] == -1) break;
                const int t = endpoint[labelend[bs]];
                const int bt = inblossom[t];
                s = endpoint[labelend[bt]];
                const int j = endpoint[labelend[bt] ^ 1];
                if (bt >= nv) augment_blossom(bt, j);
                mate[j] = labelend[bt];
                p = labelend[bt] ^ 1;
            }
        }
    }
};

inline Pairing pair_by_blossom(const PairingInstance& inst) {
    // Boundary-augmented graph: defect i gets a dedicated boundary copy n+i;
    // copies form a zero-cost clique so any number of defects may use the
    // boundary. Minimum-weight perfect matching via maximum-weight matching
    // on complemented weights.
    const int d = inst.n;
    const int n = 2 * d;
    std::vector<std::array<int, 2>> ends;
    std::vector<double> weights;
    double maxcost = 0;
    for (int i = 0; i < d; ++i) {
        maxcost = std::max(maxcost, inst.boundary_cost[i]);
        for (int j = i + 1; j < d; ++j) maxcost = std::max(maxcost, inst.cost(i, j));
    }
    const double base = maxcost + 1.0;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            ends.push_back({i, j});
            weights.push_back(base - inst.cost(i, j));
        }
    for (int i = 0; i < d; ++i) {
        ends.push_back({i, d + i});
        weights.push_back(base - inst.boundary_cost[i]);
    }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            ends.push_back({d + i, d + j});
            weights.push_back(base);
        }
    BlossomMatcher matcher(n, ends, weights);
    std::vector<int> mate = matcher.solve();
    Pairing partner(d, -1);
    for (int i = 0; i < d; ++i) {
        if (mate[i] < 0 || mate[i] >= d)
            partner[i] = -1;
        else
            partner[i] = mate[i];
    }
    return partner;
}

}  // namespace detail

// Exact minimum-weight pairing of defects (boundary allowed). Small defect
// sets go through the subset DP, which also canonicalizes ties to the
// lexicographically smallest pairing; larger sets use the blossom solver.
inline constexpr int kPairingDpMaxDefects = 18;

inline Pairing min_weight_pairing(const PairingInstance& inst) {
    if (inst.n == 0) return {};
    if (inst.n <= kPairingDpMaxDefects) return detail::pair_by_subset_dp(inst);
    return detail::pair_by_blossom(inst);
}

}  // namespace hh412
