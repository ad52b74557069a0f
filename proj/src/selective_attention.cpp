#include "pctx/selective_attention.hpp"

#include <algorithm>
#include <cmath>

#include "pctx/context_layout.hpp"
#include "pctx/error.hpp"

namespace pctx {

namespace {

constexpr double kMassEpsilon = 1e-12;

// Sum of the reduce_m largest values, accumulated in descending order.
double top_m_sum(std::vector<double>& vals, int reduce_m) {
    const int m = std::min<int>(reduce_m, static_cast<int>(vals.size()));
    std::partial_sort(vals.begin(), vals.begin() + m, vals.end(), std::greater<>());
    double sum = 0.0;
    for (int i = 0; i < m; ++i) sum += vals[i];
    return sum;
}

}  // namespace

int piece_count_of(std::span<const int> slot_labels) {
    int p = 0;
    for (int label : slot_labels) p = std::max(p, label + 1);
    return p;
}

void SelectionTrace::init(int layers, int heads, int groups) {
    kept_counts.assign(layers, std::vector<std::vector<int64_t>>(
                                   heads, std::vector<int64_t>(groups, 0)));
}

void SelectionTrace::merge(const SelectionTrace& other) {
    if (kept_counts.empty()) {
        *this = other;
        return;
    }
    for (size_t l = 0; l < kept_counts.size() && l < other.kept_counts.size(); ++l) {
        for (size_t h = 0; h < kept_counts[l].size(); ++h) {
            for (size_t g = 0; g < kept_counts[l][h].size(); ++g) {
                kept_counts[l][h][g] += other.kept_counts[l][h][g];
            }
        }
    }
    fallback_rows += other.fallback_rows;
}

GroupScores group_scores(const ProbTensor& p, std::span<const int> slot_labels, int reduce_m) {
    if (static_cast<int>(slot_labels.size()) != p.slots) {
        throw DimensionError("group_scores: label count differs from slot count");
    }
    if (reduce_m < 1) throw InputError("group_scores: reduce_m must be >= 1");
    const int groups = piece_count_of(slot_labels);
    GroupScores s(p.layers, p.heads, p.queries, groups);

    std::vector<std::vector<double>> per_group(groups);
    for (int l = 0; l < p.layers; ++l) {
        for (int h = 0; h < p.heads; ++h) {
            for (int q = 0; q < p.queries; ++q) {
                for (auto& g : per_group) g.clear();
                const float* row = p.row(l, h, q);
                for (int slot = 0; slot < p.slots; ++slot) {
                    const int label = slot_labels[slot];
                    if (label >= 0) per_group[label].push_back(row[slot]);
                }
                double* out = s.at(l, h, q);
                for (int g = 0; g < groups; ++g) out[g] = top_m_sum(per_group[g], reduce_m);
            }
        }
    }
    return s;
}

GroupScores aggregate(const GroupScores& s, Aggregation dims, int reduce_m) {
    if (dims == Aggregation::None) return s;
    const bool over_q = true;  // every mode reduces the query-token dimension
    const bool over_h = dims == Aggregation::HT || dims == Aggregation::LHT;
    const bool over_l = dims == Aggregation::LHT;

    GroupScores out(over_l ? 1 : s.layers, over_h ? 1 : s.heads, over_q ? 1 : s.queries,
                    s.groups);
    // Aggregated dimensions are flattened and reduced jointly by the same
    // top-m sum used for grouping.
    std::vector<double> vals;
    for (int l = 0; l < out.layers; ++l) {
        for (int h = 0; h < out.heads; ++h) {
            for (int q = 0; q < out.queries; ++q) {
                for (int g = 0; g < s.groups; ++g) {
                    vals.clear();
                    for (int sl = over_l ? 0 : l; sl < (over_l ? s.layers : l + 1); ++sl) {
                        for (int sh = over_h ? 0 : h; sh < (over_h ? s.heads : h + 1); ++sh) {
                            for (int sq = 0; sq < s.queries; ++sq) {
                                vals.push_back(s.at(sl, sh, sq)[g]);
                            }
                        }
                    }
                    out.at(l, h, q)[g] = top_m_sum(vals, reduce_m);
                }
            }
        }
    }
    return out;
}

SelectedGroups select_topk(const GroupScores& s, int k) {
    if (k < 1) throw InputError("select_topk: K must be >= 1");
    SelectedGroups sel;
    sel.layers = s.layers;
    sel.heads = s.heads;
    sel.queries = s.queries;
    sel.k_eff = std::min(k, s.groups);
    sel.idx.resize(static_cast<size_t>(s.layers) * s.heads * s.queries * sel.k_eff);

    std::vector<int> order(s.groups);
    size_t w = 0;
    for (int l = 0; l < s.layers; ++l) {
        for (int h = 0; h < s.heads; ++h) {
            for (int q = 0; q < s.queries; ++q) {
                const double* scores = s.at(l, h, q);
                for (int g = 0; g < s.groups; ++g) order[g] = g;
                // ties break toward the lower group index
                std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
                    return scores[a] > scores[b];
                });
                std::sort(order.begin(), order.begin() + sel.k_eff);
                for (int i = 0; i < sel.k_eff; ++i) sel.idx[w++] = order[i];
            }
        }
    }
    return sel;
}

ProbTensor apply_selection(const ProbTensor& p, const SelectedGroups& sel,
                           std::span<const int> slot_labels, SelectionTrace* trace) {
    if (static_cast<int>(slot_labels.size()) != p.slots) {
        throw DimensionError("apply_selection: label count differs from slot count");
    }
    const int groups = piece_count_of(slot_labels);
    ProbTensor out = p;

    std::vector<uint8_t> keep(groups);
    for (int l = 0; l < p.layers; ++l) {
        for (int h = 0; h < p.heads; ++h) {
            for (int q = 0; q < p.queries; ++q) {
                const int* chosen = sel.at(l, h, q);
                std::fill(keep.begin(), keep.end(), uint8_t{0});
                for (int i = 0; i < sel.k_eff; ++i) keep[chosen[i]] = 1;
                if (trace) {
                    for (int i = 0; i < sel.k_eff; ++i) {
                        ++trace->kept_counts[l][h][chosen[i]];
                    }
                }

                float* row = out.row(l, h, q);
                const float* in = p.row(l, h, q);
                double removed = 0.0;
                double surviving = 0.0;
                for (int slot = 0; slot < p.slots; ++slot) {
                    const int label = slot_labels[slot];
                    // only parallel-context tokens are selection candidates
                    if (label >= 0 && !keep[label]) {
                        removed += static_cast<double>(in[slot]);
                        row[slot] = 0.0f;
                    } else {
                        surviving += static_cast<double>(in[slot]);
                    }
                }
                if (removed == 0.0) continue;  // nothing masked; keep the row bit-exact
                if (surviving < kMassEpsilon) {
                    // degenerate row: fall back to the unselected input
                    for (int slot = 0; slot < p.slots; ++slot) row[slot] = in[slot];
                    if (trace) ++trace->fallback_rows;
                    continue;
                }
                for (int slot = 0; slot < p.slots; ++slot) {
                    if (row[slot] != 0.0f) {
                        row[slot] = static_cast<float>(static_cast<double>(row[slot]) / surviving);
                    }
                }
            }
        }
    }
    return out;
}

std::pair<ProbTensor, SelectionTrace> selective_attention(const ProbTensor& p_in,
                                                          const SelectionConfig& cfg,
                                                          std::span<const int> slot_labels) {
    SelectionTrace trace;
    trace.config = cfg;
    trace.piece_count = piece_count_of(slot_labels);
    trace.init(p_in.layers, p_in.heads, trace.piece_count);

    const GroupScores scores = group_scores(p_in, slot_labels, cfg.reduce_m);
    const GroupScores reduced = aggregate(scores, cfg.aggregation, cfg.reduce_m);
    const SelectedGroups sel = select_topk(reduced, cfg.k);
    ProbTensor out = apply_selection(p_in, sel, slot_labels, &trace);
    return {std::move(out), std::move(trace)};
}

}  // namespace pctx
