#include "pctx/context_layout.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "pctx/error.hpp"

namespace pctx {

int SegmentedContext::pieces_len() const {
    int n = 0;
    for (const auto& p : pieces) n += static_cast<int>(p.size());
    return n;
}

int SegmentedContext::max_piece_len() const {
    int m = 0;
    for (const auto& p : pieces) m = std::max(m, static_cast<int>(p.size()));
    return m;
}

std::vector<int> SegmentedContext::slot_labels() const {
    std::vector<int> labels;
    labels.reserve(total_len());
    labels.insert(labels.end(), sink_tokens.size(), kSinkLabel);
    for (int p = 0; p < piece_count(); ++p) {
        labels.insert(labels.end(), pieces[p].size(), p);
    }
    labels.insert(labels.end(), query_tokens.size(), kQueryLabel);
    return labels;
}

TokenSeq SegmentedContext::flattened() const {
    TokenSeq out;
    out.reserve(total_len());
    out.insert(out.end(), sink_tokens.begin(), sink_tokens.end());
    for (const auto& p : pieces) out.insert(out.end(), p.begin(), p.end());
    out.insert(out.end(), query_tokens.begin(), query_tokens.end());
    return out;
}

std::string SegmentedContext::to_json() const {
    nlohmann::ordered_json j;
    j["sink"] = sink_tokens;
    j["pieces"] = pieces;
    j["query"] = query_tokens;
    return j.dump();
}

SegmentedContext split_context(const std::vector<TokenSeq>& items, int parallel_degree,
                               Grouping grouping) {
    if (items.empty()) throw InputError("split_context: no items");
    if (parallel_degree < 1) throw InputError("split_context: parallel degree must be >= 1");

    SegmentedContext ctx;
    int p = parallel_degree;
    if (p > static_cast<int>(items.size())) {
        p = static_cast<int>(items.size());
        ctx.parallel_degree_clamped = true;
    }
    ctx.pieces.assign(p, {});

    if (grouping == Grouping::RoundRobin) {
        for (size_t i = 0; i < items.size(); ++i) {
            auto& piece = ctx.pieces[i % p];
            piece.insert(piece.end(), items[i].begin(), items[i].end());
        }
        return ctx;
    }

    // Contiguous: walk items in order, closing a piece once it reaches its
    // fair share of the remaining tokens (while leaving one item for each
    // remaining piece).
    int64_t total_tokens = 0;
    for (const auto& it : items) total_tokens += static_cast<int64_t>(it.size());

    size_t item = 0;
    int64_t tokens_left = total_tokens;
    for (int piece = 0; piece < p; ++piece) {
        const int pieces_left = p - piece;
        const int64_t target = (tokens_left + pieces_left - 1) / pieces_left;
        int64_t taken = 0;
        const size_t items_left_min = static_cast<size_t>(pieces_left - 1);
        while (item < items.size() - items_left_min) {
            const int64_t len = static_cast<int64_t>(items[item].size());
            if (taken > 0 && taken + len > target) break;
            ctx.pieces[piece].insert(ctx.pieces[piece].end(), items[item].begin(),
                                     items[item].end());
            taken += len;
            ++item;
            if (taken >= target) break;
        }
        tokens_left -= taken;
    }
    // Any remainder goes to the last piece.
    for (; item < items.size(); ++item) {
        ctx.pieces.back().insert(ctx.pieces.back().end(), items[item].begin(),
                                 items[item].end());
    }
    return ctx;
}

PositionMap assign_positions(const SegmentedContext& ctx, PositionMode mode) {
    PositionMap map;
    map.mode = mode;
    map.positions.reserve(ctx.total_len());
    const int s = ctx.sink_len();

    for (int i = 0; i < s; ++i) map.positions.push_back(static_cast<float>(i));

    if (mode == PositionMode::Full || mode == PositionMode::Serialized) {
        int next = s;
        for (const auto& piece : ctx.pieces) {
            for (size_t j = 0; j < piece.size(); ++j) {
                map.positions.push_back(static_cast<float>(next++));
            }
        }
        for (int q = 0; q < ctx.query_len(); ++q) {
            map.positions.push_back(static_cast<float>(next++));
        }
        return map;
    }

    // Parallel-even: every piece spans [S, S+T-1] with endpoints aligned.
    const int t = ctx.max_piece_len();
    map.target_len = static_cast<float>(t);
    for (const auto& piece : ctx.pieces) {
        const int len = static_cast<int>(piece.size());
        for (int j = 0; j < len; ++j) {
            double pos = static_cast<double>(s);
            if (len > 1) {
                pos += static_cast<double>(j) * static_cast<double>(t - 1) /
                       static_cast<double>(len - 1);
            }
            map.positions.push_back(static_cast<float>(pos));
        }
    }
    for (int q = 0; q < ctx.query_len(); ++q) {
        map.positions.push_back(static_cast<float>(s + t + q));
    }
    return map;
}

bool AttentionMaskSpec::is_allowed(int row, int key) const {
    for (const auto& r : allowed[row]) {
        if (key >= r.begin && key < r.end) return true;
    }
    return false;
}

int64_t AttentionMaskSpec::row_allowed_count(int row) const {
    int64_t n = 0;
    for (const auto& r : allowed[row]) n += r.end - r.begin;
    return n;
}

AttentionMaskSpec build_mask(const SegmentedContext& ctx) {
    AttentionMaskSpec mask;
    mask.piece_label = ctx.slot_labels();
    mask.allowed.resize(ctx.total_len());

    const int s = ctx.sink_len();
    int row = 0;
    // Sink rows: causal within the sink.
    for (; row < s; ++row) mask.allowed[row] = {{0, row + 1}};
    // Piece rows: sink plus the in-piece prefix.
    int piece_start = s;
    for (const auto& piece : ctx.pieces) {
        const int len = static_cast<int>(piece.size());
        for (int j = 0; j < len; ++j, ++row) {
            auto& ranges = mask.allowed[row];
            if (s > 0) ranges.push_back({0, s});
            ranges.push_back({piece_start, piece_start + j + 1});
        }
        piece_start += len;
    }
    // Query rows: the whole context plus the preceding query prefix.
    const int ctx_len = ctx.context_len();
    for (int q = 0; q < ctx.query_len(); ++q, ++row) {
        mask.allowed[row] = {{0, ctx_len + q + 1}};
    }
    return mask;
}

int64_t pair_count(const AttentionMaskSpec& mask) {
    int64_t n = 0;
    for (int row = 0; row < mask.rows(); ++row) {
        if (mask.piece_label[row] == kQueryLabel) continue;
        n += mask.row_allowed_count(row);
    }
    return n;
}

int64_t query_pair_count(const AttentionMaskSpec& mask) {
    int64_t n = 0;
    for (int row = 0; row < mask.rows(); ++row) {
        if (mask.piece_label[row] == kQueryLabel) n += mask.row_allowed_count(row);
    }
    return n;
}

int64_t theoretical_pair_count(int64_t n, int64_t p) {
    if (n < 0 || p < 1) throw InputError("theoretical_pair_count: bad arguments");
    if (n % p != 0) {
        throw InputError("theoretical_pair_count: P must divide N for the even-split formula");
    }
    return n * (n + p) / (2 * p);
}

SegmentedContext prepend_sink(SegmentedContext ctx, const TokenSeq& prefix,
                              int max_context_budget) {
    if (prefix.empty()) throw InputError("prepend_sink: prefix must be non-empty");
    if (max_context_budget > 0 &&
        static_cast<int>(prefix.size()) + ctx.pieces_len() > max_context_budget) {
        throw InputError("prepend_sink: prefix exceeds the context budget");
    }
    ctx.sink_tokens = prefix;
    return ctx;
}

}  // namespace pctx
