#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pctx/tokens.hpp"

namespace pctx {

// Slot labels: pieces are 0..P-1, sink and query are out-of-band.
constexpr int kSinkLabel = -1;
constexpr int kQueryLabel = -2;

enum class PositionMode { Full, ParallelEven, Serialized };
enum class Grouping { Contiguous, RoundRobin };

// A task instance laid out for encoding: optional shared sink prefix, P
// independently encodable pieces, then the query.
struct SegmentedContext {
    TokenSeq sink_tokens;
    std::vector<TokenSeq> pieces;
    TokenSeq query_tokens;
    // set when the requested parallel degree exceeded the item count
    bool parallel_degree_clamped = false;

    int sink_len() const { return static_cast<int>(sink_tokens.size()); }
    int piece_count() const { return static_cast<int>(pieces.size()); }
    int pieces_len() const;
    int context_len() const { return sink_len() + pieces_len(); }
    int query_len() const { return static_cast<int>(query_tokens.size()); }
    int total_len() const { return context_len() + query_len(); }
    int max_piece_len() const;

    // label per flattened slot over sink + pieces + query
    std::vector<int> slot_labels() const;
    // flattened sink + pieces + query token ids
    TokenSeq flattened() const;

    std::string to_json() const;
};

// Real-valued position per flattened slot (query slots included).
struct PositionMap {
    std::vector<float> positions;
    PositionMode mode = PositionMode::Full;
    float target_len = 0.0f;  // T: max piece length, parallel-even mode only
};

struct IndexRange {
    int begin = 0;
    int end = 0;  // half-open

    bool operator==(const IndexRange&) const = default;
};

// Allowed key ranges per query row; rows follow the flattened slot order.
struct AttentionMaskSpec {
    std::vector<std::vector<IndexRange>> allowed;
    std::vector<int> piece_label;  // per key slot

    int rows() const { return static_cast<int>(allowed.size()); }
    bool is_allowed(int row, int key) const;
    int64_t row_allowed_count(int row) const;
};

// Partitions items into at most `parallel_degree` pieces, preserving item
// order. Contiguous grouping balances per-piece token counts greedily;
// round-robin deals items in turn.
SegmentedContext split_context(const std::vector<TokenSeq>& items, int parallel_degree,
                               Grouping grouping = Grouping::Contiguous);

PositionMap assign_positions(const SegmentedContext& ctx, PositionMode mode);

AttentionMaskSpec build_mask(const SegmentedContext& ctx);

// Allowed (query,key) pairs over context rows; query rows are reported
// separately.
int64_t pair_count(const AttentionMaskSpec& mask);
int64_t query_pair_count(const AttentionMaskSpec& mask);

// N(N+P)/(2P) for even splits. Throws InputError when P does not divide N;
// callers fall back to pair_count on the real mask.
int64_t theoretical_pair_count(int64_t n, int64_t p);

// max_context_budget = 0 disables the budget check.
SegmentedContext prepend_sink(SegmentedContext ctx, const TokenSeq& prefix,
                              int max_context_budget = 0);

}  // namespace pctx
