#include "scylla/traversal.hpp"

namespace scylla {

std::vector<Successor> get_next_hops(SliceContext& ctx, const Vertex& v) {
    SliceContext::TableState& state = ctx.visit(v.table, v.packet_set);
    PacketSetManager& mgr = ctx.mgr();
    std::vector<Successor> out;
    std::vector<std::size_t> traversed;
    for (const FlowNode& fn : state.model.flow_nodes) {
        PacketSet overlap = mgr.intersect(fn.packet_set, v.packet_set);
        if (mgr.is_empty(overlap)) continue;
        traversed.insert(traversed.end(), fn.source_rules.begin(), fn.source_rules.end());
        std::vector<Successor> next = apply_actions(mgr, v.table, fn, overlap, ctx);
        for (Successor& s : next) out.push_back(std::move(s));
    }
    ctx.record_step(v.table, traversed);
    return out;
}

Path extend_path(const Path& path, const Successor& s) {
    Path next = path;
    next.dangling = path.dangling || s.dangling;
    if (s.is_terminal) {
        next.terminal = s.terminal;
        next.terminal_set = s.packet_set;
    } else {
        next.vertices.push_back(Vertex{s.table, s.packet_set});
    }
    return next;
}

std::optional<Path> get_next_path(SliceContext& ctx, Frontier& frontier,
                                  const IntentPredicate& predicate, std::size_t max_hops) {
    Path path;
    ViolationStatus status = ViolationStatus::Inconclusive;
    do {
        do {
            if (frontier.empty()) return std::nullopt;
            path = frontier.pop();
            status = predicate(path, frontier);
        } while (status == ViolationStatus::Never);
        if (status != ViolationStatus::Violation) {
            if (path.terminal == Terminal::Open) {
                if (path.vertices.size() >= max_hops)
                    fail(ErrorCode::PathLengthExceeded,
                         "traversal exceeded " + std::to_string(max_hops) + " hops at " +
                             path.last().table.str());
                std::vector<Successor> hops = get_next_hops(ctx, path.last());
                for (auto it = hops.rbegin(); it != hops.rend(); ++it)
                    frontier.push(extend_path(path, *it));
            }
        }
    } while (status == ViolationStatus::Inconclusive);
    return path;
}

bool path_revisits(SliceContext& ctx, const Path& path, std::size_t* out_index) {
    if (path.terminal != Terminal::Open || path.vertices.size() < 2) return false;
    const Vertex& last = path.vertices.back();
    for (std::size_t i = 0; i + 1 < path.vertices.size(); ++i) {
        const Vertex& earlier = path.vertices[i];
        if (earlier.table != last.table) continue;
        if (ctx.mgr().is_subset(last.packet_set, earlier.packet_set)) {
            if (out_index) *out_index = i;
            return true;
        }
    }
    return false;
}

}  // namespace scylla
