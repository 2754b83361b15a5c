#pragma once

#include <functional>
#include <optional>

#include "scylla/slice.hpp"

namespace scylla {

struct Frontier {
    std::vector<Path> stack;

    bool empty() const { return stack.empty(); }
    std::size_t size() const { return stack.size(); }
    void push(Path p) { stack.push_back(std::move(p)); }
    Path pop() {
        Path p = std::move(stack.back());
        stack.pop_back();
        return p;
    }
};

using IntentPredicate = std::function<ViolationStatus(Path&, Frontier&)>;

inline constexpr std::size_t kDefaultMaxHops = 256;

// Successors of a vertex. Loads the DPA on first sight, expands the table
// universe when the packet set is not contained, rebuilds flow nodes, and
// applies each overlapping flow node's actions.
std::vector<Successor> get_next_hops(SliceContext& ctx, const Vertex& v);

Path extend_path(const Path& path, const Successor& s);

// Pops until the status is not -1 (none when the frontier drains), expands
// successors unless the status is 1, and loops while the status is 0. The
// frontier stays resumable for subsequent calls.
std::optional<Path> get_next_path(SliceContext& ctx, Frontier& frontier,
                                  const IntentPredicate& predicate,
                                  std::size_t max_hops = kDefaultMaxHops);

// True when the last vertex revisits an earlier vertex of the same table
// with a contained packet set; out_index receives the earlier position.
bool path_revisits(SliceContext& ctx, const Path& path, std::size_t* out_index = nullptr);

}  // namespace scylla
