#pragma once

#include <compare>
#include <string>
#include <vector>

#include "scylla/dpa.hpp"
#include "scylla/packet_set.hpp"

namespace scylla {

struct TableRef {
    std::string device;
    std::string table;

    auto operator<=>(const TableRef&) const = default;
    std::string str() const { return device + "/" + table; }
};

// An equivalence class of packets at one rule table: all packets in the set
// receive the same action sequence (that of the highest-priority matching
// rule; the implicit table default is Drop).
struct FlowNode {
    PacketSet packet_set;
    std::vector<Action> actions;
    std::vector<std::size_t> source_rules;  // contributing rule indices, ascending
};

// Flow nodes plus the bookkeeping the slice layer retains for a table.
struct TableModel {
    std::vector<FlowNode> flow_nodes;
    std::vector<std::size_t> relevant;  // rules overlapping the universe, in priority order
    RelevantRuleHash hash;
};

std::vector<FlowNode> build_flow_nodes(PacketSetManager& mgr, const RuleTable& table,
                                       const PacketSet& universe);
TableModel build_table_model(PacketSetManager& mgr, const RuleTable& table,
                             const PacketSet& universe);

enum class Terminal { Open, Accepted, Dropped, LeftNetwork, Looped };

const char* terminal_name(Terminal t);
Terminal terminal_from_name(const std::string& name);

struct Vertex {
    TableRef table;
    PacketSet packet_set;
};

struct Path {
    std::vector<Vertex> vertices;
    Terminal terminal = Terminal::Open;
    PacketSet terminal_set;  // packet set at the terminal, when terminal != Open
    bool dangling = false;   // a forward resolved nowhere and was treated as LeftNetwork

    const Vertex& last() const { return vertices.back(); }
};

enum class ViolationStatus : int {
    Never = -1,        // this path can never become a violation
    Inconclusive = 0,  // keep traversing
    Violation = 1,
};

// One output of applying a flow node's actions: either a next (table, set)
// vertex or a terminal. Duplicating actions produce several successors.
struct Successor {
    bool is_terminal = false;
    Terminal terminal = Terminal::Open;
    TableRef table;
    PacketSet packet_set;
    bool dangling = false;
};

// Interface resolution context for Forward actions: topology wiring plus
// read-only DPA access (resolving a peer's ingress table does not model it).
class HopResolver {
public:
    virtual ~HopResolver() = default;
    virtual const Topology& topology() = 0;
    virtual const Dpa& raw_dpa(const std::string& device) = 0;
    virtual bool device_known(const std::string& device) = 0;
};

// The table a packet enters when it arrives at a device through the given
// interface: the interface's ingress_table attribute, or the device's first
// rule table.
std::string ingress_table(const Dpa& dpa, const std::string& interface_id);

std::vector<Successor> apply_actions(PacketSetManager& mgr, const TableRef& at,
                                     const std::vector<Action>& actions, const PacketSet& ps,
                                     HopResolver& resolver);

inline std::vector<Successor> apply_actions(PacketSetManager& mgr, const TableRef& at,
                                            const FlowNode& fn, const PacketSet& ps,
                                            HopResolver& resolver) {
    return apply_actions(mgr, at, fn.actions, ps, resolver);
}

}  // namespace scylla
