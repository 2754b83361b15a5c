#include "scylla/flow_node.hpp"

#include <map>

namespace scylla {

const char* terminal_name(Terminal t) {
    switch (t) {
        case Terminal::Open: return "Open";
        case Terminal::Accepted: return "Accepted";
        case Terminal::Dropped: return "Dropped";
        case Terminal::LeftNetwork: return "LeftNetwork";
        case Terminal::Looped: return "Looped";
    }
    return "Open";
}

Terminal terminal_from_name(const std::string& name) {
    if (name == "Accepted") return Terminal::Accepted;
    if (name == "Dropped") return Terminal::Dropped;
    if (name == "LeftNetwork") return Terminal::LeftNetwork;
    if (name == "Looped") return Terminal::Looped;
    return Terminal::Open;
}

TableModel build_table_model(PacketSetManager& mgr, const RuleTable& table,
                             const PacketSet& universe) {
    TableModel model;
    if (mgr.is_empty(universe)) {
        model.hash = hash_rule_subsequence(table, {});
        return model;
    }
    PacketSet remaining = universe;
    std::map<std::string, std::size_t> by_actions;  // action serialization -> node index
    for (std::size_t i = 0; i < table.rules.size(); ++i) {
        const Rule& rule = table.rules[i];
        PacketSet match = rule_match_set(mgr, rule);
        if (mgr.is_empty(mgr.intersect(match, universe))) continue;
        model.relevant.push_back(i);
        PacketSet covered = mgr.intersect(match, remaining);
        if (mgr.is_empty(covered)) continue;  // fully shadowed but still relevant
        remaining = mgr.intersect(remaining, mgr.complement(covered));
        std::string key;
        for (const Action& a : rule.actions) key += canonical_rule_bytes(Rule{{}, {a}});
        auto it = by_actions.find(key);
        if (it == by_actions.end()) {
            model.flow_nodes.push_back(FlowNode{covered, rule.actions, {i}});
            by_actions.emplace(std::move(key), model.flow_nodes.size() - 1);
        } else {
            FlowNode& fn = model.flow_nodes[it->second];
            fn.packet_set = mgr.unite(fn.packet_set, covered);
            fn.source_rules.push_back(i);
        }
    }
    if (!mgr.is_empty(remaining))
        model.flow_nodes.push_back(FlowNode{remaining, {Action{kActDrop, "", std::nullopt}}, {}});
    model.hash = hash_rule_subsequence(table, model.relevant);
    return model;
}

std::vector<FlowNode> build_flow_nodes(PacketSetManager& mgr, const RuleTable& table,
                                       const PacketSet& universe) {
    return build_table_model(mgr, table, universe).flow_nodes;
}

std::string ingress_table(const Dpa& dpa, const std::string& interface_id) {
    if (const Interface* iface = dpa.find_interface(interface_id)) {
        if (iface->attributes.contains("ingress_table"))
            return iface->attributes["ingress_table"].get<std::string>();
    }
    if (dpa.rule_tables.empty()) return "";
    return dpa.rule_tables.front().name;
}

namespace {

// Forward resolution: an interface either feeds another table of the same
// device (next_table attribute), is wired by the topology to a peer device,
// or leaves the modeled network. An interface that resolves nowhere and is
// not declared external is flagged dangling.
Successor resolve_forward(const TableRef& at, const std::string& interface_id,
                          const PacketSet& ps, HopResolver& resolver) {
    Successor s;
    s.packet_set = ps;
    const Dpa& dpa = resolver.raw_dpa(at.device);
    const Interface* iface = dpa.find_interface(interface_id);
    if (iface && iface->attributes.contains("next_table")) {
        s.table = TableRef{at.device, iface->attributes["next_table"].get<std::string>()};
        return s;
    }
    if (auto peer = resolver.topology().peer(at.device, interface_id)) {
        if (resolver.device_known(peer->first)) {
            const Dpa& peer_dpa = resolver.raw_dpa(peer->first);
            std::string table = ingress_table(peer_dpa, peer->second);
            if (!table.empty()) {
                s.table = TableRef{peer->first, table};
                return s;
            }
        }
        // Linked to a device we cannot resolve: packets leave the model.
        s.is_terminal = true;
        s.terminal = Terminal::LeftNetwork;
        s.dangling = true;
        return s;
    }
    s.is_terminal = true;
    s.terminal = Terminal::LeftNetwork;
    s.dangling = !(iface && iface->attributes.value("external", false));
    return s;
}

}  // namespace

std::vector<Successor> apply_actions(PacketSetManager& mgr, const TableRef& at,
                                     const std::vector<Action>& actions, const PacketSet& ps,
                                     HopResolver& resolver) {
    std::vector<Successor> out;
    PacketSet cur = ps;
    for (const Action& a : actions) {
        switch (a.type_code) {
            case kActDrop: {
                Successor s;
                s.is_terminal = true;
                s.terminal = Terminal::Dropped;
                s.packet_set = cur;
                out.push_back(std::move(s));
                return out;
            }
            case kActAccept: {
                Successor s;
                s.is_terminal = true;
                s.terminal = Terminal::Accepted;
                s.packet_set = cur;
                out.push_back(std::move(s));
                return out;
            }
            case kActForward:
                out.push_back(resolve_forward(at, *a.outgoing_interface_id, cur, resolver));
                break;
            case kActSetDepth:
                cur = mgr.shift_depth(cur, a.value != "0");
                break;
            default: {
                int field = set_field_target(a.type_code);
                int dim = mgr.schema().dim_index(field, 0);
                cur = mgr.assign(cur, dim, mgr.schema().parse_value(field, a.value));
                break;
            }
        }
    }
    if (out.empty()) {
        // Action list ended without forwarding or an explicit verdict.
        Successor s;
        s.is_terminal = true;
        s.terminal = Terminal::Dropped;
        s.packet_set = cur;
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace scylla
