#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scylla/packet_set.hpp"

namespace scylla {

using Json = nlohmann::ordered_json;

// Registered action type codes. 0/102/104 come from the DPA format; the
// rest are assigned by this project.
enum ActionCode : int {
    kActForward = 0,
    kActDrop = 1,
    kActAccept = 2,
    kActSetEthSrc = 101,
    kActSetEthDst = 102,
    kActSetIpSrc = 103,
    kActSetVlan = 104,
    kActSetIpDst = 105,
    kActSetDepth = 106,
};

bool is_registered_action(int code);
bool is_set_field_action(int code);
int set_field_target(int code);  // field code written by a set-field action

struct Action {
    int type_code = 0;
    std::string value;
    std::optional<std::string> outgoing_interface_id;

    bool operator==(const Action&) const = default;
};

struct Rule {
    std::vector<MaskedValue> match;  // conjunction; empty = universe
    std::vector<Action> actions;
};

struct RuleTable {
    std::string name;
    std::vector<Rule> rules;  // priority = list position, earlier wins
};

struct Interface {
    std::string id;
    Json attributes;  // opaque; known keys: next_table, ingress_table, external
};

struct Dpa {
    std::string name;
    std::string vendor;
    std::string model;
    std::string timestamp;
    std::vector<Interface> interfaces;
    std::vector<RuleTable> rule_tables;
    Json extras;  // unknown top-level keys, preserved verbatim

    const RuleTable* find_table(const std::string& table_name) const;
    const Interface* find_interface(const std::string& interface_id) const;
};

struct TopologyLink {
    std::string device_a;
    std::string interface_a;
    std::string device_b;
    std::string interface_b;
};

struct EntryPoint {
    std::string device;
    std::string rule_table;

    bool operator<(const EntryPoint& o) const {
        return device < o.device || (device == o.device && rule_table < o.rule_table);
    }
    bool operator==(const EntryPoint&) const = default;
};

class Topology {
public:
    Topology() = default;
    Topology(std::vector<TopologyLink> links, std::vector<EntryPoint> entry_points);

    static Topology parse(const std::string& text);
    std::string serialize() const;

    const std::vector<TopologyLink>& links() const { return links_; }
    const std::vector<EntryPoint>& entry_points() const { return entry_points_; }

    // Peer endpoint of (device, interface), if a link is attached there.
    std::optional<std::pair<std::string, std::string>> peer(const std::string& device,
                                                            const std::string& interface) const;

private:
    std::vector<TopologyLink> links_;
    std::vector<EntryPoint> entry_points_;
    std::map<std::pair<std::string, std::string>, std::pair<std::string, std::string>> peers_;
};

Dpa parse_dpa(const std::string& document);
std::string serialize_dpa(const Dpa& dpa);  // canonical form; parse of it round-trips

Json masked_value_json(const MaskedValue& mv);
MaskedValue masked_value_from_json(const Json& mv);

// Canonical byte serialization of one rule, used for diffs and digests.
std::string canonical_rule_bytes(const Rule& rule);

// Names of rule tables whose rule lists differ (content or order).
std::set<std::string> semantic_diff(const Dpa& old_dpa, const Dpa& new_dpa);

// Conjunction of a rule's match atoms under the manager's schema.
PacketSet rule_match_set(PacketSetManager& mgr, const Rule& rule);

// Indices of rules whose match sets overlap the universe, in priority order.
std::vector<std::size_t> relevant_rule_indices(PacketSetManager& mgr, const RuleTable& table,
                                               const PacketSet& universe);

struct RelevantRuleHash {
    std::string hex;  // sha-256 of the ordered relevant-rule serialization

    bool operator==(const RelevantRuleHash&) const = default;
};

inline constexpr const char* kRuleDigestAlgorithm = "sha-256";

RelevantRuleHash relevant_rule_hash(PacketSetManager& mgr, const RuleTable& table,
                                    const PacketSet& universe);
RelevantRuleHash hash_rule_subsequence(const RuleTable& table,
                                       const std::vector<std::size_t>& indices);

std::string sha256_hex(const std::string& bytes);

// File-backed DPA store. Layout: <root>/devices/<device_id>.json and
// <root>/topology.json. Many concurrent readers, one writer per device.
class DpaStore {
public:
    explicit DpaStore(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }

    void store_dpa(const Dpa& dpa);
    Dpa load_dpa(const std::string& device_id) const;
    bool has_device(const std::string& device_id) const;
    std::vector<std::string> list_devices() const;

    void store_topology(const Topology& topology);
    Topology load_topology() const;

    void store_schema(const FieldSchema& schema);
    FieldSchema load_schema() const;  // production schema when absent

    std::size_t load_count() const { return load_count_; }

private:
    std::filesystem::path device_path(const std::string& device_id) const;

    std::filesystem::path root_;
    mutable std::size_t load_count_ = 0;
};

std::string read_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace scylla
