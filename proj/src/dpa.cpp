#include "scylla/dpa.hpp"

#include <openssl/evp.h>

#include <fstream>

namespace scylla {

namespace {

const std::set<int> kRegisteredActions = {kActForward, kActDrop,     kActAccept,
                                          kActSetEthSrc, kActSetEthDst, kActSetIpSrc,
                                          kActSetVlan,  kActSetIpDst, kActSetDepth};

Json take_extras(const Json& obj, std::initializer_list<const char*> known) {
    Json extras = Json::object();
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool is_known = false;
        for (const char* k : known)
            if (it.key() == k) is_known = true;
        if (!is_known) extras[it.key()] = it.value();
    }
    return extras;
}

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
    fail(ErrorCode::SchemaViolation, path + ": " + what);
}

std::string require_string(const Json& obj, const char* key, const std::string& path) {
    if (!obj.contains(key) || !obj[key].is_string()) schema_error(path, std::string(key) + " must be a string");
    return obj[key].get<std::string>();
}

}  // namespace

bool is_registered_action(int code) { return kRegisteredActions.count(code) > 0; }

bool is_set_field_action(int code) {
    return code == kActSetEthSrc || code == kActSetEthDst || code == kActSetIpSrc ||
           code == kActSetVlan || code == kActSetIpDst;
}

int set_field_target(int code) {
    switch (code) {
        case kActSetEthSrc: return kFieldEthSrc;
        case kActSetEthDst: return kFieldEthDst;
        case kActSetIpSrc: return kFieldIpSrc;
        case kActSetVlan: return kFieldVlan;
        case kActSetIpDst: return kFieldIpDst;
    }
    fail(ErrorCode::UnknownActionCode, "not a set-field action: " + std::to_string(code));
}

const RuleTable* Dpa::find_table(const std::string& table_name) const {
    for (const RuleTable& t : rule_tables)
        if (t.name == table_name) return &t;
    return nullptr;
}

const Interface* Dpa::find_interface(const std::string& interface_id) const {
    for (const Interface& i : interfaces)
        if (i.id == interface_id) return &i;
    return nullptr;
}

Topology::Topology(std::vector<TopologyLink> links, std::vector<EntryPoint> entry_points)
    : links_(std::move(links)), entry_points_(std::move(entry_points)) {
    for (const TopologyLink& l : links_) {
        auto a = std::make_pair(l.device_a, l.interface_a);
        auto b = std::make_pair(l.device_b, l.interface_b);
        if (peers_.count(a) || peers_.count(b))
            fail(ErrorCode::SchemaViolation, "interface attached to more than one link: " +
                                                 l.device_a + "/" + l.interface_a);
        peers_[a] = b;
        peers_[b] = a;
    }
}

Topology Topology::parse(const std::string& text) {
    Json doc = Json::parse(text, nullptr, false, true);
    if (doc.is_discarded()) fail(ErrorCode::MalformedJson, "topology is not valid JSON");
    std::vector<TopologyLink> links;
    std::vector<EntryPoint> entries;
    for (const Json& l : doc.value("links", Json::array())) {
        links.push_back(TopologyLink{require_string(l, "device_a", "links"),
                                     require_string(l, "interface_a", "links"),
                                     require_string(l, "device_b", "links"),
                                     require_string(l, "interface_b", "links")});
    }
    for (const Json& e : doc.value("entry_points", Json::array())) {
        entries.push_back(EntryPoint{require_string(e, "device", "entry_points"),
                                     require_string(e, "rule_table", "entry_points")});
    }
    return Topology(std::move(links), std::move(entries));
}

std::string Topology::serialize() const {
    Json doc;
    doc["links"] = Json::array();
    for (const TopologyLink& l : links_)
        doc["links"].push_back({{"device_a", l.device_a},
                                {"interface_a", l.interface_a},
                                {"device_b", l.device_b},
                                {"interface_b", l.interface_b}});
    doc["entry_points"] = Json::array();
    for (const EntryPoint& e : entry_points_)
        doc["entry_points"].push_back({{"device", e.device}, {"rule_table", e.rule_table}});
    return doc.dump(2) + "\n";
}

std::optional<std::pair<std::string, std::string>> Topology::peer(
    const std::string& device, const std::string& interface) const {
    auto it = peers_.find({device, interface});
    if (it == peers_.end()) return std::nullopt;
    return it->second;
}

namespace {

MaskedValue parse_masked_value_json(const Json& mv, const std::string& path) {
    MaskedValue out;
    if (!mv.contains("field_type") || !mv["field_type"].is_number_integer())
        schema_error(path, "field_type must be an integer");
    out.field_code = mv["field_type"].get<int>();
    out.value = require_string(mv, "value", path);
    if (mv.contains("mask")) out.mask = require_string(mv, "mask", path);
    if (mv.contains("depth")) {
        if (!mv["depth"].is_number_integer() || mv["depth"].get<int>() < 0)
            schema_error(path, "depth must be a non-negative integer");
        out.depth = mv["depth"].get<int>();
    }
    return out;
}

Action parse_action_json(const Json& a, const std::string& path) {
    Action out;
    if (!a.contains("type") || !a["type"].is_number_integer())
        schema_error(path, "type must be an integer");
    out.type_code = a["type"].get<int>();
    if (!is_registered_action(out.type_code))
        fail(ErrorCode::UnknownActionCode,
             path + ": action type " + std::to_string(out.type_code));
    if (a.contains("value")) out.value = require_string(a, "value", path);
    if (a.contains("outgoing_interface_id") && !a["outgoing_interface_id"].is_null())
        out.outgoing_interface_id = require_string(a, "outgoing_interface_id", path);
    if (out.type_code == kActForward && !out.outgoing_interface_id)
        schema_error(path, "forward action requires outgoing_interface_id");
    if ((is_set_field_action(out.type_code) || out.type_code == kActSetDepth) && out.value.empty())
        schema_error(path, "set action requires a value");
    return out;
}

}  // namespace

Dpa parse_dpa(const std::string& document) {
    Json doc = Json::parse(document, nullptr, false, /*ignore_comments=*/true);
    if (doc.is_discarded()) fail(ErrorCode::MalformedJson, "DPA document is not valid JSON");
    if (!doc.is_object()) fail(ErrorCode::SchemaViolation, "DPA document must be an object");
    Dpa dpa;
    dpa.name = require_string(doc, "name", "$");
    if (doc.contains("vendor")) dpa.vendor = require_string(doc, "vendor", "$");
    if (doc.contains("model")) dpa.model = require_string(doc, "model", "$");
    if (doc.contains("timestamp")) dpa.timestamp = require_string(doc, "timestamp", "$");
    if (doc.contains("interfaces")) {
        if (!doc["interfaces"].is_array()) schema_error("$.interfaces", "must be an array");
        for (const Json& i : doc["interfaces"]) {
            Interface iface;
            iface.id = require_string(i, "id", "$.interfaces");
            iface.attributes = i.value("attributes", Json::object());
            dpa.interfaces.push_back(std::move(iface));
        }
    }
    if (!doc.contains("rule_tables") || !doc["rule_tables"].is_array())
        schema_error("$.rule_tables", "must be an array");
    std::set<std::string> table_names;
    for (std::size_t ti = 0; ti < doc["rule_tables"].size(); ++ti) {
        const Json& t = doc["rule_tables"][ti];
        std::string tpath = "$.rule_tables[" + std::to_string(ti) + "]";
        RuleTable table;
        table.name = require_string(t, "name", tpath);
        if (!table_names.insert(table.name).second)
            schema_error(tpath, "duplicate table name " + table.name);
        for (std::size_t ri = 0; ri < t.value("rules", Json::array()).size(); ++ri) {
            const Json& r = t["rules"][ri];
            std::string rpath = tpath + ".rules[" + std::to_string(ri) + "]";
            Rule rule;
            if (r.contains("match")) {
                const Json& m = r["match"];
                if (!m.is_object() || !m.contains("masked_values") || !m["masked_values"].is_array())
                    schema_error(rpath, "match must contain a masked_values array");
                for (const Json& mv : m["masked_values"])
                    rule.match.push_back(parse_masked_value_json(mv, rpath + ".match"));
            }
            for (const Json& a : r.value("actions", Json::array()))
                rule.actions.push_back(parse_action_json(a, rpath + ".actions"));
            table.rules.push_back(std::move(rule));
        }
        dpa.rule_tables.push_back(std::move(table));
    }
    dpa.extras = take_extras(doc, {"name", "vendor", "model", "timestamp", "interfaces",
                                   "rule_tables"});
    return dpa;
}

Json masked_value_json(const MaskedValue& mv) {
    return Json{{"field_type", mv.field_code},
                {"value", mv.value},
                {"mask", mv.mask},
                {"depth", mv.depth}};
}

MaskedValue masked_value_from_json(const Json& mv) {
    return parse_masked_value_json(mv, "masked_value");
}

namespace {

Json action_json(const Action& a) {
    Json out{{"type", a.type_code}, {"value", a.value}};
    if (a.outgoing_interface_id)
        out["outgoing_interface_id"] = *a.outgoing_interface_id;
    else
        out["outgoing_interface_id"] = nullptr;
    return out;
}

Json rule_json(const Rule& rule) {
    Json match;
    match["masked_values"] = Json::array();
    for (const MaskedValue& mv : rule.match) match["masked_values"].push_back(masked_value_json(mv));
    Json actions = Json::array();
    for (const Action& a : rule.actions) actions.push_back(action_json(a));
    return Json{{"match", match}, {"actions", actions}};
}

}  // namespace

std::string serialize_dpa(const Dpa& dpa) {
    Json doc;
    doc["name"] = dpa.name;
    doc["vendor"] = dpa.vendor;
    doc["model"] = dpa.model;
    doc["timestamp"] = dpa.timestamp;
    doc["interfaces"] = Json::array();
    for (const Interface& i : dpa.interfaces)
        doc["interfaces"].push_back({{"id", i.id}, {"attributes", i.attributes}});
    doc["rule_tables"] = Json::array();
    for (const RuleTable& t : dpa.rule_tables) {
        Json table{{"name", t.name}};
        table["rules"] = Json::array();
        for (const Rule& r : t.rules) table["rules"].push_back(rule_json(r));
        doc["rule_tables"].push_back(std::move(table));
    }
    for (auto it = dpa.extras.begin(); it != dpa.extras.end(); ++it) doc[it.key()] = it.value();
    return doc.dump(2) + "\n";
}

std::string canonical_rule_bytes(const Rule& rule) { return rule_json(rule).dump(); }

std::set<std::string> semantic_diff(const Dpa& old_dpa, const Dpa& new_dpa) {
    if (old_dpa.name != new_dpa.name)
        fail(ErrorCode::DeviceMismatch, old_dpa.name + " vs " + new_dpa.name);
    auto table_bytes = [](const Dpa& d) {
        std::map<std::string, std::string> out;
        for (const RuleTable& t : d.rule_tables) {
            std::string bytes;
            for (const Rule& r : t.rules) {
                std::string rb = canonical_rule_bytes(r);
                bytes += std::to_string(rb.size()) + ":" + rb;
            }
            out[t.name] = std::move(bytes);
        }
        return out;
    };
    std::map<std::string, std::string> old_tables = table_bytes(old_dpa);
    std::map<std::string, std::string> new_tables = table_bytes(new_dpa);
    std::set<std::string> changed;
    for (const auto& [name, bytes] : old_tables) {
        auto it = new_tables.find(name);
        if (it == new_tables.end() || it->second != bytes) changed.insert(name);
    }
    for (const auto& [name, bytes] : new_tables)
        if (!old_tables.count(name)) changed.insert(name);
    return changed;
}

PacketSet rule_match_set(PacketSetManager& mgr, const Rule& rule) {
    std::vector<DimMatch> dims;
    dims.reserve(rule.match.size());
    for (const MaskedValue& mv : rule.match) dims.push_back(mgr.schema().parse_masked_value(mv));
    return mgr.from_dims(dims);
}

std::vector<std::size_t> relevant_rule_indices(PacketSetManager& mgr, const RuleTable& table,
                                               const PacketSet& universe) {
    std::vector<std::size_t> out;
    if (mgr.is_empty(universe)) return out;
    for (std::size_t i = 0; i < table.rules.size(); ++i) {
        PacketSet m = rule_match_set(mgr, table.rules[i]);
        if (!mgr.is_empty(mgr.intersect(m, universe))) out.push_back(i);
    }
    return out;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

RelevantRuleHash hash_rule_subsequence(const RuleTable& table,
                                       const std::vector<std::size_t>& indices) {
    std::string bytes;
    for (std::size_t i : indices) {
        std::string rb = canonical_rule_bytes(table.rules[i]);
        bytes += std::to_string(rb.size()) + ":" + rb;
    }
    return RelevantRuleHash{sha256_hex(bytes)};
}

RelevantRuleHash relevant_rule_hash(PacketSetManager& mgr, const RuleTable& table,
                                    const PacketSet& universe) {
    return hash_rule_subsequence(table, relevant_rule_indices(mgr, table, universe));
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoFailure, "cannot read " + path.string());
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorCode::IoFailure, "cannot write " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

DpaStore::DpaStore(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_ / "devices");
}

std::filesystem::path DpaStore::device_path(const std::string& device_id) const {
    return root_ / "devices" / (device_id + ".json");
}

void DpaStore::store_dpa(const Dpa& dpa) {
    write_file_atomic(device_path(dpa.name), serialize_dpa(dpa));
}

Dpa DpaStore::load_dpa(const std::string& device_id) const {
    std::filesystem::path p = device_path(device_id);
    if (!std::filesystem::exists(p)) fail(ErrorCode::NotFound, "no such device: " + device_id);
    ++load_count_;
    return parse_dpa(read_file(p));
}

bool DpaStore::has_device(const std::string& device_id) const {
    return std::filesystem::exists(device_path(device_id));
}

std::vector<std::string> DpaStore::list_devices() const {
    std::vector<std::string> out;
    std::filesystem::path dir = root_ / "devices";
    if (!std::filesystem::exists(dir)) return out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".json") out.push_back(entry.path().stem().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

void DpaStore::store_topology(const Topology& topology) {
    write_file_atomic(root_ / "topology.json", topology.serialize());
}

Topology DpaStore::load_topology() const {
    std::filesystem::path p = root_ / "topology.json";
    if (!std::filesystem::exists(p)) fail(ErrorCode::NotFound, "no topology.json in store");
    return Topology::parse(read_file(p));
}

void DpaStore::store_schema(const FieldSchema& schema) {
    write_file_atomic(root_ / "schema.json", schema.to_json_text());
}

FieldSchema DpaStore::load_schema() const {
    std::filesystem::path p = root_ / "schema.json";
    if (!std::filesystem::exists(p)) return FieldSchema::production();
    return FieldSchema::from_json_text(read_file(p));
}

}  // namespace scylla
