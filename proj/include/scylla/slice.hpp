#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scylla/flow_node.hpp"

namespace scylla {

struct TraversalEvent {
    std::string intent_id;
    TableRef table;
    std::size_t rule_index;
};

struct SliceStats {
    std::size_t rules_modeled = 0;
    std::size_t tables_modeled = 0;
    std::map<std::string, std::size_t> per_intent_rules;  // intent -> touched relevant rules
};

// Per-checker retained model fragment: lazily loaded rule tables with their
// universes, flow nodes and relevant-rule hashes, plus the registry of which
// intent touched which table. Confined to a single worker.
class SliceContext : public HopResolver {
public:
    struct TableState {
        RuleTable rules;
        PacketSet universe;
        TableModel model;
        bool built = false;  // model matches (rules, universe); false after eviction
    };

    SliceContext(std::shared_ptr<PacketSetManager> mgr, const DpaStore* store);

    PacketSetManager& mgr() const { return *mgr_; }
    const std::shared_ptr<PacketSetManager>& mgr_ptr() const { return mgr_; }
    const FieldSchema& schema() const { return mgr_->schema(); }
    const DpaStore* store() const { return store_; }

    // HopResolver: read-only access, no slice registration.
    const Topology& topology() override;
    const Dpa& raw_dpa(const std::string& device) override;
    bool device_known(const std::string& device) override;

    // Loads every device eagerly (baseline methods).
    void preload_all();
    // Builds every table of every loaded device over the full header space.
    void prebuild_full();

    // Algorithm-2 universe step: loads the device on first sight (all its
    // tables start with an empty universe), expands the universe when ps is
    // not contained, and rebuilds flow nodes as needed. Records the touch
    // for the current intent.
    TableState& visit(const TableRef& ref, const PacketSet& ps);

    bool has_sliced_device(const std::string& device) const;
    const TableState* peek(const TableRef& ref) const;
    std::vector<TableRef> sliced_tables() const;
    const std::map<std::string, std::set<std::string>>& device_index() const {
        return device_index_;
    }

    // Intent registry.
    void begin_intent(const std::string& intent_id);
    void end_intent();
    const std::string& current_intent() const { return current_intent_; }
    void remove_intent(const std::string& intent_id);
    bool has_intent(const std::string& intent_id) const { return touched_.count(intent_id) > 0; }
    std::vector<std::string> registered_intents() const;
    const std::set<TableRef>& touched_tables(const std::string& intent_id) const;
    std::set<std::string> touched_rule_keys(const std::string& intent_id) const;

    // Traversal accounting (rule reuse, per-intent steps).
    void record_step(const TableRef& ref, const std::vector<std::size_t>& rules);
    std::size_t steps(const std::string& intent_id) const;
    std::size_t total_rule_traversals() const { return total_rule_traversals_; }
    const std::vector<TraversalEvent>& traversal_log() const { return traversal_log_; }
    void set_log_enabled(bool on) { log_enabled_ = on; }

    SliceStats slice_stats() const;
    Json slice_stats_json() const;

    // Used by handle_update; not part of the traversal surface.
    std::map<TableRef, TableState>& tables() { return tables_; }
    void register_device(const std::string& device, const Dpa& dpa);
    void drop_table(const TableRef& ref);
    void invalidate_raw(const std::string& device);

private:
    void ensure_device(const std::string& device);

    std::shared_ptr<PacketSetManager> mgr_;
    const DpaStore* store_;
    std::optional<Topology> topology_;
    std::map<std::string, Dpa> raw_cache_;
    std::map<TableRef, TableState> tables_;
    std::map<std::string, std::set<std::string>> device_index_;  // device -> sliced tables
    std::map<std::string, std::set<TableRef>> touched_;
    std::map<std::string, std::set<std::string>> touched_rules_;
    std::map<std::string, std::size_t> steps_;
    std::string current_intent_;
    std::vector<TraversalEvent> traversal_log_;
    std::size_t total_rule_traversals_ = 0;
    bool log_enabled_ = true;
};

std::string rule_key(const TableRef& ref, const Rule& rule);

// Reacts to a network update: devices not present in the slice are ignored
// outright; for present devices the relevant-rule hash of each table is
// recomputed against its stored universe and tables with changed digests
// have their flow nodes evicted. Returns the intents that must be rechecked.
std::set<std::string> handle_update(SliceContext& ctx, const std::set<std::string>& updated_devices);

// Removes tables touched by no registered intent. Universes of surviving
// tables are left as-is; they only shrink via eviction plus re-traversal.
std::vector<TableRef> garbage_collect(SliceContext& ctx);

}  // namespace scylla
