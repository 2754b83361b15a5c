#include "scylla/slice.hpp"

#include <algorithm>

namespace scylla {

SliceContext::SliceContext(std::shared_ptr<PacketSetManager> mgr, const DpaStore* store)
    : mgr_(std::move(mgr)), store_(store) {}

const Topology& SliceContext::topology() {
    if (!topology_) topology_ = store_->load_topology();
    return *topology_;
}

const Dpa& SliceContext::raw_dpa(const std::string& device) {
    auto it = raw_cache_.find(device);
    if (it != raw_cache_.end()) return it->second;
    if (!store_->has_device(device)) fail(ErrorCode::UnknownDevice, device);
    return raw_cache_.emplace(device, store_->load_dpa(device)).first->second;
}

bool SliceContext::device_known(const std::string& device) {
    return raw_cache_.count(device) > 0 || store_->has_device(device);
}

void SliceContext::invalidate_raw(const std::string& device) { raw_cache_.erase(device); }

void SliceContext::register_device(const std::string& device, const Dpa& dpa) {
    for (const RuleTable& t : dpa.rule_tables) {
        TableRef ref{device, t.name};
        if (tables_.count(ref)) continue;
        TableState state;
        state.rules = t;
        state.universe = mgr_->empty_set();
        state.model.hash = hash_rule_subsequence(t, {});
        tables_.emplace(ref, std::move(state));
        device_index_[device].insert(t.name);
    }
}

void SliceContext::ensure_device(const std::string& device) {
    if (device_index_.count(device)) return;
    register_device(device, raw_dpa(device));
}

void SliceContext::preload_all() {
    for (const std::string& device : store_->list_devices()) ensure_device(device);
}

void SliceContext::prebuild_full() {
    PacketSet full = mgr_->full_set();
    for (auto& [ref, state] : tables_) {
        state.universe = full;
        state.model = build_table_model(*mgr_, state.rules, state.universe);
        state.built = true;
    }
}

SliceContext::TableState& SliceContext::visit(const TableRef& ref, const PacketSet& ps) {
    ensure_device(ref.device);
    auto it = tables_.find(ref);
    if (it == tables_.end())
        fail(ErrorCode::NotFound, "no rule table " + ref.str());
    TableState& state = it->second;
    bool contained = mgr_->is_subset(ps, state.universe);
    if (!contained) state.universe = mgr_->unite(state.universe, ps);
    if (!contained || !state.built) {
        state.model = build_table_model(*mgr_, state.rules, state.universe);
        state.built = true;
    }
    if (!current_intent_.empty()) {
        touched_[current_intent_].insert(ref);
        for (std::size_t i : state.model.relevant)
            touched_rules_[current_intent_].insert(rule_key(ref, state.rules.rules[i]));
    }
    return state;
}

bool SliceContext::has_sliced_device(const std::string& device) const {
    return device_index_.count(device) > 0;
}

const SliceContext::TableState* SliceContext::peek(const TableRef& ref) const {
    auto it = tables_.find(ref);
    return it == tables_.end() ? nullptr : &it->second;
}

std::vector<TableRef> SliceContext::sliced_tables() const {
    std::vector<TableRef> out;
    out.reserve(tables_.size());
    for (const auto& [ref, state] : tables_) out.push_back(ref);
    return out;
}

void SliceContext::begin_intent(const std::string& intent_id) {
    current_intent_ = intent_id;
    touched_[intent_id].clear();
    touched_rules_[intent_id].clear();
    steps_[intent_id] = 0;
}

void SliceContext::end_intent() { current_intent_.clear(); }

void SliceContext::remove_intent(const std::string& intent_id) {
    touched_.erase(intent_id);
    touched_rules_.erase(intent_id);
    steps_.erase(intent_id);
}

std::vector<std::string> SliceContext::registered_intents() const {
    std::vector<std::string> out;
    out.reserve(touched_.size());
    for (const auto& [id, tables] : touched_) out.push_back(id);
    return out;
}

const std::set<TableRef>& SliceContext::touched_tables(const std::string& intent_id) const {
    static const std::set<TableRef> kEmpty;
    auto it = touched_.find(intent_id);
    return it == touched_.end() ? kEmpty : it->second;
}

std::set<std::string> SliceContext::touched_rule_keys(const std::string& intent_id) const {
    auto it = touched_rules_.find(intent_id);
    return it == touched_rules_.end() ? std::set<std::string>{} : it->second;
}

void SliceContext::record_step(const TableRef& ref, const std::vector<std::size_t>& rules) {
    if (!current_intent_.empty()) ++steps_[current_intent_];
    total_rule_traversals_ += rules.size();
    if (log_enabled_)
        for (std::size_t r : rules)
            traversal_log_.push_back(TraversalEvent{current_intent_, ref, r});
}

std::size_t SliceContext::steps(const std::string& intent_id) const {
    auto it = steps_.find(intent_id);
    return it == steps_.end() ? 0 : it->second;
}

SliceStats SliceContext::slice_stats() const {
    SliceStats stats;
    for (const auto& [ref, state] : tables_) {
        if (!state.built) continue;
        if (state.model.relevant.empty() && mgr_->is_empty(state.universe)) continue;
        ++stats.tables_modeled;
        stats.rules_modeled += state.model.relevant.size();
    }
    for (const auto& [intent, refs] : touched_) {
        std::size_t n = 0;
        for (const TableRef& ref : refs) {
            const TableState* state = peek(ref);
            if (state) n += state->model.relevant.size();
        }
        stats.per_intent_rules[intent] = n;
    }
    return stats;
}

Json SliceContext::slice_stats_json() const {
    SliceStats stats = slice_stats();
    Json out;
    out["rules_modeled"] = stats.rules_modeled;
    out["tables_modeled"] = stats.tables_modeled;
    out["per_intent"] = Json::object();
    for (const auto& [intent, rules] : stats.per_intent_rules) {
        Json entry;
        entry["rules"] = rules;
        entry["touched_rule_keys"] = Json::array();
        for (const std::string& key : touched_rule_keys(intent))
            entry["touched_rule_keys"].push_back(key);
        entry["touched_tables"] = Json::array();
        for (const TableRef& ref : touched_tables(intent))
            entry["touched_tables"].push_back(ref.str());
        out["per_intent"][intent] = std::move(entry);
    }
    out["digest_algorithm"] = kRuleDigestAlgorithm;
    return out;
}

void SliceContext::drop_table(const TableRef& ref) {
    tables_.erase(ref);
    auto it = device_index_.find(ref.device);
    if (it != device_index_.end()) {
        it->second.erase(ref.table);
        if (it->second.empty()) device_index_.erase(it);
    }
}

std::string rule_key(const TableRef& ref, const Rule& rule) {
    return ref.str() + "#" + sha256_hex(canonical_rule_bytes(rule)).substr(0, 12);
}

std::set<std::string> handle_update(SliceContext& ctx,
                                    const std::set<std::string>& updated_devices) {
    std::set<std::string> rechecks;
    std::set<TableRef> evicted;
    for (const std::string& device : updated_devices) {
        if (!ctx.has_sliced_device(device)) continue;  // soundly ignored
        ctx.invalidate_raw(device);
        const Dpa& fresh = ctx.raw_dpa(device);
        std::vector<TableRef> registered;
        for (const std::string& table : ctx.device_index().at(device))
            registered.push_back(TableRef{device, table});
        for (const TableRef& ref : registered) {
            auto& state = ctx.tables().at(ref);
            const RuleTable* new_table = fresh.find_table(ref.table);
            if (!new_table) {
                evicted.insert(ref);
                ctx.drop_table(ref);
                continue;
            }
            RelevantRuleHash fresh_digest = relevant_rule_hash(ctx.mgr(), *new_table, state.universe);
            if (fresh_digest == state.model.hash) {
                state.rules = *new_table;  // irrelevant edits only
                continue;
            }
            state.rules = *new_table;
            state.model.flow_nodes.clear();
            state.built = false;
            evicted.insert(ref);
        }
        ctx.register_device(device, fresh);  // tables added by the update
    }
    if (evicted.empty()) return rechecks;
    for (const std::string& intent : ctx.registered_intents()) {
        const std::set<TableRef>& touched = ctx.touched_tables(intent);
        for (const TableRef& ref : evicted)
            if (touched.count(ref)) {
                rechecks.insert(intent);
                break;
            }
    }
    return rechecks;
}

std::vector<TableRef> garbage_collect(SliceContext& ctx) {
    std::set<TableRef> in_use;
    for (const std::string& intent : ctx.registered_intents())
        for (const TableRef& ref : ctx.touched_tables(intent)) in_use.insert(ref);
    std::vector<TableRef> evicted;
    for (const TableRef& ref : ctx.sliced_tables())
        if (!in_use.count(ref)) evicted.push_back(ref);
    for (const TableRef& ref : evicted) ctx.drop_table(ref);
    return evicted;
}

}  // namespace scylla
