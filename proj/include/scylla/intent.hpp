#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scylla/traversal.hpp"

namespace scylla {

// Intent type codes. 1 and 7 come from the intent format; the rest are
// assigned by this project.
enum IntentType : int {
    kIntentLoopFreedom = 1,
    kIntentSegmentation = 2,
    kIntentWaypoint = 3,
    kIntentBlackHole = 4,
    kIntentFlowConsistency = 5,
    kIntentReachability = 7,
};

bool is_registered_intent_type(int code);
const char* intent_type_name(int code);

struct EndpointRef {
    std::string vm_name;
    std::string ip;
    std::string mac;
    std::string model_key;

    bool operator==(const EndpointRef&) const = default;
};

// Initial-packet-set expression: terms are bracketed masked-value lists
// (conjunction inside); `&` intersects, `|` unites, `^` complements the
// following term, parentheses group.
struct PacketExpr {
    enum class Kind { Term, And, Or, Not };
    Kind kind = Kind::Term;
    std::vector<MaskedValue> term;
    std::shared_ptr<const PacketExpr> lhs;
    std::shared_ptr<const PacketExpr> rhs;
};
using PacketExprPtr = std::shared_ptr<const PacketExpr>;

PacketExprPtr parse_packet_expr(const std::string& text);
std::string packet_expr_text(const PacketExprPtr& expr);
PacketSet eval_packet_expr(PacketSetManager& mgr, const PacketExprPtr& expr);

// Cube-cover serialization of a set in the same expression grammar;
// parsing it back yields an equal set.
std::string packet_set_text(PacketSetManager& mgr, const PacketSet& ps);
PacketSet packet_set_from_text(PacketSetManager& mgr, const std::string& text);

struct IntentSpec {
    std::string id;
    int type_code = 0;
    std::vector<EndpointRef> origin_set;
    std::vector<EndpointRef> target_set;
    std::vector<EndpointRef> waypoint_set;
    std::string target_subnet;  // raw expression text; empty = full universe
    bool bidirectional = false;

    std::size_t width() const {
        return std::max<std::size_t>(1, origin_set.size()) *
               std::max<std::size_t>(1, target_set.size());
    }
};

IntentSpec parse_intent(const std::string& document);
Json intent_json(const IntentSpec& intent);
IntentSpec intent_from_json(const Json& doc);

// Canonical byte form of the parameters; intents with identical parameters
// hash identically regardless of id.
std::string canonical_parameters(const IntentSpec& intent);

enum class Outcome { Holds, Violated, Error };
const char* outcome_name(Outcome o);
Outcome outcome_from_name(const std::string& name);

struct Verdict {
    std::string intent_id;
    Outcome outcome = Outcome::Error;
    std::optional<Json> witness;
    Json stats = Json::object();   // tables_touched, rules_modeled, steps
    Json detail = Json::object();  // type-specific extras or error info
};

Json verdict_json(const Verdict& v);
Verdict verdict_from_json(const Json& doc);

Json path_json(PacketSetManager& mgr, const Path& path);
Path path_from_json(PacketSetManager& mgr, const Json& doc);

// Devices named by endpoint descriptors: modelKey first, then vmName.
std::set<std::string> resolve_endpoints(SliceContext& ctx,
                                        const std::vector<EndpointRef>& endpoints);

// (entry table, initial set) seeds: the origin devices' entry points, or
// every topology entry point when no origin is given.
std::vector<std::pair<TableRef, PacketSet>> starting_points(SliceContext& ctx,
                                                            const IntentSpec& intent,
                                                            const PacketSet& initial);

// Violation predicate for one intent under a context (endpoints resolved
// eagerly). Consistency intents use a trace collector inside verify and are
// not built here.
IntentPredicate predicate_for(SliceContext& ctx, const IntentSpec& intent);

Verdict verify(const IntentSpec& intent, SliceContext& ctx,
               std::size_t max_hops = kDefaultMaxHops);

bool is_composite(const IntentSpec& intent);
std::vector<IntentSpec> disaggregate(const IntentSpec& intent);  // NotComposite otherwise
Verdict aggregate(const IntentSpec& intent, const std::vector<Verdict>& sub_verdicts);

// Directional flip for bidirectional intents: swaps origin/target and the
// src/dst field codes inside the initial-set expression.
IntentSpec reverse_direction(const IntentSpec& intent);

// Walks the witness path through the context and confirms every consecutive
// vertex is a successor of the previous one with an equal packet set.
bool replay_witness(SliceContext& ctx, const Json& witness);

}  // namespace scylla
