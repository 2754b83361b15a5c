#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "scylla/errors.hpp"

namespace scylla {

// Well-known field codes. Codes 4, 6, 12, 13 are fixed by the DPA format;
// the rest are assigned by this project.
enum FieldCode : int {
    kFieldEthSrc = 3,
    kFieldEthDst = 4,
    kFieldVlan = 6,
    kFieldIpProto = 10,
    kFieldIpSrc = 12,
    kFieldIpDst = 13,
    kFieldL4Src = 14,
    kFieldL4Dst = 15,
};

struct FieldDef {
    int code = 0;
    std::string name;
    int bit_width = 0;
    int depth_levels = 1;
};

// One matched field of a rule: value/mask rendered in field-native notation
// (dotted quad for 32-bit IP fields, colon hex for 48-bit MAC fields,
// decimal otherwise). An empty mask means exact full-width match.
struct MaskedValue {
    int field_code = 0;
    std::string value;
    std::string mask;
    int depth = 0;

    bool operator==(const MaskedValue&) const = default;
};

// A (field, depth) pair resolved against a schema, with parsed bit patterns.
struct DimMatch {
    int dim = 0;
    std::uint64_t value = 0;
    std::uint64_t mask = 0;  // set bits are constrained
};

class FieldSchema {
public:
    FieldSchema() = default;
    explicit FieldSchema(std::vector<FieldDef> fields);

    // The default schema used for real DPA documents.
    static FieldSchema production();

    // Loads a schema from its JSON form and enforces that the reserved
    // codes 4/6/12/13 are present with their fixed meanings. Schemas built
    // directly from FieldDef lists (e.g. reduced test schemas) skip that
    // check.
    static FieldSchema from_json_text(const std::string& text);
    std::string to_json_text() const;

    const std::vector<FieldDef>& fields() const { return fields_; }
    int total_bits() const { return total_bits_; }
    int dim_count() const { return static_cast<int>(dims_.size()); }

    bool has_field(int code) const;
    const FieldDef& field(int code) const;

    int dim_index(int code, int depth) const;   // throws UnknownFieldCode / WidthMismatch
    int dim_offset(int dim) const { return dims_[dim].offset; }
    int dim_width(int dim) const { return dims_[dim].width; }
    int dim_field_code(int dim) const { return dims_[dim].code; }
    int dim_depth(int dim) const { return dims_[dim].depth; }

    // Value parsing/rendering in field-native notation.
    std::uint64_t parse_value(int code, const std::string& text) const;
    std::string format_value(int code, std::uint64_t value) const;
    DimMatch parse_masked_value(const MaskedValue& mv) const;
    MaskedValue format_dim_match(const DimMatch& dm) const;

    // Concrete headers are bit vectors packed into a single word
    // (only valid when total_bits <= 63; used by small test schemas).
    std::uint64_t header_get(std::uint64_t header, int dim) const;
    std::uint64_t header_set(std::uint64_t header, int dim, std::uint64_t value) const;

    bool operator==(const FieldSchema& other) const { return fields_same(other); }

private:
    struct DimInfo {
        int code = 0;
        int depth = 0;
        int offset = 0;
        int width = 0;
    };

    bool fields_same(const FieldSchema& other) const;

    std::vector<FieldDef> fields_;
    std::vector<DimInfo> dims_;
    std::unordered_map<int, int> code_to_field_;
    std::unordered_map<std::uint64_t, int> dim_lookup_;
    int total_bits_ = 0;
};

class PacketSetManager;

// A canonical symbolic set of packet headers. Immutable value; structural
// equality coincides with denotational equality. All sets combined by one
// operation must come from the same manager.
class PacketSet {
public:
    PacketSet() = default;

    bool valid() const { return manager_ != nullptr; }
    const std::shared_ptr<PacketSetManager>& manager() const { return manager_; }
    std::uint32_t node() const { return node_; }

    bool operator==(const PacketSet& other) const {
        return manager_.get() == other.manager_.get() && node_ == other.node_;
    }

private:
    friend class PacketSetManager;
    PacketSet(std::shared_ptr<PacketSetManager> manager, std::uint32_t node)
        : manager_(std::move(manager)), node_(node) {}

    std::shared_ptr<PacketSetManager> manager_;
    std::uint32_t node_ = 0;
};

// Hash-consed BDD over the schema's header bits. Node-sharing caches are
// guarded by an internal mutex so sets can be shared across workers.
class PacketSetManager : public std::enable_shared_from_this<PacketSetManager> {
public:
    static std::shared_ptr<PacketSetManager> create(FieldSchema schema);

    const FieldSchema& schema() const { return schema_; }

    PacketSet empty_set();
    PacketSet full_set();
    PacketSet atom(const MaskedValue& mv);
    PacketSet from_dims(const std::vector<DimMatch>& conjunction);

    PacketSet intersect(const PacketSet& a, const PacketSet& b);
    PacketSet unite(const PacketSet& a, const PacketSet& b);
    PacketSet complement(const PacketSet& a);
    bool is_empty(const PacketSet& a) const;
    bool is_subset(const PacketSet& a, const PacketSet& b);

    // Existentially projects one (field, depth) dimension.
    PacketSet project_out(const PacketSet& a, int dim);
    // Rewrites one dimension to a constant: project, then constrain.
    PacketSet assign(const PacketSet& a, int dim, std::uint64_t value);
    // Moves depth-0 content of every multi-level field to depth 1 (push)
    // or depth 1 to depth 0 (pop); the vacated level is set to zero.
    PacketSet shift_depth(const PacketSet& a, bool push);

    // Yields every concrete header exactly once; requires
    // total_bits <= max_bits (UniverseTooLarge otherwise).
    void enumerate(const PacketSet& a, const std::function<void(std::uint64_t)>& sink,
                   int max_bits = 24) const;
    std::vector<std::uint64_t> enumerate_vector(const PacketSet& a, int max_bits = 24) const;

    // Irredundant-path cube cover; each cube is a conjunction of per-dim
    // masked values. Used for witness and message serialization.
    std::vector<std::vector<MaskedValue>> to_terms(const PacketSet& a);

    std::size_t node_count() const;

private:
    struct Node {
        std::uint32_t var;
        std::uint32_t lo;
        std::uint32_t hi;
    };

    explicit PacketSetManager(FieldSchema schema);

    void check_same_manager(const PacketSet& a) const;
    PacketSet wrap(std::uint32_t node);

    std::uint32_t mk(std::uint32_t var, std::uint32_t lo, std::uint32_t hi);
    std::uint32_t apply_and(std::uint32_t a, std::uint32_t b);
    std::uint32_t apply_or(std::uint32_t a, std::uint32_t b);
    std::uint32_t apply_not(std::uint32_t a);
    std::uint32_t quantify(std::uint32_t a, int lo_var, int hi_var, std::uint64_t cache_tag);
    std::uint32_t rename(std::uint32_t a, const std::vector<std::int32_t>& var_map,
                         std::uint64_t cache_tag);
    std::uint32_t cube(const std::vector<std::pair<std::uint32_t, bool>>& literals);

    FieldSchema schema_;
    std::vector<Node> nodes_;
    std::unordered_map<std::uint64_t, std::uint32_t> unique_;
    std::unordered_map<std::uint64_t, std::uint32_t> cache_;
    mutable std::mutex mu_;
};

}  // namespace scylla
