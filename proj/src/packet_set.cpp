#include "scylla/packet_set.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include <nlohmann/json.hpp>

namespace scylla {

namespace {

constexpr std::uint32_t kFalse = 0;
constexpr std::uint32_t kTrue = 1;
constexpr std::uint32_t kTermVar = 0xFFFFFFFF;

enum OpTag : std::uint64_t {
    kOpAnd = 1,
    kOpOr = 2,
    kOpNot = 3,
    kOpQuant = 4,
    kOpRename = 5,
};

std::uint64_t pack3(std::uint64_t op, std::uint64_t a, std::uint64_t b) {
    return (op << 58) | (a << 29) | b;
}

std::uint64_t width_mask(int width) {
    return width >= 64 ? ~0ULL : ((1ULL << width) - 1);
}

bool parse_u64(const std::string& text, std::uint64_t& out) {
    if (text.empty()) return false;
    const char* first = text.data();
    const char* last = first + text.size();
    auto res = std::from_chars(first, last, out, 10);
    return res.ec == std::errc() && res.ptr == last;
}

}  // namespace

FieldSchema::FieldSchema(std::vector<FieldDef> fields) : fields_(std::move(fields)) {
    int offset = 0;
    for (std::size_t i = 0; i < fields_.size(); ++i) {
        const FieldDef& f = fields_[i];
        if (f.bit_width <= 0 || f.bit_width > 64)
            fail(ErrorCode::WidthMismatch, "field " + f.name + " has invalid bit width");
        if (f.depth_levels <= 0)
            fail(ErrorCode::SchemaViolation, "field " + f.name + " has invalid depth_levels");
        if (code_to_field_.count(f.code))
            fail(ErrorCode::SchemaViolation, "duplicate field code " + std::to_string(f.code));
        code_to_field_[f.code] = static_cast<int>(i);
        for (int d = 0; d < f.depth_levels; ++d) {
            int dim = static_cast<int>(dims_.size());
            dims_.push_back(DimInfo{f.code, d, offset, f.bit_width});
            dim_lookup_[(static_cast<std::uint64_t>(f.code) << 8) | d] = dim;
            offset += f.bit_width;
        }
    }
    total_bits_ = offset;
}

FieldSchema FieldSchema::production() {
    return FieldSchema({
        {kFieldEthSrc, "eth_src", 48, 2},
        {kFieldEthDst, "eth_dst", 48, 2},
        {kFieldVlan, "vlan", 12, 2},
        {kFieldIpProto, "ip_proto", 8, 2},
        {kFieldIpSrc, "ip_src", 32, 2},
        {kFieldIpDst, "ip_dst", 32, 2},
        {kFieldL4Src, "l4_src", 16, 2},
        {kFieldL4Dst, "l4_dst", 16, 2},
    });
}

FieldSchema FieldSchema::from_json_text(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text, nullptr, false, true);
    if (doc.is_discarded()) fail(ErrorCode::MalformedJson, "schema document is not valid JSON");
    if (!doc.is_object() || !doc.contains("fields") || !doc["fields"].is_array())
        fail(ErrorCode::SchemaViolation, "schema document missing fields array");
    std::vector<FieldDef> fields;
    for (const auto& f : doc["fields"]) {
        FieldDef def;
        def.code = f.at("code").get<int>();
        def.name = f.at("name").get<std::string>();
        def.bit_width = f.at("bit_width").get<int>();
        def.depth_levels = f.value("depth_levels", 1);
        fields.push_back(std::move(def));
    }
    FieldSchema schema(std::move(fields));
    static const std::pair<int, const char*> kReserved[] = {
        {kFieldEthDst, "eth_dst"}, {kFieldVlan, "vlan"},
        {kFieldIpSrc, "ip_src"},   {kFieldIpDst, "ip_dst"}};
    for (auto [code, name] : kReserved) {
        if (!schema.has_field(code))
            fail(ErrorCode::SchemaViolation,
                 std::string("schema must define field code ") + std::to_string(code));
        if (schema.field(code).name != name)
            fail(ErrorCode::SchemaViolation,
                 std::string("field code ") + std::to_string(code) + " must be named " + name);
    }
    return schema;
}

std::string FieldSchema::to_json_text() const {
    nlohmann::ordered_json doc;
    doc["fields"] = nlohmann::ordered_json::array();
    for (const FieldDef& f : fields_) {
        doc["fields"].push_back({{"code", f.code},
                                 {"name", f.name},
                                 {"bit_width", f.bit_width},
                                 {"depth_levels", f.depth_levels}});
    }
    return doc.dump(2) + "\n";
}

bool FieldSchema::has_field(int code) const { return code_to_field_.count(code) > 0; }

const FieldDef& FieldSchema::field(int code) const {
    auto it = code_to_field_.find(code);
    if (it == code_to_field_.end())
        fail(ErrorCode::UnknownFieldCode, "field code " + std::to_string(code));
    return fields_[it->second];
}

int FieldSchema::dim_index(int code, int depth) const {
    const FieldDef& f = field(code);
    if (depth < 0 || depth >= f.depth_levels)
        fail(ErrorCode::WidthMismatch,
             "depth " + std::to_string(depth) + " out of range for field " + f.name);
    return dim_lookup_.at((static_cast<std::uint64_t>(code) << 8) | depth);
}

std::uint64_t FieldSchema::parse_value(int code, const std::string& text) const {
    const FieldDef& f = field(code);
    if (text.find(':') != std::string::npos) {
        if (f.bit_width != 48)
            fail(ErrorCode::WidthMismatch, "MAC notation on " + std::to_string(f.bit_width) +
                                               "-bit field " + f.name);
        std::uint64_t v = 0;
        int groups = 0;
        std::stringstream ss(text);
        std::string part;
        while (std::getline(ss, part, ':')) {
            if (part.size() != 2 || !std::isxdigit(static_cast<unsigned char>(part[0])) ||
                !std::isxdigit(static_cast<unsigned char>(part[1])))
                fail(ErrorCode::WidthMismatch, "bad MAC value: " + text);
            v = (v << 8) | std::stoul(part, nullptr, 16);
            ++groups;
        }
        if (groups != 6) fail(ErrorCode::WidthMismatch, "bad MAC value: " + text);
        return v;
    }
    if (text.find('.') != std::string::npos) {
        if (f.bit_width != 32)
            fail(ErrorCode::WidthMismatch, "dotted-quad notation on " +
                                               std::to_string(f.bit_width) + "-bit field " + f.name);
        std::uint64_t v = 0;
        int groups = 0;
        std::stringstream ss(text);
        std::string part;
        while (std::getline(ss, part, '.')) {
            std::uint64_t octet = 0;
            if (!parse_u64(part, octet) || octet > 255)
                fail(ErrorCode::WidthMismatch, "bad dotted-quad value: " + text);
            v = (v << 8) | octet;
            ++groups;
        }
        if (groups != 4) fail(ErrorCode::WidthMismatch, "bad dotted-quad value: " + text);
        return v;
    }
    std::uint64_t v = 0;
    if (!parse_u64(text, v)) fail(ErrorCode::WidthMismatch, "bad numeric value: " + text);
    if (f.bit_width < 64 && v > width_mask(f.bit_width))
        fail(ErrorCode::WidthMismatch,
             "value " + text + " does not fit " + std::to_string(f.bit_width) + "-bit field " +
                 f.name);
    return v;
}

std::string FieldSchema::format_value(int code, std::uint64_t value) const {
    const FieldDef& f = field(code);
    if (f.bit_width == 48 && (code == kFieldEthSrc || code == kFieldEthDst)) {
        char buf[18];
        std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x",
                      static_cast<unsigned>((value >> 40) & 0xff),
                      static_cast<unsigned>((value >> 32) & 0xff),
                      static_cast<unsigned>((value >> 24) & 0xff),
                      static_cast<unsigned>((value >> 16) & 0xff),
                      static_cast<unsigned>((value >> 8) & 0xff),
                      static_cast<unsigned>(value & 0xff));
        return buf;
    }
    if (f.bit_width == 32 && (code == kFieldIpSrc || code == kFieldIpDst)) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", static_cast<unsigned>((value >> 24) & 0xff),
                      static_cast<unsigned>((value >> 16) & 0xff),
                      static_cast<unsigned>((value >> 8) & 0xff),
                      static_cast<unsigned>(value & 0xff));
        return buf;
    }
    return std::to_string(value);
}

DimMatch FieldSchema::parse_masked_value(const MaskedValue& mv) const {
    const FieldDef& f = field(mv.field_code);
    DimMatch dm;
    dm.dim = dim_index(mv.field_code, mv.depth);
    dm.mask = mv.mask.empty() ? width_mask(f.bit_width) : parse_value(mv.field_code, mv.mask);
    dm.value = parse_value(mv.field_code, mv.value) & dm.mask;
    return dm;
}

MaskedValue FieldSchema::format_dim_match(const DimMatch& dm) const {
    const DimInfo& info = dims_[dm.dim];
    MaskedValue mv;
    mv.field_code = info.code;
    mv.depth = info.depth;
    mv.value = format_value(info.code, dm.value);
    mv.mask = dm.mask == width_mask(info.width) ? "" : format_value(info.code, dm.mask);
    return mv;
}

std::uint64_t FieldSchema::header_get(std::uint64_t header, int dim) const {
    const DimInfo& info = dims_[dim];
    std::uint64_t v = 0;
    for (int k = 0; k < info.width; ++k)
        if (header & (1ULL << (info.offset + k))) v |= 1ULL << (info.width - 1 - k);
    return v;
}

std::uint64_t FieldSchema::header_set(std::uint64_t header, int dim, std::uint64_t value) const {
    const DimInfo& info = dims_[dim];
    for (int k = 0; k < info.width; ++k) {
        std::uint64_t bit = 1ULL << (info.offset + k);
        if (value & (1ULL << (info.width - 1 - k)))
            header |= bit;
        else
            header &= ~bit;
    }
    return header;
}

bool FieldSchema::fields_same(const FieldSchema& other) const {
    if (fields_.size() != other.fields_.size()) return false;
    for (std::size_t i = 0; i < fields_.size(); ++i) {
        const FieldDef& a = fields_[i];
        const FieldDef& b = other.fields_[i];
        if (a.code != b.code || a.name != b.name || a.bit_width != b.bit_width ||
            a.depth_levels != b.depth_levels)
            return false;
    }
    return true;
}

PacketSetManager::PacketSetManager(FieldSchema schema) : schema_(std::move(schema)) {
    nodes_.push_back(Node{kTermVar, kFalse, kFalse});
    nodes_.push_back(Node{kTermVar, kTrue, kTrue});
}

std::shared_ptr<PacketSetManager> PacketSetManager::create(FieldSchema schema) {
    return std::shared_ptr<PacketSetManager>(new PacketSetManager(std::move(schema)));
}

void PacketSetManager::check_same_manager(const PacketSet& a) const {
    if (a.manager().get() != this)
        fail(ErrorCode::SchemaMismatch, "packet sets belong to different managers");
}

PacketSet PacketSetManager::wrap(std::uint32_t node) { return PacketSet(shared_from_this(), node); }

std::uint32_t PacketSetManager::mk(std::uint32_t var, std::uint32_t lo, std::uint32_t hi) {
    if (lo == hi) return lo;
    std::uint64_t key = (static_cast<std::uint64_t>(var) << 54) |
                        (static_cast<std::uint64_t>(lo) << 27) | hi;
    auto it = unique_.find(key);
    if (it != unique_.end()) return it->second;
    std::uint32_t id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back(Node{var, lo, hi});
    unique_.emplace(key, id);
    return id;
}

std::uint32_t PacketSetManager::apply_and(std::uint32_t a, std::uint32_t b) {
    if (a == b) return a;
    if (a == kFalse || b == kFalse) return kFalse;
    if (a == kTrue) return b;
    if (b == kTrue) return a;
    std::uint64_t key = pack3(kOpAnd, std::min(a, b), std::max(a, b));
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const Node na = nodes_[a];
    const Node nb = nodes_[b];
    std::uint32_t var = std::min(na.var, nb.var);
    std::uint32_t alo = na.var == var ? na.lo : a;
    std::uint32_t ahi = na.var == var ? na.hi : a;
    std::uint32_t blo = nb.var == var ? nb.lo : b;
    std::uint32_t bhi = nb.var == var ? nb.hi : b;
    std::uint32_t r = mk(var, apply_and(alo, blo), apply_and(ahi, bhi));
    cache_.emplace(key, r);
    return r;
}

std::uint32_t PacketSetManager::apply_or(std::uint32_t a, std::uint32_t b) {
    if (a == b) return a;
    if (a == kTrue || b == kTrue) return kTrue;
    if (a == kFalse) return b;
    if (b == kFalse) return a;
    std::uint64_t key = pack3(kOpOr, std::min(a, b), std::max(a, b));
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const Node na = nodes_[a];
    const Node nb = nodes_[b];
    std::uint32_t var = std::min(na.var, nb.var);
    std::uint32_t alo = na.var == var ? na.lo : a;
    std::uint32_t ahi = na.var == var ? na.hi : a;
    std::uint32_t blo = nb.var == var ? nb.lo : b;
    std::uint32_t bhi = nb.var == var ? nb.hi : b;
    std::uint32_t r = mk(var, apply_or(alo, blo), apply_or(ahi, bhi));
    cache_.emplace(key, r);
    return r;
}

std::uint32_t PacketSetManager::apply_not(std::uint32_t a) {
    if (a == kFalse) return kTrue;
    if (a == kTrue) return kFalse;
    std::uint64_t key = pack3(kOpNot, a, 0);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const Node na = nodes_[a];
    std::uint32_t r = mk(na.var, apply_not(na.lo), apply_not(na.hi));
    cache_.emplace(key, r);
    return r;
}

std::uint32_t PacketSetManager::quantify(std::uint32_t a, int lo_var, int hi_var,
                                         std::uint64_t cache_tag) {
    if (a == kFalse || a == kTrue) return a;
    const Node na = nodes_[a];
    if (static_cast<int>(na.var) > hi_var) return a;
    std::uint64_t key = pack3(kOpQuant, a, cache_tag);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    std::uint32_t rl = quantify(na.lo, lo_var, hi_var, cache_tag);
    std::uint32_t rh = quantify(na.hi, lo_var, hi_var, cache_tag);
    std::uint32_t r;
    if (static_cast<int>(na.var) >= lo_var && static_cast<int>(na.var) <= hi_var)
        r = apply_or(rl, rh);
    else
        r = mk(na.var, rl, rh);
    cache_.emplace(key, r);
    return r;
}

std::uint32_t PacketSetManager::rename(std::uint32_t a, const std::vector<std::int32_t>& var_map,
                                       std::uint64_t cache_tag) {
    if (a == kFalse || a == kTrue) return a;
    std::uint64_t key = pack3(kOpRename, a, cache_tag);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const Node na = nodes_[a];
    std::uint32_t rl = rename(na.lo, var_map, cache_tag);
    std::uint32_t rh = rename(na.hi, var_map, cache_tag);
    std::int32_t nv = var_map[na.var];
    std::uint32_t r = mk(static_cast<std::uint32_t>(nv < 0 ? na.var : nv), rl, rh);
    cache_.emplace(key, r);
    return r;
}

std::uint32_t PacketSetManager::cube(const std::vector<std::pair<std::uint32_t, bool>>& literals) {
    std::uint32_t acc = kTrue;
    for (auto it = literals.rbegin(); it != literals.rend(); ++it)
        acc = it->second ? mk(it->first, kFalse, acc) : mk(it->first, acc, kFalse);
    return acc;
}

PacketSet PacketSetManager::empty_set() { return wrap(kFalse); }

PacketSet PacketSetManager::full_set() { return wrap(kTrue); }

PacketSet PacketSetManager::atom(const MaskedValue& mv) {
    DimMatch dm = schema_.parse_masked_value(mv);
    return from_dims({dm});
}

PacketSet PacketSetManager::from_dims(const std::vector<DimMatch>& conjunction) {
    std::lock_guard<std::mutex> lock(mu_);
    std::uint32_t acc = kTrue;
    for (const DimMatch& dm : conjunction) {
        int offset = schema_.dim_offset(dm.dim);
        int width = schema_.dim_width(dm.dim);
        std::vector<std::pair<std::uint32_t, bool>> literals;
        for (int k = 0; k < width; ++k) {
            int value_bit = width - 1 - k;
            if (dm.mask & (1ULL << value_bit))
                literals.emplace_back(static_cast<std::uint32_t>(offset + k),
                                      (dm.value >> value_bit) & 1);
        }
        acc = apply_and(acc, cube(literals));
    }
    return wrap(acc);
}

PacketSet PacketSetManager::intersect(const PacketSet& a, const PacketSet& b) {
    check_same_manager(a);
    check_same_manager(b);
    std::lock_guard<std::mutex> lock(mu_);
    return wrap(apply_and(a.node(), b.node()));
}

PacketSet PacketSetManager::unite(const PacketSet& a, const PacketSet& b) {
    check_same_manager(a);
    check_same_manager(b);
    std::lock_guard<std::mutex> lock(mu_);
    return wrap(apply_or(a.node(), b.node()));
}

PacketSet PacketSetManager::complement(const PacketSet& a) {
    check_same_manager(a);
    std::lock_guard<std::mutex> lock(mu_);
    return wrap(apply_not(a.node()));
}

bool PacketSetManager::is_empty(const PacketSet& a) const {
    check_same_manager(a);
    return a.node() == kFalse;
}

bool PacketSetManager::is_subset(const PacketSet& a, const PacketSet& b) {
    check_same_manager(a);
    check_same_manager(b);
    std::lock_guard<std::mutex> lock(mu_);
    return apply_and(a.node(), apply_not(b.node())) == kFalse;
}

PacketSet PacketSetManager::project_out(const PacketSet& a, int dim) {
    check_same_manager(a);
    std::lock_guard<std::mutex> lock(mu_);
    int lo = schema_.dim_offset(dim);
    int hi = lo + schema_.dim_width(dim) - 1;
    return wrap(quantify(a.node(), lo, hi, static_cast<std::uint64_t>(dim)));
}

PacketSet PacketSetManager::assign(const PacketSet& a, int dim, std::uint64_t value) {
    check_same_manager(a);
    std::lock_guard<std::mutex> lock(mu_);
    int lo = schema_.dim_offset(dim);
    int width = schema_.dim_width(dim);
    std::uint32_t q = quantify(a.node(), lo, lo + width - 1, static_cast<std::uint64_t>(dim));
    std::vector<std::pair<std::uint32_t, bool>> literals;
    for (int k = 0; k < width; ++k)
        literals.emplace_back(static_cast<std::uint32_t>(lo + k), (value >> (width - 1 - k)) & 1);
    return wrap(apply_and(q, cube(literals)));
}

PacketSet PacketSetManager::shift_depth(const PacketSet& a, bool push) {
    check_same_manager(a);
    std::lock_guard<std::mutex> lock(mu_);
    std::uint32_t acc = a.node();
    std::vector<std::int32_t> var_map(schema_.total_bits(), -1);
    std::vector<std::pair<std::uint32_t, bool>> zero_literals;
    for (const FieldDef& f : schema_.fields()) {
        if (f.depth_levels < 2) continue;
        int d0 = schema_.dim_index(f.code, 0);
        int d1 = schema_.dim_index(f.code, 1);
        int src = push ? d0 : d1;
        int dst = push ? d1 : d0;
        int drop = dst;  // the level about to receive content is cleared first
        int lo = schema_.dim_offset(drop);
        acc = quantify(acc, lo, lo + schema_.dim_width(drop) - 1,
                       static_cast<std::uint64_t>(drop));
        for (int k = 0; k < f.bit_width; ++k)
            var_map[schema_.dim_offset(src) + k] = schema_.dim_offset(dst) + k;
        for (int k = 0; k < f.bit_width; ++k)
            zero_literals.emplace_back(
                static_cast<std::uint32_t>(schema_.dim_offset(src) + k), false);
    }
    acc = rename(acc, var_map, push ? 1 : 2);
    std::sort(zero_literals.begin(), zero_literals.end());
    acc = apply_and(acc, cube(zero_literals));
    return wrap(acc);
}

void PacketSetManager::enumerate(const PacketSet& a,
                                 const std::function<void(std::uint64_t)>& sink,
                                 int max_bits) const {
    check_same_manager(a);
    if (max_bits > 63) max_bits = 63;
    if (schema_.total_bits() > max_bits)
        fail(ErrorCode::UniverseTooLarge,
             "schema width " + std::to_string(schema_.total_bits()) +
                 " exceeds enumeration bound " + std::to_string(max_bits));
    std::lock_guard<std::mutex> lock(mu_);
    const int total = schema_.total_bits();
    std::function<void(std::uint32_t, int, std::uint64_t)> walk =
        [&](std::uint32_t node, int var, std::uint64_t header) {
            if (node == kFalse) return;
            if (var == total) {
                sink(header);
                return;
            }
            std::uint32_t node_var = node == kTrue ? kTermVar : nodes_[node].var;
            if (node_var == static_cast<std::uint32_t>(var)) {
                walk(nodes_[node].lo, var + 1, header);
                walk(nodes_[node].hi, var + 1, header | (1ULL << var));
            } else {
                walk(node, var + 1, header);
                walk(node, var + 1, header | (1ULL << var));
            }
        };
    walk(a.node(), 0, 0);
}

std::vector<std::uint64_t> PacketSetManager::enumerate_vector(const PacketSet& a,
                                                              int max_bits) const {
    std::vector<std::uint64_t> out;
    enumerate(a, [&](std::uint64_t h) { out.push_back(h); }, max_bits);
    return out;
}

std::vector<std::vector<MaskedValue>> PacketSetManager::to_terms(const PacketSet& a) {
    check_same_manager(a);
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<std::vector<MaskedValue>> terms;
    std::vector<std::pair<std::uint32_t, bool>> literals;
    std::function<void(std::uint32_t)> walk = [&](std::uint32_t node) {
        if (node == kFalse) return;
        if (node == kTrue) {
            // Group the path's literals into per-dimension value/mask pairs.
            std::vector<DimMatch> dims;
            for (auto [var, bit] : literals) {
                int dim = -1;
                for (int d = 0; d < schema_.dim_count(); ++d) {
                    if (static_cast<int>(var) >= schema_.dim_offset(d) &&
                        static_cast<int>(var) < schema_.dim_offset(d) + schema_.dim_width(d)) {
                        dim = d;
                        break;
                    }
                }
                int value_bit = schema_.dim_width(dim) - 1 -
                                (static_cast<int>(var) - schema_.dim_offset(dim));
                auto it = std::find_if(dims.begin(), dims.end(),
                                       [&](const DimMatch& dm) { return dm.dim == dim; });
                if (it == dims.end()) {
                    dims.push_back(DimMatch{dim, 0, 0});
                    it = dims.end() - 1;
                }
                it->mask |= 1ULL << value_bit;
                if (bit) it->value |= 1ULL << value_bit;
            }
            std::vector<MaskedValue> term;
            for (const DimMatch& dm : dims) term.push_back(schema_.format_dim_match(dm));
            terms.push_back(std::move(term));
            return;
        }
        const Node n = nodes_[node];
        literals.emplace_back(n.var, false);
        walk(n.lo);
        literals.back().second = true;
        walk(n.hi);
        literals.pop_back();
    };
    walk(a.node());
    return terms;
}

std::size_t PacketSetManager::node_count() const {
    std::lock_guard<std::mutex> lock(mu_);
    return nodes_.size();
}

}  // namespace scylla
