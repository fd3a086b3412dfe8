#pragma once

// Traces: totally ordered monitor operations, executed one at a time with
// the state checked after every step.
//
// Text form, one operation per line, `op key=value ...`:
//   retype         subj= src= type= offset= size= [as=]
//   derive-as      subj= ts= [output=] [as=]
//   asid-retype    subj= range= count= [as=]
//   map            subj= table= obj= first= count= kind=memory|table [as=]
//   unmap          subj= mapping=
//   copy           subj= cap= to= [as=]
//   revoke         subj= cap=
//   delete         subj= cap=
//   modify-map-raw asid= base= size= dest=<node>:<addr>
//   nop
// Capability references are `@label`, `#handle` or, for map targets,
// `space:<node>`. `as=label` names the handle an operation returns.
// Blank lines and lines starting with '#' are ignored.

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "addrnet/refmon.hpp"

namespace addrnet {

struct CapRef {
    enum class Kind { Label, Handle, Space };
    Kind kind = Kind::Label;
    std::string label;
    Handle handle = 0;
    NodeId space = 0;

    static CapRef named(std::string l) { return {Kind::Label, std::move(l), 0, 0}; }
    static CapRef of(Handle h) { return {Kind::Handle, {}, h, 0}; }
    static CapRef of_space(NodeId s) { return {Kind::Space, {}, 0, s}; }

    bool operator==(const CapRef&) const = default;
};

std::string to_string(const CapRef& r);

struct RetypeOp {
    std::string subject;
    CapRef src;
    CapType type;
    std::uint64_t offset = 0;
    std::uint64_t size = 0;
    std::string bind;
    bool operator==(const RetypeOp&) const = default;
};

struct DeriveAsOp {
    std::string subject;
    CapRef ts;
    std::optional<NodeId> output;
    std::string bind;
    bool operator==(const DeriveAsOp&) const = default;
};

struct AsidRetypeOp {
    std::string subject;
    CapRef range;
    std::uint32_t count = 0;
    std::string bind;
    bool operator==(const AsidRetypeOp&) const = default;
};

struct MapOp {
    std::string subject;
    CapRef table;
    CapRef obj;
    std::uint32_t first = 0;
    std::uint32_t count = 1;
    MapKind kind = MapKind::Memory;
    std::string bind;
    bool operator==(const MapOp&) const = default;
};

struct UnmapOp {
    std::string subject;
    CapRef mapping;
    bool operator==(const UnmapOp&) const = default;
};

struct CopyOp {
    std::string subject;
    CapRef cap;
    std::string to;
    std::string bind;
    bool operator==(const CopyOp&) const = default;
};

struct RevokeOp {
    std::string subject;
    CapRef cap;
    bool operator==(const RevokeOp&) const = default;
};

struct DeleteOp {
    std::string subject;
    CapRef cap;
    bool operator==(const DeleteOp&) const = default;
};

struct ModifyMapRawOp {
    AddressSpaceId asid = 0;
    AddrRange src;
    Name dest;
    bool operator==(const ModifyMapRawOp&) const = default;
};

struct NopOp {
    bool operator==(const NopOp&) const = default;
};

using MonitorOp = std::variant<RetypeOp, DeriveAsOp, AsidRetypeOp, MapOp, UnmapOp, CopyOp, RevokeOp, DeleteOp,
                               ModifyMapRawOp, NopOp>;

std::string print_op(const MonitorOp& op);
MonitorOp parse_op(std::string_view line);

std::string print_trace(const std::vector<MonitorOp>& ops);
/// ParseError messages carry the line number.
std::vector<MonitorOp> parse_trace(std::string_view text);

/// Applies one operation; on error the state is unchanged.
void apply_op(KernelState& st, const MonitorOp& op);

struct CheckSet {
    bool never_accessible = true;
    bool config_space = true;
    bool coverage = true;
    bool static_security = true;

    static CheckSet none() { return {false, false, false, false}; }
};

/// Throws the violation kind of the first failing check.
void run_checks(const KernelState& st, const CheckSet& checks);

struct Completed {
    bool operator==(const Completed&) const = default;
};

struct Aborted {
    std::size_t step = 0;
    ErrorKind error = ErrorKind::InvalidArgument;
    std::string message;
    bool operator==(const Aborted&) const = default;
};

struct TraceResult {
    std::vector<MonitorOp> ops;
    std::vector<KernelState> states;  // initial plus one per executed step
    std::variant<Completed, Aborted> outcome;

    bool operator==(const TraceResult&) const = default;
};

TraceResult run_trace(const KernelState& initial, const std::vector<MonitorOp>& ops, const CheckSet& checks = {});

enum class TraceClass { Correct, Incorrect };

TraceClass classify_trace(const TraceResult& result);

/// Every trace of length 0..max_len over the alphabet. Throws
/// BudgetExceeded once more than `max_states` states would be kept.
std::vector<TraceResult> enumerate_small_traces(const KernelState& initial, const std::vector<MonitorOp>& alphabet,
                                                std::size_t max_len, const CheckSet& checks = {},
                                                std::size_t max_states = 1'000'000);

}  // namespace addrnet
