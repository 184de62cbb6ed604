#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "etml/interp.hpp"
#include "etml/target.hpp"

namespace etml {

struct CompiledRun {
    ValuePtr value;
    Trace server_trace;
    Trace client_trace;
    std::vector<Ref> minted;
    SlicedPair sliced;
    Queue queue;
    InjectionTable iota;
    Trace trace() const;
};

// Runs an already sliced pair; the queue and injections go through their
// text form on the way to the client.
CompiledRun run_pair(const Program& server, const Program& client);
// compile, then run_pair.
CompiledRun run_compiled(const Program& p);

// Pairs the k-th minted reference of each kind in one run with the k-th of
// the same kind in the other. Nullopt when the counts differ.
std::optional<std::map<std::string, std::string>> ref_bijection(const std::vector<Ref>& from,
                                                                 const std::vector<Ref>& to);

// Printed value with references renamed through `ren`.
std::string show_renamed(const ValuePtr& v, const std::map<std::string, std::string>& ren);
std::string render_renamed(const Trace& t, const std::map<std::string, std::string>& ren);

struct EquivReport {
    std::string name;
    std::string interp_value;
    std::string compiled_value; // renamed into the interpreter's references
    std::string interp_trace;
    std::string server_trace;
    std::string client_trace;
    std::string compiled_trace;
    bool value_match = false;
    bool trace_match = false;
    bool typing_preserved = false;
    std::string detail;
    bool ok() const { return value_match && trace_match && typing_preserved; }
};

// Both slices typecheck and their principal signatures are subtypes of the
// sliced source signature.
bool typing_preserved(const Program& p, std::string* why = nullptr);

EquivReport check_equivalence(const Program& p, const std::string& name = "");
// Same comparison against a given (possibly altered) slice of `p`.
EquivReport check_equivalence(const Program& p, const SlicedPair& sliced, const std::string& name = "");

// Interpreter run of `p` against the interpreter run of its hoisted form.
EquivReport check_hoist_equivalence(const Program& p, const std::string& name = "");

// Every END of the server slice has a matching exec in the client slice.
bool sync_balanced(const SlicedPair& s);

// Expected outcome of a corpus program (`<name>.expect`):
//   value: <printed value>
//   trace: <v1>; <v2>        (empty after the colon for no output)
//   error: <TypeError|SliceError|RuntimeError|ParseError> [<kind>]
//   unchecked: yes           (run without typechecking first)
struct CorpusEntry {
    std::string name;
    std::string source;
    std::optional<std::string> value;
    std::optional<std::string> trace;
    std::optional<std::string> error_class;
    std::optional<std::string> error_kind;
    bool unchecked = false;
};
CorpusEntry parse_expect(const std::string& name, const std::string& source, const std::string& expect);

struct CorpusResult {
    std::string name;
    bool passed = false;
    std::string detail;
    std::optional<EquivReport> report;
};
CorpusResult run_entry(const CorpusEntry& e);

std::vector<CorpusEntry> load_corpus(const std::string& dir);
std::vector<CorpusResult> run_corpus(const std::vector<CorpusEntry>& entries);

// Outcome of a stage as (class, kind), e.g. ("TypeError", "Mismatch").
std::pair<std::string, std::string> classify_error(const std::exception& e);

}  // namespace etml
